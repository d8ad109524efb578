//! Norming constants `N_V(Z) = sup_{f in V} max_Q |f| / max_Z |f|` for finite
//! point sets, together with the interpolation machinery around them.
//!
//! For `#Z = l = dim V` the constant is the Lebesgue constant of `Z`, the
//! maximum of `sum_i |L_i|` over `Q`. For `#Z > l` it is
//! `max_{x in Q} LP(x)` where `LP(x) = max { f(x) : |f(z)| <= 1 on Z }`.
//! Either way the maximum over `Q` is taken on a uniform grid of spacing `h`,
//! refined locally, and certified by the Markov factor:
//! `max_Q <= grid_max / (1 - M_V omega(h / 2))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{sweep, Grid};
use crate::linalg::{self, greedy_volume_rows, matrix_from_rows, rank_info};
use crate::lp::{SlabLp, SLAB_RELATIVE_GAP};
use crate::spaces::{dot, AxisBox, BasisEvaluator, MarkovConstant, Space};

/// Minimal `l^inf` distance between two points of a [`PointSet`].
pub const DUPLICATE_TOL: f64 = 1e-12;

/// Finite nonempty set of points with pairwise distinct entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoints")]
pub struct PointSet {
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPoints {
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawPoints> for PointSet {
    type Error = Error;

    fn try_from(raw: RawPoints) -> Result<Self> {
        PointSet::new(raw.points)
    }
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidPoints("point set is empty".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidPoints("points must have at least one coordinate".into()));
        }
        for (j, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::InvalidPoints(format!(
                    "point {j} has {} coordinates, expected {n}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPoints(format!("point {j} has a non-finite coordinate")));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if linf(&points[i], &points[j]) <= DUPLICATE_TOL {
                    return Err(Error::InvalidPoints(format!(
                        "points {i} and {j} coincide ({:?})",
                        points[i]
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    /// One-dimensional point set.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidPoints(e.to_string()))
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Sub-set by indices (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.points[i].clone()).collect())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec<f64>> {
        self.points.iter()
    }
}

pub(crate) fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Numerical parameters shared by the grid-based computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormingConfig {
    /// Requested grid spacing `h`.
    pub grid_spacing: f64,
    /// Smallest singular value below which `Z` counts as not norming.
    pub rank_tol: f64,
    /// Maximal number of grid points per sweep.
    pub budget: usize,
    /// Largest `#Z` for exhaustive Fekete search.
    pub fekete_cap: usize,
    /// Local refinement of the best grid candidates.
    pub refine: bool,
}

impl Default for NormingConfig {
    fn default() -> Self {
        Self {
            grid_spacing: 1e-3,
            rank_tol: 1e-10,
            budget: 200_000,
            fekete_cap: 20,
            refine: true,
        }
    }
}

impl NormingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_spacing > 0.0 && self.grid_spacing.is_finite()) {
            return Err(crate::error::out_of_range("grid_spacing", "must be positive"));
        }
        if !(self.rank_tol > 0.0) {
            return Err(crate::error::out_of_range("rank_tol", "must be positive"));
        }
        if self.budget < 2 {
            return Err(crate::error::out_of_range("budget", "must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LebesgueClosedForm,
    LpGrid,
    RankDeficient,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormingReport {
    pub norming: bool,
    /// `N_V(Z)`: the best value found (grid, candidates and refinement).
    pub value: Option<f64>,
    /// `1 / N_V(Z)`, and 0 when `Z` is not norming.
    pub reciprocal: f64,
    pub lower: Option<f64>,
    /// `grid_max / (1 - M omega(h / 2))`; absent when the factor is not below 1.
    pub upper: Option<f64>,
    /// The upper bound uses a certified Markov constant.
    pub certified: bool,
    pub grid_spacing: f64,
    pub grid_points: usize,
    /// Extremal `f` (normalized by `max_Z |f| <= 1`), or for non-norming sets
    /// an `f` vanishing on `Z` with `max_Q |f| ~ 1`.
    pub witness_coefficients: Vec<f64>,
    pub witness_point: Vec<f64>,
    pub method: Method,
    pub markov: MarkovConstant,
    pub smallest_singular_value: f64,
}

/// Matrix `(f_i(x^j))` with one row per point.
pub fn interpolation_matrix(space: &Space, z: &PointSet) -> Result<Vec<Vec<f64>>> {
    z.iter().map(|x| space.evaluate_basis(x)).collect()
}

fn square_matrix(space: &Space, z: &PointSet) -> Result<nalgebra::DMatrix<f64>> {
    let l = space.dimension();
    if z.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: z.len(),
        });
    }
    Ok(matrix_from_rows(&interpolation_matrix(space, z)?, l))
}

/// `Delta_F(x^1, ..., x^l) = det (f_i(x^j))`, rows in point order and columns
/// in canonical basis order.
pub fn interpolation_determinant(space: &Space, z: &PointSet) -> Result<f64> {
    Ok(linalg::determinant(&square_matrix(space, z)?))
}

/// Cramer-rule bound `(max_i sup_Q |f_i|)^l * l * l! / |Delta_F|` on `N_V(Z)`.
pub fn cramer_bound(space: &Space, z: &PointSet) -> Result<f64> {
    let det = interpolation_determinant(space, z)?;
    if det == 0.0 || !det.is_finite() {
        return Err(Error::NotNorming("zero interpolation determinant for this subset".into()));
    }
    let l = space.dimension();
    let s = space.basis_sup_norms()?.into_iter().fold(0.0, f64::max);
    let factorial: f64 = (1..=l).map(|k| k as f64).product();
    Ok(s.powi(l as i32) * l as f64 * factorial / det.abs())
}

/// Coefficient vectors of the Lagrange functions `L_i` with `L_i(x^j) = delta_ij`.
pub fn lagrange_basis(space: &Space, z: &PointSet) -> Result<Vec<Vec<f64>>> {
    let m = square_matrix(space, z)?;
    let info = rank_info(&m, 1e-14);
    if !info.full_rank {
        return Err(Error::Singular(format!(
            "smallest singular value {:e}",
            info.smallest_singular_value
        )));
    }
    let inv = linalg::inverse(&m).ok_or_else(|| Error::Singular("LU failed".into()))?;
    let l = m.nrows();
    Ok((0..l).map(|i| (0..l).map(|k| inv[(k, i)]).collect()).collect())
}

/// Lebesgue function `sum_i |L_i(x)|` for a given Lagrange basis.
pub fn lebesgue_function(lagrange: &[Vec<f64>], phi: &[f64]) -> f64 {
    lagrange.iter().map(|c| dot(c, phi).abs()).sum()
}

/// `max_Q sum_i |L_i|` for a unisolvent `Z` with `#Z = l`.
pub fn lebesgue_constant(space: &Space, z: &PointSet, cfg: &NormingConfig) -> Result<NormingReport> {
    let l = space.dimension();
    if z.len() != l {
        return Err(Error::InvalidPoints(format!(
            "Lebesgue constant needs #Z = l = {l}, got {}",
            z.len()
        )));
    }
    evaluate(space, z, cfg, &[], false)
}

/// `N_V(Z)` through the slab LP at every grid point, whatever `#Z`.
pub fn lp_norming_constant(space: &Space, z: &PointSet, cfg: &NormingConfig) -> Result<NormingReport> {
    evaluate(space, z, cfg, &[], true)
}

/// `N_V(Z)` for `Z` of any cardinality.
pub fn norming_constant(space: &Space, z: &PointSet, cfg: &NormingConfig) -> Result<NormingReport> {
    norming_constant_with(space, z, cfg, &[])
}

fn check_in_region(space: &Space, region: &AxisBox, z: &PointSet) -> Result<()> {
    for x in z.iter() {
        space.check_point(x)?;
        if !region.contains(x, 1e-12) {
            return Err(Error::Domain {
                point: x.clone(),
                reason: "point outside the region Q of the space".into(),
            });
        }
    }
    Ok(())
}

/// Certification factor `M omega(h / 2)` and the spacing to use: `h` is
/// shrunk (within the budget) when the factor would not be below 1.
fn certification_spacing(space: &Space, m: f64, region: &AxisBox, cfg: &NormingConfig) -> Grid {
    let mut h = cfg.grid_spacing;
    if m > 0.0 && m * space.modulus.eval(h / 2.0) >= 1.0 {
        h = 2.0 * space.modulus.inverse(0.5 / m);
    }
    Grid::new(region, h, cfg.budget)
}

fn upper_from(grid_max: f64, value: f64, factor: f64) -> Option<f64> {
    (factor < 1.0).then(|| (grid_max / (1.0 - factor)).max(value))
}

/// [`norming_constant`] with additional candidate points for the maximum.
///
/// Every candidate is a point of `Q` where the exact pointwise value is
/// evaluated, so extra candidates can only improve the lower bound.
pub fn norming_constant_with(
    space: &Space,
    z: &PointSet,
    cfg: &NormingConfig,
    candidates: &[Vec<f64>],
) -> Result<NormingReport> {
    evaluate(space, z, cfg, candidates, false)
}

fn evaluate(
    space: &Space,
    z: &PointSet,
    cfg: &NormingConfig,
    candidates: &[Vec<f64>],
    force_lp: bool,
) -> Result<NormingReport> {
    cfg.validate()?;
    space.validate()?;
    let region = space.region()?;
    check_in_region(space, &region, z)?;
    let l = space.dimension();
    let rows = interpolation_matrix(space, z)?;
    let info = rank_info(&matrix_from_rows(&rows, l), cfg.rank_tol);
    let markov = space.markov_constant_on(&region)?;

    if !info.full_rank {
        let sup = certified_supnorm(space, &info.null_vector, &region, cfg)?;
        let scale = if sup.lower > 0.0 { sup.lower } else { 1.0 };
        return Ok(NormingReport {
            norming: false,
            value: None,
            reciprocal: 0.0,
            lower: None,
            upper: None,
            certified: false,
            grid_spacing: sup.grid_spacing,
            grid_points: sup.grid_points,
            witness_coefficients: info.null_vector.iter().map(|v| v / scale).collect(),
            witness_point: sup.argmax,
            method: Method::RankDeficient,
            markov,
            smallest_singular_value: info.smallest_singular_value,
        });
    }

    let grid = certification_spacing(space, markov.value, &region, cfg);
    let factor = markov.value * space.modulus.eval(grid.spacing() / 2.0);
    let mut extra: Vec<Vec<f64>> = z.points().to_vec();
    extra.extend(candidates.iter().filter(|c| region.contains(c, 0.0)).cloned());

    let (s, method, witness) = if z.len() == l && !force_lp {
        let lag = lagrange_basis(space, z)?;
        let s = sweep(
            &grid,
            &region,
            &extra,
            cfg.refine,
            || (BasisEvaluator::new(space), vec![0.0; l]),
            |(ev, phi), x| {
                ev.eval(x, phi);
                Ok(lebesgue_function(&lag, phi))
            },
        )?;
        let phi = space.evaluate_basis(&s.point)?;
        let mut w = vec![0.0; l];
        for c in &lag {
            let sign = dot(c, &phi).signum();
            w.iter_mut().zip(c).for_each(|(a, b)| *a += sign * b);
        }
        (s, Method::LebesgueClosedForm, w)
    } else {
        let seed = greedy_volume_rows(&rows, l, 1e-13);
        let s = sweep(
            &grid,
            &region,
            &extra,
            cfg.refine,
            || (SlabLp::new(&rows, l, seed.clone()), BasisEvaluator::new(space), vec![0.0; l]),
            |(lp, ev, phi), x| {
                ev.eval(x, phi);
                Ok(lp.maximize(phi)?.value)
            },
        )?;
        let phi = space.evaluate_basis(&s.point)?;
        let w = SlabLp::new(&rows, l, seed.clone()).maximize(&phi)?.coefficients;
        (s, Method::LpGrid, w)
    };
    let slack = if method == Method::LpGrid { 1.0 + SLAB_RELATIVE_GAP } else { 1.0 };

    let value = s.value.max(1.0);
    Ok(NormingReport {
        norming: true,
        value: Some(value),
        reciprocal: 1.0 / value,
        lower: Some(value),
        upper: upper_from(s.grid_max * slack, value, factor),
        certified: markov.certified && factor < 1.0,
        grid_spacing: grid.spacing(),
        grid_points: grid.len(),
        witness_coefficients: witness,
        witness_point: s.point,
        method,
        markov,
        smallest_singular_value: info.smallest_singular_value,
    })
}

/// Exact pointwise value `max { f(x) : |f(z)| <= 1 on Z }`.
pub fn pointwise_value(space: &Space, z: &PointSet, x: &[f64]) -> Result<f64> {
    let l = space.dimension();
    let rows = interpolation_matrix(space, z)?;
    let seed = greedy_volume_rows(&rows, l, 1e-13);
    if seed.len() < l {
        return Err(Error::NotNorming("interpolation matrix is rank deficient".into()));
    }
    let phi = space.evaluate_basis(x)?;
    Ok(SlabLp::new(&rows, l, seed).maximize(&phi)?.value)
}

/// Bracket `[lower, upper]` around `sup_box |f|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupBracket {
    pub lower: f64,
    /// `+inf` when the Markov factor could not be brought below 1.
    pub upper: f64,
    pub certified: bool,
    pub grid_spacing: f64,
    pub grid_points: usize,
    pub argmax: Vec<f64>,
}

/// Grid maximum of `|f|` over `region` with the Markov-factor upper bound.
pub fn certified_supnorm(
    space: &Space,
    coefficients: &[f64],
    region: &AxisBox,
    cfg: &NormingConfig,
) -> Result<SupBracket> {
    let l = space.dimension();
    if coefficients.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: coefficients.len(),
        });
    }
    if region.dim() != space.vars() {
        return Err(Error::DimensionMismatch {
            expected: space.vars(),
            got: region.dim(),
        });
    }
    space.check_point(&region.lo)?;
    space.check_point(&region.hi)?;
    if let Some(c) = space.constant_index() {
        if coefficients.iter().enumerate().all(|(i, &a)| i == c || a == 0.0) {
            let v = coefficients[c].abs() * space.basis()[c].eval(&region.lo).abs();
            return Ok(SupBracket {
                lower: v,
                upper: v,
                certified: true,
                grid_spacing: 0.0,
                grid_points: 0,
                argmax: region.lo.clone(),
            });
        }
    }
    let markov = space.markov_constant_on(region)?;
    let grid = certification_spacing(space, markov.value, region, cfg);
    let factor = markov.value * space.modulus.eval(grid.spacing() / 2.0);
    let s = sweep(
        &grid,
        region,
        &[],
        cfg.refine,
        || (BasisEvaluator::new(space), vec![0.0; l]),
        |(ev, phi), x| {
            ev.eval(x, phi);
            Ok(dot(coefficients, phi).abs())
        },
    )?;
    let upper = upper_from(s.grid_max, s.value, factor);
    Ok(SupBracket {
        lower: s.value,
        upper: upper.unwrap_or(f64::INFINITY),
        certified: markov.certified && upper.is_some(),
        grid_spacing: grid.spacing(),
        grid_points: grid.len(),
        argmax: s.point,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeketeMode {
    Greedy,
    Exhaustive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeketeSubset {
    /// Indices into the input set, increasing.
    pub indices: Vec<usize>,
    pub points: PointSet,
    pub determinant: f64,
}

/// Subset of cardinality `l` with (greedily or exactly) maximal `|Delta_F|`.
pub fn fekete_select(
    space: &Space,
    z: &PointSet,
    mode: FeketeMode,
    cfg: &NormingConfig,
) -> Result<FeketeSubset> {
    let l = space.dimension();
    if z.len() < l {
        return Err(Error::InvalidPoints(format!(
            "Fekete selection needs at least l = {l} points, got {}",
            z.len()
        )));
    }
    let rows = interpolation_matrix(space, z)?;
    let indices = match mode {
        FeketeMode::Greedy => {
            let mut idx = greedy_volume_rows(&rows, l, 1e-13);
            if idx.len() < l {
                return Err(Error::NotNorming("every subset has zero determinant".into()));
            }
            idx.sort_unstable();
            idx
        }
        FeketeMode::Exhaustive => {
            if z.len() > cfg.fekete_cap {
                return Err(crate::error::out_of_range(
                    "points",
                    format!(
                        "exhaustive Fekete search is capped at {} points, got {}",
                        cfg.fekete_cap,
                        z.len()
                    ),
                ));
            }
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut comb: Vec<usize> = (0..l).collect();
            loop {
                let m = matrix_from_rows(&comb.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>(), l);
                let d = linalg::determinant(&m).abs();
                if best.as_ref().is_none_or(|b| d > b.0 * (1.0 + 1e-12)) {
                    best = Some((d, comb.clone()));
                }
                if !next_combination(&mut comb, z.len()) {
                    break;
                }
            }
            let (d, idx) = best.expect("at least one subset");
            if d == 0.0 {
                return Err(Error::NotNorming("every subset has zero determinant".into()));
            }
            idx
        }
    };
    let points = z.subset(&indices)?;
    let determinant = interpolation_determinant(space, &points)?;
    if determinant == 0.0 {
        return Err(Error::NotNorming("every subset has zero determinant".into()));
    }
    Ok(FeketeSubset {
        indices,
        points,
        determinant,
    })
}

/// Advances a sorted combination of `0..n`; false after the last one.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Check of `N(Z') / l <= N(Z) <= N(Z')` for the exhaustive Fekete subset `Z'`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichReport {
    pub dimension: usize,
    pub fekete_indices: Vec<usize>,
    pub norming_z: f64,
    pub norming_fekete: f64,
    /// `N(Z) <= N(Z')`.
    pub upper_holds: bool,
    /// `N(Z') <= l N(Z)`.
    pub lower_holds: bool,
    /// `max_i max_Z |L_i|` for the Lagrange basis of `Z'`.
    pub lagrange_max: f64,
    pub lagrange_holds: bool,
    pub holds: bool,
}

pub fn sandwich_check(space: &Space, z: &PointSet, cfg: &NormingConfig) -> Result<SandwichReport> {
    let l = space.dimension();
    let fek = fekete_select(space, z, FeketeMode::Exhaustive, cfg)?;
    let nz = norming_constant(space, z, cfg)?;
    if !nz.norming {
        return Err(Error::NotNorming("sandwich check needs a norming set".into()));
    }
    let nf = norming_constant_with(space, &fek.points, cfg, std::slice::from_ref(&nz.witness_point))?;
    let nz = norming_constant_with(space, z, cfg, std::slice::from_ref(&nf.witness_point))?;
    let (a, b) = (nz.value.unwrap_or(f64::INFINITY), nf.value.unwrap_or(f64::INFINITY));
    let lag = lagrange_basis(space, &fek.points)?;
    let mut lagrange_max: f64 = 0.0;
    for x in z.iter() {
        let phi = space.evaluate_basis(x)?;
        for c in &lag {
            lagrange_max = lagrange_max.max(dot(c, &phi).abs());
        }
    }
    let upper_holds = a <= b * (1.0 + 1e-6);
    let lower_holds = b <= l as f64 * a * (1.0 + 1e-6);
    let lagrange_holds = lagrange_max <= 1.0 + 1e-9;
    Ok(SandwichReport {
        dimension: l,
        fekete_indices: fek.indices,
        norming_z: a,
        norming_fekete: b,
        upper_holds,
        lower_holds,
        lagrange_max,
        lagrange_holds,
        holds: upper_holds && lower_holds && lagrange_holds,
    })
}
