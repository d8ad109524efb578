//! Exponential sums, the log-geometry of the positive orthant and the
//! Turán–Nazarov / fewnomial Remez-type bounds.
//!
//! The absolute constant `c` of the Turán–Nazarov inequality has no known
//! value; every bound takes it explicitly, and [`estimate_c`] measures the
//! smallest `c` consistent with sampled instances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::BoundResult;
use crate::error::{out_of_range, Error, Result};
use crate::spaces::{gauss_legendre_1d, AxisBox};

/// One term `c exp(<rate, x>)` of an exponential polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub coef: Complex64,
    pub rate: Vec<Complex64>,
}

/// `p(x) = sum_k c_k exp(f_k(x))` with complex coefficients and complex
/// linear functionals `f_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExpPoly", into = "RawExpPoly")]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawTerm {
    re_c: f64,
    #[serde(default)]
    im_c: f64,
    re_rate: Vec<f64>,
    #[serde(default)]
    im_rate: Option<Vec<f64>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawExpPoly {
    terms: Vec<RawTerm>,
}

impl TryFrom<RawExpPoly> for ExpPoly {
    type Error = Error;

    fn try_from(raw: RawExpPoly) -> Result<Self> {
        let terms = raw
            .terms
            .into_iter()
            .map(|t| {
                let im = t.im_rate.unwrap_or_else(|| vec![0.0; t.re_rate.len()]);
                if im.len() != t.re_rate.len() {
                    return Err(Error::DimensionMismatch {
                        expected: t.re_rate.len(),
                        got: im.len(),
                    });
                }
                Ok(ExpTerm {
                    coef: Complex64::new(t.re_c, t.im_c),
                    rate: t.re_rate.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ExpPoly::new(terms)
    }
}

impl From<ExpPoly> for RawExpPoly {
    fn from(p: ExpPoly) -> Self {
        RawExpPoly {
            terms: p
                .terms
                .into_iter()
                .map(|t| RawTerm {
                    re_c: t.coef.re,
                    im_c: t.coef.im,
                    re_rate: t.rate.iter().map(|z| z.re).collect(),
                    im_rate: Some(t.rate.iter().map(|z| z.im).collect()),
                })
                .collect(),
        }
    }
}

impl ExpPoly {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(out_of_range("terms", "need at least one term"));
        };
        let n = first.rate.len();
        if n == 0 {
            return Err(out_of_range("rate", "rates need at least one component"));
        }
        for (k, t) in terms.iter().enumerate() {
            if t.rate.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.rate.len(),
                });
            }
            if !t.coef.re.is_finite() || !t.coef.im.is_finite() || t.rate.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(out_of_range("terms", format!("term {k} is not finite")));
            }
            if terms[..k].iter().any(|s| s.rate == t.rate) {
                return Err(out_of_range("rate", format!("term {k} repeats an earlier rate")));
            }
        }
        Ok(Self { terms })
    }

    /// Univariate `sum_k c_k exp(lambda_k t)`.
    pub fn univariate(terms: &[(Complex64, Complex64)]) -> Result<Self> {
        Self::new(
            terms
                .iter()
                .map(|&(coef, rate)| ExpTerm { coef, rate: vec![rate] })
                .collect(),
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidSpace(format!("exponential polynomial: {e}")))
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    /// `m`: number of terms minus one.
    pub fn m(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn vars(&self) -> usize {
        self.terms[0].rate.len()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let e: Complex64 = t.rate.iter().zip(x).map(|(r, &v)| r * v).sum();
                t.coef * e.exp()
            })
            .sum()
    }

    pub fn abs(&self, x: &[f64]) -> f64 {
        self.eval(x).norm()
    }

    /// `max_k |Re f_k|` for univariate sums.
    pub fn max_abs_re_rate(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.rate.iter().map(|z| z.re.abs()))
            .fold(0.0, f64::max)
    }

    /// Restriction `t -> p(x0 + t (x1 - x0))`, `t` in `[0, 1]`.
    pub fn restrict_to_segment(&self, x0: &[f64], x1: &[f64]) -> Result<ExpPoly> {
        let n = self.vars();
        if x0.len() != n || x1.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x0.len().min(x1.len()),
            });
        }
        let mut terms: Vec<ExpTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let at0: Complex64 = t.rate.iter().zip(x0).map(|(r, &v)| r * v).sum();
            let slope: Complex64 = t.rate.iter().zip(x0.iter().zip(x1)).map(|(r, (&a, &b))| r * (b - a)).sum();
            let coef = t.coef * at0.exp();
            // equal projected rates merge into one term
            if let Some(s) = terms.iter_mut().find(|s| s.rate[0] == slope) {
                s.coef += coef;
            } else {
                terms.push(ExpTerm { coef, rate: vec![slope] });
            }
        }
        ExpPoly::new(terms)
    }

    /// `sup |p|` over a union of intervals, by sampling refined until the
    /// relative change drops below `1e-6`, then polished locally. Not
    /// certified.
    pub fn sup_abs_intervals(&self, intervals: &[(f64, f64)]) -> f64 {
        intervals
            .iter()
            .map(|&(a, b)| self.sup_abs_interval(a, b))
            .fold(0.0, f64::max)
    }

    fn sup_abs_interval(&self, a: f64, b: f64) -> f64 {
        let f = |t: f64| self.abs(&[t]);
        if b <= a {
            return f(a);
        }
        let sample = |k: usize| -> (f64, f64) {
            (0..=k)
                .map(|i| {
                    let t = if i == k { b } else { a + (b - a) * i as f64 / k as f64 };
                    (f(t), t)
                })
                .fold((f64::NEG_INFINITY, a), |best, c| if c.0 > best.0 { c } else { best })
        };
        let mut k = 64;
        let mut best = sample(k);
        loop {
            let next = sample(2 * k);
            k *= 2;
            let change = (next.0 - best.0).abs() / next.0.abs().max(f64::MIN_POSITIVE);
            best = next;
            if (change < 1e-6 && k >= 512) || k >= 1 << 20 {
                break;
            }
        }
        // golden-section polish around the best sample
        let h = (b - a) / k as f64;
        let (mut lo, mut hi) = ((best.1 - h).max(a), (best.1 + h).min(b));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..80 {
            if f1 >= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            }
        }
        best.0.max(f1).max(f2)
    }
}

/// Componentwise exponential `e_n`.
pub fn en_map(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| v.exp()).collect()
}

/// Componentwise logarithm, the inverse of [`en_map`].
pub fn log_map(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain {
            point: x.to_vec(),
            reason: "log map needs positive coordinates".into(),
        });
    }
    Ok(x.iter().map(|v| v.ln()).collect())
}

/// `(x_1^t y_1^(1-t), ..., x_n^t y_n^(1-t))`, the log-geodesic from `y` to `x`.
pub fn geodesic_point(x: &[f64], y: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(out_of_range("t", format!("{t} not in [0, 1]")));
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let (lx, ly) = (log_map(x)?, log_map(y)?);
    if t == 1.0 {
        return Ok(x.to_vec());
    }
    if t == 0.0 {
        return Ok(y.to_vec());
    }
    Ok(lx.iter().zip(&ly).map(|(a, b)| (t * a + (1.0 - t) * b).exp()).collect())
}

/// Where a Hausdorff measure came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureProvenance {
    Computed,
    UserAsserted,
}

/// Compact logarithmically convex body in the positive orthant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogBody {
    /// Box `[a_1, b_1] x ... x [a_n, b_n]`, `0 < a <= b`; its dimension is the
    /// number of non-degenerate sides.
    Box { a: Vec<f64>, b: Vec<f64> },
    /// Image under `e_n` of the convex hull of `log_vertices`.
    Polytope {
        log_vertices: Vec<Vec<f64>>,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        measure: Option<f64>,
    },
}

impl LogBody {
    pub fn orthant_box(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let body = LogBody::Box { a, b };
        body.validate()?;
        Ok(body)
    }

    /// Log-geodesic segment between two points of the orthant.
    pub fn segment(x: &[f64], y: &[f64]) -> Result<Self> {
        let body = LogBody::Polytope {
            log_vertices: vec![log_map(x)?, log_map(y)?],
            dim: 1,
            measure: None,
        };
        body.validate()?;
        Ok(body)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LogBody::Box { a, b } => {
                AxisBox::new(a.clone(), b.clone())?;
                if a.iter().any(|&v| !(v > 0.0)) {
                    return Err(out_of_range("a", "box must lie in the open positive orthant"));
                }
            }
            LogBody::Polytope { log_vertices, dim, measure } => {
                let n = log_vertices.first().map_or(0, Vec::len);
                if n == 0 || log_vertices.iter().any(|v| v.len() != n || v.iter().any(|c| !c.is_finite())) {
                    return Err(out_of_range("log_vertices", "need finite vertices of equal length"));
                }
                if *dim > n || *dim + 1 > log_vertices.len() {
                    return Err(out_of_range("dim", format!("{dim} too large for the vertex set")));
                }
                if let Some(m) = measure {
                    if !(*m > 0.0 && m.is_finite()) {
                        return Err(out_of_range("measure", "must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> usize {
        match self {
            LogBody::Box { a, .. } => a.len(),
            LogBody::Polytope { log_vertices, .. } => log_vertices[0].len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LogBody::Box { a, b } => a.iter().zip(b).filter(|(x, y)| y > x).count(),
            LogBody::Polytope { dim, .. } => *dim,
        }
    }

    /// Points of the body whose coordinate products are extremal: box
    /// vertices, or the images of the log-vertices.
    fn extreme_points(&self) -> Vec<Vec<f64>> {
        match self {
            LogBody::Box { a, b } => {
                let n = a.len();
                (0..1usize << n)
                    .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { b[i] } else { a[i] }).collect())
                    .collect()
            }
            LogBody::Polytope { log_vertices, .. } => log_vertices.iter().map(|v| en_map(v)).collect(),
        }
    }

    /// `sup_{x,y in B} (x / y)^alpha = exp(width of <alpha, .> over log B)`, as a log.
    pub fn log_ratio_width(&self, alpha: &[f64]) -> f64 {
        match self {
            LogBody::Box { a, b } => alpha
                .iter()
                .zip(a.iter().zip(b))
                .map(|(al, (x, y))| al.abs() * (y / x).ln())
                .sum(),
            LogBody::Polytope { log_vertices, .. } => {
                let vals: Vec<f64> = log_vertices.iter().map(|v| crate::spaces::dot(alpha, v)).collect();
                let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                max - min
            }
        }
    }

    /// Hausdorff `d`-measure of the body and its provenance.
    pub fn measure(&self) -> Result<(f64, MeasureProvenance)> {
        match self {
            LogBody::Box { a, b } => Ok((
                a.iter().zip(b).map(|(x, y)| y - x).filter(|&s| s > 0.0).product(),
                MeasureProvenance::Computed,
            )),
            LogBody::Polytope { measure: Some(m), .. } => Ok((*m, MeasureProvenance::UserAsserted)),
            LogBody::Polytope { log_vertices, dim: 1, .. } if log_vertices.len() == 2 => {
                Ok((log_segment_length(&log_vertices[0], &log_vertices[1]), MeasureProvenance::Computed))
            }
            LogBody::Polytope { .. } => Err(Error::MissingParameter("measure")),
        }
    }

    /// `K_d(B)`.
    pub fn kd(&self, d: usize) -> Result<f64> {
        kd_constant_points(&self.extreme_points(), d)
    }

    /// `K_1(B)`, the ratio of the largest to the smallest coordinate.
    pub fn k1(&self) -> Result<f64> {
        self.kd(1)
    }
}

/// Euclidean length of `t -> e_n(u + t (v - u))`, `t` in `[0, 1]`.
fn log_segment_length(u: &[f64], v: &[f64]) -> f64 {
    let (nodes, weights) = gauss_legendre_1d(64);
    let speed = |t: f64| -> f64 {
        u.iter()
            .zip(v)
            .map(|(a, b)| {
                let w = (b - a) * (a + t * (b - a)).exp();
                w * w
            })
            .sum::<f64>()
            .sqrt()
    };
    // split [0, 1] into pieces so the exponential stays well resolved
    let pieces = 16;
    let mut total = 0.0;
    for p in 0..pieces {
        let (lo, hi) = (p as f64 / pieces as f64, (p + 1) as f64 / pieces as f64);
        for (x, w) in nodes.iter().zip(&weights) {
            total += 0.5 * (hi - lo) * w * speed(lo + 0.5 * (hi - lo) * (x + 1.0));
        }
    }
    total
}

/// `K_d(S)` of a finite set of positive points: the largest `d`-fold
/// coordinate product over the smallest one, across all index subsets.
pub fn kd_constant_points(points: &[Vec<f64>], d: usize) -> Result<f64> {
    let n = points.first().map_or(0, Vec::len);
    if points.is_empty() || n == 0 {
        return Err(out_of_range("points", "need a nonempty set"));
    }
    if d == 0 || d > n {
        return Err(out_of_range("d", format!("{d} not in [1, {n}]")));
    }
    for p in points {
        log_map(p)?;
    }
    let mut comb: Vec<usize> = (0..d).collect();
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    loop {
        for p in points {
            let prod: f64 = comb.iter().map(|&i| p[i]).product();
            hi = hi.max(prod);
            lo = lo.min(prod);
        }
        if !crate::norming::next_combination(&mut comb, n) {
            break;
        }
    }
    Ok(hi / lo)
}

/// `K_d` of a body.
pub fn kd_constant(body: &LogBody, d: usize) -> Result<f64> {
    body.validate()?;
    body.kd(d)
}

fn need_c(c: Option<f64>, m: usize) -> Result<f64> {
    match c {
        Some(c) if c > 0.0 && c.is_finite() => Ok(c),
        Some(c) => Err(out_of_range("c", format!("{c} must be positive"))),
        None if m == 0 => Ok(1.0),
        None => Err(Error::MissingParameter("c")),
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(out_of_range(name, format!("{v} must be positive")))
    }
}

/// `e^(|I| max |Re lambda_k|) (c |I| / |Z|)^m`.
pub fn tn_bound_1d(m: usize, max_re_rate: f64, len_i: f64, meas_z: f64, c: Option<f64>) -> Result<f64> {
    let c = need_c(c, m)?;
    positive("len_i", len_i)?;
    positive("meas_z", meas_z)?;
    if meas_z > len_i * (1.0 + 1e-12) {
        return Err(out_of_range("meas_z", format!("{meas_z} exceeds |I| = {len_i}")));
    }
    if !(max_re_rate >= 0.0) {
        return Err(out_of_range("max_re_rate", "must be non-negative"));
    }
    Ok((len_i * max_re_rate).exp() * (c * len_i / meas_z).powi(m as i32))
}

/// Convex body in an affine subspace of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConvexBody {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Polytope {
        vertices: Vec<Vec<f64>>,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        measure: Option<f64>,
    },
}

impl ConvexBody {
    pub fn segment(x: &[f64], y: &[f64]) -> Self {
        ConvexBody::Polytope {
            vertices: vec![x.to_vec(), y.to_vec()],
            dim: 1,
            measure: None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Box { lo, hi } => lo.iter().zip(hi).filter(|(a, b)| b > a).count(),
            ConvexBody::Polytope { dim, .. } => *dim,
        }
    }

    pub fn vars(&self) -> usize {
        match self {
            ConvexBody::Box { lo, .. } => lo.len(),
            ConvexBody::Polytope { vertices, .. } => vertices.first().map_or(0, Vec::len),
        }
    }

    /// `sup_{x,y in B} <w, x - y>`.
    pub fn width(&self, w: &[f64]) -> f64 {
        match self {
            ConvexBody::Box { lo, hi } => w.iter().zip(lo.iter().zip(hi)).map(|(c, (a, b))| c.abs() * (b - a)).sum(),
            ConvexBody::Polytope { vertices, .. } => {
                let vals: Vec<f64> = vertices.iter().map(|v| crate::spaces::dot(w, v)).collect();
                vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn measure(&self) -> Result<(f64, MeasureProvenance)> {
        match self {
            ConvexBody::Box { lo, hi } => Ok((
                lo.iter().zip(hi).map(|(a, b)| b - a).filter(|&s| s > 0.0).product(),
                MeasureProvenance::Computed,
            )),
            ConvexBody::Polytope { measure: Some(m), .. } => Ok((*m, MeasureProvenance::UserAsserted)),
            ConvexBody::Polytope { vertices, dim: 1, .. } if vertices.len() == 2 => {
                let len = vertices[0]
                    .iter()
                    .zip(&vertices[1])
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt();
                Ok((len, MeasureProvenance::Computed))
            }
            ConvexBody::Polytope { .. } => Err(Error::MissingParameter("measure")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::Box { lo, hi } => AxisBox::new(lo.clone(), hi.clone()).map(|_| ()),
            ConvexBody::Polytope { vertices, dim, .. } => {
                let n = self.vars();
                if n == 0 || vertices.iter().any(|v| v.len() != n || v.iter().any(|c| !c.is_finite())) {
                    return Err(out_of_range("vertices", "need finite vertices of equal length"));
                }
                if *dim > n || *dim + 1 > vertices.len() {
                    return Err(out_of_range("dim", format!("{dim} too large for the vertex set")));
                }
                Ok(())
            }
        }
    }
}

/// `e^(max_k sup_B Re f_k(x - y)) (c d H_d(B) / H_d(Z))^m`.
pub fn tn_bound_multi(p: &ExpPoly, body: &ConvexBody, meas_z: f64, c: Option<f64>) -> Result<BoundResult> {
    body.validate()?;
    if body.vars() != p.vars() {
        return Err(Error::DimensionMismatch {
            expected: p.vars(),
            got: body.vars(),
        });
    }
    let m = p.m();
    let c = need_c(c, m)?;
    positive("meas_z", meas_z)?;
    let d = body.dim();
    let width = p
        .terms()
        .iter()
        .map(|t| body.width(&t.rate.iter().map(|z| z.re).collect::<Vec<_>>()))
        .fold(0.0, f64::max);
    let (meas_b, provenance) = body.measure()?;
    let inputs = json!({
        "m": m, "d": d, "width": width, "meas_b": meas_b, "meas_z": meas_z, "c": c,
        "measure_provenance": provenance,
    });
    if d == 0 || meas_b <= 0.0 {
        return Ok(inapplicable("tn_multi", inputs, "body has dimension 0"));
    }
    if meas_z > meas_b * (1.0 + 1e-12) {
        return Err(out_of_range("meas_z", format!("{meas_z} exceeds H_d(B) = {meas_b}")));
    }
    Ok(applicable(
        "tn_multi",
        width.exp() * (c * d as f64 * meas_b / meas_z).powi(m as i32),
        inputs,
    ))
}

fn applicable(name: &str, value: f64, inputs: serde_json::Value) -> BoundResult {
    BoundResult {
        name: name.into(),
        value,
        inputs,
        applicable: true,
        reason: None,
        note: None,
    }
}

fn inapplicable(name: &str, inputs: serde_json::Value, reason: &str) -> BoundResult {
    BoundResult {
        name: name.into(),
        value: f64::INFINITY,
        inputs,
        applicable: false,
        reason: Some(reason.into()),
        note: None,
    }
}

fn check_exponents(exponents: &[Vec<f64>], n: usize) -> Result<()> {
    if exponents.is_empty() {
        return Err(out_of_range("exponents", "need at least one exponent"));
    }
    for (k, e) in exponents.iter().enumerate() {
        if e.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: e.len(),
            });
        }
        if e.iter().any(|v| !v.is_finite()) {
            return Err(out_of_range("exponents", format!("exponent {k} is not finite")));
        }
        if exponents[..k].contains(e) {
            return Err(out_of_range("exponents", format!("exponent {k} is repeated")));
        }
    }
    Ok(())
}

/// `max_k sup_{x,y in B} (x/y)^alpha_k * (c d K_d(B) H_d(B) / H_d(Z))^m`.
pub fn fewnomial_bound(exponents: &[Vec<f64>], body: &LogBody, meas_z: f64, c: Option<f64>) -> Result<BoundResult> {
    body.validate()?;
    check_exponents(exponents, body.vars())?;
    let m = exponents.len() - 1;
    let c = need_c(c, m)?;
    positive("meas_z", meas_z)?;
    let d = body.dim();
    let (meas_b, provenance) = body.measure()?;
    let first = exponents.iter().map(|a| body.log_ratio_width(a)).fold(0.0, f64::max).exp();
    let mut inputs = json!({
        "m": m, "d": d, "meas_b": meas_b, "meas_z": meas_z, "c": c,
        "measure_provenance": provenance, "ratio_factor": first,
    });
    if d == 0 || meas_b <= 0.0 {
        return Ok(inapplicable("fewnomial", inputs, "body has dimension 0"));
    }
    if meas_z > meas_b * (1.0 + 1e-12) {
        return Err(out_of_range("meas_z", format!("{meas_z} exceeds H_d(B) = {meas_b}")));
    }
    let kd = body.kd(d)?;
    inputs["k_d"] = json!(kd);
    Ok(applicable(
        "fewnomial",
        first * (c * d as f64 * kd * meas_b / meas_z).powi(m as i32),
        inputs,
    ))
}

/// Rectangle refinement `max_k (b/a)^|alpha_k| (c n prod b_i ln(b_i/a_i) / mu_n(Z))^m`.
pub fn rectangle_fewnomial_bound(a: &[f64], b: &[f64], exponents: &[Vec<f64>], meas_z: f64, c: Option<f64>) -> Result<BoundResult> {
    let body = LogBody::orthant_box(a.to_vec(), b.to_vec())?;
    if a.iter().zip(b).any(|(x, y)| !(y > x)) {
        return Err(out_of_range("b", "rectangle needs a_i < b_i in every coordinate"));
    }
    check_exponents(exponents, a.len())?;
    let n = a.len();
    let m = exponents.len() - 1;
    let c = need_c(c, m)?;
    positive("meas_z", meas_z)?;
    let volume: f64 = a.iter().zip(b).map(|(x, y)| y - x).product();
    if meas_z > volume * (1.0 + 1e-12) {
        return Err(out_of_range("meas_z", format!("{meas_z} exceeds the box volume {volume}")));
    }
    let first = exponents.iter().map(|al| body.log_ratio_width(al)).fold(0.0, f64::max).exp();
    let h: f64 = a.iter().zip(b).map(|(x, y)| y * (y / x).ln()).product();
    Ok(applicable(
        "rectangle_fewnomial",
        first * (c * n as f64 * h / meas_z).powi(m as i32),
        json!({"m": m, "n": n, "meas_z": meas_z, "c": c, "ratio_factor": first, "log_weighted_volume": h}),
    ))
}

/// `K_1(B)^(m + max_k |alpha_k|) (c d H_d(B) / H_d(Z))^m` with
/// `|alpha| = sum_i |alpha_i|`.
pub fn cor31_bound(exponents: &[Vec<f64>], body: &LogBody, meas_z: f64, c: Option<f64>) -> Result<BoundResult> {
    body.validate()?;
    check_exponents(exponents, body.vars())?;
    let m = exponents.len() - 1;
    let c = need_c(c, m)?;
    positive("meas_z", meas_z)?;
    let d = body.dim();
    let (meas_b, provenance) = body.measure()?;
    let k1 = body.k1()?;
    let degree = exponents
        .iter()
        .map(|a| a.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let inputs = json!({
        "m": m, "d": d, "k_1": k1, "degree": degree, "meas_b": meas_b, "meas_z": meas_z, "c": c,
        "measure_provenance": provenance,
    });
    if d == 0 || meas_b <= 0.0 {
        return Ok(inapplicable("cor31", inputs, "body has dimension 0"));
    }
    if meas_z > meas_b * (1.0 + 1e-12) {
        return Err(out_of_range("meas_z", format!("{meas_z} exceeds H_d(B) = {meas_b}")));
    }
    Ok(applicable(
        "cor31",
        k1.powf(m as f64 + degree) * (c * d as f64 * meas_b / meas_z).powi(m as i32),
        inputs,
    ))
}

/// `(b/a)^n_m (c b ln(b/a) / omega)^m` for `p = sum_k c_k x^n_k` on `[a, b]`.
pub fn discrete_fewnomial_bound(a: f64, b: f64, exponents: &[u32], omega: f64, c: Option<f64>) -> Result<f64> {
    positive("a", a)?;
    if !(b > a && b.is_finite()) {
        return Err(out_of_range("b", format!("need b > a = {a}")));
    }
    if exponents.is_empty() || exponents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(out_of_range("exponents", "need strictly increasing exponents"));
    }
    let m = exponents.len() - 1;
    let top = *exponents.last().expect("nonempty");
    if m == 0 {
        return Ok((b / a).powi(top as i32));
    }
    let c = need_c(c, m)?;
    positive("omega", omega)?;
    Ok((b / a).powi(top as i32) * (c * b * (b / a).ln() / omega).powi(m as i32))
}

/// `(R/rho)^N (c R ln(R/rho) / delta)^m` for nested hypersurfaces.
pub fn nested_fewnomial_bound(r: f64, rho: f64, n: u32, m: usize, delta: f64, c: Option<f64>) -> Result<f64> {
    positive("rho", rho)?;
    if !(r > rho && r.is_finite()) {
        return Err(out_of_range("R", format!("need R > rho = {rho}")));
    }
    positive("delta", delta)?;
    let c = need_c(c, m)?;
    Ok((r / rho).powi(n as i32) * (c * r * (r / rho).ln() / delta).powi(m as i32))
}

/// Sampling distribution of Turán–Nazarov trials: `I = [0, interval_len]`,
/// `Z` a union of up to `max_intervals` random subintervals, `m` uniform in
/// `0..=m_max`, coefficients uniform in the unit square, rates with
/// `|Re| <= re_rate_max`, `|Im| <= im_rate_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialDistribution {
    pub m_max: usize,
    pub re_rate_max: f64,
    pub im_rate_max: f64,
    pub interval_len: f64,
    pub max_intervals: usize,
}

impl Default for TrialDistribution {
    fn default() -> Self {
        Self {
            m_max: 3,
            re_rate_max: 2.0,
            im_rate_max: 10.0,
            interval_len: 1.0,
            max_intervals: 4,
        }
    }
}

/// One sampled instance with both sup-norms.
#[derive(Clone, Debug)]
pub struct TnTrial {
    pub index: u64,
    pub p: ExpPoly,
    pub z: Vec<(f64, f64)>,
    pub meas_z: f64,
    pub sup_i: f64,
    pub sup_z: f64,
}

impl TnTrial {
    /// Smallest `c` for which the 1-D bound holds on this instance (0 when
    /// `m = 0`, where `c` plays no role).
    pub fn required_c(&self, len_i: f64) -> f64 {
        let m = self.p.m();
        if m == 0 {
            return 0.0;
        }
        let growth = (len_i * self.p.max_abs_re_rate()).exp();
        (self.sup_i / (growth * self.sup_z)).powf(1.0 / m as f64) * self.meas_z / len_i
    }
}

/// Instance `index` of the stream seeded by `seed`; independent of how many
/// other trials are drawn.
pub fn tn_trial(seed: u64, index: u64, dist: &TrialDistribution) -> Result<TnTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let m = rng.random_range(0..=dist.m_max);
    let mut terms: Vec<(Complex64, Complex64)> = Vec::with_capacity(m + 1);
    while terms.len() < m + 1 {
        let coef = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let rate = Complex64::new(
            rng.random_range(-dist.re_rate_max..=dist.re_rate_max),
            rng.random_range(-dist.im_rate_max..=dist.im_rate_max),
        );
        if !terms.iter().any(|t| t.1 == rate) {
            terms.push((coef, rate));
        }
    }
    let p = ExpPoly::univariate(&terms)?;
    let k = rng.random_range(1..=dist.max_intervals.max(1));
    let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..=dist.interval_len)).collect();
    cuts.sort_by(f64::total_cmp);
    let z: Vec<(f64, f64)> = cuts.chunks(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect();
    let meas_z: f64 = z.iter().map(|(a, b)| b - a).sum();
    if z.is_empty() || meas_z <= 0.0 {
        return Err(out_of_range("z", "degenerate trial set"));
    }
    let sup_i = p.sup_abs_intervals(&[(0.0, dist.interval_len)]);
    let sup_z = p.sup_abs_intervals(&z);
    Ok(TnTrial {
        index,
        p,
        z,
        meas_z,
        sup_i,
        sup_z,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Empirical minimal `c`; 0 when every trial had a single term.
    pub c: f64,
    pub single_term_only: bool,
    pub trials: u64,
    pub seed: u64,
    pub distribution: TrialDistribution,
    /// Trial attaining the maximum (first on ties).
    pub worst_trial: Option<u64>,
    pub worst_m: Option<usize>,
    pub certified: bool,
}

/// Max over trials of the `c` each instance requires. Trial `i` always uses
/// stream `i` of the seed, so the estimate is non-decreasing in `trials`.
pub fn estimate_c(trials: u64, seed: u64, dist: &TrialDistribution) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(out_of_range("trials", "need at least one trial"));
    }
    positive("interval_len", dist.interval_len)?;
    if !(dist.re_rate_max >= 0.0 && dist.im_rate_max >= 0.0) {
        return Err(out_of_range("rate_box", "rate bounds must be non-negative"));
    }
    let needs: Vec<(f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let t = tn_trial(seed, i, dist)?;
            Ok((t.required_c(dist.interval_len), t.p.m()))
        })
        .collect::<Result<_>>()?;
    let mut worst: Option<(u64, f64, usize)> = None;
    for (i, &(c, m)) in needs.iter().enumerate() {
        if m > 0 && worst.is_none_or(|w| c > w.1) {
            worst = Some((i as u64, c, m));
        }
    }
    Ok(EstimateReport {
        c: worst.map_or(0.0, |w| w.1),
        single_term_only: worst.is_none(),
        trials,
        seed,
        distribution: dist.clone(),
        worst_trial: worst.map(|w| w.0),
        worst_m: worst.map(|w| w.2),
        certified: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn maps_and_geodesics() {
        assert_eq!(en_map(&[0.0, 0.0]), vec![1.0, 1.0]);
        let l = log_map(&[E, E * E]).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-15 && (l[1] - 2.0).abs() < 1e-15);
        assert!(log_map(&[0.0]).is_err());
        let g = geodesic_point(&[1.0, 4.0], &[9.0, 4.0], 0.5).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-14 && (g[1] - 4.0).abs() < 1e-14);
        assert_eq!(geodesic_point(&[2.0, 3.0], &[5.0, 7.0], 1.0).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn kd_of_boxes() {
        let b = LogBody::orthant_box(vec![1.0, 3.0], vec![2.0, 4.0]).unwrap();
        assert_eq!(kd_constant(&b, 1).unwrap(), 4.0);
        assert!((kd_constant(&b, 2).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!(kd_constant(&b, 3).is_err());
    }

    #[test]
    fn tn_single_term() {
        assert!((tn_bound_1d(0, 2.0, 1.0, 1.0, None).unwrap() - E * E).abs() < 1e-12);
        assert!(matches!(tn_bound_1d(1, 2.0, 1.0, 0.5, None), Err(Error::MissingParameter("c"))));
        assert!(tn_bound_1d(1, 2.0, 1.0, 1.5, Some(1.0)).is_err());
        let p = ExpPoly::univariate(&[(c(1.0), c(2.0))]).unwrap();
        let ratio = p.sup_abs_intervals(&[(0.0, 1.0)]) / p.sup_abs_intervals(&[(0.0, 0.5)]);
        assert!((ratio - E).abs() < 1e-9);
    }

    #[test]
    fn tn_multi_box_and_segment() {
        let p = ExpPoly::new(vec![ExpTerm { coef: c(1.0), rate: vec![c(2.0), c(-1.0)] }]).unwrap();
        let b = ConvexBody::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        let r = tn_bound_multi(&p, &b, 0.5, None).unwrap();
        assert!((r.inputs["width"].as_f64().unwrap() - 3.0).abs() < 1e-15);
        assert!((r.value - 3f64.exp()).abs() < 1e-12);
        let q = ExpPoly::new(vec![
            ExpTerm { coef: c(1.0), rate: vec![c(1.0), c(0.5)] },
            ExpTerm { coef: c(-1.0), rate: vec![c(-0.5), c(0.25)] },
        ])
        .unwrap();
        let (x, y) = ([0.1, 0.2], [0.7, -0.4]);
        let seg = ConvexBody::segment(&x, &y);
        let multi = tn_bound_multi(&q, &seg, 0.3, Some(2.0)).unwrap().value;
        let len = (0.6f64 * 0.6 + 0.6 * 0.6).sqrt();
        let proj = q.restrict_to_segment(&x, &y).unwrap();
        // restriction to t in [0, 1]; rescale rates to arc length
        let rate = proj.max_abs_re_rate() / len;
        let one = tn_bound_1d(1, rate, len, 0.3, Some(2.0)).unwrap();
        assert!((multi - one).abs() < 1e-12 * one);
    }

    #[test]
    fn fewnomial_examples() {
        let b = LogBody::orthant_box(vec![1.0, 1.0], vec![E, E]).unwrap();
        let r = fewnomial_bound(&[vec![1.0, 0.0]], &b, 1.0, None).unwrap();
        assert!((r.value - E).abs() < 1e-12);
        let r = rectangle_fewnomial_bound(&[1.0, 1.0], &[E, E], &[vec![1.0, 0.0]], 1.0, None).unwrap();
        assert!((r.value - E).abs() < 1e-12);
        let b = LogBody::orthant_box(vec![1.0, 1.0], vec![4.0, 4.0]).unwrap();
        let r = cor31_bound(&[vec![1.0, 0.0], vec![0.0, 2.0]], &b, 3.0, Some(1.5)).unwrap();
        assert!((r.value - 64.0 * (2.0 * 1.5 * 9.0 / 3.0)).abs() < 1e-9);
        let point = LogBody::orthant_box(vec![2.0, 2.0], vec![2.0, 2.0]).unwrap();
        assert!(!cor31_bound(&[vec![1.0, 0.0]], &point, 1.0, Some(1.0)).unwrap().applicable);
    }

    #[test]
    fn discrete_and_nested() {
        assert!((discrete_fewnomial_bound(1.0, E, &[0, 1], 1.0, Some(1.0)).unwrap() - E * E).abs() < 1e-12);
        assert_eq!(discrete_fewnomial_bound(1.0, 2.0, &[5], 0.1, None).unwrap(), 32.0);
        let v = nested_fewnomial_bound(1.0, (-1f64).exp(), 2, 1, 0.1, Some(1.0)).unwrap();
        assert!((v - 10.0 * E * E).abs() < 1e-10);
        assert_eq!(nested_fewnomial_bound(2.0, 1.0, 3, 0, 0.5, None).unwrap(), 8.0);
    }

    #[test]
    fn segment_measure_matches_closed_form() {
        // e_n of the segment from (0,0) to (1,1) is the diagonal from (1,1) to (e,e)
        let s = LogBody::segment(&[1.0, 1.0], &[E, E]).unwrap();
        let (m, prov) = s.measure().unwrap();
        assert!((m - (E - 1.0) * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(prov, MeasureProvenance::Computed);
    }

    #[test]
    fn json_round_trip() {
        let p = ExpPoly::from_json(r#"{"terms":[{"re_c":1,"re_rate":[2]},{"re_c":0.5,"im_c":1,"re_rate":[0],"im_rate":[3]}]}"#).unwrap();
        assert_eq!(p.m(), 1);
        let back: ExpPoly = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let b: LogBody = serde_json::from_str(r#"{"a":[1,2],"b":[3,4]}"#).unwrap();
        assert_eq!(b.dim(), 2);
        let b: LogBody = serde_json::from_str(r#"{"log_vertices":[[0,0],[1,0],[0,1]],"dim":2,"measure":0.7}"#).unwrap();
        assert_eq!(b.measure().unwrap(), (0.7, MeasureProvenance::UserAsserted));
    }

    #[test]
    fn estimate_is_deterministic_and_monotone() {
        let dist = TrialDistribution::default();
        let a = estimate_c(40, 7, &dist).unwrap();
        let b = estimate_c(40, 7, &dist).unwrap();
        assert_eq!(a.c.to_bits(), b.c.to_bits());
        let more = estimate_c(80, 7, &dist).unwrap();
        assert!(more.c >= a.c);
        let single = TrialDistribution { m_max: 0, ..dist };
        let s = estimate_c(10, 1, &single).unwrap();
        assert!(s.single_term_only && s.c == 0.0);
    }
}
