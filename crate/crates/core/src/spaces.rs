//! Function-space descriptors, canonical bases and Markov constants.
//!
//! Three families are supported:
//!
//! - `polynomial(n, d)`: real polynomials of total degree at most `d` in `n`
//!   variables, basis of monomials in graded lexicographic order
//!   (`1, x1, x2, x1^2, x1 x2, x2^2, ...`), dimension `C(n + d, d)`.
//! - `trigonometric(n, d)`: the tensor basis of products of
//!   `1, cos(pi k x_i), sin(pi k x_i)` with `1 <= k <= d` in each coordinate,
//!   period 2, dimension `(2d + 1)^n`.
//! - `fewnomial(exponents)`: the span of the monomials `x^alpha_k` for a
//!   duplicate-free list of real exponent vectors. With non-negative integer
//!   exponents the space lives on the cube; otherwise it lives in the positive
//!   orthant and sup-norms are taken over a declared bounding box.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};

/// Modulus of continuity `omega` used to measure distances `omega(|x - y|_inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Modulus {
    #[default]
    Identity,
    /// `t -> t^gamma` with `gamma` in `(0, 1]`.
    Power(f64),
}

impl Modulus {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Modulus::Identity => t,
            Modulus::Power(g) => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(g)
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Modulus::Identity => Ok(()),
            Modulus::Power(g) if g > 0.0 && g <= 1.0 => Ok(()),
            Modulus::Power(g) => Err(out_of_range("gamma", format!("{g} not in (0, 1]"))),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Modulus::Identity) || matches!(self, Modulus::Power(g) if *g == 1.0)
    }

    /// Largest `t` with `omega(t) <= target`.
    pub fn inverse(&self, target: f64) -> f64 {
        match *self {
            Modulus::Identity => target,
            Modulus::Power(g) => target.powf(1.0 / g),
        }
    }
}

/// Closed axis-parallel box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(out_of_range("box", "zero-dimensional box"));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(out_of_range("box", format!("invalid side [{a}, {b}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-1, 1]^n`.
    pub fn cube(n: usize) -> Self {
        Self {
            lo: vec![-1.0; n],
            hi: vec![1.0; n],
        }
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn max_side(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= a - tol && *v <= b + tol)
    }

    pub fn contains_box(&self, other: &AxisBox, tol: f64) -> bool {
        self.contains(&other.lo, tol) && self.contains(&other.hi, tol)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceKind {
    Polynomial {
        vars: usize,
        degree: usize,
    },
    Trigonometric {
        vars: usize,
        degree: usize,
    },
    Fewnomial {
        exponents: Vec<Vec<f64>>,
        #[serde(default)]
        positive_orthant: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounding_box: Option<AxisBox>,
    },
}

/// A finite-dimensional space of continuous functions together with the
/// modulus of continuity its Markov constant refers to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    #[serde(flatten)]
    pub kind: SpaceKind,
    #[serde(default)]
    pub modulus: Modulus,
}

/// One factor `cos(pi k x_i)` / `sin(pi k x_i)` of a trigonometric basis
/// function; `freq == 0` is the constant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrigFactor {
    pub freq: u32,
    pub sine: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BasisFunction {
    Monomial(Vec<u32>),
    Trig(Vec<TrigFactor>),
    Power(Vec<f64>),
}

impl BasisFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BasisFunction::Monomial(e) => e
                .iter()
                .zip(x)
                .map(|(&k, &v)| v.powi(k as i32))
                .product(),
            BasisFunction::Trig(fs) => fs
                .iter()
                .zip(x)
                .map(|(f, &v)| trig_factor(*f, v))
                .product(),
            BasisFunction::Power(e) => e
                .iter()
                .zip(x)
                .map(|(&a, &v)| if a == 0.0 { 1.0 } else { v.powf(a) })
                .product(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            BasisFunction::Monomial(e) => e.iter().all(|&k| k == 0),
            BasisFunction::Trig(fs) => fs.iter().all(|f| f.freq == 0),
            BasisFunction::Power(e) => e.iter().all(|&a| a == 0.0),
        }
    }
}

fn trig_factor(f: TrigFactor, x: f64) -> f64 {
    if f.freq == 0 {
        1.0
    } else {
        let t = std::f64::consts::PI * f.freq as f64 * x;
        if f.sine {
            t.sin()
        } else {
            t.cos()
        }
    }
}

/// Markov constant (or an estimate of it) with a certification flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovConstant {
    pub value: f64,
    pub certified: bool,
}

pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Exponent vectors of total degree `<= d` in graded lexicographic order.
pub fn graded_lex_exponents(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn fill(rest: usize, total: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=total).rev() {
            cur.push(e);
            fill(rest - 1, total - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n + d, d));
    for t in 0..=d as u32 {
        fill(n, t, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

impl Space {
    pub fn polynomial(vars: usize, degree: usize) -> Self {
        Self {
            kind: SpaceKind::Polynomial { vars, degree },
            modulus: Modulus::Identity,
        }
    }

    pub fn trigonometric(vars: usize, degree: usize) -> Self {
        Self {
            kind: SpaceKind::Trigonometric { vars, degree },
            modulus: Modulus::Identity,
        }
    }

    /// Fewnomial span on the cube; exponents must be non-negative integers.
    pub fn fewnomial(exponents: Vec<Vec<f64>>) -> Self {
        Self {
            kind: SpaceKind::Fewnomial {
                exponents,
                positive_orthant: false,
                bounding_box: None,
            },
            modulus: Modulus::Identity,
        }
    }

    /// Fewnomial span on the positive orthant, sup-norms over `bounding_box`.
    pub fn fewnomial_orthant(exponents: Vec<Vec<f64>>, bounding_box: Option<AxisBox>) -> Self {
        Self {
            kind: SpaceKind::Fewnomial {
                exponents,
                positive_orthant: true,
                bounding_box,
            },
            modulus: Modulus::Identity,
        }
    }

    pub fn with_modulus(mut self, modulus: Modulus) -> Self {
        self.modulus = modulus;
        self
    }

    /// Parses and validates a JSON descriptor.
    pub fn from_json(s: &str) -> Result<Self> {
        let space: Space = serde_json::from_str(s)
            .map_err(|e| Error::InvalidSpace(format!("malformed descriptor: {e}")))?;
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        self.modulus.validate()?;
        match &self.kind {
            SpaceKind::Polynomial { vars, .. } | SpaceKind::Trigonometric { vars, .. } => {
                if *vars == 0 {
                    return Err(Error::InvalidSpace("`vars` must be at least 1".into()));
                }
            }
            SpaceKind::Fewnomial {
                exponents,
                positive_orthant,
                bounding_box,
            } => {
                let first = exponents
                    .first()
                    .ok_or_else(|| Error::InvalidSpace("`exponents` must be nonempty".into()))?;
                let n = first.len();
                if n == 0 {
                    return Err(Error::InvalidSpace("`exponents` vectors must be nonempty".into()));
                }
                for (k, e) in exponents.iter().enumerate() {
                    if e.len() != n {
                        return Err(Error::InvalidSpace(format!(
                            "`exponents[{k}]` has length {}, expected {n}",
                            e.len()
                        )));
                    }
                    if e.iter().any(|a| !a.is_finite()) {
                        return Err(Error::InvalidSpace(format!("`exponents[{k}]` is not finite")));
                    }
                    if !positive_orthant && e.iter().any(|&a| a < 0.0 || a.fract() != 0.0) {
                        return Err(Error::InvalidSpace(format!(
                            "`exponents[{k}]` must be non-negative integers unless `positive_orthant` is set"
                        )));
                    }
                    if exponents[..k].iter().any(|o| o == e) {
                        return Err(Error::InvalidSpace(format!(
                            "`exponents[{k}]` duplicates an earlier exponent"
                        )));
                    }
                }
                if let Some(b) = bounding_box {
                    AxisBox::new(b.lo.clone(), b.hi.clone())?;
                    if b.dim() != n {
                        return Err(Error::InvalidSpace(format!(
                            "`bounding_box` has dimension {}, expected {n}",
                            b.dim()
                        )));
                    }
                    if *positive_orthant && b.lo.iter().any(|&a| a <= 0.0) {
                        return Err(Error::InvalidSpace(
                            "`bounding_box` must lie in the open positive orthant".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> usize {
        match &self.kind {
            SpaceKind::Polynomial { vars, .. } | SpaceKind::Trigonometric { vars, .. } => *vars,
            SpaceKind::Fewnomial { exponents, .. } => exponents.first().map_or(0, Vec::len),
        }
    }

    /// `dim V`.
    pub fn dimension(&self) -> usize {
        match &self.kind {
            SpaceKind::Polynomial { vars, degree } => binomial(vars + degree, *degree),
            SpaceKind::Trigonometric { vars, degree } => (2 * degree + 1).pow(*vars as u32),
            SpaceKind::Fewnomial { exponents, .. } => exponents.len(),
        }
    }

    /// Canonical basis.
    pub fn basis(&self) -> Vec<BasisFunction> {
        match &self.kind {
            SpaceKind::Polynomial { vars, degree } => graded_lex_exponents(*vars, *degree)
                .into_iter()
                .map(BasisFunction::Monomial)
                .collect(),
            SpaceKind::Trigonometric { vars, degree } => {
                let per_axis: Vec<TrigFactor> = std::iter::once(TrigFactor {
                    freq: 0,
                    sine: false,
                })
                .chain((1..=*degree as u32).flat_map(|k| {
                    [
                        TrigFactor { freq: k, sine: false },
                        TrigFactor { freq: k, sine: true },
                    ]
                }))
                .collect();
                let mut out = vec![Vec::new()];
                for _ in 0..*vars {
                    out = out
                        .into_iter()
                        .flat_map(|prefix: Vec<TrigFactor>| {
                            per_axis.iter().map(move |f| {
                                let mut p = prefix.clone();
                                p.push(*f);
                                p
                            })
                        })
                        .collect();
                }
                out.into_iter().map(BasisFunction::Trig).collect()
            }
            SpaceKind::Fewnomial { exponents, .. } => exponents
                .iter()
                .cloned()
                .map(BasisFunction::Power)
                .collect(),
        }
    }

    pub fn is_positive_orthant(&self) -> bool {
        matches!(
            self.kind,
            SpaceKind::Fewnomial {
                positive_orthant: true,
                ..
            }
        )
    }

    /// The region `Q` over which sup-norms (and norming constants) are taken:
    /// the cube, or the declared bounding box of an orthant fewnomial space.
    pub fn region(&self) -> Result<AxisBox> {
        match &self.kind {
            SpaceKind::Fewnomial {
                positive_orthant: true,
                bounding_box,
                ..
            } => bounding_box.clone().ok_or_else(|| {
                Error::InvalidSpace(
                    "orthant fewnomial space needs a `bounding_box` for sup-norm computations".into(),
                )
            }),
            SpaceKind::Fewnomial {
                bounding_box: Some(b),
                ..
            } => Ok(b.clone()),
            _ => Ok(AxisBox::cube(self.vars())),
        }
    }

    /// Checks that `x` lies in the domain on which the basis is evaluated.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        let n = self.vars();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                point: x.to_vec(),
                reason: "non-finite coordinate".into(),
            });
        }
        if self.is_positive_orthant() {
            if x.iter().any(|&v| v <= 0.0) {
                return Err(Error::Domain {
                    point: x.to_vec(),
                    reason: "fewnomial span requires positive coordinates".into(),
                });
            }
        } else if x.iter().any(|&v| v.abs() > 1.0 + 1e-12) {
            return Err(Error::Domain {
                point: x.to_vec(),
                reason: "point outside the cube [-1, 1]^n".into(),
            });
        }
        Ok(())
    }

    /// `(f_1(x), ..., f_l(x))` in canonical order.
    pub fn evaluate_basis(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut out = vec![0.0; self.dimension()];
        BasisEvaluator::new(self).eval(x, &mut out);
        Ok(out)
    }

    /// Evaluates `sum_i a_i f_i` at `x`.
    pub fn evaluate(&self, coefficients: &[f64], x: &[f64]) -> Result<f64> {
        if coefficients.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: coefficients.len(),
            });
        }
        let phi = self.evaluate_basis(x)?;
        Ok(dot(coefficients, &phi))
    }

    /// Index of the constant basis function, if the constants lie in `V`.
    pub fn constant_index(&self) -> Option<usize> {
        self.basis().iter().position(BasisFunction::is_constant)
    }

    /// Closed-form `sup_Q |f_i|` for every basis function over [`Space::region`].
    ///
    /// Monomials and trigonometric products reach 1 on the cube; orthant
    /// monomials are monotone in each coordinate, so their extrema sit at
    /// box vertices.
    pub fn basis_sup_norms(&self) -> Result<Vec<f64>> {
        let region = self.region()?;
        Ok(self
            .basis()
            .iter()
            .map(|f| match f {
                BasisFunction::Monomial(_) | BasisFunction::Trig(_) => 1.0,
                BasisFunction::Power(e) => e
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| {
                        let (lo, hi) = (region.lo[i], region.hi[i]);
                        if a == 0.0 {
                            1.0
                        } else if lo >= 0.0 {
                            lo.powf(a).max(hi.powf(a))
                        } else {
                            // integer exponent on a box straddling zero
                            lo.abs().max(hi.abs()).powf(a)
                        }
                    })
                    .product(),
            })
            .collect())
    }

    /// Per-coordinate degree bounds `deg_i` when every element of `V` is a
    /// polynomial in each coordinate separately.
    fn coordinate_degrees(&self) -> Option<Vec<f64>> {
        match &self.kind {
            SpaceKind::Polynomial { vars, degree } => Some(vec![*degree as f64; *vars]),
            SpaceKind::Fewnomial { exponents, .. } => {
                let n = self.vars();
                if exponents
                    .iter()
                    .flatten()
                    .any(|&a| a < 0.0 || a.fract() != 0.0)
                {
                    return None;
                }
                Some(
                    (0..n)
                        .map(|i| exponents.iter().map(|e| e[i]).fold(0.0, f64::max))
                        .collect(),
                )
            }
            SpaceKind::Trigonometric { .. } => None,
        }
    }

    /// Markov constant `M_V` of the space on the cube (or bounding box).
    ///
    /// Polynomials: `d^2 n`; trigonometric polynomials of period 2: `pi d n`.
    /// A power modulus `t^gamma` multiplies these by `diam^(1 - gamma)`.
    /// Spaces without a classical inequality fall back to the Gram–Schmidt
    /// estimate, flagged uncertified.
    pub fn markov_constant(&self) -> Result<MarkovConstant> {
        self.markov_constant_on(&self.region()?)
    }

    /// Markov constant relative to sup-norms over `region`, a sub-box of the
    /// domain.
    pub fn markov_constant_on(&self, region: &AxisBox) -> Result<MarkovConstant> {
        let holder = |m: f64| match self.modulus {
            Modulus::Identity => m,
            Modulus::Power(g) => m * region.max_side().powf(1.0 - g),
        };
        if let Some(deg) = self.coordinate_degrees() {
            // Markov along coordinate lines: |d_i f| <= deg_i^2 * 2/side_i * sup|f|.
            let m: f64 = (0..region.dim())
                .filter(|&i| region.side(i) > 0.0)
                .map(|i| deg[i] * deg[i] * 2.0 / region.side(i))
                .sum();
            return Ok(MarkovConstant {
                value: holder(m),
                certified: true,
            });
        }
        if let SpaceKind::Trigonometric { vars, degree } = &self.kind {
            let full_period = (0..*vars)
                .all(|i| region.side(i) == 0.0 || (region.lo[i] == -1.0 && region.hi[i] == 1.0));
            if full_period && (0..*vars).all(|i| region.side(i) > 0.0) {
                return Ok(MarkovConstant {
                    value: holder(std::f64::consts::PI * *degree as f64 * *vars as f64),
                    certified: true,
                });
            }
        }
        let quad = Quadrature::gauss_legendre(region, default_nodes(self, region.dim()));
        let value = gram_schmidt_markov_bound_on(self, &quad, region)?;
        Ok(MarkovConstant {
            value,
            certified: false,
        })
    }
}

fn default_nodes(space: &Space, n: usize) -> usize {
    let want = match &space.kind {
        SpaceKind::Polynomial { degree, .. } | SpaceKind::Trigonometric { degree, .. } => {
            (2 * degree + 2).max(8)
        }
        SpaceKind::Fewnomial { .. } => 16,
    };
    let cap = (4096f64).powf(1.0 / n as f64).floor() as usize;
    want.min(cap.max(2))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fast repeated basis evaluation with per-coordinate power/trig tables.
///
/// No domain checks: callers validate points first.
pub struct BasisEvaluator {
    kind: EvalKind,
    table: Vec<f64>,
    stride: usize,
}

enum EvalKind {
    Monomial(Vec<Vec<u32>>),
    Trig(Vec<Vec<TrigFactor>>),
    Power(Vec<Vec<f64>>),
}

impl BasisEvaluator {
    pub fn new(space: &Space) -> Self {
        let basis = space.basis();
        let n = space.vars();
        match &space.kind {
            SpaceKind::Polynomial { degree, .. } => Self {
                kind: EvalKind::Monomial(
                    basis
                        .into_iter()
                        .map(|b| match b {
                            BasisFunction::Monomial(e) => e,
                            _ => unreachable!(),
                        })
                        .collect(),
                ),
                table: vec![0.0; n * (degree + 1)],
                stride: degree + 1,
            },
            SpaceKind::Trigonometric { degree, .. } => Self {
                kind: EvalKind::Trig(
                    basis
                        .into_iter()
                        .map(|b| match b {
                            BasisFunction::Trig(f) => f,
                            _ => unreachable!(),
                        })
                        .collect(),
                ),
                table: vec![0.0; n * (2 * degree + 1)],
                stride: 2 * degree + 1,
            },
            SpaceKind::Fewnomial { exponents, .. } => Self {
                kind: EvalKind::Power(exponents.clone()),
                table: vec![0.0; n],
                stride: 1,
            },
        }
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            EvalKind::Monomial(b) => b.len(),
            EvalKind::Trig(b) => b.len(),
            EvalKind::Power(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eval(&mut self, x: &[f64], out: &mut [f64]) {
        let s = self.stride;
        match &self.kind {
            EvalKind::Monomial(basis) => {
                for (i, &v) in x.iter().enumerate() {
                    let row = &mut self.table[i * s..(i + 1) * s];
                    row[0] = 1.0;
                    for k in 1..s {
                        row[k] = row[k - 1] * v;
                    }
                }
                for (o, e) in out.iter_mut().zip(basis) {
                    *o = e
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| self.table[i * s + k as usize])
                        .product();
                }
            }
            EvalKind::Trig(basis) => {
                let d = (s - 1) / 2;
                for (i, &v) in x.iter().enumerate() {
                    let row = &mut self.table[i * s..(i + 1) * s];
                    row[0] = 1.0;
                    for k in 1..=d {
                        let t = std::f64::consts::PI * k as f64 * v;
                        row[2 * k - 1] = t.cos();
                        row[2 * k] = t.sin();
                    }
                }
                for (o, fs) in out.iter_mut().zip(basis) {
                    *o = fs
                        .iter()
                        .enumerate()
                        .map(|(i, f)| {
                            let col = if f.freq == 0 {
                                0
                            } else {
                                2 * f.freq as usize - 1 + usize::from(f.sine)
                            };
                            self.table[i * s + col]
                        })
                        .product();
                }
            }
            EvalKind::Power(exps) => {
                for (o, e) in out.iter_mut().zip(exps) {
                    *o = e
                        .iter()
                        .zip(x)
                        .map(|(&a, &v)| {
                            if a == 0.0 {
                                1.0
                            } else if a.fract() == 0.0 && a.abs() < 64.0 {
                                v.powi(a as i32)
                            } else {
                                v.powf(a)
                            }
                        })
                        .product();
                }
            }
        }
    }
}

/// Quadrature rule: nodes and non-negative weights.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on `P_k`).
pub fn gauss_legendre_1d(k: usize) -> (Vec<f64>, Vec<f64>) {
    if k == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for i in 0..k {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = k as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

impl Quadrature {
    /// Tensor Gauss–Legendre rule with `k` nodes per axis (Lebesgue measure).
    pub fn gauss_legendre(region: &AxisBox, k: usize) -> Self {
        let (x, w) = gauss_legendre_1d(k.max(1));
        let axes: Vec<Vec<(f64, f64)>> = (0..region.dim())
            .map(|i| {
                let (a, b) = (region.lo[i], region.hi[i]);
                let half = 0.5 * (b - a);
                if half == 0.0 {
                    return vec![(a, 1.0)];
                }
                x.iter()
                    .zip(&w)
                    .map(|(t, wt)| (a + half * (t + 1.0), wt * half))
                    .collect()
            })
            .collect();
        tensor(&axes)
    }

    /// Midpoint rule on a uniform `k`-per-axis grid (Lebesgue measure).
    pub fn uniform(region: &AxisBox, k: usize) -> Self {
        let k = k.max(1);
        let axes: Vec<Vec<(f64, f64)>> = (0..region.dim())
            .map(|i| {
                let (a, b) = (region.lo[i], region.hi[i]);
                let h = (b - a) / k as f64;
                if h == 0.0 {
                    return vec![(a, 1.0)];
                }
                (0..k).map(|j| (a + (j as f64 + 0.5) * h, h)).collect()
            })
            .collect();
        tensor(&axes)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn tensor(axes: &[Vec<(f64, f64)>]) -> Quadrature {
    let mut points = vec![Vec::new()];
    let mut weights = vec![1.0];
    for axis in axes {
        let mut np = Vec::with_capacity(points.len() * axis.len());
        let mut nw = Vec::with_capacity(points.len() * axis.len());
        for (p, w) in points.iter().zip(&weights) {
            for &(x, wx) in axis {
                let mut q = p.clone();
                q.push(x);
                np.push(q);
                nw.push(w * wx);
            }
        }
        points = np;
        weights = nw;
    }
    Quadrature { points, weights }
}

/// Upper estimate of `M_V` from an orthonormalized basis:
/// `(max_i L_i) * sqrt(l) * sqrt(mu(Q))`, where `L_i` are Lipschitz constants
/// of the basis orthonormalized in `L^2(mu)` and `mu` is given by `quad`.
///
/// The Lipschitz constants are sampled difference quotients over all pairs
/// of a uniform grid of the region, which only bound them from below, so the
/// result is an estimate rather than a certified bound.
pub fn gram_schmidt_markov_bound(space: &Space, quad: &Quadrature) -> Result<f64> {
    gram_schmidt_markov_bound_on(space, quad, &space.region()?)
}

fn gram_schmidt_markov_bound_on(space: &Space, quad: &Quadrature, region: &AxisBox) -> Result<f64> {
    let l = space.dimension();
    if quad.weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(out_of_range("weights", "quadrature weights must be non-negative"));
    }
    let mass = quad.total_mass();
    if mass <= 0.0 {
        return Err(out_of_range("weights", "total mass must be positive"));
    }
    let mut ev = BasisEvaluator::new(space);
    let mut phi = vec![0.0; l];
    let mut gram = nalgebra::DMatrix::<f64>::zeros(l, l);
    for (p, &w) in quad.points.iter().zip(&quad.weights) {
        space.check_point(p)?;
        ev.eval(p, &mut phi);
        for i in 0..l {
            for j in 0..=i {
                gram[(i, j)] += w * phi[i] * phi[j];
            }
        }
    }
    for i in 0..l {
        for j in 0..i {
            gram[(j, i)] = gram[(i, j)];
        }
    }
    let max_diag = (0..l).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let chol = nalgebra::linalg::Cholesky::new(gram).ok_or(Error::RankDeficient)?;
    let lower = chol.l();
    if (0..l).any(|i| lower[(i, i)] * lower[(i, i)] <= 1e-13 * max_diag) {
        return Err(Error::RankDeficient);
    }

    // orthonormal basis g = L^{-1} f on a sample grid
    let n = region.dim();
    let active = (0..n).filter(|&i| region.side(i) > 0.0).count().max(1);
    let per_axis = ((1200f64).powf(1.0 / active as f64).floor() as usize).max(2);
    let sample = Quadrature::uniform(region, per_axis);
    let mut values = Vec::with_capacity(sample.points.len());
    for p in &sample.points {
        ev.eval(p, &mut phi);
        let v = nalgebra::DVector::from_column_slice(&phi);
        let g = lower
            .solve_lower_triangular(&v)
            .ok_or(Error::RankDeficient)?;
        values.push(g);
    }
    let mut lip = 0.0f64;
    for a in 0..sample.points.len() {
        for b in (a + 1)..sample.points.len() {
            let dist = sample.points[a]
                .iter()
                .zip(&sample.points[b])
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let w = space.modulus.eval(dist);
            if w <= 0.0 {
                continue;
            }
            for k in 0..l {
                let q = (values[a][k] - values[b][k]).abs() / w;
                lip = lip.max(q);
            }
        }
    }
    Ok(lip * (l as f64).sqrt() * mass.sqrt())
}
