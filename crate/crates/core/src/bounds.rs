//! Chebyshev polynomials, the closed-form Remez-type bounds for polynomial
//! spaces, and the auditor comparing them with exact norming constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::entropy::{metric_span, min_gap};
use crate::error::{out_of_range, Error, Result};
use crate::norming::{
    cramer_bound, fekete_select, norming_constant, FeketeMode, NormingConfig, NormingReport, PointSet,
};
use crate::spaces::{binomial, Space, SpaceKind};

/// Ratio below which a bound counts as violated.
pub const VIOLATION_TOL: f64 = 1e-6;

/// `T_d(x)`: `cos(d acos x)` on `[-1, 1]`, `cosh(d ln E(x))` beyond.
pub fn chebyshev(d: u32, x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        (d as f64 * x.acos()).cos()
    } else if x > 1.0 {
        (d as f64 * ln_e(x)).cosh()
    } else if x.is_nan() {
        f64::NAN
    } else if d.is_multiple_of(2) {
        chebyshev(d, -x)
    } else {
        -chebyshev(d, -x)
    }
}

/// `ln E(x)` for `x >= 1`, accurate near 1.
fn ln_e(x: f64) -> f64 {
    let t = x - 1.0;
    (t + (t * (x + 1.0)).sqrt()).ln_1p()
}

/// `E(x) = x + sqrt(x^2 - 1)` for `x >= 1`.
pub fn e_function(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(out_of_range("x", format!("{x} < 1")));
    }
    Ok(x + ((x - 1.0) * (x + 1.0)).sqrt())
}

/// `(1 + r) / (1 - r)` with `r = (1 - t)^(1/n)`, the Chebyshev argument
/// shared by the measure and span bounds.
fn massive_argument(n: usize, t: f64) -> f64 {
    if n == 1 {
        (2.0 - t) / t
    } else {
        let one_minus_r = -((-t).ln_1p() / n as f64).exp_m1();
        (2.0 - one_minus_r) / one_minus_r
    }
}

fn check_unit(name: &'static str, t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(out_of_range(name, format!("{t} not in (0, 1]")))
    }
}

/// `T_d((4 - mu) / mu)` for `Z` of measure `mu` in `[-1, 1]`.
pub fn remez_bound(d: u32, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu <= 2.0) {
        return Err(out_of_range("mu", format!("{mu} not in (0, 2]")));
    }
    bg_bound(1, d, mu / 2.0)
}

/// `T_d((1 + (1 - lambda)^(1/n)) / (1 - (1 - lambda)^(1/n)))` for `Z` of
/// relative measure `lambda` in a convex body.
pub fn bg_bound(n: usize, d: u32, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(out_of_range("n", "must be at least 1"));
    }
    check_unit("lambda", lambda)?;
    Ok(chebyshev(d, massive_argument(n, lambda)))
}

/// `(4n / lambda)^d`.
pub fn bg_upper_envelope(n: usize, d: u32, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(out_of_range("n", "must be at least 1"));
    }
    check_unit("lambda", lambda)?;
    Ok((4.0 * n as f64 / lambda).powi(d as i32))
}

/// `E(arg)^C` for analytic spaces; `C` must be supplied.
pub fn analytic_bound(n: usize, lambda: f64, c: Option<f64>) -> Result<f64> {
    let c = c.ok_or(Error::MissingParameter("c"))?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(out_of_range("c", format!("{c} must be positive")));
    }
    if n == 0 {
        return Err(out_of_range("n", "must be at least 1"));
    }
    check_unit("lambda", lambda)?;
    Ok((c * ln_e(massive_argument(n, lambda))).exp())
}

/// A bound value together with its inputs and applicability.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundResult {
    pub name: String,
    /// Meaningful only when `applicable`; may be `+inf` (serialized as null).
    pub value: f64,
    pub inputs: Value,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundResult {
    fn ok(name: &str, value: f64, inputs: Value) -> Self {
        Self {
            name: name.into(),
            value,
            inputs,
            applicable: true,
            reason: None,
            note: None,
        }
    }

    fn inapplicable(name: &str, inputs: Value, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: f64::INFINITY,
            inputs,
            applicable: false,
            reason: Some(reason.into()),
            note: None,
        }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// `R_d(omega)` for a set of metric span `omega`.
pub fn rd_span_bound(n: usize, d: u32, omega: f64) -> Result<BoundResult> {
    let inputs = json!({"n": n, "d": d, "omega": omega});
    if !(omega > 0.0) {
        return Err(out_of_range("omega", format!("{omega} must be positive")));
    }
    if n == 0 {
        return Err(out_of_range("n", "must be at least 1"));
    }
    if omega > 1.0 {
        return Ok(BoundResult::inapplicable("rd_span", inputs, "span outside bound domain (omega > 1)"));
    }
    Ok(BoundResult::ok("rd_span", chebyshev(d, massive_argument(n, omega)), inputs))
}

/// `T_d((2 - delta) / delta)` for `m >= d + 1` points of minimal gap `delta`.
pub fn cor22_bound(z: &PointSet, d: u32) -> Result<BoundResult> {
    if z.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: z.dim(),
        });
    }
    let m = z.len();
    if m <= d as usize || m < 2 {
        return Ok(BoundResult::inapplicable(
            "cor22",
            json!({"m": m, "d": d}),
            format!("m = {m} points cannot norm degree {d} (needs m >= d + 1 and m >= 2)"),
        ));
    }
    let delta = min_gap(z)?;
    Ok(BoundResult::ok(
        "cor22",
        chebyshev(d, (2.0 - delta) / delta),
        json!({"m": m, "d": d, "delta": delta}),
    ))
}

/// `2^(d d_n) C(n + d, d)` for the lacunary curve `(t^d_1, ..., t^d_n)`.
pub fn curve_bound(n: usize, d: u32, exponents: &[u32]) -> Result<BoundResult> {
    if exponents.len() != n || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: exponents.len(),
        });
    }
    let inputs = json!({"n": n, "d": d, "exponents": exponents});
    if exponents[0] < 1 {
        return Ok(BoundResult::inapplicable("curve", inputs, "d_1 must be at least 1"));
    }
    for j in 1..n {
        if exponents[j] as u64 <= d as u64 * exponents[j - 1] as u64 {
            return Ok(BoundResult::inapplicable(
                "curve",
                inputs,
                format!("lacunarity violated: d_{} = {} <= d * d_{} = {}", j + 1, exponents[j], j, d * exponents[j - 1]),
            ));
        }
    }
    let value = 2f64.powf(d as f64 * exponents[n - 1] as f64) * binomial(n + d as usize, d as usize) as f64;
    Ok(BoundResult::ok("curve", value, inputs)
        .with_note("monomial count read as C(n + d, d) = dim P_d(R^n)"))
}

/// `T_{2d}((2 - delta) / delta)` for `d + 1` nested hypersurfaces with gap `delta`.
pub fn nested_bound(d: u32, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(out_of_range("delta", format!("{delta} not in (0, 2]")));
    }
    Ok(chebyshev(2 * d, (2.0 - delta) / delta))
}

/// Bounds the auditor can evaluate, with the parameters the user asserts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum BoundSelection {
    /// `Z` is (sampled from) a subset of `[-1, 1]` of measure `mu`.
    Remez { mu: f64 },
    /// `Z` is a subset of relative measure `lambda` of the cube.
    Bg { lambda: f64 },
    Analytic { lambda: f64, c: Option<f64> },
    RdSpan,
    Cor22,
    /// `Z` lies on the curve `(t^d_1, ..., t^d_n)`.
    Curve { exponents: Vec<u32> },
    Nested { delta: f64 },
    Cramer,
}

impl BoundSelection {
    pub fn name(&self) -> &'static str {
        match self {
            BoundSelection::Remez { .. } => "remez",
            BoundSelection::Bg { .. } => "bg",
            BoundSelection::Analytic { .. } => "analytic",
            BoundSelection::RdSpan => "rd_span",
            BoundSelection::Cor22 => "cor22",
            BoundSelection::Curve { .. } => "curve",
            BoundSelection::Nested { .. } => "nested",
            BoundSelection::Cramer => "cramer",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FindingStatus {
    Ok,
    Violation,
    Inapplicable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub status: FindingStatus,
    pub bound: BoundResult,
    /// `bound / N_V(Z)`, 0 for non-norming `Z`.
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repro: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub version: String,
    pub exact: NormingReport,
    pub findings: Vec<Finding>,
    pub violations: usize,
}

fn polynomial_params(space: &Space) -> Option<(usize, u32)> {
    match space.kind {
        SpaceKind::Polynomial { vars, degree } => Some((vars, degree as u32)),
        _ => None,
    }
}

fn evaluate_selection(space: &Space, z: &PointSet, sel: &BoundSelection, cfg: &NormingConfig) -> Result<BoundResult> {
    let name = sel.name();
    if let BoundSelection::Cramer = sel {
        let l = space.dimension();
        let sub = if z.len() == l {
            z.clone()
        } else if z.len() > l {
            let mode = if z.len() <= cfg.fekete_cap { FeketeMode::Exhaustive } else { FeketeMode::Greedy };
            match fekete_select(space, z, mode, cfg) {
                Ok(f) => f.points,
                Err(e) => return Ok(BoundResult::inapplicable(name, json!({}), e.to_string())),
            }
        } else {
            return Ok(BoundResult::inapplicable(name, json!({"points": z.len(), "l": l}), "fewer than l points"));
        };
        let inputs = json!({"l": l, "subset": sub.points()});
        return Ok(match cramer_bound(space, &sub) {
            Ok(v) => BoundResult::ok(name, v, inputs),
            Err(e) => BoundResult::inapplicable(name, inputs, e.to_string()),
        });
    }
    let Some((n, d)) = polynomial_params(space) else {
        return Ok(BoundResult::inapplicable(name, json!({}), "bound stated for polynomial spaces"));
    };
    if n != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.dim(),
        });
    }
    Ok(match sel {
        BoundSelection::Remez { mu } => {
            if n != 1 {
                BoundResult::inapplicable(name, json!({"mu": mu}), "univariate bound")
            } else {
                BoundResult::ok(name, remez_bound(d, *mu)?, json!({"d": d, "mu": mu}))
            }
        }
        BoundSelection::Bg { lambda } => {
            BoundResult::ok(name, bg_bound(n, d, *lambda)?, json!({"n": n, "d": d, "lambda": lambda}))
        }
        BoundSelection::Analytic { lambda, c } => BoundResult::ok(
            name,
            analytic_bound(n, *lambda, *c)?,
            json!({"n": n, "lambda": lambda, "c": c}),
        ),
        BoundSelection::RdSpan => {
            let span = metric_span(z, d as usize)?;
            if !span.positive {
                BoundResult::inapplicable(name, json!({"n": n, "d": d, "omega": span.span}), "span not positive")
            } else {
                rd_span_bound(n, d, span.span)?
            }
        }
        BoundSelection::Cor22 => {
            if n != 1 {
                BoundResult::inapplicable(name, json!({}), "univariate bound")
            } else {
                cor22_bound(z, d)?
            }
        }
        BoundSelection::Curve { exponents } => curve_bound(n, d, exponents)?,
        BoundSelection::Nested { delta } => {
            BoundResult::ok(name, nested_bound(d, *delta)?, json!({"d": d, "delta": delta}))
        }
        BoundSelection::Cramer => unreachable!(),
    })
}

fn repro_command(space: &Space, z: &PointSet, sel: &BoundSelection, cfg: &NormingConfig) -> String {
    let space_json = serde_json::to_string(space).unwrap_or_default();
    let points_json = serde_json::to_string(z).unwrap_or_default();
    let sel_json = serde_json::to_string(&[sel]).unwrap_or_default();
    format!(
        "norming-lab audit --space '{space_json}' --points '{points_json}' --bounds '{sel_json}' --grid {:e} --rank-tol {:e} --budget {}{} --json",
        cfg.grid_spacing,
        cfg.rank_tol,
        cfg.budget,
        if cfg.refine { "" } else { " --no-refine" }
    )
}

/// Evaluates every selected bound and compares it with the exact `N_V(Z)`.
///
/// A finding is a VIOLATION when `bound / N < 1 - 1e-6`, where `N` is the
/// certified lower end of the norming bracket. Findings are sorted by name.
pub fn audit(space: &Space, z: &PointSet, selections: &[BoundSelection], cfg: &NormingConfig) -> Result<AuditReport> {
    let exact = norming_constant(space, z, cfg)?;
    let mut findings: Vec<Finding> = selections
        .par_iter()
        .map(|sel| {
            let bound = evaluate_selection(space, z, sel, cfg)?;
            if !bound.applicable {
                return Ok(Finding {
                    name: sel.name().into(),
                    status: FindingStatus::Inapplicable,
                    bound,
                    ratio: None,
                    repro: None,
                });
            }
            let ratio = match exact.value {
                Some(n) => bound.value / n,
                None => 0.0,
            };
            let violated = ratio < 1.0 - VIOLATION_TOL;
            Ok(Finding {
                name: sel.name().into(),
                status: if violated { FindingStatus::Violation } else { FindingStatus::Ok },
                bound,
                ratio: Some(ratio),
                repro: violated.then(|| repro_command(space, z, sel, cfg)),
            })
        })
        .collect::<Result<_>>()?;
    findings.sort_by(|a, b| a.name.cmp(&b.name));
    let violations = findings.iter().filter(|f| f.status == FindingStatus::Violation).count();
    Ok(AuditReport {
        version: crate::VERSION.into(),
        exact,
        findings,
        violations,
    })
}
