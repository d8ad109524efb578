//! Covering numbers `M(eps, Z)` by closed `l^inf` balls centered at points of
//! `Z`, the universal polynomials `M_{n,d}(eps)`, and the metric
//! `(d, n)`-span `omega_{d,n}(Z) = sup_{eps > 0} eps^n [M(eps, Z) - M_{n,d}(eps)]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::norming::{linf, PointSet};

/// Largest set handled by the exact set-cover search.
pub const COVER_CAP: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverCount {
    pub count: usize,
    /// False when the greedy heuristic produced the count (an upper bound).
    pub exact: bool,
}

/// Exact `M(eps, Z)`; sets above [`COVER_CAP`] points in dimension `>= 2` fail.
pub fn covering_number(z: &PointSet, eps: f64) -> Result<usize> {
    Ok(covering_number_with(z, eps, false)?.count)
}

/// `M(eps, Z)`, falling back to greedy above the cap when `heuristic` is set.
pub fn covering_number_with(z: &PointSet, eps: f64, heuristic: bool) -> Result<CoverCount> {
    if !(eps > 0.0) {
        return Err(out_of_range("eps", format!("{eps} must be positive")));
    }
    if z.dim() == 1 {
        let xs: Vec<f64> = z.iter().map(|p| p[0]).collect();
        return Ok(CoverCount {
            count: cover_1d(&xs, eps),
            exact: true,
        });
    }
    let m = z.len();
    if m > COVER_CAP {
        if !heuristic {
            return Err(Error::CoverCapExceeded { cap: COVER_CAP, got: m });
        }
        return Ok(CoverCount {
            count: greedy_cover_large(z.points(), eps),
            exact: false,
        });
    }
    let sets = ball_masks(z.points(), eps);
    Ok(CoverCount {
        count: exact_cover(&sets),
        exact: true,
    })
}

fn cover_1d(xs: &[f64], eps: f64) -> usize {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut i = 0;
    while i < s.len() {
        let left = s[i];
        // rightmost center still covering `left`
        let mut c = i;
        while c + 1 < s.len() && s[c + 1] - left <= eps {
            c += 1;
        }
        let center = s[c];
        count += 1;
        i = c + 1;
        while i < s.len() && s[i] - center <= eps {
            i += 1;
        }
    }
    count
}

fn ball_masks(points: &[Vec<f64>], eps: f64) -> Vec<u64> {
    points
        .iter()
        .map(|c| {
            points
                .iter()
                .enumerate()
                .filter(|(_, y)| linf(c, y) <= eps)
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect()
}

fn greedy_cover(sets: &[u64], full: u64) -> usize {
    let mut uncovered = full;
    let mut count = 0;
    while uncovered != 0 {
        let best = sets
            .iter()
            .max_by_key(|&&s| (s & uncovered).count_ones())
            .expect("nonempty");
        uncovered &= !best;
        count += 1;
    }
    count
}

fn greedy_cover_large(points: &[Vec<f64>], eps: f64) -> usize {
    let m = points.len();
    let mut covered = vec![false; m];
    let mut left = m;
    let mut count = 0;
    while left > 0 {
        let (best, _) = (0..m)
            .map(|c| {
                let gain = (0..m)
                    .filter(|&j| !covered[j] && linf(&points[c], &points[j]) <= eps)
                    .count();
                (c, gain)
            })
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("nonempty");
        for j in 0..m {
            if !covered[j] && linf(&points[best], &points[j]) <= eps {
                covered[j] = true;
                left -= 1;
            }
        }
        count += 1;
    }
    count
}

/// Points no two of which share a ball need pairwise different balls.
fn packing_bound(sets: &[u64], uncovered: u64) -> usize {
    let mut blocked = 0u64;
    let mut count = 0;
    let mut rest = uncovered;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if blocked >> j & 1 == 1 {
            continue;
        }
        count += 1;
        // every point sharing a ball with j: union of the balls around j's covering centers
        let mut reach = 0u64;
        let mut cs = sets[j];
        while cs != 0 {
            let c = cs.trailing_zeros() as usize;
            cs &= cs - 1;
            reach |= sets[c];
        }
        blocked |= reach;
    }
    count
}

fn exact_cover(sets: &[u64]) -> usize {
    let m = sets.len();
    let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut best = greedy_cover(sets, full);
    branch(sets, full, 0, &mut best);
    best
}

fn branch(sets: &[u64], uncovered: u64, chosen: usize, best: &mut usize) {
    if uncovered == 0 {
        *best = (*best).min(chosen);
        return;
    }
    if chosen + packing_bound(sets, uncovered) >= *best {
        return;
    }
    // branch on the uncovered point with the fewest covering balls
    let mut pick = 0;
    let mut fewest = u32::MAX;
    let mut rest = uncovered;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let k = sets[j].count_ones();
        if k < fewest {
            fewest = k;
            pick = j;
        }
    }
    // balls covering `pick` are the balls centered at points of sets[pick] (symmetry)
    let mut options: Vec<usize> = Vec::new();
    let mut cs = sets[pick];
    while cs != 0 {
        options.push(cs.trailing_zeros() as usize);
        cs &= cs - 1;
    }
    options.sort_by_key(|&c| std::cmp::Reverse((sets[c] & uncovered).count_ones()));
    for c in options {
        branch(sets, uncovered & !sets[c], chosen + 1, best);
    }
}

/// Coefficients `C_0, C_1, ...` of `M_{n,d}(eps) = sum_i C_i eps^{-i}`.
pub fn universal_coefficients(n: usize, d: usize, supplied: Option<&[f64]>) -> Result<Vec<f64>> {
    if let Some(c) = supplied {
        if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
            return Err(out_of_range("coefficients", "need finite values"));
        }
        if c.len() > n + 1 {
            return Err(out_of_range(
                "coefficients",
                format!("at most n + 1 = {} coefficients", n + 1),
            ));
        }
        return Ok(c.to_vec());
    }
    let d = d as f64;
    match n {
        1 => Ok(vec![d]),
        2 => Ok(vec![(2.0 * d - 1.0).powi(2), 8.0 * d]),
        _ => Err(Error::MissingParameter("coefficients")),
    }
}

/// `M_{n,d}(eps)`: `d` for `n = 1`, `(2d - 1)^2 + 8d / eps` for `n = 2`, and
/// `sum_i C_i eps^{-i}` with supplied coefficients otherwise.
pub fn universal_polynomial(n: usize, d: usize, eps: f64, coefficients: Option<&[f64]>) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(out_of_range("eps", format!("{eps} must be positive")));
    }
    let c = universal_coefficients(n, d, coefficients)?;
    Ok(c.iter().enumerate().map(|(i, ci)| ci * eps.powi(-(i as i32))).sum())
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SpanOptions {
    /// Coefficients of `M_{n,d}` (required for `n >= 3`).
    pub coefficients: Option<Vec<f64>>,
    /// Greedy covers above the exact-cover cap (result not certified).
    pub heuristic: bool,
}

/// Piecewise description of `M(eps, Z)` and the resulting metric span.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanProfile {
    pub degree: usize,
    pub dimension: usize,
    /// Increasing values where `M(eps, Z)` drops; `M` is constant on
    /// `(0, b_0)`, `[b_0, b_1)`, ..., `[b_last, inf)`.
    pub breakpoints: Vec<f64>,
    /// `M` on each piece; one longer than `breakpoints`.
    pub cover_counts: Vec<usize>,
    pub span: f64,
    pub argmax_eps: f64,
    /// False when the supremum is a left limit at `argmax_eps` (or the limit
    /// at 0).
    pub attained: bool,
    pub positive: bool,
    /// False when any covering number came from the greedy heuristic.
    pub exact: bool,
}

impl SpanProfile {
    /// `M(eps, Z)` read off the profile.
    pub fn cover_at(&self, eps: f64) -> usize {
        let k = self.breakpoints.iter().take_while(|&&b| b <= eps).count();
        self.cover_counts[k]
    }
}

pub fn metric_span(z: &PointSet, d: usize) -> Result<SpanProfile> {
    metric_span_with(z, d, &SpanOptions::default())
}

pub fn metric_span_with(z: &PointSet, d: usize, opts: &SpanOptions) -> Result<SpanProfile> {
    let n = z.dim();
    if d == 0 && opts.coefficients.is_none() {
        return Err(out_of_range("degree", "must be at least 1"));
    }
    let coeffs = universal_coefficients(n, d, opts.coefficients.as_deref())?;
    let pts = z.points();
    let mut dists: Vec<f64> = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            dists.push(linf(&pts[i], &pts[j]));
        }
    }
    dists.sort_by(f64::total_cmp);
    dists.dedup();
    let counts: Vec<CoverCount> = dists
        .par_iter()
        .map(|&e| covering_number_with(z, e, opts.heuristic))
        .collect::<Result<_>>()?;
    let exact = counts.iter().all(|c| c.exact);
    let mut breakpoints = Vec::new();
    let mut cover_counts = vec![z.len()];
    for (e, c) in dists.iter().zip(&counts) {
        if c.count != *cover_counts.last().expect("nonempty") {
            breakpoints.push(*e);
            cover_counts.push(c.count);
        }
    }

    // g(eps) = eps^n (K - sum_i C_i eps^-i) = K eps^n - sum_i C_i eps^(n-i)
    let g_poly = |k: usize| -> Vec<f64> {
        let mut g = vec![0.0; n + 1];
        g[n] += k as f64;
        for (i, c) in coeffs.iter().enumerate() {
            g[n - i] -= c;
        }
        g
    };
    let mut best = (f64::NEG_INFINITY, 0.0, false);
    let mut consider = |v: f64, e: f64, attained: bool| {
        if v > best.0 || (v == best.0 && attained && !best.2) {
            best = (v, e, attained);
        }
    };
    for (p, &k) in cover_counts.iter().enumerate() {
        let a = if p == 0 { 0.0 } else { breakpoints[p - 1] };
        let b = breakpoints.get(p).copied();
        let g = g_poly(k);
        consider(poly_eval(&g, a), a, a > 0.0);
        match b {
            Some(b) => {
                consider(poly_eval(&g, b), b, false);
                for s in stationary_points(&g, a, b) {
                    consider(poly_eval(&g, s), s, true);
                }
            }
            None => {
                let lead = g.iter().rposition(|&c| c != 0.0);
                if let Some(top) = lead {
                    if top > 0 && g[top] > 0.0 {
                        return Err(out_of_range(
                            "span",
                            "unbounded: eps^n [M - M_{n,d}] grows without bound",
                        ));
                    }
                }
                let reach = cauchy_bound(&g).max(a) * 2.0 + 1.0;
                for s in stationary_points(&g, a, reach) {
                    consider(poly_eval(&g, s), s, true);
                }
            }
        }
    }
    let (span, argmax_eps, attained) = best;
    Ok(SpanProfile {
        degree: d,
        dimension: n,
        breakpoints,
        cover_counts,
        span,
        argmax_eps,
        attained,
        positive: span > 0.0,
        exact,
    })
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

fn cauchy_bound(c: &[f64]) -> f64 {
    let deriv: Vec<f64> = (1..c.len()).map(|k| k as f64 * c[k]).collect();
    match deriv.iter().rposition(|&v| v != 0.0) {
        Some(top) if top > 0 => 1.0 + deriv[..top].iter().map(|v| (v / deriv[top]).abs()).fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// Roots of `g'` in the open interval `(a, b)`.
fn stationary_points(g: &[f64], a: f64, b: f64) -> Vec<f64> {
    let deriv: Vec<f64> = (1..g.len()).map(|k| k as f64 * g[k]).collect();
    if deriv.len() <= 1 || b <= a {
        return Vec::new();
    }
    if deriv.len() == 2 {
        // linear derivative: single root
        if deriv[1] == 0.0 {
            return Vec::new();
        }
        let r = -deriv[0] / deriv[1];
        return if r > a && r < b { vec![r] } else { Vec::new() };
    }
    let samples = 512;
    let mut out = Vec::new();
    let at = |t: usize| a + (b - a) * t as f64 / samples as f64;
    for t in 0..samples {
        let (mut lo, mut hi) = (at(t), at(t + 1));
        let (flo, fhi) = (poly_eval(&deriv, lo), poly_eval(&deriv, hi));
        if flo == 0.0 && lo > a {
            out.push(lo);
            continue;
        }
        if flo * fhi < 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if poly_eval(&deriv, mid) * flo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
    out
}

/// Minimal distance between distinct points of a one-dimensional set.
pub fn min_gap(z: &PointSet) -> Result<f64> {
    if z.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: z.dim(),
        });
    }
    if z.len() < 2 {
        return Err(Error::InvalidPoints("minimal gap needs at least two points".into()));
    }
    let mut xs: Vec<f64> = z.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    Ok(xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}
