//! Hausdorff distance between finite sets and Lipschitz stability of
//! `Z -> 1 / N_V(Z)`: `|1/N(Z1) - 1/N(Z2)| <= M_V omega(d_H(Z1, Z2))`, with
//! `1/N = 0` for non-norming sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::norming::{linf, norming_constant_with, NormingConfig, NormingReport, PointSet, DUPLICATE_TOL};
use crate::spaces::{MarkovConstant, Space};

/// `l^inf` Hausdorff distance.
pub fn hausdorff_distance(z1: &PointSet, z2: &PointSet) -> Result<f64> {
    if z1.dim() != z2.dim() {
        return Err(Error::DimensionMismatch {
            expected: z1.dim(),
            got: z2.dim(),
        });
    }
    let directed = |a: &PointSet, b: &PointSet| {
        a.iter()
            .map(|x| b.iter().map(|y| linf(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(z1, z2).max(directed(z2, z1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzStatus {
    Satisfied,
    SatisfiedWithUncertifiedConstant,
    Violated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub z1: PointSet,
    pub z2: PointSet,
    pub d_h: f64,
    pub d_omega_h: f64,
    pub inv_n1: f64,
    pub inv_n2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub markov: MarkovConstant,
    pub satisfied: bool,
    pub status: LipschitzStatus,
}

/// Norming reports for two sets, each maximized also at the other's
/// extremal point.
fn paired_reports(space: &Space, z1: &PointSet, z2: &PointSet, cfg: &NormingConfig) -> Result<(NormingReport, NormingReport)> {
    let r1 = norming_constant_with(space, z1, cfg, &[])?;
    let r2 = norming_constant_with(space, z2, cfg, std::slice::from_ref(&r1.witness_point))?;
    let r1 = if r1.norming && r2.witness_point != r1.witness_point {
        norming_constant_with(space, z1, cfg, std::slice::from_ref(&r2.witness_point))?
    } else {
        r1
    };
    Ok((r1, r2))
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + 1e-9) + 1e-12
}

pub fn lipschitz_audit(space: &Space, z1: &PointSet, z2: &PointSet, cfg: &NormingConfig) -> Result<LipschitzReport> {
    let d_h = hausdorff_distance(z1, z2)?;
    let (r1, r2) = paired_reports(space, z1, z2, cfg)?;
    let markov = space.markov_constant()?;
    let d_omega_h = space.modulus.eval(d_h);
    let lhs = (r1.reciprocal - r2.reciprocal).abs();
    let rhs = markov.value * d_omega_h;
    let satisfied = within(lhs, rhs);
    let status = match (satisfied, markov.certified) {
        (false, _) => LipschitzStatus::Violated,
        (true, true) => LipschitzStatus::Satisfied,
        (true, false) => LipschitzStatus::SatisfiedWithUncertifiedConstant,
    };
    Ok(LipschitzReport {
        z1: z1.clone(),
        z2: z2.clone(),
        d_h,
        d_omega_h,
        inv_n1: r1.reciprocal,
        inv_n2: r2.reciprocal,
        lhs,
        rhs,
        markov,
        satisfied,
        status,
    })
}

/// Ball `d_omega_H(Z, Y) < 1 / (M_V N_V(Z))` of norming sets around `Z`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityBall {
    pub radius: f64,
    pub norming_constant: f64,
    pub markov: MarkovConstant,
    pub center: PointSet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallBound {
    pub d_omega_h: f64,
    pub applicable: bool,
    /// `N(Z) / (1 - M N(Z) d_omega_H(Z, Y))`.
    pub bound: Option<f64>,
}

pub fn stability_ball(space: &Space, z: &PointSet, cfg: &NormingConfig) -> Result<StabilityBall> {
    let r = norming_constant_with(space, z, cfg, &[])?;
    let n = r
        .value
        .ok_or_else(|| Error::NotNorming("stability ball needs a norming set".into()))?;
    let markov = space.markov_constant()?;
    Ok(StabilityBall {
        radius: 1.0 / (markov.value * n),
        norming_constant: n,
        markov,
        center: z.clone(),
    })
}

impl StabilityBall {
    pub fn bound(&self, space: &Space, y: &PointSet) -> Result<BallBound> {
        let d = space.modulus.eval(hausdorff_distance(&self.center, y)?);
        if d >= self.radius {
            return Ok(BallBound {
                d_omega_h: d,
                applicable: false,
                bound: None,
            });
        }
        Ok(BallBound {
            d_omega_h: d,
            applicable: true,
            bound: Some(self.norming_constant / (1.0 - self.markov.value * self.norming_constant * d)),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub magnitude: f64,
    pub trials: usize,
    /// Trials with `d_H = 0` or coinciding perturbed points.
    pub skipped: usize,
    pub max_ratio: Option<f64>,
    pub violations: usize,
    /// Perturbed sets inside the stability ball that were not norming.
    pub non_norming_in_ball: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub markov: MarkovConstant,
    pub seed: u64,
    pub clamped_to_region: bool,
    pub rows: Vec<PerturbationRow>,
}

/// Random perturbations of `Z` (each coordinate moved uniformly by at most
/// `magnitude`, clamped to the region) and the ratios
/// `|1/N(Z) - 1/N(Y)| / omega(d_H(Z, Y))` compared with `M_V`.
pub fn perturbation_experiment(
    space: &Space,
    z: &PointSet,
    magnitudes: &[f64],
    trials: usize,
    seed: u64,
    cfg: &NormingConfig,
) -> Result<PerturbationReport> {
    if magnitudes.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(out_of_range("magnitudes", "must be finite and non-negative"));
    }
    let region = space.region()?;
    let markov = space.markov_constant()?;
    let base = norming_constant_with(space, z, cfg, &[])?;
    let inv_z = base.reciprocal;
    let radius = base.value.map(|n| 1.0 / (markov.value * n));
    let mut rows = Vec::with_capacity(magnitudes.len());
    for (mi, &mag) in magnitudes.iter().enumerate() {
        if mag == 0.0 {
            rows.push(PerturbationRow {
                magnitude: mag,
                trials,
                skipped: trials,
                max_ratio: None,
                violations: 0,
                non_norming_in_ball: 0,
            });
            continue;
        }
        let outcomes: Vec<Option<(f64, bool, bool)>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((mi as u64) << 32) | t as u64);
                let pts: Vec<Vec<f64>> = z
                    .iter()
                    .map(|x| {
                        x.iter()
                            .enumerate()
                            .map(|(i, &v)| (v + rng.random_range(-mag..=mag)).clamp(region.lo[i], region.hi[i]))
                            .collect()
                    })
                    .collect();
                let distinct = (0..pts.len()).all(|i| (i + 1..pts.len()).all(|j| linf(&pts[i], &pts[j]) > DUPLICATE_TOL));
                if !distinct {
                    return Ok(None);
                }
                let y = PointSet::new(pts)?;
                let dh = space.modulus.eval(hausdorff_distance(z, &y)?);
                if dh == 0.0 {
                    return Ok(None);
                }
                let ry = norming_constant_with(space, &y, cfg, std::slice::from_ref(&base.witness_point))?;
                let rz = if ry.norming && base.norming {
                    norming_constant_with(space, z, cfg, std::slice::from_ref(&ry.witness_point))?.reciprocal
                } else {
                    inv_z
                };
                let lhs = (rz - ry.reciprocal).abs();
                let violated = markov.certified && !within(lhs, markov.value * dh);
                let bad_in_ball = radius.is_some_and(|r| dh < r) && !ry.norming;
                Ok(Some((lhs / dh, violated, bad_in_ball)))
            })
            .collect::<Result<_>>()?;
        let done: Vec<&(f64, bool, bool)> = outcomes.iter().flatten().collect();
        rows.push(PerturbationRow {
            magnitude: mag,
            trials,
            skipped: trials - done.len(),
            max_ratio: done.iter().map(|o| o.0).reduce(f64::max),
            violations: done.iter().filter(|o| o.1).count(),
            non_norming_in_ball: done.iter().filter(|o| o.2).count(),
        });
    }
    Ok(PerturbationReport {
        markov,
        seed,
        clamped_to_region: true,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(xs: &[f64]) -> PointSet {
        PointSet::from_scalars(xs).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_distance(&z(&[0.0]), &z(&[1.0])).unwrap(), 1.0);
        let a = PointSet::new(vec![vec![0.0, 0.0]]).unwrap();
        let b = PointSet::new(vec![vec![0.3, -0.4]]).unwrap();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 0.4);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_equality_case() {
        let r = lipschitz_audit(&Space::polynomial(1, 1), &z(&[-1.0, 1.0]), &z(&[-0.9, 0.9]), &NormingConfig::default()).unwrap();
        assert!((r.lhs - 0.1).abs() < 1e-12 && (r.rhs - 0.1).abs() < 1e-12);
        assert!(r.satisfied && r.status == LipschitzStatus::Satisfied);
    }

    #[test]
    fn lipschitz_with_non_norming_set() {
        let r = lipschitz_audit(&Space::polynomial(1, 2), &z(&[-1.0, 1.0]), &z(&[-1.0, 0.0, 1.0]), &NormingConfig::default()).unwrap();
        assert_eq!(r.inv_n1, 0.0);
        assert!((r.lhs - 0.8).abs() < 1e-9 && (r.rhs - 4.0).abs() < 1e-12 && r.satisfied);
    }

    #[test]
    fn ball_examples() {
        let s = Space::polynomial(1, 1);
        let ball = stability_ball(&s, &z(&[-1.0, 1.0]), &NormingConfig::default()).unwrap();
        assert!((ball.radius - 1.0).abs() < 1e-12);
        let b = ball.bound(&s, &z(&[-0.9, 0.9])).unwrap();
        assert!((b.bound.unwrap() - 10.0 / 9.0).abs() < 1e-12);
        assert!(!ball.bound(&s, &z(&[0.0, 0.5])).unwrap().applicable);
    }

    #[test]
    fn perturbations() {
        let s = Space::polynomial(1, 1);
        let cfg = NormingConfig::default();
        let r = perturbation_experiment(&s, &z(&[-1.0, 1.0]), &[0.0, 0.1], 20, 3, &cfg).unwrap();
        assert_eq!(r.rows[0].skipped, 20);
        assert!(r.rows[1].max_ratio.unwrap() <= 1.0 + 1e-9);
        assert_eq!(r.rows[1].violations, 0);
        let again = perturbation_experiment(&s, &z(&[-1.0, 1.0]), &[0.0, 0.1], 20, 3, &cfg).unwrap();
        assert_eq!(again.rows[1].max_ratio.unwrap().to_bits(), r.rows[1].max_ratio.unwrap().to_bits());
    }
}
