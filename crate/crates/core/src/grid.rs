//! Uniform grids over boxes and a deterministic parallel maximizer with
//! local pattern-search refinement.

use rayon::prelude::*;

use crate::error::Result;
use crate::spaces::AxisBox;

const CHUNK: usize = 2048;
const TOP_K: usize = 8;

/// Uniform tensor grid including both endpoints of every side.
#[derive(Clone, Debug)]
pub(crate) struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
    total: usize,
}

impl Grid {
    /// Grid of spacing at most `h`, coarsened uniformly if it would exceed
    /// `budget` points.
    pub fn new(region: &AxisBox, h: f64, budget: usize) -> Self {
        let budget = budget.max(2);
        let mut h = h;
        loop {
            let counts: Vec<usize> = (0..region.dim())
                .map(|i| {
                    let s = region.side(i);
                    if s == 0.0 {
                        1
                    } else {
                        (s / h - 1e-9).ceil().max(1.0) as usize + 1
                    }
                })
                .collect();
            let total = counts
                .iter()
                .try_fold(1usize, |acc, &c| acc.checked_mul(c))
                .unwrap_or(usize::MAX);
            if total <= budget {
                let step = counts
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| if c > 1 { region.side(i) / (c - 1) as f64 } else { 0.0 })
                    .collect();
                return Self {
                    lo: region.lo.clone(),
                    hi: region.hi.clone(),
                    step,
                    counts,
                    total,
                };
            }
            let live = counts.iter().filter(|&&c| c > 1).count().max(1) as f64;
            h *= (total as f64 / budget as f64).powf(1.0 / live) * 1.0001;
        }
    }

    /// Largest per-axis step: every point of the box is within half of it
    /// (in `l^inf`) of a grid point.
    pub fn spacing(&self) -> f64 {
        self.step.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn point(&self, mut idx: usize, out: &mut [f64]) {
        for i in 0..self.counts.len() {
            let c = self.counts[i];
            let k = idx % c;
            idx /= c;
            out[i] = if k + 1 == c && c > 1 {
                self.hi[i]
            } else {
                self.lo[i] + k as f64 * self.step[i]
            };
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Sweep {
    /// Maximum over the grid alone.
    pub grid_max: f64,
    /// Best value over the grid, the extra candidates and refinement.
    pub value: f64,
    pub point: Vec<f64>,
}

fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn push_top(top: &mut Vec<(f64, usize)>, cand: (f64, usize)) {
    if top.len() == TOP_K && !better(cand, top[TOP_K - 1]) {
        return;
    }
    let pos = top.iter().position(|&t| better(cand, t)).unwrap_or(top.len());
    top.insert(pos, cand);
    top.truncate(TOP_K);
}

/// Maximizes `eval` over the grid, then over `extra` points, then refines
/// the best candidates by pattern search inside `region`.
///
/// Each chunk of grid points gets a fresh state from `init`, so the result
/// does not depend on the number of threads; ties go to the lowest index.
pub(crate) fn sweep<S, F, G>(
    grid: &Grid,
    region: &AxisBox,
    extra: &[Vec<f64>],
    refine: bool,
    init: F,
    eval: G,
) -> Result<Sweep>
where
    F: Fn() -> S + Sync,
    G: Fn(&mut S, &[f64]) -> Result<f64> + Sync,
{
    let n = region.dim();
    let chunks = grid.len().div_ceil(CHUNK);
    let partial: Vec<Vec<(f64, usize)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut state = init();
            let mut x = vec![0.0; n];
            let mut top = Vec::with_capacity(TOP_K + 1);
            for idx in c * CHUNK..((c + 1) * CHUNK).min(grid.len()) {
                grid.point(idx, &mut x);
                push_top(&mut top, (eval(&mut state, &x)?, idx));
            }
            Ok(top)
        })
        .collect::<Result<_>>()?;
    let mut top = Vec::with_capacity(TOP_K + 1);
    for t in partial.into_iter().flatten() {
        push_top(&mut top, t);
    }
    let grid_max = top.first().map_or(f64::NEG_INFINITY, |t| t.0);

    let mut starts: Vec<(f64, Vec<f64>)> = top
        .iter()
        .map(|&(v, idx)| {
            let mut x = vec![0.0; n];
            grid.point(idx, &mut x);
            (v, x)
        })
        .collect();
    {
        let mut state = init();
        let mut extra_top: Vec<(f64, usize)> = Vec::new();
        for (j, x) in extra.iter().enumerate() {
            push_top(&mut extra_top, (eval(&mut state, x)?, j));
        }
        starts.extend(extra_top.iter().take(2).map(|&(v, j)| (v, extra[j].clone())));
    }

    let refined: Vec<(f64, Vec<f64>)> = if refine {
        starts
            .par_iter()
            .map(|(v, x)| {
                let mut state = init();
                pattern_search(region, grid, x.clone(), *v, &mut state, &eval)
            })
            .collect::<Result<_>>()?
    } else {
        starts
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (v, x) in refined {
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x));
        }
    }
    let (value, point) = best.unwrap_or((f64::NEG_INFINITY, region.lo.clone()));
    Ok(Sweep {
        grid_max,
        value,
        point,
    })
}

fn pattern_offsets(n: usize) -> Vec<Vec<f64>> {
    let per_axis: &[f64] = if 5usize.pow(n as u32) <= 125 {
        &[-1.0, -0.5, 0.0, 0.5, 1.0]
    } else if n <= 6 {
        &[-1.0, 0.0, 1.0]
    } else {
        let mut out = Vec::with_capacity(2 * n);
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut v = vec![0.0; n];
                v[i] = s;
                out.push(v);
            }
        }
        return out;
    };
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                per_axis.iter().map(move |&o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&o| o != 0.0));
    out
}

fn pattern_search<S, G>(
    region: &AxisBox,
    grid: &Grid,
    mut x: Vec<f64>,
    mut value: f64,
    state: &mut S,
    eval: &G,
) -> Result<(f64, Vec<f64>)>
where
    G: Fn(&mut S, &[f64]) -> Result<f64>,
{
    let n = region.dim();
    let offsets = pattern_offsets(n);
    let mut radius: Vec<f64> = (0..n).map(|i| grid.step[i].max(region.side(i) * 1e-3)).collect();
    let floor = 1e-13 * region.max_side().max(1e-300);
    let mut y = vec![0.0; n];
    for _ in 0..400 {
        if radius.iter().all(|&r| r < floor) {
            break;
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for o in &offsets {
            for i in 0..n {
                y[i] = (x[i] + o[i] * radius[i]).clamp(region.lo[i], region.hi[i]);
            }
            let v = eval(state, &y)?;
            if v > value && best.as_ref().is_none_or(|b| v > b.0) {
                best = Some((v, y.clone()));
            }
        }
        match best {
            Some((v, p)) => {
                value = v;
                x = p;
            }
            None => radius.iter_mut().for_each(|r| *r *= 0.5),
        }
    }
    Ok((value, x))
}
