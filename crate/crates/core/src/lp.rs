//! Dense primal simplex with Bland's rule, and the symmetric-slab programs
//! `max <phi, a>  s.t.  |<r_j, a>| <= 1` that define pointwise norming values.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const SLAB_JITTER: f64 = 1e-9;
/// `SlabLp` values are within this relative amount below the true optimum.
pub const SLAB_RELATIVE_GAP: f64 = 4.0 * SLAB_JITTER;
const MAX_PIVOTS: usize = 100_000;

/// Simplex tableau for `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`, so the
/// slack basis is feasible and no phase one is needed. The tableau keeps its
/// final basis, so a new objective can be optimized warm.
#[derive(Clone, Debug)]
pub struct Tableau {
    rows: usize,
    cols: usize,
    structural: usize,
    t: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal,
    /// Entering column with no positive entry.
    Unbounded { column: usize },
}

impl Tableau {
    pub fn new(a: &[Vec<f64>], b: &[f64]) -> Self {
        let rows = a.len();
        let structural = a.first().map_or(0, Vec::len);
        let cols = structural + rows;
        let mut t = vec![0.0; rows * cols];
        for (i, row) in a.iter().enumerate() {
            assert!(b[i] >= 0.0, "slack basis must be feasible");
            t[i * cols..i * cols + structural].copy_from_slice(row);
            t[i * cols + structural + i] = 1.0;
        }
        Self {
            rows,
            cols,
            structural,
            t,
            rhs: b.to_vec(),
            basis: (structural..cols).collect(),
            cost: vec![0.0; cols],
            reduced: vec![0.0; cols],
        }
    }

    /// Replaces the objective, keeping the current (feasible) basis.
    pub fn set_objective(&mut self, c: &[f64]) {
        self.cost[..self.structural].copy_from_slice(c);
        self.cost[self.structural..].iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.cols {
            let mut z = -self.cost[j];
            for i in 0..self.rows {
                z += self.cost[self.basis[i]] * self.t[i * self.cols + j];
            }
            self.reduced[j] = z;
        }
    }

    pub fn value(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.cost[self.basis[i]] * self.rhs[i])
            .sum()
    }

    /// Values of the structural variables.
    pub fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                x[b] = self.rhs[i];
            }
        }
        x
    }

    /// Structural direction of the ray obtained by raising `column`.
    pub fn ray(&self, column: usize) -> Vec<f64> {
        let mut d = vec![0.0; self.structural];
        if column < self.structural {
            d[column] = 1.0;
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                d[b] -= self.t[i * self.cols + column];
            }
        }
        d
    }

    /// Constraints whose slack is nonbasic at the current vertex.
    pub fn tight_constraints(&self) -> Vec<usize> {
        let mut basic = vec![false; self.rows];
        for &b in &self.basis {
            if b >= self.structural {
                basic[b - self.structural] = true;
            }
        }
        (0..self.rows).filter(|&i| !basic[i]).collect()
    }

    pub fn solve(&mut self) -> Result<LpOutcome> {
        for _ in 0..MAX_PIVOTS {
            let scale = self.cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
            // Bland: lowest-index improving column
            let Some(enter) = (0..self.cols).find(|&j| self.reduced[j] < -PIVOT_TOL * scale) else {
                return Ok(LpOutcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i * self.cols + enter];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Ok(LpOutcome::Unbounded { column: enter });
            };
            self.pivot(row, enter);
        }
        Err(Error::LpIterationLimit(MAX_PIVOTS))
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + c];
        for j in 0..cols {
            self.t[r * cols + j] /= p;
        }
        self.rhs[r] /= p;
        self.t[r * cols + c] = 1.0;
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + c];
            if f == 0.0 {
                continue;
            }
            for j in 0..cols {
                self.t[i * cols + j] -= f * pivot_row[j];
            }
            self.t[i * cols + c] = 0.0;
            self.rhs[i] -= f * self.rhs[r];
            if self.rhs[i] < 0.0 && self.rhs[i] > -1e-13 {
                self.rhs[i] = 0.0;
            }
        }
        let f = self.reduced[c];
        for j in 0..cols {
            self.reduced[j] -= f * pivot_row[j];
        }
        self.reduced[c] = 0.0;
        self.basis[r] = c;
    }
}

/// Optimum of a slab program.
#[derive(Clone, Debug)]
pub struct SlabSolution {
    pub value: f64,
    pub coefficients: Vec<f64>,
}

/// `max <phi, a>  s.t.  |<r_j, a>| <= 1` for all rows `r_j`, solved by
/// constraint generation: the simplex runs on a working set of rows, and the
/// most violated remaining rows are added until the optimum is feasible for
/// every row. The feasible region is symmetric, so the optimum also equals
/// `max |<phi, a>|`.
pub struct SlabLp<'a> {
    rows: &'a [Vec<f64>],
    dim: usize,
    seed: Vec<usize>,
    working: Vec<usize>,
    tableau: Option<Tableau>,
    tight: Vec<usize>,
}

impl<'a> SlabLp<'a> {
    /// `seed` must index rows spanning `R^dim` (e.g. a greedy Fekete subset).
    pub fn new(rows: &'a [Vec<f64>], dim: usize, seed: Vec<usize>) -> Self {
        Self {
            rows,
            dim,
            working: seed.clone(),
            seed,
            tableau: None,
            tight: Vec::new(),
        }
    }

    fn build(&self) -> Tableau {
        let mut a = Vec::with_capacity(2 * self.working.len());
        let mut b = Vec::with_capacity(2 * self.working.len());
        for &j in &self.working {
            let r = &self.rows[j];
            let mut up = Vec::with_capacity(2 * self.dim);
            up.extend_from_slice(r);
            up.extend(r.iter().map(|v| -v));
            let down: Vec<f64> = up.iter().map(|v| -v).collect();
            a.push(up);
            a.push(down);
            // distinct slab widths break the degeneracy of grid-like Z
            let w = 1.0 + SLAB_JITTER * (1.0 + (j as f64 * 0.618_033_988_749_895).fract());
            b.extend([w, w]);
        }
        Tableau::new(&a, &b)
    }

    /// Keeps the seed and the rows defining the last vertex.
    fn prune(&mut self) {
        let mut w = self.seed.clone();
        for &j in &self.tight {
            if !w.contains(&j) {
                w.push(j);
            }
        }
        self.working = w;
        self.tableau = None;
    }

    pub fn maximize(&mut self, phi: &[f64]) -> Result<SlabSolution> {
        if self.working.len() > 4 * self.dim + 8 {
            self.prune();
        }
        let c: Vec<f64> = phi.iter().copied().chain(phi.iter().map(|v| -v)).collect();
        loop {
            let tab = match &mut self.tableau {
                Some(t) => t,
                None => self.tableau.insert(self.build()),
            };
            tab.set_objective(&c);
            if let LpOutcome::Unbounded { column } = tab.solve()? {
                let ray = tab.ray(column);
                let direction = (0..self.dim).map(|k| ray[k] - ray[k + self.dim]).collect();
                return Err(Error::IllConditioned { direction });
            }
            let x = tab.primal();
            let value = tab.value();
            let a: Vec<f64> = (0..self.dim).map(|k| x[k] - x[k + self.dim]).collect();
            let mut worst = 1.0f64;
            let mut violated: Vec<(f64, usize)> = Vec::new();
            for (j, r) in self.rows.iter().enumerate() {
                let v = crate::spaces::dot(r, &a).abs();
                worst = worst.max(v);
                if v > 1.0 + SLAB_RELATIVE_GAP && !self.working.contains(&j) {
                    violated.push((v, j));
                }
            }
            if violated.is_empty() {
                // rescale onto the feasible set so the value is a true lower bound
                let coefficients: Vec<f64> = a.iter().map(|v| v / worst).collect();
                self.tight = tab.tight_constraints().into_iter().map(|k| self.working[k / 2]).collect();
                return Ok(SlabSolution {
                    value: value / worst,
                    coefficients,
                });
            }
            violated.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
            self.working
                .extend(violated.iter().take(self.dim.max(2)).map(|&(_, j)| j));
            self.tableau = None;
        }
    }
}
