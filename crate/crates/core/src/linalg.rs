//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Row-major `rows x cols` matrix from nested rows.
pub fn matrix_from_rows(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// Numerical rank test on the column-scaled matrix.
#[derive(Clone, Debug)]
pub struct RankInfo {
    /// Smallest singular value of the column-scaled matrix (rows padded with
    /// zeros to at least `cols`).
    pub smallest_singular_value: f64,
    pub full_rank: bool,
    /// Unit vector (in unscaled coordinates, normalized in `l^2`) spanning the
    /// direction of the smallest singular value: `m * v ~ 0` when rank deficient.
    pub null_vector: Vec<f64>,
}

pub fn rank_info(m: &DMatrix<f64>, tol: f64) -> RankInfo {
    let (rows, cols) = m.shape();
    let norms: Vec<f64> = (0..cols).map(|j| m.column(j).norm()).collect();
    if let Some(j) = norms.iter().position(|&n| n == 0.0) {
        let mut v = vec![0.0; cols];
        v[j] = 1.0;
        return RankInfo {
            smallest_singular_value: 0.0,
            full_rank: false,
            null_vector: v,
        };
    }
    let padded_rows = rows.max(cols);
    let scaled = DMatrix::from_fn(padded_rows, cols, |i, j| {
        if i < rows {
            m[(i, j)] / norms[j]
        } else {
            0.0
        }
    });
    let svd = scaled.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let mut v: Vec<f64> = (0..cols).map(|j| v_t[(k, j)] / norms[j]).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    RankInfo {
        smallest_singular_value: sigma,
        full_rank: sigma >= tol,
        null_vector: v,
    }
}

/// Greedy volume maximization: picks `k` rows one at a time, each maximizing
/// the residual norm against the span of the rows chosen so far (QR with
/// column pivoting on the transpose). Returns fewer than `k` indices when
/// the rank is smaller.
pub fn greedy_volume_rows(rows: &[Vec<f64>], k: usize, tol: f64) -> Vec<usize> {
    let mut residual: Vec<Vec<f64>> = rows.to_vec();
    let scale = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = None;
        let mut best_norm = tol * scale.max(f64::MIN_POSITIVE);
        for (i, r) in residual.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > best_norm {
                best_norm = n;
                best = Some(i);
            }
        }
        let Some(p) = best else { break };
        chosen.push(p);
        let q: Vec<f64> = residual[p].iter().map(|x| x / best_norm).collect();
        for (i, r) in residual.iter_mut().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let c: f64 = r.iter().zip(&q).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(&q).for_each(|(a, b)| *a -= c * b);
        }
    }
    chosen
}

/// Solves `m x = b` by LU; `None` when singular.
pub fn solve(m: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let lu = m.clone().lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
}

pub fn inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().lu().try_inverse()
}
