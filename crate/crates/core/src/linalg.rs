//! Singular value decomposition, pseudoinverse and the two least-squares
//! patterns every calibration step reduces to.
//!
//! The SVD is the one-sided Jacobi (Hestenes) method. It is slow for large
//! matrices but very accurate for the tall-and-thin shapes used here (a few
//! regressors by a few thousand samples), and small singular values come out
//! with high relative accuracy, which keeps the rank decision clean.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default relative singular-value cutoff.
pub const DEFAULT_RCOND: f64 = 1e-12;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U · diag(s) · Vᵀ` with `s` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// m × k left singular vectors, k = min(m, n).
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    /// n × k right singular vectors.
    pub v: Matrix,
}

impl Svd {
    pub fn rank(&self, rcond: f64) -> usize {
        let cutoff = self.cutoff(rcond);
        match cutoff {
            Some(c) => self.singular_values.iter().filter(|s| **s > c).count(),
            None => 0,
        }
    }

    fn cutoff(&self, rcond: f64) -> Option<f64> {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        (max > 0.0).then_some(rcond * max)
    }

    /// `V · diag(1/s) · Uᵀ` over the singular values above the cutoff.
    pub fn pseudoinverse(&self, rcond: f64) -> Matrix {
        let m = self.u.rows();
        let n = self.v.rows();
        let mut out = vec![0.0; n * m];
        if let Some(cutoff) = self.cutoff(rcond) {
            for (k, &s) in self.singular_values.iter().enumerate() {
                if s <= cutoff {
                    break;
                }
                let inv = 1.0 / s;
                for i in 0..n {
                    let vik = self.v[(i, k)] * inv;
                    if vik == 0.0 {
                        continue;
                    }
                    let row = &mut out[i * m..(i + 1) * m];
                    for (j, o) in row.iter_mut().enumerate() {
                        *o += vik * self.u[(j, k)];
                    }
                }
            }
        }
        Matrix::new(n, m, out).expect("pseudoinverse of finite matrix is finite")
    }
}

/// Thin SVD of any non-empty matrix.
pub fn svd(a: &Matrix) -> Svd {
    if a.rows() >= a.cols() {
        let (u, s, v) = jacobi_tall(a);
        Svd {
            u,
            singular_values: s,
            v,
        }
    } else {
        let (u, s, v) = jacobi_tall(&a.transpose());
        Svd {
            u: v,
            singular_values: s,
            v: u,
        }
    }
}

/// One-sided Jacobi on a matrix with rows ≥ cols.
fn jacobi_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if libm::fabs(zeta) > 1e150 {
                    0.5 / zeta
                } else {
                    let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = w
        .iter()
        .enumerate()
        .map(|(j, col)| (j, libm::sqrt(dot(col, col))))
        .collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));

    let mut u_data = vec![0.0; m * n];
    let mut v_data = vec![0.0; n * n];
    let mut s = Vec::with_capacity(n);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            for i in 0..m {
                u_data[i * n + k] = w[j][i] / sigma;
            }
        }
        for i in 0..n {
            v_data[i * n + k] = v[j][i];
        }
    }
    (
        Matrix::new(m, n, u_data).expect("finite"),
        s,
        Matrix::new(n, n, v_data).expect("finite"),
    )
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_rcond(rcond: f64) -> Result<()> {
    if rcond > 0.0 && rcond < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(rcond))
    }
}

/// Moore-Penrose pseudoinverse. Singular values at or below `rcond · σ_max`
/// are treated as zero, giving the minimum-norm solution on the
/// rank-deficient subspace.
pub fn pseudoinverse(a: &Matrix, rcond: f64) -> Result<Matrix> {
    check_rcond(rcond)?;
    Ok(svd(a).pseudoinverse(rcond))
}

/// Numerical rank with the given relative cutoff.
pub fn rank(a: &Matrix, rcond: f64) -> Result<usize> {
    check_rcond(rcond)?;
    Ok(svd(a).rank(rcond))
}

/// Gain `G` (k × m) minimizing `‖X − G·B‖_F` for observations `X` (k × n)
/// and regressors `B` (m × n). Errors when `B` does not have full row rank.
pub fn lstsq_fit(observations: &Matrix, regressors: &Matrix) -> Result<Matrix> {
    if observations.cols() != regressors.cols() {
        return Err(Error::Shape {
            op: "lstsq_fit",
            left: observations.shape(),
            right: regressors.shape(),
        });
    }
    let decomposition = svd(regressors);
    let required = regressors.rows();
    let rank = decomposition.rank(DEFAULT_RCOND);
    if rank < required {
        return Err(Error::RankDeficient { rank, required });
    }
    observations.matmul(&decomposition.pseudoinverse(DEFAULT_RCOND))
}

/// `b` (m × 1) minimizing `‖x − G·b‖₂` for a gain `G` (k × m) of full column
/// rank.
pub fn lstsq_solve(gain: &Matrix, observation: &Matrix) -> Result<Matrix> {
    if observation.cols() != 1 || observation.rows() != gain.rows() {
        return Err(Error::Shape {
            op: "lstsq_solve",
            left: gain.shape(),
            right: observation.shape(),
        });
    }
    let decomposition = svd(gain);
    let required = gain.cols();
    let rank = decomposition.rank(DEFAULT_RCOND);
    if rank < required {
        return Err(Error::RankDeficient { rank, required });
    }
    decomposition
        .pseudoinverse(DEFAULT_RCOND)
        .matmul(observation)
}
