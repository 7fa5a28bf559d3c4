//! Dense symmetric eigensolver (cyclic Jacobi).

use crate::error::{Error, Result};

/// Maximum number of full sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Convergence target for the off-diagonal Frobenius norm, relative to its
/// initial value.
pub const RELATIVE_TOLERANCE: f64 = 1e-12;

/// Eigen-decomposition `A = V·diag(λ)·Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues sorted in decreasing order.
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

/// Checks `|A_ij − A_ji| ≤ 1e-12·max|A|` and finiteness.
pub fn check_symmetric(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::InvalidInput(format!(
            "expected {} entries for a {n}×{n} matrix, got {}",
            n * n,
            a.len()
        )));
    }
    if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite matrix entry {bad}"
        )));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (a[i * n + j] - a[j * n + i]).abs();
            if gap > 1e-12 * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric: |A[{i},{j}] - A[{j},{i}]| = {gap:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues and eigenvectors of the symmetric row-major `n × n` matrix `a`.
///
/// Cyclic-by-row Jacobi with a threshold strategy: during the first three
/// sweeps only elements above `0.2·off/n²` are rotated away; afterwards
/// elements that are negligible next to both diagonal entries are zeroed
/// without a rotation.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    check_symmetric(a, n)?;
    let mut m = a.to_vec();
    // symmetrize exactly so that only the upper triangle needs tracking
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let initial = off_diagonal_norm(&m, n);
    let target = RELATIVE_TOLERANCE * initial;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m, n);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        let threshold = if sweeps <= 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let g = 100.0 * apq.abs();
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                rotate(&mut m, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// One Jacobi rotation annihilating `m[p,q]`, accumulated into `v`.
fn rotate(m: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    m[p * n + p] = app - t * apq;
    m[q * n + q] = aqq + t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[r * n + p];
        let arq = m[r * n + q];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        m[r * n + p] = new_rp;
        m[p * n + r] = new_rp;
        m[r * n + q] = new_rq;
        m[q * n + r] = new_rq;
    }
    for r in 0..n {
        let vrp = v[r * n + p];
        let vrq = v[r * n + q];
        v[r * n + p] = vrp - s * (vrq + tau * vrp);
        v[r * n + q] = vrq + s * (vrp - tau * vrq);
    }
}
