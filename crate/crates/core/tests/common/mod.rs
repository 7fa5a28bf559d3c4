//! Reference implementations used as oracles by the integration tests.
//! They deliberately avoid the library's own numerical routines.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed-form real N3D harmonics up to order 2 in ACN order, written in
/// Cartesian coordinates of the unit vector.
pub fn cartesian_sh_order2(v: [f64; 3]) -> [f64; 9] {
    let [x, y, z] = v;
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s15 = 15f64.sqrt();
    [
        1.0,
        s3 * y,
        s3 * z,
        s3 * x,
        s15 * x * y,
        s15 * y * z,
        0.5 * s5 * (3.0 * z * z - 1.0),
        s15 * x * z,
        0.5 * s15 * (x * x - y * y),
    ]
}

/// Legendre polynomial P_l(t) by the three-term recurrence.
pub fn legendre(l: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Unit vector from azimuth and elevation.
pub fn unit(azimuth: f64, elevation: f64) -> [f64; 3] {
    [
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    ]
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    a
}

/// Random positive semidefinite `A·Aᵀ` of dimension `n` with `rank` columns.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> Vec<f64> {
    let f: Vec<f64> = (0..n * rank).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            c[i * n + j] = (0..rank).map(|k| f[i * rank + k] * f[j * rank + k]).sum();
        }
    }
    c
}

fn matvec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &[f64], n: usize, x: &[f64], mu: f64) -> f64 {
    matvec(a, n, x)
        .iter()
        .zip(x)
        .map(|(ax, xi)| (ax - mu * xi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Solves `m·x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` for an exactly singular system.
fn solve(mut m: Vec<f64>, n: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for row in (col + 1)..n {
            let f = m[row * n + col] / m[col * n + col];
            for k in col..n {
                m[row * n + k] -= f * m[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row * n + row];
    }
    Some(x)
}

/// Eigenvalues of a symmetric matrix, in decreasing order, by shifted power
/// iteration with Rayleigh-quotient polishing and Hotelling deflation.
///
/// The shift `r = max row sum` makes `A + r·I` positive semidefinite, so each
/// deflated eigenvalue drops to zero, below all remaining ones.
pub fn power_iteration_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let shift = (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let mut b = a.to_vec();
    for i in 0..n {
        b[i * n + i] += shift;
    }
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i * 7 + k * 3) % 11) as f64 * 0.1)
            .collect();
        normalize(&mut x);
        let mut mu = dot(&x, &matvec(&b, n, &x));
        for _ in 0..20_000 {
            let mut y = matvec(&b, n, &x);
            normalize(&mut y);
            x = y;
            mu = dot(&x, &matvec(&b, n, &x));
            if residual(&b, n, &x, mu) < 1e-4 * shift {
                break;
            }
        }
        for _ in 0..20 {
            if residual(&b, n, &x, mu) < 1e-14 * shift {
                break;
            }
            let mut m = b.clone();
            for i in 0..n {
                m[i * n + i] -= mu;
            }
            match solve(m, n, x.clone()) {
                Some(mut y) if y.iter().all(|v| v.is_finite()) => {
                    normalize(&mut y);
                    x = y;
                    mu = dot(&x, &matvec(&b, n, &x));
                }
                _ => break,
            }
        }
        values.push(mu - shift);
        for i in 0..n {
            for j in 0..n {
                b[i * n + j] -= mu * x[i] * x[j];
            }
        }
    }
    values.sort_by(|p, q| q.total_cmp(p));
    values
}

/// Gram matrix `∫ Y_i Y_j dΩ / 4π` by midpoint quadrature on an
/// elevation × azimuth grid.
pub fn quadrature_gram(order: usize, n_el: usize, n_az: usize) -> Vec<f64> {
    use diffusense::sh_math::{sh_vector, Direction};
    let dim = (order + 1) * (order + 1);
    let mut gram = vec![0.0; dim * dim];
    let mut weight_sum = 0.0;
    for i in 0..n_el {
        // midpoint rule in z = sin(elevation) gives uniform area weights
        let z = -1.0 + (2.0 * i as f64 + 1.0) / n_el as f64;
        let el = z.asin();
        for j in 0..n_az {
            let az = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n_az as f64;
            let y = sh_vector(order, &Direction::new(az, el));
            let v = y.values();
            for p in 0..dim {
                for q in 0..dim {
                    gram[p * dim + q] += v[p] * v[q];
                }
            }
            weight_sum += 1.0;
        }
    }
    gram.iter_mut().for_each(|g| *g /= weight_sum);
    gram
}
