//! Deterministic point sets on the sphere: spherical Fibonacci lattices and
//! near-optimal packings obtained by Riesz-energy repulsion.

use std::f64::consts::PI;

use super::{Direction, DirectionSet, DirectionSetKind};
use crate::error::{Error, Result};

/// Largest known minimum angular separation (degrees) of `Q` points on the
/// sphere, `Q = 2..=30` (Tammes problem).
const BEST_KNOWN_MIN_ANGLE_DEG: [f64; 29] = [
    180.0, 120.0, 109.4712, 90.0, 90.0, 77.8695, 74.8585, 70.5288, 66.1468, 63.4349, 63.4349,
    57.1367, 55.6706, 53.6579, 52.2444, 51.0903, 49.5567, 47.6919, 47.4310, 45.6132, 44.7402,
    43.7100, 43.6908, 41.6344, 41.0377, 40.6776, 39.3551, 38.7137, 38.5971,
];

/// Reference minimum angle in radians for a `q`-point packing, when tabulated.
pub fn best_known_min_angle(q: usize) -> Option<f64> {
    (2..=30)
        .contains(&q)
        .then(|| BEST_KNOWN_MIN_ANGLE_DEG[q - 2].to_radians())
}

fn fibonacci_points(n: usize) -> Vec<[f64; 3]> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let (s, c) = (i as f64 * golden_angle).sin_cos();
            [r * c, r * s, z]
        })
        .collect()
}

fn to_directions(points: &[[f64; 3]]) -> Vec<Direction> {
    points
        .iter()
        .map(|p| Direction::from_vector(*p).expect("points are unit vectors"))
        .collect()
}

/// Spherical Fibonacci lattice with `n` points.
pub fn fibonacci_grid(n: usize) -> Result<DirectionSet> {
    if n == 0 {
        return Err(Error::Domain("grid size must be at least 1".into()));
    }
    Ok(DirectionSet::new_unchecked(
        to_directions(&fibonacci_points(n)),
        DirectionSetKind::Grid,
    ))
}

/// Quasi-uniform `q`-point packing.
///
/// `q = 1` is the +x axis and `q = 2` the ±x pair. Larger sets start from a
/// Fibonacci lattice and are relaxed by projected gradient descent on the
/// Riesz s-energy with an increasing exponent, which drives the set towards
/// a max-min-distance arrangement.
pub fn packing_directions(q: usize) -> Result<DirectionSet> {
    let points = match q {
        0 => return Err(Error::Domain("packing size must be at least 1".into())),
        1 => vec![[1.0, 0.0, 0.0]],
        2 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        _ => {
            let mut points = fibonacci_points(q);
            for &(exponent, iterations) in &[(1.0, 300), (6.0, 300), (24.0, 600), (80.0, 1500)] {
                relax(&mut points, exponent, iterations);
            }
            points
        }
    };
    Ok(DirectionSet::new_unchecked(
        to_directions(&points),
        DirectionSetKind::Packing,
    ))
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn min_distance(points: &[[f64; 3]]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(distance(a, b));
        }
    }
    best
}

/// Σ (d₀/d)^s over pairs, with d₀ fixed for the whole stage.
fn energy(points: &[[f64; 3]], scale: f64, exponent: f64) -> f64 {
    let mut total = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            total += (scale / distance(a, b)).powf(exponent);
        }
    }
    total
}

fn relax(points: &mut [[f64; 3]], exponent: f64, iterations: usize) {
    let n = points.len();
    let scale = min_distance(points);
    let mut current = energy(points, scale, exponent);
    let mut step = 0.1;
    let mut forces = vec![[0.0; 3]; n];
    let mut trial = points.to_vec();

    for _ in 0..iterations {
        for f in forces.iter_mut() {
            *f = [0.0; 3];
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(&points[i], &points[j]);
                let w = (scale / d).powf(exponent) / (d * d);
                for k in 0..3 {
                    let push = w * (points[i][k] - points[j][k]);
                    forces[i][k] += push;
                    forces[j][k] -= push;
                }
            }
        }
        // keep only the tangential component
        let mut largest = 0.0f64;
        for (f, p) in forces.iter_mut().zip(points.iter()) {
            let radial = f[0] * p[0] + f[1] * p[1] + f[2] * p[2];
            for k in 0..3 {
                f[k] -= radial * p[k];
            }
            largest = largest.max((f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt());
        }
        if largest == 0.0 {
            break;
        }
        let gain = step * scale / largest;
        for ((t, p), f) in trial.iter_mut().zip(points.iter()).zip(&forces) {
            let moved = [p[0] + gain * f[0], p[1] + gain * f[1], p[2] + gain * f[2]];
            let norm = (moved[0] * moved[0] + moved[1] * moved[1] + moved[2] * moved[2]).sqrt();
            *t = [moved[0] / norm, moved[1] / norm, moved[2] / norm];
        }
        let candidate = energy(&trial, scale, exponent);
        if candidate < current {
            points.copy_from_slice(&trial);
            current = candidate;
            step = (step * 1.2).min(0.5);
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
}
