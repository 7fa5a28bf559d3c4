//! Real fully-normalized (N3D) spherical harmonics and direction sets.
//!
//! Conventions used throughout the crate:
//!
//! * Directions are given externally as (azimuth, elevation) in radians.
//!   Azimuth is measured from +x towards +y, elevation from the horizontal
//!   plane towards +z. The colatitude used in the Legendre argument is
//!   `θ = π/2 − elevation`.
//! * Harmonics are real, N3D normalized and carry no Condon-Shortley phase,
//!   so that `Σ_m Y_l^m(Ω)² = 2l + 1` and `Y_1^{1}, Y_1^{-1}, Y_1^{0}` are
//!   `√3·x`, `√3·y` and `√3·z` respectively.
//! * Channels follow ACN ordering, `index = l² + l + m`.

mod packing;

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

pub use packing::{best_known_min_angle, fibonacci_grid, packing_directions};

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth: f64,
    elevation: f64,
}

impl Direction {
    /// Builds a direction, wrapping azimuth into `[0, 2π)` and clamping
    /// elevation into `[−π/2, π/2]`.
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        let mut az = azimuth.rem_euclid(TAU);
        if az >= TAU {
            az = 0.0;
        }
        Self {
            azimuth: az,
            elevation: elevation.clamp(-PI / 2.0, PI / 2.0),
        }
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }

    /// Direction of a (not necessarily normalized) cartesian vector.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain(format!(
                "cannot take the direction of vector {v:?}"
            )));
        }
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        Ok(Self::new(v[1].atan2(v[0]), z.asin()))
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    /// Polar angle measured from +z.
    pub fn colatitude(&self) -> f64 {
        PI / 2.0 - self.elevation
    }

    pub fn to_vector(&self) -> [f64; 3] {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [ce * ca, ce * sa, se]
    }

    pub fn antipode(&self) -> Self {
        let [x, y, z] = self.to_vector();
        // from_vector only fails on the zero vector
        Self::from_vector([-x, -y, -z]).expect("unit vector")
    }

    /// Great-circle angle to `other`, in radians.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let a = self.to_vector();
        let b = other.to_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        cross_norm.atan2(dot)
    }
}

/// Number of SH channels up to and including `order`.
pub const fn channel_count(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// ACN channel index of `(l, m)`.
pub fn acn_index(l: usize, m: i64) -> Result<usize> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Domain(format!(
            "degree m = {m} exceeds order l = {l}"
        )));
    }
    Ok(((l * l + l) as i64 + m) as usize)
}

/// Inverse of [`acn_index`].
pub fn acn_to_lm(index: usize) -> (usize, i64) {
    let mut l = (index as f64).sqrt() as usize;
    // correct for rounding in the square root
    while l * l > index {
        l -= 1;
    }
    while (l + 1) * (l + 1) <= index {
        l += 1;
    }
    let m = index as i64 - (l * l + l) as i64;
    (l, m)
}

/// The order `L` for which `(L+1)² == channels`, if any.
pub fn order_for_channels(channels: usize) -> Option<usize> {
    let root = (channels as f64).sqrt().round() as usize;
    (root >= 1 && root * root == channels).then(|| root - 1)
}

/// Real N3D spherical harmonic coefficients of one direction, ACN ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct ShVector {
    order: usize,
    values: Vec<f64>,
}

impl ShVector {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, l: usize, m: i64) -> Result<f64> {
        if l > self.order {
            return Err(Error::Domain(format!(
                "order {l} exceeds vector order {}",
                self.order
            )));
        }
        Ok(self.values[acn_index(l, m)?])
    }

    pub fn dot(&self, other: &ShVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }
}

/// Fully normalized associated Legendre values `P̄_l^m(x)` for `0 ≤ m ≤ l ≤ order`,
/// stored at `l(l+1)/2 + m`, where `x = cos θ` and `s = sin θ` are passed
/// separately so that `s` keeps full precision near the poles. `P̄_l^m = sqrt((2l+1)(l−m)!/(l+m)!)·P_l^m`,
/// without the Condon-Shortley phase.
fn normalized_legendre(order: usize, x: f64, s: f64) -> Vec<f64> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (order + 1) * (order + 2) / 2];
    p[0] = 1.0;
    for m in 1..=order {
        let mf = m as f64;
        p[idx(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[idx(m - 1, m - 1)];
    }
    for m in 0..order {
        p[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[idx(m, m)];
    }
    for m in 0..=order {
        for l in (m + 2)..=order {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

fn fill_sh(order: usize, dir: &Direction, out: &mut [f64]) {
    let (x, s) = dir.elevation().sin_cos();
    let legendre = normalized_legendre(order, x, s);
    let az = dir.azimuth();
    for l in 0..=order {
        let base = l * l + l;
        let row = l * (l + 1) / 2;
        out[base] = legendre[row];
        for m in 1..=l {
            let scaled = std::f64::consts::SQRT_2 * legendre[row + m];
            let (s, c) = (m as f64 * az).sin_cos();
            out[base + m] = scaled * c;
            out[base - m] = scaled * s;
        }
    }
}

/// Real N3D spherical harmonic `Y_l^m` at `dir`.
pub fn eval_sh(l: usize, m: i64, dir: &Direction) -> Result<f64> {
    let index = acn_index(l, m)?;
    let mut values = vec![0.0; channel_count(l)];
    fill_sh(l, dir, &mut values);
    Ok(values[index])
}

/// All harmonics up to `order` at `dir`, in ACN order.
pub fn sh_vector(order: usize, dir: &Direction) -> ShVector {
    let mut values = vec![0.0; channel_count(order)];
    fill_sh(order, dir, &mut values);
    ShVector { order, values }
}

/// Row-major `directions.len() × (order+1)²` matrix of SH vectors.
pub(crate) fn sh_matrix(order: usize, directions: &[Direction]) -> Vec<f64> {
    let n = channel_count(order);
    let mut out = vec![0.0; directions.len() * n];
    for (row, dir) in out.chunks_exact_mut(n).zip(directions) {
        fill_sh(order, dir, row);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionSetKind {
    Packing,
    Grid,
}

/// An ordered set of distinct directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Direction>,
    kind: DirectionSetKind,
}

impl DirectionSet {
    /// Rejects empty sets and sets containing the same direction twice.
    pub fn new(directions: Vec<Direction>, kind: DirectionSetKind) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Domain("direction set must not be empty".into()));
        }
        for (i, a) in directions.iter().enumerate() {
            for b in &directions[i + 1..] {
                if a.angle_to(b) < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "duplicate direction (az {}, el {})",
                        a.azimuth(),
                        a.elevation()
                    )));
                }
            }
        }
        Ok(Self { directions, kind })
    }

    pub(crate) fn new_unchecked(directions: Vec<Direction>, kind: DirectionSetKind) -> Self {
        Self { directions, kind }
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn kind(&self) -> DirectionSetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Smallest great-circle angle between two members, `None` for a single point.
    pub fn min_angle(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.directions.iter().enumerate() {
            for b in &self.directions[i + 1..] {
                let angle = a.angle_to(b);
                best = Some(best.map_or(angle, |m| m.min(angle)));
            }
        }
        best
    }

    /// Applies a rotation (row-major 3×3) to every member.
    pub fn rotated(&self, rotation: &[[f64; 3]; 3]) -> Self {
        let directions = self
            .directions
            .iter()
            .map(|d| {
                let v = d.to_vector();
                let r = [0, 1, 2]
                    .map(|i| rotation[i][0] * v[0] + rotation[i][1] * v[1] + rotation[i][2] * v[2]);
                Direction::from_vector(r).expect("rotation of a unit vector")
            })
            .collect();
        Self {
            directions,
            kind: self.kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_low_order_values() {
        let d = Direction::new(1.234, 0.4);
        assert_eq!(eval_sh(0, 0, &d).unwrap(), 1.0);
        let up = Direction::new(0.0, PI / 2.0);
        assert!((eval_sh(1, 0, &up).unwrap() - 3f64.sqrt()).abs() < 1e-14);
        let front = Direction::new(0.0, 0.0);
        assert!((eval_sh(1, 1, &front).unwrap() - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn order_one_is_scaled_cartesian() {
        let d = Direction::new(2.1, -0.7);
        let [x, y, z] = d.to_vector();
        let v = sh_vector(1, &d);
        let s3 = 3f64.sqrt();
        assert!((v.values()[1] - s3 * y).abs() < 1e-14);
        assert!((v.values()[2] - s3 * z).abs() < 1e-14);
        assert!((v.values()[3] - s3 * x).abs() < 1e-14);
    }

    #[test]
    fn degree_out_of_range() {
        let d = Direction::new(0.0, 0.0);
        assert!(matches!(eval_sh(2, 3, &d), Err(Error::Domain(_))));
        assert!(matches!(eval_sh(2, -3, &d), Err(Error::Domain(_))));
    }

    #[test]
    fn vector_norm_and_parity() {
        let d = Direction::new(0.3, 0.2);
        let v = sh_vector(3, &d);
        assert_eq!(v.values().len(), 16);
        assert!((v.norm_squared() - 16.0).abs() < 1e-10);
        assert_eq!(sh_vector(0, &d).values(), &[1.0]);

        let a = sh_vector(1, &d);
        let b = sh_vector(1, &d.antipode());
        assert!((a.values()[0] - b.values()[0]).abs() < 1e-15);
        for i in 1..4 {
            assert!((a.values()[i] + b.values()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn acn_roundtrip() {
        let mut seen = vec![false; channel_count(6)];
        for l in 0..=6usize {
            for m in -(l as i64)..=(l as i64) {
                let i = acn_index(l, m).unwrap();
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(acn_to_lm(i), (l, m));
            }
        }
        assert!(seen.into_iter().all(|s| s));
        assert_eq!(order_for_channels(16), Some(3));
        assert_eq!(order_for_channels(15), None);
    }

    #[test]
    fn direction_normalization() {
        let d = Direction::new(-PI / 2.0, 3.0);
        assert!((d.azimuth() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(d.elevation(), PI / 2.0);
        let v = Direction::new(0.7, 0.1).to_vector();
        let back = Direction::from_vector(v).unwrap().to_vector();
        for i in 0..3 {
            assert!((v[i] - back[i]).abs() < 1e-12);
        }
        assert!(Direction::from_vector([0.0; 3]).is_err());
    }

    #[test]
    fn duplicate_directions_rejected() {
        let d = Direction::new(0.5, 0.5);
        assert!(DirectionSet::new(vec![d, d], DirectionSetKind::Grid).is_err());
        assert!(DirectionSet::new(vec![], DirectionSetKind::Grid).is_err());
    }
}
