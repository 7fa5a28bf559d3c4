//! Diffuseness estimators operating on SH covariance matrices.
//!
//! All three estimators are ratios and therefore invariant to the overall
//! scale of the covariance. Results are clamped to `[0, 1]`; a silent input
//! (zero energy) is reported as perfectly diffuse.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::covariance::{eigenvalues, truncate, CovarianceMatrix, EigenSpectrum};
use crate::error::{Error, Result};
use crate::sh_math::{channel_count, fibonacci_grid, sh_matrix, Direction, DirectionSet};

/// Number of plane-wave directions averaged in [`reference_mu0`].
pub const MU0_WAVE_DIRECTIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Comedie,
    Dirac,
    ThieleGover,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Comedie, Estimator::Dirac, Estimator::ThieleGover];

    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Comedie => "comedie",
            Estimator::Dirac => "dirac",
            Estimator::ThieleGover => "thiele_gover",
        }
    }

    /// Applies the estimator to a full-order covariance. Thiele-Gover uses
    /// the default grid for the covariance order.
    pub fn apply(&self, c: &CovarianceMatrix) -> Result<f64> {
        match self {
            Estimator::Comedie => comedie(&eigenvalues(c)?),
            Estimator::Dirac => dirac(c),
            Estimator::ThieleGover => thiele_gover(c, &default_grid(c.order())?),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "comedie" => Ok(Estimator::Comedie),
            "dirac" => Ok(Estimator::Dirac),
            "thiele_gover" | "thielegover" | "tg" => Ok(Estimator::ThieleGover),
            other => Err(Error::InvalidInput(format!("unknown estimator `{other}`"))),
        }
    }
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Mean absolute deviation of `values` from their mean, divided by the mean.
/// `None` when the mean is not positive.
fn relative_deviation(values: &[f64]) -> Option<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean <= 0.0 {
        return None;
    }
    Some(values.iter().map(|v| (v - mean).abs()).sum::<f64>() / mean)
}

/// `γ₀ = 2[(L+1)² − 1]`: eigenvalue deviation of a lone plane wave.
pub fn comedie_gamma0(order: usize) -> f64 {
    2.0 * (channel_count(order) as f64 - 1.0)
}

/// COMEDIE diffuseness `d = 1 − γ/γ₀` from an eigenvalue spectrum.
pub fn comedie(spectrum: &EigenSpectrum) -> Result<f64> {
    if spectrum.order() == 0 {
        return Err(Error::Domain(
            "COMEDIE needs order >= 1 (gamma0 = 0 at order 0)".into(),
        ));
    }
    let values = spectrum.clamped();
    if let Some(v) = values.iter().find(|v| **v < 0.0) {
        return Err(Error::Domain(format!(
            "covariance spectrum has a negative eigenvalue {v:e}"
        )));
    }
    match relative_deviation(&values) {
        None => Ok(1.0),
        Some(gamma) => Ok(clamp_unit(1.0 - gamma / comedie_gamma0(spectrum.order()))),
    }
}

/// Order-1 DirAC diffuseness `ψ = 1 − ‖ī‖/(c·ε̄)` computed from the order-0/1
/// block of `c`. The speed of sound cancels.
pub fn dirac(c: &CovarianceMatrix) -> Result<f64> {
    if c.order() == 0 {
        return Err(Error::Domain("DirAC needs order >= 1".into()));
    }
    // ACN: 0 = (0,0), 1 = (1,-1) → y, 2 = (1,0) → z, 3 = (1,1) → x
    let energy = (0..4).map(|i| c.get(i, i)).sum::<f64>();
    if energy <= 0.0 {
        return Ok(1.0);
    }
    let scale = 4.0 / 3f64.sqrt();
    let intensity = [c.get(0, 3), c.get(0, 1), c.get(0, 2)].map(|v| scale * v);
    let norm = intensity.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(clamp_unit(1.0 - norm / energy))
}

/// Default Thiele-Gover scanning grid: Fibonacci lattice of `16·(L+1)²` points.
pub fn default_grid(order: usize) -> Result<DirectionSet> {
    fibonacci_grid(16 * channel_count(order))
}

/// Energy seen by a maximum-directivity beam towards each grid direction,
/// `e(Ω) = y(Ω)ᵀ C y(Ω) / (L+1)⁴`.
pub fn beam_energies(c: &CovarianceMatrix, grid: &DirectionSet) -> Vec<f64> {
    let n = c.dim();
    let norm = (n * n) as f64;
    sh_matrix(c.order(), grid.directions())
        .chunks_exact(n)
        .map(|y| c.quadratic_form(y) / norm)
        .collect()
}

/// Thiele-Gover mean energy deviation `μ` of `c` over `grid`.
/// `None` for a silent field.
pub fn energy_deviation(c: &CovarianceMatrix, grid: &DirectionSet) -> Option<f64> {
    relative_deviation(&beam_energies(c, grid))
}

/// Reference deviation `μ₀` of a lone plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMu0 {
    pub value: f64,
    /// Set at order 0, where the beam is omnidirectional and `μ₀ = 0`.
    pub degenerate: bool,
}

/// Deterministic quasi-random wave directions (Halton bases 2 and 3,
/// area-uniform on the sphere).
pub fn mu0_wave_directions() -> Vec<Direction> {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let inv = 1.0 / base as f64;
        let mut out = 0.0;
        let mut f = inv;
        while i > 0 {
            out += (i % base) as f64 * f;
            i /= base;
            f *= inv;
        }
        out
    }
    (1..=MU0_WAVE_DIRECTIONS)
        .map(|i| {
            let z = 2.0 * radical_inverse(i, 2) - 1.0;
            let az = std::f64::consts::TAU * radical_inverse(i, 3);
            Direction::new(az, z.clamp(-1.0, 1.0).asin())
        })
        .collect()
}

fn compute_mu0(order: usize, grid: &DirectionSet) -> f64 {
    let n = channel_count(order);
    let beams = sh_matrix(order, grid.directions());
    let waves = sh_matrix(order, &mu0_wave_directions());
    let mut total = 0.0;
    let mut energies = vec![0.0; grid.len()];
    for wave in waves.chunks_exact(n) {
        for (e, beam) in energies.iter_mut().zip(beams.chunks_exact(n)) {
            let p: f64 = beam.iter().zip(wave).map(|(a, b)| a * b).sum();
            *e = p * p;
        }
        total += relative_deviation(&energies).unwrap_or(0.0);
    }
    total / MU0_WAVE_DIRECTIONS as f64
}

fn grid_fingerprint(grid: &DirectionSet) -> u64 {
    let mut h = DefaultHasher::new();
    grid.len().hash(&mut h);
    for d in grid.directions() {
        d.azimuth().to_bits().hash(&mut h);
        d.elevation().to_bits().hash(&mut h);
    }
    h.finish()
}

type Mu0Cache = Mutex<HashMap<(usize, u64), f64>>;

fn mu0_cache() -> &'static Mu0Cache {
    static CACHE: OnceLock<Mu0Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Mean `μ` of analytic single-plane-wave covariances over
/// [`MU0_WAVE_DIRECTIONS`] deterministic wave directions. Cached per
/// `(order, grid)`; concurrent first calls may compute the value twice but
/// always store the same number.
pub fn reference_mu0(order: usize, grid: &DirectionSet) -> Result<ReferenceMu0> {
    if grid.is_empty() {
        return Err(Error::Domain("scanning grid must not be empty".into()));
    }
    if order == 0 {
        return Ok(ReferenceMu0 {
            value: 0.0,
            degenerate: true,
        });
    }
    let key = (order, grid_fingerprint(grid));
    if let Some(&v) = mu0_cache().lock().expect("mu0 cache poisoned").get(&key) {
        return Ok(ReferenceMu0 {
            value: v,
            degenerate: false,
        });
    }
    let value = compute_mu0(order, grid);
    mu0_cache()
        .lock()
        .expect("mu0 cache poisoned")
        .entry(key)
        .or_insert(value);
    Ok(ReferenceMu0 {
        value,
        degenerate: false,
    })
}

/// Thiele-Gover directional diffuseness `φ = 1 − μ/μ₀` over `grid`.
pub fn thiele_gover(c: &CovarianceMatrix, grid: &DirectionSet) -> Result<f64> {
    let mu0 = reference_mu0(c.order(), grid)?;
    if mu0.degenerate {
        return Err(Error::Domain(
            "Thiele-Gover needs order >= 1 (omnidirectional beams at order 0)".into(),
        ));
    }
    match energy_deviation(c, grid) {
        None => Ok(1.0),
        Some(mu) => Ok(clamp_unit(1.0 - mu / mu0.value)),
    }
}

/// Estimates at orders `1..=L` from nested truncations of one covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusenessProfile {
    pub estimator: Estimator,
    pub order: usize,
    /// `values[ℓ-1]` is the order-ℓ estimate.
    pub values: Vec<f64>,
    /// True for DirAC, which only ever looks at the order-1 signals.
    pub order_independent: bool,
}

pub fn profile(c: &CovarianceMatrix, estimator: Estimator) -> Result<DiffusenessProfile> {
    if c.order() == 0 {
        return Err(Error::Domain(
            "a diffuseness profile needs order >= 1".into(),
        ));
    }
    let values = (1..=c.order())
        .map(|l| estimator.apply(&truncate(c, l)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiffusenessProfile {
        estimator,
        order: c.order(),
        values,
        order_independent: estimator == Estimator::Dirac,
    })
}

/// Relative noise level of a single source with direct-to-diffuse ratio `drr_db`:
/// `β = 1 / (1 + 10^(DRR/10))`.
pub fn drr_to_beta(drr_db: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(drr_db / 10.0))
}
