//! Plane-wave plus diffuse-noise sound field model in the SH domain.
//!
//! A block of order-`L` SH signals is
//!
//! ```text
//! b_{l,m}(t) = Σ_q Y_l^m(Ω_q)·s_q(t) + √ν·n_{l,m}(t)
//! ```
//!
//! with zero-mean Gaussian white source and noise sequences. The noise power
//! `ν` is derived from the configured relative noise level `β` so that the
//! expected noise share of the total SH power equals `β`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::covariance::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::sh_math::{channel_count, packing_directions, sh_vector, Direction, ShVector};

/// Name of the random generator, recorded in output metadata.
pub const GENERATOR_NAME: &str =
    "ChaCha8Rng (rand_chacha) seeded with seed_from_u64; rand_distr StandardNormal (ziggurat)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    /// Each source carries its own independent signal.
    #[default]
    Uncorrelated,
    /// All sources carry the same signal, scaled by `√power`.
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub direction: Direction,
    pub power: f64,
}

impl Source {
    pub fn unit(direction: Direction) -> Self {
        Self {
            direction,
            power: 1.0,
        }
    }
}

/// Full description of a synthetic sound field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub order: usize,
    pub sources: Vec<Source>,
    pub correlation: Correlation,
    /// Relative noise level in `[0, 1]`.
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
    /// With `beta = 1`, ignore `sources` and synthesize a unit-power
    /// diffuse field.
    pub diffuse_only: bool,
}

impl ScenarioConfig {
    pub fn new(order: usize, sources: Vec<Source>, beta: f64) -> Self {
        Self {
            order,
            sources,
            correlation: Correlation::Uncorrelated,
            beta,
            samples: 1024,
            seed: 0,
            diffuse_only: false,
        }
    }

    /// `q` unit-power sources on a `q`-point packing. `beta = 1` yields a pure
    /// diffuse field with the sources ignored.
    pub fn packed(order: usize, q: usize, beta: f64, correlation: Correlation) -> Result<Self> {
        let sources = packing_directions(q)?
            .directions()
            .iter()
            .map(|d| Source::unit(*d))
            .collect();
        Ok(Self {
            correlation,
            diffuse_only: beta == 1.0,
            ..Self::new(order, sources, beta)
        })
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_correlation(mut self, correlation: Correlation) -> Self {
        self.correlation = correlation;
        self
    }

    fn active_sources(&self) -> &[Source] {
        if self.diffuse_only {
            &[]
        } else {
            &self.sources
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config(
                "beta",
                format!("must lie in [0, 1], got {}", self.beta),
            ));
        }
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if !(s.power.is_finite() && s.power > 0.0) {
                return Err(Error::config(
                    format!("sources[{i}].power"),
                    format!("must be positive and finite, got {}", s.power),
                ));
            }
        }
        if self.diffuse_only && self.beta != 1.0 {
            return Err(Error::config(
                "diffuse_only",
                "only meaningful together with beta = 1",
            ));
        }
        if self.beta == 1.0 && !self.active_sources().is_empty() {
            return Err(Error::config(
                "beta",
                "beta = 1 with sources present has no defined noise power; remove the sources or set diffuse_only = true",
            ));
        }
        if self.beta < 1.0 && self.active_sources().is_empty() {
            return Err(Error::config(
                "sources",
                "a field without sources is purely diffuse and requires beta = 1",
            ));
        }
        Ok(())
    }

    pub fn source_vectors(&self) -> Vec<ShVector> {
        self.active_sources()
            .iter()
            .map(|s| sh_vector(self.order, &s.direction))
            .collect()
    }

    /// Expected total SH power of the directional component.
    pub fn directional_power(&self) -> f64 {
        let n = channel_count(self.order);
        match self.correlation {
            Correlation::Uncorrelated => {
                self.active_sources().iter().map(|s| s.power).sum::<f64>() * n as f64
            }
            Correlation::Identical => {
                let mut sum = vec![0.0; n];
                for (s, y) in self.active_sources().iter().zip(self.source_vectors()) {
                    let amp = s.power.sqrt();
                    for (acc, v) in sum.iter_mut().zip(y.values()) {
                        *acc += amp * v;
                    }
                }
                sum.iter().map(|v| v * v).sum()
            }
        }
    }

    /// Per-channel diffuse noise power `ν`.
    pub fn noise_power(&self) -> Result<f64> {
        self.validate()?;
        if self.beta == 1.0 {
            return Ok(1.0);
        }
        let n = channel_count(self.order) as f64;
        Ok(self.beta * self.directional_power() / ((1.0 - self.beta) * n))
    }
}

/// `(L+1)² × T` matrix of SH signals, one row per ACN channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ShSignalBlock {
    order: usize,
    samples: usize,
    data: Vec<f64>,
}

impl ShSignalBlock {
    /// Wraps channel-major data (`data[ch * samples + t]`).
    pub fn new(order: usize, samples: usize, data: Vec<f64>) -> Result<Self> {
        let n = channel_count(order);
        if samples == 0 {
            return Err(Error::InvalidInput(
                "a signal block needs at least one sample".into(),
            ));
        }
        if data.len() != n * samples {
            return Err(Error::InvalidInput(format!(
                "order {order} with {samples} samples needs {} values, got {}",
                n * samples,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "signal block contains non-finite samples".into(),
            ));
        }
        Ok(Self {
            order,
            samples,
            data,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn channels(&self) -> usize {
        channel_count(self.order)
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.data[index * self.samples..(index + 1) * self.samples]
    }

    /// Channel-major samples.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Samples `start..start+len` of every channel.
    pub fn frame(&self, start: usize, len: usize) -> Result<ShSignalBlock> {
        if len == 0 || start + len > self.samples {
            return Err(Error::Domain(format!(
                "frame {start}..{} outside block of {} samples",
                start + len,
                self.samples
            )));
        }
        let mut data = Vec::with_capacity(self.channels() * len);
        for ch in 0..self.channels() {
            data.extend_from_slice(&self.channel(ch)[start..start + len]);
        }
        Ok(Self {
            order: self.order,
            samples: len,
            data,
        })
    }
}

/// Draws a block from the scenario's seeded generator.
///
/// Draw order: source sequences (one per source, or a single shared sequence
/// for identical sources), then one noise sequence per channel when `ν > 0`.
pub fn synthesize(config: &ScenarioConfig) -> Result<ShSignalBlock> {
    let nu = config.noise_power()?;
    let n = channel_count(config.order);
    let t = config.samples;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw =
        |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };

    let mut data = vec![0.0; n * t];
    let sources = config.active_sources();
    let vectors = config.source_vectors();
    let shared = match config.correlation {
        Correlation::Identical if !sources.is_empty() => Some(draw(t)),
        _ => None,
    };
    for (source, y) in sources.iter().zip(&vectors) {
        let own;
        let signal = match &shared {
            Some(s) => s,
            None => {
                own = draw(t);
                &own
            }
        };
        let amp = source.power.sqrt();
        for (row, &gain) in data.chunks_exact_mut(t).zip(y.values()) {
            let g = gain * amp;
            for (out, s) in row.iter_mut().zip(signal) {
                *out += g * s;
            }
        }
    }
    if nu > 0.0 {
        let scale = nu.sqrt();
        for row in data.chunks_exact_mut(t) {
            for (out, w) in row.iter_mut().zip(draw(t)) {
                *out += scale * w;
            }
        }
    }
    ShSignalBlock::new(config.order, t, data)
}

/// Expected covariance `Γ + ν·I` of the scenario.
pub fn analytic_covariance(config: &ScenarioConfig) -> Result<CovarianceMatrix> {
    let nu = config.noise_power()?;
    let n = channel_count(config.order);
    let mut data = vec![0.0; n * n];
    let sources = config.active_sources();
    let vectors = config.source_vectors();
    let mut add_outer = |v: &[f64], weight: f64| {
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += weight * v[i] * v[j];
            }
        }
    };
    match config.correlation {
        Correlation::Uncorrelated => {
            for (s, y) in sources.iter().zip(&vectors) {
                add_outer(y.values(), s.power);
            }
        }
        Correlation::Identical => {
            let mut sum = vec![0.0; n];
            for (s, y) in sources.iter().zip(&vectors) {
                for (acc, v) in sum.iter_mut().zip(y.values()) {
                    *acc += s.power.sqrt() * v;
                }
            }
            add_outer(&sum, 1.0);
        }
    }
    for i in 0..n {
        data[i * n + i] += nu;
    }
    Ok(CovarianceMatrix::from_parts(config.order, data))
}
