//! Scenario sweeps over source count, noise level and SH order, with
//! multi-seed averaging.
//!
//! Every grid point derives its own seeds from the base seed and its
//! coordinates, so results do not depend on evaluation order or on how many
//! worker threads are used.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{estimate_covariance, mismatch_xi, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::estimators::{default_grid, dirac, thiele_gover, Estimator};
use crate::field_sim::{
    analytic_covariance, synthesize, Correlation, ScenarioConfig, GENERATOR_NAME,
};
use crate::sh_math::DirectionSet;

pub const PACKING_SOURCE: &str =
    "Fibonacci-seeded Riesz s-energy repulsion (s up to 80); Q=1: +x, Q=2: ±x";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceMode {
    /// Sample covariance of synthesized blocks.
    #[default]
    Empirical,
    /// Expected covariance; samples and seeds are ignored.
    Analytic,
}

/// What a sweep record measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Estimator(Estimator),
    /// Diffuse-field mismatch ξ.
    Mismatch,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Estimator(e) => f.write_str(e.name()),
            Metric::Mismatch => f.write_str("mismatch"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub estimators: Vec<Estimator>,
    pub orders: Vec<usize>,
    pub q_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub correlation: Correlation,
    pub samples: usize,
    pub seeds: usize,
    pub covariance_mode: CovarianceMode,
    pub base_seed: u64,
}

/// β axis `0, 0.05, …, 1`.
pub fn default_beta_axis() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            estimators: Estimator::ALL.to_vec(),
            orders: vec![1, 2, 3],
            q_values: (1..=36).collect(),
            beta_values: default_beta_axis(),
            correlation: Correlation::Uncorrelated,
            samples: 1024,
            seeds: 10,
            covariance_mode: CovarianceMode::Empirical,
            base_seed: 0,
        }
    }
}

fn check_axes(orders: &[usize], q_values: &[usize], samples: usize, seeds: usize) -> Result<()> {
    if orders.is_empty() {
        return Err(Error::EmptyAxis("orders".into()));
    }
    if q_values.is_empty() {
        return Err(Error::EmptyAxis("q_values".into()));
    }
    if let Some(bad) = orders.iter().find(|&&l| l == 0) {
        return Err(Error::config(
            "orders",
            format!("orders must be >= 1, got {bad}"),
        ));
    }
    if q_values.contains(&0) {
        return Err(Error::config("q_values", "source counts must be >= 1"));
    }
    if samples == 0 {
        return Err(Error::config("samples", "must be at least 1"));
    }
    if seeds == 0 {
        return Err(Error::config("seeds", "must be at least 1"));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::EmptyAxis("estimators".into()));
        }
        if self.beta_values.is_empty() {
            return Err(Error::EmptyAxis("beta_values".into()));
        }
        check_axes(&self.orders, &self.q_values, self.samples, self.seeds)?;
        if let Some(b) = self.beta_values.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::config(
                "beta_values",
                format!("{b} is outside [0, 1]"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub base_seed: u64,
    pub generator: String,
    pub packing: String,
    pub covariance_mode: CovarianceMode,
    pub correlation: Correlation,
    pub samples: usize,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub metric: Metric,
    pub order: usize,
    pub q: usize,
    pub beta: f64,
    pub mean: f64,
    /// Sample standard deviation across seeds; 0 for a single evaluation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn find(&self, metric: Metric, order: usize, q: usize, beta: f64) -> Option<&SweepRecord> {
        self.records
            .iter()
            .find(|r| r.metric == metric && r.order == order && r.q == q && r.beta == beta)
    }

    /// Long format: `estimator,L,Q,beta,mean,std`.
    pub fn to_long_csv(&self) -> String {
        let mut s = String::from("estimator,L,Q,beta,mean,std\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.metric, r.order, r.q, r.beta, r.mean, r.std
            );
        }
        s
    }

    /// Distinct (metric, order) pairs present, in record order.
    pub fn panels(&self) -> Vec<(Metric, usize)> {
        let mut seen = Vec::new();
        for r in &self.records {
            if !seen.contains(&(r.metric, r.order)) {
                seen.push((r.metric, r.order));
            }
        }
        seen
    }

    /// Plot-ready matrix for one metric and order: β rows, Q columns.
    pub fn matrix_csv(&self, metric: Metric, order: usize) -> String {
        let mut qs: Vec<usize> = Vec::new();
        let mut rows: Vec<(f64, BTreeMap<usize, f64>)> = Vec::new();
        for r in self
            .records
            .iter()
            .filter(|r| r.metric == metric && r.order == order)
        {
            if !qs.contains(&r.q) {
                qs.push(r.q);
            }
            match rows.iter_mut().find(|(b, _)| *b == r.beta) {
                Some((_, row)) => {
                    row.insert(r.q, r.mean);
                }
                None => rows.push((r.beta, BTreeMap::from([(r.q, r.mean)]))),
            }
        }
        let mut s = String::from("beta");
        for q in &qs {
            let _ = write!(s, ",{q}");
        }
        s.push('\n');
        for (beta, row) in rows {
            let _ = write!(s, "{beta}");
            for q in &qs {
                let _ = write!(s, ",{}", row.get(q).copied().unwrap_or(f64::NAN));
            }
            s.push('\n');
        }
        s
    }

    /// Mismatch table with L rows and Q columns.
    pub fn transition_matrix_csv(&self) -> String {
        let mut orders: Vec<usize> = Vec::new();
        let mut qs: Vec<usize> = Vec::new();
        for r in self.records.iter().filter(|r| r.metric == Metric::Mismatch) {
            if !orders.contains(&r.order) {
                orders.push(r.order);
            }
            if !qs.contains(&r.q) {
                qs.push(r.q);
            }
        }
        let mut s = String::from("L");
        for q in &qs {
            let _ = write!(s, ",{q}");
        }
        s.push('\n');
        for l in orders {
            let _ = write!(s, "{l}");
            for &q in &qs {
                let v = self
                    .records
                    .iter()
                    .find(|r| r.metric == Metric::Mismatch && r.order == l && r.q == q)
                    .map_or(f64::NAN, |r| r.mean);
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one repetition at one grid point.
pub fn point_seed(base: u64, order: usize, q: usize, beta: f64, repetition: usize) -> u64 {
    [order as u64, q as u64, beta.to_bits(), repetition as u64]
        .iter()
        .fold(splitmix64(base), |acc, &v| splitmix64(acc ^ v))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn packings(q_values: &[usize]) -> Result<BTreeMap<usize, ScenarioConfig>> {
    // template configs; order, beta and seed are filled in per point
    q_values
        .iter()
        .map(|&q| {
            Ok((
                q,
                ScenarioConfig::packed(1, q, 0.0, Correlation::Uncorrelated)?,
            ))
        })
        .collect()
}

fn point_config(
    template: &ScenarioConfig,
    order: usize,
    beta: f64,
    correlation: Correlation,
    samples: usize,
) -> ScenarioConfig {
    ScenarioConfig {
        order,
        beta,
        correlation,
        samples,
        diffuse_only: beta == 1.0,
        ..template.clone()
    }
}

fn point_label(order: usize, q: usize, beta: Option<f64>) -> String {
    match beta {
        Some(b) => format!("(L={order}, Q={q}, beta={b})"),
        None => format!("(L={order}, Q={q})"),
    }
}

fn evaluate(
    estimator: Estimator,
    c: &CovarianceMatrix,
    grids: &BTreeMap<usize, DirectionSet>,
) -> Result<f64> {
    match estimator {
        Estimator::ThieleGover => thiele_gover(c, &grids[&c.order()]),
        Estimator::Dirac => dirac(c),
        Estimator::Comedie => estimator.apply(c),
    }
}

/// Runs every estimator over the `orders × q_values × beta_values` grid.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let templates = packings(&spec.q_values)?;
    let grids: BTreeMap<usize, DirectionSet> = spec
        .orders
        .iter()
        .map(|&l| Ok((l, default_grid(l)?)))
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    for &order in &spec.orders {
        for &q in &spec.q_values {
            for &beta in &spec.beta_values {
                points.push((order, q, beta));
            }
        }
    }
    let repetitions = match spec.covariance_mode {
        CovarianceMode::Analytic => 1,
        CovarianceMode::Empirical => spec.seeds,
    };

    let evaluated: Vec<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|&(order, q, beta)| {
            let config = point_config(&templates[&q], order, beta, spec.correlation, spec.samples);
            let mut per_estimator = vec![Vec::with_capacity(repetitions); spec.estimators.len()];
            for rep in 0..repetitions {
                let c = match spec.covariance_mode {
                    CovarianceMode::Analytic => analytic_covariance(&config)?,
                    CovarianceMode::Empirical => {
                        let seeded = config.clone().with_seed(point_seed(
                            spec.base_seed,
                            order,
                            q,
                            beta,
                            rep,
                        ));
                        estimate_covariance(&synthesize(&seeded)?)
                    }
                };
                for (values, &estimator) in per_estimator.iter_mut().zip(&spec.estimators) {
                    values.push(evaluate(estimator, &c, &grids)?);
                }
            }
            Ok(per_estimator.iter().map(|v| mean_std(v)).collect())
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .zip(&points)
        .map(|(r, &(order, q, beta))| {
            r.map_err(|e| Error::GridPoint {
                point: point_label(order, q, Some(beta)),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(points.len() * spec.estimators.len());
    for (k, &estimator) in spec.estimators.iter().enumerate() {
        for (&(order, q, beta), stats) in points.iter().zip(&evaluated) {
            let (mean, std) = stats[k];
            records.push(SweepRecord {
                metric: Metric::Estimator(estimator),
                order,
                q,
                beta,
                mean,
                std,
            });
        }
    }
    Ok(SweepResult {
        records,
        metadata: SweepMetadata {
            base_seed: spec.base_seed,
            generator: GENERATOR_NAME.to_string(),
            packing: PACKING_SOURCE.to_string(),
            covariance_mode: spec.covariance_mode,
            correlation: spec.correlation,
            samples: spec.samples,
            seeds: spec.seeds,
        },
    })
}

/// Mismatch ξ of empirical covariances of `Q` uncorrelated packed plane waves
/// (β = 0), averaged over `seeds` repetitions.
pub fn run_transition(
    orders: &[usize],
    q_values: &[usize],
    samples: usize,
    seeds: usize,
    base_seed: u64,
) -> Result<SweepResult> {
    check_axes(orders, q_values, samples, seeds)?;
    let templates = packings(q_values)?;
    let points: Vec<(usize, usize)> = orders
        .iter()
        .flat_map(|&l| q_values.iter().map(move |&q| (l, q)))
        .collect();
    let records = points
        .par_iter()
        .map(|&(order, q)| {
            let config = point_config(
                &templates[&q],
                order,
                0.0,
                Correlation::Uncorrelated,
                samples,
            );
            let values = (0..seeds)
                .map(|rep| {
                    let seeded = config
                        .clone()
                        .with_seed(point_seed(base_seed, order, q, 0.0, rep));
                    mismatch_xi(&estimate_covariance(&synthesize(&seeded)?))
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::GridPoint {
                    point: point_label(order, q, None),
                    source: Box::new(e),
                })?;
            let (mean, std) = mean_std(&values);
            Ok(SweepRecord {
                metric: Metric::Mismatch,
                order,
                q,
                beta: 0.0,
                mean,
                std,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        records,
        metadata: SweepMetadata {
            base_seed,
            generator: GENERATOR_NAME.to_string(),
            packing: PACKING_SOURCE.to_string(),
            covariance_mode: CovarianceMode::Empirical,
            correlation: Correlation::Uncorrelated,
            samples,
            seeds,
        },
    })
}
