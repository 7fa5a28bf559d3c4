//! SH signal covariance matrices, their eigenvalue spectra and the
//! diffuse-field mismatch measure.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::field_sim::ShSignalBlock;
use crate::linalg;
use crate::sh_math::{acn_to_lm, channel_count};

/// Symmetric `(L+1)² × (L+1)²` covariance of order-`L` SH signals, ACN ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    order: usize,
    data: Vec<f64>,
}

impl CovarianceMatrix {
    /// Wraps a row-major matrix; rejects wrong sizes, non-finite entries and
    /// asymmetry beyond `1e-12·max|C|`.
    pub fn new(order: usize, data: Vec<f64>) -> Result<Self> {
        linalg::check_symmetric(&data, channel_count(order))?;
        Ok(Self { order, data })
    }

    pub(crate) fn from_parts(order: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), channel_count(order).pow(2));
        Self { order, data }
    }

    pub fn identity(order: usize) -> Self {
        Self::scaled_identity(order, 1.0)
    }

    pub fn scaled_identity(order: usize, level: f64) -> Self {
        let n = channel_count(order);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = level;
        }
        Self { order, data }
    }

    pub fn zeros(order: usize) -> Self {
        Self::scaled_identity(order, 0.0)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Matrix dimension `(L+1)²`.
    pub fn dim(&self) -> usize {
        channel_count(self.order)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim() + col]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Quadratic form `xᵀ C x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut total = 0.0;
        for (i, row) in self.data.chunks_exact(n).enumerate() {
            let r: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            total += x[i] * r;
        }
        total
    }

    /// Writes the matrix as CSV with a header row of `l:m` ACN labels.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let labels: Vec<String> = (0..n)
            .map(|i| {
                let (l, m) = acn_to_lm(i);
                format!("{l}:{m}")
            })
            .collect();
        let mut s = labels.join(",");
        s.push('\n');
        for row in self.data.chunks_exact(n) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }
}

/// Sample covariance `(1/T)·B·Bᵀ` of an SH signal block. No mean is removed:
/// the signal model is zero-mean.
pub fn estimate_covariance(block: &ShSignalBlock) -> CovarianceMatrix {
    let n = block.channels();
    let t = block.samples();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let a = block.channel(i);
        for j in i..n {
            let b = block.channel(j);
            let v = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / t as f64;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    CovarianceMatrix::from_parts(block.order(), data)
}

/// Eigenvalues of a covariance matrix in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    order: usize,
    values: Vec<f64>,
}

impl EigenSpectrum {
    /// Builds a spectrum from raw values; they are sorted decreasingly and
    /// their count must be `(L+1)²` for some `L`.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        let order = crate::sh_math::order_for_channels(values.len()).ok_or_else(|| {
            Error::InvalidInput(format!(
                "{} eigenvalues is not a square channel count",
                values.len()
            ))
        })?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { order, values })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    /// Values with roundoff negatives (`|λ| < 1e-12·trace`) replaced by zero.
    /// Larger negative values are left untouched.
    pub fn clamped(&self) -> Vec<f64> {
        let floor = 1e-12 * self.sum().abs();
        self.values
            .iter()
            .map(|&v| if v < 0.0 && -v < floor { 0.0 } else { v })
            .collect()
    }
}

/// Eigenvalue spectrum of `c`, computed with the cyclic Jacobi solver.
pub fn eigenvalues(c: &CovarianceMatrix) -> Result<EigenSpectrum> {
    let eig = linalg::symmetric_eigen(&c.data, c.dim())?;
    Ok(EigenSpectrum {
        order: c.order,
        values: eig.values,
    })
}

/// Leading `(l+1)²` principal submatrix: the covariance of the order-`l` signals.
pub fn truncate(c: &CovarianceMatrix, order: usize) -> Result<CovarianceMatrix> {
    if order > c.order {
        return Err(Error::Domain(format!(
            "cannot truncate an order-{} covariance to order {order}",
            c.order
        )));
    }
    let n = c.dim();
    let k = channel_count(order);
    let mut data = Vec::with_capacity(k * k);
    for row in c.data.chunks_exact(n).take(k) {
        data.extend_from_slice(&row[..k]);
    }
    Ok(CovarianceMatrix { order, data })
}

/// Diffuse-field mismatch `ξ = ‖C/‖C‖₂ − I‖_F² / (L+1)²`, where `‖C‖₂` is the
/// largest eigenvalue.
pub fn mismatch_xi(c: &CovarianceMatrix) -> Result<f64> {
    if c.max_abs() == 0.0 {
        return Err(Error::Domain(
            "mismatch of a zero matrix is undefined".into(),
        ));
    }
    let spectral = eigenvalues(c)?.largest();
    if spectral <= 0.0 {
        return Err(Error::Domain(format!(
            "largest eigenvalue {spectral:e} is not positive"
        )));
    }
    let n = c.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let reference = if i == j { 1.0 } else { 0.0 };
            let d = c.get(i, j) / spectral - reference;
            total += d * d;
        }
    }
    Ok(total / n as f64)
}
