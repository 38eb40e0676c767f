use serde::{Deserialize, Serialize};

use super::{dot, LabeledMatrix};
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrConfig {
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    /// L2 weight on the non-bias coefficients.
    pub l2: f64,
    pub threshold: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            step: 0.1,
            max_iter: 5000,
            tol: 1e-6,
            l2: 1e-4,
            threshold: 0.5,
        }
    }
}

/// Coefficients `Y_0` (bias) through `Y_n` of `π = 1 / (1 + e^-(Y_0 + Σ Y_i X_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    coeffs: Vec<f64>,
    threshold: f64,
    iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear(coeffs: &[f64], row: &[f64]) -> f64 {
    coeffs[0] + dot(&coeffs[1..], row)
}

/// Mean negative log-likelihood plus `l2 / 2 · Σ_{i≥1} Y_i²`.
pub fn lr_loss(coeffs: &[f64], batch: &LabeledMatrix, l2: f64) -> f64 {
    let mut nll = 0.0;
    for (row, l) in batch.x().rows().zip(batch.y()) {
        let z = linear(coeffs, row);
        nll += softplus(z) - l.as_indicator() * z;
    }
    if !batch.is_empty() {
        nll /= batch.len() as f64;
    }
    nll + 0.5 * l2 * coeffs[1..].iter().map(|c| c * c).sum::<f64>()
}

/// Gradient of [`lr_loss`] with respect to the coefficients.
pub fn lr_gradient(coeffs: &[f64], batch: &LabeledMatrix, l2: f64) -> Vec<f64> {
    let mut g = vec![0.0; coeffs.len()];
    for (row, l) in batch.x().rows().zip(batch.y()) {
        let r = sigmoid(linear(coeffs, row)) - l.as_indicator();
        g[0] += r;
        for (gi, x) in g[1..].iter_mut().zip(row) {
            *gi += r * x;
        }
    }
    if !batch.is_empty() {
        let n = batch.len() as f64;
        g.iter_mut().for_each(|gi| *gi /= n);
    }
    for (gi, c) in g[1..].iter_mut().zip(&coeffs[1..]) {
        *gi += l2 * c;
    }
    g
}

impl LrModel {
    /// Full-batch gradient descent from zero coefficients.
    pub fn fit(config: &LrConfig, train: &LabeledMatrix) -> Result<Self> {
        train.check_trainable()?;
        if !(config.threshold > 0.0 && config.threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold {} outside (0, 1)",
                config.threshold
            )));
        }
        let mut coeffs = vec![0.0; train.width() + 1];
        let mut iterations = 0;
        while iterations < config.max_iter {
            let g = lr_gradient(&coeffs, train, config.l2);
            if g.iter().map(|x| x * x).sum::<f64>().sqrt() < config.tol {
                break;
            }
            for (c, gi) in coeffs.iter_mut().zip(&g) {
                *c -= config.step * gi;
            }
            iterations += 1;
        }
        Ok(LrModel {
            coeffs,
            threshold: config.threshold,
            iterations,
        })
    }

    pub fn from_coefficients(coeffs: Vec<f64>, threshold: f64) -> Self {
        assert!(!coeffs.is_empty());
        LrModel {
            coeffs,
            threshold,
            iterations: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(linear(&self.coeffs, row))
    }

    /// `Bug` when `π ≥ threshold`.
    pub fn label_for(&self, pi: f64) -> Label {
        if pi >= self.threshold {
            Label::Bug
        } else {
            Label::NonBug
        }
    }
}
