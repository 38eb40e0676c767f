use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::LabeledMatrix;
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbConfig {
    /// Lower bound applied to every fitted variance.
    pub var_floor: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        NbConfig { var_floor: 1e-9 }
    }
}

/// Gaussian naive Bayes. Arrays are indexed by [`Label::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    priors: [f64; 2],
    means: [Vec<f64>; 2],
    vars: [Vec<f64>; 2],
}

impl NbModel {
    pub fn fit(config: &NbConfig, train: &LabeledMatrix) -> Result<Self> {
        train.check_trainable()?;
        let width = train.width();
        let counts = train.class_counts();
        let mut means = [vec![0.0; width], vec![0.0; width]];
        for (row, l) in train.x().rows().zip(train.y()) {
            for (m, x) in means[l.index()].iter_mut().zip(row) {
                *m += x;
            }
        }
        for c in 0..2 {
            means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
        }
        let mut vars = [vec![0.0; width], vec![0.0; width]];
        for (row, l) in train.x().rows().zip(train.y()) {
            let c = l.index();
            for ((v, m), x) in vars[c].iter_mut().zip(&means[c]).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        for c in 0..2 {
            vars[c]
                .iter_mut()
                .for_each(|v| *v = (*v / counts[c] as f64).max(config.var_floor));
        }
        let n = train.len() as f64;
        Ok(NbModel {
            priors: [counts[0] as f64 / n, counts[1] as f64 / n],
            means,
            vars,
        })
    }

    /// Model with hand-set parameters.
    pub fn from_parameters(priors: [f64; 2], means: [Vec<f64>; 2], vars: [Vec<f64>; 2]) -> Result<Self> {
        let width = means[0].len();
        let ok = [&means[1], &vars[0], &vars[1]].iter().all(|v| v.len() == width)
            && vars.iter().flatten().all(|&v| v > 0.0 && v.is_finite())
            && priors.iter().all(|&p| p > 0.0)
            && ((priors[0] + priors[1]) - 1.0).abs() < 1e-12;
        if !ok {
            return Err(Error::InvalidArgument("inconsistent naive Bayes parameters".into()));
        }
        Ok(NbModel { priors, means, vars })
    }

    pub fn width(&self) -> usize {
        self.means[0].len()
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn means(&self, label: Label) -> &[f64] {
        &self.means[label.index()]
    }

    pub fn variances(&self, label: Label) -> &[f64] {
        &self.vars[label.index()]
    }

    fn log_joint(&self, c: usize, row: &[f64]) -> f64 {
        let mut s = self.priors[c].ln();
        for ((x, m), v) in row.iter().zip(&self.means[c]).zip(&self.vars[c]) {
            s -= 0.5 * (2.0 * PI * v).ln() + (x - m) * (x - m) / (2.0 * v);
        }
        s
    }

    /// Normalized class posteriors, computed in log space.
    pub fn posteriors(&self, row: &[f64]) -> [f64; 2] {
        let a = self.log_joint(0, row);
        let b = self.log_joint(1, row);
        let top = a.max(b);
        let (ea, eb) = ((a - top).exp(), (b - top).exp());
        let z = ea + eb;
        [ea / z, eb / z]
    }

    /// Argmax of the posteriors; an exact tie goes to `Bug`.
    pub fn label_for(&self, posteriors: [f64; 2]) -> Label {
        if posteriors[0] >= posteriors[1] {
            Label::Bug
        } else {
            Label::NonBug
        }
    }
}
