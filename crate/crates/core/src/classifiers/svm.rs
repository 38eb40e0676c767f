use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dot, LabeledMatrix};
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    /// Soft-margin penalty; the regularization weight is `λ = 1 / (n C)`.
    pub c: f64,
    pub epochs: usize,
    /// Initial step; step `t` is `eta0 / (1 + λ eta0 t)`.
    pub eta0: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 100.0,
            epochs: 200,
            eta0: 0.1,
        }
    }
}

/// Linear discriminant `g(x) = ω·x + b`, classified by the sign of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    w: Vec<f64>,
    b: f64,
    config: SvmConfig,
}

impl SvmModel {
    /// Stochastic subgradient descent on
    /// `λ/2 ‖ω‖² + 1/n Σ max(0, 1 - y_i (ω·x_i + b))`, one shuffled pass per
    /// epoch. The bias is not regularized.
    pub fn fit(config: &SvmConfig, train: &LabeledMatrix, seed: u64) -> Result<Self> {
        train.check_trainable()?;
        if !(config.c > 0.0 && config.eta0 > 0.0) {
            return Err(Error::InvalidArgument("SVM needs positive C and step".into()));
        }
        let lambda = 1.0 / (train.len() as f64 * config.c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut w = vec![0.0; train.width()];
        let mut b = 0.0;
        let mut t = 0u64;
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let eta = config.eta0 / (1.0 + lambda * config.eta0 * t as f64);
                t += 1;
                let row = train.x().row(i);
                let y = train.y()[i].as_sign();
                let violated = y * (dot(&w, row) + b) < 1.0;
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|wj| *wj *= shrink);
                if violated {
                    for (wj, x) in w.iter_mut().zip(row) {
                        *wj += eta * y * x;
                    }
                    b += eta * y;
                }
            }
        }
        Ok(SvmModel {
            w,
            b,
            config: config.clone(),
        })
    }

    pub fn width(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn bias(&self) -> f64 {
        self.b
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.w, row) + self.b
    }

    /// Functional margin `y (ω·x + b)`.
    pub fn margin(&self, row: &[f64], label: Label) -> f64 {
        label.as_sign() * self.decision(row)
    }

    /// `Bug` when `g(x) ≥ 0`.
    pub fn label_for(g: f64) -> Label {
        if g >= 0.0 {
            Label::Bug
        } else {
            Label::NonBug
        }
    }
}
