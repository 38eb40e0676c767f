use serde::{Deserialize, Serialize};

use super::LabeledMatrix;
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

/// Stored training rows searched exhaustively with Euclidean distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    width: usize,
    rows: Vec<f64>,
    labels: Vec<Label>,
}

/// Majority label of neighbors given nearest first. On a tie the class of
/// the nearest neighbor wins.
pub fn knn_vote(neighbors: &[Label]) -> Label {
    let mut counts = [0usize; 2];
    for l in neighbors {
        counts[l.index()] += 1;
    }
    match counts[0].cmp(&counts[1]) {
        std::cmp::Ordering::Greater => Label::Bug,
        std::cmp::Ordering::Less => Label::NonBug,
        std::cmp::Ordering::Equal => neighbors[0],
    }
}

impl KnnModel {
    pub fn fit(config: &KnnConfig, train: &LabeledMatrix) -> Result<Self> {
        train.check_trainable()?;
        if config.k == 0 || config.k > train.len() {
            return Err(Error::InvalidArgument(format!(
                "k = {} must be between 1 and the training size {}",
                config.k,
                train.len()
            )));
        }
        Ok(KnnModel {
            k: config.k,
            width: train.width(),
            rows: train.x().values().to_vec(),
            labels: train.y().to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn training_len(&self) -> usize {
        self.labels.len()
    }

    /// Training row `i` as stored.
    pub fn training_row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }

    /// Indices of the `k` nearest training rows, nearest first; equal
    /// distances are ordered by training index.
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut dist: Vec<(f64, usize)> = (0..self.labels.len())
            .map(|i| {
                let d = self
                    .training_row(i)
                    .iter()
                    .zip(query)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d, i)
            })
            .collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_key);
            dist.truncate(self.k);
        }
        dist.sort_unstable_by(by_key);
        dist.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_row(&self, query: &[f64]) -> Label {
        let labels: Vec<Label> = self.neighbors(query).into_iter().map(|i| self.labels[i]).collect();
        knn_vote(&labels)
    }
}
