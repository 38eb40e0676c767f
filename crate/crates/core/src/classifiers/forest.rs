use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LabeledMatrix;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Non-constant features examined per split; `None` examines all.
    pub max_features: Option<usize>,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_features: None,
            max_depth: 32,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        label: Label,
        counts: [usize; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Axis-aligned CART tree grown on Gini impurity. `x ≤ threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    width: usize,
    nodes: Vec<Node>,
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[0] as f64 / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

/// Majority label; a tie goes to `Bug`.
fn majority(counts: [usize; 2]) -> Label {
    if counts[0] >= counts[1] {
        Label::Bug
    } else {
        Label::NonBug
    }
}

struct SplitCandidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl SplitCandidate {
    fn beats(&self, other: &SplitCandidate) -> bool {
        self.impurity < other.impurity || (self.impurity == other.impurity && self.feature < other.feature)
    }
}

struct Grower<'a, R> {
    train: &'a LabeledMatrix,
    config: &'a TreeConfig,
    max_features: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Grower<'_, R> {
    fn counts(&self, samples: &[usize]) -> [usize; 2] {
        let mut c = [0; 2];
        for &i in samples {
            c[self.train.y()[i].index()] += 1;
        }
        c
    }

    /// Best threshold on one feature, or `None` if it is constant here.
    fn best_on_feature(&self, samples: &[usize], feature: usize, total: [usize; 2]) -> Option<SplitCandidate> {
        let mut pairs: Vec<(f64, usize)> = samples
            .iter()
            .map(|&i| (self.train.x().row(i)[feature], self.train.y()[i].index()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs[0].0 == pairs[pairs.len() - 1].0 {
            return None;
        }
        let n = pairs.len() as f64;
        let mut left = [0usize; 2];
        let mut best: Option<SplitCandidate> = None;
        for k in 0..pairs.len() - 1 {
            left[pairs[k].1] += 1;
            let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
            if lo == hi {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (k + 1) as f64;
            let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
            if !matches!(&best, Some(b) if impurity >= b.impurity) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(SplitCandidate {
                    impurity,
                    feature,
                    threshold,
                });
            }
        }
        best
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&samples);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            label: majority(counts),
            counts,
        });
        if counts[0] == 0
            || counts[1] == 0
            || depth >= self.config.max_depth
            || samples.len() < self.config.min_samples_split.max(2)
        {
            return id;
        }

        // Visit features in random order until enough non-constant ones
        // have been evaluated.
        let width = self.train.width();
        let mut features: Vec<usize> = (0..width).collect();
        let mut evaluated = 0;
        let mut best: Option<SplitCandidate> = None;
        for j in 0..width {
            if evaluated == self.max_features {
                break;
            }
            let pick = self.rng.gen_range(j..width);
            features.swap(j, pick);
            if let Some(c) = self.best_on_feature(&samples, features[j], counts) {
                evaluated += 1;
                if !matches!(&best, Some(b) if !c.beats(b)) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            return id;
        };

        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| self.train.x().row(i)[split.feature] <= split.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }
}

impl DecisionTree {
    /// Grows a tree on every training row.
    pub fn fit(train: &LabeledMatrix, config: &TreeConfig, seed: u64) -> Result<Self> {
        train.check_trainable()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::grow(train, (0..train.len()).collect(), config, &mut rng))
    }

    fn grow<R: Rng>(train: &LabeledMatrix, samples: Vec<usize>, config: &TreeConfig, rng: &mut R) -> Self {
        let width = train.width();
        let mut grower = Grower {
            train,
            config,
            max_features: config.max_features.unwrap_or(width).clamp(1, width.max(1)),
            rng,
            nodes: Vec::new(),
        };
        grower.grow(samples, 0);
        DecisionTree {
            width,
            nodes: grower.nodes,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_row(&self, row: &[f64]) -> Label {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { label, .. } => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfConfig {
    pub trees: usize,
    /// Features per split; `None` means `⌈√M⌉`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            trees: 100,
            max_features: None,
            bootstrap: true,
            max_depth: 32,
            min_samples_split: 2,
        }
    }
}

/// Seed of tree `i` in a forest fitted with `seed`.
pub fn tree_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, i as u64)
}

/// Bagged decision trees combined by simple majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    width: usize,
    trees: Vec<DecisionTree>,
}

impl RfModel {
    /// Tree `i` draws its bootstrap sample and split features from one
    /// generator seeded with [`tree_seed`]. Trees are grown in parallel and
    /// kept in index order.
    pub fn fit(config: &RfConfig, train: &LabeledMatrix, seed: u64) -> Result<Self> {
        train.check_trainable()?;
        if config.trees == 0 {
            return Err(Error::InvalidArgument("forest needs at least one tree".into()));
        }
        let width = train.width();
        let tree_config = TreeConfig {
            max_features: Some(
                config
                    .max_features
                    .unwrap_or_else(|| (width as f64).sqrt().ceil() as usize),
            ),
            max_depth: config.max_depth,
            min_samples_split: config.min_samples_split,
        };
        let n = train.len();
        let trees = (0..config.trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, i));
                let samples = if config.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::grow(train, samples, &tree_config, &mut rng)
            })
            .collect();
        Ok(RfModel { width, trees })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Per-tree predictions for one row, in tree order.
    pub fn tree_predictions(&self, row: &[f64]) -> Vec<Label> {
        self.trees.iter().map(|t| t.predict_row(row)).collect()
    }

    /// Vote counts indexed by [`Label::index`].
    pub fn votes(&self, row: &[f64]) -> [usize; 2] {
        let mut v = [0; 2];
        for t in &self.trees {
            v[t.predict_row(row).index()] += 1;
        }
        v
    }

    /// Majority of the votes; a tie goes to `Bug`.
    pub fn label_for(votes: [usize; 2]) -> Label {
        majority(votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::tests::blobs;
    use Label::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini([5, 0]), 0.0);
        assert_eq!(gini([2, 2]), 0.5);
        assert!((gini([1, 3]) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn tree_fits_training_data_exactly() {
        let train = blobs(80, 3, 4);
        let tree = DecisionTree::fit(&train, &TreeConfig::default(), 0).unwrap();
        for (row, &l) in train.x().rows().zip(train.y()) {
            assert_eq!(tree.predict_row(row), l);
        }
    }

    #[test]
    fn threshold_splits_midway() {
        let train = LabeledMatrix::from_rows(vec![vec![1.0], vec![3.0]], vec![NonBug, Bug]).unwrap();
        let tree = DecisionTree::fit(&train, &TreeConfig::default(), 0).unwrap();
        assert_eq!(tree.predict_row(&[1.99]), NonBug);
        assert_eq!(tree.predict_row(&[2.01]), Bug);
        assert_eq!(tree.node_count(), 3);
    }

    #[test]
    fn depth_limit_respected() {
        let train = blobs(100, 4, 2);
        let cfg = TreeConfig {
            max_depth: 2,
            ..TreeConfig::default()
        };
        assert!(DecisionTree::fit(&train, &cfg, 0).unwrap().depth() <= 2);
    }

    #[test]
    fn conflicting_duplicates_become_a_leaf() {
        let train = LabeledMatrix::from_rows(vec![vec![1.0], vec![1.0], vec![1.0]], vec![Bug, NonBug, NonBug]).unwrap();
        let tree = DecisionTree::fit(&train, &TreeConfig::default(), 0).unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict_row(&[1.0]), NonBug);
    }

    #[test]
    fn degenerate_forest_is_the_tree() {
        let train = blobs(60, 5, 3);
        let cfg = RfConfig {
            trees: 1,
            max_features: Some(5),
            bootstrap: false,
            ..RfConfig::default()
        };
        let forest = RfModel::fit(&cfg, &train, 17).unwrap();
        let tree = DecisionTree::fit(&train, &TreeConfig::default(), tree_seed(17, 0)).unwrap();
        assert_eq!(forest.trees()[0], tree);
    }

    #[test]
    fn prediction_is_mode_of_tree_votes() {
        let train = blobs(60, 4, 1);
        let forest = RfModel::fit(
            &RfConfig {
                trees: 15,
                ..RfConfig::default()
            },
            &train,
            2,
        )
        .unwrap();
        for row in blobs(30, 4, 9).x().rows() {
            let per_tree = forest.tree_predictions(row);
            let bugs = per_tree.iter().filter(|&&l| l == Bug).count();
            let expected = if 2 * bugs >= per_tree.len() { Bug } else { NonBug };
            assert_eq!(RfModel::label_for(forest.votes(row)), expected);
        }
    }

    #[test]
    fn forest_bit_identical_per_seed() {
        let train = blobs(50, 6, 5);
        let cfg = RfConfig {
            trees: 20,
            ..RfConfig::default()
        };
        let a = RfModel::fit(&cfg, &train, 99).unwrap();
        let b = RfModel::fit(&cfg, &train, 99).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_ne!(a, RfModel::fit(&cfg, &train, 100).unwrap());
    }
}
