//! Binary classifiers behind one fit/predict contract.
//!
//! Every model is fitted from a [`LabeledMatrix`] and a seed, and predicts
//! one [`Label`] per row of a [`FeatureMatrix`] of the same width. Fitted
//! models are immutable and serializable.

mod forest;
mod knn;
mod logistic;
mod naive_bayes;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use forest::{tree_seed, DecisionTree, RfConfig, RfModel, TreeConfig};
pub use knn::{knn_vote, KnnConfig, KnnModel};
pub use logistic::{lr_gradient, lr_loss, LrConfig, LrModel};
pub use naive_bayes::{NbConfig, NbModel};
pub use svm::{SvmConfig, SvmModel};

/// Feature rows with one label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    x: FeatureMatrix,
    y: Vec<Label>,
}

impl LabeledMatrix {
    pub fn new(x: FeatureMatrix, y: Vec<Label>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature rows but {} labels",
                x.len(),
                y.len()
            )));
        }
        Ok(LabeledMatrix { x, y })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, y: Vec<Label>) -> Result<Self> {
        Self::new(FeatureMatrix::from_unnamed(rows), y)
    }

    pub fn x(&self) -> &FeatureMatrix {
        &self.x
    }

    pub fn y(&self) -> &[Label] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x.width()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for l in &self.y {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Training preconditions shared by all models.
    pub(crate) fn check_trainable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.class_counts().contains(&0) {
            return Err(Error::SingleClass);
        }
        check_finite(&self.x)
    }
}

fn check_finite(x: &FeatureMatrix) -> Result<()> {
    match x.find_non_finite() {
        Some((row, col)) => Err(Error::NonFinite { row, col }),
        None => Ok(()),
    }
}

pub(crate) fn check_width(expected: usize, x: &FeatureMatrix) -> Result<()> {
    if x.width() != expected {
        return Err(Error::WidthMismatch {
            expected,
            found: x.width(),
        });
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Nb,
    Lr,
    Svm,
    Rf,
}

impl ClassifierKind {
    /// Column order of the ablation table.
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Knn,
        ClassifierKind::Nb,
        ClassifierKind::Lr,
        ClassifierKind::Svm,
        ClassifierKind::Rf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Nb => "nb",
            ClassifierKind::Lr => "lr",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Rf => "rf",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "K-NN",
            ClassifierKind::Nb => "NB",
            ClassifierKind::Lr => "LR",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Rf => "RF",
        }
    }

    pub fn default_config(self) -> ClassifierConfig {
        match self {
            ClassifierKind::Knn => ClassifierConfig::Knn(KnnConfig::default()),
            ClassifierKind::Nb => ClassifierConfig::Nb(NbConfig::default()),
            ClassifierKind::Lr => ClassifierConfig::Lr(LrConfig::default()),
            ClassifierKind::Svm => ClassifierConfig::Svm(SvmConfig::default()),
            ClassifierKind::Rf => ClassifierConfig::Rf(RfConfig::default()),
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" | "k-nn" => Ok(ClassifierKind::Knn),
            "nb" => Ok(ClassifierKind::Nb),
            "lr" => Ok(ClassifierKind::Lr),
            "svm" => Ok(ClassifierKind::Svm),
            "rf" => Ok(ClassifierKind::Rf),
            other => Err(Error::InvalidArgument(format!(
                "unknown classifier `{other}` (expected knn, nb, lr, svm or rf)"
            ))),
        }
    }
}

/// Hyperparameters of one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Knn(KnnConfig),
    Nb(NbConfig),
    Lr(LrConfig),
    Svm(SvmConfig),
    Rf(RfConfig),
}

impl ClassifierConfig {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::Knn(_) => ClassifierKind::Knn,
            ClassifierConfig::Nb(_) => ClassifierKind::Nb,
            ClassifierConfig::Lr(_) => ClassifierKind::Lr,
            ClassifierConfig::Svm(_) => ClassifierKind::Svm,
            ClassifierConfig::Rf(_) => ClassifierKind::Rf,
        }
    }

    pub fn fit(&self, train: &LabeledMatrix, seed: u64) -> Result<TrainedClassifier> {
        Ok(match self {
            ClassifierConfig::Knn(c) => TrainedClassifier::Knn(KnnModel::fit(c, train)?),
            ClassifierConfig::Nb(c) => TrainedClassifier::Nb(NbModel::fit(c, train)?),
            ClassifierConfig::Lr(c) => TrainedClassifier::Lr(LrModel::fit(c, train)?),
            ClassifierConfig::Svm(c) => TrainedClassifier::Svm(SvmModel::fit(c, train, seed)?),
            ClassifierConfig::Rf(c) => TrainedClassifier::Rf(RfModel::fit(c, train, seed)?),
        })
    }
}

/// Per-row model output beyond the label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Score {
    None,
    /// Logistic probability of `Bug`.
    Probability(f64),
    /// Normalized posteriors indexed by [`Label::index`].
    Posterior([f64; 2]),
    /// Signed distance-like margin `ω·x + b`.
    Margin(f64),
    /// Tree votes indexed by [`Label::index`].
    Votes([usize; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedClassifier {
    Knn(KnnModel),
    Nb(NbModel),
    Lr(LrModel),
    Svm(SvmModel),
    Rf(RfModel),
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedClassifier::Knn(_) => ClassifierKind::Knn,
            TrainedClassifier::Nb(_) => ClassifierKind::Nb,
            TrainedClassifier::Lr(_) => ClassifierKind::Lr,
            TrainedClassifier::Svm(_) => ClassifierKind::Svm,
            TrainedClassifier::Rf(_) => ClassifierKind::Rf,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            TrainedClassifier::Knn(m) => m.width(),
            TrainedClassifier::Nb(m) => m.width(),
            TrainedClassifier::Lr(m) => m.width(),
            TrainedClassifier::Svm(m) => m.width(),
            TrainedClassifier::Rf(m) => m.width(),
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        Ok(self.predict_scored(x)?.into_iter().map(|p| p.label).collect())
    }

    pub fn predict_scored(&self, x: &FeatureMatrix) -> Result<Vec<Prediction>> {
        check_width(self.width(), x)?;
        let predict_row = |row: &[f64]| match self {
            TrainedClassifier::Knn(m) => Prediction {
                label: m.predict_row(row),
                score: Score::None,
            },
            TrainedClassifier::Nb(m) => {
                let post = m.posteriors(row);
                Prediction {
                    label: m.label_for(post),
                    score: Score::Posterior(post),
                }
            }
            TrainedClassifier::Lr(m) => {
                let pi = m.probability(row);
                Prediction {
                    label: m.label_for(pi),
                    score: Score::Probability(pi),
                }
            }
            TrainedClassifier::Svm(m) => {
                let g = m.decision(row);
                Prediction {
                    label: SvmModel::label_for(g),
                    score: Score::Margin(g),
                }
            }
            TrainedClassifier::Rf(m) => {
                let votes = m.votes(row);
                Prediction {
                    label: RfModel::label_for(votes),
                    score: Score::Votes(votes),
                }
            }
        };
        Ok(x.rows().map(predict_row).collect())
    }
}

/// Anything that can be fitted inside cross-validation.
pub trait Learner: Sync {
    fn name(&self) -> String;

    fn fit_predictor(&self, train: &LabeledMatrix, seed: u64) -> Result<Box<dyn Predictor>>;
}

pub trait Predictor: Send + Sync {
    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>>;
}

impl Learner for ClassifierConfig {
    fn name(&self) -> String {
        self.kind().as_str().to_string()
    }

    fn fit_predictor(&self, train: &LabeledMatrix, seed: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(self.fit(train, seed)?))
    }
}

impl Predictor for TrainedClassifier {
    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<Label>> {
        TrainedClassifier::predict(self, x)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two noisy Gaussian blobs, Bug centred at +1 and NonBug at -1.
    pub(crate) fn blobs(n: usize, dim: usize, seed: u64) -> LabeledMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let label = if i % 2 == 0 { Label::Bug } else { Label::NonBug };
            let centre = label.as_sign();
            rows.push((0..dim).map(|_| centre + rng.gen_range(-1.5..1.5)).collect());
            y.push(label);
        }
        LabeledMatrix::from_rows(rows, y).unwrap()
    }

    fn all_configs() -> Vec<ClassifierConfig> {
        ClassifierKind::ALL.iter().map(|k| k.default_config()).collect()
    }

    #[test]
    fn every_model_learns_blobs() {
        let train = blobs(120, 4, 1);
        let test = blobs(60, 4, 2);
        for cfg in all_configs() {
            let model = cfg.fit(&train, 3).unwrap();
            let pred = model.predict(test.x()).unwrap();
            let correct = pred.iter().zip(test.y()).filter(|(p, t)| p == t).count();
            assert!(correct >= 50, "{}: {correct}/60", cfg.kind());
        }
    }

    #[test]
    fn single_class_rejected() {
        let m = LabeledMatrix::from_rows(vec![vec![0.0], vec![1.0]], vec![Label::Bug; 2]).unwrap();
        for cfg in all_configs() {
            assert!(matches!(cfg.fit(&m, 0), Err(Error::SingleClass)), "{}", cfg.kind());
        }
    }

    #[test]
    fn non_finite_rejected() {
        let m = LabeledMatrix::from_rows(vec![vec![0.0], vec![f64::NAN]], vec![Label::Bug, Label::NonBug]).unwrap();
        for cfg in all_configs() {
            assert!(matches!(cfg.fit(&m, 0), Err(Error::NonFinite { row: 1, col: 0 })));
        }
    }

    #[test]
    fn width_mismatch_rejected() {
        let train = blobs(20, 3, 5);
        let wrong = FeatureMatrix::from_unnamed(vec![vec![0.0; 2]]);
        for cfg in all_configs() {
            let model = cfg.fit(&train, 0).unwrap();
            assert!(matches!(
                model.predict(&wrong),
                Err(Error::WidthMismatch { expected: 3, found: 2 })
            ));
        }
    }

    #[test]
    fn fit_is_deterministic_and_serializable() {
        let train = blobs(60, 3, 9);
        for cfg in all_configs() {
            let a = cfg.fit(&train, 11).unwrap();
            let b = cfg.fit(&train, 11).unwrap();
            assert_eq!(a, b);
            let json = serde_json::to_string(&a).unwrap();
            let back: TrainedClassifier = serde_json::from_str(&json).unwrap();
            assert_eq!(back.predict(train.x()).unwrap(), a.predict(train.x()).unwrap());
        }
    }

    #[test]
    fn deterministic_models_ignore_row_order() {
        let train = blobs(50, 3, 4);
        let mut order: Vec<usize> = (0..train.len()).rev().collect();
        order.rotate_left(7);
        let shuffled = LabeledMatrix::new(
            train.x().select_rows(&order),
            order.iter().map(|&i| train.y()[i]).collect(),
        )
        .unwrap();
        let probe = blobs(40, 3, 6);
        for kind in [ClassifierKind::Knn, ClassifierKind::Nb, ClassifierKind::Lr] {
            let cfg = kind.default_config();
            let a = cfg.fit(&train, 0).unwrap().predict(probe.x()).unwrap();
            let b = cfg.fit(&shuffled, 0).unwrap().predict(probe.x()).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn kind_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(k.default_config().kind(), k);
        }
    }
}
