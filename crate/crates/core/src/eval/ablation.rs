use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvResult, PreparedDataset};
use super::metrics::Metrics;
use crate::classifiers::{ClassifierConfig, ClassifierKind};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::features::{Embedder, FeatureMode};
use crate::preprocess::Preprocessor;
use crate::seed::derive_seed;

use super::synth::{generate_synthetic, SynthSpec};

/// One dataset of the grid. A single replica is reused for every seed;
/// otherwise replica `i` is evaluated with seed `i`.
#[derive(Debug, Clone)]
pub struct AblationInput {
    pub name: String,
    pub replicas: Vec<PreparedDataset>,
}

impl AblationInput {
    /// A fixed dataset evaluated under every seed.
    pub fn fixed(
        name: impl Into<String>,
        ds: Dataset,
        preprocessor: &Preprocessor,
        embedder: &dyn Embedder,
    ) -> Result<Self> {
        let name = name.into();
        let replica = PreparedDataset::new(name.clone(), ds, preprocessor, embedder)?;
        Ok(AblationInput {
            name,
            replicas: vec![replica],
        })
    }

    /// One generated corpus per seed; seed `s` uses generator seed
    /// `derive_seed(spec.seed, s)`.
    pub fn synthetic(
        spec: &SynthSpec,
        seeds: &[u64],
        preprocessor: &Preprocessor,
        embedder: &dyn Embedder,
    ) -> Result<Self> {
        let replicas = seeds
            .iter()
            .map(|&s| {
                let ds = generate_synthetic(&spec.with_seed(derive_seed(spec.seed, s)))?;
                PreparedDataset::new(spec.name.clone(), ds, preprocessor, embedder)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AblationInput {
            name: spec.name.clone(),
            replicas,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub modes: Vec<FeatureMode>,
    pub classifiers: Vec<ClassifierConfig>,
    pub seeds: Vec<u64>,
    pub k: usize,
}

impl AblationConfig {
    /// All modes and classifiers with default hyperparameters.
    pub fn full(seeds: Vec<u64>, k: usize) -> Self {
        AblationConfig {
            modes: FeatureMode::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.iter().map(|c| c.default_config()).collect(),
            seeds,
            k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub dataset: String,
    pub mode: FeatureMode,
    pub classifier: ClassifierKind,
    /// Mean over seeds of the fold-averaged metrics.
    pub mean: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub datasets: Vec<String>,
    pub modes: Vec<FeatureMode>,
    pub classifiers: Vec<ClassifierKind>,
    /// Cells in (dataset, mode, classifier) order.
    pub cells: Vec<AblationCell>,
    /// Every cross-validation run in (dataset, mode, classifier, seed) order.
    pub runs: Vec<CvResult>,
}

impl AblationTable {
    pub fn cell(&self, dataset: &str, mode: FeatureMode, classifier: ClassifierKind) -> Option<&AblationCell> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.mode == mode && c.classifier == classifier)
    }

    pub fn accuracy(&self, dataset: &str, mode: FeatureMode, classifier: ClassifierKind) -> Option<f64> {
        self.cell(dataset, mode, classifier).map(|c| c.mean.accuracy)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn run_ablation(inputs: &[AblationInput], config: &AblationConfig) -> Result<AblationTable> {
    if config.seeds.is_empty() {
        return Err(Error::InvalidArgument("ablation needs at least one seed".into()));
    }
    for input in inputs {
        let r = input.replicas.len();
        if r != 1 && r != config.seeds.len() {
            return Err(Error::InvalidArgument(format!(
                "dataset {} has {r} replicas for {} seeds",
                input.name,
                config.seeds.len()
            )));
        }
    }

    let mut jobs = Vec::new();
    for (d, input) in inputs.iter().enumerate() {
        for &mode in &config.modes {
            for clf in &config.classifiers {
                for (s, &seed) in config.seeds.iter().enumerate() {
                    let replica = &input.replicas[if input.replicas.len() == 1 { 0 } else { s }];
                    jobs.push((d, mode, clf, seed, replica));
                }
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|&(d, mode, clf, seed, replica)| {
            let mut r = cross_validate(replica, mode, clf, config.k, seed)?;
            r.dataset = inputs[d].name.clone();
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = runs
        .chunks(config.seeds.len())
        .map(|chunk| {
            let means: Vec<Metrics> = chunk.iter().map(|r| r.mean).collect();
            AblationCell {
                dataset: chunk[0].dataset.clone(),
                mode: chunk[0].mode,
                classifier: chunk[0].classifier.parse().expect("configured classifier"),
                mean: Metrics::mean(&means),
            }
        })
        .collect();
    Ok(AblationTable {
        datasets: inputs.iter().map(|i| i.name.clone()).collect(),
        modes: config.modes.clone(),
        classifiers: config.classifiers.iter().map(|c| c.kind()).collect(),
        cells,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::synth::tests::apache_like;
    use crate::features::HashingEmbedder;

    fn input(seeds: &[u64]) -> AblationInput {
        AblationInput::synthetic(
            &apache_like(),
            seeds,
            &Preprocessor::default(),
            &HashingEmbedder::new(16).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_classifier_gives_three_rows() {
        let cfg = AblationConfig {
            modes: FeatureMode::ALL.to_vec(),
            classifiers: vec![ClassifierKind::Nb.default_config()],
            seeds: vec![1, 2],
            k: 5,
        };
        let t = run_ablation(&[input(&[1, 2])], &cfg).unwrap();
        assert_eq!(t.cells.len(), 3);
        assert_eq!(t.runs.len(), 6);
        for mode in FeatureMode::ALL {
            let acc = t.accuracy("apache", mode, ClassifierKind::Nb).unwrap();
            assert!((0.0..=1.0).contains(&acc));
        }
        assert_eq!(t.runs[0].dataset, "apache");
    }

    #[test]
    fn replica_count_must_match() {
        let cfg = AblationConfig {
            modes: vec![FeatureMode::Text],
            classifiers: vec![ClassifierKind::Nb.default_config()],
            seeds: vec![1, 2, 3],
            k: 5,
        };
        assert!(run_ablation(&[input(&[1, 2])], &cfg).is_err());
    }
}
