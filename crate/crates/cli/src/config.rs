//! Resolved run configuration: a TOML file overlaid with command-line flags.

use std::path::{Path, PathBuf};

use bugtriage_core::classifiers::{
    ClassifierConfig, ClassifierKind, KnnConfig, LrConfig, NbConfig, RfConfig, SvmConfig,
};
use bugtriage_core::features::{EmbedderSpec, DEFAULT_HASHING_DIM};
use bugtriage_core::FeatureMode;
use serde::{Deserialize, Serialize};

use crate::args::{EmbedderChoice, GlobalArgs, HyperArgs};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    pub datasets: Vec<PathBuf>,
    /// Synthetic corpus specs for `ablate`.
    pub synth: Vec<PathBuf>,
    pub mode: FeatureMode,
    /// Classifier for `train` and `evaluate`.
    pub classifier: ClassifierKind,
    /// Classifiers for `ablate`.
    pub classifiers: Vec<ClassifierKind>,
    pub folds: usize,
    /// Number of seeds for `ablate`: `seed, seed + 1, ...`.
    pub seeds: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub chart: bool,
    // Tables last: TOML cannot put plain values after them.
    pub embedder: EmbedderSpec,
    pub knn: KnnConfig,
    pub nb: NbConfig,
    pub lr: LrConfig,
    pub svm: SvmConfig,
    pub rf: RfConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            jobs: None,
            stopwords: None,
            datasets: Vec::new(),
            synth: Vec::new(),
            mode: FeatureMode::TextFreqIntention,
            classifier: ClassifierKind::Rf,
            classifiers: ClassifierKind::ALL.to_vec(),
            folds: 10,
            seeds: 10,
            out: None,
            chart: false,
            embedder: EmbedderSpec::default(),
            knn: KnnConfig::default(),
            nb: NbConfig::default(),
            lr: LrConfig::default(),
            svm: SvmConfig::default(),
            rf: RfConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file. Also reports whether it set `seed` explicitly.
    pub fn load(path: &Path) -> Result<(Self, bool), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let has_seed = table.contains_key("seed");
        let config = RunConfig::deserialize(table).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok((config, has_seed))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn apply_global(&mut self, g: &GlobalArgs) -> Result<(), CliError> {
        if let Some(seed) = g.seed {
            self.seed = seed;
        }
        if let Some(jobs) = g.jobs {
            self.jobs = Some(jobs);
        }
        if let Some(path) = &g.stopwords {
            self.stopwords = Some(path.clone());
        }
        if let Some(out) = &g.out {
            self.out = Some(out.clone());
        }

        let current_addr = match &self.embedder {
            EmbedderSpec::Sidecar { addr } => Some(addr.clone()),
            EmbedderSpec::Fallback { .. } => None,
        };
        let choice = g.embedder.or_else(|| {
            if g.sidecar_addr.is_some() {
                Some(EmbedderChoice::Sidecar)
            } else if g.dim.is_some() {
                Some(EmbedderChoice::Fallback)
            } else {
                None
            }
        });
        match choice {
            None => {}
            Some(EmbedderChoice::Fallback) => {
                if g.sidecar_addr.is_some() {
                    return Err(CliError::Usage("--sidecar-addr needs --embedder sidecar".into()));
                }
                let dim = match (&self.embedder, g.dim) {
                    (_, Some(d)) => d,
                    (EmbedderSpec::Fallback { dim }, None) => *dim,
                    _ => DEFAULT_HASHING_DIM,
                };
                self.embedder = EmbedderSpec::Fallback { dim };
            }
            Some(EmbedderChoice::Sidecar) => {
                if g.dim.is_some() {
                    return Err(CliError::Usage("--dim applies to the fallback embedder only".into()));
                }
                let addr = g
                    .sidecar_addr
                    .clone()
                    .or(current_addr)
                    .ok_or_else(|| CliError::Usage("--embedder sidecar needs --sidecar-addr host:port".into()))?;
                self.embedder = EmbedderSpec::Sidecar { addr };
            }
        }
        Ok(())
    }

    pub fn apply_hyper(&mut self, h: &HyperArgs) {
        if let Some(k) = h.k {
            self.knn.k = k;
        }
        if let Some(v) = h.var_floor {
            self.nb.var_floor = v;
        }
        if let Some(v) = h.lr_step {
            self.lr.step = v;
        }
        if let Some(v) = h.lr_iterations {
            self.lr.max_iter = v;
        }
        if let Some(v) = h.l2 {
            self.lr.l2 = v;
        }
        if let Some(v) = h.threshold {
            self.lr.threshold = v;
        }
        if let Some(v) = h.svm_c {
            self.svm.c = v;
        }
        if let Some(v) = h.svm_epochs {
            self.svm.epochs = v;
        }
        if let Some(v) = h.svm_eta0 {
            self.svm.eta0 = v;
        }
        if let Some(v) = h.trees {
            self.rf.trees = v;
        }
        if let Some(v) = h.max_features {
            self.rf.max_features = Some(v);
        }
        if let Some(v) = h.max_depth {
            self.rf.max_depth = v;
        }
        if let Some(v) = h.min_samples_split {
            self.rf.min_samples_split = v;
        }
        if h.no_bootstrap {
            self.rf.bootstrap = false;
        }
    }

    pub fn classifier_config(&self, kind: ClassifierKind) -> ClassifierConfig {
        match kind {
            ClassifierKind::Knn => ClassifierConfig::Knn(self.knn.clone()),
            ClassifierKind::Nb => ClassifierConfig::Nb(self.nb.clone()),
            ClassifierKind::Lr => ClassifierConfig::Lr(self.lr.clone()),
            ClassifierKind::Svm => ClassifierConfig::Svm(self.svm.clone()),
            ClassifierKind::Rf => ClassifierConfig::Rf(self.rf.clone()),
        }
    }

    /// Seeds used by `ablate`.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }

    /// Every input file named by the config must exist.
    pub fn check_files(&self) -> Result<(), CliError> {
        let files = self.datasets.iter().chain(&self.synth).chain(self.stopwords.iter());
        for path in files {
            require_file(path)?;
        }
        Ok(())
    }
}

pub fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{}: no such file", path.display())))
    }
}
