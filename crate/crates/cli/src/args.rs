use std::path::PathBuf;

use bugtriage_core::classifiers::ClassifierKind;
use bugtriage_core::corpus::tracker::{TOKEN_ENV, URL_ENV};
use bugtriage_core::FeatureMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bugtriage", version, about = "Classify bug reports as bug or non-bug")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedderChoice {
    /// Hashed bag of stemmed tokens
    Fallback,
    /// Transformer sidecar over TCP
    Sidecar,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Stopword list, one word per line
    #[arg(long, global = true, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub embedder: Option<EmbedderChoice>,
    #[arg(long, global = true, value_name = "HOST:PORT")]
    pub sidecar_addr: Option<String>,
    /// Dimension of the fallback embedder [default: 64]
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Output file, or directory for `evaluate` and `ablate`
    #[arg(long, short, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// TOML run configuration; flags override it
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    pub print_config: bool,
}

/// Classifier hyperparameters shared by `train`, `evaluate` and `ablate`.
#[derive(Debug, Default, Args)]
pub struct HyperArgs {
    /// k-NN neighbours
    #[arg(long, help_heading = "Hyperparameters")]
    pub k: Option<usize>,
    /// Naive Bayes variance floor
    #[arg(long, help_heading = "Hyperparameters")]
    pub var_floor: Option<f64>,
    /// Logistic regression step size
    #[arg(long, help_heading = "Hyperparameters")]
    pub lr_step: Option<f64>,
    /// Logistic regression iteration cap
    #[arg(long, help_heading = "Hyperparameters")]
    pub lr_iterations: Option<usize>,
    /// Logistic regression L2 weight
    #[arg(long, help_heading = "Hyperparameters")]
    pub l2: Option<f64>,
    /// Logistic regression decision threshold on P(bug)
    #[arg(long, help_heading = "Hyperparameters")]
    pub threshold: Option<f64>,
    /// SVM soft-margin penalty C
    #[arg(long, help_heading = "Hyperparameters")]
    pub svm_c: Option<f64>,
    #[arg(long, help_heading = "Hyperparameters")]
    pub svm_epochs: Option<usize>,
    /// SVM initial step size
    #[arg(long, help_heading = "Hyperparameters")]
    pub svm_eta0: Option<f64>,
    /// Random forest size
    #[arg(long, help_heading = "Hyperparameters")]
    pub trees: Option<usize>,
    /// Features tried per split [default: ceil(sqrt(width))]
    #[arg(long, help_heading = "Hyperparameters")]
    pub max_features: Option<usize>,
    #[arg(long, help_heading = "Hyperparameters")]
    pub max_depth: Option<usize>,
    #[arg(long, help_heading = "Hyperparameters")]
    pub min_samples_split: Option<usize>,
    /// Grow every tree on the full training set
    #[arg(long, help_heading = "Hyperparameters")]
    pub no_bootstrap: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label counts and the label by intention table
    Stats { dataset: Option<PathBuf> },
    /// Download resolved reports from a Bugzilla-style tracker as an annotation CSV
    Fetch(FetchArgs),
    /// Show the token sequence of a text or of every summary in a CSV
    Preprocess {
        text: Option<String>,
        #[arg(long, value_name = "CSV", conflicts_with = "text")]
        input: Option<PathBuf>,
    },
    /// Write the scaled feature matrix of a dataset as CSV
    Featurize {
        dataset: Option<PathBuf>,
        #[arg(long)]
        mode: Option<FeatureMode>,
    },
    /// Fit a model on a labeled dataset and save it as JSON
    Train {
        dataset: Option<PathBuf>,
        #[arg(long = "model", value_name = "KIND")]
        classifier: Option<ClassifierKind>,
        #[arg(long)]
        mode: Option<FeatureMode>,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Stratified cross-validation of one classifier
    Evaluate {
        dataset: Option<PathBuf>,
        #[arg(long = "model", value_name = "KIND")]
        classifier: Option<ClassifierKind>,
        #[arg(long)]
        mode: Option<FeatureMode>,
        #[arg(long)]
        folds: Option<usize>,
        /// Also write accuracy.svg into the output directory
        #[arg(long)]
        chart: bool,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Cross-validate every classifier under every feature mode
    Ablate {
        datasets: Vec<PathBuf>,
        /// Synthetic corpus spec; one fresh corpus per seed
        #[arg(long, value_name = "SPEC")]
        synth: Vec<PathBuf>,
        /// Number of seeds, counting up from --seed
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        classifiers: Option<Vec<ClassifierKind>>,
        #[arg(long)]
        folds: Option<usize>,
        /// Also write accuracy.svg into the output directory
        #[arg(long)]
        chart: bool,
        #[command(flatten)]
        hyper: HyperArgs,
    },
    /// Classify an unlabeled CSV with a saved model
    Predict {
        #[arg(long, value_name = "MODEL")]
        model: PathBuf,
        input: PathBuf,
    },
    /// Generate a synthetic labeled dataset from a spec file
    Synth { spec: PathBuf },
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Tracker base URL
    #[arg(long, env = URL_ENV)]
    pub url: String,
    /// API key sent as X-BUGZILLA-API-KEY
    #[arg(long, env = TOKEN_ENV, hide_env_values = true)]
    pub token: Option<String>,
    #[arg(long)]
    pub product: Option<String>,
    #[arg(long = "status", default_values_t = ["RESOLVED".to_string(), "VERIFIED".to_string()])]
    pub statuses: Vec<String>,
    #[arg(long = "resolution", default_values_t = ["FIXED".to_string()])]
    pub resolutions: Vec<String>,
    #[arg(long)]
    pub limit: Option<usize>,
}
