use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics, ConfusionMatrix, Metrics};
use crate::classifiers::{LabeledMatrix, Learner};
use crate::corpus::{stratified_kfold, Dataset};
use crate::error::{Error, Result};
use crate::features::{
    apply_minmax, build_features, embed_reports, fit_minmax, fit_tfidf, Embedder, EmbeddingVector, FeatureMatrix,
    FeatureMode, MinMaxParams, TfidfModel,
};
use crate::preprocess::Preprocessor;
use crate::seed::derive_seed;

/// A dataset with its summary embeddings computed once. Embeddings depend
/// on each summary alone, so they are shared across folds.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub name: String,
    pub dataset: Dataset,
    pub embeddings: Vec<EmbeddingVector>,
    pub embedder: String,
}

impl PreparedDataset {
    pub fn new(
        name: impl Into<String>,
        dataset: Dataset,
        preprocessor: &Preprocessor,
        embedder: &dyn Embedder,
    ) -> Result<Self> {
        let embeddings = embed_reports(&dataset.reports, preprocessor, embedder)?;
        Ok(PreparedDataset {
            name: name.into(),
            dataset,
            embeddings,
            embedder: embedder.identity(),
        })
    }

    fn embeddings_of(&self, indices: &[usize]) -> Vec<EmbeddingVector> {
        indices.iter().map(|&i| self.embeddings[i].clone()).collect()
    }
}

/// Everything fitted on one training split.
#[derive(Debug, Clone)]
pub struct FittedFeatures {
    pub tfidf: TfidfModel,
    pub minmax: MinMaxParams,
    pub train: FeatureMatrix,
}

/// Fits TF-IDF and min-max on `train` and returns the scaled training matrix.
pub fn fit_features(train: &Dataset, embeddings: &[EmbeddingVector], mode: FeatureMode) -> Result<FittedFeatures> {
    let tfidf = fit_tfidf(&train.reports, mode.fields())?;
    let raw = build_features(&train.reports, mode, &tfidf, embeddings)?;
    let minmax = fit_minmax(&raw);
    let train = apply_minmax(&minmax, &raw);
    Ok(FittedFeatures { tfidf, minmax, train })
}

/// Which artifact a fit call produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitStage {
    Tfidf,
    MinMax,
    Classifier,
    /// Not a fit: the rows scored with the fold's fitted artifacts.
    Evaluate,
}

/// Receives the row ids behind every fit inside cross-validation.
pub trait FitObserver: Sync {
    fn observe(&self, fold: usize, stage: FitStage, ids: &[String]);
}

struct NoObserver;

impl FitObserver for NoObserver {
    fn observe(&self, _: usize, _: FitStage, _: &[String]) {}
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub dataset: String,
    pub mode: FeatureMode,
    pub classifier: String,
    pub embedder: String,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub mean: Metrics,
}

pub fn cross_validate(
    data: &PreparedDataset,
    mode: FeatureMode,
    learner: &dyn Learner,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    cross_validate_observed(data, mode, learner, k, seed, &NoObserver)
}

/// Stratified k-fold cross-validation. Each fold refits TF-IDF, min-max and
/// the classifier on its training rows only; fold `j` fits its classifier
/// with a seed derived from `(seed, j)`.
pub fn cross_validate_observed(
    data: &PreparedDataset,
    mode: FeatureMode,
    learner: &dyn Learner,
    k: usize,
    seed: u64,
    observer: &dyn FitObserver,
) -> Result<CvResult> {
    let ds = &data.dataset;
    if data.embeddings.len() != ds.len() {
        return Err(Error::InvalidArgument("embeddings do not match the dataset".into()));
    }
    let plan = stratified_kfold(ds, k, seed)?;
    let folds = (0..k)
        .into_par_iter()
        .map(|fold| -> Result<FoldResult> {
            let train_idx = plan.train_indices(fold);
            let test_idx = plan.test_indices(fold);
            let train = ds.subset(&train_idx);
            let test = ds.subset(&test_idx);

            let fitted = fit_features(&train, &data.embeddings_of(&train_idx), mode)?;
            let train_ids: Vec<String> = train.reports.iter().map(|r| r.id.clone()).collect();
            observer.observe(fold, FitStage::Tfidf, &train_ids);
            observer.observe(fold, FitStage::MinMax, fitted.train.ids());

            let raw_test = build_features(&test.reports, mode, &fitted.tfidf, &data.embeddings_of(&test_idx))?;
            let x_test = apply_minmax(&fitted.minmax, &raw_test);
            let labeled = LabeledMatrix::new(fitted.train, train.labels())?;
            observer.observe(fold, FitStage::Classifier, labeled.x().ids());
            let model = learner.fit_predictor(&labeled, derive_seed(seed, fold as u64))?;

            observer.observe(fold, FitStage::Evaluate, x_test.ids());
            let pred = model.predict(&x_test)?;
            let cm = confusion(&test.labels(), &pred)?;
            Ok(FoldResult {
                fold,
                confusion: cm,
                metrics: metrics(&cm)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_fold: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    Ok(CvResult {
        dataset: data.name.clone(),
        mode,
        classifier: learner.name(),
        embedder: data.embedder.clone(),
        seed,
        mean: Metrics::mean(&per_fold),
        folds,
    })
}
