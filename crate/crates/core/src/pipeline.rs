//! A trained end-to-end model: preprocessing, feature fitting and classifier.
//!
//! Saved as JSON:
//!
//! ```text
//! { "format": "bugtriage-model", "version": 1,
//!   "features": { "mode": ..., "embedder": { "kind": "fallback", "dim": 64 } },
//!   "embedder_identity": "hashing-fnv1a/64",
//!   "stopwords": { "words": [...], "source": ... },
//!   "tfidf": ..., "minmax": ..., "classifier": { "kind": "rf", ... } }
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierConfig, LabeledMatrix, Prediction, TrainedClassifier};
use crate::corpus::{Dataset, ReportFields};
use crate::error::{Error, Result};
use crate::eval::fit_features;
use crate::features::{
    apply_minmax, build_features, embed_reports, Embedder, FeatureConfig, FeatureMatrix, MinMaxParams, TfidfModel,
};
use crate::preprocess::{Preprocessor, StopwordList};

pub const MODEL_FORMAT: &str = "bugtriage-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub format: String,
    pub version: u32,
    pub features: FeatureConfig,
    pub embedder_identity: String,
    pub stopwords: StopwordList,
    pub tfidf: TfidfModel,
    pub minmax: MinMaxParams,
    pub classifier: TrainedClassifier,
}

impl TrainedPipeline {
    pub fn train(
        ds: &Dataset,
        features: &FeatureConfig,
        classifier: &ClassifierConfig,
        preprocessor: &Preprocessor,
        embedder: &dyn Embedder,
        seed: u64,
    ) -> Result<Self> {
        let embeddings = embed_reports(&ds.reports, preprocessor, embedder)?;
        let fitted = fit_features(ds, &embeddings, features.mode)?;
        let labeled = LabeledMatrix::new(fitted.train, ds.labels())?;
        Ok(TrainedPipeline {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            features: features.clone(),
            embedder_identity: embedder.identity(),
            stopwords: preprocessor.stopwords().clone(),
            tfidf: fitted.tfidf,
            minmax: fitted.minmax,
            classifier: classifier.fit(&labeled, seed)?,
        })
    }

    pub fn preprocessor(&self) -> Preprocessor {
        Preprocessor::new(self.stopwords.clone())
    }

    /// Scaled feature rows for `reports`, using the embedder the model was
    /// trained with.
    pub fn features_for<R: ReportFields>(&self, reports: &[R], embedder: &dyn Embedder) -> Result<FeatureMatrix> {
        if embedder.identity() != self.embedder_identity {
            return Err(Error::InvalidArgument(format!(
                "model was trained with embedder {} but {} is configured",
                self.embedder_identity,
                embedder.identity()
            )));
        }
        let embeddings = embed_reports(reports, &self.preprocessor(), embedder)?;
        let raw = build_features(reports, self.features.mode, &self.tfidf, &embeddings)?;
        Ok(apply_minmax(&self.minmax, &raw))
    }

    pub fn predict<R: ReportFields>(&self, reports: &[R], embedder: &dyn Embedder) -> Result<Vec<Prediction>> {
        let x = self.features_for(reports, embedder)?;
        self.classifier.predict_scored(&x)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self).map_err(|e| Error::Format {
            what: "model file",
            message: e.to_string(),
        })
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let model: TrainedPipeline = serde_json::from_reader(reader).map_err(|e| Error::Format {
            what: "model file",
            message: e.to_string(),
        })?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(Error::Format {
                what: "model file",
                message: format!("unsupported format {} version {}", model.format, model.version),
            });
        }
        if model.classifier.width() != model.minmax.width() {
            return Err(Error::Format {
                what: "model file",
                message: "classifier and scaler widths differ".into(),
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_json(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_json(std::io::BufReader::new(file))
    }
}
