//! Feature extraction: TF-IDF scores of the categorical fields fused with a
//! summary embedding, then min-max scaled.
//!
//! A fused row is `[T_product, T_component, T_reporter, T_severity,
//! T_intention, V_1 .. V_n]`, restricted to the frequency columns that the
//! [`FeatureMode`] enables.

mod embed;
mod minmax;
pub mod sidecar;
mod tfidf;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CategoricalField, ReportFields};
use crate::error::{Error, Result};
use crate::preprocess::Preprocessor;

pub use embed::{Embedder, EmbeddingVector, HashingEmbedder, DEFAULT_HASHING_DIM};
pub use minmax::{apply_minmax, fit_minmax, MinMaxParams};
pub use sidecar::SidecarEmbedder;
pub use tfidf::{fit_tfidf, tfidf, tfidf_score, TfidfModel};

/// Which feature blocks are fused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureMode {
    /// Summary embedding only.
    #[serde(rename = "text")]
    Text,
    /// Embedding plus product, component, reporter and severity scores.
    #[serde(rename = "text+freq")]
    TextFreq,
    /// `TextFreq` plus the intention score.
    #[serde(rename = "text+freq+intention")]
    TextFreqIntention,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 3] = [FeatureMode::Text, FeatureMode::TextFreq, FeatureMode::TextFreqIntention];

    pub fn fields(self) -> &'static [CategoricalField] {
        match self {
            FeatureMode::Text => &[],
            FeatureMode::TextFreq => &CategoricalField::ALL[..4],
            FeatureMode::TextFreqIntention => &CategoricalField::ALL,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Text => "text",
            FeatureMode::TextFreq => "text+freq",
            FeatureMode::TextFreqIntention => "text+freq+intention",
        }
    }

    /// Row label used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            FeatureMode::Text => "Text",
            FeatureMode::TextFreq => "Text+Freq",
            FeatureMode::TextFreqIntention => "Text+Freq+Intention",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Ok(FeatureMode::Text),
            "text+freq" | "text-freq" | "textfreq" => Ok(FeatureMode::TextFreq),
            "text+freq+intention" | "text-freq-intention" | "textfreqintention" | "full" => {
                Ok(FeatureMode::TextFreqIntention)
            }
            other => Err(Error::InvalidArgument(format!("unknown feature mode `{other}`"))),
        }
    }
}

/// Embedding backend selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EmbedderSpec {
    /// The model-free hashing embedder.
    Fallback { dim: usize },
    /// The transformer sidecar at `addr` (`host:port`).
    Sidecar { addr: String },
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        EmbedderSpec::Fallback {
            dim: DEFAULT_HASHING_DIM,
        }
    }
}

impl EmbedderSpec {
    pub fn connect(&self) -> Result<Box<dyn Embedder>> {
        Ok(match self {
            EmbedderSpec::Fallback { dim } => Box::new(HashingEmbedder::new(*dim)?),
            EmbedderSpec::Sidecar { addr } => Box::new(SidecarEmbedder::connect(addr)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub mode: FeatureMode,
    pub embedder: EmbedderSpec,
}

impl FeatureConfig {
    pub fn new(mode: FeatureMode) -> Self {
        FeatureConfig {
            mode,
            embedder: EmbedderSpec::default(),
        }
    }
}

/// Dense row-major feature matrix with row ids and column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    ids: Vec<String>,
    columns: Vec<String>,
    /// Number of leading frequency columns.
    freq_width: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(ids: Vec<String>, columns: Vec<String>, freq_width: usize, rows: Vec<Vec<f64>>) -> Self {
        assert_eq!(ids.len(), rows.len(), "one id per row");
        assert!(freq_width <= columns.len());
        let mut data = Vec::with_capacity(rows.len() * columns.len());
        for row in rows {
            assert_eq!(row.len(), columns.len(), "row width");
            data.extend(row);
        }
        FeatureMatrix {
            ids,
            columns,
            freq_width,
            data,
        }
    }

    /// Matrix with anonymous rows and columns, mostly for tests.
    pub fn from_unnamed(rows: Vec<Vec<f64>>) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        let columns = (0..width).map(|c| format!("x{c}")).collect();
        Self::from_rows(ids, columns, 0, rows)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn freq_width(&self) -> usize {
        self.freq_width
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size.
        let w = self.width().max(1);
        self.data.chunks_exact(w).take(self.len())
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows().map(|r| r[c]).collect()
    }

    fn column_slice(&self, range: std::ops::Range<usize>, freq_width: usize) -> FeatureMatrix {
        let rows = self.rows().map(|r| r[range.clone()].to_vec()).collect();
        FeatureMatrix::from_rows(self.ids.clone(), self.columns[range].to_vec(), freq_width, rows)
    }

    /// The frequency block (M2).
    pub fn frequency_block(&self) -> FeatureMatrix {
        self.column_slice(0..self.freq_width, self.freq_width)
    }

    /// The embedding block (M1).
    pub fn embedding_block(&self) -> FeatureMatrix {
        self.column_slice(self.freq_width..self.width(), 0)
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.width());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            columns: self.columns.clone(),
            freq_width: self.freq_width,
            data,
        }
    }

    /// First non-finite entry, if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        let w = self.width().max(1);
        self.data.iter().position(|x| !x.is_finite()).map(|p| (p / w, p % w))
    }

    /// CSV with an `id` column followed by the feature columns.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Format {
            what: "feature csv",
            message: e.to_string(),
        };
        let mut header = vec!["id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(err)?;
        for (id, row) in self.ids.iter().zip(self.rows()) {
            let mut record = vec![id.clone()];
            record.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&record).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<feature csv>", e))
    }
}

/// Preprocesses and embeds every summary.
pub fn embed_reports<R: ReportFields>(
    reports: &[R],
    preprocessor: &Preprocessor,
    embedder: &dyn Embedder,
) -> Result<Vec<EmbeddingVector>> {
    let docs: Vec<_> = reports.iter().map(|r| preprocessor.preprocess(r.summary())).collect();
    let vectors = embedder.embed_batch(&docs)?;
    if vectors.len() != docs.len() {
        return Err(Error::Protocol(format!(
            "embedder returned {} vectors for {} summaries",
            vectors.len(),
            docs.len()
        )));
    }
    Ok(vectors)
}

fn column_names(mode: FeatureMode, dim: usize) -> Vec<String> {
    mode.fields()
        .iter()
        .map(|f| format!("tfidf_{f}"))
        .chain((0..dim).map(|i| format!("emb_{i}")))
        .collect()
}

/// Fuses frequency scores and precomputed embeddings, one row per report.
pub fn build_features<R: ReportFields>(
    reports: &[R],
    mode: FeatureMode,
    tfidf: &TfidfModel,
    embeddings: &[EmbeddingVector],
) -> Result<FeatureMatrix> {
    if reports.len() != embeddings.len() {
        return Err(Error::InvalidArgument(format!(
            "{} reports but {} embeddings",
            reports.len(),
            embeddings.len()
        )));
    }
    let dim = embeddings.first().map_or(0, EmbeddingVector::dim);
    let fields = mode.fields();
    let mut rows = Vec::with_capacity(reports.len());
    for (r, e) in reports.iter().zip(embeddings) {
        if e.dim() != dim {
            return Err(Error::Protocol(format!(
                "embedding dimension changed from {dim} to {}",
                e.dim()
            )));
        }
        let mut row = Vec::with_capacity(fields.len() + dim);
        for &field in fields {
            let value = r.categorical(field).ok_or_else(|| Error::MissingField {
                id: r.id().to_string(),
                field: field.as_str(),
            })?;
            row.push(tfidf.score(field, value));
        }
        row.extend_from_slice(e.values());
        rows.push(row);
    }
    Ok(FeatureMatrix::from_rows(
        reports.iter().map(|r| r.id().to_string()).collect(),
        column_names(mode, dim),
        fields.len(),
        rows,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BugReport, Intention, Label, UnlabeledReport};

    fn reports() -> Vec<BugReport> {
        let mk = |id: &str, sev: &str, intention, summary: &str| BugReport {
            id: id.into(),
            product: "Platform".into(),
            component: "Debug".into(),
            reporter: "dev".into(),
            severity: sev.into(),
            summary: summary.into(),
            intention,
            label: Label::Bug,
        };
        vec![
            mk("1", "enh", Intention::Suggestion, "table should sort on name"),
            mk("2", "blo", Intention::Explanation, "crash on startup"),
            mk("3", "enh", Intention::Suggestion, "table should sort on name"),
        ]
    }

    fn build(mode: FeatureMode, dim: usize) -> FeatureMatrix {
        let rs = reports();
        let tfidf = fit_tfidf(&rs, mode.fields()).unwrap();
        let emb = embed_reports(&rs, &Preprocessor::default(), &HashingEmbedder::new(dim).unwrap()).unwrap();
        build_features(&rs, mode, &tfidf, &emb).unwrap()
    }

    #[test]
    fn widths_follow_mode() {
        assert_eq!(build(FeatureMode::Text, 64).width(), 64);
        assert_eq!(build(FeatureMode::TextFreq, 64).width(), 4 + 64);
        let m = build(FeatureMode::TextFreqIntention, 64);
        assert_eq!(m.width(), 5 + 64);
        assert_eq!(m.columns()[4], "tfidf_intention");
        assert_eq!(m.columns()[5], "emb_0");
    }

    #[test]
    fn identical_reports_identical_rows() {
        let m = build(FeatureMode::TextFreqIntention, 16);
        assert_eq!(m.row(0), m.row(2));
        assert_ne!(m.row(0), m.row(1));
    }

    #[test]
    fn blocks_recompose() {
        let m = build(FeatureMode::TextFreqIntention, 8);
        let freq = m.frequency_block();
        let emb = m.embedding_block();
        assert_eq!(freq.width(), 5);
        assert_eq!(emb.width(), 8);
        for i in 0..m.len() {
            let joined: Vec<f64> = freq.row(i).iter().chain(emb.row(i)).copied().collect();
            assert_eq!(joined, m.row(i));
        }
    }

    #[test]
    fn scores_match_model() {
        let m = build(FeatureMode::TextFreqIntention, 4);
        // severity "enh" appears in 2 of 3 reports: ln(3 / 3) = 0.
        assert_eq!(m.row(0)[3], 0.0);
        assert!((m.row(1)[3] - (3.0f64 / 2.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn intention_mode_needs_intention() {
        let rs = reports();
        let tfidf = fit_tfidf(&rs, FeatureMode::TextFreqIntention.fields()).unwrap();
        let unlabeled: Vec<UnlabeledReport> = rs
            .into_iter()
            .map(|r| UnlabeledReport {
                intention: None,
                ..UnlabeledReport::from(r)
            })
            .collect();
        let emb = vec![EmbeddingVector::zeros(2); 3];
        assert!(matches!(
            build_features(&unlabeled, FeatureMode::TextFreqIntention, &tfidf, &emb),
            Err(Error::MissingField { field: "intention", .. })
        ));
        assert!(build_features(&unlabeled, FeatureMode::TextFreq, &tfidf, &emb).is_ok());
    }

    #[test]
    fn mode_parsing() {
        for mode in FeatureMode::ALL {
            assert_eq!(mode.as_str().parse::<FeatureMode>().unwrap(), mode);
        }
        assert!("words".parse::<FeatureMode>().is_err());
    }
}
