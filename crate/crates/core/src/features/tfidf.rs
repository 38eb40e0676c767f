use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{CategoricalField, ReportFields};
use crate::error::{Error, Result};

/// Document frequencies of categorical field values over a training set.
///
/// Each field holds exactly one value per report, so the term frequency of
/// that value is 1 and a score reduces to `ln(D / (Dw + 1))`, where `D` is
/// the number of training reports and `Dw` the number whose field equals
/// the value. Values never seen at fit time have `Dw = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    doc_count: usize,
    doc_freq: BTreeMap<CategoricalField, BTreeMap<String, usize>>,
}

impl TfidfModel {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn fields(&self) -> impl Iterator<Item = CategoricalField> + '_ {
        self.doc_freq.keys().copied()
    }

    /// `Dw` for a field value; 0 when unseen or when the field was not fitted.
    pub fn doc_freq(&self, field: CategoricalField, value: &str) -> usize {
        self.doc_freq
            .get(&field)
            .and_then(|t| t.get(value))
            .copied()
            .unwrap_or(0)
    }

    pub fn score(&self, field: CategoricalField, value: &str) -> f64 {
        tfidf(1, 1, self.doc_count, self.doc_freq(field, value))
    }
}

/// `Nw / N * ln(D / (Dw + 1))`.
pub fn tfidf(term_count: usize, total_terms: usize, docs: usize, docs_with_term: usize) -> f64 {
    term_count as f64 / total_terms as f64 * (docs as f64 / (docs_with_term as f64 + 1.0)).ln()
}

pub fn fit_tfidf<R: ReportFields>(train: &[R], fields: &[CategoricalField]) -> Result<TfidfModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut doc_freq = BTreeMap::new();
    for &field in fields {
        let mut table: BTreeMap<String, usize> = BTreeMap::new();
        for r in train {
            let value = r.categorical(field).ok_or_else(|| Error::MissingField {
                id: r.id().to_string(),
                field: field.as_str(),
            })?;
            *table.entry(value.to_string()).or_default() += 1;
        }
        doc_freq.insert(field, table);
    }
    Ok(TfidfModel {
        doc_count: train.len(),
        doc_freq,
    })
}

pub fn tfidf_score(model: &TfidfModel, field: CategoricalField, value: &str) -> f64 {
    model.score(field, value)
}
