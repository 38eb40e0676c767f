use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Counts with `Bug` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(truth: &[Label], pred: &[Label]) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} truths but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in truth.iter().zip(pred) {
        match (t, p) {
            (Label::Bug, Label::Bug) => cm.tp += 1,
            (Label::NonBug, Label::NonBug) => cm.tn += 1,
            (Label::NonBug, Label::Bug) => cm.fp += 1,
            (Label::Bug, Label::NonBug) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

/// Which metrics hit a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Undefined {
    pub precision: bool,
    pub recall: bool,
    pub f_measure: bool,
}

impl Undefined {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f_measure
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub undefined: Undefined,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::InvalidArgument("metrics of an empty confusion matrix".into()));
    }
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let accuracy = (tp + tn) / (tp + tn + fp + fn_);
    let (precision, p_undef) = ratio(tp, tp + fp);
    let (recall, r_undef) = ratio(tp, tp + fn_);
    // 2PR/(P+R) rewritten over the counts: one rounding step, so the result
    // never leaves [min(P, R), max(P, R)].
    let f_undef = precision + recall == 0.0;
    let f_measure = if f_undef { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f_measure,
        undefined: Undefined {
            precision: p_undef,
            recall: r_undef,
            f_measure: f_undef,
        },
    })
}

impl Metrics {
    /// Per-metric arithmetic mean; a flag is set if any input had it set.
    pub fn mean(all: &[Metrics]) -> Metrics {
        if all.is_empty() {
            return Metrics::default();
        }
        let n = all.len() as f64;
        let avg = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        Metrics {
            accuracy: avg(|m| m.accuracy),
            precision: avg(|m| m.precision),
            recall: avg(|m| m.recall),
            f_measure: avg(|m| m.f_measure),
            undefined: Undefined {
                precision: all.iter().any(|m| m.undefined.precision),
                recall: all.iter().any(|m| m.undefined.recall),
                f_measure: all.iter().any(|m| m.undefined.f_measure),
            },
        }
    }
}
