//! Labeled bug-report datasets: loading, validation, statistics and
//! partitioning.
//!
//! The on-disk format is CSV with the header
//! `id,product,component,reporter,severity,summary,intention,label`.
//! The annotation variant, produced by [`tracker`] for manual labeling, drops
//! the last two columns.

mod io;
mod split;
pub mod tracker;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use io::{load_csv, load_unlabeled, read_csv, read_unlabeled, write_annotation_csv, write_csv};
pub use split::{stratified_kfold, train_test_split, FoldPlan};

/// Communicative purpose of a report summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intention {
    /// Describes a problem or where it occurs.
    Explanation,
    /// Proposes a solution.
    Suggestion,
}

impl Intention {
    pub const ALL: [Intention; 2] = [Intention::Explanation, Intention::Suggestion];

    pub fn as_str(self) -> &'static str {
        match self {
            Intention::Explanation => "explanation",
            Intention::Suggestion => "suggestion",
        }
    }
}

impl FromStr for Intention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "explanation" => Ok(Intention::Explanation),
            "suggestion" => Ok(Intention::Suggestion),
            other => Err(format!(
                "invalid intention `{other}` (expected explanation or suggestion)"
            )),
        }
    }
}

impl fmt::Display for Intention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Binary target. `Bug` is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Bug,
    NonBug,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Bug, Label::NonBug];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bug => "bug",
            Label::NonBug => "non-bug",
        }
    }

    /// 1 for `Bug`, 0 for `NonBug`.
    pub fn as_indicator(self) -> f64 {
        match self {
            Label::Bug => 1.0,
            Label::NonBug => 0.0,
        }
    }

    /// +1 for `Bug`, -1 for `NonBug`.
    pub fn as_sign(self) -> f64 {
        match self {
            Label::Bug => 1.0,
            Label::NonBug => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Bug => 0,
            Label::NonBug => 1,
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bug" => Ok(Label::Bug),
            "non-bug" | "nonbug" => Ok(Label::NonBug),
            other => Err(format!("invalid label `{other}` (expected bug or non-bug)")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The categorical (non-summary) fields of a report, in feature-column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoricalField {
    Product,
    Component,
    Reporter,
    Severity,
    Intention,
}

impl CategoricalField {
    pub const ALL: [CategoricalField; 5] = [
        CategoricalField::Product,
        CategoricalField::Component,
        CategoricalField::Reporter,
        CategoricalField::Severity,
        CategoricalField::Intention,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CategoricalField::Product => "product",
            CategoricalField::Component => "component",
            CategoricalField::Reporter => "reporter",
            CategoricalField::Severity => "severity",
            CategoricalField::Intention => "intention",
        }
    }
}

impl fmt::Display for CategoricalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Read access to the fields that feature extraction consumes. Implemented by
/// both labeled and unlabeled reports.
pub trait ReportFields {
    fn id(&self) -> &str;
    fn summary(&self) -> &str;
    /// `None` when the field is not known, which only happens for the
    /// intention of an unannotated report.
    fn categorical(&self, field: CategoricalField) -> Option<&str>;
}

/// One labeled report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugReport {
    pub id: String,
    pub product: String,
    pub component: String,
    pub reporter: String,
    pub severity: String,
    pub summary: String,
    pub intention: Intention,
    pub label: Label,
}

impl ReportFields for BugReport {
    fn id(&self) -> &str {
        &self.id
    }

    fn summary(&self) -> &str {
        &self.summary
    }

    fn categorical(&self, field: CategoricalField) -> Option<&str> {
        Some(match field {
            CategoricalField::Product => &self.product,
            CategoricalField::Component => &self.component,
            CategoricalField::Reporter => &self.reporter,
            CategoricalField::Severity => &self.severity,
            CategoricalField::Intention => self.intention.as_str(),
        })
    }
}

/// A report whose bug/non-bug label is unknown; the intention may be unknown
/// as well (freshly fetched reports).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlabeledReport {
    pub id: String,
    pub product: String,
    pub component: String,
    pub reporter: String,
    pub severity: String,
    pub summary: String,
    pub intention: Option<Intention>,
}

impl ReportFields for UnlabeledReport {
    fn id(&self) -> &str {
        &self.id
    }

    fn summary(&self) -> &str {
        &self.summary
    }

    fn categorical(&self, field: CategoricalField) -> Option<&str> {
        match field {
            CategoricalField::Product => Some(&self.product),
            CategoricalField::Component => Some(&self.component),
            CategoricalField::Reporter => Some(&self.reporter),
            CategoricalField::Severity => Some(&self.severity),
            CategoricalField::Intention => self.intention.map(Intention::as_str),
        }
    }
}

impl From<BugReport> for UnlabeledReport {
    fn from(r: BugReport) -> Self {
        UnlabeledReport {
            id: r.id,
            product: r.product,
            component: r.component,
            reporter: r.reporter,
            severity: r.severity,
            summary: r.summary,
            intention: Some(r.intention),
        }
    }
}

/// An ordered collection of labeled reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub reports: Vec<BugReport>,
    pub source: String,
}

impl Dataset {
    pub fn new(reports: Vec<BugReport>, source: impl Into<String>) -> Self {
        Dataset {
            reports,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.reports.iter().map(|r| r.label).collect()
    }

    /// The sub-dataset made of the rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            reports: indices.iter().map(|&i| self.reports[i].clone()).collect(),
            source: self.source.clone(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn stats(&self) -> DatasetStats {
        stats(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    EmptySummary { id: String },
    DuplicateId { id: String },
    SingleClass,
    Empty,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::EmptySummary { id } => write!(f, "empty summary: {id}"),
            Finding::DuplicateId { id } => write!(f, "duplicate id: {id}"),
            Finding::SingleClass => f.write_str("single-class dataset"),
            Finding::Empty => f.write_str("empty dataset"),
        }
    }
}

/// Findings produced by [`validate`]; the dataset is valid iff there are none.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Checks that a dataset is usable for training.
pub fn validate(ds: &Dataset) -> ValidationReport {
    let mut findings = Vec::new();
    if ds.is_empty() {
        findings.push(Finding::Empty);
        return ValidationReport { findings };
    }
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for r in &ds.reports {
        if r.summary.trim().is_empty() {
            findings.push(Finding::EmptySummary { id: r.id.clone() });
        }
        if !seen.insert(r.id.as_str()) && reported.insert(r.id.as_str()) {
            findings.push(Finding::DuplicateId { id: r.id.clone() });
        }
    }
    let first = ds.reports[0].label;
    if ds.reports.iter().all(|r| r.label == first) {
        findings.push(Finding::SingleClass);
    }
    ValidationReport { findings }
}

/// Label counts and the label × intention contingency table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub total: usize,
    pub bug_count: usize,
    pub nonbug_count: usize,
    /// Indexed `[label.index()][intention]` with explanation first.
    pub intention_by_label: [[usize; 2]; 2],
}

impl DatasetStats {
    pub fn cell(&self, label: Label, intention: Intention) -> usize {
        let col = match intention {
            Intention::Explanation => 0,
            Intention::Suggestion => 1,
        };
        self.intention_by_label[label.index()][col]
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total    {:>7}", self.total)?;
        writeln!(f, "bug      {:>7}", self.bug_count)?;
        writeln!(f, "non-bug  {:>7}", self.nonbug_count)?;
        writeln!(f)?;
        writeln!(f, "{:<9}{:>12}{:>12}", "", "explanation", "suggestion")?;
        for label in Label::ALL {
            writeln!(
                f,
                "{:<9}{:>12}{:>12}",
                label.as_str(),
                self.cell(label, Intention::Explanation),
                self.cell(label, Intention::Suggestion)
            )?;
        }
        Ok(())
    }
}

pub fn stats(ds: &Dataset) -> DatasetStats {
    let mut s = DatasetStats {
        total: ds.len(),
        ..DatasetStats::default()
    };
    for r in &ds.reports {
        match r.label {
            Label::Bug => s.bug_count += 1,
            Label::NonBug => s.nonbug_count += 1,
        }
        let col = match r.intention {
            Intention::Explanation => 0,
            Intention::Suggestion => 1,
        };
        s.intention_by_label[r.label.index()][col] += 1;
    }
    s
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn report(id: &str, label: Label, intention: Intention) -> BugReport {
        BugReport {
            id: id.to_string(),
            product: "Core".into(),
            component: "General".into(),
            reporter: "someone".into(),
            severity: "normal".into(),
            summary: format!("summary of {id}"),
            intention,
            label,
        }
    }

    #[test]
    fn two_labels_is_valid() {
        let ds = Dataset::new(
            vec![
                report("1", Label::Bug, Intention::Explanation),
                report("2", Label::NonBug, Intention::Suggestion),
            ],
            "t",
        );
        assert!(validate(&ds).is_valid());
    }

    #[test]
    fn single_class_is_reported() {
        let ds = Dataset::new(
            vec![
                report("1", Label::Bug, Intention::Explanation),
                report("2", Label::Bug, Intention::Suggestion),
            ],
            "t",
        );
        let v = validate(&ds);
        assert_eq!(v.findings, vec![Finding::SingleClass]);
        assert_eq!(v.to_string(), "single-class dataset");
    }

    #[test]
    fn duplicate_id_is_reported_once() {
        let ds = Dataset::new(
            vec![
                report("42", Label::Bug, Intention::Explanation),
                report("42", Label::NonBug, Intention::Suggestion),
                report("42", Label::NonBug, Intention::Suggestion),
            ],
            "t",
        );
        let v = validate(&ds);
        assert_eq!(v.findings.len(), 1);
        assert_eq!(v.findings[0].to_string(), "duplicate id: 42");
    }

    #[test]
    fn blank_summary_is_reported() {
        let mut r = report("7", Label::Bug, Intention::Explanation);
        r.summary = "   ".into();
        let ds = Dataset::new(vec![r, report("8", Label::NonBug, Intention::Suggestion)], "t");
        assert_eq!(validate(&ds).findings, vec![Finding::EmptySummary { id: "7".into() }]);
    }

    #[test]
    fn empty_stats_are_zero() {
        assert_eq!(stats(&Dataset::default()), DatasetStats::default());
    }

    #[test]
    fn stats_count_cells() {
        let ds = Dataset::new(
            vec![
                report("1", Label::Bug, Intention::Explanation),
                report("2", Label::Bug, Intention::Explanation),
                report("3", Label::Bug, Intention::Suggestion),
                report("4", Label::NonBug, Intention::Suggestion),
            ],
            "t",
        );
        let s = stats(&ds);
        assert_eq!((s.total, s.bug_count, s.nonbug_count), (4, 3, 1));
        assert_eq!(s.cell(Label::Bug, Intention::Explanation), 2);
        assert_eq!(s.cell(Label::Bug, Intention::Suggestion), 1);
        assert_eq!(s.cell(Label::NonBug, Intention::Explanation), 0);
        assert_eq!(s.cell(Label::NonBug, Intention::Suggestion), 1);
    }

    #[test]
    fn enums_parse_case_insensitively() {
        assert_eq!("Explanation".parse::<Intention>(), Ok(Intention::Explanation));
        assert_eq!("SUGGESTION".parse::<Intention>(), Ok(Intention::Suggestion));
        assert_eq!("Non-Bug".parse::<Label>(), Ok(Label::NonBug));
        assert!("advice".parse::<Intention>().is_err());
        assert!("feature".parse::<Label>().is_err());
    }
}
