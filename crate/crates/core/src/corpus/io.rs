use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{BugReport, Dataset, Finding, Intention, Label, UnlabeledReport, ValidationReport};
use crate::error::{Error, Result};

pub(crate) const LABELED_COLUMNS: [&str; 8] = [
    "id",
    "product",
    "component",
    "reporter",
    "severity",
    "summary",
    "intention",
    "label",
];

pub(crate) const ANNOTATION_COLUMNS: [&str; 6] = ["id", "product", "component", "reporter", "severity", "summary"];

/// Column positions resolved from a header row.
struct Columns {
    index: [Option<usize>; 8],
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, required: &[&str], optional: &[&str]) -> Result<Self> {
        let mut index = [None; 8];
        for (pos, raw) in headers.iter().enumerate() {
            let name = raw.trim().trim_start_matches('\u{feff}').to_ascii_lowercase();
            let slot = LABELED_COLUMNS
                .iter()
                .position(|c| *c == name)
                .filter(|&i| required.contains(&LABELED_COLUMNS[i]) || optional.contains(&LABELED_COLUMNS[i]))
                .ok_or_else(|| Error::UnexpectedColumn(raw.trim().to_string()))?;
            if index[slot].is_some() {
                return Err(Error::UnexpectedColumn(raw.trim().to_string()));
            }
            index[slot] = Some(pos);
        }
        for name in required {
            let slot = LABELED_COLUMNS.iter().position(|c| c == name).unwrap();
            if index[slot].is_none() {
                return Err(Error::MissingColumn((*name).to_string()));
            }
        }
        Ok(Columns { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> Option<&'r str> {
        let slot = LABELED_COLUMNS.iter().position(|c| *c == column)?;
        self.index[slot].and_then(|pos| record.get(pos))
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader)
}

fn csv_error(row: usize, e: csv::Error) -> Error {
    Error::Row {
        row,
        message: e.to_string(),
    }
}

struct RowFields {
    id: String,
    product: String,
    component: String,
    reporter: String,
    severity: String,
    summary: String,
}

fn common_fields(cols: &Columns, record: &csv::StringRecord, row: usize) -> Result<RowFields> {
    let field = |name: &str| cols.get(record, name).unwrap_or("").to_string();
    let id = field("id").trim().to_string();
    if id.is_empty() {
        return Err(Error::Row {
            row,
            message: "empty id".into(),
        });
    }
    let severity = field("severity").trim().to_string();
    if severity.is_empty() {
        return Err(Error::Row {
            row,
            message: "blank severity".into(),
        });
    }
    let summary = field("summary");
    if summary.trim().is_empty() {
        return Err(Error::Row {
            row,
            message: "empty summary".into(),
        });
    }
    Ok(RowFields {
        id,
        product: field("product").trim().to_string(),
        component: field("component").trim().to_string(),
        reporter: field("reporter").trim().to_string(),
        severity,
        summary,
    })
}

fn check_unique_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::Validation(ValidationReport {
                findings: vec![Finding::DuplicateId { id: id.to_string() }],
            }));
        }
    }
    Ok(())
}

/// Parses a labeled CSV stream. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, source: &str) -> Result<Dataset> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(0, e))?.clone();
    let cols = Columns::resolve(&headers, &LABELED_COLUMNS, &[])?;
    let mut reports = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(row, e))?;
        let f = common_fields(&cols, &record, row)?;
        let intention: Intention = cols
            .get(&record, "intention")
            .unwrap_or("")
            .parse()
            .map_err(|message| Error::Row { row, message })?;
        let label: Label = cols
            .get(&record, "label")
            .unwrap_or("")
            .parse()
            .map_err(|message| Error::Row { row, message })?;
        reports.push(BugReport {
            id: f.id,
            product: f.product,
            component: f.component,
            reporter: f.reporter,
            severity: f.severity,
            summary: f.summary,
            intention,
            label,
        });
    }
    check_unique_ids(reports.iter().map(|r| r.id.as_str()))?;
    Ok(Dataset::new(reports, source))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    read_csv(open(path)?, &path.display().to_string())
}

/// Parses CSV for prediction: the annotation columns are required,
/// `intention` is optional and `label`, if present, is ignored.
pub fn read_unlabeled<R: Read>(reader: R) -> Result<Vec<UnlabeledReport>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(0, e))?.clone();
    let cols = Columns::resolve(&headers, &ANNOTATION_COLUMNS, &["intention", "label"])?;
    let mut reports = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| csv_error(row, e))?;
        let f = common_fields(&cols, &record, row)?;
        let intention = match cols.get(&record, "intention").map(str::trim) {
            None | Some("") => None,
            Some(raw) => Some(
                raw.parse::<Intention>()
                    .map_err(|message| Error::Row { row, message })?,
            ),
        };
        reports.push(UnlabeledReport {
            id: f.id,
            product: f.product,
            component: f.component,
            reporter: f.reporter,
            severity: f.severity,
            summary: f.summary,
            intention,
        });
    }
    check_unique_ids(reports.iter().map(|r| r.id.as_str()))?;
    Ok(reports)
}

pub fn load_unlabeled(path: impl AsRef<Path>) -> Result<Vec<UnlabeledReport>> {
    let path = path.as_ref();
    read_unlabeled(open(path)?)
}

fn write_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv output>", io),
        other => Error::Format {
            what: "csv output",
            message: format!("{other:?}"),
        },
    }
}

pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LABELED_COLUMNS).map_err(write_err)?;
    for r in &ds.reports {
        w.write_record([
            r.id.as_str(),
            &r.product,
            &r.component,
            &r.reporter,
            &r.severity,
            &r.summary,
            r.intention.as_str(),
            r.label.as_str(),
        ])
        .map_err(write_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}

/// Writes the annotation variant (no intention or label columns).
pub fn write_annotation_csv<W: Write>(reports: &[UnlabeledReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ANNOTATION_COLUMNS).map_err(write_err)?;
    for r in reports {
        w.write_record([
            r.id.as_str(),
            &r.product,
            &r.component,
            &r.reporter,
            &r.severity,
            &r.summary,
        ])
        .map_err(write_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))
}
