//! Result files.
//!
//! `results.csv` holds one record per (dataset, mode, classifier, seed,
//! fold) with the fold's confusion counts and metrics. `table.txt` holds
//! one grid per metric, rows grouped by dataset and feature mode, columns
//! by classifier, values in percent. `accuracy.svg` is an optional bar chart
//! of the accuracy grid.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::ablation::AblationTable;
use super::metrics::Metrics;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: [&str; 14] = [
    "dataset",
    "mode",
    "classifier",
    "embedder",
    "seed",
    "fold",
    "tp",
    "tn",
    "fp",
    "fn",
    "accuracy",
    "precision",
    "recall",
    "f_measure",
];

pub fn write_results_csv<W: Write>(table: &AblationTable, writer: W) -> Result<()> {
    let err = |e: csv::Error| Error::Format {
        what: "results csv",
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULTS_HEADER).map_err(err)?;
    for run in &table.runs {
        for f in &run.folds {
            let cm = f.confusion;
            let m = f.metrics;
            w.write_record([
                run.dataset.clone(),
                run.mode.to_string(),
                run.classifier.clone(),
                run.embedder.clone(),
                run.seed.to_string(),
                f.fold.to_string(),
                cm.tp.to_string(),
                cm.tn.to_string(),
                cm.fp.to_string(),
                cm.fn_.to_string(),
                m.accuracy.to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f_measure.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<results csv>", e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    Accuracy,
    Precision,
    Recall,
    FMeasure,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [
        MetricName::Accuracy,
        MetricName::Precision,
        MetricName::Recall,
        MetricName::FMeasure,
    ];

    pub fn title(self) -> &'static str {
        match self {
            MetricName::Accuracy => "Accuracy",
            MetricName::Precision => "Precision",
            MetricName::Recall => "Recall",
            MetricName::FMeasure => "F-measure",
        }
    }

    pub fn of(self, m: &Metrics) -> f64 {
        match self {
            MetricName::Accuracy => m.accuracy,
            MetricName::Precision => m.precision,
            MetricName::Recall => m.recall,
            MetricName::FMeasure => m.f_measure,
        }
    }
}

/// Grid of one metric in percent with one decimal.
pub fn render_table(table: &AblationTable, metric: MetricName) -> String {
    let dataset_w = table.datasets.iter().map(String::len).chain([7]).max().unwrap();
    let mode_w = table.modes.iter().map(|m| m.title().len()).chain([8]).max().unwrap();
    let mut out = String::new();
    let _ = write!(out, "{:<dataset_w$}  {:<mode_w$}", "Dataset", "Features");
    for c in &table.classifiers {
        let _ = write!(out, "  {:>6}", c.title());
    }
    out.push('\n');
    for d in &table.datasets {
        for (i, &mode) in table.modes.iter().enumerate() {
            let name = if i == 0 { d.as_str() } else { "" };
            let _ = write!(out, "{name:<dataset_w$}  {:<mode_w$}", mode.title());
            for &c in &table.classifiers {
                match table.cell(d, mode, c) {
                    Some(cell) => {
                        let _ = write!(out, "  {:>6.1}", 100.0 * metric.of(&cell.mean));
                    }
                    None => {
                        let _ = write!(out, "  {:>6}", "-");
                    }
                }
            }
            out.push('\n');
        }
    }
    out
}

/// All four metric grids, each under its title.
pub fn render_all_tables(table: &AblationTable) -> String {
    MetricName::ALL
        .iter()
        .map(|&m| format!("{}\n{}", m.title(), render_table(table, m)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Grouped bar chart of accuracy: one group per (dataset, mode), one bar
/// per classifier.
pub fn render_accuracy_svg(table: &AblationTable) -> String {
    const BAR: f64 = 14.0;
    const GAP: f64 = 18.0;
    const HEIGHT: f64 = 200.0;
    const TOP: f64 = 20.0;
    const LEFT: f64 = 40.0;
    let groups: Vec<_> = table
        .datasets
        .iter()
        .flat_map(|d| table.modes.iter().map(move |&m| (d, m)))
        .collect();
    let group_w = BAR * table.classifiers.len() as f64 + GAP;
    let width = LEFT + group_w * groups.len() as f64 + GAP;
    let total_h = TOP + HEIGHT + 60.0;
    let palette = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2"];
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{total_h:.0}" font-family="sans-serif" font-size="9">"#
    );
    for pct in [0, 25, 50, 75, 100] {
        let y = TOP + HEIGHT * (1.0 - pct as f64 / 100.0);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{width:.0}" y2="{y:.1}" stroke="#ddd"/><text x="4" y="{:.1}">{pct}%</text>"##,
            y + 3.0
        );
    }
    for (g, (d, mode)) in groups.iter().enumerate() {
        let x0 = LEFT + GAP / 2.0 + g as f64 * group_w;
        for (c, &kind) in table.classifiers.iter().enumerate() {
            let Some(cell) = table.cell(d, *mode, kind) else {
                continue;
            };
            let h = HEIGHT * cell.mean.accuracy;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{BAR}" height="{h:.1}" fill="{}"><title>{d} {} {}: {:.1}%</title></rect>"#,
                x0 + c as f64 * BAR,
                TOP + HEIGHT - h,
                palette[c % palette.len()],
                mode.title(),
                kind.title(),
                100.0 * cell.mean.accuracy
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{d}</text><text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x0 + (group_w - GAP) / 2.0,
            TOP + HEIGHT + 14.0,
            x0 + (group_w - GAP) / 2.0,
            TOP + HEIGHT + 26.0,
            mode.title()
        );
    }
    for (c, kind) in table.classifiers.iter().enumerate() {
        let x = LEFT + c as f64 * 50.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            TOP + HEIGHT + 38.0,
            palette[c % palette.len()],
            x + 13.0,
            TOP + HEIGHT + 47.0,
            kind.title()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `results.csv`, `table.txt` and optionally `accuracy.svg` into
/// `dir`, returning the paths written.
pub fn render_report(table: &AblationTable, dir: &Path, chart: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let results = dir.join("results.csv");
    let file = std::fs::File::create(&results).map_err(|e| Error::io(&results, e))?;
    write_results_csv(table, std::io::BufWriter::new(file))?;
    written.push(results);

    let text = dir.join("table.txt");
    std::fs::write(&text, render_all_tables(table)).map_err(|e| Error::io(&text, e))?;
    written.push(text);

    if chart {
        let svg = dir.join("accuracy.svg");
        std::fs::write(&svg, render_accuracy_svg(table)).map_err(|e| Error::io(&svg, e))?;
        written.push(svg);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::ClassifierKind;
    use crate::eval::ablation::AblationCell;
    use crate::eval::cv::{CvResult, FoldResult};
    use crate::eval::metrics::{metrics, ConfusionMatrix};
    use crate::features::FeatureMode;

    fn empty() -> AblationTable {
        AblationTable {
            datasets: vec![],
            modes: FeatureMode::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            cells: vec![],
            runs: vec![],
        }
    }

    fn one_run() -> AblationTable {
        let cm = ConfusionMatrix {
            tp: 9,
            tn: 8,
            fp: 2,
            fn_: 1,
        };
        let m = metrics(&cm).unwrap();
        AblationTable {
            datasets: vec!["apache".into()],
            modes: vec![FeatureMode::Text],
            classifiers: vec![ClassifierKind::Rf],
            cells: vec![AblationCell {
                dataset: "apache".into(),
                mode: FeatureMode::Text,
                classifier: ClassifierKind::Rf,
                mean: m,
            }],
            runs: vec![CvResult {
                dataset: "apache".into(),
                mode: FeatureMode::Text,
                classifier: "rf".into(),
                embedder: "hashing-fnv1a/64".into(),
                seed: 7,
                folds: vec![FoldResult {
                    fold: 0,
                    confusion: cm,
                    metrics: m,
                }],
                mean: m,
            }],
        }
    }

    #[test]
    fn empty_report_is_valid() {
        let mut buf = Vec::new();
        write_results_csv(&empty(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
        let t = render_table(&empty(), MetricName::Accuracy);
        assert_eq!(t.lines().count(), 1);
        assert!(render_accuracy_svg(&empty()).ends_with("</svg>\n"));
    }

    #[test]
    fn one_result_one_row() {
        let t = render_table(&one_run(), MetricName::Accuracy);
        assert_eq!(t, "Dataset  Features      RF\napache   Text        85.0\n");
        let mut buf = Vec::new();
        write_results_csv(&one_run(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "apache,text,rf,hashing-fnv1a/64,7,0,9,8,2,1,0.85,0.8181818181818182,0.9,0.8571428571428571"
        );
    }

    #[test]
    fn files_written() {
        let dir = tempfile::tempdir().unwrap();
        let paths = render_report(&one_run(), dir.path(), true).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|p| p.exists()));
    }
}
