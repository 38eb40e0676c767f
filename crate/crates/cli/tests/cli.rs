use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_bugtriage");

fn apache_spec() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/resources/synth/apache.toml")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    o
}

/// A small corpus so the grid commands stay quick.
fn small_spec(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    fs::write(
        &path,
        r#"name = "tiny"
total = 60
bug_fraction = 0.5
seed = 3
exact_counts = true

[intention]
bug = [0.9, 0.1]
non_bug = [0.1, 0.9]

[fields]
products = 4
components = 6
reporters = 10
severities = 7
zipf_exponent = 1.1
label_skew = 0.8

[summary]
shared_vocab = 50
label_vocab = 10
signal_rate = 0.3
min_tokens = 5
max_tokens = 10
"#,
    )
    .unwrap();
    path
}

fn apache_csv(dir: &Path) -> PathBuf {
    let out = dir.join("apache.csv");
    ok(run(
        dir,
        &["synth", apache_spec().to_str().unwrap(), "--out", out.to_str().unwrap()],
    ));
    out
}

fn tiny_csv(dir: &Path) -> PathBuf {
    let spec = small_spec(dir);
    let out = dir.join("tiny.csv");
    ok(run(
        dir,
        &["synth", spec.to_str().unwrap(), "-o", out.to_str().unwrap()],
    ));
    out
}

#[test]
fn stats_on_apache_counts() {
    let tmp = TempDir::new().unwrap();
    let csv = apache_csv(tmp.path());
    let o = ok(run(tmp.path(), &["stats", csv.to_str().unwrap()]));
    let text = stdout(&o);
    let number = |key: &str| -> usize {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split_whitespace().last().unwrap().parse().unwrap()
    };
    assert_eq!(number("total"), 446);
    assert_eq!(number("bug "), 296);
    assert_eq!(number("non-bug "), 150);
}

#[test]
fn stats_on_header_only_file_prints_zeros() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("empty.csv");
    fs::write(
        &path,
        "id,product,component,reporter,severity,summary,intention,label\n",
    )
    .unwrap();
    let o = ok(run(tmp.path(), &["stats", "empty.csv"]));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().ends_with(" 0"), "{text}");
    let numbers: Vec<usize> = text.split_whitespace().filter_map(|w| w.parse().ok()).collect();
    assert_eq!(numbers, vec![0; 7]);
}

#[test]
fn malformed_file_exits_2_naming_the_column() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("bad.csv"),
        "id,product,reporter,severity,summary,intention,label\n",
    )
    .unwrap();
    let o = run(tmp.path(), &["stats", "bad.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("component"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(tmp.path(), &["stats", "missing.csv"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(tmp.path(), &["train", "--model", "tree", "x.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(run(tmp.path(), &["ablate"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failure_exits_1() {
    let tmp = TempDir::new().unwrap();
    let csv = tiny_csv(tmp.path());
    // Nothing listens on port 1.
    let o = run(
        tmp.path(),
        &["featurize", csv.to_str().unwrap(), "--sidecar-addr", "127.0.0.1:1"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn train_then_predict_round_trip() {
    let tmp = TempDir::new().unwrap();
    let csv = tiny_csv(tmp.path());
    for kind in ["knn", "nb", "lr", "svm", "rf"] {
        let model = tmp.path().join(format!("{kind}.json"));
        ok(run(
            tmp.path(),
            &[
                "train",
                csv.to_str().unwrap(),
                "--model",
                kind,
                "--trees",
                "15",
                "-o",
                model.to_str().unwrap(),
            ],
        ));
        let a = ok(run(
            tmp.path(),
            &["predict", "--model", model.to_str().unwrap(), csv.to_str().unwrap()],
        ));
        let b = ok(run(
            tmp.path(),
            &["predict", "--model", model.to_str().unwrap(), csv.to_str().unwrap()],
        ));
        assert_eq!(a.stdout, b.stdout);

        let text = stdout(&a);
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        let extra = match kind {
            "knn" => "",
            "nb" => ",posterior_bug,posterior_non_bug",
            "lr" => ",prob_bug",
            "svm" => ",margin",
            _ => ",votes_bug,votes_non_bug",
        };
        assert_eq!(
            header,
            format!("id,product,component,reporter,severity,summary,intention,label,predicted{extra}")
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 60);
        // Training accuracy of every model on this well-separated corpus.
        let correct = rows
            .iter()
            .filter(|r| {
                let f: Vec<&str> = r.split(',').collect();
                f[7] == f[8]
            })
            .count();
        assert!(correct >= 45, "{kind}: {correct}/60");
    }
}

#[test]
fn knn_recovers_a_training_row_label() {
    let tmp = TempDir::new().unwrap();
    let csv = tiny_csv(tmp.path());
    ok(run(
        tmp.path(),
        &[
            "train",
            csv.to_str().unwrap(),
            "--model",
            "knn",
            "--k",
            "1",
            "-o",
            "m.json",
        ],
    ));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    for row in lines.take(10) {
        let label = row.rsplit(',').next().unwrap();
        fs::write(tmp.path().join("one.csv"), format!("{header}\n{row}\n")).unwrap();
        let o = ok(run(tmp.path(), &["predict", "--model", "m.json", "one.csv"]));
        let out = stdout(&o);
        let predicted = out.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
        assert_eq!(predicted, label);
    }
}

#[test]
fn predict_without_summary_column_is_a_schema_error() {
    let tmp = TempDir::new().unwrap();
    let csv = tiny_csv(tmp.path());
    ok(run(
        tmp.path(),
        &["train", csv.to_str().unwrap(), "--model", "lr", "-o", "m.json"],
    ));
    fs::write(
        tmp.path().join("nosummary.csv"),
        "id,product,component,reporter,severity\n1,a,b,c,major\n",
    )
    .unwrap();
    let o = run(tmp.path(), &["predict", "--model", "m.json", "nosummary.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("summary"), "{}", stderr(&o));
}

#[test]
fn ablate_single_classifier_gives_three_by_one_grid() {
    let tmp = TempDir::new().unwrap();
    let spec = small_spec(tmp.path());
    let o = ok(run(
        tmp.path(),
        &[
            "ablate",
            "--synth",
            spec.to_str().unwrap(),
            "--classifiers",
            "rf",
            "--seeds",
            "2",
            "--folds",
            "3",
            "--trees",
            "10",
        ],
    ));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert_eq!(
        lines[0].split_whitespace().collect::<Vec<_>>(),
        ["Dataset", "Features", "RF"]
    );
    for (line, mode) in lines[1..].iter().zip(["Text", "Text+Freq", "Text+Freq+Intention"]) {
        assert!(line.contains(mode), "{line}");
        let value: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
        assert!((0.0..=100.0).contains(&value));
    }
}

#[test]
fn ablate_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let spec = small_spec(tmp.path());
    let csv = tmp.path().join("fixed.csv");
    fs::rename(tiny_csv(tmp.path()), &csv).unwrap();
    let mut outputs = Vec::new();
    for (dir, jobs) in [("a", "1"), ("b", "4")] {
        ok(run(
            tmp.path(),
            &[
                "ablate",
                csv.to_str().unwrap(),
                "--synth",
                spec.to_str().unwrap(),
                "--seed",
                "9",
                "--seeds",
                "2",
                "--folds",
                "3",
                "--trees",
                "10",
                "--jobs",
                jobs,
                "--chart",
                "--out",
                dir,
            ],
        ));
        let d = tmp.path().join(dir);
        assert!(d.join("accuracy.svg").is_file());
        outputs.push((
            fs::read(d.join("results.csv")).unwrap(),
            fs::read(d.join("table.txt")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let results = String::from_utf8(outputs[0].0.clone()).unwrap();
    // 2 datasets x 3 modes x 5 classifiers x 2 seeds x 3 folds.
    assert_eq!(results.lines().count(), 1 + 2 * 3 * 5 * 2 * 3);
}

#[test]
fn evaluate_prints_folds_and_mean() {
    let tmp = TempDir::new().unwrap();
    let csv = tiny_csv(tmp.path());
    let o = ok(run(
        tmp.path(),
        &[
            "evaluate",
            csv.to_str().unwrap(),
            "--model",
            "lr",
            "--folds",
            "4",
            "--mode",
            "text+freq",
        ],
    ));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 4);
    assert!(text.lines().any(|l| l.starts_with("mean")), "{text}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("run.toml"), "seed = 5\nfolds = 4\n[rf]\ntrees = 12\n").unwrap();
    let o = ok(run(
        tmp.path(),
        &["--config", "run.toml", "--print-config", "ablate", "--folds", "6"],
    ));
    let resolved = stdout(&o);
    assert!(resolved.contains("seed = 5\n"), "{resolved}");
    assert!(resolved.contains("folds = 6\n"), "{resolved}");
    assert!(resolved.contains("trees = 12\n"), "{resolved}");

    let o = ok(run(tmp.path(), &["--print-config", "stats"]));
    assert!(stdout(&o).contains("seed = 42\n"));

    fs::write(tmp.path().join("typo.toml"), "seeds_typo = 3\n").unwrap();
    assert_eq!(
        run(tmp.path(), &["--config", "typo.toml", "stats"]).status.code(),
        Some(2)
    );
}

#[test]
fn synth_seed_flag_overrides_spec_seed() {
    let tmp = TempDir::new().unwrap();
    let spec = small_spec(tmp.path());
    let spec = spec.to_str().unwrap();
    let a = ok(run(tmp.path(), &["synth", spec]));
    let b = ok(run(tmp.path(), &["synth", spec, "--seed", "3"]));
    let c = ok(run(tmp.path(), &["synth", spec, "--seed", "4"]));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn preprocess_text_and_csv() {
    let tmp = TempDir::new().unwrap();
    let o = ok(run(
        tmp.path(),
        &["preprocess", "The server crashes when 2 users connect!"],
    ));
    assert_eq!(stdout(&o).trim(), "server crash user connect");

    let csv = tiny_csv(tmp.path());
    let o = ok(run(tmp.path(), &["preprocess", "--input", csv.to_str().unwrap()]));
    assert_eq!(stdout(&o).lines().count(), 60);
    assert!(stdout(&o).starts_with("1\t"));
}

#[test]
fn featurize_writes_scaled_columns() {
    let tmp = TempDir::new().unwrap();
    let csv = tiny_csv(tmp.path());
    let o = ok(run(
        tmp.path(),
        &["featurize", csv.to_str().unwrap(), "--dim", "8", "--mode", "text+freq"],
    ));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 4 + 8);
    assert_eq!(header[1], "tfidf_product");
    for line in lines {
        for v in line.split(',').skip(1) {
            let v: f64 = v.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
