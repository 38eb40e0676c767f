use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use bugtriage_core::classifiers::{Score, TrainedClassifier};
use bugtriage_core::corpus::tracker::{fetch_tracker, TrackerQuery};
use bugtriage_core::corpus::{load_csv, load_unlabeled, write_annotation_csv, write_csv};
use bugtriage_core::eval::report::render_table;
use bugtriage_core::eval::{
    fit_features, generate_synthetic, render_report, run_ablation, AblationConfig, AblationInput, AblationTable,
    MetricName, SynthSpec,
};
use bugtriage_core::features::{embed_reports, Embedder};
use bugtriage_core::preprocess::{Preprocessor, StopwordList};
use bugtriage_core::{Dataset, FeatureConfig, FeatureMode, TrainedPipeline};

use crate::args::{Cli, Command, FetchArgs};
use crate::config::{require_file, RunConfig};
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let (mut config, file_seed) = match &cli.global.config {
        Some(path) => {
            require_file(path)?;
            RunConfig::load(path)?
        }
        None => (RunConfig::default(), false),
    };
    config.apply_global(&cli.global)?;
    let seed_explicit = file_seed || cli.global.seed.is_some();
    apply_command(&mut config, &cli.command);

    if cli.global.print_config {
        print!("{}", config.to_toml());
        return Ok(());
    }
    config.check_files()?;
    if let Some(jobs) = config.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }

    // Embedder flags given on this invocation override the one stored in a model.
    let embedder_flag = cli.global.embedder.is_some() || cli.global.sidecar_addr.is_some() || cli.global.dim.is_some();

    match cli.command {
        Command::Stats { .. } => stats(&config),
        Command::Fetch(args) => fetch(&config, &args),
        Command::Preprocess { text, input } => preprocess(&config, text.as_deref(), input.as_deref()),
        Command::Featurize { .. } => featurize(&config),
        Command::Train { .. } => train(&config),
        Command::Evaluate { .. } => evaluate(&config),
        Command::Ablate { .. } => ablate(&config),
        Command::Predict { model, input } => predict(&config, &model, &input, embedder_flag),
        Command::Synth { spec } => synth(&config, &spec, seed_explicit),
    }
}

fn apply_command(config: &mut RunConfig, command: &Command) {
    let set_dataset = |config: &mut RunConfig, dataset: &Option<PathBuf>| {
        if let Some(d) = dataset {
            config.datasets = vec![d.clone()];
        }
    };
    match command {
        Command::Stats { dataset } => set_dataset(config, dataset),
        Command::Featurize { dataset, mode } => {
            set_dataset(config, dataset);
            if let Some(m) = mode {
                config.mode = *m;
            }
        }
        Command::Train {
            dataset,
            classifier,
            mode,
            hyper,
        } => {
            set_dataset(config, dataset);
            if let Some(c) = classifier {
                config.classifier = *c;
            }
            if let Some(m) = mode {
                config.mode = *m;
            }
            config.apply_hyper(hyper);
        }
        Command::Evaluate {
            dataset,
            classifier,
            mode,
            folds,
            chart,
            hyper,
        } => {
            set_dataset(config, dataset);
            if let Some(c) = classifier {
                config.classifier = *c;
            }
            if let Some(m) = mode {
                config.mode = *m;
            }
            if let Some(k) = folds {
                config.folds = *k;
            }
            config.chart |= *chart;
            config.apply_hyper(hyper);
        }
        Command::Ablate {
            datasets,
            synth,
            seeds,
            classifiers,
            folds,
            chart,
            hyper,
        } => {
            if !datasets.is_empty() || !synth.is_empty() {
                config.datasets = datasets.clone();
                config.synth = synth.clone();
            }
            if let Some(n) = seeds {
                config.seeds = *n;
            }
            if let Some(c) = classifiers {
                config.classifiers = c.clone();
            }
            if let Some(k) = folds {
                config.folds = *k;
            }
            config.chart |= *chart;
            config.apply_hyper(hyper);
        }
        Command::Fetch(_) | Command::Preprocess { .. } | Command::Predict { .. } | Command::Synth { .. } => {}
    }
}

fn preprocessor(config: &RunConfig) -> Result<Preprocessor, CliError> {
    Ok(match &config.stopwords {
        Some(path) => Preprocessor::new(StopwordList::from_file(path)?),
        None => Preprocessor::default(),
    })
}

fn embedder(config: &RunConfig) -> Result<Box<dyn Embedder>, CliError> {
    Ok(config.embedder.connect()?)
}

fn single_dataset(config: &RunConfig) -> Result<&Path, CliError> {
    match config.datasets.as_slice() {
        [one] => Ok(one),
        [] => Err(CliError::Usage("no dataset given".into())),
        _ => Err(CliError::Usage("this command takes exactly one dataset".into())),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn stats(config: &RunConfig) -> Result<(), CliError> {
    let ds = load_csv(single_dataset(config)?)?;
    for finding in &ds.validate().findings {
        eprintln!("warning: {finding}");
    }
    let table = ds.stats().to_string();
    print!("{table}");
    if let Some(out) = &config.out {
        std::fs::write(out, &table).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}

fn fetch(config: &RunConfig, args: &FetchArgs) -> Result<(), CliError> {
    let query = TrackerQuery {
        statuses: args.statuses.clone(),
        resolutions: args.resolutions.clone(),
        product: args.product.clone(),
        limit: args.limit,
    };
    let reports =
        fetch_tracker(&args.url, args.token.as_deref(), &query).map_err(|e| CliError::Runtime(e.to_string()))?;
    eprintln!("fetched {} reports", reports.len());
    write_annotation_csv(&reports, output(config.out.as_deref())?)?;
    Ok(())
}

fn preprocess(config: &RunConfig, text: Option<&str>, input: Option<&Path>) -> Result<(), CliError> {
    let pre = preprocessor(config)?;
    let mut out = output(config.out.as_deref())?;
    match (text, input) {
        (Some(text), _) => writeln!(out, "{}", pre.preprocess(text).joined())?,
        (None, Some(path)) => {
            require_file(path)?;
            for r in load_unlabeled(path)? {
                writeln!(out, "{}\t{}", r.id, pre.preprocess(&r.summary).joined())?;
            }
        }
        (None, None) => return Err(CliError::Usage("give a text or --input <csv>".into())),
    }
    out.flush()?;
    Ok(())
}

fn featurize(config: &RunConfig) -> Result<(), CliError> {
    let ds = load_csv(single_dataset(config)?)?;
    let emb = embedder(config)?;
    let embeddings = embed_reports(&ds.reports, &preprocessor(config)?, emb.as_ref())?;
    let fitted = fit_features(&ds, &embeddings, config.mode)?;
    fitted.train.write_csv(output(config.out.as_deref())?)?;
    Ok(())
}

fn train(config: &RunConfig) -> Result<(), CliError> {
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("train needs --out <model file>".into()))?;
    let ds = load_csv(single_dataset(config)?)?;
    let emb = embedder(config)?;
    let features = FeatureConfig {
        mode: config.mode,
        embedder: config.embedder.clone(),
    };
    let model = TrainedPipeline::train(
        &ds,
        &features,
        &config.classifier_config(config.classifier),
        &preprocessor(config)?,
        emb.as_ref(),
        config.seed,
    )?;
    model.save(out)?;
    eprintln!(
        "trained {} on {} reports ({}), saved to {}",
        config.classifier.title(),
        ds.len(),
        config.mode,
        out.display()
    );
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn evaluate(config: &RunConfig) -> Result<(), CliError> {
    let path = single_dataset(config)?;
    let ds = load_csv(path)?;
    let emb = embedder(config)?;
    let input = AblationInput::fixed(dataset_name(path), ds, &preprocessor(config)?, emb.as_ref())?;
    let grid = AblationConfig {
        modes: vec![config.mode],
        classifiers: vec![config.classifier_config(config.classifier)],
        seeds: vec![config.seed],
        k: config.folds,
    };
    let table = run_ablation(&[input], &grid)?;
    let run = &table.runs[0];

    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{} on {} ({}), {} folds, seed {}",
        config.classifier.title(),
        run.dataset,
        run.mode,
        config.folds,
        config.seed
    )?;
    writeln!(
        out,
        "{:<6}{:>10}{:>11}{:>8}{:>11}",
        "fold", "accuracy", "precision", "recall", "f_measure"
    )?;
    let line = |out: &mut dyn Write, name: &str, m: &bugtriage_core::eval::Metrics| {
        writeln!(
            out,
            "{:<6}{:>10.4}{:>11.4}{:>8.4}{:>11.4}",
            name, m.accuracy, m.precision, m.recall, m.f_measure
        )
    };
    for f in &run.folds {
        line(&mut out, &f.fold.to_string(), &f.metrics)?;
    }
    line(&mut out, "mean", &run.mean)?;
    if run.mean.undefined.any() {
        writeln!(
            out,
            "note: some folds had an undefined precision, recall or F-measure (reported as 0)"
        )?;
    }
    write_report(config, &table)
}

fn write_report(config: &RunConfig, table: &AblationTable) -> Result<(), CliError> {
    if let Some(dir) = &config.out {
        for path in render_report(table, dir, config.chart)? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn ablate(config: &RunConfig) -> Result<(), CliError> {
    if config.datasets.is_empty() && config.synth.is_empty() {
        return Err(CliError::Usage("ablate needs a dataset CSV or --synth <spec>".into()));
    }
    if config.classifiers.is_empty() {
        return Err(CliError::Usage("--classifiers is empty".into()));
    }
    let pre = preprocessor(config)?;
    let emb = embedder(config)?;
    let seeds = config.seed_list();

    let mut inputs = Vec::new();
    for path in &config.datasets {
        inputs.push(AblationInput::fixed(
            dataset_name(path),
            load_csv(path)?,
            &pre,
            emb.as_ref(),
        )?);
    }
    for path in &config.synth {
        let spec = SynthSpec::load(path)?;
        inputs.push(AblationInput::synthetic(&spec, &seeds, &pre, emb.as_ref())?);
    }
    let mut names = HashSet::new();
    for input in &inputs {
        if !names.insert(input.name.as_str()) {
            return Err(CliError::Usage(format!("two inputs are named {}", input.name)));
        }
    }

    let grid = AblationConfig {
        modes: FeatureMode::ALL.to_vec(),
        classifiers: config
            .classifiers
            .iter()
            .map(|&k| config.classifier_config(k))
            .collect(),
        seeds,
        k: config.folds,
    };
    let table = run_ablation(&inputs, &grid)?;
    print!("{}", render_table(&table, MetricName::Accuracy));
    write_report(config, &table)
}

fn predict(config: &RunConfig, model_path: &Path, input: &Path, embedder_flag: bool) -> Result<(), CliError> {
    require_file(model_path)?;
    require_file(input)?;
    let model = TrainedPipeline::load(model_path)?;
    let reports = load_unlabeled(input)?;
    let spec = if embedder_flag {
        &config.embedder
    } else {
        &model.features.embedder
    };
    let emb = spec.connect()?;
    let predictions = model.predict(&reports, emb.as_ref())?;

    let score_columns: &[&str] = match &model.classifier {
        TrainedClassifier::Knn(_) => &[],
        TrainedClassifier::Nb(_) => &["posterior_bug", "posterior_non_bug"],
        TrainedClassifier::Lr(_) => &["prob_bug"],
        TrainedClassifier::Svm(_) => &["margin"],
        TrainedClassifier::Rf(_) => &["votes_bug", "votes_non_bug"],
    };

    // Echo the input rows verbatim; `load_unlabeled` has already checked them.
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(input)
        .map_err(csv_err)?;
    let mut header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    header.push("predicted".into());
    header.extend(score_columns.iter().map(|s| s.to_string()));

    let mut w = csv::Writer::from_writer(output(config.out.as_deref())?);
    w.write_record(&header).map_err(csv_err)?;
    for (record, p) in rdr.records().zip(&predictions) {
        let mut row: Vec<String> = record.map_err(csv_err)?.iter().map(str::to_string).collect();
        row.push(p.label.as_str().into());
        match p.score {
            Score::None => {}
            Score::Probability(x) | Score::Margin(x) => row.push(x.to_string()),
            Score::Posterior(ps) => row.extend(ps.iter().map(f64::to_string)),
            Score::Votes(vs) => row.extend(vs.iter().map(usize::to_string)),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => CliError::Runtime(format!("{other:?}")),
    }
}

fn synth(config: &RunConfig, spec_path: &Path, seed_explicit: bool) -> Result<(), CliError> {
    require_file(spec_path)?;
    let mut spec = SynthSpec::load(spec_path)?;
    if seed_explicit {
        spec = spec.with_seed(config.seed);
    }
    let ds: Dataset = generate_synthetic(&spec)?;
    write_csv(&ds, output(config.out.as_deref())?)?;
    Ok(())
}
