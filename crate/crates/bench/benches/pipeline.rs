use std::hint::black_box;

use bugtriage_bench::corpus;
use bugtriage_core::classifiers::{ClassifierKind, LabeledMatrix};
use bugtriage_core::eval::{cross_validate, fit_features, PreparedDataset};
use bugtriage_core::features::{embed_reports, HashingEmbedder};
use bugtriage_core::preprocess::Preprocessor;
use bugtriage_core::FeatureMode;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn preprocessing(c: &mut Criterion) {
    let ds = corpus("eclipse");
    let pre = Preprocessor::default();
    let emb = HashingEmbedder::default();
    let mut group = c.benchmark_group("text");
    group.throughput(Throughput::Elements(ds.len() as u64));
    group.bench_function("preprocess", |b| {
        b.iter(|| {
            for r in &ds.reports {
                black_box(pre.preprocess(&r.summary));
            }
        })
    });
    group.bench_function("preprocess+embed", |b| {
        b.iter(|| black_box(embed_reports(&ds.reports, &pre, &emb).unwrap()))
    });
    group.finish();
}

fn classifiers(c: &mut Criterion) {
    let ds = corpus("apache");
    let embeddings = embed_reports(&ds.reports, &Preprocessor::default(), &HashingEmbedder::default()).unwrap();
    let fitted = fit_features(&ds, &embeddings, FeatureMode::TextFreqIntention).unwrap();
    let train = LabeledMatrix::new(fitted.train, ds.labels()).unwrap();

    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for kind in ClassifierKind::ALL {
        let config = kind.default_config();
        group.bench_with_input(BenchmarkId::from_parameter(kind.as_str()), &train, |b, train| {
            b.iter(|| black_box(config.fit(train, 7).unwrap()))
        });
    }
    group.finish();
}

fn cross_validation(c: &mut Criterion) {
    let data = PreparedDataset::new(
        "apache",
        corpus("apache"),
        &Preprocessor::default(),
        &HashingEmbedder::default(),
    )
    .unwrap();
    let mut group = c.benchmark_group("cv10");
    group.sample_size(10);
    for kind in [ClassifierKind::Lr, ClassifierKind::Rf] {
        let config = kind.default_config();
        group.bench_function(kind.as_str(), |b| {
            b.iter(|| black_box(cross_validate(&data, FeatureMode::TextFreqIntention, &config, 10, 3).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, preprocessing, classifiers, cross_validation);
criterion_main!(benches);
