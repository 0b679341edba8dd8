use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use pastewatch_bench::{paste_span, sample_class};
use pastewatch_core::clone::find_duplicates;
use pastewatch_core::learn::{examples_of, synthetic, train, Hyper, ModelKind};
use pastewatch_core::metrics::extract_features;
use pastewatch_core::syntax::{locate_fragment, parse_file, Span};

fn parse(c: &mut Criterion) {
    let mut g = c.benchmark_group("parse_file");
    for methods in [10, 100] {
        let src = sample_class(methods);
        g.bench_with_input(BenchmarkId::from_parameter(methods), &src, |b, src| {
            b.iter(|| parse_file(black_box(src), "Ledger.java").unwrap())
        });
    }
    g.finish();
}

fn duplicates_and_features(c: &mut Criterion) {
    let src = sample_class(100);
    let tree = parse_file(&src, "Ledger.java").unwrap();
    let (start, end) = paste_span(&src);
    let (method, fragment) = locate_fragment(&tree, Span::new(start, end)).unwrap();
    c.bench_function("find_duplicates/100", |b| {
        b.iter(|| find_duplicates(black_box(&fragment), &tree, 0.8).unwrap())
    });
    c.bench_function("extract_features", |b| {
        b.iter(|| extract_features(black_box(&fragment), method).unwrap())
    });
}

fn predict(c: &mut Criterion) {
    let data = examples_of(&synthetic::separable(500, 1));
    let x = data[0].x.clone();
    let mut g = c.benchmark_group("predict");
    for kind in [ModelKind::Logistic, ModelKind::Forest, ModelKind::Bayes] {
        let model = train(&Hyper::default_for(kind, 1), &data).unwrap();
        g.bench_function(kind.to_string(), |b| b.iter(|| model.predict_proba(black_box(&x)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, parse, duplicates_and_features, predict);
criterion_main!(benches);
