use criterion::{black_box, criterion_group, criterion_main, Criterion};

use passgraph::oracle::brute::brute_wilcoxon;
use passgraph::protocol::{run, Settings};
use passgraph::scorepart::enumerate_partitions;
use passgraph::{profile_of, wilcoxon_signed_rank, Alternative, Metric, SearchParams, WindowParams};
use passgraph_bench::fixture;

fn profiles(c: &mut Criterion) {
    let data = fixture(4, 1);
    let params = WindowParams::default();
    c.bench_function("profile_of 4 games", |b| b.iter(|| profile_of(black_box(&data).possessions(), &params).unwrap()));
}

fn search(c: &mut Criterion) {
    let data = fixture(8, 2);
    let scores: Vec<i32> = data.possessions().map(|p| p.relative_score).collect();
    c.bench_function("enumerate_partitions", |b| {
        b.iter(|| enumerate_partitions(black_box(&scores), &SearchParams::default()))
    });
    let analysis = Settings::default().analysis().unwrap();
    let team = data.teams()[0].to_string();
    let poss: Vec<_> = data.possessions_of(&team).collect();
    c.bench_function("best_partition se", |b| {
        b.iter(|| passgraph::best_partition(black_box(&poss), Metric::Se, &analysis, &SearchParams::default()))
    });
}

fn wilcoxon(c: &mut Criterion) {
    let a: Vec<f64> = (0..20).map(|i| (i * 7 % 11) as f64 + 0.5).collect();
    let b: Vec<f64> = (0..20).map(|i| (i * 5 % 13) as f64).collect();
    c.bench_function("wilcoxon exact n=20", |bch| {
        bch.iter(|| wilcoxon_signed_rank(black_box(&a), black_box(&b), Alternative::TwoSided).unwrap())
    });
    c.bench_function("wilcoxon enumeration n=12", |bch| {
        bch.iter(|| brute_wilcoxon(black_box(&a[..12]), black_box(&b[..12])))
    });
}

fn report(c: &mut Criterion) {
    let data = fixture(2, 42);
    let settings = Settings::default();
    c.bench_function("report demo-sized", |b| b.iter(|| run(black_box(&data), &settings).unwrap()));
}

criterion_group!(benches, profiles, search, wilcoxon, report);
criterion_main!(benches);
