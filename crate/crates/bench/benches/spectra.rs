use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use oqs_bench::{channel, generator, operator_set, SEED};
use oqs_core::analysis::{analyze, AnalysisOptions};
use oqs_core::campaign::{run_campaign, CampaignConfig};
use oqs_core::commutant::{self, JordanProfile, WeyrTolerances};
use oqs_core::constructions::{self, stream_rng};
use oqs_core::{linalg, spectra, Ensemble, SpectralTolerances, Subject};

const DIMS: [usize; 4] = [2, 3, 4, 6];

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenvalues");
    for d in DIMS {
        let m = channel(d).superop().clone();
        group.bench_with_input(BenchmarkId::from_parameter(d * d), &m, |b, m| {
            b.iter(|| linalg::eigenvalues(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn summaries(c: &mut Criterion) {
    let tols = SpectralTolerances::default();
    let mut group = c.benchmark_group("summarize");
    for d in DIMS {
        let ch = channel(d);
        let g = generator(d);
        group.bench_with_input(BenchmarkId::new("channel", d), &ch, |b, ch| {
            b.iter(|| spectra::summarize_channel(black_box(ch), &tols).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("generator", d), &g, |b, g| {
            b.iter(|| spectra::summarize_generator(black_box(g), &tols).unwrap())
        });
    }
    group.finish();
}

fn commutants(c: &mut Criterion) {
    let mut group = c.benchmark_group("commutant");
    for d in DIMS {
        let ops = operator_set(d);
        group.bench_with_input(BenchmarkId::new("nullspace", d), &ops, |b, ops| {
            b.iter(|| commutant::commutant(black_box(ops), 0.0).unwrap())
        });
        let profile: JordanProfile =
            constructions::random_jordan_profile(&mut stream_rng(SEED, d as u64), d, 3).unwrap();
        let (m, _) =
            constructions::planted_jordan_matrix(&mut stream_rng(SEED, 50 + d as u64), &profile, 10.0).unwrap();
        group.bench_with_input(BenchmarkId::new("weyr", d), &m, |b, m| {
            b.iter(|| commutant::weyr_profile(black_box(m), &WeyrTolerances::default()).unwrap())
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let options = AnalysisOptions::default();
    let mut group = c.benchmark_group("analyze");
    for d in [2, 4] {
        let subject = Subject::Channel(channel(d));
        group.bench_with_input(BenchmarkId::new("channel", d), &subject, |b, s| {
            b.iter(|| analyze(black_box(s), &options).unwrap())
        });
    }
    group.finish();

    let mut config = CampaignConfig::new(SEED, vec![2, 3], 4, Ensemble::ALL.to_vec());
    config.threads = Some(1);
    c.bench_function("campaign/small", |b| {
        b.iter(|| run_campaign(black_box(&config)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = eigensolver, summaries, commutants, pipeline
}
criterion_main!(benches);
