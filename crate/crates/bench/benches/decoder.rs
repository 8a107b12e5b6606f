use adaqec_bench::{dense_problem, uniform_dem, DecodeFixture};
use adaqec_core::decoder::decode;
use adaqec_core::harness::{logical_error_rate, DecoderTables, TestSet};
use adaqec_core::matching::min_weight_perfect_matching;
use adaqec_core::weights::{weights_all, Backend};
use adaqec_core::NoiseSchedule;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("matching");
    for n in [4, 16, 64] {
        let problem = dense_problem(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| min_weight_perfect_matching(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("weights");
    for (d, rounds) in [(3, 100), (5, 100)] {
        let model = uniform_dem(d, rounds, 0.005);
        for backend in [Backend::Exact, Backend::Dijkstra] {
            group.bench_function(format!("{backend:?}/d{d}x{rounds}"), |b| {
                b.iter(|| weights_all(black_box(&model), backend).unwrap())
            });
        }
    }
    group.finish();
}

fn decoding(c: &mut Criterion) {
    let fx = DecodeFixture::new(5, 100, 0.01, 200, Backend::Exact);
    c.bench_function("decode/d5x100/200 trials", |b| {
        b.iter(|| fx.records.iter().filter(|r| decode(r, &fx.table).is_ok()).count())
    });

    let schedule = NoiseSchedule::uniform(3, 0.005).unwrap();
    let test = TestSet::sample(&schedule, 1, 100, 1000, 7, 0).unwrap();
    let tables = DecoderTables::build(&schedule.window(0), &test, Backend::Exact).unwrap();
    let mut group = c.benchmark_group("logical_error_rate");
    group.sample_size(10);
    group.bench_function("d3x100/1000 trials", |b| b.iter(|| logical_error_rate(&tables, &test).unwrap()));
    group.finish();
}

criterion_group!(benches, matching, weights, decoding);
criterion_main!(benches);
