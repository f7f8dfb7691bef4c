use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use kflow::attribution::half;
use kflow::specialization::index_table;
use kflow::synthkit::{brute_force_gains, generate_corpus, GeneratorConfig};
use kflow::{
    attribute_corpus, compute_gains, compute_gains_parallel, flow_matrix, max_flow_edges, rbkf_overall,
    BalassaMode, DualGainWeight, GainScope, GainTensor, Orientation,
};

fn config(n_pubs: usize) -> GeneratorConfig {
    GeneratorConfig {
        seed: 42,
        n_pubs,
        n_regions: 20,
        n_scs: 40,
        ..GeneratorConfig::default()
    }
}

fn gains(c: &mut Criterion) {
    let mut group = c.benchmark_group("gains");
    for n in [1_000, 10_000] {
        let corpus = generate_corpus(&config(n)).unwrap().corpus;
        let made_in = attribute_corpus(&corpus, half()).unwrap();
        group.bench_with_input(BenchmarkId::new("serial", n), &n, |b, _| {
            b.iter(|| compute_gains(black_box(&corpus), &made_in))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| compute_gains_parallel(black_box(&corpus), &made_in, 8))
        });
        if n <= 1_000 {
            group.bench_with_input(BenchmarkId::new("oracle", n), &n, |b, _| {
                b.iter(|| brute_force_gains(black_box(&corpus)))
            });
        }
    }
    group.finish();
}

fn downstream(c: &mut Criterion) {
    let corpus = generate_corpus(&config(10_000)).unwrap().corpus;
    let made_in = attribute_corpus(&corpus, half()).unwrap();
    let gains = compute_gains(&corpus, &made_in);
    let regions = corpus.gazetteer().regions();

    c.bench_function("attribute_10000", |b| b.iter(|| attribute_corpus(black_box(&corpus), half())));
    c.bench_function("matrix_rbkf_edges", |b| {
        b.iter(|| {
            let m = flow_matrix(black_box(&gains), regions, DualGainWeight::Full).unwrap();
            (rbkf_overall(&m), max_flow_edges(&m))
        })
    });
    let tensor = GainTensor::from_gains(
        &gains,
        &corpus,
        Orientation::Generated,
        GainScope::All,
        DualGainWeight::Full,
    )
    .unwrap();
    c.bench_function("index_table", |b| {
        b.iter(|| index_table(black_box(&tensor), BalassaMode::ExcludeFocal))
    });
}

criterion_group!(benches, gains, downstream);
criterion_main!(benches);
