use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hodge_cstar::config::{RunConfig, SuiteCounts};
use hodge_cstar::par::Execution;
use hodge_cstar::suite;

fn config(execution: Execution) -> RunConfig {
    RunConfig {
        seed: 20_240_917,
        counts: SuiteCounts {
            complexes: 100,
            cohomology: 40,
            split_morphisms: 40,
            split_complexes: 40,
            symbol_samples: 40,
            coefficient_pairs: 4,
            covectors: 16,
            sections: 100,
            regularity: 40,
        },
        execution,
        ..RunConfig::default()
    }
}

fn sequential_vs_parallel(c: &mut Criterion) {
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let cfg = config(exec);
        let mut g = c.benchmark_group(name);
        g.sample_size(10);
        g.bench_function("complexes", |b| b.iter(|| black_box(suite::complex_suite(&cfg).unwrap())));
        g.bench_function("cohomology", |b| b.iter(|| black_box(suite::cohomology_suite(&cfg).unwrap())));
        g.bench_function("embedding", |b| b.iter(|| black_box(suite::embedding_suite(&cfg).unwrap())));
        g.bench_function("regularity", |b| b.iter(|| black_box(suite::regularity_suite(&cfg).unwrap())));
        g.finish();
    }
}

criterion_group!(benches, sequential_vs_parallel);
criterion_main!(benches);
