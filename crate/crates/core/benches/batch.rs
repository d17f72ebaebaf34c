use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use spectral_gate::corpus::{discrete_corpus, random_jacobi, CorpusEntry, CORPUS_SEED};
use spectral_gate::eigenfunctions::{edge_growth_check, solve_edge, Edge};
use spectral_gate::oracle::eig_count_above;
use spectral_gate::parallel;
use spectral_gate::verblunsky::gamma_from_jacobi;
use spectral_gate::{JacobiCoeffs, Tolerances};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const HORIZON: usize = 20_000;

fn certify_and_grow(e: &CorpusEntry) -> bool {
    let j = JacobiCoeffs::schrodinger(&e.potential.padded(HORIZON));
    let cert = gamma_from_jacobi(&j, HORIZON, &Tolerances::default()).expect("long enough");
    let u = solve_edge(&j, Edge::Plus, HORIZON).expect("long enough");
    cert.is_certified() && edge_growth_check(&u).pass
}

fn corpus_batch(c: &mut Criterion) {
    let corpus = discrete_corpus(HORIZON, CORPUS_SEED, 200).expect("corpus");
    let mut g = c.benchmark_group("corpus_certify_edge");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| parallel::map_seq(black_box(&corpus), certify_and_grow))
    });
    g.bench_function("parallel", |b| b.iter(|| parallel::map(black_box(&corpus), certify_and_grow)));
    g.finish();
}

fn sturm_batch(c: &mut Criterion) {
    let mut g = c.benchmark_group("sturm_counts");
    g.sample_size(10);
    for n in [200usize, 2000] {
        let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
        let j = random_jacobi(&mut rng, n);
        let count = |i: usize| eig_count_above(&j, n, -4.0 + 8.0 * i as f64 / 512.0).expect("sites");
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| parallel::map_range_seq(0..512, count))
        });
        g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| parallel::map_range(0..512, count))
        });
    }
    g.finish();
}

criterion_group!(benches, corpus_batch, sturm_batch);
criterion_main!(benches);
