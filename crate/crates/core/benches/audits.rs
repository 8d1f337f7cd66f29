//! Pool-parallel versus single-worker runs of the heavier audits. Without the
//! `parallel` feature both variants are the same sequential loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use forge_core::dkq::{CdGraph, CdParams};
use forge_core::lps::lps_graph;
use forge_core::par;
use forge_core::verify::expansion::{expansion_audit, AuditOptions, Threshold};
use forge_core::verify::girth::girth;
use forge_core::verify::spectral::lambda2_bipartite;
use forge_core::{DenseBipartiteGraph, Side};

fn modes(c: &mut Criterion, name: &str, mut run: impl FnMut() + Send) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("pool", par::workers()), |b| b.iter(&mut run));
    group.bench_function(BenchmarkId::new("single", 1), |b| b.iter(|| par::single_threaded(&mut run)));
    group.finish();
}

fn benches(c: &mut Criterion) {
    let lps = DenseBipartiteGraph::from_explicit(&lps_graph(5, 13).unwrap()).unwrap();
    let cd = DenseBipartiteGraph::from_explicit(&CdGraph::new(CdParams::new(7, 3, &[1, 2], &[1, 2]).unwrap()).unwrap()).unwrap();

    modes(c, "expansion-exhaustive-lps-t2", || {
        let threshold = Threshold::UniqueNeighborCount { min: 1 };
        std::hint::black_box(expansion_audit(&lps, Side::Left, 2, threshold, &AuditOptions::default()));
    });
    modes(c, "expansion-sampled-cd-t8", || {
        let opts = AuditOptions {
            budget: 0,
            ..AuditOptions::default()
        };
        let threshold = Threshold::NeighborRatio { epsilon: 0.5 };
        std::hint::black_box(expansion_audit(&cd, Side::Left, 8, threshold, &opts));
    });
    modes(c, "girth-lps", || {
        std::hint::black_box(girth(&lps.to_graph()));
    });
    modes(c, "spectral-lps", || {
        std::hint::black_box(lambda2_bipartite(&lps).unwrap());
    });
}

criterion_group!(audit_benches, benches);
criterion_main!(audit_benches);
