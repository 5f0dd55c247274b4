use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use grounding_bench::case_session;
use grounding_core::bn::{EvidenceAssignment, JunctionTree};

const DAMAGE: [&str; 3] = ["D_t", "D_v", "Y_D"];

fn compile(c: &mut Criterion) {
    let mut g = c.benchmark_group("compile");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    for name in ["case1", "scenarioB"] {
        let session = case_session(name);
        let net = session.compiled().model.network().clone();
        g.bench_function(name, |b| b.iter(|| JunctionTree::compile(&net).unwrap()));
    }
    g.finish();
}

fn infer(c: &mut Criterion) {
    let mut g = c.benchmark_group("infer");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    for name in ["case1", "scenarioB"] {
        let session = case_session(name);
        let tree = &session.compiled().tree;
        let query: Vec<&str> = DAMAGE
            .into_iter()
            .filter(|n| session.compiled().model.network().node(n).is_some())
            .collect();
        let prior = EvidenceAssignment::new();
        g.bench_function(format!("{name}/prior"), |b| {
            b.iter(|| tree.infer_marginals(&prior, &query).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, compile, infer);
criterion_main!(benches);
