//! Parallel against sequential execution.
//!
//! `engine/*` compares node stepping on and off the thread pool within one
//! build. The `pipeline/*` ids carry the build mode; run once with default
//! features and once with `--no-default-features` to get both sides.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kecss::augment::{kecss, KecssConfig};
use kecss::congest::{SimConfig, Simulator};
use kecss::gen;
use kecss::graph::mst;
use kecss::par;
use kecss::respect::{build_packing, PackingMode};
use kecss::rho::{estimate_rho, RhoConfig};
use kecss::tree::dist::{GlobalTree, NetTree};
use kecss::tree::{default_target, SpanTree};

fn mode() -> &'static str {
    if par::enabled() {
        "parallel"
    } else {
        "sequential"
    }
}

fn engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine");
    group.sample_size(10);
    for n in [256usize, 1024] {
        let g = gen::path_of_cliques(n, 2, 100, 1).unwrap();
        let tree = SpanTree::new(&g, &mst(&g).unwrap(), 0).unwrap();
        let stepping: &[bool] = if par::enabled() { &[false, true] } else { &[false] };
        for &parallel in stepping {
            let label = if parallel { "parallel" } else { "sequential" };
            group.bench_with_input(BenchmarkId::new(format!("cover-values/{label}"), n), &g, |b, g| {
                b.iter(|| {
                    let mut sim = Simulator::new(g, SimConfig { parallel, ..SimConfig::default() }, 1);
                    let global = GlobalTree::build(&mut sim, 0).unwrap();
                    let net = NetTree::setup(&mut sim, &global, g, &tree, default_target(g.n())).unwrap();
                    net.cover_values(&mut sim, &global, g).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);

    let g = gen::random_kconnected(24, 3, 12, 200, 4).unwrap();
    group.bench_function(BenchmarkId::new("oracle-packing", mode()), |b| {
        b.iter(|| build_packing(&g, PackingMode::Oracle, 1, None).unwrap())
    });

    let h = mst(&g).unwrap();
    let cfg = RhoConfig { packing: PackingMode::Faithful, trees: Some(4), ..RhoConfig::default() };
    group.bench_function(BenchmarkId::new("estimate-rho", mode()), |b| {
        b.iter(|| estimate_rho(&g, &h, 1, &cfg, 2).unwrap())
    });

    let small = gen::random_kconnected(12, 2, 6, 30, 7).unwrap();
    let restarts = KecssConfig { restarts: 4, ..KecssConfig::default() };
    group.bench_function(BenchmarkId::new("kecss-restarts", mode()), |b| {
        b.iter(|| kecss(&small, 2, &restarts, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, engine, pipeline);
criterion_main!(benches);
