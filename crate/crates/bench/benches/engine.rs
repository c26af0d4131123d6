use std::collections::BTreeSet;

use closurelab::constructions::{build_path_witness, ChainBuilder, EnumerationSource, LimitFunction, PathWitness, Vertex};
use closurelab::{
    cl_fixpoint, count_solutions, parse_formula, set_membership, Element, SolutionCountSet, SortId, StageBudget,
};
use closurelab_bench::graph;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(n: u64, density: f64, seed: u64) -> closurelab::StructureSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = |rng: &mut ChaCha8Rng| {
        (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(density))
            .collect::<Vec<_>>()
    };
    let e = edges(&mut rng);
    let r = edges(&mut rng);
    graph(n, &e, &r)
}

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("count_solutions");
    let b = StageBudget::new(64, 8, 4096).unwrap();
    for n in [8u64, 16, 32] {
        let s = random_graph(n, 0.2, n);
        let pf = parse_formula("p(x;y) := E z : X . E(x,z) & R(z,y)", &s.sig).unwrap();
        let a = [Element::new(SortId(0), 0)];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| count_solutions(&s, &pf, black_box(&a), &b).unwrap())
        });
    }
    group.finish();
}

fn closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("cl_fixpoint");
    let b = StageBudget::new(64, 64, 4096).unwrap();
    for n in [8u64, 16, 32] {
        let s = random_graph(n, 0.1, 100 + n);
        let phis = vec![
            parse_formula("E(x;y)", &s.sig).unwrap(),
            parse_formula("p(x,z;y) := R(x,y) & E(y,z)", &s.sig).unwrap(),
        ];
        let base: BTreeSet<Element> = [Element::new(SortId(0), 0)].into();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| cl_fixpoint(&s, &phis, black_box(&base), &SolutionCountSet::AllOfN, &b).unwrap())
        });
    }
    group.finish();
}

fn path_witness(c: &mut Criterion) {
    let src = EnumerationSource::new(vec![(0, 3), (1, 0), (2, 6)], vec![3]).unwrap();
    let pw = build_path_witness(&src).unwrap();
    let gamma = vec![parse_formula("F(x,y;z)", &pw.structure.sig).unwrap()];
    let b = StageBudget::new(200, 16, 8).unwrap();
    let a = PathWitness::element(Vertex::A(2)).unwrap();
    let target = PathWitness::element(Vertex::B(2)).unwrap();
    c.bench_function("path_witness_dcl", |bench| {
        bench.iter(|| {
            set_membership(&pw.structure, &gamma, &[a].into(), &SolutionCountSet::singleton(), target, &b).unwrap()
        })
    });
}

fn chain_graph(c: &mut Criterion) {
    c.bench_function("chain_builder_20_stages", |bench| {
        bench.iter(|| {
            let mut builder = ChainBuilder::new(LimitFunction::new(|n, s| u64::from(s > n)));
            builder.run_to(black_box(20)).unwrap();
            builder.inventory().horizon()
        })
    });
}

criterion_group!(benches, counting, closure, path_witness, chain_graph);
criterion_main!(benches);
