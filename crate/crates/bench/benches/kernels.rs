use criterion::{black_box, criterion_group, criterion_main, Criterion};
use partdet::algebra::{dihedral_group, nary_sumset};
use partdet::hypergraph::{min_covering_lp, minimal_multiset, dominates, DEFAULT_DOMINATION_BUDGET};
use partdet::inequalities::{check_entropy_submodularity_all_pairs, check_full_compound, check_nonabelian};
use partdet::pdfunc::{is_strongly_partition_determined, DEFAULT_TUPLE_BUDGET};
use partdet::search::{run_search, SearchScenario, StatementId};
use partdet_bench::{mixed_family, progressions, sum_instance, uniform_marginals};

fn sumsets(c: &mut Criterion) {
    let sets = progressions(64, 4, 6);
    let g = partdet::algebra::cyclic_group(64);
    let refs: Vec<&[_]> = sets.iter().map(Vec::as_slice).collect();
    c.bench_function("nary_sumset Z64 k=4 |X|=6", |b| b.iter(|| nary_sumset(&g, black_box(&refs)).unwrap()));
    let d5 = dihedral_group(5);
    let xs = progressions(10, 4, 3);
    c.bench_function("check_nonabelian D5 k=4", |b| b.iter(|| check_nonabelian(&d5, black_box(&xs)).unwrap()));
}

fn pd_check(c: &mut Criterion) {
    c.bench_function("strong PD Z12 k=4 |X|=3", |b| {
        b.iter(|| {
            // fresh function each time so the memo does not carry over
            let (_, f) = sum_instance(12, 4, 3).unwrap();
            is_strongly_partition_determined(&f, DEFAULT_TUPLE_BUDGET).unwrap()
        })
    });
}

fn hypergraph(c: &mut Criterion) {
    let fam = mixed_family(5);
    c.bench_function("min_covering_lp 20 members on [5]", |b| b.iter(|| min_covering_lp(black_box(&fam)).unwrap()));
    let a = partdet::hypergraph::SubsetFamily::parse(4, "{1,2} {2,3} {3,4} {1,4}").unwrap();
    let sharp = minimal_multiset(&a);
    c.bench_function("dominates BFS 4-cycle", |b| {
        b.iter(|| dominates(black_box(&a), &sharp, DEFAULT_DOMINATION_BUDGET).unwrap())
    });
    let (_, f) = sum_instance(10, 3, 3).unwrap();
    let lp = min_covering_lp(&partdet::hypergraph::SubsetFamily::all_of_size(3, 2)).unwrap();
    c.bench_function("check_full_compound Z10 k=3", |b| b.iter(|| check_full_compound(&f, black_box(&lp)).unwrap()));
}

fn entropy(c: &mut Criterion) {
    let (_, f) = sum_instance(7, 3, 3).unwrap();
    let ms = uniform_marginals(&f);
    c.bench_function("entropy submodularity all pairs Z7 k=3", |b| {
        b.iter(|| check_entropy_submodularity_all_pairs(&f, black_box(&ms)).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let s = SearchScenario::new(StatementId::Nonabelian, 3, 3, 200, 1).with_groups(&["D4", "Q8"]);
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("nonabelian 200 trials", |b| b.iter(|| run_search(black_box(&s)).unwrap()));
    group.finish();
}

criterion_group!(benches, sumsets, pd_check, hypergraph, entropy, search);
criterion_main!(benches);
