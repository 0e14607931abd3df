use std::collections::BTreeSet;

use num_traits::{One, Zero};
use proptest::prelude::*;

use partdet::algebra::{group_by_name, nary_sumset, sumset_size, ElementId, FiniteGroup, GroundFamily};
use partdet::entropy::{
    conditional_entropy_bits, entropy_bits, is_determined_by, mutual_information_bits, product_distribution,
    pushforward, uniformizing_joint, JointDistribution, Marginal, Rational, Var,
};
use partdet::hypergraph::{
    degree_covering, dominates, elementary_compression, minimal_multiset, min_covering_lp, regular_covering,
    replay_compressions, Domination, FractionalCovering, SubsetFamily,
};
use partdet::inequalities::{
    check_abelian_sumset, check_full_compound, check_nonabelian, check_projection_bound, Status,
};
use partdet::pdfunc::{
    builtin_projection, builtin_sum, compound_image, is_partition_determined, is_strongly_partition_determined,
    SubsetMask, Value, DEFAULT_TUPLE_BUDGET,
};
use partdet::representatives::{lex_min_representatives, sections_determined, verify_section_injectivity};

const ABELIAN: [&str; 5] = ["Z5", "Z6", "Z7", "Z2xZ2", "Z2xZ4"];
const ANY: [&str; 7] = ["Z5", "Z6", "Z2xZ2", "D3", "D4", "Q8", "Z2xZ3"];

fn ids(v: &BTreeSet<usize>) -> Vec<ElementId> {
    v.iter().map(|&i| ElementId(i)).collect()
}

/// A named group with `k` nonempty subsets of at most `max` elements.
fn group_sets(names: &'static [&'static str], k: usize, max: usize) -> impl Strategy<Value = (FiniteGroup, Vec<Vec<ElementId>>)> {
    prop::sample::select(names).prop_flat_map(move |name| {
        let g = group_by_name(name).unwrap();
        let n = g.order();
        let sets = prop::collection::vec(prop::collection::btree_set(0..n, 1..=max.min(n)), k);
        (Just(g), sets.prop_map(|v| v.iter().map(ids).collect::<Vec<_>>()))
    })
}

fn family(k: usize) -> impl Strategy<Value = SubsetFamily> {
    prop::collection::vec(1u32..(1 << k), 1..=4)
        .prop_map(move |bits| SubsetFamily::new(k, bits.into_iter().map(SubsetMask::from_bits).collect()).unwrap())
}

fn covering_family(k: usize) -> impl Strategy<Value = SubsetFamily> {
    family(k).prop_map(move |f| {
        let mut members = f.members().to_vec();
        for i in 0..k {
            if !members.iter().any(|s| s.contains(i)) {
                members.push(SubsetMask::singleton(i));
            }
        }
        SubsetFamily::new(k, members).unwrap()
    })
}

fn joint(k: usize, q: usize) -> impl Strategy<Value = JointDistribution> {
    let tuples = prop::collection::vec(prop::collection::vec(0..q, k), 1..=8);
    (tuples, prop::collection::vec(1i64..=20, 8)).prop_map(move |(ts, ws)| {
        let mut atoms: std::collections::BTreeMap<Vec<ElementId>, i64> = Default::default();
        for (t, w) in ts.into_iter().zip(ws) {
            *atoms.entry(t.into_iter().map(ElementId).collect()).or_default() += w;
        }
        let total: i64 = atoms.values().sum();
        JointDistribution::from_atoms(k, atoms.into_iter().map(|(t, w)| (t, Rational::new(w.into(), total.into()))))
            .unwrap()
    })
}

fn coords(m: &[usize]) -> Var {
    Var::Coords(SubsetMask::from_one_based(m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sumset_size_bounds((g, xs) in group_sets(&ANY, 3, 4)) {
        let refs: Vec<&[ElementId]> = xs.iter().map(Vec::as_slice).collect();
        let n = sumset_size(&g, &refs);
        let largest = xs.iter().map(Vec::len).max().unwrap();
        let product: usize = xs.iter().map(Vec::len).product();
        prop_assert!(largest <= n && n <= product.min(g.order()));
    }

    #[test]
    fn sumset_is_associative((g, xs) in group_sets(&ANY, 3, 4)) {
        let ab: Vec<ElementId> = nary_sumset(&g, &[&xs[0], &xs[1]]).unwrap().into_iter().collect();
        let bc: Vec<ElementId> = nary_sumset(&g, &[&xs[1], &xs[2]]).unwrap().into_iter().collect();
        prop_assert_eq!(nary_sumset(&g, &[&ab, &xs[2]]).unwrap(), nary_sumset(&g, &[&xs[0], &bc]).unwrap());
    }

    #[test]
    fn relabeling_preserves_every_verdict((g, xs) in group_sets(&ANY, 3, 3), shift in 1usize..64) {
        let n = g.order();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let h = g.relabel(&perm);
        let ys: Vec<Vec<ElementId>> = xs.iter().map(|x| x.iter().map(|e| ElementId(perm[e.0])).collect()).collect();
        let a = check_nonabelian(&g, &xs).unwrap();
        let b = check_nonabelian(&h, &ys).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.lhs, b.lhs);
        prop_assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn abelian_sums_are_strongly_partition_determined((g, xs) in group_sets(&ABELIAN, 3, 3)) {
        let f = builtin_sum(&g, GroundFamily::new(g.order(), xs.clone()).unwrap()).unwrap();
        prop_assert!(is_strongly_partition_determined(&f, DEFAULT_TUPLE_BUDGET).unwrap().holds);
        let image: BTreeSet<Value> = compound_image(&f, f.full_mask()).unwrap();
        let refs: Vec<&[ElementId]> = xs.iter().map(Vec::as_slice).collect();
        let direct: BTreeSet<Value> = nary_sumset(&g, &refs).unwrap().into_iter().map(Value::GroupElem).collect();
        prop_assert_eq!(image, direct);
    }

    #[test]
    fn projections_are_partition_determined(sizes in prop::collection::vec(1usize..=3, 3), fam in family(3)) {
        let sets: Vec<Vec<ElementId>> = sizes.iter().map(|&m| (0..m).map(ElementId).collect()).collect();
        let f = builtin_projection(GroundFamily::new(3, sets).unwrap()).unwrap();
        prop_assert!(is_partition_determined(&f, fam.members(), DEFAULT_TUPLE_BUDGET).unwrap().holds);
    }

    #[test]
    fn entropy_chain_rule_and_bounds(d in joint(3, 3)) {
        let h12 = entropy_bits(&d, &[coords(&[1, 2])]);
        let h1 = entropy_bits(&d, &[coords(&[1])]);
        let h2g1 = conditional_entropy_bits(&d, &[coords(&[2])], &[coords(&[1])]);
        prop_assert!((h12 - (h1 + h2g1)).abs() < 1e-9);
        prop_assert!(h1 >= -1e-12 && h1 <= h12 + 1e-9);
        let support = d.len() as f64;
        prop_assert!(entropy_bits(&d, &[coords(&[1, 2, 3])]) <= support.log2() + 1e-9);
        let mi = mutual_information_bits(&d, &[coords(&[1])], &[coords(&[3])], &[coords(&[2])]);
        prop_assert!(mi >= -1e-9);
    }

    #[test]
    fn data_processing_for_sums((g, xs) in group_sets(&ABELIAN, 3, 3), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = builtin_sum(&g, GroundFamily::new(g.order(), xs.clone()).unwrap()).unwrap();
        let ms: Vec<Marginal> = xs.iter().map(|x| Marginal::random(&mut rng, x)).collect();
        let d = product_distribution(&ms);
        for s in SubsetMask::all(3) {
            let hf = entropy_bits(&d, &[Var::Func(f.clone(), s)]);
            let hz = entropy_bits(&d, &[Var::Coords(s)]);
            prop_assert!(hf <= hz + 1e-9);
            prop_assert!(is_determined_by(&d, &[Var::Func(f.clone(), s)], &[Var::Coords(s)]));
        }
    }

    #[test]
    fn uniformizing_pushforward_is_uniform((g, xs) in group_sets(&ABELIAN, 3, 3)) {
        let f = builtin_sum(&g, GroundFamily::new(g.order(), xs).unwrap()).unwrap();
        let d = uniformizing_joint(&f).unwrap();
        let push = pushforward(&d, &f, f.full_mask());
        let n = compound_image(&f, f.full_mask()).unwrap().len();
        prop_assert_eq!(push.len(), n);
        let expected = Rational::new(1.into(), (n as i64).into());
        prop_assert!(push.values().all(|p| *p == expected));
    }

    #[test]
    fn compression_increases_weight(a in family(4), i in 0usize..4, j in 0usize..4) {
        prop_assume!(i < a.len() && j < a.len() && i != j);
        if let Ok(b) = elementary_compression(&a, i, j) {
            prop_assert!(b.compression_weight() > a.compression_weight());
            prop_assert_eq!(b.degrees(), a.degrees());
        }
    }

    #[test]
    fn minimal_multiset_is_idempotent_and_reachable(a in family(4)) {
        let m = minimal_multiset(&a);
        prop_assert_eq!(minimal_multiset(&m), m.clone());
        prop_assert_eq!(m.degrees(), a.degrees());
        prop_assert!(m.is_chain());
        match dominates(&a, &m, 100_000).unwrap() {
            Domination::Yes { steps } => {
                let chain = replay_compressions(&a, &steps).unwrap();
                prop_assert_eq!(chain.last().unwrap().canonical(), m.canonical());
                for w in chain.windows(2) {
                    prop_assert!(w[1].compression_weight() > w[0].compression_weight());
                }
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn lp_covering_is_optimal_among_constructed(fam in covering_family(4)) {
        let lp = min_covering_lp(&fam).unwrap();
        let total = lp.total();
        prop_assert!(total >= Rational::one() && total <= Rational::from_integer(4.into()));
        prop_assert!((0..4).all(|i| lp.coverage(i) >= Rational::one()));
        prop_assert!(total <= degree_covering(&fam).unwrap().total());
        if let Ok(reg) = regular_covering(&fam) {
            prop_assert!(total <= reg.total());
        }
        prop_assert!(lp.weights().iter().all(|w| *w >= Rational::zero()));
    }

    #[test]
    fn representatives_are_lex_minimal_and_injective((g, xs) in group_sets(&ABELIAN, 3, 3), pick in any::<u64>()) {
        let f = builtin_sum(&g, GroundFamily::new(g.order(), xs.clone()).unwrap()).unwrap();
        let image = compound_image(&f, f.full_mask()).unwrap();
        let ys: BTreeSet<Value> = image.iter().enumerate().filter(|(i, _)| (pick >> (i % 64)) & 1 == 1 || *i == 0).map(|(_, v)| v.clone()).collect();
        let reps = lex_min_representatives(&f, &ys).unwrap();
        prop_assert_eq!(reps.len(), ys.len());
        // Oracle: brute-force minimum over all preimages in index order.
        for (y, r) in reps.iter() {
            let mut best: Option<Vec<usize>> = None;
            for a in &xs[0] { for b in &xs[1] { for c in &xs[2] {
                if f.eval(f.full_mask(), &[*a, *b, *c]).unwrap() == *y {
                    let pos = |set: &Vec<ElementId>, e: &ElementId| set.iter().position(|x| x == e).unwrap();
                    let key = vec![pos(&xs[0], a), pos(&xs[1], b), pos(&xs[2], c)];
                    if best.as_ref().is_none_or(|bk| key < *bk) { best = Some(key); }
                }
            }}}
            let key: Vec<usize> = r.iter().enumerate().map(|(i, e)| xs[i].iter().position(|x| x == e).unwrap()).collect();
            prop_assert_eq!(Some(key), best);
        }
        let family: Vec<SubsetMask> = SubsetMask::all(3).filter(|s| !s.is_empty()).collect();
        prop_assert!(verify_section_injectivity(&f, &family, &reps).is_empty());
        for s in family {
            prop_assert!(sections_determined(&f, &reps, s));
        }
    }

    #[test]
    fn full_compound_bound_holds((g, xs) in group_sets(&ABELIAN, 3, 4), fam in covering_family(3)) {
        let f = builtin_sum(&g, GroundFamily::new(g.order(), xs).unwrap()).unwrap();
        for c in [degree_covering(&fam).unwrap(), min_covering_lp(&fam).unwrap()] {
            let v = check_full_compound(&f, &c).unwrap();
            prop_assert_eq!(v.status, Status::Holds, "{}", v.summary());
        }
    }

    #[test]
    fn projection_bound_holds(points in prop::collection::btree_set(prop::collection::vec(0usize..3, 3), 1..=12), fam in covering_family(3)) {
        let pts: Vec<Vec<ElementId>> = points.into_iter().map(|p| p.into_iter().map(ElementId).collect()).collect();
        let v = check_projection_bound(&pts, &degree_covering(&fam).unwrap()).unwrap();
        prop_assert!(v.holds());
    }

    #[test]
    fn singleton_sumset_bound_holds((g, xs) in group_sets(&ABELIAN, 4, 4), dpick in any::<u64>()) {
        let (a, bs) = (&xs[0], &xs[1..]);
        let full: Vec<ElementId> = nary_sumset(&g, &bs.iter().map(Vec::as_slice).collect::<Vec<_>>()).unwrap().into_iter().collect();
        let d: Vec<ElementId> = full.iter().enumerate().filter(|(i, _)| (dpick >> (i % 64)) & 1 == 1 || *i == 0).map(|(_, e)| *e).collect();
        let c = FractionalCovering::new(SubsetFamily::singletons(3), vec![Rational::one(); 3]).unwrap();
        let v = check_abelian_sumset(&g, a, bs, &d, &c).unwrap();
        prop_assert!(v.holds(), "{}", v.summary());
        prop_assert!(v.slack_bits >= 0.0);
    }
}
