//! Exhaustive and seeded-random counterexample search.
//!
//! Every trial draws its own generator, `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `trial`, so reports do not depend on thread count or scheduling.
//! Violations are re-derived from the raw instance by the naive evaluators
//! in [`naive`] before they are reported.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;
use thiserror::Error;

use crate::algebra::{
    cyclic_group, dihedral_group, direct_product, group_by_name, nary_sumset, quaternion_group, AlgebraError,
    ElementId, FiniteGroup, GroundFamily,
};
use crate::entropy::{random_joint, JointDistribution, Marginal, Rational};
use crate::hypergraph::{
    degree_covering, min_covering_lp, regular_covering, FractionalCovering, SubsetFamily,
};
use crate::inequalities::{self as ineq, InequalityError, Status, Verdict};
use crate::pdfunc::{builtin_sum, SubsetMask, Value};

/// Stored violations per report; the count in [`SearchReport::violated`] is exact.
pub const MAX_REPORTED_VIOLATIONS: usize = 1000;

/// Default cap on the number of instances a scenario may evaluate.
pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatementId {
    #[serde(rename = "projection-submodularity")]
    ProjectionSubmodularity,
    #[serde(rename = "projection-bound")]
    ProjectionBound,
    #[serde(rename = "naive-pairwise")]
    NaivePairwise,
    #[serde(rename = "nonabelian")]
    Nonabelian,
    #[serde(rename = "ruzsa-triple")]
    RuzsaTriple,
    #[serde(rename = "ruzsa-quadruple")]
    RuzsaQuadruple,
    #[serde(rename = "weighted-nonabelian")]
    WeightedNonabelian,
    #[serde(rename = "sumset-log-submodularity")]
    SumsetLogSubmodularity,
    #[serde(rename = "set-main")]
    SetMain,
    #[serde(rename = "abelian-sumset")]
    AbelianSumset,
    #[serde(rename = "entropy-submodularity")]
    EntropySubmodularity,
    #[serde(rename = "entropy-4sets")]
    Entropy4Sets,
    #[serde(rename = "pairwise-conditional")]
    PairwiseConditional,
}

impl StatementId {
    pub const ALL: [StatementId; 13] = [
        StatementId::ProjectionSubmodularity,
        StatementId::ProjectionBound,
        StatementId::NaivePairwise,
        StatementId::Nonabelian,
        StatementId::RuzsaTriple,
        StatementId::RuzsaQuadruple,
        StatementId::WeightedNonabelian,
        StatementId::SumsetLogSubmodularity,
        StatementId::SetMain,
        StatementId::AbelianSumset,
        StatementId::EntropySubmodularity,
        StatementId::Entropy4Sets,
        StatementId::PairwiseConditional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatementId::ProjectionSubmodularity => "projection-submodularity",
            StatementId::ProjectionBound => "projection-bound",
            StatementId::NaivePairwise => "naive-pairwise",
            StatementId::Nonabelian => "nonabelian",
            StatementId::RuzsaTriple => "ruzsa-triple",
            StatementId::RuzsaQuadruple => "ruzsa-quadruple",
            StatementId::WeightedNonabelian => "weighted-nonabelian",
            StatementId::SumsetLogSubmodularity => "sumset-log-submodularity",
            StatementId::SetMain => "set-main",
            StatementId::AbelianSumset => "abelian-sumset",
            StatementId::EntropySubmodularity => "entropy-submodularity",
            StatementId::Entropy4Sets => "entropy-4sets",
            StatementId::PairwiseConditional => "pairwise-conditional",
        }
    }

    pub fn parse(name: &str) -> Option<StatementId> {
        StatementId::ALL.into_iter().find(|s| s.as_str() == name)
    }

    fn uses_groups(self) -> bool {
        !matches!(
            self,
            StatementId::ProjectionSubmodularity
                | StatementId::ProjectionBound
                | StatementId::Entropy4Sets
                | StatementId::PairwiseConditional
        )
    }

    fn needs_abelian(self) -> bool {
        matches!(self, StatementId::SetMain | StatementId::AbelianSumset | StatementId::EntropySubmodularity)
    }

    fn arity_ok(self, k: usize) -> bool {
        match self {
            StatementId::RuzsaTriple => k == 3,
            StatementId::RuzsaQuadruple | StatementId::Entropy4Sets => k == 4,
            StatementId::AbelianSumset | StatementId::SetMain | StatementId::EntropySubmodularity => (1..=5).contains(&k),
            _ => (2..=5).contains(&k),
        }
    }
}

impl std::fmt::Display for StatementId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the groups come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Structures {
    Catalog { min_order: usize, max_order: usize, abelian: Option<bool> },
    Named(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoveringChoice {
    Singletons,
    Pairs,
    LeaveOneOut,
    Degree,
    Lp,
}

impl CoveringChoice {
    pub fn parse(name: &str) -> Option<CoveringChoice> {
        Some(match name {
            "singletons" => CoveringChoice::Singletons,
            "pairs" => CoveringChoice::Pairs,
            "leave-one-out" => CoveringChoice::LeaveOneOut,
            "degree" => CoveringChoice::Degree,
            "lp" => CoveringChoice::Lp,
            _ => return None,
        })
    }

    fn is_partition_form(self) -> bool {
        matches!(self, CoveringChoice::Singletons | CoveringChoice::Pairs | CoveringChoice::LeaveOneOut)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    Random { trials: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchScenario {
    pub statement: StatementId,
    #[serde(default = "default_structures")]
    pub structures: Structures,
    pub k: usize,
    #[serde(default = "one")]
    pub min_size: usize,
    pub max_size: usize,
    pub mode: SearchMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Coordinates range over `0..alphabet` for projection and joint-law statements.
    #[serde(default = "two")]
    pub alphabet: usize,
    /// Draw `Y` as a random nonempty subset of the image instead of the full image.
    #[serde(default)]
    pub restrict_y: bool,
    /// Covering to use; `None` rotates through the admissible ones.
    #[serde(default)]
    pub covering: Option<CoveringChoice>,
}

fn default_structures() -> Structures {
    Structures::Catalog { min_order: 1, max_order: 16, abelian: None }
}

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn default_budget() -> usize {
    DEFAULT_SEARCH_BUDGET
}

impl SearchScenario {
    /// A random-mode scenario over the default catalog with every option at its default.
    pub fn new(statement: StatementId, k: usize, max_size: usize, trials: usize, seed: u64) -> Self {
        SearchScenario {
            statement,
            structures: default_structures(),
            k,
            min_size: 1,
            max_size,
            mode: SearchMode::Random { trials },
            seed,
            budget: DEFAULT_SEARCH_BUDGET,
            alphabet: 2,
            restrict_y: false,
            covering: None,
        }
    }

    pub fn with_groups(mut self, names: &[&str]) -> Self {
        self.structures = Structures::Named(names.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn exhaustive(mut self) -> Self {
        self.mode = SearchMode::Exhaustive;
        self
    }
}

/// Cyclic groups, dihedral groups `D_m` (`m >= 3`), `Q8` and products of two or
/// three nontrivial cyclic groups, all of order at most `max_order`.
pub fn group_catalog(max_order: usize) -> Vec<FiniteGroup> {
    let mut out: Vec<FiniteGroup> = Vec::new();
    let mut names = BTreeSet::new();
    let mut push = |g: FiniteGroup, out: &mut Vec<FiniteGroup>| {
        if g.order() <= max_order && names.insert(g.name().to_string()) {
            out.push(g);
        }
    };
    for n in 1..=max_order {
        push(cyclic_group(n), &mut out);
    }
    for m in 3..=max_order / 2 {
        push(dihedral_group(m), &mut out);
    }
    if max_order >= 8 {
        push(quaternion_group(), &mut out);
    }
    for a in 2..=max_order {
        for b in a..=max_order / a {
            push(direct_product(&cyclic_group(a), &cyclic_group(b)), &mut out);
            for c in b..=max_order / (a * b) {
                let ab = direct_product(&cyclic_group(a), &cyclic_group(b));
                push(direct_product(&ab, &cyclic_group(c)), &mut out);
            }
        }
    }
    out.sort_by(|g, h| g.order().cmp(&h.order()).then_with(|| g.name().cmp(h.name())));
    out
}

fn resolve_groups(scenario: &SearchScenario) -> Result<Vec<FiniteGroup>, SearchError> {
    let groups = match &scenario.structures {
        Structures::Catalog { min_order, max_order, abelian } => group_catalog(*max_order)
            .into_iter()
            .filter(|g| g.order() >= *min_order && abelian.is_none_or(|a| g.is_abelian() == a))
            .collect(),
        Structures::Named(names) => names.iter().map(|n| group_by_name(n)).collect::<Result<Vec<_>, _>>()?,
    };
    let groups: Vec<FiniteGroup> = if scenario.statement.needs_abelian() {
        if let Some(g) = groups.iter().find(|g| !g.is_abelian()) {
            if matches!(scenario.structures, Structures::Named(_)) {
                return Err(SearchError::InvalidScenario(format!(
                    "{} needs abelian groups; {} is not",
                    scenario.statement,
                    g.name()
                )));
            }
        }
        groups.into_iter().filter(FiniteGroup::is_abelian).collect()
    } else {
        groups
    };
    let groups: Vec<FiniteGroup> = groups.into_iter().filter(|g| g.order() >= scenario.min_size).collect();
    if groups.is_empty() {
        return Err(SearchError::InvalidScenario("no group matches the structure filter and size bounds".into()));
    }
    Ok(groups)
}

fn validate(s: &SearchScenario) -> Result<(), SearchError> {
    let bad = |m: String| Err(SearchError::InvalidScenario(m));
    if !s.statement.arity_ok(s.k) {
        return bad(format!("{} does not accept k = {}", s.statement, s.k));
    }
    if s.min_size == 0 || s.min_size > s.max_size {
        return bad(format!("size bounds {}..={} are empty or start at 0", s.min_size, s.max_size));
    }
    if s.budget == 0 {
        return bad("budget must be positive".into());
    }
    if s.alphabet == 0 || s.alphabet > 16 {
        return bad(format!("alphabet {} outside 1..=16", s.alphabet));
    }
    if let SearchMode::Random { trials: 0 } = s.mode {
        return bad("trials must be positive".into());
    }
    if let Some(c) = s.covering {
        if s.statement == StatementId::AbelianSumset && !c.is_partition_form() {
            return bad("abelian-sumset needs a fractional partition: singletons, pairs or leave-one-out".into());
        }
        if matches!(c, CoveringChoice::Pairs | CoveringChoice::LeaveOneOut) && s.k < 2 {
            return bad("pairs and leave-one-out coverings need k >= 2".into());
        }
    }
    if matches!(s.statement, StatementId::Entropy4Sets | StatementId::PairwiseConditional)
        && s.mode == SearchMode::Exhaustive
    {
        return bad(format!("{} supports random mode only", s.statement));
    }
    if !s.statement.uses_groups() && s.min_size > s.alphabet {
        return bad(format!("min_size {} exceeds alphabet {}", s.min_size, s.alphabet));
    }
    Ok(())
}

// ---------------------------------------------------------------- instances

/// Raw inputs of one trial, enough to rebuild every quantity from scratch.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// Group name, or `{0..q-1}^k` for point sets and joint laws.
    pub structure: String,
    /// `X_i`, `B_i`, marginal supports, or the points of `Y` for projections.
    pub sets: Vec<Vec<usize>>,
    pub a: Option<Vec<usize>>,
    pub d: Option<Vec<usize>>,
    pub y: Option<Vec<usize>>,
    pub covering: Option<(Vec<SubsetMask>, Vec<Rational>)>,
    pub marginals: Option<Vec<Vec<(usize, Rational)>>>,
    pub atoms: Option<Vec<(Vec<usize>, Rational)>>,
    /// The `(s, t)` pair the verdict refers to, for pairwise statements.
    pub pair: Option<(SubsetMask, SubsetMask)>,
}

impl Instance {
    fn new(structure: String, sets: Vec<Vec<usize>>) -> Self {
        Instance {
            structure,
            sets,
            a: None,
            d: None,
            y: None,
            covering: None,
            marginals: None,
            atoms: None,
            pair: None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "structure": self.structure, "sets": self.sets });
        let o = v.as_object_mut().expect("object");
        if let Some(a) = &self.a {
            o.insert("A".into(), json!(a));
        }
        if let Some(d) = &self.d {
            o.insert("D".into(), json!(d));
        }
        if let Some(y) = &self.y {
            o.insert("Y".into(), json!(y));
        }
        if let Some((fam, w)) = &self.covering {
            o.insert("family".into(), json!(fam));
            o.insert("weights".into(), json!(w.iter().map(|x| x.to_string()).collect::<Vec<_>>()));
        }
        if let Some(ms) = &self.marginals {
            let ms: Vec<Vec<(usize, String)>> =
                ms.iter().map(|m| m.iter().map(|(e, p)| (*e, p.to_string())).collect()).collect();
            o.insert("marginals".into(), json!(ms));
        }
        if let Some(atoms) = &self.atoms {
            let atoms: Vec<(Vec<usize>, String)> = atoms.iter().map(|(x, p)| (x.clone(), p.to_string())).collect();
            o.insert("atoms".into(), json!(atoms));
        }
        if let Some((s, t)) = &self.pair {
            o.insert("s".into(), json!(s));
            o.insert("t".into(), json!(t));
        }
        v
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

fn to_ids(v: &[usize]) -> Vec<ElementId> {
    v.iter().map(|&i| ElementId(i)).collect()
}

fn from_ids(v: impl IntoIterator<Item = ElementId>) -> Vec<usize> {
    v.into_iter().map(|e| e.0).collect()
}

/// Each element of `0..n` independently with probability 1/2, resampled until
/// nonempty, then clamped to `min..=max` elements.
pub fn random_subset(rng: &mut impl Rng, n: usize, min: usize, max: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    let mut chosen: Vec<usize> = loop {
        let s: Vec<usize> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            break s;
        }
    };
    chosen.truncate(max);
    for &x in &pool {
        if chosen.len() >= min {
            break;
        }
        if !chosen.contains(&x) {
            chosen.push(x);
        }
    }
    chosen.sort_unstable();
    chosen
}

fn random_subset_of(rng: &mut impl Rng, from: &[usize], max: usize) -> Vec<usize> {
    let picks = random_subset(rng, from.len(), 1, max.max(1));
    picks.into_iter().map(|i| from[i]).collect()
}

/// A family of 1..=k+1 random nonempty masks, topped up with singletons so it covers `[k]`.
fn random_family(rng: &mut impl Rng, k: usize) -> SubsetFamily {
    let m = rng.gen_range(1..=k + 1);
    let mut members: Vec<SubsetMask> =
        (0..m).map(|_| SubsetMask::from_indices(random_subset(rng, k, 1, k))).collect();
    for i in 0..k {
        if !members.iter().any(|s| s.contains(i)) {
            members.push(SubsetMask::singleton(i));
        }
    }
    SubsetFamily::new(k, members).expect("valid masks")
}

fn build_covering(rng: &mut impl Rng, k: usize, choice: CoveringChoice) -> FractionalCovering {
    let built = match choice {
        CoveringChoice::Singletons => regular_covering(&SubsetFamily::singletons(k)),
        CoveringChoice::Pairs => regular_covering(&SubsetFamily::all_of_size(k, 2)),
        CoveringChoice::LeaveOneOut => regular_covering(&SubsetFamily::leave_one_out(k)),
        CoveringChoice::Degree => degree_covering(&random_family(rng, k)),
        CoveringChoice::Lp => min_covering_lp(&random_family(rng, k)),
    };
    built.expect("covering families are feasible")
}

fn pick_covering(rng: &mut impl Rng, s: &SearchScenario, partition_only: bool) -> FractionalCovering {
    let choice = s.covering.unwrap_or_else(|| {
        let mut options = vec![CoveringChoice::Singletons];
        if s.k >= 2 {
            options.extend([CoveringChoice::Pairs, CoveringChoice::LeaveOneOut]);
        }
        if !partition_only {
            options.extend([CoveringChoice::Degree, CoveringChoice::Lp]);
        }
        *options.choose(rng).expect("nonempty")
    });
    build_covering(rng, s.k, choice)
}

fn covering_parts(c: &FractionalCovering) -> (Vec<SubsetMask>, Vec<Rational>) {
    (c.family().members().to_vec(), c.weights().to_vec())
}

/// Pair weights `n_ij ∈ 1..=4`, scaled so the least-covered index has coverage 1.
fn random_pair_weights(rng: &mut impl Rng, k: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k * (k - 1) / 2).map(|_| rng.gen_range(1..=4)).collect();
    let mut coverage = vec![0i64; k];
    let mut idx = 0;
    for i in 0..k {
        for j in i + 1..k {
            coverage[i] += raw[idx];
            coverage[j] += raw[idx];
            idx += 1;
        }
    }
    let min = *coverage.iter().min().expect("k >= 2");
    raw.into_iter().map(|n| Rational::new(n.into(), min.into())).collect()
}

fn all_points(q: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|p| (0..q).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

fn cube_name(q: usize, k: usize) -> String {
    format!("{{0..{}}}^{k}", q - 1)
}

fn binomial(n: usize, m: usize) -> u128 {
    if m > n {
        return 0;
    }
    (0..m).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// The `rank`-th `m`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, m: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(m);
    let mut next = 0;
    for left in (1..=m).rev() {
        loop {
            let c = binomial(n - next - 1, left - 1);
            if rank < c {
                break;
            }
            rank -= c;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

/// Exhaustive index space: per group, all k-tuples of subsets sized `min..=max`.
struct SetSpace {
    per_group: Vec<(u128, Vec<u128>)>, // (tuple count, subset count per size)
}

impl SetSpace {
    fn new(groups: &[FiniteGroup], s: &SearchScenario) -> Self {
        let per_group = groups
            .iter()
            .map(|g| {
                let by_size: Vec<u128> = (s.min_size..=s.max_size).map(|m| binomial(g.order(), m)).collect();
                let subsets: u128 = by_size.iter().fold(0u128, |a, &b| a.saturating_add(b));
                let tuples = (0..s.k).fold(1u128, |a, _| a.saturating_mul(subsets));
                (tuples, by_size)
            })
            .collect();
        SetSpace { per_group }
    }

    fn total(&self) -> u128 {
        self.per_group.iter().fold(0u128, |a, (t, _)| a.saturating_add(*t))
    }

    fn decode(&self, groups: &[FiniteGroup], s: &SearchScenario, mut index: u128) -> (usize, Vec<Vec<usize>>) {
        let mut gi = 0;
        while index >= self.per_group[gi].0 {
            index -= self.per_group[gi].0;
            gi += 1;
        }
        let by_size = &self.per_group[gi].1;
        let subsets: u128 = by_size.iter().sum();
        let mut digits = vec![0u128; s.k];
        for d in digits.iter_mut().rev() {
            *d = index % subsets;
            index /= subsets;
        }
        let n = groups[gi].order();
        let sets = digits
            .into_iter()
            .map(|mut r| {
                let mut m = s.min_size;
                for &c in by_size {
                    if r < c {
                        break;
                    }
                    r -= c;
                    m += 1;
                }
                unrank_combination(n, m, r)
            })
            .collect();
        (gi, sets)
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

enum Space {
    Sets(SetSpace),
    Points(Vec<Vec<usize>>),
    RandomOnly,
}

struct Plan {
    groups: Vec<FiniteGroup>,
    space: Space,
    total: u128,
    run: usize,
}

fn plan(s: &SearchScenario) -> Result<Plan, SearchError> {
    validate(s)?;
    let groups = if s.statement.uses_groups() { resolve_groups(s)? } else { Vec::new() };
    let space = match (s.mode, s.statement.uses_groups()) {
        (SearchMode::Random { .. }, _) => Space::RandomOnly,
        (SearchMode::Exhaustive, true) => Space::Sets(SetSpace::new(&groups, s)),
        (SearchMode::Exhaustive, false) => {
            let pts = all_points(s.alphabet, s.k);
            if pts.len() > 20 {
                return Err(SearchError::InvalidScenario(format!(
                    "exhaustive search over subsets of {} needs alphabet^k <= 20",
                    cube_name(s.alphabet, s.k)
                )));
            }
            Space::Points(pts)
        }
    };
    let total: u128 = match (&space, s.mode) {
        (_, SearchMode::Random { trials }) => trials as u128,
        (Space::Sets(sp), _) => sp.total(),
        (Space::Points(p), _) => (1u128 << p.len()) - 1,
        (Space::RandomOnly, _) => unreachable!(),
    };
    let run = total.min(s.budget as u128) as usize;
    Ok(Plan { groups, space, total, run })
}

fn generate(s: &SearchScenario, plan: &Plan, trial: usize) -> (Option<usize>, Instance, ChaCha8Rng) {
    let mut rng = trial_rng(s.seed, trial);
    match &plan.space {
        Space::Points(pts) => {
            let bits = trial as u128 + 1;
            let y: Vec<Vec<usize>> =
                pts.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, p)| p.clone()).collect();
            (None, Instance::new(cube_name(s.alphabet, s.k), y), rng)
        }
        Space::Sets(sp) => {
            let (gi, sets) = sp.decode(&plan.groups, s, trial as u128);
            (Some(gi), Instance::new(plan.groups[gi].name().to_string(), sets), rng)
        }
        Space::RandomOnly if s.statement.uses_groups() => {
            let gi = rng.gen_range(0..plan.groups.len());
            let n = plan.groups[gi].order();
            let sets = (0..s.k).map(|_| random_subset(&mut rng, n, s.min_size, s.max_size)).collect();
            (Some(gi), Instance::new(plan.groups[gi].name().to_string(), sets), rng)
        }
        Space::RandomOnly => {
            let sets: Vec<Vec<usize>> = match s.statement {
                StatementId::ProjectionSubmodularity | StatementId::ProjectionBound => {
                    let pts = all_points(s.alphabet, s.k);
                    let picks = random_subset(&mut rng, pts.len(), s.min_size, s.max_size);
                    picks.into_iter().map(|i| pts[i].clone()).collect()
                }
                _ => (0..s.k).map(|_| random_subset(&mut rng, s.alphabet, s.min_size, s.max_size)).collect(),
            };
            (None, Instance::new(cube_name(s.alphabet, s.k), sets), rng)
        }
    }
}

/// Fills in the statement-specific parts of an instance (A, D, Y, weights, laws).
fn complete(s: &SearchScenario, g: Option<&FiniteGroup>, inst: &mut Instance, rng: &mut ChaCha8Rng) {
    match s.statement {
        StatementId::ProjectionBound => {
            let c = pick_covering(rng, s, false);
            inst.covering = Some(covering_parts(&c));
        }
        StatementId::WeightedNonabelian => {
            let k = s.k;
            let pairs: Vec<SubsetMask> =
                (0..k).flat_map(|i| (i + 1..k).map(move |j| SubsetMask::from_indices([i, j]))).collect();
            inst.covering = Some((pairs, random_pair_weights(rng, k)));
        }
        StatementId::SumsetLogSubmodularity | StatementId::SetMain => {
            let g = g.expect("group statement");
            if s.restrict_y {
                let sets: Vec<Vec<ElementId>> = inst.sets.iter().map(|x| to_ids(x)).collect();
                let refs: Vec<&[ElementId]> = sets.iter().map(Vec::as_slice).collect();
                let image = from_ids(nary_sumset(g, &refs).expect("nonempty sets"));
                inst.y = Some(random_subset_of(rng, &image, image.len()));
            }
            if s.statement == StatementId::SetMain {
                inst.covering = Some(covering_parts(&pick_covering(rng, s, false)));
            }
        }
        StatementId::AbelianSumset => {
            let g = g.expect("group statement");
            inst.a = Some(random_subset(rng, g.order(), s.min_size, s.max_size));
            let sets: Vec<Vec<ElementId>> = inst.sets.iter().map(|x| to_ids(x)).collect();
            let refs: Vec<&[ElementId]> = sets.iter().map(Vec::as_slice).collect();
            let full = from_ids(nary_sumset(g, &refs).expect("nonempty sets"));
            inst.d = Some(random_subset_of(rng, &full, s.max_size));
            inst.covering = Some(covering_parts(&pick_covering(rng, s, true)));
        }
        StatementId::EntropySubmodularity => {
            let ms = inst
                .sets
                .iter()
                .map(|sup| {
                    let m = Marginal::random(rng, &to_ids(sup));
                    m.iter().map(|(e, p)| (e.0, p.clone())).collect()
                })
                .collect();
            inst.marginals = Some(ms);
        }
        StatementId::Entropy4Sets | StatementId::PairwiseConditional => {
            let supports: Vec<Vec<ElementId>> = inst.sets.iter().map(|x| to_ids(x)).collect();
            let dist = random_joint(rng, &supports, 0.5);
            inst.atoms = Some(dist.atoms().map(|(x, p)| (from_ids(x.iter().copied()), p.clone())).collect());
        }
        _ => {}
    }
}

fn covering_of(inst: &Instance, k: usize) -> Result<FractionalCovering, InequalityError> {
    let (fam, w) = inst.covering.clone().ok_or_else(|| InequalityError::InvalidInput("missing covering".into()))?;
    Ok(FractionalCovering::new(SubsetFamily::new(k, fam)?, w)?)
}

fn nontrivial_pairs(k: usize) -> Vec<(SubsetMask, SubsetMask)> {
    let masks: Vec<SubsetMask> = SubsetMask::all(k).filter(|m| !m.is_empty()).collect();
    let mut out = Vec::new();
    for (i, &s) in masks.iter().enumerate() {
        for &t in &masks[i + 1..] {
            if !s.is_subset_of(t) && !t.is_subset_of(s) {
                out.push((s, t));
            }
        }
    }
    out
}

/// Keeps the verdict with the smallest slack; ties go to the first.
fn worst(
    pairs: &[(SubsetMask, SubsetMask)],
    mut check: impl FnMut(SubsetMask, SubsetMask) -> Result<Verdict, InequalityError>,
) -> Result<(Verdict, (SubsetMask, SubsetMask)), InequalityError> {
    let mut best: Option<(Verdict, (SubsetMask, SubsetMask))> = None;
    for &(s, t) in pairs {
        let v = check(s, t)?;
        if best.as_ref().is_none_or(|(b, _)| v.slack_bits < b.slack_bits) {
            best = Some((v, (s, t)));
        }
    }
    best.ok_or_else(|| InequalityError::InvalidInput("no nontrivial pair".into()))
}

/// Runs the library verifier on a completed instance.
pub fn evaluate(statement: StatementId, inst: &mut Instance) -> Result<Verdict, InequalityError> {
    let k = inst.sets.len();
    let group = || group_by_name(&inst.structure).map_err(InequalityError::from);
    let sets = || inst.sets.iter().map(|x| to_ids(x)).collect::<Vec<_>>();
    let v = match statement {
        StatementId::ProjectionSubmodularity | StatementId::ProjectionBound => {
            let points: Vec<Vec<ElementId>> = sets();
            let dim = points.first().map_or(0, Vec::len);
            if statement == StatementId::ProjectionBound {
                ineq::check_projection_bound(&points, &covering_of(inst, dim)?)?
            } else {
                let (v, pair) =
                    worst(&nontrivial_pairs(dim), |s, t| ineq::check_projection_submodularity(&points, dim, s, t))?;
                inst.pair = Some(pair);
                v
            }
        }
        StatementId::NaivePairwise => ineq::check_naive_pairwise(&group()?, &sets())?,
        StatementId::Nonabelian => ineq::check_nonabelian(&group()?, &sets())?,
        StatementId::RuzsaTriple => {
            let x = sets();
            ineq::check_ruzsa_triple(&group()?, &x[0], &x[1], &x[2])?
        }
        StatementId::RuzsaQuadruple => {
            let x = sets();
            ineq::check_ruzsa_quadruple(&group()?, &x[0], &x[1], &x[2], &x[3])?
        }
        StatementId::WeightedNonabelian => {
            let w = inst.covering.as_ref().map(|c| c.1.clone()).unwrap_or_default();
            ineq::check_weighted_nonabelian(&group()?, &sets(), &w)?
        }
        StatementId::SumsetLogSubmodularity => {
            let g = group()?;
            let x = sets();
            let y = inst.y.as_ref().map(|y| to_ids(y));
            let (v, pair) = worst(&nontrivial_pairs(k), |s, t| {
                ineq::sumset_log_submodularity_probe(&g, &x, y.as_deref(), s, t)
            })?;
            inst.pair = Some(pair);
            v
        }
        StatementId::SetMain => {
            let g = group()?;
            let f = builtin_sum(&g, GroundFamily::new(g.order(), sets()).map_err(|e| InequalityError::InvalidInput(e.to_string()))?)?;
            let c = covering_of(inst, k)?;
            match &inst.y {
                Some(y) => {
                    let ys: BTreeSet<Value> = y.iter().map(|&e| Value::GroupElem(ElementId(e))).collect();
                    ineq::check_set_main(&f, &ys, &c)?
                }
                None => ineq::check_full_compound(&f, &c)?,
            }
        }
        StatementId::AbelianSumset => {
            let a = to_ids(inst.a.as_deref().unwrap_or_default());
            let d = to_ids(inst.d.as_deref().unwrap_or_default());
            ineq::check_abelian_sumset(&group()?, &a, &sets(), &d, &covering_of(inst, k)?)?
        }
        StatementId::EntropySubmodularity => {
            let g = group()?;
            let f = builtin_sum(&g, GroundFamily::new(g.order(), sets()).map_err(|e| InequalityError::InvalidInput(e.to_string()))?)?;
            let ms: Vec<Marginal> = inst
                .marginals
                .as_ref()
                .ok_or_else(|| InequalityError::InvalidInput("missing marginals".into()))?
                .iter()
                .map(|m| Marginal::new(m.iter().map(|(e, p)| (ElementId(*e), p.clone())).collect()))
                .collect::<Result<_, _>>()?;
            let pairs: Vec<(SubsetMask, SubsetMask)> =
                if k == 1 { vec![(SubsetMask::singleton(0), SubsetMask::singleton(0))] } else { nontrivial_pairs(k) };
            let (v, pair) = worst(&pairs, |s, t| ineq::check_entropy_submodularity(&f, &ms, s, t))?;
            inst.pair = Some(pair);
            v
        }
        StatementId::Entropy4Sets | StatementId::PairwiseConditional => {
            let atoms = inst.atoms.as_ref().ok_or_else(|| InequalityError::InvalidInput("missing atoms".into()))?;
            let dist = JointDistribution::from_atoms(k, atoms.iter().map(|(x, p)| (to_ids(x), p.clone())))?;
            if statement == StatementId::Entropy4Sets {
                ineq::check_entropy_4sets(&dist)?
            } else {
                ineq::check_pairwise_conditional(&dist)?
            }
        }
    };
    Ok(v)
}

// ---------------------------------------------------------------- report

#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub trial: usize,
    pub instance: Instance,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub scenario: SearchScenario,
    /// Size of the instance space (exhaustive) or requested trials (random), as a decimal string.
    pub space_size: String,
    pub instances: usize,
    pub holds: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub errors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
    pub budget_exceeded: bool,
    /// Trials whose violation the naive re-evaluation did not confirm. Never reported as violations.
    pub unconfirmed: Vec<usize>,
    pub violations: Vec<Finding>,
    pub min_margin: Option<Finding>,
    pub wall_ms: f64,
}

impl SearchReport {
    pub fn found_violation(&self) -> bool {
        !self.violations.is_empty()
    }

    /// The report without timing fields, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("serializable");
        v.as_object_mut().expect("object").remove("wall_ms");
        serde_json::to_string(&v).expect("serializable")
    }
}

enum TrialOutcome {
    Verdict(Box<Finding>, bool),
    Error(String),
}

fn run_trial(s: &SearchScenario, plan: &Plan, trial: usize) -> TrialOutcome {
    let (gi, mut inst, mut rng) = generate(s, plan, trial);
    complete(s, gi.map(|i| &plan.groups[i]), &mut inst, &mut rng);
    match evaluate(s.statement, &mut inst) {
        Ok(v) => {
            let confirmed = !v.is_violated() || naive::confirms(s.statement, &inst, &v);
            let verdict = v.with_seed(s.seed);
            TrialOutcome::Verdict(Box::new(Finding { trial, instance: inst, verdict }), confirmed)
        }
        Err(e) => TrialOutcome::Error(format!("trial {trial}: {e}")),
    }
}

/// Runs a scenario on the global rayon pool.
pub fn run_search(s: &SearchScenario) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let plan = plan(s)?;
    let outcomes: Vec<TrialOutcome> = (0..plan.run).into_par_iter().map(|t| run_trial(s, &plan, t)).collect();
    let mut report = SearchReport {
        scenario: s.clone(),
        space_size: plan.total.to_string(),
        instances: plan.run,
        holds: 0,
        violated: 0,
        inconclusive: 0,
        errors: 0,
        first_error: None,
        budget_exceeded: plan.total > plan.run as u128,
        unconfirmed: Vec::new(),
        violations: Vec::new(),
        min_margin: None,
        wall_ms: 0.0,
    };
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Error(e) => {
                report.errors += 1;
                report.first_error.get_or_insert(e);
            }
            TrialOutcome::Verdict(f, confirmed) => {
                if report.min_margin.as_ref().is_none_or(|m| f.verdict.slack_bits < m.verdict.slack_bits) {
                    report.min_margin = Some((*f).clone());
                }
                match f.verdict.status {
                    Status::Holds => report.holds += 1,
                    Status::Inconclusive => report.inconclusive += 1,
                    Status::Violated if !confirmed => report.unconfirmed.push(f.trial),
                    Status::Violated => {
                        report.violated += 1;
                        if report.violations.len() < MAX_REPORTED_VIOLATIONS {
                            report.violations.push(*f);
                        }
                    }
                }
            }
        }
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Runs a scenario on a dedicated pool of `threads` workers (`None`: rayon's default).
pub fn run_search_with_threads(s: &SearchScenario, threads: Option<usize>) -> Result<SearchReport, SearchError> {
    match threads {
        None => run_search(s),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SearchError::ThreadPool(e.to_string()))?
            .install(|| run_search(s)),
    }
}

/// Scenarios that between them reach every fixed counterexample, plus a
/// regression run of the set bound and the quadruple probes.
pub fn default_suite(seed: u64) -> Vec<SearchScenario> {
    let mut projection = SearchScenario::new(StatementId::ProjectionSubmodularity, 3, 8, 1, seed).exhaustive();
    projection.alphabet = 2;
    let naive = SearchScenario::new(StatementId::NaivePairwise, 3, 2, 1, seed).with_groups(&["D3"]).exhaustive();
    let mut entropy = SearchScenario::new(StatementId::Entropy4Sets, 4, 2, 2000, seed);
    entropy.alphabet = 2;
    let mut log_sub = SearchScenario::new(StatementId::SumsetLogSubmodularity, 3, 5, 4000, seed)
        .with_groups(&["Z2xZ2xZ2", "Z2xZ4"]);
    log_sub.min_size = 2;
    let mut set_main = SearchScenario::new(StatementId::SetMain, 3, 4, 2000, seed);
    set_main.structures = Structures::Catalog { min_order: 2, max_order: 12, abelian: Some(true) };
    set_main.restrict_y = true;
    let quadruple =
        SearchScenario::new(StatementId::RuzsaQuadruple, 4, 4, 10_000, seed).with_groups(&["D4", "Q8", "D5"]);
    vec![projection, naive, entropy, log_sub, set_main, quadruple]
}

/// Independent re-evaluation from raw instance data: plain loops over the
/// Cayley table, no memoized functions, no shared sumset code.
pub mod naive {
    use super::*;
    use std::collections::BTreeMap;

    fn table(name: &str) -> Option<Vec<Vec<usize>>> {
        group_by_name(name).ok().map(|g| g.table_rows())
    }

    fn sum(t: &[Vec<usize>], sets: &[&[usize]]) -> BTreeSet<usize> {
        let mut acc: BTreeSet<usize> = sets[0].iter().copied().collect();
        for s in &sets[1..] {
            acc = acc.iter().flat_map(|&a| s.iter().map(move |&b| t[a][b])).collect();
        }
        acc
    }

    fn size(t: &[Vec<usize>], sets: &[&[usize]]) -> BigInt {
        BigInt::from(sum(t, sets).len())
    }

    fn product(t: &[Vec<usize>], xs: &[usize]) -> usize {
        xs[1..].iter().fold(xs[0], |a, &b| t[a][b])
    }

    fn tuples(sets: &[&[usize]]) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for s in sets {
            out = out.into_iter().flat_map(|p| s.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect();
        }
        out
    }

    fn pick(x: &[usize], m: SubsetMask) -> Vec<usize> {
        m.iter().map(|i| x[i]).collect()
    }

    fn max_middle(t: &[Vec<usize>], xs: &[Vec<usize>], i: usize, j: usize) -> BigInt {
        let middle: Vec<&[usize]> = xs[i + 1..j].iter().map(Vec::as_slice).collect();
        tuples(&middle)
            .into_iter()
            .map(|mid| {
                let singles: Vec<[usize; 1]> = mid.iter().map(|&m| [m]).collect();
                let mut ops: Vec<&[usize]> = vec![&xs[i]];
                ops.extend(singles.iter().map(|s| s.as_slice()));
                ops.push(&xs[j]);
                sum(t, &ops).len()
            })
            .max()
            .map(BigInt::from)
            .unwrap_or_else(BigInt::zero)
    }

    fn lcm_exps(w: &[Rational], extra: &[Rational]) -> (BigInt, Vec<u32>, Vec<u32>) {
        use num_integer::Integer;
        let l = w.iter().chain(extra).fold(BigInt::one(), |a, x| a.lcm(x.denom()));
        let lr = Rational::from_integer(l.clone());
        let e = |x: &Rational| u32::try_from((x * &lr).to_integer()).expect("small exponent");
        (l.clone(), w.iter().map(e).collect(), extra.iter().map(e).collect())
    }

    fn h(pmf: &BTreeMap<Vec<usize>, Rational>) -> f64 {
        pmf.values()
            .map(|p| {
                let p = num_traits::ToPrimitive::to_f64(p).expect("finite");
                if p > 0.0 {
                    -p * p.log2()
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn marginal_h(atoms: &[(Vec<usize>, Rational)], m: SubsetMask) -> f64 {
        let mut pmf: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (x, p) in atoms {
            *pmf.entry(pick(x, m)).or_insert_with(Rational::zero) += p;
        }
        h(&pmf)
    }

    fn mask(one_based: &[usize]) -> SubsetMask {
        SubsetMask::from_one_based(one_based)
    }

    /// Naive `(lhs, rhs)` for cardinality statements, in the same exponentiated form as the verifiers.
    pub fn exact_sides(statement: StatementId, inst: &Instance) -> Option<(BigInt, BigInt)> {
        let xs = &inst.sets;
        let refs: Vec<&[usize]> = xs.iter().map(Vec::as_slice).collect();
        let k = xs.len();
        Some(match statement {
            StatementId::ProjectionSubmodularity => {
                let (s, t) = inst.pair?;
                let n = |m: SubsetMask| BigInt::from(xs.iter().map(|p| pick(p, m)).collect::<BTreeSet<_>>().len());
                (n(s.union(t)) * n(s.intersection(t)), n(s) * n(t))
            }
            StatementId::ProjectionBound => {
                let (fam, w) = inst.covering.as_ref()?;
                let (l, e, _) = lcm_exps(w, &[]);
                let l = u32::try_from(l).ok()?;
                let n = |m: SubsetMask| BigInt::from(xs.iter().map(|p| pick(p, m)).collect::<BTreeSet<_>>().len());
                let distinct = xs.iter().collect::<BTreeSet<_>>().len();
                let rhs = fam.iter().zip(e).fold(BigInt::one(), |a, (&m, e)| a * n(m).pow(e));
                (BigInt::from(distinct).pow(l), rhs)
            }
            StatementId::NaivePairwise => {
                let t = table(&inst.structure)?;
                let mut rhs = BigInt::one();
                for i in 0..k {
                    for j in i + 1..k {
                        rhs *= size(&t, &[&xs[i], &xs[j]]);
                    }
                }
                (size(&t, &refs).pow(k as u32 - 1), rhs)
            }
            StatementId::Nonabelian => {
                let t = table(&inst.structure)?;
                let mut rhs = BigInt::one();
                for i in 0..k {
                    for j in i + 1..k {
                        rhs *= max_middle(&t, xs, i, j);
                    }
                }
                (size(&t, &refs).pow(k as u32 - 1), rhs)
            }
            StatementId::RuzsaTriple => {
                let t = table(&inst.structure)?;
                let lhs = size(&t, &refs).pow(2);
                (lhs, size(&t, &refs[..2]) * size(&t, &refs[1..]) * max_middle(&t, xs, 0, 2))
            }
            StatementId::RuzsaQuadruple => {
                let t = table(&inst.structure)?;
                let (s, tt, u, v) = (refs[0], refs[1], refs[2], refs[3]);
                let mut best = BigInt::zero();
                for &a in tt {
                    for &b in u {
                        let c = size(&t, &[s, tt, &[b], v]) * size(&t, &[s, &[a], u, v]);
                        best = best.max(c);
                    }
                }
                (size(&t, &refs).pow(3), size(&t, &refs[..3]) * size(&t, &refs[1..]) * best)
            }
            StatementId::WeightedNonabelian => {
                let t = table(&inst.structure)?;
                let (_, w) = inst.covering.as_ref()?;
                let (l, e, _) = lcm_exps(w, &[]);
                let mut rhs = BigInt::one();
                let mut idx = 0;
                for i in 0..k {
                    for j in i + 1..k {
                        rhs *= max_middle(&t, xs, i, j).pow(e[idx]);
                        idx += 1;
                    }
                }
                (size(&t, &refs).pow(u32::try_from(l).ok()?), rhs)
            }
            StatementId::SumsetLogSubmodularity => {
                let t = table(&inst.structure)?;
                let (s, u) = inst.pair?;
                let all = tuples(&refs);
                let image: BTreeSet<usize> = all.iter().map(|x| product(&t, x)).collect();
                let y: BTreeSet<usize> = inst.y.as_ref().map_or(image, |y| y.iter().copied().collect());
                let pre: Vec<&Vec<usize>> = all.iter().filter(|x| y.contains(&product(&t, x))).collect();
                let n = |m: SubsetMask| -> BigInt {
                    if m.is_empty() {
                        return BigInt::from(usize::from(!pre.is_empty()));
                    }
                    BigInt::from(pre.iter().map(|x| product(&t, &pick(x, m))).collect::<BTreeSet<_>>().len())
                };
                (n(s.union(u)) * n(s.intersection(u)), n(s) * n(u))
            }
            StatementId::SetMain => {
                let t = table(&inst.structure)?;
                let (fam, w) = inst.covering.as_ref()?;
                let (l, e, _) = lcm_exps(w, &[]);
                let all = tuples(&refs);
                let image: BTreeSet<usize> = all.iter().map(|x| product(&t, x)).collect();
                let y: BTreeSet<usize> = inst.y.as_ref().map_or(image, |y| y.iter().copied().collect());
                let pre: Vec<&Vec<usize>> = all.iter().filter(|x| y.contains(&product(&t, x))).collect();
                let rhs = fam.iter().zip(e).fold(BigInt::one(), |a, (&m, e)| {
                    let n = pre.iter().map(|x| product(&t, &pick(x, m))).collect::<BTreeSet<_>>().len();
                    a * BigInt::from(n).pow(e)
                });
                (BigInt::from(y.len()).pow(u32::try_from(l).ok()?), rhs)
            }
            StatementId::AbelianSumset => {
                let t = table(&inst.structure)?;
                let (fam, w) = inst.covering.as_ref()?;
                let (a, d) = (inst.a.as_ref()?, inst.d.as_ref()?);
                let c: Rational = w.iter().sum();
                let (_, e, ce) = lcm_exps(w, &[c.clone(), c - Rational::one()]);
                let mut rhs = BigInt::from(d.len()).pow(ce[1]);
                for (&m, e) in fam.iter().zip(e) {
                    let bplus: Vec<usize> = sum(&t, &m.iter().map(|i| refs[i]).collect::<Vec<_>>()).into_iter().collect();
                    rhs *= size(&t, &[a, &bplus]).pow(e);
                }
                (size(&t, &[a, d]).pow(ce[0]), rhs)
            }
            _ => return None,
        })
    }

    /// Naive `(lhs, rhs)` in bits for entropy statements.
    pub fn bit_sides(statement: StatementId, inst: &Instance) -> Option<(f64, f64)> {
        match statement {
            StatementId::Entropy4Sets => {
                let a = inst.atoms.as_ref()?;
                let hm = |c: &[usize]| marginal_h(a, mask(c));
                let lhs = hm(&[1, 2, 3, 4]);
                let rhs = (hm(&[1, 2, 3]) + hm(&[2, 3, 4]) + hm(&[1, 2, 3, 4]) - hm(&[2]) + hm(&[1, 2, 3, 4]) - hm(&[3]))
                    / 3.0;
                Some((lhs, rhs))
            }
            StatementId::PairwiseConditional => {
                let a = inst.atoms.as_ref()?;
                let k = inst.sets.len();
                let full = marginal_h(a, SubsetMask::full(k));
                let mut rhs = 0.0;
                for i in 0..k {
                    for j in i + 1..k {
                        let between = SubsetMask::from_indices(i + 1..j);
                        let with = between.union(SubsetMask::from_indices([i, j]));
                        rhs += marginal_h(a, with) - marginal_h(a, between);
                    }
                }
                Some(((k - 1) as f64 * full, rhs))
            }
            StatementId::EntropySubmodularity => {
                let t = table(&inst.structure)?;
                let ms = inst.marginals.as_ref()?;
                let (s, u) = inst.pair?;
                let supports: Vec<Vec<usize>> = ms.iter().map(|m| m.iter().map(|(e, _)| *e).collect()).collect();
                let srefs: Vec<&[usize]> = supports.iter().map(Vec::as_slice).collect();
                let hs = |m: SubsetMask| -> f64 {
                    if m.is_empty() {
                        return 0.0;
                    }
                    let mut pmf: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
                    for x in tuples(&srefs) {
                        let p: Rational = x
                            .iter()
                            .zip(ms)
                            .map(|(e, m)| m.iter().find(|(v, _)| v == e).expect("in support").1.clone())
                            .product();
                        *pmf.entry(vec![product(&t, &pick(&x, m))]).or_insert_with(Rational::zero) += p;
                    }
                    h(&pmf)
                };
                Some((hs(s.union(u)) + hs(s.intersection(u)), hs(s) + hs(u)))
            }
            _ => None,
        }
    }

    /// True when the naive recomputation reproduces the verdict's sides and status.
    pub fn confirms(statement: StatementId, inst: &Instance, v: &Verdict) -> bool {
        if let Some((lhs, rhs)) = exact_sides(statement, inst) {
            return v.lhs.as_exact() == Some(&lhs) && v.rhs.as_exact() == Some(&rhs) && lhs > rhs;
        }
        if let Some((lhs, rhs)) = bit_sides(statement, inst) {
            let margin = rhs - lhs;
            return (margin - v.slack_bits).abs() <= 1e-9 && margin < -crate::entropy::VIOLATION_THRESHOLD;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contents() {
        let names = |m: usize| group_catalog(m).iter().map(|g| g.name().to_string()).collect::<Vec<_>>();
        assert_eq!(names(1), vec!["Z1"]);
        let six = names(6);
        for n in ["Z1", "Z2", "Z3", "Z4", "Z5", "Z6", "D3", "Z2xZ2", "Z2xZ3"] {
            assert!(six.contains(&n.to_string()), "{n}");
        }
        let eight = names(8);
        assert!(eight.contains(&"Q8".to_string()) && eight.contains(&"D4".to_string()));
        assert!(eight.contains(&"Z2xZ2xZ2".to_string()));
        let sixteen = group_catalog(16);
        assert!(sixteen.iter().all(|g| g.order() <= 16));
        let distinct: BTreeSet<&str> = sixteen.iter().map(|g| g.name()).collect();
        assert_eq!(distinct.len(), sixteen.len());
    }

    #[test]
    fn unranking_is_lexicographic_and_complete() {
        let all: Vec<Vec<usize>> = (0..binomial(5, 3)).map(|r| unrank_combination(5, 3, r)).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn random_subset_respects_bounds() {
        let mut rng = trial_rng(7, 0);
        for _ in 0..200 {
            let s = random_subset(&mut rng, 9, 2, 4);
            assert!((2..=4).contains(&s.len()));
            assert!(s.windows(2).all(|w| w[0] < w[1]) && s.iter().all(|&x| x < 9));
        }
    }

    #[test]
    fn pair_weights_form_a_covering() {
        let mut rng = trial_rng(3, 1);
        for k in 2..=5 {
            let w = random_pair_weights(&mut rng, k);
            let pairs: Vec<SubsetMask> =
                (0..k).flat_map(|i| (i + 1..k).map(move |j| SubsetMask::from_indices([i, j]))).collect();
            let c = FractionalCovering::new(SubsetFamily::new(k, pairs).unwrap(), w).unwrap();
            assert!((0..k).any(|i| c.coverage(i) == Rational::one()));
        }
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let bad = [
            SearchScenario::new(StatementId::RuzsaTriple, 4, 2, 10, 0),
            SearchScenario::new(StatementId::NaivePairwise, 3, 0, 10, 0),
            SearchScenario::new(StatementId::NaivePairwise, 3, 2, 0, 0),
            SearchScenario::new(StatementId::Entropy4Sets, 4, 2, 10, 0).exhaustive(),
            SearchScenario::new(StatementId::SetMain, 3, 2, 10, 0).with_groups(&["D3"]),
        ];
        for s in bad {
            assert!(matches!(run_search(&s), Err(SearchError::InvalidScenario(_))), "{s:?}");
        }
        let mut s = SearchScenario::new(StatementId::AbelianSumset, 3, 2, 10, 0);
        s.covering = Some(CoveringChoice::Degree);
        assert!(run_search(&s).is_err());
    }

    #[test]
    fn projection_exhaustive_finds_the_five_point_set() {
        let s = &default_suite(0)[0];
        let r = run_search(s).unwrap();
        assert_eq!(r.instances, 255);
        assert!(!r.budget_exceeded);
        let target: Vec<Vec<usize>> = vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0], vec![1, 0, 1]];
        let hit = r.violations.iter().find(|f| {
            let mut y = f.instance.sets.clone();
            y.sort();
            y == target
        });
        assert!(hit.is_some());
        let smallest = r.violations.iter().map(|f| f.instance.sets.len()).min().unwrap();
        assert!(smallest <= 5);
    }

    #[test]
    fn dihedral_exhaustive_finds_the_triple() {
        let r = run_search(&default_suite(0)[1]).unwrap();
        assert_eq!(r.instances, 21 * 21 * 21);
        assert!(r.violations.iter().any(|f| f.instance.sets == vec![vec![0, 3], vec![1], vec![0, 3]]));
        assert!(r.unconfirmed.is_empty());
    }

    #[test]
    fn budget_truncates_and_flags() {
        let mut s = default_suite(0)[1].clone();
        s.budget = 100;
        let r = run_search(&s).unwrap();
        assert_eq!(r.instances, 100);
        assert!(r.budget_exceeded);
        assert_eq!(r.space_size, "9261");
    }

    #[test]
    fn same_seed_same_report_across_thread_counts() {
        let mut s = default_suite(11)[3].clone();
        s.mode = SearchMode::Random { trials: 1500 };
        let a = run_search_with_threads(&s, Some(1)).unwrap();
        let b = run_search_with_threads(&s, Some(4)).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert!(a.found_violation());
        s.seed = 12;
        let c = run_search(&s).unwrap();
        assert_ne!(a.canonical_json(), c.canonical_json());
    }

    #[test]
    fn restricted_images_in_z9_give_a_mixture() {
        let mut s = SearchScenario::new(StatementId::SumsetLogSubmodularity, 3, 3, 20_000, 0).with_groups(&["Z9"]);
        s.restrict_y = true;
        let r = run_search(&s).unwrap();
        assert!(r.violated >= 1 && r.holds >= 1, "{} violated, {} hold", r.violated, r.holds);
        assert!(r.violations.iter().all(|f| f.instance.y.is_some()));
    }

    #[test]
    fn every_statement_runs() {
        for st in StatementId::ALL {
            let k = match st {
                StatementId::RuzsaQuadruple | StatementId::Entropy4Sets => 4,
                _ => 3,
            };
            let mut s = SearchScenario::new(st, k, 3, 20, 5);
            s.structures = Structures::Catalog { min_order: 2, max_order: 8, abelian: None };
            let r = run_search(&s).unwrap();
            assert_eq!(r.errors, 0, "{st}: {:?}", r.first_error);
            assert!(r.unconfirmed.is_empty(), "{st}");
            assert_eq!(r.holds + r.violated + r.inconclusive, 20, "{st}");
            assert_eq!(StatementId::parse(st.as_str()), Some(st));
        }
    }

    #[test]
    fn naive_agrees_with_verifiers_on_held_instances() {
        // Exact statements: the naive sides equal the verifier sides whatever the status.
        for st in [
            StatementId::NaivePairwise,
            StatementId::Nonabelian,
            StatementId::RuzsaTriple,
            StatementId::WeightedNonabelian,
            StatementId::SumsetLogSubmodularity,
            StatementId::SetMain,
            StatementId::AbelianSumset,
            StatementId::ProjectionBound,
            StatementId::ProjectionSubmodularity,
        ] {
            let mut s = SearchScenario::new(st, 3, 3, 30, 9);
            s.structures = Structures::Catalog { min_order: 2, max_order: 8, abelian: None };
            s.restrict_y = true;
            let plan = plan(&s).unwrap();
            for trial in 0..30 {
                let (gi, mut inst, mut rng) = generate(&s, &plan, trial);
                complete(&s, gi.map(|i| &plan.groups[i]), &mut inst, &mut rng);
                let v = evaluate(st, &mut inst).unwrap();
                let (l, r) = naive::exact_sides(st, &inst).unwrap();
                assert_eq!((v.lhs.as_exact(), v.rhs.as_exact()), (Some(&l), Some(&r)), "{st} trial {trial}");
            }
        }
    }
}
