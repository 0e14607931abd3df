//! Multisets of subsets of `[k]`, fractional coverings, and compressions.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::entropy::{rational, Rational};
use crate::pdfunc::{SubsetMask, MAX_ARITY};

/// Default number of visited families for [`dominates`].
pub const DEFAULT_DOMINATION_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("family contains an empty member")]
    EmptyMember,
    #[error("member {member} is not a subset of [{k}]")]
    OutOfRange { member: SubsetMask, k: usize },
    #[error("k = {0} is outside 1..={max}", max = MAX_ARITY)]
    BadArity(usize),
    #[error("family is not regular (degrees {0:?})")]
    NotRegular(Vec<usize>),
    #[error("index {0} lies in no member")]
    Infeasible(usize),
    #[error("members {0} and {1} are nested")]
    NestedPair(SubsetMask, SubsetMask),
    #[error("member position {0} out of range")]
    NoSuchMember(usize),
    #[error("index {index} has coverage {coverage} < 1")]
    NotACovering { index: usize, coverage: Rational },
    #[error("negative weight {0}")]
    NegativeWeight(Rational),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("families live on different ground sets ([{0}] vs [{1}])")]
    ArityMismatch(usize, usize),
    #[error("cannot parse `{0}` as a subset")]
    Parse(String),
}

/// Parses `{1,3}` (1-based) into a mask, checking it against `[k]`.
pub fn parse_subset(text: &str, k: usize) -> Result<SubsetMask, HypergraphError> {
    let err = || HypergraphError::Parse(text.to_string());
    let inner = text.trim().strip_prefix('{').and_then(|t| t.strip_suffix('}')).ok_or_else(err)?;
    let mut mask = SubsetMask::EMPTY;
    for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let i: usize = tok.parse().map_err(|_| err())?;
        if i == 0 || i > k {
            return Err(HypergraphError::Parse(format!("{text}: index {i} outside [1, {k}]")));
        }
        mask = mask.union(SubsetMask::singleton(i - 1));
    }
    Ok(mask)
}

/// A multiset of nonempty subsets of `[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SubsetFamily {
    k: usize,
    members: Vec<SubsetMask>,
}

impl SubsetFamily {
    pub fn new(k: usize, members: Vec<SubsetMask>) -> Result<Self, HypergraphError> {
        if k == 0 || k > MAX_ARITY {
            return Err(HypergraphError::BadArity(k));
        }
        for &m in &members {
            if m.is_empty() {
                return Err(HypergraphError::EmptyMember);
            }
            if !m.fits(k) {
                return Err(HypergraphError::OutOfRange { member: m, k });
            }
        }
        Ok(SubsetFamily { k, members })
    }

    /// Whitespace-separated literal such as `{1,2} {2,3}`.
    pub fn parse(k: usize, text: &str) -> Result<Self, HypergraphError> {
        let mut members = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let end = rest.find('}').ok_or_else(|| HypergraphError::Parse(rest.to_string()))?;
            members.push(parse_subset(&rest[..=end], k)?);
            rest = rest[end + 1..].trim_start();
        }
        Self::new(k, members)
    }

    pub fn singletons(k: usize) -> Self {
        Self::new(k, (0..k).map(SubsetMask::singleton).collect()).expect("valid arity")
    }

    /// `C_m`: every m-subset of `[k]`.
    pub fn all_of_size(k: usize, m: usize) -> Self {
        let members = SubsetMask::all(k).filter(|s| s.len() == m && m > 0).collect();
        Self::new(k, members).expect("valid arity")
    }

    /// `{[k] \ {i}}` for each i.
    pub fn leave_one_out(k: usize) -> Self {
        let full = SubsetMask::full(k);
        Self::new(k, (0..k).map(|i| full.difference(SubsetMask::singleton(i))).filter(|s| !s.is_empty()).collect())
            .expect("valid arity")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `r(i)`, 0-based `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.members.iter().filter(|m| m.contains(i)).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.k).map(|i| self.degree(i)).collect()
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = self.degrees();
        let r = d[0];
        d.iter().all(|&x| x == r).then_some(r)
    }

    /// `r₋(s) = min_{i∈s} r(i)`.
    pub fn min_degree_of(&self, s: SubsetMask) -> usize {
        s.iter().map(|i| self.degree(i)).min().unwrap_or(0)
    }

    /// Members sorted by size, then bit pattern.
    pub fn canonical(&self) -> SubsetFamily {
        let mut members = self.members.clone();
        sort_canonical(&mut members);
        SubsetFamily { k: self.k, members }
    }

    pub fn compression_weight(&self) -> u64 {
        weight(&self.members)
    }

    pub fn is_chain(&self) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(i, a)| self.members[i + 1..].iter().all(|b| a.is_subset_of(*b) || b.is_subset_of(*a)))
    }
}

impl fmt::Display for SubsetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn sort_canonical(members: &mut [SubsetMask]) {
    members.sort_by_key(|m| (m.len(), m.bits()));
}

fn weight(members: &[SubsetMask]) -> u64 {
    members.iter().map(|m| (m.len() * m.len()) as u64).sum()
}

/// Nonnegative weights on the members of a family with coverage at least 1 everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalCovering {
    family: SubsetFamily,
    weights: Vec<Rational>,
    partition: bool,
}

impl FractionalCovering {
    pub fn new(family: SubsetFamily, weights: Vec<Rational>) -> Result<Self, HypergraphError> {
        if weights.len() != family.len() {
            return Err(HypergraphError::WeightCount { expected: family.len(), got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(HypergraphError::NegativeWeight(w.clone()));
        }
        let mut partition = true;
        for i in 0..family.k() {
            let c = coverage_of(&family, &weights, i);
            if c < Rational::one() {
                return Err(HypergraphError::NotACovering { index: i + 1, coverage: c });
            }
            partition &= c.is_one();
        }
        Ok(FractionalCovering { family, weights, partition })
    }

    pub fn family(&self) -> &SubsetFamily {
        &self.family
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn is_partition(&self) -> bool {
        self.partition
    }

    /// Pairs of member and weight, in family order.
    pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, &Rational)> {
        self.family.members().iter().copied().zip(&self.weights)
    }

    pub fn coverage(&self, i: usize) -> Rational {
        coverage_of(&self.family, &self.weights, i)
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    /// Least common multiple of the weight denominators.
    pub fn lcm_denominator(&self) -> BigInt {
        self.weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
    }
}

fn coverage_of(family: &SubsetFamily, weights: &[Rational], i: usize) -> Rational {
    family
        .members()
        .iter()
        .zip(weights)
        .filter(|(m, _)| m.contains(i))
        .map(|(_, w)| w.clone())
        .sum()
}

/// `α_s = 1/r` on an r-regular family: a fractional partition.
pub fn regular_covering(family: &SubsetFamily) -> Result<FractionalCovering, HypergraphError> {
    let r = family.is_regular().ok_or_else(|| HypergraphError::NotRegular(family.degrees()))?;
    if r == 0 {
        return Err(HypergraphError::Infeasible(1));
    }
    FractionalCovering::new(family.clone(), vec![rational(1, r as i64); family.len()])
}

/// `α_s = 1/r₋(s)`.
pub fn degree_covering(family: &SubsetFamily) -> Result<FractionalCovering, HypergraphError> {
    check_feasible(family)?;
    let weights = family.members().iter().map(|&s| rational(1, family.min_degree_of(s) as i64)).collect();
    FractionalCovering::new(family.clone(), weights)
}

fn check_feasible(family: &SubsetFamily) -> Result<(), HypergraphError> {
    match (0..family.k()).find(|&i| family.degree(i) == 0) {
        Some(i) => Err(HypergraphError::Infeasible(i + 1)),
        None => Ok(()),
    }
}

/// Minimum of `Σ α_s` over all fractional coverings by the members of `family`.
///
/// Solves the packing dual `max Σ y_i` subject to `Σ_{i∈s} y_i ≤ 1` by exact
/// simplex with Bland's rule and reads `α` off the slack reduced costs.
pub fn min_covering_lp(family: &SubsetFamily) -> Result<FractionalCovering, HypergraphError> {
    check_feasible(family)?;
    let k = family.k();
    let m = family.len();
    let cols = k + m;
    // rows[r] = [a_r1 .. a_r(k+m) | b_r]; objective row holds reduced costs.
    let mut rows: Vec<Vec<Rational>> = family
        .members()
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let mut row = vec![Rational::zero(); cols + 1];
            for i in s.iter() {
                row[i] = Rational::one();
            }
            row[k + r] = Rational::one();
            row[cols] = Rational::one();
            row
        })
        .collect();
    let mut obj = vec![Rational::zero(); cols + 1];
    for c in obj.iter_mut().take(k) {
        *c = -Rational::one();
    }
    let mut basis: Vec<usize> = (k..cols).collect();

    while let Some(enter) = (0..cols).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (r, row) in rows.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[cols] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        // The dual is bounded because every index lies in some member.
        let (pr, _) = leave.expect("bounded packing LP");
        let pivot = rows[pr][enter].clone();
        rows[pr].iter_mut().for_each(|v| *v /= &pivot);
        let prow = rows[pr].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pr && !row[enter].is_zero() {
                let factor = row[enter].clone();
                row.iter_mut().zip(&prow).for_each(|(v, p)| *v -= &factor * p);
            }
        }
        let factor = obj[enter].clone();
        obj.iter_mut().zip(&prow).for_each(|(v, p)| *v -= &factor * p);
        basis[pr] = enter;
    }

    let weights: Vec<Rational> = (0..m).map(|r| obj[k + r].clone()).collect();
    let cover = FractionalCovering::new(family.clone(), weights)?;
    debug_assert_eq!(cover.total(), obj[cols], "strong duality");
    Ok(cover)
}

/// Replaces members `i` and `j` by their intersection (position `i`, dropped
/// when empty) and union (position `j`).
pub fn elementary_compression(a: &SubsetFamily, i: usize, j: usize) -> Result<SubsetFamily, HypergraphError> {
    let n = a.len();
    if i >= n {
        return Err(HypergraphError::NoSuchMember(i));
    }
    if j >= n || i == j {
        return Err(HypergraphError::NoSuchMember(j));
    }
    let (si, sj) = (a.members[i], a.members[j]);
    if si.is_subset_of(sj) || sj.is_subset_of(si) {
        return Err(HypergraphError::NestedPair(si, sj));
    }
    let mut members = a.members.clone();
    members[i] = si.intersection(sj);
    members[j] = si.union(sj);
    if members[i].is_empty() {
        members.remove(i);
    }
    Ok(SubsetFamily { k: a.k, members })
}

/// `A^#`: the chain `s_j^# = {i : r(i) ≥ j}`.
pub fn minimal_multiset(a: &SubsetFamily) -> SubsetFamily {
    let deg = a.degrees();
    let top = deg.iter().copied().max().unwrap_or(0);
    let members = (1..=top)
        .map(|j| SubsetMask::from_indices((0..a.k).filter(|&i| deg[i] >= j)))
        .filter(|s| !s.is_empty())
        .collect();
    SubsetFamily { k: a.k, members }.canonical()
}

/// One elementary compression, recorded by member values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompressionStep {
    pub left: SubsetMask,
    pub right: SubsetMask,
    pub intersection: SubsetMask,
    pub union: SubsetMask,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Domination {
    /// `B` is reached from `A` by these compressions (empty when equal).
    Yes { steps: Vec<CompressionStep> },
    No,
    BudgetExhausted { visited: usize },
}

impl Domination {
    pub fn is_yes(&self) -> bool {
        matches!(self, Domination::Yes { .. })
    }
}

/// Applies one compression to a member pair given by value.
pub fn compress_pair(a: &SubsetFamily, left: SubsetMask, right: SubsetMask) -> Result<SubsetFamily, HypergraphError> {
    let i = a.members.iter().position(|&m| m == left).ok_or(HypergraphError::NoSuchMember(usize::MAX))?;
    let j = a
        .members
        .iter()
        .enumerate()
        .position(|(p, &m)| p != i && m == right)
        .ok_or(HypergraphError::NoSuchMember(usize::MAX))?;
    elementary_compression(a, i, j)
}

/// Whether `b` is a compression of `a`, by breadth-first search over
/// canonical families. Every compression keeps the degree profile, never adds
/// members and strictly raises `Σ|s|²`, which bounds the search.
pub fn dominates(a: &SubsetFamily, b: &SubsetFamily, budget: usize) -> Result<Domination, HypergraphError> {
    if a.k != b.k {
        return Err(HypergraphError::ArityMismatch(a.k, b.k));
    }
    let start = a.canonical().members;
    let target = b.canonical().members;
    if start == target {
        return Ok(Domination::Yes { steps: Vec::new() });
    }
    let target_weight = weight(&target);
    if a.degrees() != b.degrees() || weight(&start) >= target_weight || target.len() > start.len() {
        return Ok(Domination::No);
    }

    let mut parent: HashMap<Vec<SubsetMask>, (Vec<SubsetMask>, CompressionStep)> = HashMap::new();
    let mut seen: HashSet<Vec<SubsetMask>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(state) = queue.pop_front() {
        let mut tried = HashSet::new();
        for i in 0..state.len() {
            for j in i + 1..state.len() {
                let (x, y) = (state[i], state[j]);
                if x.is_subset_of(y) || y.is_subset_of(x) || !tried.insert((x, y)) {
                    continue;
                }
                let mut next: Vec<SubsetMask> = state
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != i && p != j)
                    .map(|(_, &m)| m)
                    .collect();
                let (cap, cup) = (x.intersection(y), x.union(y));
                if !cap.is_empty() {
                    next.push(cap);
                }
                next.push(cup);
                sort_canonical(&mut next);
                if weight(&next) > target_weight || next.len() < target.len() || seen.contains(&next) {
                    continue;
                }
                let step = CompressionStep { left: x, right: y, intersection: cap, union: cup };
                seen.insert(next.clone());
                parent.insert(next.clone(), (state.clone(), step));
                if next == target {
                    let mut steps = Vec::new();
                    let mut cur = next;
                    while let Some((prev, step)) = parent.remove(&cur) {
                        steps.push(step);
                        cur = prev;
                    }
                    steps.reverse();
                    return Ok(Domination::Yes { steps });
                }
                if seen.len() >= budget {
                    return Ok(Domination::BudgetExhausted { visited: seen.len() });
                }
                queue.push_back(next);
            }
        }
    }
    Ok(Domination::No)
}

/// Replays a compression chain from `a`, returning every intermediate family
/// (starting with `a`).
pub fn replay_compressions(a: &SubsetFamily, steps: &[CompressionStep]) -> Result<Vec<SubsetFamily>, HypergraphError> {
    let mut chain = vec![a.clone()];
    for step in steps {
        let next = compress_pair(chain.last().expect("nonempty"), step.left, step.right)?;
        chain.push(next);
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(k: usize, text: &str) -> SubsetFamily {
        SubsetFamily::parse(k, text).unwrap()
    }

    fn binom(n: usize, r: usize) -> usize {
        (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn degrees_of_standard_families() {
        assert_eq!(SubsetFamily::singletons(4).is_regular(), Some(1));
        for n in 2..=6 {
            for m in 1..=n {
                assert_eq!(SubsetFamily::all_of_size(n, m).is_regular(), Some(binom(n - 1, m - 1)));
            }
        }
        assert_eq!(SubsetFamily::leave_one_out(5).is_regular(), Some(4));
        assert_eq!(fam(2, "{1} {1,2}").degrees(), vec![2, 1]);
        assert_eq!(fam(2, "{1} {1,2}").is_regular(), None);
    }

    #[test]
    fn parse_rejects_bad_literals() {
        assert!(SubsetFamily::parse(3, "{1,4}").is_err());
        assert!(SubsetFamily::parse(3, "{1,2").is_err());
        assert!(matches!(SubsetFamily::parse(3, "{}"), Err(HypergraphError::EmptyMember)));
        assert_eq!(fam(3, "{1,2} {2,3}").to_string(), "{1,2} {2,3}");
    }

    #[test]
    fn regular_and_degree_coverings() {
        let c = regular_covering(&SubsetFamily::singletons(3)).unwrap();
        assert!(c.is_partition());
        assert!(c.weights().iter().all(|w| w.is_one()));
        let c = regular_covering(&SubsetFamily::all_of_size(3, 2)).unwrap();
        assert!(c.is_partition());
        assert!(c.weights().iter().all(|w| *w == rational(1, 2)));
        assert!(matches!(regular_covering(&fam(2, "{1} {1,2}")), Err(HypergraphError::NotRegular(_))));

        let d = degree_covering(&fam(2, "{1} {1,2}")).unwrap();
        assert_eq!(d.weights(), &[rational(1, 2), rational(1, 1)]);
        assert_eq!(d.coverage(0), rational(3, 2));
        assert!(!d.is_partition());
    }

    #[test]
    fn covering_check_rejects_undercoverage() {
        let f = fam(2, "{1} {1,2}");
        let err = FractionalCovering::new(f, vec![rational(1, 2), rational(1, 2)]).unwrap_err();
        assert!(matches!(err, HypergraphError::NotACovering { index: 2, .. }));
    }

    #[test]
    fn lp_optima() {
        let c = min_covering_lp(&SubsetFamily::singletons(4)).unwrap();
        assert_eq!(c.total(), rational(4, 1));
        let c = min_covering_lp(&SubsetFamily::all_of_size(3, 2)).unwrap();
        assert_eq!(c.total(), rational(3, 2));
        let c = min_covering_lp(&fam(3, "{1,2} {2,3} {1,3} {1,2,3}")).unwrap();
        assert_eq!(c.total(), rational(1, 1));
        assert!(matches!(min_covering_lp(&fam(3, "{1,2}")), Err(HypergraphError::Infeasible(3))));
    }

    #[test]
    fn lp_matches_vertex_enumeration_on_small_families() {
        // Oracle: minimum over weights in {0, 1/2, 1} is optimal for these families.
        let cases = ["{1,2} {2,3} {1,3}", "{1} {2,3} {1,2,3}", "{1,2} {2,3}", "{1,2,3} {1} {2} {3}"];
        for text in cases {
            let f = fam(3, text);
            let n = f.len();
            let grid = [rational(0, 1), rational(1, 2), rational(1, 1)];
            let mut best: Option<Rational> = None;
            for code in 0..3usize.pow(n as u32) {
                let w: Vec<Rational> = (0..n).map(|p| grid[(code / 3usize.pow(p as u32)) % 3].clone()).collect();
                if let Ok(c) = FractionalCovering::new(f.clone(), w) {
                    let t = c.total();
                    if best.as_ref().is_none_or(|b| t < *b) {
                        best = Some(t);
                    }
                }
            }
            assert_eq!(min_covering_lp(&f).unwrap().total(), best.unwrap(), "{text}");
        }
    }

    #[test]
    fn compression_examples() {
        let a = fam(3, "{1,2} {2,3}");
        let c = elementary_compression(&a, 0, 1).unwrap();
        assert_eq!(c.canonical(), fam(3, "{2} {1,2,3}"));
        assert_eq!((a.compression_weight(), c.compression_weight()), (8, 10));

        let d = elementary_compression(&fam(2, "{1} {2}"), 0, 1).unwrap();
        assert_eq!(d, fam(2, "{1,2}"));
        assert_eq!(d.compression_weight(), 4);

        assert!(matches!(elementary_compression(&fam(2, "{1} {1,2}"), 0, 1), Err(HypergraphError::NestedPair(..))));
    }

    #[test]
    fn minimal_multiset_examples() {
        assert_eq!(minimal_multiset(&fam(3, "{1,2} {2,3}")), fam(3, "{2} {1,2,3}"));
        let chain = fam(3, "{1} {1,2} {1,2,3}");
        assert_eq!(minimal_multiset(&chain), chain);
        assert_eq!(minimal_multiset(&fam(1, "{1} {1} {1}")), fam(1, "{1} {1} {1}"));
    }

    #[test]
    fn domination_examples() {
        let a = fam(3, "{1,2} {2,3}");
        match dominates(&a, &minimal_multiset(&a), DEFAULT_DOMINATION_BUDGET).unwrap() {
            Domination::Yes { steps } => {
                let chain = replay_compressions(&a, &steps).unwrap();
                assert_eq!(chain.last().unwrap().canonical(), minimal_multiset(&a));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(dominates(&a, &a, 10).unwrap(), Domination::Yes { steps: vec![] });
        assert_eq!(dominates(&fam(2, "{1} {2}"), &fam(2, "{1,2} {1}"), 100).unwrap(), Domination::No);
    }

    #[test]
    fn budget_is_reported() {
        let a = fam(4, "{1,2} {2,3} {3,4} {1,4} {1,3}");
        let b = minimal_multiset(&a);
        assert!(matches!(dominates(&a, &b, 1).unwrap(), Domination::BudgetExhausted { .. }));
    }
}
