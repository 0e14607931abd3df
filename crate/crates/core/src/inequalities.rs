//! Verifiers for entropy and compound-set cardinality inequalities.
//!
//! Cardinality statements are decided exactly: rational exponents are cleared
//! by raising both sides to the lcm `L` of their denominators and comparing
//! big integers. Entropy statements compare `f64` bits with the three-way
//! tolerance band of [`crate::entropy::classify_margin`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use serde_json::json;
use thiserror::Error;

use crate::algebra::{nary_sumset, sumset_size, AlgebraError, ElementId, FiniteGroup, FiniteRing, GroundFamily};
use crate::entropy::{
    classify_margin, entropy_bits, product_distribution, rational, EntropyError, FloatOutcome, JointDistribution,
    Marginal, Rational, Var,
};
use crate::hypergraph::{replay_compressions, CompressionStep, FractionalCovering, HypergraphError, SubsetFamily};
use crate::pdfunc::{
    compound_image, compound_preimage, for_each_tuple, image_of_points, is_partition_determined,
    is_strongly_partition_determined, PdError, PdFunction, PdWitness, SubsetMask, Value, DEFAULT_TUPLE_BUDGET,
};
use crate::poly::{Poly, PolyError};

/// Largest exponent accepted when clearing denominators.
pub const MAX_EXPONENT: u32 = 1 << 16;

#[derive(Debug, Error)]
pub enum InequalityError {
    #[error("f is not strongly partition-determined ({} at s={}, t={})", .0.rule, .0.s, .0.t)]
    NotStronglyPd(PdWitness),
    #[error("f is not partition-determined with respect to the family (fails at s={})", .0.s)]
    NotPd(PdWitness),
    #[error("invalid compression chain: {0}")]
    InvalidChain(String),
    #[error("group {0} is not abelian")]
    NotAbelian(String),
    #[error("ring {0} is not commutative")]
    NotCommutative(String),
    #[error("element {0} of D is not in B_1 + ... + B_k")]
    DNotInSumset(ElementId),
    #[error("weights are not a fractional partition: index {index} has coverage {coverage}")]
    NotAPartition { index: usize, coverage: Rational },
    #[error("F differs from f(g(x)) at x = {0:?}")]
    IdentityFailsAt(Vec<usize>),
    #[error("middle enumeration needs {needed} tuples, budget is {budget}")]
    MiddleEnumerationBudgetExceeded { needed: u128, budget: u128 },
    #[error("exponent {0} too large for exact comparison")]
    ExponentTooLarge(BigInt),
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Pd(#[from] PdError),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type Result<T> = std::result::Result<T, InequalityError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Either side of an inequality: an exact integer or entropy in bits.
#[derive(Clone, Debug, PartialEq)]
pub enum Quantity {
    Exact(BigInt),
    Bits(f64),
}

impl Quantity {
    pub fn as_bits(&self) -> Option<f64> {
        match self {
            Quantity::Bits(b) => Some(*b),
            Quantity::Exact(_) => None,
        }
    }

    pub fn as_exact(&self) -> Option<&BigInt> {
        match self {
            Quantity::Exact(n) => Some(n),
            Quantity::Bits(_) => None,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Exact(n) => write!(f, "{n}"),
            Quantity::Bits(b) => write!(f, "{b:.9}"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantity::Exact(n) => s.collect_str(n),
            Quantity::Bits(b) => s.serialize_f64(*b),
        }
    }
}

/// Outcome of checking `lhs <= rhs`. `margin = rhs - lhs`.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub statement: String,
    pub status: Status,
    pub lhs: Quantity,
    pub rhs: Quantity,
    pub margin: Quantity,
    pub exact: bool,
    /// `log2(rhs / lhs)` for exact verdicts, `rhs - lhs` for entropy verdicts.
    pub slack_bits: f64,
    pub witness: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl Verdict {
    pub fn exact(statement: &str, lhs: BigInt, rhs: BigInt, witness: serde_json::Value) -> Self {
        let status = if lhs <= rhs { Status::Holds } else { Status::Violated };
        let slack_bits = if lhs.is_zero() { f64::INFINITY } else { log2_big(&rhs) - log2_big(&lhs) };
        Verdict {
            statement: statement.to_string(),
            status,
            margin: Quantity::Exact(&rhs - &lhs),
            lhs: Quantity::Exact(lhs),
            rhs: Quantity::Exact(rhs),
            exact: true,
            slack_bits,
            witness,
            note: None,
            seed: None,
            runtime_ms: None,
        }
    }

    pub fn bits(statement: &str, lhs: f64, rhs: f64, witness: serde_json::Value) -> Self {
        let margin = rhs - lhs;
        let status = match classify_margin(margin) {
            FloatOutcome::Holds => Status::Holds,
            FloatOutcome::Inconclusive => Status::Inconclusive,
            FloatOutcome::Violated => Status::Violated,
        };
        Verdict {
            statement: statement.to_string(),
            status,
            lhs: Quantity::Bits(lhs),
            rhs: Quantity::Bits(rhs),
            margin: Quantity::Bits(margin),
            exact: false,
            slack_bits: margin,
            witness,
            note: None,
            seed: None,
            runtime_ms: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }

    /// One-line summary: `lhs <= rhs` or `lhs > rhs` with the status.
    pub fn summary(&self) -> String {
        let rel = match self.status {
            Status::Holds => "<=",
            Status::Violated => ">",
            Status::Inconclusive => "~",
        };
        let unit = if self.exact { "" } else { " bits" };
        format!("{}: {}{unit} {rel} {}{unit} ({})", self.statement, self.lhs, self.rhs, self.status)
    }
}

pub fn log2_big(n: &BigInt) -> f64 {
    if !n.is_positive() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().expect("fits").log2();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().expect("fits").log2() + shift as f64
}

fn pow_big(base: &BigInt, exp: &BigInt) -> Result<BigInt> {
    let e = exp
        .to_u32()
        .filter(|&e| e <= MAX_EXPONENT)
        .ok_or_else(|| InequalityError::ExponentTooLarge(exp.clone()))?;
    Ok(base.pow(e))
}

fn big(n: usize) -> BigInt {
    BigInt::from(n)
}

/// `L · α` as an integer, given that `L` clears the denominator of `α`.
fn scaled(alpha: &Rational, l: &BigInt) -> BigInt {
    (alpha * Rational::from_integer(l.clone())).to_integer()
}

fn lcm_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
}

fn ids(xs: &[ElementId]) -> Vec<usize> {
    xs.iter().map(|e| e.0).collect()
}

fn set_ids(xs: &BTreeSet<ElementId>) -> Vec<usize> {
    xs.iter().map(|e| e.0).collect()
}

// ---------------------------------------------------------------- entropy

/// Independent `Z` with the given marginals, checked against `f`'s ground sets.
fn independent(f: &PdFunction, marginals: &[Marginal]) -> Result<JointDistribution> {
    if marginals.len() != f.k() {
        return Err(InequalityError::InvalidInput(format!(
            "expected {} marginals, got {}",
            f.k(),
            marginals.len()
        )));
    }
    for (i, m) in marginals.iter().enumerate() {
        if let Some(bad) = m.support().into_iter().find(|e| !f.ground().set(i).contains(e)) {
            return Err(PdError::ElementOutOfGround { index: i + 1, element: bad }.into());
        }
    }
    Ok(product_distribution(marginals))
}

fn require_strong(f: &PdFunction) -> Result<()> {
    let out = is_strongly_partition_determined(f, DEFAULT_TUPLE_BUDGET)?;
    match out.witness {
        Some(w) => Err(InequalityError::NotStronglyPd(w)),
        None => Ok(()),
    }
}

/// `H(f_s)` for every mask asked for, computed once.
struct EntropyTable<'a> {
    dist: &'a JointDistribution,
    f: &'a PdFunction,
    cache: HashMap<SubsetMask, f64>,
}

impl<'a> EntropyTable<'a> {
    fn new(dist: &'a JointDistribution, f: &'a PdFunction) -> Self {
        EntropyTable { dist, f, cache: HashMap::new() }
    }

    fn h(&mut self, s: SubsetMask) -> f64 {
        if s.is_empty() {
            return 0.0;
        }
        let (dist, f) = (self.dist, self.f);
        *self.cache.entry(s).or_insert_with(|| entropy_bits(dist, &[Var::Func(f.clone(), s)]))
    }

    fn submodularity(&mut self, s: SubsetMask, t: SubsetMask) -> Verdict {
        let (u, i) = (s.union(t), s.intersection(t));
        let (hu, hi, hs, ht) = (self.h(u), self.h(i), self.h(s), self.h(t));
        Verdict::bits(
            "entropy-submodularity",
            hu + hi,
            hs + ht,
            json!({
                "s": s, "t": t,
                "H(f_union)": hu, "H(f_intersection)": hi, "H(f_s)": hs, "H(f_t)": ht,
            }),
        )
    }
}

/// `H(f_{s∪t}) + H(f_{s∩t}) <= H(f_s) + H(f_t)` for independent `Z`.
pub fn check_entropy_submodularity(
    f: &PdFunction,
    marginals: &[Marginal],
    s: SubsetMask,
    t: SubsetMask,
) -> Result<Verdict> {
    for m in [s, t] {
        if !m.fits(f.k()) {
            return Err(PdError::MaskOutOfRange { mask: m, k: f.k() }.into());
        }
    }
    require_strong(f)?;
    let dist = independent(f, marginals)?;
    Ok(EntropyTable::new(&dist, f).submodularity(s, t))
}

/// The submodularity check over every ordered pair of subsets of `[k]`.
pub fn check_entropy_submodularity_all_pairs(f: &PdFunction, marginals: &[Marginal]) -> Result<Vec<Verdict>> {
    require_strong(f)?;
    let dist = independent(f, marginals)?;
    let mut table = EntropyTable::new(&dist, f);
    let k = f.k();
    let mut out = Vec::new();
    for s in SubsetMask::all(k) {
        for t in SubsetMask::all(k) {
            out.push(table.submodularity(s, t));
        }
    }
    Ok(out)
}

/// `Σ_{s∈A} H(f_s) >= Σ_{t∈B} H(f_t)` along a compression chain from `A` to `B`.
pub fn check_compression_entropy(
    f: &PdFunction,
    marginals: &[Marginal],
    a: &SubsetFamily,
    b: &SubsetFamily,
    steps: &[CompressionStep],
) -> Result<Verdict> {
    if a.k() != f.k() || b.k() != f.k() {
        return Err(InequalityError::InvalidChain(format!("families must live on [{}]", f.k())));
    }
    let chain = replay_compressions(a, steps).map_err(|e| InequalityError::InvalidChain(e.to_string()))?;
    let end = chain.last().expect("nonempty").canonical();
    if end != b.canonical() {
        return Err(InequalityError::InvalidChain(format!("chain ends at {end}, not {}", b.canonical())));
    }
    require_strong(f)?;
    let dist = independent(f, marginals)?;
    let mut table = EntropyTable::new(&dist, f);
    let step_verdicts: Vec<Verdict> = steps.iter().map(|st| table.submodularity(st.left, st.right)).collect();
    let sum_a: f64 = a.members().iter().map(|&s| table.h(s)).sum();
    let sum_b: f64 = b.members().iter().map(|&s| table.h(s)).sum();
    let worst = step_verdicts.iter().map(|v| v.slack_bits).fold(f64::INFINITY, f64::min);
    let mut v = Verdict::bits(
        "compression-entropy",
        sum_b,
        sum_a,
        json!({
            "A": a.to_string(), "B": b.to_string(),
            "steps": steps,
            "step_margins": step_verdicts.iter().map(|v| v.slack_bits).collect::<Vec<_>>(),
        }),
    );
    if steps.is_empty() {
        v = v.with_note("A equals B");
    } else if worst < 0.0 {
        v = v.with_note(format!("smallest step margin {worst:.3e}"));
    }
    Ok(v)
}

/// `H(f_[n]) <= Σ α_s H(f_s)` for independent `Z`.
pub fn check_entropy_upper_bound(
    f: &PdFunction,
    marginals: &[Marginal],
    covering: &FractionalCovering,
) -> Result<Verdict> {
    if covering.family().k() != f.k() {
        return Err(HypergraphError::ArityMismatch(covering.family().k(), f.k()).into());
    }
    require_strong(f)?;
    let dist = independent(f, marginals)?;
    let mut table = EntropyTable::new(&dist, f);
    let lhs = table.h(f.full_mask());
    let terms: Vec<(SubsetMask, f64, f64)> = covering
        .iter()
        .map(|(s, w)| (s, w.to_f64().expect("finite weight"), table.h(s)))
        .collect();
    let rhs = terms.iter().map(|(_, w, h)| w * h).sum();
    Ok(Verdict::bits(
        "entropy-upper-bound",
        lhs,
        rhs,
        json!({
            "terms": terms.iter().zip(covering.weights()).map(|((s, _, h), w)| json!({"s": s, "alpha": w.to_string(), "H": h})).collect::<Vec<_>>(),
            "partition": covering.is_partition(),
        }),
    ))
}

fn coords(one_based: &[usize]) -> Var {
    Var::Coords(SubsetMask::from_one_based(one_based))
}

fn cond(dist: &JointDistribution, target: &[usize], given: &[usize]) -> f64 {
    crate::entropy::conditional_entropy_bits(dist, &[coords(target)], &[coords(given)])
}

/// `H(Z_1..Z_4) <= (1/3)[H(Z_123) + H(Z_234) + H(Z_134 | Z_2) + H(Z_124 | Z_3)]`,
/// the entropy analogue of the four-set sumset question. It is false in general.
pub fn check_entropy_4sets(dist: &JointDistribution) -> Result<Verdict> {
    if dist.k() != 4 {
        return Err(InequalityError::InvalidInput(format!("needs k = 4, got {}", dist.k())));
    }
    let h = |c: &[usize]| entropy_bits(dist, &[coords(c)]);
    let lhs = h(&[1, 2, 3, 4]);
    let terms = [h(&[1, 2, 3]), h(&[2, 3, 4]), cond(dist, &[1, 3, 4], &[2]), cond(dist, &[1, 2, 4], &[3])];
    let rhs = terms.iter().sum::<f64>() / 3.0;
    Ok(Verdict::bits(
        "entropy-4sets",
        lhs,
        rhs,
        json!({
            "H(Z1,Z2,Z3)": terms[0], "H(Z2,Z3,Z4)": terms[1],
            "H(Z1,Z3,Z4|Z2)": terms[2], "H(Z1,Z2,Z4|Z3)": terms[3],
        }),
    ))
}

/// `Z_2 = Z_3` uniform on `m` points, `Z_1 = Z_4` constant.
pub fn entropy_4sets_counterexample_distribution(m: usize) -> JointDistribution {
    assert!(m >= 1);
    let atoms = (0..m).map(|v| (vec![ElementId(0), ElementId(v), ElementId(v), ElementId(0)], rational(1, m as i64)));
    JointDistribution::from_atoms(4, atoms).expect("uniform law")
}

/// The fixed counterexample: `lhs = log₂ m`, `rhs = (2/3) log₂ m`.
pub fn check_entropy_counterexample_4sets(m: usize) -> Verdict {
    check_entropy_4sets(&entropy_4sets_counterexample_distribution(m))
        .expect("k = 4")
        .with_note(format!("Z2 = Z3 uniform on {m} points, Z1 = Z4 = 0"))
}

/// `(k-1) H(Z) <= Σ_{i<j} H(Z_i, Z_j | Z_(i,j))` for any joint law.
pub fn check_pairwise_conditional(dist: &JointDistribution) -> Result<Verdict> {
    let k = dist.k();
    if k < 2 {
        return Err(InequalityError::InvalidInput("needs k >= 2".into()));
    }
    let lhs = (k - 1) as f64 * entropy_bits(dist, &[Var::Coords(SubsetMask::full(k))]);
    let mut terms = Vec::new();
    let mut rhs = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let between = SubsetMask::from_indices(i + 1..j);
            let pair = SubsetMask::from_indices([i, j]);
            let given: Vec<Var> = if between.is_empty() { vec![] } else { vec![Var::Coords(between)] };
            let h = crate::entropy::conditional_entropy_bits(dist, &[Var::Coords(pair)], &given);
            terms.push(json!({"i": i + 1, "j": j + 1, "H": h}));
            rhs += h;
        }
    }
    Ok(Verdict::bits("pairwise-conditional", lhs, rhs, json!({ "k": k, "terms": terms })))
}

// ---------------------------------------------------------------- compound sets

fn require_pd(f: &PdFunction, family: &SubsetFamily) -> Result<()> {
    let out = is_partition_determined(f, family.members(), DEFAULT_TUPLE_BUDGET)?;
    match out.witness {
        Some(w) => Err(InequalityError::NotPd(w)),
        None => Ok(()),
    }
}

/// `|Y|^L <= Π n_s^{L α_s}` with the given per-member counts.
fn covering_bound(
    statement: &str,
    y: usize,
    covering: &FractionalCovering,
    counts: &[usize],
    extra: serde_json::Value,
) -> Result<Verdict> {
    let l = covering.lcm_denominator();
    let lhs = pow_big(&big(y), &l)?;
    let mut rhs = BigInt::one();
    let mut terms = Vec::new();
    for ((s, w), &n) in covering.iter().zip(counts) {
        rhs *= pow_big(&big(n), &scaled(w, &l))?;
        terms.push(json!({"s": s, "alpha": w.to_string(), "size": n}));
    }
    Ok(Verdict::exact(statement, lhs, rhs, json!({ "size": y, "L": l.to_string(), "terms": terms, "input": extra })))
}

/// `|Y| <= Π |f_s(f⁻¹(Y))|^{α_s}` for `f` partition-determined with respect to the covering's family.
pub fn check_set_main(f: &PdFunction, ys: &BTreeSet<Value>, covering: &FractionalCovering) -> Result<Verdict> {
    if covering.family().k() != f.k() {
        return Err(HypergraphError::ArityMismatch(covering.family().k(), f.k()).into());
    }
    require_pd(f, covering.family())?;
    let pre = compound_preimage(f, f.full_mask(), ys)?;
    let counts: Vec<usize> = covering.family().members().iter().map(|&s| image_of_points(f, s, &pre).len()).collect();
    covering_bound(
        "set-main",
        ys.len(),
        covering,
        &counts,
        json!({ "Y": ys.iter().map(|v| v.to_string()).collect::<Vec<_>>(), "preimage_size": pre.len() }),
    )
}

/// The full compound set: `|f(X_[k])| <= Π |f(X_s)|^{α_s}`.
pub fn check_full_compound(f: &PdFunction, covering: &FractionalCovering) -> Result<Verdict> {
    let image = compound_image(f, f.full_mask())?;
    let mut v = check_set_main(f, &image, covering)?;
    v.statement = "full-compound".into();
    Ok(v)
}

fn projection_size(points: &[Vec<ElementId>], s: SubsetMask) -> usize {
    if points.is_empty() {
        return 0;
    }
    points.iter().map(|x| s.project(x)).collect::<BTreeSet<_>>().len()
}

fn check_points(points: &[Vec<ElementId>], k: usize) -> Result<()> {
    if let Some(x) = points.iter().find(|x| x.len() != k) {
        return Err(InequalityError::InvalidInput(format!("point {:?} does not have {k} coordinates", ids(x))));
    }
    Ok(())
}

/// `|Y| <= Π |π_s(Y)|^{α_s}` for a set `Y` of k-tuples.
pub fn check_projection_bound(points: &[Vec<ElementId>], covering: &FractionalCovering) -> Result<Verdict> {
    let k = covering.family().k();
    check_points(points, k)?;
    let distinct: BTreeSet<&Vec<ElementId>> = points.iter().collect();
    let counts: Vec<usize> = covering.family().members().iter().map(|&s| projection_size(points, s)).collect();
    covering_bound(
        "projection-bound",
        distinct.len(),
        covering,
        &counts,
        json!({ "Y": points.iter().map(|x| ids(x)).collect::<Vec<_>>() }),
    )
}

/// `|π_{s∪t}(Y)| · |π_{s∩t}(Y)| <= |π_s(Y)| · |π_t(Y)|`. Not a theorem.
pub fn check_projection_submodularity(points: &[Vec<ElementId>], k: usize, s: SubsetMask, t: SubsetMask) -> Result<Verdict> {
    check_points(points, k)?;
    let n = |m: SubsetMask| if m.is_empty() { usize::from(!points.is_empty()) } else { projection_size(points, m) };
    let (u, i) = (s.union(t), s.intersection(t));
    let (nu, ni, ns, nt) = (n(u), n(i), n(s), n(t));
    Ok(Verdict::exact(
        "projection-submodularity",
        big(nu * ni),
        big(ns * nt),
        json!({
            "Y": points.iter().map(|x| ids(x)).collect::<Vec<_>>(),
            "s": s, "t": t,
            "|pi_union|": nu, "|pi_intersection|": ni, "|pi_s|": ns, "|pi_t|": nt,
        }),
    ))
}

/// `Y = {000, 100, 010, 001, 101}` in `{0,1}³` with `s = {1,2}`, `t = {2,3}`.
pub fn projection_counterexample_points() -> Vec<Vec<ElementId>> {
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1]]
        .iter()
        .map(|p| p.iter().map(|&v| ElementId(v)).collect())
        .collect()
}

pub fn projection_nonsubmodularity_example() -> Verdict {
    check_projection_submodularity(
        &projection_counterexample_points(),
        3,
        SubsetMask::from_one_based(&[1, 2]),
        SubsetMask::from_one_based(&[2, 3]),
    )
    .expect("3-tuples")
}

/// `|f_{s∪t}(P)| · |f_{s∩t}(P)| <= |f_s(P)| · |f_t(P)|` with `P = f⁻¹(Y)`. Not a theorem.
pub fn check_compound_log_submodularity(
    f: &PdFunction,
    ys: &BTreeSet<Value>,
    s: SubsetMask,
    t: SubsetMask,
) -> Result<Verdict> {
    for m in [s, t] {
        if !m.fits(f.k()) {
            return Err(PdError::MaskOutOfRange { mask: m, k: f.k() }.into());
        }
    }
    let pre = compound_preimage(f, f.full_mask(), ys)?;
    let n = |m: SubsetMask| image_of_points(f, m, &pre).len();
    let (u, i) = (s.union(t), s.intersection(t));
    let (nu, ni, ns, nt) = (n(u), n(i), n(s), n(t));
    Ok(Verdict::exact(
        "compound-log-submodularity",
        big(nu * ni),
        big(ns * nt),
        json!({
            "Y": ys.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "s": s, "t": t,
            "|f_union|": nu, "|f_intersection|": ni, "|f_s|": ns, "|f_t|": nt,
        }),
    ))
}

/// Log-submodularity of sumset sizes for the ordered sum on `sets`, over
/// `Y ⊆ X_1 + .. + X_k` (the full sumset when `y` is `None`).
pub fn sumset_log_submodularity_probe(
    g: &FiniteGroup,
    sets: &[Vec<ElementId>],
    y: Option<&[ElementId]>,
    s: SubsetMask,
    t: SubsetMask,
) -> Result<Verdict> {
    let ground = GroundFamily::new(g.order(), sets.to_vec())
        .map_err(|e| InequalityError::InvalidInput(e.to_string()))?;
    let f = crate::pdfunc::builtin_ordered_product(g, ground)?;
    let image = compound_image(&f, f.full_mask())?;
    let ys = match y {
        None => image,
        Some(y) => {
            let ys: BTreeSet<Value> = y.iter().map(|&e| Value::GroupElem(e)).collect();
            if let Some(bad) = ys.iter().find(|v| !image.contains(v)) {
                return Err(PdError::YNotInImage(bad.clone()).into());
            }
            ys
        }
    };
    let mut v = check_compound_log_submodularity(&f, &ys, s, t)?;
    v.statement = "sumset-log-submodularity".into();
    v.witness["group"] = json!(g.name());
    v.witness["sets"] = json!(sets.iter().map(|x| ids(x)).collect::<Vec<_>>());
    Ok(v)
}

/// `|A+B+C| |B| > |A+B| |B+C|` in `Z10` with `A = {0,4,8}`, `B = {0,2,4,5,6,8}`,
/// `C = {5,7}`: `10 · 6 = 60 > 56 = 8 · 7`.
pub fn sumset_log_submodularity_example() -> Verdict {
    let z10 = crate::algebra::cyclic_group(10);
    let sets = [vec![0, 4, 8], vec![0, 2, 4, 5, 6, 8], vec![5, 7]];
    let sets: Vec<Vec<ElementId>> = sets.iter().map(|x| x.iter().map(|&v| ElementId(v)).collect()).collect();
    sumset_log_submodularity_probe(
        &z10,
        &sets,
        None,
        SubsetMask::from_one_based(&[1, 2]),
        SubsetMask::from_one_based(&[2, 3]),
    )
    .expect("valid instance")
}

// ---------------------------------------------------------------- abelian sumsets

fn require_abelian(g: &FiniteGroup) -> Result<()> {
    if g.is_abelian() {
        Ok(())
    } else {
        Err(InequalityError::NotAbelian(g.name().to_string()))
    }
}

fn sum_over(g: &FiniteGroup, bs: &[Vec<ElementId>], s: SubsetMask) -> Result<BTreeSet<ElementId>> {
    let ops: Vec<&[ElementId]> = s.iter().map(|i| bs[i].as_slice()).collect();
    Ok(nary_sumset(g, &ops)?)
}

fn abelian_inputs(g: &FiniteGroup, a: &[ElementId], bs: &[Vec<ElementId>], d: &[ElementId]) -> Result<usize> {
    require_abelian(g)?;
    if bs.is_empty() || a.is_empty() || d.is_empty() {
        return Err(InequalityError::InvalidInput("A, D and every B_i must be nonempty".into()));
    }
    let k = bs.len();
    let full = sum_over(g, bs, SubsetMask::full(k))?;
    if let Some(&bad) = d.iter().find(|x| !full.contains(x)) {
        return Err(InequalityError::DNotInSumset(bad));
    }
    Ok(k)
}

/// `|A+D|^c <= |D|^{c-1} Π |A + B⁺_s|^{α_s}` with `c = Σ α_s` and `α` a fractional partition.
pub fn check_abelian_sumset(
    g: &FiniteGroup,
    a: &[ElementId],
    bs: &[Vec<ElementId>],
    d: &[ElementId],
    covering: &FractionalCovering,
) -> Result<Verdict> {
    let k = abelian_inputs(g, a, bs, d)?;
    if covering.family().k() != k {
        return Err(HypergraphError::ArityMismatch(covering.family().k(), k).into());
    }
    if let Some(i) = (0..k).find(|&i| !covering.coverage(i).is_one()) {
        return Err(InequalityError::NotAPartition { index: i + 1, coverage: covering.coverage(i) });
    }
    let c = covering.total();
    let l = lcm_of(covering.weights().iter().chain([&c]));
    let a_d = sumset_size(g, &[a, d]);
    let lhs = pow_big(&big(a_d), &scaled(&c, &l))?;
    let mut rhs = pow_big(&big(d.len()), &scaled(&(&c - Rational::one()), &l))?;
    let mut terms = Vec::new();
    for (s, w) in covering.iter() {
        let bplus = sum_over(g, bs, s)?;
        let bplus: Vec<ElementId> = bplus.into_iter().collect();
        let n = sumset_size(g, &[a, &bplus]);
        rhs *= pow_big(&big(n), &scaled(w, &l))?;
        terms.push(json!({"s": s, "alpha": w.to_string(), "|A+B_s|": n}));
    }
    Ok(Verdict::exact(
        "abelian-sumset",
        lhs,
        rhs,
        json!({
            "group": g.name(), "A": ids(a), "B": bs.iter().map(|b| ids(b)).collect::<Vec<_>>(), "D": ids(d),
            "c": c.to_string(), "L": l.to_string(), "|A+D|": a_d, "|D|": d.len(), "terms": terms,
        }),
    ))
}

/// `|A+D|^{|C|} <= |D|^{|C|-r} Π |A + B⁺_s|` for an r-regular family `C`.
pub fn check_regular_abelian(
    g: &FiniteGroup,
    a: &[ElementId],
    bs: &[Vec<ElementId>],
    d: &[ElementId],
    family: &SubsetFamily,
) -> Result<Verdict> {
    let k = abelian_inputs(g, a, bs, d)?;
    if family.k() != k {
        return Err(HypergraphError::ArityMismatch(family.k(), k).into());
    }
    let r = family.is_regular().ok_or_else(|| HypergraphError::NotRegular(family.degrees()))?;
    let m = family.len();
    let a_d = sumset_size(g, &[a, d]);
    let lhs = big(a_d).pow(m as u32);
    let mut rhs = big(d.len()).pow((m - r) as u32);
    let mut terms = Vec::new();
    for &s in family.members() {
        let bplus: Vec<ElementId> = sum_over(g, bs, s)?.into_iter().collect();
        let n = sumset_size(g, &[a, &bplus]);
        rhs *= big(n);
        terms.push(json!({"s": s, "|A+B_s|": n}));
    }
    Ok(Verdict::exact(
        "regular-abelian",
        lhs,
        rhs,
        json!({ "group": g.name(), "r": r, "|C|": m, "|A+D|": a_d, "|D|": d.len(), "terms": terms }),
    ))
}

// ---------------------------------------------------------------- non-abelian sumsets

/// `A(i, j)` with the middle elements attaining it (1-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairBound {
    pub i: usize,
    pub j: usize,
    pub value: usize,
    pub argmax: Vec<usize>,
}

/// `max |X_i + x_{i+1} + .. + x_{j-1} + X_j|` over the middle elements.
pub fn pair_bound(g: &FiniteGroup, xs: &[Vec<ElementId>], i: usize, j: usize, budget: u128) -> Result<PairBound> {
    let middle: Vec<&[ElementId]> = xs[i + 1..j].iter().map(Vec::as_slice).collect();
    let needed = middle.iter().fold(1u128, |acc, m| acc.saturating_mul(m.len() as u128));
    if needed > budget {
        return Err(InequalityError::MiddleEnumerationBudgetExceeded { needed, budget });
    }
    let mut best = PairBound { i: i + 1, j: j + 1, value: 0, argmax: Vec::new() };
    for_each_tuple(&middle, |mid| {
        let singles: Vec<[ElementId; 1]> = mid.iter().map(|&x| [x]).collect();
        let mut ops: Vec<&[ElementId]> = vec![&xs[i]];
        ops.extend(singles.iter().map(|s| s.as_slice()));
        ops.push(&xs[j]);
        let n = sumset_size(g, &ops);
        if n > best.value {
            best.value = n;
            best.argmax = ids(mid);
        }
    });
    Ok(best)
}

fn check_sets(g: &FiniteGroup, xs: &[Vec<ElementId>], min_k: usize) -> Result<()> {
    if xs.len() < min_k {
        return Err(InequalityError::InvalidInput(format!("needs at least {min_k} sets")));
    }
    let refs: Vec<&[ElementId]> = xs.iter().map(Vec::as_slice).collect();
    nary_sumset(g, &refs)?;
    Ok(())
}

fn total_sumset(g: &FiniteGroup, xs: &[Vec<ElementId>]) -> usize {
    let refs: Vec<&[ElementId]> = xs.iter().map(Vec::as_slice).collect();
    sumset_size(g, &refs)
}

/// `|X_1 + .. + X_k|^{k-1} <= Π_{i<j} A(i, j)`.
pub fn check_nonabelian(g: &FiniteGroup, xs: &[Vec<ElementId>]) -> Result<Verdict> {
    check_sets(g, xs, 2)?;
    let k = xs.len();
    let total = total_sumset(g, xs);
    let mut table = Vec::new();
    let mut rhs = BigInt::one();
    for i in 0..k {
        for j in i + 1..k {
            let pb = pair_bound(g, xs, i, j, DEFAULT_TUPLE_BUDGET)?;
            rhs *= big(pb.value);
            table.push(pb);
        }
    }
    let v = Verdict::exact(
        "nonabelian",
        big(total).pow((k - 1) as u32),
        rhs,
        json!({ "group": g.name(), "sets": xs.iter().map(|x| ids(x)).collect::<Vec<_>>(), "sumset_size": total, "A": table }),
    );
    Ok(if g.is_abelian() { v.with_note("group is abelian; the bound is checked all the same") } else { v })
}

/// The naive pairwise bound `|X_1 + .. + X_k|^{k-1} <= Π_{i<j} |X_i + X_j|`. False without commutativity.
pub fn check_naive_pairwise(g: &FiniteGroup, xs: &[Vec<ElementId>]) -> Result<Verdict> {
    check_sets(g, xs, 2)?;
    let k = xs.len();
    let total = total_sumset(g, xs);
    let mut rhs = BigInt::one();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let n = sumset_size(g, &[&xs[i], &xs[j]]);
            rhs *= big(n);
            pairs.push(json!({"i": i + 1, "j": j + 1, "size": n}));
        }
    }
    Ok(Verdict::exact(
        "naive-pairwise",
        big(total).pow((k - 1) as u32),
        rhs,
        json!({ "group": g.name(), "sets": xs.iter().map(|x| ids(x)).collect::<Vec<_>>(), "sumset_size": total, "pairs": pairs }),
    ))
}

/// `|S+T+U|² <= max_{t∈T} |S+T| |T+U| |S+t+U|`.
pub fn check_ruzsa_triple(g: &FiniteGroup, s: &[ElementId], t: &[ElementId], u: &[ElementId]) -> Result<Verdict> {
    let xs = vec![s.to_vec(), t.to_vec(), u.to_vec()];
    check_sets(g, &xs, 3)?;
    let total = total_sumset(g, &xs);
    let st = sumset_size(g, &[s, t]);
    let tu = sumset_size(g, &[t, u]);
    let middle = pair_bound(g, &xs, 0, 2, DEFAULT_TUPLE_BUDGET)?;
    Ok(Verdict::exact(
        "ruzsa-triple",
        big(total * total),
        big(st) * big(tu) * big(middle.value),
        json!({
            "group": g.name(), "S": ids(s), "T": ids(t), "U": ids(u),
            "|S+T+U|": total, "|S+T|": st, "|T+U|": tu, "max_t |S+t+U|": middle.value, "argmax_t": middle.argmax,
        }),
    ))
}

/// `|S+T+U+V|³ <= max_{t,u} |S+T+U| |S+T+u+V| |S+t+U+V| |T+U+V|` on one instance.
/// The general question is open; the verdict speaks only for this instance.
pub fn check_ruzsa_quadruple(
    g: &FiniteGroup,
    s: &[ElementId],
    t: &[ElementId],
    u: &[ElementId],
    v: &[ElementId],
) -> Result<Verdict> {
    let xs = vec![s.to_vec(), t.to_vec(), u.to_vec(), v.to_vec()];
    check_sets(g, &xs, 4)?;
    let needed = (t.len() * u.len()) as u128;
    if needed > DEFAULT_TUPLE_BUDGET {
        return Err(InequalityError::MiddleEnumerationBudgetExceeded { needed, budget: DEFAULT_TUPLE_BUDGET });
    }
    let total = total_sumset(g, &xs);
    let stu = sumset_size(g, &[s, t, u]);
    let tuv = sumset_size(g, &[t, u, v]);
    let mut best = (0usize, 0usize, 0usize, ElementId(0), ElementId(0));
    for &tt in t {
        let a = sumset_size(g, &[s, &[tt], u, v]);
        for &uu in u {
            let b = sumset_size(g, &[s, t, &[uu], v]);
            if a * b > best.0 {
                best = (a * b, b, a, tt, uu);
            }
        }
    }
    let lhs = big(total).pow(3);
    let rhs = big(stu) * big(tuv) * big(best.0);
    Ok(Verdict::exact(
        "ruzsa-quadruple",
        lhs,
        rhs,
        json!({
            "group": g.name(), "S": ids(s), "T": ids(t), "U": ids(u), "V": ids(v),
            "|S+T+U+V|": total, "|S+T+U|": stu, "|T+U+V|": tuv,
            "|S+T+u+V|": best.1, "|S+t+U+V|": best.2, "t": best.3.0, "u": best.4.0,
        }),
    )
    .with_note("open problem probe: this verdict covers this instance only"))
}

/// `|X_1 + .. + X_k|^L <= Π A(i,j)^{L w_ij}` for weights `w` on the pairs `i < j`
/// (lexicographic order) forming a fractional covering of `[k]`. A probe with
/// no claim attached; uniform weights `1/(k-1)` recover the symmetric bound.
pub fn check_weighted_nonabelian(g: &FiniteGroup, xs: &[Vec<ElementId>], weights: &[Rational]) -> Result<Verdict> {
    check_sets(g, xs, 2)?;
    let k = xs.len();
    let pairs: Vec<SubsetMask> =
        (0..k).flat_map(|i| (i + 1..k).map(move |j| SubsetMask::from_indices([i, j]))).collect();
    let covering = FractionalCovering::new(SubsetFamily::new(k, pairs)?, weights.to_vec())?;
    let total = total_sumset(g, xs);
    let mut counts = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            counts.push(pair_bound(g, xs, i, j, DEFAULT_TUPLE_BUDGET)?.value);
        }
    }
    let mut v = covering_bound(
        "weighted-nonabelian",
        total,
        &covering,
        &counts,
        json!({ "group": g.name(), "sets": xs.iter().map(|x| ids(x)).collect::<Vec<_>>() }),
    )?;
    v.note = Some("probe: nonsymmetric weights carry no proven bound".into());
    Ok(v)
}

// ---------------------------------------------------------------- polynomial compound sets

/// `f̄` given by one polynomial in `y_1..y_m` per mask. Masks without a
/// polynomial evaluate to the tuple of their coordinates.
fn polynomial_pd_function(
    r: &FiniteRing,
    ground: GroundFamily,
    fbar: &[(SubsetMask, Poly)],
) -> Result<PdFunction> {
    let m = ground.k();
    for (s, p) in fbar {
        if let Some(v) = p.variables().into_iter().find(|&v| !s.contains(v)) {
            return Err(InequalityError::InvalidInput(format!("polynomial for {s} uses y{} outside the mask", v + 1)));
        }
    }
    let table: HashMap<SubsetMask, Poly> = fbar.iter().cloned().collect();
    let r = r.clone();
    Ok(PdFunction::custom(ground, "polynomial", move |mask, x| {
        match table.get(&mask) {
            Some(p) => {
                let mut env = vec![r.zero(); m];
                for (i, &xi) in mask.iter().zip(x) {
                    env[i] = xi;
                }
                Value::RingElem(p.eval(&r, &env).expect("checked variables"))
            }
            None => Value::Tuple(x.iter().map(|&e| Value::RingElem(e)).collect()),
        }
    })?)
}

/// `|F(X_1..X_n)| <= Π |f̄ ∘ π_s ∘ g(X)|^{α_s}`, after checking `F = f ∘ g`
/// pointwise on `X_1 × .. × X_n` and that `f̄` is partition-determined on the
/// images `Y_i = g_i(X)`. Set operations are bound: one element per symbol.
pub fn check_polynomial_compound(
    r: &FiniteRing,
    fbar: &[(SubsetMask, Poly)],
    gs: &[Poly],
    big_f: &Poly,
    covering: &FractionalCovering,
    grounds: &[Vec<ElementId>],
) -> Result<Verdict> {
    let m = gs.len();
    let n = grounds.len();
    if m == 0 || n == 0 {
        return Err(InequalityError::InvalidInput("needs at least one g_i and one ground set".into()));
    }
    if covering.family().k() != m {
        return Err(HypergraphError::ArityMismatch(covering.family().k(), m).into());
    }
    let full = SubsetMask::full(m);
    let f_full = fbar
        .iter()
        .find(|(s, _)| *s == full)
        .map(|(_, p)| p.clone())
        .ok_or_else(|| InequalityError::InvalidInput("f̄ needs a polynomial on the full mask".into()))?;
    for (i, set) in grounds.iter().enumerate() {
        if set.is_empty() || set.iter().any(|e| e.0 >= r.order()) {
            return Err(InequalityError::InvalidInput(format!("ground set {} is empty or leaves the ring", i + 1)));
        }
    }
    let refs: Vec<&[ElementId]> = grounds.iter().map(Vec::as_slice).collect();
    let needed = refs.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
    if needed > DEFAULT_TUPLE_BUDGET {
        return Err(PdError::BudgetExceeded { needed, budget: DEFAULT_TUPLE_BUDGET }.into());
    }

    let mut images: Vec<BTreeSet<ElementId>> = vec![BTreeSet::new(); m];
    let mut lifted: Vec<Vec<ElementId>> = Vec::new();
    let mut f_values = BTreeSet::new();
    let mut failure: Option<Result<Vec<usize>>> = None;
    for_each_tuple(&refs, |x| {
        if failure.is_some() {
            return;
        }
        let y: std::result::Result<Vec<ElementId>, PolyError> = gs.iter().map(|g| g.eval(r, x)).collect();
        let y = match y {
            Ok(y) => y,
            Err(e) => {
                failure = Some(Err(e.into()));
                return;
            }
        };
        match (big_f.eval(r, x), f_full.eval(r, &y)) {
            (Ok(a), Ok(b)) if a == b => {
                f_values.insert(a);
                for (img, &yi) in images.iter_mut().zip(&y) {
                    img.insert(yi);
                }
                lifted.push(y);
            }
            (Ok(_), Ok(_)) => failure = Some(Ok(ids(x))),
            (Err(e), _) | (_, Err(e)) => failure = Some(Err(e.into())),
        }
    });
    match failure {
        Some(Ok(x)) => return Err(InequalityError::IdentityFailsAt(x)),
        Some(Err(e)) => return Err(e),
        None => {}
    }

    let ground = GroundFamily::new(r.order(), images.iter().map(|s| s.iter().copied().collect()).collect())
        .map_err(|e| InequalityError::InvalidInput(e.to_string()))?;
    let f = polynomial_pd_function(r, ground, fbar)?;
    require_pd(&f, covering.family())?;
    let counts: Vec<usize> = covering.family().members().iter().map(|&s| image_of_points(&f, s, &lifted).len()).collect();
    covering_bound(
        "polynomial-compound",
        f_values.len(),
        covering,
        &counts,
        json!({
            "ring": r.name(),
            "F": big_f.to_string(),
            "g": gs.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "grounds": grounds.iter().map(|x| ids(x)).collect::<Vec<_>>(),
            "Y": images.iter().map(set_ids).collect::<Vec<_>>(),
        }),
    )
}

/// `|F(X)| <= Π |Π_{j∈s} g_j(X)|^{α_s}` for `F = g_1 ⋯ g_m` in a commutative ring.
pub fn check_factorized(
    r: &FiniteRing,
    factors: &[Poly],
    covering: &FractionalCovering,
    grounds: &[Vec<ElementId>],
) -> Result<Verdict> {
    if !r.is_commutative() {
        return Err(InequalityError::NotCommutative(r.name().to_string()));
    }
    let m = factors.len();
    let big_f = Poly::product(factors).ok_or_else(|| InequalityError::InvalidInput("no factors".into()))?;
    let fbar: Vec<(SubsetMask, Poly)> = SubsetMask::all(m)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let vars: Vec<Poly> = s.iter().map(Poly::Var).collect();
            (s, Poly::product(&vars).expect("nonempty"))
        })
        .collect();
    let mut v = check_polynomial_compound(r, &fbar, factors, &big_f, covering, grounds)?;
    v.statement = "factorized".into();
    Ok(v)
}

/// `|A²⊕B²| <= |(A⊕B)²| · |A·B⊕B·A|` (bound operations).
pub fn check_sum_of_squares(r: &FiniteRing, a: &[ElementId], b: &[ElementId]) -> Result<Verdict> {
    let p = |t: &str| Poly::parse(t).expect("fixed polynomial");
    let fbar = vec![
        (SubsetMask::full(2), p("y1^2 - y2")),
        (SubsetMask::singleton(0), p("y1^2")),
        (SubsetMask::singleton(1), p("y2")),
    ];
    let gs = [p("x1 + x2"), p("x1*x2 + x2*x1")];
    let covering = FractionalCovering::new(SubsetFamily::singletons(2), vec![Rational::one(), Rational::one()])?;
    let mut v = check_polynomial_compound(r, &fbar, &gs, &p("x1^2 + x2^2"), &covering, &[a.to_vec(), b.to_vec()])?;
    v.statement = "sum-of-squares".into();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cyclic_group, dihedral_group, direct_product, ring_mod};
    use crate::hypergraph::{degree_covering, dominates, minimal_multiset, regular_covering, Domination};
    use crate::pdfunc::{builtin_projection, builtin_sum};

    fn e(i: usize) -> ElementId {
        ElementId(i)
    }

    fn es(v: &[usize]) -> Vec<ElementId> {
        v.iter().map(|&i| e(i)).collect()
    }

    fn exact_parts(v: &Verdict) -> (BigInt, BigInt) {
        (v.lhs.as_exact().unwrap().clone(), v.rhs.as_exact().unwrap().clone())
    }

    fn z5_sum3() -> (PdFunction, Vec<Marginal>) {
        let z5 = cyclic_group(5);
        let all: Vec<usize> = (0..5).collect();
        let g = GroundFamily::from_indices(5, &[&all, &all, &all]).unwrap();
        let f = builtin_sum(&z5, g).unwrap();
        let m = Marginal::uniform_on(&es(&all));
        (f, vec![m.clone(), m.clone(), m])
    }

    #[test]
    fn submodularity_examples() {
        let (f, ms) = z5_sum3();
        let v = check_entropy_submodularity(&f, &ms, SubsetMask::from_one_based(&[1, 2]), SubsetMask::from_one_based(&[2, 3]))
            .unwrap();
        assert!(v.holds());
        let s = SubsetMask::from_one_based(&[1]);
        let t = SubsetMask::from_one_based(&[1, 3]);
        let v = check_entropy_submodularity(&f, &ms, s, t).unwrap();
        assert_eq!(v.slack_bits, 0.0);

        // Projections on independent coordinates: classical Shannon inequality.
        let g = GroundFamily::from_indices(3, &[&[0, 1], &[0, 1, 2], &[1]]).unwrap();
        let p = builtin_projection(g).unwrap();
        let ms = vec![
            Marginal::uniform_on(&es(&[0, 1])),
            Marginal::uniform_on(&es(&[0, 1, 2])),
            Marginal::point(e(1)),
        ];
        for v in check_entropy_submodularity_all_pairs(&p, &ms).unwrap() {
            assert!(v.holds(), "{}", v.summary());
        }
    }

    #[test]
    fn submodularity_refuses_non_strong_functions() {
        let g = GroundFamily::from_indices(2, &[&[0, 1], &[0, 1]]).unwrap();
        let f = PdFunction::custom(g, "collapsing", |mask, x| {
            if mask.len() <= 1 {
                Value::Neutral
            } else {
                Value::Tuple(x.iter().map(|&v| Value::GroupElem(v)).collect())
            }
        })
        .unwrap();
        let m = Marginal::uniform_on(&es(&[0, 1]));
        let err = check_entropy_submodularity(&f, &[m.clone(), m], SubsetMask::singleton(0), SubsetMask::singleton(1));
        assert!(matches!(err, Err(InequalityError::NotStronglyPd(_))));
    }

    #[test]
    fn compression_entropy_examples() {
        let (f, ms) = z5_sum3();
        let a = SubsetFamily::parse(3, "{1,2} {2,3}").unwrap();
        let b = minimal_multiset(&a);
        let Domination::Yes { steps } = dominates(&a, &b, 1000).unwrap() else { panic!() };
        let v = check_compression_entropy(&f, &ms, &a, &b, &steps).unwrap();
        assert!(v.holds());
        // A single step carries the same margin as the submodularity check.
        let direct = check_entropy_submodularity(&f, &ms, steps[0].left, steps[0].right).unwrap();
        assert!((direct.slack_bits - v.slack_bits).abs() < 1e-12);

        let same = check_compression_entropy(&f, &ms, &a, &a, &[]).unwrap();
        assert_eq!(same.slack_bits, 0.0);

        let wrong = check_compression_entropy(&f, &ms, &a, &SubsetFamily::parse(3, "{1,2,3}").unwrap(), &steps);
        assert!(matches!(wrong, Err(InequalityError::InvalidChain(_))));
    }

    #[test]
    fn upper_bound_examples() {
        let (f, ms) = z5_sum3();
        let c2 = regular_covering(&SubsetFamily::all_of_size(3, 2)).unwrap();
        assert!(check_entropy_upper_bound(&f, &ms, &c2).unwrap().holds());
        let whole = FractionalCovering::new(SubsetFamily::parse(3, "{1,2,3}").unwrap(), vec![Rational::one()]).unwrap();
        assert_eq!(check_entropy_upper_bound(&f, &ms, &whole).unwrap().slack_bits, 0.0);
        let dc = degree_covering(&SubsetFamily::parse(3, "{1} {1,2} {2,3}").unwrap()).unwrap();
        assert!(check_entropy_upper_bound(&f, &ms, &dc).unwrap().holds());
    }

    #[test]
    fn four_set_counterexample() {
        let v = check_entropy_counterexample_4sets(2);
        assert_eq!(v.status, Status::Violated);
        assert!((v.lhs.as_bits().unwrap() - 1.0).abs() < 1e-12);
        assert!((v.rhs.as_bits().unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((v.slack_bits + 1.0 / 3.0).abs() < 1e-9);
        assert!(check_entropy_counterexample_4sets(1).holds());
        let v = check_entropy_counterexample_4sets(5);
        assert!((v.slack_bits + 5f64.log2() / 3.0).abs() < 1e-9);
    }

    #[test]
    fn pairwise_conditional_examples() {
        let d = JointDistribution::point_mass(es(&[0, 1]));
        assert_eq!(check_pairwise_conditional(&d).unwrap().slack_bits, 0.0);
        let bit = Marginal::uniform_on(&es(&[0, 1]));
        let d = product_distribution(&[bit.clone(), bit.clone(), bit]);
        let v = check_pairwise_conditional(&d).unwrap();
        assert!((v.lhs.as_bits().unwrap() - 6.0).abs() < 1e-12);
        assert!((v.rhs.as_bits().unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn projection_counterexample_numbers() {
        let v = projection_nonsubmodularity_example();
        assert_eq!(v.status, Status::Violated);
        assert_eq!(exact_parts(&v), (big(10), big(9)));
        assert_eq!(v.witness["|pi_s|"], 3);
        assert_eq!(v.witness["|pi_t|"], 3);
        assert_eq!(v.witness["|pi_union|"], 5);
        assert_eq!(v.witness["|pi_intersection|"], 2);
    }

    #[test]
    fn projection_bound_on_box_is_tight() {
        let mut pts = Vec::new();
        for a in 0..2 {
            for b in 0..3 {
                pts.push(es(&[a, b]));
            }
        }
        let c = regular_covering(&SubsetFamily::singletons(2)).unwrap();
        let v = check_projection_bound(&pts, &c).unwrap();
        assert_eq!(v.margin, Quantity::Exact(BigInt::zero()));
    }

    #[test]
    fn set_main_on_sums() {
        let z7 = cyclic_group(7);
        let g = GroundFamily::from_indices(7, &[&[0, 1, 3], &[0, 2], &[1, 5]]).unwrap();
        let f = builtin_sum(&z7, g).unwrap();
        let c2 = regular_covering(&SubsetFamily::all_of_size(3, 2)).unwrap();
        let v = check_full_compound(&f, &c2).unwrap();
        assert!(v.holds());
        let whole = FractionalCovering::new(SubsetFamily::parse(3, "{1,2,3}").unwrap(), vec![Rational::one()]).unwrap();
        let v = check_full_compound(&f, &whole).unwrap();
        assert_eq!(v.margin, Quantity::Exact(BigInt::zero()));
    }

    #[test]
    fn sumset_log_submodularity_numbers() {
        let v = sumset_log_submodularity_example();
        assert!(v.is_violated());
        assert_eq!(exact_parts(&v), (big(60), big(56)));
        assert_eq!(v.witness["|f_union|"], 10);
        assert_eq!(v.witness["|f_intersection|"], 6);

        let z9 = cyclic_group(9);
        let sets = vec![es(&[0, 1]), es(&[0, 3]), es(&[2, 4])];
        let nested = sumset_log_submodularity_probe(
            &z9,
            &sets,
            None,
            SubsetMask::from_one_based(&[1]),
            SubsetMask::from_one_based(&[1, 2]),
        )
        .unwrap();
        assert_eq!(nested.margin, Quantity::Exact(BigInt::zero()));
        let outside = sumset_log_submodularity_probe(&z9, &sets, Some(&es(&[1])), SubsetMask::EMPTY, SubsetMask::EMPTY);
        assert!(matches!(outside, Err(InequalityError::Pd(PdError::YNotInImage(_)))));
    }

    #[test]
    fn dihedral_example() {
        let d3 = dihedral_group(3);
        let (s, t, u) = (es(&[0, 3]), es(&[1]), es(&[0, 3]));
        let naive = check_naive_pairwise(&d3, &[s.clone(), t.clone(), u.clone()]).unwrap();
        assert_eq!(exact_parts(&naive), (big(16), big(8)));
        assert!(naive.is_violated());
        let thm = check_nonabelian(&d3, &[s.clone(), t.clone(), u.clone()]).unwrap();
        assert_eq!(exact_parts(&thm), (big(16), big(16)));
        let a13 = thm.witness["A"].as_array().unwrap().iter().find(|p| p["i"] == 1 && p["j"] == 3).unwrap().clone();
        assert_eq!(a13["value"], 4);
        let cor = check_ruzsa_triple(&d3, &s, &t, &u).unwrap();
        assert_eq!(exact_parts(&cor), (big(16), big(16)));
    }

    #[test]
    fn nonabelian_on_abelian_group_matches_pairwise() {
        let z6 = cyclic_group(6);
        let xs = vec![es(&[0, 1]), es(&[0, 2]), es(&[1, 3])];
        let v = check_nonabelian(&z6, &xs).unwrap();
        assert!(v.holds());
        for p in v.witness["A"].as_array().unwrap() {
            let (i, j) = (p["i"].as_u64().unwrap() as usize - 1, p["j"].as_u64().unwrap() as usize - 1);
            assert_eq!(p["value"].as_u64().unwrap() as usize, sumset_size(&z6, &[&xs[i], &xs[j]]));
        }
    }

    #[test]
    fn quadruple_trivial_and_abelian() {
        let d4 = dihedral_group(4);
        let id = es(&[0]);
        let v = check_ruzsa_quadruple(&d4, &id, &id, &id, &id).unwrap();
        assert_eq!(exact_parts(&v), (big(1), big(1)));
        assert!(v.note.as_deref().unwrap().contains("open problem"));
        let z7 = cyclic_group(7);
        let v = check_ruzsa_quadruple(&z7, &es(&[0, 1]), &es(&[0, 3]), &es(&[2, 5]), &es(&[1, 6])).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn abelian_sumset_forms() {
        let z11 = cyclic_group(11);
        let a = es(&[0, 1, 4]);
        let bs = vec![es(&[0, 2]), es(&[1, 3, 7]), es(&[0, 5])];
        let full: Vec<ElementId> = sum_over(&z11, &bs, SubsetMask::full(3)).unwrap().into_iter().collect();
        let d = full[..3].to_vec();
        let singles = regular_covering(&SubsetFamily::singletons(3)).unwrap();
        assert!(check_abelian_sumset(&z11, &a, &bs, &d, &singles).unwrap().holds());
        let loo = regular_covering(&SubsetFamily::leave_one_out(3)).unwrap();
        assert!(check_abelian_sumset(&z11, &a, &bs, &d, &loo).unwrap().holds());
        assert!(check_regular_abelian(&z11, &a, &bs, &d, &SubsetFamily::leave_one_out(3)).unwrap().holds());

        // k = 1, D = B_1: both sides are |A + B_1|.
        let one = regular_covering(&SubsetFamily::singletons(1)).unwrap();
        let v = check_abelian_sumset(&z11, &a, &bs[..1], &bs[0], &one).unwrap();
        assert_eq!(v.margin, Quantity::Exact(BigInt::zero()));

        let covering = degree_covering(&SubsetFamily::parse(3, "{1} {1,2} {2,3}").unwrap()).unwrap();
        assert!(matches!(
            check_abelian_sumset(&z11, &a, &bs, &d, &covering),
            Err(InequalityError::NotAPartition { .. })
        ));
        assert!(matches!(
            check_abelian_sumset(&z11, &a, &bs, &es(&[1, 4]), &singles),
            Err(InequalityError::DNotInSumset(_))
        ));
        let d3 = dihedral_group(3);
        assert!(matches!(
            check_abelian_sumset(&d3, &a[..1], &bs[..1], &bs[0], &one),
            Err(InequalityError::NotAbelian(_))
        ));
    }

    #[test]
    fn abelian_sumset_on_product_group() {
        let g = direct_product(&cyclic_group(2), &cyclic_group(6));
        let a = es(&[0, 7]);
        let bs = vec![es(&[1, 6]), es(&[0, 3, 8])];
        let d: Vec<ElementId> = sum_over(&g, &bs, SubsetMask::full(2)).unwrap().into_iter().take(2).collect();
        let c = regular_covering(&SubsetFamily::singletons(2)).unwrap();
        assert!(check_abelian_sumset(&g, &a, &bs, &d, &c).unwrap().holds());
    }

    #[test]
    fn sum_of_squares_in_z13() {
        let z13 = ring_mod(13).unwrap();
        let v = check_sum_of_squares(&z13, &es(&[1, 2, 5]), &es(&[0, 3, 4, 7])).unwrap();
        assert!(v.holds(), "{}", v.summary());
    }

    #[test]
    fn polynomial_identity_failure_is_reported() {
        let z7 = ring_mod(7).unwrap();
        let p = |t: &str| Poly::parse(t).unwrap();
        let fbar = vec![(SubsetMask::full(1), p("y1^2"))];
        let covering = FractionalCovering::new(SubsetFamily::singletons(1), vec![Rational::one()]).unwrap();
        let err = check_polynomial_compound(&z7, &fbar, &[p("x1 + x2")], &p("x1^2 + x2^2"), &covering, &[es(&[1]), es(&[1])]);
        assert!(matches!(err, Err(InequalityError::IdentityFailsAt(x)) if x == vec![1, 1]));
    }

    #[test]
    fn single_factor_is_equality() {
        let z7 = ring_mod(7).unwrap();
        let covering = FractionalCovering::new(SubsetFamily::singletons(1), vec![Rational::one()]).unwrap();
        let v = check_factorized(&z7, &[Poly::parse("x1 + x2").unwrap()], &covering, &[es(&[0, 1, 2]), es(&[3, 4])]).unwrap();
        assert_eq!(v.margin, Quantity::Exact(BigInt::zero()));
    }

    #[test]
    fn factorized_three_variables() {
        let z7 = ring_mod(7).unwrap();
        let factors = [Poly::parse("x1 + x2").unwrap(), Poly::parse("x2 + x3").unwrap()];
        let covering = regular_covering(&SubsetFamily::singletons(2)).unwrap();
        let v = check_factorized(&z7, &factors, &covering, &[es(&[0, 1, 2]), es(&[1, 5]), es(&[2, 3, 6])]).unwrap();
        assert!(v.holds());
        let m = crate::algebra::matrix_ring_2x2(2).unwrap();
        assert!(matches!(
            check_factorized(&m, &factors, &covering, &[es(&[0]), es(&[1]), es(&[2])]),
            Err(InequalityError::NotCommutative(_))
        ));
    }

    #[test]
    fn exact_verdict_serializes_big_integers_as_strings() {
        let v = Verdict::exact("x", BigInt::from(10).pow(40), BigInt::from(3), json!({}));
        let s = serde_json::to_value(&v).unwrap();
        assert_eq!(s["lhs"], "10000000000000000000000000000000000000000");
        assert_eq!(s["status"], "violated");
        assert!(v.slack_bits < -100.0);
    }
}
