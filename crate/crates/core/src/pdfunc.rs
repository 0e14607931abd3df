//! Functions on the disjoint-union space `Q(X_1, .., X_k)` and decision
//! procedures for (strong) partition-determinedness.
//!
//! A [`PdFunction`] evaluates `f_s(x)` for every subset `s ⊆ [k]` and every
//! `x ∈ X_s`. Tuples are always given in increasing coordinate order. Masks are
//! 0-based internally and printed 1-based (`{1,3}`).

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{ElementId, FiniteGroup, FiniteRing, GroundFamily};

pub const MAX_ARITY: usize = 24;

/// Default cap on `∏|X_i|` for exhaustive checks.
pub const DEFAULT_TUPLE_BUDGET: u128 = 1_000_000;

const MEMO_LIMIT: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdError {
    #[error("arity {0} exceeds the maximum of {MAX_ARITY}")]
    ArityTooLarge(usize),
    #[error("mask {mask} has bits beyond k = {k}")]
    MaskOutOfRange { mask: SubsetMask, k: usize },
    #[error("mask {mask} expects {expected} coordinates, got {got}")]
    BadArity { mask: SubsetMask, expected: usize, got: usize },
    #[error("coordinate {index} value {element} is not in ground set X{index}")]
    ElementOutOfGround { index: usize, element: ElementId },
    #[error("exhaustive enumeration needs {needed} tuples, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("the empty mask has no compound image")]
    EmptyMask,
    #[error("value {0} is not attained by f")]
    YNotInImage(Value),
    #[error("group {0} is not abelian")]
    NotAbelian(String),
    #[error("ground carrier has order {ground}, structure has order {structure}")]
    CarrierMismatch { ground: usize, structure: usize },
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

/// A subset of `[k]` as a bitmask (bit `i` is coordinate `i+1`).
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn from_bits(bits: u32) -> Self {
        SubsetMask(bits)
    }

    /// All of `[k]`.
    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_ARITY);
        SubsetMask(((1u64 << k) - 1) as u32)
    }

    /// From 0-based coordinates.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        SubsetMask(indices.into_iter().fold(0, |m, i| {
            assert!(i < MAX_ARITY, "coordinate {i} out of range");
            m | (1 << i)
        }))
    }

    /// From 1-based coordinates, as written in the literature.
    pub fn from_one_based(indices: &[usize]) -> Self {
        Self::from_indices(indices.iter().map(|&i| {
            assert!(i >= 1, "1-based coordinates start at 1");
            i - 1
        }))
    }

    pub fn singleton(i: usize) -> Self {
        Self::from_indices([i])
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn union(self, other: Self) -> Self {
        SubsetMask(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SubsetMask(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        SubsetMask(self.0 & !other.0)
    }

    pub fn complement(self, k: usize) -> Self {
        SubsetMask(!self.0 & Self::full(k).0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn fits(self, k: usize) -> bool {
        self.is_subset_of(Self::full(k))
    }

    /// Consecutive run of coordinates (the empty set is not an interval).
    pub fn is_interval(self) -> bool {
        if self.0 == 0 {
            return false;
        }
        let shifted = self.0 >> self.0.trailing_zeros();
        shifted & (shifted + 1) == 0
    }

    /// 0-based coordinates in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Every subset of `[k]`, including the empty one.
    pub fn all(k: usize) -> impl Iterator<Item = SubsetMask> {
        (0..(1u32 << k)).map(SubsetMask)
    }

    /// Picks `π_s(x)` out of a full k-tuple.
    pub fn project<T: Copy>(self, full: &[T]) -> Vec<T> {
        self.iter().map(|i| full[i]).collect()
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Codomain of partition-determined functions. Equality and ordering are structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    /// Value of `f` on the empty mask.
    Neutral,
    /// Reserved off-support filler, distinct from every carrier element.
    Pad,
    GroupElem(ElementId),
    RingElem(ElementId),
    Int(BigInt),
    Tuple(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Neutral => write!(f, "neutral"),
            Value::Pad => write!(f, "_"),
            Value::GroupElem(e) | Value::RingElem(e) => write!(f, "{e}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Tuple(items) => {
                let parts: Vec<String> = items.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FunctionKind {
    Projection,
    AbelianLinear,
    Cartesian,
    RingProduct,
    IntervalNonabelian,
    Custom(String),
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionKind::Projection => write!(f, "projection"),
            FunctionKind::AbelianLinear => write!(f, "abelian_linear"),
            FunctionKind::Cartesian => write!(f, "cartesian"),
            FunctionKind::RingProduct => write!(f, "ring_product"),
            FunctionKind::IntervalNonabelian => write!(f, "interval_nonabelian"),
            FunctionKind::Custom(label) => write!(f, "custom:{label}"),
        }
    }
}

/// Evaluator for `f_s` on the coordinates of `s` (increasing order).
pub type Evaluator = dyn Fn(SubsetMask, &[ElementId]) -> Value + Send + Sync;

struct Inner {
    ground: GroundFamily,
    membership: Vec<Vec<bool>>,
    kind: FunctionKind,
    evaluator: Box<Evaluator>,
    memo: RwLock<HashMap<(SubsetMask, Vec<ElementId>), Value>>,
}

/// A total function on `Q(X_1, .., X_k)`. Cloning shares the evaluator and memo.
#[derive(Clone)]
pub struct PdFunction {
    inner: Arc<Inner>,
}

impl fmt::Debug for PdFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdFunction")
            .field("kind", &self.inner.kind)
            .field("k", &self.k())
            .finish()
    }
}

impl PdFunction {
    pub fn new(
        ground: GroundFamily,
        kind: FunctionKind,
        evaluator: impl Fn(SubsetMask, &[ElementId]) -> Value + Send + Sync + 'static,
    ) -> Result<Self, PdError> {
        if ground.k() > MAX_ARITY {
            return Err(PdError::ArityTooLarge(ground.k()));
        }
        let membership = ground
            .sets()
            .iter()
            .map(|s| {
                let mut m = vec![false; ground.carrier()];
                s.iter().for_each(|e| m[e.0] = true);
                m
            })
            .collect();
        Ok(PdFunction {
            inner: Arc::new(Inner {
                ground,
                membership,
                kind,
                evaluator: Box::new(evaluator),
                memo: RwLock::new(HashMap::new()),
            }),
        })
    }

    pub fn custom(
        ground: GroundFamily,
        label: impl Into<String>,
        evaluator: impl Fn(SubsetMask, &[ElementId]) -> Value + Send + Sync + 'static,
    ) -> Result<Self, PdError> {
        Self::new(ground, FunctionKind::Custom(label.into()), evaluator)
    }

    pub fn k(&self) -> usize {
        self.inner.ground.k()
    }

    pub fn ground(&self) -> &GroundFamily {
        &self.inner.ground
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.inner.kind
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.k())
    }

    fn validate(&self, mask: SubsetMask, tuple: &[ElementId]) -> Result<(), PdError> {
        if !mask.fits(self.k()) {
            return Err(PdError::MaskOutOfRange { mask, k: self.k() });
        }
        if tuple.len() != mask.len() {
            return Err(PdError::BadArity { mask, expected: mask.len(), got: tuple.len() });
        }
        for (i, &e) in mask.iter().zip(tuple) {
            if !self.inner.membership[i].get(e.0).copied().unwrap_or(false) {
                return Err(PdError::ElementOutOfGround { index: i + 1, element: e });
            }
        }
        Ok(())
    }

    /// `f_s(x)` for `x ∈ X_s`, validated and memoized.
    pub fn eval(&self, mask: SubsetMask, tuple: &[ElementId]) -> Result<Value, PdError> {
        self.validate(mask, tuple)?;
        let key = (mask, tuple.to_vec());
        if let Some(v) = self.inner.memo.read().expect("memo poisoned").get(&key) {
            return Ok(v.clone());
        }
        let value = self.raw(mask, tuple);
        let mut memo = self.inner.memo.write().expect("memo poisoned");
        if memo.len() < MEMO_LIMIT {
            if let Entry::Vacant(slot) = memo.entry(key) {
                slot.insert(value.clone());
            }
        }
        Ok(value)
    }

    /// `f_s(x)` validated but bypassing the memo.
    pub fn eval_unmemoized(&self, mask: SubsetMask, tuple: &[ElementId]) -> Result<Value, PdError> {
        self.validate(mask, tuple)?;
        Ok(self.raw(mask, tuple))
    }

    /// `f_s(π_s(x))` for a full k-tuple `x ∈ X_[k]`. No validation.
    pub fn eval_on(&self, mask: SubsetMask, full: &[ElementId]) -> Value {
        if mask == self.full_mask() {
            return self.raw(mask, full);
        }
        self.raw(mask, &mask.project(full))
    }

    #[inline]
    fn raw(&self, mask: SubsetMask, tuple: &[ElementId]) -> Value {
        if mask.is_empty() {
            return Value::Neutral;
        }
        (self.inner.evaluator)(mask, tuple)
    }

    pub fn memo_len(&self) -> usize {
        self.inner.memo.read().expect("memo poisoned").len()
    }

    /// Ground sets selected by `mask`, in coordinate order.
    pub fn ground_for(&self, mask: SubsetMask) -> Vec<&[ElementId]> {
        mask.iter().map(|i| self.inner.ground.set(i)).collect()
    }

    fn check_budget(&self, mask: SubsetMask, budget: u128) -> Result<u128, PdError> {
        let needed = self
            .ground_for(mask)
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
        if needed > budget {
            return Err(PdError::BudgetExceeded { needed, budget });
        }
        Ok(needed)
    }
}

/// Visits every tuple of `X_{i_1} × .. × X_{i_m}` in lexicographic order of the given slices.
pub fn try_for_each_tuple<B>(
    sets: &[&[ElementId]],
    mut visit: impl FnMut(&[ElementId]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if sets.iter().any(|s| s.is_empty()) {
        return ControlFlow::Continue(());
    }
    let mut idx = vec![0usize; sets.len()];
    let mut tuple: Vec<ElementId> = sets.iter().map(|s| s[0]).collect();
    loop {
        visit(&tuple)?;
        let mut pos = sets.len();
        loop {
            if pos == 0 {
                return ControlFlow::Continue(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < sets[pos].len() {
                tuple[pos] = sets[pos][idx[pos]];
                break;
            }
            idx[pos] = 0;
            tuple[pos] = sets[pos][0];
        }
    }
}

pub fn for_each_tuple(sets: &[&[ElementId]], mut visit: impl FnMut(&[ElementId])) {
    let _ = try_for_each_tuple::<()>(sets, |t| {
        visit(t);
        ControlFlow::Continue(())
    });
}

/// All tuples of the product, materialized.
pub fn all_tuples(sets: &[&[ElementId]]) -> Vec<Vec<ElementId>> {
    let mut out = Vec::new();
    for_each_tuple(sets, |t| out.push(t.to_vec()));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PdWitness {
    /// The set `s` whose determination failed.
    pub s: SubsetMask,
    /// Companion set: `s̄` for partition checks, the disjoint `t` for strong checks.
    pub t: SubsetMask,
    pub x: Vec<ElementId>,
    pub y: Vec<ElementId>,
    /// Which implication failed.
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PdOutcome {
    pub holds: bool,
    pub witness: Option<PdWitness>,
}

impl PdOutcome {
    fn holds() -> Self {
        PdOutcome { holds: true, witness: None }
    }

    fn fails(w: PdWitness) -> Self {
        PdOutcome { holds: false, witness: Some(w) }
    }
}

/// Looks for `x, y` where `key(x) = key(y)` but `target(x) != target(y)`.
fn find_collision(
    f: &PdFunction,
    key: impl Fn(&[ElementId]) -> (Value, Value),
    target: impl Fn(&[ElementId]) -> Value,
) -> Option<(Vec<ElementId>, Vec<ElementId>)> {
    let full = f.full_mask();
    let sets = f.ground_for(full);
    let mut seen: HashMap<(Value, Value), (Value, Vec<ElementId>)> = HashMap::new();
    let found = try_for_each_tuple(&sets, |x| {
        let k = key(x);
        let v = target(x);
        match seen.entry(k) {
            Entry::Occupied(e) => {
                let (prev, px) = e.get();
                if *prev != v {
                    return ControlFlow::Break((px.clone(), x.to_vec()));
                }
            }
            Entry::Vacant(e) => {
                e.insert((v, x.to_vec()));
            }
        }
        ControlFlow::Continue(())
    });
    match found {
        ControlFlow::Break(pair) => Some(pair),
        ControlFlow::Continue(()) => None,
    }
}

/// Decides whether `(f_s(x), f_s̄(x))` determines `f(x)` for every `s` in `family`.
pub fn is_partition_determined(
    f: &PdFunction,
    family: &[SubsetMask],
    budget: u128,
) -> Result<PdOutcome, PdError> {
    let full = f.full_mask();
    f.check_budget(full, budget)?;
    for &s in family {
        if !s.fits(f.k()) {
            return Err(PdError::MaskOutOfRange { mask: s, k: f.k() });
        }
        let sbar = s.complement(f.k());
        if let Some((x, y)) = find_collision(
            f,
            |x| (f.eval_on(s, x), f.eval_on(sbar, x)),
            |x| f.eval_on(full, x),
        ) {
            return Ok(PdOutcome::fails(PdWitness { s, t: sbar, x, y, rule: "f_s, f_sbar => f".into() }));
        }
    }
    Ok(PdOutcome::holds())
}

/// Strong partition-determinedness over all disjoint pairs `s, t ⊆ [k]`.
///
/// Checks both directions: `(f_s, f_t)` determines `f_{s∪t}`, and
/// `(f_t, f_{s∪t})` determines `f_s`.
pub fn is_strongly_partition_determined(f: &PdFunction, budget: u128) -> Result<PdOutcome, PdError> {
    let k = f.k();
    f.check_budget(f.full_mask(), budget)?;
    for s in SubsetMask::all(k) {
        for t in SubsetMask::all(k) {
            if !s.is_disjoint(t) || s.is_empty() || t.is_empty() {
                continue;
            }
            let st = s.union(t);
            if let Some((x, y)) = find_collision(
                f,
                |x| (f.eval_on(s, x), f.eval_on(t, x)),
                |x| f.eval_on(st, x),
            ) {
                return Ok(PdOutcome::fails(PdWitness { s: st, t, x, y, rule: "f_s, f_t => f_(s∪t)".into() }));
            }
            if let Some((x, y)) = find_collision(
                f,
                |x| (f.eval_on(t, x), f.eval_on(st, x)),
                |x| f.eval_on(s, x),
            ) {
                return Ok(PdOutcome::fails(PdWitness { s, t, x, y, rule: "f_t, f_(s∪t) => f_s".into() }));
            }
        }
    }
    Ok(PdOutcome::holds())
}

/// `f_s(X_s)`.
pub fn compound_image(f: &PdFunction, mask: SubsetMask) -> Result<BTreeSet<Value>, PdError> {
    compound_image_within(f, mask, DEFAULT_TUPLE_BUDGET)
}

pub fn compound_image_within(f: &PdFunction, mask: SubsetMask, budget: u128) -> Result<BTreeSet<Value>, PdError> {
    if mask.is_empty() {
        return Err(PdError::EmptyMask);
    }
    if !mask.fits(f.k()) {
        return Err(PdError::MaskOutOfRange { mask, k: f.k() });
    }
    f.check_budget(mask, budget)?;
    let mut out = BTreeSet::new();
    for_each_tuple(&f.ground_for(mask), |x| {
        out.insert(f.raw(mask, x));
    });
    Ok(out)
}

/// `f_s(P)` for a set `P` of full k-tuples.
pub fn image_of_points<'a>(
    f: &PdFunction,
    mask: SubsetMask,
    points: impl IntoIterator<Item = &'a Vec<ElementId>>,
) -> BTreeSet<Value> {
    points.into_iter().map(|x| f.eval_on(mask, x)).collect()
}

/// `{x ∈ X_s : f_s(x) ∈ Y}`, in lexicographic order.
pub fn compound_preimage(
    f: &PdFunction,
    mask: SubsetMask,
    ys: &BTreeSet<Value>,
) -> Result<Vec<Vec<ElementId>>, PdError> {
    if !mask.fits(f.k()) {
        return Err(PdError::MaskOutOfRange { mask, k: f.k() });
    }
    f.check_budget(mask, DEFAULT_TUPLE_BUDGET)?;
    let mut hit = BTreeSet::new();
    let mut out = Vec::new();
    for_each_tuple(&f.ground_for(mask), |x| {
        let v = f.raw(mask, x);
        if ys.contains(&v) {
            out.push(x.to_vec());
            hit.insert(v);
        }
    });
    if let Some(missing) = ys.iter().find(|y| !hit.contains(*y)) {
        return Err(PdError::YNotInImage(missing.clone()));
    }
    Ok(out)
}

fn require_carrier(ground: &GroundFamily, order: usize) -> Result<(), PdError> {
    if ground.carrier() != order {
        return Err(PdError::CarrierMismatch { ground: ground.carrier(), structure: order });
    }
    Ok(())
}

/// `f_s(x) = π_s(x)`, the identity on coordinates.
pub fn builtin_projection(ground: GroundFamily) -> Result<PdFunction, PdError> {
    PdFunction::new(ground, FunctionKind::Projection, |_, x| {
        Value::Tuple(x.iter().map(|&e| Value::GroupElem(e)).collect())
    })
}

/// `f_s(x) = Σ_{i∈s} c_i x_i` in an abelian group.
pub fn builtin_abelian_linear(g: &FiniteGroup, ground: GroundFamily, coeffs: &[i64]) -> Result<PdFunction, PdError> {
    if !g.is_abelian() {
        return Err(PdError::NotAbelian(g.name().to_string()));
    }
    require_carrier(&ground, g.order())?;
    if coeffs.len() != ground.k() {
        return Err(PdError::CoefficientCount { expected: ground.k(), got: coeffs.len() });
    }
    let g = g.clone();
    let coeffs = coeffs.to_vec();
    PdFunction::new(ground, FunctionKind::AbelianLinear, move |mask, x| {
        let sum = mask
            .iter()
            .zip(x)
            .fold(g.identity(), |acc, (i, &xi)| g.op(acc, g.pow(xi, coeffs[i])));
        Value::GroupElem(sum)
    })
}

/// Plain sum `Σ_{i∈s} x_i` in an abelian group.
pub fn builtin_sum(g: &FiniteGroup, ground: GroundFamily) -> Result<PdFunction, PdError> {
    let ones = vec![1; ground.k()];
    builtin_abelian_linear(g, ground, &ones)
}

/// `f_s(x) = Σ_{i∈s} label(x_i) v_i` with `v_i` the standard basis: a k-vector
/// of integers, zero outside `s`. `labels[e]` is the integer carried by element `e`.
pub fn builtin_cartesian(ground: GroundFamily, labels: Vec<BigInt>) -> Result<PdFunction, PdError> {
    require_carrier(&ground, labels.len())?;
    let k = ground.k();
    PdFunction::new(ground, FunctionKind::Cartesian, move |mask, x| {
        let mut slots = vec![Value::Int(BigInt::from(0)); k];
        for (i, &xi) in mask.iter().zip(x) {
            slots[i] = Value::Int(labels[xi.0].clone());
        }
        Value::Tuple(slots)
    })
}

/// Ordered ring product `Π_{i∈s} x_i`.
pub fn builtin_ring_product(r: &FiniteRing, ground: GroundFamily) -> Result<PdFunction, PdError> {
    require_carrier(&ground, r.order())?;
    let r = r.clone();
    PdFunction::new(ground, FunctionKind::RingProduct, move |_, x| {
        Value::RingElem(r.product(x).expect("nonempty mask"))
    })
}

/// Ordered group product `x_{i_1} * .. * x_{i_m}` on every mask. Not
/// partition-determined in general once the group is non-abelian.
pub fn builtin_ordered_product(g: &FiniteGroup, ground: GroundFamily) -> Result<PdFunction, PdError> {
    require_carrier(&ground, g.order())?;
    let g = g.clone();
    PdFunction::new(ground, FunctionKind::Custom("ordered_product".into()), move |_, x| {
        Value::GroupElem(g.product(x))
    })
}

/// The interval function: ordered product when `s` is a run of consecutive
/// coordinates, otherwise the padded k-tuple carrying `x_i` on `s`.
pub fn builtin_interval_g(g: &FiniteGroup, ground: GroundFamily) -> Result<PdFunction, PdError> {
    require_carrier(&ground, g.order())?;
    let g = g.clone();
    let k = ground.k();
    PdFunction::new(ground, FunctionKind::IntervalNonabelian, move |mask, x| {
        if mask.is_interval() {
            Value::GroupElem(g.product(x))
        } else {
            let mut slots = vec![Value::Pad; k];
            for (i, &xi) in mask.iter().zip(x) {
                slots[i] = Value::GroupElem(xi);
            }
            Value::Tuple(slots)
        }
    })
}
