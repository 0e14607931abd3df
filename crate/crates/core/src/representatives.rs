//! Lexicographically least preimages and the section-injectivity certificate.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::Serialize;

use crate::algebra::{ElementId, GroundFamily};
use crate::entropy::{rational, JointDistribution, Var};
use crate::pdfunc::{try_for_each_tuple, PdError, PdFunction, SubsetMask, Value, DEFAULT_TUPLE_BUDGET};

/// A linear order on each ground set, least element first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexOrder {
    sequences: Vec<Vec<ElementId>>,
    rank: Vec<HashMap<ElementId, usize>>,
}

impl LexOrder {
    /// Carrier-index order on every coordinate.
    pub fn index_order(ground: &GroundFamily) -> Self {
        Self::build(ground.sets().to_vec())
    }

    /// `sequences[i]` must list `X_i` exactly once each.
    pub fn new(ground: &GroundFamily, sequences: Vec<Vec<ElementId>>) -> Result<Self, PdError> {
        if sequences.len() != ground.k() {
            return Err(PdError::CoefficientCount { expected: ground.k(), got: sequences.len() });
        }
        for (i, seq) in sequences.iter().enumerate() {
            let mut sorted = seq.clone();
            sorted.sort();
            if sorted != ground.set(i) {
                let bad = seq.iter().find(|e| !ground.set(i).contains(e)).copied().unwrap_or(ElementId(usize::MAX));
                return Err(PdError::ElementOutOfGround { index: i + 1, element: bad });
            }
        }
        Ok(Self::build(sequences))
    }

    fn build(sequences: Vec<Vec<ElementId>>) -> Self {
        let rank = sequences.iter().map(|s| s.iter().enumerate().map(|(r, &e)| (e, r)).collect()).collect();
        LexOrder { sequences, rank }
    }

    pub fn sequences(&self) -> &[Vec<ElementId>] {
        &self.sequences
    }

    /// Compares two tuples on the coordinates of `mask` (given in coordinate order).
    pub fn compare(&self, mask: SubsetMask, a: &[ElementId], b: &[ElementId]) -> Ordering {
        for ((i, x), y) in mask.iter().zip(a).zip(b) {
            let o = self.rank[i][x].cmp(&self.rank[i][y]);
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    }

    pub fn compare_full(&self, a: &[ElementId], b: &[ElementId]) -> Ordering {
        self.compare(SubsetMask::full(self.sequences.len()), a, b)
    }
}

/// `R = {r(y) : y ∈ Y}` with `r(y)` the least element of `f⁻¹(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentativeSet {
    reps: BTreeMap<Value, Vec<ElementId>>,
}

impl RepresentativeSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn get(&self, y: &Value) -> Option<&[ElementId]> {
        self.reps.get(y).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &Vec<ElementId>)> {
        self.reps.iter()
    }

    pub fn points(&self) -> Vec<Vec<ElementId>> {
        self.reps.values().cloned().collect()
    }
}

pub fn lex_min_representatives(f: &PdFunction, ys: &BTreeSet<Value>) -> Result<RepresentativeSet, PdError> {
    lex_min_representatives_with(f, ys, &LexOrder::index_order(f.ground()))
}

/// Walks `X_[k]` in the given lexicographic order; the first hit on each `y` is `r(y)`.
pub fn lex_min_representatives_with(
    f: &PdFunction,
    ys: &BTreeSet<Value>,
    order: &LexOrder,
) -> Result<RepresentativeSet, PdError> {
    let needed = f.ground().product_size();
    if needed > DEFAULT_TUPLE_BUDGET {
        return Err(PdError::BudgetExceeded { needed, budget: DEFAULT_TUPLE_BUDGET });
    }
    let full = f.full_mask();
    let sets: Vec<&[ElementId]> = order.sequences().iter().map(Vec::as_slice).collect();
    let mut reps = BTreeMap::new();
    let _ = try_for_each_tuple::<()>(&sets, |x| {
        let y = f.eval_on(full, x);
        if ys.contains(&y) && !reps.contains_key(&y) {
            reps.insert(y, x.to_vec());
            if reps.len() == ys.len() {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    if let Some(missing) = ys.iter().find(|y| !reps.contains_key(*y)) {
        return Err(PdError::YNotInImage(missing.clone()));
    }
    Ok(RepresentativeSet { reps })
}

/// Two representatives whose `s`-sections differ but collide under `f_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectivityViolation {
    pub s: SubsetMask,
    pub a: Vec<ElementId>,
    pub b: Vec<ElementId>,
    pub value: Value,
}

/// For each `s`, checks that `f_s` is one-to-one on `π_s(R)`.
pub fn verify_section_injectivity(
    f: &PdFunction,
    family: &[SubsetMask],
    reps: &RepresentativeSet,
) -> Vec<InjectivityViolation> {
    let mut out = Vec::new();
    for &s in family {
        let mut seen: BTreeMap<Value, Vec<ElementId>> = BTreeMap::new();
        let sections: BTreeSet<Vec<ElementId>> = reps.reps.values().map(|x| s.project(x)).collect();
        for a in sections {
            let v = f.eval_on(s, &expand(s, &a, f.k()));
            match seen.get(&v) {
                Some(prev) => {
                    out.push(InjectivityViolation { s, a: prev.clone(), b: a, value: v });
                    break;
                }
                None => {
                    seen.insert(v, a);
                }
            }
        }
    }
    out
}

/// Places an `s`-section into a full tuple (other coordinates are unused fillers).
fn expand(s: SubsetMask, section: &[ElementId], k: usize) -> Vec<ElementId> {
    let mut full = vec![ElementId(0); k];
    for (i, &e) in s.iter().zip(section) {
        full[i] = e;
    }
    full
}

/// `A'` takes `B` on `s` and `A` elsewhere; `B'` the reverse.
pub fn swap_points(s: SubsetMask, a: &[ElementId], b: &[ElementId]) -> (Vec<ElementId>, Vec<ElementId>) {
    let a2 = (0..a.len()).map(|i| if s.contains(i) { b[i] } else { a[i] }).collect();
    let b2 = (0..a.len()).map(|i| if s.contains(i) { a[i] } else { b[i] }).collect();
    (a2, b2)
}

/// The facts the swap argument strings together for two representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapCheck {
    pub a_prime: Vec<ElementId>,
    pub b_prime: Vec<ElementId>,
    pub sections_collide: bool,
    pub f_a_eq_f_a_prime: bool,
    pub f_b_eq_f_b_prime: bool,
    pub a_le_a_prime: bool,
    pub b_le_b_prime: bool,
    pub a_section_lt_b_section: bool,
    pub b_section_lt_a_section: bool,
}

impl SwapCheck {
    /// Whether the argument closes: colliding sections lead to `a < b` and `b < a` simultaneously.
    pub fn reaches_contradiction(&self) -> bool {
        self.sections_collide
            && self.f_a_eq_f_a_prime
            && self.f_b_eq_f_b_prime
            && self.a_section_lt_b_section
            && self.b_section_lt_a_section
    }
}

/// Runs the swap argument on representatives `a`, `b` for the set `s`.
pub fn swap_argument(f: &PdFunction, order: &LexOrder, s: SubsetMask, a: &[ElementId], b: &[ElementId]) -> SwapCheck {
    let full = f.full_mask();
    let (a2, b2) = swap_points(s, a, b);
    let (sa, sb) = (s.project(a), s.project(b));
    let a_le_a2 = order.compare_full(a, &a2) != Ordering::Greater;
    let b_le_b2 = order.compare_full(b, &b2) != Ordering::Greater;
    // A ≤ A' with A, A' equal off s gives a ≤ b on s; strict when the sections differ.
    let cmp = order.compare(s, &sa, &sb);
    SwapCheck {
        sections_collide: sa != sb && f.eval_on(s, a) == f.eval_on(s, b),
        f_a_eq_f_a_prime: f.eval_on(full, a) == f.eval_on(full, &a2),
        f_b_eq_f_b_prime: f.eval_on(full, b) == f.eval_on(full, &b2),
        a_le_a_prime: a_le_a2,
        b_le_b_prime: b_le_b2,
        a_section_lt_b_section: a_le_a2 && cmp == Ordering::Less,
        b_section_lt_a_section: b_le_b2 && cmp == Ordering::Greater,
        a_prime: a2,
        b_prime: b2,
    }
}

/// `Z` uniform on `R`.
pub fn uniform_on_representatives(reps: &RepresentativeSet, k: usize) -> JointDistribution {
    let n = reps.len() as i64;
    JointDistribution::from_atoms(k, reps.reps.values().map(|x| (x.clone(), rational(1, n))))
        .expect("representatives are distinct")
}

/// Exact `H(Z_s | f(Z_s)) = 0` for `Z` uniform on `R`.
pub fn sections_determined(f: &PdFunction, reps: &RepresentativeSet, s: SubsetMask) -> bool {
    let dist = uniform_on_representatives(reps, f.k());
    crate::entropy::is_determined_by(&dist, &[Var::Coords(s)], &[Var::Func(f.clone(), s)])
}
