//! Exact rational distributions on finite product spaces.
//!
//! Probabilities are [`BigRational`]; entropies are `f64` bits computed from
//! the exact pushforward law of the requested derived variables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::ElementId;
use crate::pdfunc::{for_each_tuple, PdError, PdFunction, SubsetMask, Value};

pub type Rational = BigRational;

/// Entropy comparisons with margin `>= -ENTROPY_TOLERANCE` hold.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;
/// A float margin below `-VIOLATION_THRESHOLD` is a genuine violation; the band in between is inconclusive.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntropyError {
    #[error("masses sum to {0}, not 1")]
    NotNormalized(Rational),
    #[error("mass {mass} at {atom:?} is not positive")]
    NonPositiveMass { atom: Vec<usize>, mass: Rational },
    #[error("atom {atom:?} has {got} coordinates, expected {expected}")]
    WrongArity { atom: Vec<usize>, expected: usize, got: usize },
    #[error("atom {atom:?} leaves the declared support at coordinate {coordinate}")]
    OutsideSupport { atom: Vec<usize>, coordinate: usize },
    #[error("distribution has no atoms")]
    Empty,
}

fn ids(t: &[ElementId]) -> Vec<usize> {
    t.iter().map(|e| e.0).collect()
}

pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Law of a single coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marginal {
    masses: BTreeMap<ElementId, Rational>,
}

impl Marginal {
    pub fn new(masses: BTreeMap<ElementId, Rational>) -> Result<Self, EntropyError> {
        let masses: BTreeMap<_, _> = masses.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if masses.is_empty() {
            return Err(EntropyError::Empty);
        }
        if let Some((e, p)) = masses.iter().find(|(_, p)| p.is_negative()) {
            return Err(EntropyError::NonPositiveMass { atom: vec![e.0], mass: p.clone() });
        }
        let total: Rational = masses.values().sum();
        if !total.is_one() {
            return Err(EntropyError::NotNormalized(total));
        }
        Ok(Marginal { masses })
    }

    pub fn uniform_on(set: &[ElementId]) -> Self {
        assert!(!set.is_empty(), "uniform law on an empty set");
        let mut support = set.to_vec();
        support.sort();
        support.dedup();
        let p = rational(1, support.len() as i64);
        Marginal { masses: support.into_iter().map(|e| (e, p.clone())).collect() }
    }

    pub fn point(e: ElementId) -> Self {
        Marginal { masses: [(e, Rational::one())].into_iter().collect() }
    }

    /// Numerators uniform on `1..=100`, normalized.
    pub fn random(rng: &mut impl Rng, support: &[ElementId]) -> Self {
        assert!(!support.is_empty());
        let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=100)).collect();
        let total: i64 = weights.iter().sum();
        Marginal {
            masses: support.iter().zip(weights).map(|(&e, w)| (e, rational(w, total))).collect(),
        }
    }

    pub fn support(&self) -> Vec<ElementId> {
        self.masses.keys().copied().collect()
    }

    pub fn mass(&self, e: ElementId) -> Rational {
        self.masses.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ElementId, &Rational)> {
        self.masses.iter()
    }
}

/// Exact joint pmf on `S_1 × .. × S_k`. Only atoms with positive mass are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointDistribution {
    supports: Vec<Vec<ElementId>>,
    pmf: BTreeMap<Vec<ElementId>, Rational>,
}

impl JointDistribution {
    pub fn new(
        supports: Vec<Vec<ElementId>>,
        pmf: BTreeMap<Vec<ElementId>, Rational>,
    ) -> Result<Self, EntropyError> {
        if pmf.is_empty() {
            return Err(EntropyError::Empty);
        }
        let k = supports.len();
        let mut total = Rational::zero();
        for (atom, p) in &pmf {
            if atom.len() != k {
                return Err(EntropyError::WrongArity { atom: ids(atom), expected: k, got: atom.len() });
            }
            if !p.is_positive() {
                return Err(EntropyError::NonPositiveMass { atom: ids(atom), mass: p.clone() });
            }
            if let Some(c) = (0..k).find(|&i| !supports[i].contains(&atom[i])) {
                return Err(EntropyError::OutsideSupport { atom: ids(atom), coordinate: c + 1 });
            }
            total += p;
        }
        if !total.is_one() {
            return Err(EntropyError::NotNormalized(total));
        }
        Ok(JointDistribution { supports, pmf })
    }

    /// Builds from atoms, merging duplicates and inferring the supports.
    pub fn from_atoms(
        k: usize,
        atoms: impl IntoIterator<Item = (Vec<ElementId>, Rational)>,
    ) -> Result<Self, EntropyError> {
        let mut pmf: BTreeMap<Vec<ElementId>, Rational> = BTreeMap::new();
        for (atom, p) in atoms {
            *pmf.entry(atom).or_insert_with(Rational::zero) += p;
        }
        let mut supports = vec![Vec::new(); k];
        for atom in pmf.keys() {
            for (i, e) in atom.iter().enumerate().take(k) {
                if !supports[i].contains(e) {
                    supports[i].push(*e);
                }
            }
        }
        supports.iter_mut().for_each(|s| s.sort());
        Self::new(supports, pmf)
    }

    pub fn point_mass(tuple: Vec<ElementId>) -> Self {
        let supports = tuple.iter().map(|&e| vec![e]).collect();
        JointDistribution { supports, pmf: [(tuple, Rational::one())].into_iter().collect() }
    }

    /// Uniform law on a set of k-tuples.
    pub fn uniform_on_tuples(k: usize, tuples: &[Vec<ElementId>]) -> Result<Self, EntropyError> {
        let n = tuples.len() as i64;
        Self::from_atoms(k, tuples.iter().map(|t| (t.clone(), rational(1, n.max(1)))))
    }

    pub fn k(&self) -> usize {
        self.supports.len()
    }

    pub fn supports(&self) -> &[Vec<ElementId>] {
        &self.supports
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Vec<ElementId>, &Rational)> {
        self.pmf.iter()
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn mass(&self, tuple: &[ElementId]) -> Rational {
        self.pmf.get(tuple).cloned().unwrap_or_else(Rational::zero)
    }
}

/// A derived random variable: raw coordinates `Z_s`, or `f_s(Z)`.
#[derive(Clone, Debug)]
pub enum Var {
    Coords(SubsetMask),
    Func(PdFunction, SubsetMask),
}

impl Var {
    fn value(&self, x: &[ElementId]) -> Value {
        match self {
            Var::Coords(mask) => Value::Tuple(mask.iter().map(|i| Value::GroupElem(x[i])).collect()),
            Var::Func(f, mask) => f.eval_on(*mask, x),
        }
    }
}

/// Exact joint law of the listed variables.
pub fn law(dist: &JointDistribution, vars: &[Var]) -> BTreeMap<Vec<Value>, Rational> {
    let mut out: BTreeMap<Vec<Value>, Rational> = BTreeMap::new();
    for (x, p) in dist.atoms() {
        let key: Vec<Value> = vars.iter().map(|v| v.value(x)).collect();
        *out.entry(key).or_insert_with(Rational::zero) += p;
    }
    out
}

/// `-Σ p log₂ p` of an exact pmf.
pub fn entropy_of<K>(pmf: &BTreeMap<K, Rational>) -> f64 {
    pmf.values()
        .map(|p| {
            let q = p.to_f64().unwrap_or(0.0);
            if q > 0.0 {
                -q * q.log2()
            } else {
                0.0
            }
        })
        .sum()
}

/// Entropy in bits of the joint law of `vars`. An empty list has entropy 0.
pub fn entropy_bits(dist: &JointDistribution, vars: &[Var]) -> f64 {
    if vars.is_empty() {
        return 0.0;
    }
    entropy_of(&law(dist, vars))
}

/// `H(target | given) = H(target, given) - H(given)`.
pub fn conditional_entropy_bits(dist: &JointDistribution, target: &[Var], given: &[Var]) -> f64 {
    let joint: Vec<Var> = target.iter().chain(given).cloned().collect();
    entropy_bits(dist, &joint) - entropy_bits(dist, given)
}

/// `I(A; B | G) = H(G, A) - H(G, A, B) - H(G) + H(G, B)`.
pub fn mutual_information_bits(dist: &JointDistribution, a: &[Var], b: &[Var], given: &[Var]) -> f64 {
    let cat = |parts: &[&[Var]]| -> Vec<Var> { parts.iter().flat_map(|p| p.iter().cloned()).collect() };
    entropy_bits(dist, &cat(&[given, a])) - entropy_bits(dist, &cat(&[given, a, b])) - entropy_bits(dist, given)
        + entropy_bits(dist, &cat(&[given, b]))
}

/// Exact test of `H(target | given) = 0`: every value of `given` pins down `target`.
pub fn is_determined_by(dist: &JointDistribution, target: &[Var], given: &[Var]) -> bool {
    let mut seen: BTreeMap<Vec<Value>, Vec<Value>> = BTreeMap::new();
    for (x, _) in dist.atoms() {
        let g: Vec<Value> = given.iter().map(|v| v.value(x)).collect();
        let t: Vec<Value> = target.iter().map(|v| v.value(x)).collect();
        match seen.get(&g) {
            Some(prev) if *prev != t => return false,
            Some(_) => {}
            None => {
                seen.insert(g, t);
            }
        }
    }
    true
}

/// Law of independent coordinates with the given marginals.
pub fn product_distribution(marginals: &[Marginal]) -> JointDistribution {
    let supports: Vec<Vec<ElementId>> = marginals.iter().map(Marginal::support).collect();
    let refs: Vec<&[ElementId]> = supports.iter().map(Vec::as_slice).collect();
    let mut pmf = BTreeMap::new();
    for_each_tuple(&refs, |x| {
        let p: Rational = x.iter().zip(marginals).map(|(&e, m)| m.mass(e)).product();
        pmf.insert(x.to_vec(), p);
    });
    JointDistribution { supports, pmf }
}

/// Exact law of `f_s(Z)`.
pub fn pushforward(dist: &JointDistribution, f: &PdFunction, mask: SubsetMask) -> BTreeMap<Value, Rational> {
    let mut out: BTreeMap<Value, Rational> = BTreeMap::new();
    for (x, p) in dist.atoms() {
        *out.entry(f.eval_on(mask, x)).or_insert_with(Rational::zero) += p;
    }
    out
}

/// Joint law on `X_[k]` making `f(Z)` uniform on `f(X_[k])`: mass `1/(l·l_y)`
/// on each point of the fiber over `y`, where `l` is the image size and `l_y`
/// the fiber size.
pub fn uniformizing_joint(f: &PdFunction) -> Result<JointDistribution, PdError> {
    let full = f.full_mask();
    let needed = f.ground().product_size();
    if needed > crate::pdfunc::DEFAULT_TUPLE_BUDGET {
        return Err(PdError::BudgetExceeded { needed, budget: crate::pdfunc::DEFAULT_TUPLE_BUDGET });
    }
    let mut fibers: BTreeMap<Value, Vec<Vec<ElementId>>> = BTreeMap::new();
    for_each_tuple(&f.ground_for(full), |x| {
        fibers.entry(f.eval_on(full, x)).or_default().push(x.to_vec());
    });
    let l = fibers.len() as i64;
    let mut pmf = BTreeMap::new();
    for fiber in fibers.values() {
        let p = rational(1, l * fiber.len() as i64);
        for x in fiber {
            pmf.insert(x.clone(), p.clone());
        }
    }
    Ok(JointDistribution { supports: f.ground().sets().to_vec(), pmf })
}

/// Random joint law: each tuple of the product is kept with probability
/// `density` (at least one survives), masses have numerators uniform on `1..=100`.
pub fn random_joint(rng: &mut impl Rng, supports: &[Vec<ElementId>], density: f64) -> JointDistribution {
    let refs: Vec<&[ElementId]> = supports.iter().map(Vec::as_slice).collect();
    let mut all = Vec::new();
    for_each_tuple(&refs, |x| all.push(x.to_vec()));
    let mut chosen: Vec<(Vec<ElementId>, i64)> = Vec::new();
    for x in &all {
        if rng.gen_bool(density) {
            chosen.push((x.clone(), rng.gen_range(1..=100)));
        }
    }
    if chosen.is_empty() {
        let x = all[rng.gen_range(0..all.len())].clone();
        chosen.push((x, 1));
    }
    let total: i64 = chosen.iter().map(|(_, w)| w).sum();
    JointDistribution::from_atoms(supports.len(), chosen.into_iter().map(|(x, w)| (x, rational(w, total))))
        .expect("weights are positive and normalized")
}

/// Three-way classification of a float margin (`rhs - lhs`) for `lhs <= rhs`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FloatOutcome {
    Holds,
    Inconclusive,
    Violated,
}

pub fn classify_margin(margin: f64) -> FloatOutcome {
    if margin >= -ENTROPY_TOLERANCE {
        FloatOutcome::Holds
    } else if margin < -VIOLATION_THRESHOLD {
        FloatOutcome::Violated
    } else {
        FloatOutcome::Inconclusive
    }
}
