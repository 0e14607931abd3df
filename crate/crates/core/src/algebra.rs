//! Finite groups and rings given by operation tables.
//!
//! Every structure lives on the carrier `{0, .., order-1}` and all algebra is
//! table lookup. Groups built from raw tables are validated against the group
//! axioms; the named constructors (`cyclic_group`, `dihedral_group`, ...) are
//! correct by construction and only self-test identity and inverses.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod table_format;

/// Index of an element in a structure's carrier.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub usize);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Sorted set of carrier elements.
pub type ElementSet = BTreeSet<ElementId>;

/// Largest order for which associativity and distributivity are checked
/// exhaustively when building from a raw table.
pub const MAX_VALIDATED_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("table must be {order}x{order}; row {row} has {len} entries")]
    NotSquare { order: usize, row: usize, len: usize },
    #[error("order must be positive")]
    EmptyCarrier,
    #[error("entry ({row},{col}) = {value} lies outside the carrier of order {order}")]
    NotClosed { row: usize, col: usize, value: usize, order: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {element} has no two-sided inverse")]
    NoInverse { element: usize },
    #[error("({a}*{b})*{c} = {left} but {a}*({b}*{c}) = {right}")]
    NotAssociative { a: usize, b: usize, c: usize, left: usize, right: usize },
    #[error("addition is not commutative: {a}+{b} != {b}+{a}")]
    AdditionNotAbelian { a: usize, b: usize },
    #[error("multiplication does not distribute over addition at ({a},{b},{c})")]
    NotDistributive { a: usize, b: usize, c: usize },
    #[error("order {order} exceeds {MAX_VALIDATED_ORDER}; raw tables that large cannot be validated")]
    TooLargeToValidate { order: usize },
    #[error("invalid modulus {0}")]
    InvalidModulus(usize),
    #[error("operand {0} of the sumset is empty")]
    EmptyOperand(usize),
    #[error("element {element} not in carrier of order {order}")]
    ElementOutOfRange { element: usize, order: usize },
    #[error("unknown structure name {0:?}")]
    UnknownStructure(String),
}

/// A finite group stored as a Cayley table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    table: Vec<ElementId>,
    identity: ElementId,
    inverse: Vec<ElementId>,
    abelian: bool,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("abelian", &self.abelian)
            .finish()
    }
}

fn flatten(order: usize, rows: &[Vec<usize>]) -> Result<Vec<ElementId>, AlgebraError> {
    if order == 0 {
        return Err(AlgebraError::EmptyCarrier);
    }
    if rows.len() != order {
        return Err(AlgebraError::NotSquare { order, row: rows.len(), len: 0 });
    }
    let mut table = Vec::with_capacity(order * order);
    for (row, entries) in rows.iter().enumerate() {
        if entries.len() != order {
            return Err(AlgebraError::NotSquare { order, row, len: entries.len() });
        }
        for (col, &value) in entries.iter().enumerate() {
            if value >= order {
                return Err(AlgebraError::NotClosed { row, col, value, order });
            }
            table.push(ElementId(value));
        }
    }
    Ok(table)
}

fn find_identity(order: usize, table: &[ElementId]) -> Option<ElementId> {
    (0..order).find(|&e| {
        (0..order).all(|x| table[e * order + x].0 == x && table[x * order + e].0 == x)
    })
    .map(ElementId)
}

fn find_inverses(order: usize, table: &[ElementId], e: ElementId) -> Result<Vec<ElementId>, AlgebraError> {
    (0..order)
        .map(|a| {
            (0..order)
                .find(|&b| table[a * order + b] == e && table[b * order + a] == e)
                .map(ElementId)
                .ok_or(AlgebraError::NoInverse { element: a })
        })
        .collect()
}

fn check_associative(order: usize, table: &[ElementId]) -> Result<(), AlgebraError> {
    for a in 0..order {
        for b in 0..order {
            let ab = table[a * order + b].0;
            for c in 0..order {
                let left = table[ab * order + c].0;
                let bc = table[b * order + c].0;
                let right = table[a * order + bc].0;
                if left != right {
                    return Err(AlgebraError::NotAssociative { a, b, c, left, right });
                }
            }
        }
    }
    Ok(())
}

impl FiniteGroup {
    /// Validates a raw Cayley table (`rows[a][b] = a*b`).
    pub fn from_table(order: usize, rows: &[Vec<usize>]) -> Result<Self, AlgebraError> {
        Self::from_table_named(format!("table{order}"), order, rows)
    }

    pub fn from_table_named(
        name: impl Into<String>,
        order: usize,
        rows: &[Vec<usize>],
    ) -> Result<Self, AlgebraError> {
        if order > MAX_VALIDATED_ORDER {
            return Err(AlgebraError::TooLargeToValidate { order });
        }
        let table = flatten(order, rows)?;
        let identity = find_identity(order, &table).ok_or(AlgebraError::NoIdentity)?;
        let inverse = find_inverses(order, &table, identity)?;
        check_associative(order, &table)?;
        Ok(Self::assemble(name.into(), order, table, identity, inverse))
    }

    /// Trusted path for constructors that are associative by construction.
    fn from_trusted(name: String, order: usize, op: impl Fn(usize, usize) -> usize) -> Self {
        let mut table = Vec::with_capacity(order * order);
        for a in 0..order {
            for b in 0..order {
                let v = op(a, b);
                assert!(v < order, "constructor produced {v} outside carrier {order}");
                table.push(ElementId(v));
            }
        }
        let identity = find_identity(order, &table).expect("constructor lacks an identity");
        let inverse = find_inverses(order, &table, identity).expect("constructor lacks inverses");
        Self::assemble(name, order, table, identity, inverse)
    }

    fn assemble(
        name: String,
        order: usize,
        table: Vec<ElementId>,
        identity: ElementId,
        inverse: Vec<ElementId>,
    ) -> Self {
        let abelian = (0..order)
            .all(|a| (a + 1..order).all(|b| table[a * order + b] == table[b * order + a]));
        FiniteGroup { name, order, table, identity, inverse, abelian }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> ElementId {
        self.identity
    }

    #[inline]
    pub fn op(&self, a: ElementId, b: ElementId) -> ElementId {
        self.table[a.0 * self.order + b.0]
    }

    #[inline]
    pub fn inv(&self, a: ElementId) -> ElementId {
        self.inverse[a.0]
    }

    /// `n·a` for any integer `n` (negative multiples use the inverse).
    pub fn pow(&self, a: ElementId, n: i64) -> ElementId {
        let base = if n < 0 { self.inv(a) } else { a };
        let mut acc = self.identity;
        for _ in 0..n.unsigned_abs() {
            acc = self.op(acc, base);
        }
        acc
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.order).map(ElementId)
    }

    pub fn contains(&self, a: ElementId) -> bool {
        a.0 < self.order
    }

    /// Row-major table as plain indices.
    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.table[a * self.order + b].0).collect())
            .collect()
    }

    /// Ordered product `a_1 * a_2 * ... * a_m`, identity for an empty slice.
    pub fn product(&self, elems: &[ElementId]) -> ElementId {
        elems.iter().fold(self.identity, |acc, &x| self.op(acc, x))
    }

    /// Same group with carrier relabelled by `perm` (old index -> new index).
    pub fn relabel(&self, perm: &[usize]) -> FiniteGroup {
        let n = self.order;
        let mut back = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            back[new] = old;
        }
        Self::from_trusted(format!("{}'", self.name), n, |a, b| {
            perm[self.op(ElementId(back[a]), ElementId(back[b])).0]
        })
    }
}

/// The cyclic group `Z_n` under addition mod `n`.
pub fn cyclic_group(n: usize) -> FiniteGroup {
    assert!(n >= 1, "cyclic group needs n >= 1");
    FiniteGroup::from_trusted(format!("Z{n}"), n, |a, b| (a + b) % n)
}

/// Dihedral group of order `2n`, carrier `e, R, .., R^{n-1}, F, RF, .., R^{n-1}F`.
///
/// Index `i < n` is `R^i` and index `n + i` is `R^i F`, with `F R = R^{-1} F`.
pub fn dihedral_group(n: usize) -> FiniteGroup {
    assert!(n >= 1, "dihedral group needs n >= 1");
    FiniteGroup::from_trusted(format!("D{n}"), 2 * n, |a, b| {
        let (ra, fa) = (a % n, a / n);
        let (rb, fb) = (b % n, b / n);
        // R^ra F^fa R^rb F^fb = R^(ra + (-1)^fa rb) F^(fa+fb)
        let r = if fa == 0 { (ra + rb) % n } else { (ra + n - rb) % n };
        r + n * ((fa + fb) % 2)
    })
}

/// Quaternion group `Q8`: indices `1, -1, i, -i, j, -j, k, -k`.
pub fn quaternion_group() -> FiniteGroup {
    // unit index u in {0:1, 1:i, 2:j, 3:k}; product table of units with signs.
    const UNIT: [[(usize, bool); 4]; 4] = [
        [(0, false), (1, false), (2, false), (3, false)],
        [(1, false), (0, true), (3, false), (2, true)],
        [(2, false), (3, true), (0, true), (1, false)],
        [(3, false), (2, false), (1, true), (0, true)],
    ];
    FiniteGroup::from_trusted("Q8".to_string(), 8, |a, b| {
        let (ua, na) = (a / 2, a % 2 == 1);
        let (ub, nb) = (b / 2, b % 2 == 1);
        let (u, neg) = UNIT[ua][ub];
        2 * u + usize::from(neg ^ na ^ nb)
    })
}

/// `G × H` with carrier index `g * |H| + h`.
pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> FiniteGroup {
    let m = h.order();
    FiniteGroup::from_trusted(format!("{}x{}", g.name(), h.name()), g.order() * m, |a, b| {
        let ga = g.op(ElementId(a / m), ElementId(b / m));
        let ha = h.op(ElementId(a % m), ElementId(b % m));
        ga.0 * m + ha.0
    })
}

/// Ordered sumset `A_1 + A_2 + ... + A_m`, composed left to right.
pub fn nary_sumset(g: &FiniteGroup, operands: &[&[ElementId]]) -> Result<ElementSet, AlgebraError> {
    for (i, op) in operands.iter().enumerate() {
        if op.is_empty() {
            return Err(AlgebraError::EmptyOperand(i));
        }
        if let Some(bad) = op.iter().find(|e| !g.contains(**e)) {
            return Err(AlgebraError::ElementOutOfRange { element: bad.0, order: g.order() });
        }
    }
    Ok(sumset_unchecked(g, operands))
}

pub(crate) fn sumset_unchecked(g: &FiniteGroup, operands: &[&[ElementId]]) -> ElementSet {
    let n = g.order();
    let mut current = vec![false; n];
    current[g.identity().0] = true;
    let mut next = vec![false; n];
    for op in operands {
        next.iter_mut().for_each(|b| *b = false);
        for (a, _) in current.iter().enumerate().filter(|(_, &on)| on) {
            for &b in op.iter() {
                next[g.op(ElementId(a), b).0] = true;
            }
        }
        std::mem::swap(&mut current, &mut next);
    }
    current
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| ElementId(i))
        .collect()
}

/// Cardinality of an ordered sumset, without allocating the result set.
pub fn sumset_size(g: &FiniteGroup, operands: &[&[ElementId]]) -> usize {
    sumset_unchecked(g, operands).len()
}

/// A finite ring: an abelian additive group plus an associative,
/// distributive multiplication. Not necessarily unital or commutative.
#[derive(Clone)]
pub struct FiniteRing {
    name: String,
    additive: FiniteGroup,
    mul: Vec<ElementId>,
    commutative_mul: bool,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteRing")
            .field("name", &self.name)
            .field("order", &self.order())
            .field("commutative_mul", &self.commutative_mul)
            .finish()
    }
}

impl FiniteRing {
    pub fn from_tables(
        name: impl Into<String>,
        order: usize,
        add: &[Vec<usize>],
        mul: &[Vec<usize>],
    ) -> Result<Self, AlgebraError> {
        let name = name.into();
        let additive = FiniteGroup::from_table_named(name.clone(), order, add)?;
        if !additive.is_abelian() {
            let (a, b) = (0..order)
                .flat_map(|a| (0..order).map(move |b| (a, b)))
                .find(|&(a, b)| additive.op(ElementId(a), ElementId(b)) != additive.op(ElementId(b), ElementId(a)))
                .expect("non-abelian table has a non-commuting pair");
            return Err(AlgebraError::AdditionNotAbelian { a, b });
        }
        let mul = flatten(order, mul)?;
        check_associative(order, &mul)?;
        let ring = Self::assemble(name, additive, mul);
        for a in ring.elements() {
            for b in ring.elements() {
                for c in ring.elements() {
                    let left = ring.mul(a, ring.add(b, c)) == ring.add(ring.mul(a, b), ring.mul(a, c));
                    let right = ring.mul(ring.add(a, b), c) == ring.add(ring.mul(a, c), ring.mul(b, c));
                    if !left || !right {
                        return Err(AlgebraError::NotDistributive { a: a.0, b: b.0, c: c.0 });
                    }
                }
            }
        }
        Ok(ring)
    }

    fn assemble(name: String, additive: FiniteGroup, mul: Vec<ElementId>) -> Self {
        let n = additive.order();
        let commutative_mul = (0..n).all(|a| (0..n).all(|b| mul[a * n + b] == mul[b * n + a]));
        FiniteRing { name, additive, mul, commutative_mul }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.additive.order()
    }

    pub fn zero(&self) -> ElementId {
        self.additive.identity()
    }

    pub fn additive_group(&self) -> &FiniteGroup {
        &self.additive
    }

    #[inline]
    pub fn add(&self, a: ElementId, b: ElementId) -> ElementId {
        self.additive.op(a, b)
    }

    #[inline]
    pub fn neg(&self, a: ElementId) -> ElementId {
        self.additive.inv(a)
    }

    #[inline]
    pub fn sub(&self, a: ElementId, b: ElementId) -> ElementId {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: ElementId, b: ElementId) -> ElementId {
        self.mul[a.0 * self.order() + b.0]
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative_mul
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.additive.elements()
    }

    pub fn mul_rows(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        (0..n).map(|a| (0..n).map(|b| self.mul[a * n + b].0).collect()).collect()
    }

    /// The integer `n` as `n·1`-free repeated addition of `x`: `n·x`.
    pub fn scale(&self, x: ElementId, n: i64) -> ElementId {
        self.additive.pow(x, n)
    }

    /// Ordered product of a slice; `None` for an empty slice since the ring may lack a unit.
    pub fn product(&self, elems: &[ElementId]) -> Option<ElementId> {
        let (first, rest) = elems.split_first()?;
        Some(rest.iter().fold(*first, |acc, &x| self.mul(acc, x)))
    }

    /// Element of `Z_n` (only meaningful for `ring_mod`).
    pub fn residue(&self, v: i64) -> ElementId {
        ElementId(v.rem_euclid(self.order() as i64) as usize)
    }
}

/// Largest order [`group_by_name`] will build.
pub const MAX_NAMED_ORDER: usize = 4096;

/// Builds a group from its display name: `Z5`, `D4`, `Q8`, or a product such as `Z2xZ6`.
pub fn group_by_name(name: &str) -> Result<FiniteGroup, AlgebraError> {
    let unknown = || AlgebraError::UnknownStructure(name.to_string());
    let mut acc: Option<FiniteGroup> = None;
    for factor in name.trim().split('x') {
        let g = if factor == "Q8" {
            quaternion_group()
        } else {
            let (kind, digits) = factor.split_at(factor.len().min(1));
            let n: usize = digits.parse().map_err(|_| unknown())?;
            let order = if kind == "D" { n.saturating_mul(2) } else { n };
            if n == 0 || order > MAX_NAMED_ORDER {
                return Err(unknown());
            }
            match kind {
                "Z" => cyclic_group(n),
                "D" => dihedral_group(n),
                _ => return Err(unknown()),
            }
        };
        acc = Some(match acc {
            None => g,
            Some(h) if h.order().saturating_mul(g.order()) <= MAX_NAMED_ORDER => direct_product(&h, &g),
            Some(_) => return Err(unknown()),
        });
    }
    acc.ok_or_else(unknown)
}

/// Builds a ring from its display name: `Z12` or `M2(Z2)`, `M2(Z3)`.
pub fn ring_by_name(name: &str) -> Result<FiniteRing, AlgebraError> {
    let name = name.trim();
    let unknown = || AlgebraError::UnknownStructure(name.to_string());
    match name {
        "M2(Z2)" => matrix_ring_2x2(2),
        "M2(Z3)" => matrix_ring_2x2(3),
        _ => {
            let n: usize = name.strip_prefix('Z').and_then(|d| d.parse().ok()).ok_or_else(unknown)?;
            if n == 0 || n > MAX_NAMED_ORDER {
                return Err(unknown());
            }
            ring_mod(n)
        }
    }
}

/// `Z_n` with addition and multiplication mod `n`. `ring_mod(1)` is the zero ring.
pub fn ring_mod(n: usize) -> Result<FiniteRing, AlgebraError> {
    if n == 0 {
        return Err(AlgebraError::InvalidModulus(n));
    }
    let additive = cyclic_group(n);
    let mul = (0..n)
        .flat_map(|a| (0..n).map(move |b| ElementId((a * b) % n)))
        .collect();
    Ok(FiniteRing::assemble(format!("Z{n}"), additive, mul))
}

/// 2×2 matrices over `Z_p` for `p ∈ {2, 3}`; index `a + p b + p² c + p³ d` for `[[a, b], [c, d]]`.
pub fn matrix_ring_2x2(p: usize) -> Result<FiniteRing, AlgebraError> {
    if p != 2 && p != 3 {
        return Err(AlgebraError::InvalidModulus(p));
    }
    let order = p.pow(4);
    let decode = move |x: usize| [x % p, (x / p) % p, (x / (p * p)) % p, x / (p * p * p)];
    let encode = move |m: [usize; 4]| m[0] + p * m[1] + p * p * m[2] + p * p * p * m[3];
    let additive = FiniteGroup::from_trusted(format!("M2(Z{p})+"), order, |x, y| {
        let (a, b) = (decode(x), decode(y));
        encode([(a[0] + b[0]) % p, (a[1] + b[1]) % p, (a[2] + b[2]) % p, (a[3] + b[3]) % p])
    });
    let mut mul = Vec::with_capacity(order * order);
    for x in 0..order {
        for y in 0..order {
            let (a, b) = (decode(x), decode(y));
            mul.push(ElementId(encode([
                (a[0] * b[0] + a[1] * b[2]) % p,
                (a[0] * b[1] + a[1] * b[3]) % p,
                (a[2] * b[0] + a[3] * b[2]) % p,
                (a[2] * b[1] + a[3] * b[3]) % p,
            ])));
        }
    }
    Ok(FiniteRing::assemble(format!("M2(Z{p})"), additive, mul))
}

/// Ground sets `X_1, .., X_k`, each a nonempty sorted subset of a shared carrier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundFamily {
    carrier: usize,
    sets: Vec<Vec<ElementId>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroundError {
    #[error("ground family needs at least one set")]
    NoSets,
    #[error("ground set X{0} is empty")]
    EmptySet(usize),
    #[error("ground set X{set} contains {element}, outside the carrier of order {carrier}")]
    OutOfCarrier { set: usize, element: usize, carrier: usize },
}

impl GroundFamily {
    pub fn new(carrier: usize, sets: Vec<Vec<ElementId>>) -> Result<Self, GroundError> {
        if sets.is_empty() {
            return Err(GroundError::NoSets);
        }
        let mut clean = Vec::with_capacity(sets.len());
        for (i, mut s) in sets.into_iter().enumerate() {
            if s.is_empty() {
                return Err(GroundError::EmptySet(i + 1));
            }
            if let Some(bad) = s.iter().find(|e| e.0 >= carrier) {
                return Err(GroundError::OutOfCarrier { set: i + 1, element: bad.0, carrier });
            }
            s.sort();
            s.dedup();
            clean.push(s);
        }
        Ok(GroundFamily { carrier, sets: clean })
    }

    /// Convenience constructor from plain indices.
    pub fn from_indices(carrier: usize, sets: &[&[usize]]) -> Result<Self, GroundError> {
        Self::new(carrier, sets.iter().map(|s| s.iter().map(|&i| ElementId(i)).collect()).collect())
    }

    pub fn k(&self) -> usize {
        self.sets.len()
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn set(&self, i: usize) -> &[ElementId] {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[Vec<ElementId>] {
        &self.sets
    }

    /// `|X_1| * .. * |X_k|`, saturating.
    pub fn product_size(&self) -> u128 {
        self.sets.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }
}

/// Shared handle used by function builders.
pub type SharedGroup = Arc<FiniteGroup>;
pub type SharedRing = Arc<FiniteRing>;

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> Vec<ElementId> {
        v.iter().map(|&i| ElementId(i)).collect()
    }

    fn set(v: &[usize]) -> ElementSet {
        ids(v).into_iter().collect()
    }

    #[test]
    fn trivial_group_from_table() {
        let g = FiniteGroup::from_table(1, &[vec![0]]).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.identity(), ElementId(0));
        assert!(g.is_abelian());
    }

    #[test]
    fn z3_from_table_validates() {
        let rows: Vec<Vec<usize>> = (0..3).map(|i| (0..3).map(|j| (i + j) % 3).collect()).collect();
        let g = FiniteGroup::from_table(3, &rows).unwrap();
        assert_eq!(g.order(), 3);
        assert!(g.is_abelian());
        assert_eq!(g.inv(ElementId(1)), ElementId(2));
    }

    #[test]
    fn corrupted_z3_rejected() {
        let mut rows: Vec<Vec<usize>> = (0..3).map(|i| (0..3).map(|j| (i + j) % 3).collect()).collect();
        rows[1][1] = 1;
        let err = FiniteGroup::from_table(3, &rows).unwrap_err();
        assert!(matches!(err, AlgebraError::NotAssociative { .. } | AlgebraError::NoInverse { .. }), "{err}");
    }

    #[test]
    fn table_errors_are_specific() {
        assert!(matches!(
            FiniteGroup::from_table(2, &[vec![0, 2], vec![1, 0]]),
            Err(AlgebraError::NotClosed { row: 0, col: 1, value: 2, .. })
        ));
        assert!(matches!(
            FiniteGroup::from_table(2, &[vec![1, 1], vec![1, 1]]),
            Err(AlgebraError::NoIdentity)
        ));
        assert!(matches!(
            FiniteGroup::from_table(2, &[vec![0, 1], vec![1, 1]]),
            Err(AlgebraError::NoInverse { element: 1 })
        ));
        assert!(matches!(
            FiniteGroup::from_table(2, &[vec![0, 1]]),
            Err(AlgebraError::NotSquare { .. })
        ));
    }

    #[test]
    fn named_constructors() {
        assert_eq!(cyclic_group(1).order(), 1);
        let d3 = dihedral_group(3);
        assert_eq!(d3.order(), 6);
        assert!(!d3.is_abelian());
        let q = quaternion_group();
        assert_eq!(q.order(), 8);
        assert!(!q.is_abelian());
        // i*j = k, j*i = -k, i^2 = -1
        assert_eq!(q.op(ElementId(2), ElementId(4)), ElementId(6));
        assert_eq!(q.op(ElementId(4), ElementId(2)), ElementId(7));
        assert_eq!(q.op(ElementId(2), ElementId(2)), ElementId(1));
        let v4 = direct_product(&cyclic_group(2), &cyclic_group(2));
        assert_eq!(v4.order(), 4);
        assert!(v4.is_abelian());
        assert!(v4.elements().all(|a| v4.op(a, a) == v4.identity()));
        assert!(cyclic_group(5).is_abelian());
    }

    #[test]
    fn named_constructors_pass_full_validation() {
        for g in [dihedral_group(4), quaternion_group(), direct_product(&cyclic_group(2), &cyclic_group(3))] {
            let rebuilt = FiniteGroup::from_table(g.order(), &g.table_rows()).unwrap();
            assert_eq!(rebuilt.identity(), g.identity());
        }
    }

    #[test]
    fn dihedral_relations() {
        let d = dihedral_group(3);
        let (r, f) = (ElementId(1), ElementId(3));
        // F R = R^2 F (index 2 + 3 = 5)
        assert_eq!(d.op(f, r), ElementId(5));
        assert_eq!(d.op(r, f), ElementId(4));
        assert_eq!(d.op(f, f), d.identity());
    }

    #[test]
    fn sumsets() {
        let z5 = cyclic_group(5);
        let s = nary_sumset(&z5, &[&ids(&[0, 1]), &ids(&[0, 2])]).unwrap();
        assert_eq!(s, set(&[0, 1, 2, 3]));
        let e = ids(&[0]);
        assert_eq!(nary_sumset(&z5, &[&e, &e, &e]).unwrap(), set(&[0]));
        assert_eq!(nary_sumset(&z5, &[&e, &[]]), Err(AlgebraError::EmptyOperand(1)));
    }

    #[test]
    fn dihedral_triple_sumset() {
        let d3 = dihedral_group(3);
        let s = ids(&[0, 3]);
        let t = ids(&[1]);
        let out = nary_sumset(&d3, &[&s, &t, &s]).unwrap();
        // R, R^2, RF, R^2F
        assert_eq!(out, set(&[1, 2, 4, 5]));
    }

    #[test]
    fn rings() {
        let z1 = ring_mod(1).unwrap();
        assert_eq!(z1.order(), 1);
        let z12 = ring_mod(12).unwrap();
        assert_eq!(z12.mul(ElementId(5), ElementId(5)), ElementId(1));
        assert_eq!(z12.add(ElementId(6), ElementId(7)), ElementId(1));
        assert!(z12.is_commutative());
        assert_eq!(ring_mod(0).unwrap_err(), AlgebraError::InvalidModulus(0));
        let m2 = matrix_ring_2x2(2).unwrap();
        assert_eq!(m2.order(), 16);
        assert!(!m2.is_commutative());
        assert!(matrix_ring_2x2(5).is_err());
        // validated through the raw-table path too
        FiniteRing::from_tables("m2", 16, &m2.additive_group().table_rows(), &m2.mul_rows()).unwrap();
    }

    #[test]
    fn ring_validation_rejects_bad_mul() {
        let z3 = ring_mod(3).unwrap();
        let add = z3.additive_group().table_rows();
        let mut mul = z3.mul_rows();
        mul[1][1] = 2;
        assert!(FiniteRing::from_tables("bad", 3, &add, &mul).is_err());
    }

    #[test]
    fn relabel_preserves_structure() {
        let d = dihedral_group(3);
        let r = d.relabel(&[5, 4, 3, 2, 1, 0]);
        assert_eq!(r.identity(), ElementId(5));
        assert!(!r.is_abelian());
    }

    #[test]
    fn structures_by_name() {
        for name in ["Z1", "Z12", "D3", "D5", "Q8", "Z2xZ6", "Z2xZ2xZ2", "D4xZ3"] {
            assert_eq!(group_by_name(name).unwrap().name(), name);
        }
        assert_eq!(group_by_name("D4").unwrap().order(), 8);
        assert!(!group_by_name("D3xZ2").unwrap().is_abelian());
        for bad in ["", "Z0", "Y3", "Zx", "D", "Z5000", "Z64xZ128"] {
            assert!(matches!(group_by_name(bad), Err(AlgebraError::UnknownStructure(_))), "{bad}");
        }
        assert_eq!(ring_by_name("M2(Z2)").unwrap().order(), 16);
        assert!(ring_by_name("Z13").unwrap().is_commutative());
        assert!(ring_by_name("Q8").is_err());
    }
}
