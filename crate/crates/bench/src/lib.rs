//! Deterministic fixtures shared by the benches.

use partdet::algebra::{cyclic_group, FiniteGroup};
use partdet::entropy::Marginal;
use partdet::hypergraph::SubsetFamily;
use partdet::pdfunc::{builtin_sum, PdError};
use partdet::{ElementId, GroundFamily, PdFunction, SubsetMask};

/// `k` arithmetic progressions `{i, i+step, ..}` of length `len` in `Z_n`.
pub fn progressions(n: usize, k: usize, len: usize) -> Vec<Vec<ElementId>> {
    (0..k)
        .map(|i| {
            let step = 1 + i % (n - 1).max(1);
            let mut s: Vec<ElementId> = (0..len).map(|j| ElementId((i + j * step) % n)).collect();
            s.sort();
            s.dedup();
            s
        })
        .collect()
}

pub fn sum_instance(n: usize, k: usize, len: usize) -> Result<(FiniteGroup, PdFunction), PdError> {
    let g = cyclic_group(n);
    let ground = GroundFamily::new(n, progressions(n, k, len)).expect("sets inside Z_n");
    let f = builtin_sum(&g, ground)?;
    Ok((g, f))
}

/// Uniform marginal on each ground set.
pub fn uniform_marginals(f: &PdFunction) -> Vec<Marginal> {
    (0..f.k()).map(|i| Marginal::uniform_on(f.ground().set(i))).collect()
}

/// Every 2- and 3-subset of `[k]`, a family the LP has to work on.
pub fn mixed_family(k: usize) -> SubsetFamily {
    let members = SubsetMask::all(k).filter(|s| (2..=3).contains(&s.len())).collect();
    SubsetFamily::new(k, members).expect("nonempty members")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        let (_, f) = sum_instance(12, 4, 4).unwrap();
        assert_eq!(f.k(), 4);
        assert!(f.ground().sets().iter().all(|s| !s.is_empty() && s.len() <= 4));
        assert_eq!(uniform_marginals(&f).len(), 4);
        assert_eq!(mixed_family(5).len(), 20);
    }
}
