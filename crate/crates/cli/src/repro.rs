//! Fixed reproductions with their recorded numbers.

use num_bigint::BigInt;
use partdet::algebra::{cyclic_group, dihedral_group, ring_mod};
use partdet::entropy::{rational, Marginal};
use partdet::hypergraph::{regular_covering, SubsetFamily};
use partdet::inequalities::{self as ineq, Quantity, Status, Verdict};
use partdet::pdfunc::builtin_sum;
use partdet::{ElementId, GroundFamily};
use serde::Serialize;

use crate::CliError;

pub const ITEMS: &[&str] = &[
    "projection-counterexample",
    "dihedral-triple",
    "entropy-4sets",
    "sum-of-squares",
    "illustrative-entropy",
    "illustrative-set",
    "sumset-log-submodularity",
];

#[derive(Debug, Serialize)]
pub struct Reproduction {
    pub item: String,
    pub matches: bool,
    pub lines: Vec<String>,
    pub verdicts: Vec<Verdict>,
}

fn es(v: &[usize]) -> Vec<ElementId> {
    v.iter().map(|&i| ElementId(i)).collect()
}

fn exact_is(v: &Verdict, lhs: i64, rhs: i64) -> bool {
    v.lhs.as_exact() == Some(&BigInt::from(lhs)) && v.rhs.as_exact() == Some(&BigInt::from(rhs))
}

pub fn run(item: &str) -> Result<Reproduction, CliError> {
    let (matches, lines, verdicts) = match item {
        "projection-counterexample" => {
            let v = ineq::projection_nonsubmodularity_example();
            let w = &v.witness;
            let sizes = ["|pi_s|", "|pi_t|", "|pi_union|", "|pi_intersection|"].map(|k| w[k].as_u64().unwrap_or(0));
            let ok = sizes == [3, 3, 5, 2] && exact_is(&v, 10, 9) && v.status == Status::Violated;
            let lines = vec![
                "Y = {000, 100, 010, 001, 101}, s = {1,2}, t = {2,3}".to_string(),
                format!(
                    "|pi_12| = {}, |pi_23| = {}, |pi_123| = {}, |pi_2| = {}",
                    sizes[0], sizes[1], sizes[2], sizes[3]
                ),
                format!("{} > {}: submodularity violated", v.lhs, v.rhs),
            ];
            (ok, lines, vec![v])
        }
        "dihedral-triple" => {
            let d3 = dihedral_group(3);
            let xs = vec![es(&[0, 3]), es(&[1]), es(&[0, 3])];
            let naive = ineq::check_naive_pairwise(&d3, &xs)?;
            let triple = ineq::check_ruzsa_triple(&d3, &xs[0], &xs[1], &xs[2])?;
            let general = ineq::check_nonabelian(&d3, &xs)?;
            let a13 = general.witness["A"]
                .as_array()
                .and_then(|ps| ps.iter().find(|p| p["i"] == 1 && p["j"] == 3))
                .and_then(|p| p["value"].as_u64())
                .unwrap_or(0);
            let ok = exact_is(&naive, 16, 8)
                && naive.is_violated()
                && exact_is(&triple, 16, 16)
                && triple.holds()
                && exact_is(&general, 16, 16)
                && a13 == 4;
            let lines = vec![
                "D3 = <r, s>, S = {1, s}, T = {r}, U = {1, s}".to_string(),
                format!("|S+T+U| = {}", naive.witness["sumset_size"]),
                format!("naive pairwise bound: {} > {} (fails)", naive.lhs, naive.rhs),
                format!("conditioned bound: {} <= 2*2*{a13} = {} (A(1,3) = {a13})", triple.lhs, triple.rhs),
                format!("general non-abelian bound: {} <= {}", general.lhs, general.rhs),
            ];
            (ok, lines, vec![naive, triple, general])
        }
        "entropy-4sets" => {
            let v = ineq::check_entropy_counterexample_4sets(2);
            let (lhs, rhs) = (v.lhs.as_bits().unwrap_or(f64::NAN), v.rhs.as_bits().unwrap_or(f64::NAN));
            let ok = (lhs - 1.0).abs() <= 1e-9
                && (rhs - 2.0 / 3.0).abs() <= 1e-9
                && (lhs - rhs - 1.0 / 3.0).abs() <= 1e-9
                && v.is_violated();
            let lines = vec![
                "Z1 = Z4 = 0, Z2 = Z3 uniform on {0,1}".to_string(),
                format!("LHS {lhs:.9} bit, RHS {rhs:.9} bit"),
                format!("LHS - RHS = {:.9} bit ({})", lhs - rhs, v.status),
            ];
            (ok, lines, vec![v])
        }
        "sum-of-squares" => {
            let r = ring_mod(13)?;
            let v = ineq::check_sum_of_squares(&r, &es(&[1, 2, 3]), &es(&[2, 5]))?;
            let lines = vec![
                "Z13, A = {1,2,3}, B = {2,5}".to_string(),
                format!("|A^2 + B^2| = {} <= |(A+B)^2| * |AB + BA| = {} ({})", v.lhs, v.rhs, v.status),
            ];
            (v.holds() && v.exact, lines, vec![v])
        }
        "illustrative-entropy" => {
            let z6 = cyclic_group(6);
            let sets = vec![es(&[0, 1]), es(&[0, 2]), es(&[0, 3])];
            let f = builtin_sum(&z6, GroundFamily::new(6, sets.clone())?)?;
            let marginals = vec![
                Marginal::new([(ElementId(0), rational(1, 3)), (ElementId(1), rational(2, 3))].into())?,
                Marginal::uniform_on(&sets[1]),
                Marginal::new([(ElementId(0), rational(3, 4)), (ElementId(3), rational(1, 4))].into())?,
            ];
            let c = regular_covering(&SubsetFamily::all_of_size(3, 2))?;
            let v = ineq::check_entropy_upper_bound(&f, &marginals, &c)?;
            let lines = vec![
                "Z6, independent Z1 in {0,1}, Z2 in {0,2}, Z3 in {0,3}; C = all pairs (r = 2)".to_string(),
                format!("H(Z1+Z2+Z3) = {} <= (1/2) sum H(Z_i+Z_j) = {} bits ({})", v.lhs, v.rhs, v.status),
            ];
            (v.holds(), lines, vec![v])
        }
        "illustrative-set" => {
            let z12 = cyclic_group(12);
            let bs = vec![es(&[0, 1]), es(&[0, 3]), es(&[0, 4])];
            let (a, d) = (es(&[0, 6]), es(&[0, 1, 4, 5, 7]));
            let v = ineq::check_regular_abelian(&z12, &a, &bs, &d, &SubsetFamily::all_of_size(3, 2))?;
            let lines = vec![
                "Z12, A = {0,6}, B = ({0,1}, {0,3}, {0,4}), D = {0,1,4,5,7}; C = all pairs (r = 2)".to_string(),
                format!("|A+D|^3 = {} <= |D| * prod |A+B_s| = {} ({})", v.lhs, v.rhs, v.status),
            ];
            (v.holds(), lines, vec![v])
        }
        "sumset-log-submodularity" => {
            let v = ineq::sumset_log_submodularity_example();
            let ok = v.is_violated() && matches!(v.margin, Quantity::Exact(ref m) if m < &BigInt::from(0));
            let lines = vec![
                "Z10, X = ({0,4,8}, {0,2,4,5,6,8}, {5,7}), s = {1,2}, t = {2,3}".to_string(),
                format!("|X1+X2+X3| * |X2| = {} > |X1+X2| * |X2+X3| = {}", v.lhs, v.rhs),
                "sumset cardinality is not log-submodular".to_string(),
            ];
            (ok, lines, vec![v])
        }
        other => return Err(CliError::Invalid(format!("unknown item `{other}`; known: {}, all", ITEMS.join(", ")))),
    };
    Ok(Reproduction { item: item.to_string(), matches, lines, verdicts })
}
