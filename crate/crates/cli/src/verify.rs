//! Turns a scenario into verifier calls.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_bigint::BigInt;
use partdet::algebra::{group_by_name, ring_by_name, FiniteGroup, FiniteRing};
use partdet::entropy::{JointDistribution, Marginal, Rational};
use partdet::hypergraph::{
    degree_covering, dominates, min_covering_lp, minimal_multiset, parse_subset, regular_covering, Domination,
    FractionalCovering, SubsetFamily, DEFAULT_DOMINATION_BUDGET,
};
use partdet::inequalities::{self as ineq, Verdict};
use partdet::pdfunc::{
    builtin_abelian_linear, builtin_cartesian, builtin_interval_g, builtin_ordered_product, builtin_projection,
    builtin_ring_product, builtin_sum,
};
use partdet::poly::Poly;
use partdet::{ElementId, GroundFamily, PdFunction, SubsetMask, Value};

use crate::scenario::{Scenario, Structure};
use crate::CliError;

/// Statement ids accepted by `verify`.
pub const STATEMENTS: &[&str] = &[
    "entropy-submodularity",
    "entropy-upper-bound",
    "compression-entropy",
    "entropy-4sets",
    "pairwise-conditional",
    "set-main",
    "full-compound",
    "compound-log-submodularity",
    "projection-bound",
    "projection-submodularity",
    "sumset-log-submodularity",
    "abelian-sumset",
    "regular-abelian",
    "naive-pairwise",
    "nonabelian",
    "ruzsa-triple",
    "ruzsa-quadruple",
    "weighted-nonabelian",
    "polynomial-compound",
    "factorized",
    "sum-of-squares",
];

fn invalid<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Invalid(msg.into()))
}

fn es(v: &[usize]) -> Vec<ElementId> {
    v.iter().map(|&i| ElementId(i)).collect()
}

fn rat(text: &str) -> Result<Rational, CliError> {
    Rational::from_str(text.trim()).or_else(|_| invalid(format!("`{text}` is not a rational number")))
}

pub fn load_table(path: &str) -> Result<FiniteGroup, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read {path}: {e}")))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let parse_row = |(n, l): (usize, &str)| -> Result<Vec<usize>, CliError> {
        l.split_whitespace()
            .map(|t| t.parse().or_else(|_| invalid(format!("{path} line {}: `{t}` is not an index", n + 1))))
            .collect()
    };
    let order = match lines.next().map(parse_row).transpose()?.as_deref() {
        Some([n]) => *n,
        _ => return invalid(format!("{path}: first line must hold the order")),
    };
    let rows: Vec<Vec<usize>> = lines.map(parse_row).collect::<Result<_, _>>()?;
    let name = std::path::Path::new(path).file_stem().map_or("table".into(), |s| s.to_string_lossy().into_owned());
    Ok(FiniteGroup::from_table_named(name, order, &rows)?)
}

fn group(sc: &Scenario) -> Result<FiniteGroup, CliError> {
    match &sc.structure {
        Some(Structure::Group(name)) => Ok(group_by_name(name)?),
        Some(Structure::Table(path)) => load_table(path),
        Some(Structure::Ring(_)) => invalid("this statement needs a group, not a ring"),
        None => invalid("[structure] is required"),
    }
}

fn ring(sc: &Scenario) -> Result<FiniteRing, CliError> {
    match &sc.structure {
        Some(Structure::Ring(name)) => Ok(ring_by_name(name)?),
        _ => invalid("this statement needs `ring = ...` in [structure]"),
    }
}

fn sets(sc: &Scenario, min: usize) -> Result<Vec<Vec<ElementId>>, CliError> {
    if sc.sets.len() < min {
        return invalid(format!("needs at least {min} sets in [sets], found {}", sc.sets.len()));
    }
    Ok(sc.sets.iter().map(|s| es(s)).collect())
}

fn exact_sets(sc: &Scenario, k: usize) -> Result<Vec<Vec<ElementId>>, CliError> {
    if sc.sets.len() != k {
        return invalid(format!("needs exactly {k} sets in [sets], found {}", sc.sets.len()));
    }
    sets(sc, k)
}

fn carrier(sc: &Scenario) -> usize {
    sc.sets.iter().flatten().map(|&e| e + 1).max().unwrap_or(1)
}

fn kind(sc: &Scenario) -> &str {
    match (&sc.function, &sc.structure) {
        (Some(f), _) => f.kind.as_str(),
        (None, Some(Structure::Ring(_))) => "ring-product",
        (None, Some(_)) => "sum",
        (None, None) => "projection",
    }
}

fn function(sc: &Scenario) -> Result<PdFunction, CliError> {
    let xs = sets(sc, 1)?;
    let f = match kind(sc) {
        "projection" => builtin_projection(GroundFamily::new(carrier(sc), xs)?)?,
        "cartesian" => {
            let labels: Vec<BigInt> = match sc.function.as_ref().and_then(|f| f.labels.as_ref()) {
                Some(l) => l.iter().map(|&v| BigInt::from(v)).collect(),
                None => (0..carrier(sc) as i64).map(BigInt::from).collect(),
            };
            builtin_cartesian(GroundFamily::new(labels.len(), xs)?, labels)?
        }
        "ring-product" => {
            let r = ring(sc)?;
            builtin_ring_product(&r, GroundFamily::new(r.order(), xs)?)?
        }
        other => {
            let g = group(sc)?;
            let ground = GroundFamily::new(g.order(), xs)?;
            match other {
                "sum" => builtin_sum(&g, ground)?,
                "linear" => {
                    let coeffs = sc.function.as_ref().and_then(|f| f.coeffs.clone());
                    let coeffs = coeffs.map_or_else(|| invalid("kind = linear needs `coeffs`"), Ok)?;
                    builtin_abelian_linear(&g, ground, &coeffs)?
                }
                "ordered-product" => builtin_ordered_product(&g, ground)?,
                "interval" => builtin_interval_g(&g, ground)?,
                _ => {
                    return invalid(format!(
                        "unknown function kind `{other}` (sum, linear, ordered-product, interval, projection, cartesian, ring-product)"
                    ))
                }
            }
        }
    };
    Ok(f)
}

fn mask(text: &str, k: usize) -> Result<SubsetMask, CliError> {
    Ok(parse_subset(text, k)?)
}

fn pair(sc: &Scenario, k: usize) -> Result<Option<(SubsetMask, SubsetMask)>, CliError> {
    sc.pair.as_ref().map(|p| Ok((mask(&p.s, k)?, mask(&p.t, k)?))).transpose()
}

fn need_pair(sc: &Scenario, k: usize) -> Result<(SubsetMask, SubsetMask), CliError> {
    pair(sc, k)?.map_or_else(|| invalid("[pair] with `s` and `t` is required"), Ok)
}

fn family(sc: &Scenario, k: usize) -> Result<SubsetFamily, CliError> {
    let c = sc.covering.as_ref();
    if let Some(text) = c.and_then(|c| c.family.as_ref()) {
        return Ok(SubsetFamily::parse(k, text)?);
    }
    match c.and_then(|c| c.preset.as_deref()) {
        Some("singletons") => Ok(SubsetFamily::singletons(k)),
        Some("pairs") => Ok(SubsetFamily::all_of_size(k, 2)),
        Some("leave-one-out") => Ok(SubsetFamily::leave_one_out(k)),
        _ => invalid("[covering] needs `family`, or a preset of singletons, pairs or leave-one-out"),
    }
}

fn covering(sc: &Scenario, k: usize) -> Result<FractionalCovering, CliError> {
    let fam = family(sc, k)?;
    let c = sc.covering.as_ref().expect("family() checked [covering]");
    if let Some(ws) = &c.weights {
        if c.preset.is_some() {
            return invalid("[covering] takes `weights` or `preset`, not both");
        }
        let ws = ws.iter().map(|w| rat(w)).collect::<Result<_, _>>()?;
        return Ok(FractionalCovering::new(fam, ws)?);
    }
    Ok(match c.preset.as_deref() {
        Some("singletons" | "pairs" | "leave-one-out" | "regular") => regular_covering(&fam)?,
        Some("degree") => degree_covering(&fam)?,
        Some("lp") => min_covering_lp(&fam)?,
        Some(other) => return invalid(format!("unknown covering preset `{other}`")),
        None => return invalid("[covering] needs `weights` or `preset`"),
    })
}

fn marginals(sc: &Scenario, k: usize) -> Result<Vec<Marginal>, CliError> {
    let Some(ms) = &sc.marginals else {
        return invalid("[distribution] needs one marginal X<i> per set");
    };
    if ms.len() != k {
        return invalid(format!("{} marginals for {k} sets", ms.len()));
    }
    ms.iter()
        .map(|m| {
            let mut masses = BTreeMap::new();
            for (e, p) in m {
                if masses.insert(ElementId(*e), rat(p)?).is_some() {
                    return invalid(format!("element {e} listed twice in a marginal"));
                }
            }
            Ok(Marginal::new(masses)?)
        })
        .collect()
}

fn joint(sc: &Scenario) -> Result<JointDistribution, CliError> {
    let Some(atoms) = &sc.atoms else {
        return invalid("[distribution] needs `atom` entries");
    };
    let k = atoms[0].tuple.len();
    let parsed: Vec<(Vec<ElementId>, Rational)> =
        atoms.iter().map(|a| Ok((es(&a.tuple), rat(&a.p)?))).collect::<Result<_, CliError>>()?;
    Ok(JointDistribution::from_atoms(k, parsed)?)
}

fn points(sc: &Scenario) -> Result<Vec<Vec<ElementId>>, CliError> {
    let Some(ps) = &sc.points else {
        return invalid("[target] needs `point` entries");
    };
    ps.iter()
        .map(|p| {
            p.iter()
                .map(|&v| usize::try_from(v).map(ElementId).or_else(|_| invalid(format!("negative coordinate {v}"))))
                .collect()
        })
        .collect()
}

fn point_arity(ps: &[Vec<ElementId>]) -> Result<usize, CliError> {
    ps.first().map(Vec::len).filter(|&k| k > 0).map_or_else(|| invalid("no points given"), Ok)
}

/// `Y` as function values, or `None` for the full image.
fn target(sc: &Scenario) -> Result<Option<BTreeSet<Value>>, CliError> {
    let from_points = |wrap: fn(i64) -> Value| -> Option<BTreeSet<Value>> {
        sc.points.as_ref().map(|ps| ps.iter().map(|p| Value::Tuple(p.iter().map(|&v| wrap(v)).collect())).collect())
    };
    Ok(match kind(sc) {
        "projection" => from_points(|v| Value::GroupElem(ElementId(v.max(0) as usize))),
        "cartesian" => from_points(|v| Value::Int(BigInt::from(v))),
        "ring-product" => sc.y.as_ref().map(|y| y.iter().map(|&e| Value::RingElem(ElementId(e))).collect()),
        _ => sc.y.as_ref().map(|y| y.iter().map(|&e| Value::GroupElem(ElementId(e))).collect()),
    })
}

fn sumset_parts(sc: &Scenario) -> Result<(Vec<ElementId>, Vec<ElementId>), CliError> {
    match (&sc.a, &sc.d) {
        (Some(a), Some(d)) => Ok((es(a), es(d))),
        _ => invalid("[sumset] needs `A` and `D`"),
    }
}

fn poly(text: &str) -> Result<Poly, CliError> {
    Poly::parse(text).map_err(|e| CliError::Invalid(format!("polynomial `{text}`: {e}")))
}

/// Runs the statement named in the scenario and returns one or more verdicts.
pub fn run(sc: &Scenario) -> Result<Vec<Verdict>, CliError> {
    let Some(statement) = sc.statement.as_deref() else {
        return invalid("[statement] with `id` is required");
    };
    let one = |v: Verdict| Ok(vec![v]);
    match statement {
        "entropy-submodularity" => {
            let f = function(sc)?;
            let ms = marginals(sc, f.k())?;
            match pair(sc, f.k())? {
                Some((s, t)) => one(ineq::check_entropy_submodularity(&f, &ms, s, t)?),
                None => Ok(ineq::check_entropy_submodularity_all_pairs(&f, &ms)?),
            }
        }
        "entropy-upper-bound" => {
            let f = function(sc)?;
            let ms = marginals(sc, f.k())?;
            one(ineq::check_entropy_upper_bound(&f, &ms, &covering(sc, f.k())?)?)
        }
        "compression-entropy" => {
            let f = function(sc)?;
            let ms = marginals(sc, f.k())?;
            let a = family(sc, f.k())?;
            let b = match &sc.compression {
                Some(text) => SubsetFamily::parse(f.k(), text)?,
                None => minimal_multiset(&a),
            };
            match dominates(&a, &b, DEFAULT_DOMINATION_BUDGET)? {
                Domination::Yes { steps } => one(ineq::check_compression_entropy(&f, &ms, &a, &b, &steps)?),
                Domination::No => invalid(format!("{b} is not reachable from {a} by elementary compressions")),
                Domination::BudgetExhausted { visited } => {
                    invalid(format!("compression search gave up after {visited} families"))
                }
            }
        }
        "entropy-4sets" => one(ineq::check_entropy_4sets(&joint(sc)?)?),
        "pairwise-conditional" => one(ineq::check_pairwise_conditional(&joint(sc)?)?),
        "set-main" | "full-compound" => {
            let f = function(sc)?;
            let c = covering(sc, f.k())?;
            match target(sc)? {
                Some(ys) if statement == "set-main" => one(ineq::check_set_main(&f, &ys, &c)?),
                Some(_) => invalid("full-compound uses the whole image; drop [target]"),
                None => one(ineq::check_full_compound(&f, &c)?),
            }
        }
        "compound-log-submodularity" => {
            let f = function(sc)?;
            let (s, t) = need_pair(sc, f.k())?;
            let ys = match target(sc)? {
                Some(ys) => ys,
                None => partdet::pdfunc::compound_image(&f, f.full_mask())?,
            };
            one(ineq::check_compound_log_submodularity(&f, &ys, s, t)?)
        }
        "projection-bound" => {
            let ps = points(sc)?;
            one(ineq::check_projection_bound(&ps, &covering(sc, point_arity(&ps)?)?)?)
        }
        "projection-submodularity" => {
            let ps = points(sc)?;
            let k = point_arity(&ps)?;
            let (s, t) = need_pair(sc, k)?;
            one(ineq::check_projection_submodularity(&ps, k, s, t)?)
        }
        "sumset-log-submodularity" => {
            let g = group(sc)?;
            let xs = sets(sc, 2)?;
            let (s, t) = need_pair(sc, xs.len())?;
            let y = sc.y.as_ref().map(|y| es(y));
            one(ineq::sumset_log_submodularity_probe(&g, &xs, y.as_deref(), s, t)?)
        }
        "abelian-sumset" => {
            let g = group(sc)?;
            let bs = sets(sc, 1)?;
            let (a, d) = sumset_parts(sc)?;
            one(ineq::check_abelian_sumset(&g, &a, &bs, &d, &covering(sc, bs.len())?)?)
        }
        "regular-abelian" => {
            let g = group(sc)?;
            let bs = sets(sc, 1)?;
            let (a, d) = sumset_parts(sc)?;
            one(ineq::check_regular_abelian(&g, &a, &bs, &d, &family(sc, bs.len())?)?)
        }
        "naive-pairwise" => one(ineq::check_naive_pairwise(&group(sc)?, &sets(sc, 2)?)?),
        "nonabelian" => one(ineq::check_nonabelian(&group(sc)?, &sets(sc, 2)?)?),
        "ruzsa-triple" => {
            let xs = exact_sets(sc, 3)?;
            one(ineq::check_ruzsa_triple(&group(sc)?, &xs[0], &xs[1], &xs[2])?)
        }
        "ruzsa-quadruple" => {
            let xs = exact_sets(sc, 4)?;
            one(ineq::check_ruzsa_quadruple(&group(sc)?, &xs[0], &xs[1], &xs[2], &xs[3])?)
        }
        "weighted-nonabelian" => {
            let ws = sc.covering.as_ref().and_then(|c| c.weights.as_ref());
            let ws = ws.map_or_else(|| invalid("[covering] needs `weights`, one per pair (i,j) in order"), Ok)?;
            let ws: Vec<Rational> = ws.iter().map(|w| rat(w)).collect::<Result<_, _>>()?;
            one(ineq::check_weighted_nonabelian(&group(sc)?, &sets(sc, 2)?, &ws)?)
        }
        "polynomial-compound" => {
            let r = ring(sc)?;
            let p = sc.polynomial.as_ref().map_or_else(|| invalid("[polynomial] is required"), Ok)?;
            let big_f = poly(p.big_f.as_deref().map_or_else(|| invalid("[polynomial] needs `F`"), Ok)?)?;
            let gs: Vec<Poly> = p.g.iter().map(|t| poly(t)).collect::<Result<_, _>>()?;
            if gs.is_empty() {
                return invalid("[polynomial] needs at least one `g`");
            }
            let fbar: Vec<(SubsetMask, Poly)> =
                p.fbar.iter().map(|part| Ok((mask(&part.mask, gs.len())?, poly(&part.poly)?))).collect::<Result<_, CliError>>()?;
            let xs = sets(sc, 1)?;
            one(ineq::check_polynomial_compound(&r, &fbar, &gs, &big_f, &covering(sc, gs.len())?, &xs)?)
        }
        "factorized" => {
            let r = ring(sc)?;
            let p = sc.polynomial.as_ref().map_or_else(|| invalid("[polynomial] is required"), Ok)?;
            let factors: Vec<Poly> = p.factors.iter().map(|t| poly(t)).collect::<Result<_, _>>()?;
            if factors.is_empty() {
                return invalid("[polynomial] needs at least one `factor`");
            }
            let xs = sets(sc, 1)?;
            one(ineq::check_factorized(&r, &factors, &covering(sc, factors.len())?, &xs)?)
        }
        "sum-of-squares" => {
            let xs = exact_sets(sc, 2)?;
            one(ineq::check_sum_of_squares(&ring(sc)?, &xs[0], &xs[1])?)
        }
        other => invalid(format!("unknown statement `{other}`; known: {}", STATEMENTS.join(", "))),
    }
}
