//! `partdet`: reproduce fixed results, verify scenario files, run searches, inspect structures.
//!
//! Exit codes: 0 holds (or no violation found), 2 violation found, 1 error.

mod repro;
mod scenario;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use partdet::algebra::{group_by_name, ring_by_name, AlgebraError, FiniteGroup, GroundError};
use partdet::entropy::EntropyError;
use partdet::hypergraph::HypergraphError;
use partdet::inequalities::{InequalityError, Status, Verdict};
use partdet::pdfunc::PdError;
use partdet::search::{default_suite, run_search_with_threads, SearchError, SearchReport};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] scenario::ParseError),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Inequality(#[from] InequalityError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Pd(#[from] PdError),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Parser)]
#[command(name = "partdet", version, about = "Entropy and cardinality inequalities for partition-determined functions")]
struct Cli {
    /// Write the full JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Seed recorded in reports; overrides the scenario seed for searches.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Instance budget for exhaustive searches.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a fixed result: projection-counterexample, dihedral-triple, entropy-4sets,
    /// sum-of-squares, illustrative-entropy, illustrative-set, sumset-log-submodularity, all.
    Repro { item: String },
    /// Check the statement in a scenario file.
    Verify { scenario: PathBuf },
    /// Run the [search] section of a scenario file, or the default suite when no file is given.
    Search { scenario: Option<PathBuf> },
    /// Describe a structure: `D4`, `dihedral 4`, `Q8`, `Z2xZ6`, `ring Z13`, or a table file.
    Info {
        #[arg(required = true, num_args = 1..)]
        structure: Vec<String>,
    },
}

enum Outcome {
    Holds,
    Violated,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Repro { item } => cmd_repro(cli, item),
        Command::Verify { scenario } => cmd_verify(cli, scenario),
        Command::Search { scenario } => cmd_search(cli, scenario.as_deref()),
        Command::Info { structure } => cmd_info(cli, structure),
    }
}

fn write_json(cli: &Cli, value: &impl Serialize) -> Result<(), CliError> {
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(value).expect("reports serialize");
        std::fs::write(path, text + "\n").map_err(|source| CliError::Write { path: path.clone(), source })?;
    }
    Ok(())
}

fn print_verdict(v: &Verdict) {
    println!("{}", v.summary());
    if v.exact {
        println!("  margin {} (slack {:.6} bits)", v.margin, v.slack_bits);
    } else {
        println!("  margin {} bits", v.margin);
    }
    if let Some(note) = &v.note {
        println!("  note: {note}");
    }
    if v.status == Status::Violated {
        println!("  witness: {}", v.witness);
    }
}

fn cmd_repro(cli: &Cli, item: &str) -> Result<Outcome, CliError> {
    let items: Vec<&str> = if item == "all" { repro::ITEMS.to_vec() } else { vec![item] };
    let mut out = Vec::new();
    for name in items {
        let mut r = repro::run(name)?;
        if let Some(seed) = cli.seed {
            r.verdicts = r.verdicts.into_iter().map(|v| v.with_seed(seed)).collect();
        }
        println!("== {} ==", r.item);
        for line in &r.lines {
            println!("{line}");
        }
        println!("{}", if r.matches { "reproduced" } else { "MISMATCH" });
        out.push(r);
    }
    if item == "all" {
        write_json(cli, &out)?;
    } else {
        write_json(cli, &out[0])?;
    }
    match out.iter().find(|r| !r.matches) {
        Some(r) => Err(CliError::Invalid(format!("{} does not match its recorded numbers", r.item))),
        None => Ok(Outcome::Holds),
    }
}

fn cmd_verify(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let sc = scenario::load(path)?;
    let start = Instant::now();
    let mut verdicts = verify::run(&sc)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    for v in &mut verdicts {
        v.runtime_ms = Some(ms);
        if let Some(seed) = cli.seed.or(sc.seed) {
            v.seed = Some(seed);
        }
    }
    for v in &verdicts {
        print_verdict(v);
    }
    if verdicts.len() == 1 {
        write_json(cli, &verdicts[0])?;
    } else {
        write_json(cli, &verdicts)?;
    }
    Ok(if verdicts.iter().any(Verdict::is_violated) { Outcome::Violated } else { Outcome::Holds })
}

fn print_report(r: &SearchReport) {
    let s = &r.scenario;
    println!("== search {} (seed {}) ==", s.statement, s.seed);
    println!(
        "instances {} of {}: {} hold, {} violated, {} inconclusive, {} errors ({:.0} ms)",
        r.instances, r.space_size, r.holds, r.violated, r.inconclusive, r.errors, r.wall_ms
    );
    if let Some(e) = &r.first_error {
        println!("  first error: {e}");
    }
    if r.budget_exceeded {
        println!("  budget exceeded: partial report");
    }
    if !r.unconfirmed.is_empty() {
        println!("  unconfirmed by re-evaluation (not reported): trials {:?}", r.unconfirmed);
    }
    for f in r.violations.iter().take(3) {
        println!("  violation at trial {}: {}", f.trial, f.verdict.summary());
        println!("    instance: {}", f.instance.to_json());
    }
    if r.violations.len() > 3 {
        println!("  ... {} more in the JSON report", r.violations.len() - 3);
    }
    if let Some(f) = &r.min_margin {
        println!("  smallest margin {} at trial {}", f.verdict.margin, f.trial);
    }
}

fn cmd_search(cli: &Cli, path: Option<&Path>) -> Result<Outcome, CliError> {
    let mut scenarios = match path {
        Some(p) => {
            let sc = scenario::load(p)?;
            vec![sc.search.ok_or_else(|| CliError::Invalid(format!("{} has no [search] section", p.display())))?]
        }
        None => default_suite(cli.seed.unwrap_or(0)),
    };
    for s in &mut scenarios {
        if let Some(seed) = cli.seed {
            s.seed = seed;
        }
        if let Some(budget) = cli.budget {
            s.budget = budget;
        }
    }
    let mut reports = Vec::new();
    for s in &scenarios {
        let r = run_search_with_threads(s, cli.threads)?;
        print_report(&r);
        reports.push(r);
    }
    if path.is_some() {
        write_json(cli, &reports[0])?;
    } else {
        write_json(cli, &reports)?;
    }
    Ok(if reports.iter().any(SearchReport::found_violation) { Outcome::Violated } else { Outcome::Holds })
}

fn structure_name(words: &[String]) -> String {
    match words {
        [kind, n] if kind == "dihedral" => format!("D{n}"),
        [kind, n] if kind == "cyclic" => format!("Z{n}"),
        [kind] if kind == "quaternion" => "Q8".into(),
        _ => words.join(""),
    }
}

fn print_table(rows: &[Vec<usize>]) {
    let width = rows.len().saturating_sub(1).to_string().len();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
        println!("  {}", cells.join(" "));
    }
}

fn element_orders(g: &FiniteGroup) -> Vec<usize> {
    g.elements()
        .map(|a| {
            let mut x = a;
            let mut n = 1;
            while x != g.identity() {
                x = g.op(x, a);
                n += 1;
            }
            n
        })
        .collect()
}

fn cmd_info(cli: &Cli, words: &[String]) -> Result<Outcome, CliError> {
    if words.first().map(String::as_str) == Some("ring") {
        let r = ring_by_name(&words[1..].join(""))?;
        println!("ring {}: order {}, {}", r.name(), r.order(), if r.is_commutative() { "commutative" } else { "non-commutative" });
        println!("addition:");
        print_table(&r.additive_group().table_rows());
        println!("multiplication:");
        print_table(&r.mul_rows());
        write_json(
            cli,
            &json!({
                "kind": "ring",
                "name": r.name(),
                "order": r.order(),
                "commutative": r.is_commutative(),
                "add": r.additive_group().table_rows(),
                "mul": r.mul_rows(),
            }),
        )?;
        return Ok(Outcome::Holds);
    }
    let name = structure_name(words);
    let g = if words.len() == 1 && Path::new(&name).is_file() { verify::load_table(&name)? } else { group_by_name(&name)? };
    println!("group {}: order {}, {}", g.name(), g.order(), if g.is_abelian() { "abelian" } else { "non-abelian" });
    println!("identity {}", g.identity());
    let orders = element_orders(&g);
    println!("element orders {orders:?}");
    println!("Cayley table (row * column):");
    print_table(&g.table_rows());
    write_json(
        cli,
        &json!({
            "kind": "group",
            "name": g.name(),
            "order": g.order(),
            "abelian": g.is_abelian(),
            "identity": g.identity().index(),
            "element_orders": orders,
            "table": g.table_rows(),
        }),
    )?;
    Ok(Outcome::Holds)
}
