use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn partdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_partdet")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).display().to_string()
}

fn temp_scenario(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn json_path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn repro_projection_counterexample() {
    let o = partdet(&["repro", "projection-counterexample"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("10 > 9: submodularity violated"), "{out}");
    assert!(out.contains("|pi_12| = 3, |pi_23| = 3, |pi_123| = 5, |pi_2| = 2"), "{out}");
}

#[test]
fn repro_dihedral_triple() {
    let o = partdet(&["repro", "dihedral-triple"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("16 > 8"), "{out}");
    assert!(out.contains("16 <= 2*2*4 = 16"), "{out}");
}

#[test]
fn repro_entropy_4sets_prints_nine_decimals() {
    let o = partdet(&["repro", "entropy-4sets"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("LHS 1.000000000 bit, RHS 0.666666667 bit"), "{out}");
    assert!(out.contains("0.333333333 bit"), "{out}");
}

#[test]
fn repro_all_reproduces_everything_and_records_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = json_path(&dir, "all.json");
    let o = partdet(&["repro", "all", "--seed", "17", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("reproduced").count(), 7);
    let report = read_json(&path);
    let items = report.as_array().unwrap();
    assert_eq!(items.len(), 7);
    for item in items {
        assert_eq!(item["matches"], true);
        for v in item["verdicts"].as_array().unwrap() {
            assert_eq!(v["seed"], 17);
        }
    }
}

#[test]
fn repro_unknown_item_is_an_error() {
    let o = partdet(&["repro", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown item"));
}

#[test]
fn verify_abelian_form_on_z11_holds() {
    let dir = tempfile::tempdir().unwrap();
    let path = json_path(&dir, "v.json");
    let o = partdet(&["verify", &scenario("abelian-z11.scn"), "--seed", "3", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = read_json(&path);
    assert_eq!(v["status"], "holds");
    assert_eq!(v["seed"], 3);
    // |A+D| = 8 with A = {0,4}, D = {0,1,2,5,8}: 8^3 = 512.
    assert_eq!(v["lhs"], "512");
}

#[test]
fn verify_violation_exits_two_with_witness() {
    let o = partdet(&["verify", &scenario("naive-pairwise.scn")]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("16 > 8"), "{out}");
    assert!(out.contains("witness"), "{out}");
}

#[test]
fn verify_every_shipped_scenario() {
    let expected = [
        ("abelian-z11.scn", 0),
        ("compound-lp.scn", 0),
        ("dihedral-triple.scn", 0),
        ("entropy-4sets.scn", 2),
        ("entropy-pairs.scn", 0),
        ("naive-pairwise.scn", 2),
        ("ruzsa-triple.json", 0),
        ("sum-of-squares.scn", 0),
    ];
    for (name, code) in expected {
        let o = partdet(&["verify", &scenario(name)]);
        assert_eq!(o.status.code(), Some(code), "{name}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn json_and_text_scenarios_give_the_same_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (json_path(&dir, "a.json"), json_path(&dir, "b.json"));
    let text = temp_scenario("[statement]\nid = ruzsa-triple\n[structure]\ngroup = D3\n[sets]\nX1 = 0 3\nX2 = 1\nX3 = 0 3\n[run]\nseed = 5\n");
    partdet(&["verify", text.path().to_str().unwrap(), "--json", a.to_str().unwrap()]);
    partdet(&["verify", &scenario("ruzsa-triple.json"), "--json", b.to_str().unwrap()]);
    let (mut va, mut vb) = (read_json(&a), read_json(&b));
    for v in [&mut va, &mut vb] {
        v.as_object_mut().unwrap().remove("runtime_ms");
    }
    assert_eq!(va, vb);
    assert_eq!(va["seed"], 5);
}

#[test]
fn parse_errors_report_line_numbers() {
    let f = temp_scenario("[statement]\nid = nonabelian\n\n[sets]\nX1 = 0 1\nX2 = 0 x\n");
    let o = partdet(&["verify", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 6"), "{}", stderr(&o));
}

#[test]
fn unknown_json_keys_are_rejected() {
    let f = temp_scenario(r#"{"statement": "nonabelian", "sets": [[0]], "extra": true}"#);
    let o = partdet(&["verify", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
}

#[test]
fn hypothesis_failures_surface_verbatim() {
    let f = temp_scenario("[statement]\nid = abelian-sumset\n[structure]\ngroup = D3\n[sets]\nX1 = 0 1\n[sumset]\nA = 0\nD = 0\n[covering]\npreset = singletons\n");
    let o = partdet(&["verify", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("D3"), "{}", stderr(&o));
}

#[test]
fn search_projection_finds_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = json_path(&dir, "r.json");
    let o = partdet(&["search", &scenario("projection-search.scn"), "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = read_json(&path);
    assert_eq!(r["instances"], 255);
    let violations = r["violations"].as_array().unwrap();
    assert!(!violations.is_empty());
    assert!(violations[0]["instance"]["sets"].is_array());
    assert_eq!(r["unconfirmed"].as_array().unwrap().len(), 0);
}

#[test]
fn search_reports_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (i, threads) in ["1", "4"].iter().enumerate() {
        let path = json_path(&dir, &format!("r{i}.json"));
        let o = partdet(&[
            "search",
            &scenario("quadruple-probe.scn"),
            "--seed",
            "11",
            "--threads",
            threads,
            "--json",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let mut r = read_json(&path);
        r.as_object_mut().unwrap().remove("wall_ms");
        reports.push(r);
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0]["scenario"]["seed"], 11);
}

#[test]
fn search_without_a_search_section_is_an_error() {
    let o = partdet(&["search", &scenario("abelian-z11.scn")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no [search] section"));
}

#[test]
fn info_dihedral_4() {
    let o = partdet(&["info", "dihedral", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("group D4: order 8, non-abelian"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("  ")).count(), 8);
}

#[test]
fn info_reads_a_table_file() {
    let mut f = tempfile::Builder::new().suffix(".txt").tempfile().unwrap();
    f.write_all(b"3\n0 1 2\n1 2 0\n2 0 1\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = json_path(&dir, "g.json");
    let o = partdet(&["info", f.path().to_str().unwrap(), "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let g = read_json(&path);
    assert_eq!(g["order"], 3);
    assert_eq!(g["abelian"], true);
}

#[test]
fn info_rejects_a_non_group_table() {
    let mut f = tempfile::Builder::new().suffix(".txt").tempfile().unwrap();
    f.write_all(b"2\n0 0\n0 1\n").unwrap();
    let o = partdet(&["info", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compound_bound_search_on_the_abelian_catalog_finds_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = json_path(&dir, "r.json");
    let o = partdet(&["search", &scenario("compound-bound-search.scn"), "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&path);
    assert_eq!(r["instances"], 10000);
    assert_eq!(r["holds"], 10000);
    assert_eq!(r["errors"], 0);
}
