use std::path::{Path, PathBuf};
use std::process::Command;

use pgg_core::reduction::parse_1in3;
use pgg_core::{parse_game, write_game};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Option<Value>,
    stderr: String,
}

fn pgg<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_pgg")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        report: serde_json::from_slice(&out.stdout).ok(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn result(run: &Run) -> &Value {
    &run.report.as_ref().unwrap_or_else(|| panic!("no report; stderr: {}", run.stderr))["result"]
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn classify_reports_table_rows() {
    let run = pgg(["classify", "110*"]);
    assert_eq!(run.code, 0);
    let classes = result(&run)["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 1);
    assert_eq!(classes[0]["class"], "1^+0^+");
    assert_eq!(classes[0]["verdict"], "always has PNE");
    assert_eq!(classes[0]["complexity"], "PNE always exists, O(1)");

    let run = pgg(["classify", "1010*"]);
    let names: Vec<&str> = result(&run)["classes"].as_array().unwrap().iter().map(|c| c["class"].as_str().unwrap()).collect();
    assert_eq!(names, ["10^+10^*", "(10)^+10^*"]);

    let run = pgg(["classify", "1(1)*"]);
    assert_eq!(result(&run)["unclassified"], true);
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(pgg(["classify", "12*"]).code, 2);
    assert_eq!(pgg(["solve", "--no-such-flag", "x"]).code, 2);
    assert_eq!(pgg(["solve", "/nonexistent/game.pgg"]).code, 2);
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.pgg", "pgg 2\npatterns 10*\nedge 1 3\n");
    let run = pgg(["solve", p(&bad)]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("bad.pgg"), "{}", run.stderr);
    assert_eq!(pgg(["gadget", "nope", "--k", "1"]).code, 2);
    assert_eq!(pgg(["gen", "--model", "gnp", "--n", "3", "--p", "3/2"]).code, 2);
}

#[test]
fn solve_edgeless_game() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "e.pgg", "pgg 4\npatterns 10*\n");
    for method in ["auto", "brute", "backtrack"] {
        let run = pgg(["solve", p(&game), "--method", method]);
        assert_eq!(run.code, 0);
        assert_eq!(result(&run)["exists"], true);
        assert_eq!(result(&run)["profile"], "1111");
    }
    let run = pgg(["solve", p(&game), "--enumerate"]);
    assert_eq!(result(&run)["count"], 1);
    assert_eq!(result(&run)["method"], "brute");
}

#[test]
fn solve_enumerates_triangle_equilibria() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "t.pgg", "pgg 3\npatterns 10*\nedge 1 2\nedge 2 3\nedge 1 3\n");
    let run = pgg(["solve", p(&game), "--enumerate"]);
    assert_eq!(result(&run)["pne"], serde_json::json!(["001", "010", "100"]));
    let run = pgg(["solve", p(&game), "--enumerate", "--max-count", "2"]);
    assert_eq!(result(&run)["count"], 2);
    assert_eq!(result(&run)["truncated"], true);
    assert_eq!(pgg(["solve", p(&game), "--enumerate", "--method", "backtrack"]).code, 2);
}

fn compile(dir: &TempDir, sat: &str, k: u64) -> (PathBuf, PathBuf) {
    compile_logged(dir, sat, k).0
}

fn compile_logged(dir: &TempDir, sat: &str, k: u64) -> ((PathBuf, PathBuf), String) {
    let satfile = write(dir, "in.sat", sat);
    let out = dir.path().join("out.pgg");
    let cert = dir.path().join("cert.json");
    let run = pgg(["reduce", p(&satfile), "--k", &k.to_string(), "-o", p(&out), "--cert", p(&cert)]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    ((out, cert), run.stderr)
}

#[test]
fn compiled_all_bottom_clause_has_no_equilibrium() {
    let dir = TempDir::new().unwrap();
    let ((game, _), log) = compile_logged(&dir, "p 1in3 1 1\n0 0 0\n", 1);
    assert!(log.contains("warning"), "unused variable is reported: {log}");
    let run = pgg(["solve", p(&game)]);
    assert_eq!(run.code, 0);
    assert_eq!(result(&run)["exists"], false);
}

#[test]
fn budget_and_capacity_exit_3() {
    let dir = TempDir::new().unwrap();
    let (game, _) = compile(&dir, "p 1in3 1 1\n0 0 0\n", 1);
    let run = pgg(["solve", p(&game), "--budget", "1"]);
    assert_eq!(run.code, 3);
    assert_eq!(result(&run)["exists"], Value::Null);
    assert_eq!(pgg(["solve", p(&game), "--method", "brute"]).code, 3);
    assert_eq!(pgg(["gadget", "equiv", "--k", "2", "--verify", "exact"]).code, 3);
}

#[test]
fn reduce_and_certify_round_trip() {
    let sat = "p 1in3 4 3\n1 2 3\n2 3 4\n1 3 0\n";
    let inst = parse_1in3(sat).unwrap();
    let satisfying = inst.satisfying_assignments();
    assert!(!satisfying.is_empty());
    for k in [1, 2] {
        let dir = TempDir::new().unwrap();
        let (game, cert) = compile(&dir, sat, k);
        for mask in 0u32..16 {
            let sigma: Vec<bool> = (0..4).map(|i| mask >> (3 - i) & 1 == 1).collect();
            let bits: String = sigma.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let run = pgg(["certify", p(&game), "--cert", p(&cert), "--assignment", &bits]);
            assert_eq!(run.code, 0, "{}", run.stderr);
            let r = result(&run);
            assert_eq!(r["valid"], satisfying.contains(&sigma), "k={k} {bits}: {r}");
            if satisfying.contains(&sigma) {
                assert_eq!(r["recovered_assignment"], bits);
                assert_eq!(r["fallback_used"], false);
            }
        }
        assert_eq!(pgg(["certify", p(&game), "--cert", p(&cert), "--assignment", "10"]).code, 2);
    }
}

#[test]
fn certify_rejects_mismatched_certificate() {
    let dir = TempDir::new().unwrap();
    let (_, cert) = compile(&dir, "p 1in3 3 1\n1 2 3\n", 1);
    let other = write(&dir, "other.pgg", "pgg 3\npatterns 1010*\n");
    assert_eq!(pgg(["certify", p(&other), "--cert", p(&cert), "--assignment", "100"]).code, 2);
}

#[test]
fn generated_games_round_trip_and_repeat() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.pgg");
    let b = dir.path().join("b.pgg");
    for out in [&a, &b] {
        let run = pgg(["gen", "--model", "complete-weighted", "--n", "7", "--wmax", "3", "--pattern", "110*", "--pattern", "1010*", "--seed", "9", "-o", p(out)]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        assert_eq!(run.report.as_ref().unwrap()["seeds"]["graph"], 9);
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(write_game(&parse_game(&text).unwrap()), text);

    let edgeless = pgg(["gen", "--model", "gnp", "--n", "4", "--p", "0"]);
    assert_eq!(result(&edgeless)["edges"], 0);
    let complete = pgg(["gen", "--model", "gnp", "--n", "4", "--p", "1"]);
    assert_eq!(result(&complete)["edges"], 6);
}

#[test]
fn payloads_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let game = dir.path().join("g.pgg");
    pgg(["gen", "--model", "gnp", "--n", "18", "--p", "1/4", "--pattern", "10*", "--pattern", "1010*", "--pattern", "(10)*", "--seed", "4", "-o", p(&game)]);
    let runs: Vec<Vec<&str>> = vec![
        vec!["solve", p(&game), "--enumerate"],
        vec!["gadget", "near-or", "--k", "2", "--arity", "3", "--verify", "exact"],
        vec!["gadget", "clause", "--k", "1", "--verify", "exact"],
    ];
    for args in runs {
        let payloads: Vec<(Value, Value)> = ["1", "4"]
            .iter()
            .map(|t| {
                let mut full = vec!["--threads", t];
                full.extend(&args);
                let run = pgg(&full);
                assert_eq!(run.code, 0, "{}", run.stderr);
                let report = run.report.unwrap();
                (report["result"].clone(), report["input_digest"].clone())
            })
            .collect();
        assert_eq!(payloads[0], payloads[1], "{args:?}");
    }
}

#[test]
fn seeded_dynamics_and_congestion_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let game = dir.path().join("g.pgg");
    pgg(["gen", "--model", "gnp", "--n", "30", "--p", "0.2", "--pattern", "10*", "--pattern", "1110*", "--seed", "2", "-o", p(&game)]);
    let dyn_args = ["dynamics", p(&game), "--init", "random", "--schedule", "random", "--seed", "8", "--trace"];
    let first = pgg(dyn_args);
    let second = pgg(dyn_args);
    assert_eq!(result(&first), result(&second));
    let r = result(&first);
    assert_eq!(r["converged"], true);
    assert_eq!(first.report.as_ref().unwrap()["seeds"], serde_json::json!({"init": 8, "schedule": 9}));
    let series: Vec<i64> = r["potential_series"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap()).collect();
    assert!(series.windows(2).all(|w| w[1] < w[0]));
    assert!(r["steps"].as_u64().unwrap() <= r["step_bound"].as_u64().unwrap());

    let cong = ["congestion", p(&game), "--check-samples", "300", "--seed", "5"];
    let a = pgg(cong);
    assert_eq!(result(&a), result(&pgg(cong)));
    assert_eq!(result(&a)["ok"], true);
    assert_eq!(result(&a)["profiles_checked"], 300);
}

#[test]
fn threshold_rules_and_erratum() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.thr", "threshold 2\ntheta 1 3/2\ntheta 2 3/2\na 1 2 1\n");
    let out = dir.path().join("t.pgg");
    let good = pgg(["threshold", p(&t), "-o", p(&out)]);
    assert_eq!(result(&good)["patterns"], serde_json::json!(["110*", "110*"]));
    assert_eq!(result(&good)["mapping_ok"], true);
    assert_eq!(result(&good)["pne"][0]["sides"], serde_json::json!(["in", "in"]));
    assert_eq!(parse_game(&std::fs::read_to_string(&out).unwrap()).unwrap().edges().len(), 1);

    let bad = pgg(["threshold", p(&t), "--k-rule", "floor"]);
    assert_eq!(bad.code, 0);
    assert_eq!(result(&bad)["mapping_ok"], false);
}

#[test]
fn cnf_output_and_gadget_emission() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.pgg", "pgg 3\npatterns 1010*\nedge 1 2\nedge 2 3\n");
    let cnf = dir.path().join("g.cnf");
    let run = pgg(["solve", p(&game), "--cnf-out", p(&cnf)]);
    let text = std::fs::read_to_string(&cnf).unwrap();
    let header = text.lines().find(|l| l.starts_with("p cnf")).unwrap();
    let r = result(&run);
    assert_eq!(header, format!("p cnf {} {}", r["cnf"]["variables"], r["cnf"]["clauses"]));
    assert!(text.contains("c vertex 1 -> var 1"));

    let emitted = dir.path().join("near.pgg");
    let run = pgg(["gadget", "near-or", "--k", "1", "--arity", "2", "--emit", p(&emitted)]);
    assert_eq!(run.code, 0);
    let text = std::fs::read_to_string(&emitted).unwrap();
    let g = parse_game(&text).unwrap();
    assert_eq!(g.n() as u64, result(&run)["vertices"].as_u64().unwrap());
    assert!(text.lines().any(|l| l.contains("operand")));
}
