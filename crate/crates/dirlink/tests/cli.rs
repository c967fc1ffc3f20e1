use dirlink::cli::{run, Io, EXIT_INCONCLUSIVE, EXIT_NO, EXIT_USAGE, EXIT_YES};
use std::fs;
use std::path::PathBuf;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn call(args: &[&str], stdin: &str) -> Out {
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("dirlink").chain(args.iter().copied()),
        &mut Io { stdin: &mut input, stdout: &mut out, stderr: &mut err },
    );
    Out { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn scratch(name: &str, text: &str) -> String {
    let dir: PathBuf = std::env::temp_dir().join(format!("dirlink-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

// 1 -> 2 -> 3 and 4 -> 2 -> 5: both pairs must share vertex 2.
const SHARED_MIDDLE: &str = "p dddp 5 2 1\na 1 2\na 2 3\na 4 2\na 2 5\ns 1 1\nt 1 3\ns 2 4\nt 2 5\n";

fn with_congestion(c: usize) -> String {
    SHARED_MIDDLE.replacen("p dddp 5 2 1", &format!("p dddp 5 2 {c}"), 1)
}

#[test]
fn solve_exit_codes_follow_the_answer() {
    let yes = call(&["solve", "--method", "brute"], &with_congestion(2));
    assert_eq!(yes.code, EXIT_YES, "{}", yes.stderr);
    assert!(yes.stdout.contains("status yes"));
    let no = call(&["solve", "--method", "brute"], &with_congestion(1));
    assert_eq!(no.code, EXIT_NO, "{}", no.stderr);
    assert!(no.stdout.contains("status no"));
}

#[test]
fn solve_methods_agree_on_a_small_instance() {
    for method in ["auto", "brute", "dtw", "pipeline"] {
        for (c, want) in [(1, EXIT_NO), (2, EXIT_YES)] {
            let out = call(&["solve", "--method", method], &with_congestion(c));
            // The pipeline only handles congestion two.
            let want = if method == "pipeline" && c != 2 { EXIT_USAGE } else { want };
            assert_eq!(out.code, want, "{method} c={c}: {}{}", out.stdout, out.stderr);
        }
    }
}

#[test]
fn exhausted_budget_is_inconclusive() {
    let big = call(&["gen", "random", "--n", "40", "--p", "0.3", "--pairs", "3", "--seed", "5"], "");
    assert_eq!(big.code, EXIT_YES);
    let out = call(&["solve", "--method", "brute", "--max-nodes", "1"], &big.stdout);
    assert_eq!(out.code, EXIT_INCONCLUSIVE, "{}", out.stdout);
}

#[test]
fn json_output_is_one_document() {
    let out = call(&["--json", "solve", "--method", "brute"], &with_congestion(2));
    let doc: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["status"], "yes");
    assert_eq!(doc["paths"].as_array().unwrap().len(), 2);
}

#[test]
fn generators_are_deterministic() {
    for args in [
        &["gen", "random", "--n", "9", "--seed", "17"][..],
        &["gen", "wall", "--k", "3"],
        &["gen", "grid", "--k", "3"],
        &["gen", "sep-fixture", "--k", "3", "--pairs", "2", "--seed", "4"],
    ] {
        let first = call(args, "");
        assert_eq!(first.code, EXIT_YES, "{args:?}: {}", first.stderr);
        assert_eq!(first.stdout, call(args, "").stdout, "{args:?}");
    }
    let other = call(&["gen", "random", "--n", "9", "--seed", "18"], "");
    assert_ne!(other.stdout, call(&["gen", "random", "--n", "9", "--seed", "17"], "").stdout);
}

#[test]
fn wall_header_counts_vertices() {
    let out = call(&["gen", "wall", "--k", "3"], "");
    assert!(out.stdout.starts_with("p dddp 24 0 1"), "{}", out.stdout);
}

#[test]
fn decomposition_round_trip_through_files() {
    let inst = scratch("cycle.txt", "p dddp 3 1 1\na 1 2\na 2 3\na 3 1\ns 1 1\nt 1 3\n");
    let computed = call(&["dtw", "compute", &inst, "--kmax", "2"], "");
    assert_eq!(computed.code, EXIT_YES, "{}", computed.stderr);
    let dec = scratch("cycle.dec", &computed.stdout);
    let checked = call(&["dtw", "check", &inst, &dec], "");
    assert_eq!(checked.code, EXIT_YES, "{}", checked.stdout);
    assert!(checked.stdout.contains("valid"));
    let w = call(&["dtw", "width", &dec], "");
    assert_eq!(w.code, EXIT_YES);
    assert!(w.stdout.starts_with("width "));
}

#[test]
fn broken_decomposition_is_rejected() {
    let inst = scratch("path.txt", "p dddp 3 1 1\na 1 2\na 2 3\ns 1 1\nt 1 3\n");
    let dec = scratch("missing.dec", "node 0 bag 1 2\n");
    let out = call(&["dtw", "check", &inst, &dec], "");
    assert_eq!(out.code, EXIT_NO, "{}", out.stdout);
}

#[test]
fn reduce_sat_emits_an_instance() {
    let out = call(&["reduce-sat"], "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
    assert_eq!(out.code, EXIT_YES, "{}", out.stderr);
    assert!(out.stdout.starts_with("p dddp 189 5 2"), "{}", out.stdout.lines().next().unwrap());
    let parsed = dirlink::format::parse_instance(&out.stdout).unwrap();
    assert_eq!(parsed.k(), 5);
}

#[test]
fn verify_reduction_checks_witnesses() {
    let sat = call(&["verify-reduction"], "p cnf 2 2\n1 2 -1 0\n-2 -1 2 0\n");
    assert_eq!(sat.code, EXIT_YES, "{}{}", sat.stdout, sat.stderr);
    let unsat = call(&["verify-reduction"], "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n");
    assert_eq!(unsat.code, EXIT_INCONCLUSIVE, "{}", unsat.stdout);
    assert!(unsat.stdout.contains("unsatisfiable"));
}

#[test]
fn switch_check_reports_no_violations() {
    let out = call(&["verify-switch"], "");
    assert_eq!(out.code, EXIT_YES, "{}", out.stdout);
    assert!(out.stdout.contains("0 violations"));
    assert!(out.stdout.contains("complete true"));
}

#[test]
fn normalize_produces_degree_one_terminals() {
    let out = call(&["normalize"], SHARED_MIDDLE);
    assert_eq!(out.code, EXIT_YES, "{}", out.stderr);
    let inst = dirlink::format::parse_instance(&out.stdout).unwrap();
    assert!(inst.is_normal_form());
    assert_eq!(inst.g.n(), 5 + 4);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(call(&["solve", "--bogus"], "").code, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"], "").code, EXIT_USAGE);
    assert_eq!(call(&["solve", "--method", "magic"], "").code, EXIT_USAGE);
}

#[test]
fn malformed_input_reports_a_line() {
    let out = call(&["solve"], "p dddp 2 1 1\na 1 7\n");
    assert_eq!(out.code, EXIT_NO);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);
}
