use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn probdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probdp"))
        .args(args)
        .env_remove("PROBDP_TIMEOUT_MS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("probdp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn prove_div_is_iast() {
    let o = probdp(&["prove", &corpus("div.ptrs")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("iAST"));
}

#[test]
fn prove_rw_direct_is_ast() {
    let o = probdp(&["prove", &corpus("rw.ptrs"), "--technique", "direct"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("AST"));
}

#[test]
fn maybe_exits_one() {
    let o = probdp(&["prove", &corpus("div.ptrs"), "--technique", "direct", "--timeout-ms", "2000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("MAYBE"));
}

#[test]
fn missing_file_exits_two() {
    let o = probdp(&["prove", "missing.ptrs"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_flags_exit_two() {
    for args in [
        vec!["prove", "x.ptrs", "--max-coeff", "0"],
        vec!["prove", "x.ptrs", "--timeout-ms", "0"],
        vec!["prove", "x.ptrs", "--technique", "magic"],
        vec!["frobnicate"],
    ] {
        assert_eq!(probdp(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn invalid_system_exits_two() {
    let path = scratch("bad.ptrs");
    std::fs::write(&path, "(VAR x)\n(RULES\n  f(x) -> {1/2: x}\n)\n").unwrap();
    let o = probdp(&["prove", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn timeout_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_probdp"))
        .args(["prove", &corpus("div.ptrs"), "--technique", "direct", "--max-coeff", "1000", "--full-multilinear"])
        .env("PROBDP_TIMEOUT_MS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("MAYBE (budget exhausted)"), "{}", stdout(&o));
}

#[test]
fn json_is_the_only_stdout() {
    let o = probdp(&["prove", &corpus("div.ptrs"), "--format", "json", "--emit-graph"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).expect("stdout is one JSON document");
    assert_eq!(v["verdict"], "iAST");
    assert_eq!(v["schema"], 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("4 -> 3"));
}

#[test]
fn graph_and_dot_and_smtlib() {
    let dot = scratch("div.dot");
    let smt = scratch("div.smt2");
    let o = probdp(&[
        "prove",
        &corpus("div.ptrs"),
        "--emit-graph",
        "--dot",
        dot.to_str().unwrap(),
        "--emit-smtlib",
        smt.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 -> 1\n2 -> 2\n4 -> 1\n4 -> 2\n4 -> 3\n4 -> 4\n"));
    let dot = std::fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("digraph") && dot.contains("n4 -> n3;"));
    let smt = std::fs::read_to_string(smt).unwrap();
    // direct section plus one per SCC
    assert_eq!(smt.matches("(check-sat)").count(), 3);
}

#[test]
fn proof_round_trip_through_check() {
    let proof = scratch("div.json");
    let o = probdp(&["prove", &corpus("div.ptrs"), "--format", "json"]);
    std::fs::write(&proof, &o.stdout).unwrap();
    let ok = probdp(&["check", &corpus("div.ptrs"), proof.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    let wrong = probdp(&["check", &corpus("rw.ptrs"), proof.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(1));
    let garbage = scratch("garbage.json");
    std::fs::write(&garbage, "{}").unwrap();
    let bad = probdp(&["check", &corpus("div.ptrs"), garbage.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_exact() {
    let o = probdp(&["simulate", &corpus("rw.ptrs"), "--start", "g(O)", "--depth", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("leaf mass 5/8"));
    let o = probdp(&["simulate", &corpus("rw.ptrs"), "--start", "O", "--depth", "0"]);
    assert!(stdout(&o).contains("leaf mass 1 (exhausted)"));
}

#[test]
fn simulate_csv() {
    let csv = scratch("rw.csv");
    let o = probdp(&[
        "simulate",
        &corpus("rw.ptrs"),
        "--start",
        "g(O)",
        "--depth",
        "3",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text, "depth,leaf_mass_num,leaf_mass_den\n0,0,1\n1,1,2\n2,1,2\n3,5,8\n");
}

#[test]
fn simulate_sampling_is_deterministic() {
    let args = ["simulate", &corpus("rw.ptrs"), "--start", "g(O)", "--samples", "2000", "--seed", "7"];
    let a = probdp(&args);
    let b = probdp(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let line = stdout(&a);
    let (k, n) = line
        .strip_prefix("terminated ")
        .and_then(|r| r.split_whitespace().next())
        .and_then(|r| r.split_once('/'))
        .expect("summary line");
    let (k, n): (u32, u32) = (k.parse().unwrap(), n.parse().unwrap());
    assert_eq!(n, 2000);
    assert!(k <= n);
}

#[test]
fn simulate_bad_start_term() {
    for start in ["g(", "g(O))", "1/2"] {
        let o = probdp(&["simulate", &corpus("rw.ptrs"), "--start", start, "--depth", "1"]);
        assert_eq!(o.status.code(), Some(2), "{start}");
    }
}

#[test]
fn prove_output_is_reproducible() {
    let a = probdp(&["prove", &corpus("incompl.ptrs"), "--technique", "dp"]);
    let b = probdp(&["prove", &corpus("incompl.ptrs"), "--technique", "dp"]);
    assert_eq!(a.stdout, b.stdout);
}
