//! Golden verdicts and consistency checks over the shipped corpus.

use std::path::PathBuf;

use probdp::prover::{check_proof, prove, Proof, ProverConfig, Verdict};
use probdp::ptrs::{parse, parse_term, Ptrs};
use probdp::rational::{ratio, Rational};
use probdp::simulator::estimate_ast;

// a proven system whose estimate falls below this is almost certainly a
// soundness bug, not bad luck
const ALARM: (i64, i64) = (9, 10);
const SAMPLES: usize = 500;
const MAX_STEPS: usize = 10_000;

struct Entry {
    name: String,
    verdict: Verdict,
    start: String,
    rules: Ptrs,
}

fn corpus_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "corpus"].iter().collect()
}

fn golden() -> Vec<Entry> {
    let dir = corpus_dir();
    let text = std::fs::read_to_string(dir.join("expected.golden")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let mut fields = line.split_whitespace();
            let name = fields.next().unwrap().to_string();
            let verdict = fields.next().unwrap();
            let start = fields.collect::<Vec<_>>().join(" ");
            let verdict = match verdict {
                "AST" => Verdict::Ast,
                "iAST" => Verdict::Iast,
                "MAYBE" => Verdict::Maybe,
                v => panic!("bad verdict {v}"),
            };
            let src = std::fs::read_to_string(dir.join(format!("{name}.ptrs"))).unwrap();
            let rules = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
            Entry { name, verdict, start, rules }
        })
        .collect()
}

#[test]
fn every_system_has_a_golden_verdict() {
    let listed: Vec<String> = golden().into_iter().map(|e| e.name).collect();
    let mut files: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "ptrs").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    files.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, files);
    assert!(listed.len() >= 15);
}

#[test]
fn golden_verdicts() {
    for e in golden() {
        let proof = prove(&e.rules, &ProverConfig::default()).unwrap();
        assert_eq!(proof.verdict, e.verdict, "{}:\n{}", e.name, proof.render_text());
    }
}

#[test]
fn proofs_check_and_round_trip() {
    for e in golden() {
        let proof = prove(&e.rules, &ProverConfig::default()).unwrap();
        check_proof(&e.rules, &proof).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        let back = Proof::from_json(&proof.render_json()).unwrap();
        assert_eq!(back.render_json(), proof.render_json(), "{}", e.name);
        check_proof(&e.rules, &back).unwrap();
    }
}

#[test]
fn monte_carlo_agrees_with_proofs() {
    let alarm = ratio(ALARM.0, ALARM.1);
    for e in golden() {
        if e.verdict == Verdict::Maybe {
            continue;
        }
        let start = parse_term(&e.start, e.rules.signature(), &[]).unwrap();
        let est: Rational = estimate_ast(&start, &e.rules, SAMPLES, MAX_STEPS, 2024);
        assert!(
            est >= alarm,
            "{} was proven {} but only {est} of runs from {start} terminated: likely soundness bug",
            e.name,
            e.verdict
        );
    }
}

#[test]
fn non_terminating_variants_stay_unproven() {
    // the MAYBE entries really do not terminate almost surely (the drifting
    // walks stop with probability 1/3 and 1/2); runs are kept short since
    // their terms keep growing
    for e in golden().into_iter().filter(|e| e.verdict == Verdict::Maybe) {
        let start = parse_term(&e.start, e.rules.signature(), &[]).unwrap();
        let est = estimate_ast(&start, &e.rules, 100, 500, 5);
        assert!(est < ratio(3, 4), "{}: {est}", e.name);
    }
}
