//! Proof search: the dependency tuple route with graph and reduction pair
//! processors, and the direct criterion.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::depgraph::{build_graph, EdgeEstimation};
use crate::dp::{dependency_tuples, DpError, DpProblem};
use crate::poly::{check_direct, check_rpp, PolyInterp};
use crate::ptrs::Ptrs;
use crate::synth::{synthesize_direct, synthesize_rpp, SearchBudget, SearchOutcome, TemplateShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    /// Dependency tuples first, then the direct criterion.
    #[default]
    Auto,
    Dp,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub technique: Technique,
    pub max_coeff: u32,
    pub full_multilinear: bool,
    pub timeout_ms: u64,
    pub edge_estimation: EdgeEstimation,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            technique: Technique::Auto,
            max_coeff: 4,
            full_multilinear: false,
            timeout_ms: 8000,
            edge_estimation: EdgeEstimation::CapRen,
        }
    }
}

impl ProverConfig {
    fn budget(&self, deadline: Instant) -> SearchBudget {
        SearchBudget {
            max_coeff: self.max_coeff,
            shape: if self.full_multilinear {
                TemplateShape::FullMultilinear
            } else {
                TemplateShape::Linear
            },
            deadline: Some(deadline),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "MAYBE")]
    Maybe,
    #[serde(rename = "iAST")]
    Iast,
    #[serde(rename = "AST")]
    Ast,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ast => "AST",
            Verdict::Iast => "iAST",
            Verdict::Maybe => "MAYBE",
        })
    }
}

/// Why a search came back empty-handed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaybeReason {
    /// The time budget ran out.
    BudgetExhausted,
    /// Every template instance up to the coefficient bound was rejected.
    TemplateSpaceExhausted,
}

impl fmt::Display for MaybeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaybeReason::BudgetExhausted => "budget exhausted",
            MaybeReason::TemplateSpaceExhausted => "template space exhausted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    ChainCriterion,
    DgProcessor,
    RpProcessor,
    DirectPoly,
    TrivialEmpty,
    // reserved; never produced
    RuleRemoval,
    TermRemoval,
    ProbabilityOne,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::ChainCriterion => "dependency tuples",
            Step::DgProcessor => "dependency graph",
            Step::RpProcessor => "reduction pair",
            Step::DirectPoly => "direct polynomial interpretation",
            Step::TrivialEmpty => "empty problem",
            Step::RuleRemoval => "rule removal",
            Step::TermRemoval => "term removal",
            Step::ProbabilityOne => "probability one",
        })
    }
}

/// DT ids and 1-based rule indices of a DP problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub dts: Vec<usize>,
    pub rules: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    None,
    Graph {
        estimation: EdgeEstimation,
        edges: Vec<(usize, usize)>,
        sccs: Vec<Vec<usize>>,
    },
    ReductionPair {
        interpretation: PolyInterp,
        strict: Vec<usize>,
    },
    Direct {
        interpretation: PolyInterp,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum NodeStatus {
    Closed,
    Open(MaybeReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofNode {
    pub step: Step,
    pub problem: Snapshot,
    pub certificate: Certificate,
    pub status: NodeStatus,
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    /// Every leaf is closed.
    pub fn is_complete(&self) -> bool {
        match self.status {
            NodeStatus::Open(_) => false,
            NodeStatus::Closed => self.children.iter().all(ProofNode::is_complete),
        }
    }

    fn open_reasons(&self, out: &mut Vec<MaybeReason>) {
        if let NodeStatus::Open(r) = self.status {
            out.push(r);
        }
        self.children.iter().for_each(|c| c.open_reasons(out));
    }
}

/// Result of [`prove`]. The dependency tuple route and the direct route are
/// kept as separate trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub verdict: Verdict,
    pub reason: Option<MaybeReason>,
    /// Rendered tuples, for reading the proof.
    pub dependency_tuples: Vec<String>,
    pub dp: Option<ProofNode>,
    pub direct: Option<ProofNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    #[error(transparent)]
    Dp(#[from] DpError),
}

struct Prover<'a> {
    rules: &'a Ptrs,
    config: &'a ProverConfig,
}

fn all_rules(r: &Ptrs) -> Vec<usize> {
    (1..=r.len()).collect()
}

impl Prover<'_> {
    fn snapshot(&self, p: &DpProblem) -> Snapshot {
        Snapshot {
            dts: p.dt_ids(),
            rules: all_rules(self.rules),
        }
    }

    fn trivial(&self, p: &DpProblem) -> ProofNode {
        ProofNode {
            step: Step::TrivialEmpty,
            problem: self.snapshot(p),
            certificate: Certificate::None,
            status: NodeStatus::Closed,
            children: vec![],
        }
    }

    /// Graph processor, then one reduction pair attempt per SCC.
    fn graph_step(&self, p: &DpProblem, deadline: Instant) -> ProofNode {
        let graph = build_graph(p, self.config.edge_estimation);
        let sccs = graph.sccs();
        let children = if sccs.is_empty() {
            vec![self.trivial(&p.with_dts(&[]))]
        } else {
            sccs.iter().map(|ids| self.rp_step(&p.with_dts(ids), deadline)).collect()
        };
        ProofNode {
            step: Step::DgProcessor,
            problem: self.snapshot(p),
            certificate: Certificate::Graph {
                estimation: self.config.edge_estimation,
                edges: graph.edges.into_iter().collect(),
                sccs,
            },
            status: NodeStatus::Closed,
            children,
        }
    }

    fn rp_step(&self, p: &DpProblem, deadline: Instant) -> ProofNode {
        let (outcome, _) = synthesize_rpp(p, &self.config.budget(deadline));
        let open = |reason| ProofNode {
            step: Step::RpProcessor,
            problem: self.snapshot(p),
            certificate: Certificate::None,
            status: NodeStatus::Open(reason),
            children: vec![],
        };
        match outcome {
            SearchOutcome::Found(cert) => {
                let rest: Vec<usize> = p
                    .dt_ids()
                    .into_iter()
                    .filter(|id| !cert.strict.contains(id))
                    .collect();
                let rest = p.with_dts(&rest);
                let child = if rest.is_empty() {
                    self.trivial(&rest)
                } else {
                    self.graph_step(&rest, deadline)
                };
                ProofNode {
                    step: Step::RpProcessor,
                    problem: self.snapshot(p),
                    certificate: Certificate::ReductionPair {
                        interpretation: cert.interp,
                        strict: cert.strict.into_iter().collect(),
                    },
                    status: NodeStatus::Closed,
                    children: vec![child],
                }
            }
            SearchOutcome::Exhausted => open(MaybeReason::TemplateSpaceExhausted),
            SearchOutcome::Timeout => open(MaybeReason::BudgetExhausted),
        }
    }

    fn dp_route(&self, deadline: Instant) -> Result<ProofNode, ProveError> {
        let p = dependency_tuples(self.rules)?;
        let child = if p.is_empty() {
            self.trivial(&p)
        } else {
            self.graph_step(&p, deadline)
        };
        Ok(ProofNode {
            step: Step::ChainCriterion,
            problem: self.snapshot(&p),
            certificate: Certificate::None,
            status: NodeStatus::Closed,
            children: vec![child],
        })
    }

    fn direct_route(&self, deadline: Instant) -> ProofNode {
        let (outcome, _) = synthesize_direct(self.rules, &self.config.budget(deadline));
        let (certificate, status) = match outcome {
            SearchOutcome::Found(interp) => (
                Certificate::Direct {
                    interpretation: interp,
                },
                NodeStatus::Closed,
            ),
            SearchOutcome::Exhausted => (Certificate::None, NodeStatus::Open(MaybeReason::TemplateSpaceExhausted)),
            SearchOutcome::Timeout => (Certificate::None, NodeStatus::Open(MaybeReason::BudgetExhausted)),
        };
        ProofNode {
            step: Step::DirectPoly,
            problem: Snapshot {
                dts: vec![],
                rules: all_rules(self.rules),
            },
            certificate,
            status,
            children: vec![],
        }
    }
}

/// Verdict of the two routes, and the reason if neither succeeded.
fn conclude(dp: Option<&ProofNode>, direct: Option<&ProofNode>) -> (Verdict, Option<MaybeReason>) {
    if direct.is_some_and(ProofNode::is_complete) {
        return (Verdict::Ast, None);
    }
    if dp.is_some_and(ProofNode::is_complete) {
        return (Verdict::Iast, None);
    }
    let mut reasons = Vec::new();
    dp.into_iter().chain(direct).for_each(|n| n.open_reasons(&mut reasons));
    let reason = if reasons.contains(&MaybeReason::BudgetExhausted) {
        MaybeReason::BudgetExhausted
    } else {
        MaybeReason::TemplateSpaceExhausted
    };
    (Verdict::Maybe, Some(reason))
}

/// Tries to prove `rules` AST or iAST. The DP route gets 70% of the time
/// budget in auto mode; the direct attempt may use whatever is left.
pub fn prove(rules: &Ptrs, config: &ProverConfig) -> Result<Proof, ProveError> {
    let start = Instant::now();
    let total = Duration::from_millis(config.timeout_ms);
    let end = start + total;
    let prover = Prover { rules, config };
    let (dp, direct) = match config.technique {
        Technique::Dp => (Some(prover.dp_route(end)?), None),
        Technique::Direct => (None, Some(prover.direct_route(end))),
        Technique::Auto => {
            let dp = prover.dp_route(start + total.mul_f64(0.7))?;
            (Some(dp), Some(prover.direct_route(end)))
        }
    };
    let (verdict, reason) = conclude(dp.as_ref(), direct.as_ref());
    let dependency_tuples = dependency_tuples(rules)?
        .dts
        .iter()
        .map(ToString::to_string)
        .collect();
    Ok(Proof {
        verdict,
        reason,
        dependency_tuples,
        dp,
        direct,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid proof: {0}")]
pub struct ProofCheckError(pub String);

fn fail<T>(msg: impl Into<String>) -> Result<T, ProofCheckError> {
    Err(ProofCheckError(msg.into()))
}

struct Checker<'a> {
    rules: &'a Ptrs,
    all: DpProblem,
}

impl Checker<'_> {
    fn problem(&self, s: &Snapshot) -> Result<DpProblem, ProofCheckError> {
        if s.rules != all_rules(self.rules) {
            return fail("rule sets other than R are never produced");
        }
        if let Some(id) = s.dts.iter().find(|id| self.all.dt(**id).is_none()) {
            return fail(format!("unknown DT {id}"));
        }
        let sorted: BTreeSet<usize> = s.dts.iter().copied().collect();
        if sorted.len() != s.dts.len() || !s.dts.windows(2).all(|w| w[0] < w[1]) {
            return fail("DT ids must be strictly increasing");
        }
        Ok(self.all.with_dts(&s.dts))
    }

    fn expect_children(&self, n: &ProofNode, count: usize) -> Result<(), ProofCheckError> {
        if n.children.len() != count {
            return fail(format!("{} node must have {count} children", n.step));
        }
        Ok(())
    }

    /// Checks a node of the DP route whose problem must be `expected`.
    fn node(&self, n: &ProofNode, expected: &[usize]) -> Result<(), ProofCheckError> {
        if n.problem.dts != expected {
            return fail(format!("{} node has problem {:?}, expected {expected:?}", n.step, n.problem.dts));
        }
        let p = self.problem(&n.problem)?;
        match (n.step, &n.certificate, n.status) {
            (Step::TrivialEmpty, Certificate::None, NodeStatus::Closed) => {
                if !p.is_empty() {
                    return fail("empty-problem node with nonempty P");
                }
                self.expect_children(n, 0)
            }
            (Step::DgProcessor, Certificate::Graph { estimation, edges, sccs }, NodeStatus::Closed) => {
                let g = build_graph(&p, *estimation);
                if g.edges.iter().copied().collect::<Vec<_>>() != *edges {
                    return fail("graph edges do not match");
                }
                if g.sccs() != *sccs {
                    return fail("SCC list does not match the graph");
                }
                if sccs.is_empty() {
                    self.expect_children(n, 1)?;
                    return self.node(&n.children[0], &[]);
                }
                self.expect_children(n, sccs.len())?;
                for (c, scc) in n.children.iter().zip(sccs) {
                    if c.step != Step::RpProcessor {
                        return fail("every SCC must be handled by a reduction pair node");
                    }
                    self.node(c, scc)?;
                }
                Ok(())
            }
            (Step::RpProcessor, Certificate::None, NodeStatus::Open(_)) => self.expect_children(n, 0),
            (Step::RpProcessor, Certificate::ReductionPair { interpretation, strict }, NodeStatus::Closed) => {
                let strict_set: BTreeSet<usize> = strict.iter().copied().collect();
                let report = check_rpp(&p, interpretation, &strict_set).map_err(|e| ProofCheckError(e.to_string()))?;
                if !report.holds() {
                    return fail(format!("reduction pair certificate rejected: {}", report.failures().join("; ")));
                }
                self.expect_children(n, 1)?;
                let rest: Vec<usize> = p.dt_ids().into_iter().filter(|id| !strict_set.contains(id)).collect();
                let child = &n.children[0];
                match (rest.is_empty(), child.step) {
                    (true, Step::TrivialEmpty) | (false, Step::DgProcessor) => self.node(child, &rest),
                    _ => fail("unexpected step after a reduction pair"),
                }
            }
            (step, _, _) => fail(format!("{step} node with inconsistent certificate or status")),
        }
    }

    fn dp_root(&self, n: &ProofNode) -> Result<(), ProofCheckError> {
        let all = self.all.dt_ids();
        if n.step != Step::ChainCriterion || n.certificate != Certificate::None || n.status != NodeStatus::Closed {
            return fail("DP route must start with the dependency tuple step");
        }
        if n.problem.dts != all {
            return fail("DP route must start from all dependency tuples");
        }
        self.problem(&n.problem)?;
        self.expect_children(n, 1)?;
        let child = &n.children[0];
        match (all.is_empty(), child.step) {
            (true, Step::TrivialEmpty) | (false, Step::DgProcessor) => self.node(child, &all),
            _ => fail("unexpected step after the dependency tuple step"),
        }
    }

    fn direct(&self, n: &ProofNode) -> Result<(), ProofCheckError> {
        if n.step != Step::DirectPoly || !n.problem.dts.is_empty() || n.problem.rules != all_rules(self.rules) {
            return fail("malformed direct node");
        }
        self.expect_children(n, 0)?;
        match (&n.certificate, n.status) {
            (Certificate::Direct { interpretation }, NodeStatus::Closed) => {
                let report = check_direct(self.rules, interpretation);
                if report.holds() {
                    Ok(())
                } else {
                    fail(format!("direct certificate rejected: {}", report.failures().join("; ")))
                }
            }
            (Certificate::None, NodeStatus::Open(_)) => Ok(()),
            _ => fail("direct node with inconsistent certificate or status"),
        }
    }
}

/// Re-validates every certificate against a freshly computed problem and
/// checks that the verdict is the one the trees support.
pub fn check_proof(rules: &Ptrs, proof: &Proof) -> Result<(), ProofCheckError> {
    let all = dependency_tuples(rules).map_err(|e| ProofCheckError(e.to_string()))?;
    let checker = Checker { rules, all };
    if let Some(n) = &proof.dp {
        checker.dp_root(n)?;
    }
    if let Some(n) = &proof.direct {
        checker.direct(n)?;
    }
    let (verdict, reason) = conclude(proof.dp.as_ref(), proof.direct.as_ref());
    if verdict != proof.verdict || reason != proof.reason {
        return fail(format!("verdict {} is not supported by the proof", proof.verdict));
    }
    Ok(())
}

fn ids(v: &[usize]) -> String {
    format!("{{{}}}", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
}

fn render_node(n: &ProofNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let status = match n.status {
        NodeStatus::Closed => String::new(),
        NodeStatus::Open(r) => format!(" [failed: {r}]"),
    };
    match n.step {
        Step::DirectPoly => {
            let _ = writeln!(out, "{pad}{}{status}", n.step);
        }
        _ => {
            let _ = writeln!(out, "{pad}{} on P = {}{status}", n.step, ids(&n.problem.dts));
        }
    }
    match &n.certificate {
        Certificate::None => {}
        Certificate::Graph { edges, sccs, .. } => {
            let e: Vec<String> = edges.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
            let _ = writeln!(out, "{pad}  edges: {}", if e.is_empty() { "none".into() } else { e.join(", ") });
            let s: Vec<String> = sccs.iter().map(|c| ids(c)).collect();
            let _ = writeln!(out, "{pad}  SCCs: {}", if s.is_empty() { "none".into() } else { s.join(", ") });
        }
        Certificate::ReductionPair { interpretation, strict } => {
            let _ = writeln!(out, "{pad}  removes {}", ids(strict));
            for line in interpretation.to_string().lines() {
                let _ = writeln!(out, "{pad}  {line}");
            }
        }
        Certificate::Direct { interpretation } => {
            for line in interpretation.to_string().lines() {
                let _ = writeln!(out, "{pad}  {line}");
            }
        }
    }
    for c in &n.children {
        render_node(c, depth + 1, out);
    }
}

impl Proof {
    pub fn render_text(&self) -> String {
        let mut out = format!("{}", self.verdict);
        if let Some(r) = self.reason {
            let _ = write!(out, " ({r})");
        }
        out.push('\n');
        if let Some(n) = &self.dp {
            out.push_str("\ndependency tuples:\n");
            for (i, dt) in self.dependency_tuples.iter().enumerate() {
                let _ = writeln!(out, "  {}: {dt}", i + 1);
            }
            out.push('\n');
            render_node(n, 0, &mut out);
        }
        if let Some(n) = &self.direct {
            out.push('\n');
            render_node(n, 0, &mut out);
        }
        out
    }

    /// JSON with a `"schema": 1` field and rationals written as `"n/d"`.
    pub fn render_json(&self) -> String {
        #[derive(Serialize)]
        struct Versioned<'a> {
            schema: u32,
            #[serde(flatten)]
            proof: &'a Proof,
        }
        serde_json::to_string_pretty(&Versioned { schema: 1, proof: self }).expect("proofs serialize")
    }

    pub fn from_json(text: &str) -> Result<Proof, serde_json::Error> {
        #[derive(Deserialize)]
        struct Versioned {
            schema: u32,
            #[serde(flatten)]
            proof: Proof,
        }
        let v: Versioned = serde_json::from_str(text)?;
        if v.schema != 1 {
            return Err(serde::de::Error::custom(format!("unsupported proof schema {}", v.schema)));
        }
        Ok(v.proof)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{formal, Polynomial};
    use crate::ptrs::parse;
    use crate::rational::int;
    use crate::testing;

    fn run(src: &str, technique: Technique) -> (Ptrs, Proof) {
        let r = parse(src).unwrap();
        let config = ProverConfig {
            technique,
            ..Default::default()
        };
        let proof = prove(&r, &config).unwrap();
        (r, proof)
    }

    #[test]
    fn div_is_iast() {
        let (r, proof) = run(testing::R_DIV, Technique::Auto);
        assert_eq!(proof.verdict, Verdict::Iast);
        check_proof(&r, &proof).unwrap();
        let root = proof.dp.as_ref().unwrap();
        assert_eq!(root.step, Step::ChainCriterion);
        let dg = &root.children[0];
        assert_eq!(dg.step, Step::DgProcessor);
        let Certificate::Graph { sccs, .. } = &dg.certificate else {
            panic!()
        };
        assert_eq!(sccs, &vec![vec![2], vec![4]]);
        for rp in &dg.children {
            assert_eq!(rp.step, Step::RpProcessor);
            assert_eq!(rp.children[0].step, Step::TrivialEmpty);
        }
        assert_eq!(
            proof.direct.as_ref().unwrap().status,
            NodeStatus::Open(MaybeReason::TemplateSpaceExhausted)
        );
    }

    #[test]
    fn rw_is_ast() {
        let (r, proof) = run(testing::R_RW, Technique::Direct);
        assert_eq!(proof.verdict, Verdict::Ast);
        check_proof(&r, &proof).unwrap();
        let text = proof.render_text();
        assert!(text.starts_with("AST"));
        assert!(text.contains("Pol(g) = x1 + 1"), "{text}");
    }

    #[test]
    fn incompl_is_ast_with_open_dp_route() {
        let (r, proof) = run(testing::R_INCOMPL, Technique::Auto);
        assert_eq!(proof.verdict, Verdict::Ast);
        assert!(!proof.dp.as_ref().unwrap().is_complete());
        check_proof(&r, &proof).unwrap();

        let (_, dp_only) = run(testing::R_INCOMPL, Technique::Dp);
        assert_eq!(dp_only.verdict, Verdict::Maybe);
        assert_eq!(dp_only.reason, Some(MaybeReason::TemplateSpaceExhausted));
    }

    #[test]
    fn r1_r2_are_iast() {
        for src in [testing::R_1, testing::R_2] {
            let (r, proof) = run(src, Technique::Auto);
            assert_eq!(proof.verdict, Verdict::Iast);
            check_proof(&r, &proof).unwrap();
        }
    }

    #[test]
    fn direct_div_is_maybe() {
        let (r, proof) = run(testing::R_DIV, Technique::Direct);
        assert_eq!(proof.verdict, Verdict::Maybe);
        assert_eq!(proof.reason, Some(MaybeReason::TemplateSpaceExhausted));
        check_proof(&r, &proof).unwrap();
        let json = proof.render_json();
        assert!(json.contains("\"verdict\": \"MAYBE\""));
    }

    #[test]
    fn zero_timeout_is_budget_exhausted() {
        let r = parse(testing::R_DIV).unwrap();
        let config = ProverConfig {
            timeout_ms: 0,
            ..Default::default()
        };
        let proof = prove(&r, &config).unwrap();
        assert_eq!(proof.verdict, Verdict::Maybe);
        assert_eq!(proof.reason, Some(MaybeReason::BudgetExhausted));
        check_proof(&r, &proof).unwrap();
    }

    #[test]
    fn json_round_trip() {
        for src in testing::ALL_NAMED {
            let (r, proof) = run(src, Technique::Auto);
            let json = proof.render_json();
            assert!(json.contains("\"schema\": 1"));
            let back = Proof::from_json(&json).unwrap();
            assert_eq!(back, proof);
            check_proof(&r, &back).unwrap();
        }
        assert!(Proof::from_json("{\"schema\": 2}").is_err());
    }

    #[test]
    fn tampered_proofs_are_rejected() {
        let (r, proof) = run(testing::R_DIV, Technique::Auto);

        // change a coefficient of an RP certificate
        let mut bad = proof.clone();
        let rp = &mut bad.dp.as_mut().unwrap().children[0].children[1];
        let Certificate::ReductionPair { interpretation, .. } = &mut rp.certificate else {
            panic!()
        };
        let s = r.signature().classify("s", 1);
        interpretation.insert(s, Polynomial::var(formal(1)));
        assert!(check_proof(&r, &bad).is_err());

        // drop an SCC
        let mut bad = proof.clone();
        let dg = &mut bad.dp.as_mut().unwrap().children[0];
        if let Certificate::Graph { sccs, .. } = &mut dg.certificate {
            sccs.pop();
        }
        dg.children.pop();
        assert!(check_proof(&r, &bad).is_err());

        // claim AST without a direct certificate
        let mut bad = proof.clone();
        bad.verdict = Verdict::Ast;
        assert!(check_proof(&r, &bad).is_err());

        // a tampered direct certificate
        let (rw, mut p) = run(testing::R_RW, Technique::Direct);
        if let Some(Certificate::Direct { interpretation }) = p.direct.as_mut().map(|n| &mut n.certificate) {
            interpretation.insert(rw.signature().classify("g", 1), Polynomial::constant(int(0)).add(&Polynomial::var(formal(1))));
        }
        assert!(check_proof(&rw, &p).is_err());
    }

    #[test]
    fn larger_budgets_keep_verdicts() {
        for src in testing::ALL_NAMED {
            let r = parse(src).unwrap();
            let mut best = Verdict::Maybe;
            for max_coeff in 1..=5 {
                let config = ProverConfig {
                    max_coeff,
                    ..Default::default()
                };
                let v = prove(&r, &config).unwrap().verdict;
                assert!(v >= best, "{src}: {v} after {best} at {max_coeff}");
                best = v;
            }
        }
    }
}
