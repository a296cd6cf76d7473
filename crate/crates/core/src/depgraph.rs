//! Estimated dependency graphs and the dependency graph processor.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dp::{CoupledDt, DpProblem};
use crate::ptrs::Ptrs;
use crate::term::{canonical_renaming, unify, Symbol, Term};

/// How edges are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeEstimation {
    /// Defined subterms and variables replaced by fresh variables.
    #[default]
    CapRen,
    /// Only defined subterms are replaced; variables stay shared with the
    /// source left-hand side. An edge additionally requires both
    /// instantiated left-hand sides to have normal-form arguments.
    InnermostCap,
}

/// Nodes are DT ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DepGraph {
    pub nodes: Vec<usize>,
    pub edges: BTreeSet<(usize, usize)>,
}

/// Replaces every proper subterm of `t` with a defined root by a distinct
/// fresh variable `z1, z2, …`, and every variable by a fresh one as well.
pub fn cap_ren(t: &Term) -> Term {
    let mut counter = 0;
    cap_with(t, true, &mut counter, true)
}

/// Like [`cap_ren`] but keeps the variables of `t`.
pub fn icap(t: &Term) -> Term {
    let mut counter = 0;
    cap_with(t, false, &mut counter, true)
}

fn cap_with(t: &Term, rename_vars: bool, counter: &mut usize, at_root: bool) -> Term {
    let mut fresh = || {
        *counter += 1;
        Term::var(format!("z{counter}"))
    };
    match t {
        Term::Var(_) if rename_vars => fresh(),
        Term::Var(_) => t.clone(),
        Term::App(f, _) if !at_root && f.is_defined() => fresh(),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| cap_with(a, rename_vars, counter, false)).collect(),
        ),
    }
}

fn args_normal(t: &Term, rules: &Ptrs) -> bool {
    t.args().iter().all(|a| rules.is_normal_form(a))
}

/// Whether the graph has an edge from `from` to `to`.
pub fn has_edge(from: &CoupledDt, to: &CoupledDt, rules: &Ptrs, estimation: EdgeEstimation) -> bool {
    let rename = canonical_renaming([&to.lhs_sharp], "y");
    let target = rename.apply(&to.lhs_sharp);
    from.rhs
        .iter()
        .flat_map(|(_, (d, _))| d.args())
        .filter(|t| t.root().is_some_and(Symbol::is_tuple))
        .any(|t| match estimation {
            EdgeEstimation::CapRen => unify(&cap_ren(t), &target).is_some(),
            EdgeEstimation::InnermostCap => match unify(&icap(t), &target) {
                Some(mu) => {
                    args_normal(&mu.apply(&from.lhs_sharp), rules) && args_normal(&mu.apply(&target), rules)
                }
                None => false,
            },
        })
}

pub fn build_graph(problem: &DpProblem, estimation: EdgeEstimation) -> DepGraph {
    let mut edges = BTreeSet::new();
    for a in &problem.dts {
        for b in &problem.dts {
            if has_edge(a, b, &problem.rules, estimation) {
                edges.insert((a.id, b.id));
            }
        }
    }
    DepGraph {
        nodes: problem.dt_ids(),
        edges,
    }
}

impl DepGraph {
    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((node, 0)..=(node, usize::MAX))
            .map(|&(_, b)| b)
    }

    /// Strongly connected components that contain an edge, each sorted, in
    /// order of their smallest node.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let mut comps: Vec<Vec<usize>> = tarjan(self)
            .into_iter()
            .filter(|c| c.len() > 1 || self.edges.contains(&(c[0], c[0])))
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort();
        comps
    }

    /// One `i -> j` line per edge.
    pub fn to_lines(&self) -> String {
        self.edges.iter().map(|(a, b)| format!("{a} -> {b}\n")).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependency_graph {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  n{n} [label=\"{n}\"];");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  n{a} -> n{b};");
        }
        out.push_str("}\n");
        out
    }
}

fn tarjan(g: &DepGraph) -> Vec<Vec<usize>> {
    struct State<'a> {
        g: &'a DepGraph,
        index: std::collections::HashMap<usize, usize>,
        low: std::collections::HashMap<usize, usize>,
        stack: Vec<usize>,
        on_stack: BTreeSet<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State, v: usize) {
        s.index.insert(v, s.next);
        s.low.insert(v, s.next);
        s.next += 1;
        s.stack.push(v);
        s.on_stack.insert(v);
        let succ: Vec<usize> = s.g.successors(v).collect();
        for w in succ {
            if !s.index.contains_key(&w) {
                visit(s, w);
                let lw = s.low[&w];
                let lv = s.low.get_mut(&v).unwrap();
                *lv = (*lv).min(lw);
            } else if s.on_stack.contains(&w) {
                let iw = s.index[&w];
                let lv = s.low.get_mut(&v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        if s.low[&v] == s.index[&v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack.remove(&w);
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }

    let mut s = State {
        g,
        index: Default::default(),
        low: Default::default(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: Vec::new(),
    };
    for &n in &g.nodes {
        if !s.index.contains_key(&n) {
            visit(&mut s, n);
        }
    }
    s.out
}

/// One sub-problem per SCC, each with the unchanged rule set.
pub fn dg_processor(problem: &DpProblem, estimation: EdgeEstimation) -> Vec<DpProblem> {
    build_graph(problem, estimation)
        .sccs()
        .iter()
        .map(|ids| problem.with_dts(ids))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{dependency_tuples, sharp};
    use crate::ptrs::{parse, parse_term};
    use crate::testing;
    use proptest::prelude::*;

    const BOTH: [EdgeEstimation; 2] = [EdgeEstimation::CapRen, EdgeEstimation::InnermostCap];

    fn edges(src: &str, est: EdgeEstimation) -> Vec<(usize, usize)> {
        let p = dependency_tuples(&parse(src).unwrap()).unwrap();
        build_graph(&p, est).edges.into_iter().collect()
    }

    #[test]
    fn cap_ren_examples() {
        let div = parse(testing::R_DIV).unwrap();
        let sig = div.signature();
        let t = parse_term("div(minus(x,y), s(y))", sig, &["x", "y"]).unwrap();
        assert_eq!(cap_ren(&sharp(&t, sig).unwrap()).to_string(), "D(z1, s(z2))");
        assert_eq!(icap(&sharp(&t, sig).unwrap()).to_string(), "D(z1, s(y))");
        let t = parse_term("minus(x, y)", sig, &["x", "y"]).unwrap();
        assert_eq!(cap_ren(&sharp(&t, sig).unwrap()).to_string(), "M(z1, z2)");

        let inc = parse(testing::R_INCOMPL).unwrap();
        let t = parse_term("f(g)", inc.signature(), &[]).unwrap();
        assert_eq!(cap_ren(&sharp(&t, inc.signature()).unwrap()).to_string(), "F(z1)");
    }

    #[test]
    fn div_graph() {
        for est in BOTH {
            assert_eq!(
                edges(testing::R_DIV, est),
                vec![(2, 1), (2, 2), (4, 1), (4, 2), (4, 3), (4, 4)]
            );
        }
        let p = dependency_tuples(&parse(testing::R_DIV).unwrap()).unwrap();
        let g = build_graph(&p, EdgeEstimation::CapRen);
        assert_eq!(g.sccs(), vec![vec![2], vec![4]]);
        let subs = dg_processor(&p, EdgeEstimation::CapRen);
        assert_eq!(subs.iter().map(DpProblem::dt_ids).collect::<Vec<_>>(), vec![vec![2], vec![4]]);
        assert!(subs.iter().all(|s| s.rules == p.rules));
    }

    #[test]
    fn rw_graph_is_a_self_loop() {
        for est in BOTH {
            assert_eq!(edges(testing::R_RW, est), vec![(1, 1)]);
        }
    }

    #[test]
    fn incompl_graph() {
        for est in BOTH {
            assert_eq!(edges(testing::R_INCOMPL, est), vec![(1, 1), (1, 2), (1, 3), (3, 1), (3, 2)]);
        }
        let p = dependency_tuples(&parse(testing::R_INCOMPL).unwrap()).unwrap();
        assert_eq!(build_graph(&p, EdgeEstimation::CapRen).sccs(), vec![vec![1, 3]]);
    }

    #[test]
    fn innermost_cap_keeps_variables_shared() {
        // shared variable: G(x, x) cannot reach G(O, s(O))
        let src = "(VAR x y) (RULES g(O, s(y)) -> {1: g(y, y)})";
        assert_eq!(edges(src, EdgeEstimation::CapRen), vec![(1, 1)]);
        assert!(edges(src, EdgeEstimation::InnermostCap).is_empty());
    }

    #[test]
    fn empty_problem() {
        let r = parse(testing::R_RW).unwrap();
        let p = DpProblem {
            dts: vec![],
            rules: r,
        };
        let g = build_graph(&p, EdgeEstimation::CapRen);
        assert!(g.nodes.is_empty() && g.edges.is_empty());
        assert!(dg_processor(&p, EdgeEstimation::CapRen).is_empty());
    }

    #[test]
    fn scc_small_graphs() {
        let g = DepGraph {
            nodes: vec![1, 2],
            edges: BTreeSet::new(),
        };
        assert!(g.sccs().is_empty());
        let g = DepGraph {
            nodes: vec![1, 2],
            edges: [(1, 2), (2, 1)].into_iter().collect(),
        };
        assert_eq!(g.sccs(), vec![vec![1, 2]]);
    }

    #[test]
    fn dumps() {
        let p = dependency_tuples(&parse(testing::R_RW).unwrap()).unwrap();
        let g = build_graph(&p, EdgeEstimation::CapRen);
        assert_eq!(g.to_lines(), "1 -> 1\n");
        assert!(g.to_dot().contains("n1 -> n1;"));
    }

    /// All ground terms over the signature up to the given depth.
    fn ground_terms(symbols: &[Symbol], depth: usize) -> Vec<Term> {
        let mut level: Vec<Term> = symbols
            .iter()
            .filter(|f| f.arity() == 0)
            .map(|f| Term::constant(f.clone()))
            .collect();
        for _ in 0..depth {
            let mut next = level.clone();
            for f in symbols.iter().filter(|f| f.arity() > 0) {
                let mut tuples: Vec<Vec<Term>> = vec![vec![]];
                for _ in 0..f.arity() {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|prefix| {
                            level.iter().map(move |t| {
                                let mut v = prefix.clone();
                                v.push(t.clone());
                                v
                            })
                        })
                        .collect();
                }
                next.extend(tuples.into_iter().map(|args| Term::app(f.clone(), args)));
            }
            next.sort();
            next.dedup();
            level = next;
        }
        level
    }

    /// Every ground substitution for `vars` drawn from `pool`.
    fn groundings(vars: &[crate::term::Var], pool: &[Term]) -> Vec<crate::term::Substitution> {
        let mut out = vec![crate::term::Substitution::new()];
        for v in vars {
            out = out
                .into_iter()
                .flat_map(|s| {
                    pool.iter().map(move |t| {
                        let mut s = s.clone();
                        s.insert(v.clone(), t.clone());
                        s
                    })
                })
                .collect();
        }
        out
    }

    /// Ground pairs that really are connected, by brute force.
    fn concrete_edges(src: &str, depth: usize) -> BTreeSet<(usize, usize)> {
        let r = parse(src).unwrap();
        let p = dependency_tuples(&r).unwrap();
        let symbols: Vec<Symbol> = r.signature().symbols().cloned().collect();
        let pool = ground_terms(&symbols, depth);
        let mut found = BTreeSet::new();
        for a in &p.dts {
            for sigma in groundings(&a.lhs.vars(), &pool) {
                let l1 = sigma.apply(&a.lhs_sharp);
                if !l1.args().iter().all(|t| r.is_normal_form(t)) {
                    continue;
                }
                let starts: Vec<Term> = a
                    .rhs
                    .iter()
                    .flat_map(|(_, (d, _))| d.args())
                    .map(|t| sigma.apply(t))
                    .collect();
                // reachable terms in at most 3 innermost steps
                let mut frontier = starts.clone();
                let mut seen: BTreeSet<Term> = starts.into_iter().collect();
                for _ in 0..3 {
                    let mut next = Vec::new();
                    for t in &frontier {
                        for red in r.innermost_redexes(t) {
                            for s in r.rewrite_innermost(t, &red.position, red.rule).unwrap().support() {
                                if seen.insert(s.clone()) {
                                    next.push(s.clone());
                                }
                            }
                        }
                    }
                    frontier = next;
                }
                for b in &p.dts {
                    let hit = seen.iter().any(|t| {
                        crate::term::matching(&b.lhs_sharp, t).is_some()
                            && t.args().iter().all(|a| r.is_normal_form(a))
                    });
                    if hit {
                        found.insert((a.id, b.id));
                    }
                }
            }
        }
        found
    }

    #[test]
    fn estimation_covers_concrete_reachability() {
        let extra = "(VAR x y) (RULES f(s(x), y) -> {1/3: f(x, g(y)), 2/3: h(y)} g(O) -> {1: s(O)} h(s(x)) -> {1: f(x, x)})";
        for src in testing::ALL_NAMED.iter().copied().chain([extra]) {
            let concrete = concrete_edges(src, 2);
            for est in BOTH {
                let estimated: BTreeSet<_> = edges(src, est).into_iter().collect();
                assert!(concrete.is_subset(&estimated), "{src}: {concrete:?} vs {estimated:?}");
            }
        }
    }

    fn arb_graph() -> impl Strategy<Value = DepGraph> {
        (1usize..8).prop_flat_map(|n| {
            prop::collection::btree_set((1..=n, 1..=n), 0..20).prop_map(move |edges| DepGraph {
                nodes: (1..=n).collect(),
                edges,
            })
        })
    }

    fn reaches(g: &DepGraph, a: usize, b: usize) -> bool {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<usize> = g.successors(a).collect();
        while let Some(v) = todo.pop() {
            if v == b {
                return true;
            }
            if seen.insert(v) {
                todo.extend(g.successors(v));
            }
        }
        false
    }

    proptest! {
        #[test]
        fn sccs_are_the_cycle_classes(g in arb_graph()) {
            let comps = g.sccs();
            let on_cycle: BTreeSet<usize> = g.nodes.iter().copied().filter(|&v| reaches(&g, v, v)).collect();
            let covered: BTreeSet<usize> = comps.iter().flatten().copied().collect();
            prop_assert_eq!(covered.len(), comps.iter().map(Vec::len).sum::<usize>());
            prop_assert_eq!(&covered, &on_cycle);
            for c in &comps {
                for &a in c {
                    for &b in c {
                        prop_assert!(reaches(&g, a, b));
                    }
                }
            }
            for (a, b) in &g.edges {
                let ca = comps.iter().position(|c| c.contains(a));
                let cb = comps.iter().position(|c| c.contains(b));
                if ca.is_some() && ca == cb {
                    continue;
                }
                // an edge between different components never closes a cycle
                prop_assert!(!(reaches(&g, *b, *a)));
            }
            prop_assert_eq!(comps.is_empty(), on_cycle.is_empty());
        }
    }
}
