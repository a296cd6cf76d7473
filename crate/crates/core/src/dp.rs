//! Coupled dependency tuples and DP problems.

use std::fmt;

use thiserror::Error;

use crate::ptrs::{MultiDist, ProbRule, Ptrs};
use crate::term::{Signature, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("cannot mark {0}: its root is not a defined symbol")]
    NotDefinedRoot(String),
}

/// Replaces the defined root of `t` by its tuple symbol.
pub fn sharp(t: &Term, signature: &Signature) -> Result<Term, DpError> {
    match t {
        Term::App(f, args) if f.is_defined() => {
            let tuple = signature
                .tuple_of(f)
                .ok_or_else(|| DpError::NotDefinedRoot(t.to_string()))?;
            Ok(Term::App(tuple.clone(), args.clone()))
        }
        _ => Err(DpError::NotDefinedRoot(t.to_string())),
    }
}

/// `Com_n(t1#, …, tn#)` for the defined-rooted subterm occurrences `t1 … tn`
/// of `t`, outermost first. The result is not normalized.
pub fn dp_transform(t: &Term, signature: &Signature) -> Term {
    let mut found: Vec<_> = t
        .subterms()
        .into_iter()
        .filter(|(_, s)| s.root().is_some_and(Symbol::is_defined))
        .collect();
    found.sort_by(|a, b| a.0.cmp(&b.0));
    let args: Vec<Term> = found
        .into_iter()
        .map(|(_, s)| sharp(s, signature).expect("root is defined"))
        .collect();
    Term::app(Symbol::compound(args.len()), args)
}

/// Flattens nested compound symbols and sorts the resulting arguments by the
/// canonical term order. Terms without a compound root are returned as is.
pub fn normalize_compound(t: &Term) -> Term {
    fn flatten(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::App(f, args) if f.is_compound() => args.iter().for_each(|a| flatten(a, out)),
            other => out.push(other.clone()),
        }
    }
    if !t.root().is_some_and(Symbol::is_compound) {
        return t.clone();
    }
    let mut args = Vec::new();
    flatten(t, &mut args);
    args.sort();
    Term::app(Symbol::compound(args.len()), args)
}

/// `<l#, l> -> {p1: <d1, r1>, …}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledDt {
    /// 1-based index of the originating rule.
    pub id: usize,
    pub lhs_sharp: Term,
    pub lhs: Term,
    pub rhs: MultiDist<(Term, Term)>,
}

impl CoupledDt {
    /// The rule of the second components.
    pub fn rule(&self) -> ProbRule {
        ProbRule::new(self.lhs.clone(), self.rhs.map(|(_, r)| r.clone()))
    }

    pub fn from_rule(id: usize, rule: &ProbRule, signature: &Signature) -> Result<Self, DpError> {
        Ok(CoupledDt {
            id,
            lhs_sharp: sharp(&rule.lhs, signature)?,
            lhs: rule.lhs.clone(),
            rhs: rule
                .rhs
                .map(|r| (normalize_compound(&dp_transform(r, signature)), r.clone())),
        })
    }
}

impl fmt::Display for CoupledDt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}> -> {{", self.lhs_sharp, self.lhs)?;
        for (i, (p, (d, r))) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: <{d}, {r}>", crate::rational::to_display_string(p))?;
        }
        f.write_str("}")
    }
}

/// A DP problem `(P, S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpProblem {
    pub dts: Vec<CoupledDt>,
    pub rules: Ptrs,
}

impl DpProblem {
    pub fn is_empty(&self) -> bool {
        self.dts.is_empty()
    }

    pub fn signature(&self) -> &Signature {
        self.rules.signature()
    }

    pub fn dt_ids(&self) -> Vec<usize> {
        self.dts.iter().map(|d| d.id).collect()
    }

    pub fn dt(&self, id: usize) -> Option<&CoupledDt> {
        self.dts.iter().find(|d| d.id == id)
    }

    /// The sub-problem keeping only the tuples with the given ids.
    pub fn with_dts(&self, ids: &[usize]) -> DpProblem {
        DpProblem {
            dts: self
                .dts
                .iter()
                .filter(|d| ids.contains(&d.id))
                .cloned()
                .collect(),
            rules: self.rules.clone(),
        }
    }

    /// Structural invariants; empty when the problem is well formed.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        let sig = self.signature();
        for dt in &self.dts {
            match sharp(&dt.lhs, sig) {
                Ok(s) if s == dt.lhs_sharp => {}
                _ => out.push(format!("DT {}: left-hand side is not the marked rule lhs", dt.id)),
            }
            out.extend(dt.rhs.problems().into_iter().map(|m| format!("DT {}: {m}", dt.id)));
            for (_, (d, r)) in dt.rhs.iter() {
                if !d.root().is_some_and(Symbol::is_compound) {
                    out.push(format!("DT {}: {d} is not a compound term", dt.id));
                    continue;
                }
                if normalize_compound(d) != *d {
                    out.push(format!("DT {}: {d} is not normalized", dt.id));
                }
                if normalize_compound(&dp_transform(r, sig)) != *d {
                    out.push(format!("DT {}: {d} is not dp({r})", dt.id));
                }
                for a in d.args() {
                    let nested_tuple = a.subterms().into_iter().any(|(p, s)| {
                        !p.is_root() && s.root().is_some_and(|f| f.is_tuple() || f.is_compound())
                    });
                    if !a.root().is_some_and(Symbol::is_tuple) || nested_tuple {
                        out.push(format!("DT {}: misplaced tuple symbol in {d}", dt.id));
                    }
                }
            }
        }
        out
    }
}

/// `(DT(R), R)`: one coupled tuple per rule.
pub fn dependency_tuples(rules: &Ptrs) -> Result<DpProblem, DpError> {
    let dts = rules
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| CoupledDt::from_rule(i + 1, r, rules.signature()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DpProblem {
        dts,
        rules: rules.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ptrs::{parse, parse_term};
    use crate::rational::ratio;
    use crate::term::SymbolKind;
    use crate::testing;
    use proptest::prelude::*;

    fn sig_div() -> Ptrs {
        parse(testing::R_DIV).unwrap()
    }

    /// Parses with tuple symbols written as `name#`-free uppercase names and
    /// `Com_n` as compound symbols.
    fn dt_term(s: &str, sig: &Signature, vars: &[&str]) -> Term {
        let t = parse_term(s, sig, vars).unwrap();
        t.map_symbols(&|f| {
            if f.name().starts_with("Com_") {
                Symbol::compound(f.arity())
            } else if let Some(tuple) = sig.tuple_symbols().find(|t| t.name() == f.name() && t.arity() == f.arity()) {
                tuple.clone()
            } else {
                f.clone()
            }
        })
    }

    #[test]
    fn sharp_examples() {
        let rw = parse(testing::R_RW).unwrap();
        let g = parse_term("g(x)", rw.signature(), &["x"]).unwrap();
        let gs = sharp(&g, rw.signature()).unwrap();
        assert_eq!(gs.to_string(), "G(x)");
        assert_eq!(gs.root().unwrap().kind(), SymbolKind::Tuple);

        let div = sig_div();
        let m = parse_term("minus(x, y)", div.signature(), &["x", "y"]).unwrap();
        assert_eq!(sharp(&m, div.signature()).unwrap().to_string(), "M(x, y)");
        let o = parse_term("O", div.signature(), &[]).unwrap();
        assert!(matches!(sharp(&o, div.signature()), Err(DpError::NotDefinedRoot(_))));
    }

    #[test]
    fn dp_transform_examples() {
        let div = sig_div();
        let t = parse_term("s(div(minus(x,y), s(y)))", div.signature(), &["x", "y"]).unwrap();
        assert_eq!(
            dp_transform(&t, div.signature()).to_string(),
            "Com_2(D(minus(x, y), s(y)), M(x, y))"
        );
        let x = Term::var("x");
        assert_eq!(dp_transform(&x, div.signature()).to_string(), "Com_0");

        let rw = parse(testing::R_RW).unwrap();
        let t = parse_term("g(g(x))", rw.signature(), &["x"]).unwrap();
        assert_eq!(dp_transform(&t, rw.signature()).to_string(), "Com_2(G(g(x)), G(x))");
    }

    #[test]
    fn normalize_examples() {
        let sig = Signature::new([("g", 1)], []);
        let t = dt_term("Com_2(Com_1(x), Com_2(x, y))", &sig, &["x", "y"]);
        assert_eq!(normalize_compound(&t).to_string(), "Com_3(x, x, y)");
        let t = dt_term("Com_1(G(x))", &sig, &["x"]);
        assert_eq!(normalize_compound(&t), t);
        let t = dt_term("Com_2(Com_0, Com_0)", &sig, &[]);
        assert_eq!(normalize_compound(&t).to_string(), "Com_0");
    }

    #[test]
    fn dependency_tuples_of_ra() {
        let ra = parse("(VAR x) (RULES a -> {1/2: s(b1), 1/2: s(b2)} f(x) -> {1: x} b1 -> {1: O} b2 -> {1: O})").unwrap();
        let p = dependency_tuples(&ra).unwrap();
        assert_eq!(
            p.dts[0].to_string(),
            "<A, a> -> {1/2: <Com_1(B1), s(b1)>, 1/2: <Com_1(B2), s(b2)>}"
        );
    }

    #[test]
    fn dependency_tuples_of_div() {
        let div = sig_div();
        let p = dependency_tuples(&div).unwrap();
        let shown: Vec<String> = p.dts.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            vec![
                "<M(x1, O), minus(x1, O)> -> {1: <Com_0, x1>}",
                "<M(s(x1), s(x2)), minus(s(x1), s(x2))> -> {1: <Com_1(M(x1, x2)), minus(x1, x2)>}",
                "<D(O, s(x1)), div(O, s(x1))> -> {1: <Com_0, O>}",
                "<D(s(x1), s(x2)), div(s(x1), s(x2))> -> {1/2: <Com_1(D(s(x1), s(x2))), div(s(x1), s(x2))>, \
                 1/2: <Com_2(D(minus(x1, x2), s(x2)), M(x1, x2)), s(div(minus(x1, x2), s(x2)))>}",
            ]
        );
        assert!(p.check_invariants().is_empty());
    }

    #[test]
    fn dependency_tuples_of_rw_match_up_to_normalization() {
        let rw = parse(testing::R_RW).unwrap();
        let p = dependency_tuples(&rw).unwrap();
        let sig = rw.signature();
        let dt = &p.dts[0];
        assert_eq!(dt.lhs_sharp, dt_term("G(x1)", sig, &["x1"]));
        let expected_d2 = normalize_compound(&dt_term("Com_2(G(g(x1)), G(x1))", sig, &["x1"]));
        assert_eq!(dt.rhs.entries()[0].0, ratio(1, 2));
        assert_eq!(dt.rhs.entries()[0].1 .0.to_string(), "Com_0");
        assert_eq!(dt.rhs.entries()[1].1 .0, expected_d2);
        assert_eq!(dt.rhs.entries()[1].1 .1.to_string(), "g(g(x1))");
    }

    #[test]
    fn dependency_tuples_of_incompl() {
        let r = parse(testing::R_INCOMPL).unwrap();
        let shown: Vec<String> = dependency_tuples(&r).unwrap().dts.iter().map(ToString::to_string).collect();
        assert_eq!(
            shown,
            vec![
                "<G, g> -> {5/8: <Com_2(F(g), G), f(g)>, 3/8: <Com_0, stop>}",
                "<G, g> -> {1: <Com_0, b>}",
                "<F(b), f(b)> -> {1: <Com_1(G), g>}",
            ]
        );
    }

    #[test]
    fn branch_probabilities_are_copied() {
        for src in testing::ALL_NAMED {
            let r = parse(src).unwrap();
            let p = dependency_tuples(&r).unwrap();
            for (rule, dt) in r.rules().iter().zip(&p.dts) {
                let rp: Vec<_> = rule.rhs.iter().map(|(p, _)| p.clone()).collect();
                let dp: Vec<_> = dt.rhs.iter().map(|(p, _)| p.clone()).collect();
                assert_eq!(rp, dp);
                assert_eq!(dt.rule(), *rule);
            }
            assert!(p.check_invariants().is_empty());
        }
    }

    fn sig_small() -> Signature {
        Signature::new([("f", 2), ("g", 1)], [("s", 1), ("O", 0)])
    }

    fn arb_base_term() -> impl Strategy<Value = Term> {
        let sig = sig_small();
        let leaf = prop_oneof![
            Just(Term::var("x")),
            Just(Term::var("y")),
            Just(Term::constant(sig.classify("O", 0))),
        ];
        leaf.prop_recursive(4, 16, 2, move |inner| {
            let s = sig_small();
            let (f, g, succ) = (s.classify("f", 2), s.classify("g", 1), s.classify("s", 1));
            prop_oneof![
                inner.clone().prop_map(move |t| Term::app(succ.clone(), vec![t])),
                inner.clone().prop_map(move |t| Term::app(g.clone(), vec![t])),
                (inner.clone(), inner).prop_map(move |(a, b)| Term::app(f.clone(), vec![a, b])),
            ]
        })
    }

    /// Random nesting of compound symbols over marked terms.
    fn arb_compound() -> impl Strategy<Value = Term> {
        let leaf = arb_base_term().prop_filter_map("needs defined root", |t| {
            let sig = sig_small();
            sharp(&t, &sig).ok()
        });
        let leaf = prop_oneof![leaf, Just(Term::var("z"))];
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop::collection::vec(inner, 0..4).prop_map(|args| Term::app(Symbol::compound(args.len()), args))
        })
        .prop_map(|t| {
            if t.root().is_some_and(Symbol::is_compound) {
                t
            } else {
                Term::app(Symbol::compound(1), vec![t])
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn normalization_is_idempotent_and_order_blind(t in arb_compound(), seed in any::<u64>()) {
            let n = normalize_compound(&t);
            prop_assert_eq!(normalize_compound(&n), n.clone());
            for a in n.args() {
                prop_assert!(!a.root().is_some_and(Symbol::is_compound));
            }
            // permute the flat arguments
            let mut args = n.args().to_vec();
            let len = args.len();
            if len > 1 {
                let mut state = seed;
                for i in (1..len).rev() {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let j = (state >> 33) as usize % (i + 1);
                    args.swap(i, j);
                }
            }
            let permuted = Term::app(Symbol::compound(len), args);
            prop_assert_eq!(normalize_compound(&permuted), n);
        }

        #[test]
        fn dp_counts_defined_occurrences(t in arb_base_term()) {
            let sig = sig_small();
            let expected = t.subterms().iter().filter(|(_, s)| s.root().is_some_and(Symbol::is_defined)).count();
            let d = dp_transform(&t, &sig);
            prop_assert_eq!(d.args().len(), expected);
            prop_assert_eq!(normalize_compound(&d).args().len(), expected);
        }
    }
}
