//! Probabilistic term rewrite systems.

mod parse;
mod rewrite;

use std::collections::BTreeSet;
use std::fmt;

use num::One;
use thiserror::Error;

use crate::rational::{is_probability, to_display_string, Rational};
use crate::term::{canonical_renaming, Signature, Symbol, SymbolKind, Term};

pub use parse::{parse, parse_term, parse_unchecked, ParseError};
pub use rewrite::{Redex, RewriteError};

/// A finite multi-distribution: a multiset of (probability, payload) pairs.
/// Duplicate payloads are kept as separate entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiDist<T> {
    entries: Vec<(Rational, T)>,
}

impl<T> MultiDist<T> {
    /// No validation happens here; see [`MultiDist::problems`].
    pub fn new(entries: Vec<(Rational, T)>) -> Self {
        MultiDist { entries }
    }

    pub fn dirac(value: T) -> Self {
        MultiDist {
            entries: vec![(Rational::one(), value)],
        }
    }

    pub fn entries(&self) -> &[(Rational, T)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Rational, T)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|(_, t)| t)
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().map(|(p, _)| p).sum()
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> MultiDist<U> {
        MultiDist {
            entries: self.entries.iter().map(|(p, t)| (p.clone(), f(t))).collect(),
        }
    }

    /// Violations of the multi-distribution conditions, as messages.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.entries.is_empty() {
            out.push("empty distribution".to_string());
            return out;
        }
        for (p, _) in &self.entries {
            if !is_probability(p) {
                out.push(format!("probability {} outside (0, 1]", to_display_string(p)));
            }
        }
        let total = self.total();
        if total != Rational::one() {
            out.push(format!("probabilities sum to {} ≠ 1", to_display_string(&total)));
        }
        out
    }
}

impl<T: fmt::Display> fmt::Display for MultiDist<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, t)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {t}", to_display_string(p))?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbRule {
    pub lhs: Term,
    pub rhs: MultiDist<Term>,
}

impl ProbRule {
    pub fn new(lhs: Term, rhs: MultiDist<Term>) -> Self {
        ProbRule { lhs, rhs }
    }

    /// Renames variables to `x1, x2, …` by first occurrence in the lhs.
    pub fn canonical(&self) -> ProbRule {
        let sigma = canonical_renaming(std::iter::once(&self.lhs).chain(self.rhs.support()), "x");
        ProbRule {
            lhs: sigma.apply(&self.lhs),
            rhs: self.rhs.map(|r| sigma.apply(r)),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.rhs.len() == 1
    }
}

impl fmt::Display for ProbRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// A rule of the non-probabilistic variant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NpRule {
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for NpRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based rule index.
    pub rule: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}: {}", self.rule, self.message)
    }
}

#[derive(Debug, Error)]
pub enum PtrsError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("invalid rewrite system:\n{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

/// A probabilistic TRS. Defined symbols are the roots of left-hand sides;
/// every other symbol is a constructor. Rules are stored canonically
/// renamed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ptrs {
    rules: Vec<ProbRule>,
    signature: Signature,
}

impl Ptrs {
    pub fn new(rules: Vec<ProbRule>) -> Self {
        let defined: BTreeSet<(String, usize)> = rules
            .iter()
            .filter_map(|r| r.lhs.root())
            .map(|f| (f.name().to_string(), f.arity()))
            .collect();
        let mut all: BTreeSet<(String, usize)> = BTreeSet::new();
        for r in &rules {
            for t in std::iter::once(&r.lhs).chain(r.rhs.support()) {
                for f in t.symbols() {
                    if matches!(f.kind(), SymbolKind::Defined | SymbolKind::Constructor) {
                        all.insert((f.name().to_string(), f.arity()));
                    }
                }
            }
        }
        let signature = Signature::new(
            defined.iter().map(|(n, a)| (n.as_str(), *a)),
            all.iter().map(|(n, a)| (n.as_str(), *a)),
        );
        let rules = rules
            .into_iter()
            .map(|r| {
                ProbRule::new(signature.retag(&r.lhs), r.rhs.map(|t| signature.retag(t))).canonical()
            })
            .collect();
        Ptrs { rules, signature }
    }

    pub fn rules(&self) -> &[ProbRule] {
        &self.rules
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Syntactic membership after canonical renaming.
    pub fn contains_rule(&self, rule: &ProbRule) -> bool {
        let rule = rule.canonical();
        self.rules.contains(&rule)
    }

    /// The sub-system with the given 0-based rule indices, sharing this
    /// system's signature.
    pub fn restrict(&self, indices: &[usize]) -> Ptrs {
        Ptrs {
            rules: indices.iter().map(|&i| self.rules[i].clone()).collect(),
            signature: self.signature.clone(),
        }
    }

    /// Empty list iff every rule is well formed and every right-hand side is
    /// a multi-distribution.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (i, rule) in self.rules.iter().enumerate() {
            let mut push = |message: String| out.push(Diagnostic { rule: i + 1, message });
            if rule.lhs.is_var() {
                push("left-hand side is a variable".to_string());
            }
            let lhs_vars = rule.lhs.var_set();
            for r in rule.rhs.support() {
                for v in r.vars() {
                    if !lhs_vars.contains(&v) {
                        push(format!("variable {v} of right-hand side {r} does not occur in the left-hand side"));
                    }
                }
            }
            for m in rule.rhs.problems() {
                push(m);
            }
        }
        out
    }

    /// One ordinary rule per probabilistic branch, duplicates removed.
    pub fn np_variant(&self) -> Vec<NpRule> {
        let mut out: Vec<NpRule> = Vec::new();
        for rule in &self.rules {
            for r in rule.rhs.support() {
                let sigma = canonical_renaming([&rule.lhs, r], "x");
                let np = NpRule {
                    lhs: sigma.apply(&rule.lhs),
                    rhs: sigma.apply(r),
                };
                if !out.contains(&np) {
                    out.push(np);
                }
            }
        }
        out
    }

    pub fn is_defined(&self, f: &Symbol) -> bool {
        self.signature.defined().contains(f)
    }
}

/// Serializes in the input format accepted by [`parse`].
impl fmt::Display for Ptrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut vars = BTreeSet::new();
        for r in &self.rules {
            vars.extend(r.lhs.var_set());
            for t in r.rhs.support() {
                vars.extend(t.var_set());
            }
        }
        f.write_str("(VAR")?;
        for v in &vars {
            write!(f, " {v}")?;
        }
        f.write_str(")\n(RULES\n")?;
        for r in &self.rules {
            writeln!(f, "  {r}")?;
        }
        f.write_str(")\n")
    }
}

impl Default for Ptrs {
    fn default() -> Self {
        Ptrs::new(Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        let rw = parse("(VAR x) (RULES g(x) -> {1/2: x, 1/2: g(g(x))})").unwrap();
        assert!(rw.validate().is_empty());

        let bad = parse_unchecked("(VAR x) (RULES x -> {1: O})").unwrap();
        let d = bad.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("left-hand side is a variable"));

        let bad = parse_unchecked("(VAR x) (RULES g(x) -> {1/3: x, 1/3: O})").unwrap();
        let d = bad.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "probabilities sum to 2/3 ≠ 1");

        let bad = parse_unchecked("(VAR x y) (RULES g(x) -> {1: y})").unwrap();
        assert!(bad.validate()[0].message.contains("does not occur"));

        let bad = parse_unchecked("(VAR x) (RULES g(x) -> {0: x, 1: x})").unwrap();
        assert!(bad.validate()[0].message.contains("outside (0, 1]"));
    }

    #[test]
    fn defined_symbols_are_lhs_roots() {
        let div = parse(crate::testing::R_DIV).unwrap();
        let names: Vec<&str> = div.signature().defined().iter().map(Symbol::name).collect();
        assert_eq!(names, vec!["div", "minus"]);
        let cons: Vec<&str> = div.signature().constructors().iter().map(Symbol::name).collect();
        assert_eq!(cons, vec!["O", "s"]);
    }

    #[test]
    fn np_variant_examples() {
        let rw = parse(crate::testing::R_RW).unwrap();
        let np: Vec<String> = rw.np_variant().iter().map(ToString::to_string).collect();
        assert_eq!(np, vec!["g(x1) -> x1", "g(x1) -> g(g(x1))"]);

        let triv = parse("(VAR) (RULES a -> {1: b})").unwrap();
        assert_eq!(triv.np_variant().len(), 1);
        assert_eq!(triv.np_variant()[0].to_string(), "a -> b");

        let div = parse(crate::testing::R_DIV).unwrap();
        assert_eq!(div.np_variant().len(), 5);
    }

    #[test]
    fn np_variant_size_bounds() {
        for src in crate::testing::ALL_NAMED {
            let r = parse(src).unwrap();
            let n = r.np_variant().len();
            let max: usize = r.rules().iter().map(|rule| rule.rhs.len()).sum();
            assert!(r.len() <= n && n <= max);
        }
    }

    #[test]
    fn duplicate_branches_are_kept() {
        let r = parse("(VAR x) (RULES g(x) -> {1/2: x, 1/2: x})").unwrap();
        assert_eq!(r.rules()[0].rhs.len(), 2);
        assert_eq!(r.np_variant().len(), 1);
    }

    #[test]
    fn contains_rule_modulo_renaming() {
        let r = parse(crate::testing::R_RW).unwrap();
        let other = parse("(VAR y) (RULES g(y) -> {1/2: y, 1/2: g(g(y))})").unwrap();
        assert!(r.contains_rule(&other.rules()[0]));
    }
}
