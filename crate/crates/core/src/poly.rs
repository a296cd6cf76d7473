//! Multilinear polynomials over ℕ-valued variables and polynomial
//! interpretations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dp::DpProblem;
use crate::ptrs::{MultiDist, Ptrs};
use crate::rational::{to_display_string, Rational};
use crate::term::{Symbol, Term, Var};

/// A product of pairwise distinct variables. The empty set is the constant
/// monomial.
pub type Monomial = BTreeSet<Var>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("no interpretation for symbol {0}")]
    MissingSymbol(String),
    #[error("interpretation of {0} is not multilinear")]
    NonMultilinear(String),
    #[error("the set of strictly decreasing tuples must not be empty")]
    EmptyStrictSet,
    #[error("no dependency tuple with id {0}")]
    UnknownTuple(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

/// The `i`-th formal argument variable `x_i` (1-based).
pub fn formal(i: usize) -> Var {
    Var::new(format!("x{i}"))
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_terms([(Monomial::new(), c)])
    }

    pub fn var(v: Var) -> Self {
        Self::from_terms([([v].into_iter().collect(), Rational::one())])
    }

    /// Sums duplicate monomials and drops zero coefficients.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// `x_1 + … + x_n`.
    pub fn sum_of_formals(n: usize) -> Self {
        Self::from_terms((1..=n).map(|i| ([formal(i)].into_iter().collect(), Rational::one())))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::new())
    }

    /// Coefficient of the singleton monomial `v`.
    pub fn linear_coeff(&self, v: &Var) -> Rational {
        self.coeff(&[v.clone()].into_iter().collect())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flatten().cloned().collect()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Self::from_terms(self.terms.iter().map(|(m, d)| (m.clone(), c * d)))
    }

    /// Product, or `None` if some variable would be squared.
    pub fn mul(&self, other: &Polynomial) -> Option<Polynomial> {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if !m1.is_disjoint(m2) {
                    return None;
                }
                out.add_term(m1.union(m2).cloned().collect(), c1 * c2);
            }
        }
        Some(out)
    }

    /// Simultaneously replaces each formal variable `x_i` by `args[i-1]`.
    /// Variables that are not formal arguments are left alone.
    pub fn compose(&self, args: &[Polynomial]) -> Option<Polynomial> {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(c.clone());
            for v in m {
                let image = formal_index(v)
                    .and_then(|i| args.get(i - 1))
                    .cloned()
                    .unwrap_or_else(|| Polynomial::var(v.clone()));
                prod = prod.mul(&image)?;
            }
            out = out.add(&prod);
        }
        Some(out)
    }

    /// Value under a valuation; unmapped variables count as 0.
    pub fn eval(&self, valuation: &BTreeMap<Var, Rational>) -> Rational {
        self.terms
            .iter()
            .map(|(m, c)| {
                m.iter()
                    .map(|v| valuation.get(v).cloned().unwrap_or_else(Rational::zero))
                    .fold(c.clone(), |acc, x| acc * x)
            })
            .sum()
    }

    pub fn coefficients_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }
}

fn formal_index(v: &Var) -> Option<usize> {
    v.name().strip_prefix('x')?.parse().ok().filter(|&i| i > 0)
}

fn fmt_monomial(m: &Monomial) -> String {
    m.iter().map(|v| v.name().to_string()).collect::<Vec<_>>().join("*")
}

/// Higher degree monomials first, the constant last: `2*x1*x2 + x1 + 1`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        for (i, (m, c)) in ordered.into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_empty() {
                f.write_str(&to_display_string(&abs))?;
            } else if abs.is_one() {
                f.write_str(&fmt_monomial(m))?;
            } else {
                write!(f, "{}*{}", to_display_string(&abs), fmt_monomial(m))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    monomial: Vec<String>,
    #[serde(serialize_with = "crate::rational::serialize", deserialize_with = "crate::rational::deserialize")]
    coeff: Rational,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(m, c)| TermRepr {
                monomial: m.iter().map(|v| v.name().to_string()).collect(),
                coeff: c.clone(),
            })
            .collect();
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = Vec::<TermRepr>::deserialize(d)?;
        Ok(Polynomial::from_terms(
            repr.into_iter()
                .map(|t| (t.monomial.into_iter().map(Var::new).collect(), t.coeff)),
        ))
    }
}

/// Every coefficient of `p - q` is nonnegative.
pub fn abs_geq(p: &Polynomial, q: &Polynomial) -> bool {
    p.sub(q).coefficients_nonnegative()
}

/// `p - q` has constant part at least 1 and no negative coefficient.
pub fn abs_gt(p: &Polynomial, q: &Polynomial) -> bool {
    let d = p.sub(q);
    d.coefficients_nonnegative() && d.constant_term() >= Rational::one()
}

/// Maps symbols to polynomials over their formal arguments `x1 … xn`.
/// Compound symbols are always interpreted as the sum of their arguments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyInterp {
    map: BTreeMap<Symbol, Polynomial>,
}

impl PolyInterp {
    pub fn new() -> Self {
        Self::default()
    }

    /// Compound symbols are ignored.
    pub fn insert(&mut self, f: Symbol, p: Polynomial) {
        if !f.is_compound() {
            self.map.insert(f, p);
        }
    }

    pub fn get(&self, f: &Symbol) -> Option<&Polynomial> {
        self.map.get(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Polynomial)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn interpret(&self, t: &Term) -> Result<Polynomial, PolyError> {
        match t {
            Term::Var(v) => Ok(Polynomial::var(v.clone())),
            Term::App(f, args) => {
                let args = args
                    .iter()
                    .map(|a| self.interpret(a))
                    .collect::<Result<Vec<_>, _>>()?;
                if f.is_compound() {
                    return Ok(args.iter().fold(Polynomial::zero(), |acc, p| acc.add(p)));
                }
                let fp = self
                    .map
                    .get(f)
                    .ok_or_else(|| PolyError::MissingSymbol(f.to_string()))?;
                fp.compose(&args)
                    .ok_or_else(|| PolyError::NonMultilinear(t.to_string()))
            }
        }
    }

    /// `Σ p_j · Pol(r_j)`.
    pub fn expected_poly(&self, dist: &MultiDist<Term>) -> Result<Polynomial, PolyError> {
        let mut out = Polynomial::zero();
        for (p, t) in dist.iter() {
            out = out.add(&self.interpret(t)?.scale(p));
        }
        Ok(out)
    }

    /// Symbols whose singleton coefficient of some argument is below 1.
    pub fn strict_monotonicity_failures<'a>(&self, symbols: impl IntoIterator<Item = &'a Symbol>) -> Vec<String> {
        let mut out = Vec::new();
        for f in symbols {
            match self.map.get(f) {
                None => out.push(format!("no interpretation for {f}")),
                Some(p) => {
                    for i in 1..=f.arity() {
                        if p.linear_coeff(&formal(i)) < Rational::one() {
                            out.push(format!("Pol({f}) is not strictly monotonic in x{i}"));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn negative_coefficients(&self) -> Vec<String> {
        self.map
            .iter()
            .filter(|(_, p)| !p.coefficients_nonnegative())
            .map(|(f, _)| format!("Pol({f}) has a negative coefficient"))
            .collect()
    }
}

/// `Pol(f) = p` lines, one per symbol.
impl fmt::Display for PolyInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, p) in &self.map {
            writeln!(f, "Pol({s}) = {p}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct InterpEntry {
    symbol: String,
    arity: usize,
    kind: crate::term::SymbolKind,
    polynomial: Polynomial,
}

impl Serialize for PolyInterp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<InterpEntry> = self
            .map
            .iter()
            .map(|(f, p)| InterpEntry {
                symbol: f.name().to_string(),
                arity: f.arity(),
                kind: f.kind(),
                polynomial: p.clone(),
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyInterp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut out = PolyInterp::new();
        for e in Vec::<InterpEntry>::deserialize(d)? {
            out.insert(Symbol::new(e.symbol, e.arity, e.kind), e.polynomial);
        }
        Ok(out)
    }
}

/// Outcome of checking one rule for the direct criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectRuleCheck {
    /// 1-based.
    pub rule: usize,
    pub lhs: Polynomial,
    pub expected: Polynomial,
    /// 1-based index of the first strictly decreasing branch.
    pub strict_branch: Option<usize>,
    pub expected_decrease: bool,
    pub error: Option<String>,
}

impl DirectRuleCheck {
    pub fn holds(&self) -> bool {
        self.error.is_none() && self.strict_branch.is_some() && self.expected_decrease
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectReport {
    pub monotonicity: Vec<String>,
    pub rules: Vec<DirectRuleCheck>,
}

impl DirectReport {
    pub fn holds(&self) -> bool {
        self.monotonicity.is_empty() && self.rules.iter().all(DirectRuleCheck::holds)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = self.monotonicity.clone();
        for r in &self.rules {
            if let Some(e) = &r.error {
                out.push(format!("rule {}: {e}", r.rule));
                continue;
            }
            if r.strict_branch.is_none() {
                out.push(format!("rule {}: no branch is strictly decreasing", r.rule));
            }
            if !r.expected_decrease {
                out.push(format!(
                    "rule {}: expected value {} is not bounded by {}",
                    r.rule, r.expected, r.lhs
                ));
            }
        }
        out
    }
}

/// Checks the direct criterion: strict monotonicity, a strict branch per
/// rule and weakly decreasing expected value.
pub fn check_direct(rules: &Ptrs, interp: &PolyInterp) -> DirectReport {
    let symbols: BTreeSet<Symbol> = rules
        .rules()
        .iter()
        .flat_map(|r| std::iter::once(&r.lhs).chain(r.rhs.support()))
        .flat_map(Term::symbols)
        .collect();
    let mut monotonicity = interp.strict_monotonicity_failures(&symbols);
    monotonicity.extend(interp.negative_coefficients());
    let checks = rules
        .rules()
        .iter()
        .enumerate()
        .map(|(i, rule)| {
            let result = (|| {
                let lhs = interp.interpret(&rule.lhs)?;
                let expected = interp.expected_poly(&rule.rhs)?;
                let mut strict = None;
                for (j, (_, r)) in rule.rhs.iter().enumerate() {
                    if abs_gt(&lhs, &interp.interpret(r)?) {
                        strict = Some(j + 1);
                        break;
                    }
                }
                Ok::<_, PolyError>((lhs, expected, strict))
            })();
            match result {
                Ok((lhs, expected, strict_branch)) => DirectRuleCheck {
                    rule: i + 1,
                    expected_decrease: abs_geq(&lhs, &expected),
                    lhs,
                    expected,
                    strict_branch,
                    error: None,
                },
                Err(e) => DirectRuleCheck {
                    rule: i + 1,
                    lhs: Polynomial::zero(),
                    expected: Polynomial::zero(),
                    strict_branch: None,
                    expected_decrease: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    DirectReport {
        monotonicity,
        rules: checks,
    }
}

/// Per-tuple result of the reduction pair conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleCheck {
    pub id: usize,
    /// `Pol(l#) ≥ Σ p_j · Pol(d_j)`.
    pub weak: bool,
    /// 1-based index of the first branch that is strictly decreasing on the
    /// tuple side and, when the coupled rule is in S, weakly decreasing on
    /// the rule side.
    pub strict_branch: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RppReport {
    pub interp_problems: Vec<String>,
    /// 1-based rule index and whether its expected value decreases weakly.
    pub rules: Vec<(usize, bool)>,
    pub tuples: Vec<TupleCheck>,
    pub strict: BTreeSet<usize>,
}

impl RppReport {
    pub fn holds(&self) -> bool {
        self.interp_problems.is_empty()
            && self.rules.iter().all(|(_, ok)| *ok)
            && self.tuples.iter().all(|t| t.error.is_none() && t.weak)
            && self
                .strict
                .iter()
                .all(|id| self.tuples.iter().any(|t| t.id == *id && t.strict_branch.is_some()))
    }

    /// Tuples satisfying the strict condition under this interpretation.
    pub fn maximal_strict(&self) -> BTreeSet<usize> {
        self.tuples
            .iter()
            .filter(|t| t.strict_branch.is_some())
            .map(|t| t.id)
            .collect()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = self.interp_problems.clone();
        for (i, ok) in &self.rules {
            if !ok {
                out.push(format!("rule {i}: expected value is not weakly decreasing"));
            }
        }
        for t in &self.tuples {
            if let Some(e) = &t.error {
                out.push(format!("DT {}: {e}", t.id));
            } else if !t.weak {
                out.push(format!("DT {}: expected value is not weakly decreasing", t.id));
            }
            if self.strict.contains(&t.id) && t.strict_branch.is_none() {
                out.push(format!("DT {}: no branch is strictly decreasing", t.id));
            }
        }
        out
    }
}

/// Checks the reduction pair conditions for `strict ⊆ P`.
pub fn check_rpp(problem: &DpProblem, interp: &PolyInterp, strict: &BTreeSet<usize>) -> Result<RppReport, PolyError> {
    if strict.is_empty() {
        return Err(PolyError::EmptyStrictSet);
    }
    if let Some(&id) = strict.iter().find(|&&id| problem.dt(id).is_none()) {
        return Err(PolyError::UnknownTuple(id));
    }
    let mut report = rpp_conditions(problem, interp);
    report.strict = strict.clone();
    Ok(report)
}

/// All three conditions evaluated for every tuple, with an empty strict set.
pub fn rpp_conditions(problem: &DpProblem, interp: &PolyInterp) -> RppReport {
    let rules = problem
        .rules
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let ok = match (interp.interpret(&r.lhs), interp.expected_poly(&r.rhs)) {
                (Ok(l), Ok(e)) => abs_geq(&l, &e),
                _ => false,
            };
            (i + 1, ok)
        })
        .collect();
    let tuples = problem
        .dts
        .iter()
        .map(|dt| {
            let result = (|| {
                let lhs = interp.interpret(&dt.lhs_sharp)?;
                let ds = dt.rhs.map(|(d, _)| d.clone());
                let weak = abs_geq(&lhs, &interp.expected_poly(&ds)?);
                let rule_in_s = problem.rules.contains_rule(&dt.rule());
                let lhs_rule = if rule_in_s {
                    Some(interp.interpret(&dt.lhs)?)
                } else {
                    None
                };
                let mut strict = None;
                for (j, (_, (d, r))) in dt.rhs.iter().enumerate() {
                    if !abs_gt(&lhs, &interp.interpret(d)?) {
                        continue;
                    }
                    if let Some(l) = &lhs_rule {
                        if !abs_geq(l, &interp.interpret(r)?) {
                            continue;
                        }
                    }
                    strict = Some(j + 1);
                    break;
                }
                Ok::<_, PolyError>((weak, strict))
            })();
            match result {
                Ok((weak, strict_branch)) => TupleCheck {
                    id: dt.id,
                    weak,
                    strict_branch,
                    error: None,
                },
                Err(e) => TupleCheck {
                    id: dt.id,
                    weak: false,
                    strict_branch: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    RppReport {
        interp_problems: interp.negative_coefficients(),
        rules,
        tuples,
        strict: BTreeSet::new(),
    }
}
