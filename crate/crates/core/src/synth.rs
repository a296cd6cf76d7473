//! Bounded search for polynomial interpretations.
//!
//! Templates assign one unknown natural number to every monomial of every
//! symbol's polynomial. Interpreting a term under the templates gives a
//! polynomial in the term variables whose coefficients are polynomials in
//! the unknowns, so every inequation turns into sign conditions on those
//! coefficient polynomials. The search enumerates unknowns depth first,
//! cuts branches whose conditions are already decided false under interval
//! bounds, and verifies every complete candidate with the exact checkers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::dp::DpProblem;
use crate::poly::{check_direct, formal, rpp_conditions, Polynomial, PolyInterp};
use crate::ptrs::Ptrs;
use crate::rational::{int, Rational};
use crate::term::{Symbol, Term, Var};

/// Sorted multiset of unknown ids.
type UMono = Vec<usize>;

/// Polynomial in the unknowns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UPoly(BTreeMap<UMono, Rational>);

impl UPoly {
    fn constant(c: Rational) -> Self {
        let mut p = UPoly::default();
        p.add_term(Vec::new(), c);
        p
    }

    fn unknown(u: usize) -> Self {
        let mut p = UPoly::default();
        p.add_term(vec![u], Rational::one());
        p
    }

    fn add_term(&mut self, m: UMono, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(m.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&m);
        }
    }

    fn add(&mut self, other: &UPoly) {
        for (m, c) in &other.0 {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn scale(&self, c: &Rational) -> UPoly {
        let mut out = UPoly::default();
        for (m, d) in &self.0 {
            out.add_term(m.clone(), c * d);
        }
        out
    }

    fn mul(&self, other: &UPoly) -> UPoly {
        let mut out = UPoly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m: UMono = m1.iter().chain(m2).copied().collect();
                m.sort_unstable();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn unknowns(&self) -> BTreeSet<usize> {
        self.0.keys().flatten().copied().collect()
    }

    fn eval(&self, values: &[u32]) -> Rational {
        self.0
            .iter()
            .map(|(m, c)| m.iter().fold(c.clone(), |acc, &u| acc * int(values[u] as i64)))
            .sum()
    }
}

/// Sorted multiset of term variables.
type TMono = Vec<Var>;

/// Polynomial in the term variables with coefficients in the unknowns.
#[derive(Debug, Clone, Default)]
struct PPoly(BTreeMap<TMono, UPoly>);

impl PPoly {
    fn var(v: Var) -> Self {
        PPoly([(vec![v], UPoly::constant(Rational::one()))].into_iter().collect())
    }

    fn coefficient(u: UPoly) -> Self {
        let mut p = PPoly::default();
        if !u.is_zero() {
            p.0.insert(Vec::new(), u);
        }
        p
    }

    fn add(&mut self, other: &PPoly) {
        for (m, c) in &other.0 {
            let e = self.0.entry(m.clone()).or_default();
            e.add(c);
            if e.is_zero() {
                self.0.remove(m);
            }
        }
    }

    fn scale(&self, c: &Rational) -> PPoly {
        PPoly(
            self.0
                .iter()
                .map(|(m, u)| (m.clone(), u.scale(c)))
                .filter(|(_, u)| !u.is_zero())
                .collect(),
        )
    }

    fn mul(&self, other: &PPoly) -> PPoly {
        let mut out = PPoly::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m: TMono = m1.iter().chain(m2).cloned().collect();
                m.sort();
                out.add(&PPoly([(m, c1.mul(c2))].into_iter().collect()));
            }
        }
        out
    }

    fn sub(&self, other: &PPoly) -> PPoly {
        let mut out = self.clone();
        out.add(&other.scale(&-Rational::one()));
        out
    }

    fn coeff(&self, m: &TMono) -> UPoly {
        self.0.get(m).cloned().unwrap_or_default()
    }
}

fn is_multilinear(m: &TMono) -> bool {
    m.windows(2).all(|w| w[0] != w[1])
}

/// One template coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unknown {
    pub symbol: Symbol,
    /// 1-based argument positions of the monomial; empty for the constant.
    pub monomial: Vec<usize>,
    /// Smallest admissible value.
    pub lower: u32,
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = if self.monomial.is_empty() {
            "1".to_string()
        } else {
            self.monomial.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join("*")
        };
        write!(f, "coefficient of {m} in Pol({})", self.symbol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `p ≥ 0`
    Nonneg,
    /// `p ≥ 1`
    AtLeastOne,
    /// `p = 0`
    Zero,
}

/// A sign condition on a polynomial in the unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub poly: UPoly,
    pub relation: Relation,
    /// `poly` times the lcm of its denominators, with the matching
    /// threshold; `None` if a coefficient does not fit into `i128`.
    scaled: Option<(Vec<(i128, UMono)>, i128)>,
}

impl Atom {
    fn new(poly: UPoly, relation: Relation) -> Self {
        let lcm = poly
            .0
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let threshold = match relation {
            Relation::AtLeastOne => lcm.clone(),
            _ => BigInt::zero(),
        };
        let scaled = (|| {
            let terms = poly
                .0
                .iter()
                .map(|(m, c)| Some(((c.numer() * (&lcm / c.denom())).to_i128()?, m.clone())))
                .collect::<Option<Vec<_>>>()?;
            Some((terms, threshold.to_i128()?))
        })();
        Atom {
            poly,
            relation,
            scaled,
        }
    }

    fn holds(&self, values: &[u32]) -> bool {
        let v = self.poly.eval(values);
        match self.relation {
            Relation::Nonneg => !v.is_negative(),
            Relation::AtLeastOne => v >= Rational::one(),
            Relation::Zero => v.is_zero(),
        }
    }

    fn status(&self, lo: &[u32], hi: &[u32]) -> Tri {
        let Some((terms, threshold)) = &self.scaled else {
            return Tri::Unknown;
        };
        let Some((min, max)) = interval(terms, lo, hi) else {
            return Tri::Unknown;
        };
        match self.relation {
            Relation::Nonneg | Relation::AtLeastOne => {
                if min >= *threshold {
                    Tri::True
                } else if max < *threshold {
                    Tri::False
                } else {
                    Tri::Unknown
                }
            }
            Relation::Zero => {
                if min == 0 && max == 0 {
                    Tri::True
                } else if min > 0 || max < 0 {
                    Tri::False
                } else {
                    Tri::Unknown
                }
            }
        }
    }
}

/// Range of `Σ c·Π u` over the box `lo ≤ u ≤ hi` (all bounds nonnegative).
fn interval(terms: &[(i128, UMono)], lo: &[u32], hi: &[u32]) -> Option<(i128, i128)> {
    let (mut min, mut max) = (0i128, 0i128);
    for (c, m) in terms {
        let mut plo: i128 = 1;
        let mut phi: i128 = 1;
        for &u in m {
            plo = plo.checked_mul(lo[u] as i128)?;
            phi = phi.checked_mul(hi[u] as i128)?;
        }
        let (a, b) = (c.checked_mul(plo)?, c.checked_mul(phi)?);
        min = min.checked_add(a.min(b))?;
        max = max.checked_add(a.max(b))?;
    }
    Some((min, max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Unknown,
}

/// Where a constraint comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    /// Some branch of the rule is strictly decreasing (direct criterion).
    StrictBranch { rule: usize },
    /// Expected value of the rule does not increase (direct criterion).
    RuleExpectation { rule: usize },
    /// Expected value of a rule of S does not increase.
    UsableRule { rule: usize },
    /// Expected value of a tuple does not increase.
    TupleExpectation { dt: usize },
    /// At least one tuple has a strictly decreasing branch whose rule side
    /// is weakly decreasing.
    SomeStrictTuple,
    /// The interpretation of a term contains no squared variable.
    Multilinear { term: String },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::StrictBranch { rule } => write!(f, "rule {rule}: strictly decreasing branch"),
            Origin::RuleExpectation { rule } => write!(f, "rule {rule}: expected value"),
            Origin::UsableRule { rule } => write!(f, "rule {rule} of S: expected value"),
            Origin::TupleExpectation { dt } => write!(f, "DT {dt}: expected value"),
            Origin::SomeStrictTuple => f.write_str("some DT strictly decreasing"),
            Origin::Multilinear { term } => write!(f, "Pol({term}) multilinear"),
        }
    }
}

/// A disjunction of conjunctions of atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub origin: Origin,
    pub clauses: Vec<Vec<Atom>>,
}

impl Constraint {
    fn status(&self, lo: &[u32], hi: &[u32]) -> Tri {
        let mut all_false = true;
        for clause in &self.clauses {
            let mut c = Tri::True;
            for a in clause {
                match a.status(lo, hi) {
                    Tri::False => {
                        c = Tri::False;
                        break;
                    }
                    Tri::Unknown => c = Tri::Unknown,
                    Tri::True => {}
                }
            }
            match c {
                Tri::True => return Tri::True,
                Tri::Unknown => all_false = false,
                Tri::False => {}
            }
        }
        if all_false {
            Tri::False
        } else {
            Tri::Unknown
        }
    }

    fn holds(&self, values: &[u32]) -> bool {
        self.clauses.iter().any(|c| c.iter().all(|a| a.holds(values)))
    }

    fn unknowns(&self) -> BTreeSet<usize> {
        self.clauses.iter().flatten().flat_map(|a| a.poly.unknowns()).collect()
    }
}

/// Template unknowns plus the constraints a valid interpretation satisfies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    pub unknowns: Vec<Unknown>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateShape {
    /// `c0 + c1·x1 + … + cn·xn`
    Linear,
    /// Every multilinear monomial for arities up to 3, linear above.
    FullMultilinear,
}

struct Templates {
    by_symbol: BTreeMap<Symbol, Vec<(Vec<usize>, usize)>>,
    unknowns: Vec<Unknown>,
}

impl Templates {
    fn new(symbols: &[Symbol], shape: TemplateShape, strict_monotone: bool) -> Self {
        let mut by_symbol = BTreeMap::new();
        let mut unknowns = Vec::new();
        for f in symbols {
            let n = f.arity();
            let monomials: Vec<Vec<usize>> = match shape {
                TemplateShape::FullMultilinear if n <= 3 => (0u32..(1 << n))
                    .map(|mask| (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect())
                    .collect(),
                _ => std::iter::once(vec![]).chain((1..=n).map(|i| vec![i])).collect(),
            };
            let mut entries = Vec::new();
            for m in monomials {
                let lower = u32::from(strict_monotone && m.len() == 1);
                entries.push((m.clone(), unknowns.len()));
                unknowns.push(Unknown {
                    symbol: f.clone(),
                    monomial: m,
                    lower,
                });
            }
            by_symbol.insert(f.clone(), entries);
        }
        Templates { by_symbol, unknowns }
    }

    fn interpret(&self, t: &Term) -> PPoly {
        match t {
            Term::Var(v) => PPoly::var(v.clone()),
            Term::App(f, args) => {
                let args: Vec<PPoly> = args.iter().map(|a| self.interpret(a)).collect();
                let mut out = PPoly::default();
                if f.is_compound() {
                    args.iter().for_each(|a| out.add(a));
                    return out;
                }
                for (m, u) in &self.by_symbol[f] {
                    let mut prod = PPoly::coefficient(UPoly::unknown(*u));
                    for &i in m {
                        prod = prod.mul(&args[i - 1]);
                    }
                    out.add(&prod);
                }
                out
            }
        }
    }

    fn expected(&self, dist: impl IntoIterator<Item = (Rational, Term)>) -> PPoly {
        let mut out = PPoly::default();
        for (p, t) in dist {
            out.add(&self.interpret(&t).scale(&p));
        }
        out
    }

    fn concrete(&self, values: &[u32]) -> PolyInterp {
        let mut out = PolyInterp::new();
        for (f, entries) in &self.by_symbol {
            let p = Polynomial::from_terms(entries.iter().map(|(m, u)| {
                (m.iter().map(|&i| formal(i)).collect(), int(values[*u] as i64))
            }));
            out.insert(f.clone(), p);
        }
        out
    }
}

/// Atoms for `p ≥ q` (or `p > q` if `strict`) by absolute positiveness.
fn compare(p: &PPoly, q: &PPoly, strict: bool) -> Vec<Atom> {
    let d = p.sub(q);
    let mut atoms = Vec::new();
    let constant: TMono = Vec::new();
    if strict {
        atoms.push(Atom::new(d.coeff(&constant), Relation::AtLeastOne));
    }
    for (m, c) in &d.0 {
        if (strict && m.is_empty()) || !is_multilinear(m) {
            continue;
        }
        atoms.push(Atom::new(c.clone(), Relation::Nonneg));
    }
    atoms
}

/// Requires the coefficients of squared monomials in `Pol(t)` to vanish.
fn multilinearity(templates: &Templates, terms: &BTreeSet<Term>) -> Vec<Constraint> {
    terms
        .iter()
        .filter_map(|t| {
            let atoms: Vec<Atom> = templates
                .interpret(t)
                .0
                .into_iter()
                .filter(|(m, _)| !is_multilinear(m))
                .map(|(_, c)| Atom::new(c, Relation::Zero))
                .collect();
            (!atoms.is_empty()).then(|| Constraint {
                origin: Origin::Multilinear { term: t.to_string() },
                clauses: vec![atoms],
            })
        })
        .collect()
}

/// Symbols in order of first occurrence.
fn symbols_of<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = Vec::new();
    for t in terms {
        for (_, s) in t.subterms() {
            if let Some(f) = s.root() {
                if !f.is_compound() && !out.contains(f) {
                    out.push(f.clone());
                }
            }
        }
    }
    out
}

fn rule_terms(rules: &Ptrs) -> impl Iterator<Item = &Term> {
    rules
        .rules()
        .iter()
        .flat_map(|r| std::iter::once(&r.lhs).chain(r.rhs.support()))
}

/// Unknowns and constraints of the direct criterion for `rules`.
fn direct_constraints(rules: &Ptrs, shape: TemplateShape) -> (Templates, ConstraintSet) {
    let templates = Templates::new(&symbols_of(rule_terms(rules)), shape, true);
    let mut constraints = Vec::new();
    for (i, rule) in rules.rules().iter().enumerate() {
        let lhs = templates.interpret(&rule.lhs);
        constraints.push(Constraint {
            origin: Origin::StrictBranch { rule: i + 1 },
            clauses: rule
                .rhs
                .support()
                .map(|r| compare(&lhs, &templates.interpret(r), true))
                .collect(),
        });
        let expected = templates.expected(rule.rhs.iter().cloned());
        constraints.push(Constraint {
            origin: Origin::RuleExpectation { rule: i + 1 },
            clauses: vec![compare(&lhs, &expected, false)],
        });
    }
    constraints.extend(multilinearity(&templates, &rule_terms(rules).cloned().collect()));
    let set = ConstraintSet {
        unknowns: templates.unknowns.clone(),
        constraints,
    };
    (templates, set)
}

fn rpp_constraints(problem: &DpProblem, shape: TemplateShape) -> (Templates, ConstraintSet) {
    let tuple_terms: Vec<&Term> = problem
        .dts
        .iter()
        .flat_map(|dt| std::iter::once(&dt.lhs_sharp).chain(dt.rhs.support().map(|(d, _)| d)))
        .collect();
    let symbols = symbols_of(rule_terms(&problem.rules).chain(tuple_terms.iter().copied()));
    let templates = Templates::new(&symbols, shape, false);
    let mut constraints = Vec::new();
    for (i, rule) in problem.rules.rules().iter().enumerate() {
        let lhs = templates.interpret(&rule.lhs);
        let expected = templates.expected(rule.rhs.iter().cloned());
        constraints.push(Constraint {
            origin: Origin::UsableRule { rule: i + 1 },
            clauses: vec![compare(&lhs, &expected, false)],
        });
    }
    let mut strict = Vec::new();
    for dt in &problem.dts {
        let lhs = templates.interpret(&dt.lhs_sharp);
        let expected = templates.expected(dt.rhs.iter().map(|(p, (d, _))| (p.clone(), d.clone())));
        constraints.push(Constraint {
            origin: Origin::TupleExpectation { dt: dt.id },
            clauses: vec![compare(&lhs, &expected, false)],
        });
        let rule_side = problem
            .rules
            .contains_rule(&dt.rule())
            .then(|| templates.interpret(&dt.lhs));
        for (_, (d, r)) in dt.rhs.iter() {
            let mut clause = compare(&lhs, &templates.interpret(d), true);
            if let Some(l) = &rule_side {
                clause.extend(compare(l, &templates.interpret(r), false));
            }
            strict.push(clause);
        }
    }
    constraints.push(Constraint {
        origin: Origin::SomeStrictTuple,
        clauses: strict,
    });
    let all_terms: BTreeSet<Term> = rule_terms(&problem.rules)
        .cloned()
        .chain(tuple_terms.into_iter().cloned())
        .collect();
    constraints.extend(multilinearity(&templates, &all_terms));
    let set = ConstraintSet {
        unknowns: templates.unknowns.clone(),
        constraints,
    };
    (templates, set)
}

/// Parametric constraints of the direct criterion.
pub fn direct_constraint_set(rules: &Ptrs, shape: TemplateShape) -> ConstraintSet {
    direct_constraints(rules, shape).1
}

/// Parametric constraints of the reduction pair processor.
pub fn rpp_constraint_set(problem: &DpProblem, shape: TemplateShape) -> ConstraintSet {
    rpp_constraints(problem, shape).1
}

/// Limits for one search.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    pub max_coeff: u32,
    pub shape: TemplateShape,
    pub deadline: Option<Instant>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_coeff: 4,
            shape: TemplateShape::Linear,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    /// Every candidate up to the maximal coefficient was rejected.
    Exhausted,
    /// The deadline passed first.
    Timeout,
}

impl<T> SearchOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Partial assignments visited.
    pub nodes: u64,
    /// Complete candidates handed to the exact checker.
    pub candidates: u64,
    /// Largest coefficient bound whose space was fully enumerated.
    pub completed_bound: Option<u32>,
}

/// An interpretation for the reduction pair processor together with the
/// maximal set of strictly decreasing tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RppCertificate {
    pub interp: PolyInterp,
    pub strict: BTreeSet<usize>,
}

/// Coefficient bounds tried in turn: 1, 2, 4, … capped at `max`.
pub fn bound_schedule(max: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut b = 1u32;
    while b < max {
        out.push(b);
        b = b.saturating_mul(2);
    }
    out.push(max.max(1));
    out
}

struct Search<'a, F> {
    set: &'a ConstraintSet,
    order: Vec<usize>,
    /// Constraints to re-evaluate after assigning each unknown.
    watch: Vec<Vec<usize>>,
    lo: Vec<u32>,
    hi: Vec<u32>,
    bound: u32,
    deadline: Option<Instant>,
    accept: F,
    stats: SearchStats,
    timed_out: bool,
}

impl<'a, T, F: FnMut(&[u32]) -> Option<T>> Search<'a, F> {
    fn new(set: &'a ConstraintSet, deadline: Option<Instant>, accept: F) -> Self {
        let n = set.unknowns.len();
        let order = variable_order(set);
        let mut position = vec![0; n];
        for (k, &u) in order.iter().enumerate() {
            position[u] = k;
        }
        // a constraint is checked whenever one of its unknowns is assigned
        let mut watch = vec![Vec::new(); n];
        for (ci, c) in set.constraints.iter().enumerate() {
            for u in c.unknowns() {
                watch[u].push(ci);
            }
        }
        Search {
            set,
            order,
            watch,
            lo: vec![0; n],
            hi: vec![0; n],
            bound: 0,
            deadline,
            accept,
            stats: SearchStats::default(),
            timed_out: false,
        }
    }

    fn run(&mut self, bound: u32) -> Option<T> {
        self.bound = bound;
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
            return None;
        }
        for (u, unk) in self.set.unknowns.iter().enumerate() {
            self.lo[u] = unk.lower;
            self.hi[u] = bound.max(unk.lower);
        }
        if self
            .set
            .constraints
            .iter()
            .any(|c| c.status(&self.lo, &self.hi) == Tri::False)
        {
            return None;
        }
        self.dfs(0)
    }

    fn dfs(&mut self, k: usize) -> Option<T> {
        self.stats.nodes += 1;
        if self.stats.nodes.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
        }
        if self.timed_out {
            return None;
        }
        if k == self.order.len() {
            self.stats.candidates += 1;
            let values = self.lo.clone();
            if !self.set.constraints.iter().all(|c| c.holds(&values)) {
                return None;
            }
            return (self.accept)(&values);
        }
        let u = self.order[k];
        let (lower, upper) = (self.set.unknowns[u].lower, self.bound.max(self.set.unknowns[u].lower));
        for v in lower..=upper {
            self.lo[u] = v;
            self.hi[u] = v;
            let consistent = self.watch[u]
                .iter()
                .all(|&ci| self.set.constraints[ci].status(&self.lo, &self.hi) != Tri::False);
            if consistent {
                if let Some(t) = self.dfs(k + 1) {
                    return Some(t);
                }
                if self.timed_out {
                    break;
                }
            }
        }
        self.lo[u] = lower;
        self.hi[u] = upper;
        None
    }
}

/// Unknowns of atoms with few unknowns first, so that small conditions are
/// decided early in the search.
fn variable_order(set: &ConstraintSet) -> Vec<usize> {
    let mut atoms: Vec<BTreeSet<usize>> = set
        .constraints
        .iter()
        .flat_map(|c| c.clauses.iter().flatten())
        .map(|a| a.poly.unknowns())
        .filter(|u| !u.is_empty())
        .collect();
    atoms.sort_by_key(BTreeSet::len);
    let mut order = Vec::new();
    let mut placed = vec![false; set.unknowns.len()];
    for a in atoms {
        for u in a {
            if !placed[u] {
                placed[u] = true;
                order.push(u);
            }
        }
    }
    order.extend((0..set.unknowns.len()).filter(|&u| !placed[u]));
    order
}

fn iterate<T>(
    set: &ConstraintSet,
    budget: &SearchBudget,
    mut accept: impl FnMut(&[u32]) -> Option<T>,
) -> (SearchOutcome<T>, SearchStats) {
    let mut stats = SearchStats::default();
    for bound in bound_schedule(budget.max_coeff) {
        let mut search = Search::new(set, budget.deadline, &mut accept);
        let found = search.run(bound);
        stats.nodes += search.stats.nodes;
        stats.candidates += search.stats.candidates;
        if let Some(t) = found {
            return (SearchOutcome::Found(t), stats);
        }
        if search.timed_out {
            return (SearchOutcome::Timeout, stats);
        }
        stats.completed_bound = Some(bound);
    }
    (SearchOutcome::Exhausted, stats)
}

/// Searches for an interpretation satisfying the direct criterion.
pub fn synthesize_direct(rules: &Ptrs, budget: &SearchBudget) -> (SearchOutcome<PolyInterp>, SearchStats) {
    let (templates, set) = direct_constraints(rules, budget.shape);
    iterate(&set, budget, |values| {
        let interp = templates.concrete(values);
        check_direct(rules, &interp).holds().then_some(interp)
    })
}

/// Searches for an interpretation that removes at least one tuple of a
/// nonempty problem; the certificate carries every tuple it removes.
pub fn synthesize_rpp(problem: &DpProblem, budget: &SearchBudget) -> (SearchOutcome<RppCertificate>, SearchStats) {
    if problem.is_empty() {
        return (SearchOutcome::Exhausted, SearchStats::default());
    }
    let (templates, set) = rpp_constraints(problem, budget.shape);
    iterate(&set, budget, |values| {
        let interp = templates.concrete(values);
        let report = rpp_conditions(problem, &interp);
        let strict = report.maximal_strict();
        if strict.is_empty() {
            return None;
        }
        let report = crate::poly::check_rpp(problem, &interp, &strict).ok()?;
        report.holds().then_some(RppCertificate { interp, strict })
    })
}

fn smt_poly(p: &UPoly) -> String {
    // scale to integers; the relations are invariant under positive scaling
    let lcm = p.0.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let terms: Vec<String> = p
        .0
        .iter()
        .map(|(m, c)| {
            let n = c.numer() * (&lcm / c.denom());
            let coeff = if n.is_negative() {
                format!("(- {})", -n)
            } else {
                n.to_string()
            };
            if m.is_empty() {
                coeff
            } else {
                let factors: Vec<String> = m.iter().map(|u| format!("u{u}")).collect();
                format!("(* {coeff} {})", factors.join(" "))
            }
        })
        .collect();
    match terms.len() {
        0 => "0".to_string(),
        1 => terms.into_iter().next().unwrap(),
        _ => format!("(+ {})", terms.join(" ")),
    }
}

fn smt_atom(a: &Atom) -> String {
    let lcm = a.poly.0.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let p = smt_poly(&a.poly);
    match a.relation {
        Relation::Nonneg => format!("(>= {p} 0)"),
        Relation::AtLeastOne => format!("(>= {p} {lcm})"),
        Relation::Zero => format!("(= {p} 0)"),
    }
}

fn smt_body(set: &ConstraintSet, max_coeff: Option<u32>, out: &mut String) {
    for (i, u) in set.unknowns.iter().enumerate() {
        let _ = writeln!(out, "; u{i}: {u}");
        let _ = writeln!(out, "(declare-const u{i} Int)");
        let _ = writeln!(out, "(assert (>= u{i} {}))", u.lower);
        if let Some(b) = max_coeff {
            let _ = writeln!(out, "(assert (<= u{i} {}))", b.max(u.lower));
        }
    }
    if set.constraints.is_empty() {
        out.push_str("(assert true)\n");
    }
    for c in &set.constraints {
        let clauses: Vec<String> = c
            .clauses
            .iter()
            .map(|cl| match cl.len() {
                0 => "true".to_string(),
                1 => smt_atom(&cl[0]),
                _ => format!("(and {})", cl.iter().map(smt_atom).collect::<Vec<_>>().join(" ")),
            })
            .collect();
        let body = match clauses.len() {
            0 => "false".to_string(),
            1 => clauses.into_iter().next().unwrap(),
            _ => format!("(or {})", clauses.join(" ")),
        };
        let _ = writeln!(out, "; {}", c.origin);
        let _ = writeln!(out, "(assert {body})");
    }
}

/// SMT-LIB 2 script over nonlinear integer arithmetic. Models are
/// interpretations satisfying the constraints; with `max_coeff` every
/// unknown is also bounded from above.
pub fn export_smtlib(set: &ConstraintSet, max_coeff: Option<u32>) -> String {
    let mut out = String::from("(set-logic QF_NIA)\n");
    smt_body(set, max_coeff, &mut out);
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Several independent problems in one script, each in its own
/// `push`/`pop` scope with its own `check-sat`.
pub fn export_smtlib_sections(sections: &[(String, ConstraintSet)], max_coeff: Option<u32>) -> String {
    let mut out = String::from("(set-logic QF_NIA)\n");
    for (title, set) in sections {
        let _ = writeln!(out, "; {title}");
        out.push_str("(push 1)\n");
        smt_body(set, max_coeff, &mut out);
        out.push_str("(check-sat)\n(pop 1)\n");
    }
    out
}
