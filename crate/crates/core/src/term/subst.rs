use std::collections::BTreeMap;
use std::fmt;

use super::{Term, Var};

/// A finite map from variables to terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Var, t: Term) -> Option<Term> {
        self.0.insert(v, t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// `self` followed by `other`: `t.apply(&a.then(&b)) == t.apply(&a).apply(&b)`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Var, Term> = self
            .0
            .iter()
            .map(|(v, t)| (v.clone(), other.apply(t)))
            .collect();
        for (v, t) in &other.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out.retain(|v, t| !matches!(t, Term::Var(w) if w == v));
        Substitution(out)
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} ↦ {t}")?;
        }
        f.write_str("}")
    }
}

/// Finds σ with `pattern·σ == subject`. The domain of σ is the set of
/// variables of `pattern`; variables of `subject` are treated as constants.
pub fn matching(pattern: &Term, subject: &Term) -> Option<Substitution> {
    fn go(p: &Term, s: &Term, sigma: &mut BTreeMap<Var, Term>) -> bool {
        match (p, s) {
            (Term::Var(v), _) => match sigma.get(v) {
                Some(bound) => bound == s,
                None => {
                    sigma.insert(v.clone(), s.clone());
                    true
                }
            },
            (Term::App(f, ps), Term::App(g, ss)) => {
                f == g && ps.iter().zip(ss).all(|(p, s)| go(p, s, sigma))
            }
            (Term::App(..), Term::Var(_)) => false,
        }
    }
    let mut sigma = BTreeMap::new();
    go(pattern, subject, &mut sigma).then_some(Substitution(sigma))
}

/// Most general unifier of `s` and `t`, with occurs check. The returned
/// substitution is idempotent.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut pending = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = pending.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), u) | (u, Term::Var(x)) => {
                if u.contains_var(&x) {
                    return None;
                }
                let single: Substitution = [(x.clone(), u.clone())].into_iter().collect();
                sigma = sigma.then(&single);
                sigma.insert(x, u);
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g {
                    return None;
                }
                pending.extend(xs.into_iter().zip(ys));
            }
        }
    }
    Some(sigma)
}

/// Renames the variables of `terms` to `{prefix}1, {prefix}2, …` in order of
/// first occurrence across the sequence.
pub fn canonical_renaming<'a>(terms: impl IntoIterator<Item = &'a Term>, prefix: &str) -> Substitution {
    let mut sigma = Substitution::new();
    let mut next = 1;
    for t in terms {
        for v in t.vars() {
            if sigma.get(&v).is_none() {
                sigma.insert(v, Term::var(format!("{prefix}{next}")));
                next += 1;
            }
        }
    }
    sigma
}
