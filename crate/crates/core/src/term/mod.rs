//! First-order terms over a split signature.
//!
//! Terms are immutable values. A [`Symbol`] carries its kind, so a term
//! built against a [`Signature`] knows which of its function symbols are
//! defined, constructors, tuple symbols or compound symbols.

mod position;
mod signature;
mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use position::Position;
pub use signature::Signature;
pub use subst::{canonical_renaming, matching, unify, Substitution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("position {position} does not address a subterm of {term}")]
    InvalidPosition { position: Position, term: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Defined,
    Constructor,
    Tuple,
    Compound,
}

/// A function symbol. Identity is the triple (name, arity, kind); the
/// derived order compares name first, then arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
    kind: SymbolKind,
}

impl Symbol {
    pub fn new(name: impl AsRef<str>, arity: usize, kind: SymbolKind) -> Self {
        Symbol {
            name: Arc::from(name.as_ref()),
            arity,
            kind,
        }
    }

    pub fn defined(name: impl AsRef<str>, arity: usize) -> Self {
        Self::new(name, arity, SymbolKind::Defined)
    }

    pub fn constructor(name: impl AsRef<str>, arity: usize) -> Self {
        Self::new(name, arity, SymbolKind::Constructor)
    }

    /// The compound symbol `Com_n`.
    pub fn compound(arity: usize) -> Self {
        Self::new(format!("Com_{arity}"), arity, SymbolKind::Compound)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn is_defined(&self) -> bool {
        self.kind == SymbolKind::Defined
    }

    pub fn is_tuple(&self) -> bool {
        self.kind == SymbolKind::Tuple
    }

    pub fn is_compound(&self) -> bool {
        self.kind == SymbolKind::Compound
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A first-order term. Variables order before applications; applications
/// compare by root symbol and then children lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: impl AsRef<str>) -> Self {
        Term::Var(Var::new(name))
    }

    /// Panics if the number of arguments differs from the symbol's arity.
    pub fn app(symbol: Symbol, args: Vec<Term>) -> Self {
        assert_eq!(
            symbol.arity(),
            args.len(),
            "symbol {symbol} applied to {} arguments",
            args.len()
        );
        Term::App(symbol, args)
    }

    pub fn constant(symbol: Symbol) -> Self {
        Self::app(symbol, Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    /// Variables in order of first occurrence (left to right, pre-order).
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut BTreeSet<Var>, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(seen, out)),
        }
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars().into_iter().collect()
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    /// Every symbol occurring in the term.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for (_, t) in self.subterms() {
            if let Term::App(f, _) = t {
                out.insert(f.clone());
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    /// All (position, subterm) pairs in pre-order, left to right.
    pub fn subterms(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_subterms(&mut path, &mut out);
        out
    }

    fn collect_subterms<'a>(&'a self, path: &mut Vec<usize>, out: &mut Vec<(Position, &'a Term)>) {
        out.push((Position::from(path.clone()), self));
        for (i, a) in self.args().iter().enumerate() {
            path.push(i + 1);
            a.collect_subterms(path, out);
            path.pop();
        }
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in pos.indices() {
            cur = match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => &args[i - 1],
                _ => return Err(self.invalid(pos)),
            };
        }
        Ok(cur)
    }

    pub fn replace_at(&self, pos: &Position, replacement: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[usize], replacement: Term) -> Option<Term> {
            let Some((&i, rest)) = path.split_first() else {
                return Some(replacement);
            };
            match t {
                Term::App(f, args) if i >= 1 && i <= args.len() => {
                    // clone the siblings only; the path is rebuilt
                    let child = go(&args[i - 1], rest, replacement)?;
                    let mut new_args = Vec::with_capacity(args.len());
                    new_args.extend_from_slice(&args[..i - 1]);
                    new_args.push(child);
                    new_args.extend_from_slice(&args[i..]);
                    Some(Term::App(f.clone(), new_args))
                }
                _ => None,
            }
        }
        go(self, pos.indices(), replacement).ok_or_else(|| self.invalid(pos))
    }

    fn invalid(&self, pos: &Position) -> TermError {
        TermError::InvalidPosition {
            position: pos.clone(),
            term: self.to_string(),
        }
    }

    pub fn apply(&self, sigma: &Substitution) -> Term {
        sigma.apply(self)
    }

    /// Rebuilds the term with every symbol passed through `f`.
    pub fn map_symbols(&self, f: &impl Fn(&Symbol) -> Symbol) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(g, args) => Term::App(f(g), args.iter().map(|a| a.map_symbols(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{g}"),
            Term::App(g, args) => {
                write!(f, "{g}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
