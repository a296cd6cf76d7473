//! The innermost rewrite relation.

use thiserror::Error;

use super::{MultiDist, Ptrs};
use crate::term::{matching, Position, Term, TermError};

/// An innermost redex: the position and the 0-based index of a rule whose
/// left-hand side matches there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redex {
    pub position: Position,
    pub rule: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rule {rule} does not apply innermost at position {position} of {term}")]
    NotARedex {
        term: String,
        position: Position,
        rule: usize,
    },
    #[error(transparent)]
    Position(#[from] TermError),
}

impl Ptrs {
    /// Whether some rule's left-hand side matches `t` at the root.
    fn matches_at_root(&self, t: &Term) -> bool {
        self.rules.iter().any(|r| matching(&r.lhs, t).is_some())
    }

    pub fn is_normal_form(&self, t: &Term) -> bool {
        t.subterms().into_iter().all(|(_, s)| !self.matches_at_root(s))
    }

    /// All innermost redexes of `t`, ordered by position left to right and
    /// then by rule index.
    pub fn innermost_redexes(&self, t: &Term) -> Vec<Redex> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_redexes(t, &mut path, &mut out);
        out
    }

    /// Returns whether `t` is a normal form.
    fn collect_redexes(&self, t: &Term, path: &mut Vec<usize>, out: &mut Vec<Redex>) -> bool {
        let mut args_normal = true;
        for (i, a) in t.args().iter().enumerate() {
            path.push(i + 1);
            args_normal &= self.collect_redexes(a, path, out);
            path.pop();
        }
        if !args_normal {
            return false;
        }
        let mut normal = true;
        for (k, rule) in self.rules.iter().enumerate() {
            if matching(&rule.lhs, t).is_some() {
                normal = false;
                out.push(Redex {
                    position: Position::from(path.clone()),
                    rule: k,
                });
            }
        }
        normal
    }

    /// Leftmost innermost redex, if any.
    pub fn leftmost_innermost(&self, t: &Term) -> Option<Redex> {
        self.innermost_redexes(t).into_iter().next()
    }

    /// Rewrites `t` at `position` with rule `rule` (0-based), provided this
    /// is an innermost step. The result has one entry per branch of the rule.
    pub fn rewrite_innermost(&self, t: &Term, position: &Position, rule: usize) -> Result<MultiDist<Term>, RewriteError> {
        let not_a_redex = || RewriteError::NotARedex {
            term: t.to_string(),
            position: position.clone(),
            rule: rule + 1,
        };
        let redex = t.subterm_at(position)?;
        let r = self.rules.get(rule).ok_or_else(not_a_redex)?;
        let sigma = matching(&r.lhs, redex).ok_or_else(not_a_redex)?;
        if !redex.args().iter().all(|a| self.is_normal_form(a)) {
            return Err(not_a_redex());
        }
        let entries = r
            .rhs
            .iter()
            .map(|(p, rj)| Ok((p.clone(), t.replace_at(position, sigma.apply(rj))?)))
            .collect::<Result<Vec<_>, TermError>>()?;
        Ok(MultiDist::new(entries))
    }
}
