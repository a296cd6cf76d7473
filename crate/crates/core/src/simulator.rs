//! Exact leaf-mass expansion of rewrite sequence trees and seeded Monte Carlo
//! runs. Both are oracles for testing, not proofs: exact expansion follows
//! the leftmost-innermost strategy only.

use std::collections::BTreeMap;

use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::ptrs::Ptrs;
use crate::rational::Rational;
use crate::term::{matching, Term};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// Total probability of the normal-form leaves reached so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafMass {
    pub value: Rational,
    /// Number of levels actually expanded.
    pub depth: usize,
    /// The frontier is empty, so the tree is finite.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("frontier exceeded {budget} terms at depth {}", .partial.depth + 1)]
    NodeBudget { budget: usize, partial: LeafMass },
}

/// Leaf mass after each level `0..=depth` of the leftmost-innermost tree
/// starting at `t`. Equal terms on a level are merged, which leaves the
/// masses unchanged. The list stops early when the tree is finite.
pub fn expand_profile(t: &Term, rules: &Ptrs, depth: usize, node_budget: usize) -> Result<Vec<LeafMass>, SimError> {
    let mut frontier: BTreeMap<Term, Rational> = BTreeMap::new();
    let mut mass = Rational::zero();
    if rules.is_normal_form(t) {
        mass = Rational::one();
    } else {
        frontier.insert(t.clone(), Rational::one());
    }
    let mut out = vec![LeafMass {
        value: mass.clone(),
        depth: 0,
        exhausted: frontier.is_empty(),
    }];
    for level in 1..=depth {
        if frontier.is_empty() {
            break;
        }
        let mut next: BTreeMap<Term, Rational> = BTreeMap::new();
        for (term, p) in frontier {
            let red = rules
                .leftmost_innermost(&term)
                .expect("frontier terms are not normal forms");
            let succ = rules
                .rewrite_innermost(&term, &red.position, red.rule)
                .expect("the leftmost innermost redex rewrites");
            for (q, s) in succ.iter() {
                let w = &p * q;
                if rules.is_normal_form(s) {
                    mass += w;
                } else {
                    *next.entry(s.clone()).or_insert_with(Rational::zero) += w;
                }
            }
            if next.len() > node_budget {
                return Err(SimError::NodeBudget {
                    budget: node_budget,
                    partial: out.last().cloned().expect("level 0 is recorded"),
                });
            }
        }
        frontier = next;
        out.push(LeafMass {
            value: mass.clone(),
            depth: level,
            exhausted: frontier.is_empty(),
        });
    }
    Ok(out)
}

pub fn expand_exact(t: &Term, rules: &Ptrs, depth: usize) -> Result<LeafMass, SimError> {
    expand_exact_with_budget(t, rules, depth, DEFAULT_NODE_BUDGET)
}

pub fn expand_exact_with_budget(t: &Term, rules: &Ptrs, depth: usize, node_budget: usize) -> Result<LeafMass, SimError> {
    let profile = expand_profile(t, rules, depth, node_budget)?;
    Ok(profile.into_iter().last().expect("level 0 is recorded"))
}

/// `depth,leaf_mass_num,leaf_mass_den` lines with a header.
pub fn profile_csv(profile: &[LeafMass]) -> String {
    let mut out = String::from("depth,leaf_mass_num,leaf_mass_den\n");
    for m in profile {
        out.push_str(&format!("{},{},{}\n", m.depth, m.value.numer(), m.value.denom()));
    }
    out
}

/// SplitMix64 (Steele, Lea and Flood), constants as in the reference
/// implementation.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` by multiply-shift.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub terminated: bool,
    pub steps: usize,
}

/// Index `j` of the first branch whose cumulative probability exceeds
/// `u / 2^64`, compared exactly.
fn pick_branch(probabilities: impl IntoIterator<Item = Rational>, u: u64) -> usize {
    let scale = BigInt::one() << 64;
    let u = BigInt::from(u);
    let mut cumulative = Rational::zero();
    let mut last = 0;
    for (j, p) in probabilities.into_iter().enumerate() {
        cumulative += p;
        last = j;
        // u / 2^64 < n / d  iff  u * d < n * 2^64
        if &u * cumulative.denom() < cumulative.numer() * &scale {
            return j;
        }
    }
    last
}

/// One innermost run: a redex chosen uniformly among all innermost redexes
/// (and matching rules), a branch chosen by its probability. Random draws
/// happen only where there is an actual choice.
pub fn sample_run(t: &Term, rules: &Ptrs, max_steps: usize, seed: u64) -> Run {
    let mut rng = SplitMix64::new(seed);
    let mut term = t.clone();
    for steps in 0..max_steps {
        let redexes = rules.innermost_redexes(&term);
        if redexes.is_empty() {
            return Run {
                terminated: true,
                steps,
            };
        }
        let red = if redexes.len() == 1 {
            &redexes[0]
        } else {
            &redexes[rng.below(redexes.len())]
        };
        let rule = &rules.rules()[red.rule];
        let j = if rule.rhs.len() == 1 {
            0
        } else {
            pick_branch(rule.rhs.iter().map(|(p, _)| p.clone()), rng.next_u64())
        };
        // only the chosen successor is built
        let redex = term.subterm_at(&red.position).expect("redex positions exist");
        let sigma = matching(&rule.lhs, redex).expect("redexes match their rule");
        let contractum = sigma.apply(&rule.rhs.entries()[j].1);
        term = term
            .replace_at(&red.position, contractum)
            .expect("redex positions exist");
    }
    Run {
        terminated: rules.is_normal_form(&term),
        steps: max_steps,
    }
}

/// Fraction of terminated runs; sample `i` uses the `i`-th output of a
/// SplitMix64 generator seeded with `seed`.
pub fn estimate_ast(t: &Term, rules: &Ptrs, samples: usize, max_steps: usize, seed: u64) -> Rational {
    assert!(samples >= 1, "at least one sample is needed");
    let mut master = SplitMix64::new(seed);
    let terminated = (0..samples)
        .filter(|_| sample_run(t, rules, max_steps, master.next_u64()).terminated)
        .count();
    Rational::new(BigInt::from(terminated), BigInt::from(samples))
}
