//! Almost-sure innermost termination analysis for probabilistic term
//! rewrite systems.
//!
//! The pipeline turns a [`ptrs::Ptrs`] into coupled dependency tuples
//! ([`dp`]), splits the resulting problem along the strongly connected
//! components of its dependency graph ([`depgraph`]) and removes tuples with
//! multilinear polynomial interpretations ([`poly`], [`synth`]). The
//! [`prover`] also tries a direct interpretation of the rules, which proves
//! full almost-sure termination. The [`simulator`] expands rewrite sequence
//! trees exactly or samples them, as an independent sanity check.

pub mod depgraph;
pub mod dp;
pub mod poly;
pub mod prover;
pub mod ptrs;
pub mod rational;
pub mod simulator;
pub mod synth;
pub mod term;
