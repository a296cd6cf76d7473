//! Reader for the PTRS text format:
//!
//! ```text
//! (VAR x y)
//! (RULES
//!   g(x) -> {1/2: x, 1/2: g(g(x))}
//! )
//! ```
//!
//! Identifiers listed under `VAR` are variables, everything else is a
//! function symbol. Probabilities are integers or fractions; decimals are
//! rejected. `%` starts a comment that runs to the end of the line.

use std::collections::BTreeSet;
use std::fmt;

use num::BigInt;
use thiserror::Error;

use super::{MultiDist, ProbRule, Ptrs, PtrsError};
use crate::rational::Rational;
use crate::term::{Signature, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Slash,
    Arrow,
    Ident(String),
    Int(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Comma => f.write_str("','"),
            Tok::Colon => f.write_str("':'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Int(s) => write!(f, "number '{s}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| ParseError { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | '{' | '}' | ',' | ':' | '/' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    _ => Tok::Slash,
                };
                out.push(Spanned { tok, line: l0, column: c0 });
                advance(1, &mut i, &mut col);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Spanned { tok: Tok::Arrow, line: l0, column: c0 });
                advance(2, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if chars.get(i) == Some(&'.') {
                    return Err(err(
                        l0,
                        c0,
                        "decimal probabilities are not supported; write a fraction such as 1/2".to_string(),
                    ));
                }
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Int(chars[start..i].iter().collect()),
                    line: l0,
                    column: c0,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: l0,
                    column: c0,
                });
            }
            other => return Err(err(l0, c0, format!("unexpected character '{other}'"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Unresolved term: identifiers are classified once all `VAR` blocks are known.
#[derive(Debug, Clone)]
enum RawTerm {
    Ident(String, usize, usize),
    App(String, Vec<RawTerm>),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, s: &Spanned, message: String) -> ParseError {
        ParseError {
            line: s.line,
            column: s.column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Spanned, ParseError> {
        let s = self.next();
        if s.tok == tok {
            Ok(s)
        } else {
            Err(self.error_at(&s, format!("expected {tok}, found {}", s.tok)))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let s = self.next();
        match &s.tok {
            Tok::Ident(name) => Ok((name.clone(), s.line, s.column)),
            other => Err(self.error_at(&s, format!("expected identifier, found {other}"))),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let (name, line, col) = self.ident()?;
        if self.peek().tok != Tok::LParen {
            return Ok(RawTerm::Ident(name, line, col));
        }
        self.next();
        let mut args = vec![self.term()?];
        while self.peek().tok == Tok::Comma {
            self.next();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(RawTerm::App(name, args))
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let s = self.next();
        let Tok::Int(num) = &s.tok else {
            return Err(self.error_at(&s, format!("expected probability, found {}", s.tok)));
        };
        let num: BigInt = num.parse().expect("lexer yields digits");
        if self.peek().tok != Tok::Slash {
            return Ok(Rational::from_integer(num));
        }
        self.next();
        let d = self.next();
        let Tok::Int(den) = &d.tok else {
            return Err(self.error_at(&d, format!("expected denominator, found {}", d.tok)));
        };
        let den: BigInt = den.parse().expect("lexer yields digits");
        if den == BigInt::from(0) {
            return Err(self.error_at(&d, "denominator must be positive".to_string()));
        }
        Ok(Rational::new(num, den))
    }

    fn rule(&mut self) -> Result<(RawTerm, Vec<(Rational, RawTerm)>), ParseError> {
        let lhs = self.term()?;
        self.expect(Tok::Arrow)?;
        self.expect(Tok::LBrace)?;
        let mut branches = Vec::new();
        loop {
            let p = self.rational()?;
            self.expect(Tok::Colon)?;
            branches.push((p, self.term()?));
            match self.next() {
                Spanned { tok: Tok::Comma, .. } => continue,
                Spanned { tok: Tok::RBrace, .. } => break,
                s => return Err(self.error_at(&s, format!("expected ',' or '}}', found {}", s.tok))),
            }
        }
        Ok((lhs, branches))
    }
}

type RawRule = (RawTerm, Vec<(Rational, RawTerm)>);

fn parse_raw(text: &str) -> Result<(BTreeSet<String>, Vec<RawRule>), ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut vars = BTreeSet::new();
    let mut rules = Vec::new();
    while p.peek().tok != Tok::Eof {
        p.expect(Tok::LParen)?;
        let (kw, line, column) = p.ident()?;
        match kw.as_str() {
            "VAR" => {
                while p.peek().tok != Tok::RParen {
                    vars.insert(p.ident()?.0);
                }
                p.next();
            }
            "RULES" => {
                while p.peek().tok != Tok::RParen {
                    if p.peek().tok == Tok::Eof {
                        let s = p.peek().clone();
                        return Err(p.error_at(&s, "unterminated RULES block".to_string()));
                    }
                    rules.push(p.rule()?);
                }
                p.next();
            }
            other => {
                return Err(ParseError {
                    line,
                    column,
                    message: format!("unknown declaration '{other}', expected VAR or RULES"),
                })
            }
        }
    }
    Ok((vars, rules))
}

fn resolve(raw: &RawTerm, vars: &BTreeSet<String>, classify: &impl Fn(&str, usize) -> Symbol) -> Result<Term, ParseError> {
    match raw {
        RawTerm::Ident(name, _, _) if vars.contains(name) => Ok(Term::var(name)),
        RawTerm::Ident(name, _, _) => Ok(Term::constant(classify(name, 0))),
        RawTerm::App(name, args) => {
            if vars.contains(name) {
                let (line, column) = first_pos(raw);
                return Err(ParseError {
                    line,
                    column,
                    message: format!("variable '{name}' used as a function symbol"),
                });
            }
            let args = args
                .iter()
                .map(|a| resolve(a, vars, classify))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::app(classify(name, args.len()), args))
        }
    }
}

fn first_pos(raw: &RawTerm) -> (usize, usize) {
    match raw {
        RawTerm::Ident(_, l, c) => (*l, *c),
        RawTerm::App(_, args) => args.first().map_or((0, 0), first_pos),
    }
}

/// Parses without validating the rules.
pub fn parse_unchecked(text: &str) -> Result<Ptrs, ParseError> {
    let (vars, raw_rules) = parse_raw(text)?;
    // provisional tags; Ptrs::new re-tags against the inferred signature
    let provisional = |name: &str, arity: usize| Symbol::constructor(name, arity);
    let rules = raw_rules
        .iter()
        .map(|(lhs, branches)| {
            let lhs = resolve(lhs, &vars, &provisional)?;
            let rhs = branches
                .iter()
                .map(|(p, t)| Ok((p.clone(), resolve(t, &vars, &provisional)?)))
                .collect::<Result<Vec<_>, ParseError>>()?;
            Ok(ProbRule::new(lhs, MultiDist::new(rhs)))
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok(Ptrs::new(rules))
}

/// Parses and validates. Invalid rules are reported as diagnostics.
pub fn parse(text: &str) -> Result<Ptrs, PtrsError> {
    let ptrs = parse_unchecked(text)?;
    let diagnostics = ptrs.validate();
    if diagnostics.is_empty() {
        Ok(ptrs)
    } else {
        Err(PtrsError::Invalid(diagnostics))
    }
}

/// Parses a single term against a signature. Names in `vars` are variables;
/// unknown function symbols become constructors.
pub fn parse_term(text: &str, signature: &Signature, vars: &[&str]) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let raw = p.term()?;
    if p.peek().tok != Tok::Eof {
        let s = p.peek().clone();
        return Err(p.error_at(&s, format!("unexpected {} after term", s.tok)));
    }
    let vars: BTreeSet<String> = vars.iter().map(|v| v.to_string()).collect();
    resolve(&raw, &vars, &|name, arity| signature.classify(name, arity))
}
