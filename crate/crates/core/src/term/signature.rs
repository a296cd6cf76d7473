use std::collections::{BTreeMap, BTreeSet};

use super::{Symbol, SymbolKind, Term};

/// The split signature of a rewrite system: defined symbols, constructors
/// and one tuple symbol per defined symbol. Compound symbols `Com_n` are
/// implicit constructors and are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    defined: BTreeSet<Symbol>,
    constructors: BTreeSet<Symbol>,
    tuples: BTreeMap<Symbol, Symbol>,
}

impl Signature {
    /// Builds a signature from (name, arity) pairs. A pair listed as defined
    /// is never a constructor.
    pub fn new<'a>(
        defined: impl IntoIterator<Item = (&'a str, usize)>,
        constructors: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Self {
        let defined: BTreeSet<Symbol> = defined
            .into_iter()
            .map(|(n, a)| Symbol::defined(n, a))
            .collect();
        let constructors: BTreeSet<Symbol> = constructors
            .into_iter()
            .filter(|(n, a)| !defined.iter().any(|d| d.name() == *n && d.arity() == *a))
            .map(|(n, a)| Symbol::constructor(n, a))
            .collect();
        let tuples = tuple_names(&defined, &constructors);
        Signature {
            defined,
            constructors,
            tuples,
        }
    }

    pub fn defined(&self) -> &BTreeSet<Symbol> {
        &self.defined
    }

    pub fn constructors(&self) -> &BTreeSet<Symbol> {
        &self.constructors
    }

    pub fn tuple_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.tuples.values()
    }

    /// Defined and constructor symbols (no tuple or compound symbols).
    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.defined.iter().chain(self.constructors.iter())
    }

    pub fn is_defined_name(&self, name: &str, arity: usize) -> bool {
        self.defined
            .iter()
            .any(|d| d.name() == name && d.arity() == arity)
    }

    /// The symbol called `name` with the given arity, tagged as defined or
    /// constructor according to this signature. Unknown symbols are
    /// constructors.
    pub fn classify(&self, name: &str, arity: usize) -> Symbol {
        if self.is_defined_name(name, arity) {
            Symbol::defined(name, arity)
        } else {
            Symbol::constructor(name, arity)
        }
    }

    /// Re-tags every defined/constructor symbol of `t` against this signature.
    pub fn retag(&self, t: &Term) -> Term {
        t.map_symbols(&|f| match f.kind() {
            SymbolKind::Defined | SymbolKind::Constructor => self.classify(f.name(), f.arity()),
            _ => f.clone(),
        })
    }

    pub fn tuple_of(&self, defined: &Symbol) -> Option<&Symbol> {
        self.tuples.get(defined)
    }

    pub fn defined_of_tuple(&self, tuple: &Symbol) -> Option<&Symbol> {
        self.tuples
            .iter()
            .find_map(|(d, t)| (t == tuple).then_some(d))
    }
}

/// Tuple symbol names: the shortest uppercased prefix of the defined
/// symbol's name that no other defined name shares and that does not clash
/// with an existing symbol, so `minus` becomes `M` and `b1` becomes `B1`.
/// Falls back to `name#`.
fn tuple_names(defined: &BTreeSet<Symbol>, constructors: &BTreeSet<Symbol>) -> BTreeMap<Symbol, Symbol> {
    let taken: BTreeSet<&str> = defined
        .iter()
        .chain(constructors.iter())
        .map(Symbol::name)
        .collect();
    let upper: Vec<(String, String)> = defined
        .iter()
        .map(|d| (d.name().to_string(), d.name().to_uppercase()))
        .collect();
    let mut chosen: BTreeSet<String> = BTreeSet::new();
    let mut out = BTreeMap::new();
    for d in defined {
        let name = d.name();
        let up = name.to_uppercase();
        let mut pick = None;
        let chars: Vec<(usize, char)> = up.char_indices().collect();
        for k in 1..=chars.len() {
            let end = chars.get(k).map_or(up.len(), |(i, _)| *i);
            let cand = &up[..end];
            let shared = upper
                .iter()
                .any(|(other, other_up)| other != name && other_up.starts_with(cand));
            if !shared && !taken.contains(cand) && !chosen.contains(cand) {
                pick = Some(cand.to_string());
                break;
            }
        }
        let tname = pick.unwrap_or_else(|| format!("{name}#"));
        chosen.insert(tname.clone());
        out.insert(d.clone(), Symbol::new(tname, d.arity(), SymbolKind::Tuple));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple_name(sig: &Signature, name: &str, arity: usize) -> String {
        sig.tuple_of(&Symbol::defined(name, arity)).unwrap().name().to_string()
    }

    #[test]
    fn tuple_names_follow_the_usual_abbreviations() {
        let sig = Signature::new([("minus", 2), ("div", 2)], [("O", 0), ("s", 1)]);
        assert_eq!(tuple_name(&sig, "minus", 2), "M");
        assert_eq!(tuple_name(&sig, "div", 2), "D");

        let sig = Signature::new([("f", 1), ("a", 0), ("b1", 0), ("b2", 0)], [("s", 1)]);
        assert_eq!(tuple_name(&sig, "f", 1), "F");
        assert_eq!(tuple_name(&sig, "a", 0), "A");
        assert_eq!(tuple_name(&sig, "b1", 0), "B1");
        assert_eq!(tuple_name(&sig, "b2", 0), "B2");
    }

    #[test]
    fn tuple_names_avoid_clashes() {
        // `o` would become `O`, which is already a constructor
        let sig = Signature::new([("o", 0)], [("O", 0)]);
        assert_eq!(tuple_name(&sig, "o", 0), "o#");
        // `min` is a prefix of `minus`
        let sig = Signature::new([("min", 2), ("minus", 2)], []);
        assert_eq!(tuple_name(&sig, "min", 2), "min#");
        assert_eq!(tuple_name(&sig, "minus", 2), "MINU");
    }

    #[test]
    fn partition_is_disjoint() {
        let sig = Signature::new([("g", 1)], [("g", 1), ("O", 0)]);
        assert_eq!(sig.defined().len(), 1);
        assert_eq!(sig.constructors().len(), 1);
        let g = Symbol::defined("g", 1);
        let t = sig.tuple_of(&g).unwrap();
        assert!(t.is_tuple());
        assert_eq!(sig.defined_of_tuple(t), Some(&g));
        assert_eq!(sig.classify("O", 0).kind(), SymbolKind::Constructor);
    }
}
