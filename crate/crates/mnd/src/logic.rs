//! Propositional formulas over ground atoms and their exact semantics.
//!
//! Every guard in the negotiation engine reduces to a question about model
//! sets: `entails` is inclusion, `consistent` is a non-empty intersection.
//! Model sets are computed bottom-up as bitsets over an enumerated
//! [`WorldSet`], so each connective costs one bitwise pass.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Default cap on the number of atoms a full world set may enumerate.
pub const DEFAULT_MAX_ATOMS: usize = 20;

/// Environment variable overriding [`DEFAULT_MAX_ATOMS`].
pub const MAX_ATOMS_ENV: &str = "MND_MAX_ATOMS";

// Deeply nested input would otherwise exhaust the stack.
const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("cannot conjoin an empty set of formulas")]
    EmptySet,
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid world set: {0}")]
    InvalidWorlds(String),
    #[error("{atoms} atoms exceed the enumeration cap of {cap} (set {MAX_ATOMS_ENV} to raise it)")]
    TooManyAtoms { atoms: usize, cap: usize },
}

/// The enumeration cap in effect: `MND_MAX_ATOMS` if set and valid, else 20.
pub fn max_atoms() -> usize {
    std::env::var(MAX_ATOMS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_ATOMS)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub name: String,
    /// Kept as metadata; atoms are evaluated as ground propositions.
    #[serde(default)]
    pub arity: u32,
}

impl Atom {
    pub fn new(name: impl Into<String>) -> Self {
        Atom {
            name: name.into(),
            arity: 0,
        }
    }
}

/// An ordered, duplicate-free set of atoms. The order fixes world enumeration.
#[derive(Debug, Clone)]
pub struct Signature {
    atoms: Vec<Atom>,
    index: HashMap<String, usize>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

impl Eq for Signature {}

impl Signature {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, LogicError> {
        if atoms.is_empty() {
            return Err(LogicError::InvalidSignature("no atoms".into()));
        }
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            if !is_identifier(&atom.name) {
                return Err(LogicError::InvalidSignature(format!(
                    "`{}` is not an identifier",
                    atom.name
                )));
            }
            if index.insert(atom.name.clone(), i).is_some() {
                return Err(LogicError::InvalidSignature(format!(
                    "atom `{}` declared twice",
                    atom.name
                )));
            }
        }
        Ok(Signature { atoms, index })
    }

    pub fn from_names<I, S>(names: I) -> Result<Self, LogicError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Signature::new(names.into_iter().map(Atom::new).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }
}

/// Propositional formula tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(f: Formula, g: Formula) -> Self {
        Formula::And(Box::new(f), Box::new(g))
    }

    pub fn or(f: Formula, g: Formula) -> Self {
        Formula::Or(Box::new(f), Box::new(g))
    }

    pub fn implies(f: Formula, g: Formula) -> Self {
        Formula::Implies(Box::new(f), Box::new(g))
    }

    /// Parses without checking atoms against a signature.
    pub fn parse(text: &str) -> Result<Formula, LogicError> {
        Parser::new(text).parse()
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(n) => {
                out.insert(n);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(f, g) | Formula::Or(f, g) | Formula::Implies(f, g) => {
                f.collect_atoms(out);
                g.collect_atoms(out);
            }
        }
    }

    /// Fails with the first atom (in sorted order) missing from `sig`.
    pub fn check(&self, sig: &Signature) -> Result<(), LogicError> {
        match self.atoms().into_iter().find(|a| !sig.contains(a)) {
            Some(a) => Err(LogicError::UnknownAtom(a.to_string())),
            None => Ok(()),
        }
    }

    /// Renames every atom, preserving structure.
    pub fn try_rename<E>(&self, f: &impl Fn(&str) -> Result<String, E>) -> Result<Formula, E> {
        Ok(match self {
            Formula::Atom(n) => Formula::Atom(f(n)?),
            Formula::Not(g) => Formula::not(g.try_rename(f)?),
            Formula::And(g, h) => Formula::and(g.try_rename(f)?, h.try_rename(f)?),
            Formula::Or(g, h) => Formula::or(g.try_rename(f)?, h.try_rename(f)?),
            Formula::Implies(g, h) => Formula::implies(g.try_rename(f)?, h.try_rename(f)?),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) => 4,
            Formula::Atom(_) => 5,
        }
    }

    fn write_at(&self, out: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            out.write_str("(")?;
        }
        match self {
            Formula::Atom(n) => out.write_str(n)?,
            Formula::Not(f) => {
                out.write_str("!")?;
                f.write_at(out, 4)?;
            }
            Formula::And(f, g) => {
                f.write_at(out, 3)?;
                out.write_str(" & ")?;
                g.write_at(out, 4)?;
            }
            Formula::Or(f, g) => {
                f.write_at(out, 2)?;
                out.write_str(" | ")?;
                g.write_at(out, 3)?;
            }
            Formula::Implies(f, g) => {
                f.write_at(out, 2)?;
                out.write_str(" -> ")?;
                g.write_at(out, 1)?;
            }
        }
        if paren {
            out.write_str(")")?;
        }
        Ok(())
    }
}

/// Canonical form: `!` binds tightest, then `&`, `|`, `->`; `&` and `|`
/// associate left, `->` right. Only necessary parentheses are printed.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl FromStr for Formula {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Formula::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses `text` and checks every atom against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, LogicError> {
    let f = Formula::parse(text)?;
    f.check(sig)?;
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            pos: 0,
            depth: 0,
        }
    }

    fn parse(mut self) -> Result<Formula, LogicError> {
        let f = self.implication()?;
        self.skip_ws();
        match self.peek() {
            None => Ok(f),
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn error(&self, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn descend(&mut self) -> Result<(), LogicError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error("formula nested too deeply"));
        }
        Ok(())
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        self.skip_ws();
        if self.rest().starts_with("->") {
            self.pos += 2;
            self.descend()?;
            let rhs = self.implication()?;
            self.depth -= 1;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conjunction()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('|') {
                return Ok(lhs);
            }
            self.pos += 1;
            lhs = Formula::or(lhs, self.conjunction()?);
        }
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('&') {
                return Ok(lhs);
            }
            self.pos += 1;
            lhs = Formula::and(lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        self.skip_ws();
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                self.descend()?;
                let f = self.unary()?;
                self.depth -= 1;
                Ok(Formula::not(f))
            }
            Some('(') => {
                self.pos += 1;
                self.descend()?;
                let f = self.implication()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                self.depth -= 1;
                Ok(f)
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let rest = self.rest();
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                self.pos += len;
                Ok(Formula::Atom(rest[..len].to_string()))
            }
            Some(c) => Err(self.error(format!("expected a formula, found `{c}`"))),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// Right-nested conjunction preserving order: `[a, b, c]` gives `a & (b & c)`.
pub fn conjoin(fs: &[Formula]) -> Result<Formula, LogicError> {
    let (last, init) = fs.split_last().ok_or(LogicError::EmptySet)?;
    Ok(init
        .iter()
        .rev()
        .fold(last.clone(), |acc, f| Formula::and(f.clone(), acc)))
}

/// A set of worlds, as indices into a [`WorldSet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Models(FixedBitSet);

impl Models {
    pub fn empty(universe: usize) -> Self {
        Models(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Models(bits)
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Models::empty(universe);
        for i in indices {
            m.0.insert(i);
        }
        m
    }

    /// Number of worlds in the enclosing world set.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, world: usize) -> bool {
        self.0.contains(world)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &Models) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_proper_subset(&self, other: &Models) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn is_disjoint(&self, other: &Models) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn intersection_count(&self, other: &Models) -> usize {
        self.0.intersection_count(&other.0)
    }

    pub fn intersection(&self, other: &Models) -> Models {
        let mut out = self.clone();
        out.0.intersect_with(&other.0);
        out
    }

    pub fn union(&self, other: &Models) -> Models {
        let mut out = self.clone();
        out.0.union_with(&other.0);
        out
    }

    pub fn complement(&self) -> Models {
        let mut out = self.clone();
        out.0.toggle_range(..);
        out
    }
}

/// One named, total truth assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub name: String,
    pub values: Vec<bool>,
}

impl World {
    /// Builds a world in which exactly the listed atoms are true.
    pub fn with_true(
        name: impl Into<String>,
        sig: &Signature,
        true_atoms: &[&str],
    ) -> Result<World, LogicError> {
        let mut values = vec![false; sig.len()];
        for a in true_atoms {
            let i = sig
                .index_of(a)
                .ok_or_else(|| LogicError::UnknownAtom(a.to_string()))?;
            values[i] = true;
        }
        Ok(World {
            name: name.into(),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Worlds {
    Full,
    Named(Vec<World>),
}

/// The finite set of structures against which formulas are evaluated.
///
/// In `Full` mode world `w` assigns atom `k` the bit `n - 1 - k` of `w`,
/// so world 0 is all-false and the first atom is the most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldSet {
    sig: Signature,
    worlds: Worlds,
    atom_models: Vec<Models>,
}

impl WorldSet {
    /// All `2^n` assignments over `sig`, subject to [`max_atoms`].
    pub fn full(sig: Signature) -> Result<WorldSet, LogicError> {
        let n = sig.len();
        let cap = max_atoms();
        if n > cap {
            return Err(LogicError::TooManyAtoms { atoms: n, cap });
        }
        let size = 1usize << n;
        let atom_models = (0..n)
            .map(|k| {
                let bit = n - 1 - k;
                Models::from_indices(size, (0..size).filter(|w| (w >> bit) & 1 == 1))
            })
            .collect();
        Ok(WorldSet {
            sig,
            worlds: Worlds::Full,
            atom_models,
        })
    }

    pub fn named(sig: Signature, worlds: Vec<World>) -> Result<WorldSet, LogicError> {
        if worlds.is_empty() {
            return Err(LogicError::InvalidWorlds("no worlds".into()));
        }
        let mut seen = BTreeSet::new();
        for w in &worlds {
            if !seen.insert(w.name.as_str()) {
                return Err(LogicError::InvalidWorlds(format!(
                    "world `{}` listed twice",
                    w.name
                )));
            }
            if w.values.len() != sig.len() {
                return Err(LogicError::InvalidWorlds(format!(
                    "world `{}` assigns {} of {} atoms",
                    w.name,
                    w.values.len(),
                    sig.len()
                )));
            }
        }
        let size = worlds.len();
        let atom_models = (0..sig.len())
            .map(|k| Models::from_indices(size, (0..size).filter(|&w| worlds[w].values[k])))
            .collect();
        Ok(WorldSet {
            sig,
            worlds: Worlds::Named(worlds),
            atom_models,
        })
    }

    /// The full assignments satisfying `constraint`, kept as named worlds.
    pub fn constrained(sig: Signature, constraint: &Formula) -> Result<WorldSet, LogicError> {
        constraint.check(&sig)?;
        let full = WorldSet::full(sig)?;
        let keep = full.models(constraint);
        let worlds = keep
            .iter()
            .map(|w| World {
                name: full.world_name(w),
                values: full.values(w),
            })
            .collect();
        WorldSet::named(full.sig, worlds)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn is_full(&self) -> bool {
        matches!(self.worlds, Worlds::Full)
    }

    pub fn len(&self) -> usize {
        match &self.worlds {
            Worlds::Full => 1 << self.sig.len(),
            Worlds::Named(ws) => ws.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Truth values of world `w` in signature order.
    pub fn values(&self, w: usize) -> Vec<bool> {
        match &self.worlds {
            Worlds::Full => {
                let n = self.sig.len();
                (0..n).map(|k| (w >> (n - 1 - k)) & 1 == 1).collect()
            }
            Worlds::Named(ws) => ws[w].values.clone(),
        }
    }

    /// Named worlds keep their name; full worlds are written as a bit string.
    pub fn world_name(&self, w: usize) -> String {
        match &self.worlds {
            Worlds::Full => self
                .values(w)
                .into_iter()
                .map(|b| if b { '1' } else { '0' })
                .collect(),
            Worlds::Named(ws) => ws[w].name.clone(),
        }
    }

    pub fn names(&self, m: &Models) -> Vec<String> {
        m.iter().map(|w| self.world_name(w)).collect()
    }

    pub fn all(&self) -> Models {
        Models::full(self.len())
    }

    /// Model set of `f`.
    ///
    /// # Panics
    /// If `f` mentions an atom outside the signature; use [`WorldSet::try_models`]
    /// for unchecked input.
    pub fn models(&self, f: &Formula) -> Models {
        self.try_models(f)
            .unwrap_or_else(|e| panic!("formula `{f}` is not over this signature: {e}"))
    }

    pub fn try_models(&self, f: &Formula) -> Result<Models, LogicError> {
        Ok(match f {
            Formula::Atom(n) => {
                let k = self
                    .sig
                    .index_of(n)
                    .ok_or_else(|| LogicError::UnknownAtom(n.clone()))?;
                self.atom_models[k].clone()
            }
            Formula::Not(g) => self.try_models(g)?.complement(),
            Formula::And(g, h) => self.try_models(g)?.intersection(&self.try_models(h)?),
            Formula::Or(g, h) => self.try_models(g)?.union(&self.try_models(h)?),
            Formula::Implies(g, h) => self.try_models(g)?.complement().union(&self.try_models(h)?),
        })
    }

    pub fn entails(&self, f: &Formula, g: &Formula) -> bool {
        self.models(f).is_subset(&self.models(g))
    }

    pub fn consistent(&self, f: &Formula, g: &Formula) -> bool {
        !self.models(f).is_disjoint(&self.models(g))
    }

    pub fn equivalent(&self, f: &Formula, g: &Formula) -> bool {
        self.models(f) == self.models(g)
    }

    pub fn satisfiable(&self, f: &Formula) -> bool {
        !self.models(f).is_empty()
    }
}

pub fn models(f: &Formula, ws: &WorldSet) -> Models {
    ws.models(f)
}

pub fn entails(f: &Formula, g: &Formula, ws: &WorldSet) -> bool {
    ws.entails(f, g)
}

pub fn consistent(f: &Formula, g: &Formula, ws: &WorldSet) -> bool {
    ws.consistent(f, g)
}

pub fn equivalent(f: &Formula, g: &Formula, ws: &WorldSet) -> bool {
    ws.equivalent(f, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            p("!(a & b) -> c"),
            Formula::implies(
                Formula::not(Formula::and(Formula::atom("a"), Formula::atom("b"))),
                Formula::atom("c")
            )
        );
        assert_eq!(p("a -> b -> c"), Formula::implies(p("a"), p("b -> c")));
        assert_eq!(p("a | b | c"), Formula::or(p("a | b"), p("c")));
        assert_eq!(p("a | b & c"), Formula::or(p("a"), p("b & c")));
        assert_eq!(p("!a & b"), Formula::and(p("!a"), p("b")));
    }

    #[test]
    fn printer_is_minimal() {
        assert_eq!(p("((a) & (b))").to_string(), "a & b");
        assert_eq!(p("a & (b & c)").to_string(), "a & (b & c)");
        assert_eq!(p("(a -> b) -> c").to_string(), "(a -> b) -> c");
        assert_eq!(p("a -> (b -> c)").to_string(), "a -> b -> c");
        assert_eq!(p("!(a | b)").to_string(), "!(a | b)");
        assert_eq!(p("!!a").to_string(), "!!a");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            Formula::parse("a & ").unwrap_err(),
            LogicError::Syntax {
                position: 4,
                message: "unexpected end of input".into()
            }
        );
        assert!(matches!(
            Formula::parse("a - b"),
            Err(LogicError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            Formula::parse("(a"),
            Err(LogicError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            Formula::parse("a b"),
            Err(LogicError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            Formula::parse("1a"),
            Err(LogicError::Syntax { position: 0, .. })
        ));
        assert!(Formula::parse(&"!".repeat(10_000)).is_err());
    }

    #[test]
    fn unknown_atoms_are_rejected() {
        let sig = Signature::from_names(["has4wheels", "hasSteeringWheel"]).unwrap();
        assert!(parse_formula("has4wheels & hasSteeringWheel", &sig).is_ok());
        assert_eq!(
            parse_formula("has4wheels & foo", &sig),
            Err(LogicError::UnknownAtom("foo".into()))
        );
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::from_names(Vec::<String>::new()).is_err());
        assert!(Signature::from_names(["a", "a"]).is_err());
        assert!(Signature::from_names(["a-b"]).is_err());
    }

    #[test]
    fn full_world_semantics() {
        let ws = WorldSet::full(Signature::from_names(["a", "b"]).unwrap()).unwrap();
        assert_eq!(ws.len(), 4);
        assert_eq!(ws.models(&p("a | !a")).count(), 4);
        assert!(ws.entails(&p("a"), &p("a | b")));
        assert!(!ws.entails(&p("a | b"), &p("a")));
        assert!(!ws.consistent(&p("a"), &p("!a")));
        assert!(ws.equivalent(&p("a & b"), &p("b & a")));
        assert!(ws.equivalent(&p("a -> b"), &p("!a | b")));
        assert_eq!(ws.names(&ws.models(&p("a & !b"))), vec!["10".to_string()]);
    }

    #[test]
    fn conjoin_is_right_nested() {
        assert_eq!(conjoin(&[p("a")]).unwrap(), p("a"));
        assert_eq!(conjoin(&[p("a"), p("b")]).unwrap(), p("a & b"));
        assert_eq!(
            conjoin(&[p("a"), p("b"), p("c")]).unwrap(),
            p("a & (b & c)")
        );
        assert_eq!(conjoin(&[]), Err(LogicError::EmptySet));
    }

    #[test]
    fn named_worlds_validate() {
        let sig = Signature::from_names(["a"]).unwrap();
        let w = World::with_true("x", &sig, &["a"]).unwrap();
        assert!(WorldSet::named(sig.clone(), vec![w.clone(), w.clone()]).is_err());
        assert!(WorldSet::named(sig.clone(), vec![]).is_err());
        let short = World {
            name: "y".into(),
            values: vec![],
        };
        assert!(WorldSet::named(sig, vec![short]).is_err());
    }

    #[test]
    fn constrained_worlds_filter_full_enumeration() {
        let sig = Signature::from_names(["a", "b"]).unwrap();
        let ws = WorldSet::constrained(sig, &p("!(a & b)")).unwrap();
        assert_eq!(ws.len(), 3);
        assert!(!ws.satisfiable(&p("a & b")));
    }
}
