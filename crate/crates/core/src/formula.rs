//! Epistemic formulas over a finite vocabulary of atoms and agents.
//!
//! The concrete syntax is functional: `top`, `<atom>`, `neg(F)`,
//! `and(F1,F2)`, `box(<agent>,F)`, `dia(<agent>,F)`, with `or(F1,F2)` and
//! `imp(F1,F2)` accepted as sugar and expanded at parse time.

use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::valuation::{Valuation, MAX_ATOMS};

/// Name of the precondition pseudo-atom carried by eventualities.
pub const PRE_ATOM: &str = "pre";

const KEYWORDS: &[&str] = &["top", "neg", "and", "or", "imp", "box", "dia"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom(u16);

impl Atom {
    pub fn new(index: u16) -> Self {
        Atom(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Agent(u16);

impl Agent {
    pub fn new(index: u16) -> Self {
        Agent(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabError {
    #[error("invalid identifier `{0}`: expected [a-z][a-z0-9_]*")]
    InvalidName(String),
    #[error("`{0}` is reserved and cannot be used as an atom")]
    Reserved(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("too many atoms (limit is {MAX_ATOMS})")]
    TooManyAtoms,
}

/// The atoms and agents a task talks about, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    atoms: IndexSet<String>,
    agents: IndexSet<String>,
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, name: &str) -> Result<Atom, VocabError> {
        if !is_identifier(name) {
            return Err(VocabError::InvalidName(name.to_string()));
        }
        if name == PRE_ATOM || KEYWORDS.contains(&name) {
            return Err(VocabError::Reserved(name.to_string()));
        }
        if self.atoms.len() >= MAX_ATOMS {
            return Err(VocabError::TooManyAtoms);
        }
        let (index, fresh) = self.atoms.insert_full(name.to_string());
        if !fresh {
            return Err(VocabError::Duplicate(name.to_string()));
        }
        Ok(Atom(index as u16))
    }

    pub fn add_agent(&mut self, name: &str) -> Result<Agent, VocabError> {
        if !is_identifier(name) {
            return Err(VocabError::InvalidName(name.to_string()));
        }
        let (index, fresh) = self.agents.insert_full(name.to_string());
        if !fresh {
            return Err(VocabError::Duplicate(name.to_string()));
        }
        Ok(Agent(index as u16))
    }

    pub fn atom(&self, name: &str) -> Option<Atom> {
        self.atoms.get_index_of(name).map(|i| Atom(i as u16))
    }

    pub fn agent(&self, name: &str) -> Option<Agent> {
        self.agents.get_index_of(name).map(|i| Agent(i as u16))
    }

    pub fn atom_name(&self, atom: Atom) -> &str {
        &self.atoms[atom.index()]
    }

    pub fn agent_name(&self, agent: Agent) -> &str {
        &self.agents[agent.index()]
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.atoms.len()).map(|i| Atom(i as u16))
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        (0..self.agents.len()).map(|i| Agent(i as u16))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Box(Agent, Box<Formula>),
    Dia(Agent, Box<Formula>),
}

impl Formula {
    pub fn atom(atom: Atom) -> Self {
        Formula::Atom(atom)
    }

    pub fn bottom() -> Self {
        Formula::not(Formula::Top)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    /// `neg(and(neg(lhs), neg(rhs)))`
    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(lhs), Formula::not(rhs)))
    }

    /// `neg(and(lhs, neg(rhs)))`
    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::not(Formula::and(lhs, Formula::not(rhs)))
    }

    pub fn knows(agent: Agent, f: Formula) -> Self {
        Formula::Box(agent, Box::new(f))
    }

    pub fn considers(agent: Agent, f: Formula) -> Self {
        Formula::Dia(agent, Box::new(f))
    }

    /// Right-nested conjunction; `top` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Formula::Top;
        };
        while let Some(f) = parts.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// Right-nested disjunction; `neg(top)` for an empty list.
    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Formula::bottom();
        };
        while let Some(f) = parts.pop() {
            acc = Formula::or(f, acc);
        }
        acc
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Top)
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Box(_, f) | Formula::Dia(_, f) => 1 + f.modal_depth(),
        }
    }

    /// Rewrites `box(i,F)` as `neg(dia(i,neg(F)))` and removes double negations.
    pub fn normalize(&self) -> Formula {
        match self {
            Formula::Top | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => negate(f.normalize()),
            Formula::And(l, r) => Formula::and(l.normalize(), r.normalize()),
            Formula::Box(i, f) => Formula::not(Formula::considers(*i, negate(f.normalize()))),
            Formula::Dia(i, f) => Formula::considers(*i, f.normalize()),
        }
    }

    pub fn is_normal(&self) -> bool {
        match self {
            Formula::Top | Formula::Atom(_) => true,
            Formula::Not(f) => !matches!(**f, Formula::Not(_)) && f.is_normal(),
            Formula::And(l, r) => l.is_normal() && r.is_normal(),
            Formula::Box(..) => false,
            Formula::Dia(_, f) => f.is_normal(),
        }
    }

    /// Agents mentioned anywhere in the formula.
    pub fn agents(&self, out: &mut Vec<Agent>) {
        match self {
            Formula::Top | Formula::Atom(_) => {}
            Formula::Not(f) => f.agents(out),
            Formula::And(l, r) => {
                l.agents(out);
                r.agents(out);
            }
            Formula::Box(i, f) | Formula::Dia(i, f) => {
                out.push(*i);
                f.agents(out);
            }
        }
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> FormulaDisplay<'a> {
        FormulaDisplay {
            formula: self,
            vocab,
        }
    }

    pub fn render(&self, vocab: &Vocabulary) -> String {
        self.display(vocab).to_string()
    }
}

fn negate(f: Formula) -> Formula {
    match f {
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    vocab: &'a Vocabulary,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.vocab;
        match self.formula {
            Formula::Top => f.write_str("top"),
            Formula::Atom(p) => f.write_str(v.atom_name(*p)),
            Formula::Not(g) => write!(f, "neg({})", g.display(v)),
            Formula::And(l, r) => write!(f, "and({},{})", l.display(v), r.display(v)),
            Formula::Box(i, g) => write!(f, "box({},{})", v.agent_name(*i), g.display(v)),
            Formula::Dia(i, g) => write!(f, "dia({},{})", v.agent_name(*i), g.display(v)),
        }
    }
}

/// Parse failure. Offsets are 1-based byte positions into the input; an
/// error at end of input reports `len + 1`.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown atom `{name}` at offset {offset}")]
    UnknownAtom { name: String, offset: usize },
    #[error("unknown agent `{name}` at offset {offset}")]
    UnknownAgent { name: String, offset: usize },
    #[error("`pre` is reserved at offset {offset}")]
    ReservedAtom { offset: usize },
}

impl FormulaError {
    pub fn offset(&self) -> usize {
        match self {
            FormulaError::Syntax { offset, .. }
            | FormulaError::UnknownAtom { offset, .. }
            | FormulaError::UnknownAgent { offset, .. }
            | FormulaError::ReservedAtom { offset } => *offset,
        }
    }
}

pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, FormulaError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        vocab,
    };
    let f = parser.formula()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax("trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vocab: &'a Vocabulary,
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: &str) -> FormulaError {
        FormulaError::Syntax {
            offset: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), FormulaError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", byte as char)))
        }
    }

    fn ident(&mut self) -> Result<(&'a str, usize), FormulaError> {
        self.skip_ws();
        let start = self.pos;
        if !matches!(self.src.get(self.pos), Some(b'a'..=b'z')) {
            return Err(self.syntax("expected identifier"));
        }
        while matches!(
            self.src.get(self.pos),
            Some(b'a'..=b'z' | b'0'..=b'9' | b'_')
        ) {
            self.pos += 1;
        }
        // The slice is ASCII by construction.
        let src: &'a [u8] = self.src;
        let name = std::str::from_utf8(&src[start..self.pos]).unwrap_or_default();
        Ok((name, start))
    }

    fn peek_open(&mut self) -> bool {
        self.skip_ws();
        self.src.get(self.pos) == Some(&b'(')
    }

    fn agent(&mut self) -> Result<Agent, FormulaError> {
        let (name, start) = self.ident()?;
        self.vocab
            .agent(name)
            .ok_or_else(|| FormulaError::UnknownAgent {
                name: name.to_string(),
                offset: start + 1,
            })
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let (name, start) = self.ident()?;
        if !self.peek_open() {
            return match name {
                "top" => Ok(Formula::Top),
                PRE_ATOM => Err(FormulaError::ReservedAtom { offset: start + 1 }),
                _ => self.vocab.atom(name).map(Formula::Atom).ok_or_else(|| {
                    FormulaError::UnknownAtom {
                        name: name.to_string(),
                        offset: start + 1,
                    }
                }),
            };
        }
        let op = name.to_string();
        self.expect(b'(')?;
        let f = match op.as_str() {
            "neg" => Formula::not(self.formula()?),
            "and" | "or" | "imp" => {
                let lhs = self.formula()?;
                self.expect(b',')?;
                let rhs = self.formula()?;
                match op.as_str() {
                    "and" => Formula::and(lhs, rhs),
                    "or" => Formula::or(lhs, rhs),
                    _ => Formula::implies(lhs, rhs),
                }
            }
            "box" | "dia" => {
                let agent = self.agent()?;
                self.expect(b',')?;
                let body = self.formula()?;
                if op == "box" {
                    Formula::knows(agent, body)
                } else {
                    Formula::considers(agent, body)
                }
            }
            _ => {
                return Err(FormulaError::Syntax {
                    offset: start + 1,
                    message: format!("unknown operator `{op}`"),
                })
            }
        };
        self.expect(b')')?;
        Ok(f)
    }
}

/// A relational structure formulas can be evaluated on: Kripke models and
/// possibility stores both implement it.
pub trait Frame {
    type Point: Copy;

    fn valuation(&self, point: Self::Point) -> Valuation;

    fn successors(&self, agent: Agent, point: Self::Point) -> &[Self::Point];
}

/// Truth of `f` at `point`. Recursion descends on the formula only, so
/// cycles in the frame are harmless.
pub fn holds<F: Frame + ?Sized>(frame: &F, point: F::Point, f: &Formula) -> bool {
    match f {
        Formula::Top => true,
        Formula::Atom(p) => frame.valuation(point).get(*p),
        Formula::Not(g) => !holds(frame, point, g),
        Formula::And(l, r) => holds(frame, point, l) && holds(frame, point, r),
        Formula::Box(i, g) => frame
            .successors(*i, point)
            .iter()
            .all(|&v| holds(frame, v, g)),
        Formula::Dia(i, g) => frame
            .successors(*i, point)
            .iter()
            .any(|&v| holds(frame, v, g)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        let mut v = Vocabulary::new();
        v.add_atom("h").unwrap();
        v.add_atom("q").unwrap();
        v.add_agent("a").unwrap();
        v.add_agent("b").unwrap();
        v
    }

    #[test]
    fn parses_nested_formula() {
        let v = vocab();
        let h = Formula::atom(v.atom("h").unwrap());
        let a = v.agent("a").unwrap();
        let f = parse_formula("and(h, dia(a, neg(h)))", &v).unwrap();
        assert_eq!(
            f,
            Formula::and(h.clone(), Formula::considers(a, Formula::not(h)))
        );
        let b = v.agent("b").unwrap();
        assert_eq!(
            parse_formula("box(b, top)", &v).unwrap(),
            Formula::knows(b, Formula::Top)
        );
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = parse_formula("and(h,", &vocab()).unwrap_err();
        assert!(
            matches!(err, FormulaError::Syntax { offset: 7, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_names_and_reserved_atom() {
        let v = vocab();
        assert!(matches!(
            parse_formula("box(c,h)", &v),
            Err(FormulaError::UnknownAgent { offset: 5, .. })
        ));
        assert!(matches!(
            parse_formula("and(h,z)", &v),
            Err(FormulaError::UnknownAtom { .. })
        ));
        assert!(matches!(
            parse_formula("pre", &v),
            Err(FormulaError::ReservedAtom { .. })
        ));
        assert!(matches!(
            parse_formula("foo(h)", &v),
            Err(FormulaError::Syntax { .. })
        ));
        assert!(matches!(
            parse_formula("h h", &v),
            Err(FormulaError::Syntax { .. })
        ));
    }

    #[test]
    fn sugar_is_expanded() {
        let v = vocab();
        let h = Formula::atom(v.atom("h").unwrap());
        let q = Formula::atom(v.atom("q").unwrap());
        assert_eq!(
            parse_formula("or(h,q)", &v).unwrap(),
            Formula::or(h.clone(), q.clone())
        );
        assert_eq!(
            parse_formula("imp(h,q)", &v).unwrap(),
            Formula::implies(h, q)
        );
    }

    #[test]
    fn renders_canonical_text() {
        let v = vocab();
        let h = Formula::atom(v.atom("h").unwrap());
        let a = v.agent("a").unwrap();
        let f = Formula::and(h.clone(), Formula::considers(a, Formula::not(h.clone())));
        assert_eq!(f.render(&v), "and(h,dia(a,neg(h)))");
        assert_eq!(Formula::Top.render(&v), "top");
        assert_eq!(Formula::knows(a, h).render(&v), "box(a,h)");
    }

    #[test]
    fn normal_form_examples() {
        let v = vocab();
        let h = Formula::atom(v.atom("h").unwrap());
        let a = v.agent("a").unwrap();
        assert_eq!(
            Formula::knows(a, h.clone()).normalize(),
            Formula::not(Formula::considers(a, Formula::not(h.clone())))
        );
        assert_eq!(Formula::not(Formula::not(h.clone())).normalize(), h);
        let d = Formula::considers(a, h);
        assert_eq!(d.normalize(), d);
    }

    #[test]
    fn modal_depth_examples() {
        let v = vocab();
        let h = Formula::atom(v.atom("h").unwrap());
        let (a, b) = (v.agent("a").unwrap(), v.agent("b").unwrap());
        assert_eq!(h.modal_depth(), 0);
        assert_eq!(
            Formula::knows(a, Formula::considers(b, h.clone())).modal_depth(),
            2
        );
        assert_eq!(
            Formula::and(Formula::considers(a, h.clone()), h).modal_depth(),
            1
        );
    }

    #[test]
    fn vocabulary_rejects_bad_names() {
        let mut v = Vocabulary::new();
        assert!(matches!(v.add_atom("pre"), Err(VocabError::Reserved(_))));
        assert!(matches!(v.add_atom("top"), Err(VocabError::Reserved(_))));
        assert!(matches!(
            v.add_atom("Heads"),
            Err(VocabError::InvalidName(_))
        ));
        v.add_atom("h").unwrap();
        assert!(matches!(v.add_atom("h"), Err(VocabError::Duplicate(_))));
    }
}
