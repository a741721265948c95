//! Weighted context-free grammars, derivations, and the analyses on them.

mod chart;
mod derivation;
mod equivalence;
mod symbol;
pub mod text;
mod trim;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::Semiring;

pub use chart::{string_weight, Inside, WeightOracle};
pub use derivation::{enumerate_derivations, Derivation};
pub use equivalence::{equivalence_check, EquivalenceOptions, EquivalenceReport};
pub use symbol::{Symbol, TransformId};
pub use trim::trim;

/// A weighted production `lhs -> rhs` with weight `weight`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule<W> {
    pub lhs: Symbol,
    pub rhs: Vec<Symbol>,
    pub weight: W,
}

impl<W> Rule<W> {
    pub fn new(lhs: Symbol, rhs: Vec<Symbol>, weight: W) -> Self {
        Rule { lhs, rhs, weight }
    }

    pub fn arity(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_nullary(&self) -> bool {
        self.rhs.is_empty()
    }

    /// Unary with a nonterminal right-hand side.
    pub fn is_nonterminal_unary(&self) -> bool {
        self.rhs.len() == 1 && self.rhs[0].is_nonterminal()
    }

    /// `(lhs, rhs)` ordering key; weights do not participate.
    pub fn shape(&self) -> (&Symbol, &[Symbol]) {
        (&self.lhs, &self.rhs)
    }
}

impl<W: fmt::Display> fmt::Display for Rule<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ->", self.weight, self.lhs)?;
        if self.rhs.is_empty() {
            write!(f, " ε")?;
        }
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// A weighted context-free grammar `(N, V, S, R)`.
///
/// `N` holds every non-terminal symbol (original, frozen, slashed) and `V`
/// every terminal; the two are disjoint by construction since the symbol
/// variant decides which set a symbol belongs to. `R` is a bag: duplicate
/// rules are kept and keep their position.
#[derive(Clone, Debug, PartialEq)]
pub struct Grammar<W> {
    start: Symbol,
    nonterminals: BTreeSet<Symbol>,
    terminals: BTreeSet<Symbol>,
    rules: Vec<Rule<W>>,
}

impl<W: Semiring> Grammar<W> {
    /// Build a grammar whose symbol sets are exactly the start symbol plus
    /// the symbols occurring in `rules`.
    pub fn new(start: Symbol, rules: Vec<Rule<W>>) -> Result<Self> {
        Self::with_symbols(start, std::iter::empty(), rules)
    }

    /// Like [`Grammar::new`] but also declares `extra` symbols, which may be
    /// terminals or nonterminals that no rule mentions.
    pub fn with_symbols<I>(start: Symbol, extra: I, rules: Vec<Rule<W>>) -> Result<Self>
    where
        I: IntoIterator<Item = Symbol>,
    {
        if start.is_terminal() {
            return Err(Error::InvalidGrammar(format!("start symbol {start} is a terminal")));
        }
        let mut nonterminals = BTreeSet::new();
        let mut terminals = BTreeSet::new();
        nonterminals.insert(start.clone());
        let mut add = |s: &Symbol| {
            if s.is_terminal() {
                if !terminals.contains(s) {
                    terminals.insert(s.clone());
                }
            } else if !nonterminals.contains(s) {
                nonterminals.insert(s.clone());
            }
        };
        for s in extra {
            add(&s);
        }
        for r in &rules {
            if r.lhs.is_terminal() {
                return Err(Error::InvalidGrammar(format!(
                    "rule with terminal left-hand side {}",
                    r.lhs
                )));
            }
            add(&r.lhs);
            r.rhs.iter().for_each(&mut add);
        }
        Ok(Grammar {
            start,
            nonterminals,
            terminals,
            rules,
        })
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn nonterminals(&self) -> &BTreeSet<Symbol> {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &BTreeSet<Symbol> {
        &self.terminals
    }

    pub fn rules(&self) -> &[Rule<W>] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule<W>> {
        self.rules
    }

    /// `N ∪ V` in symbol order.
    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.terminals.iter().chain(self.nonterminals.iter())
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        self.terminals.contains(s) || self.nonterminals.contains(s)
    }

    /// `Σ (1 + |rhs|)` over the rule bag.
    pub fn size(&self) -> usize {
        self.rules.iter().map(|r| 1 + r.rhs.len()).sum()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn nullary_rules(&self) -> impl Iterator<Item = (usize, &Rule<W>)> {
        self.rules.iter().enumerate().filter(|(_, r)| r.is_nullary())
    }

    pub fn nonterminal_unary_rules(&self) -> impl Iterator<Item = (usize, &Rule<W>)> {
        self.rules.iter().enumerate().filter(|(_, r)| r.is_nonterminal_unary())
    }

    pub fn max_arity(&self) -> usize {
        self.rules.iter().map(Rule::arity).max().unwrap_or(0)
    }

    /// Rules sorted by shape with equal-shape rules merged by `⊕`.
    ///
    /// Only meant for comparing grammars; the bag itself is never merged.
    pub fn canonical(&self) -> Grammar<W> {
        let mut rules: Vec<Rule<W>> = self.rules.clone();
        rules.sort_by(|a, b| a.shape().cmp(&b.shape()));
        let mut merged: Vec<Rule<W>> = Vec::with_capacity(rules.len());
        for r in rules {
            match merged.last_mut() {
                Some(last) if last.shape() == r.shape() => {
                    last.weight = last.weight.plus(&r.weight);
                }
                _ => merged.push(r),
            }
        }
        Grammar {
            start: self.start.clone(),
            nonterminals: self.nonterminals.clone(),
            terminals: self.terminals.clone(),
            rules: merged,
        }
    }

    /// Same rules, replaced in place; symbol sets are recomputed but keep
    /// every previously declared symbol.
    pub fn with_rules(&self, rules: Vec<Rule<W>>) -> Result<Grammar<W>> {
        Grammar::with_symbols(self.start.clone(), self.symbols().cloned(), rules)
    }

    /// Map weights into another semiring.
    pub fn map_weights<U: Semiring>(&self, mut f: impl FnMut(&W) -> U) -> Grammar<U> {
        Grammar {
            start: self.start.clone(),
            nonterminals: self.nonterminals.clone(),
            terminals: self.terminals.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| Rule::new(r.lhs.clone(), r.rhs.clone(), f(&r.weight)))
                .collect(),
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::semiring::Boolean;

    pub fn rule<W: Semiring>(lhs: &str, rhs: &[&str], w: W) -> Rule<W> {
        Rule::new(
            Symbol::nt(lhs),
            rhs.iter()
                .map(|s| match s.strip_prefix('\'') {
                    Some(t) => Symbol::t(t),
                    None => Symbol::nt(s),
                })
                .collect(),
            w,
        )
    }

    /// The possessive grammar: S→NP VP; NP→PossP NN; PossP→NP 's;
    /// NP→my-sister; NN→diploma; VP→arrived.
    pub fn possessive_with<W: Semiring>(w: impl Fn(usize) -> W) -> Grammar<W> {
        Grammar::new(
            Symbol::nt("S"),
            vec![
                rule("S", &["NP", "VP"], w(0)),
                rule("NP", &["PossP", "NN"], w(1)),
                rule("PossP", &["NP", "''s"], w(2)),
                rule("NP", &["'my-sister"], w(3)),
                rule("NN", &["'diploma"], w(4)),
                rule("VP", &["'arrived"], w(5)),
            ],
        )
        .unwrap()
    }

    pub fn possessive() -> Grammar<Boolean> {
        possessive_with(|_| Boolean(true))
    }
}
