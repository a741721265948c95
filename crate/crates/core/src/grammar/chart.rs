//! Inside (chart) computation of string weights.
//!
//! Nullary rules are allowed as long as every yield has finitely many
//! derivations. That holds exactly when the two "span preserving"
//! dependency graphs are acyclic:
//!
//! - among nullable symbols, `X → α` whenever a rule `X → … α …` has an
//!   all-nullable right-hand side;
//! - among symbols deriving a nonempty string, `X → α` whenever a rule
//!   `X → … α …` has only nullable symbols besides `α`.
//!
//! Both are checked up front, and their topological orders drive the chart.

use std::collections::HashMap;

use super::{Grammar, Symbol};
use crate::error::{Error, Result};
use crate::semiring::Semiring;

/// Precomputed analysis of a grammar for repeated string-weight queries.
#[derive(Debug)]
pub struct WeightOracle<'g, W> {
    grammar: &'g Grammar<W>,
    index: HashMap<&'g Symbol, usize>,
    symbols: Vec<&'g Symbol>,
    /// Rule indices by lhs index.
    rules_of: Vec<Vec<usize>>,
    null: Vec<W>,
    /// Nonterminals that derive some nonempty string, children first.
    order: Vec<usize>,
}

/// Inside weights of every nonterminal over every span of one string.
#[derive(Debug)]
pub struct Inside<'o, 'g, W> {
    oracle: &'o WeightOracle<'g, W>,
    input: Vec<Symbol>,
    n: usize,
    /// `table[(sym * (n+1) + i) * (n+1) + j]` for `i < j`.
    table: Vec<W>,
}

impl<'g, W: Semiring> WeightOracle<'g, W> {
    pub fn new(grammar: &'g Grammar<W>) -> Result<Self> {
        let symbols: Vec<&Symbol> = grammar.nonterminals().iter().collect();
        let index: HashMap<&Symbol, usize> = symbols.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let n = symbols.len();
        let mut rules_of = vec![Vec::new(); n];
        for (ri, r) in grammar.rules().iter().enumerate() {
            rules_of[index[&r.lhs]].push(ri);
        }
        let mut oracle = WeightOracle {
            grammar,
            index,
            symbols,
            rules_of,
            null: vec![W::zero(); n],
            order: Vec::new(),
        };
        let nullable = oracle.nullable_set();
        oracle.null = oracle.null_weights(&nullable)?;
        oracle.order = oracle.unit_order(&nullable)?;
        Ok(oracle)
    }

    pub fn grammar(&self) -> &'g Grammar<W> {
        self.grammar
    }

    fn idx(&self, s: &Symbol) -> Option<usize> {
        if s.is_terminal() {
            None
        } else {
            self.index.get(s).copied()
        }
    }

    fn nullable_set(&self) -> Vec<bool> {
        let mut nullable = vec![false; self.symbols.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for r in self.grammar.rules() {
                let lhs = self.index[&r.lhs];
                if nullable[lhs] {
                    continue;
                }
                if r.rhs.iter().all(|s| self.idx(s).is_some_and(|i| nullable[i])) {
                    nullable[lhs] = true;
                    changed = true;
                }
            }
        }
        nullable
    }

    fn null_weights(&self, nullable: &[bool]) -> Result<Vec<W>> {
        let n = self.symbols.len();
        // edges X -> child among all-nullable rules
        let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
        for r in self.grammar.rules() {
            let lhs = self.index[&r.lhs];
            if !nullable[lhs] {
                continue;
            }
            let kids: Option<Vec<usize>> = r.rhs.iter().map(|s| self.idx(s)).collect();
            if let Some(kids) = kids {
                if kids.iter().all(|&k| nullable[k]) {
                    deps[lhs].extend(kids);
                }
            }
        }
        let active: Vec<usize> = (0..n).filter(|&i| nullable[i]).collect();
        let order = topo_children_first(&deps, &active)
            .map_err(|i| Error::UnboundedDerivations(format!("{} derives ε through a cycle", self.symbols[i])))?;
        let mut null = vec![W::zero(); n];
        for x in order {
            let mut total = W::zero();
            for &ri in &self.rules_of[x] {
                let r = &self.grammar.rules()[ri];
                let mut w = r.weight.clone();
                for s in &r.rhs {
                    match self.idx(s) {
                        Some(k) if nullable[k] => w = w.times(&null[k]),
                        _ => w = W::zero(),
                    }
                }
                total = total.plus(&w);
            }
            null[x] = total;
        }
        Ok(null)
    }

    fn unit_order(&self, nullable: &[bool]) -> Result<Vec<usize>> {
        let n = self.symbols.len();
        // nonempty-productive: derives a string of length >= 1
        let mut productive = vec![false; n];
        let mut changed = true;
        let derives = |s: &Symbol, p: &[bool]| match self.idx(s) {
            None => (s.is_terminal(), s.is_terminal()),
            Some(k) => (p[k] || nullable[k], p[k]),
        };
        while changed {
            changed = false;
            for r in self.grammar.rules() {
                let lhs = self.index[&r.lhs];
                if productive[lhs] {
                    continue;
                }
                let mut all = true;
                let mut some = false;
                for s in &r.rhs {
                    let (ok, nonempty) = derives(s, &productive);
                    all &= ok;
                    some |= nonempty;
                }
                if all && some {
                    productive[lhs] = true;
                    changed = true;
                }
            }
        }
        let is_null = |s: &Symbol| self.idx(s).is_some_and(|k| nullable[k]);
        let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n];
        for r in self.grammar.rules() {
            let lhs = self.index[&r.lhs];
            if !productive[lhs] {
                continue;
            }
            for (m, s) in r.rhs.iter().enumerate() {
                let Some(k) = self.idx(s) else { continue };
                if !productive[k] {
                    continue;
                }
                let others_nullable = r.rhs.iter().enumerate().all(|(p, o)| p == m || is_null(o));
                if others_nullable {
                    deps[lhs].push(k);
                }
            }
        }
        let active: Vec<usize> = (0..n).filter(|&i| productive[i]).collect();
        topo_children_first(&deps, &active).map_err(|i| {
            Error::UnboundedDerivations(format!(
                "{} rewrites to itself without consuming input",
                self.symbols[i]
            ))
        })
    }

    /// `G_X(ε)` for a nonterminal (`0̄` for terminals).
    pub fn null_weight(&self, s: &Symbol) -> W {
        self.idx(s).map(|i| self.null[i].clone()).unwrap_or_else(W::zero)
    }

    /// Fill the chart for `input`.
    pub fn inside<'o>(&'o self, input: &[Symbol]) -> Inside<'o, 'g, W> {
        let n = input.len();
        let width = n + 1;
        let mut table = vec![W::zero(); self.symbols.len() * width * width];
        let at = |sym: usize, i: usize, j: usize| (sym * width + i) * width + j;
        for len in 1..=n {
            for i in 0..=(n - len) {
                let j = i + len;
                for &x in &self.order {
                    let mut total = W::zero();
                    for &ri in &self.rules_of[x] {
                        let r = &self.grammar.rules()[ri];
                        if r.rhs.is_empty() {
                            continue;
                        }
                        // prefix[m - i]: weight of rhs[..p] spanning i..m
                        let mut prefix: Vec<W> = vec![W::zero(); len + 1];
                        prefix[0] = W::one();
                        for s in &r.rhs {
                            let mut next = vec![W::zero(); len + 1];
                            for l in i..=j {
                                let left = &prefix[l - i];
                                if left.is_zero() {
                                    continue;
                                }
                                for m in l..=j {
                                    let val = if l == m {
                                        self.null_weight(s)
                                    } else {
                                        match self.idx(s) {
                                            None => {
                                                if m == l + 1 && input[l] == *s {
                                                    W::one()
                                                } else {
                                                    W::zero()
                                                }
                                            }
                                            Some(k) => table[at(k, l, m)].clone(),
                                        }
                                    };
                                    if val.is_zero() {
                                        continue;
                                    }
                                    let add = left.times(&val);
                                    next[m - i] = next[m - i].plus(&add);
                                }
                            }
                            prefix = next;
                        }
                        total = total.plus(&r.weight.times(&prefix[len]));
                    }
                    table[at(x, i, j)] = total;
                }
            }
        }
        Inside {
            oracle: self,
            input: input.to_vec(),
            n,
            table,
        }
    }

    /// `G_α(x)`.
    pub fn weight(&self, sym: &Symbol, input: &[Symbol]) -> W {
        self.inside(input).span(sym, 0, input.len())
    }
}

impl<W: Semiring> Inside<'_, '_, W> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Weight of `sym` deriving `input[i..j]`.
    pub fn span(&self, sym: &Symbol, i: usize, j: usize) -> W {
        assert!(i <= j && j <= self.n);
        if i == j {
            return self.oracle.null_weight(sym);
        }
        match self.oracle.idx(sym) {
            None => {
                if sym.is_terminal() && j == i + 1 && self.input[i] == *sym {
                    W::one()
                } else {
                    W::zero()
                }
            }
            Some(k) => {
                let width = self.n + 1;
                self.table[(k * width + i) * width + j].clone()
            }
        }
    }
}

/// Topological order of `active` nodes with children before parents; on a
/// cycle returns one node on it.
fn topo_children_first(deps: &[Vec<usize>], active: &[usize]) -> std::result::Result<Vec<usize>, usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut is_active = vec![false; deps.len()];
    for &a in active {
        is_active[a] = true;
    }
    let mut mark = vec![Mark::New; deps.len()];
    let mut order = Vec::with_capacity(active.len());
    for &root in active {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < deps[node].len() {
                let child = deps[node][*next];
                *next += 1;
                if !is_active[child] {
                    continue;
                }
                match mark[child] {
                    Mark::New => {
                        mark[child] = Mark::Open;
                        stack.push((child, 0));
                    }
                    Mark::Open => return Err(child),
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                order.push(node);
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// `G_α(x)`: the `⊕`-sum of the weights of every derivation of `α` with
/// yield `x`.
///
/// Fails with [`Error::UnboundedDerivations`] when some yield has
/// infinitely many derivations (an ε-cycle or a cycle of unit rewrites).
pub fn string_weight<W: Semiring>(grammar: &Grammar<W>, sym: &Symbol, input: &[Symbol]) -> Result<W> {
    if sym.is_terminal() {
        return Ok(if input.len() == 1 && input[0] == *sym {
            W::one()
        } else {
            W::zero()
        });
    }
    if !grammar.nonterminals().contains(sym) {
        return Ok(W::zero());
    }
    Ok(WeightOracle::new(grammar)?.weight(sym, input))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::semiring::{Boolean, Real};

    fn words(ws: &[&str]) -> Vec<Symbol> {
        ws.iter().map(|w| Symbol::t(w)).collect()
    }

    #[test]
    fn possessive_sentence() {
        let g = possessive();
        let x = words(&["my-sister", "'s", "diploma", "arrived"]);
        assert_eq!(string_weight(&g, &Symbol::nt("S"), &x).unwrap(), Boolean(true));
        assert_eq!(
            string_weight(&g, &Symbol::nt("S"), &words(&["arrived"])).unwrap(),
            Boolean(false)
        );
        let half = possessive_with(|_| Real(0.5));
        let w = string_weight(&half, &Symbol::nt("S"), &x).unwrap();
        assert!(w.approx_eq(&Real(0.015625)));
    }

    #[test]
    fn ambiguity_sums() {
        // S -> S S | a, "a a a" has two derivations (Catalan(2))
        let g = Grammar::new(
            Symbol::nt("S"),
            vec![rule("S", &["S", "S"], Real(0.5)), rule("S", &["'a"], Real(0.5))],
        )
        .unwrap();
        let w = string_weight(&g, &Symbol::nt("S"), &words(&["a", "a", "a"])).unwrap();
        assert!(w.approx_eq(&Real(2.0 * 0.5f64.powi(5))));
    }

    #[test]
    fn nullable_children_are_folded_in() {
        // S -> A B 'c', A -> ε (0.5), A -> 'a', B -> ε (0.25)
        let g = Grammar::new(
            Symbol::nt("S"),
            vec![
                rule("S", &["A", "B", "'c"], Real(1.0)),
                rule("A", &[], Real(0.5)),
                rule("A", &["'a"], Real(1.0)),
                rule("B", &[], Real(0.25)),
            ],
        )
        .unwrap();
        let o = WeightOracle::new(&g).unwrap();
        assert!(o.weight(&Symbol::nt("S"), &words(&["c"])).approx_eq(&Real(0.125)));
        assert!(o.weight(&Symbol::nt("S"), &words(&["a", "c"])).approx_eq(&Real(0.25)));
        assert!(o.weight(&Symbol::nt("A"), &[]).approx_eq(&Real(0.5)));
    }

    #[test]
    fn unit_cycle_is_rejected() {
        let g = Grammar::new(
            Symbol::nt("A"),
            vec![
                rule("A", &["B"], Boolean(true)),
                rule("B", &["A"], Boolean(true)),
                rule("A", &["'a"], Boolean(true)),
            ],
        )
        .unwrap();
        assert!(matches!(WeightOracle::new(&g), Err(Error::UnboundedDerivations(_))));
    }

    #[test]
    fn epsilon_cycle_is_rejected() {
        let g = Grammar::new(
            Symbol::nt("S"),
            vec![rule("S", &["S", "S"], Real(0.6)), rule("S", &[], Real(0.4))],
        )
        .unwrap();
        assert!(matches!(WeightOracle::new(&g), Err(Error::UnboundedDerivations(_))));
    }

    #[test]
    fn unproductive_unit_cycle_is_harmless() {
        let g = Grammar::new(
            Symbol::nt("S"),
            vec![
                rule("S", &["'a"], Boolean(true)),
                rule("B", &["C"], Boolean(true)),
                rule("C", &["B"], Boolean(true)),
            ],
        )
        .unwrap();
        assert!(WeightOracle::new(&g).is_ok());
    }
}
