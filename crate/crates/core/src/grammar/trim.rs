use std::collections::{HashMap, HashSet};

use super::{Grammar, Symbol};
use crate::semiring::Semiring;

/// Remove useless symbols and rules: keep a rule only if its left-hand side
/// is reachable from the start symbol through kept rules and every symbol on
/// its right-hand side derives some string. Rules weighted `0̄` contribute
/// nothing and are dropped as well.
///
/// Runs in time linear in the grammar size.
pub fn trim<W: Semiring>(grammar: &Grammar<W>) -> Grammar<W> {
    let rules = grammar.rules();
    let live: Vec<bool> = rules.iter().map(|r| !r.weight.is_zero()).collect();

    // productivity: count unproductive rhs occurrences per rule
    let mut pending: Vec<usize> = vec![0; rules.len()];
    let mut uses: HashMap<&Symbol, Vec<usize>> = HashMap::new();
    let mut productive: HashSet<&Symbol> = HashSet::new();
    let mut queue: Vec<&Symbol> = Vec::new();
    for (ri, r) in rules.iter().enumerate() {
        if !live[ri] {
            continue;
        }
        for s in &r.rhs {
            if s.is_nonterminal() {
                pending[ri] += 1;
                uses.entry(s).or_default().push(ri);
            }
        }
        if pending[ri] == 0 && productive.insert(&r.lhs) {
            queue.push(&r.lhs);
        }
    }
    while let Some(s) = queue.pop() {
        for &ri in uses.get(s).map(Vec::as_slice).unwrap_or(&[]) {
            pending[ri] -= 1;
            if pending[ri] == 0 && productive.insert(&rules[ri].lhs) {
                queue.push(&rules[ri].lhs);
            }
        }
    }
    let useful_rule = |ri: usize| live[ri] && pending[ri] == 0;

    // reachability through fully productive rules
    let mut by_lhs: HashMap<&Symbol, Vec<usize>> = HashMap::new();
    for (ri, r) in rules.iter().enumerate() {
        if useful_rule(ri) {
            by_lhs.entry(&r.lhs).or_default().push(ri);
        }
    }
    let mut reachable: HashSet<&Symbol> = HashSet::new();
    let mut stack = vec![grammar.start()];
    reachable.insert(grammar.start());
    while let Some(s) = stack.pop() {
        for &ri in by_lhs.get(s).map(Vec::as_slice).unwrap_or(&[]) {
            for c in &rules[ri].rhs {
                if c.is_nonterminal() && reachable.insert(c) {
                    stack.push(c);
                }
            }
        }
    }

    let kept = rules
        .iter()
        .enumerate()
        .filter(|(ri, r)| useful_rule(*ri) && reachable.contains(&r.lhs))
        .map(|(_, r)| r.clone())
        .collect();
    Grammar::new(grammar.start().clone(), kept).expect("subset of a valid grammar")
}
