//! Null weights, nullary-rule and unary-rule elimination, binarization.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::grammar::text::symbol_to_string;
use crate::grammar::{Grammar, Rule, Symbol};
use crate::leftrec::strongly_connected;
use crate::semiring::{Matrix, Semiring};

/// `G_X(ε)` for every nonterminal.
pub type NullWeights<W> = BTreeMap<Symbol, W>;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Fixed-point iteration from the all-`0̄` vector; stops once no entry
/// moves by more than `tol`.
pub fn null_weights_fixed_point<W: Semiring>(g: &Grammar<W>, max_iters: usize, tol: f64) -> Result<NullWeights<W>> {
    null_weights_iterate(g, max_iters, tol).map(|(w, _)| w)
}

/// Like [`null_weights_fixed_point`], also returning the iteration count.
pub fn null_weights_iterate<W: Semiring>(
    g: &Grammar<W>,
    max_iters: usize,
    tol: f64,
) -> Result<(NullWeights<W>, usize)> {
    let system = NullSystem::new(g);
    let mut cur = vec![W::zero(); system.symbols.len()];
    for iter in 1..=max_iters {
        let next = system.step(&cur);
        let done = next.iter().zip(&cur).all(|(a, b)| a.distance(b) <= tol);
        cur = next;
        if done {
            return Ok((system.to_map(cur), iter));
        }
    }
    Err(Error::NoConvergence { iterations: max_iters })
}

/// The first `count` iterates of the fixed-point iteration, starting after
/// the all-`0̄` vector.
pub fn null_weight_iterates<W: Semiring>(g: &Grammar<W>, count: usize) -> Vec<NullWeights<W>> {
    let system = NullSystem::new(g);
    let mut cur = vec![W::zero(); system.symbols.len()];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        cur = system.step(&cur);
        out.push(system.to_map(cur.clone()));
    }
    out
}

/// The polynomial system `x_X = ⊕_{X → Y⃗} w ⊗ ⊗ x_Y` over the rules whose
/// right-hand sides hold nonterminals only; other rules never derive `ε`.
struct NullSystem<'g, W> {
    symbols: Vec<&'g Symbol>,
    rules: Vec<(usize, W, Vec<usize>)>,
}

impl<'g, W: Semiring> NullSystem<'g, W> {
    fn new(g: &'g Grammar<W>) -> Self {
        let symbols: Vec<&Symbol> = g.nonterminals().iter().collect();
        let index: HashMap<&Symbol, usize> = symbols.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let rules = g
            .rules()
            .iter()
            .filter(|r| r.rhs.iter().all(Symbol::is_nonterminal))
            .map(|r| {
                (
                    index[&r.lhs],
                    r.weight.clone(),
                    r.rhs.iter().map(|s| index[s]).collect(),
                )
            })
            .collect();
        NullSystem { symbols, rules }
    }

    fn step(&self, cur: &[W]) -> Vec<W> {
        let mut next = vec![W::zero(); cur.len()];
        for (lhs, w, rhs) in &self.rules {
            let term = rhs.iter().fold(w.clone(), |acc, &k| acc.times(&cur[k]));
            next[*lhs] = next[*lhs].plus(&term);
        }
        next
    }

    fn to_map(&self, values: Vec<W>) -> NullWeights<W> {
        self.symbols.iter().map(|s| (*s).clone()).zip(values).collect()
    }
}

/// Check the structure that makes the null-weight system linear: only
/// slashed symbols have nullary rules, and a rule whose right-hand side is
/// made of slashed symbols only is a unary rule with a slashed left-hand
/// side.
pub fn check_glct_shape<W: Semiring>(g: &Grammar<W>) -> Result<()> {
    let slashed = |s: &Symbol| matches!(s, Symbol::Slashed(..));
    for r in g.rules() {
        if r.rhs.is_empty() && !slashed(&r.lhs) {
            return Err(Error::NotGlctShape(format!(
                "nullary rule {r} has an unslashed left-hand side"
            )));
        }
        if !r.rhs.is_empty() && r.rhs.iter().all(slashed) && (r.rhs.len() > 1 || !slashed(&r.lhs)) {
            return Err(Error::NotGlctShape(format!(
                "rule {r} makes the null-weight system nonlinear"
            )));
        }
    }
    Ok(())
}

/// Exact null weights of a left-corner transform output: `[W* v]`, where
/// `W` holds the unary slashed-to-slashed rule weights and `v` the nullary
/// ones. Strongly connected blocks of `W` are closed one at a time,
/// dependencies first, so acyclic systems cost linear time.
pub fn null_weights_glct<W: Semiring>(g: &Grammar<W>) -> Result<NullWeights<W>> {
    check_glct_shape(g)?;
    let slashed: Vec<&Symbol> = g
        .nonterminals()
        .iter()
        .filter(|s| matches!(s, Symbol::Slashed(..)))
        .collect();
    let index: HashMap<&Symbol, usize> = slashed.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let n = slashed.len();
    let mut v = vec![W::zero(); n];
    let mut out: Vec<Vec<(usize, W)>> = vec![Vec::new(); n];
    for r in g.rules() {
        let Some(&lhs) = index.get(&r.lhs) else { continue };
        match r.rhs.as_slice() {
            [] => v[lhs] = v[lhs].plus(&r.weight),
            [only] => {
                if let Some(&rhs) = index.get(only) {
                    out[lhs].push((rhs, r.weight.clone()));
                }
            }
            _ => {}
        }
    }
    let adjacency: Vec<Vec<usize>> = out.iter().map(|es| es.iter().map(|(j, _)| *j).collect()).collect();
    let sccs = strongly_connected(&adjacency);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sccs.count];
    for i in 0..n {
        members[sccs.component[i]].push(i);
    }
    let mut local = vec![0usize; n];
    let mut result = vec![W::zero(); n];
    // component ids are in reverse topological order: dependencies first
    for (c, m) in members.iter().enumerate() {
        for (k, &i) in m.iter().enumerate() {
            local[i] = k;
        }
        let mut block = Matrix::zeros(m.len());
        let mut cyclic = false;
        let b: Vec<W> = m
            .iter()
            .map(|&i| {
                let mut acc = v[i].clone();
                for (j, w) in &out[i] {
                    if sccs.component[*j] == c {
                        block.add_to(local[i], local[*j], w);
                        cyclic = true;
                    } else {
                        acc = acc.plus(&w.times(&result[*j]));
                    }
                }
                acc
            })
            .collect();
        let solved = if cyclic { block.star()?.apply(&b) } else { b };
        for (k, w) in solved.into_iter().enumerate() {
            if w.is_divergent() {
                return Err(Error::StarDivergence(format!(
                    "null weight of {} diverges",
                    slashed[m[k]]
                )));
            }
            result[m[k]] = w;
        }
    }
    Ok(g.nonterminals()
        .iter()
        .map(|s| {
            let w = index.get(s).map_or_else(W::zero, |&i| result[i].clone());
            (s.clone(), w)
        })
        .collect())
}

/// A nullary-free grammar plus the start symbol's ε weight, which has no
/// rule to live in.
#[derive(Clone, Debug, PartialEq)]
pub struct NullaryFree<W> {
    pub grammar: Grammar<W>,
    pub start_null_weight: W,
}

/// Null weights by the exact linear method when the grammar has the shape
/// it needs, otherwise by fixed-point iteration with default settings.
pub fn null_weights<W: Semiring>(g: &Grammar<W>) -> Result<NullWeights<W>> {
    if check_glct_shape(g).is_ok() {
        null_weights_glct(g)
    } else {
        null_weights_fixed_point(g, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE)
    }
}

/// Remove nullary rules: each rule is replaced by one copy per subset of
/// its nullable positions dropped, weighted by the dropped null weights.
/// Copies of one rule with the same result are merged by `⊕`. String
/// weights are unchanged on nonempty strings.
pub fn eliminate_nullary<W: Semiring>(g: &Grammar<W>) -> Result<NullaryFree<W>> {
    let null = null_weights(g)?;
    let weight_of = |s: &Symbol| null.get(s).filter(|w| !w.is_zero());
    let mut rules = Vec::new();
    for r in g.rules() {
        if r.rhs.is_empty() {
            continue;
        }
        let nullable: Vec<usize> = (0..r.rhs.len()).filter(|&i| weight_of(&r.rhs[i]).is_some()).collect();
        if nullable.len() >= usize::BITS as usize {
            return Err(Error::InvalidArgument(format!(
                "rule {r} has too many nullable positions to expand"
            )));
        }
        let mut out: Vec<Rule<W>> = Vec::new();
        for mask in 0u64..(1u64 << nullable.len()) {
            let mut w = r.weight.clone();
            let mut drop = vec![false; r.rhs.len()];
            for (bit, &pos) in nullable.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    drop[pos] = true;
                    w = w.times(weight_of(&r.rhs[pos]).unwrap());
                }
            }
            let rhs: Vec<Symbol> = r
                .rhs
                .iter()
                .zip(&drop)
                .filter(|(_, d)| !**d)
                .map(|(s, _)| s.clone())
                .collect();
            if rhs.is_empty() || w.is_zero() {
                continue;
            }
            match out.iter_mut().find(|o| o.rhs == rhs) {
                Some(o) => o.weight = o.weight.plus(&w),
                None => out.push(Rule::new(r.lhs.clone(), rhs, w)),
            }
        }
        rules.extend(out);
    }
    Ok(NullaryFree {
        grammar: g.with_rules(rules)?,
        start_null_weight: null.get(g.start()).cloned().unwrap_or_else(W::zero),
    })
}

/// Remove nonterminal-unary rules by composing their closure `U*` into
/// every other rule: `X → α⃗` gets `U*[X][Y] ⊗ w` for each `Y → α⃗` (w).
pub fn eliminate_unary_cycles<W: Semiring>(g: &Grammar<W>) -> Result<Grammar<W>> {
    let mut involved: Vec<&Symbol> = Vec::new();
    let mut index: HashMap<&Symbol, usize> = HashMap::new();
    for (_, r) in g.nonterminal_unary_rules() {
        for s in [&r.lhs, &r.rhs[0]] {
            if !index.contains_key(s) {
                index.insert(s, involved.len());
                involved.push(s);
            }
        }
    }
    if involved.is_empty() {
        return Ok(g.clone());
    }
    // symbol order for deterministic output
    let mut order: Vec<usize> = (0..involved.len()).collect();
    order.sort_by(|&a, &b| involved[a].cmp(involved[b]));
    let mut u = Matrix::zeros(involved.len());
    for (_, r) in g.nonterminal_unary_rules() {
        u.add_to(index[&r.lhs], index[&r.rhs[0]], &r.weight);
    }
    let closure = u.star()?;
    let mut rules = Vec::new();
    for r in g.rules() {
        if r.is_nonterminal_unary() {
            continue;
        }
        let Some(&y) = index.get(&r.lhs) else {
            rules.push(r.clone());
            continue;
        };
        for &x in &order {
            let c = closure.get(x, y);
            if c.is_zero() {
                continue;
            }
            rules.push(Rule::new(involved[x].clone(), r.rhs.clone(), c.times(&r.weight)));
        }
    }
    g.with_rules(rules)
}

/// Fold right-hand sides longer than two into chains of fresh nonterminals
/// named after the folded suffix: `X → a b c` becomes `X → a ⟨b.c⟩` and
/// `⟨b.c⟩ → b c` (weight `1̄`). Chains are shared between rules.
pub fn binarize<W: Semiring>(g: &Grammar<W>) -> Grammar<W> {
    let mut taken: HashSet<String> = g
        .nonterminals()
        .iter()
        .filter_map(|s| match s {
            Symbol::Nonterminal(n) => Some(n.to_string()),
            _ => None,
        })
        .collect();
    let mut chains: HashMap<Vec<Symbol>, Symbol> = HashMap::new();
    let mut rules = Vec::new();
    for r in g.rules() {
        if r.rhs.len() <= 2 {
            rules.push(r.clone());
            continue;
        }
        let mut pending = Vec::new();
        let suffix_symbol = |suffix: &[Symbol],
                             chains: &mut HashMap<Vec<Symbol>, Symbol>,
                             taken: &mut HashSet<String>,
                             pending: &mut Vec<Vec<Symbol>>| {
            if let Some(s) = chains.get(suffix) {
                return (s.clone(), false);
            }
            let parts: Vec<String> = suffix.iter().map(|s| symbol_to_string(s, true)).collect();
            let mut name = format!("⟨{}⟩", parts.join("."));
            while !taken.insert(name.clone()) {
                name.push('\'');
            }
            let sym = Symbol::nt(&name);
            chains.insert(suffix.to_vec(), sym.clone());
            pending.push(suffix.to_vec());
            (sym, true)
        };
        let (first, _) = suffix_symbol(&r.rhs[1..], &mut chains, &mut taken, &mut pending);
        rules.push(Rule::new(
            r.lhs.clone(),
            vec![r.rhs[0].clone(), first],
            r.weight.clone(),
        ));
        while let Some(suffix) = pending.pop() {
            let lhs = chains[&suffix].clone();
            let rhs = if suffix.len() == 2 {
                suffix.clone()
            } else {
                let (next, _) = suffix_symbol(&suffix[1..], &mut chains, &mut taken, &mut pending);
                vec![suffix[0].clone(), next]
            };
            rules.push(Rule::new(lhs, rhs, W::one()));
        }
    }
    g.with_rules(rules).expect("binarized rules reuse valid symbols")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::text::read_wcfg;
    use crate::grammar::{equivalence_check, EquivalenceOptions};
    use crate::semiring::{Boolean, Real};
    use crate::transform::{glct, TransformParams};

    fn real(text: &str) -> Grammar<Real> {
        read_wcfg(text).unwrap()
    }

    #[test]
    fn fixed_point_examples() {
        let g = real("start: S\nS -> 'a'\n");
        let (w, iters) = null_weights_iterate(&g, 100, 1e-12).unwrap();
        assert_eq!(iters, 1);
        assert_eq!(w[&Symbol::nt("S")], Real(0.0));

        let g = real("start: S\n0.4: S -> ε\n0.6: S -> S S\n");
        let w = null_weights_fixed_point(&g, 10_000, 1e-12).unwrap();
        assert!(w[&Symbol::nt("S")].approx_eq(&Real(2.0 / 3.0)));

        let b: Grammar<Boolean> = read_wcfg("start: S\nS -> A B\nA -> ε\nB -> ε\n").unwrap();
        let w = null_weights_fixed_point(&b, 100, 0.0).unwrap();
        assert_eq!(w[&Symbol::nt("S")], Boolean(true));

        let slow = real("start: S\n0.4: S -> ε\n0.6: S -> S S\n");
        assert!(matches!(
            null_weights_fixed_point(&slow, 3, 1e-12),
            Err(Error::NoConvergence { iterations: 3 })
        ));
    }

    #[test]
    fn fast_path_on_the_possessive_grammar() {
        let g = real(
            "start: S\nS -> NP VP\nNP -> PossP NN\nPossP -> NP '\\'s'\n\
             NP -> 'my-sister'\nNN -> 'diploma'\nVP -> 'arrived'\n",
        );
        let p = TransformParams::new(&g, [0, 1, 2], [Symbol::nt("NP")]).unwrap();
        let out = glct(&g, &p).unwrap();
        let fast = null_weights_glct(&out).unwrap();
        let ones: Vec<&Symbol> = fast.iter().filter(|(_, w)| !w.is_zero()).map(|(s, _)| s).collect();
        assert_eq!(ones.len(), 9);
        for s in ones {
            let Symbol::Slashed(num, den, _) = s else { panic!("{s}") };
            assert_eq!(num, den);
            assert_eq!(fast[s], Real(1.0));
        }
        let slow = null_weights_fixed_point(&out, 10_000, 1e-12).unwrap();
        for (s, w) in &fast {
            assert!(w.approx_eq(&slow[s]), "{s}");
        }
    }

    #[test]
    fn fast_path_follows_unary_p_rules() {
        let g = real("start: A\n0.5: A -> B\nB -> 'b'\nA -> A 'a'\n");
        let p = TransformParams::new(&g, [0, 2], [Symbol::nt("B")]).unwrap();
        let out = glct(&g, &p).unwrap();
        let fast = null_weights_glct(&out).unwrap();
        let a = Symbol::nt("A");
        let b = Symbol::nt("B");
        // A/B -> A/A (0.5) and A/A -> ε
        assert_eq!(fast[&p.slashed(&a, &b)], Real(0.5));
        let slow = null_weights_fixed_point(&out, 10_000, 1e-12).unwrap();
        for (s, w) in &fast {
            assert!(w.approx_eq(&slow[s]), "{s}");
        }
    }

    #[test]
    fn fast_path_rejects_other_shapes() {
        let g = real("start: S\nS -> ε\n");
        assert!(matches!(null_weights_glct(&g), Err(Error::NotGlctShape(_))));
    }

    #[test]
    fn nullary_elimination() {
        let g = real("start: S\nS -> A 'b'\nA -> 'a'\n");
        assert_eq!(eliminate_nullary(&g).unwrap().grammar, g);

        let g = real("start: S\nS -> A 'b' A\n0.5: A -> ε\n0.5: A -> 'a'\n0.25: S -> ε\n");
        let nf = eliminate_nullary(&g).unwrap();
        assert_eq!(nf.grammar.nullary_rules().count(), 0);
        assert_eq!(nf.start_null_weight, Real(0.25));
        assert_eq!(nf.grammar.rule_count(), 5);
        let r = equivalence_check(&g, &nf.grammar, EquivalenceOptions::nonempty_up_to(4)).unwrap();
        assert!(r.is_equivalent(), "{r}");
    }

    #[test]
    fn duplicate_drops_merge() {
        let g = real("start: S\nS -> A A\n0.5: A -> ε\n0.5: A -> 'a'\n");
        let nf = eliminate_nullary(&g).unwrap().grammar;
        let unary: Vec<&Rule<Real>> = nf
            .rules()
            .iter()
            .filter(|r| r.lhs == Symbol::nt("S") && r.rhs.len() == 1)
            .collect();
        assert_eq!(unary.len(), 1);
        assert_eq!(unary[0].weight, Real(1.0));
    }

    #[test]
    fn unary_elimination() {
        let g = real("start: A\n0.5: A -> B\n0.5: B -> A\nA -> 'a'\n");
        let out = eliminate_unary_cycles(&g).unwrap();
        assert_eq!(out.nonterminal_unary_rules().count(), 0);
        let a_rule = out.rules().iter().find(|r| r.lhs == Symbol::nt("A")).unwrap();
        assert!(a_rule.weight.approx_eq(&Real(4.0 / 3.0)));
        let r = equivalence_check(&g, &out, EquivalenceOptions::up_to(1));
        assert!(r.is_err()); // the unary cycle makes the input unbounded

        let b: Grammar<Boolean> = read_wcfg("start: A\nA -> B\nB -> A\nA -> 'a'\nB -> 'b'\n").unwrap();
        let out = eliminate_unary_cycles(&b).unwrap();
        assert_eq!(out.rule_count(), 4);

        let free = real("start: S\nS -> 'a' S\nS -> 'b'\n");
        assert_eq!(eliminate_unary_cycles(&free).unwrap(), free);

        let div = real("start: A\nA -> A\nA -> 'a'\n");
        assert!(matches!(eliminate_unary_cycles(&div), Err(Error::StarDivergence(_))));
    }

    #[test]
    fn binarization() {
        let g = real("start: X\n0.5: X -> 'a' 'b' 'c'\n");
        let b = binarize(&g);
        let text = crate::grammar::text::write_wcfg(&b);
        assert!(text.contains("0.5: X -> 'a' \"⟨'b'.'c'⟩\"\n"), "{text}");
        assert!(text.contains("1: \"⟨'b'.'c'⟩\" -> 'b' 'c'\n"), "{text}");

        let g = real("start: X\nX -> A B C D\nY -> E B C D\nA -> 'a'\nB -> 'b'\nC -> 'c'\nD -> 'd'\nE -> 'e'\nX -> Y\n\"⟨B.C.D⟩\" -> 'z'\n");
        let b = binarize(&g);
        assert!(b.rules().iter().all(|r| r.rhs.len() <= 2));
        // X and Y share the chain, and the existing name is not reused
        assert_eq!(b.rule_count(), g.rule_count() + 2);
        let r = equivalence_check(&g, &b, EquivalenceOptions::up_to(5)).unwrap();
        assert!(r.is_equivalent(), "{r}");

        let binary = real("start: S\nS -> 'a' S\nS -> 'b'\n");
        assert_eq!(binarize(&binary), binary);
    }
}
