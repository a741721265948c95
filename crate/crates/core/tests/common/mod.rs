//! Random grammar generators and brute-force oracles shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use leftcorner::grammar::text::read_wcfg;
use leftcorner::transform::TransformParams;
use leftcorner::{Boolean, Derivation, Grammar, Real, Rule, Semiring, Symbol};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn g1() -> Grammar<Boolean> {
    read_wcfg(G1_TEXT).unwrap()
}

pub fn g1_real() -> Grammar<Real> {
    read_wcfg(G1_TEXT).unwrap()
}

pub const G1_TEXT: &str = "start: S\nS -> NP VP\nNP -> PossP NN\nPossP -> NP '\\'s'\n\
                           NP -> 'my-sister'\nNN -> 'diploma'\nVP -> 'arrived'\n";

pub fn g1_params<W: Semiring>(g: &Grammar<W>) -> TransformParams {
    TransformParams::new(g, [0, 1, 2], [Symbol::nt("NP")]).unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_nonterminals: usize,
    pub max_rules: usize,
    pub terminals: usize,
    pub max_arity: usize,
    /// Allow `A -> B` rules; they always point to a later nonterminal, so
    /// unary cycles never arise.
    pub unary: bool,
    pub max_nullary: usize,
}

impl Shape {
    pub const SMALL: Shape = Shape {
        max_nonterminals: 5,
        max_rules: 10,
        terminals: 2,
        max_arity: 3,
        unary: true,
        max_nullary: 0,
    };

    pub fn unary_free(self) -> Shape {
        Shape { unary: false, ..self }
    }

    pub fn with_nonterminals(self, n: usize) -> Shape {
        Shape {
            max_nonterminals: n,
            ..self
        }
    }

    pub fn with_rules(self, n: usize) -> Shape {
        Shape { max_rules: n, ..self }
    }

    pub fn with_nullary(self, n: usize) -> Shape {
        Shape { max_nullary: n, ..self }
    }
}

pub fn nonterminal(i: usize) -> Symbol {
    Symbol::nt(&format!("N{i}"))
}

pub fn terminal(i: usize) -> Symbol {
    Symbol::t(&((b'a' + i as u8) as char).to_string())
}

/// Eighths in `(0, 1]`, exact in binary floating point.
pub fn real_weight(rng: &mut impl Rng) -> Real {
    Real(rng.gen_range(1..=8) as f64 / 8.0)
}

pub fn boolean_weight(_: &mut impl Rng) -> Boolean {
    Boolean(true)
}

/// A random grammar over `N0..Nk` and terminals `a, b, ...` with start
/// `N0`. Rules are distinct; most nonterminals get a terminal rule so the
/// grammar is rarely empty after trimming.
pub fn random_grammar<W: Semiring, R: Rng>(
    rng: &mut R,
    shape: Shape,
    mut weight: impl FnMut(&mut R) -> W,
) -> Grammar<W> {
    let n = rng.gen_range(1..=shape.max_nonterminals);
    let target = rng.gen_range(n.min(shape.max_rules)..=shape.max_rules);
    let mut shapes: BTreeSet<(usize, Vec<Symbol>)> = BTreeSet::new();
    let mut rules = Vec::new();
    let mut push = |lhs: usize, rhs: Vec<Symbol>, rules: &mut Vec<Rule<W>>, rng: &mut R| {
        if shapes.insert((lhs, rhs.clone())) {
            let w = weight(rng);
            rules.push(Rule::new(nonterminal(lhs), rhs, w));
        }
    };
    for lhs in 0..n {
        if rules.len() < target && rng.gen_bool(0.7) {
            let len = rng.gen_range(1..=2.min(shape.max_arity));
            let rhs = (0..len).map(|_| terminal(rng.gen_range(0..shape.terminals))).collect();
            push(lhs, rhs, &mut rules, rng);
        }
    }
    let nullary = rng.gen_range(0..=shape.max_nullary);
    for _ in 0..nullary {
        let lhs = rng.gen_range(0..n);
        push(lhs, Vec::new(), &mut rules, rng);
    }
    let mut attempts = 0;
    while rules.len() < target && attempts < 100 {
        attempts += 1;
        let lhs = rng.gen_range(0..n);
        let len = rng.gen_range(1..=shape.max_arity);
        let pick = |rng: &mut R| {
            if rng.gen_bool(0.7) {
                nonterminal(rng.gen_range(0..n))
            } else {
                terminal(rng.gen_range(0..shape.terminals))
            }
        };
        let mut rhs: Vec<Symbol> = (0..len).map(|_| pick(rng)).collect();
        if len == 1 && rhs[0].is_nonterminal() {
            if !shape.unary || lhs + 1 >= n {
                continue;
            }
            rhs[0] = nonterminal(rng.gen_range(lhs + 1..n));
        }
        push(lhs, rhs, &mut rules, rng);
    }
    rules.shuffle(rng);
    Grammar::with_symbols(nonterminal(0), (0..n).map(nonterminal), rules).unwrap()
}

/// Random valid parameters: each non-nullary rule joins `P` and each
/// symbol joins `X` with the given probabilities.
pub fn random_params<W: Semiring>(rng: &mut impl Rng, g: &Grammar<W>, p_rate: f64, x_rate: f64) -> TransformParams {
    let p: Vec<usize> = g
        .rules()
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.rhs.is_empty() && rng.gen_bool(p_rate))
        .map(|(i, _)| i)
        .collect();
    let x: Vec<Symbol> = g.symbols().filter(|_| rng.gen_bool(x_rate)).cloned().collect();
    TransformParams::new(g, p, x).unwrap()
}

pub fn random_rates(rng: &mut impl Rng) -> (f64, f64) {
    (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0))
}

/// Every string over `alphabet` of length at most `max_len`, shortest
/// first.
pub fn strings(alphabet: &[Symbol], max_len: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in alphabet {
                let mut t: Vec<Symbol> = s.clone();
                t.push(a.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `G_sym(x)` by leftmost rewriting of sentential forms. Needs a
/// nullary-free grammar without unary cycles, so every form longer than
/// `x` or with a mismatched terminal prefix can be pruned.
pub fn brute_string_weight<W: Semiring>(g: &Grammar<W>, sym: &Symbol, x: &[Symbol]) -> W {
    form_weight(g, std::slice::from_ref(sym), x)
}

/// Total weight of rewriting the sentential form `form` into `x`.
pub fn form_weight<W: Semiring>(g: &Grammar<W>, form: &[Symbol], x: &[Symbol]) -> W {
    assert_eq!(g.nullary_rules().count(), 0);
    let by_lhs = rules_by_lhs(g);
    let mut total = W::zero();
    let mut stack: Vec<(Vec<Symbol>, W)> = vec![(form.to_vec(), W::one())];
    while let Some((form, w)) = stack.pop() {
        if form.len() > x.len() {
            continue;
        }
        let Some(pos) = form.iter().position(Symbol::is_nonterminal) else {
            if form == x {
                total = total.plus(&w);
            }
            continue;
        };
        if form[..pos] != x[..pos] {
            continue;
        }
        for (_, r) in by_lhs.get(&form[pos]).into_iter().flatten() {
            let mut next = form[..pos].to_vec();
            next.extend(r.rhs.iter().cloned());
            next.extend(form[pos + 1..].iter().cloned());
            stack.push((next, w.times(&r.weight)));
        }
    }
    total
}

fn rules_by_lhs<W: Semiring>(g: &Grammar<W>) -> BTreeMap<&Symbol, Vec<(usize, &Rule<W>)>> {
    let mut by_lhs: BTreeMap<&Symbol, Vec<(usize, &Rule<W>)>> = BTreeMap::new();
    for (i, r) in g.rules().iter().enumerate() {
        by_lhs.entry(&r.lhs).or_default().push((i, r));
    }
    by_lhs
}

/// Weight of `x` over `α`-derivations of the source grammar whose spine
/// (the chain of `P` rules down the left edge) has no node in `X` below
/// the root. This is the language the transform assigns to `~α`.
pub fn frozen_oracle<W: Semiring>(g: &Grammar<W>, params: &TransformParams, alpha: &Symbol, x: &[Symbol]) -> W {
    if alpha.is_terminal() {
        return if x == std::slice::from_ref(alpha) {
            W::one()
        } else {
            W::zero()
        };
    }
    let by_lhs = rules_by_lhs(g);
    let mut total = W::zero();
    // (spine node, weight so far, pending siblings innermost first)
    let mut stack: Vec<(Symbol, W, Vec<Symbol>)> = vec![(alpha.clone(), W::one(), Vec::new())];
    while let Some((z, w, pending)) = stack.pop() {
        if pending.len() > x.len() {
            continue;
        }
        for &(i, r) in by_lhs.get(&z).into_iter().flatten() {
            let w = w.times(&r.weight);
            if !params.in_p(i) {
                let mut form = r.rhs.clone();
                form.extend(pending.iter().cloned());
                total = total.plus(&w.times(&form_weight(g, &form, x)));
                continue;
            }
            let first = &r.rhs[0];
            if params.in_x(first) {
                continue;
            }
            let mut rest: Vec<Symbol> = r.rhs[1..].to_vec();
            rest.extend(pending.iter().cloned());
            if first.is_terminal() {
                let mut form = vec![first.clone()];
                form.extend(rest);
                total = total.plus(&w.times(&form_weight(g, &form, x)));
            } else {
                stack.push((first.clone(), w, rest));
            }
        }
    }
    total
}

/// Weight of `x` over `Y`-derivations in which a node labeled `α`, reached
/// from the root through `P` rules along the left edge, is replaced by `ε`.
/// This is the language the transform assigns to `Y/α`.
pub fn slashed_oracle<W: Semiring>(
    g: &Grammar<W>,
    params: &TransformParams,
    y: &Symbol,
    alpha: &Symbol,
    x: &[Symbol],
) -> W {
    let by_lhs = rules_by_lhs(g);
    let mut total = W::zero();
    let mut stack: Vec<(Symbol, W, Vec<Symbol>)> = vec![(y.clone(), W::one(), Vec::new())];
    while let Some((z, w, pending)) = stack.pop() {
        if pending.len() > x.len() {
            continue;
        }
        if &z == alpha {
            total = total.plus(&w.times(&form_weight(g, &pending, x)));
        }
        for &(i, r) in by_lhs.get(&z).into_iter().flatten() {
            if !params.in_p(i) {
                continue;
            }
            let mut rest: Vec<Symbol> = r.rhs[1..].to_vec();
            rest.extend(pending.iter().cloned());
            stack.push((r.rhs[0].clone(), w.times(&r.weight), rest));
        }
    }
    total
}

/// `(label, yield, weight)` of a derivation with the weight rendered so
/// triples can be collected into ordered multisets.
pub fn triple<W: Semiring>(t: &Derivation<W>) -> (Symbol, Vec<Symbol>, W) {
    (t.label().clone(), t.yield_(), t.weight())
}

/// Same label and yield, and weights equal up to rounding (products of the
/// same factors taken in a different order).
pub fn same_triple<W: Semiring>(a: &Derivation<W>, b: &Derivation<W>) -> bool {
    let (x, y) = (triple(a), triple(b));
    x.0 == y.0 && x.1 == y.1 && x.2.approx_eq(&y.2)
}

pub fn rule_applications<W: Semiring>(t: &Derivation<W>) -> usize {
    let mut n = 0;
    t.for_each_rule(&mut |_| n += 1);
    n
}

/// `G_sym(x)` for nullary-free grammars whose unary rules may form cycles:
/// a span-by-span chart where each span's unary closure is found by
/// iterating to a fixed point.
pub fn iterative_string_weight<W: Semiring>(g: &Grammar<W>, sym: &Symbol, x: &[Symbol]) -> W {
    assert_eq!(g.nullary_rules().count(), 0);
    let n = x.len();
    if n == 0 {
        return W::zero();
    }
    let nts: Vec<&Symbol> = g.nonterminals().iter().collect();
    let mut chart: BTreeMap<(usize, usize), BTreeMap<Symbol, W>> = BTreeMap::new();
    let get = |chart: &BTreeMap<(usize, usize), BTreeMap<Symbol, W>>, s: &Symbol, i: usize, j: usize| -> W {
        if s.is_terminal() {
            return if j == i + 1 && &x[i] == s { W::one() } else { W::zero() };
        }
        chart
            .get(&(i, j))
            .and_then(|m| m.get(s))
            .cloned()
            .unwrap_or_else(W::zero)
    };
    for len in 1..=n {
        for i in 0..=n - len {
            let j = i + len;
            let mut base: BTreeMap<Symbol, W> = nts.iter().map(|s| ((*s).clone(), W::zero())).collect();
            for r in g.rules() {
                if r.is_nonterminal_unary() {
                    continue;
                }
                // prefix[k] = weight of rhs[..m] spanning i..k
                let mut prefix: Vec<W> = vec![W::zero(); n + 1];
                prefix[i] = W::one();
                for s in &r.rhs {
                    let mut next = vec![W::zero(); n + 1];
                    for a in i..=j {
                        if prefix[a].is_zero() {
                            continue;
                        }
                        for b in a + 1..=j {
                            let w = get(&chart, s, a, b);
                            if !w.is_zero() {
                                next[b] = next[b].plus(&prefix[a].times(&w));
                            }
                        }
                    }
                    prefix = next;
                }
                let e = base.get_mut(&r.lhs).unwrap();
                *e = e.plus(&prefix[j].times(&r.weight));
            }
            let mut cur = base.clone();
            for _ in 0..100_000 {
                let mut next = base.clone();
                for r in g.rules().iter().filter(|r| r.is_nonterminal_unary()) {
                    let e = next.get_mut(&r.lhs).unwrap();
                    *e = e.plus(&r.weight.times(&cur[&r.rhs[0]]));
                }
                let done = next.iter().all(|(s, w)| w.distance(&cur[s]) <= 1e-15);
                cur = next;
                if done {
                    break;
                }
            }
            chart.insert((i, j), cur);
        }
    }
    get(&chart, sym, 0, n)
}

/// Number of derivations of `root` with height at most `height`,
/// saturating.
pub fn count_derivations<W: Semiring>(g: &Grammar<W>, root: &Symbol, height: usize) -> u128 {
    fn go<W: Semiring>(g: &Grammar<W>, s: &Symbol, h: usize, memo: &mut BTreeMap<(Symbol, usize), u128>) -> u128 {
        if h == 0 {
            return 0;
        }
        if s.is_terminal() {
            return 1;
        }
        if let Some(&c) = memo.get(&(s.clone(), h)) {
            return c;
        }
        let mut total: u128 = 0;
        for r in g.rules().iter().filter(|r| &r.lhs == s) {
            let mut prod: u128 = 1;
            for c in &r.rhs {
                prod = prod.saturating_mul(go(g, c, h - 1, memo));
            }
            total = total.saturating_add(prod);
        }
        memo.insert((s.clone(), h), total);
        total
    }
    go(g, root, height, &mut BTreeMap::new())
}

/// Total number of derivations of height at most `height` over every
/// nonterminal.
pub fn total_derivations<W: Semiring>(g: &Grammar<W>, height: usize) -> u128 {
    g.nonterminals()
        .iter()
        .map(|s| count_derivations(g, s, height))
        .fold(0, u128::saturating_add)
}

type ByLhs<W> = BTreeMap<Symbol, Vec<std::sync::Arc<Rule<W>>>>;

fn arc_rules<W: Semiring>(g: &Grammar<W>) -> ByLhs<W> {
    let mut by_lhs: ByLhs<W> = BTreeMap::new();
    for r in g.rules() {
        by_lhs
            .entry(r.lhs.clone())
            .or_default()
            .push(std::sync::Arc::new(r.clone()));
    }
    by_lhs
}

/// Calls `f` on every derivation of `root` with height at most `height`,
/// without materializing them all.
pub fn for_each_derivation<W: Semiring>(
    g: &Grammar<W>,
    root: &Symbol,
    height: usize,
    f: &mut dyn FnMut(Derivation<W>),
) {
    fn node<W: Semiring>(by_lhs: &ByLhs<W>, s: &Symbol, h: usize, f: &mut dyn FnMut(Derivation<W>)) {
        if h == 0 {
            return;
        }
        if s.is_terminal() {
            f(Derivation::leaf(s.clone()));
            return;
        }
        for r in by_lhs.get(s).into_iter().flatten() {
            seq(by_lhs, &r.rhs, h - 1, &mut Vec::new(), &mut |kids| {
                f(Derivation::node(r.clone(), kids))
            });
        }
    }
    fn seq<W: Semiring>(
        by_lhs: &ByLhs<W>,
        rhs: &[Symbol],
        h: usize,
        acc: &mut Vec<Derivation<W>>,
        f: &mut dyn FnMut(Vec<Derivation<W>>),
    ) {
        let Some((first, rest)) = rhs.split_first() else {
            f(acc.clone());
            return;
        };
        node(by_lhs, first, h, &mut |t| {
            acc.push(t);
            seq(by_lhs, rest, h, acc, f);
            acc.pop();
        });
    }
    node(&arc_rules(g), root, height, f)
}

/// Calls `f` on every derivation of `root` with at most `size` rule
/// applications.
pub fn for_each_derivation_by_size<W: Semiring>(
    g: &Grammar<W>,
    root: &Symbol,
    size: usize,
    f: &mut dyn FnMut(Derivation<W>),
) {
    fn node<W: Semiring>(by_lhs: &ByLhs<W>, s: &Symbol, budget: usize, f: &mut dyn FnMut(Derivation<W>, usize)) {
        if s.is_terminal() {
            f(Derivation::leaf(s.clone()), 0);
            return;
        }
        let Some(left) = budget.checked_sub(1) else { return };
        for r in by_lhs.get(s).into_iter().flatten() {
            seq(by_lhs, &r.rhs, left, 0, &mut Vec::new(), &mut |kids, used| {
                f(Derivation::node(r.clone(), kids), used + 1)
            });
        }
    }
    fn seq<W: Semiring>(
        by_lhs: &ByLhs<W>,
        rhs: &[Symbol],
        budget: usize,
        used: usize,
        acc: &mut Vec<Derivation<W>>,
        f: &mut dyn FnMut(Vec<Derivation<W>>, usize),
    ) {
        let Some((first, rest)) = rhs.split_first() else {
            f(acc.clone(), used);
            return;
        };
        node(by_lhs, first, budget - used, &mut |t, n| {
            acc.push(t);
            seq(by_lhs, rest, budget, used + n, acc, f);
            acc.pop();
        });
    }
    node(&arc_rules(g), root, size, &mut |t, _| f(t))
}

/// `(label, yield)` to the weights of the derivations with that label and
/// yield.
pub type Triples<W> = BTreeMap<(Symbol, Vec<Symbol>), Vec<W>>;

fn add_triple<W: Semiring>(out: &mut Triples<W>, t: &Derivation<W>) {
    let (label, y, w) = triple(t);
    out.entry((label, y)).or_default().push(w);
}

/// `(label, yield, weight)` multiset over derivations of `root` with at
/// most `size` rule applications.
pub fn triples_by_size<W: Semiring>(g: &Grammar<W>, root: &Symbol, size: usize) -> Triples<W> {
    let mut out = Triples::new();
    for_each_derivation_by_size(g, root, size, &mut |t| add_triple(&mut out, &t));
    out
}

/// The same multiset over derivations of height at most `height`.
pub fn triples_by_height<W: Semiring>(g: &Grammar<W>, root: &Symbol, height: usize) -> Triples<W> {
    let mut out = Triples::new();
    for_each_derivation(g, root, height, &mut |t| add_triple(&mut out, &t));
    out
}

/// Multiset equality with weights matched up to rounding.
pub fn same_triples<W: Semiring>(a: &Triples<W>, b: &Triples<W>) -> bool {
    a.len() == b.len()
        && a.iter().all(|(key, ws)| {
            let Some(other) = b.get(key) else { return false };
            let mut left: Vec<&W> = other.iter().collect();
            ws.len() == other.len()
                && ws.iter().all(|w| match left.iter().position(|o| o.approx_eq(w)) {
                    Some(i) => {
                        left.swap_remove(i);
                        true
                    }
                    None => false,
                })
        })
}
