//! Left-corner rule constructions: GLCT, its filtered variant, speculation,
//! and the LCT/SLCT special cases.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule, Symbol, TransformId};
use crate::semiring::Semiring;

/// The left-corner recognition rules `P` (as indices into the grammar's
/// rule list) and symbols `X`, plus the id stamped on every new symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformParams {
    p: BTreeSet<usize>,
    x: BTreeSet<Symbol>,
    id: TransformId,
}

impl TransformParams {
    /// Validate `(P, X)` against `g` and take a fresh transform id.
    pub fn new<W: Semiring>(
        g: &Grammar<W>,
        p: impl IntoIterator<Item = usize>,
        x: impl IntoIterator<Item = Symbol>,
    ) -> Result<Self> {
        Self::with_id(g, p, x, TransformId::fresh())
    }

    pub fn with_id<W: Semiring>(
        g: &Grammar<W>,
        p: impl IntoIterator<Item = usize>,
        x: impl IntoIterator<Item = Symbol>,
        id: TransformId,
    ) -> Result<Self> {
        let params = TransformParams {
            p: p.into_iter().collect(),
            x: x.into_iter().collect(),
            id,
        };
        params.validate(g)?;
        TransformId::reserve(id);
        Ok(params)
    }

    pub fn p(&self) -> &BTreeSet<usize> {
        &self.p
    }

    pub fn x(&self) -> &BTreeSet<Symbol> {
        &self.x
    }

    pub fn id(&self) -> TransformId {
        self.id
    }

    /// Check `P ⊆ R` (non-nullary), `X ⊆ V ∪ N`, and that `P` does not
    /// split a group of identical duplicate rules (derivations could not
    /// tell them apart).
    pub fn validate<W: Semiring>(&self, g: &Grammar<W>) -> Result<()> {
        let rules = g.rules();
        for &i in &self.p {
            let Some(r) = rules.get(i) else {
                return Err(Error::InvalidParams(format!(
                    "rule index {i} out of range (grammar has {} rules)",
                    rules.len()
                )));
            };
            if r.is_nullary() {
                return Err(Error::InvalidParams(format!("nullary rule {i} ({r}) in P")));
            }
        }
        for s in &self.x {
            if !g.contains_symbol(s) {
                return Err(Error::InvalidParams(format!("symbol {s} in X is not in the grammar")));
            }
        }
        let mut groups: HashMap<(&Symbol, &[Symbol]), Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            groups.entry(r.shape()).or_default().push(i);
        }
        for idxs in groups.values() {
            for (a, &i) in idxs.iter().enumerate() {
                for &j in &idxs[a + 1..] {
                    if rules[i].weight == rules[j].weight && self.p.contains(&i) != self.p.contains(&j) {
                        return Err(Error::InvalidParams(format!(
                            "identical rules {i} and {j} ({}) must be both in P or both out",
                            rules[i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn in_p(&self, index: usize) -> bool {
        self.p.contains(&index)
    }

    pub fn in_x(&self, s: &Symbol) -> bool {
        self.x.contains(s)
    }

    pub fn frozen(&self, s: &Symbol) -> Symbol {
        Symbol::frozen(s, self.id)
    }

    pub fn slashed(&self, num: &Symbol, den: &Symbol) -> Symbol {
        Symbol::slashed(num, den, self.id)
    }
}

/// Which construction to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Glct,
    GlctFiltered,
    Speculation,
}

/// The six rule families, in output order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `X → ~X`
    RecoverFrozen,
    /// `X → ~α X/α`
    RecoverSlash,
    /// `X/X → ε`
    SlashBase,
    /// `Y/α → β⃗ Y/X` (GLCT) or `X/Y → α/Y β⃗` (speculation)
    SlashRecursive,
    /// `~X → α⃗`
    FrozenBase,
    /// `~X → ~α β⃗`
    FrozenRecursive,
}

/// Rules of the chosen construction, tagged by family, in deterministic
/// order. No trimming.
pub fn transform_rules<W: Semiring>(
    g: &Grammar<W>,
    params: &TransformParams,
    variant: Variant,
) -> Result<Vec<(Family, Rule<W>)>> {
    params.validate(g)?;
    let one = W::one;
    let n: Vec<&Symbol> = g.nonterminals().iter().collect();
    let all: Vec<&Symbol> = g.symbols().collect();
    let x: Vec<&Symbol> = params.x.iter().collect();
    let p: Vec<&Rule<W>> = params.p.iter().map(|&i| &g.rules()[i]).collect();
    let filter = (variant == Variant::GlctFiltered).then(|| Filter::new(g, params));
    let keep = |f: &dyn Fn(&Filter) -> bool| filter.as_ref().is_none_or(f);
    let mut out = Vec::new();

    for &s in &n {
        if !params.in_x(s) && keep(&|f| f.retained(s)) {
            out.push((
                Family::RecoverFrozen,
                Rule::new(s.clone(), vec![params.frozen(s)], one()),
            ));
        }
    }
    for &s in &n {
        for &a in &x {
            if keep(&|f| f.retained(s) && f.reaches(s, a)) {
                out.push((
                    Family::RecoverSlash,
                    Rule::new(s.clone(), vec![params.frozen(a), params.slashed(s, a)], one()),
                ));
            }
        }
    }
    for &s in &all {
        if keep(&|f| f.retained(s) && f.reaches_x(s)) {
            out.push((Family::SlashBase, Rule::new(params.slashed(s, s), vec![], one())));
        }
    }
    for r in &p {
        let (alpha, beta) = r.rhs.split_first().expect("P rules are non-nullary");
        if variant == Variant::Speculation {
            for &y in &all {
                let mut rhs = vec![params.slashed(alpha, y)];
                rhs.extend(beta.iter().cloned());
                out.push((
                    Family::SlashRecursive,
                    Rule::new(params.slashed(&r.lhs, y), rhs, r.weight.clone()),
                ));
            }
        } else {
            for &y in &n {
                if !keep(&|f| f.retained(y) && f.reaches(y, alpha) && f.reaches_x(alpha)) {
                    continue;
                }
                let mut rhs = beta.to_vec();
                rhs.push(params.slashed(y, &r.lhs));
                out.push((
                    Family::SlashRecursive,
                    Rule::new(params.slashed(y, alpha), rhs, r.weight.clone()),
                ));
            }
        }
    }
    for (i, r) in g.rules().iter().enumerate() {
        if !params.in_p(i) {
            out.push((
                Family::FrozenBase,
                Rule::new(params.frozen(&r.lhs), r.rhs.clone(), r.weight.clone()),
            ));
        }
    }
    for r in &p {
        let (alpha, beta) = r.rhs.split_first().expect("P rules are non-nullary");
        if !params.in_x(alpha) {
            let mut rhs = vec![params.frozen(alpha)];
            rhs.extend(beta.iter().cloned());
            out.push((
                Family::FrozenRecursive,
                Rule::new(params.frozen(&r.lhs), rhs, r.weight.clone()),
            ));
        }
    }
    Ok(out)
}

fn assemble<W: Semiring>(g: &Grammar<W>, rules: Vec<(Family, Rule<W>)>) -> Result<Grammar<W>> {
    Grammar::with_symbols(
        g.start().clone(),
        g.symbols().cloned(),
        rules.into_iter().map(|(_, r)| r).collect(),
    )
}

/// `glct(G, P, X)`.
pub fn glct<W: Semiring>(g: &Grammar<W>, params: &TransformParams) -> Result<Grammar<W>> {
    assemble(g, transform_rules(g, params, Variant::Glct)?)
}

/// GLCT with the reachability and retained-nonterminal filters, which only
/// drop useless rules.
pub fn glct_filtered<W: Semiring>(g: &Grammar<W>, params: &TransformParams) -> Result<Grammar<W>> {
    assemble(g, transform_rules(g, params, Variant::GlctFiltered)?)
}

/// The speculation transformation: like GLCT but slashed derivations branch
/// to the left.
pub fn speculate<W: Semiring>(g: &Grammar<W>, params: &TransformParams) -> Result<Grammar<W>> {
    assemble(g, transform_rules(g, params, Variant::Speculation)?)
}

/// Parameters of the basic left-corner transformation: `P = R`, `X = N ∪ V`.
pub fn lct_params<W: Semiring>(g: &Grammar<W>) -> Result<TransformParams> {
    if let Some((i, r)) = g.nullary_rules().next() {
        return Err(Error::InvalidParams(format!(
            "left-corner transformation needs a nullary-free grammar; rule {i} is {r}"
        )));
    }
    TransformParams::new(g, 0..g.rule_count(), g.symbols().cloned())
}

pub fn lct<W: Semiring>(g: &Grammar<W>) -> Result<(Grammar<W>, TransformParams)> {
    let params = lct_params(g)?;
    Ok((glct(g, &params)?, params))
}

/// Parameters of the selective left-corner transformation: `X = N ∪ V`.
pub fn slct_params<W: Semiring>(g: &Grammar<W>, p: impl IntoIterator<Item = usize>) -> Result<TransformParams> {
    TransformParams::new(g, p, g.symbols().cloned())
}

pub fn slct<W: Semiring>(g: &Grammar<W>, p: impl IntoIterator<Item = usize>) -> Result<(Grammar<W>, TransformParams)> {
    let params = slct_params(g, p)?;
    Ok((glct(g, &params)?, params))
}

/// Upper bound on the raw GLCT rule count:
/// `|R| + |N|(1 + |X| + |P|) + |N∖X| + |V|`.
pub fn rule_count_bound<W: Semiring>(g: &Grammar<W>, params: &TransformParams) -> usize {
    let n = g.nonterminals().len();
    let n_minus_x = g.nonterminals().iter().filter(|s| !params.in_x(s)).count();
    g.rule_count() + n * (1 + params.x.len() + params.p.len()) + n_minus_x + g.terminals().len()
}

/// Reachability in the left-recursion graph restricted to `P`, plus the
/// retained set.
struct Filter {
    retained: HashSet<Symbol>,
    /// Reflexive-transitive successors of each symbol.
    reach: HashMap<Symbol, HashSet<Symbol>>,
    reaches_x: HashSet<Symbol>,
}

impl Filter {
    fn new<W: Semiring>(g: &Grammar<W>, params: &TransformParams) -> Self {
        let mut retained = HashSet::new();
        retained.insert(g.start().clone());
        let mut edges: HashMap<&Symbol, Vec<&Symbol>> = HashMap::new();
        for (i, r) in g.rules().iter().enumerate() {
            if params.in_p(i) {
                retained.extend(r.rhs.iter().skip(1).cloned());
                edges.entry(&r.lhs).or_default().push(&r.rhs[0]);
            } else {
                retained.extend(r.rhs.iter().cloned());
            }
        }
        retained.retain(Symbol::is_nonterminal);
        let mut reach = HashMap::new();
        let mut reaches_x = HashSet::new();
        for s in g.symbols() {
            let mut seen: HashSet<Symbol> = HashSet::new();
            let mut stack = vec![s];
            seen.insert(s.clone());
            while let Some(u) = stack.pop() {
                for &v in edges.get(u).map(Vec::as_slice).unwrap_or(&[]) {
                    if seen.insert(v.clone()) {
                        stack.push(v);
                    }
                }
            }
            if seen.iter().any(|v| params.in_x(v)) {
                reaches_x.insert(s.clone());
            }
            reach.insert(s.clone(), seen);
        }
        Filter {
            retained,
            reach,
            reaches_x,
        }
    }

    fn retained(&self, s: &Symbol) -> bool {
        self.retained.contains(s)
    }

    fn reaches(&self, from: &Symbol, to: &Symbol) -> bool {
        self.reach.get(from).is_some_and(|r| r.contains(to))
    }

    fn reaches_x(&self, s: &Symbol) -> bool {
        self.reaches_x.contains(s)
    }
}
