//! Spines, left corners, and the derivation bijections between a grammar,
//! its GLCT, and its speculation transform.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grammar::{Derivation, Grammar, Rule, Symbol};
use crate::semiring::Semiring;
use crate::transform::{TransformParams, Variant};

/// The maximal chain of `P` rules down the left edge of a tree.
#[derive(Clone, Debug)]
pub struct SpineDecomposition<'t, W> {
    /// `(X_K → X_{K-1} β⃗_{K-1}) … (X_2 → X_1 β⃗_1)`, top to bottom.
    pub spine: Vec<Arc<Rule<W>>>,
    /// `X_1 … X_K`, bottom to top.
    pub symbols: Vec<Symbol>,
    /// The subtree rooted at each `X_i`, bottom to top.
    pub nodes: Vec<&'t Derivation<W>>,
}

impl<W: Semiring> SpineDecomposition<'_, W> {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `β⃗_i` for `1 ≤ i < K` (the siblings of `X_i`), or the children of the
    /// bottom node for `i = 0`.
    pub fn offspine(&self, i: usize) -> &[Derivation<W>] {
        if i == 0 {
            self.nodes[0].children()
        } else {
            &self.nodes[i].children()[1..]
        }
    }

    /// Rebuild the tree from the spine and the off-spine subtrees.
    pub fn reassemble(&self) -> Derivation<W> {
        let mut cur = self.nodes[0].clone();
        for i in 1..self.len() {
            let mut children = vec![cur];
            children.extend(self.offspine(i).iter().cloned());
            cur = Derivation::node(self.spine[self.len() - 1 - i].clone(), children);
        }
        cur
    }
}

/// The bottommost spine subtree labeled by a symbol of `X`, with its
/// 1-based spine position `k̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftCorner<'t, W> {
    pub corner: &'t Derivation<W>,
    pub k_hat: usize,
}

/// What a transformed rule means in terms of the source grammar.
#[derive(Clone, Debug)]
enum Decoded<W> {
    RecoverFrozen,
    RecoverSlash,
    SlashBase,
    /// GLCT `Y/α → β⃗ Y/X` or speculation `X/Y → α/Y β⃗`, from `X → α β⃗`.
    SlashRecursive(Arc<Rule<W>>),
    FrozenBase(Arc<Rule<W>>),
    FrozenRecursive(Arc<Rule<W>>),
}

struct Entry<W> {
    rule: Arc<Rule<W>>,
    in_p: bool,
}

/// Derivation mappings for one grammar and one parameter choice.
pub struct Mapper<W> {
    params: TransformParams,
    rules: HashMap<(Symbol, Vec<Symbol>), Vec<Entry<W>>>,
}

fn shape_of<W: Semiring>(r: &Rule<W>) -> String {
    let mut s = format!("{} ->", r.lhs);
    if r.rhs.is_empty() {
        s.push_str(" ε");
    }
    for x in &r.rhs {
        s.push(' ');
        s.push_str(&x.to_string());
    }
    s
}

fn foreign<W: Semiring>(r: &Rule<W>) -> Error {
    Error::ForeignRule(format!("{}: {}", r.weight, shape_of(r)))
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedShape(msg.into())
}

impl<W: Semiring> Mapper<W> {
    pub fn new(g: &Grammar<W>, params: &TransformParams) -> Result<Self> {
        params.validate(g)?;
        let mut rules: HashMap<(Symbol, Vec<Symbol>), Vec<Entry<W>>> = HashMap::new();
        for (i, r) in g.rules().iter().enumerate() {
            let bucket = rules.entry((r.lhs.clone(), r.rhs.clone())).or_default();
            if !bucket.iter().any(|e| e.rule.weight == r.weight) {
                bucket.push(Entry {
                    rule: Arc::new(r.clone()),
                    in_p: params.in_p(i),
                });
            }
        }
        Ok(Mapper {
            params: params.clone(),
            rules,
        })
    }

    pub fn params(&self) -> &TransformParams {
        &self.params
    }

    fn lookup(&self, lhs: &Symbol, rhs: &[Symbol], weight: &W) -> Option<&Entry<W>> {
        self.rules
            .get(&(lhs.clone(), rhs.to_vec()))?
            .iter()
            .find(|e| e.rule.weight == *weight)
    }

    fn source_rule(&self, r: &Rule<W>) -> Result<&Entry<W>> {
        self.lookup(&r.lhs, &r.rhs, &r.weight).ok_or_else(|| foreign(r))
    }

    /// Spine of a source-grammar tree (not a bare terminal).
    pub fn spine<'t>(&self, t: &'t Derivation<W>) -> Result<SpineDecomposition<'t, W>> {
        let mut nodes = Vec::new();
        let mut spine = Vec::new();
        let mut cur = t;
        loop {
            nodes.push(cur);
            match cur {
                Derivation::Node { rule, children } if self.source_rule(rule)?.in_p => {
                    spine.push(rule.clone());
                    cur = &children[0];
                }
                _ => break,
            }
        }
        nodes.reverse();
        let symbols = nodes.iter().map(|n| n.label().clone()).collect();
        Ok(SpineDecomposition { spine, symbols, nodes })
    }

    pub fn left_corner<'t>(&self, t: &'t Derivation<W>) -> Result<Option<LeftCorner<'t, W>>> {
        if matches!(t, Derivation::Leaf(_)) {
            return Ok(None);
        }
        let sp = self.spine(t)?;
        Ok(sp.symbols.iter().position(|s| self.params.in_x(s)).map(|i| LeftCorner {
            corner: sp.nodes[i],
            k_hat: i + 1,
        }))
    }

    fn make(&self, lhs: Symbol, rhs: Vec<Symbol>, weight: W, children: Vec<Derivation<W>>) -> Derivation<W> {
        Derivation::node(Arc::new(Rule::new(lhs, rhs, weight)), children)
    }

    /// Map a source derivation to the GLCT derivation it corresponds to.
    pub fn phi(&self, t: &Derivation<W>) -> Result<Derivation<W>> {
        if let Derivation::Leaf(_) = t {
            return Ok(t.clone());
        }
        let sp = self.spine(t)?;
        let k = sp.len();
        let top = &sp.symbols[k - 1];
        let p = &self.params;
        match sp.symbols.iter().position(|s| p.in_x(s)) {
            None => {
                let frozen = self.frozen_chain(&sp, k - 1)?;
                Ok(self.make(top.clone(), vec![p.frozen(top)], W::one(), vec![frozen]))
            }
            Some(h) => {
                let alpha = &sp.symbols[h];
                let left = self.frozen_chain(&sp, h)?;
                let mut chain = self.make(p.slashed(top, top), vec![], W::one(), vec![]);
                for i in (h..k - 1).rev() {
                    let rule = sp.nodes[i + 1].rule().unwrap();
                    let mut children = self.phi_seq(sp.offspine(i + 1))?;
                    let mut rhs = rule.rhs[1..].to_vec();
                    rhs.push(p.slashed(top, &sp.symbols[i + 1]));
                    children.push(chain);
                    chain = self.make(p.slashed(top, &sp.symbols[i]), rhs, rule.weight.clone(), children);
                }
                Ok(self.make(
                    top.clone(),
                    vec![p.frozen(alpha), p.slashed(top, alpha)],
                    W::one(),
                    vec![left, chain],
                ))
            }
        }
    }

    fn phi_seq(&self, ts: &[Derivation<W>]) -> Result<Vec<Derivation<W>>> {
        ts.iter().map(|t| self.phi(t)).collect()
    }

    /// The frozen version of spine node `i` (0-based, bottom up).
    fn frozen_chain(&self, sp: &SpineDecomposition<'_, W>, i: usize) -> Result<Derivation<W>> {
        let node = sp.nodes[i];
        let Derivation::Node { rule, children } = node else {
            return Ok(node.clone());
        };
        let lhs = self.params.frozen(&rule.lhs);
        if i == 0 {
            let mapped = self.phi_seq(children)?;
            return Ok(self.make(lhs, rule.rhs.clone(), rule.weight.clone(), mapped));
        }
        let mut rhs = vec![self.params.frozen(&rule.rhs[0])];
        rhs.extend(rule.rhs[1..].iter().cloned());
        let mut mapped = vec![self.frozen_chain(sp, i - 1)?];
        mapped.extend(self.phi_seq(&children[1..])?);
        Ok(self.make(lhs, rhs, rule.weight.clone(), mapped))
    }

    /// Interpret a rule of the transformed grammar.
    fn decode(&self, r: &Rule<W>, variant: Variant) -> Result<Decoded<W>> {
        let p = &self.params;
        let id = p.id();
        if let Some(base) = r.lhs.as_frozen(id) {
            let first_frozen = r.rhs.first().and_then(|s| s.as_frozen(id));
            let mut orig = r.rhs.clone();
            if let Some(a) = first_frozen {
                orig[0] = a.clone();
            }
            let e = self.lookup(base, &orig, &r.weight).ok_or_else(|| foreign(r))?;
            return match (e.in_p, first_frozen.is_some()) {
                (false, false) => Ok(Decoded::FrozenBase(e.rule.clone())),
                (true, _) if !p.in_x(&orig[0]) && (first_frozen.is_some() || orig[0].is_terminal()) => {
                    Ok(Decoded::FrozenRecursive(e.rule.clone()))
                }
                _ => Err(foreign(r)),
            };
        }
        if let Some((num, den)) = r.lhs.as_slashed(id) {
            if r.rhs.is_empty() {
                return if num == den && r.weight.is_one() {
                    Ok(Decoded::SlashBase)
                } else {
                    Err(foreign(r))
                };
            }
            let orig = match variant {
                Variant::Speculation => {
                    // X/Y → α/Y β⃗
                    let Some((a, y)) = r.rhs[0].as_slashed(id) else {
                        return Err(foreign(r));
                    };
                    if y != den {
                        return Err(foreign(r));
                    }
                    let mut rhs = vec![a.clone()];
                    rhs.extend(r.rhs[1..].iter().cloned());
                    (num.clone(), rhs)
                }
                Variant::Glct | Variant::GlctFiltered => {
                    // Y/α → β⃗ Y/X
                    let Some((y, x)) = r.rhs.last().and_then(|s| s.as_slashed(id)) else {
                        return Err(foreign(r));
                    };
                    if y != num || num.is_terminal() {
                        return Err(foreign(r));
                    }
                    let mut rhs = vec![den.clone()];
                    rhs.extend(r.rhs[..r.rhs.len() - 1].iter().cloned());
                    (x.clone(), rhs)
                }
            };
            let e = self.lookup(&orig.0, &orig.1, &r.weight).ok_or_else(|| foreign(r))?;
            return if e.in_p {
                Ok(Decoded::SlashRecursive(e.rule.clone()))
            } else {
                Err(foreign(r))
            };
        }
        if r.weight.is_one() {
            if r.rhs == [p.frozen(&r.lhs)] && !p.in_x(&r.lhs) && r.lhs.is_nonterminal() {
                return Ok(Decoded::RecoverFrozen);
            }
            if let [f, s] = r.rhs.as_slice() {
                if let Some((num, alpha)) = s.as_slashed(id) {
                    if *num == r.lhs && p.in_x(alpha) && *f == p.frozen(alpha) {
                        return Ok(Decoded::RecoverSlash);
                    }
                }
            }
        }
        Err(foreign(r))
    }

    fn check_node(t: &Derivation<W>) -> Result<()> {
        if let Derivation::Node { rule, children } = t {
            let ok = rule.rhs.len() == children.len() && rule.rhs.iter().zip(children).all(|(s, c)| s == c.label());
            if !ok {
                return Err(malformed(format!(
                    "children of {} do not spell {}",
                    rule.lhs,
                    shape_of(rule)
                )));
            }
        }
        Ok(())
    }

    /// Map a GLCT derivation rooted at an original symbol back to the
    /// source derivation.
    pub fn phi_inverse(&self, t: &Derivation<W>) -> Result<Derivation<W>> {
        Self::check_node(t)?;
        let Derivation::Node { rule, children } = t else {
            return if t.label().is_terminal() {
                Ok(t.clone())
            } else {
                Err(malformed("nonterminal leaf"))
            };
        };
        match self.decode(rule, Variant::Glct)? {
            Decoded::RecoverFrozen => self.unfreeze(&children[0]),
            Decoded::RecoverSlash => {
                let mut cur = self.unfreeze(&children[0])?;
                let mut node = &children[1];
                loop {
                    Self::check_node(node)?;
                    let Derivation::Node { rule, children } = node else {
                        return Err(malformed("slashed leaf"));
                    };
                    match self.decode(rule, Variant::Glct)? {
                        Decoded::SlashBase => return Ok(cur),
                        Decoded::SlashRecursive(orig) => {
                            let (last, betas) = children.split_last().unwrap();
                            let mut kids = vec![cur];
                            for b in betas {
                                kids.push(self.phi_inverse(b)?);
                            }
                            cur = Derivation::node(orig, kids);
                            node = last;
                        }
                        _ => return Err(malformed(format!("{} in a slash chain", shape_of(rule)))),
                    }
                }
            }
            _ => Err(malformed(format!(
                "root rule {} is not a recovery rule",
                shape_of(rule)
            ))),
        }
    }

    fn unfreeze(&self, t: &Derivation<W>) -> Result<Derivation<W>> {
        Self::check_node(t)?;
        let Derivation::Node { rule, children } = t else {
            return if t.label().is_terminal() {
                Ok(t.clone())
            } else {
                Err(malformed("nonterminal leaf"))
            };
        };
        match self.decode(rule, Variant::Glct)? {
            Decoded::FrozenBase(orig) => {
                let kids = children.iter().map(|c| self.phi_inverse(c)).collect::<Result<_>>()?;
                Ok(Derivation::node(orig, kids))
            }
            Decoded::FrozenRecursive(orig) => {
                let mut kids = vec![self.unfreeze(&children[0])?];
                for c in &children[1..] {
                    kids.push(self.phi_inverse(c)?);
                }
                Ok(Derivation::node(orig, kids))
            }
            _ => Err(malformed(format!("expected a frozen rule, found {}", shape_of(rule)))),
        }
    }

    /// Map a speculation derivation (rooted anywhere) to a GLCT derivation.
    pub fn spec_to_glct(&self, t: &Derivation<W>) -> Result<Derivation<W>> {
        Self::check_node(t)?;
        let Derivation::Node { rule, children } = t else {
            return Ok(t.clone());
        };
        match self.decode(rule, Variant::Speculation)? {
            Decoded::SlashBase | Decoded::SlashRecursive(_) => {
                let (num, _) = rule.lhs.as_slashed(self.params.id()).unwrap();
                let num = num.clone();
                let mut steps = Vec::new();
                let mut node = t;
                loop {
                    Self::check_node(node)?;
                    let Derivation::Node { rule, children } = node else {
                        return Err(malformed("slashed leaf"));
                    };
                    match self.decode(rule, Variant::Speculation)? {
                        Decoded::SlashBase => break,
                        Decoded::SlashRecursive(orig) => {
                            let betas = children[1..]
                                .iter()
                                .map(|c| self.spec_to_glct(c))
                                .collect::<Result<Vec<_>>>()?;
                            steps.push((orig, betas));
                            node = &children[0];
                        }
                        _ => return Err(malformed(format!("{} in a slash chain", shape_of(rule)))),
                    }
                }
                let p = &self.params;
                let mut cur = self.make(p.slashed(&num, &num), vec![], W::one(), vec![]);
                for (orig, mut betas) in steps {
                    let mut rhs = orig.rhs[1..].to_vec();
                    rhs.push(p.slashed(&num, &orig.lhs));
                    betas.push(cur);
                    cur = self.make(p.slashed(&num, &orig.rhs[0]), rhs, orig.weight.clone(), betas);
                }
                Ok(cur)
            }
            _ => {
                let kids = children.iter().map(|c| self.spec_to_glct(c)).collect::<Result<_>>()?;
                Ok(Derivation::node(rule.clone(), kids))
            }
        }
    }

    /// Inverse of [`Mapper::spec_to_glct`].
    pub fn glct_to_spec(&self, t: &Derivation<W>) -> Result<Derivation<W>> {
        Self::check_node(t)?;
        let Derivation::Node { rule, children } = t else {
            return Ok(t.clone());
        };
        match self.decode(rule, Variant::Glct)? {
            Decoded::SlashBase | Decoded::SlashRecursive(_) => {
                let (_, den) = rule.lhs.as_slashed(self.params.id()).unwrap();
                let den = den.clone();
                let p = &self.params;
                let mut cur = self.make(p.slashed(&den, &den), vec![], W::one(), vec![]);
                let mut node = t;
                loop {
                    Self::check_node(node)?;
                    let Derivation::Node { rule, children } = node else {
                        return Err(malformed("slashed leaf"));
                    };
                    match self.decode(rule, Variant::Glct)? {
                        Decoded::SlashBase => break,
                        Decoded::SlashRecursive(orig) => {
                            let (last, betas) = children.split_last().unwrap();
                            let mut kids = vec![cur];
                            for b in betas {
                                kids.push(self.glct_to_spec(b)?);
                            }
                            let mut rhs = vec![p.slashed(&orig.rhs[0], &den)];
                            rhs.extend(orig.rhs[1..].iter().cloned());
                            cur = self.make(p.slashed(&orig.lhs, &den), rhs, orig.weight.clone(), kids);
                            node = last;
                        }
                        _ => return Err(malformed(format!("{} in a slash chain", shape_of(rule)))),
                    }
                }
                Ok(cur)
            }
            _ => {
                let kids = children.iter().map(|c| self.glct_to_spec(c)).collect::<Result<_>>()?;
                Ok(Derivation::node(rule.clone(), kids))
            }
        }
    }
}
