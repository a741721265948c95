use std::collections::HashMap;
use std::sync::Arc;

use super::{Grammar, Rule, Symbol};
use crate::semiring::Semiring;

/// A derivation tree. Internal nodes keep the rule applied at them, so the
/// weight needs no grammar lookup.
#[derive(Clone, Debug, PartialEq)]
pub enum Derivation<W> {
    Leaf(Symbol),
    Node {
        rule: Arc<Rule<W>>,
        children: Vec<Derivation<W>>,
    },
}

impl<W: Semiring> Derivation<W> {
    pub fn leaf(terminal: Symbol) -> Self {
        debug_assert!(terminal.is_terminal());
        Derivation::Leaf(terminal)
    }

    pub fn node(rule: Arc<Rule<W>>, children: Vec<Derivation<W>>) -> Self {
        debug_assert_eq!(rule.rhs.len(), children.len());
        Derivation::Node { rule, children }
    }

    pub fn label(&self) -> &Symbol {
        match self {
            Derivation::Leaf(s) => s,
            Derivation::Node { rule, .. } => &rule.lhs,
        }
    }

    pub fn children(&self) -> &[Derivation<W>] {
        match self {
            Derivation::Leaf(_) => &[],
            Derivation::Node { children, .. } => children,
        }
    }

    pub fn rule(&self) -> Option<&Arc<Rule<W>>> {
        match self {
            Derivation::Leaf(_) => None,
            Derivation::Node { rule, .. } => Some(rule),
        }
    }

    /// Left-to-right terminal leaves.
    pub fn yield_(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect_yield(&mut out);
        out
    }

    fn collect_yield(&self, out: &mut Vec<Symbol>) {
        match self {
            Derivation::Leaf(s) => out.push(s.clone()),
            Derivation::Node { children, .. } => {
                for c in children {
                    c.collect_yield(out);
                }
            }
        }
    }

    /// `⊗`-product of the rule weights; `1̄` for a leaf.
    pub fn weight(&self) -> W {
        match self {
            Derivation::Leaf(_) => W::one(),
            Derivation::Node { rule, children } => children
                .iter()
                .fold(rule.weight.clone(), |acc, c| acc.times(&c.weight())),
        }
    }

    /// Number of levels: a leaf (or a nullary node) has height 1.
    pub fn height(&self) -> usize {
        1 + self.children().iter().map(Self::height).max().unwrap_or(0)
    }

    /// Number of edges from the root to the leftmost leaf.
    pub fn left_depth(&self) -> usize {
        match self.children().first() {
            None => 0,
            Some(c) => 1 + c.left_depth(),
        }
    }

    /// Pre-order walk over every rule application.
    pub fn for_each_rule(&self, f: &mut impl FnMut(&Arc<Rule<W>>)) {
        if let Derivation::Node { rule, children } = self {
            f(rule);
            for c in children {
                c.for_each_rule(f);
            }
        }
    }
}

/// Every derivation rooted at `root` of height at most `max_height`.
///
/// Trees are ordered by rule order first, then lexicographically by
/// children (the first child varies slowest).
pub fn enumerate_derivations<W: Semiring>(
    grammar: &Grammar<W>,
    root: &Symbol,
    max_height: usize,
) -> Vec<Derivation<W>> {
    let mut by_lhs: HashMap<&Symbol, Vec<Arc<Rule<W>>>> = HashMap::new();
    for r in grammar.rules() {
        by_lhs.entry(&r.lhs).or_default().push(Arc::new(r.clone()));
    }
    let mut memo = HashMap::new();
    enumerate(&by_lhs, root, max_height, &mut memo)
}

type Memo<W> = HashMap<(Symbol, usize), Vec<Derivation<W>>>;

fn enumerate<W: Semiring>(
    by_lhs: &HashMap<&Symbol, Vec<Arc<Rule<W>>>>,
    sym: &Symbol,
    height: usize,
    memo: &mut Memo<W>,
) -> Vec<Derivation<W>> {
    if height == 0 {
        return Vec::new();
    }
    if sym.is_terminal() {
        return vec![Derivation::Leaf(sym.clone())];
    }
    let key = (sym.clone(), height);
    if let Some(done) = memo.get(&key) {
        return done.clone();
    }
    let mut out = Vec::new();
    if let Some(rules) = by_lhs.get(sym) {
        for rule in rules {
            let options: Vec<Vec<Derivation<W>>> = rule
                .rhs
                .iter()
                .map(|s| enumerate(by_lhs, s, height - 1, memo))
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = vec![0usize; options.len()];
            'product: loop {
                let children = idx.iter().zip(&options).map(|(&i, opts)| opts[i].clone()).collect();
                out.push(Derivation::Node {
                    rule: rule.clone(),
                    children,
                });
                // odometer, last position fastest
                let mut pos = options.len();
                loop {
                    if pos == 0 {
                        break 'product;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < options[pos].len() {
                        break;
                    }
                    idx[pos] = 0;
                }
            }
        }
    }
    memo.insert(key, out.clone());
    out
}
