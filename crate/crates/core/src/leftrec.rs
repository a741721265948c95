//! Left-recursion analysis and elimination.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{trim, Grammar, Symbol};
use crate::semiring::Semiring;
use crate::transform::{glct, TransformParams};

/// Edge `lhs → rhs[0]` labeled by the index of the rule it comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rule: usize,
}

/// Nodes are `V ∪ N` (in symbol order); one edge per non-nullary rule.
#[derive(Clone, Debug)]
pub struct LeftRecursionGraph {
    nodes: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    by_rule: HashMap<usize, usize>,
}

impl LeftRecursionGraph {
    pub fn new<W: Semiring>(g: &Grammar<W>) -> Self {
        let nodes: Vec<Symbol> = g.symbols().cloned().collect();
        let index: HashMap<Symbol, usize> = nodes.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut edges = Vec::new();
        let mut out = vec![Vec::new(); nodes.len()];
        let mut by_rule = HashMap::new();
        for (ri, r) in g.rules().iter().enumerate() {
            let Some(first) = r.rhs.first() else { continue };
            let e = Edge {
                from: index[&r.lhs],
                to: index[first],
                rule: ri,
            };
            out[e.from].push(edges.len());
            by_rule.insert(ri, edges.len());
            edges.push(e);
        }
        LeftRecursionGraph {
            nodes,
            index,
            edges,
            out,
            by_rule,
        }
    }

    pub fn nodes(&self) -> &[Symbol] {
        &self.nodes
    }

    pub fn node_index(&self, s: &Symbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn outgoing(&self, node: usize) -> impl Iterator<Item = &Edge> {
        self.out[node].iter().map(|&e| &self.edges[e])
    }

    pub fn edge_of_rule(&self, rule: usize) -> Option<&Edge> {
        self.by_rule.get(&rule).map(|&e| &self.edges[e])
    }

    /// No directed cycle, self-loops included.
    pub fn is_acyclic(&self) -> bool {
        let sccs = sccs(self);
        sccs.count == self.nodes.len() && self.edges.iter().all(|e| e.from != e.to)
    }
}

pub fn left_recursion_graph<W: Semiring>(g: &Grammar<W>) -> LeftRecursionGraph {
    LeftRecursionGraph::new(g)
}

/// Strongly connected components: `component[node]` and the count.
/// Ids follow reverse topological order (components with no edges into
/// unvisited components come first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sccs {
    pub component: Vec<usize>,
    pub count: usize,
}

pub fn sccs(graph: &LeftRecursionGraph) -> Sccs {
    let adjacency: Vec<Vec<usize>> = graph
        .out
        .iter()
        .map(|es| es.iter().map(|&e| graph.edges[e].to).collect())
        .collect();
    strongly_connected(&adjacency)
}

/// Tarjan's algorithm, iterative, over adjacency lists.
pub fn strongly_connected(adjacency: &[Vec<usize>]) -> Sccs {
    const UNSEEN: usize = usize::MAX;
    let n = adjacency.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![UNSEEN; n];
    let mut count = 0;
    let mut next = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if let Some(&w) = adjacency[v].get(*ei) {
                *ei += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        component[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    Sccs { component, count }
}

/// Indices of rules whose edge stays inside one component.
pub fn left_recursive_rules<W: Semiring>(g: &Grammar<W>) -> BTreeSet<usize> {
    let graph = LeftRecursionGraph::new(g);
    let c = sccs(&graph);
    graph
        .edges
        .iter()
        .filter(|e| c.component[e.from] == c.component[e.to])
        .map(|e| e.rule)
        .collect()
}

/// Symbols that can end a spine of `P` rules: the leftmost symbols of `P`
/// rules that are terminals or have an edge from a rule outside `P`.
pub fn bottoms<W: Semiring>(g: &Grammar<W>, p: &BTreeSet<usize>) -> BTreeSet<Symbol> {
    let mut escapes: BTreeSet<&Symbol> = g.terminals().iter().collect();
    let mut leftmost: BTreeSet<&Symbol> = BTreeSet::new();
    for (i, r) in g.rules().iter().enumerate() {
        let Some(first) = r.rhs.first() else { continue };
        if p.contains(&i) {
            leftmost.insert(first);
        } else {
            escapes.insert(&r.lhs);
        }
    }
    leftmost.intersection(&escapes).map(|s| (*s).clone()).collect()
}

/// Remove left recursion: `trim(glct(G, P, bottoms(P)))` with `P` the
/// left-recursive rules. The output's left-recursion graph is acyclic.
pub fn eliminate_left_recursion<W: Semiring>(g: &Grammar<W>) -> Result<(Grammar<W>, TransformParams)> {
    let unary: Vec<String> = g.nonterminal_unary_rules().map(|(i, r)| format!("{i}: {r}")).collect();
    if !unary.is_empty() {
        return Err(Error::HasUnaryRules(unary));
    }
    let nullary: Vec<String> = g.nullary_rules().map(|(i, r)| format!("{i}: {r}")).collect();
    if !nullary.is_empty() {
        return Err(Error::HasNullaryRules(nullary));
    }
    let p = left_recursive_rules(g);
    let x = bottoms(g, &p);
    let params = TransformParams::new(g, p, x)?;
    Ok((trim(&glct(g, &params)?), params))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LrDepth {
    Finite(usize),
    Unbounded,
}

impl fmt::Display for LrDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LrDepth::Finite(d) => write!(f, "{d}"),
            LrDepth::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Longest left-edge path from the start symbol in the graph of `trim(G)`,
/// or `Unbounded` if a cycle is reachable.
pub fn lr_depth<W: Semiring>(g: &Grammar<W>) -> LrDepth {
    let t = trim(g);
    let graph = LeftRecursionGraph::new(&t);
    let start = graph.index[t.start()];
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done(usize),
    }
    let mut mark = vec![Mark::New; graph.nodes.len()];
    let mut call: Vec<(usize, usize)> = vec![(start, 0)];
    mark[start] = Mark::Open;
    let mut best = vec![0usize; graph.nodes.len()];
    while let Some(&mut (v, ref mut ei)) = call.last_mut() {
        if let Some(&e) = graph.out[v].get(*ei) {
            *ei += 1;
            let w = graph.edges[e].to;
            match mark[w] {
                Mark::New => {
                    mark[w] = Mark::Open;
                    call.push((w, 0));
                }
                Mark::Open => return LrDepth::Unbounded,
                Mark::Done(d) => best[v] = best[v].max(d + 1),
            }
        } else {
            call.pop();
            mark[v] = Mark::Done(best[v]);
            if let Some(&(parent, _)) = call.last() {
                best[parent] = best[parent].max(best[v] + 1);
            }
        }
    }
    LrDepth::Finite(best[start])
}
