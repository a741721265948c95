//! Grammar statistics and the transform, trim, binarize, nullary-removal
//! pipeline used to compare GLCT with SLCT.

use std::fmt;

use crate::error::Result;
use crate::grammar::{trim, Grammar};
use crate::leftrec::{bottoms, left_recursion_graph, left_recursive_rules, lr_depth, sccs, LrDepth};
use crate::preprocess::{binarize, eliminate_nullary};
use crate::semiring::Semiring;
use crate::transform::{glct, TransformParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrammarStats {
    pub size: usize,
    pub rules: usize,
    /// Number of strongly connected components of the left-recursion graph.
    pub components: usize,
    pub left_recursive_rules: usize,
    pub lr_depth: LrDepth,
    pub acyclic: bool,
}

pub fn stats<W: Semiring>(g: &Grammar<W>) -> GrammarStats {
    let graph = left_recursion_graph(g);
    GrammarStats {
        size: g.size(),
        rules: g.rule_count(),
        components: sccs(&graph).count,
        left_recursive_rules: left_recursive_rules(g).len(),
        lr_depth: lr_depth(g),
        acyclic: graph.is_acyclic(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub size: usize,
    pub rules: usize,
}

impl<W: Semiring> From<&Grammar<W>> for Counts {
    fn from(g: &Grammar<W>) -> Self {
        Counts {
            size: g.size(),
            rules: g.rule_count(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Glct,
    Slct,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Glct => "GLCT",
            Method::Slct => "SLCT",
        })
    }
}

/// One method's output measured raw, after trimming, and after
/// binarization plus nullary removal of the trimmed grammar.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRow {
    pub method: Method,
    pub raw: Counts,
    pub trimmed: Counts,
    pub nullary_free: Counts,
    /// Whether the trimmed output's left-recursion graph is acyclic.
    pub acyclic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub input: Counts,
    pub rows: Vec<PipelineRow>,
}

/// Outputs of each pipeline stage for one transformation.
#[derive(Clone, Debug)]
pub struct PipelineStages<W> {
    pub params: TransformParams,
    pub raw: Grammar<W>,
    pub trimmed: Grammar<W>,
    pub nullary_free: Grammar<W>,
}

/// Parameters for each method: both take `P` as the left-recursive rules;
/// GLCT takes `X = bottoms(P)`, SLCT takes `X = N ∪ V`.
pub fn method_params<W: Semiring>(g: &Grammar<W>, method: Method) -> Result<TransformParams> {
    let p = left_recursive_rules(g);
    match method {
        Method::Glct => {
            let x = bottoms(g, &p);
            TransformParams::new(g, p, x)
        }
        Method::Slct => TransformParams::new(g, p, g.symbols().cloned()),
    }
}

pub fn run_stages<W: Semiring>(g: &Grammar<W>, method: Method) -> Result<PipelineStages<W>> {
    let params = method_params(g, method)?;
    let raw = glct(g, &params)?;
    let trimmed = trim(&raw);
    let nullary_free = trim(&eliminate_nullary(&binarize(&trimmed))?.grammar);
    Ok(PipelineStages {
        params,
        raw,
        trimmed,
        nullary_free,
    })
}

/// Size and rule counts of GLCT and SLCT at each pipeline stage.
pub fn table1<W: Semiring>(g: &Grammar<W>) -> Result<PipelineReport> {
    let mut rows = Vec::new();
    for method in [Method::Slct, Method::Glct] {
        let s = run_stages(g, method)?;
        rows.push(PipelineRow {
            method,
            raw: (&s.raw).into(),
            trimmed: (&s.trimmed).into(),
            nullary_free: (&s.nullary_free).into(),
            acyclic: left_recursion_graph(&s.trimmed).is_acyclic(),
        });
    }
    Ok(PipelineReport { input: g.into(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::fixtures::possessive;

    #[test]
    fn stats_of_the_possessive_grammar() {
        let s = stats(&possessive());
        assert_eq!(s.size, 15);
        assert_eq!(s.rules, 6);
        assert_eq!(s.components, 8);
        assert_eq!(s.left_recursive_rules, 2);
        assert_eq!(s.lr_depth, LrDepth::Unbounded);
        assert!(!s.acyclic);
    }

    #[test]
    fn table_on_the_possessive_grammar() {
        let report = table1(&possessive()).unwrap();
        assert_eq!(report.input, Counts { size: 15, rules: 6 });
        let [slct, glct] = [&report.rows[0], &report.rows[1]];
        assert_eq!(slct.method, Method::Slct);
        assert!(glct.raw.size <= slct.raw.size);
        assert!(glct.trimmed.size <= slct.trimmed.size);
        assert_eq!(glct.nullary_free, slct.nullary_free);
        assert!(slct.acyclic && glct.acyclic);
    }
}
