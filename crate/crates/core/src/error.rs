use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),

    #[error("invalid transformation parameters: {0}")]
    InvalidParams(String),

    #[error("grammar admits infinitely many derivations of some yield: {0}")]
    UnboundedDerivations(String),

    #[error("derivation uses a rule outside the grammar: {0}")]
    ForeignRule(String),

    #[error("derivation does not have the expected shape: {0}")]
    MalformedShape(String),

    #[error("grammar has unary rules: {}", .0.join("; "))]
    HasUnaryRules(Vec<String>),

    #[error("grammar has nullary rules: {}", .0.join("; "))]
    HasNullaryRules(Vec<String>),

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("grammar is not the output of a left-corner transformation: {0}")]
    NotGlctShape(String),

    #[error("star diverges: {0}")]
    StarDivergence(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("treebank contains nullary constituents in trees {}", fmt_indices(.0))]
    NullaryInTreebank(Vec<usize>),

    #[error("treebank is empty")]
    EmptyTreebank,

    #[error("{0}")]
    InvalidArgument(String),
}

fn fmt_indices(ix: &[usize]) -> String {
    ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrammar(_) => "invalid-grammar",
            Error::InvalidParams(_) => "invalid-params",
            Error::UnboundedDerivations(_) => "unbounded-derivations",
            Error::ForeignRule(_) => "foreign-rule",
            Error::MalformedShape(_) => "malformed-shape",
            Error::HasUnaryRules(_) => "has-unary-rules",
            Error::HasNullaryRules(_) => "has-nullary-rules",
            Error::NoConvergence { .. } => "no-convergence",
            Error::NotGlctShape(_) => "not-glct-shape",
            Error::StarDivergence(_) => "star-divergence",
            Error::Parse { .. } => "parse-error",
            Error::NullaryInTreebank(_) => "nullary-in-treebank",
            Error::EmptyTreebank => "empty-treebank",
            Error::InvalidArgument(_) => "invalid-argument",
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
