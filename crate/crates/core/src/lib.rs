//! Semiring-weighted context-free grammars and the generalized left-corner
//! transformation.

pub mod derivmap;
pub mod error;
pub mod grammar;
pub mod ingest;
pub mod leftrec;
pub mod pipeline;
pub mod preprocess;
pub mod semiring;
pub mod transform;

pub use error::{Error, Result};
pub use grammar::{Derivation, Grammar, Rule, Symbol, TransformId};
pub use semiring::{Boolean, Real, Semiring, SemiringKind, Viterbi};
