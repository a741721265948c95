//! Commutative semirings with a (partial) Kleene star.
//!
//! Weights are plain value types implementing [`Semiring`]; a grammar is
//! generic over its weight type. Three carriers ship with the crate:
//!
//! - [`Boolean`]: `({false, true}, or, and, false, true)`, string membership.
//! - [`Real`]: nonnegative reals extended with `inf`, `(+, *, 0, 1)`.
//! - [`Viterbi`]: `[0, 1]` with `(max, *, 0, 1)`, best-derivation weight.
//!
//! The Viterbi carrier is sometimes written with its two identities listed
//! in the opposite order. Here `zero()` is `0` (the identity of `max` over
//! `[0, 1]`) and `one()` is `1` (the identity of the product).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative tolerance used by approximate equality on floating carriers.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance used by approximate equality on floating carriers.
pub const ABSOLUTE_TOLERANCE: f64 = 1e-12;

/// A commutative semiring `(W, plus, times, zero, one)` with a partial star.
pub trait Semiring: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Selector name, as accepted by [`SemiringKind`].
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;

    /// Kleene star, the least solution of `x = 1 + a x`. `None` when the
    /// carrier has no such element.
    fn star(&self) -> Option<Self>;

    /// Equality up to the carrier's tolerance (exact for discrete carriers).
    fn approx_eq(&self, other: &Self) -> bool;

    /// Distance used by fixed-point iteration to decide convergence.
    fn distance(&self, other: &Self) -> f64;

    /// Parse the textual form produced by `Display`.
    fn parse_weight(text: &str) -> Option<Self>;

    /// True for values that signal a diverging sum (e.g. an infinite real).
    fn is_divergent(&self) -> bool {
        false
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn sum<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        values.into_iter().fold(Self::zero(), |acc, v| acc.plus(v))
    }

    fn product<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        values.into_iter().fold(Self::one(), |acc, v| acc.times(v))
    }
}

fn float_approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    if a.is_infinite() || b.is_infinite() || a.is_nan() || b.is_nan() {
        return false;
    }
    let diff = (a - b).abs();
    diff <= ABSOLUTE_TOLERANCE || diff <= RELATIVE_TOLERANCE * a.abs().max(b.abs())
}

fn float_distance(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// The boolean semiring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Boolean(pub bool);

impl Semiring for Boolean {
    const NAME: &'static str = "boolean";

    fn zero() -> Self {
        Boolean(false)
    }

    fn one() -> Self {
        Boolean(true)
    }

    fn plus(&self, other: &Self) -> Self {
        Boolean(self.0 || other.0)
    }

    fn times(&self, other: &Self) -> Self {
        Boolean(self.0 && other.0)
    }

    fn star(&self) -> Option<Self> {
        Some(Boolean(true))
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn distance(&self, other: &Self) -> f64 {
        if self == other {
            0.0
        } else {
            1.0
        }
    }

    fn parse_weight(text: &str) -> Option<Self> {
        match text {
            "true" | "1" | "⊤" | "T" => Some(Boolean(true)),
            "false" | "0" | "⊥" | "F" => Some(Boolean(false)),
            _ => None,
        }
    }
}

impl fmt::Display for Boolean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 { "true" } else { "false" })
    }
}

/// Nonnegative reals with infinity. `0 * inf = 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Real(pub f64);

impl Real {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Semiring for Real {
    const NAME: &'static str = "real";

    fn zero() -> Self {
        Real(0.0)
    }

    fn one() -> Self {
        Real(1.0)
    }

    fn plus(&self, other: &Self) -> Self {
        Real(self.0 + other.0)
    }

    fn times(&self, other: &Self) -> Self {
        if self.0 == 0.0 || other.0 == 0.0 {
            Real(0.0)
        } else {
            Real(self.0 * other.0)
        }
    }

    fn star(&self) -> Option<Self> {
        if self.0 < 1.0 {
            Some(Real(1.0 / (1.0 - self.0)))
        } else {
            Some(Real(f64::INFINITY))
        }
    }

    fn approx_eq(&self, other: &Self) -> bool {
        float_approx_eq(self.0, other.0)
    }

    fn distance(&self, other: &Self) -> f64 {
        float_distance(self.0, other.0)
    }

    fn parse_weight(text: &str) -> Option<Self> {
        let v = f64::from_str(text).ok()?;
        (v >= 0.0).then_some(Real(v))
    }

    fn is_divergent(&self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The Viterbi semiring on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Viterbi(pub f64);

impl Viterbi {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Semiring for Viterbi {
    const NAME: &'static str = "viterbi";

    fn zero() -> Self {
        Viterbi(0.0)
    }

    fn one() -> Self {
        Viterbi(1.0)
    }

    fn plus(&self, other: &Self) -> Self {
        Viterbi(self.0.max(other.0))
    }

    fn times(&self, other: &Self) -> Self {
        Viterbi(self.0 * other.0)
    }

    fn star(&self) -> Option<Self> {
        Some(Viterbi(1.0))
    }

    fn approx_eq(&self, other: &Self) -> bool {
        float_approx_eq(self.0, other.0)
    }

    fn distance(&self, other: &Self) -> f64 {
        float_distance(self.0, other.0)
    }

    fn parse_weight(text: &str) -> Option<Self> {
        let v = f64::from_str(text).ok()?;
        (0.0..=1.0).contains(&v).then_some(Viterbi(v))
    }
}

impl fmt::Display for Viterbi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Runtime selector for the shipped carriers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemiringKind {
    Boolean,
    Real,
    Viterbi,
}

impl SemiringKind {
    pub fn name(self) -> &'static str {
        match self {
            SemiringKind::Boolean => Boolean::NAME,
            SemiringKind::Real => Real::NAME,
            SemiringKind::Viterbi => Viterbi::NAME,
        }
    }
}

impl FromStr for SemiringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boolean" => Ok(SemiringKind::Boolean),
            "real" => Ok(SemiringKind::Real),
            "viterbi" => Ok(SemiringKind::Viterbi),
            other => Err(Error::InvalidArgument(format!("unknown semiring `{other}`"))),
        }
    }
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One failed axiom instance found by [`check_axioms`].
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    pub operands: Vec<String>,
}

/// Result of [`check_axioms`]; empty when every sampled instance held.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the semiring laws (plus commutativity, associativity of both
/// operations, identities, distributivity, annihilation, commutativity of
/// times, and the star fixed point) on every triple drawn from `samples`.
pub fn check_axioms<W: Semiring>(samples: &[W]) -> AxiomReport {
    let mut report = AxiomReport::default();
    let mut fail = |axiom: &'static str, ops: &[&W]| {
        report.violations.push(AxiomViolation {
            axiom,
            operands: ops.iter().map(|w| w.to_string()).collect(),
        });
    };
    let zero = W::zero();
    let one = W::one();
    for a in samples {
        if !a.plus(&zero).approx_eq(a) || !zero.plus(a).approx_eq(a) {
            fail("plus identity", &[a]);
        }
        if !a.times(&one).approx_eq(a) || !one.times(a).approx_eq(a) {
            fail("times identity", &[a]);
        }
        if !a.times(&zero).approx_eq(&zero) || !zero.times(a).approx_eq(&zero) {
            fail("annihilation", &[a]);
        }
        if let Some(s) = a.star() {
            if !one.plus(&a.times(&s)).approx_eq(&s) {
                fail("star fixed point", &[a]);
            }
        }
        for b in samples {
            if !a.plus(b).approx_eq(&b.plus(a)) {
                fail("plus commutativity", &[a, b]);
            }
            if !a.times(b).approx_eq(&b.times(a)) {
                fail("times commutativity", &[a, b]);
            }
            for c in samples {
                if !a.plus(b).plus(c).approx_eq(&a.plus(&b.plus(c))) {
                    fail("plus associativity", &[a, b, c]);
                }
                if !a.times(b).times(c).approx_eq(&a.times(&b.times(c))) {
                    fail("times associativity", &[a, b, c]);
                }
                if !a.plus(b).times(c).approx_eq(&a.times(c).plus(&b.times(c))) {
                    fail("right distributivity", &[a, b, c]);
                }
                if !c.times(&a.plus(b)).approx_eq(&c.times(a).plus(&c.times(b))) {
                    fail("left distributivity", &[a, b, c]);
                }
            }
        }
    }
    report
}

/// A dense square matrix over a semiring.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<W> {
    n: usize,
    data: Vec<W>,
}

impl<W: Semiring> Matrix<W> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![W::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, W::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &W {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, w: W) {
        self.data[i * self.n + j] = w;
    }

    /// `self[i][j] ⊕= w`
    pub fn add_to(&mut self, i: usize, j: usize, w: &W) {
        let cell = &mut self.data[i * self.n + j];
        *cell = cell.plus(w);
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[W]) -> Vec<W> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(W::zero(), |acc, j| {
                    let a = self.get(i, j);
                    if a.is_zero() || v[j].is_zero() {
                        acc
                    } else {
                        acc.plus(&a.times(&v[j]))
                    }
                })
            })
            .collect()
    }

    /// Reflexive-transitive closure `M* = I ⊕ M M*`, by Gauss-Jordan style
    /// elimination over the semiring (Lehmann's algorithm), `O(n³)`.
    ///
    /// Fails with [`Error::StarDivergence`] when a pivot has no star or the
    /// closure contains a divergent value.
    pub fn star(&self) -> Result<Self> {
        let n = self.n;
        let mut cur = self.clone();
        for k in 0..n {
            let pivot = cur.get(k, k).clone();
            let pivot_star = pivot
                .star()
                .ok_or_else(|| Error::StarDivergence(format!("no star for pivot {pivot} at index {k}")))?;
            if pivot_star.is_divergent() {
                return Err(Error::StarDivergence(format!(
                    "star of pivot {pivot} at index {k} diverges"
                )));
            }
            let mut next = cur.clone();
            for i in 0..n {
                let left = cur.get(i, k);
                if left.is_zero() {
                    continue;
                }
                let left = left.times(&pivot_star);
                for j in 0..n {
                    let right = cur.get(k, j);
                    if right.is_zero() {
                        continue;
                    }
                    next.add_to(i, j, &left.times(right));
                }
            }
            cur = next;
        }
        for i in 0..n {
            cur.add_to(i, i, &W::one());
        }
        if let Some(bad) = cur.data.iter().find(|w| w.is_divergent()) {
            return Err(Error::StarDivergence(format!("closure entry {bad} diverges")));
        }
        Ok(cur)
    }
}
