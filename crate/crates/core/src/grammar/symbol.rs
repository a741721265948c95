use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

/// Identifier of one transformation instance. Frozen and slashed symbols
/// carry it so that symbols minted by different instances never collide
/// with each other or with the input grammar's nonterminals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransformId(pub u32);

static NEXT_TRANSFORM_ID: AtomicU32 = AtomicU32::new(1);

impl TransformId {
    /// A process-unique id, strictly greater than every id handed out or
    /// [reserved](TransformId::reserve) so far.
    pub fn fresh() -> Self {
        TransformId(NEXT_TRANSFORM_ID.fetch_add(1, Ordering::Relaxed))
    }

    /// Make sure later calls to [`fresh`](TransformId::fresh) never return
    /// `id`. Called when ids are read back from files.
    pub fn reserve(id: TransformId) {
        NEXT_TRANSFORM_ID.fetch_max(id.0.saturating_add(1), Ordering::Relaxed);
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A grammar symbol.
///
/// Symbols order by variant first (terminal, nonterminal, frozen, slashed),
/// then by name and transform id.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(Arc<str>),
    Nonterminal(Arc<str>),
    /// `~X`: derivations of `X` without a left corner.
    Frozen(Arc<Symbol>, TransformId),
    /// `X/α`: derivations of `X` whose `α` left corner was replaced by ε.
    Slashed(Arc<Symbol>, Arc<Symbol>, TransformId),
}

impl Symbol {
    pub fn t(name: &str) -> Self {
        Symbol::Terminal(name.into())
    }

    pub fn nt(name: &str) -> Self {
        Symbol::Nonterminal(name.into())
    }

    /// `~α`; a terminal freezes to itself.
    pub fn frozen(base: &Symbol, id: TransformId) -> Self {
        if base.is_terminal() {
            base.clone()
        } else {
            Symbol::Frozen(Arc::new(base.clone()), id)
        }
    }

    pub fn slashed(numerator: &Symbol, denominator: &Symbol, id: TransformId) -> Self {
        Symbol::Slashed(Arc::new(numerator.clone()), Arc::new(denominator.clone()), id)
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Symbol::Terminal(_))
    }

    pub fn is_nonterminal(&self) -> bool {
        !self.is_terminal()
    }

    /// Base of a frozen symbol minted by transform `id`.
    pub fn as_frozen(&self, id: TransformId) -> Option<&Symbol> {
        match self {
            Symbol::Frozen(base, i) if *i == id => Some(base),
            _ => None,
        }
    }

    /// `(numerator, denominator)` of a slashed symbol minted by transform `id`.
    pub fn as_slashed(&self, id: TransformId) -> Option<(&Symbol, &Symbol)> {
        match self {
            Symbol::Slashed(num, den, i) if *i == id => Some((num, den)),
            _ => None,
        }
    }

    /// Every transform id mentioned anywhere inside the symbol.
    pub fn transform_ids(&self, out: &mut Vec<TransformId>) {
        match self {
            Symbol::Terminal(_) | Symbol::Nonterminal(_) => {}
            Symbol::Frozen(base, id) => {
                out.push(*id);
                base.transform_ids(out);
            }
            Symbol::Slashed(num, den, id) => {
                out.push(*id);
                num.transform_ids(out);
                den.transform_ids(out);
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::text::symbol_to_string(self, true))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_terminal_is_identity() {
        let a = Symbol::t("a");
        assert_eq!(Symbol::frozen(&a, TransformId(7)), a);
    }

    #[test]
    fn transform_instances_do_not_collide() {
        let x = Symbol::nt("X");
        let f1 = Symbol::frozen(&x, TransformId(1));
        let f2 = Symbol::frozen(&x, TransformId(2));
        assert_ne!(f1, f2);
        assert_ne!(f1, x);
        let s1 = Symbol::slashed(&x, &x, TransformId(1));
        assert_ne!(s1, Symbol::slashed(&x, &x, TransformId(2)));
        assert_ne!(s1, f1);
    }

    #[test]
    fn ordering_is_by_variant_then_name() {
        let mut v = [
            Symbol::slashed(&Symbol::nt("A"), &Symbol::nt("A"), TransformId(1)),
            Symbol::frozen(&Symbol::nt("A"), TransformId(1)),
            Symbol::nt("B"),
            Symbol::nt("A"),
            Symbol::t("z"),
        ];
        v.sort();
        assert_eq!(v[0], Symbol::t("z"));
        assert_eq!(v[1], Symbol::nt("A"));
        assert_eq!(v[2], Symbol::nt("B"));
        assert!(matches!(v[3], Symbol::Frozen(..)));
    }

    #[test]
    fn fresh_ids_skip_reserved() {
        TransformId::reserve(TransformId(10_000));
        assert!(TransformId::fresh().0 > 10_000);
    }
}
