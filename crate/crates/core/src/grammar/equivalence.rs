use std::collections::BTreeSet;
use std::fmt;

use super::{Grammar, Symbol, WeightOracle};
use crate::error::Result;
use crate::semiring::Semiring;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EquivalenceOptions {
    /// Longest string compared.
    pub max_len: usize,
    /// Whether the empty string is compared too. Nullary-rule elimination
    /// drops the start symbol's ε weight, so that check switches it off.
    pub include_empty: bool,
}

impl EquivalenceOptions {
    pub fn up_to(max_len: usize) -> Self {
        EquivalenceOptions {
            max_len,
            include_empty: true,
        }
    }

    pub fn nonempty_up_to(max_len: usize) -> Self {
        EquivalenceOptions {
            max_len,
            include_empty: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<W> {
    pub strings_checked: usize,
    /// The first string (in length-then-lexicographic order) whose weights
    /// differ, with the weight under each grammar.
    pub mismatch: Option<(Vec<Symbol>, W, W)>,
}

impl<W> EquivalenceReport<W> {
    pub fn is_equivalent(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl<W: Semiring> fmt::Display for EquivalenceReport<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mismatch {
            None => write!(f, "equivalent ({} strings checked)", self.strings_checked),
            Some((x, a, b)) => {
                write!(f, "mismatch on \"")?;
                for (i, s) in x.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, "\": {a} vs {b}")
            }
        }
    }
}

/// Compare `G_S(x)` and `G'_{S'}(x)` on every string over `V ∪ V'` of
/// length at most `max_len`, using approximate equality of the carrier.
pub fn equivalence_check<W: Semiring>(
    g1: &Grammar<W>,
    g2: &Grammar<W>,
    options: EquivalenceOptions,
) -> Result<EquivalenceReport<W>> {
    let o1 = WeightOracle::new(g1)?;
    let o2 = WeightOracle::new(g2)?;
    let alphabet: Vec<Symbol> = g1
        .terminals()
        .iter()
        .chain(g2.terminals())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut candidates: Vec<Vec<Symbol>> = Vec::new();
    if options.include_empty {
        candidates.push(Vec::new());
    }
    if !alphabet.is_empty() {
        for len in 1..=options.max_len {
            let mut idx = vec![0usize; len];
            loop {
                candidates.push(idx.iter().map(|&i| alphabet[i].clone()).collect());
                let mut pos = len;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < alphabet.len() {
                        break;
                    }
                    idx[pos] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
    }

    let mut checked = 0;
    for x in candidates {
        checked += 1;
        let a = o1.weight(g1.start(), &x);
        let b = o2.weight(g2.start(), &x);
        if !a.approx_eq(&b) {
            return Ok(EquivalenceReport {
                strings_checked: checked,
                mismatch: Some((x, a, b)),
            });
        }
    }
    Ok(EquivalenceReport {
        strings_checked: checked,
        mismatch: None,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::semiring::{Boolean, Real};

    #[test]
    fn reflexive() {
        let g = possessive();
        let r = equivalence_check(&g, &g, EquivalenceOptions::up_to(5)).unwrap();
        assert!(r.is_equivalent());
        // ε plus 4 + 16 + ... + 4^5 strings
        assert_eq!(r.strings_checked, 1 + 4 + 16 + 64 + 256 + 1024);
    }

    #[test]
    fn missing_rule_is_found_at_the_sentence() {
        let g = possessive();
        let mut rules = g.rules().to_vec();
        rules.pop();
        let h = Grammar::with_symbols(Symbol::nt("S"), g.symbols().cloned(), rules).unwrap();
        let r = equivalence_check(&g, &h, EquivalenceOptions::up_to(6)).unwrap();
        let (x, a, b) = r.mismatch.unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!((a, b), (Boolean(true), Boolean(false)));
    }

    #[test]
    fn weights_are_compared_approximately() {
        let g = Grammar::new(Symbol::nt("S"), vec![rule("S", &["'a"], Real(0.3))]).unwrap();
        let h = Grammar::new(
            Symbol::nt("S"),
            vec![rule("S", &["'a"], Real(0.1)), rule("S", &["'a"], Real(0.2))],
        )
        .unwrap();
        assert!(equivalence_check(&g, &h, EquivalenceOptions::up_to(3))
            .unwrap()
            .is_equivalent());
    }

    #[test]
    fn empty_string_can_be_skipped() {
        let g = Grammar::new(
            Symbol::nt("S"),
            vec![rule("S", &[], Real(0.5)), rule("S", &["'a"], Real(0.5))],
        )
        .unwrap();
        let h = Grammar::new(Symbol::nt("S"), vec![rule("S", &["'a"], Real(0.5))]).unwrap();
        assert!(!equivalence_check(&g, &h, EquivalenceOptions::up_to(2))
            .unwrap()
            .is_equivalent());
        assert!(equivalence_check(&g, &h, EquivalenceOptions::nonempty_up_to(2))
            .unwrap()
            .is_equivalent());
    }
}
