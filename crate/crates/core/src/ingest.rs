//! Treebank reading and maximum-likelihood grammar extraction.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Rule, Symbol};
use crate::semiring::Real;

/// A constituency tree with string labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Leaf(String),
    Node { label: String, children: Vec<Tree> },
}

impl Tree {
    pub fn leaf(word: &str) -> Self {
        Tree::Leaf(word.to_string())
    }

    pub fn node(label: &str, children: Vec<Tree>) -> Self {
        Tree::Node {
            label: label.to_string(),
            children,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Tree::Leaf(w) => w,
            Tree::Node { label, .. } => label,
        }
    }

    fn has_empty_node(&self) -> bool {
        match self {
            Tree::Leaf(_) => false,
            Tree::Node { children, .. } => children.is_empty() || children.iter().any(Tree::has_empty_node),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, text: &str) -> fmt::Result {
    let escaped = text.replace('\\', "\\\\").replace('\'', "\\'");
    write!(f, "'{escaped}'")
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(w) => write_quoted(f, w),
            Tree::Node { label, children } => {
                f.write_str("(")?;
                if label.is_empty() || label.starts_with('\'') || label.chars().any(is_delimiter) {
                    write_quoted(f, label)?;
                } else {
                    f.write_str(label)?;
                }
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Treebank {
    pub trees: Vec<Tree>,
}

impl Treebank {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

pub fn read_treebank(path: impl AsRef<Path>) -> Result<Treebank> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_treebank(&text)
}

/// Parse a sequence of bracketed trees, one or more per line or spread over
/// several lines. Leaves may be single-quoted (`'word'`) or bare PTB tokens;
/// a tree wrapped in an unlabeled outer bracket, `( (S ...) )`, is
/// unwrapped.
pub fn parse_treebank(text: &str) -> Result<Treebank> {
    let mut lexer = Lexer::new(text);
    let mut trees = Vec::new();
    while let Some(tok) = lexer.next()? {
        match tok.kind {
            Tok::Open => trees.push(parse_node(&mut lexer, tok.line, tok.column, true)?),
            _ => return Err(tok.error("expected '(' to start a tree")),
        }
    }
    Ok(Treebank { trees })
}

fn parse_node(lexer: &mut Lexer, line: usize, column: usize, outermost: bool) -> Result<Tree> {
    let unclosed = || Error::Parse {
        line,
        column,
        message: "unclosed '('".to_string(),
    };
    let first = lexer.next()?.ok_or_else(unclosed)?;
    let label = match first.kind {
        Tok::Atom(a) => a.text,
        Tok::Open if outermost => {
            let inner = parse_node(lexer, first.line, first.column, false)?;
            let close = lexer.next()?.ok_or_else(unclosed)?;
            return match close.kind {
                Tok::Close => Ok(inner),
                _ => Err(close.error("an unlabeled outer bracket must hold exactly one tree")),
            };
        }
        Tok::Open => return Err(first.error("missing node label")),
        Tok::Close => return Err(first.error("empty brackets")),
    };
    let mut children = Vec::new();
    loop {
        let tok = lexer.next()?.ok_or_else(unclosed)?;
        match tok.kind {
            Tok::Close => return Ok(Tree::Node { label, children }),
            Tok::Open => children.push(parse_node(lexer, tok.line, tok.column, false)?),
            Tok::Atom(a) if a.text == "ε" && !a.quoted => {}
            Tok::Atom(a) => children.push(Tree::Leaf(a.text)),
        }
    }
}

struct Atom {
    text: String,
    quoted: bool,
}

enum Tok {
    Open,
    Close,
    Atom(Atom),
}

struct Token {
    kind: Tok,
    line: usize,
    column: usize,
}

impl Token {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message: message.to_string(),
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')'
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn advance(&mut self) -> Option<char> {
        let c = *self.chars.get(self.pos)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Length in chars of a well-formed quoted literal at the cursor that
    /// ends at a delimiter, with its decoded text.
    fn quoted_at(&self) -> Option<(usize, String)> {
        let mut i = self.pos + 1;
        let mut text = String::new();
        loop {
            match *self.chars.get(i)? {
                '\'' => break,
                '\n' => return None,
                '\\' => {
                    let c = *self.chars.get(i + 1)?;
                    if c != '\'' && c != '\\' {
                        return None;
                    }
                    text.push(c);
                    i += 2;
                }
                c => {
                    text.push(c);
                    i += 1;
                }
            }
        }
        let end = i + 1;
        let at_delimiter = self.chars.get(end).is_none_or(|&c| is_delimiter(c));
        (at_delimiter && !text.is_empty()).then(|| (end - self.pos, text))
    }

    fn next(&mut self) -> Result<Option<Token>> {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.advance();
        }
        let (line, column) = (self.line, self.column);
        let Some(&c) = self.chars.get(self.pos) else {
            return Ok(None);
        };
        let quoted = if c == '\'' { self.quoted_at() } else { None };
        let kind = match c {
            _ if quoted.is_some() => {
                let (len, text) = quoted.unwrap();
                for _ in 0..len {
                    self.advance();
                }
                Tok::Atom(Atom { text, quoted: true })
            }
            '(' => {
                self.advance();
                Tok::Open
            }
            ')' => {
                self.advance();
                Tok::Close
            }
            _ => {
                let mut text = String::new();
                while let Some(&c) = self.chars.get(self.pos) {
                    if is_delimiter(c) {
                        break;
                    }
                    text.push(c);
                    self.advance();
                }
                Tok::Atom(Atom { text, quoted: false })
            }
        };
        Ok(Some(Token { kind, line, column }))
    }
}

pub const DEFAULT_DELIMITERS: [&str; 3] = ["-", "=", "##"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Strip annotation suffixes from labels.
    pub strip: bool,
    pub delimiters: Vec<String>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            strip: false,
            delimiters: DEFAULT_DELIMITERS.iter().map(|d| d.to_string()).collect(),
        }
    }
}

impl ExtractOptions {
    pub fn stripping() -> Self {
        ExtractOptions {
            strip: true,
            ..Self::default()
        }
    }
}

/// Cut a label at the earliest delimiter occurrence past its first
/// character. Labels that both start and end with `-`, such as `-LRB-`,
/// are kept whole.
pub fn strip_label<'a>(label: &'a str, delimiters: &[String]) -> &'a str {
    if label.len() > 1 && label.starts_with('-') && label.ends_with('-') {
        return label;
    }
    let cut = delimiters
        .iter()
        .filter(|d| !d.is_empty())
        .filter_map(|d| label.get(1..).and_then(|rest| rest.find(d.as_str())).map(|i| i + 1))
        .min();
    cut.map_or(label, |i| &label[..i])
}

/// Splice the children of a sole nonterminal child into its parent until no
/// node has exactly one nonterminal child. The parent's label is kept.
pub fn collapse_unary(tree: &Tree) -> Tree {
    match tree {
        Tree::Leaf(_) => tree.clone(),
        Tree::Node { label, children } => {
            let mut kids: &[Tree] = children;
            while let [Tree::Node { children: grand, .. }] = kids {
                kids = grand;
            }
            Tree::Node {
                label: label.clone(),
                children: kids.iter().map(collapse_unary).collect(),
            }
        }
    }
}

fn relabel(tree: &Tree, options: &ExtractOptions) -> Tree {
    match tree {
        Tree::Leaf(_) => tree.clone(),
        Tree::Node { label, children } => {
            let label = if options.strip {
                strip_label(label, &options.delimiters)
            } else {
                label
            };
            Tree::node(label, children.iter().map(|c| relabel(c, options)).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    pub grammar: Grammar<Real>,
    /// Root label counts after relabeling.
    pub roots: BTreeMap<String, usize>,
    /// Whether several root labels shared the top count; the smallest wins.
    pub start_tied: bool,
}

fn count_rules(tree: &Tree, counts: &mut BTreeMap<(Symbol, Vec<Symbol>), usize>) {
    if let Tree::Node { label, children } = tree {
        let rhs = children
            .iter()
            .map(|c| match c {
                Tree::Leaf(w) => Symbol::t(w),
                Tree::Node { label, .. } => Symbol::nt(label),
            })
            .collect();
        *counts.entry((Symbol::nt(label), rhs)).or_default() += 1;
        for c in children {
            count_rules(c, counts);
        }
    }
}

/// Relabel, collapse unary chains, and estimate rule weights by relative
/// frequency per left-hand side. The start symbol is the most frequent root
/// label, ties going to the smallest.
pub fn extract_grammar(tb: &Treebank, options: &ExtractOptions) -> Result<Extraction> {
    if tb.is_empty() {
        return Err(Error::EmptyTreebank);
    }
    let empty: Vec<usize> = tb
        .trees
        .iter()
        .enumerate()
        .filter(|(_, t)| t.has_empty_node())
        .map(|(i, _)| i)
        .collect();
    if !empty.is_empty() {
        return Err(Error::NullaryInTreebank(empty));
    }
    let mut roots: BTreeMap<String, usize> = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for (i, t) in tb.trees.iter().enumerate() {
        let t = collapse_unary(&relabel(t, options));
        match &t {
            Tree::Node { label, .. } => *roots.entry(label.clone()).or_default() += 1,
            Tree::Leaf(w) => {
                return Err(Error::InvalidArgument(format!("tree {i} is a bare word {w:?}")));
            }
        }
        count_rules(&t, &mut counts);
    }
    let top = *roots.values().max().expect("nonempty treebank");
    let winners: Vec<&String> = roots.iter().filter(|(_, &c)| c == top).map(|(l, _)| l).collect();
    let start = Symbol::nt(winners[0]);
    let mut totals: BTreeMap<&Symbol, usize> = BTreeMap::new();
    for ((lhs, _), c) in &counts {
        *totals.entry(lhs).or_default() += c;
    }
    let rules = counts
        .iter()
        .map(|((lhs, rhs), &c)| Rule::new(lhs.clone(), rhs.clone(), Real(c as f64 / totals[lhs] as f64)))
        .collect();
    Ok(Extraction {
        grammar: Grammar::new(start, rules)?,
        start_tied: winners.len() > 1,
        roots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::text::write_wcfg;

    #[test]
    fn labels_needing_quotes_round_trip() {
        let tb = parse_treebank("(S ('two words' x) ('\\'s' y) (\u{1e} z))").unwrap();
        let text: String = tb.trees.iter().map(|t| t.to_string()).collect();
        assert_eq!(parse_treebank(&text).unwrap(), tb);
    }

    #[test]
    fn reads_quoted_and_bare_leaves() {
        let tb = parse_treebank("(S (NP 'a') (VP 'b'))\n").unwrap();
        assert_eq!(
            tb.trees,
            vec![Tree::node(
                "S",
                vec![
                    Tree::node("NP", vec![Tree::leaf("a")]),
                    Tree::node("VP", vec![Tree::leaf("b")])
                ]
            )]
        );
        let tb = parse_treebank("( (S (NP (PRP it))\n   (VP (VBZ 's) ('' '') (POS 'x'))) )\n").unwrap();
        let expected = Tree::node(
            "S",
            vec![
                Tree::node("NP", vec![Tree::node("PRP", vec![Tree::leaf("it")])]),
                Tree::node(
                    "VP",
                    vec![
                        Tree::node("VBZ", vec![Tree::leaf("'s")]),
                        Tree::node("''", vec![Tree::leaf("''")]),
                        Tree::node("POS", vec![Tree::leaf("x")]),
                    ],
                ),
            ],
        );
        assert_eq!(tb.trees, vec![expected]);
        assert_eq!(parse_treebank("").unwrap().len(), 0);
        assert_eq!(
            parse_treebank("(A 'x y')").unwrap().trees[0],
            Tree::node("A", vec![Tree::leaf("x y")])
        );
        let t = parse_treebank(r"(A 'it\'s')").unwrap().trees.remove(0);
        assert_eq!(t.to_string(), r"(A 'it\'s')");
        assert_eq!(parse_treebank(&t.to_string()).unwrap().trees[0], t);
    }

    #[test]
    fn parse_errors_carry_positions() {
        for (text, line, column) in [
            ("(S (A 'a')", 1, 1),
            ("(S 'a'))", 1, 8),
            ("x", 1, 1),
            ("(S 'a')\n  ()", 2, 4),
            ("(S ((A 'a')))", 1, 5),
        ] {
            match parse_treebank(text) {
                Err(Error::Parse { line: l, column: c, .. }) => assert_eq!((l, c), (line, column), "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn label_stripping() {
        let d: Vec<String> = DEFAULT_DELIMITERS.iter().map(|s| s.to_string()).collect();
        assert_eq!(strip_label("NP-SBJ", &d), "NP");
        assert_eq!(strip_label("NP=2", &d), "NP");
        assert_eq!(strip_label("NN##case=nom##", &d), "NN");
        assert_eq!(strip_label("PP-LOC=1", &d), "PP");
        assert_eq!(strip_label("-LRB-", &d), "-LRB-");
        assert_eq!(strip_label("-", &d), "-");
        assert_eq!(strip_label("NP", &d), "NP");
    }

    #[test]
    fn unary_chains_collapse() {
        let t = parse_treebank("(X (Y (Z 'a' 'b')))").unwrap().trees.remove(0);
        assert_eq!(
            collapse_unary(&t),
            Tree::node("X", vec![Tree::leaf("a"), Tree::leaf("b")])
        );
        let t = parse_treebank("(S (A (B 'b')) (C 'c'))").unwrap().trees.remove(0);
        assert_eq!(collapse_unary(&t).to_string(), "(S (A 'b') (C 'c'))");
    }

    #[test]
    fn maximum_likelihood_weights() {
        let tb = parse_treebank("(S (A 'a') (B 'b'))\n(S (A 'a') (B 'b'))\n").unwrap();
        let ex = extract_grammar(&tb, &ExtractOptions::default()).unwrap();
        assert_eq!(
            write_wcfg(&ex.grammar),
            "semiring: real\nstart: S\n1: A -> 'a'\n1: B -> 'b'\n1: S -> A B\n"
        );

        let tb =
            parse_treebank("(S (A 'a') (B 'b'))\n(S (A 'c') (B 'b'))\n(T (A 'a'))\n(S-1 (A-x 'a') (B 'b'))\n").unwrap();
        let ex = extract_grammar(&tb, &ExtractOptions::stripping()).unwrap();
        assert_eq!(ex.grammar.start(), &Symbol::nt("S"));
        assert!(!ex.start_tied);
        let a: Vec<f64> = ex
            .grammar
            .rules()
            .iter()
            .filter(|r| r.lhs == Symbol::nt("A"))
            .map(|r| r.weight.value())
            .collect();
        assert_eq!(a, vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(ex.grammar.nonterminal_unary_rules().count(), 0);
        assert!(ex
            .grammar
            .rules()
            .iter()
            .any(|r| r.lhs == Symbol::nt("T") && r.rhs == vec![Symbol::t("a")]));
    }

    #[test]
    fn start_tie_break_and_errors() {
        let tb = parse_treebank("(T 'a')\n(S 'b')\n").unwrap();
        let ex = extract_grammar(&tb, &ExtractOptions::default()).unwrap();
        assert_eq!(ex.grammar.start(), &Symbol::nt("S"));
        assert!(ex.start_tied);

        assert_eq!(
            extract_grammar(&Treebank::default(), &ExtractOptions::default()),
            Err(Error::EmptyTreebank)
        );
        let tb = parse_treebank("(S 'a')\n(S (A))\n(S (B ε) 'b')\n").unwrap();
        assert_eq!(
            extract_grammar(&tb, &ExtractOptions::default()),
            Err(Error::NullaryInTreebank(vec![1, 2]))
        );
    }
}
