//! Text formats: `.wcfg` grammars and s-expression derivations.
//!
//! ```text
//! # comment
//! semiring: real
//! transform-id: 3
//! start: S
//! 1: S -> ~NP S/NP
//! 0.5: S/S -> ε
//! ```
//!
//! Terminals are single-quoted, nonterminals bare (or double-quoted when
//! they contain reserved characters). `~X` is frozen, `X/Y` slashed; either
//! takes a `#id` suffix, omitted when the whole file has a single transform
//! id declared in the `transform-id:` header. Compound components nest in
//! brackets: `[~X#1]/Y#2`. The weight prefix is optional and defaults to
//! `1̄`. Declared symbols that no rule mentions go in a `symbols:` header.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use super::{Derivation, Grammar, Rule, Symbol, TransformId};
use crate::error::{Error, Result};
use crate::semiring::{Semiring, SemiringKind};

const RESERVED: &[char] = &['\'', '"', '~', '/', '#', '[', ']', '(', ')', '\\', ','];

fn is_bare(name: &str) -> bool {
    !name.is_empty()
        && name != "ε"
        && name != "->"
        && !name.ends_with(':')
        && !name.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

fn quote(out: &mut String, name: &str, q: char) {
    out.push(q);
    for c in name.chars() {
        if c == q || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(q);
}

/// Render a symbol; ids are included when `show_ids` is set.
pub fn symbol_to_string(sym: &Symbol, show_ids: bool) -> String {
    let mut out = String::new();
    write_symbol(&mut out, sym, show_ids);
    out
}

fn write_symbol(out: &mut String, sym: &Symbol, show_ids: bool) {
    match sym {
        Symbol::Terminal(name) => quote(out, name, '\''),
        Symbol::Nonterminal(name) if is_bare(name) => out.push_str(name),
        Symbol::Nonterminal(name) => quote(out, name, '"'),
        Symbol::Frozen(base, id) => {
            out.push('~');
            write_component(out, base, show_ids);
            if show_ids {
                let _ = write!(out, "#{id}");
            }
        }
        Symbol::Slashed(num, den, id) => {
            write_component(out, num, show_ids);
            out.push('/');
            write_component(out, den, show_ids);
            if show_ids {
                let _ = write!(out, "#{id}");
            }
        }
    }
}

fn write_component(out: &mut String, sym: &Symbol, show_ids: bool) {
    if matches!(sym, Symbol::Frozen(..) | Symbol::Slashed(..)) {
        out.push('[');
        write_symbol(out, sym, show_ids);
        out.push(']');
    } else {
        write_symbol(out, sym, show_ids);
    }
}

/// Resolves id-less compound symbols while parsing.
struct IdContext {
    default: Option<TransformId>,
}

impl IdContext {
    fn get(&mut self) -> TransformId {
        *self.default.get_or_insert_with(TransformId::fresh)
    }
}

struct SymbolParser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    ids: &'a mut IdContext,
}

impl SymbolParser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.column + self.pos, msg)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn symbol(&mut self) -> Result<Symbol> {
        if self.eat('~') {
            let base = self.component()?;
            if base.is_terminal() {
                return Err(self.err("frozen terminal; write the terminal itself"));
            }
            let id = self.id()?;
            return Ok(Symbol::frozen(&base, id));
        }
        let first = self.component()?;
        if self.eat('/') {
            let den = self.component()?;
            let id = self.id()?;
            return Ok(Symbol::slashed(&first, &den, id));
        }
        Ok(first)
    }

    fn id(&mut self) -> Result<TransformId> {
        if !self.eat('#') {
            return Ok(self.ids.get());
        }
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        let n: u32 = digits
            .parse()
            .map_err(|_| self.err("expected a transform id after '#'"))?;
        let id = TransformId(n);
        TransformId::reserve(id);
        Ok(id)
    }

    fn component(&mut self) -> Result<Symbol> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let inner = self.symbol()?;
                if !self.eat(']') {
                    return Err(self.err("expected ']'"));
                }
                Ok(inner)
            }
            Some('\'') => Ok(Symbol::t(&self.quoted('\'')?)),
            Some('"') => Ok(Symbol::nt(&self.quoted('"')?)),
            _ => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| !c.is_whitespace() && !RESERVED.contains(&c))
                {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.err("expected a symbol"));
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                if name == "ε" {
                    return Err(self.err("ε is not a symbol"));
                }
                Ok(Symbol::nt(&name))
            }
        }
    }

    fn quoted(&mut self, q: char) -> Result<String> {
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated quote")),
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c) if c == q || c == '\\' => {
                            s.push(c);
                            self.pos += 1;
                        }
                        _ => return Err(self.err("bad escape")),
                    }
                }
                Some(c) if c == q => {
                    self.pos += 1;
                    return Ok(s);
                }
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

fn parse_symbol_at(text: &str, line: usize, column: usize, ids: &mut IdContext) -> Result<Symbol> {
    let mut p = SymbolParser {
        chars: text.chars().collect(),
        pos: 0,
        line,
        column,
        ids,
    };
    let s = p.symbol()?;
    if p.pos != p.chars.len() {
        return Err(p.err("trailing characters after symbol"));
    }
    Ok(s)
}

/// Parse one symbol token; id-less compound symbols get `default_id`.
pub fn parse_symbol(text: &str, default_id: TransformId) -> Result<Symbol> {
    let mut ids = IdContext {
        default: Some(default_id),
    };
    parse_symbol_at(text, 1, 1, &mut ids)
}

/// Split a line into whitespace-separated tokens, keeping quoted runs
/// together. Returns `(token, 1-based column)` pairs.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<(String, usize)>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (col, c) in line.chars().enumerate() {
        if let Some(q) = quote {
            cur.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        if c.is_whitespace() {
            if !cur.is_empty() {
                out.push((std::mem::take(&mut cur), start + 1));
            }
            continue;
        }
        if cur.is_empty() {
            start = col;
        }
        if c == '\'' || c == '"' {
            quote = Some(c);
        }
        cur.push(c);
    }
    if quote.is_some() {
        return Err(Error::parse(line_no, start + 1, "unterminated quote"));
    }
    if !cur.is_empty() {
        out.push((cur, start + 1));
    }
    Ok(out)
}

/// Every transform id used by the grammar's symbols.
pub fn transform_ids<W: Semiring>(g: &Grammar<W>) -> BTreeSet<TransformId> {
    let mut ids = Vec::new();
    for s in g.symbols() {
        s.transform_ids(&mut ids);
    }
    ids.into_iter().collect()
}

/// Serialize a grammar. The output re-parses to an equal grammar.
pub fn write_wcfg<W: Semiring>(g: &Grammar<W>) -> String {
    let ids = transform_ids(g);
    let show_ids = ids.len() != 1;
    let sym = |s: &Symbol| symbol_to_string(s, show_ids);
    let mut out = String::new();
    let _ = writeln!(out, "semiring: {}", W::NAME);
    if !show_ids {
        let _ = writeln!(out, "transform-id: {}", ids.first().unwrap());
    }
    let _ = writeln!(out, "start: {}", sym(g.start()));
    let mut mentioned: BTreeSet<&Symbol> = BTreeSet::new();
    mentioned.insert(g.start());
    for r in g.rules() {
        mentioned.insert(&r.lhs);
        mentioned.extend(r.rhs.iter());
    }
    let extra: Vec<String> = g.symbols().filter(|s| !mentioned.contains(s)).map(&sym).collect();
    if !extra.is_empty() {
        let _ = writeln!(out, "symbols: {}", extra.join(" "));
    }
    for r in g.rules() {
        let _ = write!(out, "{}: {} ->", r.weight, sym(&r.lhs));
        if r.rhs.is_empty() {
            out.push_str(" ε");
        }
        for s in &r.rhs {
            out.push(' ');
            out.push_str(&sym(s));
        }
        out.push('\n');
    }
    out
}

/// The `semiring:` header of a `.wcfg` text, if any.
pub fn peek_semiring(text: &str) -> Result<Option<SemiringKind>> {
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim().strip_prefix("semiring:") {
            return rest
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::parse(i + 1, 1, format!("unknown semiring {:?}", rest.trim())));
        }
    }
    Ok(None)
}

enum Line {
    Header(&'static str, Vec<(String, usize)>),
    Rule(Vec<(String, usize)>),
}

fn classify(line: &str, line_no: usize) -> Result<Option<Line>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let tokens = tokenize(line, line_no)?;
    if tokens.iter().any(|(t, _)| t == "->") {
        return Ok(Some(Line::Rule(tokens)));
    }
    for key in ["semiring", "transform-id", "start", "symbols"] {
        if tokens[0].0.strip_suffix(':') == Some(key) {
            return Ok(Some(Line::Header(key, tokens[1..].to_vec())));
        }
    }
    Err(Error::parse(line_no, 1, "expected a header or a rule"))
}

/// Parse a `.wcfg` text. A `semiring:` header, if present, must name `W`.
pub fn read_wcfg<W: Semiring>(text: &str) -> Result<Grammar<W>> {
    let mut lines = Vec::new();
    let mut ids = IdContext { default: None };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        match classify(raw, line_no)? {
            None => {}
            Some(Line::Header("semiring", toks)) => {
                let name = single(&toks, line_no, "semiring")?;
                if name.0 != W::NAME {
                    return Err(Error::parse(
                        line_no,
                        name.1,
                        format!("grammar is over {}, expected {}", name.0, W::NAME),
                    ));
                }
            }
            Some(Line::Header("transform-id", toks)) => {
                let tok = single(&toks, line_no, "transform-id")?;
                let n: u32 = tok
                    .0
                    .parse()
                    .map_err(|_| Error::parse(line_no, tok.1, "expected an integer id"))?;
                if ids.default.is_some() {
                    return Err(Error::parse(line_no, 1, "duplicate transform-id header"));
                }
                TransformId::reserve(TransformId(n));
                ids.default = Some(TransformId(n));
            }
            Some(other) => lines.push((line_no, other)),
        }
    }

    let mut start = None;
    let mut extra = Vec::new();
    let mut rules = Vec::new();
    for (line_no, line) in lines {
        match line {
            Line::Header("start", toks) => {
                let tok = single(&toks, line_no, "start")?;
                if start.is_some() {
                    return Err(Error::parse(line_no, 1, "duplicate start header"));
                }
                start = Some(parse_symbol_at(&tok.0, line_no, tok.1, &mut ids)?);
            }
            Line::Header(_, toks) => {
                for (t, col) in toks {
                    extra.push(parse_symbol_at(&t, line_no, col, &mut ids)?);
                }
            }
            Line::Rule(toks) => rules.push(parse_rule(&toks, line_no, &mut ids)?),
        }
    }
    let start = start.ok_or_else(|| Error::parse(1, 1, "missing start header"))?;
    Grammar::with_symbols(start, extra, rules)
}

fn single<'t>(toks: &'t [(String, usize)], line_no: usize, key: &str) -> Result<&'t (String, usize)> {
    match toks {
        [one] => Ok(one),
        _ => Err(Error::parse(line_no, 1, format!("{key}: expects one value"))),
    }
}

fn parse_rule<W: Semiring>(toks: &[(String, usize)], line_no: usize, ids: &mut IdContext) -> Result<Rule<W>> {
    let (weight, rest) = match toks {
        [(w, col), _, (arrow, _), ..] if arrow == "->" && w.ends_with(':') => {
            let text = &w[..w.len() - 1];
            let weight = W::parse_weight(text)
                .ok_or_else(|| Error::parse(line_no, *col, format!("bad {} weight {text:?}", W::NAME)))?;
            (weight, &toks[1..])
        }
        _ => (W::one(), toks),
    };
    let [(lhs, lhs_col), (arrow, arrow_col), rhs @ ..] = rest else {
        return Err(Error::parse(line_no, 1, "expected '<lhs> -> <rhs>'"));
    };
    if arrow != "->" {
        return Err(Error::parse(line_no, *arrow_col, "expected '->'"));
    }
    let lhs = parse_symbol_at(lhs, line_no, *lhs_col, ids)?;
    if lhs.is_terminal() {
        return Err(Error::parse(line_no, *lhs_col, "terminal left-hand side"));
    }
    let rhs = match rhs {
        [(e, _)] if e == "ε" => Vec::new(),
        _ => rhs
            .iter()
            .map(|(t, col)| {
                if t == "ε" {
                    Err(Error::parse(line_no, *col, "ε must be the whole right-hand side"))
                } else {
                    parse_symbol_at(t, line_no, *col, ids)
                }
            })
            .collect::<Result<_>>()?,
    };
    Ok(Rule::new(lhs, rhs, weight))
}

/// Render a derivation as an s-expression.
pub fn derivation_to_string<W: Semiring>(t: &Derivation<W>, show_ids: bool) -> String {
    let mut out = String::new();
    write_tree(&mut out, t, show_ids);
    out
}

fn write_tree<W: Semiring>(out: &mut String, t: &Derivation<W>, show_ids: bool) {
    match t {
        Derivation::Leaf(s) => write_symbol(out, s, show_ids),
        Derivation::Node { rule, children } => {
            out.push('(');
            write_symbol(out, &rule.lhs, show_ids);
            if children.is_empty() {
                out.push_str(" ε");
            }
            for c in children {
                out.push(' ');
                write_tree(out, c, show_ids);
            }
            out.push(')');
        }
    }
}

#[derive(Debug)]
enum Tok {
    Open(usize, usize),
    Close(usize, usize),
    Atom(String, usize, usize),
}

fn lex_sexp(text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut cur: Option<(String, usize, usize)> = None;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
        if let Some(q) = quote {
            if c == '\n' {
                return Err(Error::parse(line - 1, col, "unterminated quote"));
            }
            cur.as_mut().unwrap().0.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        if c.is_whitespace() || c == '(' || c == ')' {
            if let Some((s, l, k)) = cur.take() {
                toks.push(Tok::Atom(s, l, k));
            }
            if c == '(' {
                toks.push(Tok::Open(line, col));
            } else if c == ')' {
                toks.push(Tok::Close(line, col));
            }
            continue;
        }
        if c == '\'' || c == '"' {
            quote = Some(c);
        }
        cur.get_or_insert_with(|| (String::new(), line, col)).0.push(c);
    }
    if quote.is_some() {
        return Err(Error::parse(line, col, "unterminated quote"));
    }
    if let Some((s, l, k)) = cur.take() {
        toks.push(Tok::Atom(s, l, k));
    }
    Ok(toks)
}

/// Parse an s-expression derivation against `g`. Each node is resolved to
/// the first rule of `g` with the node's label and child labels; id-less
/// compound symbols take the grammar's transform id when it has exactly one.
pub fn read_derivation<W: Semiring>(text: &str, g: &Grammar<W>) -> Result<Derivation<W>> {
    let ids = transform_ids(g);
    let mut ctx = IdContext {
        default: (ids.len() == 1).then(|| *ids.first().unwrap()),
    };
    let mut index: HashMap<(&Symbol, &[Symbol]), Arc<Rule<W>>> = HashMap::new();
    for r in g.rules() {
        index
            .entry((&r.lhs, r.rhs.as_slice()))
            .or_insert_with(|| Arc::new(r.clone()));
    }
    let toks = lex_sexp(text)?;
    let mut pos = 0;
    let tree = parse_tree(&toks, &mut pos, &index, &mut ctx)?;
    if let Some(t) = toks.get(pos) {
        let (l, c) = tok_pos(t);
        return Err(Error::parse(l, c, "trailing input after derivation"));
    }
    Ok(tree)
}

fn tok_pos(t: &Tok) -> (usize, usize) {
    match t {
        Tok::Open(l, c) | Tok::Close(l, c) | Tok::Atom(_, l, c) => (*l, *c),
    }
}

type RuleIndex<'g, W> = HashMap<(&'g Symbol, &'g [Symbol]), Arc<Rule<W>>>;

fn parse_tree<W: Semiring>(
    toks: &[Tok],
    pos: &mut usize,
    index: &RuleIndex<'_, W>,
    ctx: &mut IdContext,
) -> Result<Derivation<W>> {
    let Some(tok) = toks.get(*pos) else {
        return Err(Error::parse(1, 1, "expected a derivation"));
    };
    *pos += 1;
    match tok {
        Tok::Close(l, c) => Err(Error::parse(*l, *c, "unexpected ')'")),
        Tok::Atom(s, l, c) => {
            let sym = parse_symbol_at(s, *l, *c, ctx)?;
            if !sym.is_terminal() {
                return Err(Error::parse(*l, *c, "bare nonterminal leaf; write (X ...)"));
            }
            Ok(Derivation::Leaf(sym))
        }
        Tok::Open(l, c) => {
            let Some(Tok::Atom(label, ll, lc)) = toks.get(*pos) else {
                return Err(Error::parse(*l, *c, "expected a node label"));
            };
            *pos += 1;
            let lhs = parse_symbol_at(label, *ll, *lc, ctx)?;
            let mut children = Vec::new();
            let mut nullary = false;
            loop {
                match toks.get(*pos) {
                    None => return Err(Error::parse(*l, *c, "unbalanced '('")),
                    Some(Tok::Close(..)) => {
                        *pos += 1;
                        break;
                    }
                    Some(Tok::Atom(e, el, ec)) if e == "ε" => {
                        if nullary || !children.is_empty() {
                            return Err(Error::parse(*el, *ec, "ε must be the only child"));
                        }
                        nullary = true;
                        *pos += 1;
                    }
                    Some(t) => {
                        if nullary {
                            let (el, ec) = tok_pos(t);
                            return Err(Error::parse(el, ec, "ε must be the only child"));
                        }
                        children.push(parse_tree(toks, pos, index, ctx)?);
                    }
                }
            }
            if children.is_empty() && !nullary {
                return Err(Error::parse(*l, *c, "empty node; write (X ε) for a nullary rule"));
            }
            let rhs: Vec<Symbol> = children.iter().map(|t| t.label().clone()).collect();
            let rule = index.get(&(&lhs, rhs.as_slice())).ok_or_else(|| {
                let r = Rule::new(lhs.clone(), rhs.clone(), W::one());
                let shown = r.to_string();
                let shape = shown.split_once(": ").map_or(shown.as_str(), |(_, s)| s);
                Error::ForeignRule(format!("{shape} (line {l})"))
            })?;
            Ok(Derivation::node(rule.clone(), children))
        }
    }
}
