//! COGS logical forms: AST, parser and printer.
//!
//! Two renderings are accepted. The official files space every token
//! (`* cake ( x _ 4 ) ; eat . agent ( x _ 2 , x _ 1 )`); prose uses a compact
//! form (`*cake(x_4); eat.agent(x_2, x_1)`). Primitive rows use a lambda
//! prefix (`LAMBDA a . LAMBDA e . walk . agent ( e , a )`) and proper-name
//! primitives are a bare constant (`Paula`).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::ops::Range;

use serde::{Deserialize, Serialize};

const RESERVED: &[char] = &['*', '(', ')', ',', ';', '.'];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    /// `x_i`; COGS indices are 0-based sentence token positions.
    Var(u32),
    /// A lambda-bound name such as `a` or `e`.
    Bound(String),
    /// Any other constant: proper names, or their substitutes.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definite {
    pub lemma: String,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub lemma: String,
    /// Role path segments, e.g. `["nmod", "on"]`. Empty for noun predicates.
    pub roles: Vec<String>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn role_path(&self) -> String {
        self.roles.join(".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalForm {
    pub lambdas: Vec<String>,
    pub definites: Vec<Definite>,
    pub atoms: Vec<Atom>,
    /// Set only for bare-constant forms; then `definites` and `atoms` are empty.
    pub constant: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LfStyle {
    Compact,
    Spaced,
}

impl LfStyle {
    /// Spaced if the text shows the official token spacing around parentheses.
    pub fn detect(text: &str) -> Option<LfStyle> {
        if text.contains(" ( ") || text.contains(" . ") {
            Some(LfStyle::Spaced)
        } else if text.contains('(') {
            Some(LfStyle::Compact)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("logical form parse error at char {offset}: {message}")]
pub struct ParseError {
    /// 0-based character offset into the input.
    pub offset: usize,
    pub message: String,
}

/// Byte spans of the rewritable words of a parsed form, aligned with the AST.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LfSpans {
    pub definites: Vec<Range<usize>>,
    pub atoms: Vec<Range<usize>>,
    /// Every `Term::Name` occurrence (and the constant, if any), in text order.
    pub names: Vec<(Range<usize>, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Star,
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    Ident(&'a str),
}

struct Lexed<'a> {
    tok: Tok<'a>,
    span: Range<usize>,
}

fn lex(text: &str) -> Vec<Lexed<'_>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        let single = match c {
            '*' => Some(Tok::Star),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Lexed { tok, span: i..i + 1 });
            continue;
        }
        let mut end = i + c.len_utf8();
        while let Some(&(j, d)) = chars.peek() {
            if d.is_whitespace() || RESERVED.contains(&d) {
                break;
            }
            end = j + d.len_utf8();
            chars.next();
        }
        out.push(Lexed {
            tok: Tok::Ident(&text[i..end]),
            span: i..end,
        });
    }
    out
}

/// True if `word` can stand as a single LF identifier.
pub fn is_identifier(word: &str) -> bool {
    !word.is_empty()
        && word != "AND"
        && word != "LAMBDA"
        && !word.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c))
}

fn parse_index(digits: &str) -> Option<u32> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Lexed<'a>>,
    pos: usize,
    lambdas: Vec<String>,
    spans: LfSpans,
}

impl<'a> Parser<'a> {
    fn err(&self, byte: usize, message: impl Into<String>) -> ParseError {
        let byte = byte.min(self.text.len());
        ParseError {
            offset: self.text[..byte].chars().count(),
            message: message.into(),
        }
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.span.start)
            .unwrap_or(self.text.len())
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok<'a>> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn expect(&mut self, want: Tok<'static>, what: &str) -> Result<Range<usize>, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) if t.tok == want => {
                self.pos += 1;
                Ok(t.span.clone())
            }
            Some(t) => Err(self.err(t.span.start, alloc::format!("expected {what}"))),
            None => Err(self.err(self.text.len(), alloc::format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(&'a str, Range<usize>), ParseError> {
        match self.toks.get(self.pos) {
            Some(Lexed { tok: Tok::Ident(s), span }) => {
                let out = (*s, span.clone());
                self.pos += 1;
                Ok(out)
            }
            Some(t) => Err(self.err(t.span.start, alloc::format!("expected {what}"))),
            None => Err(self.err(self.text.len(), alloc::format!("expected {what}, found end of input"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<(&'a str, Range<usize>), ParseError> {
        let at = self.here();
        let (w, span) = self.ident(what)?;
        if w == "AND" || w == "LAMBDA" {
            return Err(self.err(at, alloc::format!("unexpected keyword {w}, expected {what}")));
        }
        Ok((w, span))
    }

    fn parse(mut self) -> Result<(LogicalForm, LfSpans), ParseError> {
        if self.toks.is_empty() {
            return Err(self.err(0, "empty logical form"));
        }
        while self.peek() == Some(&Tok::Ident("LAMBDA")) {
            self.pos += 1;
            let (name, _) = self.word("lambda variable")?;
            self.expect(Tok::Dot, "'.' after lambda variable")?;
            self.lambdas.push(name.to_string());
        }

        let mut lf = LogicalForm {
            lambdas: self.lambdas.clone(),
            ..LogicalForm::default()
        };

        // Bare constant: a single identifier and nothing else.
        if self.toks.len() == self.pos + 1 {
            if let Some(Tok::Ident(w)) = self.peek() {
                let w = *w;
                if is_identifier(w) && !lf.lambdas.iter().any(|l| l == w) {
                    let span = self.toks[self.pos].span.clone();
                    self.pos += 1;
                    self.spans.names.push((span, w.to_string()));
                    lf.constant = Some(w.to_string());
                    return Ok((lf, self.spans));
                }
            }
        }

        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let (lemma, span) = self.word("definite predicate")?;
            self.expect(Tok::LParen, "'('")?;
            let term = self.term()?;
            self.expect(Tok::RParen, "')'")?;
            self.spans.definites.push(span);
            lf.definites.push(Definite {
                lemma: lemma.to_string(),
                term,
            });
            match self.peek() {
                Some(Tok::Semi) => self.pos += 1,
                None => return Ok((lf, self.spans)),
                _ => return Err(self.err(self.here(), "expected ';' after definite")),
            }
        }

        if self.peek().is_none() {
            return Err(self.err(self.text.len(), "dangling ';' with no conjunct"));
        }
        loop {
            let atom = self.atom()?;
            lf.atoms.push(atom);
            match self.peek() {
                None => break,
                Some(Tok::Ident("AND")) => {
                    let at = self.here();
                    self.pos += 1;
                    if self.peek().is_none() {
                        return Err(self.err(at, "dangling AND"));
                    }
                }
                Some(Tok::RParen) => return Err(self.err(self.here(), "unbalanced ')'")),
                Some(_) => return Err(self.err(self.here(), "unknown token, expected AND or end")),
            }
        }
        Ok((lf, self.spans))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (lemma, span) = self.word("predicate")?;
        let mut roles = Vec::new();
        while self.peek() == Some(&Tok::Dot) {
            self.pos += 1;
            let (role, _) = self.word("role name")?;
            roles.push(role.to_string());
        }
        self.expect(Tok::LParen, "'('")?;
        let mut args = alloc::vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        if args.len() > 2 {
            return Err(self.err(self.here(), "predicate takes at most two arguments"));
        }
        match self.peek() {
            Some(Tok::RParen) => self.pos += 1,
            None => return Err(self.err(self.text.len(), "unbalanced '(': missing ')'")),
            _ => return Err(self.err(self.here(), "expected ',' or ')'")),
        }
        self.spans.atoms.push(span);
        Ok(Atom {
            lemma: lemma.to_string(),
            roles,
            args,
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let at = self.here();
        let (w, span) = self.word("argument")?;
        // spaced variable: x _ 3
        if w == "x" && self.peek() == Some(&Tok::Ident("_")) {
            if let Some(Tok::Ident(d)) = self.peek_at(1) {
                if let Some(i) = parse_index(d) {
                    self.pos += 2;
                    return Ok(Term::Var(i));
                }
            }
            return Err(self.err(at, "malformed variable"));
        }
        if let Some(rest) = w.strip_prefix("x_") {
            return parse_index(rest)
                .map(Term::Var)
                .ok_or_else(|| self.err(at, "malformed variable"));
        }
        if self.lambdas.iter().any(|l| l == w) {
            return Ok(Term::Bound(w.to_string()));
        }
        if w == "_" {
            return Err(self.err(at, "unknown token '_'"));
        }
        self.spans.names.push((span, w.to_string()));
        Ok(Term::Name(w.to_string()))
    }
}

/// Parses a logical form and returns the byte spans of its rewritable words.
pub fn parse_lf_spanned(text: &str) -> Result<(LogicalForm, LfSpans), ParseError> {
    let toks = lex(text);
    Parser {
        text,
        toks,
        pos: 0,
        lambdas: Vec::new(),
        spans: LfSpans::default(),
    }
    .parse()
}

pub fn parse_lf(text: &str) -> Result<LogicalForm, ParseError> {
    parse_lf_spanned(text).map(|(lf, _)| lf)
}

fn write_term(out: &mut String, term: &Term, style: LfStyle) {
    match term {
        Term::Var(i) => match style {
            LfStyle::Spaced => {
                let _ = write!(out, "x _ {i}");
            }
            LfStyle::Compact => {
                let _ = write!(out, "x_{i}");
            }
        },
        Term::Bound(s) | Term::Name(s) => out.push_str(s),
    }
}

fn write_atom(out: &mut String, atom: &Atom, style: LfStyle) {
    out.push_str(&atom.lemma);
    for r in &atom.roles {
        out.push_str(if style == LfStyle::Spaced { " . " } else { "." });
        out.push_str(r);
    }
    out.push_str(if style == LfStyle::Spaced { " ( " } else { "(" });
    for (k, a) in atom.args.iter().enumerate() {
        if k > 0 {
            out.push_str(if style == LfStyle::Spaced { " , " } else { ", " });
        }
        write_term(out, a, style);
    }
    out.push_str(if style == LfStyle::Spaced { " )" } else { ")" });
}

pub fn print_lf(lf: &LogicalForm, style: LfStyle) -> String {
    let spaced = style == LfStyle::Spaced;
    let mut out = String::new();
    for l in &lf.lambdas {
        out.push_str("LAMBDA ");
        out.push_str(l);
        out.push_str(" . ");
    }
    if let Some(c) = &lf.constant {
        out.push_str(c);
        return out;
    }
    for (k, d) in lf.definites.iter().enumerate() {
        if k > 0 {
            out.push_str(if spaced { " ; " } else { "; " });
        }
        out.push_str(if spaced { "* " } else { "*" });
        out.push_str(&d.lemma);
        out.push_str(if spaced { " ( " } else { "(" });
        write_term(&mut out, &d.term, style);
        out.push_str(if spaced { " )" } else { ")" });
    }
    if !lf.definites.is_empty() && !lf.atoms.is_empty() {
        out.push_str(if spaced { " ; " } else { "; " });
    }
    for (k, a) in lf.atoms.iter().enumerate() {
        if k > 0 {
            out.push_str(" AND ");
        }
        write_atom(&mut out, a, style);
    }
    out
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_lf(self, LfStyle::Compact))
    }
}

impl LogicalForm {
    /// Predicate lemmas and proper-name constants mentioned anywhere in the form.
    pub fn lexical_keys(&self) -> alloc::collections::BTreeSet<&str> {
        let mut keys = alloc::collections::BTreeSet::new();
        for d in &self.definites {
            keys.insert(d.lemma.as_str());
            if let Term::Name(n) = &d.term {
                keys.insert(n.as_str());
            }
        }
        for a in &self.atoms {
            keys.insert(a.lemma.as_str());
            for t in &a.args {
                if let Term::Name(n) = t {
                    keys.insert(n.as_str());
                }
            }
        }
        if let Some(c) = &self.constant {
            keys.insert(c.as_str());
        }
        keys
    }

    /// Checks that every non-indexed variable is lambda-bound.
    pub fn is_closed(&self) -> bool {
        let bound_ok = |t: &Term| match t {
            Term::Bound(b) => self.lambdas.iter().any(|l| l == b),
            _ => true,
        };
        self.definites.iter().all(|d| bound_ok(&d.term))
            && self.atoms.iter().all(|a| a.args.iter().all(bound_ok))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn name(s: &str) -> Term {
        Term::Name(s.into())
    }

    fn atom(lemma: &str, roles: &[&str], args: Vec<Term>) -> Atom {
        Atom {
            lemma: lemma.into(),
            roles: roles.iter().map(|r| r.to_string()).collect(),
            args,
        }
    }

    #[test]
    fn parses_compact_definite_form() {
        let lf = parse_lf("*hedgehog(x_3); like.agent(x_1, Emma) AND like.theme(x_1, x_3)").unwrap();
        assert_eq!(
            lf.definites,
            vec![Definite {
                lemma: "hedgehog".into(),
                term: Term::Var(3)
            }]
        );
        assert_eq!(
            lf.atoms,
            vec![
                atom("like", &["agent"], vec![Term::Var(1), name("Emma")]),
                atom("like", &["theme"], vec![Term::Var(1), Term::Var(3)]),
            ]
        );
        assert!(lf.lambdas.is_empty());
    }

    #[test]
    fn parses_spaced_single_atom() {
        let lf = parse_lf("cake ( x _ 4 )").unwrap();
        assert_eq!(lf.atoms, vec![atom("cake", &[], vec![Term::Var(4)])]);
        assert!(lf.definites.is_empty());
    }

    #[test]
    fn parses_lambda_primitive() {
        let lf = parse_lf("LAMBDA a . shark ( a )").unwrap();
        assert_eq!(lf.lambdas, vec![String::from("a")]);
        assert_eq!(lf.atoms, vec![atom("shark", &[], vec![Term::Bound("a".into())])]);
        assert_eq!(print_lf(&lf, LfStyle::Spaced), "LAMBDA a . shark ( a )");
    }

    #[test]
    fn parses_verb_primitive_with_three_lambdas() {
        let text = "LAMBDA a . LAMBDA b . LAMBDA e . paint . agent ( e , b ) AND paint . theme ( e , a )";
        let lf = parse_lf(text).unwrap();
        assert_eq!(lf.lambdas.len(), 3);
        assert!(lf.is_closed());
        assert_eq!(print_lf(&lf, LfStyle::Spaced), text);
    }

    #[test]
    fn parses_bare_name_constant() {
        let lf = parse_lf("Paula").unwrap();
        assert_eq!(lf.constant.as_deref(), Some("Paula"));
        assert_eq!(print_lf(&lf, LfStyle::Spaced), "Paula");
    }

    #[test]
    fn prints_compact_like_prose() {
        let lf = LogicalForm {
            definites: vec![Definite {
                lemma: "hedgehog".into(),
                term: Term::Var(3),
            }],
            atoms: vec![atom("like", &["agent"], vec![Term::Var(1), name("Emma")])],
            ..Default::default()
        };
        assert_eq!(print_lf(&lf, LfStyle::Compact), "*hedgehog(x_3); like.agent(x_1, Emma)");
    }

    #[test]
    fn spaced_official_rows_round_trip() {
        for row in [
            "* sailor ( x _ 1 ) ; dust . agent ( x _ 2 , x _ 1 ) AND dust . theme ( x _ 2 , x _ 4 ) AND boy ( x _ 4 )",
            "rose ( x _ 1 ) AND help . theme ( x _ 3 , x _ 1 ) AND help . agent ( x _ 3 , x _ 6 ) AND dog ( x _ 6 )",
            "* cake ( x _ 4 ) ; * table ( x _ 7 ) ; eat . agent ( x _ 1 , Emma ) AND eat . theme ( x _ 1 , x _ 4 ) AND cake . nmod . on ( x _ 4 , x _ 7 )",
            "want . agent ( x _ 1 , Emma ) AND want . xcomp ( x _ 1 , x _ 3 ) AND sleep . agent ( x _ 3 , Emma )",
        ] {
            let lf = parse_lf(row).unwrap();
            assert_eq!(print_lf(&lf, LfStyle::Spaced), row);
            assert_eq!(parse_lf(&print_lf(&lf, LfStyle::Compact)).unwrap(), lf);
        }
    }

    #[test]
    fn sentinel_lemmas_parse() {
        let lf = parse_lf("*[w0](x_3); like.agent(x_1, Emma) AND like.theme(x_1, x_3)").unwrap();
        assert_eq!(lf.definites[0].lemma, "[w0]");
    }

    #[test]
    fn errors_carry_char_offsets() {
        let e = parse_lf("cake ( x _ 4").unwrap_err();
        assert_eq!(e.offset, 12);
        let e = parse_lf("cake ( x _ 4 ) AND").unwrap_err();
        assert!(e.message.contains("dangling AND"), "{e}");
        assert_eq!(e.offset, 15);
        let e = parse_lf("cake ( x _ 4 ) )").unwrap_err();
        assert!(e.message.contains("unbalanced"), "{e}");
        let e = parse_lf("cake ( x _ 4 ) dog ( x _ 5 )").unwrap_err();
        assert!(e.message.contains("unknown token"), "{e}");
        assert!(parse_lf("").is_err());
        assert!(parse_lf("cake ( x _ 04 )").is_err());
    }

    #[test]
    fn spans_point_at_lemmas_and_names() {
        let text = "* hedgehog ( x _ 3 ) ; like . agent ( x _ 1 , Emma )";
        let (_, spans) = parse_lf_spanned(text).unwrap();
        assert_eq!(&text[spans.definites[0].clone()], "hedgehog");
        assert_eq!(&text[spans.atoms[0].clone()], "like");
        assert_eq!(spans.names.len(), 1);
        assert_eq!(&text[spans.names[0].0.clone()], "Emma");
    }
}
