//! Concrete syntax for positive bounded formulas.
//!
//! ```text
//! formula := quant* ":" matrix
//! quant   := ("forall" | "exists") IDENT ["in" region]
//! region  := basic ("|" basic)*
//! basic   := "(" num "," num ")" | "[" num "," num "]" | "pball(" int "," int ")"
//! matrix  := conj ("or" conj)*
//! conj    := atom ("and" atom)*
//! atom    := term "=" term | "close(" term "," term "," num ")"
//! term    := prod ("+" prod)*
//! prod    := unary ("*" unary)*
//! unary   := "-" NUM | NUM | IDENT | IDENT "(" [term ("," term)*] ")" | "(" term ")"
//! ```
//!
//! `IDENT(...)` applies a non-infix symbol; `c()` is a 0-ary symbol. With
//! [`ParseOptions::normalize_dnf`], parenthesized `and`/`or` groups are
//! accepted and multiplied out into disjunctive normal form.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use super::ast::{Atom, Binding, Formula, Quantifier};
use crate::algebra::{Entourage, Region, Term, ADD, MUL};
use crate::scalar::{format_rational, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub normalize_dnf: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Pipe,
    Plus,
    Star,
    Minus,
    Equals,
    End,
}

const KEYWORDS: [&str; 7] = ["forall", "exists", "in", "or", "and", "close", "pball"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '|' => Some(Tok::Pipe),
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            '-' => Some(Tok::Minus),
            '=' => Some(Tok::Equals),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let digits = |i: &mut usize| {
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    *i += 1;
                }
            };
            digits(&mut i);
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                digits(&mut i);
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    digits(&mut i);
                }
            }
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                digits(&mut i);
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else {
            return Err(ParseError { position: start, message: format!("unexpected character {c:?}") });
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    opts: ParseOptions,
}

type Dnf = Vec<Vec<Atom>>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos(), message: message.into() })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {kw:?}, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected an identifier, found {}", describe(&other))),
        }
    }

    fn number(&mut self) -> Result<BigRational, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                let v = parse_rational(&s)
                    .map_err(|e| ParseError { position: pos, message: e.to_string() })?;
                Ok(if neg { -v } else { v })
            }
            other => self.err(format!("expected a number, found {}", describe(&other))),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let pos = self.pos();
        let v = self.number()?;
        if !v.is_integer() {
            return Err(ParseError { position: pos, message: "expected an integer".into() });
        }
        v.to_integer()
            .try_into()
            .map_err(|_| ParseError { position: pos, message: "integer out of range".into() })
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut prefix = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        loop {
            let q = if self.is_kw("forall") {
                Quantifier::Forall
            } else if self.is_kw("exists") {
                Quantifier::Exists
            } else {
                break;
            };
            self.bump();
            let at = self.pos();
            let var = self.ident()?;
            if !seen.insert(var.clone()) {
                return Err(ParseError { position: at, message: format!("variable {var:?} is quantified twice") });
            }
            let bound = if self.is_kw("in") {
                self.bump();
                Some(self.region()?)
            } else {
                None
            };
            prefix.push(Binding { quantifier: q, var, bound });
        }
        if *self.peek() == Tok::Colon {
            self.bump();
        } else if !prefix.is_empty() {
            return self.err(format!("expected \":\" after the quantifier prefix, found {}", describe(self.peek())));
        }
        let matrix = self.matrix()?;
        if *self.peek() != Tok::End {
            return self.err(format!("unexpected {} after the matrix", describe(self.peek())));
        }
        Ok(Formula { prefix, matrix })
    }

    fn region(&mut self) -> Result<Region, ParseError> {
        let mut parts = vec![self.basic_region()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            parts.push(self.basic_region()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        let pos = self.pos();
        Region::union(parts).map_err(|e| ParseError { position: pos, message: e.to_string() })
    }

    fn basic_region(&mut self) -> Result<Region, ParseError> {
        let pos = self.pos();
        let wrap = |r: crate::Result<Region>| r.map_err(|e| ParseError { position: pos, message: e.to_string() });
        match self.peek().clone() {
            Tok::LParen | Tok::LBrack => {
                let open = *self.peek() == Tok::LParen;
                self.bump();
                let lo = self.number()?;
                self.expect(Tok::Comma, "\",\"")?;
                let hi = self.number()?;
                if open {
                    self.expect(Tok::RParen, "\")\"")?;
                } else {
                    self.expect(Tok::RBrack, "\"]\"")?;
                }
                wrap(Region::interval(lo, hi, open))
            }
            Tok::Ident(s) if s == "pball" => {
                self.bump();
                self.expect(Tok::LParen, "\"(\"")?;
                let p = self.integer()?;
                self.expect(Tok::Comma, "\",\"")?;
                let m = self.integer()?;
                self.expect(Tok::RParen, "\")\"")?;
                if p < 2 {
                    return Err(ParseError { position: pos, message: format!("{p} is not prime") });
                }
                wrap(Region::ball(p as u64, m))
            }
            other => self.err(format!("expected a region, found {}", describe(&other))),
        }
    }

    fn matrix(&mut self) -> Result<Dnf, ParseError> {
        let mut out = self.conj()?;
        while self.is_kw("or") {
            self.bump();
            out.extend(self.conj()?);
        }
        Ok(out)
    }

    fn conj(&mut self) -> Result<Dnf, ParseError> {
        let mut acc = self.unit()?;
        while self.is_kw("and") {
            self.bump();
            let rhs = self.unit()?;
            let mut prod = Vec::with_capacity(acc.len() * rhs.len());
            for a in &acc {
                for b in &rhs {
                    prod.push(a.iter().chain(b).cloned().collect());
                }
            }
            acc = prod;
        }
        Ok(acc)
    }

    fn unit(&mut self) -> Result<Dnf, ParseError> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.err("quantifier inside the matrix: formulas must be prenex");
        }
        if self.is_kw("close") {
            return Ok(vec![vec![self.close_atom()?]]);
        }
        if *self.peek() == Tok::LParen {
            let save = self.at;
            let as_atom = self.eq_atom();
            if let Ok(a) = as_atom {
                return Ok(vec![vec![a]]);
            }
            let atom_err = as_atom.unwrap_err();
            let atom_at = self.at;
            self.at = save;
            let open_pos = self.pos();
            self.bump();
            let group = match self.matrix() {
                Ok(g) => g,
                Err(e) => {
                    self.at = atom_at;
                    return Err(if e.position >= atom_err.position { e } else { atom_err });
                }
            };
            if *self.peek() != Tok::RParen {
                self.at = atom_at;
                return Err(atom_err);
            }
            self.bump();
            if !self.opts.normalize_dnf {
                return Err(ParseError {
                    position: open_pos,
                    message: "parenthesized and/or group: the matrix must be in disjunctive normal form \
                              (enable DNF normalization to accept it)"
                        .into(),
                });
            }
            return Ok(group);
        }
        Ok(vec![vec![self.eq_atom()?]])
    }

    fn eq_atom(&mut self) -> Result<Atom, ParseError> {
        let a = self.term()?;
        self.expect(Tok::Equals, "\"=\"")?;
        let b = self.term()?;
        Ok(Atom::Eq(a, b))
    }

    fn close_atom(&mut self) -> Result<Atom, ParseError> {
        self.expect_kw("close")?;
        self.expect(Tok::LParen, "\"(\"")?;
        let a = self.term()?;
        self.expect(Tok::Comma, "\",\"")?;
        let b = self.term()?;
        self.expect(Tok::Comma, "\",\"")?;
        let pos = self.pos();
        let eps = self.number()?;
        if !eps.is_positive() {
            return Err(ParseError { position: pos, message: "closeness threshold must be positive".into() });
        }
        self.expect(Tok::RParen, "\")\"")?;
        let w = Entourage::new(eps).map_err(|e| ParseError { position: pos, message: e.to_string() })?;
        Ok(Atom::Close(a, b, w))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut t = self.prod()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            t = Term::add(t, self.prod()?);
        }
        Ok(t)
    }

    fn prod(&mut self) -> Result<Term, ParseError> {
        let mut t = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            t = Term::mul(t, self.unary()?);
        }
        Ok(t)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Minus => {
                if matches!(self.toks[self.at + 1].0, Tok::Num(_)) {
                    Ok(Term::Const(self.number()?))
                } else {
                    self.bump();
                    self.err("\"-\" may only prefix a number literal (write -1*t)")
                }
            }
            Tok::Num(_) => Ok(Term::Const(self.number()?)),
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "\")\"")?;
                Ok(t)
            }
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                if s == "forall" || s == "exists" {
                    self.err("quantifier inside the matrix: formulas must be prenex")
                } else {
                    self.err(format!("keyword {s:?} cannot start a term"))
                }
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if *self.peek() != Tok::LParen {
                    return Ok(Term::Var(name));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                }
                self.expect(Tok::RParen, "\")\"")?;
                Ok(Term::App(name, args))
            }
            other => self.err(format!("expected a term, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("{s:?}"),
        Tok::Num(s) => format!("number {s}"),
        Tok::End => "end of input".into(),
        Tok::LParen => "\"(\"".into(),
        Tok::RParen => "\")\"".into(),
        Tok::LBrack => "\"[\"".into(),
        Tok::RBrack => "\"]\"".into(),
        Tok::Comma => "\",\"".into(),
        Tok::Colon => "\":\"".into(),
        Tok::Pipe => "\"|\"".into(),
        Tok::Plus => "\"+\"".into(),
        Tok::Star => "\"*\"".into(),
        Tok::Minus => "\"-\"".into(),
        Tok::Equals => "\"=\"".into(),
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with(text, ParseOptions::default())
}

pub fn parse_formula_with(text: &str, opts: ParseOptions) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    Parser { toks, at: 0, opts }.formula()
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0, opts: ParseOptions::default() };
    let t = p.term()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {} after the term", describe(p.peek())));
    }
    Ok(t)
}

pub fn parse_region(text: &str) -> Result<Region, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0, opts: ParseOptions::default() };
    let r = p.region()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {} after the region", describe(p.peek())));
    }
    Ok(r)
}

/// Canonical text; `parse_formula(format_formula(φ)) == φ`.
pub fn format_formula(f: &Formula) -> String {
    let mut s = String::new();
    for b in &f.prefix {
        let q = match b.quantifier {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        };
        let _ = write!(s, "{q} {}", b.var);
        if let Some(r) = &b.bound {
            let _ = write!(s, " in {r}");
        }
        s.push(' ');
    }
    s.push_str(": ");
    let disjuncts: Vec<String> = f
        .matrix
        .iter()
        .map(|c| c.iter().map(format_atom).collect::<Vec<_>>().join(" and "))
        .collect();
    s.push_str(&disjuncts.join(" or "));
    s
}

pub fn format_atom(a: &Atom) -> String {
    match a {
        Atom::Eq(x, y) => format!("{} = {}", format_term(x), format_term(y)),
        Atom::Close(x, y, w) => {
            format!("close({}, {}, {})", format_term(x), format_term(y), format_rational(&w.epsilon))
        }
    }
}

pub fn format_term(t: &Term) -> String {
    fmt_term(t, 0)
}

/// `level`: 0 = operand of `+` on the left, 1 = operand of `*` on the
/// left or of `+` on the right, 2 = operand of `*` on the right.
fn fmt_term(t: &Term, level: u8) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => format_rational(c),
        Term::App(f, args) if f == ADD && args.len() == 2 => {
            let s = format!("{} + {}", fmt_term(&args[0], 0), fmt_term(&args[1], 1));
            if level > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Term::App(f, args) if f == MUL && args.len() == 2 => {
            let s = format!("{}*{}", fmt_term(&args[0], 1), fmt_term(&args[1], 2));
            if level > 1 {
                format!("({s})")
            } else {
                s
            }
        }
        Term::App(f, args) => {
            let inner: Vec<String> = args.iter().map(|a| fmt_term(a, 0)).collect();
            format!("{f}({})", inner.join(", "))
        }
    }
}
