//! Concrete syntax.
//!
//! ```text
//! type  ::= tatom ["->" type]
//! tatom ::= "Nat" | "D" tatom | "(" type ")"
//! term  ::= "\" x ":" type "." term
//!         | "let[d](" x "=" term ")" [":" type] term
//!         | app {"+" app}
//! app   ::= head {arg}
//! head  ::= op arg | "lin" arg arg | atom
//! op    ::= "succ[d]" | "pred[d]" | "proj[i,d]" | "inj[i,d]" | "sum[d]"
//!         | "flip[d,l]" | "D" | "fix" | "dlin"
//! atom  ::= x | n | "(" term ")" | "zero:" type
//!         | "if[d](" term "," term "," term ")" [":" type]
//! ```
//!
//! An argument may also be a binder form, which then extends as far to
//! the right as possible. `#` starts a comment running to end of line.

use std::rc::Rc;
use thiserror::Error;

use super::term::*;
use super::ty::Ty;
use super::word::Bit;
use crate::differential::{ldiffd, linapp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Lambda,
    Colon,
    Dot,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Plus,
    Eq,
    Arrow,
    Eof,
}

const KEYWORDS: &[&str] = &[
    "Nat", "D", "succ", "pred", "if", "let", "proj", "inj", "sum", "flip", "zero", "fix", "dlin",
    "lin",
];

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(src: &str) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\\' | 'λ' => {
                toks.push((Tok::Lambda, l0, c0));
                advance(1, &mut i);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                toks.push((Tok::Arrow, l0, c0));
                advance(2, &mut i);
            }
            '→' => {
                toks.push((Tok::Arrow, l0, c0));
                advance(1, &mut i);
            }
            ':' | '.' | '(' | ')' | '[' | ']' | ',' | '+' | '=' => {
                let t = match c {
                    ':' => Tok::Colon,
                    '.' => Tok::Dot,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    ',' => Tok::Comma,
                    '+' => Tok::Plus,
                    _ => Tok::Eq,
                };
                toks.push((t, l0, c0));
                advance(1, &mut i);
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let n = s.parse().map_err(|_| ParseError {
                    line: l0,
                    col: c0,
                    msg: format!("numeral {s} out of range"),
                })?;
                toks.push((Tok::Num(n), l0, c0));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            }
            other => {
                return Err(ParseError {
                    line: l0,
                    col: c0,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, col) = self.toks[self.pos];
        Err(ParseError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {t:?}, found {:?}", self.peek()))
        }
    }

    fn keyword(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => Some(s.as_str()),
            _ => None,
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {t:?}")),
        }
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            t => self.err(format!("expected numeral, found {t:?}")),
        }
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        Ok(self.nat()? as usize)
    }

    fn bit(&mut self) -> Result<Bit, ParseError> {
        let n = self.nat()?;
        match Bit::from_u8(n as u8).filter(|_| n <= 1) {
            Some(b) => Ok(b),
            None => self.err("index must be 0 or 1"),
        }
    }

    /// `[a]` or `[a,b]` superscripts.
    fn bracket(&mut self, arity: usize) -> Result<Vec<u64>, ParseError> {
        self.expect(Tok::LBrack)?;
        let mut v = Vec::new();
        for k in 0..arity {
            if k > 0 {
                self.expect(Tok::Comma)?;
            }
            v.push(self.nat()?);
        }
        self.expect(Tok::RBrack)?;
        Ok(v)
    }

    fn ty(&mut self) -> Result<Ty, ParseError> {
        let a = self.ty_atom()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let b = self.ty()?;
            Ok(Ty::arrow(a, b))
        } else {
            Ok(a)
        }
    }

    fn ty_atom(&mut self) -> Result<Ty, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Nat" => {
                self.bump();
                Ok(Ty::nat())
            }
            Tok::Ident(s) if s == "D" => {
                self.bump();
                Ok(self.ty_atom()?.d())
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            t => self.err(format!("expected a type, found {t:?}")),
        }
    }

    fn opt_ann(&mut self) -> Result<Option<Ty>, ParseError> {
        if *self.peek() == Tok::Colon {
            self.bump();
            Ok(Some(self.ty()?))
        } else {
            Ok(None)
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if let Some(t) = self.binder()? {
            return Ok(t);
        }
        let mut t = self.app()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let r = self.app()?;
            t = plus(t, r);
        }
        Ok(t)
    }

    fn binder(&mut self) -> Result<Option<Term>, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let x = self.ident()?;
            self.expect(Tok::Colon)?;
            let a = self.ty()?;
            self.expect(Tok::Dot)?;
            let body = self.term()?;
            return Ok(Some(Term::Abs(x, a, Rc::new(body))));
        }
        if self.keyword() == Some("let") {
            self.bump();
            let d = self.bracket(1)?[0] as usize;
            self.expect(Tok::LParen)?;
            let x = self.ident()?;
            self.expect(Tok::Eq)?;
            let bound = self.term()?;
            self.expect(Tok::RParen)?;
            let a = self.opt_ann()?;
            let body = self.term()?;
            return Ok(Some(Term::Let {
                ann: a,
                depth: d,
                var: x,
                bound: Rc::new(bound),
                body: Rc::new(body),
            }));
        }
        Ok(None)
    }

    fn starts_arg(&self) -> bool {
        match self.peek() {
            Tok::Num(_) | Tok::LParen | Tok::Lambda => true,
            Tok::Ident(s) => s != "Nat",
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.head()?;
        while self.starts_arg() {
            if let Some(b) = self.binder()? {
                return Ok(app(t, b));
            }
            let a = self.head()?;
            t = app(t, a);
        }
        Ok(t)
    }

    fn arg(&mut self) -> Result<Term, ParseError> {
        match self.binder()? {
            Some(b) => Ok(b),
            None => self.head(),
        }
    }

    fn head(&mut self) -> Result<Term, ParseError> {
        let Some(kw) = self.keyword().map(str::to_string) else {
            return self.atom();
        };
        match kw.as_str() {
            "succ" | "pred" | "sum" => {
                self.bump();
                let d = self.bracket(1)?[0] as usize;
                let m = Rc::new(self.arg()?);
                Ok(match kw.as_str() {
                    "succ" => Term::Succ(d, m),
                    "pred" => Term::Pred(d, m),
                    _ => Term::Sum(d, m),
                })
            }
            "proj" | "inj" => {
                self.bump();
                self.expect(Tok::LBrack)?;
                let i = self.bit()?;
                self.expect(Tok::Comma)?;
                let d = self.index()?;
                self.expect(Tok::RBrack)?;
                let m = Rc::new(self.arg()?);
                Ok(if kw == "proj" {
                    Term::Proj(i, d, m)
                } else {
                    Term::Inj(i, d, m)
                })
            }
            "flip" => {
                self.bump();
                let v = self.bracket(2)?;
                let m = self.arg()?;
                Ok(flip(v[0] as usize, v[1] as usize, m))
            }
            "D" => {
                self.bump();
                Ok(diff(self.arg()?))
            }
            "fix" => {
                self.bump();
                Ok(fix(self.arg()?))
            }
            "dlin" => {
                self.bump();
                Ok(ldiffd(self.arg()?))
            }
            "lin" => {
                self.bump();
                let f = self.arg()?;
                let x = self.arg()?;
                Ok(linapp(f, x))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Num(n))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "zero" => {
                self.bump();
                self.expect(Tok::Colon)?;
                Ok(Term::Zero(self.ty()?))
            }
            Tok::Ident(s) if s == "if" => {
                self.bump();
                let d = self.bracket(1)?[0] as usize;
                self.expect(Tok::LParen)?;
                let c = self.term()?;
                self.expect(Tok::Comma)?;
                let p = self.term()?;
                self.expect(Tok::Comma)?;
                let q = self.term()?;
                self.expect(Tok::RParen)?;
                let a = self.opt_ann()?;
                Ok(ifz(a, d, c, p, q))
            }
            Tok::Ident(_) => Ok(Term::Var(self.ident()?)),
            t => self.err(format!("expected a term, found {t:?}")),
        }
    }
}

fn parser(src: &str) -> Result<Parser, ParseError> {
    Ok(Parser {
        toks: lex(src)?.toks,
        pos: 0,
    })
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = parser(src)?;
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected trailing {:?}", p.peek()));
    }
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Ty, ParseError> {
    let mut p = parser(src)?;
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected trailing {:?}", p.peek()));
    }
    Ok(t)
}
