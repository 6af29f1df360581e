//! Expression syntax shared by `ring`, `witness` and `mahler coeffs`.
//!
//! ```text
//! top   := sum ("mod" "p" ("^" INT)?)?
//! sum   := prod (("+" | "-") prod)*
//! prod  := unary (("*" | "/") unary)*
//! unary := "-" unary | pow
//! pow   := atom ("^" unary)?
//! atom  := NUM | IDENT | IDENT "(" sum ("," sum)* ")" | "(" sum ")" | "[" sum "]"
//! ```

use lavec_core::rational::Q;
use lavec_core::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Q),
    Var(String, usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, Box<Expr>, usize),
    Call(String, Vec<Expr>, usize),
    Teich(Box<Expr>, usize),
    /// `e mod p^k`; `k = 1` for a bare `mod p`.
    ModP(Box<Expr>, u32, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, Error> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = j + d.len_utf8();
                it.next();
            }
            let n = src[i..end].parse().map_err(|_| err(i, "integer literal too large"))?;
            out.push((i, Tok::Num(n)));
        } else if c.is_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = it.peek() {
                if !(d.is_alphanumeric() || d == '_') {
                    break;
                }
                end = j + d.len_utf8();
                it.next();
            }
            out.push((i, Tok::Ident(src[i..end].to_string())));
        } else if "+-*/^()[],".contains(c) {
            out.push((i, Tok::Sym(c)));
            it.next();
        } else if c == '·' {
            out.push((i, Tok::Sym('*')));
            it.next();
        } else {
            return Err(err(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), Error> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(self.pos(), format!("expected `{c}`")))
        }
    }

    fn top(&mut self) -> Result<Expr, Error> {
        let e = self.sum()?;
        let pos = self.pos();
        if self.peek() == Some(&Tok::Ident("mod".into())) {
            self.at += 1;
            if self.peek() != Some(&Tok::Ident("p".into())) {
                return Err(err(self.pos(), "expected `p` after `mod`"));
            }
            self.at += 1;
            let mut k = 1;
            if self.eat('^') {
                match self.peek() {
                    Some(&Tok::Num(n)) if n >= 1 => {
                        k = u32::try_from(n).map_err(|_| err(self.pos(), "exponent too large"))?;
                        self.at += 1;
                    }
                    _ => return Err(err(self.pos(), "expected a positive integer after `p^`")),
                }
            }
            return Ok(Expr::ModP(Box::new(e), k, pos));
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.prod()?;
        loop {
            let pos = self.pos();
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.prod()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn prod(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, Error> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        let pos = self.pos();
        if self.eat('^') {
            let e = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(e), pos));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, Error> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.at += 1;
                Ok(Expr::Num(Q::from_integer(n)))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if !self.eat('(') {
                    return Ok(Expr::Var(name, pos));
                }
                let mut args = vec![self.sum()?];
                while self.eat(',') {
                    args.push(self.sum()?);
                }
                self.expect(')')?;
                Ok(Expr::Call(name, args, pos))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Sym('[')) => {
                self.at += 1;
                let e = self.sum()?;
                self.expect(']')?;
                Ok(Expr::Teich(Box::new(e), pos))
            }
            Some(t) => Err(err(pos, format!("unexpected {}", describe(&t)))),
            None => Err(err(pos, "unexpected end of input")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
    }
}

pub fn parse(src: &str) -> Result<Expr, Error> {
    let mut p = Parser { toks: lex(src)?, at: 0, end: src.len() };
    let e = p.top()?;
    if p.at < p.toks.len() {
        let (pos, t) = &p.toks[p.at];
        return Err(err(*pos, format!("unexpected {}", describe(t))));
    }
    Ok(e)
}
