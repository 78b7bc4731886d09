//! Parser for structure-function expressions.
//!
//! ```text
//! expr   := term ('|' term)*
//! term   := factor ('*' factor)*
//! factor := 'x' DIGITS | '(' expr ')'
//! ```
//!
//! `*` is the Boolean product and `|` the coproduct `1 − (1 − x)(1 − y)`.
//! Positions in errors are 0-based byte offsets into the input.

use crate::error::{Error, Result};
use crate::structure::StructureFunction;
use crate::subset::SubsetIndex;

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Var(usize),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    fn eval(&self, a: SubsetIndex) -> bool {
        match self {
            Expr::Var(i) => a.contains(*i),
            Expr::And(xs) => xs.iter().all(|x| x.eval(a)),
            Expr::Or(xs) => xs.iter().any(|x| x.eval(a)),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            terms.push(self.term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Or(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::And(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                let digits_start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
                if self.pos == digits_start {
                    return Err(self.error("expected a component number after `x`"));
                }
                let index: usize = name[1..].parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.n {
                    return Err(Error::UnknownVariable {
                        name,
                        position: start,
                    });
                }
                Ok(Expr::Var(index - 1))
            }
            Some(_) => Err(self.error("expected a variable or `(`")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

pub(crate) fn parse(text: &str, n: usize) -> Result<StructureFunction> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
    };
    let expr = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser.error("expected `*`, `|`, `)` or end of input"));
    }
    StructureFunction::from_fn(n, |a| expr.eval(a))
}
