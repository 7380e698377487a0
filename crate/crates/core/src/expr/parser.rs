//! Recursive-descent parser with precedence climbing.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := ("-" | "+") unary | power
//! power    := primary ("^" unary)?        exponent must fold to a constant
//! primary  := number | var | call | "(" expr ")"
//! call     := ("sqrt" | "exp" | "ln" | "abs") "(" expr ")"
//!           | "dot" "(" block "," block ")" | "norm2" "(" block ")"
//! var      := ("x" | "y") digits            one-based, at most the dimension
//! block    := "x" | "y"
//! ```

use super::ast::{BinOp, Block, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                expected: "a numeric literal".into(),
            })?;
            out.push((Tok::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        return Err(Error::Syntax {
            offset: start,
            expected: "an operator, number, identifier or parenthesis".into(),
        });
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                offset: self.offset(),
                expected: format!("{} but found {}", tok.describe(), self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let exponent = self.unary()?;
        let value = fold_constant(&exponent).ok_or_else(|| Error::Syntax {
            offset: at,
            expected: "a constant exponent".into(),
        })?;
        Ok(Expr::Pow(Box::new(base), value))
    }

    fn primary(&mut self) -> Result<Expr> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.call(name, at)
                } else {
                    self.variable(&name, at)
                }
            }
            other => Err(Error::Syntax {
                offset: at,
                expected: format!("an expression but found {}", other.describe()),
            }),
        }
    }

    fn variable(&self, name: &str, at: usize) -> Result<Expr> {
        let block = match name.as_bytes().first() {
            Some(b'x') => Block::X,
            Some(b'y') => Block::Y,
            _ => {
                return Err(Error::UnknownIdentifier {
                    name: name.into(),
                    offset: at,
                })
            }
        };
        let digits = &name[1..];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::UnknownIdentifier {
                name: name.into(),
                offset: at,
            });
        }
        match digits.parse::<usize>() {
            Ok(i) if (1..=self.dim).contains(&i) => Ok(Expr::Var(block, i - 1)),
            _ => Err(Error::IndexOutOfRange {
                name: name.into(),
                offset: at,
                dim: self.dim,
            }),
        }
    }

    fn args(&mut self) -> Result<Vec<(Expr, usize)>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            let at = self.offset();
            args.push((self.expr()?, at));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                other => {
                    return Err(Error::Syntax {
                        offset: self.offset(),
                        expected: format!("`,` or `)` but found {}", other.describe()),
                    })
                }
            }
        }
    }

    fn call(&mut self, name: String, at: usize) -> Result<Expr> {
        let expected = match name.as_str() {
            "dot" => 2,
            "norm2" => 1,
            _ if Func::from_name(&name).is_some() => 1,
            _ => return Err(Error::UnknownIdentifier { name, offset: at }),
        };
        // Block arguments are bare `x` / `y`, which are not valid expressions.
        let args = if matches!(name.as_str(), "dot" | "norm2") {
            self.block_args()?
                .into_iter()
                .map(|(b, o)| (BlockOrExpr::Block(b), o))
                .collect::<Vec<_>>()
        } else {
            self.args()?
                .into_iter()
                .map(|(e, o)| (BlockOrExpr::Expr(e), o))
                .collect()
        };
        if args.len() != expected {
            return Err(Error::Arity {
                name,
                offset: at,
                expected,
                found: args.len(),
            });
        }
        let mut args = args.into_iter();
        match name.as_str() {
            "dot" => {
                let a = args.next().unwrap().0.block();
                let b = args.next().unwrap().0.block();
                Ok(Expr::Dot(a, b))
            }
            "norm2" => Ok(Expr::Norm2(args.next().unwrap().0.block())),
            _ => {
                let func = Func::from_name(&name).expect("checked above");
                Ok(Expr::Call(func, Box::new(args.next().unwrap().0.expr())))
            }
        }
    }

    fn block_args(&mut self) -> Result<Vec<(Block, usize)>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(out);
        }
        loop {
            let (tok, at) = self.bump();
            let block = match &tok {
                Tok::Ident(s) if s == "x" => Block::X,
                Tok::Ident(s) if s == "y" => Block::Y,
                other => {
                    return Err(Error::Syntax {
                        offset: at,
                        expected: format!("coordinate block `x` or `y` but found {}", other.describe()),
                    })
                }
            };
            out.push((block, at));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(out);
                }
                other => {
                    return Err(Error::Syntax {
                        offset: self.offset(),
                        expected: format!("`,` or `)` but found {}", other.describe()),
                    })
                }
            }
        }
    }
}

enum BlockOrExpr {
    Block(Block),
    Expr(Expr),
}

impl BlockOrExpr {
    fn block(self) -> Block {
        match self {
            BlockOrExpr::Block(b) => b,
            BlockOrExpr::Expr(_) => unreachable!(),
        }
    }
    fn expr(self) -> Expr {
        match self {
            BlockOrExpr::Expr(e) => e,
            BlockOrExpr::Block(_) => unreachable!(),
        }
    }
}

/// Value of a variable-free expression.
fn fold_constant(e: &Expr) -> Option<f64> {
    Some(match e {
        Expr::Num(v) => *v,
        Expr::Neg(a) => -fold_constant(a)?,
        Expr::Binary(op, a, b) => {
            let (a, b) = (fold_constant(a)?, fold_constant(b)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
            }
        }
        Expr::Pow(a, k) => fold_constant(a)?.powf(*k),
        Expr::Call(f, a) => {
            let a = fold_constant(a)?;
            match f {
                Func::Sqrt => a.sqrt(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Abs => a.abs(),
            }
        }
        Expr::Var(..) | Expr::Dot(..) | Expr::Norm2(_) => return None,
    })
    .filter(|v: &f64| v.is_finite())
}

/// Parses `src` as an expression over `x1..x{dim}`, `y1..y{dim}`.
pub fn parse(src: &str, dim: usize) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            expected: "an expression".into(),
        });
    }
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(Error::Syntax {
            offset: p.offset(),
            expected: format!("an operator or end of input but found {}", p.peek().describe()),
        });
    }
    Ok(e)
}
