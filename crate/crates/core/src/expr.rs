//! Closed-form expressions in the index variable `k`, e.g. `"(-1)^k*k"` or
//! `"exp(-k)"`. Used to describe sequences in configs and in the registry.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    K,
    Eps,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

/// A parsed expression together with its source text.
#[derive(Clone, PartialEq)]
pub struct KExpr {
    src: String,
    node: Node,
}

impl fmt::Debug for KExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KExpr({:?})", self.src)
    }
}

impl fmt::Display for KExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl KExpr {
    pub fn parse(src: &str) -> Result<Self> {
        let toks = lex(src)?;
        let mut p = Parser { toks: &toks, pos: 0 };
        let node = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::InvalidInput(format!("trailing input in expression `{src}`")));
        }
        Ok(KExpr { src: src.to_string(), node })
    }

    pub fn constant(c: f64) -> Self {
        KExpr { src: format!("{c}"), node: Node::Num(c) }
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, k: f64) -> f64 {
        eval(&self.node, k, f64::NAN)
    }

    /// Evaluates with the tolerance variable `eps` bound as well (used by
    /// shift hints such as `-(1/k + eps)/2`).
    pub fn eval_with(&self, k: f64, eps: f64) -> f64 {
        eval(&self.node, k, eps)
    }
}

fn eval(n: &Node, k: f64, e: f64) -> f64 {
    match n {
        Node::Num(c) => *c,
        Node::K => k,
        Node::Eps => e,
        Node::Neg(a) => -eval(a, k, e),
        Node::Bin(op, a, b) => {
            let (x, y) = (eval(a, k, e), eval(b, k, e));
            match op {
                '+' => x + y,
                '-' => x - y,
                '*' => x * y,
                '/' => x / y,
                '^' => {
                    if y.fract() == 0.0 && y.abs() < 1e9 {
                        x.powi(y as i32)
                    } else {
                        x.powf(y)
                    }
                }
                _ => unreachable!(),
            }
        }
        Node::Call(f, a) => {
            let x = eval(a, k, e);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Ln => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Abs => x.abs(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            // scientific notation
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let save = i;
                i += 1;
                if i < cs.len() && (cs[i] == '-' || cs[i] == '+') {
                    i += 1;
                }
                if i < cs.len() && cs[i].is_ascii_digit() {
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = cs[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad number `{s}`")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Tok::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Tok::RParen);
            i += 1;
        } else {
            return Err(Error::InvalidInput(format!("unexpected character `{c}` in `{src}`")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.peek().cloned().ok_or_else(|| Error::InvalidInput("unexpected end of expression".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "k" => Ok(Node::K),
                "eps" => Ok(Node::Eps),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                _ => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "ln" => Func::Ln,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        _ => return Err(Error::InvalidInput(format!("unknown identifier `{name}`"))),
                    };
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(Error::InvalidInput(format!("`{name}` must be followed by `(`")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Node::Call(f, Box::new(arg)))
                }
            },
            other => Err(Error::InvalidInput(format!("unexpected token {other:?}"))),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::InvalidInput("missing `)`".into()))
        }
    }
}

impl Serialize for KExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.src)
    }
}

impl<'de> Deserialize<'de> for KExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        KExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, k: f64) -> f64 {
        KExpr::parse(s).unwrap().eval(k)
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(ev("k+1/k", 4.0), 4.25);
        assert_eq!(ev("-k-1/k", 2.0), -2.5);
        assert_eq!(ev("(-1)^k*k", 3.0), -3.0);
        assert_eq!(ev("(-1)^k/k", 4.0), 0.25);
        assert_eq!(ev("2^3^2", 0.0), 512.0);
        assert!((ev("exp(-k)", 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((ev("sin(1/k)", 2.0) - 0.5f64.sin()).abs() < 1e-15);
        assert!((ev("2*k/pi", 3.0) - 6.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(ev("1e-3*k", 2.0), 0.002);
    }

    #[test]
    fn rejects_garbage() {
        assert!(KExpr::parse("k +").is_err());
        assert!(KExpr::parse("foo(k)").is_err());
        assert!(KExpr::parse("(k").is_err());
        assert!(KExpr::parse("k $ 2").is_err());
    }
}
