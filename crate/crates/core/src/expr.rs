//! A small arithmetic language for chart maps, field components and boundary
//! curves.
//!
//! Grammar, lowest to highest precedence:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right associative
//! atom    := number | ident | ident '(' args ')' | '(' sum ')'
//! ```
//!
//! so `-2^2` is `-(2^2)` and `2^3^2` is `2^(3^2)`. Identifiers are either the
//! variables supplied at parse time, the constant `pi`, or one of the
//! functions `sin cos tan atan2 exp log sqrt abs`. Every error carries the
//! byte span of the offending source text.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

pub type Span = Range<usize>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at bytes {}..{} of `{source_text}`: {message}", span.start, span.end)]
    Syntax {
        message: String,
        span: Span,
        source_text: String,
    },
    #[error("unknown identifier `{name}` at bytes {}..{} of `{source_text}`", span.start, span.end)]
    UnknownIdentifier {
        name: String,
        span: Span,
        source_text: String,
    },
    #[error("domain error at bytes {}..{} of `{source_text}`: {message}", span.start, span.end)]
    Domain {
        message: String,
        span: Span,
        source_text: String,
    },
}

impl ExprError {
    pub fn span(&self) -> &Span {
        match self {
            ExprError::Syntax { span, .. }
            | ExprError::UnknownIdentifier { span, .. }
            | ExprError::Domain { span, .. } => span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan2,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan2" => Func::Atan2,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// A parsed expression node together with its source span.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub node: Node,
    pub span: Span,
}

/// A parsed expression bound to its source text and variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionAst {
    source: String,
    vars: Vec<String>,
    root: Expr,
}

impl fmt::Display for ExpressionAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Span)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
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
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                message: format!("malformed number `{text}`"),
                span: start..i,
                source_text: src.to_string(),
            })?;
            out.push((Tok::Num(value), start..i));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start..i));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                _ => {
                    let len = src[start..].chars().next().map_or(1, char::len_utf8);
                    return Err(ExprError::Syntax {
                        message: format!("unexpected character `{}`", &src[start..start + len]),
                        span: start..start + len,
                        source_text: src.to_string(),
                    });
                }
            };
            i += 1;
            out.push((tok, start..i));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span_here(&self) -> Span {
        match self.toks.get(self.pos) {
            Some((_, s)) => s.clone(),
            None => self.src.len()..self.src.len(),
        }
    }

    fn syntax(&self, message: impl Into<String>, span: Span) -> ExprError {
        ExprError::Syntax {
            message: message.into(),
            span,
            source_text: self.src.to_string(),
        }
    }

    fn bump(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.bump();
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            let span = lhs.span.start..rhs.span.end;
            lhs = Expr {
                node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            let span = lhs.span.start..rhs.span.end;
            lhs = Expr {
                node: Node::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Op('-')) = self.peek() {
            let (_, s) = self.bump().unwrap();
            let inner = self.unary()?;
            let span = s.start..inner.span.end;
            return Ok(Expr {
                node: Node::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            let span = base.span.start..exponent.span.end;
            return Ok(Expr {
                node: Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)),
                span,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let here = self.span_here();
        match self.bump() {
            Some((Tok::Num(v), span)) => Ok(Expr {
                node: Node::Num(v),
                span,
            }),
            Some((Tok::LParen, open)) => {
                let inner = self.sum()?;
                match self.bump() {
                    Some((Tok::RParen, close)) => Ok(Expr {
                        node: inner.node,
                        span: open.start..close.end,
                    }),
                    _ => Err(self.syntax("unclosed parenthesis", open)),
                }
            }
            Some((Tok::Ident(name), span)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let func = Func::lookup(&name).ok_or_else(|| ExprError::UnknownIdentifier {
                        name: name.clone(),
                        span: span.clone(),
                        source_text: self.src.to_string(),
                    })?;
                    self.bump();
                    let mut args = Vec::new();
                    if let Some(Tok::RParen) = self.peek() {
                    } else {
                        loop {
                            args.push(self.sum()?);
                            match self.peek() {
                                Some(Tok::Comma) => {
                                    self.bump();
                                }
                                _ => break,
                            }
                        }
                    }
                    let close = match self.bump() {
                        Some((Tok::RParen, s)) => s,
                        _ => return Err(self.syntax("expected `)` after arguments", span)),
                    };
                    let full = span.start..close.end;
                    if args.len() != func.arity() {
                        return Err(self.syntax(
                            format!(
                                "`{name}` takes {} argument(s), got {}",
                                func.arity(),
                                args.len()
                            ),
                            full,
                        ));
                    }
                    return Ok(Expr {
                        node: Node::Call(func, args),
                        span: full,
                    });
                }
                if name == "pi" {
                    return Ok(Expr {
                        node: Node::Num(std::f64::consts::PI),
                        span,
                    });
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(idx) => Ok(Expr {
                        node: Node::Var(idx),
                        span,
                    }),
                    None => Err(ExprError::UnknownIdentifier {
                        name,
                        span,
                        source_text: self.src.to_string(),
                    }),
                }
            }
            Some((tok, span)) => Err(self.syntax(format!("unexpected token {tok:?}"), span)),
            None => Err(self.syntax("unexpected end of expression", here)),
        }
    }
}

impl ExpressionAst {
    /// Parses `text` with the given variable names (in evaluation order).
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let toks = tokenize(text)?;
        let mut parser = Parser {
            src: text,
            toks,
            pos: 0,
            vars,
        };
        let root = parser.sum()?;
        if parser.pos < parser.toks.len() {
            let span = parser.span_here();
            return Err(parser.syntax("unexpected trailing input", span));
        }
        Ok(ExpressionAst {
            source: text.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            root,
        })
    }

    /// Parses a surface-parameter expression over `w1`, `w2`.
    pub fn parse_w(text: &str) -> Result<Self, ExprError> {
        Self::parse(text, &["w1", "w2"])
    }

    /// Parses an expression with no free variables and evaluates it.
    pub fn constant(text: &str) -> Result<f64, ExprError> {
        Self::parse(text, &[])?.eval(&[])
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    fn domain(&self, message: impl Into<String>, span: &Span) -> ExprError {
        ExprError::Domain {
            message: message.into(),
            span: span.clone(),
            source_text: self.source.clone(),
        }
    }

    /// Evaluates the expression. Operations that leave the real domain
    /// (log of a non-positive number, sqrt of a negative, division by zero)
    /// return a domain error pointing at the offending sub-expression.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        self.eval_node(&self.root, values)
    }

    /// Evaluates, mapping domain errors to NaN. For hot loops where the
    /// caller checks finiteness itself.
    pub fn eval_lossy(&self, values: &[f64]) -> f64 {
        self.eval(values).unwrap_or(f64::NAN)
    }

    fn eval_node(&self, e: &Expr, v: &[f64]) -> Result<f64, ExprError> {
        let out = match &e.node {
            Node::Num(x) => *x,
            Node::Var(i) => v[*i],
            Node::Neg(a) => -self.eval_node(a, v)?,
            Node::Bin(op, a, b) => {
                let x = self.eval_node(a, v)?;
                let y = self.eval_node(b, v)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(self.domain("division by zero", &e.span));
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        let r = if y == 2.0 { x * x } else { x.powf(y) };
                        if r.is_nan() {
                            return Err(self.domain("power of a negative base", &e.span));
                        }
                        r
                    }
                }
            }
            Node::Call(f, args) => {
                let x = self.eval_node(&args[0], v)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Atan2 => x.atan2(self.eval_node(&args[1], v)?),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.domain("log of a non-positive value", &e.span));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain("sqrt of a negative value", &e.span));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                }
            }
        };
        if !out.is_finite() {
            return Err(self.domain("non-finite value", &e.span));
        }
        Ok(out)
    }
}
