//! Expression language for user-supplied coefficient functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | constant | variable | func '(' args ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-1` is `0.5`.

use std::fmt;

use thiserror::Error;

use super::jet::Jet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("function `{name}` at position {pos} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in {op}: {detail}")]
pub struct EvalError {
    pub op: &'static str,
    pub detail: String,
}

impl EvalError {
    fn new(op: &'static str, detail: impl Into<String>) -> Self {
        EvalError {
            op,
            detail: detail.into(),
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Atan2,
}

impl Func {
    const ALL: [(&'static str, Func); 10] = [
        ("sin", Func::Sin),
        ("cos", Func::Cos),
        ("tan", Func::Tan),
        ("sinh", Func::Sinh),
        ("cosh", Func::Cosh),
        ("tanh", Func::Tanh),
        ("exp", Func::Exp),
        ("log", Func::Log),
        ("sqrt", Func::Sqrt),
        ("atan2", Func::Atan2),
    ];

    fn lookup(name: &str) -> Option<Func> {
        Self::ALL.iter().find(|(n, _)| *n == name).map(|&(_, f)| f)
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, f)| *f == self).map(|&(n, _)| n).unwrap()
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

/// Abstract syntax tree with variables resolved to slot indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// True when the tree references no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
            Expr::Call(_, args) => args.iter().all(Expr::is_constant),
        }
    }

    /// Evaluates the truncated Taylor expansion of the expression composed
    /// with `bindings` (one jet per declared variable).
    pub fn eval_jet(&self, bindings: &[Jet]) -> Result<Jet, EvalError> {
        let nvars = bindings.first().map_or(0, Jet::nvars);
        let out = self.eval_inner(bindings, nvars)?;
        if !out.is_finite() {
            return Err(EvalError::new("evaluation", "non-finite result"));
        }
        Ok(out)
    }

    /// Plain real evaluation.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let bindings: Vec<Jet> = values.iter().map(|&v| Jet::constant(v, 0).truncate(0)).collect();
        Ok(self.eval_jet(&bindings)?.value())
    }

    fn eval_inner(&self, b: &[Jet], nvars: usize) -> Result<Jet, EvalError> {
        Ok(match self {
            Expr::Num(v) => Jet::constant(*v, nvars),
            Expr::Var(i) => b[*i],
            Expr::Neg(a) => -a.eval_inner(b, nvars)?,
            Expr::Bin(op, lhs, rhs) => {
                let l = lhs.eval_inner(b, nvars)?;
                match op {
                    BinOp::Pow => return pow(&l, rhs, b, nvars),
                    _ => {
                        let r = rhs.eval_inner(b, nvars)?;
                        match op {
                            BinOp::Add => l + r,
                            BinOp::Sub => l - r,
                            BinOp::Mul => l * r,
                            BinOp::Div => {
                                if r.value() == 0.0 {
                                    return Err(EvalError::new("/", "division by zero"));
                                }
                                l / r
                            }
                            BinOp::Pow => unreachable!(),
                        }
                    }
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval_inner(b, nvars)?;
                let out = match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => {
                        if a.value().cos() == 0.0 {
                            return Err(EvalError::new("tan", "pole"));
                        }
                        a.tan()
                    }
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Tanh => a.tanh(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.value() <= 0.0 {
                            return Err(EvalError::new("log", format!("argument {} is not positive", a.value())));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        let v = a.value();
                        if v < 0.0 || (v == 0.0 && a.order() > 0) {
                            return Err(EvalError::new(
                                "sqrt",
                                format!("argument {v} outside the smooth domain"),
                            ));
                        }
                        if a.order() == 0 {
                            Jet::constant(v.sqrt(), nvars).truncate(0)
                        } else {
                            a.sqrt()
                        }
                    }
                    Func::Atan2 => {
                        let x = args[1].eval_inner(b, nvars)?;
                        if a.value() == 0.0 && x.value() == 0.0 {
                            return Err(EvalError::new("atan2", "undefined at (0, 0)"));
                        }
                        Jet::atan2(&a, &x)
                    }
                };
                if !out.is_finite() {
                    return Err(EvalError::new(f.name(), "non-finite result"));
                }
                out
            }
        })
    }
}

fn pow(base: &Jet, exponent: &Expr, b: &[Jet], nvars: usize) -> Result<Jet, EvalError> {
    let a = base.value();
    if exponent.is_constant() {
        let p = exponent.eval_inner(b, nvars)?.value();
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            if p < 0.0 && a == 0.0 {
                return Err(EvalError::new("^", "zero raised to a negative power"));
            }
            return Ok(base.powi(p as i32));
        }
        if a < 0.0 || (a == 0.0 && base.order() > 0) {
            return Err(EvalError::new(
                "^",
                format!("base {a} outside the domain of a non-integer power"),
            ));
        }
        if base.order() == 0 {
            return Ok(Jet::constant(a.powf(p), nvars).truncate(0));
        }
        return Ok(base.powf(p));
    }
    if a <= 0.0 {
        return Err(EvalError::new(
            "^",
            format!("base {a} must be positive for a variable exponent"),
        ));
    }
    let e = exponent.eval_inner(b, nvars)?;
    Ok((e * base.ln()).exp())
}

/// A parsed expression together with its source text and variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    vars: Vec<String>,
    ast: Expr,
}

impl Expression {
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, ParseError> {
        let ast = parse(text, vars)?;
        Ok(Expression {
            source: text.to_string(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            ast,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        self.ast.eval(values)
    }

    pub fn eval_jet(&self, bindings: &[Jet]) -> Result<Jet, EvalError> {
        self.ast.eval_jet(bindings)
    }
}

impl fmt::Display for Expression {
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
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || ch == '.' {
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
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("malformed number `{lit}`"),
            })?;
            out.push((Tok::Num(v), start));
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let tok = match ch {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                })
            }
        };
        out.push((tok, start));
        i += ch.len_utf8();
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let msg = match self.peek() {
            Tok::End => format!("{} (at end of input)", msg.into()),
            _ => msg.into(),
        };
        Err(ParseError::Syntax { pos: self.pos(), msg })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.pos();
                self.bump();
                if let Some(f) = Func::lookup(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.syntax(format!("expected `(` after function `{name}`"));
                    }
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.expr()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.expr()?);
                        }
                    }
                    if *self.peek() != Tok::RParen {
                        return self.syntax("expected `)` or `,` in argument list");
                    }
                    self.bump();
                    if args.len() != f.arity() {
                        return Err(ParseError::Arity {
                            name,
                            expected: f.arity(),
                            found: args.len(),
                            pos,
                        });
                    }
                    return Ok(Expr::Call(f, args));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => Err(ParseError::UnknownIdentifier { name, pos }),
                }
            }
            Tok::End => self.syntax("unexpected end of input"),
            other => self.syntax(format!("unexpected token {other:?}")),
        }
    }
}

/// Parses `text` over the declared variable names.
pub fn parse(text: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, vars };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(e)
}
