//! One-variable coefficient expressions: parsing, evaluation and symbolic
//! differentiation.
//!
//! The free variable is always spelled `y`; any other identifier is a named
//! parameter that must be bound at evaluation time. The node set is the
//! smallest one covering the drift/diffusion coefficients of the built-in
//! models: constants, `y`, parameters, negation, `exp`, `log`, `sqrt`,
//! `abs`, `sin`, `cos`, the four arithmetic operators, power with a
//! constant exponent, and `min`/`max` for clamped coefficients.
//!
//! Derivatives at `min`/`max` kinks follow a one-sided convention: on a tie
//! the first argument's branch is selected. Internally this is represented
//! by a four-argument selection node `ifle(a, b, c, d)` (value `c` when
//! `a <= b`, else `d`), which is also accepted by the parser so printed
//! derivatives re-parse.
//!
//! ```
//! use diffbound::expr::{parse, eval_with};
//!
//! let ast = parse("p*y + q").unwrap();
//! let v = eval_with(&ast, 1.0, &[("p", 1.0), ("q", 2.5)]).unwrap();
//! assert_eq!(v, 3.5);
//! ```

use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Expression tree over the free variable `y` and named parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Param(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    /// `ifle(a, b, c, d)`: `c` if `a <= b`, else `d`.
    IfLe(Box<[Expr; 4]>),
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("exponent at position {pos} must be a constant")]
    NonConstantExponent { pos: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("domain violation: {func}({arg})")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivByZero,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

/// Parse an expression string into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos >= p.src.len() {
        return Err(ParseError::Syntax {
            pos: 0,
            msg: "empty input".into(),
        });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(ParseError::Syntax {
            pos: p.pos,
            msg: format!("unexpected character `{}`", p.src[p.pos] as char),
        });
    }
    Ok(e)
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

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ParseError::Syntax {
                pos: self.pos,
                msg: format!("expected `{}`", c as char),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = mul(lhs, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            Ok(neg(inner))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp_pos = self.pos;
            let exp_expr = self.unary()?;
            match const_fold(&exp_expr) {
                Some(p) => Ok(Expr::Pow(Box::new(base), p)),
                None => Err(ParseError::NonConstantExponent { pos: exp_pos }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(ParseError::Syntax {
                pos: self.pos,
                msg: format!("unexpected character `{}`", c as char),
            }),
            None => Err(ParseError::Syntax {
                pos: self.pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // scientific notation
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| ParseError::Syntax {
                pos: start,
                msg: format!("bad number literal `{text}`"),
            })
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.peek() == Some(b',') {
                self.pos += 1;
                args.push(self.expr()?);
            }
            self.expect(b')')?;
            return self.call(start, &name, args);
        }
        if name == "y" {
            Ok(Expr::Var)
        } else {
            Ok(Expr::Param(name))
        }
    }

    fn call(&mut self, pos: usize, name: &str, mut args: Vec<Expr>) -> Result<Expr, ParseError> {
        let unary = |op, args: &mut Vec<Expr>| {
            if args.len() == 1 {
                Ok(Expr::Unary(op, Box::new(args.pop().unwrap())))
            } else {
                Err(ParseError::Syntax {
                    pos,
                    msg: "function takes one argument".into(),
                })
            }
        };
        match name {
            "exp" => unary(UnaryOp::Exp, &mut args),
            "log" => unary(UnaryOp::Log, &mut args),
            "sqrt" => unary(UnaryOp::Sqrt, &mut args),
            "abs" => unary(UnaryOp::Abs, &mut args),
            "sin" => unary(UnaryOp::Sin, &mut args),
            "cos" => unary(UnaryOp::Cos, &mut args),
            "min" | "max" => {
                if args.len() != 2 {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("{name} takes two arguments"),
                    });
                }
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                let op = if name == "min" { BinOp::Min } else { BinOp::Max };
                Ok(Expr::Binary(op, Box::new(a), Box::new(b)))
            }
            "ifle" => {
                if args.len() != 4 {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "ifle takes four arguments".into(),
                    });
                }
                let d = args.pop().unwrap();
                let c = args.pop().unwrap();
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                Ok(Expr::IfLe(Box::new([a, b, c, d])))
            }
            _ => Err(ParseError::UnknownFunction {
                pos,
                name: name.to_owned(),
            }),
        }
    }
}

/// Fold an expression containing neither the variable nor parameters to a
/// constant value.
fn const_fold(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(c) => Some(*c),
        Expr::Unary(UnaryOp::Neg, inner) => const_fold(inner).map(|v| -v),
        Expr::Binary(op, a, b) => {
            let (a, b) = (const_fold(a)?, const_fold(b)?);
            Some(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Min => a.min(b),
                BinOp::Max => a.max(b),
            })
        }
        Expr::Pow(base, p) => const_fold(base).map(|v| v.powf(*p)),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluate `ast` at `y` with the given parameter bindings.
pub fn eval(ast: &Expr, y: f64, params: &HashMap<String, f64>) -> Result<f64, EvalError> {
    match ast {
        Expr::Const(c) => Ok(*c),
        Expr::Var => Ok(y),
        Expr::Param(name) => params
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::UnboundParam(name.clone())),
        Expr::Unary(op, inner) => {
            let v = eval(inner, y, params)?;
            match op {
                UnaryOp::Neg => Ok(-v),
                UnaryOp::Exp => Ok(v.exp()),
                UnaryOp::Log => {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(EvalError::Domain { func: "log", arg: v })
                    }
                }
                UnaryOp::Sqrt => {
                    if v >= 0.0 {
                        Ok(v.sqrt())
                    } else {
                        Err(EvalError::Domain { func: "sqrt", arg: v })
                    }
                }
                UnaryOp::Abs => Ok(v.abs()),
                UnaryOp::Sin => Ok(v.sin()),
                UnaryOp::Cos => Ok(v.cos()),
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval(a, y, params)?;
            let b = eval(b, y, params)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivByZero)
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Min => Ok(a.min(b)),
                BinOp::Max => Ok(a.max(b)),
            }
        }
        Expr::Pow(base, p) => {
            let v = eval(base, y, params)?;
            let r = v.powf(*p);
            if r.is_nan() && !v.is_nan() {
                Err(EvalError::Domain { func: "pow", arg: v })
            } else {
                Ok(r)
            }
        }
        Expr::IfLe(parts) => {
            let a = eval(&parts[0], y, params)?;
            let b = eval(&parts[1], y, params)?;
            if a <= b {
                eval(&parts[2], y, params)
            } else {
                eval(&parts[3], y, params)
            }
        }
    }
}

/// Convenience wrapper taking parameter bindings as a slice.
pub fn eval_with(ast: &Expr, y: f64, params: &[(&str, f64)]) -> Result<f64, EvalError> {
    let map: HashMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    eval(ast, y, &map)
}

// ---------------------------------------------------------------------------
// Smart constructors with light constant folding
// ---------------------------------------------------------------------------

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 1.0)
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ if is_zero(&a) => b,
        _ if is_zero(&b) => a,
        _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ if is_zero(&b) => a,
        _ if is_zero(&a) => neg(b),
        _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ if is_zero(&a) || is_zero(&b) => Expr::Const(0.0),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
        _ if is_zero(&a) => Expr::Const(0.0),
        _ if is_one(&b) => a,
        _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        _ => Expr::Unary(UnaryOp::Neg, Box::new(a)),
    }
}

pub(crate) fn constant(c: f64) -> Expr {
    Expr::Const(c)
}

// ---------------------------------------------------------------------------
// Symbolic differentiation
// ---------------------------------------------------------------------------

/// Symbolic derivative with respect to the free variable.
///
/// At `min`/`max` kinks the branch selected on a tie is the first argument's
/// (one-sided convention); the derivative of `abs` at zero is taken as 1.
pub fn differentiate(ast: &Expr) -> Expr {
    match ast {
        Expr::Const(_) | Expr::Param(_) => constant(0.0),
        Expr::Var => constant(1.0),
        Expr::Unary(op, inner) => {
            let u = (**inner).clone();
            let du = differentiate(inner);
            match op {
                UnaryOp::Neg => neg(du),
                UnaryOp::Exp => mul(Expr::Unary(UnaryOp::Exp, Box::new(u)), du),
                UnaryOp::Log => div(du, u),
                UnaryOp::Sqrt => div(
                    du,
                    mul(constant(2.0), Expr::Unary(UnaryOp::Sqrt, Box::new(u))),
                ),
                // d|u| = u' when 0 <= u (covers the kink), -u' otherwise
                UnaryOp::Abs => Expr::IfLe(Box::new([
                    constant(0.0),
                    u,
                    du.clone(),
                    neg(du),
                ])),
                UnaryOp::Sin => mul(Expr::Unary(UnaryOp::Cos, Box::new(u)), du),
                UnaryOp::Cos => neg(mul(Expr::Unary(UnaryOp::Sin, Box::new(u)), du)),
            }
        }
        Expr::Binary(op, a, b) => {
            let da = differentiate(a);
            let db = differentiate(b);
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                BinOp::Div => div(
                    sub(mul(da, b.clone()), mul(a, db)),
                    Expr::Pow(Box::new(b), 2.0),
                ),
                // tie goes to the first argument in both cases
                BinOp::Min => Expr::IfLe(Box::new([a, b, da, db])),
                BinOp::Max => Expr::IfLe(Box::new([b, a, da, db])),
            }
        }
        Expr::Pow(base, p) => {
            let db = differentiate(base);
            mul(
                mul(constant(*p), Expr::Pow(Box::new((**base).clone()), p - 1.0)),
                db,
            )
        }
        Expr::IfLe(parts) => Expr::IfLe(Box::new([
            parts[0].clone(),
            parts[1].clone(),
            differentiate(&parts[2]),
            differentiate(&parts[3]),
        ])),
    }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, _, _) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, _, _) => 2,
        Expr::Unary(UnaryOp::Neg, _) => 3,
        Expr::Pow(_, _) => 4,
        _ => 5,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(child) < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var => write!(f, "y"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Unary(UnaryOp::Neg, inner) => {
                write!(f, "-")?;
                fmt_child(f, inner, 4)
            }
            Expr::Unary(op, inner) => {
                let name = match op {
                    UnaryOp::Exp => "exp",
                    UnaryOp::Log => "log",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({inner})")
            }
            Expr::Binary(BinOp::Min, a, b) => write!(f, "min({a}, {b})"),
            Expr::Binary(BinOp::Max, a, b) => write!(f, "max({a}, {b})"),
            Expr::Binary(op, a, b) => {
                let (sym, prec, rprec) = match op {
                    BinOp::Add => ("+", 1, 1),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 2),
                    BinOp::Div => ("/", 2, 3),
                    _ => unreachable!(),
                };
                fmt_child(f, a, prec)?;
                write!(f, " {sym} ")?;
                fmt_child(f, b, rprec)
            }
            Expr::Pow(base, p) => {
                fmt_child(f, base, 5)?;
                if *p < 0.0 {
                    write!(f, "^({p})")
                } else {
                    write!(f, "^{p}")
                }
            }
            Expr::IfLe(parts) => write!(
                f,
                "ifle({}, {}, {}, {})",
                parts[0], parts[1], parts[2], parts[3]
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Parameter substitution / fast evaluation
// ---------------------------------------------------------------------------

/// An expression with every parameter substituted by its value, evaluated
/// without any lookup.
#[derive(Debug, Clone)]
pub struct Compiled {
    tree: Expr,
}

impl Compiled {
    /// Substitute parameter values into `ast`. Errors if a parameter in the
    /// tree has no binding.
    pub fn new(ast: &Expr, params: &HashMap<String, f64>) -> Result<Self, EvalError> {
        Ok(Compiled {
            tree: substitute(ast, params)?,
        })
    }

    pub fn eval(&self, y: f64) -> Result<f64, EvalError> {
        eval_closed(&self.tree, y)
    }

    /// Evaluation that maps domain errors to NaN, for hot numeric loops that
    /// check finiteness downstream.
    pub fn eval_f64(&self, y: f64) -> f64 {
        eval_closed(&self.tree, y).unwrap_or(f64::NAN)
    }

    pub fn tree(&self) -> &Expr {
        &self.tree
    }
}

fn substitute(ast: &Expr, params: &HashMap<String, f64>) -> Result<Expr, EvalError> {
    Ok(match ast {
        Expr::Const(c) => Expr::Const(*c),
        Expr::Var => Expr::Var,
        Expr::Param(name) => Expr::Const(
            *params
                .get(name)
                .ok_or_else(|| EvalError::UnboundParam(name.clone()))?,
        ),
        Expr::Unary(op, inner) => Expr::Unary(*op, Box::new(substitute(inner, params)?)),
        Expr::Binary(op, a, b) => Expr::Binary(
            *op,
            Box::new(substitute(a, params)?),
            Box::new(substitute(b, params)?),
        ),
        Expr::Pow(base, p) => Expr::Pow(Box::new(substitute(base, params)?), *p),
        Expr::IfLe(parts) => Expr::IfLe(Box::new([
            substitute(&parts[0], params)?,
            substitute(&parts[1], params)?,
            substitute(&parts[2], params)?,
            substitute(&parts[3], params)?,
        ])),
    })
}

fn eval_closed(ast: &Expr, y: f64) -> Result<f64, EvalError> {
    match ast {
        Expr::Const(c) => Ok(*c),
        Expr::Var => Ok(y),
        Expr::Param(name) => Err(EvalError::UnboundParam(name.clone())),
        Expr::Unary(op, inner) => {
            let v = eval_closed(inner, y)?;
            match op {
                UnaryOp::Neg => Ok(-v),
                UnaryOp::Exp => Ok(v.exp()),
                UnaryOp::Log => {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(EvalError::Domain { func: "log", arg: v })
                    }
                }
                UnaryOp::Sqrt => {
                    if v >= 0.0 {
                        Ok(v.sqrt())
                    } else {
                        Err(EvalError::Domain { func: "sqrt", arg: v })
                    }
                }
                UnaryOp::Abs => Ok(v.abs()),
                UnaryOp::Sin => Ok(v.sin()),
                UnaryOp::Cos => Ok(v.cos()),
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval_closed(a, y)?;
            let b = eval_closed(b, y)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivByZero)
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Min => Ok(a.min(b)),
                BinOp::Max => Ok(a.max(b)),
            }
        }
        Expr::Pow(base, p) => {
            let v = eval_closed(base, y)?;
            let r = v.powf(*p);
            if r.is_nan() && !v.is_nan() {
                Err(EvalError::Domain { func: "pow", arg: v })
            } else {
                Ok(r)
            }
        }
        Expr::IfLe(parts) => {
            let a = eval_closed(&parts[0], y)?;
            let b = eval_closed(&parts[1], y)?;
            if a <= b {
                eval_closed(&parts[2], y)
            } else {
                eval_closed(&parts[3], y)
            }
        }
    }
}
