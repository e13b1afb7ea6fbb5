//! Expression language for conformal factors and densities.
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Identifiers are `x1 .. xn` and `r` (the Euclidean norm). Functions:
//! `log exp sqrt atan pow min max cutoff`.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;

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
    Log,
    Exp,
    Sqrt,
    Atan,
    Pow,
    Min,
    Max,
    Cutoff,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "log" => Func::Log,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            "pow" => Func::Pow,
            "min" => Func::Min,
            "max" => Func::Max,
            "cutoff" => Func::Cutoff,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
            Func::Cutoff => "cutoff",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Log | Func::Exp | Func::Sqrt | Func::Atan => 1,
            Func::Pow | Func::Min | Func::Max => 2,
            Func::Cutoff => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Coordinate `x_{i+1}`.
    Var(usize),
    /// `r = sqrt(x1^2 + ... + xn^2)`.
    Norm,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// A parsed expression together with the ambient dimension it was parsed for.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpression {
    pub dim: usize,
    pub ast: Expr,
}

impl FieldExpression {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let v = eval(&self.ast, x)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite value {v}")));
        }
        Ok(v)
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Result<Jet> {
        let j = eval_jet(&self.ast, x)?;
        if !j.is_finite() {
            return Err(Error::Domain("non-finite Taylor coefficient".into()));
        }
        Ok(j)
    }

    /// True when the expression mentions no coordinate other than through `r`.
    pub fn uses_only_norm(&self) -> bool {
        fn walk(e: &Expr) -> bool {
            match e {
                Expr::Var(_) => false,
                Expr::Num(_) | Expr::Norm => true,
                Expr::Neg(a) => walk(a),
                Expr::Bin(_, a, b) => walk(a) && walk(b),
                Expr::Call(_, args) => args.iter().all(walk),
            }
        }
        walk(&self.ast)
    }
}

impl fmt::Display for FieldExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Norm => write!(f, "r"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), start));
            i += 1;
        } else {
            return Err(Error::Syntax {
                pos: start,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.src.len())
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Syntax {
                pos: self.here(),
                msg: format!("expected `{c}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let func = Func::from_name(&name).ok_or_else(|| Error::UnknownIdentifier {
                        name: name.clone(),
                        pos,
                    })?;
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(')') {
                                break;
                            }
                            self.expect(',')?;
                        }
                    }
                    if args.len() != func.arity() {
                        return Err(Error::Arity {
                            name,
                            expected: func.arity(),
                            got: args.len(),
                            pos,
                        });
                    }
                    return Ok(Expr::Call(func, args));
                }
                if name == "r" {
                    return Ok(Expr::Norm);
                }
                if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    if idx >= 1 && idx <= self.dim && !name[1..].starts_with('0') {
                        return Ok(Expr::Var(idx - 1));
                    }
                }
                Err(Error::UnknownIdentifier { name, pos })
            }
            Some(Tok::Sym(c)) => Err(Error::Syntax {
                pos,
                msg: format!("unexpected `{c}`"),
            }),
            None => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses `src` for ambient dimension `dim`.
pub fn parse_field(src: &str, dim: usize) -> Result<FieldExpression> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, dim, src };
    let ast = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Syntax {
            pos: p.here(),
            msg: "trailing input".into(),
        });
    }
    Ok(FieldExpression { dim, ast })
}

fn sigma(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step from 1 (r <= a) to 0 (r >= b).
pub fn cutoff(r: f64, a: f64, b: f64) -> Result<f64> {
    if !(b > a) {
        return Err(Error::Domain(format!("cutoff needs a < b, got a={a}, b={b}")));
    }
    let t = (r - a) / (b - a);
    let (s0, s1) = (sigma(t), sigma(1.0 - t));
    Ok(1.0 - s0 / (s0 + s1))
}

fn norm(x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
}

fn eval(e: &Expr, x: &[f64]) -> Result<f64> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Var(i) => x[*i],
        Expr::Norm => norm(x),
        Expr::Neg(a) => -eval(a, x)?,
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval(a, x)?, eval(b, x)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(Error::Domain("division by zero".into()));
                    }
                    a / b
                }
                BinOp::Pow => pow(a, b)?,
            }
        }
        Expr::Call(func, args) => {
            let v: Vec<f64> = args.iter().map(|a| eval(a, x)).collect::<Result<_>>()?;
            match func {
                Func::Log => {
                    if !(v[0] > 0.0) {
                        return Err(Error::Domain(format!("log of {}", v[0])));
                    }
                    v[0].ln()
                }
                Func::Exp => v[0].exp(),
                Func::Sqrt => {
                    if v[0] < 0.0 {
                        return Err(Error::Domain(format!("sqrt of {}", v[0])));
                    }
                    v[0].sqrt()
                }
                Func::Atan => v[0].atan(),
                Func::Pow => pow(v[0], v[1])?,
                Func::Min => v[0].min(v[1]),
                Func::Max => v[0].max(v[1]),
                Func::Cutoff => cutoff(v[0], v[1], v[2])?,
            }
        }
    })
}

fn pow(a: f64, b: f64) -> Result<f64> {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        if a == 0.0 && b < 0.0 {
            return Err(Error::Domain("zero to a negative power".into()));
        }
        return Ok(a.powi(b as i32));
    }
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        return Err(Error::Domain(format!("{a} ^ {b}")));
    }
    Ok(a.powf(b))
}

fn is_const(j: &Jet) -> bool {
    j.c.iter().skip(1).all(|v| *v == 0.0)
}

fn norm_jet(x: &[Jet]) -> Result<Jet> {
    let order = x[0].order();
    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.value().abs()));
    if m == 0.0 {
        // Expansion at the origin: the radius is the norm of the linear part.
        let mut s = Jet::constant(0.0, order);
        for xi in x {
            s = s.add(&xi.mul(xi));
        }
        return s.sqrt();
    }
    let mut s = Jet::constant(0.0, order);
    for xi in x {
        let y = xi.scale(1.0 / m);
        s = s.add(&y.mul(&y));
    }
    Ok(s.sqrt()?.scale(m))
}

fn sigma_jet(t: &Jet) -> Result<Jet> {
    if t.value() > 0.0 {
        let inv = Jet::constant(1.0, t.order()).div(t)?;
        Ok(inv.neg().exp())
    } else {
        Ok(Jet::constant(0.0, t.order()))
    }
}

fn eval_jet(e: &Expr, x: &[Jet]) -> Result<Jet> {
    let order = x[0].order();
    Ok(match e {
        Expr::Num(v) => Jet::constant(*v, order),
        Expr::Var(i) => x[*i].clone(),
        Expr::Norm => norm_jet(x)?,
        Expr::Neg(a) => eval_jet(a, x)?.neg(),
        Expr::Bin(op, a, b) => {
            let (a, b) = (eval_jet(a, x)?, eval_jet(b, x)?);
            match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.div(&b)?,
                BinOp::Pow => pow_jet(&a, &b)?,
            }
        }
        Expr::Call(func, args) => {
            let v: Vec<Jet> = args.iter().map(|a| eval_jet(a, x)).collect::<Result<_>>()?;
            match func {
                Func::Log => v[0].ln()?,
                Func::Exp => v[0].exp(),
                Func::Sqrt => v[0].sqrt()?,
                Func::Atan => v[0].atan(),
                Func::Pow => pow_jet(&v[0], &v[1])?,
                Func::Min => {
                    if v[1].value() < v[0].value() {
                        v[1].clone()
                    } else {
                        v[0].clone()
                    }
                }
                Func::Max => {
                    if v[1].value() > v[0].value() {
                        v[1].clone()
                    } else {
                        v[0].clone()
                    }
                }
                Func::Cutoff => {
                    let (a, b) = (v[1].value(), v[2].value());
                    if !is_const(&v[1]) || !is_const(&v[2]) || !(b > a) {
                        return Err(Error::Domain("cutoff bounds must be constants with a < b".into()));
                    }
                    let t = v[0].add_scalar(-a).scale(1.0 / (b - a));
                    let s0 = sigma_jet(&t)?;
                    let s1 = sigma_jet(&t.neg().add_scalar(1.0))?;
                    let step = s0.div(&s0.add(&s1))?;
                    step.neg().add_scalar(1.0)
                }
            }
        }
    })
}

fn pow_jet(a: &Jet, b: &Jet) -> Result<Jet> {
    if is_const(b) {
        let p = b.value();
        if a.value() == 0.0 && p < 0.0 {
            return Err(Error::Domain("zero to a negative power".into()));
        }
        return a.powf(p);
    }
    Ok(a.ln()?.mul(b).exp())
}
