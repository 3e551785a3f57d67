//! Boundary-function expressions: parsing, printing and pointwise evaluation.
//!
//! The grammar covers what thin-domain boundary profiles need: the variable
//! `x`, decimal literals, `pi`, the operators `+ - * / ^` (with `^`
//! right-associative and binding tightest), unary minus, and the functions
//! `sqrt, sin, cos, exp, log, abs, pow`. Derivative extraction lives in
//! [`crate::jet`]; this module only evaluates values.

use crate::num::Real;
use thiserror::Error;

/// Binary operators in order of increasing precedence class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Unary builtin functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
}

/// Named constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
}

/// Expression tree over the single variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var,
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("derivative order {requested} exceeds cap {cap}")]
    OrderCap { requested: usize, cap: usize },
}

/// Parse a boundary-function expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src);
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Expr::Binary(BinaryOp::Add, Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Expr::Binary(BinaryOp::Sub, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Expr::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Expr::Binary(BinaryOp::Div, Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right-associative; the exponent may carry a sign
            let exp = self.unary()?;
            Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.err("expected a number, identifier or `(`")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_digit() || *b == b'.')
        {
            self.pos += 1;
        }
        // optional exponent
        if self.bytes.get(self.pos).is_some_and(|b| matches!(b, b'e' | b'E')) {
            let mut probe = self.pos + 1;
            if self.bytes.get(probe).is_some_and(|b| matches!(b, b'+' | b'-')) {
                probe += 1;
            }
            if self.bytes.get(probe).is_some_and(|b| b.is_ascii_digit()) {
                self.pos = probe;
                while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Number).map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("invalid number literal `{text}`"),
        })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match name {
            "x" => Ok(Expr::Var),
            "pi" => Ok(Expr::Const(Constant::Pi)),
            "pow" => {
                if !self.eat(b'(') {
                    return Err(self.err("expected `(` after `pow`"));
                }
                let a = self.expr()?;
                if !self.eat(b',') {
                    return Err(self.err("expected `,` between pow arguments"));
                }
                let b = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(Expr::Binary(BinaryOp::Pow, Box::new(a), Box::new(b)))
            }
            "sqrt" | "sin" | "cos" | "exp" | "log" | "abs" => {
                let f = match name {
                    "sqrt" => Function::Sqrt,
                    "sin" => Function::Sin,
                    "cos" => Function::Cos,
                    "exp" => Function::Exp,
                    "log" => Function::Log,
                    _ => Function::Abs,
                };
                if !self.eat(b'(') {
                    return Err(self.err(&format!("expected `(` after `{name}`")));
                }
                let a = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(Expr::Call(f, Box::new(a)))
            }
            _ => Err(ParseError::UnknownIdentifier {
                offset: start,
                name: name.to_string(),
            }),
        }
    }
}

// precedence classes for printing: + - < * / < unary - < ^ < atom
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Binary(BinaryOp::Pow, ..) => 4,
        _ => 5,
    }
}

impl std::fmt::Display for Expr {
    /// Prints with the minimal parentheses that keep `parse(print(e))`
    /// structurally identical to `e` (for parser-reachable trees).
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn paren(f: &mut std::fmt::Formatter<'_>, e: &Expr, need: bool) -> std::fmt::Result {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "x"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                paren(f, a, prec(a) < 3)
            }
            Expr::Binary(op, a, b) => {
                let (sym, p) = match op {
                    BinaryOp::Add => ("+", 1),
                    BinaryOp::Sub => ("-", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                    BinaryOp::Pow => ("^", 4),
                };
                if *op == BinaryOp::Pow {
                    // right-associative
                    paren(f, a, prec(a) <= p)?;
                    write!(f, "{sym}")?;
                    paren(f, b, prec(b) < p)
                } else {
                    paren(f, a, prec(a) < p)?;
                    write!(f, "{sym}")?;
                    paren(f, b, prec(b) <= p)
                }
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Function::Sqrt => "sqrt",
                    Function::Sin => "sin",
                    Function::Cos => "cos",
                    Function::Exp => "exp",
                    Function::Log => "log",
                    Function::Abs => "abs",
                };
                write!(f, "{name}({a})")
            }
        }
    }
}

impl Expr {
    /// Evaluate at a point. Fails on genuine domain violations (square root
    /// of a negative, log of a non-positive, division by zero) and on
    /// non-finite intermediate results.
    pub fn eval<F: Real>(&self, x: F) -> Result<F, EvalError> {
        let v = self.eval_inner(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain("non-finite result".into()))
        }
    }

    fn eval_inner<F: Real>(&self, x: F) -> Result<F, EvalError> {
        Ok(match self {
            Expr::Number(v) => F::lit(*v),
            Expr::Var => x,
            Expr::Const(Constant::Pi) => F::PI(),
            Expr::Neg(a) => -a.eval_inner(x)?,
            Expr::Binary(op, a, b) => {
                let av = a.eval_inner(x)?;
                let bv = b.eval_inner(x)?;
                match op {
                    BinaryOp::Add => av + bv,
                    BinaryOp::Sub => av - bv,
                    BinaryOp::Mul => av * bv,
                    BinaryOp::Div => {
                        if bv == F::zero() {
                            return Err(EvalError::Domain("division by zero".into()));
                        }
                        av / bv
                    }
                    BinaryOp::Pow => {
                        let v = av.powf(bv);
                        if v.is_nan() {
                            return Err(EvalError::Domain(
                                "fractional power of a negative base".into(),
                            ));
                        }
                        v
                    }
                }
            }
            Expr::Call(func, a) => {
                let av = a.eval_inner(x)?;
                match func {
                    Function::Sqrt => {
                        if av < F::zero() {
                            return Err(EvalError::Domain("sqrt of a negative value".into()));
                        }
                        av.sqrt()
                    }
                    Function::Sin => av.sin(),
                    Function::Cos => av.cos(),
                    Function::Exp => av.exp(),
                    Function::Log => {
                        if av <= F::zero() {
                            return Err(EvalError::Domain("log of a non-positive value".into()));
                        }
                        av.ln()
                    }
                    Function::Abs => av.abs(),
                }
            }
        })
    }

    /// Replace every occurrence of the variable by `replacement`.
    /// Used to reparametrize profiles, e.g. substituting `x + c`.
    pub fn substitute_var(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Var => replacement.clone(),
            Expr::Number(_) | Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute_var(replacement))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute_var(replacement)),
                Box::new(b.substitute_var(replacement)),
            ),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute_var(replacement))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates_disk_profile() {
        let e = parse("2*sqrt(x - x^2)").unwrap();
        let v: f64 = e.eval(0.5).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parses_oscillatory_profile() {
        let e = parse("1 + sin(7*pi*x/2) + 7*pi*(1-x)/4").unwrap();
        let v: f64 = e.eval(2.0 / 21.0).unwrap();
        let expect = 1.0 + (7.0 * std::f64::consts::PI / 21.0).sin()
            + 7.0 * std::f64::consts::PI * (1.0 - 2.0 / 21.0) / 4.0;
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn reports_syntax_error_offset() {
        let err = parse("2*sqrt(x -").unwrap_err();
        assert_eq!(err.offset(), 10);
        match err {
            ParseError::Syntax { .. } => {}
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reports_unknown_identifier() {
        let err = parse("2*foo(x)").unwrap_err();
        match err {
            ParseError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "foo");
                assert_eq!(offset, 2);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn precedence_matches_convention() {
        let e = parse("2+3*4^2").unwrap();
        assert_eq!(e.eval(0.0f64).unwrap(), 50.0);
        // ^ is right-associative
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0f64).unwrap(), 512.0);
        let e = parse("-x^2").unwrap();
        assert_eq!(e.eval(3.0f64).unwrap(), -9.0);
        let e = parse("2^-2").unwrap();
        assert_eq!(e.eval(0.0f64).unwrap(), 0.25);
    }

    #[test]
    fn pow_function_form() {
        let e = parse("pow(x, 3)").unwrap();
        assert_eq!(e.eval(2.0f64).unwrap(), 8.0);
    }

    #[test]
    fn sqrt_of_negative_is_domain_error() {
        let e = parse("sqrt(x)").unwrap();
        assert!(matches!(e.eval(-1.0f64), Err(EvalError::Domain(_))));
        // boundary value 0 is fine for plain evaluation
        assert_eq!(e.eval(0.0f64).unwrap(), 0.0);
    }

    #[test]
    fn substitute_shifts_argument() {
        let e = parse("sin(x)").unwrap();
        let shifted = e.substitute_var(&parse("x + 1").unwrap());
        let a: f64 = shifted.eval(0.25).unwrap();
        assert!((a - 1.25f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn display_roundtrips_structurally() {
        for src in [
            "2*sqrt(x - x^2)",
            "1 + sin(7*pi*x/2) + 7*pi*(1-x)/4",
            "-(x+1)*x^-2",
            "x/(1-x)/2",
            "pow(x, 2) ^ (x - 3)",
            "abs(-x) + exp(log(x))",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            assert_eq!(e, reparsed, "round-trip failed for `{src}` -> `{printed}`");
        }
    }
}
