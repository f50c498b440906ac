//! Tiny symbolic expression language for scalar potentials: variables
//! t1..tN, arithmetic, powers, sin and cos. Supports exact symbolic
//! differentiation so Jacobians downstream are analytic, not sampled.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("expression is not differentiable: {0}")]
    NonDifferentiableExpression(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 0-based variable index; tK parses to Var(K-1)
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => a.eval(vars).powf(b.eval(vars)),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Partial derivative with respect to variable `var`. Powers require
    /// a constant exponent; everything else in the grammar is smooth.
    pub fn differentiate(&self, var: usize) -> Result<Expr, ExprError> {
        use Expr::*;
        let d = |e: &Expr| e.differentiate(var);
        let r = match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == var { 1.0 } else { 0.0 }),
            Add(a, b) => Add(Box::new(d(a)?), Box::new(d(b)?)),
            Sub(a, b) => Sub(Box::new(d(a)?), Box::new(d(b)?)),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(d(a)?), b.clone())),
                Box::new(Mul(a.clone(), Box::new(d(b)?))),
            ),
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(d(a)?), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(d(b)?))),
                )),
                Box::new(Mul(b.clone(), b.clone())),
            ),
            Pow(base, exp) => {
                let e = exp.simplified();
                let Some(c) = e.as_const() else {
                    return Err(ExprError::NonDifferentiableExpression(
                        "power with non-constant exponent".into(),
                    ));
                };
                // d(base^c) = c * base^(c-1) * base'
                Mul(
                    Box::new(Mul(
                        Box::new(Const(c)),
                        Box::new(Pow(base.clone(), Box::new(Const(c - 1.0)))),
                    )),
                    Box::new(d(base)?),
                )
            }
            Neg(a) => Neg(Box::new(d(a)?)),
            Sin(a) => Mul(Box::new(Cos(a.clone())), Box::new(d(a)?)),
            Cos(a) => Neg(Box::new(Mul(Box::new(Sin(a.clone())), Box::new(d(a)?)))),
        };
        Ok(r.simplified())
    }

    /// Constant folding plus identity cleanup; keeps derivative trees
    /// from ballooning.
    // Guards like `if z == 0.0` stay: several arms need them for
    // or-patterns, and float-literal patterns would mix two styles here.
    #[allow(clippy::redundant_guards)]
    pub fn simplified(&self) -> Expr {
        use Expr::*;
        let bin = |a: &Expr, b: &Expr| (a.simplified(), b.simplified());
        match self {
            Const(c) => Const(*c),
            Var(i) => Var(*i),
            Add(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x + y),
                (Const(z), e) | (e, Const(z)) if z == 0.0 => e,
                (x, y) => Add(Box::new(x), Box::new(y)),
            },
            Sub(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x - y),
                (e, Const(z)) if z == 0.0 => e,
                (Const(z), e) if z == 0.0 => Neg(Box::new(e)).simplified(),
                (x, y) => Sub(Box::new(x), Box::new(y)),
            },
            Mul(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x * y),
                (Const(z), _) | (_, Const(z)) if z == 0.0 => Const(0.0),
                (Const(o), e) | (e, Const(o)) if o == 1.0 => e,
                (x, y) => Mul(Box::new(x), Box::new(y)),
            },
            Div(a, b) => match bin(a, b) {
                (Const(x), Const(y)) if y != 0.0 => Const(x / y),
                (e, Const(o)) if o == 1.0 => e,
                (Const(z), e) if z == 0.0 => {
                    // keep 0/e as 0 only when e is non-constant; constants
                    // were handled above and 0/0 stays symbolic
                    match e {
                        Const(_) => Div(Box::new(Const(0.0)), Box::new(e)),
                        _ => Const(0.0),
                    }
                }
                (x, y) => Div(Box::new(x), Box::new(y)),
            },
            Pow(a, b) => match bin(a, b) {
                (Const(x), Const(y)) => Const(x.powf(y)),
                (e, Const(o)) if o == 1.0 => e,
                (_, Const(z)) if z == 0.0 => Const(1.0),
                (x, y) => Pow(Box::new(x), Box::new(y)),
            },
            Neg(a) => match a.simplified() {
                Const(c) => Const(-c),
                Neg(inner) => *inner,
                e => Neg(Box::new(e)),
            },
            Sin(a) => match a.simplified() {
                Const(c) => Const(c.sin()),
                e => Sin(Box::new(e)),
            },
            Cos(a) => match a.simplified() {
                Const(c) => Const(c.cos()),
                e => Cos(Box::new(e)),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n_vars: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // right-associative, unary minus allowed in the exponent
            let exp = if self.peek() == Some(b'-') {
                self.pos += 1;
                Expr::Neg(Box::new(self.power()?))
            } else {
                self.power()?
            };
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => self.err(format!("unexpected character {:?}", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Const(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("bad number literal {text:?}"))
            }
        }
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        match name.as_str() {
            "sin" | "cos" => {
                if self.peek() != Some(b'(') {
                    return self.err(format!("{name} needs parenthesized argument"));
                }
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(if name == "sin" {
                    Expr::Sin(Box::new(inner))
                } else {
                    Expr::Cos(Box::new(inner))
                })
            }
            _ => {
                if let Some(rest) = name.strip_prefix('t') {
                    if let Ok(k) = rest.parse::<usize>() {
                        if k >= 1 && k <= self.n_vars {
                            return Ok(Expr::Var(k - 1));
                        }
                        return Err(ExprError::UnknownIdentifier(name));
                    }
                }
                Err(ExprError::UnknownIdentifier(name))
            }
        }
    }
}

/// Parse an expression over variables t1..t[n_vars].
pub fn parse_expr(src: &str, n_vars: usize) -> Result<Expr, ExprError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, n_vars };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vars: &[f64]) -> f64 {
        parse_expr(src, vars.len()).unwrap().eval(vars)
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[]), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[]), -4.0);
        assert_eq!(ev("6 / 3 / 2", &[]), 1.0);
        assert_eq!(ev("t1 - t2 - 1", &[10.0, 3.0]), 6.0);
    }

    #[test]
    fn functions_and_vars() {
        let x = 0.7;
        assert!((ev("sin(t1)", &[x]) - x.sin()).abs() < 1e-15);
        assert!((ev("cos(t1 + t2)", &[x, 0.1]) - (x + 0.1).cos()).abs() < 1e-15);
        assert_eq!(ev("t1^2 * t2^2 / 2", &[1.0, 2.0]), 2.0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_expr("1 +", 0), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_expr("(1", 0), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_expr("1 2", 0), Err(ExprError::Parse { .. })));
        assert_eq!(parse_expr("t3", 2), Err(ExprError::UnknownIdentifier("t3".into())));
        assert_eq!(parse_expr("foo", 2), Err(ExprError::UnknownIdentifier("foo".into())));
        assert!(matches!(parse_expr("sin t1", 1), Err(ExprError::Parse { .. })));
    }

    #[test]
    fn differentiation_matches_finite_differences() {
        let cases = [
            ("t1^2 * t2^2 / 2", 2),
            ("sin(t1) * cos(t2) + t1 / (1 + t2^2)", 2),
            ("(t1 - t2)^3 - 2 * t1", 2),
            ("cos(t1)^2 + sin(t1)^2", 1),
        ];
        for (src, nv) in cases {
            let e = parse_expr(src, nv).unwrap();
            for var in 0..nv {
                let d = e.differentiate(var).unwrap();
                let x: Vec<f64> = (0..nv).map(|i| 0.3 + 0.4 * i as f64).collect();
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[var] += h;
                xm[var] -= h;
                let fd = (e.eval(&xp) - e.eval(&xm)) / (2.0 * h);
                let an = d.eval(&x);
                assert!((fd - an).abs() < 1e-8, "{src} d/dt{} fd={fd} an={an}", var + 1);
            }
        }
    }

    #[test]
    fn nonconstant_exponent_not_differentiable() {
        let e = parse_expr("t1 ^ t2", 2).unwrap();
        assert!(matches!(e.differentiate(0), Err(ExprError::NonDifferentiableExpression(_))));
        // constant-folded exponents are fine
        let e2 = parse_expr("t1 ^ (1 + 1)", 1).unwrap();
        assert!(e2.differentiate(0).is_ok());
    }

    #[test]
    fn simplify_folds_constants() {
        let e = parse_expr("0 * t1 + t2 * 1 + (2 + 3)", 2).unwrap();
        assert_eq!(e.simplified(), parse_expr("t2 + 5", 2).unwrap().simplified());
    }
}
