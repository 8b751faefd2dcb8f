//! Complex-valued functions of `z` written in the expression language:
//! `z`, `conj(z)`, `abs2(z)`, `re`, `im`, `exp`, `log`, `sqrt`, the
//! constants `i` and `pi`, rational literals and `+ - * / ^`.

use std::sync::Arc;

use num_traits::ToPrimitive;

use super::expr::{parse_expr, render, BinOp, Expr, ExprKind};
use super::eval::EvalError;
use crate::numeric::C64;

/// A checked expression, cheap to clone and share across threads.
#[derive(Clone, Debug)]
pub struct ZFunction {
    expr: Arc<Expr>,
    source: String,
}

const UNARY: [&str; 7] = ["conj", "abs2", "re", "im", "exp", "log", "sqrt"];

fn check(e: &Expr) -> Result<(), EvalError> {
    let bad = |message: String| Err(EvalError::Semantic { pos: e.pos, snippet: render(e), message });
    match &e.kind {
        ExprKind::Number(_) => Ok(()),
        ExprKind::Ident(name) => match name.as_str() {
            "z" | "i" | "pi" => Ok(()),
            _ => bad(format!("unknown identifier '{name}' (metric expressions use z, i, pi)")),
        },
        ExprKind::Neg(inner) => check(inner),
        ExprKind::Binary(_, l, r) => {
            check(l)?;
            check(r)
        }
        ExprKind::Call(name, args) => {
            if !UNARY.contains(&name.as_str()) {
                return bad(format!("unknown function '{name}'"));
            }
            if args.len() != 1 {
                return bad(format!("{name} takes one argument"));
            }
            check(&args[0])
        }
        ExprKind::List(_) => bad("lists are not allowed in metric expressions".into()),
    }
}

fn eval(e: &Expr, z: C64) -> C64 {
    match &e.kind {
        ExprKind::Number(r) => C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0),
        ExprKind::Ident(name) => match name.as_str() {
            "z" => z,
            "i" => C64::new(0.0, 1.0),
            _ => C64::new(std::f64::consts::PI, 0.0),
        },
        ExprKind::Neg(inner) => -eval(inner, z),
        ExprKind::Binary(op, l, r) => {
            let a = eval(l, z);
            let b = eval(r, z);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => {
                    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() < 1e9 {
                        a.powi(b.re as i32)
                    } else {
                        a.powc(b)
                    }
                }
            }
        }
        ExprKind::Call(name, args) => {
            let a = eval(&args[0], z);
            match name.as_str() {
                "conj" => a.conj(),
                "abs2" => C64::new(a.norm_sqr(), 0.0),
                "re" => C64::new(a.re, 0.0),
                "im" => C64::new(a.im, 0.0),
                "exp" => a.exp(),
                "log" => a.ln(),
                _ => a.sqrt(),
            }
        }
        ExprKind::List(_) => C64::new(f64::NAN, f64::NAN),
    }
}

impl ZFunction {
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let e = parse_expr(text)?;
        check(&e)?;
        Ok(Self { expr: Arc::new(e), source: text.to_string() })
    }

    pub fn eval(&self, z: C64) -> C64 {
        eval(&self.expr, z)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates() {
        let f = ZFunction::parse("1/(1 + abs2(z))^2").unwrap();
        assert!((f.eval(C64::new(1.0, 1.0)).re - 1.0 / 9.0).abs() < 1e-15);
        let g = ZFunction::parse("z*conj(z) - abs2(z) + exp(log(2)) + re(i*z) + im(z)").unwrap();
        let v = g.eval(C64::new(0.3, 0.7));
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-14, "{v}");
        assert!((ZFunction::parse("sqrt(4)*pi").unwrap().eval(C64::new(0.0, 0.0)).re - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(ZFunction::parse("y + 1").is_err());
        assert!(ZFunction::parse("sin(z)").is_err());
        assert!(ZFunction::parse("exp(z, z)").is_err());
        assert!(ZFunction::parse("[z]").is_err());
        assert!(matches!(ZFunction::parse("exp(").unwrap_err(), EvalError::Parse(_)));
    }
}
