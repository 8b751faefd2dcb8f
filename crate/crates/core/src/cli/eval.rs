//! Evaluation of the symbolic expression language.
//!
//! Bundles and characteristic classes are taken on an ambient space: the one
//! named by `integrate`, `pushforward` or `pullback`, otherwise the space most
//! recently bound with `name = ...`. Elements remember their space and are
//! reduced there before they are printed or compared.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Pow, ToPrimitive, Zero};

use super::expr::{parse_program, render, BinOp, Expr, ExprKind, ParseError, Pos, Statement};
use crate::algebra::{GradedElement, Rational, UnivariateSeries};
use crate::classes::{CharSeries, FormalBundle};
use crate::spaces::{
    normalized_hyperplane, point, projective_bundle, projective_space, universal_rank2_base, MapModel, SpaceModel,
};

#[derive(Clone, Debug)]
pub enum Value {
    Number(Rational),
    Space(Arc<SpaceModel>),
    Map(Arc<MapModel>),
    Bundle(FormalBundle, Arc<SpaceModel>),
    Element(GradedElement, Arc<SpaceModel>),
    List(Vec<Value>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Space(_) => "space",
            Value::Map(_) => "map",
            Value::Bundle(..) => "bundle",
            Value::Element(..) => "class",
            Value::List(_) => "list",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(r) => write!(f, "{r}"),
            Value::Space(s) => write!(f, "{}", s.name()),
            Value::Map(m) => write!(f, "{} -> {}", m.source().name(), m.target().name()),
            Value::Bundle(b, s) => {
                let c = s.reduce(b.total_chern()).unwrap_or_else(|_| b.total_chern().clone());
                write!(f, "bundle(rank {}, c = {c})", b.rank())
            }
            Value::Element(e, s) => write!(f, "{}", s.reduce(e).unwrap_or_else(|_| e.clone())),
            Value::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("at {pos}, in `{snippet}`: {message}")]
    Semantic { pos: Pos, snippet: String, message: String },
}

fn fail<T>(e: &Expr, message: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::Semantic { pos: e.pos, snippet: render(e), message: message.into() })
}

/// Variables plus per-space facts that the models do not carry themselves.
#[derive(Default)]
pub struct Session {
    vars: HashMap<String, Value>,
    ambient: Option<Arc<SpaceModel>>,
    /// `(space, O(1) class)` for projective spaces and bundles.
    hyperplanes: Vec<(Arc<SpaceModel>, GradedElement)>,
    /// `(P(F), p, F)` for projective bundles built in this session.
    projective: Vec<(Arc<SpaceModel>, Arc<MapModel>, FormalBundle)>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_ambient(&mut self, space: Arc<SpaceModel>) {
        self.ambient = Some(space);
    }

    pub fn bind(&mut self, name: &str, value: Value) {
        if let Value::Space(s) = &value {
            self.ambient = Some(s.clone());
        }
        self.vars.insert(name.to_string(), value);
    }

    /// Declares the `O(1)` class of a space built outside the session.
    pub fn register_hyperplane(&mut self, space: &Arc<SpaceModel>, class: GradedElement) {
        self.hyperplanes.push((space.clone(), class));
    }

    /// Runs a program and returns the value of its last statement.
    pub fn run(&mut self, text: &str) -> Result<Value, EvalError> {
        let mut last = None;
        for stmt in parse_program(text)? {
            match stmt {
                Statement::Assign { name, value, .. } => {
                    let v = self.eval(&value)?;
                    self.bind(&name, v.clone());
                    last = Some(v);
                }
                Statement::Expr(e) => last = Some(self.eval(&e)?),
            }
        }
        Ok(last.expect("programs are non-empty"))
    }

    /// Whether two values agree (elements after reduction on their space).
    pub fn values_equal(&self, a: &Value, b: &Value) -> bool {
        match (a, b) {
            (Value::Number(x), Value::Number(y)) => x == y,
            (Value::Element(x, s), Value::Number(y)) | (Value::Number(y), Value::Element(x, s)) => {
                s.reduce(x).is_ok_and(|r| r == x.ring().constant(y.clone()))
            }
            (Value::Element(x, s), Value::Element(y, _)) => s.equal(x, y).unwrap_or(false),
            (Value::List(x), Value::List(y)) => x.len() == y.len() && x.iter().zip(y).all(|(u, v)| self.values_equal(u, v)),
            _ => a.to_string() == b.to_string(),
        }
    }

    fn with_ambient<T>(&mut self, space: Arc<SpaceModel>, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = self.ambient.replace(space);
        let out = f(self);
        self.ambient = saved;
        out
    }

    fn ambient(&self, e: &Expr) -> Result<Arc<SpaceModel>, EvalError> {
        match &self.ambient {
            Some(s) => Ok(s.clone()),
            None => fail(e, "no ambient space; bind one first (e.g. X = P(2)) or use integrate(X, ...)"),
        }
    }

    fn hyperplane(&self, space: &Arc<SpaceModel>) -> Option<GradedElement> {
        self.hyperplanes.iter().find(|(s, _)| Arc::ptr_eq(s, space)).map(|(_, h)| h.clone())
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        match &e.kind {
            ExprKind::Number(r) => Ok(Value::Number(r.clone())),
            ExprKind::List(items) => Ok(Value::List(items.iter().map(|i| self.eval(i)).collect::<Result<_, _>>()?)),
            ExprKind::Neg(inner) => {
                let v = self.eval(inner)?;
                match v {
                    Value::Number(r) => Ok(Value::Number(-r)),
                    Value::Element(x, s) => Ok(Value::Element(-&x, s)),
                    other => fail(e, format!("cannot negate a {}", other.kind())),
                }
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                self.binary(e, *op, a, b)
            }
            ExprKind::Ident(name) => self.ident(e, name),
            ExprKind::Call(name, args) => self.call(e, name, args),
        }
    }

    fn ident(&mut self, e: &Expr, name: &str) -> Result<Value, EvalError> {
        if let Some(v) = self.vars.get(name) {
            return Ok(v.clone());
        }
        if let Some(space) = &self.ambient {
            if let Ok(g) = space.generator(name) {
                return Ok(Value::Element(g, space.clone()));
            }
        }
        match name {
            "point" => Ok(Value::Space(point())),
            "O" => {
                let s = self.ambient(e)?;
                Ok(Value::Bundle(FormalBundle::trivial(s.ring(), 1), s))
            }
            "T" => {
                let s = self.ambient(e)?;
                Ok(Value::Bundle(s.tangent().clone(), s))
            }
            "S" => {
                let s = self.ambient(e)?;
                match s.tautological() {
                    Some(b) => Ok(Value::Bundle(b.clone(), s.clone())),
                    None => fail(e, format!("{} carries no tautological bundle", s.name())),
                }
            }
            _ => fail(e, format!("unknown identifier '{name}'")),
        }
    }

    fn binary(&self, e: &Expr, op: BinOp, a: Value, b: Value) -> Result<Value, EvalError> {
        use Value::{Element, Number};
        match (op, a, b) {
            (BinOp::Pow, base, Number(n)) => {
                let Some(k) = n.is_integer().then(|| n.to_integer().to_i64()).flatten() else {
                    return fail(e, "exponent must be an integer");
                };
                match base {
                    Number(x) => {
                        if k < 0 && x.is_zero() {
                            return fail(e, "zero to a negative power");
                        }
                        let p = Pow::pow(&x, k.unsigned_abs() as u32);
                        Ok(Number(if k < 0 { Rational::one() / p } else { p }))
                    }
                    Element(x, s) if k >= 0 => Ok(Element(s.reduce(&x.pow(k as u32)).map_err(|err| sem(e, err))?, s)),
                    Element(x, s) => {
                        let inv = x.inverse().map_err(|err| sem(e, err))?;
                        Ok(Element(s.reduce(&inv.pow(k.unsigned_abs() as u32)).map_err(|err| sem(e, err))?, s))
                    }
                    other => fail(e, format!("cannot raise a {} to a power", other.kind())),
                }
            }
            (BinOp::Pow, _, other) => fail(e, format!("exponent must be an integer, got a {}", other.kind())),
            (op, Number(x), Number(y)) => Ok(Number(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y.is_zero() => return fail(e, "division by zero"),
                BinOp::Div => x / y,
                BinOp::Pow => unreachable!(),
            })),
            (BinOp::Div, Element(x, s), Number(y)) => {
                if y.is_zero() {
                    return fail(e, "division by zero");
                }
                Ok(Element(x.scale(&(Rational::one() / y)), s))
            }
            (BinOp::Div, _, _) => fail(e, "only division by a number is supported"),
            (op, Element(x, s), Number(y)) => Ok(Element(element_op(op, &x, &x.ring().constant(y)), s)),
            (op, Number(x), Element(y, s)) => Ok(Element(element_op(op, &y.ring().constant(x), &y), s)),
            (op, Element(x, s), Element(y, t)) => {
                if x.ring() != y.ring() {
                    return fail(e, format!("classes live on different spaces ({} and {})", s.name(), t.name()));
                }
                let v = element_op(op, &x, &y);
                Ok(Element(s.reduce(&v).map_err(|err| sem(e, err))?, s))
            }
            (_, a, b) => fail(e, format!("cannot combine a {} and a {}", a.kind(), b.kind())),
        }
    }

    fn arity(&self, e: &Expr, args: &[Expr], n: usize) -> Result<(), EvalError> {
        if args.len() != n {
            return fail(e, format!("expects {n} argument(s), got {}", args.len()));
        }
        Ok(())
    }

    fn space_arg(&mut self, a: &Expr) -> Result<Arc<SpaceModel>, EvalError> {
        match self.eval(a)? {
            Value::Space(s) => Ok(s),
            other => fail(a, format!("expected a space, got a {}", other.kind())),
        }
    }

    fn map_arg(&mut self, a: &Expr) -> Result<Arc<MapModel>, EvalError> {
        match self.eval(a)? {
            Value::Map(m) => Ok(m),
            other => fail(a, format!("expected a map, got a {}", other.kind())),
        }
    }

    fn bundle_arg(&mut self, a: &Expr) -> Result<(FormalBundle, Arc<SpaceModel>), EvalError> {
        match self.eval(a)? {
            Value::Bundle(b, s) => Ok((b, s)),
            other => fail(a, format!("expected a bundle, got a {}", other.kind())),
        }
    }

    fn element_arg(&mut self, a: &Expr) -> Result<(GradedElement, Arc<SpaceModel>), EvalError> {
        match self.eval(a)? {
            Value::Element(x, s) => Ok((x, s)),
            Value::Number(r) => {
                let s = self.ambient(a)?;
                Ok((s.ring().constant(r), s))
            }
            other => fail(a, format!("expected a class, got a {}", other.kind())),
        }
    }

    fn integer_arg(&mut self, a: &Expr) -> Result<i64, EvalError> {
        match self.eval(a)? {
            Value::Number(r) if r.is_integer() => match r.to_integer().to_i64() {
                Some(k) => Ok(k),
                None => fail(a, "integer out of range"),
            },
            other => fail(a, format!("expected an integer, got {other}")),
        }
    }

    fn series_arg(&mut self, a: &Expr) -> Result<UnivariateSeries, EvalError> {
        match self.eval(a)? {
            Value::List(items) => {
                let mut coeffs = Vec::with_capacity(items.len());
                for v in items {
                    match v {
                        Value::Number(r) => coeffs.push(r),
                        other => return fail(a, format!("series coefficients must be numbers, got a {}", other.kind())),
                    }
                }
                if coeffs.is_empty() {
                    return fail(a, "empty series literal");
                }
                Ok(UnivariateSeries::from_coeffs(coeffs))
            }
            other => fail(a, format!("expected a series literal [a0, a1, ...], got a {}", other.kind())),
        }
    }

    fn class_value(&self, e: &Expr, phi: &CharSeries, b: &FormalBundle, s: Arc<SpaceModel>) -> Result<Value, EvalError> {
        let v = phi.apply(b).map_err(|err| sem(e, err))?;
        Ok(Value::Element(s.reduce(&v).map_err(|err| sem(e, err))?, s))
    }

    fn call(&mut self, e: &Expr, name: &str, args: &[Expr]) -> Result<Value, EvalError> {
        match name {
            "point" => {
                self.arity(e, args, 0)?;
                Ok(Value::Space(point()))
            }
            "P" => {
                self.arity(e, args, 1)?;
                let n = self.integer_arg(&args[0])?;
                if !(0..=64).contains(&n) {
                    return fail(e, "P(n) needs 0 <= n <= 64");
                }
                let s = projective_space(n as u32);
                if n > 0 {
                    let h = s.ring().generator(0);
                    self.hyperplanes.push((s.clone(), h));
                }
                Ok(Value::Space(s))
            }
            "universal2" => {
                self.arity(e, args, 1)?;
                let d = self.integer_arg(&args[0])?;
                if !(1..=64).contains(&d) {
                    return fail(e, "universal2(D) needs 1 <= D <= 64");
                }
                Ok(Value::Space(universal_rank2_base(d as u32)))
            }
            "proj_bundle" => {
                self.arity(e, args, 2)?;
                let base = self.space_arg(&args[0])?;
                let (f, fs) = self.with_ambient(base.clone(), |s| s.bundle_arg(&args[1]))?;
                if fs.ring() != base.ring() {
                    return fail(&args[1], format!("bundle lives on {}, not on {}", fs.name(), base.name()));
                }
                let (x, p) = projective_bundle(&base, &f).map_err(|err| sem(e, err))?;
                let xi = x.ring().generator(base.ring().ngens());
                self.hyperplanes.push((x.clone(), xi));
                self.projective.push((x.clone(), p, f));
                Ok(Value::Space(x))
            }
            "proj" | "projection" => {
                self.arity(e, args, 1)?;
                let x = self.space_arg(&args[0])?;
                match self.projective.iter().find(|(s, _, _)| Arc::ptr_eq(s, &x)) {
                    Some((_, p, _)) => Ok(Value::Map(p.clone())),
                    None => fail(e, format!("{} is not a projective bundle built here", x.name())),
                }
            }
            "A" | "hyperplane" => {
                self.arity(e, args, 1)?;
                let x = self.space_arg(&args[0])?;
                let Some((_, p, f)) = self.projective.iter().find(|(s, _, _)| Arc::ptr_eq(s, &x)).cloned() else {
                    return fail(e, format!("{} is not a projective bundle built here", x.name()));
                };
                let a = normalized_hyperplane(&p, &f).map_err(|err| sem(e, err))?;
                Ok(Value::Element(a, x))
            }
            "to_point" => {
                self.arity(e, args, 1)?;
                let x = self.space_arg(&args[0])?;
                Ok(Value::Map(MapModel::to_point(&x).map_err(|err| sem(e, err))?))
            }
            "compose" => {
                self.arity(e, args, 2)?;
                let f = self.map_arg(&args[0])?;
                let g = self.map_arg(&args[1])?;
                Ok(Value::Map(f.then(&g).map_err(|err| sem(e, err))?))
            }
            "O" => {
                self.arity(e, args, 1)?;
                let k = self.integer_arg(&args[0])?;
                let s = self.ambient(e)?;
                if k == 0 {
                    return Ok(Value::Bundle(FormalBundle::trivial(s.ring(), 1), s));
                }
                match self.hyperplane(&s) {
                    Some(h) => Ok(Value::Bundle(FormalBundle::line(h.scale(&Rational::from_integer(k.into()))), s)),
                    None => fail(e, format!("{} has no O(1)", s.name())),
                }
            }
            "bundle" => {
                self.arity(e, args, 2)?;
                let rank = self.integer_arg(&args[0])?;
                let s = self.ambient(e)?;
                let classes = match self.eval(&args[1])? {
                    Value::List(items) => items,
                    other => return fail(&args[1], format!("expected a list of Chern classes, got a {}", other.kind())),
                };
                let mut cs = Vec::with_capacity(classes.len());
                for v in classes {
                    match v {
                        Value::Element(x, _) if x.ring() == s.ring() => cs.push(x),
                        Value::Number(r) => cs.push(s.ring().constant(r)),
                        other => return fail(&args[1], format!("Chern classes must be classes on {}, got {other}", s.name())),
                    }
                }
                let b = FormalBundle::from_classes(rank, &cs, s.ring()).map_err(|err| sem(e, err))?;
                Ok(Value::Bundle(b, s))
            }
            "T_rel" => {
                self.arity(e, args, 1)?;
                let f = self.map_arg(&args[0])?;
                Ok(Value::Bundle(f.relative_tangent().clone(), f.source().clone()))
            }
            "dual" => {
                self.arity(e, args, 1)?;
                let (b, s) = self.bundle_arg(&args[0])?;
                Ok(Value::Bundle(b.dual(), s))
            }
            "sum" | "difference" => {
                self.arity(e, args, 2)?;
                let (a, s) = self.bundle_arg(&args[0])?;
                let (b, t) = self.bundle_arg(&args[1])?;
                if a.ring() != b.ring() {
                    return fail(e, format!("bundles live on different spaces ({} and {})", s.name(), t.name()));
                }
                let v = if name == "sum" { a.sum(&b) } else { a.difference(&b) }.map_err(|err| sem(e, err))?;
                Ok(Value::Bundle(v, s))
            }
            "twist" => {
                self.arity(e, args, 2)?;
                let (b, s) = self.bundle_arg(&args[0])?;
                let ell = match self.with_ambient(s.clone(), |ss| ss.eval(&args[1]))? {
                    Value::Number(k) => match self.hyperplane(&s) {
                        Some(h) => h.scale(&k),
                        None => return fail(e, format!("{} has no O(1)", s.name())),
                    },
                    Value::Element(x, _) => x,
                    Value::Bundle(l, _) if l.rank() == 1 => l.chern_class(1),
                    other => return fail(&args[1], format!("expected a line bundle, a degree or a class, got {other}")),
                };
                if ell.ring() != s.ring() {
                    return fail(&args[1], "twisting class lives on another space");
                }
                Ok(Value::Bundle(b.twist_by_line(&ell).map_err(|err| sem(e, err))?, s))
            }
            "ch" | "td" => {
                self.arity(e, args, 1)?;
                let (b, s) = self.bundle_arg(&args[0])?;
                let phi = if name == "ch" { CharSeries::ChernCharacter } else { CharSeries::Todd };
                self.class_value(e, &phi, &b, s)
            }
            "additive" | "multiplicative" => {
                self.arity(e, args, 2)?;
                let series = self.series_arg(&args[0])?;
                let (b, s) = self.bundle_arg(&args[1])?;
                let phi = if name == "additive" {
                    CharSeries::additive(series)
                } else {
                    CharSeries::multiplicative(series)
                }
                .map_err(|err| sem(e, err))?;
                self.class_value(e, &phi, &b, s)
            }
            "c" => {
                let (k, b, s) = match args.len() {
                    1 => {
                        let (b, s) = self.bundle_arg(&args[0])?;
                        (None, b, s)
                    }
                    2 => {
                        let k = self.integer_arg(&args[0])?;
                        let (b, s) = self.bundle_arg(&args[1])?;
                        (Some(k), b, s)
                    }
                    _ => return fail(e, "expects c(bundle) or c(i, bundle)"),
                };
                let v = match k {
                    None => b.total_chern().clone(),
                    Some(k) if k < 0 => return fail(e, "negative Chern class index"),
                    Some(k) => b.chern_class(k as u32),
                };
                Ok(Value::Element(s.reduce(&v).map_err(|err| sem(e, err))?, s))
            }
            "rank" => {
                self.arity(e, args, 1)?;
                let (b, _) = self.bundle_arg(&args[0])?;
                Ok(Value::Number(Rational::from_integer(b.rank().into())))
            }
            "grade" => {
                self.arity(e, args, 2)?;
                let (x, s) = self.element_arg(&args[0])?;
                let k = self.integer_arg(&args[1])?;
                if k < 0 {
                    return fail(e, "negative grade");
                }
                let x = s.reduce(&x).map_err(|err| sem(e, err))?;
                Ok(Value::Element(x.grade_part(k as u32), s))
            }
            "integrate" => {
                let (space, body) = match args.len() {
                    1 => (self.ambient(e)?, &args[0]),
                    2 => (self.space_arg(&args[0])?, &args[1]),
                    _ => return fail(e, "expects integrate(X, class) or integrate(class)"),
                };
                let (x, _) = self.with_ambient(space.clone(), |s| s.element_arg(body))?;
                if x.ring() != space.ring() {
                    return fail(body, format!("class does not live on {}", space.name()));
                }
                Ok(Value::Number(space.integrate(&x).map_err(|err| sem(e, err))?))
            }
            "pushforward" => {
                self.arity(e, args, 2)?;
                let f = self.map_arg(&args[0])?;
                let (x, _) = self.with_ambient(f.source().clone(), |s| s.element_arg(&args[1]))?;
                if x.ring() != f.source().ring() {
                    return fail(&args[1], format!("class does not live on {}", f.source().name()));
                }
                let y = f.pushforward(&x).map_err(|err| sem(e, err))?;
                let target = f.target().clone();
                if target.ring().ngens() == 0 {
                    return Ok(Value::Number(y.constant_term()));
                }
                Ok(Value::Element(target.reduce(&y).map_err(|err| sem(e, err))?, target))
            }
            "pullback" => {
                self.arity(e, args, 2)?;
                let f = self.map_arg(&args[0])?;
                let v = self.with_ambient(f.target().clone(), |s| s.eval(&args[1]))?;
                let src = f.source().clone();
                match v {
                    Value::Element(x, _) => Ok(Value::Element(f.pullback(&x).map_err(|err| sem(e, err))?, src)),
                    Value::Number(r) => Ok(Value::Element(src.ring().constant(r), src)),
                    Value::Bundle(b, _) => Ok(Value::Bundle(f.pullback_bundle(&b).map_err(|err| sem(e, err))?, src)),
                    other => fail(&args[1], format!("cannot pull back a {}", other.kind())),
                }
            }
            "on" => {
                self.arity(e, args, 2)?;
                let space = self.space_arg(&args[0])?;
                self.with_ambient(space, |s| s.eval(&args[1]))
            }
            _ => fail(e, format!("unknown function '{name}'")),
        }
    }
}

fn element_op(op: BinOp, x: &GradedElement, y: &GradedElement) -> GradedElement {
    match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Div | BinOp::Pow => unreachable!("handled by the caller"),
    }
}

fn sem(e: &Expr, err: impl fmt::Display) -> EvalError {
    EvalError::Semantic { pos: e.pos, snippet: render(e), message: err.to_string() }
}

/// Evaluates a program in a fresh session.
pub fn eval_str(text: &str) -> Result<Value, EvalError> {
    Session::new().run(text)
}
