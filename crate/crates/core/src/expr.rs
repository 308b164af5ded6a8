//! Expression trees over `{const, var, +, -, *, pow, sin, cos, exp}` plus
//! composition, and vector-valued smooth maps built from them.
//!
//! Expressions evaluate either to plain numbers or to [`TruncatedSeries`],
//! which is how every derivative in this crate is produced. The JSON form
//! accepted by the CLI is:
//!
//! ```text
//! {"const": 2.5}
//! {"var": 1}                                 1-based coordinate
//! {"op": "add",  "args": [e, ...]}
//! {"op": "sub",  "args": [a, b]}
//! {"op": "neg",  "arg": e}
//! {"op": "mul",  "args": [e, ...]}
//! {"op": "pow",  "base": e, "exp": 3}        non-negative integer exponent
//! {"op": "sin",  "arg": e}   (likewise cos, exp)
//! {"op": "compose", "outer": e, "args": [e1, ..., ep]}
//! ```
//!
//! `compose` substitutes `args[i]` for variable `i + 1` of `outer`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::series::{seeds, TruncatedSeries};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Compose { outer: Box<Expr>, args: Vec<Expr> },
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    /// The 1-based coordinate `x^j`.
    pub fn var(j: usize) -> Self {
        assert!(j >= 1, "variables are 1-based");
        Expr::Var(j)
    }

    pub fn pow(self, exp: u32) -> Self {
        Expr::Pow(Box::new(self), exp)
    }

    pub fn scaled(self, c: f64) -> Self {
        Expr::Mul(vec![Expr::Const(c), self])
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    /// The monomial with the exponents of `idx`.
    pub fn monomial(idx: &crate::multiindex::MultiIndex) -> Self {
        let factors: Vec<Expr> = idx
            .counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| Expr::var(i + 1).pow(c))
            .collect();
        match factors.len() {
            0 => Expr::Const(1.0),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::Mul(factors),
        }
    }

    /// Largest variable number referenced; 0 for constant expressions.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(j) => *j,
            Expr::Add(args) | Expr::Mul(args) => args.iter().map(Expr::max_var).max().unwrap_or(0),
            Expr::Sub(a, b) => a.max_var().max(b.max_var()),
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.max_var(),
            Expr::Pow(a, _) => a.max_var(),
            // Composition rebinds the outer variables.
            Expr::Compose { args, .. } => args.iter().map(Expr::max_var).max().unwrap_or(0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(j) => {
                if *j < 1 || *j > x.len() {
                    return Err(Error::IndexOutOfRange { index: *j, n: x.len() });
                }
                x[*j - 1]
            }
            Expr::Add(args) => {
                let mut acc = 0.0;
                for a in args {
                    acc += a.eval(x)?;
                }
                acc
            }
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Mul(args) => {
                let mut acc = 1.0;
                for a in args {
                    acc *= a.eval(x)?;
                }
                acc
            }
            Expr::Pow(a, e) => a.eval(x)?.powi(*e as i32),
            Expr::Sin(a) => a.eval(x)?.sin(),
            Expr::Cos(a) => a.eval(x)?.cos(),
            Expr::Exp(a) => a.eval(x)?.exp(),
            Expr::Compose { outer, args } => {
                let inner: Vec<f64> = args.iter().map(|a| a.eval(x)).collect::<Result<_>>()?;
                outer.eval(&inner)?
            }
        })
    }

    pub fn eval_series(&self, inputs: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        if inputs.is_empty() {
            return Err(Error::Eval("no input series".to_string()));
        }
        let n = inputs[0].n();
        let order = inputs[0].order();
        Ok(match self {
            Expr::Const(c) => TruncatedSeries::constant(n, order, *c),
            Expr::Var(j) => {
                if *j < 1 || *j > inputs.len() {
                    return Err(Error::IndexOutOfRange { index: *j, n: inputs.len() });
                }
                inputs[*j - 1].clone()
            }
            Expr::Add(args) => {
                let mut acc = TruncatedSeries::zero(n, order);
                for a in args {
                    acc = acc.add(&a.eval_series(inputs)?)?;
                }
                acc
            }
            Expr::Sub(a, b) => a.eval_series(inputs)?.sub(&b.eval_series(inputs)?)?,
            Expr::Neg(a) => a.eval_series(inputs)?.neg(),
            Expr::Mul(args) => {
                let mut acc = TruncatedSeries::constant(n, order, 1.0);
                for a in args {
                    acc = acc.mul(&a.eval_series(inputs)?)?;
                }
                acc
            }
            Expr::Pow(a, e) => a.eval_series(inputs)?.powi(*e)?,
            Expr::Sin(a) => a.eval_series(inputs)?.sin()?,
            Expr::Cos(a) => a.eval_series(inputs)?.cos()?,
            Expr::Exp(a) => a.eval_series(inputs)?.exp()?,
            Expr::Compose { outer, args } => {
                let inner: Vec<TruncatedSeries> = args
                    .iter()
                    .map(|a| a.eval_series(inputs))
                    .collect::<Result<_>>()?;
                outer.eval_series(&inner)?
            }
        })
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Add(mut a), Expr::Add(b)) => {
                a.extend(b);
                Expr::Add(a)
            }
            (Expr::Add(mut a), b) => {
                a.push(b);
                Expr::Add(a)
            }
            (a, b) => Expr::Add(vec![a, b]),
        }
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Mul(mut a), Expr::Mul(b)) => {
                a.extend(b);
                Expr::Mul(a)
            }
            (Expr::Mul(mut a), b) => {
                a.push(b);
                Expr::Mul(a)
            }
            (a, b) => Expr::Mul(vec![a, b]),
        }
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// ---------------------------------------------------------------------------
// JSON grammar

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExprJson {
    Const {
        #[serde(rename = "const")]
        value: f64,
    },
    Var {
        var: usize,
    },
    Op(OpJson),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum OpJson {
    Add { args: Vec<ExprJson> },
    Sub { args: Vec<ExprJson> },
    Neg { arg: Box<ExprJson> },
    Mul { args: Vec<ExprJson> },
    Pow { base: Box<ExprJson>, exp: u32 },
    Sin { arg: Box<ExprJson> },
    Cos { arg: Box<ExprJson> },
    Exp { arg: Box<ExprJson> },
    Compose { outer: Box<ExprJson>, args: Vec<ExprJson> },
}

impl From<&Expr> for ExprJson {
    fn from(e: &Expr) -> Self {
        let list = |v: &[Expr]| v.iter().map(ExprJson::from).collect();
        match e {
            Expr::Const(c) => ExprJson::Const { value: *c },
            Expr::Var(j) => ExprJson::Var { var: *j },
            Expr::Add(args) => ExprJson::Op(OpJson::Add { args: list(args) }),
            Expr::Sub(a, b) => ExprJson::Op(OpJson::Sub {
                args: vec![ExprJson::from(a.as_ref()), ExprJson::from(b.as_ref())],
            }),
            Expr::Neg(a) => ExprJson::Op(OpJson::Neg { arg: Box::new(ExprJson::from(a.as_ref())) }),
            Expr::Mul(args) => ExprJson::Op(OpJson::Mul { args: list(args) }),
            Expr::Pow(a, e) => ExprJson::Op(OpJson::Pow {
                base: Box::new(ExprJson::from(a.as_ref())),
                exp: *e,
            }),
            Expr::Sin(a) => ExprJson::Op(OpJson::Sin { arg: Box::new(ExprJson::from(a.as_ref())) }),
            Expr::Cos(a) => ExprJson::Op(OpJson::Cos { arg: Box::new(ExprJson::from(a.as_ref())) }),
            Expr::Exp(a) => ExprJson::Op(OpJson::Exp { arg: Box::new(ExprJson::from(a.as_ref())) }),
            Expr::Compose { outer, args } => ExprJson::Op(OpJson::Compose {
                outer: Box::new(ExprJson::from(outer.as_ref())),
                args: list(args),
            }),
        }
    }
}

impl TryFrom<ExprJson> for Expr {
    type Error = Error;
    fn try_from(e: ExprJson) -> Result<Self> {
        let list = |v: Vec<ExprJson>| -> Result<Vec<Expr>> {
            v.into_iter().map(Expr::try_from).collect()
        };
        Ok(match e {
            ExprJson::Const { value } => Expr::Const(value),
            ExprJson::Var { var } => {
                if var < 1 {
                    return Err(Error::Parse("variables are 1-based".to_string()));
                }
                Expr::Var(var)
            }
            ExprJson::Op(op) => match op {
                OpJson::Add { args } => Expr::Add(list(args)?),
                OpJson::Sub { args } => {
                    if args.len() != 2 {
                        return Err(Error::Parse("sub takes exactly two arguments".to_string()));
                    }
                    let mut it = args.into_iter();
                    Expr::Sub(
                        Box::new(Expr::try_from(it.next().unwrap())?),
                        Box::new(Expr::try_from(it.next().unwrap())?),
                    )
                }
                OpJson::Neg { arg } => Expr::Neg(Box::new(Expr::try_from(*arg)?)),
                OpJson::Mul { args } => Expr::Mul(list(args)?),
                OpJson::Pow { base, exp } => Expr::Pow(Box::new(Expr::try_from(*base)?), exp),
                OpJson::Sin { arg } => Expr::Sin(Box::new(Expr::try_from(*arg)?)),
                OpJson::Cos { arg } => Expr::Cos(Box::new(Expr::try_from(*arg)?)),
                OpJson::Exp { arg } => Expr::Exp(Box::new(Expr::try_from(*arg)?)),
                OpJson::Compose { outer, args } => Expr::Compose {
                    outer: Box::new(Expr::try_from(*outer)?),
                    args: list(args)?,
                },
            },
        })
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ExprJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ExprJson::deserialize(deserializer)?;
        Expr::try_from(raw).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------

/// One component of a [`SmoothMap`]: an expression tree, or an arbitrary
/// routine written against the series ring. Custom components are available
/// to library users; configuration files can only express trees.
#[derive(Clone)]
pub enum MapComponent {
    Expr(Expr),
    Custom(Arc<dyn Fn(&[TruncatedSeries]) -> Result<TruncatedSeries> + Send + Sync>),
}

impl fmt::Debug for MapComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapComponent::Expr(e) => write!(f, "Expr({e:?})"),
            MapComponent::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A smooth map `R^n_in -> R^n_out` evaluated through series arithmetic.
/// Evaluation is pure and reentrant; concurrent evaluations at different
/// points do not interfere.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    n_in: usize,
    n_out: usize,
    comps: Vec<MapComponent>,
}

impl SmoothMap {
    pub fn from_exprs(n_in: usize, comps: Vec<Expr>) -> Result<Self> {
        for (i, c) in comps.iter().enumerate() {
            if c.max_var() > n_in {
                return Err(mismatch(format!(
                    "component {i} references variable {} but the map has {n_in} inputs",
                    c.max_var()
                )));
            }
        }
        Ok(Self {
            n_in,
            n_out: comps.len(),
            comps: comps.into_iter().map(MapComponent::Expr).collect(),
        })
    }

    pub fn from_components(n_in: usize, comps: Vec<MapComponent>) -> Self {
        Self { n_in, n_out: comps.len(), comps }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_exprs(n, (1..=n).map(Expr::var).collect()).unwrap()
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn components(&self) -> &[MapComponent] {
        &self.comps
    }

    pub fn eval_series(&self, inputs: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        if inputs.len() != self.n_in {
            return Err(mismatch(format!(
                "map expects {} inputs, got {}",
                self.n_in,
                inputs.len()
            )));
        }
        self.comps
            .iter()
            .map(|c| match c {
                MapComponent::Expr(e) => e.eval_series(inputs),
                MapComponent::Custom(f) => f(inputs),
            })
            .collect()
    }

    /// Series of all components about `x`, to the given order.
    pub fn series_at(&self, x: &[f64], order: usize) -> Result<Vec<TruncatedSeries>> {
        let inputs = seeds(self.n_in, order, x)?;
        self.eval_series(&inputs)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self
            .series_at(x, 0)?
            .into_iter()
            .map(|s| s.constant_term())
            .collect())
    }

    /// Jacobian matrix `d(out_i)/d(x_j)` at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let series = self.series_at(x, 1)?;
        let mut j = DMatrix::zeros(self.n_out, self.n_in);
        for (row, s) in series.iter().enumerate() {
            for col in 1..=self.n_in {
                let unit = crate::multiindex::MultiIndex::empty(self.n_in).append(col)?;
                j[(row, col - 1)] = s.partial_value(&unit);
            }
        }
        Ok(j)
    }
}
