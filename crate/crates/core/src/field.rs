//! Scalar fields with exact local Taylor expansions.
//!
//! A [`ScalarField`] is a function of `n` base coordinates that can produce
//! its own truncated Taylor series about any point. Fields built from
//! expression trees are exact on polynomials; derived fields (partials,
//! sums, products) stay exact because they re-expand the source at a higher
//! order and manipulate coefficients. Evaluation is pure and reentrant.

use std::sync::Arc;

use crate::error::{mismatch, Error, Result};
use crate::expr::{Expr, MapComponent, SmoothMap};
use crate::multiindex::MultiIndex;
use crate::series::{seeds, TruncatedSeries};

type FieldFn = dyn Fn(&[f64], usize) -> Result<TruncatedSeries> + Send + Sync;

#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    f: Arc<FieldFn>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarField(n={})", self.n)
    }
}

impl ScalarField {
    /// Wrap a routine producing the Taylor series of the field about a
    /// point, truncated at the requested order.
    pub fn custom(
        n: usize,
        f: impl Fn(&[f64], usize) -> Result<TruncatedSeries> + Send + Sync + 'static,
    ) -> Self {
        Self { n, f: Arc::new(f) }
    }

    pub fn from_expr(n: usize, expr: Expr) -> Result<Self> {
        if expr.max_var() > n {
            return Err(mismatch(format!(
                "expression references variable {} over base dimension {n}",
                expr.max_var()
            )));
        }
        Ok(Self::custom(n, move |x, order| {
            expr.eval_series(&seeds(n, order, x)?)
        }))
    }

    /// A component of a smooth map, viewed as a scalar field.
    pub fn from_map_component(map: &SmoothMap, comp: usize) -> Result<Self> {
        if comp >= map.n_out() {
            return Err(Error::IndexOutOfRange { index: comp + 1, n: map.n_out() });
        }
        let n = map.n_in();
        match map.components()[comp].clone() {
            MapComponent::Expr(e) => Self::from_expr(n, e),
            MapComponent::Custom(f) => Ok(Self::custom(n, move |x, order| {
                f(&seeds(n, order, x)?)
            })),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::custom(n, move |x, order| {
            if x.len() != n {
                return Err(mismatch(format!("expected {n} coordinates, got {}", x.len())));
            }
            Ok(TruncatedSeries::constant(n, order, c))
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn series(&self, x: &[f64], order: usize) -> Result<TruncatedSeries> {
        (self.f)(x, order)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.series(x, 0)?.constant_term())
    }

    /// The partial derivative in the 1-based coordinate `j`, as a field.
    pub fn partial(&self, j: usize) -> Result<Self> {
        if j < 1 || j > self.n {
            return Err(Error::IndexOutOfRange { index: j, n: self.n });
        }
        let inner = self.clone();
        Ok(Self::custom(self.n, move |x, order| {
            let s = inner.series(x, order + 1)?;
            s.derivative(j)
        }))
    }

    /// Iterated partial derivative for all entries of `idx`.
    pub fn partial_multi(&self, idx: &MultiIndex) -> Result<Self> {
        let mut field = self.clone();
        for j in idx.sequence() {
            field = field.partial(j)?;
        }
        Ok(field)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(mismatch("field dimensions differ".to_string()));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::custom(self.n, move |x, order| {
            a.series(x, order)?.add(&b.series(x, order)?)
        }))
    }

    pub fn sum(n: usize, fields: Vec<ScalarField>) -> Result<Self> {
        for f in &fields {
            if f.n != n {
                return Err(mismatch("field dimensions differ".to_string()));
            }
        }
        Ok(Self::custom(n, move |x, order| {
            let mut acc = TruncatedSeries::zero(n, order);
            for f in &fields {
                acc = acc.add(&f.series(x, order)?)?;
            }
            Ok(acc)
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let inner = self.clone();
        Self::custom(self.n, move |x, order| Ok(inner.series(x, order)?.scale(factor)))
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(mismatch("field dimensions differ".to_string()));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::custom(self.n, move |x, order| {
            a.series(x, order)?.mul(&b.series(x, order)?)
        }))
    }
}
