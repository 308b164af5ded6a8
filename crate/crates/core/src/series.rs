//! Truncated multivariate Taylor arithmetic.
//!
//! A [`TruncatedSeries`] holds the Taylor coefficients of a function of `n`
//! variables about some expansion point, up to a total order `d`. The
//! expansion point itself is not stored; seeds created by [`seeds`] carry it
//! in their constant terms. Ring operations are exact modulo truncation of
//! total degree `> d`, so every identity between polynomials of degree
//! `<= d` holds to machine precision.
//!
//! Coefficients relate to partial derivatives by `coeff(I) = (d_I f) / I!`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{mismatch, Error, Result};
use crate::multiindex::{degree_layout, enumerate_degree, MultiIndex};

/// Enumeration of all multi-indices of degree `<= order`, graded, with an
/// offset map and a truncated product table.
pub struct SeriesLayout {
    n: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    offsets: HashMap<Vec<u32>, usize>,
    /// `products[a * len + b]` is the offset of `indices[a] + indices[b]`,
    /// or `usize::MAX` when the sum exceeds `order`.
    products: Vec<usize>,
    /// First offset of each degree block, plus a final sentinel.
    degree_starts: Vec<usize>,
}

impl SeriesLayout {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn build(n: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        let mut degree_starts = Vec::with_capacity(order + 2);
        for l in 0..=order {
            degree_starts.push(indices.len());
            indices.extend(enumerate_degree(n, l));
        }
        degree_starts.push(indices.len());
        let offsets: HashMap<Vec<u32>, usize> = indices
            .iter()
            .enumerate()
            .map(|(pos, idx)| (idx.counts().to_vec(), pos))
            .collect();
        let len = indices.len();
        let mut products = vec![usize::MAX; len * len];
        for a in 0..len {
            for b in 0..len {
                if indices[a].degree() + indices[b].degree() <= order {
                    let sum = indices[a].concat(&indices[b]).unwrap();
                    products[a * len + b] = offsets[sum.counts()];
                }
            }
        }
        Self { n, order, indices, offsets, products, degree_starts }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn offset(&self, idx: &MultiIndex) -> Option<usize> {
        self.offsets.get(idx.counts()).copied()
    }

    fn degree_range(&self, l: usize) -> std::ops::Range<usize> {
        self.degree_starts[l]..self.degree_starts[l + 1]
    }
}

/// Cached layout for `(n, order)`.
pub fn series_layout(n: usize, order: usize) -> Arc<SeriesLayout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SeriesLayout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, order))
        .or_insert_with(|| Arc::new(SeriesLayout::build(n, order)))
        .clone()
}

/// Taylor coefficients of a function of `n` variables to total order `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries {
    n: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    pub fn zero(n: usize, order: usize) -> Self {
        let layout = series_layout(n, order);
        Self { n, order, coeffs: vec![0.0; layout.len()] }
    }

    pub fn constant(n: usize, order: usize, c: f64) -> Self {
        let mut s = Self::zero(n, order);
        s.coeffs[0] = c;
        s
    }

    /// The seed `x0 + xi_j` for the 1-based variable `j`.
    pub fn variable(n: usize, order: usize, j: usize, x0: f64) -> Result<Self> {
        if j < 1 || j > n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        let mut s = Self::zero(n, order);
        s.coeffs[0] = x0;
        if order >= 1 {
            let unit = MultiIndex::empty(n).append(j)?;
            let off = series_layout(n, order).offset(&unit).unwrap();
            s.coeffs[off] = 1.0;
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, idx: &MultiIndex) -> f64 {
        match series_layout(self.n, self.order).offset(idx) {
            Some(off) => self.coeffs[off],
            None => 0.0,
        }
    }

    pub fn set_coeff(&mut self, idx: &MultiIndex, value: f64) -> Result<()> {
        let off = series_layout(self.n, self.order)
            .offset(idx)
            .ok_or_else(|| Error::Domain(format!("coefficient {idx} beyond order {}", self.order)))?;
        self.coeffs[off] = value;
        Ok(())
    }

    /// Partial-derivative value at the expansion point: `I! * coeff(I)`.
    pub fn partial_value(&self, idx: &MultiIndex) -> f64 {
        self.coeff(idx) * idx.factorial() as f64
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.order != other.order {
            return Err(mismatch(format!(
                "series shapes differ: (n={}, d={}) vs (n={}, d={})",
                self.n, self.order, other.n, other.order
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.coeffs {
            *a *= factor;
        }
        out
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let layout = series_layout(self.n, self.order);
        let len = layout.len();
        let mut out = Self::zero(self.n, self.order);
        for a in 0..len {
            let va = self.coeffs[a];
            if va == 0.0 {
                continue;
            }
            let row = a * len;
            for b in 0..len {
                let vb = other.coeffs[b];
                if vb == 0.0 {
                    continue;
                }
                let target = layout.products[row + b];
                if target != usize::MAX {
                    out.coeffs[target] += va * vb;
                }
            }
        }
        Ok(out)
    }

    pub fn powi(&self, exponent: u32) -> Result<Self> {
        let mut result = Self::constant(self.n, self.order, 1.0);
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Drop all coefficients of total degree above `new_order`.
    pub fn truncate(&self, new_order: usize) -> Self {
        let new_order = new_order.min(self.order);
        let mut out = Self::zero(self.n, new_order);
        let layout = series_layout(self.n, new_order);
        let src = series_layout(self.n, self.order);
        for (pos, idx) in layout.indices().iter().enumerate() {
            out.coeffs[pos] = self.coeffs[src.offset(idx).unwrap()];
        }
        out
    }

    /// Coefficients of the partial derivative in the 1-based variable `j`;
    /// one order lower than `self`. Requires order >= 1: a degree-0
    /// expansion carries no derivative information.
    pub fn derivative(&self, j: usize) -> Result<Self> {
        if j < 1 || j > self.n {
            return Err(Error::IndexOutOfRange { index: j, n: self.n });
        }
        if self.order == 0 {
            return Err(Error::Domain(
                "cannot differentiate a series truncated at order 0".to_string(),
            ));
        }
        let mut out = Self::zero(self.n, self.order - 1);
        let dst = series_layout(self.n, self.order - 1);
        for (pos, idx) in dst.indices().iter().enumerate() {
            let grown = idx.append(j)?;
            out.coeffs[pos] = self.coeff(&grown) * grown.count(j) as f64;
        }
        Ok(out)
    }

    /// Substitute `inner` for the variables of `self`. The coefficients of
    /// `self` are taken about the point formed by the constant terms of the
    /// inner series; the substituted deviation is `inner_i - inner_i(0)`.
    pub fn compose(&self, inner: &[TruncatedSeries]) -> Result<Self> {
        if inner.len() != self.n {
            return Err(mismatch(format!(
                "compose expects {} inner series, got {}",
                self.n,
                inner.len()
            )));
        }
        if inner.is_empty() {
            return Err(mismatch("compose needs at least one variable".to_string()));
        }
        let inner_n = inner[0].n;
        let order = self.order;
        for s in inner {
            if s.n != inner_n || s.order != order {
                return Err(mismatch(
                    "inner series must share variable count and order".to_string(),
                ));
            }
        }
        let deviations: Vec<TruncatedSeries> = inner
            .iter()
            .map(|s| {
                let mut d = s.clone();
                d.coeffs[0] = 0.0;
                d
            })
            .collect();

        // Power products of the deviations, built degree by degree: each
        // multi-index K reuses K with one occurrence removed.
        let outer_layout = series_layout(self.n, order);
        let mut power: Vec<TruncatedSeries> = Vec::with_capacity(outer_layout.len());
        let mut out = TruncatedSeries::zero(inner_n, order);
        for (pos, k_idx) in outer_layout.indices().iter().enumerate() {
            let p = if k_idx.degree() == 0 {
                TruncatedSeries::constant(inner_n, order, 1.0)
            } else {
                let j = k_idx.support().next().unwrap();
                let prev = outer_layout.offset(&k_idx.remove(j)?).unwrap();
                power[prev].mul(&deviations[j - 1])?
            };
            let c = self.coeffs[pos];
            if c != 0.0 {
                out = out.add(&p.scale(c))?;
            }
            power.push(p);
        }
        Ok(out)
    }

    /// Analytic composition `f(self)` given the 1-D Taylor coefficients of
    /// `f` about the constant term of `self`.
    fn analytic(&self, derivs_at_c: &[f64]) -> Result<Self> {
        let mut nilpotent = self.clone();
        nilpotent.coeffs[0] = 0.0;
        let mut out = TruncatedSeries::constant(self.n, self.order, derivs_at_c[0]);
        let mut power = TruncatedSeries::constant(self.n, self.order, 1.0);
        let mut fact = 1.0;
        for r in 1..=self.order {
            power = power.mul(&nilpotent)?;
            fact *= r as f64;
            out = out.add(&power.scale(derivs_at_c[r] / fact))?;
        }
        Ok(out)
    }

    pub fn exp(&self) -> Result<Self> {
        let c = self.constant_term().exp();
        let derivs = vec![c; self.order + 1];
        self.analytic(&derivs)
    }

    pub fn sin(&self) -> Result<Self> {
        let (s, c) = self.constant_term().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.order).map(|r| cycle[r % 4]).collect();
        self.analytic(&derivs)
    }

    pub fn cos(&self) -> Result<Self> {
        let (s, c) = self.constant_term().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.order).map(|r| cycle[r % 4]).collect();
        self.analytic(&derivs)
    }

    /// Largest coefficient magnitude within one degree block.
    pub fn degree_block_max(&self, l: usize) -> f64 {
        let layout = series_layout(self.n, self.order);
        self.coeffs[layout.degree_range(l)]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Coordinate seeds at `x`: the i-th series is `x_i + xi_i`.
pub fn seeds(n: usize, order: usize, x: &[f64]) -> Result<Vec<TruncatedSeries>> {
    if x.len() != n {
        return Err(mismatch(format!("expected {n} coordinates, got {}", x.len())));
    }
    (1..=n)
        .map(|j| TruncatedSeries::variable(n, order, j, x[j - 1]))
        .collect()
}

/// Read the jet of a series: partial-derivative values for every canonical
/// multi-index of degree `<= max_degree`, as `(index, value)` pairs in
/// enumeration order.
pub fn jet_of(series: &TruncatedSeries, max_degree: usize) -> Vec<(MultiIndex, f64)> {
    let mut out = Vec::new();
    for l in 0..=max_degree {
        for idx in degree_layout(series.n(), l).indices() {
            out.push((idx.clone(), series.partial_value(idx)));
        }
    }
    out
}
