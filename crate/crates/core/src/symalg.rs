//! Symmetric and almost-symmetric component arrays.
//!
//! Two component conventions coexist and are tracked in the type:
//!
//! * [`Convention::Derivative`] — entries are raw partial-derivative values
//!   `w_I`; the value attached to any index sequence is the value at its
//!   canonical reordering.
//! * [`Convention::Dual`] — entries are coefficients on the modified dual
//!   basis, scaled so that pairing a dual array against a derivative array
//!   is a plain sum over canonical multi-indices, with no multiplicity
//!   factors. A dual entry relates to the corresponding dense symmetric
//!   tensor component by the factor `|I|!/I!`.
//!
//! Mixing conventions in a pairing is a checked error rather than a silent
//! factor bug.
//!
//! [`AlmostSymArray`] is symmetric in its leading block of slots only; the
//! collapse/spread pair moves between almost-symmetric arrays keyed
//! `(J, j)` and symmetric arrays keyed by the merged index `<Jj>`:
//!
//! * `collapse(T)_I = sum over j in I of T^{I\j; j}`, so that the `(J, j)`
//!   sum `T^{Jj} w_{<Jj>}` equals the canonical sum `collapse(T)_I w_I`;
//! * `spread(R)^{Jj} = R_{<Jj>} / c(<Jj>)`, a right inverse of collapse,
//!   where `c(I)` counts the distinct base indices in `I`.

use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::multiindex::{degree_layout, sym_dim, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Derivative,
    Dual,
}

/// A fully symmetric degree-`l` array over `n` variables, stored as one
/// value per canonical multi-index in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymArray {
    n: usize,
    degree: usize,
    convention: Convention,
    values: Vec<f64>,
}

impl SymArray {
    pub fn zeros(n: usize, degree: usize, convention: Convention) -> Self {
        Self { n, degree, convention, values: vec![0.0; sym_dim(n, degree)] }
    }

    pub fn from_fn(
        n: usize,
        degree: usize,
        convention: Convention,
        mut f: impl FnMut(&MultiIndex) -> f64,
    ) -> Self {
        let layout = degree_layout(n, degree);
        let values = layout.indices().iter().map(|i| f(i)).collect();
        Self { n, degree, convention, values }
    }

    /// Symmetrization of a raw array given on full index sequences
    /// (1-based entries, length `degree`): each canonical entry is the mean
    /// of `raw` over the distinct arrangements of that multi-index. The
    /// result carries derivative components.
    pub fn symmetrize_raw(
        n: usize,
        degree: usize,
        mut raw: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        Self::from_fn(n, degree, Convention::Derivative, |idx| {
            let arrangements = idx.arrangements();
            let total: f64 = arrangements.iter().map(|seq| raw(seq)).sum();
            total / arrangements.len() as f64
        })
    }

    pub fn from_values(
        n: usize,
        degree: usize,
        convention: Convention,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != sym_dim(n, degree) {
            return Err(mismatch(format!(
                "symmetric array over n={n} of degree {degree} needs {} values, got {}",
                sym_dim(n, degree),
                values.len()
            )));
        }
        Ok(Self { n, degree, convention, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, idx: &MultiIndex) -> f64 {
        self.values[degree_layout(self.n, self.degree).offset(idx)]
    }

    pub fn set(&mut self, idx: &MultiIndex, value: f64) {
        self.values[degree_layout(self.n, self.degree).offset(idx)] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        let layout = degree_layout(self.n, self.degree);
        layout
            .indices()
            .to_vec()
            .into_iter()
            .zip(self.values.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v += w;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self.add(&other.scale(-1.0))?)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.degree != other.degree {
            return Err(mismatch(format!(
                "array shapes differ: (n={}, l={}) vs (n={}, l={})",
                self.n, self.degree, other.n, other.degree
            )));
        }
        if self.convention != other.convention {
            return Err(Error::Convention(format!(
                "cannot combine {:?} with {:?} components",
                self.convention, other.convention
            )));
        }
        Ok(())
    }

    /// Pairing of a dual-convention array (`self`) against a
    /// derivative-convention array: a plain sum over canonical indices.
    pub fn pair(&self, jet_side: &SymArray) -> Result<f64> {
        if self.convention != Convention::Dual || jet_side.convention != Convention::Derivative {
            return Err(Error::Convention(format!(
                "pair expects dual . derivative, got {:?} . {:?}",
                self.convention, jet_side.convention
            )));
        }
        if self.n != jet_side.n || self.degree != jet_side.degree {
            return Err(mismatch(format!(
                "pair shapes differ: (n={}, l={}) vs (n={}, l={})",
                self.n, self.degree, jet_side.n, jet_side.degree
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&jet_side.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Distribute a degree-`l` symmetric array onto `(J, j)` keys:
    /// `spread(R)^{Jj} = R_{<Jj>} / c(<Jj>)`. Requires `l >= 1`;
    /// `collapse_last` is a left inverse.
    pub fn spread_last(&self) -> Result<AlmostSymArray> {
        if self.degree == 0 {
            return Err(Error::Domain(
                "spread_last requires degree >= 1".to_string(),
            ));
        }
        let mut out = AlmostSymArray::zeros(self.n, self.degree, self.convention);
        let layout = degree_layout(self.n, self.degree - 1);
        for (pos, tail) in layout.indices().iter().enumerate() {
            for j in 1..=self.n {
                let merged = tail.append(j).unwrap();
                let value = self.get(&merged) / merged.distinct_count() as f64;
                out.values[pos * self.n + (j - 1)] = value;
            }
        }
        Ok(out)
    }
}

/// A degree-`l` array symmetric in its first `l - 1` slots only, keyed by a
/// canonical multi-index `J` of degree `l - 1` plus a last 1-based index
/// `j`. No relation is imposed across `(J, j)` pairs that merge to the same
/// multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct AlmostSymArray {
    n: usize,
    /// Total degree `l = |J| + 1`.
    degree: usize,
    convention: Convention,
    /// Indexed `offset(J) * n + (j - 1)`.
    values: Vec<f64>,
}

impl AlmostSymArray {
    pub fn zeros(n: usize, degree: usize, convention: Convention) -> Self {
        assert!(degree >= 1, "almost symmetric arrays have degree >= 1");
        Self { n, degree, convention, values: vec![0.0; sym_dim(n, degree - 1) * n] }
    }

    pub fn from_fn(
        n: usize,
        degree: usize,
        convention: Convention,
        mut f: impl FnMut(&MultiIndex, usize) -> f64,
    ) -> Self {
        let mut out = Self::zeros(n, degree, convention);
        let layout = degree_layout(n, degree - 1);
        for (pos, tail) in layout.indices().iter().enumerate() {
            for j in 1..=n {
                out.values[pos * n + (j - 1)] = f(tail, j);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total degree `|J| + 1`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, tail: &MultiIndex, j: usize) -> f64 {
        assert!(j >= 1 && j <= self.n);
        let pos = degree_layout(self.n, self.degree - 1).offset(tail);
        self.values[pos * self.n + (j - 1)]
    }

    pub fn set(&mut self, tail: &MultiIndex, j: usize, value: f64) {
        assert!(j >= 1 && j <= self.n);
        let pos = degree_layout(self.n, self.degree - 1).offset(tail);
        self.values[pos * self.n + (j - 1)] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, usize, f64)> + '_ {
        let layout = degree_layout(self.n, self.degree - 1);
        let n = self.n;
        layout
            .indices()
            .to_vec()
            .into_iter()
            .enumerate()
            .flat_map(move |(pos, tail)| {
                (1..=n).map(move |j| (tail.clone(), j, self.values[pos * n + (j - 1)]))
            })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.degree != other.degree || self.convention != other.convention
        {
            return Err(mismatch("almost symmetric array shapes differ".to_string()));
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v += w;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Merge the last slot: `collapse(T)_I = sum over j in I of T^{I\j; j}`.
    /// For any symmetric derivative array `w` of the same degree, the
    /// `(J, j)` sum `T^{Jj} w_{<Jj>}` equals `pair(collapse(T), w)`.
    pub fn collapse_last(&self) -> SymArray {
        SymArray::from_fn(self.n, self.degree, self.convention, |idx| {
            idx.support()
                .map(|j| self.get(&idx.remove(j).unwrap(), j))
                .sum()
        })
    }

    /// Full symmetrization using only `l` slot exchanges:
    /// `S(T)_I = (1/l) * sum over positions of the canonical sequence of
    /// T^{I minus that entry; that entry}`.
    pub fn symmetrized(&self) -> SymArray {
        let l = self.degree as f64;
        SymArray::from_fn(self.n, self.degree, self.convention, |idx| {
            let total: f64 = idx
                .support()
                .map(|j| idx.count(j) as f64 * self.get(&idx.remove(j).unwrap(), j))
                .sum();
            total / l
        })
    }

    /// Plain sum over all `(J, j)` keys of `self * other`; used for the
    /// mixed slot of non-holonomic pairings. `self` must carry dual and
    /// `other` derivative components.
    pub fn pair(&self, jet_side: &AlmostSymArray) -> Result<f64> {
        if self.convention != Convention::Dual || jet_side.convention != Convention::Derivative {
            return Err(Error::Convention(format!(
                "pair expects dual . derivative, got {:?} . {:?}",
                self.convention, jet_side.convention
            )));
        }
        if self.n != jet_side.n || self.degree != jet_side.degree {
            return Err(mismatch("almost symmetric pair shapes differ".to_string()));
        }
        Ok(self
            .values
            .iter()
            .zip(&jet_side.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// For each last index `j`, the sum over canonical `J` of
    /// `self^{J; j} * w_J` against a degree-`(l-1)` derivative array.
    pub fn slice_pair(&self, jet_side: &SymArray) -> Result<Vec<f64>> {
        if self.convention != Convention::Dual || jet_side.convention != Convention::Derivative {
            return Err(Error::Convention(format!(
                "slice_pair expects dual . derivative, got {:?} . {:?}",
                self.convention, jet_side.convention
            )));
        }
        if self.n != jet_side.n || self.degree != jet_side.degree + 1 {
            return Err(mismatch(format!(
                "slice_pair shapes differ: total degree {} vs jet degree {}",
                self.degree, jet_side.degree
            )));
        }
        let mut out = vec![0.0; self.n];
        for (pos, w) in jet_side.values().iter().enumerate() {
            for j in 0..self.n {
                out[j] += self.values[pos * self.n + j] * w;
            }
        }
        Ok(out)
    }

    /// Largest deviation from full symmetry, measured on dense components:
    /// for every merged index `I`, the spread among the values
    /// `T^{I\j; j}` (normalized by `|I\j|!/(I\j)!` for dual arrays) over the
    /// distinct `j` in `I`. Zero iff the array is the image of a symmetric
    /// array under `spread_last` up to that normalization.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in degree_layout(self.n, self.degree).indices() {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for j in idx.support() {
                let tail = idx.remove(j).unwrap();
                let norm = match self.convention {
                    Convention::Dual => tail.multiplicity() as f64,
                    Convention::Derivative => 1.0,
                };
                let v = self.get(&tail, j) / norm;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > lo {
                worst = worst.max(hi - lo);
            }
        }
        worst
    }
}
