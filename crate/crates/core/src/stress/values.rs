//! Pointwise stress values and the maps between them.
//!
//! All stress components are stored in the dual convention, so every
//! pairing against derivative-convention jet components is a plain sum over
//! canonical multi-indices. Densities are scalar coefficients relative to
//! the chart volume element with the chart's standard orientation.
//!
//! Stacked component orders match the jet side: degree-major, then fiber
//! index, then canonical multi-index; the mixed (`pbar`) block of a
//! non-holonomic stress follows its plain block, mirroring the
//! lambda/mu split of [`NonHolJetPoint`]. With these conventions every
//! pairing is the dot product of the two flat vectors.

use nalgebra::DMatrix;

use crate::error::{mismatch, Error, Result};
use crate::jet::{jet_flat_dim, JetPoint, NonHolJetPoint};
use crate::multiindex::{degree_layout, sym_dim, MultiIndex};
use crate::symalg::{AlmostSymArray, Convention, SymArray};

fn check_point_shape(n: usize, m: usize, order: usize, u: &JetPoint, what: &str) -> Result<()> {
    if u.n() != n || u.m() != m || u.order() != order {
        return Err(mismatch(format!(
            "{what}: expected jet shape (n={n}, m={m}, order={order}), got (n={}, m={}, order={})",
            u.n(),
            u.m(),
            u.order()
        )));
    }
    Ok(())
}

/// A linear map from order-`k` jets to volume densities, with dual
/// components `S_a^I` for `|I| <= k`.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationalStress {
    n: usize,
    m: usize,
    k: usize,
    /// Indexed `l * m + alpha`, degrees `0..=k`.
    comps: Vec<SymArray>,
}

impl VariationalStress {
    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        let comps = (0..=k)
            .flat_map(|l| (0..m).map(move |_| SymArray::zeros(n, l, Convention::Dual)))
            .collect();
        Self { n, m, k, comps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn comp(&self, alpha: usize, l: usize) -> &SymArray {
        &self.comps[l * self.m + alpha]
    }

    pub fn comp_mut(&mut self, alpha: usize, l: usize) -> &mut SymArray {
        &mut self.comps[l * self.m + alpha]
    }

    pub fn get(&self, alpha: usize, idx: &MultiIndex) -> f64 {
        self.comp(alpha, idx.degree()).get(idx)
    }

    pub fn set(&mut self, alpha: usize, idx: &MultiIndex, value: f64) {
        self.comp_mut(alpha, idx.degree()).set(idx, value);
    }

    /// Density coefficient of the action on an order-`k` jet:
    /// a plain sum `S_a^I u^a_I` over canonical indices.
    pub fn pair(&self, u: &JetPoint) -> Result<f64> {
        check_point_shape(self.n, self.m, self.k, u, "variational pairing")?;
        let mut acc = 0.0;
        for l in 0..=self.k {
            for alpha in 0..self.m {
                acc += self.comp(alpha, l).pair(u.comp(alpha, l))?;
            }
        }
        Ok(acc)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(jet_flat_dim(self.n, self.m, self.k));
        for l in 0..=self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.comp(alpha, l).values());
            }
        }
        out
    }

    pub fn from_flat(n: usize, m: usize, k: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != jet_flat_dim(n, m, k) {
            return Err(mismatch(format!(
                "flat stress vector has length {}, expected {}",
                flat.len(),
                jet_flat_dim(n, m, k)
            )));
        }
        let mut out = Self::zeros(n, m, k);
        let mut cursor = 0;
        for l in 0..=k {
            let block = sym_dim(n, l);
            for alpha in 0..m {
                out.comp_mut(alpha, l)
                    .values_mut()
                    .copy_from_slice(&flat[cursor..cursor + block]);
                cursor += block;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |a, c| a.max(c.max_abs()))
    }

    /// Largest component magnitude within one degree block.
    pub fn degree_max_abs(&self, l: usize) -> f64 {
        (0..self.m).fold(0.0, |a, alpha| a.max(self.comp(alpha, l).max_abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if (self.n, self.m, self.k) != (other.n, other.m, other.k) {
            return Err(mismatch("variational stress shapes differ".to_string()));
        }
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            *a = a.sub(b)?;
        }
        Ok(out)
    }
}

/// A linear map from order-`(k-1)` jets to volume densities.
#[derive(Clone, Debug, PartialEq)]
pub struct BodyForce {
    n: usize,
    m: usize,
    k: usize,
    /// Indexed `l * m + alpha`, degrees `0..=k-1`.
    comps: Vec<SymArray>,
}

impl BodyForce {
    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        assert!(k >= 1);
        let comps = (0..k)
            .flat_map(|l| (0..m).map(move |_| SymArray::zeros(n, l, Convention::Dual)))
            .collect();
        Self { n, m, k, comps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn comp(&self, alpha: usize, l: usize) -> &SymArray {
        &self.comps[l * self.m + alpha]
    }

    pub fn comp_mut(&mut self, alpha: usize, l: usize) -> &mut SymArray {
        &mut self.comps[l * self.m + alpha]
    }

    /// Density coefficient of the action on an order-`(k-1)` jet.
    pub fn pair(&self, v: &JetPoint) -> Result<f64> {
        check_point_shape(self.n, self.m, self.k - 1, v, "body force pairing")?;
        let mut acc = 0.0;
        for l in 0..self.k {
            for alpha in 0..self.m {
                acc += self.comp(alpha, l).pair(v.comp(alpha, l))?;
            }
        }
        Ok(acc)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(jet_flat_dim(self.n, self.m, self.k - 1));
        for l in 0..self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.comp(alpha, l).values());
            }
        }
        out
    }

    pub fn from_flat(n: usize, m: usize, k: usize, flat: &[f64]) -> Result<Self> {
        let expect = jet_flat_dim(n, m, k - 1);
        if flat.len() != expect {
            return Err(mismatch(format!(
                "flat body force vector has length {}, expected {expect}",
                flat.len()
            )));
        }
        let mut out = Self::zeros(n, m, k);
        let mut cursor = 0;
        for l in 0..k {
            let block = sym_dim(n, l);
            for alpha in 0..m {
                out.comp_mut(alpha, l)
                    .values_mut()
                    .copy_from_slice(&flat[cursor..cursor + block]);
                cursor += block;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |a, c| a.max(c.max_abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if (self.n, self.m, self.k) != (other.n, other.m, other.k) {
            return Err(mismatch("body force shapes differ".to_string()));
        }
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            *a = a.sub(b)?;
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.comps {
            *c = c.scale(factor);
        }
        out
    }
}

/// A linear map from order-`(k-1)` jets to hyperplane-density values, with
/// components `tau_a^{J;i}` on the contraction basis. Symmetric in `J`
/// only; no relation ties different `(J, i)` splittings of one merged
/// index.
#[derive(Clone, Debug, PartialEq)]
pub struct TractionStress {
    n: usize,
    m: usize,
    k: usize,
    /// Indexed `r * m + alpha`; the entry has total degree `r + 1`
    /// (leading block `J` of degree `r`, contraction index last).
    comps: Vec<AlmostSymArray>,
}

impl TractionStress {
    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        assert!(k >= 1);
        let comps = (0..k)
            .flat_map(|r| (0..m).map(move |_| AlmostSymArray::zeros(n, r + 1, Convention::Dual)))
            .collect();
        Self { n, m, k, comps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The block whose leading multi-index has degree `r`.
    pub fn comp(&self, alpha: usize, r: usize) -> &AlmostSymArray {
        &self.comps[r * self.m + alpha]
    }

    pub fn comp_mut(&mut self, alpha: usize, r: usize) -> &mut AlmostSymArray {
        &mut self.comps[r * self.m + alpha]
    }

    pub fn get(&self, alpha: usize, tail: &MultiIndex, i: usize) -> f64 {
        self.comp(alpha, tail.degree()).get(tail, i)
    }

    pub fn set(&mut self, alpha: usize, tail: &MultiIndex, i: usize, value: f64) {
        self.comp_mut(alpha, tail.degree()).set(tail, i, value);
    }

    /// Coefficients `c_i` of the hyperplane form produced by pairing with an
    /// order-`(k-1)` jet: `c_i = tau_a^{J;i} v^a_J`.
    pub fn action(&self, v: &JetPoint) -> Result<Vec<f64>> {
        check_point_shape(self.n, self.m, self.k - 1, v, "traction action")?;
        let mut out = vec![0.0; self.n];
        for r in 0..self.k {
            for alpha in 0..self.m {
                let per_i = self.comp(alpha, r).slice_pair(v.comp(alpha, r))?;
                for (acc, c) in out.iter_mut().zip(per_i) {
                    *acc += c;
                }
            }
        }
        Ok(out)
    }

    /// Boundary density induced on an oriented tangent frame of `n - 1`
    /// vectors: component `t_a^J` is `tau_a^{J;i}` contracted with the
    /// value of the `i`-th contraction basis element on the frame. Errors
    /// on a rank-deficient frame.
    pub fn hyper_traction(&self, frame: &[Vec<f64>]) -> Result<HyperTraction> {
        let eps = contraction_basis_on_frame(self.n, frame)?;
        let mut out = HyperTraction::zeros(self.n, self.m, self.k);
        for r in 0..self.k {
            for alpha in 0..self.m {
                let block = self.comp(alpha, r);
                let target = out.comp_mut(alpha, r);
                for idx in degree_layout(self.n, r).indices() {
                    let mut acc = 0.0;
                    for (i, e) in eps.iter().enumerate() {
                        acc += block.get(idx, i + 1) * e;
                    }
                    target.set(idx, acc);
                }
            }
        }
        Ok(out)
    }

    /// Largest symmetry defect across degree blocks, measured on dense
    /// components; zero iff every block is fully symmetric under merging
    /// the contraction index into the leading block.
    pub fn symmetry_defect(&self, r: usize) -> f64 {
        (0..self.m).fold(0.0, |a, alpha| a.max(self.comp(alpha, r).symmetry_defect()))
    }

    /// Flat components of the slice with contraction index `i`, in the
    /// order-`(k-1)` jet component order.
    pub fn slice_flat(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(jet_flat_dim(self.n, self.m, self.k - 1));
        for r in 0..self.k {
            for alpha in 0..self.m {
                let block = self.comp(alpha, r);
                for idx in degree_layout(self.n, r).indices() {
                    out.push(block.get(idx, i));
                }
            }
        }
        out
    }

    pub fn from_slices(n: usize, m: usize, k: usize, slices: &[Vec<f64>]) -> Result<Self> {
        if slices.len() != n {
            return Err(mismatch(format!("expected {n} slices, got {}", slices.len())));
        }
        let expect = jet_flat_dim(n, m, k - 1);
        let mut out = Self::zeros(n, m, k);
        for (i, slice) in slices.iter().enumerate() {
            if slice.len() != expect {
                return Err(mismatch(format!(
                    "slice {i} has length {}, expected {expect}",
                    slice.len()
                )));
            }
            let mut cursor = 0;
            for r in 0..k {
                for alpha in 0..m {
                    for idx in degree_layout(n, r).indices() {
                        out.comp_mut(alpha, r).set(idx, i + 1, slice[cursor]);
                        cursor += 1;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |a, c| a.max(c.max_abs()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.n, self.m, self.k) != (other.n, other.m, other.k) {
            return Err(mismatch("traction stress shapes differ".to_string()));
        }
        let mut out = self.clone();
        for (a, b) in out.comps.iter_mut().zip(&other.comps) {
            *a = a.add(b)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.comps {
            *c = c.scale(factor);
        }
        out
    }
}

/// Values of the contraction basis elements on a tangent frame: entry `i`
/// is the determinant of the matrix `[e_i | t_1 | ... | t_{n-1}]`.
pub fn contraction_basis_on_frame(n: usize, frame: &[Vec<f64>]) -> Result<Vec<f64>> {
    if frame.len() != n - 1 {
        return Err(mismatch(format!(
            "a hyperplane frame over n={n} needs {} vectors, got {}",
            n - 1,
            frame.len()
        )));
    }
    for t in frame {
        if t.len() != n {
            return Err(mismatch("frame vector of wrong dimension".to_string()));
        }
    }
    let mut eps = vec![0.0; n];
    for i in 0..n {
        let mut mat = DMatrix::zeros(n, n);
        mat[(i, 0)] = 1.0;
        for (col, t) in frame.iter().enumerate() {
            for row in 0..n {
                mat[(row, col + 1)] = t[row];
            }
        }
        eps[i] = mat.determinant();
    }
    if eps.iter().all(|e| *e == 0.0) {
        return Err(Error::Singular("rank-deficient tangent frame".to_string()));
    }
    Ok(eps)
}

/// Boundary surface-force density: dual components per degree `< k`,
/// relative to the parametrization measure of the face it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperTraction {
    n: usize,
    m: usize,
    k: usize,
    comps: Vec<SymArray>,
}

impl HyperTraction {
    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        assert!(k >= 1);
        let comps = (0..k)
            .flat_map(|l| (0..m).map(move |_| SymArray::zeros(n, l, Convention::Dual)))
            .collect();
        Self { n, m, k, comps }
    }

    pub fn comp(&self, alpha: usize, l: usize) -> &SymArray {
        &self.comps[l * self.m + alpha]
    }

    pub fn comp_mut(&mut self, alpha: usize, l: usize) -> &mut SymArray {
        &mut self.comps[l * self.m + alpha]
    }

    /// Pairing with an ambient order-`(k-1)` jet.
    pub fn action(&self, v: &JetPoint) -> Result<f64> {
        check_point_shape(self.n, self.m, self.k - 1, v, "hyper-traction action")?;
        let mut acc = 0.0;
        for l in 0..self.k {
            for alpha in 0..self.m {
                acc += self.comp(alpha, l).pair(v.comp(alpha, l))?;
            }
        }
        Ok(acc)
    }
}

/// A linear map on first jets of sections of the order-`(k-1)` bundle:
/// a plain block `P_a^J` acting on values and a mixed block `Pbar_a^{J;j}`
/// acting on first-slot data.
#[derive(Clone, Debug, PartialEq)]
pub struct NonHolStress {
    n: usize,
    m: usize,
    k: usize,
    /// Indexed `l * m + alpha`, degrees `0..=k-1`.
    p: Vec<SymArray>,
    /// Indexed `r * m + alpha`; entry has total degree `r + 1`.
    pbar: Vec<AlmostSymArray>,
}

impl NonHolStress {
    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        assert!(k >= 1);
        let p = (0..k)
            .flat_map(|l| (0..m).map(move |_| SymArray::zeros(n, l, Convention::Dual)))
            .collect();
        let pbar = (0..k)
            .flat_map(|r| (0..m).map(move |_| AlmostSymArray::zeros(n, r + 1, Convention::Dual)))
            .collect();
        Self { n, m, k, p, pbar }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self, alpha: usize, l: usize) -> &SymArray {
        &self.p[l * self.m + alpha]
    }

    pub fn p_mut(&mut self, alpha: usize, l: usize) -> &mut SymArray {
        &mut self.p[l * self.m + alpha]
    }

    pub fn pbar(&self, alpha: usize, r: usize) -> &AlmostSymArray {
        &self.pbar[r * self.m + alpha]
    }

    pub fn pbar_mut(&mut self, alpha: usize, r: usize) -> &mut AlmostSymArray {
        &mut self.pbar[r * self.m + alpha]
    }

    /// Density coefficient of the action on a first jet of a jet-bundle
    /// section: `P_a^J lambda^a_J + Pbar_a^{J;j} mu^a_{J;j}`.
    pub fn pair(&self, point: &NonHolJetPoint) -> Result<f64> {
        if point.n() != self.n || point.m() != self.m || point.k() != self.k {
            return Err(mismatch(format!(
                "non-holonomic pairing: stress shape (n={}, m={}, k={}) vs point (n={}, m={}, k={})",
                self.n,
                self.m,
                self.k,
                point.n(),
                point.m(),
                point.k()
            )));
        }
        let mut acc = 0.0;
        for l in 0..self.k {
            for alpha in 0..self.m {
                acc += self.p(alpha, l).pair(point.lambda(alpha, l))?;
                acc += self.pbar(alpha, l).pair(point.mu(alpha, l))?;
            }
        }
        Ok(acc)
    }

    /// The traction stress determined by the mixed block alone; the plain
    /// block is discarded.
    pub fn traction_part(&self) -> TractionStress {
        let mut out = TractionStress::zeros(self.n, self.m, self.k);
        for r in 0..self.k {
            for alpha in 0..self.m {
                *out.comp_mut(alpha, r) = self.pbar(alpha, r).clone();
            }
        }
        out
    }

    /// Restriction to holonomic arguments: the variational stress with
    ///
    /// * top degree: collapse of the top mixed block,
    /// * middle degrees: plain block plus collapse of the mixed block one
    ///   degree down,
    /// * degree 0: the plain block.
    ///
    /// Defining property: `pair` against the reshaped jet of any section
    /// equals the variational pairing against its full jet.
    pub fn restrict_holonomic(&self) -> VariationalStress {
        let mut out = VariationalStress::zeros(self.n, self.m, self.k);
        for alpha in 0..self.m {
            *out.comp_mut(alpha, 0) = self.p(alpha, 0).clone();
            for l in 1..=self.k {
                let mut s = self.pbar(alpha, l - 1).collapse_last();
                if l < self.k {
                    s = s.add(self.p(alpha, l)).unwrap();
                }
                *out.comp_mut(alpha, l) = s;
            }
        }
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.p(alpha, l).values());
            }
        }
        for r in 0..self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.pbar(alpha, r).values());
            }
        }
        out
    }

    pub fn from_flat(n: usize, m: usize, k: usize, flat: &[f64]) -> Result<Self> {
        let p_dim = jet_flat_dim(n, m, k - 1);
        if flat.len() != p_dim * (1 + n) {
            return Err(mismatch(format!(
                "flat vector has length {}, expected {}",
                flat.len(),
                p_dim * (1 + n)
            )));
        }
        let mut out = Self::zeros(n, m, k);
        let mut cursor = 0;
        for l in 0..k {
            let block = sym_dim(n, l);
            for alpha in 0..m {
                out.p_mut(alpha, l)
                    .values_mut()
                    .copy_from_slice(&flat[cursor..cursor + block]);
                cursor += block;
            }
        }
        for r in 0..k {
            let block = sym_dim(n, r) * n;
            for alpha in 0..m {
                out.pbar_mut(alpha, r)
                    .values_mut()
                    .copy_from_slice(&flat[cursor..cursor + block]);
                cursor += block;
            }
        }
        Ok(out)
    }

    /// Flat plain block in the order-`(k-1)` jet component order.
    pub fn p_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.p(alpha, l).values());
            }
        }
        out
    }

    /// Flat mixed-block slice with last index `j`.
    pub fn pbar_slice_flat(&self, j: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for r in 0..self.k {
            for alpha in 0..self.m {
                let block = self.pbar(alpha, r);
                for idx in degree_layout(self.n, r).indices() {
                    out.push(block.get(idx, j));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        let a = self.p.iter().fold(0.0f64, |acc, c| acc.max(c.max_abs()));
        self.pbar.iter().fold(a, |acc, c| acc.max(c.max_abs()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if (self.n, self.m, self.k) != (other.n, other.m, other.k) {
            return Err(mismatch("non-holonomic stress shapes differ".to_string()));
        }
        let mut out = self.clone();
        for (a, b) in out.p.iter_mut().zip(&other.p) {
            *a = a.sub(b)?;
        }
        for (a, b) in out.pbar.iter_mut().zip(&other.pbar) {
            *a = a.sub(b)?;
        }
        Ok(out)
    }
}
