//! Jets of sections of a rank-`m` vector bundle over an `n`-dimensional
//! base, and first jets of sections of the order-`(k-1)` jet bundle.
//!
//! A [`JetPoint`] of order `r` holds derivative-convention components
//! `u^a_I` for every fiber index `a` and canonical multi-index `I` with
//! `|I| <= r`; components with equal canonical index are stored once.
//!
//! A [`NonHolJetPoint`] holds a value of the once-iterated bundle: a
//! lambda-part (components of a point of the order-`(k-1)` bundle) plus a
//! mu-part of first-slot data `mu^a_{J;j}` that is symmetric in `J` only.
//! Points produced by differentiating an actual section of the base bundle
//! are holonomic: their mu-part collapses to the lambda-part one degree up
//! and the top mu-block is fully symmetric.
//!
//! The stacked component order used by `to_flat`/`from_flat` is
//! degree-major, then fiber index, then canonical multi-index in
//! enumeration order; for non-holonomic points the lambda block precedes
//! the mu block.

use crate::error::{mismatch, Result};
use crate::expr::SmoothMap;
use crate::field::ScalarField;
use crate::multiindex::{degree_layout, sym_dim, MultiIndex};
use crate::symalg::{AlmostSymArray, Convention, SymArray};

/// Dimension of the stacked component vector of an order-`r` jet.
pub fn jet_flat_dim(n: usize, m: usize, order: usize) -> usize {
    (0..=order).map(|l| m * sym_dim(n, l)).sum()
}

/// A point of the order-`r` jet bundle: derivative components per fiber
/// index and degree.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    n: usize,
    m: usize,
    order: usize,
    /// Indexed `l * m + alpha`.
    comps: Vec<SymArray>,
}

impl JetPoint {
    pub fn zeros(n: usize, m: usize, order: usize) -> Self {
        let comps = (0..=order)
            .flat_map(|l| (0..m).map(move |_| SymArray::zeros(n, l, Convention::Derivative)))
            .collect();
        Self { n, m, order, comps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
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

    /// Jet of a section at `x`: the component `u^a_I` is the `I`-th partial
    /// derivative of component `a` of `w` at `x`. Exact whenever `w`
    /// evaluates exactly in series arithmetic.
    pub fn prolong(w: &SmoothMap, x: &[f64], order: usize) -> Result<Self> {
        let series = w.series_at(x, order)?;
        let mut out = Self::zeros(w.n_in(), w.n_out(), order);
        for (alpha, s) in series.iter().enumerate() {
            for l in 0..=order {
                for idx in degree_layout(out.n, l).indices() {
                    out.set(alpha, idx, s.partial_value(idx));
                }
            }
        }
        Ok(out)
    }

    /// Forget components of degree above `order`.
    pub fn truncated(&self, order: usize) -> Self {
        assert!(order <= self.order);
        let mut out = Self::zeros(self.n, self.m, order);
        for l in 0..=order {
            for alpha in 0..self.m {
                *out.comp_mut(alpha, l) = self.comp(alpha, l).clone();
            }
        }
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(jet_flat_dim(self.n, self.m, self.order));
        for l in 0..=self.order {
            for alpha in 0..self.m {
                out.extend_from_slice(self.comp(alpha, l).values());
            }
        }
        out
    }

    pub fn from_flat(n: usize, m: usize, order: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != jet_flat_dim(n, m, order) {
            return Err(mismatch(format!(
                "flat jet vector has length {}, expected {}",
                flat.len(),
                jet_flat_dim(n, m, order)
            )));
        }
        let mut out = Self::zeros(n, m, order);
        let mut cursor = 0;
        for l in 0..=order {
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
        self.comps.iter().fold(0.0, |acc, c| acc.max(c.max_abs()))
    }

    /// Reshape an order-`k` jet as a point of the once-iterated bundle:
    /// the lambda-part copies degrees `<= k-1` and the mu-part reads
    /// `mu^a_{J;j} = u^a_{<Jj>}`. The result is holonomic by construction.
    pub fn to_nonholonomic(&self) -> NonHolJetPoint {
        assert!(self.order >= 1, "need order >= 1 to split off a first jet");
        let k = self.order;
        let mut out = NonHolJetPoint::zeros(self.n, self.m, k);
        for l in 0..k {
            for alpha in 0..self.m {
                *out.lambda_mut(alpha, l) = self.comp(alpha, l).clone();
                let mu = AlmostSymArray::from_fn(self.n, l + 1, Convention::Derivative, |tail, j| {
                    self.get(alpha, &tail.append(j).unwrap())
                });
                *out.mu_mut(alpha, l) = mu;
            }
        }
        out
    }
}

/// A value of the first jet of the order-`(k-1)` jet bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct NonHolJetPoint {
    n: usize,
    m: usize,
    k: usize,
    /// Indexed `l * m + alpha`, degrees `0..k`.
    lambda: Vec<SymArray>,
    /// Indexed `r * m + alpha`; entry has total degree `r + 1`.
    mu: Vec<AlmostSymArray>,
}

impl NonHolJetPoint {
    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        assert!(k >= 1);
        let lambda = (0..k)
            .flat_map(|l| (0..m).map(move |_| SymArray::zeros(n, l, Convention::Derivative)))
            .collect();
        let mu = (0..k)
            .flat_map(|r| {
                (0..m).map(move |_| AlmostSymArray::zeros(n, r + 1, Convention::Derivative))
            })
            .collect();
        Self { n, m, k, lambda, mu }
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

    pub fn lambda(&self, alpha: usize, l: usize) -> &SymArray {
        &self.lambda[l * self.m + alpha]
    }

    pub fn lambda_mut(&mut self, alpha: usize, l: usize) -> &mut SymArray {
        &mut self.lambda[l * self.m + alpha]
    }

    /// The mu-block whose leading multi-index has degree `r`.
    pub fn mu(&self, alpha: usize, r: usize) -> &AlmostSymArray {
        &self.mu[r * self.m + alpha]
    }

    pub fn mu_mut(&mut self, alpha: usize, r: usize) -> &mut AlmostSymArray {
        &mut self.mu[r * self.m + alpha]
    }

    /// The lambda-part as a jet point of order `k - 1`.
    pub fn lambda_jet(&self) -> JetPoint {
        let mut out = JetPoint::zeros(self.n, self.m, self.k - 1);
        for l in 0..self.k {
            for alpha in 0..self.m {
                *out.comp_mut(alpha, l) = self.lambda(alpha, l).clone();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        let a = self.lambda.iter().fold(0.0f64, |acc, c| acc.max(c.max_abs()));
        self.mu.iter().fold(a, |acc, c| acc.max(c.max_abs()))
    }

    /// True when the mu-part is consistent with differentiating a section:
    /// below the top degree it must reproduce the lambda-part one degree
    /// up, and the top block must be fully symmetric. Compared entrywise
    /// within `tol`.
    pub fn is_holonomic(&self, tol: f64) -> bool {
        for r in 0..self.k {
            for alpha in 0..self.m {
                let mu = self.mu(alpha, r);
                if r + 1 <= self.k - 1 {
                    let up = self.lambda(alpha, r + 1);
                    for (tail, j, v) in mu.iter() {
                        if (v - up.get(&tail.append(j).unwrap())).abs() > tol {
                            return false;
                        }
                    }
                } else if mu.symmetry_defect() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.lambda(alpha, l).values());
            }
        }
        for r in 0..self.k {
            for alpha in 0..self.m {
                out.extend_from_slice(self.mu(alpha, r).values());
            }
        }
        out
    }

    pub fn from_flat(n: usize, m: usize, k: usize, flat: &[f64]) -> Result<Self> {
        let lambda_dim = jet_flat_dim(n, m, k - 1);
        let mu_dim = lambda_dim * n;
        if flat.len() != lambda_dim + mu_dim {
            return Err(mismatch(format!(
                "flat vector has length {}, expected {}",
                flat.len(),
                lambda_dim + mu_dim
            )));
        }
        let mut out = Self::zeros(n, m, k);
        let mut cursor = 0;
        for l in 0..k {
            let block = sym_dim(n, l);
            for alpha in 0..m {
                out.lambda_mut(alpha, l)
                    .values_mut()
                    .copy_from_slice(&flat[cursor..cursor + block]);
                cursor += block;
            }
        }
        for r in 0..k {
            let block = sym_dim(n, r) * n;
            for alpha in 0..m {
                out.mu_mut(alpha, r)
                    .values_mut()
                    .copy_from_slice(&flat[cursor..cursor + block]);
                cursor += block;
            }
        }
        Ok(out)
    }
}

/// A field of order-`r` jet components over the base: one scalar field per
/// `(alpha, I)`, not required to come from a single section. This is the
/// kinematic argument of boundary between stress pairings and Stokes-type
/// identities.
#[derive(Clone, Debug)]
pub struct JetSectionField {
    n: usize,
    m: usize,
    order: usize,
    /// Flat in the jet component order (degree-major, then alpha, then
    /// canonical index).
    comps: Vec<ScalarField>,
}

impl JetSectionField {
    pub fn new(n: usize, m: usize, order: usize, comps: Vec<ScalarField>) -> Result<Self> {
        if comps.len() != jet_flat_dim(n, m, order) {
            return Err(mismatch(format!(
                "jet section field needs {} components, got {}",
                jet_flat_dim(n, m, order),
                comps.len()
            )));
        }
        for c in &comps {
            if c.n() != n {
                return Err(mismatch("component field over wrong base dimension".to_string()));
            }
        }
        Ok(Self { n, m, order, comps })
    }

    /// The holonomic jet-section field of an actual section: component
    /// `(alpha, I)` is the `I`-th derivative field of `w^alpha`.
    pub fn from_section(w: &SmoothMap, order: usize) -> Result<Self> {
        let n = w.n_in();
        let m = w.n_out();
        let mut comps = Vec::with_capacity(jet_flat_dim(n, m, order));
        for l in 0..=order {
            for alpha in 0..m {
                let base = ScalarField::from_map_component(w, alpha)?;
                for idx in degree_layout(n, l).indices() {
                    comps.push(base.partial_multi(idx)?);
                }
            }
        }
        Self::new(n, m, order, comps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn component(&self, alpha: usize, idx: &MultiIndex) -> &ScalarField {
        let l = idx.degree();
        let mut offset = 0;
        for d in 0..l {
            offset += self.m * sym_dim(self.n, d);
        }
        offset += alpha * sym_dim(self.n, l);
        offset += degree_layout(self.n, l).offset(idx);
        &self.comps[offset]
    }

    /// Values at `x`, as a jet point of this field's order.
    pub fn eval(&self, x: &[f64]) -> Result<JetPoint> {
        let mut out = JetPoint::zeros(self.n, self.m, self.order);
        for l in 0..=self.order {
            for alpha in 0..self.m {
                for idx in degree_layout(self.n, l).indices() {
                    out.set(alpha, idx, self.component(alpha, idx).value(x)?);
                }
            }
        }
        Ok(out)
    }

    /// First jet at `x`: values in the lambda-part, first partials of every
    /// component in the mu-part. Holonomic iff the component fields are the
    /// derivative fields of one section.
    pub fn prolong1(&self, x: &[f64]) -> Result<NonHolJetPoint> {
        let k = self.order + 1;
        let mut out = NonHolJetPoint::zeros(self.n, self.m, k);
        for l in 0..=self.order {
            for alpha in 0..self.m {
                for idx in degree_layout(self.n, l).indices() {
                    let s = self.component(alpha, idx).series(x, 1)?;
                    out.lambda_mut(alpha, l).set(idx, s.constant_term());
                    for j in 1..=self.n {
                        let unit = MultiIndex::empty(self.n).append(j)?;
                        out.mu_mut(alpha, l).set(idx, j, s.partial_value(&unit));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn mi(n: usize, seq: &[usize]) -> MultiIndex {
        MultiIndex::from_sequence(n, seq).unwrap()
    }

    #[test]
    fn prolong_square_of_first_coordinate() {
        // w(x) = (x^1)^2 over n=2, at x=(1,0), order 2.
        let w = SmoothMap::from_exprs(2, vec![Expr::var(1).pow(2)]).unwrap();
        let u = JetPoint::prolong(&w, &[1.0, 0.0], 2).unwrap();
        assert!((u.get(0, &mi(2, &[])) - 1.0).abs() < 1e-14);
        assert!((u.get(0, &mi(2, &[1])) - 2.0).abs() < 1e-14);
        assert!((u.get(0, &mi(2, &[1, 1])) - 2.0).abs() < 1e-14);
        for idx in [mi(2, &[2]), mi(2, &[1, 2]), mi(2, &[2, 2])] {
            assert_eq!(u.get(0, &idx), 0.0);
        }
    }

    #[test]
    fn prolong_constant_section() {
        let w = SmoothMap::from_exprs(3, vec![Expr::constant(4.0), Expr::constant(-1.0)]).unwrap();
        let u = JetPoint::prolong(&w, &[0.1, 0.2, 0.3], 2).unwrap();
        assert_eq!(u.get(0, &mi(3, &[])), 4.0);
        assert_eq!(u.get(1, &mi(3, &[])), -1.0);
        for l in 1..=2 {
            for alpha in 0..2 {
                assert_eq!(u.comp(alpha, l).max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn prolong_sine_section() {
        let w = SmoothMap::from_exprs(1, vec![Expr::var(1).sin()]).unwrap();
        let u = JetPoint::prolong(&w, &[0.0], 3).unwrap();
        assert!((u.get(0, &mi(1, &[1])) - 1.0).abs() < 1e-14);
        assert!((u.get(0, &mi(1, &[1, 1, 1])) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn prolong_monomials_give_factorial_patterns() {
        // At x = 0 the I-th derivative of the monomial x^J is J! when I = J
        // and 0 for any other I with |I| <= |J|.
        for target in crate::multiindex::enumerate_degree(2, 3) {
            let w = SmoothMap::from_exprs(2, vec![Expr::monomial(&target)]).unwrap();
            let u = JetPoint::prolong(&w, &[0.0, 0.0], 3).unwrap();
            for l in 0..=3 {
                for idx in degree_layout(2, l).indices() {
                    let want = if *idx == target { target.factorial() as f64 } else { 0.0 };
                    assert!((u.get(0, idx) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn prolong_is_exact_and_linear_on_polynomials() {
        let w1 = SmoothMap::from_exprs(
            2,
            vec![Expr::var(1).pow(2) * Expr::var(2) + Expr::var(2).pow(3)],
        )
        .unwrap();
        let w2 = SmoothMap::from_exprs(2, vec![Expr::var(1) * Expr::var(2)]).unwrap();
        let combined = SmoothMap::from_exprs(
            2,
            vec![
                (Expr::var(1).pow(2) * Expr::var(2) + Expr::var(2).pow(3)).scaled(2.0)
                    + (Expr::var(1) * Expr::var(2)).scaled(-3.0),
            ],
        )
        .unwrap();
        let x = [0.4, -1.2];
        let u1 = JetPoint::prolong(&w1, &x, 3).unwrap();
        let u2 = JetPoint::prolong(&w2, &x, 3).unwrap();
        let uc = JetPoint::prolong(&combined, &x, 3).unwrap();
        for l in 0..=3 {
            for alpha in 0..1 {
                for idx in degree_layout(2, l).indices() {
                    let lin = 2.0 * u1.get(alpha, idx) - 3.0 * u2.get(alpha, idx);
                    assert!((uc.get(alpha, idx) - lin).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn include_holonomic_examples() {
        let zero = JetPoint::zeros(2, 1, 2);
        let p = zero.to_nonholonomic();
        assert_eq!(p.max_abs(), 0.0);
        assert!(p.is_holonomic(1e-12));

        // k = 1: a pure reshape of the first jet.
        let w = SmoothMap::from_exprs(2, vec![Expr::var(1) * Expr::var(2)]).unwrap();
        let u = JetPoint::prolong(&w, &[2.0, 3.0], 1).unwrap();
        let p = u.to_nonholonomic();
        assert_eq!(p.lambda(0, 0).values()[0], 6.0);
        assert!((p.mu(0, 0).get(&mi(2, &[]), 1) - 3.0).abs() < 1e-14);
        assert!((p.mu(0, 0).get(&mi(2, &[]), 2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn include_holonomic_top_block_is_symmetric() {
        let w = SmoothMap::from_exprs(
            2,
            vec![Expr::var(1).pow(3) * Expr::var(2).pow(2) + Expr::var(2).pow(4)],
        )
        .unwrap();
        let u = JetPoint::prolong(&w, &[0.6, -0.9], 3).unwrap();
        let p = u.to_nonholonomic();
        for r in 0..3 {
            assert!(p.mu(0, r).symmetry_defect() < 1e-12);
        }
        assert!(p.is_holonomic(1e-10));
    }

    #[test]
    fn non_symmetric_mu_is_not_holonomic() {
        let mut p = NonHolJetPoint::zeros(2, 1, 2);
        p.mu_mut(0, 1).set(&mi(2, &[1]), 2, 1.0);
        // mu^{1;2} != mu^{2;1} at the top block.
        assert!(!p.is_holonomic(1e-9));
    }

    #[test]
    fn jet_section_field_prolongs_to_holonomic_points() {
        let w = SmoothMap::from_exprs(
            2,
            vec![Expr::var(1).pow(2) * Expr::var(2), Expr::var(2).pow(3)],
        )
        .unwrap();
        let lam = JetSectionField::from_section(&w, 1).unwrap();
        let x = [0.8, 0.5];
        let p = lam.prolong1(&x).unwrap();
        assert!(p.is_holonomic(1e-11));
        // Matches the reshaped full jet.
        let u = JetPoint::prolong(&w, &x, 2).unwrap();
        assert_eq!(p.to_flat().len(), u.to_nonholonomic().to_flat().len());
        for (a, b) in p.to_flat().iter().zip(u.to_nonholonomic().to_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_jet_section_has_zero_mu() {
        let n = 2;
        let comps = (0..jet_flat_dim(n, 1, 1))
            .map(|i| ScalarField::constant(n, i as f64 + 1.0))
            .collect();
        let lam = JetSectionField::new(n, 1, 1, comps).unwrap();
        let p = lam.prolong1(&[0.3, 0.4]).unwrap();
        for r in 0..2 {
            assert_eq!(p.mu(0, r).max_abs(), 0.0);
        }
    }

    #[test]
    fn linear_jet_section_mu_is_coefficient_matrix() {
        // Components c_{alpha I}(x) = a . x reproduce their coefficient rows.
        let lam = JetSectionField::new(
            2,
            1,
            0,
            vec![ScalarField::from_expr(2, Expr::var(1).scaled(3.0) + Expr::var(2).scaled(-2.0))
                .unwrap()],
        )
        .unwrap();
        let p = lam.prolong1(&[0.1, 0.9]).unwrap();
        assert!((p.mu(0, 0).get(&mi(2, &[]), 1) - 3.0).abs() < 1e-14);
        assert!((p.mu(0, 0).get(&mi(2, &[]), 2) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn flat_roundtrip() {
        let w = SmoothMap::from_exprs(2, vec![Expr::var(1).pow(2), Expr::var(1) * Expr::var(2)])
            .unwrap();
        let u = JetPoint::prolong(&w, &[1.0, -1.0], 2).unwrap();
        let back = JetPoint::from_flat(2, 2, 2, &u.to_flat()).unwrap();
        assert_eq!(back, u);
        let p = u.to_nonholonomic();
        let back = NonHolJetPoint::from_flat(2, 2, 2, &p.to_flat()).unwrap();
        assert_eq!(back, p);
    }
}
