//! Coordinate changes and covariant transformation of jets and stresses.
//!
//! A [`ChartMap`] is a diffeomorphism given by explicit forward and inverse
//! expression maps on a validity box; no numerical inversion is ever
//! performed, so all transformations of polynomial data are exact. A
//! [`BundleTransition`] is a base-point-dependent invertible matrix acting
//! on fiber components.
//!
//! Jets transform by re-expanding the polynomial representative in the new
//! coordinates ([`transform_jet`]); the matrix of that linear action is a
//! [`JetTransition`], assembled column-by-column from basis jets rather
//! than from explicit higher chain-rule coefficient formulas — one exact
//! code path serves every order. Each stress kind pushes forward by the
//! dual action weighted with the Jacobian determinant, so that the paired
//! differential form is chart-independent:
//!
//! * variational stresses and body forces contract with the jet transition
//!   and the volume factor;
//! * traction stresses pick up one extra factor of the inverse Jacobian on
//!   the contraction index;
//! * non-holonomic stresses additionally see the base-point derivative of
//!   the jet transition through their mixed block, mirroring how first
//!   jets of jet-bundle sections transform.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::expr::{Expr, SmoothMap};
use crate::jet::{jet_flat_dim, JetPoint, NonHolJetPoint};
use crate::multiindex::{degree_layout, sym_dim, MultiIndex};
use crate::series::{seeds, TruncatedSeries};
use crate::stress::values::{BodyForce, NonHolStress, TractionStress, VariationalStress};

const CHART_ROUNDTRIP_TOL: f64 = 1e-9;

/// A coordinate change with explicit inverse, valid on a box.
#[derive(Clone, Debug)]
pub struct ChartMap {
    forward: SmoothMap,
    inverse: SmoothMap,
    bounds: Vec<(f64, f64)>,
}

impl ChartMap {
    /// Build and validate: the inverse must undo the forward map, jet by
    /// jet up to order 5, at the box corners and center, and the Jacobian
    /// determinant must not vanish there.
    pub fn new(forward: SmoothMap, inverse: SmoothMap, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let n = bounds.len();
        if forward.n_in() != n || forward.n_out() != n || inverse.n_in() != n || inverse.n_out() != n
        {
            return Err(mismatch(format!(
                "chart over n={n} needs n->n forward and inverse maps"
            )));
        }
        for (lo, hi) in &bounds {
            if !(lo < hi) {
                return Err(Error::Domain(format!("invalid chart box side [{lo}, {hi}]")));
            }
        }
        let chart = Self { forward, inverse, bounds };
        for x in chart.sample_points() {
            chart.check_roundtrip(&x, 5)?;
            let det = chart.forward.jacobian(&x)?.determinant();
            if det.abs() < 1e-12 {
                return Err(Error::Singular(format!(
                    "chart Jacobian determinant vanishes at {x:?}"
                )));
            }
        }
        Ok(chart)
    }

    fn sample_points(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut points = Vec::with_capacity((1 << n) + 1);
        for mask in 0..(1usize << n) {
            points.push(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.bounds[i].1 } else { self.bounds[i].0 })
                    .collect(),
            );
        }
        points.push(self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect());
        points
    }

    fn check_roundtrip(&self, x: &[f64], order: usize) -> Result<()> {
        let fwd = self.forward.eval_series(&seeds(self.n(), order, x)?)?;
        let back = self.inverse.eval_series(&fwd)?;
        for (i, series) in back.iter().enumerate() {
            let identity = TruncatedSeries::variable(self.n(), order, i + 1, x[i])?;
            let diff = series.sub(&identity)?;
            let worst = diff.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if worst > CHART_ROUNDTRIP_TOL {
                return Err(Error::Singular(format!(
                    "inverse fails to undo the chart at {x:?}: jet residual {worst:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn forward(&self) -> &SmoothMap {
        &self.forward
    }

    pub fn inverse(&self) -> &SmoothMap {
        &self.inverse
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n()
            && x.iter()
                .zip(&self.bounds)
                .all(|(v, (lo, hi))| *v >= lo - 1e-12 && *v <= hi + 1e-12)
    }

    fn require_inside(&self, x: &[f64]) -> Result<()> {
        if !self.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} lies outside the chart validity box"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_inside(x)?;
        self.forward.eval(x)
    }

    pub fn apply_inv(&self, x_prime: &[f64]) -> Result<Vec<f64>> {
        let x = self.inverse.eval(x_prime)?;
        self.require_inside(&x)?;
        Ok(x)
    }

    /// Determinant of the forward Jacobian at the unprimed point.
    pub fn det_jacobian(&self, x: &[f64]) -> Result<f64> {
        self.require_inside(x)?;
        let det = self.forward.jacobian(x)?.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::Singular(format!("chart is singular at {x:?}")));
        }
        Ok(det)
    }

    /// The identity chart on a box.
    pub fn identity(bounds: Vec<(f64, f64)>) -> Self {
        let n = bounds.len();
        Self::new(SmoothMap::identity(n), SmoothMap::identity(n), bounds).unwrap()
    }

    /// The built-in nonlinear shear `x'1 = x1 + (x2)^2`, `x'2 = x2` on a
    /// box around the origin; its inverse is again polynomial.
    pub fn shear2d() -> Self {
        let forward =
            SmoothMap::from_exprs(2, vec![Expr::var(1) + Expr::var(2).pow(2), Expr::var(2)])
                .unwrap();
        let inverse =
            SmoothMap::from_exprs(2, vec![Expr::var(1) - Expr::var(2).pow(2), Expr::var(2)])
                .unwrap();
        Self::new(forward, inverse, vec![(-2.0, 2.0), (-2.0, 2.0)]).unwrap()
    }
}

/// JSON form of a chart: forward and inverse component expressions and the
/// validity box.
#[derive(Serialize, Deserialize)]
pub struct ChartSpec {
    pub forward: Vec<Expr>,
    pub inverse: Vec<Expr>,
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
}

impl ChartSpec {
    pub fn build(self) -> Result<ChartMap> {
        let n = self.bounds.len();
        ChartMap::new(
            SmoothMap::from_exprs(n, self.forward)?,
            SmoothMap::from_exprs(n, self.inverse)?,
            self.bounds,
        )
    }

    pub fn of(chart: &ChartMap) -> Option<Self> {
        let exprs = |map: &SmoothMap| -> Option<Vec<Expr>> {
            map.components()
                .iter()
                .map(|c| match c {
                    crate::expr::MapComponent::Expr(e) => Some(e.clone()),
                    crate::expr::MapComponent::Custom(_) => None,
                })
                .collect()
        };
        Some(Self {
            forward: exprs(chart.forward())?,
            inverse: exprs(chart.inverse())?,
            bounds: chart.bounds().to_vec(),
        })
    }
}

/// Base-point-dependent invertible fiber transition `A(x)`.
#[derive(Clone, Debug)]
pub struct BundleTransition {
    n: usize,
    m: usize,
    /// Row-major `m x m` entries, functions of the unprimed coordinates.
    entries: Vec<Expr>,
}

impl BundleTransition {
    pub fn new(n: usize, m: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(mismatch(format!(
                "fiber transition needs {} entries, got {}",
                m * m,
                entries.len()
            )));
        }
        for e in &entries {
            if e.max_var() > n {
                return Err(mismatch("transition entry references a missing coordinate".to_string()));
            }
        }
        Ok(Self { n, m, entries })
    }

    pub fn identity(n: usize, m: usize) -> Self {
        let entries = (0..m * m)
            .map(|i| Expr::constant(if i % (m + 1) == 0 { 1.0 } else { 0.0 }))
            .collect();
        Self { n, m, entries }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut a = DMatrix::zeros(self.m, self.m);
        for row in 0..self.m {
            for col in 0..self.m {
                a[(row, col)] = self.entries[row * self.m + col].eval(x)?;
            }
        }
        Ok(a)
    }

    fn eval_series(&self, positions: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        self.entries.iter().map(|e| e.eval_series(positions)).collect()
    }
}

/// JSON form of a fiber transition: a row-major expression matrix.
#[derive(Serialize, Deserialize)]
pub struct TransitionSpec {
    pub a: Vec<Vec<Expr>>,
}

impl TransitionSpec {
    pub fn build(self, n: usize) -> Result<BundleTransition> {
        let m = self.a.len();
        let mut entries = Vec::with_capacity(m * m);
        for row in self.a {
            if row.len() != m {
                return Err(mismatch("transition matrix must be square".to_string()));
            }
            entries.extend(row);
        }
        BundleTransition::new(n, m, entries)
    }
}

/// Shared data for transforming jets based at one point `x`.
struct TransformContext {
    n: usize,
    m: usize,
    order: usize,
    x_prime: Vec<f64>,
    /// Unprimed positions as series in the primed deviation.
    positions: Vec<TruncatedSeries>,
    /// Fiber transition entries along `positions`, row-major.
    a_entries: Vec<TruncatedSeries>,
}

fn transform_context(
    chart: &ChartMap,
    a: &BundleTransition,
    x: &[f64],
    order: usize,
) -> Result<TransformContext> {
    chart.require_inside(x)?;
    if a.n != chart.n() {
        return Err(mismatch("fiber transition and chart base dimensions differ".to_string()));
    }
    let n = chart.n();
    let x_prime = chart.forward.eval(x)?;
    let primed_seeds = seeds(n, order, &x_prime)?;
    let positions = chart.inverse.eval_series(&primed_seeds)?;
    for (i, p) in positions.iter().enumerate() {
        if (p.constant_term() - x[i]).abs() > CHART_ROUNDTRIP_TOL {
            return Err(Error::Singular(format!(
                "chart inverse disagrees with the base point: {} vs {}",
                p.constant_term(),
                x[i]
            )));
        }
    }
    let a_entries = a.eval_series(&positions)?;
    Ok(TransformContext { n, m: a.m, order, x_prime, positions, a_entries })
}

impl TransformContext {
    /// Transform one jet based at `x` into the primed chart at `x'`.
    fn transform(&self, u: &JetPoint) -> Result<JetPoint> {
        // Taylor series of the polynomial representative about x.
        let mut w_primed: Vec<TruncatedSeries> = Vec::with_capacity(self.m);
        let mut w_series: Vec<TruncatedSeries> = Vec::with_capacity(self.m);
        for alpha in 0..self.m {
            let mut rep = TruncatedSeries::zero(self.n, self.order);
            for l in 0..=self.order.min(u.order()) {
                for idx in degree_layout(self.n, l).indices() {
                    rep.set_coeff(idx, u.get(alpha, idx) / idx.factorial() as f64)?;
                }
            }
            // Composition with the inverse chart re-centers at x'.
            w_series.push(rep.compose(&self.positions)?);
        }
        for alpha_p in 0..self.m {
            let mut acc = TruncatedSeries::zero(self.n, self.order);
            for alpha in 0..self.m {
                let entry = &self.a_entries[alpha_p * self.m + alpha];
                acc = acc.add(&entry.mul(&w_series[alpha])?)?;
            }
            w_primed.push(acc);
        }
        let mut out = JetPoint::zeros(self.n, self.m, self.order);
        for (alpha_p, series) in w_primed.iter().enumerate() {
            for l in 0..=self.order {
                for idx in degree_layout(self.n, l).indices() {
                    out.set(alpha_p, idx, series.partial_value(idx));
                }
            }
        }
        Ok(out)
    }
}

/// Transform a jet at `x` into the primed chart; returns the primed base
/// point and the transformed jet. Exact for polynomial charts and fiber
/// transitions.
pub fn transform_jet(
    chart: &ChartMap,
    a: &BundleTransition,
    u: &JetPoint,
    x: &[f64],
) -> Result<(Vec<f64>, JetPoint)> {
    let ctx = transform_context(chart, a, x, u.order())?;
    let transformed = ctx.transform(u)?;
    Ok((ctx.x_prime, transformed))
}

/// The matrix of the jet transformation at one base point, acting on
/// stacked derivative components: `u' = G u`.
#[derive(Clone, Debug)]
pub struct JetTransition {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub order: usize,
    m: usize,
    pub matrix: DMatrix<f64>,
}

impl JetTransition {
    pub fn apply(&self, u: &JetPoint) -> Result<JetPoint> {
        let flat = DVector::from_vec(u.to_flat());
        if flat.len() != self.matrix.ncols() {
            return Err(mismatch("jet does not match the transition shape".to_string()));
        }
        let out = &self.matrix * flat;
        JetPoint::from_flat(u.n(), u.m(), u.order(), out.as_slice())
    }

    /// Largest entry in a block that would let lower-degree input
    /// components influence higher-degree outputs; structurally zero.
    pub fn max_forbidden_block(&self, n: usize) -> f64 {
        let mut worst = 0.0f64;
        let mut row_start = 0;
        for row_l in 0..=self.order {
            let rows = self.m * sym_dim(n, row_l);
            let mut col_start = 0;
            for col_l in 0..=self.order {
                let cols = self.m * sym_dim(n, col_l);
                if col_l > row_l {
                    for r in row_start..row_start + rows {
                        for c in col_start..col_start + cols {
                            worst = worst.max(self.matrix[(r, c)].abs());
                        }
                    }
                }
                col_start += cols;
            }
            row_start += rows;
        }
        worst
    }
}

/// Assemble the jet transition matrix by transforming unit basis jets;
/// linearity of the transformation makes this exact.
pub fn jet_transition(
    chart: &ChartMap,
    a: &BundleTransition,
    x: &[f64],
    order: usize,
) -> Result<JetTransition> {
    let ctx = transform_context(chart, a, x, order)?;
    let n = chart.n();
    let m = a.m;
    let dim = jet_flat_dim(n, m, order);
    let mut matrix = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut flat = vec![0.0; dim];
        flat[col] = 1.0;
        let basis = JetPoint::from_flat(n, m, order, &flat)?;
        let image = ctx.transform(&basis)?.to_flat();
        for (row, v) in image.into_iter().enumerate() {
            matrix[(row, col)] = v;
        }
    }
    Ok(JetTransition { x: x.to_vec(), x_prime: ctx.x_prime, order, m, matrix })
}

/// Jet transition at order `order` together with its base-point partial
/// derivatives `d_j G`, extracted from order-`(order+1)` transforms of
/// monomial sections: the transformed jet of a monomial section carries
/// exactly the first-derivative information of the transition applied to
/// its basis value.
pub fn jet_transition_with_partials(
    chart: &ChartMap,
    a: &BundleTransition,
    x: &[f64],
    order: usize,
) -> Result<(JetTransition, Vec<DMatrix<f64>>)> {
    let n = chart.n();
    let m = a.m;
    let high = order + 1;
    let ctx = transform_context(chart, a, x, high)?;
    let dim = jet_flat_dim(n, m, order);
    let forward_jac = chart.forward.jacobian(x)?;

    let mut g = DMatrix::zeros(dim, dim);
    let mut dg: Vec<DMatrix<f64>> = (0..n).map(|_| DMatrix::zeros(dim, dim)).collect();

    // Enumerate the low-order basis (alpha, J) in flat order.
    let mut basis_keys: Vec<(usize, MultiIndex)> = Vec::with_capacity(dim);
    for l in 0..=order {
        for alpha in 0..m {
            for idx in degree_layout(n, l).indices() {
                basis_keys.push((alpha, idx.clone()));
            }
        }
    }

    // First pass: the transition itself. Each column is the low-degree
    // part of the transformed monomial jet with unit component (alpha, J).
    let mut images: Vec<JetPoint> = Vec::with_capacity(dim);
    for (col, (alpha, target)) in basis_keys.iter().enumerate() {
        let mut u = JetPoint::zeros(n, m, high);
        u.set(*alpha, target, 1.0);
        let u_primed = ctx.transform(&u)?;
        for (row, (alpha_p, idx_p)) in basis_keys.iter().enumerate() {
            g[(row, col)] = u_primed.get(*alpha_p, idx_p);
        }
        images.push(u_primed);
    }

    // Second pass: base-point derivatives. Differentiating the transported
    // monomial section along x_j reads the next-degree components of its
    // transformed jet through the chain rule; subtracting the transition
    // applied to the section's own derivative leaves the derivative of the
    // transition.
    for (col, (alpha, target)) in basis_keys.iter().enumerate() {
        let u_primed = &images[col];
        for j in 1..=n {
            let mut transported = DVector::zeros(dim);
            for (row, (alpha_b, idx_b)) in basis_keys.iter().enumerate() {
                if alpha_b == alpha && idx_b.append(j)? == *target {
                    transported[row] = 1.0;
                }
            }
            let g_mu = &g * transported;
            for (row, (alpha_p, idx_p)) in basis_keys.iter().enumerate() {
                let mut total_derivative = 0.0;
                for j_p in 1..=n {
                    let grown = idx_p.append(j_p)?;
                    total_derivative +=
                        forward_jac[(j_p - 1, j - 1)] * u_primed.get(*alpha_p, &grown);
                }
                dg[j - 1][(row, col)] = total_derivative - g_mu[row];
            }
        }
    }

    let transition =
        JetTransition { x: x.to_vec(), x_prime: ctx.x_prime, order, m, matrix: g };
    Ok((transition, dg))
}

/// Transform a first jet of a jet-bundle section into the primed chart.
/// The value block transforms by the jet transition; the first-slot block
/// additionally picks up the base-point derivative of the transition.
pub fn transform_nonhol_jet(
    chart: &ChartMap,
    a: &BundleTransition,
    point: &NonHolJetPoint,
    x: &[f64],
) -> Result<(Vec<f64>, NonHolJetPoint)> {
    let n = chart.n();
    let m = point.m();
    let k = point.k();
    let (transition, dg) = jet_transition_with_partials(chart, a, x, k - 1)?;
    let x_prime = transition.x_prime.clone();
    let inv_jac = chart.inverse.jacobian(&x_prime)?;

    let lambda = DVector::from_vec(lambda_flat(point));
    let lambda_primed = &transition.matrix * &lambda;

    let mu: Vec<DVector<f64>> = (1..=n)
        .map(|j| DVector::from_vec(mu_slice_flat(point, j)))
        .collect();
    let mut mu_primed: Vec<DVector<f64>> = Vec::with_capacity(n);
    for j_p in 1..=n {
        let mut acc = DVector::zeros(lambda.len());
        for j in 1..=n {
            let factor = inv_jac[(j - 1, j_p - 1)];
            if factor != 0.0 {
                acc += factor * (&dg[j - 1] * &lambda + &transition.matrix * &mu[j - 1]);
            }
        }
        mu_primed.push(acc);
    }

    let mut out = NonHolJetPoint::zeros(n, m, k);
    write_lambda_flat(&mut out, lambda_primed.as_slice());
    for (j_p, slice) in mu_primed.iter().enumerate() {
        write_mu_slice_flat(&mut out, j_p + 1, slice.as_slice());
    }
    Ok((x_prime, out))
}

fn lambda_flat(point: &NonHolJetPoint) -> Vec<f64> {
    let mut out = Vec::new();
    for l in 0..point.k() {
        for alpha in 0..point.m() {
            out.extend_from_slice(point.lambda(alpha, l).values());
        }
    }
    out
}

fn write_lambda_flat(point: &mut NonHolJetPoint, flat: &[f64]) {
    let mut cursor = 0;
    for l in 0..point.k() {
        for alpha in 0..point.m() {
            let len = point.lambda(alpha, l).values().len();
            point
                .lambda_mut(alpha, l)
                .values_mut()
                .copy_from_slice(&flat[cursor..cursor + len]);
            cursor += len;
        }
    }
}

fn mu_slice_flat(point: &NonHolJetPoint, j: usize) -> Vec<f64> {
    let n = point.n();
    let mut out = Vec::new();
    for r in 0..point.k() {
        for alpha in 0..point.m() {
            for idx in degree_layout(n, r).indices() {
                out.push(point.mu(alpha, r).get(idx, j));
            }
        }
    }
    out
}

fn write_mu_slice_flat(point: &mut NonHolJetPoint, j: usize, flat: &[f64]) {
    let n = point.n();
    let mut cursor = 0;
    for r in 0..point.k() {
        for alpha in 0..point.m() {
            for pos in 0..sym_dim(n, r) {
                let idx = degree_layout(n, r).indices()[pos].clone();
                point.mu_mut(alpha, r).set(&idx, j, flat[cursor]);
                cursor += 1;
            }
        }
    }
}

/// Push a variational stress given in the primed chart at `x'` back to the
/// unprimed chart: contraction with the jet transition, weighted by the
/// Jacobian determinant, so that the paired volume form is
/// chart-independent. Returns the unprimed base point and stress.
pub fn pushforward_variational(
    chart: &ChartMap,
    a: &BundleTransition,
    s_primed: &VariationalStress,
    x_prime: &[f64],
) -> Result<(Vec<f64>, VariationalStress)> {
    let x = chart.apply_inv(x_prime)?;
    let transition = jet_transition(chart, a, &x, s_primed.k())?;
    let jac_det = chart.det_jacobian(&x)?;
    let flat = DVector::from_vec(s_primed.to_flat());
    let pulled = jac_det * transition.matrix.transpose() * flat;
    let s = VariationalStress::from_flat(s_primed.n(), s_primed.m(), s_primed.k(), pulled.as_slice())?;
    Ok((x, s))
}

/// Push a body force given in the primed chart back to the unprimed chart;
/// same weighting as the variational stress, one jet order lower.
pub fn pushforward_body_force(
    chart: &ChartMap,
    a: &BundleTransition,
    b_primed: &BodyForce,
    x_prime: &[f64],
) -> Result<(Vec<f64>, BodyForce)> {
    let x = chart.apply_inv(x_prime)?;
    let transition = jet_transition(chart, a, &x, b_primed.k() - 1)?;
    let jac_det = chart.det_jacobian(&x)?;
    let flat = DVector::from_vec(b_primed.to_flat());
    let pulled = jac_det * transition.matrix.transpose() * flat;
    let b = BodyForce::from_flat(b_primed.n(), b_primed.m(), b_primed.k(), pulled.as_slice())?;
    Ok((x, b))
}

/// Push a traction stress given in the primed chart back to the unprimed
/// chart: the jet transition acts on the leading block and the inverse
/// Jacobian on the contraction index, so that the paired hyperplane form
/// evaluated on transported frames is chart-independent.
pub fn pushforward_traction(
    chart: &ChartMap,
    a: &BundleTransition,
    tau_primed: &TractionStress,
    x_prime: &[f64],
) -> Result<(Vec<f64>, TractionStress)> {
    let x = chart.apply_inv(x_prime)?;
    let n = chart.n();
    let transition = jet_transition(chart, a, &x, tau_primed.k() - 1)?;
    let jac_det = chart.det_jacobian(&x)?;
    let inv_jac = chart.inverse.jacobian(x_prime)?;

    let primed_slices: Vec<DVector<f64>> = (1..=n)
        .map(|i_p| DVector::from_vec(tau_primed.slice_flat(i_p)))
        .collect();
    let mut slices = Vec::with_capacity(n);
    for i in 1..=n {
        let mut acc = DVector::zeros(primed_slices[0].len());
        for i_p in 1..=n {
            let factor = inv_jac[(i - 1, i_p - 1)];
            if factor != 0.0 {
                acc += factor * transition.matrix.transpose() * &primed_slices[i_p - 1];
            }
        }
        slices.push((jac_det * acc).as_slice().to_vec());
    }
    let tau = TractionStress::from_slices(tau_primed.n(), tau_primed.m(), tau_primed.k(), &slices)?;
    Ok((x, tau))
}

/// Push a non-holonomic stress given in the primed chart back to the
/// unprimed chart: dual to [`transform_nonhol_jet`], so the paired volume
/// form at corresponding points is chart-independent. The mixed block
/// transforms exactly like a traction stress; the plain block additionally
/// absorbs the transition-derivative coupling of the mixed block.
pub fn pushforward_nonholonomic(
    chart: &ChartMap,
    a: &BundleTransition,
    p_primed: &NonHolStress,
    x_prime: &[f64],
) -> Result<(Vec<f64>, NonHolStress)> {
    let x = chart.apply_inv(x_prime)?;
    let n = chart.n();
    let k = p_primed.k();
    let (transition, dg) = jet_transition_with_partials(chart, a, &x, k - 1)?;
    let jac_det = chart.det_jacobian(&x)?;
    let inv_jac = chart.inverse.jacobian(x_prime)?;

    let p_flat = DVector::from_vec(p_primed.p_flat());
    let pbar_slices: Vec<DVector<f64>> = (1..=n)
        .map(|j_p| DVector::from_vec(p_primed.pbar_slice_flat(j_p)))
        .collect();

    let mut plain = transition.matrix.transpose() * &p_flat;
    for j in 1..=n {
        for j_p in 1..=n {
            let factor = inv_jac[(j - 1, j_p - 1)];
            if factor != 0.0 {
                plain += factor * dg[j - 1].transpose() * &pbar_slices[j_p - 1];
            }
        }
    }
    plain *= jac_det;

    let mut mixed_slices: Vec<Vec<f64>> = Vec::with_capacity(n);
    for j in 1..=n {
        let mut acc = DVector::zeros(p_flat.len());
        for j_p in 1..=n {
            let factor = inv_jac[(j - 1, j_p - 1)];
            if factor != 0.0 {
                acc += factor * transition.matrix.transpose() * &pbar_slices[j_p - 1];
            }
        }
        mixed_slices.push((jac_det * acc).as_slice().to_vec());
    }

    let mut flat = plain.as_slice().to_vec();
    // Interleave the mixed slices into the storage layout.
    let low_dim = jet_flat_dim(n, p_primed.m(), k - 1);
    let mut mixed_interleaved = vec![0.0; low_dim * n];
    for (j_minus_1, slice) in mixed_slices.iter().enumerate() {
        for (pos, v) in slice.iter().enumerate() {
            mixed_interleaved[pos * n + j_minus_1] = *v;
        }
    }
    flat.extend_from_slice(&mixed_interleaved);
    let p = NonHolStress::from_flat(n, p_primed.m(), k, &flat)?;
    Ok((x, p))
}
