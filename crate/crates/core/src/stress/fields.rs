//! Smooth stress fields and the first-order operators between them.
//!
//! A field holds one [`ScalarField`] per component, in the same component
//! order as the corresponding value type, so evaluation is a componentwise
//! read. Derivative-taking operators (exterior jet, divergence, induced
//! stress) produce new fields whose components are exact derivative fields
//! of the inputs; on polynomial data every identity below holds to machine
//! precision.

use crate::error::{mismatch, Error, Result};
use crate::field::ScalarField;
use crate::jet::jet_flat_dim;
use crate::multiindex::{degree_layout, sym_dim, MultiIndex};
use crate::stress::values::{BodyForce, NonHolStress, TractionStress, VariationalStress};

fn check_components(n: usize, expect: usize, comps: &[ScalarField], what: &str) -> Result<()> {
    if comps.len() != expect {
        return Err(mismatch(format!(
            "{what} needs {expect} component fields, got {}",
            comps.len()
        )));
    }
    for c in comps {
        if c.n() != n {
            return Err(mismatch(format!("{what}: component field over wrong base dimension")));
        }
    }
    Ok(())
}

/// Field of variational stresses: components in the order-`k` jet component
/// order.
#[derive(Clone, Debug)]
pub struct VarStressField {
    n: usize,
    m: usize,
    k: usize,
    comps: Vec<ScalarField>,
}

impl VarStressField {
    pub fn new(n: usize, m: usize, k: usize, comps: Vec<ScalarField>) -> Result<Self> {
        check_components(n, jet_flat_dim(n, m, k), &comps, "variational stress field")?;
        Ok(Self { n, m, k, comps })
    }

    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        let comps = (0..jet_flat_dim(n, m, k)).map(|_| ScalarField::zero(n)).collect();
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

    pub fn component(&self, alpha: usize, idx: &MultiIndex) -> &ScalarField {
        &self.comps[var_offset(self.n, self.m, alpha, idx)]
    }

    pub fn eval(&self, x: &[f64]) -> Result<VariationalStress> {
        let flat: Vec<f64> = self.comps.iter().map(|c| c.value(x)).collect::<Result<_>>()?;
        VariationalStress::from_flat(self.n, self.m, self.k, &flat)
    }
}

fn var_offset(n: usize, m: usize, alpha: usize, idx: &MultiIndex) -> usize {
    let l = idx.degree();
    let mut offset = 0;
    for d in 0..l {
        offset += m * sym_dim(n, d);
    }
    offset + alpha * sym_dim(n, l) + degree_layout(n, l).offset(idx)
}

/// Field of body forces: order-`(k-1)` jet component order.
#[derive(Clone, Debug)]
pub struct BodyForceField {
    n: usize,
    m: usize,
    k: usize,
    comps: Vec<ScalarField>,
}

impl BodyForceField {
    pub fn new(n: usize, m: usize, k: usize, comps: Vec<ScalarField>) -> Result<Self> {
        check_components(n, jet_flat_dim(n, m, k - 1), &comps, "body force field")?;
        Ok(Self { n, m, k, comps })
    }

    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        let comps = (0..jet_flat_dim(n, m, k - 1)).map(|_| ScalarField::zero(n)).collect();
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

    pub fn component(&self, alpha: usize, idx: &MultiIndex) -> &ScalarField {
        &self.comps[var_offset(self.n, self.m, alpha, idx)]
    }

    pub fn eval(&self, x: &[f64]) -> Result<BodyForce> {
        let flat: Vec<f64> = self.comps.iter().map(|c| c.value(x)).collect::<Result<_>>()?;
        BodyForce::from_flat(self.n, self.m, self.k, &flat)
    }
}

/// Field of traction stresses. Component order: leading degree block `r`,
/// then fiber index, then canonical `J`, then the contraction index.
#[derive(Clone, Debug)]
pub struct TractionField {
    n: usize,
    m: usize,
    k: usize,
    comps: Vec<ScalarField>,
}

impl TractionField {
    pub fn new(n: usize, m: usize, k: usize, comps: Vec<ScalarField>) -> Result<Self> {
        check_components(n, jet_flat_dim(n, m, k - 1) * n, &comps, "traction stress field")?;
        Ok(Self { n, m, k, comps })
    }

    pub fn zeros(n: usize, m: usize, k: usize) -> Self {
        let comps = (0..jet_flat_dim(n, m, k - 1) * n)
            .map(|_| ScalarField::zero(n))
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

    fn offset(&self, alpha: usize, tail: &MultiIndex, i: usize) -> usize {
        let r = tail.degree();
        let mut offset = 0;
        for d in 0..r {
            offset += self.m * sym_dim(self.n, d) * self.n;
        }
        offset += alpha * sym_dim(self.n, r) * self.n;
        offset + degree_layout(self.n, r).offset(tail) * self.n + (i - 1)
    }

    pub fn component(&self, alpha: usize, tail: &MultiIndex, i: usize) -> &ScalarField {
        &self.comps[self.offset(alpha, tail, i)]
    }

    pub fn set_component(&mut self, alpha: usize, tail: &MultiIndex, i: usize, f: ScalarField) {
        let off = self.offset(alpha, tail, i);
        self.comps[off] = f;
    }

    pub fn eval(&self, x: &[f64]) -> Result<TractionStress> {
        let mut out = TractionStress::zeros(self.n, self.m, self.k);
        for r in 0..self.k {
            for alpha in 0..self.m {
                for idx in degree_layout(self.n, r).indices() {
                    for i in 1..=self.n {
                        out.set(alpha, idx, i, self.component(alpha, idx, i).value(x)?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// The first-order operator turning a traction field into the
    /// non-holonomic field whose pairing with the first jet of any
    /// jet-bundle section is the exterior derivative of the paired
    /// hyperplane form: plain block `sum_j d_j tau_a^{Jj}`, mixed block a
    /// copy of `tau`.
    pub fn exterior_jet(&self) -> Result<NonHolStressField> {
        let mut p = Vec::with_capacity(jet_flat_dim(self.n, self.m, self.k - 1));
        for r in 0..self.k {
            for alpha in 0..self.m {
                for idx in degree_layout(self.n, r).indices() {
                    let terms: Vec<ScalarField> = (1..=self.n)
                        .map(|j| self.component(alpha, idx, j).partial(j))
                        .collect::<Result<_>>()?;
                    p.push(ScalarField::sum(self.n, terms)?);
                }
            }
        }
        NonHolStressField::from_parts(self.n, self.m, self.k, p, self.comps.clone())
    }

    /// Restriction of the exterior jet to holonomic arguments, as a
    /// variational stress field.
    pub fn reduced_exterior_jet(&self) -> Result<VarStressField> {
        Ok(self.exterior_jet()?.restrict_holonomic())
    }
}

/// Field of non-holonomic stresses; plain block then mixed block.
#[derive(Clone, Debug)]
pub struct NonHolStressField {
    n: usize,
    m: usize,
    k: usize,
    p: Vec<ScalarField>,
    pbar: Vec<ScalarField>,
}

impl NonHolStressField {
    pub fn from_parts(
        n: usize,
        m: usize,
        k: usize,
        p: Vec<ScalarField>,
        pbar: Vec<ScalarField>,
    ) -> Result<Self> {
        check_components(n, jet_flat_dim(n, m, k - 1), &p, "non-holonomic plain block")?;
        check_components(n, jet_flat_dim(n, m, k - 1) * n, &pbar, "non-holonomic mixed block")?;
        Ok(Self { n, m, k, p, pbar })
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

    pub fn p_component(&self, alpha: usize, idx: &MultiIndex) -> &ScalarField {
        &self.p[var_offset(self.n, self.m, alpha, idx)]
    }

    pub fn pbar_component(&self, alpha: usize, tail: &MultiIndex, j: usize) -> &ScalarField {
        let r = tail.degree();
        let mut offset = 0;
        for d in 0..r {
            offset += self.m * sym_dim(self.n, d) * self.n;
        }
        offset += alpha * sym_dim(self.n, r) * self.n;
        offset += degree_layout(self.n, r).offset(tail) * self.n + (j - 1);
        &self.pbar[offset]
    }

    pub fn eval(&self, x: &[f64]) -> Result<NonHolStress> {
        let mut flat: Vec<f64> = Vec::with_capacity(self.p.len() + self.pbar.len());
        for c in self.p.iter().chain(&self.pbar) {
            flat.push(c.value(x)?);
        }
        NonHolStress::from_flat(self.n, self.m, self.k, &flat)
    }

    /// The traction field read off the mixed block.
    pub fn traction_field(&self) -> TractionField {
        TractionField { n: self.n, m: self.m, k: self.k, comps: self.pbar.clone() }
    }

    /// The induced non-holonomic field of a force system: plain block
    /// `sum_j d_j tau_a^{Jj} + b_a^J`, mixed block a copy of `tau`.
    /// Its divergence is `-b` and its traction part is `tau`.
    pub fn from_force_system(b: &BodyForceField, tau: &TractionField) -> Result<Self> {
        if (b.n, b.m, b.k) != (tau.n, tau.m, tau.k) {
            return Err(mismatch("body force and traction field shapes differ".to_string()));
        }
        let dtau = tau.exterior_jet()?;
        let p: Vec<ScalarField> = dtau
            .p
            .iter()
            .zip(&b.comps)
            .map(|(d, bc)| d.add(bc))
            .collect::<Result<_>>()?;
        Self::from_parts(b.n, b.m, b.k, p, tau.comps.clone())
    }

    /// Divergence as a field: components `sum_j d_j Pbar_a^{Jj} - P_a^J`.
    /// The mixed slot of the defining combination vanishes identically;
    /// [`Self::divergence_at`] checks that at evaluation time.
    pub fn divergence(&self) -> Result<BodyForceField> {
        let dtau = self.traction_field().exterior_jet()?;
        let comps: Vec<ScalarField> = dtau
            .p
            .iter()
            .zip(&self.p)
            .map(|(d, p)| d.sub(p))
            .collect::<Result<_>>()?;
        BodyForceField::new(self.n, self.m, self.k, comps)
    }

    /// Divergence value at `x`, computed from the full defining
    /// combination (exterior jet of the traction part, minus the field);
    /// errors if the residual mixed slot fails to vanish within `tol`.
    pub fn divergence_at(&self, x: &[f64], tol: f64) -> Result<BodyForce> {
        let full = self.traction_field().exterior_jet()?.eval(x)?.sub(&self.eval(x)?)?;
        let residual = full.traction_part().max_abs();
        if residual > tol {
            return Err(Error::Eval(format!(
                "divergence mixed slot fails to vanish: |residual| = {residual:e}"
            )));
        }
        BodyForce::from_flat(self.n, self.m, self.k, &full.p_flat())
    }

    /// Restriction to holonomic arguments, componentwise on fields: top
    /// degree collapses the top mixed block, middle degrees add the
    /// collapse of the mixed block one degree down to the plain block,
    /// degree 0 copies the plain block.
    pub fn restrict_holonomic(&self) -> VarStressField {
        let mut comps = Vec::with_capacity(jet_flat_dim(self.n, self.m, self.k));
        for l in 0..=self.k {
            for alpha in 0..self.m {
                for idx in degree_layout(self.n, l).indices() {
                    let mut terms: Vec<ScalarField> = Vec::new();
                    if l < self.k {
                        terms.push(self.p_component(alpha, idx).clone());
                    }
                    if l >= 1 {
                        for j in idx.support() {
                            let tail = idx.remove(j).unwrap();
                            terms.push(self.pbar_component(alpha, &tail, j).clone());
                        }
                    }
                    comps.push(ScalarField::sum(self.n, terms).unwrap());
                }
            }
        }
        VarStressField { n: self.n, m: self.m, k: self.k, comps }
    }
}

/// The variational stress field determined by a force system: the
/// restriction to holonomic arguments of the induced non-holonomic field.
pub fn var_stress_from_force_system(
    b: &BodyForceField,
    tau: &TractionField,
) -> Result<VarStressField> {
    Ok(NonHolStressField::from_force_system(b, tau)?.restrict_holonomic())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, SmoothMap};
    use crate::jet::{JetPoint, JetSectionField};

    fn mi(n: usize, seq: &[usize]) -> MultiIndex {
        MultiIndex::from_sequence(n, seq).unwrap()
    }

    fn expr_traction(n: usize, m: usize, k: usize, f: impl Fn(usize, &MultiIndex, usize) -> Expr) -> TractionField {
        let mut tau = TractionField::zeros(n, m, k);
        for r in 0..k {
            for alpha in 0..m {
                for idx in degree_layout(n, r).indices() {
                    for i in 1..=n {
                        tau.set_component(
                            alpha,
                            idx,
                            i,
                            ScalarField::from_expr(n, f(alpha, idx, i)).unwrap(),
                        );
                    }
                }
            }
        }
        tau
    }

    #[test]
    fn exterior_jet_of_constant_field() {
        let tau = expr_traction(2, 1, 2, |_, idx, i| {
            Expr::constant((idx.degree() * 2 + i) as f64)
        });
        let d = tau.exterior_jet().unwrap();
        let x = [0.3, 0.8];
        let value = d.eval(&x).unwrap();
        for l in 0..2 {
            assert_eq!(value.p(0, l).max_abs(), 0.0);
        }
        assert_eq!(value.traction_part(), tau.eval(&x).unwrap());
    }

    #[test]
    fn exterior_jet_of_identity_vector_density() {
        // n=2, k=1, tau^{;j} = x^j: the plain block is the divergence, 2.
        let tau = expr_traction(2, 1, 1, |_, _, i| Expr::var(i));
        let d = tau.exterior_jet().unwrap();
        let value = d.eval(&[5.0, -3.0]).unwrap();
        assert!((value.p(0, 0).values()[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exterior_jet_satisfies_product_rule_identity() {
        // Pairing the exterior jet with the first jet of a jet-bundle
        // section equals the divergence of the paired coefficients,
        // computed independently through scalar-field calculus.
        let n = 2;
        let (m, k) = (1, 2);
        let tau = expr_traction(n, m, k, |_, idx, i| {
            Expr::monomial(idx) * Expr::var(i).pow(2) + Expr::var(1) * Expr::var(2).scaled(0.5)
        });
        // A non-holonomic polynomial jet-section: independent components.
        let comps: Vec<ScalarField> = (0..jet_flat_dim(n, m, k - 1))
            .map(|c| {
                ScalarField::from_expr(
                    n,
                    Expr::var(1).pow((c % 3) as u32) * Expr::var(2).pow((c % 2 + 1) as u32)
                        + Expr::constant(c as f64),
                )
                .unwrap()
            })
            .collect();
        let lam = JetSectionField::new(n, m, k - 1, comps).unwrap();

        let d = tau.exterior_jet().unwrap();
        for x in [[0.2, 0.9], [-0.7, 0.4], [1.3, -1.1]] {
            let lhs = d.eval(&x).unwrap().pair(&lam.prolong1(&x).unwrap()).unwrap();

            // d(tau . lambda): sum_i d_i of the coefficient fields.
            let mut coeff_fields: Vec<ScalarField> = Vec::new();
            for i in 1..=n {
                let mut terms = Vec::new();
                for r in 0..k {
                    for alpha in 0..m {
                        for idx in degree_layout(n, r).indices() {
                            terms.push(
                                tau.component(alpha, idx, i)
                                    .product(lam.component(alpha, idx))
                                    .unwrap(),
                            );
                        }
                    }
                }
                coeff_fields.push(ScalarField::sum(n, terms).unwrap());
            }
            let mut rhs = 0.0;
            for (i, c) in coeff_fields.iter().enumerate() {
                rhs += c.partial(i + 1).unwrap().value(&x).unwrap();
            }
            assert!((lhs - rhs).abs() < 1e-11, "x={x:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn divergence_of_exterior_jet_vanishes() {
        let tau = expr_traction(2, 1, 2, |alpha, idx, i| {
            Expr::monomial(idx).scaled((alpha + i) as f64) + Expr::var(2).pow(3).scaled(0.25)
        });
        let d = tau.exterior_jet().unwrap();
        let div = d.divergence().unwrap();
        for x in [[0.1, 0.1], [0.8, -0.6]] {
            assert!(div.eval(&x).unwrap().max_abs() < 1e-12);
        }
        // And through the checked entry point.
        assert!(d.divergence_at(&[0.5, 0.5], 1e-12).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn divergence_of_constant_plain_block() {
        let mut p_comps = Vec::new();
        for _ in 0..jet_flat_dim(2, 1, 1) {
            p_comps.push(ScalarField::constant(2, 3.0));
        }
        let pbar_comps = (0..jet_flat_dim(2, 1, 1) * 2)
            .map(|_| ScalarField::zero(2))
            .collect();
        let field = NonHolStressField::from_parts(2, 1, 2, p_comps, pbar_comps).unwrap();
        let div = field.divergence_at(&[0.4, 0.2], 1e-14).unwrap();
        for l in 0..2 {
            for (_, v) in div.comp(0, l).iter() {
                assert_eq!(v, -3.0);
            }
        }
    }

    #[test]
    fn force_system_roundtrip() {
        // divergence(induced(b, tau)) = -b and traction part = tau.
        let n = 2;
        let (m, k) = (2, 2);
        let tau = expr_traction(n, m, k, |alpha, idx, i| {
            Expr::monomial(idx) * Expr::var(i) + Expr::constant(alpha as f64)
        });
        let b_comps: Vec<ScalarField> = (0..jet_flat_dim(n, m, k - 1))
            .map(|c| {
                ScalarField::from_expr(n, Expr::var(1).pow(2).scaled(c as f64) - Expr::var(2))
                    .unwrap()
            })
            .collect();
        let b = BodyForceField::new(n, m, k, b_comps).unwrap();
        let induced = NonHolStressField::from_force_system(&b, &tau).unwrap();
        for x in [[0.25, 0.75], [-0.5, 0.1]] {
            let div = induced.divergence_at(&x, 1e-12).unwrap();
            let minus_b = b.eval(&x).unwrap().scale(-1.0);
            assert!(div.sub(&minus_b).unwrap().max_abs() < 1e-12);
            assert_eq!(
                induced.eval(&x).unwrap().traction_part(),
                tau.eval(&x).unwrap()
            );
        }
    }

    #[test]
    fn induced_field_with_zero_body_force_is_exterior_jet() {
        let n = 2;
        let tau = expr_traction(n, 1, 2, |_, idx, i| Expr::monomial(idx) * Expr::var(i));
        let b = BodyForceField::zeros(n, 1, 2);
        let induced = NonHolStressField::from_force_system(&b, &tau).unwrap();
        let dtau = tau.exterior_jet().unwrap();
        let x = [0.6, -0.2];
        assert!(induced
            .eval(&x)
            .unwrap()
            .sub(&dtau.eval(&x).unwrap())
            .unwrap()
            .max_abs()
            .abs()
            < 1e-13);
    }

    #[test]
    fn induced_field_with_zero_traction_has_plain_block_b() {
        let n = 2;
        let b_comps: Vec<ScalarField> = (0..jet_flat_dim(n, 1, 1))
            .map(|c| ScalarField::constant(n, c as f64 + 0.5))
            .collect();
        let b = BodyForceField::new(n, 1, 2, b_comps).unwrap();
        let tau = TractionField::zeros(n, 1, 2);
        let induced = NonHolStressField::from_force_system(&b, &tau).unwrap();
        let x = [0.0, 0.0];
        let value = induced.eval(&x).unwrap();
        assert_eq!(value.p_flat(), b.eval(&x).unwrap().to_flat());
        assert_eq!(value.traction_part().max_abs(), 0.0);
    }

    #[test]
    fn reduced_exterior_jet_componentwise() {
        // Constant tau: only collapse terms survive.
        let tau = expr_traction(2, 1, 2, |_, idx, i| {
            Expr::constant((degree_layout(2, idx.degree()).offset(idx) * 2 + i) as f64)
        });
        let reduced = tau.reduced_exterior_jet().unwrap();
        let x = [0.9, 0.4];
        let s = reduced.eval(&x).unwrap();
        let tau_value = tau.eval(&x).unwrap();
        // Top degree: collapse of the top block.
        for idx in degree_layout(2, 2).indices() {
            let want: f64 = idx
                .support()
                .map(|j| tau_value.get(0, &idx.remove(j).unwrap(), j))
                .sum();
            assert!((s.get(0, idx) - want).abs() < 1e-13);
        }
        // Degree zero: divergence of the degree-zero slice, zero here.
        assert_eq!(s.comp(0, 0).values()[0], 0.0);
    }

    #[test]
    fn reduced_exterior_jet_k1_is_classical_divergence() {
        let tau = expr_traction(2, 1, 1, |_, _, i| {
            if i == 1 {
                Expr::var(1).pow(2) * Expr::var(2)
            } else {
                Expr::var(2).pow(2)
            }
        });
        let reduced = tau.reduced_exterior_jet().unwrap();
        let x = [1.5, -0.5];
        let s = reduced.eval(&x).unwrap();
        // d_1(x^2 y) + d_2(y^2) = 2xy + 2y.
        let want = 2.0 * x[0] * x[1] + 2.0 * x[1];
        assert!((s.comp(0, 0).values()[0] - want).abs() < 1e-12);
        // Degree-1 block equals the traction components themselves.
        for idx in degree_layout(2, 1).indices() {
            let j = idx.support().next().unwrap();
            let want = tau.eval(&x).unwrap().get(0, &mi(2, &[]), j);
            assert!((s.get(0, idx) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_exterior_jet_duality() {
        // pair(reduced(tau), full jet) = d(tau . jet-section of w): checked
        // against the exterior-jet identity with the holonomic section.
        let n = 2;
        let k = 2;
        let tau = expr_traction(n, 1, k, |_, idx, i| {
            Expr::monomial(idx) * Expr::var(i).pow(2).scaled(0.5) + Expr::var(2).scaled(-1.0)
        });
        let w = SmoothMap::from_exprs(
            n,
            vec![Expr::var(1).pow(2) * Expr::var(2).pow(2) + Expr::var(1).pow(3)],
        )
        .unwrap();
        let lam = JetSectionField::from_section(&w, k - 1).unwrap();
        let reduced = tau.reduced_exterior_jet().unwrap();
        let d = tau.exterior_jet().unwrap();
        for x in [[0.3, 0.6], [-0.4, 1.2]] {
            let via_var = reduced
                .eval(&x)
                .unwrap()
                .pair(&JetPoint::prolong(&w, &x, k).unwrap())
                .unwrap();
            let via_nonhol = d.eval(&x).unwrap().pair(&lam.prolong1(&x).unwrap()).unwrap();
            assert!((via_var - via_nonhol).abs() < 1e-11);
        }
    }

    #[test]
    fn force_system_kernel_element_yields_same_variational_stress() {
        // Two tractions differing by a part whose collapse vanishes at
        // every degree, with compensating body force, determine the same
        // variational stress field.
        let n = 2;
        let k = 2;
        let tau1 = expr_traction(n, 1, k, |_, idx, i| {
            Expr::monomial(idx) * Expr::var(i) + Expr::constant(1.0)
        });
        // Collapse-free perturbation: antisymmetric in the top block,
        // varying over the base.
        let g = Expr::var(1) * Expr::var(2).pow(2);
        let mut delta = TractionField::zeros(n, 1, k);
        delta.set_component(0, &mi(n, &[1]), 2, ScalarField::from_expr(n, g.clone()).unwrap());
        delta.set_component(0, &mi(n, &[2]), 1, ScalarField::from_expr(n, -g).unwrap());
        let tau2 = {
            let mut comps = Vec::new();
            for r in 0..k {
                for alpha in 0..1 {
                    for idx in degree_layout(n, r).indices() {
                        for i in 1..=n {
                            comps.push(
                                tau1.component(alpha, idx, i)
                                    .add(delta.component(alpha, idx, i))
                                    .unwrap(),
                            );
                        }
                    }
                }
            }
            TractionField::new(n, 1, k, comps).unwrap()
        };
        // Compensating body force: minus the plain block of the exterior
        // jet of the perturbation.
        let ddelta = delta.exterior_jet().unwrap();
        let b1 = BodyForceField::zeros(n, 1, k);
        let b2_comps: Vec<ScalarField> = (0..jet_flat_dim(n, 1, k - 1))
            .map(|c| {
                let l = if c == 0 { 0 } else { 1 };
                let idx_pos = if c == 0 { 0 } else { c - 1 };
                let idx = degree_layout(n, l).indices()[idx_pos].clone();
                ddelta.p_component(0, &idx).scale(-1.0)
            })
            .collect();
        let b2 = BodyForceField::new(n, 1, k, b2_comps).unwrap();

        let s1 = var_stress_from_force_system(&b1, &tau1).unwrap();
        let s2 = var_stress_from_force_system(&b2, &tau2).unwrap();
        for x in [[0.2, 0.3], [0.7, -0.6], [-1.1, 0.9]] {
            let d = s1.eval(&x).unwrap().sub(&s2.eval(&x).unwrap()).unwrap();
            assert!(d.max_abs() < 1e-12, "x={x:?}");
        }
        // The perturbation itself is nonzero.
        assert!(delta.eval(&[0.5, 0.5]).unwrap().max_abs() > 0.1);
    }
}
