//! Elastic constitutive evaluation: stresses as gradients of scalar
//! density potentials in the jet components.
//!
//! A potential is a smooth scalar function of the stacked components of a
//! jet point (or of a first jet of a jet-bundle section), received in the
//! derivative convention, i.e. as the physical partial-derivative values in
//! their flat component order. The returned stress holds the gradient in
//! those canonical coordinates, which is exactly the dual convention the
//! pairings expect: since a canonical component of multiplicity
//! `|I|!/I!` stands for that many dense components, the canonical gradient
//! already carries the factor `|I|!/I!` relative to the dense gradient.

use crate::error::{mismatch, Result};
use crate::expr::SmoothMap;
use crate::jet::{jet_flat_dim, JetPoint, NonHolJetPoint};
use crate::multiindex::MultiIndex;
use crate::series::seeds;
use crate::stress::values::{NonHolStress, VariationalStress};

fn gradient(potential: &SmoothMap, at: &[f64]) -> Result<Vec<f64>> {
    if potential.n_out() != 1 {
        return Err(mismatch("a potential must have one output".to_string()));
    }
    if potential.n_in() != at.len() {
        return Err(mismatch(format!(
            "potential expects {} components, jet provides {}",
            potential.n_in(),
            at.len()
        )));
    }
    let n = at.len();
    let series = potential.eval_series(&seeds(n, 1, at)?)?.remove(0);
    (1..=n)
        .map(|j| {
            let unit = MultiIndex::empty(n).append(j)?;
            Ok(series.partial_value(&unit))
        })
        .collect()
}

/// Variational stress of a potential at a jet point: `S_a^I` is the partial
/// derivative of the potential with respect to the canonical component
/// `u^a_I`.
pub fn constitutive_variational(
    potential: &SmoothMap,
    u: &JetPoint,
) -> Result<VariationalStress> {
    let grad = gradient(potential, &u.to_flat())?;
    VariationalStress::from_flat(u.n(), u.m(), u.order(), &grad)
}

/// Non-holonomic stress of a potential at a first jet of a jet-bundle
/// section: the plain block is the gradient in the value components, the
/// mixed block the gradient in the first-slot components.
pub fn constitutive_nonholonomic(
    potential: &SmoothMap,
    point: &NonHolJetPoint,
) -> Result<NonHolStress> {
    let grad = gradient(potential, &point.to_flat())?;
    NonHolStress::from_flat(point.n(), point.m(), point.k(), &grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, SmoothMap};
    use crate::oracle::central_gradient;

    fn quadratic_potential(dim: usize) -> SmoothMap {
        let expr = Expr::Add(
            (1..=dim)
                .map(|i| Expr::var(i).pow(2).scaled(0.5))
                .collect(),
        );
        SmoothMap::from_exprs(dim, vec![expr]).unwrap()
    }

    #[test]
    fn quadratic_potential_returns_components() {
        let w = SmoothMap::from_exprs(2, vec![Expr::var(1).pow(2) * Expr::var(2)]).unwrap();
        let u = JetPoint::prolong(&w, &[1.2, -0.3], 2).unwrap();
        let dim = jet_flat_dim(2, 1, 2);
        let s = constitutive_variational(&quadratic_potential(dim), &u).unwrap();
        for (a, b) in s.to_flat().iter().zip(u.to_flat()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn potential_without_top_degree_yields_no_top_stress() {
        // Material of lower order: top-degree block vanishes identically.
        let dim_low = jet_flat_dim(2, 1, 1);
        let expr = Expr::Add(
            (1..=dim_low)
                .map(|i| Expr::var(i).pow(3).scaled(1.0 / 3.0))
                .collect(),
        );
        let potential = SmoothMap::from_exprs(jet_flat_dim(2, 1, 2), vec![expr]).unwrap();
        let w = SmoothMap::from_exprs(2, vec![Expr::var(1) * Expr::var(2).pow(2)]).unwrap();
        let u = JetPoint::prolong(&w, &[0.4, 0.9], 2).unwrap();
        let s = constitutive_variational(&potential, &u).unwrap();
        assert_eq!(s.degree_max_abs(2), 0.0);
        assert!(s.degree_max_abs(1) > 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let dim = jet_flat_dim(2, 1, 2);
        // A non-trivial polynomial potential mixing components.
        let expr = Expr::var(1) * Expr::var(2).pow(2)
            + Expr::var(dim).pow(3).scaled(0.25)
            + Expr::var(2) * Expr::var(dim - 1).scaled(-2.0);
        let potential = SmoothMap::from_exprs(dim, vec![expr]).unwrap();
        let w = SmoothMap::from_exprs(2, vec![Expr::var(1).pow(2) + Expr::var(2).pow(2)]).unwrap();
        let u = JetPoint::prolong(&w, &[0.8, -0.6], 2).unwrap();
        let s = constitutive_variational(&potential, &u).unwrap();
        let fd = central_gradient(
            |flat| potential.eval(flat).map(|v| v[0]),
            &u.to_flat(),
            1e-4,
        )
        .unwrap();
        for (a, b) in s.to_flat().iter().zip(fd) {
            let scale = 1.0f64.max(a.abs());
            assert!((a - b).abs() / scale < 1e-6);
        }
    }

    #[test]
    fn nonholonomic_potential_pulled_back_from_holonomic_one() {
        // Phi = phi composed with the holonomic reshaping: at holonomic
        // points the restricted stress equals the variational one.
        let (n, m, k) = (2, 1, 2);
        let var_dim = jet_flat_dim(n, m, k);
        let phi_expr = Expr::var(1) * Expr::var(var_dim)
            + Expr::var(2).pow(2).scaled(0.5)
            + Expr::var(3) * Expr::var(4).scaled(-1.5);
        let phi = SmoothMap::from_exprs(var_dim, vec![phi_expr.clone()]).unwrap();

        // The reshaping sends the flat non-holonomic components onto the
        // flat jet components: lambda gives degrees < k, the symmetrized
        // top mu-block gives degree k. Express it as a composition.
        let nonhol_dim = jet_flat_dim(n, m, k - 1) * (1 + n);
        let u_probe = {
            let w = SmoothMap::from_exprs(
                n,
                vec![Expr::var(1).pow(2) * Expr::var(2) + Expr::var(2).pow(3)],
            )
            .unwrap();
            JetPoint::prolong(&w, &[0.7, 0.45], k).unwrap()
        };
        let point = u_probe.to_nonholonomic();

        // Build the substitution expressions by matching flat layouts.
        let zero_jet = JetPoint::zeros(n, m, k);
        let mut subs: Vec<Expr> = Vec::new();
        for (slot, _) in zero_jet.to_flat().iter().enumerate() {
            // Locate the slot's (alpha, index) by probing.
            let mut flat = vec![0.0; zero_jet.to_flat().len()];
            flat[slot] = 1.0;
            let probe = JetPoint::from_flat(n, m, k, &flat).unwrap();
            let reshaped = probe.to_nonholonomic().to_flat();
            // u_slot = average of the non-holonomic slots that reproduce it.
            let carriers: Vec<usize> = reshaped
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect();
            let terms: Vec<Expr> = carriers
                .iter()
                .map(|&i| Expr::var(i + 1).scaled(1.0 / carriers.len() as f64))
                .collect();
            subs.push(Expr::Add(terms));
        }
        let phi_pullback = SmoothMap::from_exprs(
            nonhol_dim,
            vec![Expr::Compose { outer: Box::new(phi_expr), args: subs }],
        )
        .unwrap();

        let nh_stress = constitutive_nonholonomic(&phi_pullback, &point).unwrap();
        let var_stress = constitutive_variational(&phi, &u_probe).unwrap();
        let restricted = nh_stress.restrict_holonomic();
        assert!(restricted.sub(&var_stress).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn zero_potential_gives_zero_stress() {
        let (n, m, k) = (2, 1, 2);
        let dim = jet_flat_dim(n, m, k - 1) * (1 + n);
        let potential = SmoothMap::from_exprs(dim, vec![Expr::constant(0.0)]).unwrap();
        let point = NonHolJetPoint::zeros(n, m, k);
        let s = constitutive_nonholonomic(&potential, &point).unwrap();
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn quadratic_nonholonomic_potential_is_linear() {
        let (n, m, k) = (2, 1, 2);
        let dim = jet_flat_dim(n, m, k - 1) * (1 + n);
        let potential = quadratic_potential(dim);
        let w = SmoothMap::from_exprs(n, vec![Expr::var(1).pow(3)]).unwrap();
        let p1 = JetPoint::prolong(&w, &[0.5, 0.5], k).unwrap().to_nonholonomic();
        let s1 = constitutive_nonholonomic(&potential, &p1).unwrap();
        // Gradient of the half-sum-of-squares is the identity map.
        for (a, b) in s1.to_flat().iter().zip(p1.to_flat()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
