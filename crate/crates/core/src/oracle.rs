//! Independent cross-checking routines.
//!
//! Everything here recomputes quantities along a second, deliberately
//! naive route: dense tensor components with full index summation, central
//! finite differences, closed-form monomial integrals. Production code
//! paths never depend on this module; the verification suites and tests
//! use it as the other side of two-route comparisons.

use crate::error::{mismatch, Result};
use crate::multiindex::MultiIndex;
use crate::symalg::{AlmostSymArray, Convention, SymArray};

/// All index sequences over `{1..n}` of length `l`, in odometer order.
pub fn all_sequences(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n.pow(l as u32));
    let mut seq = vec![1usize; l];
    loop {
        out.push(seq.clone());
        let mut slot = 0;
        while slot < l {
            if seq[slot] < n {
                seq[slot] += 1;
                break;
            }
            seq[slot] = 1;
            slot += 1;
        }
        if slot == l {
            break;
        }
    }
    out
}

/// Dense component of a symmetric array at an arbitrary index sequence.
/// Derivative-convention arrays repeat their canonical value over the
/// orbit; dual-convention entries are divided by the multiplicity.
pub fn dense_sym(array: &SymArray, seq: &[usize]) -> f64 {
    let idx = MultiIndex::from_sequence(array.n(), seq).unwrap();
    match array.convention() {
        Convention::Derivative => array.get(&idx),
        Convention::Dual => array.get(&idx) / idx.multiplicity() as f64,
    }
}

/// Dense component of an almost symmetric array at `(sequence, last)`.
pub fn dense_almost(array: &AlmostSymArray, head: &[usize], last: usize) -> f64 {
    let tail = MultiIndex::from_sequence(array.n(), head).unwrap();
    match array.convention() {
        Convention::Derivative => array.get(&tail, last),
        Convention::Dual => array.get(&tail, last) / tail.multiplicity() as f64,
    }
}

/// Build a dual-convention symmetric array from dense components given on
/// full sequences (which must be symmetric under reordering).
pub fn dual_from_dense(n: usize, l: usize, dense: impl Fn(&[usize]) -> f64) -> SymArray {
    SymArray::from_fn(n, l, Convention::Dual, |idx| {
        dense(&idx.sequence()) * idx.multiplicity() as f64
    })
}

/// Build a dual-convention almost symmetric array from dense components
/// (symmetric in the head block).
pub fn dual_almost_from_dense(
    n: usize,
    total_degree: usize,
    dense: impl Fn(&[usize], usize) -> f64,
) -> AlmostSymArray {
    AlmostSymArray::from_fn(n, total_degree, Convention::Dual, |tail, j| {
        dense(&tail.sequence(), j) * tail.multiplicity() as f64
    })
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient(
    f: impl Fn(&[f64]) -> Result<f64>,
    at: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(at.len());
    let mut probe = at.to_vec();
    for i in 0..at.len() {
        probe[i] = at[i] + step;
        let plus = f(&probe)?;
        probe[i] = at[i] - step;
        let minus = f(&probe)?;
        probe[i] = at[i];
        out.push((plus - minus) / (2.0 * step));
    }
    Ok(out)
}

/// Central-difference partial derivative of a scalar function of `x`.
pub fn central_partial(
    f: impl Fn(&[f64]) -> Result<f64>,
    at: &[f64],
    j: usize,
    step: f64,
) -> Result<f64> {
    let mut probe = at.to_vec();
    probe[j - 1] = at[j - 1] + step;
    let plus = f(&probe)?;
    probe[j - 1] = at[j - 1] - step;
    let minus = f(&probe)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Exact integral of the monomial with the given exponents over an
/// axis-aligned box.
pub fn box_monomial_integral(lo: &[f64], hi: &[f64], exponents: &[u32]) -> Result<f64> {
    if lo.len() != hi.len() || lo.len() != exponents.len() {
        return Err(mismatch("box and exponent dimensions differ".to_string()));
    }
    let mut acc = 1.0;
    for ((&a, &b), &e) in lo.iter().zip(hi).zip(exponents) {
        let p = e as i32 + 1;
        acc *= (b.powi(p) - a.powi(p)) / p as f64;
    }
    Ok(acc)
}

/// Exact integral of a monomial in barycentric-style coordinates over the
/// standard simplex `{x_i >= 0, sum x_i <= 1}`:
/// `prod a_i! / (d + sum a_i)!` with `d` the dimension.
pub fn simplex_monomial_integral(exponents: &[u32]) -> f64 {
    let d = exponents.len() as u64;
    let total: u64 = exponents.iter().map(|&e| e as u64).sum();
    let mut acc = 1.0f64;
    for &e in exponents {
        acc *= crate::multiindex::factorial_u64(e as u64) as f64;
    }
    // Divide by (d + total)! incrementally to stay in range.
    let mut denom = 1.0f64;
    for i in 1..=(d + total) {
        denom *= i as f64;
    }
    acc / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_roundtrip_for_dual_arrays() {
        let original = SymArray::from_fn(3, 2, Convention::Dual, |idx| {
            idx.distinct_count() as f64 * 2.5 - 1.0
        });
        let back = dual_from_dense(3, 2, |seq| dense_sym(&original, seq));
        for (idx, v) in original.iter() {
            assert!((back.get(&idx) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn simplex_monomial_values() {
        // Volume of the standard triangle and tetrahedron.
        assert!((simplex_monomial_integral(&[0, 0]) - 0.5).abs() < 1e-15);
        assert!((simplex_monomial_integral(&[0, 0, 0]) - 1.0 / 6.0).abs() < 1e-15);
        // Integral of x over the triangle: 1/6.
        assert!((simplex_monomial_integral(&[1, 0]) - 1.0 / 6.0).abs() < 1e-15);
        // Integral of x*y over the triangle: 1/24.
        assert!((simplex_monomial_integral(&[1, 1]) - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn box_monomial_values() {
        assert!((box_monomial_integral(&[0.0, 0.0], &[1.0, 1.0], &[0, 0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((box_monomial_integral(&[0.0, 0.0], &[1.0, 1.0], &[1, 0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(
            (box_monomial_integral(&[-1.0, 0.0], &[1.0, 2.0], &[2, 1]).unwrap() - (2.0 / 3.0) * 2.0)
                .abs()
                < 1e-14
        );
    }
}
