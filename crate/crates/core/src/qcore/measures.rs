//! Entropies and distances between states.

use crate::tolerance::{clamp_probability, EIGEN_FLOOR};
use crate::{Error, Result};

use super::density::DensityOperator;
use super::linalg::{check_psd_spectrum, hermitian_eigenvalues, hermitian_function, CMatrix};

/// `-x log2 x - (1-x) log2 (1-x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    let x = clamp_probability(x)?;
    Ok(xlog(x) + xlog(1.0 - x))
}

fn xlog(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Shannon entropy (bits) of a probability vector with the same zero convention.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities.iter().map(|&p| xlog(p)).sum()
}

/// `-Σ λ log2 λ`, clamping eigenvalues below the floor to zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let values = hermitian_eigenvalues(rho.matrix())?;
    check_psd_spectrum(&values)?;
    Ok(values
        .iter()
        .map(|&l| if l < EIGEN_FLOOR { 0.0 } else { xlog(l) })
        .sum())
}

fn aligned(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DensityOperator> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    sigma.reorder(rho.layout())
}

fn floored_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let values = hermitian_eigenvalues(m)?;
    check_psd_spectrum(&values)?;
    hermitian_function(m, |x| if x < EIGEN_FLOOR { 0.0 } else { x.sqrt() })
}

/// Root fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, evaluated as the trace norm of
/// `sqrt(rho) sqrt(sigma)`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let sigma = aligned(rho, sigma)?;
    let product = floored_sqrt(rho.matrix())? * floored_sqrt(sigma.matrix())?;
    let singular: f64 = product.singular_values().iter().sum();
    Ok(singular.clamp(0.0, 1.0))
}

/// `||rho - sigma||_1`, the sum of absolute eigenvalues of the difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let sigma = aligned(rho, sigma)?;
    trace_norm(&(rho.matrix() - sigma.matrix()))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// Trace distance between two pure states with overlap `|<a|b>|`.
pub fn pure_trace_distance(overlap: f64) -> f64 {
    2.0 * (1.0 - overlap.min(1.0).powi(2)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::qcore::{Layout, StateVector};

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        // Independent evaluation at 30 significant digits.
        assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528).abs() < 1e-12);
        assert!(binary_entropy(-1e-13).is_ok());
        assert!(matches!(
            binary_entropy(1.1),
            Err(Error::InvalidProbability(_))
        ));
    }

    #[test]
    fn entropy_of_pure_and_mixed() {
        let pure = StateVector::bell_pairs("A", "B", 1).unwrap().to_density();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(Layout::single("A", 1));
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::from_bits("A", &"0".parse::<BitString>().unwrap()).to_density();
        let plus = StateVector::normalized(
            super::super::linalg::CVector::from_element(2, super::super::linalg::real(1.0)),
            Layout::single("A", 1),
        )
        .unwrap()
        .to_density();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((trace_distance(&zero, &zero).unwrap()).abs() < 1e-14);

        let phi = StateVector::bell_pairs("A", "B", 1).unwrap();
        let z = "1".parse::<BitString>().unwrap();
        let o = "0".parse::<BitString>().unwrap();
        let phi_z = phi.apply_pauli("A", &o, &z).unwrap();
        let (p, q) = (phi.to_density(), phi_z.to_density());
        assert!(fidelity(&p, &q).unwrap() < 1e-6);
        assert!((trace_distance(&p, &q).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = DensityOperator::maximally_mixed(Layout::single("A", 1));
        let b = DensityOperator::maximally_mixed(Layout::single("A", 2));
        assert!(matches!(
            fidelity(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            trace_distance(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
