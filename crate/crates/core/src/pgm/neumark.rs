use crate::qcore::linalg::{hermitian_eigen, psd_inverse_sqrt, real};
use crate::qcore::{CMatrix, CVector, Layout};
use crate::tolerance::{EIGEN_FLOOR, NEUMARK_DEFECT};
use crate::{Error, Result};

use super::measurement::RankOnePOVM;
use super::{REG_A1, REG_A2};

/// Orthonormal `|θ^v>` on `A' ⊗ A''` with `<θ^v| (|ψ>|0>) = <θ̃^v|ψ>`.
///
/// Basis index of `A' ⊗ A''` is `a' · 2^m + a''`, `m` the ancilla width.
#[derive(Debug, Clone)]
pub struct IsometricExtension {
    input_dim: usize,
    ancilla_qubits: usize,
    vectors: Vec<CVector>,
}

impl IsometricExtension {
    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn dim(&self) -> usize {
        self.input_dim << self.ancilla_qubits
    }

    /// `A'(n) A''(m)`.
    pub fn layout(&self) -> Result<Layout> {
        let n = self.input_dim.trailing_zeros() as usize;
        Layout::new([(REG_A1, n), (REG_A2, self.ancilla_qubits)])
    }

    /// `|ψ> ↦ |ψ>|0>_{A''}`.
    pub fn embed(&self, psi: &CVector) -> Result<CVector> {
        if psi.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: psi.len(),
            });
        }
        let mut out = CVector::zeros(self.dim());
        for (a, x) in psi.iter().enumerate() {
            out[a << self.ancilla_qubits] = *x;
        }
        Ok(out)
    }

    /// `I - Σ_v |θ^v><θ^v|`.
    pub fn complement_projector(&self) -> CMatrix {
        let mut p = CMatrix::identity(self.dim(), self.dim());
        for t in &self.vectors {
            p -= t * t.adjoint();
        }
        p
    }

    /// Largest deviation of the Gram matrix of `θ^v` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.vectors[i].dotc(&self.vectors[j]) - real(expect)).norm());
            }
        }
        worst
    }
}

/// Complete the POVM vectors `θ̃^v` to orthonormal `θ^v = θ̃^v ⊗ |0> + w^v`,
/// where the `w^v` live in the span of `|a'>|a''>` with `a'' ≠ 0` and have Gram
/// matrix `I - G`, `G` the Gram matrix of the `θ̃^v`.
pub fn neumark_extend(m: &RankOnePOVM) -> Result<IsometricExtension> {
    let d = m.dim();
    if !d.is_power_of_two() {
        return Err(Error::invalid(format!(
            "POVM dimension {d} is not a power of two"
        )));
    }
    let count = m.len();
    let gram = CMatrix::from_fn(count, count, |i, j| m.vectors()[i].dotc(&m.vectors()[j]));
    let defect = CMatrix::identity(count, count) - gram;
    let (values, vectors) = hermitian_eigen(&defect)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEUMARK_DEFECT {
        return Err(Error::Incomplete(-min));
    }
    let kept: Vec<usize> = (0..count).filter(|&k| values[k] > EIGEN_FLOOR).collect();
    let rank = kept.len();

    let mut ancilla_qubits = 0;
    while (d << ancilla_qubits) < count || d * ((1 << ancilla_qubits) - 1) < rank {
        ancilla_qubits += 1;
    }
    let complement: Vec<usize> = (0..d << ancilla_qubits)
        .filter(|idx| idx & ((1 << ancilla_qubits) - 1) != 0)
        .take(rank)
        .collect();

    let out = (0..count)
        .map(|v| {
            let mut theta = CVector::zeros(d << ancilla_qubits);
            for (a, x) in m.vectors()[v].iter().enumerate() {
                theta[a << ancilla_qubits] = *x;
            }
            for (slot, &k) in kept.iter().enumerate() {
                theta[complement[slot]] = vectors[(v, k)].conj() * real(values[k].sqrt());
            }
            theta
        })
        .collect();
    let ext = IsometricExtension {
        input_dim: d,
        ancilla_qubits,
        vectors: lowdin(out)?,
    };
    let defect = ext.orthonormality_defect();
    if defect > NEUMARK_DEFECT {
        return Err(Error::Incomplete(defect));
    }
    Ok(ext)
}

/// Symmetric orthonormalization `Θ (Θ†Θ)^{-1/2}`, removing the rounding left by
/// the eigendecomposition.
fn lowdin(vectors: Vec<CVector>) -> Result<Vec<CVector>> {
    let count = vectors.len();
    if count == 0 {
        return Ok(vectors);
    }
    let theta = CMatrix::from_columns(&vectors);
    let gram = theta.adjoint() * &theta;
    let defect = (&gram - CMatrix::identity(count, count))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if defect > NEUMARK_DEFECT {
        return Err(Error::Incomplete(defect));
    }
    let polished = theta * psd_inverse_sqrt(&gram)?;
    Ok(polished.column_iter().map(|c| c.into_owned()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::pgm::{pgm_construct, Ensemble};
    use crate::qcore::linalg::c;

    #[test]
    fn projective_input_needs_no_ancilla() {
        let set: Vec<BitString> = BitString::all(2).collect();
        let e = Ensemble::phase_flipped(2, 0.5, &set, &[0.25; 4]).unwrap();
        let ext = neumark_extend(&pgm_construct(&e).unwrap()).unwrap();
        assert_eq!(ext.ancilla_qubits(), 0);
        for (t, phi) in ext.vectors().iter().zip(e.states()) {
            assert!((t.dotc(phi).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trine_extends_to_four_dimensions() {
        let states: Vec<CVector> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                CVector::from_vec(vec![c(a.cos(), 0.0), c(a.sin(), 0.0)])
            })
            .collect();
        let e = Ensemble::new(vec![1.0 / 3.0; 3], states.clone()).unwrap();
        let m = pgm_construct(&e).unwrap();
        let ext = neumark_extend(&m).unwrap();
        assert_eq!(ext.dim(), 4);
        assert!(ext.orthonormality_defect() < 1e-12);
        for (v, t) in ext.vectors().iter().enumerate() {
            for (w, phi) in states.iter().enumerate() {
                let lhs = t.dotc(&ext.embed(phi).unwrap());
                let rhs = m.vectors()[v].dotc(phi);
                assert!((lhs - rhs).norm() < 1e-12, "{v} {w}");
            }
        }
    }
}
