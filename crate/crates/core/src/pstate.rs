//! Private states, twisting operators, and the key-security distance.
//!
//! A private state on key registers `A B` (each `k` qubits, `d = 2^k`) and a
//! shield is `γ = U (|Φ_d><Φ_d| ⊗ ρ_shield) U†` with a twisting operator
//! `U = Σ_j |jj><jj| ⊗ U^{(j)}`. Measuring the key in the computational basis
//! gives a uniform, perfectly correlated key independent of any purification.

use rand::Rng;
use serde::Serialize;

use crate::qcore::linalg::{hermitian_eigen, real, unitarity_defect};
use crate::qcore::random::haar_unitary;
use crate::qcore::{fidelity, trace_norm, CMatrix, DensityOperator, Layout, Operator, StateVector};
use crate::tolerance::{EIGEN_FLOOR, PURIFICATION_DIM, STRUCTURAL};
use crate::{Error, Result};

/// Key-controlled unitaries on a shield.
#[derive(Debug, Clone)]
pub struct TwistingOperator {
    key_qubits: usize,
    shield: Layout,
    unitaries: Vec<CMatrix>,
}

impl TwistingOperator {
    /// `unitaries[j]` acts on the shield when both key registers read `j`.
    pub fn new(key_qubits: usize, shield: Layout, unitaries: Vec<CMatrix>) -> Result<Self> {
        let d = 1usize << key_qubits;
        if unitaries.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: unitaries.len(),
            });
        }
        for u in &unitaries {
            if u.nrows() != shield.dim() || u.ncols() != shield.dim() {
                return Err(Error::DimensionMismatch {
                    expected: shield.dim(),
                    found: u.nrows(),
                });
            }
            let defect = unitarity_defect(u);
            if defect > STRUCTURAL {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(Self {
            key_qubits,
            shield,
            unitaries,
        })
    }

    pub fn identity(key_qubits: usize, shield: Layout) -> Self {
        let dim = shield.dim();
        Self {
            key_qubits,
            unitaries: vec![CMatrix::identity(dim, dim); 1 << key_qubits],
            shield,
        }
    }

    /// Independent Haar-random `U^{(j)}`.
    pub fn random<R: Rng + ?Sized>(key_qubits: usize, shield: Layout, rng: &mut R) -> Self {
        let dim = shield.dim();
        Self {
            key_qubits,
            unitaries: (0..1 << key_qubits)
                .map(|_| haar_unitary(dim, rng))
                .collect(),
            shield,
        }
    }

    pub fn key_qubits(&self) -> usize {
        self.key_qubits
    }

    pub fn key_dim(&self) -> usize {
        1 << self.key_qubits
    }

    pub fn shield(&self) -> &Layout {
        &self.shield
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn inverse(&self) -> Self {
        Self {
            key_qubits: self.key_qubits,
            shield: self.shield.clone(),
            unitaries: self.unitaries.iter().map(|u| u.adjoint()).collect(),
        }
    }

    /// The unitary on `a b shield`. On key values `j ≠ k` it acts as the
    /// identity, which makes the operator unitary on the whole space.
    pub fn to_operator(&self, a: &str, b: &str) -> Result<Operator> {
        let layout =
            Layout::new([(a, self.key_qubits), (b, self.key_qubits)])?.concat(&self.shield)?;
        let d = self.key_dim();
        let s = self.shield.dim();
        let mut m = CMatrix::zeros(layout.dim(), layout.dim());
        for j in 0..d {
            for k in 0..d {
                let base = (j * d + k) * s;
                if j == k {
                    m.view_mut((base, base), (s, s))
                        .copy_from(&self.unitaries[j]);
                } else {
                    m.view_mut((base, base), (s, s)).fill_with_identity();
                }
            }
        }
        Operator::unitary(m, layout)
    }

    /// `Σ_k |k><k|_b ⊗ U^{(k)†}`: undoes the twist on the support `a = b`
    /// without touching Alice's key.
    pub fn bob_controlled_inverse(&self, b: &str) -> Result<Operator> {
        let layout = Layout::single(b, self.key_qubits).concat(&self.shield)?;
        let s = self.shield.dim();
        let mut m = CMatrix::zeros(layout.dim(), layout.dim());
        for (k, u) in self.unitaries.iter().enumerate() {
            m.view_mut((k * s, k * s), (s, s)).copy_from(&u.adjoint());
        }
        Operator::unitary(m, layout)
    }
}

/// A state certified as private by construction.
#[derive(Debug, Clone)]
pub struct PrivateState {
    gamma: DensityOperator,
    key_qubits: usize,
}

impl PrivateState {
    pub fn gamma(&self) -> &DensityOperator {
        &self.gamma
    }

    pub fn key_qubits(&self) -> usize {
        self.key_qubits
    }

    pub fn key_dim(&self) -> usize {
        1 << self.key_qubits
    }
}

/// `|Φ_d><Φ_d|` on `a b`, `d = 2^k`.
pub fn maximally_entangled(a: &str, b: &str, key_qubits: usize) -> Result<DensityOperator> {
    Ok(StateVector::bell_pairs(a, b, key_qubits)?.to_density())
}

/// `γ = U (Φ_d ⊗ ρ_shield) U†`. `phi_d` must be the maximally entangled state
/// on its two registers (first Alice's, then Bob's).
pub fn twist(
    phi_d: &DensityOperator,
    shield: &DensityOperator,
    t: &TwistingOperator,
) -> Result<PrivateState> {
    let names = phi_d.layout().names();
    if names.len() != 2 {
        return Err(Error::invalid("the key state needs exactly two registers"));
    }
    let (a, b) = (names[0], names[1]);
    let k = t.key_qubits();
    if phi_d.layout().width(a)? != k || phi_d.layout().width(b)? != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: phi_d.layout().width(a)?,
        });
    }
    let ideal = maximally_entangled(a, b, k)?;
    let f = fidelity(phi_d, &ideal)?;
    if (1.0 - f) > STRUCTURAL {
        return Err(Error::invalid(format!(
            "key state is not maximally entangled (F = {f})"
        )));
    }
    let shield = shield.reorder(t.shield())?;
    let op = t.to_operator(a, b)?;
    if op.unitarity_defect() > STRUCTURAL {
        return Err(Error::NotUnitary(op.unitarity_defect()));
    }
    let gamma = phi_d.tensor(&shield)?.conjugate_by(&op)?;
    Ok(PrivateState {
        gamma,
        key_qubits: k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeySecurityReport {
    /// `||ρ_KE - κ ⊗ ρ_E||_1` with `K` the joint outcome `(a, b)` and `κ` the
    /// uniform perfectly correlated key.
    pub distance: f64,
    /// Probability that Alice's and Bob's outcomes agree.
    pub agreement: f64,
    /// Rank of the state, i.e. the dimension of Eve's purifying system.
    pub purification_rank: usize,
}

/// See [`key_security_report`].
pub fn key_security_distance(rho: &DensityOperator, key_regs: &[&str]) -> Result<f64> {
    Ok(key_security_report(rho, key_regs)?.distance)
}

/// Purify `rho` with Eve holding the purifying system, measure both key
/// registers in the computational basis, and compare the classical-quantum
/// state of key and Eve against a uniform shared key independent of Eve.
pub fn key_security_report(rho: &DensityOperator, key_regs: &[&str]) -> Result<KeySecurityReport> {
    let [a, b] = key_regs else {
        return Err(Error::invalid("key registers must be Alice's and Bob's"));
    };
    let layout = rho.layout();
    let k = layout.width(a)?;
    if layout.width(b)? != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: layout.width(b)?,
        });
    }
    if rho.dim() > PURIFICATION_DIM {
        return Err(Error::budget("purified state", rho.dim(), PURIFICATION_DIM));
    }
    let (values, vectors) = hermitian_eigen(rho.matrix())?;
    let kept: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > EIGEN_FLOOR)
        .collect();
    let rank = kept.len();
    let weights: Vec<f64> = kept.iter().map(|&i| values[i]).collect();
    let total: f64 = weights.iter().sum();

    let d = 1usize << k;
    let a_pos = layout.bit_positions(&[a])?;
    let b_pos = layout.bit_positions(&[b])?;
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); d * d];
    for g in 0..rho.dim() {
        let av = crate::qcore::gather_bits(g, &a_pos);
        let bv = crate::qcore::gather_bits(g, &b_pos);
        rows[av * d + bv].push(g);
    }

    let rho_e = CMatrix::from_fn(rank, rank, |i, j| {
        if i == j {
            real(weights[i] / total)
        } else {
            real(0.0)
        }
    });
    let mut distance = 0.0;
    let mut agreement = 0.0;
    for av in 0..d {
        for bv in 0..d {
            let idx = &rows[av * d + bv];
            let x = CMatrix::from_fn(idx.len(), rank, |r, c| {
                vectors[(idx[r], kept[c])] * real((weights[c] / total).sqrt())
            });
            let eve = x.adjoint() * x;
            if av == bv {
                agreement += crate::qcore::linalg::trace(&eve).re;
                distance += trace_norm(&(eve - &rho_e * real(1.0 / d as f64)))?;
            } else {
                distance += trace_norm(&eve)?;
            }
        }
    }
    Ok(KeySecurityReport {
        distance,
        agreement,
        purification_rank: rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub fidelity: f64,
    pub epsilon: f64,
}

/// Apply a candidate untwisting operation (acting on Bob's key register and
/// the shield, never on Alice's key) and return the root fidelity of the key
/// marginal with `|Φ_d>` together with `ε = sqrt(1 - F²)`.
pub fn verify_private_state(
    gamma: &DensityOperator,
    key_regs: &[&str],
    untwist: &Operator,
) -> Result<Certificate> {
    let [a, b] = key_regs else {
        return Err(Error::invalid("key registers must be Alice's and Bob's"));
    };
    if untwist.input().contains(a) {
        return Err(Error::invalid(
            "the untwisting operation may not act on Alice's key",
        ));
    }
    let defect = untwist.isometry_defect();
    if defect > STRUCTURAL {
        return Err(Error::NotIsometry(defect));
    }
    let k = gamma.layout().width(a)?;
    let out = gamma.conjugate_by(untwist)?;
    let key = out.partial_trace(&[a, b])?;
    let f = fidelity(&key, &maximally_entangled(a, b, k)?)?;
    Ok(Certificate {
        fidelity: f,
        epsilon: (1.0 - f * f).max(0.0).sqrt(),
    })
}
