use crate::bits::{parity, BitString};
use crate::qcore::linalg::real;
use crate::qcore::{CMatrix, CVector, DensityOperator, Layout, StateVector};
use crate::tolerance::{clamp_probability, DISTRIBUTION_SUM, STRUCTURAL};
use crate::{Error, Result};

use super::REG_A1;

/// Amplitudes of `Z^v |φ>^{⊗n}` with `|φ> = sqrt(1-q)|0> + sqrt(q)|1>`.
pub fn phi_vector(n: usize, q: f64, v: &BitString) -> Result<CVector> {
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let q = clamp_probability(q)?;
    let (a0, a1) = ((1.0 - q).sqrt(), q.sqrt());
    Ok(CVector::from_fn(1 << n, |f, _| {
        let ones = (f as u64).count_ones() as i32;
        let amp = a1.powi(ones) * a0.powi(n as i32 - ones);
        real(if parity(f as u64, v.value()) {
            -amp
        } else {
            amp
        })
    }))
}

/// `|φ^v>` on register `A'`.
pub fn phi_v(n: usize, q: f64, v: &BitString) -> Result<StateVector> {
    StateVector::new(phi_vector(n, q, v)?, Layout::single(REG_A1, n))
}

/// `σ = (1 - p_z)|φ><φ| + p_z Z|φ><φ|Z` on one qubit.
pub fn sigma_state(q: f64, p_z: f64) -> Result<DensityOperator> {
    let p_z = clamp_probability(p_z)?;
    let plus = phi_vector(1, q, &BitString::zeros(1))?;
    let minus = phi_vector(1, q, &BitString::ones(1))?;
    let m = &plus * plus.adjoint() * real(1.0 - p_z) + &minus * minus.adjoint() * real(p_z);
    DensityOperator::new(m, Layout::single(REG_A1, 1))
}

/// i.i.d. prior of a phase pattern with per-position rate `p_z`.
pub fn phase_prior(v: &BitString, p_z: f64) -> f64 {
    let w = v.weight() as i32;
    p_z.powi(w) * (1.0 - p_z).powi(v.len() as i32 - w)
}

/// Pure states with prior probabilities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<CVector>,
    labels: Vec<BitString>,
}

impl Ensemble {
    /// Generic ensemble; labels are the positions `0..N` written on enough bits.
    pub fn new(priors: Vec<f64>, states: Vec<CVector>) -> Result<Self> {
        let width = (usize::BITS - states.len().saturating_sub(1).leading_zeros()) as usize;
        let labels = (0..states.len())
            .map(|i| BitString::new(i as u64, width))
            .collect::<Result<Vec<_>>>()?;
        Self::with_labels(priors, states, labels)
    }

    pub fn with_labels(
        priors: Vec<f64>,
        states: Vec<CVector>,
        labels: Vec<BitString>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("empty ensemble"));
        }
        if priors.len() != states.len() || labels.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                found: priors.len().min(labels.len()),
            });
        }
        let dim = states[0].len();
        for s in &states {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            let norm = s.norm_squared();
            if (norm - 1.0).abs() > STRUCTURAL {
                return Err(Error::NotNormalized(norm));
            }
        }
        for &p in &priors {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(p));
            }
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_SUM * priors.len() as f64 {
            return Err(Error::InvalidDistribution(format!("priors sum to {total}")));
        }
        Ok(Self {
            priors,
            states,
            labels,
        })
    }

    /// `{ |φ^v> : v ∈ set }` with priors proportional to `weights`.
    pub fn phase_flipped(n: usize, q: f64, set: &[BitString], weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution(
                "prior weights vanish on the set".into(),
            ));
        }
        let states = set
            .iter()
            .map(|v| phi_vector(n, q, v))
            .collect::<Result<Vec<_>>>()?;
        let priors = weights.iter().map(|w| w / total).collect();
        Self::with_labels(priors, states, set.to_vec())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[CVector] {
        &self.states
    }

    pub fn labels(&self) -> &[BitString] {
        &self.labels
    }

    /// `S = Σ_v p_v |φ^v><φ^v|`.
    pub fn average_state(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.dim(), self.dim());
        for (p, phi) in self.priors.iter().zip(&self.states) {
            s += phi * phi.adjoint() * real(*p);
        }
        s
    }

    /// Weighted Gram matrix `sqrt(p_v p_w) <φ^v|φ^w>`.
    pub fn weighted_gram(&self) -> CMatrix {
        let n = self.len();
        CMatrix::from_fn(n, n, |i, j| {
            self.states[i].dotc(&self.states[j]) * real((self.priors[i] * self.priors[j]).sqrt())
        })
    }
}
