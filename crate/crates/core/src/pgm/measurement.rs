use crate::qcore::linalg::{psd_inverse_sqrt, psd_sqrt, real};
use crate::qcore::{CMatrix, CVector, C64};
use crate::tolerance::POVM_COMPLETENESS;
use crate::{Error, Result};

use super::ensemble::Ensemble;

/// Rank-one POVM `E_v = |θ̃^v><θ̃^v|`, completed by `E_junk`.
#[derive(Debug, Clone)]
pub struct RankOnePOVM {
    vectors: Vec<CVector>,
    junk: CMatrix,
}

impl RankOnePOVM {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::invalid("empty POVM"))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            sum += v * v.adjoint();
        }
        let junk = CMatrix::identity(dim, dim) - sum;
        let min = crate::qcore::linalg::hermitian_eigenvalues(&junk)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -POVM_COMPLETENESS {
            return Err(Error::Incomplete(-min));
        }
        Ok(Self { vectors, junk })
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.junk.nrows()
    }

    /// `I - Σ_v E_v`.
    pub fn junk(&self) -> &CMatrix {
        &self.junk
    }

    pub fn element(&self, v: usize) -> CMatrix {
        &self.vectors[v] * self.vectors[v].adjoint()
    }

    /// Largest entry of `|Σ_v E_v + E_junk - I|`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.dim();
        let mut sum = self.junk.clone();
        for v in 0..self.len() {
            sum += self.element(v);
        }
        (sum - CMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `|θ̃^v> = S^{-1/2} sqrt(p_v) |φ^v>`, with the inverse square root taken on
/// the support of `S`.
pub fn pgm_construct(e: &Ensemble) -> Result<RankOnePOVM> {
    let s_inv = psd_inverse_sqrt(&e.average_state())?;
    let vectors = e
        .states()
        .iter()
        .zip(e.priors())
        .map(|(phi, p)| &s_inv * phi * real(p.sqrt()))
        .collect();
    RankOnePOVM::new(vectors)
}

fn check_compatible(e: &Ensemble, m: &RankOnePOVM) -> Result<()> {
    if e.len() != m.len() || e.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: m.len(),
        });
    }
    Ok(())
}

/// `<θ̃^v|φ^v>` for every member.
pub fn success_amplitudes(e: &Ensemble, m: &RankOnePOVM) -> Result<Vec<C64>> {
    check_compatible(e, m)?;
    Ok(m.vectors()
        .iter()
        .zip(e.states())
        .map(|(t, phi)| t.dotc(phi))
        .collect())
}

/// `P_s^v = |<θ̃^v|φ^v>|^2`.
pub fn success_probabilities(e: &Ensemble, m: &RankOnePOVM) -> Result<Vec<f64>> {
    Ok(success_amplitudes(e, m)?
        .iter()
        .map(|a| a.norm_sqr())
        .collect())
}

/// `Σ_v p_v [ Σ_{w≠v} <φ^v|E_w|φ^v> + <φ^v|E_junk|φ^v> ]`.
pub fn average_error(e: &Ensemble, m: &RankOnePOVM) -> Result<f64> {
    check_compatible(e, m)?;
    let mut total = 0.0;
    for (v, (phi, p)) in e.states().iter().zip(e.priors()).enumerate() {
        if *p == 0.0 {
            continue;
        }
        let wrong: f64 = m
            .vectors()
            .iter()
            .enumerate()
            .filter(|(w, _)| *w != v)
            .map(|(_, t)| t.dotc(phi).norm_sqr())
            .sum();
        let junk = phi.dotc(&(m.junk() * phi)).re;
        total += p * (wrong + junk.max(0.0));
    }
    Ok(total)
}

/// Success amplitudes from the square root of the weighted Gram matrix,
/// `<θ̃^v|φ^v> = (sqrt G)_{vv} / sqrt(p_v)`, which never forms `S`.
pub fn gram_success_amplitudes(e: &Ensemble) -> Result<Vec<f64>> {
    let root = psd_sqrt(&e.weighted_gram())?;
    Ok(e.priors()
        .iter()
        .enumerate()
        .map(|(v, p)| {
            if *p > 0.0 {
                root[(v, v)].re / p.sqrt()
            } else {
                0.0
            }
        })
        .collect())
}
