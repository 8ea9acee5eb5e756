//! Key-security distance of a block state, with Eve holding the labels.

use crate::channel::BlockState;
use crate::pstate::KeySecurityReport;
use crate::qcore::linalg::real;
use crate::qcore::{trace_norm, CMatrix, CVector};
use crate::{Error, Result};

/// Largest number of Eve labels handled.
pub const MAX_LABELS: usize = 1 << 10;

/// `||ρ_KE - κ ⊗ ρ_E||_1` for `K = (a, b)` read from `A` and `B` in the
/// computational basis, where Eve holds `Σ_l sqrt(p_l) |ψ_l>|l>`'s label register.
///
/// Conditioned on `(a, b)`, Eve's unnormalized state is
/// `ρ_E^{ab}[l, l'] = sqrt(p_l p_l') <w_l'^{ab}|w_l^{ab}>`, with `w_l^{ab}` the
/// shield vector of block `l` at key value `(a, b)`.
pub fn block_key_security(s: &BlockState) -> Result<KeySecurityReport> {
    let labels: Vec<_> = s.blocks().values().filter(|b| b.weight > 0.0).collect();
    if labels.len() > MAX_LABELS {
        return Err(Error::budget(
            "Eve's label register",
            labels.len(),
            MAX_LABELS,
        ));
    }
    let count = labels.len();
    let d = 1u64 << s.n();
    let components: Vec<_> = labels.iter().map(|b| b.state.key_components()).collect();
    let zero = CVector::zeros(s.shield().dim());
    let sqrt_p: Vec<f64> = labels.iter().map(|b| b.weight.sqrt()).collect();

    let eve_at = |a: u64, b: u64| -> CMatrix {
        let w: Vec<&CVector> = components
            .iter()
            .map(|c| c.get(&(a, b)).unwrap_or(&zero))
            .collect();
        CMatrix::from_fn(count, count, |i, j| {
            w[j].dotc(w[i]) * real(sqrt_p[i] * sqrt_p[j])
        })
    };
    let mut conditional = Vec::with_capacity((d * d) as usize);
    let mut rho_e = CMatrix::zeros(count, count);
    for a in 0..d {
        for b in 0..d {
            let m = eve_at(a, b);
            rho_e += &m;
            conditional.push(((a, b), m));
        }
    }
    let mut distance = 0.0;
    let mut agreement = 0.0;
    for ((a, b), m) in conditional {
        if a == b {
            agreement += crate::qcore::linalg::trace(&m).re;
            distance += trace_norm(&(m - &rho_e * real(1.0 / d as f64)))?;
        } else if m.iter().any(|z| z.norm_sqr() > 0.0) {
            distance += trace_norm(&m)?;
        }
    }
    Ok(KeySecurityReport {
        distance,
        agreement,
        purification_rank: count,
    })
}
