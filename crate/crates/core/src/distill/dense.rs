//! The pipeline on explicit state vectors, including Eve's registers, for
//! small `n`. Every step is a dense operator on named registers; nothing here
//! uses the Bell-frame bookkeeping of the block path.

use std::collections::HashMap;

use crate::bits::BitString;
use crate::channel::{PauliDistribution, REG_A, REG_A1, REG_B, REG_B1, REG_E1, REG_E2};
use crate::pgm::{phi_vector, REG_A2};
use crate::qcore::linalg::real;
use crate::qcore::{CMatrix, CVector, Layout, Operator, StateVector};
use crate::{Error, Result};

use super::code::LinearCode;
use super::correct::REG_S;
use super::untwist::Untwisting;

/// Largest total qubit count of the explicit state.
pub const MAX_EXPLICIT_QUBITS: usize = 22;

#[derive(Debug, Clone)]
pub struct ExplicitRun {
    /// After noisy processing, bit and phase correction (before untwisting).
    pub corrected: StateVector,
    pub untwisted: StateVector,
    pub fidelity: f64,
    pub ideal_trace_distance: f64,
}

/// `|Ψ> = Σ_{u,v} sqrt(p_uv) (I ⊗ X^u Z^v)|Φ>^{⊗n} |u>_{E1} |v>_{E2}`.
pub fn explicit_key_state(n: usize, d: &PauliDistribution) -> Result<StateVector> {
    let phi = StateVector::bell_pairs(REG_A, REG_B, n)?;
    let layout = Layout::new([(REG_A, n), (REG_B, n), (REG_E1, n), (REG_E2, n)])?;
    let mut amps = CVector::zeros(layout.dim());
    for u in BitString::all(n) {
        for v in BitString::all(n) {
            let p = d.pattern_probability(&u, &v)?;
            if p == 0.0 {
                continue;
            }
            let term = phi
                .apply_pauli(REG_B, &u, &v)?
                .tensor(&StateVector::from_bits(REG_E1, &u))?
                .tensor(&StateVector::from_bits(REG_E2, &v))?;
            amps += term.amplitudes() * real(p.sqrt());
        }
    }
    StateVector::new(amps, layout)
}

/// Alice's coherent noise: `|φ>^{⊗n}_{A'}` then `CNOT_{A' -> A}`.
pub fn explicit_noisy_processing(psi: &StateVector, n: usize, q: f64) -> Result<StateVector> {
    let anc = StateVector::new(
        phi_vector(n, q, &BitString::zeros(n))?,
        Layout::single(REG_A1, n),
    )?;
    psi.tensor(&anc)?.apply(&Operator::cnot(REG_A1, REG_A, n)?)
}

/// Coherent correction in the computational basis:
/// `|a, b> -> |a, b ⊕ ê, ê>` with `ê` the decoder's output for `a ⊕ b`.
pub fn bit_correction_isometry(n: usize, code: &LinearCode) -> Result<Operator> {
    let input = Layout::new([(REG_A, n), (REG_B, n)])?;
    let output = Layout::new([(REG_A, n), (REG_B, n), (REG_B1, n)])?;
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(output.dim(), input.dim());
    for a in 0..dim {
        for b in 0..dim {
            let e = code.decode(&BitString::new((a ^ b) as u64, n)?)?.index();
            m[((((a << n) | (b ^ e)) << n) | e, (a << n) | b)] = real(1.0);
        }
    }
    Operator::isometry(m, input, output)
}

/// `Σ_{x,z} |f_{xz}><f_{xz}| ⊗ |H_p z>_S`, `f_{xz} = (I ⊗ X^x Z^z)|Φ>^{⊗n}`.
pub fn phase_syndrome_isometry(n: usize, code: &LinearCode) -> Result<Operator> {
    let input = Layout::new([(REG_A, n), (REG_B, n)])?;
    let output = Layout::new([(REG_A, n), (REG_B, n), (REG_S, code.k())])?;
    let phi = StateVector::bell_pairs(REG_A, REG_B, n)?;
    let k = code.k();
    let mut m = CMatrix::zeros(output.dim(), input.dim());
    for x in BitString::all(n) {
        for z in BitString::all(n) {
            let f = phi.apply_pauli(REG_B, &x, &z)?;
            let s = code.syndrome(&z)?.index();
            let proj = f.amplitudes() * f.amplitudes().adjoint();
            for r in 0..input.dim() {
                for c in 0..input.dim() {
                    m[((r << k) | s, c)] += proj[(r, c)];
                }
            }
        }
    }
    Operator::isometry(m, input, output)
}

/// Run the whole pipeline on explicit vectors with perfect breeding.
pub fn explicit_pipeline(
    d: &PauliDistribution,
    q: f64,
    bit_code: &LinearCode,
    phase_code: &LinearCode,
    untwisting: &Untwisting,
) -> Result<ExplicitRun> {
    let n = untwisting.n();
    let qubits = 6 * n + phase_code.k() + untwisting.ancilla_qubits();
    if qubits > MAX_EXPLICIT_QUBITS {
        return Err(Error::budget(
            "explicit state qubits",
            qubits,
            MAX_EXPLICIT_QUBITS,
        ));
    }
    let psi = explicit_key_state(n, d)?;
    let psi = explicit_noisy_processing(&psi, n, q)?;
    let psi = psi.apply(&bit_correction_isometry(n, bit_code)?)?;
    let corrected = if phase_code.k() > 0 {
        psi.apply(&phase_syndrome_isometry(n, phase_code)?)?
    } else {
        psi
    };

    let mut psi = corrected.apply(&Operator::cnot(REG_A1, REG_B1, n)?)?;
    if untwisting.ancilla_qubits() > 0 {
        psi = psi.tensor(&StateVector::from_bits(
            REG_A2,
            &BitString::zeros(untwisting.ancilla_qubits()),
        ))?;
    }
    let controls = untwisting.control_registers();
    let mut ops: HashMap<usize, Operator> = HashMap::new();
    for key in untwisting.sectors().keys() {
        let mut c = 0usize;
        if let Some(u) = key.u {
            c = u.index();
        }
        if untwisting.syndrome_bits() > 0 {
            c = (c << untwisting.syndrome_bits()) | key.syndrome.index();
        }
        ops.insert(c, untwisting.sector_operator(key)?);
    }
    let untwisted = if controls.is_empty() {
        psi.apply(
            ops.get(&0)
                .ok_or_else(|| Error::Invariant("missing sector".into()))?,
        )?
    } else {
        psi.apply_controlled(&controls, |c| ops.get(&c))?
    };

    let (fidelity, ideal_trace_distance) = label_fidelity(&untwisted, n)?;
    Ok(ExplicitRun {
        corrected,
        untwisted,
        fidelity,
        ideal_trace_distance,
    })
}

/// `Σ_l sqrt(p_l) ||(<Φ^n| ⊗ <l| ⊗ I) Ψ||`, i.e. `Σ_l p_l F_l`, and
/// `Σ_l p_l · 2 sqrt(1 - F_l²)`.
pub fn label_fidelity(psi: &StateVector, n: usize) -> Result<(f64, f64)> {
    let layout = psi.layout();
    let rest = layout.without(&[REG_A, REG_B, REG_E1, REG_E2])?;
    let mut order = Layout::new([(REG_E1, n), (REG_E2, n), (REG_A, n), (REG_B, n)])?;
    order = order.concat(&rest)?;
    let psi = psi.reorder(&order)?;
    let amps = psi.amplitudes();
    let d = 1usize << n;
    let rd = rest.dim();
    let h = 1.0 / (d as f64).sqrt();
    let mut fidelity = 0.0;
    let mut distance = 0.0;
    for l in 0..d * d {
        let base = l * d * d * rd;
        let block = amps.rows(base, d * d * rd);
        let p_l = block.norm_squared();
        if p_l == 0.0 {
            continue;
        }
        let mut c = CVector::zeros(rd);
        for a in 0..d {
            let off = ((a << n) | a) * rd;
            for r in 0..rd {
                c[r] += block[off + r] * h;
            }
        }
        let f_l = (c.norm() / p_l.sqrt()).min(1.0);
        fidelity += p_l * f_l;
        distance += p_l * crate::qcore::pure_trace_distance(f_l);
    }
    Ok((fidelity.min(1.0), distance))
}
