//! Bit and phase error correction on block states.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::channel::{BlockState, FrameIndex, REG_A1, REG_B1};
use crate::qcore::DensityOperator;
use crate::{Error, Result};

use super::code::LinearCode;

/// Register holding the phase syndrome.
pub const REG_S: &str = "S";

#[derive(Debug, Clone)]
pub struct BitCorrection {
    pub state: BlockState,
    /// Probability of each bit syndrome `H(x)`, `x` the bit mismatch of `A` and `B`.
    pub syndromes: BTreeMap<BitString, f64>,
    /// Probability that Bob's correction left a mismatch.
    pub residual_error: f64,
}

fn check_length(code: &LinearCode, n: usize) -> Result<()> {
    if code.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: code.n(),
        });
    }
    Ok(())
}

/// Bob learns the syndrome of the bit mismatch (ideal breeding), applies the
/// coset-leader correction `X^ê` to `B` and keeps `|ê>` in `B'`.
pub fn bit_error_correct(s: &BlockState, code: &LinearCode) -> Result<BitCorrection> {
    let n = s.n();
    check_length(code, n)?;
    let shield = s.shield();
    if !shield.contains(REG_A1) {
        return Err(Error::invalid(
            "noisy processing must precede bit error correction",
        ));
    }
    if shield.contains(REG_B1) {
        return Err(Error::RegisterCollision(REG_B1.into()));
    }
    let leaders: Vec<u64> = (0..1u64 << n)
        .map(|x| code.leader(&code.syndrome_raw(x)).map(|l| l.value()))
        .collect::<Result<_>>()?;
    let state = s.map_states(|_, st| {
        let mut layout = st.shield().clone();
        layout.push(REG_B1, n)?;
        st.transform(layout, |k, a| {
            let e = leaders[k.x as usize];
            vec![(
                FrameIndex {
                    x: k.x ^ e,
                    z: k.z,
                    shield: (k.shield << n) | e,
                },
                a,
            )]
        })
    })?;
    let mut syndromes: BTreeMap<BitString, f64> = BTreeMap::new();
    let mut residual_error = 0.0;
    for b in s.blocks().values() {
        for (k, a) in b.state.entries() {
            let p = b.weight * a.norm_sqr();
            *syndromes.entry(code.syndrome_raw(k.x)).or_default() += p;
            if k.x != leaders[k.x as usize] {
                residual_error += p;
            }
        }
    }
    Ok(BitCorrection {
        state,
        syndromes,
        residual_error,
    })
}

#[derive(Debug, Clone)]
pub struct PhaseCorrection {
    pub state: BlockState,
    pub code: LinearCode,
    /// The sets `V_s` of phase patterns consistent with each syndrome.
    pub cosets: BTreeMap<BitString, Vec<BitString>>,
}

/// The phase syndrome `H_p z` is extracted into `S` (omitted for the empty
/// code); the remaining ambiguity about `z` is the coset `V_s`.
pub fn phase_correct(s: &BlockState, code: &LinearCode) -> Result<PhaseCorrection> {
    check_length(code, s.n())?;
    let k = code.k();
    let state = if k == 0 {
        s.clone()
    } else {
        s.map_states(|_, st| st.append_register(REG_S, k, |f| code.syndrome_raw(f.z).value()))?
    };
    Ok(PhaseCorrection {
        state,
        code: code.clone(),
        cosets: code.cosets(),
    })
}

/// `ρ = Σ_l p_l |ψ_l><ψ_l|` on `A B` and the shield.
pub fn build_rho(s: &BlockState) -> Result<DensityOperator> {
    s.to_density()
}
