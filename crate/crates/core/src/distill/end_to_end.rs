//! The full pipeline from channel to security certificate.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::channel::{
    apply_noisy_processing, build_key_state, PauliDistribution, ProtocolModel, REG_A, REG_B,
};
use crate::pstate::key_security_distance;
use crate::tolerance::{DENSE_MATRIX_ENTRIES, ENTROPIC};
use crate::{Error, Result};

use super::code::LinearCode;
use super::correct::{bit_error_correct, build_rho, phase_correct};
use super::dense::{explicit_pipeline, MAX_EXPLICIT_QUBITS};
use super::security::block_key_security;
use super::untwist::{construct_untwisting, formula_fidelity, untwist_fidelity};

/// How a code is chosen: `full`, `empty`, `random:K` (K random checks) or
/// `checks:ROW,ROW,...` with rows written as bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSpec {
    Full,
    Empty,
    Random(usize),
    Checks(Vec<BitString>),
}

impl CodeSpec {
    pub fn build(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<LinearCode> {
        match self {
            CodeSpec::Full => LinearCode::full(n),
            CodeSpec::Empty => LinearCode::empty(n),
            CodeSpec::Random(k) => LinearCode::random(n, *k, rng),
            CodeSpec::Checks(rows) => LinearCode::new(n, rows.clone()),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Full => f.write_str("full"),
            CodeSpec::Empty => f.write_str("empty"),
            CodeSpec::Random(k) => write!(f, "random:{k}"),
            CodeSpec::Checks(rows) => {
                let rows: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
                write!(f, "checks:{}", rows.join(","))
            }
        }
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "full" => return Ok(CodeSpec::Full),
            "empty" => return Ok(CodeSpec::Empty),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("random:") {
            return k
                .parse()
                .map(CodeSpec::Random)
                .map_err(|_| Error::invalid(format!("bad check count in `{s}`")));
        }
        if let Some(rows) = s.strip_prefix("checks:") {
            return rows
                .split(',')
                .filter(|r| !r.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<_>>>()
                .map(CodeSpec::Checks);
        }
        Err(Error::invalid(format!(
            "code spec `{s}` is not full, empty, random:K or checks:ROWS"
        )))
    }
}

impl Serialize for CodeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CodeSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndToEndReport {
    pub n: usize,
    pub distribution: PauliDistribution,
    pub q: f64,
    pub bit_checks: Vec<BitString>,
    pub phase_checks: Vec<BitString>,
    pub residual_bit_error: f64,
    pub bit_syndromes: BTreeMap<BitString, f64>,
    pub cosets: usize,
    pub coset_size: usize,
    pub ancilla_qubits: usize,
    pub fidelity: f64,
    pub epsilon: f64,
    /// `<sqrt(P_s^v)>`; reported when bit correction is perfect.
    pub formula_fidelity: Option<f64>,
    pub decoding_error: Option<f64>,
    /// Fidelity from the explicit dense simulation (small `n` only).
    pub explicit_fidelity: Option<f64>,
    /// Trace distance between the untwisted and ideal states, Eve's labels kept.
    pub ideal_trace_distance: f64,
    pub key_security_distance: f64,
    /// The same distance from a dense purification of `ρ` (small `n` only).
    pub dense_key_security_distance: Option<f64>,
    pub key_agreement: f64,
    /// `2 sqrt(1 - F²)`.
    pub bound: f64,
}

/// Run the pipeline and check `key_security_distance ≤ 2 sqrt(1 - F²)`.
pub fn end_to_end(
    n: usize,
    model: &ProtocolModel,
    q: f64,
    bit_code: &CodeSpec,
    phase_code: &CodeSpec,
    seed: u64,
) -> Result<EndToEndReport> {
    let d = model.distribution()?;
    run_with_distribution(n, &d, q, bit_code, phase_code, seed)
}

pub fn run_with_distribution(
    n: usize,
    d: &PauliDistribution,
    q: f64,
    bit_code: &CodeSpec,
    phase_code: &CodeSpec,
    seed: u64,
) -> Result<EndToEndReport> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::invalid(format!(
            "added noise q = {q} outside [0, 1/2]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bit = bit_code.build(n, &mut rng)?;
    let phase = phase_code.build(n, &mut rng)?;

    let s = apply_noisy_processing(&build_key_state(n, d)?, q)?;
    let corrected = bit_error_correct(&s, &bit)?;
    let pc = phase_correct(&corrected.state, &phase)?;
    let untwisting = construct_untwisting(&pc.cosets, n, q, d)?;
    let outcome = untwist_fidelity(&pc.state, &untwisting)?;
    let security = block_key_security(&pc.state)?;

    let perfect_bits = corrected.residual_error < ENTROPIC;
    let formula = if perfect_bits {
        Some(formula_fidelity(&untwisting, d)?)
    } else {
        None
    };
    let qubits = 6 * n + phase.k() + untwisting.ancilla_qubits();
    let explicit = if qubits <= MAX_EXPLICIT_QUBITS {
        Some(explicit_pipeline(d, q, &bit, &phase, &untwisting)?.fidelity)
    } else {
        None
    };
    let dim = 1usize << (4 * n + phase.k());
    let dense_distance = if dim * dim <= DENSE_MATRIX_ENTRIES {
        Some(key_security_distance(
            &build_rho(&pc.state)?,
            &[REG_A, REG_B],
        )?)
    } else {
        None
    };

    let bound = 2.0 * outcome.epsilon;
    if security.distance > bound + ENTROPIC {
        return Err(Error::Invariant(format!(
            "key-security distance {} exceeds 2 sqrt(1 - F^2) = {bound}",
            security.distance
        )));
    }
    Ok(EndToEndReport {
        n,
        distribution: *d,
        q,
        bit_checks: bit.checks().to_vec(),
        phase_checks: phase.checks().to_vec(),
        residual_bit_error: corrected.residual_error,
        bit_syndromes: corrected.syndromes,
        cosets: pc.cosets.len(),
        coset_size: 1 << (n - phase.k()),
        ancilla_qubits: untwisting.ancilla_qubits(),
        fidelity: outcome.fidelity,
        epsilon: outcome.epsilon,
        formula_fidelity: formula.map(|f| f.fidelity),
        decoding_error: formula.map(|f| f.decoding_error),
        explicit_fidelity: explicit,
        ideal_trace_distance: outcome.ideal_trace_distance,
        key_security_distance: security.distance,
        dense_key_security_distance: dense_distance,
        key_agreement: security.agreement,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ProtocolKind;

    fn bb84(qber: f64) -> ProtocolModel {
        ProtocolModel::new(ProtocolKind::Bb84, qber).unwrap()
    }

    fn six(qber: f64) -> ProtocolModel {
        ProtocolModel::new(ProtocolKind::SixState, qber).unwrap()
    }

    #[test]
    fn code_spec_round_trip() {
        for s in ["full", "empty", "random:2", "checks:101,011"] {
            let c: CodeSpec = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(serde_json::from_str::<CodeSpec>(&json).unwrap(), c);
        }
        assert!("random:x".parse::<CodeSpec>().is_err());
        assert!("hamming".parse::<CodeSpec>().is_err());
        assert!("checks:10a".parse::<CodeSpec>().is_err());
    }

    #[test]
    fn full_phase_code_or_half_noise_is_perfect() {
        for model in [bb84(0.1), six(0.1)] {
            let r = end_to_end(2, &model, 0.2, &CodeSpec::Full, &CodeSpec::Full, 1).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10, "{r:?}");
            assert!(r.key_security_distance < 1e-8);
            let r = end_to_end(2, &model, 0.5, &CodeSpec::Full, &CodeSpec::Empty, 1).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10, "{r:?}");
            assert!(r.key_security_distance < 1e-8);
        }
    }

    #[test]
    fn routes_agree() {
        let (mut explicit, mut dense) = (0, 0);
        for (model, q) in [(bb84(0.08), 0.15), (six(0.1), 0.2), (bb84(0.15), 0.0)] {
            for n in 1..=3 {
                for phase in [CodeSpec::Empty, CodeSpec::Random(1)] {
                    let r = end_to_end(n, &model, q, &CodeSpec::Full, &phase, 5).unwrap();
                    let f = r.formula_fidelity.unwrap();
                    assert!(
                        (f - r.fidelity).abs() < 1e-9,
                        "formula {f} vs block {}",
                        r.fidelity
                    );
                    if let Some(e) = r.explicit_fidelity {
                        explicit += 1;
                        assert!(
                            (e - r.fidelity).abs() < 1e-9,
                            "explicit {e} vs block {}",
                            r.fidelity
                        );
                    }
                    if let Some(dd) = r.dense_key_security_distance {
                        dense += 1;
                        assert!(
                            (dd - r.key_security_distance).abs() < 1e-7,
                            "{dd} vs {}",
                            r.key_security_distance
                        );
                    }
                    assert!(r.fidelity >= 1.0 - r.decoding_error.unwrap() - 1e-10);
                    assert!(r.ideal_trace_distance <= r.bound + 1e-9);
                }
            }
        }
        assert_eq!((explicit, dense), (18, 12));
    }

    #[test]
    fn imperfect_bit_correction_still_bounded() {
        for seed in 0..6 {
            let r = end_to_end(
                3,
                &six(0.12),
                0.1,
                &CodeSpec::Random(2),
                &CodeSpec::Random(1),
                seed,
            )
            .unwrap();
            assert!(r.residual_bit_error > 0.0);
            assert!(r.formula_fidelity.is_none());
            assert!(r.key_security_distance <= r.bound + 1e-9);
            if let Some(e) = r.explicit_fidelity {
                assert!((e - r.fidelity).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn both_readings_of_d_agree() {
        let d = six(0.1).distribution().unwrap();
        let code = LinearCode::from_strings(2, &["11"]).unwrap();
        let u = construct_untwisting(&code.cosets(), 2, 0.25, &d).unwrap();
        for key in u.sectors().keys() {
            let a = u.sector_operator(key).unwrap();
            let b = u.sector_operator_from_b_control(key).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_noise() {
        assert!(end_to_end(2, &bb84(0.1), 0.7, &CodeSpec::Full, &CodeSpec::Empty, 0).is_err());
        assert!(end_to_end(
            2,
            &bb84(0.1),
            0.1,
            &CodeSpec::Checks(vec!["101".parse().unwrap()]),
            &CodeSpec::Empty,
            0
        )
        .is_err());
    }
}
