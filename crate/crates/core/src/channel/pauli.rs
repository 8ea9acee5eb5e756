use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::tolerance::{clamp_probability, DISTRIBUTION_SUM};
use crate::{Error, Result};

/// Single-qubit Pauli error rates `p_uv`: `u` is the bit-flip (X) bit and `v`
/// the phase-flip (Z) bit of the error `X^u Z^v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliDistribution {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl PauliDistribution {
    pub fn new(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        let d = Self { p00, p01, p10, p11 };
        d.validate()?;
        Ok(d)
    }

    pub fn noiseless() -> Self {
        Self {
            p00: 1.0,
            p01: 0.0,
            p10: 0.0,
            p11: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.as_array() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(p));
            }
        }
        let sum: f64 = self.as_array().iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_SUM {
            return Err(Error::InvalidDistribution(format!("rates sum to {sum}")));
        }
        Ok(())
    }

    /// `[p00, p01, p10, p11]`, i.e. rates of I, Z, X, XZ.
    pub fn as_array(&self) -> [f64; 4] {
        [self.p00, self.p01, self.p10, self.p11]
    }

    pub fn prob(&self, u: bool, v: bool) -> f64 {
        match (u, v) {
            (false, false) => self.p00,
            (false, true) => self.p01,
            (true, false) => self.p10,
            (true, true) => self.p11,
        }
    }

    /// i.i.d. probability of the length-n pattern `X^u Z^v`.
    pub fn pattern_probability(&self, u: &BitString, v: &BitString) -> Result<f64> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        Ok((0..u.len())
            .map(|i| self.prob(u.bit(i), v.bit(i)))
            .product())
    }

    /// Probability of the phase pattern `v` given the bit pattern `u`.
    pub fn phase_given_bits(&self, u: &BitString, v: &BitString) -> Result<f64> {
        let m = self.marginals();
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        Ok((0..u.len())
            .map(|i| {
                let p1 = m.phase_given_bit[u.bit(i) as usize];
                if v.bit(i) {
                    p1
                } else {
                    1.0 - p1
                }
            })
            .product())
    }

    /// True when the phase error is independent of the bit error.
    pub fn is_independent(&self) -> bool {
        let m = self.marginals();
        (0..2).all(|u| m.bit_marginal[u] == 0.0 || (m.phase_given_bit[u] - m.p_z).abs() < 1e-12)
    }

    pub fn marginals(&self) -> Marginals {
        let bit_marginal = [self.p00 + self.p01, self.p10 + self.p11];
        let mut phase_given_bit = [0.0; 2];
        let mut undefined = [false; 2];
        for u in 0..2 {
            if bit_marginal[u] > 0.0 {
                phase_given_bit[u] = self.prob(u == 1, true) / bit_marginal[u];
            } else {
                undefined[u] = true;
            }
        }
        Marginals {
            p_x: self.p10 + self.p11,
            p_z: self.p01 + self.p11,
            bit_marginal,
            phase_given_bit,
            undefined_conditional: undefined,
        }
    }
}

/// Marginal and conditional error rates of a [`PauliDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Marginals {
    /// Bit-error rate `p10 + p11`.
    pub p_x: f64,
    /// Phase-error rate `p01 + p11`.
    pub p_z: f64,
    /// `p_u` for `u = 0, 1`.
    pub bit_marginal: [f64; 2],
    /// `p_{1|u}`: phase-error rate conditioned on the bit-error bit.
    pub phase_given_bit: [f64; 2],
    /// Set where `p_u = 0`; the conditional is then reported as 0.
    pub undefined_conditional: [bool; 2],
}

pub fn marginals(d: &PauliDistribution) -> Marginals {
    d.marginals()
}

/// Bit-error rate after Alice flips each key bit with probability `q`.
pub fn effective_bit_error(p_x: f64, q: f64) -> f64 {
    p_x * (1.0 - q) + q * (1.0 - p_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Bb84,
    SixState,
    Custom(PauliDistribution),
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Bb84 => "bb84",
            ProtocolKind::SixState => "six-state",
            ProtocolKind::Custom(_) => "custom",
        }
    }
}

/// A protocol family together with the observed bit-error rate `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolModel {
    pub kind: ProtocolKind,
    pub qber: f64,
}

impl ProtocolModel {
    pub fn new(kind: ProtocolKind, qber: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&qber) {
            return Err(Error::invalid(format!(
                "bit-error rate {qber} outside [0, 1/2)"
            )));
        }
        if let ProtocolKind::Custom(d) = kind {
            d.validate()?;
        }
        Ok(Self { kind, qber })
    }

    pub fn distribution(&self) -> Result<PauliDistribution> {
        model_to_distribution(self)
    }
}

/// BB84: independent bit and phase flips, each at rate `Q`. Six-state: the three
/// non-identity Paulis each at `Q/2` (so the bit-error rate is `Q`).
pub fn model_to_distribution(model: &ProtocolModel) -> Result<PauliDistribution> {
    let q = clamp_probability(model.qber)?;
    match model.kind {
        ProtocolKind::Bb84 => {
            PauliDistribution::new((1.0 - q) * (1.0 - q), (1.0 - q) * q, q * (1.0 - q), q * q)
        }
        ProtocolKind::SixState => {
            if q > 2.0 / 3.0 {
                return Err(Error::InvalidDistribution(format!(
                    "six-state channel infeasible at Q = {q}"
                )));
            }
            let w = q / 2.0;
            PauliDistribution::new(1.0 - 3.0 * w, w, w, w)
        }
        ProtocolKind::Custom(d) => {
            d.validate()?;
            Ok(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn bb84_mapping() {
        let d =
            model_to_distribution(&ProtocolModel::new(ProtocolKind::Bb84, 0.0).unwrap()).unwrap();
        assert_eq!(d.as_array(), [1.0, 0.0, 0.0, 0.0]);
        let d =
            model_to_distribution(&ProtocolModel::new(ProtocolKind::Bb84, 0.1).unwrap()).unwrap();
        for (a, b) in d.as_array().iter().zip([0.81, 0.09, 0.09, 0.01]) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn six_state_mapping_and_marginals() {
        let d = model_to_distribution(&ProtocolModel::new(ProtocolKind::SixState, 0.12).unwrap())
            .unwrap();
        for (a, b) in d.as_array().iter().zip([0.82, 0.06, 0.06, 0.06]) {
            assert!(close(*a, b));
        }
        // Depolarizing cross-check: X-type and Z-type error marginals both equal Q.
        let m = d.marginals();
        assert!(close(m.p_x, 0.12) && close(m.p_z, 0.12));
        assert!(close(m.phase_given_bit[1], 0.5));
        assert!(close(m.phase_given_bit[0], 0.06 / 0.88));
    }

    #[test]
    fn independent_marginals() {
        let d = PauliDistribution::new(0.81, 0.09, 0.09, 0.01).unwrap();
        let m = d.marginals();
        assert!(close(m.p_x, 0.1) && close(m.p_z, 0.1));
        assert!(close(m.phase_given_bit[0], 0.1) && close(m.phase_given_bit[1], 0.1));
        assert!(d.is_independent());
        assert!(!PauliDistribution::new(0.82, 0.06, 0.06, 0.06)
            .unwrap()
            .is_independent());
    }

    #[test]
    fn noiseless_marginals_are_zero_and_flagged() {
        let m = PauliDistribution::noiseless().marginals();
        assert_eq!((m.p_x, m.p_z), (0.0, 0.0));
        assert_eq!(m.phase_given_bit, [0.0, 0.0]);
        assert_eq!(m.undefined_conditional, [false, true]);
    }

    #[test]
    fn effective_bit_error_examples() {
        assert!(close(effective_bit_error(0.1, 0.0), 0.1));
        assert!(close(effective_bit_error(0.3, 0.5), 0.5));
        assert!(close(effective_bit_error(0.1, 0.2), 0.26));
    }

    #[test]
    fn rejects_invalid() {
        assert!(PauliDistribution::new(0.5, 0.5, 0.1, 0.0).is_err());
        assert!(PauliDistribution::new(1.1, -0.1, 0.0, 0.0).is_err());
        assert!(ProtocolModel::new(ProtocolKind::Bb84, 0.5).is_err());
        let bogus = ProtocolModel {
            kind: ProtocolKind::SixState,
            qber: 0.7,
        };
        assert!(model_to_distribution(&bogus).is_err());
    }

    #[test]
    fn pattern_probability_is_a_product() {
        let d = PauliDistribution::new(0.7, 0.1, 0.1, 0.1).unwrap();
        let u: BitString = "10".parse().unwrap();
        let v: BitString = "11".parse().unwrap();
        assert!(close(d.pattern_probability(&u, &v).unwrap(), 0.1 * 0.1));
    }
}
