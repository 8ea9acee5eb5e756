//! Asymptotic key rate with noisy preprocessing, optimization of the added
//! noise, and threshold search.
//!
//! With `p̃` the bit-error rate after Alice's added noise `q`, and `p_{1|u}` the
//! phase-error rate conditioned on the bit-error bit,
//!
//! ```text
//! R = 1 - H2(p̃) - Σ_u p_u [ H2(p_{1|u}) - H2(λ⁺_u) ]
//! λ⁺_u = (1 + sqrt(1 - 16 q (1-q) p_{1|u} (1-p_{1|u}))) / 2
//! ```
//!
//! Rates are per sifted key bit; sifting and sampling overheads are excluded.

use serde::Serialize;

use crate::channel::{
    effective_bit_error, model_to_distribution, PauliDistribution, ProtocolKind, ProtocolModel,
};
use crate::qcore::binary_entropy;
use crate::tolerance::{clamp_probability, PROBABILITY_SLACK};
use crate::{Error, Result};

/// Points of the coarse grid over `q ∈ [0, 1/2]`.
pub const Q_GRID_POINTS: usize = 201;

/// Width at which golden-section refinement stops.
pub const Q_TOLERANCE: f64 = 1e-8;

/// Default bisection tolerance on the bit-error rate.
pub const THRESHOLD_TOLERANCE: f64 = 1e-5;

/// An optimized rate counts as positive only above this floor; `R(q = 1/2)` is
/// exactly zero and evaluates to a few ulps either side.
pub const POSITIVE_RATE_FLOOR: f64 = 1e-12;

/// Larger eigenvalue of `σ_u = (1-p)|φ><φ| + p Z|φ><φ|Z` with `|φ> = sqrt(1-q)|0> + sqrt(q)|1>`.
pub fn lambda_plus(q: f64, p1u: f64) -> Result<f64> {
    let q = clamp_probability(q)?;
    let p = clamp_probability(p1u)?;
    let radicand = 1.0 - 16.0 * q * (1.0 - q) * p * (1.0 - p);
    if radicand < -PROBABILITY_SLACK {
        return Err(Error::Invariant(format!("negative radicand {radicand}")));
    }
    Ok(0.5 * (1.0 + radicand.max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateInput {
    pub distribution: PauliDistribution,
    pub q: f64,
}

impl RateInput {
    pub fn new(distribution: PauliDistribution, q: f64) -> Result<Self> {
        distribution.validate()?;
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::invalid(format!(
                "added noise q = {q} outside [0, 1/2]"
            )));
        }
        Ok(Self { distribution, q })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    /// Key bits per sifted bit.
    pub rate: f64,
    pub q: f64,
    pub effective_bit_error: f64,
    /// `H2(p̃)`.
    pub bit_term: f64,
    /// `Σ_u p_u H2(p_{1|u})`.
    pub phase_term: f64,
    /// `Σ_u p_u H2(λ⁺_u)`.
    pub shield_term: f64,
}

pub fn key_rate(input: &RateInput) -> Result<RateResult> {
    let m = input.distribution.marginals();
    let p_tilde = effective_bit_error(m.p_x, input.q);
    let bit_term = binary_entropy(p_tilde)?;
    let mut phase_term = 0.0;
    let mut shield_term = 0.0;
    for u in 0..2 {
        let weight = m.bit_marginal[u];
        if weight == 0.0 {
            continue;
        }
        let p1 = m.phase_given_bit[u];
        phase_term += weight * binary_entropy(p1)?;
        shield_term += weight * binary_entropy(lambda_plus(input.q, p1)?)?;
    }
    Ok(RateResult {
        rate: 1.0 - bit_term - phase_term + shield_term,
        q: input.q,
        effective_bit_error: p_tilde,
        bit_term,
        phase_term,
        shield_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalRate {
    pub q_star: f64,
    pub result: RateResult,
}

impl OptimalRate {
    pub fn rate(&self) -> f64 {
        self.result.rate
    }
}

/// Maximize the key rate over `q ∈ [0, 1/2]`: coarse grid, then golden-section
/// refinement around the best grid point.
pub fn optimize_q(d: &PauliDistribution) -> Result<OptimalRate> {
    let rate_at = |q: f64| -> Result<f64> { Ok(key_rate(&RateInput::new(*d, q)?)?.rate) };
    let step = 0.5 / (Q_GRID_POINTS - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..Q_GRID_POINTS {
        let r = rate_at(i as f64 * step)?;
        if r > best.1 {
            best = (i, r);
        }
    }
    let lo = best.0.saturating_sub(1) as f64 * step;
    let hi = ((best.0 + 1).min(Q_GRID_POINTS - 1) as f64 * step).min(0.5);
    let (q_refined, r_refined) = golden_section_max(rate_at, lo, hi, Q_TOLERANCE)?;
    let q_star = if r_refined > best.1 {
        q_refined
    } else {
        best.0 as f64 * step
    };
    Ok(OptimalRate {
        q_star,
        result: key_rate(&RateInput::new(*d, q_star)?)?,
    })
}

/// Maximize a unimodal function on `[lo, hi]`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

/// How the added-noise level is chosen for each channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePolicy {
    Fixed(f64),
    Optimized,
}

pub fn rate_for(d: &PauliDistribution, policy: NoisePolicy) -> Result<OptimalRate> {
    match policy {
        NoisePolicy::Fixed(q) => Ok(OptimalRate {
            q_star: q,
            result: key_rate(&RateInput::new(*d, q)?)?,
        }),
        NoisePolicy::Optimized => optimize_q(d),
    }
}

fn rate_at_qber(kind: ProtocolKind, qber: f64, policy: NoisePolicy) -> Result<OptimalRate> {
    let d = model_to_distribution(&ProtocolModel::new(kind, qber)?)?;
    rate_for(&d, policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub qber: f64,
    /// Final bracket `[last positive, first non-positive]`.
    pub bracket: [f64; 2],
    pub iterations: usize,
}

pub fn threshold(kind: ProtocolKind) -> Result<Threshold> {
    threshold_with(kind, NoisePolicy::Optimized, THRESHOLD_TOLERANCE)
}

/// Bisection on the sign of the (optimized or fixed-noise) rate.
pub fn threshold_with(kind: ProtocolKind, policy: NoisePolicy, tol: f64) -> Result<Threshold> {
    let initial_hi = match kind {
        ProtocolKind::Bb84 => 0.25,
        ProtocolKind::SixState => 0.30,
        ProtocolKind::Custom(_) => {
            return Err(Error::invalid(
                "thresholds are defined for bb84 and six-state",
            ));
        }
    };
    let positive = |qber: f64| -> Result<bool> {
        Ok(rate_at_qber(kind, qber, policy)?.rate() > POSITIVE_RATE_FLOOR)
    };
    let mut lo = 0.0;
    if !positive(lo)? {
        return Err(Error::Invariant(
            "rate is not positive on a noiseless channel".into(),
        ));
    }
    let mut hi = initial_hi;
    while positive(hi)? {
        hi = (hi + 0.05).min(0.5 - 1e-9);
        if hi >= 0.5 - 1e-9 && positive(hi)? {
            return Err(Error::Invariant("no sign change below Q = 1/2".into()));
        }
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        qber: 0.5 * (lo + hi),
        bracket: [lo, hi],
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub qber: f64,
    pub q: f64,
    pub result: RateResult,
}

/// Rates over a grid of bit-error rates. The optimized curve is checked to be
/// non-increasing in `Q`.
pub fn rate_curve(kind: ProtocolKind, qbers: &[f64], policy: NoisePolicy) -> Result<Vec<CurveRow>> {
    let rows = qbers
        .iter()
        .map(|&qber| {
            let r = rate_at_qber(kind, qber, policy)?;
            Ok(CurveRow {
                qber,
                q: r.q_star,
                result: r.result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if policy == NoisePolicy::Optimized {
        let mut sorted: Vec<&CurveRow> = rows.iter().collect();
        sorted.sort_by(|a, b| a.qber.total_cmp(&b.qber));
        for w in sorted.windows(2) {
            if w[1].result.rate > w[0].result.rate + POSITIVE_RATE_FLOOR {
                return Err(Error::Invariant(format!(
                    "optimized rate increases between Q = {} and Q = {}",
                    w[0].qber, w[1].qber
                )));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb84(qber: f64) -> PauliDistribution {
        model_to_distribution(&ProtocolModel::new(ProtocolKind::Bb84, qber).unwrap()).unwrap()
    }

    #[test]
    fn lambda_plus_limits() {
        assert_eq!(lambda_plus(0.0, 0.3).unwrap(), 1.0);
        assert!((lambda_plus(0.5, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(lambda_plus(1.2, 0.1).is_err());
    }

    #[test]
    fn noiseless_rate_is_one() {
        let r = key_rate(&RateInput::new(PauliDistribution::noiseless(), 0.0).unwrap()).unwrap();
        assert_eq!(r.rate, 1.0);
    }

    #[test]
    fn q_zero_collapses_to_two_entropies() {
        for qber in [0.01, 0.05, 0.1] {
            let r = key_rate(&RateInput::new(bb84(qber), 0.0).unwrap()).unwrap();
            let h = binary_entropy(qber).unwrap();
            assert!((r.rate - (1.0 - 2.0 * h)).abs() < 1e-12);
            assert_eq!(r.shield_term, 0.0);
        }
    }

    #[test]
    fn result_terms_add_up() {
        let r = key_rate(&RateInput::new(bb84(0.07), 0.2).unwrap()).unwrap();
        assert!((r.rate - (1.0 - r.bit_term - r.phase_term + r.shield_term)).abs() < 1e-12);
    }

    #[test]
    fn optimizer_examples() {
        let zero = optimize_q(&PauliDistribution::noiseless()).unwrap();
        assert_eq!(zero.q_star, 0.0);
        assert_eq!(zero.rate(), 1.0);

        let d = bb84(0.05);
        let best = optimize_q(&d).unwrap();
        assert!(best.rate() >= key_rate(&RateInput::new(d, 0.0).unwrap()).unwrap().rate);

        let near = optimize_q(&bb84(0.123)).unwrap();
        assert!(near.rate() > POSITIVE_RATE_FLOOR);
        assert!(near.q_star > 0.3);
    }

    #[test]
    fn bb84_brackets_the_threshold() {
        assert!(optimize_q(&bb84(0.12)).unwrap().rate() > 0.0);
        let d = bb84(0.125);
        for i in 0..500 {
            let q = 0.5 * i as f64 / 500.0;
            assert!(
                key_rate(&RateInput::new(d, q).unwrap()).unwrap().rate < 0.0,
                "q = {q}"
            );
        }
    }

    #[test]
    fn thresholds() {
        let b = threshold(ProtocolKind::Bb84).unwrap();
        assert!((b.qber - 0.124).abs() < 5e-4, "{b:?}");
        let s = threshold(ProtocolKind::SixState).unwrap();
        assert!((s.qber - 0.141).abs() < 5e-4, "{s:?}");
        // Root of 1 - 2 H2(Q) = 0, computed independently at 30 digits: 0.1100278644...
        let sp = threshold_with(ProtocolKind::Bb84, NoisePolicy::Fixed(0.0), 1e-9).unwrap();
        assert!((sp.qber - 0.110_027_864_438).abs() < 1e-8);
    }

    #[test]
    fn curve_properties() {
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.005).collect();
        let opt = rate_curve(ProtocolKind::Bb84, &grid, NoisePolicy::Optimized).unwrap();
        let fixed = rate_curve(ProtocolKind::Bb84, &grid, NoisePolicy::Fixed(0.0)).unwrap();
        assert_eq!(opt[0].result.rate, 1.0);
        for (o, f) in opt.iter().zip(&fixed) {
            assert!(o.result.rate >= f.result.rate - 1e-12);
        }
    }
}
