//! Untwisting with the Neumark-extended PGM.
//!
//! After `C_{A'B'}†`, a block labelled `(u, v)` holds `|φ^v>_{A'} |u>_{B'}` next to
//! `(Z^v)_B |Φ>^{⊗n}`. On the sector picked out by `B'` (correlated channels only)
//! and the phase syndrome `S = s`, the untwisting operator is
//!
//! ```text
//! D = Σ_{w ∈ V_s} |θ^w><θ^w|_{A'A''} ⊗ Z^w_B  +  P⊥ ⊗ I_B
//! ```
//!
//! which sends `|φ^v>|0>` to `<θ^v|φ^v 0> |θ^v>` next to `|Φ>^{⊗n}` plus
//! misidentified branches.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bits::{parity, BitString};
use crate::channel::{
    BlockState, ErrorPattern, FrameIndex, FrameState, PauliDistribution, REG_A1, REG_B, REG_B1,
};
use crate::pgm::{
    neumark_extend, pgm_construct, success_amplitudes, Ensemble, RankOnePOVM, REG_A2,
};
use crate::qcore::linalg::real;
use crate::qcore::{CMatrix, CVector, Layout, Operator, C64};
use crate::tolerance::STRUCTURAL;
use crate::{Error, Result};

use super::correct::REG_S;

/// Which copy of `D` acts: the bit-error pattern held in `B'` (correlated
/// channels) and the phase syndrome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SectorKey {
    pub u: Option<BitString>,
    pub syndrome: BitString,
}

#[derive(Debug, Clone)]
pub struct Sector {
    pub key: SectorKey,
    pub coset: Vec<BitString>,
    /// `p_{v|u}` (or `p_v`) restricted to the coset and renormalized.
    pub priors: Vec<f64>,
    /// Probability of landing in this sector.
    pub weight: f64,
    pub ensemble: Option<Ensemble>,
    pub povm: Option<RankOnePOVM>,
    /// `θ^w` on `A'(n) A''(m)` with the common ancilla width.
    pub theta: Vec<CVector>,
}

impl Sector {
    /// `I - Σ_w |θ^w><θ^w|` on `A' A''`.
    fn complement(&self, dim: usize) -> CMatrix {
        let mut p = CMatrix::identity(dim, dim);
        for t in &self.theta {
            p -= t * t.adjoint();
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct Untwisting {
    n: usize,
    q: f64,
    ancilla_qubits: usize,
    correlated: bool,
    syndrome_bits: usize,
    syndrome_of: Vec<BitString>,
    sectors: BTreeMap<SectorKey, Sector>,
}

/// Build the PGM, its Neumark extension, and the controlled `D` for every sector.
pub fn construct_untwisting(
    cosets: &BTreeMap<BitString, Vec<BitString>>,
    n: usize,
    q: f64,
    d: &PauliDistribution,
) -> Result<Untwisting> {
    d.validate()?;
    let q = crate::tolerance::clamp_probability(q)?;
    let syndrome_bits = cosets.keys().next().map(|s| s.len()).unwrap_or(0);
    let mut syndrome_of = vec![BitString::zeros(syndrome_bits); 1 << n];
    let mut seen = 0;
    for (s, coset) in cosets {
        for v in coset {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            syndrome_of[v.index()] = *s;
            seen += 1;
        }
    }
    if seen != 1 << n {
        return Err(Error::invalid("cosets do not partition {0,1}^n"));
    }

    let correlated = !d.is_independent();
    let bit_patterns: Vec<Option<BitString>> = if correlated {
        BitString::all(n).map(Some).collect()
    } else {
        vec![None]
    };
    let p_z = d.marginals().p_z;

    let mut sectors = BTreeMap::new();
    for u in &bit_patterns {
        for (s, coset) in cosets {
            let weights = coset
                .iter()
                .map(|v| match u {
                    Some(u) => d.pattern_probability(u, v),
                    None => Ok(crate::pgm::phase_prior(v, p_z)),
                })
                .collect::<Result<Vec<f64>>>()?;
            let weight: f64 = weights.iter().sum();
            let key = SectorKey {
                u: *u,
                syndrome: *s,
            };
            let (ensemble, povm, priors) = if weight > 0.0 {
                let e = Ensemble::phase_flipped(n, q, coset, &weights)?;
                let m = pgm_construct(&e)?;
                let priors = e.priors().to_vec();
                (Some(e), Some(m), priors)
            } else {
                (None, None, Vec::new())
            };
            sectors.insert(
                key,
                Sector {
                    key,
                    coset: coset.clone(),
                    priors,
                    weight,
                    ensemble,
                    povm,
                    theta: Vec::new(),
                },
            );
        }
    }

    let extensions = sectors
        .values()
        .map(|s| s.povm.as_ref().map(neumark_extend).transpose())
        .collect::<Result<Vec<_>>>()?;
    let ancilla_qubits = extensions
        .iter()
        .flatten()
        .map(|e| e.ancilla_qubits())
        .max()
        .unwrap_or(0);
    for (sector, ext) in sectors.values_mut().zip(extensions) {
        let Some(ext) = ext else { continue };
        sector.theta = ext
            .vectors()
            .iter()
            .map(|t| {
                let mut out = CVector::zeros(1 << (n + ancilla_qubits));
                for (idx, x) in t.iter().enumerate() {
                    let a1 = idx >> ext.ancilla_qubits();
                    let a2 = idx & ((1 << ext.ancilla_qubits()) - 1);
                    out[(a1 << ancilla_qubits) | a2] = *x;
                }
                out
            })
            .collect();
    }

    Ok(Untwisting {
        n,
        q,
        ancilla_qubits,
        correlated,
        syndrome_bits,
        syndrome_of,
        sectors,
    })
}

impl Untwisting {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn is_correlated(&self) -> bool {
        self.correlated
    }

    pub fn syndrome_bits(&self) -> usize {
        self.syndrome_bits
    }

    pub fn sectors(&self) -> &BTreeMap<SectorKey, Sector> {
        &self.sectors
    }

    pub fn syndrome_of(&self, v: &BitString) -> BitString {
        self.syndrome_of[v.index()]
    }

    pub fn sector_key(&self, u: &BitString, syndrome: BitString) -> SectorKey {
        SectorKey {
            u: self.correlated.then_some(*u),
            syndrome,
        }
    }

    /// The registers `D` acts on: `A'`, `A''` (when present) and `B`.
    pub fn target_layout(&self) -> Result<Layout> {
        let mut l = Layout::single(REG_A1, self.n);
        if self.ancilla_qubits > 0 {
            l.push(REG_A2, self.ancilla_qubits)?;
        }
        l.push(REG_B, self.n)?;
        Ok(l)
    }

    /// Registers controlling the choice of sector.
    pub fn control_registers(&self) -> Vec<&'static str> {
        let mut c = Vec::new();
        if self.correlated {
            c.push(REG_B1);
        }
        if self.syndrome_bits > 0 {
            c.push(REG_S);
        }
        c
    }

    fn shield_dim(&self) -> usize {
        1 << (self.n + self.ancilla_qubits)
    }

    /// `Σ_w |θ^w><θ^w| ⊗ Z^w_B + P⊥ ⊗ I_B`: the `A'`-controlled reading.
    pub fn sector_operator(&self, key: &SectorKey) -> Result<Operator> {
        let sector = self
            .sectors
            .get(key)
            .ok_or_else(|| Error::invalid(format!("no sector {key:?}")))?;
        let layout = self.target_layout()?;
        let ds = self.shield_dim();
        let db = 1usize << self.n;
        let mut m = CMatrix::zeros(ds * db, ds * db);
        let diag = |block: &CMatrix, signs: &dyn Fn(usize) -> f64, m: &mut CMatrix| {
            for b in 0..db {
                let s = signs(b);
                for i in 0..ds {
                    for j in 0..ds {
                        m[(i * db + b, j * db + b)] += block[(i, j)] * s;
                    }
                }
            }
        };
        for (w, t) in sector.coset.iter().zip(&sector.theta) {
            let proj = t * t.adjoint();
            diag(
                &proj,
                &|b| {
                    if parity(w.value(), b as u64) {
                        -1.0
                    } else {
                        1.0
                    }
                },
                &mut m,
            );
        }
        diag(&sector.complement(ds), &|_| 1.0, &mut m);
        Operator::unitary(m, layout)
    }

    /// The `B`-controlled reading: `W_b = Σ_w (-1)^{w·b} |θ^w><θ^w| + P⊥` for each value `b`.
    pub fn b_controlled_factors(&self, key: &SectorKey) -> Result<Vec<CMatrix>> {
        let sector = self
            .sectors
            .get(key)
            .ok_or_else(|| Error::invalid(format!("no sector {key:?}")))?;
        let ds = self.shield_dim();
        let complement = sector.complement(ds);
        Ok((0..1u64 << self.n)
            .map(|b| {
                let mut w_b = complement.clone();
                for (w, t) in sector.coset.iter().zip(&sector.theta) {
                    let sign = if parity(w.value(), b) { -1.0 } else { 1.0 };
                    w_b += t * t.adjoint() * real(sign);
                }
                w_b
            })
            .collect())
    }

    /// `Σ_b W_b ⊗ |b><b|_B` on the same layout as [`Untwisting::sector_operator`].
    pub fn sector_operator_from_b_control(&self, key: &SectorKey) -> Result<Operator> {
        let factors = self.b_controlled_factors(key)?;
        let ds = self.shield_dim();
        let db = 1usize << self.n;
        let mut m = CMatrix::zeros(ds * db, ds * db);
        for (b, w_b) in factors.iter().enumerate() {
            for i in 0..ds {
                for j in 0..ds {
                    m[(i * db + b, j * db + b)] = w_b[(i, j)];
                }
            }
        }
        Operator::unitary(m, self.target_layout()?)
    }

    /// Apply `C_{A'B'}†`, append `A''`, and apply the controlled `D` to every block.
    pub fn apply(&self, s: &BlockState) -> Result<BlockState> {
        let n = self.n;
        if s.n() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: s.n(),
            });
        }
        let shield = s.shield();
        let mut expect = Layout::new([(REG_A1, n), (REG_B1, n)])?;
        if self.syndrome_bits > 0 {
            expect.push(REG_S, self.syndrome_bits)?;
        }
        if shield != expect {
            return Err(Error::LayoutMismatch(format!(
                "untwisting expects shield {:?}, found {:?}",
                expect.names(),
                shield.names()
            )));
        }
        let k = self.syndrome_bits;
        let m = self.ancilla_qubits;
        let mask_n = (1u64 << n) - 1;
        let mask_k = (1u64 << k) - 1;
        let ds = self.shield_dim();
        let ops: BTreeMap<SectorKey, (Vec<(u64, CVector)>, CMatrix)> = self
            .sectors
            .iter()
            .map(|(key, sec)| {
                let thetas = sec
                    .coset
                    .iter()
                    .map(|w| w.value())
                    .zip(sec.theta.iter().cloned())
                    .collect();
                (*key, (thetas, sec.complement(ds)))
            })
            .collect();

        s.map_states(|_, st| {
            // C† : B' ^= A'. Shield index is a' | b' | s.
            let undone = st.permute_shield(|sh| {
                let a1 = sh >> (n + k);
                sh ^ ((a1 & mask_n) << k)
            })?;
            let with_anc = if m > 0 {
                undone.append_register(REG_A2, m, |_| 0)?
            } else {
                undone
            };
            // Group by everything except (a', a'').
            let mut groups: BTreeMap<(u64, u64, u64, u64), CVector> = BTreeMap::new();
            for (key, amp) in with_anc.entries() {
                let sh = key.shield;
                let a2 = sh & ((1u64 << m) - 1);
                let syn = (sh >> m) & mask_k;
                let b1 = (sh >> (m + k)) & mask_n;
                let a1 = sh >> (m + k + n);
                let v = groups
                    .entry((key.x, key.z, b1, syn))
                    .or_insert_with(|| CVector::zeros(ds));
                v[((a1 << m) | a2) as usize] += amp;
            }
            let mut entries: BTreeMap<FrameIndex, C64> = BTreeMap::new();
            let mut put = |x: u64, z: u64, b1: u64, syn: u64, vec: &CVector| {
                for (idx, c) in vec.iter().enumerate() {
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    let idx = idx as u64;
                    let a1 = idx >> m;
                    let a2 = idx & ((1u64 << m) - 1);
                    let shield = (((((a1 << n) | b1) << k) | syn) << m) | a2;
                    *entries.entry(FrameIndex { x, z, shield }).or_default() += c;
                }
            };
            for ((x, z, b1, syn), alpha) in groups {
                let key = SectorKey {
                    u: self.correlated.then(|| BitString::new(b1, n)).transpose()?,
                    syndrome: BitString::new(syn, k)?,
                };
                let (thetas, complement) = ops
                    .get(&key)
                    .ok_or_else(|| Error::Invariant(format!("no sector for {key:?}")))?;
                for (w, t) in thetas {
                    let c = t.dotc(&alpha);
                    let sign = if parity(*w, x) { -1.0 } else { 1.0 };
                    put(x, z ^ w, b1, syn, &(t * (c * sign)));
                }
                put(x, z, b1, syn, &(complement * &alpha));
            }
            entries.retain(|_, a| a.norm_sqr() > 0.0);
            FrameState::from_entries(n, with_anc.shield().clone(), entries)
        })
    }
}

#[derive(Debug, Clone)]
pub struct DistillationOutcome {
    pub state: BlockState,
    /// `Σ_l p_l F_l`, with `F_l` the overlap of block `l` with `|Φ>^{⊗n}` times
    /// its own normalized shield.
    pub fidelity: f64,
    pub epsilon: f64,
    /// `Σ_l p_l ||ψ_l - ideal_l||_1`, the trace distance between the untwisted
    /// state (Eve's labels included) and the ideal one.
    pub ideal_trace_distance: f64,
    pub label_fidelities: Vec<(ErrorPattern, f64, f64)>,
}

/// Untwist a phase-corrected block state and score it against the perfect
/// key `|Φ>^{⊗n}` with an arbitrary shield.
pub fn untwist_fidelity(s: &BlockState, u: &Untwisting) -> Result<DistillationOutcome> {
    let state = u.apply(s)?;
    let mut fidelity = 0.0;
    let mut ideal_trace_distance = 0.0;
    let mut label_fidelities = Vec::with_capacity(state.len());
    // 1 - F is accumulated from the weight off the ideal frame, which avoids
    // cancellation when F is close to one.
    let mut infidelity = 0.0;
    for (label, b) in state.blocks() {
        let (on, off) = b
            .state
            .entries()
            .iter()
            .fold((0.0, 0.0), |(on, off), (k, a)| {
                if k.x == 0 && k.z == 0 {
                    (on + a.norm_sqr(), off)
                } else {
                    (on, off + a.norm_sqr())
                }
            });
        let total = on + off;
        let f_l = (on / total).sqrt().min(1.0);
        let miss = off / total;
        fidelity += b.weight * f_l;
        infidelity += b.weight * miss / (1.0 + f_l);
        ideal_trace_distance += b.weight * 2.0 * miss.sqrt();
        label_fidelities.push((*label, b.weight, f_l));
    }
    let fidelity = fidelity.min(1.0);
    Ok(DistillationOutcome {
        state,
        fidelity,
        epsilon: (infidelity * (2.0 - infidelity)).max(0.0).sqrt(),
        ideal_trace_distance,
        label_fidelities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormulaFidelity {
    /// `Σ_{u,v} p_uv |<θ̃^v|φ^v>| = <sqrt(P_s^v)>`.
    pub fidelity: f64,
    /// `Σ_{u,v} p_uv (1 - P_s^v)`.
    pub decoding_error: f64,
}

/// Fidelity predicted from the PGM success amplitudes alone, valid when the
/// bit correction is perfect.
pub fn formula_fidelity(u: &Untwisting, d: &PauliDistribution) -> Result<FormulaFidelity> {
    let mut amplitudes: BTreeMap<(SectorKey, BitString), f64> = BTreeMap::new();
    for (key, sector) in u.sectors() {
        if let (Some(e), Some(m)) = (&sector.ensemble, &sector.povm) {
            for (v, a) in sector.coset.iter().zip(success_amplitudes(e, m)?) {
                amplitudes.insert((*key, *v), a.norm());
            }
        }
    }
    let mut fidelity = 0.0;
    let mut decoding_error = 0.0;
    for uu in BitString::all(u.n()) {
        for v in BitString::all(u.n()) {
            let p = d.pattern_probability(&uu, &v)?;
            if p == 0.0 {
                continue;
            }
            let key = u.sector_key(&uu, u.syndrome_of(&v));
            let a = amplitudes.get(&(key, v)).copied().ok_or_else(|| {
                Error::Invariant(format!("pattern {v} missing from sector {key:?}"))
            })?;
            fidelity += p * a;
            decoding_error += p * (1.0 - a * a);
        }
    }
    if fidelity < 1.0 - decoding_error - STRUCTURAL {
        return Err(Error::Invariant(format!(
            "<sqrt P_s> = {fidelity} below 1 - P_e = {}",
            1.0 - decoding_error
        )));
    }
    Ok(FormulaFidelity {
        fidelity: fidelity.min(1.0),
        decoding_error,
    })
}
