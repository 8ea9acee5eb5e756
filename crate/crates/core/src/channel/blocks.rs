//! Coherent protocol states in block form.
//!
//! Eve's registers `E1 = |u>` and `E2 = |v>` are orthogonal labels, so the global
//! state `Σ sqrt(p_uv) |ψ_uv>_{AB shield} |u>|v>` is stored as one pure state per
//! label. Each of those is written in the Bell-frame basis
//!
//! ```text
//! |x, z, s> = (I_A ⊗ X^x Z^z)_B |Φ>^{⊗n}_{AB} ⊗ |s>_shield
//! ```
//!
//! which is orthonormal and keeps every state in this crate sparse: a Pauli on
//! either half of `AB` only relabels frames.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::{parity, BitString};
use crate::qcore::linalg::real;
use crate::qcore::{CMatrix, CVector, DensityOperator, Layout, StateVector, C64};
use crate::tolerance::{clamp_probability, BLOCK_ENTRIES, DENSE_MATRIX_ENTRIES, STRUCTURAL};
use crate::{Error, Result};

use super::pauli::PauliDistribution;

/// Largest block length accepted by [`build_key_state`] unless overridden.
pub const DEFAULT_MAX_N: usize = 8;

pub const REG_A: &str = "A";
pub const REG_B: &str = "B";
pub const REG_A1: &str = "A'";
pub const REG_B1: &str = "B'";
pub const REG_E1: &str = "E1";
pub const REG_E2: &str = "E2";

/// The error `X^u Z^v` on `n` qubits; also Eve's label for a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ErrorPattern {
    pub u: BitString,
    pub v: BitString,
}

impl ErrorPattern {
    pub fn new(u: BitString, v: BitString) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        Ok(Self { u, v })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }
}

/// Basis element of the frame representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrameIndex {
    pub x: u64,
    pub z: u64,
    pub shield: u64,
}

/// A pure state on `A B shield` in the Bell-frame basis.
#[derive(Debug, Clone)]
pub struct FrameState {
    n: usize,
    shield: Layout,
    entries: BTreeMap<FrameIndex, C64>,
}

impl FrameState {
    /// `(I ⊗ X^x Z^z)|Φ>^{⊗n}` with an empty shield.
    pub fn pauli_frame(n: usize, x: u64, z: u64) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(FrameIndex { x, z, shield: 0 }, real(1.0));
        Self {
            n,
            shield: Layout::default(),
            entries,
        }
    }

    pub fn bell(n: usize) -> Self {
        Self::pauli_frame(n, 0, 0)
    }

    pub fn from_entries(
        n: usize,
        shield: Layout,
        entries: BTreeMap<FrameIndex, C64>,
    ) -> Result<Self> {
        let dim = 1u64 << n;
        for k in entries.keys() {
            if k.x >= dim || k.z >= dim || k.shield >= shield.dim() as u64 {
                return Err(Error::invalid(format!("frame index {k:?} out of range")));
            }
        }
        Ok(Self { n, shield, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shield(&self) -> &Layout {
        &self.shield
    }

    pub fn entries(&self) -> &BTreeMap<FrameIndex, C64> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, x: u64, z: u64, shield: u64) -> C64 {
        self.entries
            .get(&FrameIndex { x, z, shield })
            .copied()
            .unwrap_or_default()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FrameState) -> Result<C64> {
        if self.n != other.n || self.shield != other.shield {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.shield.names(),
                other.shield.names()
            )));
        }
        Ok(self
            .entries
            .iter()
            .filter_map(|(k, a)| other.entries.get(k).map(|b| a.conj() * b))
            .sum())
    }

    /// Build a new state from `f(index, amplitude)`, which lists the images of
    /// one basis element. Images are summed; exact zeros are dropped.
    pub fn transform<F>(&self, shield: Layout, f: F) -> Result<Self>
    where
        F: Fn(&FrameIndex, C64) -> Vec<(FrameIndex, C64)>,
    {
        let mut entries: BTreeMap<FrameIndex, C64> = BTreeMap::new();
        for (k, &a) in &self.entries {
            for (k2, b) in f(k, a) {
                *entries.entry(k2).or_default() += b;
            }
            if entries.len() > BLOCK_ENTRIES {
                return Err(Error::budget(
                    "block state amplitudes",
                    entries.len(),
                    BLOCK_ENTRIES,
                ));
            }
        }
        entries.retain(|_, a| a.norm_sqr() > 0.0);
        Self::from_entries(self.n, shield, entries)
    }

    /// Append a register holding `|value(frame)>` to the shield.
    pub fn append_register<F>(&self, name: &str, width: usize, value: F) -> Result<Self>
    where
        F: Fn(&FrameIndex) -> u64,
    {
        let mut shield = self.shield.clone();
        shield.push(name, width)?;
        self.transform(shield, |k, a| {
            let v = value(k);
            debug_assert!(width == 64 || v >> width == 0);
            vec![(
                FrameIndex {
                    shield: (k.shield << width) | v,
                    ..*k
                },
                a,
            )]
        })
    }

    /// Relabel shield basis states by a permutation.
    pub fn permute_shield<F>(&self, perm: F) -> Result<Self>
    where
        F: Fn(u64) -> u64,
    {
        self.transform(self.shield.clone(), |k, a| {
            vec![(
                FrameIndex {
                    shield: perm(k.shield),
                    ..*k
                },
                a,
            )]
        })
    }

    /// Components `w^{ab} = (<a|_A <b|_B ⊗ I) |ψ>` as dense shield vectors, for
    /// every pair with a nonzero component.
    pub fn key_components(&self) -> BTreeMap<(u64, u64), CVector> {
        let d = 1u64 << self.n;
        let scale = 1.0 / (d as f64).sqrt();
        let mut out: BTreeMap<(u64, u64), CVector> = BTreeMap::new();
        for (k, &amp) in &self.entries {
            for a in 0..d {
                let sign = if parity(k.z, a) { -scale } else { scale };
                let v = out
                    .entry((a, a ^ k.x))
                    .or_insert_with(|| CVector::zeros(self.shield.dim()));
                v[k.shield as usize] += amp * sign;
            }
        }
        out
    }

    /// Dense amplitudes on `A(n) B(n) shield`.
    pub fn to_state_vector(&self) -> Result<StateVector> {
        let layout = Layout::new([(REG_A, self.n), (REG_B, self.n)])?.concat(&self.shield)?;
        let dim = layout.dim();
        let sq = self.shield.qubits();
        let mut amplitudes = CVector::zeros(dim);
        for ((a, b), w) in self.key_components() {
            let base = (((a << self.n) | b) as usize) << sq;
            for (s, c) in w.iter().enumerate() {
                amplitudes[base | s] += c;
            }
        }
        StateVector::new(amplitudes, layout)
    }

    /// Inverse of [`FrameState::to_state_vector`] for a state whose first two
    /// registers are `A(n)` and `B(n)`.
    pub fn from_state_vector(state: &StateVector, n: usize) -> Result<Self> {
        let names = state.layout().names();
        if names.len() < 2 || names[0] != REG_A || names[1] != REG_B {
            return Err(Error::LayoutMismatch(format!(
                "expected A, B first, found {names:?}"
            )));
        }
        let shield = state.layout().without(&[REG_A, REG_B])?;
        let sq = shield.qubits();
        let d = 1u64 << n;
        let scale = 1.0 / (d as f64).sqrt();
        let amps = state.amplitudes();
        let mut entries = BTreeMap::new();
        for x in 0..d {
            for z in 0..d {
                for s in 0..shield.dim() as u64 {
                    let c: C64 = (0..d)
                        .map(|a| {
                            let idx = ((((a << n) | (a ^ x)) as usize) << sq) | s as usize;
                            let sign = if parity(z, a) { -scale } else { scale };
                            amps[idx] * sign
                        })
                        .sum();
                    if c.norm() > STRUCTURAL * STRUCTURAL {
                        entries.insert(FrameIndex { x, z, shield: s }, c);
                    }
                }
            }
        }
        Self::from_entries(n, shield, entries)
    }
}

#[derive(Debug, Clone)]
pub struct Block {
    pub weight: f64,
    pub state: FrameState,
}

/// Eve-label-indexed family of pure states on `A B shield`.
#[derive(Debug, Clone)]
pub struct BlockState {
    n: usize,
    blocks: BTreeMap<ErrorPattern, Block>,
}

impl BlockState {
    pub fn new(n: usize, blocks: BTreeMap<ErrorPattern, Block>) -> Result<Self> {
        let s = Self { n, blocks };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.blocks.values().map(|b| b.weight).sum();
        if (total - 1.0).abs() > STRUCTURAL {
            return Err(Error::InvalidDistribution(format!(
                "block weights sum to {total}"
            )));
        }
        let mut shield: Option<&Layout> = None;
        for (label, b) in &self.blocks {
            if label.n() != self.n || b.state.n != self.n {
                return Err(Error::LengthMismatch {
                    expected: self.n,
                    found: b.state.n,
                });
            }
            if b.weight < 0.0 {
                return Err(Error::InvalidProbability(b.weight));
            }
            let norm = b.state.norm_squared();
            if (norm - 1.0).abs() > STRUCTURAL {
                return Err(Error::NotNormalized(norm));
            }
            match shield {
                None => shield = Some(&b.state.shield),
                Some(s) if s != &b.state.shield => {
                    return Err(Error::LayoutMismatch(
                        "blocks disagree on the shield".into(),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &BTreeMap<ErrorPattern, Block> {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.blocks.values().map(|b| b.weight).sum()
    }

    pub fn shield(&self) -> Layout {
        self.blocks
            .values()
            .next()
            .map(|b| b.state.shield.clone())
            .unwrap_or_default()
    }

    /// Apply `f` to every block state (in parallel) and revalidate.
    pub fn map_states<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&ErrorPattern, &FrameState) -> Result<FrameState> + Sync,
    {
        let blocks = self
            .blocks
            .par_iter()
            .map(|(label, b)| {
                Ok((
                    *label,
                    Block {
                        weight: b.weight,
                        state: f(label, &b.state)?,
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n, blocks.into_iter().collect())
    }

    /// `Σ_l sqrt(p_l) |ψ_l> |u>_{E1} |v>_{E2}` as a dense vector.
    pub fn to_state_vector_with_eve(&self) -> Result<StateVector> {
        let mut total: Option<CVector> = None;
        let mut layout = None;
        for (label, b) in &self.blocks {
            if b.weight == 0.0 {
                continue;
            }
            let eve = StateVector::from_bits(REG_E1, &label.u)
                .tensor(&StateVector::from_bits(REG_E2, &label.v))?;
            let part = b.state.to_state_vector()?.tensor(&eve)?;
            check_dense_budget("state with Eve's registers", part.dim())?;
            let scaled = part.amplitudes() * real(b.weight.sqrt());
            match total.as_mut() {
                None => {
                    total = Some(scaled);
                    layout = Some(part.layout().clone());
                }
                Some(t) => *t += scaled,
            }
        }
        match (total, layout) {
            (Some(t), Some(l)) => StateVector::new(t, l),
            _ => Err(Error::invalid("empty block state")),
        }
    }

    /// The state of `A B shield` with Eve traced out: `Σ_l p_l |ψ_l><ψ_l|`.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let layout = Layout::new([(REG_A, self.n), (REG_B, self.n)])?.concat(&self.shield())?;
        let dim = layout.dim();
        if dim.saturating_mul(dim) > DENSE_MATRIX_ENTRIES {
            return Err(Error::budget(
                "dense density matrix",
                dim,
                1 << (DENSE_MATRIX_ENTRIES.ilog2() / 2),
            ));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for b in self.blocks.values() {
            if b.weight == 0.0 {
                continue;
            }
            let psi = b.state.to_state_vector()?;
            m += psi.amplitudes() * psi.amplitudes().adjoint() * real(b.weight);
        }
        DensityOperator::new(m, layout)
    }
}

fn check_dense_budget(what: &str, dim: usize) -> Result<()> {
    const LIMIT: usize = 1 << 24;
    if dim > LIMIT {
        return Err(Error::budget(what, dim, LIMIT));
    }
    Ok(())
}

/// `Σ_{u,v} sqrt(p_uv) (I ⊗ X^u Z^v)|Φ>^{⊗n} |u>|v>`, with `p_uv` the i.i.d.
/// pattern probability. Zero-probability patterns are omitted.
pub fn build_key_state(n: usize, d: &PauliDistribution) -> Result<BlockState> {
    build_key_state_with_limit(n, d, DEFAULT_MAX_N)
}

pub fn build_key_state_with_limit(
    n: usize,
    d: &PauliDistribution,
    max_n: usize,
) -> Result<BlockState> {
    if n == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    if n > max_n {
        return Err(Error::budget("block length n", n, max_n));
    }
    d.validate()?;
    let mut blocks = BTreeMap::new();
    for u in BitString::all(n) {
        for v in BitString::all(n) {
            let weight = d.pattern_probability(&u, &v)?;
            if weight == 0.0 {
                continue;
            }
            blocks.insert(
                ErrorPattern { u, v },
                Block {
                    weight,
                    state: FrameState::pauli_frame(n, u.value(), v.value()),
                },
            );
        }
    }
    BlockState::new(n, blocks)
}

/// Alice flips each key bit with probability `q`, coherently: an ancilla
/// `|φ>^{⊗n}_{A'}` with `|φ> = sqrt(1-q)|0> + sqrt(q)|1>` controls `X` on `A`.
///
/// Per block this maps `|x, z>` to `Σ_f sqrt(q_f) (-1)^{z·f} |x⊕f, z> |f>_{A'}`.
pub fn apply_noisy_processing(s: &BlockState, q: f64) -> Result<BlockState> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability(q));
    }
    let q = clamp_probability(q)?;
    let n = s.n();
    if s.shield().contains(REG_A1) {
        return Err(Error::RegisterCollision(REG_A1.into()));
    }
    let amplitudes: Vec<(u64, f64)> = (0..1u64 << n)
        .map(|f| {
            let w = f.count_ones() as i32;
            (f, (q.powi(w) * (1.0 - q).powi(n as i32 - w)).sqrt())
        })
        .filter(|(_, a)| *a > 0.0)
        .collect();
    s.map_states(|_, state| {
        let mut shield = state.shield().clone();
        shield.push(REG_A1, n)?;
        state.transform(shield, |k, a| {
            amplitudes
                .iter()
                .map(|&(f, amp)| {
                    let sign = if parity(k.z, f) { -amp } else { amp };
                    (
                        FrameIndex {
                            x: k.x ^ f,
                            z: k.z,
                            shield: (k.shield << n) | f,
                        },
                        a * sign,
                    )
                })
                .collect()
        })
    })
}
