use crate::bits::{parity, BitString};
use crate::tolerance::STRUCTURAL;
use crate::{Error, Result};

use super::density::DensityOperator;
use super::layout::{permutation, scatter_table, Layout};
use super::linalg::{kron_vec, real, CMatrix, CVector, C64};
use super::operator::Operator;

/// A normalized pure state over named registers.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: CVector,
    layout: Layout,
}

impl StateVector {
    pub fn new(amplitudes: CVector, layout: Layout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > STRUCTURAL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalize and wrap; fails on the zero vector.
    pub fn normalized(amplitudes: CVector, layout: Layout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < STRUCTURAL {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        if index >= layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: index,
            });
        }
        let mut amplitudes = CVector::zeros(layout.dim());
        amplitudes[index] = real(1.0);
        Ok(Self { amplitudes, layout })
    }

    /// `|bits>` on a single register.
    pub fn from_bits(register: &str, bits: &BitString) -> Self {
        let layout = Layout::single(register, bits.len());
        let mut amplitudes = CVector::zeros(layout.dim());
        amplitudes[bits.index()] = real(1.0);
        Self { amplitudes, layout }
    }

    /// `|Phi>^{⊗n} = Σ_x |x>_A |x>_B / sqrt(2^n)` with `A` and `B` each `n` qubits wide.
    pub fn bell_pairs(a: &str, b: &str, n: usize) -> Result<Self> {
        let layout = Layout::new([(a, n), (b, n)])?;
        let d = 1usize << n;
        let amp = real(1.0 / (d as f64).sqrt());
        let mut amplitudes = CVector::zeros(layout.dim());
        for x in 0..d {
            amplitudes[(x << n) | x] = amp;
        }
        Ok(Self { amplitudes, layout })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            layout,
        })
    }

    pub fn reorder(&self, to: &Layout) -> Result<Self> {
        let perm = permutation(&self.layout, to)?;
        Ok(Self {
            amplitudes: CVector::from_iterator(
                perm.len(),
                perm.iter().map(|&i| self.amplitudes[i]),
            ),
            layout: to.clone(),
        })
    }

    /// `<self|other>`; `other` is reordered to this layout when needed.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        let other = if other.layout == self.layout {
            other.clone()
        } else {
            other.reorder(&self.layout)?
        };
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    pub fn apply(&self, op: &Operator) -> Result<Self> {
        let data = CMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice());
        let (out, layout) = op.apply_columns(&data, &self.layout)?;
        let amplitudes = CVector::from_column_slice(out.as_slice());
        match op.kind() {
            super::OperatorKind::General => Self::normalized(amplitudes, layout),
            _ => Ok(Self { amplitudes, layout }),
        }
    }

    /// `X^u Z^v` on register `reg`, qubit `i` receiving `X^{u_i} Z^{v_i}`.
    pub fn apply_pauli(&self, reg: &str, u: &BitString, v: &BitString) -> Result<Self> {
        let width = self.layout.width(reg)?;
        for s in [u, v] {
            if s.len() != width {
                return Err(Error::LengthMismatch {
                    expected: width,
                    found: s.len(),
                });
            }
        }
        let positions = self.layout.bit_positions(&[reg])?;
        let table = scatter_table(&positions);
        let x_mask = table[u.index()];
        let z_mask = table[v.index()];
        let mut amplitudes = CVector::zeros(self.dim());
        for (g, amp) in self.amplitudes.iter().enumerate() {
            let sign = if parity(g as u64, z_mask as u64) {
                -1.0
            } else {
                1.0
            };
            amplitudes[g ^ x_mask] = amp * sign;
        }
        Ok(Self {
            amplitudes,
            layout: self.layout.clone(),
        })
    }

    /// Apply `select(c)` on the branch where the control registers read `c`
    /// (their concatenated value); branches mapped to `None` are left alone.
    /// Selected operators must be square and must not touch the controls.
    pub fn apply_controlled<'a, F>(&self, controls: &[&str], select: F) -> Result<Self>
    where
        F: Fn(usize) -> Option<&'a Operator>,
    {
        let control_positions = self.layout.bit_positions(controls)?;
        let control_table = scatter_table(&control_positions);
        let rest = self.layout.without(controls)?;
        let rest_table = scatter_table(&self.layout.bit_positions(&rest.names())?);
        let mut amplitudes = self.amplitudes.clone();
        for (c, &offset) in control_table.iter().enumerate() {
            let Some(op) = select(c) else { continue };
            if !op.is_square() {
                return Err(Error::invalid("controlled operators must be square"));
            }
            let branch = CMatrix::from_fn(rest.dim(), 1, |r, _| {
                self.amplitudes[offset | rest_table[r]]
            });
            let (out, _) = op.apply_columns(&branch, &rest)?;
            for (r, &g) in rest_table.iter().enumerate() {
                amplitudes[offset | g] = out[(r, 0)];
            }
        }
        Ok(Self {
            amplitudes,
            layout: self.layout.clone(),
        })
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::from_parts_unchecked(
            &self.amplitudes * self.amplitudes.adjoint(),
            self.layout.clone(),
        )
    }

    /// Reduced state on the kept registers (in the order given).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        let kept = self.layout.select(keep)?;
        let traced = self.layout.without(keep)?;
        let kt = scatter_table(&self.layout.bit_positions(keep)?);
        let tt = scatter_table(&self.layout.bit_positions(&traced.names())?);
        let dim = kept.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = tt
                    .iter()
                    .map(|&t| self.amplitudes[kt[i] | t] * self.amplitudes[kt[j] | t].conj())
                    .sum();
            }
        }
        Ok(DensityOperator::from_parts_unchecked(m, kept))
    }
}
