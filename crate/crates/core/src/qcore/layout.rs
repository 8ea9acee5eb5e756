//! Named qubit registers and the index arithmetic behind them.
//!
//! Qubit 0 of a layout is the most significant bit of a basis index, and the
//! registers are laid out in order. For a layout `[A(2), B(1)]` the basis index
//! `0b101` is `|10>_A |1>_B`.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Layout {
    registers: Vec<Register>,
}

impl Layout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut layout = Layout::default();
        for (name, qubits) in registers {
            layout.push(name, qubits)?;
        }
        Ok(layout)
    }

    pub fn single(name: impl Into<String>, qubits: usize) -> Self {
        Layout {
            registers: vec![Register {
                name: name.into(),
                qubits,
            }],
        }
    }

    pub fn push(&mut self, name: impl Into<String>, qubits: usize) -> Result<()> {
        let name = name.into();
        if self.contains(&name) {
            return Err(Error::RegisterCollision(name));
        }
        self.registers.push(Register { name, qubits });
        Ok(())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn names(&self) -> Vec<&str> {
        self.registers.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn qubits(&self) -> usize {
        self.registers.iter().map(|r| r.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.qubits()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    pub fn get(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn width(&self, name: &str) -> Result<usize> {
        Ok(self.get(name)?.qubits)
    }

    /// Index of the first qubit of `name`.
    pub fn offset(&self, name: &str) -> Result<usize> {
        let mut offset = 0;
        for r in &self.registers {
            if r.name == name {
                return Ok(offset);
            }
            offset += r.qubits;
        }
        Err(Error::UnknownRegister(name.to_string()))
    }

    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut out = self.clone();
        for r in &other.registers {
            out.push(r.name.clone(), r.qubits)?;
        }
        Ok(out)
    }

    /// The named registers, in the order given.
    pub fn select(&self, names: &[&str]) -> Result<Layout> {
        let mut out = Layout::default();
        for &name in names {
            let r = self.get(name)?;
            out.push(r.name.clone(), r.qubits)?;
        }
        Ok(out)
    }

    /// Every register not named, in layout order.
    pub fn without(&self, names: &[&str]) -> Result<Layout> {
        for &name in names {
            self.get(name)?;
        }
        Ok(Layout {
            registers: self
                .registers
                .iter()
                .filter(|r| !names.contains(&r.name.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Same registers (names and widths) irrespective of order.
    pub fn same_set(&self, other: &Layout) -> bool {
        self.registers.len() == other.registers.len()
            && self.registers.iter().all(|r| {
                other
                    .get(&r.name)
                    .map(|o| o.qubits == r.qubits)
                    .unwrap_or(false)
            })
    }

    /// Bit positions (counted from the least significant bit of a global index)
    /// of every qubit in the named registers, most significant local bit first.
    pub fn bit_positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let total = self.qubits();
        let mut positions = Vec::new();
        for &name in names {
            let offset = self.offset(name)?;
            let width = self.width(name)?;
            positions.extend((0..width).map(|i| total - 1 - (offset + i)));
        }
        Ok(positions)
    }

    /// Extract the basis value of one register from a global index.
    pub fn register_value(&self, index: usize, name: &str) -> Result<usize> {
        let positions = self.bit_positions(&[name])?;
        Ok(gather_bits(index, &positions))
    }
}

/// For each local index `l` (over `positions.len()` bits, MSB first), the global
/// offset obtained by placing the local bits at `positions`.
pub(crate) fn scatter_table(positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|local| {
            positions
                .iter()
                .enumerate()
                .filter(|(i, _)| (local >> (k - 1 - i)) & 1 == 1)
                .fold(0usize, |acc, (_, &p)| acc | (1 << p))
        })
        .collect()
}

pub(crate) fn gather_bits(index: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .fold(0usize, |acc, &p| (acc << 1) | ((index >> p) & 1))
}

pub(crate) fn mask_of(positions: &[usize]) -> usize {
    positions.iter().fold(0usize, |acc, &p| acc | (1 << p))
}

/// Global indices whose bits under `mask` are all zero, ascending.
pub(crate) fn free_indices(total_qubits: usize, mask: usize) -> impl Iterator<Item = usize> {
    (0..1usize << total_qubits).filter(move |g| g & mask == 0)
}

/// `perm[t]` is the index in `from` holding the amplitude for index `t` of `to`.
pub(crate) fn permutation(from: &Layout, to: &Layout) -> Result<Vec<usize>> {
    if !from.same_set(to) {
        return Err(Error::LayoutMismatch(format!(
            "{:?} vs {:?}",
            from.names(),
            to.names()
        )));
    }
    let positions = from.bit_positions(&to.names())?;
    Ok(scatter_table(&positions))
}
