use crate::bits::{parity, BitString};
use crate::tolerance::STRUCTURAL;
use crate::{Error, Result};

use super::layout::{free_indices, mask_of, scatter_table, Layout};
use super::linalg::{isometry_defect, real, unitarity_defect, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    General,
    Unitary,
    Isometry,
}

/// A linear map between named register spaces.
///
/// Square operators act in place on their registers. An isometry may have a
/// different output layout (typically the input plus fresh ancilla registers);
/// applying it removes the input registers from the state and appends the
/// output registers at the end.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: CMatrix,
    input: Layout,
    output: Layout,
    kind: OperatorKind,
}

impl Operator {
    pub fn new(matrix: CMatrix, layout: Layout) -> Result<Self> {
        check_shape(&matrix, layout.dim(), layout.dim())?;
        Ok(Self {
            matrix,
            output: layout.clone(),
            input: layout,
            kind: OperatorKind::General,
        })
    }

    pub fn unitary(matrix: CMatrix, layout: Layout) -> Result<Self> {
        check_shape(&matrix, layout.dim(), layout.dim())?;
        let defect = unitarity_defect(&matrix);
        if defect > STRUCTURAL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self {
            matrix,
            output: layout.clone(),
            input: layout,
            kind: OperatorKind::Unitary,
        })
    }

    pub fn isometry(matrix: CMatrix, input: Layout, output: Layout) -> Result<Self> {
        check_shape(&matrix, output.dim(), input.dim())?;
        let defect = isometry_defect(&matrix);
        if defect > STRUCTURAL {
            return Err(Error::NotIsometry(defect));
        }
        let kind = if input == output {
            OperatorKind::Unitary
        } else {
            OperatorKind::Isometry
        };
        Ok(Self {
            matrix,
            input,
            output,
            kind,
        })
    }

    pub fn identity(layout: Layout) -> Self {
        let dim = layout.dim();
        Self {
            matrix: CMatrix::identity(dim, dim),
            output: layout.clone(),
            input: layout,
            kind: OperatorKind::Unitary,
        }
    }

    /// `X^u Z^v` on every qubit of one register (Z acts first).
    pub fn pauli(register: &str, u: &BitString, v: &BitString) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        let layout = Layout::single(register, u.len());
        let dim = layout.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            let sign = if parity(k as u64, v.value()) {
                -1.0
            } else {
                1.0
            };
            m[(k ^ u.index(), k)] = real(sign);
        }
        Ok(Self {
            matrix: m,
            output: layout.clone(),
            input: layout,
            kind: OperatorKind::Unitary,
        })
    }

    /// Qubit-wise CNOT from `control[i]` to `target[i]` on two registers of equal width.
    pub fn cnot(control: &str, target: &str, width: usize) -> Result<Self> {
        let layout = Layout::new([(control, width), (target, width)])?;
        let dim = layout.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for c in 0..1usize << width {
            for t in 0..1usize << width {
                m[((c << width) | (t ^ c), (c << width) | t)] = real(1.0);
            }
        }
        Ok(Self {
            matrix: m,
            output: layout.clone(),
            input: layout,
            kind: OperatorKind::Unitary,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn input(&self) -> &Layout {
        &self.input
    }

    pub fn output(&self) -> &Layout {
        &self.output
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_square(&self) -> bool {
        self.input == self.output
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub fn isometry_defect(&self) -> f64 {
        isometry_defect(&self.matrix)
    }

    pub fn adjoint(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::invalid("adjoint of a non-square operator"));
        }
        Ok(Self {
            matrix: self.matrix.adjoint(),
            input: self.input.clone(),
            output: self.output.clone(),
            kind: self.kind,
        })
    }

    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let input = self.input.concat(&other.input)?;
        let output = self.output.concat(&other.output)?;
        let kind = match (self.kind, other.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            (OperatorKind::General, _) | (_, OperatorKind::General) => OperatorKind::General,
            _ => OperatorKind::Isometry,
        };
        Ok(Self {
            matrix: self.matrix.kronecker(&other.matrix),
            input,
            output,
            kind,
        })
    }

    /// `self * other` for square operators on the same layout.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        if !self.is_square() || self.input != other.output || other.input != other.output {
            return Err(Error::LayoutMismatch(
                "compose needs square operators on one layout".into(),
            ));
        }
        let kind = if self.kind == OperatorKind::Unitary && other.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            input: self.input.clone(),
            output: self.output.clone(),
            kind,
        })
    }

    /// Re-express a square operator on a permuted register order.
    pub fn reorder(&self, to: &Layout) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::invalid("reorder of a non-square operator"));
        }
        let perm = super::layout::permutation(&self.input, to)?;
        let dim = to.dim();
        let matrix = CMatrix::from_fn(dim, dim, |r, c| self.matrix[(perm[r], perm[c])]);
        Ok(Self {
            matrix,
            input: to.clone(),
            output: to.clone(),
            kind: self.kind,
        })
    }

    /// Apply to every column of `data`, whose rows are indexed by `layout`.
    ///
    /// Returns the transformed columns and the resulting layout.
    pub fn apply_columns(&self, data: &CMatrix, layout: &Layout) -> Result<(CMatrix, Layout)> {
        if data.nrows() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: data.nrows(),
            });
        }
        let in_names = self.input.names();
        for r in self.input.registers() {
            let width = layout.width(&r.name)?;
            if width != r.qubits {
                return Err(Error::DimensionMismatch {
                    expected: r.qubits,
                    found: width,
                });
            }
        }
        let in_positions = layout.bit_positions(&in_names)?;
        let in_table = scatter_table(&in_positions);
        let rest = layout.without(&in_names)?;
        let rest_in: Vec<usize> = free_indices(layout.qubits(), mask_of(&in_positions)).collect();

        let (out_layout, out_table, rest_out) = if self.is_square() {
            (layout.clone(), in_table.clone(), rest_in.clone())
        } else {
            let out_layout = rest.concat(&self.output)?;
            let out_positions = out_layout.bit_positions(&self.output.names())?;
            let rest_out = free_indices(out_layout.qubits(), mask_of(&out_positions)).collect();
            (out_layout, scatter_table(&out_positions), rest_out)
        };

        let columns: Vec<Vec<(usize, C64)>> = (0..self.matrix.ncols())
            .map(|c| {
                (0..self.matrix.nrows())
                    .filter_map(|r| {
                        let v = self.matrix[(r, c)];
                        (v != C64::new(0.0, 0.0)).then_some((r, v))
                    })
                    .collect()
            })
            .collect();

        let mut out = CMatrix::zeros(out_layout.dim(), data.ncols());
        for col in 0..data.ncols() {
            for (base_in, base_out) in rest_in.iter().zip(&rest_out) {
                for (local, entries) in columns.iter().enumerate() {
                    let x = data[(base_in | in_table[local], col)];
                    if x.re == 0.0 && x.im == 0.0 {
                        continue;
                    }
                    for &(row, v) in entries {
                        out[(base_out | out_table[row], col)] += v * x;
                    }
                }
            }
        }
        Ok((out, out_layout))
    }
}

fn check_shape(m: &CMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: m.nrows(),
        });
    }
    if m.ncols() != cols {
        return Err(Error::DimensionMismatch {
            expected: cols,
            found: m.ncols(),
        });
    }
    Ok(())
}
