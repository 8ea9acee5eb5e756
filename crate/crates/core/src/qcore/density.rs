use crate::tolerance::STRUCTURAL;
use crate::{Error, Result};

use super::layout::{permutation, scatter_table, Layout};
use super::linalg::{
    check_psd_spectrum, hermitian_eigenvalues, hermiticity_defect, real, trace, CMatrix,
};
use super::operator::Operator;

/// A mixed state over named registers.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    layout: Layout,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix, layout: Layout) -> Result<Self> {
        let rho = Self::checked_shape(matrix, layout)?;
        rho.validate()?;
        Ok(rho)
    }

    fn checked_shape(matrix: CMatrix, layout: Layout) -> Result<Self> {
        if matrix.nrows() != layout.dim() || matrix.ncols() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { matrix, layout })
    }

    pub(crate) fn from_parts_unchecked(matrix: CMatrix, layout: Layout) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.dim());
        Self { matrix, layout }
    }

    pub fn validate(&self) -> Result<()> {
        let defect = hermiticity_defect(&self.matrix);
        if defect > STRUCTURAL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = trace(&self.matrix);
        if (tr.re - 1.0).abs() > STRUCTURAL || tr.im.abs() > STRUCTURAL {
            return Err(Error::BadTrace(tr.re));
        }
        check_psd_spectrum(&hermitian_eigenvalues(&self.matrix)?)
    }

    pub fn maximally_mixed(layout: Layout) -> Self {
        let dim = layout.dim();
        Self {
            matrix: CMatrix::identity(dim, dim) * real(1.0 / dim as f64),
            layout,
        }
    }

    /// Convex combination of states sharing one register set.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::invalid("empty mixture"));
        };
        let layout = first.layout.clone();
        let mut m = CMatrix::zeros(layout.dim(), layout.dim());
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidProbability(*w));
            }
            let rho = rho.reorder(&layout)?;
            m += &rho.matrix * real(*w);
        }
        Self::new(m, layout)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Ok(Self {
            layout: self.layout.concat(&other.layout)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    pub fn reorder(&self, to: &Layout) -> Result<Self> {
        if &self.layout == to {
            return Ok(self.clone());
        }
        let perm = permutation(&self.layout, to)?;
        let dim = to.dim();
        Ok(Self {
            matrix: CMatrix::from_fn(dim, dim, |r, c| self.matrix[(perm[r], perm[c])]),
            layout: to.clone(),
        })
    }

    /// Reduced state on `keep` (registers in the order given).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let kept = self.layout.select(keep)?;
        let traced = self.layout.without(keep)?;
        let kt = scatter_table(&self.layout.bit_positions(keep)?);
        let tt = scatter_table(&self.layout.bit_positions(&traced.names())?);
        let dim = kept.dim();
        let matrix = CMatrix::from_fn(dim, dim, |i, j| {
            tt.iter()
                .map(|&t| self.matrix[(kt[i] | t, kt[j] | t)])
                .sum()
        });
        Ok(Self {
            matrix,
            layout: kept,
        })
    }

    /// `V rho V†` for a unitary or isometry acting on a subset of the registers.
    pub fn conjugate_by(&self, op: &Operator) -> Result<Self> {
        let (left, layout) = op.apply_columns(&self.matrix, &self.layout)?;
        let (both, layout2) = op.apply_columns(&left.adjoint(), &self.layout)?;
        debug_assert_eq!(layout, layout2);
        Ok(Self {
            matrix: both,
            layout,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::StateVector;

    #[test]
    fn rejects_bad_inputs() {
        let l = Layout::single("A", 1);
        let m = CMatrix::from_row_slice(2, 2, &[real(0.6), real(0.0), real(0.0), real(0.6)]);
        assert!(matches!(
            DensityOperator::new(m, l.clone()),
            Err(Error::BadTrace(_))
        ));
        let m = CMatrix::from_row_slice(2, 2, &[real(1.2), real(0.0), real(0.0), real(-0.2)]);
        assert!(matches!(
            DensityOperator::new(m, l),
            Err(Error::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn partial_trace_of_bell_pair_is_maximally_mixed() {
        let phi = StateVector::bell_pairs("A", "B", 1).unwrap().to_density();
        let a = phi.partial_trace(&["A"]).unwrap();
        assert!(
            (a.matrix() - DensityOperator::maximally_mixed(Layout::single("A", 1)).matrix()).norm()
                < 1e-15
        );
        let all = phi.partial_trace(&["A", "B"]).unwrap();
        assert!((all.matrix() - phi.matrix()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_unknown_register() {
        let phi = StateVector::bell_pairs("A", "B", 1).unwrap().to_density();
        assert!(matches!(
            phi.partial_trace(&["C"]),
            Err(Error::UnknownRegister(_))
        ));
    }
}
