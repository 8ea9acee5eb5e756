//! Random states and unitaries for tests and experiments.

use rand::Rng;
use rand_distr::StandardNormal;

use super::layout::Layout;
use super::linalg::{c, real, trace, CMatrix, CVector};
use super::{DensityOperator, StateVector};
use crate::Result;

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Haar-random unitary (QR of a complex Ginibre matrix with the phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

/// Uniformly random pure state.
pub fn random_state<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> Result<StateVector> {
    let v: CVector = gaussian_matrix(layout.dim(), 1, rng).column(0).into();
    StateVector::normalized(v, layout)
}

/// Random mixed state `G G† / Tr(G G†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(
    layout: Layout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    let g = gaussian_matrix(layout.dim(), rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = trace(&m);
    DensityOperator::new(m / t, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::unitarity_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(unitarity_defect(&haar_unitary(8, &mut rng)) < 1e-12);
        let rho = random_density(Layout::single("A", 2), 2, &mut rng).unwrap();
        assert_eq!(
            rho.eigenvalues()
                .unwrap()
                .iter()
                .filter(|l| **l > 1e-12)
                .count(),
            2
        );
        random_state(Layout::single("A", 3), &mut rng).unwrap();
    }
}
