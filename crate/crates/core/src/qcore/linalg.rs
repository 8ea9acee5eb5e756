//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::tolerance::{EIGEN_FLOOR, STRUCTURAL};
use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending, eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > STRUCTURAL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (m + m.adjoint()) * real(0.5);
    let dim = m.nrows();
    let mut pairs: Vec<(f64, CVector)> = Vec::with_capacity(dim);
    for block in components(&sym) {
        let sub = CMatrix::from_fn(block.len(), block.len(), |r, c| sym[(block[r], block[c])]);
        let (values, vectors) = block_eigen(sub)?;
        for (k, value) in values.into_iter().enumerate() {
            let mut v = CVector::zeros(dim);
            for (r, &row) in block.iter().enumerate() {
                v[row] = vectors[(r, k)];
            }
            pairs.push((value, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_fn(dim, dim, |r, k| pairs[k].1[r]);
    Ok((values, vectors))
}

/// Index sets of the connected components of the nonzero pattern.
fn components(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for i in 0..n {
        groups.entry(root(&mut parent, i)).or_default().push(i);
    }
    groups.into_values().collect()
}

/// nalgebra's QR iteration occasionally returns non-finite values on sparse
/// input; a diagonal shift changes the iteration without changing eigenvectors.
fn block_eigen(m: CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    for shift in [0.0, 0.5 * scale, -0.37 * scale, 1.3 * scale] {
        let shifted = &m + CMatrix::identity(n, n) * real(shift);
        let eig = shifted.symmetric_eigen();
        if eig.eigenvalues.iter().all(|x| x.is_finite())
            && eig
                .eigenvectors
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Ok((
                eig.eigenvalues.iter().map(|x| x - shift).collect(),
                eig.eigenvectors,
            ));
        }
    }
    Err(Error::Invariant("eigensolver did not converge".into()))
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.0)
}

/// `V f(Λ) V†` for a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let fk = f(lambda);
        scaled.column_mut(k).scale_mut(fk);
    }
    Ok(scaled * vectors.adjoint())
}

/// Square root of a positive semidefinite matrix, clamping small negative eigenvalues.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    check_psd_spectrum(&hermitian_eigenvalues(m)?)?;
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// Pseudo-inverse square root on the support (eigenvalues above the floor).
pub fn psd_inverse_sqrt(m: &CMatrix) -> Result<CMatrix> {
    hermitian_function(m, |x| if x > EIGEN_FLOOR { 1.0 / x.sqrt() } else { 0.0 })
}

pub fn check_psd_spectrum(values: &[f64]) -> Result<()> {
    match values.iter().copied().fold(f64::INFINITY, f64::min) {
        min if min < -STRUCTURAL => Err(Error::NegativeEigenvalue(min)),
        _ => Ok(()),
    }
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entry-wise deviation of `V†V` from the identity.
pub fn isometry_defect(m: &CMatrix) -> f64 {
    let gram = m.adjoint() * m;
    let id = CMatrix::identity(gram.nrows(), gram.ncols());
    (gram - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    isometry_defect(m).max(isometry_defect(&m.adjoint()))
}

/// Hermitian outer product `|a><b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Inner product `<a|b>` (conjugate-linear in `a`).
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}
