//! Dense complex matrix helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const POWER_MAX_ITER: usize = 20_000;
const POWER_TOL: f64 = 1e-12;

fn start_vector(n: usize) -> CVector {
    // Fixed, non-symmetric start so no basis direction is missed by accident.
    let v = CVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract(), 0.0));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Largest singular value by power iteration on `M^H M`, falling back to a
/// full SVD if the iteration stalls.
pub fn operator_norm(m: &CMatrix) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let mh = m.adjoint();
    let mut v = start_vector(cols);
    for _ in 0..POWER_MAX_ITER {
        let w = &mh * (m * &v);
        let next = v.dotc(&w).re;
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        let residual = (&w - &v * Complex64::new(next, 0.0)).norm();
        v = w / Complex64::new(wn, 0.0);
        if residual <= POWER_TOL * next.abs() {
            return next.max(0.0).sqrt();
        }
    }
    singular_values(m).iter().cloned().fold(0.0, f64::max)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn min_singular(m: &CMatrix) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Eigenvalues of the Hermitian part `(M + M^H)/2`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().cloned().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

/// `max |M - M^H|` entrywise.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(A ⊗ B)[(i,k),(j,l)] = A[i,j] B[k,l]` with `i`/`j` major.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn diagonal(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(values))
}
