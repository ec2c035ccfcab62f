//! Dense Hermitian helpers shared by the oracles and the bound machinery.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Relative eigenvalue threshold below which a direction of `B` counts as kernel.
pub const KERNEL_REL_TOL: f64 = 1e-12;

/// Relative residual above which `ker(B) ⊄ ker(A)` is reported.
pub const KERNEL_MISMATCH_TOL: f64 = 1e-8;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

/// Full eigendecomposition; takes the real symmetric path when the input has no imaginary part.
pub fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    let (values, vectors): (Vec<f64>, CMatrix) = if is_real(m) {
        let e = SymmetricEigen::new(real_part(m));
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(c))
    } else {
        let e = SymmetricEigen::new(hermitian_part(m));
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, k| vectors[(r, order[k])]);
    Eigh {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = if is_real(m) {
        real_part(m).symmetric_eigenvalues().iter().copied().collect()
    } else {
        hermitian_part(m).symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Generalized eigenvalues of the Hermitian pencil `A x = μ B x` restricted to `range(B)`,
/// ascending.
///
/// `B` is whitened with its pseudo-inverse square root; directions with eigenvalue below
/// `KERNEL_REL_TOL · max eig(B)` are deflated. Fails with `KernelMismatch` when `A` does not
/// vanish on the deflated kernel.
pub fn pencil_eigenvalues(a: &CMatrix, b: &CMatrix) -> Result<Vec<f64>> {
    let n = b.nrows();
    assert_eq!(a.shape(), b.shape(), "pencil shape mismatch");
    if n == 0 {
        return Ok(Vec::new());
    }
    let a_norm = frobenius(a).max(f64::MIN_POSITIVE);

    if is_diagonal(b) {
        let diag: Vec<f64> = (0..n).map(|i| b[(i, i)].re).collect();
        let top = diag.iter().copied().fold(0.0_f64, f64::max);
        let keep: Vec<usize> = (0..n).filter(|&i| diag[i] > KERNEL_REL_TOL * top).collect();
        if keep.len() < n {
            let drop: Vec<usize> = (0..n).filter(|&i| diag[i] <= KERNEL_REL_TOL * top).collect();
            let residual = drop
                .iter()
                .map(|&j| (0..n).map(|i| a[(i, j)].norm_sqr()).sum::<f64>())
                .sum::<f64>()
                .sqrt()
                / a_norm;
            if residual > KERNEL_MISMATCH_TOL {
                return Err(Error::KernelMismatch(residual));
            }
        }
        let scale: Vec<f64> = keep.iter().map(|&i| diag[i].powf(-0.5)).collect();
        let reduced = CMatrix::from_fn(keep.len(), keep.len(), |i, j| {
            a[(keep[i], keep[j])] * (scale[i] * scale[j])
        });
        return Ok(eigvalsh(&hermitian_part(&reduced)));
    }

    // basis of range(B) scaled by eig^{-1/2}, and the kernel directions
    let e = eigh(b);
    let top = e.values.iter().copied().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| e.values[i] > KERNEL_REL_TOL * top).collect();
    let drop: Vec<usize> = (0..n).filter(|&i| e.values[i] <= KERNEL_REL_TOL * top).collect();
    let whitener = CMatrix::from_fn(n, keep.len(), |r, k| {
        e.vectors[(r, keep[k])] * e.values[keep[k]].powf(-0.5)
    });
    if !drop.is_empty() {
        let kernel = CMatrix::from_fn(n, drop.len(), |r, k| e.vectors[(r, drop[k])]);
        let residual = frobenius(&(a * &kernel)) / a_norm;
        if residual > KERNEL_MISMATCH_TOL {
            return Err(Error::KernelMismatch(residual));
        }
    }
    let reduced = whitener.adjoint() * a * &whitener;
    Ok(eigvalsh(&hermitian_part(&reduced)))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}
