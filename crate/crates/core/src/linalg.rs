//! Small dense complex linear-algebra helpers shared by the operator
//! builders and the exact oracle.

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for every operator in this crate.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `ab - ba`.
///
/// Both operands must be square and of the same dimension.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || !b.is_square() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            left: (a.nrows(), a.ncols()),
            right: (b.nrows(), b.ncols()),
        });
    }
    Ok(a * b - b * a)
}

/// Largest entry modulus, the norm every tolerance in this crate refers to.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// `max |a_ij - b_ij|`; panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// `max |A - A†|`.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// `exp(-i·h)` for Hermitian `h`, via eigendecomposition.
///
/// Exact up to the accuracy of the eigensolver; the result is unitary to
/// roughly machine precision for the dimensions used here.
pub fn unitary_from_hermitian(h: &CMatrix) -> CMatrix {
    exp_i_hermitian(h, -1.0)
}

/// `exp(i·θ·h)` for Hermitian `h`.
pub fn exp_i_hermitian(h: &CMatrix, theta: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|&lambda| Complex64::from_polar(1.0, theta * lambda)),
    ));
    v * phases * v.adjoint()
}

/// Eigenvector belonging to the largest (`top = true`) or smallest eigenvalue
/// of a Hermitian matrix, normalized.
pub fn extremal_eigenvector(a: &CMatrix, top: bool) -> (f64, nalgebra::DVector<Complex64>) {
    let eig = a.clone().symmetric_eigen();
    let mut best = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let better = if top {
            lambda > eig.eigenvalues[best]
        } else {
            lambda < eig.eigenvalues[best]
        };
        if better {
            best = k;
        }
    }
    let v = eig.eigenvectors.column(best).into_owned();
    let norm = v.norm();
    (eig.eigenvalues[best], v / c(norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli() -> [CMatrix; 3] {
        let z = c(0.0);
        let o = c(1.0);
        [
            CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
            CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        ]
    }

    #[test]
    fn commutator_of_paulis() {
        let [x, y, z] = pauli();
        let xy = commutator(&x, &y).unwrap();
        assert!(max_abs_diff(&xy, &(z * (I * 2.0))) < 1e-15);
    }

    #[test]
    fn commutator_rejects_mismatched_dimensions() {
        let a = identity(2);
        let b = identity(3);
        assert!(matches!(commutator(&a, &b), Err(Error::DimensionMismatch { .. })));
        let r = CMatrix::zeros(2, 3);
        assert!(commutator(&r, &r).is_err());
    }

    #[test]
    fn identity_commutes_with_everything() {
        let [x, _, _] = pauli();
        let zero = commutator(&identity(2), &x).unwrap();
        assert_eq!(max_abs(&zero), 0.0);
    }

    #[test]
    fn exponential_of_pauli_z_is_a_phase() {
        let [_, _, z] = pauli();
        let u = exp_i_hermitian(&z, 0.3);
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, -0.3)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn unitary_is_unitary() {
        let [x, y, z] = pauli();
        let h = x * c(0.4) + y * c(-1.1) + z * c(0.25);
        let u = unitary_from_hermitian(&h);
        assert!(max_abs_diff(&(u.adjoint() * &u), &identity(2)) < 1e-14);
    }
}
