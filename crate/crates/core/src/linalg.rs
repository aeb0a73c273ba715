//! Small numerical helpers shared by the evaluators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Compensated (Kahan) accumulator for complex sums, applied in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: Complex64,
    carry: Complex64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: Complex64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Eigenvalue-wise square root of the determinant of a complex matrix whose
/// eigenvalues lie in the open right half-plane.
///
/// Taking the principal root of every eigenvalue keeps the result on the
/// branch that is continuous from real positive definite matrices, which the
/// principal root of the determinant alone does not for `s >= 2`.
pub fn sqrt_det_right_half_plane(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if m.nrows() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let eig = m
        .clone()
        .schur()
        .eigenvalues()
        .ok_or(Error::SingularMatrix)?;
    let mut out = Complex64::new(1.0, 0.0);
    for lambda in eig.iter() {
        if lambda.norm() == 0.0 {
            return Err(Error::SingularMatrix);
        }
        out *= lambda.sqrt();
    }
    Ok(out)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|c| c.re)
}

pub(crate) fn imag_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|c| c.im)
}

pub(crate) fn is_symmetric<T>(m: &DMatrix<T>, tol: f64, dist: impl Fn(&T, &T) -> f64) -> bool {
    if !m.is_square() {
        return false;
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            if dist(&m[(i, j)], &m[(j, i)]) > tol {
                return false;
            }
        }
    }
    true
}
