//! Minimal complex 2x2 matrix algebra, just enough for spin operators,
//! projectors, and trace formulas.

use num_complex::Complex;

use crate::scalar::Real;

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub e: [[Complex<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(e00: Complex<T>, e01: Complex<T>, e10: Complex<T>, e11: Complex<T>) -> Self {
        Mat2 {
            e: [[e00, e01], [e10, e11]],
        }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Mat2::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        let o = Complex::new(T::one(), T::zero());
        Mat2::new(o, z, z, o)
    }

    /// Outer product |a⟩⟨b| of two amplitude pairs.
    pub fn outer(a: [Complex<T>; 2], b: [Complex<T>; 2]) -> Self {
        Mat2::new(
            a[0] * b[0].conj(),
            a[0] * b[1].conj(),
            a[1] * b[0].conj(),
            a[1] * b[1].conj(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.e[r][c] = self.e[r][c] + other.e[r][c];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.e[r][c] *= s;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.e[r][c] = self.e[r][0] * other.e[0][c] + self.e[r][1] * other.e[1][c];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Mat2::new(
            self.e[0][0].conj(),
            self.e[1][0].conj(),
            self.e[0][1].conj(),
            self.e[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex<T> {
        self.e[0][0] + self.e[1][1]
    }

    pub fn determinant(&self) -> Complex<T> {
        self.e[0][0] * self.e[1][1] - self.e[0][1] * self.e[1][0]
    }

    /// Eigenvalues from the characteristic polynomial
    /// λ² − tr λ + det = 0, valid for Hermitian matrices (real spectrum).
    pub fn hermitian_eigenvalues(&self) -> (T, T) {
        let tr = self.trace().re;
        let det = self.determinant().re;
        let disc = (tr * tr - T::lit(4.0) * det).max(T::zero()).sqrt();
        ((tr + disc) * T::half(), (tr - disc) * T::half())
    }

    /// Largest absolute deviation from hermiticity, entry by entry.
    pub fn hermiticity_defect(&self) -> T {
        let adj = self.adjoint();
        let mut worst = T::zero();
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.e[r][c] - adj.e[r][c]).norm());
            }
        }
        worst
    }
}
