//! Exact two-level quantum mechanics: spinors, density operators, the Bloch
//! map between them, and closed-form spin-measurement probabilities. Every
//! stochastic model in this crate is checked against these formulas.
//!
//! Conventions: ħ = 1, so the spin observable along a unit vector u has
//! eigenvalues ±1/2. States are compared up to global phase.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::scalar::{clamp, Real};

/// Real three-vector inside (or on) the unit ball. Pure states sit on the
/// surface, mixtures strictly inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    /// Build a vector, enforcing norm <= 1 within tolerance.
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let v = BlochVector { x, y, z };
        if !v.norm().is_finite() {
            return Err(Error::domain(
                "Bloch vector components must be finite".to_string(),
            ));
        }
        if v.norm() > T::one() + T::state_tol() {
            return Err(Error::domain(format!(
                "Bloch vector norm {} exceeds 1",
                v.norm()
            )));
        }
        Ok(v)
    }

    /// Build a unit vector, enforcing |norm - 1| within tolerance.
    pub fn unit(x: T, y: T, z: T) -> Result<Self> {
        let v = Self::new(x, y, z)?;
        if !v.is_pure() {
            return Err(Error::domain(format!(
                "expected a unit Bloch vector, got norm {}",
                v.norm()
            )));
        }
        Ok(v)
    }

    /// Unit vector at colatitude `theta`, azimuth `phi`.
    pub fn from_polar(theta: T, phi: T) -> Self {
        BlochVector {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::state_tol()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scaled(&self, s: T) -> Self {
        BlochVector {
            x: self.x * s,
            y: self.y * s,
            z: self.z * s,
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-T::one())
    }

    /// Angle between two nonzero vectors, in [0, π]. The normalized dot
    /// product is clamped before `acos` to absorb rounding.
    pub fn angle_between(&self, other: &Self) -> Result<T> {
        let na = self.norm();
        let nb = other.norm();
        if na <= T::zero() || nb <= T::zero() {
            return Err(Error::domain(
                "angle between vectors requires both to be nonzero".to_string(),
            ));
        }
        Ok(clamp(self.dot(other) / (na * nb), -T::one(), T::one()).acos())
    }

    /// Colatitude/azimuth of the direction of this vector. At the poles the
    /// azimuth is taken to be 0 by convention.
    pub fn polar_angles(&self) -> Result<(T, T)> {
        let n = self.norm();
        if n <= T::zero() {
            return Err(Error::domain(
                "polar angles of the zero vector are undefined".to_string(),
            ));
        }
        let theta = clamp(self.z / n, -T::one(), T::one()).acos();
        let rho = (self.x * self.x + self.y * self.y).sqrt();
        let phi = if rho <= T::state_tol() * n {
            T::zero()
        } else {
            let raw = self.y.atan2(self.x);
            // Map atan2's (-π, π] onto [0, 2π).
            if raw < T::zero() {
                raw + T::two() * T::PI()
            } else {
                raw
            }
        };
        Ok((theta, phi))
    }
}

/// Normalized amplitude pair (a₊, a₋) of a spin-1/2 state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState<T> {
    amplitude_plus: Complex<T>,
    amplitude_minus: Complex<T>,
}

impl<T: Real> SpinState<T> {
    pub fn new(amplitude_plus: Complex<T>, amplitude_minus: Complex<T>) -> Result<Self> {
        let norm_sq = amplitude_plus.norm_sqr() + amplitude_minus.norm_sqr();
        if norm_sq <= T::zero() {
            return Err(Error::domain(
                "spin state amplitudes must not both be zero".to_string(),
            ));
        }
        if (norm_sq - T::one()).abs() > T::state_tol() {
            return Err(Error::domain(format!(
                "spin state is not normalized: |a+|^2 + |a-|^2 = {norm_sq}"
            )));
        }
        Ok(SpinState {
            amplitude_plus,
            amplitude_minus,
        })
    }

    /// The spin-up eigenstate of the direction (θ, φ):
    /// cos(θ/2)·e^(−iφ/2)|+⟩ + sin(θ/2)·e^(iφ/2)|−⟩.
    pub fn from_angles(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::domain(format!(
                "colatitude must lie in [0, π], got {theta}"
            )));
        }
        let half_theta = theta * T::half();
        let half_phi = phi * T::half();
        let plus = Complex::from_polar(half_theta.cos(), -half_phi);
        let minus = Complex::from_polar(half_theta.sin(), half_phi);
        Ok(SpinState {
            amplitude_plus: plus,
            amplitude_minus: minus,
        })
    }

    /// Spin-up eigenstate of the direction of a unit Bloch vector.
    pub fn from_bloch(v: &BlochVector<T>) -> Result<Self> {
        if !v.is_pure() {
            return Err(Error::domain(format!(
                "only unit Bloch vectors correspond to pure states, got norm {}",
                v.norm()
            )));
        }
        let (theta, phi) = v.polar_angles()?;
        Self::from_angles(theta, phi)
    }

    pub fn amplitude_plus(&self) -> Complex<T> {
        self.amplitude_plus
    }

    pub fn amplitude_minus(&self) -> Complex<T> {
        self.amplitude_minus
    }

    /// The Bloch map ω: expectation values of the Pauli operators. Inverse of
    /// `from_angles` up to global phase; poles map to (0, 0, ±1).
    pub fn bloch_vector(&self) -> BlochVector<T> {
        let cross = self.amplitude_plus.conj() * self.amplitude_minus;
        BlochVector {
            x: T::two() * cross.re,
            y: T::two() * cross.im,
            z: self.amplitude_plus.norm_sqr() - self.amplitude_minus.norm_sqr(),
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitude_plus.conj() * other.amplitude_plus
            + self.amplitude_minus.conj() * other.amplitude_minus
    }

    /// The orthogonal state, i.e. the spin-down eigenstate of the same
    /// direction, in the phase convention of `from_angles` at (π−θ, φ+π).
    pub fn orthogonal(&self) -> Self {
        let i = Complex::new(T::zero(), T::one());
        SpinState {
            amplitude_plus: -i * self.amplitude_minus.conj(),
            amplitude_minus: i * self.amplitude_plus.conj(),
        }
    }

    /// Equality up to a global phase factor.
    pub fn coincides_with(&self, other: &Self) -> bool {
        (self.inner(other).norm() - T::one()).abs() <= T::lit(10.0) * T::state_tol()
    }
}

/// 2x2 density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator2<T> {
    m: Mat2<T>,
}

impl<T: Real> DensityOperator2<T> {
    pub fn from_matrix(m: Mat2<T>) -> Result<Self> {
        let tol = T::state_tol();
        let defect = m.hermiticity_defect();
        if defect > tol {
            return Err(Error::domain(format!(
                "density operator is not Hermitian: defect {defect}"
            )));
        }
        let trace = m.trace();
        if (trace.re - T::one()).abs() > tol || trace.im.abs() > tol {
            return Err(Error::domain(format!(
                "density operator trace must be 1, got {} + {}i",
                trace.re, trace.im
            )));
        }
        let (_, lo) = m.hermitian_eigenvalues();
        if lo < -tol {
            return Err(Error::domain(format!(
                "density operator has a negative eigenvalue: {lo}"
            )));
        }
        Ok(DensityOperator2 { m })
    }

    pub fn from_pure(state: &SpinState<T>) -> Self {
        let amps = [state.amplitude_plus(), state.amplitude_minus()];
        DensityOperator2 {
            m: Mat2::outer(amps, amps),
        }
    }

    /// Binary mixture λ₁|ψ₁⟩⟨ψ₁| + λ₂|ψ₂⟩⟨ψ₂| of two orthogonal states.
    pub fn from_mixture(
        lambda1: T,
        psi1: &SpinState<T>,
        lambda2: T,
        psi2: &SpinState<T>,
    ) -> Result<Self> {
        if (lambda1 + lambda2 - T::one()).abs() > T::state_tol() {
            return Err(Error::domain(format!(
                "mixture weights must sum to 1, got {lambda1} + {lambda2}"
            )));
        }
        if lambda1 < -T::state_tol() || lambda2 < -T::state_tol() {
            return Err(Error::domain(format!(
                "mixture weights must be nonnegative, got ({lambda1}, {lambda2})"
            )));
        }
        let overlap = psi1.inner(psi2).norm();
        if overlap > T::lit(100.0) * T::angle_tol() {
            return Err(Error::domain(format!(
                "mixture components must be orthogonal, |⟨ψ1|ψ2⟩| = {overlap}"
            )));
        }
        let p1 = Self::from_pure(psi1)
            .m
            .scale(Complex::new(lambda1, T::zero()));
        let p2 = Self::from_pure(psi2)
            .m
            .scale(Complex::new(lambda2, T::zero()));
        Self::from_matrix(p1.add(&p2))
    }

    pub fn matrix(&self) -> &Mat2<T> {
        &self.m
    }

    /// Bloch vector of the operator, ρ = (I + w·σ)/2.
    pub fn bloch_vector(&self) -> BlochVector<T> {
        BlochVector {
            x: T::two() * self.m.e[0][1].re,
            y: -T::two() * self.m.e[0][1].im,
            z: self.m.e[0][0].re - self.m.e[1][1].re,
        }
    }

    pub fn eigenvalues(&self) -> (T, T) {
        self.m.hermitian_eigenvalues()
    }
}

/// Spin observable along the unit vector u: (σ·u)/2, eigenvalues ±1/2.
pub fn spin_operator<T: Real>(u: &BlochVector<T>) -> Result<Mat2<T>> {
    if !u.is_pure() {
        return Err(Error::domain(format!(
            "spin operator needs a unit direction, got norm {}",
            u.norm()
        )));
    }
    let h = T::half();
    Ok(Mat2::new(
        Complex::new(h * u.z, T::zero()),
        Complex::new(h * u.x, -h * u.y),
        Complex::new(h * u.x, h * u.y),
        Complex::new(-h * u.z, T::zero()),
    ))
}

/// Eigenprojectors P± = (I ± σ·u)/2 of the spin observable along u.
/// Since the operator itself is (σ·u)/2, these are I/2 ± A.
pub fn spin_projectors<T: Real>(u: &BlochVector<T>) -> Result<(Mat2<T>, Mat2<T>)> {
    let a = spin_operator(u)?;
    let half_id = Mat2::identity().scale(Complex::new(T::half(), T::zero()));
    let plus = half_id.add(&a);
    let minus = half_id.add(&a.scale(Complex::new(-T::one(), T::zero())));
    Ok((plus, minus))
}

/// Born probabilities (p₊, p₋) = (Tr ρP₊, Tr ρP₋) for the spin observable
/// along the unit vector u.
pub fn qm_probabilities<T: Real>(rho: &DensityOperator2<T>, u: &BlochVector<T>) -> Result<(T, T)> {
    let (p_plus, p_minus) = spin_projectors(u)?;
    let plus = rho.matrix().mul(&p_plus).trace().re;
    let minus = rho.matrix().mul(&p_minus).trace().re;
    Ok((
        clamp(plus, T::zero(), T::one()),
        clamp(minus, T::zero(), T::one()),
    ))
}
