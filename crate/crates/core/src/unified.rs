//! The detection-sphere model: hidden states live on a spherical cap of a
//! second sphere tangent to the state sphere at the state point. A cap
//! density f(θ) fixes where the hidden state sits, a detection profile
//! p(γ,θ) fixes whether the object registers at all, and the cap partition
//! C₊/C₋ fixes which of the two outcomes a detected object produces.
//!
//! Coordinates: the polar axis points along the state vector v, and the
//! contact point sits at θ = π, so the cap is θ ∈ [θ₀, π]. The inner cap C₊
//! is θ ∈ [θ_b, π] and carries measure cos²(γ/2).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::error::{Error, Result};
use crate::numeric::{bisect, integrate};
use crate::scalar::{clamp, Real};
use crate::tables::{DensityTable, ProfileTable};

/// Hidden-state density on the cap: uniform (closed-form cumulative) or a
/// tabulated curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CapDensity<T> {
    theta0: T,
    kind: CapDensityKind<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum CapDensityKind<T> {
    Uniform,
    Tabulated(DensityTable<T>),
}

impl<T: Real> CapDensity<T> {
    /// Uniform density on the cap [θ₀, π]:
    /// f = 1 / (2π (1 + cos θ₀)).
    pub fn uniform(theta0: T) -> Result<Self> {
        if !(theta0 >= T::zero() && theta0 < T::PI()) {
            return Err(Error::domain(format!(
                "cap limit angle must lie in [0, π), got {theta0}"
            )));
        }
        Ok(CapDensity {
            theta0,
            kind: CapDensityKind::Uniform,
        })
    }

    /// Tabulated density; the first abscissa is the cap limit angle.
    pub fn tabulated(table: DensityTable<T>) -> Result<Self> {
        let theta0 = table.theta0();
        if theta0 >= T::PI() {
            return Err(Error::domain(
                "tabulated cap has an empty support".to_string(),
            ));
        }
        Ok(CapDensity {
            theta0,
            kind: CapDensityKind::Tabulated(table),
        })
    }

    pub fn theta0(&self) -> T {
        self.theta0
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, CapDensityKind::Uniform)
    }

    /// f(θ); zero outside the support.
    pub fn density(&self, theta: T) -> T {
        match &self.kind {
            CapDensityKind::Uniform => {
                if theta < self.theta0 || theta > T::PI() {
                    T::zero()
                } else {
                    (T::two() * T::PI() * (T::one() + self.theta0.cos())).recip()
                }
            }
            CapDensityKind::Tabulated(t) => t.density(theta),
        }
    }

    /// Total raw mass of the cap, ∫ 2π f sinθ dθ; 1 within tolerance.
    pub fn total_mass(&self) -> T {
        match &self.kind {
            CapDensityKind::Uniform => T::one(),
            CapDensityKind::Tabulated(t) => t.total_mass(),
        }
    }

    /// Normalized measure of the sub-cap [theta, π].
    pub fn measure_from(&self, theta: T) -> Result<T> {
        if theta <= self.theta0 {
            return Ok(T::one());
        }
        if theta >= T::PI() {
            return Ok(T::zero());
        }
        match &self.kind {
            CapDensityKind::Uniform => Ok(clamp(
                (T::one() + theta.cos()) / (T::one() + self.theta0.cos()),
                T::zero(),
                T::one(),
            )),
            CapDensityKind::Tabulated(t) => t.measure_from(theta),
        }
    }

    /// Inverse of the normalized colatitude CDF, for u in [0, 1).
    fn inverse_cdf(&self, u: T) -> T {
        match &self.kind {
            CapDensityKind::Uniform => {
                // cos θ = cos θ₀ − u (1 + cos θ₀), uniform in cos θ.
                let c0 = self.theta0.cos();
                clamp(c0 - u * (T::one() + c0), -T::one(), T::one()).acos()
            }
            CapDensityKind::Tabulated(t) => t.inverse_cdf(u),
        }
    }
}

/// Detection probability p(γ, θ).
#[derive(Debug, Clone, PartialEq)]
pub enum DetectionProfile<T> {
    /// p(γ, θ) = g(γ): constant across the cap at fixed measurement angle.
    /// This is the class for which the cap partition and the factorized
    /// totals are mutually consistent.
    ConstantInTheta(GammaLaw<T>),
    /// Bilinear interpolation of a tabulated (γ, θ) grid.
    Tabulated(ProfileTable<T>),
}

/// Preset laws g(γ) for θ-independent profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaLaw<T> {
    /// g ≡ 1: lossless detection.
    Unit,
    /// g ≡ c.
    Constant(T),
    /// g(γ) = (1 + cos γ)/2. Not symmetric under γ → π−γ, so unusable for
    /// mixtures.
    Cosine,
}

impl<T: Real> GammaLaw<T> {
    pub fn eval(&self, gamma: T) -> T {
        match *self {
            GammaLaw::Unit => T::one(),
            GammaLaw::Constant(c) => c,
            GammaLaw::Cosine => (T::one() + gamma.cos()) * T::half(),
        }
    }
}

impl<T: Real> DetectionProfile<T> {
    pub fn unit() -> Self {
        DetectionProfile::ConstantInTheta(GammaLaw::Unit)
    }

    pub fn constant(c: T) -> Result<Self> {
        if !(c >= T::zero() && c <= T::one()) {
            return Err(Error::domain(format!(
                "constant detection probability must lie in [0, 1], got {c}"
            )));
        }
        Ok(DetectionProfile::ConstantInTheta(GammaLaw::Constant(c)))
    }

    pub fn cosine() -> Self {
        DetectionProfile::ConstantInTheta(GammaLaw::Cosine)
    }

    pub fn tabulated(table: ProfileTable<T>) -> Self {
        DetectionProfile::Tabulated(table)
    }

    pub fn eval(&self, gamma: T, theta: T) -> T {
        match self {
            DetectionProfile::ConstantInTheta(g) => g.eval(gamma),
            DetectionProfile::Tabulated(t) => t.eval(gamma, theta),
        }
    }

    pub fn is_constant_in_theta(&self) -> bool {
        matches!(self, DetectionProfile::ConstantInTheta(_))
    }

    /// Whether g(γ) = g(π−γ) is known statically: `Some(true)` for constant
    /// laws, `Some(false)` for the cosine law, `None` for tables (checked
    /// numerically where it matters).
    pub fn gamma_symmetry(&self) -> Option<bool> {
        match self {
            DetectionProfile::ConstantInTheta(GammaLaw::Unit)
            | DetectionProfile::ConstantInTheta(GammaLaw::Constant(_)) => Some(true),
            DetectionProfile::ConstantInTheta(GammaLaw::Cosine) => Some(false),
            DetectionProfile::Tabulated(_) => None,
        }
    }
}

/// A hidden state: a point (θ, φ) of the detection sphere's cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenState<T> {
    theta: T,
    phi: T,
}

impl<T: Real> HiddenState<T> {
    pub fn new(cap: &CapDensity<T>, theta: T, phi: T) -> Result<Self> {
        if !(theta >= cap.theta0() && theta <= T::PI()) {
            return Err(Error::domain(format!(
                "hidden colatitude {theta} outside the cap [{}, π]",
                cap.theta0()
            )));
        }
        if !(phi >= T::zero() && phi < T::two() * T::PI()) {
            return Err(Error::domain(format!(
                "hidden azimuth {phi} outside [0, 2π)"
            )));
        }
        Ok(HiddenState { theta, phi })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn phi(&self) -> T {
        self.phi
    }
}

/// Trial outcome of the detection-sphere experiment: one of the two
/// registered outcomes, or the no-registration outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnifiedOutcome {
    O1,
    O2,
    A0,
}

fn check_gamma<T: Real>(gamma: T) -> Result<T> {
    if !(gamma >= T::zero() && gamma <= T::PI()) {
        return Err(Error::domain(format!(
            "measurement angle must lie in [0, π], got {gamma}"
        )));
    }
    Ok(gamma)
}

fn cos_half_sq<T: Real>(gamma: T) -> T {
    (T::one() + gamma.cos()) * T::half()
}

/// Raw weighted integral ∫_from^π 2π f(θ) p(γ,θ) sinθ dθ.
///
/// θ-independent profiles factor out of the integral exactly; tabulated
/// profiles are integrated piecewise between grid breakpoints so the
/// adaptive rule only ever sees smooth integrands.
fn weighted_cap_integral<T: Real>(
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    gamma: T,
    from: T,
) -> Result<T> {
    let from = from.max(cap.theta0());
    if from >= T::PI() {
        return Ok(T::zero());
    }
    match det {
        DetectionProfile::ConstantInTheta(g) => {
            Ok(g.eval(gamma) * cap.measure_from(from)? * cap.total_mass())
        }
        DetectionProfile::Tabulated(table) => {
            let mut cuts: Vec<T> = vec![from, T::PI()];
            for &t in table.thetas() {
                if t > from && t < T::PI() {
                    cuts.push(t);
                }
            }
            if let CapDensityKind::Tabulated(d) = &cap.kind {
                for &(t, _) in d.points() {
                    if t > from && t < T::PI() {
                        cuts.push(t);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
            cuts.dedup();
            let tol = T::measure_tol() * T::lit(1e-3) / T::lit(cuts.len() as f64);
            let mut acc = T::zero();
            for pair in cuts.windows(2) {
                let integrand =
                    |t: T| T::two() * T::PI() * cap.density(t) * table.eval(gamma, t) * t.sin();
                acc += integrate(integrand, pair[0], pair[1], tol)?;
            }
            Ok(acc)
        }
    }
}

/// Detection-weighted measure of the sub-cap [from, π]:
/// ∫_from^π 2π f(θ) p(γ,θ) sinθ dθ. With `from = θ₀` this is the full
/// detection probability; with `from = boundary_angle` it is the total
/// probability of outcome o₁ decomposed over hidden states.
pub fn detection_integral_from<T: Real>(
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    gamma: T,
    from: T,
) -> Result<T> {
    let gamma = check_gamma(gamma)?;
    weighted_cap_integral(cap, det, gamma, from)
}

/// Probability that a measurement at angle γ detects the object at all:
/// the cap integral of f(θ)·p(γ,θ).
pub fn detection_probability<T: Real>(
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    gamma: T,
) -> Result<T> {
    let gamma = check_gamma(gamma)?;
    let raw = weighted_cap_integral(cap, det, gamma, cap.theta0())?;
    Ok(clamp(raw, T::zero(), T::one()))
}

/// Colatitude θ_b splitting the cap so the inner part [θ_b, π] carries
/// measure cos²(γ/2), found by bisection on the cumulative measure.
pub fn boundary_angle<T: Real>(cap: &CapDensity<T>, gamma: T) -> Result<T> {
    let gamma = check_gamma(gamma)?;
    let target = cos_half_sq(gamma);
    if target >= T::one() {
        return Ok(cap.theta0());
    }
    if target <= T::zero() {
        return Ok(T::PI());
    }
    // measure_from falls monotonically from 1 at θ₀ to 0 at π. Bisect well
    // past the documented angle tolerance so the measure residual stays
    // small even when the density is steep.
    let theta_b = bisect(
        |theta| match cap.measure_from(theta) {
            Ok(m) => m - target,
            Err(_) => T::nan(),
        },
        cap.theta0(),
        T::PI(),
        T::angle_tol() * T::lit(1e-4),
    )?;
    let residual = (cap.measure_from(theta_b)? - target).abs();
    if residual > T::measure_tol() {
        return Err(Error::numeric(format!(
            "cap partition at γ = {gamma} missed its target measure by {residual}"
        )));
    }
    Ok(theta_b)
}

/// Analytic totals of the three-outcome experiment:
/// p_o1 = p_detect·cos²(γ/2), p_o2 = p_detect·sin²(γ/2), and the
/// no-registration remainder 1 − p_detect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalProbabilities<T> {
    pub p_o1: T,
    pub p_o2: T,
    pub p_detect: T,
}

impl<T: Real> TotalProbabilities<T> {
    pub fn p_a0(&self) -> T {
        T::one() - self.p_detect
    }

    pub fn as_outcome_vector(&self) -> (T, T, T) {
        (self.p_o1, self.p_o2, self.p_a0())
    }
}

/// Totals for a pure state v measured along u.
pub fn total_probabilities<T: Real>(
    v: &BlochVector<T>,
    u: &BlochVector<T>,
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
) -> Result<TotalProbabilities<T>> {
    require_unit(v, "state vector")?;
    require_unit(u, "measurement direction")?;
    let gamma = v.angle_between(u)?;
    total_probabilities_at(gamma, cap, det)
}

/// Same totals parameterized by the angle alone.
pub fn total_probabilities_at<T: Real>(
    gamma: T,
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
) -> Result<TotalProbabilities<T>> {
    let gamma = check_gamma(gamma)?;
    let p_detect = detection_probability(cap, det, gamma)?;
    let c2 = cos_half_sq(gamma);
    Ok(TotalProbabilities {
        p_o1: p_detect * c2,
        p_o2: p_detect * (T::one() - c2),
        p_detect,
    })
}

/// How far the cap partition and the detection weighting disagree:
/// |(∫_{C₊} f p dσ)/(∫_C f p dσ) − cos²(γ/2)|. Zero (to tolerance) exactly
/// when p is constant in θ at this γ; positive values quantify how strongly
/// a θ-dependent profile breaks the factorized totals.
pub fn consistency_check<T: Real>(
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    gamma: T,
) -> Result<T> {
    let gamma = check_gamma(gamma)?;
    let theta_b = boundary_angle(cap, gamma)?;
    let total = weighted_cap_integral(cap, det, gamma, cap.theta0())?;
    if total <= T::zero() {
        return Err(Error::numeric(
            "consistency ratio undefined: detection integral vanishes".to_string(),
        ));
    }
    let inner = weighted_cap_integral(cap, det, gamma, theta_b)?;
    Ok((inner / total - cos_half_sq(gamma)).abs())
}

fn require_unit<T: Real>(v: &BlochVector<T>, what: &str) -> Result<()> {
    if !v.is_pure() {
        return Err(Error::domain(format!(
            "{what} must be a unit vector, got norm {}",
            v.norm()
        )));
    }
    Ok(())
}

/// A unified experiment prepared for repeated trials: the boundary angle and
/// sampling tables are computed once.
#[derive(Debug, Clone)]
pub struct UnifiedExperiment<T> {
    gamma: T,
    theta_b: T,
    cap: CapDensity<T>,
    det: DetectionProfile<T>,
}

impl<T: Real> UnifiedExperiment<T> {
    pub fn new(gamma: T, cap: CapDensity<T>, det: DetectionProfile<T>) -> Result<Self> {
        let gamma = check_gamma(gamma)?;
        let theta_b = boundary_angle(&cap, gamma)?;
        Ok(UnifiedExperiment {
            gamma,
            theta_b,
            cap,
            det,
        })
    }

    pub fn for_directions(
        v: &BlochVector<T>,
        u: &BlochVector<T>,
        cap: CapDensity<T>,
        det: DetectionProfile<T>,
    ) -> Result<Self> {
        require_unit(v, "state vector")?;
        require_unit(u, "measurement direction")?;
        Self::new(v.angle_between(u)?, cap, det)
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn boundary(&self) -> T {
        self.theta_b
    }

    /// Draw a hidden state: φ uniform on [0, 2π), then θ by inverse CDF of
    /// the cap marginal.
    pub fn sample_hidden_state<R: Rng + ?Sized>(&self, rng: &mut R) -> HiddenState<T> {
        sample_hidden_state(&self.cap, rng)
    }

    /// One trial: draw a hidden state, decide detection from p(γ,θ), then
    /// classify by the cap partition (inner cap → O1, crown → O2).
    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> UnifiedOutcome {
        let h = self.sample_hidden_state(rng);
        let detected = T::lit(rng.random::<f64>()) < self.det.eval(self.gamma, h.theta);
        if !detected {
            return UnifiedOutcome::A0;
        }
        if h.theta >= self.theta_b {
            UnifiedOutcome::O1
        } else {
            UnifiedOutcome::O2
        }
    }

    pub fn totals(&self) -> Result<TotalProbabilities<T>> {
        total_probabilities_at(self.gamma, &self.cap, &self.det)
    }
}

/// Draw a hidden state from the cap density.
pub fn sample_hidden_state<T: Real, R: Rng + ?Sized>(
    cap: &CapDensity<T>,
    rng: &mut R,
) -> HiddenState<T> {
    let phi = T::two() * T::PI() * T::lit(rng.random::<f64>());
    let theta = cap.inverse_cdf(T::lit(rng.random::<f64>()));
    HiddenState {
        theta: theta.min(T::PI()).max(cap.theta0()),
        phi,
    }
}

/// One trial of the detection-sphere experiment for state v measured along
/// u. Prefer [`UnifiedExperiment`] when running many trials: this entry
/// point recomputes the boundary angle every call.
pub fn run_unified_trial<T: Real, R: Rng + ?Sized>(
    v: &BlochVector<T>,
    u: &BlochVector<T>,
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    rng: &mut R,
) -> Result<UnifiedOutcome> {
    let exp = UnifiedExperiment::for_directions(v, u, cap.clone(), det.clone())?;
    Ok(exp.run_trial(rng))
}

fn check_weights<T: Real>(lambda1: T, lambda2: T) -> Result<()> {
    if (lambda1 + lambda2 - T::one()).abs() > T::state_tol() {
        return Err(Error::domain(format!(
            "mixture weights must sum to 1, got {lambda1} + {lambda2}"
        )));
    }
    if !(lambda1 >= T::zero() && lambda1 <= T::one()) {
        return Err(Error::domain(format!(
            "mixture weight {lambda1} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Check the mixture symmetry requirement: both component states must share
/// one detection probability, which needs p_detect(γ) = p_detect(π−γ).
fn check_mixture_symmetry<T: Real>(
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    gamma: T,
) -> Result<T> {
    let direct = detection_probability(cap, det, gamma)?;
    let mirrored = detection_probability(cap, det, T::PI() - gamma)?;
    if (direct - mirrored).abs() > T::measure_tol() {
        return Err(Error::domain(format!(
            "detection profile is asymmetric under γ → π−γ at γ = {gamma}: \
             {direct} vs {mirrored}; mixtures require a symmetric profile"
        )));
    }
    Ok(direct)
}

/// Totals for the mixture λ₁ S(v) + λ₂ S(−v) measured along u:
/// p_o1 = p_detect·(λ₁cos²(γ/2) + λ₂sin²(γ/2)) and its mirror image.
pub fn mixed_total_probabilities<T: Real>(
    lambda1: T,
    lambda2: T,
    v: &BlochVector<T>,
    u: &BlochVector<T>,
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
) -> Result<TotalProbabilities<T>> {
    require_unit(v, "state vector")?;
    require_unit(u, "measurement direction")?;
    mixed_total_probabilities_at(lambda1, lambda2, v.angle_between(u)?, cap, det)
}

/// Same mixture totals parameterized by the angle alone.
pub fn mixed_total_probabilities_at<T: Real>(
    lambda1: T,
    lambda2: T,
    gamma: T,
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
) -> Result<TotalProbabilities<T>> {
    check_weights(lambda1, lambda2)?;
    let gamma = check_gamma(gamma)?;
    let p_detect = check_mixture_symmetry(cap, det, gamma)?;
    let c2 = cos_half_sq(gamma);
    let s2 = T::one() - c2;
    Ok(TotalProbabilities {
        p_o1: p_detect * (lambda1 * c2 + lambda2 * s2),
        p_o2: p_detect * (lambda1 * s2 + lambda2 * c2),
        p_detect,
    })
}

/// A prepared mixture experiment: one branch per component state.
#[derive(Debug, Clone)]
pub struct MixedExperiment<T> {
    lambda1: T,
    branch1: UnifiedExperiment<T>,
    branch2: UnifiedExperiment<T>,
}

impl<T: Real> MixedExperiment<T> {
    pub fn new(
        lambda1: T,
        lambda2: T,
        gamma: T,
        cap: CapDensity<T>,
        det: DetectionProfile<T>,
    ) -> Result<Self> {
        check_weights(lambda1, lambda2)?;
        let gamma = check_gamma(gamma)?;
        check_mixture_symmetry(&cap, &det, gamma)?;
        let branch1 = UnifiedExperiment::new(gamma, cap.clone(), det.clone())?;
        let branch2 = UnifiedExperiment::new(T::PI() - gamma, cap, det)?;
        Ok(MixedExperiment {
            lambda1,
            branch1,
            branch2,
        })
    }

    /// Pick the component state (probability λ₁ for the one along v), then
    /// run the corresponding detection-sphere trial.
    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> UnifiedOutcome {
        if T::lit(rng.random::<f64>()) < self.lambda1 {
            self.branch1.run_trial(rng)
        } else {
            self.branch2.run_trial(rng)
        }
    }
}

/// One trial of the mixture experiment. Prefer [`MixedExperiment`] in loops.
pub fn run_mixed_trial<T: Real, R: Rng + ?Sized>(
    lambda1: T,
    lambda2: T,
    v: &BlochVector<T>,
    u: &BlochVector<T>,
    cap: &CapDensity<T>,
    det: &DetectionProfile<T>,
    rng: &mut R,
) -> Result<UnifiedOutcome> {
    require_unit(v, "state vector")?;
    require_unit(u, "measurement direction")?;
    let exp = MixedExperiment::new(
        lambda1,
        lambda2,
        v.angle_between(u)?,
        cap.clone(),
        det.clone(),
    )?;
    Ok(exp.run_trial(rng))
}
