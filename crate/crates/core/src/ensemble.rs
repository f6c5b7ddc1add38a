//! Finite-ensemble counting algebra and its large-number limit: objects are
//! partitioned into microstates, each with a count, an undetected count, and
//! a yes/no possession bit for the property under test. The detected and
//! possessing fractions factor exactly, and the factorization survives the
//! limit as a product law of probabilities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Counts for one microstate: how many objects were prepared in it, how many
/// of those went undetected, and whether objects in this microstate possess
/// the property. The possessing-and-detected count is implied: it is
/// `n_total - n_undetected` when the property is possessed, 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicrostateTally {
    n_total: u64,
    n_undetected: u64,
    possesses_f: bool,
}

impl MicrostateTally {
    pub fn new(n_total: u64, n_undetected: u64, possesses_f: bool) -> Result<Self> {
        if n_undetected > n_total {
            return Err(Error::domain(format!(
                "undetected count {n_undetected} exceeds total {n_total}"
            )));
        }
        Ok(MicrostateTally {
            n_total,
            n_undetected,
            possesses_f,
        })
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn n_undetected(&self) -> u64 {
        self.n_undetected
    }

    pub fn n_detected(&self) -> u64 {
        self.n_total - self.n_undetected
    }

    pub fn possesses_f(&self) -> bool {
        self.possesses_f
    }

    /// Count of objects that possess the macroscopic property, i.e. are
    /// detected with an outcome inside the property's value set.
    pub fn n_possessing(&self) -> u64 {
        if self.possesses_f {
            self.n_detected()
        } else {
            0
        }
    }
}

/// A finite preparation run partitioned into microstates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleTally {
    microstates: Vec<MicrostateTally>,
}

impl EnsembleTally {
    pub fn new(microstates: Vec<MicrostateTally>) -> Result<Self> {
        let n: u64 = microstates.iter().map(|m| m.n_total()).sum();
        if n == 0 {
            return Err(Error::domain(
                "ensemble must contain at least one object".to_string(),
            ));
        }
        Ok(EnsembleTally { microstates })
    }

    pub fn microstates(&self) -> &[MicrostateTally] {
        &self.microstates
    }

    pub fn n(&self) -> u64 {
        self.microstates.iter().map(|m| m.n_total()).sum()
    }

    pub fn n_undetected(&self) -> u64 {
        self.microstates.iter().map(|m| m.n_undetected()).sum()
    }

    pub fn n_detected(&self) -> u64 {
        self.n() - self.n_undetected()
    }

    pub fn n_possessing(&self) -> u64 {
        self.microstates.iter().map(|m| m.n_possessing()).sum()
    }
}

/// The three fractions of the counting identity, in exact arithmetic:
/// possessing = detected × (possessing | detected).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionDecomposition {
    pub frac_possessing: BigRational,
    pub frac_detected: BigRational,
    /// Undefined when nothing at all was detected.
    pub frac_possessing_given_detected: Option<BigRational>,
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact fractions of a finite run. The product identity
/// `frac_possessing = frac_detected * frac_possessing_given_detected`
/// holds with equality whenever the conditional part is defined.
pub fn fraction_decomposition(tally: &EnsembleTally) -> FractionDecomposition {
    let n = tally.n();
    let detected = tally.n_detected();
    let possessing = tally.n_possessing();
    FractionDecomposition {
        frac_possessing: ratio(possessing, n),
        frac_detected: ratio(detected, n),
        frac_possessing_given_detected: if detected > 0 {
            Some(ratio(possessing, detected))
        } else {
            None
        },
    }
}

impl FractionDecomposition {
    /// Check the exact product identity. When the conditional factor is
    /// undefined nothing was detected, so the possessing fraction is zero
    /// and the identity holds vacuously.
    pub fn product_law_holds(&self) -> bool {
        match &self.frac_possessing_given_detected {
            Some(cond) => &self.frac_detected * cond == self.frac_possessing,
            None => self.frac_possessing.is_zero(),
        }
    }
}

/// Large-number limit of an ensemble: microstate weights, per-microstate
/// detection probabilities, and per-microstate possession bits.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitModel<T> {
    weights: Vec<T>,
    detect_probs: Vec<T>,
    possession: Vec<bool>,
}

impl<T: Real> LimitModel<T> {
    pub fn new(weights: Vec<T>, detect_probs: Vec<T>, possession: Vec<bool>) -> Result<Self> {
        if weights.len() != detect_probs.len() || weights.len() != possession.len() {
            return Err(Error::domain(format!(
                "limit model lengths disagree: {} weights, {} detection probabilities, {} possession bits",
                weights.len(),
                detect_probs.len(),
                possession.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::domain(
                "limit model needs at least one microstate".to_string(),
            ));
        }
        let in_unit = |v: &[T]| v.iter().all(|&p| p >= T::zero() && p <= T::one());
        if !in_unit(&weights) || !in_unit(&detect_probs) {
            return Err(Error::domain(
                "weights and detection probabilities must lie in [0, 1]".to_string(),
            ));
        }
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > T::state_tol() {
            return Err(Error::domain(format!(
                "microstate weights must sum to 1, got {total}"
            )));
        }
        Ok(LimitModel {
            weights,
            detect_probs,
            possession,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn detect_probs(&self) -> &[T] {
        &self.detect_probs
    }

    pub fn possession(&self) -> &[bool] {
        &self.possession
    }
}

/// Limit probabilities: detection, total (detected and possessing), and the
/// conditional-on-detection probability identified with the quantum one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitProbabilities<T> {
    pub p_detect: T,
    pub p_total: T,
    /// Undefined when the detection probability vanishes.
    pub p_conditional: Option<T>,
}

/// Weighted sums over microstates: p_detect = Σ wᵢdᵢ, p_total = Σ wᵢdᵢfᵢ,
/// and their quotient. The product law p_total = p_detect · p_conditional
/// holds by construction.
pub fn limit_probabilities<T: Real>(model: &LimitModel<T>) -> LimitProbabilities<T> {
    let mut p_detect = T::zero();
    let mut p_total = T::zero();
    for i in 0..model.len() {
        let wd = model.weights()[i] * model.detect_probs()[i];
        p_detect += wd;
        if model.possession()[i] {
            p_total += wd;
        }
    }
    let p_conditional = if p_detect > T::zero() {
        Some(p_total / p_detect)
    } else {
        None
    };
    LimitProbabilities {
        p_detect,
        p_total,
        p_conditional,
    }
}

/// One empirical quantity with its 5σ convergence band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLine<T> {
    pub empirical: T,
    pub expected: T,
    pub abs_deviation: T,
    /// 5·sqrt(p(1−p)/n) at the relevant sample size.
    pub band: T,
}

impl<T: Real> ConvergenceLine<T> {
    fn new(count: u64, n: u64, expected: T) -> Self {
        let empirical = T::lit(count as f64) / T::lit(n as f64);
        let band = T::lit(5.0) * (expected * (T::one() - expected) / T::lit(n as f64)).sqrt();
        ConvergenceLine {
            empirical,
            expected,
            abs_deviation: (empirical - expected).abs(),
            band,
        }
    }

    pub fn within_band(&self) -> bool {
        self.abs_deviation <= self.band
    }
}

/// Result of simulating a finite run of a limit model.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub tally: EnsembleTally,
    pub detect: ConvergenceLine<T>,
    pub total: ConvergenceLine<T>,
    /// Conditional fraction over detected objects; absent when nothing was
    /// detected in the run or the limit conditional is undefined.
    pub conditional: Option<ConvergenceLine<T>>,
}

impl<T: Real> ConvergenceReport<T> {
    pub fn all_within_band(&self) -> bool {
        self.detect.within_band()
            && self.total.within_band()
            && self
                .conditional
                .as_ref()
                .is_none_or(ConvergenceLine::within_band)
    }
}

/// Sample `n` objects from the limit model (microstate by weight, detection
/// by the microstate's probability), rebuild the finite tally, and compare
/// its fractions against the limit probabilities.
pub fn empirical_limit_check<T: Real, R: Rng + ?Sized>(
    model: &LimitModel<T>,
    n: u64,
    rng: &mut R,
) -> Result<ConvergenceReport<T>> {
    if n == 0 {
        return Err(Error::domain(
            "empirical check needs at least one trial".to_string(),
        ));
    }
    let k = model.len();
    let mut totals = vec![0u64; k];
    let mut undetected = vec![0u64; k];
    for _ in 0..n {
        let i = sample_index(model.weights(), rng);
        totals[i] += 1;
        let detected = T::lit(rng.random::<f64>()) < model.detect_probs()[i];
        if !detected {
            undetected[i] += 1;
        }
    }
    let microstates = (0..k)
        .map(|i| MicrostateTally::new(totals[i], undetected[i], model.possession()[i]))
        .collect::<Result<Vec<_>>>()?;
    let tally = EnsembleTally::new(microstates)?;
    let limits = limit_probabilities(model);

    let detect = ConvergenceLine::new(tally.n_detected(), n, limits.p_detect);
    let total = ConvergenceLine::new(tally.n_possessing(), n, limits.p_total);
    let conditional = match (limits.p_conditional, tally.n_detected()) {
        (Some(p), d) if d > 0 => Some(ConvergenceLine::new(tally.n_possessing(), d, p)),
        _ => None,
    };
    Ok(ConvergenceReport {
        tally,
        detect,
        total,
        conditional,
    })
}

fn sample_index<T: Real, R: Rng + ?Sized>(weights: &[T], rng: &mut R) -> usize {
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}
