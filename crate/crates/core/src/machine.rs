//! The elastic-sphere measurement machine: a point particle on (or inside)
//! the unit sphere, measured by an elastic band stretched between ±u that
//! breaks at a uniformly random point. Detected statistics reproduce the
//! spin-1/2 Born probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::BlochVector;
use crate::error::Result;
use crate::scalar::Real;

/// Machine state: a point of the closed unit ball. Surface points behave
/// like pure states, interior points like mixtures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineState<T> {
    position: BlochVector<T>,
}

impl<T: Real> MachineState<T> {
    pub fn new(position: BlochVector<T>) -> Self {
        // BlochVector already enforces norm <= 1.
        MachineState { position }
    }

    pub fn position(&self) -> &BlochVector<T> {
        &self.position
    }
}

/// Measurement setup: the elastic band's anchor direction u (the band runs
/// from u to −u, 2 units long).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticExperiment<T> {
    direction: BlochVector<T>,
}

impl<T: Real> ElasticExperiment<T> {
    pub fn new(direction: BlochVector<T>) -> Result<Self> {
        if !direction.is_pure() {
            return Err(crate::error::Error::domain(format!(
                "elastic anchors must sit on the sphere, got norm {}",
                direction.norm()
            )));
        }
        Ok(ElasticExperiment { direction })
    }

    pub fn direction(&self) -> &BlochVector<T> {
        &self.direction
    }
}

/// The two machine outcomes: the particle snaps to +u (O1) or to −u (O2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MachineOutcome {
    O1,
    O2,
}

/// Closed-form outcome probabilities (μ₁, μ₂) = ((1 + w·u)/2, (1 − w·u)/2).
///
/// For a surface state this is (cos²(γ/2), sin²(γ/2)) with γ the angle
/// between state and anchor; for an interior state of radius r it becomes
/// ((1 ± r·cos γ)/2).
pub fn machine_probabilities<T: Real>(
    state: &MachineState<T>,
    exp: &ElasticExperiment<T>,
) -> (T, T) {
    let c = state.position().dot(exp.direction());
    let mu1 = (T::one() + c) * T::half();
    (mu1, T::one() - mu1)
}

/// One run of the elastic-break experiment.
///
/// The particle falls orthogonally onto the band at coordinate c = w·u; the
/// band breaks at a point uniform on [−1, 1). The particle goes to +u when
/// the break lands strictly below it; the measure-zero tie is given to O1.
pub fn run_machine_trial<T: Real, R: Rng + ?Sized>(
    state: &MachineState<T>,
    exp: &ElasticExperiment<T>,
    rng: &mut R,
) -> MachineOutcome {
    let c = state.position().dot(exp.direction());
    let b = T::lit(rng.random::<f64>()).mul_add(T::two(), -T::one());
    if b <= c {
        MachineOutcome::O1
    } else {
        MachineOutcome::O2
    }
}
