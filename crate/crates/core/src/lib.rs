//! Hidden-variable measurement models that reproduce spin-1/2 quantum
//! statistics, together with a seeded Monte Carlo engine to cross-validate
//! them.
//!
//! Three models are implemented and shown to agree:
//!
//! * [`machine`] — the elastic-sphere machine: a point particle measured by
//!   an elastic band between ±u that breaks uniformly at random. Outcome
//!   frequencies follow cos²(γ/2) / sin²(γ/2).
//! * [`ensemble`] — a counting algebra over microstates with a
//!   no-registration outcome: the possessing fraction factors exactly into
//!   detected × conditional, in finite runs and in the limit.
//! * [`unified`] — the detection-sphere model joining the two: hidden states
//!   on a spherical cap decide detection (via p(γ,θ)) and, through the cap
//!   partition C₊/C₋, the outcome. Conditional on detection it reproduces
//!   the machine's statistics, including for mixtures.
//!
//! [`bloch`] supplies the exact quantum probabilities all of this is tested
//! against, and [`montecarlo`] runs reproducible counter-seeded trials.
//!
//! All numeric code is generic over the scalar type through
//! [`scalar::Real`]; the aliases below fix the default `f64` precision.

pub mod bloch;
pub mod ensemble;
pub mod error;
pub mod machine;
pub mod mat2;
pub mod montecarlo;
pub mod numeric;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod tables;
pub mod unified;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default-precision aliases for the common types.
pub type BlochVector64 = bloch::BlochVector<f64>;
pub type SpinState64 = bloch::SpinState<f64>;
pub type DensityOperator64 = bloch::DensityOperator2<f64>;
pub type MachineState64 = machine::MachineState<f64>;
pub type ElasticExperiment64 = machine::ElasticExperiment<f64>;
pub type LimitModel64 = ensemble::LimitModel<f64>;
pub type CapDensity64 = unified::CapDensity<f64>;
pub type DetectionProfile64 = unified::DetectionProfile<f64>;
pub type TotalProbabilities64 = unified::TotalProbabilities<f64>;
pub type Scenario64 = montecarlo::Scenario<f64>;
pub type SimulationConfig64 = montecarlo::SimulationConfig<f64>;
pub type StatReport64 = montecarlo::StatReport<f64>;
