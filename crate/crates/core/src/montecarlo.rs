//! Seeded, reproducible batch simulation and the statistics that judge it.
//!
//! Expected probabilities always come from the corresponding analytic
//! operation of the model modules; nothing here duplicates a formula.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{limit_probabilities, LimitModel};
use crate::error::{Error, Result};
use crate::machine::{
    machine_probabilities, run_machine_trial, ElasticExperiment, MachineOutcome, MachineState,
};
use crate::rng::TrialStreams;
use crate::scalar::Real;
use crate::stats::{chi_squared_gof, z_score};
use crate::unified::{
    mixed_total_probabilities_at, total_probabilities_at, CapDensity, DetectionProfile,
    MixedExperiment, UnifiedExperiment, UnifiedOutcome,
};

/// Individual-outcome z threshold for a passing run.
pub const Z_LIMIT: f64 = 5.0;
/// Chi-squared significance level for a passing run.
pub const CHI_SQUARED_ALPHA: f64 = 0.001;

/// Trials are dispatched to workers in fixed-size blocks; per-trial streams
/// make the block size irrelevant to the result.
const BLOCK: u64 = 16_384;

/// What to simulate. Angle-parameterized scenarios take the angle between
/// the state direction and the measurement direction.
#[derive(Debug, Clone)]
pub enum Scenario<T: Real> {
    /// Elastic-machine run (two outcomes).
    Machine {
        state: MachineState<T>,
        experiment: ElasticExperiment<T>,
    },
    /// Detection-sphere run (three outcomes).
    Unified {
        gamma: T,
        cap: CapDensity<T>,
        profile: DetectionProfile<T>,
    },
    /// Detection-sphere run on a binary mixture.
    Mixed {
        lambda1: T,
        gamma: T,
        cap: CapDensity<T>,
        profile: DetectionProfile<T>,
    },
    /// Finite sampling of an ensemble limit model. Outcomes map to
    /// (detected and possessing, detected not possessing, undetected).
    Ensemble { model: LimitModel<T> },
}

impl<T: Real> Scenario<T> {
    /// Closed-form outcome probabilities (p_o1, p_o2, p_a0), delegated to
    /// the analytic operation of the owning module.
    pub fn expected_probabilities(&self) -> Result<(T, T, T)> {
        match self {
            Scenario::Machine { state, experiment } => {
                let (mu1, mu2) = machine_probabilities(state, experiment);
                Ok((mu1, mu2, T::zero()))
            }
            Scenario::Unified {
                gamma,
                cap,
                profile,
            } => {
                let t = total_probabilities_at(*gamma, cap, profile)?;
                Ok(t.as_outcome_vector())
            }
            Scenario::Mixed {
                lambda1,
                gamma,
                cap,
                profile,
            } => {
                let t = mixed_total_probabilities_at(
                    *lambda1,
                    T::one() - *lambda1,
                    *gamma,
                    cap,
                    profile,
                )?;
                Ok(t.as_outcome_vector())
            }
            Scenario::Ensemble { model } => {
                let p = limit_probabilities(model);
                Ok((p.p_total, p.p_detect - p.p_total, T::one() - p.p_detect))
            }
        }
    }

    fn prepare(&self) -> Result<Prepared<T>> {
        Ok(match self {
            Scenario::Machine { state, experiment } => Prepared::Machine {
                state: *state,
                experiment: *experiment,
            },
            Scenario::Unified {
                gamma,
                cap,
                profile,
            } => Prepared::Unified(UnifiedExperiment::new(
                *gamma,
                cap.clone(),
                profile.clone(),
            )?),
            Scenario::Mixed {
                lambda1,
                gamma,
                cap,
                profile,
            } => Prepared::Mixed(MixedExperiment::new(
                *lambda1,
                T::one() - *lambda1,
                *gamma,
                cap.clone(),
                profile.clone(),
            )?),
            Scenario::Ensemble { model } => {
                let mut cum = Vec::with_capacity(model.len());
                let mut acc = T::zero();
                for &w in model.weights() {
                    acc += w;
                    cum.push(acc);
                }
                Prepared::Ensemble {
                    cum_weights: cum,
                    detect: model.detect_probs().to_vec(),
                    possession: model.possession().to_vec(),
                }
            }
        })
    }
}

enum Prepared<T: Real> {
    Machine {
        state: MachineState<T>,
        experiment: ElasticExperiment<T>,
    },
    Unified(UnifiedExperiment<T>),
    Mixed(MixedExperiment<T>),
    Ensemble {
        cum_weights: Vec<T>,
        detect: Vec<T>,
        possession: Vec<bool>,
    },
}

impl<T: Real> Prepared<T> {
    #[inline]
    fn run(&self, rng: &mut ChaCha8Rng) -> UnifiedOutcome {
        match self {
            Prepared::Machine { state, experiment } => {
                match run_machine_trial(state, experiment, rng) {
                    MachineOutcome::O1 => UnifiedOutcome::O1,
                    MachineOutcome::O2 => UnifiedOutcome::O2,
                }
            }
            Prepared::Unified(exp) => exp.run_trial(rng),
            Prepared::Mixed(exp) => exp.run_trial(rng),
            Prepared::Ensemble {
                cum_weights,
                detect,
                possession,
            } => {
                let u = T::lit(rng.random::<f64>());
                let i = match cum_weights
                    .binary_search_by(|c| c.partial_cmp(&u).expect("finite weight"))
                {
                    Ok(i) => i + 1,
                    Err(i) => i,
                }
                .min(cum_weights.len() - 1);
                let detected = T::lit(rng.random::<f64>()) < detect[i];
                if !detected {
                    UnifiedOutcome::A0
                } else if possession[i] {
                    UnifiedOutcome::O1
                } else {
                    UnifiedOutcome::O2
                }
            }
        }
    }
}

/// A complete simulation request. Identical configs yield identical tallies
/// regardless of the worker count.
#[derive(Debug, Clone)]
pub struct SimulationConfig<T: Real> {
    pub scenario: Scenario<T>,
    pub trials: u64,
    pub master_seed: u64,
    pub workers: usize,
}

impl<T: Real> SimulationConfig<T> {
    pub fn new(scenario: Scenario<T>, trials: u64, master_seed: u64) -> Self {
        SimulationConfig {
            scenario,
            trials,
            master_seed,
            workers: 0,
        }
    }

    /// Fix the worker-thread count; 0 lets the runtime decide.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Outcome counts of a finished run; the three counts sum to the trial count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrialTally {
    pub count_o1: u64,
    pub count_o2: u64,
    pub count_a0: u64,
}

impl TrialTally {
    pub fn total(&self) -> u64 {
        self.count_o1 + self.count_o2 + self.count_a0
    }

    pub fn counts(&self) -> [u64; 3] {
        [self.count_o1, self.count_o2, self.count_a0]
    }

    #[inline]
    fn record(&mut self, outcome: UnifiedOutcome) {
        match outcome {
            UnifiedOutcome::O1 => self.count_o1 += 1,
            UnifiedOutcome::O2 => self.count_o2 += 1,
            UnifiedOutcome::A0 => self.count_a0 += 1,
        }
    }

    fn merge(mut self, other: TrialTally) -> TrialTally {
        self.count_o1 += other.count_o1;
        self.count_o2 += other.count_o2;
        self.count_a0 += other.count_a0;
        self
    }
}

/// Execute the configured trials. Trial `i` draws from the stream selected
/// by `i` under the master seed, so the tally is a pure function of the
/// config; the worker count only changes scheduling.
pub fn run_simulation<T: Real>(cfg: &SimulationConfig<T>) -> Result<TrialTally> {
    if cfg.trials == 0 {
        return Err(Error::config(
            "simulation needs at least one trial".to_string(),
        ));
    }
    let prepared = cfg.scenario.prepare()?;
    let streams = TrialStreams::new(cfg.master_seed);

    let run_block = |lo: u64, hi: u64| {
        let mut tally = TrialTally::default();
        for i in lo..hi {
            let mut rng = streams.stream(i);
            tally.record(prepared.run(&mut rng));
        }
        tally
    };

    if cfg.workers == 1 {
        return Ok(run_block(0, cfg.trials));
    }

    let blocks: Vec<(u64, u64)> = (0..cfg.trials)
        .step_by(BLOCK as usize)
        .map(|lo| (lo, (lo + BLOCK).min(cfg.trials)))
        .collect();
    let sweep = || {
        blocks
            .par_iter()
            .map(|&(lo, hi)| run_block(lo, hi))
            .reduce(TrialTally::default, TrialTally::merge)
    };
    let tally = if cfg.workers == 0 {
        sweep()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;
        pool.install(sweep)
    };
    Ok(tally)
}

/// Verdict on one outcome category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct OutcomeCheck<T> {
    pub label: String,
    pub count: u64,
    pub frequency: T,
    pub expected: T,
    pub std_err: T,
    pub z: T,
    pub pass_5_sigma: bool,
    /// An impossible outcome (expected probability 0) was observed.
    pub hard_fail: bool,
}

/// Full comparison of a tally against expected probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: serde::de::DeserializeOwned"
))]
pub struct StatReport<T> {
    pub trials: u64,
    pub outcomes: Vec<OutcomeCheck<T>>,
    pub chi_squared: T,
    pub dof: usize,
    pub p_value: T,
    pub pass: bool,
}

/// Judge a tally against expected `(p_o1, p_o2, p_a0)`. Every |z| must stay
/// within [`Z_LIMIT`], the chi-squared p-value above [`CHI_SQUARED_ALPHA`],
/// and zero-probability categories must have exactly zero counts.
pub fn compare<T: Real>(tally: &TrialTally, expected: (T, T, T)) -> Result<StatReport<T>> {
    let probs = [expected.0, expected.1, expected.2];
    let sum = probs.iter().fold(T::zero(), |a, &p| a + p);
    if (sum - T::one()).abs() > T::measure_tol() {
        return Err(Error::domain(format!(
            "expected probabilities sum to {sum}, not 1"
        )));
    }
    if probs.iter().any(|&p| p < -T::measure_tol()) {
        return Err(Error::domain(
            "expected probabilities must be nonnegative".to_string(),
        ));
    }
    let n = tally.total();
    if n == 0 {
        return Err(Error::domain("cannot judge an empty tally".to_string()));
    }
    let counts = tally.counts();
    let labels = ["o1", "o2", "a0"];
    let nf = T::lit(n as f64);

    let mut outcomes = Vec::with_capacity(3);
    for k in 0..3 {
        let p = probs[k];
        let z = z_score(counts[k], n, p);
        let hard_fail = p <= T::zero() && counts[k] > 0;
        outcomes.push(OutcomeCheck {
            label: labels[k].to_string(),
            count: counts[k],
            frequency: T::lit(counts[k] as f64) / nf,
            expected: p,
            std_err: (p * (T::one() - p) / nf).sqrt(),
            z,
            pass_5_sigma: z.is_finite() && z.abs() <= T::lit(Z_LIMIT),
            hard_fail,
        });
    }

    // Chi-squared over the categories that can occur at all.
    let mut live_counts = Vec::new();
    let mut live_probs = Vec::new();
    for k in 0..3 {
        if probs[k] > T::zero() {
            live_counts.push(counts[k]);
            live_probs.push(probs[k]);
        }
    }
    let any_hard_fail = outcomes.iter().any(|o| o.hard_fail);
    let (chi_squared, dof, p_value) = if any_hard_fail {
        (
            T::infinity(),
            live_counts.len().saturating_sub(1),
            T::zero(),
        )
    } else {
        chi_squared_gof(&live_counts, &live_probs)?
    };

    let pass = !any_hard_fail
        && outcomes.iter().all(|o| o.pass_5_sigma)
        && p_value > T::lit(CHI_SQUARED_ALPHA);
    Ok(StatReport {
        trials: n,
        outcomes,
        chi_squared,
        dof,
        p_value,
        pass,
    })
}
