//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`; the harness result mirrors
//! it). Tolerances and thresholds are pinned in the assertions.
//!
//! Run with: cargo test -p spinsim-core --test acceptance -- --nocapture

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinsim_core::bloch::{qm_probabilities, BlochVector, DensityOperator2, SpinState};
use spinsim_core::ensemble::{
    fraction_decomposition, limit_probabilities, EnsembleTally, LimitModel, MicrostateTally,
};
use spinsim_core::machine::{machine_probabilities, ElasticExperiment, MachineState};
use spinsim_core::montecarlo::{compare, run_simulation, Scenario, SimulationConfig};
use spinsim_core::stats::{ks_p_value, ks_statistic, z_score};
use spinsim_core::tables::{DensityTable, ProfileTable};
use spinsim_core::unified::{
    boundary_angle, detection_integral_from, detection_probability, mixed_total_probabilities_at,
    sample_hidden_state, CapDensity, DetectionProfile,
};

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {name}: {}{}",
        if pass { "PASS" } else { "FAIL" },
        if detail.is_empty() {
            String::new()
        } else {
            format!(" ({detail})")
        }
    );
}

fn random_unit(rng: &mut ChaCha8Rng) -> BlochVector<f64> {
    let z: f64 = rng.random::<f64>() * 2.0 - 1.0;
    let phi: f64 = rng.random::<f64>() * 2.0 * PI;
    let s = (1.0 - z * z).sqrt();
    BlochVector::new(s * phi.cos(), s * phi.sin(), z).expect("unit vector")
}

fn machine_scenario(gamma: f64) -> Scenario<f64> {
    Scenario::Machine {
        state: MachineState::new(BlochVector::new(0.0, 0.0, 1.0).unwrap()),
        experiment: ElasticExperiment::new(BlochVector::from_polar(gamma, 0.0)).unwrap(),
    }
}

/// Grid of n points spanning [0, π] inclusive.
fn gamma_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn criterion_01_machine_law_on_gamma_grid() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (i, gamma) in gamma_grid(33).into_iter().enumerate() {
        let scenario = machine_scenario(gamma);
        let cfg = SimulationConfig::new(scenario, 1_000_000, 0x5EED_0001 + i as u64);
        let tally = run_simulation(&cfg).unwrap();
        let expected = cfg.scenario.expected_probabilities().unwrap();
        // The law under test: mu1 = (1 + cos γ)/2.
        assert!((expected.0 - (1.0 + gamma.cos()) / 2.0).abs() <= 1e-15);
        let report = compare(&tally, expected).unwrap();
        if !report.pass {
            failures.push(format!("γ = {gamma}: {report:?}"));
        }
    }
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs_f64() < 60.0;
    let pass = failures.is_empty() && within_budget;
    verdict(
        "01 machine-law-33-point-grid",
        pass,
        &format!("n=1e6 per point, runtime {:.2}s", elapsed.as_secs_f64()),
    );
    assert!(within_budget, "grid took {elapsed:?}, budget is 60s");
    assert!(
        failures.is_empty(),
        "failed points:\n{}",
        failures.join("\n")
    );
}

#[test]
fn criterion_02_machine_equals_born_rule_for_pure_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0002);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v = random_unit(&mut rng);
        let u = random_unit(&mut rng);
        let (mu1, mu2) =
            machine_probabilities(&MachineState::new(v), &ElasticExperiment::new(u).unwrap());
        let rho = DensityOperator2::from_pure(&SpinState::from_bloch(&v).unwrap());
        let (p, q) = qm_probabilities(&rho, &u).unwrap();
        worst = worst.max((mu1 - p).abs()).max((mu2 - q).abs());
    }
    let pass = worst <= 1e-12;
    verdict(
        "02 pure-state-oracle-equivalence",
        pass,
        &format!("worst |Δ| = {worst:.3e}"),
    );
    assert!(pass, "worst deviation {worst} exceeds 1e-12");
}

#[test]
fn criterion_03_interior_states_equal_mixture_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0003);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lambda1: f64 = rng.random();
        let lambda2 = 1.0 - lambda1;
        let v = random_unit(&mut rng);
        let u = random_unit(&mut rng);
        let w = v.scaled(lambda1 - lambda2);
        assert!((w.norm() - (lambda1 - lambda2).abs()).abs() <= 1e-12);
        let (mu1, mu2) =
            machine_probabilities(&MachineState::new(w), &ElasticExperiment::new(u).unwrap());
        let psi = SpinState::from_bloch(&v).unwrap();
        let rho =
            DensityOperator2::from_mixture(lambda1, &psi, lambda2, &psi.orthogonal()).unwrap();
        let (p, q) = qm_probabilities(&rho, &u).unwrap();
        worst = worst.max((mu1 - p).abs()).max((mu2 - q).abs());
    }
    let pass = worst <= 1e-12;
    verdict(
        "03 mixed-state-oracle-equivalence",
        pass,
        &format!("worst |Δ| = {worst:.3e}"),
    );
    assert!(pass, "worst deviation {worst} exceeds 1e-12");
}

#[test]
fn criterion_04_counting_product_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    for case in 0..10_000 {
        let k = 1 + (rng.random::<u64>() % 7) as usize;
        let microstates: Vec<MicrostateTally> = (0..k)
            .map(|i| {
                let n = if i == 0 {
                    1 + rng.random::<u64>() % 2000
                } else {
                    rng.random::<u64>() % 2000
                };
                let n0 = if n == 0 {
                    0
                } else {
                    rng.random::<u64>() % (n + 1)
                };
                MicrostateTally::new(n, n0, rng.random::<u64>() % 2 == 0).unwrap()
            })
            .collect();
        let tally = EnsembleTally::new(microstates).unwrap();
        let d = fraction_decomposition(&tally);
        assert!(
            d.product_law_holds(),
            "exact identity failed at case {case}: {d:?}"
        );
    }

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = 1 + (rng.random::<u64>() % 7) as usize;
        let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-9).collect();
        let total: f64 = raw.iter().sum();
        let model = LimitModel::new(
            raw.iter().map(|w| w / total).collect(),
            (0..k).map(|_| rng.random::<f64>()).collect(),
            (0..k).map(|_| rng.random::<u64>() % 2 == 0).collect(),
        )
        .unwrap();
        let p = limit_probabilities(&model);
        if let Some(cond) = p.p_conditional {
            worst = worst.max((p.p_detect * cond - p.p_total).abs());
        }
    }
    let pass = worst <= 1e-12;
    verdict(
        "04 ensemble-product-law",
        pass,
        &format!("10^4 exact tallies, limit worst |Δ| = {worst:.3e}"),
    );
    assert!(pass, "limit product law deviation {worst} exceeds 1e-12");
}

#[test]
fn criterion_05_unified_totals_match_simulation() {
    let cap = CapDensity::uniform(FRAC_PI_2).unwrap();
    let mut failures = Vec::new();
    for (pi, g) in [1.0f64, 0.8].into_iter().enumerate() {
        let profile = DetectionProfile::constant(g).unwrap();
        for (i, gamma) in gamma_grid(17).into_iter().enumerate() {
            let scenario = Scenario::Unified {
                gamma,
                cap: cap.clone(),
                profile: profile.clone(),
            };
            let cfg =
                SimulationConfig::new(scenario, 1_000_000, 0x5EED_0500 + (pi * 100 + i) as u64);
            let tally = run_simulation(&cfg).unwrap();
            let expected = cfg.scenario.expected_probabilities().unwrap();
            let report = compare(&tally, expected).unwrap();
            if !report.pass {
                failures.push(format!("g = {g}, γ = {gamma}: totals {report:?}"));
            }
            // Conditional-on-detection split must follow cos²(γ/2).
            let detected = tally.count_o1 + tally.count_o2;
            let c2 = (gamma / 2.0).cos().powi(2);
            let z = z_score(tally.count_o1, detected, c2);
            if !(z.is_finite() && z.abs() < 5.0) {
                failures.push(format!("g = {g}, γ = {gamma}: conditional z = {z}"));
            }
        }
    }
    let pass = failures.is_empty();
    verdict(
        "05 unified-factorization-grid",
        pass,
        "g in {1, 0.8}, 17-point grid, n=1e6",
    );
    assert!(pass, "failed points:\n{}", failures.join("\n"));
}

#[test]
fn criterion_06_boundary_angle_solves_cap_measure() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0006);
    let mut worst_measure = 0.0f64;
    let mut worst_angle = 0.0f64;
    for _ in 0..100 {
        let theta0 = rng.random::<f64>() * 2.8;
        let gamma = rng.random::<f64>() * PI;
        let cap = CapDensity::uniform(theta0).unwrap();
        let theta_b = boundary_angle(&cap, gamma).unwrap();
        let target = (gamma / 2.0).cos().powi(2);
        worst_measure = worst_measure.max((cap.measure_from(theta_b).unwrap() - target).abs());
        let closed = ((1.0 + theta0.cos()) * target - 1.0)
            .clamp(-1.0, 1.0)
            .acos();
        worst_angle = worst_angle.max((theta_b - closed).abs());
    }
    let pass = worst_measure <= 1e-9 && worst_angle <= 1e-9;
    verdict(
        "06 boundary-angle-bisection",
        pass,
        &format!("worst measure residual {worst_measure:.3e}, worst angle gap {worst_angle:.3e}"),
    );
    assert!(
        pass,
        "measure {worst_measure}, angle {worst_angle} exceed 1e-9"
    );
}

#[test]
fn criterion_07_inner_cap_integral_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0007);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let theta0 = 0.2 + rng.random::<f64>() * 2.4;
        let gamma = rng.random::<f64>() * PI;
        let g = 0.05 + 0.95 * rng.random::<f64>();

        let cap = if case % 2 == 0 {
            CapDensity::uniform(theta0).unwrap()
        } else {
            // Random positive table, normalized numerically.
            let nodes = 17;
            let points: Vec<(f64, f64)> = (0..nodes)
                .map(|i| {
                    let t = theta0 + (PI - theta0) * i as f64 / (nodes - 1) as f64;
                    (t, 0.2 + rng.random::<f64>())
                })
                .collect();
            CapDensity::tabulated(DensityTable::new_normalized(points).unwrap()).unwrap()
        };
        // Constant-in-θ profile; the tabulated variant exercises the real
        // quadrature path with the same expected value.
        let profile = if case % 3 == 0 {
            DetectionProfile::constant(g).unwrap()
        } else {
            DetectionProfile::tabulated(
                ProfileTable::new(vec![0.0, PI], vec![0.0, PI], vec![g; 4]).unwrap(),
            )
        };

        let theta_b = boundary_angle(&cap, gamma).unwrap();
        let inner = detection_integral_from(&cap, &profile, gamma, theta_b).unwrap();
        let p_detect = detection_probability(&cap, &profile, gamma).unwrap();
        let c2 = (gamma / 2.0).cos().powi(2);
        worst = worst.max((inner - p_detect * c2).abs());
    }
    let pass = worst <= 1e-9;
    verdict(
        "07 microstate-decomposition",
        pass,
        &format!("worst |Δ| = {worst:.3e}"),
    );
    assert!(pass, "decomposition deviation {worst} exceeds 1e-9");
}

#[test]
fn criterion_08_mixture_simulation_matches_totals() {
    let cap = CapDensity::uniform(FRAC_PI_2).unwrap();
    let profile = DetectionProfile::constant(0.8).unwrap();
    let mut failures = Vec::new();
    for (i, lambda1) in [0.5f64, 0.75, 0.9].into_iter().enumerate() {
        for (j, gamma) in [FRAC_PI_6, FRAC_PI_2, 5.0 * PI / 6.0]
            .into_iter()
            .enumerate()
        {
            let expected =
                mixed_total_probabilities_at(lambda1, 1.0 - lambda1, gamma, &cap, &profile)
                    .unwrap()
                    .as_outcome_vector();
            let scenario = Scenario::Mixed {
                lambda1,
                gamma,
                cap: cap.clone(),
                profile: profile.clone(),
            };
            let cfg = SimulationConfig::new(scenario, 1_000_000, 0x5EED_0800 + (i * 10 + j) as u64);
            let tally = run_simulation(&cfg).unwrap();
            let report = compare(&tally, expected).unwrap();
            if !report.pass {
                failures.push(format!("λ1 = {lambda1}, γ = {gamma}: {report:?}"));
            }
        }
    }
    let pass = failures.is_empty();
    verdict(
        "08 mixture-simulation",
        pass,
        "(λ1, γ) in {0.5,0.75,0.9} x {π/6,π/2,5π/6}, n=1e6",
    );
    assert!(pass, "failed combos:\n{}", failures.join("\n"));
}

#[test]
fn criterion_09_reproducibility_across_workers() {
    let cap = CapDensity::uniform(FRAC_PI_2).unwrap();
    let scenarios: Vec<(&str, Scenario<f64>)> = vec![
        ("machine", machine_scenario(FRAC_PI_3)),
        (
            "unified",
            Scenario::Unified {
                gamma: FRAC_PI_2,
                cap: cap.clone(),
                profile: DetectionProfile::constant(0.8).unwrap(),
            },
        ),
        (
            "mixed",
            Scenario::Mixed {
                lambda1: 0.75,
                gamma: FRAC_PI_3,
                cap,
                profile: DetectionProfile::constant(0.8).unwrap(),
            },
        ),
        (
            "ensemble",
            Scenario::Ensemble {
                model: LimitModel::new(vec![0.6, 0.4], vec![5.0 / 6.0, 0.5], vec![true, false])
                    .unwrap(),
            },
        ),
    ];
    let mut pass = true;
    for (name, scenario) in scenarios {
        let base = SimulationConfig::new(scenario, 100_000, 0x5EED_0009);
        let reference = run_simulation(&base.clone().with_workers(1)).unwrap();
        for workers in [1usize, 2, 5, 8] {
            let tally = run_simulation(&base.clone().with_workers(workers)).unwrap();
            if tally != reference {
                pass = false;
                println!(
                    "scenario {name} diverged at {workers} workers: {tally:?} vs {reference:?}"
                );
            }
        }
        let rerun = run_simulation(&base.with_workers(3)).unwrap();
        if rerun != reference {
            pass = false;
            println!("scenario {name} rerun diverged");
        }
    }
    verdict(
        "09 worker-independent-reproducibility",
        pass,
        "all scenarios, n=1e5",
    );
    assert!(pass);
}

#[test]
fn criterion_10_cap_sampler_passes_ks() {
    let n = 100_000usize;

    // Uniform density on the half cap: CDF(θ) = −cos θ on [π/2, π].
    let cap = CapDensity::uniform(FRAC_PI_2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0010);
    let mut thetas: Vec<f64> = (0..n)
        .map(|_| sample_hidden_state(&cap, &mut rng).theta())
        .collect();
    let d_uniform = ks_statistic(&mut thetas, |t| -t.cos());
    let p_uniform = ks_p_value(d_uniform, n);

    // Tabulated density proportional to (1 − cos θ) on [π/2, π]; closed-form
    // CDF(θ) = (2/3)(cos²θ / 2 − cos θ).
    let nodes = 201;
    let points: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let t = FRAC_PI_2 + (PI - FRAC_PI_2) * i as f64 / (nodes - 1) as f64;
            (t, (1.0 - t.cos()) / (3.0 * PI))
        })
        .collect();
    let ramp = CapDensity::tabulated(DensityTable::new_normalized(points).unwrap()).unwrap();
    let mut thetas: Vec<f64> = (0..n)
        .map(|_| sample_hidden_state(&ramp, &mut rng).theta())
        .collect();
    let d_ramp = ks_statistic(&mut thetas, |t| {
        (2.0 / 3.0) * (t.cos().powi(2) / 2.0 - t.cos())
    });
    let p_ramp = ks_p_value(d_ramp, n);

    let pass = p_uniform >= 0.01 && p_ramp >= 0.01;
    verdict(
        "10 sampler-ks",
        pass,
        &format!("uniform p = {p_uniform:.4}, tabulated p = {p_ramp:.4}, n = 1e5"),
    );
    assert!(
        pass,
        "KS p-values: uniform {p_uniform}, tabulated {p_ramp} (need >= 0.01)"
    );
}
