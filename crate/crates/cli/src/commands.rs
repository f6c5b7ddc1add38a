//! The five subcommands. Each builds a [`Rendered`] payload: the JSON run
//! record, the fixed-column CSV view, and a text summary.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use spinsim_core::bloch::{qm_probabilities, DensityOperator2, SpinState};
use spinsim_core::ensemble::{limit_probabilities, LimitModel};
use spinsim_core::machine::{machine_probabilities, ElasticExperiment, MachineState};
use spinsim_core::montecarlo::{compare, run_simulation, SimulationConfig, TrialTally};
use spinsim_core::unified::{boundary_angle, consistency_check, total_probabilities_at};
use spinsim_core::{BlochVector64, Error as CoreError, Scenario64, StatReport64};

use crate::args::{check_gamma, parse_vec3, OutputArgs, RunArgs, SphereArgs};
use crate::record::{num, opt_num, report_text, CsvTable, Rendered, RunRecord};
use crate::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Oracle agreement tolerance for the exact closed forms.
const ORACLE_TOL: f64 = 1e-12;
/// Tolerance for quantities that pass through quadrature or bisection.
const MEASURE_TOL: f64 = 1e-9;

#[allow(clippy::too_many_arguments)]
fn record(
    command: &str,
    params: Value,
    analytic: Value,
    tally: Option<TrialTally>,
    report: Option<StatReport64>,
    points: Option<Vec<Value>>,
    passed: bool,
    started: Instant,
) -> RunRecord {
    RunRecord {
        command: command.to_string(),
        version: VERSION.to_string(),
        params,
        analytic,
        tally,
        report,
        points,
        passed,
        duration_seconds: started.elapsed().as_secs_f64(),
    }
}

fn simulate(
    scenario: Scenario64,
    expected: (f64, f64, f64),
    run: &RunArgs,
) -> Result<(TrialTally, StatReport64), CliError> {
    let cfg = SimulationConfig::new(scenario, run.n, run.seed).with_workers(run.resolve_workers()?);
    let tally = run_simulation(&cfg)?;
    let report = compare(&tally, expected)?;
    Ok((tally, report))
}

fn sim_cells(tally: Option<&TrialTally>, report: Option<&StatReport64>) -> Vec<String> {
    match (tally, report) {
        (Some(t), Some(r)) => vec![
            t.count_o1.to_string(),
            t.count_o2.to_string(),
            t.count_a0.to_string(),
            num(r.outcomes[0].frequency),
            num(r.outcomes[1].frequency),
            num(r.outcomes[2].frequency),
            num(r.outcomes[0].z),
            num(r.outcomes[1].z),
            num(r.outcomes[2].z),
            num(r.chi_squared),
            num(r.p_value),
            r.pass.to_string(),
        ],
        _ => vec![String::new(); 12],
    }
}

const SIM_COLUMNS: [&str; 12] = [
    "count_o1",
    "count_o2",
    "count_a0",
    "freq_o1",
    "freq_o2",
    "freq_a0",
    "z_o1",
    "z_o2",
    "z_a0",
    "chi_squared",
    "p_value",
    "pass",
];

/// Born probabilities of the mixture with weight `lambda1` on the state
/// along `v_hat`, measured along `u`: the exact oracle the machine answers
/// are checked against.
fn mixture_oracle(
    lambda1: f64,
    v_hat: &BlochVector64,
    u: &BlochVector64,
) -> Result<(f64, f64), CliError> {
    let psi = SpinState::from_bloch(v_hat)?;
    let rho = DensityOperator2::from_mixture(lambda1, &psi, 1.0 - lambda1, &psi.orthogonal())?;
    Ok(qm_probabilities(&rho, u)?)
}

// ---------------------------------------------------------------------------
// machine

#[derive(Args, Debug)]
pub struct MachineArgs {
    /// Angle between state and measurement directions
    #[arg(long, conflicts_with_all = ["v", "u"])]
    pub gamma: Option<f64>,

    /// State radius |w| in [0, 1]; 1 = surface (pure) state
    #[arg(long, default_value_t = 1.0, conflicts_with_all = ["v", "u"])]
    pub radius: f64,

    /// Explicit state vector "x,y,z" with norm <= 1 (alternative to --gamma)
    #[arg(long, requires = "u")]
    pub v: Option<String>,

    /// Explicit unit measurement direction "x,y,z"
    #[arg(long, requires = "v")]
    pub u: Option<String>,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn machine(args: &MachineArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    args.run.validate()?;

    let (state_vec, direction) = match (&args.v, &args.u) {
        (Some(v), Some(u)) => (parse_vec3(v)?, parse_vec3(u)?),
        (None, None) => {
            let gamma = check_gamma(args.output.angle(args.gamma.ok_or_else(|| {
                CliError::config("either --gamma or both --v and --u are required")
            })?))?;
            if !(0.0..=1.0).contains(&args.radius) {
                return Err(CliError::config(format!(
                    "--radius must lie in [0, 1], got {}",
                    args.radius
                )));
            }
            (
                BlochVector64::new(0.0, 0.0, args.radius)?,
                BlochVector64::from_polar(gamma, 0.0),
            )
        }
        _ => return Err(CliError::config("--v and --u must be given together")),
    };

    let state = MachineState::new(state_vec);
    let experiment = ElasticExperiment::new(direction)?;
    let (mu1, mu2) = machine_probabilities(&state, &experiment);
    let radius = state_vec.norm();
    let gamma = if radius > 0.0 {
        Some(state_vec.angle_between(&direction)?)
    } else {
        None
    };

    // Exact oracle: trace-formula probabilities of the equivalent mixture.
    let v_hat = if radius > 0.0 {
        state_vec.scaled(1.0 / radius)
    } else {
        BlochVector64::new(0.0, 0.0, 1.0)?
    };
    let (p_plus, p_minus) = mixture_oracle((1.0 + radius) / 2.0, &v_hat, &direction)?;
    let oracle_deviation = (mu1 - p_plus).abs().max((mu2 - p_minus).abs());
    let oracle_ok = oracle_deviation <= ORACLE_TOL;

    let (tally, report) = if args.run.check {
        (None, None)
    } else {
        let (t, r) = simulate(
            Scenario64::Machine { state, experiment },
            (mu1, mu2, 0.0),
            &args.run,
        )?;
        (Some(t), Some(r))
    };
    let passed = oracle_ok && report.as_ref().is_none_or(|r| r.pass);

    let params = json!({
        "gamma": gamma,
        "radius": radius,
        "v": [state_vec.x, state_vec.y, state_vec.z],
        "u": [direction.x, direction.y, direction.z],
        "n": args.run.n,
        "seed": args.run.seed,
        "workers": args.run.resolve_workers()?,
        "check": args.run.check,
    });
    let analytic = json!({
        "mu1": mu1,
        "mu2": mu2,
        "oracle_deviation": oracle_deviation,
    });

    let mut header = vec![
        "command",
        "gamma",
        "radius",
        "n",
        "seed",
        "mu1",
        "mu2",
        "oracle_deviation",
    ];
    header.extend(SIM_COLUMNS);
    let mut row = vec![
        "machine".to_string(),
        opt_num(gamma),
        num(radius),
        args.run.n.to_string(),
        args.run.seed.to_string(),
        num(mu1),
        num(mu2),
        num(oracle_deviation),
    ];
    row.extend(sim_cells(tally.as_ref(), report.as_ref()));

    let mut text = format!(
        "machine experiment: gamma = {}, |w| = {}\n\
         analytic: mu1 = {}, mu2 = {}\n\
         oracle: trace-formula deviation {:.3e} -> {}\n",
        gamma
            .map(num)
            .unwrap_or_else(|| "undefined (center state)".to_string()),
        num(radius),
        num(mu1),
        num(mu2),
        oracle_deviation,
        if oracle_ok { "ok" } else { "FAIL" }
    );
    if let Some(r) = &report {
        text.push_str(&format!(
            "simulated n = {} (seed {}):\n",
            args.run.n, args.run.seed
        ));
        text.push_str(&report_text(r));
    } else {
        text.push_str("analytic check only (--check), no trials run\n");
    }
    text.push_str(&format!(
        "result: {}\n",
        if passed { "pass" } else { "FAIL" }
    ));

    Ok(Rendered {
        record: record(
            "machine", params, analytic, tally, report, None, passed, started,
        ),
        csv: CsvTable {
            header,
            rows: vec![row],
        },
        text,
    })
}

// ---------------------------------------------------------------------------
// unified

#[derive(Args, Debug)]
pub struct UnifiedArgs {
    /// Angle between state and measurement directions
    #[arg(long)]
    pub gamma: f64,

    #[command(flatten)]
    pub sphere: SphereArgs,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn unified(args: &UnifiedArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    args.run.validate()?;
    let gamma = check_gamma(args.output.angle(args.gamma))?;
    let cap = args.sphere.build_density(&args.output)?;
    let profile = args.sphere.build_profile()?;

    let totals = total_probabilities_at(gamma, &cap, &profile)?;
    let theta_b = boundary_angle(&cap, gamma)?;
    let deviation = match consistency_check(&cap, &profile, gamma) {
        Ok(d) => Some(d),
        Err(CoreError::Numeric(_)) => None,
        Err(e) => return Err(e.into()),
    };

    let norm_ok = (totals.p_o1 + totals.p_o2 + totals.p_a0() - 1.0).abs() <= MEASURE_TOL;
    let factor_ok = if profile.is_constant_in_theta() {
        deviation.is_none_or(|d| d <= MEASURE_TOL)
    } else {
        true
    };

    let (tally, report) = if args.run.check {
        (None, None)
    } else {
        let scenario = Scenario64::Unified {
            gamma,
            cap: cap.clone(),
            profile: profile.clone(),
        };
        let (t, r) = simulate(scenario, totals.as_outcome_vector(), &args.run)?;
        (Some(t), Some(r))
    };
    let passed = norm_ok && factor_ok && report.as_ref().is_none_or(|r| r.pass);

    let params = json!({
        "gamma": gamma,
        "theta0": cap.theta0(),
        "density": args.sphere.density,
        "profile": args.sphere.profile,
        "n": args.run.n,
        "seed": args.run.seed,
        "workers": args.run.resolve_workers()?,
        "check": args.run.check,
    });
    let analytic = json!({
        "p_detect": totals.p_detect,
        "p_o1": totals.p_o1,
        "p_o2": totals.p_o2,
        "p_a0": totals.p_a0(),
        "boundary_angle": theta_b,
        "consistency_deviation": deviation,
    });

    let mut header = vec![
        "command",
        "gamma",
        "theta0",
        "n",
        "seed",
        "p_detect",
        "p_o1",
        "p_o2",
        "p_a0",
        "boundary_angle",
        "consistency_deviation",
    ];
    header.extend(SIM_COLUMNS);
    let mut row = vec![
        "unified".to_string(),
        num(gamma),
        num(cap.theta0()),
        args.run.n.to_string(),
        args.run.seed.to_string(),
        num(totals.p_detect),
        num(totals.p_o1),
        num(totals.p_o2),
        num(totals.p_a0()),
        num(theta_b),
        opt_num(deviation),
    ];
    row.extend(sim_cells(tally.as_ref(), report.as_ref()));

    let mut text = format!(
        "detection-sphere experiment: gamma = {}, theta0 = {}\n\
         analytic: p_detect = {}, p_o1 = {}, p_o2 = {}, p_a0 = {}\n\
         cap partition: boundary angle = {}, consistency deviation = {}\n",
        num(gamma),
        num(cap.theta0()),
        num(totals.p_detect),
        num(totals.p_o1),
        num(totals.p_o2),
        num(totals.p_a0()),
        num(theta_b),
        deviation
            .map(num)
            .unwrap_or_else(|| "undefined (no detection)".to_string()),
    );
    if let Some(r) = &report {
        text.push_str(&format!(
            "simulated n = {} (seed {}):\n",
            args.run.n, args.run.seed
        ));
        text.push_str(&report_text(r));
    } else {
        text.push_str("analytic check only (--check), no trials run\n");
    }
    text.push_str(&format!(
        "result: {}\n",
        if passed { "pass" } else { "FAIL" }
    ));

    Ok(Rendered {
        record: record(
            "unified", params, analytic, tally, report, None, passed, started,
        ),
        csv: CsvTable {
            header,
            rows: vec![row],
        },
        text,
    })
}

// ---------------------------------------------------------------------------
// mixed

#[derive(Args, Debug)]
pub struct MixedArgs {
    /// Weight of the component state along +v
    #[arg(long)]
    pub lambda1: f64,

    /// Angle between +v and the measurement direction
    #[arg(long)]
    pub gamma: f64,

    #[command(flatten)]
    pub sphere: SphereArgs,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn mixed(args: &MixedArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    args.run.validate()?;
    let gamma = check_gamma(args.output.angle(args.gamma))?;
    if !(0.0..=1.0).contains(&args.lambda1) {
        return Err(CliError::config(format!(
            "--lambda1 must lie in [0, 1], got {}",
            args.lambda1
        )));
    }
    let cap = args.sphere.build_density(&args.output)?;
    let profile = args.sphere.build_profile()?;
    if profile.gamma_symmetry() == Some(false) {
        return Err(CliError::config(format!(
            "profile '{}' is asymmetric under gamma -> pi - gamma; mixed runs need a \
             symmetric profile (unit, const:C, or a symmetric table)",
            args.sphere.profile
        )));
    }

    let lambda1 = args.lambda1;
    let lambda2 = 1.0 - lambda1;
    let totals = spinsim_core::unified::mixed_total_probabilities_at(
        lambda1, lambda2, gamma, &cap, &profile,
    )?;
    let theta_b = boundary_angle(&cap, gamma)?;

    // Oracle: conditional-on-detection probabilities must match the Born
    // probabilities of the corresponding density operator.
    let v_hat = BlochVector64::new(0.0, 0.0, 1.0)?;
    let u = BlochVector64::from_polar(gamma, 0.0);
    let (p_plus, p_minus) = mixture_oracle(lambda1, &v_hat, &u)?;
    let oracle_deviation = if totals.p_detect > 0.0 {
        (totals.p_o1 / totals.p_detect - p_plus)
            .abs()
            .max((totals.p_o2 / totals.p_detect - p_minus).abs())
    } else {
        0.0
    };
    let oracle_ok = oracle_deviation <= MEASURE_TOL;

    let (tally, report) = if args.run.check {
        (None, None)
    } else {
        let scenario = Scenario64::Mixed {
            lambda1,
            gamma,
            cap: cap.clone(),
            profile: profile.clone(),
        };
        let (t, r) = simulate(scenario, totals.as_outcome_vector(), &args.run)?;
        (Some(t), Some(r))
    };
    let passed = oracle_ok && report.as_ref().is_none_or(|r| r.pass);

    let params = json!({
        "lambda1": lambda1,
        "lambda2": lambda2,
        "gamma": gamma,
        "theta0": cap.theta0(),
        "density": args.sphere.density,
        "profile": args.sphere.profile,
        "n": args.run.n,
        "seed": args.run.seed,
        "workers": args.run.resolve_workers()?,
        "check": args.run.check,
    });
    let analytic = json!({
        "p_detect": totals.p_detect,
        "p_o1": totals.p_o1,
        "p_o2": totals.p_o2,
        "p_a0": totals.p_a0(),
        "boundary_angle": theta_b,
        "oracle_deviation": oracle_deviation,
    });

    let mut header = vec![
        "command",
        "lambda1",
        "gamma",
        "theta0",
        "n",
        "seed",
        "p_detect",
        "p_o1",
        "p_o2",
        "p_a0",
        "boundary_angle",
        "oracle_deviation",
    ];
    header.extend(SIM_COLUMNS);
    let mut row = vec![
        "mixed".to_string(),
        num(lambda1),
        num(gamma),
        num(cap.theta0()),
        args.run.n.to_string(),
        args.run.seed.to_string(),
        num(totals.p_detect),
        num(totals.p_o1),
        num(totals.p_o2),
        num(totals.p_a0()),
        num(theta_b),
        num(oracle_deviation),
    ];
    row.extend(sim_cells(tally.as_ref(), report.as_ref()));

    let mut text = format!(
        "mixed-state experiment: lambda1 = {}, gamma = {}\n\
         analytic: p_detect = {}, p_o1 = {}, p_o2 = {}, p_a0 = {}\n\
         oracle: density-operator deviation {:.3e} -> {}\n",
        num(lambda1),
        num(gamma),
        num(totals.p_detect),
        num(totals.p_o1),
        num(totals.p_o2),
        num(totals.p_a0()),
        oracle_deviation,
        if oracle_ok { "ok" } else { "FAIL" }
    );
    if let Some(r) = &report {
        text.push_str(&format!(
            "simulated n = {} (seed {}):\n",
            args.run.n, args.run.seed
        ));
        text.push_str(&report_text(r));
    } else {
        text.push_str("analytic check only (--check), no trials run\n");
    }
    text.push_str(&format!(
        "result: {}\n",
        if passed { "pass" } else { "FAIL" }
    ));

    Ok(Rendered {
        record: record(
            "mixed", params, analytic, tally, report, None, passed, started,
        ),
        csv: CsvTable {
            header,
            rows: vec![row],
        },
        text,
    })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepScenario {
    Machine,
    Unified,
    Mixed,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Which experiment to sweep
    #[arg(long, value_enum, default_value_t = SweepScenario::Machine)]
    pub scenario: SweepScenario,

    /// Number of grid points (>= 2), spaced evenly over [gamma-min, gamma-max]
    #[arg(long, default_value_t = 33)]
    pub points: usize,

    /// Lower end of the angle grid
    #[arg(long, default_value_t = 0.0)]
    pub gamma_min: f64,

    /// Upper end of the angle grid (default π)
    #[arg(long)]
    pub gamma_max: Option<f64>,

    /// State radius |w| (machine scenario)
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,

    /// Mixture weight (mixed scenario)
    #[arg(long, default_value_t = 0.75)]
    pub lambda1: f64,

    #[command(flatten)]
    pub sphere: SphereArgs,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn sweep(args: &SweepArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    args.run.validate()?;
    if args.points < 2 {
        return Err(CliError::config("--points must be at least 2"));
    }
    let lo = check_gamma(args.output.angle(args.gamma_min))?;
    let hi = check_gamma(args.gamma_max.map(|g| args.output.angle(g)).unwrap_or(PI))?;
    if lo >= hi {
        return Err(CliError::config(format!(
            "need gamma-min < gamma-max, got [{lo}, {hi}]"
        )));
    }

    // Scenario-specific fixtures, validated once up front.
    let (cap, profile) = match args.scenario {
        SweepScenario::Machine => (None, None),
        SweepScenario::Unified | SweepScenario::Mixed => {
            let cap = args.sphere.build_density(&args.output)?;
            let profile = args.sphere.build_profile()?;
            if args.scenario == SweepScenario::Mixed && profile.gamma_symmetry() == Some(false) {
                return Err(CliError::config(format!(
                    "profile '{}' is asymmetric under gamma -> pi - gamma; mixed sweeps \
                     need a symmetric profile",
                    args.sphere.profile
                )));
            }
            (Some(cap), Some(profile))
        }
    };
    // The conditional-on-detection law is the machine law at this radius.
    let mu_radius = match args.scenario {
        SweepScenario::Machine => {
            if !(0.0..=1.0).contains(&args.radius) {
                return Err(CliError::config(format!(
                    "--radius must lie in [0, 1], got {}",
                    args.radius
                )));
            }
            args.radius
        }
        SweepScenario::Unified => 1.0,
        SweepScenario::Mixed => {
            if !(0.0..=1.0).contains(&args.lambda1) {
                return Err(CliError::config(format!(
                    "--lambda1 must lie in [0, 1], got {}",
                    args.lambda1
                )));
            }
            2.0 * args.lambda1 - 1.0
        }
    };

    let scenario_name = match args.scenario {
        SweepScenario::Machine => "machine",
        SweepScenario::Unified => "unified",
        SweepScenario::Mixed => "mixed",
    };

    let mut rows = Vec::with_capacity(args.points);
    let mut point_records = Vec::with_capacity(args.points);
    let mut all_pass = true;
    for i in 0..args.points {
        let gamma = lo + (hi - lo) * i as f64 / (args.points - 1) as f64;
        let scenario = match args.scenario {
            SweepScenario::Machine => Scenario64::Machine {
                state: MachineState::new(BlochVector64::new(0.0, 0.0, args.radius)?),
                experiment: ElasticExperiment::new(BlochVector64::from_polar(gamma, 0.0))?,
            },
            SweepScenario::Unified => Scenario64::Unified {
                gamma,
                cap: cap.clone().expect("built above"),
                profile: profile.clone().expect("built above"),
            },
            SweepScenario::Mixed => Scenario64::Mixed {
                lambda1: args.lambda1,
                gamma,
                cap: cap.clone().expect("built above"),
                profile: profile.clone().expect("built above"),
            },
        };
        let expected = scenario.expected_probabilities()?;
        let p_detect = expected.0 + expected.1;
        let (mu1, mu2) = machine_probabilities(
            &MachineState::new(BlochVector64::new(0.0, 0.0, mu_radius)?),
            &ElasticExperiment::new(BlochVector64::from_polar(gamma, 0.0))?,
        );

        let (tally, report) = if args.run.check {
            (None, None)
        } else {
            let seed = args.run.seed.wrapping_add(i as u64);
            let cfg = SimulationConfig::new(scenario, args.run.n, seed)
                .with_workers(args.run.resolve_workers()?);
            let tally = run_simulation(&cfg)?;
            let report = compare(&tally, expected)?;
            if !report.pass {
                all_pass = false;
            }
            (Some(tally), Some(report))
        };

        let mut row = vec![num(gamma), num(mu1), num(mu2), num(p_detect)];
        row.extend(
            sim_cells(tally.as_ref(), report.as_ref())
                .into_iter()
                .skip(3),
        );
        rows.push(row);

        point_records.push(json!({
            "gamma": gamma,
            "mu1": mu1,
            "mu2": mu2,
            "p_detect": p_detect,
            "expected": [expected.0, expected.1, expected.2],
            "tally": tally,
            "report": report,
        }));
    }

    let params = json!({
        "scenario": scenario_name,
        "points": args.points,
        "gamma_min": lo,
        "gamma_max": hi,
        "radius": args.radius,
        "lambda1": args.lambda1,
        "density": args.sphere.density,
        "profile": args.sphere.profile,
        "n": args.run.n,
        "seed": args.run.seed,
        "workers": args.run.resolve_workers()?,
        "check": args.run.check,
    });
    let analytic = json!({ "mu_radius": mu_radius });

    let mut header = vec!["gamma", "mu1", "mu2", "p_detect"];
    header.extend(SIM_COLUMNS.iter().skip(3));

    let mut text = format!(
        "{scenario_name} sweep: {} points on [{}, {}], n = {} per point (seed {})\n",
        args.points,
        num(lo),
        num(hi),
        args.run.n,
        args.run.seed
    );
    for (row, pr) in rows.iter().zip(&point_records) {
        let pass_str = if args.run.check {
            "analytic".to_string()
        } else {
            pr["report"]["pass"].to_string()
        };
        text.push_str(&format!(
            "  gamma = {:<22} mu1 = {:<22} p_detect = {:<22} {}\n",
            row[0], row[1], row[3], pass_str
        ));
    }
    text.push_str(&format!(
        "result: {}\n",
        if all_pass { "pass" } else { "FAIL" }
    ));

    Ok(Rendered {
        record: record(
            "sweep",
            params,
            analytic,
            None,
            None,
            Some(point_records),
            all_pass,
            started,
        ),
        csv: CsvTable { header, rows },
        text,
    })
}

// ---------------------------------------------------------------------------
// ensemble

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    /// Model file: one microstate per line, columns
    /// "weight detection_probability possession(0/1)"
    #[arg(long)]
    pub model: PathBuf,

    #[command(flatten)]
    pub run: RunArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_model_file(text: &str) -> Result<LimitModel<f64>, CliError> {
    let mut weights = Vec::new();
    let mut detect = Vec::new();
    let mut possession = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CliError::config(format!(
                "line {}: expected 'weight detect possession', found {} fields",
                lineno + 1,
                fields.len()
            )));
        }
        let w: f64 = fields[0].parse().map_err(|_| {
            CliError::config(format!("line {}: bad weight '{}'", lineno + 1, fields[0]))
        })?;
        let d: f64 = fields[1].parse().map_err(|_| {
            CliError::config(format!(
                "line {}: bad detection probability '{}'",
                lineno + 1,
                fields[1]
            ))
        })?;
        let f = match fields[2] {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                return Err(CliError::config(format!(
                    "line {}: possession must be 0/1, got '{other}'",
                    lineno + 1
                )))
            }
        };
        weights.push(w);
        detect.push(d);
        possession.push(f);
    }
    Ok(LimitModel::new(weights, detect, possession)?)
}

pub fn ensemble(args: &EnsembleArgs) -> Result<Rendered, CliError> {
    let started = Instant::now();
    args.run.validate()?;
    let text_content = std::fs::read_to_string(&args.model).map_err(|e| {
        CliError::config(format!(
            "cannot read model file {}: {e}",
            args.model.display()
        ))
    })?;
    let model = parse_model_file(&text_content)?;

    let limits = limit_probabilities(&model);
    let product_deviation = limits
        .p_conditional
        .map(|c| (limits.p_detect * c - limits.p_total).abs());
    let product_ok = product_deviation.map_or(limits.p_total == 0.0, |d| d <= ORACLE_TOL);

    let expected = (
        limits.p_total,
        limits.p_detect - limits.p_total,
        1.0 - limits.p_detect,
    );
    let (tally, report) = if args.run.check {
        (None, None)
    } else {
        let (t, r) = simulate(
            Scenario64::Ensemble {
                model: model.clone(),
            },
            expected,
            &args.run,
        )?;
        (Some(t), Some(r))
    };
    let passed = product_ok && report.as_ref().is_none_or(|r| r.pass);

    let params = json!({
        "model": args.model.display().to_string(),
        "microstates": model.len(),
        "n": args.run.n,
        "seed": args.run.seed,
        "workers": args.run.resolve_workers()?,
        "check": args.run.check,
    });
    let analytic = json!({
        "p_detect": limits.p_detect,
        "p_total": limits.p_total,
        "p_conditional": limits.p_conditional,
        "product_deviation": product_deviation,
    });

    let mut header = vec![
        "command",
        "n",
        "seed",
        "p_detect",
        "p_total",
        "p_conditional",
        "product_deviation",
    ];
    header.extend(SIM_COLUMNS);
    let mut row = vec![
        "ensemble".to_string(),
        args.run.n.to_string(),
        args.run.seed.to_string(),
        num(limits.p_detect),
        num(limits.p_total),
        opt_num(limits.p_conditional),
        opt_num(product_deviation),
    ];
    row.extend(sim_cells(tally.as_ref(), report.as_ref()));

    let mut text = format!(
        "ensemble model: {} microstates from {}\n\
         limit probabilities: p_detect = {}, p_total = {}, p_conditional = {}\n\
         product law p_total = p_detect * p_conditional: {}\n",
        model.len(),
        args.model.display(),
        num(limits.p_detect),
        num(limits.p_total),
        limits
            .p_conditional
            .map(num)
            .unwrap_or_else(|| "undefined (nothing detected)".to_string()),
        if product_ok { "ok" } else { "FAIL" }
    );
    if let Some(r) = &report {
        text.push_str(&format!(
            "simulated n = {} (seed {}); outcome map: o1 = detected & possessing, \
             o2 = detected & not possessing, a0 = undetected\n",
            args.run.n, args.run.seed
        ));
        text.push_str(&report_text(r));
    } else {
        text.push_str("analytic check only (--check), no trials run\n");
    }
    text.push_str(&format!(
        "result: {}\n",
        if passed { "pass" } else { "FAIL" }
    ));

    Ok(Rendered {
        record: record(
            "ensemble", params, analytic, tally, report, None, passed, started,
        ),
        csv: CsvTable {
            header,
            rows: vec![row],
        },
        text,
    })
}
