//! Shared flag groups and the little string syntaxes for densities,
//! profiles, and vectors.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use spinsim_core::tables::{parse_density_table, parse_profile_table, DensityTable, ProfileTable};
use spinsim_core::{BlochVector64, CapDensity64, DetectionProfile64};

use crate::CliError;

pub const WORKERS_ENV: &str = "SPINSIM_WORKERS";

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Number of trials to simulate
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,

    /// Master seed; every trial draws from a stream derived from (seed, trial index)
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Worker threads (0 = runtime default); overrides SPINSIM_WORKERS
    #[arg(long)]
    pub workers: Option<usize>,

    /// Analytic mode: compute and verify closed forms, skip all sampling
    #[arg(long)]
    pub check: bool,
}

impl RunArgs {
    pub fn resolve_workers(&self) -> Result<usize, CliError> {
        if let Some(w) = self.workers {
            return Ok(w);
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v.parse::<usize>().map_err(|_| {
                CliError::config(format!("{WORKERS_ENV} must be an integer, got '{v}'"))
            }),
            Err(_) => Ok(0),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::config("--n must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable summary
    Text,
    /// One JSON object containing the full run record
    Json,
    /// Fixed-column CSV (a subset of the JSON content)
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the payload to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Interpret angle inputs as degrees; output is always radians
    #[arg(long)]
    pub degrees: bool,
}

impl OutputArgs {
    /// Convert an input angle to radians per the --degrees toggle.
    pub fn angle(&self, value: f64) -> f64 {
        if self.degrees {
            value.to_radians()
        } else {
            value
        }
    }
}

/// Flags shared by the detection-sphere commands.
#[derive(Args, Debug, Clone)]
pub struct SphereArgs {
    /// Cap limit angle θ₀ for the uniform density (default π/2)
    #[arg(long)]
    pub theta0: Option<f64>,

    /// Hidden-state density: "uniform" or "file:PATH" (two columns: θ f)
    #[arg(long, default_value = "uniform")]
    pub density: String,

    /// Rescale a tabulated density to unit cap measure instead of rejecting it
    #[arg(long)]
    pub normalize_density: bool,

    /// Detection profile: "unit", "const:C", "cosine", or "file:PATH"
    /// (three columns: γ θ p)
    #[arg(long, default_value = "unit")]
    pub profile: String,
}

impl SphereArgs {
    pub fn build_density(&self, output: &OutputArgs) -> Result<CapDensity64, CliError> {
        if let Some(path) = self.density.strip_prefix("file:") {
            if self.theta0.is_some() {
                return Err(CliError::config(
                    "--theta0 only applies to the uniform density; a tabulated density takes \
                     its cap limit from the first abscissa",
                ));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read density file {path}: {e}")))?;
            let points = parse_density_table::<f64>(&text)?;
            let table = if self.normalize_density {
                DensityTable::new_normalized(points)?
            } else {
                DensityTable::new(points)?
            };
            return Ok(CapDensity64::tabulated(table)?);
        }
        if self.density != "uniform" {
            return Err(CliError::config(format!(
                "unknown density '{}': expected 'uniform' or 'file:PATH'",
                self.density
            )));
        }
        let theta0 = output.angle(self.theta0.unwrap_or(std::f64::consts::FRAC_PI_2));
        Ok(CapDensity64::uniform(theta0)?)
    }

    pub fn build_profile(&self) -> Result<DetectionProfile64, CliError> {
        if let Some(path) = self.profile.strip_prefix("file:") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read profile file {path}: {e}")))?;
            let (gammas, thetas, values) = parse_profile_table::<f64>(&text)?;
            return Ok(DetectionProfile64::tabulated(ProfileTable::new(
                gammas, thetas, values,
            )?));
        }
        if let Some(c) = self.profile.strip_prefix("const:") {
            let c: f64 = c.parse().map_err(|_| {
                CliError::config(format!("const profile needs a number, got '{c}'"))
            })?;
            return Ok(DetectionProfile64::constant(c)?);
        }
        match self.profile.as_str() {
            "unit" => Ok(DetectionProfile64::unit()),
            "cosine" => Ok(DetectionProfile64::cosine()),
            other => Err(CliError::config(format!(
                "unknown profile '{other}': expected 'unit', 'const:C', 'cosine', or 'file:PATH'"
            ))),
        }
    }
}

/// Parse "x,y,z" into a Bloch vector.
pub fn parse_vec3(s: &str) -> Result<BlochVector64, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!("expected 'x,y,z', got '{s}'")));
    }
    let mut xyz = [0.0f64; 3];
    for (slot, part) in xyz.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("'{part}' is not a number in '{s}'")))?;
    }
    Ok(BlochVector64::new(xyz[0], xyz[1], xyz[2])?)
}

/// Validate a measurement angle in radians.
pub fn check_gamma(gamma: f64) -> Result<f64, CliError> {
    if !(0.0..=std::f64::consts::PI).contains(&gamma) {
        return Err(CliError::config(format!(
            "gamma must lie in [0, π] radians, got {gamma}"
        )));
    }
    Ok(gamma)
}
