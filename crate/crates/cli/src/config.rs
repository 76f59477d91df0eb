use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "quantizer",
    version,
    about = "Checks and tables for geometric quantization on CP^n"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Complex dimension of CP^n (or C^n for the Bergman propagator model).
    #[arg(long, global = true, default_value_t = 1)]
    pub n: usize,
    /// Degree of the line bundle O(l).
    #[arg(
        long,
        global = true,
        default_value_t = 1,
        allow_negative_numbers = true
    )]
    pub l: i64,
    /// Monte Carlo samples or random test points.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    /// RK4 steps around a loop (doubled once for the step check).
    #[arg(long, global = true, default_value_t = 500)]
    pub steps: usize,
    /// Number of kernel basis functions kept.
    #[arg(long, global = true, default_value_t = 80)]
    pub truncation: usize,
    #[arg(long, global = true, env = "QUANTIZER_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Quadrature resolution per direction.
    #[arg(long, global = true, default_value_t = 200)]
    pub resolution: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run Monte Carlo work on one thread.
    #[arg(long, global = true)]
    pub serial: bool,
    /// Overrides the check tolerance; used to exercise failure reporting.
    #[arg(long, global = true, hide = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inject_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Disc,
    Cn,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Chart round trips, coordinate cocycles and Jacobian chain rule.
    AtlasCheck,
    /// Table of dim H^0(CP^n, O(l)) for 1..=n and -1..=l.
    Dim,
    /// Chern number of O(l) on a projective line and the F/ω constant.
    Chern,
    /// Linear and projective oscillator spectra.
    Spectrum,
    /// Holonomy of T(CP^n) ⊕ O(l) around a loop.
    Holonomy {
        /// Loop file (JSON list of segments); defaults to the latitude
        /// |z| = 1 in chart 1.
        #[arg(long = "loop")]
        loop_file: Option<PathBuf>,
    },
    /// Kernel, metric and pullback checks over a grid of points.
    Bergman {
        #[arg(long, value_enum, default_value_t = Model::Disc)]
        model: Model,
        /// Radial rings in the grid (8 angles each, radii up to 0.8).
        #[arg(long, default_value_t = 5)]
        grid: usize,
    },
    /// Monte Carlo volume of CP^n under the normalized form.
    Volume,
    /// Transition cocycles of T(CP^n) ⊕ O(l) and a nonflatness certificate.
    QhCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::AtlasCheck => "atlas-check",
            Command::Dim => "dim",
            Command::Chern => "chern",
            Command::Spectrum => "spectrum",
            Command::Holonomy { .. } => "holonomy",
            Command::Bergman { .. } => "bergman",
            Command::Volume => "volume",
            Command::QhCheck => "qh-check",
        }
    }
}

/// The effective configuration echoed into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        let c = &self.common;
        if c.n == 0 {
            return Err("--n must be at least 1".into());
        }
        if c.samples == 0 {
            return Err("--samples must be positive".into());
        }
        if c.steps < 100 {
            return Err("--steps must be at least 100".into());
        }
        if c.truncation < 2 {
            return Err("--truncation must be at least 2".into());
        }
        if c.resolution < 2 {
            return Err("--resolution must be at least 2".into());
        }
        if let Some(t) = c.inject_tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err("tolerance must be a non-negative number".into());
            }
        }
        Ok(())
    }
}
