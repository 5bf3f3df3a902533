//! Run configuration: a flat JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use varireg::Regime;

use crate::failure::{CliResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeArg {
    Complete,
    Discrete,
    Noisy,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Complete => Regime::Complete,
            RegimeArg::Discrete => Regime::Discrete,
            RegimeArg::Noisy => Regime::Noisy,
        }
    }
}

/// Every option of every subcommand. Keys of the JSON config file are the
/// flag names with `-` replaced by `_`.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Input CSV (wide `t,<curve>…` or long `curve_id,t,value`).
    #[arg(long, help_heading = "Files")]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, help_heading = "Files")]
    pub out: Option<PathBuf>,
    /// Directory written by `register`.
    #[arg(long, help_heading = "Files")]
    pub result: Option<PathBuf>,
    /// Directory written by `simulate`.
    #[arg(long, help_heading = "Files")]
    pub truth: Option<PathBuf>,

    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to `VARIREG_THREADS`.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Number of principal components to report.
    #[arg(long)]
    pub eigen: Option<usize>,

    #[arg(long, value_enum, help_heading = "Registration")]
    pub regime: Option<RegimeArg>,
    /// Reconstruction bandwidth of the discrete regime.
    #[arg(long, help_heading = "Registration")]
    pub bandwidth: Option<f64>,
    /// Derivative bandwidth of the noisy regime.
    #[arg(long, help_heading = "Registration")]
    pub h1: Option<f64>,
    /// Curve bandwidth of the noisy regime.
    #[arg(long, help_heading = "Registration")]
    pub h2: Option<f64>,
    /// Cross-validate bandwidths that are not given.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", help_heading = "Registration")]
    pub auto_bandwidth: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", help_heading = "Registration")]
    pub smooth_warps: Option<bool>,
    /// Knots of the monotone warp smoother.
    #[arg(long, help_heading = "Registration")]
    pub knots: Option<usize>,
    /// Size of an equispaced output grid.
    #[arg(long, help_heading = "Registration")]
    pub output_grid_size: Option<usize>,

    /// model1, model2, rank2, rank3 or breakdown; breakdown parameters may
    /// follow inline, e.g. "breakdown c=2 r_scale=0.01 rank=3".
    #[arg(long, help_heading = "Simulation")]
    pub model: Option<String>,
    #[arg(long, help_heading = "Simulation")]
    pub c: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub r_scale: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub rank: Option<usize>,
    /// Number of curves.
    #[arg(long, help_heading = "Simulation")]
    pub n: Option<usize>,
    /// Grid size.
    #[arg(long, help_heading = "Simulation")]
    pub r: Option<usize>,
    /// Half-width of the uniform measurement error.
    #[arg(long, help_heading = "Simulation")]
    pub noise: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub warp_components: Option<usize>,
    #[arg(long, help_heading = "Simulation")]
    pub beta: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub lambda: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true", help_heading = "Simulation")]
    pub identity_warps: Option<bool>,

    /// Sample sizes of the rate check, comma separated.
    #[arg(long, value_delimiter = ',', help_heading = "Diagnostics")]
    pub rate_ns: Option<Vec<usize>>,
    #[arg(long, help_heading = "Diagnostics")]
    pub rate_reps: Option<usize>,
}

macro_rules! overlay {
    ($flags:ident, $file:ident; $($field:ident),* $(,)?) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field; } )*
    };
}

impl RunConfig {
    /// Fills every option not given on the command line from `file`.
    pub fn overlay(mut self, file: RunConfig) -> RunConfig {
        overlay!(self, file;
            input, out, result, truth, seed, threads, eigen, regime, bandwidth, h1, h2,
            auto_bandwidth, smooth_warps, knots, output_grid_size, model, c, r_scale, rank,
            n, r, noise, warp_components, beta, lambda, identity_warps, rate_ns, rate_reps,
        );
        self
    }

    pub fn load(path: &Path) -> CliResult<RunConfig> {
        crate::io::read_json(path)
    }

    pub fn out_dir(&self) -> CliResult<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Failure::parse("--out is required"))
    }

    /// Worker threads from the flag, the config file or `VARIREG_THREADS`.
    pub fn thread_count(&self) -> CliResult<Option<usize>> {
        let n = match self.threads {
            Some(n) => Some(n),
            None => match std::env::var("VARIREG_THREADS") {
                Ok(s) if !s.trim().is_empty() => Some(s.trim().parse().map_err(|_| {
                    Failure::parse(format!(
                        "VARIREG_THREADS must be a positive integer, got '{s}'"
                    ))
                })?),
                _ => None,
            },
        };
        if n == Some(0) {
            return Err(Failure::parse("thread count must be positive"));
        }
        Ok(n)
    }
}
