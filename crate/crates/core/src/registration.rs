//! Registration pipelines built on local variation distributions.
//!
//! Every pipeline follows the same shape: turn each curve into a local
//! variation distribution, average the corresponding quantile functions to
//! obtain a template, read each warp off as `F̃_i⁻ ∘ F̂`, and finally evaluate
//! a reconstruction of each curve along its estimated warp.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{sorted_sum, thin_grid, union_grid, DiscreteCurve};
use crate::error::{Error, Result};
use crate::smoothing::{
    default_bandwidth_candidates, local_poly, loocv_bandwidth_pooled, monotone_smooth_warp,
    nadaraya_watson, SmootherConfig,
};
use crate::variation::{
    compose_quantile_cdf, discrete_variation_cdf, generalized_inverse, mean_quantile,
    quantile_to_cdf, QuantileFn, StepCdf, ZERO_VARIATION_RTOL,
};
use crate::warp::{boundary_extend, WarpMap};

/// Default cap on the size of the output grid.
pub const MAX_OUTPUT_GRID: usize = 1024;

/// Default knot count when warps are smoothed.
pub const DEFAULT_KNOTS: usize = 11;

/// Default resolution of the derivative grid in the noisy pipeline.
pub const DEFAULT_DERIV_GRID: usize = 512;

/// Number of log-spaced candidates used for cross-validated bandwidths.
pub const BANDWIDTH_CANDIDATES: usize = 12;

/// Observation regime a result was produced under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Complete,
    Discrete,
    Noisy,
}

/// Template and warps estimated from a sample of local variation
/// distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpEstimate {
    /// `F̂`, the inverse of the mean quantile.
    pub template_cdf: StepCdf,
    /// `F̂*`, the mean of the individual quantile functions.
    pub template_quantile: QuantileFn,
    pub warps: Vec<WarpMap>,
    pub inverse_warps: Vec<WarpMap>,
    /// Set when the grid stops short of 1 and the inverse warps had the knot
    /// `(1, 1)` appended.
    pub inverse_endpoint_patched: bool,
}

/// Estimate the template and all warps from per-curve variation cdfs,
/// sampling the warps on `grid`.
pub fn estimate_warps_discrete(cdfs: &[StepCdf], grid: &[f64]) -> Result<WarpEstimate> {
    if cdfs.is_empty() {
        return Err(Error::EmptySample);
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation grid".into()));
    }
    let quantiles: Vec<QuantileFn> = cdfs.par_iter().map(generalized_inverse).collect();
    let template_quantile = mean_quantile(&quantiles, grid)?;
    let template_cdf = quantile_to_cdf(&template_quantile);
    let t_last = *grid.last().unwrap();

    let pairs: Result<Vec<(WarpMap, WarpMap)>> = quantiles
        .par_iter()
        .zip(cdfs.par_iter())
        .map(|(q, f)| {
            let forward = compose_quantile_cdf(q, &template_cdf, grid);
            let backward = compose_quantile_cdf(&template_quantile, f, grid);
            Ok((
                boundary_extend(grid, &forward, t_last)?,
                boundary_extend(grid, &backward, t_last)?,
            ))
        })
        .collect();
    let (warps, inverse_warps) = pairs?.into_iter().unzip();
    Ok(WarpEstimate {
        template_cdf,
        template_quantile,
        warps,
        inverse_warps,
        inverse_endpoint_patched: t_last < 1.0,
    })
}

/// Pairwise-registration form of the warp estimator for curve `i`:
/// `(n⁻¹ Σ_j F̃_j⁻ ∘ F̃_i)⁻`, sampled on `grid`.
///
/// This deliberately avoids the quantile machinery used by
/// [`estimate_warps_discrete`] so it can serve as an independent check.
pub fn pairwise_warp_oracle(cdfs: &[StepCdf], i: usize, grid: &[f64]) -> Result<WarpMap> {
    if cdfs.is_empty() {
        return Err(Error::EmptySample);
    }
    let target = cdfs
        .get(i)
        .ok_or_else(|| Error::InvalidArgument(format!("curve index {i} out of range")))?;
    let inverse_at = |g: &StepCdf, u: f64| -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let k = g.cum_values().partition_point(|&c| c < u);
        g.jump_locations()[k.min(g.jump_locations().len() - 1)]
    };
    let n = cdfs.len() as f64;
    // Average of the pairwise maps at each jump of F̃_i; it is constant
    // between jumps and zero before the first one.
    let averaged: Vec<f64> = target
        .cum_values()
        .iter()
        .map(|&c| {
            let mut vals: Vec<f64> = cdfs.iter().map(|g| inverse_at(g, c)).collect();
            sorted_sum(&mut vals) / n
        })
        .collect();
    let locs = target.jump_locations();
    let samples: Vec<f64> = grid
        .iter()
        .map(|&s| {
            if s <= 0.0 {
                return 0.0;
            }
            let k = averaged.partition_point(|&a| a < s);
            if k < locs.len() {
                locs[k]
            } else {
                1.0
            }
        })
        .collect();
    boundary_extend(grid, &samples, *grid.last().unwrap())
}

/// Options for the noiseless discrete pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteOptions {
    /// Nadaraya–Watson bandwidth; defaults to `1.1 × ` the largest grid gap.
    pub bandwidth: Option<f64>,
    /// Smooth the raw warps with a monotone cubic before registering.
    pub smooth_warps: bool,
    pub n_knots: usize,
    /// Output grid; defaults to the union of the observed grids.
    pub output_grid: Option<Vec<f64>>,
}

impl Default for DiscreteOptions {
    fn default() -> Self {
        Self {
            bandwidth: None,
            smooth_warps: false,
            n_knots: DEFAULT_KNOTS,
            output_grid: None,
        }
    }
}

/// Options for the pipeline with measurement error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyOptions {
    /// Bandwidth of the local quadratic derivative fit.
    pub h1: Option<f64>,
    /// Bandwidth of the local linear curve fit.
    pub h2: Option<f64>,
    /// Choose missing bandwidths by leave-one-out cross-validation.
    pub auto: bool,
    pub deriv_grid_size: usize,
    pub output_grid: Option<Vec<f64>>,
}

impl Default for NoisyOptions {
    fn default() -> Self {
        Self {
            h1: None,
            h2: None,
            auto: true,
            deriv_grid_size: DEFAULT_DERIV_GRID,
            output_grid: None,
        }
    }
}

/// Bookkeeping recorded alongside a registration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegistrationMetadata {
    pub grid_sizes: Vec<usize>,
    pub bandwidth: Option<f64>,
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub smoothed_warps: bool,
    pub n_knots: Option<usize>,
    pub inverse_endpoint_patched: bool,
    /// Curves whose smoothed range is below twice the estimated noise level.
    pub low_signal_curves: Vec<usize>,
}

/// Output of one registration run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    pub regime: Regime,
    pub output_grid: Vec<f64>,
    pub warps: Vec<WarpMap>,
    pub inverse_warps: Vec<WarpMap>,
    pub template_cdf: StepCdf,
    pub template_quantile: QuantileFn,
    pub registered: Vec<DiscreteCurve>,
    pub mean: DiscreteCurve,
    pub metadata: RegistrationMetadata,
}

impl RegistrationResult {
    pub fn len(&self) -> usize {
        self.warps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.warps.is_empty()
    }
}

/// Union of the observed grids, thinned to at most [`MAX_OUTPUT_GRID`]
/// points.
pub fn default_output_grid(sample: &[DiscreteCurve]) -> Vec<f64> {
    thin_grid(
        &union_grid(sample.iter().map(DiscreteCurve::grid)),
        MAX_OUTPUT_GRID,
    )
}

fn resolve_output_grid(sample: &[DiscreteCurve], requested: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    let grid = match requested {
        Some(g) => g.clone(),
        None => default_output_grid(sample),
    };
    if grid.len() < DiscreteCurve::MIN_POINTS
        || grid.iter().any(|t| !(0.0..=1.0).contains(t))
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument(
            "output grid must have at least 3 strictly increasing points in [0, 1]".into(),
        ));
    }
    Ok(grid)
}

fn variation_cdfs(sample: &[DiscreteCurve]) -> Result<Vec<StepCdf>> {
    sample
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            discrete_variation_cdf(c)
                .map(|s| s.cdf)
                .map_err(|e| e.for_curve(i))
        })
        .collect()
}

fn pointwise_mean(grid: &[f64], curves: &[DiscreteCurve]) -> Result<DiscreteCurve> {
    let n = curves.len() as f64;
    let mut buf = Vec::with_capacity(curves.len());
    let values = (0..grid.len())
        .map(|k| {
            buf.clear();
            buf.extend(curves.iter().map(|c| c.values()[k]));
            sorted_sum(&mut buf) / n
        })
        .collect();
    DiscreteCurve::new(grid.to_vec(), values)
}

/// Evaluate each curve's reconstruction along its warp on the output grid.
fn register_along<F>(grid: &[f64], warps: &[WarpMap], reconstruct: F) -> Result<Vec<DiscreteCurve>>
where
    F: Fn(usize, &[f64]) -> Result<Vec<f64>> + Sync,
{
    warps
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let pts = w.eval_many(grid);
            let vals = reconstruct(i, &pts).map_err(|e| e.for_curve(i))?;
            DiscreteCurve::new(grid.to_vec(), vals)
        })
        .collect()
}

/// Noiseless discrete registration: raw warps from the observed grids,
/// Nadaraya–Watson reconstruction of each curve.
pub fn register_discrete(
    sample: &[DiscreteCurve],
    options: &DiscreteOptions,
) -> Result<RegistrationResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let grid = resolve_output_grid(sample, &options.output_grid)?;
    let bandwidth = match options.bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
        None => {
            1.1 * sample
                .iter()
                .map(DiscreteCurve::max_gap)
                .fold(0.0, f64::max)
        }
    };
    let cdfs = variation_cdfs(sample)?;
    let est = estimate_warps_discrete(&cdfs, &grid)?;
    let warps: Vec<WarpMap> = if options.smooth_warps {
        est.warps
            .iter()
            .map(|w| monotone_smooth_warp(w, options.n_knots))
            .collect()
    } else {
        est.warps
    };
    let registered = register_along(&grid, &warps, |i, pts| {
        nadaraya_watson(&sample[i], bandwidth, pts)
    })?;
    let mean = pointwise_mean(&grid, &registered)?;
    Ok(RegistrationResult {
        regime: Regime::Discrete,
        output_grid: grid,
        warps,
        inverse_warps: est.inverse_warps,
        template_cdf: est.template_cdf,
        template_quantile: est.template_quantile,
        registered,
        mean,
        metadata: RegistrationMetadata {
            grid_sizes: sample.iter().map(DiscreteCurve::len).collect(),
            bandwidth: Some(bandwidth),
            smoothed_warps: options.smooth_warps,
            n_knots: options.smooth_warps.then_some(options.n_knots),
            inverse_endpoint_patched: est.inverse_endpoint_patched,
            ..Default::default()
        },
    })
}

/// Registration of densely observed curves, treated as the fine-grid limit
/// of the discrete pipeline. Curves are read between grid points by linear
/// interpolation and warps are never smoothed.
pub fn register_complete(
    sample: &[DiscreteCurve],
    output_grid: Option<Vec<f64>>,
) -> Result<RegistrationResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let grid = resolve_output_grid(sample, &output_grid)?;
    let cdfs = variation_cdfs(sample)?;
    let est = estimate_warps_discrete(&cdfs, &grid)?;
    let registered = register_along(&grid, &est.warps, |i, pts| {
        Ok(pts.iter().map(|&t| sample[i].interpolate(t)).collect())
    })?;
    let mean = pointwise_mean(&grid, &registered)?;
    Ok(RegistrationResult {
        regime: Regime::Complete,
        output_grid: grid,
        warps: est.warps,
        inverse_warps: est.inverse_warps,
        template_cdf: est.template_cdf,
        template_quantile: est.template_quantile,
        registered,
        mean,
        metadata: RegistrationMetadata {
            grid_sizes: sample.iter().map(DiscreteCurve::len).collect(),
            inverse_endpoint_patched: est.inverse_endpoint_patched,
            ..Default::default()
        },
    })
}

/// Difference-based noise level estimate, `σ̂² = Σ (Δv)² / (2 (r - 1))`.
fn rice_noise_sd(curve: &DiscreteCurve) -> f64 {
    let v = curve.values();
    let ss: f64 = v.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    (ss / (2.0 * (v.len() - 1) as f64)).sqrt()
}

/// Local variation distribution of a smoothed derivative: trapezoid
/// accumulation of `|X̂'|` over the derivative grid.
fn derivative_variation_cdf(curve: &DiscreteCurve, h1: f64, deriv_grid: &[f64]) -> Result<StepCdf> {
    let cfg = SmootherConfig::new(h1, 2, 1)?;
    let deriv = local_poly(curve, &cfg, deriv_grid)?;
    let masses: Vec<f64> = deriv_grid
        .windows(2)
        .zip(deriv.windows(2))
        .map(|(u, d)| 0.5 * (u[1] - u[0]) * (d[0].abs() + d[1].abs()))
        .collect();
    let total: f64 = masses.iter().sum();
    let scale = curve.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(total > ZERO_VARIATION_RTOL * scale) {
        return Err(Error::ZeroVariation { curve: None });
    }
    StepCdf::from_masses(deriv_grid[1..].to_vec(), &masses)
}

/// Registration under measurement error: local quadratic derivative
/// estimates drive the warps, local linear fits reconstruct the curves.
pub fn register_noisy(sample: &[DiscreteCurve], opts: &NoisyOptions) -> Result<RegistrationResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if opts.deriv_grid_size < 3 {
        return Err(Error::InvalidArgument(
            "derivative grid needs at least 3 points".into(),
        ));
    }
    let grid = resolve_output_grid(sample, &opts.output_grid)?;
    let max_gap = sample
        .iter()
        .map(DiscreteCurve::max_gap)
        .fold(0.0, f64::max);
    let candidates = default_bandwidth_candidates(max_gap, BANDWIDTH_CANDIDATES);
    let pick = |given: Option<f64>, degree: usize, name: &str| -> Result<f64> {
        match given {
            Some(h) if h > 0.0 => Ok(h),
            Some(h) => Err(Error::InvalidArgument(format!(
                "{name} must be positive, got {h}"
            ))),
            None if opts.auto => loocv_bandwidth_pooled(sample, degree, &candidates),
            None => Err(Error::InvalidArgument(format!(
                "{name} is required when auto bandwidths are off"
            ))),
        }
    };
    let h1 = pick(opts.h1, 2, "h1")?;
    let h2 = pick(opts.h2, 1, "h2")?;

    let deriv_grid = crate::curve::uniform_grid(opts.deriv_grid_size);
    let cdfs: Vec<StepCdf> = sample
        .par_iter()
        .enumerate()
        .map(|(i, c)| derivative_variation_cdf(c, h1, &deriv_grid).map_err(|e| e.for_curve(i)))
        .collect::<Result<_>>()?;
    let est = estimate_warps_discrete(&cdfs, &grid)?;

    let fit = SmootherConfig::new(h2, 1, 0)?;
    let registered = register_along(&grid, &est.warps, |i, pts| {
        local_poly(&sample[i], &fit, pts)
    })?;
    let mean = pointwise_mean(&grid, &registered)?;

    let low_signal_curves = sample
        .par_iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let smooth = local_poly(c, &fit, c.grid()).ok()?;
            let (lo, hi) = smooth
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                });
            (hi - lo < 2.0 * rice_noise_sd(c)).then_some(i)
        })
        .collect();

    Ok(RegistrationResult {
        regime: Regime::Noisy,
        output_grid: grid,
        warps: est.warps,
        inverse_warps: est.inverse_warps,
        template_cdf: est.template_cdf,
        template_quantile: est.template_quantile,
        registered,
        mean,
        metadata: RegistrationMetadata {
            grid_sizes: sample.iter().map(DiscreteCurve::len).collect(),
            h1: Some(h1),
            h2: Some(h2),
            inverse_endpoint_patched: est.inverse_endpoint_patched,
            low_signal_curves,
            ..Default::default()
        },
    })
}
