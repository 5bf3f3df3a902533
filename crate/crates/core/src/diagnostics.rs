//! Misspecification statistics, error metrics against known truth, and a
//! Monte Carlo check of the template convergence rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{interp_linear, sorted_sum, trapezoid, DiscreteCurve};
use crate::error::{Error, Result};
use crate::fpca;
use crate::registration::RegistrationResult;
use crate::simulate::{
    make_truth_bundle, AnalyticWarp, LatentModelConfig, TruthBundle, WarpLawConfig,
};
use crate::variation::{
    discrete_variation_cdf, generalized_inverse, mean_quantile, wasserstein2_sq, StepCdf,
};

/// Which form of the statistic to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanMode {
    /// Use the zero-mean-derivative form only when `∫|μ̂'|` is negligible.
    Auto,
    ForceZeroDeriv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZBranch {
    /// `2∫|X_i' − μ̂'| / ∫|X_i'|`.
    MeanDerivative,
    /// `2∫|s₂φ̂₂'| / ∫|s₁φ̂₁' + s₂φ̂₂'|` with the top two sample components.
    ZeroMeanDerivative,
}

/// Per-curve misspecification statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZStatistics {
    /// Values clamped to `[0, 2]`.
    pub values: Vec<f64>,
    pub branch: ZBranch,
    /// Curves whose raw value exceeded `2 + 1e-9` before clamping.
    pub exceeded: Vec<usize>,
    /// Always set: the statistic is a sample plug-in for a population
    /// quantity.
    pub plug_in: bool,
}

/// Central differences inside, one-sided at the ends.
pub fn finite_difference(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|j| {
            let (a, b) = if j == 0 {
                (0, 1)
            } else if j == n - 1 {
                (n - 2, n - 1)
            } else {
                (j - 1, j + 1)
            };
            (values[b] - values[a]) / (grid[b] - grid[a])
        })
        .collect()
}

fn abs_integral(grid: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.map(f64::abs).collect();
    trapezoid(grid, &v)
}

/// Computes the misspecification statistic of every curve in a sample on a
/// common grid.
pub fn z_statistic(curves: &[DiscreteCurve], mode: MeanMode) -> Result<ZStatistics> {
    let mean = fpca::cross_sectional_mean(curves)?;
    let grid = mean.grid();
    let derivs: Vec<Vec<f64>> = curves
        .iter()
        .map(|c| finite_difference(grid, c.values()))
        .collect();
    let mean_deriv = finite_difference(grid, mean.values());
    let totals: Vec<f64> = derivs
        .iter()
        .map(|d| abs_integral(grid, d.iter().copied()))
        .collect();
    for (i, (tot, c)) in totals.iter().zip(curves).enumerate() {
        let scale = c.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !(*tot > crate::variation::ZERO_VARIATION_RTOL * scale) {
            return Err(Error::ZeroVariation { curve: Some(i) });
        }
    }
    let mean_total = abs_integral(grid, mean_deriv.iter().copied());
    let biggest = totals.iter().copied().fold(0.0, f64::max);
    let zero_branch = mode == MeanMode::ForceZeroDeriv || mean_total < 1e-8 * biggest;

    let (raw, branch) = if !zero_branch {
        let raw = derivs
            .iter()
            .zip(&totals)
            .map(|(d, tot)| {
                2.0 * abs_integral(grid, d.iter().zip(&mean_deriv).map(|(a, b)| a - b)) / tot
            })
            .collect::<Vec<_>>();
        (raw, ZBranch::MeanDerivative)
    } else {
        if curves.len() < 2 {
            return Err(Error::InvalidArgument(
                "the zero-mean-derivative form needs at least 2 curves".into(),
            ));
        }
        let centered: Vec<DiscreteCurve> = curves
            .iter()
            .map(|c| {
                let v = c
                    .values()
                    .iter()
                    .zip(mean.values())
                    .map(|(a, b)| a - b)
                    .collect();
                DiscreteCurve::new(grid.to_vec(), v)
            })
            .collect::<Result<_>>()?;
        let k = fpca::covariance_matrix(curves)?;
        let dec = fpca::leading_eigenpairs(&k, grid, 2)?;
        let phi1 = &dec.eigenfunctions[0];
        let phi2 = dec
            .eigenfunctions
            .get(1)
            .cloned()
            .unwrap_or_else(|| vec![0.0; grid.len()]);
        let s1 = fpca::scores(&centered, phi1, grid)?;
        let s2 = fpca::scores(&centered, &phi2, grid)?;
        let d1 = finite_difference(grid, phi1);
        let d2 = finite_difference(grid, &phi2);
        let raw = (0..curves.len())
            .map(|i| {
                let num = 2.0 * abs_integral(grid, d2.iter().map(|d| s2[i] * d));
                let den =
                    abs_integral(grid, d1.iter().zip(&d2).map(|(a, b)| s1[i] * a + s2[i] * b));
                if den > 0.0 {
                    Ok(num / den)
                } else {
                    Err(Error::ZeroVariation { curve: Some(i) })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        (raw, ZBranch::ZeroMeanDerivative)
    };
    let exceeded = raw
        .iter()
        .enumerate()
        .filter(|(_, z)| **z > 2.0 + 1e-9)
        .map(|(i, _)| i)
        .collect();
    Ok(ZStatistics {
        values: raw.iter().map(|z| z.clamp(0.0, 2.0)).collect(),
        branch,
        exceeded,
        plug_in: true,
    })
}

/// Known truth for a sample, sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub grid: Vec<f64>,
    /// `T_i` sampled on `grid`.
    pub warps: Vec<Vec<f64>>,
    /// `X_i` sampled on `grid`.
    pub latent: Vec<Vec<f64>>,
    /// The observed (warped) sample, if available.
    pub observed: Option<Vec<DiscreteCurve>>,
    pub f_phi: Option<StepCdf>,
}

impl GroundTruth {
    /// Samples a simulated bundle's truth on `grid`.
    pub fn from_bundle(bundle: &TruthBundle, grid: &[f64]) -> Self {
        Self {
            grid: grid.to_vec(),
            warps: bundle
                .warps
                .iter()
                .map(|w| grid.iter().map(|&t| w.eval(t)).collect())
                .collect(),
            latent: bundle
                .latent
                .iter()
                .map(|l| grid.iter().map(|&t| l.eval(t)).collect())
                .collect(),
            observed: Some(bundle.observed.clone()),
            f_phi: bundle.f_phi.clone(),
        }
    }
}

/// Quality metrics of one registration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    /// Squared 2-Wasserstein distance between the estimated template and
    /// `F_φ`.
    pub dw2_template_to_target: Option<f64>,
    pub warp_sup_errors: Option<Vec<f64>>,
    /// `‖X̂_i − X_i‖₂ / ‖X_i‖₂`.
    pub curve_rel_l2_errors: Option<Vec<f64>>,
    pub explained_ratios: Vec<f64>,
    pub z_stats: Option<ZStatistics>,
    /// Sup distance between the registered mean and the latent sample mean.
    pub mean_sup_error: Option<f64>,
    pub mean_l2_error: Option<f64>,
    /// The same distances for the cross-sectional mean of the warped sample.
    pub warped_mean_sup_error: Option<f64>,
    pub warped_mean_l2_error: Option<f64>,
    pub rate_check: Option<RateCheck>,
}

fn l2_norm(grid: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let sq: Vec<f64> = values.map(|v| v * v).collect();
    trapezoid(grid, &sq).sqrt()
}

fn sup_norm(values: impl Iterator<Item = f64>) -> f64 {
    values.map(f64::abs).fold(0.0, f64::max)
}

/// Median of a nonempty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Compares a registration with known truth. Truth is resampled onto the
/// result's output grid by linear interpolation.
pub fn evaluate_against_truth(
    result: &RegistrationResult,
    truth: &GroundTruth,
) -> Result<RegistrationReport> {
    let n = result.len();
    if truth.warps.len() != n || truth.latent.len() != n {
        return Err(Error::GridMismatch);
    }
    if truth
        .warps
        .iter()
        .chain(&truth.latent)
        .any(|v| v.len() != truth.grid.len())
    {
        return Err(Error::GridMismatch);
    }
    let grid = &result.output_grid;
    let resample = |v: &[f64]| -> Vec<f64> {
        grid.iter()
            .map(|&t| interp_linear(&truth.grid, v, t))
            .collect()
    };
    let latent: Vec<Vec<f64>> = truth.latent.iter().map(|v| resample(v)).collect();

    let warp_sup_errors = result
        .warps
        .iter()
        .zip(&truth.warps)
        .map(|(w, tv)| {
            let tv = resample(tv);
            sup_norm(grid.iter().zip(&tv).map(|(&t, v)| w.eval(t) - v))
        })
        .collect();
    let curve_rel_l2_errors = result
        .registered
        .iter()
        .zip(&latent)
        .map(|(r, x)| {
            let num = l2_norm(grid, r.values().iter().zip(x).map(|(a, b)| a - b));
            let den = l2_norm(grid, x.iter().copied());
            if den > 0.0 {
                num / den
            } else {
                num
            }
        })
        .collect();
    let true_mean: Vec<f64> = (0..grid.len())
        .map(|k| latent.iter().map(|x| x[k]).sum::<f64>() / n as f64)
        .collect();
    let diff = |m: &[f64]| -> Vec<f64> { m.iter().zip(&true_mean).map(|(a, b)| a - b).collect() };
    let reg_diff = diff(result.mean.values());
    let (warped_mean_sup_error, warped_mean_l2_error) = match &truth.observed {
        Some(obs) if obs.len() == n => {
            let wm: Vec<f64> = (0..grid.len())
                .map(|k| obs.iter().map(|c| c.interpolate(grid[k])).sum::<f64>() / n as f64)
                .collect();
            let d = diff(&wm);
            (
                Some(sup_norm(d.iter().copied())),
                Some(l2_norm(grid, d.into_iter())),
            )
        }
        _ => (None, None),
    };
    let explained_ratios = match fpca::analyze(&result.registered, 1) {
        Ok(s) => s.decomposition.explained_ratios,
        Err(_) => Vec::new(),
    };
    Ok(RegistrationReport {
        dw2_template_to_target: truth
            .f_phi
            .as_ref()
            .map(|f| wasserstein2_sq(&result.template_quantile, f)),
        warp_sup_errors: Some(warp_sup_errors),
        curve_rel_l2_errors: Some(curve_rel_l2_errors),
        explained_ratios,
        z_stats: None,
        mean_sup_error: Some(sup_norm(reg_diff.iter().copied())),
        mean_l2_error: Some(l2_norm(grid, reg_diff.into_iter())),
        warped_mean_sup_error,
        warped_mean_l2_error,
        rate_check: None,
    })
}

/// Monte Carlo means of `d_W²(F̂, F_φ)` across sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub ns: Vec<usize>,
    pub grid_sizes: Vec<usize>,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Least-squares slope of log-mean against log-n.
    pub slope: Option<f64>,
    /// Set when the warp law has no phase variation and no slope is fitted.
    pub skipped: bool,
}

/// Grid size paired with sample size `n`: `1 + ⌈n^1.2⌉`.
pub fn rate_grid_size(n: usize) -> usize {
    1 + (n as f64).powf(1.2).ceil() as usize
}

fn replicate_seed(seed: u64, n: usize, rep: usize) -> u64 {
    // SplitMix64 finalizer over the packed inputs.
    let mut z = seed ^ ((n as u64) << 32) ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Squared Wasserstein distance between the template estimated from one
/// noiseless simulated sample and the true `F_φ`.
pub fn template_error(bundle: &TruthBundle) -> Result<f64> {
    let f_phi = bundle.f_phi.as_ref().ok_or(Error::NotRankOne)?;
    let qs = bundle
        .observed
        .iter()
        .enumerate()
        .map(|(i, c)| {
            discrete_variation_cdf(c)
                .map(|s| generalized_inverse(&s.cdf))
                .map_err(|e| e.for_curve(i))
        })
        .collect::<Result<Vec<_>>>()?;
    let template = mean_quantile(&qs, &[])?;
    Ok(wasserstein2_sq(&template, f_phi))
}

/// Runs `reps` noiseless replicates at each sample size and fits the decay
/// rate of the template error.
pub fn rate_check(
    model: &LatentModelConfig,
    warp: &WarpLawConfig,
    ns: &[usize],
    reps: usize,
    seed: u64,
) -> Result<RateCheck> {
    if ns.is_empty() || reps == 0 || ns.windows(2).any(|w| w[1] <= w[0]) || ns[0] == 0 {
        return Err(Error::InvalidArgument(
            "need increasing positive sample sizes and reps ≥ 1".into(),
        ));
    }
    let mut means = Vec::with_capacity(ns.len());
    let mut std_errors = Vec::with_capacity(ns.len());
    let grid_sizes: Vec<usize> = ns.iter().map(|&n| rate_grid_size(n)).collect();
    for (&n, &r) in ns.iter().zip(&grid_sizes) {
        let cfg = LatentModelConfig {
            grid_size: r,
            noise_halfwidth: 0.0,
            ..model.clone()
        };
        let errs = (0..reps)
            .into_par_iter()
            .map(|rep| {
                template_error(&make_truth_bundle(
                    &cfg,
                    warp,
                    n,
                    replicate_seed(seed, n, rep),
                )?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = sorted_sum(&mut errs.clone()) / reps as f64;
        let mut sq: Vec<f64> = errs.iter().map(|e| (e - mean).powi(2)).collect();
        let var = if reps > 1 {
            sorted_sum(&mut sq) / (reps - 1) as f64
        } else {
            0.0
        };
        means.push(mean);
        std_errors.push((var / reps as f64).sqrt());
    }
    let skipped = warp.identity || ns.len() < 2;
    let slope = (!skipped).then(|| {
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
        let k = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(RateCheck {
        ns: ns.to_vec(),
        grid_sizes,
        means,
        std_errors,
        slope,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::uniform_grid;
    use crate::registration::{register_discrete, DiscreteOptions};
    use crate::simulate::LatentModel;
    use std::f64::consts::PI;

    #[test]
    fn equal_curves_have_zero_z() {
        let g = uniform_grid(201);
        let c = DiscreteCurve::from_fn(&g, |t| 1.7 * (PI * t).sin()).unwrap();
        let z = z_statistic(&[c.clone(), c.clone(), c], MeanMode::Auto).unwrap();
        assert_eq!(z.branch, ZBranch::MeanDerivative);
        assert!(z.values.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn pure_first_component_has_zero_z_in_zero_mean_branch() {
        let g = uniform_grid(201);
        let curves: Vec<DiscreteCurve> = [-1.0, 0.5, 2.0, -1.5]
            .iter()
            .map(|x| DiscreteCurve::from_fn(&g, |t| 3.0 + x * (2.0 * PI * t).cos()).unwrap())
            .collect();
        let z = z_statistic(&curves, MeanMode::Auto).unwrap();
        assert_eq!(z.branch, ZBranch::ZeroMeanDerivative);
        assert!(z.values.iter().all(|v| v.abs() < 1e-10), "{:?}", z.values);
    }

    #[test]
    fn z_is_clamped_and_flagged() {
        let g = uniform_grid(101);
        // A nearly flat curve next to a steep one: the mean-derivative form
        // exceeds 2 for the flat curve.
        let flat = DiscreteCurve::from_fn(&g, |t| 0.01 * t).unwrap();
        let steep = DiscreteCurve::from_fn(&g, |t| 10.0 * t).unwrap();
        let z = z_statistic(&[flat, steep], MeanMode::Auto).unwrap();
        assert_eq!(z.exceeded, vec![0]);
        assert_eq!(z.values[0], 2.0);
        assert!(z.values[1] <= 2.0);
    }

    #[test]
    fn constant_curve_is_rejected() {
        let g = uniform_grid(11);
        let a = DiscreteCurve::from_fn(&g, |t| t).unwrap();
        let b = DiscreteCurve::from_fn(&g, |_| 2.0).unwrap();
        assert_eq!(
            z_statistic(&[a, b], MeanMode::Auto),
            Err(Error::ZeroVariation { curve: Some(1) })
        );
    }

    #[test]
    fn truth_against_itself_is_near_zero() {
        let cfg = LatentModelConfig::new(LatentModel::Model1, 101, 0.0);
        let warp = WarpLawConfig {
            identity: true,
            ..Default::default()
        };
        let bundle = make_truth_bundle(&cfg, &warp, 5, 3).unwrap();
        let res = register_discrete(&bundle.observed, &DiscreteOptions::default()).unwrap();
        let truth = GroundTruth::from_bundle(&bundle, &res.output_grid);
        let rep = evaluate_against_truth(&res, &truth).unwrap();
        let gap = 0.01;
        assert!(rep
            .warp_sup_errors
            .unwrap()
            .iter()
            .all(|e| *e <= gap + 1e-12));
        assert!(rep.curve_rel_l2_errors.unwrap().iter().all(|e| *e < 0.05));
        assert_eq!(rep.warped_mean_sup_error, Some(0.0));
        assert!(rep.dw2_template_to_target.unwrap() < 1e-3);
    }

    #[test]
    fn identity_warps_skip_the_slope() {
        let cfg = LatentModelConfig::new(LatentModel::Model1, 3, 0.0);
        let warp = WarpLawConfig {
            identity: true,
            ..Default::default()
        };
        let rc = rate_check(&cfg, &warp, &[5, 10], 3, 1).unwrap();
        assert!(rc.skipped);
        assert!(rc.slope.is_none());
        assert!(rc.means.iter().all(|m| m.is_finite() && *m > 0.0));
        assert_eq!(rc.grid_sizes, vec![rate_grid_size(5), rate_grid_size(10)]);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
