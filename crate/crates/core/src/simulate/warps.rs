//! Random warp maps with closed-form evaluation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::random::{poisson, uniform};
use crate::error::{Error, Result};
use crate::warp::WarpMap;

/// A strictly increasing map of `[0, 1]` known in closed form.
pub trait AnalyticWarp: Sync {
    fn eval(&self, t: f64) -> f64;

    /// Inverse by bisection, accurate to about `1e-14` in the argument.
    fn inverse(&self, y: f64) -> f64 {
        invert_increasing(|t| self.eval(t), y)
    }

    /// Samples the map on `grid` (endpoints added).
    fn to_warp_map(&self, grid: &[f64]) -> WarpMap {
        WarpMap::from_fn(grid, |t| self.eval(t)).expect("analytic warps are monotone")
    }

    fn inverse_map(&self, grid: &[f64]) -> WarpMap {
        WarpMap::from_fn(grid, |t| self.inverse(t)).expect("analytic warps are monotone")
    }
}

/// Solves `f(t) = y` on `[0, 1]` for increasing `f` with `f(0) = 0`,
/// `f(1) = 1`.
pub fn invert_increasing(f: impl Fn(f64) -> f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Law of the random sine-mixture warps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpLawConfig {
    /// Number of mixture components, at least 2.
    pub components: usize,
    /// Must exceed 1; the warp slope is at least `1 − 1/β`.
    pub beta: f64,
    /// Rate of the Poisson magnitude of each frequency.
    pub lambda: f64,
    /// Draw identity warps instead (no phase variation).
    pub identity: bool,
}

impl Default for WarpLawConfig {
    fn default() -> Self {
        Self {
            components: 2,
            beta: 1.01,
            lambda: 3.0,
            identity: false,
        }
    }
}

impl WarpLawConfig {
    pub fn validate(&self) -> Result<()> {
        if self.components < 2 {
            return Err(Error::InvalidArgument(
                "warp mixture needs at least 2 components".into(),
            ));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must exceed 1, got {}",
                self.beta
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// `T(t) = Σ_j w_j ζ_{k_j}(t)` with `ζ_k(t) = t − sin(πkt)/(|k|πβ)` and
/// `ζ_0 = Id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineMixtureWarp {
    pub frequencies: Vec<i64>,
    pub weights: Vec<f64>,
    pub beta: f64,
}

impl SineMixtureWarp {
    pub fn identity() -> Self {
        Self {
            frequencies: vec![0],
            weights: vec![1.0],
            beta: 2.0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        1.0 - self
            .frequencies
            .iter()
            .zip(&self.weights)
            .filter(|(k, _)| **k != 0)
            .map(|(&k, w)| w * (k.signum() as f64) * (PI * k as f64 * t).cos() / self.beta)
            .sum::<f64>()
    }
}

impl AnalyticWarp for SineMixtureWarp {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let bend: f64 = self
            .frequencies
            .iter()
            .zip(&self.weights)
            .filter(|(k, _)| **k != 0)
            .map(|(&k, w)| {
                w * (PI * k as f64 * t).sin() / (k.unsigned_abs() as f64 * PI * self.beta)
            })
            .sum();
        (t - bend).clamp(0.0, 1.0)
    }

    fn inverse(&self, y: f64) -> f64 {
        if self.frequencies.iter().all(|&k| k == 0) {
            return y.clamp(0.0, 1.0);
        }
        invert_increasing(|t| self.eval(t), y)
    }
}

/// Draws one warp: `K_j = V₁V₂` with `V₁ ~ Poisson(λ)` and a fair sign
/// `V₂`, mixed with spacings of sorted uniforms.
pub fn sample_warp<R: Rng + ?Sized>(cfg: &WarpLawConfig, rng: &mut R) -> SineMixtureWarp {
    if cfg.identity {
        return SineMixtureWarp::identity();
    }
    let j = cfg.components;
    let frequencies: Vec<i64> = (0..j)
        .map(|_| {
            let magnitude = poisson(rng, cfg.lambda) as i64;
            if uniform(rng) < 0.5 {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect();
    let mut cuts: Vec<f64> = (0..j - 1).map(|_| uniform(rng)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut weights = Vec::with_capacity(j);
    let mut prev = 0.0;
    for &c in &cuts {
        weights.push(c - prev);
        prev = c;
    }
    weights.push(1.0 - prev);
    SineMixtureWarp {
        frequencies,
        weights,
        beta: cfg.beta,
    }
}

/// A warp given by an explicit increasing function.
pub struct FnWarp<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> AnalyticWarp for FnWarp<F> {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            (self.0)(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::uniform_grid;
    use crate::simulate::random::curve_rng;

    #[test]
    fn zero_frequencies_give_identity() {
        let w = SineMixtureWarp {
            frequencies: vec![0, 0],
            weights: vec![0.3, 0.7],
            beta: 1.01,
        };
        for t in uniform_grid(101) {
            assert_eq!(w.eval(t), t);
        }
    }

    #[test]
    fn sampled_warps_are_steep_enough() {
        let cfg = WarpLawConfig::default();
        let grid = uniform_grid(10_001);
        let bound = 1.0 - 1.0 / cfg.beta;
        for s in 0..50 {
            let w = sample_warp(&cfg, &mut curve_rng(s, 0));
            assert_eq!(w.eval(0.0), 0.0);
            assert_eq!(w.eval(1.0), 1.0);
            assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let min_slope = grid
                .windows(2)
                .map(|p| (w.eval(p[1]) - w.eval(p[0])) / (p[1] - p[0]))
                .fold(f64::INFINITY, f64::min);
            assert!(min_slope >= bound - 1e-6, "seed {s}: slope {min_slope}");
            for &t in grid.iter().step_by(97) {
                assert!((w.eval(w.inverse(t)) - t).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn warp_law_is_centred_on_identity() {
        let cfg = WarpLawConfig::default();
        let n = 100_000;
        for &t in &[0.25, 0.5, 0.75] {
            let vals: Vec<f64> = (0..n)
                .map(|i| sample_warp(&cfg, &mut curve_rng(11, i)).eval(t))
                .collect();
            let m = vals.iter().sum::<f64>() / n as f64;
            let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
            assert!(
                (m - t).abs() <= 3.0 * sd / (n as f64).sqrt(),
                "t = {t}: mean {m}"
            );
        }
    }

    #[test]
    fn config_validation() {
        assert!(WarpLawConfig {
            beta: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(WarpLawConfig {
            components: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(WarpLawConfig::default().validate().is_ok());
    }

    #[test]
    fn fn_warp_inverse() {
        let w = FnWarp(|t: f64| t * t);
        assert!((w.inverse(0.25) - 0.5).abs() < 1e-12);
        assert_eq!(w.inverse(1.0), 1.0);
    }
}
