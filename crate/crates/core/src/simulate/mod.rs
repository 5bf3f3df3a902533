//! Seeded generators for warped functional samples with known truth.

mod counterexample;
mod models;
pub mod random;
mod warps;

pub use counterexample::{counterexample_pair, CounterexamplePair, CounterexampleWarp};
pub use models::{sample_latent, LatentCurve, LatentModel};
pub use warps::{
    invert_increasing, sample_warp, AnalyticWarp, FnWarp, SineMixtureWarp, WarpLawConfig,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{uniform_grid, DiscreteCurve};
use crate::error::{Error, Result};
use crate::variation::{discrete_variation_cdf, StepCdf};
use random::{curve_rng, symmetric_uniform};

/// Size of the dense grid carrying the true template.
pub const DENSE_GRID: usize = 10_001;

/// Latent model plus observation design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentModelConfig {
    pub model: LatentModel,
    /// Number of equally spaced observation points on `[0, 1]`.
    pub grid_size: usize,
    /// Half-width `a` of the uniform measurement error; 0 means noiseless.
    pub noise_halfwidth: f64,
}

impl LatentModelConfig {
    pub fn new(model: LatentModel, grid_size: usize, noise_halfwidth: f64) -> Self {
        Self {
            model,
            grid_size,
            noise_halfwidth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.grid_size < DiscreteCurve::MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "grid size must be at least 3, got {}",
                self.grid_size
            )));
        }
        if !(self.noise_halfwidth >= 0.0) || !self.noise_halfwidth.is_finite() {
            return Err(Error::InvalidArgument(
                "noise half-width must be finite and ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

/// Observes `X ∘ T⁻¹` on `grid`, adding `Unif(−a, a)` errors when `a > 0`.
pub fn observe<W: AnalyticWarp + ?Sized, R: Rng + ?Sized>(
    latent: &LatentCurve,
    warp: &W,
    grid: &[f64],
    noise_halfwidth: f64,
    rng: &mut R,
) -> Result<DiscreteCurve> {
    let values = grid
        .iter()
        .map(|&t| {
            let clean = latent.eval(warp.inverse(t));
            if noise_halfwidth > 0.0 {
                clean + symmetric_uniform(rng, noise_halfwidth)
            } else {
                clean
            }
        })
        .collect();
    DiscreteCurve::new(grid.to_vec(), values)
}

/// Local variation cdf of `f` sampled on `dense_r` equally spaced points.
pub fn variation_cdf_of(f: impl Fn(f64) -> f64, dense_r: usize) -> Result<StepCdf> {
    let curve = DiscreteCurve::from_fn(&uniform_grid(dense_r), f)?;
    Ok(discrete_variation_cdf(&curve)?.cdf)
}

/// `F_φ` for a rank-1 model.
pub fn true_variation_cdf(model: &LatentModel, dense_r: usize) -> Result<StepCdf> {
    if model.rank() != 1 {
        return Err(Error::NotRankOne);
    }
    variation_cdf_of(|t| model.basis(0, t), dense_r)
}

/// A simulated sample together with everything used to generate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthBundle {
    pub config: LatentModelConfig,
    pub warp_config: WarpLawConfig,
    pub seed: u64,
    pub grid: Vec<f64>,
    pub latent: Vec<LatentCurve>,
    pub warps: Vec<SineMixtureWarp>,
    /// `X_i` on the observation grid.
    pub latent_sampled: Vec<DiscreteCurve>,
    /// `X_i ∘ T_i⁻¹` on the grid, plus noise if configured.
    pub observed: Vec<DiscreteCurve>,
    /// `φ` on the dense grid, rank-1 models only.
    pub phi: Option<DiscreteCurve>,
    /// `F_φ` on the dense grid, rank-1 models only.
    pub f_phi: Option<StepCdf>,
}

impl TruthBundle {
    pub fn len(&self) -> usize {
        self.latent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latent.is_empty()
    }
}

/// Draws `n` independent (latent, warp, observation) triples. Curve `i` uses
/// its own random stream, so the result does not depend on thread count.
pub fn make_truth_bundle(
    cfg: &LatentModelConfig,
    warp_cfg: &WarpLawConfig,
    n: usize,
    seed: u64,
) -> Result<TruthBundle> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    cfg.validate()?;
    warp_cfg.validate()?;
    let grid = uniform_grid(cfg.grid_size);
    let draws: Vec<(LatentCurve, SineMixtureWarp, DiscreteCurve, DiscreteCurve)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = curve_rng(seed, i as u64);
            let latent = sample_latent(&cfg.model, &mut rng);
            let warp = sample_warp(warp_cfg, &mut rng);
            let observed = observe(&latent, &warp, &grid, cfg.noise_halfwidth, &mut rng)?;
            let sampled = DiscreteCurve::from_fn(&grid, |t| latent.eval(t))?;
            Ok((latent, warp, sampled, observed))
        })
        .collect::<Result<_>>()?;
    let (phi, f_phi) = if cfg.model.rank() == 1 {
        let dense = uniform_grid(DENSE_GRID);
        (
            Some(DiscreteCurve::from_fn(&dense, |t| cfg.model.basis(0, t))?),
            Some(true_variation_cdf(&cfg.model, DENSE_GRID)?),
        )
    } else {
        (None, None)
    };
    let mut latent = Vec::with_capacity(n);
    let mut warps = Vec::with_capacity(n);
    let mut latent_sampled = Vec::with_capacity(n);
    let mut observed = Vec::with_capacity(n);
    for (l, w, s, o) in draws {
        latent.push(l);
        warps.push(w);
        latent_sampled.push(s);
        observed.push(o);
    }
    Ok(TruthBundle {
        config: cfg.clone(),
        warp_config: warp_cfg.clone(),
        seed,
        grid,
        latent,
        warps,
        latent_sampled,
        observed,
        phi,
        f_phi,
    })
}
