//! Latent amplitude models `X = Σ_k ξ_k φ_k`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use super::random::{beta22, normal};
use crate::error::{Error, Result};

/// Named latent models. Normal laws are parameterized by mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LatentModel {
    /// `ξ ~ N(1.5, 1)`, `φ(t) = exp(cos(2πt − π))`.
    Model1,
    /// `ξ ~ 1 + Beta(2, 2)`, `φ(t) = (1 − (t − 0.25)²) cos(3πt)`.
    Model2,
    /// `ξ₁ ~ N(1.5, 1)`, `ξ₂ ~ N(−0.5, 0.15)` on `√2 sin πt`, `√2 cos 2πt`.
    Rank2,
    /// Rank 2 plus `ξ₃ ~ N(0.5, 0.15²)` on `√2 cos 4πt`.
    Rank3,
    /// `ξ₁ ~ N(3c, 1)`, `ξ₂ ~ N(−c, r)` and, for rank 3, `ξ₃ ~ N(c, r²)`.
    Breakdown { c: f64, r_scale: f64, rank: usize },
}

/// Basis functions shared by the rank models.
fn rank_basis(k: usize, t: f64) -> f64 {
    match k {
        0 => SQRT_2 * (PI * t).sin(),
        1 => SQRT_2 * (2.0 * PI * t).cos(),
        _ => SQRT_2 * (4.0 * PI * t).cos(),
    }
}

fn rank_basis_deriv(k: usize, t: f64) -> f64 {
    match k {
        0 => SQRT_2 * PI * (PI * t).cos(),
        1 => -SQRT_2 * 2.0 * PI * (2.0 * PI * t).sin(),
        _ => -SQRT_2 * 4.0 * PI * (4.0 * PI * t).sin(),
    }
}

impl LatentModel {
    pub fn validate(&self) -> Result<()> {
        if let LatentModel::Breakdown { c, r_scale, rank } = *self {
            if !(rank == 2 || rank == 3) {
                return Err(Error::InvalidArgument(format!(
                    "breakdown rank must be 2 or 3, got {rank}"
                )));
            }
            if !c.is_finite() || !(r_scale >= 0.0) || !r_scale.is_finite() {
                return Err(Error::InvalidArgument(
                    "breakdown needs finite c and r_scale ≥ 0".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        match *self {
            LatentModel::Model1 | LatentModel::Model2 => 1,
            LatentModel::Rank2 => 2,
            LatentModel::Rank3 => 3,
            LatentModel::Breakdown { rank, .. } => rank,
        }
    }

    /// `φ_k(t)`.
    pub fn basis(&self, k: usize, t: f64) -> f64 {
        match self {
            LatentModel::Model1 => (2.0 * PI * t - PI).cos().exp(),
            LatentModel::Model2 => (1.0 - (t - 0.25).powi(2)) * (3.0 * PI * t).cos(),
            _ => rank_basis(k, t),
        }
    }

    /// `φ_k'(t)`.
    pub fn basis_deriv(&self, k: usize, t: f64) -> f64 {
        match self {
            LatentModel::Model1 => {
                let a = 2.0 * PI * t - PI;
                -2.0 * PI * a.sin() * a.cos().exp()
            }
            LatentModel::Model2 => {
                let q = 1.0 - (t - 0.25).powi(2);
                -2.0 * (t - 0.25) * (3.0 * PI * t).cos() - 3.0 * PI * q * (3.0 * PI * t).sin()
            }
            _ => rank_basis_deriv(k, t),
        }
    }

    /// Draws the coefficients `ξ_1, …, ξ_rank`.
    pub fn sample_coefficients<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match *self {
            LatentModel::Model1 => vec![normal(rng, 1.5, 1.0)],
            LatentModel::Model2 => vec![1.0 + beta22(rng)],
            LatentModel::Rank2 => vec![normal(rng, 1.5, 1.0), normal(rng, -0.5, 0.15)],
            LatentModel::Rank3 => {
                vec![
                    normal(rng, 1.5, 1.0),
                    normal(rng, -0.5, 0.15),
                    normal(rng, 0.5, 0.15 * 0.15),
                ]
            }
            LatentModel::Breakdown { c, r_scale, rank } => {
                let mut xi = vec![normal(rng, 3.0 * c, 1.0), normal(rng, -c, r_scale)];
                if rank == 3 {
                    xi.push(normal(rng, c, r_scale * r_scale));
                }
                xi
            }
        }
    }
}

/// One latent curve, a fixed combination of the model's basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCurve {
    pub model: LatentModel,
    pub coefficients: Vec<f64>,
}

impl LatentCurve {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, x)| x * self.model.basis(k, t))
            .sum()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, x)| x * self.model.basis_deriv(k, t))
            .sum()
    }
}

/// Draws a latent curve from `model`.
pub fn sample_latent<R: Rng + ?Sized>(model: &LatentModel, rng: &mut R) -> LatentCurve {
    LatentCurve {
        model: *model,
        coefficients: model.sample_coefficients(rng),
    }
}
