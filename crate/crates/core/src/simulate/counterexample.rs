//! A rank-1 process and a distinct rank-2 process with identical warped
//! versions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::random::{standard_normal, uniform};
use super::warps::AnalyticWarp;
use crate::error::{Error, Result};

/// `X(t) = ξ(2t − 1)` together with `Y_k = ξμ + ξ(2 − 4U)φ_k` and the warp
/// `T_k(t) = t − (2U − 1)φ_k(t)`, where `φ_k(t) = sin((2k−1)πt)/((2k−1)π)`.
/// Warping `Y_k` by `T_k` gives back `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexamplePair {
    pub k: u32,
    pub xi: f64,
    pub u: f64,
}

impl CounterexamplePair {
    pub fn new(k: u32, xi: f64, u: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&u) || !xi.is_finite() {
            return Err(Error::InvalidArgument(
                "u must lie in [0, 1] and ξ be finite".into(),
            ));
        }
        Ok(Self { k, xi, u })
    }

    fn phi(&self, t: f64) -> f64 {
        let f = (2 * self.k - 1) as f64 * PI;
        (f * t).sin() / f
    }

    pub fn x(&self, t: f64) -> f64 {
        self.xi * (2.0 * t - 1.0)
    }

    pub fn y(&self, t: f64) -> f64 {
        self.xi * (2.0 * t - 1.0) + self.xi * (2.0 - 4.0 * self.u) * self.phi(t)
    }

    /// The warp `T_k` as an [`AnalyticWarp`].
    pub fn warp(&self) -> CounterexampleWarp {
        CounterexampleWarp(self.clone())
    }
}

pub struct CounterexampleWarp(CounterexamplePair);

impl AnalyticWarp for CounterexampleWarp {
    fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            t - (2.0 * self.0.u - 1.0) * self.0.phi(t)
        }
    }
}

/// Draws `U ~ Unif((1 − 1/M)/2, (1 + 1/M)/2)` and `ξ ~ N(0, 1)`.
pub fn counterexample_pair<R: Rng + ?Sized>(
    k: u32,
    m: f64,
    rng: &mut R,
) -> Result<CounterexamplePair> {
    if !(m > 1.0) {
        return Err(Error::InvalidArgument(format!("M must exceed 1, got {m}")));
    }
    let u = 0.5 * (1.0 - 1.0 / m) + uniform(rng) / m;
    let xi = standard_normal(rng);
    CounterexamplePair::new(k, xi, u)
}
