//! Sampled monotone maps of `[0, 1]` onto itself.

use serde::{Deserialize, Serialize};

use crate::curve::interp_linear;
use crate::error::{Error, Result};

/// How a [`WarpMap`] is evaluated between its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WarpInterp {
    Linear,
    /// Cubic Hermite with the stored knot slopes.
    Hermite(Vec<f64>),
}

/// A nondecreasing map of `[0, 1]` with `T(0) = 0` and `T(1) = 1`, stored as
/// samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpMap {
    sample_t: Vec<f64>,
    sample_v: Vec<f64>,
    interp: WarpInterp,
}

impl WarpMap {
    pub fn new(sample_t: Vec<f64>, sample_v: Vec<f64>) -> Result<Self> {
        Self::with_interp(sample_t, sample_v, WarpInterp::Linear)
    }

    pub fn with_interp(sample_t: Vec<f64>, sample_v: Vec<f64>, interp: WarpInterp) -> Result<Self> {
        let n = sample_t.len();
        if n < 2 || sample_v.len() != n {
            return Err(Error::InvalidArgument(
                "warp needs at least two matching samples".into(),
            ));
        }
        if sample_t[0] != 0.0 || sample_t[n - 1] != 1.0 || sample_t.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidArgument(
                "warp abscissae must increase strictly from 0 to 1".into(),
            ));
        }
        if sample_v[0] != 0.0 || sample_v[n - 1] != 1.0 {
            return Err(Error::InvalidArgument("warp must fix 0 and 1".into()));
        }
        if sample_v.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::NonMonotoneInput);
        }
        if let WarpInterp::Hermite(s) = &interp {
            if s.len() != n || s.iter().any(|d| !(*d >= 0.0)) {
                return Err(Error::InvalidArgument(
                    "hermite slopes must be nonnegative".into(),
                ));
            }
        }
        Ok(Self {
            sample_t,
            sample_v,
            interp,
        })
    }

    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap()
    }

    /// Samples an analytic map on `grid`; the endpoints are added if missing
    /// and pinned to 0 and 1.
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut ts = Vec::with_capacity(grid.len() + 2);
        if grid.first() != Some(&0.0) {
            ts.push(0.0);
        }
        ts.extend_from_slice(grid);
        if grid.last() != Some(&1.0) {
            ts.push(1.0);
        }
        let n = ts.len();
        let vs = ts
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                if k == 0 {
                    0.0
                } else if k == n - 1 {
                    1.0
                } else {
                    f(t).clamp(0.0, 1.0)
                }
            })
            .collect();
        Self::new(ts, vs)
    }

    pub fn sample_t(&self) -> &[f64] {
        &self.sample_t
    }

    pub fn sample_v(&self) -> &[f64] {
        &self.sample_v
    }

    pub fn interp(&self) -> &WarpInterp {
        &self.interp
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match &self.interp {
            WarpInterp::Linear => interp_linear(&self.sample_t, &self.sample_v, t),
            WarpInterp::Hermite(slopes) => {
                let xs = &self.sample_t;
                let k = xs.partition_point(|&x| x <= t).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[k - 1], xs[k]);
                let (y0, y1) = (self.sample_v[k - 1], self.sample_v[k]);
                let h = x1 - x0;
                let s = (t - x0) / h;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                (h00 * y0 + h10 * h * slopes[k - 1] + h01 * y1 + h11 * h * slopes[k]).clamp(y0, y1)
            }
        }
    }

    pub fn eval_many(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    /// `sup_t |self(t) - other(t)|` over the given points.
    pub fn sup_distance(&self, other: impl Fn(f64) -> f64, points: &[f64]) -> f64 {
        points
            .iter()
            .map(|&t| (self.eval(t) - other(t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Completes raw warp samples taken on a grid ending at `t_last` into a
/// [`WarpMap`].
///
/// `(0, 0)` is prepended when missing. If `t_last < 1` the sample at
/// `t_last` is pinned to `t_last` and the knot `(1, 1)` is appended, so the
/// map is linear between them. Values are clamped into `[0, 1]`.
pub fn boundary_extend(sample_t: &[f64], sample_v: &[f64], t_last: f64) -> Result<WarpMap> {
    if sample_t.len() != sample_v.len() || sample_t.is_empty() {
        return Err(Error::InvalidArgument(
            "warp samples must be nonempty and matching".into(),
        ));
    }
    if sample_v.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::NonMonotoneInput);
    }
    let mut ts = Vec::with_capacity(sample_t.len() + 2);
    let mut vs = Vec::with_capacity(sample_t.len() + 2);
    if sample_t[0] > 0.0 {
        ts.push(0.0);
        vs.push(0.0);
    }
    for (&t, &v) in sample_t.iter().zip(sample_v) {
        if t > t_last {
            break;
        }
        ts.push(t);
        vs.push(if t == t_last {
            t_last
        } else {
            v.clamp(0.0, 1.0)
        });
    }
    if *ts.last().unwrap() < 1.0 {
        ts.push(1.0);
        vs.push(1.0);
    }
    vs[0] = 0.0;
    *vs.last_mut().unwrap() = 1.0;
    // Pinning at t_last can undercut earlier overshooting samples.
    for k in (0..vs.len() - 1).rev() {
        if vs[k] > vs[k + 1] {
            vs[k] = vs[k + 1];
        }
    }
    WarpMap::new(ts, vs)
}
