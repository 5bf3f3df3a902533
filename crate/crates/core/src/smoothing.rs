//! Kernel smoothers and monotone warp smoothing.
//!
//! All smoothers use the Epanechnikov kernel on `[-1, 1]`. A grid point
//! belongs to the window at `t` when `|t - t_j| < h`, i.e. when its kernel
//! weight is strictly positive.

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::warp::{WarpInterp, WarpMap};

/// Kernel family. Only the Epanechnikov kernel is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Kernel {
    #[default]
    Epanechnikov,
}

impl Kernel {
    #[inline]
    pub fn weight(self, u: f64) -> f64 {
        match self {
            Kernel::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Bandwidth, local polynomial degree and derivative order of a smoother.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmootherConfig {
    pub bandwidth: f64,
    pub degree: usize,
    pub deriv_order: usize,
}

impl SmootherConfig {
    pub fn new(bandwidth: f64, degree: usize, deriv_order: usize) -> Result<Self> {
        let cfg = Self {
            bandwidth,
            degree,
            deriv_order,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bandwidth must lie in (0, 1], got {}",
                self.bandwidth
            )));
        }
        if self.degree > 2 {
            return Err(Error::InvalidArgument("degree must be 0, 1 or 2".into()));
        }
        let ok = if self.degree == 0 {
            self.deriv_order == 0
        } else {
            self.deriv_order < self.degree
        };
        if !ok || self.deriv_order > 1 {
            return Err(Error::InvalidArgument(format!(
                "derivative order {} is not available for degree {}",
                self.deriv_order, self.degree
            )));
        }
        Ok(())
    }
}

/// Index range of grid points strictly within `h` of `t`.
#[inline]
fn window(grid: &[f64], t: f64, h: f64) -> (usize, usize) {
    let lo = grid.partition_point(|&x| x <= t - h);
    let hi = grid.partition_point(|&x| x < t + h);
    (lo, hi)
}

fn nw_at(grid: &[f64], values: &[f64], t: f64, h: f64, skip: Option<usize>) -> Option<f64> {
    let (lo, hi) = window(grid, t, h);
    let mut total = 0.0;
    for j in lo..hi {
        if Some(j) != skip {
            total += Kernel::Epanechnikov.weight((t - grid[j]) / h);
        }
    }
    if !(total > 0.0) {
        return None;
    }
    let mut acc = 0.0;
    for j in lo..hi {
        if Some(j) != skip {
            acc += (Kernel::Epanechnikov.weight((t - grid[j]) / h) / total) * values[j];
        }
    }
    Some(acc)
}

/// Nadaraya–Watson regression with bandwidth `h` at each evaluation point.
pub fn nadaraya_watson(
    curve: &DiscreteCurve,
    bandwidth: f64,
    eval_points: &[f64],
) -> Result<Vec<f64>> {
    eval_points
        .iter()
        .map(|&t| {
            nw_at(curve.grid(), curve.values(), t, bandwidth, None).ok_or(Error::EmptyWindow {
                t,
                bandwidth,
                curve: None,
            })
        })
        .collect()
}

/// Solve a small symmetric system by Gaussian elimination with partial
/// pivoting; `None` when a pivot vanishes relative to the matrix scale.
fn solve_small(mut a: [[f64; 3]; 3], mut b: [f64; 3], n: usize) -> Option<[f64; 3]> {
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

fn local_poly_at(
    grid: &[f64],
    values: &[f64],
    t: f64,
    cfg: &SmootherConfig,
    skip: Option<usize>,
) -> Option<f64> {
    let h = cfg.bandwidth;
    if cfg.degree == 0 {
        return nw_at(grid, values, t, h, skip);
    }
    let p = cfg.degree + 1;
    let (lo, hi) = window(grid, t, h);
    let kept = |j: usize| Some(j) != skip;
    // The design is centred at the weighted mean position and the response
    // at the weighted mean value; this keeps narrow windows well conditioned.
    let (mut sw, mut swx, mut swy, mut support) = (0.0, 0.0, 0.0, 0);
    for j in (lo..hi).filter(|&j| kept(j)) {
        let x = (grid[j] - t) / h;
        let w = Kernel::Epanechnikov.weight(x);
        if w > 0.0 {
            sw += w;
            swx += w * x;
            swy += w * values[j];
            support += 1;
        }
    }
    if support < p {
        return None;
    }
    let (xbar, ybar) = (swx / sw, swy / sw);
    let mut moments = [0.0; 5];
    let mut rhs = [0.0; 3];
    for j in (lo..hi).filter(|&j| kept(j)) {
        let x = (grid[j] - t) / h;
        let w = Kernel::Epanechnikov.weight(x);
        if w <= 0.0 {
            continue;
        }
        let (xc, yc) = (x - xbar, values[j] - ybar);
        let mut xp = w;
        for (k, m) in moments.iter_mut().enumerate().take(2 * p - 1) {
            *m += xp;
            if k < p {
                rhs[k] += xp * yc;
            }
            xp *= xc;
        }
    }
    let mut a = [[0.0; 3]; 3];
    for (r, row) in a.iter_mut().enumerate().take(p) {
        for (c, cell) in row.iter_mut().enumerate().take(p) {
            *cell = moments[r + c];
        }
    }
    let beta = solve_small(a, rhs, p)?;
    let z = -xbar;
    Some(match cfg.deriv_order {
        0 => ybar + beta[0] + z * (beta[1] + z * beta[2]),
        _ => (beta[1] + 2.0 * z * beta[2]) / h,
    })
}

/// Local polynomial regression of the given degree, returning the fitted
/// value (`deriv_order = 0`) or first derivative (`deriv_order = 1`).
pub fn local_poly(
    curve: &DiscreteCurve,
    cfg: &SmootherConfig,
    eval_points: &[f64],
) -> Result<Vec<f64>> {
    cfg.validate()?;
    eval_points
        .iter()
        .map(|&t| {
            local_poly_at(curve.grid(), curve.values(), t, cfg, None).ok_or(if cfg.degree == 0 {
                Error::EmptyWindow {
                    t,
                    bandwidth: cfg.bandwidth,
                    curve: None,
                }
            } else {
                Error::SingularFit {
                    t,
                    bandwidth: cfg.bandwidth,
                    curve: None,
                }
            })
        })
        .collect()
}

/// Leave-one-out squared prediction error, `None` if some fit is singular.
pub fn loo_error(curve: &DiscreteCurve, degree: usize, bandwidth: f64) -> Option<f64> {
    let cfg = SmootherConfig {
        bandwidth,
        degree,
        deriv_order: 0,
    };
    let (grid, values) = (curve.grid(), curve.values());
    let mut total = 0.0;
    for j in 0..grid.len() {
        let fit = local_poly_at(grid, values, grid[j], &cfg, Some(j))?;
        total += (values[j] - fit).powi(2);
    }
    Some(total)
}

/// Candidate bandwidths: `count` log-spaced values from `2 × max gap` to
/// 0.25.
pub fn default_bandwidth_candidates(max_gap: f64, count: usize) -> Vec<f64> {
    let lo = 2.0 * max_gap;
    let hi = 0.25_f64;
    if lo >= hi || count < 2 {
        return vec![lo.min(1.0)];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

fn pick_candidate(mut scored: Vec<(f64, Option<f64>)>) -> Result<f64> {
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(f64, f64)> = None;
    for (h, err) in scored {
        let Some(err) = err else { continue };
        match best {
            Some((_, e)) if !(err < e * (1.0 - 1e-12)) => {}
            _ => best = Some((h, err)),
        }
    }
    best.map(|(h, _)| h).ok_or(Error::AllCandidatesSingular)
}

/// Leave-one-out cross-validated bandwidth; ties go to the smaller value.
pub fn loocv_bandwidth(curve: &DiscreteCurve, degree: usize, candidates: &[f64]) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate bandwidths".into()));
    }
    pick_candidate(
        candidates
            .iter()
            .map(|&h| (h, loo_error(curve, degree, h)))
            .collect(),
    )
}

/// Cross-validation pooled over a sample: the candidate minimising the
/// summed leave-one-out error of all curves.
pub fn loocv_bandwidth_pooled(
    curves: &[DiscreteCurve],
    degree: usize,
    candidates: &[f64],
) -> Result<f64> {
    use rayon::prelude::*;
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate bandwidths".into()));
    }
    if curves.is_empty() {
        return Err(Error::EmptySample);
    }
    let scored = candidates
        .iter()
        .map(|&h| {
            let errs: Option<Vec<f64>> =
                curves.par_iter().map(|c| loo_error(c, degree, h)).collect();
            (h, errs.map(|e| e.iter().sum()))
        })
        .collect();
    pick_candidate(scored)
}

/// Fritsch–Carlson slopes for a monotone cubic Hermite interpolant.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let end_slope = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if d0 == 0.0 || s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    let mut d = vec![0.0; n];
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d
}

/// Monotone cubic smoothing of a warp: the warp is read off at `n_knots`
/// equispaced knots and interpolated by a Fritsch–Carlson cubic.
pub fn monotone_smooth_warp(warp: &WarpMap, n_knots: usize) -> WarpMap {
    let knots = crate::curve::uniform_grid(n_knots.max(2));
    let values: Vec<f64> = knots.iter().map(|&t| warp.eval(t)).collect();
    let slopes = pchip_slopes(&knots, &values)
        .into_iter()
        .map(|s| s.max(0.0))
        .collect();
    WarpMap::with_interp(knots, values, WarpInterp::Hermite(slopes))
        .expect("knot values of a monotone warp form a monotone warp")
}
