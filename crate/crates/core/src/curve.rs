//! Discretely observed curves and the grid utilities shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One functional observation: a strictly increasing grid in `[0, 1]` and
/// the curve's values at those points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl DiscreteCurve {
    pub const MIN_POINTS: usize = 3;

    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidCurve(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < Self::MIN_POINTS {
            return Err(Error::InvalidCurve(format!(
                "need at least {} grid points, got {}",
                Self::MIN_POINTS,
                grid.len()
            )));
        }
        if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidCurve("grid points must lie in [0, 1]".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve(
                "grid must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` on `grid`.
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.to_vec(), grid.iter().map(|&t| f(t)).collect())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_gap(&self) -> f64 {
        max_gap(&self.grid)
    }

    /// Same grid, values mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Piecewise-linear interpolation, constant beyond the grid ends.
    pub fn interpolate(&self, t: f64) -> f64 {
        interp_linear(&self.grid, &self.values, t)
    }
}

/// `n` equispaced points covering `[0, 1]`, endpoints included.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "uniform grid needs at least two points");
    let last = (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { 1.0 } else { k as f64 / last })
        .collect()
}

pub fn max_gap(grid: &[f64]) -> f64 {
    grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Linear interpolation on a sorted abscissa, clamped to the end values.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (y0, y1) = (ys[k - 1], ys[k]);
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

/// Composite trapezoid weights for a sorted grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let half = 0.5 * (grid[k + 1] - grid[k]);
        w[k] += half;
        w[k + 1] += half;
    }
    w
}

pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Keep at most `cap` points of a sorted grid, evenly by index, always
/// retaining both ends.
pub fn thin_grid(grid: &[f64], cap: usize) -> Vec<f64> {
    if grid.len() <= cap {
        return grid.to_vec();
    }
    let last = grid.len() - 1;
    let mut out: Vec<f64> = (0..cap)
        .map(|k| grid[((k as f64) * (last as f64) / ((cap - 1) as f64)).round() as usize])
        .collect();
    out.dedup();
    out
}

/// Sorted union of several grids, exact duplicates removed.
pub fn union_grid<'a>(grids: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = grids.into_iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Order-independent sum: the same multiset of summands always produces
/// the same bits.
pub(crate) fn sorted_sum(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    buf.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_or_unsorted_grids() {
        assert!(DiscreteCurve::new(vec![0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(DiscreteCurve::new(vec![0.0, 0.5, 0.5], vec![0.0, 1.0, 2.0]).is_err());
        assert!(DiscreteCurve::new(vec![0.0, 0.5, 1.5], vec![0.0, 1.0, 2.0]).is_err());
        assert!(DiscreteCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, f64::NAN, 2.0]).is_err());
        assert!(DiscreteCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn uniform_grid_hits_endpoints() {
        let g = uniform_grid(101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!((max_gap(&g) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let g = vec![0.0, 0.1, 0.5, 0.9, 1.0];
        let s: f64 = trapezoid_weights(&g).iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        let lin: Vec<f64> = g.iter().map(|t| 2.0 * t + 1.0).collect();
        assert!((trapezoid(&g, &lin) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn thinning_keeps_ends_and_cap() {
        let g = uniform_grid(5000);
        let t = thin_grid(&g, 1024);
        assert!(t.len() <= 1024);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn interpolation_matches_knots_and_clamps() {
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 1.0, 3.0];
        assert_eq!(interp_linear(&xs, &ys, 0.5), 1.0);
        assert_eq!(interp_linear(&xs, &ys, 0.75), 2.0);
        assert_eq!(interp_linear(&xs, &ys, -1.0), 0.0);
        assert_eq!(interp_linear(&xs, &ys, 2.0), 3.0);
    }
}
