//! Local variation distributions and the step-function algebra around them.
//!
//! A curve observed on a grid induces a càdlàg step distribution function on
//! `[0, 1]` whose jumps are the normalised absolute increments of the curve.
//! Registration only ever needs a handful of operations on these objects:
//! generalized inverses, pointwise means of quantile functions, inversion
//! back to a distribution function, composition, and the 2-Wasserstein
//! distance. Everything here is exact on the piecewise representation; no
//! quadrature is involved.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{sorted_sum, DiscreteCurve};
use crate::error::{Error, Result};

/// Relative threshold below which a curve counts as constant.
pub const ZERO_VARIATION_RTOL: f64 = 1e-12;

/// Union breakpoint sets larger than this are thinned in [`mean_quantile`].
pub const MAX_MEAN_BREAKPOINTS: usize = 1_000_000;

/// Nondecreasing càdlàg step function on `[0, 1]` that reaches 1.
///
/// `F(t) = cum_values[k]` on `[jump_locations[k], jump_locations[k + 1])` and
/// `F(t) = 0` before the first jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCdf {
    jump_locations: Vec<f64>,
    cum_values: Vec<f64>,
    max_jump: f64,
}

impl StepCdf {
    pub fn new(jump_locations: Vec<f64>, cum_values: Vec<f64>) -> Result<Self> {
        if jump_locations.is_empty() || jump_locations.len() != cum_values.len() {
            return Err(Error::InvalidArgument(
                "step cdf needs matching, nonempty locations and values".into(),
            ));
        }
        if jump_locations.iter().any(|t| !(0.0..=1.0).contains(t))
            || jump_locations.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidArgument(
                "jump locations must be strictly increasing in [0, 1]".into(),
            ));
        }
        if cum_values.iter().any(|c| !(0.0..=1.0).contains(c))
            || cum_values.windows(2).any(|w| w[1] < w[0])
            || *cum_values.last().unwrap() != 1.0
        {
            return Err(Error::InvalidArgument(
                "cumulative values must be nondecreasing in [0, 1] and end at 1".into(),
            ));
        }
        let max_jump = max_increment(&cum_values);
        Ok(Self {
            jump_locations,
            cum_values,
            max_jump,
        })
    }

    /// Build from nonnegative jump masses; the masses are normalised by their
    /// sum.
    pub fn from_masses(jump_locations: Vec<f64>, masses: &[f64]) -> Result<Self> {
        if masses.len() != jump_locations.len() || masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidArgument(
                "masses must be nonnegative, one per jump".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroVariation { curve: None });
        }
        Self::new(jump_locations, normalized_cumsum(masses, total))
    }

    /// Point mass at `location`.
    pub fn point_mass(location: f64) -> Result<Self> {
        Self::new(vec![location], vec![1.0])
    }

    pub fn jump_locations(&self) -> &[f64] {
        &self.jump_locations
    }

    pub fn cum_values(&self) -> &[f64] {
        &self.cum_values
    }

    /// Largest single increment.
    pub fn max_jump(&self) -> f64 {
        self.max_jump
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.jump_locations.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.cum_values[k - 1]
        }
    }
}

fn max_increment(cum: &[f64]) -> f64 {
    let mut prev = 0.0;
    let mut best: f64 = 0.0;
    for &c in cum {
        best = best.max(c - prev);
        prev = c;
    }
    best
}

fn normalized_cumsum(masses: &[f64], total: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cum: Vec<f64> = masses
        .iter()
        .map(|m| {
            acc += m;
            (acc / total).min(1.0)
        })
        .collect();
    *cum.last_mut().unwrap() = 1.0;
    cum
}

/// Total variation of a curve together with its local variation
/// distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationSummary {
    pub total_variation: f64,
    pub cdf: StepCdf,
}

/// Local variation distribution of a discretely observed curve.
///
/// Jumps sit at `t_2, ..., t_r` with sizes `|v_{j+1} - v_j| / J`, where `J`
/// is the total variation along the observed grid.
pub fn discrete_variation_cdf(curve: &DiscreteCurve) -> Result<VariationSummary> {
    let v = curve.values();
    let masses: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let total: f64 = masses.iter().sum();
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(total > ZERO_VARIATION_RTOL * scale) {
        return Err(Error::ZeroVariation { curve: None });
    }
    let cdf = StepCdf::new(
        curve.grid()[1..].to_vec(),
        normalized_cumsum(&masses, total),
    )?;
    Ok(VariationSummary {
        total_variation: total,
        cdf,
    })
}

/// How a quantile segment is interpolated between its end values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SegmentKind {
    Step,
    Linear,
}

/// Nondecreasing, left-continuous function on `[0, 1]` with `Q(0) = 0`.
///
/// Segment `k` covers `(knots[k], knots[k + 1]]`; it starts at `start[k]`
/// (the right limit at `knots[k]`) and ends at `end[k] = Q(knots[k + 1])`.
/// Step segments have `start == end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFn {
    knots: Vec<f64>,
    start: Vec<f64>,
    end: Vec<f64>,
    kinds: Vec<SegmentKind>,
}

impl QuantileFn {
    pub fn from_segments(knots: Vec<f64>, start: Vec<f64>, end: Vec<f64>) -> Result<Self> {
        let m = start.len();
        if m == 0 || knots.len() != m + 1 || end.len() != m {
            return Err(Error::InvalidArgument(
                "quantile segments are inconsistent".into(),
            ));
        }
        if knots[0] != 0.0 || knots[m] != 1.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "quantile knots must increase strictly from 0 to 1".into(),
            ));
        }
        let mut prev = 0.0;
        for k in 0..m {
            if !(start[k] >= prev && end[k] >= start[k] && end[k] <= 1.0) {
                return Err(Error::InvalidArgument(
                    "quantile values must be nondecreasing in [0, 1]".into(),
                ));
            }
            prev = end[k];
        }
        let kinds = start
            .iter()
            .zip(&end)
            .map(|(a, b)| {
                if a == b {
                    SegmentKind::Step
                } else {
                    SegmentKind::Linear
                }
            })
            .collect();
        Ok(Self {
            knots,
            start,
            end,
            kinds,
        })
    }

    /// Left-continuous step function: `values[k]` on `(knots[k], knots[k + 1]]`.
    pub fn step(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_segments(knots, values.clone(), values)
    }

    /// Continuous piecewise-linear function through `(us[k], vs[k])`.
    pub fn linear(us: &[f64], vs: &[f64]) -> Result<Self> {
        if us.len() < 2 || us.len() != vs.len() {
            return Err(Error::InvalidArgument(
                "need at least two matching samples".into(),
            ));
        }
        Self::from_segments(us.to_vec(), vs[..vs.len() - 1].to_vec(), vs[1..].to_vec())
    }

    /// Piecewise-linear interpolant of `f` on `n` equispaced knots.
    pub fn linear_from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let us = crate::curve::uniform_grid(n);
        let vs: Vec<f64> = us.iter().map(|&u| f(u)).collect();
        Self::linear(&us, &vs)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn kinds(&self) -> &[SegmentKind] {
        &self.kinds
    }

    /// Right limits at the left knot of each segment.
    pub fn starts(&self) -> &[f64] {
        &self.start
    }

    /// Values at the right knot of each segment.
    pub fn ends(&self) -> &[f64] {
        &self.end
    }

    pub fn num_segments(&self) -> usize {
        self.start.len()
    }

    pub fn is_step(&self) -> bool {
        self.kinds.iter().all(|k| *k == SegmentKind::Step)
    }

    /// Largest distance between consecutive knots.
    pub fn max_knot_gap(&self) -> f64 {
        crate::curve::max_gap(&self.knots)
    }

    fn seg_value(&self, seg: usize, u: f64) -> f64 {
        let (a, b) = (self.start[seg], self.end[seg]);
        if a == b {
            return a;
        }
        let (u0, u1) = (self.knots[seg], self.knots[seg + 1]);
        if u >= u1 {
            return b;
        }
        a + (b - a) * ((u - u0) / (u1 - u0))
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let u = u.min(1.0);
        let k = self.knots.partition_point(|&x| x < u);
        self.seg_value(k - 1, u)
    }

    /// `Q(u+)`, the right limit.
    pub fn right_limit(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return *self.end.last().unwrap();
        }
        let u = u.max(0.0);
        let seg = self.knots.partition_point(|&x| x <= u) - 1;
        if u == self.knots[seg] {
            self.start[seg]
        } else {
            self.seg_value(seg, u)
        }
    }

    /// Values at the ends of the sub-interval `(lo, hi]`, which must lie
    /// inside a single segment; `seg` is advanced monotonically.
    fn values_on(&self, lo: f64, hi: f64, seg: &mut usize) -> (f64, f64) {
        while self.knots[*seg + 1] < hi {
            *seg += 1;
        }
        let s = *seg;
        let left = if lo == self.knots[s] {
            self.start[s]
        } else {
            self.seg_value(s, lo)
        };
        (left, self.seg_value(s, hi))
    }
}

/// Anything that can be read as a quantile function.
pub trait ToQuantile {
    fn to_quantile(&self) -> Cow<'_, QuantileFn>;
}

impl ToQuantile for QuantileFn {
    fn to_quantile(&self) -> Cow<'_, QuantileFn> {
        Cow::Borrowed(self)
    }
}

impl ToQuantile for StepCdf {
    fn to_quantile(&self) -> Cow<'_, QuantileFn> {
        Cow::Owned(generalized_inverse(self))
    }
}

/// `G⁻(t) = inf{u : G(u) ≥ t}`, with `G⁻(0) = 0`.
pub fn generalized_inverse(g: &StepCdf) -> QuantileFn {
    let mut knots = vec![0.0];
    let mut values = Vec::with_capacity(g.cum_values.len());
    let mut prev = 0.0;
    for (&x, &c) in g.jump_locations.iter().zip(&g.cum_values) {
        if c > prev {
            knots.push(c);
            values.push(x);
            prev = c;
        }
    }
    QuantileFn::step(knots, values).expect("inverse of a valid step cdf is a valid quantile")
}

/// Pointwise mean of quantile functions, represented exactly on the union
/// of all breakpoints and `eval_grid`.
pub fn mean_quantile(qs: &[QuantileFn], eval_grid: &[f64]) -> Result<QuantileFn> {
    if qs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut knots: Vec<f64> = qs
        .iter()
        .flat_map(|q| q.knots.iter().copied())
        .chain(eval_grid.iter().map(|u| u.clamp(0.0, 1.0)))
        .collect();
    knots.sort_unstable_by(f64::total_cmp);
    knots.dedup();
    if knots.len() > MAX_MEAN_BREAKPOINTS {
        knots = crate::curve::thin_grid(&knots, MAX_MEAN_BREAKPOINTS);
    }
    let n = qs.len() as f64;
    let all_step = qs.iter().all(QuantileFn::is_step);

    let pairs: Vec<(f64, f64)> = knots
        .par_windows(2)
        .map_init(
            || vec![0.0; qs.len()],
            |buf, w| {
                let (lo, hi) = (w[0], w[1]);
                for (slot, q) in buf.iter_mut().zip(qs) {
                    *slot = q.eval(hi);
                }
                let end = sorted_sum(buf) / n;
                let start = if all_step {
                    end
                } else {
                    for (slot, q) in buf.iter_mut().zip(qs) {
                        *slot = q.right_limit(lo);
                    }
                    sorted_sum(buf) / n
                };
                (start, end)
            },
        )
        .collect();

    // Rounding in the means can break monotonicity by an ulp.
    let mut start = Vec::with_capacity(pairs.len());
    let mut end = Vec::with_capacity(pairs.len());
    let mut running = 0.0_f64;
    for (a, b) in pairs {
        running = running.max(a);
        start.push(running);
        running = running.max(b).min(1.0);
        end.push(running);
    }
    QuantileFn::from_segments(knots, start, end)
}

/// Generalized inverse of a quantile function, as a step cdf.
///
/// Each segment `(u_k, u_{k+1}]` contributes mass `u_{k+1} - u_k` at
/// `Q(u_{k+1})`; this is exact for step segments and within one knot gap
/// for linear ones.
pub fn quantile_to_cdf(q: &QuantileFn) -> StepCdf {
    let mut locations: Vec<f64> = Vec::with_capacity(q.end.len());
    let mut cum: Vec<f64> = Vec::with_capacity(q.end.len());
    for (k, &y) in q.end.iter().enumerate() {
        let c = q.knots[k + 1];
        match locations.last() {
            Some(&last) if last == y => *cum.last_mut().unwrap() = c,
            _ => {
                locations.push(y);
                cum.push(c);
            }
        }
    }
    StepCdf::new(locations, cum).expect("inverse of a valid quantile is a valid step cdf")
}

/// 2-Wasserstein distance `sqrt(∫ (F⁻ - G⁻)²)`, integrated exactly over the
/// merged breakpoints.
pub fn wasserstein2(f: &impl ToQuantile, g: &impl ToQuantile) -> f64 {
    wasserstein2_sq(f, g).sqrt()
}

/// Squared 2-Wasserstein distance.
pub fn wasserstein2_sq(f: &impl ToQuantile, g: &impl ToQuantile) -> f64 {
    let (a, b) = (f.to_quantile(), g.to_quantile());
    let (a, b) = (a.as_ref(), b.as_ref());
    let (mut i, mut j) = (1, 1);
    let (mut sa, mut sb) = (0, 0);
    let mut lo = 0.0;
    let mut total = 0.0;
    while i < a.knots.len() && j < b.knots.len() {
        let hi = a.knots[i].min(b.knots[j]);
        let (a0, a1) = a.values_on(lo, hi, &mut sa);
        let (b0, b1) = b.values_on(lo, hi, &mut sb);
        let (d0, d1) = (a0 - b0, a1 - b1);
        total += (hi - lo) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        if a.knots[i] == hi {
            i += 1;
        }
        if b.knots[j] == hi {
            j += 1;
        }
        lo = hi;
    }
    total.max(0.0)
}

/// `Q(F(t))` at each evaluation point.
pub fn compose_quantile_cdf(q: &QuantileFn, f: &StepCdf, eval_points: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = eval_points.iter().map(|&t| q.eval(f.eval(t))).collect();
    // Both maps are monotone; guard the composition against ulp reversals.
    for k in 1..out.len() {
        if out[k] < out[k - 1] && eval_points[k] >= eval_points[k - 1] {
            out[k] = out[k - 1];
        }
    }
    out
}
