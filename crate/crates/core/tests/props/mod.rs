//! Property checks shared by the core test targets and the acceptance suite.

#![allow(dead_code)]

use std::fmt::Debug;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use varireg::curve::{uniform_grid, union_grid, DiscreteCurve};
use varireg::registration::{
    estimate_warps_discrete, pairwise_warp_oracle, register_discrete, DiscreteOptions,
};
use varireg::smoothing::{local_poly, monotone_smooth_warp, nadaraya_watson, SmootherConfig};
use varireg::variation::{
    compose_quantile_cdf, discrete_variation_cdf, generalized_inverse, mean_quantile,
    quantile_to_cdf, wasserstein2, QuantileFn, StepCdf,
};
use varireg::WarpMap;

type CheckResult = Result<(), TestCaseError>;

/// Runs `cases` deterministic cases of a property.
pub fn run<S>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> CheckResult,
) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

// ---- strategies ----

/// Random step cdf: up to 20 distinct jump locations on a 1/1024 lattice,
/// nonnegative masses with at least one positive.
pub fn step_cdf() -> impl Strategy<Value = StepCdf> {
    prop::collection::btree_set(0u32..=1024, 1..20)
        .prop_flat_map(|locs| {
            let k = locs.len();
            (
                Just(locs),
                prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.001f64..1.0], k),
            )
        })
        .prop_filter("needs positive mass", |(_, m)| m.iter().any(|x| *x > 0.0))
        .prop_map(|(locs, masses)| {
            let xs: Vec<f64> = locs.into_iter().map(|l| l as f64 / 1024.0).collect();
            StepCdf::from_masses(xs, &masses).unwrap()
        })
}

/// Sample of 2–6 rough curves sharing a random strictly increasing grid.
pub fn sample() -> impl Strategy<Value = Vec<DiscreteCurve>> {
    (5usize..60, 2usize..7)
        .prop_flat_map(|(r, n)| {
            (
                prop::collection::vec(0.1f64..1.0, r),
                prop::collection::vec(prop::collection::vec(-1.0f64..1.0, r), n),
            )
        })
        .prop_filter_map("nonconstant curves", |(steps, values)| {
            let total: f64 = steps.iter().sum();
            let mut acc = 0.0;
            let grid: Vec<f64> = steps
                .iter()
                .map(|s| {
                    let t = acc / total;
                    acc += s;
                    t
                })
                .collect();
            let curves: Option<Vec<DiscreteCurve>> = values
                .into_iter()
                .map(|v| DiscreteCurve::new(grid.clone(), v).ok())
                .collect();
            let curves = curves?;
            curves
                .iter()
                .all(|c| discrete_variation_cdf(c).is_ok())
                .then_some(curves)
        })
}

/// Random nondecreasing warp samples on a random grid, flat runs included.
pub fn warp_map() -> impl Strategy<Value = WarpMap> {
    (3usize..40)
        .prop_flat_map(|r| {
            (
                prop::collection::vec(0.05f64..1.0, r - 1),
                prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0], r - 1),
            )
        })
        .prop_filter_map("needs increase", |(dt, dv)| {
            let (st, sv): (f64, f64) = (dt.iter().sum(), dv.iter().sum());
            if !(sv > 0.0) {
                return None;
            }
            let cum = |d: &[f64], s: f64| -> Vec<f64> {
                let mut acc = 0.0;
                let mut out = vec![0.0];
                out.extend(d.iter().map(|x| {
                    acc += x;
                    (acc / s).min(1.0)
                }));
                *out.last_mut().unwrap() = 1.0;
                out
            };
            WarpMap::new(cum(&dt, st), cum(&dv, sv)).ok()
        })
}

// ---- helpers ----

fn cdfs(sample: &[DiscreteCurve]) -> Vec<StepCdf> {
    sample
        .iter()
        .map(|c| discrete_variation_cdf(c).unwrap().cdf)
        .collect()
}

fn merged_gap(cdfs: &[StepCdf]) -> f64 {
    let mut pts = union_grid(cdfs.iter().map(|c| c.jump_locations()));
    pts.insert(0, 0.0);
    pts.push(1.0);
    pts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

fn probe_points() -> Vec<f64> {
    (0..=128)
        .map(|k| k as f64 / 128.0)
        .chain((0..=100).map(|k| k as f64 / 100.0))
        .collect()
}

fn dense(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

// ---- step cdf algebra ----

pub fn galois_connection(g: StepCdf) -> CheckResult {
    let q = generalized_inverse(&g);
    let mut ts = probe_points();
    ts.extend_from_slice(g.jump_locations());
    let mut us: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();
    for &c in g.cum_values() {
        us.extend([c, c - 1e-12, c + 1e-12]);
    }
    us.retain(|u| *u > 0.0 && *u <= 1.0);
    for &u in &us {
        for &t in &ts {
            prop_assert_eq!(q.eval(u) <= t, u <= g.eval(t), "u = {}, t = {}", u, t);
        }
        prop_assert!(g.eval(q.eval(u)) >= u);
    }
    for &t in &ts {
        prop_assert!(q.eval(g.eval(t)) <= t);
    }
    Ok(())
}

pub fn inverse_round_trip(g: StepCdf) -> CheckResult {
    let back = quantile_to_cdf(&generalized_inverse(&g));
    for t in probe_points() {
        prop_assert_eq!(back.eval(t), g.eval(t));
    }
    Ok(())
}

pub fn wasserstein_pseudometric((f, g, h): (StepCdf, StepCdf, StepCdf)) -> CheckResult {
    let (fg, gf) = (wasserstein2(&f, &g), wasserstein2(&g, &f));
    prop_assert!(fg >= 0.0);
    prop_assert_eq!(wasserstein2(&f, &f), 0.0);
    prop_assert!((fg - gf).abs() <= 1e-12);
    prop_assert!(fg <= wasserstein2(&f, &h) + wasserstein2(&h, &g) + 1e-12);
    Ok(())
}

pub fn mean_quantile_bounded(cdfs: Vec<StepCdf>) -> CheckResult {
    let qs: Vec<QuantileFn> = cdfs.iter().map(generalized_inverse).collect();
    let m = mean_quantile(&qs, &[]).unwrap();
    let mut prev = 0.0;
    for k in 1..=1000 {
        let u = k as f64 / 1000.0;
        let v = m.eval(u);
        let lo = qs.iter().map(|q| q.eval(u)).fold(f64::INFINITY, f64::min);
        let hi = qs
            .iter()
            .map(|q| q.eval(u))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        prop_assert!(v >= prev);
        prev = v;
    }
    let f = quantile_to_cdf(&m);
    prop_assert_eq!(*f.cum_values().last().unwrap(), 1.0);
    Ok(())
}

pub fn composition_monotone((f, g): (StepCdf, StepCdf)) -> CheckResult {
    let v = compose_quantile_cdf(&generalized_inverse(&f), &g, &dense(500));
    prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
    prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    Ok(())
}

// ---- warp estimation ----

pub fn power_of_two_affine((s, k, negate): (Vec<DiscreteCurve>, i32, bool)) -> CheckResult {
    let a = if negate {
        -(2f64.powi(k))
    } else {
        2f64.powi(k)
    };
    let grid = s[0].grid().to_vec();
    let scaled: Vec<DiscreteCurve> = s.iter().map(|c| c.map_values(|v| a * v).unwrap()).collect();
    let base = estimate_warps_discrete(&cdfs(&s), &grid).unwrap();
    let other = estimate_warps_discrete(&cdfs(&scaled), &grid).unwrap();
    prop_assert_eq!(base, other);
    Ok(())
}

pub fn dyadic_affine((r, raw, k, shift): (usize, Vec<Vec<i32>>, i32, i32)) -> CheckResult {
    // Values on a 2^-10 lattice: scaling by 2^k and shifting by a lattice
    // point are exact in floating point.
    let grid = uniform_grid(r);
    let lift = |a: f64, b: f64| -> Option<Vec<DiscreteCurve>> {
        raw.iter()
            .map(|v| {
                DiscreteCurve::new(
                    grid.clone(),
                    v[..r]
                        .iter()
                        .map(|&x| a * (x as f64 / 1024.0) + b)
                        .collect(),
                )
                .ok()
            })
            .collect()
    };
    let base = lift(1.0, 0.0).unwrap();
    prop_assume!(base.iter().all(|c| discrete_variation_cdf(c).is_ok()));
    let moved = lift(2f64.powi(k), shift as f64 / 1024.0).unwrap();
    let w0 = estimate_warps_discrete(&cdfs(&base), &grid).unwrap();
    let w1 = estimate_warps_discrete(&cdfs(&moved), &grid).unwrap();
    prop_assert_eq!(w0, w1);
    Ok(())
}

pub fn dyadic_affine_input() -> impl Strategy<Value = (usize, Vec<Vec<i32>>, i32, i32)> {
    (
        5usize..40,
        prop::collection::vec(prop::collection::vec(-1024i32..1024, 40), 2..5),
        -3i32..4,
        -512i32..512,
    )
}

pub fn general_affine((s, a, b): (Vec<DiscreteCurve>, f64, f64)) -> CheckResult {
    let grid = s[0].grid().to_vec();
    let moved: Vec<DiscreteCurve> = s
        .iter()
        .map(|c| c.map_values(|v| a * v + b).unwrap())
        .collect();
    let w0 = estimate_warps_discrete(&cdfs(&s), &grid).unwrap();
    let w1 = estimate_warps_discrete(&cdfs(&moved), &grid).unwrap();
    let gap = s[0].max_gap();
    for (x, y) in w0.warps.iter().zip(&w1.warps) {
        prop_assert!(x.sup_distance(|t| y.eval(t), &grid) <= gap + 1e-12);
    }
    Ok(())
}

pub fn permutation_equivariance((s, rot): (Vec<DiscreteCurve>, usize)) -> CheckResult {
    let n = s.len();
    let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).rev().collect();
    let permuted: Vec<DiscreteCurve> = perm.iter().map(|&i| s[i].clone()).collect();
    let a = register_discrete(&s, &DiscreteOptions::default()).unwrap();
    let b = register_discrete(&permuted, &DiscreteOptions::default()).unwrap();
    prop_assert_eq!(&a.template_cdf, &b.template_cdf);
    prop_assert_eq!(&a.mean, &b.mean);
    for (j, &i) in perm.iter().enumerate() {
        prop_assert_eq!(&a.warps[i], &b.warps[j]);
        prop_assert_eq!(&a.inverse_warps[i], &b.inverse_warps[j]);
        prop_assert_eq!(&a.registered[i], &b.registered[j]);
    }
    Ok(())
}

pub fn pairwise_oracle(s: Vec<DiscreteCurve>) -> CheckResult {
    let c = cdfs(&s);
    let grid = s[0].grid().to_vec();
    let est = estimate_warps_discrete(&c, &grid).unwrap();
    let gap = merged_gap(&c);
    let probe: Vec<f64> = dense(400).into_iter().chain(grid.iter().copied()).collect();
    for i in 0..s.len() {
        let p = pairwise_warp_oracle(&c, i, &grid).unwrap();
        prop_assert!(p.sup_distance(|t| est.warps[i].eval(t), &probe) <= gap + 1e-12);
    }
    Ok(())
}

pub fn emitted_warps_monotone((s, smooth): (Vec<DiscreteCurve>, bool)) -> CheckResult {
    let res = register_discrete(
        &s,
        &DiscreteOptions {
            smooth_warps: smooth,
            ..Default::default()
        },
    )
    .unwrap();
    let probe = dense(2000);
    for w in res.warps.iter().chain(&res.inverse_warps) {
        prop_assert_eq!(w.eval(0.0), 0.0);
        prop_assert_eq!(w.eval(1.0), 1.0);
        let v = w.eval_many(&probe);
        prop_assert!(v.windows(2).all(|p| p[1] >= p[0]));
    }
    Ok(())
}

pub fn identical_curves_identity((s, n): (Vec<DiscreteCurve>, usize)) -> CheckResult {
    let copies = vec![s[0].clone(); n];
    let res = register_discrete(&copies, &DiscreteOptions::default()).unwrap();
    let gap = s[0].max_gap();
    for w in &res.warps {
        prop_assert!(w.sup_distance(|t| t, s[0].grid()) <= gap + 1e-12);
    }
    Ok(())
}

// ---- smoothing ----

/// Polynomial coefficients, a sorted random grid and a bandwidth.
pub fn poly_input() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, f64)> {
    (
        0usize..=2,
        prop::collection::vec(-5.0f64..5.0, 3),
        prop::collection::vec(0.0f64..1.0, 8..80),
        0.05f64..0.6,
    )
}

pub fn local_poly_reproduces_polynomials(
    (degree, coef, mut grid, h): (usize, Vec<f64>, Vec<f64>, f64),
) -> CheckResult {
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    prop_assume!(grid.len() >= 4);
    let p = |t: f64| {
        (0..=degree)
            .map(|k| coef[k] * t.powi(k as i32))
            .sum::<f64>()
    };
    let dp = |t: f64| {
        (1..=degree)
            .map(|k| k as f64 * coef[k] * t.powi(k as i32 - 1))
            .sum::<f64>()
    };
    let curve = DiscreteCurve::from_fn(&grid, p).unwrap();
    let scale = 1.0 + coef.iter().map(|c| c.abs()).sum::<f64>();
    let pts = dense(50);
    for fit_degree in degree..=2 {
        let orders: &[usize] = if fit_degree == 2 { &[0, 1] } else { &[0] };
        for &d in orders {
            let cfg = SmootherConfig::new(h, fit_degree, d).unwrap();
            for &t in &pts {
                let Ok(v) = local_poly(&curve, &cfg, &[t]) else {
                    continue;
                };
                let (want, tol) = if d == 0 {
                    (p(t), 1e-8 * scale)
                } else {
                    (dp(t), 1e-6 * scale / h)
                };
                prop_assert!(
                    (v[0] - want).abs() <= tol,
                    "deg {} d {} t {}: {} vs {}",
                    fit_degree,
                    d,
                    t,
                    v[0],
                    want
                );
            }
        }
    }
    if degree == 0 {
        for &t in &pts {
            if let Ok(v) = nadaraya_watson(&curve, h, &[t]) {
                prop_assert!((v[0] - coef[0]).abs() <= 1e-12 * scale);
            }
        }
    }
    Ok(())
}

pub fn smoothed_warps_monotone((w, knots): (WarpMap, usize)) -> CheckResult {
    let s = monotone_smooth_warp(&w, knots);
    prop_assert_eq!(s.eval(0.0), 0.0);
    prop_assert_eq!(s.eval(1.0), 1.0);
    let v = s.eval_many(&dense(5000));
    prop_assert!(v.windows(2).all(|p| p[1] >= p[0]));
    prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    Ok(())
}

// ---- suites ----

pub fn variation_suite() -> Result<(), String> {
    run(1000, step_cdf(), galois_connection)?;
    run(1000, step_cdf(), inverse_round_trip)?;
    run(
        300,
        (step_cdf(), step_cdf(), step_cdf()),
        wasserstein_pseudometric,
    )?;
    run(
        300,
        prop::collection::vec(step_cdf(), 1..6),
        mean_quantile_bounded,
    )?;
    run(300, (step_cdf(), step_cdf()), composition_monotone)
}

pub fn affine_suite() -> Result<(), String> {
    run(
        200,
        (sample(), -4i32..5, any::<bool>()),
        power_of_two_affine,
    )?;
    run(200, dyadic_affine_input(), dyadic_affine)?;
    run(
        200,
        (
            sample(),
            prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
            -5.0f64..5.0,
        ),
        general_affine,
    )
}

pub fn registration_suite() -> Result<(), String> {
    run(200, (sample(), 0usize..7), permutation_equivariance)?;
    run(200, sample(), pairwise_oracle)?;
    run(200, (sample(), any::<bool>()), emitted_warps_monotone)?;
    run(200, (sample(), 1usize..5), identical_curves_identity)
}

pub fn smoothing_suite() -> Result<(), String> {
    run(300, poly_input(), local_poly_reproduces_polynomials)?;
    run(300, (warp_map(), 2usize..30), smoothed_warps_monotone)
}
