//! The `register`, `simulate` and `diagnose` subcommands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use varireg::curve::{interp_linear, uniform_grid};
use varireg::diagnostics::{
    evaluate_against_truth, rate_check, z_statistic, GroundTruth, MeanMode, RegistrationReport,
};
use varireg::fpca::{self, FpcaSummary};
use varireg::registration::{RegistrationMetadata, RegistrationResult, DEFAULT_DERIV_GRID};
use varireg::simulate::{
    make_truth_bundle, AnalyticWarp, LatentModel, LatentModelConfig, SineMixtureWarp, WarpLawConfig,
};
use varireg::variation::quantile_to_cdf;
use varireg::{
    register_complete, register_discrete, register_noisy, DiscreteCurve, DiscreteOptions,
    NoisyOptions, QuantileFn, Regime, StepCdf, WarpMap,
};

use crate::config::{RegimeArg, RunConfig};
use crate::failure::{CliResult, Failure, EXIT_BANDWIDTH};
use crate::io::{self, num, InputFormat, TimeTransform};

pub const DEFAULT_EIGEN: usize = 3;

/// Contents of `report.json` written by `register`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterReport {
    pub regime: Regime,
    pub curve_ids: Vec<String>,
    pub input_format: InputFormat,
    /// Set when input times were rescaled onto `[0, 1]`.
    pub time_transform: Option<TimeTransform>,
    pub output_grid_size: usize,
    pub metadata: RegistrationMetadata,
    pub eigenvalues: Vec<f64>,
    pub explained_ratios: Vec<f64>,
    pub flags: RegisterFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterFlags {
    pub inverse_endpoint_patched: bool,
    pub smoothed_warps: bool,
    pub low_signal_curves: Vec<String>,
    /// The registered sample has no variance, so explained ratios are 0.
    pub trace_zero: bool,
}

/// Contents of `simulate.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationRecord {
    pub model: LatentModelConfig,
    pub warp_law: WarpLawConfig,
    pub n: usize,
    pub seed: u64,
    pub has_f_phi: bool,
    pub curves: Vec<SimulatedCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatedCurve {
    pub id: String,
    pub coefficients: Vec<f64>,
    pub warp: SineMixtureWarp,
}

// ---- register ----

pub fn register(cfg: &RunConfig) -> CliResult<()> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| Failure::parse("--input is required"))?;
    let out = cfg.out_dir()?;
    let sample = io::read_sample(input)?;
    let regime = cfg.regime.unwrap_or(RegimeArg::Discrete);
    warn_unused(cfg, regime);
    let output_grid = match cfg.output_grid_size {
        Some(m) if m >= DiscreteCurve::MIN_POINTS => Some(uniform_grid(m)),
        Some(m) => {
            return Err(Failure::parse(format!(
                "output grid size must be at least 3, got {m}"
            )))
        }
        None => None,
    };
    let result = match regime {
        RegimeArg::Complete => register_complete(&sample.curves, output_grid),
        RegimeArg::Discrete => register_discrete(
            &sample.curves,
            &DiscreteOptions {
                bandwidth: cfg.bandwidth,
                smooth_warps: cfg.smooth_warps.unwrap_or(false),
                n_knots: cfg.knots.unwrap_or(DiscreteOptions::default().n_knots),
                output_grid,
            },
        ),
        RegimeArg::Noisy => register_noisy(
            &sample.curves,
            &NoisyOptions {
                h1: cfg.h1,
                h2: cfg.h2,
                auto: cfg.auto_bandwidth.unwrap_or(true),
                output_grid,
                ..Default::default()
            },
        ),
    }
    .map_err(|e| with_bandwidth_hint(Failure::from_lib(e, &sample.ids), &sample.curves, regime))?;
    let summary = fpca::analyze(&result.registered, cfg.eigen.unwrap_or(DEFAULT_EIGEN))
        .map_err(|e| Failure::from_lib(e, &sample.ids))?;

    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    write_registration(out, &sample.ids, &result, &summary)?;
    let flags = RegisterFlags {
        inverse_endpoint_patched: result.metadata.inverse_endpoint_patched,
        smoothed_warps: result.metadata.smoothed_warps,
        low_signal_curves: result
            .metadata
            .low_signal_curves
            .iter()
            .map(|&i| sample.ids[i].clone())
            .collect(),
        trace_zero: summary.decomposition.trace_zero,
    };
    let report = RegisterReport {
        regime: result.regime,
        curve_ids: sample.ids,
        input_format: sample.format,
        time_transform: sample.transform,
        output_grid_size: result.output_grid.len(),
        metadata: result.metadata,
        eigenvalues: summary.decomposition.eigenvalues,
        explained_ratios: summary.decomposition.explained_ratios,
        flags,
    };
    io::write_json(&out.join("report.json"), &report)
}

fn warn_unused(cfg: &RunConfig, regime: RegimeArg) {
    let unused: &[(&str, bool)] = match regime {
        RegimeArg::Complete => &[
            ("bandwidth", cfg.bandwidth.is_some()),
            ("h1", cfg.h1.is_some()),
            ("h2", cfg.h2.is_some()),
            ("smooth-warps", cfg.smooth_warps.is_some()),
        ],
        RegimeArg::Discrete => &[("h1", cfg.h1.is_some()), ("h2", cfg.h2.is_some())],
        RegimeArg::Noisy => &[
            ("bandwidth", cfg.bandwidth.is_some()),
            ("smooth-warps", cfg.smooth_warps.is_some()),
        ],
    };
    for (name, _) in unused.iter().filter(|(_, set)| *set) {
        eprintln!("warning: --{name} has no effect in the {regime:?} regime");
    }
}

/// Distance from `t` to its `k`-th nearest grid point.
fn kth_nearest(grid: &[f64], t: f64, k: usize) -> f64 {
    let mut hi = grid.partition_point(|&x| x < t);
    let mut lo = hi;
    let mut d = f64::INFINITY;
    for _ in 0..k.min(grid.len()) {
        let left = (lo > 0).then(|| t - grid[lo - 1]);
        let right = (hi < grid.len()).then(|| grid[hi] - t);
        d = match (left, right) {
            (Some(l), Some(r)) if l <= r => {
                lo -= 1;
                l
            }
            (Some(l), None) => {
                lo -= 1;
                l
            }
            (_, Some(r)) => {
                hi += 1;
                r
            }
            (None, None) => break,
        };
    }
    d
}

/// Smallest bandwidth whose open window holds `k` points of every curve at
/// every evaluation point.
fn min_bandwidth(curves: &[DiscreteCurve], eval: &[f64], k: usize) -> f64 {
    curves
        .iter()
        .flat_map(|c| eval.iter().map(move |&t| kth_nearest(c.grid(), t, k)))
        .fold(0.0, f64::max)
}

fn with_bandwidth_hint(
    mut failure: Failure,
    curves: &[DiscreteCurve],
    regime: RegimeArg,
) -> Failure {
    if failure.code != EXIT_BANDWIDTH {
        return failure;
    }
    let dense = uniform_grid(2001);
    let bump = |h: f64| h * 1.001;
    let hint = match regime {
        RegimeArg::Noisy => format!(
            "try --h1 ≥ {:.4e} and --h2 ≥ {:.4e}",
            bump(min_bandwidth(curves, &uniform_grid(DEFAULT_DERIV_GRID), 3)),
            bump(min_bandwidth(curves, &dense, 2)),
        ),
        _ => format!(
            "try --bandwidth ≥ {:.4e}",
            bump(min_bandwidth(curves, &dense, 1))
        ),
    };
    failure.message = format!("{}; {hint}", failure.message);
    failure
}

fn write_registration(
    out: &Path,
    ids: &[String],
    result: &RegistrationResult,
    summary: &FpcaSummary,
) -> CliResult<()> {
    let grid = &result.output_grid;
    let mut w = io::writer(
        &out.join("warps.csv"),
        &["curve_id", "t", "warp_value", "inverse_warp_value"],
    )?;
    for (i, id) in ids.iter().enumerate() {
        for &t in grid {
            w.write_record([
                id.clone(),
                num(t),
                num(result.warps[i].eval(t)),
                num(result.inverse_warps[i].eval(t)),
            ])?;
        }
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let mut w = io::writer(&out.join("registered.csv"), &["curve_id", "t", "value"])?;
    for (id, c) in ids.iter().zip(&result.registered) {
        for (&t, &v) in c.grid().iter().zip(c.values()) {
            w.write_record([id.clone(), num(t), num(v)])?;
        }
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let mut w = io::writer(&out.join("mean.csv"), &["t", "value"])?;
    for (&t, &v) in grid.iter().zip(result.mean.values()) {
        w.write_record([num(t), num(v)])?;
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let dec = &summary.decomposition;
    let m = dec.eigenfunctions.len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|k| format!("phi_{k}")));
    let mut w = io::writer(
        &out.join("eigen.csv"),
        &header.iter().map(String::as_str).collect::<Vec<_>>(),
    )?;
    for (j, &t) in dec.grid.iter().enumerate() {
        let mut row = vec![num(t)];
        row.extend(dec.eigenfunctions.iter().map(|phi| num(phi[j])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let mut header = vec!["curve_id".to_string()];
    header.extend((1..=m).map(|k| format!("score_{k}")));
    let mut w = io::writer(
        &out.join("scores.csv"),
        &header.iter().map(String::as_str).collect::<Vec<_>>(),
    )?;
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(summary.scores.iter().map(|s| num(s[i])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let q = &result.template_quantile;
    let mut w = io::writer(
        &out.join("template.csv"),
        &["u_left", "u_right", "start", "end"],
    )?;
    for k in 0..q.num_segments() {
        w.write_record([
            num(q.knots()[k]),
            num(q.knots()[k + 1]),
            num(q.starts()[k]),
            num(q.ends()[k]),
        ])?;
    }
    w.flush().map_err(|e| Failure::io(out, e))
}

// ---- simulate ----

/// Parses a model name with optional inline `key=value` parameters; the
/// `--c`, `--r-scale` and `--rank` options override inline values.
pub fn parse_model(cfg: &RunConfig) -> CliResult<LatentModel> {
    let spec = cfg.model.as_deref().unwrap_or("model1");
    let mut tokens = spec
        .split(|ch: char| ch.is_whitespace() || ch == ',' || ch == ':')
        .filter(|s| !s.is_empty());
    let name = tokens.next().unwrap_or("model1").to_ascii_lowercase();
    let (mut c, mut r_scale, mut rank) = (None, None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Failure::parse(format!("model parameter '{tok}' is not key=value")))?;
        let bad = || Failure::parse(format!("model parameter '{tok}' has an invalid value"));
        match key {
            "c" => c = Some(value.parse::<f64>().map_err(|_| bad())?),
            "r_scale" | "r" => r_scale = Some(value.parse::<f64>().map_err(|_| bad())?),
            "rank" => rank = Some(value.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(Failure::parse(format!("unknown model parameter '{key}'"))),
        }
    }
    let model = match name.as_str() {
        "model1" => LatentModel::Model1,
        "model2" => LatentModel::Model2,
        "rank2" => LatentModel::Rank2,
        "rank3" => LatentModel::Rank3,
        "breakdown" => LatentModel::Breakdown {
            c: cfg
                .c
                .or(c)
                .ok_or_else(|| Failure::parse("the breakdown model needs c"))?,
            r_scale: cfg
                .r_scale
                .or(r_scale)
                .ok_or_else(|| Failure::parse("the breakdown model needs r_scale"))?,
            rank: cfg.rank.or(rank).unwrap_or(2),
        },
        other => {
            return Err(Failure::parse(format!(
                "unknown model '{other}' (expected model1, model2, rank2, rank3 or breakdown)"
            )))
        }
    };
    model
        .validate()
        .map_err(|e| Failure::parse(e.to_string()))?;
    Ok(model)
}

fn warp_law(cfg: &RunConfig) -> WarpLawConfig {
    let d = WarpLawConfig::default();
    WarpLawConfig {
        components: cfg.warp_components.unwrap_or(d.components),
        beta: cfg.beta.unwrap_or(d.beta),
        lambda: cfg.lambda.unwrap_or(d.lambda),
        identity: cfg.identity_warps.unwrap_or(d.identity),
    }
}

pub fn curve_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("curve_{i:0width$}")).collect()
}

pub fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let seed = cfg
        .seed
        .ok_or_else(|| Failure::parse("--seed is required for simulate"))?;
    let out = cfg.out_dir()?;
    let model = parse_model(cfg)?;
    let model_cfg = LatentModelConfig::new(model, cfg.r.unwrap_or(101), cfg.noise.unwrap_or(0.0));
    let law = warp_law(cfg);
    let n = cfg.n.unwrap_or(50);
    let ids = curve_ids(n);
    let bundle =
        make_truth_bundle(&model_cfg, &law, n, seed).map_err(|e| Failure::from_lib(e, &ids))?;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let grid = &bundle.grid;

    let mut header = vec!["t"];
    header.extend(ids.iter().map(String::as_str));
    let mut w = io::writer(&out.join("observed.csv"), &header)?;
    for (j, &t) in grid.iter().enumerate() {
        let mut row = vec![num(t)];
        row.extend(bundle.observed.iter().map(|c| num(c.values()[j])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let mut w = io::writer(&out.join("truth_latent.csv"), &["curve_id", "t", "value"])?;
    for (id, c) in ids.iter().zip(&bundle.latent_sampled) {
        for (&t, &v) in grid.iter().zip(c.values()) {
            w.write_record([id.clone(), num(t), num(v)])?;
        }
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let mut w = io::writer(
        &out.join("truth_warps.csv"),
        &["curve_id", "t", "warp_value", "inverse_warp_value"],
    )?;
    for (id, warp) in ids.iter().zip(&bundle.warps) {
        for &t in grid {
            w.write_record([id.clone(), num(t), num(warp.eval(t)), num(warp.inverse(t))])?;
        }
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let mut w = io::writer(&out.join("truth_fphi.csv"), &["t", "cdf"])?;
    if let Some(f) = &bundle.f_phi {
        for (&t, &c) in f.jump_locations().iter().zip(f.cum_values()) {
            w.write_record([num(t), num(c)])?;
        }
    }
    w.flush().map_err(|e| Failure::io(out, e))?;

    let record = SimulationRecord {
        model: model_cfg,
        warp_law: law,
        n,
        seed,
        has_f_phi: bundle.f_phi.is_some(),
        curves: ids
            .iter()
            .zip(bundle.latent.iter().zip(&bundle.warps))
            .map(|(id, (l, w))| SimulatedCurve {
                id: id.clone(),
                coefficients: l.coefficients.clone(),
                warp: w.clone(),
            })
            .collect(),
    };
    io::write_json(&out.join("simulate.json"), &record)
}

// ---- diagnose ----

fn curves_from_long(path: &Path, ids: &[String]) -> CliResult<Vec<DiscreteCurve>> {
    let groups = io::group_rows(io::read_table(path, &["curve_id", "t", "value"], true)?);
    check_ids(path, groups.iter().map(|g| &g.0), ids)?;
    groups
        .into_iter()
        .map(|(id, rows)| {
            DiscreteCurve::new(
                rows.iter().map(|r| r[0]).collect(),
                rows.iter().map(|r| r[1]).collect(),
            )
            .map_err(|e| Failure::parse(format!("{}: curve '{id}': {e}", path.display())))
        })
        .collect()
}

/// Per-curve `(t, warp, inverse)` columns of a warps file.
fn warps_from_file(path: &Path, ids: &[String]) -> CliResult<Vec<[Vec<f64>; 3]>> {
    let groups = io::group_rows(io::read_table(
        path,
        &["curve_id", "t", "warp_value", "inverse_warp_value"],
        true,
    )?);
    check_ids(path, groups.iter().map(|g| &g.0), ids)?;
    Ok(groups
        .into_iter()
        .map(|(_, rows)| [0, 1, 2].map(|k| rows.iter().map(|r| r[k]).collect()))
        .collect())
}

fn check_ids<'a>(
    path: &Path,
    found: impl Iterator<Item = &'a String>,
    expected: &[String],
) -> CliResult<()> {
    if found.ne(expected.iter()) {
        return Err(Failure::parse(format!(
            "{}: curve ids do not match the run's report",
            path.display()
        )));
    }
    Ok(())
}

fn warp_map(grid: &[f64], values: &[f64]) -> CliResult<WarpMap> {
    WarpMap::from_fn(grid, |t| interp_linear(grid, values, t))
        .map_err(|e| Failure::parse(format!("stored warp is invalid: {e}")))
}

/// Rebuilds the parts of a registration needed to score it against truth.
fn load_result(
    dir: &Path,
    report: &RegisterReport,
    registered: Vec<DiscreteCurve>,
) -> CliResult<RegistrationResult> {
    let ids = &report.curve_ids;
    let grid = registered[0].grid().to_vec();
    let warps = warps_from_file(&dir.join("warps.csv"), ids)?;
    if warps.iter().any(|w| w[0] != grid) {
        return Err(Failure::parse(
            "warps.csv and registered.csv use different grids",
        ));
    }
    let mean = io::read_table(&dir.join("mean.csv"), &["t", "value"], false)?;
    let mean = DiscreteCurve::new(
        mean.rows.iter().map(|r| r[0]).collect(),
        mean.rows.iter().map(|r| r[1]).collect(),
    )
    .map_err(|e| Failure::parse(format!("mean.csv: {e}")))?;
    let tpl = io::read_table(
        &dir.join("template.csv"),
        &["u_left", "u_right", "start", "end"],
        false,
    )?;
    if tpl.rows.is_empty() {
        return Err(Failure::parse("template.csv: no segments"));
    }
    let mut knots: Vec<f64> = tpl.rows.iter().map(|r| r[0]).collect();
    knots.push(tpl.rows.last().unwrap()[1]);
    let template_quantile = QuantileFn::from_segments(
        knots,
        tpl.rows.iter().map(|r| r[2]).collect(),
        tpl.rows.iter().map(|r| r[3]).collect(),
    )
    .map_err(|e| Failure::parse(format!("template.csv: {e}")))?;
    Ok(RegistrationResult {
        regime: report.regime,
        output_grid: grid.clone(),
        warps: warps
            .iter()
            .map(|w| warp_map(&grid, &w[1]))
            .collect::<CliResult<_>>()?,
        inverse_warps: warps
            .iter()
            .map(|w| warp_map(&grid, &w[2]))
            .collect::<CliResult<_>>()?,
        template_cdf: quantile_to_cdf(&template_quantile),
        template_quantile,
        registered,
        mean,
        metadata: report.metadata.clone(),
    })
}

fn load_truth(dir: &Path, ids: &[String]) -> CliResult<(SimulationRecord, GroundTruth)> {
    let record: SimulationRecord = io::read_json(&dir.join("simulate.json"))?;
    check_ids(
        &dir.join("simulate.json"),
        record.curves.iter().map(|c| &c.id),
        ids,
    )?;
    let latent = curves_from_long(&dir.join("truth_latent.csv"), ids)?;
    let warps = warps_from_file(&dir.join("truth_warps.csv"), ids)?;
    let grid = latent[0].grid().to_vec();
    if latent.iter().any(|c| c.grid() != grid) || warps.iter().any(|w| w[0] != grid) {
        return Err(Failure::parse("truth files use different grids"));
    }
    let observed = io::read_sample(&dir.join("observed.csv"))?;
    check_ids(&dir.join("observed.csv"), observed.ids.iter(), ids)?;
    let fphi = io::read_table(&dir.join("truth_fphi.csv"), &["t", "cdf"], false)?;
    let f_phi = if fphi.rows.is_empty() {
        None
    } else {
        Some(
            StepCdf::new(
                fphi.rows.iter().map(|r| r[0]).collect(),
                fphi.rows.iter().map(|r| r[1]).collect(),
            )
            .map_err(|e| Failure::parse(format!("truth_fphi.csv: {e}")))?,
        )
    };
    let truth = GroundTruth {
        grid,
        warps: warps.into_iter().map(|[_, w, _]| w).collect(),
        latent: latent.into_iter().map(|c| c.values().to_vec()).collect(),
        observed: Some(observed.curves),
        f_phi,
    };
    Ok((record, truth))
}

pub fn diagnose(cfg: &RunConfig) -> CliResult<()> {
    let dir = cfg
        .result
        .as_deref()
        .ok_or_else(|| Failure::parse("--result is required"))?;
    let out = cfg.out_dir()?;
    let report: RegisterReport = io::read_json(&dir.join("report.json"))?;
    let ids = &report.curve_ids;
    let registered = curves_from_long(&dir.join("registered.csv"), ids)?;
    if registered.is_empty() {
        return Err(Failure::parse("registered.csv holds no curves"));
    }

    let z = z_statistic(&registered, MeanMode::Auto).map_err(|e| Failure::from_lib(e, ids))?;
    let summary = fpca::analyze(&registered, cfg.eigen.unwrap_or(DEFAULT_EIGEN))
        .map_err(|e| Failure::from_lib(e, ids))?;
    let (mut metrics, record) = match cfg.truth.as_deref() {
        Some(truth_dir) => {
            let (record, truth) = load_truth(truth_dir, ids)?;
            let result = load_result(dir, &report, registered)?;
            let metrics =
                evaluate_against_truth(&result, &truth).map_err(|e| Failure::from_lib(e, ids))?;
            (metrics, Some(record))
        }
        None => (RegistrationReport::default(), None),
    };
    metrics.explained_ratios = summary.decomposition.explained_ratios;
    metrics.z_stats = Some(z);

    if let Some(ns) = &cfg.rate_ns {
        let (model, law) = match (&record, cfg.model.is_some()) {
            (Some(r), false) => (r.model.clone(), r.warp_law.clone()),
            _ => (
                LatentModelConfig::new(parse_model(cfg)?, 101, 0.0),
                warp_law(cfg),
            ),
        };
        let rc = rate_check(
            &model,
            &law,
            ns,
            cfg.rate_reps.unwrap_or(50),
            cfg.seed.unwrap_or(0),
        )
        .map_err(|e| Failure::from_lib(e, ids))?;
        metrics.rate_check = Some(rc);
    }

    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    io::write_json(&out.join("report.json"), &metrics)?;
    let mut w = io::writer(
        &out.join("metrics.csv"),
        &["curve_id", "z", "warp_sup_error", "curve_rel_l2_error"],
    )?;
    let opt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map_or(String::new(), |v| num(v[i]));
    let z = &metrics.z_stats.as_ref().unwrap().values;
    for (i, id) in ids.iter().enumerate() {
        w.write_record([
            id.clone(),
            num(z[i]),
            opt(&metrics.warp_sup_errors, i),
            opt(&metrics.curve_rel_l2_errors, i),
        ])?;
    }
    w.flush().map_err(|e| Failure::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kth_nearest_distances() {
        let g = [0.0, 0.1, 0.5, 1.0];
        assert_eq!(kth_nearest(&g, 0.1, 1), 0.0);
        assert!((kth_nearest(&g, 0.1, 2) - 0.1).abs() < 1e-15);
        assert!((kth_nearest(&g, 0.3, 2) - 0.2).abs() < 1e-15);
        assert!((kth_nearest(&g, 0.3, 3) - 0.3).abs() < 1e-15);
        assert_eq!(kth_nearest(&g, 0.3, 9), 0.7);
    }

    #[test]
    fn model_names_parse() {
        let cfg = |m: &str| RunConfig {
            model: Some(m.into()),
            ..Default::default()
        };
        assert_eq!(parse_model(&cfg("model2")).unwrap(), LatentModel::Model2);
        assert_eq!(
            parse_model(&cfg("breakdown c=2 r_scale=0.01 rank=3")).unwrap(),
            LatentModel::Breakdown {
                c: 2.0,
                r_scale: 0.01,
                rank: 3
            }
        );
        let mut flagged = cfg("breakdown c=2 r_scale=0.01");
        flagged.r_scale = Some(0.3);
        assert_eq!(
            parse_model(&flagged).unwrap(),
            LatentModel::Breakdown {
                c: 2.0,
                r_scale: 0.3,
                rank: 2
            }
        );
        assert_eq!(parse_model(&cfg("model9")).unwrap_err().code, 2);
        assert_eq!(parse_model(&cfg("breakdown c=2")).unwrap_err().code, 2);
    }

    #[test]
    fn ids_are_padded() {
        assert_eq!(curve_ids(3), ["curve_0", "curve_1", "curve_2"]);
        assert_eq!(curve_ids(11)[0], "curve_00");
    }
}
