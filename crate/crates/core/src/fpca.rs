//! Mean, covariance, eigenpairs and scores of a sample on a common grid.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{sorted_sum, thin_grid, trapezoid_weights, DiscreteCurve};
use crate::error::{Error, Result};

/// Largest grid used for the dense eigen solve.
pub const MAX_EIGEN_GRID: usize = 2048;

const SYMMETRY_TOL: f64 = 1e-10;

/// Leading eigenpairs of a covariance kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub grid: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Each row is one eigenfunction sampled on `grid`.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub explained_ratios: Vec<f64>,
    /// Quadrature-weighted trace of the kernel.
    pub trace: f64,
    /// Set when the trace vanishes and the ratios are reported as 0.
    pub trace_zero: bool,
}

fn common_grid(curves: &[DiscreteCurve]) -> Result<&[f64]> {
    let first = curves.first().ok_or(Error::EmptySample)?;
    if curves.iter().any(|c| c.grid() != first.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(first.grid())
}

pub fn cross_sectional_mean(curves: &[DiscreteCurve]) -> Result<DiscreteCurve> {
    let grid = common_grid(curves)?;
    let n = curves.len() as f64;
    let mut buf = Vec::with_capacity(curves.len());
    let values = (0..grid.len())
        .map(|k| {
            buf.clear();
            buf.extend(curves.iter().map(|c| c.values()[k]));
            sorted_sum(&mut buf) / n
        })
        .collect();
    DiscreteCurve::new(grid.to_vec(), values)
}

/// Empirical covariance `n⁻¹ Σ (v_i − v̄)(v_i − v̄)ᵀ` on the common grid.
pub fn covariance_matrix(curves: &[DiscreteCurve]) -> Result<DMatrix<f64>> {
    common_grid(curves)?;
    let n = curves.len();
    let m = curves[0].len();
    // Centre through offsets from the first curve so that identical curves
    // give an exactly zero kernel.
    let base = curves[0].values();
    let offset: Vec<f64> = (0..m)
        .map(|j| curves.iter().map(|c| c.values()[j] - base[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(m, n, |j, i| (curves[i].values()[j] - base[j]) - offset[j]);
    let mut k = &centered * centered.transpose() / n as f64;
    // Exact symmetry regardless of how the product was accumulated.
    for a in 0..m {
        for b in 0..a {
            let s = 0.5 * (k[(a, b)] + k[(b, a)]);
            k[(a, b)] = s;
            k[(b, a)] = s;
        }
    }
    Ok(k)
}

fn orient(phi: &mut [f64], weights: &[f64]) {
    let integral: f64 = phi.iter().zip(weights).map(|(p, w)| p * w).sum();
    let flip = if integral.abs() >= 1e-10 {
        integral < 0.0
    } else {
        let mut best = 0;
        for (k, p) in phi.iter().enumerate() {
            if p.abs() > phi[best].abs() {
                best = k;
            }
        }
        phi[best] < 0.0
    };
    if flip {
        phi.iter_mut().for_each(|p| *p = -*p);
    }
}

/// Top `m` eigenpairs of the integral operator with kernel `k` under
/// trapezoid quadrature on `grid`.
pub fn leading_eigenpairs(k: &DMatrix<f64>, grid: &[f64], m: usize) -> Result<EigenDecomposition> {
    let p = grid.len();
    if k.nrows() != p || k.ncols() != p {
        return Err(Error::GridMismatch);
    }
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one eigenpair".into()));
    }
    let scale = k.amax().max(f64::MIN_POSITIVE);
    for a in 0..p {
        for b in 0..a {
            if (k[(a, b)] - k[(b, a)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NonSymmetric);
            }
        }
    }
    let w = trapezoid_weights(grid);
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let weighted = DMatrix::from_fn(p, p, |a, b| sw[a] * k[(a, b)] * sw[b]);
    let trace: f64 = (0..p).map(|a| w[a] * k[(a, a)]).sum();
    let eig = SymmetricEigen::new(weighted);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let m = m.min(p);
    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenfunctions = Vec::with_capacity(m);
    for &idx in order.iter().take(m) {
        eigenvalues.push(eig.eigenvalues[idx].max(0.0));
        let col = eig.eigenvectors.column(idx);
        let mut phi: Vec<f64> = (0..p)
            .map(|a| if sw[a] > 0.0 { col[a] / sw[a] } else { 0.0 })
            .collect();
        orient(&mut phi, &w);
        eigenfunctions.push(phi);
    }
    let trace_zero = !(trace > 0.0);
    let explained_ratios = eigenvalues
        .iter()
        .map(|l| if trace_zero { 0.0 } else { l / trace })
        .collect();
    Ok(EigenDecomposition {
        grid: grid.to_vec(),
        eigenvalues,
        eigenfunctions,
        explained_ratios,
        trace: trace.max(0.0),
        trace_zero,
    })
}

/// Trapezoid inner products `⟨X_i, φ⟩`.
pub fn scores(curves: &[DiscreteCurve], eigenfunction: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if eigenfunction.len() != grid.len() || curves.iter().any(|c| c.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let w = trapezoid_weights(grid);
    Ok(curves
        .par_iter()
        .map(|c| {
            c.values()
                .iter()
                .zip(eigenfunction)
                .zip(&w)
                .map(|((x, p), w)| x * p * w)
                .sum()
        })
        .collect())
}

/// Mean, eigenpairs and scores of a registered sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpcaSummary {
    pub mean: DiscreteCurve,
    pub decomposition: EigenDecomposition,
    /// `scores[k][i]` is the score of curve `i` on eigenfunction `k`.
    pub scores: Vec<Vec<f64>>,
}

/// Full analysis of a sample on a common grid, thinning grids larger than
/// [`MAX_EIGEN_GRID`] by index.
pub fn analyze(curves: &[DiscreteCurve], m: usize) -> Result<FpcaSummary> {
    let grid = common_grid(curves)?;
    let thinned;
    let work: &[DiscreteCurve] = if grid.len() > MAX_EIGEN_GRID {
        let g = thin_grid(grid, MAX_EIGEN_GRID);
        thinned = curves
            .iter()
            .map(|c| DiscreteCurve::new(g.clone(), g.iter().map(|&t| c.interpolate(t)).collect()))
            .collect::<Result<Vec<_>>>()?;
        &thinned
    } else {
        curves
    };
    let grid = work[0].grid();
    let mean = cross_sectional_mean(work)?;
    let k = covariance_matrix(work)?;
    let decomposition = leading_eigenpairs(&k, grid, m)?;
    let scores = decomposition
        .eigenfunctions
        .iter()
        .map(|phi| scores(work, phi, grid))
        .collect::<Result<_>>()?;
    Ok(FpcaSummary {
        mean,
        decomposition,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{trapezoid, uniform_grid};
    use std::f64::consts::PI;

    fn unit_sine(g: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = g.iter().map(|&t| (PI * t).sin()).collect();
        let norm = trapezoid(g, &raw.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        raw.iter().map(|v| v / norm).collect()
    }

    #[test]
    fn mean_of_opposites_is_zero() {
        let g = uniform_grid(11);
        let a = DiscreteCurve::from_fn(&g, |t| t * t).unwrap();
        let b = a.map_values(|v| -v).unwrap();
        assert!(cross_sectional_mean(&[a.clone(), b])
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert_eq!(cross_sectional_mean(&[a.clone()]).unwrap(), a);
    }

    #[test]
    fn mean_by_hand() {
        let g = vec![0.0, 0.5, 1.0];
        let a = DiscreteCurve::new(g.clone(), vec![1.0, 2.0, 3.0]).unwrap();
        let b = DiscreteCurve::new(g.clone(), vec![3.0, 0.0, -1.0]).unwrap();
        assert_eq!(
            cross_sectional_mean(&[a, b]).unwrap().values(),
            &[2.0, 1.0, 1.0]
        );
    }

    #[test]
    fn mean_rejects_mismatched_grids() {
        let a = DiscreteCurve::from_fn(&uniform_grid(5), |t| t).unwrap();
        let b = DiscreteCurve::from_fn(&uniform_grid(6), |t| t).unwrap();
        assert_eq!(cross_sectional_mean(&[a, b]), Err(Error::GridMismatch));
        assert_eq!(cross_sectional_mean(&[]), Err(Error::EmptySample));
    }

    #[test]
    fn identical_curves_have_zero_covariance() {
        let g = uniform_grid(9);
        let a = DiscreteCurve::from_fn(&g, |t| t.sin()).unwrap();
        let k = covariance_matrix(&[a.clone(), a.clone(), a]).unwrap();
        assert!(k.iter().all(|v| *v == 0.0));
        let d = leading_eigenpairs(&k, &g, 2).unwrap();
        assert!(d.trace_zero);
        assert_eq!(d.explained_ratios, vec![0.0, 0.0]);
    }

    #[test]
    fn rank_one_sample() {
        let g = uniform_grid(201);
        let phi = unit_sine(&g);
        let xi = [0.3, 1.7, -0.4, 2.2];
        let curves: Vec<DiscreteCurve> = xi
            .iter()
            .map(|x| DiscreteCurve::new(g.clone(), phi.iter().map(|p| x * p).collect()).unwrap())
            .collect();
        let k = covariance_matrix(&curves).unwrap();
        let xbar = xi.iter().sum::<f64>() / 4.0;
        let var = xi.iter().map(|x| (x - xbar).powi(2)).sum::<f64>() / 4.0;
        for a in 0..g.len() {
            for b in 0..g.len() {
                assert!((k[(a, b)] - var * phi[a] * phi[b]).abs() < 1e-12);
            }
        }
        let d = leading_eigenpairs(&k, &g, 3).unwrap();
        assert!((d.eigenvalues[0] - var).abs() < 1e-10);
        assert!(d.eigenvalues[1] <= 1e-10 * d.eigenvalues[0]);
        assert!(d.explained_ratios[0] >= 1.0 - 1e-8);
        for (a, b) in d.eigenfunctions[0].iter().zip(&phi) {
            assert!((a - b).abs() < 1e-8);
        }
        let s = scores(&curves, &d.eigenfunctions[0], &g).unwrap();
        for (a, b) in s.iter().zip(&xi) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn outer_product_kernel_recovers_function() {
        let g = uniform_grid(101);
        let phi = unit_sine(&g);
        let k = DMatrix::from_fn(g.len(), g.len(), |a, b| phi[a] * phi[b]);
        let d = leading_eigenpairs(&k, &g, 1).unwrap();
        assert!((d.eigenvalues[0] - 1.0).abs() < 1e-8);
        for (a, b) in d.eigenfunctions[0].iter().zip(&phi) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn two_components_split_variance() {
        let g = uniform_grid(257);
        let w = trapezoid_weights(&g);
        let norm = |v: Vec<f64>| {
            let n = v.iter().zip(&w).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / n).collect::<Vec<_>>()
        };
        let p1 = norm(g.iter().map(|&t| (PI * t).sin()).collect());
        let p2 = norm(g.iter().map(|&t| (2.0 * PI * t).sin()).collect());
        let k = DMatrix::from_fn(g.len(), g.len(), |a, b| {
            3.0 * p1[a] * p1[b] + 1.0 * p2[a] * p2[b]
        });
        let d = leading_eigenpairs(&k, &g, 2).unwrap();
        assert!((d.explained_ratios[0] - 0.75).abs() < 1e-8);
        assert!((d.explained_ratios[1] - 0.25).abs() < 1e-8);
        let dot: f64 = d.eigenfunctions[0]
            .iter()
            .zip(&d.eigenfunctions[1])
            .zip(&w)
            .map(|((a, b), w)| a * b * w)
            .sum();
        assert!(dot.abs() < 1e-8);
    }

    #[test]
    fn sign_falls_back_to_largest_coordinate() {
        let g = uniform_grid(101);
        // Zero integral, unique extreme at t = 0.75.
        let raw: Vec<f64> = g
            .iter()
            .map(|&t| (2.0 * PI * t).sin() + 0.8 * (4.0 * PI * t).cos())
            .collect();
        let k = DMatrix::from_fn(g.len(), g.len(), |a, b| raw[a] * raw[b]);
        let d = leading_eigenpairs(&k, &g, 1).unwrap();
        assert!(d.eigenfunctions[0][75] > 0.0);
    }

    #[test]
    fn asymmetric_kernel_is_rejected() {
        let g = uniform_grid(3);
        let mut k = DMatrix::identity(3, 3);
        k[(0, 1)] = 0.5;
        assert_eq!(leading_eigenpairs(&k, &g, 1), Err(Error::NonSymmetric));
    }

    #[test]
    fn scores_of_zero_and_orthogonal_curves() {
        let g = uniform_grid(401);
        let phi = unit_sine(&g);
        let zero = DiscreteCurve::new(g.clone(), vec![0.0; g.len()]).unwrap();
        let orth = DiscreteCurve::from_fn(&g, |t| (2.0 * PI * t).sin()).unwrap();
        let s = scores(&[zero, orth], &phi, &g).unwrap();
        assert_eq!(s[0], 0.0);
        assert!(s[1].abs() < 1e-8);
    }

    #[test]
    fn analyze_thins_large_grids() {
        let g = uniform_grid(3001);
        let curves: Vec<DiscreteCurve> = (1..4)
            .map(|k| DiscreteCurve::from_fn(&g, |t| k as f64 * (PI * t).sin()).unwrap())
            .collect();
        let s = analyze(&curves, 2).unwrap();
        assert!(s.decomposition.grid.len() <= MAX_EIGEN_GRID);
        assert!(s.decomposition.explained_ratios[0] > 1.0 - 1e-8);
    }
}
