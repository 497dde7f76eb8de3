//! Exact joint sampling of the process and its coefficients, truncated
//! reconstruction, mean-square error and sup-norm exceedance estimates.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{assemble_joint, CovarianceEngine, JointCovariance};
use crate::error::{Error, Result};
use crate::scheme::{CoefficientIndex, TruncationScheme};
use crate::wavelet::WaveletPair;

/// Identifies the generator and the stream layout in run manifests.
pub const RNG_ID: &str = "rand_chacha::ChaCha20Rng; seed_from_u64(seed); set_stream(replicate); rand_distr::StandardNormal";

/// Independent stream for replicate `r`, identical for any worker count.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// `L z` with `z` standard normal from the replicate's stream.
fn draw(factor: &DMatrix<f64>, seed: u64, replicate: u64) -> Vec<f64> {
    let n = factor.nrows();
    let mut rng = replicate_rng(seed, replicate);
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    (0..n)
        .map(|i| (0..=i).map(|j| factor[(i, j)] * z[j]).sum())
        .collect()
}

/// Joint draws in the covariance's index order, one per replicate.
pub fn sample_joint(cov: &JointCovariance, seed: u64, replicates: usize) -> Vec<Vec<f64>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| draw(cov.factor(), seed, r))
        .collect()
}

/// Basis values: rows are grid points, columns are coefficients.
pub fn basis_matrix(pair: &WaveletPair, indices: &[CoefficientIndex], grid: &[f64]) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&t| indices.iter().map(|idx| idx.eval_time(pair, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(grid.len(), indices.len(), |i, j| rows[i][j]))
}

/// Truncated expansion `Σ c_a w_a(t)` on `grid`; coefficients follow
/// `scheme.indices()` order.
pub fn reconstruct(pair: &WaveletPair, scheme: &TruncationScheme, coefficients: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if coefficients.len() != scheme.count() {
        return Err(Error::LengthMismatch {
            expected: scheme.count(),
            got: coefficients.len(),
        });
    }
    let b = basis_matrix(pair, &scheme.indices(), grid)?;
    Ok((b * DVector::from_column_slice(coefficients)).iter().copied().collect())
}

/// One joint realization with its reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub seed: u64,
    pub replicate: u64,
    pub grid: Vec<f64>,
    pub process: Vec<f64>,
    pub coefficients: Vec<(CoefficientIndex, f64)>,
    pub reconstruction: Vec<f64>,
}

/// Joint realizations for `scheme` on `grid`, reconstructed.
pub fn sample_paths(
    engine: &CovarianceEngine,
    scheme: &TruncationScheme,
    grid: &[f64],
    seed: u64,
    replicates: usize,
) -> Result<Vec<PathSample>> {
    let indices = scheme.indices();
    let cov = assemble_joint(engine, &indices, grid)?;
    let basis = basis_matrix(engine.pair(), &indices, grid)?;
    let m = grid.len();
    Ok(sample_joint(&cov, seed, replicates)
        .into_iter()
        .enumerate()
        .map(|(r, x)| {
            let c = DVector::from_column_slice(&x[m..]);
            PathSample {
                seed,
                replicate: r as u64,
                grid: grid.to_vec(),
                process: x[..m].to_vec(),
                coefficients: indices.iter().copied().zip(x[m..].iter().copied()).collect(),
                reconstruction: (&basis * c).iter().copied().collect(),
            }
        })
        .collect())
}

/// `E|X(t) - X_n(t)|²` at every grid point, from exact moments.
pub fn mse_curve(engine: &CovarianceEngine, scheme: &TruncationScheme, grid: &[f64]) -> Result<Vec<f64>> {
    let indices = scheme.indices();
    let cov = engine.coeff_matrix(&indices)?;
    let basis = basis_matrix(engine.pair(), &indices, grid)?;
    let var = engine.model().variance();
    grid.par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let w = basis.row(i).transpose();
            let cross = indices
                .iter()
                .map(|a| engine.process_coeff_cov(t, a))
                .collect::<Result<Vec<f64>>>()?;
            let cross = DVector::from_vec(cross);
            let mse = var - 2.0 * w.dot(&cross) + w.dot(&(&cov * &w));
            if mse < -1e-8 * var {
                Err(Error::NegativeMse(mse))
            } else {
                Ok(mse.max(0.0))
            }
        })
        .collect()
}

/// `E|X(t) - X_n(t)|²` at one time.
pub fn pointwise_mse(engine: &CovarianceEngine, scheme: &TruncationScheme, t: f64) -> Result<f64> {
    Ok(mse_curve(engine, scheme, &[t])?[0])
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exactly 0 and 1 at the extremes; avoid rounding residue
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceEstimate {
    pub exceedances: usize,
    pub replicates: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ExceedanceEstimate {
    fn new(exceedances: usize, replicates: usize) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(exceedances, replicates);
        Self {
            exceedances,
            replicates,
            p_hat: exceedances as f64 / replicates as f64,
            ci_lo,
            ci_hi,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }
}

/// Estimate on the refined grid and whether it stayed within the interval
/// half-width of the base estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub points: usize,
    pub p_hat: f64,
    pub delta: f64,
    pub half_width: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub scheme: TruncationScheme,
    pub eps: f64,
    pub estimate: ExceedanceEstimate,
    pub grid_check: Option<GridCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceStudy {
    pub rows: Vec<ExceedanceRow>,
    pub seed: u64,
    /// Relative jitter of the base and refined joint covariances.
    pub jitter: Vec<f64>,
}

/// Minimum replicate count for an exceedance estimate.
pub const MIN_REPLICATES: usize = 100;

/// Inserts midpoints: `m` points become `2m - 1`.
pub fn refine_grid(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for (i, &t) in grid.iter().enumerate() {
        if i > 0 {
            out.push(0.5 * (grid[i - 1] + t));
        }
        out.push(t);
    }
    out
}

/// Exceedance counts `[scheme][eps]` from one joint law shared by all
/// schemes.
fn exceedance_counts(
    engine: &CovarianceEngine,
    schemes: &[TruncationScheme],
    grid: &[f64],
    eps: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<(Vec<Vec<usize>>, f64)> {
    let union: Vec<CoefficientIndex> = schemes
        .iter()
        .flat_map(|s| s.indices())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cov = assemble_joint(engine, &union, grid)?;
    let m = grid.len();
    let position = |idx: &CoefficientIndex| m + union.binary_search(idx).expect("index in union");
    let layouts: Vec<(Vec<usize>, DMatrix<f64>)> = schemes
        .iter()
        .map(|s| {
            let idx = s.indices();
            Ok((idx.iter().map(position).collect(), basis_matrix(engine.pair(), &idx, grid)?))
        })
        .collect::<Result<_>>()?;
    let sups: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = draw(cov.factor(), seed, r);
            layouts
                .iter()
                .map(|(pos, basis)| {
                    let c = DVector::from_iterator(pos.len(), pos.iter().map(|&p| x[p]));
                    let rec = basis * c;
                    (0..m).map(|i| (x[i] - rec[i]).abs()).fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let counts = (0..schemes.len())
        .map(|s| eps.iter().map(|&e| sups.iter().filter(|row| row[s] > e).count()).collect())
        .collect();
    Ok((counts, cov.relative_jitter()))
}

/// `P{max_grid |X - X_n| > ε}` for every scheme and threshold, with Wilson
/// intervals and an optional grid-doubling sensitivity check.
pub fn sup_exceedance_study(
    engine: &CovarianceEngine,
    schemes: &[TruncationScheme],
    grid: &[f64],
    eps: &[f64],
    replicates: usize,
    seed: u64,
    grid_check: bool,
) -> Result<ExceedanceStudy> {
    if replicates < MIN_REPLICATES {
        return Err(Error::Precondition(format!(
            "exceedance estimates need at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    if schemes.is_empty() || grid.is_empty() {
        return Err(Error::Precondition("exceedance study needs schemes and a grid".into()));
    }
    let (counts, jitter) = exceedance_counts(engine, schemes, grid, eps, replicates, seed)?;
    let mut jitters = vec![jitter];
    let refined = if grid_check {
        let fine = refine_grid(grid);
        let (c, j) = exceedance_counts(engine, schemes, &fine, eps, replicates, seed)?;
        jitters.push(j);
        Some((fine.len(), c))
    } else {
        None
    };
    let mut rows = Vec::new();
    for (s, scheme) in schemes.iter().enumerate() {
        for (e, &eps_v) in eps.iter().enumerate() {
            let estimate = ExceedanceEstimate::new(counts[s][e], replicates);
            let grid_check = refined.as_ref().map(|(points, c)| {
                let p = c[s][e] as f64 / replicates as f64;
                let delta = (p - estimate.p_hat).abs();
                GridCheck {
                    points: *points,
                    p_hat: p,
                    delta,
                    half_width: estimate.half_width(),
                    stable: delta < estimate.half_width(),
                }
            });
            rows.push(ExceedanceRow {
                scheme: scheme.clone(),
                eps: eps_v,
                estimate,
                grid_check,
            });
        }
    }
    Ok(ExceedanceStudy {
        rows,
        seed,
        jitter: jitters,
    })
}

/// Single-scheme, single-threshold estimate.
pub fn sup_exceedance(
    engine: &CovarianceEngine,
    scheme: &TruncationScheme,
    grid: &[f64],
    eps: f64,
    replicates: usize,
    seed: u64,
) -> Result<ExceedanceEstimate> {
    let study = sup_exceedance_study(engine, std::slice::from_ref(scheme), grid, &[eps], replicates, seed, false)?;
    Ok(study.rows[0].estimate)
}
