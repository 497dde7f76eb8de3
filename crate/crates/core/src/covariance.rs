//! Second moments of expansion coefficients and process values.
//!
//! Every moment is a frequency integral of the spectral density against the
//! Fourier transforms of the basis functions involved. For a coefficient
//! `c_a = ∫ X(u) w_a(u) du` the transform of `w_a` is
//! `e^{-i z k/2^j} 2^{-j/2} ŵ(z/2^j)`, so
//!
//! * `E c_a c_b = (1/2π) ∫ R̂(z) conj(ŵ_a(z)) ŵ_b(z) dz`
//! * `E X(t) c_a = (1/2π) ∫ R̂(z) e^{itz} ŵ_a(z) dz`
//!
//! Both depend on the shifts only through a difference of centres, which is
//! what the memo tables are keyed on.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};
use crate::scheme::{CoefficientIndex, TruncationScheme};
use crate::spectral::SpectralModel;
use crate::wavelet::{inverse_fourier_direct, Base, WaveletPair, EIGHT_PI_THIRDS, FOUR_PI_THIRDS, TWO_PI_THIRDS};

/// Frequency quadrature settings for the Parseval integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Largest panel width at level 0; scaled by `2^j` on coarser levels.
    pub panel_width: f64,
    /// Allowed disagreement between panel halving levels, relative to the
    /// integral of the absolute integrand.
    pub rel_tol: f64,
    /// Allowed imaginary residue relative to `|value| + 1`.
    pub imag_tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            panel_width: PI / 8.0,
            rel_tol: 1e-8,
            imag_tol: 1e-10,
        }
    }
}

/// Basis family and level: the part of an index that fixes `|ŵ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Kind {
    base: Base,
    level: u32,
}

impl Kind {
    fn of(idx: &CoefficientIndex) -> Self {
        Self {
            base: idx.base(),
            level: idx.level(),
        }
    }

    fn scale(&self) -> f64 {
        (self.level as f64).exp2()
    }

    /// Positive-frequency support.
    fn support(&self) -> (f64, f64) {
        let s = self.scale();
        match self.base {
            Base::Phi => (0.0, FOUR_PI_THIRDS * s),
            Base::Psi => (TWO_PI_THIRDS * s, EIGHT_PI_THIRDS * s),
        }
    }

    fn junctions(&self, pair: &WaveletPair) -> impl Iterator<Item = f64> + '_ {
        let s = self.scale();
        pair.form(self.base).junctions().iter().map(move |&y| y * s)
    }

    /// Transform of the unshifted basis function, `2^{-j/2} ŵ(z/2^j)`.
    fn hat(&self, pair: &WaveletPair, z: f64) -> Complex64 {
        let s = self.scale();
        pair.form(self.base).value(z / s) / s.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CovKey {
    a: Kind,
    b: Kind,
    delta: u64,
}

fn canonical_bits(x: f64) -> u64 {
    // folds -0.0 onto 0.0
    (x + 0.0).to_bits()
}

/// Positive-frequency nodes with precomputed weights for `E X(t) c_a`.
#[derive(Debug)]
struct ProcessTable {
    nodes: Vec<f64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl ProcessTable {
    fn new(model: &SpectralModel, pair: &WaveletPair, kind: Kind, panels: &[(f64, f64)]) -> Self {
        let rule = GaussLegendre::g32();
        let mut nodes = Vec::new();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for &(a, b) in panels {
            for (z, w) in rule.mapped(a, b) {
                nodes.push(z);
                plus.push(kind.hat(pair, z) * (w * model.density(z)));
                minus.push(kind.hat(pair, -z) * (w * model.density(-z)));
            }
        }
        Self { nodes, plus, minus }
    }

    fn eval(&self, u: f64) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for ((&z, &p), &m) in self.nodes.iter().zip(&self.plus).zip(&self.minus) {
            let e = Complex64::from_polar(1.0, z * u);
            acc += p * e + m * e.conj();
            mass += p.norm() + m.norm();
        }
        (acc, mass)
    }
}

struct ProcessTables {
    coarse: ProcessTable,
    fine: ProcessTable,
}

/// Memoizing evaluator of coefficient and process–coefficient moments for
/// one model and one wavelet pair. Safe to share across threads; results do
/// not depend on evaluation order.
pub struct CovarianceEngine<'a> {
    model: &'a SpectralModel,
    pair: &'a WaveletPair,
    quad: QuadSpec,
    coeff_memo: Mutex<HashMap<CovKey, f64>>,
    process_memo: Mutex<HashMap<(Kind, u64), f64>>,
    tables: Mutex<HashMap<(Kind, i32), Arc<ProcessTables>>>,
}

impl<'a> CovarianceEngine<'a> {
    pub fn new(model: &'a SpectralModel, pair: &'a WaveletPair, quad: QuadSpec) -> Self {
        Self {
            model,
            pair,
            quad,
            coeff_memo: Mutex::new(HashMap::new()),
            process_memo: Mutex::new(HashMap::new()),
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &SpectralModel {
        self.model
    }

    pub fn pair(&self) -> &WaveletPair {
        self.pair
    }

    fn max_width(&self, level: u32, oscillation: f64) -> f64 {
        let mut w = self.quad.panel_width * (level as f64).exp2();
        w = w.min(2.0 / self.model.length_scale());
        if oscillation > 0.0 {
            // at most two periods of the phase factor per panel
            w = w.min(4.0 * PI / oscillation);
        }
        w
    }

    /// `E c_a c_b`.
    pub fn coeff_cov(&self, a: &CoefficientIndex, b: &CoefficientIndex) -> Result<f64> {
        let (mut ka, mut kb) = (Kind::of(a), Kind::of(b));
        let mut delta = a.centre() - b.centre();
        if ka > kb {
            std::mem::swap(&mut ka, &mut kb);
            delta = -delta;
        }
        let (lo, hi) = overlap(ka.support(), kb.support());
        if hi <= lo || self.model.variance() == 0.0 {
            return Ok(0.0);
        }
        let key = CovKey {
            a: ka,
            b: kb,
            delta: canonical_bits(delta),
        };
        if let Some(&v) = self.coeff_memo.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = self.compute_coeff(ka, kb, delta, lo, hi)?;
        self.coeff_memo.lock().unwrap().insert(key, v);
        Ok(v)
    }

    fn compute_coeff(&self, ka: Kind, kb: Kind, delta: f64, lo: f64, hi: f64) -> Result<f64> {
        let mut breaks: Vec<f64> = ka
            .junctions(self.pair)
            .chain(kb.junctions(self.pair))
            .filter(|&y| y > lo && y < hi)
            .collect();
        breaks.push(lo);
        breaks.push(hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let width = self.max_width(ka.level.min(kb.level), delta.abs());
        let panels = quadrature::panels(&breaks, width);
        let f = |z: f64| {
            let one = |z: f64| {
                ka.hat(self.pair, z).conj() * kb.hat(self.pair, z) * Complex64::from_polar(self.model.density(z), z * delta)
            };
            one(z) + one(-z)
        };
        let ctx = || format!("E c_a c_b for {ka:?} vs {kb:?}, centre offset {delta}");
        self.checked(&panels, f, ctx)
    }

    /// Composite integral with a halving check and an imaginary-residue check.
    fn checked<F, C>(&self, panels: &[(f64, f64)], f: F, ctx: C) -> Result<f64>
    where
        F: Fn(f64) -> Complex64,
        C: Fn() -> String,
    {
        let rule = GaussLegendre::g32();
        let coarse: Complex64 = quadrature::composite(rule, panels, &f);
        let fine_panels = quadrature::refine(panels);
        let mut fine = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for &(a, b) in &fine_panels {
            for (z, w) in rule.mapped(a, b) {
                let v = f(z);
                fine += v * w;
                mass += v.norm() * w;
            }
        }
        let (coarse, fine, mass) = (coarse / (2.0 * PI), fine / (2.0 * PI), mass / (2.0 * PI));
        self.accept(coarse, fine, mass, ctx)
    }

    fn accept<C: Fn() -> String>(&self, coarse: Complex64, fine: Complex64, mass: f64, ctx: C) -> Result<f64> {
        if !fine.re.is_finite() || (coarse - fine).norm() > self.quad.rel_tol * mass {
            return Err(Error::Quadrature {
                context: ctx(),
                coarse: coarse.re,
                refined: fine.re,
            });
        }
        if fine.im.abs() > self.quad.imag_tol * (fine.re.abs() + 1.0) {
            return Err(Error::ImaginaryResidue {
                context: ctx(),
                real: fine.re,
                imag: fine.im,
            });
        }
        Ok(fine.re)
    }

    /// `E X(t) c_a`.
    pub fn process_coeff_cov(&self, t: f64, a: &CoefficientIndex) -> Result<f64> {
        if self.model.variance() == 0.0 {
            return Ok(0.0);
        }
        let kind = Kind::of(a);
        let u = t - a.centre();
        let key = (kind, canonical_bits(u));
        if let Some(&v) = self.process_memo.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let tables = self.process_tables(kind, u);
        let (coarse, _) = tables.coarse.eval(u);
        let (fine, mass) = tables.fine.eval(u);
        let scale = 1.0 / (2.0 * PI);
        let v = self.accept(coarse * scale, fine * scale, mass * scale, || {
            format!("E X(t) c_a for {kind:?}, t - centre = {u}")
        })?;
        self.process_memo.lock().unwrap().insert(key, v);
        Ok(v)
    }

    fn process_tables(&self, kind: Kind, u: f64) -> Arc<ProcessTables> {
        // tables are shared by all |u| up to the next power of two
        let bucket = u.abs().max(1.0).log2().ceil() as i32;
        if let Some(t) = self.tables.lock().unwrap().get(&(kind, bucket)) {
            return Arc::clone(t);
        }
        let (lo, hi) = kind.support();
        let breaks: Vec<f64> = kind.junctions(self.pair).filter(|&y| y >= lo && y <= hi).collect();
        let panels = quadrature::panels(&breaks, self.max_width(kind.level, (bucket as f64).exp2()));
        let built = Arc::new(ProcessTables {
            coarse: ProcessTable::new(self.model, self.pair, kind, &panels),
            fine: ProcessTable::new(self.model, self.pair, kind, &quadrature::refine(&panels)),
        });
        let mut guard = self.tables.lock().unwrap();
        Arc::clone(guard.entry((kind, bucket)).or_insert(built))
    }

    /// Coefficient covariance matrix over `indices`.
    pub fn coeff_matrix(&self, indices: &[CoefficientIndex]) -> Result<DMatrix<f64>> {
        let n = indices.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| self.coeff_cov(&indices[i], &indices[j])).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                m[(i, i + off)] = v;
                m[(i + off, i)] = v;
            }
        }
        Ok(m)
    }
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.min(b.1))
}

/// `E c_a c_b` with a throwaway engine.
pub fn coeff_cov(
    model: &SpectralModel,
    pair: &WaveletPair,
    a: &CoefficientIndex,
    b: &CoefficientIndex,
    quad: QuadSpec,
) -> Result<f64> {
    CovarianceEngine::new(model, pair, quad).coeff_cov(a, b)
}

/// `E X(t) c_a` with a throwaway engine.
pub fn process_coeff_cov(
    model: &SpectralModel,
    pair: &WaveletPair,
    t: f64,
    a: &CoefficientIndex,
    quad: QuadSpec,
) -> Result<f64> {
    CovarianceEngine::new(model, pair, quad).process_coeff_cov(t, a)
}

/// Time-domain quadrature settings for the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeQuad {
    /// Integrals run over `[-half_width, half_width]`.
    pub half_width: f64,
    /// Agreement required between the grid and its halving, relative to
    /// `R(0)`.
    pub tol: f64,
}

impl Default for TimeQuad {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            tol: 1e-11,
        }
    }
}

/// Basis function sampled by direct inverse-Fourier quadrature, bypassing
/// the memoized grid.
fn direct_samples(pair: &WaveletPair, idx: &CoefficientIndex, grid: &[f64]) -> Vec<f64> {
    let form = pair.form(idx.base());
    let d = idx.dyadic();
    grid.par_iter()
        .map(|&t| d.scale().sqrt() * inverse_fourier_direct(form, d.local(t)).re)
        .collect()
}

fn bandwidth(idx: &CoefficientIndex) -> f64 {
    let (_, hi) = Kind::of(idx).support();
    hi
}

fn time_grid(half_width: f64, h: f64) -> Vec<f64> {
    let n = (2.0 * half_width / h).round() as usize;
    (0..=n).map(|i| -half_width + i as f64 * h).collect()
}

/// Trapezoid step that integrates products with total bandwidth `b` exactly
/// up to aliasing of the covariance tail.
fn trapezoid_step(model: &SpectralModel, b: f64) -> f64 {
    let br = model.frequency_cutoff(1e-14, 0).min(256.0 / model.length_scale());
    0.8 * 2.0 * PI / (b + br)
}

fn brute_double(model: &SpectralModel, wa: &[f64], wb: &[f64], h: f64) -> f64 {
    let n = wa.len();
    let lag_max = ((model.lag_cutoff(1e-18) / h).ceil() as usize).min(n);
    let r: Vec<f64> = (0..lag_max).map(|m| model.covariance(m as f64 * h)).collect();
    let inner: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = i.saturating_sub(lag_max - 1);
            let hi = (i + lag_max).min(n);
            (lo..hi).map(|j| r[i.abs_diff(j)] * wb[j]).sum::<f64>()
        })
        .collect();
    h * h * wa.iter().zip(&inner).map(|(a, g)| a * g).sum::<f64>()
}

/// `∬ R(u - v) w_a(u) w_b(v) du dv` on a square time box.
pub fn brute_force_cov(
    model: &SpectralModel,
    pair: &WaveletPair,
    a: &CoefficientIndex,
    b: &CoefficientIndex,
    spec: TimeQuad,
) -> Result<f64> {
    if spec.half_width < 40.0 {
        return Err(Error::Precondition(format!(
            "time box half-width must be >= 40, got {}",
            spec.half_width
        )));
    }
    if model.variance() == 0.0 {
        return Ok(0.0);
    }
    let h = trapezoid_step(model, bandwidth(a) + bandwidth(b));
    let eval = |h: f64| {
        let grid = time_grid(spec.half_width, h);
        let wa = direct_samples(pair, a, &grid);
        let wb = direct_samples(pair, b, &grid);
        brute_double(model, &wa, &wb, h)
    };
    let coarse = eval(h);
    let fine = eval(0.5 * h);
    if (coarse - fine).abs() > spec.tol * model.variance() {
        return Err(Error::Quadrature {
            context: format!("brute-force covariance of {} and {}", a.label(), b.label()),
            coarse,
            refined: fine,
        });
    }
    Ok(fine)
}

/// `∫ R(t - u) w_a(u) du` on the time box around the basis centre.
pub fn brute_force_process_cov(
    model: &SpectralModel,
    pair: &WaveletPair,
    t: f64,
    a: &CoefficientIndex,
    spec: TimeQuad,
) -> Result<f64> {
    if model.variance() == 0.0 {
        return Ok(0.0);
    }
    let h = trapezoid_step(model, bandwidth(a));
    let eval = |h: f64| {
        let grid: Vec<f64> = time_grid(spec.half_width, h).into_iter().map(|u| u + t).collect();
        let wa = direct_samples(pair, a, &grid);
        h * grid.iter().zip(&wa).map(|(&u, w)| model.covariance(t - u) * w).sum::<f64>()
    };
    let coarse = eval(h);
    let fine = eval(0.5 * h);
    if (coarse - fine).abs() > spec.tol * model.variance() {
        return Err(Error::Quadrature {
            context: format!("brute-force process covariance at t = {t} with {}", a.label()),
            coarse,
            refined: fine,
        });
    }
    Ok(fine)
}

/// Spectral constants entering the moment decay bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub a_psi: f64,
    pub a1_psi: f64,
    pub a_phi: f64,
    pub a1_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayBound {
    /// `|E η_{jk} η_{jl}| ≤ A^ψ / (2^{4j} |k - l|)`, `k ≠ l`.
    DetailOffDiagonal,
    /// `E |η_{jk}|² ≤ A₁^ψ / 2^{5j}`.
    DetailDiagonal,
    /// `|E ξ_k ξ_l| ≤ A^φ / |k - l|`, `k ≠ l`.
    ScalingOffDiagonal,
    /// `E |ξ_k|² ≤ A₁^φ`.
    ScalingDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub bound_kind: DecayBound,
    pub j: u32,
    pub k: i64,
    pub l: i64,
    pub actual: f64,
    pub bound: f64,
    /// `bound / |actual|`, infinite when the moment vanishes.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub entries: Vec<DecayEntry>,
    pub pass: bool,
    /// Entry with the smallest margin.
    pub worst: Option<DecayEntry>,
}

/// Checks every moment decay bound for `j` in `levels` and `|k|, |l| ≤ k_max`.
pub fn decay_certificate(
    engine: &CovarianceEngine,
    constants: &DecayConstants,
    levels: &[u32],
    k_max: i64,
) -> Result<DecayCertificate> {
    let mut jobs = Vec::new();
    for &j in levels {
        for k in -k_max..=k_max {
            for l in -k_max..=k_max {
                jobs.push((Some(j), k, l));
            }
        }
    }
    for k in -k_max..=k_max {
        for l in -k_max..=k_max {
            jobs.push((None, k, l));
        }
    }
    let entries: Vec<DecayEntry> = jobs
        .par_iter()
        .map(|&(level, k, l)| {
            let (a, b) = match level {
                Some(j) => (CoefficientIndex::Detail { j, k }, CoefficientIndex::Detail { j, k: l }),
                None => (CoefficientIndex::Scaling { k }, CoefficientIndex::Scaling { k: l }),
            };
            let actual = engine.coeff_cov(&a, &b)?;
            let gap = (k - l).unsigned_abs() as f64;
            let (bound_kind, bound) = match (level, k == l) {
                (Some(j), false) => (DecayBound::DetailOffDiagonal, constants.a_psi / ((4 * j) as f64).exp2() / gap),
                (Some(j), true) => (DecayBound::DetailDiagonal, constants.a1_psi / ((5 * j) as f64).exp2()),
                (None, false) => (DecayBound::ScalingOffDiagonal, constants.a_phi / gap),
                (None, true) => (DecayBound::ScalingDiagonal, constants.a1_phi),
            };
            let margin = if actual == 0.0 { f64::INFINITY } else { bound / actual.abs() };
            Ok(DecayEntry {
                bound_kind,
                j: level.unwrap_or(0),
                k,
                l,
                actual,
                bound,
                margin,
            })
        })
        .collect::<Result<_>>()?;
    let worst = entries.iter().copied().min_by(|x, y| x.margin.total_cmp(&y.margin));
    let pass = entries.iter().all(|e| e.margin >= 1.0);
    Ok(DecayCertificate { entries, pass, worst })
}

/// One row or column of the joint covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JointIndex {
    Time(f64),
    Coefficient(CoefficientIndex),
}

/// Covariance of process values on a grid together with expansion
/// coefficients, with its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct JointCovariance {
    times: Vec<f64>,
    coefficients: Vec<CoefficientIndex>,
    matrix: DMatrix<f64>,
    factor: DMatrix<f64>,
    jitter: f64,
}

/// Diagonal jitter ladder, as multiples of `trace / dim`.
pub const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

impl JointCovariance {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coefficients(&self) -> &[CoefficientIndex] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn index(&self, i: usize) -> JointIndex {
        if i < self.times.len() {
            JointIndex::Time(self.times[i])
        } else {
            JointIndex::Coefficient(self.coefficients[i - self.times.len()])
        }
    }

    /// Matrix before jitter.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower Cholesky factor of the jittered matrix.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Absolute diagonal addition used for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Jitter as a multiple of `trace / dim`.
    pub fn relative_jitter(&self) -> f64 {
        let scale = self.matrix.trace() / self.dim() as f64;
        if scale > 0.0 {
            self.jitter / scale
        } else {
            0.0
        }
    }
}

/// Joint law of `X` on `grid` and the coefficients of `scheme`.
pub fn assemble_joint_covariance(
    engine: &CovarianceEngine,
    scheme: &TruncationScheme,
    grid: &[f64],
) -> Result<JointCovariance> {
    assemble_joint(engine, &scheme.indices(), grid)
}

/// Joint law of `X` on `grid` and an arbitrary coefficient list.
pub fn assemble_joint(engine: &CovarianceEngine, coefficients: &[CoefficientIndex], grid: &[f64]) -> Result<JointCovariance> {
    if grid.is_empty() {
        return Err(Error::Precondition("joint covariance needs a non-empty time grid".into()));
    }
    let m = grid.len();
    let dim = m + coefficients.len();
    let model = engine.model();
    let rows: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (i..dim)
                .map(|j| match (i < m, j < m) {
                    (true, true) => Ok(model.covariance(grid[i] - grid[j])),
                    (true, false) => engine.process_coeff_cov(grid[i], &coefficients[j - m]),
                    (false, true) => unreachable!("upper triangle only"),
                    (false, false) => engine.coeff_cov(&coefficients[i - m], &coefficients[j - m]),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut matrix = DMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            matrix[(i, i + off)] = v;
            matrix[(i + off, i)] = v;
        }
    }
    let scale = matrix.trace() / dim as f64;
    let mut last = 0.0;
    for rel in JITTER_LADDER {
        let jitter = rel * scale;
        last = jitter;
        let mut jittered = matrix.clone();
        for i in 0..dim {
            jittered[(i, i)] += jitter;
        }
        if scale == 0.0 {
            // the zero process: factor is the zero matrix
            return Ok(JointCovariance {
                times: grid.to_vec(),
                coefficients: coefficients.to_vec(),
                factor: DMatrix::zeros(dim, dim),
                matrix,
                jitter: 0.0,
            });
        }
        if let Some(chol) = jittered.cholesky() {
            return Ok(JointCovariance {
                times: grid.to_vec(),
                coefficients: coefficients.to_vec(),
                factor: chol.l(),
                matrix,
                jitter,
            });
        }
    }
    Err(Error::NotPositiveDefinite { jitter: last })
}
