//! The explicit constants of the modulus-of-continuity bound for the
//! truncated expansion, and numerical checks of that bound and of the
//! elementary inequalities it is built from.
//!
//! Notation: `L(h) = ln(e^α + 1/h)`, `β = 1 - γ`. The bound reads
//! `(E|X_n(t) - X_n(s)|²)^{1/2} ≤ B L(|t-s|)^{-α}` for every truncation.

use std::f64::consts::{LN_2, PI};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta;

use crate::admissibility::{frequency_sup, support_integral, validate_exponents};
use crate::covariance::{CovarianceEngine, DecayConstants};
use crate::error::{Error, Result};
use crate::numeric::{golden_section_max, zeta};
use crate::scheme::TruncationScheme;
use crate::spectral::{doubling_probe, SpectralCheck, SpectralModel};
use crate::wavelet::{Base, Member, WaveletPair};

/// `ln(e^α + 1/h)`, accurate for tiny and huge h.
pub fn log_modulus(alpha: f64, h: f64) -> f64 {
    if h == 0.0 {
        return f64::INFINITY;
    }
    let s = -h.ln();
    if s > alpha {
        s + (alpha - s).exp().ln_1p()
    } else {
        alpha + (s - alpha).exp().ln_1p()
    }
}

/// `sup_{0<h≤T} h L(h)^α` by golden-section search.
pub fn c_alpha(alpha: f64, horizon: f64) -> f64 {
    // search in ln h so tiny h is resolved
    let f = |x: f64| {
        let h = x.exp();
        h * log_modulus(alpha, h).powf(alpha)
    };
    let (_, v) = golden_section_max(f, horizon.ln() - 60.0, horizon.ln(), 1e-15);
    v.max(f(horizon.ln()))
}

/// Both evaluations of the double series `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QBounds {
    /// Closed-form majorant through ζ values.
    pub split: f64,
    /// Partial sum of the series itself.
    pub direct_partial: f64,
    /// Partial sum plus a rigorous bound on the remainder.
    pub direct: f64,
    pub terms: usize,
}

/// `Q = Σ_{k≠l, kl≠0} 1/(4|k-l||k|^β|l|^β)` over all of `Z²`.
pub fn q_series(beta_: f64, delta: f64, n: usize) -> QBounds {
    let c_delta = delta.powf(-delta) * (1.0 - delta).powf(delta - 1.0);
    let split = 0.25 * zeta(0.5 + beta_).powi(2)
        + c_delta.powf(beta_) * zeta(1.0 + delta * beta_) * zeta((2.0 - delta) * beta_);

    // Opposite signs give |k-l| = k+l, equal signs give |k-l| = m with l and
    // l+m; folding the four quadrants:
    //   Q = ½ Σ_{k,l≥1} 1/((k+l) k^β l^β) + Σ_{m,l≥1} 1/(m l^β (l+m)^β)
    let pw: Vec<f64> = (0..=2 * n + 1).map(|i| (i as f64).powf(-beta_)).collect();
    let direct_partial: f64 = (1..=n)
        .into_par_iter()
        .map(|a| {
            let mut acc = 0.0;
            for b in 1..=n {
                acc += 0.5 * pw[a] * pw[b] / (a + b) as f64;
                acc += pw[b] * pw[a + b] / a as f64;
            }
            acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();

    // remainders, each from an integral comparison of a decreasing summand
    let nf = n as f64;
    let p_tail = nf.powf(1.0 - 2.0 * beta_) / (2.0 * beta_ - 1.0);
    let harmonic: f64 = (1..=n).map(|m| 1.0 / m as f64).sum();
    let opposite = PI / (PI * beta_).sin() * p_tail;
    let equal = beta(1.0 - beta_, 2.0 * beta_ - 1.0) * p_tail + harmonic * p_tail;
    QBounds {
        split,
        direct_partial,
        direct: direct_partial + opposite + equal,
        terms: n,
    }
}

/// `Σ_{j≥0} (j+1)^α 2^{-j/2}` until the geometric remainder is below
/// `1e-12` of the partial sum.
pub fn level_series(alpha: f64) -> f64 {
    let term = |j: usize| ((j + 1) as f64).powf(alpha) * (-(j as f64) * 0.5 * LN_2).exp();
    let mut sum = 0.0;
    let mut j = 0;
    loop {
        sum += term(j);
        // ratio of successive terms is decreasing in j
        let r = ((j + 3) as f64 / (j + 2) as f64).powf(alpha) / 2f64.sqrt();
        if r < 1.0 {
            let tail = term(j + 1) / (1.0 - r);
            if tail < 1e-12 * sum {
                return sum + tail;
            }
        }
        j += 1;
    }
}

/// Every named constant of the bound chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub horizon: f64,

    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_phi0: f64,
    pub c_phi1: f64,
    pub c_phi2: f64,
    pub c_phi3: f64,

    pub sup_psi: f64,
    pub c_phi: f64,
    pub c_phi_d1: f64,
    pub c_psi_d1: f64,
    pub c_psi_d2: f64,

    pub a_psi: f64,
    pub a1_psi: f64,
    pub a_phi: f64,
    pub a1_phi: f64,

    pub c_alpha: f64,
    pub k: f64,
    pub k_phi: f64,
    pub q: f64,
    pub q_direct: f64,
    pub q_direct_partial: f64,

    pub q_psi0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q_phi: f64,
    pub q_phi1: f64,
    pub q_phi2: f64,

    pub level_series: f64,
    pub b1: f64,
    pub b2: f64,
    pub b: f64,
}

impl ConstantsLedger {
    pub fn decay_constants(&self) -> DecayConstants {
        DecayConstants {
            a_psi: self.a_psi,
            a1_psi: self.a1_psi,
            a_phi: self.a_phi,
            a1_phi: self.a1_phi,
        }
    }

    /// `B L(h)^{-α}`.
    pub fn modulus_bound(&self, h: f64) -> f64 {
        self.b * log_modulus(self.alpha, h).powf(-self.alpha)
    }
}

/// Number of terms per index in the direct evaluation of `Q`.
pub const Q_DIRECT_TERMS: usize = 4000;
/// Points of the frequency grids for suprema.
pub const SUP_POINTS: usize = 8192;

fn spectral_moment<F: Fn(f64) -> f64>(model: &SpectralModel, what: &str, g: F) -> Result<f64> {
    let mut check = SpectralCheck::for_model(model);
    let z = model.frequency_cutoff(1e-13, 4);
    if z.is_finite() {
        check.z_max = check.z_max.max(z);
    }
    let probe = doubling_probe(model, &check, g);
    if !probe.converged {
        return Err(Error::Precondition(format!(
            "{what} diverges: the spectral density violates condition 6 (last doubling ratio {:.3})",
            probe.last_ratio
        )));
    }
    Ok(*probe.partials.last().unwrap())
}

/// Fills the ledger for `(α, γ, T)`.
pub fn compute_constants(
    pair: &WaveletPair,
    model: &SpectralModel,
    alpha: f64,
    gamma: f64,
    horizon: f64,
) -> Result<ConstantsLedger> {
    validate_exponents(gamma, alpha)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Precondition(format!("horizon T must be positive, got {horizon}")));
    }
    let beta_ = 1.0 - gamma;
    let delta = 0.5 * (2.0 - 1.0 / beta_);
    let ln5a = 5f64.ln().powf(alpha);

    let moments = |base: Base| -> Result<[f64; 4]> {
        let form = pair.form(base);
        let name = if base == Base::Psi { "psi" } else { "phi" };
        let m = |u: f64| form.magnitude(u);
        let w = |u: f64| (1.0 + u).ln().powf(alpha);
        Ok([
            support_integral(form, &format!("c0 ({name})"), |u| m(u).powf(gamma))?,
            support_integral(form, &format!("c1 ({name})"), |u| w(u) * m(u).powf(gamma))?,
            support_integral(form, &format!("c2 ({name})"), m)?,
            support_integral(form, &format!("c3 ({name})"), |u| w(u) * m(u))?,
        ])
    };
    let [c0, c1, c2, c3] = moments(Base::Psi)?;
    let [c_phi0, c_phi1, c_phi2, c_phi3] = moments(Base::Phi)?;

    let sup_psi = frequency_sup(pair, Member::Psi, SUP_POINTS);
    let c_phi = frequency_sup(pair, Member::Phi, SUP_POINTS);
    let c_phi_d1 = frequency_sup(pair, Member::PhiD1, SUP_POINTS);
    let c_psi_d1 = frequency_sup(pair, Member::PsiD1, SUP_POINTS);
    let c_psi_d2 = frequency_sup(pair, Member::PsiD2, SUP_POINTS);

    let d1_z4 = spectral_moment(model, "integral of |R^'| z^4", |z| model.density_d1(z).abs() * z.powi(4))?;
    let d0_z3 = spectral_moment(model, "integral of |R^| |z|^3", |z| model.density(z).abs() * z.abs().powi(3))?;
    let d0_z4 = spectral_moment(model, "integral of |R^| z^4", |z| model.density(z).abs() * z.powi(4))?;
    let d1 = spectral_moment(model, "integral of |R^'|", |z| model.density_d1(z).abs())?;
    let d0 = spectral_moment(model, "integral of |R^|", |z| model.density(z).abs())?;

    let two_pi = 2.0 * PI;
    let a_psi = c_psi_d2 * c_psi_d2 / two_pi * (d1_z4 + 2.0 * d0_z3);
    let a1_psi = c_psi_d2 * c_psi_d2 / two_pi * d0_z4;
    let a_phi = (c_phi * c_phi * d1 + 2.0 * c_phi * c_phi_d1 * d0) / two_pi;
    let a1_phi = c_phi * c_phi / two_pi * d0;

    let c_alpha = c_alpha(alpha, horizon);
    // |x| ≤ (π/2) c_α L^{-α} for x = π h / 2 with h ≤ c_α L(h)^{-α}
    let c_alpha_eff = 0.5 * PI * c_alpha;
    let k_of = |cd1: f64, m0: f64, m1: f64, m2: f64, m3: f64| {
        ((3.0 + alpha - beta_).exp2() * PI.powf(beta_) * cd1.powf(beta_) * (ln5a * m0 + m1)
            + PI * horizon * (alpha - 1.0).exp2() * (ln5a * m2 + m3)
            + c_alpha_eff * m2)
            / PI
    };
    let k = k_of(c_psi_d1, c0, c1, c2, c3);
    let k_phi = k_of(c_phi_d1, c_phi0, c_phi1, c_phi2, c_phi3);

    let qb = q_series(beta_, delta, Q_DIRECT_TERMS);
    let q = qb.split;
    let z1b = zeta(1.0 + beta_);
    let z2b = zeta(2.0 * beta_);

    let q_psi0 = alpha.exp2() * a_psi * k * (ln5a * c2 + c3) / PI * z1b;
    let q1 = a1_psi * k * k / 2.0 * z2b;
    let q2 = (2.0 * alpha).exp2() * a1_psi / (PI * PI) * (ln5a * c2 + c3).powi(2);
    let q_phi = alpha.exp2() / PI * a_phi * k_phi * (ln5a * c_phi2 + c_phi3) * z1b;
    let q_phi1 = a1_phi * k_phi * k_phi / 2.0 * z2b;
    let q_phi2 = (2.0 * alpha).exp2() * a1_phi / (PI * PI) * (ln5a * c_phi2 + c_phi3).powi(2);

    let series = level_series(alpha);
    let b1 = (q2 + q1 + a_psi * q * k * k + 2.0 * q_psi0).sqrt() * series;
    let b2 = (q_phi1 + q_phi2 + a_phi * k_phi * k_phi * q + 2.0 * q_phi).sqrt();

    Ok(ConstantsLedger {
        alpha,
        gamma,
        beta: beta_,
        delta,
        horizon,
        c0,
        c1,
        c2,
        c3,
        c_phi0,
        c_phi1,
        c_phi2,
        c_phi3,
        sup_psi,
        c_phi,
        c_phi_d1,
        c_psi_d1,
        c_psi_d2,
        a_psi,
        a1_psi,
        a_phi,
        a1_phi,
        c_alpha,
        k,
        k_phi,
        q,
        q_direct: qb.direct,
        q_direct_partial: qb.direct_partial,
        q_psi0,
        q1,
        q2,
        q_phi,
        q_phi1,
        q_phi2,
        level_series: series,
        b1,
        b2,
        b: b1 + b2,
    })
}

/// One `(scheme, t, s)` evaluation of the modulus bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub n: u32,
    /// Largest shift bound of the scheme.
    pub k: u64,
    pub t: f64,
    pub s: f64,
    pub lhs: f64,
    pub bound: f64,
    /// `bound / lhs`; infinite when the increment vanishes.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub rows: Vec<ModulusRow>,
    pub pass: bool,
    pub min_margin: f64,
    /// `max lhs L(|t-s|)^α` over all rows: the smallest admissible `B`.
    pub empirical_b: f64,
    pub empirical_ratio: f64,
}

/// Checks the modulus bound on every scheme and `(t, s)` pair using exact
/// coefficient covariances.
pub fn verify_modulus_bound(
    engine: &CovarianceEngine,
    schemes: &[TruncationScheme],
    ledger: &ConstantsLedger,
    pairs: &[(f64, f64)],
) -> Result<ModulusReport> {
    for &(t, s) in pairs {
        for x in [t, s] {
            if !(0.0..=ledger.horizon).contains(&x) {
                return Err(Error::OutOfRange {
                    value: x,
                    lo: 0.0,
                    hi: ledger.horizon,
                });
            }
        }
    }
    let pair = engine.pair();
    let mut rows = Vec::with_capacity(schemes.len() * pairs.len());
    for scheme in schemes {
        let indices = scheme.indices();
        let cov = engine.coeff_matrix(&indices)?;
        let chunk: Vec<ModulusRow> = pairs
            .par_iter()
            .map(|&(t, s)| {
                let d = indices
                    .iter()
                    .map(|idx| Ok(idx.eval_time(pair, t)? - idx.eval_time(pair, s)?))
                    .collect::<Result<Vec<f64>>>()?;
                let d = DVector::from_vec(d);
                let var = d.dot(&(&cov * &d));
                let lhs = var.max(0.0).sqrt();
                let bound = ledger.modulus_bound((t - s).abs());
                let margin = if lhs == 0.0 { f64::INFINITY } else { bound / lhs };
                Ok(ModulusRow {
                    n: scheme.n(),
                    k: scheme.max_shift(),
                    t,
                    s,
                    lhs,
                    bound,
                    margin,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(chunk);
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let empirical_b = rows
        .iter()
        .filter(|r| r.lhs > 0.0)
        .map(|r| r.lhs * log_modulus(ledger.alpha, (r.t - r.s).abs()).powf(ledger.alpha))
        .fold(0.0, f64::max);
    Ok(ModulusReport {
        pass: rows.iter().all(|r| r.margin >= 1.0),
        min_margin,
        empirical_b,
        empirical_ratio: if ledger.b > 0.0 { empirical_b / ledger.b } else { 0.0 },
        rows,
    })
}

/// Outcome of one sampled inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen; below 1 when the inequality held everywhere.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    pub pass: bool,
    /// Violations of the step `|x| ≤ c_α L^{-α}` for `x = π h/2` without the
    /// `π/2` factor; informational, not part of `pass`.
    pub literal_star_violations: usize,
}

struct Tally {
    name: &'static str,
    samples: usize,
    violations: usize,
    max_ratio: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            violations: 0,
            max_ratio: 0.0,
        }
    }

    /// Records `lhs ≤ rhs` with a relative rounding allowance.
    fn check(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
            self.violations += 1;
        }
        if rhs > 0.0 {
            self.max_ratio = self.max_ratio.max(lhs / rhs);
        } else if lhs > 0.0 {
            self.max_ratio = f64::INFINITY;
        }
    }

    fn finish(self) -> InequalityCheck {
        InequalityCheck {
            name: self.name.into(),
            samples: self.samples,
            violations: self.violations,
            max_ratio: self.max_ratio,
        }
    }
}

fn log_uniform(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random-instance checks of the inequalities feeding the constants.
pub fn verify_elementary_inequalities(alpha: f64, horizon: f64, samples: usize, seed: u64) -> Result<InequalityReport> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (1/2, 1], got {alpha}")));
    }
    let ca = c_alpha(alpha, horizon);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut phase = Tally::new("phase_difference");
    let mut split = Tally::new("log_splitting");
    let mut factored = Tally::new("log_splitting_factored");
    let mut increment = Tally::new("increment_vs_log_modulus");
    let mut star = Tally::new("scaled_increment");
    let mut literal_star_violations = 0;
    let l5 = 5f64.ln();
    for i in 0..samples {
        let t = rng.random_range(0.0..=horizon);
        // half the draws use very close points to probe the small-gap regime
        let s = if i % 2 == 0 {
            rng.random_range(0.0..=horizon)
        } else {
            (t + log_uniform(&mut rng, 1e-12, 1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .clamp(0.0, horizon)
        };
        let h = (t - s).abs();
        let z = log_uniform(&mut rng, 1e-6, 1e6) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let u = log_uniform(&mut rng, 1e-6, 1e6);
        let j: i32 = rng.random_range(0..16);
        let l: i64 = rng.random_range(1..=256) * if rng.random_bool(0.5) { 1 } else { -1 };
        let lh = log_modulus(alpha, h);

        let lhs = 2.0 * (0.5 * z * (t - s)).sin().abs();
        let rhs = 2.0 * (log_modulus(alpha, 2.0 / z.abs()) / lh).powf(alpha);
        phase.check(lhs, rhs);

        let left = (alpha.exp() + ((j - 1) as f64).exp2() * u).ln();
        split.check(left, (j + 1) as f64 * l5 + u.ln_1p());
        factored.check(
            left.powf(alpha),
            alpha.exp2() * (((j + 1) as f64).powf(alpha) * l5.powf(alpha) + u.ln_1p().powf(alpha)),
        );

        increment.check(h, ca * lh.powf(-alpha));

        let x = (j as f64).exp2() * PI * h / (2.0 * l.abs() as f64);
        let bound = (j as f64).exp2() * ca / (l.abs() as f64 * lh.powf(alpha));
        star.check(x, 0.5 * PI * bound);
        if x > bound * (1.0 + 1e-12) {
            literal_star_violations += 1;
        }
    }
    let checks: Vec<InequalityCheck> = [phase, split, factored, increment, star].into_iter().map(Tally::finish).collect();
    Ok(InequalityReport {
        pass: checks.iter().all(|c| c.violations == 0),
        checks,
        literal_star_violations,
    })
}
