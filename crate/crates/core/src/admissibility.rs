//! Wavelet-side hypotheses for uniform convergence, modulus of
//! continuity families and the entropy-integral criterion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::grid_max;
use crate::quadrature::{self, GaussLegendre};
use crate::report::{ConditionReport, Verdict};
use crate::wavelet::{Base, FrequencyForm, Member, WaveletPair};

/// Grid resolution for suprema over frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupGrid {
    pub points: usize,
}

impl Default for SupGrid {
    fn default() -> Self {
        Self { points: 4096 }
    }
}

/// Checks γ ∈ (0, ½) and α ∈ (½, 1].
pub fn validate_exponents(gamma: f64, alpha: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::Precondition(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha must lie in (1/2, 1], got {alpha}")));
    }
    Ok(())
}

/// sup over real z of |member(z)|, from a grid on the member's support.
pub fn frequency_sup(pair: &WaveletPair, member: Member, points: usize) -> f64 {
    let base = match member {
        Member::Phi | Member::PhiD1 => Base::Phi,
        Member::Psi | Member::PsiD1 | Member::PsiD2 => Base::Psi,
    };
    let hi = pair.form(base).support_hi;
    // |member| is even in z, so the half-line suffices
    grid_max(|z| pair.eval_frequency(member, z).norm(), 0.0, hi, points).1
}

const SUPPORT_TOL: f64 = 1e-12;

/// `∫_R g(|u|) du` for `g` supported where `form` is. `g` receives `u ≥ 0`.
///
/// Fractional powers of the transform have algebraic end behavior at the
/// junctions, so each piece is integrated adaptively.
pub fn support_integral<F: Fn(f64) -> f64>(form: &FrequencyForm, what: &str, g: F) -> Result<f64> {
    let mut total = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    for w in form.junctions().windows(2) {
        let r = quadrature::adaptive(&g, w[0], w[1], 1e-300, SUPPORT_TOL);
        total += r.value;
        err += r.error;
        converged &= r.converged;
    }
    if !converged || !total.is_finite() {
        return Err(Error::Quadrature {
            context: what.to_string(),
            coarse: 2.0 * (total - err),
            refined: 2.0 * total,
        });
    }
    Ok(2.0 * total)
}

/// Conditions 1–4 and the decay assumption on the pair.
pub fn check_wavelet_conditions(pair: &WaveletPair, gamma: f64, alpha: f64, grid: SupGrid) -> Result<ConditionReport> {
    validate_exponents(gamma, alpha)?;
    let mut report = ConditionReport::default();

    // condition 1: φ′ in time, ψ̂″ in frequency
    let phi_td = pair.time_domain(Base::Phi)?;
    let mut sup_phi_prime = 0.0f64;
    let step = 1.0 / 16.0;
    let mut t = -crate::wavelet::CACHE_RADIUS;
    while t <= crate::wavelet::CACHE_RADIUS {
        sup_phi_prime = sup_phi_prime.max(phi_td.derivative(t).abs());
        t += step;
    }
    let sups: Vec<(Member, &str, f64, f64)> = [
        (Member::Phi, "c_phi"),
        (Member::PhiD1, "c_phi_d1"),
        (Member::PsiD1, "c_psi_d1"),
        (Member::PsiD2, "c_psi_d2"),
    ]
    .into_iter()
    .map(|(m, name)| {
        (
            m,
            name,
            frequency_sup(pair, m, grid.points),
            frequency_sup(pair, m, 2 * grid.points),
        )
    })
    .collect();
    let c_psi_d2 = sups[3].3;
    report.push(
        "C1_derivatives_exist",
        if sup_phi_prime.is_finite() && c_psi_d2.is_finite() { Verdict::Pass } else { Verdict::Fail },
        vec![
            ("sup_abs_phi_prime_time".into(), sup_phi_prime),
            ("sup_abs_psi_hat_d2".into(), c_psi_d2),
        ],
        "time-domain phi' and frequency-domain psi^'' exist and are bounded",
    );

    let mut c2_verdict = Verdict::Pass;
    let mut c2_diag = Vec::new();
    for (_, name, coarse, fine) in &sups {
        if !fine.is_finite() {
            c2_verdict = Verdict::Fail;
        } else if (coarse - fine).abs() > 0.01 * fine && c2_verdict == Verdict::Pass {
            c2_verdict = Verdict::Inconclusive;
        }
        c2_diag.push((name.to_string(), *fine));
    }
    report.push(
        "C2_suprema_finite",
        c2_verdict,
        c2_diag,
        "sup|phi^|, sup|phi^'|, sup|psi^'|, sup|psi^''| finite (two grid resolutions agree within 1%)",
    );

    // condition 3: beyond the support the transforms are identically zero
    let mut tail_max = 0.0f64;
    for base in [Base::Phi, Base::Psi] {
        let form = pair.form(base);
        for i in 0..=grid.points {
            let u = form.support_hi * (1.0 + 1e-12) + 100.0 * i as f64 / grid.points as f64;
            tail_max = tail_max.max(form.magnitude(u)).max(form.magnitude(-u));
        }
    }
    report.push(
        "C3_vanish_at_infinity",
        if tail_max == 0.0 { Verdict::Pass } else { Verdict::Fail },
        vec![("max_abs_beyond_support".into(), tail_max)],
        "phi^ and psi^ vanish at infinity (compact support)",
    );

    // condition 4: log-weighted fractional moments
    let mut c4 = Vec::new();
    let mut c4_ok = true;
    for (base, name) in [(Base::Psi, "c0_psi_log_moment"), (Base::Phi, "c0_phi_log_moment")] {
        let form = pair.form(base);
        match support_integral(form, name, |u| {
            (1.0 + u).ln().powf(alpha) * form.magnitude(u).powf(gamma)
        }) {
            Ok(v) if v.is_finite() => c4.push((name.to_string(), v)),
            _ => {
                c4_ok = false;
                c4.push((name.to_string(), f64::INFINITY));
            }
        }
    }
    report.push(
        "C4_log_moment_finite",
        if c4_ok { Verdict::Pass } else { Verdict::Fail },
        c4,
        "integral of ln(1+|u|)^alpha |w^(u)|^gamma finite for psi and phi",
    );

    let env_phi = pair.envelope(Base::Phi)?;
    let env_psi = pair.envelope(Base::Psi)?;
    let decay_ok = env_phi.exponent >= 2.0 && env_psi.exponent >= 2.0;
    report.push(
        "S_envelope_integrable",
        if decay_ok { Verdict::Pass } else { Verdict::Fail },
        vec![
            ("phi_amplitude".into(), env_phi.amplitude),
            ("phi_exponent".into(), env_phi.exponent),
            ("psi_amplitude".into(), env_psi.amplitude),
            ("psi_exponent".into(), env_psi.exponent),
        ],
        "|w(t)| <= C/(1+|t|)^p with p >= 2 for phi and psi",
    );
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModulusFamily {
    /// σ(h) = c (ln(e^α + 1/h))^{-α}
    Log,
    /// σ(h) = c h^γ
    Power,
}

/// A modulus of continuity σ on `(0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusSpec {
    pub family: ModulusFamily,
    pub amplitude: f64,
    pub exponent: f64,
    pub horizon: f64,
}

impl ModulusSpec {
    pub fn new(family: ModulusFamily, amplitude: f64, exponent: f64, horizon: f64) -> Result<Self> {
        for (name, v) in [("amplitude", amplitude), ("exponent", exponent), ("horizon", horizon)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Precondition(format!("modulus {name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            family,
            amplitude,
            exponent,
            horizon,
        })
    }

    pub fn log(amplitude: f64, alpha: f64, horizon: f64) -> Result<Self> {
        Self::new(ModulusFamily::Log, amplitude, alpha, horizon)
    }

    pub fn power(amplitude: f64, gamma: f64, horizon: f64) -> Result<Self> {
        Self::new(ModulusFamily::Power, amplitude, gamma, horizon)
    }

    pub fn sigma(&self, h: f64) -> f64 {
        self.sigma_neg_log(-h.ln())
    }

    /// σ(e^{-s}); stays accurate when h underflows.
    pub fn sigma_neg_log(&self, s: f64) -> f64 {
        match self.family {
            ModulusFamily::Log => {
                let a = self.exponent;
                // ln(e^a + e^s) without overflow
                let l = if s > a { s + (a - s).exp().ln_1p() } else { a + (s - a).exp().ln_1p() };
                self.amplitude * l.powf(-a)
            }
            ModulusFamily::Power => self.amplitude * (-self.exponent * s).exp(),
        }
    }

    fn check_range(&self, u: f64) -> Result<()> {
        let top = self.sigma(self.horizon);
        if u > 0.0 && u < top {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                value: u,
                lo: 0.0,
                hi: top,
            })
        }
    }

    /// `-ln σ^{-1}(u)` by bisection in `s = -ln h`.
    pub fn neg_log_sigma_inverse(&self, u: f64) -> Result<f64> {
        self.check_range(u)?;
        let mut lo = -self.horizon.ln();
        let mut hi = lo.abs().max(1.0);
        while self.sigma_neg_log(hi) >= u {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..4000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sigma_neg_log(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-16 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// h with σ(h) = u.
    pub fn sigma_inverse(&self, u: f64) -> Result<f64> {
        Ok((-self.neg_log_sigma_inverse(u)?).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntropyVerdict {
    Converges,
    Diverges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub value: f64,
    pub verdict: EntropyVerdict,
    /// Contribution of each decade `[ε 10^{-m-1}, ε 10^{-m}]`.
    pub decades: Vec<f64>,
}

/// Number of decades probed below ε.
pub const ENTROPY_DECADES: usize = 12;
const ENTROPY_RATIO: f64 = 0.999;
const ENTROPY_WINDOW: usize = 5;

/// `∫_0^ε sqrt(-ln σ^{-1}(u)) du` with a decade-ratio divergence test.
///
/// The integrand is clamped at zero where `σ^{-1}(u) > 1`.
pub fn entropy_integral(spec: &ModulusSpec, eps: f64, panels: usize) -> Result<EntropyResult> {
    spec.check_range(eps)?;
    if panels == 0 {
        return Err(Error::Precondition("entropy integral needs at least one panel per decade".into()));
    }
    let rule = GaussLegendre::g32();
    let ln10 = std::f64::consts::LN_10;
    let mut decades = Vec::with_capacity(ENTROPY_DECADES);
    for m in 0..ENTROPY_DECADES {
        // u = ε 10^{-x}, x ∈ [m, m+1]
        let mut acc = 0.0;
        let mut err = None;
        for p in 0..panels {
            let a = m as f64 + p as f64 / panels as f64;
            let b = m as f64 + (p + 1) as f64 / panels as f64;
            acc += rule.integrate(a, b, |x: f64| {
                let u = eps * 10f64.powf(-x);
                match spec.neg_log_sigma_inverse(u) {
                    Ok(s) => s.max(0.0).sqrt() * u * ln10,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            });
        }
        if let Some(e) = err {
            return Err(e);
        }
        decades.push(acc);
    }
    let ratios: Vec<f64> = decades.windows(2).map(|w| w[1] / w[0]).collect();
    let window = &ratios[ratios.len() - ENTROPY_WINDOW..];
    let diverges = window.iter().all(|&r| r >= ENTROPY_RATIO);
    let mut value: f64 = decades.iter().sum();
    if !diverges {
        // geometric remainder below the last probed decade
        let r = *ratios.last().unwrap();
        if r < 1.0 {
            value += decades.last().unwrap() * r / (1.0 - r);
        }
    }
    Ok(EntropyResult {
        value,
        verdict: if diverges { EntropyVerdict::Diverges } else { EntropyVerdict::Converges },
        decades,
    })
}
