//! Stationary covariance models with closed-form spectral densities.
//!
//! Conventions: `R̂(z) = ∫ R(τ) e^{-izτ} dτ`, so `R(0) = (1/2π) ∫ R̂(z) dz`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};
use crate::report::{ConditionReport, Verdict};

/// Smallest Matérn smoothness for which ∫|R̂(z)| z⁴ dz is finite with margin.
pub const MIN_MATERN_NU: f64 = 2.5;

/// Which function of a model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralMember {
    Covariance,
    Density,
    DensityD1,
}

/// How fast the spectral density decays at high frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// `exp(-rate * z²)`.
    Gaussian { rate: f64 },
    /// `|z|^{-exponent}`.
    Power { exponent: f64 },
    /// Identically zero.
    Vanishing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectralModel {
    SquaredExponential { variance: f64, length: f64 },
    Matern { nu: f64, variance: f64, length: f64 },
    /// `R(τ) = σ² exp(-|τ|/ℓ)`, density `2σ²ℓ/(1+ℓ²z²)`. Too rough for the
    /// moment conditions; kept as a negative control.
    Exponential { variance: f64, length: f64 },
    Zero,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive and finite, got {v}")))
    }
}

impl SpectralModel {
    pub fn squared_exponential(variance: f64, length: f64) -> Result<Self> {
        check_positive("variance", variance)?;
        check_positive("length", length)?;
        Ok(Self::SquaredExponential { variance, length })
    }

    pub fn matern(nu: f64, variance: f64, length: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= MIN_MATERN_NU) {
            return Err(Error::Precondition(format!(
                "matern nu = {nu} is below {MIN_MATERN_NU}: the density's tail |z|^-(2nu+1) would \
                 make the z^4 moment integrals of condition 6 diverge or sit on the boundary"
            )));
        }
        check_positive("variance", variance)?;
        check_positive("length", length)?;
        Ok(Self::Matern { nu, variance, length })
    }

    pub fn exponential(variance: f64, length: f64) -> Result<Self> {
        check_positive("variance", variance)?;
        check_positive("length", length)?;
        Ok(Self::Exponential { variance, length })
    }

    /// R(0).
    pub fn variance(&self) -> f64 {
        match *self {
            Self::SquaredExponential { variance, .. }
            | Self::Matern { variance, .. }
            | Self::Exponential { variance, .. } => variance,
            Self::Zero => 0.0,
        }
    }

    /// Characteristic length; sets the quadrature panel scale.
    pub fn length_scale(&self) -> f64 {
        match *self {
            Self::SquaredExponential { length, .. } | Self::Exponential { length, .. } => length,
            Self::Matern { nu, length, .. } => length / (2.0 * nu).sqrt(),
            Self::Zero => 1.0,
        }
    }

    pub fn tail(&self) -> Tail {
        match *self {
            Self::SquaredExponential { length, .. } => Tail::Gaussian {
                rate: 0.5 * length * length,
            },
            Self::Matern { nu, .. } => Tail::Power {
                exponent: 2.0 * nu + 1.0,
            },
            Self::Exponential { .. } => Tail::Power { exponent: 2.0 },
            Self::Zero => Tail::Vanishing,
        }
    }

    pub fn eval(&self, member: SpectralMember, arg: f64) -> f64 {
        match member {
            SpectralMember::Covariance => self.covariance(arg),
            SpectralMember::Density => self.density(arg),
            SpectralMember::DensityD1 => self.density_d1(arg),
        }
    }

    pub fn covariance(&self, tau: f64) -> f64 {
        let tau = tau.abs();
        match *self {
            Self::SquaredExponential { variance, length } => {
                variance * (-tau * tau / (2.0 * length * length)).exp()
            }
            Self::Matern { nu, variance, length } => {
                let x = (2.0 * nu).sqrt() * tau / length;
                variance * matern_correlation(nu, x)
            }
            Self::Exponential { variance, length } => variance * (-tau / length).exp(),
            Self::Zero => 0.0,
        }
    }

    pub fn density(&self, z: f64) -> f64 {
        match *self {
            Self::SquaredExponential { variance, length } => {
                variance * length * (2.0 * PI).sqrt() * (-0.5 * length * length * z * z).exp()
            }
            Self::Matern { nu, variance, length } => {
                let lam = 2.0 * nu / (length * length);
                variance * matern_norm(nu, lam) * (lam + z * z).powf(-nu - 0.5)
            }
            Self::Exponential { variance, length } => {
                2.0 * variance * length / (1.0 + length * length * z * z)
            }
            Self::Zero => 0.0,
        }
    }

    pub fn density_d1(&self, z: f64) -> f64 {
        match *self {
            Self::SquaredExponential { length, .. } => -length * length * z * self.density(z),
            Self::Matern { nu, variance, length } => {
                let lam = 2.0 * nu / (length * length);
                variance * matern_norm(nu, lam) * (-2.0 * nu - 1.0) * z * (lam + z * z).powf(-nu - 1.5)
            }
            Self::Exponential { variance, length } => {
                let l2 = length * length;
                -4.0 * variance * length * l2 * z / (1.0 + l2 * z * z).powi(2)
            }
            Self::Zero => 0.0,
        }
    }

    /// sup |R̂|; every catalog density is maximal at the origin.
    pub fn sup_density(&self) -> f64 {
        self.density(0.0)
    }

    /// Frequency beyond which the `moment`-weighted density `|z|^m R̂(z)`
    /// holds less than `rel_tol` of its total mass. Infinite when that
    /// moment diverges.
    pub fn frequency_cutoff(&self, rel_tol: f64, moment: u32) -> f64 {
        let m = moment as f64;
        match self.tail() {
            Tail::Vanishing => 1.0,
            Tail::Gaussian { rate } => {
                // tail fraction Γ((m+1)/2, rate z²) / Γ((m+1)/2)
                let a = 0.5 * (m + 1.0);
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while gamma_ur(a, rate * hi * hi) > rel_tol {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if gamma_ur(a, rate * mid * mid) > rel_tol {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
            Tail::Power { exponent } => {
                let slack = exponent - m - 1.0;
                if slack <= 0.0 {
                    return f64::INFINITY;
                }
                // ∫_Z^∞ z^{m-exponent} dz = Z^{-slack}/slack against an O(1) total
                let scale = 1.0 / self.length_scale();
                scale * (rel_tol * slack).powf(-1.0 / slack)
            }
        }
    }

    /// Lag beyond which |R(τ)| < rel_tol · R(0).
    pub fn lag_cutoff(&self, rel_tol: f64) -> f64 {
        match *self {
            Self::SquaredExponential { length, .. } => length * (2.0 * (1.0 / rel_tol).ln()).sqrt(),
            Self::Exponential { length, .. } => length * (1.0 / rel_tol).ln(),
            Self::Matern { .. } => {
                let mut tau = self.length_scale();
                while self.covariance(tau).abs() > rel_tol * self.variance() {
                    tau *= 1.25;
                }
                tau
            }
            Self::Zero => 0.0,
        }
    }

    /// ∫_{-z_max}^{z_max} g(z) dz for an even-symmetric-support integrand, on
    /// panels adapted to the model scale (uniform near the origin, geometric
    /// beyond).
    pub fn frequency_integral<F: Fn(f64) -> f64>(&self, z_max: f64, g: F) -> f64 {
        let breaks = frequency_breaks(self.length_scale(), z_max);
        let ps = quadrature::panels(&breaks, f64::INFINITY);
        let rule = GaussLegendre::g32();
        quadrature::composite(rule, &ps, |z| g(z) + g(-z))
    }
}

fn frequency_breaks(scale: f64, z_max: f64) -> Vec<f64> {
    let w = 0.25 / scale;
    let uniform_end = (16.0 / scale).min(z_max);
    let mut breaks = vec![0.0];
    let mut z = 0.0;
    while z + w < uniform_end {
        z += w;
        breaks.push(z);
    }
    breaks.push(uniform_end);
    let mut z = uniform_end;
    while z < z_max {
        z = (z * 1.5).min(z_max);
        breaks.push(z);
    }
    breaks
}

/// 2√π Γ(ν+½)/Γ(ν) λ^ν.
fn matern_norm(nu: f64, lam: f64) -> f64 {
    2.0 * PI.sqrt() * (ln_gamma(nu + 0.5) - ln_gamma(nu) + nu * lam.ln()).exp()
}

/// 2^{1-ν}/Γ(ν) x^ν K_ν(x), equal to 1 at x = 0.
fn matern_correlation(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let p = nu - 0.5;
    if p >= 0.0 && (p - p.round()).abs() < 1e-12 {
        // half-integer closed form
        let p = p.round() as u32;
        let mut sum = 0.0;
        for i in 0..=p {
            let ln_c = ln_fact(p) - ln_fact(2 * p) + ln_fact(p + i) - ln_fact(i) - ln_fact(p - i);
            sum += ln_c.exp() * (2.0 * x).powi((p - i) as i32);
        }
        return (-x).exp() * sum;
    }
    let k = bessel_k(nu, x);
    ((1.0 - nu) * 2f64.ln() - ln_gamma(nu) + nu * x.ln()).exp() * k
}

fn ln_fact(n: u32) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Modified Bessel function K_ν(x) from ∫₀^∞ exp(-x cosh t) cosh(νt) dt.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0);
    // integrand is below e^{-60} of its peak once x(cosh t - 1) - νt > 60
    let mut upper = 1.0f64;
    while x * (upper.cosh() - 1.0) - nu * upper < 60.0 {
        upper += 0.5;
    }
    let r = quadrature::adaptive(
        |t| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh(),
        0.0,
        upper,
        0.0,
        1e-14,
    );
    r.value * (-x).exp()
}

/// Settings for the condition-6 divergence probe.
#[derive(Debug, Clone, Copy)]
pub struct SpectralCheck {
    pub z_max: f64,
    pub tol: f64,
    pub doublings: usize,
}

impl SpectralCheck {
    /// Cutoff where the plain density mass omitted is below 1e-12.
    pub fn for_model(model: &SpectralModel) -> Self {
        let z = model.frequency_cutoff(1e-12, 0);
        Self {
            z_max: if z.is_finite() { z } else { 64.0 / model.length_scale() },
            tol: 1e-9,
            doublings: 8,
        }
    }
}

pub const DOUBLING_RATIO_THRESHOLD: f64 = 0.9;

/// Outcome of the doubling probe for one integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingProbe {
    pub partials: Vec<f64>,
    pub last_ratio: f64,
    pub converged: bool,
}

/// Partial integrals of `g` over [-Z 2^i, Z 2^i]; divergent when the last
/// increment is non-negligible and no smaller than 0.9 of the one before.
pub fn doubling_probe<F: Fn(f64) -> f64>(model: &SpectralModel, check: &SpectralCheck, g: F) -> DoublingProbe {
    let mut partials = Vec::with_capacity(check.doublings + 1);
    for i in 0..=check.doublings {
        let z = check.z_max * (i as f64).exp2();
        partials.push(model.frequency_integral(z, &g));
    }
    let n = partials.len();
    let d_last = partials[n - 1] - partials[n - 2];
    let d_prev = partials[n - 2] - partials[n - 3];
    let total = partials[n - 1].abs();
    let last_ratio = if d_prev.abs() > 0.0 { d_last.abs() / d_prev.abs() } else { 0.0 };
    let negligible = d_last.abs() <= check.tol * total.max(f64::MIN_POSITIVE);
    let converged = partials.iter().all(|p| p.is_finite())
        && (negligible || last_ratio < DOUBLING_RATIO_THRESHOLD);
    DoublingProbe {
        partials,
        last_ratio,
        converged,
    }
}

/// Certifies boundedness of R̂ and the moment integrals of R̂, R̂′.
pub fn check_spectral_conditions(model: &SpectralModel, check: &SpectralCheck) -> ConditionReport {
    let mut report = ConditionReport::default();

    // sup |R̂| over a grid, which also catches non-finite evaluations
    let grid = 4096;
    let mut sup = 0.0f64;
    for i in 0..=grid {
        let z = check.z_max * i as f64 / grid as f64;
        sup = sup.max(model.density(z).abs()).max(model.density(-z).abs());
    }
    report.push(
        "C5_density_bounded",
        if sup.is_finite() { Verdict::Pass } else { Verdict::Fail },
        vec![("sup_density".into(), sup)],
        "spectral density exists and sup|R^(z)| is finite",
    );

    let integrals: [(&str, &str, Box<dyn Fn(f64) -> f64>); 3] = [
        (
            "C6_density_d1_integrable",
            "integral of |R^'(z)| is finite",
            Box::new(|z| model.density_d1(z).abs()),
        ),
        (
            "C6_density_z4_integrable",
            "integral of |R^(z)| z^4 is finite",
            Box::new(|z| model.density(z).abs() * z.powi(4)),
        ),
        (
            "C6_density_d1_z4_integrable",
            "integral of |R^'(z)| z^4 is finite",
            Box::new(|z| model.density_d1(z).abs() * z.powi(4)),
        ),
    ];
    for (id, desc, g) in integrals {
        let probe = doubling_probe(model, check, g);
        report.push(
            id,
            if probe.converged { Verdict::Pass } else { Verdict::Fail },
            vec![
                ("partial_integral".into(), *probe.partials.last().unwrap()),
                ("last_doubling_ratio".into(), probe.last_ratio),
            ],
            desc,
        );
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se() -> SpectralModel {
        SpectralModel::squared_exponential(1.0, 1.0).unwrap()
    }

    #[test]
    fn se_closed_forms() {
        let m = se();
        assert_eq!(m.covariance(0.0), 1.0);
        assert_eq!(m.density_d1(0.0), 0.0);
        let ratio = m.density(1.0) / m.density(0.0);
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-15);
        let m2 = SpectralModel::squared_exponential(2.0, 0.5).unwrap();
        assert!((m2.density(0.0) - 2.0 * 0.5 * (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn parameters_are_validated() {
        assert!(SpectralModel::squared_exponential(0.0, 1.0).is_err());
        assert!(SpectralModel::squared_exponential(1.0, -1.0).is_err());
        let err = SpectralModel::matern(2.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("condition 6"));
        assert!(SpectralModel::matern(2.5, 1.0, 1.0).is_ok());
    }

    #[test]
    fn half_integer_matern_matches_bessel_route() {
        // ν = 5/2 closed form against the integral representation
        for &x in &[0.1, 0.7, 2.0, 5.0] {
            let closed = matern_correlation(2.5, x);
            let k = bessel_k(2.5, x);
            let via_k = ((1.0 - 2.5) * 2f64.ln() - ln_gamma(2.5) + 2.5 * x.ln()).exp() * k;
            assert!((closed - via_k).abs() < 1e-12, "x={x}: {closed} vs {via_k}");
            let textbook = (1.0 + x + x * x / 3.0) * (-x).exp();
            assert!((closed - textbook).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let models = [
            se(),
            SpectralModel::matern(2.5, 1.3, 0.8).unwrap(),
            SpectralModel::matern(3.7, 1.0, 2.0).unwrap(),
            SpectralModel::exponential(1.0, 1.0).unwrap(),
        ];
        for m in &models {
            for &z in &[-3.1, -0.4, 0.2, 1.7, 4.4] {
                let h = 1e-5;
                let fd = (m.density(z + h) - m.density(z - h)) / (2.0 * h);
                let an = m.density_d1(z);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-8), "{m:?} z={z}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn tail_cutoffs() {
        let z = se().frequency_cutoff(1e-12, 0);
        assert!(z > 7.0 && z < 8.0, "{z}");
        let m = SpectralModel::matern(2.5, 1.0, 1.0).unwrap();
        assert!(m.frequency_cutoff(1e-12, 4).is_finite());
        assert!(m.frequency_cutoff(1e-12, 5).is_infinite());
        assert_eq!(m.tail(), Tail::Power { exponent: 6.0 });
    }

    #[test]
    fn condition_report_verdicts() {
        let m = se();
        let rep = check_spectral_conditions(&m, &SpectralCheck::for_model(&m));
        assert!(rep.all_pass(), "{rep:?}");

        let cauchy = SpectralModel::exponential(1.0, 1.0).unwrap();
        assert_eq!(cauchy.density(0.0), 2.0);
        let rep = check_spectral_conditions(&cauchy, &SpectralCheck::for_model(&cauchy));
        assert_eq!(rep.verdict("C5_density_bounded"), Some(Verdict::Pass));
        assert_eq!(rep.verdict("C6_density_z4_integrable"), Some(Verdict::Fail));
        assert_eq!(rep.verdict("C6_density_d1_z4_integrable"), Some(Verdict::Fail));

        let zero = SpectralModel::Zero;
        let rep = check_spectral_conditions(&zero, &SpectralCheck::for_model(&zero));
        assert!(rep.all_pass());
        for e in rep.entries() {
            for (_, v) in &e.diagnostics {
                assert_eq!(*v, 0.0);
            }
        }

        let mat = SpectralModel::matern(2.5, 1.0, 1.0).unwrap();
        let rep = check_spectral_conditions(&mat, &SpectralCheck::for_model(&mat));
        assert!(rep.all_pass(), "{rep:?}");
    }
}
