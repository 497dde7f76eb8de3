use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavexp_core::wavelet::{FOUR_PI_THIRDS, TWO_PI_THIRDS};
use wavexp_core::{build_meyer_pair, Base, DyadicIndex, Member, WaveletPair};

fn pair() -> WaveletPair {
    build_meyer_pair(3).unwrap()
}

/// Trapezoid over [-40, 40]; exact to rounding for band-limited integrands
/// at this spacing.
fn inner(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / 128.0;
    let n = (40.0 / h) as i64;
    (-n..=n).map(|i| i as f64 * h).map(|t| f(t) * g(t)).sum::<f64>() * h
}

#[test]
fn orthonormality_by_time_quadrature() {
    let p = pair();
    let w = |base, j, k| {
        let p = &p;
        move |t| p.eval_time(base, DyadicIndex::new(j, k), t).unwrap()
    };
    assert!((inner(w(Base::Psi, 0, 0), w(Base::Psi, 0, 0)) - 1.0).abs() < 1e-4);
    assert!((inner(w(Base::Phi, 0, 0), w(Base::Phi, 0, 0)) - 1.0).abs() < 1e-4);
    assert!(inner(w(Base::Psi, 0, 0), w(Base::Psi, 0, 1)).abs() < 1e-6);
    assert!(inner(w(Base::Psi, 0, 0), w(Base::Psi, 1, 0)).abs() < 1e-6);
    assert!(inner(w(Base::Phi, 0, 0), w(Base::Psi, 0, 0)).abs() < 1e-6);
    assert!(inner(w(Base::Phi, 0, 0), w(Base::Phi, 0, 3)).abs() < 1e-6);
}

#[test]
fn frequency_derivatives_match_finite_differences() {
    let p = pair();
    let junctions = [TWO_PI_THIRDS, FOUR_PI_THIRDS, 2.0 * FOUR_PI_THIRDS];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 256 {
        let y: f64 = rng.random_range(-9.0..9.0);
        if junctions.iter().any(|&c| (y.abs() - c).abs() < 1e-3) {
            continue;
        }
        let h = 1e-5;
        let fd = |m: Member| (p.eval_frequency(m, y + h) - p.eval_frequency(m, y - h)) / (2.0 * h);
        let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-6 * (1.0 + b.norm());
        assert!(close(fd(Member::Phi), p.eval_frequency(Member::PhiD1, y)), "phi' at {y}");
        assert!(close(fd(Member::Psi), p.eval_frequency(Member::PsiD1, y)), "psi' at {y}");
        assert!(close(fd(Member::PsiD1), p.eval_frequency(Member::PsiD2, y)), "psi'' at {y}");
        checked += 1;
    }
}

#[test]
fn dilation_identity_over_levels_and_shifts() {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..400 {
        let j: u32 = rng.random_range(0..=6);
        let k: i64 = rng.random_range(-64..=64);
        let t: f64 = rng.random_range(-10.0..10.0);
        for base in [Base::Phi, Base::Psi] {
            let a = p.eval_time(base, DyadicIndex::new(j, k), t).unwrap();
            let x = (j as f64).exp2() * t - k as f64;
            let b = (j as f64 / 2.0).exp2() * p.eval_time(base, DyadicIndex::new(0, 0), x).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{base:?} j={j} k={k} t={t}");
        }
    }
}

/// Least-squares slope of log max|w| over dyadic windows against log t.
fn decay_slope(p: &WaveletPair, base: Base) -> f64 {
    let td = p.time_domain(base).unwrap();
    let pts: Vec<(f64, f64)> = (3..=6)
        .map(|e| {
            let lo = f64::from(1 << e);
            let peak = (0..2000)
                .map(|i| lo + lo * i as f64 / 2000.0)
                .map(|t| td.value(t).abs().max(td.value(-t).abs()))
                .fold(0.0, f64::max);
            (lo.ln(), peak.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn time_decay_dominates_the_envelope_order() {
    let p = pair();
    for base in [Base::Phi, Base::Psi] {
        let slope = decay_slope(&p, base);
        let order = p.envelope(base).unwrap().exponent;
        // the fitted envelope exponent is conservative: the true decay is one order faster
        assert!((slope + order + 1.0).abs() < 0.5, "{base:?}: slope {slope}");
        assert!(slope <= -order + 0.5);
    }
}

#[test]
fn phi_hat_squared_integrates_to_two_pi() {
    // Plancherel: ‖φ‖² = 1 ⇔ ∫|φ̂|² = 2π
    let p = pair();
    let n = 20_000;
    let h = 2.0 * FOUR_PI_THIRDS / n as f64;
    let s: f64 = (0..=n)
        .map(|i| -FOUR_PI_THIRDS + i as f64 * h)
        .map(|y| p.eval_frequency(Member::Phi, y).norm_sqr())
        .sum::<f64>()
        * h;
    assert!((s - 2.0 * PI).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_hat_modulus_is_even(y in -10.0f64..10.0) {
        let p = pair();
        let a = p.eval_frequency(Member::Psi, y).norm();
        let b = p.eval_frequency(Member::Psi, -y).norm();
        prop_assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn partition_of_unity(y in -PI..PI) {
        let p = pair();
        let s: f64 = (-2..=2).map(|k| p.eval_frequency(Member::Phi, y + 2.0 * PI * k as f64).norm_sqr()).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psi_levels_tile_the_axis(y in 0.5f64..50.0) {
        // Σ_j |ψ̂(2^{-j} y)|² = 1 away from the origin
        let p = pair();
        let s: f64 = (-4..=8).map(|j| p.eval_frequency(Member::Psi, y / f64::from(j).exp2()).norm_sqr()).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }
}
