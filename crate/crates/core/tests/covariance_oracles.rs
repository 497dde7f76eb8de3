use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavexp_core::covariance::{
    assemble_joint_covariance, brute_force_cov, decay_certificate, CovarianceEngine, DecayConstants, QuadSpec, TimeQuad,
};
use wavexp_core::quadrature::adaptive;
use wavexp_core::scheme::{CoefficientIndex, TruncationScheme};
use wavexp_core::{build_meyer_pair, SpectralModel};

fn random_index(rng: &mut ChaCha8Rng, j_max: u32, k_max: i64) -> CoefficientIndex {
    let k = rng.random_range(-k_max..=k_max);
    match rng.random_range(0..=j_max + 1) {
        0 => CoefficientIndex::Scaling { k },
        j => CoefficientIndex::Detail { j: j - 1, k },
    }
}

fn shifted(idx: CoefficientIndex, by: i64) -> CoefficientIndex {
    match idx {
        CoefficientIndex::Scaling { k } => CoefficientIndex::Scaling { k: k + by },
        CoefficientIndex::Detail { j, k } => CoefficientIndex::Detail { j, k: k + by },
    }
}

#[test]
fn detail_moments_depend_on_shift_difference_only() {
    let model = SpectralModel::squared_exponential(1.0, 1.0).unwrap();
    let pair = build_meyer_pair(3).unwrap();
    let engine = CovarianceEngine::new(&model, &pair, QuadSpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let j = rng.random_range(0..=4);
        let k = rng.random_range(-16..=16);
        let l = rng.random_range(-16..=16);
        let m = rng.random_range(-40..=40);
        let a = CoefficientIndex::Detail { j, k };
        let b = CoefficientIndex::Detail { j, k: l };
        let x = engine.coeff_cov(&a, &b).unwrap();
        // a fresh engine so the memo cannot short-circuit the comparison
        let fresh = CovarianceEngine::new(&model, &pair, QuadSpec::default());
        let y = fresh.coeff_cov(&shifted(a, m), &shifted(b, m)).unwrap();
        assert!((x - y).abs() < 1e-9, "j={j} k={k} l={l} m={m}: {x} vs {y}");
    }
}

#[test]
fn parseval_agrees_with_time_domain_oracle() {
    let model = SpectralModel::squared_exponential(1.0, 1.0).unwrap();
    let pair = build_meyer_pair(3).unwrap();
    let engine = CovarianceEngine::new(&model, &pair, QuadSpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4 {
        let a = random_index(&mut rng, 2, 4);
        let b = random_index(&mut rng, 2, 4);
        let p = engine.coeff_cov(&a, &b).unwrap();
        let o = brute_force_cov(&model, &pair, &a, &b, TimeQuad::default()).unwrap();
        let scale = o.abs().max(1e-10 * model.variance());
        assert!((p - o).abs() / scale < 1e-5, "{a:?} {b:?}: {p} vs {o}");
    }
}

#[test]
fn decay_certificate_holds_on_small_grid() {
    let model = SpectralModel::squared_exponential(1.0, 1.0).unwrap();
    let pair = build_meyer_pair(3).unwrap();
    let engine = CovarianceEngine::new(&model, &pair, QuadSpec::default());
    let ledger = wavexp_core::constants::compute_constants(&pair, &model, 0.75, 0.4, 10.0).unwrap();
    let cert = decay_certificate(&engine, &ledger.decay_constants(), &[0, 1, 2, 4], 8).unwrap();
    assert!(cert.pass, "worst {:?}", cert.worst);
    // diagonal instance at j = 4
    let d = engine
        .coeff_cov(&CoefficientIndex::Detail { j: 4, k: 3 }, &CoefficientIndex::Detail { j: 4, k: 3 })
        .unwrap();
    assert!(d * 2f64.powi(20) <= ledger.a1_psi);

    let zero = SpectralModel::Zero;
    let engine = CovarianceEngine::new(&zero, &pair, QuadSpec::default());
    let consts = DecayConstants { a_psi: 0.0, a1_psi: 0.0, a_phi: 0.0, a1_phi: 0.0 };
    let cert = decay_certificate(&engine, &consts, &[0, 1], 4).unwrap();
    assert!(cert.pass);
    assert!(cert.entries.iter().all(|e| e.actual == 0.0));
}

#[test]
fn joint_covariance_for_moderate_scheme_factorizes() {
    let model = SpectralModel::squared_exponential(1.0, 1.0).unwrap();
    let pair = build_meyer_pair(3).unwrap();
    let engine = CovarianceEngine::new(&model, &pair, QuadSpec::default());
    let scheme = TruncationScheme::uniform(3, 8);
    let grid: Vec<f64> = (0..33).map(|i| 10.0 * i as f64 / 32.0).collect();
    let cov = assemble_joint_covariance(&engine, &scheme, &grid).unwrap();
    assert_eq!(cov.dim(), 33 + scheme.count());
    assert!(cov.relative_jitter() <= 1e-10);
    // exact sparsity between detail levels 0 and 2
    let pos = |idx: &CoefficientIndex| 33 + cov.coefficients().iter().position(|c| c == idx).unwrap();
    for k in -8..=8 {
        for l in -8..=8 {
            let a = pos(&CoefficientIndex::Detail { j: 0, k });
            let b = pos(&CoefficientIndex::Detail { j: 2, k: l });
            assert_eq!(cov.matrix()[(a, b)], 0.0);
        }
    }
}

/// `(1/2π) ∫ R̂(z) cos(τ z) dz` by adaptive quadrature, independent of the
/// closed-form covariances.
fn fourier_oracle(model: &SpectralModel, tau: f64) -> f64 {
    let z_max = model.frequency_cutoff(1e-14, 0);
    let breaks: Vec<f64> = (0..=64).map(|i| z_max * i as f64 / 64.0).collect();
    breaks
        .windows(2)
        .map(|w| {
            let r = adaptive(|z| model.density(z) * (tau * z).cos(), w[0], w[1], 1e-15, 1e-12);
            assert!(r.converged);
            r.value
        })
        .sum::<f64>()
        / PI
}

#[test]
fn covariances_are_fourier_transforms_of_densities() {
    let models = [
        SpectralModel::squared_exponential(1.0, 1.0).unwrap(),
        SpectralModel::squared_exponential(2.5, 0.4).unwrap(),
        SpectralModel::matern(2.5, 1.0, 1.0).unwrap(),
        SpectralModel::matern(3.5, 1.3, 0.7).unwrap(),
        SpectralModel::matern(4.2, 1.0, 2.0).unwrap(),
    ];
    for m in &models {
        let r0 = m.variance();
        assert!((fourier_oracle(m, 0.0) - r0).abs() < 1e-8 * r0, "{m:?}");
        for i in 0..64 {
            let tau = 10.0 * i as f64 / 63.0;
            let o = fourier_oracle(m, tau);
            assert!((m.covariance(tau) - o).abs() < 1e-8 * r0, "{m:?} tau={tau}: {} vs {o}", m.covariance(tau));
        }
    }
}
