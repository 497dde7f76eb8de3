//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p wavexp-cli --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavexp_core::admissibility::{entropy_integral, EntropyVerdict, ModulusSpec};
use wavexp_core::covariance::{brute_force_cov, TimeQuad};
use wavexp_core::{
    build_meyer_pair, compute_constants, decay_certificate, mse_curve, sup_exceedance_study,
    verify_elementary_inequalities, verify_modulus_bound, Base, CoefficientIndex, CovarianceEngine, DyadicIndex,
    Member, QuadSpec, SpectralModel, TruncationScheme, WaveletPair,
};
use wavexp_cli::commands::random_time_pairs;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Result<Outcome, String>;

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn se() -> SpectralModel {
    SpectralModel::squared_exponential(1.0, 1.0).unwrap()
}

fn pair() -> WaveletPair {
    build_meyer_pair(3).unwrap()
}

fn schedule() -> Vec<TruncationScheme> {
    [(1, 8), (2, 16), (4, 32), (6, 64)]
        .iter()
        .map(|&(n, k)| TruncationScheme::uniform(n, k))
        .collect()
}

fn grid(points: usize, horizon: f64) -> Vec<f64> {
    (0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect()
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn partition_of_unity() -> Result<Outcome, String> {
    let p = pair();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1024 {
        let y: f64 = rng.random_range(-PI..=PI);
        let s: f64 = (-2..=2)
            .map(|k| p.eval_frequency(Member::Phi, y + 2.0 * PI * k as f64).norm_sqr())
            .sum();
        worst = worst.max((s - 1.0).abs());
    }
    outcome(worst < 1e-10, format!("max |sum - 1| = {worst:.2e} over 1024 points"))
}

/// Trapezoid on [-40, 40]; the integrands are band-limited, so this is
/// accurate far beyond the tolerances checked.
fn time_inner(p: &WaveletPair, a: (Base, u32, i64), b: (Base, u32, i64)) -> Result<f64, String> {
    let h = 1.0 / 128.0;
    let n = (40.0 / h) as i64;
    let mut acc = 0.0;
    for i in -n..=n {
        let t = i as f64 * h;
        acc += p.eval_time(a.0, DyadicIndex::new(a.1, a.2), t).map_err(e)?
            * p.eval_time(b.0, DyadicIndex::new(b.1, b.2), t).map_err(e)?;
    }
    Ok(acc * h)
}

fn orthonormality() -> Result<Outcome, String> {
    let p = pair();
    let psi01 = time_inner(&p, (Base::Psi, 0, 0), (Base::Psi, 0, 1))?;
    let psi10 = time_inner(&p, (Base::Psi, 0, 0), (Base::Psi, 1, 0))?;
    let psi = time_inner(&p, (Base::Psi, 0, 0), (Base::Psi, 0, 0))?;
    let phi = time_inner(&p, (Base::Phi, 0, 0), (Base::Phi, 0, 0))?;
    outcome(
        psi01.abs() < 1e-6 && psi10.abs() < 1e-6 && (psi - 1.0).abs() < 1e-4 && (phi - 1.0).abs() < 1e-4,
        format!("<psi00,psi01> = {psi01:.1e}, <psi00,psi10> = {psi10:.1e}, |psi|^2 - 1 = {:.1e}, |phi|^2 - 1 = {:.1e}", psi - 1.0, phi - 1.0),
    )
}

fn random_index(rng: &mut ChaCha8Rng) -> CoefficientIndex {
    let k = rng.random_range(-4..=4);
    match rng.random_range(0..5u32) {
        0 => CoefficientIndex::Scaling { k },
        j => CoefficientIndex::Detail { j: j - 1, k },
    }
}

fn parseval_vs_brute_force() -> Result<Outcome, String> {
    let model = se();
    let p = pair();
    let engine = CovarianceEngine::new(&model, &p, QuadSpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let a = random_index(&mut rng);
        let b = random_index(&mut rng);
        let fast = engine.coeff_cov(&a, &b).map_err(e)?;
        let slow = brute_force_cov(&model, &p, &a, &b, TimeQuad::default()).map_err(e)?;
        // moments below 1e-10 R(0) are compared on that absolute scale
        let rel = (fast - slow).abs() / slow.abs().max(1e-10 * model.variance());
        worst = worst.max(rel);
    }
    outcome(worst < 1e-5, format!("max relative disagreement {worst:.2e} over 10 pairs"))
}

fn decay_certificates() -> Result<Outcome, String> {
    let model = se();
    let p = pair();
    let ledger = compute_constants(&p, &model, 0.75, 0.4, 10.0).map_err(e)?;
    let engine = CovarianceEngine::new(&model, &p, QuadSpec::default());
    let cert = decay_certificate(&engine, &ledger.decay_constants(), &[0, 1, 2, 3, 4, 5], 32).map_err(e)?;
    let worst = cert.worst.map(|w| w.margin).unwrap_or(f64::INFINITY);
    outcome(cert.pass, format!("{} bounds checked, smallest margin {worst:.3e}", cert.entries.len()))
}

fn cross_level_sparsity() -> Result<Outcome, String> {
    let model = se();
    let p = pair();
    let engine = CovarianceEngine::new(&model, &p, QuadSpec::default());
    let mut checked = 0;
    for j in 0..=5u32 {
        for jp in (j + 2)..=6 {
            for k in -6..=6 {
                for l in -6..=6 {
                    let v = engine
                        .coeff_cov(&CoefficientIndex::Detail { j, k }, &CoefficientIndex::Detail { j: jp, k: l })
                        .map_err(e)?;
                    if v != 0.0 {
                        return outcome(false, format!("cov(eta[{j},{k}], eta[{jp},{l}]) = {v:e}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    let spots = [((0, 0), (2, 0)), ((0, 1), (2, 3)), ((1, -2), (3, 1)), ((0, 3), (3, -4)), ((1, 0), (3, 2))];
    let mut worst: f64 = 0.0;
    for ((j, k), (jp, l)) in spots {
        let v = brute_force_cov(
            &model,
            &p,
            &CoefficientIndex::Detail { j, k },
            &CoefficientIndex::Detail { j: jp, k: l },
            TimeQuad::default(),
        )
        .map_err(e)?;
        worst = worst.max(v.abs());
    }
    outcome(worst < 1e-10, format!("{checked} exact zeros; brute-force max |cov| = {worst:.1e} on 5 pairs"))
}

fn mean_square_convergence() -> Result<Outcome, String> {
    let model = se();
    let p = pair();
    let engine = CovarianceEngine::new(&model, &p, QuadSpec::default());
    let g = grid(33, 10.0);
    let max = |s: &TruncationScheme| -> Result<f64, String> {
        Ok(mse_curve(&engine, s, &g).map_err(e)?.into_iter().fold(0.0, f64::max))
    };
    let coarse = max(&TruncationScheme::uniform(1, 8))?;
    let fine = max(&TruncationScheme::uniform(6, 64))?;
    outcome(
        fine < 0.01 * model.variance() && fine < coarse / 10.0,
        format!("max MSE (1,8) = {coarse:.3e}, (6,64) = {fine:.3e}"),
    )
}

fn modulus_bound() -> Result<Outcome, String> {
    let model = se();
    let p = pair();
    let ledger = compute_constants(&p, &model, 0.75, 0.4, 10.0).map_err(e)?;
    let engine = CovarianceEngine::new(&model, &p, QuadSpec::default());
    let pairs = random_time_pairs(11, 10.0, 200);
    let report = verify_modulus_bound(&engine, &schedule(), &ledger, &pairs).map_err(e)?;
    outcome(
        report.pass,
        format!(
            "{} rows, smallest margin {:.3e}, empirical B / B = {:.2e}",
            report.rows.len(),
            report.min_margin,
            report.empirical_ratio
        ),
    )
}

fn elementary_inequalities() -> Result<Outcome, String> {
    let report = verify_elementary_inequalities(0.75, 10.0, 100_000, 5).map_err(e)?;
    let violations: usize = report.checks.iter().map(|c| c.violations).sum();
    let samples: usize = report.checks.iter().map(|c| c.samples).sum();
    outcome(
        report.pass && violations == 0,
        format!("{violations} violations over {samples} instances in {} inequalities", report.checks.len()),
    )
}

fn entropy_verdict(spec: &ModulusSpec) -> Result<EntropyVerdict, String> {
    let eps = 0.5 * spec.sigma(spec.horizon);
    Ok(entropy_integral(spec, eps, 4).map_err(e)?.verdict)
}

fn entropy_integral_verdicts() -> Result<Outcome, String> {
    use EntropyVerdict::*;
    let horizon = 10.0;
    let power = entropy_verdict(&ModulusSpec::power(1.0, 0.5, horizon).map_err(e)?)?;
    let log_hi = entropy_verdict(&ModulusSpec::log(1.0, 0.75, horizon).map_err(e)?)?;
    let log_lo = entropy_verdict(&ModulusSpec::log(1.0, 0.4, horizon).map_err(e)?)?;
    let log = |a: f64| -> Result<EntropyVerdict, String> { entropy_verdict(&ModulusSpec::log(1.0, a, horizon).map_err(e)?) };
    // exactly one flip on a scan of (0.3, 0.8)
    let scan = (1..50).map(|i| log(0.3 + 0.01 * i as f64)).collect::<Result<Vec<_>, _>>()?;
    let flips = scan.windows(2).filter(|w| w[0] != w[1]).count();
    let (mut lo, mut hi) = (0.3, 0.8);
    if log(lo)? != Diverges || log(hi)? != Converges {
        return outcome(false, "no verdict change between 0.3 and 0.8".into());
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if log(mid)? == Converges {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let flip = 0.5 * (lo + hi);
    outcome(
        power == Converges && log_hi == Converges && log_lo == Diverges && flips == 1 && (flip - 0.5).abs() < 0.05,
        format!("POWER(1,0.5) {power:?}, LOG(1,0.75) {log_hi:?}, LOG(1,0.4) {log_lo:?}, flip at alpha = {flip:.3}"),
    )
}

fn uniform_convergence_monte_carlo() -> Result<Outcome, String> {
    let model = se();
    let p = pair();
    let engine = CovarianceEngine::new(&model, &p, QuadSpec::default());
    let eps = 0.5 * model.variance().sqrt();
    let study = sup_exceedance_study(&engine, &schedule(), &grid(257, 10.0), &[eps], 2000, 20240601, true).map_err(e)?;
    let p_hat: Vec<f64> = study.rows.iter().map(|r| r.estimate.p_hat).collect();
    let strictly_decreasing = p_hat.windows(2).all(|w| w[1] < w[0]);
    let last = study.rows.last().unwrap().estimate;
    let grid_stable = study.rows.iter().all(|r| r.grid_check.is_some_and(|c| c.stable));
    let detail = format!(
        "p_hat = {p_hat:?}, final upper CI {:.2e}, strictly decreasing: {strictly_decreasing}, grid doubling stable: {grid_stable}",
        last.ci_hi
    );
    outcome(strictly_decreasing && last.ci_hi < 0.05, detail)
}

fn small_config() -> String {
    r#"{
        "wavelet": { "aux_order": 3 },
        "model": { "kernel": "squared_exponential", "variance": 1.0, "length_scale": 1.0 },
        "modulus": { "family": "LOG", "amplitude": 1.0, "exponent": 0.75 },
        "schedule": [ { "n": 1, "k0": 4, "kj": [4] }, { "n": 3, "k0": 8, "kj": [8, 6, 4] } ],
        "grid": { "horizon": 4.0, "points": 33, "mse_points": 9 },
        "parameters": {
            "alpha": 0.75, "gamma": 0.4, "eps": [0.2, 0.5], "replicates": 300, "seed": 99,
            "grid_check": true, "modulus_pairs": 20, "inequality_samples": 5000,
            "decay_levels": [0, 1, 2], "decay_k_max": 4
        },
        "expand": { "function": { "kind": "gaussian_bump", "centre": 2.0, "width": 0.4 } }
    }"#
    .into()
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            // manifests carry wall-clock timings; their checksum lists are compared separately
            !name.starts_with("manifest-") && (name.ends_with(".csv") || name.ends_with(".json"))
        })
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn manifest_outputs(dir: &Path, sub: &str) -> Result<serde_json::Value, String> {
    let text = std::fs::read_to_string(dir.join(format!("manifest-{sub}.json"))).map_err(e)?;
    let m: serde_json::Value = serde_json::from_str(&text).map_err(e)?;
    Ok(m["outputs"].clone())
}

fn determinism() -> Result<Outcome, String> {
    let tmp = tempfile::tempdir().map_err(e)?;
    let cfg = tmp.path().join("config.json");
    std::fs::write(&cfg, small_config()).map_err(e)?;
    let subs = ["check", "constants", "mse-curve", "sup-prob", "modulus", "expand-demo", "certify-decay"];
    let runs = [("a", "1"), ("b", "4"), ("c", "3")];
    for (dir, threads) in runs {
        for sub in subs {
            let status = Command::new(env!("CARGO_BIN_EXE_wavexp"))
                .args([sub, "--config", cfg.to_str().unwrap(), "--out"])
                .arg(tmp.path().join(dir))
                .args(["--threads", threads, "--dump-cov"])
                .output()
                .map_err(e)?
                .status;
            if !status.success() {
                return outcome(false, format!("{sub} exited with {status}"));
            }
        }
    }
    let reference = outputs(&tmp.path().join("a"));
    for (dir, _) in &runs[1..] {
        let other = outputs(&tmp.path().join(dir));
        if other != reference {
            let names: Vec<&String> = reference.iter().map(|f| &f.0).collect();
            return outcome(false, format!("outputs differ between thread counts among {names:?}"));
        }
        for sub in subs {
            if manifest_outputs(&tmp.path().join("a"), sub)? != manifest_outputs(&tmp.path().join(dir), sub)? {
                return outcome(false, format!("manifest checksums differ for {sub}"));
            }
        }
    }
    outcome(
        true,
        format!("{} CSV/JSON artifacts of 7 subcommands identical across 3 runs with 1, 4 and 3 threads", reference.len()),
    )
}

fn main() {
    let criteria: [(&str, Criterion, Option<Duration>); 11] = [
        ("partition of unity", partition_of_unity, Some(Duration::from_secs(1))),
        ("orthonormality", orthonormality, Some(Duration::from_secs(10))),
        ("Parseval vs brute force", parseval_vs_brute_force, Some(Duration::from_secs(60))),
        ("decay certificates", decay_certificates, Some(Duration::from_secs(300))),
        ("cross-level sparsity", cross_level_sparsity, None),
        ("mean-square convergence", mean_square_convergence, Some(Duration::from_secs(600))),
        ("modulus bound", modulus_bound, Some(Duration::from_secs(300))),
        ("elementary inequalities", elementary_inequalities, None),
        ("entropy integral", entropy_integral_verdicts, None),
        ("uniform convergence Monte Carlo", uniform_convergence_monte_carlo, Some(Duration::from_secs(600))),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (mut pass, mut detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(err) => (false, format!("error: {err}")),
        };
        if let Some(limit) = limit.filter(|l| elapsed > *l) {
            pass = false;
            detail.push_str(&format!("; runtime over the {} s limit", limit.as_secs()));
        }
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
