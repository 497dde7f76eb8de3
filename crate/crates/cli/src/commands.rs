//! One function per subcommand. Each returns whether every verdict passed.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use wavexp_core::admissibility::{entropy_integral, EntropyVerdict, SupGrid};
use wavexp_core::covariance::DecayBound;
use wavexp_core::{
    assemble_joint, build_meyer_pair, check_spectral_conditions, check_wavelet_conditions, compute_constants,
    decay_certificate, deterministic_expand, mse_curve, sup_exceedance_study, verify_elementary_inequalities,
    verify_modulus_bound, CoefficientIndex, ConditionReport, ConstantsLedger, CovarianceEngine, ModulusSpec,
    QuadSpec, SpectralCheck, SpectralModel, TruncationScheme, Verdict, WaveletPair,
};

use crate::config::{ExperimentConfig, DEFAULT_CONFIG};
use crate::output::{num, Csv, OutputDir};
use crate::plot;
use crate::{Cli, CliError, Command};

/// Gauss-Legendre panels per decade in the entropy integral.
const ENTROPY_PANELS: usize = 4;

pub fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    if let Command::Plot { input } = &cli.command {
        return plot_command(cli, input.clone());
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::parse(DEFAULT_CONFIG)?,
    };
    if let Some(seed) = cli.seed {
        cfg.parameters.seed = seed;
    }
    let out_dir = output_dir(cli, &cfg)?;
    let ctx = Context::new(cfg)?;
    let mut out = OutputDir::create(&out_dir)?;
    let (pass, jitter) = match cli.command {
        Command::Check => (check(&ctx, &mut out)?, Vec::new()),
        Command::Constants => (constants(&ctx, &mut out)?, Vec::new()),
        Command::MseCurve => mse(&ctx, &mut out, cli.dump_cov)?,
        Command::SupProb => sup_prob(&ctx, &mut out, cli.dump_cov)?,
        Command::Modulus => (modulus(&ctx, &mut out)?, Vec::new()),
        Command::ExpandDemo => (expand_demo(&ctx, &mut out)?, Vec::new()),
        Command::CertifyDecay => (certify_decay(&ctx, &mut out)?, Vec::new()),
        Command::Plot { .. } => unreachable!("handled above"),
    };
    out.finish(cli.command.name(), &ctx.cfg, &jitter)?;
    Ok(pass)
}

fn output_dir(cli: &Cli, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    cli.out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Validation("no output directory: pass --out or set \"output\"".into()))
}

/// Validated inputs shared by the subcommands.
struct Context {
    cfg: ExperimentConfig,
    pair: WaveletPair,
    model: SpectralModel,
}

impl Context {
    fn new(cfg: ExperimentConfig) -> Result<Self, CliError> {
        let invalid = |e: wavexp_core::Error| CliError::Validation(e.to_string());
        Ok(Self {
            pair: build_meyer_pair(cfg.wavelet.aux_order).map_err(invalid)?,
            model: cfg.model.build().map_err(invalid)?,
            cfg,
        })
    }

    fn engine(&self) -> CovarianceEngine<'_> {
        CovarianceEngine::new(&self.model, &self.pair, QuadSpec::default())
    }

    fn spectral_report(&self) -> ConditionReport {
        check_spectral_conditions(&self.model, &SpectralCheck::for_model(&self.model))
    }

    /// Refuses models whose density fails the spectral conditions: every
    /// downstream bound presupposes them.
    fn require_spectral_conditions(&self) -> Result<(), CliError> {
        let report = self.spectral_report();
        if report.all_pass() {
            Ok(())
        } else {
            Err(CliError::Condition(format!("spectral conditions not met\n{}", report.to_table())))
        }
    }

    fn ledger(&self) -> Result<ConstantsLedger, CliError> {
        let p = &self.cfg.parameters;
        Ok(compute_constants(&self.pair, &self.model, p.alpha, p.gamma, self.cfg.grid.horizon)?)
    }
}

fn check(ctx: &Context, out: &mut OutputDir) -> Result<bool, CliError> {
    let p = &ctx.cfg.parameters;
    let mut report = out.timed("wavelet", || check_wavelet_conditions(&ctx.pair, p.gamma, p.alpha, SupGrid::default()))?;
    report.extend(out.timed("spectral", || ctx.spectral_report()));
    let m = &ctx.cfg.modulus;
    let spec = ModulusSpec::new(m.family, m.amplitude, m.exponent, ctx.cfg.grid.horizon)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let eps = m.entropy_fraction * spec.sigma(spec.horizon);
    let entropy = out.timed("entropy", || entropy_integral(&spec, eps, ENTROPY_PANELS))?;
    report.push(
        "entropy_integral",
        match entropy.verdict {
            EntropyVerdict::Converges => Verdict::Pass,
            EntropyVerdict::Diverges => Verdict::Fail,
        },
        vec![("value".into(), entropy.value), ("eps".into(), eps)],
        "entropy integral of the configured modulus of continuity is finite",
    );
    out.write_json("condition_report.json", &report)?;
    out.write("condition_report.txt", report.to_table().as_bytes())?;
    eprint!("{}", report.to_table());
    Ok(report.all_pass())
}

fn constants(ctx: &Context, out: &mut OutputDir) -> Result<bool, CliError> {
    ctx.require_spectral_conditions()?;
    let ledger = out.timed("ledger", || ctx.ledger())?;
    let p = &ctx.cfg.parameters;
    let ineq = out.timed("inequalities", || {
        verify_elementary_inequalities(p.alpha, ctx.cfg.grid.horizon, p.inequality_samples, p.seed)
    })?;
    out.write_json("constants.json", &ledger)?;
    out.write_json("inequalities.json", &ineq)?;
    Ok(ineq.pass)
}

/// All coefficients of every scheme, in canonical order.
fn union(schemes: &[TruncationScheme]) -> Vec<CoefficientIndex> {
    let set: std::collections::BTreeSet<_> = schemes.iter().flat_map(|s| s.indices()).collect();
    set.into_iter().collect()
}

fn dump_joint(ctx: &Context, out: &mut OutputDir, grid: &[f64]) -> Result<f64, CliError> {
    let engine = ctx.engine();
    let cov = out.timed("dump_cov", || assemble_joint(&engine, &union(&ctx.cfg.schedule), grid))?;
    let labels: Vec<String> = (0..cov.dim())
        .map(|i| match cov.index(i) {
            wavexp_core::covariance::JointIndex::Time(t) => format!("X({})", num(t)),
            wavexp_core::covariance::JointIndex::Coefficient(c) => c.label().replace(',', ";"),
        })
        .collect();
    let mut header = vec!["row"];
    header.extend(labels.iter().map(String::as_str));
    let mut csv = Csv::new(&header);
    for i in 0..cov.dim() {
        let mut row = vec![labels[i].clone()];
        row.extend((0..cov.dim()).map(|j| num(cov.matrix()[(i, j)])));
        csv.row(&row);
    }
    out.write("joint_cov.csv", &csv.into_bytes())?;
    Ok(cov.relative_jitter())
}

fn mse(ctx: &Context, out: &mut OutputDir, dump_cov: bool) -> Result<(bool, Vec<f64>), CliError> {
    ctx.require_spectral_conditions()?;
    let engine = ctx.engine();
    let grid = ctx.cfg.grid.uniform(ctx.cfg.grid.mse_points);
    let mut csv = Csv::new(&plot::MSE_COLUMNS);
    for scheme in &ctx.cfg.schedule {
        let curve = out.timed(&format!("mse_{}_{}", scheme.n(), scheme.max_shift()), || {
            mse_curve(&engine, scheme, &grid)
        })?;
        for (t, m) in grid.iter().zip(curve) {
            csv.row(&[scheme.n().to_string(), scheme.max_shift().to_string(), num(*t), num(m)]);
        }
    }
    out.write("mse_curve.csv", &csv.into_bytes())?;
    let jitter = if dump_cov { vec![dump_joint(ctx, out, &grid)?] } else { Vec::new() };
    Ok((true, jitter))
}

fn sup_prob(ctx: &Context, out: &mut OutputDir, dump_cov: bool) -> Result<(bool, Vec<f64>), CliError> {
    ctx.require_spectral_conditions()?;
    let engine = ctx.engine();
    let p = &ctx.cfg.parameters;
    let grid = ctx.cfg.grid.uniform(ctx.cfg.grid.points);
    let eps = ctx.cfg.absolute_eps(&ctx.model);
    let study = out.timed("sup_prob", || {
        sup_exceedance_study(&engine, &ctx.cfg.schedule, &grid, &eps, p.replicates, p.seed, p.grid_check)
    })?;
    let mut csv = Csv::new(&plot::SUP_COLUMNS);
    for (i, row) in study.rows.iter().enumerate() {
        let e = &row.estimate;
        csv.row(&[
            row.scheme.n().to_string(),
            row.scheme.max_shift().to_string(),
            num(p.eps[i % p.eps.len()]),
            num(e.p_hat),
            num(e.ci_lo),
            num(e.ci_hi),
            e.replicates.to_string(),
            p.seed.to_string(),
        ]);
        if let Some(check) = row.grid_check.filter(|c| !c.stable) {
            eprintln!(
                "warning: scheme ({}, {}) eps {}: refining the grid moved p_hat by {} (interval half-width {})",
                row.scheme.n(),
                row.scheme.max_shift(),
                p.eps[i % p.eps.len()],
                check.delta,
                check.half_width
            );
        }
    }
    out.write("sup_prob.csv", &csv.into_bytes())?;
    out.write_json("sup_prob_checks.json", &study)?;
    let mut jitter = study.jitter.clone();
    if dump_cov {
        jitter.push(dump_joint(ctx, out, &grid)?);
    }
    Ok((true, jitter))
}

/// Random `(t, s)` pairs on `[0, T]²`, reproducible from the seed.
pub fn random_time_pairs(seed: u64, horizon: f64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.random_range(0.0..=horizon), rng.random_range(0.0..=horizon)))
        .collect()
}

#[derive(Serialize)]
struct ModulusSummary {
    pass: bool,
    min_margin: f64,
    b: f64,
    empirical_b: f64,
    empirical_ratio: f64,
    pairs: usize,
    schemes: usize,
}

fn modulus(ctx: &Context, out: &mut OutputDir) -> Result<bool, CliError> {
    ctx.require_spectral_conditions()?;
    let ledger = out.timed("ledger", || ctx.ledger())?;
    let p = &ctx.cfg.parameters;
    let pairs = random_time_pairs(p.seed, ctx.cfg.grid.horizon, p.modulus_pairs);
    let engine = ctx.engine();
    let report = out.timed("modulus", || verify_modulus_bound(&engine, &ctx.cfg.schedule, &ledger, &pairs))?;
    let mut csv = Csv::new(&plot::MODULUS_COLUMNS);
    for r in &report.rows {
        csv.row(&[r.n.to_string(), r.k.to_string(), num(r.t), num(r.s), num(r.lhs), num(r.bound), num(r.margin)]);
    }
    out.write("modulus_check.csv", &csv.into_bytes())?;
    out.write_json(
        "modulus_report.json",
        &ModulusSummary {
            pass: report.pass,
            min_margin: report.min_margin,
            b: ledger.b,
            empirical_b: report.empirical_b,
            empirical_ratio: report.empirical_ratio,
            pairs: pairs.len(),
            schemes: ctx.cfg.schedule.len(),
        },
    )?;
    Ok(report.pass)
}

#[derive(Serialize)]
struct ExpansionSummary {
    n: u32,
    k: u64,
    coefficients: usize,
    l2_error: f64,
    energy: f64,
    norm_sq: f64,
    energy_within_norm: bool,
}

fn expand_demo(ctx: &Context, out: &mut OutputDir) -> Result<bool, CliError> {
    let f = ctx.cfg.expand.function;
    let grid = ctx.cfg.grid.uniform(ctx.cfg.grid.points);
    let mut csv = Csv::new(&["n", "k", "t", "f", "reconstruction"]);
    let mut summary = Vec::new();
    for scheme in &ctx.cfg.schedule {
        let e = out.timed(&format!("expand_{}_{}", scheme.n(), scheme.max_shift()), || {
            deterministic_expand(&ctx.pair, &f, scheme, &grid)
        })?;
        for (t, r) in grid.iter().zip(&e.reconstruction) {
            csv.row(&[scheme.n().to_string(), scheme.max_shift().to_string(), num(*t), num(f.eval(*t)), num(*r)]);
        }
        summary.push(ExpansionSummary {
            n: scheme.n(),
            k: scheme.max_shift(),
            coefficients: e.coefficients.len(),
            l2_error: e.l2_error,
            energy: e.energy,
            norm_sq: e.norm_sq,
            energy_within_norm: e.energy <= e.norm_sq + 1e-8,
        });
    }
    out.write("expansion.csv", &csv.into_bytes())?;
    out.write_json("expansion_summary.json", &summary)?;
    Ok(summary.iter().all(|s| s.energy_within_norm))
}

#[derive(Serialize)]
struct DecaySummary {
    pass: bool,
    entries: usize,
    levels: Vec<u32>,
    k_max: i64,
    constants: wavexp_core::DecayConstants,
    worst: Option<wavexp_core::covariance::DecayEntry>,
}

fn bound_name(b: DecayBound) -> &'static str {
    match b {
        DecayBound::DetailOffDiagonal => "detail_off_diagonal",
        DecayBound::DetailDiagonal => "detail_diagonal",
        DecayBound::ScalingOffDiagonal => "scaling_off_diagonal",
        DecayBound::ScalingDiagonal => "scaling_diagonal",
    }
}

fn certify_decay(ctx: &Context, out: &mut OutputDir) -> Result<bool, CliError> {
    ctx.require_spectral_conditions()?;
    let ledger = out.timed("ledger", || ctx.ledger())?;
    let p = &ctx.cfg.parameters;
    let engine = ctx.engine();
    let constants = ledger.decay_constants();
    let cert = out.timed("certificate", || {
        decay_certificate(&engine, &constants, &p.decay_levels, p.decay_k_max)
    })?;
    let mut csv = Csv::new(&["kind", "j", "k", "l", "actual", "bound", "margin"]);
    for e in &cert.entries {
        csv.row(&[
            bound_name(e.bound_kind).into(),
            e.j.to_string(),
            e.k.to_string(),
            e.l.to_string(),
            num(e.actual),
            num(e.bound),
            num(e.margin),
        ]);
    }
    out.write("decay_certificate.csv", &csv.into_bytes())?;
    out.write_json(
        "decay_certificate.json",
        &DecaySummary {
            pass: cert.pass,
            entries: cert.entries.len(),
            levels: p.decay_levels.clone(),
            k_max: p.decay_k_max,
            constants,
            worst: cert.worst,
        },
    )?;
    if let Some(w) = cert.worst.filter(|_| !cert.pass) {
        eprintln!("decay bound violated: {w:?}");
    }
    Ok(cert.pass)
}

fn plot_command(cli: &Cli, input: Option<PathBuf>) -> Result<bool, CliError> {
    let out_dir = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Validation("plot needs --out".into()))?;
    let input = input.unwrap_or_else(|| out_dir.clone());
    let charts: [(&str, &[&str], fn(&[Vec<f64>]) -> plot::Chart, &str); 3] = [
        ("mse_curve.csv", &plot::MSE_COLUMNS, plot::mse_chart, "mse.svg"),
        ("sup_prob.csv", &plot::SUP_COLUMNS, plot::sup_chart, "sup_prob.svg"),
        ("modulus_check.csv", &plot::MODULUS_COLUMNS, plot::modulus_chart, "modulus.svg"),
    ];
    let present: Vec<_> = charts.iter().filter(|c| input.join(c.0).is_file()).collect();
    if present.is_empty() {
        return Err(CliError::Validation(format!(
            "no mse_curve.csv, sup_prob.csv or modulus_check.csv in {}",
            input.display()
        )));
    }
    // read everything first so a schema error leaves no partial output
    let tables = present
        .iter()
        .map(|c| plot::read_table(&input.join(c.0), c.1))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = OutputDir::create(&out_dir)?;
    for (c, rows) in present.iter().zip(&tables) {
        out.write(c.3, (c.2)(rows).to_svg().as_bytes())?;
    }
    out.finish("plot", &serde_json::json!({ "input": input }), &[])?;
    Ok(true)
}
