//! The acceptance suite: eleven numbered criteria, each with pinned
//! tolerances, runnable one at a time (the `acceptance` integration tests)
//! or together (the `acceptance` subcommand).

use crate::config::{LogBase, OutputFormat};
use crate::csvio::{Cell, Table};
use crate::error::Result;
use crate::figures::{paper_profile, run_figure, FigureContext, FigureId, FigureRun};
use crate::tool_version;
use cyclocap::{
    build_density_model, bruteforce_capacity, capacity_sequence, charfn_v, empirical_charfn,
    p_lim_estimate, sample_density, sample_variances, sync_capacity, theorem1_check, AsyncOptions,
    DtVarianceSeq, PlimDirection, Rational, Theorem1Options,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

pub const CRITERION_COUNT: u32 = 11;

#[derive(Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// The one-line verdict the suite prints per criterion.
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} ({}): {} [{:.2}s]",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64()
        )
    }
}

struct Checker {
    passed: bool,
    details: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("     {detail}"));
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed <= limit,
            format!(
                "runtime {:.3}s within {:.3}s",
                elapsed.as_secs_f64(),
                limit.as_secs_f64()
            ),
        );
    }
}

/// Runs one criterion; `out_dir` receives any artifacts it emits.
pub fn run_criterion(id: u32, out_dir: &Path, seed: u64) -> Result<CriterionResult> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| crate::error::CliError::Io(format!("cannot create out dir: {e}")))?;
    let start = Instant::now();
    let (name, checker) = match id {
        1 => ("awgn sanity", criterion_awgn()?),
        2 => ("water-filling vs brute-force oracle", criterion_oracle(seed)?),
        3 => ("eps=0 constancy and scaling invariance", criterion_invariances()?),
        4 => ("capacity-sequence reference ranges", criterion_sequence_figures(out_dir)?),
        5 => ("sampling-ratio reference values", criterion_ratio_figures(out_dir)?),
        6 => ("sampling-rate sensitivity vs power", criterion_power_figures(out_dir)?),
        7 => ("density mean identity", criterion_mean_identity(seed)?),
        8 => ("density concentration rate", criterion_concentration(seed)?),
        9 => ("characteristic function agreement", criterion_charfn(seed)?),
        10 => ("limit interchange", criterion_theorem1(seed)?),
        11 => ("byte-identical reruns", criterion_determinism(out_dir, seed)?),
        other => {
            return Err(crate::error::CliError::Domain(format!(
                "criterion id must be 1..={CRITERION_COUNT}, got {other}"
            )))
        }
    };
    Ok(CriterionResult {
        id,
        name,
        passed: checker.passed,
        details: checker.details,
        elapsed: start.elapsed(),
    })
}

/// Runs the whole suite in order.
pub fn run_all(out_dir: &Path, seed: u64) -> Result<Vec<CriterionResult>> {
    (1..=CRITERION_COUNT)
        .map(|id| run_criterion(id, out_dir, seed))
        .collect()
}

pub fn write_report(results: &[CriterionResult], path: &Path) -> Result<()> {
    let mut out = format!("# {} acceptance report\n", tool_version());
    for r in results {
        out.push_str(&r.line());
        out.push('\n');
        for d in &r.details {
            out.push_str("    ");
            out.push_str(d);
            out.push('\n');
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    std::fs::write(path, out)
        .map_err(|e| crate::error::CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn seq(values: &[f64]) -> DtVarianceSeq {
    DtVarianceSeq::from_values(values.to_vec()).expect("positive variances")
}

// Criterion 1: equal variances 1 at P=1 give exactly half a bit.
fn criterion_awgn() -> Result<Checker> {
    let mut c = Checker::new();
    let vars = seq(&[1.0, 1.0]);
    let t = Instant::now();
    let sol = sync_capacity(&vars, 1.0)?;
    let elapsed = t.elapsed();
    let err = (sol.capacity_bits - 0.5).abs();
    c.check(err <= 1e-9, format!("|capacity - 0.5 bits| = {err:.2e} <= 1e-9"));
    c.runtime(elapsed, Duration::from_millis(1));
    Ok(c)
}

// Criterion 2: 50 randomized short-period instances against the exhaustive
// oracle.
fn criterion_oracle(seed: u64) -> Result<Checker> {
    let mut c = Checker::new();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC2);
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for i in 0..50 {
        let n = rng.random_range(1..=4);
        let vars: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let power = rng.random_range(0.1..10.0);
        let s = seq(&vars);
        let sol = sync_capacity(&s, power)?;
        let oracle = bruteforce_capacity(&s, power, 150)?;
        let gap = (sol.capacity_bits - oracle).abs();
        let kkt = sol.kkt_residual(&s);
        worst_gap = worst_gap.max(gap);
        worst_kkt = worst_kkt.max(kkt);
        if gap > 2e-3 || kkt > 1e-9 {
            c.check(false, format!("instance {i} ({vars:?}, P={power}): gap {gap:.2e}, kkt {kkt:.2e}"));
        }
    }
    c.check(
        worst_gap <= 2e-3,
        format!("worst |waterfill - oracle| = {worst_gap:.2e} <= 2e-3 bits over 50 instances"),
    );
    c.check(worst_kkt <= 1e-9, format!("worst KKT residual = {worst_kkt:.2e} <= 1e-9"));
    c.runtime(t.elapsed(), Duration::from_secs(30));
    Ok(c)
}

// Criterion 3: the capacity sequence is exactly constant at eps = 0, and
// capacity is invariant under joint noise/power scaling.
fn criterion_invariances() -> Result<Checker> {
    let mut c = Checker::new();
    let profile = paper_profile(0.47, 0.0);
    let sequence = capacity_sequence(&profile, 3, 0.0, 1.0, 1, 100, &AsyncOptions::default())?;
    let first = sequence.entries[0].capacity_bits;
    let max_dev = sequence
        .entries
        .iter()
        .map(|e| (e.capacity_bits - first).abs())
        .fold(0.0, f64::max);
    c.check(
        max_dev <= 1e-12,
        format!("C_n constant for n = 1..100: max deviation {max_dev:.2e} <= 1e-12"),
    );

    let base = [0.2, 5.0, 0.2];
    let c0 = sync_capacity(&seq(&base), 1.0)?.capacity_bits;
    for kappa in [0.1f64, 3.0, 10.0] {
        let k2 = kappa * kappa;
        let scaled: Vec<f64> = base.iter().map(|&v| k2 * v).collect();
        let ck = sync_capacity(&seq(&scaled), k2)?.capacity_bits;
        let dev = (ck - c0).abs();
        c.check(
            dev <= 1e-12,
            format!("scaling kappa={kappa}: |C(k^2 s, k^2 P) - C(s, P)| = {dev:.2e} <= 1e-12"),
        );
    }
    Ok(c)
}

fn write_figure_report(out_dir: &Path, run: &FigureRun) -> Result<()> {
    let path = out_dir.join(format!("{}_report.txt", run.id.name()));
    std::fs::write(&path, run.report())
        .map_err(|e| crate::error::CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn append_figure(c: &mut Checker, run: &FigureRun) {
    let base = run.reconciled_convention();
    c.note(format!(
        "{}: reconciled convention = {}",
        run.id.name(),
        base.column_suffix()
    ));
    for t in &run.targets {
        let line = format!(
            "{}: reference {} measured {:.5} bits / {:.5} nats (residual {:.5}, tol {})",
            t.name,
            t.reference,
            t.measured_bits,
            t.measured_nats,
            t.residual(base),
            t.tolerance
        );
        if t.gating {
            c.check(t.passes(base), line);
        } else {
            c.note(format!("informational {line}"));
        }
    }
    for b in &run.bounds {
        c.check(b.passed, format!("{}: {}", b.name, b.detail));
    }
}

fn figure_ctx(out_dir: &Path) -> FigureContext {
    FigureContext {
        out_dir: out_dir.to_path_buf(),
        format: OutputFormat::Csv,
        log_base: LogBase::Bits,
        verbose: false,
    }
}

// Criterion 4: reference ranges of C_n over n in [5, 15] at both offsets,
// with the degraded behavioral check when neither convention reconciles.
fn criterion_sequence_figures(out_dir: &Path) -> Result<Checker> {
    let mut c = Checker::new();
    let t = Instant::now();
    let ctx = figure_ctx(out_dir);
    let fig3 = run_figure(FigureId::Fig3, &ctx)?;
    let fig4 = run_figure(FigureId::Fig4, &ctx)?;
    write_figure_report(out_dir, &fig3)?;
    write_figure_report(out_dir, &fig4)?;

    let reconciles = |run: &FigureRun| {
        let base = run.reconciled_convention();
        run.targets.iter().filter(|t| t.gating).all(|t| t.passes(base))
    };
    if reconciles(&fig3) && reconciles(&fig4) {
        append_figure(&mut c, &fig3);
        append_figure(&mut c, &fig4);
    } else {
        // Degraded form: the two offsets must still give different ranges
        // and the sequence must settle for n >= 250.
        c.note("no log convention reconciles the reference ranges; running degraded checks".into());
        append_figure(&mut c, &fig3);
        append_figure(&mut c, &fig4);
        let range = |run: &FigureRun| {
            (
                run.targets[0].measured_bits,
                run.targets[1].measured_bits,
            )
        };
        let (min0, max0) = range(&fig3);
        let (min25, max25) = range(&fig4);
        c.check(
            (min0 - min25).abs() + (max0 - max25).abs() > 1e-6,
            format!("offset ranges differ: [{min0:.4},{max0:.4}] vs [{min25:.4},{max25:.4}]"),
        );
        let profile = paper_profile(0.95, 0.0);
        let seq500 = capacity_sequence(&profile, 2, PI / 7.0, 1.0, 1, 500, &AsyncOptions::default())?;
        let est = cyclocap::liminf_estimate(&seq500, 250, 0.01)?;
        c.check(
            est.tail_spread_bits < 0.01,
            format!("tail spread over n in [251,500] = {:.5} bits < 0.01", est.tail_spread_bits),
        );
    }
    for n in fig3.notes.iter().chain(&fig4.notes) {
        c.note(n.clone());
    }
    c.runtime(t.elapsed(), Duration::from_secs(120));
    Ok(c)
}

// Criterion 5: the synchronous spike, its offset sensitivity, the
// asynchronous plateau, and the quoted reference values at ratio 3.
fn criterion_ratio_figures(out_dir: &Path) -> Result<Checker> {
    let mut c = Checker::new();
    let ctx = figure_ctx(out_dir);
    let fig5 = run_figure(FigureId::Fig5, &ctx)?;
    let fig6 = run_figure(FigureId::Fig6, &ctx)?;
    write_figure_report(out_dir, &fig5)?;
    write_figure_report(out_dir, &fig6)?;
    append_figure(&mut c, &fig5);
    append_figure(&mut c, &fig6);
    for n in fig5.notes.iter().chain(&fig6.notes) {
        c.note(n.clone());
    }
    Ok(c)
}

// Criterion 6: the capacity drop when the sampling turns asynchronous, and
// offset invariance of the asynchronous curve.
fn criterion_power_figures(out_dir: &Path) -> Result<Checker> {
    let mut c = Checker::new();
    let t = Instant::now();
    let ctx = figure_ctx(out_dir);
    let fig7 = run_figure(FigureId::Fig7, &ctx)?;
    let fig8 = run_figure(FigureId::Fig8, &ctx)?;
    write_figure_report(out_dir, &fig7)?;
    write_figure_report(out_dir, &fig8)?;
    append_figure(&mut c, &fig7);
    append_figure(&mut c, &fig8);
    for n in fig7.notes.iter().chain(&fig8.notes) {
        c.note(n.clone());
    }
    c.runtime(t.elapsed(), Duration::from_secs(120));
    Ok(c)
}

/// The five pinned density scenarios. Periods all divide 1e4, so block
/// means tile the period exactly.
fn density_scenarios() -> Result<Vec<(String, DtVarianceSeq, f64)>> {
    let cap = cyclocap::DEFAULT_PERIOD_CAP;
    let p47 = paper_profile(0.47, 0.0);
    let p95 = paper_profile(0.95, 0.0);
    let half = Rational::new(1, 2).expect("1/2");
    Ok(vec![
        ("unit AWGN, P=1".into(), seq(&[1.0]), 1.0),
        (
            "dc=47% td=2 eps=0, P=1".into(),
            sample_variances(&p47, 2, &Rational::zero(), cap)?,
            1.0,
        ),
        (
            "dc=47% td=4 eps=0, P=1".into(),
            sample_variances(&p47, 4, &Rational::zero(), cap)?,
            1.0,
        ),
        (
            "dc=95% td=2 eps=1/2, P=1".into(),
            sample_variances(&p95, 2, &half, cap)?,
            1.0,
        ),
        (
            "dc=47% td=2 eps=1/2, P=10".into(),
            sample_variances(&p47, 2, &half, cap)?,
            10.0,
        ),
    ])
}

// Criterion 7: the Monte Carlo mean of Z'_k matches the water-filling
// capacity in nats within three standard errors.
fn criterion_mean_identity(seed: u64) -> Result<Checker> {
    let mut c = Checker::new();
    let t = Instant::now();
    for (i, (name, vars, power)) in density_scenarios()?.into_iter().enumerate() {
        let capacity = sync_capacity(&vars, power)?.capacity_nats;
        let model = build_density_model(&vars, power)?;
        let batch = sample_density(&model, 10_000, 1000, seed.wrapping_add(i as u64))?;
        let se = (batch.variance() / batch.samples.len() as f64).sqrt();
        let err = (batch.mean() - capacity).abs();
        c.check(
            err <= 3.0 * se,
            format!("{name}: |mean - capacity| = {err:.2e} <= 3*SE = {:.2e}", 3.0 * se),
        );
    }
    c.runtime(t.elapsed(), Duration::from_secs(60));
    Ok(c)
}

// Criterion 8: Var(Z'_k) scales like 1/k.
fn criterion_concentration(seed: u64) -> Result<Checker> {
    let mut c = Checker::new();
    let profile = paper_profile(0.47, 0.0);
    let vars = sample_variances(
        &profile,
        2,
        &Rational::new(1, 2).expect("1/2"),
        cyclocap::DEFAULT_PERIOD_CAP,
    )?;
    let model = build_density_model(&vars, 1.0)?;
    let points: Vec<(f64, f64)> = [100usize, 1000, 10_000]
        .iter()
        .map(|&k| {
            let b = sample_density(&model, k, 1000, seed ^ 0xC8)?;
            Ok(((k as f64).ln(), b.variance().ln()))
        })
        .collect::<Result<_>>()?;
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    c.check(
        (slope + 1.0).abs() <= 0.1,
        format!("log Var(Z'_k) vs log k slope = {slope:.4} within -1 +/- 0.1"),
    );
    Ok(c)
}

// Criterion 9: analytic characteristic function vs the empirical one.
fn criterion_charfn(seed: u64) -> Result<Checker> {
    let mut c = Checker::new();
    let model = build_density_model(&seq(&[1.0]), 1.0)?;
    let alphas: Vec<f64> = (0..=100).map(|i| -5.0 + 0.1 * i as f64).collect();
    let empirical = empirical_charfn(&model[0], &alphas, 100_000, seed ^ 0xC9)?;
    let mut sup = 0.0f64;
    for (&alpha, emp) in alphas.iter().zip(&empirical) {
        sup = sup.max((charfn_v(alpha, &model[0]) - emp).norm());
    }
    c.check(
        sup <= 0.01,
        format!("sup over alpha in [-5,5] of |analytic - empirical| = {sup:.5} <= 0.01 (1e5 draws)"),
    );
    Ok(c)
}

// Criterion 10: the per-order p-liminf estimates approach the high-order
// proxy, with clean monotonicity flags.
fn criterion_theorem1(seed: u64) -> Result<Checker> {
    let mut c = Checker::new();
    let t = Instant::now();
    let profile = paper_profile(0.47, 0.0);
    let opts = Theorem1Options::default();
    let report = theorem1_check(
        &profile,
        2,
        PI / 7.0,
        1.0,
        &[10, 50, 200],
        &[100, 1000, 10_000],
        seed ^ 0xCA,
        &opts,
    )?;
    for f in &report.families {
        c.note(format!(
            "n={}: eps_n={} capacity {:.5} nats, estimate {:.5}, gap {:.5}",
            f.n, f.eps_n, f.capacity_nats, f.estimate.value, f.gap_nats
        ));
    }
    c.note(format!(
        "proxy eps={} capacity {:.5} nats, estimate {:.5}",
        report.proxy_eps, report.proxy_capacity_nats, report.proxy_estimate.value
    ));
    let last_gap = report.families.last().map(|f| f.gap_nats).unwrap_or(f64::NAN);
    c.check(
        last_gap <= opts.tolerance_nats,
        format!("final-order gap {last_gap:.5} <= {}", opts.tolerance_nats),
    );
    c.check(report.interchange_ok, "per-order estimates approach the proxy".into());
    c.check(
        report.monotone_flags_clean,
        format!("monotone flags clean (notes: {:?})", report.notes),
    );
    c.runtime(t.elapsed(), Duration::from_secs(300));
    Ok(c)
}

/// Emits every CSV artifact the suite produces: the six figures plus the
/// Monte Carlo density summary.
pub fn emit_artifacts(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| crate::error::CliError::Io(format!("cannot create out dir: {e}")))?;
    let ctx = figure_ctx(out_dir);
    let mut paths = Vec::new();
    for id in FigureId::all() {
        let run = run_figure(id, &ctx)?;
        let report_path = out_dir.join(format!("{}_report.txt", id.name()));
        std::fs::write(&report_path, run.report())
            .map_err(|e| crate::error::CliError::Io(e.to_string()))?;
        paths.extend(run.artifacts);
    }
    paths.push(density_summary_table(out_dir, seed)?);
    Ok(paths)
}

/// Per-blocklength density statistics for a pinned scenario, as one CSV.
fn density_summary_table(out_dir: &Path, seed: u64) -> Result<PathBuf> {
    let profile = paper_profile(0.47, 0.0);
    let vars = sample_variances(
        &profile,
        2,
        &Rational::new(2, 5).expect("2/5"),
        cyclocap::DEFAULT_PERIOD_CAP,
    )?;
    let model = build_density_model(&vars, 1.0)?;
    let ks = [100usize, 1000, 10_000];
    let batches: Vec<_> = ks
        .iter()
        .map(|&k| sample_density(&model, k, 400, seed))
        .collect::<cyclocap::Result<_>>()?;
    let inf = p_lim_estimate(&batches, PlimDirection::Inf, 0.05, 0.0025)?;
    let sup = p_lim_estimate(&batches, PlimDirection::Sup, 0.05, 0.0025)?;

    let hash = crate::short_hash(format!("density dc=47 td=2 eps=2/5 seed={seed}").as_bytes());
    let mut table = Table::new(
        vec![format!("{} scenario={hash} log_base=e", tool_version())],
        vec!["k", "mean_nats", "variance", "p_liminf_nats", "p_limsup_nats"],
    );
    for b in &batches {
        table.push(vec![
            Cell::Int(b.k as u64),
            Cell::Float(b.mean()),
            Cell::Float(b.variance()),
            Cell::Float(inf.value),
            Cell::Float(sup.value),
        ]);
    }
    let path = out_dir.join("density_summary.csv");
    table.write(&path)?;
    Ok(path)
}

// Criterion 11: re-running the artifact emission with the same seed
// reproduces every CSV byte for byte.
fn criterion_determinism(out_dir: &Path, seed: u64) -> Result<Checker> {
    let mut c = Checker::new();
    let dir_a = out_dir.join("determinism_a");
    let dir_b = out_dir.join("determinism_b");
    let paths_a = emit_artifacts(&dir_a, seed)?;
    let paths_b = emit_artifacts(&dir_b, seed)?;
    c.check(
        paths_a.len() == paths_b.len(),
        format!("both runs emitted {} artifacts", paths_a.len()),
    );
    let mut all_equal = true;
    let mut compared = 0;
    for (a, b) in paths_a.iter().zip(&paths_b) {
        if a.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        compared += 1;
        let bytes_a = std::fs::read(a).map_err(|e| crate::error::CliError::Io(e.to_string()))?;
        let bytes_b = std::fs::read(b).map_err(|e| crate::error::CliError::Io(e.to_string()))?;
        if bytes_a != bytes_b {
            all_equal = false;
            c.check(false, format!("{} differs between runs", a.display()));
        }
    }
    c.check(
        all_equal && compared > 0,
        format!("{compared} CSV artifacts byte-identical across reruns (seed {seed})"),
    );
    Ok(c)
}
