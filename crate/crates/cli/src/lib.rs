//! Scenario-driven front end: configuration parsing, sweeps, figure
//! reproduction, CSV/SVG emission, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod csvio;
pub mod error;
pub mod figures;
pub mod svg;

use config::{LogBase, OutputFormat, Scenario, SweepSpec};
use csvio::{Cell, Table};
use cyclocap::{
    build_density_model, capacity_at, capacity_sequence, charfn_v, empirical_charfn,
    p_lim_estimate, sample_density, sample_variances, Eps, PlimDirection, Rational, SweepResult,
};
use error::{CliError, Result};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub fn tool_version() -> String {
    format!("cyclocap v{}", env!("CARGO_PKG_VERSION"))
}

/// First 16 hex digits of the SHA-256 of `bytes`; stamped into every
/// emitted file as the scenario hash.
pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolved output settings for one invocation.
pub struct RunContext {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub log_base: LogBase,
    pub seed: Option<u64>,
    pub verbose: bool,
}

impl RunContext {
    fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", self.out_dir.display())))
    }

    fn comments(&self, hash: &str) -> Vec<String> {
        vec![format!(
            "{} scenario={hash} log_base={}",
            tool_version(),
            self.log_base.column_suffix()
        )]
    }

    fn cap_column(&self) -> String {
        format!("capacity_{}", self.log_base.column_suffix())
    }
}

fn require_sampling(scenario: &Scenario) -> Result<&cyclocap::SamplingSpec> {
    scenario
        .sampling
        .as_ref()
        .ok_or_else(|| CliError::Domain("this command needs a [sampling] block".into()))
}

fn single_power(scenario: &Scenario) -> Result<f64> {
    if scenario.powers.len() != 1 {
        return Err(CliError::Domain(
            "this command needs a single power value (power.p)".into(),
        ));
    }
    Ok(scenario.powers[0])
}

fn maybe_chart(
    ctx: &RunContext,
    name: &str,
    title: &str,
    x_label: &str,
    series: Vec<svg::Series>,
    hash: &str,
) -> Result<Option<PathBuf>> {
    if !ctx.format.wants_svg() {
        return Ok(None);
    }
    let path = ctx.out_dir.join(format!("{name}.svg"));
    let rendered = svg::line_chart(
        title,
        x_label,
        &format!("capacity [{}]", ctx.log_base.column_suffix()),
        &series,
        &format!("{} scenario={hash}", tool_version()),
    );
    std::fs::write(&path, rendered)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(Some(path))
}

/// `pulse`: tabulates the pulse shape and the variance profile over one
/// normalized period.
pub fn run_pulse(scenario: &Scenario, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    ctx.ensure_out_dir()?;
    let profile = &scenario.profile;
    let steps = 1000usize;
    let mut table = Table::new(
        ctx.comments(&scenario.hash),
        vec!["t_norm", "shape", "variance"],
    );
    let mut points = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 / steps as f64;
        let shape = profile.shape().value(t);
        let variance = profile.variance_at_norm(t);
        table.push(vec![Cell::Float(t), Cell::Float(shape), Cell::Float(variance)]);
        points.push((t, shape));
    }
    let csv = ctx.out_dir.join("pulse.csv");
    table.write(&csv)?;
    let mut out = vec![csv];
    if let Some(p) = maybe_chart(
        ctx,
        "pulse",
        "pulse shape over one period",
        "t / Tc",
        vec![svg::Series {
            name: "shape".into(),
            points,
        }],
        &scenario.hash,
    )? {
        out.push(p);
    }
    Ok(out)
}

/// `capacity`: one capacity value per requested power.
pub fn run_capacity(scenario: &Scenario, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    ctx.ensure_out_dir()?;
    let sampling = require_sampling(scenario)?;
    let mut table = Table::new(
        ctx.comments(&scenario.hash),
        vec!["power", "capacity_bits", "capacity_nats", "estimator"],
    );
    for &p in &scenario.powers {
        let (bits, nats) = capacity_at(
            &scenario.profile,
            sampling.td,
            &sampling.eps,
            p,
            &scenario.async_opts,
        )?;
        let estimator = match &sampling.eps {
            Eps::Rational(r) => format!("exact td={} eps={r}", sampling.td),
            Eps::Real(x) => format!(
                "liminf td={} eps~{x} n_max={} window={}",
                sampling.td, scenario.async_opts.n_max, scenario.async_opts.tail_window
            ),
        };
        if ctx.verbose {
            println!("P={p}: {bits:.6} bits ({nats:.6} nats) [{estimator}]");
        }
        table.push(vec![
            Cell::Float(p),
            Cell::Float(bits),
            Cell::Float(nats),
            Cell::Text(estimator),
        ]);
    }
    let csv = ctx.out_dir.join("capacity.csv");
    table.write(&csv)?;
    Ok(vec![csv])
}

fn sweep_to_table(
    ctx: &RunContext,
    hash: &str,
    axis_name: &str,
    sweep: &SweepResult,
) -> Table {
    let cap_col = ctx.cap_column();
    let has_labels = !sweep.point_labels.is_empty();
    let mut columns = vec![axis_name, cap_col.as_str()];
    if has_labels {
        columns.push("label");
    }
    let mut table = Table::new(ctx.comments(hash), columns);
    for i in 0..sweep.axis.len() {
        let mut row = vec![
            Cell::Float(sweep.axis[i]),
            Cell::Float(ctx.log_base.from_bits(sweep.capacities_bits[i])),
        ];
        if has_labels {
            row.push(Cell::Text(sweep.point_labels[i].clone()));
        }
        table.push(row);
    }
    table
}

fn print_sweep_points(ctx: &RunContext, axis_name: &str, sweep: &SweepResult) {
    if !ctx.verbose {
        return;
    }
    for (i, &x) in sweep.axis.iter().enumerate() {
        println!(
            "{axis_name}={x}: {:.6} {}",
            ctx.log_base.from_bits(sweep.capacities_bits[i]),
            ctx.log_base.column_suffix()
        );
    }
}

/// `sweep`: runs the scenario's sweep block.
pub fn run_sweep(scenario: &Scenario, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    ctx.ensure_out_dir()?;
    let sweep_spec = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Domain("this command needs a [sweep] block".into()))?;
    let opts = &scenario.async_opts;

    match sweep_spec {
        SweepSpec::OrderRange { n_min, n_max } => {
            let sampling = require_sampling(scenario)?;
            let power = single_power(scenario)?;
            let seq = capacity_sequence(
                &scenario.profile,
                sampling.td,
                sampling.eps.value(),
                power,
                *n_min,
                *n_max,
                opts,
            )?;
            let cap_col = ctx.cap_column();
            let mut table = Table::new(
                ctx.comments(&scenario.hash),
                vec!["n", "period_len", "eps_n", cap_col.as_str()],
            );
            let mut points = Vec::new();
            for e in &seq.entries {
                let c = ctx.log_base.from_bits(e.capacity_bits);
                if ctx.verbose {
                    println!("n={}: {c:.6} {}", e.n, ctx.log_base.column_suffix());
                }
                table.push(vec![
                    Cell::Int(e.n),
                    Cell::Int(e.period_len),
                    Cell::Text(e.eps_n.to_string()),
                    Cell::Float(c),
                ]);
                points.push((e.n as f64, c));
            }
            if let Some(warning) = &seq.truncated {
                table.comments.push(warning.clone());
            }
            table.comments.push(format!(
                "liminf estimate {:.6} bits over window {} (spread {:.6} bits, converged={})",
                seq.liminf.value_bits,
                seq.liminf.tail_window,
                seq.liminf.tail_spread_bits,
                seq.liminf.converged
            ));
            let csv = ctx.out_dir.join("sweep_n.csv");
            table.write(&csv)?;
            let mut out = vec![csv];
            if let Some(p) = maybe_chart(
                ctx,
                "sweep_n",
                "capacity sequence",
                "n",
                vec![svg::Series {
                    name: "C_n".into(),
                    points,
                }],
                &scenario.hash,
            )? {
                out.push(p);
            }
            Ok(out)
        }
        SweepSpec::Ratio {
            grid,
            max_denominator,
        } => {
            let power = single_power(scenario)?;
            let sweep = cyclocap::sweep_ratio(&scenario.profile, grid, power, *max_denominator, opts)?;
            print_sweep_points(ctx, "ratio", &sweep);
            let table = sweep_to_table(ctx, &scenario.hash, "ratio", &sweep);
            let csv = ctx.out_dir.join("sweep_ratio.csv");
            table.write(&csv)?;
            let mut out = vec![csv];
            let points = grid
                .iter()
                .zip(&sweep.capacities_bits)
                .map(|(&r, &c)| (r, ctx.log_base.from_bits(c)))
                .collect();
            if let Some(p) = maybe_chart(
                ctx,
                "sweep_ratio",
                "capacity vs sampling ratio",
                "Tc/Ts",
                vec![svg::Series {
                    name: "capacity".into(),
                    points,
                }],
                &scenario.hash,
            )? {
                out.push(p);
            }
            Ok(out)
        }
        SweepSpec::Power { grid } => {
            let sampling = require_sampling(scenario)?;
            let sweeps =
                cyclocap::sweep_power(&scenario.profile, sampling.td, &[sampling.eps], grid, opts)?;
            let sweep = &sweeps[0];
            print_sweep_points(ctx, "P", sweep);
            let table = sweep_to_table(ctx, &scenario.hash, "power", sweep);
            let csv = ctx.out_dir.join("sweep_power.csv");
            table.write(&csv)?;
            let mut out = vec![csv];
            let points = grid
                .iter()
                .zip(&sweep.capacities_bits)
                .map(|(&p, &c)| (p, ctx.log_base.from_bits(c)))
                .collect();
            if let Some(p) = maybe_chart(
                ctx,
                "sweep_power",
                "capacity vs power",
                "P",
                vec![svg::Series {
                    name: "capacity".into(),
                    points,
                }],
                &scenario.hash,
            )? {
                out.push(p);
            }
            Ok(out)
        }
        SweepSpec::Offset { grid } => {
            let sampling = require_sampling(scenario)?;
            let power = single_power(scenario)?;
            let sweep = cyclocap::sweep_offset(
                &scenario.profile,
                sampling.td,
                &sampling.eps,
                grid,
                power,
                opts,
            )?;
            print_sweep_points(ctx, "phi", &sweep);
            let table = sweep_to_table(ctx, &scenario.hash, "offset_phi", &sweep);
            let csv = ctx.out_dir.join("sweep_offset.csv");
            table.write(&csv)?;
            let mut out = vec![csv];
            let points = grid
                .iter()
                .zip(&sweep.capacities_bits)
                .map(|(&phi, &c)| (phi, ctx.log_base.from_bits(c)))
                .collect();
            if let Some(p) = maybe_chart(
                ctx,
                "sweep_offset",
                "capacity vs sampling offset",
                "offset",
                vec![svg::Series {
                    name: "capacity".into(),
                    points,
                }],
                &scenario.hash,
            )? {
                out.push(p);
            }
            Ok(out)
        }
    }
}

/// `infospec`: Monte Carlo density statistics and the characteristic
/// function comparison for the scenario's sampling configuration.
pub fn run_infospec(scenario: &Scenario, ctx: &RunContext) -> Result<Vec<PathBuf>> {
    ctx.ensure_out_dir()?;
    let sampling = require_sampling(scenario)?;
    let power = single_power(scenario)?;
    let settings = &scenario.infospec;
    let seed = ctx.seed.unwrap_or(settings.seed);

    // The density model needs an exact rational mismatch; real-valued ones
    // are rationalized and the CSV records which rational was used.
    let (eps, eps_note) = match &sampling.eps {
        Eps::Rational(r) => (*r, format!("eps={r}")),
        Eps::Real(x) => {
            let r = Rational::approximate(*x, 10_000)?;
            (r, format!("eps~{x} rationalized to {r}"))
        }
    };
    let vars = sample_variances(
        &scenario.profile,
        sampling.td,
        &eps,
        scenario.async_opts.period_cap,
    )?;
    let model = build_density_model(&vars, power)?;

    if settings.k_list.len() < 3 {
        return Err(CliError::Domain(
            "infospec.k_list needs at least 3 increasing block lengths".into(),
        ));
    }
    let batches: Vec<cyclocap::DensityBatch> = settings
        .k_list
        .iter()
        .map(|&k| sample_density(&model, k, settings.n_samples, seed))
        .collect::<cyclocap::Result<_>>()?;
    let inf = p_lim_estimate(&batches, PlimDirection::Inf, 0.05, 0.0025)?;
    let sup = p_lim_estimate(&batches, PlimDirection::Sup, 0.05, 0.0025)?;

    let mut comments = ctx.comments(&scenario.hash);
    comments.push(format!("{eps_note} td={} P={power} seed={seed}", sampling.td));
    comments.push(format!(
        "p_liminf {:.6} nats ({}), p_limsup {:.6} nats ({})",
        inf.value,
        inf.confidence_note.as_deref().unwrap_or("clean"),
        sup.value,
        sup.confidence_note.as_deref().unwrap_or("clean"),
    ));
    let mut table = Table::new(vec![], vec!["k", "mean_nats", "variance"]);
    table.comments = comments;
    for b in &batches {
        if ctx.verbose {
            println!("k={}: mean {:.6} nats, variance {:.3e}", b.k, b.mean(), b.variance());
        }
        table.push(vec![
            Cell::Int(b.k as u64),
            Cell::Float(b.mean()),
            Cell::Float(b.variance()),
        ]);
    }
    let density_csv = ctx.out_dir.join("infospec_density.csv");
    table.write(&density_csv)?;

    // Characteristic function at the most informative index (largest beta).
    let idx = model
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.beta.partial_cmp(&b.1.beta).expect("finite betas"))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let alphas: Vec<f64> = (0..=100).map(|i| -5.0 + 0.1 * i as f64).collect();
    let empirical = empirical_charfn(&model[idx], &alphas, settings.charfn_draws, seed)?;
    let mut table = Table::new(
        ctx.comments(&scenario.hash),
        vec![
            "alpha",
            "analytic_re",
            "analytic_im",
            "empirical_re",
            "empirical_im",
            "abs_deviation",
        ],
    );
    table
        .comments
        .push(format!("model index {idx}, {} draws", settings.charfn_draws));
    let mut sup_dev = 0.0f64;
    for (&alpha, emp) in alphas.iter().zip(&empirical) {
        let analytic = charfn_v(alpha, &model[idx]);
        let dev = (analytic - emp).norm();
        sup_dev = sup_dev.max(dev);
        table.push(vec![
            Cell::Float(alpha),
            Cell::Float(analytic.re),
            Cell::Float(analytic.im),
            Cell::Float(emp.re),
            Cell::Float(emp.im),
            Cell::Float(dev),
        ]);
    }
    table
        .comments
        .push(format!("sup deviation {sup_dev:.6}"));
    let charfn_csv = ctx.out_dir.join("infospec_charfn.csv");
    table.write(&charfn_csv)?;

    if ctx.verbose {
        println!("characteristic function sup deviation: {sup_dev:.6}");
    }
    Ok(vec![density_csv, charfn_csv])
}

/// `reproduce`: runs one pinned figure and writes its pass/fail report.
pub fn run_reproduce(figure: &str, ctx: &RunContext) -> Result<bool> {
    let id = figures::FigureId::parse(figure).ok_or_else(|| {
        CliError::Domain(format!(
            "figure must be one of fig3..fig8, got \"{figure}\""
        ))
    })?;
    let fig_ctx = figures::FigureContext {
        out_dir: ctx.out_dir.clone(),
        format: ctx.format,
        log_base: ctx.log_base,
        verbose: ctx.verbose,
    };
    let run = figures::run_figure(id, &fig_ctx)?;
    let report = run.report();
    print!("{report}");
    let path = ctx.out_dir.join(format!("{}_report.txt", id.name()));
    std::fs::write(&path, &report)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(run.passed())
}

/// `acceptance`: the full suite; returns whether every criterion passed.
pub fn run_acceptance(ctx: &RunContext) -> Result<bool> {
    let seed = ctx.seed.unwrap_or(1);
    let results = acceptance::run_all(&ctx.out_dir, seed)?;
    for r in &results {
        println!("{}", r.line());
        if ctx.verbose {
            for d in &r.details {
                println!("    {d}");
            }
        }
    }
    let report = ctx.out_dir.join("acceptance_report.txt");
    acceptance::write_report(&results, &report)?;
    println!("report written to {}", report.display());
    Ok(results.iter().all(|r| r.passed))
}

/// Loads a scenario and resolves the output context against command-line
/// overrides.
pub fn load_scenario(
    config: Option<&Path>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    log_base: Option<LogBase>,
    seed: Option<u64>,
    verbose: bool,
) -> Result<(Option<Scenario>, RunContext)> {
    let scenario = config.map(Scenario::from_file).transpose()?;
    let ctx = RunContext {
        out_dir: out
            .or_else(|| {
                scenario
                    .as_ref()
                    .and_then(|s| s.out_dir.clone())
                    .map(PathBuf::from)
            })
            .unwrap_or_else(|| PathBuf::from("out")),
        format: format
            .or_else(|| scenario.as_ref().and_then(|s| s.format))
            .unwrap_or(OutputFormat::Csv),
        log_base: log_base
            .or_else(|| scenario.as_ref().and_then(|s| s.log_base))
            .unwrap_or(LogBase::Bits),
        seed,
        verbose,
    };
    Ok((scenario, ctx))
}
