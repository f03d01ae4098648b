//! Scenario configuration: a single TOML file describing the noise profile,
//! the sampling configuration, the power constraint, and one sweep.
//!
//! Schema (version 1):
//!
//! ```toml
//! schema_version = 1
//!
//! [profile]
//! base = 0.2                 # quiet-level variance, > 0
//! amplitude = 4.8            # pulse height, >= 0
//! period_tc_seconds = 5e-6
//! offset_phi = 0.0           # sampling offset, fraction of the period
//! duty = 0.47                # trapezoid duty cycle
//! rise = 0.01                # trapezoid rise/fall time (default 0.01)
//! # points = [[0.0, 0.0], [0.25, 1.0], [0.6, 0.3]]   # tabulated shape instead
//!
//! [sampling]
//! td = 2
//! eps = "pi/7"               # "pi/K", "u/v", a decimal string, or a float
//!
//! [power]
//! p = 1.0                    # or: grid = [1.0, 10.0, 100.0]
//!
//! [sweep]                    # optional; exactly one kind
//! kind = "n"                 # n | ratio | power | offset
//! n_min = 1
//! n_max = 500
//! # grid = [2.01, 2.02]      # ratio/power/offset kinds
//! # start = 2.01             # ... or an inclusive linspace
//! # stop = 3.99
//! # count = 199
//! max_denominator = 100      # ratio rationalization bound
//! tail_window = 250          # liminf estimator window
//! liminf_n_max = 500         # largest rationalization order
//!
//! [infospec]                 # optional
//! k_list = [100, 1000, 10000]
//! n_samples = 1000
//! charfn_draws = 100000
//! seed = 1
//!
//! [output]                   # optional; overridden by --out/--format/--log-base
//! dir = "out"
//! format = "csv"             # csv | csv+svg
//! log_base = "2"             # "2" | "e"
//! ```

use crate::error::{CliError, Result};
use cyclocap::{
    AsyncOptions, Eps, ProfileShape, PulseShape, Rational, SamplingSpec, TabulatedShape,
    VarianceProfile,
};
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    profile: RawProfile,
    sampling: Option<RawSampling>,
    power: RawPower,
    sweep: Option<RawSweep>,
    infospec: Option<RawInfospec>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    base: f64,
    amplitude: f64,
    period_tc_seconds: f64,
    #[serde(default)]
    offset_phi: f64,
    duty: Option<f64>,
    rise: Option<f64>,
    points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    td: u64,
    eps: toml::Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    p: Option<f64>,
    grid: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    kind: String,
    n_min: Option<u64>,
    n_max: Option<u64>,
    grid: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    max_denominator: Option<u64>,
    tail_window: Option<usize>,
    liminf_n_max: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInfospec {
    k_list: Option<Vec<usize>>,
    n_samples: Option<usize>,
    charfn_draws: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    format: Option<String>,
    log_base: Option<String>,
}

/// Which logarithm base capacities are reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Bits),
            "e" => Ok(LogBase::Nats),
            other => Err(CliError::Domain(format!(
                "log_base must be \"2\" or \"e\", got \"{other}\""
            ))),
        }
    }

    pub fn column_suffix(&self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }

    pub fn from_bits(&self, bits: f64) -> f64 {
        match self {
            LogBase::Bits => bits,
            LogBase::Nats => bits * std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    CsvSvg,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "csv+svg" => Ok(OutputFormat::CsvSvg),
            other => Err(CliError::Domain(format!(
                "format must be \"csv\" or \"csv+svg\", got \"{other}\""
            ))),
        }
    }

    pub fn wants_svg(&self) -> bool {
        matches!(self, OutputFormat::CsvSvg)
    }
}

/// Which sweep a scenario requests.
#[derive(Debug, Clone)]
pub enum SweepSpec {
    OrderRange { n_min: u64, n_max: u64 },
    Ratio { grid: Vec<f64>, max_denominator: u64 },
    Power { grid: Vec<f64> },
    Offset { grid: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct InfospecSettings {
    pub k_list: Vec<usize>,
    pub n_samples: usize,
    pub charfn_draws: usize,
    pub seed: u64,
}

impl Default for InfospecSettings {
    fn default() -> Self {
        Self {
            k_list: vec![100, 1000, 10_000],
            n_samples: 1000,
            charfn_draws: 100_000,
            seed: 1,
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub profile: VarianceProfile,
    pub sampling: Option<SamplingSpec>,
    pub powers: Vec<f64>,
    pub sweep: Option<SweepSpec>,
    pub infospec: InfospecSettings,
    pub async_opts: AsyncOptions,
    pub out_dir: Option<String>,
    pub format: Option<OutputFormat>,
    pub log_base: Option<LogBase>,
    /// Hash of the configuration text, stamped into every emitted file.
    pub hash: String,
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "schema_version must be {SCHEMA_VERSION}, got {}",
                raw.schema_version
            )));
        }

        let profile = build_profile(&raw.profile)?;
        let sampling = raw.sampling.as_ref().map(build_sampling).transpose()?;

        let powers = match (&raw.power.p, &raw.power.grid) {
            (Some(p), None) => vec![*p],
            (None, Some(g)) if !g.is_empty() => g.clone(),
            _ => {
                return Err(CliError::Domain(
                    "power: set exactly one of `p` or a non-empty `grid`".into(),
                ))
            }
        };
        for &p in &powers {
            if !(p > 0.0) {
                return Err(CliError::Domain(format!("power: values must be positive, got {p}")));
            }
        }

        let mut async_opts = AsyncOptions::default();
        if let Some(sweep) = &raw.sweep {
            if let Some(w) = sweep.tail_window {
                async_opts.tail_window = w;
            }
            if let Some(n) = sweep.liminf_n_max {
                async_opts.n_max = n;
            }
        }
        let sweep = raw.sweep.as_ref().map(build_sweep).transpose()?;

        let infospec = match &raw.infospec {
            None => InfospecSettings::default(),
            Some(r) => {
                let d = InfospecSettings::default();
                InfospecSettings {
                    k_list: r.k_list.clone().unwrap_or(d.k_list),
                    n_samples: r.n_samples.unwrap_or(d.n_samples),
                    charfn_draws: r.charfn_draws.unwrap_or(d.charfn_draws),
                    seed: r.seed.unwrap_or(d.seed),
                }
            }
        };

        let (out_dir, format, log_base) = match &raw.output {
            None => (None, None, None),
            Some(o) => (
                o.dir.clone(),
                o.format.as_deref().map(OutputFormat::parse).transpose()?,
                o.log_base.as_deref().map(LogBase::parse).transpose()?,
            ),
        };

        Ok(Scenario {
            profile,
            sampling,
            powers,
            sweep,
            infospec,
            async_opts,
            out_dir,
            format,
            log_base,
            hash: crate::short_hash(text.as_bytes()),
        })
    }
}

fn parse_error(text: &str, e: toml::de::Error) -> CliError {
    let loc = e.span().map(|span| {
        let upto = &text[..span.start.min(text.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.chars().rev().take_while(|&c| c != '\n').count() + 1;
        format!(" at line {line}, column {col}")
    });
    CliError::Parse(format!("{}{}", e.message(), loc.unwrap_or_default()))
}

fn build_profile(raw: &RawProfile) -> Result<VarianceProfile> {
    let shape = match (&raw.points, raw.duty) {
        (Some(points), None) => {
            let pts = points.iter().map(|p| (p[0], p[1])).collect();
            ProfileShape::Tabulated(
                TabulatedShape::new(pts)
                    .map_err(|e| CliError::Domain(format!("profile.points: {e}")))?,
            )
        }
        (None, Some(duty)) => ProfileShape::Trapezoid(
            PulseShape::new(duty, raw.rise.unwrap_or(PulseShape::DEFAULT_RISE))
                .map_err(|e| CliError::Domain(format!("profile.duty/rise: {e}")))?,
        ),
        _ => {
            return Err(CliError::Domain(
                "profile: set exactly one of `duty` (trapezoid) or `points` (tabulated)".into(),
            ))
        }
    };
    VarianceProfile::new(
        raw.base,
        raw.amplitude,
        raw.period_tc_seconds,
        raw.offset_phi,
        shape,
    )
    .map_err(|e| CliError::Domain(format!("profile: {e}")))
}

fn build_sampling(raw: &RawSampling) -> Result<SamplingSpec> {
    let eps = parse_eps(&raw.eps)?;
    SamplingSpec::new(raw.td, eps).map_err(|e| CliError::Domain(format!("sampling: {e}")))
}

/// Accepted mismatch forms: float, integer 0, `"u/v"`, `"pi/K"`, or a
/// decimal string.
pub fn parse_eps(value: &toml::Value) -> Result<Eps> {
    let bad = |msg: String| CliError::Domain(format!("sampling.eps: {msg}"));
    match value {
        toml::Value::Float(x) => check_real(*x).map(Eps::Real).map_err(bad),
        toml::Value::Integer(0) => Ok(Eps::Rational(Rational::zero())),
        toml::Value::Integer(i) => Err(bad(format!("integer {i} is outside [0, 1)"))),
        toml::Value::String(s) => parse_eps_str(s).map_err(bad),
        other => Err(bad(format!("unsupported value {other}"))),
    }
}

fn check_real(x: f64) -> std::result::Result<f64, String> {
    if (0.0..1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1)"))
    }
}

fn parse_eps_str(s: &str) -> std::result::Result<Eps, String> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix("pi/") {
        let k: u64 = k
            .trim()
            .parse()
            .map_err(|_| format!("\"{s}\" is not of the form pi/K with integer K"))?;
        if k == 0 {
            return Err("pi/0 is undefined".into());
        }
        return check_real(PI / k as f64).map(Eps::Real);
    }
    if let Some((u, v)) = s.split_once('/') {
        let u: u64 = u.trim().parse().map_err(|_| format!("bad numerator in \"{s}\""))?;
        let v: u64 = v.trim().parse().map_err(|_| format!("bad denominator in \"{s}\""))?;
        if v == 0 {
            return Err(format!("zero denominator in \"{s}\""));
        }
        if u >= v {
            return Err(format!("\"{s}\" is outside [0, 1)"));
        }
        return Ok(Eps::Rational(Rational::new(u, v).map_err(|e| e.to_string())?));
    }
    let x: f64 = s
        .parse()
        .map_err(|_| format!("\"{s}\" is not a decimal, \"u/v\", or \"pi/K\""))?;
    check_real(x).map(Eps::Real)
}

fn build_sweep(raw: &RawSweep) -> Result<SweepSpec> {
    let grid = || -> Result<Vec<f64>> {
        match (&raw.grid, raw.start, raw.stop, raw.count) {
            (Some(g), None, None, None) if !g.is_empty() => Ok(g.clone()),
            (None, Some(start), Some(stop), Some(count)) if count >= 2 && stop > start => {
                let step = (stop - start) / (count - 1) as f64;
                Ok((0..count).map(|i| start + step * i as f64).collect())
            }
            _ => Err(CliError::Domain(
                "sweep: provide either a non-empty `grid` or `start`/`stop`/`count` (count >= 2)"
                    .into(),
            )),
        }
    };
    match raw.kind.as_str() {
        "n" => {
            let n_min = raw.n_min.unwrap_or(1);
            let n_max = raw
                .n_max
                .ok_or_else(|| CliError::Domain("sweep: kind \"n\" requires `n_max`".into()))?;
            if n_min == 0 || n_min > n_max {
                return Err(CliError::Domain(format!(
                    "sweep: need 1 <= n_min <= n_max, got [{n_min}, {n_max}]"
                )));
            }
            Ok(SweepSpec::OrderRange { n_min, n_max })
        }
        "ratio" => Ok(SweepSpec::Ratio {
            grid: grid()?,
            max_denominator: raw.max_denominator.unwrap_or(100),
        }),
        "power" => Ok(SweepSpec::Power { grid: grid()? }),
        "offset" => Ok(SweepSpec::Offset { grid: grid()? }),
        other => Err(CliError::Domain(format!(
            "sweep.kind must be one of n|ratio|power|offset, got \"{other}\""
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[profile]
base = 0.5
amplitude = 0.0
period_tc_seconds = 5e-6
duty = 0.47

[power]
p = 1.0
"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = Scenario::from_str(MINIMAL).unwrap();
        assert_eq!(s.powers, vec![1.0]);
        assert!(s.sweep.is_none());
        assert_eq!(s.hash.len(), 16);
    }

    #[test]
    fn parse_error_reports_location() {
        let err = Scenario::from_str("schema_version = [broken").unwrap_err();
        match err {
            CliError::Parse(msg) => assert!(msg.contains("line 1"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let bad = MINIMAL.replace("p = 1.0", "p = 1.0\nwattage = 3");
        let err = Scenario::from_str(&bad).unwrap_err();
        assert!(matches!(err, CliError::Parse(_)), "{err:?}");
    }

    #[test]
    fn eps_forms() {
        let pi7 = parse_eps(&toml::Value::String("pi/7".into())).unwrap();
        match pi7 {
            Eps::Real(x) => assert!((x - PI / 7.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let r = parse_eps(&toml::Value::String("4/10".into())).unwrap();
        match r {
            Eps::Rational(r) => assert_eq!((r.numerator(), r.denominator()), (2, 5)),
            other => panic!("{other:?}"),
        }
        let d = parse_eps(&toml::Value::String("0.25".into())).unwrap();
        match d {
            Eps::Real(x) => assert_eq!(x, 0.25),
            other => panic!("{other:?}"),
        }
        assert!(parse_eps(&toml::Value::String("7/7".into())).is_err());
        assert!(parse_eps(&toml::Value::String("pi/3".into())).is_err());
        assert!(parse_eps(&toml::Value::Float(1.0)).is_err());
        assert!(parse_eps(&toml::Value::Integer(0)).is_ok());
    }

    #[test]
    fn power_block_exclusive() {
        let bad = MINIMAL.replace("p = 1.0", "p = 1.0\ngrid = [1.0, 2.0]");
        assert!(Scenario::from_str(&bad).is_err());
        let neither = MINIMAL.replace("p = 1.0", "");
        assert!(Scenario::from_str(&neither).is_err());
    }

    #[test]
    fn sweep_linspace() {
        let cfg = format!(
            "{MINIMAL}\n[sweep]\nkind = \"ratio\"\nstart = 2.0\nstop = 3.0\ncount = 5\n"
        );
        let s = Scenario::from_str(&cfg).unwrap();
        match s.sweep.unwrap() {
            SweepSpec::Ratio { grid, max_denominator } => {
                assert_eq!(grid.len(), 5);
                assert!((grid[4] - 3.0).abs() < 1e-12);
                assert_eq!(max_denominator, 100);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn domain_error_names_key() {
        let bad = MINIMAL.replace("base = 0.5", "base = -1.0");
        match Scenario::from_str(&bad).unwrap_err() {
            CliError::Domain(msg) => assert!(msg.starts_with("profile:"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tabulated_profile_accepted() {
        let cfg = MINIMAL.replace(
            "duty = 0.47",
            "points = [[0.0, 0.0], [0.3, 1.0], [0.7, 0.2]]",
        );
        let s = Scenario::from_str(&cfg).unwrap();
        assert!(matches!(s.profile.shape(), ProfileShape::Tabulated(_)));
    }
}
