//! End-to-end checks of the binary: exit codes, CSV layout, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclocap"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

const STATIONARY: &str = r#"
schema_version = 1

[profile]
base = 0.5
amplitude = 0.0
period_tc_seconds = 5e-6
duty = 0.47

[sampling]
td = 1
eps = 0

[power]
p = 1.0
"#;

#[test]
fn capacity_of_stationary_profile_is_awgn() {
    let dir = tmp("cli_awgn");
    let cfg = write_config(&dir, "s.toml", STATIONARY);
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "capacity"])
        .output()
        .unwrap();
    run_ok(&out);

    let csv = std::fs::read_to_string(dir.join("capacity.csv")).unwrap();
    let mut lines = csv.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# cyclocap v"), "{comment}");
    assert!(comment.contains("scenario="), "{comment}");
    let header = lines.next().unwrap();
    assert_eq!(header, "power,capacity_bits,capacity_nats,estimator");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let bits: f64 = row[1].parse().unwrap();
    // 1/2 log2(1 + P / base), along the solver's nats-first path.
    let expected = 0.5 * (1.0 + 1.0 / 0.5f64).ln() / std::f64::consts::LN_2;
    assert_eq!(bits.to_bits(), expected.to_bits());
    assert!(lines.next().is_none(), "expected exactly one data row");
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tmp("cli_parse");
    let cfg = write_config(&dir, "bad.toml", "schema_version = [oops\n");
    let out = bin().args(["--config", cfg.to_str().unwrap(), "capacity"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "{stderr}");
}

#[test]
fn invalid_value_exits_3_naming_key() {
    let dir = tmp("cli_domain");
    let cfg = write_config(&dir, "bad.toml", &STATIONARY.replace("base = 0.5", "base = -2.0"));
    let out = bin().args(["--config", cfg.to_str().unwrap(), "capacity"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("profile"), "{stderr}");
}

#[test]
fn period_cap_exits_4() {
    let dir = tmp("cli_resource");
    let cfg = write_config(
        &dir,
        "big.toml",
        &STATIONARY
            .replace("td = 1", "td = 2")
            .replace("eps = 0", "eps = \"1/9999999\""),
    );
    let out = bin().args(["--config", cfg.to_str().unwrap(), "capacity"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unknown_figure_exits_3() {
    let dir = tmp("cli_badfig");
    let out = bin()
        .args(["--out", dir.to_str().unwrap(), "reproduce", "--figure", "fig99"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

const SEQUENCE_SWEEP: &str = r#"
schema_version = 1

[profile]
base = 0.2
amplitude = 4.8
period_tc_seconds = 5e-6
offset_phi = 0.0
duty = 0.47
rise = 0.01

[sampling]
td = 2
eps = "pi/7"

[power]
p = 1.0

[sweep]
kind = "n"
n_min = 1
n_max = 40
"#;

#[test]
fn sweep_csv_round_trips_and_is_deterministic() {
    let dir_a = tmp("cli_sweep_a");
    let dir_b = tmp("cli_sweep_b");
    let cfg = write_config(&dir_a, "s.toml", SEQUENCE_SWEEP);

    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args([
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--seed",
                "7",
                "sweep",
            ])
            .output()
            .unwrap();
        run_ok(&out);
    }
    let bytes_a = std::fs::read(dir_a.join("sweep_n.csv")).unwrap();
    let bytes_b = std::fs::read(dir_b.join("sweep_n.csv")).unwrap();
    assert_eq!(bytes_a, bytes_b, "same config + seed must give identical bytes");

    // Re-read and reproduce one capacity exactly from the library.
    let text = String::from_utf8(bytes_a).unwrap();
    let row = text
        .lines()
        .find(|l| l.starts_with("17,"))
        .expect("row for n=17");
    let fields: Vec<&str> = row.split(',').collect();
    let written: f64 = fields[3].parse().unwrap();

    let profile = cyclocap::VarianceProfile::pulse(0.2, 4.8, 5e-6, 0.0, 0.47, 0.01).unwrap();
    let eps = cyclocap::epsilon_n(std::f64::consts::PI / 7.0, 17).unwrap();
    let direct = cyclocap::sync_capacity_at(&profile, 2, &eps, 1.0, 1 << 24).unwrap();
    assert_eq!(
        written.to_bits(),
        direct.capacity_bits.to_bits(),
        "CSV must round-trip the in-memory value exactly"
    );
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir_a = tmp("cli_threads_a");
    let dir_b = tmp("cli_threads_b");
    let cfg = write_config(&dir_a, "s.toml", SEQUENCE_SWEEP);
    for (dir, threads) in [(&dir_a, "1"), (&dir_b, "2")] {
        let out = bin()
            .args([
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--threads",
                threads,
                "sweep",
            ])
            .output()
            .unwrap();
        run_ok(&out);
    }
    assert_eq!(
        std::fs::read(dir_a.join("sweep_n.csv")).unwrap(),
        std::fs::read(dir_b.join("sweep_n.csv")).unwrap(),
        "results must not depend on the worker count"
    );
}

#[test]
fn infospec_is_seed_deterministic() {
    let cfg_text = format!(
        "{STATIONARY}\n[infospec]\nk_list = [100, 400, 1600]\nn_samples = 120\ncharfn_draws = 2000\nseed = 11\n"
    );
    let dir_a = tmp("cli_info_a");
    let dir_b = tmp("cli_info_b");
    let cfg = write_config(&dir_a, "s.toml", &cfg_text);
    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args(["--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "infospec"])
            .output()
            .unwrap();
        run_ok(&out);
    }
    for name in ["infospec_density.csv", "infospec_charfn.csv"] {
        assert_eq!(
            std::fs::read(dir_a.join(name)).unwrap(),
            std::fs::read(dir_b.join(name)).unwrap(),
            "{name} must be byte-identical"
        );
    }
}

#[test]
fn pulse_emits_csv_and_svg() {
    let dir = tmp("cli_pulse");
    let cfg = write_config(&dir, "s.toml", &STATIONARY.replace("amplitude = 0.0", "amplitude = 4.8"));
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--format",
            "csv+svg",
            "pulse",
        ])
        .output()
        .unwrap();
    run_ok(&out);
    assert!(dir.join("pulse.csv").exists());
    let svg = std::fs::read_to_string(dir.join("pulse.svg")).unwrap();
    assert!(svg.contains("scenario="), "svg must carry the scenario hash");

    let (_, columns, rows) = {
        let text = std::fs::read_to_string(dir.join("pulse.csv")).unwrap();
        let mut comments = vec![];
        let mut cols = vec![];
        let mut rows = vec![];
        for line in text.lines() {
            if let Some(c) = line.strip_prefix("# ") {
                comments.push(c.to_string());
            } else if cols.is_empty() {
                cols = line.split(',').map(str::to_string).collect();
            } else {
                rows.push(line.split(',').map(str::to_string).collect::<Vec<_>>());
            }
        }
        (comments, cols, rows)
    };
    assert_eq!(columns, vec!["t_norm", "shape", "variance"]);
    assert_eq!(rows.len(), 1000);
    for row in &rows {
        let v: f64 = row[2].parse().unwrap();
        assert!((0.5..=5.3).contains(&v));
    }
}

#[test]
fn bundled_scenarios_parse_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        cyclocap_cli::config::Scenario::from_file(&path)
            .unwrap_or_else(|e| panic!("{} must parse: {e}", path.display()));
    }
    // Smoke-run the quickest one end to end.
    let dir = tmp("cli_bundled");
    let out = bin()
        .args([
            "--config",
            root.join("stationary.toml").to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "capacity",
        ])
        .output()
        .unwrap();
    run_ok(&out);
}

#[test]
fn reproduce_fig3_emits_four_series() {
    let dir = tmp("cli_fig3");
    let out = bin()
        .args(["--out", dir.to_str().unwrap(), "reproduce", "--figure", "fig3"])
        .output()
        .unwrap();
    run_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("verdict: PASS"), "{stdout}");
    assert!(dir.join("fig3_report.txt").exists());

    let csv = std::fs::read_to_string(dir.join("fig3.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "n,capacity_dc1_bits,capacity_dc47_bits,capacity_dc75_bits,capacity_dc95_bits"
    );
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 500, "one row per order n in [1, 500]");
}

#[test]
fn verbose_prints_per_point_lines() {
    let dir = tmp("cli_verbose");
    let cfg = write_config(&dir, "s.toml", &SEQUENCE_SWEEP.replace("n_max = 40", "n_max = 5"));
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--verbose",
            "sweep",
        ])
        .output()
        .unwrap();
    run_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for n in 1..=5 {
        assert!(stdout.contains(&format!("n={n}:")), "{stdout}");
    }
}
