//! Cross-module contracts: results must be bit-identical for any worker
//! count, and the asynchronous machinery must agree with itself across
//! modules.

use cyclocap::*;
use std::f64::consts::PI;

fn paper_profile(duty: f64, phi: f64) -> VarianceProfile {
    VarianceProfile::pulse(0.2, 4.8, 5e-6, phi, duty, 0.01).unwrap()
}

#[cfg(feature = "parallel")]
#[test]
fn worker_count_is_invisible_in_results() {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();

    let profile = paper_profile(0.47, 0.0);
    let run_seq = || {
        capacity_sequence(&profile, 2, PI / 7.0, 1.0, 1, 120, &AsyncOptions::default()).unwrap()
    };
    let a = single.install(run_seq);
    let b = four.install(run_seq);
    for (x, y) in a.entries.iter().zip(&b.entries) {
        assert_eq!(x.capacity_bits.to_bits(), y.capacity_bits.to_bits(), "n = {}", x.n);
    }

    let vars = sample_variances(&profile, 2, &Rational::new(2, 5).unwrap(), 1 << 20).unwrap();
    let model = build_density_model(&vars, 1.0).unwrap();
    let run_batch = || sample_density(&model, 2000, 128, 99).unwrap();
    let a = single.install(run_batch);
    let b = four.install(run_batch);
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn density_mean_equals_waterfill_capacity_across_scenarios() {
    // The per-index mean beta/2 must reproduce the water-filling capacity
    // exactly, whatever the profile.
    for (duty, td, eps, power) in [
        (0.47, 3, Rational::zero(), 1.0),
        (0.95, 2, Rational::new(1, 2).unwrap(), 1.0),
        (0.75, 2, Rational::new(2, 5).unwrap(), 7.0),
    ] {
        let profile = paper_profile(duty, 0.0);
        let vars = sample_variances(&profile, td, &eps, 1 << 20).unwrap();
        let sol = sync_capacity(&vars, power).unwrap();
        let model = build_density_model(&vars, power).unwrap();
        let mean: f64 = model.iter().map(|m| 0.5 * m.beta).sum::<f64>() / model.len() as f64;
        assert!(
            (mean - sol.capacity_nats).abs() < 1e-12,
            "duty={duty} td={td}: density mean {mean} vs capacity {}",
            sol.capacity_nats
        );
    }
}

#[test]
fn asynchronous_power_curves_ignore_offset() {
    // With the order range pushed past 1/eps, the liminf estimate of the
    // asynchronous capacity agrees across sampling offsets.
    let opts = AsyncOptions {
        n_max: 1000,
        ..AsyncOptions::default()
    };
    let eps = Eps::Real(PI / 1000.0);
    for power in [1.0, 10.0] {
        let c0 = capacity_at(&paper_profile(0.47, 0.0), 2, &eps, power, &opts).unwrap().0;
        let c25 = capacity_at(&paper_profile(0.47, 0.25), 2, &eps, power, &opts).unwrap().0;
        assert!(
            (c0 - c25).abs() <= 0.02,
            "P={power}: offset gap {} exceeds 0.02 bits",
            (c0 - c25).abs()
        );
    }
}

#[test]
fn capacity_sequence_settles_past_order_250() {
    // At duty cycle 47% the variations of C_n die down beyond n = 250 and
    // the tail-window estimate may call itself converged.
    let profile = paper_profile(0.47, 0.0);
    let seq =
        capacity_sequence(&profile, 2, PI / 7.0, 1.0, 1, 500, &AsyncOptions::default()).unwrap();
    let est = liminf_estimate(&seq, 250, 0.01).unwrap();
    assert!(
        est.tail_spread_bits < 0.01,
        "tail spread {} should fall below 0.01 bits",
        est.tail_spread_bits
    );
    assert!(est.converged);
}

#[test]
fn synchronous_capacity_tiles_under_unreduced_rationals() {
    // floor(n*eps)/n and its reduced form describe the same channel; the
    // capacity must be identical through the sampling path.
    let profile = paper_profile(0.47, 0.3);
    let reduced = Rational::new(2, 5).unwrap();
    let direct = sync_capacity_at(&profile, 2, &reduced, 1.0, 1 << 20).unwrap();
    for n in [5u64, 10, 25, 40] {
        let eps_n = epsilon_n(0.4, n).unwrap();
        assert_eq!(eps_n, reduced);
        let c = sync_capacity_at(&profile, 2, &eps_n, 1.0, 1 << 20).unwrap();
        assert_eq!(c.capacity_bits.to_bits(), direct.capacity_bits.to_bits());
    }
}
