//! Capacity under asynchronous sampling as the limit of synchronous
//! capacities, plus the parameter sweeps built on it.
//!
//! For an irrational mismatch `eps` the channel is not information stable
//! and its capacity is the limit inferior of the sequence `C_n`, where `C_n`
//! is the synchronous capacity at the rationalization `floor(n*eps)/n`. A
//! finite range of `n` only ever yields an estimate, so the tail-window
//! minimum is reported together with a spread diagnostic instead of a bare
//! number.

use crate::error::{Error, Result};
use crate::exec::indexed_map;
use crate::profile::{sample_variances, DtVarianceSeq, Eps, VarianceProfile, DEFAULT_PERIOD_CAP};
use crate::rational::{epsilon_n, Rational};
use crate::waterfill::{sync_capacity, WaterFillSolution};

/// Knobs shared by the sequence builder and the sweeps.
#[derive(Debug, Clone, Copy)]
pub struct AsyncOptions {
    /// Cap on the discrete-time period length per point.
    pub period_cap: u64,
    /// Largest rationalization order used when estimating a liminf.
    pub n_max: u64,
    /// Number of trailing entries the liminf estimate minimizes over.
    pub tail_window: usize,
    /// Spread (bits) above which the estimate is flagged as not converged.
    pub spread_threshold_bits: f64,
}

impl Default for AsyncOptions {
    fn default() -> Self {
        Self {
            period_cap: DEFAULT_PERIOD_CAP,
            n_max: 500,
            tail_window: 250,
            spread_threshold_bits: 0.01,
        }
    }
}

/// One point of the capacity sequence.
#[derive(Debug, Clone)]
pub struct CapacityEntry {
    pub n: u64,
    /// Unreduced discrete-time period `td*n + floor(n*eps)`.
    pub period_len: u64,
    /// Reduced rationalization `floor(n*eps)/n`.
    pub eps_n: Rational,
    pub capacity_bits: f64,
    pub capacity_nats: f64,
}

/// Tail-window liminf estimate with its convergence diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct LiminfEstimate {
    pub value_bits: f64,
    pub value_nats: f64,
    pub tail_window: usize,
    /// Max minus min capacity (bits) over the window.
    pub tail_spread_bits: f64,
    /// True only when the spread is at or below the configured threshold.
    pub converged: bool,
}

/// The map `n -> C_n` over a contiguous range of orders.
#[derive(Debug, Clone)]
pub struct CapacitySequence {
    pub entries: Vec<CapacityEntry>,
    /// Estimate over the default tail window.
    pub liminf: LiminfEstimate,
    /// Set when the period cap cut the range short.
    pub truncated: Option<String>,
}

/// Synchronous capacity of `profile` sampled at `td + u/v`.
pub fn sync_capacity_at(
    profile: &VarianceProfile,
    td: u64,
    eps: &Rational,
    power: f64,
    period_cap: u64,
) -> Result<WaterFillSolution> {
    let vars = sample_variances(profile, td, eps, period_cap)?;
    sync_capacity(&vars, power)
}

/// Builds the capacity sequence `C_n` for `n` in `[n_min, n_max]`.
///
/// Entries are computed independently (and in parallel); the result is
/// deterministic and ordered by `n`. Exceeding the period cap at some order
/// truncates the range there and records a warning instead of failing.
pub fn capacity_sequence(
    profile: &VarianceProfile,
    td: u64,
    eps: f64,
    power: f64,
    n_min: u64,
    n_max: u64,
    opts: &AsyncOptions,
) -> Result<CapacitySequence> {
    if n_min == 0 || n_min > n_max {
        return Err(Error::Domain(format!(
            "order range must satisfy 1 <= n_min <= n_max, got [{n_min}, {n_max}]"
        )));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!(
            "synchronization mismatch must lie in [0, 1), got {eps}"
        )));
    }

    let count = (n_max - n_min + 1) as usize;
    let computed: Vec<Result<CapacityEntry>> = indexed_map(count, |i| {
        let n = n_min + i as u64;
        let eps_n = epsilon_n(eps, n)?;
        let raw_floor = (n as f64 * eps).floor() as u64;
        let sol = sync_capacity_at(profile, td, &eps_n, power, opts.period_cap)?;
        Ok(CapacityEntry {
            n,
            period_len: td * n + raw_floor.min(n - 1),
            eps_n,
            capacity_bits: sol.capacity_bits,
            capacity_nats: sol.capacity_nats,
        })
    });

    let mut entries = Vec::with_capacity(count);
    let mut truncated = None;
    for item in computed {
        match item {
            Ok(entry) => entries.push(entry),
            Err(Error::Resource(msg)) => {
                truncated = Some(format!(
                    "sequence truncated at n = {}: {msg}",
                    n_min + entries.len() as u64
                ));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if entries.is_empty() {
        return Err(Error::Resource(
            "period cap excludes every requested order".into(),
        ));
    }

    let window = opts.tail_window.clamp(1, entries.len());
    let liminf = estimate_tail(&entries, window, opts.spread_threshold_bits);
    Ok(CapacitySequence {
        entries,
        liminf,
        truncated,
    })
}

fn estimate_tail(entries: &[CapacityEntry], window: usize, threshold_bits: f64) -> LiminfEstimate {
    let tail = &entries[entries.len() - window..];
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut min_nats = f64::INFINITY;
    for e in tail {
        min = min.min(e.capacity_bits);
        max = max.max(e.capacity_bits);
        min_nats = min_nats.min(e.capacity_nats);
    }
    let spread = max - min;
    LiminfEstimate {
        value_bits: min,
        value_nats: min_nats,
        tail_window: window,
        tail_spread_bits: spread,
        converged: spread <= threshold_bits,
    }
}

/// Minimum capacity over the final `tail_window` entries, with the spread
/// diagnostic. Never claims convergence when the spread exceeds the
/// threshold.
pub fn liminf_estimate(
    seq: &CapacitySequence,
    tail_window: usize,
    spread_threshold_bits: f64,
) -> Result<LiminfEstimate> {
    if tail_window == 0 {
        return Err(Error::Domain("tail window must be non-empty".into()));
    }
    if tail_window > seq.entries.len() {
        return Err(Error::Domain(format!(
            "tail window {tail_window} exceeds the {} available entries",
            seq.entries.len()
        )));
    }
    Ok(estimate_tail(&seq.entries, tail_window, spread_threshold_bits))
}

/// Liminf estimate for a real-valued mismatch, computed from the tail range
/// `[n_max - tail_window + 1, n_max]` directly.
pub fn liminf_capacity(
    profile: &VarianceProfile,
    td: u64,
    eps: f64,
    power: f64,
    opts: &AsyncOptions,
) -> Result<LiminfEstimate> {
    let window = (opts.tail_window as u64).clamp(1, opts.n_max);
    let n_min = opts.n_max - window + 1;
    let seq = capacity_sequence(profile, td, eps, power, n_min, opts.n_max, opts)?;
    Ok(seq.liminf)
}

/// Capacity at a mismatch of either kind: exact synchronous evaluation for
/// rationals, tail liminf estimate for reals.
pub fn capacity_at(
    profile: &VarianceProfile,
    td: u64,
    eps: &Eps,
    power: f64,
    opts: &AsyncOptions,
) -> Result<(f64, f64)> {
    match eps {
        Eps::Rational(r) => {
            let sol = sync_capacity_at(profile, td, r, power, opts.period_cap)?;
            Ok((sol.capacity_bits, sol.capacity_nats))
        }
        Eps::Real(x) => {
            let est = liminf_capacity(profile, td, *x, power, opts)?;
            Ok((est.value_bits, est.value_nats))
        }
    }
}

/// One sweep: an axis, the capacity (bits) at each point, and a per-point
/// label recording how the point was discretized.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: Vec<f64>,
    pub capacities_bits: Vec<f64>,
    pub point_labels: Vec<String>,
    pub metadata: String,
}

impl SweepResult {
    pub fn capacities_nats(&self) -> Vec<f64> {
        self.capacities_bits
            .iter()
            .map(|c| c * std::f64::consts::LN_2)
            .collect()
    }
}

/// Capacity versus the sampling ratio `Tc / Ts`.
///
/// Each ratio `r` is split as `td = floor(r)` plus a fractional mismatch,
/// which is rationalized by the best continued-fraction convergent with
/// denominator at most `max_denominator`; the label records the rational
/// actually used.
pub fn sweep_ratio(
    profile: &VarianceProfile,
    ratio_grid: &[f64],
    power: f64,
    max_denominator: u64,
    opts: &AsyncOptions,
) -> Result<SweepResult> {
    for &r in ratio_grid {
        if !(r > 1.0) {
            return Err(Error::Domain(format!("sampling ratio must exceed 1, got {r}")));
        }
    }
    let points: Vec<Result<(f64, String)>> = indexed_map(ratio_grid.len(), |i| {
        let r = ratio_grid[i];
        let td = r.floor() as u64;
        let frac = r - td as f64;
        let eps = Rational::approximate(frac, max_denominator)?;
        let sol = sync_capacity_at(profile, td, &eps, power, opts.period_cap)?;
        Ok((sol.capacity_bits, format!("{td}+{eps}")))
    });

    let mut capacities = Vec::with_capacity(points.len());
    let mut labels = Vec::with_capacity(points.len());
    for p in points {
        let (c, l) = p?;
        capacities.push(c);
        labels.push(l);
    }
    Ok(SweepResult {
        axis: ratio_grid.to_vec(),
        capacities_bits: capacities,
        point_labels: labels,
        metadata: format!(
            "capacity vs Tc/Ts, P={power}, max_denominator={max_denominator}"
        ),
    })
}

/// Capacity versus power, one sweep per mismatch in `eps_list`.
pub fn sweep_power(
    profile: &VarianceProfile,
    td: u64,
    eps_list: &[Eps],
    power_grid: &[f64],
    opts: &AsyncOptions,
) -> Result<Vec<SweepResult>> {
    eps_list
        .iter()
        .map(|eps| {
            let points: Vec<Result<f64>> = indexed_map(power_grid.len(), |i| {
                capacity_at(profile, td, eps, power_grid[i], opts).map(|(bits, _)| bits)
            });
            let capacities = points.into_iter().collect::<Result<Vec<_>>>()?;
            let label = match eps {
                Eps::Rational(r) => format!("eps={r}"),
                Eps::Real(x) => format!("eps~{x} (liminf estimate)"),
            };
            Ok(SweepResult {
                axis: power_grid.to_vec(),
                capacities_bits: capacities,
                point_labels: vec![label.clone(); power_grid.len()],
                metadata: format!("capacity vs P, td={td}, {label}"),
            })
        })
        .collect()
}

/// Capacity versus sampling offset, all else fixed.
pub fn sweep_offset(
    profile: &VarianceProfile,
    td: u64,
    eps: &Eps,
    phi_grid: &[f64],
    power: f64,
    opts: &AsyncOptions,
) -> Result<SweepResult> {
    let points: Vec<Result<f64>> = indexed_map(phi_grid.len(), |i| {
        let shifted = profile.with_offset(phi_grid[i])?;
        capacity_at(&shifted, td, eps, power, opts).map(|(bits, _)| bits)
    });
    let capacities = points.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: phi_grid.to_vec(),
        capacities_bits: capacities,
        point_labels: Vec::new(),
        metadata: format!("capacity vs offset, td={td}, eps={}, P={power}", eps.value()),
    })
}

/// Variances of a profile sampled at an exact rational mismatch; shared by
/// the information-spectrum lab.
pub fn variances_at(
    profile: &VarianceProfile,
    td: u64,
    eps: &Rational,
    period_cap: u64,
) -> Result<DtVarianceSeq> {
    sample_variances(profile, td, eps, period_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn paper_profile(duty: f64, phi: f64) -> VarianceProfile {
        VarianceProfile::pulse(0.2, 4.8, 5e-6, phi, duty, 0.01).unwrap()
    }

    fn opts() -> AsyncOptions {
        AsyncOptions::default()
    }

    #[test]
    fn zero_mismatch_gives_constant_sequence() {
        let p = paper_profile(0.47, 0.0);
        let seq = capacity_sequence(&p, 3, 0.0, 1.0, 1, 100, &opts()).unwrap();
        let first = seq.entries[0].capacity_bits;
        for e in &seq.entries {
            assert_eq!(e.capacity_bits, first, "C_{} deviates", e.n);
            assert_eq!(e.eps_n, Rational::zero());
        }
        let est = liminf_estimate(&seq, 100, 0.01).unwrap();
        assert_eq!(est.value_bits, first);
        assert_eq!(est.tail_spread_bits, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn rational_mismatch_is_a_fixed_point() {
        // eps = 2/5: orders divisible by 5 rationalize to exactly 2/5.
        let p = paper_profile(0.47, 0.0);
        let direct = sync_capacity_at(&p, 2, &Rational::new(2, 5).unwrap(), 1.0, 1 << 20)
            .unwrap()
            .capacity_bits;
        let seq = capacity_sequence(&p, 2, 0.4, 1.0, 1, 30, &opts()).unwrap();
        for e in &seq.entries {
            if e.n % 5 == 0 {
                assert_eq!(e.eps_n, Rational::new(2, 5).unwrap());
                assert!((e.capacity_bits - direct).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn stationary_noise_is_sampling_invariant() {
        let flat = VarianceProfile::pulse(0.5, 0.0, 5e-6, 0.0, 0.47, 0.01).unwrap();
        let awgn = 0.5 * (1.0 + 1.0 / 0.5f64).log2();
        let seq = capacity_sequence(&flat, 2, PI / 7.0, 1.0, 1, 60, &opts()).unwrap();
        for e in &seq.entries {
            assert!((e.capacity_bits - awgn).abs() < 1e-12);
        }
    }

    #[test]
    fn paper_range_dc95_phi0() {
        // DC = 95%, Td = 2, eps = pi/7, P = 1: the n in [5, 15] window. The
        // extremes land on n = 6 (period 7, one quiet sample) and n = 12
        // (period 29, one quiet and one mid-fall sample); both closed forms
        // are evaluated here independently of the solver.
        let p = paper_profile(0.95, 0.0);
        let seq = capacity_sequence(&p, 2, PI / 7.0, 1.0, 5, 15, &opts()).unwrap();

        let delta6 = 1.0 + (0.2 + 6.0 * 5.0) / 7.0;
        let c6 = ((delta6 / 0.2f64).ln() + 6.0 * (delta6 / 5.0f64).ln()) / 14.0;
        let mid12 = 0.2 + 4.8 * (1.0 - (28.0 / 29.0 - 0.96) / 0.01);
        let delta12 = 1.0 + (0.2 + mid12 + 27.0 * 5.0) / 29.0;
        let c12 = ((delta12 / 0.2f64).ln() + (delta12 / mid12).ln() + 27.0 * (delta12 / 5.0f64).ln())
            / 58.0;

        let nats: Vec<f64> = seq.entries.iter().map(|e| e.capacity_nats).collect();
        let max = nats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = nats.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((max - c6).abs() < 1e-12, "max {max} vs closed form {c6}");
        assert!((min - c12).abs() < 1e-12, "min {min} vs closed form {c12}");

        // The published range for this configuration, read in nats.
        assert!((min - 0.1407).abs() < 0.05);
        assert!((max - 0.2615).abs() < 0.05);
    }

    #[test]
    fn ratio_sweep_synchronous_points() {
        let p = paper_profile(0.47, 0.0);
        let sweep = sweep_ratio(&p, &[2.5, 3.0], 1.0, 100, &opts()).unwrap();
        assert_eq!(sweep.point_labels[0], "2+1/2");
        assert_eq!(sweep.point_labels[1], "3+0/1");
        // Ratio 3 with offset 0 leaves two quiet samples: C = log2(8.5)/3.
        assert!((sweep.capacities_bits[1] - 8.5f64.log2() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_sweep_near_irrational_matches_liminf() {
        let p = paper_profile(0.47, 0.0);
        let eps = PI / 1000.0;
        let sweep = sweep_ratio(&p, &[2.0 + eps], 1.0, 10_000, &opts()).unwrap();
        let est = liminf_capacity(&p, 2, eps, 1.0, &opts()).unwrap();
        assert!(
            (sweep.capacities_bits[0] - est.value_bits).abs() < 0.02,
            "rationalized point {} vs liminf {}",
            sweep.capacities_bits[0],
            est.value_bits
        );
    }

    #[test]
    fn ratio_sweep_rejects_small_ratios() {
        let p = paper_profile(0.47, 0.0);
        assert!(sweep_ratio(&p, &[0.9], 1.0, 100, &opts()).is_err());
    }

    #[test]
    fn power_sweep_is_monotone() {
        let p = paper_profile(0.47, 0.0);
        let sweeps = sweep_power(
            &p,
            2,
            &[Eps::Rational(Rational::zero())],
            &[1.0, 10.0, 100.0],
            &opts(),
        )
        .unwrap();
        let caps = &sweeps[0].capacities_bits;
        assert!(caps[0] < caps[1] && caps[1] < caps[2]);
    }

    #[test]
    fn offset_sweep_flat_profile_is_constant() {
        let flat = VarianceProfile::pulse(0.5, 0.0, 5e-6, 0.0, 0.47, 0.01).unwrap();
        let sweep = sweep_offset(
            &flat,
            3,
            &Eps::Rational(Rational::zero()),
            &[0.0, 0.1, 0.25, 0.6, 0.9],
            1.0,
            &opts(),
        )
        .unwrap();
        let first = sweep.capacities_bits[0];
        for &c in &sweep.capacities_bits {
            assert_eq!(c, first);
        }
    }

    #[test]
    fn synchronous_capacity_depends_on_offset() {
        let p = paper_profile(0.47, 0.0);
        let sweep = sweep_offset(
            &p,
            3,
            &Eps::Rational(Rational::zero()),
            &[0.0, 0.25],
            1.0,
            &opts(),
        )
        .unwrap();
        let diff = (sweep.capacities_bits[0] - sweep.capacities_bits[1]).abs();
        assert!(diff > 0.2, "offset difference {diff} too small");
    }

    #[test]
    fn high_order_rational_offset_insensitive() {
        // A mismatch with a large denominator behaves asynchronously: the
        // offset barely moves capacity.
        let p = paper_profile(0.47, 0.0);
        let eps = Eps::Rational(Rational::new(89, 200).unwrap());
        let sweep = sweep_offset(&p, 2, &eps, &[0.0, 0.1, 0.25, 0.5], 1.0, &opts()).unwrap();
        let max = sweep.capacities_bits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = sweep.capacities_bits.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max - min < 0.02, "offset spread {} too large", max - min);
    }

    #[test]
    fn sequence_truncates_at_period_cap() {
        let p = paper_profile(0.47, 0.0);
        let opts = AsyncOptions {
            period_cap: 40,
            ..AsyncOptions::default()
        };
        let seq = capacity_sequence(&p, 2, PI / 7.0, 1.0, 1, 100, &opts).unwrap();
        assert!(seq.truncated.is_some());
        assert!(seq.entries.len() < 100);
        for e in &seq.entries {
            assert!(e.eps_n.denominator() * 2 + e.eps_n.numerator() <= 40);
        }
    }

    #[test]
    fn sequence_is_deterministic() {
        let p = paper_profile(0.75, 0.25);
        let a = capacity_sequence(&p, 2, PI / 7.0, 1.0, 1, 80, &opts()).unwrap();
        let b = capacity_sequence(&p, 2, PI / 7.0, 1.0, 1, 80, &opts()).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert_eq!(x.capacity_bits.to_bits(), y.capacity_bits.to_bits());
        }
    }

    #[test]
    fn liminf_never_claims_convergence_above_threshold() {
        let p = paper_profile(0.47, 0.0);
        let seq = capacity_sequence(&p, 2, PI / 7.0, 1.0, 1, 40, &opts()).unwrap();
        let strict = liminf_estimate(&seq, 40, 0.0).unwrap();
        assert!(strict.tail_spread_bits > 0.0);
        assert!(!strict.converged);
        let lax = liminf_estimate(&seq, 40, 10.0).unwrap();
        assert!(lax.converged);
        assert_eq!(strict.value_bits, lax.value_bits);
    }

    #[test]
    fn liminf_rejects_bad_windows() {
        let p = paper_profile(0.47, 0.0);
        let seq = capacity_sequence(&p, 2, 0.0, 1.0, 1, 10, &opts()).unwrap();
        assert!(liminf_estimate(&seq, 0, 0.01).is_err());
        assert!(liminf_estimate(&seq, 11, 0.01).is_err());
    }
}
