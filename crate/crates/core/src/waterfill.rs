//! Water-filling capacity of a memoryless channel with periodic additive
//! Gaussian noise.
//!
//! The water level is the unique root of the average-power balance
//! `(1/p) * sum_i (delta - sigma2[i])^+ = P`; capacity follows as
//! `(1/2p) * sum_i (log(delta / sigma2[i]))^+`. Two independent solvers are
//! provided: bisection on the monotone balance map (the default, robust for
//! periods up to 1e7 samples) and a sorted-prefix closed form used as a
//! cross-check. A brute-force simplex-grid maximizer serves as an oracle for
//! short periods.

use crate::error::{Error, Result};
use crate::profile::DtVarianceSeq;

/// Default relative tolerance on the power-balance residual.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Absolute floor applied to the residual tolerance.
pub const TOL_FLOOR: f64 = 1e-12;

const MAX_BISECT_ITERS: u32 = 200;

/// Optimal power allocation for one noise period.
#[derive(Debug, Clone)]
pub struct WaterFillSolution {
    /// Water level.
    pub delta: f64,
    /// Per-index input power `(delta - sigma2[i])^+`.
    pub allocation: Vec<f64>,
    /// Capacity in bits per channel use.
    pub capacity_bits: f64,
    /// Capacity in nats per channel use.
    pub capacity_nats: f64,
    /// Bisection iterations spent finding the water level.
    pub iterations: u32,
}

impl WaterFillSolution {
    /// Largest complementarity defect `|min(p_i, sigma2_i + p_i - delta)|`;
    /// zero when every index either receives power exactly up to the water
    /// level or receives none while sitting above it.
    pub fn kkt_residual(&self, vars: &DtVarianceSeq) -> f64 {
        self.allocation
            .iter()
            .zip(vars.values())
            .map(|(&p, &s)| p.min(s + p - self.delta).abs())
            .fold(0.0, f64::max)
    }

    /// Signed defect of the average-power constraint.
    pub fn power_residual(&self, power: f64) -> f64 {
        kahan_sum(self.allocation.iter().copied()) / self.allocation.len() as f64 - power
    }
}

fn check_inputs(vars: &DtVarianceSeq, power: f64) -> Result<()> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain(format!(
            "average power must be strictly positive, got {power}"
        )));
    }
    debug_assert!(vars.values().iter().all(|&v| v > 0.0));
    Ok(())
}

/// Compensated summation; keeps the power balance meaningful for periods of
/// millions of samples.
fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Average allocated power at water level `delta`.
fn average_power(vars: &[f64], delta: f64) -> f64 {
    kahan_sum(vars.iter().map(|&s| (delta - s).max(0.0))) / vars.len() as f64
}

/// Water level solved by bisection of the power balance.
///
/// The balance map is continuous, nondecreasing, and strictly increasing
/// above the smallest variance, so the root bracketed by
/// `[min sigma2, max sigma2 + P]` is unique. Returns the level together with
/// the number of bisection steps.
pub fn water_level_with_iterations(
    vars: &DtVarianceSeq,
    power: f64,
    tol: f64,
) -> Result<(f64, u32)> {
    check_inputs(vars, power)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let values = vars.values();

    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + power;
    // The residual itself is evaluated in f64, so its achievable precision is
    // bounded by the magnitude of the bracket end.
    let tol_abs = (tol * power)
        .max(TOL_FLOOR)
        .max(4.0 * f64::EPSILON * hi.abs());

    // Equal variances put the root exactly on the upper bracket end.
    if average_power(values, hi) <= power {
        return Ok((hi, 0));
    }

    let mut iterations = 0;
    while iterations < MAX_BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket exhausted at f64 resolution
        }
        if average_power(values, mid) >= power {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }

    let delta = hi;
    let residual = (average_power(values, delta) - power).abs();
    if residual > tol_abs {
        // The bracket always contains the root, so this is unreachable.
        return Err(Error::Internal(format!(
            "bisection left residual {residual} above tolerance {tol_abs}"
        )));
    }
    Ok((delta, iterations))
}

/// Water level of the average-power balance (bisection solver).
pub fn water_level(vars: &DtVarianceSeq, power: f64, tol: f64) -> Result<f64> {
    water_level_with_iterations(vars, power, tol).map(|(d, _)| d)
}

/// Water level from the sorted-prefix closed form.
///
/// Independent of the bisection path; with `m` active indices the level is
/// `(p*P + sum of the m smallest variances) / m`, and the correct `m` is the
/// one for which the level lands between the m-th and (m+1)-th smallest
/// variance.
pub fn water_level_sorted(vars: &DtVarianceSeq, power: f64) -> Result<f64> {
    check_inputs(vars, power)?;
    let mut sorted = vars.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("variances are finite"));
    let total = power * sorted.len() as f64;

    let mut prefix = 0.0;
    for m in 1..=sorted.len() {
        prefix += sorted[m - 1];
        let delta = (total + prefix) / m as f64;
        let above_current = delta >= sorted[m - 1];
        let below_next = m == sorted.len() || delta <= sorted[m];
        if above_current && below_next {
            return Ok(delta);
        }
    }
    Err(Error::Internal(
        "sorted water-level scan found no consistent active set".into(),
    ))
}

/// Full water-filling solution with capacity in bits and nats.
pub fn sync_capacity(vars: &DtVarianceSeq, power: f64) -> Result<WaterFillSolution> {
    let (delta, iterations) = water_level_with_iterations(vars, power, DEFAULT_TOL)?;
    let values = vars.values();
    let allocation: Vec<f64> = values.iter().map(|&s| (delta - s).max(0.0)).collect();
    let capacity_nats = kahan_sum(values.iter().map(|&s| (delta / s).ln().max(0.0)))
        / (2.0 * values.len() as f64);
    Ok(WaterFillSolution {
        delta,
        allocation,
        capacity_bits: capacity_nats / std::f64::consts::LN_2,
        capacity_nats,
        iterations,
    })
}

/// Brute-force capacity oracle: exhaustive grid search over the power
/// simplex followed by pairwise-transfer refinement. Exponential in the
/// period length, so it only accepts periods up to 4.
pub fn bruteforce_capacity(vars: &DtVarianceSeq, power: f64, grid_steps: u32) -> Result<f64> {
    check_inputs(vars, power)?;
    let n = vars.len();
    if n > 4 {
        return Err(Error::Unsupported(format!(
            "brute-force oracle handles periods up to 4, got {n}"
        )));
    }
    if grid_steps < 100 {
        return Err(Error::Domain(format!(
            "grid must have at least 100 steps, got {grid_steps}"
        )));
    }

    let sigma = vars.values();
    let total = power * n as f64;
    let unit = total / grid_steps as f64;
    let rate = |alloc: &[f64]| -> f64 {
        alloc
            .iter()
            .zip(sigma)
            .map(|(&p, &s)| 0.5 * (1.0 + p / s).log2())
            .sum::<f64>()
            / n as f64
    };

    // Grid stage: every composition of grid_steps units over the n bins.
    let mut best = vec![0.0; n];
    let mut best_rate = f64::NEG_INFINITY;
    let mut counts = vec![0u32; n];
    enumerate_compositions(grid_steps, n, &mut counts, &mut |counts| {
        let alloc: Vec<f64> = counts.iter().map(|&c| c as f64 * unit).collect();
        let r = rate(&alloc);
        if r > best_rate {
            best_rate = r;
            best.copy_from_slice(&alloc);
        }
    });

    // Refinement stage: shift power between bin pairs with a shrinking step.
    // The objective is concave on the simplex, so pairwise transfers reach
    // the optimum.
    let mut step = unit;
    let stop = 1e-12 * total.max(1.0);
    while step > stop {
        let mut improved = false;
        for from in 0..n {
            for to in 0..n {
                if from == to {
                    continue;
                }
                let shift = step.min(best[from]);
                if shift <= 0.0 {
                    continue;
                }
                let mut cand = best.clone();
                cand[from] -= shift;
                cand[to] += shift;
                let r = rate(&cand);
                if r > best_rate {
                    best_rate = r;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(best_rate)
}

fn enumerate_compositions(total: u32, bins: usize, counts: &mut [u32], f: &mut impl FnMut(&[u32])) {
    fn rec(remaining: u32, idx: usize, counts: &mut [u32], f: &mut impl FnMut(&[u32])) {
        if idx == counts.len() - 1 {
            counts[idx] = remaining;
            f(counts);
            return;
        }
        for c in 0..=remaining {
            counts[idx] = c;
            rec(remaining - c, idx + 1, counts, f);
        }
    }
    let _ = bins;
    rec(total, 0, counts, f);
}
