//! Exact rational arithmetic for synchronization mismatches.
//!
//! The sampled-noise period is an integer that depends on the mismatch
//! `eps = u/v` between the noise period and the sampling interval, so the
//! mismatch has to be carried exactly rather than as a float. This module
//! provides the reduced fraction type, the floor-rationalization used to
//! build capacity sequences, and best rational approximation by continued
//! fractions for sweeps over real-valued sampling ratios.

use crate::error::{Error, Result};

/// A reduced non-negative fraction `num/den` with `den >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    /// Builds `num/den` in lowest terms.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("rational denominator must be positive".into()));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    /// The fraction 0/1.
    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// The fraction as a float.
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Best rational approximation of `x` in `[0, 1)` with denominator at
    /// most `max_den`, taken as the last continued-fraction convergent whose
    /// denominator fits the bound.
    pub fn approximate(x: f64, max_den: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "rational approximation expects a value in [0, 1), got {x}"
            )));
        }
        if max_den == 0 {
            return Err(Error::Domain("max denominator must be positive".into()));
        }

        // Convergents h_k/k_k of the continued fraction of x.
        let (mut h_prev, mut k_prev) = (1u64, 0u64);
        let (mut h, mut k) = (0u64, 1u64);
        let mut frac = x;
        for _ in 0..64 {
            if frac <= 0.0 {
                break;
            }
            let inv = 1.0 / frac;
            if inv >= u64::MAX as f64 {
                break;
            }
            let a = inv as u64;
            frac = inv - a as f64;

            let h_next = match a.checked_mul(h).and_then(|v| v.checked_add(h_prev)) {
                Some(v) => v,
                None => break,
            };
            let k_next = match a.checked_mul(k).and_then(|v| v.checked_add(k_prev)) {
                Some(v) => v,
                None => break,
            };
            if k_next > max_den {
                break;
            }
            h_prev = h;
            k_prev = k;
            h = h_next;
            k = k_next;
        }
        Self::new(h, k)
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// The order-`n` rationalization `floor(n * eps) / n` of a mismatch
/// `eps` in `[0, 1)`, returned in lowest terms.
pub fn epsilon_n(eps: f64, n: u64) -> Result<Rational> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!(
            "synchronization mismatch must lie in [0, 1), got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("rationalization order must be positive".into()));
    }
    let floor = (n as f64 * eps).floor() as u64;
    Rational::new(floor.min(n - 1), n)
}
