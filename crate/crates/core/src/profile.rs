//! Periodic continuous-time noise variance profiles and their sampled
//! discrete-time variance sequences.
//!
//! A profile is a strictly positive, continuous, periodic variance function
//! `sigma2(t) = base + amplitude * shape((t / period - phi) mod 1)` where the
//! shape maps into `[0, 1]`. Sampling it with interval `Ts = Tc / (td + u/v)`
//! yields a variance sequence with integer period `td*v + u`; the sample
//! times are reduced with exact integer arithmetic so that long periods do
//! not accumulate rounding.

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Default cap on the discrete-time period length, in samples.
pub const DEFAULT_PERIOD_CAP: u64 = 10_000_000;

/// Trapezoidal pulse: linear rise, flat top of width `duty`, linear fall,
/// then zero, with period 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    duty: f64,
    rise: f64,
}

impl PulseShape {
    pub const DEFAULT_RISE: f64 = 0.01;

    /// Validates `duty` in `[0, 0.98]`, `rise` in `(0, 0.5)` and
    /// `duty + 2*rise <= 1` (the trapezoid must fit in one period).
    pub fn new(duty: f64, rise: f64) -> Result<Self> {
        if !(0.0..=0.98).contains(&duty) {
            return Err(Error::Config(format!(
                "duty cycle must lie in [0, 0.98], got {duty}"
            )));
        }
        if !(rise > 0.0 && rise < 0.5) {
            return Err(Error::Config(format!(
                "rise time must lie in (0, 0.5), got {rise}"
            )));
        }
        if duty + 2.0 * rise > 1.0 {
            return Err(Error::Config(format!(
                "duty + 2*rise must not exceed 1, got {}",
                duty + 2.0 * rise
            )));
        }
        Ok(Self { duty, rise })
    }

    /// Duty cycle with the default rise time of 0.01.
    pub fn with_duty(duty: f64) -> Result<Self> {
        Self::new(duty, Self::DEFAULT_RISE)
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    pub fn rise(&self) -> f64 {
        self.rise
    }

    /// Pulse value at a normalized time, periodic with period 1.
    ///
    /// Branch boundaries are closed exactly as the four-branch definition
    /// reads, so t = 0 sits on the start of the rise ramp and evaluates
    /// to 0. Figure-value reproduction is sensitive to these edge hits.
    pub fn value(&self, t_norm: f64) -> f64 {
        let t = t_norm - t_norm.floor(); // into [0, 1)
        // The ramp quotients can land a rounding error outside [0, 1] when a
        // branch boundary is hit inexactly; clamping keeps the invariant.
        if t <= self.rise {
            (t / self.rise).clamp(0.0, 1.0)
        } else if t < self.duty + self.rise {
            1.0
        } else if t <= self.duty + 2.0 * self.rise {
            (1.0 - (t - self.duty - self.rise) / self.rise).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Periodic shape given by sample points `(x, y)` with linear interpolation
/// and wraparound from the last point back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedShape {
    points: Vec<(f64, f64)>,
}

impl TabulatedShape {
    /// Validates that the abscissae are strictly increasing in `[0, 1)` and
    /// the ordinates lie in `[0, 1]`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("tabulated shape needs at least one point".into()));
        }
        for (i, &(x, y)) in points.iter().enumerate() {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::Config(format!(
                    "tabulated abscissa {x} at index {i} outside [0, 1)"
                )));
            }
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::Config(format!(
                    "tabulated value {y} at index {i} outside [0, 1]"
                )));
            }
            if i > 0 && x <= points[i - 1].0 {
                return Err(Error::Config(
                    "tabulated abscissae must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { points })
    }

    pub fn value(&self, t_norm: f64) -> f64 {
        let t = t_norm - t_norm.floor();
        let n = self.points.len();
        if n == 1 {
            return self.points[0].1;
        }
        // Index of the segment start: last point with x <= t, wrapping to the
        // final point when t precedes the first abscissa.
        let idx = self
            .points
            .iter()
            .rposition(|&(x, _)| x <= t)
            .unwrap_or(n - 1);
        let (x0, y0) = self.points[idx];
        let (x1, y1) = self.points[(idx + 1) % n];
        // Wrapped segment spans the period boundary.
        let (x0, x1, t) = if idx == n - 1 {
            if t >= x0 {
                (x0, x1 + 1.0, t)
            } else {
                (x0, x1 + 1.0, t + 1.0)
            }
        } else {
            (x0, x1, t)
        };
        let span = x1 - x0;
        if span <= 0.0 {
            return y0;
        }
        y0 + (y1 - y0) * (t - x0) / span
    }
}

/// The shape factor of a variance profile, mapping normalized time to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    Trapezoid(PulseShape),
    Tabulated(TabulatedShape),
}

impl ProfileShape {
    pub fn value(&self, t_norm: f64) -> f64 {
        match self {
            ProfileShape::Trapezoid(p) => p.value(t_norm),
            ProfileShape::Tabulated(t) => t.value(t_norm),
        }
    }
}

/// Periodic continuous-time noise variance
/// `sigma2(t) = base + amplitude * shape(t / period_tc - offset_phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    base: f64,
    amplitude: f64,
    period_tc: f64,
    offset_phi: f64,
    shape: ProfileShape,
}

impl VarianceProfile {
    pub fn new(
        base: f64,
        amplitude: f64,
        period_tc: f64,
        offset_phi: f64,
        shape: ProfileShape,
    ) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::Config(format!(
                "base variance must be strictly positive, got {base}"
            )));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "pulse amplitude must be non-negative, got {amplitude}"
            )));
        }
        if !(period_tc > 0.0 && period_tc.is_finite()) {
            return Err(Error::Config(format!(
                "period must be strictly positive, got {period_tc}"
            )));
        }
        if !(0.0..1.0).contains(&offset_phi) {
            return Err(Error::Config(format!(
                "sampling offset must lie in [0, 1), got {offset_phi}"
            )));
        }
        Ok(Self {
            base,
            amplitude,
            period_tc,
            offset_phi,
            shape,
        })
    }

    /// Trapezoidal-pulse profile.
    pub fn pulse(
        base: f64,
        amplitude: f64,
        period_tc: f64,
        offset_phi: f64,
        duty: f64,
        rise: f64,
    ) -> Result<Self> {
        Self::new(
            base,
            amplitude,
            period_tc,
            offset_phi,
            ProfileShape::Trapezoid(PulseShape::new(duty, rise)?),
        )
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn period_tc(&self) -> f64 {
        self.period_tc
    }

    pub fn offset_phi(&self) -> f64 {
        self.offset_phi
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    /// The same profile with a different sampling offset.
    pub fn with_offset(&self, offset_phi: f64) -> Result<Self> {
        Self::new(
            self.base,
            self.amplitude,
            self.period_tc,
            offset_phi,
            self.shape.clone(),
        )
    }

    /// Variance at a normalized time `t / period_tc`.
    pub fn variance_at_norm(&self, t_norm: f64) -> f64 {
        self.base + self.amplitude * self.shape.value(t_norm - self.offset_phi)
    }
}

/// Pulse value at a normalized time.
pub fn pulse_value(t_norm: f64, shape: &PulseShape) -> f64 {
    shape.value(t_norm)
}

/// Variance of the continuous-time profile at time `t` (seconds).
pub fn variance_at(profile: &VarianceProfile, t: f64) -> f64 {
    profile.variance_at_norm(t / profile.period_tc())
}

/// A synchronization mismatch: exactly rational, or real-valued and handled
/// through rationalization (a truly irrational sampling ratio cannot be
/// represented; the contract is capacity as a function of the
/// rationalization order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eps {
    Rational(Rational),
    Real(f64),
}

impl Eps {
    pub fn value(&self) -> f64 {
        match self {
            Eps::Rational(r) => r.value(),
            Eps::Real(x) => *x,
        }
    }
}

/// Sampling configuration `Tc = (td + eps) * Ts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub td: u64,
    pub eps: Eps,
}

impl SamplingSpec {
    pub fn new(td: u64, eps: Eps) -> Result<Self> {
        if td == 0 {
            return Err(Error::Domain("integer ratio part td must be at least 1".into()));
        }
        if let Eps::Real(x) = eps {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::Domain(format!(
                    "synchronization mismatch must lie in [0, 1), got {x}"
                )));
            }
        }
        Ok(Self { td, eps })
    }

    /// The sampling ratio `Tc / Ts = td + eps`.
    pub fn ratio(&self) -> f64 {
        self.td as f64 + self.eps.value()
    }
}

impl Eps {
    /// The working rational at rationalization order `n`: exact rationals
    /// pass through, real values become `floor(n*eps)/n`. Truly irrational
    /// ratios are never pretended at; every computation runs at some order.
    pub fn rationalize(&self, order: u64) -> Result<crate::rational::Rational> {
        match self {
            Eps::Rational(r) => Ok(*r),
            Eps::Real(x) => crate::rational::epsilon_n(*x, order),
        }
    }
}

/// One period of a sampled discrete-time noise variance sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DtVarianceSeq {
    values: Vec<f64>,
    period_len: u64,
}

impl DtVarianceSeq {
    /// Wraps an explicit variance list; each entry must be strictly positive
    /// and finite.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("variance sequence must be non-empty".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!(
                    "variance at index {i} must be strictly positive, got {v}"
                )));
            }
        }
        let period_len = values.len() as u64;
        Ok(Self { values, period_len })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn period_len(&self) -> u64 {
        self.period_len
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean variance over one period.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Samples one discrete-time variance period of `profile` under the sampling
/// configuration `Tc = (td + eps) * Ts` with `eps = u/v` reduced.
///
/// The period is `td*v + u` samples; sample `i` lands at normalized time
/// `(i*v mod (td*v + u)) / (td*v + u)`, computed in integer arithmetic.
pub fn sample_variances(
    profile: &VarianceProfile,
    td: u64,
    eps: &Rational,
    max_period: u64,
) -> Result<DtVarianceSeq> {
    if td == 0 {
        return Err(Error::Domain("integer ratio part td must be at least 1".into()));
    }
    let (u, v) = (eps.numerator(), eps.denominator());
    let period = td
        .checked_mul(v)
        .and_then(|p| p.checked_add(u))
        .ok_or_else(|| Error::Resource("discrete-time period overflows u64".into()))?;
    if period > max_period {
        return Err(Error::Resource(format!(
            "discrete-time period {period} exceeds cap {max_period}"
        )));
    }

    let values = (0..period)
        .map(|i| {
            let phase = (i * v) % period;
            profile.variance_at_norm(phase as f64 / period as f64)
        })
        .collect();
    DtVarianceSeq::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{epsilon_n, Rational};
    use std::f64::consts::PI;

    fn paper_profile(duty: f64, phi: f64) -> VarianceProfile {
        VarianceProfile::pulse(0.2, 4.8, 5e-6, phi, duty, 0.01).unwrap()
    }

    #[test]
    fn pulse_branch_values() {
        let shape = PulseShape::new(0.47, 0.01).unwrap();
        assert_eq!(pulse_value(0.0, &shape), 0.0);
        assert_eq!(pulse_value(0.3, &shape), 1.0);
        assert_eq!(pulse_value(1.3, &shape), 1.0); // period-1 wraparound
        assert_eq!(pulse_value(0.7, &shape), 0.0);

        let half = PulseShape::new(0.5, 0.01).unwrap();
        assert!((pulse_value(0.005, &half) - 0.5).abs() < 1e-12); // rise midpoint
    }

    #[test]
    fn pulse_edge_hits_take_left_branch() {
        let shape = PulseShape::new(0.47, 0.01).unwrap();
        // Edges are continuous, so whichever branch a float boundary lands
        // in, the value agrees to rounding.
        assert!((shape.value(0.01) - 1.0).abs() < 1e-12);
        assert!((shape.value(0.48) - 1.0).abs() < 1e-12);
        assert!(shape.value(0.49).abs() < 1e-12);
        // Fall midpoint.
        assert!((shape.value(0.485) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn pulse_stays_in_unit_interval_and_is_periodic() {
        let shape = PulseShape::new(0.47, 0.01).unwrap();
        let mut t = -3.7;
        while t < 4.0 {
            let v = shape.value(t);
            assert!((0.0..=1.0).contains(&v), "pulse({t}) = {v}");
            assert!((v - shape.value(t + 1.0)).abs() < 1e-12);
            assert!((v - shape.value(t - 2.0)).abs() < 1e-12);
            t += 0.0137;
        }
        // Inexact branch-boundary hits must not leak outside [0, 1]; t = 0.49
        // lands a rounding error past the fall-ramp end.
        for i in 0..=1000 {
            let v = shape.value(i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v), "pulse({}/1000) = {v}", i);
        }
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(PulseShape::new(0.99, 0.01).is_err());
        assert!(PulseShape::new(0.99, 0.005).is_err()); // duty > 0.98
        assert!(PulseShape::new(0.97, 0.02).is_err()); // 0.97 + 0.04 > 1
        assert!(PulseShape::new(0.5, 0.0).is_err());
        assert!(PulseShape::new(0.5, 0.5).is_err());
        assert!(PulseShape::new(-0.1, 0.01).is_err());
    }

    #[test]
    fn variance_at_paper_values() {
        let p = paper_profile(0.47, 0.0);
        // Flat-top sample and flat-bottom sample of 0.2 + 4.8 * pulse.
        assert_eq!(variance_at(&p, 0.3 * 5e-6), 5.0);
        assert_eq!(variance_at(&p, 0.7 * 5e-6), 0.2);

        let flat = VarianceProfile::pulse(0.7, 0.0, 5e-6, 0.0, 0.47, 0.01).unwrap();
        for i in 0..20 {
            assert_eq!(variance_at(&flat, i as f64 * 3.3e-7), 0.7);
        }
    }

    #[test]
    fn variance_is_periodic_in_tc() {
        let p = paper_profile(0.47, 0.3);
        let mut t = 0.11e-6;
        for m in [-3i64, -1, 1, 2, 7] {
            for _ in 0..40 {
                t = (t * 1.7 + 0.23e-6) % 5e-6;
                let a = variance_at(&p, t);
                let b = variance_at(&p, t + m as f64 * 5e-6);
                assert!((a - b).abs() < 1e-9, "period violated at t={t}, m={m}");
            }
        }
    }

    #[test]
    fn variance_is_lipschitz_in_rise() {
        let p = paper_profile(0.47, 0.0);
        let lip = p.amplitude() / (0.01 * p.period_tc());
        let mut t = 0.0;
        for _ in 0..500 {
            t = (t + 0.93e-7) % 5e-6;
            let h = 1e-9;
            let d = (variance_at(&p, t + h) - variance_at(&p, t)).abs();
            assert!(d <= lip * h * (1.0 + 1e-9), "slope {d} exceeds bound at t={t}");
        }
    }

    #[test]
    fn sample_variances_synchronous_td3() {
        // td = 3, eps = 0: samples at normalized times 0, 1/3, 2/3.
        let p = paper_profile(0.47, 0.0);
        let seq = sample_variances(&p, 3, &Rational::zero(), DEFAULT_PERIOD_CAP).unwrap();
        assert_eq!(seq.period_len(), 3);
        assert_eq!(seq.values(), &[0.2, 5.0, 0.2]);
    }

    #[test]
    fn sample_variances_period_length() {
        let p = paper_profile(0.47, 0.0);
        let eps = Rational::new(1, 2).unwrap();
        let seq = sample_variances(&p, 2, &eps, DEFAULT_PERIOD_CAP).unwrap();
        assert_eq!(seq.period_len(), 5);
    }

    #[test]
    fn sample_variances_constant_profile() {
        let flat = VarianceProfile::pulse(0.9, 0.0, 1.0, 0.25, 0.47, 0.01).unwrap();
        let eps = Rational::new(3, 7).unwrap();
        let seq = sample_variances(&flat, 4, &eps, DEFAULT_PERIOD_CAP).unwrap();
        assert_eq!(seq.period_len(), 31);
        assert!(seq.values().iter().all(|&v| v == 0.9));
    }

    #[test]
    fn sample_variances_respects_cap() {
        let p = paper_profile(0.47, 0.0);
        let eps = Rational::new(1, 1_000_000).unwrap();
        let err = sample_variances(&p, 2, &eps, 1_000_000).unwrap_err();
        assert!(matches!(err, crate::error::Error::Resource(_)));
    }

    #[test]
    fn sampled_values_stay_in_bounds() {
        let p = paper_profile(0.95, 0.37);
        for n in 1..40u64 {
            let eps = epsilon_n(PI / 7.0, n).unwrap();
            let seq = sample_variances(&p, 2, &eps, DEFAULT_PERIOD_CAP).unwrap();
            for &v in seq.values() {
                assert!((0.2..=5.0).contains(&v), "sample {v} escapes [base, base+amp]");
            }
        }
    }

    #[test]
    fn offset_equals_shifted_pulse_argument() {
        // Sampling with offset phi equals sampling a zero-offset profile whose
        // pulse argument is shifted by phi.
        let phi = 0.31;
        let with_phi = paper_profile(0.47, phi);
        let no_phi = paper_profile(0.47, 0.0);
        let eps = Rational::new(2, 5).unwrap();
        let seq = sample_variances(&with_phi, 2, &eps, DEFAULT_PERIOD_CAP).unwrap();
        let period = seq.period_len();
        for (i, &v) in seq.values().iter().enumerate() {
            let phase = (i as u64 * 5) % period;
            let direct = no_phi.variance_at_norm(phase as f64 / period as f64 - phi);
            assert!((v - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_eps_sequence_tiles() {
        // With eps = 0 the sequence is td-periodic: sampling over period td*n
        // at the same interval reproduces n tiles of the base period.
        let p = paper_profile(0.75, 0.0);
        let td = 3u64;
        let base = sample_variances(&p, td, &Rational::zero(), DEFAULT_PERIOD_CAP).unwrap();
        for n in [2usize, 5, 9] {
            let tiled: Vec<f64> = (0..td as usize * n)
                .map(|i| {
                    let phase = (i as u64) % td;
                    p.variance_at_norm(phase as f64 / td as f64)
                })
                .collect();
            for (i, &v) in tiled.iter().enumerate() {
                assert_eq!(v, base.values()[i % td as usize]);
            }
        }
    }

    #[test]
    fn tabulated_shape_interpolates_periodically() {
        let shape = TabulatedShape::new(vec![(0.0, 0.0), (0.25, 1.0), (0.5, 0.5)]).unwrap();
        assert_eq!(shape.value(0.0), 0.0);
        assert_eq!(shape.value(0.25), 1.0);
        assert!((shape.value(0.125) - 0.5).abs() < 1e-12);
        // Wrap segment from (0.5, 0.5) back to (1.0, 0.0).
        assert!((shape.value(0.75) - 0.25).abs() < 1e-12);
        assert!((shape.value(1.75) - 0.25).abs() < 1e-12);
        assert!((shape.value(-0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tabulated_shape_validation() {
        assert!(TabulatedShape::new(vec![]).is_err());
        assert!(TabulatedShape::new(vec![(0.0, 0.5), (0.0, 0.7)]).is_err());
        assert!(TabulatedShape::new(vec![(0.0, 1.2)]).is_err());
        assert!(TabulatedShape::new(vec![(1.0, 0.5)]).is_err());
    }

    #[test]
    fn tabulated_profile_samples_within_bounds() {
        let shape = TabulatedShape::new(vec![(0.1, 0.2), (0.4, 0.9), (0.8, 0.0)]).unwrap();
        let p = VarianceProfile::new(0.5, 2.0, 1e-3, 0.0, ProfileShape::Tabulated(shape)).unwrap();
        let eps = Rational::new(1, 3).unwrap();
        let seq = sample_variances(&p, 2, &eps, DEFAULT_PERIOD_CAP).unwrap();
        assert_eq!(seq.period_len(), 7);
        for &v in seq.values() {
            assert!((0.5..=2.5).contains(&v));
        }
    }

    #[test]
    fn sampling_spec_and_eps_rationalize() {
        assert!(SamplingSpec::new(0, Eps::Rational(Rational::zero())).is_err());
        assert!(SamplingSpec::new(2, Eps::Real(1.0)).is_err());
        let spec = SamplingSpec::new(2, Eps::Real(PI / 7.0)).unwrap();
        assert!((spec.ratio() - (2.0 + PI / 7.0)).abs() < 1e-15);

        let r = Eps::Real(PI / 7.0).rationalize(10).unwrap();
        assert_eq!((r.numerator(), r.denominator()), (2, 5));
        let fixed = Eps::Rational(Rational::new(1, 3).unwrap());
        assert_eq!(fixed.rationalize(1000).unwrap(), Rational::new(1, 3).unwrap());
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(VarianceProfile::pulse(0.0, 1.0, 1.0, 0.0, 0.47, 0.01).is_err());
        assert!(VarianceProfile::pulse(1.0, -1.0, 1.0, 0.0, 0.47, 0.01).is_err());
        assert!(VarianceProfile::pulse(1.0, 1.0, 0.0, 0.0, 0.47, 0.01).is_err());
        assert!(VarianceProfile::pulse(1.0, 1.0, 1.0, 1.0, 0.47, 0.01).is_err());
    }
}
