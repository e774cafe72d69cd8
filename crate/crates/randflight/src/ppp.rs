//! Ordered points tau_1 < tau_2 < ... of an inhomogeneous Poisson point
//! process, by two independent methods that cross-validate each other:
//!
//! * inversion (the primary sampler): partial sums S_k of unit exponentials
//!   mapped through the inverse cumulative intensity, tau_k = Lambda^{-1}(S_k);
//! * thinning (the validation oracle): homogeneous candidates at a constant
//!   majorant rate, kept with probability lambda(t)/majorant.
//!
//! Draw order is part of the reproducibility contract. Inversion consumes
//! exactly one unit exponential per emitted point; under a time horizon the
//! first exponential that overshoots Lambda(T) is consumed but produces no
//! point. Thinning alternates a gap exponential and an acceptance uniform
//! per candidate.

use crate::error::{Error, Result};
use crate::rates::RateFunction;
use crate::rng::unit_exponential;
use crate::scalar::{Compensated, Real};
use rand::Rng;

/// Hard cap on materialized point counts, to bound memory.
pub const MAX_COUNT: usize = 100_000_000;

/// When to stop emitting points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop<S> {
    /// Emit every point with tau <= T.
    ByTime(S),
    /// Emit exactly n points.
    ByCount(usize),
}

impl<S: Real> Stop<S> {
    /// Rejects non-positive horizons and count targets outside [1, MAX_COUNT].
    pub fn validate(&self) -> Result<()> {
        match *self {
            Stop::ByTime(t) if !t.is_finite() || t <= S::zero() => Err(Error::domain(
                format!("stop: time horizon must be positive and finite, got {t}"),
            )),
            Stop::ByCount(0) => Err(Error::domain("stop: count target must be at least 1")),
            Stop::ByCount(n) if n > MAX_COUNT => Err(Error::domain(format!(
                "stop: count target {n} exceeds the {MAX_COUNT} point cap"
            ))),
            _ => Ok(()),
        }
    }
}

/// Which sampler produced a `PointProcessSample`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Inversion,
    Thinning,
}

/// A materialized, strictly increasing run of process points.
#[derive(Clone, Debug)]
pub struct PointProcessSample<S> {
    pub times: Vec<S>,
    /// The stop rule the sample was drawn under (for thinning, the window
    /// end as a time horizon).
    pub horizon: Stop<S>,
    pub method: Method,
}

impl<S> PointProcessSample<S> {
    pub fn count(&self) -> usize {
        self.times.len()
    }
}

/// Streaming inversion sampler: constant memory, one point per call.
/// Deterministic given (rate, stop, generator state).
pub struct InversionSampler<'a, S: Real> {
    rate: &'a RateFunction<S>,
    /// Lambda(T) for a time horizon; inversion of the overshoot is skipped
    /// entirely, which also avoids overflow in inverses that grow fast.
    cap_u: Option<S>,
    horizon: Option<S>,
    remaining: Option<usize>,
    partial: Compensated<S>,
    prev: S,
    done: bool,
}

impl<'a, S: Real> InversionSampler<'a, S> {
    pub fn new(rate: &'a RateFunction<S>, stop: Stop<S>) -> Result<Self> {
        stop.validate()?;
        let (cap_u, horizon, remaining) = match stop {
            Stop::ByTime(t) => (Some(rate.cumulative_intensity(t)?), Some(t), None),
            Stop::ByCount(n) => (None, None, Some(n)),
        };
        Ok(InversionSampler {
            rate,
            cap_u,
            horizon,
            remaining,
            partial: Compensated::zero(),
            prev: S::zero(),
            done: false,
        })
    }

    /// Draws the next point, or `None` once the stop rule is reached.
    pub fn next_time<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<S>> {
        if self.done || self.remaining == Some(0) {
            return Ok(None);
        }
        self.partial.add(unit_exponential(rng));
        let u = self.partial.value();
        if let Some(cap) = self.cap_u {
            if u > cap {
                self.done = true;
                return Ok(None);
            }
        }
        let mut t = self.rate.inverse_cumulative_intensity(u)?;
        if t <= self.prev {
            // two partial sums rounded to the same time; nudge upward so
            // the strict-increase invariant survives float collisions
            t = self.prev + self.prev.abs() * S::epsilon() + S::min_positive_value();
        }
        if let Some(h) = self.horizon {
            if t > h {
                if self.prev >= h {
                    // a nudge at the horizon boundary cannot go above T
                    self.done = true;
                    return Ok(None);
                }
                t = h;
            }
        }
        self.prev = t;
        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        Ok(Some(t))
    }
}

/// Materializes the inversion sampler into a `PointProcessSample`.
pub fn sample_by_inversion<S: Real, R: Rng + ?Sized>(
    rate: &RateFunction<S>,
    stop: Stop<S>,
    rng: &mut R,
) -> Result<PointProcessSample<S>> {
    let mut sampler = InversionSampler::new(rate, stop)?;
    let mut times = match stop {
        Stop::ByCount(n) => Vec::with_capacity(n),
        Stop::ByTime(_) => Vec::new(),
    };
    while let Some(t) = sampler.next_time(rng)? {
        times.push(t);
    }
    Ok(PointProcessSample {
        times,
        horizon: stop,
        method: Method::Inversion,
    })
}

/// Number of interior grid points used to screen the majorant.
const MAJORANT_GRID: usize = 1024;

/// Thinning oracle on a window [a, b]: candidates from a homogeneous process
/// at the constant `majorant` rate, each kept with probability
/// lambda(t)/majorant. The majorant is screened against lambda on a
/// 1024-point grid over the window (the rate families here are monotone on
/// their support, so a grid check is decisive in practice).
pub fn sample_by_thinning<S: Real, R: Rng + ?Sized>(
    rate: &RateFunction<S>,
    window: (S, S),
    majorant: S,
    rng: &mut R,
) -> Result<PointProcessSample<S>> {
    let (a, b) = window;
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::domain(format!(
            "sample_by_thinning: window [{a}, {b}] must be finite and increasing"
        )));
    }
    if a < rate.support_edge() {
        return Err(Error::domain(format!(
            "sample_by_thinning: window start {a} precedes the support edge {} \
             (the rate is zero or undefined there)",
            rate.support_edge()
        )));
    }
    if !majorant.is_finite() || majorant <= S::zero() {
        return Err(Error::domain(format!(
            "sample_by_thinning: majorant must be positive, got {majorant}"
        )));
    }
    let grid_n = S::from_usize(MAJORANT_GRID).unwrap();
    for i in 0..=MAJORANT_GRID {
        let t = a + (b - a) * S::from_usize(i).unwrap() / grid_n;
        if rate.intensity(t) > majorant {
            return Err(Error::domain(format!(
                "sample_by_thinning: majorant {majorant} is below lambda({t}) = {}",
                rate.intensity(t)
            )));
        }
    }
    let mut times = Vec::new();
    let mut t = a;
    loop {
        t += unit_exponential::<S, _>(rng) / majorant;
        if t > b {
            break;
        }
        let u: S = S::sample_open01(rng);
        if u * majorant < rate.intensity(t) {
            times.push(t);
        }
    }
    Ok(PointProcessSample {
        times,
        horizon: Stop::ByTime(b),
        method: Method::Thinning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats;

    #[test]
    fn constant_rate_inversion_returns_exponential_partial_sums() {
        let rf = RateFunction::constant(1.0).unwrap();
        let sample =
            sample_by_inversion(&rf, Stop::ByCount(3), &mut rng::substream(7, 0)).unwrap();
        // with Lambda = identity the points are the partial sums themselves
        let mut r = rng::substream(7, 0);
        let mut acc = crate::scalar::Compensated::<f64>::zero();
        let mut expect = Vec::new();
        for _ in 0..3 {
            acc.add(rng::unit_exponential::<f64, _>(&mut r));
            expect.push(acc.value());
        }
        assert_eq!(sample.times, expect);
    }

    #[test]
    fn times_are_strictly_increasing_across_families() {
        let cases: Vec<(RateFunction<f64>, Stop<f64>)> = vec![
            (RateFunction::power_law(0.5).unwrap(), Stop::ByCount(500)),
            (RateFunction::power_law(1.0).unwrap(), Stop::ByCount(100)),
            (RateFunction::log_power(2.5).unwrap(), Stop::ByCount(300)),
            (RateFunction::constant(2.0).unwrap(), Stop::ByTime(50.0)),
            (RateFunction::power_law(0.3).unwrap(), Stop::ByTime(200.0)),
        ];
        for (i, (rf, stop)) in cases.into_iter().enumerate() {
            let s = sample_by_inversion(&rf, stop, &mut rng::substream(8, i as u64)).unwrap();
            assert!(!s.times.is_empty());
            for w in s.times.windows(2) {
                assert!(w[0] < w[1], "not strictly increasing under {stop:?}");
            }
            if let Stop::ByTime(t) = stop {
                assert!(*s.times.last().unwrap() <= t);
            }
            if let Stop::ByCount(n) = stop {
                assert_eq!(s.count(), n);
            }
        }
    }

    #[test]
    fn time_horizon_mean_count_matches_cumulative_intensity() {
        // Lambda(100) = 20 for the square-root-decay rate
        let rf = RateFunction::power_law(0.5).unwrap();
        let replicas = 2000;
        let mut total = 0usize;
        for r in 0..replicas {
            let s =
                sample_by_inversion(&rf, Stop::ByTime(100.0), &mut rng::substream(9, r)).unwrap();
            total += s.count();
        }
        let mean = total as f64 / replicas as f64;
        let tol = 4.0 * (20.0f64 / replicas as f64).sqrt();
        assert!((mean - 20.0).abs() <= tol, "mean {mean} vs 20 +- {tol}");
    }

    #[test]
    fn thinning_keeps_everything_when_rate_equals_majorant() {
        let rf = RateFunction::constant(1.0).unwrap();
        let replicas = 2000;
        let mut total = 0usize;
        for r in 0..replicas {
            let s =
                sample_by_thinning(&rf, (0.0, 10.0), 1.0, &mut rng::substream(10, r)).unwrap();
            for w in s.times.windows(2) {
                assert!(w[0] < w[1]);
            }
            total += s.count();
        }
        let mean = total as f64 / replicas as f64;
        let tol = 4.0 * (10.0f64 / replicas as f64).sqrt();
        assert!((mean - 10.0).abs() <= tol, "mean {mean} vs 10 +- {tol}");
    }

    #[test]
    fn thinning_rejects_bad_majorant_and_window() {
        let rf = RateFunction::power_law(0.5).unwrap();
        // lambda(1) = 1 > 0.5
        assert!(sample_by_thinning(&rf, (1.0, 100.0), 0.5, &mut rng::master(1)).is_err());
        let lp = RateFunction::log_power(2.0).unwrap();
        // window starts before the support edge e
        assert!(sample_by_thinning(&lp, (2.0, 10.0), 1.0, &mut rng::master(1)).is_err());
        assert!(sample_by_thinning(&rf, (5.0, 5.0), 1.0, &mut rng::master(1)).is_err());
        assert!(sample_by_thinning(&rf, (1.0, 2.0), 0.0, &mut rng::master(1)).is_err());
    }

    #[test]
    fn stop_validation() {
        let rf = RateFunction::<f64>::constant(1.0).unwrap();
        assert!(sample_by_inversion(&rf, Stop::ByCount(0), &mut rng::master(1)).is_err());
        assert!(
            sample_by_inversion(&rf, Stop::ByCount(MAX_COUNT + 1), &mut rng::master(1)).is_err()
        );
        assert!(sample_by_inversion(&rf, Stop::ByTime(-3.0), &mut rng::master(1)).is_err());
        assert!(sample_by_inversion(&rf, Stop::ByTime(f64::NAN), &mut rng::master(1)).is_err());
    }

    #[test]
    fn identical_seeds_reproduce_bitwise() {
        let rf = RateFunction::power_law(0.5).unwrap();
        let a = sample_by_inversion(&rf, Stop::ByTime(50.0), &mut rng::substream(42, 3)).unwrap();
        let b = sample_by_inversion(&rf, Stop::ByTime(50.0), &mut rng::substream(42, 3)).unwrap();
        assert_eq!(a.times, b.times);
        let c = sample_by_inversion(&rf, Stop::ByTime(50.0), &mut rng::substream(42, 4)).unwrap();
        assert_ne!(a.times, c.times);
    }

    #[test]
    fn inversion_and_thinning_agree_statistically() {
        // restrict both methods to the window [1, 100] where the square-root
        // rate is bounded by lambda(1) = 1, then compare counts and first
        // points across replicas
        let rf = RateFunction::power_law(0.5).unwrap();
        let replicas = 2000u64;
        let mut counts_inv = Vec::new();
        let mut counts_thin = Vec::new();
        let mut first_inv = Vec::new();
        let mut first_thin = Vec::new();
        for r in 0..replicas {
            let inv =
                sample_by_inversion(&rf, Stop::ByTime(100.0), &mut rng::substream(900, r))
                    .unwrap();
            let in_window: Vec<f64> =
                inv.times.iter().copied().filter(|&t| t >= 1.0).collect();
            counts_inv.push(in_window.len() as u64);
            if let Some(&f) = in_window.first() {
                first_inv.push(f);
            }
            let thin =
                sample_by_thinning(&rf, (1.0, 100.0), 1.0, &mut rng::substream(901, r)).unwrap();
            counts_thin.push(thin.count() as u64);
            if let Some(&f) = thin.times.first() {
                first_thin.push(f);
            }
        }
        let ks = stats::ks_two_sample(&first_inv, &first_thin).unwrap();
        assert!(ks.p_value > 1e-3, "first-point KS: {ks:?}");

        let max = *counts_inv
            .iter()
            .chain(&counts_thin)
            .max()
            .unwrap() as usize;
        let mut h1 = vec![0u64; max + 1];
        let mut h2 = vec![0u64; max + 1];
        for &c in &counts_inv {
            h1[c as usize] += 1;
        }
        for &c in &counts_thin {
            h2[c as usize] += 1;
        }
        let chi = stats::chi2_two_sample(&h1, &h2, 10.0).unwrap();
        assert!(chi.p_value > 1e-3, "count chi-square: {chi:?}");
    }
}
