//! Turns trajectories into the statistics the verification suites assert
//! on: recurrence-region hits in continuous time, ring occupancy of the
//! planar embedded walk, the empirical concentration function, inter-turn
//! gap records, and envelope violation rates for the turn times.

use crate::directions::projection_length;
use crate::error::{Error, Result};
use crate::geometry;
use crate::rates::{envelope_constants, RateFunction, RateKind};
use crate::rng::unit_exponential;
use crate::scalar::{Compensated, Real};
use crate::stats::{self, OlsFit};
use crate::walk::Trajectory;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which recurrence region hits are detected against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// The box [-rho, rho]^d in the walk's full dimension.
    Box,
    /// The disc of radius rho around the origin in the plane of the first
    /// two coordinates.
    PlanarDisc,
}

/// Continuous-time hit record of one trajectory against one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport<S> {
    pub rho: S,
    pub region: Region,
    /// Turn indices n whose segment [tau_n, tau_{n+1}] (or the trailing
    /// partial segment) touches the region; sorted.
    pub hit_intervals: Vec<usize>,
    /// Largest hit interval, if any.
    pub last_hit_turn: Option<usize>,
    /// (checkpoint turn c, minimal distance to the origin over the rest of
    /// the simulated window), at power-of-two checkpoints. Stored as pairs:
    /// JSON object keys would have to be strings.
    pub min_distance_after: Vec<(usize, S)>,
}

/// Empirical concentration function value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConcentrationEstimate<S> {
    pub a: S,
    pub q_hat: S,
    pub sample_size: usize,
}

/// Scans every segment of the trajectory (including the trailing partial
/// one on time-stopped builds) against the region and records hits, plus
/// the minimum origin distance beyond each power-of-two checkpoint. For
/// `PlanarDisc` both the test and the distances use the first two
/// coordinates; for `Box` they use all of them.
pub fn detect_hits<S: Real>(
    tr: &Trajectory<S>,
    rho: S,
    region: Region,
) -> Result<RecurrenceReport<S>> {
    if !rho.is_finite() || rho <= S::zero() {
        return Err(Error::domain(format!(
            "detect_hits: region size must be positive, got {rho}"
        )));
    }
    if region == Region::PlanarDisc && tr.dimension() < 2 {
        return Err(Error::domain(
            "detect_hits: a planar disc region needs dimension at least 2",
        ));
    }
    let mut hit_intervals = Vec::new();
    let mut seg_min = Vec::with_capacity(tr.turn_count() + 1);
    let mut scan_err = None;
    tr.for_each_segment(|seg| {
        if scan_err.is_some() {
            return;
        }
        let (p0, p1) = match region {
            Region::Box => (seg.p0, seg.p1),
            Region::PlanarDisc => (&seg.p0[..2], &seg.p1[..2]),
        };
        let hit = match region {
            Region::Box => geometry::segment_hits_box(p0, p1, rho),
            Region::PlanarDisc => geometry::segment_hits_disc(p0, p1, rho),
        };
        match hit {
            Ok(true) => hit_intervals.push(seg.index),
            Ok(false) => {}
            Err(e) => {
                scan_err = Some(e);
                return;
            }
        }
        match geometry::segment_min_distance(p0, p1) {
            Ok(d) => seg_min.push(d),
            Err(e) => scan_err = Some(e),
        }
    });
    if let Some(e) = scan_err {
        return Err(e);
    }

    // suffix minima over segments, seeded with the distance of the final
    // simulated point (the "rest of the window" at the last checkpoint)
    let n = tr.turn_count();
    let final_point = tr.position_at(tr.horizon())?;
    let final_coords = match region {
        Region::Box => &final_point[..],
        Region::PlanarDisc => &final_point[..2],
    };
    let mut suffix = final_coords
        .iter()
        .map(|&c| c * c)
        .sum::<S>()
        .sqrt();
    let mut suffix_min = vec![suffix; seg_min.len() + 1];
    for (k, &m) in seg_min.iter().enumerate().rev() {
        suffix = suffix.min(m);
        suffix_min[k] = suffix;
    }
    let mut min_distance_after = Vec::new();
    let mut c = 1usize;
    while c <= n {
        min_distance_after.push((c, suffix_min[c.min(suffix_min.len() - 1)]));
        c *= 2;
    }
    Ok(RecurrenceReport {
        rho,
        region,
        last_hit_turn: hit_intervals.last().copied(),
        hit_intervals,
        min_distance_after,
    })
}

/// Ring index of the planar projection of the embedded position W_n.
pub fn ring_occupancy<S: Real>(tr: &Trajectory<S>, n: usize) -> Result<u64> {
    if tr.dimension() < 2 {
        return Err(Error::domain(
            "ring_occupancy: rings are planar; need dimension at least 2",
        ));
    }
    if n > tr.turn_count() {
        return Err(Error::range(format!(
            "ring_occupancy: turn {n} beyond the simulated {} turns",
            tr.turn_count()
        )));
    }
    Ok(geometry::ring_index(&tr.position(n)[..2]))
}

/// Exact empirical concentration function: the largest fraction of samples
/// any closed window [x, x+a] can hold, by sort and two-pointer sweep (an
/// optimal window can always slide its left edge onto a sample). Estimates
/// are meaningful from roughly a thousand samples up.
pub fn concentration_function<S: Real>(samples: &[S], a: S) -> Result<ConcentrationEstimate<S>> {
    if samples.is_empty() {
        return Err(Error::domain("concentration_function: no samples"));
    }
    if !a.is_finite() || a <= S::zero() {
        return Err(Error::domain(format!(
            "concentration_function: window width must be positive, got {a}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|p, q| p.partial_cmp(q).expect("samples must not contain NaN"));
    let m = sorted.len();
    let mut best = 0usize;
    let mut j = 0usize;
    for i in 0..m {
        if j < i {
            j = i;
        }
        while j < m && sorted[j] <= sorted[i] + a {
            j += 1;
        }
        best = best.max(j - i);
    }
    Ok(ConcentrationEstimate {
        a,
        q_hat: S::from_usize(best).unwrap() / S::from_usize(m).unwrap(),
        sample_size: m,
    })
}

/// Inter-turn gaps (n, tau_{n+1} - tau_n) for n = 0..turn_count-1; n indexes
/// the turn opening the gap, with tau_0 = 0.
pub fn gap_statistics<S: Real>(tr: &Trajectory<S>) -> Result<Vec<(usize, S)>> {
    if tr.turn_count() < 2 {
        return Err(Error::domain(
            "gap_statistics: need at least 2 turns for gap records",
        ));
    }
    Ok(tr
        .turn_times()
        .windows(2)
        .enumerate()
        .map(|(n, w)| (n, w[1] - w[0]))
        .collect())
}

/// Fraction of replicas whose k-th point lands below c0 k^{1/(1-alpha)} and
/// above c1 k^{1/(1-alpha)}. Only the polynomial rate family with alpha < 1
/// has these envelopes. One inversion per replica: tau_k = Lambda^{-1}(S_k)
/// with S_k the sum of k unit exponentials, drawn sequentially from `rng`.
/// Rates are meaningful for k of at least ~50 and a thousand replicas or
/// more; smaller runs are legal but noisy.
pub fn envelope_violation_rate<S: Real, R: Rng + ?Sized>(
    rate: &RateFunction<S>,
    k: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let alpha = match *rate.kind() {
        RateKind::PowerLaw { alpha } if alpha < S::one() => alpha,
        _ => {
            return Err(Error::domain(
                "envelope_violation_rate: envelopes exist only for the polynomial \
                 rate family with alpha < 1",
            ))
        }
    };
    if k == 0 || replicas == 0 {
        return Err(Error::domain(
            "envelope_violation_rate: k and replicas must be positive",
        ));
    }
    let (c0, c1) = envelope_constants(alpha)?;
    let exponent = (S::one() - alpha).recip();
    let kf = S::from_usize(k).unwrap();
    let low_edge = c0 * kf.powf(exponent);
    let high_edge = c1 * kf.powf(exponent);
    let mut low = 0usize;
    let mut high = 0usize;
    for _ in 0..replicas {
        let mut partial = Compensated::<S>::zero();
        for _ in 0..k {
            partial.add(unit_exponential(rng));
        }
        let tau_k = rate.inverse_cumulative_intensity(partial.value())?;
        if tau_k <= low_edge {
            low += 1;
        }
        if tau_k >= high_edge {
            high += 1;
        }
    }
    Ok((
        low as f64 / replicas as f64,
        high as f64 / replicas as f64,
    ))
}

/// Least-squares slope of ln(y) against ln(x), for decay-rate readouts.
/// Requires at least 4 positive points.
pub fn fit_decay_slope(points: &[(f64, f64)]) -> Result<OlsFit> {
    if points.len() < 4 {
        return Err(Error::domain(format!(
            "fit_decay_slope: need at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::domain(
            "fit_decay_slope: log-log fit needs strictly positive coordinates",
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    stats::ols_fit(&xs, &ys)
}

/// Planar projection lengths of every stored direction row.
pub fn projection_lengths<S: Real>(tr: &Trajectory<S>) -> Result<Vec<S>> {
    (0..tr.direction_count())
        .map(|k| projection_length(tr.direction(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::{DirectionLaw, DirectionModel};
    use crate::ppp::Stop;
    use crate::rng;
    use crate::walk::build_trajectory;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn zigzag_d1() -> Trajectory<f64> {
        // W = (0, 1, -1): out to 1, then across the origin to -1
        Trajectory::from_parts(
            DirectionLaw::Orthogonal,
            1,
            vec![1.0, 3.0],
            vec![1.0, -1.0],
            None,
        )
        .unwrap()
    }

    #[test]
    fn hits_on_the_zigzag_walk() {
        let report = detect_hits(&zigzag_d1(), 0.5, Region::Box).unwrap();
        // interval 0 starts inside the box, interval 1 crosses it
        assert_eq!(report.hit_intervals, vec![0, 1]);
        assert_eq!(report.last_hit_turn, Some(1));
    }

    #[test]
    fn planar_disc_ignores_off_plane_motion() {
        // straight climb along e3: planar shadow sits at the origin forever
        let tr = Trajectory::from_parts(
            DirectionLaw::Orthogonal,
            3,
            vec![1.0, 2.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            None,
        )
        .unwrap();
        let disc = detect_hits(&tr, 0.5, Region::PlanarDisc).unwrap();
        assert_eq!(disc.hit_intervals, vec![0, 1]);
        let boxed = detect_hits(&tr, 0.5, Region::Box).unwrap();
        assert_eq!(boxed.hit_intervals, vec![0]);
    }

    #[test]
    fn detect_hits_domain_errors() {
        assert!(detect_hits(&zigzag_d1(), 0.0, Region::Box).is_err());
        assert!(detect_hits(&zigzag_d1(), 1.0, Region::PlanarDisc).is_err());
    }

    #[test]
    fn outward_ray_never_reenters() {
        // straight outward ray in d = 2 over eight turns
        let times: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let dirs: Vec<f64> = (0..8).flat_map(|_| [1.0, 0.0]).collect();
        let tr =
            Trajectory::from_parts(DirectionLaw::Orthogonal, 2, times, dirs, None).unwrap();
        // rho below 1 so the first turn point sits strictly outside the
        // closed box and later segments cannot graze its boundary
        let report = detect_hits(&tr, 0.75, Region::Box).unwrap();
        assert_eq!(report.hit_intervals, vec![0]);
        assert_eq!(report.last_hit_turn, Some(0));
        // distances after checkpoints 1, 2, 4, 8 are the checkpoint positions
        assert_eq!(
            report.min_distance_after,
            vec![(1, 1.0), (2, 2.0), (4, 4.0), (8, 8.0)]
        );
    }

    #[test]
    fn ring_occupancy_cases() {
        let tr = Trajectory::from_parts(
            DirectionLaw::Orthogonal,
            2,
            vec![7.2],
            vec![1.0, 0.0],
            None,
        )
        .unwrap();
        assert_eq!(ring_occupancy(&tr, 0).unwrap(), 0);
        assert_eq!(ring_occupancy(&tr, 1).unwrap(), 7);
        assert!(matches!(
            ring_occupancy(&tr, 2),
            Err(Error::Range(_))
        ));
        assert!(ring_occupancy(&zigzag_d1(), 0).is_err());
    }

    #[test]
    fn concentration_edge_cases() {
        let same = vec![3.25f64; 2000];
        assert_eq!(concentration_function(&same, 0.1).unwrap().q_hat, 1.0);

        let grid: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        let est = concentration_function(&grid, 0.5).unwrap();
        assert_relative_eq!(est.q_hat, 1e-3, max_relative = 1e-12);
        assert_eq!(est.sample_size, 1000);

        let empty: &[f64] = &[];
        assert!(concentration_function(empty, 0.5).is_err());
        assert!(concentration_function(&grid, 0.0).is_err());
    }

    #[test]
    fn concentration_matches_normal_law() {
        // true window mass of a standard normal at width 0.1 is
        // 2 Phi(0.05) - 1, about 0.0399
        let mut r = rng::master(31);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| rng::standard_normal::<f64, _>(&mut r))
            .collect();
        let est = concentration_function(&samples, 0.1).unwrap();
        assert!(
            est.q_hat >= 0.035 && est.q_hat <= 0.045,
            "q_hat = {}",
            est.q_hat
        );
    }

    #[test]
    fn gap_records_are_indexed_time_differences() {
        let tr = zigzag_d1();
        let gaps = gap_statistics(&tr).unwrap();
        assert_eq!(gaps, vec![(0, 1.0), (1, 2.0)]);

        let single = Trajectory::<f64>::from_parts(
            DirectionLaw::Orthogonal,
            1,
            vec![1.0],
            vec![1.0],
            None,
        )
        .unwrap();
        assert!(gap_statistics(&single).is_err());
    }

    #[test]
    fn constant_rate_gaps_pool_to_unit_mean() {
        let rate = RateFunction::constant(1.0).unwrap();
        let model = DirectionModel::orthogonal(1).unwrap();
        let mut pooled = Vec::new();
        for r in 0..2000u64 {
            let tr =
                build_trajectory(&rate, &model, Stop::ByCount(50), &mut rng::substream(32, r))
                    .unwrap();
            pooled.extend(gap_statistics(&tr).unwrap().into_iter().map(|(_, g)| g));
        }
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        // exponential sd is 1, so 4 se of the pooled mean
        let tol = 4.0 / (pooled.len() as f64).sqrt();
        assert!((mean - 1.0).abs() <= tol, "pooled gap mean {mean}");
    }

    #[test]
    fn envelope_rates_stay_under_theoretical_bounds() {
        let rate = RateFunction::power_law(0.5).unwrap();
        let k = 200;
        let replicas = 2000;
        let (low, high) =
            envelope_violation_rate(&rate, k, replicas, &mut rng::substream(33, 0)).unwrap();
        let low_bound = 2.0 * (-(k as f64) / 18.0).exp();
        let high_bound = 2.0 * (-(k as f64) / 6.0).exp();
        let se_low = stats::binomial_se(low_bound.max(1e-12), replicas);
        let se_high = stats::binomial_se(high_bound.max(1e-12), replicas);
        assert!(low <= low_bound + 4.0 * se_low, "low rate {low}");
        assert!(high <= high_bound + 4.0 * se_high, "high rate {high}");
        assert!(low + high <= 1.0);
    }

    #[test]
    fn envelope_rate_rejects_other_families() {
        let constant = RateFunction::constant(1.0).unwrap();
        assert!(envelope_violation_rate(&constant, 100, 10, &mut rng::master(1)).is_err());
        let log_rate = RateFunction::power_law(1.0).unwrap();
        assert!(envelope_violation_rate(&log_rate, 100, 10, &mut rng::master(1)).is_err());
    }

    #[test]
    fn decay_slope_recovers_exact_power() {
        let points: Vec<(f64, f64)> = [64.0, 256.0, 1024.0, 4096.0]
            .iter()
            .map(|&n: &f64| (n, 3.0 * n.powf(-1.5)))
            .collect();
        let fit = fit_decay_slope(&points).unwrap();
        assert_relative_eq!(fit.slope, -1.5, max_relative = 1e-12);
        assert!(fit_decay_slope(&points[..3]).is_err());
        assert!(fit_decay_slope(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.0), (4.0, 0.1)]).is_err());
    }

    proptest! {
        #[test]
        fn prop_concentration_monotone_in_window(
            seed in 0u64..1000,
            a1 in 0.01f64..1.0,
            extra in 0.0f64..2.0,
        ) {
            let mut r = rng::master(seed);
            let samples: Vec<f64> = (0..1500)
                .map(|_| rng::standard_normal::<f64, _>(&mut r))
                .collect();
            let narrow = concentration_function(&samples, a1).unwrap();
            let wide = concentration_function(&samples, a1 + extra).unwrap();
            prop_assert!(narrow.q_hat <= wide.q_hat);
        }
    }
}
