//! Named check suites behind `randflight verify`: every check runs from a
//! fixed substream, reports one (name, statistic, threshold) row, and the
//! suite passes iff every row does. Quick mode divides Monte Carlo effort
//! by ten; thresholds built from standard errors are recomputed from the
//! reduced counts, so quick runs stay calibrated, just less powerful.

use crate::analysis;
use crate::directions::DirectionModel;
use crate::error::{Error, Result};
use crate::geometry;
use crate::mathkit;
use crate::ppp::{self, Stop};
use crate::quad;
use crate::rates::{envelope_constants, RateFunction};
use crate::rng;
use crate::stats;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

/// One row of a verification report.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Which module's checks to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Rates,
    Ppp,
    Directions,
    Geometry,
    Mathkit,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Rates => "rates",
            Suite::Ppp => "ppp",
            Suite::Directions => "directions",
            Suite::Geometry => "geometry",
            Suite::Mathkit => "mathkit",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rates" => Ok(Suite::Rates),
            "ppp" => Ok(Suite::Ppp),
            "directions" => Ok(Suite::Directions),
            "geometry" => Ok(Suite::Geometry),
            "mathkit" => Ok(Suite::Mathkit),
            "all" => Ok(Suite::All),
            other => Err(Error::config(
                "suite",
                format!("unknown suite '{other}'; pick rates, ppp, directions, geometry, mathkit, or all"),
            )),
        }
    }
}

/// Full result of one suite run.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// Plain-text table, one row per check plus a verdict line.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<52} {:>13} {:>13} {:>6}\n",
            "check", "statistic", "threshold", "result"
        );
        for r in &self.results {
            out += &format!(
                "{:<52} {:>13.4e} {:>13.4e} {:>6}\n",
                r.name,
                r.statistic,
                r.threshold,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        let passed = self.results.iter().filter(|r| r.pass).count();
        out += &format!(
            "suite {}: {} ({passed}/{} checks)\n",
            self.suite,
            if self.all_pass() { "PASS" } else { "FAIL" },
            self.results.len()
        );
        out
    }
}

struct Checker {
    results: Vec<CheckResult>,
}

impl Checker {
    fn push(&mut self, name: &str, statistic: f64, threshold: f64, pass: bool) {
        self.results.push(CheckResult {
            name: name.to_string(),
            statistic,
            threshold,
            pass,
        });
    }

    fn leq(&mut self, name: &str, statistic: f64, threshold: f64) {
        self.push(name, statistic, threshold, statistic <= threshold);
    }

    fn geq(&mut self, name: &str, statistic: f64, threshold: f64) {
        self.push(name, statistic, threshold, statistic >= threshold);
    }
}

fn scaled(full: usize, quick: bool) -> usize {
    if quick {
        (full / 10).max(100)
    } else {
        full
    }
}

/// Runs one suite and returns its report; errors mean a check could not be
/// set up, not that a check failed.
pub fn run_suite(suite: Suite, quick: bool) -> Result<SuiteReport> {
    let mut c = Checker {
        results: Vec::new(),
    };
    match suite {
        Suite::Rates => rates_checks(&mut c)?,
        Suite::Ppp => ppp_checks(&mut c, quick)?,
        Suite::Directions => directions_checks(&mut c, quick)?,
        Suite::Geometry => geometry_checks(&mut c, quick)?,
        Suite::Mathkit => mathkit_checks(&mut c, quick)?,
        Suite::All => {
            rates_checks(&mut c)?;
            ppp_checks(&mut c, quick)?;
            directions_checks(&mut c, quick)?;
            geometry_checks(&mut c, quick)?;
            mathkit_checks(&mut c, quick)?;
        }
    }
    Ok(SuiteReport {
        suite,
        results: c.results,
    })
}

fn rates_checks(c: &mut Checker) -> Result<()> {
    let half = RateFunction::<f64>::power_law(0.5)?;
    c.leq(
        "rates/powerlaw_cumulative_closed_form",
        (half.cumulative_intensity(100.0)? - 20.0).abs(),
        1e-10,
    );

    let mut worst = 0.0f64;
    for &alpha in &[0.3, 0.7] {
        let rf = RateFunction::<f64>::power_law(alpha)?;
        for i in 0..=40 {
            let u = 10f64.powf(-2.0 + 6.0 * i as f64 / 40.0);
            let t = rf.inverse_cumulative_intensity(u)?;
            worst = worst.max((rf.cumulative_intensity(t)? - u).abs() / u.max(1.0));
        }
    }
    c.leq("rates/powerlaw_roundtrip_relative", worst, 1e-9);

    // dual route for the slow family: panel table against adaptive Simpson
    let lp2 = RateFunction::<f64>::log_power(2.0)?;
    let table = lp2.cumulative_intensity(E * E)?;
    let simpson = quad::adaptive_simpson(|t: f64| t.ln().powf(-2.0), E, E * E, 1e-12, 1e-12)?;
    c.leq(
        "rates/slow_family_cumulative_vs_quadrature",
        (table - simpson).abs(),
        1e-8,
    );

    let lp = RateFunction::<f64>::log_power(2.5)?;
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let u = 10f64.powf(-2.0 + 6.0 * i as f64 / 40.0);
        let t = lp.inverse_cumulative_intensity(u)?;
        worst = worst.max((lp.cumulative_intensity(t)? - u).abs() / u.max(1.0));
    }
    c.leq("rates/slow_family_roundtrip_relative", worst, 1e-9);

    let critical = RateFunction::<f64>::power_law(1.0)?;
    c.leq(
        "rates/critical_exponent_log_cumulative",
        (critical.cumulative_intensity(1e6)? - 1e6f64.ln()).abs(),
        1e-12,
    );

    // Lambda(T) (ln T)^beta / T approaches 1 from above; at T = 1e10 it
    // must already sit inside [0.9, 1.3]
    let ratio = lp.cumulative_intensity(1e10)? * 1e10f64.ln().powf(2.5) / 1e10;
    c.leq("rates/slow_family_growth_ratio", (ratio - 1.1).abs(), 0.2);

    let (c0, c1) = envelope_constants(0.5f64)?;
    c.leq(
        "rates/envelope_constants_alpha_half",
        (c0 - 1.0 / 9.0).abs().max((c1 - 1.0).abs()),
        1e-12,
    );
    Ok(())
}

fn ppp_checks(c: &mut Checker, quick: bool) -> Result<()> {
    let rf = RateFunction::<f64>::power_law(0.5)?;

    let reps = scaled(5000, quick);
    let mut counts = Vec::with_capacity(reps);
    for r in 0..reps {
        let s = ppp::sample_by_inversion(&rf, Stop::ByTime(100.0), &mut rng::substream(2001, r as u64))?;
        counts.push(s.count() as u64);
    }
    let mean = counts.iter().sum::<u64>() as f64 / reps as f64;
    c.leq(
        "ppp/count_mean_matches_cumulative_rate",
        (mean - 20.0).abs(),
        4.0 * (20.0 / reps as f64).sqrt(),
    );
    let gof = stats::chi2_gof_poisson(&counts, 20.0, 5.0)?;
    c.geq("ppp/count_distribution_poisson_gof", gof.p_value, 1e-3);

    // the two sampling routes must agree on the window [1, 100]
    let reps = scaled(2000, quick);
    let mut inv_first = Vec::new();
    let mut thin_first = Vec::new();
    let mut inv_counts = Vec::new();
    let mut thin_counts = Vec::new();
    for r in 0..reps {
        let inv = ppp::sample_by_inversion(&rf, Stop::ByTime(100.0), &mut rng::substream(2002, r as u64))?;
        let in_window: Vec<f64> = inv.times.into_iter().filter(|&t| t >= 1.0).collect();
        inv_counts.push(in_window.len() as u64);
        if let Some(&t) = in_window.first() {
            inv_first.push(t);
        }
        let thin = ppp::sample_by_thinning(&rf, (1.0, 100.0), 1.0, &mut rng::substream(2003, r as u64))?;
        thin_counts.push(thin.count() as u64);
        if let Some(&t) = thin.times.first() {
            thin_first.push(t);
        }
    }
    let ks = stats::ks_two_sample(&inv_first, &thin_first)?;
    c.geq("ppp/inversion_vs_thinning_first_point_ks", ks.p_value, 1e-3);
    let counts_cmp = stats::chi2_two_sample(&inv_counts, &thin_counts, 5.0)?;
    c.geq("ppp/inversion_vs_thinning_count_chi2", counts_cmp.p_value, 1e-3);

    // same cross-check for the slow family on [e, 1000]
    let lp = RateFunction::<f64>::log_power(2.5)?;
    let reps = scaled(2000, quick);
    let mut lp_inv = Vec::with_capacity(reps);
    let mut lp_thin = Vec::with_capacity(reps);
    for r in 0..reps {
        let inv = ppp::sample_by_inversion(&lp, Stop::ByTime(1000.0), &mut rng::substream(2004, r as u64))?;
        lp_inv.push(inv.count() as u64);
        let thin = ppp::sample_by_thinning(&lp, (E, 1000.0), 1.0, &mut rng::substream(2005, r as u64))?;
        lp_thin.push(thin.count() as u64);
    }
    let lp_cmp = stats::chi2_two_sample(&lp_inv, &lp_thin, 5.0)?;
    c.geq("ppp/slow_family_window_count_chi2", lp_cmp.p_value, 1e-3);

    // turn-time envelopes at k = 200
    let k = 200usize;
    let reps = scaled(10_000, quick);
    let (low, high) = analysis::envelope_violation_rate(&rf, k, reps, &mut rng::substream(2006, 0))?;
    let low_bound = 2.0 * (-(k as f64) / 18.0).exp();
    let high_bound = 2.0 * (-(k as f64) / 6.0).exp();
    c.leq(
        "ppp/turn_time_lower_envelope_rate",
        low,
        low_bound + 4.0 * stats::binomial_se(low_bound.min(1.0), reps),
    );
    c.leq(
        "ppp/turn_time_upper_envelope_rate",
        high,
        high_bound + 4.0 * stats::binomial_se(high_bound.min(1.0), reps),
    );

    // identical substreams must reproduce bitwise
    let a = ppp::sample_by_inversion(&rf, Stop::ByCount(100), &mut rng::substream(2007, 5))?;
    let b = ppp::sample_by_inversion(&rf, Stop::ByCount(100), &mut rng::substream(2007, 5))?;
    let max_diff = a
        .times
        .iter()
        .zip(&b.times)
        .map(|(x, y)| (x - y).abs())
        .fold((a.count() != b.count()) as u8 as f64, f64::max);
    c.leq("ppp/substream_determinism", max_diff, 0.0);
    Ok(())
}

fn directions_checks(c: &mut Checker, quick: bool) -> Result<()> {
    // axis pick frequencies, d = 3
    let model = DirectionModel::orthogonal(3)?;
    let n = scaled(60_000, quick);
    let mut counts = [0usize; 6];
    let mut r = rng::substream(3001, 0);
    let mut buf = [0.0f64; 3];
    for _ in 0..n {
        model.sample_into(&mut r, &mut buf);
        for (j, &v) in buf.iter().enumerate() {
            if v == 1.0 {
                counts[2 * j] += 1;
            } else if v == -1.0 {
                counts[2 * j + 1] += 1;
            }
        }
    }
    let p = 1.0 / 6.0;
    let worst = counts
        .iter()
        .map(|&k| (k as f64 / n as f64 - p).abs())
        .fold(0.0, f64::max);
    c.leq(
        "directions/axis_frequencies_uniform",
        worst,
        4.0 * stats::binomial_se(p, n),
    );

    // unit norms across dimensions
    let mut worst = 0.0f64;
    for &d in &[2usize, 3, 6] {
        let m = DirectionModel::sphere(d)?;
        let mut r = rng::substream(3002, d as u64);
        for _ in 0..1000 {
            let v = m.sample::<f64, _>(&mut r);
            let norm = v.coords().iter().map(|&x| x * x).sum::<f64>().sqrt();
            worst = worst.max((norm - 1.0).abs());
        }
    }
    c.leq("directions/sphere_norm_unit", worst, 1e-12);

    // planar projection exceedance law on a (d, gamma) grid; statistic is
    // the worst deviation beyond its own 4 standard errors
    let n = scaled(200_000, quick);
    let mut worst_excess = f64::MIN;
    for &d in &[3usize, 4, 6] {
        let m = DirectionModel::sphere(d)?;
        let mut r = rng::substream(3003, d as u64);
        let mut hits = [0usize; 2];
        for _ in 0..n {
            let v = m.sample::<f64, _>(&mut r);
            let l = v.projection_length()?;
            if l >= 0.3 {
                hits[0] += 1;
            }
            if l >= 0.6 {
                hits[1] += 1;
            }
        }
        for (hi, &gamma) in [0.3f64, 0.6].iter().enumerate() {
            let target = mathkit::sphere_projection_law(d, gamma)?;
            let dev = (hits[hi] as f64 / n as f64 - target).abs();
            worst_excess = worst_excess.max(dev - 4.0 * stats::binomial_se(target, n));
        }
    }
    c.leq("directions/projection_exceedance_law_grid", worst_excess, 0.0);

    // exceedance probability decays with dimension (gamma fixed at 0.5)
    let n = scaled(50_000, quick);
    let mut prev: Option<(f64, f64)> = None;
    let mut worst_rise = f64::MIN;
    for d in 3..=8usize {
        let m = DirectionModel::sphere(d)?;
        let mut r = rng::substream(3004, d as u64);
        let mut hit = 0usize;
        for _ in 0..n {
            let v = m.sample::<f64, _>(&mut r);
            if v.projection_length()? >= 0.5 {
                hit += 1;
            }
        }
        let p = hit as f64 / n as f64;
        let se = stats::binomial_se(p.max(0.01), n);
        if let Some((pp, pse)) = prev {
            worst_rise = worst_rise.max(p - pp - 2.0 * (se * se + pse * pse).sqrt());
        }
        prev = Some((p, se));
    }
    c.leq("directions/projection_decays_with_dimension", worst_rise, 0.0);

    // coordinate second moments on the sphere, d = 4: E f_i^2 = 1/4 and
    // Var(f_i^2) = 1/16 there, so se = 0.25/sqrt(n)
    let n = scaled(100_000, quick);
    let m = DirectionModel::sphere(4)?;
    let mut r = rng::substream(3005, 0);
    let mut sums = [0.0f64; 4];
    for _ in 0..n {
        let v = m.sample::<f64, _>(&mut r);
        for (s, &x) in sums.iter_mut().zip(v.coords()) {
            *s += x * x;
        }
    }
    let worst = sums
        .iter()
        .map(|&s| (s / n as f64 - 0.25).abs())
        .fold(0.0, f64::max);
    c.leq(
        "directions/sphere_coordinate_moments",
        worst,
        4.0 * 0.25 / (n as f64).sqrt(),
    );

    // planar sampling route (uniform angle) against the gaussian route
    let n = scaled(20_000, quick);
    let m2 = DirectionModel::sphere(2)?;
    let mut r = rng::substream(3006, 0);
    let mut angle_route = Vec::with_capacity(n);
    let mut gauss_route = Vec::with_capacity(n);
    for _ in 0..n {
        let v = m2.sample::<f64, _>(&mut r);
        angle_route.push(v.coords()[1].atan2(v.coords()[0]));
        let w = crate::directions::sample_sphere_via_gaussians::<f64, _>(2, &mut r)?;
        gauss_route.push(w.coords()[1].atan2(w.coords()[0]));
    }
    let ks = stats::ks_two_sample(&angle_route, &gauss_route)?;
    c.geq("directions/planar_angle_vs_gaussian_ks", ks.p_value, 1e-3);
    Ok(())
}

fn geometry_checks(c: &mut Checker, quick: bool) -> Result<()> {
    // clipping against the point-sampling oracle: a sampled hit is a real
    // hit, so the fast test may never miss one
    let segments = scaled(20_000, quick);
    let mut r = rng::substream(4001, 0);
    let mut missed = 0usize;
    for _ in 0..segments {
        let d = r.gen_range(2..=4usize);
        let rho = 0.2 + 1.8 * r.gen::<f64>();
        let p: Vec<f64> = (0..d).map(|_| 6.0 * (r.gen::<f64>() - 0.5)).collect();
        let q: Vec<f64> = (0..d).map(|_| 6.0 * (r.gen::<f64>() - 0.5)).collect();
        if geometry::segment_hits_box_oracle(&p, &q, rho, 500) && !geometry::segment_hits_box(&p, &q, rho)? {
            missed += 1;
        }
    }
    c.leq("geometry/box_clip_never_misses_oracle_hit", missed as f64, 0.0);

    // disc test is rotation invariant away from the boundary
    let trials = scaled(20_000, quick);
    let mut r = rng::substream(4002, 0);
    let mut mismatches = 0usize;
    for _ in 0..trials {
        let rho = 0.2 + 1.3 * r.gen::<f64>();
        let p = [4.0 * (r.gen::<f64>() - 0.5), 4.0 * (r.gen::<f64>() - 0.5)];
        let q = [4.0 * (r.gen::<f64>() - 0.5), 4.0 * (r.gen::<f64>() - 0.5)];
        if (geometry::segment_min_distance(&p, &q)? - rho).abs() < 1e-6 {
            continue; // skip knife-edge cases, rotation may flip them
        }
        let theta = std::f64::consts::TAU * r.gen::<f64>();
        let (s, co) = theta.sin_cos();
        let rot = |v: &[f64; 2]| [co * v[0] - s * v[1], s * v[0] + co * v[1]];
        if geometry::segment_hits_disc(&p, &q, rho)?
            != geometry::segment_hits_disc(&rot(&p), &rot(&q), rho)?
        {
            mismatches += 1;
        }
    }
    c.leq("geometry/disc_rotation_invariance", mismatches as f64, 0.0);

    // chord frequency of rays at the unit disc from distance r
    let n = scaled(200_000, quick);
    let mut worst_dev = f64::MIN;
    let mut worst_excess = f64::MIN;
    for &dist in &[1.5f64, 2.0, 5.0] {
        let origin = [dist, 0.0];
        let mut r = rng::substream(4003, dist as u64);
        let mut hit = 0usize;
        for _ in 0..n {
            let angle = std::f64::consts::TAU * (r.gen::<f64>() - 0.5);
            if geometry::ray_hits_disc(&origin, angle)? {
                hit += 1;
            }
        }
        let freq = hit as f64 / n as f64;
        let target = mathkit::ray_hit_probability(dist)?;
        let se = stats::binomial_se(target, n);
        worst_dev = worst_dev.max((freq - target).abs() - 4.0 * se);
        worst_excess = worst_excess.max(freq - 0.5 / dist - 4.0 * se);
    }
    c.leq("geometry/ray_hit_matches_arcsine_law", worst_dev, 0.0);
    c.leq("geometry/ray_hit_below_half_over_r", worst_excess, 0.0);

    // rings partition the plane by integer radius
    let pts = scaled(100_000, quick);
    let mut r = rng::substream(4004, 0);
    let mut wrong = 0usize;
    for _ in 0..pts {
        let p = [20.0 * (r.gen::<f64>() - 0.5), 20.0 * (r.gen::<f64>() - 0.5)];
        let expect = p[0].hypot(p[1]).floor() as u64;
        if geometry::ring_index(&p) != expect {
            wrong += 1;
        }
    }
    c.leq("geometry/ring_index_is_integer_radius", wrong as f64, 0.0);
    Ok(())
}

fn mathkit_checks(c: &mut Checker, quick: bool) -> Result<()> {
    let report = mathkit::verify_j0_bound(1000.0f64, 1e-3)?;
    c.leq(
        "mathkit/j0_dominated_by_quartic_envelope",
        report.max_violation,
        0.0,
    );

    // random spot checks against the cosine-integral oracle
    let mut r = rng::substream(5001, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = 50.0 * r.gen::<f64>();
        worst = worst.max((mathkit::bessel_j0(x)? - mathkit::bessel_j0_oracle(x, 100_000)?).abs());
    }
    c.leq("mathkit/j0_matches_integral_oracle", worst, 1e-10);

    // the series/asymptotic seam sits at |x| = 12
    let mut worst = 0.0f64;
    for i in 0..=40 {
        let x = 11.5 + i as f64 / 40.0;
        worst = worst.max((mathkit::bessel_j0(x)? - mathkit::bessel_j0_oracle(x, 100_000)?).abs());
    }
    c.leq("mathkit/j0_branch_seam_vs_oracle", worst, 1e-10);

    // two-sided Poisson concentration bound dominates simulation
    let reps = scaled(100_000, quick);
    let mut worst_excess = f64::MIN;
    for &mu in &[4.0f64, 9.0, 25.0] {
        let pois = Poisson::new(mu).expect("positive mean");
        let mut r = rng::substream(5002, mu as u64);
        let draws: Vec<f64> = (0..reps).map(|_| pois.sample(&mut r)).collect();
        for &x in &[2.0f64, 6.0, 12.0] {
            let hits = draws.iter().filter(|&&n| (n - mu).abs() >= x).count();
            let bound = mathkit::poisson_tail_bound(mu, x)?;
            let se = stats::binomial_se(bound.min(1.0), reps);
            worst_excess = worst_excess.max(hits as f64 / reps as f64 - bound - 4.0 * se);
        }
    }
    c.leq("mathkit/poisson_tail_bound_dominates_mc", worst_excess, 0.0);

    // Hoeffding bound for fair-coin means
    let reps = scaled(100_000, quick);
    let mut worst_excess = f64::MIN;
    for &m in &[100usize, 1000] {
        let mut r = rng::substream(5003, m as u64);
        let means: Vec<f64> = (0..reps).map(|_| coin_mean(&mut r, m)).collect();
        for &eps in &[0.02f64, 0.05, 0.1] {
            let hits = means.iter().filter(|&&v| (v - 0.5).abs() >= eps).count();
            let bound = mathkit::hoeffding_bound(m, eps)?;
            let se = stats::binomial_se(bound.min(1.0), reps);
            worst_excess = worst_excess.max(hits as f64 / reps as f64 - bound - 4.0 * se);
        }
    }
    c.leq("mathkit/hoeffding_bound_dominates_mc", worst_excess, 0.0);

    c.leq(
        "mathkit/projection_law_formula_d3",
        (mathkit::sphere_projection_law(3, 0.6f64)? - 0.8).abs(),
        1e-15,
    );
    c.leq(
        "mathkit/ray_formula_r2",
        (mathkit::ray_hit_probability(2.0f64)? - 1.0 / 6.0).abs(),
        1e-15,
    );
    Ok(())
}

/// Mean of m fair coins, drawn 64 at a time as word popcounts.
fn coin_mean<R: Rng + ?Sized>(rng: &mut R, m: usize) -> f64 {
    let mut ones = 0u64;
    let mut left = m;
    while left >= 64 {
        ones += u64::from(rng.gen::<u64>().count_ones());
        left -= 64;
    }
    if left > 0 {
        let mask = (1u64 << left) - 1;
        ones += u64::from((rng.gen::<u64>() & mask).count_ones());
    }
    ones as f64 / m as f64
}
