//! Statistical test harness behind the verification suites: chi-square
//! goodness of fit against a Poisson reference, two-sample chi-square and
//! Kolmogorov-Smirnov tests, binomial standard errors, and least-squares
//! slope fits. All routines work in f64; reference CDFs come from statrs.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Result of a chi-square test.
#[derive(Clone, Copy, Debug)]
pub struct Chi2Outcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Result of a two-sample Kolmogorov-Smirnov test.
#[derive(Clone, Copy, Debug)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Ordinary least squares fit of y against x.
#[derive(Clone, Copy, Debug)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Standard error sqrt(p(1-p)/n) of an empirical frequency.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Chi-square goodness of fit of integer samples against Poisson(mu).
/// Cells are pooled left to right until each holds expected mass at least
/// `min_expected` (5 is customary); the analytic upper tail folds into the
/// last cell. Degrees of freedom are cells - 1 (mu is given, not fitted).
pub fn chi2_gof_poisson(samples: &[u64], mu: f64, min_expected: f64) -> Result<Chi2Outcome> {
    if samples.is_empty() {
        return Err(Error::domain("chi2_gof_poisson: no samples"));
    }
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::domain(format!(
            "chi2_gof_poisson: mu must be positive, got {mu}"
        )));
    }
    let pois = Poisson::new(mu)
        .map_err(|e| Error::Numeric(format!("chi2_gof_poisson: {e}")))?;
    let k_max = *samples.iter().max().unwrap() as usize;
    let mut observed = vec![0u64; k_max + 1];
    for &s in samples {
        observed[s as usize] += 1;
    }
    let n = samples.len() as f64;

    // pooled cells: (observed, expected)
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut obs_acc = 0.0;
    let mut exp_acc = 0.0;
    for (k, &o) in observed.iter().enumerate() {
        obs_acc += o as f64;
        exp_acc += n * pois.pmf(k as u64);
        if exp_acc >= min_expected {
            cells.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    // everything above k_max plus any unpooled remainder
    exp_acc += n * (1.0 - pois.cdf(k_max as u64));
    match cells.last_mut() {
        Some(last) if exp_acc < min_expected => {
            last.0 += obs_acc;
            last.1 += exp_acc;
        }
        _ => cells.push((obs_acc, exp_acc)),
    }
    if cells.len() < 2 {
        return Err(Error::domain(
            "chi2_gof_poisson: too few pooled cells; need more samples or smaller min_expected",
        ));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    Ok(Chi2Outcome {
        statistic,
        dof,
        p_value: chi2_sf(statistic, dof)?,
    })
}

/// Two-sample chi-square for a pair of count histograms over the same bins,
/// with unequal totals handled by the usual sqrt(N2/N1) reweighting. Bins
/// are pooled left to right until each holds at least `min_pooled` combined
/// counts. Degrees of freedom are pooled bins - 1.
pub fn chi2_two_sample(k1: &[u64], k2: &[u64], min_pooled: f64) -> Result<Chi2Outcome> {
    if k1.len() != k2.len() {
        return Err(Error::domain(format!(
            "chi2_two_sample: histograms have different lengths {} and {}",
            k1.len(),
            k2.len()
        )));
    }
    let n1: u64 = k1.iter().sum();
    let n2: u64 = k2.iter().sum();
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("chi2_two_sample: a histogram is empty"));
    }
    let r1 = (n2 as f64 / n1 as f64).sqrt();
    let r2 = (n1 as f64 / n2 as f64).sqrt();

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut a = 0.0;
    let mut b = 0.0;
    for (&x, &y) in k1.iter().zip(k2) {
        a += x as f64;
        b += y as f64;
        if a + b >= min_pooled {
            cells.push((a, b));
            a = 0.0;
            b = 0.0;
        }
    }
    if a + b > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += a;
            last.1 += b;
        } else {
            cells.push((a, b));
        }
    }
    if cells.len() < 2 {
        return Err(Error::domain(
            "chi2_two_sample: too few pooled bins for a test",
        ));
    }
    let statistic: f64 = cells
        .iter()
        .map(|(x, y)| {
            let d = r1 * x - r2 * y;
            d * d / (x + y)
        })
        .sum();
    let dof = cells.len() - 1;
    Ok(Chi2Outcome {
        statistic,
        dof,
        p_value: chi2_sf(statistic, dof)?,
    })
}

/// Two-sample Kolmogorov-Smirnov test: largest gap between empirical CDFs,
/// with the classical asymptotic p-value at effective sample size
/// n1 n2 / (n1 + n2).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsOutcome> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::domain("ks_two_sample: empty sample"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|p, q| p.total_cmp(q));
    b.sort_unstable_by(|p, q| p.total_cmp(q));
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let (mut f1, mut f2) = (0.0f64, 0.0f64);
    let mut d = 0.0f64;
    while i < n1 && j < n2 {
        let (v1, v2) = (a[i], b[j]);
        if v1 <= v2 {
            i += 1;
            f1 = i as f64 / n1 as f64;
        }
        if v2 <= v1 {
            j += 1;
            f2 = j as f64 / n2 as f64;
        }
        d = d.max((f1 - f2).abs());
    }
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    Ok(KsOutcome {
        statistic: d,
        p_value: ks_complement_cdf(lambda),
    })
}

/// Complement of the asymptotic Kolmogorov distribution,
/// Q(z) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 z^2), evaluated through the
/// rapidly converging pair of series on either side of z = 1.18.
pub fn ks_complement_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 1.18 {
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * z * z)).exp();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / z
            * (y + y.powi(9) + y.powi(25) + y.powi(49))
    } else {
        let x = (-2.0 * z * z).exp();
        2.0 * (x - x.powi(4) + x.powi(9))
    }
}

/// Least-squares line through (x, y) pairs with the slope's standard error
/// from the usual residual-variance estimate. Needs at least three points
/// and nonconstant x.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "ols_fit: got {} x values but {} y values",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::domain(
            "ols_fit: need at least 3 points for a slope with a standard error",
        ));
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::domain("ols_fit: x values are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    let slope_se = (ss_res / (nf - 2.0) / sxx).sqrt();
    Ok(OlsFit {
        slope,
        intercept,
        slope_se,
    })
}

fn chi2_sf(statistic: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Numeric(format!("chi-square distribution: {e}")))?;
    Ok(dist.sf(statistic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::{Distribution, Poisson as PoissonSampler};

    #[test]
    fn binomial_se_matches_hand_value() {
        assert_relative_eq!(binomial_se(0.5, 100), 0.05, max_relative = 1e-15);
    }

    #[test]
    fn gof_accepts_true_poisson_and_rejects_shifted() {
        let mut r = rng::master(11);
        let sampler = PoissonSampler::new(20.0).unwrap();
        let good: Vec<u64> = (0..20_000).map(|_| sampler.sample(&mut r) as u64).collect();
        let outcome = chi2_gof_poisson(&good, 20.0, 5.0).unwrap();
        assert!(outcome.p_value > 1e-3, "false rejection: {outcome:?}");

        let shifted = PoissonSampler::new(22.0).unwrap();
        let bad: Vec<u64> = (0..20_000).map(|_| shifted.sample(&mut r) as u64).collect();
        let outcome = chi2_gof_poisson(&bad, 20.0, 5.0).unwrap();
        assert!(outcome.p_value < 1e-6, "no power against mean shift: {outcome:?}");
    }

    #[test]
    fn two_sample_chi2_passes_identical_and_fails_disjoint() {
        let h1 = [100u64, 200, 300, 200, 100];
        let same = chi2_two_sample(&h1, &h1, 10.0).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert!(same.p_value > 0.999);

        let h2 = [300u64, 200, 100, 100, 200];
        let diff = chi2_two_sample(&h1, &h2, 10.0).unwrap();
        assert!(diff.p_value < 1e-6);

        assert!(chi2_two_sample(&h1, &h1[..3], 10.0).is_err());
    }

    #[test]
    fn ks_statistic_on_hand_case() {
        // CDFs of {1,2,3} and {1.5,2.5,3.5} stay exactly 1/3 apart
        let out = ks_two_sample(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]).unwrap();
        assert_relative_eq!(out.statistic, 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn ks_accepts_same_law_and_rejects_shift() {
        let mut r = rng::master(12);
        let a: Vec<f64> = (0..5000).map(|_| rng::standard_normal::<f64, _>(&mut r)).collect();
        let b: Vec<f64> = (0..5000).map(|_| rng::standard_normal::<f64, _>(&mut r)).collect();
        let same = ks_two_sample(&a, &b).unwrap();
        assert!(same.p_value > 1e-3, "false rejection: {same:?}");

        let c: Vec<f64> = (0..5000)
            .map(|_| rng::standard_normal::<f64, _>(&mut r) + 0.2)
            .collect();
        let diff = ks_two_sample(&a, &c).unwrap();
        assert!(diff.p_value < 1e-6, "no power against shift: {diff:?}");
    }

    #[test]
    fn ks_complement_reference_value_and_continuity() {
        // 2(e^-2 - e^-8 + e^-18), frozen
        assert_relative_eq!(
            ks_complement_cdf(1.2),
            2.0 * ((-2.88f64).exp() - (-11.52f64).exp() + (-25.92f64).exp()),
            max_relative = 1e-14
        );
        assert_relative_eq!(ks_complement_cdf(1.0), 0.26999967167737986, max_relative = 1e-10);
        // the two series agree where they meet
        let below = ks_complement_cdf(1.18 - 1e-9);
        let above = ks_complement_cdf(1.18 + 1e-9);
        assert!((below - above).abs() < 1e-8);
        assert_eq!(ks_complement_cdf(0.0), 1.0);
        assert!(ks_complement_cdf(5.0) < 1e-20);
    }

    #[test]
    fn ols_recovers_exact_line_and_noise_slope() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = ols_fit(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 1.0, max_relative = 1e-12);
        assert!(fit.slope_se < 1e-10);

        let mut r = rng::master(13);
        let noisy: Vec<f64> = x
            .iter()
            .map(|v| -1.5 * v + 0.3 + 0.01 * r.gen_range(-1.0..1.0))
            .collect();
        let fit = ols_fit(&x, &noisy).unwrap();
        assert!((fit.slope + 1.5).abs() < 0.01);

        assert!(ols_fit(&x[..2], &y[..2]).is_err());
        assert!(ols_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
