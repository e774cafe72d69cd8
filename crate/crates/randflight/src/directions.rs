//! Direction laws for the two walk models: uniform over the 2d signed axis
//! vectors (the conservative walk), and uniform on the unit sphere S^{d-1}
//! (random flights), plus the planar projection length of a direction.
//!
//! Sampling algorithms are part of the reproducibility contract and fixed:
//!
//! * Orthogonal: one `gen_range(0..2d)` draw j; the direction is sign * e_axis
//!   with axis = j / 2 and sign + for even j, - for odd j.
//! * Sphere, d = 2: one uniform angle in [-pi, pi), returned as (cos, sin).
//! * Sphere, d >= 3: d Marsaglia-polar standard normals (see `rng`),
//!   normalized; the measure-zero underflow of the norm is rejected and
//!   redrawn.

use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::Rng;
use smallvec::SmallVec;

/// Which direction law a model uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionLaw {
    /// Uniform over the 2d vectors {+-e_1, ..., +-e_d}.
    Orthogonal,
    /// Uniform on the unit sphere S^{d-1}.
    Sphere,
}

/// A direction law together with its ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectionModel {
    law: DirectionLaw,
    dimension: usize,
}

/// A sampled direction; Euclidean norm 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector<S>(SmallVec<[S; 4]>);

impl<S: Real> UnitVector<S> {
    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Length of the projection onto the first two coordinates.
    pub fn projection_length(&self) -> Result<S> {
        projection_length(&self.0)
    }
}

/// sqrt(v1^2 + v2^2) for a direction in dimension at least 2.
pub fn projection_length<S: Real>(coords: &[S]) -> Result<S> {
    if coords.len() < 2 {
        return Err(Error::domain(
            "projection_length: needs dimension at least 2 (nothing to project in d = 1)",
        ));
    }
    Ok(coords[0].hypot(coords[1]))
}

impl DirectionModel {
    /// Model A directions: uniform over 2d signed axis vectors, d >= 1.
    pub fn orthogonal(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::domain("orthogonal: dimension must be at least 1"));
        }
        Ok(DirectionModel {
            law: DirectionLaw::Orthogonal,
            dimension,
        })
    }

    /// Model B directions: uniform on S^{d-1}, d >= 2.
    pub fn sphere(dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::domain(format!(
                "sphere: dimension must be at least 2, got {dimension}"
            )));
        }
        Ok(DirectionModel {
            law: DirectionLaw::Sphere,
            dimension,
        })
    }

    pub fn law(&self) -> DirectionLaw {
        self.law
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Draws one direction into `out` (length must equal the dimension).
    /// This is the allocation-free hot path used by trajectory builds.
    pub fn sample_into<S: Real, R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [S]) {
        debug_assert_eq!(out.len(), self.dimension);
        match self.law {
            DirectionLaw::Orthogonal => {
                out.fill(S::zero());
                let j = rng.gen_range(0..2 * self.dimension);
                out[j / 2] = if j % 2 == 0 { S::one() } else { -S::one() };
            }
            DirectionLaw::Sphere if self.dimension == 2 => {
                let theta = S::sample_uniform(rng, -S::PI(), S::PI());
                out[0] = theta.cos();
                out[1] = theta.sin();
            }
            DirectionLaw::Sphere => {
                fill_normalized_gaussians(rng, out);
            }
        }
    }

    /// Draws one direction, allocating a fresh `UnitVector`.
    pub fn sample<S: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector<S> {
        let mut v = SmallVec::from_elem(S::zero(), self.dimension);
        self.sample_into(rng, &mut v);
        UnitVector(v)
    }
}

/// Uniform sphere direction by normalized Gaussians in any dimension d >= 2,
/// regardless of the d = 2 angle shortcut. Serves as the cross-validation
/// route for the angle sampler.
pub fn sample_sphere_via_gaussians<S: Real, R: Rng + ?Sized>(
    dimension: usize,
    rng: &mut R,
) -> Result<UnitVector<S>> {
    if dimension < 2 {
        return Err(Error::domain(format!(
            "sample_sphere_via_gaussians: dimension must be at least 2, got {dimension}"
        )));
    }
    let mut v = SmallVec::from_elem(S::zero(), dimension);
    fill_normalized_gaussians(rng, &mut v);
    Ok(UnitVector(v))
}

fn fill_normalized_gaussians<S: Real, R: Rng + ?Sized>(rng: &mut R, out: &mut [S]) {
    loop {
        let mut norm2 = S::zero();
        for c in out.iter_mut() {
            let g = crate::rng::standard_normal(rng);
            *c = g;
            norm2 += g * g;
        }
        let norm = norm2.sqrt();
        if norm.is_normal() {
            for c in out.iter_mut() {
                *c /= norm;
            }
            return;
        }
        // all-coordinates-tiny draw: measure zero, redraw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::stats;

    const NORM_TOL: f64 = 1e-12;

    #[test]
    fn orthogonal_frequencies_match_uniform_law() {
        for d in [1usize, 2, 5] {
            let dm = DirectionModel::orthogonal(d).unwrap();
            let mut r = rng::master(101);
            let n = 100_000;
            let mut counts = vec![0u64; 2 * d];
            for _ in 0..n {
                let v: UnitVector<f64> = dm.sample(&mut r);
                let axis = v.coords().iter().position(|&c| c != 0.0).unwrap();
                let sign = if v.coords()[axis] > 0.0 { 0 } else { 1 };
                counts[2 * axis + sign] += 1;
                assert!((v.coords().iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs() < NORM_TOL);
            }
            let p = 1.0 / (2.0 * d as f64);
            let se = stats::binomial_se(p, n);
            for (j, &c) in counts.iter().enumerate() {
                let freq = c as f64 / n as f64;
                assert!(
                    (freq - p).abs() <= 3.0 * se,
                    "outcome {j} in d={d}: freq {freq}, want {p} +- {}",
                    3.0 * se
                );
            }
        }
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        for d in [2usize, 3, 6] {
            let dm = DirectionModel::sphere(d).unwrap();
            let mut r = rng::master(102);
            for _ in 0..10_000 {
                let v: UnitVector<f64> = dm.sample(&mut r);
                let norm = v.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < NORM_TOL, "norm {norm} in d={d}");
            }
        }
    }

    #[test]
    fn projection_length_cases() {
        let e1 = [1.0f64, 0.0, 0.0];
        assert_eq!(projection_length(&e1).unwrap(), 1.0);
        let e3 = [0.0f64, 0.0, 1.0];
        assert_eq!(projection_length(&e3).unwrap(), 0.0);
        assert!(projection_length(&[1.0f64]).is_err());
        let dm = DirectionModel::sphere(2).unwrap();
        let mut r = rng::master(103);
        let v: UnitVector<f64> = dm.sample(&mut r);
        assert!((v.projection_length().unwrap() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn projection_law_one_point_check() {
        // exact law of the planar projection: P(l >= 0.6) = 0.8 in d = 3
        let dm = DirectionModel::sphere(3).unwrap();
        let mut r = rng::master(104);
        let n = 200_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let v: UnitVector<f64> = dm.sample(&mut r);
            if v.projection_length().unwrap() >= 0.6 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let se = stats::binomial_se(0.8, n);
        assert!((freq - 0.8).abs() <= 3.0 * se, "freq {freq}");
    }

    #[test]
    fn direction_reversal_frequency_is_one_over_2d() {
        for d in [1usize, 3] {
            let dm = DirectionModel::orthogonal(d).unwrap();
            let mut r = rng::master(105);
            let n = 100_000;
            let mut prev: UnitVector<f64> = dm.sample(&mut r);
            let mut flips = 0u64;
            for _ in 0..n {
                let cur: UnitVector<f64> = dm.sample(&mut r);
                let is_flip = cur
                    .coords()
                    .iter()
                    .zip(prev.coords())
                    .all(|(a, b)| (a + b).abs() < 1e-15);
                if is_flip {
                    flips += 1;
                }
                prev = cur;
            }
            let p = 1.0 / (2.0 * d as f64);
            let se = stats::binomial_se(p, n);
            let freq = flips as f64 / n as f64;
            assert!((freq - p).abs() <= 4.0 * se, "d={d}: flip freq {freq}, want {p}");
        }
    }

    #[test]
    fn sphere_coordinate_second_moments_are_1_over_d() {
        let d = 4;
        let dm = DirectionModel::sphere(d).unwrap();
        let mut r = rng::master(106);
        let n = 100_000;
        let mut sums = vec![0.0f64; d];
        for _ in 0..n {
            let v: UnitVector<f64> = dm.sample(&mut r);
            for (s, c) in sums.iter_mut().zip(v.coords()) {
                *s += c * c;
            }
        }
        // Var(f_i^2) <= E f_i^4 = 3/(d(d+2)), comfortably under (2/d)^2
        let se = (2.0 / d as f64) / (n as f64).sqrt();
        for (i, s) in sums.iter().enumerate() {
            let m2 = s / n as f64;
            assert!(
                (m2 - 1.0 / d as f64).abs() <= 4.0 * se,
                "coordinate {i}: second moment {m2}"
            );
        }
    }

    #[test]
    fn angle_and_gaussian_routes_agree_in_d2() {
        let dm = DirectionModel::sphere(2).unwrap();
        let mut r = rng::master(107);
        let n = 20_000;
        let via_angle: Vec<f64> = (0..n)
            .map(|_| {
                let v: UnitVector<f64> = dm.sample(&mut r);
                v.coords()[1].atan2(v.coords()[0])
            })
            .collect();
        let via_gauss: Vec<f64> = (0..n)
            .map(|_| {
                let v: UnitVector<f64> = sample_sphere_via_gaussians(2, &mut r).unwrap();
                v.coords()[1].atan2(v.coords()[0])
            })
            .collect();
        let ks = stats::ks_two_sample(&via_angle, &via_gauss).unwrap();
        assert!(ks.p_value > 1e-3, "angle vs gaussian KS: {ks:?}");
    }

    #[test]
    fn constructors_reject_degenerate_dimensions() {
        assert!(DirectionModel::orthogonal(0).is_err());
        assert!(DirectionModel::sphere(1).is_err());
        assert!(sample_sphere_via_gaussians::<f64, _>(1, &mut rng::master(1)).is_err());
    }
}
