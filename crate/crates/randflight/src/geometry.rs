//! Segment-level hit detection deciding recurrence in continuous time:
//! segment against the closed box [-rho, rho]^d, segment and ray against a
//! disc centred at the origin, and ring classification of planar points.
//!
//! All sets are closed (touching counts as a hit) and boundary comparisons
//! carry a relative slack of `BOUNDARY_SLACK` toward inclusion, so a
//! trajectory that grazes a boundary is never dropped by rounding.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative slack applied toward inclusion at set boundaries.
pub const BOUNDARY_SLACK: f64 = 1e-12;

#[inline]
fn slack_for<S: Real>(scale: S) -> S {
    S::lit(BOUNDARY_SLACK) * scale.max(S::one())
}

fn check_pair<S: Real>(name: &str, p: &[S], q: &[S]) -> Result<()> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::domain(format!(
            "{name}: endpoint dimensions {} and {} must match and be positive",
            p.len(),
            q.len()
        )));
    }
    if !p.iter().chain(q).all(|c| c.is_finite()) {
        return Err(Error::domain(format!("{name}: coordinates must be finite")));
    }
    Ok(())
}

/// Clips the segment p + t(q-p), t in [0,1], against the slightly inflated
/// box [-rho-slack, rho+slack]^d. Returns the surviving parameter interval.
fn slab_clip<S: Real>(p: &[S], q: &[S], rho: S) -> Option<(S, S)> {
    let bound = rho + slack_for(rho);
    let mut t_min = S::zero();
    let mut t_max = S::one();
    for (&a, &b) in p.iter().zip(q) {
        let d = b - a;
        if d == S::zero() {
            if a < -bound || a > bound {
                return None;
            }
            continue;
        }
        let t1 = (-bound - a) / d;
        let t2 = (bound - a) / d;
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        t_min = t_min.max(lo);
        t_max = t_max.min(hi);
        if t_min > t_max {
            return None;
        }
    }
    Some((t_min, t_max))
}

/// True iff the closed segment [p, q] meets the closed box [-rho, rho]^d
/// (slab-clipping method).
pub fn segment_hits_box<S: Real>(p: &[S], q: &[S], rho: S) -> Result<bool> {
    if !rho.is_finite() || rho <= S::zero() {
        return Err(Error::domain(format!(
            "segment_hits_box: box half-width must be positive, got {rho}"
        )));
    }
    check_pair("segment_hits_box", p, q)?;
    Ok(slab_clip(p, q, rho).is_some())
}

/// Brute-force reference for `segment_hits_box`: membership test at
/// `samples` points spread uniformly along the segment, endpoints included.
/// Kept public so verification can arbitrate disagreements.
pub fn segment_hits_box_oracle<S: Real>(p: &[S], q: &[S], rho: S, samples: usize) -> bool {
    let n = samples.max(2);
    for i in 0..n {
        let t = S::from_usize(i).unwrap() / S::from_usize(n - 1).unwrap();
        let inside = p
            .iter()
            .zip(q)
            .all(|(&a, &b)| (a + t * (b - a)).abs() <= rho);
        if inside {
            return true;
        }
    }
    false
}

/// Parameter in [0,1] of the point of [p, q] nearest the origin.
#[inline]
fn nearest_parameter<S: Real>(p: &[S], q: &[S]) -> S {
    let mut len2 = S::zero();
    let mut dot = S::zero();
    for (&a, &b) in p.iter().zip(q) {
        let d = b - a;
        len2 += d * d;
        dot += a * d;
    }
    if len2 == S::zero() {
        S::zero()
    } else {
        (-dot / len2).max(S::zero()).min(S::one())
    }
}

/// Minimum distance from the origin to the closed segment [p, q], in any
/// dimension.
pub fn segment_min_distance<S: Real>(p: &[S], q: &[S]) -> Result<S> {
    check_pair("segment_min_distance", p, q)?;
    let t = nearest_parameter(p, q);
    let mut dist2 = S::zero();
    for (&a, &b) in p.iter().zip(q) {
        let c = a + t * (b - a);
        dist2 += c * c;
    }
    Ok(dist2.sqrt())
}

/// True iff the closed planar segment [p, q] meets the closed disc of the
/// given radius centred at the origin.
pub fn segment_hits_disc<S: Real>(p: &[S], q: &[S], radius: S) -> Result<bool> {
    if !radius.is_finite() || radius <= S::zero() {
        return Err(Error::domain(format!(
            "segment_hits_disc: radius must be positive, got {radius}"
        )));
    }
    check_pair("segment_hits_disc", p, q)?;
    if p.len() != 2 {
        return Err(Error::domain(format!(
            "segment_hits_disc: expects planar endpoints, got dimension {}",
            p.len()
        )));
    }
    let d = segment_min_distance(p, q)?;
    Ok(d <= radius + slack_for(radius))
}

/// True iff the infinite ray leaving `origin` (with norm r > 1) at the given
/// angle meets the closed unit disc at the origin: the closest approach must
/// lie forward along the ray and within distance 1.
pub fn ray_hits_disc<S: Real>(origin: &[S], angle: S) -> Result<bool> {
    if origin.len() != 2 || !origin.iter().all(|c| c.is_finite()) || !angle.is_finite() {
        return Err(Error::domain(
            "ray_hits_disc: origin must be a finite planar point and angle finite",
        ));
    }
    let r2 = origin[0] * origin[0] + origin[1] * origin[1];
    if r2 <= S::one() {
        return Err(Error::domain(format!(
            "ray_hits_disc: origin must lie outside the unit disc, got squared norm {r2}"
        )));
    }
    let (dx, dy) = (angle.cos(), angle.sin());
    let t_star = -(origin[0] * dx + origin[1] * dy);
    if t_star <= S::zero() {
        return Ok(false);
    }
    let closest2 = r2 - t_star * t_star;
    Ok(closest2 <= S::one() + slack_for(S::one()))
}

/// Ring index floor(|p|): the annulus k <= |p| <= k+1 the point falls in. A
/// point on an integer radius lands in the ring it is the inner edge of.
pub fn ring_index<S: Real>(p: &[S]) -> u64 {
    debug_assert!(p.len() == 2 && p.iter().all(|c| c.is_finite()));
    p[0].hypot(p[1]).floor().to_u64().unwrap_or(u64::MAX)
}
