//! Numeric quadrature: fixed-order Gauss–Legendre panels and an adaptive
//! Simpson rule. The two are algorithmically independent, which lets callers
//! cross-validate one against the other.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gauss–Legendre rule of order `n` on [-1, 1], nodes found by Newton
/// iteration on the Legendre recurrence.
#[derive(Clone, Debug)]
pub struct GaussLegendre<S> {
    nodes: Vec<S>,
    weights: Vec<S>,
}

impl<S: Real> GaussLegendre<S> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre order must be at least 2");
        let mut nodes = vec![S::zero(); n];
        let mut weights = vec![S::zero(); n];
        let nf = S::from_usize(n).unwrap();
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n(x)
            let k = S::from_usize(i).unwrap();
            let mut x = (S::PI() * (k + S::lit(0.75)) / (nf + S::lit(0.5))).cos();
            let mut dp = S::one();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x = x - step;
                if step.abs() <= S::epsilon() * x.abs().max(S::one()) {
                    break;
                }
            }
            let w = S::lit(2.0) / ((S::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = S::zero();
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b] with a single panel.
    pub fn integrate<F: FnMut(S) -> S>(&self, mut f: F, a: S, b: S) -> S {
        let half = S::lit(0.5) * (b - a);
        let mid = S::lit(0.5) * (a + b);
        let mut acc = S::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Legendre polynomial P_n and its derivative at x, by upward recurrence.
fn legendre<S: Real>(n: usize, x: S) -> (S, S) {
    let mut p0 = S::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = S::from_usize(k).unwrap();
        let p2 = ((S::lit(2.0) * kf - S::one()) * x * p1 - (kf - S::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = S::from_usize(n).unwrap() * (x * p1 - p0) / (x * x - S::one());
    (p1, d)
}

/// Adaptive Simpson integration of `f` over [a, b] to the given absolute and
/// relative targets (whichever is looser governs), with Richardson correction.
pub fn adaptive_simpson<S: Real, F: FnMut(S) -> S>(
    mut f: F,
    a: S,
    b: S,
    abs_tol: S,
    rel_tol: S,
) -> Result<S> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("adaptive_simpson: non-finite interval"));
    }
    if a == b {
        return Ok(S::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let m = S::lit(0.5) * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    // the relative target is anchored to a first global estimate
    let scale = whole.abs().max(S::lit(1e-300));
    let tol = abs_tol.max(rel_tol * scale);
    let mut depth_exceeded = false;
    let v = simpson_rec(
        &mut f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        60,
        &mut depth_exceeded,
    );
    if depth_exceeded {
        return Err(Error::Numeric(
            "adaptive_simpson: recursion depth exhausted before reaching tolerance".into(),
        ));
    }
    Ok(v)
}

#[inline]
fn simpson<S: Real>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::lit(6.0) * (fa + S::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<S: Real, F: FnMut(S) -> S>(
    f: &mut F,
    a: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: u32,
    depth_exceeded: &mut bool,
) -> S {
    let m = S::lit(0.5) * (a + b);
    let lm = S::lit(0.5) * (a + m);
    let rm = S::lit(0.5) * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= S::lit(15.0) * tol {
        return left + right + delta / S::lit(15.0);
    }
    if depth == 0 {
        *depth_exceeded = true;
        return left + right + delta / S::lit(15.0);
    }
    let half_tol = S::lit(0.5) * tol;
    simpson_rec(f, a, m, fa, flm, fm, left, half_tol, depth - 1, depth_exceeded)
        + simpson_rec(f, m, b, fm, frm, fb, right, half_tol, depth - 1, depth_exceeded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = GaussLegendre::<f64>::new(8);
        // degree 15 is the exactness limit of an 8-point rule
        let v = gl.integrate(|x| x.powi(14), -1.0, 1.0);
        assert_relative_eq!(v, 2.0 / 15.0, max_relative = 1e-14);
        let v = gl.integrate(|x| 3.0 * x * x, 0.0, 2.0);
        assert_relative_eq!(v, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_smooth_transcendental() {
        let gl = GaussLegendre::<f64>::new(16);
        let v = gl.integrate(f64::exp, 0.0, 1.0);
        assert_relative_eq!(v, std::f64::consts::E - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn adaptive_simpson_meets_tolerance() {
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-11);
        let v = adaptive_simpson(|x: f64| 1.0 / x, 1.0, 2.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(v, std::f64::consts::LN_2, epsilon = 1e-11);
    }

    #[test]
    fn adaptive_simpson_rejects_bad_interval() {
        assert!(adaptive_simpson(|x: f64| x, 0.0, f64::INFINITY, 1e-6, 1e-6).is_err());
    }

    #[test]
    fn empty_interval_is_zero() {
        let v = adaptive_simpson(|x: f64| x.exp(), 1.5, 1.5, 1e-12, 1e-12).unwrap();
        assert_eq!(v, 0.0);
    }
}
