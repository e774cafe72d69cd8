//! Rate families, their cumulative intensities, and numeric inverses.
//!
//! Families (t is time, all rates vanish left of their support):
//!
//! * `PowerLaw(alpha)`, 0 < alpha < 1: lambda(t) = t^-alpha on t > 0, with
//!   Lambda(T) = T^(1-alpha)/(1-alpha) and inverse ((1-alpha) u)^(1/(1-alpha)).
//! * `PowerLaw(1)`: lambda(t) = 1/t is not integrable at 0, so this family
//!   uses the support t >= 1, giving Lambda(T) = ln T and inverse e^u. The
//!   support choice is a convention of this crate, documented here because
//!   the inverse overflows f64 once u exceeds ~709 (about 700 points).
//! * `LogPower(beta)`, beta > 0: lambda(t) = (ln t)^-beta on t >= e.
//!   Lambda has no closed form; it is evaluated by Gauss-Legendre quadrature
//!   in u = ln t, where the integrand becomes g(u) = e^u u^-beta, against an
//!   eagerly built panel table (absolute target 1e-12, relative 1e-10).
//! * `Constant(level)`: lambda = level, Lambda(T) = level * T.
//!
//! Every admissible instance satisfies Lambda(T) < infinity for finite T and
//! Lambda(T) -> infinity as T -> infinity, so point processes driven by these
//! rates place finitely many points in finite windows.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::scalar::{Compensated, Real};

/// Which parametric family a `RateFunction` belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateKind<S> {
    PowerLaw { alpha: S },
    LogPower { beta: S },
    Constant { level: S },
}

/// A rate lambda(t) bundled with its cumulative intensity and inverse.
/// Immutable after construction; the LogPower quadrature table is built
/// eagerly so concurrent reads never contend.
#[derive(Clone, Debug)]
pub struct RateFunction<S: Real> {
    kind: RateKind<S>,
    table: Option<LogTable<S>>,
}

impl<S: Real> RateFunction<S> {
    /// PowerLaw family; `alpha` in (0, 1].
    pub fn power_law(alpha: S) -> Result<Self> {
        if !alpha.is_finite() || alpha <= S::zero() || alpha > S::one() {
            return Err(Error::domain(format!(
                "power_law: alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(RateFunction {
            kind: RateKind::PowerLaw { alpha },
            table: None,
        })
    }

    /// LogPower family; `beta` > 0.
    pub fn log_power(beta: S) -> Result<Self> {
        if !beta.is_finite() || beta <= S::zero() {
            return Err(Error::domain(format!(
                "log_power: beta must be positive, got {beta}"
            )));
        }
        Ok(RateFunction {
            kind: RateKind::LogPower { beta },
            table: Some(LogTable::build(beta)),
        })
    }

    /// Constant rate; `level` > 0.
    pub fn constant(level: S) -> Result<Self> {
        if !level.is_finite() || level <= S::zero() {
            return Err(Error::domain(format!(
                "constant: level must be positive, got {level}"
            )));
        }
        Ok(RateFunction {
            kind: RateKind::Constant { level },
            table: None,
        })
    }

    pub fn kind(&self) -> &RateKind<S> {
        &self.kind
    }

    /// lambda(t); zero left of the support edge. PowerLaw with alpha < 1
    /// diverges at t = 0 and returns +infinity there.
    pub fn intensity(&self, t: S) -> S {
        match self.kind {
            RateKind::PowerLaw { alpha } => {
                if alpha == S::one() {
                    if t >= S::one() {
                        t.recip()
                    } else {
                        S::zero()
                    }
                } else if t > S::zero() {
                    t.powf(-alpha)
                } else {
                    S::infinity()
                }
            }
            RateKind::LogPower { beta } => {
                if t >= S::E() {
                    t.ln().powf(-beta)
                } else {
                    S::zero()
                }
            }
            RateKind::Constant { level } => level,
        }
    }

    /// Left edge of the support of lambda.
    pub fn support_edge(&self) -> S {
        match self.kind {
            RateKind::PowerLaw { alpha } => {
                if alpha == S::one() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            RateKind::LogPower { .. } => S::E(),
            RateKind::Constant { .. } => S::zero(),
        }
    }

    /// Lambda(T) = integral of lambda over [0, T].
    pub fn cumulative_intensity(&self, t: S) -> Result<S> {
        if !t.is_finite() {
            return Err(Error::domain(format!(
                "cumulative_intensity: T must be finite, got {t}"
            )));
        }
        if t < S::zero() {
            return Err(Error::domain(format!(
                "cumulative_intensity: T must be nonnegative, got {t}"
            )));
        }
        Ok(match self.kind {
            RateKind::PowerLaw { alpha } => {
                if alpha == S::one() {
                    if t <= S::one() {
                        S::zero()
                    } else {
                        t.ln()
                    }
                } else {
                    let e = S::one() - alpha;
                    t.powf(e) / e
                }
            }
            RateKind::LogPower { .. } => self.table.as_ref().unwrap().cumulative(t),
            RateKind::Constant { level } => level * t,
        })
    }

    /// T with |Lambda(T) - u| <= 1e-9 max(1, u).
    pub fn inverse_cumulative_intensity(&self, u: S) -> Result<S> {
        if !u.is_finite() {
            return Err(Error::domain(format!(
                "inverse_cumulative_intensity: u must be finite, got {u}"
            )));
        }
        if u < S::zero() {
            return Err(Error::domain(format!(
                "inverse_cumulative_intensity: u must be nonnegative, got {u}"
            )));
        }
        if u == S::zero() {
            return Ok(self.support_edge());
        }
        match self.kind {
            RateKind::PowerLaw { alpha } => {
                if alpha == S::one() {
                    let t = u.exp();
                    if !t.is_finite() {
                        return Err(Error::domain(format!(
                            "inverse_cumulative_intensity: e^{u} overflows the scalar range \
                             (alpha = 1 trajectories grow exponentially in the point count)"
                        )));
                    }
                    Ok(t)
                } else {
                    let e = S::one() - alpha;
                    Ok((e * u).powf(e.recip()))
                }
            }
            RateKind::LogPower { .. } => Ok(self.table.as_ref().unwrap().inverse(u)),
            RateKind::Constant { level } => Ok(u / level),
        }
    }
}

/// Envelope constants (c0, c1) of the PowerLaw family with alpha in (0, 1):
/// c0 = (2(1-alpha)/3)^(1/(1-alpha)), c1 = (2(1-alpha))^(1/(1-alpha)).
/// The k-th point time concentrates in [c0 k^(1/(1-alpha)), c1 k^(1/(1-alpha))]
/// up to stretched-exponentially small failure probabilities.
pub fn envelope_constants<S: Real>(alpha: S) -> Result<(S, S)> {
    if !alpha.is_finite() || alpha <= S::zero() || alpha >= S::one() {
        return Err(Error::domain(format!(
            "envelope_constants: alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let e = S::one() - alpha;
    let c0 = (S::lit(2.0) * e / S::lit(3.0)).powf(e.recip());
    let c1 = (S::lit(2.0) * e).powf(e.recip());
    Ok((c0, c1))
}

/// Panel count and geometry of the LogPower quadrature table. Knots live in
/// u = ln t at spacing `H` from `U0` = 1 (t = e) to `U_MAX` = 64 (t ~ 6e27).
/// Within a panel Lambda is reconstructed two ways: exactly (partial
/// Gauss-Legendre panel, used by `cumulative`) and via a cubic Hermite
/// surrogate whose relative error is ~1e-11 (used by `inverse`, where it is
/// bisected; the surrogate keeps the hot sampling path free of quadrature).
const TABLE_U0: f64 = 1.0;
const TABLE_U_MAX: f64 = 64.0;
const TABLE_PANELS: usize = 16_128; // spacing 1/256
const GL_ORDER: usize = 16;

#[derive(Clone, Debug)]
struct LogTable<S> {
    beta: S,
    h: S,
    /// Lambda(e^{u_i}) at knots u_i = U0 + i h.
    cum: Vec<S>,
    /// dLambda/du = g(u_i) at knots.
    grad: Vec<S>,
    gl: GaussLegendre<S>,
}

impl<S: Real> LogTable<S> {
    fn build(beta: S) -> Self {
        let u0 = S::lit(TABLE_U0);
        let h = S::lit((TABLE_U_MAX - TABLE_U0) / TABLE_PANELS as f64);
        let gl = GaussLegendre::new(GL_ORDER);
        let g = |u: S| u.exp() * u.powf(-beta);
        let mut cum = Vec::with_capacity(TABLE_PANELS + 1);
        let mut grad = Vec::with_capacity(TABLE_PANELS + 1);
        let mut acc = Compensated::zero();
        cum.push(S::zero());
        grad.push(g(u0));
        for i in 0..TABLE_PANELS {
            let a = u0 + h * S::from_usize(i).unwrap();
            let b = u0 + h * S::from_usize(i + 1).unwrap();
            acc.add(gl.integrate(g, a, b));
            cum.push(acc.value());
            grad.push(g(b));
        }
        LogTable {
            beta,
            h,
            cum,
            grad,
            gl,
        }
    }

    #[inline]
    fn u0(&self) -> S {
        S::lit(TABLE_U0)
    }

    #[inline]
    fn u_max(&self) -> S {
        S::lit(TABLE_U_MAX)
    }

    #[inline]
    fn knot(&self, i: usize) -> S {
        self.u0() + self.h * S::from_usize(i).unwrap()
    }

    fn g(&self, u: S) -> S {
        u.exp() * u.powf(-self.beta)
    }

    /// Lambda(t) to near machine precision: table prefix plus a partial
    /// Gauss-Legendre panel.
    fn cumulative(&self, t: S) -> S {
        if t <= S::E() {
            return S::zero();
        }
        let u = t.ln();
        if u >= self.u_max() {
            // beyond the table: extend with unit-width panels (cold path)
            let mut acc = *self.cum.last().unwrap();
            let mut a = self.u_max();
            while a + S::one() < u {
                acc += self.gl.integrate(|x| self.g(x), a, a + S::one());
                a += S::one();
            }
            return acc + self.gl.integrate(|x| self.g(x), a, u);
        }
        let idx = ((u - self.u0()) / self.h)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(TABLE_PANELS - 1);
        self.cum[idx] + self.gl.integrate(|x| self.g(x), self.knot(idx), u)
    }

    /// Hermite-cubic surrogate of Lambda on panel `idx`, evaluated at u.
    #[inline]
    fn hermite(&self, idx: usize, u: S) -> S {
        let ua = self.knot(idx);
        let s = (u - ua) / self.h;
        let va = self.cum[idx];
        let vb = self.cum[idx + 1];
        let da = self.grad[idx] * self.h;
        let db = self.grad[idx + 1] * self.h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = S::lit(2.0) * s3 - S::lit(3.0) * s2 + S::one();
        let h10 = s3 - S::lit(2.0) * s2 + s;
        let h01 = -S::lit(2.0) * s3 + S::lit(3.0) * s2;
        let h11 = s3 - s2;
        h00 * va + h10 * da + h01 * vb + h11 * db
    }

    /// T with Lambda(T) = v, via panel lookup, bisection on the Hermite
    /// surrogate to 1e-12 bracket width, and one Newton polish with the
    /// analytic derivative g.
    fn inverse(&self, v: S) -> S {
        if v <= S::zero() {
            return S::E();
        }
        let last = *self.cum.last().unwrap();
        if v >= last {
            return self.inverse_beyond_table(v);
        }
        // cum is strictly increasing; find panel with cum[i] <= v < cum[i+1]
        let idx = self.cum.partition_point(|&c| c <= v) - 1;
        let mut lo = self.knot(idx);
        let mut hi = self.knot(idx + 1);
        let width_target = S::lit(1e-12) * hi.abs().max(S::one());
        while hi - lo > width_target {
            let mid = S::lit(0.5) * (lo + hi);
            if self.hermite(idx, mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut u = S::lit(0.5) * (lo + hi);
        u = u - (self.hermite(idx, u) - v) / self.g(u);
        u = u.max(self.u0());
        u.exp()
    }

    /// Cold path for v past the table end: grow the bracket geometrically in
    /// u, then bisect on the true (quadrature) Lambda.
    fn inverse_beyond_table(&self, v: S) -> S {
        let mut lo = self.u_max();
        let mut hi = lo + S::one();
        while self.cumulative(hi.exp()) < v {
            lo = hi;
            hi = hi + (hi - self.u0());
            if !hi.exp().is_finite() {
                break;
            }
        }
        for _ in 0..200 {
            if hi - lo <= S::lit(1e-12) * hi.abs().max(S::one()) {
                break;
            }
            let mid = S::lit(0.5) * (lo + hi);
            if self.cumulative(mid.exp()) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut u = S::lit(0.5) * (lo + hi);
        u = u - (self.cumulative(u.exp()) - v) / self.g(u);
        u.exp()
    }
}
