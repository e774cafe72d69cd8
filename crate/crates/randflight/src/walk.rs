//! Trajectories of the continuous-time walk Z(t) and its embedded walk W_n:
//! turn times from the point process, directions from the direction law, and
//! positions accumulated in compensated precision.
//!
//! Draw order within a replica stream is fixed and documented: first every
//! turn time (one exponential each, plus the consumed overshoot under a time
//! horizon), then every direction, in index order, from the same stream.
//! Changing this order is a breaking change: it silently alters every
//! realization for a given seed.

use crate::directions::{DirectionLaw, DirectionModel};
use crate::error::{Error, Result};
use crate::ppp::{InversionSampler, Stop};
use crate::rates::RateFunction;
use crate::scalar::{Compensated, Real};
use rand::Rng;
use smallvec::SmallVec;
use std::io::Write;

/// An immutable walk realization. `turn_times` holds tau_0 = 0 through
/// tau_n; `positions` holds W_0 = 0 through W_n row by row; `directions`
/// holds f_0..f_{n-1} (count-stopped) or f_0..f_n (time-stopped, where f_n
/// carries the walk from tau_n to the horizon).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<S: Real> {
    dimension: usize,
    law: DirectionLaw,
    turn_times: Vec<S>,
    directions: Vec<S>,
    positions: Vec<S>,
    horizon: S,
}

/// One linear piece of a trajectory: the walk moves from `p0` at time `t0`
/// to `p1` at time `t1` along `dir`.
#[derive(Clone, Copy, Debug)]
pub struct SegmentView<'a, S> {
    pub index: usize,
    pub t0: S,
    pub t1: S,
    pub p0: &'a [S],
    pub p1: &'a [S],
    pub dir: &'a [S],
}

impl<S: Real> Trajectory<S> {
    /// Assembles a trajectory from raw parts and recomputes every position
    /// by the compensated left fold W_{k+1} = W_k + (tau_{k+1} - tau_k) f_k,
    /// so positions have a single source of truth. `times` excludes tau_0 =
    /// 0. A `Some` horizon marks a time-stopped build and requires one
    /// direction row more than there are times.
    pub fn from_parts(
        law: DirectionLaw,
        dimension: usize,
        times: Vec<S>,
        directions: Vec<S>,
        horizon: Option<S>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::domain("from_parts: dimension must be at least 1"));
        }
        if directions.len() % dimension != 0 {
            return Err(Error::domain(format!(
                "from_parts: {} direction coordinates do not fill rows of dimension {dimension}",
                directions.len()
            )));
        }
        let mut prev = S::zero();
        for &t in &times {
            if !t.is_finite() || t <= prev {
                return Err(Error::domain(
                    "from_parts: turn times must be finite and strictly increasing from 0",
                ));
            }
            prev = t;
        }
        let expected_rows = times.len() + usize::from(horizon.is_some());
        if directions.len() / dimension != expected_rows {
            return Err(Error::domain(format!(
                "from_parts: got {} direction rows, expected {expected_rows}",
                directions.len() / dimension
            )));
        }
        let horizon = match horizon {
            Some(h) => {
                if !h.is_finite() || h <= S::zero() || h < prev {
                    return Err(Error::domain(format!(
                        "from_parts: horizon {h} must be positive and cover the last turn time"
                    )));
                }
                h
            }
            None => prev,
        };
        let mut turn_times = Vec::with_capacity(times.len() + 1);
        turn_times.push(S::zero());
        turn_times.extend_from_slice(&times);

        let n = times.len();
        let mut positions = vec![S::zero(); (n + 1) * dimension];
        let mut acc: SmallVec<[Compensated<S>; 4]> =
            SmallVec::from_elem(Compensated::zero(), dimension);
        for k in 0..n {
            let dt = turn_times[k + 1] - turn_times[k];
            let dir = &directions[k * dimension..(k + 1) * dimension];
            for (j, a) in acc.iter_mut().enumerate() {
                a.add(dt * dir[j]);
                positions[(k + 1) * dimension + j] = a.value();
            }
        }
        Ok(Trajectory {
            dimension,
            law,
            turn_times,
            directions,
            positions,
            horizon,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn law(&self) -> DirectionLaw {
        self.law
    }

    /// tau_0 = 0 through tau_n.
    pub fn turn_times(&self) -> &[S] {
        &self.turn_times
    }

    /// Number of turns n (one less than the stored times).
    pub fn turn_count(&self) -> usize {
        self.turn_times.len() - 1
    }

    /// End of the simulated window: T for time-stopped builds, tau_n
    /// otherwise. Queries beyond it are refused.
    pub fn horizon(&self) -> S {
        self.horizon
    }

    /// Direction row f_k.
    pub fn direction(&self, k: usize) -> &[S] {
        &self.directions[k * self.dimension..(k + 1) * self.dimension]
    }

    /// Number of stored direction rows (turn_count(), plus one for
    /// time-stopped builds).
    pub fn direction_count(&self) -> usize {
        self.directions.len() / self.dimension
    }

    /// Embedded position W_k.
    pub fn position(&self, k: usize) -> &[S] {
        &self.positions[k * self.dimension..(k + 1) * self.dimension]
    }

    /// Z(t) for 0 <= t <= horizon: the position at the latest turn before t
    /// plus travel along the current direction. Never extrapolates.
    pub fn position_at(&self, t: S) -> Result<Vec<S>> {
        if !t.is_finite() || t < S::zero() || t > self.horizon {
            return Err(Error::range(format!(
                "position_at: t = {t} outside the simulated window [0, {}]",
                self.horizon
            )));
        }
        let k = self.turn_times.partition_point(|&tau| tau <= t) - 1;
        let mut out = self.position(k).to_vec();
        let dt = t - self.turn_times[k];
        if dt > S::zero() {
            let dir = self.direction(k);
            for (o, &f) in out.iter_mut().zip(dir) {
                *o += dt * f;
            }
        }
        Ok(out)
    }

    /// Visits every linear piece in time order, including the trailing
    /// partial segment up to the horizon for time-stopped builds. Views
    /// borrow scratch space, so nothing is allocated per segment.
    pub fn for_each_segment<F: FnMut(SegmentView<'_, S>)>(&self, mut f: F) {
        let d = self.dimension;
        let n = self.turn_count();
        for k in 0..n {
            f(SegmentView {
                index: k,
                t0: self.turn_times[k],
                t1: self.turn_times[k + 1],
                p0: &self.positions[k * d..(k + 1) * d],
                p1: &self.positions[(k + 1) * d..(k + 2) * d],
                dir: &self.directions[k * d..(k + 1) * d],
            });
        }
        if self.direction_count() == n + 1 && self.horizon > self.turn_times[n] {
            let t0 = self.turn_times[n];
            let dt = self.horizon - t0;
            let p0 = &self.positions[n * d..(n + 1) * d];
            let dir = &self.directions[n * d..(n + 1) * d];
            let end: SmallVec<[S; 4]> =
                p0.iter().zip(dir).map(|(&p, &fd)| p + dt * fd).collect();
            f(SegmentView {
                index: n,
                t0,
                t1: self.horizon,
                p0,
                p1: &end,
                dir,
            });
        }
    }

    /// Drops all but the first two coordinates of directions and positions.
    /// Projected direction rows are deliberately not renormalized: the
    /// planar walk moves at speed l_k <= 1, which is the point of the
    /// projection.
    pub fn project_plane(&self) -> Result<Trajectory<S>> {
        if self.dimension < 2 {
            return Err(Error::domain(
                "project_plane: nothing to project in dimension 1",
            ));
        }
        if self.dimension == 2 {
            return Ok(self.clone());
        }
        let d = self.dimension;
        let take_plane = |row: &[S]| [row[0], row[1]];
        let mut directions = Vec::with_capacity(2 * (self.directions.len() / d));
        for row in self.directions.chunks(d) {
            directions.extend_from_slice(&take_plane(row));
        }
        let mut positions = Vec::with_capacity(2 * (self.positions.len() / d));
        for row in self.positions.chunks(d) {
            positions.extend_from_slice(&take_plane(row));
        }
        Ok(Trajectory {
            dimension: 2,
            law: self.law,
            turn_times: self.turn_times.clone(),
            directions,
            positions,
            horizon: self.horizon,
        })
    }

    /// Writes one row per turn: index, turn time, direction row (empty cells
    /// once directions are exhausted), position row. Floats carry 17
    /// significant digits so a read-back reproduces them exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let d = self.dimension;
        write!(out, "k,tau")?;
        for j in 0..d {
            write!(out, ",f{j}")?;
        }
        for j in 0..d {
            write!(out, ",w{j}")?;
        }
        writeln!(out)?;
        let rows = self.turn_times.len();
        for k in 0..rows {
            write!(out, "{k},{:.16e}", self.turn_times[k])?;
            if k < self.direction_count() {
                for &c in self.direction(k) {
                    write!(out, ",{c:.16e}")?;
                }
            } else {
                for _ in 0..d {
                    write!(out, ",")?;
                }
            }
            for &c in self.position(k) {
                write!(out, ",{c:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Samples every turn time, then every direction, from one stream, and
/// assembles the trajectory. Time-stopped builds draw one direction more
/// than there are turns (the direction in force at the horizon).
pub fn build_trajectory<S: Real, R: Rng + ?Sized>(
    rate: &RateFunction<S>,
    model: &DirectionModel,
    stop: Stop<S>,
    rng: &mut R,
) -> Result<Trajectory<S>> {
    let mut sampler = InversionSampler::new(rate, stop)?;
    let mut times = match stop {
        Stop::ByCount(n) => Vec::with_capacity(n),
        Stop::ByTime(_) => Vec::new(),
    };
    while let Some(t) = sampler.next_time(rng)? {
        times.push(t);
    }
    let d = model.dimension();
    let rows = times.len() + usize::from(matches!(stop, Stop::ByTime(_)));
    let mut directions = vec![S::zero(); rows * d];
    for row in directions.chunks_mut(d) {
        model.sample_into(rng, row);
    }
    let horizon = match stop {
        Stop::ByTime(t) => Some(t),
        Stop::ByCount(_) => None,
    };
    Trajectory::from_parts(model.law(), d, times, directions, horizon)
}
