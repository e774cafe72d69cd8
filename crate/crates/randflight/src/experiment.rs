//! Config-driven ensemble runner: replicas fan out across a worker pool,
//! each seeded from its own substream, and aggregation runs sequentially
//! in replica order so results never depend on thread count.

use crate::analysis::{self, RecurrenceReport, Region};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::geometry;
use crate::rates::{envelope_constants, RateKind};
use crate::rng;
use crate::walk::build_trajectory;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};

/// Aggregate statistics at one checkpoint turn.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointSummary {
    pub turn: usize,
    /// Replicas that reached this turn before stopping.
    pub samples: usize,
    /// Of those, how many sat inside the recurrence region at the turn.
    pub in_region: usize,
    /// Histogram of planar ring indices (empty in dimension 1).
    pub rings: BTreeMap<u64, usize>,
    /// Inter-turn gaps tau_{c+1} - tau_c from replicas holding both turns.
    pub gaps: Vec<f64>,
    /// Turn-time envelope violations; populated only for the polynomial
    /// rate family with alpha < 1, where the envelopes exist.
    pub envelope: Option<EnvelopeCount>,
}

impl CheckpointSummary {
    /// At-turn occupancy fraction among replicas that reached the turn.
    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.in_region as f64 / self.samples as f64
        }
    }
}

/// Counts of replicas breaching the lower and upper turn-time envelopes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnvelopeCount {
    pub low: usize,
    pub high: usize,
}

/// Replicas hitting the region during the dyadic window [lo, hi) of
/// segment indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowSummary {
    pub level: u32,
    pub lo: usize,
    pub hi: usize,
    pub hits: usize,
}

impl WindowSummary {
    /// Hit fraction over the full ensemble.
    pub fn fraction(&self, replicas: usize) -> f64 {
        self.hits as f64 / replicas.max(1) as f64
    }
}

/// Everything an ensemble run produces, in replica order.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub replicas: usize,
    pub reports: Vec<RecurrenceReport<f64>>,
    pub checkpoints: Vec<CheckpointSummary>,
    pub windows: Vec<WindowSummary>,
}

#[derive(Clone, Copy)]
struct CheckpointSample {
    reached: bool,
    in_region: bool,
    ring: Option<u64>,
    gap: Option<f64>,
    low: bool,
    high: bool,
}

impl CheckpointSample {
    fn unreached() -> Self {
        CheckpointSample {
            reached: false,
            in_region: false,
            ring: None,
            gap: None,
            low: false,
            high: false,
        }
    }
}

struct ReplicaOutcome {
    report: RecurrenceReport<f64>,
    last_segment: usize,
    samples: Vec<CheckpointSample>,
}

/// Runs the configured ensemble. `threads` sizes a dedicated worker pool;
/// `None` uses the global default. Output is independent of either choice.
pub fn run_ensemble(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let rate = cfg.rate_function()?;
    let model = cfg.direction_model()?;
    let region = cfg.region();
    let stop = cfg.stop();
    let rho = cfg.rho;

    // envelope edges c0 k^{1/(1-alpha)} and c1 k^{1/(1-alpha)} per checkpoint
    let edges: Option<Vec<(f64, f64)>> = match *rate.kind() {
        RateKind::PowerLaw { alpha } if alpha < 1.0 => {
            let (c0, c1) = envelope_constants(alpha)?;
            let exponent = (1.0 - alpha).recip();
            Some(
                cfg.checkpoints
                    .iter()
                    .map(|&k| {
                        let scale = (k as f64).powf(exponent);
                        (c0 * scale, c1 * scale)
                    })
                    .collect(),
            )
        }
        _ => None,
    };

    let one_replica = |r: usize| -> Result<ReplicaOutcome> {
        let mut stream = rng::substream(cfg.master_seed, r as u64);
        let tr = build_trajectory(&rate, &model, stop, &mut stream)?;
        let report = analysis::detect_hits(&tr, rho, region)?;
        let planar = tr.dimension() >= 2;
        let times = tr.turn_times();
        let samples = cfg
            .checkpoints
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if c > tr.turn_count() {
                    return Ok(CheckpointSample::unreached());
                }
                let w = tr.position(c);
                let in_region = match region {
                    Region::Box => geometry::segment_hits_box(w, w, rho)?,
                    Region::PlanarDisc => geometry::segment_hits_disc(&w[..2], &w[..2], rho)?,
                };
                let (low, high) = match &edges {
                    Some(e) => (times[c] <= e[i].0, times[c] >= e[i].1),
                    None => (false, false),
                };
                Ok(CheckpointSample {
                    reached: true,
                    in_region,
                    ring: planar.then(|| geometry::ring_index(&w[..2])),
                    gap: (c < tr.turn_count()).then(|| times[c + 1] - times[c]),
                    low,
                    high,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let has_trailing = tr.horizon() > *times.last().expect("tau_0 always present");
        let segments = tr.turn_count() + usize::from(has_trailing);
        Ok(ReplicaOutcome {
            report,
            last_segment: segments.saturating_sub(1),
            samples,
        })
    };

    let fan_out = || -> Result<Vec<ReplicaOutcome>> {
        (0..cfg.replicas).into_par_iter().map(one_replica).collect()
    };
    let outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(fan_out),
        None => fan_out(),
    }?;

    let mut checkpoints: Vec<CheckpointSummary> = cfg
        .checkpoints
        .iter()
        .map(|&turn| CheckpointSummary {
            turn,
            samples: 0,
            in_region: 0,
            rings: BTreeMap::new(),
            gaps: Vec::new(),
            envelope: edges.as_ref().map(|_| EnvelopeCount::default()),
        })
        .collect();
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut max_segment = 0usize;
    for out in outcomes {
        max_segment = max_segment.max(out.last_segment);
        for (agg, s) in checkpoints.iter_mut().zip(&out.samples) {
            if !s.reached {
                continue;
            }
            agg.samples += 1;
            agg.in_region += usize::from(s.in_region);
            if let Some(r) = s.ring {
                *agg.rings.entry(r).or_insert(0) += 1;
            }
            if let Some(g) = s.gap {
                agg.gaps.push(g);
            }
            if let Some(env) = agg.envelope.as_mut() {
                env.low += usize::from(s.low);
                env.high += usize::from(s.high);
            }
        }
        reports.push(out.report);
    }

    let mut windows = Vec::new();
    let mut level = 0u32;
    while (1usize << level) <= max_segment {
        windows.push(WindowSummary {
            level,
            lo: 1 << level,
            hi: 1 << (level + 1),
            hits: 0,
        });
        level += 1;
    }
    for rep in &reports {
        for w in &mut windows {
            let first = rep.hit_intervals.partition_point(|&n| n < w.lo);
            if first < rep.hit_intervals.len() && rep.hit_intervals[first] < w.hi {
                w.hits += 1;
            }
        }
    }

    Ok(EnsembleSummary {
        replicas: cfg.replicas,
        reports,
        checkpoints,
        windows,
    })
}

/// Nearest-rank quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    debug_assert!(m > 0);
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

/// Writes the run's files under the config's output directory: the config
/// echo, per-replica hit reports as JSON lines, and the plot-ready CSV
/// tables. Floats go out at 17 significant digits so reruns byte-compare.
pub fn write_outputs(cfg: &ExperimentConfig, summary: &EnsembleSummary) -> Result<()> {
    let dir = &cfg.outputs;
    fs::create_dir_all(dir)?;

    let mut echo = serde_json::to_string_pretty(cfg)?;
    echo.push('\n');
    fs::write(dir.join("config.json"), echo)?;

    let mut jsonl = BufWriter::new(File::create(dir.join("replicas.jsonl"))?);
    for rep in &summary.reports {
        serde_json::to_writer(&mut jsonl, rep)?;
        jsonl.write_all(b"\n")?;
    }
    jsonl.flush()?;

    let mut freq = String::from("turn,samples,in_region,fraction\n");
    let mut rings = String::from("turn,ring,count\n");
    let mut gaps = String::from("turn,count,q50,q90,q99,max\n");
    let mut envelope = String::from("turn,samples,low_violations,high_violations,low_bound,high_bound\n");
    for c in &summary.checkpoints {
        freq += &format!(
            "{},{},{},{:.16e}\n",
            c.turn,
            c.samples,
            c.in_region,
            c.fraction()
        );
        for (&ring, &count) in &c.rings {
            rings += &format!("{},{ring},{count}\n", c.turn);
        }
        if !c.gaps.is_empty() {
            let mut sorted = c.gaps.clone();
            sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("gaps are finite"));
            gaps += &format!(
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                c.turn,
                sorted.len(),
                quantile(&sorted, 0.5),
                quantile(&sorted, 0.9),
                quantile(&sorted, 0.99),
                sorted[sorted.len() - 1]
            );
        }
        if let Some(env) = c.envelope {
            let k = c.turn as f64;
            envelope += &format!(
                "{},{},{},{},{:.16e},{:.16e}\n",
                c.turn,
                c.samples,
                env.low,
                env.high,
                2.0 * (-k / 18.0).exp(),
                2.0 * (-k / 6.0).exp()
            );
        }
    }
    fs::write(dir.join("return_frequency.csv"), freq)?;
    fs::write(dir.join("ring_occupancy.csv"), rings)?;
    fs::write(dir.join("gap_quantiles.csv"), gaps)?;
    fs::write(dir.join("envelope.csv"), envelope)?;

    let mut wins = String::from("level,lo,hi,hits,replicas,fraction\n");
    for w in &summary.windows {
        wins += &format!(
            "{},{},{},{},{},{:.16e}\n",
            w.level,
            w.lo,
            w.hi,
            w.hits,
            summary.replicas,
            w.fraction(summary.replicas)
        );
    }
    fs::write(dir.join("window_hits.csv"), wins)?;
    Ok(())
}
