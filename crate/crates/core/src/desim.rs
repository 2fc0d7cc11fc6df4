//! Markov-jump simulation of the age process.
//!
//! With exponential service every packet in the system has a memoryless
//! residual, so the next event is an exponential race between arrivals
//! (total rate `sum lambda_i`) and a departure (rate `mu` when busy). Under
//! PS the departing packet is uniform over those present; under FGFS it is
//! the oldest. This is exact for exponential service only.
//!
//! Each replication draws from two ChaCha8 streams derived from
//! `(seed, replication)`: one for event times and kinds, one for the PS
//! packet pick. PS and FGFS runs of the same configuration therefore share
//! their occupancy path (common random numbers).

use std::collections::VecDeque;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::model::{Discipline, Overflow, QueueModel};
use crate::numfmt::sig12;

pub const DEFAULT_WARMUP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{name} must be {constraint}, got {value}")]
    InvalidRate {
        name: String,
        constraint: &'static str,
        value: f64,
    },
    #[error("at least one source must have a positive arrival rate")]
    NoArrivals,
    #[error("horizon must be positive")]
    Horizon,
    #[error("warmup fraction must lie in [0, 1), got {0}")]
    Warmup(f64),
    #[error("need at least one replication")]
    Replications,
    #[error("buffer capacity must be at least 1")]
    Capacity,
    #[error("source {src} is not one of 1..={sources}")]
    Source { src: usize, sources: usize },
    #[error("replication {replication} had no delivery after warmup; increase the horizon")]
    NoDelivery { replication: usize },
    #[error("trace needs max_points >= 2, got {0}")]
    TracePoints(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Total events (arrivals, including blocked ones, and departures).
    Events(u64),
    Time(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub queue: QueueModel,
    /// Per-source arrival rates; sources are numbered from 1.
    pub lambdas: Vec<f64>,
    pub mu: f64,
    pub horizon: Horizon,
    /// Fraction of the horizon discarded before measuring.
    pub warmup: f64,
    pub seed: u64,
    pub replications: usize,
}

impl SimConfig {
    pub fn new(
        queue: QueueModel,
        lambdas: Vec<f64>,
        mu: f64,
        horizon: Horizon,
        seed: u64,
        replications: usize,
    ) -> Self {
        SimConfig {
            queue,
            lambdas,
            mu,
            horizon,
            warmup: DEFAULT_WARMUP,
            seed,
            replications,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(SimError::InvalidRate {
                name: "mu".into(),
                constraint: "positive and finite",
                value: self.mu,
            });
        }
        for (k, &l) in self.lambdas.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(SimError::InvalidRate {
                    name: format!("lambda{}", k + 1),
                    constraint: "nonnegative and finite",
                    value: l,
                });
            }
        }
        if !self.lambdas.iter().any(|l| *l > 0.0) {
            return Err(SimError::NoArrivals);
        }
        match self.horizon {
            Horizon::Events(0) => return Err(SimError::Horizon),
            Horizon::Time(t) if !(t.is_finite() && t > 0.0) => return Err(SimError::Horizon),
            _ => {}
        }
        if !(0.0..1.0).contains(&self.warmup) {
            return Err(SimError::Warmup(self.warmup));
        }
        if self.replications == 0 {
            return Err(SimError::Replications);
        }
        if self.queue.capacity == Some(0) {
            return Err(SimError::Capacity);
        }
        Ok(())
    }

    fn active_sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.lambdas
            .iter()
            .enumerate()
            .filter(|(_, l)| **l > 0.0)
            .map(|(k, _)| k + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceEstimate {
    pub source: usize,
    pub mean_age: f64,
    /// Half-width of the 95% Student-t interval over replications;
    /// infinite with a single replication.
    pub ci95: f64,
    /// Departures that reset the age, summed over replications.
    pub deliveries: u64,
    /// All departures of this source inside the window, fresh or stale.
    pub departures: u64,
    pub replication_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    /// One entry per source with a positive arrival rate.
    pub sources: Vec<SourceEstimate>,
    pub events: u64,
    /// Measured (post-warmup) time, summed over replications.
    pub measured_time: f64,
    pub seed: u64,
    pub replications: usize,
}

impl SimEstimate {
    pub fn source(&self, source: usize) -> Option<&SourceEstimate> {
        self.sources.iter().find(|s| s.source == source)
    }
}

struct RepResult {
    area: Vec<f64>,
    deliveries: Vec<u64>,
    departures: Vec<u64>,
    measured: f64,
    events: u64,
}

struct TraceSink<'a> {
    source: usize,
    max_points: usize,
    points: &'a mut Vec<(f64, f64)>,
    complete: bool,
}

impl TraceSink<'_> {
    fn push(&mut self, t: f64, age: f64) {
        if self.points.len() < self.max_points {
            self.points.push((t, age));
        } else {
            self.complete = false;
        }
    }
}

fn streams(seed: u64, replication: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut events = ChaCha8Rng::seed_from_u64(seed);
    events.set_stream(2 * replication as u64);
    let mut picks = ChaCha8Rng::seed_from_u64(seed);
    picks.set_stream(2 * replication as u64 + 1);
    (events, picks)
}

fn run_replication(c: &SimConfig, replication: usize, mut trace: Option<&mut TraceSink>) -> RepResult {
    let (mut ev, mut pick) = streams(c.seed, replication);
    let sources = c.lambdas.len();
    let total_lambda: f64 = c.lambdas.iter().sum();
    let last_active = c.active_sources().last().unwrap_or(1);
    let mut packets: VecDeque<(usize, f64)> = VecDeque::new();
    // Generation time of the freshest delivered packet per source; the age
    // starts at zero.
    let mut last_gen = vec![0.0f64; sources];
    let mut area = vec![0.0; sources];
    let mut deliveries = vec![0u64; sources];
    let mut departures = vec![0u64; sources];

    let (warm_events, total_events, warm_time, end_time) = match c.horizon {
        Horizon::Events(n) => (((n as f64) * c.warmup).ceil() as u64, n, f64::INFINITY, f64::INFINITY),
        Horizon::Time(t) => (u64::MAX, u64::MAX, t * c.warmup, t),
    };
    let mut t = 0.0f64;
    let mut events = 0u64;
    let mut measuring = c.warmup == 0.0;
    let mut start = 0.0;

    if measuring {
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(0.0, 0.0);
        }
    }

    loop {
        let busy = !packets.is_empty();
        let rate = total_lambda + if busy { c.mu } else { 0.0 };
        let e: f64 = ev.sample(Exp1);
        let mut next = t + e / rate;

        let stop = next >= end_time;
        if stop {
            next = end_time;
        }
        // Start measuring at the warmup instant of a time horizon.
        if !measuring && next >= warm_time {
            t = warm_time;
            start = warm_time;
            measuring = true;
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(t, t - last_gen[tr.source - 1]);
            }
        }
        if measuring {
            for s in 0..sources {
                let (a0, a1) = (t - last_gen[s], next - last_gen[s]);
                area[s] += 0.5 * (a0 + a1) * (next - t);
            }
        }
        t = next;
        if stop {
            break;
        }

        // Event kind from the same stream as the holding time.
        let u: f64 = ev.random::<f64>() * rate;
        if u < total_lambda {
            let mut acc = 0.0;
            let mut src = last_active;
            for (k, l) in c.lambdas.iter().enumerate() {
                acc += l;
                if u < acc && *l > 0.0 {
                    src = k + 1;
                    break;
                }
            }
            let full = c.queue.capacity.is_some_and(|cap| packets.len() >= cap);
            if !full {
                packets.push_back((src, t));
            } else {
                match c.queue.overflow {
                    Overflow::DropNew => {}
                    Overflow::ReplaceNewest => {
                        *packets.back_mut().unwrap() = (src, t);
                    }
                    Overflow::ReplaceOldest => {
                        packets.pop_front();
                        packets.push_back((src, t));
                    }
                }
            }
        } else {
            let n = packets.len();
            let k = match c.queue.discipline {
                Discipline::Ps if n > 1 => pick.random_range(0..n),
                _ => 0,
            };
            let (src, g) = packets.remove(k).unwrap();
            let s = src - 1;
            if measuring {
                departures[s] += 1;
            }
            if g > last_gen[s] {
                let before = t - last_gen[s];
                last_gen[s] = g;
                if measuring {
                    deliveries[s] += 1;
                    if let Some(tr) = trace.as_deref_mut() {
                        if tr.source == src {
                            tr.push(t, before);
                            tr.push(t, t - g);
                        }
                    }
                }
            }
        }
        events += 1;
        if events >= total_events {
            break;
        }
        if !measuring && events >= warm_events {
            measuring = true;
            start = t;
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(t, t - last_gen[tr.source - 1]);
            }
        }
    }
    if let Some(tr) = trace {
        if measuring && tr.points.last().is_none_or(|p| p.0 < t) {
            tr.push(t, t - last_gen[tr.source - 1]);
        }
    }
    RepResult {
        area,
        deliveries,
        departures,
        measured: if measuring { t - start } else { 0.0 },
        events,
    }
}

/// Two-sided 95% Student-t half-width for the mean of `xs`.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    t * (var / n as f64).sqrt()
}

pub fn simulate(c: &SimConfig) -> Result<SimEstimate, SimError> {
    c.validate()?;
    let active: Vec<usize> = c.active_sources().collect();
    let mut means = vec![Vec::with_capacity(c.replications); c.lambdas.len()];
    let mut deliveries = vec![0u64; c.lambdas.len()];
    let mut departures = vec![0u64; c.lambdas.len()];
    let mut events = 0;
    let mut measured_time = 0.0;
    for r in 0..c.replications {
        let rep = run_replication(c, r, None);
        if rep.measured <= 0.0 || rep.deliveries.iter().all(|d| *d == 0) {
            return Err(SimError::NoDelivery { replication: r });
        }
        for &s in &active {
            means[s - 1].push(rep.area[s - 1] / rep.measured);
            deliveries[s - 1] += rep.deliveries[s - 1];
            departures[s - 1] += rep.departures[s - 1];
        }
        events += rep.events;
        measured_time += rep.measured;
    }
    let sources = active
        .iter()
        .map(|&s| {
            let xs = std::mem::take(&mut means[s - 1]);
            SourceEstimate {
                source: s,
                mean_age: xs.iter().sum::<f64>() / xs.len() as f64,
                ci95: ci95_half_width(&xs),
                deliveries: deliveries[s - 1],
                departures: departures[s - 1],
                replication_means: xs,
            }
        })
        .collect();
    Ok(SimEstimate {
        sources,
        events,
        measured_time,
        seed: c.seed,
        replications: c.replications,
    })
}

/// Breakpoints of the age path of one source in the first replication's
/// measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub source: usize,
    pub points: Vec<(f64, f64)>,
    /// False when `max_points` cut the path short.
    pub complete: bool,
}

impl Trace {
    /// Integral of the piecewise-linear path between its first and last point.
    pub fn integral(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    }

    pub fn duration(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0.0,
        }
    }
}

pub fn sawtooth_trace(c: &SimConfig, source: usize, max_points: usize) -> Result<Trace, SimError> {
    c.validate()?;
    if max_points < 2 {
        return Err(SimError::TracePoints(max_points));
    }
    if source == 0 || source > c.lambdas.len() {
        return Err(SimError::Source {
            src: source,
            sources: c.lambdas.len(),
        });
    }
    let mut points = Vec::new();
    let mut sink = TraceSink {
        source,
        max_points,
        points: &mut points,
        complete: true,
    };
    run_replication(c, 0, Some(&mut sink));
    let complete = sink.complete;
    Ok(Trace {
        source,
        points,
        complete,
    })
}

pub const ESTIMATES_HEADER: &str = "model,lambda1,lambda2,mu,source,mean_age,ci95,seed,events";
pub const TRACE_HEADER: &str = "time,age,source";

/// One CSV row per source of `est`.
pub fn estimate_rows(c: &SimConfig, est: &SimEstimate) -> Vec<String> {
    let l2 = c.lambdas.get(1).copied().unwrap_or(0.0);
    est.sources
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                c.queue.label(),
                sig12(c.lambdas[0]),
                sig12(l2),
                sig12(c.mu),
                s.source,
                sig12(s.mean_age),
                sig12(s.ci95),
                est.seed,
                est.events
            )
        })
        .collect()
}

pub fn write_estimates_csv<W: Write>(w: &mut W, runs: &[(&SimConfig, &SimEstimate)]) -> io::Result<()> {
    writeln!(w, "{ESTIMATES_HEADER}")?;
    for (c, e) in runs {
        for row in estimate_rows(c, e) {
            writeln!(w, "{row}")?;
        }
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(w: &mut W, trace: &Trace) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for (t, a) in &trace.points {
        writeln!(w, "{},{},{}", sig12(*t), sig12(*a), trace.source)?;
    }
    Ok(())
}
