use std::collections::{BTreeMap, VecDeque};

use super::{solve_age_system, Reset, ResetMap, ShsError, ShsModel, State, Transition};
use crate::closed_form::{ClosedFormId, RateParams};
use crate::model::Discipline;

pub const DEFAULT_CAP_ONE_SOURCE: usize = 60;
pub const DEFAULT_CAP_TWO_SOURCES: usize = 8;

/// Infinite-buffer queues are approximated by blocking arrivals once
/// `max_packets` are in the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub max_packets: usize,
    /// Largest admissible `max_packets`; `None` uses the per-source default.
    pub cap: Option<usize>,
}

impl TruncationSpec {
    pub fn new(max_packets: usize) -> Self {
        TruncationSpec { max_packets, cap: None }
    }

    pub fn with_cap(max_packets: usize, cap: usize) -> Self {
        TruncationSpec {
            max_packets,
            cap: Some(cap),
        }
    }
}

fn zero_slots(d: usize) -> Vec<Reset> {
    vec![Reset::Zero; d]
}

fn growth(bits: &[u8]) -> Vec<bool> {
    bits.iter().map(|b| *b == 1).collect()
}

/// The SHS table of a finite-buffer model at rates `p`.
pub fn build_finite_model(id: ClosedFormId, p: &RateParams) -> Result<ShsModel, ShsError> {
    use Reset::{Copy as C, Zero as Z};
    let (lambda, mu) = (p.lambda(), p.mu());
    let t = |id, rate, from, to, reset: Vec<Reset>| Transition {
        id,
        rate,
        from,
        to,
        reset: ResetMap(reset),
    };
    match id {
        ClosedFormId::Mm11 | ClosedFormId::Mm11Star => {
            let states = vec![
                State {
                    label: "0".into(),
                    growth: growth(&[1, 0]),
                },
                State {
                    label: "1".into(),
                    growth: growth(&[1, 1]),
                },
            ];
            let busy_arrival = if id == ClosedFormId::Mm11 {
                vec![C(0), C(1)]
            } else {
                vec![C(0), Z]
            };
            let transitions = vec![
                t(0, lambda, 0, 1, vec![C(0), Z]),
                t(1, mu, 1, 0, vec![C(1), Z]),
                t(2, lambda, 1, 1, busy_arrival),
            ];
            ShsModel::new(id.name(), states, 2, transitions, 1)
        }
        ClosedFormId::Mm1Fgfs | ClosedFormId::Mm1PsLowerBound => Err(ShsError::NotFinite(id)),
        _ => {
            let states = ["0", "1", "2"]
                .iter()
                .zip([[1, 0, 0], [1, 1, 0], [1, 1, 1]])
                .map(|(l, b)| State {
                    label: l.to_string(),
                    growth: growth(&b),
                })
                .collect();
            let full_arrival = match id {
                ClosedFormId::Mm12Ps | ClosedFormId::Mm12Fgfs => vec![C(0), C(1), C(2)],
                ClosedFormId::Mm12StarPs | ClosedFormId::Mm12StarFgfs => vec![C(0), C(1), Z],
                _ => vec![C(0), C(2), Z],
            };
            let ps = matches!(
                id,
                ClosedFormId::Mm12Ps | ClosedFormId::Mm12StarPs | ClosedFormId::Mm12Star2Ps
            );
            let mut transitions = vec![
                t(0, lambda, 0, 1, vec![C(0), Z, Z]),
                t(1, mu, 1, 0, vec![C(1), Z, Z]),
                t(2, lambda, 1, 2, vec![C(0), C(1), Z]),
            ];
            if ps {
                transitions.push(t(3, mu / 2.0, 2, 1, vec![C(1), C(2), Z]));
                transitions.push(t(4, mu / 2.0, 2, 1, vec![C(2), C(2), Z]));
                transitions.push(t(5, lambda, 2, 2, full_arrival));
            } else {
                transitions.push(t(3, mu, 2, 1, vec![C(1), C(2), Z]));
                transitions.push(t(4, lambda, 2, 2, full_arrival));
            }
            ShsModel::new(id.name(), states, 3, transitions, 1)
        }
    }
}

fn check_rates(lambdas: &[f64], mu: f64, soi: usize) -> Result<(), ShsError> {
    if lambdas.is_empty() || lambdas.len() > 2 {
        return Err(ShsError::SourceCount(lambdas.len()));
    }
    if soi == 0 || soi > lambdas.len() {
        return Err(ShsError::SourceOfInterest {
            soi,
            sources: lambdas.len(),
        });
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(ShsError::InvalidRate {
            name: "mu".into(),
            constraint: "positive and finite",
            value: mu,
        });
    }
    for (k, &l) in lambdas.iter().enumerate() {
        let name = format!("lambda{}", k + 1);
        if k + 1 == soi {
            if !(l.is_finite() && l > 0.0) {
                return Err(ShsError::InvalidRate {
                    name,
                    constraint: "positive and finite for the source of interest",
                    value: l,
                });
            }
        } else if !(l.is_finite() && l >= 0.0) {
            return Err(ShsError::InvalidRate {
                name,
                constraint: "nonnegative and finite",
                value: l,
            });
        }
    }
    Ok(())
}

/// M/M/1 with `lambdas.len()` Poisson sources, truncated at `t.max_packets`
/// with blocking. Discrete states are the source labels of the packets in
/// the system, oldest first; coordinate `k >= 1` is the age of the packet at
/// position `k` when it belongs to the source of interest (1-based `soi`).
pub fn build_truncated_mm1(
    discipline: Discipline,
    lambdas: &[f64],
    mu: f64,
    soi: usize,
    t: &TruncationSpec,
) -> Result<ShsModel, ShsError> {
    check_rates(lambdas, mu, soi)?;
    let n_max = t.max_packets;
    if n_max == 0 {
        return Err(ShsError::ZeroTruncation);
    }
    let cap = t.cap.unwrap_or(if lambdas.len() == 1 {
        DEFAULT_CAP_ONE_SOURCE
    } else {
        DEFAULT_CAP_TWO_SOURCES
    });
    if n_max > cap {
        return Err(ShsError::TruncationCap {
            n: n_max,
            cap,
            sources: lambdas.len(),
        });
    }
    let d = n_max + 1;
    let soi = soi as u8;

    // Breadth-first from the empty system so unreachable label sequences
    // (a silent source) never appear.
    type Edge = (f64, Vec<u8>, Vec<Reset>);
    let mut edges: BTreeMap<Vec<u8>, Vec<Edge>> = BTreeMap::new();
    let mut queue = VecDeque::from([Vec::<u8>::new()]);
    while let Some(seq) = queue.pop_front() {
        if edges.contains_key(&seq) {
            continue;
        }
        let n = seq.len();
        let mut out = Vec::new();
        let positions: Vec<usize> = match (discipline, n) {
            (_, 0) => vec![],
            (Discipline::Ps, _) => (1..=n).collect(),
            (Discipline::Fgfs, _) => vec![1],
        };
        let share = match discipline {
            Discipline::Ps => mu / n.max(1) as f64,
            Discipline::Fgfs => mu,
        };
        for &k in &positions {
            let mut next = seq.clone();
            let gone = next.remove(k - 1);
            let fresh = gone == soi;
            let mut reset = zero_slots(d);
            reset[0] = Reset::Copy(if fresh { k } else { 0 });
            for (p, slot) in reset.iter_mut().enumerate().take(n).skip(1) {
                let old = if p < k { p } else { p + 1 };
                if seq[old - 1] != soi {
                    continue;
                }
                // Packets older than a delivered one carry no new information.
                *slot = Reset::Copy(if fresh && old < k { k } else { old });
            }
            out.push((share, next, reset));
        }
        for (src, &rate) in lambdas.iter().enumerate() {
            if rate == 0.0 {
                continue;
            }
            let src = src as u8 + 1;
            let mut reset = zero_slots(d);
            reset[0] = Reset::Copy(0);
            for p in 1..=n {
                if seq[p - 1] == soi {
                    reset[p] = Reset::Copy(p);
                }
            }
            let next = if n < n_max {
                let mut s = seq.clone();
                s.push(src);
                s
            } else {
                seq.clone()
            };
            out.push((rate, next, reset));
        }
        for (_, next, _) in &out {
            if !edges.contains_key(next) {
                queue.push_back(next.clone());
            }
        }
        edges.insert(seq, out);
    }

    let mut seqs: Vec<Vec<u8>> = edges.keys().cloned().collect();
    seqs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let index: BTreeMap<&Vec<u8>, usize> = seqs.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let label = |s: &[u8]| -> String {
        if lambdas.len() == 1 {
            s.len().to_string()
        } else if s.is_empty() {
            "empty".into()
        } else {
            s.iter().map(|c| char::from(b'0' + c)).collect()
        }
    };
    let states = seqs
        .iter()
        .map(|s| {
            let mut g = vec![false; d];
            g[0] = true;
            for (p, c) in s.iter().enumerate() {
                g[p + 1] = *c == soi;
            }
            State {
                label: label(s),
                growth: g,
            }
        })
        .collect();
    let mut transitions = Vec::new();
    for s in &seqs {
        for (rate, next, reset) in &edges[s] {
            transitions.push(Transition {
                id: transitions.len(),
                rate: *rate,
                from: index[s],
                to: index[next],
                reset: ResetMap(reset.clone()),
            });
        }
    }
    let name = format!("mm1-{}-{}src-N{}", discipline.name(), lambdas.len(), n_max);
    ShsModel::new(name, states, d, transitions, soi as usize)
}

/// Two sources sharing a preemptive single-packet server: an arrival of
/// either source replaces the packet in service.
pub fn build_two_source_mm11_star(lambdas: &[f64; 2], mu: f64, soi: usize) -> Result<ShsModel, ShsError> {
    use Reset::{Copy as C, Zero as Z};
    check_rates(lambdas, mu, soi)?;
    let other = 3 - soi;
    let (ls, lo) = (lambdas[soi - 1], lambdas[other - 1]);
    let mut states = vec![
        State {
            label: "empty".into(),
            growth: growth(&[1, 0]),
        },
        State {
            label: soi.to_string(),
            growth: growth(&[1, 1]),
        },
    ];
    let mut transitions = Vec::new();
    let mut push = |rate: f64, from, to, reset: Vec<Reset>| {
        if rate > 0.0 {
            transitions.push(Transition {
                id: transitions.len(),
                rate,
                from,
                to,
                reset: ResetMap(reset),
            });
        }
    };
    push(ls, 0, 1, vec![C(0), Z]);
    push(lo, 0, 2, vec![C(0), Z]);
    push(mu, 1, 0, vec![C(1), Z]);
    push(ls, 1, 1, vec![C(0), Z]);
    push(lo, 1, 2, vec![C(0), Z]);
    if lo > 0.0 {
        push(mu, 2, 0, vec![C(0), Z]);
        push(ls, 2, 1, vec![C(0), Z]);
        push(lo, 2, 2, vec![C(0), Z]);
        states.push(State {
            label: other.to_string(),
            growth: growth(&[1, 0]),
        });
    }
    ShsModel::new("mm11star-2src", states, 2, transitions, soi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPoint {
    pub n: usize,
    pub aaoi: f64,
    /// `|aaoi(N) - aaoi(N_prev)| / aaoi(N)`; `None` for the first point.
    pub rel_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSweep {
    pub points: Vec<TruncationPoint>,
    /// First `N` whose change from its predecessor is below the tolerance.
    pub converged_at: Option<usize>,
}

impl TruncationSweep {
    pub fn last(&self) -> &TruncationPoint {
        self.points.last().expect("sweep has at least one point")
    }
}

/// Solves the truncated model for each `N` in `n_list` (strictly increasing).
#[allow(clippy::too_many_arguments)]
pub fn aaoi_vs_truncation(
    discipline: Discipline,
    lambdas: &[f64],
    mu: f64,
    soi: usize,
    n_list: &[usize],
    cap: Option<usize>,
    tolerance: f64,
) -> Result<TruncationSweep, ShsError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ShsError::TruncationList);
    }
    let mut points: Vec<TruncationPoint> = Vec::new();
    let mut converged_at = None;
    for &n in n_list {
        let spec = TruncationSpec { max_packets: n, cap };
        let m = build_truncated_mm1(discipline, lambdas, mu, soi, &spec)?;
        let aaoi = solve_age_system(&m)?.aaoi;
        let rel_change = points.last().map(|p| (aaoi - p.aaoi).abs() / aaoi);
        if converged_at.is_none() && rel_change.is_some_and(|c| c < tolerance) {
            converged_at = Some(n);
        }
        points.push(TruncationPoint { n, aaoi, rel_change });
    }
    Ok(TruncationSweep { points, converged_at })
}
