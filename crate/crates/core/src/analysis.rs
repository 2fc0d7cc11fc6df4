//! Bound sweeps, extremum location, conjecture evidence and two-source
//! comparisons built on the closed forms, the SHS solver and the simulator.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::closed_form::{
    conjecture_bounds, ratio_at_load, ratio_limit, ClosedFormError, ClosedFormId, ConjectureBounds, Limit,
};
use crate::desim::{ci95_half_width, simulate, Horizon, SimConfig, SimError};
use crate::model::{Discipline, ModelId, Overflow, QueueModel};
use crate::numfmt::sig12;
use crate::poly::{positive_roots, Poly};
use crate::shs::{build_truncated_mm1, build_two_source_mm11_star, solve_age_system, ShsError, TruncationSpec};

/// Slack allowed on every stated bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;
/// Ratios at `rho = 1e-4` and `1e4` must be this close to the stated limits.
pub const LIMIT_TOLERANCE: f64 = 1e-3;
pub const LIMIT_PROBE_LOW: f64 = 1e-4;
pub const LIMIT_PROBE_HIGH: f64 = 1e4;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Shs(#[from] ShsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("load grid is empty")]
    EmptyGrid,
    #[error("{prop} needs loads in {domain}, got {rho}")]
    InadmissibleLoad {
        prop: PropositionId,
        rho: f64,
        domain: &'static str,
    },
    #[error("{prop} has no interior extremum in ({lo}, {hi})")]
    NoExtremum { prop: PropositionId, lo: f64, hi: f64 },
    #[error("{0} is not a ratio bound")]
    NotRatio(PropositionId),
    #[error("unknown proposition '{name}'; valid: {valid}")]
    UnknownProposition { name: String, valid: String },
    #[error("unknown sweep model '{name}'; valid: ps, fgfs, mm11star")]
    UnknownSweepModel { name: String },
    #[error("lambda2 values must be positive and finite, got {0}")]
    Lambda2(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

/// `aaoi(num) / aaoi(den)` bounded by `[lower, upper]` for every load.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioBound {
    pub num: ClosedFormId,
    pub den: ClosedFormId,
    pub lower: f64,
    pub upper: f64,
    pub limit_zero: f64,
    pub limit_infinity: f64,
    /// Interior extremum and the printed polynomial whose positive root is
    /// its location (coefficients lowest power first).
    pub extremum: Option<(ExtremumKind, Vec<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropositionId {
    P2,
    P4,
    P5,
    P8,
    P9Star,
    Cor1,
    P10Mm11VsStar,
    /// The unnumbered companion of P10 against the M/M/1/2** queue.
    P10Star2,
    P11Mm11VsMm12Ps,
    P12Mm11Star,
    Lemma1,
    Conj1,
}

/// Stationary-point numerator printed for the M/M/1/2** ratios.
const STAR2_POLY: [f64; 11] = [0.0, 0.0, 6.0, 44.0, 122.0, 172.0, 128.0, 36.0, -14.0, -12.0, -2.0];
/// Stationary-point numerator printed for the M/M/1/2-PS over M/M/1/1 ratio.
const MM11_POLY: [f64; 7] = [0.0, -8.0, -6.0, 20.0, 44.0, 36.0, 4.0];

impl PropositionId {
    pub const ALL: [PropositionId; 12] = [
        PropositionId::P2,
        PropositionId::P4,
        PropositionId::P5,
        PropositionId::P8,
        PropositionId::P9Star,
        PropositionId::Cor1,
        PropositionId::P10Mm11VsStar,
        PropositionId::P10Star2,
        PropositionId::P11Mm11VsMm12Ps,
        PropositionId::P12Mm11Star,
        PropositionId::Lemma1,
        PropositionId::Conj1,
    ];

    pub const RATIOS: [PropositionId; 10] = [
        PropositionId::P2,
        PropositionId::P4,
        PropositionId::P5,
        PropositionId::P8,
        PropositionId::P9Star,
        PropositionId::Cor1,
        PropositionId::P10Mm11VsStar,
        PropositionId::P10Star2,
        PropositionId::P11Mm11VsMm12Ps,
        PropositionId::P12Mm11Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropositionId::P2 => "p2",
            PropositionId::P4 => "p4",
            PropositionId::P5 => "p5",
            PropositionId::P8 => "p8",
            PropositionId::P9Star => "p9",
            PropositionId::Cor1 => "cor1",
            PropositionId::P10Mm11VsStar => "p10",
            PropositionId::P10Star2 => "p10-star2",
            PropositionId::P11Mm11VsMm12Ps => "p11",
            PropositionId::P12Mm11Star => "p12",
            PropositionId::Lemma1 => "lemma1",
            PropositionId::Conj1 => "conj1",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            PropositionId::P2 => "M/M/1/2 FGFS over PS, within [1, 1.2]",
            PropositionId::P4 => "M/M/1/2* FGFS over PS, within [1, 4/3]",
            PropositionId::P5 => "M/M/1/2-PS over M/M/1/2*-PS, within [1, 5/3]",
            PropositionId::P8 => "M/M/1/2** FGFS over PS, within [1, 1.0731], max at rho 2.3943",
            PropositionId::P9Star => "M/M/1/2*-PS over M/M/1/2**-PS, within [1, 3/2]",
            PropositionId::Cor1 => "M/M/1/2-PS over M/M/1/2**-PS, within [1, 5/2]",
            PropositionId::P10Mm11VsStar => "M/M/1/1 over M/M/1/2*-PS, within [1, 4/3]",
            PropositionId::P10Star2 => "M/M/1/1 over M/M/1/2**-PS, within [1, 2]",
            PropositionId::P11Mm11VsMm12Ps => "M/M/1/2-PS over M/M/1/1, within [0.9641, 5/4], min at rho 0.4697",
            PropositionId::P12Mm11Star => "M/M/1/2**-PS over M/M/1/1*, within [1, 1.0788], max at rho 2.3943",
            PropositionId::Lemma1 => "M/M/1-PS age exceeds (mu-lambda)/(lambda mu) for rho < 1",
            PropositionId::Conj1 => "M/M/1-PS: mu Delta = 1/rho + 1 + C(rho) with 0 <= C <= rho^2/(1-rho)",
        }
    }

    pub fn ratio_bound(self) -> Option<RatioBound> {
        use ClosedFormId::*;
        let (num, den, lower, upper, inf) = match self {
            PropositionId::P2 => (Mm12Fgfs, Mm12Ps, 1.0, 1.2, 1.2),
            PropositionId::P4 => (Mm12StarFgfs, Mm12StarPs, 1.0, 4.0 / 3.0, 4.0 / 3.0),
            PropositionId::P5 => (Mm12Ps, Mm12StarPs, 1.0, 5.0 / 3.0, 5.0 / 3.0),
            PropositionId::P8 => (Mm12Star2Fgfs, Mm12Star2Ps, 1.0, 1.0731, 1.0),
            PropositionId::P9Star => (Mm12StarPs, Mm12Star2Ps, 1.0, 1.5, 1.5),
            PropositionId::Cor1 => (Mm12Ps, Mm12Star2Ps, 1.0, 2.5, 2.5),
            PropositionId::P10Mm11VsStar => (Mm11, Mm12StarPs, 1.0, 4.0 / 3.0, 4.0 / 3.0),
            PropositionId::P10Star2 => (Mm11, Mm12Star2Ps, 1.0, 2.0, 2.0),
            PropositionId::P11Mm11VsMm12Ps => (Mm12Ps, Mm11, 0.9641, 1.25, 1.25),
            PropositionId::P12Mm11Star => (Mm12Star2Ps, Mm11Star, 1.0, 1.0788, 1.0),
            PropositionId::Lemma1 | PropositionId::Conj1 => return None,
        };
        let extremum = match self {
            PropositionId::P8 | PropositionId::P12Mm11Star => Some((ExtremumKind::Max, STAR2_POLY.to_vec())),
            PropositionId::P11Mm11VsMm12Ps => Some((ExtremumKind::Min, MM11_POLY.to_vec())),
            _ => None,
        };
        Some(RatioBound {
            num,
            den,
            lower,
            upper,
            limit_zero: 1.0,
            limit_infinity: inf,
            extremum,
        })
    }
}

impl fmt::Display for PropositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropositionId {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        PropositionId::ALL
            .iter()
            .copied()
            .find(|p| p.name() == key)
            .ok_or_else(|| AnalysisError::UnknownProposition {
                name: s.to_string(),
                valid: PropositionId::ALL.map(|p| p.name()).join(", "),
            })
    }
}

/// `count` log-spaced loads from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

/// The 200-point log grid over `[1e-3, 1e3]`.
pub fn standard_grid() -> Vec<f64> {
    logspace(1e-3, 1e3, 200)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub rho: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheck {
    pub at: Limit,
    pub probe_rho: f64,
    pub probe_ratio: f64,
    pub exact: f64,
    pub stated: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub prop: PropositionId,
    pub grid: String,
    pub rows: Vec<BoundRow>,
    pub min_ratio: f64,
    pub rho_at_min: f64,
    pub max_ratio: f64,
    pub rho_at_max: f64,
    /// Stated interval; per-row bounds may be tighter (conjecture rows).
    pub lower: f64,
    pub upper: f64,
    pub limits: Vec<LimitCheck>,
    pub pass: bool,
}

fn describe_grid(grid: &[f64]) -> String {
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("{} loads in [{}, {}]", grid.len(), sig12(lo), sig12(hi))
}

fn summarize(
    prop: PropositionId,
    grid: &[f64],
    rows: Vec<BoundRow>,
    lower: f64,
    upper: f64,
    limits: Vec<LimitCheck>,
) -> BoundReport {
    let (mut min_i, mut max_i) = (0, 0);
    for (i, r) in rows.iter().enumerate() {
        if r.ratio < rows[min_i].ratio {
            min_i = i;
        }
        if r.ratio > rows[max_i].ratio {
            max_i = i;
        }
    }
    let pass = rows.iter().all(|r| r.pass) && limits.iter().all(|l| l.pass);
    BoundReport {
        prop,
        grid: describe_grid(grid),
        min_ratio: rows[min_i].ratio,
        rho_at_min: rows[min_i].rho,
        max_ratio: rows[max_i].ratio,
        rho_at_max: rows[max_i].rho,
        rows,
        lower,
        upper,
        limits,
        pass,
    }
}

/// Exact ratio limits compared with the stated endpoints, plus the ratio
/// evaluated at `rho = 1e-4` and `1e4`.
pub fn limit_checks(b: &RatioBound) -> Vec<LimitCheck> {
    [
        (Limit::Zero, LIMIT_PROBE_LOW, b.limit_zero),
        (Limit::Infinity, LIMIT_PROBE_HIGH, b.limit_infinity),
    ]
    .into_iter()
    .map(|(at, probe_rho, stated)| {
        let probe_ratio = ratio_at_load(b.num, b.den, probe_rho);
        let exact = ratio_limit(b.num, b.den, at);
        LimitCheck {
            at,
            probe_rho,
            probe_ratio,
            exact,
            stated,
            pass: (probe_ratio - stated).abs() <= LIMIT_TOLERANCE && (exact - stated).abs() <= 1e-12,
        }
    })
    .collect()
}

/// Evaluates the proposition at every load of `grid`.
///
/// Ratio propositions use the closed forms; `Lemma1` and `Conj1` use the
/// converged truncated SHS solution of the M/M/1-PS queue with `mu = 1`
/// (`ratio` is then `mu Delta` and `C(rho)` respectively).
pub fn verify_bound(prop: PropositionId, grid: &[f64]) -> Result<BoundReport, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    if let Some(b) = prop.ratio_bound() {
        let mut rows = Vec::with_capacity(grid.len());
        for &rho in grid {
            if !(rho.is_finite() && rho > 0.0) {
                return Err(AnalysisError::InadmissibleLoad {
                    prop,
                    rho,
                    domain: "(0, inf)",
                });
            }
            let ratio = ratio_at_load(b.num, b.den, rho);
            rows.push(BoundRow {
                rho,
                ratio,
                lower: b.lower,
                upper: b.upper,
                pass: ratio >= b.lower - BOUND_TOLERANCE && ratio <= b.upper + BOUND_TOLERANCE,
            });
        }
        return Ok(summarize(prop, grid, rows, b.lower, b.upper, limit_checks(&b)));
    }
    for &rho in grid {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(AnalysisError::InadmissibleLoad {
                prop,
                rho,
                domain: "(0, 1)",
            });
        }
    }
    let evidence = conjecture_evidence(grid, &ConjectureSettings::default())?;
    let rows = evidence
        .iter()
        .map(|e| match prop {
            PropositionId::Lemma1 => BoundRow {
                rho: e.rho,
                ratio: e.aaoi,
                lower: e.lemma1_bound,
                upper: f64::INFINITY,
                pass: e.converged && e.lemma1_ok,
            },
            _ => BoundRow {
                rho: e.rho,
                ratio: e.c,
                lower: e.bounds.lower,
                upper: e.bounds.upper,
                pass: e.converged && e.general_ok,
            },
        })
        .collect();
    let (lower, upper) = match prop {
        PropositionId::Lemma1 => (f64::NAN, f64::INFINITY),
        _ => (0.0, f64::INFINITY),
    };
    Ok(summarize(prop, grid, rows, lower, upper, Vec::new()))
}

pub const BOUND_HEADER: &str = "prop,rho,ratio,lower,upper,pass";

pub fn write_bound_csv<W: Write>(w: &mut W, report: &BoundReport) -> io::Result<()> {
    writeln!(w, "{BOUND_HEADER}")?;
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            report.prop,
            sig12(r.rho),
            sig12(r.ratio),
            sig12(r.lower),
            sig12(r.upper),
            r.pass
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub prop: PropositionId,
    pub kind: ExtremumKind,
    pub rho_star: f64,
    pub ratio: f64,
    /// Positive root of the printed stationary polynomial nearest `rho_star`.
    pub printed_root: f64,
    /// Same, for the numerator of the derivative of the ratio of forms.
    pub derived_root: f64,
}

impl Extremum {
    pub fn printed_root_agrees(&self, tol: f64) -> bool {
        (self.printed_root - self.rho_star).abs() <= tol
    }
}

pub fn find_ratio_extremum(prop: PropositionId) -> Result<Extremum, AnalysisError> {
    find_ratio_extremum_in(prop, LIMIT_PROBE_LOW, LIMIT_PROBE_HIGH)
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Log-grid bracketing followed by golden-section refinement in `ln rho`
/// until the bracket is narrower than `1e-7` in `rho`.
pub fn find_ratio_extremum_in(prop: PropositionId, lo: f64, hi: f64) -> Result<Extremum, AnalysisError> {
    let b = prop.ratio_bound().ok_or(AnalysisError::NotRatio(prop))?;
    let none = AnalysisError::NoExtremum { prop, lo, hi };
    let Some((kind, printed)) = b.extremum.clone() else {
        return Err(none);
    };
    let sign = match kind {
        ExtremumKind::Max => 1.0,
        ExtremumKind::Min => -1.0,
    };
    let f = |x: f64| sign * ratio_at_load(b.num, b.den, x.exp());
    let scan = logspace(lo, hi, 801);
    let best = (0..scan.len())
        .max_by(|&i, &j| f(scan[i].ln()).total_cmp(&f(scan[j].ln())))
        .ok_or(none)?;
    if best == 0 || best == scan.len() - 1 {
        return Err(AnalysisError::NoExtremum { prop, lo, hi });
    }
    let (mut a, mut c) = (scan[best - 1].ln(), scan[best + 1].ln());
    let mut x1 = c - GOLDEN * (c - a);
    let mut x2 = a + GOLDEN * (c - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while c.exp() - a.exp() > 1e-7 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (c - a);
            f2 = f(x2);
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - GOLDEN * (c - a);
            f1 = f(x1);
        }
    }
    let rho_star = (0.5 * (a + c)).exp();
    let nearest = |p: &Poly| {
        positive_roots(p, lo, hi, 4001, 1e-13)
            .into_iter()
            .min_by(|x, y| (x - rho_star).abs().total_cmp(&(y - rho_star).abs()))
            .unwrap_or(f64::NAN)
    };
    let derived = b.num.form().divide(&b.den.form()).stationary_polynomial();
    Ok(Extremum {
        prop,
        kind,
        rho_star,
        ratio: ratio_at_load(b.num, b.den, rho_star),
        printed_root: nearest(&Poly::new(printed)),
        derived_root: nearest(&derived),
    })
}

/// Simulation budget for cross-checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimBudget {
    pub events: u64,
    pub replications: usize,
    pub seed: u64,
}

impl Default for SimBudget {
    fn default() -> Self {
        SimBudget {
            events: 1_000_000,
            replications: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureSettings {
    pub mu: f64,
    /// Truncation levels tried: `n_start`, `2 n_start`, then steps of `n_step`.
    pub n_start: usize,
    pub n_step: usize,
    pub n_cap: usize,
    /// Successive relative change that counts as converged.
    pub tolerance: f64,
    pub simulation: Option<SimBudget>,
}

impl Default for ConjectureSettings {
    fn default() -> Self {
        ConjectureSettings {
            mu: 1.0,
            n_start: 20,
            n_step: 40,
            n_cap: 400,
            tolerance: 1e-8,
            simulation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureRow {
    pub rho: f64,
    /// `mu * Delta` from the largest truncation solved.
    pub aaoi: f64,
    pub n: usize,
    pub converged: bool,
    pub c: f64,
    pub bounds: ConjectureBounds,
    pub general_ok: bool,
    /// `None` where the large-load pair is inconsistent.
    pub large_rho_ok: Option<bool>,
    /// `mu * (mu - lambda) / (lambda mu)`.
    pub lemma1_bound: f64,
    pub lemma1_ok: bool,
    /// Simulated `mu * Delta` and its 95% half-width.
    pub sim: Option<(f64, f64)>,
    /// Simulation and SHS agree within the interval.
    pub sim_agrees: Option<bool>,
    /// Both the SHS value and the simulation interval lie outside the
    /// general bounds.
    pub hard_violation: bool,
}

fn truncation_levels(s: &ConjectureSettings) -> Vec<usize> {
    let mut levels = vec![s.n_start, 2 * s.n_start];
    while *levels.last().unwrap() + s.n_step <= s.n_cap {
        levels.push(levels.last().unwrap() + s.n_step);
    }
    levels.retain(|n| *n <= s.n_cap);
    levels
}

/// `C(rho) = mu Delta - 1/rho - 1` from truncated SHS solutions grown until
/// successive values agree to `tolerance`, with the conjectured bounds and
/// the lemma's lower bound checked at each load.
pub fn conjecture_evidence(grid: &[f64], s: &ConjectureSettings) -> Result<Vec<ConjectureRow>, AnalysisError> {
    let levels = truncation_levels(s);
    grid.iter()
        .map(|&rho| {
            let bounds = conjecture_bounds(rho)?;
            let lambda = rho * s.mu;
            let mut prev: Option<f64> = None;
            let mut converged = false;
            let mut value = f64::NAN;
            let mut used = 0;
            for &n in &levels {
                let m = build_truncated_mm1(
                    Discipline::Ps,
                    &[lambda],
                    s.mu,
                    1,
                    &TruncationSpec::with_cap(n, s.n_cap),
                )?;
                value = solve_age_system(&m)?.aaoi * s.mu;
                used = n;
                if let Some(p) = prev {
                    if (value - p).abs() / value < s.tolerance {
                        converged = true;
                        break;
                    }
                }
                prev = Some(value);
            }
            let c = value - 1.0 / rho - 1.0;
            let general_ok = c >= bounds.lower && c <= bounds.upper;
            let large_rho_ok = bounds
                .large_rho_applicable
                .then_some(c >= bounds.large_rho_lower && c <= bounds.large_rho_upper);
            let lemma1_bound = (1.0 - rho) / rho;
            let (sim, sim_agrees, hard_violation) = match s.simulation {
                None => (None, None, false),
                Some(b) => {
                    let cfg = SimConfig::new(
                        ModelId::Mm1Ps.queue(),
                        vec![lambda],
                        s.mu,
                        Horizon::Events(b.events),
                        b.seed,
                        b.replications,
                    );
                    let est = simulate(&cfg)?;
                    let src = &est.sources[0];
                    let (mean, ci) = (src.mean_age * s.mu, src.ci95 * s.mu);
                    let sim_c = (mean - ci - 1.0 / rho - 1.0, mean + ci - 1.0 / rho - 1.0);
                    let sim_out = sim_c.1 < bounds.lower || sim_c.0 > bounds.upper;
                    (
                        Some((mean, ci)),
                        Some((mean - value).abs() <= ci),
                        !general_ok && sim_out,
                    )
                }
            };
            Ok(ConjectureRow {
                rho,
                aaoi: value,
                n: used,
                converged,
                c,
                bounds,
                general_ok,
                large_rho_ok,
                lemma1_bound,
                lemma1_ok: value > lemma1_bound,
                sim,
                sim_agrees,
                hard_violation,
            })
        })
        .collect()
}

pub const CONJECTURE_HEADER: &str =
    "rho,n,converged,mu_aaoi,c,lower,upper,large_lower,large_upper,large_applicable,general_ok,large_ok,lemma1_bound,lemma1_ok,sim_mu_aaoi,sim_ci95";

pub fn write_conjecture_csv<W: Write>(w: &mut W, rows: &[ConjectureRow]) -> io::Result<()> {
    writeln!(w, "{CONJECTURE_HEADER}")?;
    for r in rows {
        let opt = |x: Option<f64>| x.map(sig12).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sig12(r.rho),
            r.n,
            r.converged,
            sig12(r.aaoi),
            sig12(r.c),
            sig12(r.bounds.lower),
            sig12(r.bounds.upper),
            sig12(r.bounds.large_rho_lower),
            sig12(r.bounds.large_rho_upper),
            r.bounds.large_rho_applicable,
            r.general_ok,
            r.large_rho_ok.map(|b| b.to_string()).unwrap_or_default(),
            sig12(r.lemma1_bound),
            r.lemma1_ok,
            opt(r.sim.map(|s| s.0)),
            opt(r.sim.map(|s| s.1)),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepModel {
    Ps,
    Fgfs,
    Mm11Star,
}

impl SweepModel {
    pub const ALL: [SweepModel; 3] = [SweepModel::Ps, SweepModel::Fgfs, SweepModel::Mm11Star];

    pub fn name(self) -> &'static str {
        match self {
            SweepModel::Ps => "ps",
            SweepModel::Fgfs => "fgfs",
            SweepModel::Mm11Star => "mm11star",
        }
    }
}

impl FromStr for SweepModel {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        SweepModel::ALL
            .iter()
            .copied()
            .find(|m| m.name() == key)
            .ok_or(AnalysisError::UnknownSweepModel { name: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Age of source 1.
    Source1,
    /// Sum of the ages of both sources.
    Sum,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Source1 => "source1",
            Objective::Sum => "sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMethod {
    /// Two-source SHS; PS and FGFS truncated at `n` packets.
    Shs { n: usize },
    /// Simulation; PS and FGFS use an unbounded buffer when the total load
    /// is below one and a blocking buffer of `n` packets otherwise.
    Simulate { n: usize, budget: SimBudget },
}

impl SweepMethod {
    pub fn name(self) -> &'static str {
        match self {
            SweepMethod::Shs { .. } => "shs-truncated",
            SweepMethod::Simulate { .. } => "simulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambda1: f64,
    pub lambda2s: Vec<f64>,
    pub mu: f64,
    pub models: Vec<SweepModel>,
    pub objective: Objective,
    pub method: SweepMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda2: f64,
    pub model: SweepModel,
    pub objective: Objective,
    pub aaoi: f64,
    pub method: SweepMethod,
    /// Only for simulation.
    pub ci95: Option<f64>,
    /// Total load below one; otherwise PS and FGFS values depend on `n`.
    pub stable: bool,
}

fn sweep_point(spec: &SweepSpec, lambda2: f64, model: SweepModel) -> Result<(f64, Option<f64>), AnalysisError> {
    let lambdas = [spec.lambda1, lambda2];
    let stable = (spec.lambda1 + lambda2) / spec.mu < 1.0;
    let sources: &[usize] = match spec.objective {
        Objective::Source1 => &[1],
        Objective::Sum => &[1, 2],
    };
    match spec.method {
        SweepMethod::Shs { n } => {
            let mut total = 0.0;
            for &soi in sources {
                let m = match model {
                    SweepModel::Ps => {
                        build_truncated_mm1(Discipline::Ps, &lambdas, spec.mu, soi, &TruncationSpec::new(n))?
                    }
                    SweepModel::Fgfs => {
                        build_truncated_mm1(Discipline::Fgfs, &lambdas, spec.mu, soi, &TruncationSpec::new(n))?
                    }
                    SweepModel::Mm11Star => build_two_source_mm11_star(&lambdas, spec.mu, soi)?,
                };
                total += solve_age_system(&m)?.aaoi;
            }
            Ok((total, None))
        }
        SweepMethod::Simulate { n, budget } => {
            let capacity = if stable { None } else { Some(n) };
            let queue = match model {
                SweepModel::Ps => QueueModel {
                    discipline: Discipline::Ps,
                    capacity,
                    overflow: Overflow::DropNew,
                },
                SweepModel::Fgfs => QueueModel {
                    discipline: Discipline::Fgfs,
                    capacity,
                    overflow: Overflow::DropNew,
                },
                SweepModel::Mm11Star => ModelId::Mm11Star.queue(),
            };
            let cfg = SimConfig::new(
                queue,
                lambdas.to_vec(),
                spec.mu,
                Horizon::Events(budget.events),
                budget.seed,
                budget.replications,
            );
            let est = simulate(&cfg)?;
            let per_rep: Vec<f64> = (0..budget.replications)
                .map(|r| {
                    sources
                        .iter()
                        .map(|s| est.source(*s).map(|e| e.replication_means[r]).unwrap_or(f64::NAN))
                        .sum()
                })
                .collect();
            let mean = per_rep.iter().sum::<f64>() / per_rep.len() as f64;
            Ok((mean, Some(ci95_half_width(&per_rep))))
        }
    }
}

/// One row per `(lambda2, model)`, in `lambda2` order then model order.
pub fn two_source_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, AnalysisError> {
    let mut rows = Vec::with_capacity(spec.lambda2s.len() * spec.models.len());
    for &lambda2 in &spec.lambda2s {
        if !(lambda2.is_finite() && lambda2 > 0.0) {
            return Err(AnalysisError::Lambda2(lambda2));
        }
        for &model in &spec.models {
            let (aaoi, ci95) = sweep_point(spec, lambda2, model)?;
            rows.push(SweepRow {
                lambda2,
                model,
                objective: spec.objective,
                aaoi,
                method: spec.method,
                ci95,
                stable: (spec.lambda1 + lambda2) / spec.mu < 1.0,
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_HEADER: &str = "lambda2,model,objective,aaoi,method,ci95";

pub fn write_sweep_csv<W: Write>(w: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            sig12(r.lambda2),
            r.model.name(),
            r.objective.name(),
            sig12(r.aaoi),
            r.method.name(),
            r.ci95.map(sig12).unwrap_or_default()
        )?;
    }
    Ok(())
}
