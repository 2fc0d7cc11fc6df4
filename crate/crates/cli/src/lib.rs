//! `aoi` command-line front end. Every command renders its whole output
//! into memory first, starting with `# config:` lines that echo the resolved
//! arguments, and then writes it to `--out` or stdout.

pub mod range;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use aoi_core::analysis::{
    self, conjecture_evidence, find_ratio_extremum_in, two_source_sweep, verify_bound, AnalysisError,
    ConjectureSettings, ExtremumKind, Objective, PropositionId, SimBudget, SweepMethod, SweepModel, SweepSpec,
};
use aoi_core::closed_form::{aaoi, ClosedFormError, ClosedFormId, RateParams};
use aoi_core::desim::{self, sawtooth_trace, simulate, Horizon, SimConfig, SimError};
use aoi_core::model::{Discipline, ModelId, UnknownModel};
use aoi_core::numfmt::sig12;
use aoi_core::shs::{
    build_finite_model, build_truncated_mm1, dump_table, parse_table, solve_age_system, ShsError, ShsModel,
    TruncationSpec,
};

use range::{parse_counts, parse_range, RangeError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Model(#[from] UnknownModel),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Shs(#[from] ShsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A checked bound does not hold.
    Violated,
}

fn models_help() -> String {
    let mut s = String::from("Models:\n");
    for m in ModelId::ALL {
        let _ = writeln!(s, "  {:<16} {}", m.name(), m.describe());
    }
    s
}

fn props_help() -> String {
    let mut s = String::from("Propositions:\n");
    for p in PropositionId::ALL {
        let _ = writeln!(s, "  {:<10} {}", p.name(), p.describe());
    }
    s
}

#[derive(Debug, Parser)]
#[command(
    name = "aoi",
    version,
    about = "Average age of information for single-server status-update queues",
    after_help = format!("{}\n{}\nExit status: 0 success, 1 a checked bound is violated, 2 usage or input error.", models_help(), props_help())
)]
pub struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a closed-form AAoI.
    #[command(after_help = models_help())]
    ClosedForm(ClosedFormArgs),
    /// Build and solve an SHS model.
    #[command(after_help = models_help())]
    Shs(ShsArgs),
    /// Estimate AAoI by discrete-event simulation.
    #[command(after_help = models_help())]
    Simulate(SimulateArgs),
    /// Check a proposition over a load grid.
    #[command(after_help = props_help())]
    Verify(VerifyArgs),
    /// Locate the interior extremum of a ratio proposition.
    #[command(after_help = props_help())]
    Extremum(ExtremumArgs),
    /// Evidence for the M/M/1-PS correction-term bounds.
    #[command(after_help = props_help())]
    Conjecture(ConjectureArgs),
    /// Two-source comparison of PS, FGFS and M/M/1/1* over lambda2.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ClosedFormArgs {
    #[arg(long)]
    model: String,
    /// Arrival rate: value, list or range.
    #[arg(long)]
    lambda: String,
    /// Service rate: value, list or range.
    #[arg(long, default_value = "1")]
    mu: String,
}

#[derive(Debug, Args)]
struct ShsArgs {
    /// Finite-buffer model, or mm1-ps / mm1-fgfs for a truncated system.
    #[arg(long, required_unless_present = "input")]
    model: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Second source rate for truncated systems.
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Source of interest (1-based) for two-source systems.
    #[arg(long, default_value_t = 1)]
    soi: usize,
    /// Truncation levels for mm1-ps / mm1-fgfs: value, list or range.
    #[arg(long, default_value = "40")]
    n: String,
    /// Largest truncation allowed.
    #[arg(long)]
    cap: Option<usize>,
    /// Print the transition table instead of solving.
    #[arg(long)]
    table: bool,
    /// Solve a transition table read from this file.
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,
    /// Print the stationary distribution and age vectors per state.
    #[arg(long)]
    vectors: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    model: String,
    /// Arrival rate of each source, comma-separated.
    #[arg(long)]
    lambda: String,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Events per replication.
    #[arg(long, default_value_t = 1_000_000, conflicts_with = "time")]
    events: u64,
    /// Simulated time per replication, instead of an event count.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value_t = desim::DEFAULT_WARMUP)]
    warmup: f64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, env = "AOI_SEED", default_value_t = 1)]
    seed: u64,
    /// Write the first replication's age path here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    trace_source: usize,
    #[arg(long, default_value_t = 10_000)]
    trace_points: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Proposition name, comma-separated names, or `all`.
    #[arg(long)]
    prop: String,
    /// Load grid; defaults to log:0.001:1000:200, or 0.1:0.9:9 for lemma1 and conj1.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct ExtremumArgs {
    /// p8, p11, p12 or `all`.
    #[arg(long, default_value = "all")]
    prop: String,
    #[arg(long, default_value_t = analysis::LIMIT_PROBE_LOW)]
    lo: f64,
    #[arg(long, default_value_t = analysis::LIMIT_PROBE_HIGH)]
    hi: f64,
}

#[derive(Debug, Args)]
struct ConjectureArgs {
    #[arg(long, default_value = "0.1:0.9:9")]
    rho: String,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 20)]
    n_start: usize,
    #[arg(long, default_value_t = 40)]
    n_step: usize,
    #[arg(long, default_value_t = 400)]
    n_cap: usize,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Cross-check every load by simulation.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 1_000_000)]
    events: u64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, env = "AOI_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(alias = "shs-truncated")]
    Shs,
    Simulate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Source1,
    Sum,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    lambda1: f64,
    /// Second source rates: value, list or range.
    #[arg(long)]
    lambda2: String,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value = "ps,fgfs,mm11star")]
    models: String,
    #[arg(long, value_enum, default_value = "source1")]
    objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "shs")]
    method: MethodArg,
    /// Truncation (SHS) or buffer size used when the total load is at least one (simulation).
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    events: u64,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, env = "AOI_SEED", default_value_t = 1)]
    seed: u64,
}

/// Output under construction; `# config:` lines first.
struct Report {
    text: String,
}

impl Report {
    fn new(command: &str) -> Self {
        let mut r = Report { text: String::new() };
        r.config("command", command);
        r.config("version", env!("CARGO_PKG_VERSION"));
        r
    }

    fn config(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "# config: {key}={value}");
    }

    fn comment(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.text, "# {line}");
    }

    fn line(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{line}");
    }

    fn csv(&mut self, f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) {
        let mut buf = Vec::new();
        f(&mut buf).expect("writing to memory");
        self.text.push_str(&String::from_utf8(buf).expect("CSV is UTF-8"));
    }
}

fn write_to(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn names<T: std::str::FromStr>(list: &str) -> Result<Vec<T>, T::Err> {
    list.split(',').map(|s| s.trim().parse()).collect()
}

fn closed_form(a: &ClosedFormArgs, r: &mut Report) -> Result<Status, CliError> {
    let id: ClosedFormId = a.model.parse()?;
    let (lambdas, mus) = (parse_range(&a.lambda)?, parse_range(&a.mu)?);
    r.config("model", id);
    r.config("lambda", &a.lambda);
    r.config("mu", &a.mu);
    if lambdas.len() == 1 && mus.len() == 1 {
        r.line(sig12(aaoi(id, &RateParams::new(lambdas[0], mus[0])?)?));
        return Ok(Status::Ok);
    }
    r.line("model,lambda,mu,rho,aaoi");
    for &mu in &mus {
        for &l in &lambdas {
            let p = RateParams::new(l, mu)?;
            r.line(format!(
                "{id},{},{},{},{}",
                sig12(l),
                sig12(mu),
                sig12(p.rho()),
                sig12(aaoi(id, &p)?)
            ));
        }
    }
    Ok(Status::Ok)
}

fn vectors(m: &ShsModel, r: &mut Report) -> Result<(), CliError> {
    let s = solve_age_system(m)?;
    r.comment(format!("aaoi: {}", sig12(s.aaoi)));
    r.comment(format!("unknowns: {}", s.unknowns));
    r.comment(format!("balance_residual: {:e}", s.balance_residual));
    r.comment(format!("age_residual: {:e}", s.age_residual));
    let cols: Vec<String> = (0..m.age_dim()).map(|j| format!("v{j}")).collect();
    r.line(format!("state,label,pi,{}", cols.join(",")));
    for (q, st) in m.states().iter().enumerate() {
        let v: Vec<String> = s.v[q].iter().map(|x| sig12(*x)).collect();
        r.line(format!("{q},{},{},{}", st.label, sig12(s.pi[q]), v.join(",")));
    }
    Ok(())
}

const SHS_HEADER: &str = "model,n,states,unknowns,aaoi,rel_change";

/// One CSV row; `rel_change` is relative to `prev`.
fn summary_row(m: &ShsModel, n: Option<usize>, prev: Option<f64>, r: &mut Report) -> Result<f64, CliError> {
    let s = solve_age_system(m)?;
    r.line(format!(
        "{},{},{},{},{},{}",
        m.name(),
        n.map(|n| n.to_string()).unwrap_or_default(),
        m.states().len(),
        s.unknowns,
        sig12(s.aaoi),
        prev.map(|p| sig12((s.aaoi - p).abs() / s.aaoi)).unwrap_or_default()
    ));
    Ok(s.aaoi)
}

fn shs(a: &ShsArgs, r: &mut Report) -> Result<Status, CliError> {
    if let Some(path) = &a.input {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let m = parse_table(&text)?;
        r.config("input", path.display());
        if a.table {
            r.text.push_str(&dump_table(&m));
        } else if a.vectors {
            vectors(&m, r)?;
        } else {
            r.line(SHS_HEADER);
            summary_row(&m, None, None, r)?;
        }
        return Ok(Status::Ok);
    }
    let id: ModelId = a.model.as_deref().unwrap_or_default().parse()?;
    r.config("model", id);
    r.config("lambda", sig12(a.lambda));
    r.config("mu", sig12(a.mu));
    let built: Vec<(Option<usize>, ShsModel)> = match id.closed_form() {
        Some(cf) if id != ModelId::Mm1Fgfs => {
            if a.lambda2.is_some() {
                return Err(CliError::Usage(format!("--lambda2 needs mm1-ps or mm1-fgfs, not {id}")));
            }
            vec![(None, build_finite_model(cf, &RateParams::new(a.lambda, a.mu)?)?)]
        }
        _ => {
            let disc = if id == ModelId::Mm1Ps {
                Discipline::Ps
            } else {
                Discipline::Fgfs
            };
            let mut lambdas = vec![a.lambda];
            if let Some(l2) = a.lambda2 {
                lambdas.push(l2);
                r.config("lambda2", sig12(l2));
                r.config("soi", a.soi);
            }
            let ns = parse_counts(&a.n)?;
            r.config("n", &a.n);
            if let Some(cap) = a.cap {
                r.config("cap", cap);
            }
            ns.iter()
                .map(|&n| {
                    let spec = match a.cap {
                        Some(cap) => TruncationSpec::with_cap(n, cap),
                        None => TruncationSpec::new(n),
                    };
                    Ok((Some(n), build_truncated_mm1(disc, &lambdas, a.mu, a.soi, &spec)?))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    if a.table || a.vectors {
        let [(_, m)] = &built[..] else {
            return Err(CliError::Usage("--table and --vectors take a single --n".into()));
        };
        if a.table {
            r.text.push_str(&dump_table(m));
        } else {
            vectors(m, r)?;
        }
        return Ok(Status::Ok);
    }
    r.line(SHS_HEADER);
    let mut prev = None;
    for (n, m) in &built {
        prev = Some(summary_row(m, *n, prev, r)?);
    }
    Ok(Status::Ok)
}

fn sim_config(a: &SimulateArgs) -> Result<SimConfig, CliError> {
    let id: ModelId = a.model.parse()?;
    let lambdas = a
        .lambda
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--lambda: '{s}' is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let horizon = match a.time {
        Some(t) => Horizon::Time(t),
        None => Horizon::Events(a.events),
    };
    let mut c = SimConfig::new(id.queue(), lambdas, a.mu, horizon, a.seed, a.reps);
    c.warmup = a.warmup;
    c.validate()?;
    Ok(c)
}

fn echo_sim(c: &SimConfig, r: &mut Report) {
    r.config("model", c.queue.label());
    let l: Vec<String> = c.lambdas.iter().map(|x| sig12(*x)).collect();
    r.config("lambda", l.join(","));
    r.config("mu", sig12(c.mu));
    match c.horizon {
        Horizon::Events(n) => r.config("events", n),
        Horizon::Time(t) => r.config("time", sig12(t)),
    }
    r.config("warmup", sig12(c.warmup));
    r.config("reps", c.replications);
    r.config("seed", c.seed);
}

fn simulate_cmd(a: &SimulateArgs, r: &mut Report) -> Result<Status, CliError> {
    let c = sim_config(a)?;
    echo_sim(&c, r);
    let est = simulate(&c)?;
    r.csv(|w| desim::write_estimates_csv(w, &[(&c, &est)]));
    if let Some(path) = &a.trace {
        let tr = sawtooth_trace(&c, a.trace_source, a.trace_points)?;
        let mut t = Report::new("simulate");
        echo_sim(&c, &mut t);
        t.config("trace_source", a.trace_source);
        t.config("trace_points", a.trace_points);
        if !tr.complete {
            t.comment("trace: truncated at trace_points");
        }
        t.csv(|w| desim::write_trace_csv(w, &tr));
        write_to(path, &t.text)?;
    }
    Ok(Status::Ok)
}

fn selected_props(list: &str, from: &[PropositionId]) -> Result<Vec<PropositionId>, CliError> {
    if list.trim() == "all" {
        return Ok(from.to_vec());
    }
    Ok(names(list)?)
}

fn verify(a: &VerifyArgs, r: &mut Report) -> Result<Status, CliError> {
    let props = selected_props(&a.prop, &PropositionId::ALL)?;
    r.config("prop", props.iter().map(|p| p.name()).collect::<Vec<_>>().join(","));
    r.config("grid", a.grid.as_deref().unwrap_or("default"));
    let mut status = Status::Ok;
    let mut body = Vec::new();
    for p in props {
        let grid = match (&a.grid, p.ratio_bound()) {
            (Some(g), _) => parse_range(g)?,
            (None, Some(_)) => analysis::standard_grid(),
            (None, None) => parse_range("0.1:0.9:9")?,
        };
        let rep = verify_bound(p, &grid)?;
        if !rep.pass {
            status = Status::Violated;
        }
        r.comment(format!(
            "result: prop={p} pass={} grid={} min={} at rho={} max={} at rho={}",
            rep.pass,
            rep.grid,
            sig12(rep.min_ratio),
            sig12(rep.rho_at_min),
            sig12(rep.max_ratio),
            sig12(rep.rho_at_max)
        ));
        for l in &rep.limits {
            let at = match l.at {
                aoi_core::closed_form::Limit::Zero => "0",
                aoi_core::closed_form::Limit::Infinity => "inf",
            };
            r.comment(format!(
                "limit: prop={p} rho->{at} exact={} stated={} ratio_at_{}={} pass={}",
                sig12(l.exact),
                sig12(l.stated),
                sig12(l.probe_rho),
                sig12(l.probe_ratio),
                l.pass
            ));
        }
        if let Some(b) = p.ratio_bound() {
            if b.extremum.is_some() {
                let e = analysis::find_ratio_extremum(p)?;
                r.comment(format!(
                    "extremum: prop={p} rho={} ratio={} within_bounds={}",
                    sig12(e.rho_star),
                    sig12(e.ratio),
                    e.ratio >= b.lower - analysis::BOUND_TOLERANCE && e.ratio <= b.upper + analysis::BOUND_TOLERANCE
                ));
            }
        }
        body.push(rep);
    }
    r.csv(|w| {
        writeln!(w, "{}", analysis::BOUND_HEADER)?;
        for rep in &body {
            let mut one = Vec::new();
            analysis::write_bound_csv(&mut one, rep)?;
            let text = String::from_utf8(one).expect("CSV is UTF-8");
            for line in text.lines().skip(1) {
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    });
    Ok(status)
}

fn extremum(a: &ExtremumArgs, r: &mut Report) -> Result<Status, CliError> {
    let with_extremum: Vec<PropositionId> = PropositionId::RATIOS
        .into_iter()
        .filter(|p| p.ratio_bound().is_some_and(|b| b.extremum.is_some()))
        .collect();
    let props = selected_props(&a.prop, &with_extremum)?;
    r.config("prop", props.iter().map(|p| p.name()).collect::<Vec<_>>().join(","));
    r.config("lo", sig12(a.lo));
    r.config("hi", sig12(a.hi));
    r.line("prop,kind,rho,ratio,printed_root,derived_root");
    for p in props {
        let e = find_ratio_extremum_in(p, a.lo, a.hi)?;
        let kind = match e.kind {
            ExtremumKind::Max => "max",
            ExtremumKind::Min => "min",
        };
        r.line(format!(
            "{p},{kind},{},{},{},{}",
            sig12(e.rho_star),
            sig12(e.ratio),
            sig12(e.printed_root),
            sig12(e.derived_root)
        ));
    }
    Ok(Status::Ok)
}

fn conjecture(a: &ConjectureArgs, r: &mut Report) -> Result<Status, CliError> {
    let grid = parse_range(&a.rho)?;
    if let Some(bad) = grid.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(CliError::Usage(format!("--rho values must lie in (0, 1), got {bad}")));
    }
    let settings = ConjectureSettings {
        mu: a.mu,
        n_start: a.n_start,
        n_step: a.n_step,
        n_cap: a.n_cap,
        tolerance: a.tolerance,
        simulation: a.simulate.then_some(SimBudget {
            events: a.events,
            replications: a.reps,
            seed: a.seed,
        }),
    };
    r.config("rho", &a.rho);
    r.config("mu", sig12(a.mu));
    r.config("n_start", a.n_start);
    r.config("n_step", a.n_step);
    r.config("n_cap", a.n_cap);
    r.config("tolerance", sig12(a.tolerance));
    if a.simulate {
        r.config("events", a.events);
        r.config("reps", a.reps);
        r.config("seed", a.seed);
    }
    let rows = conjecture_evidence(&grid, &settings)?;
    let mut status = Status::Ok;
    for row in &rows {
        let rho = sig12(row.rho);
        if !row.converged {
            r.comment(format!("NOT CONVERGED: rho={rho} at n={}", row.n));
        }
        if !row.lemma1_ok {
            r.comment(format!("VIOLATION: lemma1 at rho={rho}"));
            status = Status::Violated;
        }
        if row.converged && !row.general_ok {
            r.comment(format!("VIOLATION: C(rho) outside [0, rho^2/(1-rho)] at rho={rho}"));
            status = Status::Violated;
        }
        if row.large_rho_ok == Some(false) {
            r.comment(format!("large-load pair does not hold at rho={rho}"));
        }
        if row.hard_violation {
            r.comment(format!(
                "VIOLATION: simulation confirms C(rho) out of bounds at rho={rho}"
            ));
        }
    }
    r.csv(|w| analysis::write_conjecture_csv(w, &rows));
    Ok(status)
}

fn sweep(a: &SweepArgs, r: &mut Report) -> Result<Status, CliError> {
    let lambda2s = parse_range(&a.lambda2)?;
    let models: Vec<SweepModel> = names(&a.models)?;
    let objective = match a.objective {
        ObjectiveArg::Source1 => Objective::Source1,
        ObjectiveArg::Sum => Objective::Sum,
    };
    let method = match a.method {
        MethodArg::Shs => SweepMethod::Shs { n: a.n },
        MethodArg::Simulate => SweepMethod::Simulate {
            n: a.n,
            budget: SimBudget {
                events: a.events,
                replications: a.reps,
                seed: a.seed,
            },
        },
    };
    r.config("lambda1", sig12(a.lambda1));
    r.config("lambda2", &a.lambda2);
    r.config("mu", sig12(a.mu));
    r.config("models", models.iter().map(|m| m.name()).collect::<Vec<_>>().join(","));
    r.config("objective", objective.name());
    r.config("method", method.name());
    r.config("n", a.n);
    if matches!(method, SweepMethod::Simulate { .. }) {
        r.config("events", a.events);
        r.config("reps", a.reps);
        r.config("seed", a.seed);
    }
    let spec = SweepSpec {
        lambda1: a.lambda1,
        lambda2s,
        mu: a.mu,
        models,
        objective,
        method,
    };
    let rows = two_source_sweep(&spec)?;
    let unstable: Vec<String> = rows
        .iter()
        .filter(|row| !row.stable && row.model != SweepModel::Mm11Star)
        .map(|row| sig12(row.lambda2))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !unstable.is_empty() {
        r.comment(format!(
            "unstable: total load >= 1 at lambda2={}; ps and fgfs use a {}-packet buffer there",
            unstable.join(","),
            a.n
        ));
    }
    r.csv(|w| analysis::write_sweep_csv(w, &rows));
    Ok(Status::Ok)
}

/// Runs one command; the rendered output goes to `--out` or `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Status, CliError> {
    let name = match &cli.command {
        Command::ClosedForm(_) => "closed-form",
        Command::Shs(_) => "shs",
        Command::Simulate(_) => "simulate",
        Command::Verify(_) => "verify",
        Command::Extremum(_) => "extremum",
        Command::Conjecture(_) => "conjecture",
        Command::Sweep(_) => "sweep",
    };
    let mut report = Report::new(name);
    let r = &mut report;
    let status = match &cli.command {
        Command::ClosedForm(a) => closed_form(a, r),
        Command::Shs(a) => shs(a, r),
        Command::Simulate(a) => simulate_cmd(a, r),
        Command::Verify(a) => verify(a, r),
        Command::Extremum(a) => extremum(a, r),
        Command::Conjecture(a) => conjecture(a, r),
        Command::Sweep(a) => sweep(a, r),
    }?;
    match &cli.out {
        Some(path) => write_to(path, &report.text)?,
        None => stdout
            .write_all(report.text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            })?,
    }
    Ok(status)
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(Status::Ok) => 0,
        Ok(Status::Violated) => {
            let _ = writeln!(stderr, "aoi: a checked bound is violated");
            1
        }
        Err(e) => {
            let _ = writeln!(stderr, "aoi: {e}");
            2
        }
    }
}
