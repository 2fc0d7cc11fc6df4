use super::{Reset, ShsError, ShsModel};
use crate::linalg::{SolveError, SolverKind, SystemBuilder, DEFAULT_GS_MAX_SWEEPS, DEFAULT_GS_TOLERANCE};

const BALANCE_LIMIT: f64 = 1e-12;
const AGE_RESIDUAL_LIMIT: f64 = 1e-10;
/// Negative entries smaller than this fraction of the largest entry are
/// rounding noise and are set to zero.
const NEGATIVE_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AgeSystemSolution {
    pub pi: Vec<f64>,
    /// `v[q][j]`, zero outside the support of the system.
    pub v: Vec<Vec<f64>>,
    pub aaoi: f64,
    /// Number of unknowns actually solved for after pruning.
    pub unknowns: usize,
    pub balance_residual: f64,
    pub age_residual: f64,
}

/// Stationary distribution of the discrete chain; self-loops are ignored.
pub fn stationary_distribution(m: &ShsModel) -> Result<Vec<f64>, ShsError> {
    stationary_with(&canonical(m)?, SolverKind::default()).map(|(pi, _)| pi)
}

/// Transitions sorted by (from, to, rate, reset) so every floating-point
/// accumulation below is independent of the order the model lists them in.
fn canonical(m: &ShsModel) -> Result<ShsModel, ShsError> {
    let key = |k: usize| {
        let t = &m.transitions()[k];
        let reset: Vec<i64> = t
            .reset
            .0
            .iter()
            .map(|r| match r {
                Reset::Copy(i) => *i as i64,
                Reset::Zero => -1,
            })
            .collect();
        (t.from, t.to, t.rate.to_bits(), reset)
    };
    let mut order: Vec<usize> = (0..m.transitions().len()).collect();
    order.sort_by_cached_key(|&k| key(k));
    m.reorder_transitions(&order)
}

fn stationary_with(m: &ShsModel, kind: SolverKind) -> Result<(Vec<f64>, f64), ShsError> {
    let n = m.states().len();
    let mut out = vec![0.0; n];
    for t in m.transitions() {
        if t.from != t.to {
            out[t.from] += t.rate;
        }
    }
    let dense = match kind {
        SolverKind::Auto { dense_limit } => n <= dense_limit,
        SolverKind::Dense => true,
        SolverKind::GaussSeidel { .. } => false,
    };
    let mut pi = if dense {
        stationary_dense(m, &out)?
    } else {
        stationary_iterative(m, &out, kind)?
    };
    let scale = pi.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    for p in pi.iter_mut() {
        if *p < 0.0 {
            if -*p > NEGATIVE_NOISE * scale {
                return Err(solve_err(m, SolveError::Singular { n }));
            }
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let residual = balance_residual(m, &out, &pi);
    if residual > BALANCE_LIMIT {
        return Err(ShsError::Inaccurate {
            model: describe(m),
            what: "global balance",
            residual,
            limit: BALANCE_LIMIT,
        });
    }
    Ok((pi, residual))
}

/// Grassmann-Taksar-Heyman state reduction. Subtraction-free, so every
/// component keeps full relative accuracy even when `pi` spans many
/// orders of magnitude.
fn stationary_dense(m: &ShsModel, out: &[f64]) -> Result<Vec<f64>, ShsError> {
    let n = out.len();
    let mut a = vec![0.0f64; n * n];
    for t in m.transitions() {
        if t.from != t.to {
            a[t.from * n + t.to] += t.rate;
        }
    }
    let mut s = vec![0.0f64; n];
    for k in (1..n).rev() {
        let sk: f64 = a[k * n..k * n + k].iter().sum();
        if sk.is_nan() || sk <= 0.0 {
            return Err(solve_err(m, SolveError::Singular { n }));
        }
        s[k] = sk;
        for i in 0..k {
            let f = a[i * n + k] / sk;
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                if j != i {
                    a[i * n + j] += f * a[k * n + j];
                }
            }
        }
    }
    let mut pi = vec![0.0f64; n];
    pi[0] = 1.0;
    for k in 1..n {
        let inflow: f64 = (0..k).map(|i| pi[i] * a[i * n + k]).sum();
        pi[k] = inflow / s[k];
    }
    if pi.iter().any(|v| !v.is_finite()) {
        return Err(solve_err(m, SolveError::Singular { n }));
    }
    Ok(pi)
}

/// Gauss-Seidel on `pi_j out_j = sum_i pi_i q_ij`, renormalized each sweep.
fn stationary_iterative(m: &ShsModel, out: &[f64], kind: SolverKind) -> Result<Vec<f64>, ShsError> {
    let n = out.len();
    let (tolerance, max_sweeps) = match kind {
        SolverKind::GaussSeidel { tolerance, max_sweeps } => (tolerance, max_sweeps),
        _ => (DEFAULT_GS_TOLERANCE, DEFAULT_GS_MAX_SWEEPS),
    };
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for t in m.transitions() {
        if t.from != t.to {
            incoming[t.to].push((t.from, t.rate));
        }
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        for j in 0..n {
            let inflow: f64 = incoming[j].iter().map(|(i, r)| pi[*i] * r).sum();
            pi[j] = inflow / out[j];
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 8 == 0 {
            residual = balance_residual(m, out, &pi);
            if residual <= tolerance.max(BALANCE_LIMIT * 0.01) {
                return Ok(pi);
            }
        }
    }
    Err(solve_err(
        m,
        SolveError::NotConverged {
            sweeps: max_sweeps,
            residual,
        },
    ))
}

/// Largest balance violation, relative to the total flow through the state.
fn balance_residual(m: &ShsModel, out: &[f64], pi: &[f64]) -> f64 {
    let n = out.len();
    let mut inflow = vec![0.0; n];
    for t in m.transitions() {
        if t.from != t.to {
            inflow[t.to] += pi[t.from] * t.rate;
        }
    }
    (0..n)
        .map(|j| {
            let o = pi[j] * out[j];
            let scale = o + inflow[j];
            if scale == 0.0 {
                0.0
            } else {
                (o - inflow[j]).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

pub fn solve_age_system(m: &ShsModel) -> Result<AgeSystemSolution, ShsError> {
    solve_age_system_with(m, SolverKind::default())
}

/// Solves, for every state `q`,
/// `v_q * R_q = b_q pi_q + sum_{l into q} rate_l * (v_{from(l)} A_l)`,
/// where `R_q` is the total rate out of `q` including self-loops.
pub fn solve_age_system_with(m: &ShsModel, kind: SolverKind) -> Result<AgeSystemSolution, ShsError> {
    let m = &canonical(m)?;
    let (pi, balance_residual) = stationary_with(m, kind)?;
    let n = m.states().len();
    let d = m.age_dim();

    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, t) in m.transitions().iter().enumerate() {
        outgoing[t.from].push(k);
        incoming[t.to].push(k);
    }
    // A self-loop copying x_j onto itself adds its rate to both sides of
    // row (q, j); it is dropped from both so the diagonal has no cancellation.
    let keeps = |t: &super::Transition, j: usize| !(t.from == t.to && t.reset.0[j] == Reset::Copy(j));

    let support = support(m, &incoming);
    let mut index = vec![usize::MAX; n * d];
    let mut order = Vec::new();
    for q in 0..n {
        for j in 0..d {
            if support[q * d + j] {
                index[q * d + j] = order.len();
                order.push((q, j));
            }
        }
    }

    let mut builder = SystemBuilder::new(order.len());
    for &(q, j) in &order {
        let rhs = if m.states()[q].growth[j] { pi[q] } else { 0.0 };
        let diag = outgoing[q]
            .iter()
            .map(|&k| &m.transitions()[k])
            .filter(|t| keeps(t, j))
            .map(|t| t.rate)
            .sum();
        let entries = incoming[q].iter().filter_map(|&k| {
            let t = &m.transitions()[k];
            match t.reset.0[j] {
                Reset::Copy(i) if keeps(t, j) && support[t.from * d + i] => Some((index[t.from * d + i], -t.rate)),
                _ => None,
            }
        });
        builder.push_row(diag, rhs, entries);
    }
    let system = builder.finish();
    let x = system.solve(kind).map_err(|e| solve_err(m, e))?;
    let age_residual = system.relative_residual(&x);
    if age_residual > AGE_RESIDUAL_LIMIT {
        return Err(ShsError::Inaccurate {
            model: describe(m),
            what: "age system",
            residual: age_residual,
            limit: AGE_RESIDUAL_LIMIT,
        });
    }

    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut v = vec![vec![0.0; d]; n];
    for (u, &(q, j)) in order.iter().enumerate() {
        let mut value = x[u];
        if value < 0.0 {
            if -value > NEGATIVE_NOISE * scale {
                return Err(ShsError::Negative {
                    model: describe(m),
                    state: q,
                    coord: j,
                    value,
                });
            }
            value = 0.0;
        }
        v[q][j] = value;
    }
    let aaoi = v.iter().map(|vq| vq[0]).sum();
    Ok(AgeSystemSolution {
        pi,
        v,
        aaoi,
        unknowns: order.len(),
        balance_residual,
        age_residual,
    })
}

/// Coordinates that can be nonzero: growing ones, closed under copies.
fn support(m: &ShsModel, incoming: &[Vec<usize>]) -> Vec<bool> {
    let n = m.states().len();
    let d = m.age_dim();
    let mut s = vec![false; n * d];
    for (q, st) in m.states().iter().enumerate() {
        for j in 0..d {
            s[q * d + j] = st.growth[j];
        }
    }
    loop {
        let mut changed = false;
        for q in 0..n {
            for j in 0..d {
                if s[q * d + j] {
                    continue;
                }
                let fed = incoming[q].iter().any(|&k| {
                    let t = &m.transitions()[k];
                    matches!(t.reset.0[j], Reset::Copy(i) if s[t.from * d + i])
                });
                if fed {
                    s[q * d + j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return s;
        }
    }
}

fn describe(m: &ShsModel) -> String {
    format!(
        "{} ({} states, {} transitions, D = {})",
        m.name(),
        m.states().len(),
        m.transitions().len(),
        m.age_dim()
    )
}

fn solve_err(m: &ShsModel, source: SolveError) -> ShsError {
    ShsError::Solve {
        model: describe(m),
        source,
    }
}
