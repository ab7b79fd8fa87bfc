//! Inequality chains between evaluated costs, values and shift total
//! variation, reported with their slack budgets.

use super::search::{shifted_value, value, value_with_hints, SearchConfig};
use super::{cost_integral, EvaluationCatalog, ValueEstimate};
use crate::dynamics::{ControlSignal, ControlSystem, State};
use crate::error::{invalid, Result};
use crate::exec;
use crate::measures::{total_variation_shift, Evaluation};

/// One catalog member in a `V*` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct VstarRow {
    pub label: String,
    /// `min_{t ∈ grid} V_{T_t♯μ}(y0)`.
    pub inner_min: f64,
    pub argmin_t: f64,
    /// Shifted values in `t_grid` order.
    pub shifted: Vec<f64>,
}

/// `max_μ min_t V_{T_t♯μ}(y0)` over a finite catalog and shift grid. The
/// inner minimum over a finite grid overestimates the infimum and the outer
/// maximum over a finite catalog underestimates the supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct VstarEstimate {
    pub value: f64,
    pub best_member: String,
    pub rows: Vec<VstarRow>,
}

pub fn vstar_estimate(
    sys: &ControlSystem,
    y0: &State,
    catalog: &EvaluationCatalog,
    t_grid: &[f64],
    search: &SearchConfig,
) -> Result<VstarEstimate> {
    if t_grid.is_empty() {
        return Err(invalid("shift grid must not be empty"));
    }
    let members = catalog.members();
    let jobs: Vec<(usize, f64)> = (0..members.len()).flat_map(|m| t_grid.iter().map(move |&t| (m, t))).collect();
    let inner = SearchConfig { execution: exec::Execution::Sequential, ..search.clone() };
    let results = exec::map(search.execution, &jobs, |&(m, t)| shifted_value(sys, y0, &members[m], t, &inner));
    let mut rows = Vec::with_capacity(members.len());
    let mut it = results.into_iter();
    for theta in members {
        let shifted = (0..t_grid.len())
            .map(|_| it.next().expect("one result per job").map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?;
        let (i, inner_min) = argmin(&shifted);
        rows.push(VstarRow { label: theta.label(), inner_min, argmin_t: t_grid[i], shifted });
    }
    let (best, value) = rows
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r.inner_min > acc.1 { (i, r.inner_min) } else { acc });
    Ok(VstarEstimate { value, best_member: rows[best].label.clone(), rows })
}

fn argmin(xs: &[f64]) -> (usize, f64) {
    xs.iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
}

/// `V_μ(y0) ≤ V_{T_t♯μ}(y0) + 2 TV_t(μ) + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftInequalityReport {
    pub t: f64,
    pub v_mu: f64,
    pub v_shifted: f64,
    pub tv_t: f64,
    pub slack: f64,
    /// `v_shifted + 2 tv_t + slack − v_mu`.
    pub margin: f64,
    pub quad_error: f64,
    pub tail_error: f64,
    pub passed: bool,
}

/// Fixed slack of the shift inequality.
pub const SHIFT_INEQUALITY_SLACK: f64 = 1e-3;

/// The value under `μ` is searched with the shifted problem's optimal
/// control as an extra candidate, so both sides are minimized over classes
/// that contain the control used in the inequality's argument.
pub fn shift_inequality_check(
    sys: &ControlSystem,
    y0: &State,
    mu: &Evaluation,
    t: f64,
    search: &SearchConfig,
) -> Result<ShiftInequalityReport> {
    let shifted = shifted_value(sys, y0, mu, t, search)?;
    let hint = shifted.witness.control().clone();
    let v_mu = value_with_hints(sys, y0, mu, search, &[hint])?;
    let tv = total_variation_shift(mu, t)?;
    let tv_t = tv.value + tv.error;
    let margin = shifted.value + 2.0 * tv_t + SHIFT_INEQUALITY_SLACK - v_mu.value;
    Ok(ShiftInequalityReport {
        t,
        v_mu: v_mu.value,
        v_shifted: shifted.value,
        tv_t,
        slack: SHIFT_INEQUALITY_SLACK,
        margin,
        quad_error: v_mu.quad_error + shifted.quad_error,
        tail_error: v_mu.tail_error + shifted.tail_error,
        passed: margin >= -1e-9,
    })
}

/// `|γ_θ(y0,u) − γ_{T_t♯θ}(y0,u)| ≤ 2 c (TV_t(θ) + tail)` with `c` the cost
/// bound (1 for costs in `[0, 1]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaShiftReport {
    pub gamma: f64,
    pub gamma_shifted: f64,
    pub bound: f64,
    pub slack: f64,
}

impl GammaShiftReport {
    pub fn passed(&self) -> bool {
        self.slack >= -1e-9
    }
}

pub fn gamma_shift_check(
    sys: &ControlSystem,
    y0: &State,
    u: &ControlSignal,
    theta: &Evaluation,
    t: f64,
    search: &SearchConfig,
) -> Result<GammaShiftReport> {
    let shifted = theta.shift_pushforward(t)?;
    let (g, e1) = cost_integral(sys, y0, u, theta, &search.quadrature)?;
    let (gs, e2) = cost_integral(sys, y0, u, &shifted, &search.quadrature)?;
    let tv = total_variation_shift(theta, t)?;
    let c = sys.metadata().cost_bound;
    let tail = theta.truncated_mass();
    let bound = 2.0 * c * (tv.value + tv.error + tail) + e1 + e2;
    Ok(GammaShiftReport { gamma: g, gamma_shifted: gs, bound, slack: bound - (g - gs).abs() })
}

/// The ordered chain `A + slack ≥ B_hi ≥ B_lo ≥ C − slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    /// `max_k min_{t ≤ T0} V_{T_t♯θ^k}`.
    pub a: f64,
    /// `max` of `V_{θ^k}` over the tail of the family.
    pub b_hi: f64,
    /// `min` of `V_{θ^k}` over the tail of the family.
    pub b_lo: f64,
    /// `max_k min_{t ∈ grid} V_{T_t♯θ^k}`.
    pub c: f64,
    pub slack: f64,
    /// `(k, V_{θ^k}, min_{t ≤ T0}, min_{t ∈ grid})` per member.
    pub rows: Vec<(f64, f64, f64, f64)>,
    pub passed: bool,
}

/// Default slack of [`sandwich_check`].
pub const SANDWICH_SLACK: f64 = 2e-2;

/// Finite-`k` proxy for the limit inequalities along an LTC family: the
/// tail is the upper half of the family, in the given order.
pub fn sandwich_check(
    sys: &ControlSystem,
    y0: &State,
    family: &[(f64, Evaluation)],
    t0: f64,
    t_grid: &[f64],
    search: &SearchConfig,
) -> Result<SandwichReport> {
    if family.is_empty() || t_grid.is_empty() {
        return Err(invalid("sandwich check needs a family and a shift grid"));
    }
    if !t_grid.contains(&0.0) {
        return Err(invalid("shift grid must contain 0"));
    }
    let inner = SearchConfig { execution: exec::Execution::Sequential, ..search.clone() };
    let jobs: Vec<(usize, f64)> = (0..family.len()).flat_map(|m| t_grid.iter().map(move |&t| (m, t))).collect();
    let results = exec::map(search.execution, &jobs, |&(m, t)| shifted_value(sys, y0, &family[m].1, t, &inner));
    let mut it = results.into_iter();
    let mut rows = Vec::with_capacity(family.len());
    for (k, _) in family {
        let vals: Vec<(f64, f64)> = t_grid
            .iter()
            .map(|&t| it.next().expect("one result per job").map(|v| (t, v.value)))
            .collect::<Result<_>>()?;
        let v0 = vals.iter().find(|(t, _)| *t == 0.0).expect("grid has 0").1;
        let near = vals.iter().filter(|(t, _)| *t <= t0).map(|p| p.1).fold(f64::INFINITY, f64::min);
        let all = vals.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        rows.push((*k, v0, near, all));
    }
    let tail = &rows[rows.len() / 2..];
    let a = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let c = rows.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    let b_hi = tail.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let b_lo = tail.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let slack = SANDWICH_SLACK;
    let passed = a + slack >= b_hi && b_hi >= b_lo && b_lo >= c - slack;
    Ok(SandwichReport { a, b_hi, b_lo, c, slack, rows, passed })
}

/// One cell of the non-uniformity table.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub y0: f64,
    pub k: f64,
    pub value: f64,
    /// `max(0, ½ − y0/(2k))`.
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// `V_{θ̄^k}(k)` for each `k`.
    pub diagonal: Vec<(f64, f64)>,
    pub max_deviation: f64,
    pub max_diagonal: f64,
}

/// Values of `bang-cost` under `Uniform(0, k)` on a `(y0, k)` grid, plus the
/// diagonal `y0 = k` that witnesses non-uniform convergence.
pub fn nonuniform_convergence_probe(
    sys: &ControlSystem,
    y0_grid: &[f64],
    k_grid: &[f64],
    search: &SearchConfig,
) -> Result<ProbeTable> {
    let cells: Vec<(f64, f64)> = y0_grid.iter().flat_map(|&y| k_grid.iter().map(move |&k| (y, k))).collect();
    let eval = |&(y, k): &(f64, f64)| -> Result<ValueEstimate> {
        value(sys, &State::scalar(y), &Evaluation::uniform(0.0, k)?, search)
    };
    let values = exec::map(search.execution, &cells, eval);
    let mut rows = Vec::with_capacity(cells.len());
    for (&(y0, k), v) in cells.iter().zip(values) {
        rows.push(ProbeRow { y0, k, value: v?.value, expected: (0.5 - y0 / (2.0 * k)).max(0.0) });
    }
    let diag = exec::map(search.execution, k_grid, |&k| eval(&(k, k)).map(|v| (k, v.value)));
    let diagonal = diag.into_iter().collect::<Result<Vec<_>>>()?;
    let max_deviation = rows.iter().map(|r| (r.value - r.expected).abs()).fold(0.0, f64::max);
    let max_diagonal = diagonal.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    Ok(ProbeTable { rows, diagonal, max_deviation, max_diagonal })
}
