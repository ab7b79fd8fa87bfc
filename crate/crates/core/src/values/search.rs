//! Minimization of the evaluated cost over restricted control classes.

use super::{cost_integral, Bias, CostQuadrature, ValueEstimate, Witness};
use crate::dynamics::{reachable_states, ControlSignal, ControlSystem, State};
use crate::error::{invalid, Error, Result};
use crate::exec::{self, Execution};
use crate::measures::{Evaluation, EvaluationKind};
use crate::quad::{golden_min, merge_breaks};

/// Values closer than this are ties; the earlier candidate wins.
const TIE: f64 = 1e-12;

/// Control class searched by [`value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Constant controls for uncontrolled systems, bang-bang with up to two
    /// switches for two-valued control sets, exhaustive search otherwise.
    Auto,
    Constant,
    BangBang { max_switches: usize },
    /// Every control sequence on `segments` pieces cut at quantiles of θ.
    Exhaustive { segments: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub method: SearchMethod,
    /// Segment count used when `Auto` resolves to exhaustive search.
    pub segments: usize,
    /// Coarse switch-time grid size for bang-bang search.
    pub coarse_grid: usize,
    pub refine_iters: usize,
    /// Largest number of exhaustive candidates evaluated.
    pub candidate_budget: usize,
    pub quadrature: CostQuadrature,
    pub use_oracles: bool,
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            method: SearchMethod::Auto,
            segments: 4,
            coarse_grid: 33,
            refine_iters: 60,
            candidate_budget: 100_000,
            quadrature: CostQuadrature::default(),
            use_oracles: true,
            execution: Execution::default(),
        }
    }
}

/// A closed-form optimal value with an optimal control.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub id: &'static str,
    pub value: f64,
    pub control: ControlSignal,
}

fn uniform_bounds(theta: &Evaluation) -> Option<(f64, f64)> {
    match theta.kind() {
        EvaluationKind::Uniform { a, b } => Some((*a, *b)),
        EvaluationKind::Shifted { base, offset } => uniform_bounds(base).map(|(a, b)| (a + offset, b + offset)),
        _ => None,
    }
}

/// Registered closed forms.
///
/// `bang-cost` under a uniform evaluation on `[a, b]` from `y0 ≥ 0`: climb
/// until `τ = max(0, (b − y0)/2)` and descend afterwards, which keeps the
/// state nonnegative up to `b` while spending as little `θ`-mass as possible
/// on the costly control. Below zero the cost is `K` whatever the control.
pub fn registered_oracle(sys: &ControlSystem, y0: &State, theta: &Evaluation) -> Option<Oracle> {
    if sys.id() != "bang-cost" || y0.dim() != 1 {
        return None;
    }
    let x = y0[0];
    let horizon = theta.effective_support_end();
    if x < 0.0 {
        return Some(Oracle {
            id: "bang-cost-negative",
            value: sys.metadata().cost_bound,
            control: ControlSignal::constant(-1.0, horizon).ok()?,
        });
    }
    let (a, b) = uniform_bounds(theta)?;
    let tau = (0.5 * (b - x)).max(0.0);
    let value = ((tau - a).max(0.0) / (b - a)).min(1.0);
    let control = if tau > 0.0 && tau < b {
        ControlSignal::new(vec![0.0, tau], vec![1.0, -1.0], b).ok()?
    } else if tau >= b {
        ControlSignal::constant(1.0, b).ok()?
    } else {
        ControlSignal::constant(-1.0, b).ok()?
    };
    Some(Oracle { id: "bang-cost-uniform", value, control })
}

pub fn value(sys: &ControlSystem, y0: &State, theta: &Evaluation, search: &SearchConfig) -> Result<ValueEstimate> {
    value_with_hints(sys, y0, theta, search, &[])
}

struct Best {
    value: f64,
    error: f64,
    control: ControlSignal,
}

impl Best {
    fn offer(slot: &mut Option<Best>, value: f64, error: f64, control: ControlSignal) {
        match slot {
            Some(b) if value >= b.value - TIE => {}
            _ => *slot = Some(Best { value, error, control }),
        }
    }
}

/// `V_θ(y0)` over the configured control class, also trying each hint
/// control. Ties keep the earliest candidate.
pub fn value_with_hints(
    sys: &ControlSystem,
    y0: &State,
    theta: &Evaluation,
    search: &SearchConfig,
    hints: &[ControlSignal],
) -> Result<ValueEstimate> {
    sys.check_state(y0)?;
    let tail_error = sys.metadata().cost_bound * theta.truncated_mass();
    if search.use_oracles {
        if let Some(o) = registered_oracle(sys, y0, theta) {
            let control = o.control.with_horizon(o.control.horizon().max(theta.effective_support_end()))?;
            let (numeric, err) = cost_integral(sys, y0, &control, theta, &search.quadrature)?;
            return Ok(ValueEstimate {
                value: o.value,
                bias: Bias::ExactOracle,
                tail_error,
                quad_error: err + (numeric - o.value).abs(),
                witness: Witness::Oracle { id: o.id.to_string(), control },
                budget_exhausted: false,
            });
        }
    }
    let horizon = theta.effective_support_end();
    let controls = sys.control_set().values();
    let method = match search.method {
        SearchMethod::Auto if controls.len() == 1 => SearchMethod::Constant,
        SearchMethod::Auto if controls.len() == 2 => SearchMethod::BangBang { max_switches: 2 },
        SearchMethod::Auto => SearchMethod::Exhaustive { segments: search.segments },
        m => m,
    };
    let eval = |u: &ControlSignal| cost_integral(sys, y0, u, theta, &search.quadrature);
    let mut best: Option<Best> = None;
    let mut exhausted = false;
    match method {
        SearchMethod::Constant | SearchMethod::Auto => {
            for &c in &controls {
                let u = ControlSignal::constant(c, horizon)?;
                let (v, e) = eval(&u)?;
                Best::offer(&mut best, v, e, u);
            }
        }
        SearchMethod::BangBang { max_switches } => {
            if controls.len() != 2 {
                return Err(invalid("bang-bang search needs exactly two control values"));
            }
            bang_bang(&eval, &controls, horizon, max_switches, search, &mut best)?;
        }
        SearchMethod::Exhaustive { segments } => {
            exhausted = exhaustive(&eval, &controls, theta, horizon, segments, search, &mut best)?;
        }
    }
    for hint in hints {
        let u = if hint.horizon() >= horizon { hint.clone() } else { hint.with_horizon(horizon)? };
        let (v, e) = eval(&u)?;
        Best::offer(&mut best, v, e, u);
    }
    let best = best.expect("at least one candidate");
    let complete = controls.len() == 1;
    Ok(ValueEstimate {
        value: best.value,
        bias: if complete { Bias::ExactOracle } else { Bias::UpperBound },
        tail_error,
        quad_error: best.error,
        witness: Witness::Control(best.control),
        budget_exhausted: exhausted,
    })
}

/// Piecewise-constant control from switch times; switches outside
/// `(0, horizon)` and repeated values are dropped.
fn switching_control(values: &[f64], switches: &[f64], horizon: f64) -> Result<ControlSignal> {
    let mut bps = vec![0.0];
    let mut vals = vec![values[0]];
    for (i, &s) in switches.iter().enumerate() {
        let v = values[i + 1];
        if s >= horizon {
            break;
        }
        if s <= *bps.last().expect("nonempty") {
            *vals.last_mut().expect("nonempty") = v;
            continue;
        }
        if *vals.last().expect("nonempty") != v {
            bps.push(s);
            vals.push(v);
        }
    }
    let mut out_b = vec![bps[0]];
    let mut out_v = vec![vals[0]];
    for (b, v) in bps.into_iter().zip(vals).skip(1) {
        if *out_v.last().expect("nonempty") != v {
            out_b.push(b);
            out_v.push(v);
        }
    }
    ControlSignal::new(out_b, out_v, horizon)
}

fn bang_bang<E>(
    eval: &E,
    controls: &[f64],
    horizon: f64,
    max_switches: usize,
    search: &SearchConfig,
    best: &mut Option<Best>,
) -> Result<()>
where
    E: Fn(&ControlSignal) -> Result<(f64, f64)> + Sync,
{
    let (a, b) = (controls[0], controls[1]);
    for &c in controls {
        let u = ControlSignal::constant(c, horizon)?;
        let (v, e) = eval(&u)?;
        Best::offer(best, v, e, u);
    }
    if max_switches == 0 {
        return Ok(());
    }
    let n = search.coarse_grid.max(3);
    let grid: Vec<f64> = (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect();
    let tol = 1e-10 * horizon.max(1.0);

    for pattern in [[a, b], [b, a]] {
        let scan = exec::map_range(search.execution, n - 2, |i| {
            let u = switching_control(&pattern, &[grid[i + 1]], horizon)?;
            eval(&u).map(|(v, e)| (v, e, u))
        });
        let mut local: Option<Best> = None;
        let mut arg = 1;
        for (i, r) in scan.into_iter().enumerate() {
            let (v, e, u) = r?;
            if local.as_ref().is_none_or(|l| v < l.value - TIE) {
                arg = i + 1;
            }
            Best::offer(&mut local, v, e, u);
        }
        let mut failure: Option<Error> = None;
        let (tau, _) = golden_min(
            |t| match switching_control(&pattern, &[t], horizon).and_then(|u| eval(&u)) {
                Ok((v, _)) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            grid[arg - 1],
            grid[arg + 1],
            tol,
            search.refine_iters,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let u = switching_control(&pattern, &[tau], horizon)?;
        let (v, e) = eval(&u)?;
        Best::offer(&mut local, v, e, u);
        let l = local.expect("scanned");
        Best::offer(best, l.value, l.error, l.control);
    }

    if max_switches < 2 {
        return Ok(());
    }
    let m = (n / 2 + 1).max(3);
    let g2: Vec<f64> = (0..m).map(|i| horizon * i as f64 / (m - 1) as f64).collect();
    let pairs: Vec<(usize, usize)> = (1..m - 1).flat_map(|i| (i + 1..m - 1).map(move |j| (i, j))).collect();
    for pattern in [[a, b, a], [b, a, b]] {
        let scan = exec::map(search.execution, &pairs, |&(i, j)| {
            let u = switching_control(&pattern, &[g2[i], g2[j]], horizon)?;
            eval(&u).map(|(v, e)| (v, e, u))
        });
        let mut local: Option<Best> = None;
        let mut arg = (g2[1], g2[2]);
        for (r, &(i, j)) in scan.into_iter().zip(&pairs) {
            let (v, e, u) = r?;
            if local.as_ref().is_none_or(|l| v < l.value - TIE) {
                arg = (g2[i], g2[j]);
            }
            Best::offer(&mut local, v, e, u);
        }
        let step = g2[1];
        let (mut t1, mut t2) = arg;
        for _ in 0..2 {
            let mut failure: Option<Error> = None;
            let mut f = |x: f64, y: f64| match switching_control(&pattern, &[x, y], horizon).and_then(|u| eval(&u)) {
                Ok((v, _)) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            };
            t1 = golden_min(|x| f(x, t2), (t1 - step).max(0.0), t2, tol, search.refine_iters).0;
            t2 = golden_min(|y| f(t1, y), t1, (t2 + step).min(horizon), tol, search.refine_iters).0;
            if let Some(e) = failure {
                return Err(e);
            }
        }
        let u = switching_control(&pattern, &[t1, t2], horizon)?;
        let (v, e) = eval(&u)?;
        Best::offer(&mut local, v, e, u);
        let l = local.expect("scanned");
        Best::offer(best, l.value, l.error, l.control);
    }
    Ok(())
}

fn exhaustive<E>(
    eval: &E,
    controls: &[f64],
    theta: &Evaluation,
    horizon: f64,
    segments: usize,
    search: &SearchConfig,
    best: &mut Option<Best>,
) -> Result<bool>
where
    E: Fn(&ControlSignal) -> Result<(f64, f64)> + Sync,
{
    if !(1..=6).contains(&segments) {
        return Err(invalid(format!("exhaustive search supports 1..=6 segments, got {segments}")));
    }
    let cuts: Vec<f64> = (1..segments)
        .map(|i| theta.quantile(i as f64 / segments as f64))
        .collect::<Result<_>>()?;
    let bps = merge_breaks(cuts, 0.0, horizon);
    let starts = &bps[..bps.len() - 1];
    let m = controls.len();
    let total = m.checked_pow(starts.len() as u32).unwrap_or(usize::MAX);
    let count = total.min(search.candidate_budget);
    let scan = exec::map_range(search.execution, count, |idx| {
        let mut digits = vec![0usize; starts.len()];
        let mut r = idx;
        for d in digits.iter_mut().rev() {
            *d = r % m;
            r /= m;
        }
        let vals: Vec<f64> = digits.iter().map(|&d| controls[d]).collect();
        let u = switching_control(&vals, &starts[1..], horizon)?;
        eval(&u).map(|(v, e)| (v, e, u))
    });
    for r in scan {
        let (v, e, u) = r?;
        Best::offer(best, v, e, u);
    }
    Ok(count < total)
}

/// `V_{T_t♯θ}(y0)` computed directly on the shifted evaluation.
pub fn shifted_value(
    sys: &ControlSystem,
    y0: &State,
    theta: &Evaluation,
    t: f64,
    search: &SearchConfig,
) -> Result<ValueEstimate> {
    value(sys, y0, &theta.shift_pushforward(t)?, search)
}

/// `inf_{ȳ ∈ R_t(y0)} V_θ(ȳ)` over an inner approximation of the reachable
/// set; a cross-check of [`shifted_value`].
pub fn shifted_value_via_reach(
    sys: &ControlSystem,
    y0: &State,
    theta: &Evaluation,
    t: f64,
    search: &SearchConfig,
    switch_budget: usize,
    dt: f64,
) -> Result<ValueEstimate> {
    let states = reachable_states(sys, y0, t, switch_budget, dt)?;
    let values = exec::map(search.execution, &states, |y| value(sys, y, theta, search));
    let mut best: Option<ValueEstimate> = None;
    for v in values {
        let v = v?;
        if best.as_ref().is_none_or(|b| v.value < b.value - TIE) {
            best = Some(v);
        }
    }
    best.ok_or_else(|| invalid("reachable set is empty"))
}
