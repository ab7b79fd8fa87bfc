//! Evaluated costs `γ_θ(y0, u) = ∫ g(y(s), u(s)) dθ(s)`, value functions and
//! the inequality checks built on them.

use crate::dynamics::{rk4_step, ControlSignal, ControlSystem, State, DIVERGENCE_GUARD};
use crate::error::{invalid, Error, Result};
use crate::measures::Evaluation;
use crate::quad::{merge_breaks, GaussRule, GAUSS3, GAUSS5};

mod checks;
mod search;

pub use checks::{
    gamma_shift_check, nonuniform_convergence_probe, sandwich_check, shift_inequality_check, vstar_estimate,
    GammaShiftReport, ProbeRow, ProbeTable, SandwichReport, ShiftInequalityReport, VstarEstimate, VstarRow,
};
pub use search::{
    registered_oracle, shifted_value, shifted_value_via_reach, value, value_with_hints, Oracle, SearchConfig,
    SearchMethod,
};

/// Direction of the error introduced by a restricted control search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bias {
    /// Infimum over a subset of controls: never below the true value.
    UpperBound,
    /// A registered closed form, or a search that covers every control.
    ExactOracle,
}

impl Bias {
    pub fn as_str(self) -> &'static str {
        match self {
            Bias::UpperBound => "upper_bound",
            Bias::ExactOracle => "exact_oracle",
        }
    }
}

/// The control (or closed form) attaining a value.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Control(ControlSignal),
    Oracle { id: String, control: ControlSignal },
}

impl Witness {
    pub fn control(&self) -> &ControlSignal {
        match self {
            Witness::Control(c) => c,
            Witness::Oracle { control, .. } => control,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub value: f64,
    pub bias: Bias,
    /// Cost bound times the evaluation mass beyond the integration range.
    pub tail_error: f64,
    /// Gauss-Legendre 5 versus 3 point discrepancy, summed over steps.
    pub quad_error: f64,
    pub witness: Witness,
    /// Set when the search hit its candidate budget before finishing.
    pub budget_exhausted: bool,
}

/// Test family for the `V*` estimator.
#[derive(Debug, Clone)]
pub struct EvaluationCatalog {
    members: Vec<Evaluation>,
}

impl EvaluationCatalog {
    pub fn new(members: Vec<Evaluation>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("evaluation catalog must not be empty"));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Evaluation] {
        &self.members
    }

    pub fn with_member(mut self, theta: Evaluation) -> Self {
        self.members.push(theta);
        self
    }
}

impl Default for EvaluationCatalog {
    /// `Uniform(0,T)`, `Uniform(T,2T)` and `Exponential(1/T)` for
    /// `T ∈ {1, 5, 25, 125}`.
    fn default() -> Self {
        let mut members = Vec::new();
        for t in [1.0, 5.0, 25.0, 125.0] {
            members.push(Evaluation::uniform(0.0, t).expect("valid"));
            members.push(Evaluation::uniform(t, 2.0 * t).expect("valid"));
            members.push(Evaluation::exponential(1.0 / t).expect("valid"));
        }
        Self { members }
    }
}

/// Step control of the cost quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostQuadrature {
    /// Preferred step length.
    pub step: f64,
    /// Cap on the number of steps over the integration range; the step grows
    /// to `range / max_steps` when needed.
    pub max_steps: usize,
}

impl Default for CostQuadrature {
    fn default() -> Self {
        Self { step: 0.05, max_steps: 1000 }
    }
}

/// `γ_θ(y0, u)` with the default quadrature.
pub fn evaluate_cost(sys: &ControlSystem, y0: &State, u: &ControlSignal, theta: &Evaluation) -> Result<ValueEstimate> {
    evaluate_cost_with(sys, y0, u, theta, &CostQuadrature::default())
}

/// `γ_θ(y0, u)` on `[0, T_ε]`.
///
/// The range is cut at control switches, density breakpoints and cost
/// events, so every step sees a smooth integrand. Each step is integrated
/// with interior Gauss-Legendre nodes; states come from the exact flow, or
/// from RK4 with cubic Hermite dense output.
pub fn evaluate_cost_with(
    sys: &ControlSystem,
    y0: &State,
    u: &ControlSignal,
    theta: &Evaluation,
    quad: &CostQuadrature,
) -> Result<ValueEstimate> {
    let (value, quad_error) = cost_integral(sys, y0, u, theta, quad)?;
    Ok(ValueEstimate {
        value,
        bias: Bias::UpperBound,
        tail_error: sys.metadata().cost_bound * theta.truncated_mass(),
        quad_error,
        witness: Witness::Control(u.clone()),
        budget_exhausted: false,
    })
}

pub(crate) fn cost_integral(
    sys: &ControlSystem,
    y0: &State,
    u: &ControlSignal,
    theta: &Evaluation,
    quad: &CostQuadrature,
) -> Result<(f64, f64)> {
    sys.check_state(y0)?;
    let end = theta.effective_support_end();
    if u.horizon() < end * (1.0 - 1e-12) {
        return Err(Error::HorizonTooShort { horizon: u.horizon(), required: end });
    }
    let start = theta.support_start();
    let h = quad.step.max(end / quad.max_steps.max(1) as f64);
    let pieces = merge_breaks(
        u.breakpoints().iter().copied().chain(theta.breakpoints()).chain([start]),
        0.0,
        end,
    );
    let mut y = *y0;
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pieces.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = u.value_at(0.5 * (a + b));
        if b <= start {
            y = crate::dynamics::advance(sys, &y, c, b - a, h);
            check_guard(&y, b)?;
            continue;
        }
        let mut cuts = vec![a];
        cuts.extend(sys.cost_events(&y, c, b - a).into_iter().map(|e| a + e));
        cuts.push(b);
        for cw in cuts.windows(2) {
            let (p, q) = (cw[0], cw[1]);
            if q <= p {
                continue;
            }
            let n = ((q - p) / h).ceil().max(1.0) as usize;
            let step = (q - p) / n as f64;
            for i in 0..n {
                let s0 = p + i as f64 * step;
                let s1 = if i + 1 == n { q } else { s0 + step };
                let (y1, v5, v3) = integrate_step(sys, &y, c, theta, s0, s1);
                total += v5;
                err += (v5 - v3).abs();
                y = y1;
                check_guard(&y, s1)?;
            }
        }
    }
    Ok((total, err))
}

fn check_guard(y: &State, time: f64) -> Result<()> {
    let norm = y.norm();
    if !(norm <= DIVERGENCE_GUARD) {
        return Err(Error::Divergence { time, norm, guard: DIVERGENCE_GUARD });
    }
    Ok(())
}

/// Integrates `g(y, c) f_θ` over `[s0, s1]` starting from `y(s0) = y`.
/// Returns `(y(s1), Q5, Q3)`.
fn integrate_step(sys: &ControlSystem, y: &State, c: f64, theta: &Evaluation, s0: f64, s1: f64) -> (State, f64, f64) {
    let len = s1 - s0;
    let half = 0.5 * len;
    let mid = s0 + half;
    let rule = |r: &GaussRule, state_at: &dyn Fn(f64) -> State| -> f64 {
        r.nodes
            .iter()
            .zip(r.weights)
            .map(|(x, w)| {
                let s = mid + half * x;
                let dens = theta.density(s);
                if dens == 0.0 {
                    0.0
                } else {
                    w * sys.running_cost(&state_at(s - s0), c) * dens
                }
            })
            .sum::<f64>()
            * half
    };
    if sys.has_exact_flow() {
        let at = |tau: f64| sys.exact_flow(y, c, tau).expect("exact flow");
        let end = at(len);
        (end, rule(&GAUSS5, &at), rule(&GAUSS3, &at))
    } else {
        let end = rk4_step(sys, y, c, len);
        let f0 = sys.vector_field(y, c);
        let f1 = sys.vector_field(&end, c);
        let at = |tau: f64| {
            let r = tau / len;
            let (r2, r3) = (r * r, r * r * r);
            let h00 = 2.0 * r3 - 3.0 * r2 + 1.0;
            let h10 = r3 - 2.0 * r2 + r;
            let h01 = -2.0 * r3 + 3.0 * r2;
            let h11 = r3 - r2;
            h00 * *y + (h10 * len) * f0 + h01 * end + (h11 * len) * f1
        };
        (end, rule(&GAUSS5, &at), rule(&GAUSS3, &at))
    }
}
