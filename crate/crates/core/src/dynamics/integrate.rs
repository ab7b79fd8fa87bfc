use std::io::Write;

use super::{ControlSignal, ControlSystem, State};
use crate::error::{invalid, Error, Result};

/// States whose norm exceeds this abort integration.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Classical fourth-order Runge-Kutta step with the control held fixed.
pub(crate) fn rk4_step(sys: &ControlSystem, y: &State, u: f64, h: f64) -> State {
    let k1 = sys.vector_field(y, u);
    let k2 = sys.vector_field(&(*y + (0.5 * h) * k1), u);
    let k3 = sys.vector_field(&(*y + (0.5 * h) * k2), u);
    let k4 = sys.vector_field(&(*y + h * k3), u);
    *y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn guard(y: &State, time: f64) -> Result<()> {
    let norm = y.norm();
    if !(norm <= DIVERGENCE_GUARD) {
        return Err(Error::Divergence { time, norm, guard: DIVERGENCE_GUARD });
    }
    Ok(())
}

/// State after `tau` time units under the constant control `u`. Uses the
/// exact flow when the system has one, otherwise RK4 with steps ≤ `max_step`.
pub(crate) fn advance(sys: &ControlSystem, y: &State, u: f64, tau: f64, max_step: f64) -> State {
    if tau <= 0.0 {
        return *y;
    }
    if let Some(next) = sys.exact_flow(y, u, tau) {
        return next;
    }
    let n = (tau / max_step).ceil().max(1.0) as usize;
    let h = tau / n as f64;
    let mut x = *y;
    for _ in 0..n {
        x = rk4_step(sys, &x, u, h);
    }
    x
}

/// A solution sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub control: ControlSignal,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory has at least one state")
    }

    /// Writes `t,y1[,y2,…],u` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.states.first().map_or(1, State::dim);
        let mut header = vec!["t".to_string()];
        header.extend((1..=dim).map(|i| format!("y{i}")));
        header.push("u".into());
        w.write_record(&header)?;
        for (t, y) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.to_string()];
            row.extend(y.as_slice().iter().map(f64::to_string));
            row.push(self.control.value_at(*t).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `y' = f(y, u(t))` on `[0, T]`.
///
/// The grid is `{k·dt} ∪ {T}` refined with every control breakpoint, so no
/// step straddles a control switch. Each step uses the exact flow when one
/// is available and RK4 otherwise; both are deterministic.
pub fn integrate(sys: &ControlSystem, y0: &State, u: &ControlSignal, horizon: f64, dt: f64) -> Result<Trajectory> {
    sys.check_state(y0)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("step must be positive, got {dt}")));
    }
    if u.horizon() < horizon {
        return Err(Error::HorizonTooShort { horizon: u.horizon(), required: horizon });
    }
    let n = (horizon / dt).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).filter(|t| *t < horizon).collect();
    times.extend(u.breakpoints().iter().copied().filter(|b| *b > 0.0 && *b < horizon));
    times.push(horizon);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let mut states = Vec::with_capacity(times.len());
    let mut y = *y0;
    guard(&y, 0.0)?;
    states.push(y);
    for w in times.windows(2) {
        let ctrl = u.value_at(w[0]);
        y = advance(sys, &y, ctrl, w[1] - w[0], dt);
        guard(&y, w[1])?;
        states.push(y);
    }
    Ok(Trajectory { times, states, control: u.clone() })
}
