//! Controlled ODEs `y' = f(y, u)` with piecewise-constant controls.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Result};

pub mod builtins;
mod checks;
mod integrate;

pub use checks::{
    check_contraction, check_nonexpansive, estimate_regularity, reachable_states, ContractionReport,
    NonexpansiveReport, RegularityReport,
};
pub use integrate::{integrate, Trajectory, DIVERGENCE_GUARD};
pub(crate) use integrate::{advance, rk4_step};

/// Largest supported state dimension.
pub const MAX_DIM: usize = 4;

/// A point of `ℝ^d`, `d ≤ MAX_DIM`, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct State {
    data: [f64; MAX_DIM],
    dim: usize,
}

impl State {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(invalid(format!("state dimension must be 1..={MAX_DIM}, got {}", coords.len())));
        }
        let mut data = [0.0; MAX_DIM];
        data[..coords.len()].copy_from_slice(coords);
        Ok(Self { data, dim: coords.len() })
    }

    pub fn scalar(x: f64) -> Self {
        Self::zeros(1).with(0, x)
    }

    pub fn planar(x: f64, y: f64) -> Self {
        Self::zeros(2).with(0, x).with(1, y)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "state dimension out of range");
        Self { data: [0.0; MAX_DIM], dim }
    }

    fn with(mut self, i: usize, x: f64) -> Self {
        self.data[i] = x;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn dot(&self, other: &State) -> f64 {
        self.as_slice().iter().zip(other.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for State {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for State {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[..self.dim][i]
    }
}

impl Add for State {
    type Output = State;
    fn add(mut self, rhs: State) -> State {
        for i in 0..self.dim {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl Sub for State {
    type Output = State;
    fn sub(mut self, rhs: State) -> State {
        for i in 0..self.dim {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, mut rhs: State) -> State {
        for i in 0..rhs.dim {
            rhs.data[i] *= self;
        }
        rhs
    }
}

/// Admissible control values.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSet {
    Finite(Vec<f64>),
    /// `[lo, hi]` discretized with `points` equally spaced values.
    Interval { lo: f64, hi: f64, points: usize },
}

impl ControlSet {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ControlSet::Finite(v) => v.clone(),
            ControlSet::Interval { lo, hi, points } => {
                if *points <= 1 {
                    return vec![0.5 * (lo + hi)];
                }
                (0..*points).map(|i| lo + (hi - lo) * i as f64 / (*points - 1) as f64).collect()
            }
        }
    }

    /// Same set with a different discretization; finite sets are unchanged.
    pub fn refined(&self, points: usize) -> ControlSet {
        match self {
            ControlSet::Interval { lo, hi, .. } => ControlSet::Interval { lo: *lo, hi: *hi, points },
            other => other.clone(),
        }
    }
}

/// A piecewise-constant control: `values[i]` on `[breakpoints[i],
/// breakpoints[i+1])`, the last value held through the horizon and beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
}

impl ControlSignal {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, horizon: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(invalid("control signal needs one value per segment"));
        }
        if breakpoints[0] != 0.0 {
            return Err(invalid("control breakpoints must start at 0"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(invalid("control breakpoints must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("control values must be finite"));
        }
        if !(horizon >= *breakpoints.last().expect("nonempty")) || !horizon.is_finite() {
            return Err(invalid("control horizon must cover every breakpoint"));
        }
        Ok(Self { breakpoints, values, horizon })
    }

    pub fn constant(u: f64, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![u], horizon)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|b| *b <= t);
        self.values[idx.max(1) - 1]
    }

    /// Number of value changes between consecutive segments.
    pub fn switch_count(&self) -> usize {
        self.values.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Same control on a longer (or shorter) horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        let keep = self.breakpoints.partition_point(|b| *b <= horizon).max(1);
        Self::new(self.breakpoints[..keep].to_vec(), self.values[..keep].to_vec(), horizon)
    }

    /// `s ↦ u(s + t)`, truncated to the remaining horizon.
    pub fn delayed_view(&self, t: f64) -> Result<Self> {
        let first = self.value_at(t);
        let mut bps = vec![0.0];
        let mut vals = vec![first];
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if *b > t {
                bps.push(b - t);
                vals.push(*v);
            }
        }
        let last = *bps.last().expect("nonempty");
        Self::new(bps, vals, (self.horizon - t).max(last))
    }

    /// `s ↦ u(s − t)` for `s ≥ t`, preceded by `lead` on `[0, t)`.
    pub fn delayed_by(&self, t: f64, lead: f64) -> Result<Self> {
        if t == 0.0 {
            return Ok(self.clone());
        }
        let mut bps = vec![0.0];
        let mut vals = vec![lead];
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            bps.push(b + t);
            vals.push(*v);
        }
        Self::new(bps, vals, self.horizon + t)
    }

    /// Writes `t,u` rows, one per segment start.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "u"])?;
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            w.write_record([b.to_string(), v.to_string()])?;
        }
        w.write_record([self.horizon.to_string(), self.values.last().expect("nonempty").to_string()])?;
        w.flush()?;
        Ok(())
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lo: State,
    pub hi: State,
}

impl Region {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        let mut a = State::zeros(dim);
        let mut b = State::zeros(dim);
        for i in 0..dim {
            a[i] = lo;
            b[i] = hi;
        }
        Self { lo: a, hi: b }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> State {
        let mut y = self.lo;
        for i in 0..y.dim() {
            y[i] = rng.gen_range(self.lo[i]..=self.hi[i]);
        }
        y
    }
}

/// A set the controlled flow never leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvariantSet {
    Box(Region),
    /// The sphere `‖y‖ = radius`.
    Sphere { dim: usize, radius: f64 },
}

impl InvariantSet {
    pub fn contains(&self, y: &State, slack: f64) -> bool {
        match self {
            InvariantSet::Box(r) => (0..y.dim()).all(|i| y[i] >= r.lo[i] - slack && y[i] <= r.hi[i] + slack),
            InvariantSet::Sphere { radius, .. } => (y.norm() - radius).abs() <= slack,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> State {
        match self {
            InvariantSet::Box(r) => r.sample(rng),
            InvariantSet::Sphere { dim, radius } => loop {
                let mut y = State::zeros(*dim);
                for i in 0..*dim {
                    y[i] = rng.gen_range(-1.0..=1.0);
                }
                let n = y.norm();
                if n > 1e-3 && n <= 1.0 {
                    break (radius / n) * y;
                }
            },
        }
    }
}

/// Declared constants of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub lipschitz: f64,
    pub growth: f64,
    pub invariant: Option<InvariantSet>,
    /// Region used for sampling-based checks when no invariant set is known.
    pub sample_region: Region,
    /// Upper bound of the running cost.
    pub cost_bound: f64,
}

type FieldFn = dyn Fn(&State, f64) -> State + Send + Sync;
type CostFn = dyn Fn(&State, f64) -> f64 + Send + Sync;
type FlowFn = dyn Fn(&State, f64, f64) -> State + Send + Sync;
type EventFn = dyn Fn(&State, f64, f64) -> Vec<f64> + Send + Sync;

/// A controlled system `y' = f(y, u)` with running cost `g(y, u)`.
#[derive(Clone)]
pub struct ControlSystem {
    id: String,
    dim: usize,
    controls: ControlSet,
    field: Arc<FieldFn>,
    cost: Arc<CostFn>,
    flow: Option<Arc<FlowFn>>,
    events: Option<Arc<EventFn>>,
    meta: Metadata,
}

impl fmt::Debug for ControlSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlSystem")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("controls", &self.controls)
            .field("exact_flow", &self.flow.is_some())
            .field("meta", &self.meta)
            .finish()
    }
}

impl ControlSystem {
    pub fn new<F, G>(id: impl Into<String>, dim: usize, controls: ControlSet, field: F, cost: G, meta: Metadata) -> Result<Self>
    where
        F: Fn(&State, f64) -> State + Send + Sync + 'static,
        G: Fn(&State, f64) -> f64 + Send + Sync + 'static,
    {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(invalid(format!("system dimension must be 1..={MAX_DIM}")));
        }
        if controls.values().is_empty() {
            return Err(invalid("control set must not be empty"));
        }
        Ok(Self {
            id: id.into(),
            dim,
            controls,
            field: Arc::new(field),
            cost: Arc::new(cost),
            flow: None,
            events: None,
            meta,
        })
    }

    /// Closed-form solution `(y, u, τ) ↦ y(τ)` for a constant control.
    pub fn with_exact_flow<F>(mut self, flow: F) -> Self
    where
        F: Fn(&State, f64, f64) -> State + Send + Sync + 'static,
    {
        self.flow = Some(Arc::new(flow));
        self
    }

    /// Times in `(0, τ)` at which the running cost jumps or kinks along the
    /// flow started at `y` with constant control `u`.
    pub fn with_cost_events<F>(mut self, events: F) -> Self
    where
        F: Fn(&State, f64, f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.events = Some(Arc::new(events));
        self
    }

    pub fn without_exact_flow(mut self) -> Self {
        self.flow = None;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn control_set(&self) -> &ControlSet {
        &self.controls
    }

    pub fn with_control_set(mut self, controls: ControlSet) -> Self {
        self.controls = controls;
        self
    }

    pub fn metadata(&self) -> &Metadata {
        &self.meta
    }

    pub fn is_uncontrolled(&self) -> bool {
        self.controls.values().len() == 1
    }

    pub fn has_exact_flow(&self) -> bool {
        self.flow.is_some()
    }

    pub fn vector_field(&self, y: &State, u: f64) -> State {
        (self.field)(y, u)
    }

    pub fn running_cost(&self, y: &State, u: f64) -> f64 {
        (self.cost)(y, u)
    }

    pub fn exact_flow(&self, y: &State, u: f64, tau: f64) -> Option<State> {
        self.flow.as_ref().map(|f| f(y, u, tau))
    }

    pub fn cost_events(&self, y: &State, u: f64, tau: f64) -> Vec<f64> {
        match &self.events {
            Some(e) => e(y, u, tau).into_iter().filter(|t| *t > 0.0 && *t < tau).collect(),
            None => Vec::new(),
        }
    }

    pub(crate) fn check_state(&self, y: &State) -> Result<()> {
        if y.dim() != self.dim {
            return Err(invalid(format!(
                "state has dimension {} but system '{}' has dimension {}",
                y.dim(),
                self.id,
                self.dim
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_arithmetic() {
        let a = State::planar(1.0, 2.0);
        let b = State::planar(0.5, -1.0);
        assert_eq!((a - b).as_slice(), &[0.5, 3.0]);
        assert_eq!((2.0 * a).as_slice(), &[2.0, 4.0]);
        assert_eq!(a.dot(&b), -1.5);
        assert!(State::new(&[]).is_err());
    }

    #[test]
    fn control_signal_holds_last_value() {
        let u = ControlSignal::new(vec![0.0, 1.0, 2.5], vec![1.0, -1.0, 0.5], 3.0).unwrap();
        assert_eq!(u.value_at(0.0), 1.0);
        assert_eq!(u.value_at(1.0), -1.0);
        assert_eq!(u.value_at(10.0), 0.5);
        assert_eq!(u.switch_count(), 2);
        assert!(ControlSignal::new(vec![0.0, 0.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(ControlSignal::new(vec![0.5], vec![1.0], 1.0).is_err());
    }

    #[test]
    fn delays() {
        let u = ControlSignal::new(vec![0.0, 1.0], vec![1.0, -1.0], 3.0).unwrap();
        let d = u.delayed_by(2.0, 0.0).unwrap();
        assert_eq!(d.breakpoints(), &[0.0, 2.0, 3.0]);
        assert_eq!(d.value_at(2.5), 1.0);
        let v = u.delayed_view(0.5).unwrap();
        assert_eq!(v.breakpoints(), &[0.0, 0.5]);
        assert_eq!(v.value_at(0.0), 1.0);
        assert_eq!(v.horizon(), 2.5);
    }

    #[test]
    fn interval_control_grid() {
        let c = ControlSet::Interval { lo: -1.0, hi: 1.0, points: 5 };
        assert_eq!(c.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn csv_export() {
        let u = ControlSignal::new(vec![0.0, 1.0], vec![1.0, -1.0], 2.0).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,u\n0,1\n1,-1\n2,-1\n");
    }
}
