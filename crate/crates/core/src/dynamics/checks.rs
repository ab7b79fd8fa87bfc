//! Sampling-based checks of the standing assumptions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{advance, ControlSignal, ControlSystem, Region, State};
use crate::error::{invalid, Result};

/// Spatial resolution of [`reachable_states`] deduplication.
const REACH_DEDUP: f64 = 1e-6;

/// Endpoints at time `t` of every control with at most `switch_budget`
/// switches, placed on multiples of `dt`. An inner approximation of the
/// reachable set `R_t(y0)`, sorted and deduplicated.
pub fn reachable_states(sys: &ControlSystem, y0: &State, t: f64, switch_budget: usize, dt: f64) -> Result<Vec<State>> {
    sys.check_state(y0)?;
    if sys.dim() > 2 {
        return Err(invalid("reachable sets are only computed for d ≤ 2"));
    }
    if switch_budget > 3 {
        return Err(invalid("switch budget must be at most 3"));
    }
    if !(t.is_finite() && t >= 0.0) || !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("reachable set needs t ≥ 0 and dt > 0"));
    }
    let n = (t / dt).round() as usize;
    let grid: Vec<f64> = (1..n).map(|k| k as f64 * dt).filter(|g| *g < t).collect();
    let controls = sys.control_set().values();
    let mut found = BTreeMap::new();
    for &c in &controls {
        explore(sys, *y0, 0.0, c, switch_budget, t, dt, &grid, &controls, &mut found);
    }
    Ok(found.into_values().collect())
}

#[allow(clippy::too_many_arguments)]
fn explore(
    sys: &ControlSystem,
    y: State,
    s: f64,
    c: f64,
    budget: usize,
    t: f64,
    dt: f64,
    grid: &[f64],
    controls: &[f64],
    found: &mut BTreeMap<Vec<i64>, State>,
) {
    let end = advance(sys, &y, c, t - s, dt);
    let key = end.as_slice().iter().map(|x| (x / REACH_DEDUP).round() as i64).collect();
    found.entry(key).or_insert(end);
    if budget == 0 {
        return;
    }
    for &g in grid.iter().filter(|g| **g > s) {
        let mid = advance(sys, &y, c, g - s, dt);
        for &c2 in controls.iter().filter(|c2| **c2 != c) {
            explore(sys, mid, g, c2, budget - 1, t, dt, grid, controls, found);
        }
    }
}

/// Outcome of [`check_nonexpansive`].
#[derive(Debug, Clone, PartialEq)]
pub struct NonexpansiveReport {
    pub passed: bool,
    pub pairs: usize,
    /// Largest `max_a min_b ⟨y1 − y2, f(y1, a) − f(y2, b)⟩` seen.
    pub worst_value: f64,
    /// `(y1, y2, a)` attaining `worst_value`.
    pub worst: Option<(State, State, f64)>,
}

/// Samples pairs in the invariant set (or the sampling region) and checks
/// `sup_a inf_b ⟨y1 − y2, f(y1, a) − f(y2, b)⟩ ≤ 0` up to `1e-9`.
pub fn check_nonexpansive(sys: &ControlSystem, sample_pairs: usize, rng_seed: u64) -> NonexpansiveReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let controls = sys.control_set().values();
    let meta = sys.metadata();
    let mut worst_value = f64::NEG_INFINITY;
    let mut worst = None;
    for _ in 0..sample_pairs {
        let (y1, y2) = match &meta.invariant {
            Some(set) => (set.sample(&mut rng), set.sample(&mut rng)),
            None => (meta.sample_region.sample(&mut rng), meta.sample_region.sample(&mut rng)),
        };
        let d = y1 - y2;
        for &a in &controls {
            let fa = sys.vector_field(&y1, a);
            let inner = controls
                .iter()
                .map(|&b| d.dot(&(fa - sys.vector_field(&y2, b))))
                .fold(f64::INFINITY, f64::min);
            if inner > worst_value {
                worst_value = inner;
                worst = Some((y1, y2, a));
            }
        }
    }
    NonexpansiveReport { passed: worst_value <= 1e-9, pairs: sample_pairs, worst_value, worst }
}

/// Outcome of [`check_contraction`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub passed: bool,
    pub initial: f64,
    pub max_displacement: f64,
    pub final_displacement: f64,
    /// Allowed relative growth `10 · dt · L`.
    pub tol_growth: f64,
    /// The response control built for the second trajectory.
    pub response: ControlSignal,
}

/// Follows `y(·, u, y1)` and builds a response control `v` for `y2` step by
/// step, choosing at each grid step the control value whose one-step
/// endpoint is closest to the first trajectory (the discrete form of
/// minimizing `⟨y1 − y2, f(y1, a) − f(y2, b)⟩`). Checks
/// `‖y(t,u,y1) − y(t,v,y2)‖ ≤ ‖y1 − y2‖ (1 + 10·dt·L)` on the grid.
pub fn check_contraction(
    sys: &ControlSystem,
    y1: &State,
    y2: &State,
    u: &ControlSignal,
    horizon: f64,
    dt: f64,
) -> Result<ContractionReport> {
    sys.check_state(y1)?;
    sys.check_state(y2)?;
    if !(horizon > 0.0 && dt > 0.0) {
        return Err(invalid("contraction check needs a positive horizon and step"));
    }
    let n = (horizon / dt).ceil() as usize;
    let mut times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    times.extend(u.breakpoints().iter().copied().filter(|b| *b > 0.0 && *b < horizon));
    times.push(horizon);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let controls = sys.control_set().values();
    let tol_growth = 10.0 * dt * sys.metadata().lipschitz;
    let initial = (*y1 - *y2).norm();
    let limit = initial * (1.0 + tol_growth) + 1e-12;
    let (mut a_state, mut b_state) = (*y1, *y2);
    let mut max_disp = initial;
    let mut passed = true;
    let mut bps = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    for w in times.windows(2) {
        let (s, h) = (w[0], w[1] - w[0]);
        let a = u.value_at(s);
        let next_a = advance(sys, &a_state, a, h, dt);
        let (b, next_b) = controls
            .iter()
            .map(|&b| (b, advance(sys, &b_state, b, h, dt)))
            .fold(None::<(f64, State, f64)>, |best, (b, y)| {
                let d = (next_a - y).norm();
                match best {
                    Some(x) if x.2 <= d => Some(x),
                    _ => Some((b, y, d)),
                }
            })
            .map(|(b, y, _)| (b, y))
            .expect("nonempty control set");
        if vals.last() != Some(&b) {
            bps.push(s);
            vals.push(b);
        }
        a_state = next_a;
        b_state = next_b;
        let d = (a_state - b_state).norm();
        max_disp = max_disp.max(d);
        if d > limit {
            passed = false;
        }
    }
    Ok(ContractionReport {
        passed,
        initial,
        max_displacement: max_disp,
        final_displacement: (a_state - b_state).norm(),
        tol_growth,
        response: ControlSignal::new(bps, vals, horizon)?,
    })
}

/// Empirical regularity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// `max ‖f(y,u) − f(ȳ,u)‖ / ‖y − ȳ‖`.
    pub l_hat: f64,
    /// `max ‖f(y,u)‖ / (1 + ‖y‖)`.
    pub a_hat: f64,
    pub warnings: Vec<String>,
}

/// Samples pairs in `region`: half independent, half at log-uniform
/// distances between `1e-6` and `1e-1` of the region width, so that jumps
/// of the field show up as a blown-up Lipschitz ratio.
pub fn estimate_regularity(sys: &ControlSystem, samples: usize, region: &Region, rng_seed: u64) -> Result<RegularityReport> {
    if region.lo.dim() != sys.dim() {
        return Err(invalid("region dimension does not match the system"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let controls = sys.control_set().values();
    let width = (region.hi - region.lo).norm();
    let mut l_hat: f64 = 0.0;
    let mut a_hat: f64 = 0.0;
    for i in 0..samples {
        let y = region.sample(&mut rng);
        let ybar = if i % 2 == 0 {
            region.sample(&mut rng)
        } else {
            let scale = width * 10f64.powf(rng.gen_range(-6.0..-1.0));
            let mut dir = State::zeros(sys.dim());
            for j in 0..sys.dim() {
                dir[j] = rng.gen_range(-1.0..=1.0);
            }
            y + scale * dir
        };
        let dist = (y - ybar).norm();
        for &u in &controls {
            let fy = sys.vector_field(&y, u);
            a_hat = a_hat.max(fy.norm() / (1.0 + y.norm()));
            if dist > 0.0 {
                l_hat = l_hat.max((fy - sys.vector_field(&ybar, u)).norm() / dist);
            }
        }
    }
    let meta = sys.metadata();
    let mut warnings = Vec::new();
    if l_hat > meta.lipschitz * (1.0 + 1e-9) + 1e-9 {
        warnings.push(format!("Lipschitz estimate {l_hat:.6e} exceeds declared {}", meta.lipschitz));
    }
    if a_hat > meta.growth * (1.0 + 1e-9) + 1e-9 {
        warnings.push(format!("growth estimate {a_hat:.6e} exceeds declared {}", meta.growth));
    }
    Ok(RegularityReport { l_hat, a_hat, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::builtins::{bang_cost, expanding, relax_to_one, rotation, rotation_controlled, stable_point};

    #[test]
    fn uncontrolled_reach_is_a_singleton() {
        let r = reachable_states(&relax_to_one(), &State::scalar(0.0), 2.0, 3, 0.1).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0][0] - (1.0 - (-2f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn bang_cost_reach_with_one_switch() {
        let r = reachable_states(&bang_cost(10.0, false).unwrap(), &State::scalar(0.0), 2.0, 1, 0.5).unwrap();
        let xs: Vec<f64> = r.iter().map(|s| s[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn stable_point_reach_stays_in_box() {
        let r = reachable_states(&stable_point(), &State::scalar(0.9), 1.5, 2, 0.25).unwrap();
        assert!(r.len() > 5);
        assert!(r.iter().all(|y| y[0].abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn budget_and_dimension_limits() {
        assert!(reachable_states(&relax_to_one(), &State::scalar(0.0), 1.0, 4, 0.1).is_err());
        assert!(reachable_states(&relax_to_one(), &State::planar(0.0, 0.0), 1.0, 1, 0.1).is_err());
    }

    #[test]
    fn nonexpansive_examples() {
        assert!(check_nonexpansive(&stable_point(), 200, 1).passed);
        assert!(check_nonexpansive(&rotation_controlled(), 200, 2).passed);
        assert!(check_nonexpansive(&rotation(), 200, 3).passed);
        let r = check_nonexpansive(&expanding(), 200, 4);
        assert!(!r.passed && r.worst_value > 0.0 && r.worst.is_some());
    }

    #[test]
    fn contraction_examples() {
        let sys = stable_point();
        let u = ControlSignal::constant(1.0, 5.0).unwrap();
        let r = check_contraction(&sys, &State::scalar(0.5), &State::scalar(-0.5), &u, 5.0, 0.01).unwrap();
        assert!(r.passed);
        assert!(r.final_displacement <= (-5f64).exp() + 1e-9);
        let r = check_contraction(&sys, &State::scalar(0.2), &State::scalar(0.2), &u, 5.0, 0.01).unwrap();
        assert_eq!(r.max_displacement, 0.0);
        let rot = rotation();
        let u = ControlSignal::constant(1.0, 3.0).unwrap();
        let (a, b) = (State::planar(1.0, 0.0), State::planar(0.0, 1.0));
        let r = check_contraction(&rot, &a, &b, &u, 3.0, 0.01).unwrap();
        assert!((r.final_displacement - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn regularity_estimates() {
        let r = estimate_regularity(&stable_point(), 500, &Region::cube(1, -2.0, 2.0), 7).unwrap();
        assert!(r.l_hat <= 1.0 + 1e-9);
        let r = estimate_regularity(&rotation(), 500, &Region::cube(2, -0.7, 0.7), 7).unwrap();
        assert!(r.a_hat <= 1.0);
        let r = estimate_regularity(&bang_cost(10.0, false).unwrap(), 4000, &Region::cube(1, -2.0, 2.0), 7).unwrap();
        assert!(r.l_hat > 10.0 && !r.warnings.is_empty());
    }
}
