//! Built-in example systems, addressable by string id.

use super::{ControlSet, ControlSystem, InvariantSet, Metadata, Region, State};
use crate::error::{Error, Result};

/// Ids accepted by [`builtin`].
pub const BUILTIN_IDS: &[&str] = &[
    "rotation",
    "rotation-controlled",
    "stable-point",
    "drift-indicator",
    "relax-to-one",
    "bang-cost",
];

/// Tunable parameters of the built-in systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinParams {
    /// Cost on the negative half-line for `bang-cost`.
    pub bang_cost_k: f64,
    /// Use the Lipschitz regularization of `bang-cost` (numeric flow only).
    pub regularized: bool,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self { bang_cost_k: 10.0, regularized: false }
    }
}

pub fn builtin(id: &str, params: &BuiltinParams) -> Result<ControlSystem> {
    match id {
        "rotation" => Ok(rotation()),
        "rotation-controlled" => Ok(rotation_controlled()),
        "stable-point" => Ok(stable_point()),
        "drift-indicator" => Ok(drift_indicator()),
        "relax-to-one" => Ok(relax_to_one()),
        "bang-cost" => bang_cost(params.bang_cost_k, params.regularized),
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}

/// Every registered system with default parameters.
pub fn all_builtins() -> Vec<ControlSystem> {
    BUILTIN_IDS
        .iter()
        .map(|id| builtin(id, &BuiltinParams::default()).expect("registered id"))
        .collect()
}

fn rotate(y: &State, angle: f64) -> State {
    let (s, c) = angle.sin_cos();
    State::planar(c * y[0] - s * y[1], s * y[0] + c * y[1])
}

fn circle_cost(y: &State) -> f64 {
    (0.5 * (1.0 + 0.5 * y[0])).clamp(0.0, 1.0)
}

fn unit_circle() -> InvariantSet {
    InvariantSet::Sphere { dim: 2, radius: 1.0 }
}

/// `f(y) = i y` on the complex plane, `g(y) = (1 + Re y / 2) / 2`.
pub fn rotation() -> ControlSystem {
    ControlSystem::new(
        "rotation",
        2,
        ControlSet::Finite(vec![1.0]),
        |y, _| State::planar(-y[1], y[0]),
        |y, _| circle_cost(y),
        Metadata {
            lipschitz: 1.0,
            growth: 1.0,
            invariant: Some(unit_circle()),
            sample_region: Region::cube(2, -1.0, 1.0),
            cost_bound: 1.0,
        },
    )
    .expect("valid system")
    .with_exact_flow(|y, _, tau| rotate(y, tau))
}

/// `f(y, u) = i y u`, `u ∈ [−1, 1]`, same cost as [`rotation`].
pub fn rotation_controlled() -> ControlSystem {
    ControlSystem::new(
        "rotation-controlled",
        2,
        ControlSet::Interval { lo: -1.0, hi: 1.0, points: 5 },
        |y, u| State::planar(-u * y[1], u * y[0]),
        |y, _| circle_cost(y),
        Metadata {
            lipschitz: 1.0,
            growth: 1.0,
            invariant: Some(unit_circle()),
            sample_region: Region::cube(2, -1.0, 1.0),
            cost_bound: 1.0,
        },
    )
    .expect("valid system")
    .with_exact_flow(|y, u, tau| rotate(y, u * tau))
}

/// `f(y, u) = −y + u`, `u ∈ [−1, 1]`, `g(y) = min(1, (y − ½)² / 2.25)`.
pub fn stable_point() -> ControlSystem {
    ControlSystem::new(
        "stable-point",
        1,
        ControlSet::Interval { lo: -1.0, hi: 1.0, points: 5 },
        |y, u| State::scalar(-y[0] + u),
        |y, _| ((y[0] - 0.5).powi(2) / 2.25).min(1.0),
        Metadata {
            lipschitz: 1.0,
            growth: 1.0,
            invariant: Some(InvariantSet::Box(Region::cube(1, -1.0, 1.0))),
            sample_region: Region::cube(1, -1.0, 1.0),
            cost_bound: 1.0,
        },
    )
    .expect("valid system")
    .with_exact_flow(|y, u, tau| State::scalar(u + (y[0] - u) * (-tau).exp()))
}

/// `y' = 1` with cost `𝟙` on `⋃_{m ≥ 1} [2m − 1, 2m]`.
pub fn drift_indicator() -> ControlSystem {
    ControlSystem::new(
        "drift-indicator",
        1,
        ControlSet::Finite(vec![0.0]),
        |_, _| State::scalar(1.0),
        |y, _| {
            let x = y[0];
            if x >= 1.0 && (x.floor() as i64) % 2 == 1 {
                1.0
            } else {
                0.0
            }
        },
        Metadata {
            lipschitz: 0.0,
            growth: 1.0,
            invariant: None,
            sample_region: Region::cube(1, 0.0, 10.0),
            cost_bound: 1.0,
        },
    )
    .expect("valid system")
    .with_exact_flow(|y, _, tau| State::scalar(y[0] + tau))
    .with_cost_events(|y, _, tau| {
        let first = y[0].floor() + 1.0;
        let mut out = Vec::new();
        let mut k = first;
        while k - y[0] < tau {
            out.push(k - y[0]);
            k += 1.0;
        }
        out
    })
}

/// `y' = −(y − 1)` with cost `clamp(y, 0, 1)`.
pub fn relax_to_one() -> ControlSystem {
    ControlSystem::new(
        "relax-to-one",
        1,
        ControlSet::Finite(vec![0.0]),
        |y, _| State::scalar(1.0 - y[0]),
        |y, _| y[0].clamp(0.0, 1.0),
        Metadata {
            lipschitz: 1.0,
            growth: 1.0,
            invariant: None,
            sample_region: Region::cube(1, -2.0, 3.0),
            cost_bound: 1.0,
        },
    )
    .expect("valid system")
    .with_exact_flow(|y, _, tau| State::scalar(1.0 + (y[0] - 1.0) * (-tau).exp()))
    .with_cost_events(|y, _, _| if y[0] < 0.0 { vec![(1.0 - y[0]).ln()] } else { Vec::new() })
}

/// Control `±1`; `f = u` on `y ≥ 0` and `f = −1` below zero. The cost is 1
/// for `u = +1`, 0 for `u = −1` on `y ≥ 0`, and `K` below zero.
pub fn bang_cost(k: f64, regularized: bool) -> Result<ControlSystem> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::InvalidParameter(format!("bang-cost needs K > 1, got {k}")));
    }
    let meta = Metadata {
        lipschitz: 1.0,
        growth: 1.0,
        invariant: None,
        sample_region: Region::cube(1, -2.0, 2.0),
        cost_bound: k,
    };
    let cost = move |y: &State, u: f64| {
        if y[0] < 0.0 {
            k
        } else if u > 0.0 {
            1.0
        } else {
            0.0
        }
    };
    if regularized {
        let field = |y: &State, u: f64| {
            let x = y[0];
            State::scalar(if x < 0.0 {
                -1.0
            } else if u > 0.0 && x <= 1.0 {
                x
            } else {
                u
            })
        };
        return ControlSystem::new("bang-cost-regularized", 1, ControlSet::Finite(vec![1.0, -1.0]), field, cost, meta);
    }
    let field = |y: &State, u: f64| State::scalar(if y[0] >= 0.0 { u } else { -1.0 });
    Ok(ControlSystem::new("bang-cost", 1, ControlSet::Finite(vec![1.0, -1.0]), field, cost, meta)?
        .with_exact_flow(|y, u, tau| {
            let x = y[0];
            State::scalar(if x >= 0.0 && u > 0.0 { x + tau } else { x - tau })
        })
        .with_cost_events(|y, u, _| if y[0] >= 0.0 && u <= 0.0 { vec![y[0]] } else { Vec::new() }))
}

/// Strictly expansive `f(y) = y` with constant cost ½.
pub fn expanding() -> ControlSystem {
    ControlSystem::new(
        "expanding",
        1,
        ControlSet::Finite(vec![0.0]),
        |y, _| *y,
        |_, _| 0.5,
        Metadata {
            lipschitz: 1.0,
            growth: 1.0,
            invariant: None,
            sample_region: Region::cube(1, -1.0, 1.0),
            cost_bound: 1.0,
        },
    )
    .expect("valid system")
    .with_exact_flow(|y, _, tau| tau.exp() * *y)
}

/// Uncontrolled `y' = 0` with constant cost `c ∈ [0, 1]`.
pub fn constant_cost(c: f64) -> Result<ControlSystem> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("constant cost must lie in [0, 1], got {c}")));
    }
    Ok(ControlSystem::new(
        "constant-cost",
        1,
        ControlSet::Finite(vec![0.0]),
        |_, _| State::scalar(0.0),
        move |_, _| c,
        Metadata {
            lipschitz: 0.0,
            growth: 0.0,
            invariant: None,
            sample_region: Region::cube(1, -1.0, 1.0),
            cost_bound: 1.0,
        },
    )?
    .with_exact_flow(|y, _, _| *y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_knows_every_id() {
        for id in BUILTIN_IDS {
            assert_eq!(builtin(id, &BuiltinParams::default()).unwrap().id(), *id);
        }
        assert!(matches!(builtin("nope", &BuiltinParams::default()), Err(Error::UnknownSystem(_))));
        assert!(bang_cost(0.5, false).is_err());
    }

    #[test]
    fn exact_flows_solve_their_fields() {
        let h = 1e-6;
        let cases: Vec<(ControlSystem, State, f64)> = vec![
            (rotation(), State::planar(0.3, -0.8), 1.0),
            (rotation_controlled(), State::planar(0.6, 0.8), -0.5),
            (stable_point(), State::scalar(0.2), 1.0),
            (drift_indicator(), State::scalar(0.4), 0.0),
            (relax_to_one(), State::scalar(-1.0), 0.0),
            (bang_cost(10.0, false).unwrap(), State::scalar(2.0), -1.0),
            (expanding(), State::scalar(0.5), 0.0),
        ];
        for (sys, y, u) in cases {
            let y1 = sys.exact_flow(&y, u, 0.7).unwrap();
            let y2 = sys.exact_flow(&y, u, 0.7 + h).unwrap();
            let fd = (1.0 / h) * (y2 - y1);
            let f = sys.vector_field(&y1, u);
            assert!((fd - f).norm() < 1e-5, "{}", sys.id());
        }
    }

    #[test]
    fn indicator_cost_and_events() {
        let s = drift_indicator();
        assert_eq!(s.running_cost(&State::scalar(0.5), 0.0), 0.0);
        assert_eq!(s.running_cost(&State::scalar(1.5), 0.0), 1.0);
        assert_eq!(s.running_cost(&State::scalar(2.5), 0.0), 0.0);
        assert_eq!(s.cost_events(&State::scalar(0.5), 0.0, 2.0), vec![0.5, 1.5]);
    }

    #[test]
    fn bang_cost_values() {
        let s = bang_cost(10.0, false).unwrap();
        assert_eq!(s.running_cost(&State::scalar(0.0), 1.0), 1.0);
        assert_eq!(s.running_cost(&State::scalar(0.0), -1.0), 0.0);
        assert_eq!(s.running_cost(&State::scalar(-0.1), 1.0), 10.0);
        assert_eq!(s.exact_flow(&State::scalar(-1.0), 1.0, 1.0).unwrap()[0], -2.0);
        assert_eq!(s.cost_events(&State::scalar(1.0), -1.0, 3.0), vec![1.0]);
    }
}
