use std::f64::consts::PI;

use meanvalue_core::dynamics::builtins::{drift_indicator, rotation as rotation_system};
use meanvalue_core::dynamics::integrate;
use meanvalue_core::values::evaluate_cost;
use meanvalue_core::{ControlSignal, Evaluation, State};

use super::{p, require, Context, ParamSpec};
use crate::report::{num, Report};
use crate::CliError;

pub const EX01_PARAMS: &[ParamSpec] = &[p("k", "1,5,20", "number of unit intervals carrying mass")];

/// Uniform density on the `k` odd (`[2m−1, 2m]`) or even (`[2m−2, 2m−1]`)
/// unit intervals.
pub(crate) fn alternating(k: usize, odd: bool) -> meanvalue_core::Result<Evaluation> {
    let w: Vec<f64> = (0..2 * k).map(|i| if (i % 2 == 1) == odd { 1.0 } else { 0.0 }).collect();
    Evaluation::step_density(&w)
}

pub fn ex_0_1(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new("ex-0-1", super::find("ex-0-1").map_or("", |e| e.anchor), "1e-6 absolute");
    let ks: Vec<usize> = ctx.params.list("k", &[1, 5, 20])?;
    require(ks.iter().all(|&k| k >= 1), "k must be positive")?;
    let sys = drift_indicator();
    let y0 = State::scalar(0.0);
    let rows = meanvalue_core::exec::map(ctx.execution, &ks, |&k| {
        let u = ControlSignal::constant(0.0, 2.0 * k as f64)?;
        let mu = evaluate_cost(&sys, &y0, &u, &alternating(k, true)?)?.value;
        let nu = evaluate_cost(&sys, &y0, &u, &alternating(k, false)?)?.value;
        Ok::<_, meanvalue_core::Error>((k, mu, nu))
    });
    let mut table = Vec::new();
    for row in rows {
        let (k, mu, nu) = row?;
        report.check(format!("k={k}"), (mu - 1.0).abs() <= 1e-6 && nu.abs() <= 1e-6, format!("V_mu = {mu}, V_nu = {nu}"));
        table.push(vec![k.to_string(), num(mu), num(nu)]);
    }
    ctx.out.table(
        &mut report,
        "ex_0_1.csv",
        "Values of the unit-speed drift with the odd-interval indicator cost.",
        &[
            ("k", "number of intervals"),
            ("V_mu", "value under the uniform density on the odd intervals"),
            ("V_nu", "value under the uniform density on the even intervals"),
        ],
        table,
    )?;
    Ok(report)
}

pub const ROTATION_PARAMS: &[ParamSpec] = &[
    p("horizons", "10,100", "T of the Uniform(0,T) evaluations"),
    p("angle", "0", "initial point on the unit circle"),
    p("dt", "0.001", "step of the norm-conservation run"),
];

pub fn rotation(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "rotation",
        super::find("rotation").map_or("", |e| e.anchor),
        "|V - 1/2| <= 2 pi / T; norm drift 1e-6 on the numeric path",
    );
    let horizons: Vec<f64> = ctx.params.list("horizons", &[10.0, 100.0])?;
    let angle: f64 = ctx.params.get("angle", 0.0)?;
    let dt: f64 = ctx.params.get("dt", 1e-3)?;
    require(horizons.iter().all(|&t| t > 0.0) && dt > 0.0, "horizons and dt must be positive")?;
    let sys = rotation_system();
    let y0 = State::planar(angle.cos(), angle.sin());

    let mut table = Vec::new();
    for &t in &horizons {
        let u = ControlSignal::constant(1.0, t)?;
        let v = evaluate_cost(&sys, &y0, &u, &Evaluation::uniform(0.0, t)?)?;
        let bound = 2.0 * PI / t;
        let err = (v.value - 0.5).abs();
        report.check(format!("T={t}"), err <= bound, format!("V = {:.9}, |V - 1/2| = {err:.3e} <= {bound:.3e}", v.value));
        table.push(vec![num(t), num(v.value), num(err), num(bound)]);
    }
    ctx.out.table(
        &mut report,
        "rotation.csv",
        "Values of the rotation under Uniform(0,T).",
        &[
            ("T", "horizon"),
            ("value", "value (the system is uncontrolled)"),
            ("abs_error", "|value - 1/2|"),
            ("bound", "2 pi / T"),
        ],
        table,
    )?;

    let t_max = horizons.iter().copied().fold(0.0, f64::max);
    let u = ControlSignal::constant(1.0, t_max)?;
    let numeric = integrate(&sys.clone().without_exact_flow(), &y0, &u, t_max, dt)?;
    let drift = numeric.states.iter().map(|y| (y.norm() - 1.0).abs()).fold(0.0, f64::max);
    report.check("norm conservation", drift <= 1e-6, format!("max |‖y‖ - 1| = {drift:.3e} over T = {t_max}, dt = {dt}"));

    let one_turn = ControlSignal::constant(1.0, 2.0 * PI)?;
    let traj = integrate(&sys, &y0, &one_turn, 2.0 * PI, 0.05)?;
    if let Some(w) = ctx.out.file(
        &mut report,
        "rotation_trajectory.csv",
        "One period of the rotation on the exact-flow path.",
        &[("t", "time"), ("y1", "real part"), ("y2", "imaginary part"), ("u", "control")],
    )? {
        traj.write_csv(w)?;
    }
    Ok(report)
}
