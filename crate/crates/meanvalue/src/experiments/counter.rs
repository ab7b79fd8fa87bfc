use meanvalue_core::dynamics::builtins::{bang_cost, relax_to_one};
use meanvalue_core::values::{nonuniform_convergence_probe, shifted_value, value, vstar_estimate, EvaluationCatalog, SearchConfig};
use meanvalue_core::{Evaluation, State};

use super::{linspace, p, require, Context, ParamSpec};
use crate::report::{num, Report};
use crate::CliError;

pub const COUNTER1_PARAMS: &[ParamSpec] = &[
    p("eps", "0.01", "distance of y(T_eps) from 1"),
    p("y0", "-1,0,0.5,2", "initial states"),
    p("t_max", "10", "largest shift"),
    p("t_points", "21", "shift grid size"),
    p("rate", "1", "rate of the fixed exponential family"),
    p("T", "1", "split time of the bound y(T) eta + (1 - eta)"),
];

fn search(ctx: &Context) -> SearchConfig {
    SearchConfig { execution: ctx.execution, ..SearchConfig::default() }
}

pub fn counter_1(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "counter-1",
        super::find("counter-1").map_or("", |e| e.anchor),
        "shifted values >= 1 - 2 eps; exponential values <= bound + 1e-3",
    );
    let eps: f64 = ctx.params.get("eps", 0.01)?;
    let y0s: Vec<f64> = ctx.params.list("y0", &[-1.0, 0.0, 0.5, 2.0])?;
    let t_max: f64 = ctx.params.get("t_max", 10.0)?;
    let t_points: usize = ctx.params.get("t_points", 21)?;
    let rate: f64 = ctx.params.get("rate", 1.0)?;
    let split: f64 = ctx.params.get("T", 1.0)?;
    require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)")?;
    require(t_max >= 0.0 && t_points >= 1 && split > 0.0, "t_max, t_points and T must be positive")?;
    let sys = relax_to_one();
    let cfg = search(ctx);
    let t_grid = linspace(0.0, t_max, t_points);

    let mut shift_rows = Vec::new();
    for &y0 in &y0s {
        let t_eps = ((y0 - 1.0).abs() / eps).ln().max(0.0);
        let theta = Evaluation::uniform(t_eps, t_eps + 1.0)?;
        let values = meanvalue_core::exec::map(ctx.execution, &t_grid, |&t| {
            shifted_value(&sys, &State::scalar(y0), &theta, t, &cfg).map(|v| v.value)
        });
        let mut min = f64::INFINITY;
        for (&t, v) in t_grid.iter().zip(values) {
            let v = v?;
            min = min.min(v);
            shift_rows.push(vec![num(y0), num(t_eps), num(t), num(v)]);
        }
        report.check(
            format!("late evaluation y0={y0}"),
            min >= 1.0 - 2.0 * eps,
            format!("min over shifts {min:.6} >= {:.6}", 1.0 - 2.0 * eps),
        );
    }
    ctx.out.table(
        &mut report,
        "counter_1_shift.csv",
        "Shifted values under Uniform(T_eps, T_eps + 1).",
        &[
            ("y0", "initial state"),
            ("T_eps", "time after which |y - 1| <= eps"),
            ("t", "shift"),
            ("shifted_value", "value under the shifted evaluation"),
        ],
        shift_rows,
    )?;

    let theta = Evaluation::exponential(rate)?;
    let eta = -(-rate * split).exp_m1();
    let mut exp_rows = Vec::new();
    for &y0 in y0s.iter().filter(|&&y| y < 1.0) {
        let v = value(&sys, &State::scalar(y0), &theta, &cfg)?.value;
        let y_t = 1.0 + (y0 - 1.0) * (-split).exp();
        let bound = y_t.clamp(0.0, 1.0) * eta + (1.0 - eta);
        report.check(
            format!("nonincreasing density y0={y0}"),
            v <= bound + 1e-3 && bound < 1.0,
            format!("V = {v:.6} <= {bound:.6} < 1"),
        );
        exp_rows.push(vec![num(y0), num(rate), num(split), num(eta), num(v), num(bound)]);
    }
    ctx.out.table(
        &mut report,
        "counter_1_exponential.csv",
        "Values under a fixed exponential evaluation against the bound y(T) eta + (1 - eta).",
        &[
            ("y0", "initial state below 1"),
            ("rate", "exponential rate"),
            ("T", "split time"),
            ("eta", "mass of [0, T]"),
            ("value", "value"),
            ("bound", "g(y(T)) eta + (1 - eta)"),
        ],
        exp_rows,
    )?;
    Ok(report)
}

pub const COUNTER2_PARAMS: &[ParamSpec] = &[
    p("K", "10", "cost of the state below 0"),
    p("k", "10,50", "widths of Uniform(0,k)"),
    p("y0", "0,1,5", "initial states of the value table"),
    p("vstar_t", "0,1,2,5,10,20,50,100,200,500,1000,2000,4000", "shift grid of the V* estimate"),
];

pub fn counter_2(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "counter-2",
        super::find("counter-2").map_or("", |e| e.anchor),
        "1e-3 on the value table, 1e-6 on the shifted uniforms, V* <= 0.05",
    );
    let k_cost: f64 = ctx.params.get("K", 10.0)?;
    let ks: Vec<f64> = ctx.params.list("k", &[10.0, 50.0])?;
    let y0s: Vec<f64> = ctx.params.list("y0", &[0.0, 1.0, 5.0])?;
    let t_grid: Vec<f64> =
        ctx.params.list("vstar_t", &[0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 4000.0])?;
    require(ks.iter().all(|&k| k > 0.0), "k must be positive")?;
    let sys = bang_cost(k_cost, false)?;
    let cfg = search(ctx);

    let probe = nonuniform_convergence_probe(&sys, &y0s, &ks, &cfg)?;
    let mut table = Vec::new();
    for r in &probe.rows {
        table.push(vec![num(r.y0), num(r.k), num(r.value), num(r.expected)]);
    }
    for &(k, v) in &probe.diagonal {
        table.push(vec![num(k), num(k), num(v), num(0.0)]);
    }
    report.check("value table", probe.max_deviation <= 1e-3, format!("max deviation {:.3e}", probe.max_deviation));
    report.check("diagonal", probe.max_diagonal <= 1e-3, format!("max |V(k)| {:.3e}", probe.max_diagonal));

    let mut late_worst = 0.0f64;
    for &k in &ks {
        for &y0 in y0s.iter().chain([k].iter()) {
            let v = value(&sys, &State::scalar(y0), &Evaluation::uniform(k, 2.0 * k)?, &cfg)?.value;
            late_worst = late_worst.max(v.abs());
        }
    }
    report.check("shifted uniforms", late_worst <= 1e-6, format!("max |V| {late_worst:.3e}"));
    ctx.out.table(
        &mut report,
        "counter_2_values.csv",
        "Values under Uniform(0,k); the rows with y0 = k form the diagonal.",
        &[
            ("y0", "initial state"),
            ("k", "width"),
            ("value", "value"),
            ("expected", "max(0, 1/2 - y0/2k)"),
        ],
        table,
    )?;

    let vstar = vstar_estimate(&sys, &State::scalar(0.0), &EvaluationCatalog::default(), &t_grid, &cfg)?;
    report.check("V*", vstar.value <= 0.05, format!("estimate {:.6} (best member {})", vstar.value, vstar.best_member));
    ctx.out.table(
        &mut report,
        "counter_2_vstar.csv",
        "Inner minimum over shifts for each catalog member at y0 = 0.",
        &[
            ("member", "catalog evaluation"),
            ("inner_min", "min over the shift grid of the shifted value"),
            ("argmin_t", "shift attaining it"),
        ],
        vstar.rows.iter().map(|r| vec![r.label.clone(), num(r.inner_min), num(r.argmin_t)]),
    )?;
    Ok(report)
}
