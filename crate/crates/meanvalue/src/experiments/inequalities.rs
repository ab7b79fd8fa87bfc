use meanvalue_core::dynamics::builtins::{all_builtins, bang_cost, relax_to_one, rotation, rotation_controlled, stable_point};
use meanvalue_core::measures::{hahn_bound_check, total_variation_shift, HalfLineStep};
use meanvalue_core::values::{gamma_shift_check, sandwich_check, shift_inequality_check, EvaluationCatalog, SearchConfig};
use meanvalue_core::{ControlSignal, ControlSystem, Evaluation, State};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{p, require, Context, ParamSpec};
use crate::report::{num, Report};
use crate::CliError;

pub const INEQUALITY_PARAMS: &[ParamSpec] = &[
    p("hahn_cases", "1000", "randomized Hahn-bound cases"),
    p("controls", "200", "randomized controls for the cost-shift bound"),
    p("t", "0,0.5,1,2", "shifts of the shift-inequality sweep"),
    p("segments", "2", "segments of the exhaustive control search"),
    p("subadd_points", "20", "points per axis of the subadditivity grid"),
    p("subadd_step", "0.25", "spacing of the subadditivity grid"),
    p("sandwich_k", "5,10,20,40", "family indices of the sandwich chain"),
    p("T0", "1", "short-shift window of the sandwich chain"),
    p("sandwich_t", "0,0.5,1,2,5,10,20,40,80", "shift grid of the sandwich chain"),
];

const SLACK: f64 = -1e-9;

fn start_state(sys: &ControlSystem) -> State {
    if sys.dim() == 2 {
        State::planar(1.0, 0.0)
    } else {
        State::scalar(0.0)
    }
}

fn random_step<R: Rng>(rng: &mut R, pieces: usize) -> meanvalue_core::Result<HalfLineStep> {
    let mut starts = vec![0.0];
    for _ in 1..pieces {
        starts.push(starts.last().expect("nonempty") + rng.gen_range(0.05..2.0));
    }
    HalfLineStep::new(starts, (0..pieces).map(|_| rng.gen_range(0.0..=1.0)).collect())
}

pub fn inequalities(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "inequalities",
        super::find("inequalities").map_or("", |e| e.anchor),
        "-1e-9 on every bound; 1e-3 on the shift inequality; 2e-2 on the sandwich chain",
    );
    let hahn_cases: usize = ctx.params.get("hahn_cases", 1000)?;
    let controls: usize = ctx.params.get("controls", 200)?;
    let shifts: Vec<f64> = ctx.params.list("t", &[0.0, 0.5, 1.0, 2.0])?;
    let segments: usize = ctx.params.get("segments", 2)?;
    let subadd_points: usize = ctx.params.get("subadd_points", 20)?;
    let subadd_step: f64 = ctx.params.get("subadd_step", 0.25)?;
    let sandwich_k: Vec<f64> = ctx.params.list("sandwich_k", &[5.0, 10.0, 20.0, 40.0])?;
    let t0: f64 = ctx.params.get("T0", 1.0)?;
    let sandwich_t: Vec<f64> = ctx.params.list("sandwich_t", &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 80.0])?;
    require(segments >= 1 && subadd_step > 0.0 && t0 >= 0.0, "segments, subadd_step and T0 must be positive")?;
    require(shifts.iter().chain(&sandwich_t).all(|t| *t >= 0.0), "shifts must be nonnegative")?;

    let catalog = EvaluationCatalog::default();
    let cfg = SearchConfig { segments, execution: ctx.execution, ..SearchConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);

    // Hahn bound.
    let hahn_members: Vec<Evaluation> = catalog
        .members()
        .iter()
        .cloned()
        .chain([Evaluation::folded_normal(1.0, 2.0)?, Evaluation::step_density(&[0.1, 0.4, 0.0, 0.3, 0.2])?])
        .collect();
    let mut hahn_rows = Vec::with_capacity(hahn_cases);
    let mut hahn_min = f64::INFINITY;
    for case in 0..hahn_cases {
        let theta = hahn_members.choose(&mut rng).expect("nonempty");
        let t = rng.gen_range(0.0..2.0);
        let h = random_step(&mut rng, 10)?;
        let r = hahn_bound_check(theta, t, &h)?;
        hahn_min = hahn_min.min(r.slack);
        hahn_rows.push(vec![case.to_string(), theta.label(), num(t), num(r.lhs_minus), num(r.lhs_plus), num(r.tv), num(r.slack)]);
    }
    report.check("hahn bound", hahn_min >= SLACK, format!("min slack {hahn_min:.3e} over {hahn_cases} cases"));
    ctx.out.table(
        &mut report,
        "hahn.csv",
        "Randomized [0,1]-valued step functions against the shift TV bound.",
        &[
            ("case", "case index"),
            ("member", "evaluation"),
            ("t", "shift"),
            ("lhs_minus", "|int h dtheta - int h(s - t) dtheta|"),
            ("lhs_plus", "|int h dtheta - int h(s + t) dtheta|"),
            ("tv", "TV_t"),
            ("slack", "smallest bound minus left-hand side"),
        ],
        hahn_rows,
    )?;

    // Shift inequality over every built-in, catalog member and shift.
    let systems = all_builtins();
    let mut jobs: Vec<(usize, usize, f64)> = Vec::new();
    for s in 0..systems.len() {
        for m in 0..catalog.members().len() {
            jobs.extend(shifts.iter().map(|&t| (s, m, t)));
        }
    }
    let inner = SearchConfig { execution: meanvalue_core::Execution::Sequential, ..cfg.clone() };
    let results = meanvalue_core::exec::map(ctx.execution, &jobs, |&(s, m, t)| {
        shift_inequality_check(&systems[s], &start_state(&systems[s]), &catalog.members()[m], t, &inner)
    });
    let mut shift_rows = Vec::with_capacity(jobs.len());
    let (mut shift_min, mut shift_fail) = (f64::INFINITY, 0);
    for (&(s, m, t), r) in jobs.iter().zip(results) {
        let r = r?;
        shift_min = shift_min.min(r.margin);
        shift_fail += usize::from(!r.passed);
        shift_rows.push(vec![
            systems[s].id().to_string(),
            catalog.members()[m].label(),
            num(t),
            num(r.v_mu),
            num(r.v_shifted),
            num(r.tv_t),
            num(r.margin),
        ]);
    }
    report.check("shift inequality", shift_fail == 0, format!("{shift_fail} failures, min margin {shift_min:.3e}"));
    ctx.out.table(
        &mut report,
        "shift_inequality.csv",
        "V_mu against the shifted value plus 2 TV_t and the fixed slack.",
        &[
            ("system", "system id"),
            ("member", "evaluation"),
            ("t", "shift"),
            ("v_mu", "value under the evaluation"),
            ("v_shifted", "value under the shifted evaluation"),
            ("tv_t", "TV_t"),
            ("margin", "v_shifted + 2 tv_t + slack - v_mu"),
        ],
        shift_rows,
    )?;

    // Cost-shift bound on random controls.
    let gamma_systems = [bang_cost(10.0, false)?, stable_point(), rotation_controlled(), relax_to_one()];
    let mut gamma_rows = Vec::with_capacity(controls);
    let mut gamma_min = f64::INFINITY;
    for case in 0..controls {
        let sys = gamma_systems.choose(&mut rng).expect("nonempty");
        let theta = catalog.members().choose(&mut rng).expect("nonempty");
        let t = rng.gen_range(0.0..2.0);
        let horizon = theta.shift_pushforward(t)?.effective_support_end();
        let pieces = rng.gen_range(1..=6);
        let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..horizon)).collect();
        cuts.sort_by(f64::total_cmp);
        let mut breaks = vec![0.0];
        breaks.extend(cuts);
        breaks.dedup();
        let values: Vec<f64> = breaks.iter().map(|_| *sys.control_set().values().choose(&mut rng).expect("nonempty")).collect();
        let u = ControlSignal::new(breaks, values, horizon)?;
        let y0 = match &sys.metadata().invariant {
            Some(set) => set.sample(&mut rng),
            None => sys.metadata().sample_region.sample(&mut rng),
        };
        let r = gamma_shift_check(sys, &y0, &u, theta, t, &cfg)?;
        gamma_min = gamma_min.min(r.slack);
        gamma_rows.push(vec![
            case.to_string(),
            sys.id().to_string(),
            theta.label(),
            num(t),
            num(r.gamma),
            num(r.gamma_shifted),
            num(r.bound),
            num(r.slack),
        ]);
    }
    report.check("cost-shift bound", gamma_min >= SLACK, format!("min slack {gamma_min:.3e} over {controls} controls"));
    ctx.out.table(
        &mut report,
        "gamma_shift.csv",
        "Evaluated cost against the same control under the shifted evaluation.",
        &[
            ("case", "case index"),
            ("system", "system id"),
            ("member", "evaluation"),
            ("t", "shift"),
            ("gamma", "cost under the evaluation"),
            ("gamma_shifted", "cost under the shifted evaluation"),
            ("bound", "2 c (TV_t + tail) plus quadrature error, c the cost bound"),
            ("slack", "bound - |gamma - gamma_shifted|"),
        ],
        gamma_rows,
    )?;

    // TV subadditivity.
    let grid: Vec<f64> = (0..subadd_points).map(|i| i as f64 * subadd_step).collect();
    let mut sub_rows = Vec::new();
    let mut sub_min = f64::INFINITY;
    for theta in catalog.members() {
        let tv: Vec<(f64, f64)> = grid
            .iter()
            .map(|&s| total_variation_shift(theta, s).map(|v| (v.value, v.error)))
            .collect::<meanvalue_core::Result<_>>()?;
        let mut member_min = f64::INFINITY;
        for (i, &s) in grid.iter().enumerate() {
            for (j, &t) in grid.iter().enumerate() {
                let sum = total_variation_shift(theta, s + t)?;
                let slack = tv[i].0 + tv[j].0 + 2.0 * (tv[i].1 + tv[j].1 + sum.error) - sum.value;
                member_min = member_min.min(slack);
            }
        }
        sub_min = sub_min.min(member_min);
        sub_rows.push(vec![theta.label(), subadd_points.to_string(), num(member_min)]);
    }
    report.check("TV subadditivity", sub_min >= SLACK, format!("min slack {sub_min:.3e}"));
    ctx.out.table(
        &mut report,
        "subadditivity.csv",
        "Smallest TV_s + TV_t - TV_(s+t) on the grid for each catalog member.",
        &[("member", "evaluation"), ("points", "points per axis"), ("min_slack", "smallest slack on the grid")],
        sub_rows,
    )?;

    // Sandwich chain.
    let uniform_family = |late: bool| -> meanvalue_core::Result<Vec<(f64, Evaluation)>> {
        sandwich_k
            .iter()
            .map(|&k| if late { Evaluation::uniform(k, 2.0 * k) } else { Evaluation::uniform(0.0, k) }.map(|e| (k, e)))
            .collect()
    };
    let chains = [
        ("bang-cost uniform(0,k)", bang_cost(10.0, false)?, uniform_family(false)?),
        ("bang-cost uniform(k,2k)", bang_cost(10.0, false)?, uniform_family(true)?),
        ("rotation uniform(0,k)", rotation(), uniform_family(false)?),
    ];
    let mut sandwich_rows = Vec::new();
    for (name, sys, family) in &chains {
        let r = sandwich_check(sys, &start_state(sys), family, t0, &sandwich_t, &cfg)?;
        report.check(
            format!("sandwich {name}"),
            r.passed,
            format!("A {:.6} >= B_hi {:.6} >= B_lo {:.6} >= C {:.6} (slack {})", r.a, r.b_hi, r.b_lo, r.c, r.slack),
        );
        sandwich_rows.push(vec![name.to_string(), num(r.a), num(r.b_hi), num(r.b_lo), num(r.c), r.passed.to_string()]);
    }
    ctx.out.table(
        &mut report,
        "sandwich.csv",
        "Finite-k proxy of the limit chain along each family.",
        &[
            ("chain", "system and family"),
            ("a", "max over k of the min over shifts t <= T0"),
            ("b_hi", "largest unshifted value over the upper half of the family"),
            ("b_lo", "smallest unshifted value over the upper half of the family"),
            ("c", "max over k of the min over the whole shift grid"),
            ("passed", "whether the chain is ordered within the slack"),
        ],
        sandwich_rows,
    )?;
    Ok(report)
}
