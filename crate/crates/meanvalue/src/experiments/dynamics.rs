use meanvalue_core::dynamics::builtins::{expanding, rotation_controlled, stable_point};
use meanvalue_core::dynamics::{check_contraction, check_nonexpansive, estimate_regularity, ControlSystem};
use meanvalue_core::{ControlSignal, State};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{p, require, Context, ParamSpec};
use crate::report::{num, Report};
use crate::CliError;

pub const NONEXPANSIVE_PARAMS: &[ParamSpec] = &[
    p("pairs", "200", "sampled pairs for the nonexpansive condition"),
    p("contraction_pairs", "50", "randomized pairs per system for the contraction check"),
    p("horizon", "5", "contraction horizon"),
    p("dt", "0.01", "contraction step"),
    p("segments", "5", "pieces of the random leading control"),
];

fn sample_state<R: Rng>(sys: &ControlSystem, rng: &mut R) -> State {
    let meta = sys.metadata();
    match &meta.invariant {
        Some(set) => set.sample(rng),
        None => meta.sample_region.sample(rng),
    }
}

fn random_control<R: Rng>(sys: &ControlSystem, horizon: f64, segments: usize, rng: &mut R) -> meanvalue_core::Result<ControlSignal> {
    let controls = sys.control_set().values();
    let mut cuts: Vec<f64> = (1..segments).map(|_| rng.gen_range(0.0..horizon)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut breaks = vec![0.0];
    breaks.extend(cuts.into_iter().filter(|c| *c > 0.0));
    breaks.dedup();
    let values = breaks.iter().map(|_| *controls.choose(rng).expect("nonempty control set")).collect();
    ControlSignal::new(breaks, values, horizon)
}

pub fn nonexpansive(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "nonexpansive",
        super::find("nonexpansive").map_or("", |e| e.anchor),
        "inner products <= 1e-9; displacement growth 10 dt L",
    );
    let pairs: usize = ctx.params.get("pairs", 200)?;
    let contraction_pairs: usize = ctx.params.get("contraction_pairs", 50)?;
    let horizon: f64 = ctx.params.get("horizon", 5.0)?;
    let dt: f64 = ctx.params.get("dt", 0.01)?;
    let segments: usize = ctx.params.get("segments", 5)?;
    require(pairs >= 1 && horizon > 0.0 && dt > 0.0 && segments >= 1, "pairs, horizon, dt and segments must be positive")?;

    let cases = [(stable_point(), true), (rotation_controlled(), true), (expanding(), false)];
    let mut table = Vec::new();
    let mut regularity = Vec::new();
    for (i, (sys, expected)) in cases.iter().enumerate() {
        let r = check_nonexpansive(sys, pairs, ctx.seed.wrapping_add(i as u64));
        let detail = match &r.worst {
            Some((y1, y2, a)) => format!("worst {:.3e} at y1={:?}, y2={:?}, a={a}", r.worst_value, y1.as_slice(), y2.as_slice()),
            None => "no pairs".into(),
        };
        let label = if *expected { "nonexpansive" } else { "rejected" };
        report.check(format!("{label} {}", sys.id()), r.passed == *expected, detail);
        table.push(vec![sys.id().to_string(), r.pairs.to_string(), num(r.worst_value), r.passed.to_string(), expected.to_string()]);

        let reg = estimate_regularity(sys, 400, &sys.metadata().sample_region, ctx.seed.wrapping_add(i as u64))?;
        regularity.push(vec![sys.id().to_string(), num(reg.l_hat), num(sys.metadata().lipschitz), num(reg.a_hat), reg.warnings.join("; ")]);
    }
    ctx.out.table(
        &mut report,
        "nonexpansive.csv",
        "Largest sampled max-min inner product per system.",
        &[
            ("system", "system id"),
            ("pairs", "sampled pairs"),
            ("worst_value", "largest max_a min_b <y1 - y2, f(y1,a) - f(y2,b)>"),
            ("passed", "whether every value is <= 1e-9"),
            ("expected", "whether the system should pass"),
        ],
        table,
    )?;
    ctx.out.table(
        &mut report,
        "regularity.csv",
        "Empirical Lipschitz and growth constants.",
        &[
            ("system", "system id"),
            ("l_hat", "sampled Lipschitz ratio"),
            ("l_declared", "declared Lipschitz constant"),
            ("a_hat", "sampled growth ratio"),
            ("warnings", "discrepancies with the declared constants"),
        ],
        regularity,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::new();
    for (sys, _) in cases.iter().filter(|c| c.1) {
        let jobs: Vec<(State, State, ControlSignal)> = (0..contraction_pairs)
            .map(|_| {
                let y1 = sample_state(sys, &mut rng);
                let y2 = sample_state(sys, &mut rng);
                random_control(sys, horizon, segments, &mut rng).map(|u| (y1, y2, u))
            })
            .collect::<meanvalue_core::Result<_>>()?;
        let results = meanvalue_core::exec::map(ctx.execution, &jobs, |(y1, y2, u)| check_contraction(sys, y1, y2, u, horizon, dt));
        let mut failures = 0;
        let mut worst_ratio = 0.0f64;
        for (j, r) in results.into_iter().enumerate() {
            let r = r?;
            if !r.passed {
                failures += 1;
            }
            if r.initial > 0.0 {
                worst_ratio = worst_ratio.max(r.max_displacement / r.initial);
            }
            rows.push(vec![
                sys.id().to_string(),
                j.to_string(),
                num(r.initial),
                num(r.max_displacement),
                num(r.final_displacement),
                num(r.tol_growth),
                r.passed.to_string(),
            ]);
        }
        report.check(
            format!("contraction {}", sys.id()),
            failures == 0,
            format!("{failures} of {contraction_pairs} pairs failed; worst growth ratio {worst_ratio:.6}"),
        );
    }
    ctx.out.table(
        &mut report,
        "contraction.csv",
        "Displacement between a trajectory and its closest-response companion.",
        &[
            ("system", "system id"),
            ("pair", "pair index"),
            ("initial", "initial distance"),
            ("max_displacement", "largest distance on the grid"),
            ("final_displacement", "distance at the horizon"),
            ("tol_growth", "allowed relative growth"),
            ("passed", "whether the displacement stayed within initial (1 + tol_growth)"),
        ],
        rows,
    )?;
    Ok(report)
}
