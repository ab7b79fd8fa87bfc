use meanvalue_core::measures::{
    comb_shift_l1_exact, comb_step_exact, discrete_tv, ltc_diagnostic_with, step_density_tv_identity,
    total_variation_shift, total_variation_shift_quadrature, Rational,
};
use meanvalue_core::Evaluation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{linspace, p, require, Context, ParamSpec};
use crate::report::{num, Report};
use crate::CliError;

pub const TV_CURVES_PARAMS: &[ParamSpec] = &[
    p("uniform_k", "2,10", "widths k of Uniform(0,k)"),
    p("rates", "0.1,1", "exponential rates"),
    p("folded", "1:2,3:1,5:0.5", "folded-normal location:scale pairs"),
    p("comb_k", "2,4,8", "comb parameters"),
    p("s_max", "1", "largest shift"),
    p("s_points", "11", "number of shifts in [0, s_max]"),
];

fn folded_pairs(ctx: &Context) -> Result<Vec<(f64, f64)>, CliError> {
    ctx.params
        .list::<String>("folded", &["1:2".into(), "3:1".into(), "5:0.5".into()])?
        .iter()
        .map(|pair| {
            let (m, s) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("folded entry `{pair}` is not location:scale")))?;
            let parse = |x: &str| x.parse::<f64>().map_err(|e| CliError::Usage(format!("folded entry `{pair}`: {e}")));
            Ok((parse(m)?, parse(s)?))
        })
        .collect()
}

pub fn tv_curves(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "tv-curves",
        super::find("tv-curves").map_or("", |e| e.anchor),
        "1e-12 on closed forms, 1e-6 between the closed form and quadrature",
    );
    let s_max: f64 = ctx.params.get("s_max", 1.0)?;
    let s_points: usize = ctx.params.get("s_points", 11)?;
    require(s_max >= 0.0 && s_points >= 1, "s_max must be nonnegative and s_points positive")?;
    let grid = linspace(0.0, s_max, s_points);

    let mut members: Vec<(&str, String, Evaluation)> = Vec::new();
    for k in ctx.params.list("uniform_k", &[2.0, 10.0])? {
        members.push(("uniform", num(k), Evaluation::uniform(0.0, k)?));
    }
    for rate in ctx.params.list("rates", &[0.1, 1.0])? {
        members.push(("exponential", num(rate), Evaluation::exponential(rate)?));
    }
    for (m, s) in folded_pairs(ctx)? {
        members.push(("folded-normal", format!("{m}:{s}"), Evaluation::folded_normal(m, s)?));
    }
    for k in ctx.params.list::<u32>("comb_k", &[2, 4, 8])? {
        members.push(("comb", k.to_string(), Evaluation::comb(k)?));
    }

    let jobs: Vec<(usize, f64)> = (0..members.len()).flat_map(|i| grid.iter().map(move |&s| (i, s))).collect();
    let rows = meanvalue_core::exec::map(ctx.execution, &jobs, |&(i, s)| {
        let theta = &members[i].2;
        Ok::<_, meanvalue_core::Error>((total_variation_shift(theta, s)?, total_variation_shift_quadrature(theta, s)?))
    });

    let mut table = Vec::with_capacity(rows.len());
    let (mut closed_worst, mut cross_worst, mut range_ok) = (0.0f64, 0.0f64, true);
    for (&(i, s), row) in jobs.iter().zip(rows) {
        let (tv, quad) = row?;
        let (family, param, theta) = &members[i];
        let closed = match *family {
            "uniform" => Some((s / theta.support_end().expect("compact")).min(1.0)),
            "exponential" => param.parse::<f64>().ok().map(|rate| -(-rate * s).exp_m1()),
            _ => None,
        };
        if let Some(c) = closed {
            closed_worst = closed_worst.max((tv.value - c).abs());
            cross_worst = cross_worst.max((tv.value - quad.value).abs());
        }
        range_ok &= (0.0..=1.0).contains(&tv.value);
        table.push(vec![
            family.to_string(),
            param.clone(),
            num(s),
            num(tv.value),
            num(tv.error),
            tv.method.as_str().to_string(),
            num(quad.value),
        ]);
    }
    report.check("closed forms", closed_worst <= 1e-12, format!("max deviation {closed_worst:e}"));
    report.check("quadrature cross-check", cross_worst <= 1e-6, format!("max deviation {cross_worst:e}"));
    report.check("range", range_ok, "every TV value lies in [0, 1]");

    for k in ctx.params.list::<u32>("comb_k", &[2, 4, 8])? {
        let i = comb_shift_l1_exact(k, Rational::new(1, i128::from(k)))?;
        let bound = Rational::new(2 * i128::from(k) - 1, i128::from(k));
        report.check(format!("comb k={k}"), i >= bound, format!("I_(1/k) = {i} vs 2 - 1/k = {bound}"));
    }

    ctx.out.table(
        &mut report,
        "tv_curves.csv",
        "TV of the shift for each family member over the shift grid.",
        &[
            ("family", "uniform, exponential, folded-normal or comb"),
            ("parameter", "k, rate, location:scale or comb k"),
            ("s", "shift"),
            ("tv", "TV_s on the cheapest exact path"),
            ("error", "error bound of tv"),
            ("method", "analytic, scheffe-quadrature or exact-step"),
            ("quadrature_tv", "TV_s by quadrature of the density difference"),
        ],
        table,
    )?;
    Ok(report)
}

pub const LTC_PARAMS: &[ParamSpec] = &[
    p("horizon", "1", "sup of TV_s is taken over s in [0, horizon]"),
    p("k", "1,2,4,8,16,32", "family indices"),
    p("grid", "257", "shift grid size"),
    p("negative_scale", "1", "fixed scale of the folded normal N(k, scale)"),
];

pub fn ltc_families(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "ltc-families",
        super::find("ltc-families").map_or("", |e| e.anchor),
        "10% over the folded-normal bound; lower bound 0.1 for the fixed-scale family",
    );
    let horizon: f64 = ctx.params.get("horizon", 1.0)?;
    let ks: Vec<f64> = ctx.params.list("k", &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0])?;
    let grid: usize = ctx.params.get("grid", 257)?;
    let sigma: f64 = ctx.params.get("negative_scale", 1.0)?;
    require(horizon > 0.0 && grid >= 2, "horizon must be positive and grid at least 2")?;

    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    type Family = (&'static str, fn(f64, f64) -> meanvalue_core::Result<Evaluation>);
    let families: [Family; 4] = [
        ("uniform", |k, _| Evaluation::uniform(0.0, k)),
        ("exponential", |k, _| Evaluation::exponential(1.0 / k)),
        ("folded-normal-spreading", |k, _| Evaluation::folded_normal(0.0, k)),
        ("folded-normal-fixed-scale", |k, sigma| Evaluation::folded_normal(k, sigma)),
    ];
    let mut table = Vec::new();
    for (name, build) in families {
        let members: Vec<(f64, Evaluation)> =
            ks.iter().map(|&k| build(k, sigma).map(|t| (k, t))).collect::<meanvalue_core::Result<_>>()?;
        let rows = ltc_diagnostic_with(&members, horizon, grid, ctx.execution)?;
        for row in rows {
            let k = row.k;
            let (reference, ok, what) = match name {
                "uniform" => {
                    let exact = (horizon / k).min(1.0);
                    (exact, (row.sup.lower - exact).abs() <= 1e-9, "exact sup")
                }
                "exponential" => {
                    let exact = -(-horizon / k).exp_m1();
                    (exact, (row.sup.lower - exact).abs() <= 1e-9, "exact sup")
                }
                "folded-normal-spreading" => {
                    let bound = 2.0 * horizon / (k * sqrt_2pi);
                    (bound, row.sup.upper <= 1.1 * bound, "upper bound")
                }
                _ => (0.1, row.sup.lower >= 0.1, "lower bound"),
            };
            report.check(
                format!("{name} k={k}"),
                ok,
                format!("sup in [{:.6}, {:.6}], {what} {reference:.6}", row.sup.lower, row.sup.upper),
            );
            table.push(vec![
                name.to_string(),
                num(k),
                row.label,
                num(row.sup.lower),
                num(row.sup.upper),
                num(row.sup.argmax),
                num(reference),
            ]);
        }
    }
    ctx.out.table(
        &mut report,
        "ltc.csv",
        "Bracketed sup of TV_s over s in [0, horizon] along each family.",
        &[
            ("family", "uniform, exponential, folded-normal-spreading or folded-normal-fixed-scale"),
            ("k", "family index"),
            ("label", "member description"),
            ("sup_lower", "best TV value found"),
            ("sup_upper", "upper bound of the sup"),
            ("argmax", "shift attaining sup_lower"),
            ("reference", "exact sup, upper bound or lower bound the row is checked against"),
        ],
        table,
    )?;
    Ok(report)
}

pub const DISCRETE_LINK_PARAMS: &[ParamSpec] = &[
    p("cases", "100", "number of random distributions"),
    p("max_len", "20", "largest support size"),
    p("s_points", "11", "shifts on an even grid of [0, 1]"),
];

pub fn discrete_link(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "discrete-link",
        super::find("discrete-link").map_or("", |e| e.anchor),
        "1e-12 absolute",
    );
    let cases: usize = ctx.params.get("cases", 100)?;
    let max_len: usize = ctx.params.get("max_len", 20)?;
    let s_points: usize = ctx.params.get("s_points", 11)?;
    require(max_len >= 1 && s_points >= 1, "max_len and s_points must be positive")?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let grid = linspace(0.0, 1.0, s_points);
    let mut table = Vec::new();
    let mut worst = 0.0f64;
    for case in 0..cases {
        let len = rng.gen_range(1..=max_len);
        let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let mut xi: Vec<f64> = raw.iter().map(|x| x / total).collect();
        // Put the rounding residue on the largest entry so the sum is 1.
        let residue = 1.0 - xi.iter().sum::<f64>();
        let imax = (0..len).max_by(|&a, &b| xi[a].total_cmp(&xi[b])).expect("nonempty");
        xi[imax] += residue;
        let dtv = discrete_tv(&xi)?;
        for &s in &grid {
            let (lhs, rhs) = step_density_tv_identity(&xi, s)?;
            let diff = (lhs - rhs).abs();
            worst = worst.max(diff);
            table.push(vec![case.to_string(), len.to_string(), num(s), num(lhs), num(rhs), num(dtv), num(diff)]);
        }
    }
    report.check("identity", worst <= 1e-12, format!("max |I_s - s*dtv| = {worst:e} over {cases} cases"));
    ctx.out.table(
        &mut report,
        "discrete_link.csv",
        "Shift L1 distance of the unit-bin step density against s times the discrete variation.",
        &[
            ("case", "random distribution index"),
            ("len", "support size"),
            ("s", "shift in [0, 1]"),
            ("i_s", "L1 distance between the density and its shift"),
            ("s_dtv", "s times the discrete variation"),
            ("dtv", "discrete variation including the final drop to 0"),
            ("abs_diff", "|i_s - s_dtv|"),
        ],
        table,
    )?;
    Ok(report)
}

pub const LTC_PRIME_PARAMS: &[ParamSpec] = &[
    p("n", "2,3,4,5", "comb of n! for each n"),
    p("s", "1/2", "rational shift p/q"),
    p("include_n6", "false", "also run n = 6 (518400 cells)"),
    p("comb_k", "2,4,8", "comb parameters for the 1/k lower bound"),
];

fn factorial(n: u32) -> u32 {
    (1..=n).product()
}

fn parse_rational(raw: &str) -> Result<Rational, CliError> {
    let bad = || CliError::Usage(format!("shift `{raw}` is not a rational p/q"));
    let (p, q) = raw.split_once('/').unwrap_or((raw, "1"));
    let p: i128 = p.trim().parse().map_err(|_| bad())?;
    let q: i128 = q.trim().parse().map_err(|_| bad())?;
    if q <= 0 || p < 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn ltc_prime(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new(
        "ltc-prime",
        super::find("ltc-prime").map_or("", |e| e.anchor),
        "none: all comparisons are exact rational arithmetic",
    );
    let mut ns: Vec<u32> = ctx.params.list("n", &[2, 3, 4, 5])?;
    if ctx.params.get("include_n6", false)? && !ns.contains(&6) {
        ns.push(6);
    }
    require(ns.iter().all(|&n| (1..=6).contains(&n)), "n must lie in 1..=6")?;
    let s = parse_rational(ctx.params.raw("s").unwrap_or("1/2"))?;

    let rows = meanvalue_core::exec::map(ctx.execution, &ns, |&n| {
        let k = factorial(n);
        let g = comb_step_exact(k)?;
        let total = g.shift_l1(s, Rational::from_integer(0));
        let kk = Rational::from_integer(i128::from(k));
        let sliver = if s < kk { g.integral(kk - s, kk) } else { g.integral(Rational::from_integer(0), kk) };
        Ok::<_, meanvalue_core::Error>((n, k, total, total - sliver))
    });
    let mut table = Vec::new();
    for row in rows {
        let (n, k, total, interior) = row?;
        let bound = Rational::new(2, i128::from(k));
        // The interior difference vanishes when the shift is a whole number of periods 2/k.
        let periodic = (s * Rational::from_integer(i128::from(k)) / Rational::from_integer(2)).is_integer();
        if periodic {
            report.check(format!("interior n={n}"), interior == Rational::from_integer(0), format!("interior L1 = {interior}"));
        }
        if n >= 4 {
            report.check(format!("sliver n={n}"), total <= bound, format!("I_s = {total} vs 2/n! = {bound}"));
        }
        table.push(vec![
            n.to_string(),
            k.to_string(),
            (u64::from(k) * u64::from(k)).to_string(),
            s.to_string(),
            total.to_string(),
            num(to_f64(total)),
            interior.to_string(),
            bound.to_string(),
        ]);
    }
    ctx.out.table(
        &mut report,
        "ltc_prime.csv",
        "Exact L1 shift distance of Comb(n!) at a rational shift.",
        &[
            ("n", "factorial index"),
            ("k", "n!"),
            ("cells", "number of 1/k cells in [0, k)"),
            ("s", "shift"),
            ("i_s", "exact L1 distance as p/q"),
            ("i_s_f64", "i_s as a float"),
            ("interior", "L1 distance on [0, k - s]"),
            ("bound", "2/n!"),
        ],
        table,
    )?;

    let mut lower = Vec::new();
    for k in ctx.params.list::<u32>("comb_k", &[2, 4, 8])? {
        let i = comb_shift_l1_exact(k, Rational::new(1, i128::from(k)))?;
        let bound = Rational::new(2 * i128::from(k) - 1, i128::from(k));
        report.check(format!("lower k={k}"), i >= bound, format!("I_(1/k) = {i} vs {bound}"));
        lower.push(vec![k.to_string(), i.to_string(), num(to_f64(i)), bound.to_string()]);
    }
    ctx.out.table(
        &mut report,
        "comb_lower.csv",
        "L1 shift distance of Comb(k) at s = 1/k.",
        &[
            ("k", "comb parameter"),
            ("i_1_over_k", "exact L1 distance"),
            ("i_1_over_k_f64", "as a float"),
            ("bound", "2 - 1/k"),
        ],
        lower,
    )?;
    Ok(report)
}
