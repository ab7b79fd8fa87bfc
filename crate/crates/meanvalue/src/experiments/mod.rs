//! Experiment registry.

mod counter;
mod dynamics;
mod inequalities;
mod measures;
mod values;

use meanvalue_core::Execution;

use crate::config::{ExperimentConfig, Params};
use crate::report::{Output, Report};
use crate::CliError;

/// A declared experiment parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { key, default, help }
}

/// Parameters understood by every experiment.
pub const GLOBAL_PARAMS: &[ParamSpec] = &[p("execution", "parallel", "parallel or sequential batch execution")];

pub struct Context<'a> {
    pub params: &'a Params,
    pub out: Output,
    pub seed: u64,
    pub execution: Execution,
}

#[derive(Debug)]
pub struct Experiment {
    pub id: &'static str,
    pub anchor: &'static str,
    pub params: &'static [ParamSpec],
    run: fn(&Context) -> Result<Report, CliError>,
}

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        id: "tv-curves",
        anchor: "shift total variation of uniform, exponential, folded-normal and comb evaluations",
        params: measures::TV_CURVES_PARAMS,
        run: measures::tv_curves,
    },
    Experiment {
        id: "ltc-families",
        anchor: "long-term-condition diagnostics; folded normal satisfies it iff the scale diverges",
        params: measures::LTC_PARAMS,
        run: measures::ltc_families,
    },
    Experiment {
        id: "discrete-link",
        anchor: "shift L1 distance of a unit-bin step density equals s times the discrete variation",
        params: measures::DISCRETE_LINK_PARAMS,
        run: measures::discrete_link,
    },
    Experiment {
        id: "ex-0-1",
        anchor: "indicator cost averaged over odd and even unit intervals gives values 1 and 0",
        params: values::EX01_PARAMS,
        run: values::ex_0_1,
    },
    Experiment {
        id: "rotation",
        anchor: "uniform averages along the rotation converge to the circle average of the cost",
        params: values::ROTATION_PARAMS,
        run: values::rotation,
    },
    Experiment {
        id: "counter-1",
        anchor: "relaxation to 1: late evaluations give value 1; nonincreasing densities stay bounded away from 1",
        params: counter::COUNTER1_PARAMS,
        run: counter::counter_1,
    },
    Experiment {
        id: "counter-2",
        anchor: "bang-bang cost: value table max(0, 1/2 - y0/2k), zero diagonal, small V*",
        params: counter::COUNTER2_PARAMS,
        run: counter::counter_2,
    },
    Experiment {
        id: "nonexpansive",
        anchor: "nonexpansive condition and contraction property of the linear examples",
        params: dynamics::NONEXPANSIVE_PARAMS,
        run: dynamics::nonexpansive,
    },
    Experiment {
        id: "ltc-prime",
        anchor: "comb densities: large L1 shift at s = 1/k, vanishing interior difference at rational shifts",
        params: measures::LTC_PRIME_PARAMS,
        run: measures::ltc_prime,
    },
    Experiment {
        id: "inequalities",
        anchor: "Hahn bound, shift inequality, cost-shift bound, TV subadditivity and the limit sandwich",
        params: inequalities::INEQUALITY_PARAMS,
        run: inequalities::inequalities,
    },
];

/// Id that runs every experiment in order.
pub const ALL: &str = "all";

pub fn find(id: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

pub fn valid_ids() -> String {
    EXPERIMENTS.iter().map(|e| e.id).chain([ALL]).collect::<Vec<_>>().join(", ")
}

fn selected(id: &str) -> Result<Vec<&'static Experiment>, CliError> {
    if id == ALL {
        return Ok(EXPERIMENTS.iter().collect());
    }
    find(id)
        .map(|e| vec![e])
        .ok_or_else(|| CliError::Usage(format!("unknown experiment `{id}`; valid ids: {}", valid_ids())))
}

/// Rejects parameters none of the selected experiments declares.
fn validate_params(experiments: &[&Experiment], params: &Params) -> Result<(), CliError> {
    for key in params.keys() {
        let known = GLOBAL_PARAMS.iter().chain(experiments.iter().flat_map(|e| e.params)).any(|s| s.key == key);
        if !known {
            let mut accepted: Vec<&str> =
                GLOBAL_PARAMS.iter().chain(experiments.iter().flat_map(|e| e.params)).map(|s| s.key).collect();
            accepted.sort_unstable();
            accepted.dedup();
            return Err(CliError::Usage(format!("unknown parameter `{key}`; accepted: {}", accepted.join(", "))));
        }
    }
    Ok(())
}

/// Runs one experiment, or all of them for `all`. Artifacts go to
/// `out/<id>/`.
pub fn run(config: &ExperimentConfig) -> Result<Vec<Report>, CliError> {
    let experiments = selected(&config.id)?;
    validate_params(&experiments, &config.params)?;
    let execution = config.params.execution()?;
    let mut reports = Vec::with_capacity(experiments.len());
    for e in experiments {
        let ctx = Context {
            params: &config.params,
            out: Output::new(&config.out.join(e.id), config.format)?,
            seed: config.seed,
            execution,
        };
        let report = (e.run)(&ctx)?;
        ctx.out.finish(&report)?;
        reports.push(report);
    }
    Ok(reports)
}

/// Evenly spaced points `lo, …, hi`.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub(crate) fn require(cond: bool, msg: &str) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Usage(msg.into()))
    }
}
