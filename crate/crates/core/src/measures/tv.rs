//! Shift total variation and long-term-condition diagnostics.
//!
//! `TV_s(θ) = sup_Q |θ(Q) − θ(Q + s)|` over Borel `Q ⊂ ℝ₊`. For a density
//! `f` (extended by zero to the negative axis) the supremum is attained by
//! the positive part of `f − f(· + s)` on `ℝ₊`, which gives
//!
//! ```text
//! TV_s(θ) = ½ ∫_{−s}^{∞} |f(x + s) − f(x)| dx = ½ (I_s(θ) + θ([0, s)))
//! ```
//!
//! with `I_s(θ) = ∫_0^∞ |f(x + s) − f(x)| dx`. The extra `θ([0, s))` is the
//! mass that the shift pushes off the half-line; dropping it is only valid
//! when `θ([0, s)) = 0`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::step::StepFunction;
use super::{neumaier_sum, Evaluation, EvaluationKind, HalfLineStep};
use crate::error::{invalid, Error, Result};
use crate::exec::{self, Execution};
use crate::quad::{golden_max, integrate_pieces, merge_breaks};

/// Absolute tolerance of the adaptive quadrature behind TV values.
const TV_QUAD_TOL: f64 = 1e-10;

/// Grid size used by [`sup_total_variation`] when none is given.
pub const SUP_GRID_POINTS: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMethod {
    Analytic,
    ScheffeQuadrature,
    ExactStep,
}

impl TvMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TvMethod::Analytic => "analytic",
            TvMethod::ScheffeQuadrature => "scheffe_quadrature",
            TvMethod::ExactStep => "exact_step",
        }
    }
}

/// A TV value with its numerical error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvValue {
    pub value: f64,
    pub error: f64,
    pub method: TvMethod,
}

fn check_shift(s: f64) -> Result<()> {
    if !s.is_finite() || s < 0.0 {
        return Err(invalid(format!("shift must be finite and nonnegative, got {s}")));
    }
    Ok(())
}

fn zero(method: TvMethod) -> TvValue {
    TvValue { value: 0.0, error: 0.0, method }
}

/// `TV_s(θ)`, using the cheapest exact path available for the family.
pub fn total_variation_shift(theta: &Evaluation, s: f64) -> Result<TvValue> {
    check_shift(s)?;
    match theta.kind() {
        EvaluationKind::Uniform { a, b } => Ok(TvValue {
            value: (s / (b - a)).min(1.0),
            error: 0.0,
            method: TvMethod::Analytic,
        }),
        EvaluationKind::Exponential { rate } => Ok(TvValue {
            value: -(-rate * s).exp_m1(),
            error: 0.0,
            method: TvMethod::Analytic,
        }),
        // The whole-line L¹ distance is translation invariant, and a shifted
        // evaluation never loses mass below zero that its base would keep.
        EvaluationKind::Shifted { base, .. } => total_variation_shift(base, s),
        EvaluationKind::StepDensity(_) | EvaluationKind::Comb { .. } => {
            if s == 0.0 {
                return Ok(zero(TvMethod::ExactStep));
            }
            let f = theta.as_step_function().expect("piecewise-constant family");
            Ok(TvValue {
                value: (0.5 * f.shift_l1(s, -s)).min(1.0),
                error: 0.0,
                method: TvMethod::ExactStep,
            })
        }
        EvaluationKind::FoldedNormal { .. } | EvaluationKind::GenericDensity(_) => {
            total_variation_shift_quadrature(theta, s)
        }
    }
}

/// `TV_s(θ)` by adaptive quadrature of `|f(x+s) − f(x)|` over
/// `[−s, T_ε]`, whatever the family. Beyond `T_ε` the tail is added exactly
/// when the density is nonincreasing there and bounded otherwise.
pub fn total_variation_shift_quadrature(theta: &Evaluation, s: f64) -> Result<TvValue> {
    check_shift(s)?;
    if s == 0.0 {
        return Ok(zero(TvMethod::ScheffeQuadrature));
    }
    let end = theta.effective_support_end();
    let bps = theta.breakpoints();
    let shifted = bps.iter().map(|b| b - s);
    let breaks = merge_breaks(bps.iter().copied().chain(shifted).chain([0.0]), -s, end);
    let integrand = |x: f64| (theta.density(x + s) - theta.density(x)).abs();
    let q = integrate_pieces(&integrand, &breaks, TV_QUAD_TOL);
    if !q.converged {
        return Err(Error::QuadratureNonConvergence { achieved: q.error, requested: TV_QUAD_TOL });
    }
    let (tail, tail_bound) = if theta.support_end().is_some() {
        (0.0, 0.0)
    } else if theta.nonincreasing_beyond(end) {
        (theta.mass_between(end, end + s), 0.0)
    } else {
        (0.0, theta.survival(end) + theta.survival(end + s))
    };
    Ok(TvValue {
        value: (0.5 * (q.value + tail)).clamp(0.0, 1.0),
        error: 0.5 * (q.error + tail_bound),
        method: TvMethod::ScheffeQuadrature,
    })
}

/// `I_s(θ) = ∫_0^∞ |f(x+s) − f(x)| dx`, the half-line L¹ distance between
/// the density and its left shift.
pub fn shift_l1_distance(theta: &Evaluation, s: f64) -> Result<TvValue> {
    check_shift(s)?;
    if let Some(f) = theta.as_step_function() {
        return Ok(TvValue { value: f.shift_l1(s, 0.0), error: 0.0, method: TvMethod::ExactStep });
    }
    let tv = total_variation_shift(theta, s)?;
    Ok(TvValue {
        value: (2.0 * tv.value - theta.cdf(s)).max(0.0),
        error: 2.0 * tv.error,
        method: tv.method,
    })
}

/// TV values over a grid of shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct TvCurve {
    pub s_grid: Vec<f64>,
    pub tv_values: Vec<f64>,
    pub method: TvMethod,
}

impl TvCurve {
    /// Writes `s,tv,method` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "tv", "method"])?;
        for (s, tv) in self.s_grid.iter().zip(&self.tv_values) {
            w.write_record([format!("{s}"), format!("{tv}"), self.method.as_str().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn tv_curve(theta: &Evaluation, s_grid: &[f64]) -> Result<TvCurve> {
    if s_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("shift grid must be ordered"));
    }
    let mut method = total_variation_shift(theta, 0.0)?.method;
    let mut values = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let tv = total_variation_shift(theta, s)?;
        method = tv.method;
        values.push(tv.value);
    }
    Ok(TvCurve { s_grid: s_grid.to_vec(), tv_values: values, method })
}

/// Bracketing estimate of `sup_{0 ≤ s ≤ S} TV_s(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupTv {
    /// Best value found; a lower bound of the supremum.
    pub lower: f64,
    /// `min(1, grid max + TV_h)` with `h` the grid spacing.
    pub upper: f64,
    pub argmax: f64,
}

pub fn sup_total_variation(theta: &Evaluation, horizon: f64, grid_n: usize) -> Result<SupTv> {
    sup_total_variation_with(theta, horizon, grid_n, Execution::default())
}

/// Grid scan plus golden-section refinement between the neighbours of the
/// grid argmax. Subadditivity bounds the value anywhere between two grid
/// points by the grid value plus `TV_r` with `r ≤ h`.
pub fn sup_total_variation_with(
    theta: &Evaluation,
    horizon: f64,
    grid_n: usize,
    mode: Execution,
) -> Result<SupTv> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid(format!("sup horizon must be positive, got {horizon}")));
    }
    if grid_n < 2 {
        return Err(invalid("sup grid needs at least two points"));
    }
    let h = horizon / (grid_n - 1) as f64;
    let values = exec::map_range(mode, grid_n, |i| {
        total_variation_shift(theta, (i as f64 * h).min(horizon)).map(|v| v.value)
    });
    let values = values.into_iter().collect::<Result<Vec<f64>>>()?;
    let (imax, grid_max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = imax.saturating_sub(1) as f64 * h;
    let hi = ((imax + 1) as f64 * h).min(horizon);
    let mut failure = None;
    let (x, v) = golden_max(
        |s| match total_variation_shift(theta, s) {
            Ok(tv) => tv.value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        1e-9 * horizon,
        80,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (argmax, lower) = if v > grid_max { (x, v) } else { (imax as f64 * h, grid_max) };
    let upper = (grid_max + total_variation_shift(theta, h)?.value).min(1.0).max(lower);
    Ok(SupTv { lower, upper, argmax })
}

/// One row of an LTC diagnostic table.
#[derive(Debug, Clone, PartialEq)]
pub struct LtcRow {
    pub k: f64,
    pub label: String,
    pub sup: SupTv,
}

pub fn ltc_diagnostic(family: &[(f64, Evaluation)], horizon: f64, grid_n: usize) -> Result<Vec<LtcRow>> {
    ltc_diagnostic_with(family, horizon, grid_n, Execution::default())
}

/// `sup_{s ≤ S} TV_s(θ^k)` for each member of an indexed family.
pub fn ltc_diagnostic_with(
    family: &[(f64, Evaluation)],
    horizon: f64,
    grid_n: usize,
    mode: Execution,
) -> Result<Vec<LtcRow>> {
    if family.is_empty() {
        return Err(invalid("LTC diagnostic needs a nonempty family"));
    }
    exec::map(mode, family, |(k, theta)| {
        sup_total_variation_with(theta, horizon, grid_n, Execution::Sequential).map(|sup| LtcRow {
            k: *k,
            label: theta.label(),
            sup,
        })
    })
    .into_iter()
    .collect()
}

fn check_distribution(xi: &[f64]) -> Result<()> {
    if xi.is_empty() {
        return Err(invalid("distribution must have at least one entry"));
    }
    if xi.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid("distribution entries must be finite and nonnegative"));
    }
    let total = neumaier_sum(xi.iter().copied());
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("distribution sums to {total}, expected 1")));
    }
    Ok(())
}

/// `Σ_{m ≥ 1} |ξ_{m+1} − ξ_m|` with `ξ` zero beyond the stored prefix.
pub fn discrete_tv(xi: &[f64]) -> Result<f64> {
    check_distribution(xi)?;
    let last = *xi.last().expect("nonempty");
    Ok(neumaier_sum(xi.windows(2).map(|w| (w[1] - w[0]).abs()).chain([last])))
}

/// `(I_s(f_ξ), s · discrete_tv(ξ))` for the unit-bin step density of `ξ`
/// and `s ∈ [0, 1]`.
pub fn step_density_tv_identity(xi: &[f64], s: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("shift must lie in [0, 1], got {s}")));
    }
    let dtv = discrete_tv(xi)?;
    if s == 0.0 {
        return Ok((0.0, 0.0));
    }
    let edges = (0..=xi.len()).map(|j| j as f64).collect();
    let f = StepFunction::new(edges, xi.to_vec())?;
    Ok((f.shift_l1(s, 0.0), s * dtv))
}

/// Outcome of [`hahn_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HahnReport {
    /// `|∫ h dθ − ∫_{[t,∞)} h(s − t) dθ(s)|`.
    pub lhs_minus: f64,
    /// `|∫ h dθ − ∫ h(s + t) dθ(s)|`.
    pub lhs_plus: f64,
    pub tv: f64,
    pub bound_minus: f64,
    pub bound_plus: f64,
    /// Smallest of the two margins `bound − lhs`.
    pub slack: f64,
}

impl HahnReport {
    pub fn passed(&self) -> bool {
        self.slack >= -1e-9
    }
}

/// Compares the two shifted integrals of a `[0,1]`-valued step function
/// against `TV_t(θ)` and `2 TV_t(θ)`. Integrals are exact sums of
/// distribution-function differences.
pub fn hahn_bound_check(theta: &Evaluation, t: f64, h: &HalfLineStep) -> Result<HahnReport> {
    check_shift(t)?;
    let mut base = Vec::new();
    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for (a, b, v) in h.pieces() {
        base.push(v * theta.mass_between(a, b));
        // h(s − t) on s ∈ [a + t, b + t).
        minus.push(v * theta.mass_between(a + t, b + t));
        // h(s + t) on s ∈ [a − t, b − t) ∩ ℝ₊.
        plus.push(v * theta.mass_between((a - t).max(0.0), (b - t).max(0.0)));
    }
    let base = neumaier_sum(base);
    let lhs_minus = (base - neumaier_sum(minus)).abs();
    let lhs_plus = (base - neumaier_sum(plus)).abs();
    let tv = total_variation_shift(theta, t)?;
    let bound_minus = tv.value + tv.error;
    let bound_plus = 2.0 * (tv.value + tv.error);
    Ok(HahnReport {
        lhs_minus,
        lhs_plus,
        tv: tv.value,
        bound_minus,
        bound_plus,
        slack: (bound_minus - lhs_minus).min(bound_plus - lhs_plus),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_tv_is_linear_then_saturates() {
        let u = Evaluation::uniform(0.0, 10.0).unwrap();
        for s in [0.0, 0.1, 0.5, 1.0] {
            assert!((total_variation_shift(&u, s).unwrap().value - s / 10.0).abs() < 1e-15);
        }
        assert_eq!(total_variation_shift(&u, 20.0).unwrap().value, 1.0);
    }

    #[test]
    fn quadrature_path_matches_uniform() {
        for k in [2.0, 10.0] {
            let u = Evaluation::uniform(0.0, k).unwrap();
            for s in [0.1, 0.5, 1.0] {
                let q = total_variation_shift_quadrature(&u, s).unwrap();
                assert!((q.value - s / k).abs() < 1e-9, "k={k} s={s}: {}", q.value);
            }
        }
    }

    #[test]
    fn quadrature_path_matches_exponential_closed_form() {
        for rate in [0.1, 1.0] {
            let e = Evaluation::exponential(rate).unwrap();
            for s in [0.5, 1.0, 2.0] {
                let a = total_variation_shift(&e, s).unwrap().value;
                let q = total_variation_shift_quadrature(&e, s).unwrap().value;
                assert!((a - q).abs() < 1e-8, "rate={rate} s={s}: {a} vs {q}");
            }
        }
    }

    #[test]
    fn step_paths_agree_with_quadrature() {
        let e = Evaluation::step_density(&[0.1, 0.4, 0.2, 0.3]).unwrap();
        for s in [0.25, 0.5, 1.0, 1.5] {
            let a = total_variation_shift(&e, s).unwrap().value;
            let q = total_variation_shift_quadrature(&e, s).unwrap().value;
            assert!((a - q).abs() < 1e-8);
        }
    }

    #[test]
    fn shifted_evaluation_keeps_tv() {
        let e = Evaluation::exponential(0.5).unwrap();
        let s = e.shift_pushforward(3.0).unwrap();
        let a = total_variation_shift(&s, 0.7).unwrap().value;
        let q = total_variation_shift_quadrature(&s, 0.7).unwrap().value;
        assert!((a - total_variation_shift(&e, 0.7).unwrap().value).abs() < 1e-15);
        assert!((a - q).abs() < 1e-8);
    }

    #[test]
    fn half_line_distance_drops_pushed_off_mass() {
        let e = Evaluation::exponential(1.0).unwrap();
        let i = shift_l1_distance(&e, 1.0).unwrap().value;
        assert!((i - (1.0 - (-1f64).exp())).abs() < 1e-14);
        let u = Evaluation::uniform(2.0, 4.0).unwrap();
        assert!((shift_l1_distance(&u, 0.5).unwrap().value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn discrete_tv_examples() {
        assert_eq!(discrete_tv(&[1.0]).unwrap(), 1.0);
        assert_eq!(discrete_tv(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(discrete_tv(&[0.5, 0.5]).unwrap(), 0.5);
        assert!((discrete_tv(&[0.25; 4]).unwrap() - 0.25).abs() < 1e-15);
        assert!(discrete_tv(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn step_identity_examples() {
        assert_eq!(step_density_tv_identity(&[1.0], 0.5).unwrap(), (0.5, 0.5));
        assert_eq!(step_density_tv_identity(&[0.3, 0.7], 0.0).unwrap(), (0.0, 0.0));
        let (a, b) = step_density_tv_identity(&[0.25; 4], 1.0).unwrap();
        assert!((a - 0.25).abs() < 1e-15 && (b - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sup_of_uniform_family() {
        for k in [1.0, 4.0, 20.0] {
            let sup = sup_total_variation(&Evaluation::uniform(0.0, k).unwrap(), 1.0, SUP_GRID_POINTS).unwrap();
            assert!((sup.lower - (1.0 / k).min(1.0)).abs() < 1e-12);
            assert!(sup.upper >= sup.lower);
        }
    }

    #[test]
    fn comb_sup_is_large() {
        for k in [2u32, 4, 8] {
            let sup = sup_total_variation(&Evaluation::comb(k).unwrap(), 1.0, SUP_GRID_POINTS).unwrap();
            assert!(sup.lower >= 1.0 - 1.0 / (2.0 * f64::from(k)));
        }
    }

    #[test]
    fn hahn_constant_function() {
        let h = HalfLineStep::constant(0.4).unwrap();
        let u = Evaluation::uniform(3.0, 5.0).unwrap();
        let r = hahn_bound_check(&u, 1.0, &h).unwrap();
        assert!(r.lhs_minus.abs() < 1e-15 && r.lhs_plus.abs() < 1e-15);
    }

    #[test]
    fn hahn_indicator_on_uniform() {
        let h = HalfLineStep::new(vec![0.0, 5.0], vec![1.0, 0.0]).unwrap();
        let u = Evaluation::uniform(0.0, 10.0).unwrap();
        let r = hahn_bound_check(&u, 1.0, &h).unwrap();
        assert!(r.lhs_minus <= 0.1 + 1e-12 && r.lhs_plus <= 0.2 + 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn csv_header() {
        let c = tv_curve(&Evaluation::uniform(0.0, 10.0).unwrap(), &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("s,tv,method\n0,0,analytic\n0.5,0.05,analytic"));
    }
}
