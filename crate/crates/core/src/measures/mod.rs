//! Evaluations: probability measures on the half-line that weight a running
//! cost over time.
//!
//! Every evaluation here is absolutely continuous. Closed forms are used for
//! densities, distribution functions and quantiles wherever they exist;
//! user-supplied densities fall back to adaptive quadrature.

use std::fmt;
use std::sync::Arc;

use statrs::function::erf::{erf, erfc};

use crate::error::{invalid, Error, Result};
use crate::quad::{bisect, integrate_pieces, merge_breaks};

mod folded;
mod record;
pub mod step;
mod tv;

pub use folded::{folded_normal_mode, folded_normal_mode_gap};
pub use record::EvaluationRecord;
pub use step::{comb_shift_l1_exact, comb_step_exact, comb_step_f64, HalfLineStep, Rational, StepFunction};
pub use tv::{
    discrete_tv, hahn_bound_check, ltc_diagnostic, ltc_diagnostic_with, shift_l1_distance,
    step_density_tv_identity, sup_total_variation, sup_total_variation_with, total_variation_shift,
    total_variation_shift_quadrature, tv_curve, HahnReport, LtcRow, SupTv, TvCurve, TvMethod, TvValue,
    SUP_GRID_POINTS,
};

/// Default mass allowed beyond the effective support.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// Absolute tolerance for quadrature of distribution functions of generic
/// densities.
const CDF_QUAD_TOL: f64 = 1e-11;

/// A user-supplied density on `[0, support_bound]`.
#[derive(Clone)]
pub struct GenericDensity {
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support_bound: f64,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for GenericDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericDensity")
            .field("support_bound", &self.support_bound)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

/// Normalized weights of a step density.
#[derive(Debug, Clone)]
pub struct StepWeights {
    weights: Vec<f64>,
    /// `cumulative[j] = Σ_{i<j} weights[i]`, length `weights.len() + 1`.
    cumulative: Vec<f64>,
}

impl StepWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// The family an evaluation belongs to.
#[derive(Debug, Clone)]
pub enum EvaluationKind {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    FoldedNormal { location: f64, scale: f64 },
    /// Density `Σ ξ_m 𝟙[m−1, m)` with unit bin width.
    StepDensity(Arc<StepWeights>),
    /// Uniform on the even-indexed length-`1/k` cells of `[0, k]`.
    Comb { k: u32 },
    /// Push-forward of `base` by `s ↦ s + offset`.
    Shifted { base: Arc<Evaluation>, offset: f64 },
    GenericDensity(GenericDensity),
}

/// A probability measure on `ℝ₊` together with the tail mass that numerical
/// routines may ignore.
#[derive(Debug, Clone)]
pub struct Evaluation {
    kind: EvaluationKind,
    tail_tolerance: f64,
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!("{name} must be a finite nonnegative time, got {t}")));
    }
    Ok(())
}

impl Evaluation {
    fn from_kind(kind: EvaluationKind) -> Self {
        Self { kind, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }

    /// Uniform law on `[a, b]`, `0 ≤ a < b`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_time("uniform lower end", a)?;
        if !b.is_finite() || b <= a {
            return Err(invalid(format!("uniform needs a < b, got [{a}, {b}]")));
        }
        Ok(Self::from_kind(EvaluationKind::Uniform { a, b }))
    }

    /// Density `λ e^{−λ s}`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self::from_kind(EvaluationKind::Exponential { rate }))
    }

    /// Law of `|X|` with `X ~ N(m, σ²)`; `m ≥ 0` without loss of generality.
    pub fn folded_normal(location: f64, scale: f64) -> Result<Self> {
        check_time("folded normal location", location)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("folded normal scale must be positive, got {scale}")));
        }
        Ok(Self::from_kind(EvaluationKind::FoldedNormal { location, scale }))
    }

    /// Step density with unit bins. Weights must be nonnegative with a
    /// positive sum; they are renormalized with a compensated sum.
    pub fn step_density(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("step density needs at least one weight"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("step density weights must be finite and nonnegative"));
        }
        let total = neumaier_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(invalid("step density weights must not all vanish"));
        }
        let mut normalized: Vec<f64> = weights.iter().map(|w| w / total).collect();
        while normalized.len() > 1 && normalized.last() == Some(&0.0) {
            normalized.pop();
        }
        let mut cumulative = Vec::with_capacity(normalized.len() + 1);
        cumulative.push(0.0);
        for j in 0..normalized.len() {
            cumulative.push(neumaier_sum(normalized[..=j].iter().copied()));
        }
        Ok(Self::from_kind(EvaluationKind::StepDensity(Arc::new(StepWeights {
            weights: normalized,
            cumulative,
        }))))
    }

    /// Comb evaluation on `[0, k]`.
    pub fn comb(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(invalid("comb parameter k must be positive"));
        }
        Ok(Self::from_kind(EvaluationKind::Comb { k }))
    }

    /// A density given as a function on `[0, support_bound]`. Its total mass
    /// must be 1 within `1e-6`.
    pub fn generic<F>(density: F, support_bound: f64, breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support_bound.is_finite() && support_bound > 0.0) {
            return Err(invalid("generic density needs a positive finite support bound"));
        }
        let g = GenericDensity {
            density: Arc::new(density),
            support_bound,
            breakpoints: merge_breaks(breakpoints, 0.0, support_bound),
        };
        let q = integrate_pieces(&|t| (g.density)(t), &g.breakpoints, CDF_QUAD_TOL);
        if !q.converged {
            return Err(Error::QuadratureNonConvergence { achieved: q.error, requested: CDF_QUAD_TOL });
        }
        if (q.value - 1.0).abs() > 1e-6 {
            return Err(invalid(format!("generic density has total mass {} (expected 1)", q.value)));
        }
        Ok(Self::from_kind(EvaluationKind::GenericDensity(g)))
    }

    /// Returns a copy with a different tail tolerance, `0 < tol < 1`.
    pub fn with_tail_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("tail tolerance must lie in (0, 1), got {tol}")));
        }
        self.tail_tolerance = tol;
        Ok(self)
    }

    pub fn kind(&self) -> &EvaluationKind {
        &self.kind
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// Push-forward by `s ↦ s + t`. Shifting by zero returns a clone and
    /// nested shifts are collapsed.
    pub fn shift_pushforward(&self, t: f64) -> Result<Self> {
        check_time("shift", t)?;
        if t == 0.0 {
            return Ok(self.clone());
        }
        let (base, offset) = match &self.kind {
            EvaluationKind::Shifted { base, offset } => (base.clone(), offset + t),
            _ => (Arc::new(self.clone()), t),
        };
        Ok(Self {
            kind: EvaluationKind::Shifted { base, offset },
            tail_tolerance: self.tail_tolerance,
        })
    }

    /// Short human-readable label, stable across runs.
    pub fn label(&self) -> String {
        match &self.kind {
            EvaluationKind::Uniform { a, b } => format!("uniform({a},{b})"),
            EvaluationKind::Exponential { rate } => format!("exponential({rate})"),
            EvaluationKind::FoldedNormal { location, scale } => format!("folded-normal({location},{scale})"),
            EvaluationKind::StepDensity(w) => format!("step-density(n={})", w.weights.len()),
            EvaluationKind::Comb { k } => format!("comb({k})"),
            EvaluationKind::Shifted { base, offset } => format!("shift({},{offset})", base.label()),
            EvaluationKind::GenericDensity(g) => format!("generic(bound={})", g.support_bound),
        }
    }

    /// Density at `t`; zero for `t < 0`.
    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 || t.is_nan() {
            return 0.0;
        }
        match &self.kind {
            EvaluationKind::Uniform { a, b } => {
                if t >= *a && t < *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            EvaluationKind::Exponential { rate } => rate * (-rate * t).exp(),
            EvaluationKind::FoldedNormal { location, scale } => folded::density(*location, *scale, t),
            EvaluationKind::StepDensity(w) => {
                let j = t.floor();
                if j < w.weights.len() as f64 {
                    w.weights[j as usize]
                } else {
                    0.0
                }
            }
            EvaluationKind::Comb { k } => {
                let kf = f64::from(*k);
                let j = (t * kf).floor();
                let cells = kf * kf;
                if j < cells && (j as u64).is_multiple_of(2) {
                    kf / step::comb_cell_count(*k) as f64
                } else {
                    0.0
                }
            }
            EvaluationKind::Shifted { base, offset } => base.density(t - offset),
            EvaluationKind::GenericDensity(g) => {
                if t <= g.support_bound {
                    (g.density)(t).max(0.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// `θ([0, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 || t.is_nan() {
            return 0.0;
        }
        if t.is_infinite() {
            return 1.0;
        }
        match &self.kind {
            EvaluationKind::Uniform { a, b } => ((t - a) / (b - a)).clamp(0.0, 1.0),
            EvaluationKind::Exponential { rate } => -(-rate * t).exp_m1(),
            EvaluationKind::FoldedNormal { location, scale } => {
                let r = std::f64::consts::SQRT_2 * scale;
                (0.5 * (erf((t - location) / r) + erf((t + location) / r))).clamp(0.0, 1.0)
            }
            EvaluationKind::StepDensity(w) => {
                let n = w.weights.len();
                let j = t.floor();
                if j >= n as f64 {
                    return 1.0;
                }
                let j = j as usize;
                (w.cumulative[j] + (t - j as f64) * w.weights[j]).min(1.0)
            }
            EvaluationKind::Comb { k } => {
                let kf = f64::from(*k);
                let n_even = step::comb_cell_count(*k) as f64;
                let x = t * kf;
                if x >= kf * kf {
                    return 1.0;
                }
                let j = x.floor();
                let full = (j / 2.0).ceil();
                let partial = if (j as u64).is_multiple_of(2) { x - j } else { 0.0 };
                ((full + partial) / n_even).min(1.0)
            }
            EvaluationKind::Shifted { base, offset } => base.cdf(t - offset),
            EvaluationKind::GenericDensity(g) => {
                let hi = t.min(g.support_bound);
                let mut pts: Vec<f64> = g.breakpoints.iter().copied().filter(|p| *p < hi).collect();
                pts.push(hi);
                integrate_pieces(&|x| (g.density)(x).max(0.0), &pts, CDF_QUAD_TOL).value.clamp(0.0, 1.0)
            }
        }
    }

    /// `θ((t, ∞))`, accurate in the far tail for the analytic families.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match &self.kind {
            EvaluationKind::Exponential { rate } => (-rate * t).exp(),
            EvaluationKind::FoldedNormal { location, scale } => {
                let r = std::f64::consts::SQRT_2 * scale;
                (0.5 * (erfc((t - location) / r) + erfc((t + location) / r))).clamp(0.0, 1.0)
            }
            EvaluationKind::Shifted { base, offset } => base.survival(t - offset),
            _ => (1.0 - self.cdf(t)).max(0.0),
        }
    }

    /// `θ([lo, hi))` for `lo ≤ hi`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if lo > 0.0 && self.cdf(lo) > 0.5 {
            (self.survival(lo) - self.survival(hi)).max(0.0)
        } else {
            (self.cdf(hi) - self.cdf(lo)).max(0.0)
        }
    }

    /// Smallest time `T` with `θ([0,T]) ≥ p`. Step and comb densities round
    /// up to their bin edges.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(invalid(format!("quantile level must lie in [0, 1), got {p}")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            EvaluationKind::Uniform { a, b } => a + p * (b - a),
            EvaluationKind::Exponential { rate } => -(-p).ln_1p() / rate,
            EvaluationKind::FoldedNormal { location, scale } => {
                let mut hi = location + scale;
                while self.cdf(hi) < p {
                    hi += 4.0 * scale;
                }
                bisect(|t| self.cdf(t) - p, 0.0, hi, 1e-13 * (1.0 + hi))?
            }
            EvaluationKind::StepDensity(w) => {
                let n = w.weights.len();
                let j = w.cumulative.partition_point(|c| *c < p);
                j.min(n) as f64
            }
            EvaluationKind::Comb { k } => {
                let n_even = step::comb_cell_count(*k);
                let needed = ((p * n_even as f64).ceil() as u64).clamp(1, n_even);
                let cells = u64::from(*k) * u64::from(*k);
                ((2 * needed - 1).min(cells)) as f64 / f64::from(*k)
            }
            EvaluationKind::Shifted { base, offset } => offset + base.quantile(p)?,
            EvaluationKind::GenericDensity(g) => {
                if self.cdf(g.support_bound) < p {
                    g.support_bound
                } else {
                    bisect(|t| self.cdf(t) - p, 0.0, g.support_bound, 1e-12 * g.support_bound)?
                }
            }
        })
    }

    /// Left end of the support.
    pub fn support_start(&self) -> f64 {
        match &self.kind {
            EvaluationKind::Uniform { a, .. } => *a,
            EvaluationKind::StepDensity(w) => {
                w.weights.iter().position(|x| *x > 0.0).unwrap_or(0) as f64
            }
            EvaluationKind::Shifted { base, offset } => offset + base.support_start(),
            _ => 0.0,
        }
    }

    /// Right end of the support, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match &self.kind {
            EvaluationKind::Uniform { b, .. } => Some(*b),
            EvaluationKind::StepDensity(w) => Some(w.weights.len() as f64),
            EvaluationKind::Comb { k } => Some(f64::from(*k)),
            EvaluationKind::Shifted { base, offset } => base.support_end().map(|e| e + offset),
            EvaluationKind::GenericDensity(g) => Some(g.support_bound),
            _ => None,
        }
    }

    /// End of the region that numerical integrals cover: the support end when
    /// bounded, `quantile(1 − tail_tolerance)` otherwise.
    pub fn effective_support_end(&self) -> f64 {
        match self.support_end() {
            Some(e) => e,
            None => self
                .quantile(1.0 - self.tail_tolerance)
                .expect("tail tolerance lies in (0, 1)"),
        }
    }

    /// Mass beyond [`Evaluation::effective_support_end`].
    pub fn truncated_mass(&self) -> f64 {
        match self.support_end() {
            Some(_) => 0.0,
            None => self.survival(self.effective_support_end()),
        }
    }

    /// Points in `[0, ∞)` where the density jumps or changes formula.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            EvaluationKind::Uniform { a, b } => vec![*a, *b],
            EvaluationKind::Exponential { .. } | EvaluationKind::FoldedNormal { .. } => vec![0.0],
            EvaluationKind::StepDensity(w) => (0..=w.weights.len()).map(|j| j as f64).collect(),
            EvaluationKind::Comb { k } => {
                let kf = f64::from(*k);
                let cells = u64::from(*k) * u64::from(*k);
                (0..=cells).map(|j| j as f64 / kf).collect()
            }
            EvaluationKind::Shifted { base, offset } => {
                let mut v: Vec<f64> = base.breakpoints().into_iter().map(|b| b + offset).collect();
                v.push(*offset);
                v
            }
            EvaluationKind::GenericDensity(g) => g.breakpoints.clone(),
        }
    }

    /// Whether the density is nonincreasing on `[t, ∞)`.
    pub(crate) fn nonincreasing_beyond(&self, t: f64) -> bool {
        match &self.kind {
            EvaluationKind::Exponential { .. } => true,
            EvaluationKind::FoldedNormal { location, .. } => t >= *location,
            EvaluationKind::Shifted { base, offset } => t >= *offset && base.nonincreasing_beyond(t - offset),
            EvaluationKind::GenericDensity(_) => false,
            _ => self.support_end().is_some_and(|e| t >= e),
        }
    }

    /// Exact step-function form for piecewise-constant families.
    pub fn as_step_function(&self) -> Option<StepFunction<f64>> {
        match &self.kind {
            EvaluationKind::Uniform { a, b } => StepFunction::new(vec![*a, *b], vec![1.0 / (b - a)]).ok(),
            EvaluationKind::StepDensity(w) => {
                let edges = (0..=w.weights.len()).map(|j| j as f64).collect();
                StepFunction::new(edges, w.weights.clone()).ok()
            }
            EvaluationKind::Comb { k } => comb_step_f64(*k).ok(),
            EvaluationKind::Shifted { base, offset } => {
                let f = base.as_step_function()?;
                let edges = f.edges().iter().map(|e| e + offset).collect();
                StepFunction::new(edges, f.values().to_vec()).ok()
            }
            _ => None,
        }
    }

    /// Expectation `∫ t dθ(t)`.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            EvaluationKind::Uniform { a, b } => 0.5 * (a + b),
            EvaluationKind::Exponential { rate } => 1.0 / rate,
            EvaluationKind::FoldedNormal { location, scale } => folded::mean(*location, *scale),
            EvaluationKind::StepDensity(w) => {
                neumaier_sum(w.weights.iter().enumerate().map(|(j, x)| x * (j as f64 + 0.5)))
            }
            EvaluationKind::Comb { k } => {
                let kf = f64::from(*k);
                let cells = u64::from(*k) * u64::from(*k);
                let n_even = step::comb_cell_count(*k) as f64;
                neumaier_sum((0..cells).step_by(2).map(|j| (j as f64 + 0.5) / kf)) / n_even
            }
            EvaluationKind::Shifted { base, offset } => offset + base.mean(),
            EvaluationKind::GenericDensity(g) => {
                integrate_pieces(&|t| t * (g.density)(t).max(0.0), &g.breakpoints, CDF_QUAD_TOL).value
            }
        }
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_pieces;

    fn catalog() -> Vec<Evaluation> {
        vec![
            Evaluation::uniform(0.0, 2.0).unwrap(),
            Evaluation::uniform(1.0, 3.0).unwrap(),
            Evaluation::exponential(0.5).unwrap(),
            Evaluation::folded_normal(3.0, 1.0).unwrap(),
            Evaluation::folded_normal(0.5, 2.0).unwrap(),
            Evaluation::step_density(&[0.2, 0.0, 0.5, 0.3]).unwrap(),
            Evaluation::comb(4).unwrap(),
            Evaluation::comb(3).unwrap(),
            Evaluation::exponential(1.0).unwrap().shift_pushforward(2.5).unwrap(),
        ]
    }

    #[test]
    fn density_examples() {
        assert_eq!(Evaluation::uniform(0.0, 2.0).unwrap().density(1.0), 0.5);
        assert_eq!(Evaluation::exponential(0.5).unwrap().density(0.0), 0.5);
        assert_eq!(Evaluation::comb(2).unwrap().density(0.25), 1.0);
        assert_eq!(Evaluation::comb(2).unwrap().density(0.75), 0.0);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(Evaluation::uniform(1.0, 3.0).unwrap().cdf(2.0), 0.5);
        let lam: f64 = 0.7;
        let e = Evaluation::exponential(lam).unwrap();
        assert!((e.cdf(2.0) - (1.0 - (-lam * 2.0).exp())).abs() < 1e-15);
        let s = Evaluation::uniform(0.0, 1.0).unwrap().shift_pushforward(5.0).unwrap();
        assert_eq!(s.cdf(4.0), 0.0);
        assert_eq!(Evaluation::exponential(1.0).unwrap().shift_pushforward(2.0).unwrap().cdf(2.0), 0.0);
    }

    #[test]
    fn quantile_examples() {
        assert!((Evaluation::uniform(0.0, 10.0).unwrap().quantile(0.9).unwrap() - 9.0).abs() < 1e-12);
        let q = Evaluation::exponential(1.0).unwrap().quantile(1.0 - (-3f64).exp()).unwrap();
        assert!((q - 3.0).abs() < 1e-12);
        let s = Evaluation::step_density(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.quantile(0.999).unwrap(), 1.0);
        assert!(s.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_is_smallest_time_reaching_level() {
        for theta in catalog() {
            for p in [0.1, 0.5, 0.9, 0.999_999] {
                let q = theta.quantile(p).unwrap();
                assert!(theta.cdf(q) >= p - 1e-9, "{} p={p}", theta.label());
                // Grid families round up to a bin edge: one bin earlier falls short.
                let earlier = match theta.kind() {
                    EvaluationKind::StepDensity(_) => q - 1.0,
                    EvaluationKind::Comb { k } => q - 1.0 / f64::from(*k),
                    _ => q * (1.0 - 1e-6) - 1e-9,
                };
                assert!(theta.cdf(earlier) < p + 1e-9, "{} p={p}", theta.label());
            }
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for theta in catalog() {
            let end = theta.effective_support_end();
            let q = integrate_pieces(&|t| theta.density(t), &merge_breaks(theta.breakpoints(), 0.0, end), 1e-12);
            let tol = 1e-9 + theta.truncated_mass();
            assert!((q.value - 1.0).abs() <= tol, "{}: {}", theta.label(), q.value);
            assert!((theta.cdf(end) + theta.truncated_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cdf_matches_density_integral() {
        for theta in catalog() {
            for t in [0.3, 1.0, 2.7, 4.1] {
                let q = integrate_pieces(&|x| theta.density(x), &merge_breaks(theta.breakpoints(), 0.0, t), 1e-12);
                assert!((q.value - theta.cdf(t)).abs() < 1e-9, "{} t={t}", theta.label());
            }
        }
    }

    #[test]
    fn mass_conservation_at_effective_support() {
        for theta in catalog() {
            let t_eps = theta.quantile(1.0 - theta.tail_tolerance()).unwrap();
            assert!(theta.cdf(t_eps) >= 1.0 - theta.tail_tolerance() - 1e-12);
        }
    }

    #[test]
    fn step_density_normalizes() {
        let s = Evaluation::step_density(&[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.density(2.5), 0.5);
        assert_eq!(s.cdf(3.0), 1.0);
        assert!(Evaluation::step_density(&[0.0, 0.0]).is_err());
        assert!(Evaluation::step_density(&[0.5, -0.1]).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(Evaluation::uniform(2.0, 1.0).is_err());
        assert!(Evaluation::uniform(-1.0, 1.0).is_err());
        assert!(Evaluation::exponential(0.0).is_err());
        assert!(Evaluation::folded_normal(1.0, 0.0).is_err());
        assert!(Evaluation::comb(0).is_err());
        assert!(Evaluation::exponential(1.0).unwrap().with_tail_tolerance(1.0).is_err());
        assert!(Evaluation::generic(|_| 2.0, 1.0, vec![]).is_err());
    }

    #[test]
    fn generic_density_behaves_like_uniform() {
        let g = Evaluation::generic(|_| 0.25, 4.0, vec![]).unwrap();
        assert!((g.cdf(1.0) - 0.25).abs() < 1e-10);
        assert!((g.quantile(0.5).unwrap() - 2.0).abs() < 1e-9);
        assert!((g.mean() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn shifting_by_zero_is_identity_and_nested_shifts_collapse() {
        let u = Evaluation::uniform(0.0, 1.0).unwrap();
        let s0 = u.shift_pushforward(0.0).unwrap();
        assert!(matches!(s0.kind(), EvaluationKind::Uniform { .. }));
        let s = u.shift_pushforward(1.0).unwrap().shift_pushforward(2.0).unwrap();
        match s.kind() {
            EvaluationKind::Shifted { offset, .. } => assert_eq!(*offset, 3.0),
            _ => panic!("expected shifted"),
        }
        assert!((s.mean() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn means_match_quadrature() {
        for theta in catalog() {
            let end = theta.effective_support_end();
            let q = integrate_pieces(&|t| t * theta.density(t), &merge_breaks(theta.breakpoints(), 0.0, end), 1e-12);
            assert!((q.value - theta.mean()).abs() < 1e-4, "{}", theta.label());
        }
    }
}
