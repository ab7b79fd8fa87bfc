//! Exact integration of piecewise-constant functions.
//!
//! The routines are generic over the scalar so that the same merge-and-sum
//! algorithm runs on `f64` and on exact rationals (`Ratio<i128>`).

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{invalid, Result};

/// A function equal to `values[i]` on `[edges[i], edges[i+1])` and zero
/// outside `[edges[0], edges[n])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    edges: Vec<T>,
    values: Vec<T>,
}

impl<T> StepFunction<T>
where
    T: Copy + PartialOrd + Signed,
{
    pub fn new(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        if edges.len() != values.len() + 1 {
            return Err(invalid("step function needs exactly one more edge than values"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("step function edges must be strictly increasing"));
        }
        Ok(Self { edges, values })
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Right-continuous evaluation.
    pub fn value_at(&self, x: T) -> T {
        let idx = self.edges.partition_point(|e| *e <= x);
        if idx == 0 || idx > self.values.len() {
            T::zero()
        } else {
            self.values[idx - 1]
        }
    }

    /// `∫_{lo}^{hi} f`.
    pub fn integral(&self, lo: T, hi: T) -> T {
        let mut acc = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            let a = max(self.edges[i], lo);
            let b = min(self.edges[i + 1], hi);
            if b > a {
                acc = acc + *v * (b - a);
            }
        }
        acc
    }

    /// `∫_{from}^{∞} |f(x + s) − f(x)| dx`, summed exactly over the merged
    /// breakpoints of `f` and `f(· + s)`.
    pub fn shift_l1(&self, s: T, from: T) -> T {
        let two = T::one() + T::one();
        let mut pts: Vec<T> = Vec::with_capacity(2 * self.edges.len() + 1);
        pts.push(from);
        for &e in &self.edges {
            if e > from {
                pts.push(e);
            }
            let shifted = e - s;
            if shifted > from {
                pts.push(shifted);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).expect("step edges are ordered"));
        pts.dedup();
        let mut acc = T::zero();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = (a + b) / two;
            let d = self.value_at(mid + s) - self.value_at(mid);
            if !d.is_zero() {
                acc = acc + d.abs() * (b - a);
            }
        }
        acc
    }
}

fn max<T: PartialOrd>(a: T, b: T) -> T {
    if a >= b {
        a
    } else {
        b
    }
}

fn min<T: PartialOrd>(a: T, b: T) -> T {
    if a <= b {
        a
    } else {
        b
    }
}

/// Exact rational type used for comb evaluations.
pub type Rational = Ratio<i128>;

/// Number of even-indexed length-`1/k` cells in `[0, k)`.
pub(crate) fn comb_cell_count(k: u32) -> u64 {
    let cells = u64::from(k) * u64::from(k);
    cells.div_ceil(2)
}

/// Comb(k) density as an exact rational step function.
///
/// `[0, k)` is cut into `k²` cells of width `1/k`; the even-indexed cells carry
/// the constant density `k / N` with `N` the number of even cells (`2/k` for
/// even `k`).
pub fn comb_step_exact(k: u32) -> Result<StepFunction<Rational>> {
    if k == 0 {
        return Err(invalid("comb parameter k must be positive"));
    }
    let kk = i128::from(k);
    let n_cells = kk * kk;
    let height = Rational::new(kk, comb_cell_count(k) as i128);
    let edges = (0..=n_cells).map(|j| Rational::new(j, kk)).collect();
    let values = (0..n_cells)
        .map(|j| if j % 2 == 0 { height } else { Rational::zero() })
        .collect();
    StepFunction::new(edges, values)
}

/// Comb(k) density as a floating-point step function. Each edge is computed
/// directly as `j / k` so no drift accumulates across the `k²` cells.
pub fn comb_step_f64(k: u32) -> Result<StepFunction<f64>> {
    if k == 0 {
        return Err(invalid("comb parameter k must be positive"));
    }
    let kf = f64::from(k);
    let n_cells = u64::from(k) * u64::from(k);
    let height = kf / comb_cell_count(k) as f64;
    let edges = (0..=n_cells).map(|j| j as f64 / kf).collect();
    let values = (0..n_cells)
        .map(|j| if j % 2 == 0 { height } else { 0.0 })
        .collect();
    StepFunction::new(edges, values)
}

/// `I_s(Comb(k)) = ∫_0^∞ |f(x+s) − f(x)| dx` in exact arithmetic.
pub fn comb_shift_l1_exact(k: u32, s: Rational) -> Result<Rational> {
    if s < Rational::zero() {
        return Err(invalid("shift must be nonnegative"));
    }
    Ok(comb_step_exact(k)?.shift_l1(s, Rational::zero()))
}

/// A `[0,1]`-valued step function on the half-line whose last value extends
/// to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineStep {
    starts: Vec<f64>,
    values: Vec<f64>,
}

impl HalfLineStep {
    /// `starts[0]` must be 0; piece `i` covers `[starts[i], starts[i+1])`.
    pub fn new(starts: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if starts.is_empty() || starts.len() != values.len() {
            return Err(invalid("half-line step needs one value per piece start"));
        }
        if starts[0] != 0.0 {
            return Err(invalid("half-line step must start at 0"));
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("piece starts must be strictly increasing"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("half-line step values must lie in [0, 1]"));
        }
        Ok(Self { starts, values })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![c])
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let idx = self.starts.partition_point(|s| *s <= x);
        if idx == 0 {
            self.values[0]
        } else {
            self.values[idx - 1]
        }
    }

    /// Pieces as `(start, end, value)` with the last end at infinity.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.starts.iter().enumerate().map(move |(i, &a)| {
            let b = self.starts.get(i + 1).copied().unwrap_or(f64::INFINITY);
            (a, b, self.values[i])
        })
    }
}
