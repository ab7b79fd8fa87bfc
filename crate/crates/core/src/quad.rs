//! One-dimensional quadrature and scalar search primitives.

use crate::error::{Error, Result};

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error: f64,
    pub converged: bool,
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson on `[a, b]`: intervals are bisected until two successive
/// estimates differ by less than `tol` (scaled down with depth).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Quadrature {
    if b <= a {
        return Quadrature { value: 0.0, error: 0.0, converged: true };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut out = Quadrature { value: 0.0, error: 0.0, converged: true };
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut Quadrature,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || depth == 0 || m <= a || m >= b {
        if depth == 0 && delta.abs() > 15.0 * tol {
            out.converged = false;
        }
        out.value += left + right + delta / 15.0;
        out.error += delta.abs() / 15.0;
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

/// Adaptive Simpson over consecutive pieces `breaks[i]..breaks[i+1]`.
///
/// `breaks` must be sorted; the tolerance is split by piece length. Piece
/// ends are sampled a hair inside the piece so that jumps located exactly
/// at a break are seen from the correct side.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> Quadrature {
    let mut total = Quadrature { value: 0.0, error: 0.0, converged: true };
    if breaks.len() < 2 {
        return total;
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let share = if span > 0.0 { tol * (b - a) / span } else { tol };
        let eta = 1e-13 * (b - a);
        let inner = |x: f64| f(x.clamp(a + eta, b - eta));
        let q = adaptive_simpson(&inner, a, b, share.max(1e-15));
        total.value += q.value;
        total.error += q.error;
        total.converged &= q.converged;
    }
    total
}

/// Like [`integrate_pieces`], but a non-converged result becomes an error.
pub fn integrate_pieces_checked<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    tol: f64,
) -> Result<Quadrature> {
    let q = integrate_pieces(f, breaks, tol);
    if !q.converged {
        return Err(Error::QuadratureNonConvergence { achieved: q.error, requested: tol });
    }
    Ok(q)
}

/// Sorted, deduplicated breakpoints clipped to `[lo, hi]`, always containing
/// both ends.
pub fn merge_breaks(points: impl IntoIterator<Item = f64>, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = points
        .into_iter()
        .filter(|p| p.is_finite() && *p > lo && *p < hi)
        .collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    v
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub struct GaussRule {
    pub nodes: &'static [f64],
    pub weights: &'static [f64],
}

pub const GAUSS3: GaussRule = GaussRule {
    nodes: &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
    weights: &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
};

pub const GAUSS5: GaussRule = GaussRule {
    nodes: &[
        -0.906_179_845_938_664,
        -0.538_469_310_105_683_1,
        0.0,
        0.538_469_310_105_683_1,
        0.906_179_845_938_664,
    ],
    weights: &[
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ],
};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`; the best point seen (including the ends) is kept.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut best = (lo, f(lo));
    let fhi = f(hi);
    if fhi < best.1 {
        best = (hi, fhi);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        for (x, fx) in [(x1, f1), (x2, f2)] {
            if fx < best.1 {
                best = (x, fx);
            }
        }
    }
    best
}

/// Golden-section search for a maximum.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let (x, v) = golden_min(|x| -f(x), a, b, tol, max_iter);
    (x, -v)
}

/// Bisection for a sign change of `f` on `[lo, hi]`. Requires `f(lo)` and
/// `f(hi)` of opposite (or zero) sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= xtol {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
