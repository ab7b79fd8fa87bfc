//! Folded normal helpers.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erf;

use crate::error::{invalid, Error, Result};

pub(super) fn density(m: f64, sigma: f64, t: f64) -> f64 {
    let c = 1.0 / (sigma * (2.0 * PI).sqrt());
    let a = (t - m) / sigma;
    let b = (t + m) / sigma;
    c * ((-0.5 * a * a).exp() + (-0.5 * b * b).exp())
}

pub(super) fn mean(m: f64, sigma: f64) -> f64 {
    sigma * (2.0 / PI).sqrt() * (-0.5 * (m / sigma).powi(2)).exp() + m * erf(m / (sigma * SQRT_2))
}

/// Sign of the log-density slope on `(0, m)`: positive where the density
/// increases. `atanh(t/m)` is written as `½ ln((m+t)/(m−t))` to stay finite
/// up to the last float below `m`.
fn slope_sign(m: f64, sigma: f64, t: f64) -> f64 {
    m * t / (sigma * sigma) - 0.5 * ((m + t) / (m - t)).ln()
}

/// Mode `t*` of the folded normal `|N(m, σ²)|`.
///
/// The density increases on `(0, t*)` and decreases afterwards. When the
/// root sits closer to `m` than float resolution allows, the largest float
/// below `m` is returned.
pub fn folded_normal_mode(m: f64, sigma: f64) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(invalid(format!("location must be positive, got {m}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(format!("scale must be positive, got {sigma}")));
    }
    if m * m <= sigma * sigma {
        return Ok(0.0);
    }
    const DELTA: f64 = 1e-3;
    let below_m = f64::from_bits(m.to_bits() - 1);
    let lo = (m * m - sigma * sigma).sqrt() * (1.0 - DELTA);
    if slope_sign(m, sigma, lo) <= 0.0 {
        return Err(Error::BracketFailure(format!("slope not positive at lower bracket {lo}")));
    }
    let mut hi = m * (1.0 - DELTA);
    while slope_sign(m, sigma, hi) > 0.0 {
        if hi >= below_m {
            return Ok(below_m);
        }
        hi = (m - (m - hi) / 16.0).min(below_m);
    }
    let mut lo = lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope_sign(m, sigma, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `(t*)² − (m² − σ²)`, nonnegative by the mode inequality.
pub fn folded_normal_mode_gap(m: f64, sigma: f64) -> Result<f64> {
    let t = folded_normal_mode(m, sigma)?;
    Ok(t * t - (m * m - sigma * sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unimodal_on_grid(m: f64, sigma: f64, t_star: f64) -> bool {
        let n = 10_000;
        let hi = m + 8.0 * sigma;
        let grid: Vec<f64> = (0..=n).map(|i| hi * i as f64 / n as f64).collect();
        grid.windows(2).all(|w| {
            let (d0, d1) = (density(m, sigma, w[0]), density(m, sigma, w[1]));
            if w[1] <= t_star {
                d1 >= d0 * (1.0 - 1e-12)
            } else if w[0] >= t_star {
                d1 <= d0 * (1.0 + 1e-12)
            } else {
                true
            }
        })
    }

    #[test]
    fn small_location_has_mode_at_zero() {
        assert_eq!(folded_normal_mode(1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn mode_bounds_and_unimodality() {
        for (m, s) in [(1.0, 2.0), (3.0, 1.0), (5.0, 0.5), (2.0, 1.9), (1.01, 1.0)] {
            let t = folded_normal_mode(m, s).unwrap();
            assert!(t * t >= m * m - s * s, "({m}, {s}) → {t}");
            assert!(t < m || m * m <= s * s);
            assert!(unimodal_on_grid(m, s, t), "({m}, {s})");
        }
        let t = folded_normal_mode(3.0, 1.0).unwrap();
        assert!(t >= 8f64.sqrt() && t < 3.0);
    }

    #[test]
    fn derivative_changes_sign_at_mode() {
        let (m, s) = (3.0, 1.0);
        let t = folded_normal_mode(m, s).unwrap();
        let h = 1e-4;
        assert!(density(m, s, t - h) < density(m, s, t));
        assert!(density(m, s, t + h) < density(m, s, t));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(folded_normal_mode(0.0, 1.0).is_err());
        assert!(folded_normal_mode(1.0, -1.0).is_err());
    }
}
