//! Bracketed bisection.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Bisection {
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for Bisection {
    fn default() -> Self {
        Self {
            x_tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl Bisection {
    pub fn new(x_tol: f64) -> Self {
        Self {
            x_tol,
            ..Self::default()
        }
    }

    /// Root of `f` on `[lo, hi]`. Fails with [`Error::Bracket`] unless
    /// `f(lo)` and `f(hi)` have opposite signs (or one of them is zero).
    pub fn solve<F: Fn(f64) -> f64>(&self, f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
        let mut f_lo = f(lo);
        let f_hi = f(hi);
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
            return Err(Error::Bracket { lo, hi, f_lo, f_hi });
        }
        for _ in 0..self.max_iter {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= self.x_tol || mid <= lo || mid >= hi {
                break;
            }
            let f_mid = f(mid);
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
