//! The single physical parameter θ and everything derived from it.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::{Error, Result};

/// Rotation angle of the drift `e^{iθ}`, in radians.
///
/// Only `θ ∈ (-π/2, 0) ∪ (0, π/2)` is representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Real part of the drift, `cos θ`.
    pub r: f64,
    /// `cos θ / (2 sin²θ)`, the reciprocal of the mean entropy production.
    pub c: f64,
    /// Mean entropy production rate `2 sin²θ / cos θ`.
    pub ep: f64,
    /// Open interval of tilts on which the limiting Cramér function is finite.
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

/// Drift `α = r + i d` of the tilted dynamics `dZ = -α Z dt + sqrt(2r) dζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedDrift {
    pub r: f64,
    pub d: f64,
    pub alpha: Complex64,
}

impl TiltedDrift {
    pub fn new(r: f64, d: f64) -> Self {
        Self {
            r,
            d,
            alpha: Complex64::new(r, d),
        }
    }
}

impl Model {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() >= FRAC_PI_2 {
            return Err(Error::OutOfRange(theta));
        }
        if theta == 0.0 {
            return Err(Error::DegenerateTheta);
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn r(&self) -> f64 {
        self.theta.cos()
    }

    pub fn sin2(&self) -> f64 {
        let s = self.theta.sin();
        s * s
    }

    pub fn derived_constants(&self) -> DerivedConstants {
        let r = self.r();
        let s2 = self.sin2();
        let half_width = 0.5 * (1.0 + r * self.theta.cos() / s2).sqrt();
        DerivedConstants {
            r,
            c: r / (2.0 * s2),
            ep: 2.0 * s2 / r,
            lambda_lo: -0.5 - half_width,
            lambda_hi: -0.5 + half_width,
        }
    }

    /// Mean entropy production rate `e_p`.
    pub fn ep(&self) -> f64 {
        2.0 * self.sin2() / self.r()
    }

    /// The quadratic coefficient `ℓ(λ) = e_p λ (1 + λ)` produced by the Girsanov tilt.
    pub fn ell_of_lambda(&self, lambda: f64) -> f64 {
        self.ep() * lambda * (1.0 + lambda)
    }

    /// True iff `λ` lies strictly inside the finiteness interval, i.e. `ℓ(λ) < r/2`.
    pub fn in_domain(&self, lambda: f64) -> bool {
        let dc = self.derived_constants();
        lambda > dc.lambda_lo && lambda < dc.lambda_hi
    }

    pub fn tilted_drift(&self, lambda: f64) -> TiltedDrift {
        TiltedDrift::new(self.r(), (1.0 + 2.0 * lambda) * self.theta.sin())
    }

    /// Drift of the untilted process, `α = e^{iθ}`.
    pub fn drift(&self) -> TiltedDrift {
        self.tilted_drift(0.0)
    }
}
