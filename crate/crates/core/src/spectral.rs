//! Spectrum of the covariance operator of the stationary complex OU process
//! on `[0, T]`:
//!
//! ```text
//! (K_T f)(s) = ∫_0^T R(s, t) f(t) dt,   R(s, t) = e^{-α(s-t)} (s ≥ t),  e^{ᾱ(s-t)} (s < t)
//! ```
//!
//! with `α = r + i d`. An eigenfunction is `e^{-isd}(r sin ωs + ω cos ωs)`
//! with eigenvalue `2r / (r² + ω²)`, where `ω > 0` solves one of
//!
//! ```text
//! ω/r =  cot(ωT/2)    (cot family, ω_j ∈ ((2j-2)π/T, (2j-1)π/T))
//! ω/r = -tan(ωT/2)    (tan family, ω̃_j ∈ ((2j-1)π/T, 2jπ/T))
//! ```
//!
//! The tan equation also has the root `ω̃_0 = 0`, but there the eigenfunction
//! profile fails the boundary condition at `s = T` and the operator has no
//! eigenvalue `2/r`. The eigenvalue ladder is therefore built from positive
//! roots only: `γ_1 ↔ ω_1`, `γ_2 ↔ ω̃_1`, `γ_3 ↔ ω_2`, ...; every
//! `γ_k < 2/r` and `Σ γ_k = T`.
//!
//! The spectrum depends on `r` only; `d` enters the eigenfunctions as a phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::model::TiltedDrift;
use crate::quad::GaussLegendre;
use crate::roots::Bisection;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub r: f64,
    pub d: f64,
    pub horizon: f64,
}

impl Kernel {
    pub fn new(r: f64, d: f64, horizon: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain {
                value: r,
                what: "kernel decay r must be positive",
            });
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain {
                value: horizon,
                what: "horizon T must be positive",
            });
        }
        if !d.is_finite() {
            return Err(Error::Domain {
                value: d,
                what: "rotation d must be finite",
            });
        }
        Ok(Self { r, d, horizon })
    }

    pub fn from_drift(drift: &TiltedDrift, horizon: f64) -> Result<Self> {
        Self::new(drift.r, drift.d, horizon)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.r, self.d)
    }

    /// Covariance `R(s, t) = E[Z_s conj(Z_t)]`.
    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        let h = s - t;
        let (sin, cos) = (-self.d * h).sin_cos();
        Complex64::new(cos, sin) * (-self.r * h.abs()).exp()
    }

    /// `2r / (r² + (mπ/T)²)`; the k-th eigenvalue lies in `(bound(k), bound(k-1))`.
    pub fn ladder_bound(&self, m: f64) -> f64 {
        let w = m * PI / self.horizon;
        2.0 * self.r / (self.r * self.r + w * w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RootKind {
    Cot,
    Tan,
}

impl RootKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootKind::Cot => "cot",
            RootKind::Tan => "tan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub kind: RootKind,
    pub index: usize,
    pub omega: f64,
}

impl Root {
    pub fn gamma(&self, r: f64) -> f64 {
        2.0 * r / (r * r + self.omega * self.omega)
    }
}

/// Pole-free residual of the defining equation.
///
/// cot family: `ω sin(ωT/2) - r cos(ωT/2)`; tan family: `ω cos(ωT/2) + r sin(ωT/2)`.
pub fn root_residual(kernel: &Kernel, kind: RootKind, omega: f64) -> f64 {
    let (s, c) = (0.5 * omega * kernel.horizon).sin_cos();
    match kind {
        RootKind::Cot => omega * s - kernel.r * c,
        RootKind::Tan => omega * c + kernel.r * s,
    }
}

/// Interlacing window of the `index`-th root of the given family.
pub fn root_window(kernel: &Kernel, kind: RootKind, index: usize) -> (f64, f64) {
    let p = PI / kernel.horizon;
    let j = index as f64;
    match kind {
        RootKind::Cot => ((2.0 * j - 2.0) * p, (2.0 * j - 1.0) * p),
        RootKind::Tan => ((2.0 * j - 1.0) * p, 2.0 * j * p),
    }
}

pub fn solve_root(kernel: &Kernel, kind: RootKind, index: usize) -> Result<Root> {
    if kind == RootKind::Tan && index == 0 {
        return Ok(Root {
            kind,
            index,
            omega: 0.0,
        });
    }
    if kind == RootKind::Cot && index == 0 {
        return Err(Error::Domain {
            value: 0.0,
            what: "cot roots are indexed from 1",
        });
    }
    let (lo, hi) = root_window(kernel, kind, index);
    let tol = 1e-12 * (PI / kernel.horizon).max(1.0);
    let omega = Bisection::new(tol).solve(|w| root_residual(kernel, kind, w), lo, hi)?;
    Ok(Root { kind, index, omega })
}

/// The first `count` roots of one family: cot indices `1..=count`, tan
/// indices `0..count` (starting with `ω̃_0 = 0`).
pub fn solve_roots(kernel: &Kernel, kind: RootKind, count: usize) -> Result<Vec<Root>> {
    let first = match kind {
        RootKind::Cot => 1,
        RootKind::Tan => 0,
    };
    (first..first + count)
        .map(|j| solve_root(kernel, kind, j))
        .collect()
}

/// Root that generates the `k`-th eigenvalue (`k ≥ 1`).
pub fn eigen_root_id(k: usize) -> (RootKind, usize) {
    assert!(k >= 1, "eigenvalues are indexed from 1");
    if k % 2 == 1 {
        (RootKind::Cot, k.div_ceil(2))
    } else {
        (RootKind::Tan, k / 2)
    }
}

pub fn eigen_root(kernel: &Kernel, k: usize) -> Result<Root> {
    let (kind, index) = eigen_root_id(k);
    solve_root(kernel, kind, index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub kernel: Kernel,
    /// `γ_1 > γ_2 > ...`
    pub gammas: Vec<f64>,
    /// `roots[k-1]` generates `gammas[k-1]`.
    pub roots: Vec<Root>,
}

pub fn eigenvalues(kernel: &Kernel, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::Domain {
            value: 0.0,
            what: "eigenvalue count must be at least 1",
        });
    }
    let roots = (1..=count)
        .map(|k| eigen_root(kernel, k))
        .collect::<Result<Vec<_>>>()?;
    let gammas = roots.iter().map(|rt| rt.gamma(kernel.r)).collect();
    Ok(Spectrum {
        kernel: *kernel,
        gammas,
        roots,
    })
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// `f_j(s)` for `1 ≤ j ≤ len()`.
    pub fn eigenfunction(&self, j: usize, s: f64) -> Complex64 {
        eigenfunction_profile(&self.kernel, self.roots[j - 1].omega, s)[0]
    }

    /// `Σ_{k ≤ n} γ_k` plus the sandwich estimate of the remaining tail.
    pub fn trace_estimate(&self) -> TailSum {
        let partial: f64 = self.gammas.iter().rev().sum();
        let tail = ladder_tail(&self.kernel, self.len(), |g| g);
        TailSum {
            partial,
            tail: tail.estimate,
            tail_bound: tail.bound,
        }
    }
}

/// Unnormalized eigenfunction and its first two derivatives at `s`.
pub fn eigenfunction_profile(kernel: &Kernel, omega: f64, s: f64) -> [Complex64; 3] {
    let r = kernel.r;
    let (sn, cs) = (omega * s).sin_cos();
    let g = r * sn + omega * cs;
    let g1 = omega * (r * cs - omega * sn);
    let g2 = -omega * omega * g;
    let (ps, pc) = (-kernel.d * s).sin_cos();
    let phase = Complex64::new(pc, ps);
    let i_d = Complex64::new(0.0, kernel.d);
    let f = phase * g;
    let f1 = phase * (g1 - i_d * g);
    let f2 = phase * (g2 - 2.0 * i_d * g1 + i_d * i_d * g);
    [f, f1, f2]
}

pub fn eigenfunction_eval(kernel: &Kernel, j: usize, s: f64) -> Result<Complex64> {
    if j == 0 {
        return Err(Error::Domain {
            value: 0.0,
            what: "eigenfunctions are indexed from 1",
        });
    }
    let root = eigen_root(kernel, j)?;
    Ok(eigenfunction_profile(kernel, root.omega, s)[0])
}

/// `‖K_T f - γ f‖ / ‖f‖` for a candidate eigenpair, by direct quadrature of
/// the integral operator.
///
/// The inner integral is split at `t = s` where the kernel has a kink; the
/// `inner_points` nodes (16-point Gauss-Legendre panels) are shared between
/// `[0, s]` and `[s, T]` in proportion to their lengths. The L² norms use a
/// 256-node composite rule on `[0, T]`.
pub fn operator_residual<F>(kernel: &Kernel, gamma: f64, f: F, inner_points: usize) -> f64
where
    F: Fn(f64) -> Complex64,
{
    const PANEL: usize = 16;
    let gl = GaussLegendre::new(PANEL);
    let t_end = kernel.horizon;
    let total_panels = (inner_points / PANEL).max(2);
    let outer = gl.composite(0.0, t_end, 16);
    let (mut res2, mut norm2) = (0.0, 0.0);
    for &(s, ws) in &outer {
        let left = ((total_panels as f64 * s / t_end).round() as usize).clamp(1, total_panels - 1);
        let right = total_panels - left;
        let mut k = Complex64::new(0.0, 0.0);
        for (t, w) in gl
            .composite(0.0, s, left)
            .into_iter()
            .chain(gl.composite(s, t_end, right))
        {
            k += kernel.eval(s, t) * f(t) * w;
        }
        let fs = f(s);
        res2 += ws * (k - gamma * fs).norm_sqr();
        norm2 += ws * fs.norm_sqr();
    }
    (res2 / norm2).sqrt()
}

/// Relative residual of the `j`-th eigenpair.
pub fn kernel_apply_residual(kernel: &Kernel, j: usize, quad_points: usize) -> Result<f64> {
    if quad_points < 64 {
        return Err(Error::Domain {
            value: quad_points as f64,
            what: "at least 64 quadrature points",
        });
    }
    if j == 0 {
        return Err(Error::Domain {
            value: 0.0,
            what: "eigenpairs are indexed from 1",
        });
    }
    let root = eigen_root(kernel, j)?;
    let gamma = root.gamma(kernel.r);
    Ok(operator_residual(
        kernel,
        gamma,
        |t| eigenfunction_profile(kernel, root.omega, t)[0],
        quad_points,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSum {
    pub partial: f64,
    pub tail: f64,
    pub tail_bound: f64,
}

impl TailSum {
    pub fn total(&self) -> f64 {
        self.partial + self.tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub estimate: f64,
    /// Width of the sandwich containing both the estimate and the true tail.
    pub bound: f64,
}

/// Estimate of `Σ_{k>n} φ(γ_k)` for monotone `φ`.
///
/// Each `γ_k` lies between `b(k)` and `b(k-1)` with `b` the ladder bound, so
/// the tail is sandwiched by `Σ_{m>n} φ(b(m))` and `Σ_{m≥n} φ(b(m))`, a gap
/// of exactly `|φ(b(n))|`. The estimate replaces `γ_{m+1}` by its asymptotic
/// location (see [`asymptotic_gamma`]), which stays inside the sandwich, and
/// sums by Euler-Maclaurin.
pub fn ladder_tail<P: Fn(f64) -> f64>(kernel: &Kernel, n: usize, phi: P) -> TailEstimate {
    let term = |m: f64| phi(asymptotic_gamma(kernel, m));
    TailEstimate {
        estimate: euler_maclaurin_tail(&term, n as f64),
        bound: phi(kernel.ladder_bound(n as f64)).abs(),
    }
}

/// Approximate `γ_{m+1}` for a continuous index `m > 0`. The generating root
/// lies in `(mπ/T, (m+1)π/T)` and solves `tan(ωT) = 2rω/(ω² − r²)`; two
/// fixed-point sweeps of `ω = (mπ + atan2(2rω, ω² − r²))/T` from `ω = mπ/T`
/// leave an error of order `m^{-5}`.
pub fn asymptotic_gamma(kernel: &Kernel, m: f64) -> f64 {
    let (r, t) = (kernel.r, kernel.horizon);
    let base = m * PI / t;
    let mut w = base;
    for _ in 0..2 {
        w = base + (2.0 * r * w).atan2(w * w - r * r) / t;
    }
    2.0 * r / (r * r + w * w)
}

/// `Σ_{m ≥ a} h(m)` for a smooth `h` decaying like `m^{-2}`.
fn euler_maclaurin_tail<H: Fn(f64) -> f64>(h: &H, a: f64) -> f64 {
    // ∫_a^∞ h via m = a + s tan u
    let s = a.max(1.0);
    let integral = crate::quad::integrate(
        |u: f64| {
            let (sn, cs) = u.sin_cos();
            if cs <= 0.0 {
                return 0.0;
            }
            h(a + s * sn / cs) * s / (cs * cs)
        },
        0.0,
        PI / 2.0,
        1e-16,
        1e-13,
    )
    .value;
    let step = 1e-3 * s;
    let d1 = (h(a + step) - h(a - step)) / (2.0 * step);
    let wide = 1e-2 * s;
    let d3 = (h(a + 2.0 * wide) - 2.0 * h(a + wide) + 2.0 * h(a - wide) - h(a - 2.0 * wide))
        / (2.0 * wide.powi(3));
    integral + 0.5 * h(a) - d1 / 12.0 + d3 / 720.0
}
