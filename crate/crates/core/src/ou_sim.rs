//! Stationary paths of the (possibly tilted) complex OU process
//! `dZ = -α Z dt + sqrt(2r) dζ`, `ζ = (B1 + i B2)/√2`.
//!
//! Two schemes are available. `Exact` samples the Gaussian transition kernel
//! and has no time-discretization bias in quadratic functionals. `Euler`
//! drives the path with stored Brownian increments, which is what the Itô
//! sum in the entropy production functional requires.

use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{Model, TiltedDrift};
use crate::output::{fmt_float, CsvWriter};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Exact,
    Euler,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Scheme::Exact),
            "euler" => Ok(Scheme::Euler),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// `None` simulates the untilted process.
    pub tilt_lambda: Option<f64>,
}

impl SimConfig {
    pub fn new(horizon: f64, dt: f64, scheme: Scheme) -> Self {
        Self {
            horizon,
            dt,
            scheme,
            tilt_lambda: None,
        }
    }

    pub fn with_tilt(mut self, lambda: f64) -> Self {
        self.tilt_lambda = Some(lambda);
        self
    }

    /// Number of steps; the horizon must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.horizon, self.dt)
    }
}

pub(crate) fn steps_for(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !(dt > 0.0 && dt <= horizon) {
        return Err(Error::Config(format!(
            "dt must lie in (0, horizon], got {dt}"
        )));
    }
    let n = (horizon / dt).round();
    if (n * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Error::Config(format!(
            "horizon {horizon} is not an integer multiple of dt {dt}"
        )));
    }
    Ok(n as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    /// `Z_0 .. Z_N`.
    pub states: Vec<Complex64>,
    /// `(ΔB1, ΔB2)` per step, each component `N(0, dt)`. For `Scheme::Exact`
    /// this is the scaled Gaussian pair used to synthesize the transition
    /// noise, not an increment of the driving motion.
    pub noise: Vec<[f64; 2]>,
    pub scheme: Scheme,
    /// Tilt used to generate the path; `0.0` for the physical dynamics.
    pub tilt_lambda: f64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.noise.len()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    /// Writes `t,z1,z2,db1,db2`; the final row carries the last state and
    /// empty increment fields.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<W> {
        let mut w = CsvWriter::new(out, &["t", "z1", "z2", "db1", "db2"])?;
        for (k, z) in self.states.iter().enumerate() {
            let t = fmt_float(k as f64 * self.dt);
            let (db1, db2) = match self.noise.get(k) {
                Some([a, b]) => (fmt_float(*a), fmt_float(*b)),
                None => (String::new(), String::new()),
            };
            w.row(&[t, fmt_float(z.re), fmt_float(z.im), db1, db2])?;
        }
        w.finish()
    }
}

/// A draw from the invariant law `μ(dz) = π^{-1} exp(-|z|²) dz`.
pub fn sample_stationary(rng: &mut RngStream) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = rng.normal() * s;
    let im = rng.normal() * s;
    Complex64::new(re, im)
}

/// Exact transition `Z_{t+dt} | Z_t = z`.
///
/// The noise `ε` is complex normal with `E|ε|² = 1 - e^{-2r dt}`, which keeps
/// the stationary second moment at one.
pub fn exact_step(z: Complex64, drift: &TiltedDrift, dt: f64, rng: &mut RngStream) -> Complex64 {
    let kernel = ExactKernel::new(drift, dt);
    let (n1, n2) = (rng.normal(), rng.normal());
    kernel.apply(z, n1, n2)
}

#[derive(Debug, Clone, Copy)]
struct ExactKernel {
    decay: Complex64,
    sd: f64,
}

impl ExactKernel {
    fn new(drift: &TiltedDrift, dt: f64) -> Self {
        let decay = (-drift.alpha * dt).exp();
        // 1 - e^{-2 r dt}, accurate for small dt
        let var = -(-2.0 * drift.r * dt).exp_m1();
        Self {
            decay,
            sd: (0.5 * var).sqrt(),
        }
    }

    #[inline]
    fn apply(&self, z: Complex64, n1: f64, n2: f64) -> Complex64 {
        self.decay * z + Complex64::new(self.sd * n1, self.sd * n2)
    }
}

/// One Euler-Maruyama step driven by the increments `(db1, db2)`:
/// `Z + (-α Z dt) + sqrt(r) (db1 + i db2)`.
#[inline]
pub fn euler_step(z: Complex64, drift: &TiltedDrift, dt: f64, db1: f64, db2: f64) -> Complex64 {
    let sr = drift.r.sqrt();
    let dz = -drift.alpha * z * dt;
    Complex64::new(z.re + dz.re + sr * db1, z.im + dz.im + sr * db2)
}

/// Runs one path without storing it. `visit(z_k, db1_k, db2_k)` is called
/// for every step with the left-point state; the final state is returned.
pub fn stream_path<F>(
    drift: &TiltedDrift,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    rng: &mut RngStream,
    mut visit: F,
) -> Complex64
where
    F: FnMut(Complex64, f64, f64),
{
    let mut z = sample_stationary(rng);
    let sqrt_dt = dt.sqrt();
    match scheme {
        Scheme::Euler => {
            for _ in 0..steps {
                let db1 = rng.normal() * sqrt_dt;
                let db2 = rng.normal() * sqrt_dt;
                visit(z, db1, db2);
                z = euler_step(z, drift, dt, db1, db2);
            }
        }
        Scheme::Exact => {
            let kernel = ExactKernel::new(drift, dt);
            for _ in 0..steps {
                let n1 = rng.normal();
                let n2 = rng.normal();
                visit(z, n1 * sqrt_dt, n2 * sqrt_dt);
                z = kernel.apply(z, n1, n2);
            }
        }
    }
    z
}

pub fn simulate(model: &Model, config: &SimConfig, rng: &mut RngStream) -> Result<Trajectory> {
    let steps = config.steps()?;
    let lambda = config.tilt_lambda.unwrap_or(0.0);
    let drift = model.tilted_drift(lambda);
    let mut states = Vec::with_capacity(steps + 1);
    let mut noise = Vec::with_capacity(steps);
    let last = stream_path(&drift, config.scheme, config.dt, steps, rng, |z, a, b| {
        states.push(z);
        noise.push([a, b]);
    });
    states.push(last);
    Ok(Trajectory {
        dt: config.dt,
        states,
        noise,
        scheme: config.scheme,
        tilt_lambda: lambda,
    })
}

/// Euler path from a given start and given increments.
pub fn euler_path(
    z0: Complex64,
    drift: &TiltedDrift,
    dt: f64,
    increments: &[[f64; 2]],
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut z = z0;
    out.push(z);
    for &[a, b] in increments {
        z = euler_step(z, drift, dt, a, b);
        out.push(z);
    }
    out
}
