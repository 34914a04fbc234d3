//! Sample entropy production rate along a trajectory.
//!
//! With `X = (Re Z, Im Z)` and the driving increments `dB`,
//!
//! ```text
//! t e_p(t) = (2 sin²θ / cos θ) ∫ |X|² ds + (2 sin θ / sqrt(cos θ)) ∫ (X2 dB1 - X1 dB2)
//! ```
//!
//! Both integrals use the left endpoint of each step (Itô convention).

use serde::Serialize;

use crate::model::Model;
use crate::ou_sim::{self, Scheme, Trajectory};
use crate::rng::RngStream;
use crate::stats::{map_paths, mean_stderr};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprSample {
    pub t: f64,
    pub value: f64,
    /// `(2 sin²θ/cos θ) ∫|X|²`
    pub quad_part: f64,
    /// `(2 sin θ/sqrt(cos θ)) ∫ [X2, -X1] dB`
    pub ito_part: f64,
}

/// Streaming evaluator of `e_p(t)`; feed it left-point states and increments.
#[derive(Debug, Clone)]
pub struct EprAccumulator {
    quad_coef: f64,
    ito_coef: f64,
    dt: f64,
    quad_sum: f64,
    ito_sum: f64,
    steps: usize,
}

impl EprAccumulator {
    pub fn new(model: &Model, dt: f64) -> Self {
        let theta = model.theta();
        Self {
            quad_coef: model.ep(),
            ito_coef: 2.0 * theta.sin() / theta.cos().sqrt(),
            dt,
            quad_sum: 0.0,
            ito_sum: 0.0,
            steps: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, x1: f64, x2: f64, db1: f64, db2: f64) {
        self.quad_sum += x1 * x1 + x2 * x2;
        self.ito_sum += x2 * db1 - x1 * db2;
        self.steps += 1;
    }

    pub fn sample(&self) -> EprSample {
        let t = self.steps as f64 * self.dt;
        let quad_part = self.quad_coef * self.quad_sum * self.dt;
        let ito_part = self.ito_coef * self.ito_sum;
        EprSample {
            t,
            value: (quad_part + ito_part) / t,
            quad_part,
            ito_part,
        }
    }
}

fn check_path(traj: &Trajectory) -> Result<()> {
    if traj.scheme != Scheme::Euler {
        return Err(Error::SchemeMismatch);
    }
    if traj.tilt_lambda != 0.0 {
        return Err(Error::TiltMismatch(traj.tilt_lambda));
    }
    if traj.noise.is_empty() {
        return Err(Error::Config("trajectory has no steps".into()));
    }
    Ok(())
}

pub fn epr_functional(traj: &Trajectory, model: &Model) -> Result<EprSample> {
    check_path(traj)?;
    let mut acc = EprAccumulator::new(model, traj.dt);
    for (z, &[db1, db2]) in traj.states.iter().zip(&traj.noise) {
        acc.push(z.re, z.im, db1, db2);
    }
    Ok(acc.sample())
}

/// `e_p(t)` from the realized state increments alone:
/// `(2 tan θ / t) Σ (X2 ΔX1 - X1 ΔX2)`.
///
/// On an Euler path the per-step identity
/// `X2 ΔX1 - X1 ΔX2 = sin θ |X|² dt + sqrt(cos θ)(X2 ΔB1 - X1 ΔB2)` holds
/// exactly, so the two estimators agree to rounding.
pub fn epr_via_area(traj: &Trajectory, model: &Model) -> Result<EprSample> {
    check_path(traj)?;
    let theta = model.theta();
    let mut area = 0.0;
    for w in traj.states.windows(2) {
        let (a, b) = (w[0], w[1]);
        area += a.im * (b.re - a.re) - a.re * (b.im - a.im);
    }
    let t = traj.horizon();
    let value = 2.0 * theta.tan() * area / t;
    Ok(EprSample {
        t,
        value,
        quad_part: f64::NAN,
        ito_part: f64::NAN,
    })
}

/// Simulates one untilted Euler path of `steps` steps and returns `e_p` at
/// each of the requested step counts (ascending).
pub fn epr_path_snapshots(
    model: &Model,
    dt: f64,
    checkpoints: &[usize],
    rng: &mut RngStream,
) -> Vec<EprSample> {
    let steps = checkpoints.last().copied().unwrap_or(0);
    let drift = model.drift();
    let mut acc = EprAccumulator::new(model, dt);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    ou_sim::stream_path(&drift, Scheme::Euler, dt, steps, rng, |z, db1, db2| {
        acc.push(z.re, z.im, db1, db2);
        while next < checkpoints.len() && checkpoints[next] == acc.steps {
            out.push(acc.sample());
            next += 1;
        }
    });
    out
}

/// `e_p(t)` on one fresh untilted Euler path.
pub fn sample_epr(model: &Model, t: f64, dt: f64, rng: &mut RngStream) -> Result<EprSample> {
    let steps = ou_sim::steps_for(t, dt)?;
    Ok(epr_path_snapshots(model, dt, &[steps], rng)[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicPoint {
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Monte Carlo mean of `e_p(t)` over `n_paths` independent stationary paths,
/// for every horizon in `t_grid`. Each path is simulated once to the largest
/// horizon; shorter horizons are read off its prefix.
pub fn ergodic_mean(
    model: &Model,
    t_grid: &[f64],
    n_paths: usize,
    dt: f64,
    rng: &RngStream,
) -> Result<Vec<ErgodicPoint>> {
    if n_paths == 0 {
        return Err(Error::Config("n_paths must be at least 1".into()));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "t_grid must be non-empty and strictly increasing".into(),
        ));
    }
    let checkpoints = t_grid
        .iter()
        .map(|&t| ou_sim::steps_for(t, dt))
        .collect::<Result<Vec<_>>>()?;
    let per_path = map_paths(n_paths, |i| {
        let mut r = rng.child(i);
        epr_path_snapshots(model, dt, &checkpoints, &mut r)
    });
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let vals: Vec<f64> = per_path.iter().map(|p| p[k].value).collect();
            let (mean, stderr) = mean_stderr(&vals);
            ErgodicPoint { t, mean, stderr }
        })
        .collect())
}
