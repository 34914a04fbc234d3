//! Monte Carlo checks of the analytic results: empirical exponential moments
//! of `e_p(t)`, the Girsanov identity, and the finite-time fluctuation
//! theorem histogram.

use serde::Serialize;

use crate::epr::epr_path_snapshots;
use crate::model::Model;
use crate::ou_sim::{self, Scheme};
use crate::rng::RngStream;
use crate::stats::{map_paths, mean_stderr, pairwise_sum};
use crate::{Error, Result};

/// Exponential-moment estimation is only attempted for `ℓ(λ) ≤ 0.6 · r/2`;
/// closer to the wall the estimator variance blows up.
pub const MGF_ELL_FRACTION: f64 = 0.6;
pub const MIN_MGF_PATHS: usize = 100;
/// Minimum count on both sides for a histogram bin pair to enter the slope fit.
pub const MIN_BIN_COUNT: u64 = 100;
const BOOTSTRAP_RESAMPLES: usize = 1000;
const GIRSANOV_RHS_TAG: u64 = 0x6769_7273;
const BOOTSTRAP_TAG: u64 = 0x626f_6f74;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfEstimate {
    pub lambda: f64,
    pub t: f64,
    pub n_paths: usize,
    pub dt: f64,
    /// `t^{-1} log(mean exp(a_i))` for the per-path exponents `a_i`.
    pub log_mgf_over_t: f64,
    pub stderr: f64,
    /// Set when the top 1% of weights carry more than half the mean; the
    /// standard error then comes from a bootstrap instead of the delta method.
    pub heavy_tail: bool,
    pub seed: u64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMeanExp {
    pub value: f64,
    pub stderr: f64,
    pub heavy_tail: bool,
}

/// `log((1/n) Σ exp(a_i))` with its standard error.
pub fn log_mean_exp(a: &[f64], rng: &RngStream) -> LogMeanExp {
    let n = a.len();
    let shift = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = a.iter().map(|x| (x - shift).exp()).collect();
    let (mean_w, se_w) = mean_stderr(&w);
    let value = shift + mean_w.ln();

    let mut sorted = w.clone();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let top = n.div_ceil(100);
    let heavy_tail = pairwise_sum(&sorted[..top]) > 0.5 * pairwise_sum(&sorted);

    let stderr = if heavy_tail {
        let mut r = rng.fork(BOOTSTRAP_TAG);
        let mut logs = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut buf = vec![0.0; n];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for slot in buf.iter_mut() {
                *slot = w[r.below(n)];
            }
            logs.push((pairwise_sum(&buf) / n as f64).ln());
        }
        let (_, se) = mean_stderr(&logs);
        se * (BOOTSTRAP_RESAMPLES as f64).sqrt()
    } else {
        se_w / mean_w
    };
    LogMeanExp {
        value,
        stderr,
        heavy_tail,
    }
}

fn check_mgf_domain(model: &Model, lambda: f64, n_paths: usize) -> Result<()> {
    let r = model.r();
    let ell = model.ell_of_lambda(lambda);
    if ell >= 0.5 * r {
        return Err(Error::Domain {
            value: lambda,
            what: "exponential moment is infinite (ell >= r/2)",
        });
    }
    if ell > MGF_ELL_FRACTION * 0.5 * r {
        return Err(Error::Domain {
            value: lambda,
            what: "ell(lambda) too close to r/2 for plain Monte Carlo",
        });
    }
    if n_paths < MIN_MGF_PATHS {
        return Err(Error::Config(format!(
            "need at least {MIN_MGF_PATHS} paths, got {n_paths}"
        )));
    }
    Ok(())
}

fn mgf_from_exponents(
    lambda: f64,
    t: f64,
    dt: f64,
    scheme: Scheme,
    exponents: &[f64],
    rng: &RngStream,
) -> MgfEstimate {
    let lme = log_mean_exp(exponents, rng);
    MgfEstimate {
        lambda,
        t,
        n_paths: exponents.len(),
        dt,
        log_mgf_over_t: lme.value / t,
        stderr: lme.stderr / t,
        heavy_tail: lme.heavy_tail,
        seed: rng.seed(),
        scheme,
    }
}

/// `t^{-1} log E exp(t λ e_p(t))` from `n_paths` untilted Euler paths.
pub fn estimate_log_mgf(
    model: &Model,
    lambda: f64,
    t: f64,
    n_paths: usize,
    dt: f64,
    rng: &RngStream,
) -> Result<MgfEstimate> {
    check_mgf_domain(model, lambda, n_paths)?;
    let steps = ou_sim::steps_for(t, dt)?;
    if lambda == 0.0 {
        return Ok(MgfEstimate {
            lambda,
            t,
            n_paths,
            dt,
            log_mgf_over_t: 0.0,
            stderr: 0.0,
            heavy_tail: false,
            seed: rng.seed(),
            scheme: Scheme::Euler,
        });
    }
    let exponents = map_paths(n_paths, |i| {
        let mut r = rng.child(i);
        let s = epr_path_snapshots(model, dt, &[steps], &mut r)[0];
        lambda * (s.quad_part + s.ito_part)
    });
    Ok(mgf_from_exponents(
        lambda,
        t,
        dt,
        Scheme::Euler,
        &exponents,
        rng,
    ))
}

/// Both sides of the Girsanov identity
///
/// ```text
/// E exp{λ t e_p(t)}  =  E exp{ℓ(λ) ∫_0^t |Y|²}
/// ```
///
/// where `Y` is the tilted process with rotation `(1 + 2λ) sin θ`. The left
/// side uses untilted Euler paths; the right side needs no stochastic
/// integral and uses exact transitions with a left-point Riemann sum.
pub fn girsanov_balance(
    model: &Model,
    lambda: f64,
    t: f64,
    n_paths: usize,
    dt: f64,
    rng: &RngStream,
) -> Result<(MgfEstimate, MgfEstimate)> {
    let lhs = estimate_log_mgf(model, lambda, t, n_paths, dt, rng)?;
    let rhs_rng = rng.fork(GIRSANOV_RHS_TAG);
    let rhs = tilted_quadratic_mgf(model, lambda, t, n_paths, dt, &rhs_rng)?;
    Ok((lhs, rhs))
}

/// `t^{-1} log E exp{ℓ(λ) ∫_0^t |Y|²}` on tilted exact-transition paths.
pub fn tilted_quadratic_mgf(
    model: &Model,
    lambda: f64,
    t: f64,
    n_paths: usize,
    dt: f64,
    rng: &RngStream,
) -> Result<MgfEstimate> {
    check_mgf_domain(model, lambda, n_paths)?;
    let steps = ou_sim::steps_for(t, dt)?;
    let ell = model.ell_of_lambda(lambda);
    let drift = model.tilted_drift(lambda);
    let exponents = map_paths(n_paths, |i| {
        let mut r = rng.child(i);
        let mut sum = 0.0;
        ou_sim::stream_path(&drift, Scheme::Exact, dt, steps, &mut r, |z, _, _| {
            sum += z.norm_sqr()
        });
        ell * sum * dt
    });
    Ok(mgf_from_exponents(
        lambda,
        t,
        dt,
        Scheme::Exact,
        &exponents,
        rng,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FtBin {
    pub x: f64,
    pub log_ratio_over_t: f64,
    pub count_pos: u64,
    pub count_neg: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FtHistogram {
    pub t: f64,
    pub bin_edges: Vec<f64>,
    /// Bin pairs `(x, -x)`, `x > 0`, with at least [`MIN_BIN_COUNT`] samples on each side.
    pub admissible: Vec<FtBin>,
    pub slope_estimate: f64,
    pub slope_stderr: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

/// Histogram of `e_p(t)` on a grid symmetric about zero, the log-ratio
/// `t^{-1} log(count(x) / count(-x))` for every admissible bin pair, and the
/// zero-intercept least-squares slope of that log-ratio against `x`,
/// weighted by the inverse binomial variance `1/(1/n_+ + 1/n_-)`.
///
/// The fluctuation theorem predicts a slope of one.
pub fn ft_histogram_test(
    model: &Model,
    t: f64,
    n_paths: usize,
    dt: f64,
    bins: usize,
    rng: &RngStream,
) -> Result<FtHistogram> {
    if bins < 2 || !bins.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "bins must be even and at least 2, got {bins}"
        )));
    }
    let steps = ou_sim::steps_for(t, dt)?;
    let samples = map_paths(n_paths, |i| {
        let mut r = rng.child(i);
        epr_path_snapshots(model, dt, &[steps], &mut r)[0].value
    });
    let half = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let half = if half > 0.0 {
        half * (1.0 + 1e-12)
    } else {
        1.0
    };
    let width = 2.0 * half / bins as f64;
    let mut counts = vec![0u64; bins];
    for x in &samples {
        let idx = (((x + half) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let bin_edges: Vec<f64> = (0..=bins).map(|i| -half + i as f64 * width).collect();

    let mut admissible = Vec::new();
    for i in bins / 2..bins {
        let (pos, neg) = (counts[i], counts[bins - 1 - i]);
        if pos >= MIN_BIN_COUNT && neg >= MIN_BIN_COUNT {
            let x = 0.5 * (bin_edges[i] + bin_edges[i + 1]);
            admissible.push(FtBin {
                x,
                log_ratio_over_t: (pos as f64 / neg as f64).ln() / t,
                count_pos: pos,
                count_neg: neg,
            });
        }
    }
    if admissible.is_empty() {
        return Err(Error::InsufficientTailData {
            min_count: MIN_BIN_COUNT,
        });
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for b in &admissible {
        let var = (1.0 / b.count_pos as f64 + 1.0 / b.count_neg as f64) / (t * t);
        sxy += b.x * b.log_ratio_over_t / var;
        sxx += b.x * b.x / var;
    }
    Ok(FtHistogram {
        t,
        bin_edges,
        admissible,
        slope_estimate: sxy / sxx,
        slope_stderr: 1.0 / sxx.sqrt(),
        n_paths,
        dt,
        seed: rng.seed(),
    })
}
