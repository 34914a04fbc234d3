use std::f64::consts::FRAC_PI_4;

use ou_epr::cramer::lambda_finite_t;
use ou_epr::epr::{ergodic_mean, EprAccumulator};
use ou_epr::mc_verify::{estimate_log_mgf, ft_histogram_test, log_mean_exp};
use ou_epr::ou_sim::{euler_step, sample_stationary};
use ou_epr::rng::RngStream;
use ou_epr::stats::map_paths;
use ou_epr::Model;

fn model() -> Model {
    Model::new(FRAC_PI_4).unwrap()
}

#[test]
fn mean_identity_at_every_horizon() {
    let m = model();
    let pts = ergodic_mean(&m, &[0.5, 2.0, 10.0], 4000, 0.002, &RngStream::new(41, 0)).unwrap();
    for p in pts {
        assert!((p.mean - m.ep()).abs() < 3.0 * p.stderr, "{p:?}");
    }
}

#[test]
fn mgf_pairing_holds_at_each_finite_horizon() {
    // Stationary start makes the symmetry exact at every t, so the gap stays
    // at noise level rather than shrinking. Any pair (λ, -1-λ) has one member
    // whose weights have relative variance growing like e^{0.46 t} or faster,
    // which limits the empirical check to short horizons.
    let m = model();
    let (a, b) = (-0.45, -0.55);
    for t in [1.0, 5.0, 10.0, 20.0, 40.0] {
        let sa = lambda_finite_t(&m, a, t, 64).unwrap().value;
        let sb = lambda_finite_t(&m, b, t, 64).unwrap().value;
        assert!((sa - sb).abs() < 1e-13, "t={t}");
    }
    for (k, t) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let ea = estimate_log_mgf(&m, a, t, 20_000, 0.005, &RngStream::new(42, k as u64)).unwrap();
        let eb = estimate_log_mgf(&m, b, t, 20_000, 0.005, &RngStream::new(43, k as u64)).unwrap();
        let spectral = lambda_finite_t(&m, a, t, 64).unwrap().value;
        let tol = 3.0 * (ea.stderr + eb.stderr);
        assert!(
            (ea.log_mgf_over_t - eb.log_mgf_over_t).abs() < tol,
            "t={t}: {ea:?} {eb:?}"
        );
        for e in [ea, eb] {
            assert!(
                (e.log_mgf_over_t - spectral).abs() < 3.0 * e.stderr,
                "t={t}: {e:?} vs {spectral}"
            );
        }
    }
}

#[test]
fn doubling_ladder_shrinks_error_bars() {
    let m = model();
    let spectral = lambda_finite_t(&m, 0.05, 5.0, 64).unwrap().value;
    let mut prev: Option<f64> = None;
    for (k, n) in [2500usize, 5000, 10_000, 20_000, 40_000]
        .into_iter()
        .enumerate()
    {
        let e = estimate_log_mgf(&m, 0.05, 5.0, n, 0.005, &RngStream::new(44, k as u64)).unwrap();
        assert!(
            (e.log_mgf_over_t - spectral).abs() < 3.0 * e.stderr,
            "n={n}: {e:?} vs {spectral}"
        );
        if let Some(p) = prev {
            let ratio = e.stderr / p;
            assert!((0.6..0.8).contains(&ratio), "n={n}: ratio {ratio}");
        }
        prev = Some(e.stderr);
    }
}

#[test]
fn halving_dt_moves_estimate_by_less_than_acceptance_stderr() {
    // Coupled paths: the coarse increments are sums of pairs of fine ones.
    let m = model();
    let drift = m.drift();
    let (lambda, t, dt): (f64, f64, f64) = (0.05, 20.0, 1e-3);
    let coarse_steps = (t / dt).round() as usize;
    let n_paths = 4000;
    let rng = RngStream::new(45, 0);
    let exps = map_paths(n_paths, |i| {
        let mut r = rng.child(i);
        let z0 = sample_stationary(&mut r);
        let (mut zc, mut zf) = (z0, z0);
        let mut coarse = EprAccumulator::new(&m, dt);
        let mut fine = EprAccumulator::new(&m, 0.5 * dt);
        let sd = (0.5 * dt).sqrt();
        for _ in 0..coarse_steps {
            let (mut c1, mut c2) = (0.0, 0.0);
            for _ in 0..2 {
                let (b1, b2) = (r.normal() * sd, r.normal() * sd);
                fine.push(zf.re, zf.im, b1, b2);
                zf = euler_step(zf, &drift, 0.5 * dt, b1, b2);
                c1 += b1;
                c2 += b2;
            }
            coarse.push(zc.re, zc.im, c1, c2);
            zc = euler_step(zc, &drift, dt, c1, c2);
        }
        let (sc, sf) = (coarse.sample(), fine.sample());
        [lambda * t * sc.value, lambda * t * sf.value]
    });
    let ac: Vec<f64> = exps.iter().map(|e| e[0]).collect();
    let af: Vec<f64> = exps.iter().map(|e| e[1]).collect();
    let lc = log_mean_exp(&ac, &rng);
    let lf = log_mean_exp(&af, &rng);
    let shift = (lf.value - lc.value) / t;
    // stderr at 2·10⁵ paths
    let acceptance_se = lc.stderr / t * (n_paths as f64 / 2e5).sqrt();
    assert!(
        shift.abs() < acceptance_se,
        "shift {shift} vs stderr {acceptance_se}"
    );
}

#[test]
fn fluctuation_slope_for_mirrored_angle() {
    let m = Model::new(-FRAC_PI_4).unwrap();
    let h = ft_histogram_test(&m, 3.0, 300_000, 1e-3, 100, &RngStream::new(46, 0)).unwrap();
    assert!(
        (0.85..=1.15).contains(&h.slope_estimate),
        "{}",
        h.slope_estimate
    );
    assert!(h
        .admissible
        .iter()
        .all(|b| b.count_pos >= 100 && b.count_neg >= 100));
}
