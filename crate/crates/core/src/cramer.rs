//! Cramér (free energy) function and rate function of the sample entropy
//! production rate.
//!
//! After the Girsanov tilt, `Λ_T(λ) = T^{-1} log E exp(ℓ(λ) ∫_0^T |Z|²)` with
//! `ℓ(λ) = e_p λ(1+λ)`, which the Karhunen-Loève product turns into
//! `-T^{-1} Σ_k log(1 - ℓ γ_{T,k})`. As `T → ∞` this tends to `-F(ℓ)` with
//!
//! ```text
//! F(ℓ) = ∫_0^∞ log(1 - 2ℓr / (r² + π² y²)) dy = sqrt(r(r - 2ℓ)) - r,   ℓ < r/2
//! ```
//!
//! and `Λ = +∞` for `ℓ ≥ r/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::model::Model;
use crate::quad;
use crate::roots::Bisection;
use crate::spectral::{eigen_root, eigenvalues, ladder_tail, Kernel};
use crate::{Error, Result};

/// Largest tolerated half-width of the tail sandwich in `Λ_T`, after dividing by `T`.
pub const FINITE_T_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreeEnergyMethod {
    FiniteT { horizon: f64, n_terms: usize },
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergyEval {
    pub lambda: f64,
    pub ell: f64,
    /// `f64::INFINITY` when the exponential moment diverges.
    pub value: f64,
    pub method: FreeEnergyMethod,
}

impl FreeEnergyEval {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    PaperFormula,
    Legendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEval {
    pub x: f64,
    pub value: f64,
    pub method: RateMethod,
    pub argmax_lambda: Option<f64>,
    pub ell0: Option<f64>,
}

/// Finite-horizon Cramér function from the eigenvalue product.
///
/// Returns `+∞` iff `ℓ γ_{T,1} ≥ 1`. Otherwise sums the first `n_terms`
/// eigenvalues (doubling `n_terms` until the tail sandwich is narrower than
/// [`FINITE_T_TAIL_TOL`]) and adds the tail estimate.
pub fn lambda_finite_t(
    model: &Model,
    lambda: f64,
    horizon: f64,
    n_terms: usize,
) -> Result<FreeEnergyEval> {
    if n_terms == 0 {
        return Err(Error::Domain {
            value: 0.0,
            what: "n_terms must be at least 1",
        });
    }
    let ell = model.ell_of_lambda(lambda);
    let kernel = Kernel::from_drift(&model.tilted_drift(lambda), horizon)?;
    let eval = |value, n_terms| FreeEnergyEval {
        lambda,
        ell,
        value,
        method: FreeEnergyMethod::FiniteT { horizon, n_terms },
    };
    if ell == 0.0 {
        return Ok(eval(0.0, n_terms));
    }
    let gamma1 = eigen_root(&kernel, 1)?.gamma(kernel.r);
    if ell * gamma1 >= 1.0 {
        return Ok(eval(f64::INFINITY, n_terms));
    }
    let phi = |g: f64| -(-ell * g).ln_1p();
    let mut n = n_terms;
    while phi(kernel.ladder_bound(n as f64)).abs() / horizon > FINITE_T_TAIL_TOL {
        n *= 2;
    }
    let spectrum = eigenvalues(&kernel, n)?;
    let partial: f64 = spectrum.gammas.iter().rev().map(|&g| phi(g)).sum();
    let tail = ladder_tail(&kernel, n, phi);
    Ok(eval((partial + tail.estimate) / horizon, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FMethod {
    Quadrature,
    ClosedForm,
}

/// `F(ℓ) = ∫_0^∞ log(1 - 2ℓr/(r² + π²y²)) dy` for `ℓ < r/2`.
///
/// The quadrature path substitutes `y = tan(u)/π`, giving the bounded
/// integrand `log(1 - 2ℓr cos²u / (r² cos²u + sin²u)) / (π cos²u)` on `[0, π/2]`.
pub fn free_energy_f(ell: f64, r: f64, method: FMethod) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain {
            value: r,
            what: "r must be positive",
        });
    }
    if ell.is_nan() || ell >= 0.5 * r {
        return Err(Error::Domain {
            value: ell,
            what: "F(ell) needs ell < r/2",
        });
    }
    Ok(match method {
        // sqrt(r(r-2ℓ)) - r, written without cancellation near ℓ = 0
        FMethod::ClosedForm => -2.0 * ell * r / ((r * (r - 2.0 * ell)).sqrt() + r),
        FMethod::Quadrature => {
            let integrand = |u: f64| {
                let (s, c) = u.sin_cos();
                let c2 = c * c;
                if c2 == 0.0 {
                    return -2.0 * ell * r / (PI * s * s);
                }
                let x = 2.0 * ell * r * c2 / (r * r * c2 + s * s);
                (-x).ln_1p() / (PI * c2)
            };
            quad::integrate(integrand, 0.0, FRAC_PI_2, 1e-14, 1e-14).value
        }
    })
}

fn finite_domain_eval(
    model: &Model,
    lambda: f64,
    method: FreeEnergyMethod,
    value: impl FnOnce(f64) -> f64,
) -> FreeEnergyEval {
    let ell = model.ell_of_lambda(lambda);
    let value = if model.in_domain(lambda) {
        value(ell)
    } else {
        f64::INFINITY
    };
    FreeEnergyEval {
        lambda,
        ell,
        value,
        method,
    }
}

/// Limiting Cramér function `Λ(λ) = -F(ℓ(λ))`, closed form
/// `cos θ - sqrt(cos²θ - 4λ(1+λ) sin²θ)`; `+∞` outside `(λ_lo, λ_hi)`.
pub fn cramer(model: &Model, lambda: f64) -> FreeEnergyEval {
    let r = model.r();
    finite_domain_eval(model, lambda, FreeEnergyMethod::ClosedForm, |ell| {
        2.0 * ell * r / (r + (r * (r - 2.0 * ell)).sqrt())
    })
}

/// `Λ(λ) = -F(ℓ(λ))` with `F` evaluated by quadrature.
pub fn cramer_quadrature(model: &Model, lambda: f64) -> Result<FreeEnergyEval> {
    let r = model.r();
    let mut err = None;
    let out = finite_domain_eval(model, lambda, FreeEnergyMethod::Quadrature, |ell| {
        free_energy_f(ell, r, FMethod::Quadrature)
            .map(|f| -f)
            .unwrap_or_else(|e| {
                err = Some(e);
                f64::NAN
            })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `Λ'(λ) = e_p (1 + 2λ) sqrt(r / (r - 2ℓ))` on the open finiteness interval.
pub fn cramer_prime(model: &Model, lambda: f64) -> Result<f64> {
    if !model.in_domain(lambda) {
        return Err(Error::Domain {
            value: lambda,
            what: "Λ' exists only strictly inside (lambda_lo, lambda_hi)",
        });
    }
    Ok(cramer_prime_unchecked(model, lambda))
}

fn cramer_prime_unchecked(model: &Model, lambda: f64) -> f64 {
    let r = model.r();
    let ell = model.ell_of_lambda(lambda);
    model.ep() * (1.0 + 2.0 * lambda) * (r / (r - 2.0 * ell)).sqrt()
}

/// The optimal-tilt value `ℓ_0 = (x²c² - 1) r / (2 (x²c + 2r) c)`.
pub fn optimal_ell(model: &Model, x: f64) -> f64 {
    let dc = model.derived_constants();
    let (r, c) = (dc.r, dc.c);
    (x * x * c * c - 1.0) * r / (2.0 * (x * x * c + 2.0 * r) * c)
}

/// Rate function from the explicit two-branch formula; the `y`-integral is
/// evaluated by adaptive quadrature after `y = tan u`.
pub fn rate_paper(model: &Model, x: f64) -> RateEval {
    let dc = model.derived_constants();
    let (r, c) = (dc.r, dc.c);
    let x2 = x * x;
    let root = (x2 * (1.0 + 2.0 * r * c) * c / (x2 * c + 2.0 * r)).sqrt();
    let algebraic = if x >= 0.0 {
        -0.5 * (1.0 - root) * x
    } else {
        -0.5 * (1.0 + root) * x
    };
    let k = (x2 * c * c - 1.0) / ((2.0 * r + x2 * c) * c);
    // log argument is 1 - k/(1+y²) ∈ [1-k, 1] (or [1, 1-k]); 1 - k > 0 always
    assert!(
        1.0 - k > 0.0,
        "rate integrand argument left (0, ∞): k = {k}"
    );
    let integral = quad::integrate(
        |u: f64| {
            let c2 = u.cos().powi(2);
            if c2 == 0.0 {
                return -k;
            }
            (-k * c2).ln_1p() / c2
        },
        0.0,
        FRAC_PI_2,
        1e-15,
        1e-14,
    )
    .value;
    RateEval {
        x,
        value: algebraic + r / PI * integral,
        method: RateMethod::PaperFormula,
        argmax_lambda: None,
        ell0: Some(optimal_ell(model, x)),
    }
}

/// Rate function as the Legendre transform `sup_λ {xλ - Λ(λ)}`, located by
/// bisection on the strictly increasing `Λ'(λ) = x`.
pub fn rate_legendre(model: &Model, x: f64) -> Result<RateEval> {
    let dc = model.derived_constants();
    let width = dc.lambda_hi - dc.lambda_lo;
    let inset = 1e-15 * width;
    let lo = dc.lambda_lo + inset;
    let hi = dc.lambda_hi - inset;
    let lambda = Bisection {
        x_tol: 0.0,
        max_iter: 2000,
    }
    .solve(|l| cramer_prime_unchecked(model, l) - x, lo, hi)?;
    let value = x * lambda - cramer(model, lambda).value;
    Ok(RateEval {
        x,
        value,
        method: RateMethod::Legendre,
        argmax_lambda: Some(lambda),
        ell0: Some(model.ell_of_lambda(lambda)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, SQRT_2};

    fn m4() -> Model {
        Model::new(FRAC_PI_4).unwrap()
    }

    #[test]
    fn f_examples() {
        for method in [FMethod::ClosedForm, FMethod::Quadrature] {
            assert_eq!(free_energy_f(0.0, 1.0, method).unwrap(), 0.0);
            assert!(
                (free_energy_f(-1.0, 1.0, method).unwrap() - (3f64.sqrt() - 1.0)).abs() < 1e-10
            );
            assert!(
                (free_energy_f(0.2, 1.0, method).unwrap() - (0.6f64.sqrt() - 1.0)).abs() < 1e-10
            );
            assert!(free_energy_f(0.5, 1.0, method).is_err());
            assert!(free_energy_f(0.7, 1.0, method).is_err());
        }
        // mpmath reference for ∫ log(1 + 2/(1+π²y²)) dy
        assert!(
            (free_energy_f(-1.0, 1.0, FMethod::Quadrature).unwrap() - 0.732_050_807_568_877_3)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn cramer_examples() {
        let m = m4();
        let l = cramer(&m, 0.1);
        assert!((l.value - 0.177_956_518_973_629_4).abs() < 1e-14);
        assert!((l.value - (SQRT_2 / 2.0 - 0.28f64.sqrt())).abs() < 1e-14);
        assert_eq!(cramer(&m, 0.0).value, 0.0);
        assert!(cramer(&m, -1.0).value.abs() < 1e-15);
        assert!(cramer(&m, 0.25).is_infinite());
        assert!(cramer(&m, -1.25).is_infinite());
        let q = cramer_quadrature(&m, 0.1).unwrap();
        assert!((q.value - l.value).abs() < 1e-10);
        assert!(cramer_quadrature(&m, 0.3).unwrap().is_infinite());
    }

    #[test]
    fn cramer_prime_examples() {
        for th in [FRAC_PI_6, FRAC_PI_4, -FRAC_PI_3] {
            let m = Model::new(th).unwrap();
            assert!((cramer_prime(&m, 0.0).unwrap() - m.ep()).abs() < 1e-14);
            assert_eq!(cramer_prime(&m, -0.5).unwrap(), 0.0);
        }
        let m = m4();
        let hi = m.derived_constants().lambda_hi;
        assert!(cramer_prime(&m, hi - 1e-7).unwrap() > 1e3);
        assert!(cramer_prime(&m, hi).is_err());
        assert!(cramer_prime(&m, 0.25).is_err());
    }

    #[test]
    fn cramer_prime_matches_finite_difference() {
        let m = Model::new(0.9).unwrap();
        for lambda in [-1.1, -0.7, 0.0, 0.05] {
            let h = 1e-6;
            let fd = (cramer(&m, lambda + h).value - cramer(&m, lambda - h).value) / (2.0 * h);
            assert!(
                (fd - cramer_prime(&m, lambda).unwrap()).abs() < 1e-6,
                "{lambda}"
            );
        }
    }

    #[test]
    fn rate_examples() {
        let m = m4();
        let p = rate_paper(&m, SQRT_2);
        assert!(p.value.abs() < 1e-10, "{}", p.value);
        let p0 = rate_paper(&m, 0.0);
        assert!((p0.value - 0.292_893_218_813_452_5).abs() < 1e-10);
        let pn = rate_paper(&m, -SQRT_2);
        assert!((pn.value - SQRT_2).abs() < 1e-10);

        let l = rate_legendre(&m, m.ep()).unwrap();
        assert!(l.value.abs() < 1e-12);
        assert!(l.argmax_lambda.unwrap().abs() < 1e-12);
        assert!(l.ell0.unwrap().abs() < 1e-12);
        let l0 = rate_legendre(&m, 0.0).unwrap();
        assert!((l0.value - p0.value).abs() < 1e-6);
        assert!((l0.argmax_lambda.unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rate_paper_continuous_across_ep() {
        let m = m4();
        let ep = m.ep();
        let a = rate_paper(&m, ep - 1e-7).value;
        let b = rate_paper(&m, ep).value;
        let c = rate_paper(&m, ep + 1e-7).value;
        assert!((a - b).abs() < 1e-12 && (c - b).abs() < 1e-12);
    }

    #[test]
    fn optimal_ell_matches_legendre_argmax() {
        for th in [FRAC_PI_6, FRAC_PI_4, 1.2, -0.4] {
            let m = Model::new(th).unwrap();
            for i in -30..=30 {
                let x = 0.1 * i as f64;
                let l = rate_legendre(&m, x).unwrap();
                assert!(
                    (l.ell0.unwrap() - optimal_ell(&m, x)).abs() < 1e-9,
                    "θ={th} x={x}"
                );
            }
        }
    }

    #[test]
    fn finite_t_basics() {
        let m = m4();
        for t in [1.0, 25.0] {
            assert_eq!(lambda_finite_t(&m, 0.0, t, 10).unwrap().value, 0.0);
        }
        for t in [25.0, 50.0, 100.0, 200.0] {
            assert!(lambda_finite_t(&m, 0.25, t, 10).unwrap().is_infinite());
        }
        assert!(lambda_finite_t(&m, 0.1, 10.0, 0).is_err());
    }

    #[test]
    fn finite_t_against_independent_reference() {
        // scipy brentq roots, 4e5 terms plus an integral tail
        let m = m4();
        let cases = [
            (0.1, 25.0, 0.177_118_972_184_612_6),
            (0.1, 200.0, 0.177_851_825_624_968_85),
            (0.05, 20.0, 0.078_442_986_415_490_04),
        ];
        for (lambda, t, want) in cases {
            let got = lambda_finite_t(&m, lambda, t, 64).unwrap().value;
            assert!(
                (got - want).abs() < 1e-10,
                "λ={lambda} T={t}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn negative_theta_gives_same_functions() {
        let p = Model::new(0.8).unwrap();
        let n = Model::new(-0.8).unwrap();
        for lambda in [-1.2, -0.3, 0.1] {
            assert_eq!(cramer(&p, lambda).value, cramer(&n, lambda).value);
        }
        for x in [-2.0, 0.0, 0.7, 2.5] {
            assert!((rate_paper(&p, x).value - rate_paper(&n, x).value).abs() < 1e-14);
            assert!(
                (rate_legendre(&p, x).unwrap().value - rate_legendre(&n, x).unwrap().value).abs()
                    < 1e-12
            );
        }
        let a = lambda_finite_t(&p, 0.05, 10.0, 32).unwrap().value;
        let b = lambda_finite_t(&n, 0.05, 10.0, 32).unwrap().value;
        assert!((a - b).abs() < 1e-14);
    }
}
