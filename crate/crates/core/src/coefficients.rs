//! Spearman's rho, Kendall's tau, the upper tail coefficient and Blomqvist's
//! beta of extreme value copulas.
//!
//! For a dependence function `A`:
//!
//! * `rho = 12 * int_0^1 dt / (A(t) + 1)^2 - 3`
//! * `tau = int_0^1 t (1 - t) dA'(t) / A(t)`
//! * `lambda = 2 (1 - A(1/2))`
//! * `beta = 4 C(1/2, 1/2) - 1 = 2^lambda - 1`
//!
//! The Stieltjes integral for `tau` is split into atoms at the kinks of `A`
//! plus an absolutely continuous part over the smooth panels between them.

use std::fmt;

use crate::copula::EvCopula;
use crate::error::{check_range, Error, Result};
use crate::numerics::{integrate, QuadratureSpec};
use crate::pickands::{DependenceFunction, Family};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub value: f64,
    pub method: Method,
}

impl Coefficient {
    fn closed(value: f64) -> Self {
        Self {
            value,
            method: Method::ClosedForm,
        }
    }

    fn quadrature(value: f64) -> Self {
        Self {
            value,
            method: Method::Quadrature,
        }
    }
}

/// The four dependence coefficients of one copula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub rho: Coefficient,
    pub tau: Coefficient,
    pub lambda: Coefficient,
    pub beta: Coefficient,
}

fn quadrature_spec(dep: &DependenceFunction) -> Result<QuadratureSpec> {
    QuadratureSpec::default().with_split_points(dep.kink_points())
}

/// Spearman's rho by quadrature, with panels split at the kinks of `A`.
pub fn rho_numeric(dep: &DependenceFunction) -> Result<f64> {
    let spec = quadrature_spec(dep)?;
    let i = integrate(
        |t| {
            let a1 = dep.eval(t) + 1.0;
            1.0 / (a1 * a1)
        },
        &spec,
    )?;
    Ok(12.0 * i - 3.0)
}

/// Kendall's tau: atoms `t (1 - t) [A'] / A(t)` at each kink plus quadrature of
/// `t (1 - t) A''(t) / A(t)` on the smooth panels.
pub fn tau_numeric(dep: &DependenceFunction) -> Result<f64> {
    let atoms: f64 = dep
        .kinks()
        .iter()
        .map(|k| k.t * (1.0 - k.t) * k.jump() / dep.eval(k.t))
        .sum();
    if dep.is_piecewise_linear() {
        return Ok(atoms);
    }
    let spec = quadrature_spec(dep)?;
    let smooth = integrate(
        |t| {
            let a2 = dep.second_deriv(t).unwrap_or_else(|| {
                let h = 1e-5;
                (dep.deriv_right(t + h) - dep.deriv_left(t - h)) / (2.0 * h)
            });
            t * (1.0 - t) * a2 / dep.eval(t)
        },
        &spec,
    )?;
    Ok(atoms + smooth)
}

/// Upper tail dependence coefficient `2 (1 - A(1/2))`.
pub fn lambda_from_a(dep: &DependenceFunction) -> f64 {
    (2.0 * (1.0 - dep.eval(0.5))).clamp(0.0, 1.0)
}

/// Blomqvist's beta `4 C(1/2, 1/2) - 1`.
pub fn blomqvist(c: &EvCopula) -> f64 {
    4.0 * c.eval(0.5, 0.5) - 1.0
}

/// Closed-form coefficients of the Marshall-Olkin copula. Both formulas for
/// rho and tau are `0/0` when `alpha = beta = 0`; the continuous extension 0
/// is returned there.
pub fn mo_closed_form(alpha: f64, beta: f64) -> Result<CoefficientSet> {
    check_range("alpha", alpha, 0.0, 1.0, "0 <= alpha <= 1")?;
    check_range("beta", beta, 0.0, 1.0, "0 <= beta <= 1")?;
    let ab = alpha * beta;
    let (rho, tau) = if ab == 0.0 {
        (0.0, 0.0)
    } else {
        (
            3.0 * ab / (2.0 * alpha - ab + 2.0 * beta),
            ab / (alpha - ab + beta),
        )
    };
    let lambda = alpha.min(beta);
    Ok(CoefficientSet {
        rho: Coefficient::closed(rho),
        tau: Coefficient::closed(tau),
        lambda: Coefficient::closed(lambda),
        beta: Coefficient::closed(2f64.powf(lambda) - 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelCoefficients {
    pub tau: f64,
    pub lambda: f64,
}

/// `tau = 1 - 1/theta`, `lambda = 2 - 2^(1/theta)`.
pub fn gumbel_closed_form(theta: f64) -> Result<GumbelCoefficients> {
    check_range("theta", theta, 1.0, f64::MAX, "finite theta >= 1")?;
    Ok(GumbelCoefficients {
        tau: 1.0 - 1.0 / theta,
        lambda: 2.0 - 2f64.powf(1.0 / theta),
    })
}

/// Gumbel tau expressed through the tail coefficient: `1 - log2(2 - lambda)`.
pub fn gumbel_tau_from_lambda(lambda: f64) -> Result<f64> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    Ok(1.0 - (2.0 - lambda).log2())
}

/// Gumbel parameter with tail coefficient `lambda`: `1 / log2(2 - lambda)`.
/// `lambda = 1` maps to `f64::INFINITY`.
pub fn gumbel_theta_from_lambda(lambda: f64) -> Result<f64> {
    check_range("lambda", lambda, 0.0, 1.0, "0 <= lambda <= 1")?;
    if lambda == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (2.0 - lambda).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoCoefficients {
    pub rho: f64,
    pub tau: f64,
}

/// Coefficients of `min(u, v, u^(1-a) v^(1-b))`:
/// `rho = 1 - 16 (1 - lambda)^2 / ((4 - lambda)^2 - 9 (a - b)^2)`, `tau = lambda`
/// with `lambda = a + b`.
pub fn pareto_closed_form(a: f64, b: f64) -> Result<ParetoCoefficients> {
    check_range("a", a, 0.0, 1.0, "a >= 0 and a + b <= 1")?;
    check_range("b", b, 0.0, 1.0, "b >= 0 and a + b <= 1")?;
    let lambda = a + b;
    if lambda > 1.0 + 1e-12 {
        return Err(Error::ParamOutOfRange {
            name: "a + b",
            value: lambda,
            expected: "a + b <= 1",
        });
    }
    let nu = a - b;
    let denom = (4.0 - lambda).powi(2) - 9.0 * nu * nu;
    Ok(ParetoCoefficients {
        rho: 1.0 - 16.0 * (1.0 - lambda).powi(2) / denom,
        tau: lambda,
    })
}

/// All four coefficients, using closed forms where the family has them and
/// quadrature otherwise.
pub fn coefficient_set(dep: &DependenceFunction) -> Result<CoefficientSet> {
    match *dep.family() {
        Family::MarshallOlkin { alpha, beta } => mo_closed_form(alpha, beta),
        Family::Gumbel { theta } => {
            let g = gumbel_closed_form(theta)?;
            Ok(CoefficientSet {
                rho: Coefficient::quadrature(rho_numeric(dep)?),
                tau: Coefficient::closed(g.tau),
                lambda: Coefficient::closed(g.lambda),
                beta: Coefficient::closed(2f64.powf(g.lambda) - 1.0),
            })
        }
        Family::Pareto { a, b } => {
            let p = pareto_closed_form(a, b)?;
            let lambda = (a + b).min(1.0);
            Ok(CoefficientSet {
                rho: Coefficient::closed(p.rho),
                tau: Coefficient::closed(p.tau),
                lambda: Coefficient::closed(lambda),
                beta: Coefficient::closed(2f64.powf(lambda) - 1.0),
            })
        }
        Family::PiecewiseLinear { .. } | Family::Mixture { .. } => {
            let tau = tau_numeric(dep)?;
            let tau = if dep.is_piecewise_linear() {
                Coefficient::closed(tau)
            } else {
                Coefficient::quadrature(tau)
            };
            Ok(CoefficientSet {
                rho: Coefficient::quadrature(rho_numeric(dep)?),
                tau,
                lambda: Coefficient::closed(lambda_from_a(dep)),
                beta: Coefficient::closed(blomqvist(&EvCopula::new(dep.clone()))),
            })
        }
    }
}
