//! Mhaskar-Rakhmanov-Saff numbers, endpoint localization and restricted
//! range checks.
//!
//! Both integral equations have a `1/sqrt(a^2 - t^2)` endpoint singularity;
//! substituting `t = a sin(theta)` removes it exactly, leaving a smooth
//! integrand on `[0, pi/2]` for a 128-point Gauss-Legendre rule.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::weights::{check_field_admissibility, ExternalField, FieldSpec, WeightSpec};

pub const QUADRATURE_POINTS: usize = 128;
const BRACKET_MIN: f64 = 1e-12;
const BRACKET_MAX: f64 = 1e12;
/// Maximum accepted `|LHS - target|` for numeric solves.
pub const RESIDUAL_TOL: f64 = 1e-10;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(QUADRATURE_POINTS).expect("valid degree"))
}

/// `int_0^{pi/2} g(theta) dtheta`.
fn integrate_half_period<G: FnMut(f64) -> f64>(g: G) -> f64 {
    rule().integrate(0.0, FRAC_PI_2, g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrsResult {
    pub a_n: f64,
    pub method: Method,
    /// `|LHS(a_n) - n|`; absent for closed forms.
    pub residual: Option<f64>,
}

/// `gamma_lambda = sqrt(pi) Gamma(lambda/2) / (2 Gamma((lambda+1)/2))`.
pub fn freud_gamma(lambda: f64) -> f64 {
    // Gamma(p)/Gamma(p+1/2) obeys r(p+1) = r(p) p/(p+1/2); reducing p keeps
    // integer and half-integer exponents exact
    let mut p = lambda / 2.0;
    let mut scale = 1.0;
    if p < 200.0 {
        while p >= 1.5 {
            p -= 1.0;
            scale *= p / (p + 0.5);
        }
    }
    let base = if p == 1.0 {
        1.0
    } else if p == 0.5 {
        PI / 2.0
    } else {
        PI.sqrt() * (ln_gamma(p) - ln_gamma(p + 0.5)).exp() / 2.0
    };
    base * scale
}

/// Closed-form MRS number of the Freud weight `exp(-|x|^lambda)`:
/// `a_n = (n gamma_lambda)^(1/lambda)`.
pub fn freud_mrs(lambda: f64, n: f64) -> Result<MrsResult> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "freud exponent must be >= 1, got {lambda}"
        )));
    }
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Config(format!("degree must be positive, got {n}")));
    }
    Ok(MrsResult {
        a_n: (n * freud_gamma(lambda)).powf(1.0 / lambda),
        method: Method::ClosedForm,
        residual: None,
    })
}

/// `(2/pi) int_0^1 a t Q'(a t) / sqrt(1 - t^2) dt`, as a function of `a`.
pub fn mrs_functional<F: ExternalField + ?Sized>(field: &F, a: f64) -> f64 {
    let s = integrate_half_period(|th| {
        let t = a * th.sin();
        t * field.derivative(t)
    });
    2.0 / PI * s
}

/// Solves the MRS equation for `c |x|^n` numerically.
pub fn mrs_numeric(field: &FieldSpec, n: f64) -> Result<MrsResult> {
    let report = check_field_admissibility(field);
    if !report.all_pass() || field.n <= 1.0 {
        return Err(Error::Config(format!(
            "field c={}, n={} is not admissible",
            field.c, field.n
        )));
    }
    mrs_numeric_for(field, n)
}

/// MRS solve for any field with `x Q'(x)` increasing; the caller vouches
/// for admissibility.
pub fn mrs_numeric_for<F: ExternalField + ?Sized>(field: &F, n: f64) -> Result<MrsResult> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Config(format!("degree must be positive, got {n}")));
    }
    let a = solve_increasing(|a| mrs_functional(field, a), n, "MRS equation")?;
    let residual = (mrs_functional(field, a) - n).abs();
    if residual > RESIDUAL_TOL * n.max(1.0) {
        return Err(Error::Solver(format!(
            "MRS solve stalled at a = {a} with residual {residual:e}"
        )));
    }
    Ok(MrsResult {
        a_n: a,
        method: Method::Numeric,
        residual: Some(residual),
    })
}

/// `int_0^a Phi'(t) / sqrt(a^2 - t^2) dt`.
pub fn endpoint_functional<F: ExternalField + ?Sized>(phi: &F, a: f64) -> f64 {
    integrate_half_period(|th| phi.derivative(a * th.sin()))
}

/// Solves `int_0^a Phi'(t)/sqrt(a^2 - t^2) dt = pi/2` for `a`.
pub fn endpoint_localization<F: ExternalField + ?Sized>(phi: &F) -> Result<f64> {
    let probes = [1e-6, 1.0, 1e6].map(|a| endpoint_functional(phi, a));
    if probes.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver(
            "endpoint integrand is not finite on the probes".into(),
        ));
    }
    let scale = probes
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if (probes[2] - probes[0]).abs() <= 1e-12 * scale {
        return Err(Error::Solver(format!(
            "degenerate field: the endpoint integral is independent of a (constant {:.6})",
            probes[1]
        )));
    }
    if !(probes[0] < probes[1] && probes[1] < probes[2]) {
        return Err(Error::Solver(
            "endpoint integral is not increasing in a; Phi' must be positive and increasing".into(),
        ));
    }
    let a = solve_increasing(
        |a| endpoint_functional(phi, a),
        FRAC_PI_2,
        "endpoint equation",
    )?;
    let residual = (endpoint_functional(phi, a) - FRAC_PI_2).abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::Solver(format!(
            "endpoint solve stalled at a = {a} with residual {residual:e}"
        )));
    }
    Ok(a)
}

/// Root of an increasing `f(a) = target` on `[1e-12, 1e12]` by geometric
/// bracketing and bisection.
fn solve_increasing<G: Fn(f64) -> f64>(f: G, target: f64, what: &str) -> Result<f64> {
    let (mut lo, mut hi) = (1.0, 1.0);
    if f(1.0) < target {
        while f(hi) < target {
            lo = hi;
            hi *= 2.0;
            if hi > BRACKET_MAX {
                return Err(Error::Solver(format!("{what}: no bracket below a = 1e12")));
            }
        }
    } else {
        while f(lo) > target {
            hi = lo;
            lo /= 2.0;
            if lo < BRACKET_MIN {
                return Err(Error::Solver(format!("{what}: no bracket above a = 1e-12")));
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = ((f(lo) - target).abs(), (f(hi) - target).abs());
    Ok(if rl <= rh { lo } else { hi })
}

/// Comparison of `|p w|` inside and outside `[-a, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictedRangeReport {
    pub sup_inside: f64,
    pub argmax_inside: f64,
    pub sup_outside: f64,
    /// `max(|p w|(-10a), |p w|(10a)) / sup_inside`, the size of what the
    /// finite outer window leaves out.
    pub tail_ratio: f64,
    pub holds: bool,
}

pub const INSIDE_POINTS: usize = 4096;
pub const OUTSIDE_POINTS: usize = 4096;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Samples `|p w|` on `[-a, a]` and on `[-10a, -a] U [a, 10a]` and checks
/// that the outside never exceeds the inside (up to `1e-9` relative).
/// `poly_coeffs` are monomial coefficients in ascending order.
pub fn restricted_range_check(
    poly_coeffs: &[f64],
    weight: &WeightSpec,
    a: f64,
) -> RestrictedRangeReport {
    let pw = |x: f64| (horner(poly_coeffs, x) * weight.eval(x)).abs();
    let mut sup_inside = 0.0;
    let mut argmax_inside = 0.0;
    // the even grid misses the origin, so it is probed separately
    let grid = (0..INSIDE_POINTS).map(|i| -a + 2.0 * a * i as f64 / (INSIDE_POINTS - 1) as f64);
    for x in std::iter::once(0.0).chain(grid) {
        let v = pw(x);
        if v > sup_inside {
            sup_inside = v;
            argmax_inside = x;
        }
    }
    let half = OUTSIDE_POINTS / 2;
    let mut sup_outside: f64 = 0.0;
    for i in 0..half {
        let d = a + 9.0 * a * i as f64 / (half - 1) as f64;
        sup_outside = sup_outside.max(pw(d)).max(pw(-d));
    }
    let tail = pw(10.0 * a).max(pw(-10.0 * a));
    RestrictedRangeReport {
        sup_inside,
        argmax_inside,
        sup_outside,
        tail_ratio: if sup_inside > 0.0 {
            tail / sup_inside
        } else {
            0.0
        },
        holds: sup_outside <= sup_inside * (1.0 + 1e-9),
    }
}
