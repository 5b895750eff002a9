//! Airy function of the second kind, `Bi(x)`.
//!
//! On `[-8, 10]` the Maclaurin series `Bi = c1 f(x) + c2 g(x)` is summed in
//! double-double arithmetic; plain doubles lose roughly `|x|^1.5` digits to
//! cancellation on the negative axis. Below `-8` the oscillatory asymptotic
//! expansion is used, with its phase reduced in double-double so that values
//! near the zeros keep their relative accuracy.

use std::f64::consts::PI;

use crate::dd::DoubleDouble as Dd;
use crate::error::{Error, Result};

/// Supported argument window.
pub const BI_MIN: f64 = -30.0;
pub const BI_MAX: f64 = 10.0;
/// Below this point the asymptotic expansion takes over.
pub const HANDOVER: f64 = -8.0;

/// `Bi(0) = 1 / (3^(1/6) Gamma(2/3))`.
const C1: Dd = Dd::new(0.614_926_627_446_000_7, 5.089_920_779_489_141_6e-17);
/// `Bi'(0) = 3^(1/6) / Gamma(1/3)`.
const C2: Dd = Dd::new(0.448_288_357_353_826_4, -2.536_323_777_441_730_5e-17);
/// `Bi(0)`.
pub const BI_AT_ZERO: f64 = C1.hi;
/// `Bi'(0)`.
pub const BI_PRIME_AT_ZERO: f64 = C2.hi;

const HALF_PI: Dd = Dd::new(std::f64::consts::FRAC_PI_2, 6.123_233_995_736_766e-17);
const QUARTER_PI: Dd = Dd::new(std::f64::consts::FRAC_PI_4, 3.061_616_997_868_383e-17);

/// `Bi(x)` on `[-30, 10]`.
pub fn airy_bi(x: f64) -> Result<f64> {
    if !(BI_MIN..=BI_MAX).contains(&x) {
        return Err(Error::Domain(format!(
            "airy_bi supports x in [{BI_MIN}, {BI_MAX}], got {x}"
        )));
    }
    Ok(if x < HANDOVER {
        airy_bi_asymptotic(x)
    } else {
        airy_bi_series(x)
    })
}

/// Maclaurin evaluation in double-double. Accurate for `x` in about
/// `[-12, 10]`; beyond that the cancellation outgrows double-double.
pub fn airy_bi_series(x: f64) -> f64 {
    if x == 0.0 {
        return C1.to_f64();
    }
    let xd = Dd::from_f64(x);
    let z3 = xd * xd * xd;
    // f = sum a_k x^{3k}, a_{k+1} = a_k / ((3k+2)(3k+3))
    // g = sum b_k x^{3k+1}, b_{k+1} = b_k / ((3k+3)(3k+4))
    let mut tf = Dd::from_f64(1.0);
    let mut tg = xd;
    let mut f = tf;
    let mut g = tg;
    let mut k = 0.0f64;
    loop {
        tf = (tf * z3).div_f64((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg = (tg * z3).div_f64((3.0 * k + 3.0) * (3.0 * k + 4.0));
        f = f + tf;
        g = g + tg;
        k += 1.0;
        let scale = f.abs_hi().max(g.abs_hi()).max(1.0);
        if tf.abs_hi().max(tg.abs_hi()) < 1e-34 * scale && k > 2.0 {
            break;
        }
        if k > 400.0 {
            break;
        }
    }
    (C1 * f + C2 * g).to_f64()
}

/// Oscillatory asymptotic expansion for `x < 0`:
/// `Bi(-z) ~ (pi^-1/2) z^-1/4 [cos(phi) Q(zeta) - sin(phi) P(zeta)]`
/// with `zeta = 2/3 z^{3/2}` and `phi = zeta - pi/4`. The series in `1/zeta`
/// are summed up to their smallest term. Meaningful only for `x` well below
/// zero (it is used below -8).
pub fn airy_bi_asymptotic(x: f64) -> f64 {
    let z = -x;
    let zeta_dd = (Dd::sqrt_f64(z).mul_f64(z)).mul_f64(2.0).div_f64(3.0);
    let zeta = zeta_dd.to_f64();
    let (p, q) = asymptotic_pq(zeta);
    let phase = zeta_dd - QUARTER_PI;
    let (s, c) = sin_cos_reduced(phase);
    let amp = 1.0 / (PI.sqrt() * z.powf(0.25));
    amp * (c * q - s * p)
}

// P = sum (-1)^k u_{2k} zeta^{-2k}, Q = sum (-1)^k u_{2k+1} zeta^{-2k-1},
// u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / ((2k-1) 216 k)
fn asymptotic_pq(zeta: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0; // u_k / zeta^k
    let mut last = f64::INFINITY;
    for k in 0..200usize {
        if k > 0 {
            let kf = k as f64;
            term *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf)
                / zeta;
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

// sin and cos of a double-double angle, reduced modulo pi/2 in double-double
fn sin_cos_reduced(theta: Dd) -> (f64, f64) {
    let k = (theta.to_f64() / HALF_PI.hi).round();
    let r = theta - HALF_PI.mul_f64(k);
    let (sh, ch) = r.hi.sin_cos();
    let s = sh + ch * r.lo;
    let c = ch - sh * r.lo;
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn value_at_origin_matches_closed_form() {
        let g23 = statrs::function::gamma::gamma(2.0 / 3.0);
        let closed = 1.0 / (3f64.powf(1.0 / 6.0) * g23);
        assert_relative_eq!(airy_bi(0.0).unwrap(), closed, max_relative = 1e-12);
    }

    #[test]
    fn outside_window_is_domain_error() {
        assert!(matches!(airy_bi(-30.5), Err(Error::Domain(_))));
        assert!(matches!(airy_bi(10.01), Err(Error::Domain(_))));
    }

    #[test]
    fn series_and_asymptotic_agree_near_handover() {
        // relative to the oscillation envelope, which is what stays meaningful near zeros
        let mut x: f64 = -9.0;
        while x <= -6.5 {
            let env = 1.0 / (PI.sqrt() * (-x).powf(0.25));
            let a = airy_bi_series(x);
            let b = airy_bi_asymptotic(x);
            assert!((a - b).abs() < 1e-8 * env, "x={x}: {a} vs {b}");
            x += 0.01;
        }
    }

    #[test]
    fn increasing_on_positive_axis() {
        let mut prev = airy_bi(1.0).unwrap();
        for i in 1..=90 {
            let v = airy_bi(1.0 + 0.1 * i as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn ode_residual_at_one() {
        let h = 1e-3;
        let y = |x: f64| airy_bi(x).unwrap();
        let d2 = (-y(1.0 + 2.0 * h) + 16.0 * y(1.0 + h) - 30.0 * y(1.0) + 16.0 * y(1.0 - h)
            - y(1.0 - 2.0 * h))
            / (12.0 * h * h);
        assert!((d2 - y(1.0)).abs() < 1e-5);
    }
}
