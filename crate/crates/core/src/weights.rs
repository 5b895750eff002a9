//! Weight functions `w(x)` and the external fields `Q` with `w = exp(-Q)`.
//!
//! One-sided kinds equal 1 on `x < 0` and decay on `x >= 0`; the ramp at the
//! origin is folded into the piecewise formula. Every kind takes values in
//! `(0, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two-parameter external field `Q(x) = c |x|^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub c: f64,
    pub n: f64,
}

impl FieldSpec {
    /// Builds a field of the optimizable family, requiring `c > 0` and `n > 1`.
    pub fn new(c: f64, n: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!(
                "field coefficient c must be positive, got {c}"
            )));
        }
        if !(n > 1.0 && n.is_finite()) {
            return Err(Error::Config(format!(
                "field exponent n must exceed 1, got {n}"
            )));
        }
        Ok(Self { c, n })
    }

    /// The Gaussian field `x^2`.
    pub const GAUSSIAN: FieldSpec = FieldSpec { c: 1.0, n: 2.0 };
}

/// An even external field on the positive half-line, only `x > 0` is queried.
pub trait ExternalField {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

impl ExternalField for FieldSpec {
    fn value(&self, x: f64) -> f64 {
        self.c * x.abs().powf(self.n)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.c * self.n * x.abs().powf(self.n - 1.0) * x.signum()
    }
}

/// `Phi(t) = coef * t^exponent` without the `n > 1` restriction of
/// [`FieldSpec`]; used for endpoint localization where `Phi(t) = t` is a
/// legitimate (degenerate) probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerField {
    pub coef: f64,
    pub exponent: f64,
}

impl ExternalField for PowerField {
    fn value(&self, x: f64) -> f64 {
        self.coef * x.abs().powf(self.exponent)
    }

    fn derivative(&self, x: f64) -> f64 {
        if self.exponent == 1.0 {
            return self.coef * x.signum();
        }
        self.coef * self.exponent * x.abs().powf(self.exponent - 1.0) * x.signum()
    }
}

impl FromStr for PowerField {
    type Err = Error;

    /// Accepts `t^<lambda>`, `pow:<coef>:<lambda>` and `field:<c>:<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(e) = s.strip_prefix("t^") {
            let exponent = parse_f64(e)?;
            return Ok(Self {
                coef: 1.0,
                exponent,
            });
        }
        if s == "t" {
            return Ok(Self {
                coef: 1.0,
                exponent: 1.0,
            });
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["pow" | "field", c, n] => Ok(Self {
                coef: parse_f64(c)?,
                exponent: parse_f64(n)?,
            }),
            _ => Err(Error::Parse(format!("unrecognised field `{s}`"))),
        }
    }
}

/// A weight function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSpec {
    /// `1` for `x < 0`, `exp(-x^2)` for `x >= 0`.
    GaussRight,
    /// `1` for `x < 0`, `1/(x+1)` for `x >= 0`.
    RecipRight,
    /// Symmetric Freud weight `exp(-|x|^lambda)`.
    Freud(f64),
    /// Symmetric `exp(-c|x|^n)`.
    Field(FieldSpec),
    /// One-sided `exp(-c x^n)` acting on `x >= 0` only.
    FieldRight(FieldSpec),
    Constant,
}

/// Which branch of a one-sided weight to use at the interface `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    Left,
    Right,
}

impl WeightSpec {
    pub fn is_one_sided(&self) -> bool {
        matches!(
            self,
            Self::GaussRight | Self::RecipRight | Self::FieldRight(_)
        )
    }

    /// `log w(x)`, i.e. `-Q(x)`; zero on the flat side of one-sided kinds.
    pub fn log_eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant => 0.0,
            Self::GaussRight if x >= 0.0 => -x * x,
            Self::RecipRight if x >= 0.0 => -x.ln_1p(),
            Self::FieldRight(f) if x >= 0.0 => -f.c * x.powf(f.n),
            Self::GaussRight | Self::RecipRight | Self::FieldRight(_) => 0.0,
            Self::Freud(lambda) => -x.abs().powf(lambda),
            Self::Field(f) => -f.c * x.abs().powf(f.n),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant => 1.0,
            Self::RecipRight if x >= 0.0 => 1.0 / (x + 1.0),
            _ => self.log_eval(x).exp(),
        }
    }

    /// `w(x)^gamma`, computed as `exp(gamma * log w(x))` so the result is 0
    /// only when the true value is below the double range.
    pub fn eval_pow(&self, gamma: f64, x: f64) -> f64 {
        if gamma == 0.0 {
            return 1.0;
        }
        if gamma == 1.0 {
            return self.eval(x);
        }
        (gamma * self.log_eval(x)).exp()
    }

    /// Closed-form derivative of order 0, 1 or 2. At `x = 0` the `side`
    /// picks the branch; elsewhere it is ignored.
    pub fn derivative(&self, x: f64, order: u8, side: Side) -> Result<f64> {
        if order > 2 {
            return Err(Error::Unsupported(format!(
                "weight derivative of order {order}"
            )));
        }
        let right = x > 0.0 || (x == 0.0 && side == Side::Right);
        let flat = self.is_one_sided() && !right;
        if flat || matches!(self, Self::Constant) {
            return Ok(if order == 0 { 1.0 } else { 0.0 });
        }
        let v = match (*self, order) {
            (Self::GaussRight, 0) => (-x * x).exp(),
            (Self::GaussRight, 1) => -2.0 * x * (-x * x).exp(),
            (Self::GaussRight, _) => (4.0 * x * x - 2.0) * (-x * x).exp(),
            (Self::RecipRight, 0) => 1.0 / (1.0 + x),
            (Self::RecipRight, 1) => -1.0 / (1.0 + x).powi(2),
            (Self::RecipRight, _) => 2.0 / (1.0 + x).powi(3),
            (Self::Freud(lambda), o) => power_field_weight_derivative(1.0, lambda, x, o),
            (Self::Field(f) | Self::FieldRight(f), o) => {
                power_field_weight_derivative(f.c, f.n, x, o)
            }
            (Self::Constant, _) => unreachable!(),
        };
        Ok(v)
    }

    /// Short CLI name, e.g. `gauss-right` or `freud:2`.
    pub fn name(&self) -> String {
        match self {
            Self::GaussRight => "gauss-right".into(),
            Self::RecipRight => "recip-right".into(),
            Self::Freud(l) => format!("freud:{l}"),
            Self::Field(f) => format!("field:{}:{}", f.c, f.n),
            Self::FieldRight(f) => format!("field-right:{}:{}", f.c, f.n),
            Self::Constant => "const".into(),
        }
    }
}

// derivatives of exp(-c|x|^n)
fn power_field_weight_derivative(c: f64, n: f64, x: f64, order: u8) -> f64 {
    let ax = x.abs();
    let w = (-c * ax.powf(n)).exp();
    match order {
        0 => w,
        1 => {
            if ax == 0.0 {
                return if n > 1.0 { 0.0 } else { -c * x.signum() };
            }
            -c * n * ax.powf(n - 1.0) * x.signum() * w
        }
        _ => {
            if ax == 0.0 {
                return match n {
                    n if n > 2.0 => 0.0,
                    2.0 => -2.0 * c,
                    _ => f64::NEG_INFINITY,
                };
            }
            (c * c * n * n * ax.powf(2.0 * n - 2.0) - c * n * (n - 1.0) * ax.powf(n - 2.0)) * w
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<WeightSpec> for String {
    fn from(w: WeightSpec) -> String {
        w.name()
    }
}

impl TryFrom<String> for WeightSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["gauss-right"] => Ok(Self::GaussRight),
            ["recip-right"] => Ok(Self::RecipRight),
            ["const"] => Ok(Self::Constant),
            ["freud", l] => {
                let lambda = parse_f64(l)?;
                if !(lambda >= 1.0 && lambda.is_finite()) {
                    return Err(Error::Config(format!(
                        "freud exponent must be >= 1, got {lambda}"
                    )));
                }
                Ok(Self::Freud(lambda))
            }
            ["field", c, n] => Ok(Self::Field(FieldSpec::new(parse_f64(c)?, parse_f64(n)?)?)),
            ["field-right", c, n] => Ok(Self::FieldRight(FieldSpec::new(
                parse_f64(c)?,
                parse_f64(n)?,
            )?)),
            _ => Err(Error::Parse(format!("unrecognised weight `{s}`"))),
        }
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("expected a number, got `{s}`")))
}

/// Outcome of checking conditions (a)-(c) for an external field:
/// (a) `Q' > 0` on `(0, inf)`, (b) `x Q'(x)` strictly increasing with limit 0
/// at `0+`, (c) `x Q'(x) / Q(x)` asymptotically constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub condition_a: bool,
    pub condition_b: bool,
    pub condition_c: bool,
    /// The limiting value of `x Q'(x) / Q(x)`.
    pub ratio_limit: f64,
}

impl AdmissibilityReport {
    pub fn all_pass(&self) -> bool {
        self.condition_a && self.condition_b && self.condition_c
    }
}

/// Analytic admissibility of `c |x|^n`: `Q' = cn x^(n-1)`, `xQ' = cn x^n`,
/// and the ratio is identically `n`.
pub fn check_field_admissibility(field: &FieldSpec) -> AdmissibilityReport {
    let positive = field.c > 0.0 && field.n > 0.0 && field.c.is_finite() && field.n.is_finite();
    AdmissibilityReport {
        condition_a: positive,
        condition_b: positive,
        condition_c: positive,
        ratio_limit: field.n,
    }
}

/// Number of probes on the log-spaced grid `[1e-6, 1e6]`.
pub const ADMISSIBILITY_PROBES: usize = 241;

/// Sampled admissibility check for a general field, on a log-spaced probe
/// grid over `[1e-6, 1e6]`. The limit `xQ'(x) -> 0` is deemed to hold when
/// the first probe is at most `1e-3` of `xQ'(1)`; condition (c) holds when
/// the ratio at the last two decades differs by less than `1e-3` relative.
pub fn check_admissibility_sampled<F: ExternalField + ?Sized>(
    field: &F,
) -> Result<AdmissibilityReport> {
    let probes: Vec<f64> = (0..ADMISSIBILITY_PROBES)
        .map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / (ADMISSIBILITY_PROBES - 1) as f64))
        .collect();
    let mut xq = Vec::with_capacity(probes.len());
    let mut ratios = Vec::with_capacity(probes.len());
    let mut cond_a = true;
    for &x in &probes {
        let q = field.value(x);
        let dq = field.derivative(x);
        if !q.is_finite() || !dq.is_finite() {
            return Err(Error::Domain(format!(
                "field not evaluable at probe x = {x:e}"
            )));
        }
        cond_a &= dq > 0.0;
        xq.push(x * dq);
        ratios.push(x * dq / q);
    }
    let increasing = xq.windows(2).all(|p| p[1] > p[0]);
    let at_one = x_dq(field, 1.0);
    let vanishes = xq[0] <= 1e-3 * at_one.abs().max(f64::MIN_POSITIVE);
    let k = probes.len();
    let decade = (k - 1) / 12;
    let (r_far, r_near) = (ratios[k - 1], ratios[k - 1 - decade]);
    let cond_c = r_far.is_finite()
        && r_near.is_finite()
        && r_far > 0.0
        && ((r_far - r_near) / r_far).abs() < 1e-3;
    Ok(AdmissibilityReport {
        condition_a: cond_a,
        condition_b: increasing && vanishes,
        condition_c: cond_c,
        ratio_limit: r_far,
    })
}

fn x_dq<F: ExternalField + ?Sized>(f: &F, x: f64) -> f64 {
    x * f.derivative(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct ConstField;
    impl ExternalField for ConstField {
        fn value(&self, _: f64) -> f64 {
            1.0
        }
        fn derivative(&self, _: f64) -> f64 {
            0.0
        }
    }

    #[test]
    fn one_sided_values() {
        assert_eq!(WeightSpec::GaussRight.eval(-3.0), 1.0);
        assert_relative_eq!(WeightSpec::GaussRight.eval(1.0), (-1.0f64).exp());
        assert_eq!(WeightSpec::RecipRight.eval(1.0), 0.5);
        assert_eq!(WeightSpec::GaussRight.eval(0.0), 1.0);
        assert_eq!(WeightSpec::Constant.eval(42.0), 1.0);
    }

    #[test]
    fn zeroth_power_is_one() {
        for w in [
            WeightSpec::GaussRight,
            WeightSpec::Freud(3.0),
            WeightSpec::RecipRight,
        ] {
            for x in [-5.0, 0.0, 2.5, 100.0] {
                assert_eq!(w.eval_pow(0.0, x), 1.0);
            }
        }
    }

    #[test]
    fn power_of_gaussian_weight() {
        for n in [1.0, 4.0, 16.0] {
            for x in [0.0, 0.3, 1.7] {
                assert_relative_eq!(
                    WeightSpec::GaussRight.eval_pow(n, x),
                    (-n * x * x).exp(),
                    max_relative = 1e-15
                );
            }
        }
    }

    #[test]
    fn log_space_avoids_intermediate_underflow() {
        let x = 750f64.sqrt();
        assert_eq!(WeightSpec::Freud(2.0).eval_pow(1.0, x), (-750f64).exp());
        // naive w^gamma underflows here, the log-space route does not
        let x = 1400f64.sqrt();
        assert_eq!(WeightSpec::Freud(2.0).eval(x).powf(0.5), 0.0);
        let v = WeightSpec::Freud(2.0).eval_pow(0.5, x);
        assert_relative_eq!(v, (-700f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn interface_derivatives() {
        let w = WeightSpec::GaussRight;
        assert_eq!(w.derivative(0.0, 1, Side::Left).unwrap(), 0.0);
        assert_eq!(w.derivative(0.0, 1, Side::Right).unwrap(), 0.0);
        assert_eq!(w.derivative(0.0, 2, Side::Right).unwrap(), -2.0);
        assert_eq!(w.derivative(0.0, 2, Side::Left).unwrap(), 0.0);
        assert_eq!(w.derivative(0.0, 2, Side::default()).unwrap(), 0.0);
        assert!(matches!(
            w.derivative(0.0, 3, Side::Left),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn continuity_at_interface() {
        for w in [WeightSpec::GaussRight, WeightSpec::RecipRight] {
            for eps in [1e-3, 1e-6, 1e-9] {
                let d = (w.eval(-eps) - w.eval(eps)).abs();
                let bound = if w == WeightSpec::GaussRight {
                    2.0 * eps * eps
                } else {
                    2.0 * eps
                };
                assert!(d <= bound, "{w} eps={eps} diff={d}");
            }
        }
    }

    #[test]
    fn first_derivative_fd_vanishes_at_zero() {
        let w = WeightSpec::GaussRight;
        let mut prev = f64::INFINITY;
        for h in [1e-1, 1e-2, 1e-3, 1e-4] {
            let fd = ((w.eval(h) - w.eval(-h)) / (2.0 * h)).abs();
            assert!(fd < prev);
            prev = fd;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn second_derivative_jump_from_right() {
        let w = WeightSpec::GaussRight;
        let h = 1e-4;
        // second-order accurate one-sided stencil
        let fd = (2.0 * w.eval(0.0) - 5.0 * w.eval(h) + 4.0 * w.eval(2.0 * h) - w.eval(3.0 * h))
            / (h * h);
        assert!((fd + 2.0).abs() < 1e-4, "fd = {fd}");
    }

    #[test]
    fn derivative_matches_finite_difference_away_from_zero() {
        for w in [
            WeightSpec::GaussRight,
            WeightSpec::RecipRight,
            WeightSpec::Freud(3.0),
            WeightSpec::Field(FieldSpec { c: 0.5, n: 1.5 }),
        ] {
            for x in [0.4, 1.3] {
                let h = 1e-5;
                let d1 = (w.eval(x + h) - w.eval(x - h)) / (2.0 * h);
                let d2 = (w.eval(x + h) - 2.0 * w.eval(x) + w.eval(x - h)) / (h * h);
                assert_relative_eq!(
                    w.derivative(x, 1, Side::Left).unwrap(),
                    d1,
                    max_relative = 1e-7
                );
                assert_relative_eq!(
                    w.derivative(x, 2, Side::Left).unwrap(),
                    d2,
                    max_relative = 1e-4
                );
            }
        }
    }

    #[test]
    fn analytic_admissibility() {
        let r = check_field_admissibility(&FieldSpec::new(1.0, 2.0).unwrap());
        assert!(r.all_pass());
        assert_eq!(r.ratio_limit, 2.0);
        let r = check_field_admissibility(&FieldSpec::new(3.0, 1.5).unwrap());
        assert!(r.all_pass());
        assert_eq!(r.ratio_limit, 1.5);
    }

    #[test]
    fn sampled_admissibility_matches_analytic() {
        let f = FieldSpec::new(3.0, 1.5).unwrap();
        let r = check_admissibility_sampled(&f).unwrap();
        assert!(r.all_pass());
        assert_relative_eq!(r.ratio_limit, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn sampled_ratio_equals_exponent_at_every_probe() {
        let f = FieldSpec::new(0.7, 2.3).unwrap();
        for i in 0..ADMISSIBILITY_PROBES {
            let x = 10f64.powf(-6.0 + 12.0 * i as f64 / (ADMISSIBILITY_PROBES - 1) as f64);
            assert_relative_eq!(x * f.derivative(x) / f.value(x), 2.3, max_relative = 1e-12);
        }
    }

    #[test]
    fn constant_field_fails_condition_a() {
        let r = check_admissibility_sampled(&ConstField).unwrap();
        assert!(!r.condition_a);
        assert!(!r.all_pass());
    }

    #[test]
    fn names_round_trip() {
        for s in [
            "gauss-right",
            "recip-right",
            "freud:2",
            "field:1:2",
            "field-right:0.5:1.5",
            "const",
        ] {
            let w: WeightSpec = s.parse().unwrap();
            assert_eq!(w.name(), s);
        }
        assert!("freud:0.5".parse::<WeightSpec>().is_err());
        assert!("field:1:1".parse::<WeightSpec>().is_err());
        assert!("nope".parse::<WeightSpec>().is_err());
    }

    #[test]
    fn power_field_parsing() {
        assert_eq!(
            "t^2".parse::<PowerField>().unwrap(),
            PowerField {
                coef: 1.0,
                exponent: 2.0
            }
        );
        assert_eq!(
            "t".parse::<PowerField>().unwrap(),
            PowerField {
                coef: 1.0,
                exponent: 1.0
            }
        );
        assert_eq!(
            "pow:2:4".parse::<PowerField>().unwrap(),
            PowerField {
                coef: 2.0,
                exponent: 4.0
            }
        );
    }
}
