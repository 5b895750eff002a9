//! Classical comparators: Chebyshev interpolants, Taylor polynomials, and
//! the Newton iteration whose iterates are deep polynomials approaching `|x|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::airy;
use crate::error::{Error, Result};
use crate::targets::TargetSpec;

/// Chebyshev expansion on `[a, b]`, evaluated through the affine map onto
/// `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebModel {
    pub interval: [f64; 2],
    pub coeffs: Vec<f64>,
}

impl ChebModel {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Degree plus one, comparable with the trainable count of a deep model.
    pub fn dof(&self) -> usize {
        self.coeffs.len()
    }

    fn to_unit(&self, x: f64) -> f64 {
        let [a, b] = self.interval;
        (2.0 * x - (a + b)) / (b - a)
    }

    pub fn is_extrapolating(&self, x: f64) -> bool {
        self.to_unit(x).abs() > 1.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        chebyshev_eval(self, x)
    }
}

/// The `d + 1` Chebyshev points of the second kind on `[a, b]`, in the order
/// `cos(pi j / d)`, `j = 0..=d`.
pub fn chebyshev_points(interval: [f64; 2], degree: usize) -> Vec<f64> {
    let [a, b] = interval;
    if degree == 0 {
        return vec![0.5 * (a + b)];
    }
    (0..=degree)
        .map(|j| {
            let t = (PI * j as f64 / degree as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}

/// Interpolates `target` at the Chebyshev extrema via the discrete cosine
/// relations.
pub fn chebyshev_fit(target: &TargetSpec, interval: [f64; 2], degree: usize) -> Result<ChebModel> {
    let values = chebyshev_points(interval, degree)
        .into_iter()
        .map(|x| target.eval(x))
        .collect::<Result<Vec<_>>>()?;
    chebyshev_from_values(interval, &values)
}

/// Chebyshev coefficients from samples at [`chebyshev_points`].
pub fn chebyshev_from_values(interval: [f64; 2], values: &[f64]) -> Result<ChebModel> {
    let [a, b] = interval;
    if !(a < b) {
        return Err(Error::Config(format!(
            "interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if values.is_empty() {
        return Err(Error::Config("need at least one sample".into()));
    }
    let d = values.len() - 1;
    if d == 0 {
        return Ok(ChebModel {
            interval,
            coeffs: vec![values[0]],
        });
    }
    let half = |j: usize| if j == 0 || j == d { 0.5 } else { 1.0 };
    let coeffs = (0..=d)
        .map(|k| {
            let s: f64 = values
                .iter()
                .enumerate()
                .map(|(j, &f)| half(j) * f * (PI * (j * k) as f64 / d as f64).cos())
                .sum();
            half(k) * 2.0 / d as f64 * s
        })
        .collect();
    Ok(ChebModel { interval, coeffs })
}

/// Clenshaw recurrence for `sum_k c_k T_k(t(x))`.
pub fn chebyshev_eval(model: &ChebModel, x: f64) -> f64 {
    let t = model.to_unit(x);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in model.coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    model.coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Taylor polynomial in powers of `(x - center)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorModel {
    pub center: f64,
    pub coeffs: Vec<f64>,
}

impl TaylorModel {
    pub fn eval(&self, x: f64) -> f64 {
        let h = x - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * h + c)
    }

    pub fn dof(&self) -> usize {
        self.coeffs.len()
    }
}

/// Taylor coefficients of the target. Supported: `exp-neg` at any center
/// (`(-1)^k e^{-x0} / k!`) and `airy-bi-neg` at the origin (from the
/// Maclaurin series of `Bi`).
pub fn taylor_model(target: &TargetSpec, center: f64, degree: usize) -> Result<TaylorModel> {
    let coeffs = match target {
        TargetSpec::ExpNeg => {
            let mut c = Vec::with_capacity(degree + 1);
            let mut v = (-center).exp();
            for k in 0..=degree {
                c.push(v);
                v = -v / (k + 1) as f64;
            }
            c
        }
        TargetSpec::AiryBiNeg if center == 0.0 => airy_bi_neg_maclaurin(degree),
        other => {
            return Err(Error::Unsupported(format!(
                "Taylor model for {other} at x0 = {center}"
            )))
        }
    };
    Ok(TaylorModel { center, coeffs })
}

// Bi(-x) = Bi(0) sum a_k (-x)^{3k} + Bi'(0) sum b_k (-x)^{3k+1}
fn airy_bi_neg_maclaurin(degree: usize) -> Vec<f64> {
    let (bi0, dbi0) = (airy::BI_AT_ZERO, airy::BI_PRIME_AT_ZERO);
    let mut c = vec![0.0; degree + 1];
    let (mut a, mut b) = (1.0, 1.0);
    let mut k = 0;
    while 3 * k <= degree {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[3 * k] = bi0 * a * sign;
        if 3 * k < degree {
            c[3 * k + 1] = -dbi0 * b * sign;
        }
        a /= ((3 * k + 2) * (3 * k + 3)) as f64;
        b /= ((3 * k + 3) * (3 * k + 4)) as f64;
        k += 1;
    }
    c
}

/// `x^2 f_k(x)` for `f_{k+1} = f_k (3 - x^2 f_k^2) / 2`, `f_0 = 1`; a deep
/// polynomial of degree `3^k` tending to `|x|` on the basin `0 < |x| < sqrt 3`.
pub fn newton_abs(x: f64, k: usize) -> Result<f64> {
    if !(x.abs() <= 3f64.sqrt()) {
        return Err(Error::Domain(format!(
            "newton_abs diverges for |x| > sqrt(3), got x = {x}"
        )));
    }
    let x2 = x * x;
    let mut f = 1.0;
    for _ in 0..k {
        f = 0.5 * f * (3.0 - x2 * f * f);
    }
    Ok(x2 * f)
}
