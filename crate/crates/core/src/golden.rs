//! Reference values of `Bi(x)` from the Maclaurin series summed in big-integer
//! fixed point, and the golden-table CSV format built from them.
//!
//! This path shares nothing with [`crate::airy`] except the series itself:
//! the working precision (`PRECISION_BITS`) leaves well over a hundred bits
//! after the cancellation at `x = -30`, and the constants come from
//! 110-digit decimal expansions.

use std::io::{BufRead, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const PRECISION_BITS: u32 = 416;

const PI_DIGITS: &str = "3.1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679821480865";
const GAMMA_THIRD_DIGITS: &str = "2.6789385347077476336556929409746776441286893779573011009504283275904176101677438195409828890411887894191590492";

struct Fixed {
    one: BigInt,
    c1: BigInt,
    c2: BigInt,
}

fn decimal_to_fixed(s: &str, bits: u32) -> BigInt {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal literal");
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    (digits << bits) / scale
}

fn div_fixed(a: &BigInt, b: &BigInt, bits: u32) -> BigInt {
    (a << bits) / b
}

fn mul_fixed(a: &BigInt, b: &BigInt, bits: u32) -> BigInt {
    (a * b) >> bits
}

impl Fixed {
    fn new() -> Self {
        let p = PRECISION_BITS;
        let one = BigInt::one() << p;
        let pi = decimal_to_fixed(PI_DIGITS, p);
        let g13 = decimal_to_fixed(GAMMA_THIRD_DIGITS, p);
        let cbrt3 = (BigInt::from(3) << (3 * p)).nth_root(3);
        let sixth3 = (BigInt::from(3) << (6 * p)).nth_root(6);
        // Bi(0) = 3^(1/3) Gamma(1/3) / (2 pi), Bi'(0) = 3^(1/6) / Gamma(1/3)
        let c1 = div_fixed(&mul_fixed(&cbrt3, &g13, p), &(pi << 1), p);
        let c2 = div_fixed(&sixth3, &g13, p);
        Self { one, c1, c2 }
    }

    fn to_fixed(&self, x: f64) -> BigInt {
        let bits = x.to_bits();
        let sign = if x < 0.0 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let mant = if exp == 0 {
            (bits & ((1 << 52) - 1)) << 1
        } else {
            (bits & ((1 << 52) - 1)) | (1 << 52)
        };
        let shift = exp - 1075 + PRECISION_BITS as i64;
        let m = BigInt::from(mant);
        let v = if shift >= 0 {
            m << shift as u32
        } else {
            m >> (-shift) as u32
        };
        v * sign
    }

    fn to_f64(&self, v: &BigInt) -> f64 {
        let sign = if v.is_negative() { -1.0 } else { 1.0 };
        let a = v.abs();
        let excess = a.bits().saturating_sub(64);
        let top = (&a >> excess).to_u64().expect("fits in 64 bits") as f64;
        sign * top * 2f64.powi(excess as i32 - PRECISION_BITS as i32)
    }
}

/// High-precision `Bi(x)`; intended for `|x| <= 30`.
pub fn airy_bi_reference(x: f64) -> f64 {
    let fx = Fixed::new();
    airy_bi_reference_with(&fx, x)
}

fn airy_bi_reference_with(fx: &Fixed, x: f64) -> f64 {
    let p = PRECISION_BITS;
    let xb = fx.to_fixed(x);
    let z3 = mul_fixed(&mul_fixed(&xb, &xb, p), &xb, p);
    let mut tf = fx.one.clone();
    let mut tg = xb.clone();
    let mut f = tf.clone();
    let mut g = tg.clone();
    let mut k: u64 = 0;
    while !(tf.is_zero() && tg.is_zero()) {
        tf = mul_fixed(&tf, &z3, p) / BigInt::from((3 * k + 2) * (3 * k + 3));
        tg = mul_fixed(&tg, &z3, p) / BigInt::from((3 * k + 3) * (3 * k + 4));
        f += &tf;
        g += &tg;
        k += 1;
    }
    let bi = mul_fixed(&fx.c1, &f, p) + mul_fixed(&fx.c2, &g, p);
    fx.to_f64(&bi)
}

/// `(x, Bi(x))` rows for `x = start + i * step` up to and including `stop`.
pub fn golden_table(start: f64, stop: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(Error::Config(format!(
            "golden table needs start <= stop and step > 0, got [{start}, {stop}] step {step}"
        )));
    }
    let fx = Fixed::new();
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let x = start + i as f64 * step;
            (x, airy_bi_reference_with(&fx, x))
        })
        .collect())
}

/// Writes the table as CSV with header `x,bi_x` and 17 significant digits.
pub fn write_golden_csv<W: Write>(mut out: W, rows: &[(f64, f64)]) -> Result<()> {
    writeln!(out, "x,bi_x")?;
    for (x, y) in rows {
        writeln!(out, "{x:.16e},{y:.16e}")?;
    }
    Ok(())
}

pub fn read_golden_csv<R: BufRead>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "x,bi_x" {
                return Err(Error::Parse(format!("unexpected golden header `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", i + 1)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad number `{s}`", i + 1)))
        };
        rows.push((parse(a)?, parse(b)?));
    }
    Ok(rows)
}

pub fn load_golden(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path)?;
    read_golden_csv(std::io::BufReader::new(file))
}
