//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string so the page only needs `JSON.parse`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use deepweight::baselines::newton_abs;
use deepweight::fit::sample_grid;
use deepweight::mrs::{freud_mrs, restricted_range_check};
use deepweight::report::{compare, CompareConfig};
use deepweight::{Error, FitConfig, Result, TargetSpec, WeightSpec};

const PLOT_POINTS: usize = 300;

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad {what} `{}`", p.trim())))
        })
        .collect()
}

/// Weighted and unweighted deep fits next to the Chebyshev interpolant.
pub fn fit_curves(
    target: &str,
    interval: [f64; 2],
    widths: &str,
    weight: &str,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<Value> {
    let mut fit = FitConfig::new(
        target.parse::<TargetSpec>()?,
        interval,
        parse_list(widths, "width")?,
    );
    fit.weight = weight.parse::<WeightSpec>()?;
    fit.samples = PLOT_POINTS;
    fit.restarts = restarts;
    fit.max_iters = max_iters;
    fit.seed = seed;
    let r = compare(&CompareConfig::new(fit))?;
    let col =
        |f: fn(&deepweight::report::CompareRow) -> f64| r.rows.iter().map(f).collect::<Vec<_>>();
    Ok(json!({
        "x": col(|r| r.x),
        "f": col(|r| r.f),
        "weighted": col(|r| r.q_weighted),
        "unweighted": col(|r| r.q_unweighted),
        "cheb": col(|r| r.q_cheb),
        "summary": r.summary,
    }))
}

/// `|p(x) e^{-|x|^lambda}|` around the MRS interval of the polynomial's degree.
pub fn mrs_curves(coeffs: &str, lambda: f64) -> Result<Value> {
    let p: Vec<f64> = parse_list(coeffs, "coefficient")?;
    if p.is_empty() {
        return Err(Error::Config("need at least one coefficient".into()));
    }
    let degree = (p.len() - 1).max(1) as f64;
    let a = freud_mrs(lambda, degree)?.a_n;
    let weight = WeightSpec::Freud(lambda);
    let report = restricted_range_check(&p, &weight, a);
    let span = 2.5 * a;
    let xs: Vec<f64> = (0..=400)
        .map(|i| -span + 2.0 * span * i as f64 / 400.0)
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| (p.iter().rev().fold(0.0, |acc, &c| acc * x + c) * weight.eval(x)).abs())
        .collect();
    Ok(json!({
        "a_n": a,
        "degree": degree,
        "x": xs,
        "y": ys,
        "sup_inside": report.sup_inside,
        "sup_outside": report.sup_outside,
        "argmax": report.argmax_inside,
        "holds": report.holds,
    }))
}

/// `x^2 f_k(x)` for `k = 0..=k_max` on `[-1.5, 1.5]`.
pub fn newton_curves(k_max: usize) -> Result<Value> {
    let grid = sample_grid([-1.5, 1.5], PLOT_POINTS)?;
    let mut curves = Vec::new();
    let mut errors = Vec::new();
    for k in 0..=k_max {
        let ys = grid
            .points
            .iter()
            .map(|&x| newton_abs(x, k))
            .collect::<Result<Vec<_>>>()?;
        let err = (0..=90)
            .map(|i| 0.1 + 0.01 * i as f64)
            .map(|x| newton_abs(x, k).map(|v| (v - x).abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        curves.push(ys);
        errors.push(err);
    }
    Ok(json!({"x": grid.points, "curves": curves, "max_error": errors}))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string())
        .map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = fitCurves)]
#[allow(clippy::too_many_arguments)]
pub fn fit_curves_js(
    target: &str,
    a: f64,
    b: f64,
    widths: &str,
    weight: &str,
    restarts: u32,
    max_iters: u32,
    seed: u32,
) -> std::result::Result<String, JsError> {
    to_js(fit_curves(
        target,
        [a, b],
        widths,
        weight,
        restarts as usize,
        max_iters as usize,
        seed as u64,
    ))
}

#[wasm_bindgen(js_name = mrsCurves)]
pub fn mrs_curves_js(coeffs: &str, lambda: f64) -> std::result::Result<String, JsError> {
    to_js(mrs_curves(coeffs, lambda))
}

#[wasm_bindgen(js_name = newtonCurves)]
pub fn newton_curves_js(k_max: u32) -> std::result::Result<String, JsError> {
    to_js(newton_curves(k_max as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_payload_shape() {
        let v = fit_curves("exp-neg", [-3.0, 20.0], "3,2", "gauss-right", 1, 300, 0).unwrap();
        assert_eq!(v["x"].as_array().unwrap().len(), PLOT_POINTS);
        assert_eq!(v["weighted"].as_array().unwrap().len(), PLOT_POINTS);
        assert_eq!(v["summary"]["dof"], 5);
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(fit_curves("nope", [-3.0, 20.0], "3,2", "gauss-right", 1, 10, 0).is_err());
        assert!(fit_curves("exp-neg", [-3.0, 20.0], "3,x", "gauss-right", 1, 10, 0).is_err());
        assert!(mrs_curves("", 2.0).is_err());
        assert!(mrs_curves("1", 0.5).is_err());
    }

    #[test]
    fn mrs_quartic() {
        let v = mrs_curves("0,0,0,0,1", 2.0).unwrap();
        assert_eq!(v["a_n"], 2.0);
        assert_eq!(v["holds"], true);
        assert!((v["argmax"].as_f64().unwrap().abs() - 2f64.sqrt()).abs() < 2e-3);
    }

    #[test]
    fn newton_errors_shrink() {
        let v = newton_curves(6).unwrap();
        let e: Vec<f64> = v["max_error"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        assert_eq!(e.len(), 7);
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(v["curves"][0].as_array().unwrap().len(), PLOT_POINTS);
    }
}
