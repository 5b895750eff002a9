//! Error metrics, the four-way comparison, and CSV/JSON export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{chebyshev_fit, taylor_model, ChebModel, TaylorModel};
use crate::error::{Error, Result};
use crate::fieldopt::GridPoint;
use crate::fit::{sample_grid, train, FitConfig, FitResult, GridSpec, VALIDATION_FACTOR};
use crate::targets::TargetSpec;

pub const POINTWISE_HEADER: &str = "x,f,q,abs_err";
pub const COMPARE_HEADER: &str = "x,f,q_weighted,q_unweighted,q_cheb,q_taylor";
pub const LANDSCAPE_HEADER: &str = "c,n,loss";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub x: f64,
    pub f: f64,
    pub q: f64,
    pub abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub sup_error: f64,
    pub l2_error: f64,
    pub pointwise: Vec<PointError>,
    pub grid: GridSpec,
    /// Grid points where either side failed to evaluate; excluded above.
    pub failed_points: Vec<f64>,
}

impl ErrorReport {
    pub fn warnings(&self) -> usize {
        self.failed_points.len()
    }
}

/// Compares `approximant` with `target` on the `samples`-point midpoint grid.
pub fn error_report<A>(
    approximant: A,
    target: &TargetSpec,
    interval: [f64; 2],
    samples: usize,
) -> Result<ErrorReport>
where
    A: Fn(f64) -> Result<f64>,
{
    let grid = sample_grid(interval, samples)?;
    let mut pointwise = Vec::with_capacity(samples);
    let mut failed = Vec::new();
    for &x in &grid.points {
        match (target.eval(x), approximant(x)) {
            (Ok(f), Ok(q)) if f.is_finite() && q.is_finite() => pointwise.push(PointError {
                x,
                f,
                q,
                abs_err: (q - f).abs(),
            }),
            _ => failed.push(x),
        }
    }
    let sup_error = pointwise.iter().map(|p| p.abs_err).fold(0.0, f64::max);
    let l2_error = (pointwise.iter().map(|p| p.abs_err * p.abs_err).sum::<f64>() * grid.dx).sqrt();
    Ok(ErrorReport {
        sup_error,
        l2_error,
        pointwise,
        grid: GridSpec { interval, samples },
        failed_points: failed,
    })
}

/// Plain float formatting shared by all CSV writers; 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_pointwise_csv<W: Write>(mut out: W, report: &ErrorReport) -> Result<()> {
    writeln!(out, "{POINTWISE_HEADER}")?;
    for p in &report.pointwise {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(p.x),
            fmt_f64(p.f),
            fmt_f64(p.q),
            fmt_f64(p.abs_err)
        )?;
    }
    Ok(())
}

pub fn write_landscape_csv<W: Write>(mut out: W, points: &[GridPoint]) -> Result<()> {
    writeln!(out, "{LANDSCAPE_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt_f64(p.c), fmt_f64(p.n), fmt_f64(p.loss))?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, s + "\n")?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let s =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&s).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn default_center() -> f64 {
    0.0
}

/// A fit configuration plus the matched baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    #[serde(flatten)]
    pub fit: FitConfig,
    #[serde(default = "default_center")]
    pub taylor_center: f64,
    /// Degrees of freedom given to the classical baselines; defaults to the
    /// deep model's trainable count.
    #[serde(default)]
    pub dof: Option<usize>,
}

impl CompareConfig {
    pub fn new(fit: FitConfig) -> Self {
        Self {
            fit,
            taylor_center: 0.0,
            dof: None,
        }
    }

    pub fn baseline_dof(&self) -> Result<usize> {
        match self.dof {
            Some(0) => Err(Error::Config("dof must be positive".into())),
            Some(d) => Ok(d),
            None => Ok(self.fit.graph_config()?.n_deep()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub x: f64,
    pub f: f64,
    pub q_weighted: f64,
    pub q_unweighted: f64,
    pub q_cheb: f64,
    pub q_taylor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub dof: usize,
    pub sup_weighted: f64,
    pub sup_unweighted: f64,
    pub sup_cheb: f64,
    pub sup_taylor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareResult {
    pub summary: CompareSummary,
    pub weighted: FitResult,
    pub unweighted: FitResult,
    pub cheb: ChebModel,
    pub taylor: Option<TaylorModel>,
    pub rows: Vec<CompareRow>,
}

// same grid as FitResult::sup_error: training points plus the denser validation grid
fn sup_over_grids(
    f: impl Fn(f64) -> f64,
    target: &TargetSpec,
    interval: [f64; 2],
    samples: usize,
) -> Result<f64> {
    let a = sample_grid(interval, samples)?;
    let b = sample_grid(interval, samples * VALIDATION_FACTOR)?;
    let mut sup: f64 = 0.0;
    for &x in a.points.iter().chain(&b.points) {
        let err = (f(x) - target.eval(x)?).abs();
        if !err.is_finite() {
            return Ok(f64::INFINITY);
        }
        sup = sup.max(err);
    }
    Ok(sup)
}

/// Weighted fit, the `gamma = 0` fit with the same seeds, the Chebyshev
/// interpolant and (where available) the Taylor polynomial, all at matched
/// degrees of freedom.
pub fn compare(cfg: &CompareConfig) -> Result<CompareResult> {
    let dof = cfg.baseline_dof()?;
    let fit = &cfg.fit;
    let weighted = train(fit)?;
    let mut flat = fit.clone();
    flat.gamma = 0.0;
    let unweighted = train(&flat)?;
    let cheb = chebyshev_fit(&fit.target, fit.interval, dof - 1)?;
    let taylor = match taylor_model(&fit.target, cfg.taylor_center, dof - 1) {
        Ok(t) => Some(t),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };

    let grid = sample_grid(fit.interval, fit.samples)?;
    let (gw, gu) = (weighted.graph()?, unweighted.graph()?);
    let rows = grid
        .points
        .iter()
        .map(|&x| {
            Ok(CompareRow {
                x,
                f: fit.target.eval(x)?,
                q_weighted: gw.forward(&weighted.theta_star, x).unwrap_or(f64::NAN),
                q_unweighted: gu.forward(&unweighted.theta_star, x).unwrap_or(f64::NAN),
                q_cheb: cheb.eval(x),
                q_taylor: taylor.as_ref().map(|t| t.eval(x)),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let sup_cheb = sup_over_grids(|x| cheb.eval(x), &fit.target, fit.interval, fit.samples)?;
    let sup_taylor = taylor
        .as_ref()
        .map(|t| sup_over_grids(|x| t.eval(x), &fit.target, fit.interval, fit.samples))
        .transpose()?;
    Ok(CompareResult {
        summary: CompareSummary {
            dof,
            sup_weighted: weighted.sup_error,
            sup_unweighted: unweighted.sup_error,
            sup_cheb,
            sup_taylor,
        },
        weighted,
        unweighted,
        cheb,
        taylor,
        rows,
    })
}

pub fn write_compare_csv<W: Write>(mut out: W, rows: &[CompareRow]) -> Result<()> {
    writeln!(out, "{COMPARE_HEADER}")?;
    for r in rows {
        let taylor = r.q_taylor.map(fmt_f64).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.x),
            fmt_f64(r.f),
            fmt_f64(r.q_weighted),
            fmt_f64(r.q_unweighted),
            fmt_f64(r.q_cheb),
            taylor
        )?;
    }
    Ok(())
}

/// Pointwise report of a trained model on its own training grid.
pub fn fit_report(fit: &FitResult) -> Result<ErrorReport> {
    let graph = fit.graph()?;
    error_report(
        |x| graph.forward(&fit.theta_star, x),
        &fit.config.target,
        fit.config.interval,
        fit.config.samples,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn ones() -> TargetSpec {
        let t = crate::targets::Table::new("ones", vec![(-1.0, 1.0), (2.0, 1.0)]).unwrap();
        TargetSpec::Table(Arc::new(t))
    }

    #[test]
    fn exact_approximant() {
        let r = error_report(|x| Ok((-x).exp()), &TargetSpec::ExpNeg, [-1.0, 2.0], 50).unwrap();
        assert_eq!(r.sup_error, 0.0);
        assert_eq!(r.l2_error, 0.0);
        assert_eq!(r.pointwise.len(), 50);
    }

    #[test]
    fn zero_against_one() {
        let r = error_report(|_| Ok(0.0), &ones(), [0.0, 1.0], 4).unwrap();
        assert_eq!(r.sup_error, 1.0);
        assert_eq!(r.l2_error, 1.0);
        let xs: Vec<f64> = r.pointwise.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn failures_are_flagged() {
        let r = error_report(
            |x| {
                if x > 0.5 {
                    Err(Error::Domain("no".into()))
                } else {
                    Ok(1.0)
                }
            },
            &ones(),
            [0.0, 1.0],
            4,
        )
        .unwrap();
        assert_eq!(r.warnings(), 2);
        assert_eq!(r.pointwise.len(), 2);
        assert_eq!(r.sup_error, 0.0);
    }

    #[test]
    fn csv_headers() {
        let r = error_report(|_| Ok(0.5), &ones(), [0.0, 1.0], 2).unwrap();
        let mut buf = Vec::new();
        write_pointwise_csv(&mut buf, &r).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("x,f,q,abs_err"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(first, vec![0.25, 1.0, 0.5, 0.5]);

        let mut buf = Vec::new();
        let row = CompareRow {
            x: 0.1,
            f: 1.0,
            q_weighted: 1.0,
            q_unweighted: 2.0,
            q_cheb: 3.0,
            q_taylor: None,
        };
        write_compare_csv(&mut buf, &[row]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next(), Some(COMPARE_HEADER));
        assert!(s.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.718281828459045e-200, 6.02e23] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn compare_config_flattens() {
        let cfg: CompareConfig = serde_json::from_str(
            r#"{"target":"exp-neg","interval":[-5,20],"widths":[3,2],"taylor_center":0.5}"#,
        )
        .unwrap();
        assert_eq!(cfg.fit.samples, 600);
        assert_eq!(cfg.taylor_center, 0.5);
        assert_eq!(cfg.baseline_dof().unwrap(), 5);
    }
}
