//! The reproduction checks, one function per criterion. Each returns an
//! [`Outcome`] carrying the measured numbers; `tests/acceptance.rs` runs them
//! all and prints one line per check.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use deepweight::airy::airy_bi;
use deepweight::baselines::newton_abs;
use deepweight::fieldopt::{optimize_field, FieldSearchConfig};
use deepweight::fit::{tail_error_direct, tail_error_rescaled};
use deepweight::golden::load_golden;
use deepweight::graph::{Graph, GraphConfig, ParamVector};
use deepweight::mrs::{endpoint_localization, freud_mrs, mrs_numeric, restricted_range_check};
use deepweight::report::{
    compare, write_landscape_csv, CompareConfig, CompareSummary, LANDSCAPE_HEADER,
};
use deepweight::weights::{check_field_admissibility, FieldSpec, PowerField};
use deepweight::{train, Error, FitConfig, Result, TargetSpec, WeightSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Widths of the five-parameter model used by the figure checks.
pub const DOF5_WIDTHS: [usize; 2] = [3, 2];
pub const FIG1_TOLERANCE: f64 = 5e-3;
pub const FIG1_TIME_LIMIT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} {}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn dof5(target: TargetSpec, interval: [f64; 2]) -> CompareConfig {
    CompareConfig::new(FitConfig::new(target, interval, DOF5_WIDTHS.to_vec()))
}

fn ratios(s: &CompareSummary) -> (f64, f64) {
    (
        s.sup_cheb / s.sup_weighted,
        s.sup_unweighted / s.sup_weighted,
    )
}

/// `e^{-x}` on `[-5, 20]`: weighted sup error within tolerance and at least
/// ten times below both the Chebyshev and the unweighted fit.
pub fn fig1_exp_decay() -> Outcome {
    timed(1, "weighted 5-DOF fit of e^-x on [-5,20]", || {
        let start = Instant::now();
        let r = compare(&dof5(TargetSpec::ExpNeg, [-5.0, 20.0]))?;
        let took = start.elapsed();
        let s = &r.summary;
        let (cheb, flat) = ratios(s);
        let passed = s.sup_weighted <= FIG1_TOLERANCE
            && cheb >= 10.0
            && flat >= 10.0
            && took <= FIG1_TIME_LIMIT;
        Ok((
            passed,
            format!(
                "sup_weighted={:.4e} (need <= {FIG1_TOLERANCE:e}), cheb/weighted={cheb:.2}, unweighted/weighted={flat:.2} (need >= 10)",
                s.sup_weighted
            ),
        ))
    })
}

/// Fast versus slow one-sided weight on `[-3, 20]`.
pub fn fig2_weight_speed() -> Outcome {
    timed(2, "gauss-right beats recip-right on [-3,20]", || {
        let mut fast = FitConfig::new(TargetSpec::ExpNeg, [-3.0, 20.0], DOF5_WIDTHS.to_vec());
        fast.weight = WeightSpec::GaussRight;
        let mut slow = fast.clone();
        slow.weight = WeightSpec::RecipRight;
        let (f, s) = (train(&fast)?.sup_error, train(&slow)?.sup_error);
        Ok((f < s, format!("gauss-right={f:.4e}, recip-right={s:.4e}")))
    })
}

/// `Bi(-x)` on `[-3, 20]`: weighted at least ten times better than both baselines.
pub fn fig3_airy() -> Outcome {
    timed(3, "weighted 5-DOF fit of Bi(-x) on [-3,20]", || {
        let r = compare(&dof5(TargetSpec::AiryBiNeg, [-3.0, 20.0]))?;
        let s = &r.summary;
        let (cheb, flat) = ratios(s);
        Ok((
            cheb >= 10.0 && flat >= 10.0,
            format!(
                "sup_weighted={:.4e}, cheb/weighted={cheb:.2}, unweighted/weighted={flat:.2} (need >= 10)",
                s.sup_weighted
            ),
        ))
    })
}

pub fn mrs_closed_forms() -> Outcome {
    timed(4, "MRS closed forms and numeric solve", || {
        let mut worst_closed: f64 = 0.0;
        let mut worst_numeric: f64 = 0.0;
        for n in [1.0, 2.0, 4.0, 9.0] {
            let g = freud_mrs(2.0, n)?.a_n;
            let l = freud_mrs(1.0, n)?.a_n;
            worst_closed = worst_closed.max((g - n.sqrt()).abs() / n.sqrt());
            worst_closed = worst_closed.max((l - PI * n / 2.0).abs() / (PI * n / 2.0));
            let num = mrs_numeric(&FieldSpec::GAUSSIAN, n)?.a_n;
            worst_numeric = worst_numeric.max((num - g).abs() / g);
        }
        Ok((
            worst_closed <= 1e-12 && worst_numeric <= 1e-8,
            format!("closed-form rel err {worst_closed:.1e} (<= 1e-12), numeric rel err {worst_numeric:.1e} (<= 1e-8)"),
        ))
    })
}

pub fn endpoint_cases() -> Outcome {
    timed(5, "endpoint localization", || {
        let e2 = (endpoint_localization(&PowerField {
            coef: 1.0,
            exponent: 2.0,
        })? - PI / 4.0)
            .abs();
        let e4 = (endpoint_localization(&PowerField {
            coef: 1.0,
            exponent: 4.0,
        })? - (3.0 * PI / 16.0).cbrt())
        .abs();
        let degenerate = matches!(
            endpoint_localization(&PowerField { coef: 1.0, exponent: 1.0 }),
            Err(Error::Solver(ref m)) if m.contains("degenerate")
        );
        Ok((
            e2 < 1e-10 && e4 < 1e-10 && degenerate,
            format!("|a-pi/4|={e2:.1e}, |a-(3pi/16)^(1/3)|={e4:.1e}, phi=t degenerate error: {degenerate}"),
        ))
    })
}

pub fn restricted_range_suite() -> Outcome {
    timed(6, "restricted range on random polynomials", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut failures = 0;
        let mut worst: f64 = 0.0;
        for n in [2usize, 4, 8] {
            let a = (n as f64).sqrt();
            for _ in 0..100 {
                let d = rng.gen_range(0..=n);
                let p: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let r = restricted_range_check(&p, &WeightSpec::Freud(2.0), a);
                if !r.holds {
                    failures += 1;
                }
                if r.sup_inside > 0.0 {
                    worst = worst.max(r.sup_outside / r.sup_inside);
                }
            }
        }
        Ok((
            failures == 0,
            format!("300 polynomials, {failures} violations, max outside/inside={worst:.12}"),
        ))
    })
}

pub fn newton_contraction() -> Outcome {
    timed(7, "Newton iteration for |x|", || {
        let xs: Vec<f64> = (0..=90).map(|i| 0.1 + 0.01 * i as f64).collect();
        let mut prev = vec![f64::INFINITY; xs.len()];
        let mut monotone = true;
        for k in 0..=20 {
            for (x, p) in xs.iter().zip(prev.iter_mut()) {
                let e = (newton_abs(*x, k)? - x.abs()).abs();
                // an ulp of wobble at rounding level is not an increase
                if e > p.max(4.0 * f64::EPSILON * x.abs()) {
                    monotone = false;
                }
                *p = e;
            }
        }
        let worst = prev.iter().copied().fold(0.0, f64::max);
        Ok((
            worst < 1e-12 && monotone,
            format!("max error at k=20: {worst:.1e} (< 1e-12), monotone: {monotone}"),
        ))
    })
}

pub fn gradient_oracle() -> Outcome {
    timed(8, "autodiff vs central differences", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let weights = [
            WeightSpec::Constant,
            WeightSpec::GaussRight,
            WeightSpec::RecipRight,
            WeightSpec::Freud(2.0),
        ];
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let layers = rng.gen_range(1..=3);
            let widths: Vec<usize> = (0..layers).map(|_| rng.gen_range(1..=4)).collect();
            let n: usize = widths.iter().sum();
            let weight = weights[rng.gen_range(0..weights.len())];
            let gamma = rng.gen_range(0.0..2.0);
            let graph = Graph::build(GraphConfig::new(widths, gamma, weight)?)?;
            let theta = ParamVector((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let x = rng.gen_range(-1.5..1.5);
            let ad = graph.gradient(&theta, x)?;
            let h = 1e-6;
            for k in 0..n {
                let (mut p, mut m) = (theta.clone(), theta.clone());
                p.0[k] += h;
                m.0[k] -= h;
                let fd = (graph.forward(&p, x)? - graph.forward(&m, x)?) / (2.0 * h);
                worst = worst.max((ad[k] - fd).abs() / (1.0 + fd.abs()));
            }
        }
        Ok((
            worst < 1e-6,
            format!("100 instances, max |ad-fd|/(1+|fd|)={worst:.2e} (< 1e-6)"),
        ))
    })
}

pub fn change_of_variables() -> Outcome {
    timed(9, "tail error under y = sqrt(n) x", || {
        let p = |x: f64| 0.9 - 0.4 * x + 0.3 * x * x - 0.05 * x.powi(3);
        let mut worst: f64 = 0.0;
        for n in [4.0, 16.0, 64.0] {
            let d = tail_error_direct(p, n, 4.0, 40_000)?;
            let r = tail_error_rescaled(p, n, 4.0, 40_000)?;
            worst = worst.max((d - r).abs() / d.abs());
        }
        Ok((
            worst < 1e-10,
            format!("max relative gap {worst:.1e} (< 1e-10)"),
        ))
    })
}

/// Field search configuration used by the check.
pub fn field_search_config() -> FieldSearchConfig {
    let template = FitConfig::new(TargetSpec::ExpNeg, [-3.0, 20.0], DOF5_WIDTHS.to_vec());
    FieldSearchConfig::new(template, [0.5, 1.5], [1.5, 2.5])
}

pub fn field_optimization(out_dir: &Path) -> Outcome {
    timed(10, "external field optimization", || {
        let cfg = field_search_config();
        let r = optimize_field(&cfg)?;
        let baseline = r
            .baseline_loss
            .ok_or_else(|| Error::Config("(1, 2) not in the search ranges".into()))?;
        let admissible = r.grid_log.iter().all(|p| {
            p.admissible && check_field_admissibility(&FieldSpec { c: p.c, n: p.n }).all_pass()
        });
        let monotone = r.incumbent_history.windows(2).all(|w| w[1] <= w[0]);
        let path = out_dir.join("landscape.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        write_landscape_csv(&mut w, &r.grid_log)?;
        w.flush()?;
        drop(w);
        let text = std::fs::read_to_string(&path)?;
        let emitted = text.lines().next() == Some(LANDSCAPE_HEADER)
            && text.lines().count() == r.grid_log.len() + 1;
        let again = optimize_field(&cfg)?;
        let reproducible = again.grid_log == r.grid_log && again.best_fit == r.best_fit;
        Ok((
            r.best_loss <= baseline && admissible && monotone && emitted && reproducible,
            format!(
                "best (c,n)=({:.4},{:.4}) loss={:.4e} vs baseline {:.4e}; {} fields all admissible: {admissible}; landscape csv: {emitted}; rerun identical: {reproducible}",
                r.best_c,
                r.best_n,
                r.best_loss,
                baseline,
                r.grid_log.len()
            ),
        ))
    })
}

pub fn airy_evaluator(golden: &Path) -> Outcome {
    timed(11, "Airy Bi evaluator", || {
        let rows = load_golden(golden)?;
        let mut worst: f64 = 0.0;
        for &(x, y) in &rows {
            worst = worst.max((airy_bi(x)? - y).abs() / y.abs());
        }
        let h = 1e-3;
        let y = |x: f64| airy_bi(x);
        let mut ode: f64 = 0.0;
        for i in 0..50 {
            let x = -20.0 + 23.0 * i as f64 / 49.0;
            let d2 = (-y(x + 2.0 * h)? + 16.0 * y(x + h)? - 30.0 * y(x)? + 16.0 * y(x - h)?
                - y(x - 2.0 * h)?)
                / (12.0 * h * h);
            ode = ode.max((d2 - x * y(x)?).abs());
        }
        Ok((
            !rows.is_empty() && worst <= 1e-10 && ode < 1e-5,
            format!("{} golden rows, max rel err {worst:.1e} (<= 1e-10); max |y''-xy| at 50 points {ode:.1e} (< 1e-5)", rows.len()),
        ))
    })
}
