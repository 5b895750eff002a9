//! Least-squares training of weighted deep polynomials by gradient descent
//! with random restarts.
//!
//! Each restart draws `theta ~ N(0, I)` from its own seed (`seed + r`) and
//! iterates `theta <- theta - eta grad L` until the relative change of the
//! loss drops below `rel_tol`. A step that would increase the loss is
//! retried with the step halved, up to [`MAX_HALVINGS`] times; the nominal
//! step is used again on the next iteration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphConfig, ParamVector, Tape};
use crate::targets::TargetSpec;
use crate::weights::WeightSpec;

pub const MAX_HALVINGS: usize = 40;
pub const MAX_REDRAWS: usize = 100;
/// The reported sup error also covers a grid this many times denser.
pub const VALIDATION_FACTOR: usize = 4;

/// Midpoint sample grid on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub points: Vec<f64>,
    pub dx: f64,
}

/// Grid description stored alongside results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub interval: [f64; 2],
    pub samples: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<SampleGrid> {
        sample_grid(self.interval, self.samples)
    }
}

/// `N` midpoints `x_i = a + (i - 1/2) dx` with `dx = (b - a)/N`.
pub fn sample_grid(interval: [f64; 2], samples: usize) -> Result<SampleGrid> {
    let [a, b] = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Config(format!(
            "interval must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if samples < 2 {
        return Err(Error::Config(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let dx = (b - a) / samples as f64;
    let points = (0..samples).map(|i| a + (i as f64 + 0.5) * dx).collect();
    Ok(SampleGrid { points, dx })
}

fn default_samples() -> usize {
    600
}
fn default_gamma() -> f64 {
    1.0
}
fn default_restarts() -> usize {
    5
}
fn default_eta() -> f64 {
    1e-3
}
fn default_rel_tol() -> f64 {
    1e-12
}
fn default_max_iters() -> usize {
    200_000
}
fn default_weight() -> WeightSpec {
    WeightSpec::GaussRight
}
fn default_trace_stride() -> usize {
    1000
}

/// Full hyperparameter set of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub interval: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub widths: Vec<usize>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    pub target: TargetSpec,
    #[serde(default = "default_weight")]
    pub weight: WeightSpec,
    /// Record the loss every this many iterations in each restart's trace.
    #[serde(default = "default_trace_stride")]
    pub trace_stride: usize,
}

impl FitConfig {
    /// Defaults for everything but the problem itself.
    pub fn new(target: TargetSpec, interval: [f64; 2], widths: Vec<usize>) -> Self {
        Self {
            interval,
            samples: default_samples(),
            widths,
            gamma: default_gamma(),
            restarts: default_restarts(),
            eta: default_eta(),
            rel_tol: default_rel_tol(),
            max_iters: default_max_iters(),
            seed: 0,
            target,
            weight: default_weight(),
            trace_stride: default_trace_stride(),
        }
    }

    pub fn graph_config(&self) -> Result<GraphConfig> {
        GraphConfig::new(self.widths.clone(), self.gamma, self.weight)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            interval: self.interval,
            samples: self.samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.graph_config()?;
        sample_grid(self.interval, self.samples)?;
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be positive".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!(
                "step eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    /// No halving of the step decreased the loss.
    Stalled,
    /// Every initial draw overflowed.
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub restart: usize,
    pub seed: u64,
    pub loss: f64,
    pub iterations: usize,
    pub redraws: usize,
    pub stop: StopReason,
    /// Loss at iteration 0, every `trace_stride` iterations, and at the end.
    pub trace: Vec<f64>,
    #[serde(skip)]
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub config: FitConfig,
    pub theta_star: ParamVector,
    pub loss_star: f64,
    pub best_restart: usize,
    pub restarts_log: Vec<RestartLog>,
    pub iterations_used: Vec<usize>,
    /// Max error over the training grid and a 4x denser midpoint grid.
    pub sup_error: f64,
    pub grid: GridSpec,
}

impl FitResult {
    pub fn graph(&self) -> Result<Graph> {
        Graph::build(self.config.graph_config()?)
    }

    /// Evaluates the trained approximant.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.graph()?.forward(&self.theta_star, x)
    }
}

/// Precomputed training problem: samples, targets and weight factors.
#[derive(Debug, Clone)]
pub struct Problem {
    graph: Graph,
    xs: Vec<f64>,
    fs: Vec<f64>,
    wf: Vec<f64>,
    dx: f64,
}

impl Problem {
    pub fn new(graph: Graph, grid: &SampleGrid, target: &TargetSpec) -> Result<Self> {
        let fs = grid
            .points
            .iter()
            .map(|&x| target.eval(x))
            .collect::<Result<Vec<_>>>()?;
        let wf = grid
            .points
            .iter()
            .map(|&x| graph.weight_factor(x))
            .collect();
        Ok(Self {
            graph,
            xs: grid.points.clone(),
            fs,
            wf,
            dx: grid.dx,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Loss, or `+inf` if any sample overflows.
    pub fn loss(&self, theta: &[f64], tape: &mut Tape) -> f64 {
        let mut sum = 0.0;
        for ((&x, &f), &w) in self.xs.iter().zip(&self.fs).zip(&self.wf) {
            match self.graph.forward_with(theta, x, w, tape) {
                Ok(q) => sum += (q - f) * (q - f),
                Err(_) => return f64::INFINITY,
            }
        }
        sum * self.dx
    }

    /// Loss and its gradient, written into `grad`.
    pub fn loss_and_gradient(
        &self,
        theta: &[f64],
        tape: &mut Tape,
        grad: &mut [f64],
    ) -> Result<f64> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut sum = 0.0;
        for ((&x, &f), &w) in self.xs.iter().zip(&self.fs).zip(&self.wf) {
            let q = self.graph.forward_with(theta, x, w, tape)?;
            let r = q - f;
            sum += r * r;
            self.graph
                .accumulate_gradient(theta, tape, 2.0 * r * self.dx, grad);
        }
        Ok(sum * self.dx)
    }
}

/// `L(theta) = sum_i (Q(x_i) - f(x_i))^2 dx`; overflowing samples make it `+inf`.
pub fn loss(
    graph: &Graph,
    theta: &ParamVector,
    grid: &SampleGrid,
    target: &TargetSpec,
) -> Result<f64> {
    let p = Problem::new(graph.clone(), grid, target)?;
    Ok(p.loss(theta.as_slice(), &mut Tape::default()))
}

/// `grad L = sum_i 2 (Q(x_i) - f(x_i)) grad Q(x_i) dx`.
pub fn loss_gradient(
    graph: &Graph,
    theta: &ParamVector,
    grid: &SampleGrid,
    target: &TargetSpec,
) -> Result<Vec<f64>> {
    let p = Problem::new(graph.clone(), grid, target)?;
    let mut grad = vec![0.0; theta.len()];
    p.loss_and_gradient(theta.as_slice(), &mut Tape::default(), &mut grad)?;
    Ok(grad)
}

fn run_restart(problem: &Problem, cfg: &FitConfig, restart: usize) -> RestartLog {
    let seed = cfg.seed.wrapping_add(restart as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.graph.n_params();
    let mut tape = Tape::default();
    let mut theta = vec![0.0; n];
    let mut redraws = 0;
    let mut loss = f64::INFINITY;
    for attempt in 0..=MAX_REDRAWS {
        theta
            .iter_mut()
            .for_each(|t| *t = StandardNormal.sample(&mut rng));
        loss = problem.loss(&theta, &mut tape);
        if loss.is_finite() {
            break;
        }
        redraws = attempt + 1;
    }
    if !loss.is_finite() {
        return RestartLog {
            restart,
            seed,
            loss,
            iterations: 0,
            redraws: MAX_REDRAWS,
            stop: StopReason::Diverged,
            trace: vec![],
            theta,
        };
    }

    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trace = vec![loss];
    let stride = cfg.trace_stride.max(1);
    let mut stop = StopReason::MaxIters;
    let mut iterations = 0;
    // loss is finite, so the gradient pass cannot overflow
    loss = problem
        .loss_and_gradient(&theta, &mut tape, &mut grad)
        .expect("finite loss implies a finite forward pass");
    while iterations < cfg.max_iters {
        let mut step = cfg.eta;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            for ((t, &th), &g) in trial.iter_mut().zip(&theta).zip(&grad) {
                *t = th - step * g;
            }
            let l = problem.loss(&trial, &mut tape);
            if l <= loss {
                accepted = Some(l);
                break;
            }
            step *= 0.5;
        }
        let Some(new_loss) = accepted else {
            stop = StopReason::Stalled;
            break;
        };
        iterations += 1;
        std::mem::swap(&mut theta, &mut trial);
        let rel = (loss - new_loss).abs() / loss.max(1e-300);
        if iterations % stride == 0 {
            trace.push(new_loss);
        }
        if rel < cfg.rel_tol {
            loss = new_loss;
            stop = StopReason::Converged;
            break;
        }
        loss = problem
            .loss_and_gradient(&theta, &mut tape, &mut grad)
            .expect("accepted step has finite loss");
    }
    if trace.last() != Some(&loss) {
        trace.push(loss);
    }
    RestartLog {
        restart,
        seed,
        loss,
        iterations,
        redraws,
        stop,
        trace,
        theta,
    }
}

#[cfg(feature = "parallel")]
fn run_restarts(problem: &Problem, cfg: &FitConfig) -> Vec<RestartLog> {
    use rayon::prelude::*;
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, cfg, r))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_restarts(problem: &Problem, cfg: &FitConfig) -> Vec<RestartLog> {
    (0..cfg.restarts)
        .map(|r| run_restart(problem, cfg, r))
        .collect()
}

/// Trains the approximant described by `config`.
pub fn train(config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let graph = Graph::build(config.graph_config()?)?;
    let grid = sample_grid(config.interval, config.samples)?;
    let problem = Problem::new(graph, &grid, &config.target)?;
    let logs = run_restarts(&problem, config);

    // minimum loss, ties to the lowest restart index
    let best = logs
        .iter()
        .filter(|l| l.loss.is_finite())
        .min_by(|a, b| a.loss.total_cmp(&b.loss).then(a.restart.cmp(&b.restart)));
    let Some(best) = best else {
        let diag: Vec<String> = logs
            .iter()
            .map(|l| {
                format!(
                    "restart {} (seed {}): {:?} after {} redraws",
                    l.restart, l.seed, l.stop, l.redraws
                )
            })
            .collect();
        return Err(Error::Training(format!(
            "all restarts diverged: {}",
            diag.join("; ")
        )));
    };
    let theta_star = ParamVector(best.theta.clone());
    let sup_error = sup_error(
        problem.graph(),
        &theta_star,
        &config.target,
        config.interval,
        config.samples,
    )?;
    Ok(FitResult {
        config: config.clone(),
        theta_star,
        loss_star: best.loss,
        best_restart: best.restart,
        iterations_used: logs.iter().map(|l| l.iterations).collect(),
        restarts_log: logs.clone(),
        sup_error,
        grid: config.grid_spec(),
    })
}

/// Max `|Q - f|` over the training grid and the 4x denser validation grid.
pub fn sup_error(
    graph: &Graph,
    theta: &ParamVector,
    target: &TargetSpec,
    interval: [f64; 2],
    samples: usize,
) -> Result<f64> {
    let train_grid = sample_grid(interval, samples)?;
    let val_grid = sample_grid(interval, samples * VALIDATION_FACTOR)?;
    let mut tape = Tape::default();
    let mut sup: f64 = 0.0;
    for &x in train_grid.points.iter().chain(&val_grid.points) {
        let f = target.eval(x)?;
        let q = graph.forward_with(theta.as_slice(), x, graph.weight_factor(x), &mut tape);
        match q {
            Ok(q) => sup = sup.max((q - f).abs()),
            Err(_) => return Ok(f64::INFINITY),
        }
    }
    Ok(sup)
}

/// Squared error of `e^{-n x^2} P(x)` against `e^{-x}` on `[0, x_max]` by
/// midpoint quadrature.
pub fn tail_error_direct<P: Fn(f64) -> f64>(
    p: P,
    n: f64,
    x_max: f64,
    samples: usize,
) -> Result<f64> {
    let grid = sample_grid([0.0, x_max], samples)?;
    Ok(grid
        .points
        .iter()
        .map(|&x| {
            let r = (-x).exp() - (-n * x * x).exp() * p(x);
            r * r
        })
        .sum::<f64>()
        * grid.dx)
}

/// The same error after `y = sqrt(n) x`:
/// `(1/sqrt(n)) int_0^{sqrt(n) x_max} |e^{-y/sqrt(n)} - P(y/sqrt(n)) e^{-y^2}|^2 dy`.
pub fn tail_error_rescaled<P: Fn(f64) -> f64>(
    p: P,
    n: f64,
    x_max: f64,
    samples: usize,
) -> Result<f64> {
    let s = n.sqrt();
    let grid = sample_grid([0.0, s * x_max], samples)?;
    Ok(grid
        .points
        .iter()
        .map(|&y| {
            let r = (-y / s).exp() - p(y / s) * (-y * y).exp();
            r * r
        })
        .sum::<f64>()
        * grid.dx
        / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_grids() {
        let g = sample_grid([0.0, 1.0], 4).unwrap();
        assert_eq!(g.dx, 0.25);
        assert_eq!(g.points, vec![0.125, 0.375, 0.625, 0.875]);
        let g = sample_grid([-1.0, 1.0], 2).unwrap();
        assert_eq!(g.points, vec![-0.5, 0.5]);
        let g = sample_grid([-5.0, 20.0], 600).unwrap();
        assert_eq!(g.dx, 25.0 / 600.0);
        assert_eq!(g.points.len(), 600);
        assert!(sample_grid([1.0, 1.0], 4).is_err());
        assert!(sample_grid([0.0, 1.0], 1).is_err());
    }

    fn affine() -> Graph {
        Graph::build(GraphConfig::unweighted(vec![2]).unwrap()).unwrap()
    }

    #[test]
    fn loss_examples() {
        let grid = sample_grid([0.0, 1.0], 4).unwrap();
        let table = |v: f64| {
            TargetSpec::Table(std::sync::Arc::new(
                crate::targets::Table::new("c", vec![(-10.0, v), (10.0, v)]).unwrap(),
            ))
        };
        let g = affine();
        assert_eq!(
            loss(&g, &ParamVector(vec![0.0, 0.0]), &grid, &table(0.0)).unwrap(),
            0.0
        );
        assert_eq!(
            loss(&g, &ParamVector(vec![0.0, 0.0]), &grid, &table(1.0)).unwrap(),
            1.0
        );
        let ident = TargetSpec::Table(std::sync::Arc::new(
            crate::targets::Table::new("id", vec![(-10.0, -10.0), (10.0, 10.0)]).unwrap(),
        ));
        assert!(loss(&g, &ParamVector(vec![0.0, 1.0]), &grid, &ident).unwrap() < 1e-28);
        let grad = loss_gradient(&g, &ParamVector(vec![0.0, 1.0]), &grid, &ident).unwrap();
        assert!(grad.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn single_sample_gradient_by_hand() {
        // one sample at x = 1 with dx = 1: L = (a0 + a1)^2, dL = 2(a0 + a1)(1, 1)
        let grid = SampleGrid {
            points: vec![1.0],
            dx: 1.0,
        };
        let zero = TargetSpec::Table(std::sync::Arc::new(
            crate::targets::Table::new("0", vec![(0.0, 0.0), (2.0, 0.0)]).unwrap(),
        ));
        let g = loss_gradient(&affine(), &ParamVector(vec![0.0, 1.0]), &grid, &zero).unwrap();
        assert_eq!(g, vec![2.0, 2.0]);
    }

    #[test]
    fn overflow_is_infinite_loss() {
        let g = Graph::build(GraphConfig::unweighted(vec![5, 5, 5]).unwrap()).unwrap();
        let grid = sample_grid([1e9, 1e10], 4).unwrap();
        let theta = ParamVector([0.0, 0.0, 0.0, 0.0, 1.0].repeat(3));
        assert_eq!(
            loss(&g, &theta, &grid, &TargetSpec::Abs).unwrap(),
            f64::INFINITY
        );
        assert!(loss_gradient(&g, &theta, &grid, &TargetSpec::Abs).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = FitConfig::new(TargetSpec::ExpNeg, [0.0, 1.0], vec![2]);
        assert!(cfg.validate().is_ok());
        cfg.restarts = 0;
        assert!(cfg.validate().is_err());
        let cfg = FitConfig::new(TargetSpec::ExpNeg, [1.0, 0.0], vec![2]);
        assert!(matches!(train(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn all_restarts_diverge() {
        // x^4 composed three times overflows everywhere on this interval for any draw
        let mut cfg = FitConfig::new(TargetSpec::Abs, [1e30, 1e31], vec![5, 5, 5]);
        cfg.restarts = 2;
        cfg.samples = 4;
        cfg.gamma = 0.0;
        cfg.weight = WeightSpec::Constant;
        match train(&cfg) {
            Err(Error::Training(msg)) => assert!(msg.contains("restart 1")),
            other => panic!("expected training error, got {other:?}"),
        }
    }
}
