//! Search over the one-sided external field `c x^n` (acting on `x >= 0`)
//! that minimizes the trained approximant's discrete L2 loss.
//!
//! The outer search is a coarse grid followed by rounds of local refinement
//! around the incumbent, halving the spacing each round. Inner fits run on a
//! reduced budget with fixed seeds, so the landscape is deterministic; the
//! final incumbent is retrained with the full budget of the template.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{train, FitConfig, FitResult};
use crate::weights::{check_field_admissibility, FieldSpec, WeightSpec};

/// The baseline Gaussian field `(c, n) = (1, 2)`.
pub const BASELINE: (f64, f64) = (1.0, 2.0);

fn default_points() -> usize {
    3
}
fn default_rounds() -> usize {
    2
}
fn default_search_restarts() -> usize {
    3
}
fn default_search_iters() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSearchConfig {
    /// Target, interval, widths, gamma and the full training budget; its
    /// `weight` is replaced by each candidate field.
    pub template: FitConfig,
    pub c_range: [f64; 2],
    pub n_range: [f64; 2],
    #[serde(default = "default_points")]
    pub c_points: usize,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default = "default_rounds")]
    pub refinement_rounds: usize,
    #[serde(default = "default_search_restarts")]
    pub search_restarts: usize,
    #[serde(default = "default_search_iters")]
    pub search_max_iters: usize,
}

impl FieldSearchConfig {
    pub fn new(template: FitConfig, c_range: [f64; 2], n_range: [f64; 2]) -> Self {
        Self {
            template,
            c_range,
            n_range,
            c_points: default_points(),
            n_points: default_points(),
            refinement_rounds: default_rounds(),
            search_restarts: default_search_restarts(),
            search_max_iters: default_search_iters(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.template.validate()?;
        let [c_lo, c_hi] = self.c_range;
        let [n_lo, n_hi] = self.n_range;
        if !(c_lo > 0.0 && c_lo <= c_hi && c_hi.is_finite()) {
            return Err(Error::Config(format!("bad c_range [{c_lo}, {c_hi}]")));
        }
        if !(n_lo > 1.0 && n_lo <= n_hi && n_hi.is_finite()) {
            return Err(Error::Config(format!(
                "bad n_range [{n_lo}, {n_hi}]; need 1 < n_lo <= n_hi"
            )));
        }
        if self.c_points == 0 || self.n_points == 0 {
            return Err(Error::Config("coarse grid sizes must be positive".into()));
        }
        if self.search_restarts == 0 || self.search_max_iters == 0 {
            return Err(Error::Config("search budget must be positive".into()));
        }
        Ok(())
    }

    fn baseline_in_range(&self) -> bool {
        let (c, n) = BASELINE;
        (self.c_range[0]..=self.c_range[1]).contains(&c)
            && (self.n_range[0]..=self.n_range[1]).contains(&n)
    }

    fn inner_config(&self, field: FieldSpec, full: bool) -> FitConfig {
        let mut cfg = self.template.clone();
        cfg.weight = WeightSpec::FieldRight(field);
        if !full {
            cfg.restarts = cfg.restarts.min(self.search_restarts);
            cfg.max_iters = cfg.max_iters.min(self.search_max_iters);
        }
        cfg
    }
}

/// One evaluated `(c, n)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c: f64,
    pub n: f64,
    pub loss: f64,
    pub sup_error: f64,
    pub admissible: bool,
    /// 0 for the coarse grid, `r` for refinement round `r`.
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSearchResult {
    pub best_c: f64,
    pub best_n: f64,
    /// Search-budget objective at the incumbent.
    pub best_loss: f64,
    /// Search-budget objective at `(1, 2)`, when it lies in the ranges.
    pub baseline_loss: Option<f64>,
    /// Full-budget retrain of the incumbent.
    pub best_fit: FitResult,
    /// Full-budget retrain at `(1, 2)`, when it lies in the ranges.
    pub baseline_fit: Option<FitResult>,
    /// Incumbent objective after the coarse grid and after each round.
    pub incumbent_history: Vec<f64>,
    pub grid_log: Vec<GridPoint>,
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 || lo == hi {
        return vec![lo];
    }
    (0..k)
        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
        .collect()
}

type Key = (u64, u64);

fn key(c: f64, n: f64) -> Key {
    (c.to_bits(), n.to_bits())
}

struct Search<'a> {
    cfg: &'a FieldSearchConfig,
    seen: BTreeMap<Key, GridPoint>,
    log: Vec<GridPoint>,
}

impl Search<'_> {
    fn evaluate(&mut self, candidates: &[(f64, f64)], round: usize) -> Result<()> {
        let fresh: Vec<(f64, f64)> = {
            let mut v: Vec<(f64, f64)> = Vec::new();
            for &(c, n) in candidates {
                if !self.seen.contains_key(&key(c, n))
                    && !v.iter().any(|&p| key(p.0, p.1) == key(c, n))
                {
                    v.push((c, n));
                }
            }
            v
        };
        let results = map_candidates(&fresh, |&(c, n)| {
            let field = FieldSpec { c, n };
            let admissible = check_field_admissibility(&field).all_pass() && n > 1.0;
            if !admissible {
                return Ok(GridPoint {
                    c,
                    n,
                    loss: f64::INFINITY,
                    sup_error: f64::INFINITY,
                    admissible,
                    round,
                });
            }
            match train(&self.cfg.inner_config(field, false)) {
                Ok(fit) => Ok(GridPoint {
                    c,
                    n,
                    loss: fit.loss_star,
                    sup_error: fit.sup_error,
                    admissible,
                    round,
                }),
                Err(Error::Training(_)) => Ok(GridPoint {
                    c,
                    n,
                    loss: f64::INFINITY,
                    sup_error: f64::INFINITY,
                    admissible,
                    round,
                }),
                Err(e) => Err(e),
            }
        });
        for p in results {
            let p = p?;
            self.seen.insert(key(p.c, p.n), p);
            self.log.push(p);
        }
        Ok(())
    }

    // lowest loss; ties resolved by the order of evaluation
    fn incumbent(&self) -> Option<GridPoint> {
        self.log
            .iter()
            .filter(|p| p.loss.is_finite())
            .fold(None, |best: Option<GridPoint>, p| match best {
                Some(b) if b.loss <= p.loss => Some(b),
                _ => Some(*p),
            })
    }
}

#[cfg(feature = "parallel")]
fn map_candidates<T, F>(items: &[(f64, f64)], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&(f64, f64)) -> T + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_candidates<T, F>(items: &[(f64, f64)], f: F) -> Vec<T>
where
    F: Fn(&(f64, f64)) -> T,
{
    items.iter().map(f).collect()
}

/// Runs the coarse-grid-plus-refinement search.
pub fn optimize_field(cfg: &FieldSearchConfig) -> Result<FieldSearchResult> {
    cfg.validate()?;
    let [c_lo, c_hi] = cfg.c_range;
    let [n_lo, n_hi] = cfg.n_range;
    let cs = linspace(c_lo, c_hi, cfg.c_points);
    let ns = linspace(n_lo, n_hi, cfg.n_points);
    let mut coarse: Vec<(f64, f64)> = cs
        .iter()
        .flat_map(|&c| ns.iter().map(move |&n| (c, n)))
        .collect();
    if cfg.baseline_in_range() {
        coarse.insert(0, BASELINE);
    }

    let mut search = Search {
        cfg,
        seen: BTreeMap::new(),
        log: Vec::new(),
    };
    search.evaluate(&coarse, 0)?;
    let mut history = Vec::new();
    let mut best = search
        .incumbent()
        .ok_or_else(|| Error::Training("every coarse-grid fit failed".into()))?;
    history.push(best.loss);

    let mut dc = if cs.len() > 1 {
        (c_hi - c_lo) / (cs.len() - 1) as f64
    } else {
        0.0
    };
    let mut dn = if ns.len() > 1 {
        (n_hi - n_lo) / (ns.len() - 1) as f64
    } else {
        0.0
    };
    for round in 1..=cfg.refinement_rounds {
        dc *= 0.5;
        dn *= 0.5;
        if dc == 0.0 && dn == 0.0 {
            history.push(best.loss);
            continue;
        }
        let mut local = Vec::new();
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                let c = (best.c + i as f64 * dc).clamp(c_lo, c_hi);
                let n = (best.n + j as f64 * dn).clamp(n_lo, n_hi);
                local.push((c, n));
            }
        }
        search.evaluate(&local, round)?;
        best = search.incumbent().expect("incumbent survives refinement");
        history.push(best.loss);
    }

    let best_field = FieldSpec {
        c: best.c,
        n: best.n,
    };
    let baseline_loss = cfg
        .baseline_in_range()
        .then(|| search.seen[&key(BASELINE.0, BASELINE.1)].loss);
    let best_fit = train(&cfg.inner_config(best_field, true))?;
    let baseline_fit = if !cfg.baseline_in_range() {
        None
    } else if key(best.c, best.n) == key(BASELINE.0, BASELINE.1) {
        Some(best_fit.clone())
    } else {
        Some(train(&cfg.inner_config(
            FieldSpec {
                c: BASELINE.0,
                n: BASELINE.1,
            },
            true,
        ))?)
    };
    Ok(FieldSearchResult {
        best_c: best.c,
        best_n: best.n,
        best_loss: best.loss,
        baseline_loss,
        best_fit,
        baseline_fit,
        incumbent_history: history,
        grid_log: search.log,
    })
}
