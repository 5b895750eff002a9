#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Weighted deep polynomial approximation.
//!
//! A weighted deep polynomial is `Q(x) = w(x)^gamma * (p_L o ... o p_1)(x)`.
//! With a one-sided weight (1 on the left, decaying on the right) it can
//! follow functions that grow on one side and decay on the other, such as
//! `e^{-x}` or `Bi(-x)`, across the whole interval at once.
//!
//! The crate provides:
//!
//! * [`graph`]: the scalar computational graph with exact forward values and
//!   reverse-mode parameter gradients,
//! * [`fit`]: least-squares training by gradient descent with random restarts,
//! * [`weights`], [`targets`] and [`airy`]: weight functions, target
//!   functions and a self-contained `Bi(x)` evaluator ([`golden`] holds its
//!   high-precision reference),
//! * [`mrs`]: Mhaskar-Rakhmanov-Saff numbers, restricted range checks and
//!   endpoint localization,
//! * [`baselines`]: Chebyshev, Taylor and the Newton iteration for `|x|`,
//! * [`fieldopt`]: search over the external field `c |x|^n`,
//! * [`report`]: error metrics and CSV/JSON export.

pub mod airy;
pub mod baselines;
mod dd;
pub mod error;
pub mod fieldopt;
pub mod fit;
pub mod golden;
pub mod graph;
pub mod mrs;
pub mod report;
pub mod targets;
pub mod weights;

pub use error::{Error, Result};
pub use fit::{train, FitConfig, FitResult};
pub use graph::{Graph, GraphConfig, ParamVector};
pub use targets::TargetSpec;
pub use weights::{FieldSpec, WeightSpec};
