//! Scalar computational graph for weighted deep polynomials.
//!
//! Layer `l` holds the powers `(h^{l-1})^i` for `i = 0..w_l` and a single
//! linear-combination node `h^l = sum_i a^l_i (h^{l-1})^i`. The output node
//! multiplies `h^L` by `w(x)^gamma`. Powers are built by repeated
//! multiplication, so reverse mode only needs product-rule adjoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightSpec;

/// Magnitude above which a node value counts as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub widths: Vec<usize>,
    pub gamma: f64,
    pub weight: WeightSpec,
}

impl GraphConfig {
    pub fn new(widths: Vec<usize>, gamma: f64, weight: WeightSpec) -> Result<Self> {
        let cfg = Self {
            widths,
            gamma,
            weight,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Plain deep polynomial without a weight.
    pub fn unweighted(widths: Vec<usize>) -> Result<Self> {
        Self::new(widths, 0.0, WeightSpec::Constant)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() {
            return Err(Error::Config(
                "widths must contain at least one layer".into(),
            ));
        }
        if let Some(l) = self.widths.iter().position(|&w| w == 0) {
            return Err(Error::Config(format!("layer {} has width 0", l + 1)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    pub fn n_deep(&self) -> usize {
        self.widths.iter().sum()
    }

    pub fn composite_degree(&self) -> usize {
        composite_degree(&self.widths)
    }
}

/// Total number of trainable coefficients, `sum_l w_l`.
pub fn n_deep(widths: &[usize]) -> Result<usize> {
    if widths.is_empty() {
        return Err(Error::Config(
            "widths must contain at least one layer".into(),
        ));
    }
    Ok(widths.iter().sum())
}

/// Free parameters of a composition of polynomials of the given degrees,
/// `d_1 + ... + d_L - L + 2`.
pub fn classic_dof(degrees: &[usize]) -> Result<usize> {
    if degrees.is_empty() {
        return Err(Error::Config("degree list must be nonempty".into()));
    }
    if degrees.contains(&0) {
        return Err(Error::Config("every layer degree must be >= 1".into()));
    }
    Ok(degrees.iter().sum::<usize>() + 2 - degrees.len())
}

/// Product of the layer degrees `w_l - 1`; a width-1 (constant) layer
/// collapses the composition to degree 0.
pub fn composite_degree(widths: &[usize]) -> usize {
    widths.iter().map(|&w| w.saturating_sub(1)).product()
}

/// Flat coefficient vector, layer-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Input,
    /// `base^exponent`; for exponent >= 2 computed as `prev * base`.
    Power {
        layer: usize,
        base: NodeId,
        exponent: usize,
        prev: Option<NodeId>,
    },
    /// `sum_i theta[offset + i] * value(terms[i])`.
    LinearCombination {
        layer: usize,
        terms: Vec<NodeId>,
        offset: usize,
    },
    /// `w(x)^gamma * value(input)`.
    WeightMul {
        input: NodeId,
    },
}

impl Node {
    fn layer(&self, n_layers: usize) -> usize {
        match self {
            Node::Input => 0,
            Node::Power { layer, .. } | Node::LinearCombination { layer, .. } => *layer,
            Node::WeightMul { .. } => n_layers,
        }
    }
}

/// A built graph; nodes are stored in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    config: GraphConfig,
    nodes: Vec<Node>,
}

/// Per-evaluation node values, reusable across calls.
#[derive(Debug, Clone, Default)]
pub struct Tape {
    values: Vec<f64>,
    adjoints: Vec<f64>,
    weight_factor: f64,
}

impl Graph {
    pub fn build(config: GraphConfig) -> Result<Self> {
        config.validate()?;
        let mut nodes = vec![Node::Input];
        let mut h: NodeId = 0;
        let mut offset = 0;
        for (l, &width) in config.widths.iter().enumerate() {
            let layer = l + 1;
            let mut terms = Vec::with_capacity(width);
            for exponent in 0..width {
                let prev = if exponent >= 2 {
                    terms.last().copied()
                } else {
                    None
                };
                nodes.push(Node::Power {
                    layer,
                    base: h,
                    exponent,
                    prev,
                });
                terms.push(nodes.len() - 1);
            }
            nodes.push(Node::LinearCombination {
                layer,
                terms,
                offset,
            });
            offset += width;
            h = nodes.len() - 1;
        }
        nodes.push(Node::WeightMul { input: h });
        Ok(Self { config, nodes })
    }

    pub fn config(&self) -> &GraphConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_params(&self) -> usize {
        self.config.n_deep()
    }

    pub fn weight_factor(&self, x: f64) -> f64 {
        self.config.weight.eval_pow(self.config.gamma, x)
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::Config(format!(
                "parameter vector has length {}, graph expects {}",
                theta.len(),
                self.n_params()
            )));
        }
        Ok(())
    }

    /// `Q(x; theta) = w(x)^gamma * h^L(x)`.
    pub fn forward(&self, theta: &ParamVector, x: f64) -> Result<f64> {
        let mut tape = Tape::default();
        self.forward_with(theta.as_slice(), x, self.weight_factor(x), &mut tape)
    }

    /// `dQ(x; theta)/dtheta` by reverse accumulation.
    pub fn gradient(&self, theta: &ParamVector, x: f64) -> Result<Vec<f64>> {
        let mut tape = Tape::default();
        let mut grad = vec![0.0; self.n_params()];
        self.forward_with(theta.as_slice(), x, self.weight_factor(x), &mut tape)?;
        self.accumulate_gradient(theta.as_slice(), &mut tape, 1.0, &mut grad);
        Ok(grad)
    }

    /// Forward pass with a precomputed weight factor, recording node values
    /// on `tape`.
    pub fn forward_with(
        &self,
        theta: &[f64],
        x: f64,
        weight_factor: f64,
        tape: &mut Tape,
    ) -> Result<f64> {
        self.check_len(theta)?;
        let n_layers = self.config.widths.len();
        tape.values.clear();
        tape.values.reserve(self.nodes.len());
        tape.weight_factor = weight_factor;
        for node in &self.nodes {
            let v = match node {
                Node::Input => x,
                Node::Power {
                    base,
                    exponent,
                    prev,
                    ..
                } => match (exponent, prev) {
                    (0, _) => 1.0,
                    (1, _) => tape.values[*base],
                    (_, Some(p)) => tape.values[*p] * tape.values[*base],
                    (_, None) => unreachable!("power >= 2 always links its predecessor"),
                },
                Node::LinearCombination { terms, offset, .. } => terms
                    .iter()
                    .zip(&theta[*offset..*offset + terms.len()])
                    .map(|(&t, a)| a * tape.values[t])
                    .sum(),
                Node::WeightMul { input } => weight_factor * tape.values[*input],
            };
            if !v.is_finite() || v.abs() > OVERFLOW_LIMIT {
                return Err(Error::Overflow {
                    layer: node.layer(n_layers),
                    value: v,
                });
            }
            tape.values.push(v);
        }
        Ok(*tape.values.last().expect("graph has an output node"))
    }

    /// Adds `seed * dQ/dtheta` into `grad`, using the values recorded by the
    /// last [`Graph::forward_with`] on `tape`.
    pub fn accumulate_gradient(&self, theta: &[f64], tape: &mut Tape, seed: f64, grad: &mut [f64]) {
        let n = self.nodes.len();
        tape.adjoints.clear();
        tape.adjoints.resize(n, 0.0);
        tape.adjoints[n - 1] = seed;
        for id in (0..n).rev() {
            let adj = tape.adjoints[id];
            if adj == 0.0 {
                continue;
            }
            match &self.nodes[id] {
                Node::Input => {}
                Node::WeightMul { input } => tape.adjoints[*input] += adj * tape.weight_factor,
                Node::LinearCombination { terms, offset, .. } => {
                    for (i, &t) in terms.iter().enumerate() {
                        grad[offset + i] += adj * tape.values[t];
                        tape.adjoints[t] += adj * theta[offset + i];
                    }
                }
                Node::Power {
                    base,
                    exponent,
                    prev,
                    ..
                } => match (exponent, prev) {
                    (0, _) => {}
                    (1, _) => tape.adjoints[*base] += adj,
                    (_, Some(p)) => {
                        tape.adjoints[*p] += adj * tape.values[*base];
                        tape.adjoints[*base] += adj * tape.values[*p];
                    }
                    (_, None) => unreachable!(),
                },
            }
        }
    }

    /// Value of the last linear-combination node, the unweighted `h^L`.
    pub fn deep_part(&self, tape: &Tape) -> f64 {
        tape.values[self.nodes.len() - 2]
    }

    /// Splits `theta` into per-layer coefficient slices.
    pub fn layer_coefficients<'a>(&self, theta: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::with_capacity(self.config.widths.len());
        let mut off = 0;
        for &w in &self.config.widths {
            out.push(&theta[off..off + w]);
            off += w;
        }
        out
    }
}
