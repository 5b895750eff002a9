use deepweight::fit::{loss, loss_gradient, sample_grid};
use deepweight::graph::{composite_degree, Graph, GraphConfig, ParamVector};
use deepweight::{TargetSpec, WeightSpec};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = WeightSpec> {
    prop_oneof![
        Just(WeightSpec::Constant),
        Just(WeightSpec::GaussRight),
        Just(WeightSpec::RecipRight),
        (1.0f64..3.0).prop_map(WeightSpec::Freud),
    ]
}

// widths in 1..=4, up to three layers, with a matching parameter vector
fn instance() -> impl Strategy<Value = (GraphConfig, Vec<f64>, f64)> {
    (
        prop::collection::vec(1usize..=4, 1..=3),
        0.0f64..2.0,
        weights(),
    )
        .prop_flat_map(|(widths, gamma, weight)| {
            let n: usize = widths.iter().sum();
            let cfg = GraphConfig::new(widths, gamma, weight).unwrap();
            (
                Just(cfg),
                prop::collection::vec(-1.0f64..1.0, n),
                -1.5f64..1.5,
            )
        })
}

// coefficient-vector polynomial arithmetic, lowest degree first
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_scaled(acc: &mut Vec<f64>, p: &[f64], s: f64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += s * b;
    }
}

fn expand(widths: &[usize], theta: &[f64]) -> Vec<f64> {
    let mut h = vec![0.0, 1.0];
    let mut off = 0;
    for &w in widths {
        let coeffs = &theta[off..off + w];
        off += w;
        let mut next = vec![0.0];
        let mut power = vec![1.0];
        for &a in coeffs {
            poly_add_scaled(&mut next, &power, a);
            power = poly_mul(&power, &h);
        }
        h = next;
    }
    h
}

fn degree(p: &[f64]) -> usize {
    p.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences((cfg, theta, x) in instance()) {
        let graph = Graph::build(cfg).unwrap();
        let theta = ParamVector(theta);
        let ad = graph.gradient(&theta, x).unwrap();
        let h = 1e-6;
        for k in 0..theta.len() {
            let mut p = theta.clone();
            let mut m = theta.clone();
            p.0[k] += h;
            m.0[k] -= h;
            let fd = (graph.forward(&p, x).unwrap() - graph.forward(&m, x).unwrap()) / (2.0 * h);
            prop_assert!((ad[k] - fd).abs() / (1.0 + fd.abs()) < 1e-6, "k={k}: ad {} fd {fd}", ad[k]);
        }
    }

    #[test]
    fn single_layer_is_monomial_sum(coeffs in prop::collection::vec(-3.0f64..3.0, 1..8), x in -2.0f64..2.0) {
        let graph = Graph::build(GraphConfig::unweighted(vec![coeffs.len()]).unwrap()).unwrap();
        let direct: f64 = coeffs.iter().enumerate().map(|(i, a)| a * x.powi(i as i32)).sum();
        let q = graph.forward(&ParamVector(coeffs), x).unwrap();
        prop_assert!((q - direct).abs() <= 1e-13 * (1.0 + direct.abs()));
    }

    #[test]
    fn composition_degree_is_product(
        widths in prop::collection::vec(2usize..=4, 1..=3),
        seed in prop::collection::vec(0.5f64..2.0, 12),
        x in -1.0f64..1.0,
    ) {
        let n: usize = widths.iter().sum();
        let theta: Vec<f64> = seed.iter().cycle().take(n).copied().collect();
        let expanded = expand(&widths, &theta);
        prop_assert_eq!(degree(&expanded), composite_degree(&widths));
        let graph = Graph::build(GraphConfig::unweighted(widths).unwrap()).unwrap();
        let q = graph.forward(&ParamVector(theta), x).unwrap();
        let e = horner(&expanded, x);
        prop_assert!((q - e).abs() <= 1e-10 * (1.0 + e.abs()));
    }

    #[test]
    fn forward_and_gradient_are_pure((cfg, theta, x) in instance()) {
        let graph = Graph::build(cfg).unwrap();
        let theta = ParamVector(theta);
        let a = (graph.forward(&theta, x).unwrap(), graph.gradient(&theta, x).unwrap());
        let _ = graph.forward(&theta, x + 0.25);
        let b = (graph.forward(&theta, x).unwrap(), graph.gradient(&theta, x).unwrap());
        prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
        prop_assert_eq!(a.1, b.1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn loss_gradient_matches_central_differences((cfg, theta, _x) in instance(), lo in -2.0f64..0.0, n in 2usize..40) {
        let graph = Graph::build(cfg).unwrap();
        let grid = sample_grid([lo, lo + 2.5], n).unwrap();
        let target = TargetSpec::ExpNeg;
        let theta = ParamVector(theta);
        let g = loss_gradient(&graph, &theta, &grid, &target).unwrap();
        let h = 1e-6;
        for k in 0..theta.len() {
            let mut p = theta.clone();
            let mut m = theta.clone();
            p.0[k] += h;
            m.0[k] -= h;
            let fd = (loss(&graph, &p, &grid, &target).unwrap() - loss(&graph, &m, &grid, &target).unwrap()) / (2.0 * h);
            prop_assert!((g[k] - fd).abs() / (1.0 + fd.abs()) < 1e-6, "k={k}: {} vs {fd}", g[k]);
        }
    }

    #[test]
    fn weight_powers_agree_with_direct_evaluation(w in weights(), gamma in 0.0f64..3.0, x in -4.0f64..4.0) {
        let direct = w.eval(x).powf(gamma);
        let logged = w.eval_pow(gamma, x);
        prop_assert!((direct - logged).abs() <= 1e-13 * direct.max(1e-300));
    }
}

#[test]
fn width_one_layer_collapses_degree() {
    assert_eq!(composite_degree(&[3, 1, 4]), 0);
    let e = expand(&[3, 1, 4], &[1.0, 2.0, 3.0, 0.7, 1.0, 1.0, 1.0, 1.0]);
    assert_eq!(degree(&e), 0);
}
