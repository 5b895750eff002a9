use deepweight::baselines::newton_abs;

#[test]
fn error_contracts_to_machine_precision() {
    let xs: Vec<f64> = (0..=90).map(|i| 0.1 + 0.01 * i as f64).collect();
    let mut prev = vec![f64::INFINITY; xs.len()];
    for k in 0..=20 {
        for (x, p) in xs.iter().zip(prev.iter_mut()) {
            let e = (newton_abs(*x, k).unwrap() - x.abs()).abs();
            // once at rounding level the error may wobble by an ulp
            let floor = 4.0 * f64::EPSILON * x.abs();
            assert!(e <= p.max(floor), "k={k} x={x}: {e} > {p}");
            *p = e;
        }
    }
    let worst = prev.iter().copied().fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn symmetric_in_x() {
    for k in [1, 4, 9] {
        for x in [0.2, 0.7, 1.3] {
            assert_eq!(newton_abs(x, k).unwrap(), newton_abs(-x, k).unwrap());
        }
    }
}
