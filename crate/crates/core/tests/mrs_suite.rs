use std::f64::consts::PI;

use deepweight::mrs::{
    endpoint_localization, freud_mrs, mrs_numeric, mrs_numeric_for, restricted_range_check, Method,
};
use deepweight::weights::{FieldSpec, PowerField};
use deepweight::{Error, WeightSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_forms() {
    for n in [1.0, 2.0, 4.0, 9.0] {
        let g = freud_mrs(2.0, n).unwrap();
        assert_eq!(g.method, Method::ClosedForm);
        assert!((g.a_n - n.sqrt()).abs() <= 1e-12 * n.sqrt());
        let l = freud_mrs(1.0, n).unwrap().a_n;
        assert!((l - PI * n / 2.0).abs() <= 1e-12 * l);
    }
}

#[test]
fn numeric_matches_gaussian_closed_form() {
    for n in [1.0, 2.0, 4.0, 9.0, 16.0] {
        let num = mrs_numeric(&FieldSpec::GAUSSIAN, n).unwrap();
        assert_eq!(num.method, Method::Numeric);
        let exact = n.sqrt();
        assert!((num.a_n - exact).abs() / exact < 1e-8, "n={n}: {}", num.a_n);
    }
}

#[test]
fn numeric_matches_other_freud_exponents() {
    for lambda in [1.5, 3.0, 4.0] {
        for n in [1.0, 5.0] {
            let num = mrs_numeric_for(
                &PowerField {
                    coef: 1.0,
                    exponent: lambda,
                },
                n,
            )
            .unwrap()
            .a_n;
            let exact = freud_mrs(lambda, n).unwrap().a_n;
            assert!((num - exact).abs() / exact < 1e-8, "lambda={lambda} n={n}");
        }
    }
}

#[test]
fn mrs_number_increases_with_degree() {
    for field in [
        FieldSpec::GAUSSIAN,
        FieldSpec::new(0.5, 3.0).unwrap(),
        FieldSpec::new(2.0, 1.5).unwrap(),
    ] {
        let mut prev = 0.0;
        for n in 1..=20 {
            let a = mrs_numeric(&field, n as f64).unwrap().a_n;
            assert!(a > prev, "{field:?} n={n}");
            prev = a;
        }
    }
}

#[test]
fn endpoint_cases() {
    let quad = endpoint_localization(&PowerField {
        coef: 1.0,
        exponent: 2.0,
    })
    .unwrap();
    assert!((quad - PI / 4.0).abs() < 1e-10);
    let quartic = endpoint_localization(&PowerField {
        coef: 1.0,
        exponent: 4.0,
    })
    .unwrap();
    assert!((quartic - (3.0 * PI / 16.0).cbrt()).abs() < 1e-10);
    match endpoint_localization(&PowerField {
        coef: 1.0,
        exponent: 1.0,
    }) {
        Err(Error::Solver(m)) => assert!(m.contains("degenerate")),
        other => panic!("expected degenerate error, got {other:?}"),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> Vec<f64> {
    let d = rng.gen_range(0..=max_degree);
    (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn restricted_range_random_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2usize, 4, 8] {
        let a = (n as f64).sqrt();
        for _ in 0..100 {
            let p = random_poly(&mut rng, n);
            let r = restricted_range_check(&p, &WeightSpec::Freud(2.0), a);
            assert!(
                r.holds,
                "n={n} p={p:?} inside {} outside {}",
                r.sup_inside, r.sup_outside
            );
            assert!(r.tail_ratio < 1e-30);
        }
    }
}

#[test]
fn restricted_range_fails_on_a_too_small_interval() {
    // x^8 e^{-x^2} peaks at x = 2, outside [-1, 1]
    let r = restricted_range_check(
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        &WeightSpec::Freud(2.0),
        1.0,
    );
    assert!(!r.holds);
}
