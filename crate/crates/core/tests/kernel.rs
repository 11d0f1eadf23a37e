use incbessel::bessel::{asym_large, asym_small, besseli, besseli_ladder, besseli_ratio, besselk};
use incbessel::ScaledValue;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn i(order: f64, x: f64) -> ScaledValue {
    besseli(order, x).unwrap()
}

fn k(order: f64, x: f64) -> ScaledValue {
    besselk(order, x).unwrap()
}

#[test]
fn closed_forms() {
    let sinh = (2.0f64 / (std::f64::consts::PI * 2.0)).sqrt() * 2.0f64.sinh();
    assert!(rel(i(0.5, 2.0).value(), sinh) < 1e-14);
    assert_eq!(i(0.0, 0.0).value(), 1.0);
    assert!(rel(i(1.0, 2.0).value(), 1.590_636_854_637_329) < 1e-14);
    let kh = (std::f64::consts::PI / 4.0).sqrt() * (-2.0f64).exp();
    assert!(rel(k(0.5, 2.0).value(), kh) < 1e-13);
    assert!(rel(k(0.0, 2.0).value(), 0.113_893_872_749_533_4) < 1e-12);
    assert!(rel(besseli_ratio(0.0, 1.0).unwrap(), 0.446_389_965_896_534_5) < 1e-13);
}

#[test]
fn small_argument_form() {
    assert!((asym_small(0.0f64, 0.1).unwrap() - 1.0025).abs() < 1e-15);
    assert!((asym_small(1.0f64, 0.2).unwrap() - 0.1005).abs() < 1e-15);
    assert_eq!(asym_small(0.0f64, 0.0).unwrap(), 1.0);
}

#[test]
fn large_argument_form_approaches_kernel() {
    assert!(rel(asym_large(0.0, 50.0).unwrap().value(), i(0.0, 50.0).value()) < 3e-5);
    let mut last = f64::INFINITY;
    for x in [50.0, 100.0, 200.0, 400.0] {
        let err = (asym_large(1.0, x).unwrap().ratio(&i(1.0, x)) - 1.0).abs();
        assert!(err < last, "x = {x}: {err} vs {last}");
        last = err;
    }
}

#[test]
fn negative_integer_order_rejected() {
    assert!(besseli(-2.0, 1.0).is_err());
    assert!(besseli(1.0, -1.0).is_err());
    assert!(besseli_ratio(0.0, 0.0).is_err());
}

#[test]
fn ladder_agrees_with_direct_evaluation() {
    for &(nu, x) in &[(0.0, 0.5), (0.3, 7.0), (2.5, 60.0), (-0.4, 300.0)] {
        let ladder = besseli_ladder(nu, x, 30).unwrap();
        for (m, v) in ladder.iter().enumerate() {
            let direct = i(nu + m as f64, x);
            assert!(v.rel_diff(&direct) < 1e-12, "nu {nu} + {m}, x {x}");
        }
    }
}

#[test]
fn single_precision_kernel() {
    let v = besseli(0.5f32, 2.0f32).unwrap().value();
    assert!((v - 2.046_236_8_f32).abs() / v < 1e-5);
    let kv = besselk(0.0f32, 2.0f32).unwrap().value();
    assert!((kv - 0.113_893_87_f32).abs() / kv < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn i_decreases_in_order(nu in -0.5f64..20.0, x in 1e-3f64..1000.0) {
        prop_assert!(i(nu + 1.0, x) < i(nu, x));
    }

    #[test]
    fn k_increases_in_order(nu in -0.49f64..20.0, x in 1e-3f64..500.0) {
        prop_assert!(k(nu + 1.0, x) > k(nu, x));
    }

    #[test]
    fn k_is_even_in_order(nu in 0.0f64..10.0, x in 1e-2f64..200.0) {
        prop_assert!(k(-nu, x).rel_diff(&k(nu, x)) < 1e-13);
    }

    #[test]
    fn ratio_bounds(nu in -0.49f64..20.0, x in 1e-3f64..1000.0) {
        let r = besseli_ratio(nu, x).unwrap();
        prop_assert!(r > 0.0);
        prop_assert!(r < x / (nu + 0.5 + x));
        prop_assert!(r < x / (2.0 * nu + 2.0));
        prop_assert!(rel(r, i(nu + 1.0, x).ratio(&i(nu, x))) < 1e-12);
    }

    #[test]
    fn ratio_increases_in_x(nu in -0.5f64..10.0, x in 1e-2f64..500.0, step in 1e-2f64..10.0) {
        prop_assert!(besseli_ratio(nu, x + step).unwrap() > besseli_ratio(nu, x).unwrap());
    }

    #[test]
    fn wronskian(nu in -5.0f64..10.0, x in 1e-2f64..500.0) {
        let w = (i(nu, x) * k(nu + 1.0, x) + i(nu + 1.0, x) * k(nu, x)).scale(x);
        prop_assert!((w.value() - 1.0).abs() < 1e-10, "{}", w.value());
    }

    #[test]
    fn product_bounds(nu in 0.51f64..10.0, x in 1e-2f64..500.0) {
        let p1 = (i(nu, x) * k(nu, x)).scale(x).value();
        prop_assert!((0.0..0.5).contains(&p1));
        let p2 = (i(nu, x) * k(nu + 1.0, x)).scale(x).value();
        prop_assert!(p2 > 0.5 && p2 <= 1.0 + 1e-12);
    }

    #[test]
    fn recurrence(nu in 0.0f64..15.0, x in 1e-2f64..800.0) {
        let lhs = i(nu - 1.0, x);
        let rhs = i(nu + 1.0, x) + i(nu, x).scale(2.0 * nu / x);
        prop_assert!(rhs.rel_diff(&lhs) < 1e-10);
    }
}
