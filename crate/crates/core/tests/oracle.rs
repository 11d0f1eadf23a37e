use incbessel::bessel::besseli;
use incbessel::oracle::{antiderivative_gamma1, bessel_integral, identity_residual, integral_asymptote, tol_range};
use incbessel::{Error, Identity, IntegralSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TOL: f64 = 1e-12;

fn f(mu: f64, ord: f64, gamma: f64, x: f64) -> incbessel::ScaledValue {
    bessel_integral(&IntegralSpec::new(mu, ord, gamma, x), TOL)
        .unwrap()
        .value
}

#[test]
fn derivative_formula_example() {
    let v = f(1.0, 0.0, 0.0, 2.0).value();
    assert!((v - 3.181_273_709_274_658).abs() / v < 1e-12);
    assert!(f(0.0, 0.0, 0.5, 0.0).is_zero());
}

#[test]
fn exact_at_gamma_one() {
    for nu in [-0.4, 0.0, 1.0, 2.5, 5.0] {
        for x in [0.5, 1.0, 5.0, 10.0, 30.0] {
            let exact = antiderivative_gamma1(nu, x).unwrap();
            assert!(f(nu, nu, 1.0, x).rel_diff(&exact) < 1e-10, "nu {nu}, x {x}");
        }
    }
}

#[test]
fn exact_at_shifted_order() {
    for nu in [0.5, 1.0, 2.5] {
        for x in [1.0f64, 5.0, 20.0] {
            let exact = besseli(nu, x).unwrap().scale(x.powf(nu));
            assert!(f(nu, nu - 1.0, 0.0, x).rel_diff(&exact) < 1e-10, "nu {nu}, x {x}");
        }
    }
}

#[test]
fn identity_examples() {
    assert!(identity_residual(Identity::IntegrationByParts, 0.5, 0.0, 0.3, 4.0).unwrap() < 1e-10);
    assert!(identity_residual(Identity::OrderReduction, 1.0, 0.0, 0.0, 3.0).unwrap() < 1e-10);
    assert!(identity_residual(Identity::Wronskian, 0.7, 0.0, 0.0, 2.0).unwrap() < 1e-10);
    assert!(identity_residual(Identity::ShiftedByParts, 0.0, 0.0, 0.3, 2.0).is_err());
    assert!(identity_residual(Identity::OrderReduction, 1.0, 0.0, 0.2, 3.0).is_err());
}

#[test]
fn identity_residuals_on_random_grid() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let x = 10f64.powf(rng.gen_range(-2.0..2.5));
        let gamma = rng.gen_range(0.0..0.95);
        let r1 = identity_residual(Identity::IntegrationByParts, rng.gen_range(-0.9..8.0), 0.0, gamma, x).unwrap();
        let r2 = identity_residual(Identity::ShiftedByParts, rng.gen_range(0.05..8.0), 0.0, gamma, x).unwrap();
        let nu = rng.gen_range(-0.45..6.0);
        let n = rng.gen_range(-0.5..3.0);
        let r3 = identity_residual(Identity::OrderReduction, nu, n, 0.0, x).unwrap();
        assert!(
            r1 < 1e-9 && r2 < 1e-9 && r3 < 1e-9,
            "x {x}, gamma {gamma}: {r1:e} {r2:e} {r3:e}"
        );
    }
}

#[test]
fn monotone_in_x_and_gamma() {
    for &(mu, ord) in &[(0.0, 0.0), (-0.3, 0.5), (2.0, 1.0), (0.5, 4.0)] {
        let mut last = f(mu, ord, 0.4, 0.01);
        for x in [0.1, 1.0, 5.0, 30.0, 200.0] {
            let next = f(mu, ord, 0.4, x);
            assert!(next > last, "mu {mu}, ord {ord}, x {x}");
            last = next;
        }
        let mut last = f(mu, ord, 0.0, 8.0);
        for gamma in [0.1, 0.5, 0.9, 1.0] {
            let next = f(mu, ord, gamma, 8.0);
            assert!(next < last, "mu {mu}, ord {ord}, gamma {gamma}");
            last = next;
        }
    }
}

#[test]
fn asymptote_converges() {
    let err = |mu: f64, nu: f64, gamma: f64, x: f64| {
        (integral_asymptote(mu, nu, gamma, x)
            .unwrap()
            .ratio(&f(mu, nu, gamma, x))
            - 1.0)
            .abs()
    };
    assert!(err(0.0, 0.0, 0.0, 100.0) < 1e-3);
    for &(mu, nu, gamma) in &[(0.0, 0.0, 0.0), (1.0, 0.5, 0.3), (2.0, 2.0, 0.5), (-0.25, 1.0, 0.1)] {
        let errs: Vec<f64> = [25.0, 50.0, 100.0, 200.0]
            .iter()
            .map(|&x| err(mu, nu, gamma, x))
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "({mu}, {nu}, {gamma}): {errs:?}");
    }
}

#[test]
fn large_arguments_stay_finite() {
    let r = bessel_integral(&IntegralSpec::new(0.0, 0.0, 0.0, 1000.0), TOL).unwrap();
    assert!(r.converged);
    let asym = integral_asymptote(0.0, 0.0, 0.0, 1000.0).unwrap();
    assert!((asym.ratio(&r.value) - 1.0).abs() < 1e-5);
}

#[test]
fn domain_errors() {
    let bad = |mu, ord, gamma, x| bessel_integral(&IntegralSpec::new(mu, ord, gamma, x), TOL);
    assert!(matches!(bad(0.0, 0.0, 1.5, 1.0), Err(Error::InvalidDomain(_))));
    assert!(matches!(bad(-1.0, 0.0, 0.0, 1.0), Err(Error::InvalidDomain(_))));
    assert!(matches!(bad(0.0, 0.0, 0.0, -1.0), Err(Error::InvalidDomain(_))));
    assert!(bessel_integral(&IntegralSpec::new(0.0, 0.0, 0.0, 1.0), 1e-3).is_err());
    assert!(antiderivative_gamma1(-0.5, 1.0).is_err());
}

#[test]
fn single_precision_oracle() {
    let (lo, _) = tol_range::<f32>();
    let r = bessel_integral(&incbessel::oracle::IntegralSpec::new(0.0f32, 0.0, 1.0, 1.0), lo).unwrap();
    let exact = antiderivative_gamma1(0.0f32, 1.0).unwrap();
    assert!(r.value.rel_diff(&exact) < 1e-5);
}
