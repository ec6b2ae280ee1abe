use std::f64::consts::PI;

use faltings::certificate::taylor_coefficients;
use faltings::distortion::{
    constants, cubic_coefficient, expansion_radius, f0, kappa, koebe_bounds, linear_model_g_hyp, radius_bracket,
    verify_all, verify_approximation, verify_constants, verify_cusp_estimates, verify_f_prime_zero, verify_koebe,
    verify_linear_model, verify_log_derivative_growth, verify_radial_convexity, verify_radial_minimization,
    verify_radius_bracket, verify_special_values, verify_unit_circle_chart,
};
use faltings::inversion::{g_disk, g_hyp, h_hat, invert_j};
use faltings::sampling::disk_points;
use faltings::Error;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn constants_examples() {
    let k = constants();
    assert!((k.f_prime_0 - 237698.411625786).abs() < 1e-6);
    assert!((237698.0..=237699.0).contains(&k.f_prime_0));
    assert!((k.gamma0 - k.f_prime_0.powf(1.0 / 9.0)).abs() < 1e-13 * k.gamma0);
    assert!((1.0 / 4573.0..=1.0 / 4572.0).contains(&k.eps1));
    assert!(2.0 * k.eps1 <= k.kappa1 && k.kappa1 <= 1.0 / 2284.0);
    assert!((k.r0 - (2.0 - 3f64.sqrt())).abs() < 1e-16);
}

/// Smaller root `y = 1 + x` of `alpha eps^2 y^2 + (2 alpha eps - 1) y + alpha`,
/// by bisection on `[0, 1/(2 alpha eps^2)]` where the quadratic changes sign.
fn kappa_by_bisection(alpha: f64, eps: f64) -> f64 {
    let q = |y: f64| alpha * eps * eps * y * y + (2.0 * alpha * eps - 1.0) * y + alpha;
    let (mut lo, mut hi) = (0.0, (1.0 - 2.0 * alpha * eps) / (2.0 * alpha * eps * eps));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) - 1.0
}

#[test]
fn radius_bracket_examples() {
    let b = radius_bracket(1.0).unwrap();
    let w = invert_j(c(1.0, 0.0)).unwrap().w.unwrap().norm();
    assert!(b.r_minus <= w && w <= b.r_plus);
    let eps = constants().eps1;
    for alpha in [1e-6, 1e-3, 1.0, 100.0, 1000.0] {
        let k = kappa(alpha).unwrap();
        let oracle = kappa_by_bisection(alpha, eps);
        assert!((k - oracle).abs() < 1e-12 * (1.0 + oracle.abs()), "{alpha}: {k} vs {oracle}");
    }
    // alpha = 1728 is beyond 1/(4 eps1).
    assert!(matches!(radius_bracket(1728.0), Err(Error::Domain(_))));
    let mut prev = 0.0;
    for k in 1..=100 {
        let b = radius_bracket(11.0 * k as f64).unwrap();
        assert!(0.0 < b.r_minus && b.r_minus <= b.r_plus && b.r_plus < constants().r0);
        assert!(b.r_plus > prev);
        prev = b.r_plus;
    }
}

#[test]
fn linear_model_examples() {
    let g1 = constants().gamma1;
    for (z, expect) in [(c(1.0, 0.0), g1 - 1.0 / 13824.0), (c(0.0, 1.0), g1), (c(-1.0, 0.0), g1 + 1.0 / 13824.0)] {
        assert!((linear_model_g_hyp(z) - expect).abs() < 1e-15);
        assert!((g_hyp(z).unwrap() - expect).abs() <= 5e-7);
    }
}

/// Left and right sides of the three sextic remainder bounds at `w`.
fn approximation_sides(w: Complex64) -> [(f64, f64); 3] {
    let c3 = cubic_coefficient();
    let g0 = g_disk(c(0.0, 0.0)).unwrap();
    let w3 = w * w * w;
    let w6 = w.norm().powi(6);
    let model = g0 - 6.0 * (1.0 - w.norm_sqr()).ln() - c3 * w3.re;
    let hw = h_hat(w).unwrap();
    let cf = taylor_coefficients(|z| h_hat(z).ok().map(|h| (h / hw).ln()), w, 0.05, 256, 2).unwrap();
    [
        ((g_disk(w).unwrap() - model).abs(), 216.0 * w6),
        ((cf[1] * w - 3.0 * c3 * w3).norm(), 1296.0 * w6),
        ((cf[2] * 2.0 * w * w - 6.0 * c3 * w3).norm(), 5.0 * 1296.0 * w6),
    ]
}

#[test]
fn approximation_examples() {
    for (lhs, _) in approximation_sides(c(0.0, 0.0)) {
        assert!(lhs < 1e-12);
    }
    let [(l, r), _, _] = approximation_sides(c(0.05, 0.0));
    assert!(r - l > 0.0);
    let edge = Complex64::from_polar(expansion_radius(), PI / 7.0);
    for (l, r) in approximation_sides(edge) {
        assert!(l <= r, "{l} > {r}");
    }
}

#[test]
fn koebe_examples() {
    let k = koebe_bounds(0.0).unwrap();
    assert_eq!((k.value_lower, k.value_upper), (0.0, 0.0));
    assert_eq!((k.derivative_lower, k.derivative_upper), (1.0, 1.0));
    let k = koebe_bounds(0.5).unwrap();
    assert!((k.value_lower - 2.0 / 9.0).abs() < 1e-15 && (k.value_upper - 2.0).abs() < 1e-15);
    assert!(koebe_bounds(-0.1).is_err() && koebe_bounds(1.0).is_err());
    for z in disk_points(100, 0.95) {
        let (v, _, _) = f0(z).unwrap();
        let b = koebe_bounds(z.norm()).unwrap();
        assert!(b.value_lower - 1e-12 <= v.norm() && v.norm() <= b.value_upper + 1e-12);
    }
}

fn assert_pass(r: &faltings::certificate::CertificateReport) {
    assert!(r.pass, "{} failed: max violation {} at {:?}", r.name, r.max_violation, r.worst_point);
}

#[test]
fn certificate_suites() {
    assert_pass(&verify_constants());
    assert_pass(&verify_f_prime_zero());
    assert_pass(&verify_special_values());
    let lm = verify_linear_model(10_000);
    assert_pass(&lm);
    assert_eq!(lm.samples, 10_000);
    assert!(lm.max_violation <= 0.0);
    assert_pass(&verify_radius_bracket(300));
    let chart = verify_unit_circle_chart(100);
    assert_eq!(chart.len(), 3);
    chart.iter().for_each(assert_pass);
    assert_pass(&verify_log_derivative_growth(200));
    verify_approximation(100).iter().for_each(assert_pass);
    assert_pass(&verify_koebe(100));
    assert_pass(&verify_cusp_estimates(200));
    assert_pass(&verify_radial_minimization(500));
    assert_pass(&verify_radial_convexity(200));
}

#[test]
fn verify_all_passes_and_is_deterministic() {
    let a = verify_all();
    let b = verify_all();
    for r in &a {
        assert_pass(r);
    }
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
