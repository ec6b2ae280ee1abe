//! Distortion estimates for the disk chart and their sampled verification.
//!
//! `f0(z) = eps1 * f(r0^3 z)` is the normalised univalent map on the unit disk,
//! so the classical Koebe estimates apply to it. The remaining checks compare
//! j and `g_hyp` with their low-order models near `zeta = 0` and on the unit
//! circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certificate::{taylor_coefficients, CertificateReport, Tracker, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::inversion::{
    self, chart_map, disk_forms, f_prime_zero, g_disk, g_hyp, invert_j, psi_derivative, r0,
};
use crate::modular::{self, special, EisensteinKind, TauPoint, GAMMA_ONE_THIRD};
use crate::sampling::{circle_points, disk_points, halton2};

/// `f'(0)/13824`, the cubic coefficient of `log h` at 0.
pub fn cubic_coefficient() -> f64 {
    f_prime_zero() / 13824.0
}

/// Radius `1 - pi/(2 sqrt 3)` of the disk where the sextic remainder bounds hold.
pub fn expansion_radius() -> f64 {
    1.0 - PI / (2.0 * 3f64.sqrt())
}

/// Numerical constants used throughout the certificates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateConstants {
    pub r0: f64,
    /// `1/(r0^3 f'(0))`.
    pub eps1: f64,
    pub kappa1: f64,
    /// `sqrt(3)/pi * Gamma(1/3)^2`, so that `gamma0^9 = f'(0)`.
    pub gamma0: f64,
    /// Constant term of the linear model of `g_hyp` on the unit circle.
    pub gamma1: f64,
    pub f_prime_0: f64,
}

pub fn constants() -> CertificateConstants {
    let gamma0 = 3f64.sqrt() / PI * GAMMA_ONE_THIRD * GAMMA_ONE_THIRD;
    let fp = f_prime_zero();
    let r0 = r0();
    let eps1 = 1.0 / (r0.powi(3) * fp);
    CertificateConstants {
        r0,
        eps1,
        kappa1: kappa_unchecked(1.0, eps1),
        gamma0,
        gamma1: 3.0 * 192f64.ln() - 6.0 * (gamma0.powi(3) - gamma0.powi(-3)).ln(),
        f_prime_0: fp,
    }
}

fn kappa_unchecked(alpha: f64, eps: f64) -> f64 {
    // Smaller root y of alpha eps^2 y^2 + (2 alpha eps - 1) y + alpha = 0,
    // written without cancellation.
    let y = 2.0 * alpha / (1.0 - 2.0 * alpha * eps + (1.0 - 4.0 * alpha * eps).sqrt());
    y - 1.0
}

/// Largest admissible `alpha`, `1/(4 eps1)`.
pub fn alpha_max() -> f64 {
    0.25 / constants().eps1
}

/// Smaller root `x` of `1 + x = alpha (1 + (1+x) eps1)^2`.
pub fn kappa(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < alpha_max()) {
        return Err(Error::Domain(format!(
            "alpha = {alpha} outside (0, {})",
            alpha_max()
        )));
    }
    Ok(kappa_unchecked(alpha, constants().eps1))
}

/// Bracket on `|w|` for the disk preimage of any `|zeta| = alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusBracket {
    pub alpha: f64,
    pub kappa: f64,
    pub r_minus: f64,
    pub r_plus: f64,
}

pub fn radius_bracket(alpha: f64) -> Result<RadiusBracket> {
    let k = kappa(alpha)?;
    let c = constants();
    let r_plus = ((1.0 + k) / c.f_prime_0).cbrt();
    let r_minus = (1.0 - 4.0 * alpha * c.eps1).cbrt() * r_plus;
    Ok(RadiusBracket { alpha, kappa: k, r_minus, r_plus })
}

/// Affine model `gamma1 - Re(zeta)/13824` of `g_hyp` on the unit circle.
pub fn linear_model_g_hyp(zeta: Complex64) -> f64 {
    constants().gamma1 - zeta.re / 13824.0
}

/// Classical distortion bounds for a normalised univalent map at `|w| = m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoebeBounds {
    pub modulus: f64,
    pub value_lower: f64,
    pub value_upper: f64,
    pub derivative_lower: f64,
    pub derivative_upper: f64,
    /// Bound on `|w f'/f|`.
    pub log_derivative_upper: f64,
    /// `|w f''/f' - center| <= radius`.
    pub second_center: f64,
    pub second_radius: f64,
    /// Bound on `|f(w) - w|`.
    pub identity_deviation: f64,
    /// Bound on `|w f'/f - 1|`.
    pub log_derivative_deviation: f64,
}

pub fn koebe_bounds(m: f64) -> Result<KoebeBounds> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("modulus {m} outside [0, 1)")));
    }
    let (p, q) = (1.0 + m, 1.0 - m);
    Ok(KoebeBounds {
        modulus: m,
        value_lower: m / (p * p),
        value_upper: m / (q * q),
        derivative_lower: q / p.powi(3),
        derivative_upper: p / q.powi(3),
        log_derivative_upper: p / q,
        second_center: 2.0 * m * m / (1.0 - m * m),
        second_radius: 4.0 * m / (1.0 - m * m),
        identity_deviation: m * m * (2.0 - m) / (q * q),
        log_derivative_deviation: 2.0 * m * p * p / q.powi(3),
    })
}

/// The normalised map `f0(z) = eps1 f(r0^3 z)` with its derivative.
pub fn f0(z: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
    let c = constants();
    let s = c.r0.powi(3);
    let (v, d) = chart_map(z * s)?;
    // Second derivative by Cauchy on a small circle inside the disk.
    let rad = 0.25 * (1.0 - z.norm());
    let coeffs = taylor_coefficients(
        |x| chart_map(x * s).ok().map(|p| p.0 * c.eps1),
        z,
        rad,
        64,
        2,
    )
    .ok_or_else(|| Error::NonConvergence("f0 second derivative".into()))?;
    Ok((v * c.eps1, d * c.eps1 * s, coeffs[2] * 2.0))
}

/// `f'(0)` from a Cauchy integral of `f` on `|u| = 0.1 r0^3`.
pub fn f_prime_zero_numeric() -> Result<f64> {
    let rad = 0.1 * r0().powi(3);
    let c = taylor_coefficients(|u| chart_map(u).ok().map(|p| p.0), Complex64::new(0.0, 0.0), rad, 64, 1)
        .ok_or_else(|| Error::NonConvergence("f'(0) quadrature".into()))?;
    Ok(c[1].re)
}

/// Closed form against quadrature for `f'(0)`, and the bracket on `eps1`.
pub fn verify_f_prime_zero() -> CertificateReport {
    let mut t = Tracker::new("f_prime_zero", 0.0);
    let closed = f_prime_zero();
    match f_prime_zero_numeric() {
        Ok(num) => t.check(Complex64::new(num, 0.0), ((num - closed) / closed).abs(), 1e-8),
        Err(_) => t.fail(Complex64::new(0.0, 0.0)),
    }
    let e = constants().eps1;
    t.check(Complex64::new(e, 0.0), 1.0 / 4573.0, e);
    t.check(Complex64::new(e, 0.0), e, 1.0 / 4572.0);
    t.finish()
}

/// Internal consistency of the constants: `kappa1` is the root of its
/// quadratic and obeys `2 eps1 <= kappa1 <= 2 eps1 (1 + 3 eps1) <= 1/2284`.
pub fn verify_constants() -> CertificateReport {
    let c = constants();
    let mut t = Tracker::new("constants", 1e-15);
    let e = c.eps1;
    let k = c.kappa1;
    let p = Complex64::new(k, 0.0);
    t.check(p, 2.0 * e, k);
    t.check(p, k, 2.0 * e * (1.0 + 3.0 * e));
    t.check(p, 2.0 * e * (1.0 + 3.0 * e), 1.0 / 2284.0);
    let quad = (1.0 + k) - (1.0 + (1.0 + k) * e).powi(2);
    t.check(p, quad.abs(), 1e-15);
    let alt = 2.0 * e * (2.0 + e) / (1.0 - 2.0 * e - 2.0 * e * e + (1.0 - 4.0 * e).sqrt());
    t.check(p, (alt - k).abs(), 1e-16);
    t.check(p, (c.gamma0.powi(9) - c.f_prime_0).abs() / c.f_prime_0, 1e-14);
    match g_disk(Complex64::new(0.0, 0.0)) {
        Ok(g0) => {
            let alt = g0 - 6.0 * (1.0 - c.f_prime_0.powf(-2.0 / 3.0)).ln();
            t.check(p, (alt - c.gamma1).abs(), 1e-12);
        }
        Err(_) => t.fail(p),
    }
    t.finish()
}

/// Worst deviation of `g_hyp` from the affine model on the unit circle.
pub fn verify_linear_model(samples: usize) -> CertificateReport {
    let mut t = Tracker::new("linear_model_unit_circle", 0.0);
    for z in circle_points(samples) {
        match g_hyp(z) {
            Ok(g) => t.check(z, (g - linear_model_g_hyp(z)).abs(), 5e-7),
            Err(_) => t.fail(z),
        }
    }
    t.finish()
}

/// `r_-(|zeta|) <= |w| <= r_+(|zeta|)` for sampled `0 < |zeta| <= 1000`.
pub fn verify_radius_bracket(samples: usize) -> CertificateReport {
    let mut t = Tracker::new("radius_bracket", DEFAULT_TOLERANCE);
    for i in 0..samples as u64 {
        let (a, b) = halton2(i);
        let m = 10f64.powf(-6.0 + 9.0 * a);
        let z = Complex64::from_polar(m, 2.0 * PI * b);
        let (Ok(rb), Ok(inv)) = (radius_bracket(m), invert_j(z)) else {
            t.fail(z);
            continue;
        };
        let r = inv.w.map(|w| w.norm()).unwrap_or(f64::INFINITY);
        // Scale-free comparison.
        t.check(z, (rb.r_minus - r) / rb.r_plus, 0.0);
        t.check(z, (r - rb.r_plus) / rb.r_plus, 0.0);
    }
    t.finish()
}

/// The three chart estimates on the unit circle: `|zeta - f'(0) w^3|`,
/// `log(1 - |w|^2)` and `|j_D'(w)|`.
pub fn verify_unit_circle_chart(samples: usize) -> Vec<CertificateReport> {
    let fp = f_prime_zero();
    let l0 = (1.0 - fp.powf(-2.0 / 3.0)).ln();
    let mut a = Tracker::new("unit_circle_cubic", DEFAULT_TOLERANCE);
    let mut b = Tracker::new("unit_circle_log_modulus", DEFAULT_TOLERANCE);
    let mut c = Tracker::new("unit_circle_derivative", DEFAULT_TOLERANCE);
    for z in circle_points(samples) {
        let Some(w) = invert_j(z).ok().and_then(|r| r.w) else {
            a.fail(z);
            b.fail(z);
            c.fail(z);
            continue;
        };
        a.check(z, (z - fp * w * w * w).norm(), 1.0 / 2283.0);
        b.check(z, ((1.0 - w.norm_sqr()).ln() - l0).abs(), 7.7e-8);
        match inversion::j_disk_derivative(w) {
            Ok(d) => {
                c.check(z, 185.0, d.norm());
                c.check(z, d.norm(), 186.054);
            }
            Err(_) => c.fail(z),
        }
    }
    vec![a.finish(), b.finish(), c.finish()]
}

/// `J(w) = w j_D'(w)/j_D(w)` with `J(0) = 3`.
pub fn log_growth(w: Complex64) -> Result<Complex64> {
    if w.norm() == 0.0 {
        return Ok(Complex64::new(3.0, 0.0));
    }
    let f = disk_forms(w)?;
    let jd = f.j_prime() * psi_derivative(w);
    Ok(w * jd / f.j())
}

/// `|J'(w)| <= 4000 |w|^2` on the expansion disk.
pub fn verify_log_derivative_growth(samples: usize) -> CertificateReport {
    let mut t = Tracker::new("log_derivative_growth", DEFAULT_TOLERANCE);
    for w in disk_points(samples, expansion_radius()) {
        let rad = 0.5 * w.norm();
        if rad == 0.0 {
            continue;
        }
        match taylor_coefficients(|z| log_growth(z).ok(), w, rad, 64, 1) {
            Some(c) => t.check(w, c[1].norm(), 4000.0 * w.norm_sqr()),
            None => t.fail(w),
        }
    }
    t.finish()
}

/// Sextic remainder bounds for `g_D`, `w (log h)'`, `w^2 (log h)''` and the
/// sixth Taylor coefficient of `log h`, all on `|w| <= 1 - pi/(2 sqrt 3)`.
pub fn verify_approximation(samples: usize) -> Vec<CertificateReport> {
    let c3 = cubic_coefficient();
    let g0 = g_disk(Complex64::new(0.0, 0.0)).unwrap_or(f64::NAN);
    let mut ta = Tracker::new("disk_expansion_g", DEFAULT_TOLERANCE);
    let mut tb = Tracker::new("disk_expansion_first", DEFAULT_TOLERANCE);
    let mut tc = Tracker::new("disk_expansion_second", DEFAULT_TOLERANCE);
    let mut td = Tracker::new("disk_expansion_sixth", DEFAULT_TOLERANCE);
    let mut points = vec![Complex64::new(0.0, 0.0)];
    points.extend(disk_points(samples.saturating_sub(1), expansion_radius()));
    for w in points {
        let w3 = w * w * w;
        let w6 = w.norm().powi(6);
        match g_disk(w) {
            Ok(g) => {
                let model = g0 - 6.0 * (1.0 - w.norm_sqr()).ln() - c3 * w3.re;
                ta.check(w, (g - model).abs(), 216.0 * w6);
            }
            Err(_) => ta.fail(w),
        }
        let Ok(hw) = inversion::h_hat(w) else {
            tb.fail(w);
            tc.fail(w);
            td.fail(w);
            continue;
        };
        let coeffs = taylor_coefficients(
            |z| inversion::h_hat(z).ok().map(|h| (h / hw).ln()),
            w,
            0.05,
            256,
            6,
        );
        let Some(cf) = coeffs else {
            tb.fail(w);
            tc.fail(w);
            td.fail(w);
            continue;
        };
        let d1 = cf[1];
        let d2 = cf[2] * 2.0;
        tb.check(w, (d1 * w - 3.0 * c3 * w3).norm(), 1296.0 * w6);
        tc.check(w, (d2 * w * w - 6.0 * c3 * w3).norm(), 5.0 * 1296.0 * w6);
        td.check(w, cf[6].norm(), 216.0);
    }
    vec![ta.finish(), tb.finish(), tc.finish(), td.finish()]
}

/// The Koebe estimates for `f0` at sampled `|z| <= 0.95`.
pub fn verify_koebe(samples: usize) -> CertificateReport {
    let mut t = Tracker::new("koebe_distortion", DEFAULT_TOLERANCE);
    for z in disk_points(samples, 0.95) {
        let m = z.norm();
        let (Ok(kb), Ok((v, d, d2))) = (koebe_bounds(m), f0(z)) else {
            t.fail(z);
            continue;
        };
        t.check(z, kb.value_lower, v.norm());
        t.check(z, v.norm(), kb.value_upper);
        t.check(z, kb.derivative_lower, d.norm());
        t.check(z, d.norm(), kb.derivative_upper);
        t.check(z, (v - z).norm(), kb.identity_deviation);
        if m > 0.0 {
            let ld = z * d / v;
            t.check(z, ld.norm(), kb.log_derivative_upper);
            t.check(z, (ld - 1.0).norm(), kb.log_derivative_deviation);
            t.check(z, (z * d2 / d - kb.second_center).norm(), kb.second_radius);
        }
    }
    t.finish()
}

/// Closed forms at `rho` and `i` against the series.
pub fn verify_special_values() -> CertificateReport {
    let mut t = Tracker::new("special_values", 0.0);
    let rho = TauPoint::rho();
    let p = rho.to_complex();
    let ev = |k| modular::eisenstein(k, rho).map(|e| e.value);
    let rel = |a: Complex64, b: f64| (a - b).norm() / b.abs().max(1.0);
    match (ev(EisensteinKind::E2), ev(EisensteinKind::E4), ev(EisensteinKind::E6), modular::delta(rho)) {
        (Ok(e2), Ok(e4), Ok(e6), Ok(d)) => {
            t.check(p, rel(e2, special::e2_rho()), 1e-13);
            t.check(p, e4.norm(), 1e-13);
            t.check(p, rel(e6, special::e6_rho()), 1e-13);
            t.check(p, (d.value - special::delta_rho()).norm() / special::delta_rho().abs(), 1e-12);
        }
        _ => t.fail(p),
    }
    match modular::eisenstein(EisensteinKind::E2Star, TauPoint::i()) {
        Ok(e) => t.check(Complex64::new(0.0, 1.0), e.value.norm(), 1e-12),
        Err(_) => t.fail(Complex64::new(0.0, 1.0)),
    }
    match modular::g_infinity(rho) {
        Ok(g) => t.check(p, (g / 12.0 - special::height_at_zero()).abs(), 1e-12),
        Err(_) => t.fail(p),
    }
    // j'''(rho) = 6 * (third Taylor coefficient of j at rho).
    let jc = taylor_coefficients(
        |x| TauPoint::from_complex(x).ok().and_then(|tx| modular::j_invariant(tx).ok()),
        p,
        0.05,
        128,
        3,
    );
    match jc {
        Some(c) => {
            let j3 = c[3] * 6.0;
            let e = special::j_third_derivative_rho();
            t.check(p, (j3 - e).norm() / e.norm(), 1e-9);
        }
        None => t.fail(p),
    }
    t.finish()
}

/// Cusp estimates: the `g_inf` truncation error, `|j| <= 4 e^{2 pi y}` for
/// `y >= 1`, `|j(x+i)| <= 1728`, and the disk radius of the low part of the
/// fundamental domain.
pub fn verify_cusp_estimates(samples: usize) -> CertificateReport {
    let mut t = Tracker::new("cusp_estimates", DEFAULT_TOLERANCE);
    let c = 24.0 / ((2.0 * PI).exp() - 2.0);
    let ylow = 19f64.ln() / PI;
    for i in 0..samples as u64 {
        let (a, b) = halton2(i);
        let x = a - 0.5;
        let y = 1.0 + 4.0 * b;
        let tau = TauPoint { re: x, im: y };
        let z = tau.to_complex();
        match (modular::g_infinity(tau), modular::j_invariant(tau)) {
            (Ok(g), Ok(j)) => {
                let approx = 2.0 * PI * y - 6.0 * y.ln() - 6.0 * (4.0 * PI).ln();
                t.check(z, (g - approx).abs(), c);
                t.check(z, j.norm(), 4.0 * (2.0 * PI * y).exp());
            }
            _ => t.fail(z),
        }
        let edge = TauPoint { re: x, im: 1.0 };
        match modular::j_invariant(edge) {
            Ok(j) => t.check(edge.to_complex(), j.norm(), 1728.0 * (1.0 + 1e-14)),
            Err(_) => t.fail(edge.to_complex()),
        }
        // Low region of the fundamental domain, |Re| <= 1/2 and |tau| >= 1.
        let yl = (1.0 - x * x).sqrt() + b * (ylow - (1.0 - x * x).sqrt());
        let low = TauPoint { re: x, im: yl.max(1e-3) };
        if low.is_reduced(0.0) {
            let w = inversion::psi_inverse(low);
            let w = if low.re < 0.0 {
                inversion::psi_inverse(TauPoint { re: low.re + 1.0, im: low.im })
                    .norm()
                    .min(w.norm())
            } else {
                w.norm()
            };
            t.check(low.to_complex(), w, expansion_radius());
        }
    }
    t.finish()
}

/// `g_1(j_D(w)) >= g_1(j_D(|w|))` on the expansion disk.
pub fn verify_radial_minimization(samples: usize) -> CertificateReport {
    let mut t = Tracker::new("radial_minimization", 1e-12);
    for w in disk_points(samples, expansion_radius()) {
        if w.norm() < 1e-3 {
            continue;
        }
        match (
            inversion::g_one_disk(w),
            inversion::g_one_disk(Complex64::new(w.norm(), 0.0)),
        ) {
            (Ok(a), Ok(b)) => t.check(w, b, a),
            _ => t.fail(w),
        }
    }
    t.finish()
}

/// Second differences of `V(r) = g_1(j_D(r))` are at least `h^2/2`.
pub fn verify_radial_convexity(points: usize) -> CertificateReport {
    let mut t = Tracker::new("radial_convexity", 0.0);
    let rmax = expansion_radius();
    let h = rmax / points as f64;
    let v: Vec<Option<f64>> = (1..=points)
        .map(|k| inversion::g_one_disk(Complex64::new(k as f64 * h, 0.0)).ok())
        .collect();
    for k in 1..v.len() - 1 {
        let r = Complex64::new((k + 1) as f64 * h, 0.0);
        match (v[k - 1], v[k], v[k + 1]) {
            (Some(a), Some(b), Some(c)) => t.check(r, 0.5 * h * h, a - 2.0 * b + c),
            _ => t.fail(r),
        }
    }
    t.finish()
}

/// Every certificate at its default sample count.
pub fn verify_all() -> Vec<CertificateReport> {
    let mut v = vec![verify_constants(), verify_f_prime_zero(), verify_special_values()];
    v.push(verify_linear_model(10_000));
    v.push(verify_radius_bracket(500));
    v.extend(verify_unit_circle_chart(2000));
    v.push(verify_log_derivative_growth(200));
    v.extend(verify_approximation(200));
    v.push(verify_koebe(100));
    v.push(verify_cusp_estimates(500));
    v.push(verify_radial_minimization(500));
    v.push(verify_radial_convexity(200));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_closed_forms() {
        let c = constants();
        assert!((c.r0 - 0.2679491924311228).abs() < 1e-15);
        assert!((c.f_prime_0 - 237698.411625786).abs() < 1e-6);
        assert!(c.eps1 >= 1.0 / 4573.0 && c.eps1 <= 1.0 / 4572.0);
    }

    #[test]
    fn koebe_at_one_half() {
        let k = koebe_bounds(0.5).unwrap();
        assert!((k.value_lower - 2.0 / 9.0).abs() < 1e-15);
        assert!((k.value_upper - 2.0).abs() < 1e-15);
        assert!(koebe_bounds(1.0).is_err());
    }

    #[test]
    fn radius_bracket_domain() {
        assert!(radius_bracket(0.0).is_err());
        assert!(radius_bracket(1728.0).is_err());
        let b = radius_bracket(1.0).unwrap();
        assert!(0.0 < b.r_minus && b.r_minus <= b.r_plus && b.r_plus < r0());
    }
}
