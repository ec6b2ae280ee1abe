//! Modular forms on the upper half-plane: reduction to the standard fundamental
//! domain, Eisenstein series, the discriminant, Klein's j and the Green
//! function `g_inf` of the cusp.
//!
//! Every series is summed at the reduced representative of `tau`, where
//! `|q| <= exp(-pi*sqrt(3))`, and then carried back with the automorphy factor.
//! This keeps the truncation under 40 terms everywhere in the half-plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gamma(1/3) to 30 significant digits.
pub const GAMMA_ONE_THIRD_DIGITS: &str = "2.67893853470774763365569294097";
/// Gamma(1/3) rounded to binary64.
pub const GAMMA_ONE_THIRD: f64 = 2.678_938_534_707_747_6;

/// Hard cap on the number of q-terms.
pub const MAX_Q_TERMS: usize = 40;
/// Summation stops once every certified tail is below this.
const TAIL_STOP: f64 = 1e-18;
/// Iteration cap for the reduction loop.
pub const MAX_REDUCTION_STEPS: usize = 10_000;
const BOUNDARY_EPS: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauPoint {
    pub re: f64,
    pub im: f64,
}

impl TauPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() || im <= 0.0 {
            return Err(Error::Domain(format!(
                "tau = {re} + {im}i is not in the upper half-plane"
            )));
        }
        Ok(TauPoint { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// The corner `exp(pi i / 3)` of the fundamental domain.
    pub fn rho() -> Self {
        TauPoint { re: 0.5, im: 0.75f64.sqrt() }
    }

    pub fn i() -> Self {
        TauPoint { re: 0.0, im: 1.0 }
    }

    /// Membership in the closed fundamental domain, up to `eps`.
    pub fn is_reduced(self, eps: f64) -> bool {
        self.re.abs() <= 0.5 + eps && self.re * self.re + self.im * self.im >= 1.0 - eps
    }
}

/// An element of SL2(Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub const IDENTITY: Self = UnimodularMatrix { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Self = UnimodularMatrix { a: 0, b: -1, c: 1, d: 0 };

    pub fn translation(n: i64) -> Self {
        UnimodularMatrix { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Moebius action.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }

    /// `c*z + d`.
    pub fn automorphy(&self, z: Complex64) -> Complex64 {
        z * self.c as f64 + self.d as f64
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Matrix product `self * rhs`, `None` on overflow.
    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        let f = |x: i64, y: i64, u: i64, v: i64| x.checked_mul(y)?.checked_add(u.checked_mul(v)?);
        Some(UnimodularMatrix {
            a: f(self.a, rhs.a, self.b, rhs.c)?,
            b: f(self.a, rhs.b, self.b, rhs.d)?,
            c: f(self.c, rhs.a, self.d, rhs.c)?,
            d: f(self.c, rhs.b, self.d, rhs.d)?,
        })
    }
}

/// Moves `tau` into the closed fundamental domain
/// `{|Re| <= 1/2, |tau| >= 1}`.
///
/// Returns `(tau', gamma)` with `gamma * tau = tau'`. Boundary points are
/// normalised to `Re tau' > -1/2` and, on the unit arc, to `Re tau' >= 0`.
pub fn reduce_to_fundamental_domain(tau: TauPoint) -> Result<(TauPoint, UnimodularMatrix)> {
    TauPoint::new(tau.re, tau.im)?;
    let mut z = tau.to_complex();
    let mut m = UnimodularMatrix::IDENTITY;
    let overflow = || Error::NonConvergence("reduction matrix overflowed i64".into());
    for _ in 0..MAX_REDUCTION_STEPS {
        let n = (z.re + 0.5).floor();
        if n != 0.0 {
            z.re -= n;
            m = UnimodularMatrix::translation(-(n as i64))
                .checked_mul(&m)
                .ok_or_else(overflow)?;
        }
        if z.norm_sqr() < 1.0 - BOUNDARY_EPS {
            z = -z.inv();
            m = UnimodularMatrix::S.checked_mul(&m).ok_or_else(overflow)?;
            continue;
        }
        if z.re < -0.5 + BOUNDARY_EPS {
            z.re += 1.0;
            m = UnimodularMatrix::translation(1).checked_mul(&m).ok_or_else(overflow)?;
        }
        if z.norm_sqr() < 1.0 + BOUNDARY_EPS && z.re < 0.0 {
            z = -z.inv();
            m = UnimodularMatrix::S.checked_mul(&m).ok_or_else(overflow)?;
        }
        return Ok((TauPoint { re: z.re, im: z.im }, m));
    }
    Err(Error::NonConvergence(format!(
        "reduction of {} + {}i did not finish in {MAX_REDUCTION_STEPS} steps",
        tau.re, tau.im
    )))
}

/// Which Eisenstein series to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EisensteinKind {
    E2,
    E4,
    E6,
    /// The non-holomorphic weight-2 form `E2 - 3/(pi Im tau)`.
    E2Star,
}

/// A truncated series value with a certified bound on the dropped tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSeriesEval {
    pub value: Complex64,
    pub truncation_order: usize,
    pub tail_bound: f64,
}

/// Partial sums at a single nome.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QSums {
    /// `sum m^k q^m/(1-q^m)` for k = 1, 3, 5.
    pub s1: Complex64,
    pub s3: Complex64,
    pub s5: Complex64,
    /// `prod (1 - q^m)`.
    pub prod: Complex64,
    pub log_abs_prod: f64,
    pub order: usize,
    /// Tail bounds for s1, s3, s5 and for `sum |log(1-q^m)|`.
    pub tails: [f64; 4],
}

fn lambert_tail(x: f64, n: usize, k: i32) -> f64 {
    let n1 = (n + 1) as f64;
    let ratio = x * ((n1 + 1.0) / n1).powi(k);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let xn1 = x.powf(n1);
    n1.powi(k) * xn1 / ((1.0 - ratio) * (1.0 - xn1))
}

pub(crate) fn q_sums(q: Complex64, max_terms: usize) -> QSums {
    let x = q.norm();
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s3 = s1;
    let mut s5 = s1;
    let mut prod = Complex64::new(1.0, 0.0);
    let mut log_abs_prod = 0.0;
    let mut qm = Complex64::new(1.0, 0.0);
    let mut order = 0;
    let mut tails = [f64::INFINITY; 4];
    for m in 1..=max_terms {
        qm *= q;
        let one_minus = Complex64::new(1.0, 0.0) - qm;
        let t = qm / one_minus;
        let mf = m as f64;
        let m2 = mf * mf;
        s1 += t * mf;
        s3 += t * (m2 * mf);
        s5 += t * (m2 * m2 * mf);
        prod *= one_minus;
        log_abs_prod += one_minus.norm().ln();
        order = m;
        let xn1 = x.powf(mf + 1.0);
        let log_tail = xn1 / ((1.0 - x) * (1.0 - xn1));
        tails = [
            lambert_tail(x, m, 1),
            lambert_tail(x, m, 3),
            lambert_tail(x, m, 5),
            log_tail,
        ];
        if 504.0 * tails[2] <= TAIL_STOP && 24.0 * tails[3] <= TAIL_STOP {
            break;
        }
    }
    QSums { s1, s3, s5, prod, log_abs_prod, order, tails }
}

/// `exp(2 pi i tau)`.
pub fn nome(tau: Complex64) -> Complex64 {
    let r = (-2.0 * PI * tau.im).exp();
    let a = 2.0 * PI * tau.re;
    Complex64::new(r * a.cos(), r * a.sin())
}

/// Everything the higher layers need at one point, already transformed back
/// from the reduced representative to `tau`.
#[derive(Clone, Copy, Debug)]
pub struct Forms {
    pub tau: TauPoint,
    pub reduced: TauPoint,
    pub matrix: UnimodularMatrix,
    pub e2: Complex64,
    pub e2star: Complex64,
    pub e4: Complex64,
    pub e6: Complex64,
    pub delta: Complex64,
    /// `g_inf` is invariant, so it is the same at `tau` and its reduction.
    pub g_inf: f64,
    pub order: usize,
    /// Tail bounds for E2, E4, E6, Delta and `g_inf`, already rescaled.
    pub tails: [f64; 5],
}

impl Forms {
    pub fn j(&self) -> Complex64 {
        self.e4 * self.e4 * self.e4 / self.delta
    }

    /// `dj/dtau = -2 pi i E4^2 E6 / Delta`.
    pub fn j_prime(&self) -> Complex64 {
        -2.0 * PI * I * self.e4 * self.e4 * self.e6 / self.delta
    }

    /// `d g_inf = -pi i E2*`, the Wirtinger derivative.
    pub fn dg_inf(&self) -> Complex64 {
        -PI * I * self.e2star
    }
}

/// Evaluates all forms at `tau`.
pub fn forms(tau: TauPoint) -> Result<Forms> {
    let (red, m) = reduce_to_fundamental_domain(tau)?;
    let tr = red.to_complex();
    let q = nome(tr);
    let s = q_sums(q, MAX_Q_TERMS);
    let y = red.im;
    let e2r = 1.0 - 24.0 * s.s1;
    let e4r = 1.0 + 240.0 * s.s3;
    let e6r = 1.0 - 504.0 * s.s5;
    let p2 = s.prod * s.prod;
    let p4 = p2 * p2;
    let p8 = p4 * p4;
    let p24 = p8 * p8 * p8;
    let dr = q * p24;
    let e2sr = e2r - 3.0 / (PI * y);
    let g_inf = 2.0 * PI * y - 6.0 * y.ln() - 6.0 * (4.0 * PI).ln() - 24.0 * s.log_abs_prod;

    let t = tau.to_complex();
    let fac = m.automorphy(t);
    let f2 = fac * fac;
    let f4 = f2 * f2;
    let f6 = f4 * f2;
    let f12 = f6 * f6;
    let e2star = e2sr / f2;
    let a = fac.norm();
    let dtail = dr.norm() * ((24.0 * s.tails[3]).exp_m1());
    Ok(Forms {
        tau,
        reduced: red,
        matrix: m,
        e2: e2star + 3.0 / (PI * tau.im),
        e2star,
        e4: e4r / f4,
        e6: e6r / f6,
        delta: dr / f12,
        g_inf,
        order: s.order,
        tails: [
            24.0 * s.tails[0] / a.powi(2),
            240.0 * s.tails[1] / a.powi(4),
            504.0 * s.tails[2] / a.powi(6),
            dtail / a.powi(12),
            24.0 * s.tails[3],
        ],
    })
}

/// Eisenstein series at any point of the upper half-plane.
pub fn eisenstein(kind: EisensteinKind, tau: TauPoint) -> Result<QSeriesEval> {
    let f = forms(tau)?;
    let (value, tail) = match kind {
        EisensteinKind::E2 => (f.e2, f.tails[0]),
        EisensteinKind::E2Star => (f.e2star, f.tails[0]),
        EisensteinKind::E4 => (f.e4, f.tails[1]),
        EisensteinKind::E6 => (f.e6, f.tails[2]),
    };
    Ok(QSeriesEval { value, truncation_order: f.order, tail_bound: tail })
}

/// The discriminant `q prod (1-q^n)^24`.
pub fn delta(tau: TauPoint) -> Result<QSeriesEval> {
    let f = forms(tau)?;
    Ok(QSeriesEval { value: f.delta, truncation_order: f.order, tail_bound: f.tails[3] })
}

/// Klein's j, normalised so that `j(i) = 1728`.
pub fn j_invariant(tau: TauPoint) -> Result<Complex64> {
    Ok(forms(tau)?.j())
}

/// `dj/dtau` at `tau` itself (not at its reduction).
pub fn j_derivative(tau: TauPoint) -> Result<Complex64> {
    Ok(forms(tau)?.j_prime())
}

/// `g_inf(tau) = -log((4 pi Im tau)^6 |Delta(tau)|)`.
pub fn g_infinity(tau: TauPoint) -> Result<f64> {
    Ok(forms(tau)?.g_inf)
}

/// Wirtinger derivative `d g_inf = -pi i E2*(tau)`.
pub fn dg_infinity(tau: TauPoint) -> Result<Complex64> {
    Ok(forms(tau)?.dg_inf())
}

/// E4, E6 and Delta straight from a nome with `|q| < 1/2`, no reduction.
pub(crate) fn forms_from_q(q: Complex64) -> (Complex64, Complex64, Complex64) {
    let s = q_sums(q, 400);
    let p2 = s.prod * s.prod;
    let p4 = p2 * p2;
    let p8 = p4 * p4;
    let dl = q * p8 * p8 * p8;
    (1.0 + 240.0 * s.s3, 1.0 - 504.0 * s.s5, dl)
}

/// E4, E6 and `eta^12` at `tau` without reduction. Only sensible for
/// `Im tau` bounded away from zero.
pub(crate) fn e4_e6_eta12_direct(tau: Complex64) -> (Complex64, Complex64, Complex64) {
    let q = nome(tau);
    let s = q_sums(q, 400);
    let p2 = s.prod * s.prod;
    let p4 = p2 * p2;
    let p12 = p4 * p4 * p4;
    let r = (-PI * tau.im).exp();
    let a = PI * tau.re;
    let half_q = Complex64::new(r * a.cos(), r * a.sin());
    (1.0 + 240.0 * s.s3, 1.0 - 504.0 * s.s5, half_q * p12)
}

/// Closed forms at the elliptic points.
pub mod special {
    use super::*;

    pub fn rho() -> Complex64 {
        TauPoint::rho().to_complex()
    }

    pub fn e2_rho() -> f64 {
        2.0 * 3f64.sqrt() / PI
    }

    pub fn e6_rho() -> f64 {
        27.0 / 512.0 * GAMMA_ONE_THIRD.powi(18) / PI.powi(12)
    }

    pub fn delta_rho() -> f64 {
        -27.0 / 16_777_216.0 * GAMMA_ONE_THIRD.powi(36) / PI.powi(24)
    }

    /// Third derivative of j at rho.
    pub fn j_third_derivative_rho() -> Complex64 {
        Complex64::new(0.0, -PI.powi(3) * 1024.0 * 3.0 * e6_rho())
    }

    /// `E2(i) = 3/pi`.
    pub fn e2_i() -> f64 {
        3.0 / PI
    }

    /// The height of the curve with j = 0, i.e. `g_inf(rho)/12`.
    pub fn height_at_zero() -> f64 {
        let g6 = GAMMA_ONE_THIRD.powi(6);
        -0.5 * (3.0 / (2.0 * PI).powi(3) * g6).ln()
    }
}
