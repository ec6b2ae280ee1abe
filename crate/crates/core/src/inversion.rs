//! The disk chart centred at `rho` and the inverse of Klein's j.
//!
//! `psi(w) = (conj(rho) w + rho)/(w + 1)` sends the unit disk onto the upper
//! half-plane with `psi(0) = rho`. In this chart `j(psi(w)) = f(w^3)` with `f`
//! univalent on `|u| < r0^3`, `r0 = 2 - sqrt(3)`, and `f(0) = 0`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{self, forms, Forms, TauPoint, GAMMA_ONE_THIRD};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Above this modulus the inversion works in the nome.
pub const CUSP_THRESHOLD: f64 = 3000.0;
/// Below this modulus the cube-root chart is tried first.
const DISK_THRESHOLD: f64 = 600.0;
/// Radius around 1728 handled by the square-root chart.
const DOUBLE_POINT_RADIUS: f64 = 400.0;
const NEWTON_CAP: usize = 60;
const SEED_GRID: usize = 64;

/// `2 - sqrt(3)`, the radius where the chart stops being 3-to-1 onto a
/// neighbourhood of 0.
pub fn r0() -> f64 {
    2.0 - 3f64.sqrt()
}

pub fn rho() -> Complex64 {
    modular::special::rho()
}

/// `f'(0) = (sqrt(3)/pi * Gamma(1/3)^2)^9`.
pub fn f_prime_zero() -> f64 {
    (3f64.sqrt() / PI * GAMMA_ONE_THIRD * GAMMA_ONE_THIRD).powi(9)
}

fn check_disk(w: Complex64) -> Result<()> {
    if !(w.norm() < 1.0) {
        return Err(Error::Domain(format!("w = {w} is not in the open unit disk")));
    }
    Ok(())
}

/// `psi(w)`, defined for `|w| < 1`.
pub fn psi(w: Complex64) -> Result<TauPoint> {
    check_disk(w)?;
    let r = rho();
    TauPoint::from_complex((r.conj() * w + r) / (w + 1.0))
}

/// `psi^{-1}(tau) = -(tau - rho)/(tau - conj(rho))`.
pub fn psi_inverse(tau: TauPoint) -> Complex64 {
    let t = tau.to_complex();
    let r = rho();
    -(t - r) / (t - r.conj())
}

/// `psi'(w) = -i sqrt(3)/(1+w)^2`.
pub fn psi_derivative(w: Complex64) -> Complex64 {
    let s = w + 1.0;
    -I * 3f64.sqrt() / (s * s)
}

/// All modular quantities at `psi(w)`.
pub fn disk_forms(w: Complex64) -> Result<Forms> {
    forms(psi(w)?)
}

/// `j_D = j o psi`.
pub fn j_disk(w: Complex64) -> Result<Complex64> {
    Ok(disk_forms(w)?.j())
}

pub fn j_disk_derivative(w: Complex64) -> Result<Complex64> {
    Ok(disk_forms(w)?.j_prime() * psi_derivative(w))
}

/// `h(w) = Delta(psi(w))/(1+w)^12`, a nowhere-vanishing function invariant
/// under `w -> -rho w`.
pub fn h_hat(w: Complex64) -> Result<Complex64> {
    let f = disk_forms(w)?;
    Ok(f.delta / (w + 1.0).powi(12))
}

/// Logarithmic derivative `h'/h`, from `Delta'/Delta = 2 pi i E2`.
pub fn h_hat_log_derivative(w: Complex64) -> Result<Complex64> {
    let f = disk_forms(w)?;
    Ok(2.0 * PI * I * f.e2 * psi_derivative(w) - 12.0 / (w + 1.0))
}

/// `g_D = g_inf o psi = -log(1728 pi^6) - 6 log(1-|w|^2) - log|h(w)|`.
pub fn g_disk(w: Complex64) -> Result<f64> {
    Ok(disk_forms(w)?.g_inf)
}

/// The same function through its closed form in `h`.
pub fn g_disk_from_h(w: Complex64) -> Result<f64> {
    let h = h_hat(w)?;
    Ok(-(1728.0 * PI.powi(6)).ln() - 6.0 * (1.0 - w.norm_sqr()).ln() - h.norm().ln())
}

/// Wirtinger derivative of `g_D`.
pub fn dg_disk(w: Complex64) -> Result<Complex64> {
    Ok(disk_forms(w)?.dg_inf() * psi_derivative(w))
}

/// The cube root of `u` with argument in `[pi, 5 pi/3)`.
pub fn canonical_cbrt(u: Complex64) -> Complex64 {
    let m = u.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut a = u.arg();
    if a >= PI {
        a = -PI;
    }
    Complex64::from_polar(m.cbrt(), a / 3.0 + 4.0 * PI / 3.0)
}

/// Which chart produced an inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InversionMethod {
    /// Newton in the nome, for large `|zeta|`.
    Cusp,
    /// Newton in `u = w^3` in the disk chart, near `zeta = 0`.
    CubeRootChart,
    /// Newton on `E6/eta^12`, a square root of `j - 1728`.
    SquareRootChart,
    /// Newton in `tau` from a precomputed seed grid.
    GridNewton,
}

/// A preimage of `zeta` under j.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    /// Reduced representative in the fundamental domain.
    pub tau: TauPoint,
    /// Disk preimage of `zeta` on the branch `arg w in [pi, 5 pi/3)`, so that
    /// `psi(w)` is SL2(Z)-equivalent to `tau`. Present when `|zeta| <= 3000`.
    pub w: Option<Complex64>,
    /// `|j(tau) - zeta|`.
    pub residual: f64,
    pub method: InversionMethod,
}

/// Residual contract of [`invert_j`].
pub fn residual_tolerance(zeta: Complex64) -> f64 {
    1e-10 * zeta.norm().max(1.0)
}

/// `f(u)` and `f'(u)` where `j_D(w) = f(w^3)`; linear below `|u| = 1e-21`.
pub fn chart_map(u: Complex64) -> Result<(Complex64, Complex64)> {
    let fp0 = f_prime_zero();
    if u.norm() < 1e-21 {
        return Ok((u * fp0, Complex64::new(fp0, 0.0)));
    }
    let w = u.cbrt();
    let f = disk_forms(w)?;
    let jd = f.j_prime() * psi_derivative(w);
    Ok((f.j(), jd / (3.0 * w * w)))
}

/// Damped Newton for `F(z) = target`, with `eval` returning `(F, F')`.
///
/// Stops at residual `goal`; a stall is accepted when the residual is
/// already below `accept`.
fn newton<E>(
    mut z: Complex64,
    target: Complex64,
    goal: f64,
    accept: f64,
    admissible: impl Fn(Complex64) -> bool,
    eval: E,
) -> Result<Complex64>
where
    E: Fn(Complex64) -> Result<(Complex64, Complex64)>,
{
    let (mut fz, mut dz) = eval(z)?;
    for _ in 0..NEWTON_CAP {
        let res = (fz - target).norm();
        if res <= goal {
            return Ok(z);
        }
        if dz.norm() == 0.0 || !dz.is_finite() {
            break;
        }
        let step = (fz - target) / dz;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-4 {
            let zn = z - step * lambda;
            if admissible(zn) {
                if let Ok((fnew, dnew)) = eval(zn) {
                    if (fnew - target).norm() < res {
                        z = zn;
                        fz = fnew;
                        dz = dnew;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted || (step * lambda).norm() <= 1e-16 * z.norm() {
            break;
        }
    }
    if (fz - target).norm() <= accept {
        return Ok(z);
    }
    Err(Error::NonConvergence(format!("Newton stalled for target {target}")))
}

fn solve_cusp(zeta: Complex64) -> Result<TauPoint> {
    let tol = 1e-15 * zeta.norm();
    let q = newton(
        (zeta - 744.0).inv(),
        zeta,
        tol,
        1e-12 * zeta.norm(),
        |q| q.norm() < 0.1,
        |q| {
            let (e4, e6, d) = modular::forms_from_q(q);
            Ok((e4 * e4 * e4 / d, -e4 * e4 * e6 / (d * q)))
        },
    )?;
    // tau = log(q)/(2 pi i)
    let l = q.ln();
    TauPoint::new(l.im / (2.0 * PI), -l.re / (2.0 * PI))
}

fn solve_cube_root_chart(zeta: Complex64) -> Result<(TauPoint, Complex64)> {
    if zeta.norm() == 0.0 {
        return Ok((TauPoint::rho(), Complex64::new(0.0, 0.0)));
    }
    let r03 = r0().powi(3);
    let u = newton(
        zeta / f_prime_zero(),
        zeta,
        1e-15 * zeta.norm(),
        1e-12 * zeta.norm().max(1.0),
        |u| u.norm() < 0.999 * r03,
        chart_map,
    )?;
    let w = canonical_cbrt(u);
    Ok((psi(w)?, w))
}

fn solve_square_root_chart(zeta: Complex64) -> Result<TauPoint> {
    let s = (zeta - 1728.0).sqrt();
    let eval = |t: Complex64| -> Result<(Complex64, Complex64)> {
        let (e4, e6, eta12) = modular::e4_e6_eta12_direct(t);
        Ok((e6 / eta12, -PI * I * e4 * e4 / eta12))
    };
    let (_, d0) = eval(I)?;
    let t = newton(
        I + s / d0,
        s,
        1e-15 * s.norm().max(1.0),
        1e-12 * s.norm().max(1.0),
        |t| t.im > 0.6,
        eval,
    )?;
    TauPoint::from_complex(t)
}

fn seed_grid() -> &'static Vec<(Complex64, Complex64)> {
    static GRID: OnceLock<Vec<(Complex64, Complex64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        let mut out = Vec::with_capacity(SEED_GRID * SEED_GRID);
        let y0 = 0.75f64.sqrt();
        let y1 = 1.45;
        for a in 0..SEED_GRID {
            let x = -0.5 + a as f64 / (SEED_GRID - 1) as f64;
            for b in 0..SEED_GRID {
                let y = y0 + (y1 - y0) * b as f64 / (SEED_GRID - 1) as f64;
                let t = Complex64::new(x, y.max((1.0 - x * x).sqrt()));
                if let Ok(j) = modular::j_invariant(TauPoint { re: t.re, im: t.im }) {
                    out.push((t, j));
                }
            }
        }
        out
    })
}

fn solve_grid_newton(zeta: Complex64) -> Result<TauPoint> {
    let grid = seed_grid();
    let mut best = grid[0];
    for &p in grid.iter() {
        if (p.1 - zeta).norm() < (best.1 - zeta).norm() {
            best = p;
        }
    }
    let t = newton(
        best.0,
        zeta,
        1e-15 * zeta.norm().max(1.0),
        1e-12 * zeta.norm().max(1.0),
        |t| t.im > 0.3,
        |t| {
            let f = forms(TauPoint::from_complex(t)?)?;
            Ok((f.j(), f.j_prime()))
        },
    )?;
    TauPoint::from_complex(t)
}

/// Disk coordinate of minimal modulus among nearby orbit points, rotated onto
/// the branch `arg w in [pi, 5 pi/3)`.
fn canonical_w(tau: TauPoint) -> Complex64 {
    let t = tau.to_complex();
    let st = -t.inv();
    let mut best: Option<Complex64> = None;
    for base in [t, st] {
        for k in [-1.0, 0.0, 1.0] {
            let c = base + k;
            if c.im <= 0.0 {
                continue;
            }
            let w = psi_inverse(TauPoint { re: c.re, im: c.im });
            if best.map_or(true, |b| w.norm() < b.norm()) {
                best = Some(w);
            }
        }
    }
    let w = best.unwrap_or_else(|| psi_inverse(tau));
    canonical_cbrt(w * w * w)
}

fn finish(zeta: Complex64, tau: TauPoint, w: Option<Complex64>, method: InversionMethod) -> Result<(InversionResult, Forms)> {
    let f = forms(tau)?;
    let residual = (f.j() - zeta).norm();
    if !(residual <= residual_tolerance(zeta)) {
        return Err(Error::NonConvergence(format!(
            "inversion of {zeta} left residual {residual:e}"
        )));
    }
    let w = if zeta.norm() <= CUSP_THRESHOLD {
        Some(w.unwrap_or_else(|| canonical_w(f.reduced)))
    } else {
        None
    };
    let tau_red = f.reduced;
    let fr = if tau_red == tau { f } else { forms(tau_red)? };
    Ok((InversionResult { tau: tau_red, w, residual, method }, fr))
}

/// Inversion together with the forms at the reduced preimage.
pub fn invert_j_with_forms(zeta: Complex64) -> Result<(InversionResult, Forms)> {
    if !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(Error::Domain(format!("zeta = {zeta} is not finite")));
    }
    let n = zeta.norm();
    let methods: &[InversionMethod] = if n > CUSP_THRESHOLD {
        &[InversionMethod::Cusp, InversionMethod::GridNewton]
    } else if (zeta - 1728.0).norm() < DOUBLE_POINT_RADIUS {
        &[InversionMethod::SquareRootChart, InversionMethod::GridNewton]
    } else if n <= DISK_THRESHOLD {
        &[InversionMethod::CubeRootChart, InversionMethod::GridNewton]
    } else {
        &[InversionMethod::GridNewton, InversionMethod::CubeRootChart]
    };
    let mut last = None;
    for &m in methods {
        let attempt = match m {
            InversionMethod::Cusp => solve_cusp(zeta).map(|t| (t, None)),
            InversionMethod::CubeRootChart => {
                solve_cube_root_chart(zeta).map(|(t, w)| (t, Some(w)))
            }
            InversionMethod::SquareRootChart => solve_square_root_chart(zeta).map(|t| (t, None)),
            InversionMethod::GridNewton => solve_grid_newton(zeta).map(|t| (t, None)),
        };
        match attempt.and_then(|(t, w)| finish(zeta, t, w, m)) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::NonConvergence(format!("inversion of {zeta}"))))
}

/// Solves `j(tau) = zeta` with `tau` in the fundamental domain.
pub fn invert_j(zeta: Complex64) -> Result<InversionResult> {
    invert_j_with_forms(zeta).map(|r| r.0)
}

/// `g_hyp(zeta) = g_inf(tau)` for any preimage `tau` of `zeta`.
pub fn g_hyp(zeta: Complex64) -> Result<f64> {
    Ok(invert_j_with_forms(zeta)?.1.g_inf)
}

/// Wirtinger derivative of `g_hyp`, infinite at 0 and 1728.
pub fn dg_hyp(zeta: Complex64) -> Result<Complex64> {
    let (_, f) = invert_j_with_forms(zeta)?;
    Ok(f.dg_inf() / f.j_prime())
}

/// The real root `r1 in (0, r0)` of `j_D(r) = 1`.
pub fn r_one() -> Result<f64> {
    Ok(invert_j(ONE)?.w.map(|w| w.norm()).unwrap_or(0.0))
}

/// `d/dx g_hyp` at `zeta = 1`, from `2 Re(dg_D(r1)) / j_D'(r1)`.
pub fn dx_g_hyp_at_1() -> Result<f64> {
    static CACHE: OnceLock<f64> = OnceLock::new();
    if let Some(v) = CACHE.get() {
        return Ok(*v);
    }
    let r1 = Complex64::new(r_one()?, 0.0);
    let dg = dg_disk(r1)?;
    let jd = j_disk_derivative(r1)?;
    let v = 2.0 * dg.re / jd.re;
    Ok(*CACHE.get_or_init(|| v))
}

/// `g_1(zeta) = g_hyp(zeta) - dx g_hyp(1) log|zeta|`, minimal at `zeta = 1`.
pub fn g_one(zeta: Complex64) -> Result<f64> {
    Ok(g_hyp(zeta)? - dx_g_hyp_at_1()? * zeta.norm().ln())
}

/// `g_1 o j_D`, evaluated without any inversion.
pub fn g_one_disk(w: Complex64) -> Result<f64> {
    let f = disk_forms(w)?;
    Ok(f.g_inf - dx_g_hyp_at_1()? * f.j().norm().ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_round_trip() {
        let w = Complex64::new(0.1, -0.2);
        let t = psi(w).unwrap();
        assert!((psi_inverse(t) - w).norm() < 1e-15);
    }

    #[test]
    fn psi_of_minus_r0_rho_is_i() {
        let w = -r0() * rho();
        let t = psi(w).unwrap();
        assert!((t.to_complex() - I).norm() < 1e-14);
    }

    #[test]
    fn canonical_branch_sector() {
        for k in 0..12 {
            let u = Complex64::from_polar(0.3, k as f64 * 0.5 - 3.0);
            let w = canonical_cbrt(u);
            let mut a = w.arg();
            if a < 0.0 {
                a += 2.0 * PI;
            }
            assert!(a >= PI - 1e-12 && a < 5.0 * PI / 3.0 + 1e-12);
            assert!((w * w * w - u).norm() < 1e-14);
        }
    }

    #[test]
    fn inversion_of_zero_and_1728() {
        let r = invert_j(Complex64::new(0.0, 0.0)).unwrap();
        assert!((r.tau.to_complex() - rho()).norm() < 1e-15);
        assert_eq!(r.w, Some(Complex64::new(0.0, 0.0)));
        let r = invert_j(Complex64::new(1728.0, 0.0)).unwrap();
        assert!((r.tau.to_complex() - I).norm() < 1e-7);
    }

    #[test]
    fn cusp_inversion() {
        let z = Complex64::new(1e6, 3e5);
        let r = invert_j(z).unwrap();
        assert_eq!(r.method, InversionMethod::Cusp);
        assert!(r.w.is_none());
        assert!(r.residual <= residual_tolerance(z));
    }

    #[test]
    fn h_closed_form_matches_g() {
        for w in [Complex64::new(0.05, 0.02), Complex64::new(-0.2, 0.1)] {
            assert!((g_disk(w).unwrap() - g_disk_from_h(w).unwrap()).abs() < 1e-12);
        }
    }
}
