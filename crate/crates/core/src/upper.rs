//! Upper bounds for the essential minimum from averages of `g_hyp` over
//! circles `|zeta - a| = 1`, which have capacity one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distortion::{cubic_coefficient, radius_bracket};
use crate::error::{Error, Result};
use crate::inversion::{f_prime_zero, g_hyp, h_hat, invert_j, r0};
use crate::modular::special::height_at_zero;
use crate::optimize::golden_section;

pub const DEFAULT_NODES: usize = 4096;
pub const MAX_NODES: usize = 1 << 16;
pub const DOUBLING_TOLERANCE: f64 = 1e-10;
/// Node count used inside the center search.
const SEARCH_NODES: usize = 1024;

/// `zeta'(-1)` to 30 digits.
pub const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_929_213_919_660_242_8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub center: f64,
    /// `(1/12) int_0^1 g_hyp(center + e^{2 pi i t}) dt`.
    pub value: f64,
    pub nodes: usize,
    /// Change of `value` in the last node doubling.
    pub node_doubling_delta: f64,
    /// Whether the doubling tolerance was met before the node cap.
    pub converged: bool,
}

fn circle_point(center: f64, t: f64) -> Complex64 {
    Complex64::new(center, 0.0) + Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// Sum of `f` over `t = (k + shift)/n` for `k` in `0..n`, using `f(t) = f(1-t)`.
/// `shift` is 0 (endpoint rule) or 1/2 (midpoint rule); `n` must be even.
fn symmetric_sum<F>(n: usize, shift: f64, f: &F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let half = n / 2;
    let (ks, weight): (Vec<usize>, fn(usize, usize) -> f64) = if shift == 0.0 {
        ((0..=half).collect(), |k, h| if k == 0 || k == h { 1.0 } else { 2.0 })
    } else {
        ((0..half).collect(), |_, _| 2.0)
    };
    let vals: Vec<f64> = ks
        .par_iter()
        .map(|&k| f((k as f64 + shift) / n as f64))
        .collect::<Result<_>>()?;
    Ok(ks.iter().zip(&vals).map(|(&k, v)| weight(k, half) * v).sum::<f64>() / n as f64)
}

/// Refines the periodic trapezoid rule by halving the spacing until two
/// successive values agree to `tol` or `MAX_NODES` is hit.
/// Returns `(value, nodes, delta, converged)`.
fn doubling_trapezoid<F>(nodes: usize, tol: f64, f: F) -> Result<(f64, usize, f64, bool)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut n = nodes.max(16).next_power_of_two();
    let mut value = symmetric_sum(n, 0.0, &f)?;
    loop {
        let mid = symmetric_sum(n, 0.5, &f)?;
        let next = 0.5 * (value + mid);
        let delta = (next - value).abs();
        value = next;
        n *= 2;
        if delta < tol || n >= MAX_NODES {
            return Ok((value, n, delta, delta < tol));
        }
    }
}

/// Average of `g_hyp/12` over the unit circle around `center` with node
/// doubling from `nodes`.
pub fn circle_integral(center: f64, nodes: usize) -> Result<UpperBoundReport> {
    circle_integral_with_tolerance(center, nodes, DOUBLING_TOLERANCE)
}

pub fn circle_integral_with_tolerance(center: f64, nodes: usize, tol: f64) -> Result<UpperBoundReport> {
    if !center.is_finite() {
        return Err(Error::Domain(format!("center {center} is not finite")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let (value, nodes, delta, converged) =
        doubling_trapezoid(nodes, tol, |t| Ok(g_hyp(circle_point(center, t))? / 12.0))?;
    Ok(UpperBoundReport { center, value, nodes, node_doubling_delta: delta, converged })
}

/// A single trapezoid rule with exactly `nodes` nodes.
pub fn circle_integral_fixed(center: f64, nodes: usize) -> Result<f64> {
    let n = nodes.max(16) & !1;
    symmetric_sum(n, 0.0, &|t| Ok(g_hyp(circle_point(center, t))? / 12.0))
}

/// The cube `w^3` of the canonical disk preimage, i.e. `f^{-1}(zeta)`.
fn chart_cube(zeta: Complex64) -> Result<Complex64> {
    let w = invert_j(zeta)?
        .w
        .ok_or_else(|| Error::Domain(format!("{zeta} has no disk preimage")))?;
    Ok(w * w * w)
}

/// Checks that `t -> f^{-1}(center + e^{2 pi i t})` moves no faster than the
/// Koebe lower bound on `|f'|` allows between consecutive nodes.
fn check_branch(center: f64, n: usize) -> Result<()> {
    let ts: Vec<f64> = (0..=n / 2).map(|k| k as f64 / n as f64).collect();
    let us: Vec<Complex64> = ts
        .par_iter()
        .map(|&t| chart_cube(circle_point(center, t)))
        .collect::<Result<_>>()?;
    let r03 = r0().powi(3);
    let s = us.iter().map(|u| u.norm()).fold(0.0, f64::max) / r03;
    if s >= 1.0 {
        return Err(Error::BranchTracking(format!("preimage left the chart disk at center {center}")));
    }
    let min_derivative = f_prime_zero() * (1.0 - s) / (1.0 + s).powi(3);
    let step = 2.0 * (PI / n as f64).sin();
    for k in 1..us.len() {
        let jump = (us[k] - us[k - 1]).norm();
        if jump > step / min_derivative * (1.0 + 1e-6) + 1e-15 {
            return Err(Error::BranchTracking(format!(
                "preimage jumps by {jump:e} between t = {} and t = {}",
                ts[k - 1],
                ts[k]
            )));
        }
    }
    Ok(())
}

/// The same average through `-log(1728 pi^6) - log|h(s_a)| - 6 int log(1-|w_a|^2)`,
/// where `j_D(s_a) = a` and `w_a(t)` is the canonical preimage of
/// `a + e^{2 pi i t}`. Valid for `center` in `(0, 2)`.
pub fn circle_integral_hhat(center: f64, nodes: usize) -> Result<f64> {
    if !(center > 0.0 && center < 2.0) {
        return Err(Error::Domain(format!("center {center} outside (0, 2)")));
    }
    let s_a = invert_j(Complex64::new(center, 0.0))?
        .w
        .map(|w| w.norm())
        .ok_or_else(|| Error::Domain("center has no disk preimage".into()))?;
    let log_h = h_hat(Complex64::new(s_a, 0.0))?.norm().ln();
    let (integral, n, _, _) = doubling_trapezoid(nodes, DOUBLING_TOLERANCE, |t| {
        let w = invert_j(circle_point(center, t))?
            .w
            .ok_or_else(|| Error::Domain("circle point has no disk preimage".into()))?;
        Ok((1.0 - w.norm_sqr()).ln())
    })?;
    check_branch(center, n.min(DEFAULT_NODES))?;
    Ok((-(1728.0 * PI.powi(6)).ln() - log_h - 6.0 * integral) / 12.0)
}

fn r_plus_or_zero(alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        Ok(0.0)
    } else {
        Ok(radius_bracket(alpha)?.r_plus)
    }
}

/// Closed-form relaxation of the circle average by the radius brackets and
/// the sixth-order Taylor remainder of `log h`:
/// `(1/12)[g_D(0) - f'(0)/13824 r_-(a)^3 + 6^3 r_+(a)^6 - 6 int log(1 - r_+(|a+e^{2 pi i t}|)^2) dt]`.
/// Always at least `circle_integral(center)`.
pub fn certified_circle_bound(center: f64) -> Result<f64> {
    if !(center > 0.0 && center < 2.0) {
        return Err(Error::Domain(format!("center {center} outside (0, 2)")));
    }
    let b = radius_bracket(center)?;
    let g0 = 12.0 * height_at_zero();
    let (integral, _, _, _) = doubling_trapezoid(MAX_NODES / 4, DOUBLING_TOLERANCE, |t| {
        let r = r_plus_or_zero(circle_point(center, t).norm())?;
        Ok((1.0 - r * r).ln())
    })?;
    Ok((g0 - cubic_coefficient() * b.r_minus.powi(3) + 216.0 * b.r_plus.powi(6) - 6.0 * integral) / 12.0)
}

/// Golden-section search for the best center in `[lo, hi]`, followed by a
/// full-accuracy evaluation there.
pub fn optimize_center(lo: f64, hi: f64) -> Result<UpperBoundReport> {
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid center range [{lo}, {hi}]")));
    }
    let mut failure = None;
    let (c, _, _) = golden_section(
        |c| match circle_integral_fixed(c, SEARCH_NODES) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        1e-5,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    // The search only converges to an interior point; compare the ends.
    let mut best = c;
    let mut best_v = circle_integral_fixed(c, SEARCH_NODES)?;
    for e in [lo, hi] {
        let v = circle_integral_fixed(e, SEARCH_NODES)?;
        if v < best_v {
            best = e;
            best_v = v;
        }
    }
    circle_integral(best, DEFAULT_NODES)
}

/// `6 (zeta(-1)/2 + zeta'(-1))`, the arithmetic self-intersection constant
/// bounding the essential minimum from below.
pub fn zhang_bound() -> f64 {
    6.0 * (-1.0 / 24.0 + ZETA_PRIME_MINUS_ONE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zhang_constant() {
        assert!((zhang_bound() + 1.242_526_862_2).abs() < 1e-9);
    }

    #[test]
    fn hhat_formula_matches_direct_average() {
        let direct = circle_integral(0.5, 1024).unwrap();
        let via_h = circle_integral_hhat(0.5, 1024).unwrap();
        assert!((direct.value - via_h).abs() < 1e-9, "{} {}", direct.value, via_h);
    }
}
