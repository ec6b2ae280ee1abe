//! Stable Faltings heights of elliptic curves with algebraic j-invariant.
//!
//! For a primitive `P = a prod (z - alpha_i)` of degree `d` the height of any
//! conjugate is `(1/12) [ (1/d) sum g_hyp(alpha_i) + (1/d) log|a| ]`.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distortion::constants;
use crate::error::{Error, Result};
use crate::inversion::{dx_g_hyp_at_1, g_hyp, invert_j_with_forms};
use crate::poly::{euler_phi, mobius, IntegerPolynomial};
use crate::roots::{find_roots, newton_correction};

/// Sampled accuracy of a single `g_hyp` evaluation.
const G_EVAL_ERROR: f64 = 1e-13;
/// Certified worst error of the affine model of `g_hyp` on the unit circle.
pub const LINEAR_MODEL_ERROR: f64 = 5e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightResult {
    /// `(1/d) sum g_hyp(alpha_i)`.
    pub archimedean: f64,
    /// `(1/d) log|a|`.
    pub finite: f64,
    /// `(archimedean + finite)/12`.
    pub total: f64,
    pub error_estimate: f64,
}

/// `g_hyp` with a first-order error estimate for a root known to within
/// `delta`.
fn g_with_error(z: Complex64, delta: f64) -> Result<(f64, f64)> {
    let (_, f) = invert_j_with_forms(z)?;
    let g = f.g_inf;
    let jp = f.j_prime().norm();
    let grad = 2.0 * f.dg_inf().norm() / jp;
    let prop = if jp > 1e-6 && grad.is_finite() {
        grad * delta
    } else {
        // Conic points of g_hyp: |dg| ~ |dzeta|^{1/3} or ^{1/2}.
        6.0 * delta.cbrt()
    };
    Ok((g, prop + G_EVAL_ERROR * (1.0 + g.abs())))
}

/// Height from an already computed root list.
pub fn height_from_roots(p: &IntegerPolynomial, roots: &[Complex64]) -> Result<HeightResult> {
    let d = p.degree() as f64;
    let mut sum = 0.0;
    let mut err = 0.0;
    let symmetric = roots.iter().all(|z| {
        z.im == 0.0 || roots.iter().any(|w| *w == z.conj())
    });
    for &z in roots {
        if symmetric && z.im < 0.0 {
            continue;
        }
        let weight = if symmetric && z.im > 0.0 { 2.0 } else { 1.0 };
        let (g, e) = g_with_error(z, newton_correction(p, z))?;
        sum += weight * g;
        err += weight * e;
    }
    let archimedean = sum / d;
    let finite = (p.leading() as f64).abs().ln() / d;
    Ok(HeightResult {
        archimedean,
        finite,
        total: (archimedean + finite) / 12.0,
        error_estimate: err / (12.0 * d) + 4.0 * f64::EPSILON,
    })
}

/// Height of the elliptic curves whose j-invariant is a root of `p`.
pub fn faltings_height(p: &IntegerPolynomial) -> Result<HeightResult> {
    let roots = find_roots(p)?;
    height_from_roots(p, &roots)
}

/// Height of `j = zeta` for a rational integer `zeta`.
pub fn height_of_integer_j(k: i64) -> Result<f64> {
    Ok(g_hyp(Complex64::new(k as f64, 0.0))? / 12.0)
}

/// `h_F(1) = g_hyp(1)/12`, cached.
pub fn height_at_one() -> Result<f64> {
    static CACHE: OnceLock<f64> = OnceLock::new();
    if let Some(v) = CACHE.get() {
        return Ok(*v);
    }
    let v = height_of_integer_j(1)?;
    Ok(*CACHE.get_or_init(|| v))
}

/// Certified bracket for the height of a primitive n-th root of unity,
/// from the affine model on the unit circle.
pub fn root_of_unity_bracket(n: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("order must be positive".into()));
    }
    let g1 = constants().gamma1;
    let shift = mobius(n) as f64 / (165_888.0 * euler_phi(n) as f64);
    Ok((
        (g1 - LINEAR_MODEL_ERROR) / 12.0 - shift,
        (g1 + LINEAR_MODEL_ERROR) / 12.0 - shift,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootOfUnityClass {
    /// The whole bracket lies below the lower bound for the essential minimum.
    Below,
    /// The whole bracket lies above the upper bound.
    Above,
    Undecided,
}

/// Places the bracket of `n` against a bracket `[mu_lower, mu_upper]` for
/// the essential minimum.
pub fn classify_root_of_unity(n: u64, mu_lower: f64, mu_upper: f64) -> Result<RootOfUnityClass> {
    let (lo, hi) = root_of_unity_bracket(n)?;
    Ok(if lo > mu_upper {
        RootOfUnityClass::Above
    } else if hi < mu_lower {
        RootOfUnityClass::Below
    } else {
        RootOfUnityClass::Undecided
    })
}

/// Consequences of an upper bound `h` on a height below which we look.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralityBounds {
    pub height: f64,
    /// Bound on `(1/d) log|leading|`.
    pub lead_log_per_degree: f64,
    /// Bound on `(1/d) log|constant|`.
    pub constant_log_per_degree: f64,
    /// Least degree at which a non-monic primitive polynomial can qualify.
    pub min_degree_non_integral: u64,
}

impl IntegralityBounds {
    /// Largest admissible `|constant term|` at degree `d`.
    pub fn max_constant(&self, d: u64) -> f64 {
        (d as f64 * self.constant_log_per_degree).exp()
    }
}

pub fn integrality_constraints(height: f64) -> Result<IntegralityBounds> {
    let h1 = height_at_one()?;
    let a = dx_g_hyp_at_1()?;
    let budget = 12.0 * (height - h1);
    if budget < 0.0 {
        return Err(Error::Domain(format!(
            "height {height} is below h_F(1) = {h1}; only j = 0 remains"
        )));
    }
    let lead = budget / (1.0 - a);
    Ok(IntegralityBounds {
        height,
        lead_log_per_degree: lead,
        constant_log_per_degree: budget / a,
        min_degree_non_integral: if lead == 0.0 {
            u64::MAX
        } else {
            (2f64.ln() / lead).ceil() as u64
        },
    })
}

/// Lower bound `h_F(1) + ((1-a) log|lead| + a log|const|)/(12 d)` for any
/// nonzero algebraic number with these data, where `a = dx g_hyp(1)`.
pub fn height_lower_bound(lead: i64, constant: i64, degree: usize) -> Result<f64> {
    if constant == 0 {
        return Err(Error::Domain("the bound needs a nonzero constant term".into()));
    }
    let a = dx_g_hyp_at_1()?;
    let l = (lead as f64).abs().ln();
    let c = (constant as f64).abs().ln();
    Ok(height_at_one()? + ((1.0 - a) * l + a * c) / (12.0 * degree as f64))
}
