//! Lower bounds for the essential minimum from Green functions of real
//! sections `s_0^{delta} prod P_k^{a_k}`, where `s_0` is the discriminant
//! and `P_k(zeta)` integer polynomials in the j-line coordinate.
//!
//! The Green function of such a section is
//! `G(zeta) = g_hyp(zeta)/12 - sum a_k log|P_k(zeta)|` and every algebraic
//! number outside the zeros of the `P_k` has height at least `inf G`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::g_hyp;
use crate::modular::{forms, j_invariant, TauPoint};
use crate::optimize::nelder_mead;
use crate::poly::IntegerPolynomial;
use crate::roots::find_roots;

pub const DEFAULT_GRID: usize = 400;
/// Top of the cached strip of the fundamental domain.
pub const GRID_TOP: f64 = 3.0;
/// Margin by which the cusp bound must beat the incumbent.
pub const CUSP_MARGIN: f64 = 0.01;
/// Number of grid minima refined by the simplex search.
const REFINED_STARTS: usize = 8;
/// Highest `Im tau` used anywhere; `j` overflows binary64 near 113.
const MAX_HEIGHT: f64 = 60.0;
/// Largest exponent accepted by the outer optimizer.
pub const EXPONENT_BOX: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionMember {
    pub poly: IntegerPolynomial,
    pub exponent: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SectionFamily {
    pub members: Vec<SectionMember>,
}

impl SectionFamily {
    pub fn new(members: Vec<(IntegerPolynomial, f64)>) -> Result<Self> {
        for (p, a) in &members {
            if !(*a >= 0.0 && a.is_finite()) {
                return Err(Error::Domain(format!("exponent {a} of {p} must be a finite non-negative number")));
            }
        }
        Ok(SectionFamily {
            members: members.into_iter().map(|(poly, exponent)| SectionMember { poly, exponent }).collect(),
        })
    }

    /// The bare discriminant section `s_0^{1/12}`.
    pub fn empty() -> Self {
        SectionFamily::default()
    }

    /// `1/12 - sum a_k deg P_k`, the exponent left for the discriminant.
    pub fn delta_exponent(&self) -> f64 {
        1.0 / 12.0 - self.members.iter().map(|m| m.exponent * m.poly.degree() as f64).sum::<f64>()
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.exponent).collect()
    }

    fn with_exponents(&self, a: &[f64]) -> Self {
        SectionFamily {
            members: self
                .members
                .iter()
                .zip(a)
                .map(|(m, &exponent)| SectionMember { poly: m.poly.clone(), exponent })
                .collect(),
        }
    }

    /// `sum a_k log|P_k(zeta)|`, or `-inf` at a zero of a weighted member.
    fn weighted_log(&self, zeta: Complex64) -> f64 {
        self.members
            .iter()
            .filter(|m| m.exponent > 0.0)
            .map(|m| m.exponent * log_abs_poly(&m.poly, zeta))
            .sum()
    }
}

/// `log|p(z)|` without overflow for large `|z|`.
pub fn log_abs_poly(p: &IntegerPolynomial, z: Complex64) -> f64 {
    let r = z.norm();
    if r <= 1.0 {
        return p.eval(z).norm().ln();
    }
    let inv = z.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in p.coefficients() {
        acc = acc * inv + c as f64;
    }
    p.degree() as f64 * r.ln() + acc.norm().ln()
}

/// `G(zeta) = g_hyp(zeta)/12 - sum a_k log|P_k(zeta)|`; `+inf` at member zeros.
pub fn section_green(family: &SectionFamily, zeta: Complex64) -> Result<f64> {
    let s = family.weighted_log(zeta);
    if s == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(g_hyp(zeta)? / 12.0 - s)
}

/// `G(j(tau))`, computed from the forms at `tau` without inverting `j`.
pub fn section_green_tau(family: &SectionFamily, tau: TauPoint) -> Result<f64> {
    let f = forms(tau)?;
    let s = family.weighted_log(f.j());
    if s == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(f.g_inf / 12.0 - s)
}

/// Samples of `g_inf` and `j` on `[-1/2, 1/2] x [sqrt(3)/2, top]`.
struct TauGrid {
    cols: usize,
    rows: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    g: Vec<f64>,
    j: Vec<Complex64>,
}

impl TauGrid {
    fn build(cols: usize, rows: usize, bottom: f64, top: f64) -> Result<TauGrid> {
        let x: Vec<f64> = (0..cols).map(|i| -0.5 + i as f64 / (cols - 1) as f64).collect();
        let y: Vec<f64> = (0..rows)
            .map(|k| bottom + (top - bottom) * k as f64 / (rows - 1) as f64)
            .collect();
        let vals: Vec<(f64, Complex64)> = (0..rows * cols)
            .into_par_iter()
            .map(|idx| {
                let f = forms(TauPoint { re: x[idx % cols], im: y[idx / cols] })?;
                Ok((f.g_inf, f.j()))
            })
            .collect::<Result<_>>()?;
        let (g, j) = vals.into_iter().unzip();
        Ok(TauGrid { cols, rows, x, y, g, j })
    }

    fn tau(&self, idx: usize) -> TauPoint {
        TauPoint { re: self.x[idx % self.cols], im: self.y[idx / self.cols] }
    }

    fn spacing(&self) -> f64 {
        let dx = 1.0 / (self.cols - 1) as f64;
        let dy = (self.y[self.rows - 1] - self.y[0]) / (self.rows - 1) as f64;
        dx.max(dy)
    }

    fn green(&self, family: &SectionFamily) -> Vec<f64> {
        self.g
            .par_iter()
            .zip(self.j.par_iter())
            .map(|(&g, &j)| {
                let s = family.weighted_log(j);
                if s == f64::NEG_INFINITY {
                    f64::INFINITY
                } else {
                    g / 12.0 - s
                }
            })
            .collect()
    }

    /// Indices of grid points no larger than their eight neighbours.
    fn local_minima(&self, vals: &[f64]) -> Vec<usize> {
        let (c, r) = (self.cols as isize, self.rows as isize);
        (0..vals.len())
            .filter(|&idx| {
                let (i, k) = ((idx % self.cols) as isize, (idx / self.cols) as isize);
                let v = vals[idx];
                v.is_finite()
                    && (-1..=1).all(|di| {
                        (-1..=1).all(|dk| {
                            let (ii, kk) = (i + di, k + dk);
                            ii < 0 || kk < 0 || ii >= c || kk >= r || vals[(kk * c + ii) as usize] >= v
                        })
                    })
            })
            .collect()
    }
}

fn cached_grid(n: usize) -> Result<Arc<TauGrid>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<TauGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().unwrap().get(&n) {
        return Ok(g.clone());
    }
    let grid = Arc::new(TauGrid::build(n, n, 3f64.sqrt() / 2.0, GRID_TOP)?);
    Ok(cache.lock().unwrap().entry(n).or_insert(grid).clone())
}

/// Lower bound for `G(j(tau))` valid for every `tau` with `Im tau >= y >= 1`.
///
/// Uses `|Delta| <= |q| prod (1+|q|^n)^24`, `|j(tau)| <= j(i y)` (positive
/// coefficients) and `|P(j)| <= ||P||_1 max(1, |j|)^d`.
pub fn cusp_lower_bound(family: &SectionFamily, y: f64) -> Result<f64> {
    let x = (-2.0 * PI * y).exp();
    let g_low = 2.0 * PI * y - 6.0 * (4.0 * PI * y).ln() - 24.0 * x / (1.0 - x);
    let jy = j_invariant(TauPoint { re: 0.0, im: y })?.re.max(1.0);
    let poly_high: f64 = family
        .members
        .iter()
        .map(|m| m.exponent * (m.poly.l1_norm().ln() + m.poly.degree() as f64 * jy.ln()))
        .sum();
    Ok(g_low / 12.0 - poly_high)
}

/// Smallest height `Y >= GRID_TOP` past which the cusp bound exceeds
/// `incumbent + CUSP_MARGIN` and is increasing.
fn cusp_cutoff(family: &SectionFamily, incumbent: f64) -> Result<f64> {
    let delta = family.delta_exponent();
    // d/dy of the bound is at least 2 pi delta - 1/(2y).
    let mut y = GRID_TOP.max(1.0 / (4.0 * PI * delta));
    while cusp_lower_bound(family, y)? < incumbent + CUSP_MARGIN {
        y += 0.25;
        if y > MAX_HEIGHT {
            return Err(Error::NonConvergence(format!(
                "no cusp cutoff below Im tau = {MAX_HEIGHT} (delta exponent {delta:e})"
            )));
        }
    }
    Ok(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub tau: TauPoint,
    pub zeta: Complex64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub family: SectionFamily,
    pub delta_exponent: f64,
    pub infimum: f64,
    /// `zeta` at the minimiser, with its conjugate when not real.
    pub argmin: Vec<Complex64>,
    pub argmin_tau: TauPoint,
    /// Largest grid spacing in `tau`.
    pub grid_resolution: f64,
    pub grid_points: usize,
    pub refinement_iterations: usize,
    /// `Im tau` above which the cusp bound closes the search.
    pub cusp_cutoff: f64,
    /// Zeros of the weighted members, where the bound says nothing.
    pub excluded_points: Vec<Complex64>,
    /// Refined local minima, each re-checkable with [`section_green`].
    pub audit: Vec<AuditPoint>,
}

/// Infimum of the section Green function over the j-line on the default grid.
pub fn global_infimum(family: &SectionFamily) -> Result<LowerBoundReport> {
    global_infimum_with_grid(family, DEFAULT_GRID)
}

pub fn global_infimum_with_grid(family: &SectionFamily, grid: usize) -> Result<LowerBoundReport> {
    let delta = family.delta_exponent();
    if !(delta > 0.0) {
        return Err(Error::BudgetViolation(format!(
            "discriminant exponent 1/12 - sum a_k deg P_k = {delta:e} must be positive"
        )));
    }
    if grid < 8 {
        return Err(Error::Domain(format!("grid size {grid} is too small")));
    }
    let base = cached_grid(grid)?;
    let vals = base.green(family);
    let mut starts: Vec<(f64, TauPoint)> = base
        .local_minima(&vals)
        .into_iter()
        .map(|i| (vals[i], base.tau(i)))
        .collect();
    let mut grid_points = vals.len();
    let incumbent = starts.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let cutoff = cusp_cutoff(family, incumbent)?;
    if cutoff > GRID_TOP {
        let rows = ((cutoff - GRID_TOP) / base.spacing()).ceil() as usize + 2;
        let strip = TauGrid::build(grid, rows, GRID_TOP, cutoff)?;
        let sv = strip.green(family);
        grid_points += sv.len();
        starts.extend(strip.local_minima(&sv).into_iter().map(|i| (sv[i], strip.tau(i))));
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.truncate(REFINED_STARTS);
    if starts.is_empty() {
        return Err(Error::NonConvergence("no finite grid values".into()));
    }

    let h = base.spacing();
    let refined: Vec<(AuditPoint, usize)> = starts
        .par_iter()
        .map(|&(v0, t0)| {
            let obj = |p: &[f64]| {
                if p[1] < 0.5 {
                    return f64::INFINITY;
                }
                section_green_tau(family, TauPoint { re: p[0], im: p[1] }).unwrap_or(f64::INFINITY)
            };
            let r = nelder_mead(obj, &[t0.re, t0.im], &[h, h], 1e-16, 1e-11, 2000);
            let (tau, value) = if r.value < v0 {
                (TauPoint { re: r.x[0], im: r.x[1] }, r.value)
            } else {
                (t0, v0)
            };
            let zeta = j_invariant(tau)?;
            Ok((AuditPoint { tau, zeta, value }, r.iterations))
        })
        .collect::<Result<_>>()?;
    let iterations = refined.iter().map(|r| r.1).sum();
    let audit: Vec<AuditPoint> = refined.into_iter().map(|r| r.0).collect();
    let best = *audit.iter().min_by(|a, b| a.value.total_cmp(&b.value)).unwrap();

    let mut argmin = vec![best.zeta];
    if best.zeta.im.abs() > 1e-9 * (1.0 + best.zeta.norm()) {
        argmin.push(best.zeta.conj());
    }
    let mut excluded = Vec::new();
    for m in family.members.iter().filter(|m| m.exponent > 0.0) {
        excluded.extend(find_roots(&m.poly)?);
    }
    Ok(LowerBoundReport {
        family: family.clone(),
        delta_exponent: delta,
        infimum: best.value,
        argmin,
        argmin_tau: best.tau,
        grid_resolution: h,
        grid_points,
        refinement_iterations: iterations,
        cusp_cutoff: cutoff,
        excluded_points: excluded,
        audit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentOptimization {
    pub report: LowerBoundReport,
    pub outer_iterations: usize,
    /// True when the last full cycle improved by less than the tolerance.
    pub converged: bool,
}

/// Maximises `global_infimum` over the exponents of `polys` inside the box
/// `[0, EXPONENT_BOX]` with a positive discriminant exponent: cyclic
/// coordinate ascent with shrinking steps, then a simplex polish.
pub fn optimize_exponents(polys: &[IntegerPolynomial], init: &[f64]) -> Result<ExponentOptimization> {
    optimize_exponents_with_grid(polys, init, DEFAULT_GRID)
}

pub fn optimize_exponents_with_grid(
    polys: &[IntegerPolynomial],
    init: &[f64],
    grid: usize,
) -> Result<ExponentOptimization> {
    if polys.len() != init.len() {
        return Err(Error::Domain(format!("{} polynomials but {} exponents", polys.len(), init.len())));
    }
    let template = SectionFamily::new(polys.iter().cloned().zip(init.iter().copied()).collect())?;
    if init.iter().any(|&a| a > EXPONENT_BOX) {
        return Err(Error::BudgetViolation(format!("initial exponents must lie in [0, {EXPONENT_BOX}]")));
    }
    if !(template.delta_exponent() > 0.0) {
        return Err(Error::BudgetViolation("initial exponents exhaust the weight budget".into()));
    }
    let feasible = |a: &[f64]| {
        a.iter().all(|&x| (0.0..=EXPONENT_BOX).contains(&x)) && template.with_exponents(a).delta_exponent() > 0.0
    };
    let first_error = RefCell::new(None);
    let value = |a: &[f64]| -> f64 {
        if !feasible(a) {
            return f64::NEG_INFINITY;
        }
        match global_infimum_with_grid(&template.with_exponents(a), grid) {
            Ok(r) => r.infimum,
            Err(e) => {
                first_error.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        }
    };

    let n = init.len();
    let mut a = init.to_vec();
    let mut best = value(&a);
    let mut step = 1e-5;
    let mut outer = 0;
    let mut converged = false;
    while outer < 200 {
        outer += 1;
        let start = best;
        for k in 0..n {
            loop {
                let mut moved = false;
                for dir in [1.0, -1.0] {
                    let mut trial = a.clone();
                    trial[k] = (trial[k] + dir * step).max(0.0);
                    if trial[k] == a[k] {
                        continue;
                    }
                    let v = value(&trial);
                    if v > best {
                        a = trial;
                        best = v;
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    break;
                }
            }
        }
        if best - start < 1e-10 {
            if step < 1e-10 {
                converged = true;
                break;
            }
            step *= 0.25;
        }
    }
    let steps: Vec<f64> = a.iter().map(|&x| (0.1 * x).max(1e-7)).collect();
    let polish = nelder_mead(|p| -value(p), &a, &steps, 1e-13, 1e-12, 400);
    if -polish.value > best {
        a = polish.x;
    }
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    let report = global_infimum_with_grid(&template.with_exponents(&a), grid)?;
    Ok(ExponentOptimization { report, outer_iterations: outer, converged })
}

/// The published optimal families, replayed with frozen exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayFamily {
    pub name: String,
    pub polys: Vec<String>,
    pub exponents: Vec<f64>,
    /// Value the optimisation is expected to reproduce.
    pub expected: f64,
}

impl ReplayFamily {
    pub fn family(&self) -> Result<SectionFamily> {
        if self.polys.len() != self.exponents.len() {
            return Err(Error::Parse(format!("family {}: polys and exponents differ in length", self.name)));
        }
        let polys = self.polys.iter().map(|s| IntegerPolynomial::parse(s)).collect::<Result<Vec<_>>>()?;
        SectionFamily::new(polys.into_iter().zip(self.exponents.iter().copied()).collect())
    }
}

const REPLAY_JSON: &str = include_str!("../data/replay_families.json");

/// Replay families shipped with the crate.
pub fn replay_families() -> Result<Vec<ReplayFamily>> {
    Ok(serde_json::from_str(REPLAY_JSON)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_family_is_g_hyp() {
        let z = Complex64::new(0.3, -2.0);
        let g = section_green(&SectionFamily::empty(), z).unwrap();
        assert!((g - g_hyp(z).unwrap() / 12.0).abs() < 1e-15);
    }

    #[test]
    fn log_abs_poly_matches_direct() {
        let p = IntegerPolynomial::new(vec![1, -1, 1]).unwrap();
        let z = Complex64::new(30.0, 4.0);
        assert!((log_abs_poly(&p, z) - p.eval(z).norm().ln()).abs() < 1e-13);
    }

    #[test]
    fn budget_violation() {
        let z = IntegerPolynomial::new(vec![0, 1]).unwrap();
        let f = SectionFamily::new(vec![(z, 1.0 / 12.0)]).unwrap();
        assert!(matches!(global_infimum(&f), Err(Error::BudgetViolation(_))));
    }
}
