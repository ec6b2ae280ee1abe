//! Simultaneous root finding (Aberth-Ehrlich) with a compensated Newton
//! polish.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::IntegerPolynomial;

const MAX_ITERATIONS: usize = 500;
/// Residual contract relative to `sum |c_i| |z|^i`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
}

/// `p(z)` in double-double arithmetic, rounded back to binary64.
pub fn eval_compensated(p: &IntegerPolynomial, z: Complex64) -> Complex64 {
    let (zr, zi) = (Dd::from(z.re), Dd::from(z.im));
    let mut ar = Dd::from(0.0);
    let mut ai = Dd::from(0.0);
    for &c in p.coefficients().iter().rev() {
        let nr = ar.mul(zr).add(ai.mul(zi).neg()).add(Dd::from(c as f64));
        let ni = ar.mul(zi).add(ai.mul(zr));
        ar = nr;
        ai = ni;
    }
    Complex64::new(ar.hi + ar.lo, ai.hi + ai.lo)
}

fn eval_with_derivative(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        d = d * z + p;
        p = p * z + a;
    }
    (p, d)
}

/// `sum |c_i| |z|^i`, the natural scale of `p(z)`.
pub fn evaluation_scale(p: &IntegerPolynomial, z: Complex64) -> f64 {
    let r = z.norm();
    p.coefficients().iter().rev().fold(0.0, |acc, &c| acc * r + (c as f64).abs())
}

/// `|p(z)| / sum |c_i| |z|^i`.
pub fn relative_residual(p: &IntegerPolynomial, z: Complex64) -> f64 {
    let scale = evaluation_scale(p, z);
    if scale == 0.0 {
        // Every term vanishes, so `p(z) = 0` exactly.
        return 0.0;
    }
    eval_compensated(p, z).norm() / scale
}

/// Size of the Newton correction at `z`, a first-order error estimate.
pub fn newton_correction(p: &IntegerPolynomial, z: Complex64) -> f64 {
    let c: Vec<f64> = p.coefficients().iter().map(|&x| x as f64).collect();
    let (_, d) = eval_with_derivative(&c, z);
    let v = eval_compensated(p, z);
    if d.norm() == 0.0 {
        f64::INFINITY
    } else {
        (v / d).norm()
    }
}

fn aberth(c: &[f64]) -> Option<Vec<Complex64>> {
    let d = c.len() - 1;
    let lead = c[d];
    let radius = (0..d)
        .map(|i| (c[i] / lead).abs().powf(1.0 / (d - i) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            Complex64::from_polar(radius, th)
        })
        .collect();
    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for k in 0..d {
            let (p, dp) = eval_with_derivative(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                if j != k {
                    s += (z[k] - z[j]).inv();
                }
            }
            let step = ratio / (1.0 - ratio * s);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-15 {
            return Some(z);
        }
    }
    Some(z)
}

fn polish(p: &IntegerPolynomial, c: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let v = eval_compensated(p, z);
        let (_, d) = eval_with_derivative(c, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-17 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Snaps near-real roots onto the real axis and pairs the rest into exact
/// conjugates. Leaves the list alone when the pairing is not clean.
fn symmetrize(p: &IntegerPolynomial, c: &[f64], roots: &mut [Complex64]) {
    let n = roots.len();
    let mut out = roots.to_vec();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let z = roots[i];
        let sep = (0..n)
            .filter(|&j| j != i)
            .map(|j| (roots[j] - z).norm())
            .fold(f64::INFINITY, f64::min);
        if z.im.abs() <= 1e-3 * sep.min(1.0) {
            let x = polish(p, c, Complex64::new(z.re, 0.0));
            out[i] = Complex64::new(x.re, 0.0);
            used[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (roots[a] - z.conj())
                    .norm()
                    .partial_cmp(&(roots[b] - z.conj()).norm())
                    .unwrap()
            });
        let Some(j) = partner else { return };
        if (roots[j] - z.conj()).norm() > 1e-6 * (1.0 + z.norm()) {
            return;
        }
        let up = if z.im > 0.0 { z } else { roots[j].conj() };
        out[i] = if z.im > 0.0 { up } else { up.conj() };
        out[j] = out[i].conj();
        used[i] = true;
        used[j] = true;
    }
    roots.copy_from_slice(&out);
}

/// All complex roots, sorted by real part and then imaginary part.
pub fn find_roots(p: &IntegerPolynomial) -> Result<Vec<Complex64>> {
    let c: Vec<f64> = p.coefficients().iter().map(|&x| x as f64).collect();
    let d = p.degree();
    let mut roots = if d == 1 {
        vec![Complex64::new(-c[0] / c[1] + 0.0, 0.0)]
    } else {
        aberth(&c).ok_or_else(|| Error::NonConvergence(format!("Aberth on {p}")))?
    };
    for z in roots.iter_mut() {
        *z = polish(p, &c, *z);
    }
    symmetrize(p, &c, &mut roots);
    for &z in &roots {
        let r = relative_residual(p, z);
        if !(r <= RESIDUAL_TOLERANCE) {
            return Err(Error::NonConvergence(format!(
                "root {z} of {p} has relative residual {r:e}"
            )));
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::cyclotomic;

    #[test]
    fn roots_of_cyclotomic_twelve() {
        let p = cyclotomic(12).unwrap();
        let r = find_roots(&p).unwrap();
        assert_eq!(r.len(), 4);
        for z in &r {
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((z.powi(12) - 1.0).norm() < 1e-13);
        }
        assert!(r[0].re < 0.0 && r[0].im < 0.0);
        assert_eq!(r[0], r[1].conj());
    }

    #[test]
    fn linear_and_real_roots() {
        let p = IntegerPolynomial::new(vec![-3, 2]).unwrap();
        assert_eq!(find_roots(&p).unwrap(), vec![Complex64::new(1.5, 0.0)]);
        let p = IntegerPolynomial::new(vec![-2, 0, 1]).unwrap();
        let r = find_roots(&p).unwrap();
        assert_eq!(r[0].im, 0.0);
        assert!((r[1].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn compensated_evaluation_cancels() {
        let q = IntegerPolynomial::new(vec![1, -1, 1]).unwrap();
        // z is rho rounded, so the residual is about |q'(rho)| eps.
        let z = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        assert!(eval_compensated(&q, z).norm() < 3f64.sqrt() * f64::EPSILON);
        // (z - 1)^7 + (z - 1) near z = 1 + 2^-20, condition about 1e8. The
        // reference is exact: z = m / 2^52, so 2^364 p(z) is an integer.
        use num_bigint::BigInt;
        use num_traits::ToPrimitive;
        let p = IntegerPolynomial::new(vec![-2, 8, -21, 35, -35, 21, -7, 1]).unwrap();
        let m: i64 = (1 << 52) + (1 << 32) + 0x5_4321_0fed;
        let z = Complex64::new(m as f64 / 2f64.powi(52), 0.0);
        let n: BigInt = p
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, &c)| BigInt::from(c) * BigInt::from(m).pow(i as u32) << (52 * (7 - i)))
            .sum();
        let exact = n.to_f64().unwrap() * 2f64.powi(-364);
        let horner = p.coefficients().iter().rev().fold(0.0, |acc, &c| acc * z.re + c as f64);
        assert!((eval_compensated(&p, z).re - exact).abs() <= 2.0 * f64::EPSILON * exact.abs());
        assert!((horner - exact).abs() > 1e3 * f64::EPSILON * exact.abs());
    }
}
