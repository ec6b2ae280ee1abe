//! Sampled verification of analytic inequalities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Outcome of checking `lhs <= rhs` over a sample set.
///
/// `max_violation` is the largest `lhs - rhs`; a negative value is the
/// smallest slack seen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub name: String,
    pub samples: usize,
    pub max_violation: f64,
    pub worst_point: [f64; 2],
    pub pass: bool,
}

/// Default tolerance applied to `max_violation`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Accumulates violations for one inequality.
#[derive(Clone, Debug)]
pub struct Tracker {
    name: String,
    tol: f64,
    samples: usize,
    worst: f64,
    point: Complex64,
    failed_eval: bool,
}

impl Tracker {
    pub fn new(name: &str, tol: f64) -> Self {
        Tracker {
            name: name.to_string(),
            tol,
            samples: 0,
            worst: f64::NEG_INFINITY,
            point: Complex64::new(0.0, 0.0),
            failed_eval: false,
        }
    }

    /// Records `lhs <= rhs` at `point`.
    pub fn check(&mut self, point: Complex64, lhs: f64, rhs: f64) {
        self.samples += 1;
        let v = lhs - rhs;
        if v.is_nan() {
            self.failed_eval = true;
            self.point = point;
            return;
        }
        if v > self.worst {
            self.worst = v;
            self.point = point;
        }
    }

    /// Records a sample whose evaluation failed outright.
    pub fn fail(&mut self, point: Complex64) {
        self.samples += 1;
        self.failed_eval = true;
        self.point = point;
    }

    pub fn finish(self) -> CertificateReport {
        let pass = !self.failed_eval && self.samples > 0 && self.worst <= self.tol;
        CertificateReport {
            name: self.name,
            samples: self.samples,
            max_violation: if self.failed_eval { f64::INFINITY } else { self.worst },
            worst_point: [self.point.re, self.point.im],
            pass,
        }
    }
}

/// Taylor coefficients `c_0..=c_max` of `f` at `center` from the trapezoid
/// rule on a circle of radius `radius`.
pub fn taylor_coefficients<F>(f: F, center: Complex64, radius: f64, nodes: usize, max: usize) -> Option<Vec<Complex64>>
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let mut vals = Vec::with_capacity(nodes);
    for k in 0..nodes {
        let th = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
        vals.push((th, f(center + Complex64::from_polar(radius, th))?));
    }
    let mut out = Vec::with_capacity(max + 1);
    for n in 0..=max {
        let mut s = Complex64::new(0.0, 0.0);
        for &(th, v) in &vals {
            s += v * Complex64::from_polar(1.0, -(n as f64) * th);
        }
        out.push(s / nodes as f64 / radius.powi(n as i32));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_of_exponential() {
        let c = taylor_coefficients(|z| Some(z.exp()), Complex64::new(0.0, 0.0), 0.5, 64, 6).unwrap();
        let mut fact = 1.0;
        for (n, cn) in c.iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            // Rounding in the node sum is amplified by radius^-n.
            let bound = 8.0 * f64::EPSILON * 0.5f64.exp() / 0.5f64.powi(n as i32);
            assert!((cn - 1.0 / fact).norm() < bound, "{n}");
        }
    }

    #[test]
    fn tracker_reports_worst() {
        let mut t = Tracker::new("x", 0.0);
        t.check(Complex64::new(1.0, 0.0), 1.0, 2.0);
        t.check(Complex64::new(2.0, 0.0), 1.5, 2.0);
        let r = t.finish();
        assert!(r.pass);
        assert_eq!(r.worst_point, [2.0, 0.0]);
        assert_eq!(r.max_violation, -0.5);
    }
}
