//! Deterministic low-discrepancy samples.

use num_complex::Complex64;
use std::f64::consts::PI;

/// The `i`-th term of the van der Corput sequence in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// 2-D Halton point (bases 2 and 3), skipping the origin.
pub fn halton2(i: u64) -> (f64, f64) {
    (radical_inverse(i + 1, 2), radical_inverse(i + 1, 3))
}

/// Area-uniform points of the closed disk `|w| <= radius`.
pub fn disk_points(n: usize, radius: f64) -> Vec<Complex64> {
    (0..n as u64)
        .map(|i| {
            let (a, b) = halton2(i);
            Complex64::from_polar(radius * a.sqrt(), 2.0 * PI * b)
        })
        .collect()
}

/// `n` equispaced points on the unit circle, starting at 1.
pub fn circle_points(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}
