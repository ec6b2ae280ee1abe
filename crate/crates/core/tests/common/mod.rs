//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the library: each value is rebuilt from a
//! different representation than the one the library uses.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// `Gamma(1/3) = 3 int_0^inf exp(-u^3) du`, by composite Simpson on `[0, 7]`.
/// The integrand is entire and below 1e-148 past 7.
pub fn gamma_one_third() -> f64 {
    let n = 140_000usize;
    let (a, b) = (0.0f64, 7.0f64);
    let h = (b - a) / n as f64;
    let f = |u: f64| (-u * u * u).exp();
    let mut s = f(a) + f(b);
    let mut comp = 0.0;
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        // Kahan summation.
        let y = w * f(a + k as f64 * h) - comp;
        let t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    // Simpson weight h/3, times 3 for Gamma(1/3) = 3 Gamma(4/3).
    s * h
}

/// `zeta'(-1) = 1/12 - log A` with the Glaisher constant from its asymptotic
/// series at `n = 40`.
pub fn zeta_prime_minus_one() -> f64 {
    let n = 40.0f64;
    let mut s = 0.0;
    for k in 2..=40 {
        let k = k as f64;
        s += k * k.ln();
    }
    let main = (n * n / 2.0 + n / 2.0 + 1.0 / 12.0) * n.ln() - n * n / 4.0;
    let c = [-1.0 / 720.0, 1.0 / 5040.0, -1.0 / 10080.0, 1.0 / 9504.0];
    let corr: f64 = c.iter().enumerate().map(|(k, ck)| ck * n.powi(-2 * (k as i32 + 1))).sum();
    let log_a = s - main + corr;
    1.0 / 12.0 - log_a
}

pub fn sigma(k: u32, n: u64) -> i128 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as i128).pow(k)).sum()
}

fn series_mul(a: &[i128], b: &[i128], len: usize) -> Vec<i128> {
    let mut c = vec![0i128; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            c[i + j] += x * y;
        }
    }
    c
}

/// Coefficients `c_{-1}, c_0, ..., c_{len-2}` of `j = E4^3/Delta`, from
/// integer divisor sums and the product for Delta.
pub fn j_coefficients(len: usize) -> Vec<i128> {
    let mut e4 = vec![0i128; len];
    e4[0] = 1;
    for (n, c) in e4.iter_mut().enumerate().skip(1) {
        *c = 240 * sigma(3, n as u64);
    }
    let e4_cubed = series_mul(&series_mul(&e4, &e4, len), &e4, len);
    // Delta / q = prod (1 - q^n)^24.
    let mut d = vec![0i128; len];
    d[0] = 1;
    for n in 1..len {
        for _ in 0..24 {
            for k in (n..len).rev() {
                d[k] -= d[k - n];
            }
        }
    }
    // Series division by d (d[0] = 1).
    let mut out = vec![0i128; len];
    for k in 0..len {
        let mut acc = e4_cubed[k];
        for i in 1..=k {
            acc -= d[i] * out[k - i];
        }
        out[k] = acc;
    }
    out
}

/// `j(tau)` from the integer q-expansion.
pub fn j_series(tau: Complex64, terms: usize) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let c = j_coefficients(terms);
    let mut s = Complex64::new(0.0, 0.0);
    for k in (0..terms).rev() {
        s = s * q + c[k] as f64;
    }
    s / q
}

/// `E4` from `1 + 240 sum sigma_3(n) q^n`.
pub fn e4_series(tau: Complex64, terms: u64) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut s = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=terms {
        qn *= q;
        s += qn * (240 * sigma(3, n)) as f64;
    }
    s
}

/// `q prod_{n <= order} (1 - q^n)^24`.
pub fn delta_product(tau: Complex64, order: u32) -> Complex64 {
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    let mut p = q;
    for n in 1..=order {
        p *= (Complex64::new(1.0, 0.0) - q.powu(n)).powu(24);
    }
    p
}

/// Breadth-first search over words in `S`, `T`, `T^{-1}` for the shortest
/// word moving `tau` into the closed fundamental domain. Returns the image
/// and the word length.
pub fn bfs_reduce(tau: Complex64, max_len: usize) -> Option<(Complex64, usize)> {
    let inside = |z: Complex64| z.re.abs() <= 0.5 + 1e-12 && z.norm_sqr() >= 1.0 - 1e-12;
    let mut frontier = vec![tau];
    for len in 0..=max_len {
        if let Some(z) = frontier.iter().find(|z| inside(**z)) {
            return Some((*z, len));
        }
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for z in frontier {
            next.push(-z.inv());
            next.push(z + 1.0);
            next.push(z - 1.0);
        }
        frontier = next;
    }
    None
}

fn valuation(mut x: i64, p: i64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

fn primes_dividing(mut n: i64) -> Vec<i64> {
    n = n.abs();
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `(1/d) sum_p sum_alpha log+ |alpha|_p`, reading the root valuations off
/// the lower Newton polygon at every prime dividing some coefficient.
pub fn newton_polygon_finite_part(coeffs: &[i64]) -> f64 {
    let d = coeffs.len() - 1;
    let mut primes: Vec<i64> = coeffs.iter().filter(|c| **c != 0).flat_map(|c| primes_dividing(*c)).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut total = 0.0;
    for p in primes {
        let pts: Vec<(f64, f64)> = coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| valuation(*c, p).map(|v| (i as f64, v as f64)))
            .collect();
        // Lower convex hull, left to right.
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for &pt in &pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        // A segment of slope s and width w carries w roots of valuation -s.
        for seg in hull.windows(2) {
            let w = seg[1].0 - seg[0].0;
            let slope = (seg[1].1 - seg[0].1) / w;
            if slope > 0.0 {
                total += w * slope * (p as f64).ln();
            }
        }
    }
    total / d as f64
}

/// Richardson-extrapolated central difference of `f` at `x` along `dir`.
pub fn richardson<F: Fn(Complex64) -> Complex64>(f: F, x: Complex64, dir: Complex64, h: f64) -> Complex64 {
    let cd = |h: f64| (f(x + dir * h) - f(x - dir * h)) / (2.0 * h);
    let (d1, d2) = (cd(h), cd(h / 2.0));
    (d2 * 4.0 - d1) / 3.0
}
