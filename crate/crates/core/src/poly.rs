//! Primitive squarefree integer polynomials and cyclotomic polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted by [`cyclotomic`].
pub const MAX_CYCLOTOMIC_ORDER: u64 = 1_000_000;

/// A primitive squarefree polynomial with positive leading coefficient,
/// stored constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerPolynomial {
    coeffs: Vec<i64>,
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

impl IntegerPolynomial {
    /// Normalises `coeffs` (constant first) and checks it is squarefree.
    pub fn new(mut coeffs: Vec<i64>) -> Result<Self> {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::Domain("polynomial must have degree at least 1".into()));
        }
        let content = coeffs.iter().fold(0, |g, &c| gcd_i64(g, c));
        let sign = if *coeffs.last().unwrap() < 0 { -1 } else { 1 };
        for c in coeffs.iter_mut() {
            *c = sign * (*c / content);
        }
        let p = IntegerPolynomial { coeffs };
        if !p.is_squarefree() {
            return Err(Error::RepeatedRoots(p.to_string()));
        }
        Ok(p)
    }

    /// Skips the squarefree test; for inputs known to be separable.
    pub(crate) fn from_separable(coeffs: Vec<i64>) -> Self {
        IntegerPolynomial { coeffs }
    }

    /// Parses `"c0,c1,...,cd"` or `"cyclotomic:n"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cyclotomic:") {
            let n: u64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad cyclotomic order {rest:?}")))?;
            return cyclotomic(n);
        }
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad coefficient {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> i64 {
        *self.coeffs.last().unwrap()
    }

    pub fn constant(&self) -> i64 {
        self.coeffs[0]
    }

    /// Comma-separated coefficients, constant first.
    pub fn label(&self) -> String {
        self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c as f64)
    }

    /// `sum |c_i|`, an upper bound for `|p|` on the unit disk.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|&c| (c as f64).abs()).sum()
    }

    fn is_squarefree(&self) -> bool {
        let d = self.degree();
        for &m in &[2_147_483_647u64, 2_147_483_629, 2_147_483_587] {
            let p = mod_poly(&self.coeffs, m);
            if *p.last().unwrap() == 0 {
                continue;
            }
            let dp: Vec<u64> = (1..=d).map(|i| p[i] * (i as u64 % m) % m).collect();
            if poly_gcd_mod(p, dp, m).len() == 1 {
                return true;
            }
        }
        exact_gcd_degree(&self.coeffs) == 0
    }
}

impl fmt::Display for IntegerPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0 { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag) {
                (0, _) => write!(f, "{mag}")?,
                (1, 1) => write!(f, "z")?,
                (1, _) => write!(f, "{mag}z")?,
                (_, 1) => write!(f, "z^{i}")?,
                _ => write!(f, "{mag}z^{i}")?,
            }
        }
        Ok(())
    }
}

fn mod_poly(c: &[i64], m: u64) -> Vec<u64> {
    c.iter().map(|&x| x.rem_euclid(m as i64) as u64).collect()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn trim_mod(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

/// Monic gcd over `Z/m`, `m` prime below 2^32.
fn poly_gcd_mod(mut a: Vec<u64>, mut b: Vec<u64>, m: u64) -> Vec<u64> {
    trim_mod(&mut a);
    trim_mod(&mut b);
    while !(b.len() == 1 && b[0] == 0) && !b.is_empty() {
        let inv = pow_mod(*b.last().unwrap(), m - 2, m);
        while a.len() >= b.len() && !(a.len() == 1 && a[0] == 0) {
            let shift = a.len() - b.len();
            let f = a.last().unwrap() * inv % m;
            for (i, &bi) in b.iter().enumerate() {
                a[i + shift] = (a[i + shift] + m - f * bi % m) % m;
            }
            a.pop();
            if a.is_empty() {
                a.push(0);
            }
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

/// Degree of `gcd(p, p')` over Q by a primitive pseudo-remainder sequence.
fn exact_gcd_degree(c: &[i64]) -> usize {
    let prim = |mut v: Vec<BigInt>| -> Vec<BigInt> {
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
        let g = v.iter().fold(BigInt::zero(), |g, x| num_integer_gcd(&g, x));
        if !g.is_zero() && !g.is_one() {
            v = v.into_iter().map(|x| x / &g).collect();
        }
        v
    };
    let mut a: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
    let mut b: Vec<BigInt> = (1..c.len()).map(|i| BigInt::from(c[i]) * i).collect();
    a = prim(a);
    b = prim(b);
    loop {
        if b.len() == 1 && b[0].is_zero() {
            return a.len() - 1;
        }
        if b.len() == 1 {
            return 0;
        }
        // a <- prem(a, b)
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() && !(a.len() == 1 && a[0].is_zero()) {
            let la = a.last().unwrap().clone();
            let shift = a.len() - b.len();
            for x in a.iter_mut() {
                *x *= &lb;
            }
            for (i, bi) in b.iter().enumerate() {
                a[i + shift] -= &la * bi;
            }
            a.pop();
            if a.is_empty() {
                a.push(BigInt::zero());
            }
            while a.len() > 1 && a.last().unwrap().is_zero() {
                a.pop();
            }
        }
        a = prim(a);
        std::mem::swap(&mut a, &mut b);
    }
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Prime factorisation by trial division, as `(p, e)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: u64) -> i32 {
    assert!(n >= 1, "mobius is defined for n >= 1");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi is defined for n >= 1");
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Exact quotient of `num` by the monic `den`.
fn divide_monic(num: &[i128], den: &[i128]) -> Result<Vec<i128>> {
    let overflow = || Error::Overflow("cyclotomic coefficient exceeded i128".into());
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i128; num.len() - dn];
    for k in (0..q.len()).rev() {
        let c = rem[k + dn];
        q[k] = c;
        if c != 0 {
            for (i, &d) in den.iter().enumerate() {
                rem[k + i] = rem[k + i].checked_sub(c.checked_mul(d).ok_or_else(overflow)?).ok_or_else(overflow)?;
            }
        }
    }
    if rem.iter().any(|&r| r != 0) {
        return Err(Error::Domain("inexact cyclotomic division".into()));
    }
    Ok(q)
}

fn substitute_power(p: &[i128], k: usize) -> Vec<i128> {
    let mut out = vec![0i128; (p.len() - 1) * k + 1];
    for (i, &c) in p.iter().enumerate() {
        out[i * k] = c;
    }
    out
}

/// The n-th cyclotomic polynomial, `1 <= n <= 10^6`.
///
/// Builds `Phi_{m p}(z) = Phi_m(z^p) / Phi_m(z)` over the primes of `n` by
/// exact division, then substitutes `z -> z^(n / rad n)`.
pub fn cyclotomic(n: u64) -> Result<IntegerPolynomial> {
    if n == 0 || n > MAX_CYCLOTOMIC_ORDER {
        return Err(Error::Domain(format!(
            "cyclotomic order {n} outside 1..={MAX_CYCLOTOMIC_ORDER}"
        )));
    }
    let f = factorize(n);
    let mut phi: Vec<i128> = vec![-1, 1];
    let mut rad = 1u64;
    for &(p, _) in &f {
        let lifted = substitute_power(&phi, p as usize);
        phi = divide_monic(&lifted, &phi)?;
        rad *= p;
    }
    let phi = substitute_power(&phi, (n / rad) as usize);
    let coeffs = phi
        .into_iter()
        .map(|c| i64::try_from(c).map_err(|_| Error::Overflow(format!("Phi_{n} coefficient"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntegerPolynomial::from_separable(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic(1).unwrap().coefficients(), &[-1, 1]);
        assert_eq!(cyclotomic(2).unwrap().coefficients(), &[1, 1]);
        assert_eq!(cyclotomic(6).unwrap().coefficients(), &[1, -1, 1]);
        assert_eq!(cyclotomic(12).unwrap().coefficients(), &[1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic(10).unwrap().coefficients(), &[1, -1, 1, -1, 1]);
    }

    #[test]
    fn phi_105_has_a_minus_two() {
        let p = cyclotomic(105).unwrap();
        assert_eq!(p.degree(), 48);
        assert_eq!(p.coefficients()[7], -2);
        assert_eq!(p.coefficients()[41], -2);
    }

    #[test]
    fn normalisation_and_errors() {
        let p = IntegerPolynomial::new(vec![2, -4, 0]).unwrap();
        assert_eq!(p.coefficients(), &[-1, 2]);
        assert!(matches!(IntegerPolynomial::new(vec![1, -2, 1]), Err(Error::RepeatedRoots(_))));
        assert!(matches!(IntegerPolynomial::parse("1,x"), Err(Error::Parse(_))));
        assert!(IntegerPolynomial::new(vec![5]).is_err());
    }

    #[test]
    fn squarefree_fallback_agrees() {
        // (z^2+1)^2 (z-3) has a repeated factor.
        assert_eq!(exact_gcd_degree(&[-3, 1, -6, 2, -3, 1]), 2);
        assert_eq!(exact_gcd_degree(&[1, -1, 1]), 0);
    }

    #[test]
    fn arithmetic_functions() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(euler_phi(97), 96);
    }

    #[test]
    fn display() {
        assert_eq!(IntegerPolynomial::new(vec![1, -1, 1]).unwrap().to_string(), "z^2 - z + 1");
    }
}
