//! Tables of small Faltings heights: roots of unity and exhaustive scans of
//! integer polynomial boxes.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heights::{height_at_one, height_from_roots, root_of_unity_bracket, HeightResult};
use crate::inversion::{dx_g_hyp_at_1, invert_j_with_forms};
use crate::poly::{cyclotomic, IntegerPolynomial};
use crate::roots::find_roots;
use crate::section::{global_infimum, replay_families};

/// Polynomials per checkpoint.
pub const CHECKPOINT_INTERVAL: u64 = 100_000;
/// Largest number of candidates a scan may enumerate after pruning.
pub const MAX_SCAN_SIZE: u64 = 500_000_000;
const MAX_SCAN_DEGREE: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub label: String,
    pub poly: IntegerPolynomial,
    pub height: HeightResult,
    /// Closed-form bracket, for roots of unity.
    pub bracket: Option<(f64, f64)>,
}

impl SpectrumEntry {
    fn new(label: String, poly: IntegerPolynomial, height: HeightResult) -> Self {
        SpectrumEntry { label, poly, height, bracket: None }
    }

    pub fn is_unit(&self) -> bool {
        self.poly.leading() == 1 && self.poly.constant().abs() == 1
    }

    /// One CSV row: label, coefficients, degree, height, error estimate.
    pub fn csv_row(&self) -> String {
        let coeffs: Vec<String> = self.poly.coefficients().iter().map(|c| c.to_string()).collect();
        format!(
            "{},\"{}\",{},{:.15},{:.3e}",
            self.label,
            coeffs.join(","),
            self.poly.degree(),
            self.height.total,
            self.height.error_estimate
        )
    }
}

pub const CSV_HEADER: &str = "label,coefficients,degree,height,error_estimate";

pub fn to_csv(entries: &[SpectrumEntry]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for e in entries {
        s.push_str(&e.csv_row());
        s.push('\n');
    }
    s
}

fn sort_entries(entries: &mut [SpectrumEntry]) {
    entries.sort_by(|a, b| {
        a.height
            .total
            .total_cmp(&b.height.total)
            .then_with(|| a.poly.degree().cmp(&b.poly.degree()))
            .then_with(|| a.poly.coefficients().cmp(b.poly.coefficients()))
    });
}

/// Heights of primitive n-th roots of unity for `n <= max_order`, sorted.
/// Fails if a computed height leaves its closed-form bracket.
pub fn scan_cyclotomics(max_order: u64) -> Result<Vec<SpectrumEntry>> {
    if max_order == 0 {
        return Err(Error::Domain("max_order must be at least 1".into()));
    }
    let mut entries: Vec<SpectrumEntry> = (1..=max_order)
        .into_par_iter()
        .map(|n| {
            let p = cyclotomic(n)?;
            let h = height_from_roots(&p, &find_roots(&p)?)?;
            let (lo, hi) = root_of_unity_bracket(n)?;
            if !(lo - h.error_estimate <= h.total && h.total <= hi + h.error_estimate) {
                return Err(Error::NonConvergence(format!(
                    "height {} of cyclotomic:{n} outside [{lo}, {hi}]",
                    h.total
                )));
            }
            let mut e = SpectrumEntry::new(format!("cyclotomic:{n}"), p, h);
            e.bracket = Some((lo, hi));
            Ok(e)
        })
        .collect::<Result<_>>()?;
    sort_entries(&mut entries);
    Ok(entries)
}

/// Candidates of one degree: `(leading, constant)` pairs surviving the
/// pruning bound, each with `(2 max_coeff + 1)^(d-1)` middle coefficients.
#[derive(Clone, Debug)]
struct DegreeBlock {
    degree: usize,
    ends: Vec<(i64, i64)>,
    per_end: u64,
}

impl DegreeBlock {
    fn len(&self) -> u64 {
        self.ends.len() as u64 * self.per_end
    }

    /// Coefficients of the `idx`-th candidate, constant term first.
    fn coefficients(&self, idx: u64, max_coeff: i64) -> Vec<i64> {
        let (lead, constant) = self.ends[(idx / self.per_end) as usize];
        let mut r = idx % self.per_end;
        let base = (2 * max_coeff + 1) as u64;
        let mut middle = vec![0i64; self.degree - 1];
        for slot in middle.iter_mut().rev() {
            *slot = (r % base) as i64 - max_coeff;
            r /= base;
        }
        let mut c = Vec::with_capacity(self.degree + 1);
        c.push(constant);
        c.extend(middle);
        c.push(lead);
        c
    }
}

/// Lower bound `h_F(1) + ((1-a) log|lead| + a log|b|)/(12 d)` with
/// `a = dx g_hyp(1)`, valid for every root multiset with these end
/// coefficients.
fn end_bound(h1: f64, a: f64, lead: i64, constant: i64, d: usize) -> f64 {
    h1 + ((1.0 - a) * (lead as f64).ln() + a * (constant.abs() as f64).ln()) / (12.0 * d as f64)
}

fn degree_blocks(max_degree: usize, max_coeff: i64, threshold: f64) -> Result<Vec<DegreeBlock>> {
    let h1 = height_at_one()?;
    let a = dx_g_hyp_at_1()?;
    let mut out = Vec::new();
    let mut total: u64 = 0;
    for d in 1..=max_degree {
        let mut ends = Vec::new();
        for lead in 1..=max_coeff {
            for constant in -max_coeff..=max_coeff {
                if constant != 0 && end_bound(h1, a, lead, constant, d) <= threshold {
                    ends.push((lead, constant));
                }
            }
        }
        let per_end = ((2 * max_coeff + 1) as u64)
            .checked_pow(d as u32 - 1)
            .ok_or_else(|| Error::Overflow("scan box is too large".into()))?;
        let block = DegreeBlock { degree: d, ends, per_end };
        total = total
            .checked_add(block.len())
            .filter(|&t| t <= MAX_SCAN_SIZE)
            .ok_or_else(|| {
                Error::Overflow(format!("scan box exceeds {MAX_SCAN_SIZE} candidates after pruning"))
            })?;
        out.push(block);
    }
    Ok(out)
}

/// Whether some proper subset of the roots, closed under conjugation,
/// multiplies out to an integer polynomial up to a divisor of the leading
/// coefficient. Exact for the small degrees scanned here.
fn numerically_reducible(p: &IntegerPolynomial, roots: &[Complex64]) -> bool {
    let d = roots.len();
    if d < 2 {
        return false;
    }
    let lead = p.leading();
    let divisors: Vec<i64> = (1..=lead).filter(|k| lead % k == 0).collect();
    for mask in 1u32..(1 << d) - 1 {
        // A factor of degree k exists iff one of degree d - k does.
        if mask.count_ones() as usize > d / 2 {
            continue;
        }
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for (i, &z) in roots.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
                for (j, &c) in coeffs.iter().enumerate() {
                    next[j + 1] += c;
                    next[j] -= c * z;
                }
                coeffs = next;
            }
        }
        for &l in &divisors {
            let near_integer = coeffs.iter().all(|c| {
                let v = c * l as f64;
                v.im.abs() < 1e-6 && (v.re - v.re.round()).abs() < 1e-6
            });
            if near_integer {
                return true;
            }
        }
    }
    false
}

/// Height of `p` if it can be at most `threshold`, stopping once the
/// partial sum already exceeds it. Uses `g_1 = g_hyp - a log|.| >= g_hyp(1)`.
fn candidate_height(p: &IntegerPolynomial, threshold: f64, g1_min: f64, a: f64) -> Result<Option<HeightResult>> {
    let d = p.degree();
    let roots = match find_roots(p) {
        Ok(r) => r,
        Err(Error::NonConvergence(_)) if d > 1 => return Ok(None),
        Err(e) => return Err(e),
    };
    let lead = p.leading() as f64;
    let base = a * (p.constant().abs() as f64 / lead).ln() + lead.ln();
    let mut partial = 0.0;
    let mut remaining = d as f64;
    if p.constant() != 0 {
        for z in roots.iter().filter(|z| z.im >= 0.0) {
            let (_, f) = invert_j_with_forms(*z)?;
            let w = if z.im > 0.0 { 2.0 } else { 1.0 };
            partial += w * (f.g_inf - a * z.norm().ln());
            remaining -= w;
            let low = (partial + remaining * g1_min + base) / (12.0 * d as f64);
            if low > threshold + 1e-12 {
                return Ok(None);
            }
        }
    }
    let h = height_from_roots(p, &roots)?;
    if h.total > threshold || numerically_reducible(p, &roots) {
        return Ok(None);
    }
    Ok(Some(h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub max_degree: usize,
    pub max_coeff: i64,
    pub threshold: f64,
    /// Progress file rewritten every `CHECKPOINT_INTERVAL` polynomials.
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Checkpoint {
    max_degree: usize,
    max_coeff: i64,
    threshold: f64,
    /// Position in the global candidate order.
    next: u64,
    entries: Vec<SpectrumEntry>,
}

fn load_checkpoint(path: &Path, cfg: &ScanConfig) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let c: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if c.max_degree != cfg.max_degree || c.max_coeff != cfg.max_coeff || c.threshold != cfg.threshold {
        return Err(Error::Parse(format!("checkpoint {} belongs to a different scan", path.display())));
    }
    Ok(Some(c))
}

/// All irreducible primitive squarefree polynomials with degree at most
/// `max_degree`, coefficients bounded by `max_coeff` and height at most
/// `threshold`, sorted by height.
pub fn scan_polynomials(max_degree: usize, max_coeff: i64, threshold: f64) -> Result<Vec<SpectrumEntry>> {
    scan_polynomials_with(&ScanConfig { max_degree, max_coeff, threshold, checkpoint: None })
}

pub fn scan_polynomials_with(cfg: &ScanConfig) -> Result<Vec<SpectrumEntry>> {
    if cfg.max_degree == 0 || cfg.max_degree > MAX_SCAN_DEGREE || cfg.max_coeff < 1 {
        return Err(Error::Domain(format!(
            "scan needs 1 <= max_degree <= {MAX_SCAN_DEGREE} and max_coeff >= 1"
        )));
    }
    let mut entries = Vec::new();
    let z = IntegerPolynomial::new(vec![0, 1])?;
    let hz = height_from_roots(&z, &[Complex64::new(0.0, 0.0)])?;
    if hz.total <= cfg.threshold {
        entries.push(SpectrumEntry::new(z.label(), z, hz));
    }
    let blocks = degree_blocks(cfg.max_degree, cfg.max_coeff, cfg.threshold)?;
    let total: u64 = blocks.iter().map(DegreeBlock::len).sum();
    let mut next = 0;
    if let Some(path) = &cfg.checkpoint {
        if let Some(c) = load_checkpoint(path, cfg)? {
            next = c.next;
            entries = c.entries;
        }
    }
    let a = dx_g_hyp_at_1()?;
    let g1_min = 12.0 * height_at_one()?;
    let locate = |mut i: u64| -> (&DegreeBlock, u64) {
        for b in &blocks {
            if i < b.len() {
                return (b, i);
            }
            i -= b.len();
        }
        unreachable!("index inside the scan range")
    };
    while next < total {
        let end = (next + CHECKPOINT_INTERVAL).min(total);
        let found: Vec<SpectrumEntry> = (next..end)
            .into_par_iter()
            .map(|i| {
                let (b, local) = locate(i);
                let c = b.coefficients(local, cfg.max_coeff);
                if c.iter().fold(0i64, |g, &x| num_gcd(g, x)) != 1 {
                    return Ok(None);
                }
                let Ok(p) = IntegerPolynomial::new(c) else { return Ok(None) };
                Ok(candidate_height(&p, cfg.threshold, g1_min, a)?
                    .map(|h| SpectrumEntry::new(p.label(), p, h)))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        entries.extend(found);
        next = end;
        if let Some(path) = &cfg.checkpoint {
            let c = Checkpoint {
                max_degree: cfg.max_degree,
                max_coeff: cfg.max_coeff,
                threshold: cfg.threshold,
                next,
                entries: entries.clone(),
            };
            fs::write(path, serde_json::to_string(&c)?)?;
        }
    }
    dedup_by_roots(&mut entries)?;
    sort_entries(&mut entries);
    Ok(entries)
}

fn num_gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Drops entries whose sorted root multiset, rounded to 1e-9, was already seen.
fn dedup_by_roots(entries: &mut Vec<SpectrumEntry>) -> Result<()> {
    let mut seen = HashSet::new();
    let mut keep = Vec::with_capacity(entries.len());
    for e in entries.drain(..) {
        let key: Vec<(i64, i64)> = find_roots(&e.poly)?
            .iter()
            .map(|z| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64))
            .collect();
        if seen.insert(key) {
            keep.push(e);
        }
    }
    *entries = keep;
    Ok(())
}

/// Search boxes used by [`spectrum_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub cyclotomic_order: u64,
    pub max_degree: usize,
    pub max_coeff: i64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { cyclotomic_order: 30, max_degree: 8, max_coeff: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub upper_bound: f64,
    /// Best infimum among the replayed section families.
    pub lower_bound: f64,
    pub lower_bound_family: String,
    /// Values below both bounds, hence isolated points of the spectrum.
    pub isolated: Vec<SpectrumEntry>,
    /// Values in `[lower_bound, upper_bound)`, not separated by the bounds.
    pub between_bounds: Vec<SpectrumEntry>,
    /// Every value above this is a limit of heights.
    pub density_interval_start: f64,
    pub options: SpectrumOptions,
}

pub fn spectrum_report(upper_bound: f64) -> Result<SpectrumReport> {
    spectrum_report_with(upper_bound, &SpectrumOptions::default())
}

pub fn spectrum_report_with(upper_bound: f64, opts: &SpectrumOptions) -> Result<SpectrumReport> {
    let mut lower = f64::NEG_INFINITY;
    let mut lower_name = String::new();
    for f in replay_families()? {
        let r = global_infimum(&f.family()?)?;
        if r.infimum > lower {
            lower = r.infimum;
            lower_name = f.name.clone();
        }
    }
    let mut all = scan_cyclotomics(opts.cyclotomic_order)?;
    all.extend(scan_polynomials(opts.max_degree, opts.max_coeff, upper_bound)?);
    dedup_by_roots(&mut all)?;
    sort_entries(&mut all);
    let cut = lower.min(upper_bound);
    let isolated = all.iter().filter(|e| e.height.total < cut).cloned().collect();
    let between = all
        .iter()
        .filter(|e| e.height.total >= cut && e.height.total < upper_bound)
        .cloned()
        .collect();
    Ok(SpectrumReport {
        upper_bound,
        lower_bound: lower,
        lower_bound_family: lower_name,
        isolated,
        between_bounds: between,
        density_interval_start: upper_bound,
        options: opts.clone(),
    })
}
