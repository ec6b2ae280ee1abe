//! `fheight`: evaluation, heights, bounds, scans and certificates from the
//! command line.
//!
//! Exit codes: 0 success, 1 I/O or usage failure, 2 domain or parse error,
//! 3 non-convergence, 4 failed certificate.

mod manifest;
mod parse;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use faltings::certificate::CertificateReport;
use faltings::heights::faltings_height;
use faltings::inversion::invert_j_with_forms;
use faltings::modular::{self, EisensteinKind, TauPoint};
use faltings::poly::IntegerPolynomial;
use faltings::section::{self, ReplayFamily, SectionFamily, DEFAULT_GRID};
use faltings::spectrum::{self, ScanConfig, SpectrumOptions};
use faltings::upper::{self, DEFAULT_NODES, DOUBLING_TOLERANCE};
use faltings::{distortion, Error};

use crate::manifest::RunManifest;
use crate::parse::{parse_complex, parse_reals};

#[derive(Parser, Debug)]
#[command(name = "fheight", version, about = "Faltings heights of elliptic curves over the algebraic numbers")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct GlobalOpts {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print tables as CSV where the command has one.
    #[arg(long, global = true)]
    csv: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    workers: Option<usize>,
    /// Quadrature doubling tolerance.
    #[arg(long, global = true, default_value_t = DOUBLING_TOLERANCE)]
    tol: f64,
    /// Grid size per axis for lower bounds.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Initial quadrature nodes for upper bounds.
    #[arg(long, global = true, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Directory receiving the report files and a manifest.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Evaluate a modular quantity; `ghyp` takes a j-value, the rest take tau.
    Eval {
        what: Quantity,
        #[arg(allow_hyphen_values = true)]
        point: String,
    },
    /// Height of the roots of `c0,c1,...,cd` or `cyclotomic:n`.
    Height {
        #[arg(allow_hyphen_values = true)]
        poly: String,
    },
    /// Lower bounds from section families.
    Lower {
        /// Replay frozen families from a JSON file (built-in list when empty).
        #[arg(long, num_args = 0..=1, default_missing_value = "")]
        replay: Option<String>,
        /// Run configuration `{polys, init_exponents | replay_exponents, grid, tol, centers}`.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Upper bounds from circle averages.
    Upper {
        #[arg(long, default_value_t = 0.205)]
        center: f64,
        /// Evaluate every center in `lo,hi,steps`.
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
        /// Search the best center in `lo,hi`.
        #[arg(long)]
        optimize: Option<String>,
    },
    /// Tabulate small heights.
    Scan {
        #[arg(long, default_value_t = 30)]
        cyclotomic: u64,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
        #[arg(long, default_value_t = 2)]
        max_coeff: i64,
        #[arg(long, default_value_t = -0.748623)]
        threshold: f64,
        /// Produce the spectrum report against this upper bound instead.
        #[arg(long)]
        report: Option<f64>,
        #[arg(long)]
        #[serde(skip)]
        checkpoint: Option<PathBuf>,
    },
    /// Run certificate suites.
    Verify { suite: Suite },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Quantity {
    J,
    Ginf,
    Ghyp,
    #[value(name = "E2")]
    E2,
    #[value(name = "E4")]
    E4,
    #[value(name = "E6")]
    E6,
    #[value(name = "E2star")]
    E2star,
    Delta,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Suite {
    Constants,
    Distortion,
    #[value(name = "propB")]
    PropB,
    #[value(name = "special_values")]
    SpecialValues,
    All,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: 2, message }
}

/// What a command produced: a JSON report, a human summary, optional CSV,
/// and the exit code to use once everything is written.
struct Outcome {
    report: Value,
    text: String,
    csv: Option<String>,
    code: u8,
}

impl Outcome {
    fn ok(report: Value, text: String) -> Self {
        Outcome { report, text, csv: None, code: 0 }
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn tau_from(z: Complex64) -> Result<TauPoint, Failure> {
    TauPoint::from_complex(z).map_err(Failure::from)
}

fn cmd_eval(what: Quantity, point: &str) -> Result<Outcome, Failure> {
    let z = parse_complex(point).map_err(usage)?;
    let (value, err, order) = match what {
        Quantity::Ghyp => {
            let (inv, f) = invert_j_with_forms(z)?;
            let grad = 2.0 * f.dg_inf().norm() / f.j_prime().norm();
            let prop = if grad.is_finite() { grad * inv.residual } else { 0.0 };
            (Complex64::new(f.g_inf, 0.0), f.tails[4] + prop + 1e-13 * (1.0 + f.g_inf.abs()), f.order)
        }
        Quantity::Ginf => {
            let f = modular::forms(tau_from(z)?)?;
            (Complex64::new(f.g_inf, 0.0), f.tails[4] + 1e-14 * (1.0 + f.g_inf.abs()), f.order)
        }
        Quantity::J => {
            let f = modular::forms(tau_from(z)?)?;
            let j = f.j();
            let rel = 3.0 * f.tails[1] / f.e4.norm().max(1e-300) + f.tails[3] / f.delta.norm().max(1e-300);
            let rel = if rel.is_finite() { rel } else { 0.0 };
            (j, (rel + 1e-14) * j.norm().max(1.0), f.order)
        }
        Quantity::Delta => {
            let r = modular::delta(tau_from(z)?)?;
            (r.value, r.tail_bound, r.truncation_order)
        }
        q => {
            let kind = match q {
                Quantity::E2 => EisensteinKind::E2,
                Quantity::E4 => EisensteinKind::E4,
                Quantity::E6 => EisensteinKind::E6,
                _ => EisensteinKind::E2Star,
            };
            let r = modular::eisenstein(kind, tau_from(z)?)?;
            (r.value, r.tail_bound + 1e-14 * r.value.norm().max(1.0), r.truncation_order)
        }
    };
    let name = format!("{what:?}").to_lowercase();
    let report = json!({
        "quantity": name,
        "point": complex_json(z),
        "value": complex_json(value),
        "error_estimate": err,
        "truncation_order": order,
    });
    let text = if value.im == 0.0 {
        format!("{name}({point}) = {:.15} ± {err:.1e}", value.re)
    } else {
        format!("{name}({point}) = {:.15} {:+.15}i ± {err:.1e}", value.re, value.im)
    };
    Ok(Outcome::ok(report, text))
}

fn cmd_height(spec: &str) -> Result<Outcome, Failure> {
    let p = IntegerPolynomial::parse(spec)?;
    let h = faltings_height(&p)?;
    let report = json!({
        "poly": p.label(),
        "degree": p.degree(),
        "archimedean": h.archimedean,
        "finite": h.finite,
        "height": h.total,
        "error_estimate": h.error_estimate,
    });
    let text = format!(
        "{p}\n  archimedean {:.15}\n  finite      {:.15}\n  height      {:.15} ± {:.1e}",
        h.archimedean, h.finite, h.total, h.error_estimate
    );
    Ok(Outcome::ok(report, text))
}

/// Configuration file for `lower --config`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    polys: Vec<String>,
    #[serde(default)]
    init_exponents: Option<Vec<f64>>,
    #[serde(default)]
    replay_exponents: Option<Vec<f64>>,
    #[serde(default)]
    grid: Option<usize>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    centers: Option<Vec<f64>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, Failure> {
    let s = std::fs::read_to_string(path).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?;
    serde_json::from_str(&s).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn lower_line(name: &str, r: &section::LowerBoundReport) -> String {
    let z = r.argmin[0];
    format!(
        "{name:<18} inf = {:.12} at zeta = {:.8}{:+.8}i (delta exponent {:.3e}, cusp cutoff {})",
        r.infimum, z.re, z.im, r.delta_exponent, r.cusp_cutoff
    )
}

fn cmd_lower(g: &GlobalOpts, replay: Option<&str>, config: Option<&PathBuf>) -> Result<Outcome, Failure> {
    if let Some(path) = config {
        let cfg: RunConfig = read_json(path)?;
        let polys = cfg.polys.iter().map(|s| IntegerPolynomial::parse(s)).collect::<Result<Vec<_>, _>>()?;
        let grid = cfg.grid.unwrap_or(g.grid);
        let tol = cfg.tol.unwrap_or(g.tol);
        let (report, mut text, code) = match (&cfg.replay_exponents, &cfg.init_exponents) {
            (Some(a), None) => {
                let fam = SectionFamily::new(polys.into_iter().zip(a.iter().copied()).collect())?;
                let r = section::global_infimum_with_grid(&fam, grid)?;
                (serde_json::to_value(&r).unwrap(), lower_line("replay", &r), 0)
            }
            (None, init) => {
                let init = init.clone().unwrap_or_else(|| vec![0.0; polys.len()]);
                let r = section::optimize_exponents_with_grid(&polys, &init, grid)?;
                let mut t = lower_line("optimized", &r.report);
                t.push_str(&format!("\n  exponents {:?}", r.report.family.exponents()));
                let code = if r.converged { 0 } else { 3 };
                if !r.converged {
                    t.push_str("\n  optimizer stagnated before convergence");
                }
                (serde_json::to_value(&r).unwrap(), t, code)
            }
            (Some(_), Some(_)) => {
                return Err(usage("config sets both init_exponents and replay_exponents".into()))
            }
        };
        let mut upper_reports = Vec::new();
        for &c in cfg.centers.iter().flatten() {
            let u = upper::circle_integral_with_tolerance(c, g.nodes, tol)?;
            text.push_str(&format!("\n  upper center {c}: {:.12}", u.value));
            upper_reports.push(u);
        }
        let report = json!({ "lower": report, "upper": upper_reports });
        return Ok(Outcome { report, text, csv: None, code });
    }
    let families: Vec<ReplayFamily> = match replay {
        Some(p) if !p.is_empty() => read_json(std::path::Path::new(p))?,
        _ => section::replay_families()?,
    };
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    for f in &families {
        let r = section::global_infimum_with_grid(&f.family()?, g.grid)?;
        lines.push(format!("{}  (expected {})", lower_line(&f.name, &r), f.expected));
        reports.push(json!({ "name": f.name, "expected": f.expected, "report": r }));
    }
    Ok(Outcome::ok(Value::Array(reports), lines.join("\n")))
}

fn upper_line(r: &upper::UpperBoundReport) -> String {
    format!(
        "center {:.6}: {:.13} (nodes {}, doubling delta {:.1e})",
        r.center, r.value, r.nodes, r.node_doubling_delta
    )
}

fn pair(s: &str) -> Result<(f64, f64), Failure> {
    match parse_reals(s).map_err(usage)?.as_slice() {
        &[lo, hi] => Ok((lo, hi)),
        _ => Err(usage(format!("expected lo,hi but got {s:?}"))),
    }
}

fn cmd_upper(g: &GlobalOpts, center: f64, sweep: Option<&str>, optimize: Option<&str>) -> Result<Outcome, Failure> {
    if let Some(s) = sweep {
        let v = parse_reals(s).map_err(usage)?;
        let &[lo, hi, steps] = v.as_slice() else {
            return Err(usage(format!("expected lo,hi,steps but got {s:?}")));
        };
        let steps = steps as usize;
        if steps < 1 || !(lo <= hi) {
            return Err(usage("sweep needs lo <= hi and steps >= 1".into()));
        }
        let mut reports = Vec::new();
        for k in 0..=steps {
            let c = lo + (hi - lo) * k as f64 / steps as f64;
            reports.push(upper::circle_integral_with_tolerance(c, g.nodes, g.tol)?);
        }
        let text = reports.iter().map(upper_line).collect::<Vec<_>>().join("\n");
        let csv = std::iter::once("center,value,nodes,node_doubling_delta".to_string())
            .chain(reports.iter().map(|r| format!("{},{:.15},{},{:.3e}", r.center, r.value, r.nodes, r.node_doubling_delta)))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n";
        return Ok(Outcome { report: serde_json::to_value(&reports).unwrap(), text, csv: Some(csv), code: 0 });
    }
    let r = match optimize {
        Some(s) => {
            let (lo, hi) = pair(s)?;
            upper::optimize_center(lo, hi)?
        }
        None => upper::circle_integral_with_tolerance(center, g.nodes, g.tol)?,
    };
    let mut report = json!({ "circle": r });
    let mut text = upper_line(&r);
    if r.center > 0.0 && r.center < 2.0 {
        let via_h = upper::circle_integral_hhat(r.center, g.nodes)?;
        let cert = upper::certified_circle_bound(r.center)?;
        text.push_str(&format!("\n  through log|h|: {via_h:.13}\n  certified relaxation: {cert:.13}"));
        report["hhat"] = json!(via_h);
        report["certified_bound"] = json!(cert);
    }
    let code = if r.converged { 0 } else { 3 };
    if !r.converged {
        text.push_str("\n  node cap reached before the doubling tolerance");
    }
    Ok(Outcome { report, text, csv: None, code })
}

fn cmd_scan(
    cyclotomic: u64,
    max_degree: usize,
    max_coeff: i64,
    threshold: f64,
    report: Option<f64>,
    checkpoint: Option<&PathBuf>,
) -> Result<Outcome, Failure> {
    if let Some(ub) = report {
        let opts = SpectrumOptions { cyclotomic_order: cyclotomic, max_degree, max_coeff };
        let r = spectrum::spectrum_report_with(ub, &opts)?;
        let mut text = format!("lower bound {:.12} ({})\nupper bound {:.12}\nisolated values:", r.lower_bound, r.lower_bound_family, r.upper_bound);
        for e in &r.isolated {
            text.push_str(&format!("\n  {:<28} {:.12}", e.label, e.height.total));
        }
        text.push_str(&format!("\nbetween the bounds: {} values", r.between_bounds.len()));
        let mut all = r.isolated.clone();
        all.extend(r.between_bounds.iter().cloned());
        return Ok(Outcome { report: serde_json::to_value(&r).unwrap(), text, csv: Some(spectrum::to_csv(&all)), code: 0 });
    }
    let mut entries = spectrum::scan_cyclotomics(cyclotomic)?;
    let cfg = ScanConfig { max_degree, max_coeff, threshold, checkpoint: checkpoint.cloned() };
    let polys = spectrum::scan_polynomials_with(&cfg)?;
    let mut text = format!("roots of unity up to order {cyclotomic}:");
    for e in &entries {
        text.push_str(&format!("\n  {:<16} {:.12}", e.label, e.height.total));
    }
    text.push_str(&format!("\npolynomials (degree <= {max_degree}, |coeff| <= {max_coeff}) with height <= {threshold}:"));
    for e in &polys {
        text.push_str(&format!("\n  {:<28} {:.12}", e.label, e.height.total));
    }
    let report = json!({ "cyclotomic": entries, "polynomials": polys });
    entries.extend(polys);
    Ok(Outcome { report, text, csv: Some(spectrum::to_csv(&entries)), code: 0 })
}

fn cmd_verify(suite: Suite) -> Result<Outcome, Failure> {
    let reports: Vec<CertificateReport> = match suite {
        Suite::Constants => vec![distortion::verify_constants(), distortion::verify_f_prime_zero()],
        Suite::PropB => vec![distortion::verify_linear_model(10_000)],
        Suite::SpecialValues => vec![distortion::verify_special_values()],
        Suite::Distortion => {
            let mut v = vec![distortion::verify_radius_bracket(500)];
            v.extend(distortion::verify_unit_circle_chart(2000));
            v.push(distortion::verify_log_derivative_growth(200));
            v.extend(distortion::verify_approximation(200));
            v.push(distortion::verify_koebe(100));
            v.push(distortion::verify_cusp_estimates(500));
            v.push(distortion::verify_radial_minimization(500));
            v.push(distortion::verify_radial_convexity(200));
            v
        }
        Suite::All => distortion::verify_all(),
    };
    let text = reports
        .iter()
        .map(|r| {
            format!(
                "{} {:<28} samples {:>6}  max violation {:+.3e}",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.samples,
                r.max_violation
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let code = if reports.iter().all(|r| r.pass) { 0 } else { 4 };
    Ok(Outcome { report: serde_json::to_value(&reports).unwrap(), text, csv: None, code })
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { what, point } => cmd_eval(*what, point),
        Command::Height { poly } => cmd_height(poly),
        Command::Lower { replay, config } => cmd_lower(g, replay.as_deref(), config.as_ref()),
        Command::Upper { center, sweep, optimize } => cmd_upper(g, *center, sweep.as_deref(), optimize.as_deref()),
        Command::Scan { cyclotomic, max_degree, max_coeff, threshold, report, checkpoint } => {
            cmd_scan(*cyclotomic, *max_degree, *max_coeff, *threshold, *report, checkpoint.as_ref())
        }
        Command::Verify { suite } => cmd_verify(*suite),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval { .. } => "eval",
        Command::Height { .. } => "height",
        Command::Lower { .. } => "lower",
        Command::Upper { .. } => "upper",
        Command::Scan { .. } => "scan",
        Command::Verify { .. } => "verify",
    }
}

fn write_outputs(cli: &Cli, outcome: &Outcome, elapsed: f64) -> Result<(), Failure> {
    let Some(dir) = &cli.global.out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let mut outputs = Vec::new();
    let report_path = dir.join("report.json");
    std::fs::write(&report_path, manifest::to_pretty_json(&outcome.report) + "\n")?;
    outputs.push(report_path.display().to_string());
    if let Some(csv) = &outcome.csv {
        let p = dir.join("report.csv");
        std::fs::write(&p, csv)?;
        outputs.push(p.display().to_string());
    }
    let inputs = json!({ "global": cli.global, "command": cli.command });
    let mut timings = BTreeMap::new();
    timings.insert("total_seconds".to_string(), elapsed);
    let m = RunManifest::new(command_name(&cli.command), &inputs, timings, outputs);
    std::fs::write(dir.join("manifest.json"), manifest::to_pretty_json(&serde_json::to_value(&m).unwrap()) + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: invalid worker count {n}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    if cli.global.json {
        println!("{}", manifest::to_pretty_json(&outcome.report));
    } else if cli.global.csv && outcome.csv.is_some() {
        print!("{}", outcome.csv.as_deref().unwrap());
    } else {
        println!("{}", outcome.text);
    }
    if let Err(f) = write_outputs(&cli, &outcome, elapsed) {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    ExitCode::from(outcome.code)
}
