//! Text grammars accepted on the command line.

use num_complex::Complex64;

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` and `-i`, with decimal or
/// exponent literals.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    let num = |x: &str| -> Result<f64, String> {
        x.parse::<f64>()
            .map_err(|_| format!("invalid number {x:?} in complex literal {s:?}"))
            .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("non-finite value in {s:?}")) })
    };
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    // Split at the last sign that does not belong to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => num(x)?,
    };
    Ok(Complex64::new(num(re)?, im))
}

/// Parses `x,y,...` into reals.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("invalid number {x:?}")))
        .collect()
}
