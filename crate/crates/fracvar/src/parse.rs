//! Parsers for the CLI's small config languages: base-function strings,
//! alpha expressions, and n-ranges.

use std::path::Path;

use fracvar_core::BaseFunction;

use crate::error::{AppError, Result};

/// Parse a base-function config string:
/// `tent`, `skewed:l=1`, `sine:amp=0.5`, `degenerate:inner=<spec>`,
/// `pwl:@breakpoints.csv`.
///
/// `b` and `alpha` come from the enclosing run config; the degenerate kind
/// needs both (it is `inner(t) - alpha*inner(b t)`).
pub fn parse_phi(s: &str, b: u32, alpha: f64) -> Result<BaseFunction> {
    let s = s.trim();
    if s == "tent" {
        return Ok(BaseFunction::Tent);
    }
    if let Some(rest) = s.strip_prefix("skewed:") {
        let ell = rest
            .strip_prefix("l=")
            .ok_or_else(|| AppError::usage(format!("skewed base needs l=<int>, got `{s}`")))?
            .parse::<u32>()
            .map_err(|e| AppError::usage(format!("bad skewness in `{s}`: {e}")))?;
        return Ok(BaseFunction::skewed_tent(b, ell)?);
    }
    if let Some(rest) = s.strip_prefix("sine:") {
        let amp = rest
            .strip_prefix("amp=")
            .ok_or_else(|| AppError::usage(format!("sine base needs amp=<real>, got `{s}`")))?
            .parse::<f64>()
            .map_err(|e| AppError::usage(format!("bad amplitude in `{s}`: {e}")))?;
        return Ok(BaseFunction::sine(amp)?);
    }
    if let Some(inner) = s.strip_prefix("degenerate:inner=") {
        let inner = parse_phi(inner, b, alpha)?;
        return Ok(BaseFunction::degenerate(inner, alpha, b)?);
    }
    if let Some(path) = s.strip_prefix("pwl:@") {
        return load_pwl(Path::new(path));
    }
    Err(AppError::usage(format!(
        "unknown base function `{s}` (expected tent, skewed:l=, sine:amp=, degenerate:inner=, pwl:@file)"
    )))
}

/// Load piecewise-linear breakpoints from a CSV file with header `t,value`.
pub fn load_pwl(path: &Path) -> Result<BaseFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if i == 0 && line.starts_with("t,") {
            continue; // header
        }
        let mut cols = line.split(',');
        let (t, v) = (cols.next(), cols.next());
        match (t, v) {
            (Some(t), Some(v)) => {
                let t = t.trim().parse::<f64>().map_err(|e| {
                    AppError::usage(format!("{}:{}: bad t: {e}", path.display(), i + 1))
                })?;
                let v = v.trim().parse::<f64>().map_err(|e| {
                    AppError::usage(format!("{}:{}: bad value: {e}", path.display(), i + 1))
                })?;
                points.push((t, v));
            }
            _ => {
                return Err(AppError::usage(format!(
                    "{}:{}: expected two columns t,value",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(BaseFunction::piecewise_linear(points)?)
}

/// Parse alpha given either as a decimal (`0.7`, `-0.45`) or as an exact
/// exponent expression `B^(-1/3)` where `B` is an integer or the literal
/// `b` (substituted with the run's b). A leading `-` negates the result.
pub fn parse_alpha(s: &str, b: u32) -> Result<f64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let value = match body.split_once('^') {
        None => body
            .parse::<f64>()
            .map_err(|e| AppError::usage(format!("bad alpha `{s}`: {e}")))?,
        Some((base, exponent)) => {
            let base = if base.trim() == "b" {
                f64::from(b)
            } else {
                base.trim()
                    .parse::<f64>()
                    .map_err(|e| AppError::usage(format!("bad alpha base in `{s}`: {e}")))?
            };
            let (num, den) = parse_exponent(exponent)
                .ok_or_else(|| AppError::usage(format!("bad alpha exponent in `{s}`")))?;
            // exact rational exponent; the only rounding is in powf itself
            base.powf(num as f64 / den as f64)
        }
    };
    Ok(if neg { -value } else { value })
}

/// `(-1/3)`, `-1/3`, `(2)`, `-0.5` -> (numerator, denominator) with the
/// denominator positive; decimal exponents use denominator 1 semantics via
/// a rational scale.
fn parse_exponent(s: &str) -> Option<(i64, i64)> {
    let s = s.trim();
    let s = s.strip_prefix('(').unwrap_or(s);
    let s = s.strip_suffix(')').unwrap_or(s).trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let num = num.trim().parse::<i64>().ok()?;
            let den = den.trim().parse::<i64>().ok()?;
            if den == 0 {
                return None;
            }
            Some(if den < 0 { (-num, -den) } else { (num, den) })
        }
        None => {
            // allow plain integers; reject other shapes
            let num = s.parse::<i64>().ok()?;
            Some((num, 1))
        }
    }
}

/// `2:12` or a single `7` -> inclusive (n_min, n_max).
pub fn parse_n_range(s: &str) -> Result<(u32, u32)> {
    let s = s.trim();
    match s.split_once(':') {
        Some((lo, hi)) => {
            let lo = lo
                .trim()
                .parse::<u32>()
                .map_err(|e| AppError::usage(format!("bad n range `{s}`: {e}")))?;
            let hi = hi
                .trim()
                .parse::<u32>()
                .map_err(|e| AppError::usage(format!("bad n range `{s}`: {e}")))?;
            Ok((lo, hi))
        }
        None => {
            let n = s
                .parse::<u32>()
                .map_err(|e| AppError::usage(format!("bad n `{s}`: {e}")))?;
            Ok((n, n))
        }
    }
}

/// `0.05:0.95:0.05` (lo:hi:step) -> inclusive grid; also accepts a
/// comma-separated list of H values.
pub fn parse_h_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(AppError::usage(format!(
                "bad H grid `{s}` (expected lo:hi:step)"
            )));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|e| AppError::usage(format!("bad H grid `{s}`: {e}")))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|e| AppError::usage(format!("bad H grid `{s}`: {e}")))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|e| AppError::usage(format!("bad H grid `{s}`: {e}")))?;
        if !(step > 0.0) || hi < lo {
            return Err(AppError::usage(format!("bad H grid `{s}`")));
        }
        let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
        Ok((0..count).map(|i| lo + step * i as f64).collect())
    } else {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| AppError::usage(format!("bad H value `{x}`: {e}")))
            })
            .collect()
    }
}
