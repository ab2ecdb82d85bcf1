//! Partition sums `V_{p,t,n}` and signed sums over the b-adic grids.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fractal::FractalSpec;
use crate::kahan::KahanSum;
use crate::DEFAULT_INCREMENT_BUDGET;

/// Sequence `n -> V_{p,t,n}` (absolute) or `n -> signed sum`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSeries {
    pub p: f64,
    pub t: f64,
    pub b: u32,
    pub signed: bool,
    pub values: Vec<(u32, f64)>,
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CoreError::invalid(format!("t must lie in [0,1], got {t}")));
    }
    Ok(())
}

fn check_signed_exponent(q: u32) -> Result<()> {
    if q % 2 == 0 {
        return Err(CoreError::invalid(format!(
            "signed variation requires an odd exponent, got q={q}"
        )));
    }
    Ok(())
}

/// Number of increments `floor(t b^n) + 1`, with a budget guard.
fn increment_count(bn: u64, t: f64, n: u32, budget: u64, operation: &'static str) -> Result<u64> {
    let kmax = ((t * bn as f64).floor() as u64).min(bn);
    let count = kmax + 1;
    if count > budget {
        return Err(CoreError::BudgetExceeded {
            operation,
            n,
            required: count,
            budget,
        });
    }
    Ok(count)
}

/// Sums `weight(increment)` over the grid increments of `g`, walking the
/// grid once and reusing the previous endpoint value.
fn sum_increments(
    mut value_at: impl FnMut(u64) -> f64,
    count: u64,
    mut weight: impl FnMut(f64) -> f64,
) -> f64 {
    let mut acc = KahanSum::new();
    let mut prev = value_at(0);
    for k in 0..count {
        let next = value_at(k + 1);
        acc += weight(next - prev);
        prev = next;
    }
    acc.value()
}

/// `V_{p,t,n}(f)` with increments taken from exact b-adic evaluation.
pub fn partition_sum(spec: &FractalSpec, p: f64, t: f64, n: u32) -> Result<f64> {
    partition_sum_budgeted(spec, p, t, n, DEFAULT_INCREMENT_BUDGET)
}

pub fn partition_sum_budgeted(
    spec: &FractalSpec,
    p: f64,
    t: f64,
    n: u32,
    budget: u64,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::invalid(format!("p must be >= 1, got {p}")));
    }
    check_t(t)?;
    let bn = spec.badic_count(n)?;
    let count = increment_count(bn, t, n, budget, "partition_sum")?;
    // k = bn evaluates f at 1 + b^-n, which the extension maps back to 1.
    let value_at = |k: u64| spec.eval_f_badic(k.min(bn), n).expect("k in range");
    Ok(sum_increments(value_at, count, |d| d.abs().powf(p)))
}

/// `V_{p,t,n}(g)` for an arbitrary evaluator; `g` is extended by
/// `g(min(t,1))` past the right endpoint.
pub fn partition_sum_of(
    g: impl Fn(f64) -> f64,
    b: u32,
    p: f64,
    t: f64,
    n: u32,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(CoreError::invalid(format!("p must be >= 1, got {p}")));
    }
    check_t(t)?;
    let bn = u64::from(b)
        .checked_pow(n)
        .ok_or_else(|| CoreError::invalid("b^n overflows"))?;
    let count = increment_count(bn, t, n, DEFAULT_INCREMENT_BUDGET, "partition_sum")?;
    let value_at = |k: u64| g((k.min(bn)) as f64 / bn as f64);
    Ok(sum_increments(value_at, count, |d| d.abs().powf(p)))
}

/// Signed sum `sum (Delta f)^q` (no absolute values), odd `q`.
pub fn signed_partition_sum(spec: &FractalSpec, q: u32, t: f64, n: u32) -> Result<f64> {
    signed_partition_sum_budgeted(spec, q, t, n, DEFAULT_INCREMENT_BUDGET)
}

pub fn signed_partition_sum_budgeted(
    spec: &FractalSpec,
    q: u32,
    t: f64,
    n: u32,
    budget: u64,
) -> Result<f64> {
    check_signed_exponent(q)?;
    check_t(t)?;
    let bn = spec.badic_count(n)?;
    let count = increment_count(bn, t, n, budget, "signed_partition_sum")?;
    let value_at = |k: u64| spec.eval_f_badic(k.min(bn), n).expect("k in range");
    Ok(sum_increments(value_at, count, |d| d.powi(q as i32)))
}

/// Signed sum for an arbitrary evaluator.
pub fn signed_partition_sum_of(
    g: impl Fn(f64) -> f64,
    b: u32,
    q: u32,
    t: f64,
    n: u32,
) -> Result<f64> {
    check_signed_exponent(q)?;
    check_t(t)?;
    let bn = u64::from(b)
        .checked_pow(n)
        .ok_or_else(|| CoreError::invalid("b^n overflows"))?;
    let count = increment_count(bn, t, n, DEFAULT_INCREMENT_BUDGET, "signed_partition_sum")?;
    let value_at = |k: u64| g((k.min(bn)) as f64 / bn as f64);
    Ok(sum_increments(value_at, count, |d| d.powi(q as i32)))
}

/// Series of partition sums for `n` in `[n_min, n_max]`.
pub fn variation_series(
    spec: &FractalSpec,
    p: f64,
    t: f64,
    n_min: u32,
    n_max: u32,
    signed: bool,
    budget: u64,
) -> Result<VariationSeries> {
    if n_min > n_max {
        return Err(CoreError::invalid(format!(
            "empty range: n_min={n_min} > n_max={n_max}"
        )));
    }
    let mut values = Vec::with_capacity((n_max - n_min + 1) as usize);
    for n in n_min..=n_max {
        let v = if signed {
            let q = p as u32;
            if p != q as f64 {
                return Err(CoreError::invalid(format!(
                    "signed variation requires an odd integer exponent, got p={p}"
                )));
            }
            signed_partition_sum_budgeted(spec, q, t, n, budget)?
        } else {
            partition_sum_budgeted(spec, p, t, n, budget)?
        };
        values.push((n, v));
    }
    Ok(VariationSeries {
        p,
        t,
        b: spec.b(),
        signed,
        values,
    })
}
