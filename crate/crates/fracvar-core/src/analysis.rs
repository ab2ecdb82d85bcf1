//! Regime classification, variation slopes, signed-variation limits,
//! Hurst sweeps, and empirical convergence reports.

use alloc::format;
use alloc::vec::Vec;

use crate::base::BaseFunction;
use crate::error::{CoreError, Result};
use crate::fractal::FractalSpec;
use crate::increments::{
    exact_partial_sum_distribution, expected_abs_power, markov_params, mc_estimate,
    preferred_mode, two_point_law_of, DistributionMode,
};
use crate::moments::{abs_moment_truncated, moment_tail_bound, moments_recursive, IncrementLaw};
use crate::variation::{variation_series, VariationSeries};

/// Trichotomy over `|alpha|` vs `1/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    BoundedVariation,
    CriticalVanishing,
    Rough { q: f64, hurst: f64 },
}

/// Evidence for a degenerate (`Z = 0` a.s.) parameterization: the largest
/// partial-sum magnitude over the whole exact support at the given depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateEvidence {
    pub max_abs_partial_sum: f64,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub degenerate_evidence: Option<DegenerateEvidence>,
    pub sufficient_condition_holds: Option<bool>,
}

const CRITICAL_TOL: f64 = 1e-12;

/// Classify a spec by the parameter test; in the rough regime, attach the
/// truncated sign-condition check and degenerate evidence from an exact
/// distribution of bounded depth.
pub fn classify(spec: &FractalSpec) -> RegimeReport {
    let ab = spec.alpha().abs() * f64::from(spec.b());
    if (ab - 1.0).abs() <= CRITICAL_TOL {
        return RegimeReport {
            regime: Regime::CriticalVanishing,
            degenerate_evidence: None,
            sufficient_condition_holds: None,
        };
    }
    if ab < 1.0 {
        return RegimeReport {
            regime: Regime::BoundedVariation,
            degenerate_evidence: None,
            sufficient_condition_holds: None,
        };
    }
    let q = spec.q_exponent().expect("rough regime");
    let sufficient = spec
        .phi()
        .check_sufficient_condition(spec.b(), 60)
        .ok()
        .map(|r| r.holds);
    let evidence = degenerate_evidence(spec, 12);
    RegimeReport {
        regime: Regime::Rough {
            q,
            hurst: spec.hurst(),
        },
        degenerate_evidence: evidence,
        sufficient_condition_holds: sufficient,
    }
}

/// Max |S_n| over the exact support at depth `min(requested, budget-capped)`.
pub fn degenerate_evidence(spec: &FractalSpec, requested_depth: u32) -> Option<DegenerateEvidence> {
    let mode = preferred_mode(spec);
    let atom_cap: u64 = 1 << 20;
    let depth = match mode {
        DistributionMode::GenericEnumeration => {
            let mut d = 0;
            let mut count = 1u64;
            while d < requested_depth && count * u64::from(spec.b()) <= atom_cap {
                count *= u64::from(spec.b());
                d += 1;
            }
            d
        }
        _ => requested_depth,
    };
    let dist = exact_partial_sum_distribution(spec, depth, mode, atom_cap).ok()?;
    Some(DegenerateEvidence {
        max_abs_partial_sum: dist.max_abs_value(),
        depth,
    })
}

/// How to compute the slope `E[|Z|^q]` of the qth variation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeMethod {
    /// Moment recursion; requires an even integer `q` and a two-point law.
    Recursion,
    /// Exact truncated enumeration with a rigorous tail bound.
    Enumeration { depth: Option<u32> },
    /// Monte Carlo with reproducible seeding.
    MonteCarlo {
        depth: Option<u32>,
        samples: u64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeResult {
    pub q: f64,
    pub slope: f64,
    pub method: &'static str,
    /// Rigorous bound (enumeration), standard error (Monte Carlo), or 0
    /// (recursion, exact up to rounding).
    pub error_measure: f64,
}

const ODD_INTEGER_TOL: f64 = 1e-9;

/// Slope `E[|Z|^q]` of the qth variation in the rough regime.
pub fn variation_slope(spec: &FractalSpec, method: SlopeMethod, budget: u64) -> Result<SlopeResult> {
    let q = spec.q_exponent()?;
    match method {
        SlopeMethod::Recursion => {
            let k = q.round();
            if (q - k).abs() > ODD_INTEGER_TOL || (k as i64) % 2 != 0 {
                return Err(CoreError::invalid(format!(
                    "recursion slope requires an even integer q, got q={q}"
                )));
            }
            let law = two_point_law_of(spec).ok_or(CoreError::ModeMismatch {
                mode: "recursion",
                kind: spec.phi().kind_name(),
            })?;
            let table = moments_recursive(law.mu, law.nu, law.p, spec.gamma(), k as u32)?;
            Ok(SlopeResult {
                q,
                slope: table.moments[k as usize],
                method: "recursion",
                error_measure: 0.0,
            })
        }
        SlopeMethod::Enumeration { depth } => {
            let gamma = spec.gamma();
            if let Some(law) = increment_law_of(spec) {
                let depth = depth.unwrap_or_else(|| {
                    let mut d = 1;
                    while law.atoms_required(d + 1) <= budget && d < 30 {
                        d += 1;
                    }
                    d
                });
                let tm = abs_moment_truncated(&law, gamma, q, depth, budget)?;
                Ok(SlopeResult {
                    q,
                    slope: tm.value,
                    method: "enumeration",
                    error_measure: tm.error_bound,
                })
            } else {
                // generic base: uniform site enumeration
                let b = u64::from(spec.b());
                let depth = depth.unwrap_or_else(|| {
                    let mut d = 0;
                    let mut count = 1u64;
                    while d < 24 && count.saturating_mul(b) <= budget {
                        count *= b;
                        d += 1;
                    }
                    d
                });
                let dist = exact_partial_sum_distribution(
                    spec,
                    depth,
                    DistributionMode::GenericEnumeration,
                    budget,
                )?;
                Ok(SlopeResult {
                    q,
                    slope: expected_abs_power(&dist, q),
                    method: "enumeration",
                    error_measure: moment_tail_bound(
                        spec.phi().lipschitz_constant(),
                        gamma,
                        q,
                        depth,
                    ),
                })
            }
        }
        SlopeMethod::MonteCarlo {
            depth,
            samples,
            seed,
        } => {
            let est = mc_estimate(spec, q, false, depth, samples, seed)?;
            Ok(SlopeResult {
                q,
                slope: est.estimate,
                method: "monte_carlo",
                error_measure: est.std_error,
            })
        }
    }
}

fn increment_law_of(spec: &FractalSpec) -> Option<IncrementLaw> {
    if let Some(law) = two_point_law_of(spec) {
        return Some(IncrementLaw::TwoPoint(law));
    }
    match spec.phi() {
        BaseFunction::Tent if spec.b() % 2 == 1 => {
            markov_params(spec.b()).ok().map(IncrementLaw::Ternary)
        }
        _ => None,
    }
}

/// Limit behavior of the signed qth variation for the skewed-tent family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignedLimit {
    /// Symmetric case: the limit exists and is 0.
    IdenticallyZero,
    /// alpha > 0: the limit exists and equals `E[Z^q]`.
    Limit(f64),
    /// alpha < 0: convergence only along even or odd levels, to opposite
    /// values.
    OscillatingPair { even_n: f64, odd_n: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLimitResult {
    pub q: u32,
    pub kind: SignedLimit,
}

/// Signed qth-variation limit for a spec whose base is a (skewed) tent
/// with a two-point increment law; `q = -log_|alpha| b` must be an odd
/// integer.
pub fn signed_variation_limit(spec: &FractalSpec) -> Result<SignedLimitResult> {
    let q_real = spec.q_exponent()?;
    let q = q_real.round();
    if (q_real - q).abs() > ODD_INTEGER_TOL || (q as i64) % 2 == 0 {
        return Err(CoreError::invalid(format!(
            "signed variation limit requires odd integer q, got q={q_real}"
        )));
    }
    let q = q as u32;
    let law = two_point_law_of(spec).ok_or(CoreError::ModeMismatch {
        mode: "signed-limit",
        kind: spec.phi().kind_name(),
    })?;
    let symmetric = law.b % 2 == 0 && law.ell == law.b / 2;
    if symmetric {
        return Ok(SignedLimitResult {
            q,
            kind: SignedLimit::IdenticallyZero,
        });
    }
    let table = moments_recursive(law.mu, law.nu, law.p, spec.gamma(), q)?;
    let value = table.moments[q as usize];
    let kind = if spec.alpha() > 0.0 {
        SignedLimit::Limit(value)
    } else {
        SignedLimit::OscillatingPair {
            even_n: value,
            odd_n: -value,
        }
    };
    Ok(SignedLimitResult { q, kind })
}

/// One row of a Hurst sweep; failures are tagged per row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub hurst: f64,
    pub outcome: Result<SlopeResult>,
}

/// Default grid `H = 0.05, 0.10, ..., 0.95`.
pub fn default_hurst_grid() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) * 0.05).collect()
}

/// Slope estimates across a grid of Hurst parameters (`alpha = b^-H`).
/// Rows are ordered by ascending `H`; a failed row carries its error.
pub fn hurst_sweep(
    phi: &BaseFunction,
    b: u32,
    h_grid: &[f64],
    method: SlopeMethod,
    budget: u64,
) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = h_grid
        .iter()
        .map(|&h| {
            let outcome = if h <= 0.0 || h >= 1.0 {
                Err(CoreError::invalid(format!("H must lie in (0,1), got {h}")))
            } else {
                FractalSpec::from_hurst(phi.clone(), b, h)
                    .and_then(|spec| variation_slope(&spec, method, budget))
            };
            SweepRow { hurst: h, outcome }
        })
        .collect();
    rows.sort_by(|a, b| a.hurst.total_cmp(&b.hurst));
    rows
}

/// Verdict on the apparent limit of a partition-sum sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitVerdict {
    Vanishing,
    Finite,
    Diverging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub series: VariationSeries,
    /// Least-squares slope of `log V_{p,t,n}` against `n`.
    pub fitted_rate: f64,
    /// `log(|alpha|^p b)`, the leading growth rate of the moment form.
    pub theoretical_rate: f64,
    pub observed: LimitVerdict,
    pub predicted: LimitVerdict,
}

const RATE_TOL: f64 = 0.05;

/// Fit the empirical growth rate of `V_{p,t,n}` and compare it with the
/// theoretical trichotomy.
pub fn convergence_report(
    spec: &FractalSpec,
    p: f64,
    t: f64,
    n_min: u32,
    n_max: u32,
    budget: u64,
) -> Result<ConvergenceReport> {
    let series = variation_series(spec, p, t, n_min, n_max, false, budget)?;
    let theoretical_rate = p * spec.alpha().abs().ln() + f64::from(spec.b()).ln();
    let pts: Vec<(f64, f64)> = series
        .values
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(n, v)| (f64::from(*n), v.ln()))
        .collect();
    let fitted_rate = if pts.len() < 2 {
        f64::NEG_INFINITY
    } else {
        least_squares_slope(&pts)
    };
    let verdict = |rate: f64| {
        if rate > RATE_TOL {
            LimitVerdict::Diverging
        } else if rate < -RATE_TOL {
            LimitVerdict::Vanishing
        } else {
            LimitVerdict::Finite
        }
    };
    Ok(ConvergenceReport {
        predicted: verdict(theoretical_rate),
        observed: verdict(fitted_rate),
        fitted_rate,
        theoretical_rate,
        series,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent(b: u32, alpha: f64) -> FractalSpec {
        FractalSpec::new(BaseFunction::Tent, b, alpha).unwrap()
    }

    #[test]
    fn classify_trichotomy() {
        assert_eq!(classify(&tent(2, 0.25)).regime, Regime::BoundedVariation);
        assert_eq!(classify(&tent(2, 0.5)).regime, Regime::CriticalVanishing);
        let report = classify(&tent(2, 0.7));
        match report.regime {
            Regime::Rough { q, hurst } => {
                assert!((q * hurst - 1.0).abs() < 1e-12);
            }
            other => panic!("expected rough, got {other:?}"),
        }
        assert_eq!(report.sufficient_condition_holds, Some(true));
        let ev = report.degenerate_evidence.unwrap();
        assert!(ev.max_abs_partial_sum > 0.1); // tent is genuinely fractal here
    }

    #[test]
    fn degenerate_family_evidence_decays_geometrically() {
        let phi =
            BaseFunction::degenerate(BaseFunction::sine(1.0).unwrap(), 0.7, 2).unwrap();
        let spec = FractalSpec::new(phi, 2, 0.7).unwrap();
        let e8 = degenerate_evidence(&spec, 8).unwrap().max_abs_partial_sum;
        let e12 = degenerate_evidence(&spec, 12).unwrap().max_abs_partial_sum;
        // S_n = (alpha b)^-n * lambda_{n, R_n}(inner), so the support
        // shrinks at rate 1/(alpha b) = 1/1.4 per level.
        let expected_ratio = 1.4f64.powi(-4);
        assert!((e12 / e8 - expected_ratio).abs() < 0.3 * expected_ratio);
        assert!(e12 < 0.2);
    }

    #[test]
    fn recursion_slope_symmetric_q2() {
        let spec = tent(2, 0.5f64.sqrt());
        let r = variation_slope(&spec, SlopeMethod::Recursion, 1 << 20).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12);
        assert_eq!(r.method, "recursion");
    }

    #[test]
    fn recursion_slope_rejects_odd_q() {
        let spec = tent(2, 2.0f64.powf(-1.0 / 3.0));
        assert!(variation_slope(&spec, SlopeMethod::Recursion, 1 << 20).is_err());
    }

    #[test]
    fn enumeration_slope_markov_positive() {
        let spec = tent(3, 3.0f64.powf(-0.5));
        let r =
            variation_slope(&spec, SlopeMethod::Enumeration { depth: Some(14) }, 1 << 21).unwrap();
        assert!(r.slope > 0.0);
        assert!(r.slope.is_finite());
    }

    #[test]
    fn enumeration_slope_floors_signed_moment() {
        let phi = BaseFunction::skewed_tent(3, 1).unwrap();
        let spec = FractalSpec::new(phi, 3, 3.0f64.powf(-1.0 / 3.0)).unwrap();
        let r =
            variation_slope(&spec, SlopeMethod::Enumeration { depth: Some(20) }, 1 << 22).unwrap();
        assert!(r.slope + r.error_measure >= 27.0 / 256.0);
    }

    #[test]
    fn slope_requires_rough_regime() {
        let spec = tent(2, 0.25);
        assert!(matches!(
            variation_slope(&spec, SlopeMethod::Recursion, 1 << 20),
            Err(CoreError::OutOfRegime { .. })
        ));
    }

    #[test]
    fn signed_limit_cases() {
        // symmetric: b even, ell = b/2
        let spec = tent(2, 2.0f64.powf(-1.0 / 3.0));
        let r = signed_variation_limit(&spec).unwrap();
        assert_eq!(r.kind, SignedLimit::IdenticallyZero);
        assert_eq!(r.q, 3);

        let phi = BaseFunction::skewed_tent(3, 1).unwrap();
        let spec = FractalSpec::new(phi, 3, 3.0f64.powf(-1.0 / 3.0)).unwrap();
        let r = signed_variation_limit(&spec).unwrap();
        match r.kind {
            SignedLimit::Limit(v) => assert!((v - 27.0 / 256.0).abs() < 1e-13),
            other => panic!("expected limit, got {other:?}"),
        }

        let phi = BaseFunction::skewed_tent(3, 1).unwrap();
        let spec = FractalSpec::new(phi, 3, -(3.0f64.powf(-1.0 / 3.0))).unwrap();
        let r = signed_variation_limit(&spec).unwrap();
        match r.kind {
            SignedLimit::OscillatingPair { even_n, odd_n } => {
                assert!((even_n + 27.0 / 320.0).abs() < 1e-13);
                assert_eq!(even_n, -odd_n);
            }
            other => panic!("expected oscillating pair, got {other:?}"),
        }
    }

    #[test]
    fn signed_limit_rejects_non_odd_q() {
        let spec = tent(2, 0.5f64.sqrt()); // q = 2
        assert!(signed_variation_limit(&spec).is_err());
    }

    #[test]
    fn sweep_handles_bad_rows() {
        let rows = hurst_sweep(
            &BaseFunction::Tent,
            2,
            &[0.5, 0.0, 0.9],
            SlopeMethod::Enumeration { depth: Some(12) },
            1 << 20,
        );
        assert_eq!(rows.len(), 3);
        assert!(rows[0].outcome.is_err()); // H = 0 sorted first
        assert!(rows[1].outcome.is_ok());
        assert!(rows[2].outcome.is_ok());
    }

    #[test]
    fn convergence_trichotomy_at_cubic_scaling() {
        let spec = tent(2, 2.0f64.powf(-1.0 / 3.0));
        let r = convergence_report(&spec, 3.0, 1.0, 4, 12, 1 << 20).unwrap();
        assert_eq!(r.predicted, LimitVerdict::Finite);
        assert_eq!(r.observed, LimitVerdict::Finite);

        let r = convergence_report(&spec, 2.0, 1.0, 4, 12, 1 << 20).unwrap();
        assert_eq!(r.predicted, LimitVerdict::Diverging);
        assert_eq!(r.observed, LimitVerdict::Diverging);

        let r = convergence_report(&spec, 4.0, 1.0, 4, 12, 1 << 20).unwrap();
        assert_eq!(r.predicted, LimitVerdict::Vanishing);
        assert_eq!(r.observed, LimitVerdict::Vanishing);
    }
}
