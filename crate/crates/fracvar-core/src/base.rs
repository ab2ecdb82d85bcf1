//! Admissible base functions: period 1, Lipschitz, vanishing on the integers.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{CoreError, Result};

/// A base map `phi` of the fractal series.
///
/// Every kind is periodic with period 1, Lipschitz continuous, and zero on
/// every integer. The Lipschitz constant and sup norm are analytic per kind.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseFunction {
    /// Distance to the nearest integer.
    Tent,
    /// Two linear pieces meeting at `ell/b` with peak value 1/2.
    SkewedTent { b: u32, ell: u32 },
    /// `amplitude * sin(2 pi t)`.
    Sine { amplitude: f64 },
    /// `inner(t) - alpha * inner(b t)`; makes the fractal series collapse
    /// to `inner` itself.
    Degenerate {
        inner: Box<BaseFunction>,
        alpha: f64,
        b: u32,
    },
    /// Linear interpolation of breakpoints on [0,1]; the first breakpoint
    /// must be (0,0) and the last (1,0).
    PiecewiseLinear { points: Vec<(f64, f64)> },
}

/// Outcome of sampling checks against the standing assumptions on `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub periodic: bool,
    pub vanishes_on_integers: bool,
    pub lipschitz_ok: bool,
}

impl AdmissibilityReport {
    pub fn all_ok(&self) -> bool {
        self.periodic && self.vanishes_on_integers && self.lipschitz_ok
    }
}

/// Result of the truncated sign condition on `{phi(b^-k)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SufficientConditionReport {
    pub holds: bool,
    pub witness_k: Option<u32>,
}

impl BaseFunction {
    pub fn tent() -> Self {
        BaseFunction::Tent
    }

    pub fn skewed_tent(b: u32, ell: u32) -> Result<Self> {
        if b < 2 {
            return Err(CoreError::invalid(format!("skewed tent requires b >= 2, got {b}")));
        }
        if ell < 1 || ell > b - 1 {
            return Err(CoreError::invalid(format!(
                "skewed tent requires 1 <= ell <= b-1, got ell={ell}, b={b}"
            )));
        }
        Ok(BaseFunction::SkewedTent { b, ell })
    }

    pub fn sine(amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(CoreError::invalid("sine amplitude must be finite"));
        }
        Ok(BaseFunction::Sine { amplitude })
    }

    pub fn degenerate(inner: BaseFunction, alpha: f64, b: u32) -> Result<Self> {
        if b < 2 {
            return Err(CoreError::invalid("degenerate base requires b >= 2"));
        }
        if !(alpha.abs() < 1.0) || alpha == 0.0 {
            return Err(CoreError::invalid("degenerate base requires 0 < |alpha| < 1"));
        }
        Ok(BaseFunction::Degenerate {
            inner: Box::new(inner),
            alpha,
            b,
        })
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(CoreError::invalid("piecewise linear base needs at least 2 breakpoints"));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first != (0.0, 0.0) || last.0 != 1.0 || last.1 != 0.0 {
            return Err(CoreError::invalid(
                "piecewise linear breakpoints must start at (0,0) and end at (1,0)",
            ));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(CoreError::invalid("breakpoint abscissae must be strictly increasing"));
            }
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(CoreError::invalid("breakpoints must be finite"));
        }
        Ok(BaseFunction::PiecewiseLinear { points })
    }

    /// Value of `phi` at `t`, via periodic reduction `t - floor(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let u = t - t.floor();
        match self {
            BaseFunction::Tent => u.min(1.0 - u),
            BaseFunction::SkewedTent { b, ell } => {
                let b = f64::from(*b);
                let ell = f64::from(*ell);
                if u * b <= ell {
                    u * b / (2.0 * ell)
                } else {
                    (1.0 - u) * b / (2.0 * (b - ell))
                }
            }
            BaseFunction::Sine { amplitude } => amplitude * (TAU * u).sin(),
            BaseFunction::Degenerate { inner, alpha, b } => {
                inner.eval(u) - alpha * inner.eval(f64::from(*b) * u)
            }
            BaseFunction::PiecewiseLinear { points } => {
                // u in [0,1); find the segment containing it.
                let idx = points.partition_point(|(x, _)| *x <= u);
                if idx == 0 {
                    return points[0].1;
                }
                let (x0, y0) = points[idx - 1];
                let (x1, y1) = points[idx.min(points.len() - 1)];
                if x1 == x0 {
                    y0
                } else {
                    y0 + (y1 - y0) * (u - x0) / (x1 - x0)
                }
            }
        }
    }

    /// Analytic Lipschitz constant per kind.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            BaseFunction::Tent => 1.0,
            BaseFunction::SkewedTent { b, ell } => {
                let b = f64::from(*b);
                let ell = f64::from(*ell);
                (b / (2.0 * ell)).max(b / (2.0 * (b - ell)))
            }
            BaseFunction::Sine { amplitude } => TAU * amplitude.abs(),
            BaseFunction::Degenerate { inner, alpha, b } => {
                inner.lipschitz_constant() * (1.0 + alpha.abs() * f64::from(*b))
            }
            BaseFunction::PiecewiseLinear { points } => points
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Analytic sup norm per kind.
    pub fn sup_norm(&self) -> f64 {
        match self {
            BaseFunction::Tent | BaseFunction::SkewedTent { .. } => 0.5,
            BaseFunction::Sine { amplitude } => amplitude.abs(),
            BaseFunction::Degenerate { inner, alpha, .. } => {
                inner.sup_norm() * (1.0 + alpha.abs())
            }
            BaseFunction::PiecewiseLinear { points } => {
                points.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BaseFunction::Tent => "tent",
            BaseFunction::SkewedTent { .. } => "skewed",
            BaseFunction::Sine { .. } => "sine",
            BaseFunction::Degenerate { .. } => "degenerate",
            BaseFunction::PiecewiseLinear { .. } => "pwl",
        }
    }

    /// Config-style label, e.g. `skewed:l=1` or `sine:amp=0.5`.
    pub fn label(&self) -> String {
        match self {
            BaseFunction::Tent => String::from("tent"),
            BaseFunction::SkewedTent { ell, .. } => format!("skewed:l={ell}"),
            BaseFunction::Sine { amplitude } => format!("sine:amp={amplitude}"),
            BaseFunction::Degenerate { inner, .. } => {
                format!("degenerate:inner={}", inner.label())
            }
            BaseFunction::PiecewiseLinear { .. } => String::from("pwl"),
        }
    }

    /// Sampling check of periodicity, integer zeros and the Lipschitz bound.
    /// Failures are reported, never raised.
    pub fn check_admissible(&self, sample_count: u32, tolerance: f64) -> AdmissibilityReport {
        let n = sample_count.max(2);
        let lip = self.lipschitz_constant();
        let mut periodic = true;
        let mut lipschitz_ok = true;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..n {
            let t = f64::from(i) / f64::from(n);
            let v = self.eval(t);
            if (self.eval(t + 1.0) - v).abs() > tolerance {
                periodic = false;
            }
            if let Some((tp, vp)) = prev {
                let quotient = ((v - vp) / (t - tp)).abs();
                if quotient > lip * (1.0 + tolerance) {
                    lipschitz_ok = false;
                }
            }
            prev = Some((t, v));
        }
        // eval wraps t=1 to 0, so probe the left limit at 1 instead.
        let h = 1e-9;
        let vanishes_on_integers = self.eval(0.0).abs() <= tolerance
            && self.eval(1.0 - h).abs() <= tolerance + lip * h;
        AdmissibilityReport {
            periodic,
            vanishes_on_integers,
            lipschitz_ok,
        }
    }

    /// Truncated check of the sign condition `{0} != {phi(b^-k)} subset [0, inf)`.
    ///
    /// `holds` is true iff every sampled `phi(b^-k)` for `k <= k_max` is
    /// nonnegative and at least one is strictly positive; `witness_k` is the
    /// smallest such `k`.
    pub fn check_sufficient_condition(&self, b: u32, k_max: u32) -> Result<SufficientConditionReport> {
        if b < 2 {
            return Err(CoreError::invalid("sufficient condition requires b >= 2"));
        }
        if k_max < 1 {
            return Err(CoreError::invalid("sufficient condition requires k_max >= 1"));
        }
        let mut witness_k = None;
        let mut x = 1.0;
        for k in 1..=k_max {
            x /= f64::from(b);
            let v = self.eval(x);
            if v < 0.0 {
                return Ok(SufficientConditionReport {
                    holds: false,
                    witness_k: None,
                });
            }
            if v > 0.0 && witness_k.is_none() {
                witness_k = Some(k);
            }
        }
        Ok(SufficientConditionReport {
            holds: witness_k.is_some(),
            witness_k,
        })
    }
}
