//! The fractal function `f(t) = sum_{m>=0} alpha^m phi(b^m t)` and its
//! evaluation, exact at b-adic points.

use alloc::format;

use crate::base::BaseFunction;
use crate::error::{CoreError, Result};
use crate::kahan::KahanSum;

/// Parameters `(phi, b, alpha)` of the fractal series.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalSpec {
    phi: BaseFunction,
    b: u32,
    alpha: f64,
}

impl FractalSpec {
    pub fn new(phi: BaseFunction, b: u32, alpha: f64) -> Result<Self> {
        if b < 2 {
            return Err(CoreError::invalid(format!("b must be >= 2, got {b}")));
        }
        if alpha == 0.0 || !(alpha.abs() < 1.0) {
            return Err(CoreError::invalid(format!(
                "alpha must satisfy 0 < |alpha| < 1, got {alpha}"
            )));
        }
        if let BaseFunction::SkewedTent { b: phi_b, .. } = &phi {
            if *phi_b != b {
                return Err(CoreError::invalid(format!(
                    "skewed tent base built for b={phi_b} used with spec b={b}"
                )));
            }
        }
        Ok(Self { phi, b, alpha })
    }

    /// Parameterization by the Hurst parameter: `alpha = b^(-H)`.
    pub fn from_hurst(phi: BaseFunction, b: u32, hurst: f64) -> Result<Self> {
        if !(hurst > 0.0) || !hurst.is_finite() {
            return Err(CoreError::invalid(format!("hurst must be > 0, got {hurst}")));
        }
        let alpha = f64::from(b).powf(-hurst);
        Self::new(phi, b, alpha)
    }

    pub fn phi(&self) -> &BaseFunction {
        &self.phi
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Variation exponent `q = -log_{|alpha|} b`; defined in the rough
    /// regime `1/b < |alpha| < 1`.
    pub fn q_exponent(&self) -> Result<f64> {
        if !self.is_rough() {
            return Err(CoreError::OutOfRegime {
                alpha_abs: self.alpha.abs(),
                b: self.b,
            });
        }
        Ok(-f64::from(self.b).ln() / self.alpha.abs().ln())
    }

    /// Hurst parameter `H = -log_b |alpha| = 1/q`.
    pub fn hurst(&self) -> f64 {
        -self.alpha.abs().ln() / f64::from(self.b).ln()
    }

    /// `1/(alpha b)`, the (signed) geometric weight of the increment process.
    pub fn gamma(&self) -> f64 {
        1.0 / (self.alpha * f64::from(self.b))
    }

    pub fn is_rough(&self) -> bool {
        self.alpha.abs() * f64::from(self.b) > 1.0
    }

    /// Truncated series value within `tol` of `f(t)`, using the tail bound
    /// `sup|phi| * |alpha|^N / (1 - |alpha|) <= tol`. Arguments above 1
    /// evaluate as `f(min(t,1))`.
    pub fn eval_f(&self, t: f64, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(CoreError::invalid(format!("tol must be > 0, got {tol}")));
        }
        let t = t.min(1.0);
        let n_terms = self.truncation_terms(tol);
        let b = f64::from(self.b);
        let mut acc = KahanSum::new();
        let mut coeff = 1.0;
        let mut scale = 1.0;
        for _ in 0..n_terms {
            acc += coeff * self.phi.eval(scale * t);
            coeff *= self.alpha;
            scale *= b;
        }
        Ok(acc.value())
    }

    /// Number of series terms needed for truncation error `<= tol`.
    pub fn truncation_terms(&self, tol: f64) -> u32 {
        let sup = self.phi.sup_norm();
        if sup == 0.0 {
            return 0;
        }
        let a = self.alpha.abs();
        let needed = (tol * (1.0 - a) / sup).ln() / a.ln();
        if needed <= 0.0 {
            1
        } else {
            (needed.ceil() as u32).min(10_000).max(1)
        }
    }

    /// Exact value of `f` at the b-adic point `k b^-n` via the n-term
    /// truncation; no truncation error beyond rounding.
    pub fn eval_f_badic(&self, k: u64, n: u32) -> Result<f64> {
        let bn = self.badic_count(n)?;
        if k > bn {
            return Err(CoreError::IndexOutOfRange { index: k, bound: bn + 1 });
        }
        let mut acc = KahanSum::new();
        let mut coeff = 1.0;
        // term m: phi(k b^{m-n}) = phi((k mod b^{n-m}) / b^{n-m})
        let mut denom = bn; // b^{n-m}
        let b = u64::from(self.b);
        for _ in 0..n {
            let r = k % denom;
            acc += coeff * self.phi.eval(r as f64 / denom as f64);
            coeff *= self.alpha;
            denom /= b;
        }
        Ok(acc.value())
    }

    /// `b^n` with an overflow guard.
    pub fn badic_count(&self, n: u32) -> Result<u64> {
        u64::from(self.b).checked_pow(n).ok_or_else(|| {
            CoreError::invalid(format!("b^n overflows: b={}, n={n}", self.b))
        })
    }
}
