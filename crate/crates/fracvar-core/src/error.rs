use alloc::string::String;
use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: u64, bound: u64 },
    #[error("{operation}: budget exceeded at n={n} ({required} > {budget})")]
    BudgetExceeded {
        operation: &'static str,
        n: u32,
        required: u64,
        budget: u64,
    },
    #[error("out of regime: |alpha| <= 1/b (|alpha|={alpha_abs}, b={b})")]
    OutOfRegime { alpha_abs: f64, b: u32 },
    #[error("distribution mode {mode} does not match base function kind {kind}")]
    ModeMismatch {
        mode: &'static str,
        kind: &'static str,
    },
}

pub type Result<T> = core::result::Result<T, CoreError>;

impl CoreError {
    pub(crate) fn invalid(msg: impl core::fmt::Display) -> Self {
        use alloc::string::ToString;
        CoreError::InvalidParameter(msg.to_string())
    }
}
