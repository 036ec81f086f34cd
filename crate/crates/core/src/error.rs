use thiserror::Error;

/// Failures raised by the analytic model, the solver and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument {value} outside the domain of {function}: {reason}")]
    Domain {
        function: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("root finding did not converge for {what} (last residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("degenerate roots of kappa(s) = {q}: {detail}")]
    DegenerateRoots { q: f64, detail: String },

    #[error("removable singularity in {function}: |denominator| = {gap:e}")]
    Singularity { function: &'static str, gap: f64 },

    #[error("K1 has no sign change on [{lo}, {hi}] (K1(lo) = {k_lo}, K1(hi) = {k_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        k_lo: f64,
        k_hi: f64,
    },

    #[error("face value is zero: the unlevered firm has no bankruptcy level")]
    Unlevered,

    #[error("log-distance {distance} above the boundary exceeds the evaluation cap {cap}")]
    OutOfRange { distance: f64, cap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
