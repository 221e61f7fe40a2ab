use thiserror::Error;

/// Errors raised across the analysis, tuning and simulation layers.
///
/// Instability is never an error: verdicts, margins and diverging traces are
/// returned as data.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate feedback loop: 1 + L(s) is identically zero")]
    DegenerateLoop,

    #[error("transfer function has a pole on the imaginary axis at omega = {omega} p.u.")]
    PoleOnGrid { omega: f64 },

    #[error("power transfer {p_ref} p.u. exceeds the power-angle limit (sin theta_0 = {sin_theta})")]
    PowerAngleLimit { p_ref: f64, sin_theta: f64 },

    #[error("numerical failure: {what} (residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    #[error("degenerate polynomial order: leading coefficient is zero")]
    DegenerateOrder,

    #[error("wrong analysis regime: {0}")]
    WrongRegime(String),

    #[error("loop magnitude never reaches unity in the searched band")]
    NoCrossover,

    #[error("gain margin {target_gm} is outside the admissible interval ({lo}, {hi}) for a {floor_deg} deg phase floor")]
    InfeasibleMargin {
        target_gm: f64,
        floor_deg: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid operating point: {0}")]
    InvalidOperatingPoint(String),

    #[error("tuning self-check failed: measured g_m = {measured_gm}, target {target_gm}")]
    SelfCheck { measured_gm: f64, target_gm: f64 },

    #[error("closed loop is not strictly stable; poles: {poles}")]
    UnstableLoop { poles: String },

    #[error("runs cover disjoint time ranges")]
    IncomparableRuns,

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
