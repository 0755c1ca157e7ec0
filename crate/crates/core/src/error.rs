use thiserror::Error;

/// Errors produced by simulation setup, solving, fitting, and file IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid responder: {0}")]
    InvalidResponder(String),

    #[error(
        "rate {rate_per_min} resp/min is not representable at step {step_s} s \
         (per-step probability {prob} > 1)"
    )]
    RateUnrepresentable {
        rate_per_min: f64,
        step_s: f64,
        prob: f64,
    },

    #[error("step {dt_s} s does not divide cycle {cycle_s} s")]
    StepCycleMismatch { dt_s: f64, cycle_s: f64 },

    #[error(
        "no (T, p) with T <= {t_max_s} s satisfies the size tolerances for {size_s} s: {detail}"
    )]
    SolverInfeasible {
        size_s: f64,
        t_max_s: f64,
        detail: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("degenerate fit data: {0}")]
    DegenerateFitData(String),

    #[error("fit results come from different datasets and cannot be ranked together")]
    MismatchedFitData,

    #[error("malformed data file {path}: {detail}")]
    MalformedData { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
