//! Seedable Monte Carlo toolkit for random reinforcement schedules.
//!
//! The crate simulates stochastic responders interacting with random
//! interval (RI), random differential-reinforcement-of-low-rates (RDRL),
//! random time (RT), and random ratio (RR) schedules, maps reinforcement
//! rate against response rate, and fits closed-form feedback-function
//! models to the resulting curves.
//!
//! * [`solver`] finds `(T, p)` cycle parameters realizing a target schedule
//!   size within 1% tolerances on the mean and standard deviation.
//! * [`schedule`] and [`responder`] hold the per-step state machines.
//! * [`session`] couples them into sessions and seeded parameter sweeps with
//!   95% highest-density intervals.
//! * [`rff`] evaluates candidate feedback functions and the closed-form
//!   descriptors of the unimodal RDRL curve.
//! * [`fit`] performs bounded nonlinear least squares with AIC/BIC ranking.
//! * [`config`], [`breakrun`], and [`io`] support the declarative experiment
//!   files and the file formats emitted by the command-line tool.
//!
//! Every simulation cell derives its own random stream from the master seed,
//! so results are reproducible bit for bit regardless of thread count or
//! execution order.

pub mod breakrun;
pub mod config;
pub mod error;
pub mod fit;
pub mod io;
pub mod responder;
pub mod rff;
pub mod rng;
pub mod schedule;
pub mod session;
pub mod solver;

pub use breakrun::{run_break_run, BreakRunPoint, BreakRunSettings};
pub use error::{Error, Result};
pub use fit::{aic, bic, compare, fit, FitOptions, FitQuality, FitResult, RankedFit};
pub use responder::{
    response_probability, step_responder, BurstSpec, ResponderSpec, ResponderState,
};
pub use rff::{rachlin_exponent, rdrl_predictions, ModelFamily, RdrlPredictions, RffModel};
pub use schedule::{
    step_schedule, CompiledSchedule, ScheduleKind, ScheduleSpec, ScheduleState, StepOutcome,
};
pub use session::{
    hdi, run_cell, run_session, run_session_seeded, run_sweep, BurstShape, ResponderTemplate,
    SessionConfig, SessionRecord, SweepPoint,
};
pub use solver::{solve_cycle_params, SolverRequest, SolverResult};
