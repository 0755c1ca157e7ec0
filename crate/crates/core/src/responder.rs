//! Stochastic responders.
//!
//! A plain responder emits a response at each step as a Bernoulli trial whose
//! probability realizes a nominal rate of `B` responses per minute at step
//! `t`: `p_b = B / (60 / t)`. An optional two-state break-and-run chain
//! modulates emission: the responder switches between a pausing and a running
//! mode with per-step probabilities, and only responds while running, at the
//! local operant rate.

use rand::distributions::{Bernoulli, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-step probability of a response for a nominal rate (responses/min) at
/// step length `step_s`.
pub fn response_probability(rate_per_min: f64, step_s: f64) -> Result<f64> {
    if !(step_s > 0.0) || !step_s.is_finite() {
        return Err(Error::InvalidResponder(format!(
            "step must be positive, got {step_s}"
        )));
    }
    if !(rate_per_min >= 0.0) || !rate_per_min.is_finite() {
        return Err(Error::InvalidResponder(format!(
            "rate must be nonnegative, got {rate_per_min}"
        )));
    }
    let prob = rate_per_min * step_s / 60.0;
    if prob > 1.0 {
        return Err(Error::RateUnrepresentable {
            rate_per_min,
            step_s,
            prob,
        });
    }
    Ok(prob)
}

/// Break-and-run parameters, all interpreted per simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstSpec {
    /// Chance of starting a run while pausing.
    pub run_start_prob: f64,
    /// Chance of starting a break while running.
    pub break_start_prob: f64,
    /// Response rate inside runs, responses/min.
    pub local_rate_per_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponderSpec {
    /// Nominal response rate, responses/min. Ignored while a burst chain is
    /// present (the local rate applies instead).
    pub rate_per_min: f64,
    /// Simulation step, seconds.
    pub step_s: f64,
    pub burst: Option<BurstSpec>,
}

impl ResponderSpec {
    pub fn new(rate_per_min: f64, step_s: f64, burst: Option<BurstSpec>) -> Result<Self> {
        response_probability(rate_per_min, step_s)?;
        if let Some(b) = &burst {
            if !(b.run_start_prob > 0.0 && b.run_start_prob <= 1.0) {
                return Err(Error::InvalidResponder(format!(
                    "run start probability must be in (0, 1], got {}",
                    b.run_start_prob
                )));
            }
            // A zero break probability is the degenerate always-running chain.
            if !(b.break_start_prob >= 0.0 && b.break_start_prob <= 1.0) {
                return Err(Error::InvalidResponder(format!(
                    "break start probability must be in [0, 1], got {}",
                    b.break_start_prob
                )));
            }
            response_probability(b.local_rate_per_min, step_s)?;
        }
        Ok(ResponderSpec {
            rate_per_min,
            step_s,
            burst,
        })
    }

    pub fn plain(rate_per_min: f64, step_s: f64) -> Result<Self> {
        Self::new(rate_per_min, step_s, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponderMode {
    Running,
    Pausing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponderState {
    pub mode: ResponderMode,
}

impl ResponderState {
    /// Burst responders start out pausing; plain responders are always
    /// nominally running.
    pub fn initial(spec: &ResponderSpec) -> Self {
        let mode = if spec.burst.is_some() {
            ResponderMode::Pausing
        } else {
            ResponderMode::Running
        };
        ResponderState { mode }
    }
}

#[derive(Debug, Clone)]
struct CompiledBurst {
    start_run: Bernoulli,
    start_break: Bernoulli,
    emit_local: Bernoulli,
}

#[derive(Debug, Clone)]
pub struct CompiledResponder {
    emit: Bernoulli,
    burst: Option<CompiledBurst>,
}

impl CompiledResponder {
    pub fn new(spec: &ResponderSpec) -> Result<Self> {
        let bern = |p: f64| {
            Bernoulli::new(p)
                .map_err(|_| Error::InvalidResponder(format!("probability {p} out of range")))
        };
        let emit = bern(response_probability(spec.rate_per_min, spec.step_s)?)?;
        let burst = match &spec.burst {
            None => None,
            Some(b) => Some(CompiledBurst {
                start_run: bern(b.run_start_prob)?,
                start_break: bern(b.break_start_prob)?,
                emit_local: bern(response_probability(b.local_rate_per_min, spec.step_s)?)?,
            }),
        };
        Ok(CompiledResponder { emit, burst })
    }
}

/// Advance the responder one step and report whether it responded.
///
/// With a burst chain the mode transition happens first, then the emission
/// draw; at most one transition per step.
#[inline]
pub fn step_responder<R: Rng + ?Sized>(
    state: &mut ResponderState,
    responder: &CompiledResponder,
    rng: &mut R,
) -> bool {
    match &responder.burst {
        None => responder.emit.sample(rng),
        Some(b) => {
            state.mode = match state.mode {
                ResponderMode::Pausing => {
                    if b.start_run.sample(rng) {
                        ResponderMode::Running
                    } else {
                        ResponderMode::Pausing
                    }
                }
                ResponderMode::Running => {
                    if b.start_break.sample(rng) {
                        ResponderMode::Pausing
                    } else {
                        ResponderMode::Running
                    }
                }
            };
            match state.mode {
                ResponderMode::Running => b.emit_local.sample(rng),
                ResponderMode::Pausing => false,
            }
        }
    }
}
