//! Session and sweep orchestration.
//!
//! A session couples one responder to one schedule for a fixed duration. A
//! sweep repeats sessions over a grid of nominal response rates, aggregating
//! per-rate reinforcement statistics with a 95% highest-density interval.
//! Each `(rate, repetition)` cell owns a derived random stream, so cells can
//! run in any order (or in parallel) without changing a single output bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::responder::{
    step_responder, BurstSpec, CompiledResponder, ResponderSpec, ResponderState,
};
use crate::rng::cell_rng;
use crate::schedule::{step_schedule, CompiledSchedule, ScheduleSpec, ScheduleState};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two
/// samples.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Narrowest contiguous interval holding at least `mass` of the samples.
///
/// Samples are sorted and every window of `ceil(mass * n)` consecutive values
/// is scanned; the narrowest wins and ties go to the leftmost window.
pub fn hdi(samples: &[f64], mass: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "interval mass must be in (0, 1], got {mass}"
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidConfig("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let m = window_len(mass, n);
    let mut best_start = 0usize;
    let mut best_width = f64::INFINITY;
    for start in 0..=(n - m) {
        let width = sorted[start + m - 1] - sorted[start];
        if width < best_width {
            best_width = width;
            best_start = start;
        }
    }
    Ok((sorted[best_start], sorted[best_start + m - 1]))
}

/// `ceil(mass * n)` with a guard against 0.95 * 100 landing a hair above 95
/// in floating point.
fn window_len(mass: f64, n: usize) -> usize {
    let target = mass * n as f64;
    let rounded = target.round();
    let m = if (target - rounded).abs() < 1e-9 {
        rounded
    } else {
        target.ceil()
    };
    (m as usize).clamp(1, n)
}

/// Outcome counts of a single session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub responses: u64,
    pub reinforcers: u64,
    pub duration_s: f64,
    pub response_rate_per_min: f64,
    pub reinforcement_rate_per_min: f64,
}

fn integral_steps(total: f64, part: f64, what: &str) -> Result<u64> {
    if !(part > 0.0) || !(total > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "{what}: need positive duration and step, got {total} / {part}"
        )));
    }
    let q = total / part;
    let r = q.round();
    if r < 1.0 || (q - r).abs() > 1e-6 * q.max(1.0) {
        return Err(Error::InvalidConfig(format!(
            "{what}: {part} s does not divide {total} s"
        )));
    }
    Ok(r as u64)
}

/// Run one session, stepping responder and schedule together.
pub fn run_session<R: rand::Rng + ?Sized>(
    schedule: &ScheduleSpec,
    responder: &ResponderSpec,
    duration_s: f64,
    dt_s: f64,
    rng: &mut R,
) -> Result<SessionRecord> {
    if (responder.step_s - dt_s).abs() > 1e-12 * dt_s.max(1.0) {
        return Err(Error::InvalidConfig(format!(
            "responder step {} s differs from session step {} s",
            responder.step_s, dt_s
        )));
    }
    let steps = integral_steps(duration_s, dt_s, "session")?;
    let compiled_schedule = CompiledSchedule::new(schedule, dt_s)?;
    let compiled_responder = CompiledResponder::new(responder)?;
    let mut schedule_state = ScheduleState::new();
    let mut responder_state = ResponderState::initial(responder);
    let mut responses = 0u64;
    let mut reinforcers = 0u64;
    for _ in 0..steps {
        let response = step_responder(&mut responder_state, &compiled_responder, rng);
        if response {
            responses += 1;
        }
        let outcome = step_schedule(&mut schedule_state, &compiled_schedule, response, rng);
        if outcome.reinforced {
            reinforcers += 1;
        }
    }
    let minutes = duration_s / 60.0;
    Ok(SessionRecord {
        responses,
        reinforcers,
        duration_s,
        response_rate_per_min: responses as f64 / minutes,
        reinforcement_rate_per_min: reinforcers as f64 / minutes,
    })
}

/// `run_session` with a self-contained seed.
pub fn run_session_seeded(
    schedule: &ScheduleSpec,
    responder: &ResponderSpec,
    duration_s: f64,
    dt_s: f64,
    seed: u64,
) -> Result<SessionRecord> {
    let mut rng = cell_rng(seed, responder.rate_per_min, 0);
    run_session(schedule, responder, duration_s, dt_s, &mut rng)
}

/// Sweep-wide session parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub duration_s: f64,
    pub dt_s: f64,
    pub repetitions: u32,
    /// Nominal rates, responses/min; sweeps emit points in ascending order.
    pub rates_per_min: Vec<f64>,
    pub master_seed: u64,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        integral_steps(self.duration_s, self.dt_s, "session")?;
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.rates_per_min.is_empty() {
            return Err(Error::InvalidConfig("rate grid is empty".into()));
        }
        for &b in &self.rates_per_min {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::InvalidConfig(format!("bad rate {b}")));
            }
        }
        Ok(())
    }
}

/// Break-and-run shape applied across a sweep. The swept nominal rate serves
/// as the local operant rate inside runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstShape {
    pub run_start_prob: f64,
    pub break_start_prob: f64,
}

/// Responder recipe instantiated once per sweep point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponderTemplate {
    pub burst: Option<BurstShape>,
}

impl ResponderTemplate {
    pub fn plain() -> Self {
        Self::default()
    }

    pub fn bursty(shape: BurstShape) -> Self {
        ResponderTemplate { burst: Some(shape) }
    }

    /// Concrete responder for one nominal rate.
    pub fn instantiate(&self, rate_per_min: f64, step_s: f64) -> Result<ResponderSpec> {
        let burst = self.burst.map(|shape| BurstSpec {
            run_start_prob: shape.run_start_prob,
            break_start_prob: shape.break_start_prob,
            local_rate_per_min: rate_per_min,
        });
        ResponderSpec::new(rate_per_min, step_s, burst)
    }
}

/// Aggregated statistics for one nominal rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub rate_nominal_per_min: f64,
    pub rate_realized_per_min: f64,
    pub reinf_mean_per_min: f64,
    pub hdi_lo: f64,
    pub hdi_hi: f64,
    /// Per-repetition reinforcement rates, in repetition order.
    pub samples: Vec<f64>,
}

/// Run the `(rate, repetition)` cell on its own derived stream.
pub fn run_cell(
    config: &SessionConfig,
    schedule: &ScheduleSpec,
    template: &ResponderTemplate,
    rate_per_min: f64,
    repetition: u32,
) -> Result<SessionRecord> {
    let responder = template.instantiate(rate_per_min, config.dt_s)?;
    let mut rng = cell_rng(config.master_seed, rate_per_min, repetition);
    run_session(
        schedule,
        &responder,
        config.duration_s,
        config.dt_s,
        &mut rng,
    )
}

/// Run every cell of the sweep (in parallel) and aggregate per rate.
pub fn run_sweep(
    config: &SessionConfig,
    schedule: &ScheduleSpec,
    template: &ResponderTemplate,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let mut rates = config.rates_per_min.clone();
    rates.sort_by(f64::total_cmp);
    if rates.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig("duplicate rates in grid".into()));
    }
    // Fail on construction errors before burning time on the grid.
    for &rate in &rates {
        template.instantiate(rate, config.dt_s)?;
    }

    let reps = config.repetitions;
    let n_cells = rates.len() * reps as usize;
    let records: Vec<SessionRecord> = (0..n_cells)
        .into_par_iter()
        .map(|i| {
            let rate = rates[i / reps as usize];
            let rep = (i % reps as usize) as u32;
            run_cell(config, schedule, template, rate, rep)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(rates.len());
    for (ri, &rate) in rates.iter().enumerate() {
        let cell_records = &records[ri * reps as usize..(ri + 1) * reps as usize];
        let samples: Vec<f64> = cell_records
            .iter()
            .map(|r| r.reinforcement_rate_per_min)
            .collect();
        let realized: Vec<f64> = cell_records
            .iter()
            .map(|r| r.response_rate_per_min)
            .collect();
        let (hdi_lo, hdi_hi) = hdi(&samples, 0.95)?;
        points.push(SweepPoint {
            rate_nominal_per_min: rate,
            rate_realized_per_min: mean(&realized),
            reinf_mean_per_min: mean(&samples),
            hdi_lo,
            hdi_hi,
            samples,
        });
    }
    Ok(points)
}
