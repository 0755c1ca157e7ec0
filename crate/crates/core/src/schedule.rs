//! Discrete-time state machines for the four random schedules.
//!
//! All schedules advance on a fixed step `dt` that must divide the cycle
//! length `T` exactly, so cycle boundaries always land on step boundaries.
//!
//! * RI: at each completed cycle an unarmed schedule arms with probability
//!   `p`; the next response collects the reinforcer and resets the clock.
//!   An armed schedule skips further arming attempts until delivery.
//! * RDRL: every response resets the clock, so a cycle only completes
//!   across a response-free pause. Each pause carries a single arming
//!   chance, drawn when its first cycle completes; a successful draw latches
//!   until the next response, which is reinforced. The pause clock saturates
//!   after that first cycle (waiting longer changes nothing), which makes
//!   the feedback curve unimodal: under a Bernoulli responder at rate `B`
//!   the expected reinforcement rate is `p B exp(-T B / 60)`.
//! * RT: at each completed cycle a reinforcer is delivered with probability
//!   `p`, response or not. Responses never touch the clock and deliveries
//!   do not queue.
//! * RR: no clock; each response is reinforced with probability `1/x`.

use rand::distributions::{Bernoulli, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Fraction of the planned size the standard deviation must reach (`sqrt(1 - p)`
/// when the mean is exact), shared with the cycle-parameter solver.
pub const SD_RATIO_MIN: f64 = 0.99;
/// Relative tolerance on the realized mean size.
pub const MEAN_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    RandomInterval,
    RandomDrl,
    RandomTime,
    RandomRatio,
}

impl ScheduleKind {
    pub fn is_timed(self) -> bool {
        self != ScheduleKind::RandomRatio
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScheduleKind::RandomInterval => "RI",
            ScheduleKind::RandomDrl => "RDRL",
            ScheduleKind::RandomTime => "RT",
            ScheduleKind::RandomRatio => "RR",
        };
        f.write_str(s)
    }
}

/// A validated schedule definition.
///
/// Timed kinds carry a cycle length `T` (seconds) and per-cycle arming
/// probability `p`; their nominal size is `T / p` seconds. Ratio schedules
/// carry the nominal response count directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    RandomInterval { cycle_s: f64, arm_prob: f64 },
    RandomDrl { cycle_s: f64, arm_prob: f64 },
    RandomTime { cycle_s: f64, arm_prob: f64 },
    RandomRatio { ratio: f64 },
}

impl ScheduleSpec {
    /// Timed schedule whose `(T, p)` must sit inside the size tolerances:
    /// with mean `T / p` taken as the planned size, `sqrt(1 - p)` has to fall
    /// in `[0.99, 1]`.
    pub fn timed(kind: ScheduleKind, cycle_s: f64, arm_prob: f64) -> Result<Self> {
        let spec = Self::timed_forced(kind, cycle_s, arm_prob)?;
        let sd_ratio = (1.0 - arm_prob).sqrt();
        if !(SD_RATIO_MIN..=1.0).contains(&sd_ratio) {
            return Err(Error::InvalidSchedule(format!(
                "arm probability {arm_prob} puts the sd ratio at {sd_ratio:.5}, \
                 outside [{SD_RATIO_MIN}, 1]; pass force to accept it anyway"
            )));
        }
        Ok(spec)
    }

    /// Timed schedule with only the structural checks (`T > 0`, `0 < p <= 1`).
    pub fn timed_forced(kind: ScheduleKind, cycle_s: f64, arm_prob: f64) -> Result<Self> {
        if !kind.is_timed() {
            return Err(Error::InvalidSchedule(
                "ratio schedules take a ratio, not (T, p)".into(),
            ));
        }
        if !(cycle_s > 0.0) || !cycle_s.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "cycle length must be positive, got {cycle_s}"
            )));
        }
        if !(arm_prob > 0.0 && arm_prob <= 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "arming probability must be in (0, 1], got {arm_prob}"
            )));
        }
        Ok(match kind {
            ScheduleKind::RandomInterval => ScheduleSpec::RandomInterval { cycle_s, arm_prob },
            ScheduleKind::RandomDrl => ScheduleSpec::RandomDrl { cycle_s, arm_prob },
            ScheduleKind::RandomTime => ScheduleSpec::RandomTime { cycle_s, arm_prob },
            ScheduleKind::RandomRatio => unreachable!(),
        })
    }

    pub fn random_ratio(ratio: f64) -> Result<Self> {
        if !(ratio >= 1.0) || !ratio.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "ratio must be >= 1, got {ratio}"
            )));
        }
        Ok(ScheduleSpec::RandomRatio { ratio })
    }

    /// RDRL realizing a nominal size of `size_s` seconds via the quarter
    /// rule: `T' = size/4`, `p = 1/4`, so the required pause `T'/p` equals
    /// the size exactly. The single-chance arming makes the geometric
    /// sd window meaningless here, so only structural checks apply.
    pub fn rdrl_with_size(size_s: f64) -> Result<Self> {
        if !(size_s > 0.0) || !size_s.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "size must be positive, got {size_s}"
            )));
        }
        Self::timed_forced(ScheduleKind::RandomDrl, size_s / 4.0, 0.25)
    }

    pub fn kind(&self) -> ScheduleKind {
        match self {
            ScheduleSpec::RandomInterval { .. } => ScheduleKind::RandomInterval,
            ScheduleSpec::RandomDrl { .. } => ScheduleKind::RandomDrl,
            ScheduleSpec::RandomTime { .. } => ScheduleKind::RandomTime,
            ScheduleSpec::RandomRatio { .. } => ScheduleKind::RandomRatio,
        }
    }

    /// Nominal size: mean seconds for timed kinds, response count for RR.
    pub fn size(&self) -> f64 {
        match *self {
            ScheduleSpec::RandomInterval { cycle_s, arm_prob }
            | ScheduleSpec::RandomDrl { cycle_s, arm_prob }
            | ScheduleSpec::RandomTime { cycle_s, arm_prob } => cycle_s / arm_prob,
            ScheduleSpec::RandomRatio { ratio } => ratio,
        }
    }

    pub fn cycle_s(&self) -> Option<f64> {
        match *self {
            ScheduleSpec::RandomInterval { cycle_s, .. }
            | ScheduleSpec::RandomDrl { cycle_s, .. }
            | ScheduleSpec::RandomTime { cycle_s, .. } => Some(cycle_s),
            ScheduleSpec::RandomRatio { .. } => None,
        }
    }

    pub fn arm_prob(&self) -> Option<f64> {
        match *self {
            ScheduleSpec::RandomInterval { arm_prob, .. }
            | ScheduleSpec::RandomDrl { arm_prob, .. }
            | ScheduleSpec::RandomTime { arm_prob, .. } => Some(arm_prob),
            ScheduleSpec::RandomRatio { .. } => None,
        }
    }
}

/// Spec compiled against a concrete step, with cycle boundaries counted in
/// whole steps. Construction is the only place that can fail; stepping never
/// does.
#[derive(Debug, Clone)]
pub struct CompiledSchedule {
    kind: ScheduleKind,
    steps_per_cycle: u64,
    /// Arming draw for timed kinds, delivery draw for RR.
    event: Bernoulli,
}

impl CompiledSchedule {
    pub fn new(spec: &ScheduleSpec, dt_s: f64) -> Result<Self> {
        if !(dt_s > 0.0) || !dt_s.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step must be positive, got {dt_s}"
            )));
        }
        let (steps_per_cycle, prob) = match *spec {
            ScheduleSpec::RandomInterval { cycle_s, arm_prob }
            | ScheduleSpec::RandomDrl { cycle_s, arm_prob }
            | ScheduleSpec::RandomTime { cycle_s, arm_prob } => {
                let ratio = cycle_s / dt_s;
                let rounded = ratio.round();
                if rounded < 1.0 || (ratio - rounded).abs() > 1e-6 * ratio.max(1.0) {
                    return Err(Error::StepCycleMismatch { dt_s, cycle_s });
                }
                (rounded as u64, arm_prob)
            }
            ScheduleSpec::RandomRatio { ratio } => (0, 1.0 / ratio),
        };
        let event = Bernoulli::new(prob)
            .map_err(|_| Error::InvalidSchedule(format!("probability {prob} out of range")))?;
        Ok(CompiledSchedule {
            kind: spec.kind(),
            steps_per_cycle,
            event,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn steps_per_cycle(&self) -> u64 {
        self.steps_per_cycle
    }
}

/// Running state of one schedule instance.
///
/// `clock_steps` counts steps since the last clock reset and stays below the
/// cycle length; `delivered_count <= armed_count` always holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScheduleState {
    pub clock_steps: u64,
    pub armed: bool,
    pub armed_count: u64,
    pub delivered_count: u64,
}

impl ScheduleState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock_s(&self, dt_s: f64) -> f64 {
        self.clock_steps as f64 * dt_s
    }
}

/// What one step produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOutcome {
    pub reinforced: bool,
    pub armed_this_step: bool,
}

/// Advance a schedule by one step, coupling it to whether a response occurred.
#[inline]
pub fn step_schedule<R: Rng + ?Sized>(
    state: &mut ScheduleState,
    schedule: &CompiledSchedule,
    response: bool,
    rng: &mut R,
) -> StepOutcome {
    match schedule.kind {
        ScheduleKind::RandomInterval => {
            let mut armed_this_step = false;
            state.clock_steps += 1;
            if state.clock_steps >= schedule.steps_per_cycle {
                state.clock_steps = 0;
                if !state.armed && schedule.event.sample(rng) {
                    state.armed = true;
                    state.armed_count += 1;
                    armed_this_step = true;
                }
            }
            let mut reinforced = false;
            if response && state.armed {
                state.armed = false;
                state.delivered_count += 1;
                state.clock_steps = 0;
                reinforced = true;
            }
            StepOutcome {
                reinforced,
                armed_this_step,
            }
        }
        ScheduleKind::RandomDrl => {
            if response {
                // The response wins over any boundary in the same step: the
                // clock resets before the boundary check, cancelling that
                // cycle's completion.
                let mut reinforced = false;
                if state.armed {
                    state.armed = false;
                    state.delivered_count += 1;
                    reinforced = true;
                }
                state.clock_steps = 0;
                StepOutcome {
                    reinforced,
                    armed_this_step: false,
                }
            } else {
                // One arming chance per pause, at its first completed cycle.
                // The clock then saturates until a response resets it.
                let mut armed_this_step = false;
                if state.clock_steps < schedule.steps_per_cycle {
                    state.clock_steps += 1;
                    if state.clock_steps == schedule.steps_per_cycle
                        && schedule.event.sample(rng)
                    {
                        state.armed = true;
                        state.armed_count += 1;
                        armed_this_step = true;
                    }
                }
                StepOutcome {
                    reinforced: false,
                    armed_this_step,
                }
            }
        }
        ScheduleKind::RandomTime => {
            state.clock_steps += 1;
            let mut fired = false;
            if state.clock_steps >= schedule.steps_per_cycle {
                state.clock_steps = 0;
                if schedule.event.sample(rng) {
                    state.armed_count += 1;
                    state.delivered_count += 1;
                    fired = true;
                }
            }
            StepOutcome {
                reinforced: fired,
                armed_this_step: fired,
            }
        }
        ScheduleKind::RandomRatio => {
            if response && schedule.event.sample(rng) {
                state.armed_count += 1;
                state.delivered_count += 1;
                StepOutcome {
                    reinforced: true,
                    armed_this_step: true,
                }
            } else {
                StepOutcome::default()
            }
        }
    }
}
