//! Break-and-run equivalence runs.
//!
//! For each `(P_run, P_break)` combination, a bursty responder at a fixed
//! local operant rate is simulated and compared against a plain responder at
//! the stationary effective rate `LOR * P_run / (P_run + P_break)`. If the
//! burst structure does not matter, the bursty mean lands inside the plain
//! run's 95% highest-density interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::ScheduleSpec;
use crate::session::{run_sweep, BurstShape, ResponderTemplate, SessionConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakRunSettings {
    /// Response rate inside runs, responses/min.
    pub local_rate_per_min: f64,
    /// `(run start, break start)` per-step probability pairs.
    pub combos: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakRunPoint {
    pub run_start_prob: f64,
    pub break_start_prob: f64,
    pub local_rate_per_min: f64,
    pub effective_rate_per_min: f64,
    pub burst_mean: f64,
    pub burst_hdi_lo: f64,
    pub burst_hdi_hi: f64,
    pub plain_mean: f64,
    pub plain_hdi_lo: f64,
    pub plain_hdi_hi: f64,
    /// Burst mean inside the plain responder's interval.
    pub within_hdi: bool,
}

pub fn run_break_run(
    base: &SessionConfig,
    schedule: &ScheduleSpec,
    settings: &BreakRunSettings,
) -> Result<Vec<BreakRunPoint>> {
    if settings.combos.is_empty() {
        return Err(Error::InvalidConfig("no (P_run, P_break) combos".into()));
    }
    let mut points = Vec::with_capacity(settings.combos.len());
    for &(run_start, break_start) in &settings.combos {
        if !(run_start > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "run start probability must be positive, got {run_start}"
            )));
        }
        let effective =
            settings.local_rate_per_min * run_start / (run_start + break_start);

        let burst_cfg = SessionConfig {
            rates_per_min: vec![settings.local_rate_per_min],
            ..base.clone()
        };
        let template = ResponderTemplate::bursty(BurstShape {
            run_start_prob: run_start,
            break_start_prob: break_start,
        });
        let burst = run_sweep(&burst_cfg, schedule, &template)?.remove(0);

        // The plain cell is seeded exactly as a sweep cell at the effective
        // rate, so it reproduces the matching point of a full plain sweep.
        let plain_cfg = SessionConfig {
            rates_per_min: vec![effective],
            ..base.clone()
        };
        let plain = run_sweep(&plain_cfg, schedule, &ResponderTemplate::plain())?.remove(0);

        points.push(BreakRunPoint {
            run_start_prob: run_start,
            break_start_prob: break_start,
            local_rate_per_min: settings.local_rate_per_min,
            effective_rate_per_min: effective,
            burst_mean: burst.reinf_mean_per_min,
            burst_hdi_lo: burst.hdi_lo,
            burst_hdi_hi: burst.hdi_hi,
            plain_mean: plain.reinf_mean_per_min,
            plain_hdi_lo: plain.hdi_lo,
            plain_hdi_hi: plain.hdi_hi,
            within_hdi: burst.reinf_mean_per_min >= plain.hdi_lo
                && burst.reinf_mean_per_min <= plain.hdi_hi,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::ScheduleKind;

    #[test]
    fn degenerate_combo_compares_identical_rates() {
        // P_break = 0 means the effective rate equals the local rate.
        let base = SessionConfig {
            duration_s: 60.0,
            dt_s: 0.005,
            repetitions: 10,
            rates_per_min: vec![],
            master_seed: 3,
        };
        let schedule = ScheduleSpec::timed(ScheduleKind::RandomInterval, 0.095, 0.019).unwrap();
        let settings = BreakRunSettings {
            local_rate_per_min: 120.0,
            combos: vec![(1.0, 0.0)],
        };
        let points = run_break_run(&base, &schedule, &settings).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].effective_rate_per_min, 120.0);
    }

    #[test]
    fn empty_combos_are_rejected() {
        let base = SessionConfig {
            duration_s: 60.0,
            dt_s: 0.005,
            repetitions: 2,
            rates_per_min: vec![],
            master_seed: 3,
        };
        let schedule = ScheduleSpec::random_ratio(10.0).unwrap();
        let settings = BreakRunSettings {
            local_rate_per_min: 120.0,
            combos: vec![],
        };
        assert!(run_break_run(&base, &schedule, &settings).is_err());
    }
}
