//! Declarative experiment configuration.
//!
//! Experiments are described in TOML with explicit units in the key names.
//! The `desk` profile (600 s sessions, 100 repetitions, rates 0..=200 by 5)
//! fills any session field left unset and is the default; the `paper`
//! profile (3600 s, 500 repetitions, rates 0..=200 by 1) is opt-in.
//!
//! ```toml
//! [schedule]
//! kind = "ri"            # ri | rdrl | rt | rr
//! size_s = 5.0           # solved into (T, p); or give cycle_s + arm_prob
//!
//! [responder]
//! rate_grid = { start_per_min = 0.0, stop_per_min = 200.0, step_per_min = 5.0 }
//!
//! [session]
//! seed = 42
//!
//! [output]
//! profile = "desk"
//! sweep_csv = "sweep.csv"
//! ```

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::breakrun::BreakRunSettings;
use crate::error::{Error, Result};
use crate::schedule::{ScheduleKind, ScheduleSpec};
use crate::session::{BurstShape, ResponderTemplate, SessionConfig};
use crate::solver::{solve_cycle_params, SolverRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

impl Profile {
    fn duration_s(self) -> f64 {
        match self {
            Profile::Desk => 600.0,
            Profile::Paper => 3600.0,
        }
    }

    fn repetitions(self) -> u32 {
        match self {
            Profile::Desk => 100,
            Profile::Paper => 500,
        }
    }

    fn rate_step_per_min(self) -> f64 {
        match self {
            Profile::Desk => 5.0,
            Profile::Paper => 1.0,
        }
    }

    fn dt_s(self) -> f64 {
        0.005
    }

    fn default_rates(self) -> Vec<f64> {
        grid_rates(0.0, 200.0, self.rate_step_per_min())
    }
}

/// Inclusive arithmetic grid, tolerant of a stop value that is a hair off the
/// step lattice.
pub fn grid_rates(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut rates = Vec::new();
    let mut k = 0u64;
    loop {
        let value = start + k as f64 * step;
        if value > stop + step * 1e-9 {
            break;
        }
        rates.push(value);
        k += 1;
    }
    rates
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub kind: String,
    pub size_s: Option<f64>,
    pub ratio: Option<f64>,
    pub cycle_s: Option<f64>,
    pub arm_prob: Option<f64>,
    /// Accept explicit (T, p) even when it violates the size tolerances.
    #[serde(default)]
    pub force: bool,
    pub solver_t_max_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start_per_min: f64,
    pub stop_per_min: f64,
    pub step_per_min: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurstSection {
    pub run_start_prob: f64,
    pub break_start_prob: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponderSection {
    pub rate_per_min: Option<f64>,
    pub rates_per_min: Option<Vec<f64>>,
    pub rate_grid: Option<GridSection>,
    /// Must match the session step when given; the session step is used
    /// either way.
    pub step_s: Option<f64>,
    pub burst: Option<BurstSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionSection {
    pub duration_s: Option<f64>,
    pub dt_s: Option<f64>,
    pub repetitions: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub profile: Option<Profile>,
    pub sweep_csv: Option<PathBuf>,
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub responder: ResponderSection,
    #[serde(default)]
    pub session: SessionSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A fully validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub schedule: ScheduleSpec,
    pub template: ResponderTemplate,
    pub session: SessionConfig,
    pub sweep_csv: PathBuf,
    pub samples_csv: Option<PathBuf>,
    pub config_hash: u64,
}

fn parse_kind(name: &str) -> Result<ScheduleKind> {
    match name.to_ascii_lowercase().as_str() {
        "ri" => Ok(ScheduleKind::RandomInterval),
        "rdrl" => Ok(ScheduleKind::RandomDrl),
        "rt" => Ok(ScheduleKind::RandomTime),
        "rr" => Ok(ScheduleKind::RandomRatio),
        other => Err(Error::InvalidConfig(format!(
            "unknown schedule kind '{other}' (expected ri, rdrl, rt, or rr)"
        ))),
    }
}

/// Resolve the schedule section against the session step (the solver only
/// emits cycle lengths on the step grid).
pub fn resolve_schedule(section: &ScheduleSection, dt_s: f64) -> Result<ScheduleSpec> {
    let kind = parse_kind(&section.kind)?;
    if kind == ScheduleKind::RandomRatio {
        if section.size_s.is_some() || section.cycle_s.is_some() || section.arm_prob.is_some() {
            return Err(Error::InvalidConfig(
                "rr schedules take only a ratio".into(),
            ));
        }
        let ratio = section
            .ratio
            .ok_or_else(|| Error::InvalidConfig("rr schedules need a ratio".into()))?;
        return ScheduleSpec::random_ratio(ratio);
    }
    if section.ratio.is_some() {
        return Err(Error::InvalidConfig(format!(
            "{} schedules do not take a ratio",
            section.kind
        )));
    }
    match (section.size_s, section.cycle_s, section.arm_prob) {
        (Some(size), None, None) => {
            if kind == ScheduleKind::RandomDrl {
                // Single-chance pause arming follows the quarter rule rather
                // than the geometric-interval solver.
                ScheduleSpec::rdrl_with_size(size)
            } else {
                let t_max = section.solver_t_max_s.unwrap_or(1.0);
                let solved = solve_cycle_params(&SolverRequest::new(size, dt_s, t_max)?)?;
                ScheduleSpec::timed(kind, solved.cycle_s, solved.arm_prob)
            }
        }
        (None, Some(cycle), Some(p)) => {
            // The sd window governs geometric inter-arming times; an RDRL
            // pause has one chance, so only structural checks apply there.
            if section.force || kind == ScheduleKind::RandomDrl {
                ScheduleSpec::timed_forced(kind, cycle, p)
            } else {
                ScheduleSpec::timed(kind, cycle, p)
            }
        }
        _ => Err(Error::InvalidConfig(
            "give either size_s or both cycle_s and arm_prob".into(),
        )),
    }
}

fn resolve_rates(section: &ResponderSection, profile: Profile) -> Result<Vec<f64>> {
    let sources = usize::from(section.rate_per_min.is_some())
        + usize::from(section.rates_per_min.is_some())
        + usize::from(section.rate_grid.is_some());
    if sources > 1 {
        return Err(Error::InvalidConfig(
            "give at most one of rate_per_min, rates_per_min, rate_grid".into(),
        ));
    }
    if let Some(rate) = section.rate_per_min {
        return Ok(vec![rate]);
    }
    if let Some(rates) = &section.rates_per_min {
        if rates.is_empty() {
            return Err(Error::InvalidConfig("rates_per_min is empty".into()));
        }
        return Ok(rates.clone());
    }
    if let Some(grid) = &section.rate_grid {
        if !(grid.step_per_min > 0.0) || grid.stop_per_min < grid.start_per_min {
            return Err(Error::InvalidConfig("bad rate grid".into()));
        }
        return Ok(grid_rates(
            grid.start_per_min,
            grid.stop_per_min,
            grid.step_per_min,
        ));
    }
    Ok(profile.default_rates())
}

/// Canonical view hashed into output headers: any change that can alter
/// results changes the hash.
#[derive(Serialize)]
struct HashView<'a> {
    schedule: &'a ScheduleSpec,
    template: &'a ResponderTemplate,
    session: &'a SessionConfig,
}

pub fn config_fingerprint(
    schedule: &ScheduleSpec,
    template: &ResponderTemplate,
    session: &SessionConfig,
) -> u64 {
    let view = HashView {
        schedule,
        template,
        session,
    };
    let bytes = serde_json::to_vec(&view).expect("canonical view serializes");
    crate::fit::dataset_hash_bytes(&bytes)
}

pub fn resolve_experiment(config: &ExperimentConfig) -> Result<ResolvedExperiment> {
    let profile = config.output.profile.unwrap_or(Profile::Desk);
    let dt_s = config.session.dt_s.unwrap_or_else(|| profile.dt_s());
    if let Some(step) = config.responder.step_s {
        if (step - dt_s).abs() > 1e-12 * dt_s.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "responder step {step} s differs from session step {dt_s} s"
            )));
        }
    }
    let schedule = resolve_schedule(&config.schedule, dt_s)?;
    let rates = resolve_rates(&config.responder, profile)?;
    let template = match &config.responder.burst {
        None => ResponderTemplate::plain(),
        Some(b) => ResponderTemplate::bursty(BurstShape {
            run_start_prob: b.run_start_prob,
            break_start_prob: b.break_start_prob,
        }),
    };
    let seed = config
        .session
        .seed
        .ok_or_else(|| Error::InvalidConfig("session.seed is required".into()))?;
    let session = SessionConfig {
        duration_s: config
            .session
            .duration_s
            .unwrap_or_else(|| profile.duration_s()),
        dt_s,
        repetitions: config
            .session
            .repetitions
            .unwrap_or_else(|| profile.repetitions()),
        rates_per_min: rates,
        master_seed: seed,
    };
    session.validate()?;
    for &rate in &session.rates_per_min {
        template.instantiate(rate, dt_s)?;
    }
    let config_hash = config_fingerprint(&schedule, &template, &session);
    Ok(ResolvedExperiment {
        schedule,
        template,
        session,
        sweep_csv: config
            .output
            .sweep_csv
            .clone()
            .unwrap_or_else(|| PathBuf::from("sweep.csv")),
        samples_csv: config.output.samples_csv.clone(),
        config_hash,
    })
}

pub fn load_experiment(path: &Path) -> Result<ResolvedExperiment> {
    let text = std::fs::read_to_string(path)?;
    let config: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::InvalidConfig(
        format!("{}: {e}", path.display()),
    ))?;
    resolve_experiment(&config)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakRunSection {
    pub local_rate_per_min: f64,
    pub combos: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakRunOutputSection {
    pub profile: Option<Profile>,
    pub report_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakRunConfig {
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub session: SessionSection,
    pub breakrun: BreakRunSection,
    #[serde(default)]
    pub output: BreakRunOutputSection,
}

#[derive(Debug, Clone)]
pub struct ResolvedBreakRun {
    pub schedule: ScheduleSpec,
    pub session: SessionConfig,
    pub settings: BreakRunSettings,
    pub report_csv: PathBuf,
    pub config_hash: u64,
}

pub fn resolve_break_run(config: &BreakRunConfig) -> Result<ResolvedBreakRun> {
    let profile = config.output.profile.unwrap_or(Profile::Desk);
    let dt_s = config.session.dt_s.unwrap_or_else(|| profile.dt_s());
    let schedule = resolve_schedule(&config.schedule, dt_s)?;
    let seed = config
        .session
        .seed
        .ok_or_else(|| Error::InvalidConfig("session.seed is required".into()))?;
    let settings = BreakRunSettings {
        local_rate_per_min: config.breakrun.local_rate_per_min,
        combos: config
            .breakrun
            .combos
            .iter()
            .map(|&[a, b]| (a, b))
            .collect(),
    };
    let session = SessionConfig {
        duration_s: config
            .session
            .duration_s
            .unwrap_or_else(|| profile.duration_s()),
        dt_s,
        repetitions: config
            .session
            .repetitions
            .unwrap_or_else(|| profile.repetitions()),
        rates_per_min: vec![settings.local_rate_per_min],
        master_seed: seed,
    };
    session.validate()?;
    let config_hash = config_fingerprint(
        &schedule,
        &ResponderTemplate::plain(),
        &session,
    );
    Ok(ResolvedBreakRun {
        schedule,
        session,
        settings,
        report_csv: config
            .output
            .report_csv
            .clone()
            .unwrap_or_else(|| PathBuf::from("breakrun.csv")),
        config_hash,
    })
}

pub fn load_break_run(path: &Path) -> Result<ResolvedBreakRun> {
    let text = std::fs::read_to_string(path)?;
    let config: BreakRunConfig = toml::from_str(&text).map_err(|e| Error::InvalidConfig(
        format!("{}: {e}", path.display()),
    ))?;
    resolve_break_run(&config)
}
