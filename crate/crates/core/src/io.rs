//! File emission and ingestion: sweep CSVs, fit reports, break-and-run
//! comparisons, and tidy plot data.
//!
//! Every CSV starts with a `#` comment line carrying the config hash and,
//! for seeded runs, the master seed, so outputs are traceable to the exact
//! run that produced them. Readers skip `#` lines.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::breakrun::BreakRunPoint;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::rff::RffModel;
use crate::session::SweepPoint;

/// Provenance stamped into output headers.
#[derive(Debug, Clone, Copy)]
pub struct FileMeta {
    pub config_hash: u64,
    pub seed: Option<u64>,
}

impl FileMeta {
    pub fn comment_line(&self) -> String {
        match self.seed {
            Some(seed) => format!("# config_hash={:016x} seed={seed}\n", self.config_hash),
            None => format!("# config_hash={:016x}\n", self.config_hash),
        }
    }
}

fn open_with_header(path: &Path, meta: &FileMeta) -> Result<File> {
    let mut file = File::create(path)?;
    file.write_all(meta.comment_line().as_bytes())?;
    Ok(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "B_nominal")]
    pub rate_nominal_per_min: f64,
    #[serde(rename = "B_realized")]
    pub rate_realized_per_min: f64,
    #[serde(rename = "R_mean")]
    pub reinf_mean_per_min: f64,
    pub hdi_lo: f64,
    pub hdi_hi: f64,
    pub reps: u32,
}

impl SweepRow {
    pub fn from_point(point: &SweepPoint) -> Self {
        SweepRow {
            rate_nominal_per_min: point.rate_nominal_per_min,
            rate_realized_per_min: point.rate_realized_per_min,
            reinf_mean_per_min: point.reinf_mean_per_min,
            hdi_lo: point.hdi_lo,
            hdi_hi: point.hdi_hi,
            reps: point.samples.len() as u32,
        }
    }
}

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint], meta: &FileMeta) -> Result<()> {
    let file = open_with_header(path, meta)?;
    let mut writer = csv::Writer::from_writer(file);
    for point in points {
        writer
            .serialize(SweepRow::from_point(point))
            .map_err(|e| malformed(path, e))?;
    }
    writer.flush()?;
    Ok(())
}

/// Per-repetition reinforcement rates, one row per `(rate, repetition)` cell.
pub fn write_samples_csv(path: &Path, points: &[SweepPoint], meta: &FileMeta) -> Result<()> {
    #[derive(Serialize)]
    struct SampleRow {
        #[serde(rename = "B_nominal")]
        rate_nominal_per_min: f64,
        rep: u32,
        #[serde(rename = "R_per_min")]
        reinf_per_min: f64,
    }
    let file = open_with_header(path, meta)?;
    let mut writer = csv::Writer::from_writer(file);
    for point in points {
        for (rep, &sample) in point.samples.iter().enumerate() {
            writer
                .serialize(SampleRow {
                    rate_nominal_per_min: point.rate_nominal_per_min,
                    rep: rep as u32,
                    reinf_per_min: sample,
                })
                .map_err(|e| malformed(path, e))?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row.map_err(|e| malformed(path, e))?);
    }
    if rows.is_empty() {
        return Err(Error::MalformedData {
            path: path.display().to_string(),
            detail: "no data rows".into(),
        });
    }
    Ok(rows)
}

fn malformed(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::MalformedData {
        path: path.display().to_string(),
        detail: e.to_string(),
    }
}

/// Fit report file: provenance plus one result per fitted family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitsFile {
    pub config_hash: u64,
    pub data_file: String,
    pub fits: Vec<FitResult>,
}

pub fn write_fits_json(path: &Path, fits: &FitsFile) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, fits).map_err(|e| malformed(path, e))?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_fits_json(path: &Path) -> Result<FitsFile> {
    let file = File::open(path)?;
    serde_json::from_reader(file).map_err(|e| malformed(path, e))
}

pub fn write_break_run_csv(path: &Path, points: &[BreakRunPoint], meta: &FileMeta) -> Result<()> {
    let file = open_with_header(path, meta)?;
    let mut writer = csv::Writer::from_writer(file);
    for point in points {
        writer.serialize(point).map_err(|e| malformed(path, e))?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct PlotRow<'a> {
    series: &'a str,
    #[serde(rename = "B_per_min")]
    b_per_min: f64,
    #[serde(rename = "R_per_min")]
    r_per_min: f64,
    hdi_lo: Option<f64>,
    hdi_hi: Option<f64>,
}

/// Tidy long-format plot data: one `observed` block with interval columns,
/// then one block per fitted model sampled on `grid`, plus the rising and
/// decaying exponential components for the unimodal families.
pub fn emit_plot_data(
    path: &Path,
    observed: &[SweepRow],
    fits: &[FitResult],
    grid: &[f64],
    meta: &FileMeta,
) -> Result<()> {
    let file = open_with_header(path, meta)?;
    let mut writer = csv::Writer::from_writer(file);
    for row in observed {
        writer
            .serialize(PlotRow {
                series: "observed",
                b_per_min: row.rate_nominal_per_min,
                r_per_min: row.reinf_mean_per_min,
                hdi_lo: Some(row.hdi_lo),
                hdi_hi: Some(row.hdi_hi),
            })
            .map_err(|e| malformed(path, e))?;
    }
    for fit in fits {
        let family = fit.model.family();
        let name = family.to_string();
        for &b in grid {
            writer
                .serialize(PlotRow {
                    series: &name,
                    b_per_min: b,
                    r_per_min: fit.model.eval(b),
                    hdi_lo: None,
                    hdi_hi: None,
                })
                .map_err(|e| malformed(path, e))?;
        }
        if let Some((scale_b, scale_c)) = two_exp_scales(&fit.model) {
            let asymptote = 60.0 / fit.model.size_s();
            for (suffix, f) in [
                ("decay", Box::new(move |b: f64| asymptote * (-b / scale_b).exp())
                    as Box<dyn Fn(f64) -> f64>),
                ("rise", Box::new(move |b: f64| {
                    asymptote * (1.0 - (-b / scale_c).exp())
                })),
            ] {
                let series = format!("{name}_{suffix}");
                for &b in grid {
                    writer
                        .serialize(PlotRow {
                            series: &series,
                            b_per_min: b,
                            r_per_min: f(b),
                            hdi_lo: None,
                            hdi_hi: None,
                        })
                        .map_err(|e| malformed(path, e))?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}

fn two_exp_scales(model: &RffModel) -> Option<(f64, f64)> {
    match *model {
        RffModel::RdrlTwoExp { b, c, .. } => Some((b, c)),
        RffModel::RdrlReduced { size_s } => {
            let b = 6f64.exp() / size_s;
            Some((b, b / std::f64::consts::E))
        }
        _ => None,
    }
}

/// Evenly spaced evaluation grid spanning the observed rates.
pub fn default_plot_grid(observed: &[SweepRow]) -> Vec<f64> {
    let hi = observed
        .iter()
        .map(|r| r.rate_nominal_per_min)
        .fold(0.0f64, f64::max);
    if hi <= 0.0 {
        return vec![0.0];
    }
    let step = hi / 200.0;
    crate::config::grid_rates(0.0, hi, step)
}
