//! Closed-form reinforcement feedback functions.
//!
//! Each model maps a response rate `B` (responses/min) to a reinforcement
//! rate `R` (reinforcers/min) for a schedule of size `V` seconds. The four
//! interval-family candidates share the asymptote `60 / V`:
//!
//! ```text
//! baum       R = 1 / (V/60 + 1/B)
//! killeen    R = (60/V) (1 - exp(-B/c))
//! prelec     R = B (1 - exp(-60/(V B)))
//! rachlin    R = (60/V) (B / Bmax)^m
//! ```
//!
//! The pause-differentiating schedule is unimodal and follows a difference of
//! exponentials with the asymptote held fixed:
//!
//! ```text
//! rdrl2exp      R = (60/V) (exp(-B/b) - exp(-B/c)),  b > c > 0
//! rdrl_reduced  R = (60/V) (exp(-(V/e^6) B) - exp(-(V/e^5) B))
//! ```
//!
//! The reduced form has no free parameters: empirically `ln b = 6 - ln V` and
//! `c = b / e`, which also pins down the curve's maximum and inflection point
//! in closed form.

use serde::{Deserialize, Serialize};
use std::f64::consts::E;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Baum,
    Killeen,
    Prelec,
    Rachlin,
    RdrlTwoExp,
    RdrlReduced,
}

impl ModelFamily {
    /// Count of free (fitted) parameters.
    pub fn free_param_count(self) -> usize {
        match self {
            ModelFamily::Baum | ModelFamily::Prelec => 1,
            ModelFamily::Killeen | ModelFamily::Rachlin | ModelFamily::RdrlTwoExp => 2,
            ModelFamily::RdrlReduced => 0,
        }
    }

    pub fn free_param_names(self) -> &'static [&'static str] {
        match self {
            ModelFamily::Baum | ModelFamily::Prelec => &["V"],
            ModelFamily::Killeen => &["V", "c"],
            ModelFamily::Rachlin => &["V", "m"],
            ModelFamily::RdrlTwoExp => &["b", "c"],
            ModelFamily::RdrlReduced => &[],
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "baum" => Ok(ModelFamily::Baum),
            "killeen" => Ok(ModelFamily::Killeen),
            "prelec" => Ok(ModelFamily::Prelec),
            "rachlin" => Ok(ModelFamily::Rachlin),
            "rdrl2exp" => Ok(ModelFamily::RdrlTwoExp),
            "rdrl-reduced" | "rdrl_reduced" => Ok(ModelFamily::RdrlReduced),
            other => Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelFamily::Baum => "baum",
            ModelFamily::Killeen => "killeen",
            ModelFamily::Prelec => "prelec",
            ModelFamily::Rachlin => "rachlin",
            ModelFamily::RdrlTwoExp => "rdrl2exp",
            ModelFamily::RdrlReduced => "rdrl-reduced",
        };
        f.write_str(s)
    }
}

/// A concrete feedback-function instance. `size_s` is the schedule size `V`
/// in seconds; scale parameters are rates per minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RffModel {
    Baum { size_s: f64 },
    Killeen { size_s: f64, c: f64 },
    Prelec { size_s: f64 },
    Rachlin { size_s: f64, m: f64, b_max: f64 },
    RdrlTwoExp { size_s: f64, b: f64, c: f64 },
    RdrlReduced { size_s: f64 },
}

impl RffModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            RffModel::Baum { .. } => ModelFamily::Baum,
            RffModel::Killeen { .. } => ModelFamily::Killeen,
            RffModel::Prelec { .. } => ModelFamily::Prelec,
            RffModel::Rachlin { .. } => ModelFamily::Rachlin,
            RffModel::RdrlTwoExp { .. } => ModelFamily::RdrlTwoExp,
            RffModel::RdrlReduced { .. } => ModelFamily::RdrlReduced,
        }
    }

    pub fn size_s(&self) -> f64 {
        match *self {
            RffModel::Baum { size_s }
            | RffModel::Killeen { size_s, .. }
            | RffModel::Prelec { size_s }
            | RffModel::Rachlin { size_s, .. }
            | RffModel::RdrlTwoExp { size_s, .. }
            | RffModel::RdrlReduced { size_s } => size_s,
        }
    }

    /// Free-parameter values in the order of `free_param_names`.
    pub fn free_params(&self) -> Vec<f64> {
        match *self {
            RffModel::Baum { size_s } | RffModel::Prelec { size_s } => vec![size_s],
            RffModel::Killeen { size_s, c } => vec![size_s, c],
            RffModel::Rachlin { size_s, m, .. } => vec![size_s, m],
            RffModel::RdrlTwoExp { b, c, .. } => vec![b, c],
            RffModel::RdrlReduced { .. } => vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            RffModel::Baum { size_s } | RffModel::Prelec { size_s } => positive(size_s, "V"),
            RffModel::Killeen { size_s, c } => {
                positive(size_s, "V")?;
                positive(c, "c")
            }
            RffModel::Rachlin { size_s, m, b_max } => {
                positive(size_s, "V")?;
                positive(b_max, "Bmax")?;
                if m > 0.0 && m < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "exponent m must lie in (0, 1), got {m}"
                    )))
                }
            }
            RffModel::RdrlTwoExp { size_s, b, c } => {
                positive(size_s, "V")?;
                positive(b, "b")?;
                positive(c, "c")?;
                if b > c {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "need b > c for a unimodal curve, got b {b}, c {c}"
                    )))
                }
            }
            RffModel::RdrlReduced { size_s } => positive(size_s, "V"),
        }
    }

    /// Reinforcement rate at response rate `b_per_min`; the analytic limit 0
    /// is returned at `B = 0` for every family.
    pub fn eval(&self, b_per_min: f64) -> f64 {
        if b_per_min == 0.0 {
            return 0.0;
        }
        match *self {
            RffModel::Baum { size_s } => 1.0 / (size_s / 60.0 + 1.0 / b_per_min),
            RffModel::Killeen { size_s, c } => {
                (60.0 / size_s) * (1.0 - (-b_per_min / c).exp())
            }
            RffModel::Prelec { size_s } => {
                b_per_min * (1.0 - (-60.0 / (size_s * b_per_min)).exp())
            }
            RffModel::Rachlin { size_s, m, b_max } => {
                (60.0 / size_s) * (b_per_min / b_max).powf(m)
            }
            RffModel::RdrlTwoExp { size_s, b, c } => {
                (60.0 / size_s) * ((-b_per_min / b).exp() - (-b_per_min / c).exp())
            }
            RffModel::RdrlReduced { size_s } => {
                let b = 6f64.exp() / size_s;
                let c = b / E;
                (60.0 / size_s) * ((-b_per_min / b).exp() - (-b_per_min / c).exp())
            }
        }
    }

    /// True when evaluation at `b_per_min` extrapolates beyond the model's
    /// normalization (Rachlin above its `Bmax`).
    pub fn extrapolates(&self, b_per_min: f64) -> bool {
        matches!(*self, RffModel::Rachlin { b_max, .. } if b_per_min > b_max)
    }
}

/// Closed-form descriptors of the reduced unimodal curve for size `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdrlPredictions {
    /// Decay scale `b = e^6 / V`, responses/min.
    pub b: f64,
    /// Rise scale `c = b / e`, responses/min.
    pub c: f64,
    /// Response rate at the curve maximum, `e^6 / ((e - 1) V)`.
    pub b_at_peak: f64,
    /// Maximum reinforcement rate, `(60/V)(e - 1) exp(-e/(e - 1))`.
    pub r_at_peak: f64,
    /// Inflection response rate, twice the peak rate.
    pub b_at_inflection: f64,
    /// Reinforcement rate at the inflection point.
    pub r_at_inflection: f64,
}

/// Evaluate the parameter-free descriptors for a schedule size in seconds.
pub fn rdrl_predictions(size_s: f64) -> RdrlPredictions {
    let asymptote = 60.0 / size_s;
    let b = 6f64.exp() / size_s;
    let c = b / E;
    let b_at_peak = 6f64.exp() / ((E - 1.0) * size_s);
    let r_at_peak = asymptote * (E - 1.0) * (-E / (E - 1.0)).exp();
    let b_at_inflection = 2.0 * b_at_peak;
    let r_at_inflection =
        asymptote * ((-2.0 / (E - 1.0)).exp() - (-2.0 * E / (E - 1.0)).exp());
    RdrlPredictions {
        b,
        c,
        b_at_peak,
        r_at_peak,
        b_at_inflection,
        r_at_inflection,
    }
}

/// Empirical relation between the Rachlin exponent and schedule size:
/// `m = exp(-1/2 - (1 - 1/e) ln V)`.
pub fn rachlin_exponent(size_s: f64) -> f64 {
    (-0.5 - (1.0 - 1.0 / E) * size_s.ln()).exp()
}
