//! Nonlinear least-squares fitting of feedback functions, with information
//! criteria for ranking candidate models on the same data.
//!
//! The fitter is a damped Gauss-Newton (Levenberg-Marquardt) descent over the
//! model's free parameters, with a numeric Jacobian and box constraints.
//! Steps are accepted only when they strictly reduce the residual sum of
//! squares, so the recorded RSS trace is nonincreasing by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rff::{ModelFamily, RffModel};

/// `AIC = n ln(RSS/n) + 2k`. RSS is floored at the smallest positive f64 so
/// a perfect synthetic fit yields a finite (hugely negative) score instead
/// of `ln(0)`.
pub fn aic(rss: f64, n: usize, k: usize) -> f64 {
    n as f64 * (rss.max(f64::MIN_POSITIVE) / n as f64).ln() + 2.0 * k as f64
}

/// `BIC = n ln(RSS/n) + k ln(n)`, floored like [`aic`].
pub fn bic(rss: f64, n: usize, k: usize) -> f64 {
    n as f64 * (rss.max(f64::MIN_POSITIVE) / n as f64).ln() + k as f64 * (n as f64).ln()
}

/// FNV-1a over raw bytes; stable across runs and platforms.
pub fn dataset_hash_bytes(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &byte in bytes {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Order-sensitive hash of a dataset, used to refuse rankings across
/// different data.
pub fn dataset_hash(data: &[(f64, f64)]) -> u64 {
    let mut bytes = Vec::with_capacity(data.len() * 16);
    for &(b, r) in data {
        bytes.extend_from_slice(&b.to_bits().to_le_bytes());
        bytes.extend_from_slice(&r.to_bits().to_le_bytes());
    }
    dataset_hash_bytes(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Starting free-parameter vector; a family-specific default is derived
    /// from the data when absent.
    pub initial: Option<Vec<f64>>,
    pub max_iterations: u32,
    /// Relative RSS improvement under which the descent counts as converged.
    pub rss_rel_tol: f64,
    /// Known schedule size in seconds. Required for the two-exponential
    /// families (it fixes the asymptote); otherwise it only seeds `V`.
    pub nominal_size_s: Option<f64>,
    /// Rachlin normalization ceiling; defaults to the largest rate in the
    /// data.
    pub rate_ceiling_per_min: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            initial: None,
            max_iterations: 200,
            rss_rel_tol: 1e-12,
            nominal_size_s: None,
            rate_ceiling_per_min: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: RffModel,
    /// Data points used.
    pub n: usize,
    /// Free parameters fitted.
    pub k: usize,
    pub rss: f64,
    pub r_squared: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: u32,
    pub data_hash: u64,
    /// RSS after each accepted step, starting at the initial point. Not
    /// serialized.
    #[serde(skip)]
    pub rss_trace: Vec<f64>,
}

/// Internal coordinate for one free parameter. Positive scale parameters are
/// fitted as logarithms and the Rachlin exponent as a logit, so positivity
/// and the (0, 1) window hold by construction and steps act multiplicatively.
#[derive(Clone, Copy)]
enum Transform {
    Log,
    Logit,
}

impl Transform {
    fn to_internal(self, value: f64) -> f64 {
        match self {
            Transform::Log => value.ln(),
            Transform::Logit => (value / (1.0 - value)).ln(),
        }
    }

    fn to_external(self, coord: f64) -> f64 {
        match self {
            Transform::Log => coord.exp(),
            Transform::Logit => 1.0 / (1.0 + (-coord).exp()),
        }
    }

    /// Keeps exp/logit away from overflow and total flatness.
    fn clamp(self, coord: f64) -> f64 {
        coord.clamp(-27.6, 27.6)
    }
}

/// Largest move per accepted step in internal coordinates (a factor of ~4.5
/// on a scale parameter), so one greedy step cannot jump past a basin into a
/// flat region of the model surface.
const MAX_STEP: f64 = 1.5;

/// Fixed (non-fitted) context plus free-parameter embedding for one family.
struct ParamSpace {
    family: ModelFamily,
    size_s: Option<f64>,
    b_max: f64,
    transforms: Vec<Transform>,
}

impl ParamSpace {
    fn new(family: ModelFamily, data: &[(f64, f64)], opts: &FitOptions) -> Result<Self> {
        let b_max = opts.rate_ceiling_per_min.unwrap_or_else(|| {
            data.iter().map(|&(b, _)| b).fold(0.0f64, f64::max)
        });
        let size_s = opts.nominal_size_s;
        if matches!(family, ModelFamily::RdrlTwoExp | ModelFamily::RdrlReduced)
            && size_s.is_none()
        {
            return Err(Error::InvalidConfig(format!(
                "family {family} holds the asymptote 60/V fixed; a nominal size is required"
            )));
        }
        if family == ModelFamily::Rachlin && !(b_max > 0.0) {
            return Err(Error::InvalidConfig(
                "Rachlin needs a positive rate ceiling".into(),
            ));
        }
        let transforms = match family {
            ModelFamily::Baum | ModelFamily::Prelec => vec![Transform::Log],
            ModelFamily::Killeen | ModelFamily::RdrlTwoExp => {
                vec![Transform::Log, Transform::Log]
            }
            ModelFamily::Rachlin => vec![Transform::Log, Transform::Logit],
            ModelFamily::RdrlReduced => vec![],
        };
        Ok(ParamSpace {
            family,
            size_s,
            b_max,
            transforms,
        })
    }

    fn to_internal(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.transforms)
            .map(|(&t, tr)| tr.clamp(tr.to_internal(t)))
            .collect()
    }

    fn to_external(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .zip(&self.transforms)
            .map(|(&c, tr)| tr.to_external(c))
            .collect()
    }

    fn build(&self, theta: &[f64]) -> RffModel {
        match self.family {
            ModelFamily::Baum => RffModel::Baum { size_s: theta[0] },
            ModelFamily::Prelec => RffModel::Prelec { size_s: theta[0] },
            ModelFamily::Killeen => RffModel::Killeen {
                size_s: theta[0],
                c: theta[1],
            },
            ModelFamily::Rachlin => RffModel::Rachlin {
                size_s: theta[0],
                m: theta[1],
                b_max: self.b_max,
            },
            ModelFamily::RdrlTwoExp => RffModel::RdrlTwoExp {
                size_s: self.size_s.expect("checked at construction"),
                b: theta[0],
                c: theta[1],
            },
            ModelFamily::RdrlReduced => RffModel::RdrlReduced {
                size_s: self.size_s.expect("checked at construction"),
            },
        }
    }

    fn initial(&self, data: &[(f64, f64)], opts: &FitOptions) -> Result<Vec<f64>> {
        if let Some(init) = &opts.initial {
            if init.len() != self.family.free_param_count() {
                return Err(Error::InvalidConfig(format!(
                    "family {} takes {} parameters, got {}",
                    self.family,
                    self.family.free_param_count(),
                    init.len()
                )));
            }
            return Ok(init.clone());
        }
        let plateau = data.iter().map(|&(_, r)| r).fold(0.0f64, f64::max);
        let v0 = match self.size_s {
            Some(v) => v,
            None if plateau > 0.0 => 60.0 / plateau,
            None => 60.0,
        };
        Ok(match self.family {
            ModelFamily::Baum | ModelFamily::Prelec => vec![v0],
            ModelFamily::Killeen => vec![v0, 1200.0 / v0],
            ModelFamily::Rachlin => vec![v0, 0.2],
            ModelFamily::RdrlTwoExp => {
                let v = self.size_s.expect("checked at construction");
                vec![6f64.exp() / v, 5f64.exp() / v]
            }
            ModelFamily::RdrlReduced => vec![],
        })
    }

}

fn rss_of(model: &RffModel, data: &[(f64, f64)]) -> f64 {
    data.iter()
        .map(|&(b, r)| {
            let d = r - model.eval(b);
            d * d
        })
        .sum()
}

/// Solve `(A + lambda diag(A)) delta = g` for k in {1, 2}.
fn solve_damped(a: &[[f64; 2]; 2], g: &[f64; 2], k: usize, lambda: f64) -> Option<[f64; 2]> {
    match k {
        1 => {
            let d = a[0][0] * (1.0 + lambda);
            (d.abs() > 1e-300).then(|| [g[0] / d, 0.0])
        }
        2 => {
            let a00 = a[0][0] * (1.0 + lambda);
            let a11 = a[1][1] * (1.0 + lambda);
            let a01 = a[0][1];
            let det = a00 * a11 - a01 * a01;
            (det.abs() > 1e-300).then(|| {
                [
                    (g[0] * a11 - g[1] * a01) / det,
                    (g[1] * a00 - g[0] * a01) / det,
                ]
            })
        }
        _ => unreachable!("at most two free parameters"),
    }
}

/// Least-squares fit of one model family to `(B, R)` pairs.
pub fn fit(family: ModelFamily, data: &[(f64, f64)], opts: &FitOptions) -> Result<FitResult> {
    let k = family.free_param_count();
    if data.len() < k + 1 {
        return Err(Error::DegenerateFitData(format!(
            "{} points cannot constrain {k} parameters",
            data.len()
        )));
    }
    {
        let mut bs: Vec<f64> = data.iter().map(|&(b, _)| b).collect();
        bs.sort_by(f64::total_cmp);
        if bs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateFitData("duplicate B values".into()));
        }
    }
    let mean_r = data.iter().map(|&(_, r)| r).sum::<f64>() / data.len() as f64;
    let tss: f64 = data.iter().map(|&(_, r)| (r - mean_r) * (r - mean_r)).sum();
    if tss <= 0.0 {
        return Err(Error::DegenerateFitData(
            "all observations identical; R^2 is undefined".into(),
        ));
    }

    let space = ParamSpace::new(family, data, opts)?;
    let mut coords = space.to_internal(&space.initial(data, opts)?);
    let mut rss = rss_of(&space.build(&space.to_external(&coords)), data);
    let mut trace = vec![rss];
    let mut lambda = 1e-3;
    let mut converged = k == 0;
    let mut iterations = 0;

    'outer: for iter in 1..=opts.max_iterations {
        if k == 0 {
            break;
        }
        iterations = iter;

        // Numeric Jacobian of the model surface in internal coordinates,
        // central differences.
        let mut a = [[0.0f64; 2]; 2];
        let mut g = [0.0f64; 2];
        let mut jac = vec![[0.0f64; 2]; data.len()];
        let h = 1e-6;
        for j in 0..k {
            let mut plus = coords.clone();
            let mut minus = coords.clone();
            plus[j] += h;
            minus[j] -= h;
            let model_plus = space.build(&space.to_external(&plus));
            let model_minus = space.build(&space.to_external(&minus));
            for (row, &(b, _)) in jac.iter_mut().zip(data.iter()) {
                row[j] = (model_plus.eval(b) - model_minus.eval(b)) / (2.0 * h);
            }
        }
        let model_here = space.build(&space.to_external(&coords));
        for (row, &(b, r)) in jac.iter().zip(data.iter()) {
            let resid = r - model_here.eval(b);
            for j in 0..k {
                g[j] += row[j] * resid;
                for l in 0..k {
                    a[j][l] += row[j] * row[l];
                }
            }
        }

        // Damping search: grow lambda until a step strictly descends.
        let mut accepted = false;
        for _ in 0..64 {
            let Some(delta) = solve_damped(&a, &g, k, lambda) else {
                lambda *= 8.0;
                continue;
            };
            let mut cand = coords.clone();
            for j in 0..k {
                cand[j] = space.transforms[j].clamp(cand[j] + delta[j].clamp(-MAX_STEP, MAX_STEP));
            }
            if cand == coords {
                lambda *= 8.0;
                if lambda > 1e12 {
                    break;
                }
                continue;
            }
            let cand_rss = rss_of(&space.build(&space.to_external(&cand)), data);
            if cand_rss < rss {
                let drop = rss - cand_rss;
                coords = cand;
                rss = cand_rss;
                trace.push(rss);
                lambda = (lambda / 4.0).max(1e-12);
                accepted = true;
                if drop <= opts.rss_rel_tol * rss.max(f64::MIN_POSITIVE) {
                    converged = true;
                }
                break;
            }
            lambda *= 8.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !accepted {
            // No damped step descends: a local minimum at working precision.
            converged = true;
            break 'outer;
        }
        if converged {
            break;
        }
    }

    let model = space.build(&space.to_external(&coords));
    Ok(FitResult {
        model,
        n: data.len(),
        k,
        rss,
        r_squared: 1.0 - rss / tss,
        aic: aic(rss, data.len(), k),
        bic: bic(rss, data.len(), k),
        converged,
        iterations,
        data_hash: dataset_hash(data),
        rss_trace: trace,
    })
}

/// Fit quality flags at the conventional 0.9 / 0.95 thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitQuality {
    BelowGood,
    Good,
    Excellent,
}

impl FitQuality {
    pub fn from_r_squared(r2: f64) -> Self {
        if r2 >= 0.95 {
            FitQuality::Excellent
        } else if r2 >= 0.9 {
            FitQuality::Good
        } else {
            FitQuality::BelowGood
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFit {
    pub family: ModelFamily,
    pub r_squared: f64,
    pub rss: f64,
    pub aic: f64,
    pub bic: f64,
    /// 1-based rank by BIC (the primary ordering) and by AIC.
    pub bic_rank: usize,
    pub aic_rank: usize,
    pub quality: FitQuality,
}

/// Rank fits of the same dataset by BIC ascending, with AIC ranks alongside.
pub fn compare(fits: &[FitResult]) -> Result<Vec<RankedFit>> {
    if fits.is_empty() {
        return Ok(Vec::new());
    }
    let (hash, n) = (fits[0].data_hash, fits[0].n);
    if fits.iter().any(|f| f.data_hash != hash || f.n != n) {
        return Err(Error::MismatchedFitData);
    }
    let mut by_bic: Vec<usize> = (0..fits.len()).collect();
    by_bic.sort_by(|&a, &b| fits[a].bic.total_cmp(&fits[b].bic));
    let mut by_aic: Vec<usize> = (0..fits.len()).collect();
    by_aic.sort_by(|&a, &b| fits[a].aic.total_cmp(&fits[b].aic));
    let aic_rank_of = |ix: usize| by_aic.iter().position(|&j| j == ix).unwrap() + 1;

    Ok(by_bic
        .iter()
        .enumerate()
        .map(|(rank, &ix)| {
            let f = &fits[ix];
            RankedFit {
                family: f.model.family(),
                r_squared: f.r_squared,
                rss: f.rss,
                aic: f.aic,
                bic: f.bic,
                bic_rank: rank + 1,
                aic_rank: aic_rank_of(ix),
                quality: FitQuality::from_r_squared(f.r_squared),
            }
        })
        .collect())
}
