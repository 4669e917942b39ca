use serde::{Deserialize, Serialize};

use super::data::SweepData;
use super::lsq::{fit_curve, Bounds, FitResult, LsqOptions};
use crate::error::{Error, Result};
use crate::lineshape::{transition_splitting, BranchWeights, HoleSubset, HyperpolModel, LineshapeSpec};
use crate::spinham::HoleGFactors;
use crate::units::G_ELECTRON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepMode {
    /// Homogeneous broadening only.
    Homogeneous,
    /// Convolved with an inhomogeneous distribution of resonance shifts.
    Convolved(LineshapeSpec),
}

/// How orientational subsets contribute to the fitted signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Equal,
    /// Signal from the single subset giving the smallest Gamma_sd.
    SingleMin,
    /// Signal from the single subset giving the largest Gamma_sd.
    SingleMax,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "equal" => Ok(Self::Equal),
            "single_min" => Ok(Self::SingleMin),
            "single_max" => Ok(Self::SingleMax),
            other => Err(Error::validation(format!("unknown weight mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepFitOptions {
    pub g_e: f64,
    pub mode: SweepMode,
    pub weight_mode: WeightMode,
    pub branches: BranchWeights,
    /// Fit an additive offset (otherwise fixed at zero).
    pub free_offset: bool,
    /// Fit a multiplicative scale (otherwise fixed at one).
    pub free_scale: bool,
    pub gamma_bounds: (f64, f64),
    pub lsq: LsqOptions,
}

impl Default for SweepFitOptions {
    fn default() -> Self {
        Self {
            g_e: G_ELECTRON,
            mode: SweepMode::Homogeneous,
            weight_mode: WeightMode::Equal,
            branches: BranchWeights::Ratio(0.0),
            free_offset: false,
            free_scale: true,
            gamma_bounds: (1e-3, 1e6),
            lsq: LsqOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSdFit {
    /// Parameters `gamma_mhz`, then `scale` and `offset` when free.
    pub fit: FitResult,
    /// The subset used by the single-subset weight modes.
    pub subset: Option<HoleSubset>,
    pub gamma_at_bound: bool,
    /// The data never fall below 0.8 of the first point, so Gamma is
    /// poorly constrained.
    pub weak_decay: bool,
}

impl GammaSdFit {
    pub fn gamma(&self) -> f64 {
        self.fit.params[0]
    }

    pub fn gamma_sigma(&self) -> f64 {
        self.fit.sigmas[0]
    }
}

pub fn subsets_from(holes: &HoleGFactors) -> Vec<HoleSubset> {
    holes.weighted().map(|(g_h, weight)| HoleSubset { g_h, weight }).collect()
}

/// Fits the homogeneous linewidth Gamma_sd of a Delta = 0 field sweep.
pub fn fit_gamma_sd(sweep: &SweepData, holes: &[HoleSubset], opts: &SweepFitOptions) -> Result<GammaSdFit> {
    match opts.weight_mode {
        WeightMode::Equal => fit_with_subsets(sweep, holes.to_vec(), opts, None),
        WeightMode::SingleMin | WeightMode::SingleMax => {
            let mut fits = Vec::new();
            for s in holes.iter().filter(|s| s.weight > 0.0) {
                let single = HoleSubset { g_h: s.g_h, weight: 1.0 };
                fits.push(fit_with_subsets(sweep, vec![single], opts, Some(single))?);
            }
            let any_converged = fits.iter().any(|f| f.fit.converged);
            let pool = fits.into_iter().filter(|f| f.fit.converged || !any_converged);
            let pick = if opts.weight_mode == WeightMode::SingleMin {
                pool.min_by(|a, b| a.gamma().total_cmp(&b.gamma()))
            } else {
                pool.max_by(|a, b| a.gamma().total_cmp(&b.gamma()))
            };
            pick.ok_or_else(|| Error::validation("no hole subset with positive weight"))
        }
    }
}

fn fit_with_subsets(
    sweep: &SweepData,
    subsets: Vec<HoleSubset>,
    opts: &SweepFitOptions,
    tag: Option<HoleSubset>,
) -> Result<GammaSdFit> {
    let (g_lo, g_hi) = opts.gamma_bounds;
    let base = HyperpolModel::new(0.5 * (g_lo + g_hi).min(1e3), opts.g_e, subsets)?
        .with_branches(opts.branches)
        .with_inhom(match opts.mode {
            SweepMode::Homogeneous => None,
            SweepMode::Convolved(p) => Some(p),
        });
    base.validate()?;

    let b = &sweep.b_gauss;
    let y = &sweep.amplitude;
    let y0 = y[0];
    if !(y0 > 0.0) {
        return Err(Error::validation("first sweep amplitude must be positive"));
    }
    let min_ratio = y.iter().copied().fold(f64::INFINITY, f64::min) / y0;
    let weak_decay = min_ratio > 0.8;

    let gamma0 = initial_gamma(sweep, &base).clamp(g_lo * 1.0001, g_hi * 0.9999);
    let scale0 = y0 / base.with_gamma(gamma0).sweep(&b[..1], 0.0)?[0];

    let mut names = vec!["gamma_mhz"];
    let mut p0 = vec![gamma0];
    let mut bounds = vec![(g_lo, g_hi)];
    if opts.free_scale {
        names.push("scale");
        p0.push(scale0);
        bounds.push((0.0, f64::INFINITY));
    }
    if opts.free_offset {
        names.push("offset");
        p0.push(0.0);
        bounds.push((f64::NEG_INFINITY, f64::INFINITY));
    }
    let (free_scale, free_offset) = (opts.free_scale, opts.free_offset);
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let scale = if free_scale { p[1] } else { 1.0 };
        let offset = if free_offset { p[p.len() - 1] } else { 0.0 };
        let a = base.with_gamma(p[0]).sweep(b, 0.0)?;
        Ok(a.into_iter().map(|a| scale * a + offset).collect())
    };
    let fit = fit_curve(model, y, &sweep.sigma, &names, &p0, &Bounds::from_pairs(&bounds)?, &opts.lsq)?;
    Ok(GammaSdFit {
        gamma_at_bound: fit.at_bound[0],
        fit,
        subset: tag,
        weak_decay,
    })
}

/// Starting Gamma from the field where the data fall to half their first
/// value, using the weighted mean |g_h - g_e|. For the single-centre line
/// the half point is eps_B = Gamma; deep in the inhomogeneous regime the
/// convolved response is Gamma / sqrt(Gamma^2 + eps_B^2), halving at
/// eps_B = sqrt(3) Gamma.
fn initial_gamma(sweep: &SweepData, model: &HyperpolModel) -> f64 {
    let per_gauss: f64 = model
        .subsets
        .iter()
        .map(|s| s.weight * transition_splitting(model.g_e, s.g_h, 1.0).conserving.abs())
        .sum::<f64>()
        .max(1e-12);
    let b = &sweep.b_gauss;
    let y0 = sweep.amplitude[0];
    let ratio: Vec<f64> = sweep.amplitude.iter().map(|a| a / y0).collect();
    let convolved = model.inhom.is_some();

    if let Some(k) = ratio.iter().position(|&r| r < 0.5) {
        let (b1, b2, r1, r2) = (b[k - 1], b[k], ratio[k - 1], ratio[k]);
        let b_half = b1 + (0.5 - r1) * (b2 - b1) / (r2 - r1);
        let eps = per_gauss * b_half;
        return if convolved { eps / 3f64.sqrt() } else { eps };
    }
    let a = ratio[ratio.len() - 1].clamp(0.01, 0.99);
    let eps = per_gauss * b[b.len() - 1].abs();
    if convolved {
        eps * a / (1.0 - a * a).sqrt()
    } else {
        eps * (a / (1.0 - a)).sqrt()
    }
}
