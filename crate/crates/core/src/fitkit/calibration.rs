use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::lsq::{least_squares, Bounds, FitResult, LsqOptions};
use crate::error::{Error, Result};
use crate::spinham::{
    axis, enumerate_orientations, hole_g_per_orientation, FieldSpec, HoleModel, StrainConfig, N_ORIENTATIONS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Intended field axis.
    pub nominal: [f64; 3],
    /// Axis whose projection defines zero azimuth of the misalignment.
    pub reference: [f64; 3],
    pub field_gauss: f64,
    /// Starting point (g1, g2, inclination in degrees).
    pub start: (f64, f64, f64),
    pub n_azimuth_starts: usize,
    pub g1_bounds: (f64, f64),
    pub g2_bounds: (f64, f64),
    pub inclination_bounds_deg: (f64, f64),
    pub lsq: LsqOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            nominal: [1.0, 1.0, 0.0],
            reference: [0.0, 0.0, 1.0],
            field_gauss: 100.0,
            start: (1.4, -0.1, 5.0),
            n_azimuth_starts: 8,
            g1_bounds: (1.0, 2.0),
            g2_bounds: (-0.5, 0.1),
            inclination_bounds_deg: (0.0, 30.0),
            lsq: LsqOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFit {
    /// Parameters `g1`, `g2`, `inclination_deg`, `azimuth_deg`. The azimuth
    /// is reported folded into [0, 90]: the 12 sorted g-factors are
    /// unchanged under phi -> 180 - phi and phi -> phi + 180.
    pub fit: FitResult,
    /// Azimuth as found by the optimiser, before folding.
    pub raw_azimuth_deg: f64,
    /// Model g-factors at the optimum, sorted descending.
    pub model_g: Vec<f64>,
}

impl CalibrationFit {
    pub fn g1(&self) -> f64 {
        self.fit.params[0]
    }

    pub fn g2(&self) -> f64 {
        self.fit.params[1]
    }

    pub fn inclination_deg(&self) -> f64 {
        self.fit.params[2]
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.fit.params[3]
    }
}

/// Folds an azimuth in degrees into [0, 90].
pub fn fold_azimuth(phi_deg: f64) -> f64 {
    let p = phi_deg.rem_euclid(180.0);
    p.min(180.0 - p)
}

/// Model g-factors for a misaligned field, sorted descending.
pub fn misaligned_g_factors(
    model: &HoleModel,
    opts: &CalibrationOptions,
    inclination_deg: f64,
    azimuth_deg: f64,
) -> Result<Vec<f64>> {
    let set = enumerate_orientations(&model.strain)?;
    let field = FieldSpec::tilted(
        opts.field_gauss,
        vec3(opts.nominal),
        vec3(opts.reference),
        inclination_deg.to_radians(),
        azimuth_deg.to_radians(),
    )?;
    let mut g = hole_g_per_orientation(model, &set, &field)?;
    g.sort_by(|a, b| b.total_cmp(a));
    Ok(g)
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    axis(a[0], a[1], a[2])
}

/// Fits g1, g2 and the field misalignment to 12 measured hole g-factors
/// `(g, sigma)`. Measured and model values are paired after sorting both in
/// descending order. Several azimuth starts are tried and the lowest
/// chi^2 kept.
pub fn fit_gfactor_calibration(
    measured: &[(f64, f64)],
    strain: &StrainConfig,
    opts: &CalibrationOptions,
) -> Result<CalibrationFit> {
    if measured.len() != N_ORIENTATIONS {
        return Err(Error::validation(format!(
            "expected {N_ORIENTATIONS} measured g-factors, got {}",
            measured.len()
        )));
    }
    if measured.iter().any(|&(g, s)| !g.is_finite() || !(s > 0.0)) {
        return Err(Error::validation("measured g-factors need finite values and positive sigmas"));
    }
    if opts.n_azimuth_starts == 0 {
        return Err(Error::validation("need at least one azimuth start"));
    }
    strain.validate()?;
    let mut data = measured.to_vec();
    data.sort_by(|a, b| b.0.total_cmp(&a.0));

    let base = HoleModel { strain: *strain, ..HoleModel::default() };
    let residual = |p: &[f64]| -> Result<Vec<f64>> {
        let model = HoleModel { g1: p[0], g2: p[1], ..base };
        let g = misaligned_g_factors(&model, opts, p[2], p[3])?;
        Ok(g.iter().zip(&data).map(|(m, (y, s))| (m - y) / s).collect())
    };
    let bounds = Bounds::from_pairs(&[opts.g1_bounds, opts.g2_bounds, opts.inclination_bounds_deg, (0.0, 360.0)])?;
    let names = ["g1", "g2", "inclination_deg", "azimuth_deg"];

    let step = 360.0 / opts.n_azimuth_starts as f64;
    let mut best: Option<FitResult> = None;
    for k in 0..opts.n_azimuth_starts {
        let p0 = [opts.start.0, opts.start.1, opts.start.2, 0.5 * step + step * k as f64];
        let fit = least_squares(residual, &names, &p0, &bounds, &opts.lsq)?;
        if best.as_ref().is_none_or(|b| fit.chi2 < b.chi2) {
            best = Some(fit);
        }
    }
    let mut fit = best.expect("at least one start");
    let raw = fit.params[3];
    fit.params[3] = fold_azimuth(raw);
    let model = HoleModel { g1: fit.params[0], g2: fit.params[1], ..base };
    let model_g = misaligned_g_factors(&model, opts, fit.params[2], raw)?;
    Ok(CalibrationFit { fit, raw_azimuth_deg: raw, model_g })
}
