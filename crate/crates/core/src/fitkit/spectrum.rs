use serde::{Deserialize, Serialize};

use super::data::SpectrumData;
use super::lsq::{fit_curve, Bounds, FitResult, LsqOptions};
use crate::error::{Error, Result};
use crate::lineshape::{residual_field_shape, HoleSubset, HyperpolModel, LineshapeKind, ResidualFieldMode};
use crate::units::G_ELECTRON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFitOptions {
    pub kind: LineshapeKind,
    /// Residual field present while the spectrum was taken, gauss.
    pub residual_b_gauss: f64,
    pub g_e: f64,
    pub lsq: LsqOptions,
}

impl Default for SpectrumFitOptions {
    fn default() -> Self {
        Self {
            kind: LineshapeKind::Lorentzian,
            residual_b_gauss: 0.0,
            g_e: G_ELECTRON,
            lsq: LsqOptions::default(),
        }
    }
}

/// Fits `offset + amplitude * shape(delta - centre; Lambda)` to a PLE
/// spectrum, where the shape accounts for the Zeeman splitting of the
/// residual field (see [`ResidualFieldMode`]).
///
/// Parameters: `lambda_mhz`, `centre_mhz`, `amplitude`, `offset`.
pub fn fit_linewidth_spectrum(
    spectrum: &SpectrumData,
    holes: &[HoleSubset],
    opts: &SpectrumFitOptions,
) -> Result<FitResult> {
    let x = &spectrum.delta_mhz;
    let y = &spectrum.counts;
    let lambda0 = spectrum
        .estimate_fwhm()
        .ok_or_else(|| Error::validation("spectrum does not contain a complete line"))?;
    let span = x[x.len() - 1] - x[0];
    if span <= 2.0 * lambda0 {
        return Err(Error::validation(format!(
            "spectrum spans {span} MHz, needs more than twice the estimated width {lambda0} MHz"
        )));
    }
    let (imax, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);

    let template = HyperpolModel::new(lambda0, opts.g_e, holes.to_vec())?;
    let mode = ResidualFieldMode::for_kind(opts.kind);
    let b = opts.residual_b_gauss;

    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let m = template.with_gamma(p[0]);
        x.iter()
            .map(|&d| Ok(p[3] + p[2] * residual_field_shape(&m, b, d - p[1], mode)?))
            .collect()
    };
    let bounds = Bounds::from_pairs(&[
        (lambda0 * 1e-3, lambda0 * 1e3),
        (x[0], x[x.len() - 1]),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ])?;
    fit_curve(
        model,
        y,
        &spectrum.sigma,
        &["lambda_mhz", "centre_mhz", "amplitude", "offset"],
        &[lambda0, x[imax], ymax - ymin, ymin],
        &bounds,
        &opts.lsq,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineshape::LineshapeSpec;

    #[test]
    fn recovers_a_lorentzian() {
        let l = LineshapeSpec::lorentzian(330.0).unwrap();
        let x: Vec<f64> = (0..161).map(|i| -2000.0 + 25.0 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|d| 0.1 + 5.0 * l.shape(d - 40.0)).collect();
        let s = SpectrumData::new(x, y, None).unwrap();
        let holes = [HoleSubset { g_h: 0.91, weight: 1.0 }];
        let fit = fit_linewidth_spectrum(&s, &holes, &SpectrumFitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.get("lambda_mhz").unwrap() - 330.0).abs() < 1e-6);
        assert!((fit.get("centre_mhz").unwrap() - 40.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_truncated_spectrum() {
        let x: Vec<f64> = (0..11).map(|i| -100.0 + 20.0 * i as f64).collect();
        let l = LineshapeSpec::lorentzian(330.0).unwrap();
        let y: Vec<f64> = x.iter().map(|d| l.shape(*d)).collect();
        let s = SpectrumData::new(x, y, None).unwrap();
        let holes = [HoleSubset { g_h: 0.91, weight: 1.0 }];
        assert!(fit_linewidth_spectrum(&s, &holes, &SpectrumFitOptions::default()).is_err());
    }
}
