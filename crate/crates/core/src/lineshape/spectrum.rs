use serde::{Deserialize, Serialize};

use super::amplitude::HyperpolModel;
use super::profile::{LineshapeKind, LineshapeSpec};
use crate::error::Result;
use crate::fitkit::SpectrumData;

/// How a spectrum taken in a small residual field is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualFieldMode {
    /// Orientation average of the single-centre line with Gamma = Lambda.
    EnsembleEq2,
    /// GLP of width sqrt(Lambda^2 + eps_B^2), eps_B the subset-mean
    /// |conserving splitting|.
    GlpWidth,
    /// As `GlpWidth` with a Gaussian profile.
    GaussianWidth,
}

impl ResidualFieldMode {
    /// The mode matching a lineshape kind used for fitting.
    pub fn for_kind(kind: LineshapeKind) -> Self {
        match kind {
            LineshapeKind::Lorentzian => Self::EnsembleEq2,
            LineshapeKind::Glp => Self::GlpWidth,
            LineshapeKind::Gaussian => Self::GaussianWidth,
        }
    }
}

/// Peak-normalised residual-field lineshape at detuning `delta`.
/// `model.gamma` plays the role of the optical linewidth Lambda.
pub fn residual_field_shape(
    model: &HyperpolModel,
    b_gauss: f64,
    delta: f64,
    mode: ResidualFieldMode,
) -> Result<f64> {
    match mode {
        ResidualFieldMode::EnsembleEq2 => Ok(model.ensemble_amplitude(b_gauss, delta)),
        ResidualFieldMode::GlpWidth | ResidualFieldMode::GaussianWidth => {
            let kind = if mode == ResidualFieldMode::GlpWidth {
                LineshapeKind::Glp
            } else {
                LineshapeKind::Gaussian
            };
            let eps = model.mean_conserving_splitting(b_gauss);
            let width = model.gamma.hypot(eps);
            Ok(LineshapeSpec::new(kind, width)?.shape(delta))
        }
    }
}

pub fn residual_field_spectrum(
    model: &HyperpolModel,
    b_gauss: f64,
    delta_mhz: &[f64],
    mode: ResidualFieldMode,
) -> Result<SpectrumData> {
    let counts = delta_mhz
        .iter()
        .map(|&d| residual_field_shape(model, b_gauss, d, mode))
        .collect::<Result<Vec<_>>>()?;
    SpectrumData::new(delta_mhz.to_vec(), counts, None)
}
