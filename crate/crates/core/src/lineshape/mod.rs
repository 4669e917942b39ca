//! Spectral profiles and PLE amplitude models.

mod amplitude;
mod convolve;
mod profile;
mod spectrum;

pub use amplitude::{
    four_transition_amplitude, four_transition_weighted, lorentz_peak, rate_model_amplitude,
    single_centre_amplitude, transition_splitting, BranchWeights, HoleSubset, HyperpolModel,
    TransitionSplitting,
};
pub use convolve::{ConvolutionGrid, BASE_POINTS, CONVERGENCE_TOL, SPAN_FWHM};
pub use profile::{profile, LineshapeKind, LineshapeSpec};
pub use spectrum::{residual_field_shape, residual_field_spectrum, ResidualFieldMode};
