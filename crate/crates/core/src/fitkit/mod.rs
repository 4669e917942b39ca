//! Least-squares engine and the fit drivers built on it.

mod calibration;
mod data;
mod lsq;
mod orientation_map;
mod spectrum;
mod sweep;

pub use calibration::{
    fit_gfactor_calibration, fold_azimuth, misaligned_g_factors, CalibrationFit, CalibrationOptions,
};
pub use data::{SpectrumData, SweepData, MIN_SPECTRUM_POINTS, MIN_SWEEP_POINTS};
pub use lsq::{fd_jacobian, fit_curve, least_squares, Bounds, FitResult, LsqOptions};
pub use orientation_map::{
    orientation_bound_sweep, subsets_for_direction, OrientationGrid, OrientationMap,
    DEFAULT_CHI2_MASK, MIN_GRID_POINTS,
};
pub use spectrum::{fit_linewidth_spectrum, SpectrumFitOptions};
pub use sweep::{fit_gamma_sd, subsets_from, GammaSdFit, SweepFitOptions, SweepMode, WeightMode};
