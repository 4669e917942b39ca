//! Spin-dependent optical hyperpolarization of T-centre ensembles.
//!
//! The crate is split along the physics:
//!
//! - [`spinham`]: spin-3/2 hole Hamiltonian (strain + Zeeman), the twelve
//!   orientational subsets of the defect, and hole g-factors.
//! - [`lineshape`]: spectral profiles and the PLE amplitude models
//!   (two- and four-transition rate models, orientation averaging,
//!   inhomogeneous convolution).
//! - [`fitkit`]: a bounded Levenberg-Marquardt engine and the fit drivers
//!   that extract linewidths, spectral-diffusion widths and g-factor
//!   calibrations.
//! - [`pipeline`]: synthetic sweeps and 2-D maps, map linecut analysis and
//!   the photon indistinguishability estimate.
//! - [`io`]: CSV readers and writers for the dataset types.
//!
//! All energies are carried as frequencies in MHz and all fields in gauss.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitkit;
pub mod io;
pub mod lineshape;
pub mod pipeline;
pub mod spinham;
pub mod units;

pub use error::{Error, Result};
pub use fitkit::{
    fit_gamma_sd, fit_gfactor_calibration, fit_linewidth_spectrum, least_squares,
    orientation_bound_sweep, Bounds, CalibrationFit, FitResult, GammaSdFit, LsqOptions,
    OrientationGrid, OrientationMap, SpectrumData, SweepData, SweepFitOptions, SweepMode,
    WeightMode,
};
pub use lineshape::{
    HoleSubset, HyperpolModel, LineshapeKind, LineshapeSpec, ResidualFieldMode,
    TransitionSplitting,
};
pub use pipeline::{Indistinguishability, LinewidthRow, PleMap};
pub use spinham::{
    Doublet, FieldSpec, GEntry, HoleGFactors, HoleModel, Orientation, OrientationSet,
    SpinOperators, StrainConfig,
};
