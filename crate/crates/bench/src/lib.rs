//! Fixtures shared by the criterion benches.

use tcentre_core::fitkit::subsets_from;
use tcentre_core::lineshape::{HoleSubset, HyperpolModel, LineshapeSpec};
use tcentre_core::pipeline::simulate_sweep;
use tcentre_core::spinham::HoleGFactors;
use tcentre_core::SweepData;

pub fn field_grid(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

pub fn standard_subsets() -> Vec<HoleSubset> {
    subsets_from(&HoleGFactors::standard_100())
}

pub fn homogeneous_model(gamma: f64) -> HyperpolModel {
    HyperpolModel::from_holes(gamma, &HoleGFactors::standard_100()).expect("valid model")
}

/// Narrow homogeneous line under a wide GLP distribution (Lambda/Gamma = 400).
pub fn convolved_model() -> HyperpolModel {
    homogeneous_model(16.0).with_inhom(Some(LineshapeSpec::glp(6400.0).expect("valid width")))
}

pub fn noisy_sweep(model: &HyperpolModel, b_max: f64, n: usize) -> SweepData {
    simulate_sweep(model, &field_grid(b_max, n), 0.05, 1).expect("valid sweep")
}
