use nalgebra::Matrix3;
use num_complex::Complex64;

use super::field::FieldSpec;
use super::operators::{CMatrix4, SpinOperators};
use crate::error::{Error, Result};
use crate::units::MU_B_MHZ_PER_GAUSS;

const SYMMETRY_TOL: f64 = 1e-12;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub(crate) fn check_symmetric(strain: &Matrix3<f64>) -> Result<()> {
    let scale = strain.amax().max(1e-300);
    for i in 0..3 {
        for j in (i + 1)..3 {
            let a = strain[(i, j)];
            let b = strain[(j, i)];
            if !a.is_finite() || !b.is_finite() || (a - b).abs() > SYMMETRY_TOL * scale {
                return Err(Error::validation(format!(
                    "strain tensor is not symmetric: e[{i}{j}]={a}, e[{j}{i}]={b}"
                )));
            }
        }
    }
    if strain.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation("strain tensor has non-finite entries"));
    }
    Ok(())
}

/// Strain (Bir-Pikus) Hamiltonian of the spin-3/2 hole, in eV:
///
/// H_s = -b sum_i (J_i^2 - 1) e_ii - d/sqrt(3) sum_{i != j} {J_i, J_j}/2 e_ij
pub fn build_strain_hamiltonian(strain: &Matrix3<f64>, b_ev: f64, d_ev: f64) -> Result<CMatrix4> {
    check_symmetric(strain)?;
    let ops = SpinOperators::new();
    Ok(strain_hamiltonian_with(&ops, strain, b_ev, d_ev))
}

pub(crate) fn strain_hamiltonian_with(
    ops: &SpinOperators,
    strain: &Matrix3<f64>,
    b_ev: f64,
    d_ev: f64,
) -> CMatrix4 {
    let id = CMatrix4::identity();
    let shear = d_ev / 3f64.sqrt();
    let mut h = CMatrix4::zeros();
    for i in 0..3 {
        let ji = ops.component(i);
        h -= (ji * ji - id) * real(b_ev * strain[(i, i)]);
        for j in 0..3 {
            if i != j {
                h -= ops.sym_product(i, j) * real(shear * strain[(i, j)]);
            }
        }
    }
    h
}

/// Zeeman term of the hole, mu_B (g1 sum B_i J_i + g2 sum B_i J_i^3), in MHz.
pub fn build_zeeman_hamiltonian(field: &FieldSpec, g1: f64, g2: f64) -> CMatrix4 {
    zeeman_hamiltonian_with(&SpinOperators::new(), field, g1, g2, MU_B_MHZ_PER_GAUSS)
}

pub(crate) fn zeeman_hamiltonian_with(
    ops: &SpinOperators,
    field: &FieldSpec,
    g1: f64,
    g2: f64,
    mu_b: f64,
) -> CMatrix4 {
    let b = field.vector();
    let mut h = CMatrix4::zeros();
    for i in 0..3 {
        let ji = ops.component(i);
        let cubic = ji * ji * ji;
        h += ji * real(mu_b * g1 * b[i]) + cubic * real(mu_b * g2 * b[i]);
    }
    h
}
