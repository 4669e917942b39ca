//! Spin-3/2 hole Hamiltonian, defect orientations and hole g-factors.

mod field;
mod gfactor;
mod hamiltonian;
mod operators;
mod orientation;

pub use field::{polar_direction, FieldSpec};
pub use gfactor::{
    alignment_spread, axis, compute_hole_g, hole_g_per_orientation,
    propagate_alignment_uncertainty, AlignmentSpread, Doublet, GEntry, HoleGFactors, HoleModel,
    GROUPING_TOL,
};
pub use hamiltonian::{build_strain_hamiltonian, build_zeeman_hamiltonian};
pub use operators::{hermitian_eigenvalues, hermiticity_defect, CMatrix4, SpinOperators};
pub use orientation::{
    cubic_rotations, defect_frame, enumerate_orientations, enumerate_orientations_with,
    Orientation, OrientationSet, StrainConfig, N_ORIENTATIONS,
};
