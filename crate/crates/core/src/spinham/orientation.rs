use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of crystallographically distinct placements of the defect.
pub const N_ORIENTATIONS: usize = 12;

const DEDUP_TOL: f64 = 1e-9;

/// Internal strain of the defect and the valence-band deformation potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrainConfig {
    pub eps_yy: f64,
    pub eps_zz: f64,
    /// Deformation potential b, eV.
    pub b_deform: f64,
    /// Deformation potential d, eV.
    pub d_deform: f64,
    /// Tilt of the defect z axis away from [001] inside the (110) plane, degrees.
    pub tilt_deg: f64,
}

impl Default for StrainConfig {
    fn default() -> Self {
        Self {
            eps_yy: -0.65e-3,
            eps_zz: -0.26e-3,
            b_deform: -0.8,
            d_deform: -2.7,
            tilt_deg: 4.0,
        }
    }
}

impl StrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..90.0).contains(&self.tilt_deg) {
            return Err(Error::validation(format!(
                "tilt_deg must lie in [0, 90), got {}",
                self.tilt_deg
            )));
        }
        let all = [self.eps_yy, self.eps_zz, self.b_deform, self.d_deform];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("strain configuration has non-finite values"));
        }
        Ok(())
    }

    /// Strain tensor in the defect frame: only e_YY and e_ZZ are non-zero.
    pub fn defect_tensor(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(0.0, self.eps_yy, self.eps_zz))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orientation {
    /// Maps defect-frame vectors to crystal coordinates.
    pub rotation: Matrix3<f64>,
    pub strain_crystal: Matrix3<f64>,
    /// 1..=12
    pub label: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationSet {
    pub orientations: Vec<Orientation>,
}

impl OrientationSet {
    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Orientation> {
        self.orientations.iter()
    }
}

/// Defect frame as the columns (x, y, z) of a rotation matrix.
///
/// y is along [110], z starts on [001] and is tilted by `tilt_deg` in the
/// (110) plane towards +x (or -x when `positive_tilt` is false).
pub fn defect_frame(tilt_deg: f64, positive_tilt: bool) -> Matrix3<f64> {
    let y = Vector3::new(1.0, 1.0, 0.0).normalize();
    let x0 = Vector3::new(1.0, -1.0, 0.0).normalize();
    let t = tilt_deg.to_radians();
    let sign = if positive_tilt { 1.0 } else { -1.0 };
    let z = Vector3::z() * t.cos() + x0 * (sign * t.sin());
    let x = y.cross(&z);
    Matrix3::from_columns(&[x, y, z])
}

/// The 24 proper rotations of the cubic point group, as signed permutation
/// matrices with determinant +1.
pub fn cubic_rotations() -> Vec<Matrix3<f64>> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8u8 {
            let mut m = Matrix3::zeros();
            for (row, &col) in perm.iter().enumerate() {
                m[(row, col)] = if signs & (1 << row) != 0 { -1.0 } else { 1.0 };
            }
            if m.determinant() > 0.0 {
                out.push(m);
            }
        }
    }
    out
}

/// The twelve orientational subsets of the defect in crystal coordinates.
pub fn enumerate_orientations(strain: &StrainConfig) -> Result<OrientationSet> {
    enumerate_orientations_with(strain, &cubic_rotations(), true)
}

/// [`enumerate_orientations`] over an explicit list of group rotations and
/// a chosen tilt sense.
pub fn enumerate_orientations_with(
    strain: &StrainConfig,
    rotations: &[Matrix3<f64>],
    positive_tilt: bool,
) -> Result<OrientationSet> {
    strain.validate()?;
    let frame = defect_frame(strain.tilt_deg, positive_tilt);
    let local = strain.defect_tensor();

    let mut distinct: Vec<(Matrix3<f64>, Matrix3<f64>)> = Vec::new();
    for g in rotations {
        let rot = g * frame;
        let eps = rot * local * rot.transpose();
        let seen = distinct
            .iter()
            .any(|(_, e)| (e - eps).iter().all(|d| d.abs() <= DEDUP_TOL));
        if !seen {
            distinct.push((rot, eps));
        }
    }

    if distinct.len() != N_ORIENTATIONS {
        return Err(Error::Consistency(format!(
            "expected {N_ORIENTATIONS} distinct defect orientations, found {}",
            distinct.len()
        )));
    }

    let weight = 1.0 / N_ORIENTATIONS as f64;
    let orientations = distinct
        .into_iter()
        .enumerate()
        .map(|(i, (rotation, strain_crystal))| Orientation {
            rotation,
            strain_crystal: (strain_crystal + strain_crystal.transpose()) * 0.5,
            label: i + 1,
            weight,
        })
        .collect();
    Ok(OrientationSet { orientations })
}
