use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A static magnetic field in crystal coordinates.
///
/// The direction is always stored as a unit vector. Angle-based
/// constructors use the crystal axes: [`FieldSpec::from_polar`] takes the
/// polar angle from [001] and azimuth from [100]; [`FieldSpec::tilted`]
/// describes a misalignment cone around a nominal axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    magnitude: f64,
    direction: [f64; 3],
}

impl FieldSpec {
    pub fn new(magnitude_gauss: f64, direction: Vector3<f64>) -> Result<Self> {
        if !magnitude_gauss.is_finite() || magnitude_gauss < 0.0 {
            return Err(Error::validation(format!(
                "field magnitude must be finite and non-negative, got {magnitude_gauss}"
            )));
        }
        let norm = direction.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::validation("field direction must be a non-zero finite vector"));
        }
        let unit = direction / norm;
        Ok(Self {
            magnitude: magnitude_gauss,
            direction: [unit.x, unit.y, unit.z],
        })
    }

    /// Polar angle `theta` measured from [001], azimuth `phi` from [100]
    /// towards [010]; both in radians.
    pub fn from_polar(magnitude_gauss: f64, theta: f64, phi: f64) -> Result<Self> {
        Self::new(magnitude_gauss, polar_direction(theta, phi))
    }

    /// Field inclined by `inclination` away from `nominal`, with the tilt
    /// plane rotated by `azimuth` about `nominal` starting from the
    /// component of `reference` orthogonal to `nominal`. Radians.
    pub fn tilted(
        magnitude_gauss: f64,
        nominal: Vector3<f64>,
        reference: Vector3<f64>,
        inclination: f64,
        azimuth: f64,
    ) -> Result<Self> {
        let n = nominal
            .try_normalize(0.0)
            .ok_or_else(|| Error::validation("nominal axis must be non-zero"))?;
        let u = (reference - n * reference.dot(&n))
            .try_normalize(1e-12)
            .ok_or_else(|| Error::validation("reference axis must not be parallel to nominal"))?;
        let v = n.cross(&u);
        let dir = n * inclination.cos()
            + (u * azimuth.cos() + v * azimuth.sin()) * inclination.sin();
        Self::new(magnitude_gauss, dir)
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn direction(&self) -> Vector3<f64> {
        Vector3::from(self.direction)
    }

    /// Field vector in gauss.
    pub fn vector(&self) -> Vector3<f64> {
        self.direction() * self.magnitude
    }

    pub fn reversed(&self) -> Self {
        Self {
            magnitude: self.magnitude,
            direction: self.direction.map(|c| -c),
        }
    }

    pub fn with_magnitude(&self, magnitude_gauss: f64) -> Result<Self> {
        Self::new(magnitude_gauss, self.direction())
    }

    /// (theta, phi) of the direction in the convention of [`FieldSpec::from_polar`].
    pub fn polar_angles(&self) -> (f64, f64) {
        let d = self.direction();
        (d.z.clamp(-1.0, 1.0).acos(), d.y.atan2(d.x))
    }
}

pub fn polar_direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn direction_is_normalised() {
        let f = FieldSpec::new(10.0, Vector3::new(3.0, 4.0, 0.0)).unwrap();
        assert!((f.direction().norm() - 1.0).abs() < 1e-12);
        assert!((f.vector().x - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FieldSpec::new(-1.0, Vector3::x()).is_err());
        assert!(FieldSpec::new(1.0, Vector3::zeros()).is_err());
        assert!(FieldSpec::new(f64::NAN, Vector3::x()).is_err());
        assert!(FieldSpec::tilted(1.0, Vector3::z(), Vector3::z(), 0.1, 0.0).is_err());
    }

    #[test]
    fn polar_round_trip() {
        let f = FieldSpec::from_polar(1.0, 0.3 * std::f64::consts::PI, 0.25 * std::f64::consts::PI)
            .unwrap();
        let (t, p) = f.polar_angles();
        assert!((t - 0.3 * std::f64::consts::PI).abs() < 1e-12);
        assert!((p - 0.25 * std::f64::consts::PI).abs() < 1e-12);
        let x = FieldSpec::from_polar(1.0, FRAC_PI_2, 0.0).unwrap();
        assert!((x.direction() - Vector3::x()).norm() < 1e-15);
    }

    #[test]
    fn zero_inclination_is_nominal() {
        let n = Vector3::new(1.0, 1.0, 0.0);
        let f = FieldSpec::tilted(5.0, n, Vector3::z(), 0.0, 1.234).unwrap();
        assert!((f.direction() - n.normalize()).norm() < 1e-15);
        let g = FieldSpec::tilted(5.0, n, Vector3::z(), 0.2, 1.234).unwrap();
        assert!((g.direction().dot(&n.normalize()) - 0.2f64.cos()).abs() < 1e-14);
    }
}
