use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::SweepData;
use super::sweep::{fit_gamma_sd, subsets_from, SweepFitOptions};
use crate::error::{Error, Result};
use crate::lineshape::HoleSubset;
use crate::spinham::{compute_hole_g, FieldSpec, HoleModel, OrientationSet};

/// Grid points with chi^2_red above this are masked.
pub const DEFAULT_CHI2_MASK: f64 = 10.0;
pub const MIN_GRID_POINTS: usize = 8;

/// Polar grid of field directions (radians): theta from [001], phi from
/// [100].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationGrid {
    pub theta: (f64, f64),
    pub phi: (f64, f64),
    pub n_theta: usize,
    pub n_phi: usize,
}

impl OrientationGrid {
    /// A grid with `n` points per axis needs `n >= 8`, or `n == 1` with a
    /// degenerate range to evaluate a single direction.
    pub fn new(theta: (f64, f64), phi: (f64, f64), n_theta: usize, n_phi: usize) -> Result<Self> {
        for (name, (lo, hi), n) in [("theta", theta, n_theta), ("phi", phi, n_phi)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::validation(format!("{name} range must be finite and ordered")));
            }
            let single = n == 1 && lo == hi;
            if !single && (n < MIN_GRID_POINTS || lo == hi) {
                return Err(Error::validation(format!(
                    "{name} axis needs at least {MIN_GRID_POINTS} points over a non-empty range, got {n}"
                )));
            }
        }
        Ok(Self { theta, phi, n_theta, n_phi })
    }

    /// theta and phi both over [0, pi/2], which covers every inequivalent
    /// direction of the cubic crystal.
    pub fn octant(n_theta: usize, n_phi: usize) -> Result<Self> {
        Self::new((0.0, FRAC_PI_2), (0.0, FRAC_PI_2), n_theta, n_phi)
    }

    pub fn single(theta: f64, phi: f64) -> Result<Self> {
        Self::new((theta, theta), (phi, phi), 1, 1)
    }

    pub fn thetas(&self) -> Vec<f64> {
        linspace(self.theta, self.n_theta)
    }

    pub fn phis(&self) -> Vec<f64> {
        linspace(self.phi, self.n_phi)
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationMap {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `[i_theta][i_phi]`, NaN where masked.
    pub gamma_sd_mhz: Vec<Vec<f64>>,
    pub converged: Vec<Vec<bool>>,
    /// (theta, phi, Gamma_sd) of the largest unmasked Gamma_sd.
    pub max_point: (f64, f64, f64),
}

/// Fits Gamma_sd for every field direction on `grid`. `holes` maps a
/// direction (theta, phi) to the orientational subsets seen there. Cells
/// whose fit fails, does not converge, or has chi^2_red above `chi2_mask`
/// are masked.
pub fn orientation_bound_sweep<H>(
    sweep: &SweepData,
    holes: H,
    grid: &OrientationGrid,
    opts: &SweepFitOptions,
    chi2_mask: f64,
) -> Result<OrientationMap>
where
    H: Fn(f64, f64) -> Result<Vec<HoleSubset>> + Sync,
{
    let thetas = grid.thetas();
    let phis = grid.phis();
    let cells: Vec<(usize, usize)> =
        (0..thetas.len()).flat_map(|i| (0..phis.len()).map(move |j| (i, j))).collect();

    let results: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let subsets = holes(thetas[i], phis[j]).ok()?;
            let fit = fit_gamma_sd(sweep, &subsets, opts).ok()?;
            (fit.fit.converged && fit.fit.chi2_reduced <= chi2_mask).then(|| fit.gamma())
        })
        .collect();

    let mut gamma = vec![vec![f64::NAN; phis.len()]; thetas.len()];
    let mut converged = vec![vec![false; phis.len()]; thetas.len()];
    let mut max_point: Option<(f64, f64, f64)> = None;
    for (&(i, j), r) in cells.iter().zip(results) {
        if let Some(g) = r {
            gamma[i][j] = g;
            converged[i][j] = true;
            if max_point.is_none_or(|m| g > m.2) {
                max_point = Some((thetas[i], phis[j], g));
            }
        }
    }
    let max_point = max_point.ok_or_else(|| Error::validation("no orientation fits data"))?;
    Ok(OrientationMap { theta: thetas, phi: phis, gamma_sd_mhz: gamma, converged, max_point })
}

/// Hole subsets for a field along (theta, phi), evaluated at `field_gauss`.
pub fn subsets_for_direction(
    model: &HoleModel,
    orientations: &OrientationSet,
    theta: f64,
    phi: f64,
    field_gauss: f64,
) -> Result<Vec<HoleSubset>> {
    let field = FieldSpec::from_polar(field_gauss, theta, phi)?;
    Ok(subsets_from(&compute_hole_g(model, orientations, &field)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(OrientationGrid::octant(8, 8).is_ok());
        assert!(OrientationGrid::octant(7, 8).is_err());
        assert!(OrientationGrid::single(0.3, 0.2).is_ok());
        assert!(OrientationGrid::new((0.0, 1.0), (0.0, 1.0), 1, 8).is_err());
        let g = OrientationGrid::octant(8, 9).unwrap();
        assert_eq!(g.thetas().len(), 8);
        assert!((g.phis()[8] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn all_masked_is_an_error() {
        let b: Vec<f64> = (0..10).map(|i| 10.0 * i as f64).collect();
        let sweep = SweepData::new(b, vec![1.0; 10], None).unwrap();
        let grid = OrientationGrid::single(0.1, 0.1).unwrap();
        let r = orientation_bound_sweep(
            &sweep,
            |_, _| Err(Error::validation("no subsets")),
            &grid,
            &SweepFitOptions::default(),
            DEFAULT_CHI2_MASK,
        );
        assert!(r.is_err());
    }
}
