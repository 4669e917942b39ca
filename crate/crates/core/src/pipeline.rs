//! Synthetic data, map linecut analysis and the indistinguishability
//! estimate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitkit::{fit_curve, Bounds, LsqOptions, SpectrumData, SweepData};
use crate::lineshape::{HyperpolModel, LineshapeSpec};
use crate::units::{DEBYE_WALLER, LIFETIME_LINEWIDTH_MHZ};

/// PLE amplitude on a (field, detuning) grid; `amplitude[i][j]` is at
/// `b_gauss[i]`, `delta_mhz[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PleMap {
    pub b_gauss: Vec<f64>,
    pub delta_mhz: Vec<f64>,
    pub amplitude: Vec<Vec<f64>>,
}

impl PleMap {
    pub fn new(b_gauss: Vec<f64>, delta_mhz: Vec<f64>, amplitude: Vec<Vec<f64>>) -> Result<Self> {
        ascending("b_gauss", &b_gauss)?;
        ascending("delta_mhz", &delta_mhz)?;
        if amplitude.len() != b_gauss.len() || amplitude.iter().any(|r| r.len() != delta_mhz.len()) {
            return Err(Error::validation("map dimensions do not match its axes"));
        }
        if amplitude.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::validation("map amplitudes must be finite"));
        }
        Ok(Self { b_gauss, delta_mhz, amplitude })
    }

    pub fn row(&self, i: usize) -> Result<SpectrumData> {
        SpectrumData::new(self.delta_mhz.clone(), self.amplitude[i].clone(), None)
    }
}

fn ascending(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::validation(format!("{name} grid is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(format!("{name} grid must be finite and strictly ascending")));
    }
    Ok(())
}

/// Model amplitude at zero detuning plus additive Gaussian noise. The sigma
/// column holds `noise_sigma`, or 1 for noise-free data.
pub fn simulate_sweep(model: &HyperpolModel, b_gauss: &[f64], noise_sigma: f64, seed: u64) -> Result<SweepData> {
    if !(noise_sigma >= 0.0) || !noise_sigma.is_finite() {
        return Err(Error::validation("noise sigma must be finite and non-negative"));
    }
    let mut a = model.sweep(b_gauss, 0.0)?;
    let sigma = if noise_sigma > 0.0 {
        add_noise(&mut a, noise_sigma, seed)?;
        Some(vec![noise_sigma; a.len()])
    } else {
        None
    };
    SweepData::new(b_gauss.to_vec(), a, sigma)
}

fn add_noise(values: &mut [f64], sigma: f64, seed: u64) -> Result<()> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::validation(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in values {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

/// Model amplitude over the full grid. Rows are evaluated in parallel; the
/// result does not depend on the thread count.
pub fn simulate_map(model: &HyperpolModel, b_gauss: &[f64], delta_mhz: &[f64]) -> Result<PleMap> {
    ascending("b_gauss", b_gauss)?;
    ascending("delta_mhz", delta_mhz)?;
    model.validate()?;
    let amplitude = b_gauss
        .par_iter()
        .map(|&b| delta_mhz.iter().map(|&d| model.amplitude(b, d)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    PleMap::new(b_gauss.to_vec(), delta_mhz.to_vec(), amplitude)
}

/// Adds Gaussian noise to every cell, row-major, from one seeded stream.
pub fn add_map_noise(map: &mut PleMap, noise_sigma: f64, seed: u64) -> Result<()> {
    if noise_sigma == 0.0 {
        return Ok(());
    }
    let mut flat: Vec<f64> = map.amplitude.iter().flatten().copied().collect();
    add_noise(&mut flat, noise_sigma, seed)?;
    let n = map.delta_mhz.len();
    for (row, chunk) in map.amplitude.iter_mut().zip(flat.chunks(n)) {
        row.copy_from_slice(chunk);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinewidthRow {
    pub b_gauss: f64,
    pub fwhm_mhz: f64,
    pub sigma_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinewidthTable {
    pub rows: Vec<LinewidthRow>,
    /// Fields whose row fit failed or did not converge.
    pub flagged_b_gauss: Vec<f64>,
}

/// Lorentzian fit (amplitude, centre, FWHM) of every fixed-field row,
/// whatever shape generated the map.
pub fn map_linewidths(map: &PleMap, opts: &LsqOptions) -> Result<LinewidthTable> {
    let fits: Vec<Option<LinewidthRow>> = (0..map.b_gauss.len())
        .into_par_iter()
        .map(|i| Ok(fit_row(&map.row(i)?, opts).map(|(w, s)| LinewidthRow { b_gauss: map.b_gauss[i], fwhm_mhz: w, sigma_mhz: s })))
        .collect::<Result<_>>()?;
    let mut table = LinewidthTable { rows: Vec::new(), flagged_b_gauss: Vec::new() };
    for (b, f) in map.b_gauss.iter().zip(fits) {
        match f {
            Some(row) => table.rows.push(row),
            None => table.flagged_b_gauss.push(*b),
        }
    }
    Ok(table)
}

fn fit_row(row: &SpectrumData, opts: &LsqOptions) -> Option<(f64, f64)> {
    let w0 = row.estimate_fwhm()?;
    let (imax, &ymax) = row.counts.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let x = &row.delta_mhz;
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let l = LineshapeSpec::lorentzian(p[2])?;
        Ok(x.iter().map(|d| p[0] * l.shape(d - p[1])).collect())
    };
    let bounds = Bounds::from_pairs(&[
        (0.0, f64::INFINITY),
        (x[0], x[x.len() - 1]),
        (w0 * 1e-3, w0 * 1e3),
    ])
    .ok()?;
    let fit = fit_curve(model, &row.counts, &row.sigma, &["amplitude", "centre_mhz", "fwhm_mhz"], &[ymax, x[imax], w0], &bounds, opts)
        .ok()?;
    fit.converged.then(|| (fit.params[2], fit.sigmas[2]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indistinguishability {
    pub xi: f64,
    pub gamma1_mhz: f64,
    pub gamma_sd_mhz: f64,
    pub value: f64,
}

/// I = xi Gamma_1 / (xi Gamma_1 + Gamma_sd).
pub fn indistinguishability(gamma_sd_mhz: f64, xi: f64, gamma1_mhz: f64) -> Result<Indistinguishability> {
    if !(gamma_sd_mhz >= 0.0) || !gamma_sd_mhz.is_finite() {
        return Err(Error::validation("Gamma_sd must be finite and non-negative"));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::validation("Debye-Waller factor must lie in (0, 1]"));
    }
    if !(gamma1_mhz > 0.0) || !gamma1_mhz.is_finite() {
        return Err(Error::validation("lifetime linewidth must be positive"));
    }
    let coherent = xi * gamma1_mhz;
    Ok(Indistinguishability { xi, gamma1_mhz, gamma_sd_mhz, value: coherent / (coherent + gamma_sd_mhz) })
}

/// [`indistinguishability`] with the T-centre constants.
pub fn t_centre_indistinguishability(gamma_sd_mhz: f64) -> Result<Indistinguishability> {
    indistinguishability(gamma_sd_mhz, DEBYE_WALLER, LIFETIME_LINEWIDTH_MHZ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinham::HoleGFactors;

    fn model(gamma: f64) -> HyperpolModel {
        HyperpolModel::from_holes(gamma, &HoleGFactors::standard_100()).unwrap()
    }

    #[test]
    fn noise_free_sweep_is_exact() {
        let m = model(27.0);
        let b = [0.0, 10.0, 20.0, 40.0, 80.0];
        let s = simulate_sweep(&m, &b, 0.0, 1).unwrap();
        assert_eq!(s.amplitude, m.sweep(&b, 0.0).unwrap());
        assert_eq!(s.sigma, vec![1.0; 5]);
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let m = model(27.0);
        let b: Vec<f64> = (0..20).map(|i| 5.0 * i as f64).collect();
        let a = simulate_sweep(&m, &b, 0.05, 9).unwrap();
        let c = simulate_sweep(&m, &b, 0.05, 9).unwrap();
        let d = simulate_sweep(&m, &b, 0.05, 10).unwrap();
        assert_eq!(a, c);
        assert_ne!(a.amplitude, d.amplitude);
        assert!(simulate_sweep(&m, &b, -1.0, 9).is_err());
    }

    #[test]
    fn map_peak_and_symmetry() {
        let m = model(250.0);
        let b: Vec<f64> = (0..11).map(|i| 50.0 * i as f64).collect();
        let d: Vec<f64> = (0..41).map(|i| -1000.0 + 50.0 * i as f64).collect();
        let map = simulate_map(&m, &b, &d).unwrap();
        assert!((map.amplitude[0][20] - 1.0).abs() < 1e-15);
        for row in &map.amplitude {
            for j in 0..d.len() {
                assert!((row[j] - row[d.len() - 1 - j]).abs() < 1e-12);
            }
            let jmax = (0..d.len()).max_by(|&a, &c| row[a].total_cmp(&row[c])).unwrap();
            assert_eq!(jmax, 20);
        }
    }

    #[test]
    fn zero_field_linecut_width() {
        let m = model(330.0);
        let d: Vec<f64> = (0..201).map(|i| -2000.0 + 20.0 * i as f64).collect();
        let map = simulate_map(&m, &[0.0, 100.0], &d).unwrap();
        let t = map_linewidths(&map, &LsqOptions::default()).unwrap();
        assert!(t.flagged_b_gauss.is_empty());
        assert!((t.rows[0].fwhm_mhz - 330.0).abs() < 3.3);
        assert!(t.rows[1].fwhm_mhz > t.rows[0].fwhm_mhz);
    }

    #[test]
    fn indistinguishability_values() {
        assert_eq!(t_centre_indistinguishability(0.0).unwrap().value, 1.0);
        let i = t_centre_indistinguishability(16.0).unwrap().value;
        assert!((i - 0.03887 / 16.03887).abs() < 1e-12);
        assert!(t_centre_indistinguishability(-1.0).is_err());
    }
}
