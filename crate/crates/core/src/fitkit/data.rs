use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SWEEP_POINTS: usize = 4;
pub const MIN_SPECTRUM_POINTS: usize = 5;

fn check_columns(name: &str, axis: &[f64], values: &[f64], sigma: &[f64], min: usize) -> Result<()> {
    if axis.len() != values.len() || axis.len() != sigma.len() {
        return Err(Error::validation(format!("{name}: columns have different lengths")));
    }
    if axis.len() < min {
        return Err(Error::validation(format!(
            "{name}: need at least {min} points, got {}",
            axis.len()
        )));
    }
    if axis.iter().chain(values).chain(sigma).any(|x| !x.is_finite()) {
        return Err(Error::validation(format!("{name}: non-finite value")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(format!("{name}: axis must be strictly ascending")));
    }
    if sigma.iter().any(|s| *s <= 0.0) {
        return Err(Error::validation(format!("{name}: uncertainties must be positive")));
    }
    Ok(())
}

/// PLE amplitude against magnetic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepData {
    pub b_gauss: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SweepData {
    /// Missing `sigma` means unit uncertainties.
    pub fn new(b_gauss: Vec<f64>, amplitude: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let sigma = sigma.unwrap_or_else(|| vec![1.0; b_gauss.len()]);
        check_columns("sweep", &b_gauss, &amplitude, &sigma, MIN_SWEEP_POINTS)?;
        Ok(Self { b_gauss, amplitude, sigma })
    }

    pub fn len(&self) -> usize {
        self.b_gauss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_gauss.is_empty()
    }
}

/// PLE counts against laser detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumData {
    pub delta_mhz: Vec<f64>,
    pub counts: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SpectrumData {
    pub fn new(delta_mhz: Vec<f64>, counts: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let sigma = sigma.unwrap_or_else(|| vec![1.0; delta_mhz.len()]);
        check_columns("spectrum", &delta_mhz, &counts, &sigma, MIN_SPECTRUM_POINTS)?;
        Ok(Self { delta_mhz, counts, sigma })
    }

    pub fn len(&self) -> usize {
        self.delta_mhz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_mhz.is_empty()
    }

    /// Width of the region above half of (max - min), by linear
    /// interpolation between samples. `None` if the peak touches an edge.
    pub fn estimate_fwhm(&self) -> Option<f64> {
        let (imax, &max) = self
            .counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))?;
        let min = self.counts.iter().copied().fold(f64::INFINITY, f64::min);
        let half = min + 0.5 * (max - min);
        let x = &self.delta_mhz;
        let y = &self.counts;
        let crossing = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
        let left = (1..=imax).rev().find(|&i| y[i - 1] < half).map(|i| crossing(i - 1, i))?;
        let right = (imax..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| crossing(i, i + 1))?;
        Some(right - left)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rules() {
        assert!(SweepData::new(vec![0.0, 1.0, 2.0], vec![1.0; 3], None).is_err());
        assert!(SweepData::new(vec![0.0, 2.0, 1.0, 3.0], vec![1.0; 4], None).is_err());
        assert!(SweepData::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4], Some(vec![0.0; 4])).is_err());
        let s = SweepData::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4], None).unwrap();
        assert_eq!(s.sigma, vec![1.0; 4]);
        assert!(SpectrumData::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4], None).is_err());
    }

    #[test]
    fn fwhm_of_sampled_triangle() {
        let x: Vec<f64> = (-10..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|x| (10.0 - x.abs()).max(0.0)).collect();
        let s = SpectrumData::new(x, y, None).unwrap();
        assert!((s.estimate_fwhm().unwrap() - 10.0).abs() < 1e-12);
    }
}
