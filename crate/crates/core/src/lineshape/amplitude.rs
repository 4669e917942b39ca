use serde::{Deserialize, Serialize};

use super::convolve::ConvolutionGrid;
use super::profile::LineshapeSpec;
use crate::error::{Error, Result};
use crate::spinham::HoleGFactors;
use crate::units::{G_ELECTRON, MU_B_MHZ_PER_GAUSS};

/// Optical transition splittings in a field, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionSplitting {
    /// Between the two spin-conserving lines, (g_h - g_e) mu_B B.
    pub conserving: f64,
    /// Between the two cross-spin lines, (g_h + g_e) mu_B B.
    pub nonconserving: f64,
}

pub fn transition_splitting(g_e: f64, g_h: f64, b_gauss: f64) -> TransitionSplitting {
    TransitionSplitting {
        conserving: (g_h - g_e) * MU_B_MHZ_PER_GAUSS * b_gauss,
        nonconserving: (g_h + g_e) * MU_B_MHZ_PER_GAUSS * b_gauss,
    }
}

/// Lorentzian of FWHM `gamma` with unit peak.
#[inline]
pub fn lorentz_peak(x: f64, gamma: f64) -> f64 {
    1.0 / (1.0 + 4.0 * x * x / (gamma * gamma))
}

/// Normalised PLE amplitude of a single centre,
/// Gamma^2 / (4 Delta^2 + Gamma^2 + eps_B^2).
#[inline]
pub fn single_centre_amplitude(gamma: f64, eps_b: f64, delta: f64) -> f64 {
    let g2 = gamma * gamma;
    g2 / (4.0 * delta * delta + g2 + eps_b * eps_b)
}

/// Two-transition rate model built from its Lorentzians:
/// L_B L_C / (L_B + L_C), normalised to its value at B = 0, Delta = 0.
pub fn rate_model_amplitude(gamma: f64, eps_b: f64, delta: f64) -> f64 {
    let lb = lorentz_peak(delta + 0.5 * eps_b, gamma);
    let lc = lorentz_peak(delta - 0.5 * eps_b, gamma);
    let sum = lb + lc;
    if sum == 0.0 {
        return 0.0;
    }
    // L_B L_C / (L_B + L_C) = 1/2 at B = 0, Delta = 0.
    2.0 * lb * lc / sum
}

/// Four-transition rate model with explicit peak amplitudes of the
/// spin-conserving (`a_conserving`, lines B and C) and cross-spin
/// (`a_cross`, lines A and D) transitions, normalised at B = 0, Delta = 0.
///
/// B and A start from the same ground sublevel and sit at -eps_c/2 and
/// +eps_nc/2; C and D sit at +eps_c/2 and -eps_nc/2.
pub fn four_transition_weighted(
    gamma: f64,
    split: TransitionSplitting,
    delta: f64,
    a_conserving: f64,
    a_cross: f64,
) -> f64 {
    let lb = a_conserving * lorentz_peak(delta + 0.5 * split.conserving, gamma);
    let lc = a_conserving * lorentz_peak(delta - 0.5 * split.conserving, gamma);
    let la = a_cross * lorentz_peak(delta - 0.5 * split.nonconserving, gamma);
    let ld = a_cross * lorentz_peak(delta + 0.5 * split.nonconserving, gamma);
    let sum = la + lb + lc + ld;
    if sum == 0.0 {
        return 0.0;
    }
    let num = lb * lc + la * lc + lb * ld + la * ld;
    // At the origin every line has its peak amplitude: (a_c + a_x)^2 / (2 (a_c + a_x)).
    let norm = 0.5 * (a_conserving + a_cross);
    num / sum / norm
}

/// Four-transition model with cross-spin branch ratio r = L_{A,D} / L_{B,C}.
pub fn four_transition_amplitude(gamma: f64, split: TransitionSplitting, delta: f64, r: f64) -> f64 {
    four_transition_weighted(gamma, split, delta, 1.0, r)
}

/// One orientational subset of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSubset {
    pub g_h: f64,
    pub weight: f64,
}

/// How the conserving and cross-spin transitions share oscillator strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BranchWeights {
    /// L_{A,D} = r L_{B,C}.
    Ratio(f64),
    /// Explicit peak amplitudes (conserving, cross).
    Amplitudes(f64, f64),
}

impl BranchWeights {
    fn amplitudes(self) -> (f64, f64) {
        match self {
            BranchWeights::Ratio(r) => (1.0, r),
            BranchWeights::Amplitudes(c, x) => (c, x),
        }
    }

    fn is_two_transition(self) -> bool {
        let (c, x) = self.amplitudes();
        x == 0.0 && c > 0.0
    }
}

/// Ensemble hyperpolarization model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperpolModel {
    /// Homogeneous linewidth Gamma, MHz.
    pub gamma: f64,
    pub g_e: f64,
    pub subsets: Vec<HoleSubset>,
    pub branches: BranchWeights,
    /// Inhomogeneous distribution of resonance shifts.
    pub inhom: Option<LineshapeSpec>,
}

impl HyperpolModel {
    /// Equal weight per orientation (multiplicity / 12), two-transition model.
    pub fn from_holes(gamma: f64, holes: &HoleGFactors) -> Result<Self> {
        let subsets = holes
            .weighted()
            .map(|(g_h, weight)| HoleSubset { g_h, weight })
            .collect();
        Self::new(gamma, G_ELECTRON, subsets)
    }

    pub fn new(gamma: f64, g_e: f64, subsets: Vec<HoleSubset>) -> Result<Self> {
        let m = Self {
            gamma,
            g_e,
            subsets,
            branches: BranchWeights::Ratio(0.0),
            inhom: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn single(gamma: f64, g_e: f64, g_h: f64) -> Result<Self> {
        Self::new(gamma, g_e, vec![HoleSubset { g_h, weight: 1.0 }])
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    pub fn with_g_e(mut self, g_e: f64) -> Self {
        self.g_e = g_e;
        self
    }

    pub fn with_branch_ratio(mut self, r: f64) -> Self {
        self.branches = BranchWeights::Ratio(r);
        self
    }

    pub fn with_branches(mut self, branches: BranchWeights) -> Self {
        self.branches = branches;
        self
    }

    pub fn with_inhom(mut self, inhom: Option<LineshapeSpec>) -> Self {
        self.inhom = inhom;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::validation(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !self.g_e.is_finite() {
            return Err(Error::validation("g_e must be finite"));
        }
        if self.subsets.is_empty() {
            return Err(Error::validation("model needs at least one hole subset"));
        }
        if self.subsets.iter().any(|s| !(s.weight >= 0.0) || !s.g_h.is_finite()) {
            return Err(Error::validation("subset weights must be non-negative"));
        }
        let total: f64 = self.subsets.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!("subset weights must sum to 1, got {total}")));
        }
        let (c, x) = self.branches.amplitudes();
        if !(c >= 0.0) || !(x >= 0.0) || c + x == 0.0 || !(c + x).is_finite() {
            return Err(Error::validation("branch amplitudes must be non-negative and not both zero"));
        }
        Ok(())
    }

    /// Normalised amplitude of one subset without inhomogeneous broadening.
    pub fn subset_amplitude(&self, subset: &HoleSubset, b_gauss: f64, delta: f64) -> f64 {
        let split = transition_splitting(self.g_e, subset.g_h, b_gauss);
        if self.branches.is_two_transition() {
            single_centre_amplitude(self.gamma, split.conserving, delta)
        } else {
            let (c, x) = self.branches.amplitudes();
            four_transition_weighted(self.gamma, split, delta, c, x)
        }
    }

    /// Weighted average over subsets (no inhomogeneous broadening).
    pub fn ensemble_amplitude(&self, b_gauss: f64, delta: f64) -> f64 {
        self.subsets
            .iter()
            .map(|s| s.weight * self.subset_amplitude(s, b_gauss, delta))
            .sum()
    }

    /// Ensemble amplitude convolved with the inhomogeneous profile.
    pub fn convolved_amplitude(&self, b_gauss: f64, delta: f64) -> Result<f64> {
        Ok(self.convolved_sweep(&[b_gauss], delta)?[0])
    }

    /// Convolved amplitude for many fields sharing one quadrature grid.
    pub fn convolved_sweep(&self, b_gauss: &[f64], delta: f64) -> Result<Vec<f64>> {
        let inhom = self
            .inhom
            .ok_or_else(|| Error::validation("convolution needs an inhomogeneous lineshape"))?;
        let grid = ConvolutionGrid::new(&inhom, self.gamma, delta)?;
        let norm = grid.integrate(|x| self.ensemble_amplitude(0.0, x))?;
        b_gauss
            .iter()
            .map(|&b| Ok(grid.integrate(|x| self.ensemble_amplitude(b, delta + x))? / norm))
            .collect()
    }

    /// Amplitude at (B, Delta), convolved when an inhomogeneous profile is set.
    pub fn amplitude(&self, b_gauss: f64, delta: f64) -> Result<f64> {
        match self.inhom {
            Some(_) => self.convolved_amplitude(b_gauss, delta),
            None => Ok(self.ensemble_amplitude(b_gauss, delta)),
        }
    }

    /// [`HyperpolModel::amplitude`] over a field grid at fixed detuning.
    pub fn sweep(&self, b_gauss: &[f64], delta: f64) -> Result<Vec<f64>> {
        match self.inhom {
            Some(_) => self.convolved_sweep(b_gauss, delta),
            None => Ok(b_gauss.iter().map(|&b| self.ensemble_amplitude(b, delta)).collect()),
        }
    }

    /// Weighted mean of |eps_conserving| over subsets, MHz.
    pub fn mean_conserving_splitting(&self, b_gauss: f64) -> f64 {
        self.subsets
            .iter()
            .map(|s| s.weight * transition_splitting(self.g_e, s.g_h, b_gauss).conserving.abs())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splitting_values() {
        let z = transition_splitting(2.005, 0.91, 0.0);
        assert_eq!((z.conserving, z.nonconserving), (0.0, 0.0));
        for b in [1.0, 36.0, 500.0] {
            assert_eq!(transition_splitting(1.7, 1.7, b).conserving, 0.0);
        }
        let s = transition_splitting(2.005, 0.91, 36.0);
        let expected = (0.91 - 2.005) * 1.399_624_49 * 36.0;
        assert!((s.conserving - expected).abs() < 1e-12);
        assert!((s.conserving + 55.17).abs() < 0.01);
        assert!(s.nonconserving.abs() >= s.conserving.abs());
    }

    #[test]
    fn closed_form_fixed_points() {
        assert_eq!(single_centre_amplitude(250.0, 0.0, 0.0), 1.0);
        assert_eq!(single_centre_amplitude(250.0, 250.0, 0.0), 0.5);
        assert_eq!(rate_model_amplitude(250.0, 0.0, 0.0), 1.0);
        assert!((rate_model_amplitude(250.0, 250.0, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rate_model_matches_closed_form_on_grid() {
        let gamma = 180.0;
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            for j in 0..50 {
                let eps = -2000.0 + 4000.0 * i as f64 / 49.0;
                let delta = -1500.0 + 3000.0 * j as f64 / 49.0;
                let a = single_centre_amplitude(gamma, eps, delta);
                let b = rate_model_amplitude(gamma, eps, delta);
                worst = worst.max(((a - b) / a).abs());
            }
        }
        assert!(worst < 1e-10, "max relative error {worst}");
    }

    #[test]
    fn four_transition_reduces_to_two_at_r_zero() {
        for &(b, d) in &[(0.0, 0.0), (40.0, 10.0), (300.0, -120.0), (-75.0, 55.0)] {
            let split = transition_splitting(2.005, 1.3, b);
            let four = four_transition_amplitude(250.0, split, d, 0.0);
            let two = rate_model_amplitude(250.0, split.conserving, d);
            assert!((four - two).abs() < 1e-15);
        }
    }

    #[test]
    fn weak_cross_spin_lines_perturb_the_sweep_slightly() {
        for i in 1..100 {
            let b = 10.0 * i as f64;
            let split = transition_splitting(2.005, 0.91, b);
            let with = four_transition_amplitude(250.0, split, 0.0, 0.1);
            let without = four_transition_amplitude(250.0, split, 0.0, 0.0);
            assert!(with < without && without - with < 0.1 * without, "B={b}: {with} vs {without}");
        }
    }

    #[test]
    fn ensemble_of_one_is_single_centre() {
        let m = HyperpolModel::single(250.0, 2.005, 0.91).unwrap();
        let eps = transition_splitting(2.005, 0.91, 120.0).conserving;
        assert_eq!(m.ensemble_amplitude(120.0, 30.0), single_centre_amplitude(250.0, eps, 30.0));

        let shared = HyperpolModel::from_holes(250.0, &HoleGFactors::uniform(1.3).unwrap()).unwrap();
        let eps = transition_splitting(G_ELECTRON, 1.3, 120.0).conserving;
        let a = shared.ensemble_amplitude(120.0, 30.0);
        assert!((a - single_centre_amplitude(250.0, eps, 30.0)).abs() < 1e-15);
    }

    #[test]
    fn ensemble_100_half_point() {
        let m = HyperpolModel::from_holes(250.0, &HoleGFactors::standard_100()).unwrap();
        let mut prev = 1.0;
        for i in 0..400 {
            let a = m.ensemble_amplitude(i as f64 * 2.0, 0.0);
            assert!(a <= prev);
            prev = a;
        }
        // Field where the weighted mean |eps_B| equals Gamma.
        let per_gauss = m.mean_conserving_splitting(1.0);
        let b_half = 250.0 / per_gauss;
        let a = m.ensemble_amplitude(b_half, 0.0);
        assert!(a > 0.4 && a < 0.6, "{a}");
    }

    #[test]
    fn validation() {
        assert!(HyperpolModel::single(0.0, 2.0, 1.0).is_err());
        assert!(HyperpolModel::new(1.0, 2.0, vec![]).is_err());
        assert!(HyperpolModel::new(
            1.0,
            2.0,
            vec![HoleSubset { g_h: 1.0, weight: 0.4 }, HoleSubset { g_h: 2.0, weight: 0.4 }]
        )
        .is_err());
        let m = HyperpolModel::single(1.0, 2.0, 1.0).unwrap().with_branch_ratio(-0.5);
        assert!(m.validate().is_err());
    }

    proptest! {
        #[test]
        fn models_are_normalised_even_and_bounded(
            gamma in 1.0f64..5000.0,
            g_h in 0.2f64..4.0,
            r in 0.0f64..2.0,
            b in 0.0f64..3000.0,
            d in 0.0f64..5000.0,
        ) {
            let m = HyperpolModel::single(gamma, 2.005, g_h).unwrap().with_branch_ratio(r);
            prop_assert!((m.ensemble_amplitude(0.0, 0.0) - 1.0).abs() < 1e-15);
            let a = m.ensemble_amplitude(b, d);
            prop_assert!(a > 0.0 && a <= 1.0 + 1e-15);
            for (bb, dd) in [(-b, d), (b, -d), (-b, -d)] {
                prop_assert!((m.ensemble_amplitude(bb, dd) - a).abs() <= 1e-14 * a.max(1e-300));
            }
        }

        #[test]
        fn monotone_in_field_at_zero_detuning(
            gamma in 1.0f64..5000.0,
            g_h in 0.2f64..4.0,
            r in 0.0f64..2.0,
            b in 0.0f64..3000.0,
            db in 0.0f64..500.0,
        ) {
            let m = HyperpolModel::single(gamma, 2.005, g_h).unwrap().with_branch_ratio(r);
            prop_assert!(m.ensemble_amplitude(b + db, 0.0) <= m.ensemble_amplitude(b, 0.0) + 1e-15);
        }
    }
}
