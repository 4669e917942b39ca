use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::FieldSpec;
use super::hamiltonian::{strain_hamiltonian_with, zeeman_hamiltonian_with};
use super::operators::{hermitian_eigenvalues, SpinOperators};
use super::orientation::{OrientationSet, StrainConfig, N_ORIENTATIONS};
use crate::error::{Error, Result};
use crate::units::{ev_to_mhz, MU_B_MHZ_PER_GAUSS};

/// Relative tolerance for merging equal g-factors into one entry.
pub const GROUPING_TOL: f64 = 1e-6;

/// Which Kramers doublet of the strain Hamiltonian hosts the TX0 hole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Doublet {
    #[default]
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoleModel {
    pub strain: StrainConfig,
    pub g1: f64,
    pub g2: f64,
    pub doublet: Doublet,
    pub mu_b_mhz_per_gauss: f64,
}

impl Default for HoleModel {
    fn default() -> Self {
        Self {
            strain: StrainConfig::default(),
            g1: 1.505,
            g2: -0.138,
            doublet: Doublet::Lower,
            mu_b_mhz_per_gauss: MU_B_MHZ_PER_GAUSS,
        }
    }
}

impl HoleModel {
    pub fn validate(&self) -> Result<()> {
        self.strain.validate()?;
        if !(self.mu_b_mhz_per_gauss > 0.0) || !self.mu_b_mhz_per_gauss.is_finite() {
            return Err(Error::validation("mu_B/h must be positive"));
        }
        if !self.g1.is_finite() || !self.g2.is_finite() {
            return Err(Error::validation("g1 and g2 must be finite"));
        }
        Ok(())
    }

    /// Energies (MHz, ascending) of H_s + H_b for one orientation.
    pub fn levels(&self, ops: &SpinOperators, strain_crystal: &nalgebra::Matrix3<f64>, field: &FieldSpec) -> [f64; 4] {
        let hs = strain_hamiltonian_with(ops, strain_crystal, self.strain.b_deform, self.strain.d_deform)
            * num_complex::Complex64::new(ev_to_mhz(1.0), 0.0);
        let hb = zeeman_hamiltonian_with(ops, field, self.g1, self.g2, self.mu_b_mhz_per_gauss);
        hermitian_eigenvalues(&(hs + hb))
    }

    fn g_from_levels(&self, levels: &[f64; 4], field: &FieldSpec) -> f64 {
        let split = match self.doublet {
            Doublet::Lower => levels[1] - levels[0],
            Doublet::Upper => levels[3] - levels[2],
        };
        split / (self.mu_b_mhz_per_gauss * field.magnitude())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GEntry {
    pub g_h: f64,
    pub multiplicity: usize,
    pub sigma: f64,
}

/// Hole g-factors of the orientational subsets, grouped by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleGFactors {
    entries: Vec<GEntry>,
}

impl HoleGFactors {
    pub fn new(entries: Vec<GEntry>) -> Result<Self> {
        let total: usize = entries.iter().map(|e| e.multiplicity).sum();
        if total != N_ORIENTATIONS {
            return Err(Error::validation(format!(
                "hole g-factor multiplicities must sum to {N_ORIENTATIONS}, got {total}"
            )));
        }
        for e in &entries {
            if !(e.g_h > 0.0) || !e.g_h.is_finite() || e.multiplicity == 0 || !(e.sigma >= 0.0) {
                return Err(Error::validation(format!("invalid g-factor entry {e:?}")));
            }
        }
        Ok(Self { entries })
    }

    /// Groups per-orientation values into entries sorted by descending g.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut entries: Vec<GEntry> = Vec::new();
        for g in sorted {
            match entries.last_mut() {
                Some(last) if (last.g_h - g).abs() <= GROUPING_TOL * last.g_h.abs().max(g.abs()) => {
                    last.multiplicity += 1;
                }
                _ => entries.push(GEntry { g_h: g, multiplicity: 1, sigma: 0.0 }),
            }
        }
        Self::new(entries)
    }

    /// A single g value shared by every subset.
    pub fn uniform(g_h: f64) -> Result<Self> {
        Self::new(vec![GEntry { g_h, multiplicity: N_ORIENTATIONS, sigma: 0.0 }])
    }

    /// Rounded two-valued set {2.55 x 8, 0.91 x 4} for a field along <100>.
    pub fn standard_100() -> Self {
        Self {
            entries: vec![
                GEntry { g_h: 2.55, multiplicity: 8, sigma: 0.0 },
                GEntry { g_h: 0.91, multiplicity: 4, sigma: 0.0 },
            ],
        }
    }

    pub fn entries(&self) -> &[GEntry] {
        &self.entries
    }

    /// (g_h, weight) pairs with weight = multiplicity / 12.
    pub fn weighted(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries
            .iter()
            .map(|e| (e.g_h, e.multiplicity as f64 / N_ORIENTATIONS as f64))
    }

    /// All twelve values, each entry repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.g_h, e.multiplicity))
            .collect()
    }
}

/// g_h for every orientation, in orientation-label order.
pub fn hole_g_per_orientation(
    model: &HoleModel,
    orientations: &OrientationSet,
    field: &FieldSpec,
) -> Result<Vec<f64>> {
    model.validate()?;
    if field.magnitude() == 0.0 {
        return Err(Error::validation("g-factor undefined at zero field"));
    }
    let ops = SpinOperators::new();
    Ok(orientations
        .iter()
        .map(|o| model.g_from_levels(&model.levels(&ops, &o.strain_crystal, field), field))
        .collect())
}

pub fn compute_hole_g(
    model: &HoleModel,
    orientations: &OrientationSet,
    field: &FieldSpec,
) -> Result<HoleGFactors> {
    HoleGFactors::from_values(&hole_g_per_orientation(model, orientations, field)?)
}

/// Monte-Carlo spread of g_h under field misalignment.
///
/// The nominal direction is expressed as polar angles (from [001], azimuth
/// from [100]); each sample draws the inclination and azimuth uniformly
/// within +/- the given errors. Sample `i` uses its own ChaCha stream, so the
/// result only depends on `(seed, n_samples)`. Returns one entry per
/// orientation (multiplicity 1), holding the sample mean and standard
/// deviation, sorted by descending mean.
pub fn propagate_alignment_uncertainty(
    model: &HoleModel,
    orientations: &OrientationSet,
    nominal: &FieldSpec,
    incl_err_deg: f64,
    azim_err_deg: f64,
    n_samples: usize,
    seed: u64,
) -> Result<HoleGFactors> {
    Ok(alignment_spread(model, orientations, nominal, incl_err_deg, azim_err_deg, n_samples, seed)?
        .into_hole_g_factors())
}

/// Per-orientation statistics behind [`propagate_alignment_uncertainty`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentSpread {
    pub mean: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl AlignmentSpread {
    pub fn into_hole_g_factors(self) -> HoleGFactors {
        let mut entries: Vec<GEntry> = self
            .mean
            .iter()
            .zip(&self.sigma)
            .map(|(&g_h, &sigma)| GEntry { g_h, multiplicity: 1, sigma })
            .collect();
        entries.sort_by(|a, b| b.g_h.total_cmp(&a.g_h));
        HoleGFactors { entries }
    }
}

pub fn alignment_spread(
    model: &HoleModel,
    orientations: &OrientationSet,
    nominal: &FieldSpec,
    incl_err_deg: f64,
    azim_err_deg: f64,
    n_samples: usize,
    seed: u64,
) -> Result<AlignmentSpread> {
    if n_samples < 100 {
        return Err(Error::validation(format!("need at least 100 samples, got {n_samples}")));
    }
    if !(incl_err_deg >= 0.0) || !(azim_err_deg >= 0.0) {
        return Err(Error::validation("alignment errors must be non-negative"));
    }
    if nominal.magnitude() == 0.0 {
        return Err(Error::validation("g-factor undefined at zero field"));
    }
    let (theta0, phi0) = nominal.polar_angles();
    let d_theta = incl_err_deg.to_radians();
    let d_phi = azim_err_deg.to_radians();

    let samples: Vec<Vec<f64>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let theta = theta0 + d_theta * rng.random_range(-1.0..=1.0);
            let phi = phi0 + d_phi * rng.random_range(-1.0..=1.0);
            let field = FieldSpec::from_polar(nominal.magnitude(), theta, phi)?;
            hole_g_per_orientation(model, orientations, &field)
        })
        .collect::<Result<_>>()?;

    let n = orientations.len();
    let count = samples.len() as f64;
    let mut mean = vec![0.0; n];
    for s in &samples {
        for (m, g) in mean.iter_mut().zip(s) {
            *m += g;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; n];
    for s in &samples {
        for k in 0..n {
            var[k] += (s[k] - mean[k]).powi(2);
        }
    }
    let sigma = var.iter().map(|v| (v / (count - 1.0)).sqrt()).collect();
    Ok(AlignmentSpread { mean, sigma })
}

/// Unit vector of a crystal axis given by Miller indices.
pub fn axis(h: f64, k: f64, l: f64) -> Vector3<f64> {
    Vector3::new(h, k, l).normalize()
}
