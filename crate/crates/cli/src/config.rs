use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tcentre_core::spinham::{Doublet, HoleModel, StrainConfig};
use tcentre_core::units::{DEBYE_WALLER, G_ELECTRON, LIFETIME_LINEWIDTH_MHZ, MU_B_MHZ_PER_GAUSS};
use tcentre_core::{Error, Result};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "TCENTRE_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    pub g_e: f64,
    pub mu_b_mhz_per_gauss: f64,
    pub xi: f64,
    pub gamma1_mhz: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            g_e: G_ELECTRON,
            mu_b_mhz_per_gauss: MU_B_MHZ_PER_GAUSS,
            xi: DEBYE_WALLER,
            gamma1_mhz: LIFETIME_LINEWIDTH_MHZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iter: usize,
    pub gamma_bounds_mhz: (f64, f64),
    /// Orientation-map cells with a larger reduced chi^2 are masked.
    pub mask_chi2_reduced: f64,
    /// Field used to evaluate hole g-factors, gauss.
    pub gfactor_field_gauss: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gamma_bounds_mhz: (1e-3, 1e6),
            mask_chi2_reduced: 10.0,
            gfactor_field_gauss: 100.0,
        }
    }
}

/// Everything a run needs besides the command line. An empty JSON object is
/// a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub constants: Constants,
    pub strain: StrainConfig,
    pub g1: f64,
    pub g2: f64,
    pub doublet: Doublet,
    pub fit: FitConfig,
    /// Relative output paths are resolved against this directory.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hm = HoleModel::default();
        Self {
            constants: Constants::default(),
            strain: hm.strain,
            g1: hm.g1,
            g2: hm.g2,
            doublet: hm.doublet,
            fit: FitConfig::default(),
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let c = &self.constants;
        for (name, v) in [
            ("g_e", c.g_e),
            ("mu_b_mhz_per_gauss", c.mu_b_mhz_per_gauss),
            ("xi", c.xi),
            ("gamma1_mhz", c.gamma1_mhz),
            ("gfactor_field_gauss", self.fit.gfactor_field_gauss),
            ("mask_chi2_reduced", self.fit.mask_chi2_reduced),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        let (lo, hi) = self.fit.gamma_bounds_mhz;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::Validation("gamma_bounds_mhz must satisfy 0 < lower < upper".into()));
        }
        if self.fit.max_iter == 0 {
            return Err(Error::Validation("max_iter must be positive".into()));
        }
        self.hole_model().validate()
    }

    pub fn hole_model(&self) -> HoleModel {
        HoleModel {
            strain: self.strain,
            g1: self.g1,
            g2: self.g2,
            doublet: self.doublet,
            mu_b_mhz_per_gauss: self.constants.mu_b_mhz_per_gauss,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// An explicit path, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn output_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.output_dir.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let cfg = RunConfig {
            g1: 1.0 / 3.0,
            strain: StrainConfig { tilt_deg: 3.999999999999, ..StrainConfig::default() },
            ..RunConfig::default()
        };
        cfg.save(&path).unwrap();
        let once = RunConfig::load(&path).unwrap();
        once.save(&path).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), once);
        assert_eq!(once, cfg);
    }

    #[test]
    fn rejects_non_positive_constants() {
        assert!(RunConfig::from_json(r#"{"constants": {"xi": 0}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"fit": {"gamma_bounds_mhz": [5, 1]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"strain": {"tilt_deg": 95}}"#).is_err());
    }
}
