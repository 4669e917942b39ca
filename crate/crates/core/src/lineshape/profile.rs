use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineshapeKind {
    Lorentzian,
    Gaussian,
    /// Gauss-Lorentz product.
    Glp,
}

impl std::str::FromStr for LineshapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorentzian" | "lorentz" => Ok(Self::Lorentzian),
            "gaussian" | "gauss" => Ok(Self::Gaussian),
            "glp" => Ok(Self::Glp),
            other => Err(Error::validation(format!("unknown lineshape kind '{other}'"))),
        }
    }
}

/// A unit-area, zero-centred spectral profile with the given FWHM (MHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineshapeSpec {
    kind: LineshapeKind,
    fwhm: f64,
}

/// Component FWHM (relative to the product FWHM) and the area of the
/// unit-peak product, both for a GLP of unit FWHM.
struct GlpConstants {
    component_ratio: f64,
    unit_area: f64,
}

fn glp_half_point(component: f64) -> f64 {
    let u = 1.0 / (component * component);
    (-LN_2 * u).exp() / (1.0 + u)
}

fn glp_constants() -> &'static GlpConstants {
    static CONSTS: OnceLock<GlpConstants> = OnceLock::new();
    CONSTS.get_or_init(|| {
        // The product at x = 1/2 rises monotonically with the component width.
        let (mut lo, mut hi) = (1.0_f64, 4.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if glp_half_point(mid) < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let w = 0.5 * (lo + hi);
        // int exp(-4 ln2 x^2/w^2) / (1 + 4 x^2/w^2) dx = pi w erfc(sqrt(ln 2))
        GlpConstants {
            component_ratio: w,
            unit_area: PI * w * erfc(LN_2.sqrt()),
        }
    })
}

impl LineshapeSpec {
    pub fn new(kind: LineshapeKind, fwhm: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::validation(format!("lineshape FWHM must be positive, got {fwhm}")));
        }
        Ok(Self { kind, fwhm })
    }

    pub fn lorentzian(fwhm: f64) -> Result<Self> {
        Self::new(LineshapeKind::Lorentzian, fwhm)
    }

    pub fn gaussian(fwhm: f64) -> Result<Self> {
        Self::new(LineshapeKind::Gaussian, fwhm)
    }

    pub fn glp(fwhm: f64) -> Result<Self> {
        Self::new(LineshapeKind::Glp, fwhm)
    }

    pub fn kind(&self) -> LineshapeKind {
        self.kind
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn with_fwhm(&self, fwhm: f64) -> Result<Self> {
        Self::new(self.kind, fwhm)
    }

    /// FWHM shared by the Gaussian and Lorentzian factors of a GLP.
    pub fn glp_component_fwhm(&self) -> f64 {
        glp_constants().component_ratio * self.fwhm
    }

    /// Profile normalised to a peak value of 1.
    pub fn shape(&self, x: f64) -> f64 {
        let f = self.fwhm;
        match self.kind {
            LineshapeKind::Lorentzian => 1.0 / (1.0 + 4.0 * x * x / (f * f)),
            LineshapeKind::Gaussian => (-4.0 * LN_2 * x * x / (f * f)).exp(),
            LineshapeKind::Glp => {
                let w = self.glp_component_fwhm();
                let u = 4.0 * x * x / (w * w);
                (-LN_2 * u).exp() / (1.0 + u)
            }
        }
    }

    /// Peak of the unit-area profile, 1/MHz.
    pub fn peak_density(&self) -> f64 {
        let f = self.fwhm;
        match self.kind {
            LineshapeKind::Lorentzian => 2.0 / (PI * f),
            LineshapeKind::Gaussian => 2.0 * (LN_2 / PI).sqrt() / f,
            LineshapeKind::Glp => 1.0 / (glp_constants().unit_area * f),
        }
    }

    /// Unit-area density at `x`, 1/MHz.
    pub fn density(&self, x: f64) -> f64 {
        self.peak_density() * self.shape(x)
    }
}

/// Unit-area profile value at detuning `x` (MHz).
pub fn profile(spec: &LineshapeSpec, x: f64) -> f64 {
    spec.density(x)
}
