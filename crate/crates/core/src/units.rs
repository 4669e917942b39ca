//! Physical constants and unit conversions.

/// Bohr magneton over Planck's constant, MHz per gauss.
pub const MU_B_MHZ_PER_GAUSS: f64 = 1.399_624_49;

/// 1 eV expressed as a frequency in MHz.
pub const MHZ_PER_EV: f64 = 2.417_989_24e8;

/// Isotropic ground-state electron g-factor of the T centre.
pub const G_ELECTRON: f64 = 2.005;

/// Debye-Waller factor (fraction of emission into the zero phonon line).
pub const DEBYE_WALLER: f64 = 0.23;

/// Lifetime-limited optical linewidth, MHz.
pub const LIFETIME_LINEWIDTH_MHZ: f64 = 0.169;

pub const MHZ_PER_GHZ: f64 = 1.0e3;

pub fn ev_to_mhz(ev: f64) -> f64 {
    ev * MHZ_PER_EV
}
