//! Physical constants in the eV / nm / fs unit system used throughout the crate.
//!
//! Energies and frequencies are expressed as ħω in eV, lengths in nm and
//! times in fs. Converting an energy to an angular frequency is a division by
//! [`HBAR_EV_FS`].

/// Reduced Planck constant, eV·fs.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Speed of light in vacuum, nm/fs.
pub const C_NM_FS: f64 = 299.792_458;

/// Fine-structure constant.
pub const ALPHA0: f64 = 1.0 / 137.035_999_084;

/// Angular frequency (rad/fs) of an energy given in eV.
#[inline]
pub fn ev_to_rad_per_fs(energy_ev: f64) -> f64 {
    energy_ev / HBAR_EV_FS
}

/// Reduced vacuum wavelength c/ω in nm for a photon energy in eV.
#[inline]
pub fn reduced_wavelength_nm(energy_ev: f64) -> f64 {
    HBAR_EV_FS * C_NM_FS / energy_ev
}
