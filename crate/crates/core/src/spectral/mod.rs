//! Purcell-factor spectra: conductivity models, the Green's-tensor image
//! series and the tabulated / Lorentzian / series-backed representations.

mod greens;
mod material;
mod spectrum;

pub use greens::{green_xx, image_factor, GreenValue, GreensCoefficients};
pub use material::{sigma_inter_re, sigma_res, MaterialParams, Quality};
pub use spectrum::{purcell_factor, write_spectrum_csv, GreensSeries, LorentzianPeak, PurcellSpectrum, Representation};
