//! Spontaneous emission of a two-level quantum emitter coupled to a
//! structured photonic reservoir, beyond the Markov approximation.
//!
//! The pipeline runs from a Purcell-factor spectrum λ(ω) ([`spectral`])
//! through the spectral density and memory kernel ([`kernel`]) to the
//! excited-state amplitude c₁(t) ([`dynamics`]). [`fitting`] decomposes
//! spectra into Lorentzians for the pseudomode solver.
//!
//! Units: energies in eV, lengths in nm, times in fs (see [`units`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod kernel;
pub mod quadrature;
pub mod spectral;
pub mod units;

pub use dynamics::{
    analytic_lorentzian, classify_regime, markov_rate, solve_analytic, solve_pseudomode, solve_volterra,
    DynamicsResult, LorentzianModeParams, PseudomodeSet, Regime, SolverId,
};
pub use error::{Error, Result};
pub use fitting::{fit_lorentzians, fit_quality, FitReport};
pub use kernel::{
    build_kernel_table, memory_kernel, nondyn_shift, spectral_density, spectral_density_tilde, Coupling, EmitterConfig,
    KernelTable, ShiftPrefactor,
};
pub use spectral::{GreensCoefficients, LorentzianPeak, MaterialParams, PurcellSpectrum, Quality};
