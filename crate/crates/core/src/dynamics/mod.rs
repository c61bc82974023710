//! Propagation of the excited-state amplitude c₁(t): direct Volterra
//! solver, pseudomode ODE solver and the closed-form Lorentzian solution.

mod analytic;
mod pseudomode;
mod regime;
mod result;
mod volterra;

pub use analytic::{analytic_lorentzian, solve_analytic, LorentzianModeParams};
pub use pseudomode::{solve_pseudomode, solve_pseudomode_with, PseudomodeSet};
pub use regime::{classify_regime, classify_regime_with, markov_rate, Regime, RegimeReport, RegimeThresholds};
pub use result::{ConvergenceReport, DynamicsResult, SolverId};
pub use volterra::{solve_volterra, solve_volterra_kernel, solve_volterra_with, VolterraOptions};
