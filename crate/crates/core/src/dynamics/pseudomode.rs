//! Pseudomode propagation: each Lorentzian of the spectral density becomes a
//! damped auxiliary mode b_j coupled to the emitter,
//!
//! ```text
//! ċ₁  = −Γ_bg/2 c₁ − i Σ_j g_j b_j
//! ḃ_j = (iΔ_j − β_j) b_j − i g_j c₁,      g_j² = S_j β_j / 2
//! ```
//!
//! The system is linear with constant coefficients, so one step is the
//! matrix exponential of the generator: exact for any dt and unconditionally
//! stable however stiff the mode widths are.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::kernel::{time_steps, EmitterConfig};
use crate::spectral::LorentzianPeak;
use crate::units::HBAR_EV_FS;

use super::analytic::LorentzianModeParams;
use super::result::{ConvergenceReport, DynamicsResult, SolverId};

/// Mode set for the pseudomode solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudomodeSet {
    pub modes: Vec<LorentzianModeParams>,
    /// Markovian decay rate (eV) of a flat background, e.g. Γ₀√ε. Zero for
    /// none.
    pub background_rate: f64,
    pub delta_ndyn: f64,
}

impl PseudomodeSet {
    pub fn new(modes: Vec<LorentzianModeParams>) -> Self {
        Self {
            modes,
            background_rate: 0.0,
            delta_ndyn: 0.0,
        }
    }

    /// Modes from fitted peaks of the induced Purcell factor. The cubic and
    /// counter-rotating factors are evaluated at each peak center; the flat
    /// `baseline` (usually √ε, or 0 to drop it) becomes a Markovian
    /// background at rate Γ₀·baseline.
    pub fn from_peaks(
        emitter: &EmitterConfig,
        peaks: &[LorentzianPeak],
        baseline: f64,
        delta_ndyn: f64,
    ) -> Result<Self> {
        let omega0p = emitter.omega0 - delta_ndyn;
        let modes = peaks
            .iter()
            .map(|p| {
                let strength = emitter.gamma0
                    * p.lambda
                    * emitter.cubic_factor(p.omega)
                    * emitter.counter_rotating_factor(p.omega);
                LorentzianModeParams::new(p.omega, p.beta, strength, omega0p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            modes,
            background_rate: emitter.gamma0 * baseline,
            delta_ndyn,
        })
    }

    fn generator(&self) -> DMatrix<Complex64> {
        let m = self.modes.len() + 1;
        let mut a = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
        a[(0, 0)] = Complex64::new(-0.5 * self.background_rate, 0.0);
        for (j, mode) in self.modes.iter().enumerate() {
            let g = Complex64::new(0.0, -mode.coupling());
            a[(0, j + 1)] = g;
            a[(j + 1, 0)] = g;
            a[(j + 1, j + 1)] = Complex64::new(-mode.width, mode.detuning);
        }
        a / Complex64::new(HBAR_EV_FS, 0.0)
    }
}

/// Populations from repeated application of `exp(A·h)` every `stride` output steps.
fn propagate(gen: &DMatrix<Complex64>, h: f64, steps: usize) -> Vec<Complex64> {
    let m = gen.nrows();
    let p = (gen * Complex64::new(h, 0.0)).exp();
    let mut v = DVector::from_element(m, Complex64::new(0.0, 0.0));
    v[0] = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(v[0]);
    for _ in 0..steps {
        v = &p * &v;
        out.push(v[0]);
    }
    out
}

pub fn solve_pseudomode(modes: &PseudomodeSet, tmax: f64, dt: f64) -> Result<DynamicsResult> {
    solve_pseudomode_with(modes, tmax, dt, 1e-6)
}

/// Propagate the mode set. The step-halving check compares against two
/// half-steps per output step; `tolerance` bounds the population difference.
pub fn solve_pseudomode_with(modes: &PseudomodeSet, tmax: f64, dt: f64, tolerance: f64) -> Result<DynamicsResult> {
    for m in &modes.modes {
        m.validated()?;
    }
    let n = time_steps(tmax, dt)?;
    let gen = modes.generator();
    let c1 = propagate(&gen, dt, n);
    let fine = propagate(&gen, 0.5 * dt, 2 * n);
    let change = c1
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
        .fold(0.0, f64::max);
    let convergence = ConvergenceReport::from_change(0.5 * dt, change, tolerance);
    if !convergence.converged {
        log::warn!("pseudomode step halving changed the population by {change:.3e}");
    }
    Ok(DynamicsResult::new(
        dt,
        c1,
        SolverId::Pseudomode,
        modes.delta_ndyn,
        convergence,
    ))
}
