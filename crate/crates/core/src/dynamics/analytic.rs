use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::kernel::time_steps;
use crate::units::HBAR_EV_FS;

use super::result::{ConvergenceReport, DynamicsResult, SolverId};

/// One Lorentzian reservoir mode seen by the emitter.
///
/// `strength` is the golden-rule rate the mode would give on resonance
/// (Γ₀λ, eV) and `detuning` is Δ = ω₀′ − ω_c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianModeParams {
    pub center: f64,
    pub width: f64,
    pub strength: f64,
    pub detuning: f64,
}

impl LorentzianModeParams {
    /// Mode centred at `center` seen by an emitter at (shifted) energy `omega0`.
    pub fn new(center: f64, width: f64, strength: f64, omega0: f64) -> Result<Self> {
        Self {
            center,
            width,
            strength,
            detuning: omega0 - center,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(invalid("beta", format!("mode width must be > 0, got {}", self.width)));
        }
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(invalid("strength", format!("must be >= 0, got {}", self.strength)));
        }
        if !(self.center.is_finite() && self.detuning.is_finite()) {
            return Err(invalid("center", "must be finite"));
        }
        Ok(self)
    }

    /// β̃ = β − iΔ, eV.
    pub fn beta_tilde(&self) -> Complex64 {
        Complex64::new(self.width, -self.detuning)
    }

    /// q = √(β̃² − 2Γ₀λβ), eV, on the principal branch (Re q ≥ 0).
    pub fn q(&self) -> Complex64 {
        let bt = self.beta_tilde();
        (bt * bt - 2.0 * self.strength * self.width).sqrt()
    }

    /// Coupling constant g with g² = Γ₀λβ/2, eV.
    pub fn coupling(&self) -> f64 {
        (0.5 * self.strength * self.width).sqrt()
    }

    /// Vacuum-Rabi angular frequency |Im q|/ħ, rad/fs.
    pub fn rabi_frequency(&self) -> f64 {
        self.q().im.abs() / HBAR_EV_FS
    }

    /// Kernel of the Lorentzian extended over the whole real axis,
    /// `K(τ) = i(Γ₀λβ/2) e^{(iΔ−β)τ}`, sampled at `τ = i·dt` (fs⁻²).
    pub fn kernel_samples(&self, dt: f64, steps: usize) -> Vec<Complex64> {
        let amp = Complex64::new(0.0, 0.5 * self.strength * self.width / (HBAR_EV_FS * HBAR_EV_FS));
        let rate = Complex64::new(-self.width, self.detuning) / HBAR_EV_FS;
        (0..=steps).map(|i| amp * (rate * (i as f64 * dt)).exp()).collect()
    }
}

/// sinh(x)/x, by series near zero.
fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-3 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Closed-form amplitude for a single extended Lorentzian,
/// `c₁(t) = e^{−β̃t/2}[cosh(qt/2) + (β̃/q) sinh(qt/2)]`.
pub fn analytic_lorentzian(t_fs: f64, params: &LorentzianModeParams) -> Complex64 {
    let t = t_fs / HBAR_EV_FS;
    let bt = params.beta_tilde();
    let q = params.q();
    let x = q * (0.5 * t);
    if x.norm() <= 1.0 {
        // (β̃/q) sinh(qt/2) = β̃ (t/2) sinhc(qt/2) stays finite as q → 0.
        (-bt * (0.5 * t)).exp() * (x.cosh() + bt * (0.5 * t) * sinhc(x))
    } else {
        // Separate growing and decaying exponentials so cosh cannot overflow.
        let r = bt / q;
        let plus = ((q - bt) * (0.5 * t)).exp();
        let minus = ((-q - bt) * (0.5 * t)).exp();
        0.5 * (plus * (1.0 + r) + minus * (1.0 - r))
    }
}

/// Sample [`analytic_lorentzian`] on `[0, tmax]`.
pub fn solve_analytic(params: &LorentzianModeParams, tmax: f64, dt: f64) -> Result<DynamicsResult> {
    let params = params.validated()?;
    let n = time_steps(tmax, dt)?;
    let c1 = (0..=n).map(|i| analytic_lorentzian(i as f64 * dt, &params)).collect();
    Ok(DynamicsResult::new(
        dt,
        c1,
        SolverId::Analytic,
        0.0,
        ConvergenceReport::exact(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn starts_at_one() {
        let p = LorentzianModeParams::new(1.95, 1e-3, 50e-3, 1.95).unwrap();
        assert_eq!(analytic_lorentzian(0.0, &p), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn no_coupling_stays_excited() {
        let p = LorentzianModeParams::new(2.0, 1e-3, 0.0, 1.95).unwrap();
        for &t in &[1.0, 100.0, 5000.0] {
            let c = analytic_lorentzian(t, &p);
            assert!((c - 1.0).norm() < 1e-12, "{c}");
        }
    }

    #[test]
    fn critical_damping_branch_is_continuous() {
        // 2Γ₀λβ = β² makes q = 0 on resonance.
        let beta = 1e-3;
        let p = LorentzianModeParams::new(1.95, beta, beta / 2.0, 1.95).unwrap();
        assert!(p.q().norm() < 1e-12);
        let t = 700.0;
        let exact = (-beta * t / (2.0 * HBAR_EV_FS)).exp() * (1.0 + beta * t / (2.0 * HBAR_EV_FS));
        assert_relative_eq!(analytic_lorentzian(t, &p).re, exact, max_relative = 1e-12);
        let near = LorentzianModeParams {
            strength: beta / 2.0 * (1.0 + 1e-9),
            ..p
        };
        assert_relative_eq!(analytic_lorentzian(t, &near).re, exact, max_relative = 1e-7);
    }

    #[test]
    fn strong_coupling_scalar_oracle() {
        // Δ = 0: β̃ = β, q = i√(2Γ₀λβ − β²) = iΩ, and
        // c = e^{−βt/2}[cos(Ωt/2) + (β/Ω) sin(Ωt/2)].
        let (beta, s) = (1e-3, 50e-3);
        let p = LorentzianModeParams::new(1.95, beta, s, 1.95).unwrap();
        let omega = (2.0 * s * beta - beta * beta).sqrt();
        let t = 500.0 / HBAR_EV_FS;
        let expect = (-beta * t / 2.0).exp() * ((omega * t / 2.0).cos() + beta / omega * (omega * t / 2.0).sin());
        let c = analytic_lorentzian(500.0, &p);
        assert_relative_eq!(c.re, expect, max_relative = 1e-12);
        assert!(c.im.abs() < 1e-14);
        assert_relative_eq!(p.rabi_frequency(), omega / HBAR_EV_FS, max_relative = 1e-14);
    }

    #[test]
    fn large_argument_does_not_overflow() {
        let p = LorentzianModeParams::new(1.95, 0.4, 1e-3, 1.95).unwrap();
        let c = analytic_lorentzian(1e6, &p);
        assert!(c.re.is_finite() && c.im.is_finite());
    }
}
