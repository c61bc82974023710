use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::spectral::PurcellSpectrum;

use super::emitter::{Coupling, EmitterConfig};

/// `J(ω) = Γ₀ λ(ω)/2π`, times `(2ω₀/(ω₀+ω))²` beyond the RWA. eV.
pub fn spectral_density(omega: f64, emitter: &EmitterConfig, spec: &PurcellSpectrum) -> f64 {
    emitter.counter_rotating_factor(omega) * emitter.gamma0 * spec.eval(omega) / (2.0 * std::f64::consts::PI)
}

/// `J̃(ω) = J(ω)(ω/ω₀)³`. eV.
pub fn spectral_density_tilde(omega: f64, emitter: &EmitterConfig, spec: &PurcellSpectrum) -> f64 {
    spectral_density(omega, emitter, spec) * emitter.cubic_factor(omega)
}

/// Divergence guard for the shift integral.
///
/// The integrand grows linearly at large ω, so a support that cuts it off
/// while it still dominates gives a meaningless shift. The guard compares
/// `f(ω_max)·(ω_max − ω_min)` with the accumulated integral. An integrand
/// growing linearly from zero gives exactly 2 and a flat window around ω₀
/// gives 1–2; a spectrum whose weight piles up at the upper edge gives ≫ 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftGuard {
    /// `None` disables the check.
    pub tolerance: Option<f64>,
}

impl Default for ShiftGuard {
    fn default() -> Self {
        Self { tolerance: Some(2.5) }
    }
}

impl ShiftGuard {
    pub fn disabled() -> Self {
        Self { tolerance: None }
    }
}

/// `2ω³/(ω₀²(ω₀+ω)²)`.
#[inline]
pub(crate) fn shift_weight(omega: f64, omega0: f64) -> f64 {
    let s = omega0 + omega;
    2.0 * omega * omega * omega / (omega0 * omega0 * s * s)
}

/// Non-dynamical level shift Δω_ndyn (eV) with the default guard.
pub fn nondyn_shift(emitter: &EmitterConfig, spec: &PurcellSpectrum) -> Result<f64> {
    nondyn_shift_with(emitter, spec, ShiftGuard::default())
}

/// Non-dynamical level shift, `p ∫ 2ω³/(ω₀²(ω₀+ω)²) Γ₀ λ(ω) dω` over the
/// spectrum support. Exactly zero under the RWA.
pub fn nondyn_shift_with(emitter: &EmitterConfig, spec: &PurcellSpectrum, guard: ShiftGuard) -> Result<f64> {
    if emitter.coupling == Coupling::Rwa {
        return Ok(0.0);
    }
    let (lo, hi) = spec.support();
    let w0 = emitter.omega0;
    let f = |w: f64| shift_weight(w, w0) * spec.eval(w);
    let (integral, _) = integrate_adaptive(f, lo, hi, &spec.breakpoints(), 0.0, 1e-12, 20_000);
    if integral == 0.0 {
        return Ok(0.0);
    }
    if let Some(tol) = guard.tolerance {
        let ratio = f(hi) * (hi - lo) / integral;
        if ratio > tol {
            return Err(Error::SupportTooNarrow { ratio, tolerance: tol });
        }
    }
    Ok(emitter.shift_prefactor.value() * emitter.gamma0 * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ShiftPrefactor;
    use approx::assert_relative_eq;

    fn flat(eps: f64, lo: f64, hi: f64) -> PurcellSpectrum {
        PurcellSpectrum::lorentzian_sum(vec![], (lo, hi), eps).unwrap()
    }

    #[test]
    fn density_variants_agree_at_resonance() {
        let spec = flat(1.0, 1.0, 3.0);
        let rwa = EmitterConfig::new(1.95, 59e-6, 5.0, Coupling::Rwa).unwrap();
        let non = EmitterConfig {
            coupling: Coupling::BeyondRwa,
            ..rwa
        };
        let j0 = spectral_density(1.95, &rwa, &spec);
        assert_relative_eq!(j0, 59e-6 / (2.0 * std::f64::consts::PI), max_relative = 1e-15);
        assert_relative_eq!(spectral_density(1.95, &non, &spec), j0, max_relative = 1e-15);
        let spec_wide = flat(1.0, 1.0, 7.0);
        assert_relative_eq!(
            spectral_density(3.0 * 1.95, &non, &spec_wide),
            0.25 * spectral_density(3.0 * 1.95, &rwa, &spec_wide),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            spectral_density_tilde(3.9, &rwa, &spec_wide),
            8.0 * 59e-6 / (2.0 * std::f64::consts::PI),
            max_relative = 1e-14
        );
    }

    #[test]
    fn shift_zero_under_rwa_and_for_empty_spectrum() {
        let spec = flat(1.0, 1.5, 2.5);
        let e = EmitterConfig::new(1.95, 1e-3, 5.0, Coupling::Rwa).unwrap();
        assert_eq!(nondyn_shift(&e, &spec).unwrap(), 0.0);
        let zero = PurcellSpectrum::tabulated(vec![1.5, 2.5], vec![0.0, 0.0], 1.0).unwrap();
        let e = EmitterConfig {
            coupling: Coupling::BeyondRwa,
            ..e
        };
        assert_eq!(nondyn_shift(&e, &zero).unwrap(), 0.0);
        let no_width = EmitterConfig { gamma0: 0.0, ..e };
        assert_eq!(nondyn_shift(&no_width, &spec).unwrap(), 0.0);
    }

    #[test]
    fn prefactor_settings_differ_by_four_pi_squared() {
        let spec = flat(1.0, 1.5, 2.5);
        let e = EmitterConfig::new(1.95, 1e-3, 5.0, Coupling::BeyondRwa).unwrap();
        let a = nondyn_shift(&e, &spec).unwrap();
        let b = nondyn_shift(&e.with_shift_prefactor(ShiftPrefactor::LiteralTwoPi), &spec).unwrap();
        assert!(a > 0.0);
        assert_relative_eq!(b / a, 4.0 * std::f64::consts::PI.powi(2), max_relative = 1e-14);
    }

    #[test]
    fn guard_rejects_edge_dominated_support() {
        // All the weight sits against the upper cutoff.
        let spec = PurcellSpectrum::tabulated(vec![1.0, 2.9, 3.0], vec![0.0, 0.0, 100.0], 1.0).unwrap();
        let e = EmitterConfig::new(1.95, 1e-3, 5.0, Coupling::BeyondRwa).unwrap();
        assert!(matches!(nondyn_shift(&e, &spec), Err(Error::SupportTooNarrow { .. })));
        assert!(nondyn_shift_with(&e, &spec, ShiftGuard::disabled()).is_ok());
    }
}
