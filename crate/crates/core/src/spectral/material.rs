//! Two-dimensional optical conductivity of a MoS₂ sheet: the resonant A/B
//! exciton term and the real part of the interband background.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::units::{ALPHA0, C_NM_FS};

/// Material quality presets, differing only in the exciton damping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    /// γ_A = 0.5 meV, γ_B = 1.1 meV.
    High,
    /// γ_A = 2.5 meV, γ_B = 5.6 meV.
    Low,
}

impl std::str::FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(Quality::High),
            "low" => Ok(Quality::Low),
            other => Err(invalid(
                "quality",
                format!("unknown preset `{other}` (expected high|low)"),
            )),
        }
    }
}

/// Excitonic and interband conductivity parameters.
///
/// Energies are in eV, `a_ex` in nm and `v` in nm/fs. `sigma0` scales the
/// interband term and has no default: it must be supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub a_ex: f64,
    pub v: f64,
    /// Dimensionless product ω_B·β of the interband mixing parameter.
    pub omega_b_beta: f64,
    /// Absorption scaling m.
    pub m_scale: f64,
    pub sigma0: f64,
}

impl MaterialParams {
    /// MoS₂ parameters for the given quality preset.
    pub fn preset(quality: Quality, sigma0: f64) -> Result<Self> {
        let (gamma_a, gamma_b) = match quality {
            Quality::High => (0.5e-3, 1.1e-3),
            Quality::Low => (2.5e-3, 5.6e-3),
        };
        Self {
            omega_a: 1.9,
            omega_b: 2.1,
            gamma_a,
            gamma_b,
            a_ex: 0.8,
            v: 0.55,
            omega_b_beta: 0.84,
            m_scale: 1.0,
            sigma0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let positive = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
            ("a_ex", self.a_ex),
            ("v", self.v),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        if self.omega_a >= self.omega_b {
            return Err(invalid("omega_a", "A exciton must lie below the B exciton"));
        }
        for (name, value) in [
            ("omega_b_beta", self.omega_b_beta),
            ("m_scale", self.m_scale),
            ("sigma0", self.sigma0),
        ] {
            if !value.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(self)
    }
}

/// Resonant exciton conductivity
/// `σ_res(ω) = 4α₀cv²/(π a_ex² ω) · Σ_{k=A,B} −i/(ω_k − ω − iγ_k)`.
///
/// Evaluated literally in eV/nm/fs units (no ħ conversion), so the result is
/// expressed in nm²·fs⁻²·eV⁻² scaled by the dimensionless sum.
pub fn sigma_res(omega: f64, mat: &MaterialParams) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    let prefactor = 4.0 * ALPHA0 * C_NM_FS * mat.v * mat.v / (std::f64::consts::PI * mat.a_ex * mat.a_ex * omega);
    let minus_i = Complex64::new(0.0, -1.0);
    let sum: Complex64 = [(mat.omega_a, mat.gamma_a), (mat.omega_b, mat.gamma_b)]
        .iter()
        .map(|&(wk, gk)| minus_i / Complex64::new(wk - omega, -gk))
        .sum();
    Ok(sum * prefactor)
}

/// Real part of the interband conductivity,
/// `σ₀ Ẽ [1 + (1+2ω_Bβ)/Ω² (1 + ω_Bβ − E)]` with `Ω = ω/ω_B`,
/// `E = √(1+2ω_Bβ+Ω²)` and `Ẽ = m Θ(ω−ω_B)/E`.
///
/// The step is taken right-continuous: Θ(0) = 1.
pub fn sigma_inter_re(omega: f64, mat: &MaterialParams) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if omega < mat.omega_b {
        return Ok(0.0);
    }
    let wb_beta = mat.omega_b_beta;
    let big_omega = omega / mat.omega_b;
    let e = (1.0 + 2.0 * wb_beta + big_omega * big_omega).sqrt();
    let e_tilde = mat.m_scale / e;
    let bracket = 1.0 + (1.0 + 2.0 * wb_beta) / (big_omega * big_omega) * (1.0 + wb_beta - e);
    Ok(mat.sigma0 * e_tilde * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_reproduce_damping() {
        let hi = MaterialParams::preset(Quality::High, 1.0).unwrap();
        assert_eq!((hi.gamma_a, hi.gamma_b), (0.5e-3, 1.1e-3));
        let lo = MaterialParams::preset(Quality::Low, 1.0).unwrap();
        assert_eq!((lo.gamma_a, lo.gamma_b), (2.5e-3, 5.6e-3));
        assert_eq!(hi.omega_b_beta, 0.84);
        assert_eq!(hi.m_scale, 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut m = MaterialParams::preset(Quality::High, 1.0).unwrap();
        m.omega_a = 2.2;
        assert!(m.clone().validated().is_err());
        m.omega_a = 1.9;
        m.gamma_b = 0.0;
        assert!(m.validated().is_err());
        assert!(MaterialParams::preset(Quality::High, f64::NAN).is_err());
    }

    #[test]
    fn resonant_a_term_at_exciton_energy() {
        let m = MaterialParams::preset(Quality::High, 1.0).unwrap();
        let full = sigma_res(m.omega_a, &m).unwrap();
        // At ω = ω_A the A term is purely real: prefactor / γ_A.
        let pref = 4.0 * ALPHA0 * C_NM_FS * m.v * m.v / (std::f64::consts::PI * m.a_ex * m.a_ex * m.omega_a);
        let a_term = pref / m.gamma_a;
        let b_term = pref * Complex64::new(0.0, -1.0) / Complex64::new(m.omega_b - m.omega_a, -m.gamma_b);
        assert_relative_eq!(full.re, a_term + b_term.re, max_relative = 1e-12);
        assert_relative_eq!(full.im, b_term.im, max_relative = 1e-12);
    }

    #[test]
    fn huge_damping_suppresses_conductivity() {
        let mut m = MaterialParams::preset(Quality::High, 1.0).unwrap();
        let pref = 4.0 * ALPHA0 * C_NM_FS * m.v * m.v / (std::f64::consts::PI * m.a_ex * m.a_ex * 2.0);
        m.gamma_a = 1e9;
        m.gamma_b = 1e9;
        // Each term tends to 1/γ.
        let v = sigma_res(2.0, &m).unwrap();
        assert_relative_eq!(v.re, 2.0 * pref / 1e9, max_relative = 1e-9);
        assert!(v.norm() < 1e-8 * pref);
    }

    #[test]
    fn interband_zero_below_threshold_and_domain_errors() {
        let m = MaterialParams::preset(Quality::Low, 3.0).unwrap();
        assert_eq!(sigma_inter_re(2.09, &m).unwrap(), 0.0);
        assert!(sigma_inter_re(2.1, &m).unwrap() != 0.0);
        assert!(matches!(sigma_res(0.0, &m), Err(Error::NonPositiveFrequency(_))));
        assert!(sigma_inter_re(-1.0, &m).is_err());
    }
}
