use crate::error::{invalid, Error, Result};

/// Whether counter-rotating coupling terms are retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Rwa,
    BeyondRwa,
}

impl std::str::FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rwa" => Ok(Coupling::Rwa),
            "beyond-rwa" => Ok(Coupling::BeyondRwa),
            other => Err(invalid(
                "coupling",
                format!("unknown value `{other}` (expected rwa|beyond-rwa)"),
            )),
        }
    }
}

/// Prefactor multiplying the counter-rotating shift integral.
///
/// The published expression writes it as `(1/2π)^{-1}`; both readings are
/// available. `OneOverTwoPi` reduces to the single-mode Bloch–Siegert shift
/// `g²/(2ω₀)` and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftPrefactor {
    LiteralTwoPi,
    #[default]
    OneOverTwoPi,
}

impl ShiftPrefactor {
    pub fn value(self) -> f64 {
        match self {
            ShiftPrefactor::LiteralTwoPi => 2.0 * std::f64::consts::PI,
            ShiftPrefactor::OneOverTwoPi => 0.5 / std::f64::consts::PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ShiftPrefactor::LiteralTwoPi => "literal-2pi",
            ShiftPrefactor::OneOverTwoPi => "one-over-2pi",
        }
    }
}

impl std::str::FromStr for ShiftPrefactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal-2pi" => Ok(ShiftPrefactor::LiteralTwoPi),
            "one-over-2pi" => Ok(ShiftPrefactor::OneOverTwoPi),
            other => Err(invalid(
                "shift_prefactor",
                format!("unknown value `{other}` (expected literal-2pi|one-over-2pi)"),
            )),
        }
    }
}

/// Two-level emitter: transition energy ω₀ and free-space width Γ₀ (eV),
/// distance z (nm) above the disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterConfig {
    pub omega0: f64,
    pub gamma0: f64,
    pub z_nm: f64,
    pub coupling: Coupling,
    pub shift_prefactor: ShiftPrefactor,
}

impl EmitterConfig {
    pub fn new(omega0: f64, gamma0: f64, z_nm: f64, coupling: Coupling) -> Result<Self> {
        Self {
            omega0,
            gamma0,
            z_nm,
            coupling,
            shift_prefactor: ShiftPrefactor::default(),
        }
        .validated()
    }

    pub fn with_shift_prefactor(mut self, prefactor: ShiftPrefactor) -> Self {
        self.shift_prefactor = prefactor;
        self
    }

    pub fn validated(self) -> Result<Self> {
        for (name, v) in [("omega0", self.omega0), ("gamma0", self.gamma0), ("z_nm", self.z_nm)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(self)
    }

    /// Counter-rotating enhancement `(2ω₀/(ω₀+ω))²`, or 1 under the RWA.
    #[inline]
    pub fn counter_rotating_factor(&self, omega: f64) -> f64 {
        match self.coupling {
            Coupling::Rwa => 1.0,
            Coupling::BeyondRwa => {
                let f = 2.0 * self.omega0 / (self.omega0 + omega);
                f * f
            }
        }
    }

    /// `(ω/ω₀)³`.
    #[inline]
    pub fn cubic_factor(&self, omega: f64) -> f64 {
        let r = omega / self.omega0;
        r * r * r
    }
}
