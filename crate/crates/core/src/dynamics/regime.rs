use crate::error::{Error, Result};
use crate::kernel::EmitterConfig;
use crate::spectral::PurcellSpectrum;
use crate::units::HBAR_EV_FS;

use super::result::DynamicsResult;

/// Golden-rule rate Γ₀λ(ω₀) = 2πJ(ω₀), eV.
pub fn markov_rate(emitter: &EmitterConfig, spec: &PurcellSpectrum) -> f64 {
    emitter.gamma0 * spec.eval(emitter.omega0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Markovian,
    Strong,
    UltrastrongTrapping,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Markovian => "markovian",
            Regime::Strong => "strong",
            Regime::UltrastrongTrapping => "ultrastrong+trapping",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Minimum rise above the preceding trough for a revival.
    pub prominence: f64,
    /// Smaller prominence used to time the first oscillation.
    pub period_prominence: f64,
    /// Early period must not exceed this multiple of 2π/ω₀.
    pub period_factor: f64,
    /// Trailing fraction of the run treated as the late window.
    pub late_fraction: f64,
    pub plateau_min_mean: f64,
    pub plateau_max_std: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            prominence: 0.01,
            period_prominence: 1e-4,
            period_factor: 1.25,
            late_fraction: 0.2,
            plateau_min_mean: 0.05,
            plateau_max_std: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Revival peak times (fs) above 1 % population.
    pub revival_times: Vec<f64>,
    /// Angular frequency of the revivals, rad/fs.
    pub revival_frequency: Option<f64>,
    /// Time of the first oscillation maximum after t = 0, fs.
    pub early_period: Option<f64>,
    pub plateau_mean: f64,
    pub plateau_std: f64,
}

impl RegimeReport {
    pub fn revivals(&self) -> usize {
        self.revival_times.len()
    }
}

/// Indices of maxima rising more than `prominence` above the lowest point
/// since the previous accepted maximum (or since t = 0).
fn prominent_maxima(p: &[f64], prominence: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut trough = f64::INFINITY;
    for i in 1..p.len().saturating_sub(1) {
        trough = trough.min(p[i]);
        if p[i] >= p[i - 1] && p[i] > p[i + 1] && p[i] - trough > prominence {
            out.push(i);
            trough = p[i];
        }
    }
    out
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn classify_regime(result: &DynamicsResult, emitter: &EmitterConfig) -> Result<RegimeReport> {
    classify_regime_with(result, emitter, &RegimeThresholds::default())
}

/// Ultrastrong coupling with trapping is tested first (fast oscillation and
/// a flat, populated late window), then strong coupling (at least one
/// revival); everything else is Markovian.
pub fn classify_regime_with(
    result: &DynamicsResult,
    emitter: &EmitterConfig,
    th: &RegimeThresholds,
) -> Result<RegimeReport> {
    if !result.convergence.converged {
        return Err(Error::Unconverged(format!(
            "{} trajectory (population change {:.3e} under step refinement)",
            result.solver, result.convergence.max_population_change
        )));
    }
    let p = &result.population;
    if p.len() < 3 {
        return Err(Error::Unconverged("trajectory too short to classify".into()));
    }

    let revival_times: Vec<f64> = prominent_maxima(p, th.prominence)
        .into_iter()
        .filter(|&i| p[i] > 0.01)
        .map(|i| result.t[i])
        .collect();
    let revival_frequency = match revival_times.len() {
        0 => None,
        1 => Some(2.0 * std::f64::consts::PI / revival_times[0]),
        k => Some(2.0 * std::f64::consts::PI * (k - 1) as f64 / (revival_times[k - 1] - revival_times[0])),
    };
    let early_period = prominent_maxima(p, th.period_prominence).first().map(|&i| result.t[i]);

    let late_start = ((1.0 - th.late_fraction) * p.len() as f64).floor() as usize;
    let (plateau_mean, plateau_std) = mean_std(&p[late_start.min(p.len() - 1)..]);

    let bare_period = 2.0 * std::f64::consts::PI * HBAR_EV_FS / emitter.omega0;
    let fast = early_period.is_some_and(|t| t <= th.period_factor * bare_period);
    let trapped = plateau_mean > th.plateau_min_mean && plateau_std < th.plateau_max_std;
    let regime = if fast && trapped {
        Regime::UltrastrongTrapping
    } else if !revival_times.is_empty() {
        Regime::Strong
    } else {
        Regime::Markovian
    };
    Ok(RegimeReport {
        regime,
        revival_times,
        revival_frequency,
        early_period,
        plateau_mean,
        plateau_std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::result::{ConvergenceReport, SolverId};
    use crate::kernel::Coupling;
    use num_complex::Complex64;

    fn from_population(dt: f64, pop: impl Fn(f64) -> f64, n: usize) -> DynamicsResult {
        let c = (0..=n)
            .map(|i| Complex64::new(pop(i as f64 * dt).sqrt(), 0.0))
            .collect();
        DynamicsResult::new(dt, c, SolverId::Analytic, 0.0, ConvergenceReport::exact())
    }

    fn emitter() -> EmitterConfig {
        EmitterConfig::new(1.95, 1e-3, 5.0, Coupling::Rwa).unwrap()
    }

    #[test]
    fn exponential_decay_is_markovian() {
        let r = from_population(1.0, |t| (-t / 100.0).exp(), 2000);
        let rep = classify_regime(&r, &emitter()).unwrap();
        assert_eq!(rep.regime, Regime::Markovian);
        assert_eq!(rep.revivals(), 0);
    }

    #[test]
    fn damped_rabi_is_strong() {
        let w = 0.05;
        let r = from_population(0.5, |t| (-t / 400.0).exp() * (w * t / 2.0).cos().powi(2), 8000);
        let rep = classify_regime(&r, &emitter()).unwrap();
        assert_eq!(rep.regime, Regime::Strong);
        assert!(rep.revivals() >= 3);
        let f = rep.revival_frequency.unwrap();
        assert!((f - w).abs() < 0.01 * w, "{f}");
    }

    #[test]
    fn fast_oscillation_onto_plateau_is_trapping() {
        let period = 2.0 * std::f64::consts::PI * HBAR_EV_FS / 1.95;
        let r = from_population(
            0.02,
            |t| 0.4 + 0.6 * (-t / 30.0).exp() * (std::f64::consts::PI * t / period).cos().powi(2),
            50_000,
        );
        let rep = classify_regime(&r, &emitter()).unwrap();
        assert_eq!(rep.regime, Regime::UltrastrongTrapping);
        assert!((rep.plateau_mean - 0.4).abs() < 1e-6);
    }

    #[test]
    fn unconverged_input_refused() {
        let mut r = from_population(1.0, |t| (-t / 100.0).exp(), 100);
        r.convergence = ConvergenceReport::from_change(2.0, 0.1, 1e-3);
        assert!(matches!(classify_regime(&r, &emitter()), Err(Error::Unconverged(_))));
    }
}
