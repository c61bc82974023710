//! Run configuration: a flat TOML file, one documented key per setting.
//!
//! ```toml
//! omega0_eV = 1.95
//! gamma0_eV = 59e-6
//! z_nm = 5.0
//! coupling = "beyond-rwa"          # or "rwa"
//! lorentzians = [[30.0, 1.95, 0.5e-3]]   # λ_j, ω_j (eV), β_j (eV)
//! support_eV = [1.5, 2.5]
//! solver = "all"
//! tmax_fs = 3000.0
//! dt_fs = 0.5
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use qedyn::kernel::{Coupling, EmitterConfig, ShiftPrefactor};
use qedyn::spectral::{GreensCoefficients, LorentzianPeak, MaterialParams, PurcellSpectrum, Quality};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] qedyn::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Volterra,
    Pseudomode,
    Analytic,
    All,
}

impl SolverChoice {
    pub fn solvers(self) -> &'static [SolverChoice] {
        match self {
            SolverChoice::All => &[SolverChoice::Volterra, SolverChoice::Pseudomode, SolverChoice::Analytic],
            SolverChoice::Volterra => &[SolverChoice::Volterra],
            SolverChoice::Pseudomode => &[SolverChoice::Pseudomode],
            SolverChoice::Analytic => &[SolverChoice::Analytic],
        }
    }
}

/// Sweepable keys.
pub const SWEEP_PARAMS: &[&str] = &[
    "omega0_eV",
    "gamma0_eV",
    "z_nm",
    "radius_nm",
    "host_eps",
    "lorentzian_scale",
    "tmax_fs",
    "dt_fs",
];

fn default_eps() -> f64 {
    1.0
}

fn default_coupling() -> String {
    "rwa".into()
}

fn default_prefactor() -> String {
    "one-over-2pi".into()
}

fn default_solver() -> SolverChoice {
    SolverChoice::Volterra
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "omega0_eV")]
    pub omega0: f64,
    #[serde(rename = "gamma0_eV")]
    pub gamma0: f64,
    pub z_nm: f64,
    #[serde(default = "default_coupling")]
    pub coupling: String,
    #[serde(default = "default_prefactor")]
    pub shift_prefactor: String,
    #[serde(default = "default_eps")]
    pub host_eps: f64,

    /// Conductivity preset, "high" or "low"; needs `sigma0`.
    pub quality: Option<String>,
    pub sigma0: Option<f64>,

    // Spectrum sources; exactly one must be set.
    pub spectrum_csv: Option<PathBuf>,
    /// Rows of `[λ_j, ω_j (eV), β_j (eV)]`.
    pub lorentzians: Option<Vec<[f64; 3]>>,
    #[serde(rename = "support_eV")]
    pub support: Option<[f64; 2]>,
    pub greens_coefficients: Option<PathBuf>,
    pub radius_nm: Option<f64>,
    /// Multiplies every Lorentzian height.
    #[serde(default)]
    pub lorentzian_scale: Option<f64>,

    #[serde(default = "default_solver")]
    pub solver: SolverChoice,
    pub tmax_fs: f64,
    pub dt_fs: f64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Max population difference tolerated by the step-refinement checks.
    pub convergence_tolerance: Option<f64>,
    /// Give pseudomode runs the Markovian decay of the √ε baseline.
    #[serde(default = "default_true")]
    pub pseudomode_background: bool,

    pub sweep_param: Option<String>,
    pub sweep_values: Option<Vec<f64>>,

    /// `[lo, hi, n]` for the `spectrum` verb.
    #[serde(rename = "grid_eV")]
    pub grid: Option<[f64; 3]>,

    pub fit_peaks: Option<usize>,
    #[serde(rename = "fit_window_eV")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(rename = "fit_pinned_center_eV")]
    pub fit_pinned_center: Option<f64>,
}

impl RunConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Toml { source, .. } => ConfigError::Toml {
                path: path.to_owned(),
                source,
            },
            other => other,
        })?;
        // Relative paths are relative to the configuration file.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.spectrum_csv, &mut cfg.greens_coefficients]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: PathBuf::from("<config>"),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let sources = [
            self.spectrum_csv.is_some(),
            self.lorentzians.is_some(),
            self.greens_coefficients.is_some(),
        ];
        match sources.iter().filter(|s| **s).count() {
            0 => {
                return Err(invalid(
                    "no spectrum source (spectrum_csv, lorentzians or greens_coefficients)",
                ))
            }
            1 => {}
            _ => {
                return Err(invalid(
                    "spectrum sources are exclusive: set only one of spectrum_csv, lorentzians, greens_coefficients",
                ))
            }
        }
        if self.lorentzians.is_some() && self.support.is_none() {
            return Err(invalid("lorentzians need support_eV"));
        }
        if self.greens_coefficients.is_some() && self.radius_nm.is_none() {
            return Err(invalid("greens_coefficients need radius_nm"));
        }
        if self.quality.is_some() != self.sigma0.is_some() {
            return Err(invalid(
                "quality and sigma0 must be given together (sigma0 has no default)",
            ));
        }
        match (&self.sweep_param, &self.sweep_values) {
            (None, None) => {}
            (Some(p), Some(v)) => {
                if !SWEEP_PARAMS.contains(&p.as_str()) {
                    return Err(invalid(format!(
                        "cannot sweep `{p}` (sweepable: {})",
                        SWEEP_PARAMS.join(", ")
                    )));
                }
                if v.is_empty() {
                    return Err(invalid("sweep_values is empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("sweep_values must be finite"));
                }
            }
            _ => return Err(invalid("sweep_param and sweep_values must be given together")),
        }
        for (name, v) in [("tmax_fs", self.tmax_fs), ("dt_fs", self.dt_fs)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0")));
            }
        }
        self.emitter()?;
        self.coupling()?;
        Ok(())
    }

    pub fn coupling(&self) -> Result<Coupling, ConfigError> {
        Ok(self.coupling.parse()?)
    }

    pub fn emitter(&self) -> Result<EmitterConfig, ConfigError> {
        let prefactor: ShiftPrefactor = self.shift_prefactor.parse()?;
        Ok(
            EmitterConfig::new(self.omega0, self.gamma0, self.z_nm, self.coupling.parse()?)?
                .with_shift_prefactor(prefactor),
        )
    }

    pub fn material(&self) -> Result<Option<MaterialParams>, ConfigError> {
        match (&self.quality, self.sigma0) {
            (Some(q), Some(s)) => Ok(Some(MaterialParams::preset(q.parse::<Quality>()?, s)?)),
            _ => Ok(None),
        }
    }

    pub fn peaks(&self) -> Option<Vec<LorentzianPeak>> {
        let scale = self.lorentzian_scale.unwrap_or(1.0);
        self.lorentzians.as_ref().map(|rows| {
            rows.iter()
                .map(|r| LorentzianPeak::new(scale * r[0], r[1], r[2]))
                .collect()
        })
    }

    pub fn spectrum(&self, coefficients: Option<&Arc<GreensCoefficients>>) -> Result<PurcellSpectrum, ConfigError> {
        if let Some(path) = &self.spectrum_csv {
            return Ok(PurcellSpectrum::from_csv(path, self.host_eps)?);
        }
        if let Some(peaks) = self.peaks() {
            let s = self.support.expect("validated");
            return Ok(PurcellSpectrum::lorentzian_sum(peaks, (s[0], s[1]), self.host_eps)?);
        }
        let coefficients = coefficients.ok_or_else(|| invalid("Green's-series source without coefficient data"))?;
        let radius = self.radius_nm.expect("validated");
        Ok(PurcellSpectrum::greens_series(
            self.z_nm,
            radius,
            Arc::clone(coefficients),
            self.host_eps,
        )?)
    }

    pub fn load_coefficients(&self) -> Result<Option<Arc<GreensCoefficients>>, ConfigError> {
        match &self.greens_coefficients {
            Some(path) => Ok(Some(Arc::new(GreensCoefficients::from_csv(path)?))),
            None => Ok(None),
        }
    }

    /// Copy of this configuration with one sweep parameter overridden.
    pub fn with_param(&self, param: &str, value: f64) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        match param {
            "omega0_eV" => c.omega0 = value,
            "gamma0_eV" => c.gamma0 = value,
            "z_nm" => c.z_nm = value,
            "radius_nm" => c.radius_nm = Some(value),
            "host_eps" => c.host_eps = value,
            "lorentzian_scale" => c.lorentzian_scale = Some(value),
            "tmax_fs" => c.tmax_fs = value,
            "dt_fs" => c.dt_fs = value,
            other => return Err(invalid(format!("cannot sweep `{other}`"))),
        }
        c.sweep_param = None;
        c.sweep_values = None;
        Ok(c)
    }

    /// Frequency grid for the `spectrum` verb.
    pub fn grid_points(&self) -> Result<Vec<f64>, ConfigError> {
        let [lo, hi, n] = self.grid.ok_or_else(|| invalid("grid_eV = [lo, hi, n] is required"))?;
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(invalid("grid is empty: grid_eV needs n >= 1 points"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(invalid("grid_eV needs 0 < lo <= hi"));
        }
        let n = n as usize;
        if n == 1 {
            return Ok(vec![lo]);
        }
        let mut g: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        g[n - 1] = hi;
        Ok(g)
    }
}
