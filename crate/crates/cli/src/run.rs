//! Orchestration behind the CLI verbs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use qedyn::dynamics::{
    classify_regime, markov_rate, solve_analytic, solve_pseudomode_with, solve_volterra_with, DynamicsResult,
    LorentzianModeParams, PseudomodeSet, VolterraOptions,
};
use qedyn::fitting::fit_lorentzians;
use qedyn::kernel::{build_kernel_table, nondyn_shift, EmitterConfig};
use qedyn::spectral::{
    sigma_inter_re, sigma_res, write_spectrum_csv, GreensCoefficients, LorentzianPeak, PurcellSpectrum,
};
use qedyn::Error;

use crate::config::{RunConfig, SolverChoice};

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub point_id: String,
    pub param: String,
    pub value: Option<f64>,
    pub delta_ndyn: Option<f64>,
    pub markov_rate: Option<f64>,
    pub regime: String,
    pub t99: Option<f64>,
    pub solver: String,
    pub converged: Option<bool>,
}

pub const SUMMARY_HEADER: &str = "point_id,param,value,delta_ndyn_eV,markov_rate_eV,regime,t99_fs,solver,converged";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_e(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SummaryRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.point_id,
            self.param,
            opt(self.value),
            opt_e(self.delta_ndyn),
            opt_e(self.markov_rate),
            self.regime,
            opt(self.t99),
            self.solver,
            opt(self.converged)
        )
    }
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> anyhow::Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

/// Keep free-form messages inside one CSV field.
fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| if c == ',' || c == '\n' || c == '\r' { ';' } else { c })
        .collect()
}

/// Stable identifier of a run point: a hash of the configuration (output
/// location excluded) and the swept value.
pub fn point_id(cfg: &RunConfig, param: &str, value: Option<f64>) -> String {
    let mut canonical = cfg.clone();
    canonical.output_dir = PathBuf::new();
    let mut h = Sha256::new();
    h.update(toml::to_string(&canonical).unwrap_or_default().as_bytes());
    h.update(param.as_bytes());
    h.update(value.map(f64::to_bits).unwrap_or(u64::MAX).to_le_bytes());
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Shared, read-only inputs of a run.
pub struct Inputs {
    pub coefficients: Option<Arc<GreensCoefficients>>,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> anyhow::Result<Self> {
        Ok(Self {
            coefficients: cfg.load_coefficients()?,
        })
    }
}

/// Lorentzians driving the pseudomode and analytic solvers: the configured
/// peaks when their count fits, otherwise a fit of the spectrum.
fn mode_peaks(cfg: &RunConfig, spec: &PurcellSpectrum, count: Option<usize>) -> anyhow::Result<Vec<LorentzianPeak>> {
    if let Some(peaks) = cfg.peaks() {
        if count.is_none_or(|n| n == peaks.len()) {
            return Ok(peaks);
        }
    }
    let n = count.unwrap_or(cfg.fit_peaks.unwrap_or(1));
    let window = cfg.fit_window.map(|w| (w[0], w[1])).unwrap_or(spec.support());
    Ok(fit_lorentzians(spec, n, window, cfg.fit_pinned_center)?.peaks)
}

fn solve_one(
    which: SolverChoice,
    cfg: &RunConfig,
    emitter: &EmitterConfig,
    spec: &PurcellSpectrum,
    delta: f64,
) -> anyhow::Result<DynamicsResult> {
    let tolerance = cfg.convergence_tolerance.unwrap_or(1e-3);
    Ok(match which {
        SolverChoice::Volterra => {
            let opts = VolterraOptions {
                tolerance,
                ..VolterraOptions::default()
            };
            solve_volterra_with(emitter, spec, cfg.tmax_fs, cfg.dt_fs, &opts)?
        }
        SolverChoice::Pseudomode => {
            let peaks = mode_peaks(cfg, spec, None)?;
            let baseline = if cfg.pseudomode_background {
                spec.baseline()
            } else {
                0.0
            };
            let set = PseudomodeSet::from_peaks(emitter, &peaks, baseline, delta)?;
            solve_pseudomode_with(&set, cfg.tmax_fs, cfg.dt_fs, 1e-6)?
        }
        SolverChoice::Analytic => {
            let p = mode_peaks(cfg, spec, Some(1))?[0];
            let strength =
                emitter.gamma0 * p.lambda * emitter.cubic_factor(p.omega) * emitter.counter_rotating_factor(p.omega);
            let mode = LorentzianModeParams::new(p.omega, p.beta, strength, emitter.omega0 - delta)?;
            let mut r = solve_analytic(&mode, cfg.tmax_fs, cfg.dt_fs)?;
            r.delta_ndyn = delta;
            r
        }
        SolverChoice::All => unreachable!("expanded by the caller"),
    })
}

fn label(which: SolverChoice) -> &'static str {
    match which {
        SolverChoice::Volterra => "volterra",
        SolverChoice::Pseudomode => "pseudomode",
        SolverChoice::Analytic => "analytic",
        SolverChoice::All => "all",
    }
}

/// Run every requested solver at one configuration point, writing one
/// trajectory file per solver. Errors become summary rows.
pub fn run_point(cfg: &RunConfig, inputs: &Inputs, param: &str, value: Option<f64>) -> Vec<SummaryRow> {
    let id = point_id(cfg, param, value);
    let row = |solver: &str| SummaryRow {
        point_id: id.clone(),
        param: param.to_owned(),
        value,
        delta_ndyn: None,
        markov_rate: None,
        regime: String::new(),
        t99: None,
        solver: solver.to_owned(),
        converged: None,
    };
    let setup = (|| -> anyhow::Result<_> {
        let emitter = cfg.emitter()?;
        let spec = cfg.spectrum(inputs.coefficients.as_ref())?;
        let delta = nondyn_shift(&emitter, &spec)?;
        Ok((emitter, spec, delta))
    })();
    let (emitter, spec, delta) = match setup {
        Ok(v) => v,
        Err(e) => {
            return vec![SummaryRow {
                regime: format!("error:{}", sanitize(&format!("{e:#}"))),
                ..row(label(cfg.solver))
            }]
        }
    };
    let rate = markov_rate(&emitter, &spec);

    cfg.solver
        .solvers()
        .iter()
        .map(|&which| {
            let mut r = SummaryRow {
                delta_ndyn: Some(delta),
                markov_rate: Some(rate),
                ..row(label(which))
            };
            let outcome = solve_one(which, cfg, &emitter, &spec, delta).and_then(|result| {
                let regime = match classify_regime(&result, &emitter) {
                    Ok(rep) => rep.regime.label().to_owned(),
                    Err(Error::Unconverged(_)) => "unconverged".to_owned(),
                    Err(e) => format!("error:{}", sanitize(&e.to_string())),
                };
                let path = cfg.output_dir.join(format!("traj_{id}_{}.csv", label(which)));
                let mut out = create(&path)?;
                result.write_csv(&mut out, Some(&regime))?;
                out.flush()?;
                Ok((result, regime))
            });
            match outcome {
                Ok((result, regime)) => {
                    r.regime = regime;
                    r.t99 = result.t99();
                    r.converged = Some(result.convergence.converged);
                }
                Err(e) => r.regime = format!("error:{}", sanitize(&format!("{e:#}"))),
            }
            r
        })
        .collect()
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("cannot start worker pool")
}

fn prepare_output(cfg: &RunConfig) -> anyhow::Result<()> {
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("cannot create {}", cfg.output_dir.display()))
}

/// Single point, ignoring any sweep axis.
pub fn simulate(cfg: &RunConfig, jobs: usize) -> anyhow::Result<Vec<SummaryRow>> {
    prepare_output(cfg)?;
    let inputs = Inputs::load(cfg)?;
    let rows = pool(jobs)?.install(|| run_point(cfg, &inputs, "", None));
    write_summary(&cfg.output_dir.join("summary.csv"), &rows)?;
    Ok(rows)
}

/// All sweep points, in parallel; the summary keeps the declared order.
pub fn sweep(cfg: &RunConfig, jobs: usize) -> anyhow::Result<Vec<SummaryRow>> {
    let (Some(param), Some(values)) = (&cfg.sweep_param, &cfg.sweep_values) else {
        bail!("sweep needs sweep_param and sweep_values");
    };
    prepare_output(cfg)?;
    let inputs = Inputs::load(cfg)?;
    let rows: Vec<Vec<SummaryRow>> = pool(jobs)?.install(|| {
        values
            .par_iter()
            .map(|&v| match cfg.with_param(param, v) {
                Ok(point) => run_point(&point, &inputs, param, Some(v)),
                Err(e) => vec![SummaryRow {
                    point_id: point_id(cfg, param, Some(v)),
                    param: param.clone(),
                    value: Some(v),
                    delta_ndyn: None,
                    markov_rate: None,
                    regime: format!("error:{}", sanitize(&e.to_string())),
                    t99: None,
                    solver: label(cfg.solver).to_owned(),
                    converged: None,
                }],
            })
            .collect()
    });
    let rows: Vec<SummaryRow> = rows.into_iter().flatten().collect();
    write_summary(&cfg.output_dir.join("summary.csv"), &rows)?;
    Ok(rows)
}

/// λ(ω) on the configured grid, plus the conductivity table when a material
/// is configured.
pub fn spectrum(cfg: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    prepare_output(cfg)?;
    let inputs = Inputs::load(cfg)?;
    let spec = cfg.spectrum(inputs.coefficients.as_ref())?;
    let grid = cfg.grid_points()?;
    let lambda: Vec<f64> = grid.iter().map(|&w| spec.eval(w)).collect();
    let mut written = Vec::new();

    let path = cfg.output_dir.join("spectrum.csv");
    let mut out = create(&path)?;
    write_spectrum_csv(&mut out, &grid, &lambda)?;
    out.flush()?;
    written.push(path);

    if let Some(mat) = cfg.material()? {
        let path = cfg.output_dir.join("conductivity.csv");
        let mut out = create(&path)?;
        writeln!(out, "omega_eV,re_sigma_res,im_sigma_res,re_sigma_inter")?;
        for &w in &grid {
            let s = sigma_res(w, &mat)?;
            writeln!(out, "{w},{:e},{:e},{:e}", s.re, s.im, sigma_inter_re(w, &mat)?)?;
        }
        out.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn kernel(cfg: &RunConfig, jobs: usize) -> anyhow::Result<PathBuf> {
    prepare_output(cfg)?;
    let inputs = Inputs::load(cfg)?;
    let emitter = cfg.emitter()?;
    let spec = cfg.spectrum(inputs.coefficients.as_ref())?;
    let table = pool(jobs)?.install(|| build_kernel_table(&emitter, &spec, cfg.tmax_fs, cfg.dt_fs))?;
    let path = cfg.output_dir.join("kernel.csv");
    let mut out = create(&path)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(path)
}

pub fn fit(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    prepare_output(cfg)?;
    let inputs = Inputs::load(cfg)?;
    let spec = cfg.spectrum(inputs.coefficients.as_ref())?;
    let window = cfg.fit_window.map(|w| (w[0], w[1])).unwrap_or(spec.support());
    let report = fit_lorentzians(&spec, cfg.fit_peaks.unwrap_or(1), window, cfg.fit_pinned_center)?;
    let path = cfg.output_dir.join("fit.csv");
    let mut out = create(&path)?;
    report.write_csv(&mut out)?;
    out.flush()?;
    Ok(path)
}
