use std::io::Write;

use num_complex::Complex64;

/// Which propagator produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverId {
    Volterra,
    Pseudomode,
    Analytic,
}

impl SolverId {
    pub fn label(self) -> &'static str {
        match self {
            SolverId::Volterra => "volterra",
            SolverId::Pseudomode => "pseudomode",
            SolverId::Analytic => "analytic",
        }
    }
}

impl std::fmt::Display for SolverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Step-refinement diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Step of the comparison run; `None` for closed-form results.
    pub reference_dt: Option<f64>,
    /// Largest population difference against the comparison run.
    pub max_population_change: f64,
    pub tolerance: f64,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn exact() -> Self {
        Self {
            reference_dt: None,
            max_population_change: 0.0,
            tolerance: 0.0,
            converged: true,
        }
    }

    pub fn from_change(reference_dt: f64, change: f64, tolerance: f64) -> Self {
        Self {
            reference_dt: Some(reference_dt),
            max_population_change: change,
            tolerance,
            converged: change <= tolerance,
        }
    }
}

/// Excited-state amplitude on a uniform time grid, in the frame rotating at ω₀′.
#[derive(Debug, Clone)]
pub struct DynamicsResult {
    pub t: Vec<f64>,
    pub c1: Vec<Complex64>,
    pub population: Vec<f64>,
    pub solver: SolverId,
    pub dt: f64,
    pub delta_ndyn: f64,
    pub convergence: ConvergenceReport,
}

impl DynamicsResult {
    pub fn new(dt: f64, c1: Vec<Complex64>, solver: SolverId, delta_ndyn: f64, convergence: ConvergenceReport) -> Self {
        let t = (0..c1.len()).map(|i| i as f64 * dt).collect();
        let population = c1.iter().map(|c| c.norm_sqr()).collect();
        Self {
            t,
            c1,
            population,
            solver,
            dt,
            delta_ndyn,
            convergence,
        }
    }

    /// Time after which the population stays below 1 %; `None` if it is
    /// still (or again) above 1 % at the end of the run.
    pub fn t99(&self) -> Option<f64> {
        let last_above = self.population.iter().rposition(|&p| p >= 0.01);
        match last_above {
            None => Some(0.0),
            Some(i) if i + 1 < self.population.len() => Some(self.t[i + 1]),
            Some(_) => None,
        }
    }

    pub fn max_population(&self) -> f64 {
        self.population.iter().copied().fold(0.0, f64::max)
    }

    /// Trajectory CSV with a comment header describing the run.
    pub fn write_csv<W: Write>(&self, mut out: W, regime: Option<&str>) -> std::io::Result<()> {
        writeln!(
            out,
            "# solver={} dt_fs={} delta_ndyn_eV={:e} regime={} converged={}",
            self.solver,
            self.dt,
            self.delta_ndyn,
            regime.unwrap_or("unclassified"),
            self.convergence.converged
        )?;
        writeln!(out, "t_fs,re_c1,im_c1,population")?;
        for ((t, c), p) in self.t.iter().zip(&self.c1).zip(&self.population) {
            writeln!(out, "{t},{:e},{:e},{p:e}", c.re, c.im)?;
        }
        Ok(())
    }
}
