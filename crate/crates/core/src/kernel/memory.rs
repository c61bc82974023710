use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quadrature::filon_linear_weights_with;
use crate::spectral::PurcellSpectrum;
use crate::units::HBAR_EV_FS;

use super::density::{nondyn_shift_with, spectral_density_tilde, ShiftGuard};
use super::emitter::EmitterConfig;

/// Quadrature controls for the memory kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// A panel is bisected while linear interpolation misses J̃ at its
    /// midpoint by more than this fraction of max J̃.
    pub grid_tolerance: f64,
    /// Allowed change of any K(τ) under uniform panel halving, relative to |K(0)|.
    pub refine_tolerance: f64,
    /// Uniform panels laid over the support before adaptive refinement.
    pub min_panels: usize,
    pub shift_guard: ShiftGuard,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            grid_tolerance: 1e-5,
            refine_tolerance: 1e-4,
            min_panels: 64,
            shift_guard: ShiftGuard::default(),
        }
    }
}

const MAX_DEPTH: u32 = 40;
/// Uniform halvings tried before the kernel is declared unconverged.
const MAX_REFINEMENTS: u32 = 4;

/// Piecewise-linear representation of J̃ over the spectrum support.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl FrequencyGrid {
    /// Seed with the spectrum break points plus `min_panels` uniform panels,
    /// then bisect panels until the linear interpolant is accurate to
    /// `tolerance · max J̃`.
    pub fn adaptive(emitter: &EmitterConfig, spec: &PurcellSpectrum, tolerance: f64, min_panels: usize) -> Self {
        let (lo, hi) = spec.support();
        let f = |w: f64| spectral_density_tilde(w, emitter, spec);
        let n = min_panels.max(1);
        let mut seeds: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
        seeds[n] = hi;
        seeds.extend(spec.breakpoints());
        seeds.sort_by(f64::total_cmp);
        seeds.dedup();
        let seed_vals: Vec<f64> = seeds.iter().map(|&w| f(w)).collect();
        let scale = seed_vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let threshold = tolerance * scale;

        let mut nodes = vec![seeds[0]];
        let mut values = vec![seed_vals[0]];
        // Depth-first, left to right: the node sequence is deterministic.
        let mut stack: Vec<(f64, f64, f64, f64, u32)> = Vec::new();
        for i in (0..seeds.len() - 1).rev() {
            stack.push((seeds[i], seed_vals[i], seeds[i + 1], seed_vals[i + 1], 0));
        }
        while let Some((a, fa, b, fb, depth)) = stack.pop() {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if depth < MAX_DEPTH && m > a && m < b && (fm - 0.5 * (fa + fb)).abs() > threshold {
                stack.push((m, fm, b, fb, depth + 1));
                stack.push((a, fa, m, fm, depth + 1));
            } else {
                nodes.push(b);
                values.push(fb);
            }
        }
        Self { nodes, values }
    }

    /// Every panel split at its midpoint.
    pub fn halved(&self, emitter: &EmitterConfig, spec: &PurcellSpectrum) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        let mut values = Vec::with_capacity(2 * self.nodes.len());
        for k in 0..self.nodes.len() - 1 {
            let m = 0.5 * (self.nodes[k] + self.nodes[k + 1]);
            nodes.push(self.nodes[k]);
            values.push(self.values[k]);
            nodes.push(m);
            values.push(spectral_density_tilde(m, emitter, spec));
        }
        nodes.push(*self.nodes.last().unwrap());
        values.push(*self.values.last().unwrap());
        Self { nodes, values }
    }

    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.values)
    }

    /// `∫ J̃ dω` of the interpolant, eV².
    pub fn integral(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }

    /// `K(τ) = i e^{iω₀′τ} ∫ J̃(ω) e^{−iωτ} dω`, converted to fs⁻².
    pub fn kernel(&self, omega0_shifted: f64, tau_fs: f64) -> Complex64 {
        let t = tau_fs / HBAR_EV_FS;
        // Phases are taken relative to ω₀′ so arguments stay small near resonance.
        let phase = |w: f64| Complex64::from_polar(1.0, (omega0_shifted - w) * t);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p_a = phase(self.nodes[0]);
        for k in 0..self.nodes.len() - 1 {
            let h = self.nodes[k + 1] - self.nodes[k];
            let p_b = phase(self.nodes[k + 1]);
            let (wa, wb) = filon_linear_weights_with(h * t, p_b * p_a.conj());
            acc += p_a * h * (wa * self.values[k] + wb * self.values[k + 1]);
            p_a = p_b;
        }
        Complex64::i() * acc / (HBAR_EV_FS * HBAR_EV_FS)
    }
}

/// Number of uniform steps covering `[0, tmax]`; a ratio within rounding of an
/// integer is not bumped up by one.
pub fn time_steps(tmax: f64, dt: f64) -> Result<usize> {
    if !(tmax.is_finite() && tmax > 0.0) {
        return Err(invalid("tmax", format!("must be finite and > 0, got {tmax}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    let r = tmax / dt;
    let n = if (r - r.round()).abs() <= 1e-9 * r.max(1.0) {
        r.round()
    } else {
        r.ceil()
    };
    if n > 1e8 {
        return Err(invalid("dt", format!("{n} steps requested")));
    }
    Ok((n as usize).max(1))
}

fn shifted_frequency(emitter: &EmitterConfig, spec: &PurcellSpectrum, guard: ShiftGuard) -> Result<(f64, f64)> {
    let emitter = emitter.validated()?;
    let delta = nondyn_shift_with(&emitter, spec, guard)?;
    Ok((emitter.omega0 - delta, delta))
}

fn max_change(coarse: &[Complex64], fine: &[Complex64]) -> f64 {
    coarse.iter().zip(fine).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Memory kernel at a single delay τ (fs), in fs⁻².
pub fn memory_kernel(tau_fs: f64, emitter: &EmitterConfig, spec: &PurcellSpectrum) -> Result<Complex64> {
    if !(tau_fs >= 0.0 && tau_fs.is_finite()) {
        return Err(invalid("tau", format!("must be finite and >= 0, got {tau_fs}")));
    }
    let opts = KernelOptions::default();
    let (w0p, _) = shifted_frequency(emitter, spec, opts.shift_guard)?;
    let (_, values, _) = refined(emitter, spec, &opts, |g| vec![g.kernel(w0p, tau_fs)])?;
    Ok(values[0])
}

/// Halve the adaptive grid until `eval` changes by less than the refinement
/// tolerance. Narrow features that the midpoint test misses show up as a
/// large change; a few extra halvings are tried before giving up.
fn refined<F>(
    emitter: &EmitterConfig,
    spec: &PurcellSpectrum,
    opts: &KernelOptions,
    eval: F,
) -> Result<(FrequencyGrid, Vec<Complex64>, f64)>
where
    F: Fn(&FrequencyGrid) -> Vec<Complex64>,
{
    let mut grid = FrequencyGrid::adaptive(emitter, spec, opts.grid_tolerance, opts.min_panels);
    let mut values = eval(&grid);
    for round in 1..=MAX_REFINEMENTS {
        let fine = grid.halved(emitter, spec);
        let fine_values = eval(&fine);
        match check_refinement(&values, &fine_values, &fine, opts.refine_tolerance) {
            Err(Error::KernelNotConverged { .. }) if round < MAX_REFINEMENTS => {
                grid = fine;
                values = fine_values;
            }
            result => return result.map(|change| (fine, fine_values, change)),
        }
    }
    unreachable!("the last refinement round always returns")
}

fn check_refinement(coarse: &[Complex64], fine: &[Complex64], grid: &FrequencyGrid, tol: f64) -> Result<f64> {
    let scale = grid.integral().abs() / (HBAR_EV_FS * HBAR_EV_FS);
    let change = if scale > 0.0 {
        max_change(coarse, fine) / scale
    } else {
        0.0
    };
    if change > tol {
        return Err(Error::KernelNotConverged { change, tolerance: tol });
    }
    Ok(change)
}

/// How a [`KernelTable`] was integrated.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureInfo {
    pub rule: &'static str,
    /// Panels of the stored (refined) grid.
    pub panels: usize,
    /// Largest |ΔK| under panel halving, relative to |K(0)|.
    pub refinement_change: f64,
    pub tolerance: f64,
}

/// `K(τ)` on the uniform grid `τ_i = i·dt`, `i = 0..=N`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// Upper limit of the ω integration, eV.
    pub omega_cut: f64,
    pub quadrature: QuadratureInfo,
    pub delta_ndyn: f64,
}

impl KernelTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tau(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn tmax(&self) -> f64 {
        self.tau(self.values.len() - 1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# omega_cut_eV={}", self.omega_cut)?;
        writeln!(
            out,
            "# quadrature={} panels={} refinement_change={:e} tolerance={:e}",
            self.quadrature.rule, self.quadrature.panels, self.quadrature.refinement_change, self.quadrature.tolerance
        )?;
        writeln!(out, "# delta_ndyn_eV={:e}", self.delta_ndyn)?;
        writeln!(out, "tau_fs,re_K,im_K")?;
        for (i, k) in self.values.iter().enumerate() {
            writeln!(out, "{},{:e},{:e}", self.tau(i), k.re, k.im)?;
        }
        Ok(())
    }
}

pub fn build_kernel_table(emitter: &EmitterConfig, spec: &PurcellSpectrum, tmax: f64, dt: f64) -> Result<KernelTable> {
    build_kernel_table_with(emitter, spec, tmax, dt, &KernelOptions::default())
}

/// Tabulate K on `[0, tmax]`. Each τ node is an independent sequential sum,
/// so the table is bit-identical for any number of worker threads.
pub fn build_kernel_table_with(
    emitter: &EmitterConfig,
    spec: &PurcellSpectrum,
    tmax: f64,
    dt: f64,
    opts: &KernelOptions,
) -> Result<KernelTable> {
    let n = time_steps(tmax, dt)?;
    let (w0p, delta) = shifted_frequency(emitter, spec, opts.shift_guard)?;
    let (fine, fine_vals, change) = refined(emitter, spec, opts, |g| {
        (0..=n).into_par_iter().map(|i| g.kernel(w0p, i as f64 * dt)).collect()
    })?;
    Ok(KernelTable {
        dt,
        values: fine_vals,
        omega_cut: spec.support().1,
        quadrature: QuadratureInfo {
            rule: "filon-linear",
            panels: fine.panels(),
            refinement_change: change,
            tolerance: opts.refine_tolerance,
        },
        delta_ndyn: delta,
    })
}
