//! Direct solver for `ċ₁(t) = i∫₀ᵗ K(t−t′) c₁(t′) dt′`.
//!
//! The history integral uses the trapezoid rule and the time step the
//! trapezoid rule as well. The equation is linear, so the implicit step is
//! solved in closed form: no predictor iterations are needed and the scheme is
//! second order with an O(N²) history sum.

use num_complex::Complex64;

use crate::error::Result;
use crate::kernel::{build_kernel_table_with, EmitterConfig, KernelOptions};
use crate::spectral::PurcellSpectrum;

use super::result::{ConvergenceReport, DynamicsResult, SolverId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolterraOptions {
    /// Allowed max population difference between the dt and 2·dt runs.
    pub tolerance: f64,
    pub check_convergence: bool,
    pub kernel: KernelOptions,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            check_convergence: true,
            kernel: KernelOptions::default(),
        }
    }
}

pub fn solve_volterra(emitter: &EmitterConfig, spec: &PurcellSpectrum, tmax: f64, dt: f64) -> Result<DynamicsResult> {
    solve_volterra_with(emitter, spec, tmax, dt, &VolterraOptions::default())
}

pub fn solve_volterra_with(
    emitter: &EmitterConfig,
    spec: &PurcellSpectrum,
    tmax: f64,
    dt: f64,
    opts: &VolterraOptions,
) -> Result<DynamicsResult> {
    let table = build_kernel_table_with(emitter, spec, tmax, dt, &opts.kernel)?;
    Ok(solve_volterra_kernel(&table.values, dt, table.delta_ndyn, opts))
}

/// Propagate with kernel samples `K(i·dt)`, `i = 0..=N` (fs⁻²).
///
/// The convergence check reruns at `2·dt` using every other kernel sample
/// and compares populations on the shared nodes.
pub fn solve_volterra_kernel(kernel: &[Complex64], dt: f64, delta_ndyn: f64, opts: &VolterraOptions) -> DynamicsResult {
    let c1 = integrate(kernel, dt);
    let convergence = if opts.check_convergence && kernel.len() >= 5 {
        let coarse_kernel: Vec<Complex64> = kernel.iter().step_by(2).copied().collect();
        let coarse = integrate(&coarse_kernel, 2.0 * dt);
        let change = coarse
            .iter()
            .zip(c1.iter().step_by(2))
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .fold(0.0, f64::max);
        ConvergenceReport::from_change(2.0 * dt, change, opts.tolerance)
    } else {
        ConvergenceReport {
            reference_dt: None,
            max_population_change: f64::NAN,
            tolerance: opts.tolerance,
            converged: !opts.check_convergence,
        }
    };
    if !convergence.converged {
        log::warn!(
            "volterra run at dt = {dt} fs not converged: population changed by {:.3e} against 2dt",
            convergence.max_population_change
        );
    }
    DynamicsResult::new(dt, c1, SolverId::Volterra, delta_ndyn, convergence)
}

/// Σ a_k b_k over split real/imaginary slices, four lanes wide.
#[inline]
fn complex_dot(a_re: &[f64], a_im: &[f64], b_re: &[f64], b_im: &[f64]) -> Complex64 {
    let n = a_re.len();
    let (a_re, a_im, b_re, b_im) = (&a_re[..n], &a_im[..n], &b_re[..n], &b_im[..n]);
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let k = 4 * c + l;
            re[l] += a_re[k] * b_re[k] - a_im[k] * b_im[k];
            im[l] += a_re[k] * b_im[k] + a_im[k] * b_re[k];
        }
    }
    let mut tail = Complex64::new(0.0, 0.0);
    for k in 4 * chunks..n {
        tail += Complex64::new(a_re[k], a_im[k]) * Complex64::new(b_re[k], b_im[k]);
    }
    Complex64::new(re[0] + re[1] + re[2] + re[3], im[0] + im[1] + im[2] + im[3]) + tail
}

fn integrate(kernel: &[Complex64], dt: f64) -> Vec<Complex64> {
    let n = kernel.len() - 1;
    let i = Complex64::i();
    // Reversed kernel: K_{m−j} = rev[n − m + j], so each history sum is a
    // contiguous dot product.
    let rev_re: Vec<f64> = kernel.iter().rev().map(|k| k.re).collect();
    let rev_im: Vec<f64> = kernel.iter().rev().map(|k| k.im).collect();
    let mut c_re = Vec::with_capacity(n + 1);
    let mut c_im = Vec::with_capacity(n + 1);
    c_re.push(1.0);
    c_im.push(0.0);

    let c0 = Complex64::new(1.0, 0.0);
    // ċ_m = F_m = a_m + b·c_m.
    let b = i * dt * 0.5 * kernel[0];
    let denom = 1.0 - 0.5 * dt * b;
    let mut f_prev = Complex64::new(0.0, 0.0);
    let mut c_prev = c0;
    for m in 1..=n {
        let lo = n - m + 1;
        let hist = 0.5 * kernel[m] * c0 + complex_dot(&rev_re[lo..n], &rev_im[lo..n], &c_re[1..m], &c_im[1..m]);
        let a = i * dt * hist;
        let c = (c_prev + 0.5 * dt * (f_prev + a)) / denom;
        f_prev = a + b * c;
        c_prev = c;
        c_re.push(c.re);
        c_im.push(c.im);
    }
    c_re.into_iter()
        .zip(c_im)
        .map(|(re, im)| Complex64::new(re, im))
        .collect()
}
