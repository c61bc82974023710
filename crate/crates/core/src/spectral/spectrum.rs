use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::units::reduced_wavelength_nm;

use super::greens::{green_xx, GreensCoefficients};

/// Purcell factor `λ = √ε + (6πc/ω) Im G_xx` for an x-oriented dipole.
///
/// Fails with [`Error::UnphysicalPurcell`] when the induced part drives λ
/// below zero, which signals inconsistent coefficient data.
pub fn purcell_factor(omega: f64, im_gxx: f64, eps: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    if !(eps >= 1.0) {
        return Err(invalid("host_eps", format!("must be >= 1, got {eps}")));
    }
    let value = eps.sqrt() + 6.0 * std::f64::consts::PI * reduced_wavelength_nm(omega) * im_gxx;
    if value < 0.0 {
        return Err(Error::UnphysicalPurcell { omega_ev: omega, value });
    }
    Ok(value)
}

/// One Lorentzian resonance of the induced Purcell factor:
/// `λ_j β_j² / ((ω − ω_j)² + β_j²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPeak {
    /// Peak height (value at the center).
    pub lambda: f64,
    /// Center, eV.
    pub omega: f64,
    /// Half width at half maximum, eV.
    pub beta: f64,
}

impl LorentzianPeak {
    pub fn new(lambda: f64, omega: f64, beta: f64) -> Self {
        Self { lambda, omega, beta }
    }

    #[inline]
    pub fn eval(&self, omega: f64) -> f64 {
        let d = omega - self.omega;
        self.lambda * self.beta * self.beta / (d * d + self.beta * self.beta)
    }
}

/// Series-backed spectrum: λ is computed from the image series at every
/// frequency the coefficient data provides for `z_nm`, and interpolated
/// linearly between those frequencies.
#[derive(Debug, Clone)]
pub struct GreensSeries {
    pub z_nm: f64,
    pub radius_nm: f64,
    pub coefficients: Arc<GreensCoefficients>,
    omega: Vec<f64>,
    lambda: Vec<f64>,
    max_tail: f64,
}

impl GreensSeries {
    /// Largest truncation-tail estimate of Im G over the grid, scaled to λ units.
    pub fn max_tail(&self) -> f64 {
        self.max_tail
    }

    pub fn samples(&self) -> (&[f64], &[f64]) {
        (&self.omega, &self.lambda)
    }
}

#[derive(Debug, Clone)]
pub enum Representation {
    /// Samples of the full λ (baseline included), strictly increasing in ω.
    Tabulated {
        omega: Vec<f64>,
        lambda: Vec<f64>,
    },
    /// Induced part as a sum of Lorentzians; the √ε baseline is added once.
    LorentzianSum(Vec<LorentzianPeak>),
    GreensSeries(GreensSeries),
}

/// Purcell factor λ(ω) at a fixed emitter position.
///
/// Spectra are immutable after construction. Outside `support` every
/// representation evaluates to the free-space baseline √ε.
#[derive(Debug, Clone)]
pub struct PurcellSpectrum {
    repr: Representation,
    support: (f64, f64),
    host_eps: f64,
}

fn check_support(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(invalid("support", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps >= 1.0) {
        return Err(invalid("host_eps", format!("must be finite and >= 1, got {eps}")));
    }
    Ok(())
}

fn check_samples(omega: &[f64], lambda: &[f64]) -> Result<()> {
    if omega.len() != lambda.len() {
        return Err(Error::MalformedSpectrum(format!(
            "{} frequencies but {} values",
            omega.len(),
            lambda.len()
        )));
    }
    if omega.len() < 2 {
        return Err(Error::MalformedSpectrum("need at least two samples".into()));
    }
    if let Some(w) = omega.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::MalformedSpectrum(format!(
            "frequencies must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if let Some(l) = lambda.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::MalformedSpectrum(format!("λ must be finite and >= 0, got {l}")));
    }
    Ok(())
}

fn interpolate(omega: &[f64], lambda: &[f64], w: f64) -> f64 {
    // Index of the first node strictly greater than w.
    let upper = omega.partition_point(|&x| x <= w);
    if upper == 0 {
        return lambda[0];
    }
    let i = upper - 1;
    if i + 1 == omega.len() || omega[i] == w {
        return lambda[i];
    }
    let t = (w - omega[i]) / (omega[i + 1] - omega[i]);
    lambda[i] + t * (lambda[i + 1] - lambda[i])
}

impl PurcellSpectrum {
    pub fn tabulated(omega: Vec<f64>, lambda: Vec<f64>, host_eps: f64) -> Result<Self> {
        check_eps(host_eps)?;
        check_samples(&omega, &lambda)?;
        let support = (omega[0], omega[omega.len() - 1]);
        check_support(support.0, support.1)?;
        let spec = Self {
            repr: Representation::Tabulated { omega, lambda },
            support,
            host_eps,
        };
        for warning in spec.sampling_warnings() {
            log::warn!("{warning}");
        }
        Ok(spec)
    }

    pub fn lorentzian_sum(peaks: Vec<LorentzianPeak>, support: (f64, f64), host_eps: f64) -> Result<Self> {
        check_eps(host_eps)?;
        check_support(support.0, support.1)?;
        for p in &peaks {
            if !(p.beta.is_finite() && p.beta > 0.0) {
                return Err(invalid("beta", format!("peak width must be > 0, got {}", p.beta)));
            }
            if !(p.lambda.is_finite() && p.lambda >= 0.0) {
                return Err(invalid("lambda", format!("peak height must be >= 0, got {}", p.lambda)));
            }
            if !p.omega.is_finite() {
                return Err(invalid("omega", "peak center must be finite"));
            }
        }
        Ok(Self {
            repr: Representation::LorentzianSum(peaks),
            support,
            host_eps,
        })
    }

    /// Evaluate the image series at every coefficient frequency stored for
    /// `z_nm`. No coefficients at that distance is an error; frequencies are
    /// never extrapolated.
    pub fn greens_series(
        z_nm: f64,
        radius_nm: f64,
        coefficients: Arc<GreensCoefficients>,
        host_eps: f64,
    ) -> Result<Self> {
        check_eps(host_eps)?;
        let omega = coefficients.omegas_at(z_nm);
        if omega.len() < 2 {
            return Err(Error::CoefficientsUnavailable {
                z_nm,
                omega_ev: f64::NAN,
            });
        }
        let mut lambda = Vec::with_capacity(omega.len());
        let mut max_tail: f64 = 0.0;
        for &w in &omega {
            let g = green_xx(z_nm, w, &coefficients, radius_nm)?;
            lambda.push(purcell_factor(w, g.value.im, host_eps)?);
            let tail = 6.0 * std::f64::consts::PI * reduced_wavelength_nm(w) * g.tail_estimate;
            max_tail = max_tail.max(tail);
        }
        let support = (omega[0], omega[omega.len() - 1]);
        check_support(support.0, support.1)?;
        Ok(Self {
            repr: Representation::GreensSeries(GreensSeries {
                z_nm,
                radius_nm,
                coefficients,
                omega,
                lambda,
                max_tail,
            }),
            support,
            host_eps,
        })
    }

    /// Read a spectrum CSV with header `omega_eV,lambda`.
    pub fn from_csv(path: impl AsRef<Path>, host_eps: f64) -> Result<Self> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv {
            path: path.to_owned(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["omega_eV", "lambda"] {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                reason: "expected header `omega_eV,lambda`".into(),
            });
        }
        let (mut omega, mut lambda) = (Vec::new(), Vec::new());
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let parse = |k: usize| -> Result<f64> {
                record.get(k).unwrap_or("").parse::<f64>().map_err(|e| Error::Parse {
                    path: path.to_owned(),
                    line: i + 2,
                    reason: e.to_string(),
                })
            };
            omega.push(parse(0)?);
            lambda.push(parse(1)?);
        }
        Self::tabulated(omega, lambda, host_eps)
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn host_eps(&self) -> f64 {
        self.host_eps
    }

    /// Free-space baseline √ε.
    pub fn baseline(&self) -> f64 {
        self.host_eps.sqrt()
    }

    /// λ(ω). Tabulated and series-backed data are interpolated linearly.
    pub fn eval(&self, omega: f64) -> f64 {
        let (lo, hi) = self.support;
        if !(omega >= lo && omega <= hi) {
            return self.baseline();
        }
        match &self.repr {
            Representation::Tabulated { omega: w, lambda } => interpolate(w, lambda, omega),
            Representation::LorentzianSum(peaks) => self.baseline() + peaks.iter().map(|p| p.eval(omega)).sum::<f64>(),
            Representation::GreensSeries(gs) => interpolate(&gs.omega, &gs.lambda, omega),
        }
    }

    /// Induced part λ(ω) − √ε.
    pub fn induced(&self, omega: f64) -> f64 {
        self.eval(omega) - self.baseline()
    }

    /// Natural break points inside the support (sample nodes, peak centers and
    /// flanks). Quadrature grids are seeded with these.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        let mut pts = match &self.repr {
            Representation::Tabulated { omega, .. } => omega.clone(),
            Representation::GreensSeries(gs) => gs.omega.clone(),
            Representation::LorentzianSum(peaks) => {
                let mut v = Vec::new();
                for p in peaks {
                    v.push(p.omega);
                    for k in [0.25, 1.0, 3.0, 10.0, 30.0] {
                        v.push(p.omega - k * p.beta);
                        v.push(p.omega + k * p.beta);
                    }
                }
                v
            }
        };
        pts.push(lo);
        pts.push(hi);
        pts.retain(|&x| x >= lo && x <= hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Sample nodes for data-backed representations.
    pub fn samples(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            Representation::Tabulated { omega, lambda } => Some((omega, lambda)),
            Representation::GreensSeries(gs) => Some(gs.samples()),
            Representation::LorentzianSum(_) => None,
        }
    }

    /// Tabulate this spectrum on the given grid.
    pub fn tabulate(&self, grid: &[f64]) -> Result<PurcellSpectrum> {
        let values = grid.iter().map(|&w| self.eval(w)).collect();
        PurcellSpectrum::tabulated(grid.to_vec(), values, self.host_eps)
    }

    /// Peaks of sampled data resolved by fewer than 10 points per full width
    /// at half maximum. Linear interpolation misrepresents such peaks.
    pub fn sampling_warnings(&self) -> Vec<String> {
        let Some((omega, lambda)) = self.samples() else {
            return Vec::new();
        };
        let base = self.baseline();
        let y: Vec<f64> = lambda.iter().map(|l| l - base).collect();
        let mut out = Vec::new();
        for i in 1..y.len().saturating_sub(1) {
            if !(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > 0.0) {
                continue;
            }
            let half = 0.5 * y[i];
            let mut l = i;
            while l > 0 && y[l] > half {
                l -= 1;
            }
            let mut r = i;
            while r + 1 < y.len() && y[r] > half {
                r += 1;
            }
            let inside = r - l - 1;
            if inside < 10 {
                out.push(format!(
                    "peak at {:.6} eV sampled by {} points per linewidth (need >= 10)",
                    omega[i], inside
                ));
            }
        }
        out
    }
}

/// Write `(ω, λ)` pairs in the spectrum CSV format.
pub fn write_spectrum_csv<W: Write>(mut out: W, omega: &[f64], lambda: &[f64]) -> std::io::Result<()> {
    writeln!(out, "omega_eV,lambda")?;
    for (w, l) in omega.iter().zip(lambda) {
        writeln!(out, "{w},{l:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn free_space_and_unit_induced_purcell() {
        assert_eq!(purcell_factor(2.0, 0.0, 1.0).unwrap(), 1.0);
        let im = 1.0 / (6.0 * std::f64::consts::PI * reduced_wavelength_nm(2.0));
        assert_relative_eq!(purcell_factor(2.0, im, 1.0).unwrap(), 2.0, max_relative = 1e-15);
        assert!(matches!(
            purcell_factor(2.0, -im * 3.0, 1.0),
            Err(Error::UnphysicalPurcell { .. })
        ));
    }

    #[test]
    fn tabulated_midpoint_and_outside() {
        let s = PurcellSpectrum::tabulated(vec![1.9, 2.0], vec![10.0, 20.0], 1.0).unwrap();
        assert_relative_eq!(s.eval(1.95), 15.0, max_relative = 1e-14);
        assert_eq!(s.eval(1.0), 1.0);
        assert_eq!(s.eval(2.5), 1.0);
        assert_eq!(s.eval(1.9), 10.0);
        assert_eq!(s.eval(2.0), 20.0);
    }

    #[test]
    fn lorentzian_center_value() {
        let s =
            PurcellSpectrum::lorentzian_sum(vec![LorentzianPeak::new(500.0, 1.95, 1e-3)], (1.5, 2.5), 2.25).unwrap();
        assert_relative_eq!(s.eval(1.95), 1.5 + 500.0, max_relative = 1e-15);
        assert_eq!(s.eval(3.0), 1.5);
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(PurcellSpectrum::tabulated(vec![2.0, 1.9], vec![1.0, 1.0], 1.0).is_err());
        assert!(PurcellSpectrum::tabulated(vec![1.9, 2.0], vec![1.0, -1.0], 1.0).is_err());
        assert!(PurcellSpectrum::tabulated(vec![1.9], vec![1.0], 1.0).is_err());
        assert!(PurcellSpectrum::tabulated(vec![1.9, 2.0], vec![1.0, 1.0], 0.5).is_err());
        assert!(PurcellSpectrum::lorentzian_sum(vec![LorentzianPeak::new(1.0, 2.0, 0.0)], (1.0, 3.0), 1.0).is_err());
        assert!(PurcellSpectrum::lorentzian_sum(vec![], (2.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn undersampled_peak_warns() {
        let peak = LorentzianPeak::new(100.0, 2.0, 1e-3);
        let coarse: Vec<f64> = (0..201).map(|i| 1.9 + 1e-3 * i as f64).collect();
        let fine: Vec<f64> = (0..2001).map(|i| 1.9 + 1e-4 * i as f64).collect();
        let mk = |g: &[f64]| {
            PurcellSpectrum::tabulated(g.to_vec(), g.iter().map(|&w| 1.0 + peak.eval(w)).collect(), 1.0).unwrap()
        };
        assert_eq!(mk(&coarse).sampling_warnings().len(), 1);
        assert!(mk(&fine).sampling_warnings().is_empty());
    }

    #[test]
    fn single_pole_series_gives_lorentzian_peak() {
        // c₀¹(ω) = r / (ω_p − ω − iγ) makes Im G, and hence λ − 1, a Lorentzian
        // in ω up to the slowly varying (c/ω)³ prefactor.
        let (z, radius, omega_p, gamma) = (5.0, 30.0, 1.95, 2e-3);
        let residue = Complex64::new(-1e-6, 0.0);
        let grid: Vec<f64> = (0..=400).map(|i| 1.93 + 1e-4 * i as f64).collect();
        let mut coeffs = GreensCoefficients::new();
        for &w in &grid {
            let c0 = residue / Complex64::new(omega_p - w, -gamma);
            coeffs.insert(z, w, vec![c0]).unwrap();
        }
        let s = PurcellSpectrum::greens_series(z, radius, Arc::new(coeffs), 1.0).unwrap();
        // Height from the pole residue at ω = ω_p, where Im c₀ = r/γ.
        let zr = z / radius;
        let rt = (zr * zr + 1.0).sqrt();
        let geom = (rt - zr).powi(2) / rt;
        let lb = reduced_wavelength_nm(omega_p);
        let im_c0_peak = (residue / Complex64::new(0.0, -gamma)).im;
        let height = 6.0 * std::f64::consts::PI * lb * (-0.5 * lb * lb) * geom * im_c0_peak;
        assert!(height > 0.0);
        assert_relative_eq!(s.eval(omega_p) - 1.0, height, max_relative = 1e-10);
        // Half maximum sits one damping width away (within the (c/ω)³ drift).
        let ratio = (s.eval(omega_p + gamma) - 1.0) / height;
        assert!((ratio - 0.5).abs() < 5e-3, "ratio {ratio}");
    }
}
