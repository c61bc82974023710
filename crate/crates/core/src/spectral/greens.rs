//! Quasi-static image series for the induced Green's tensor of a nanodisk,
//! evaluated on the symmetry axis for an in-plane (x) dipole.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::units::reduced_wavelength_nm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct GridKey(u64, u64);

impl GridKey {
    // Keys are compared bitwise: lookups succeed only at exactly the (z, ω)
    // values present in the data.
    fn new(z_nm: f64, omega_ev: f64) -> Self {
        // Fold -0.0 into 0.0 so the sign bit does not split keys.
        GridKey((z_nm + 0.0).to_bits(), (omega_ev + 0.0).to_bits())
    }
}

/// Expansion coefficients `cₙ¹(z, ω)`, `n = 0..=N_max`, keyed by the exact grid
/// point they were computed at.
#[derive(Debug, Clone, Default)]
pub struct GreensCoefficients {
    entries: BTreeMap<GridKey, Vec<Complex64>>,
}

impl GreensCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store the full truncated sequence for one grid point, replacing any
    /// previous entry.
    pub fn insert(&mut self, z_nm: f64, omega_ev: f64, coeffs: Vec<Complex64>) -> Result<()> {
        if !(z_nm.is_finite() && z_nm >= 0.0) {
            return Err(invalid("z_nm", format!("must be finite and >= 0, got {z_nm}")));
        }
        if !(omega_ev.is_finite() && omega_ev > 0.0) {
            return Err(Error::NonPositiveFrequency(omega_ev));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("coefficients", "non-finite value"));
        }
        self.entries.insert(GridKey::new(z_nm, omega_ev), coeffs);
        Ok(())
    }

    pub fn get(&self, z_nm: f64, omega_ev: f64) -> Option<&[Complex64]> {
        self.entries.get(&GridKey::new(z_nm, omega_ev)).map(Vec::as_slice)
    }

    /// Frequencies available at distance `z_nm`, increasing.
    pub fn omegas_at(&self, z_nm: f64) -> Vec<f64> {
        let zbits = (z_nm + 0.0).to_bits();
        let mut omegas: Vec<f64> = self
            .entries
            .keys()
            .filter(|k| k.0 == zbits)
            .map(|k| f64::from_bits(k.1))
            .collect();
        omegas.sort_by(f64::total_cmp);
        omegas
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Read a coefficient file with header `z_nm,omega_eV,n,re_c,im_c`.
    ///
    /// Every (z, ω) group must list `n = 0, 1, …, N_max` without gaps; rows
    /// may appear in any order.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
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
        let expected = ["z_nm", "omega_eV", "n", "re_c", "im_c"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                reason: format!("expected header `{}`", expected.join(",")),
            });
        }

        let mut raw: BTreeMap<GridKey, (f64, f64, BTreeMap<usize, Complex64>)> = BTreeMap::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let line = i + 2;
            let parse_err = |reason: String| Error::Parse {
                path: path.to_owned(),
                line,
                reason,
            };
            let field = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .ok_or_else(|| parse_err(format!("missing column {}", expected[k])))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("{}: {e}", expected[k])))
            };
            let z = field(0)?;
            let w = field(1)?;
            let n: usize = record
                .get(2)
                .unwrap_or("")
                .parse()
                .map_err(|e| parse_err(format!("n: {e}")))?;
            let c = Complex64::new(field(3)?, field(4)?);
            let slot = raw.entry(GridKey::new(z, w)).or_insert_with(|| (z, w, BTreeMap::new()));
            if slot.2.insert(n, c).is_some() {
                return Err(parse_err(format!("duplicate n = {n} at z = {z}, omega = {w}")));
            }
        }

        let mut out = GreensCoefficients::new();
        for (_, (z, w, by_n)) in raw {
            let n_max = by_n.len() - 1;
            if by_n.keys().copied().ne(0..=n_max) {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: 0,
                    reason: format!("coefficient indices at z = {z}, omega = {w} are not contiguous from 0"),
                });
            }
            out.insert(z, w, by_n.into_values().collect())?;
        }
        Ok(out)
    }
}

/// Value of the truncated image series together with a bound on the
/// neglected terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: Complex64,
    /// Estimated magnitude of the omitted terms `n > N_max`, assuming they
    /// are bounded by the largest stored |cₙ¹|. Infinite at z = 0 where the
    /// geometric factor does not decay.
    pub tail_estimate: f64,
    pub n_max: usize,
}

/// Geometric factor `[R̃ − z/R]^{2n+2} / R̃` with `R̃ = √((z/R)² + 1)`.
pub fn image_factor(z_nm: f64, radius_nm: f64, n: usize) -> f64 {
    let zr = z_nm / radius_nm;
    let r_tilde = (zr * zr + 1.0).sqrt();
    (r_tilde - zr).powi(2 * n as i32 + 2) / r_tilde
}

/// Induced Green's tensor component `G_xx(z, ω) = −(c²/2ω²) Σₙ cₙ¹ [R̃ − z/R]^{2n+2}/R̃`.
///
/// `c/ω` is the reduced vacuum wavelength (nm) of the photon energy `omega`.
pub fn green_xx(z_nm: f64, omega: f64, coeffs: &GreensCoefficients, radius_nm: f64) -> Result<GreenValue> {
    if !(radius_nm > 0.0) {
        return Err(invalid("radius_nm", format!("must be > 0, got {radius_nm}")));
    }
    if !(z_nm >= 0.0) {
        return Err(invalid("z_nm", format!("must be >= 0, got {z_nm}")));
    }
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency(omega));
    }
    let series = coeffs
        .get(z_nm, omega)
        .filter(|s| !s.is_empty())
        .ok_or(Error::CoefficientsUnavailable { z_nm, omega_ev: omega })?;

    let zr = z_nm / radius_nm;
    let r_tilde = (zr * zr + 1.0).sqrt();
    let ratio = (r_tilde - zr) * (r_tilde - zr);
    let mut geom = ratio / r_tilde;
    let mut sum = Complex64::new(0.0, 0.0);
    for &c in series {
        sum += c * geom;
        geom *= ratio;
    }
    let lambda_bar = reduced_wavelength_nm(omega);
    let scale = -0.5 * lambda_bar * lambda_bar;

    let n_max = series.len() - 1;
    let bound = series.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // geom now holds the factor for n = N_max + 1.
    let tail_estimate = if ratio < 1.0 {
        scale.abs() * bound * geom / (1.0 - ratio)
    } else if bound == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };

    Ok(GreenValue {
        value: sum * scale,
        tail_estimate,
        n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coeffs_at(z: f64, w: f64, c: Vec<Complex64>) -> GreensCoefficients {
        let mut g = GreensCoefficients::new();
        g.insert(z, w, c).unwrap();
        g
    }

    #[test]
    fn zero_coefficients_give_zero() {
        let g = coeffs_at(5.0, 2.0, vec![Complex64::new(0.0, 0.0); 4]);
        assert_eq!(green_xx(5.0, 2.0, &g, 30.0).unwrap().value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_coefficient_on_disk_surface() {
        let g = coeffs_at(0.0, 2.0, vec![Complex64::new(1.0, 0.0)]);
        let v = green_xx(0.0, 2.0, &g, 30.0).unwrap();
        let lb = reduced_wavelength_nm(2.0);
        assert_relative_eq!(v.value.re, -lb * lb / 2.0, max_relative = 1e-15);
        assert_eq!(v.value.im, 0.0);
        assert!(v.tail_estimate.is_infinite());
    }

    #[test]
    fn two_terms_at_z_equal_radius() {
        let (c0, c1) = (Complex64::new(0.3, 2.0), Complex64::new(-1.5, 0.25));
        let g = coeffs_at(30.0, 1.95, vec![c0, c1]);
        let v = green_xx(30.0, 1.95, &g, 30.0).unwrap();
        // R̃ = √2, bracket = √2 − 1.
        let s2 = 2f64.sqrt();
        let b = s2 - 1.0;
        let lb = reduced_wavelength_nm(1.95);
        let expect = -(lb * lb / 2.0) * (c0 * b.powi(2) / s2 + c1 * b.powi(4) / s2);
        assert_relative_eq!(v.value.re, expect.re, max_relative = 1e-13);
        assert_relative_eq!(v.value.im, expect.im, max_relative = 1e-13);
        assert_eq!(v.n_max, 1);
    }

    #[test]
    fn missing_grid_point_is_an_error() {
        let g = coeffs_at(5.0, 2.0, vec![Complex64::new(1.0, 0.0)]);
        assert!(matches!(
            green_xx(5.0, 2.0000001, &g, 30.0),
            Err(Error::CoefficientsUnavailable { .. })
        ));
        assert!(matches!(
            green_xx(6.0, 2.0, &g, 30.0),
            Err(Error::CoefficientsUnavailable { .. })
        ));
    }

    #[test]
    fn tail_shrinks_with_truncation_order() {
        let mut last = f64::INFINITY;
        for n in 1..12 {
            let g = coeffs_at(2.0, 1.9, vec![Complex64::new(1.0, -1.0); n]);
            let v = green_xx(2.0, 1.9, &g, 7.5).unwrap();
            assert!(v.tail_estimate < last);
            last = v.tail_estimate;
        }
    }

    #[test]
    fn image_factor_strictly_decreasing_off_surface() {
        for &z in &[0.5, 2.0, 15.0, 60.0] {
            for n in 0..30 {
                assert!(image_factor(z, 30.0, n + 1) < image_factor(z, 30.0, n));
            }
        }
    }
}
