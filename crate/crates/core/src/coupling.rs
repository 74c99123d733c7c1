//! Phase matching, overlap integrals and the vacuum coupling rate.
//!
//! Mode profiles are one-dimensional samples of a separable, square
//! transverse cross-section: the two-dimensional profile is the product of
//! the sampled profile along each transverse axis, so the cross-section
//! integral of a product of profiles is the square of its one-dimensional
//! integral.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_nonnegative, ensure_positive};
use crate::quantities::{units, Material};
use crate::{Error, Result};

/// Relative tolerance for profile normalization.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Backscattering phase-matched acoustic frequency `2 n s omega / c`.
///
/// Works on bare constants so that `s = 0` is representable.
pub fn brillouin_shift(n: f64, s: f64, omega_opt: f64) -> Result<f64> {
    ensure_positive("omega_opt", omega_opt)?;
    ensure_nonnegative("s", s)?;
    ensure_positive("n", n)?;
    Ok(2.0 * n * s * omega_opt / units::C)
}

pub fn brillouin_frequency(material: &Material, omega_opt: f64) -> Result<f64> {
    brillouin_shift(material.n, material.s, omega_opt)
}

/// Uniform-profile overlap `gamma / sqrt(V)`, V in cm^3.
pub fn overlap_uniform(gamma: f64, volume: f64) -> Result<f64> {
    ensure_finite("gamma", gamma)?;
    ensure_positive("volume", volume)?;
    Ok(gamma / volume.sqrt())
}

/// Transverse profiles of the pump, signal and acoustic modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfileSet {
    /// Transverse coordinate samples, cm, strictly increasing.
    pub grid: Vec<f64>,
    pub psi_p: Vec<Complex64>,
    pub psi_s: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    /// Resonator circumference, cm.
    pub length: f64,
    /// Acoustic wavenumber, 1/cm.
    pub q: f64,
}

fn trapezoid<F: Fn(usize) -> Complex64>(grid: &[f64], f: F) -> Complex64 {
    grid.windows(2)
        .enumerate()
        .map(|(i, w)| (f(i) + f(i + 1)) * (0.5 * (w[1] - w[0])))
        .sum()
}

/// One-dimensional trapezoidal norm `int |f|^2`.
pub fn profile_norm(grid: &[f64], f: &[Complex64]) -> f64 {
    trapezoid(grid, |i| Complex64::from(f[i].norm_sqr())).re
}

/// Rescales `f` so that its trapezoidal norm on `grid` is one.
pub fn normalize(grid: &[f64], f: &mut [Complex64]) -> Result<()> {
    let norm = profile_norm(grid, f);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::invalid("profile", "cannot normalize a zero profile"));
    }
    let scale = norm.sqrt().recip();
    f.iter_mut().for_each(|v| *v *= scale);
    Ok(())
}

impl ModeProfileSet {
    pub fn new(
        grid: Vec<f64>,
        psi_p: Vec<Complex64>,
        psi_s: Vec<Complex64>,
        phi: Vec<Complex64>,
        length: f64,
        q: f64,
    ) -> Result<Self> {
        let set = ModeProfileSet {
            grid,
            psi_p,
            psi_s,
            phi,
            length,
            q,
        };
        set.validate()?;
        Ok(set)
    }

    /// Checks shared grid, monotone coordinates and unit normalization.
    ///
    /// An identically zero acoustic profile is accepted (it yields zero
    /// overlap); every other profile must be normalized.
    pub fn validate(&self) -> Result<()> {
        ensure_positive("length", self.length)?;
        ensure_finite("q", self.q)?;
        let n = self.grid.len();
        if n < 2 {
            return Err(Error::invalid("grid", "needs at least two samples"));
        }
        if self.grid.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::invalid("grid", "must be strictly increasing"));
        }
        for (name, f) in [("psi_p", &self.psi_p), ("psi_s", &self.psi_s), ("phi", &self.phi)] {
            if f.len() != n {
                return Err(Error::invalid(
                    "grid",
                    format!("{name} has {} samples, grid has {n}", f.len()),
                ));
            }
            if f.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::invalid(name, "contains non-finite samples"));
            }
        }
        for (name, f) in [("psi_p", &self.psi_p), ("psi_s", &self.psi_s), ("phi", &self.phi)] {
            let norm = profile_norm(&self.grid, f);
            if name == "phi" && norm == 0.0 {
                continue;
            }
            if (norm - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::invalid(name, format!("not normalized: norm = {norm}")));
            }
        }
        Ok(())
    }

    /// Uniform profiles of width `width` (cm) on an `samples`-point grid.
    pub fn uniform(width: f64, samples: usize, length: f64, q: f64) -> Result<Self> {
        ensure_positive("width", width)?;
        if samples < 2 {
            return Err(Error::invalid("samples", "needs at least two samples"));
        }
        let grid: Vec<f64> = (0..samples)
            .map(|i| width * i as f64 / (samples - 1) as f64)
            .collect();
        let level = Complex64::from(width.sqrt().recip());
        let f = vec![level; samples];
        Self::new(grid, f.clone(), f.clone(), f, length, q)
    }

    /// Reads the columnar text format: a header line `# L=<cm> q=<1/cm>`,
    /// then rows of `grid psi_p psi_s phi` (whitespace or comma separated).
    pub fn from_text(text: &str) -> Result<Self> {
        let mut length = None;
        let mut q = None;
        let mut cols: [Vec<f64>; 4] = Default::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for tok in header.split_whitespace() {
                    let Some((k, v)) = tok.split_once('=') else { continue };
                    let parsed = v.parse::<f64>().map_err(|_| {
                        Error::ProfileData(format!("line {}: bad header value `{tok}`", lineno + 1))
                    })?;
                    match k {
                        "L" => length = Some(parsed),
                        "q" => q = Some(parsed),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 4 {
                return Err(Error::ProfileData(format!(
                    "line {}: expected 4 columns, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            for (col, f) in cols.iter_mut().zip(&fields) {
                col.push(f.parse().map_err(|_| {
                    Error::ProfileData(format!("line {}: bad number `{f}`", lineno + 1))
                })?);
            }
        }
        let length = length.ok_or_else(|| Error::ProfileData("header lacks L".into()))?;
        let q = q.ok_or_else(|| Error::ProfileData("header lacks q".into()))?;
        let [grid, p, s, phi] = cols;
        let c = |v: Vec<f64>| v.into_iter().map(Complex64::from).collect::<Vec<_>>();
        Self::new(grid, c(p), c(s), c(phi), length, q)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Overlap `(gamma / sqrt L) * int dA psi_p psi_s (i phi)`, keeping the
/// complex phase. Use `.norm()` for the magnitude.
pub fn overlap_integral_complex(profiles: &ModeProfileSet, gamma: f64) -> Result<Complex64> {
    profiles.validate()?;
    ensure_finite("gamma", gamma)?;
    let line = trapezoid(&profiles.grid, |k| {
        profiles.psi_p[k] * profiles.psi_s[k] * profiles.phi[k]
    });
    let i = Complex64::i();
    Ok(i * line * line * (gamma / profiles.length.sqrt()))
}

/// Magnitude of [`overlap_integral_complex`], cm^(-3/2).
pub fn overlap_integral(profiles: &ModeProfileSet, gamma: f64) -> Result<f64> {
    Ok(overlap_integral_complex(profiles, gamma)?.norm())
}

/// `|M| sqrt(hbar omega_p omega_s Omega / (32 eps^2 rho s^2))`, rad/s.
pub fn vacuum_coupling_rate(
    overlap: f64,
    omega_p: f64,
    omega_s: f64,
    omega_ac: f64,
    material: &Material,
) -> Result<f64> {
    ensure_finite("overlap", overlap)?;
    ensure_positive("omega_p", omega_p)?;
    ensure_positive("omega_s", omega_s)?;
    ensure_positive("omega_ac", omega_ac)?;
    material.validate()?;
    let eps = material.epsilon;
    let ratio = units::HBAR * omega_p * omega_s * omega_ac
        / (32.0 * eps * eps * material.rho * material.s * material.s);
    Ok(overlap.abs() * ratio.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    /// Overlap magnitude, cm^(-3/2).
    pub m: f64,
    /// Vacuum coupling rate, rad/s.
    pub g0: f64,
    /// Acoustic angular frequency, rad/s.
    pub omega: f64,
    /// Pump angular frequency, rad/s.
    pub omega_p: f64,
    /// Anti-Stokes signal angular frequency, rad/s.
    pub omega_s: f64,
}

/// Uniform-overlap coupling for a resonator of volume `volume` (cm^3) pumped
/// at `omega_p`. The signal sits on the anti-Stokes sideband.
pub fn coupling_for_volume(material: &Material, volume: f64, omega_p: f64) -> Result<CouplingResult> {
    let omega = brillouin_frequency(material, omega_p)?;
    let m = overlap_uniform(material.gamma, volume)?;
    let omega_s = omega_p + omega;
    let g0 = vacuum_coupling_rate(m, omega_p, omega_s, omega, material)?;
    Ok(CouplingResult {
        m,
        g0,
        omega,
        omega_p,
        omega_s,
    })
}
