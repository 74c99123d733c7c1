//! Steady-state scattering of the anti-Stokes (beam-splitter) channel.
//!
//! With `G = g0 sqrt(Np)` and `D = (dw + i kappa)(dW + i Gamma) - |G|^2` the
//! Langevin pair
//!
//! ```text
//! i a' + (dw + i kappa) a + G  b = sqrt(2 kappa0) a_in
//! i b' + (dW + i Gamma) b + G* a = sqrt(2 Gamma0) c_in
//! ```
//!
//! together with `a_out = a_in - i sqrt(2 kappa0) a` and
//! `c_out = c_in - i sqrt(2 Gamma0) b` gives
//!
//! ```text
//! S11 = 1 - 2i kappa0 (dW + i Gamma) / D      S12 = 2i G  sqrt(kappa0 Gamma0) / D
//! S21 = 2i G* sqrt(kappa0 Gamma0) / D         S22 = 1 - 2i Gamma0 (dw + i kappa) / D
//! ```
//!
//! where port 1 is optical and port 2 microwave/acoustic.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_nonnegative, ensure_positive};
use crate::{Error, Execution, Result};

/// Relative tolerance of the pump-frequency constraint `dw - dW = 2 delta`.
pub const DETUNING_TOL: f64 = 1e-9;

/// Optical and acoustic resonances with their loss budgets. All rates rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    /// Optical signal frequency.
    pub omega_s: f64,
    /// Acoustic frequency.
    pub omega_ac: f64,
    /// Optical external (fiber) coupling rate.
    pub kappa0: f64,
    pub kappa_int: f64,
    /// Acoustic external (transducer/line) coupling rate.
    pub gamma0: f64,
    pub gamma_int: f64,
    /// Interaction volume, cm^3.
    pub volume: f64,
}

impl ResonatorSpec {
    pub fn new(
        omega_s: f64,
        omega_ac: f64,
        kappa0: f64,
        kappa_int: f64,
        gamma0: f64,
        gamma_int: f64,
        volume: f64,
    ) -> Result<Self> {
        let spec = ResonatorSpec {
            omega_s,
            omega_ac,
            kappa0,
            kappa_int,
            gamma0,
            gamma_int,
            volume,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// A spec carrying only loss rates; frequencies and volume are
    /// placeholders that do not enter the scattering or dynamics.
    pub fn from_rates(kappa0: f64, kappa_int: f64, gamma0: f64, gamma_int: f64) -> Result<Self> {
        let scale = (kappa0 + kappa_int + gamma0 + gamma_int).max(1.0);
        Self::new(1e6 * scale, 1e3 * scale, kappa0, kappa_int, gamma0, gamma_int, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("kappa0", self.kappa0)?;
        ensure_nonnegative("kappa_int", self.kappa_int)?;
        ensure_nonnegative("gamma0", self.gamma0)?;
        ensure_nonnegative("gamma_int", self.gamma_int)?;
        ensure_positive("omega_ac", self.omega_ac)?;
        ensure_positive("omega_s", self.omega_s)?;
        ensure_positive("volume", self.volume)?;
        if self.omega_s <= self.omega_ac {
            return Err(Error::invalid(
                "omega_s",
                format!("must exceed omega_ac ({} <= {})", self.omega_s, self.omega_ac),
            ));
        }
        Ok(())
    }

    /// Total optical damping.
    pub fn kappa(&self) -> f64 {
        self.kappa0 + self.kappa_int
    }

    /// Total acoustic damping.
    pub fn gamma(&self) -> f64 {
        self.gamma0 + self.gamma_int
    }

    pub fn is_lossless(&self) -> bool {
        self.kappa_int == 0.0 && self.gamma_int == 0.0
    }
}

/// Signal, acoustic and pump detunings (rad/s) tied by `dw - dW = 2 delta`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetuningConfig {
    pub d_omega: f64,
    pub d_omega_ac: f64,
    pub delta: f64,
}

impl DetuningConfig {
    pub fn new(d_omega: f64, d_omega_ac: f64, delta: f64) -> Result<Self> {
        ensure_finite("d_omega", d_omega)?;
        ensure_finite("d_omega_ac", d_omega_ac)?;
        ensure_finite("delta", delta)?;
        let scale = d_omega.abs().max(d_omega_ac.abs()).max(2.0 * delta.abs());
        let mismatch = (d_omega - d_omega_ac - 2.0 * delta).abs();
        if mismatch > DETUNING_TOL * scale {
            return Err(Error::invalid(
                "delta",
                format!("d_omega - d_omega_ac = {} but 2*delta = {}", d_omega - d_omega_ac, 2.0 * delta),
            ));
        }
        Ok(DetuningConfig {
            d_omega,
            d_omega_ac,
            delta,
        })
    }

    /// Derives the pump half-detuning from the signal detunings.
    pub fn from_signal(d_omega: f64, d_omega_ac: f64) -> Result<Self> {
        Self::new(d_omega, d_omega_ac, 0.5 * (d_omega - d_omega_ac))
    }

    pub fn resonant() -> Self {
        Self::default()
    }
}

/// Pump photon number and the equivalent normalized strength
/// `eps = |g0|^2 Np / (kappa0 Gamma0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpStrength {
    pub np: f64,
    pub epsilon_norm: f64,
}

impl PumpStrength {
    pub fn from_np(np: f64, g0: f64, kappa0: f64, gamma0: f64) -> Result<Self> {
        ensure_nonnegative("np", np)?;
        ensure_positive("kappa0", kappa0)?;
        ensure_positive("gamma0", gamma0)?;
        ensure_finite("g0", g0)?;
        Ok(PumpStrength {
            np,
            epsilon_norm: g0 * g0 * np / (kappa0 * gamma0),
        })
    }

    pub fn from_epsilon(epsilon_norm: f64, g0: f64, kappa0: f64, gamma0: f64) -> Result<Self> {
        ensure_nonnegative("epsilon_norm", epsilon_norm)?;
        ensure_positive("kappa0", kappa0)?;
        ensure_positive("gamma0", gamma0)?;
        ensure_positive("g0", g0.abs())?;
        Ok(PumpStrength {
            np: epsilon_norm * kappa0 * gamma0 / (g0 * g0),
            epsilon_norm,
        })
    }
}

/// Complex 2x2 scattering matrix with derived power ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterResult {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
    /// `|S12|^2`.
    pub efficiency: f64,
    /// `|S11|^2`.
    pub refl_opt: f64,
    /// `|S22|^2`.
    pub refl_ac: f64,
}

impl ScatterResult {
    fn from_entries(s11: Complex64, s12: Complex64, s21: Complex64, s22: Complex64) -> Self {
        ScatterResult {
            s11,
            s12,
            s21,
            s22,
            efficiency: s12.norm_sqr(),
            refl_opt: s11.norm_sqr(),
            refl_ac: s22.norm_sqr(),
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.s11, self.s12], [self.s21, self.s22]]
    }

    /// Largest entry-wise deviation of `S^dagger S` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let s = self.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let e: Complex64 = (0..2).map(|k| s[k][i].conj() * s[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((e - target).norm());
            }
        }
        worst
    }
}

/// Common denominator, rejecting values indistinguishable from zero.
pub(crate) fn denominator(
    d_omega: f64,
    kappa: f64,
    d_omega_ac: f64,
    gamma: f64,
    coupling_sq: f64,
) -> Result<Complex64> {
    let d = Complex64::new(d_omega, kappa) * Complex64::new(d_omega_ac, gamma) - coupling_sq;
    let scale = (d_omega.abs() + kappa) * (d_omega_ac.abs() + gamma.abs()) + coupling_sq;
    if d.norm().is_nan() || d.norm() <= 1e-14 * scale {
        return Err(Error::SingularDenominator {
            magnitude: d.norm(),
            d_omega,
            d_big_omega: d_omega_ac,
            kappa,
            gamma,
            coupling_sq,
        });
    }
    Ok(d)
}

/// Beam-splitter scattering matrix for effective coupling `G = g0 sqrt(Np)`.
pub fn smatrix_for_coupling(
    spec: &ResonatorSpec,
    det: &DetuningConfig,
    coupling: Complex64,
) -> Result<ScatterResult> {
    spec.validate()?;
    let (kappa, gamma) = (spec.kappa(), spec.gamma());
    let d = denominator(
        det.d_omega,
        kappa,
        det.d_omega_ac,
        gamma,
        coupling.norm_sqr(),
    )?;
    let i = Complex64::i();
    let one = Complex64::from(1.0);
    let root = (spec.kappa0 * spec.gamma0).sqrt();
    let s11 = one - 2.0 * i * spec.kappa0 * Complex64::new(det.d_omega_ac, gamma) / d;
    let s22 = one - 2.0 * i * spec.gamma0 * Complex64::new(det.d_omega, kappa) / d;
    let s12 = 2.0 * i * coupling * root / d;
    let s21 = 2.0 * i * coupling.conj() * root / d;
    Ok(ScatterResult::from_entries(s11, s12, s21, s22))
}

/// Beam-splitter scattering matrix for vacuum coupling `g0` and pump photon
/// number `np`.
pub fn smatrix(
    spec: &ResonatorSpec,
    det: &DetuningConfig,
    g0: impl Into<Complex64>,
    np: f64,
) -> Result<ScatterResult> {
    ensure_nonnegative("np", np)?;
    smatrix_for_coupling(spec, det, g0.into() * np.sqrt())
}

/// Lossless on-resonance efficiency `4 eps / (1 + eps)^2`.
pub fn efficiency_on_resonance(epsilon_norm: f64) -> Result<f64> {
    ensure_nonnegative("epsilon_norm", epsilon_norm)?;
    Ok(4.0 * epsilon_norm / ((1.0 + epsilon_norm) * (1.0 + epsilon_norm)))
}

/// Detunings giving zero optical reflection at `eps >= 1` (lossless):
/// `dw = kappa0 sqrt(eps - 1)`, `dW = (Gamma0/kappa0) dw`.
pub fn full_conversion_detunings(epsilon_norm: f64, kappa0: f64, gamma0: f64) -> Result<DetuningConfig> {
    ensure_finite("epsilon_norm", epsilon_norm)?;
    ensure_positive("kappa0", kappa0)?;
    ensure_nonnegative("gamma0", gamma0)?;
    if epsilon_norm < 1.0 {
        return Err(Error::invalid(
            "epsilon_norm",
            format!("full conversion needs eps >= 1, got {epsilon_norm}"),
        ));
    }
    let d_omega = kappa0 * (epsilon_norm - 1.0).sqrt();
    DetuningConfig::from_signal(d_omega, gamma0 / kappa0 * d_omega)
}

/// Detuning policy applied at every point of an efficiency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPolicy {
    /// All detunings zero.
    Resonant,
    Fixed(DetuningConfig),
    /// `dw = kappa0`, `dW = Gamma0`, `delta = (kappa0 - Gamma0)/2`.
    SidebandMatched,
    /// `delta = 0`, `dw = dW = Gamma0`.
    CommonDetuning,
}

impl SweepPolicy {
    pub fn detunings(&self, spec: &ResonatorSpec) -> Result<DetuningConfig> {
        match *self {
            SweepPolicy::Resonant => Ok(DetuningConfig::resonant()),
            SweepPolicy::Fixed(det) => DetuningConfig::new(det.d_omega, det.d_omega_ac, det.delta),
            SweepPolicy::SidebandMatched => {
                DetuningConfig::new(spec.kappa0, spec.gamma0, 0.5 * (spec.kappa0 - spec.gamma0))
            }
            SweepPolicy::CommonDetuning => DetuningConfig::new(spec.gamma0, spec.gamma0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub efficiency: f64,
    pub refl_opt: f64,
    pub refl_ac: f64,
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

/// Evenly spaced grid; a degenerate range yields a single point.
pub fn epsilon_grid(eps_min: f64, eps_max: f64, steps: usize) -> Result<Vec<f64>> {
    ensure_nonnegative("eps_min", eps_min)?;
    ensure_nonnegative("eps_max", eps_max)?;
    if eps_max < eps_min {
        return Err(Error::invalid("eps_max", format!("{eps_max} < eps_min {eps_min}")));
    }
    if eps_max == eps_min {
        return Ok(vec![eps_min]);
    }
    if steps < 2 {
        return Err(Error::invalid("steps", format!("need at least 2, got {steps}")));
    }
    let span = eps_max - eps_min;
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|i| eps_min + span * i as f64 / last).collect())
}

/// Efficiency and reflections versus normalized pump strength. Each row uses
/// a real coupling `G = sqrt(eps kappa0 Gamma0)`.
pub fn sweep(
    spec: &ResonatorSpec,
    policy: SweepPolicy,
    eps_min: f64,
    eps_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    ensure_positive("kappa0", spec.kappa0)?;
    ensure_positive("gamma0", spec.gamma0)?;
    let det = policy.detunings(spec)?;
    let grid = epsilon_grid(eps_min, eps_max, steps)?;
    exec.map(&grid, |&eps| {
        let coupling = Complex64::from((eps * spec.kappa0 * spec.gamma0).sqrt());
        let s = smatrix_for_coupling(spec, &det, coupling)?;
        Ok(SweepRow {
            epsilon: eps,
            efficiency: s.efficiency,
            refl_opt: s.refl_opt,
            refl_ac: s.refl_ac,
            s11: s.s11,
            s12: s.s12,
            s21: s.s21,
            s22: s.s22,
        })
    })
    .into_iter()
    .collect()
}

/// CSV with header `epsilon,efficiency,refl_opt,refl_ac`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "efficiency", "refl_opt", "refl_ac"])?;
    for r in rows {
        w.serialize((r.epsilon, r.efficiency, r.refl_opt, r.refl_ac))?;
    }
    w.flush()?;
    Ok(())
}

/// JSON array of rows with complex entries as `[re, im]` pairs.
pub fn write_sweep_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}
