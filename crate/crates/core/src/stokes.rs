//! The Stokes (parametric-amplifier) channel and sideband resolution.
//!
//! Pumping on the blue side couples the signal to the conjugate acoustic
//! field. With `x = (a, b^dagger)` the steady state obeys
//!
//! ```text
//! (dw + i kappa) a      + G  b^dagger = sqrt(2 kappa0) a_in
//! G* a + (dW - i Gamma) b^dagger      = sqrt(2 Gamma0) c_in^dagger
//! ```
//!
//! and the Bogoliubov coefficients follow from the same input-output
//! relations as the anti-Stokes channel. `Ds = (dw + i kappa)(dW - i Gamma) - |G|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, ensure_positive};
use crate::scattering::{denominator, DetuningConfig, ResonatorSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierResult {
    /// Signal reflection gain amplitude `a_out / a_in`.
    pub s11: Complex64,
    /// Idler conversion amplitude `a_out / c_in^dagger`.
    pub s12: Complex64,
    /// `c_out^dagger / a_in`.
    pub s21: Complex64,
    /// `c_out^dagger / c_in^dagger`.
    pub s22: Complex64,
    /// `|S11|^2`.
    pub gain: f64,
    /// `|S12|^2`, dimensionless proxy for spurious pair generation.
    pub pair_rate_proxy: f64,
}

impl AmplifierResult {
    /// `|S11|^2 - |S12|^2`, equal to one for a lossless amplifier.
    pub fn symplectic_form(&self) -> f64 {
        self.gain - self.pair_rate_proxy
    }
}

/// Growth rates of the undriven amplifier; the channel is stable when both
/// are negative.
pub fn amplifier_growth_rates(kappa: f64, gamma: f64, det: &DetuningConfig, coupling_sq: f64) -> [f64; 2] {
    let p = Complex64::new(-kappa, det.d_omega);
    let q = Complex64::new(-gamma, -det.d_omega_ac);
    let mean = (p + q) * 0.5;
    let half = (p - q) * 0.5;
    let root = (half * half + coupling_sq).sqrt();
    [(mean + root).re, (mean - root).re]
}

/// Steady-state Bogoliubov scattering of the Stokes channel.
///
/// Fails with [`Error::ParametricOscillation`] once `|g0|^2 Np >= kappa Gamma`
/// or whenever the detuned system has a growing mode.
pub fn stokes_smatrix(
    spec: &ResonatorSpec,
    det: &DetuningConfig,
    g0: impl Into<Complex64>,
    np: f64,
) -> Result<AmplifierResult> {
    spec.validate()?;
    ensure_nonnegative("np", np)?;
    let coupling = g0.into() * np.sqrt();
    let coupling_sq = coupling.norm_sqr();
    let (kappa, gamma) = (spec.kappa(), spec.gamma());
    let threshold = kappa * gamma;
    let growing = amplifier_growth_rates(kappa, gamma, det, coupling_sq)
        .iter()
        .any(|&r| r >= 0.0);
    if coupling_sq >= threshold || (growing && coupling_sq > 0.0) {
        return Err(Error::ParametricOscillation {
            coupling_sq,
            threshold,
        });
    }
    let d = denominator(det.d_omega, kappa, det.d_omega_ac, -gamma, coupling_sq)?;
    let i = Complex64::i();
    let one = Complex64::from(1.0);
    let root = (spec.kappa0 * spec.gamma0).sqrt();
    let s11 = one - 2.0 * i * spec.kappa0 * Complex64::new(det.d_omega_ac, -gamma) / d;
    let s12 = 2.0 * i * coupling * root / d;
    let s21 = -2.0 * i * coupling.conj() * root / d;
    let s22 = one + 2.0 * i * spec.gamma0 * Complex64::new(det.d_omega, kappa) / d;
    Ok(AmplifierResult {
        s11,
        s12,
        s21,
        s22,
        gain: s11.norm_sqr(),
        pair_rate_proxy: s12.norm_sqr(),
    })
}

/// Pump photon number at which the Stokes channel starts to oscillate,
/// `kappa Gamma / g0^2`.
pub fn oscillation_threshold(kappa: f64, gamma: f64, g0: f64) -> Result<f64> {
    ensure_nonnegative("kappa", kappa)?;
    ensure_nonnegative("gamma", gamma)?;
    if g0 == 0.0 {
        return Err(Error::invalid("g0", "zero coupling: the threshold is infinite"));
    }
    ensure_positive("g0", g0.abs())?;
    Ok(kappa * gamma / (g0 * g0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandReport {
    /// `kappa < 2 Omega`.
    pub resolved: bool,
    /// `2 Omega / kappa`.
    pub margin: f64,
    /// Lowest optical Q that resolves the sideband, `omega_s / (2 Omega)`.
    pub qopt_bound: f64,
}

pub fn sideband_resolution(kappa: f64, omega_ac: f64, omega_s: f64) -> Result<SidebandReport> {
    ensure_positive("kappa", kappa)?;
    ensure_positive("omega_ac", omega_ac)?;
    ensure_positive("omega_s", omega_s)?;
    Ok(SidebandReport {
        resolved: kappa < 2.0 * omega_ac,
        margin: 2.0 * omega_ac / kappa,
        qopt_bound: omega_s / (2.0 * omega_ac),
    })
}

/// Stokes-channel summary for a resonator at a given pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    pub resolved: bool,
    pub margin: f64,
    pub qopt_bound: f64,
    pub threshold_np: f64,
    pub gain_at_operating_point: f64,
}

pub fn stokes_report(spec: &ResonatorSpec, det: &DetuningConfig, g0: f64, np: f64) -> Result<StokesReport> {
    let sb = sideband_resolution(spec.kappa(), spec.omega_ac, spec.omega_s)?;
    let threshold_np = oscillation_threshold(spec.kappa(), spec.gamma(), g0)?;
    let amp = stokes_smatrix(spec, det, g0, np)?;
    Ok(StokesReport {
        resolved: sb.resolved,
        margin: sb.margin,
        qopt_bound: sb.qopt_bound,
        threshold_np,
        gain_at_operating_point: amp.gain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::smatrix;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lossless(k0: f64, g0: f64) -> ResonatorSpec {
        ResonatorSpec::from_rates(k0, 0.0, g0, 0.0).unwrap()
    }

    /// Coupling that gives normalized strength `eps` with `Np = 1`.
    fn g_for(eps: f64, spec: &ResonatorSpec) -> f64 {
        (eps * spec.kappa0 * spec.gamma0).sqrt()
    }

    /// Linear solve for (a, b^dagger) with both inputs, independent of the
    /// closed forms.
    fn oracle(spec: &ResonatorSpec, det: &DetuningConfig, g: Complex64) -> [[Complex64; 2]; 2] {
        let i = Complex64::i();
        let m = [
            [Complex64::new(det.d_omega, spec.kappa()), g],
            [g.conj(), Complex64::new(det.d_omega_ac, -spec.gamma())],
        ];
        let dm = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv = [[m[1][1] / dm, -m[0][1] / dm], [-m[1][0] / dm, m[0][0] / dm]];
        let gains = [(2.0 * spec.kappa0).sqrt(), (2.0 * spec.gamma0).sqrt()];
        // a_out = a_in - i g_a a ; c_out^dagger = c_in^dagger + i g_c b^dagger
        let signs = [-i, i];
        let mut s = [[Complex64::from(0.0); 2]; 2];
        for out in 0..2 {
            for inp in 0..2 {
                let direct = if out == inp { 1.0 } else { 0.0 };
                s[out][inp] = direct + signs[out] * gains[out] * inv[out][inp] * gains[inp];
            }
        }
        s
    }

    #[test]
    fn unpumped_reflects() {
        let spec = lossless(1.0, 0.3);
        let r = stokes_smatrix(&spec, &DetuningConfig::resonant(), 0.0, 0.0).unwrap();
        assert_relative_eq!(r.s11.norm(), 1.0, epsilon = 1e-15);
        assert_eq!(r.s12, Complex64::from(0.0));
    }

    #[test]
    fn half_threshold_closed_form() {
        let spec = lossless(1.0, 1.0);
        let r = stokes_smatrix(&spec, &DetuningConfig::resonant(), g_for(0.5, &spec), 1.0).unwrap();
        assert_relative_eq!(r.gain, 9.0, max_relative = 1e-13);
        assert_relative_eq!(r.pair_rate_proxy, 8.0, max_relative = 1e-13);
        assert_relative_eq!(r.s11.re, -3.0, max_relative = 1e-13);
        assert_relative_eq!(r.symplectic_form(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gain_diverges_at_threshold() {
        let spec = lossless(2.0, 0.5);
        let mut last = 0.0;
        for eps in [0.9, 0.99, 0.999, 0.9999] {
            let r = stokes_smatrix(&spec, &DetuningConfig::resonant(), g_for(eps, &spec), 1.0).unwrap();
            assert!(r.gain > last);
            last = r.gain;
        }
        assert!(last > 1e7);
        let err = stokes_smatrix(&spec, &DetuningConfig::resonant(), g_for(1.0, &spec), 1.0).unwrap_err();
        assert!(matches!(err, Error::ParametricOscillation { .. }));
        assert!(stokes_smatrix(&spec, &DetuningConfig::resonant(), g_for(3.0, &spec), 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(oscillation_threshold(2.5, 2.5, 2.5).unwrap(), 1.0);
        let np = oscillation_threshold(1.215e10, 6.2e6, 2.2e6).unwrap();
        assert_relative_eq!(np, 1.556e4, max_relative = 1e-3);
        let base = oscillation_threshold(3.0, 5.0, 0.7).unwrap();
        assert_relative_eq!(oscillation_threshold(3.0, 5.0, 1.4).unwrap(), base / 4.0, max_relative = 1e-15);
        assert!(oscillation_threshold(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sideband_examples() {
        let r = sideband_resolution(2.0, 1.0, 100.0).unwrap();
        assert!(!r.resolved);
        assert_eq!(r.margin, 1.0);
        let r = sideband_resolution(1.0, 6.2e10, 1.215e15).unwrap();
        assert_relative_eq!(r.qopt_bound, 9.8e3, max_relative = 0.01);
        let r = sideband_resolution(0.1, 1.0, 100.0).unwrap();
        assert!(r.resolved);
        assert_relative_eq!(r.margin, 20.0, max_relative = 1e-15);
        assert!(sideband_resolution(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn report_fields() {
        let spec = ResonatorSpec::new(1.215e15, 6.2e10, 1.215e10, 0.0, 6.2e6, 0.0, 1e-12).unwrap();
        let g0 = 2.2e6;
        let np = 0.5 * oscillation_threshold(spec.kappa(), spec.gamma(), g0).unwrap();
        let rep = stokes_report(&spec, &DetuningConfig::resonant(), g0, np).unwrap();
        assert!(rep.resolved);
        assert_relative_eq!(rep.gain_at_operating_point, 9.0, max_relative = 1e-9);
        let v = serde_json::to_value(rep).unwrap();
        for key in ["resolved", "margin", "qopt_bound", "threshold_np", "gain_at_operating_point"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    fn params() -> impl Strategy<Value = (f64, f64, f64, f64, f64, f64)> {
        (0.1f64..10.0, 0.1f64..10.0, 0.0f64..0.95, -5.0f64..5.0, -5.0f64..5.0, 0.0f64..6.3)
    }

    proptest! {
        #[test]
        fn matches_linear_solve((k0, g0r, eps, dw, dwa, phase) in params()) {
            let spec = ResonatorSpec::from_rates(k0, 0.1 * k0, g0r, 0.2 * g0r).unwrap();
            let det = DetuningConfig::from_signal(dw, dwa).unwrap();
            let g = Complex64::from_polar((eps * spec.kappa() * spec.gamma()).sqrt(), phase);
            let Ok(r) = stokes_smatrix(&spec, &det, g, 1.0) else { return Ok(()) };
            let o = oracle(&spec, &det, g);
            let got = [[r.s11, r.s12], [r.s21, r.s22]];
            for a in 0..2 {
                for b in 0..2 {
                    prop_assert!((got[a][b] - o[a][b]).norm() < 1e-9 * (1.0 + o[a][b].norm()));
                }
            }
        }

        #[test]
        fn lossless_symplectic((k0, g0r, eps, dw, dwa, phase) in params()) {
            let spec = lossless(k0, g0r);
            let det = DetuningConfig::from_signal(dw, dwa).unwrap();
            let g = Complex64::from_polar(g_for(eps, &spec), phase);
            let Ok(r) = stokes_smatrix(&spec, &det, g, 1.0) else { return Ok(()) };
            prop_assert!((r.symplectic_form() - 1.0).abs() < 1e-9 * r.gain.max(1.0));
            prop_assert!((r.s22.norm_sqr() - r.s21.norm_sqr() - 1.0).abs() < 1e-9 * r.gain.max(1.0));
        }

        #[test]
        fn resonant_gain_monotone(a in 0.0f64..0.999, b in 0.0f64..0.999) {
            let spec = lossless(1.3, 0.4);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let glo = stokes_smatrix(&spec, &DetuningConfig::resonant(), g_for(lo, &spec), 1.0).unwrap().gain;
            let ghi = stokes_smatrix(&spec, &DetuningConfig::resonant(), g_for(hi, &spec), 1.0).unwrap().gain;
            prop_assert!(ghi >= glo);
        }

        #[test]
        fn channels_agree_without_pump(k0 in 0.1f64..10.0, g0r in 0.1f64..10.0, dw in -5.0f64..5.0, dwa in -5.0f64..5.0) {
            let spec = lossless(k0, g0r);
            let det = DetuningConfig::from_signal(dw, dwa).unwrap();
            let amp = stokes_smatrix(&spec, &det, 0.0, 0.0).unwrap();
            let bs = smatrix(&spec, &det, 0.0, 0.0).unwrap();
            prop_assert!((amp.s11.norm() - 1.0).abs() < 1e-12);
            prop_assert!((bs.s11.norm() - 1.0).abs() < 1e-12);
        }
    }
}
