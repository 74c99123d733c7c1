//! Mean-field integration of the beam-splitter Langevin equations.
//!
//! ```text
//! a' = (i dw - kappa) a + i G b  - i sqrt(2 kappa0) a_in(t)
//! b' = (i dW - Gamma) b + i G* a - i sqrt(2 Gamma0) c_in(t)
//! ```
//!
//! integrated with fixed-step classical RK4 in the rotating frame. Outputs
//! follow `a_out = a_in - i sqrt(2 kappa0) a`, `c_out = c_in - i sqrt(2 Gamma0) b`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_nonnegative, ensure_positive};
use crate::scattering::{DetuningConfig, ResonatorSpec};
use crate::{Error, Execution, Result};

/// `dt` must stay below this fraction of the fastest rate's period scale.
pub const RESOLUTION_FACTOR: f64 = 0.1;

type State = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    OpticalIn,
    MicrowaveIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DriveKind {
    Off,
    Constant { amplitude: Complex64 },
    /// `amplitude * exp(-i detuning t)`.
    Tone { amplitude: Complex64, detuning: f64 },
    /// Constant amplitude on `[t_on, t_off)`, zero elsewhere.
    Pulse { amplitude: Complex64, t_on: f64, t_off: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    #[serde(flatten)]
    pub kind: DriveKind,
    pub port: Port,
}

fn ensure_complex(name: &'static str, z: Complex64) -> Result<()> {
    ensure_finite(name, z.re)?;
    ensure_finite(name, z.im)?;
    Ok(())
}

impl DriveSignal {
    pub fn new(kind: DriveKind, port: Port) -> Result<Self> {
        let d = DriveSignal { kind, port };
        d.validate()?;
        Ok(d)
    }

    pub fn constant(port: Port, amplitude: impl Into<Complex64>) -> Self {
        DriveSignal {
            kind: DriveKind::Constant {
                amplitude: amplitude.into(),
            },
            port,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DriveKind::Off => Ok(()),
            DriveKind::Constant { amplitude } => ensure_complex("amplitude", amplitude),
            DriveKind::Tone { amplitude, detuning } => {
                ensure_complex("amplitude", amplitude)?;
                ensure_finite("detuning", detuning)?;
                Ok(())
            }
            DriveKind::Pulse { amplitude, t_on, t_off } => {
                ensure_complex("amplitude", amplitude)?;
                ensure_finite("t_on", t_on)?;
                ensure_finite("t_off", t_off)?;
                if t_on >= t_off {
                    return Err(Error::invalid("t_on", format!("{t_on} is not before t_off {t_off}")));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        match self.kind {
            DriveKind::Off => Complex64::from(0.0),
            DriveKind::Constant { amplitude } => amplitude,
            DriveKind::Tone { amplitude, detuning } => amplitude * Complex64::from_polar(1.0, -detuning * t),
            DriveKind::Pulse { amplitude, t_on, t_off } => {
                if (t_on..t_off).contains(&t) {
                    amplitude
                } else {
                    Complex64::from(0.0)
                }
            }
        }
    }

    fn rate(&self) -> f64 {
        match self.kind {
            DriveKind::Tone { detuning, .. } => detuning.abs(),
            _ => 0.0,
        }
    }
}

/// Coefficients of the homogeneous-plus-driven linear system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinModel {
    pub d_omega: f64,
    pub d_omega_ac: f64,
    pub kappa: f64,
    pub kappa0: f64,
    pub gamma: f64,
    pub gamma0: f64,
    /// Effective coupling `g0 sqrt(Np)`.
    pub coupling: Complex64,
}

impl LangevinModel {
    pub fn new(spec: &ResonatorSpec, det: &DetuningConfig, g0: impl Into<Complex64>, np: f64) -> Result<Self> {
        spec.validate()?;
        ensure_nonnegative("np", np)?;
        let g0 = g0.into();
        ensure_complex("g0", g0)?;
        Ok(LangevinModel {
            d_omega: det.d_omega,
            d_omega_ac: det.d_omega_ac,
            kappa: spec.kappa(),
            kappa0: spec.kappa0,
            gamma: spec.gamma(),
            gamma0: spec.gamma0,
            coupling: g0 * np.sqrt(),
        })
    }

    /// Fastest rate that the time step has to resolve.
    pub fn max_rate(&self) -> f64 {
        [
            self.kappa,
            self.gamma,
            self.coupling.norm(),
            self.d_omega.abs(),
            self.d_omega_ac.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Largest admissible step (exclusive) for this model and drives.
    pub fn step_limit(&self, drives: &[DriveSignal]) -> f64 {
        let fastest = drives.iter().map(DriveSignal::rate).fold(self.max_rate(), f64::max);
        RESOLUTION_FACTOR / fastest
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let p = Complex64::new(self.d_omega, -self.kappa);
        let q = Complex64::new(self.d_omega_ac, -self.gamma);
        let mean = (p + q) * 0.5;
        let half = (p - q) * 0.5;
        let root = (half * half + self.coupling.norm_sqr()).sqrt();
        [mean + root, mean - root]
    }

    /// Smallest decay rate among the two normal modes.
    pub fn slowest_decay(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|l| -l.im)
            .fold(f64::INFINITY, f64::min)
    }

    fn derivative(&self, x: &State, a_in: Complex64, c_in: Complex64) -> State {
        let i = Complex64::i();
        [
            Complex64::new(-self.kappa, self.d_omega) * x[0] + i * self.coupling * x[1]
                - i * (2.0 * self.kappa0).sqrt() * a_in,
            Complex64::new(-self.gamma, self.d_omega_ac) * x[1] + i * self.coupling.conj() * x[0]
                - i * (2.0 * self.gamma0).sqrt() * c_in,
        ]
    }

    fn outputs(&self, x: &State, a_in: Complex64, c_in: Complex64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        (
            a_in - i * (2.0 * self.kappa0).sqrt() * x[0],
            c_in - i * (2.0 * self.gamma0).sqrt() * x[1],
        )
    }
}

/// Normal-mode eigenfrequencies of the undriven system.
///
/// Returned as `lambda = Re - i decay`; the mode amplitudes evolve as
/// `exp(i conj(lambda) t)`, i.e. they rotate at `+Re(lambda)` and decay at
/// `-Im(lambda)`. For zero coupling this is `(dw - i kappa, dW - i Gamma)`.
pub fn hybrid_eigenvalues(
    spec: &ResonatorSpec,
    det: &DetuningConfig,
    g0: impl Into<Complex64>,
    np: f64,
) -> Result<[Complex64; 2]> {
    Ok(LangevinModel::new(spec, det, g0, np)?.eigenvalues())
}

/// Time series of the intracavity and output fields.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub times: Vec<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub a_out: Vec<Complex64>,
    pub c_out: Vec<Complex64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, x: &State, outs: (Complex64, Complex64)) {
        self.times.push(t);
        self.a.push(x[0]);
        self.b.push(x[1]);
        self.a_out.push(outs.0);
        self.c_out.push(outs.1);
    }

    /// `|a|^2 + |b|^2` at every sample.
    pub fn total_quanta(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    /// CSV with columns `t,re_a,im_a,re_b,im_b,re_aout,im_aout,re_cout,im_cout`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t", "re_a", "im_a", "re_b", "im_b", "re_aout", "im_aout", "re_cout", "im_cout",
        ])?;
        for k in 0..self.len() {
            let (a, b, ao, co) = (self.a[k], self.b[k], self.a_out[k], self.c_out[k]);
            w.serialize((self.times[k], a.re, a.im, b.re, b.im, ao.re, ao.im, co.re, co.im))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run settings for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Total duration, s.
    pub t_end: f64,
    /// Fixed step, s.
    pub dt: f64,
    /// Initial `(a, b)`.
    pub initial: [Complex64; 2],
    /// Keep every n-th step (the final state is always kept).
    pub record_every: usize,
}

impl IntegrationOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        IntegrationOptions {
            t_end,
            dt,
            initial: [Complex64::from(0.0); 2],
            record_every: 1,
        }
    }

    pub fn with_initial(mut self, a: impl Into<Complex64>, b: impl Into<Complex64>) -> Self {
        self.initial = [a.into(), b.into()];
        self
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }
}

fn drive_sum(drives: &[DriveSignal], port: Port, t: f64) -> Complex64 {
    drives.iter().filter(|d| d.port == port).map(|d| d.value(t)).sum()
}

impl LangevinModel {
    /// Fixed-step RK4 integration from `opts.initial` over `[0, t_end]`.
    pub fn integrate(&self, drives: &[DriveSignal], opts: &IntegrationOptions) -> Result<Trace> {
        ensure_positive("t_end", opts.t_end)?;
        ensure_positive("dt", opts.dt)?;
        if opts.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        for d in drives {
            d.validate()?;
        }
        for z in opts.initial {
            ensure_complex("initial", z)?;
        }
        let limit = self.step_limit(drives);
        if opts.dt >= limit {
            return Err(Error::StepTooLarge { dt: opts.dt, limit });
        }
        let steps = (opts.t_end / opts.dt - 1e-9).ceil().max(1.0) as usize;
        let dt = opts.dt;
        let inputs = |t: f64| (drive_sum(drives, Port::OpticalIn, t), drive_sum(drives, Port::MicrowaveIn, t));
        let f = |t: f64, x: &State| {
            let (ai, ci) = inputs(t);
            self.derivative(x, ai, ci)
        };
        let axpy = |x: &State, h: f64, k: &State| [x[0] + k[0] * h, x[1] + k[1] * h];

        let mut trace = Trace::default();
        let mut x = opts.initial;
        let (ai, ci) = inputs(0.0);
        trace.push(0.0, &x, self.outputs(&x, ai, ci));
        for step in 1..=steps {
            let t = (step - 1) as f64 * dt;
            let k1 = f(t, &x);
            let k2 = f(t + 0.5 * dt, &axpy(&x, 0.5 * dt, &k1));
            let k3 = f(t + 0.5 * dt, &axpy(&x, 0.5 * dt, &k2));
            let k4 = f(t + dt, &axpy(&x, dt, &k3));
            for j in 0..2 {
                x[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0);
            }
            let t_next = step as f64 * dt;
            if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite { time: t_next });
            }
            if step % opts.record_every == 0 || step == steps {
                let (ai, ci) = inputs(t_next);
                trace.push(t_next, &x, self.outputs(&x, ai, ci));
            }
        }
        Ok(trace)
    }

    /// Drives each port in turn with a unit constant input from the empty
    /// state and reads the outputs at `t_settle`. Returns `S[out][in]`.
    pub fn settled_transfer(&self, t_settle: f64, dt: f64) -> Result<[[Complex64; 2]; 2]> {
        let mut s = [[Complex64::from(0.0); 2]; 2];
        for (col, port) in [Port::OpticalIn, Port::MicrowaveIn].into_iter().enumerate() {
            let drive = [DriveSignal::constant(port, 1.0)];
            let opts = IntegrationOptions::new(t_settle, dt).with_record_every(usize::MAX);
            let trace = self.integrate(&drive, &opts)?;
            let last = trace.len() - 1;
            s[0][col] = trace.a_out[last];
            s[1][col] = trace.c_out[last];
        }
        Ok(s)
    }

    /// Settling time after which transients have decayed by `exp(-e_folds)`.
    pub fn settle_time(&self, e_folds: f64) -> Result<f64> {
        let decay = self.slowest_decay();
        if decay.is_nan() || decay <= 0.0 {
            return Err(Error::invalid("spec", "undamped normal mode never settles"));
        }
        Ok(e_folds / decay)
    }
}

/// Integrates the Langevin pair for a resonator, detunings and pump.
pub fn integrate(
    spec: &ResonatorSpec,
    det: &DetuningConfig,
    g0: impl Into<Complex64>,
    np: f64,
    drives: &[DriveSignal],
    opts: &IntegrationOptions,
) -> Result<Trace> {
    LangevinModel::new(spec, det, g0, np)?.integrate(drives, opts)
}

/// Integrates many independent runs, output in input order.
pub fn integrate_batch(
    runs: &[(LangevinModel, Vec<DriveSignal>, IntegrationOptions)],
    exec: Execution,
) -> Vec<Result<Trace>> {
    exec.map(runs, |(model, drives, opts)| model.integrate(drives, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::smatrix_for_coupling;
    use approx::assert_relative_eq;

    fn lossless(k0: f64, g0: f64) -> ResonatorSpec {
        ResonatorSpec::from_rates(k0, 0.0, g0, 0.0).unwrap()
    }

    #[test]
    fn undriven_lossless_conserves_quanta() {
        let spec = ResonatorSpec::from_rates(0.0, 0.0, 0.0, 0.0).unwrap();
        let det = DetuningConfig::from_signal(0.3, -0.2).unwrap();
        let g = 1.0;
        let opts = IntegrationOptions::new(20.0 * std::f64::consts::PI, 0.005).with_initial(1.0, 0.0);
        let trace = integrate(&spec, &det, g, 1.0, &[], &opts).unwrap();
        for q in trace.total_quanta() {
            assert!((q - 1.0).abs() < 1e-8, "{q}");
        }
        // Quanta actually move into the acoustic mode.
        assert!(trace.b.iter().any(|b| b.norm_sqr() > 0.5));
    }

    #[test]
    fn resonant_full_conversion_in_time_domain() {
        let spec = lossless(1.0, 1.0);
        let model = LangevinModel::new(&spec, &DetuningConfig::resonant(), 1.0, 1.0).unwrap();
        let drive = [DriveSignal::constant(Port::OpticalIn, 1.0)];
        let trace = model.integrate(&drive, &IntegrationOptions::new(20.0, 0.01)).unwrap();
        let last = trace.len() - 1;
        assert_relative_eq!(trace.c_out[last].norm(), 1.0, epsilon = 1e-6);
        assert!(trace.a_out[last].norm() < 1e-6);
    }

    #[test]
    fn damped_rabi_oscillation() {
        let kappa = 0.05;
        let spec = ResonatorSpec::from_rates(kappa, 0.0, kappa, 0.0).unwrap();
        let g = 2.0;
        let opts = IntegrationOptions::new(10.0, 0.002).with_initial(1.0, 0.0);
        let trace = integrate(&spec, &DetuningConfig::resonant(), g, 1.0, &[], &opts).unwrap();
        for (t, a) in trace.times.iter().zip(&trace.a) {
            // |a|^2 = cos^2(G t) e^{-2 kappa t} = (1 + cos 2Gt)/2 e^{-2 kappa t}
            let expected = (g * t).cos().powi(2) * (-2.0 * kappa * t).exp();
            assert!((a.norm_sqr() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let spec = ResonatorSpec::from_rates(0.3, 0.1, 0.2, 0.05).unwrap();
        let det = DetuningConfig::from_signal(1.5, -0.5).unwrap();
        let l = hybrid_eigenvalues(&spec, &det, 0.0, 1.0).unwrap();
        let mut got = [(l[0].re, l[0].im), (l[1].re, l[1].im)];
        got.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(got, [(-0.5, -0.25), (1.5, -0.4)]);

        let spec = ResonatorSpec::from_rates(0.7, 0.0, 0.7, 0.0).unwrap();
        let l = hybrid_eigenvalues(&spec, &DetuningConfig::resonant(), 0.5, 4.0).unwrap();
        assert!((l[0] - Complex64::new(1.0, -0.7)).norm() < 1e-14);
        assert!((l[1] - Complex64::new(-1.0, -0.7)).norm() < 1e-14);

        let spec = ResonatorSpec::from_rates(2.0, 0.0, 0.5, 0.0).unwrap();
        let l = hybrid_eigenvalues(&spec, &DetuningConfig::resonant(), 0.7, 1.0).unwrap();
        assert!(l.iter().all(|z| z.re.abs() < 1e-14));
        assert!(l.iter().all(|z| z.im < 0.0));
    }

    #[test]
    fn step_guard_and_errors() {
        let spec = lossless(1.0, 1.0);
        let det = DetuningConfig::resonant();
        let err = integrate(&spec, &det, 1.0, 1.0, &[], &IntegrationOptions::new(1.0, 0.1)).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }));
        let tone = DriveSignal::new(
            DriveKind::Tone { amplitude: 1.0.into(), detuning: 100.0 },
            Port::OpticalIn,
        )
        .unwrap();
        assert!(integrate(&spec, &det, 1.0, 1.0, &[tone], &IntegrationOptions::new(1.0, 0.01)).is_err());
        assert!(integrate(&spec, &det, 1.0, 1.0, &[], &IntegrationOptions::new(0.0, 0.01)).is_err());
        let bad_pulse = DriveSignal::new(
            DriveKind::Pulse { amplitude: 1.0.into(), t_on: 2.0, t_off: 1.0 },
            Port::MicrowaveIn,
        );
        assert!(bad_pulse.is_err());
        let opts = IntegrationOptions::new(1.0, 0.01).with_initial(f64::NAN, 0.0);
        assert!(integrate(&spec, &det, 1.0, 1.0, &[], &opts).is_err());
    }

    #[test]
    fn pulse_and_tone_values() {
        let p = DriveSignal::new(
            DriveKind::Pulse { amplitude: 2.0.into(), t_on: 1.0, t_off: 2.0 },
            Port::OpticalIn,
        )
        .unwrap();
        assert_eq!(p.value(0.5), Complex64::from(0.0));
        assert_eq!(p.value(1.5), Complex64::from(2.0));
        assert_eq!(p.value(2.0), Complex64::from(0.0));
        let tone = DriveSignal::new(
            DriveKind::Tone { amplitude: 1.0.into(), detuning: 2.0 },
            Port::OpticalIn,
        )
        .unwrap();
        assert!((tone.value(0.25) - Complex64::from_polar(1.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn settled_transfer_matches_scattering() {
        let spec = ResonatorSpec::from_rates(1.0, 0.1, 0.6, 0.02).unwrap();
        let det = DetuningConfig::from_signal(0.4, -0.3).unwrap();
        let g = Complex64::from_polar(0.9, 0.4);
        let model = LangevinModel::new(&spec, &det, g, 1.0).unwrap();
        let dt = 0.5 * model.step_limit(&[]);
        let s = model.settled_transfer(model.settle_time(30.0).unwrap(), dt).unwrap();
        let f = smatrix_for_coupling(&spec, &det, g).unwrap().matrix();
        for r in 0..2 {
            for c in 0..2 {
                assert!((s[r][c] - f[r][c]).norm() <= 1e-5 * f[r][c].norm().max(1e-3));
            }
        }
    }

    #[test]
    fn halving_step_converges() {
        let spec = ResonatorSpec::from_rates(0.4, 0.0, 0.3, 0.0).unwrap();
        let det = DetuningConfig::from_signal(0.2, 0.1).unwrap();
        let drive = [DriveSignal::new(
            DriveKind::Tone { amplitude: 1.0.into(), detuning: 0.7 },
            Port::MicrowaveIn,
        )
        .unwrap()];
        let run = |dt: f64| {
            let t = integrate(&spec, &det, 0.8, 1.0, &drive, &IntegrationOptions::new(8.0, dt)).unwrap();
            let k = t.len() - 1;
            (t.a[k], t.b[k])
        };
        let (a1, b1) = run(0.01);
        let (a2, b2) = run(0.005);
        let scale = (a1.norm_sqr() + b1.norm_sqr()).sqrt();
        let diff = ((a1 - a2).norm_sqr() + (b1 - b2).norm_sqr()).sqrt();
        assert!(diff / scale < 1e-7, "{}", diff / scale);
    }

    #[test]
    fn record_every_keeps_final_sample() {
        let spec = lossless(1.0, 1.0);
        let opts = IntegrationOptions::new(1.0, 0.01).with_record_every(30);
        let t = integrate(&spec, &DetuningConfig::resonant(), 0.5, 1.0, &[], &opts).unwrap();
        // t = 0, 0.3, 0.6, 0.9 and the final 1.0
        assert_eq!(t.len(), 5);
        assert!(t.times.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(*t.times.last().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_csv_header() {
        let spec = lossless(1.0, 1.0);
        let t = integrate(&spec, &DetuningConfig::resonant(), 0.5, 1.0, &[], &IntegrationOptions::new(0.05, 0.01)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,re_a,im_a,re_b,im_b,re_aout,im_aout,re_cout,im_cout\n"));
        assert_eq!(text.lines().count(), t.len() + 1);
    }

    #[test]
    fn batch_is_deterministic() {
        let spec = lossless(1.0, 0.5);
        let model = LangevinModel::new(&spec, &DetuningConfig::resonant(), 0.7, 1.0).unwrap();
        let runs: Vec<_> = (0..8)
            .map(|k| {
                (
                    model,
                    vec![DriveSignal::constant(Port::OpticalIn, k as f64)],
                    IntegrationOptions::new(2.0, 0.01),
                )
            })
            .collect();
        let par: Vec<Trace> = integrate_batch(&runs, Execution::Parallel).into_iter().map(|r| r.unwrap()).collect();
        let seq: Vec<Trace> = integrate_batch(&runs, Execution::Sequential).into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(par, seq);
    }
}
