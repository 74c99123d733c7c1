//! Pump budget, heat load and feasibility of a transducer design.
//!
//! `q_opt` and `q_ac` are the external (coupling) quality factors, so
//! `kappa0 = omega_s / q_opt` and `Gamma0 = Omega / q_ac`; the `*_int`
//! factors set the intrinsic losses.

use serde::{Deserialize, Serialize};

use crate::coupling::{coupling_for_volume, CouplingResult};
use crate::error::{ensure_nonnegative, ensure_positive};
use crate::quantities::{q_to_rate, units, Material};
use crate::scattering::ResonatorSpec;
use crate::stokes::sideband_resolution;
use crate::{Error, Result};

/// Internal/external loss ratio up to which conversion counts as unitary.
pub const UNITARITY_MARGIN: f64 = 0.1;
pub const DEFAULT_RECYCLING_FACTOR: f64 = 10.0;
/// Default heat budget, uW per um^3 of resonator.
pub const DEFAULT_POWER_BUDGET: f64 = 10.0;

/// Photon number at which `|g0|^2 Np = kappa0 Gamma0`.
pub fn min_pump_photons(kappa0: f64, gamma0: f64, g0: f64) -> Result<f64> {
    ensure_nonnegative("kappa0", kappa0)?;
    ensure_nonnegative("gamma0", gamma0)?;
    if g0 == 0.0 || !g0.is_finite() {
        return Err(Error::invalid("g0", format!("must be finite and nonzero, got {g0}")));
    }
    Ok(kappa0 * gamma0 / (g0 * g0))
}

/// Pump power absorbed by internal optical loss, uW/um^3, for a photon
/// density in 1/um^3.
pub fn dissipated_power_density(np_density: f64, omega_p: f64, kappa_int: f64) -> Result<f64> {
    ensure_nonnegative("np_density", np_density)?;
    ensure_nonnegative("omega_p", omega_p)?;
    ensure_nonnegative("kappa_int", kappa_int)?;
    Ok(units::erg_per_s_to_uw(units::HBAR * omega_p * kappa_int * np_density))
}

/// Quality factors of a resonator. Missing intrinsic factors mean no
/// intrinsic loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QFactors {
    pub q_opt: f64,
    pub q_opt_int: Option<f64>,
    pub q_ac: f64,
    pub q_ac_int: Option<f64>,
}

/// Resonator and uniform-overlap coupling for a material, volume (um^3) and
/// pump wavelength (nm). The signal sits at `omega_p + Omega`.
pub fn build_resonator(
    material: &Material,
    volume_um3: f64,
    wavelength_nm: f64,
    q: &QFactors,
) -> Result<(ResonatorSpec, CouplingResult)> {
    ensure_positive("volume_um3", volume_um3)?;
    ensure_positive("wavelength_nm", wavelength_nm)?;
    let omega_p = units::wavelength_nm_to_omega(wavelength_nm);
    let volume = units::um3_to_cm3(volume_um3);
    let c = coupling_for_volume(material, volume, omega_p)?;
    let intrinsic = |omega: f64, q: Option<f64>| q.map_or(Ok(0.0), |q| q_to_rate(omega, q));
    let spec = ResonatorSpec::new(
        c.omega_s,
        c.omega,
        q_to_rate(c.omega_s, q.q_opt)?,
        intrinsic(c.omega_s, q.q_opt_int)?,
        q_to_rate(c.omega, q.q_ac)?,
        intrinsic(c.omega, q.q_ac_int)?,
        volume,
    )?;
    Ok((spec, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignInputs {
    pub material: Material,
    pub volume_um3: f64,
    pub wavelength_nm: f64,
    pub q_opt: f64,
    pub q_opt_int: f64,
    pub q_ac: f64,
    pub q_ac_int: f64,
    /// Input pump power per unit of intracavity dissipation.
    pub recycling_factor: f64,
    /// Tolerated dissipation, uW/um^3.
    pub power_budget: f64,
}

impl DesignInputs {
    pub fn new(
        material: Material,
        volume_um3: f64,
        wavelength_nm: f64,
        q_opt: f64,
        q_opt_int: f64,
        q_ac: f64,
        q_ac_int: f64,
    ) -> Self {
        DesignInputs {
            material,
            volume_um3,
            wavelength_nm,
            q_opt,
            q_opt_int,
            q_ac,
            q_ac_int,
            recycling_factor: DEFAULT_RECYCLING_FACTOR,
            power_budget: DEFAULT_POWER_BUDGET,
        }
    }

    pub fn with_recycling_factor(mut self, r: f64) -> Self {
        self.recycling_factor = r;
        self
    }

    pub fn with_power_budget(mut self, budget: f64) -> Self {
        self.power_budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        ensure_positive("volume_um3", self.volume_um3)?;
        ensure_positive("wavelength_nm", self.wavelength_nm)?;
        ensure_positive("q_opt", self.q_opt)?;
        ensure_positive("q_opt_int", self.q_opt_int)?;
        ensure_positive("q_ac", self.q_ac)?;
        ensure_positive("q_ac_int", self.q_ac_int)?;
        ensure_positive("recycling_factor", self.recycling_factor)?;
        ensure_positive("power_budget", self.power_budget)?;
        Ok(())
    }

    /// Resonator built from the quality factors (pump on the anti-Stokes
    /// side, signal at `omega_p + Omega`).
    pub fn resonator(&self) -> Result<(ResonatorSpec, CouplingResult)> {
        self.validate()?;
        let q = QFactors {
            q_opt: self.q_opt,
            q_opt_int: Some(self.q_opt_int),
            q_ac: self.q_ac,
            q_ac_int: Some(self.q_ac_int),
        };
        build_resonator(&self.material, self.volume_um3, self.wavelength_nm, &q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginStatus {
    /// Internal loss at most 10% of the engineered coupling.
    Ok,
    Marginal,
    /// Internal loss at least as large as the coupling.
    Violated,
}

impl MarginStatus {
    pub fn classify(ratio: f64) -> Self {
        if ratio <= UNITARITY_MARGIN {
            MarginStatus::Ok
        } else if ratio < 1.0 {
            MarginStatus::Marginal
        } else {
            MarginStatus::Violated
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFlags {
    pub sideband_resolved: bool,
    pub optical_unitarity: MarginStatus,
    pub acoustic_unitarity: MarginStatus,
    pub pump_within_budget: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Marginal,
    Infeasible,
}

impl ConstraintFlags {
    pub fn verdict(&self) -> Verdict {
        use MarginStatus::*;
        let margins = [self.optical_unitarity, self.acoustic_unitarity];
        if !self.sideband_resolved || margins.contains(&Violated) {
            Verdict::Infeasible
        } else if margins.contains(&Marginal) || !self.pump_within_budget {
            Verdict::Marginal
        } else {
            Verdict::Feasible
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// Vacuum coupling rate, rad/s.
    pub g0: f64,
    /// Acoustic frequency, rad/s.
    pub omega_ac: f64,
    pub np_min: f64,
    /// Photons per um^3.
    pub np_density: f64,
    /// uW/um^3.
    pub dissipated_power_density: f64,
    /// uW.
    pub pump_power_estimate: f64,
    /// `(kappa_int/kappa0, Gamma_int/Gamma0)`.
    pub unitarity_margins: (f64, f64),
    pub sideband_resolved: bool,
    pub qopt_bound: f64,
    pub verdict: Verdict,
    pub flags: ConstraintFlags,
}

pub fn feasibility_report(inputs: &DesignInputs) -> Result<FeasibilityReport> {
    let (spec, coupling) = inputs.resonator()?;
    let (g0, omega_p) = (coupling.g0, coupling.omega_p);
    let np_min = min_pump_photons(spec.kappa0, spec.gamma0, g0)?;
    let np_density = np_min / inputs.volume_um3;
    let dissipated = dissipated_power_density(np_density, omega_p, spec.kappa_int)?;
    let pump_power_estimate = dissipated * inputs.volume_um3 * inputs.recycling_factor;
    let margins = (spec.kappa_int / spec.kappa0, spec.gamma_int / spec.gamma0);
    let sideband = sideband_resolution(spec.kappa(), spec.omega_ac, spec.omega_s)?;
    let flags = ConstraintFlags {
        sideband_resolved: sideband.resolved,
        optical_unitarity: MarginStatus::classify(margins.0),
        acoustic_unitarity: MarginStatus::classify(margins.1),
        pump_within_budget: dissipated <= inputs.power_budget,
    };
    Ok(FeasibilityReport {
        g0,
        omega_ac: spec.omega_ac,
        np_min,
        np_density,
        dissipated_power_density: dissipated,
        pump_power_estimate,
        unitarity_margins: margins,
        sideband_resolved: sideband.resolved,
        qopt_bound: sideband.qopt_bound,
        verdict: flags.verdict(),
        flags,
    })
}
