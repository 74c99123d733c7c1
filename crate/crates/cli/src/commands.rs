//! One function per subcommand. Each maps the config onto a single library
//! operation family and returns the rendered artifact.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use sbs_core::coupling::{coupling_for_volume, overlap_integral, vacuum_coupling_rate, CouplingResult, ModeProfileSet};
use sbs_core::design::{build_resonator, feasibility_report, DesignInputs, FeasibilityReport, QFactors};
use sbs_core::dynamics::{DriveKind, DriveSignal, IntegrationOptions, LangevinModel, Port};
use sbs_core::quantities::{bundled_materials, load_material_file, material_lookup, pockels_to_gamma, units, Material};
use sbs_core::scattering::{
    full_conversion_detunings, smatrix, sweep, write_sweep_csv, write_sweep_json, DetuningConfig, PumpStrength,
    ResonatorSpec, SweepPolicy,
};
use sbs_core::stokes::stokes_report;
use sbs_core::Execution;
use serde::Serialize;

use crate::config::{config_error, ConfigError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(sbs_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<sbs_core::Error> for CliError {
    fn from(e: sbs_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Rendered command output plus an optional human-readable table.
pub struct Artifact {
    pub bytes: Vec<u8>,
    pub table: Option<String>,
}

fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(sbs_core::Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Two-row CSV from (header, value) pairs.
fn csv_row(fields: &[(&str, String)]) -> Vec<u8> {
    let header: Vec<&str> = fields.iter().map(|f| f.0).collect();
    let values: Vec<&str> = fields.iter().map(|f| f.1.as_str()).collect();
    format!("{}\n{}\n", header.join(","), values.join(",")).into_bytes()
}

fn complex_fields(name: &str, z: Complex64) -> [(String, String); 2] {
    [(format!("{name}_re"), z.re.to_string()), (format!("{name}_im"), z.im.to_string())]
}

pub fn material(cfg: &RunConfig) -> CliResult<Material> {
    if let Some(name) = cfg.opt_str("material.name")? {
        let mut m = material_lookup(name).map_err(|e| match e {
            sbs_core::Error::UnknownMaterial(_) => CliError::Config(config_error("material.name", e.to_string())),
            other => other.into(),
        })?;
        if let Some(eps) = cfg.opt_f64("material.epsilon")? {
            m = m.with_epsilon(eps)?;
        }
        return Ok(m);
    }
    if !cfg.contains("material.n") {
        return Err(config_error("material.name", "missing required key (or give inline material.n/p/rho/s)").into());
    }
    let n = cfg.f64("material.n")?;
    let p = cfg.f64("material.p")?;
    let mut m = Material::from_pockels("inline", n, p, cfg.positive("material.rho")?, cfg.positive("material.s")?)?;
    if let Some(g) = cfg.opt_f64("material.gamma")? {
        m.gamma = g;
    } else {
        m.gamma = pockels_to_gamma(p, n)?;
    }
    if let Some(eps) = cfg.opt_f64("material.epsilon")? {
        m = m.with_epsilon(eps)?;
    }
    Ok(m)
}

fn q_factors(cfg: &RunConfig) -> CliResult<QFactors> {
    Ok(QFactors {
        q_opt: cfg.positive("losses.q_opt")?,
        q_opt_int: cfg.opt_positive("losses.q_opt_int")?,
        q_ac: cfg.positive("losses.q_ac")?,
        q_ac_int: cfg.opt_positive("losses.q_ac_int")?,
    })
}

fn resonator(cfg: &RunConfig) -> CliResult<(ResonatorSpec, CouplingResult)> {
    let m = material(cfg)?;
    let q = q_factors(cfg)?;
    Ok(build_resonator(
        &m,
        cfg.positive("geometry.volume_um3")?,
        cfg.positive("geometry.lambda_nm")?,
        &q,
    )?)
}

fn pump(cfg: &RunConfig, spec: &ResonatorSpec, g0: f64) -> CliResult<PumpStrength> {
    match (cfg.opt_f64("pump.np")?, cfg.opt_f64("pump.epsilon")?) {
        (Some(_), Some(_)) => Err(config_error("pump.epsilon", "give either pump.np or pump.epsilon, not both").into()),
        (Some(np), None) => Ok(PumpStrength::from_np(np, g0, spec.kappa0, spec.gamma0)?),
        (None, Some(eps)) => Ok(PumpStrength::from_epsilon(eps, g0, spec.kappa0, spec.gamma0)?),
        (None, None) => Err(config_error("pump.np", "missing required key (or pump.epsilon)").into()),
    }
}

const POLICIES: &[&str] = &["resonant", "fixed", "sideband_matched", "common_detuning", "full_conversion"];

fn fixed_detuning(cfg: &RunConfig) -> CliResult<DetuningConfig> {
    let dw = units::ghz_to_rad_per_s(cfg.f64("detuning.d_omega_ghz")?);
    let dwa = units::ghz_to_rad_per_s(cfg.f64("detuning.d_omega_ac_ghz")?);
    let det = match cfg.opt_f64("detuning.delta_ghz")? {
        Some(d) => DetuningConfig::new(dw, dwa, units::ghz_to_rad_per_s(d)),
        None => DetuningConfig::from_signal(dw, dwa),
    };
    det.map_err(|e| config_error("detuning.delta_ghz", e.to_string()).into())
}

fn sweep_policy(cfg: &RunConfig) -> CliResult<SweepPolicy> {
    Ok(match cfg.choice("detuning.policy", &POLICIES[..4], "resonant")? {
        "fixed" => SweepPolicy::Fixed(fixed_detuning(cfg)?),
        "sideband_matched" => SweepPolicy::SidebandMatched,
        "common_detuning" => SweepPolicy::CommonDetuning,
        _ => SweepPolicy::Resonant,
    })
}

fn detuning(cfg: &RunConfig, spec: &ResonatorSpec, strength: &PumpStrength) -> CliResult<DetuningConfig> {
    if cfg.choice("detuning.policy", POLICIES, "resonant")? == "full_conversion" {
        return full_conversion_detunings(strength.epsilon_norm, spec.kappa0, spec.gamma0)
            .map_err(|e| config_error("detuning.policy", e.to_string()).into());
    }
    Ok(sweep_policy(cfg)?.detunings(spec)?)
}

pub fn materials(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let list = match cfg.opt_str("material.name")? {
        Some(path) if Path::new(path).is_file() => load_material_file(Path::new(path))?,
        Some(name) => vec![material(cfg).map_err(|_| config_error("material.name", format!("unknown material `{name}`")))?],
        None => bundled_materials(),
    };
    let bytes = match format {
        Format::Json => json(&list)?,
        Format::Csv => {
            let mut out = String::from("name,n,p,gamma,epsilon,rho,s\n");
            for m in &list {
                out.push_str(&format!("{},{},{},{},{},{},{}\n", m.name, m.n, m.p, m.gamma, m.epsilon, m.rho, m.s));
            }
            out.into_bytes()
        }
    };
    Ok(Artifact { bytes, table: None })
}

pub fn coupling(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let m = material(cfg)?;
    let omega_p = units::wavelength_nm_to_omega(cfg.positive("geometry.lambda_nm")?);
    let result = match cfg.opt_str("coupling.profiles")? {
        Some(path) => {
            let mut profiles = ModeProfileSet::load(Path::new(path))?;
            if let Some(l) = cfg.opt_positive("geometry.length_um")? {
                profiles.length = l * units::CM_PER_UM;
            }
            let overlap = overlap_integral(&profiles, m.gamma)?;
            let reference = coupling_for_volume(&m, 1.0, omega_p)?;
            let g0 = vacuum_coupling_rate(overlap, omega_p, reference.omega_s, reference.omega, &m)?;
            CouplingResult {
                m: overlap,
                g0,
                ..reference
            }
        }
        None => coupling_for_volume(&m, units::um3_to_cm3(cfg.positive("geometry.volume_um3")?), omega_p)?,
    };
    let bytes = match format {
        Format::Json => json(&result)?,
        Format::Csv => csv_row(&[
            ("m", result.m.to_string()),
            ("g0", result.g0.to_string()),
            ("omega", result.omega.to_string()),
            ("omega_p", result.omega_p.to_string()),
            ("omega_s", result.omega_s.to_string()),
        ]),
    };
    Ok(Artifact { bytes, table: None })
}

pub fn smatrix_cmd(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let (spec, c) = resonator(cfg)?;
    let strength = pump(cfg, &spec, c.g0)?;
    let det = detuning(cfg, &spec, &strength)?;
    let s = smatrix(&spec, &det, c.g0, strength.np)?;
    let bytes = match format {
        Format::Json => json(&s)?,
        Format::Csv => {
            let mut fields: Vec<(String, String)> = Vec::new();
            for (name, z) in [("s11", s.s11), ("s12", s.s12), ("s21", s.s21), ("s22", s.s22)] {
                fields.extend(complex_fields(name, z));
            }
            fields.push(("efficiency".into(), s.efficiency.to_string()));
            fields.push(("refl_opt".into(), s.refl_opt.to_string()));
            fields.push(("refl_ac".into(), s.refl_ac.to_string()));
            let borrowed: Vec<(&str, String)> = fields.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            csv_row(&borrowed)
        }
    };
    Ok(Artifact { bytes, table: None })
}

pub fn sweep_cmd(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let (spec, _) = resonator(cfg)?;
    let policy = sweep_policy(cfg)?;
    let eps_min = cfg.f64_or("sweep.eps_min", 0.0)?;
    let eps_max = cfg.f64_or("sweep.eps_max", 6.0)?;
    let steps = cfg.usize_or("sweep.steps", 121)?;
    let rows = sweep(&spec, policy, eps_min, eps_max, steps, Execution::Parallel)?;
    let mut bytes = Vec::new();
    match format {
        Format::Csv => write_sweep_csv(&rows, &mut bytes)?,
        Format::Json => write_sweep_json(&rows, &mut bytes)?,
    }
    Ok(Artifact { bytes, table: None })
}

fn drive(cfg: &RunConfig) -> CliResult<DriveSignal> {
    let port = match cfg.choice("dynamics.drive_port", &["optical_in", "microwave_in"], "optical_in")? {
        "microwave_in" => Port::MicrowaveIn,
        _ => Port::OpticalIn,
    };
    let amplitude = Complex64::from(cfg.f64_or("dynamics.drive_amplitude", 1.0)?);
    let kind = match cfg.choice("dynamics.drive_kind", &["off", "constant", "tone", "pulse"], "off")? {
        "constant" => DriveKind::Constant { amplitude },
        "tone" => DriveKind::Tone {
            amplitude,
            detuning: units::ghz_to_rad_per_s(cfg.f64("dynamics.drive_detuning_ghz")?),
        },
        "pulse" => DriveKind::Pulse {
            amplitude,
            t_on: cfg.f64("dynamics.pulse_on_ns")? * 1e-9,
            t_off: cfg.f64("dynamics.pulse_off_ns")? * 1e-9,
        },
        _ => DriveKind::Off,
    };
    DriveSignal::new(kind, port).map_err(|e| config_error("dynamics.drive_kind", e.to_string()).into())
}

pub fn dynamics_cmd(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let (spec, c) = resonator(cfg)?;
    let strength = pump(cfg, &spec, c.g0)?;
    let det = detuning(cfg, &spec, &strength)?;
    let model = LangevinModel::new(&spec, &det, c.g0, strength.np)?;
    let drives = [drive(cfg)?];
    let dt = match cfg.opt_positive("dynamics.dt_ns")? {
        Some(ns) => ns * 1e-9,
        None => 0.5 * model.step_limit(&drives),
    };
    let opts = IntegrationOptions::new(cfg.positive("dynamics.t_end_ns")? * 1e-9, dt)
        .with_initial(
            Complex64::new(cfg.f64_or("dynamics.a0_re", 0.0)?, cfg.f64_or("dynamics.a0_im", 0.0)?),
            Complex64::new(cfg.f64_or("dynamics.b0_re", 0.0)?, cfg.f64_or("dynamics.b0_im", 0.0)?),
        )
        .with_record_every(cfg.usize_or("dynamics.record_every", 1)?.max(1));
    let trace = model.integrate(&drives, &opts)?;
    let bytes = match format {
        Format::Csv => {
            let mut b = Vec::new();
            trace.write_csv(&mut b)?;
            b
        }
        Format::Json => json(&trace)?,
    };
    Ok(Artifact { bytes, table: None })
}

pub fn stokes_cmd(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let (spec, c) = resonator(cfg)?;
    let strength = pump(cfg, &spec, c.g0)?;
    let det = detuning(cfg, &spec, &strength)?;
    let report = stokes_report(&spec, &det, c.g0, strength.np)?;
    let bytes = match format {
        Format::Json => json(&report)?,
        Format::Csv => csv_row(&[
            ("resolved", report.resolved.to_string()),
            ("margin", report.margin.to_string()),
            ("qopt_bound", report.qopt_bound.to_string()),
            ("threshold_np", report.threshold_np.to_string()),
            ("gain_at_operating_point", report.gain_at_operating_point.to_string()),
        ]),
    };
    Ok(Artifact { bytes, table: None })
}

pub fn design_inputs(cfg: &RunConfig) -> CliResult<DesignInputs> {
    let inputs = DesignInputs::new(
        material(cfg)?,
        cfg.positive("geometry.volume_um3")?,
        cfg.positive("geometry.lambda_nm")?,
        cfg.positive("losses.q_opt")?,
        cfg.positive("losses.q_opt_int")?,
        cfg.positive("losses.q_ac")?,
        cfg.positive("losses.q_ac_int")?,
    );
    let mut inputs = inputs;
    if let Some(r) = cfg.opt_positive("design.recycling_factor")? {
        inputs = inputs.with_recycling_factor(r);
    }
    if let Some(b) = cfg.opt_positive("design.power_budget")? {
        inputs = inputs.with_power_budget(b);
    }
    Ok(inputs)
}

pub fn render_table(r: &FeasibilityReport) -> String {
    let rows: Vec<(&str, String)> = vec![
        ("g0 [rad/s]", format!("{:.4e}", r.g0)),
        ("Omega/2pi [GHz]", format!("{:.4}", units::rad_per_s_to_ghz(r.omega_ac))),
        ("Np_min", format!("{:.4e}", r.np_min)),
        ("Np density [1/um^3]", format!("{:.4e}", r.np_density)),
        ("dissipation [uW/um^3]", format!("{:.4}", r.dissipated_power_density)),
        ("pump power [uW]", format!("{:.4}", r.pump_power_estimate)),
        ("kappa_int/kappa0", format!("{:.4}", r.unitarity_margins.0)),
        ("Gamma_int/Gamma0", format!("{:.4}", r.unitarity_margins.1)),
        ("sideband resolved", r.sideband_resolved.to_string()),
        ("Q_opt lower bound", format!("{:.4e}", r.qopt_bound)),
        ("pump within budget", r.flags.pump_within_budget.to_string()),
        ("verdict", format!("{:?}", r.verdict).to_lowercase()),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

pub fn design_cmd(cfg: &RunConfig, format: Format) -> CliResult<Artifact> {
    let report = feasibility_report(&design_inputs(cfg)?)?;
    let bytes = match format {
        Format::Json => json(&report)?,
        Format::Csv => csv_row(&[
            ("g0", report.g0.to_string()),
            ("np_min", report.np_min.to_string()),
            ("np_density", report.np_density.to_string()),
            ("dissipated_power_density", report.dissipated_power_density.to_string()),
            ("pump_power_estimate", report.pump_power_estimate.to_string()),
            ("kappa_margin", report.unitarity_margins.0.to_string()),
            ("gamma_margin", report.unitarity_margins.1.to_string()),
            ("sideband_resolved", report.sideband_resolved.to_string()),
            ("verdict", format!("{:?}", report.verdict).to_lowercase()),
        ]),
    };
    Ok(Artifact {
        bytes,
        table: Some(render_table(&report)),
    })
}
