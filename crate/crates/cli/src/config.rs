//! Run configuration: flat dotted keys (`losses.q_opt = 1e5`), parsed as
//! TOML and validated key by key. Lab units at this boundary: um^3, nm,
//! cyclic GHz, ns, uW.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use toml::Value;

/// Keys the CLI understands; anything else is rejected as a likely typo.
const KNOWN_KEYS: &[&str] = &[
    "material.name",
    "material.n",
    "material.p",
    "material.gamma",
    "material.epsilon",
    "material.rho",
    "material.s",
    "geometry.volume_um3",
    "geometry.lambda_nm",
    "geometry.length_um",
    "losses.q_opt",
    "losses.q_opt_int",
    "losses.q_ac",
    "losses.q_ac_int",
    "pump.np",
    "pump.epsilon",
    "detuning.policy",
    "detuning.d_omega_ghz",
    "detuning.d_omega_ac_ghz",
    "detuning.delta_ghz",
    "coupling.profiles",
    "sweep.eps_min",
    "sweep.eps_max",
    "sweep.steps",
    "dynamics.t_end_ns",
    "dynamics.dt_ns",
    "dynamics.record_every",
    "dynamics.drive_port",
    "dynamics.drive_kind",
    "dynamics.drive_amplitude",
    "dynamics.drive_detuning_ghz",
    "dynamics.pulse_on_ns",
    "dynamics.pulse_off_ns",
    "dynamics.a0_re",
    "dynamics.a0_im",
    "dynamics.b0_re",
    "dynamics.b0_im",
    "design.recycling_factor",
    "design.power_budget",
];

/// A configuration problem, always naming the key involved.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| err("<file>", e.message().to_owned()))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values);
        if let Some(unknown) = values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(err(unknown, "unknown key"));
        }
        Ok(RunConfig { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(err(key, format!("expected a number, found {}", other.type_str()))),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.opt_f64(key)?.ok_or_else(|| err(key, "missing required key"))
    }

    /// Required, finite and strictly positive.
    pub fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.f64(key)?;
        check_positive(key, v)
    }

    pub fn opt_positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.opt_f64(key)?.map(|v| check_positive(key, v)).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(err(key, format!("expected a string, found {}", other.type_str()))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(other) => Err(err(key, format!("expected a non-negative integer, found {other}"))),
        }
    }

    /// One of `choices`, or `default` when absent.
    pub fn choice<'a>(&'a self, key: &str, choices: &[&str], default: &'a str) -> Result<&'a str, ConfigError> {
        let v = self.opt_str(key)?.unwrap_or(default);
        if choices.contains(&v) {
            Ok(v)
        } else {
            Err(err(key, format!("`{v}` is not one of {}", choices.join(", "))))
        }
    }
}

fn check_positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(err(key, format!("must be finite and > 0, got {v}")))
    }
}

pub(crate) fn config_error(key: &str, reason: impl Into<String>) -> ConfigError {
    err(key, reason)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_and_tables_flatten_alike() {
        let a = RunConfig::parse("losses.q_opt = 1e5\nmaterial.name = \"LiNbO3\"\n").unwrap();
        let b = RunConfig::parse("[losses]\nq_opt = 100000\n[material]\nname = \"LiNbO3\"\n").unwrap();
        assert_eq!(a.f64("losses.q_opt").unwrap(), b.f64("losses.q_opt").unwrap());
        assert_eq!(a.opt_str("material.name").unwrap(), Some("LiNbO3"));
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::parse("losses.q_op = 1").unwrap_err();
        assert_eq!(e.key, "losses.q_op");
        let c = RunConfig::parse("losses.q_opt = -1\nsweep.steps = 2.5\ndetuning.policy = \"sideways\"").unwrap();
        assert_eq!(c.positive("losses.q_opt").unwrap_err().key, "losses.q_opt");
        assert_eq!(c.positive("losses.q_ac").unwrap_err().reason, "missing required key");
        assert_eq!(c.usize_or("sweep.steps", 3).unwrap_err().key, "sweep.steps");
        assert!(c.choice("detuning.policy", &["resonant"], "resonant").is_err());
        assert!(RunConfig::parse("this is not toml").is_err());
    }
}
