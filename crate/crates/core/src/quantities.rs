//! Material constants, rates and unit conversions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive};
use crate::{Error, Result};

/// Physical constants and lab-unit conversions (CGS-Gaussian internally).
pub mod units {
    /// Reduced Planck constant, erg s.
    pub const HBAR: f64 = 1.054_571_817e-27;
    /// Speed of light in vacuum, cm/s.
    pub const C: f64 = 2.997_924_58e10;

    pub const CM3_PER_UM3: f64 = 1e-12;
    pub const CM_PER_UM: f64 = 1e-4;
    pub const CM_PER_NM: f64 = 1e-7;
    /// erg/s in one microwatt.
    pub const ERG_PER_S_PER_UW: f64 = 10.0;

    pub fn um3_to_cm3(v: f64) -> f64 {
        v * CM3_PER_UM3
    }

    pub fn cm3_to_um3(v: f64) -> f64 {
        v / CM3_PER_UM3
    }

    /// Angular frequency of light with vacuum wavelength `lambda_nm`.
    pub fn wavelength_nm_to_omega(lambda_nm: f64) -> f64 {
        2.0 * std::f64::consts::PI * C / (lambda_nm * CM_PER_NM)
    }

    /// Cyclic GHz to rad/s.
    pub fn ghz_to_rad_per_s(f: f64) -> f64 {
        2.0 * std::f64::consts::PI * f * 1e9
    }

    pub fn rad_per_s_to_ghz(w: f64) -> f64 {
        w / (2.0 * std::f64::consts::PI * 1e9)
    }

    pub fn erg_per_s_to_uw(p: f64) -> f64 {
        p / ERG_PER_S_PER_UW
    }
}

/// Optical, acoustic and photo-elastic constants of a crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Refractive index.
    pub n: f64,
    /// Pockels photo-elastic coefficient.
    pub p: f64,
    /// Photo-elastic coefficient entering the coupling, `p n^4` unless given.
    pub gamma: f64,
    /// Dielectric constant at optical frequency, `n^2` unless given.
    pub epsilon: f64,
    /// Mass density, g/cm^3.
    pub rho: f64,
    /// Sound speed, cm/s.
    pub s: f64,
    #[serde(default)]
    pub source: String,
}

/// `gamma = p n^4`.
pub fn pockels_to_gamma(p: f64, n: f64) -> Result<f64> {
    ensure_finite("p", p)?;
    ensure_finite("n", n)?;
    if n < 1.0 {
        return Err(Error::invalid("n", format!("refractive index must be >= 1, got {n}")));
    }
    Ok(p * n.powi(4))
}

/// Loss rate `omega / Q`.
pub fn q_to_rate(omega: f64, q: f64) -> Result<f64> {
    ensure_positive("omega", omega)?;
    ensure_positive("Q", q)?;
    Ok(omega / q)
}

impl Material {
    /// Builds a material from its Pockels coefficient, deriving `gamma` and
    /// `epsilon`.
    pub fn from_pockels(name: impl Into<String>, n: f64, p: f64, rho: f64, s: f64) -> Result<Self> {
        let gamma = pockels_to_gamma(p, n)?;
        let m = Material {
            name: name.into(),
            n,
            p,
            gamma,
            epsilon: n * n,
            rho,
            s,
            source: String::new(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n),
            ("p", self.p),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
            ("rho", self.rho),
            ("s", self.s),
        ] {
            ensure_finite(name, v)?;
        }
        if self.n < 1.0 {
            return Err(Error::invalid("n", format!("must be >= 1, got {}", self.n)));
        }
        if self.epsilon < 1.0 {
            return Err(Error::invalid("epsilon", format!("must be >= 1, got {}", self.epsilon)));
        }
        ensure_positive("rho", self.rho)?;
        ensure_positive("s", self.s)?;
        Ok(())
    }
}

/// Where a rate value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateOrigin {
    Direct,
    FromQFactor,
}

/// A non-negative angular rate, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub origin: RateOrigin,
}

impl Rate {
    pub fn direct(value: f64) -> Result<Self> {
        crate::error::ensure_nonnegative("rate", value)?;
        Ok(Rate {
            value,
            origin: RateOrigin::Direct,
        })
    }

    pub fn from_q(omega: f64, q: f64) -> Result<Self> {
        Ok(Rate {
            value: q_to_rate(omega, q)?,
            origin: RateOrigin::FromQFactor,
        })
    }
}

const BUNDLED: &str = include_str!("../data/materials.csv");

#[derive(Deserialize)]
struct MaterialRecord {
    name: String,
    n: f64,
    p: f64,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    rho: f64,
    s: f64,
    #[serde(default)]
    source: String,
}

impl MaterialRecord {
    fn into_material(self) -> Result<Material> {
        let gamma = match self.gamma {
            Some(g) => g,
            None => pockels_to_gamma(self.p, self.n)?,
        };
        let m = Material {
            epsilon: self.epsilon.unwrap_or(self.n * self.n),
            name: self.name,
            n: self.n,
            p: self.p,
            gamma,
            rho: self.rho,
            s: self.s,
            source: self.source,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Parses a material table (CSV, `#` comments, columns as in [`Material`]).
pub fn parse_materials(text: &str) -> std::result::Result<Vec<Material>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<MaterialRecord>().enumerate() {
        let rec = rec.map_err(|e| format!("record {}: {e}", i + 1))?;
        let name = rec.name.clone();
        out.push(rec.into_material().map_err(|e| format!("{name}: {e}"))?);
    }
    Ok(out)
}

/// All bundled materials.
pub fn bundled_materials() -> Vec<Material> {
    parse_materials(BUNDLED).expect("bundled material table is valid")
}

/// Loads every record of a user material file.
pub fn load_material_file(path: &Path) -> Result<Vec<Material>> {
    let text = std::fs::read_to_string(path)?;
    let materials = parse_materials(&text).map_err(|reason| Error::MaterialData {
        path: path.to_owned(),
        reason,
    })?;
    if materials.is_empty() {
        return Err(Error::MaterialData {
            path: path.to_owned(),
            reason: "no records".into(),
        });
    }
    Ok(materials)
}

/// Resolves a bundled material by name (case-insensitive), or reads the first
/// record of a data file when `name` is an existing path.
pub fn material_lookup(name: &str) -> Result<Material> {
    if let Some(m) = bundled_materials()
        .into_iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
    {
        return Ok(m);
    }
    let path = Path::new(name);
    if path.is_file() {
        return Ok(load_material_file(path)?.remove(0));
    }
    Err(Error::UnknownMaterial(name.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pockels_examples() {
        assert_eq!(pockels_to_gamma(0.0, 2.2).unwrap(), 0.0);
        assert_relative_eq!(pockels_to_gamma(0.2, 2.2).unwrap(), 4.68512, max_relative = 1e-12);
        assert_relative_eq!(pockels_to_gamma(0.02, 2.12).unwrap(), 0.404, max_relative = 1e-3);
    }

    #[test]
    fn pockels_rejects_bad_index() {
        assert!(pockels_to_gamma(0.1, 0.9).is_err());
        assert!(pockels_to_gamma(f64::NAN, 2.0).is_err());
        assert!(pockels_to_gamma(0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn q_to_rate_examples() {
        assert_relative_eq!(q_to_rate(1.215e15, 1e5).unwrap(), 1.215e10, max_relative = 1e-12);
        assert_eq!(q_to_rate(7.3, 1.0).unwrap(), 7.3);
        assert_relative_eq!(q_to_rate(6.2e10, 1e4).unwrap(), 6.2e6, max_relative = 1e-12);
        assert!(q_to_rate(0.0, 1.0).is_err());
        assert!(q_to_rate(1.0, -3.0).is_err());
        let r = Rate::from_q(6.2e10, 1e4).unwrap();
        assert_eq!(r.origin, RateOrigin::FromQFactor);
        assert!(Rate::direct(-1.0).is_err());
    }

    #[test]
    fn bundled_lookup() {
        let ln = material_lookup("LiNbO3").unwrap();
        assert_relative_eq!(ln.p, 0.2);
        assert_relative_eq!(ln.n, 2.2);
        assert_relative_eq!(ln.rho, 4.64);
        assert_relative_eq!(ln.s, 3.5e5);
        assert!(!ln.source.is_empty());
        assert_eq!(material_lookup("AlN").unwrap().p, 0.02);
        assert_eq!(material_lookup("gaas").unwrap().name, "GaAs");
        assert!(matches!(material_lookup("unobtainium"), Err(Error::UnknownMaterial(_))));
    }

    #[test]
    fn bundled_materials_satisfy_invariants() {
        let all = bundled_materials();
        assert!(all.len() >= 3);
        let mut max_p: f64 = 0.0;
        for m in &all {
            m.validate().unwrap();
            assert_eq!(m.gamma, m.p * m.n.powi(4), "{}", m.name);
            assert_eq!(m.epsilon, m.n * m.n);
            assert!((0.3..=20.0).contains(&m.gamma), "{} gamma {}", m.name, m.gamma);
            assert!(m.p >= 0.02);
            max_p = max_p.max(m.p);
        }
        assert!(max_p > 0.16);
    }

    #[test]
    fn data_file_lookup_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("m.csv");
        std::fs::write(
            &good,
            "name,n,p,gamma,epsilon,rho,s,source\nTestium,1.5,0.1,,3.0,2.0,4e5,made up\n",
        )
        .unwrap();
        let m = material_lookup(good.to_str().unwrap()).unwrap();
        assert_eq!(m.name, "Testium");
        assert_eq!(m.epsilon, 3.0);
        assert_eq!(m.gamma, 0.1 * 1.5f64.powi(4));

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "name,n,p,gamma,epsilon,rho,s,source\nX,0.5,0.1,,,2.0,4e5,\n").unwrap();
        assert!(matches!(
            material_lookup(bad.to_str().unwrap()),
            Err(Error::MaterialData { .. })
        ));
        let garbage = dir.path().join("garbage.csv");
        std::fs::write(&garbage, "name,n\nX,abc\n").unwrap();
        assert!(material_lookup(garbage.to_str().unwrap()).is_err());
    }

    #[test]
    fn epsilon_override_validated() {
        let m = Material::from_pockels("x", 2.0, 0.1, 3.0, 4e5).unwrap();
        assert_eq!(m.epsilon, 4.0);
        assert_eq!(m.clone().with_epsilon(5.5).unwrap().epsilon, 5.5);
        assert!(m.with_epsilon(0.5).is_err());
        assert!(Material::from_pockels("x", 2.0, 0.1, 0.0, 4e5).is_err());
        assert!(Material::from_pockels("x", 2.0, 0.1, 1.0, -4e5).is_err());
    }

    #[test]
    fn unit_conversions() {
        assert_relative_eq!(units::wavelength_nm_to_omega(1550.0), 1.215259e15, max_relative = 1e-6);
        assert_relative_eq!(units::um3_to_cm3(1.0), 1e-12);
        assert_relative_eq!(units::rad_per_s_to_ghz(units::ghz_to_rad_per_s(9.9)), 9.9);
    }

    proptest! {
        #[test]
        fn gamma_monotone(p in 1e-4f64..1.0, n in 1.0f64..5.0, dp in 1e-4f64..0.5, dn in 1e-3f64..1.0) {
            let g = pockels_to_gamma(p, n).unwrap();
            prop_assert!(pockels_to_gamma(p + dp, n).unwrap() > g);
            prop_assert!(pockels_to_gamma(p, n + dn).unwrap() > g);
        }

        #[test]
        fn material_round_trip_is_exact(p in 0.0f64..1.0, n in 1.0f64..5.0) {
            let m = Material::from_pockels("x", n, p, 1.0, 1e5).unwrap();
            prop_assert_eq!(m.gamma, p * n.powi(4));
        }
    }
}
