//! Built-in gas data and reproduction scenarios.

use serde::Deserialize;

use super::config::{invalid, quantity, ConfigError, GasEntry, RawGas};
use crate::decoherence::{
    c6_from_sigma_eff, sigma_eff_from_p0, slater_kirkwood_c6, GasSpec,
};
use crate::units::Dimension;

const GASES_JSON: &str = include_str!("../../data/gases.json");

pub const SCENARIOS: [(&str, &str); 6] = [
    ("fig2", include_str!("../../data/scenarios/fig2.json")),
    ("fig4", include_str!("../../data/scenarios/fig4.json")),
    ("fig5", include_str!("../../data/scenarios/fig5.json")),
    ("fringe", include_str!("../../data/scenarios/fringe.json")),
    ("table1", include_str!("../../data/scenarios/table1.json")),
    ("table2", include_str!("../../data/scenarios/table2.json")),
];

pub fn scenario_text(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatabase {
    reference: RawReference,
    probe: RawProbe,
    gases: Vec<RawGas>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    separation: String,
    mean_speed: String,
    temperature: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    name: String,
    mass: String,
    polarizability: String,
    valence_electrons: f64,
}

/// Conditions under which the tabulated theoretical `p0` values hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConditions {
    pub separation: f64,
    pub mean_speed: f64,
    pub temperature: f64,
}

/// Molecule used for Slater–Kirkwood estimates of gas `C6` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub name: String,
    pub mass: f64,
    pub polarizability: f64,
    pub valence_electrons: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasDatabase {
    pub reference: ReferenceConditions,
    pub probe: Probe,
    pub gases: Vec<GasEntry>,
}

/// Where a resolved `C6` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C6Source {
    Configured,
    /// Inverted from the tabulated theoretical `p0` with the asymptotic
    /// cross-section formula.
    FromReferenceP0,
    SlaterKirkwood,
}

impl C6Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            C6Source::Configured => "configured",
            C6Source::FromReferenceP0 => "from_reference_p0",
            C6Source::SlaterKirkwood => "slater_kirkwood",
        }
    }
}

impl GasDatabase {
    pub fn builtin() -> Self {
        Self::parse(GASES_JSON).expect("built-in gas table is valid")
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawDatabase = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Json {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let reference = ReferenceConditions {
            separation: quantity("reference.separation", &raw.reference.separation, Dimension::Length)?,
            mean_speed: quantity("reference.mean_speed", &raw.reference.mean_speed, Dimension::Speed)?,
            temperature: quantity("reference.temperature", &raw.reference.temperature, Dimension::Temperature)?,
        };
        let probe = Probe {
            name: raw.probe.name,
            mass: quantity("probe.mass", &raw.probe.mass, Dimension::Mass)?,
            polarizability: quantity("probe.polarizability", &raw.probe.polarizability, Dimension::Volume)?,
            valence_electrons: raw.probe.valence_electrons,
        };
        let gases = raw
            .gases
            .iter()
            .enumerate()
            .map(|(i, g)| GasEntry::from_raw(&format!("gases[{i}]"), g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { reference, probe, gases })
    }

    pub fn find(&self, name: &str) -> Option<&GasEntry> {
        self.gases.iter().find(|g| g.name.eq_ignore_ascii_case(name))
    }

    /// Gas at `temperature` with a `C6` coefficient from, in order of
    /// preference: the entry itself, the reference `p0`, Slater–Kirkwood
    /// with the probe molecule.
    pub fn resolve(&self, entry: &GasEntry, temperature: f64) -> Result<(GasSpec, C6Source), ConfigError> {
        let path = format!("gas {}", entry.name);
        let err = |e: crate::decoherence::DecoherenceError| invalid(&path, e.to_string());
        let mut gas = GasSpec::new(&entry.name, entry.mass, temperature, 0.0).map_err(err)?;
        gas.polarizability = entry.polarizability;
        gas.valence_electrons = entry.valence_electrons;
        let r = self.reference;
        let (c6, source) = if let Some(c6) = entry.c6 {
            (c6, C6Source::Configured)
        } else if let Some(p0) = entry.p0_theory {
            let at_reference = GasSpec {
                temperature: r.temperature,
                ..gas.clone()
            };
            let sigma = sigma_eff_from_p0(p0, r.separation, r.temperature);
            (
                c6_from_sigma_eff(&at_reference, r.mean_speed, sigma).map_err(err)?,
                C6Source::FromReferenceP0,
            )
        } else {
            match (entry.polarizability, entry.valence_electrons) {
                (Some(a), Some(n)) => (
                    slater_kirkwood_c6(self.probe.polarizability, self.probe.valence_electrons, a, n).map_err(err)?,
                    C6Source::SlaterKirkwood,
                ),
                _ => {
                    return Err(invalid(
                        &path,
                        "no C6: give c6, p0_theory, or polarizability and valence_electrons",
                    ))
                }
            }
        };
        gas.c6 = c6;
        gas.validate().map_err(err)?;
        Ok((gas, source))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::config::parse_config;

    #[test]
    fn builtin_data_parses() {
        let db = GasDatabase::builtin();
        assert_eq!(db.gases.len(), 12);
        for g in &db.gases {
            let (gas, src) = db.resolve(g, 300.0).unwrap();
            assert!(gas.c6 > 0.0);
            if g.p0_theory.is_none() {
                assert_eq!(src, C6Source::SlaterKirkwood);
            }
        }
        for (name, text) in SCENARIOS {
            let cfg = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
        }
    }
}
