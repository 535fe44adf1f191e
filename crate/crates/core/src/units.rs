//! Unit-suffixed quantity strings such as `"990 nm"` or `"5e-7 mbar"`.

use std::fmt;

use thiserror::Error;

use crate::constants::{AMU, ANGSTROM3, MBAR, MILLI_ELECTRON_VOLT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Pressure,
    Mass,
    Temperature,
    Speed,
    Area,
    Volume,
    /// J·m³, wall coefficient C3.
    EnergyVolume,
    /// J·m⁶, dispersion coefficient C6.
    EnergyVolume2,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length",
            Dimension::Pressure => "pressure",
            Dimension::Mass => "mass",
            Dimension::Temperature => "temperature",
            Dimension::Speed => "speed",
            Dimension::Area => "area",
            Dimension::Volume => "volume",
            Dimension::EnergyVolume => "energy x volume (C3)",
            Dimension::EnergyVolume2 => "energy x volume^2 (C6)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("expected \"<number> <unit>\", got {0:?}")]
    Malformed(String),
    #[error("unknown unit {0:?}")]
    UnknownUnit(String),
    #[error("unit {unit:?} is a {found}, expected a {expected}")]
    WrongDimension {
        unit: String,
        found: Dimension,
        expected: Dimension,
    },
    #[error("value {0:?} is not finite")]
    NotFinite(String),
}

const MEV_NM3: f64 = MILLI_ELECTRON_VOLT * 1e-27;
const MEV_NM6: f64 = MILLI_ELECTRON_VOLT * 1e-54;

fn lookup(unit: &str) -> Option<(Dimension, f64)> {
    use Dimension::*;
    Some(match unit {
        "m" => (Length, 1.0),
        "cm" => (Length, 1e-2),
        "mm" => (Length, 1e-3),
        "um" | "μm" | "µm" => (Length, 1e-6),
        "nm" => (Length, 1e-9),
        "pm" => (Length, 1e-12),
        "Pa" => (Pressure, 1.0),
        "mbar" => (Pressure, MBAR),
        "kg" => (Mass, 1.0),
        "amu" | "u" | "Da" => (Mass, AMU),
        "K" => (Temperature, 1.0),
        "m/s" => (Speed, 1.0),
        "m2" | "m^2" => (Area, 1.0),
        "nm2" | "nm^2" => (Area, 1e-18),
        "A3" | "Å3" | "A^3" | "Å^3" => (Volume, ANGSTROM3),
        "m3" | "m^3" => (Volume, 1.0),
        "J m3" | "J m^3" => (EnergyVolume, 1.0),
        "meV nm3" | "meV nm^3" => (EnergyVolume, MEV_NM3),
        "J m6" | "J m^6" => (EnergyVolume2, 1.0),
        "meV nm6" | "meV nm^6" => (EnergyVolume2, MEV_NM6),
        _ => return None,
    })
}

/// Parses `"<number> <unit>"` and returns the SI value.
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64, UnitError> {
    let t = text.trim();
    let (num, unit) = t
        .split_once(char::is_whitespace)
        .ok_or_else(|| UnitError::Malformed(text.to_string()))?;
    let value: f64 = num.parse().map_err(|_| UnitError::Malformed(text.to_string()))?;
    if !value.is_finite() {
        return Err(UnitError::NotFinite(text.to_string()));
    }
    let unit = unit.split_whitespace().collect::<Vec<_>>().join(" ");
    let (dim, scale) = lookup(&unit).ok_or_else(|| UnitError::UnknownUnit(unit.clone()))?;
    if dim != expected {
        return Err(UnitError::WrongDimension {
            unit,
            found: dim,
            expected,
        });
    }
    Ok(value * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(parse_quantity("990 nm", Dimension::Length).unwrap(), 990.0 * 1e-9);
        assert!((parse_quantity("5e-7 mbar", Dimension::Pressure).unwrap() - 5e-5).abs() < 1e-20);
        assert_eq!(parse_quantity("1 amu", Dimension::Mass).unwrap(), 1.66053906660e-27);
        assert_eq!(parse_quantity(" 2.58  pm ", Dimension::Length).unwrap(), 2.58e-12);
        assert_eq!(parse_quantity("10 meV  nm3", Dimension::EnergyVolume).unwrap(), 10.0 * MEV_NM3);
        assert_eq!(parse_quantity("79.7 nm2", Dimension::Area).unwrap(), 79.7e-18);
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            parse_quantity("5 mbar", Dimension::Length),
            Err(UnitError::WrongDimension { .. })
        ));
        assert!(matches!(parse_quantity("5", Dimension::Length), Err(UnitError::Malformed(_))));
        assert!(matches!(parse_quantity("x nm", Dimension::Length), Err(UnitError::Malformed(_))));
        assert!(matches!(parse_quantity("5 furlong", Dimension::Length), Err(UnitError::UnknownUnit(_))));
        assert!(matches!(parse_quantity("inf nm", Dimension::Length), Err(UnitError::NotFinite(_))));
    }
}
