//! Physical constants (CODATA 2018, SI).

use std::f64::consts::PI;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Standard gravitational acceleration used for beam selection, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// 1 mbar in Pa.
pub const MBAR: f64 = 100.0;
/// 1 Å³ in m³.
pub const ANGSTROM3: f64 = 1e-30;
/// 1 meV in J.
pub const MILLI_ELECTRON_VOLT: f64 = 1e-3 * ELEMENTARY_CHARGE;

/// de Broglie wavelength h/(M v).
pub fn de_broglie_wavelength(mass: f64, speed: f64) -> f64 {
    PLANCK / (mass * speed)
}

/// Speed with de Broglie wavelength `wavelength` for a particle of `mass`.
pub fn speed_for_wavelength(mass: f64, wavelength: f64) -> f64 {
    PLANCK / (mass * wavelength)
}

/// Most probable speed of a Maxwell gas, (2 k_B T / m)^{1/2}.
pub fn most_probable_speed(mass: f64, temperature: f64) -> f64 {
    (2.0 * BOLTZMANN * temperature / mass).sqrt()
}
