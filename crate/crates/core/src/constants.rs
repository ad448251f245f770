//! CODATA 2018 values used by the SI experiments.

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Newtonian gravitational constant (m³·kg⁻¹·s⁻²).
pub const G: f64 = 6.674_30e-11;

pub const EARTH_MASS: f64 = 5.972e24;
pub const EARTH_RADIUS: f64 = 6.371e6;
pub const NEUTRON_MASS: f64 = 1.675e-27;
