//! Physical constants (SI, CODATA 2018) for the dimensionful rate formulas.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Vacuum permeability, N/A^2.
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Newtonian gravitational constant, m^3/(kg s^2).
pub const GRAVITATIONAL: f64 = 6.674_30e-11;
