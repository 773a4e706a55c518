//! Physical constants in SI units (CODATA 2018).

/// Speed of light in vacuum, m/s. Exact by definition of the metre.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J s. Exact since the 2019 SI redefinition.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant h/2π, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m. CODATA 2018 value 8.8541878128(13)e-12.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
