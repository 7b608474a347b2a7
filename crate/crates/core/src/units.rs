//! Unit conventions.
//!
//! Energies, rates and widths are carried in cm⁻¹, times in fs. Whenever a
//! cm⁻¹ quantity multiplies a time it is converted with ω[rad/fs] = 2πc·ν[cm⁻¹].

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_CM_PER_K: f64 = 0.695_034_8;

/// Angular frequency (rad/fs) of one wavenumber.
pub const RAD_PER_FS_PER_CM: f64 = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_FS;

#[inline]
pub fn cm_to_rad_per_fs(nu: f64) -> f64 {
    nu * RAD_PER_FS_PER_CM
}

#[inline]
pub fn rad_per_fs_to_cm(omega: f64) -> f64 {
    omega / RAD_PER_FS_PER_CM
}

/// Dimensionless phase accumulated by a cm⁻¹ frequency over `t_fs`.
#[inline]
pub fn phase(nu_cm: f64, t_fs: f64) -> f64 {
    nu_cm * RAD_PER_FS_PER_CM * t_fs
}

/// Thermal energy k_B T in cm⁻¹.
#[inline]
pub fn thermal_energy(temperature_k: f64) -> f64 {
    BOLTZMANN_CM_PER_K * temperature_k
}
