//! Phonon spectral density and the half-Fourier phonon correlation function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, Tolerance};
use crate::units::{thermal_energy, BOLTZMANN_CM_PER_K};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverdampedMode {
    /// Reorganization energy, cm⁻¹.
    pub lambda: f64,
    /// Relaxation rate, cm⁻¹.
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianMode {
    pub lambda: f64,
    pub omega: f64,
    pub gamma: f64,
}

fn default_temperature() -> f64 {
    300.0
}

/// Bath description: one overdamped oscillator plus any number of
/// underdamped Brownian modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub overdamped: OverdampedMode,
    #[serde(default)]
    pub brownian_modes: Vec<BrownianMode>,
    /// Kelvin.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Extra pure dephasing added to every coherence width, cm⁻¹.
    #[serde(default)]
    pub pure_dephasing: f64,
    /// Evaluate the principal-value (imaginary) part of the correlation.
    #[serde(default)]
    pub lamb_shift: bool,
}

pub const BUNDLED_BATH_JSON: &str = include_str!("../data/bath.json");

impl BathSpec {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED_BATH_JSON).expect("bundled bath is valid")
    }

    pub fn overdamped_only(lambda: f64, gamma: f64, temperature: f64) -> Self {
        Self {
            overdamped: OverdampedMode { lambda, gamma },
            brownian_modes: Vec::new(),
            temperature,
            pure_dephasing: 0.0,
            lamb_shift: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.temperature > 0.0) {
            bad.push(format!("temperature must be > 0, got {}", self.temperature));
        }
        if self.overdamped.gamma < 0.0 || (self.overdamped.lambda > 0.0 && self.overdamped.gamma == 0.0)
        {
            bad.push("overdamped gamma must be > 0 when lambda > 0".to_string());
        }
        for (i, m) in self.brownian_modes.iter().enumerate() {
            if m.gamma < 0.0 || m.omega <= 0.0 {
                bad.push(format!("brownian mode {i} needs gamma >= 0 and omega > 0"));
            }
        }
        if self.pure_dephasing < 0.0 {
            bad.push("pure_dephasing must be >= 0".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(bad.join("; ")))
        }
    }

    pub fn kt(&self) -> f64 {
        thermal_energy(self.temperature)
    }

    pub fn beta(&self) -> f64 {
        1.0 / (BOLTZMANN_CM_PER_K * self.temperature)
    }

    /// J(ω)/ω, even in ω and finite at ω = 0.
    pub fn spectral_density_over_omega(&self, omega: f64) -> f64 {
        let OverdampedMode { lambda, gamma } = self.overdamped;
        let mut v = if gamma > 0.0 {
            2.0 * lambda * gamma / (omega * omega + gamma * gamma)
        } else {
            0.0
        };
        for m in &self.brownian_modes {
            let d = m.omega * m.omega - omega * omega;
            let den = d * d + omega * omega * m.gamma * m.gamma;
            if den > 0.0 {
                v += 2.0 * m.lambda * m.omega * m.omega * m.gamma / den;
            }
        }
        v
    }

    /// J(ω) in cm⁻¹; odd in ω.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        omega * self.spectral_density_over_omega(omega)
    }

    /// Re C(Ω) = ½ J(Ω)[coth(βΩ/2) + 1], written as (J/Ω)·Ω/(1 − e^{−βΩ}) so
    /// the Ω → 0 limit and the detailed-balance ratio stay exact in floating
    /// point.
    pub fn correlation_real(&self, big_omega: f64) -> f64 {
        let beta = self.beta();
        let y = beta * big_omega;
        let bose = if y.abs() < 1e-10 {
            1.0 + 0.5 * y
        } else {
            y / -(-y).exp_m1()
        };
        self.spectral_density_over_omega(big_omega) * bose / beta
    }

    /// Imaginary part (1/π) PV∫ Re C(ω)/(Ω − ω) dω by quadrature.
    pub fn correlation_imag(&self, big_omega: f64) -> Result<f64> {
        let scale = self.overdamped.gamma.max(self.kt()).max(1.0);
        let est = integrate_to_infinity(
            |u: f64| {
                if u == 0.0 {
                    return 0.0;
                }
                (self.correlation_real(big_omega - u) - self.correlation_real(big_omega + u)) / u
            },
            0.0,
            scale,
            Tolerance::new(1e-12, 1e-9),
        )?;
        Ok(est.value / std::f64::consts::PI)
    }

    /// Phonon correlation at a transition frequency Ω (cm⁻¹). The imaginary
    /// part is zero unless `lamb_shift` is set.
    pub fn phonon_correlation(&self, big_omega: f64) -> Result<Complex64> {
        let re = self.correlation_real(big_omega);
        let im = if self.lamb_shift {
            self.correlation_imag(big_omega)?
        } else {
            0.0
        };
        Ok(Complex64::new(re, im))
    }
}

/// Free-function form of [`BathSpec::spectral_density`].
pub fn spectral_density(bath: &BathSpec, omega: f64) -> f64 {
    bath.spectral_density(omega)
}

/// Free-function form of [`BathSpec::phonon_correlation`].
pub fn phonon_correlation(bath: &BathSpec, big_omega: f64) -> Result<Complex64> {
    bath.phonon_correlation(big_omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn odd_and_zero_at_origin() {
        let b = BathSpec::bundled();
        assert_eq!(b.spectral_density(0.0), 0.0);
        for w in [1.0, 13.0, 160.0, 700.0, 3000.0] {
            assert_eq!(b.spectral_density(-w), -b.spectral_density(w));
        }
    }

    #[test]
    fn overdamped_peak_value() {
        let b = BathSpec::overdamped_only(35.0, 80.0, 300.0);
        assert_relative_eq!(b.spectral_density(80.0), 35.0, epsilon = 1e-12);
    }

    #[test]
    fn kms_ratio() {
        let b = BathSpec::bundled();
        let beta = b.beta();
        for w in [0.5, 10.0, 120.0, 400.0, 1500.0] {
            let r = b.correlation_real(w) / b.correlation_real(-w);
            assert_relative_eq!(r, (beta * w).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn continuous_at_zero() {
        let b = BathSpec::bundled();
        let kt = b.kt();
        let limit = kt
            * (2.0 * b.overdamped.lambda / b.overdamped.gamma
                + b.brownian_modes
                    .iter()
                    .map(|m| 2.0 * m.lambda * m.gamma / (m.omega * m.omega))
                    .sum::<f64>());
        assert_relative_eq!(b.correlation_real(0.0), limit, max_relative = 1e-14);
        assert_relative_eq!(b.correlation_real(1e-7), b.correlation_real(-1e-7), max_relative = 1e-8);
    }

    #[test]
    fn lamb_shift_is_opt_in() {
        let mut b = BathSpec::overdamped_only(50.0, 50.0, 300.0);
        assert_eq!(b.phonon_correlation(100.0).unwrap().im, 0.0);
        b.lamb_shift = true;
        assert!(b.phonon_correlation(100.0).unwrap().im.is_finite());
    }

    #[test]
    fn rejects_bad_temperature() {
        let b = BathSpec::overdamped_only(1.0, 1.0, 0.0);
        assert!(b.validate().is_err());
    }
}
