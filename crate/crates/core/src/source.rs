//! Entangled-pair (SPDC) and classical coherent light sources.
//!
//! Frequencies are in cm⁻¹ and may be complex so the correlations can be
//! evaluated at resolvent poles. Times are in fs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::RAD_PER_FS_PER_CM;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// sin(z)/z, continued to 1 at the origin.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

fn one() -> f64 {
    1.0
}

/// Entangled photon pair from a Gaussian-pumped SPDC crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EppSource {
    /// Signal and idler reference frequencies, cm⁻¹.
    pub omega1: f64,
    pub omega2: f64,
    /// Pump carrier, cm⁻¹.
    pub pump_center: f64,
    /// Pump temporal width τ₀, fs.
    pub tau0: f64,
    /// Crystal group delays T̃₁ ≤ T̃₂, fs.
    #[serde(default)]
    pub t1: f64,
    pub t2: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub e0: f64,
}

impl EppSource {
    /// ω₁ = ω₂ = ω_p/2 = target/2, with T̃₁ = 0 and T̃₂ = T̃_ent.
    pub fn degenerate(target: f64, tau0: f64, t_ent: f64) -> Self {
        Self::mediated(0.5 * target, 0.5 * target, tau0, t_ent)
    }

    /// Non-degenerate pair with the pump at ω₁ + ω₂.
    pub fn mediated(omega1: f64, omega2: f64, tau0: f64, t_ent: f64) -> Self {
        Self {
            omega1,
            omega2,
            pump_center: omega1 + omega2,
            tau0,
            t1: 0.0,
            t2: t_ent,
            alpha: 1.0,
            e0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.tau0 > 0.0) {
            bad.push(format!("tau0 must be > 0, got {}", self.tau0));
        }
        if !(self.t2 >= self.t1) {
            bad.push(format!("need t2 >= t1, got t1={} t2={}", self.t1, self.t2));
        }
        if !(self.alpha > 0.0) {
            bad.push("alpha must be > 0".to_string());
        }
        let all = [self.omega1, self.omega2, self.pump_center, self.t1, self.t2, self.e0];
        if all.iter().any(|v| !v.is_finite()) {
            bad.push("source parameters must be finite".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::validation(bad.join("; ")))
        }
    }

    pub fn entanglement_time(&self) -> f64 {
        self.t2 - self.t1
    }

    /// Pump bandwidth parameter Γ_p,0 = 1/(2τ₀²) in (rad/fs)².
    pub fn pump_gamma_rad(&self) -> f64 {
        0.5 / (self.tau0 * self.tau0)
    }

    /// Γ_p,0 expressed in cm⁻².
    pub fn pump_gamma_cm(&self) -> f64 {
        self.pump_gamma_rad() / (RAD_PER_FS_PER_CM * RAD_PER_FS_PER_CM)
    }

    /// A_p(ν) = E0 √(π/Γ) exp(−(ν − ω_p)²/(4Γ)).
    pub fn pump_amplitude(&self, nu: Complex64) -> Complex64 {
        let g = self.pump_gamma_cm();
        let d = nu - self.pump_center;
        self.e0 * (std::f64::consts::PI / g).sqrt() * (-(d * d) / (4.0 * g)).exp()
    }

    fn phase(&self, wa: Complex64, wb: Complex64, reference: f64) -> Complex64 {
        0.5 * RAD_PER_FS_PER_CM * ((wa - reference) * self.t1 + (wb - reference) * self.t2)
    }

    /// Joint spectral amplitude F(ω_a, ω_b); ω_a belongs to the photon that
    /// leaves the crystal first.
    pub fn jsa(&self, wa: Complex64, wb: Complex64) -> Complex64 {
        let term = |c: f64| {
            let phi = self.phase(wa, wb, c);
            sinc(phi) * (I * phi).exp()
        };
        self.alpha * self.pump_amplitude(wa + wb) * (term(self.omega1) + term(self.omega2))
    }

    /// Time-domain pump envelope E0·κ·exp(−iω_p τ − Γ τ²).
    pub fn pump_field(&self, tau: f64) -> Complex64 {
        let k = RAD_PER_FS_PER_CM;
        let g = self.pump_gamma_rad();
        self.e0 * k * Complex64::new(-g * tau * tau, -k * self.pump_center * tau).exp()
    }

    /// Two-photon wavefunction ⟨0|E(τ_b)E(τ_a)|ψ⟩: the Fourier transform of
    /// the JSA. Supported on τ_a ≤ τ_b ≤ τ_a + T̃_ent.
    pub fn two_photon_wavefunction(&self, tau_a: f64, tau_b: f64) -> Complex64 {
        let t = self.entanglement_time();
        if t <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = (tau_b - tau_a) / t;
        if !(0.0..=1.0).contains(&u) {
            return Complex64::new(0.0, 0.0);
        }
        let k = RAD_PER_FS_PER_CM;
        let phase = |c: f64| Complex64::new(0.0, -k * u * c * (self.t1 + self.t2)).exp();
        self.alpha / t * (phase(self.omega1) + phase(self.omega2)) * self.pump_field(tau_a - u * self.t1)
    }
}

/// Gaussian spectral amplitude a·exp(−(ν − center)²/(2 width²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianProfile {
    pub center: f64,
    pub width: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl GaussianProfile {
    pub fn eval(&self, nu: Complex64) -> Complex64 {
        let d = nu - self.center;
        self.amplitude * (-(d * d) / (2.0 * self.width * self.width)).exp()
    }

    /// Fourier transform a κ w/√(2π) exp(−iκcτ − κ²w²τ²/2).
    pub fn field(&self, tau: f64) -> Complex64 {
        let k = RAD_PER_FS_PER_CM;
        let kw = k * self.width;
        self.amplitude * kw / (2.0 * std::f64::consts::PI).sqrt()
            * Complex64::new(-0.5 * kw * kw * tau * tau, -k * self.center * tau).exp()
    }
}

/// Classical pulse pair with four independent amplitude profiles, one per
/// field interaction: ket early, ket late, bra early, bra late.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentSource {
    pub profiles: [GaussianProfile; 4],
}

impl CoherentSource {
    pub fn uniform(center: f64, width: f64) -> Self {
        let p = GaussianProfile {
            center,
            width,
            amplitude: 1.0,
        };
        Self { profiles: [p; 4] }
    }

    /// A pulse of the same spectral-amplitude width as an SPDC pump of
    /// temporal width τ₀, centered at ω_p/2.
    pub fn matched_to(epp: &EppSource) -> Self {
        let width = (2.0 * epp.pump_gamma_cm()).sqrt();
        Self::uniform(0.5 * epp.pump_center, width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.profiles.iter().all(|p| p.width > 0.0 && p.center.is_finite()) {
            Ok(())
        } else {
            Err(Error::validation("coherent profile widths must be > 0"))
        }
    }
}

/// Anything that supplies the four-point field correlation
/// ⟨E†(ω₄)E†(ω₃)E(ω₂)E(ω₁)⟩ at complex frequencies.
///
/// ω₁ and ω₂ are the earlier and later ket (absorption) interactions, ω₃ and
/// ω₄ the earlier and later bra interactions.
pub trait FieldCorrelation: Sync {
    fn four_point(&self, w4: Complex64, w3: Complex64, w2: Complex64, w1: Complex64) -> Complex64;
}

/// conj(F(conj ω₃, conj ω₄))·F(ω₁, ω₂).
pub fn four_point_entangled(
    src: &EppSource,
    w4: Complex64,
    w3: Complex64,
    w2: Complex64,
    w1: Complex64,
) -> Complex64 {
    src.jsa(w3.conj(), w4.conj()).conj() * src.jsa(w1, w2)
}

/// A₄*(ω₄) A₃*(ω₃) A₂(ω₂) A₁(ω₁), continued analytically.
pub fn four_point_coherent(
    src: &CoherentSource,
    w4: Complex64,
    w3: Complex64,
    w2: Complex64,
    w1: Complex64,
) -> Complex64 {
    let [p1, p2, p3, p4] = &src.profiles;
    p4.eval(w4.conj()).conj() * p3.eval(w3.conj()).conj() * p2.eval(w2) * p1.eval(w1)
}

impl FieldCorrelation for EppSource {
    fn four_point(&self, w4: Complex64, w3: Complex64, w2: Complex64, w1: Complex64) -> Complex64 {
        four_point_entangled(self, w4, w3, w2, w1)
    }
}

impl FieldCorrelation for CoherentSource {
    fn four_point(&self, w4: Complex64, w3: Complex64, w2: Complex64, w1: Complex64) -> Complex64 {
        four_point_coherent(self, w4, w3, w2, w1)
    }
}

/// |F|² on a rectangular grid (rows ω_a, columns ω_b), divided by its maximum.
pub fn jsi_map(src: &EppSource, grid_a: &[f64], grid_b: &[f64]) -> Result<DMatrix<f64>> {
    if grid_a.is_empty() || grid_b.is_empty() {
        return Err(Error::validation("JSI grid must not be empty"));
    }
    let mut m = DMatrix::from_fn(grid_a.len(), grid_b.len(), |i, j| {
        src.jsa(grid_a[i].into(), grid_b[j].into()).norm_sqr()
    });
    let max = m.max();
    if max > 0.0 {
        m /= max;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn sinc_small_argument() {
        for r in [1e-3, 5e-4, 1e-6] {
            let z = c(r);
            let s = sinc(z);
            assert!((s - 1.0 + z * z / 6.0).norm() <= 1e-12);
        }
        assert_relative_eq!(sinc(c(1.0)).re, 1f64.sin(), max_relative = 1e-15);
    }

    #[test]
    fn zero_phase_point() {
        let s = EppSource::degenerate(30000.0, 150.0, 10.0);
        let f = s.jsa(c(15000.0), c(15000.0));
        let peak = s.pump_amplitude(c(30000.0));
        assert_relative_eq!(f.re, 2.0 * peak.re, max_relative = 1e-14);
        assert!(f.im.abs() < 1e-14 * f.re);
    }

    #[test]
    fn exchange_symmetry() {
        let mut s = EppSource::mediated(14800.0, 15300.0, 120.0, 25.0);
        s.t1 = 4.0;
        let mut swapped = s;
        swapped.t1 = s.t2;
        swapped.t2 = s.t1;
        for (a, b) in [(14750.0, 15290.0), (15010.0, 15100.0), (14900.0, 15200.0)] {
            let x = s.jsa(c(a), c(b));
            let y = swapped.jsa(c(b), c(a));
            assert!((x - y).norm() <= 1e-12 * x.norm());
        }
    }

    #[test]
    fn entangled_hermitian() {
        let s = EppSource::degenerate(30000.0, 100.0, 20.0);
        let w = [c(14990.0), c(15020.0), c(14980.0), c(15005.0)];
        let a = four_point_entangled(&s, w[0], w[1], w[2], w[3]);
        let b = four_point_entangled(&s, w[2], w[3], w[0], w[1]);
        assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn coherent_intensity_scaling() {
        let s = CoherentSource::uniform(15000.0, 30.0);
        let mut d = s;
        for p in &mut d.profiles {
            p.amplitude *= 2.0;
        }
        let w = c(15010.0);
        let r = four_point_coherent(&d, w, w, w, w) / four_point_coherent(&s, w, w, w, w);
        assert_relative_eq!(r.re, 16.0, max_relative = 1e-14);
        let peak = four_point_coherent(&s, c(15000.0), c(15000.0), c(15000.0), c(15000.0));
        assert_relative_eq!(peak.re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn jsi_rejects_empty_grid() {
        let s = EppSource::degenerate(30000.0, 150.0, 10.0);
        assert!(jsi_map(&s, &[], &[1.0]).is_err());
        let m = jsi_map(&s, &[14990.0, 15000.0], &[15000.0, 15010.0]).unwrap();
        assert_relative_eq!(m.max(), 1.0);
    }

    #[test]
    fn pump_field_is_fourier_pair() {
        // ∫ κdν/2π A_p(ν) e^{−iκντ} by brute force at a few delays
        let s = EppSource::degenerate(30000.0, 60.0, 10.0);
        let k = RAD_PER_FS_PER_CM;
        let rule = crate::quad::composite_gauss_legendre(20, 40, 29000.0, 31000.0);
        for tau in [-50.0, 0.0, 35.0] {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(nu, w) in &rule {
                acc += w * k / (2.0 * std::f64::consts::PI)
                    * s.pump_amplitude(c(nu))
                    * Complex64::new(0.0, -k * nu * tau).exp();
            }
            assert!((acc - s.pump_field(tau)).norm() < 1e-10 * s.pump_field(0.0).norm());
        }
    }
}
