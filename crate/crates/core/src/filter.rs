//! Lorentzian time-frequency gates and the lineshapes they imprint on an
//! emitting coherence.
//!
//! A gate has a temporal part θ(t′ − t̄)e^{−σ_t(t′ − t̄)} and a spectral part
//! i/(ω − ω̄ + iσ_ω). Their spectrogram D(t′, τ) is what multiplies the
//! emitter correlation function; τ > 0 and τ < 0 are kept apart because the
//! two branches pair with different Green's function orderings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_to_infinity, Tolerance};
use crate::units::RAD_PER_FS_PER_CM;

const K: f64 = RAD_PER_FS_PER_CM;

/// One detector gate. Frequencies and widths in cm⁻¹, the gate opening time
/// in fs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(default)]
    pub t_bar: f64,
    #[serde(default)]
    pub omega_bar: f64,
    pub sigma_t: f64,
    pub sigma_omega: f64,
}

impl FilterSpec {
    pub fn new(sigma_t: f64, sigma_omega: f64) -> Self {
        Self {
            t_bar: 0.0,
            omega_bar: 0.0,
            sigma_t,
            sigma_omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_t > 0.0 && self.sigma_t.is_finite()) {
            return Err(Error::validation(format!("sigma_t must be positive, got {}", self.sigma_t)));
        }
        if !(self.sigma_omega > 0.0 && self.sigma_omega.is_finite()) {
            return Err(Error::validation(format!(
                "sigma_omega must be positive, got {}",
                self.sigma_omega
            )));
        }
        if !self.t_bar.is_finite() || !self.omega_bar.is_finite() {
            return Err(Error::validation("filter centers must be finite"));
        }
        Ok(())
    }

    pub fn centered(&self, t_bar: f64, omega_bar: f64) -> Self {
        Self {
            t_bar,
            omega_bar,
            ..*self
        }
    }
}

/// Which sign of the photon delay τ a spectrogram branch covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Greater,
    Less,
}

/// D(t̄, ω̄; t′, τ), in cm.
pub fn spectrogram(filter: &FilterSpec, t_prime: f64, tau: f64) -> Complex64 {
    let gate_open = t_prime - filter.t_bar;
    if gate_open < 0.0 || gate_open + tau < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let spectral = -K * filter.sigma_omega * tau.abs();
    let temporal = -K * filter.sigma_t * (tau + 2.0 * gate_open);
    let phase = -K * filter.omega_bar * tau;
    Complex64::from_polar((spectral + temporal).exp(), phase) / (2.0 * filter.sigma_omega)
}

/// The spectrogram restricted to one branch.
pub fn spectrogram_branch(filter: &FilterSpec, branch: Branch, t_prime: f64, tau: f64) -> Complex64 {
    let inside = match branch {
        Branch::Greater => tau >= 0.0,
        Branch::Less => tau < 0.0,
    };
    if inside {
        spectrogram(filter, t_prime, tau)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Gate-integrated response of a coherence radiating at ω with width γ,
/// split by delay branch. Both carry the gate normalization
/// 1/(2σ_ω) · 1/(2κσ_t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilteredLineshape {
    pub greater: Complex64,
    pub less: Complex64,
}

impl FilteredLineshape {
    pub fn get(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Greater => self.greater,
            Branch::Less => self.less,
        }
    }

    /// Sum of both branches; real, and a Lorentzian in ω̄ − ω.
    pub fn absorptive(&self) -> Complex64 {
        self.greater + self.less
    }
}

/// Total Lorentzian half width seen through the gate.
pub fn total_width(filter: &FilterSpec, gamma: f64) -> f64 {
    filter.sigma_omega + filter.sigma_t + gamma
}

/// Full width at half maximum of the absorptive lineshape.
pub fn absorptive_fwhm(filter: &FilterSpec, gamma: f64) -> f64 {
    2.0 * total_width(filter, gamma)
}

/// Closed-form integral of the spectrogram against e^{iκωτ − κγ|τ|} over the
/// gate time t′ and each branch of τ.
pub fn filtered_lineshape(filter: &FilterSpec, omega: f64, gamma: f64) -> Result<FilteredLineshape> {
    if !(gamma >= 0.0) {
        return Err(Error::validation(format!("coherence width must be >= 0, got {gamma}")));
    }
    let norm = 1.0 / (2.0 * filter.sigma_omega) / (2.0 * K * filter.sigma_t);
    let width = total_width(filter, gamma);
    let detune = filter.omega_bar - omega;
    Ok(FilteredLineshape {
        greater: norm / (K * Complex64::new(width, detune)),
        less: norm / (K * Complex64::new(width, -detune)),
    })
}

/// The same lineshape by nested adaptive quadrature of the spectrogram.
pub fn filtered_lineshape_quadrature(
    filter: &FilterSpec,
    omega: f64,
    gamma: f64,
    tol: Tolerance,
) -> Result<FilteredLineshape> {
    let tau_scale = 1.0 / (K * total_width(filter, gamma));
    let t_scale = 1.0 / (2.0 * K * filter.sigma_t);
    let coherence = |tau: f64| Complex64::from_polar((-K * gamma * tau.abs()).exp(), K * omega * tau);

    let gate = |tau: f64| -> Result<Complex64> {
        let start = filter.t_bar + (-tau).max(0.0);
        Ok(integrate_to_infinity(|t| spectrogram(filter, t, tau), start, t_scale, tol)?.value)
    };
    let mut failure = None;
    let mut branch = |sign: f64| {
        integrate_to_infinity(
            |s| {
                let tau = sign * s;
                match gate(tau) {
                    Ok(g) => g * coherence(tau),
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            0.0,
            tau_scale,
            tol,
        )
        .map(|e| e.value)
    };
    let greater = branch(1.0)?;
    let less = branch(-1.0)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(FilteredLineshape { greater, less })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gate() -> FilterSpec {
        FilterSpec {
            t_bar: 40.0,
            omega_bar: 15100.0,
            sigma_t: 4.8681,
            sigma_omega: 10.0,
        }
    }

    #[test]
    fn support_and_peak_value() {
        let f = gate();
        assert_eq!(spectrogram(&f, 39.0, 5.0), Complex64::new(0.0, 0.0));
        assert_eq!(spectrogram(&f, 45.0, -6.0), Complex64::new(0.0, 0.0));
        assert_relative_eq!(spectrogram(&f, 40.0, 0.0).re, 0.05, max_relative = 1e-15);
    }

    #[test]
    fn envelope_bound() {
        let f = gate();
        let top = spectrogram(&f, f.t_bar, 0.0).norm();
        for &(t, tau) in &[(40.0, 3.0), (100.0, -30.0), (41.0, -1.0), (500.0, 200.0)] {
            assert!(spectrogram(&f, t, tau).norm() <= top);
        }
    }

    #[test]
    fn fourier_transform_recovers_filter_spectrum() {
        // dividing out the temporal gates leaves the transform of |F_ω̄(ν)|²
        let f = gate();
        let t = f.t_bar + 20000.0;
        let gates = |tau: f64| (-K * f.sigma_t * (tau + 2.0 * (t - f.t_bar))).exp();
        let tol = Tolerance::new(1e-16, 1e-12);
        for &nu in &[15100.0, 15093.0, 15112.5, 15140.0] {
            let g = |tau: f64| spectrogram(&f, t, tau) / gates(tau) * Complex64::from_polar(1.0, K * nu * tau);
            let neg = crate::quad::integrate(g, -20000.0, 0.0, &[], tol).unwrap().value;
            let pos = crate::quad::integrate(g, 0.0, 20000.0, &[], tol).unwrap().value;
            let d = nu - f.omega_bar;
            let expected = 1.0 / (K * (d * d + f.sigma_omega * f.sigma_omega));
            let got = neg + pos;
            assert!((got.re - expected).abs() <= 1e-8 * expected, "{nu}: {got} vs {expected}");
            assert!(got.im.abs() <= 1e-8 * expected);
        }
    }

    #[test]
    fn lineshape_matches_quadrature() {
        let tol = Tolerance::new(1e-16, 1e-11);
        for &(omega, gamma) in &[(15100.0, 0.0), (15130.0, 12.0), (15050.0, 40.0)] {
            let f = gate();
            let closed = filtered_lineshape(&f, omega, gamma).unwrap();
            let quad = filtered_lineshape_quadrature(&f, omega, gamma, tol).unwrap();
            for b in [Branch::Greater, Branch::Less] {
                let (c, q) = (closed.get(b), quad.get(b));
                assert!((c - q).norm() <= 1e-8 * c.norm(), "{b:?}: {c} vs {q}");
            }
        }
    }

    #[test]
    fn peak_at_resonance() {
        let f = gate();
        let scan: Vec<(f64, f64)> = (0..2001)
            .map(|i| {
                let w = 15000.0 + 0.1 * i as f64;
                (w, filtered_lineshape(&f.centered(0.0, w), 15073.4, 8.0).unwrap().greater.norm())
            })
            .collect();
        let best = scan.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((best.0 - 15073.4).abs() <= 0.05 + 1e-9);
    }

    fn measured_fwhm(f: &FilterSpec, gamma: f64) -> f64 {
        let profile = |w: f64| filtered_lineshape(&f.centered(0.0, w), 15000.0, gamma).unwrap().absorptive().re;
        let half = 0.5 * profile(15000.0);
        let (mut lo, mut hi) = (15000.0, 20000.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if profile(mid) > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * (lo - 15000.0)
    }

    #[test]
    fn width_grows_with_both_gate_widths() {
        let narrow = FilterSpec::new(4.8681, 10.0);
        let w10 = measured_fwhm(&narrow, 6.0);
        let w20 = measured_fwhm(&FilterSpec::new(4.8681, 20.0), 6.0);
        assert!(w20 > w10);
        assert_relative_eq!(w10, absorptive_fwhm(&narrow, 6.0), max_relative = 1e-9);
        assert!(measured_fwhm(&FilterSpec::new(0.5409, 10.0), 6.0) <= w10);
    }

    #[test]
    fn negative_width_rejected() {
        assert!(filtered_lineshape(&gate(), 15000.0, -1.0).is_err());
        assert!(FilterSpec::new(0.0, 10.0).validate().is_err());
    }
}
