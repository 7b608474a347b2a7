//! Brute-force evaluation of the pathway field integrals.
//!
//! Each pathway integral runs over four time-ordered interaction times. The
//! fields are Gaussian in the absolute time, so that coordinate is integrated
//! analytically. For the entangled source the two-photon wavefunction has
//! compact support in the photon delay, which turns two or three of the
//! delays into unit-interval coordinates handled by Gauss–Legendre rules. For
//! the coherent source the last delay is also done in closed form (a
//! half-line Gaussian, through the scaled complementary error function) and
//! the other two by composite Gauss–Legendre.
//!
//! The absolute time runs over the whole line, so the result is the value
//! reached once the fields are over. That only makes sense when the final
//! population outlives the field correlation time; faster decay is rejected.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::excitation::{prepare_with_kernel, ExcitationOptions, Ordering, PathwayKernel, PreparationResult};
use crate::model::ExcitonModel;
use crate::quad::{composite_gauss_legendre, gauss_legendre};
use crate::source::{CoherentSource, EppSource};
use crate::units::RAD_PER_FS_PER_CM;

const I: Complex64 = Complex64::new(0.0, 1.0);
const K: f64 = RAD_PER_FS_PER_CM;
/// Largest κ|Im ζ_last|·(correlation time) the oracle accepts.
const MAX_DECAY_PER_PULSE: f64 = 1.0;

#[derive(Debug, Clone, Copy)]
pub enum OracleSource {
    Entangled(EppSource),
    Coherent(CoherentSource),
}

/// Resolution of the delay quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleSettings {
    /// Semi-infinite delays are cut at this many field correlation times.
    pub window: f64,
    /// Gauss–Legendre nodes per unit-interval coordinate.
    pub box_nodes: usize,
    /// Nodes per panel on semi-infinite delays.
    pub panel_order: usize,
    /// Panel width as a fraction of the field correlation time.
    pub panel_fraction: f64,
    /// Largest phase advance allowed across one panel, rad.
    pub panel_phase: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            window: 8.0,
            box_nodes: 20,
            panel_order: 12,
            panel_fraction: 1.0,
            panel_phase: 3.0,
        }
    }
}

impl OracleSettings {
    /// Same window, roughly 1.5× the nodes in every direction.
    pub fn refined(&self) -> Self {
        Self {
            box_nodes: self.box_nodes * 3 / 2,
            panel_order: self.panel_order + 4,
            panel_fraction: self.panel_fraction / 1.5,
            panel_phase: self.panel_phase / 1.5,
            ..*self
        }
    }

    pub fn with_window(&self, window: f64) -> Self {
        Self { window, ..*self }
    }
}

/// One Gaussian field factor c·exp(−g(τ+x0)² + iσκν(τ+x0)) seen as a
/// quadratic in the absolute time τ.
#[derive(Clone, Copy)]
struct Quadratic {
    a: f64,
    b: Complex64,
    c: Complex64,
}

impl Quadratic {
    fn zero() -> Self {
        Self {
            a: 0.0,
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
        }
    }

    /// Adds −g(τ+x0)² − i s κ ν (τ+x0), where s = +1 for an absorbed field
    /// (E) and −1 for its conjugate.
    fn add(&mut self, g: f64, nu: f64, x0: f64, s: f64) {
        let lin = Complex64::new(0.0, -s * K * nu);
        self.a -= g;
        self.b += -2.0 * g * x0 + lin;
        self.c += -g * x0 * x0 + lin * x0;
    }

    /// ∫ exp(aτ² + bτ + c) dτ for a < 0.
    fn integral(&self) -> Complex64 {
        (std::f64::consts::PI / -self.a).sqrt() * (self.c - self.b * self.b / (4.0 * self.a)).exp()
    }
}

pub struct TimeDomainOracle {
    source: OracleSource,
    settings: OracleSettings,
    box_rule: Vec<(f64, f64)>,
    /// Field correlation time, fs.
    scale: f64,
}

impl TimeDomainOracle {
    pub fn new(source: OracleSource, settings: OracleSettings) -> Result<Self> {
        let scale = match &source {
            OracleSource::Entangled(s) => {
                s.validate()?;
                if !(s.entanglement_time() > 0.0) {
                    return Err(Error::validation(
                        "time-domain oracle needs a positive entanglement time",
                    ));
                }
                1.0 / s.pump_gamma_rad().sqrt()
            }
            OracleSource::Coherent(c) => {
                c.validate()?;
                let wmin = c.profiles.iter().map(|p| p.width).fold(f64::INFINITY, f64::min);
                std::f64::consts::SQRT_2 / (K * wmin)
            }
        };
        Ok(Self {
            source,
            settings,
            box_rule: gauss_legendre(settings.box_nodes, 0.0, 1.0),
            scale,
        })
    }

    fn window(&self) -> f64 {
        self.settings.window * self.scale
    }

    /// Rule on [0, window] fine enough for a residual oscillation `detune`
    /// (cm⁻¹) and the field envelope.
    fn delay_rule(&self, detune: f64) -> Vec<(f64, f64)> {
        let l = self.window();
        let mut h = self.settings.panel_fraction * self.scale;
        if detune > 0.0 {
            h = h.min(self.settings.panel_phase / (K * detune));
        }
        let panels = ((l / h).ceil() as usize).max(1);
        composite_gauss_legendre(self.settings.panel_order, panels, 0.0, l)
    }

    /// Carrier frequency of each interaction in time order, signed so that
    /// absorption on the ket counts positive.
    fn carriers(&self, ordering: Ordering) -> [f64; 4] {
        let mut nu = [0.0; 4];
        for (slot, &k) in ordering.slots().iter().enumerate() {
            let c = match &self.source {
                OracleSource::Entangled(s) => 0.5 * s.pump_center,
                OracleSource::Coherent(c) => c.profiles[slot].center,
            };
            nu[k] = if ordering.is_ket(k) { c } else { -c };
        }
        nu
    }

    /// Largest |Re ζ_k − accumulated carrier| over the three delays.
    fn detuning(&self, ordering: Ordering, z: &[Complex64; 4]) -> f64 {
        let nu = self.carriers(ordering);
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            acc += nu[k];
            worst = worst.max((z[k].re - acc).abs());
        }
        worst
    }

    /// Kernel exponent for interaction offsets `o` (relative to the first
    /// interaction), excluding the τ-linear part of the final pole.
    fn kernel_exponent(z: &[Complex64; 4], o: &[f64; 4]) -> Complex64 {
        let mut e = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            e += -I * K * z[k] * (o[k + 1] - o[k]);
        }
        e + I * K * z[3] * o[3]
    }

    fn entangled(&self, s: &EppSource, ordering: Ordering, z: &[Complex64; 4]) -> Complex64 {
        let t = s.entanglement_time();
        let g = s.pump_gamma_rad();
        let nu_p = s.pump_center;
        let amp = s.alpha * s.e0 * K / t;
        let prefactor = amp * amp;
        let phase = |u: f64| {
            Complex64::new(0.0, -K * u * s.omega1 * (s.t1 + s.t2)).exp()
                + Complex64::new(0.0, -K * u * s.omega2 * (s.t1 + s.t2)).exp()
        };
        // o: offsets in time order; u, v: ket and bra photon-delay fractions
        let point = |o: [f64; 4], u: f64, v: f64, bra_early: f64| -> Complex64 {
            let mut q = Quadratic::zero();
            q.add(g, nu_p, -u * s.t1, 1.0);
            q.add(g, nu_p, bra_early - v * s.t1, -1.0);
            q.b += I * K * z[3];
            q.c += Self::kernel_exponent(z, &o);
            phase(u) * phase(v).conj() * q.integral()
        };
        let bx = &self.box_rule;
        let mut acc = Complex64::new(0.0, 0.0);
        match ordering {
            Ordering::KetKetBraBra => {
                let rule = self.delay_rule(self.detuning(ordering, z));
                for &(u, wu) in bx {
                    for &(v, wv) in bx {
                        for &(r, wr) in &rule {
                            let o1 = u * t;
                            let o2 = o1 + r;
                            let o = [0.0, o1, o2, o2 + v * t];
                            acc += (wu * wv * wr * t * t) * point(o, u, v, o2);
                        }
                    }
                }
            }
            Ordering::KetBraKetBra => {
                for &(u, wu) in bx {
                    for &(w, ww) in bx {
                        let v0 = (1.0 - w) * u;
                        for &(y, wy) in bx {
                            let v = v0 + (1.0 - v0) * y;
                            let b1 = w * u * t;
                            let o = [0.0, b1, u * t, b1 + v * t];
                            let jac = t * (u * t) * (t * (1.0 - v0));
                            acc += (wu * ww * wy * jac) * point(o, u, v, b1);
                        }
                    }
                }
            }
            Ordering::KetBraBraKet => {
                for &(u, wu) in bx {
                    for &(w, ww) in bx {
                        let vmax = (1.0 - w) * u;
                        for &(y, wy) in bx {
                            let v = vmax * y;
                            let b1 = w * u * t;
                            let o = [0.0, b1, b1 + v * t, u * t];
                            let jac = t * (u * t) * (t * vmax);
                            acc += (wu * ww * wy * jac) * point(o, u, v, b1);
                        }
                    }
                }
            }
        }
        prefactor * acc
    }

    fn coherent(&self, c: &CoherentSource, ordering: Ordering, z: &[Complex64; 4]) -> Complex64 {
        let r1 = self.delay_rule((z[0].re - c.profiles[0].center).abs());
        let nu = self.carriers(ordering);
        let r2 = self.delay_rule((z[1].re - nu[0] - nu[1]).abs());
        let slots = ordering.slots();
        let mut prefactor = Complex64::new(1.0, 0.0);
        for p in &c.profiles {
            prefactor *= p.amplitude * K * p.width / (2.0 * std::f64::consts::PI).sqrt();
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(d1, w1) in &r1 {
            for &(d2, w2) in &r2 {
                // the last delay d3 and the absolute time are both Gaussian
                let base = [0.0, d1, d1 + d2, d1 + d2];
                let mut q = Quadratic2::default();
                for (slot, p) in c.profiles.iter().enumerate() {
                    let sign = if slot < 2 { 1.0 } else { -1.0 };
                    let k = slots[slot];
                    let delta = if k == 3 { 1.0 } else { 0.0 };
                    q.add_field(0.5 * (K * p.width).powi(2), p.center, base[k], delta, sign);
                }
                q.c += -I * K * (z[0] * d1 + z[1] * d2) + I * K * z[3] * (d1 + d2);
                q.bd += -I * K * z[2] + I * K * z[3];
                q.bt += I * K * z[3];
                acc += (w1 * w2) * q.integral();
            }
        }
        prefactor * acc
    }
}

/// exp(att τ² + atd τd + add d² + bt τ + bd d + c) integrated over τ ∈ ℝ and
/// d ∈ [0, ∞).
#[derive(Default, Clone, Copy)]
struct Quadratic2 {
    att: f64,
    atd: f64,
    add: f64,
    bt: Complex64,
    bd: Complex64,
    c: Complex64,
}

impl Quadratic2 {
    /// Field factor at time τ + x0 + δ·d (see [`Quadratic::add`]).
    fn add_field(&mut self, g: f64, nu: f64, x0: f64, delta: f64, s: f64) {
        let lin = Complex64::new(0.0, -s * K * nu);
        self.att -= g;
        self.atd -= 2.0 * g * delta;
        self.add -= g * delta * delta;
        self.bt += -2.0 * g * x0 + lin;
        self.bd += -2.0 * g * x0 * delta + lin * delta;
        self.c += -g * x0 * x0 + lin * x0;
    }

    fn integral(&self) -> Complex64 {
        let pi = std::f64::consts::PI;
        let a = self.att;
        let c1 = self.c - self.bt * self.bt / (4.0 * a);
        let b = self.bd - self.bt * self.atd / (2.0 * a);
        let big_a = -(self.add - self.atd * self.atd / (4.0 * a));
        let z = -b / (2.0 * big_a.sqrt());
        let half_line = if z.re >= 0.0 {
            c1.exp() * z.erfcx()
        } else {
            // erfc(z) = 2 − erfc(−z), kept in scaled form
            2.0 * (c1 + z * z).exp() - c1.exp() * (-z).erfcx()
        };
        (pi / -a).sqrt() * 0.5 * (pi / big_a).sqrt() * half_line
    }
}

impl PathwayKernel for TimeDomainOracle {
    fn eval(&self, ordering: Ordering, z: &[Complex64; 4]) -> Result<Complex64> {
        let decay = K * z[3].im.abs() * self.scale;
        if decay > MAX_DECAY_PER_PULSE {
            return Err(Error::numerical(format!(
                "final population decays {decay:.2} times per field correlation time; \
                 the after-pulse integral is not defined"
            )));
        }
        let v = match &self.source {
            OracleSource::Entangled(s) => self.entangled(s, ordering, z),
            OracleSource::Coherent(c) => self.coherent(c, ordering, z),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numerical("oracle integrand overflowed"))
        }
    }
}

/// How far two quadrature resolutions (and two windows) disagree.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceReport {
    pub settings: OracleSettings,
    /// max_f |base − refined| / max_f |refined|.
    pub refinement_change: f64,
    /// Same with the window doubled, if that study was requested.
    pub window_change: Option<f64>,
}

fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Quadrature evaluation of ρ_ff, run at two resolutions. Fails when they
/// differ by more than `tol`. `window_study` also repeats the run with the
/// truncation window doubled.
pub fn prepare_quadrature_oracle(
    model: &ExcitonModel,
    source: OracleSource,
    opts: &ExcitationOptions,
    settings: OracleSettings,
    tol: f64,
    window_study: bool,
) -> Result<(PreparationResult, ConvergenceReport)> {
    if model.eig.n_sites() > 3 {
        log::warn!(
            "quadrature oracle on {} sites; cost grows steeply beyond 3",
            model.eig.n_sites()
        );
    }
    let base = prepare_with_kernel(model, &TimeDomainOracle::new(source, settings)?, opts, "oracle")?;
    let fine_settings = settings.refined();
    let fine = prepare_with_kernel(model, &TimeDomainOracle::new(source, fine_settings)?, opts, "oracle")?;
    let refinement_change = relative_change(&base.raw, &fine.raw);
    let window_change = if window_study {
        let wide = settings.with_window(2.0 * settings.window);
        let w = prepare_with_kernel(model, &TimeDomainOracle::new(source, wide)?, opts, "oracle")?;
        Some(relative_change(&w.raw, &base.raw))
    } else {
        None
    };
    let report = ConvergenceReport {
        settings,
        refinement_change,
        window_change,
    };
    if refinement_change > tol {
        return Err(Error::Convergence(format!(
            "oracle changed by {refinement_change:.3e} under refinement (tolerance {tol:.1e})"
        )));
    }
    Ok((fine, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let mut q = Quadratic::zero();
        q.add(0.5, 0.0, 0.0, 1.0);
        // ∫ e^{−τ²/2} = √(2π)
        assert!((q.integral().re - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn single_field_matches_pointwise_product() {
        // the quadratic form reproduces the pump field at a shifted time
        let s = EppSource::degenerate(30000.0, 40.0, 10.0);
        let mut q = Quadratic::zero();
        q.add(s.pump_gamma_rad(), s.pump_center, 7.0, 1.0);
        let tau = -3.0;
        let direct = s.pump_field(tau + 7.0) / (s.e0 * K);
        let via = (q.a * tau * tau + q.b * tau + q.c).exp();
        assert!((direct - via).norm() < 1e-12);
    }

    #[test]
    fn half_line_gaussian() {
        // ∫dτ ∫_0^∞ dd exp(−τ² − d² + i d) against brute force in d
        let mut q = Quadratic2::default();
        q.att = -1.0;
        q.add = -1.0;
        q.bd = Complex64::new(0.0, 1.0);
        let rule = crate::quad::composite_gauss_legendre(20, 20, 0.0, 10.0);
        let brute: Complex64 = rule
            .iter()
            .map(|&(d, w)| w * Complex64::new(-d * d, d).exp())
            .sum::<Complex64>()
            * std::f64::consts::PI.sqrt();
        assert!((q.integral() - brute).norm() < 1e-12);
    }

    #[test]
    fn rejects_zero_entanglement_time() {
        let s = EppSource::degenerate(30000.0, 40.0, 0.0);
        assert!(TimeDomainOracle::new(OracleSource::Entangled(s), OracleSettings::default()).is_err());
    }
}
