//! Time-frequency gated two-photon coincidences from a prepared two-exciton
//! population.
//!
//! The cascade is f → f′ (two-exciton transport), f′ → e (first photon,
//! seen by the `fe` gate), e → e′ (one-exciton transport), e′ → g (second
//! photon, `eg` gate). The snapshot evaluation freezes the two transport
//! stages at fixed waiting times and reduces every gate to its filtered
//! lineshape, so a whole detector grid is a product of two small tables. The
//! time oracle instead integrates over the gate times, letting transport run
//! while the gates are open.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exciton::Manifold;
use crate::filter::{filtered_lineshape, FilterSpec};
use crate::model::ExcitonModel;
use crate::propagate::{population_propagator, PopulationDistribution};
use crate::quad::composite_gauss_legendre;
use crate::transport::TransportModel;
use crate::units::RAD_PER_FS_PER_CM;

const K: f64 = RAD_PER_FS_PER_CM;

/// Gate widths for the two detectors, named by the transition they watch.
/// Centers are filled in per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorPair {
    pub fe: FilterSpec,
    pub eg: FilterSpec,
}

impl DetectorPair {
    pub fn symmetric(sigma_t: f64, sigma_omega: f64) -> Self {
        let f = FilterSpec::new(sigma_t, sigma_omega);
        Self { fe: f, eg: f }
    }

    pub fn validate(&self) -> Result<()> {
        self.fe.validate().map_err(|e| e.in_stage("fe filter"))?;
        self.eg.validate().map_err(|e| e.in_stage("eg filter"))
    }
}

/// Detector-center grid with its waiting times and, once evaluated, the
/// max-normalized signal. `values[i][j]` belongs to `fe_axis[i]`,
/// `eg_axis[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalGrid {
    pub fe_axis: Vec<f64>,
    pub eg_axis: Vec<f64>,
    /// Two-exciton transport time before the first emission, fs.
    pub tw1: f64,
    /// One-exciton transport time between the emissions, fs.
    pub tw2: f64,
    /// |𝒟(ω₁)𝒟(ω₂)|², constant in the narrowband detector limit.
    pub detector_dos: f64,
    pub values: Vec<Vec<f64>>,
    /// Raw maximum the values were divided by; 0 for an all-zero signal.
    pub normalization: f64,
}

/// Evenly spaced axis including both ends.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl SignalGrid {
    pub fn new(fe_axis: Vec<f64>, eg_axis: Vec<f64>, tw1: f64, tw2: f64) -> Result<Self> {
        let grid = Self {
            values: vec![vec![0.0; eg_axis.len()]; fe_axis.len()],
            fe_axis,
            eg_axis,
            tw1,
            tw2,
            detector_dos: 1.0,
            normalization: 0.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fe_axis.is_empty() || self.eg_axis.is_empty() {
            return Err(Error::validation("detector axes must not be empty"));
        }
        if self.fe_axis.iter().chain(&self.eg_axis).any(|w| !w.is_finite()) {
            return Err(Error::validation("detector axes must be finite"));
        }
        if !(self.tw1 >= 0.0 && self.tw2 >= 0.0) || !self.tw1.is_finite() || !self.tw2.is_finite() {
            return Err(Error::validation(format!(
                "waiting times must be finite and >= 0, got {} and {}",
                self.tw1, self.tw2
            )));
        }
        if !(self.detector_dos > 0.0 && self.detector_dos.is_finite()) {
            return Err(Error::validation("detector density of states must be positive"));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.fe_axis.len(), self.eg_axis.len())
    }

    /// Same axes and settings with the signal cleared.
    pub fn blank(&self) -> Self {
        let mut g = self.clone();
        g.values = vec![vec![0.0; self.eg_axis.len()]; self.fe_axis.len()];
        g.normalization = 0.0;
        g
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut top = f64::NEG_INFINITY;
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > top {
                    top = v;
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Grid points at or above `threshold` (relative to the maximum) that are
    /// not exceeded by any of their eight neighbours.
    pub fn local_maxima(&self, threshold: f64) -> Vec<(usize, usize)> {
        let (n, m) = self.shape();
        let top = self.values.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
        if top <= 0.0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let v = self.values[i][j];
                if v < threshold * top {
                    continue;
                }
                let mut is_peak = true;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= m as i64 {
                            continue;
                        }
                        if self.values[a as usize][b as usize] > v {
                            is_peak = false;
                        }
                    }
                }
                // plateaus count once, at their first point
                if is_peak && !out.iter().any(|&(a, b): &(usize, usize)| {
                    a.abs_diff(i) <= 1 && b.abs_diff(j) <= 1 && self.values[a][b] == v
                }) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Maximum over the fe axis for each eg center.
    pub fn eg_profile(&self) -> Vec<f64> {
        (0..self.eg_axis.len())
            .map(|j| self.values.iter().fold(0.0_f64, |a, row| a.max(row[j])))
            .collect()
    }

    /// Maximum over the eg axis for each fe center.
    pub fn fe_profile(&self) -> Vec<f64> {
        self.values.iter().map(|row| row.iter().fold(0.0_f64, |a, &b| a.max(b))).collect()
    }
}

/// Number of local maxima of a 1D profile at or above `threshold` of its
/// maximum.
pub fn count_profile_peaks(profile: &[f64], threshold: f64) -> usize {
    let top = profile.iter().fold(0.0_f64, |a, &b| a.max(b));
    if top <= 0.0 {
        return 0;
    }
    let n = profile.len();
    let mut count = 0;
    let mut j = 0;
    while j < n {
        // walk over a plateau as one candidate
        let mut k = j;
        while k + 1 < n && profile[k + 1] == profile[j] {
            k += 1;
        }
        let left_ok = j == 0 || profile[j - 1] < profile[j];
        let right_ok = k + 1 == n || profile[k + 1] < profile[j];
        if left_ok && right_ok && profile[j] >= threshold * top {
            count += 1;
        }
        j = k + 1;
    }
    count
}

fn check_population(rho: &PopulationDistribution, model: &ExcitonModel) -> Result<()> {
    if rho.manifold != Manifold::Two || rho.values.len() != model.n_two() {
        return Err(Error::validation(format!(
            "coincidence signal needs a two-exciton population over {} states, got the {} manifold with {}",
            model.n_two(),
            rho.manifold,
            rho.values.len()
        )));
    }
    Ok(())
}

/// Divides by the maximum, clipping round-off negatives.
fn normalize(grid: &mut SignalGrid, raw: Vec<Vec<f64>>) -> Result<()> {
    if raw.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::numerical("coincidence signal is not finite"));
    }
    let top = raw.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
    let floor = raw.iter().flatten().fold(0.0_f64, |a, &b| a.min(b));
    if floor < -1e-8 * top.max(f64::MIN_POSITIVE) && floor < 0.0 && top > 0.0 {
        return Err(Error::numerical(format!(
            "coincidence signal has a negative value {floor:.3e} against maximum {top:.3e}"
        )));
    }
    grid.normalization = top;
    grid.values = raw
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| if top > 0.0 { v.max(0.0) / top } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(())
}

/// Snapshot evaluation on a detector grid.
pub fn coincidence_snapshot(
    rho: &PopulationDistribution,
    model: &ExcitonModel,
    detectors: &DetectorPair,
    grid: &SignalGrid,
) -> Result<SignalGrid> {
    check_population(rho, model)?;
    detectors.validate()?;
    grid.validate()?;
    let (n_e, n_f) = (model.n_one(), model.n_two());
    let dip = &model.dipoles;

    let p2 = population_propagator(&model.two, grid.tw1)? * nalgebra::DVector::from_column_slice(&rho.values);
    let g1 = population_propagator(&model.one, grid.tw2)?;

    // first photon: Σ_f′ p_f′ |d_f′e|² (L_> + L_<)
    let fe_table: Vec<Vec<Complex64>> = grid
        .fe_axis
        .par_iter()
        .map(|&w| {
            let gate = detectors.fe.centered(grid.tw1, w);
            let mut row = vec![Complex64::new(0.0, 0.0); n_e];
            for (e, slot) in row.iter_mut().enumerate() {
                for f in 0..n_f {
                    let weight = p2[f] * dip.fe_strength(f, e);
                    if weight == 0.0 {
                        continue;
                    }
                    let l = filtered_lineshape(&gate, model.f(f) - model.e(e), model.widths.fe(f, e))?;
                    *slot += weight * l.absorptive();
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    // second photon: Σ_e′ G⁽¹⁾_e′e |d_e′g|² L_>
    let eg_table: Vec<Vec<Complex64>> = grid
        .eg_axis
        .par_iter()
        .map(|&w| {
            let gate = detectors.eg.centered(grid.tw1 + grid.tw2, w);
            let lines = (0..n_e)
                .map(|e2| {
                    filtered_lineshape(&gate, model.e(e2), model.widths.eg(e2))
                        .map(|l| dip.eg_strength(e2) * l.greater)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((0..n_e)
                .map(|e| (0..n_e).map(|e2| g1[(e2, e)] * lines[e2]).sum())
                .collect())
        })
        .collect::<Result<_>>()?;

    let raw: Vec<Vec<f64>> = fe_table
        .par_iter()
        .map(|x| {
            eg_table
                .iter()
                .map(|y| {
                    let s: Complex64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                    2.0 * grid.detector_dos * s.re
                })
                .collect()
        })
        .collect();
    let mut out = grid.blank();
    normalize(&mut out, raw)?;
    Ok(out)
}

/// G(t) = Σ_p e^{−κλ_p t} χR_p χL_p / D_p with the outer products cached.
struct CachedPropagator {
    n: usize,
    rates: Vec<f64>,
    terms: Vec<DMatrix<f64>>,
}

impl CachedPropagator {
    fn new(tm: &TransportModel) -> Self {
        let n = tm.len();
        let terms = (0..n)
            .map(|p| tm.chi_r.column(p) * tm.chi_l.row(p) / tm.d[p])
            .collect();
        Self {
            n,
            rates: tm.eigenvalues.iter().map(|l| K * l).collect(),
            terms,
        }
    }

    fn at(&self, t: f64) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.n, self.n);
        for (rate, term) in self.rates.iter().zip(&self.terms) {
            g += term * (-rate * t).exp();
        }
        g
    }
}

/// Resolution of the coincidence time oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeOracleSettings {
    /// Each semi-infinite time is cut after this many decay lengths of its gate.
    pub horizon: f64,
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Panel width in decay lengths.
    pub panel: f64,
    /// Largest phase advance across one panel of the photon delay, rad.
    pub panel_phase: f64,
}

impl Default for TimeOracleSettings {
    fn default() -> Self {
        Self {
            horizon: 28.0,
            order: 10,
            panel: 2.0,
            panel_phase: 2.0,
        }
    }
}

impl TimeOracleSettings {
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon + 6.0,
            order: self.order + 4,
            panel: self.panel / 1.5,
            panel_phase: self.panel_phase / 1.5,
        }
    }
}

/// Truncation length and panel width for a coordinate decaying at `rate`
/// and oscillating at up to `freq`.
fn decay_span(settings: &TimeOracleSettings, rate: f64, freq: f64) -> (f64, f64) {
    let mut width = settings.panel / rate;
    if freq > 0.0 {
        width = width.min(settings.panel_phase / freq);
    }
    (settings.horizon / rate, width)
}

/// Composite rule on [0, length] with a panel edge forced at `kink`.
fn split_rule(order: usize, length: f64, width: f64, kink: Option<f64>) -> Vec<(f64, f64)> {
    let piece = |a: f64, b: f64| {
        let panels = ((b - a) / width).ceil().max(1.0) as usize;
        composite_gauss_legendre(order, panels, a, b)
    };
    match kink {
        Some(k) if k > 0.0 && k < length => {
            let mut r = piece(0.0, k);
            r.extend(piece(k, length));
            r
        }
        _ => piece(0.0, length),
    }
}

fn decay_rule(settings: &TimeOracleSettings, rate: f64, freq: f64) -> Vec<(f64, f64)> {
    let (length, width) = decay_span(settings, rate, freq);
    split_rule(settings.order, length, width, None)
}

/// Signal at one detector setting by integration over both gate times and
/// both photon delays. The fe gate opens at `tw1`, the eg gate at
/// `tw1 + tw2`. Not normalized.
#[allow(clippy::too_many_arguments)]
pub fn coincidence_time_oracle_point(
    rho: &PopulationDistribution,
    model: &ExcitonModel,
    detectors: &DetectorPair,
    omega_fe: f64,
    omega_eg: f64,
    tw1: f64,
    tw2: f64,
    settings: &TimeOracleSettings,
) -> Result<f64> {
    check_population(rho, model)?;
    detectors.validate()?;
    if !(tw1 >= 0.0 && tw2 >= 0.0) {
        return Err(Error::validation("waiting times must be >= 0"));
    }
    let g2 = CachedPropagator::new(&model.two);
    let g1 = CachedPropagator::new(&model.one);
    Ok(oracle_point(rho, model, detectors, &g1, &g2, omega_fe, omega_eg, tw1, tw2, settings))
}

#[allow(clippy::too_many_arguments)]
fn oracle_point(
    rho: &PopulationDistribution,
    model: &ExcitonModel,
    detectors: &DetectorPair,
    g1: &CachedPropagator,
    g2: &CachedPropagator,
    omega_fe: f64,
    omega_eg: f64,
    tw1: f64,
    tw2: f64,
    settings: &TimeOracleSettings,
) -> f64 {
    let (n_e, n_f) = (model.n_one(), model.n_two());
    let dip = &model.dipoles;
    let (fe, eg) = (detectors.fe, detectors.eg);
    let t_fe = tw1;
    let t_eg = tw1 + tw2;
    let rho_v = nalgebra::DVector::from_column_slice(&rho.values);

    // Second photon delay: the gate factor is separable, so each e′ gets one
    // complex number c_e′ = ∫_0^∞ dτ spectral(τ) e^{iκω_e′g τ − κγ τ}.
    let eg_spectral = K * (eg.sigma_omega + eg.sigma_t);
    let max_detune = (0..n_e).fold(0.0_f64, |m, e| m.max((model.e(e) - omega_eg).abs()));
    let tau1_rule = decay_rule(settings, eg_spectral, K * max_detune);
    let c: Vec<Complex64> = (0..n_e)
        .map(|e2| {
            let z = Complex64::new(eg_spectral + K * model.widths.eg(e2), K * (omega_eg - model.e(e2)));
            let sum: Complex64 = tau1_rule.iter().map(|&(t, w)| w * (-z * t).exp()).sum();
            dip.eg_strength(e2) * sum / (2.0 * eg.sigma_omega)
        })
        .collect();

    // First photon: gate opened for y, photon delay s (either sign).
    let fe_gate_rate = 2.0 * K * fe.sigma_t;
    let fe_spectral = K * (fe.sigma_omega + fe.sigma_t);
    let max_detune = (0..n_f)
        .flat_map(|f| (0..n_e).map(move |e| (f, e)))
        .fold(0.0_f64, |m, (f, e)| m.max((model.f(f) - model.e(e) - omega_fe).abs()));
    let (y_length, y_width) = decay_span(settings, fe_gate_rate, 0.0);
    let y_rule = split_rule(settings.order, y_length, y_width, Some(t_eg - t_fe));
    let (s_length, s_width) = decay_span(settings, fe_spectral, K * max_detune);
    let eg_gate_rate = 2.0 * K * eg.sigma_t;
    let t1_rule = decay_rule(settings, eg_gate_rate, 0.0);
    // When the first photon leaves after the eg gate has opened, the t1′
    // integral starts at u and only the gate's overall factor depends on u.
    let mut late = vec![Complex64::new(0.0, 0.0); n_e];
    for &(x, wx) in &t1_rule {
        let g = g1.at(x);
        let gate_eg = (-eg_gate_rate * x).exp();
        for (e, slot) in late.iter_mut().enumerate() {
            for e2 in 0..n_e {
                *slot += wx * gate_eg * g[(e2, e)] * c[e2];
            }
        }
    }

    // Transport then emission can be split at the gate opening:
    // G⁽¹⁾(t̄_eg − u + x) = G⁽¹⁾(x) G⁽¹⁾(t̄_eg − u), so early emissions see
    // late_m propagated back through each transport eigenmode.
    let early: Vec<Vec<Complex64>> = g1
        .terms
        .iter()
        .map(|term| {
            (0..n_e)
                .map(|e| (0..n_e).map(|m| term[(m, e)] * late[m]).sum())
                .collect()
        })
        .collect();

    // f → e channels with a nonzero dipole: (f, e, |d|², detuning, decay)
    let channels: Vec<(usize, usize, f64, f64, f64)> = (0..n_f)
        .flat_map(|f| (0..n_e).map(move |e| (f, e)))
        .filter(|&(f, e)| dip.fe_strength(f, e) != 0.0)
        .map(|(f, e)| {
            let detune = model.f(f) - model.e(e) - omega_fe;
            (f, e, dip.fe_strength(f, e), K * detune, fe_spectral + K * model.widths.fe(f, e))
        })
        .collect();

    // Once the eg gate is open for every delay (y ≥ t̄_eg − t̄_fe) the delay
    // rule no longer depends on y, so its channel factors are tabulated.
    let s_rule = split_rule(settings.order, s_length, s_width, None);
    let channel_table: Vec<Vec<f64>> = channels
        .iter()
        .map(|&(_, _, strength, detune, rate)| {
            s_rule
                .iter()
                .map(|&(s, ws)| ws * strength * 2.0 * (detune * s).cos() * (-rate * s).exp())
                .collect()
        })
        .collect();
    let gate_table: Vec<f64> = s_rule.iter().map(|&(s, _)| (-eg_gate_rate * s).exp()).collect();

    let mut total = 0.0;
    let mut a = vec![0.0; n_e];
    for &(y, wy) in &y_rule {
        let pops = g2.at(t_fe + y) * &rho_v;
        let gate_fe = (-fe_gate_rate * y).exp();
        // the first photon leaving exactly as the eg gate opens is a kink
        let kink = t_eg - t_fe - y;
        if kink <= 0.0 {
            let opened = (eg_gate_rate * kink).exp();
            let mut acc = 0.0;
            for k in 0..s_rule.len() {
                a.iter_mut().for_each(|v| *v = 0.0);
                for (c, &(f, e, ..)) in channels.iter().enumerate() {
                    a[e] += pops[f] * channel_table[c][k];
                }
                let h: Complex64 = a.iter().zip(&late).map(|(x, b)| x * b).sum();
                acc += gate_table[k] * h.re;
            }
            total += wy * gate_fe * opened * acc / (2.0 * fe.sigma_omega);
            continue;
        }
        for (s, ws) in split_rule(settings.order, s_length, s_width, Some(kink)) {
            let u = t_fe + y + s;
            // both delay branches: e^{±iκΔs} with their common decay
            a.iter_mut().for_each(|v| *v = 0.0);
            for &(f, e, strength, detune, rate) in &channels {
                a[e] += pops[f] * strength * 2.0 * (detune * s).cos() * (-rate * s).exp();
            }
            let h: Complex64 = if u >= t_eg {
                (-eg_gate_rate * (u - t_eg)).exp() * a.iter().zip(&late).map(|(x, b)| x * b).sum::<Complex64>()
            } else {
                let d = t_eg - u;
                g1.rates
                    .iter()
                    .zip(&early)
                    .map(|(r, q)| (-r * d).exp() * a.iter().zip(q).map(|(x, b)| x * b).sum::<Complex64>())
                    .sum()
            };
            total += wy * ws * gate_fe * h.re / (2.0 * fe.sigma_omega);
        }
    }
    // S = 2 Re of the two pathway terms
    2.0 * total
}

/// How much the oracle grid moved under refinement.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeOracleReport {
    pub settings: TimeOracleSettings,
    /// max |base − refined| / max |refined| over the grid.
    pub refinement_change: f64,
}

/// Time oracle on every point of `grid`, at two resolutions. Fails when
/// they disagree by more than `tol`.
pub fn coincidence_time_oracle(
    rho: &PopulationDistribution,
    model: &ExcitonModel,
    detectors: &DetectorPair,
    grid: &SignalGrid,
    settings: TimeOracleSettings,
    tol: f64,
) -> Result<(SignalGrid, TimeOracleReport)> {
    check_population(rho, model)?;
    detectors.validate()?;
    grid.validate()?;
    if model.eig.n_sites() > 3 {
        log::warn!("coincidence time oracle on {} sites; expect long run times", model.eig.n_sites());
    }
    let g2 = CachedPropagator::new(&model.two);
    let g1 = CachedPropagator::new(&model.one);
    let run = |s: &TimeOracleSettings| -> Vec<Vec<f64>> {
        grid.fe_axis
            .par_iter()
            .map(|&wf| {
                grid.eg_axis
                    .iter()
                    .map(|&we| {
                        grid.detector_dos
                            * oracle_point(rho, model, detectors, &g1, &g2, wf, we, grid.tw1, grid.tw2, s)
                    })
                    .collect()
            })
            .collect()
    };
    let base = run(&settings);
    let fine = run(&settings.refined());
    let scale = fine.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = base
        .iter()
        .flatten()
        .zip(fine.iter().flatten())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let refinement_change = if scale > 0.0 { diff / scale } else { diff };
    if refinement_change > tol {
        return Err(Error::Convergence(format!(
            "coincidence oracle changed by {refinement_change:.3e} under refinement (tolerance {tol:.1e})"
        )));
    }
    let mut out = grid.blank();
    normalize(&mut out, fine)?;
    Ok((
        out,
        TimeOracleReport {
            settings,
            refinement_change,
        },
    ))
}

/// One panel of a parameter study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPanel {
    pub label: String,
    pub detectors: DetectorPair,
    pub tw1: f64,
    pub tw2: f64,
}

/// The six-panel variation set around a reference: wider spectral gates,
/// longer one-exciton wait, both, a longer fe temporal gate, and a longer
/// two-exciton wait.
pub fn standard_panels(reference: &StudyPanel) -> Vec<StudyPanel> {
    let with = |label: &str, f: &dyn Fn(&mut StudyPanel)| {
        let mut p = reference.clone();
        p.label = label.to_string();
        f(&mut p);
        p
    };
    let wide = |p: &mut StudyPanel| {
        p.detectors.fe.sigma_omega = 20.0;
        p.detectors.eg.sigma_omega = 20.0;
    };
    vec![
        with("reference", &|_| {}),
        with("sigma_omega_20", &wide),
        with("tw2_1000", &|p| p.tw2 = 1000.0),
        with("sigma_omega_20_tw2_1000", &|p| {
            wide(p);
            p.tw2 = 1000.0;
        }),
        with("sigma_t_0.5409", &|p| p.detectors.fe.sigma_t = 0.5409),
        with("tw1_50", &|p| p.tw1 = 50.0),
    ]
}

/// Reference panel of the standard study.
pub fn reference_panel() -> StudyPanel {
    StudyPanel {
        label: "reference".into(),
        detectors: DetectorPair::symmetric(4.8681, 10.0),
        tw1: 0.0,
        tw2: 100.0,
    }
}

/// Snapshot signal for each panel on shared axes.
pub fn parameter_study(
    rho: &PopulationDistribution,
    model: &ExcitonModel,
    panels: &[StudyPanel],
    fe_axis: &[f64],
    eg_axis: &[f64],
) -> Result<Vec<(String, SignalGrid)>> {
    panels
        .iter()
        .map(|p| {
            let grid = SignalGrid::new(fe_axis.to_vec(), eg_axis.to_vec(), p.tw1, p.tw2)?;
            let out = coincidence_snapshot(rho, model, &p.detectors, &grid)
                .map_err(|e| e.in_stage(format!("panel {}", p.label)))?;
            Ok((p.label.clone(), out))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_ends() {
        assert_eq!(linspace(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
    }

    #[test]
    fn profile_peaks() {
        assert_eq!(count_profile_peaks(&[0.0, 1.0, 0.0, 0.5, 0.5, 0.0, 0.05, 0.0], 0.1), 2);
        assert_eq!(count_profile_peaks(&[0.0; 4], 0.1), 0);
        assert_eq!(count_profile_peaks(&[1.0, 0.5, 0.2], 0.1), 1);
    }

    #[test]
    fn grid_local_maxima() {
        let mut g = SignalGrid::new(linspace(0.0, 4.0, 5), linspace(0.0, 4.0, 5), 0.0, 0.0).unwrap();
        g.values[1][1] = 1.0;
        g.values[3][3] = 0.5;
        g.values[3][0] = 0.01;
        assert_eq!(g.local_maxima(0.1), vec![(1, 1), (3, 3)]);
        assert_eq!(g.argmax(), (1, 1));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SignalGrid::new(vec![], vec![1.0], 0.0, 0.0).is_err());
        assert!(SignalGrid::new(vec![1.0], vec![1.0], -1.0, 0.0).is_err());
    }

    #[test]
    fn standard_panels_vary_one_thing_each() {
        let panels = standard_panels(&reference_panel());
        assert_eq!(panels.len(), 6);
        assert_eq!(panels[4].detectors.fe.sigma_t, 0.5409);
        assert_eq!(panels[4].detectors.eg.sigma_t, 4.8681);
        assert_eq!(panels[5].tw1, 50.0);
    }
}
