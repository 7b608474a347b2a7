//! Two-exciton population prepared by a pair of absorbed photons.
//!
//! Five Liouville pathways contribute to ρ_ff (plus their complex
//! conjugates). Each is a product of a dipole chain and a field integral over
//! four time-ordered interactions; the integral depends only on the ordering
//! of ket and bra interactions and on the four poles the system passes
//! through. [`ClosedForm`] evaluates that integral by residues (the field
//! correlation at the pole frequencies); `excitation_oracle::TimeDomainOracle` does it by
//! quadrature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exciton::Manifold;
use crate::model::{regularize, ExcitonModel};
use crate::propagate::PopulationDistribution;
use crate::source::{EppSource, FieldCorrelation};
use crate::units::RAD_PER_FS_PER_CM;

/// Which side of the density matrix each of the four interactions acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ordering {
    KetKetBraBra,
    KetBraKetBra,
    KetBraBraKet,
}

impl Ordering {
    pub fn is_ket(self, k: usize) -> bool {
        match self {
            Ordering::KetKetBraBra => k < 2,
            Ordering::KetBraKetBra => k % 2 == 0,
            Ordering::KetBraBraKet => k == 0 || k == 3,
        }
    }

    /// Interaction index (0..4 in time order) of the field slots
    /// [ket early, ket late, bra early, bra late].
    pub fn slots(self) -> [usize; 4] {
        match self {
            Ordering::KetKetBraBra => [0, 1, 2, 3],
            Ordering::KetBraKetBra => [0, 2, 1, 3],
            Ordering::KetBraBraKet => [0, 3, 1, 2],
        }
    }
}

pub const PATHWAY_NAMES: [&str; 5] = [
    "two_exciton_coherence",
    "transport_kbkb",
    "coherence_kbkb",
    "transport_kbbk",
    "coherence_kbbk",
];

/// Field frequencies at which the residues sit, in slot order
/// (ket early, ket late, bra early, bra late).
pub fn pole_frequencies(ordering: Ordering, z: &[Complex64; 4]) -> [Complex64; 4] {
    let mut nu = [Complex64::new(0.0, 0.0); 4];
    let mut prev = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        nu[k] = if ordering.is_ket(k) { z[k] - prev } else { prev - z[k] };
        prev = z[k];
    }
    let s = ordering.slots();
    [nu[s[0]], nu[s[1]], nu[s[2]], nu[s[3]]]
}

/// Evaluates the field integral of one pathway for the pole sequence `z`.
pub trait PathwayKernel: Sync {
    fn eval(&self, ordering: Ordering, z: &[Complex64; 4]) -> Result<Complex64>;
}

/// Residue evaluation: the four-point field correlation at the pole
/// frequencies.
pub struct ClosedForm<'a, S: FieldCorrelation + ?Sized>(pub &'a S);

impl<S: FieldCorrelation + ?Sized> PathwayKernel for ClosedForm<'_, S> {
    fn eval(&self, ordering: Ordering, z: &[Complex64; 4]) -> Result<Complex64> {
        let [w1, w2, w3, w4] = pole_frequencies(ordering, z);
        Ok(self.0.four_point(w4, w3, w2, w1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationOptions {
    /// Dipoles are projected on this unit vector.
    pub polarization: [f64; 3],
    /// Evaluation time after the pulse, fs.
    pub time_fs: f64,
}

impl Default for ExcitationOptions {
    fn default() -> Self {
        Self {
            polarization: [1.0, 0.0, 0.0],
            time_fs: 0.0,
        }
    }
}

impl ExcitationOptions {
    pub fn validate(&self) -> Result<()> {
        let n = self.polarization.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !((n - 1.0).abs() < 1e-9) {
            return Err(Error::validation("polarization must be a unit vector"));
        }
        if !(self.time_fs >= 0.0) {
            return Err(Error::validation("evaluation time must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PreparationResult {
    pub label: String,
    pub distribution: PopulationDistribution,
    /// Per two-exciton state, the five pathway sums before taking 2·Re.
    pub pathways: Vec<[Complex64; 5]>,
    /// 2·Re of the pathway sum, before clipping.
    pub raw: Vec<f64>,
    /// Some pole was shifted off the real axis.
    pub regularized: bool,
}

struct Chains {
    eg: Vec<f64>,
    fe: Vec<Vec<f64>>,
    /// transport[e''][p][e] = χR_{e''p} χL_{pe} / D_pp
    transport: Vec<Vec<Vec<f64>>>,
}

impl Chains {
    fn new(model: &ExcitonModel, pol: &[f64; 3]) -> Self {
        let ne = model.n_one();
        let eg = (0..ne).map(|e| model.dipoles.eg_along(e, pol)).collect();
        let fe = (0..model.n_two())
            .map(|f| (0..ne).map(|e| model.dipoles.fe_along(f, e, pol)).collect())
            .collect();
        let tm = &model.one;
        let transport = (0..ne)
            .map(|e2| {
                (0..ne)
                    .map(|p| {
                        (0..ne)
                            .map(|e| tm.chi_r[(e2, p)] * tm.chi_l[(p, e)] / tm.d[p])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { eg, fe, transport }
    }
}

/// The five pathway sums for two-exciton state `f`, without the e^{−iκζ_ff t}
/// factor.
fn pathway_sums<K: PathwayKernel + ?Sized>(
    model: &ExcitonModel,
    chains: &Chains,
    kernel: &K,
    f: usize,
) -> Result<([Complex64; 5], bool)> {
    let ne = model.n_one();
    let mut flag = false;
    let mut reg = |z: Complex64| regularize(z, &mut flag);
    let zff = reg(model.z_ff(f));
    let zfg = reg(model.z_fg(f));
    let zeg: Vec<Complex64> = (0..ne).map(|e| reg(model.z_eg(e))).collect();
    let zp: Vec<Complex64> = (0..ne).map(|p| reg(model.z_p(p))).collect();
    let zfe: Vec<Complex64> = (0..ne).map(|e| reg(model.z_fe(f, e))).collect();
    let zef: Vec<Complex64> = (0..ne).map(|e| reg(model.z_ef(e, f))).collect();
    let mut zee = vec![Complex64::new(0.0, 0.0); ne * ne];
    for e in 0..ne {
        for e2 in 0..ne {
            if e != e2 {
                zee[e * ne + e2] = reg(model.z_ee(e, e2));
            }
        }
    }
    let eg = &chains.eg;
    let fe = &chains.fe[f];
    let mut out = [Complex64::new(0.0, 0.0); 5];

    for e in 0..ne {
        let a = eg[e] * fe[e];
        if a == 0.0 {
            continue;
        }
        for e2 in 0..ne {
            let w = a * eg[e2] * fe[e2];
            if w == 0.0 {
                continue;
            }
            out[0] += w * kernel.eval(Ordering::KetKetBraBra, &[zeg[e], zfg, zfe[e2], zff])?;
            if e != e2 {
                let zc = zee[e * ne + e2];
                out[2] += w * kernel.eval(Ordering::KetBraKetBra, &[zeg[e], zc, zfe[e2], zff])?;
                out[4] += w * kernel.eval(Ordering::KetBraBraKet, &[zeg[e], zc, zef[e], zff])?;
            }
        }
    }

    for e in 0..ne {
        let a = eg[e] * eg[e];
        if a == 0.0 {
            continue;
        }
        for e2 in 0..ne {
            let b = a * fe[e2] * fe[e2];
            if b == 0.0 {
                continue;
            }
            for p in 0..ne {
                let w = b * chains.transport[e2][p][e];
                if w == 0.0 {
                    continue;
                }
                out[1] += w * kernel.eval(Ordering::KetBraKetBra, &[zeg[e], zp[p], zfe[e2], zff])?;
                out[3] += w * kernel.eval(Ordering::KetBraBraKet, &[zeg[e], zp[p], zef[e2], zff])?;
            }
        }
    }
    Ok((out, flag))
}

/// ρ_ff for every two-exciton state using an arbitrary pathway kernel.
pub fn prepare_with_kernel<K: PathwayKernel + ?Sized>(
    model: &ExcitonModel,
    kernel: &K,
    opts: &ExcitationOptions,
    label: &str,
) -> Result<PreparationResult> {
    opts.validate()?;
    let chains = Chains::new(model, &opts.polarization);
    let per_f: Vec<([Complex64; 5], bool)> = (0..model.n_two())
        .into_par_iter()
        .map(|f| pathway_sums(model, &chains, kernel, f))
        .collect::<Result<_>>()?;
    let mut regularized = false;
    let mut pathways = Vec::with_capacity(per_f.len());
    let mut raw = Vec::with_capacity(per_f.len());
    for (f, (mut sums, flag)) in per_f.into_iter().enumerate() {
        regularized |= flag;
        let decay = (-Complex64::new(0.0, RAD_PER_FS_PER_CM) * model.z_ff(f) * opts.time_fs).exp();
        for s in &mut sums {
            *s *= decay;
        }
        raw.push(2.0 * sums.iter().sum::<Complex64>().re);
        pathways.push(sums);
    }
    if regularized {
        log::info!("{label}: poles on the real axis were shifted by -i·1e-3 cm⁻¹");
    }
    let distribution = PopulationDistribution::clipped_from(Manifold::Two, &raw, opts.time_fs)?;
    Ok(PreparationResult {
        label: label.to_string(),
        distribution,
        pathways,
        raw,
        regularized,
    })
}

/// Closed-form (residue) preparation for any source.
pub fn prepare_closed_form<S: FieldCorrelation + ?Sized>(
    model: &ExcitonModel,
    source: &S,
    opts: &ExcitationOptions,
    label: &str,
) -> Result<PreparationResult> {
    prepare_with_kernel(model, &ClosedForm(source), opts, label)
}

/// Entangled source settings shared by every row of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSource {
    pub tau0: f64,
    pub t_ent: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub e0: f64,
}

fn one() -> f64 {
    1.0
}

/// Rows of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanTargets {
    /// ω₁ = ω₂ = E_f/2 for each listed two-exciton state.
    Degenerate(Vec<usize>),
    /// (ω₁, ω₂) set to the energies of the listed one-exciton pairs.
    Mediated(Vec<(usize, usize)>),
}

impl ScanTargets {
    pub fn len(&self) -> usize {
        match self {
            ScanTargets::Degenerate(v) => v.len(),
            ScanTargets::Mediated(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub labels: Vec<String>,
    /// Two-exciton state each row aims at (for mediated rows, the state
    /// closest to ω₁ + ω₂).
    pub targets: Vec<usize>,
    /// Rows max-normalized; all-zero rows stay zero.
    pub map: DMatrix<f64>,
    pub selectivity: Vec<f64>,
    pub regularized: bool,
}

impl ScanResult {
    /// Column index of the largest entry of each row.
    pub fn argmax(&self) -> Vec<usize> {
        (0..self.map.nrows())
            .map(|r| {
                let row = self.map.row(r);
                (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b })
            })
            .collect()
    }
}

/// Target population over total mass.
pub fn selectivity(values: &[f64], target: usize) -> f64 {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        values[target] / total
    } else {
        0.0
    }
}

fn nearest_two_exciton(model: &ExcitonModel, energy: f64) -> usize {
    let e = &model.eig.two_ex_energies;
    (0..e.len()).fold(0, |b, f| {
        if (e[f] - energy).abs() < (e[b] - energy).abs() {
            f
        } else {
            b
        }
    })
}

/// One preparation per row. Rows run in parallel and are assembled in input
/// order, so the result does not depend on the thread count.
pub fn scan_targets(
    model: &ExcitonModel,
    template: &ScanSource,
    targets: &ScanTargets,
    opts: &ExcitationOptions,
) -> Result<ScanResult> {
    if targets.is_empty() {
        return Err(Error::validation("scan needs at least one target"));
    }
    let rows: Vec<(String, usize, EppSource)> = match targets {
        ScanTargets::Degenerate(fs) => fs
            .iter()
            .map(|&f| {
                if f >= model.n_two() {
                    return Err(Error::validation(format!("target f={f} out of range")));
                }
                let s = EppSource::degenerate(model.f(f), template.tau0, template.t_ent);
                Ok((format!("f{:02}", f + 1), f, s))
            })
            .collect::<Result<_>>()?,
        ScanTargets::Mediated(pairs) => pairs
            .iter()
            .map(|&(a, b)| {
                if a >= model.n_one() || b >= model.n_one() {
                    return Err(Error::validation(format!("pair ({a},{b}) out of range")));
                }
                let s = EppSource::mediated(model.e(a), model.e(b), template.tau0, template.t_ent);
                let f = nearest_two_exciton(model, model.e(a) + model.e(b));
                Ok((format!("e{:02}+e{:02}", a + 1, b + 1), f, s))
            })
            .collect::<Result<_>>()?,
    };
    opts.validate()?;
    let chains = Chains::new(model, &opts.polarization);
    let nf = model.n_two();
    let results: Vec<(Vec<f64>, bool)> = rows
        .par_iter()
        .map(|(_, _, src)| {
            let mut src = *src;
            src.alpha = template.alpha;
            src.e0 = template.e0;
            src.validate()?;
            let kernel = ClosedForm(&src);
            let mut flag = false;
            let mut vals = Vec::with_capacity(nf);
            for f in 0..nf {
                let (sums, reg) = pathway_sums(model, &chains, &kernel, f)?;
                flag |= reg;
                let decay = (-Complex64::new(0.0, RAD_PER_FS_PER_CM) * model.z_ff(f) * opts.time_fs).exp();
                let v = 2.0 * (sums.iter().sum::<Complex64>() * decay).re;
                if !v.is_finite() {
                    return Err(Error::numerical(format!(
                        "non-finite population for f{:02} under the {} row source",
                        f + 1,
                        src.omega1 + src.omega2
                    )));
                }
                vals.push(v.max(0.0));
            }
            Ok((vals, flag))
        })
        .collect::<Result<_>>()?;

    let mut map = DMatrix::zeros(rows.len(), nf);
    let mut sel = Vec::with_capacity(rows.len());
    let mut regularized = false;
    for (r, ((vals, flag), (_, target, _))) in results.iter().zip(&rows).enumerate() {
        regularized |= flag;
        sel.push(selectivity(vals, *target));
        let m = vals.iter().fold(0.0_f64, |a, &b| a.max(b));
        for (j, v) in vals.iter().enumerate() {
            map[(r, j)] = if m > 0.0 { v / m } else { 0.0 };
        }
    }
    Ok(ScanResult {
        labels: rows.iter().map(|r| r.0.clone()).collect(),
        targets: rows.iter().map(|r| r.1).collect(),
        map,
        selectivity: sel,
        regularized,
    })
}
