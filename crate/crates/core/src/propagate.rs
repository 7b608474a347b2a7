//! Transport and coherence Green's functions and population time evolution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exciton::Manifold;
use crate::transport::TransportModel;
use crate::units::RAD_PER_FS_PER_CM;

/// Populations over one manifold at a given time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationDistribution {
    pub manifold: Manifold,
    pub values: Vec<f64>,
    pub time_fs: f64,
    /// Factor the raw values were divided by (1 if unnormalized).
    pub normalization: f64,
    /// Sum of the negative round-off that was clipped to zero.
    pub clipped: f64,
}

impl PopulationDistribution {
    /// Builds a distribution from raw values, clipping negatives at or above
    /// −10⁻¹² relative to the largest entry and rejecting anything worse.
    pub fn new(manifold: Manifold, raw: &[f64], time_fs: f64) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("population contains non-finite values"));
        }
        let scale = raw.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        let mut clipped = 0.0;
        let mut values = Vec::with_capacity(raw.len());
        for &v in raw {
            if v < 0.0 {
                if v < -1e-10 * scale.max(1.0) {
                    return Err(Error::numerical(format!("population {v:.3e} is negative")));
                }
                clipped += v;
                values.push(0.0);
            } else {
                values.push(v);
            }
        }
        Ok(Self {
            manifold,
            values,
            time_fs,
            normalization: 1.0,
            clipped,
        })
    }

    /// Like [`PopulationDistribution::new`] but clips every negative entry,
    /// as needed for interference signals that are not positive by
    /// construction.
    pub fn clipped_from(manifold: Manifold, raw: &[f64], time_fs: f64) -> Result<Self> {
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("population contains non-finite values"));
        }
        let clipped = raw.iter().filter(|&&v| v < 0.0).sum();
        Ok(Self {
            manifold,
            values: raw.iter().map(|&v| v.max(0.0)).collect(),
            time_fs,
            normalization: 1.0,
            clipped,
        })
    }

    /// Unit population on one state.
    pub fn delta(manifold: Manifold, n: usize, state: usize) -> Self {
        let mut values = vec![0.0; n];
        values[state] = 1.0;
        Self {
            manifold,
            values,
            time_fs: 0.0,
            normalization: 1.0,
            clipped: 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Population-weighted mean of `energies`.
    pub fn mean_energy(&self, energies: &DVector<f64>) -> f64 {
        let t = self.total();
        if t == 0.0 {
            return 0.0;
        }
        self.values.iter().zip(energies.iter()).map(|(p, e)| p * e).sum::<f64>() / t
    }

    /// Divides by the maximum entry; zero distributions are left untouched.
    pub fn max_normalized(&self) -> Self {
        let m = self.values.iter().fold(0.0_f64, |a, &b| a.max(b));
        let mut out = self.clone();
        if m > 0.0 {
            out.values.iter_mut().for_each(|v| *v /= m);
            out.normalization = self.normalization * m;
        }
        out
    }
}

/// G(t) = Σ_p χR_p D_pp⁻¹ e^{−λ_p t} χL_p with λ converted to rad/fs.
pub fn population_propagator(tm: &TransportModel, t_fs: f64) -> Result<DMatrix<f64>> {
    if !(t_fs >= 0.0) {
        return Err(Error::validation(format!(
            "population propagator needs t >= 0, got {t_fs}"
        )));
    }
    let n = tm.len();
    let mut right = tm.chi_r.clone();
    for p in 0..n {
        let f = (-RAD_PER_FS_PER_CM * tm.eigenvalues[p] * t_fs).exp() / tm.d[p];
        right.column_mut(p).scale_mut(f);
    }
    Ok(right * &tm.chi_l)
}

/// θ(t) e^{−iω_ab t − γ_ab t}; zero for negative t.
pub fn coherence_green(omega_ab: f64, gamma_ab: f64, t_fs: f64) -> Complex64 {
    if t_fs < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let x = RAD_PER_FS_PER_CM * t_fs;
    Complex64::new(-gamma_ab * x, -omega_ab * x).exp()
}

impl TransportModel {
    /// Coherence Green's function between two states of this manifold.
    pub fn coherence_green(&self, a: usize, b: usize, pure_dephasing: f64, t_fs: f64) -> Complex64 {
        let omega = self.energies[a] - self.energies[b];
        let gamma = 0.5 * (self.out_rates[a] + self.out_rates[b]) + pure_dephasing;
        coherence_green(omega, gamma, t_fs)
    }
}

pub fn propagate_population(
    rho: &PopulationDistribution,
    tm: &TransportModel,
    t_fs: f64,
) -> Result<PopulationDistribution> {
    if rho.manifold != tm.manifold || rho.values.len() != tm.len() {
        return Err(Error::validation(format!(
            "distribution over the {} manifold ({} states) does not match transport model ({}, {} states)",
            rho.manifold,
            rho.values.len(),
            tm.manifold,
            tm.len()
        )));
    }
    let g = population_propagator(tm, t_fs)?;
    let out = g * DVector::from_column_slice(&rho.values);
    let mut next = PopulationDistribution::new(tm.manifold, out.as_slice(), rho.time_fs + t_fs)?;
    next.normalization = rho.normalization;
    next.clipped += rho.clipped;
    Ok(next)
}

/// Propagates `rho0` to each time in `times` (fs, measured from rho0).
pub fn snapshot_series(
    rho0: &PopulationDistribution,
    tm: &TransportModel,
    times: &[f64],
) -> Result<Vec<PopulationDistribution>> {
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::validation("snapshot times must be non-decreasing"));
    }
    times.iter().map(|&t| propagate_population(rho0, tm, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::AggregateSpec;
    use crate::bath::BathSpec;
    use crate::exciton::ExcitonEigensystem;
    use approx::assert_relative_eq;

    fn trimer() -> TransportModel {
        let mut s = AggregateSpec::uncoupled(vec![15000.0, 15150.0, 15400.0], vec![[1.0, 0.0, 0.0]; 3]);
        for (a, b, j) in [(0, 1, 60.0), (1, 2, 45.0), (0, 2, -20.0)] {
            s.couplings[a][b] = j;
            s.couplings[b][a] = j;
        }
        let eig = ExcitonEigensystem::new(&s).unwrap();
        TransportModel::new(&eig, Manifold::One, &BathSpec::bundled(), &[1.0; 3]).unwrap()
    }

    #[test]
    fn identity_at_zero() {
        let tm = trimer();
        let g = population_propagator(&tm, 0.0).unwrap();
        assert!((g - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(population_propagator(&trimer(), -1.0).is_err());
        assert_eq!(coherence_green(100.0, 5.0, -1.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coherence_halving() {
        let gamma = 12.0;
        let t = std::f64::consts::LN_2 / (gamma * RAD_PER_FS_PER_CM);
        assert_relative_eq!(coherence_green(300.0, gamma, t).norm(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(coherence_green(300.0, 0.0, 1e4).norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn unsorted_times_rejected() {
        let tm = trimer();
        let rho = PopulationDistribution::delta(Manifold::One, 3, 2);
        assert!(snapshot_series(&rho, &tm, &[10.0, 5.0]).is_err());
    }

    #[test]
    fn relaxes_downhill() {
        let tm = trimer();
        let rho = PopulationDistribution::delta(Manifold::One, 3, 2);
        let snaps = snapshot_series(&rho, &tm, &[0.0, 50.0, 200.0, 1000.0, 5000.0]).unwrap();
        let means: Vec<f64> = snaps.iter().map(|s| s.mean_energy(&tm.energies)).collect();
        assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
        for s in &snaps {
            assert_relative_eq!(s.total(), 1.0, max_relative = 1e-10);
        }
    }
}
