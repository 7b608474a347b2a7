//! Population transfer (Pauli master equation) within one exciton manifold.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::exciton::{ExcitonEigensystem, Manifold};

/// Transfer matrix K and its eigendecomposition for one manifold.
///
/// dP/dt = −K P with t in fs once rates are multiplied by 2πc. The off-diagonal
/// K_ba = −k_{a→b}; columns sum to zero. K = χR diag(λ) χL with χL χR = D.
#[derive(Debug, Clone)]
pub struct TransportModel {
    pub manifold: Manifold,
    pub energies: DVector<f64>,
    /// cm⁻¹.
    pub k: DMatrix<f64>,
    /// Normalized equilibrium populations.
    pub boltzmann: DVector<f64>,
    /// cm⁻¹, ascending.
    pub eigenvalues: DVector<f64>,
    /// Columns are right eigenvectors.
    pub chi_r: DMatrix<f64>,
    /// Rows are left eigenvectors.
    pub chi_l: DMatrix<f64>,
    /// Diagonal of χL χR (unity by construction).
    pub d: DVector<f64>,
    /// Total depopulation rate of each state, cm⁻¹.
    pub out_rates: DVector<f64>,
    /// More than one stationary mode: some states do not exchange population.
    pub disconnected: bool,
}

/// O_ab = Σₘ wₘ² W_am W_bm with W the site occupation weights.
pub fn overlap_matrix(
    eig: &ExcitonEigensystem,
    manifold: Manifold,
    bath_weights: &[f64],
) -> DMatrix<f64> {
    let w = eig.site_weights(manifold);
    let mut scaled = w.clone();
    for (m, &bw) in bath_weights.iter().enumerate() {
        scaled.column_mut(m).scale_mut(bw * bw);
    }
    &scaled * w.transpose()
}

/// Builds K from the phonon correlation and exciton overlaps. Downhill rates
/// come from Re C(ω_ab); uphill rates follow from detailed balance.
pub fn build_transport_matrix(
    eig: &ExcitonEigensystem,
    manifold: Manifold,
    bath: &BathSpec,
    bath_weights: &[f64],
) -> Result<DMatrix<f64>> {
    if bath_weights.len() != eig.n_sites() {
        return Err(Error::validation("bath weight count differs from site count"));
    }
    let energies = eig.energies(manifold);
    let n = energies.len();
    let overlap = overlap_matrix(eig, manifold, bath_weights);
    let beta = bath.beta();
    let mut k = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            // energies ascend, so b lies above a
            let gap = energies[b] - energies[a];
            let down = bath.correlation_real(gap) * overlap[(a, b)];
            let up = down * (-beta * gap).exp();
            k[(a, b)] = -down;
            k[(b, a)] = -up;
        }
    }
    for a in 0..n {
        let s: f64 = (0..n).filter(|&b| b != a).map(|b| k[(b, a)]).sum();
        k[(a, a)] = -s;
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("transfer matrix has non-finite entries"));
    }
    Ok(k)
}

fn boltzmann(energies: &DVector<f64>, beta: f64) -> DVector<f64> {
    let e0 = energies.min();
    let mut p = energies.map(|e| (-beta * (e - e0)).exp());
    let z = p.sum();
    p /= z;
    p
}

/// Eigendecomposition through the Boltzmann similarity transform
/// S = P^{-1/2} K P^{1/2}, which is symmetric when detailed balance holds.
pub fn eigendecompose_transport(
    k: &DMatrix<f64>,
    energies: &DVector<f64>,
    beta: f64,
) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>, DVector<f64>)> {
    let n = k.nrows();
    let p = boltzmann(energies, beta);
    if p.min() < 1e-280 {
        return Err(Error::numerical(
            "Boltzmann weights underflow; the manifold is too wide for this temperature",
        ));
    }
    let sq = p.map(f64::sqrt);
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = k[(i, j)] * sq[j] / sq[i];
        }
    }
    let scale = s.amax().max(f64::MIN_POSITIVE);
    let asym = (&s - s.transpose()).amax();
    if asym > 1e-8 * scale {
        return Err(Error::numerical(format!(
            "transfer matrix violates detailed balance (asymmetry {asym:.3e}); \
             perturb degenerate energies or rates"
        )));
    }
    let sym = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let lambda = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut u = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        u.set_column(col, &eig.eigenvectors.column(i));
    }
    let mut chi_r = u.clone();
    let mut chi_l = u.transpose();
    for i in 0..n {
        chi_r.row_mut(i).scale_mut(sq[i]);
        chi_l.column_mut(i).scale_mut(1.0 / sq[i]);
    }
    let dmat = &chi_l * &chi_r;
    let defect = (&dmat - DMatrix::<f64>::identity(n, n)).amax();
    if defect > 1e-8 {
        return Err(Error::numerical(format!(
            "left/right eigenvectors not biorthogonal (defect {defect:.3e})"
        )));
    }
    Ok((lambda, chi_r, chi_l, dmat.diagonal()))
}

impl TransportModel {
    pub fn new(
        eig: &ExcitonEigensystem,
        manifold: Manifold,
        bath: &BathSpec,
        bath_weights: &[f64],
    ) -> Result<Self> {
        let k = build_transport_matrix(eig, manifold, bath, bath_weights)?;
        let energies = eig.energies(manifold).clone();
        let beta = bath.beta();
        let (eigenvalues, chi_r, chi_l, d) = eigendecompose_transport(&k, &energies, beta)?;
        let scale = eigenvalues.amax().max(f64::MIN_POSITIVE);
        let stationary = eigenvalues.iter().filter(|l| l.abs() <= 1e-10 * scale).count();
        let disconnected = stationary > 1;
        if disconnected {
            log::warn!("{manifold} manifold has {stationary} stationary modes; some states are isolated");
        }
        Ok(Self {
            manifold,
            boltzmann: boltzmann(&energies, beta),
            out_rates: k.diagonal(),
            energies,
            k,
            eigenvalues,
            chi_r,
            chi_l,
            d,
            disconnected,
        })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// max over columns of |Σ_b K_ba|, relative to the largest rate.
    pub fn column_sum_defect(&self) -> f64 {
        let scale = self.k.amax().max(f64::MIN_POSITIVE);
        (0..self.len())
            .map(|a| self.k.column(a).sum().abs())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Depopulation rate Γ_a and coherence widths γ_ab = (Γ_a + Γ_b)/2 + γ_pure
/// against every state b of the same manifold.
pub fn dephasing_rate(
    eig: &ExcitonEigensystem,
    bath: &BathSpec,
    manifold: Manifold,
    bath_weights: &[f64],
    a: usize,
) -> Result<(f64, Vec<f64>)> {
    let energies = eig.energies(manifold);
    if a >= energies.len() {
        return Err(Error::validation(format!("state {a} out of range")));
    }
    let overlap = overlap_matrix(eig, manifold, bath_weights);
    let out = |x: usize| -> f64 {
        (0..energies.len())
            .filter(|&y| y != x)
            .map(|y| bath.correlation_real(energies[x] - energies[y]) * overlap[(x, y)])
            .sum()
    };
    let ga = out(a);
    let widths = (0..energies.len())
        .map(|b| 0.5 * (ga + out(b)) + bath.pure_dephasing)
        .collect();
    Ok((ga, widths))
}

/// Coherence widths for every pair the preparation and emission pathways
/// need, built from the two manifolds' depopulation rates. The ground state
/// does not decay.
#[derive(Debug, Clone)]
pub struct CoherenceWidths {
    pub one: DVector<f64>,
    pub two: DVector<f64>,
    pub pure: f64,
}

impl CoherenceWidths {
    pub fn new(one: &TransportModel, two: &TransportModel, pure: f64) -> Self {
        Self {
            one: one.out_rates.clone(),
            two: two.out_rates.clone(),
            pure,
        }
    }

    pub fn eg(&self, e: usize) -> f64 {
        0.5 * self.one[e] + self.pure
    }

    pub fn fg(&self, f: usize) -> f64 {
        0.5 * self.two[f] + self.pure
    }

    pub fn fe(&self, f: usize, e: usize) -> f64 {
        0.5 * (self.two[f] + self.one[e]) + self.pure
    }

    pub fn ee(&self, e: usize, e2: usize) -> f64 {
        0.5 * (self.one[e] + self.one[e2]) + self.pure
    }

    pub fn ff(&self, f: usize, f2: usize) -> f64 {
        0.5 * (self.two[f] + self.two[f2]) + self.pure
    }
}
