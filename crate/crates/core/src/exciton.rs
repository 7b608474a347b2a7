//! One- and two-exciton Hamiltonian blocks, their diagonalization, and the
//! inter-manifold transition dipoles.
//!
//! Sites are three-level emitters. The two-exciton block lives in the basis of
//! normalized kets |1ₘ1ₙ⟩ (m < n, combination) and |2ₘ⟩ (overtone), ordered
//! lexicographically by (m, n) with m ≤ n. Moving a quantum onto an already
//! singly excited site carries the bosonic factor √2.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::SQRT_2;

use crate::aggregate::AggregateSpec;
use crate::error::{Error, Result};

/// Ordered list of site pairs (m, n), m ≤ n, spanning the two-exciton basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairIndex {
    n_sites: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairIndex {
    pub fn new(n_sites: usize) -> Self {
        let mut pairs = Vec::with_capacity(n_sites * (n_sites + 1) / 2);
        for m in 0..n_sites {
            for n in m..n_sites {
                pairs.push((m, n));
            }
        }
        Self { n_sites, pairs }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair(&self, idx: usize) -> (usize, usize) {
        self.pairs[idx]
    }

    /// Linear index of the unordered pair {m, n}.
    pub fn index(&self, m: usize, n: usize) -> usize {
        let (m, n) = if m <= n { (m, n) } else { (n, m) };
        debug_assert!(n < self.n_sites);
        m * self.n_sites - m * m.saturating_sub(1) / 2 + (n - m)
    }

    pub fn is_overtone(&self, idx: usize) -> bool {
        let (m, n) = self.pairs[idx];
        m == n
    }

    pub fn overtone_count(&self) -> usize {
        self.pairs.iter().filter(|(m, n)| m == n).count()
    }

    pub fn combination_count(&self) -> usize {
        self.len() - self.overtone_count()
    }

    /// Number of quanta site `site` holds in basis state `idx`.
    pub fn occupation(&self, idx: usize, site: usize) -> usize {
        let (m, n) = self.pairs[idx];
        (m == site) as usize + (n == site) as usize
    }
}

/// H⁽¹⁾ₘₙ = Eₘ δₘₙ + Jₘₙ.
pub fn build_one_exciton_hamiltonian(spec: &AggregateSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = spec.n_sites();
    Ok(DMatrix::from_fn(n, n, |m, k| {
        if m == k {
            spec.site_energies[m]
        } else {
            spec.couplings[m][k]
        }
    }))
}

/// Two-exciton block in the normalized pair basis.
pub fn build_two_exciton_hamiltonian(
    spec: &AggregateSpec,
    pair_index: &PairIndex,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let ns = spec.n_sites();
    if pair_index.n_sites() != ns || pair_index.len() != ns * (ns + 1) / 2 {
        return Err(Error::validation(format!(
            "pair index built for {} sites, aggregate has {ns}",
            pair_index.n_sites()
        )));
    }
    let nf = pair_index.len();
    let mut h = DMatrix::zeros(nf, nf);
    for (p, &(m, n)) in pair_index.pairs().iter().enumerate() {
        h[(p, p)] = if m == n {
            2.0 * spec.site_energies[m] + spec.onsite_anharmonicity[m]
        } else {
            spec.site_energies[m] + spec.site_energies[n] + spec.pair_anharmonicity[m][n]
        };
        // hop one quantum from `from` to `to`: J_{to,from} B†_to B_from
        let mut hop = |from: usize, stay: usize, factor_from: f64| {
            for to in 0..ns {
                if to == from {
                    continue;
                }
                let j = spec.couplings[to][from];
                if j == 0.0 {
                    continue;
                }
                // occupation of `to` before the hop (the quantum left at `stay`)
                let n_to = (to == stay) as usize;
                let factor_to = if n_to == 1 { SQRT_2 } else { 1.0 };
                let q = pair_index.index(to, stay);
                h[(q, p)] += j * factor_from * factor_to;
            }
        };
        if m == n {
            hop(m, m, SQRT_2);
        } else {
            hop(m, n, 1.0);
            hop(n, m, 1.0);
        }
    }
    Ok(h)
}

/// Symmetric eigendecomposition with ascending eigenvalues. Eigenvectors are
/// the columns of the returned matrix, each with its first significant
/// component positive.
pub fn diagonalize(h: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !h.is_square() {
        return Err(Error::validation("matrix is not square"));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    let n = h.nrows();
    let scale = h.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            if (h[(i, j)] - h[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::validation(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let vmax = v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * vmax) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(col, &v);
    }
    Ok((values, vectors))
}

/// Exciton energies and site/pair-basis expansion coefficients.
#[derive(Debug, Clone)]
pub struct ExcitonEigensystem {
    /// εₑ, ascending, cm⁻¹.
    pub one_ex_energies: DVector<f64>,
    /// ε_f, ascending, cm⁻¹.
    pub two_ex_energies: DVector<f64>,
    /// Row e holds T⁽¹⁾_{e,m}.
    pub t1: DMatrix<f64>,
    /// Row f holds T⁽²⁾_{f,(mn)} over the pair basis.
    pub t2: DMatrix<f64>,
    pub pair_index: PairIndex,
}

impl ExcitonEigensystem {
    pub fn new(spec: &AggregateSpec) -> Result<Self> {
        let pair_index = PairIndex::new(spec.n_sites());
        let h1 = build_one_exciton_hamiltonian(spec)?;
        let h2 = build_two_exciton_hamiltonian(spec, &pair_index)?;
        let (e1, v1) = diagonalize(&h1)?;
        let (e2, v2) = diagonalize(&h2)?;
        Ok(Self {
            one_ex_energies: e1,
            two_ex_energies: e2,
            t1: v1.transpose(),
            t2: v2.transpose(),
            pair_index,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.t1.ncols()
    }

    pub fn n_one(&self) -> usize {
        self.one_ex_energies.len()
    }

    pub fn n_two(&self) -> usize {
        self.two_ex_energies.len()
    }

    /// Site-occupation weights of each state: row a, column m.
    ///
    /// One-exciton: T²_{e,m}. Two-exciton: Σ_p T²_{f,p}·nₘ(p), nₘ the number
    /// of quanta on site m in pair p.
    pub fn site_weights(&self, manifold: Manifold) -> DMatrix<f64> {
        let ns = self.n_sites();
        match manifold {
            Manifold::One => self.t1.map(|x| x * x),
            Manifold::Two => {
                let nf = self.n_two();
                let mut w = DMatrix::zeros(nf, ns);
                for f in 0..nf {
                    for (p, &(m, n)) in self.pair_index.pairs().iter().enumerate() {
                        let a2 = self.t2[(f, p)] * self.t2[(f, p)];
                        w[(f, m)] += a2;
                        w[(f, n)] += a2;
                    }
                }
                w
            }
        }
    }

    pub fn energies(&self, manifold: Manifold) -> &DVector<f64> {
        match manifold {
            Manifold::One => &self.one_ex_energies,
            Manifold::Two => &self.two_ex_energies,
        }
    }

    /// max |T Tᵀ − I| over both manifolds.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = |t: &DMatrix<f64>| {
            let p = t * t.transpose();
            let n = p.nrows();
            (p - DMatrix::<f64>::identity(n, n)).amax()
        };
        d(&self.t1).max(d(&self.t2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    One,
    Two,
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Manifold::One => write!(f, "one-exciton"),
            Manifold::Two => write!(f, "two-exciton"),
        }
    }
}

/// g→e and e→f transition dipoles in the exciton basis.
#[derive(Debug, Clone)]
pub struct TransitionDipoles {
    /// d_eg[e]
    pub d_eg: Vec<[f64; 3]>,
    /// d_fe[f][e]
    pub d_fe: Vec<Vec<[f64; 3]>>,
}

impl TransitionDipoles {
    pub fn eg_strength(&self, e: usize) -> f64 {
        norm2(&self.d_eg[e])
    }

    pub fn fe_strength(&self, f: usize, e: usize) -> f64 {
        norm2(&self.d_fe[f][e])
    }

    /// Scalar amplitude of d_eg along a field polarization.
    pub fn eg_along(&self, e: usize, pol: &[f64; 3]) -> f64 {
        dot(&self.d_eg[e], pol)
    }

    pub fn fe_along(&self, f: usize, e: usize, pol: &[f64; 3]) -> f64 {
        dot(&self.d_fe[f][e], pol)
    }
}

fn norm2(v: &[f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// dₑg = Σₘ T⁽¹⁾ₑₘ dₘ and d_fe = ⟨f| Σₘ dₘ B†ₘ |e⟩.
pub fn compute_transition_dipoles(
    eig: &ExcitonEigensystem,
    spec: &AggregateSpec,
) -> Result<TransitionDipoles> {
    let ns = spec.n_sites();
    if eig.n_sites() != ns {
        return Err(Error::validation("eigensystem and aggregate disagree on site count"));
    }
    let ne = eig.n_one();
    let nf = eig.n_two();
    let d = &spec.site_dipoles;

    let d_eg: Vec<[f64; 3]> = (0..ne)
        .map(|e| {
            let mut v = [0.0; 3];
            for m in 0..ns {
                for k in 0..3 {
                    v[k] += eig.t1[(e, m)] * d[m][k];
                }
            }
            v
        })
        .collect();

    // ⟨(mn)| B†ₖ |1ⱼ⟩ in the pair basis, contracted with T⁽¹⁾ first:
    // amplitude of pair p created from |e⟩ by the dipole operator.
    let pairs = eig.pair_index.pairs();
    let mut created = vec![[0.0; 3]; pairs.len()];
    let mut d_fe = vec![vec![[0.0; 3]; ne]; nf];
    for e in 0..ne {
        for (p, &(m, n)) in pairs.iter().enumerate() {
            let mut v = [0.0; 3];
            if m == n {
                for k in 0..3 {
                    v[k] = SQRT_2 * d[m][k] * eig.t1[(e, m)];
                }
            } else {
                for k in 0..3 {
                    v[k] = d[m][k] * eig.t1[(e, n)] + d[n][k] * eig.t1[(e, m)];
                }
            }
            created[p] = v;
        }
        for f in 0..nf {
            let mut v = [0.0; 3];
            for (p, c) in created.iter().enumerate() {
                let t = eig.t2[(f, p)];
                for k in 0..3 {
                    v[k] += t * c[k];
                }
            }
            d_fe[f][e] = v;
        }
    }
    Ok(TransitionDipoles { d_eg, d_fe })
}
