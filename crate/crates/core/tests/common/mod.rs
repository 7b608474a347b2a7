//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use excitonscope::aggregate::AggregateSpec;
use excitonscope::bath::BathSpec;
use excitonscope::exciton::ExcitonEigensystem;
use excitonscope::filter::FilterSpec;
use excitonscope::quad::gauss_legendre;
use excitonscope::units::RAD_PER_FS_PER_CM;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub const DIMER: &str = r#"{
  "name": "dimer",
  "site_energies": [15000.0, 15000.0],
  "couplings": [[0.0, 150.0], [150.0, 0.0]],
  "onsite_anharmonicity": [-600.0, -600.0],
  "pair_anharmonicity": [[0.0, -25.0], [-25.0, 0.0]],
  "site_dipoles": [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0]]
}"#;

/// Three levels per site, states labelled by base-3 occupation strings.
pub struct ProductSpace {
    pub one_energies: Vec<f64>,
    pub two_energies: Vec<f64>,
    /// Columns are eigenvectors over `one_states` / `two_states`.
    pub one_vectors: DMatrix<f64>,
    pub two_vectors: DMatrix<f64>,
    pub one_states: Vec<Vec<usize>>,
    pub two_states: Vec<Vec<usize>>,
    /// ⟨f| Σₘ dₘ B†ₘ |e⟩ in the oracle's own eigenvector gauge.
    pub d_fe: Vec<Vec<[f64; 3]>>,
}

fn occupations(n_sites: usize, quanta: usize) -> Vec<Vec<usize>> {
    let total = 3usize.pow(n_sites as u32);
    (0..total)
        .map(|mut code| {
            (0..n_sites)
                .map(|_| {
                    let d = code % 3;
                    code /= 3;
                    d
                })
                .collect::<Vec<usize>>()
        })
        .filter(|occ| occ.iter().sum::<usize>() == quanta)
        .collect()
}

/// B†ₘ applied to a basis state: the raised state and its amplitude.
fn raise(occ: &[usize], m: usize) -> Option<(Vec<usize>, f64)> {
    if occ[m] >= 2 {
        return None;
    }
    let mut out = occ.to_vec();
    out[m] += 1;
    Some((out, ((occ[m] + 1) as f64).sqrt()))
}

fn lower(occ: &[usize], m: usize) -> Option<(Vec<usize>, f64)> {
    if occ[m] == 0 {
        return None;
    }
    let mut out = occ.to_vec();
    out[m] -= 1;
    Some((out, (occ[m] as f64).sqrt()))
}

fn sector_hamiltonian(spec: &AggregateSpec, states: &[Vec<usize>]) -> DMatrix<f64> {
    let ns = spec.n_sites();
    let find = |occ: &[usize]| states.iter().position(|s| s == occ);
    let mut h = DMatrix::zeros(states.len(), states.len());
    for (i, occ) in states.iter().enumerate() {
        let mut diag = 0.0;
        for m in 0..ns {
            let n = occ[m] as f64;
            diag += spec.site_energies[m] * n + 0.5 * spec.onsite_anharmonicity[m] * n * (n - 1.0);
            for k in m + 1..ns {
                diag += spec.pair_anharmonicity[m][k] * n * occ[k] as f64;
            }
        }
        h[(i, i)] += diag;
        for m in 0..ns {
            for n in 0..ns {
                if m == n || spec.couplings[m][n] == 0.0 {
                    continue;
                }
                let Some((mid, a)) = lower(occ, n) else { continue };
                let Some((to, b)) = raise(&mid, m) else { continue };
                if let Some(j) = find(&to) {
                    h[(j, i)] += spec.couplings[m][n] * a * b;
                }
            }
        }
    }
    h
}

fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn product_space(spec: &AggregateSpec) -> ProductSpace {
    let ns = spec.n_sites();
    let one_states = occupations(ns, 1);
    let two_states = occupations(ns, 2);
    let (one_energies, one_vectors) = sorted_eigen(sector_hamiltonian(spec, &one_states));
    let (two_energies, two_vectors) = sorted_eigen(sector_hamiltonian(spec, &two_states));

    // Σₘ dₘ B†ₘ between the sectors, component by component
    let mut raise_op = vec![DMatrix::<f64>::zeros(two_states.len(), one_states.len()); 3];
    for (j, occ) in one_states.iter().enumerate() {
        for m in 0..ns {
            if let Some((to, amp)) = raise(occ, m) {
                let i = two_states.iter().position(|s| *s == to).unwrap();
                for (c, op) in raise_op.iter_mut().enumerate() {
                    op[(i, j)] += spec.site_dipoles[m][c] * amp;
                }
            }
        }
    }
    let d_fe = (0..two_states.len())
        .map(|f| {
            (0..one_states.len())
                .map(|e| {
                    let mut v = [0.0; 3];
                    for (c, op) in raise_op.iter().enumerate() {
                        v[c] = (two_vectors.column(f).transpose() * op * one_vectors.column(e))[(0, 0)];
                    }
                    v
                })
                .collect()
        })
        .collect();
    ProductSpace {
        one_energies,
        two_energies,
        one_vectors,
        two_vectors,
        one_states,
        two_states,
        d_fe,
    }
}

/// Signs that carry the oracle eigenvectors onto the pair-basis ones.
pub fn gauge_signs(oracle: &ProductSpace, eig: &ExcitonEigensystem) -> (Vec<f64>, Vec<f64>) {
    let ns = eig.n_sites();
    let one: Vec<f64> = (0..eig.n_one())
        .map(|e| {
            let dot: f64 = (0..ns)
                .map(|m| {
                    let i = oracle.one_states.iter().position(|s| s[m] == 1).unwrap();
                    oracle.one_vectors[(i, e)] * eig.t1[(e, m)]
                })
                .sum();
            dot.signum()
        })
        .collect();
    let two: Vec<f64> = (0..eig.n_two())
        .map(|f| {
            let dot: f64 = eig
                .pair_index
                .pairs()
                .iter()
                .enumerate()
                .map(|(p, &(m, n))| {
                    let i = oracle
                        .two_states
                        .iter()
                        .position(|s| s[m] == if m == n { 2 } else { 1 } && (m == n || s[n] == 1))
                        .unwrap();
                    oracle.two_vectors[(i, f)] * eig.t2[(f, p)]
                })
                .sum();
            dot.signum()
        })
        .collect();
    (one, two)
}

/// Site-distinct aggregates with every coupling switched on, so no two
/// eigenvalues coincide.
pub fn irregular_aggregate(n: usize) -> AggregateSpec {
    let energies = [15000.0, 15230.0, 15410.0];
    let dipoles = [[1.0, 0.0, 0.0], [0.6, 0.8, 0.0], [-0.2, 0.5, 0.84]];
    let mut s = AggregateSpec::uncoupled(energies[..n].to_vec(), dipoles[..n].to_vec());
    let j = [[0.0, 85.0, -32.0], [85.0, 0.0, 61.0], [-32.0, 61.0, 0.0]];
    let u2 = [[0.0, -40.0, -12.0], [-40.0, 0.0, -27.0], [-12.0, -27.0, 0.0]];
    for a in 0..n {
        for b in 0..n {
            s.couplings[a][b] = j[a][b];
            s.pair_anharmonicity[a][b] = u2[a][b];
        }
    }
    s.onsite_anharmonicity = [-700.0, -650.0, -720.0][..n].to_vec();
    s
}

/// Largest relative disagreement between pair-basis and product-space
/// energies and d_fe.
pub fn exciton_oracle_error(spec: &AggregateSpec) -> (f64, f64) {
    let eig = ExcitonEigensystem::new(spec).unwrap();
    let dip = excitonscope::exciton::compute_transition_dipoles(&eig, spec).unwrap();
    let oracle = product_space(spec);
    let mut energy_err = 0.0_f64;
    for (a, b) in eig.one_ex_energies.iter().zip(&oracle.one_energies) {
        energy_err = energy_err.max((a - b).abs() / b.abs());
    }
    for (a, b) in eig.two_ex_energies.iter().zip(&oracle.two_energies) {
        energy_err = energy_err.max((a - b).abs() / b.abs());
    }
    let (se, sf) = gauge_signs(&oracle, &eig);
    let scale = oracle.d_fe.iter().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut d_err = 0.0_f64;
    for f in 0..eig.n_two() {
        for e in 0..eig.n_one() {
            for c in 0..3 {
                let want = sf[f] * se[e] * oracle.d_fe[f][e][c];
                d_err = d_err.max((dip.d_fe[f][e][c] - want).abs() / scale);
            }
        }
    }
    (energy_err, d_err)
}

/// J(ω) of the bath continued to complex frequency.
fn spectral_density_complex(bath: &BathSpec, w: Complex64) -> Complex64 {
    let o = bath.overdamped;
    let mut j = 2.0 * o.lambda * o.gamma * w / (w * w + o.gamma * o.gamma);
    for m in &bath.brownian_modes {
        let d = m.omega * m.omega - w * w;
        j += 2.0 * m.lambda * m.omega * m.omega * m.gamma * w / (d * d + w * w * m.gamma * m.gamma);
    }
    j
}

/// Lower half-plane poles of J and their residues.
fn spectral_poles(bath: &BathSpec) -> Vec<(Complex64, Complex64)> {
    let o = bath.overdamped;
    let mut out = vec![(Complex64::new(0.0, -o.gamma), Complex64::new(o.lambda * o.gamma, 0.0))];
    for m in &bath.brownian_modes {
        let shift = (m.omega * m.omega - 0.25 * m.gamma * m.gamma).sqrt();
        for s in [1.0, -1.0] {
            let p = Complex64::new(s * shift, -0.5 * m.gamma);
            let r = 2.0 * m.lambda * m.omega * m.omega * m.gamma
                / (4.0 * (p * p - m.omega * m.omega) + 2.0 * m.gamma * m.gamma);
            out.push((p, r));
        }
    }
    out
}

/// Time-domain correlation C(s) = ∫dω/2π J(ω)[coth(βω/2) cos ωs − i sin ωs]
/// for s > 0, s in cm, by closing the frequency contour: one exponential per
/// pole of J plus the Bose (Matsubara) series. The overdamped 1/νₖ tail of
/// the series is summed in closed form.
pub fn time_correlation(bath: &BathSpec, s: f64) -> Complex64 {
    let beta = bath.beta();
    let i = Complex64::new(0.0, 1.0);
    let mut c = Complex64::new(0.0, 0.0);
    for (p, r) in spectral_poles(bath) {
        c += -2.0 * i * r * (-i * p * s).exp() / (1.0 - (-beta * p).exp());
    }
    let nu1 = 2.0 * std::f64::consts::PI / beta;
    let o = bath.overdamped;
    let tail = 4.0 * o.lambda * o.gamma / beta;
    c += -tail / nu1 * (-(-nu1 * s).exp_m1()).ln();
    for k in 1..=4000 {
        let nu = nu1 * k as f64;
        if nu * s > 60.0 {
            break;
        }
        let a = -2.0 * i / beta * spectral_density_complex(bath, Complex64::new(0.0, -nu));
        c += (a - tail / nu) * (-nu * s).exp();
    }
    c
}

/// Re ∫₀^∞ ds e^{iΩs} C(s) by composite Gauss–Legendre quadrature.
pub fn half_fourier_real(bath: &BathSpec, big_omega: f64) -> f64 {
    let slowest = bath
        .brownian_modes
        .iter()
        .map(|m| 0.5 * m.gamma)
        .fold(bath.overdamped.gamma, f64::min);
    let fastest = bath.brownian_modes.iter().map(|m| m.omega).fold(0.0, f64::max) + big_omega.abs();
    let f = |s: f64| (Complex64::from_polar(1.0, big_omega * s) * time_correlation(bath, s)).re;
    let rule = gauss_legendre(16, 0.0, 1.0);
    // the Matsubara tail is logarithmic at s = 0; s = s0·u⁴ smooths it
    let s0 = 1e-3;
    let mut total = 0.0;
    let panels = 16;
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for &(x, w) in &rule {
            let u = a + (b - a) * x;
            total += w * (b - a) * 4.0 * s0 * u.powi(3) * f(s0 * u.powi(4));
        }
    }
    let end = 45.0 / slowest;
    let width = (1.5 / fastest).min(0.5 / slowest);
    let n = ((end - s0) / width).ceil() as usize;
    let h = (end - s0) / n as f64;
    for p in 0..n {
        let a = s0 + p as f64 * h;
        for &(x, w) in &rule {
            total += w * h * f(a + h * x);
        }
    }
    total
}

/// The spectrogram from its definition: temporal gates times the
/// autocorrelation of the Lorentzian spectral gate's impulse response
/// e^{−(σ_ω + iω̄)κs}, integrated over s by quadrature.
pub fn spectrogram_from_definition(filter: &FilterSpec, t_prime: f64, tau: f64) -> Complex64 {
    let k = RAD_PER_FS_PER_CM;
    let open = |t: f64| {
        if t >= filter.t_bar {
            (-k * filter.sigma_t * (t - filter.t_bar)).exp()
        } else {
            0.0
        }
    };
    let gates = open(t_prime + tau) * open(t_prime);
    if gates == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let response = |s: f64| {
        if s < 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-k * filter.sigma_omega * s, -k * filter.omega_bar * s).exp()
        }
    };
    let start = (-tau).max(0.0);
    let length = 40.0 / (2.0 * k * filter.sigma_omega);
    let rule = excitonscope::quad::composite_gauss_legendre(20, 40, start, start + length);
    let acf: Complex64 = rule
        .iter()
        .map(|&(s, w)| w * response(s + tau) * response(s).conj())
        .sum();
    k * acf * gates
}
