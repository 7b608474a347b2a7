//! Everything derived from an aggregate and a bath, computed once.

use num_complex::Complex64;

use crate::aggregate::AggregateSpec;
use crate::bath::BathSpec;
use crate::error::Result;
use crate::exciton::{compute_transition_dipoles, ExcitonEigensystem, Manifold, TransitionDipoles};
use crate::transport::{CoherenceWidths, TransportModel};

/// Poles with |Im z| below this are pushed into the lower half plane.
pub const POLE_GUARD: f64 = 1e-8;
/// Size of that push, cm⁻¹.
pub const POLE_SHIFT: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct ExcitonModel {
    pub spec: AggregateSpec,
    pub bath: BathSpec,
    pub eig: ExcitonEigensystem,
    pub dipoles: TransitionDipoles,
    pub one: TransportModel,
    pub two: TransportModel,
    pub widths: CoherenceWidths,
}

impl ExcitonModel {
    pub fn new(spec: &AggregateSpec, bath: &BathSpec) -> Result<Self> {
        spec.validate().map_err(|e| e.in_stage("aggregate"))?;
        bath.validate().map_err(|e| e.in_stage("bath"))?;
        let eig = ExcitonEigensystem::new(spec).map_err(|e| e.in_stage("diagonalization"))?;
        let dipoles = compute_transition_dipoles(&eig, spec)?;
        let w = &spec.bath_coupling_weights;
        let one = TransportModel::new(&eig, Manifold::One, bath, w)
            .map_err(|e| e.in_stage("one-exciton transport"))?;
        let two = TransportModel::new(&eig, Manifold::Two, bath, w)
            .map_err(|e| e.in_stage("two-exciton transport"))?;
        let widths = CoherenceWidths::new(&one, &two, bath.pure_dephasing);
        Ok(Self {
            spec: spec.clone(),
            bath: bath.clone(),
            eig,
            dipoles,
            one,
            two,
            widths,
        })
    }

    pub fn bundled() -> Result<Self> {
        Self::new(&AggregateSpec::bundled(), &BathSpec::bundled())
    }

    pub fn n_one(&self) -> usize {
        self.eig.n_one()
    }

    pub fn n_two(&self) -> usize {
        self.eig.n_two()
    }

    pub fn e(&self, e: usize) -> f64 {
        self.eig.one_ex_energies[e]
    }

    pub fn f(&self, f: usize) -> f64 {
        self.eig.two_ex_energies[f]
    }

    // Poles ζ_ab = ε_a − ε_b − iγ_ab in cm⁻¹; a coherence evolves as
    // e^{−iκζ t}.

    pub fn z_eg(&self, e: usize) -> Complex64 {
        Complex64::new(self.e(e), -self.widths.eg(e))
    }

    pub fn z_fg(&self, f: usize) -> Complex64 {
        Complex64::new(self.f(f), -self.widths.fg(f))
    }

    pub fn z_fe(&self, f: usize, e: usize) -> Complex64 {
        Complex64::new(self.f(f) - self.e(e), -self.widths.fe(f, e))
    }

    pub fn z_ef(&self, e: usize, f: usize) -> Complex64 {
        Complex64::new(self.e(e) - self.f(f), -self.widths.fe(f, e))
    }

    pub fn z_ee(&self, e: usize, e2: usize) -> Complex64 {
        Complex64::new(self.e(e) - self.e(e2), -self.widths.ee(e, e2))
    }

    /// Population of f decays with its total out-rate.
    pub fn z_ff(&self, f: usize) -> Complex64 {
        Complex64::new(0.0, -self.widths.two[f])
    }

    /// Transport eigenpole −iλ_p of the one-exciton manifold.
    pub fn z_p(&self, p: usize) -> Complex64 {
        Complex64::new(0.0, -self.one.eigenvalues[p])
    }
}

/// Moves a pole off the real axis when it sits closer than [`POLE_GUARD`];
/// the flag records that a shift was applied.
pub fn regularize(z: Complex64, flag: &mut bool) -> Complex64 {
    if z.im.abs() < POLE_GUARD {
        *flag = true;
        Complex64::new(z.re, -POLE_SHIFT)
    } else {
        z
    }
}
