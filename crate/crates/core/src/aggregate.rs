//! Aggregate model input: site energies, couplings, anharmonic shifts and
//! transition dipoles of an N-site Frenkel aggregate.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// The bundled synthetic 14-site aggregate. Its parameters are invented for
/// demonstration; see `data/README.md`.
pub const BUNDLED_AGGREGATE_JSON: &str = include_str!("../data/aggregate14.json");

/// Model input for the exciton Hamiltonian. All energies are in cm⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSpec {
    #[serde(default)]
    pub name: String,
    pub site_energies: Vec<f64>,
    /// Symmetric, zero diagonal.
    pub couplings: Vec<Vec<f64>>,
    /// Overtone shift U⁽¹⁾ₘ: the doubly excited site sits at 2Eₘ + U⁽¹⁾ₘ.
    #[serde(default)]
    pub onsite_anharmonicity: Vec<f64>,
    /// Combination shift U⁽²⁾ₘₙ: |1ₘ1ₙ⟩ sits at Eₘ + Eₙ + U⁽²⁾ₘₙ. Symmetric.
    #[serde(default)]
    pub pair_anharmonicity: Vec<Vec<f64>>,
    pub site_dipoles: Vec<[f64; 3]>,
    /// Per-site scaling of the exciton–phonon coupling.
    #[serde(default)]
    pub bath_coupling_weights: Vec<f64>,
}

impl AggregateSpec {
    pub fn n_sites(&self) -> usize {
        self.site_energies.len()
    }

    /// Parses a JSON document, fills omitted optional blocks with zeros (or
    /// unit bath weights) and validates the result.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut spec: AggregateSpec = serde_json::from_str(text)?;
        spec.fill_defaults();
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_AGGREGATE_JSON).expect("bundled aggregate is valid")
    }

    fn fill_defaults(&mut self) {
        let n = self.n_sites();
        if self.onsite_anharmonicity.is_empty() {
            self.onsite_anharmonicity = vec![0.0; n];
        }
        if self.pair_anharmonicity.is_empty() {
            self.pair_anharmonicity = vec![vec![0.0; n]; n];
        }
        if self.bath_coupling_weights.is_empty() {
            self.bath_coupling_weights = vec![1.0; n];
        }
    }

    /// Uncoupled, non-interacting aggregate; handy for tests.
    pub fn uncoupled(site_energies: Vec<f64>, dipoles: Vec<[f64; 3]>) -> Self {
        let n = site_energies.len();
        let mut spec = AggregateSpec {
            name: String::new(),
            site_energies,
            couplings: vec![vec![0.0; n]; n],
            onsite_anharmonicity: Vec::new(),
            pair_anharmonicity: Vec::new(),
            site_dipoles: dipoles,
            bath_coupling_weights: Vec::new(),
        };
        spec.fill_defaults();
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        let mut problems = Vec::new();
        if n < 2 {
            problems.push(format!("n_sites must be at least 2, got {n}"));
        }
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !square(&self.couplings) {
            problems.push(format!("couplings must be {n}x{n}"));
        }
        if !square(&self.pair_anharmonicity) {
            problems.push(format!("pair_anharmonicity must be {n}x{n}"));
        }
        if self.onsite_anharmonicity.len() != n {
            problems.push(format!("onsite_anharmonicity must have {n} entries"));
        }
        if self.site_dipoles.len() != n {
            problems.push(format!("site_dipoles must have {n} entries"));
        }
        if self.bath_coupling_weights.len() != n {
            problems.push(format!("bath_coupling_weights must have {n} entries"));
        }
        if !problems.is_empty() {
            return Err(Error::validation(problems.join("; ")));
        }

        let finite = self.site_energies.iter().all(|v| v.is_finite())
            && self.couplings.iter().flatten().all(|v| v.is_finite())
            && self.onsite_anharmonicity.iter().all(|v| v.is_finite())
            && self.pair_anharmonicity.iter().flatten().all(|v| v.is_finite())
            && self.site_dipoles.iter().flatten().all(|v| v.is_finite())
            && self.bath_coupling_weights.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("aggregate contains non-finite entries"));
        }

        let scale = self
            .couplings
            .iter()
            .flatten()
            .fold(1.0_f64, |a, &b| a.max(b.abs()));
        for m in 0..n {
            if self.couplings[m][m] != 0.0 {
                return Err(Error::validation(format!(
                    "couplings diagonal must be zero (site {m})"
                )));
            }
            for k in (m + 1)..n {
                if (self.couplings[m][k] - self.couplings[k][m]).abs() > 1e-12 * scale {
                    return Err(Error::validation(format!(
                        "couplings not symmetric at ({m},{k})"
                    )));
                }
                if (self.pair_anharmonicity[m][k] - self.pair_anharmonicity[k][m]).abs() > 1e-9 {
                    return Err(Error::validation(format!(
                        "pair_anharmonicity not symmetric at ({m},{k})"
                    )));
                }
            }
        }
        Ok(())
    }
}
