//! Entangled two-photon excitation and coincidence detection in molecular
//! aggregates with three-level sites.

pub mod aggregate;
pub mod bath;
pub mod coincidence;
pub mod config;
pub mod error;
pub mod excitation;
pub mod excitation_oracle;
pub mod filter;
pub mod exciton;
pub mod model;
pub mod output;
pub mod propagate;
pub mod quad;
pub mod scenario;
pub mod source;
pub mod transport;
pub mod units;

pub use error::{Error, Result};
