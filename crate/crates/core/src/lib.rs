//! Born-rule statistics of dynamical quantum phase transitions (DQPTs) in the
//! one-dimensional transverse-field Ising chain
//!
//! ```text
//! H = -J sum_j Z_j Z_{j+1} - h sum_j X_j
//! ```
//!
//! quenched from `|+...+>` and measured in the X basis. The crate provides
//!
//! * [`evolution`]: Trotterized and exact (symmetry-reduced spectral)
//!   real/complex-time evolution and the Z-to-X butterfly transform,
//! * [`ensemble`]: the Born distribution over outcomes, dynamical free
//!   energies `f(sigma)`, moment averages `f_n`, participation entropies and
//!   multifractal fits, spectrum frames and Born sampling,
//! * [`analytic`]: free-fermion closed forms (dispersion, rate functions,
//!   Yang-Lee-Fisher zero lines, critical times),
//! * [`experiments`]: time series, complex-time scans with zero detection,
//!   finite-size scaling and sampling studies,
//! * [`mbqc`]: a streaming cluster-state simulation of the Trotter step.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod analytic;
pub mod cancel;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod io;
pub mod mbqc;
pub mod model;
pub mod quadrature;
pub(crate) mod reduce;
pub mod stats;

pub use error::{Error, Result};
pub use evolution::{ComplexTime, EvolutionMode, StateVector};
pub use model::{Bitstring, Boundary, ModelParams, Parity, TimeGrid};

/// Version string recorded in run manifests.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
