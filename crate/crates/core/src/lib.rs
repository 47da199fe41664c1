//! Continuous-time quantum walks on graph Laplacians with twin-edge
//! perturbations.
//!
//! - [`graph`]: weighted graphs, twin vertices, the rank-one perturbation
//! - [`spectral`]: Jacobi eigendecomposition into projectors, and an
//!   independent matrix-exponential oracle
//! - [`walk`]: propagators, transfer fidelity, perfect / pretty good state
//!   transfer checks and scans
//! - [`circulant`]: `Cay(Z_n, S)`, gcd-sets and cosine-sum spectra
//! - [`families`]: constructions with known transfer witnesses
//! - [`report`]: JSON input/output and the CLI commands

pub mod circulant;
pub mod error;
pub mod families;
pub mod graph;
pub mod matrix;
pub mod report;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{EdgePerturbation, TwinPair, WeightedGraph};
pub use matrix::{ComplexMatrix, SymmetricMatrix};
pub use spectral::Spectrum;
pub use walk::{PgstWitness, Propagator, TransferKind, TransferReport};
