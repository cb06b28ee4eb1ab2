//! Generalized equiangular measurements (GEAMs) for entanglement detection.
//!
//! The crate builds GEAMs from traceless operator bases, certifies the
//! conical 2-design property, evaluates indices of coincidence and their
//! purity bounds, constructs the positive maps and Choi witnesses that
//! follow from those bounds, and applies correlation-matrix separability
//! criteria to bipartite states.
//!
//! ```
//! use geam_core::geam::{build_geam, uniform_weights, Sign};
//! use geam_core::operator_basis::{gell_mann_basis, partition_basis};
//!
//! let partition = partition_basis(gell_mann_basis(2)?, &[2, 2, 2])?;
//! let geam = build_geam(&partition, &uniform_weights(3), 1.0 / 9.0, &[Sign::Plus; 3])?;
//! assert!(geam.is_conical());
//! # Ok::<(), geam_core::Error>(())
//! ```

#![forbid(unsafe_code)]

pub mod coincidence;
pub mod criteria;
pub mod error;
pub mod geam;
pub mod io;
pub mod linalg;
pub mod maps_witness;
pub mod operator_basis;
pub mod states;

pub use error::{Error, Result};
