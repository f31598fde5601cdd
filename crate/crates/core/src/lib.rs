//! Pseudo-random quantum circuits and their statistics.
//!
//! The crate samples circuits built from repeated layers of Haar-random
//! single-qubit rotations followed by a nearest-neighbour ZZ coupling at
//! angle π/4, and compares the resulting ensembles with the circular unitary
//! ensemble (CUE):
//!
//! - [`qcore`]: state vectors, density matrices, gate kernels, partial traces.
//! - [`haar`]: Hurwitz U(2) sampler, Ginibre+QR U(D) sampler, Haar states.
//! - [`circuit`]: circuit sampling, forward/inverse application, matrix
//!   assembly and the on-disk circuit format.
//! - [`stats`]: Meyer–Wallach Q, CUE reference values, ensemble reports,
//!   matrix-element and eigenvector diagnostics, KS distances.
//! - [`noise`]: noise channels and motion-reversal fidelity/purity curves.
//!
//! ```
//! use randcirc::{circuit::CircuitSpec, qcore::StateVector, stats::meyer_wallach_q};
//!
//! let c = CircuitSpec::sample_seeded(4, 10, 7).unwrap();
//! let mut psi = StateVector::zero(4).unwrap();
//! c.apply(&mut psi).unwrap();
//! let q = meyer_wallach_q(&psi).unwrap();
//! assert!((0.0..=1.0).contains(&q));
//! ```

pub mod circuit;
pub mod ensemble;
pub mod error;
pub mod haar;
pub mod linalg;
pub mod noise;
pub mod qcore;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
