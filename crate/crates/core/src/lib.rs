//! Direct identification of decoherence-free subspaces (DFS) from state
//! tomography of a channel's output, without reconstructing the process.
//!
//! The crate is organised bottom-up:
//!
//! - [`qmath`]: small dense complex linear algebra, kets, density matrices,
//!   Hermitian eigendecomposition, Haar sampling and Gram-Schmidt.
//! - [`channels`]: Kraus-operator channels (sometimes-swap, dressed and
//!   block-dephasing test channels) and their Heisenberg-picture adjoints.
//! - [`tomography`]: the reversed trial. `d²` informationally complete input
//!   states are sent through the channel and each output is projected onto a
//!   single random state; the resulting statistics are those of a state
//!   tomography of the adjoint image of that projector.
//! - [`protocol`]: pairing eigenvectors across trials to locate a 1D DFS,
//!   syndrome detection, Gram-Schmidt subspace discovery and DFS checks.
//! - [`analytics`]: random-overlap laws, the shot-noise failure estimate,
//!   confidence bands and distribution summaries.

pub mod analytics;
pub mod channels;
mod error;
pub mod protocol;
pub mod qmath;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
