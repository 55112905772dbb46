//! Quantum geometric tensor of spin-chain ground states.
//!
//! The crate builds sector-restricted Hamiltonians for a small catalog of
//! spin-1/2 chains, solves for their ground states, and evaluates the
//! quantum geometric tensor `Q_{μν}` (metric `g = Re Q`, Berry curvature
//! `F = Im Q`) by three independent routes: finite differences of
//! gauge-fixed ground states, the perturbative sum over excited states,
//! and the imaginary-time correlation integral. The `scaling` module holds
//! the critical-exponent relations and the finite-size fits used to read
//! off how `Q` grows with system size.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod model;
pub mod scaling;
pub mod sparse;

pub use basis::{default_sector, full_space, sector_basis, Conservation, SymmetrySector};
pub use eigen::{dense_spectrum, gap, lanczos_lowest_k, SolverOptions, SpectralData};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, build_perturbation};
pub use model::{Boundary, ModelKind, ModelSpec};
pub use sparse::{SparseOperator, C64};
