//! Inner-polytope certification of separability for bipartite and
//! multiparty quantum states.
//!
//! The visibility `χ` of a state `ρ` is the largest `t` for which
//! `tρ + (1 − t)·1/d` lies in a separability class. Replacing one party's
//! state space by the convex hull of finitely many vertices turns membership
//! into a semidefinite program whose optimum is a certified lower bound on
//! `χ`; re-building the polytope from the optimal partner operators and
//! alternating sides tightens the bound.

// Links the system BLAS/LAPACK used by the solver's dense PSD kernels.
use openblas_src as _;

pub mod basis;
pub mod bipartite;
pub mod conic;
pub mod decomp;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod multiparty;
pub mod polytope;
pub mod seesaw;
pub mod states;

pub use error::{Error, Result};
pub use hermitian::{HermitianOp, PartitionedState};
