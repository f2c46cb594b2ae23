//! Symmetric extendibility of two-qubit states.
//!
//! A two-qubit density matrix `ρ_AB` is symmetric extendible when a three-qubit
//! state `ρ_ABB'` exists whose AB and AB' marginals both equal `ρ_AB`. This
//! crate decides extendibility through the closed-form spectral slack
//!
//! ```text
//! f(ρ) = tr(ρ_B²) − tr(ρ_AB²) + 4·√det(ρ_AB)
//! ```
//!
//! (`f(ρ) ≥ 0` iff an extension exists), produces supporting-hyperplane
//! witnesses for non-extendible states, constructs explicit extension
//! certificates for extendible ones, and cross-validates everything with an
//! independent Dykstra alternating-projection feasibility oracle.
//!
//! Modules:
//! - [`linalg`]: dependency-free complex matrix arithmetic and a cyclic Jacobi
//!   eigensolver for the fixed sizes 2, 4, 8.
//! - [`states`]: density-operator types, partial traces, named families,
//!   seeded random states, JSON state files.
//! - [`criterion`]: the f-value, classification, witnesses, and the (P,Q,R)
//!   block factorization with its boundary identities.
//! - [`extension`]: three-qubit Hamiltonians, ground spaces, face
//!   parameterization, rank decompositions, and extension certificates.
//! - [`oracle`]: Dykstra alternating projections between the PSD cone and the
//!   marginal-matching affine set.
//! - [`channels`]: Kraus/Choi representations and anti-degradability of qubit
//!   channels.

// dense fixed-size index math reads better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod channels;
pub mod criterion;
pub mod extension;
pub mod linalg;
pub mod oracle;
pub mod states;

pub use channels::{ChannelError, ChannelFamily, ChoiState, KrausSet};
pub use criterion::{CriterionError, PqrTriple, StateClass, Verdict};
pub use extension::{
    ExtensionCertificate, ExtensionError, ExtensionRoute, FacePoint, Rank3Split,
};
pub use linalg::{CMat, Cplx, EigDecomp, HermMat, LinalgError};
pub use oracle::{OracleReport, OracleStatus};
pub use states::{DensityOp, DensityOp2, DensityOp4, DensityOp8, RngSeed, StateError};
