//! Numerical toolkit for dilations of contractive operator tuples.
//!
//! The crate builds the minimal isometric dilation (both the Fock-space model
//! for pure tuples and the Schäffer model for arbitrary row contractions), the
//! standard commuting dilation on the symmetric Fock space, and the maximal
//! commuting piece of a tuple. On top of these sit the Cuntz-relation tools
//! (spherical decomposition, joint spectral atoms) and a verification harness
//! that turns the structural identities into reportable checks.
//!
//! All spaces are finite dimensional. Fock spaces are truncated at a total
//! degree `M`; every identity that is affected by the truncation is asserted
//! only on its computed safe window.

pub mod cuntz;
pub mod dilate;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod parallel;
pub mod piece;
pub mod sample;
pub mod subspace;
pub mod tuples;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{Mat, Vector, C64};
pub use parallel::Execution;
pub use subspace::Subspace;
pub use tuples::OperatorTuple;

use serde::{Deserialize, Serialize};

/// Tolerances shared by every module.
///
/// `rank_tol` is the single relative threshold used for all rank decisions,
/// `tol` bounds identity residuals and `angle_tol` bounds principal angles
/// when two subspaces are declared equal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: f64,
    pub rank_tol: f64,
    pub angle_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            rank_tol: 1e-9,
            angle_tol: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_rank_tol(mut self, rank_tol: f64) -> Self {
        self.rank_tol = rank_tol;
        self
    }
}
