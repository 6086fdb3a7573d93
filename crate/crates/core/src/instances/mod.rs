//! Generators for the hard instance families and checkers for the
//! combinatorial facts about them.

mod checks;
mod cross;
mod enumerate;
mod packing;
mod perturbed;
mod tsp;

use serde::{Deserialize, Serialize};

use crate::lp::LpError;
use crate::tree::TreeError;

pub use checks::{
    criticality_bound, entropy_bound_check, facet_check_cardinality, facet_check_on, find_high_dim_face,
    find_shattered_set, gen_half_points, gen_restricted_polytope, half_points_count, half_points_violation,
    CriticalityResult, EntropyCheck, FaceSpec, FacetResult, ShatterResult, Witness,
};
pub use cross::{cross_row, gen_cross_polytope, CrossOracle, CrossSpec};
pub use enumerate::{enum_integer_points, first_integer_point, MAX_ENUM_DIM};
pub use packing::{gen_packing_family, gen_set_cover, PackingOracle, PackingSpec};
pub use perturbed::{gen_perturbed_cross, PerturbedSpec, PERTURBED_DENOM_LOG2};
pub use tsp::{edge_index, edges, gen_tsp_subtour, is_hamiltonian_cycle, TspSpec};

/// Largest `n` for which `2^n`-row families are written out explicitly.
pub const MAX_EXPLICIT_EXP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Explicit,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("n = {0} is too large for an explicit row list")]
    TooLargeForExplicit(usize),
    #[error("dimension {0} is too large")]
    TooLarge(usize),
    #[error("spec violation: {0}")]
    SpecViolation(String),
    #[error("polytope has a 0/1 point")]
    PIsFeasible,
    #[error("polytope is empty")]
    PIsEmpty,
    #[error("inequality is already valid for the polytope")]
    InequalityValidForP,
    #[error("inequality is not valid for the integer hull")]
    InequalityInvalidForHull,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}
