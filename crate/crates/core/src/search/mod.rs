//! Branch-and-bound execution and exhaustive minimal-tree search.

mod engine;
mod exhaustive;

use crate::instances::InstanceError;
use crate::lp::LpError;
use crate::tree::TreeError;

pub use engine::{run_bb, BranchStrategy, NodeRecord, RunReport, RunStatus, SearchBudget};
pub use exhaustive::{
    bounded_trees, min_tree_size, primitive_directions, separation_resistance, MinTreeResult, SeparationResult,
    BOUNDED_COEFFICIENT_CAVEAT, MAX_SEARCH_COEFF, MAX_SEARCH_DIM,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("strategy cannot cut off the LP optimum: {0}")]
    StrategyStuck(String),
    #[error("dimension {dim} with coefficient bound {m} exceeds the exhaustive-search limits")]
    TooLarge { dim: usize, m: u64 },
    #[error("polytope has a 0/1 point")]
    PNotInfeasible,
    #[error("point lies in the integer hull")]
    PointInHull,
    #[error("point is not in the polytope")]
    PointNotInP,
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}
