//! Branch-and-bound trees over legal integer disjunctions.
//!
//! A [`BBTree`] is a full binary tree. Each internal node carries a
//! [`Disjunction`] `pi . x <= pi0  ∨  pi . x >= pi0 + 1`; the left child adds
//! the first side, the right child the second. The tree is independent of
//! any polytope: [`atoms_of`] applies it to one.

mod check;
mod replay;
mod transform;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::{self, LinearConstraint, LpError, LpOutcome, Polytope, Sense};
use crate::rational::{self, Rational};

pub use check::{
    find_integral_point, proves_infeasibility, separates, solves, InfeasibilityVerdict, LeafCertificate, LeafVerdict,
    SeparationVerdict, SolveVerdict,
};
pub use replay::{replay_infeasibility, replay_separation, replay_solve, ReplayError};
pub use transform::transform_tree;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("illegal disjunction: {0}")]
    IllegalDisjunction(String),
    #[error("point is not in the polytope")]
    PointNotInP,
    #[error("operation requires a polytope inside [0,1]^n")]
    RequiresBox,
    #[error(transparent)]
    Lp(#[from] LpError),
}

fn check_dim(expected: usize, found: usize) -> Result<(), TreeError> {
    if expected == found {
        Ok(())
    } else {
        Err(TreeError::DimensionMismatch { expected, found })
    }
}

/// `pi . x <= pi0  ∨  pi . x >= pi0 + 1` with integer data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDisjunction")]
pub struct Disjunction {
    #[serde(with = "rational::serde_bigint::vec")]
    pi: Vec<BigInt>,
    #[serde(with = "rational::serde_bigint")]
    pi0: BigInt,
}

#[derive(Deserialize)]
struct RawDisjunction {
    #[serde(with = "rational::serde_bigint::vec")]
    pi: Vec<BigInt>,
    #[serde(with = "rational::serde_bigint")]
    pi0: BigInt,
}

impl TryFrom<RawDisjunction> for Disjunction {
    type Error = TreeError;
    fn try_from(r: RawDisjunction) -> Result<Self, TreeError> {
        Disjunction::new(r.pi, r.pi0)
    }
}

impl Disjunction {
    /// Rejects `pi = 0`, for which one side is always true and the other
    /// always false.
    pub fn new(pi: Vec<BigInt>, pi0: BigInt) -> Result<Self, TreeError> {
        if pi.iter().all(Zero::is_zero) {
            return Err(TreeError::IllegalDisjunction("all-zero pi".into()));
        }
        Ok(Disjunction { pi, pi0 })
    }

    pub fn from_i64(pi: &[i64], pi0: i64) -> Result<Self, TreeError> {
        Self::new(pi.iter().map(|&v| BigInt::from(v)).collect(), BigInt::from(pi0))
    }

    /// `x_j <= v  ∨  x_j >= v + 1`.
    pub fn variable(n: usize, j: usize, v: i64) -> Self {
        let mut pi = vec![BigInt::zero(); n];
        pi[j] = BigInt::one();
        Disjunction {
            pi,
            pi0: BigInt::from(v),
        }
    }

    pub fn pi(&self) -> &[BigInt] {
        &self.pi
    }

    pub fn pi0(&self) -> &BigInt {
        &self.pi0
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    fn pi_rational(&self) -> Vec<Rational> {
        self.pi.iter().map(|v| Rational::from_integer(v.clone())).collect()
    }

    /// `pi . x <= pi0`.
    pub fn left(&self) -> LinearConstraint {
        LinearConstraint::le(self.pi_rational(), Rational::from_integer(self.pi0.clone()))
    }

    /// `pi . x >= pi0 + 1`.
    pub fn right(&self) -> LinearConstraint {
        LinearConstraint::ge(self.pi_rational(), Rational::from_integer(&self.pi0 + BigInt::one()))
    }

    pub fn value(&self, x: &[Rational]) -> Rational {
        rational::dot(&self.pi_rational(), x)
    }

    /// Whether `x` lies strictly between the two sides.
    pub fn cuts_off(&self, x: &[Rational]) -> bool {
        let v = self.value(x);
        let lo = Rational::from_integer(self.pi0.clone());
        v > lo && v < lo + Rational::one()
    }
}

impl fmt::Display for Disjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  or  {}", self.left(), self.right())
    }
}

/// A full binary tree of disjunctions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub enum BBTree {
    Leaf,
    Split {
        disjunction: Disjunction,
        left: Box<BBTree>,
        right: Box<BBTree>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TreeRepr {
    Leaf {
        leaf: bool,
    },
    Split {
        #[serde(with = "rational::serde_bigint::vec")]
        pi: Vec<BigInt>,
        #[serde(with = "rational::serde_bigint")]
        pi0: BigInt,
        left: Box<TreeRepr>,
        right: Box<TreeRepr>,
    },
}

impl From<BBTree> for TreeRepr {
    fn from(t: BBTree) -> Self {
        match t {
            BBTree::Leaf => TreeRepr::Leaf { leaf: true },
            BBTree::Split {
                disjunction,
                left,
                right,
            } => TreeRepr::Split {
                pi: disjunction.pi,
                pi0: disjunction.pi0,
                left: Box::new((*left).into()),
                right: Box::new((*right).into()),
            },
        }
    }
}

impl TryFrom<TreeRepr> for BBTree {
    type Error = TreeError;
    fn try_from(r: TreeRepr) -> Result<Self, TreeError> {
        match r {
            TreeRepr::Leaf { leaf: true } => Ok(BBTree::Leaf),
            TreeRepr::Leaf { leaf: false } => Err(TreeError::IllegalDisjunction(
                "node marked leaf=false without children".into(),
            )),
            TreeRepr::Split { pi, pi0, left, right } => Ok(BBTree::split(
                Disjunction::new(pi, pi0)?,
                (*left).try_into()?,
                (*right).try_into()?,
            )),
        }
    }
}

impl BBTree {
    pub fn leaf() -> Self {
        BBTree::Leaf
    }

    pub fn split(disjunction: Disjunction, left: BBTree, right: BBTree) -> Self {
        BBTree::Split {
            disjunction,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Splits `x_0, ..., x_{n-1}` in order at every level: `2^n` leaves, each
    /// fixing all coordinates to 0/1.
    pub fn full_variable_tree(n: usize) -> Self {
        fn build(n: usize, j: usize) -> BBTree {
            if j == n {
                return BBTree::Leaf;
            }
            BBTree::split(Disjunction::variable(n, j, 0), build(n, j + 1), build(n, j + 1))
        }
        build(n, 0)
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, BBTree::Leaf)
    }

    pub fn leaves(&self) -> usize {
        match self {
            BBTree::Leaf => 1,
            BBTree::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    /// Number of nodes, `2 * leaves - 1`.
    pub fn size(&self) -> usize {
        match self {
            BBTree::Leaf => 1,
            BBTree::Split { left, right, .. } => 1 + left.size() + right.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BBTree::Leaf => 0,
            BBTree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Checks that every disjunction has length `n`.
    pub fn check_dim(&self, n: usize) -> Result<(), TreeError> {
        match self {
            BBTree::Leaf => Ok(()),
            BBTree::Split {
                disjunction,
                left,
                right,
            } => {
                check_dim(n, disjunction.dim())?;
                left.check_dim(n)?;
                right.check_dim(n)
            }
        }
    }

    /// Branching constraints of every leaf, left to right.
    pub fn leaf_paths(&self) -> Vec<Vec<LinearConstraint>> {
        fn walk(t: &BBTree, path: &mut Vec<LinearConstraint>, out: &mut Vec<Vec<LinearConstraint>>) {
            match t {
                BBTree::Leaf => out.push(path.clone()),
                BBTree::Split {
                    disjunction,
                    left,
                    right,
                } => {
                    path.push(disjunction.left());
                    walk(left, path, out);
                    path.pop();
                    path.push(disjunction.right());
                    walk(right, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Disjunctions in preorder.
    pub fn disjunctions(&self) -> Vec<&Disjunction> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let BBTree::Split {
                disjunction,
                left,
                right,
            } = t
            {
                out.push(disjunction);
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }
}

/// `base ∩ {x : branching}` for one leaf.
#[derive(Debug, Clone)]
pub struct Atom<'a> {
    pub base: &'a Polytope,
    pub branching: Vec<LinearConstraint>,
}

impl<'a> Atom<'a> {
    pub fn new(base: &'a Polytope, branching: Vec<LinearConstraint>) -> Result<Self, TreeError> {
        for r in &branching {
            check_dim(base.dim(), r.dim())?;
        }
        Ok(Atom { base, branching })
    }

    pub fn feasible(&self) -> Result<LpOutcome, TreeError> {
        Ok(lp::solve_system(self.base, &self.branching, None)?)
    }

    pub fn optimize(&self, c: &[Rational], sense: Sense) -> Result<LpOutcome, TreeError> {
        check_dim(self.base.dim(), c.len())?;
        Ok(lp::solve_system(self.base, &self.branching, Some((c, sense)))?)
    }

    pub fn contains(&self, x: &[Rational]) -> Result<bool, TreeError> {
        Ok(self.base.contains(x)? && self.branching.iter().all(|r| r.is_satisfied(x)))
    }

    /// The atom as a standalone polytope.
    pub fn to_polytope(&self) -> Polytope {
        self.base
            .with_rows(self.branching.iter().cloned())
            .expect("branching rows were dimension-checked")
    }
}

/// One atom per leaf in left-to-right order.
pub fn atoms_of<'a>(tree: &BBTree, p: &'a Polytope) -> Result<Vec<Atom<'a>>, TreeError> {
    tree.check_dim(p.dim())?;
    Ok(tree
        .leaf_paths()
        .into_iter()
        .map(|branching| Atom { base: p, branching })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn zero_pi_rejected() {
        assert!(Disjunction::from_i64(&[0, 0], 1).is_err());
    }

    #[test]
    fn full_tree_shape() {
        let t = BBTree::full_variable_tree(3);
        assert_eq!(t.leaves(), 8);
        assert_eq!(t.size(), 15);
        assert_eq!(t.depth(), 3);
        let paths = t.leaf_paths();
        assert_eq!(paths[0][0], LinearConstraint::le(vec![int(1), int(0), int(0)], int(0)));
        assert_eq!(paths[7][2], LinearConstraint::ge(vec![int(0), int(0), int(1)], int(1)));
    }

    #[test]
    fn json_shape() {
        let t = BBTree::split(Disjunction::from_i64(&[1, -2], 3).unwrap(), BBTree::Leaf, BBTree::Leaf);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(
            s,
            r#"{"pi":["1","-2"],"pi0":"3","left":{"leaf":true},"right":{"leaf":true}}"#
        );
        assert_eq!(serde_json::from_str::<BBTree>(&s).unwrap(), t);
        assert!(
            serde_json::from_str::<BBTree>(r#"{"pi":["0"],"pi0":"1","left":{"leaf":true},"right":{"leaf":true}}"#)
                .is_err()
        );
    }

    #[test]
    fn root_split_atoms() {
        let p = Polytope::unit_cube(2);
        let t = BBTree::split(Disjunction::variable(2, 0, 0), BBTree::Leaf, BBTree::Leaf);
        let atoms = atoms_of(&t, &p).unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(
            atoms[0].branching,
            vec![LinearConstraint::le(vec![int(1), int(0)], int(0))]
        );
        assert_eq!(
            atoms[1].branching,
            vec![LinearConstraint::ge(vec![int(1), int(0)], int(1))]
        );
        assert_eq!(atoms_of(&BBTree::Leaf, &p).unwrap()[0].branching, vec![]);
    }
}
