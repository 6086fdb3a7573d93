//! Pulling a tree back through an integral affine map.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{BBTree, Disjunction, TreeError};
use crate::transforms::{AffineMap, MapError};

fn map_err(e: MapError) -> TreeError {
    match e {
        MapError::DimensionMismatch { expected, found } => TreeError::DimensionMismatch { expected, found },
        other => TreeError::IllegalDisjunction(other.to_string()),
    }
}

/// Rewrites every disjunction `(a, b)` of `tree_hat` (dimension `m`) as
/// `(C^T a, b - a . d)` in dimension `n`, keeping the tree shape.
///
/// When `C^T a = 0` one side of the split holds for every `x` and the other
/// for none. The node is then replaced by a split on `x_0` whose side
/// matching the always-true branch is `x_0 >= 0` (or `-x_0 <= 0`) and whose
/// other side is `x_0 <= -1`, which is empty over `[0,1]^n`. Leaf atoms of
/// the result still map into the corresponding leaf atoms of `tree_hat`
/// whenever the base polytope lies in the unit box.
pub fn transform_tree(tree_hat: &BBTree, f: &AffineMap) -> Result<BBTree, TreeError> {
    tree_hat.check_dim(f.output_dim())?;
    if f.input_dim() == 0 && !tree_hat.is_leaf() {
        return Err(TreeError::IllegalDisjunction(
            "map from a zero-dimensional space".into(),
        ));
    }
    rewrite(tree_hat, f)
}

fn rewrite(t: &BBTree, f: &AffineMap) -> Result<BBTree, TreeError> {
    match t {
        BBTree::Leaf => Ok(BBTree::Leaf),
        BBTree::Split {
            disjunction,
            left,
            right,
        } => {
            let (pi, pi0) = f.pull_back(disjunction.pi(), disjunction.pi0()).map_err(map_err)?;
            let d = if pi.iter().all(Zero::is_zero) {
                let n = f.input_dim();
                let mut e1 = vec![BigInt::zero(); n];
                if pi0.is_negative() {
                    // left side 0 <= pi0 is false: x_0 <= -1  ∨  x_0 >= 0
                    e1[0] = BigInt::one();
                    Disjunction::new(e1, -BigInt::one())?
                } else {
                    // left side holds: -x_0 <= 0  ∨  -x_0 >= 1
                    e1[0] = -BigInt::one();
                    Disjunction::new(e1, BigInt::zero())?
                }
            } else {
                Disjunction::new(pi, pi0)?
            };
            Ok(BBTree::split(d, rewrite(left, f)?, rewrite(right, f)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{make_dup, make_embed, make_flip, DupSpec, EmbedSpec, FlipSpec};

    fn single(pi: &[i64], pi0: i64) -> BBTree {
        BBTree::split(Disjunction::from_i64(pi, pi0).unwrap(), BBTree::Leaf, BBTree::Leaf)
    }

    #[test]
    fn flip_node() {
        let f = make_flip(FlipSpec { n: 2, j: vec![0, 1] }).unwrap();
        let t = transform_tree(&single(&[1, 0], 0), &f).unwrap();
        assert_eq!(t, single(&[-1, 0], -1));
    }

    #[test]
    fn identity_and_dup() {
        let t = single(&[2, -1], 1);
        assert_eq!(transform_tree(&t, &AffineMap::identity(2)).unwrap(), t);
        let f = make_dup(DupSpec { n: 2, tuple: vec![0] }).unwrap();
        assert_eq!(transform_tree(&single(&[1, 0, 1], 1), &f).unwrap(), single(&[2, 0], 1));
    }

    #[test]
    fn constant_node_becomes_empty_sibling() {
        // y = (x, 0, 1); node on y_3 <= 0 is always false for the image.
        let f = make_embed(EmbedSpec {
            n: 1,
            zeros: 1,
            ones: 1,
            positions: vec![],
        })
        .unwrap();
        let t = transform_tree(&single(&[0, 0, 1], 0), &f).unwrap();
        assert_eq!(t, single(&[1], -1));
        let t = transform_tree(&single(&[0, 1, 0], 0), &f).unwrap();
        assert_eq!(t, single(&[-1], 0));
    }
}
