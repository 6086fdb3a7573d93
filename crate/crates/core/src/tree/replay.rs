//! Re-verification of checker verdicts using exact arithmetic only.
//!
//! Nothing here calls the LP solver: each certificate is checked
//! algebraically and each of its rows is matched against the polytope, the
//! leaf's branching constraints, or the hull system it claims to come from.

use num_traits::{One, Signed, Zero};

use super::{BBTree, InfeasibilityVerdict, LeafVerdict, SeparationVerdict, SolveVerdict};
use crate::lp::{self, CertificateError, HullMembership, LinearConstraint, Polytope, RowCombination, RowSource};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("tree has {tree} leaves but the verdict covers {verdict}")]
    LeafCount { tree: usize, verdict: usize },
    #[error("leaf {leaf}: {reason}")]
    Leaf { leaf: usize, reason: String },
    #[error("leaf {leaf}: {source}")]
    Certificate { leaf: usize, source: CertificateError },
    #[error("{0}")]
    Other(String),
}

fn leaf_err(leaf: usize, reason: impl Into<String>) -> ReplayError {
    ReplayError::Leaf {
        leaf,
        reason: reason.into(),
    }
}

fn check_sources(
    p: &Polytope,
    path: &[LinearConstraint],
    cert: &RowCombination,
    leaf: usize,
) -> Result<(), ReplayError> {
    if cert.dim != p.dim() {
        return Err(leaf_err(leaf, "certificate dimension differs from the polytope"));
    }
    cert.verify_sources(|t| match &t.source {
        RowSource::Branch(i) => path.get(*i).is_some_and(|r| r.has_le_form(&t.coeffs, &t.rhs)),
        src => p.has_le_row(src, &t.coeffs, &t.rhs),
    })
    .map_err(|source| ReplayError::Certificate { leaf, source })
}

fn farkas(p: &Polytope, path: &[LinearConstraint], cert: &RowCombination, leaf: usize) -> Result<(), ReplayError> {
    cert.verify_farkas()
        .map_err(|source| ReplayError::Certificate { leaf, source })?;
    check_sources(p, path, cert, leaf)
}

fn in_atom(p: &Polytope, path: &[LinearConstraint], x: &[Rational], leaf: usize) -> Result<(), ReplayError> {
    let inside = x.len() == p.dim()
        && p.contains(x).map_err(|e| leaf_err(leaf, e.to_string()))?
        && path.iter().all(|r| r.is_satisfied(x));
    if inside {
        Ok(())
    } else {
        Err(leaf_err(leaf, "witness point is not in the atom"))
    }
}

pub fn replay_infeasibility(tree: &BBTree, p: &Polytope, verdict: &InfeasibilityVerdict) -> Result<(), ReplayError> {
    let paths = tree.leaf_paths();
    match verdict {
        InfeasibilityVerdict::Yes { leaves } => {
            if leaves.len() != paths.len() {
                return Err(ReplayError::LeafCount {
                    tree: paths.len(),
                    verdict: leaves.len(),
                });
            }
            for (i, (cert, path)) in leaves.iter().zip(&paths).enumerate() {
                if cert.leaf != i {
                    return Err(leaf_err(i, "certificates out of leaf order"));
                }
                farkas(p, path, &cert.farkas, i)?;
            }
            Ok(())
        }
        InfeasibilityVerdict::No { leaf, point } => {
            let path = paths.get(*leaf).ok_or_else(|| leaf_err(*leaf, "no such leaf"))?;
            in_atom(p, path, point, *leaf)
        }
    }
}

pub fn replay_solve(tree: &BBTree, p: &Polytope, c: &[Rational], verdict: &SolveVerdict) -> Result<(), ReplayError> {
    let paths = tree.leaf_paths();
    match verdict {
        SolveVerdict::Yes { leaves } => {
            if leaves.len() != paths.len() {
                return Err(ReplayError::LeafCount {
                    tree: paths.len(),
                    verdict: leaves.len(),
                });
            }
            for (i, (lv, path)) in leaves.iter().zip(&paths).enumerate() {
                match lv {
                    LeafVerdict::Empty { farkas: f } => farkas(p, path, f, i)?,
                    LeafVerdict::Integral { value, point, bound } => {
                        in_atom(p, path, point, i)?;
                        if !rational::all_integral(point) {
                            return Err(leaf_err(i, "claimed integral point is fractional"));
                        }
                        if &rational::dot(c, point) != value {
                            return Err(leaf_err(i, "objective value does not match the point"));
                        }
                        bound
                            .verify_upper_bound(c, value)
                            .map_err(|source| ReplayError::Certificate { leaf: i, source })?;
                        check_sources(p, path, bound, i)?;
                    }
                    LeafVerdict::Dominated { value, by_leaf, bound } => {
                        bound
                            .verify_upper_bound(c, value)
                            .map_err(|source| ReplayError::Certificate { leaf: i, source })?;
                        check_sources(p, path, bound, i)?;
                        match leaves.get(*by_leaf) {
                            Some(LeafVerdict::Integral { value: best, .. }) if value <= best => {}
                            _ => return Err(leaf_err(i, "dominating leaf is not integral or not better")),
                        }
                    }
                }
            }
            Ok(())
        }
        SolveVerdict::No { leaf, lp_value, point } => {
            let path = paths.get(*leaf).ok_or_else(|| leaf_err(*leaf, "no such leaf"))?;
            in_atom(p, path, point, *leaf)?;
            if &rational::dot(c, point) != lp_value {
                return Err(leaf_err(*leaf, "objective value does not match the point"));
            }
            Ok(())
        }
    }
}

pub fn replay_separation(
    tree: &BBTree,
    p: &Polytope,
    x: &[Rational],
    verdict: &SeparationVerdict,
) -> Result<(), ReplayError> {
    let paths = tree.leaf_paths();
    match verdict {
        SeparationVerdict::Yes { certificate } => {
            let cert = certificate
                .as_ref()
                .ok_or_else(|| ReplayError::Other("missing hull certificate".into()))?;
            lp::verify_hull_certificate(x, paths.iter().map(|path| (p, path.as_slice())), cert)
                .map_err(|source| ReplayError::Certificate { leaf: 0, source })
        }
        SeparationVerdict::No { hull } => {
            let HullMembership::Inside { weights, witnesses } = hull else {
                return Err(ReplayError::Other("negative verdict without hull weights".into()));
            };
            if weights.len() != paths.len() || witnesses.len() != paths.len() {
                return Err(ReplayError::LeafCount {
                    tree: paths.len(),
                    verdict: weights.len(),
                });
            }
            let mut total = Rational::zero();
            let mut combo = rational::zeros(x.len());
            for (i, ((w, wit), path)) in weights.iter().zip(witnesses).zip(&paths).enumerate() {
                if w.is_negative() {
                    return Err(leaf_err(i, "negative hull weight"));
                }
                if w.is_zero() {
                    continue;
                }
                let wit = wit
                    .as_ref()
                    .ok_or_else(|| leaf_err(i, "weighted leaf without witness"))?;
                in_atom(p, path, &wit.0, i)?;
                total += w;
                for (acc, v) in combo.iter_mut().zip(&wit.0) {
                    *acc += w * v;
                }
            }
            if !total.is_one() || combo.as_slice() != x {
                return Err(ReplayError::Other("hull weights do not reproduce the point".into()));
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, int};
    use crate::tree::{proves_infeasibility, separates, solves, Disjunction};

    #[test]
    fn replays_accept_checker_output_and_reject_tampering() {
        let p = Polytope::new(
            2,
            vec![
                LinearConstraint::ge(vec![int(1), int(1)], half()),
                LinearConstraint::le(vec![int(1), int(1)], half() + int(1)),
            ],
            true,
        )
        .unwrap();
        let t = BBTree::split(Disjunction::variable(2, 0, 0), BBTree::Leaf, BBTree::Leaf);
        let c = [int(1), int(2)];
        let v = solves(&t, &p, &c).unwrap();
        replay_solve(&t, &p, &c, &v).unwrap();

        let s = separates(&t, &p, &[half(), half()]).unwrap();
        replay_separation(&t, &p, &[half(), half()], &s).unwrap();

        let empty = Polytope::new(
            1,
            vec![
                LinearConstraint::le(vec![int(1)], half()),
                LinearConstraint::ge(vec![int(1)], half()),
            ],
            true,
        )
        .unwrap();
        let t1 = BBTree::split(Disjunction::variable(1, 0, 0), BBTree::Leaf, BBTree::Leaf);
        let mut inf = proves_infeasibility(&t1, &empty).unwrap();
        replay_infeasibility(&t1, &empty, &inf).unwrap();
        if let InfeasibilityVerdict::Yes { leaves } = &mut inf {
            leaves[0].farkas.terms[0].rhs += int(1);
        }
        assert!(replay_infeasibility(&t1, &empty, &inf).is_err());
    }
}
