//! Exact checkers for "proves integer-infeasibility", "solves" and
//! "separates".

use serde::{Deserialize, Serialize};

use super::{atoms_of, check_dim, Atom, BBTree, TreeError};
use crate::lp::{self, HullMembership, LinearConstraint, LpStatus, Polytope, RowCombination, Sense};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafCertificate {
    pub leaf: usize,
    pub farkas: RowCombination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum InfeasibilityVerdict {
    /// Every atom is empty; one Farkas certificate per leaf.
    Yes { leaves: Vec<LeafCertificate> },
    /// The first leaf whose atom is nonempty, with a point in it.
    No {
        leaf: usize,
        #[serde(with = "rational::serde_str::vec")]
        point: Vec<Rational>,
    },
}

impl InfeasibilityVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, InfeasibilityVerdict::Yes { .. })
    }
}

/// Decides whether every leaf atom of `tree` on `p` is empty.
pub fn proves_infeasibility(tree: &BBTree, p: &Polytope) -> Result<InfeasibilityVerdict, TreeError> {
    let atoms = atoms_of(tree, p)?;
    let mut certs = Vec::with_capacity(atoms.len());
    for (leaf, atom) in atoms.iter().enumerate() {
        let out = atom.feasible()?;
        match out.status {
            LpStatus::Infeasible => certs.push(LeafCertificate {
                leaf,
                farkas: out.farkas.expect("infeasible outcomes carry a certificate"),
            }),
            _ => {
                return Ok(InfeasibilityVerdict::No {
                    leaf,
                    point: out.point.expect("feasible outcomes carry a point"),
                })
            }
        }
    }
    Ok(InfeasibilityVerdict::Yes { leaves: certs })
}

/// How one leaf satisfies the "solves" definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LeafVerdict {
    /// Condition (i): the atom is empty.
    Empty { farkas: RowCombination },
    /// Condition (ii): `point` is an integral optimum of the atom LP, and
    /// `bound` proves no point of the atom does better.
    Integral {
        #[serde(with = "rational::serde_str")]
        value: Rational,
        #[serde(with = "rational::serde_str::vec")]
        point: Vec<Rational>,
        bound: RowCombination,
    },
    /// Condition (iii): the atom LP value is at most the value of the
    /// integral leaf `by_leaf`.
    Dominated {
        #[serde(with = "rational::serde_str")]
        value: Rational,
        by_leaf: usize,
        bound: RowCombination,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SolveVerdict {
    Yes {
        leaves: Vec<LeafVerdict>,
    },
    /// The first leaf satisfying none of the three conditions.
    No {
        leaf: usize,
        #[serde(with = "rational::serde_str")]
        lp_value: Rational,
        #[serde(with = "rational::serde_str::vec")]
        point: Vec<Rational>,
    },
}

impl SolveVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, SolveVerdict::Yes { .. })
    }

    /// Best value over the integral leaves and a point attaining it.
    pub fn optimum(&self) -> Option<(Rational, Vec<Rational>)> {
        let SolveVerdict::Yes { leaves } = self else {
            return None;
        };
        leaves
            .iter()
            .filter_map(|l| match l {
                LeafVerdict::Integral { value, point, .. } => Some((value.clone(), point.clone())),
                _ => None,
            })
            .max_by(|a, b| a.0.cmp(&b.0))
    }
}

/// Searches the atom for a 0/1 point by LP-guided depth-first fixing of
/// fractional coordinates. Complete for atoms inside `[0,1]^n`.
pub fn find_integral_point(base: &Polytope, extra: &[LinearConstraint]) -> Result<Option<Vec<Rational>>, TreeError> {
    if !base.is_boxed() {
        return Err(TreeError::RequiresBox);
    }
    let n = base.dim();
    let mut rows = extra.to_vec();
    fn dfs(base: &Polytope, rows: &mut Vec<LinearConstraint>, n: usize) -> Result<Option<Vec<Rational>>, TreeError> {
        let out = lp::solve_system(base, rows, None)?;
        let Some(x) = out.point else {
            return Ok(None);
        };
        let Some(j) = x.iter().position(|v| !v.is_integer()) else {
            return Ok(Some(x));
        };
        for v in [0, 1] {
            rows.push(LinearConstraint::eq(rational::unit(n, j), rational::int(v)));
            let found = dfs(base, rows, n)?;
            rows.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    dfs(base, &mut rows, n)
}

enum Pending {
    Empty(RowCombination),
    Integral(Rational, Vec<Rational>, RowCombination),
    Fractional(Rational, Vec<Rational>, RowCombination),
}

/// Decides whether `tree` solves `max c . x` over the 0/1 points of `p`.
///
/// Condition (iii) is read order-free: a leaf is dominated when its LP
/// value is at most the value of any leaf satisfying (ii).
pub fn solves(tree: &BBTree, p: &Polytope, c: &[Rational]) -> Result<SolveVerdict, TreeError> {
    check_dim(p.dim(), c.len())?;
    if !p.is_boxed() {
        return Err(TreeError::RequiresBox);
    }
    let atoms = atoms_of(tree, p)?;
    let mut pending = Vec::with_capacity(atoms.len());
    for atom in &atoms {
        let out = atom.optimize(c, Sense::Max)?;
        pending.push(match out.status {
            LpStatus::Infeasible => Pending::Empty(out.farkas.expect("certificate")),
            _ => {
                let x = out.point.expect("point");
                let v = out.value.expect("value");
                let b = out.bound.expect("bound");
                if rational::all_integral(&x) {
                    Pending::Integral(v, x, b)
                } else {
                    Pending::Fractional(v, x, b)
                }
            }
        });
    }

    let mut best: Option<(Rational, usize)> = None;
    let raise = |best: &mut Option<(Rational, usize)>, v: &Rational, leaf: usize| {
        if best.as_ref().is_none_or(|(b, _)| v > b) {
            *best = Some((v.clone(), leaf));
        }
    };
    for (i, pd) in pending.iter().enumerate() {
        if let Pending::Integral(v, _, _) = pd {
            raise(&mut best, v, i);
        }
    }

    // Fractional vertices in decreasing LP value: skip the optimal-face
    // search whenever an integral leaf already dominates.
    let mut order: Vec<usize> = (0..pending.len())
        .filter(|&i| matches!(pending[i], Pending::Fractional(..)))
        .collect();
    order.sort_by(|&a, &b| {
        let (Pending::Fractional(va, ..), Pending::Fractional(vb, ..)) = (&pending[a], &pending[b]) else {
            unreachable!()
        };
        vb.cmp(va).then(a.cmp(&b))
    });
    let mut face_points: Vec<Option<Vec<Rational>>> = vec![None; pending.len()];
    for &i in &order {
        let Pending::Fractional(v, _, _) = &pending[i] else {
            unreachable!()
        };
        if best.as_ref().is_some_and(|(b, _)| v <= b) {
            continue;
        }
        let mut face = atoms[i].branching.clone();
        face.push(LinearConstraint::ge(c.to_vec(), v.clone()));
        if let Some(z) = find_integral_point(p, &face)? {
            face_points[i] = Some(z);
            raise(&mut best, v, i);
        }
    }

    let mut leaves = Vec::with_capacity(pending.len());
    for (i, pd) in pending.into_iter().enumerate() {
        leaves.push(match pd {
            Pending::Empty(f) => LeafVerdict::Empty { farkas: f },
            Pending::Integral(value, point, bound) => LeafVerdict::Integral { value, point, bound },
            Pending::Fractional(value, x, bound) => match face_points[i].take() {
                Some(point) => LeafVerdict::Integral { value, point, bound },
                None => match &best {
                    Some((b, by)) if &value <= b => LeafVerdict::Dominated {
                        value,
                        by_leaf: *by,
                        bound,
                    },
                    _ => {
                        return Ok(SolveVerdict::No {
                            leaf: i,
                            lp_value: value,
                            point: x,
                        })
                    }
                },
            },
        });
    }
    Ok(SolveVerdict::Yes { leaves })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SeparationVerdict {
    /// `x ∉ conv(T(P))`; `certificate` is absent only for an empty atom list.
    Yes { certificate: Option<RowCombination> },
    /// `x` is a convex combination of points of the leaf atoms.
    No { hull: HullMembership },
}

impl SeparationVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, SeparationVerdict::Yes { .. })
    }
}

/// Decides whether `x` lies outside the convex hull of the leaf atoms.
pub fn separates(tree: &BBTree, p: &Polytope, x: &[Rational]) -> Result<SeparationVerdict, TreeError> {
    check_dim(p.dim(), x.len())?;
    if !p.contains(x)? {
        return Err(TreeError::PointNotInP);
    }
    let atoms = atoms_of(tree, p)?;
    separates_atoms(&atoms, x)
}

pub(crate) fn separates_atoms(atoms: &[Atom<'_>], x: &[Rational]) -> Result<SeparationVerdict, TreeError> {
    let parts: Vec<(&Polytope, &[LinearConstraint])> = atoms.iter().map(|a| (a.base, a.branching.as_slice())).collect();
    Ok(match lp::hull_of_parts(x, &parts)? {
        HullMembership::Outside { certificate } => SeparationVerdict::Yes { certificate },
        inside => SeparationVerdict::No { hull: inside },
    })
}
