//! Exhaustive search over trees whose disjunctions have `max |pi_i| <= M`.
//!
//! Candidate disjunctions at an atom: every primitive `pi` with first
//! nonzero entry positive (the negated split only swaps the children), and
//! `pi0` between `ceil(min pi . x) - 1` and `floor(max pi . x)` over the
//! atom, dropping the values for which one child equals the atom itself.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::instances::{enum_integer_points, first_integer_point};
use crate::lp::{self, HullMembership, LinearConstraint, LpStatus, Polytope, Sense};
use crate::rational::{self, Rational};
use crate::tree::{BBTree, Disjunction};

/// A tree and the row lists of its nonempty leaf atoms.
type TreeWithAtoms = (BBTree, Vec<Vec<LinearConstraint>>);

pub const MAX_SEARCH_DIM: usize = 3;
pub const MAX_SEARCH_COEFF: u64 = 3;

/// Attached to every exhaustive-search result.
pub const BOUNDED_COEFFICIENT_CAVEAT: &str =
    "exhaustive over disjunctions with max |pi_i| <= M only; trees with larger coefficients were not searched";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum MinTreeResult {
    Exact { leaves: usize, tree: BBTree },
    MoreThan { max_leaves: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SeparationResult {
    MinLeavesToSeparate { leaves: usize, tree: BBTree },
    MoreThan { max_leaves: usize },
}

/// Primitive vectors in `{-m..m}^n \ {0}` whose first nonzero entry is
/// positive, in lexicographic order of `(max |pi_i|, pi)`.
pub fn primitive_directions(n: usize, m: u64) -> Vec<Vec<i64>> {
    let m = m as i64;
    let mut out = Vec::new();
    let mut v = vec![-m; n];
    if n == 0 {
        return out;
    }
    loop {
        let first = v.iter().find(|&&c| c != 0);
        if first.is_some_and(|&c| c > 0) && v.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1 {
            out.push(v.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                out.sort_by_key(|p| (p.iter().map(|c| c.abs()).max(), p.clone()));
                return out;
            }
            i -= 1;
            v[i] += 1;
            if v[i] <= m {
                break;
            }
            v[i] = -m;
        }
    }
}

fn canonical_key(rows: &[LinearConstraint]) -> String {
    let mut keys: Vec<String> = rows.iter().map(|r| r.normalized().to_string()).collect();
    keys.sort();
    keys.dedup();
    keys.join(";")
}

#[derive(Default, Clone)]
struct Entry {
    /// Exact minimum and the split attaining it (`None` for an empty atom).
    exact: Option<(usize, Option<Disjunction>)>,
    /// The minimum is known to exceed this many leaves.
    above: usize,
}

struct Search<'a> {
    p: &'a Polytope,
    dirs: Vec<Vec<Rational>>,
    raw: Vec<Vec<BigInt>>,
    memo: HashMap<String, Entry>,
    candidates: HashMap<String, Option<Vec<Disjunction>>>,
}

impl<'a> Search<'a> {
    fn new(p: &'a Polytope, m: u64) -> Self {
        let dirs = primitive_directions(p.dim(), m);
        Search {
            p,
            dirs: dirs
                .iter()
                .map(|d| d.iter().map(|&c| rational::int(c)).collect())
                .collect(),
            raw: dirs
                .iter()
                .map(|d| d.iter().map(|&c| BigInt::from(c)).collect())
                .collect(),
            memo: HashMap::new(),
            candidates: HashMap::new(),
        }
    }

    /// Candidate splits of the atom, or `None` when it is empty.
    fn candidates(&mut self, key: &str, rows: &[LinearConstraint]) -> Result<Option<Vec<Disjunction>>, SearchError> {
        if let Some(c) = self.candidates.get(key) {
            return Ok(c.clone());
        }
        let mut out = Vec::new();
        let mut empty = false;
        for (dir, raw) in self.dirs.iter().zip(&self.raw) {
            let lo = lp::solve_system(self.p, rows, Some((dir, Sense::Min)))?;
            if lo.status == LpStatus::Infeasible {
                empty = true;
                break;
            }
            let hi = lp::solve_system(self.p, rows, Some((dir, Sense::Max)))?;
            let (Some(lo), Some(hi)) = (lo.value, hi.value) else {
                return Err(SearchError::Unbounded);
            };
            let start: BigInt = lo.ceil().to_integer() - 1;
            let end: BigInt = hi.floor().to_integer();
            let mut pi0 = start;
            while pi0 <= end {
                let v = Rational::from_integer(pi0.clone());
                if v < hi && v.clone() + Rational::from_integer(1.into()) > lo {
                    out.push(Disjunction::new(raw.clone(), pi0.clone())?);
                }
                pi0 += 1;
            }
        }
        let res = (!empty).then_some(out);
        self.candidates.insert(key.to_string(), res.clone());
        Ok(res)
    }

    /// Minimum leaves of a tree proving the atom empty, if at most `cap`.
    fn min_leaves(&mut self, rows: &[LinearConstraint], cap: usize) -> Result<Option<usize>, SearchError> {
        let key = canonical_key(rows);
        if let Some(e) = self.memo.get(&key) {
            if let Some((v, _)) = e.exact {
                return Ok((v <= cap).then_some(v));
            }
            if e.above >= cap {
                return Ok(None);
            }
        }
        let Some(cands) = self.candidates(&key, rows)? else {
            self.memo.entry(key).or_default().exact = Some((1, None));
            return Ok((cap >= 1).then_some(1));
        };
        let mut best: Option<(usize, Disjunction)> = None;
        let mut limit = cap;
        for d in cands {
            if limit < 2 {
                break;
            }
            let mut left = rows.to_vec();
            left.push(d.left());
            let Some(l) = self.min_leaves(&left, limit - 1)? else {
                continue;
            };
            let mut right = rows.to_vec();
            right.push(d.right());
            let Some(r) = self.min_leaves(&right, limit - l)? else {
                continue;
            };
            limit = l + r - 1;
            best = Some((l + r, d));
        }
        let e = self.memo.entry(key).or_default();
        match best {
            Some((v, d)) => {
                e.exact = Some((v, Some(d)));
                Ok(Some(v))
            }
            None => {
                e.above = e.above.max(cap);
                Ok(None)
            }
        }
    }

    fn build(&self, rows: &mut Vec<LinearConstraint>) -> BBTree {
        let entry = &self.memo[&canonical_key(rows)];
        match &entry.exact {
            Some((_, Some(d))) => {
                let d = d.clone();
                rows.push(d.left());
                let left = self.build(rows);
                rows.pop();
                rows.push(d.right());
                let right = self.build(rows);
                rows.pop();
                BBTree::split(d, left, right)
            }
            _ => BBTree::Leaf,
        }
    }

    /// Every candidate tree with exactly `leaves` leaves, each paired with
    /// the row lists of its nonempty leaf atoms.
    fn trees(&mut self, rows: &[LinearConstraint], leaves: usize) -> Result<Vec<TreeWithAtoms>, SearchError> {
        let key = canonical_key(rows);
        let cands = self.candidates(&key, rows)?;
        if leaves == 1 {
            let atoms = if cands.is_some() {
                vec![rows.to_vec()]
            } else {
                Vec::new()
            };
            return Ok(vec![(BBTree::Leaf, atoms)]);
        }
        let Some(cands) = cands else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for d in cands {
            let mut left = rows.to_vec();
            left.push(d.left());
            let mut right = rows.to_vec();
            right.push(d.right());
            for l in 1..leaves {
                let lt = self.trees(&left, l)?;
                if lt.is_empty() {
                    continue;
                }
                let rt = self.trees(&right, leaves - l)?;
                for (t1, a1) in &lt {
                    for (t2, a2) in &rt {
                        let atoms = a1.iter().chain(a2).cloned().collect();
                        out.push((BBTree::split(d.clone(), t1.clone(), t2.clone()), atoms));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn check_limits(p: &Polytope, m: u64) -> Result<(), SearchError> {
    if p.dim() > MAX_SEARCH_DIM || m > MAX_SEARCH_COEFF || m == 0 {
        return Err(SearchError::TooLarge { dim: p.dim(), m });
    }
    if !p.is_boxed() {
        return Err(lp::LpError::RequiresBox.into());
    }
    Ok(())
}

/// Fewest leaves of a tree with `max |pi_i| <= m` proving that `p` has no
/// 0/1 point, searched up to `max_leaves`.
pub fn min_tree_size(p: &Polytope, m: u64, max_leaves: usize) -> Result<MinTreeResult, SearchError> {
    check_limits(p, m)?;
    if first_integer_point(p)?.is_some() {
        return Err(SearchError::PNotInfeasible);
    }
    let mut s = Search::new(p, m);
    Ok(match s.min_leaves(&[], max_leaves)? {
        Some(leaves) => MinTreeResult::Exact {
            leaves,
            tree: s.build(&mut Vec::new()),
        },
        None => MinTreeResult::MoreThan { max_leaves },
    })
}

/// Every candidate tree on `p` with exactly `leaves` leaves.
pub fn bounded_trees(p: &Polytope, m: u64, leaves: usize) -> Result<Vec<BBTree>, SearchError> {
    check_limits(p, m)?;
    let mut s = Search::new(p, m);
    Ok(s.trees(&[], leaves)?.into_iter().map(|(t, _)| t).collect())
}

/// Fewest leaves of a tree with `max |pi_i| <= m` whose leaf atoms leave
/// `x` outside the convex hull of their union, searched up to `max_leaves`.
pub fn separation_resistance(
    p: &Polytope,
    x: &[Rational],
    m: u64,
    max_leaves: usize,
) -> Result<SeparationResult, SearchError> {
    check_limits(p, m)?;
    lp::check_dim(p.dim(), x.len())?;
    if !p.contains(x)? {
        return Err(SearchError::PointNotInP);
    }
    let ints = enum_integer_points(p)?;
    if !ints.is_empty() && lp::point_in_hull(x, &ints)?.is_some() {
        return Err(SearchError::PointInHull);
    }
    let mut s = Search::new(p, m);
    for leaves in 1..=max_leaves {
        for (tree, atoms) in s.trees(&[], leaves)? {
            if atoms.iter().any(|rows| rows.iter().all(|r| r.is_satisfied(x))) {
                continue;
            }
            let parts: Vec<(&Polytope, &[LinearConstraint])> = atoms.iter().map(|r| (p, r.as_slice())).collect();
            if matches!(lp::hull_of_parts(x, &parts)?, HullMembership::Outside { .. }) {
                return Ok(SeparationResult::MinLeavesToSeparate { leaves, tree });
            }
        }
    }
    Ok(SeparationResult::MoreThan { max_leaves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_cross_polytope, CrossSpec, Mode};
    use crate::rational::{half, int, ratio};
    use crate::tree::{proves_infeasibility, separates};

    fn cross(n: usize) -> Polytope {
        gen_cross_polytope(CrossSpec {
            n,
            mode: Mode::Explicit,
        })
        .unwrap()
    }

    #[test]
    fn directions() {
        assert_eq!(primitive_directions(1, 3), vec![vec![1]]);
        assert_eq!(primitive_directions(2, 1).len(), 4);
        assert_eq!(primitive_directions(2, 2).len(), 8);
    }

    #[test]
    fn cross_minimum_trees() {
        match min_tree_size(&cross(1), 1, 10).unwrap() {
            MinTreeResult::Exact { leaves, tree } => {
                assert_eq!(leaves, 2);
                assert!(proves_infeasibility(&tree, &cross(1)).unwrap().is_yes());
            }
            other => panic!("{other:?}"),
        }
        for m in 1..=2 {
            match min_tree_size(&cross(2), m, 10).unwrap() {
                MinTreeResult::Exact { leaves, tree } => {
                    assert_eq!(leaves, 4);
                    assert_eq!(tree.leaves(), 4);
                    assert!(proves_infeasibility(&tree, &cross(2)).unwrap().is_yes());
                }
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(
            min_tree_size(&cross(2), 2, 3).unwrap(),
            MinTreeResult::MoreThan { max_leaves: 3 }
        );
        assert_eq!(
            min_tree_size(&Polytope::unit_cube(1), 1, 4),
            Err(SearchError::PNotInfeasible)
        );
    }

    #[test]
    fn separation_small_cases() {
        let p = Polytope::new(2, vec![LinearConstraint::le(vec![int(1), int(1)], ratio(3, 2))], true).unwrap();
        let x = vec![ratio(3, 4), ratio(3, 4)];
        match separation_resistance(&p, &x, 1, 4).unwrap() {
            SeparationResult::MinLeavesToSeparate { leaves, tree } => {
                assert_eq!(leaves, 2);
                assert!(separates(&tree, &p, &x).unwrap().is_yes());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            separation_resistance(&Polytope::unit_cube(1), &[half()], 1, 3),
            Err(SearchError::PointInHull)
        );
    }

    #[test]
    fn center_of_cross_two() {
        let p = cross(2);
        let x = vec![half(); 2];
        match separation_resistance(&p, &x, 2, 3).unwrap() {
            SeparationResult::MinLeavesToSeparate { leaves, tree } => {
                assert_eq!(leaves, 3);
                assert!(separates(&tree, &p, &x).unwrap().is_yes());
            }
            other => panic!("{other:?}"),
        }
        // x_0 <= 0 or x_0 >= 1, then x_1 <= 0 or x_1 >= 1 on the left
        let witness = BBTree::split(
            Disjunction::variable(2, 0, 0),
            BBTree::split(Disjunction::variable(2, 1, 0), BBTree::Leaf, BBTree::Leaf),
            BBTree::Leaf,
        );
        assert!(separates(&witness, &p, &x).unwrap().is_yes());
    }
}
