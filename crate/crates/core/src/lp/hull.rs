//! Convex hulls of unions of polytopes and of finite point sets.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::simplex::{self, KernelOutcome, KernelRow};
use super::{check_dim, LinearConstraint, LpError, Polytope, Relation, RowCombination, RowSource};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HullMembership {
    /// `x = sum_v weights[v] * witnesses[v]` with each witness in its atom.
    /// Atoms with zero weight have no witness.
    Inside {
        #[serde(with = "rational::serde_str::vec")]
        weights: Vec<Rational>,
        witnesses: Vec<Option<WitnessPoint>>,
    },
    /// The homogenized hull system is infeasible. `certificate` is `None`
    /// only when the atom list was empty.
    Outside { certificate: Option<RowCombination> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WitnessPoint(#[serde(with = "rational::serde_str::vec")] pub Vec<Rational>);

impl HullMembership {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullMembership::Inside { .. })
    }
}

/// `pi . x > pi0` while `pi . p <= pi0` for every hull point; `max |pi_i| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separator {
    #[serde(with = "rational::serde_str::vec")]
    pub pi: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub pi0: Rational,
}

/// One atom of a hull query: a polytope with extra rows.
pub(crate) type HullPart<'a> = (&'a Polytope, &'a [LinearConstraint]);

/// Decides `x ∈ conv(⋃ atoms)` with one LP in homogenized variables.
pub fn in_convex_hull_of_union(x: &[Rational], atoms: &[Polytope]) -> Result<HullMembership, LpError> {
    let parts: Vec<HullPart<'_>> = atoms.iter().map(|a| (a, &[][..])).collect();
    hull_of_parts(x, &parts)
}

/// The rows of the homogenized system that do not come from an oracle.
/// Variables are laid out atom by atom as `(z_v, lambda_v)`.
fn eager_rows(x: &[Rational], parts: &[HullPart<'_>]) -> Vec<LinearConstraint> {
    let n = x.len();
    let width = parts.len() * (n + 1);
    let mut rows = Vec::new();
    for (v, (base, extra)) in parts.iter().enumerate() {
        let off = v * (n + 1);
        for r in base.rows().iter().chain(extra.iter()) {
            let mut a = rational::zeros(width);
            a[off..off + n].clone_from_slice(&r.coeffs);
            a[off + n] = -&r.rhs;
            rows.push(LinearConstraint::new(a, r.relation, Rational::zero()));
        }
        for j in 0..n {
            let mut a = rational::zeros(width);
            a[off + j] = Rational::one();
            a[off + n] = -Rational::one();
            rows.push(LinearConstraint::le(a, Rational::zero()));
        }
    }
    let mut lam = rational::zeros(width);
    for v in 0..parts.len() {
        lam[v * (n + 1) + n] = Rational::one();
    }
    rows.push(LinearConstraint::eq(lam, Rational::one()));
    for (i, xi) in x.iter().enumerate() {
        let mut a = rational::zeros(width);
        for v in 0..parts.len() {
            a[v * (n + 1) + i] = Rational::one();
        }
        rows.push(LinearConstraint::eq(a, xi.clone()));
    }
    rows
}

fn homogenize(row: &LinearConstraint, v: usize, n: usize, width: usize) -> LinearConstraint {
    let off = v * (n + 1);
    let mut a = rational::zeros(width);
    a[off..off + n].clone_from_slice(&row.coeffs);
    a[off + n] = -&row.rhs;
    LinearConstraint::new(a, row.relation, Rational::zero())
}

pub(crate) fn hull_of_parts(x: &[Rational], parts: &[HullPart<'_>]) -> Result<HullMembership, LpError> {
    let n = x.len();
    for (base, extra) in parts {
        check_dim(base.dim(), n)?;
        if !base.is_boxed() {
            return Err(LpError::RequiresBox);
        }
        for r in extra.iter() {
            check_dim(n, r.dim())?;
        }
    }
    if parts.is_empty() {
        return Ok(HullMembership::Outside { certificate: None });
    }
    let width = parts.len() * (n + 1);
    let eager = eager_rows(x, parts);
    let mut oracle_rows: Vec<LinearConstraint> = Vec::new();
    let family: u128 = parts
        .iter()
        .map(|(b, _)| b.oracle().map_or(0, |o| o.family_size()))
        .fold(0u128, |a, b| a.saturating_add(b));
    let cap = 2u128.saturating_mul(family).max(16);
    let mut rounds = 0u128;

    loop {
        rounds += 1;
        if rounds > cap {
            return Err(LpError::Internal("hull row generation did not terminate".into()));
        }
        let all: Vec<&LinearConstraint> = eager.iter().chain(oracle_rows.iter()).collect();
        let rows: Vec<KernelRow<'_>> = all
            .iter()
            .map(|r| KernelRow {
                coeffs: &r.coeffs,
                relation: r.relation,
                rhs: &r.rhs,
            })
            .collect();
        match simplex::solve(width, false, &rows, None) {
            KernelOutcome::Unbounded => return Err(LpError::Internal("feasibility LP reported unbounded".into())),
            KernelOutcome::Infeasible { row_mult, bound_mult } => {
                let mut cert = RowCombination::new(width);
                for (i, (r, y)) in all.iter().zip(&row_mult).enumerate() {
                    let src = if i < eager.len() {
                        RowSource::Aux(i)
                    } else {
                        RowSource::Oracle
                    };
                    if y.is_positive() {
                        cert.push(src, r.coeffs.clone(), r.rhs.clone(), y.clone());
                    } else if y.is_negative() {
                        cert.push(src, r.coeffs.iter().map(|c| -c).collect(), -&r.rhs, -y);
                    }
                }
                for (j, mu) in bound_mult.iter().enumerate() {
                    if mu.is_positive() {
                        let mut a = rational::zeros(width);
                        a[j] = -Rational::one();
                        cert.push(RowSource::Lower(j), a, Rational::zero(), mu.clone());
                    }
                }
                cert.normalize_farkas();
                verify_hull_certificate(x, parts.iter().map(|p| p.0).zip(parts.iter().map(|p| p.1)), &cert)
                    .map_err(|e| LpError::Internal(format!("hull certificate rejected: {e}")))?;
                return Ok(HullMembership::Outside {
                    certificate: Some(cert),
                });
            }
            KernelOutcome::Optimal { x: sol, .. } => {
                let mut added = false;
                let mut weights = Vec::with_capacity(parts.len());
                let mut witnesses = Vec::with_capacity(parts.len());
                for (v, (base, _)) in parts.iter().enumerate() {
                    let off = v * (n + 1);
                    let lam = sol[off + n].clone();
                    if lam.is_zero() {
                        weights.push(lam);
                        witnesses.push(None);
                        continue;
                    }
                    let w: Vec<Rational> = sol[off..off + n].iter().map(|z| z / &lam).collect();
                    if let Some(o) = base.oracle() {
                        if let Some(row) = o.most_violated(&w) {
                            oracle_rows.push(homogenize(&row, v, n, width));
                            added = true;
                        }
                    }
                    weights.push(lam);
                    witnesses.push(Some(w));
                }
                if added {
                    continue;
                }
                for ((base, extra), w) in parts.iter().zip(&witnesses) {
                    if let Some(w) = w {
                        if !base.contains(w)? || !extra.iter().all(|r| r.is_satisfied(w)) {
                            return Err(LpError::Internal("hull witness outside its atom".into()));
                        }
                    }
                }
                return Ok(HullMembership::Inside {
                    weights,
                    witnesses: witnesses.into_iter().map(|w| w.map(WitnessPoint)).collect(),
                });
            }
        }
    }
}

/// Re-checks an `Outside` certificate: the combination is a Farkas
/// certificate and every term is a row of the homogenized hull system
/// built from `x` and `atoms` (oracle rows are checked against the owning
/// atom's oracle).
pub fn verify_hull_certificate<'a>(
    x: &[Rational],
    atoms: impl IntoIterator<Item = (&'a Polytope, &'a [LinearConstraint])>,
    cert: &RowCombination,
) -> Result<(), super::CertificateError> {
    let parts: Vec<HullPart<'a>> = atoms.into_iter().collect();
    let n = x.len();
    let width = parts.len() * (n + 1);
    if cert.dim != width {
        return Err(super::CertificateError::Length(0, cert.dim, width));
    }
    cert.verify_farkas()?;
    let eager = eager_rows(x, &parts);
    cert.verify_sources(|t| match &t.source {
        RowSource::Aux(i) => eager.get(*i).is_some_and(|r| r.has_le_form(&t.coeffs, &t.rhs)),
        RowSource::Lower(j) => {
            *j < width
                && t.rhs.is_zero()
                && t.coeffs
                    .iter()
                    .enumerate()
                    .all(|(i, c)| if i == *j { *c == -Rational::one() } else { c.is_zero() })
        }
        RowSource::Oracle => {
            if !t.rhs.is_zero() {
                return false;
            }
            let blocks: Vec<usize> = (0..parts.len())
                .filter(|v| t.coeffs[v * (n + 1)..(v + 1) * (n + 1)].iter().any(|c| !c.is_zero()))
                .collect();
            let [v] = blocks[..] else {
                return false;
            };
            let off = v * (n + 1);
            let row = LinearConstraint::le(t.coeffs[off..off + n].to_vec(), -&t.coeffs[off + n]);
            parts[v].0.oracle().is_some_and(|o| o.is_family_row(&row))
        }
        _ => false,
    })
}

/// Convex weights expressing `x` through `points`, if they exist.
pub fn point_in_hull(x: &[Rational], points: &[Vec<Rational>]) -> Result<Option<Vec<Rational>>, LpError> {
    if points.is_empty() {
        return Err(LpError::EmptyList);
    }
    for p in points {
        check_dim(x.len(), p.len())?;
    }
    let k = points.len();
    let one = Rational::one();
    let ones = vec![Rational::one(); k];
    let cols: Vec<Vec<Rational>> = (0..x.len())
        .map(|i| points.iter().map(|p| p[i].clone()).collect())
        .collect();
    let mut rows = vec![KernelRow {
        coeffs: &ones,
        relation: Relation::Eq,
        rhs: &one,
    }];
    for (i, c) in cols.iter().enumerate() {
        rows.push(KernelRow {
            coeffs: c,
            relation: Relation::Eq,
            rhs: &x[i],
        });
    }
    match simplex::solve(k, false, &rows, None) {
        KernelOutcome::Optimal { x: w, .. } => Ok(Some(w)),
        KernelOutcome::Infeasible { .. } => Ok(None),
        KernelOutcome::Unbounded => Err(LpError::Internal("feasibility LP reported unbounded".into())),
    }
}

/// A hyperplane strictly separating `x` from `conv(points)`, found by
/// maximizing `pi . x - pi0` over `-1 <= pi_i <= 1`, `pi . p <= pi0`.
pub fn separating_hyperplane(x: &[Rational], points: &[Vec<Rational>]) -> Result<Separator, LpError> {
    if points.is_empty() {
        return Err(LpError::EmptyList);
    }
    let n = x.len();
    for p in points {
        check_dim(n, p.len())?;
    }
    let mut owned: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for p in points {
        let mut a = p.clone();
        a.push(-Rational::one());
        owned.push((a, Relation::Le, Rational::zero()));
    }
    for i in 0..n {
        let mut a = rational::zeros(n + 1);
        a[i] = Rational::one();
        owned.push((a.clone(), Relation::Le, Rational::one()));
        owned.push((a, Relation::Ge, -Rational::one()));
    }
    let rows: Vec<KernelRow<'_>> = owned
        .iter()
        .map(|(a, rel, b)| KernelRow {
            coeffs: a,
            relation: *rel,
            rhs: b,
        })
        .collect();
    let mut obj = x.to_vec();
    obj.push(-Rational::one());
    match simplex::solve(n + 1, true, &rows, Some(&obj)) {
        KernelOutcome::Optimal { x: sol, value, .. } if value.is_positive() => {
            let mut pi = sol[..n].to_vec();
            let scale = pi.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero);
            if scale.is_zero() {
                return Err(LpError::Internal("separator with zero normal".into()));
            }
            for v in pi.iter_mut() {
                *v /= &scale;
            }
            let pi0 = points
                .iter()
                .map(|p| rational::dot(&pi, p))
                .max()
                .expect("nonempty point list");
            if rational::dot(&pi, x) <= pi0 {
                return Err(LpError::Internal("separator does not separate".into()));
            }
            Ok(Separator { pi, pi0 })
        }
        KernelOutcome::Optimal { .. } => {
            let weights = point_in_hull(x, points)?
                .ok_or_else(|| LpError::Internal("no separator and no hull weights".into()))?;
            Err(LpError::NotSeparable { weights })
        }
        _ => Err(LpError::Internal("separation LP not solved to optimality".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn fixed(v: i64) -> Polytope {
        Polytope::new(1, vec![LinearConstraint::eq(vec![int(1)], int(v))], true).unwrap()
    }

    #[test]
    fn midpoint_of_two_points() {
        let h = in_convex_hull_of_union(&[ratio(1, 2)], &[fixed(0), fixed(1)]).unwrap();
        match h {
            HullMembership::Inside { weights, .. } => assert_eq!(weights, vec![ratio(1, 2), ratio(1, 2)]),
            other => panic!("{other:?}"),
        }
        let out = in_convex_hull_of_union(&[ratio(1, 2)], &[fixed(0)]).unwrap();
        assert!(!out.is_inside());
        assert_eq!(
            in_convex_hull_of_union(&[ratio(1, 2)], &[]).unwrap(),
            HullMembership::Outside { certificate: None }
        );
    }

    #[test]
    fn separators() {
        let tri = vec![vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(1)]];
        let s = separating_hyperplane(&[ratio(3, 5), ratio(3, 5)], &tri).unwrap();
        assert_eq!(
            s,
            Separator {
                pi: vec![int(1), int(1)],
                pi0: int(1)
            }
        );
        let s = separating_hyperplane(&[int(2)], &[vec![int(0)], vec![int(1)]]).unwrap();
        assert_eq!(
            s,
            Separator {
                pi: vec![int(1)],
                pi0: int(1)
            }
        );
        let e = separating_hyperplane(
            &[ratio(1, 2), ratio(1, 2)],
            &[vec![int(1), int(0)], vec![int(0), int(1)]],
        );
        assert_eq!(
            e,
            Err(LpError::NotSeparable {
                weights: vec![ratio(1, 2), ratio(1, 2)]
            })
        );
    }
}
