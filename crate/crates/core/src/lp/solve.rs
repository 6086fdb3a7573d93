//! Row-generation driver around the simplex kernel.

use num_traits::{One, Signed, Zero};

use super::simplex::{self, KernelOutcome, KernelRow};
use super::{
    check_dim, LinearConstraint, LpError, LpOutcome, LpStatus, Polytope, Relation, RowCombination, RowSource, Sense,
};
use crate::rational::{self, Rational};

/// Explicit systems with at most this many candidate rows are solved in one
/// shot; larger ones start from a working subset.
const EAGER_ROWS: usize = 48;

/// Solves `base ∩ {extra}` with an optional objective. Certificates are
/// verified before they are returned; a certificate that fails to verify is
/// reported as an internal error.
pub(crate) fn solve_system(
    base: &Polytope,
    extra: &[LinearConstraint],
    objective: Option<(&[Rational], Sense)>,
) -> Result<LpOutcome, LpError> {
    let n = base.dim();
    for r in extra {
        check_dim(n, r.dim())?;
    }
    let candidates: Vec<(&LinearConstraint, RowSource)> = base
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| (r, RowSource::Row(i)))
        .chain(extra.iter().enumerate().map(|(i, r)| (r, RowSource::Branch(i))))
        .collect();
    let lazy = base.is_boxed() && candidates.len() > EAGER_ROWS;
    let mut active: Vec<bool> = candidates
        .iter()
        .map(|(r, src)| !lazy || r.relation == Relation::Eq || matches!(src, RowSource::Branch(_)))
        .collect();
    let mut oracle_rows: Vec<LinearConstraint> = Vec::new();

    let obj_vec: Option<Vec<Rational>> = objective.map(|(c, sense)| match sense {
        Sense::Max => c.to_vec(),
        Sense::Min => c.iter().map(|v| -v).collect(),
    });

    let family = base.oracle().map_or(0, |o| o.family_size());
    let cap = 2u128.saturating_mul(candidates.len() as u128 + family).max(16);
    let per_round = n.max(4);
    let mut rounds: u128 = 0;

    loop {
        rounds += 1;
        if rounds > cap {
            return Err(LpError::Internal(format!("row generation exceeded {cap} rounds")));
        }

        let upper: Vec<Vec<Rational>> = if base.is_boxed() {
            (0..n).map(|j| rational::unit(n, j)).collect()
        } else {
            Vec::new()
        };
        let one = Rational::one();
        let mut rows: Vec<KernelRow<'_>> = Vec::new();
        let mut sources: Vec<RowSource> = Vec::new();
        for ((r, src), on) in candidates.iter().zip(&active) {
            if *on {
                rows.push(KernelRow {
                    coeffs: &r.coeffs,
                    relation: r.relation,
                    rhs: &r.rhs,
                });
                sources.push(src.clone());
            }
        }
        for r in &oracle_rows {
            rows.push(KernelRow {
                coeffs: &r.coeffs,
                relation: r.relation,
                rhs: &r.rhs,
            });
            sources.push(RowSource::Oracle);
        }
        for (j, u) in upper.iter().enumerate() {
            rows.push(KernelRow {
                coeffs: u,
                relation: Relation::Le,
                rhs: &one,
            });
            sources.push(RowSource::Upper(j));
        }

        let outcome = simplex::solve(n, !base.is_boxed(), &rows, obj_vec.as_deref());
        match outcome {
            KernelOutcome::Infeasible { row_mult, bound_mult } => {
                let mut cert = combination(n, &rows, &sources, &row_mult, &bound_mult)?;
                cert.normalize_farkas();
                cert.verify_farkas()
                    .map_err(|e| LpError::Internal(format!("Farkas certificate rejected: {e}")))?;
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    point: None,
                    value: None,
                    farkas: Some(cert),
                    bound: None,
                });
            }
            KernelOutcome::Unbounded => {
                if base.is_boxed() {
                    return Err(LpError::Internal("unbounded LP over a boxed polytope".into()));
                }
                if lazy || base.oracle().is_some() {
                    return Err(LpError::Internal("unbounded relaxation during row generation".into()));
                }
                return Ok(LpOutcome {
                    status: LpStatus::Unbounded,
                    point: None,
                    value: None,
                    farkas: None,
                    bound: None,
                });
            }
            KernelOutcome::Optimal {
                x,
                value,
                row_mult,
                bound_mult,
            } => {
                let mut added = false;
                let mut pending = None;
                if lazy {
                    let mut violated: Vec<(Rational, usize)> = candidates
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !active[*i])
                        .filter_map(|(i, (r, _))| {
                            let v = r.violation(&x);
                            v.is_positive().then_some((v, i))
                        })
                        .collect();
                    violated.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                    for (_, i) in violated.into_iter().take(per_round) {
                        active[i] = true;
                        added = true;
                    }
                }
                if let Some(o) = base.oracle() {
                    if let Some(row) = o.most_violated(&x) {
                        if oracle_rows.contains(&row) {
                            return Err(LpError::Internal(
                                "oracle returned a row that is already enforced".into(),
                            ));
                        }
                        pending = Some(row);
                        added = true;
                    }
                }
                if added {
                    drop(rows);
                    oracle_rows.extend(pending);
                    continue;
                }
                if let Some((r, _)) = candidates.iter().find(|(r, _)| !r.is_satisfied(&x)) {
                    return Err(LpError::Internal(format!("solution violates row {r}")));
                }
                return Ok(match (&obj_vec, objective) {
                    (Some(c), Some((_, sense))) => {
                        let cert = combination(n, &rows, &sources, &row_mult, &bound_mult)?;
                        cert.verify_upper_bound(c, &value)
                            .map_err(|e| LpError::Internal(format!("dual certificate rejected: {e}")))?;
                        let value = match sense {
                            Sense::Max => value,
                            Sense::Min => -value,
                        };
                        LpOutcome {
                            status: LpStatus::Optimal,
                            point: Some(x),
                            value: Some(value),
                            farkas: None,
                            bound: Some(cert),
                        }
                    }
                    _ => LpOutcome {
                        status: LpStatus::Feasible,
                        point: Some(x),
                        value: None,
                        farkas: None,
                        bound: None,
                    },
                });
            }
        }
    }
}

/// Turns signed kernel multipliers into a nonnegative combination of `<=`
/// rows tagged with their sources.
fn combination(
    n: usize,
    rows: &[KernelRow<'_>],
    sources: &[RowSource],
    row_mult: &[Rational],
    bound_mult: &[Rational],
) -> Result<RowCombination, LpError> {
    let mut cert = RowCombination::new(n);
    for ((row, src), y) in rows.iter().zip(sources).zip(row_mult) {
        if y.is_zero() {
            continue;
        }
        let sign_ok = match row.relation {
            Relation::Le => y.is_positive(),
            Relation::Ge => y.is_negative(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(LpError::Internal("multiplier with the wrong sign".into()));
        }
        if y.is_positive() {
            cert.push(src.clone(), row.coeffs.to_vec(), row.rhs.clone(), y.clone());
        } else {
            cert.push(src.clone(), row.coeffs.iter().map(|c| -c).collect(), -row.rhs, -y);
        }
    }
    for (j, mu) in bound_mult.iter().enumerate() {
        if mu.is_positive() {
            let mut a = rational::zeros(n);
            a[j] = -Rational::one();
            cert.push(RowSource::Lower(j), a, Rational::zero(), mu.clone());
        }
    }
    Ok(cert)
}
