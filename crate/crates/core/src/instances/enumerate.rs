//! Exhaustive enumeration of the 0/1 points of a boxed polytope.
//!
//! Points are visited in Gray-code order so each step flips one coordinate
//! and every row's left-hand side is updated by one coefficient. Rows are
//! scaled to integers first; rows whose scaled data do not fit in `i128`
//! fall back to exact rational evaluation.

use num_traits::{One, ToPrimitive, Zero};

use super::InstanceError;
use crate::lp::{LinearConstraint, Polytope, Relation};
use crate::rational::{self, Rational};

pub const MAX_ENUM_DIM: usize = 24;

struct ScaledRow {
    coeffs: Vec<i128>,
    rhs: i128,
    relation: Relation,
}

fn scale(row: &LinearConstraint) -> Option<ScaledRow> {
    let den = rational::common_denominator(row.coeffs.iter().chain(std::iter::once(&row.rhs)));
    let f = Rational::from_integer(den);
    let conv = |v: &Rational| -> Option<i128> { (v * &f).to_integer().to_i128() };
    let coeffs: Option<Vec<i128>> = row.coeffs.iter().map(conv).collect();
    let coeffs = coeffs?;
    let bound: i128 = coeffs
        .iter()
        .map(|c| c.abs())
        .try_fold(0i128, |a, c| a.checked_add(c))?;
    bound.checked_mul(2)?;
    Some(ScaledRow {
        coeffs,
        rhs: conv(&row.rhs)?,
        relation: row.relation,
    })
}

fn visit(p: &Polytope, mut keep: impl FnMut(&[Rational]) -> bool) -> Result<(), InstanceError> {
    if !p.is_boxed() {
        return Err(InstanceError::SpecViolation(
            "0/1 enumeration needs the box flag".into(),
        ));
    }
    let n = p.dim();
    if n > MAX_ENUM_DIM {
        return Err(InstanceError::TooLarge(n));
    }
    let mut fast: Vec<ScaledRow> = Vec::new();
    let mut slow: Vec<&LinearConstraint> = Vec::new();
    for r in p.rows() {
        match scale(r) {
            Some(s) => fast.push(s),
            None => slow.push(r),
        }
    }
    let mut sums = vec![0i128; fast.len()];
    let mut bits = vec![false; n];
    let mut point = rational::zeros(n);
    let total: u64 = 1 << n;
    for step in 0..total {
        if step > 0 {
            let j = step.trailing_zeros() as usize;
            bits[j] = !bits[j];
            point[j] = if bits[j] { Rational::one() } else { Rational::zero() };
            for (s, r) in sums.iter_mut().zip(&fast) {
                if bits[j] {
                    *s += r.coeffs[j];
                } else {
                    *s -= r.coeffs[j];
                }
            }
        }
        let ok = sums.iter().zip(&fast).all(|(s, r)| match r.relation {
            Relation::Le => *s <= r.rhs,
            Relation::Ge => *s >= r.rhs,
            Relation::Eq => *s == r.rhs,
        }) && slow.iter().all(|r| r.is_satisfied(&point))
            && p.oracle().is_none_or(|o| o.most_violated(&point).is_none());
        if ok && !keep(&point) {
            break;
        }
    }
    Ok(())
}

/// All 0/1 points of `p`, sorted lexicographically.
pub fn enum_integer_points(p: &Polytope) -> Result<Vec<Vec<Rational>>, InstanceError> {
    let mut out = Vec::new();
    visit(p, |x| {
        out.push(x.to_vec());
        true
    })?;
    out.sort();
    Ok(out)
}

/// Some 0/1 point of `p`, if any.
pub fn first_integer_point(p: &Polytope) -> Result<Option<Vec<Rational>>, InstanceError> {
    let mut found = None;
    visit(p, |x| {
        found = Some(x.to_vec());
        false
    })?;
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_cross_polytope, gen_packing_family, CrossSpec, Mode, PackingSpec};
    use crate::rational::int;

    #[test]
    fn small_cases() {
        let sq = Polytope::unit_cube(2);
        assert_eq!(enum_integer_points(&sq).unwrap().len(), 4);
        let p = gen_packing_family(PackingSpec {
            n: 4,
            k: 2,
            with_cover: false,
            mode: Mode::Explicit,
        })
        .unwrap();
        let pts = enum_integer_points(&p).unwrap();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], vec![int(0); 4]);
        for n in 1..=6 {
            let c = gen_cross_polytope(CrossSpec {
                n,
                mode: Mode::Explicit,
            })
            .unwrap();
            assert!(enum_integer_points(&c).unwrap().is_empty());
            let o = gen_cross_polytope(CrossSpec { n, mode: Mode::Oracle }).unwrap();
            assert!(first_integer_point(&o).unwrap().is_none());
        }
    }
}
