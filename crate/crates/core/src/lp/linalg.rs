//! Exact Gaussian elimination and brute-force vertex enumeration.

use itertools::Itertools;
use num_traits::{One, Zero};

use super::{check_dim, LinearConstraint, LpError, Polytope};
use crate::rational::{self, Rational};

/// Row rank of a rational matrix.
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        let pivot: Vec<Rational> = rows[r].iter().map(|v| v * &inv).collect();
        for row in rows.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot).skip(c) {
                *v -= &f * pv;
            }
        }
        rows[r] = pivot;
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Number of affinely independent points among `points` (affine hull
/// dimension plus one).
pub fn affine_rank(points: &[Vec<Rational>]) -> Result<usize, LpError> {
    let first = points.first().ok_or(LpError::EmptyList)?;
    for p in points {
        check_dim(first.len(), p.len())?;
    }
    let diffs: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    Ok(rank(diffs) + 1)
}

/// Unique solution of a square system, if the matrix is nonsingular.
pub(crate) fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        let inv = a[c][c].recip();
        for v in a[c].iter_mut() {
            *v *= &inv;
        }
        b[c] *= &inv;
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            let (pr, pb) = (a[c].clone(), b[c].clone());
            for (v, pv) in a[i].iter_mut().zip(&pr) {
                *v -= &f * pv;
            }
            b[i] -= &f * &pb;
        }
    }
    Some(b)
}

/// All vertices of `p ∩ {extra}` by trying every choice of `dim` tight
/// rows. Exponential; meant as an independent check at tiny dimension.
/// Oracle rows are only used to filter candidates, so oracle-backed
/// polytopes should be given explicitly.
pub fn enumerate_vertices(p: &Polytope, extra: &[LinearConstraint]) -> Result<Vec<Vec<Rational>>, LpError> {
    let n = p.dim();
    let mut forms: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for r in p.rows().iter().chain(extra) {
        check_dim(n, r.dim())?;
        forms.extend(r.le_forms());
    }
    if p.is_boxed() {
        for j in 0..n {
            forms.push((rational::unit(n, j), Rational::one()));
            let mut a = rational::zeros(n);
            a[j] = -Rational::one();
            forms.push((a, Rational::zero()));
        }
    }
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for choice in (0..forms.len()).combinations(n) {
        let a: Vec<Vec<Rational>> = choice.iter().map(|&i| forms[i].0.clone()).collect();
        let b: Vec<Rational> = choice.iter().map(|&i| forms[i].1.clone()).collect();
        let Some(x) = solve_square(a, b) else {
            continue;
        };
        if p.contains(&x)? && extra.iter().all(|r| r.is_satisfied(&x)) {
            out.push(x);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn ranks() {
        let e = |i| rational::unit(4, i);
        assert_eq!(affine_rank(&[e(0), e(1), e(2), e(3)]).unwrap(), 4);
        assert_eq!(affine_rank(&[vec![int(3)]]).unwrap(), 1);
        let col = vec![vec![int(0), int(0)], vec![int(1), int(0)], vec![int(2), int(0)]];
        assert_eq!(affine_rank(&col).unwrap(), 2);
        assert_eq!(affine_rank(&[]), Err(LpError::EmptyList));
    }

    #[test]
    fn triangle_vertices() {
        let p = Polytope::new(2, vec![LinearConstraint::le(vec![int(1), int(1)], ratio(3, 2))], true).unwrap();
        let v = enumerate_vertices(&p, &[]).unwrap();
        assert_eq!(
            v,
            vec![
                vec![int(0), int(0)],
                vec![int(0), int(1)],
                vec![ratio(1, 2), int(1)],
                vec![int(1), int(0)],
                vec![int(1), ratio(1, 2)],
            ]
        );
    }
}
