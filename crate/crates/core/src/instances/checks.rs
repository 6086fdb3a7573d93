//! Checkers for the combinatorial facts behind the lower bounds: facet
//! rank, criticality of constraint sets, high-dimensional faces inside a
//! half-space, shattered coordinate sets, the entropy counting bound and
//! half-integral point sets.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{enum_integer_points, first_integer_point, InstanceError};
use crate::lp::{self, affine_rank, LinearConstraint, LpStatus, Polytope, Relation, Sense};
use crate::rational::{self, half, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FacetResult {
    Facet(usize),
    NotFacet(usize),
}

fn check_nk(n: usize, k: usize) -> Result<(), InstanceError> {
    if k < 2 || 2 * k > n {
        return Err(InstanceError::SpecViolation(format!(
            "need 2 <= k <= n/2, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// Affine rank of `{χ(T) : |T| = k - 1}`; a facet when it equals `n`.
pub fn facet_check_cardinality(n: usize, k: usize) -> Result<FacetResult, InstanceError> {
    facet_check_on(n, k, &(0..n).collect::<Vec<_>>())
}

/// As [`facet_check_cardinality`] with `T` restricted to `ground`.
pub fn facet_check_on(n: usize, k: usize, ground: &[usize]) -> Result<FacetResult, InstanceError> {
    check_nk(n, k)?;
    if let Some(&bad) = ground.iter().find(|&&i| i >= n) {
        return Err(InstanceError::SpecViolation(format!("coordinate {bad} out of range")));
    }
    let points: Vec<Vec<Rational>> = ground
        .iter()
        .copied()
        .combinations(k - 1)
        .map(|t| {
            let mut v = rational::zeros(n);
            for i in t {
                v[i] = Rational::one();
            }
            v
        })
        .collect();
    if points.is_empty() {
        return Ok(FacetResult::NotFacet(0));
    }
    let r = affine_rank(&points)?;
    Ok(if r == n {
        FacetResult::Facet(r)
    } else {
        FacetResult::NotFacet(r)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CriticalityResult {
    /// Removing any listed row admits the given 0/1 point; every tree
    /// proving infeasibility then needs at least `bound` nodes.
    Verified {
        #[serde(with = "rational::serde_str")]
        bound: Rational,
        witnesses: Vec<Witness>,
    },
    Violated {
        row: usize,
        reason: String,
    },
}

/// A 0/1 point satisfying every row except `row`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub row: usize,
    #[serde(with = "rational::serde_str::vec")]
    pub point: Vec<Rational>,
}

/// Checks that every row in `d` is critical for the integer infeasibility
/// of `p` and returns the node bound `2|D|/n - 1`.
pub fn criticality_bound(p: &Polytope, d: &[usize]) -> Result<CriticalityResult, InstanceError> {
    if lp::lp_feasible(p)?.status == LpStatus::Infeasible {
        return Err(InstanceError::PIsEmpty);
    }
    if first_integer_point(p)?.is_some() {
        return Err(InstanceError::PIsFeasible);
    }
    let mut witnesses = Vec::with_capacity(d.len());
    for &row in d {
        if row >= p.rows().len() {
            return Ok(CriticalityResult::Violated {
                row,
                reason: "no such row".into(),
            });
        }
        match first_integer_point(&p.without_row(row))? {
            Some(point) => witnesses.push(Witness { row, point }),
            None => {
                return Ok(CriticalityResult::Violated {
                    row,
                    reason: "still integer-infeasible without this row".into(),
                })
            }
        }
    }
    let bound = Rational::new(BigInt::from(2 * d.len()), BigInt::from(p.dim())) - Rational::one();
    Ok(CriticalityResult::Verified { bound, witnesses })
}

/// `G = P ∩ {c . x >= delta + eps0}` with `eps0 = max_P c . x - delta`,
/// given that `c . x <= delta` is valid for the 0/1 points but not for `P`.
pub fn gen_restricted_polytope(
    p: &Polytope,
    c: &[Rational],
    delta: &Rational,
) -> Result<(Polytope, Rational), InstanceError> {
    for x in enum_integer_points(p)? {
        if &rational::dot(c, &x) > delta {
            return Err(InstanceError::InequalityInvalidForHull);
        }
    }
    let out = lp::lp_optimize(p, c, Sense::Max)?;
    let max = out.value.ok_or(InstanceError::PIsEmpty)?;
    let eps0 = max - delta;
    if !eps0.is_positive() {
        return Err(InstanceError::InequalityValidForP);
    }
    let g = p.with_rows([LinearConstraint::ge(c.to_vec(), delta + &eps0)])?;
    Ok((g, eps0))
}

/// A face of `[0,1]^n` given by fixing coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub n: usize,
    /// `(coordinate, value)` pairs, sorted by coordinate.
    pub fixed: Vec<(usize, bool)>,
    /// Minimum of `pi . x` over the face.
    #[serde(with = "rational::serde_str")]
    pub min_value: Rational,
}

impl FaceSpec {
    pub fn dim(&self) -> usize {
        self.n - self.fixed.len()
    }

    pub fn rows(&self) -> Vec<LinearConstraint> {
        self.fixed
            .iter()
            .map(|&(i, v)| LinearConstraint::eq(rational::unit(self.n, i), rational::int(v as i64)))
            .collect()
    }
}

/// For `pi . (1/2) 1 > pi0`, a face of dimension at least `floor(n/2)` on
/// which `pi . x > pi0` everywhere: flip the negative coordinates, fix the
/// `ceil(n/2)` largest to 1, flip back. The result is confirmed by an LP.
pub fn find_high_dim_face(pi: &[Rational], pi0: &Rational, n: usize) -> Result<FaceSpec, InstanceError> {
    if pi.len() != n {
        return Err(InstanceError::SpecViolation(format!(
            "pi has length {}, expected {n}",
            pi.len()
        )));
    }
    let center = rational::dot(pi, &vec![half(); n]);
    if center <= *pi0 {
        return Err(InstanceError::PreconditionViolated(
            "pi . (1/2) 1 must exceed pi0".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pi[b].abs().cmp(&pi[a].abs()).then(a.cmp(&b)));
    let mut fixed: Vec<(usize, bool)> = order[..n.div_ceil(2)]
        .iter()
        .map(|&i| (i, !pi[i].is_negative()))
        .collect();
    fixed.sort_unstable();
    let mut face = FaceSpec {
        n,
        fixed,
        min_value: Rational::zero(),
    };
    let poly = Polytope::new(n, face.rows(), true)?;
    let out = lp::lp_optimize(&poly, pi, Sense::Min)?;
    let min = out
        .value
        .ok_or_else(|| InstanceError::PreconditionViolated("face is empty".into()))?;
    if min <= *pi0 {
        return Err(InstanceError::PreconditionViolated(
            "constructed face leaves the half-space".into(),
        ));
    }
    face.min_value = min;
    Ok(face)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShatterResult {
    /// `F` projected onto `j` is all of `{0,1}^k`; `point ∈ conv(F)` is 1/2
    /// on `j`.
    Found {
        j: Vec<usize>,
        #[serde(with = "rational::serde_str::vec")]
        point: Vec<Rational>,
    },
    NotFound,
}

/// Brute-force search for a coordinate set of size `k` shattered by `f`.
pub fn find_shattered_set(f: &[Vec<Rational>], k: usize) -> Result<ShatterResult, InstanceError> {
    let Some(first) = f.first() else {
        return Ok(ShatterResult::NotFound);
    };
    let n = first.len();
    if k > n || k > 63 {
        return Err(InstanceError::SpecViolation(format!("k = {k} exceeds n = {n}")));
    }
    for p in f {
        if p.len() != n || !p.iter().all(|v| v.is_zero() || v.is_one()) {
            return Err(InstanceError::SpecViolation(
                "F must contain 0/1 points of one dimension".into(),
            ));
        }
    }
    let patterns = 1usize << k;
    for j in (0..n).combinations(k) {
        let mut reps: Vec<Option<&Vec<Rational>>> = vec![None; patterns];
        let mut seen = 0;
        for p in f {
            let key = j
                .iter()
                .enumerate()
                .fold(0usize, |m, (b, &i)| if p[i].is_one() { m | 1 << b } else { m });
            if reps[key].is_none() {
                reps[key] = Some(p);
                seen += 1;
                if seen == patterns {
                    break;
                }
            }
        }
        if seen == patterns {
            let w = Rational::new(BigInt::one(), BigInt::from(patterns));
            let mut point = rational::zeros(n);
            for r in reps.into_iter().flatten() {
                for (acc, v) in point.iter_mut().zip(r) {
                    *acc += v * &w;
                }
            }
            return Ok(ShatterResult::Found { j, point });
        }
    }
    Ok(ShatterResult::NotFound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EntropyCheck {
    /// `2^{n h(s/n)} > rhs = sum_{i < s} C(n, i)`; `lhs_log2` is `n h(s/n)`
    /// for display only.
    Holds {
        lhs_log2: f64,
        rhs: String,
    },
    Fails {
        lhs_log2: f64,
        rhs: String,
    },
}

fn binom(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Compares `2^{n h(s/n)}` with `sum_{i <= s-1} C(n, i)`.
///
/// `2^{n h(s/n)} = n^n / (s^s (n-s)^{n-s})`, so the comparison is done on
/// integers: `n^n > S s^s (n-s)^{n-s}`. No rounding is involved.
pub fn entropy_bound_check(n: u64, s: u64) -> Result<EntropyCheck, InstanceError> {
    if s < 1 || 2 * s > n {
        return Err(InstanceError::SpecViolation(format!(
            "need 1 <= s <= n/2, got n = {n}, s = {s}"
        )));
    }
    let sum: BigInt = (0..s).map(|i| binom(n, i)).sum();
    let pow = |b: u64, e: u64| -> BigInt { Pow::pow(BigInt::from(b), e as u32) };
    let lhs = pow(n, n);
    let rhs = &sum * pow(s, s) * pow(n - s, n - s);
    let (nf, sf) = (n as f64, s as f64);
    let p = sf / nf;
    let lhs_log2 = nf * (-(p * p.log2()) - (1.0 - p) * (1.0 - p).log2());
    let rhs_str = sum.to_string();
    Ok(if lhs > rhs {
        EntropyCheck::Holds { lhs_log2, rhs: rhs_str }
    } else {
        EntropyCheck::Fails { lhs_log2, rhs: rhs_str }
    })
}

/// `|Half_s| = sum_{j >= s} C(n, j) 2^{n-j}`.
pub fn half_points_count(n: usize, s: usize) -> BigInt {
    (s..=n)
        .map(|j| binom(n as u64, j as u64) * (BigInt::one() << (n - j)))
        .sum()
}

/// Points of `{0, 1/2, 1}^n` with at least `s` halves: all of them in
/// lexicographic order when there are at most `budget`, otherwise `budget`
/// seeded uniform samples.
pub fn gen_half_points(n: usize, s: usize, budget: usize, seed: u64) -> Vec<Vec<Rational>> {
    if s > n {
        return Vec::new();
    }
    let values = [Rational::zero(), half(), Rational::one()];
    let total = half_points_count(n, s);
    if total <= BigInt::from(budget) {
        let mut out = Vec::new();
        let mut digits = vec![0usize; n];
        loop {
            if digits.iter().filter(|&&d| d == 1).count() >= s {
                out.push(digits.iter().map(|&d| values[d].clone()).collect());
            }
            // odometer, last coordinate fastest
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < 3 {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
    let weights: Vec<f64> = (0..=n)
        .map(|j| {
            if j < s {
                0.0
            } else {
                (binom(n as u64, j as u64) * (BigInt::one() << (n - j)))
                    .to_f64()
                    .unwrap_or(f64::MAX)
            }
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..budget)
        .map(|_| {
            let mut t = rng.random::<f64>() * wsum;
            let mut j = s;
            for (idx, w) in weights.iter().enumerate() {
                if *w > 0.0 {
                    j = idx;
                    if t < *w {
                        break;
                    }
                    t -= w;
                }
            }
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..j {
                let pick = rng.random_range(i..n);
                idx.swap(i, pick);
            }
            let mut x = vec![Rational::zero(); n];
            for (pos, &i) in idx.iter().enumerate() {
                x[i] = if pos < j {
                    half()
                } else if rng.random::<bool>() {
                    Rational::one()
                } else {
                    Rational::zero()
                };
            }
            x
        })
        .collect()
}

/// A row of `q` violated by some point of `Half_s`, with the point.
///
/// For a row `a . x >= b` the minimum over `Half_s` is attained by setting
/// the `s` coordinates with the smallest `|a_i|` to 1/2 and every other
/// coordinate to whichever of 0/1 minimizes `a_i x_i`; more halves never
/// help. This decides containment of all of `Half_s` exactly.
pub fn half_points_violation(q: &Polytope, s: usize) -> Result<Option<(usize, Vec<Rational>)>, InstanceError> {
    if q.oracle().is_some() {
        return Err(InstanceError::SpecViolation("explicit rows required".into()));
    }
    let n = q.dim();
    if s > n {
        return Ok(None);
    }
    for (idx, row) in q.rows().iter().enumerate() {
        let forms: Vec<(Vec<Rational>, Rational)> = match row.relation {
            Relation::Ge => vec![(row.coeffs.clone(), row.rhs.clone())],
            Relation::Le | Relation::Eq => row
                .le_forms()
                .into_iter()
                .map(|(a, b)| (a.iter().map(|v| -v).collect(), -b))
                .collect(),
        };
        for (a, b) in forms {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a[i].abs().cmp(&a[j].abs()).then(i.cmp(&j)));
            let mut x = vec![Rational::zero(); n];
            for (pos, &i) in order.iter().enumerate() {
                x[i] = if pos < s {
                    half()
                } else if a[i].is_negative() {
                    Rational::one()
                } else {
                    Rational::zero()
                };
            }
            if rational::dot(&a, &x) < b {
                return Ok(Some((idx, x)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_packing_family, Mode, PackingSpec};
    use crate::rational::{int, ratio};

    #[test]
    fn facets() {
        assert_eq!(facet_check_cardinality(4, 2).unwrap(), FacetResult::Facet(4));
        assert_eq!(facet_check_cardinality(6, 3).unwrap(), FacetResult::Facet(6));
        assert_eq!(facet_check_on(4, 2, &[0, 1]).unwrap(), FacetResult::NotFacet(2));
    }

    #[test]
    fn criticality_of_q42() {
        let q = gen_packing_family(PackingSpec {
            n: 4,
            k: 2,
            with_cover: true,
            mode: Mode::Explicit,
        })
        .unwrap();
        let all: Vec<usize> = (0..7).collect();
        match criticality_bound(&q, &all).unwrap() {
            CriticalityResult::Verified { bound, witnesses } => {
                assert_eq!(bound, ratio(5, 2));
                assert_eq!(witnesses[6].point, vec![int(0); 4]);
                assert_eq!(witnesses[0].point, vec![int(1), int(1), int(0), int(0)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn restricted_polytope() {
        let p = gen_packing_family(PackingSpec {
            n: 4,
            k: 2,
            with_cover: false,
            mode: Mode::Explicit,
        })
        .unwrap();
        let (g, eps) = gen_restricted_polytope(&p, &vec![int(1); 4], &int(1)).unwrap();
        assert_eq!(eps, int(1));
        let q = gen_packing_family(PackingSpec {
            n: 4,
            k: 2,
            with_cover: true,
            mode: Mode::Explicit,
        })
        .unwrap();
        assert_eq!(g.normalized_rows(), q.normalized_rows());
        assert_eq!(
            gen_restricted_polytope(&Polytope::unit_cube(1), &[int(1)], &int(1)).unwrap_err(),
            InstanceError::InequalityValidForP
        );
    }

    #[test]
    fn faces() {
        let f = find_high_dim_face(&vec![int(1); 4], &int(1), 4).unwrap();
        assert_eq!(f.fixed, vec![(0, true), (1, true)]);
        assert_eq!(f.min_value, int(2));
        let g = find_high_dim_face(&[int(1), int(-1)], &int(-1), 2).unwrap();
        assert_eq!(g.fixed, vec![(0, true)]);
        assert_eq!(g.min_value, int(0));
        assert!(find_high_dim_face(&vec![int(1); 3], &int(3), 3).is_err());
    }

    #[test]
    fn shattering() {
        let cube: Vec<Vec<Rational>> = (0..8u32)
            .map(|m| (0..3).map(|i| int((m >> (2 - i) & 1) as i64)).collect())
            .collect();
        match find_shattered_set(&cube, 2).unwrap() {
            ShatterResult::Found { j, point } => {
                assert_eq!(j, vec![0, 1]);
                assert_eq!(point[0], half());
                assert_eq!(point[1], half());
            }
            other => panic!("{other:?}"),
        }
        let f = vec![vec![int(0), int(0), int(0)], vec![int(1), int(1), int(0)]];
        assert!(matches!(find_shattered_set(&f, 1).unwrap(), ShatterResult::Found { ref j, .. } if j == &vec![0]));
        assert_eq!(
            find_shattered_set(&[vec![int(0), int(0)]], 1).unwrap(),
            ShatterResult::NotFound
        );
    }

    #[test]
    fn entropy() {
        match entropy_bound_check(10, 4).unwrap() {
            EntropyCheck::Holds { lhs_log2, rhs } => {
                assert_eq!(rhs, "176");
                assert!((lhs_log2 - 9.7095).abs() < 1e-3);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(entropy_bound_check(2, 1).unwrap(), EntropyCheck::Holds { .. }));
        assert!(entropy_bound_check(4, 4).is_err());
    }

    #[test]
    fn half_points() {
        assert_eq!(gen_half_points(5, 2, 1000, 0).len(), 131);
        assert_eq!(half_points_count(5, 2), BigInt::from(131));
        assert_eq!(gen_half_points(1, 1, 10, 0), vec![vec![half()]]);
        assert_eq!(
            gen_half_points(1, 0, 10, 0),
            vec![vec![int(0)], vec![half()], vec![int(1)]]
        );
        let sample = gen_half_points(12, 5, 50, 3);
        assert_eq!(sample.len(), 50);
        assert!(sample.iter().all(|x| x.iter().filter(|v| **v == half()).count() >= 5));
    }
}
