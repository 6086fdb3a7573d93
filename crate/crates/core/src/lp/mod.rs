//! Exact linear programming over rational polytopes.
//!
//! The kernel is a two-phase simplex with Bland's rule (see [`simplex`]).
//! On top of it sit the polytope-level operations: feasibility,
//! optimization, membership in the convex hull of a union of polytopes,
//! separating hyperplanes and affine rank. Every answer carries a
//! certificate that can be re-checked with exact arithmetic alone.
//!
//! Large or implicit row families are handled by row generation: the LP is
//! solved over a working subset of rows, the answer is checked against the
//! remaining rows (or the separation oracle) and violated rows are added
//! until none remain.

pub mod certificate;
mod hull;
mod linalg;
mod simplex;
mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

pub use certificate::{CertificateError, CombinationTerm, RowCombination, RowSource};
pub(crate) use hull::hull_of_parts;
pub use hull::{
    in_convex_hull_of_union, point_in_hull, separating_hyperplane, verify_hull_certificate, HullMembership, Separator,
};
pub use linalg::{affine_rank, enumerate_vertices, rank};
pub(crate) use solve::solve_system;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// `coeffs . x  (<= | >= | =)  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearConstraint {
    #[serde(with = "rational::serde_str::vec")]
    pub coeffs: Vec<Rational>,
    #[serde(rename = "rel")]
    pub relation: Relation,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        LinearConstraint { coeffs, relation, rhs }
    }

    pub fn le(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Le, rhs)
    }

    pub fn ge(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Ge, rhs)
    }

    pub fn eq(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Self::new(coeffs, Relation::Eq, rhs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        rational::dot(&self.coeffs, x)
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let l = self.lhs(x);
        match self.relation {
            Relation::Le => l <= self.rhs,
            Relation::Ge => l >= self.rhs,
            Relation::Eq => l == self.rhs,
        }
    }

    /// Positive exactly when `x` violates the row.
    pub fn violation(&self, x: &[Rational]) -> Rational {
        let l = self.lhs(x);
        match self.relation {
            Relation::Le => l - &self.rhs,
            Relation::Ge => &self.rhs - l,
            Relation::Eq => (l - &self.rhs).abs(),
        }
    }

    /// The row as one or two `a . x <= b` inequalities.
    pub fn le_forms(&self) -> Vec<(Vec<Rational>, Rational)> {
        let neg = || -> (Vec<Rational>, Rational) { (self.coeffs.iter().map(|c| -c).collect(), -&self.rhs) };
        match self.relation {
            Relation::Le => vec![(self.coeffs.clone(), self.rhs.clone())],
            Relation::Ge => vec![neg()],
            Relation::Eq => vec![(self.coeffs.clone(), self.rhs.clone()), neg()],
        }
    }

    /// Whether `a . x <= b` is one of this row's `<=` forms.
    pub fn has_le_form(&self, a: &[Rational], b: &Rational) -> bool {
        let direct = self.coeffs.as_slice() == a && &self.rhs == b;
        let negated = self.coeffs.iter().zip(a).all(|(c, v)| &-c == v) && &-&self.rhs == b;
        match self.relation {
            Relation::Le => direct,
            Relation::Ge => negated,
            Relation::Eq => direct || negated,
        }
    }

    /// Canonical representative of the row's half-space (or hyperplane):
    /// `>=` rows are negated into `<=` form and the row is scaled so its
    /// coefficients are coprime integers. Equalities get a positive leading
    /// coefficient.
    pub fn normalized(&self) -> LinearConstraint {
        let (mut coeffs, mut rhs, relation) = match self.relation {
            Relation::Ge => (
                self.coeffs.iter().map(|c| -c).collect::<Vec<_>>(),
                -&self.rhs,
                Relation::Le,
            ),
            r => (self.coeffs.clone(), self.rhs.clone(), r),
        };
        let den = rational::common_denominator(&coeffs);
        let scaled: Vec<num_bigint::BigInt> = coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(den.clone())).to_integer())
            .collect();
        let g = scaled
            .iter()
            .fold(num_bigint::BigInt::zero(), |acc, v| num_integer::Integer::gcd(&acc, v));
        if !g.is_zero() {
            let mut factor = Rational::new(den, g);
            if relation == Relation::Eq {
                if let Some(first) = coeffs.iter().find(|c| !c.is_zero()) {
                    if first.is_negative() {
                        factor = -factor;
                    }
                }
            }
            for c in coeffs.iter_mut() {
                *c *= &factor;
            }
            rhs *= &factor;
        }
        LinearConstraint { coeffs, relation, rhs }
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "{}*x{}", rational::format(&mag), i + 1)?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " {} {}", self.relation.symbol(), rational::format(&self.rhs))
    }
}

/// Identifies an oracle family so it can be rebuilt from a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleDescriptor {
    pub family: String,
    pub params: BTreeMap<String, u64>,
}

/// Lazy access to an exponentially large family of valid rows.
pub trait SeparationOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    /// Number of rows in the family (saturating).
    fn family_size(&self) -> u128;
    /// A row of the family violated by `x`, preferring the most violated.
    fn most_violated(&self, x: &[Rational]) -> Option<LinearConstraint>;
    /// Whether `row` (in any scaling) belongs to the family.
    fn is_family_row(&self, row: &LinearConstraint) -> bool;
    fn descriptor(&self) -> Option<OracleDescriptor>;
}

/// Where a generated polytope came from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounding_denominator: Option<String>,
}

/// `{x : rows}`, optionally intersected with `[0,1]^dim` and with the rows
/// of a separation oracle.
#[derive(Clone)]
pub struct Polytope {
    dim: usize,
    rows: Vec<LinearConstraint>,
    boxed: bool,
    oracle: Option<Arc<dyn SeparationOracle>>,
    provenance: Option<Provenance>,
}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polytope")
            .field("dim", &self.dim)
            .field("rows", &self.rows.len())
            .field("box", &self.boxed)
            .field("oracle", &self.oracle)
            .finish()
    }
}

impl Polytope {
    pub fn new(dim: usize, rows: Vec<LinearConstraint>, boxed: bool) -> Result<Self, LpError> {
        for r in &rows {
            check_dim(dim, r.dim())?;
        }
        Ok(Polytope {
            dim,
            rows,
            boxed,
            oracle: None,
            provenance: None,
        })
    }

    /// `[0,1]^dim`.
    pub fn unit_cube(dim: usize) -> Self {
        Polytope {
            dim,
            rows: Vec::new(),
            boxed: true,
            oracle: None,
            provenance: None,
        }
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn SeparationOracle>) -> Result<Self, LpError> {
        check_dim(self.dim, oracle.dim())?;
        self.oracle = Some(oracle);
        Ok(self)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[LinearConstraint] {
        &self.rows
    }

    pub fn is_boxed(&self) -> bool {
        self.boxed
    }

    pub fn oracle(&self) -> Option<&Arc<dyn SeparationOracle>> {
        self.oracle.as_ref()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// The same polytope with additional rows (a subset of `self`).
    pub fn with_rows(&self, extra: impl IntoIterator<Item = LinearConstraint>) -> Result<Self, LpError> {
        let mut p = self.clone();
        for r in extra {
            check_dim(self.dim, r.dim())?;
            p.rows.push(r);
        }
        p.provenance = None;
        Ok(p)
    }

    /// The same polytope with explicit row `index` removed.
    pub fn without_row(&self, index: usize) -> Self {
        let mut p = self.clone();
        p.rows.remove(index);
        p.provenance = None;
        p
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[Rational]) -> Result<bool, LpError> {
        check_dim(self.dim, x.len())?;
        if self.boxed && x.iter().any(|v| v.is_negative() || v > &Rational::one()) {
            return Ok(false);
        }
        if !self.rows.iter().all(|r| r.is_satisfied(x)) {
            return Ok(false);
        }
        Ok(match &self.oracle {
            Some(o) => o.most_violated(x).is_none(),
            None => true,
        })
    }

    /// Explicit rows in canonical form, sorted. Two polytopes with equal
    /// results describe the same set through the same rows.
    pub fn normalized_rows(&self) -> Vec<LinearConstraint> {
        let mut v: Vec<LinearConstraint> = self.rows.iter().map(LinearConstraint::normalized).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Whether `a . x <= b` is a valid row of this description: an explicit
    /// row, a box row, or an oracle row.
    pub fn has_le_row(&self, source: &RowSource, a: &[Rational], b: &Rational) -> bool {
        match source {
            RowSource::Row(i) => self.rows.get(*i).is_some_and(|r| r.has_le_form(a, b)),
            RowSource::Lower(j) => self.boxed && *j < self.dim && b.is_zero() && is_signed_unit(a, *j, false),
            RowSource::Upper(j) => self.boxed && *j < self.dim && b.is_one() && is_signed_unit(a, *j, true),
            RowSource::Oracle => self
                .oracle
                .as_ref()
                .is_some_and(|o| o.is_family_row(&LinearConstraint::le(a.to_vec(), b.clone()))),
            RowSource::Branch(_) | RowSource::Aux(_) => false,
        }
    }
}

fn is_signed_unit(a: &[Rational], j: usize, positive: bool) -> bool {
    a.iter().enumerate().all(|(i, v)| {
        if i == j {
            if positive {
                v.is_one()
            } else {
                *v == -Rational::one()
            }
        } else {
            v.is_zero()
        }
    })
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<(), LpError> {
    if expected == found {
        Ok(())
    } else {
        Err(LpError::DimensionMismatch { expected, found })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Optimal,
    Unbounded,
}

/// Result of an LP solve.
///
/// `bound`, present on `Optimal`, is a nonnegative combination of rows whose
/// combined row is `c . x <= value` for `Max` and `-c . x <= -value` for
/// `Min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    #[serde(with = "rational::serde_str::opt_vec", default)]
    pub point: Option<Vec<Rational>>,
    #[serde(with = "rational::serde_str::opt", default)]
    pub value: Option<Rational>,
    #[serde(default)]
    pub farkas: Option<RowCombination>,
    #[serde(default)]
    pub bound: Option<RowCombination>,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(
            self.status,
            LpStatus::Feasible | LpStatus::Optimal | LpStatus::Unbounded
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("internal LP error: {0}")]
    Internal(String),
    #[error("empty atom list")]
    EmptyAtomList,
    #[error("empty point list")]
    EmptyList,
    #[error("point lies in the convex hull")]
    NotSeparable { weights: Vec<Rational> },
    #[error("operation requires a polytope inside [0,1]^n")]
    RequiresBox,
}

/// Decides whether `p` is empty.
pub fn lp_feasible(p: &Polytope) -> Result<LpOutcome, LpError> {
    solve_system(p, &[], None)
}

/// Optimizes `c . x` over `p`.
pub fn lp_optimize(p: &Polytope, c: &[Rational], sense: Sense) -> Result<LpOutcome, LpError> {
    check_dim(p.dim(), c.len())?;
    solve_system(p, &[], Some((c, sense)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn cross1() -> Polytope {
        // x >= 1/2 and 1 - x >= 1/2
        Polytope::new(
            1,
            vec![
                LinearConstraint::ge(vec![int(1)], ratio(1, 2)),
                LinearConstraint::ge(vec![int(-1)], ratio(-1, 2)),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn contradictory_bounds_farkas() {
        let p = Polytope::new(
            1,
            vec![
                LinearConstraint::le(vec![int(1)], int(0)),
                LinearConstraint::ge(vec![int(1)], int(1)),
            ],
            true,
        )
        .unwrap();
        let out = lp_feasible(&p).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        let f = out.farkas.unwrap();
        f.verify_farkas().unwrap();
        let mut terms: Vec<_> = f
            .terms
            .iter()
            .map(|t| (t.source.clone(), t.coeffs.clone(), t.rhs.clone(), t.multiplier.clone()))
            .collect();
        terms.sort_by(|a, b| format!("{:?}", a.0).cmp(&format!("{:?}", b.0)));
        assert_eq!(
            terms,
            vec![
                (RowSource::Row(0), vec![int(1)], int(0), int(1)),
                (RowSource::Row(1), vec![int(-1)], int(-1), int(1)),
            ]
        );
    }

    #[test]
    fn cross_one_is_the_midpoint() {
        let out = lp_feasible(&cross1()).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
        assert_eq!(out.point.unwrap(), vec![ratio(1, 2)]);
        let opt = lp_optimize(&cross1(), &[int(1)], Sense::Max).unwrap();
        assert_eq!(opt.value.unwrap(), ratio(1, 2));
        opt.bound.unwrap().verify_upper_bound(&[int(1)], &ratio(1, 2)).unwrap();
    }

    #[test]
    fn unit_square_max() {
        let p = Polytope::unit_cube(2);
        let out = lp_optimize(&p, &[int(1), int(1)], Sense::Max).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.value.unwrap(), int(2));
        assert_eq!(out.point.unwrap(), vec![int(1), int(1)]);
        let min = lp_optimize(&p, &[int(1), int(-1)], Sense::Min).unwrap();
        assert_eq!(min.value.clone().unwrap(), int(-1));
        min.bound
            .unwrap()
            .verify_upper_bound(&[int(-1), int(1)], &int(1))
            .unwrap();
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let bad = Polytope::new(2, vec![LinearConstraint::le(vec![int(1)], int(0))], true);
        assert_eq!(bad.unwrap_err(), LpError::DimensionMismatch { expected: 2, found: 1 });
        assert!(lp_optimize(&Polytope::unit_cube(2), &[int(1)], Sense::Max).is_err());
    }

    #[test]
    fn normalization() {
        let r = LinearConstraint::ge(vec![ratio(1, 2), ratio(1, 2)], ratio(1, 2));
        assert_eq!(r.normalized(), LinearConstraint::le(vec![int(-1), int(-1)], int(-1)));
        let e = LinearConstraint::eq(vec![int(-2), int(4)], int(6));
        assert_eq!(e.normalized(), LinearConstraint::eq(vec![int(1), int(-2)], int(-3)));
    }

    #[test]
    fn unbounded_without_box() {
        let p = Polytope::new(1, vec![LinearConstraint::ge(vec![int(1)], int(0))], false).unwrap();
        let out = lp_optimize(&p, &[int(1)], Sense::Max).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }
}
