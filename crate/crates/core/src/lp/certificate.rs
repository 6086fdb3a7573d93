//! Nonnegative combinations of `<=` rows, used both as Farkas certificates of
//! emptiness and as dual certificates of objective bounds.
//!
//! Every term carries its own row so a certificate can be checked with
//! nothing but exact arithmetic; the [`RowSource`] tag records where the row
//! came from so a replaying checker can confirm the row really belongs to the
//! system being certified.

use serde::{Deserialize, Serialize};

use num_traits::{Signed, Zero};

use crate::rational::{self, Rational};

/// Origin of a `<=` row inside an LP system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum RowSource {
    /// Explicit row `i` of the base polytope.
    Row(usize),
    /// Branching constraint `i` accumulated on a tree path.
    Branch(usize),
    /// `-x_j <= 0`.
    Lower(usize),
    /// `x_j <= 1`.
    Upper(usize),
    /// A row produced by the polytope's separation oracle.
    Oracle,
    /// Row `i` of an auxiliary system built by an operation (hull LPs).
    Aux(usize),
}

/// `multiplier * (coeffs . x <= rhs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationTerm {
    pub source: RowSource,
    #[serde(with = "rational::serde_str::vec")]
    pub coeffs: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub multiplier: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowCombination {
    pub dim: usize,
    pub terms: Vec<CombinationTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("term {0} has a negative multiplier")]
    NegativeMultiplier(usize),
    #[error("term {0} has {1} coefficients, expected {2}")]
    Length(usize, usize, usize),
    #[error("combined coefficients do not match the target")]
    Coefficients,
    #[error("combined right-hand side {0} does not certify the claim")]
    RightHandSide(String),
    #[error("term {0} does not belong to the certified system")]
    ForeignRow(usize),
}

impl RowCombination {
    pub fn new(dim: usize) -> Self {
        RowCombination { dim, terms: Vec::new() }
    }

    pub fn push(&mut self, source: RowSource, coeffs: Vec<Rational>, rhs: Rational, multiplier: Rational) {
        if multiplier.is_zero() {
            return;
        }
        self.terms.push(CombinationTerm {
            source,
            coeffs,
            rhs,
            multiplier,
        });
    }

    /// `(sum m_i a_i, sum m_i b_i)`.
    pub fn combined(&self) -> (Vec<Rational>, Rational) {
        let mut a = vec![Rational::zero(); self.dim];
        let mut b = Rational::zero();
        for t in &self.terms {
            for (acc, c) in a.iter_mut().zip(&t.coeffs) {
                if !c.is_zero() {
                    *acc += &t.multiplier * c;
                }
            }
            b += &t.multiplier * &t.rhs;
        }
        (a, b)
    }

    fn check_shape(&self) -> Result<(), CertificateError> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.multiplier.is_negative() {
                return Err(CertificateError::NegativeMultiplier(i));
            }
            if t.coeffs.len() != self.dim {
                return Err(CertificateError::Length(i, t.coeffs.len(), self.dim));
            }
        }
        Ok(())
    }

    /// Checks `m >= 0`, `m^T A = 0` and `m^T b < 0`.
    pub fn verify_farkas(&self) -> Result<(), CertificateError> {
        self.check_shape()?;
        let (a, b) = self.combined();
        if a.iter().any(|v| !v.is_zero()) {
            return Err(CertificateError::Coefficients);
        }
        if !b.is_negative() {
            return Err(CertificateError::RightHandSide(rational::format(&b)));
        }
        Ok(())
    }

    /// Checks `m >= 0`, `m^T A = objective` and `m^T b <= value`, which
    /// proves `objective . x <= value` over the system.
    pub fn verify_upper_bound(&self, objective: &[Rational], value: &Rational) -> Result<(), CertificateError> {
        self.check_shape()?;
        let (a, b) = self.combined();
        if a.as_slice() != objective {
            return Err(CertificateError::Coefficients);
        }
        if &b > value {
            return Err(CertificateError::RightHandSide(rational::format(&b)));
        }
        Ok(())
    }

    /// Confirms every term's row is accepted by `belongs`.
    pub fn verify_sources(&self, mut belongs: impl FnMut(&CombinationTerm) -> bool) -> Result<(), CertificateError> {
        for (i, t) in self.terms.iter().enumerate() {
            if !belongs(t) {
                return Err(CertificateError::ForeignRow(i));
            }
        }
        Ok(())
    }

    /// Rescales so the combined right-hand side is `-1` (Farkas) or keeps it.
    pub(crate) fn normalize_farkas(&mut self) {
        let (_, b) = self.combined();
        if b.is_negative() {
            let s = -b.recip();
            for t in &mut self.terms {
                t.multiplier *= &s;
            }
        }
    }
}
