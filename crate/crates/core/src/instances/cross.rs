//! The cross-polytope `P_n`: for every `J ⊆ [n]`,
//! `sum_{i∈J} x_i + sum_{i∉J} (1 - x_i) >= 1/2`, stored as
//! `sum_{i∈J} x_i - sum_{i∉J} x_i >= 1/2 - (n - |J|)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{InstanceError, Mode, MAX_EXPLICIT_EXP};
use crate::lp::{LinearConstraint, OracleDescriptor, Polytope, Provenance, SeparationOracle};
use crate::rational::{half, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSpec {
    pub n: usize,
    #[serde(default)]
    pub mode: Mode,
}

/// The row for `J`, where bit `i` of `mask` says `i ∈ J`.
pub fn cross_row(n: usize, mask: u64) -> LinearConstraint {
    let mut coeffs = Vec::with_capacity(n);
    let mut outside = 0i64;
    for i in 0..n {
        if mask >> i & 1 == 1 {
            coeffs.push(Rational::one());
        } else {
            coeffs.push(-Rational::one());
            outside += 1;
        }
    }
    LinearConstraint::ge(coeffs, half() - Rational::from_integer(outside.into()))
}

pub fn gen_cross_polytope(spec: CrossSpec) -> Result<Polytope, InstanceError> {
    let n = spec.n;
    if n == 0 {
        return Err(InstanceError::SpecViolation("n must be at least 1".into()));
    }
    let provenance = Provenance {
        family: "cross".into(),
        params: BTreeMap::from([("n".into(), n.to_string())]),
        seed: None,
        rounding_denominator: None,
    };
    match spec.mode {
        Mode::Explicit => {
            if n > MAX_EXPLICIT_EXP {
                return Err(InstanceError::TooLargeForExplicit(n));
            }
            let rows = (0..1u64 << n).map(|m| cross_row(n, m)).collect();
            Ok(Polytope::new(n, rows, true)?.with_provenance(provenance))
        }
        Mode::Oracle => {
            if n > 120 {
                return Err(InstanceError::TooLarge(n));
            }
            Ok(Polytope::new(n, Vec::new(), true)?
                .with_oracle(Arc::new(CrossOracle { n }))?
                .with_provenance(provenance))
        }
    }
}

/// Separation for `P_n`: the row for `J = {i : x_i < 1/2}` has the smallest
/// left-hand side at `x`.
#[derive(Debug, Clone, Copy)]
pub struct CrossOracle {
    pub n: usize,
}

impl CrossOracle {
    pub fn most_violated_mask(&self, x: &[Rational]) -> u64 {
        let h = half();
        x.iter()
            .enumerate()
            .filter(|(_, v)| **v < h)
            .fold(0u64, |m, (i, _)| m | 1 << i)
    }
}

impl SeparationOracle for CrossOracle {
    fn dim(&self) -> usize {
        self.n
    }

    fn family_size(&self) -> u128 {
        1u128 << self.n
    }

    fn most_violated(&self, x: &[Rational]) -> Option<LinearConstraint> {
        let row = cross_row(self.n, self.most_violated_mask(x));
        (!row.is_satisfied(x)).then_some(row)
    }

    fn is_family_row(&self, row: &LinearConstraint) -> bool {
        if row.dim() != self.n || row.coeffs.iter().any(|c| c.is_zero()) {
            return false;
        }
        let norm = row.normalized();
        // normalized rows are in <= form, so J holds the negative entries
        let mask = norm
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_negative())
            .fold(0u64, |m, (i, _)| m | 1 << i);
        cross_row(self.n, mask).normalized() == norm
    }

    fn descriptor(&self) -> Option<OracleDescriptor> {
        Some(OracleDescriptor {
            family: "cross".into(),
            params: BTreeMap::from([("n".into(), self.n as u64)]),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{lp_feasible, LpStatus};
    use crate::rational::{int, zeros};

    #[test]
    fn one_dimensional() {
        let p = gen_cross_polytope(CrossSpec {
            n: 1,
            mode: Mode::Explicit,
        })
        .unwrap();
        assert_eq!(
            p.rows(),
            &[
                LinearConstraint::ge(vec![int(-1)], half() - int(1)),
                LinearConstraint::ge(vec![int(1)], half()),
            ]
        );
        let out = lp_feasible(&p).unwrap();
        assert_eq!(out.point.unwrap(), vec![half()]);
    }

    #[test]
    fn oracle_behaviour() {
        let o = CrossOracle { n: 4 };
        let row = o.most_violated(&zeros(4)).unwrap();
        assert_eq!(row, cross_row(4, 0b1111));
        assert!(o.most_violated(&vec![half(); 4]).is_none());
        assert!(o.is_family_row(&row));
        assert!(!o.is_family_row(&LinearConstraint::ge(vec![int(1); 4], int(0))));
        let p = gen_cross_polytope(CrossSpec {
            n: 3,
            mode: Mode::Oracle,
        })
        .unwrap();
        let out = lp_feasible(&p).unwrap();
        assert_eq!(out.status, LpStatus::Feasible);
        assert!(p.contains(&out.point.unwrap()).unwrap());
    }
}
