//! Packing polytope `P_PA(n, k)`: `sum_{i∈S} x_i <= k - 1` for every
//! `|S| = k`, optionally with the cover row `1 . x >= k`, and the set-cover
//! polytope `sum_{i∈S} y_i >= 1` for every `|S| = k`.

use std::collections::BTreeMap;
use std::sync::Arc;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{InstanceError, Mode};
use crate::lp::{LinearConstraint, OracleDescriptor, Polytope, Provenance, SeparationOracle};
use crate::rational::{self, Rational};

/// Largest number of packing rows written out explicitly.
const MAX_EXPLICIT_ROWS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingSpec {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub with_cover: bool,
    #[serde(default)]
    pub mode: Mode,
}

fn check_nk(n: usize, k: usize) -> Result<(), InstanceError> {
    if k < 2 || 2 * k > n {
        return Err(InstanceError::SpecViolation(format!(
            "need 2 <= k <= n/2, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

fn indicator(n: usize, s: &[usize]) -> Vec<Rational> {
    let mut v = rational::zeros(n);
    for &i in s {
        v[i] = Rational::one();
    }
    v
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub(crate) fn packing_row(n: usize, k: usize, s: &[usize]) -> LinearConstraint {
    LinearConstraint::le(indicator(n, s), rational::int(k as i64 - 1))
}

fn cover_row(n: usize, k: usize) -> LinearConstraint {
    LinearConstraint::ge(vec![Rational::one(); n], rational::int(k as i64))
}

fn provenance(family: &str, n: usize, k: usize) -> Provenance {
    Provenance {
        family: family.into(),
        params: BTreeMap::from([("n".into(), n.to_string()), ("k".into(), k.to_string())]),
        seed: None,
        rounding_denominator: None,
    }
}

/// Rows in lexicographic order of `S`, then the cover row if requested.
pub fn gen_packing_family(spec: PackingSpec) -> Result<Polytope, InstanceError> {
    let PackingSpec { n, k, with_cover, mode } = spec;
    check_nk(n, k)?;
    let family = if with_cover { "packing-cover" } else { "packing" };
    let mut rows: Vec<LinearConstraint> = Vec::new();
    let p = match mode {
        Mode::Explicit => {
            if binomial(n, k) > MAX_EXPLICIT_ROWS as u128 {
                return Err(InstanceError::TooLargeForExplicit(n));
            }
            rows.extend((0..n).combinations(k).map(|s| packing_row(n, k, &s)));
            if with_cover {
                rows.push(cover_row(n, k));
            }
            Polytope::new(n, rows, true)?
        }
        Mode::Oracle => {
            if with_cover {
                rows.push(cover_row(n, k));
            }
            Polytope::new(n, rows, true)?.with_oracle(Arc::new(PackingOracle { n, k }))?
        }
    };
    Ok(p.with_provenance(provenance(family, n, k)))
}

/// `sum_{i∈S} y_i >= 1` for every `|S| = k`, in lexicographic order of `S`.
pub fn gen_set_cover(n: usize, k: usize) -> Result<Polytope, InstanceError> {
    check_nk(n, k)?;
    if binomial(n, k) > MAX_EXPLICIT_ROWS as u128 {
        return Err(InstanceError::TooLargeForExplicit(n));
    }
    let rows = (0..n)
        .combinations(k)
        .map(|s| LinearConstraint::ge(indicator(n, &s), Rational::one()))
        .collect();
    Ok(Polytope::new(n, rows, true)?.with_provenance(provenance("set-cover", n, k)))
}

/// Separation for the packing rows: the `k` largest coordinates (ties to
/// the lower index) give the largest left-hand side.
#[derive(Debug, Clone, Copy)]
pub struct PackingOracle {
    pub n: usize,
    pub k: usize,
}

impl SeparationOracle for PackingOracle {
    fn dim(&self) -> usize {
        self.n
    }

    fn family_size(&self) -> u128 {
        binomial(self.n, self.k)
    }

    fn most_violated(&self, x: &[Rational]) -> Option<LinearConstraint> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| x[b].cmp(&x[a]).then(a.cmp(&b)));
        let mut s = idx[..self.k].to_vec();
        s.sort_unstable();
        let row = packing_row(self.n, self.k, &s);
        (!row.is_satisfied(x)).then_some(row)
    }

    fn is_family_row(&self, row: &LinearConstraint) -> bool {
        if row.dim() != self.n {
            return false;
        }
        let norm = row.normalized();
        let support: Vec<usize> = (0..self.n).filter(|&i| !norm.coeffs[i].is_zero()).collect();
        support.len() == self.k && packing_row(self.n, self.k, &support).normalized() == norm
    }

    fn descriptor(&self) -> Option<OracleDescriptor> {
        Some(OracleDescriptor {
            family: "packing".into(),
            params: BTreeMap::from([("n".into(), self.n as u64), ("k".into(), self.k as u64)]),
        })
    }
}
