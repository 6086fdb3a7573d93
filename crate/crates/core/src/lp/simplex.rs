//! Dense two-phase tableau simplex over exact rationals.
//!
//! Entering and leaving variables follow Bland's rule, so the method
//! terminates on every input. Dual multipliers are read off the final basis
//! inverse (the columns that started as the identity), which yields both the
//! Farkas multipliers of an infeasible phase 1 and the optimality
//! multipliers of phase 2 without any extra solve.

use num_traits::{One, Signed, Zero};

use super::Relation;
use crate::rational::Rational;

pub(crate) struct KernelRow<'a> {
    pub coeffs: &'a [Rational],
    pub relation: Relation,
    pub rhs: &'a Rational,
}

/// Multipliers are signed per row: `>= 0` on `<=` rows, `<= 0` on `>=` rows
/// and free on `=` rows, so that `sum_i y_i * (a_i x) <= sum_i y_i * b_i`
/// holds for every feasible `x`. `bound_mult` holds one nonnegative
/// multiplier per variable for the rows `-x_j <= 0` (all zero when the
/// variables are free).
#[derive(Debug)]
pub(crate) enum KernelOutcome {
    /// `sum y_i a_i - mu = c` and `sum y_i b_i = value`.
    Optimal {
        x: Vec<Rational>,
        value: Rational,
        row_mult: Vec<Rational>,
        bound_mult: Vec<Rational>,
    },
    /// `sum y_i a_i - mu = 0` and `sum y_i b_i < 0`.
    Infeasible {
        row_mult: Vec<Rational>,
        bound_mult: Vec<Rational>,
    },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    reduced: Vec<Rational>,
    costs: Vec<Rational>,
    barred: Vec<bool>,
}

impl Tableau {
    fn cols(&self) -> usize {
        self.reduced.len()
    }

    fn set_costs(&mut self, costs: Vec<Rational>) {
        let mut reduced = costs.clone();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    reduced[j] -= cb * v;
                }
            }
        }
        self.reduced = reduced;
        self.costs = costs;
    }

    fn value(&self) -> Rational {
        let mut acc = Rational::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            if !self.costs[b].is_zero() {
                acc += &self.costs[b] * &self.rhs[r];
            }
        }
        acc
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        if !p.is_one() {
            let inv = p.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let support: Vec<usize> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, _)| k)
            .collect();
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            let row = &mut self.rows[i];
            for &k in &support {
                row[k] -= &f * &pivot_row[k];
            }
            if !pivot_rhs.is_zero() {
                self.rhs[i] -= &f * &pivot_rhs;
            }
        }
        if !self.reduced[j].is_zero() {
            let f = self.reduced[j].clone();
            for &k in &support {
                self.reduced[k] -= &f * &pivot_row[k];
            }
        }
        self.basis[r] = j;
    }

    /// Runs primal simplex for maximization. Returns `false` if unbounded.
    fn optimize(&mut self) -> bool {
        loop {
            let entering = (0..self.cols()).find(|&j| !self.barred[j] && self.reduced[j].is_positive());
            let Some(j) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }

    fn basic_values(&self) -> Vec<Rational> {
        let mut vals = vec![Rational::zero(); self.cols()];
        for (r, &b) in self.basis.iter().enumerate() {
            vals[b] = self.rhs[r].clone();
        }
        vals
    }

    /// `c_B^T B^{-1}` using the columns that formed the initial identity.
    fn duals(&self, identity_cols: &[usize]) -> Vec<Rational> {
        identity_cols
            .iter()
            .map(|&col| {
                let mut acc = Rational::zero();
                for (r, &b) in self.basis.iter().enumerate() {
                    let cb = &self.costs[b];
                    let v = &self.rows[r][col];
                    if !cb.is_zero() && !v.is_zero() {
                        acc += cb * v;
                    }
                }
                acc
            })
            .collect()
    }
}

/// Maximizes `objective . x` (or just finds a feasible point when
/// `objective` is `None`) subject to `rows`, with `x >= 0` unless
/// `free_vars` is set.
pub(crate) fn solve(
    n: usize,
    free_vars: bool,
    rows: &[KernelRow<'_>],
    objective: Option<&[Rational]>,
) -> KernelOutcome {
    let m = rows.len();
    let x_cols = if free_vars { 2 * n } else { n };

    // rhs >= 0 after scaling each row by sigma in {+1, -1}
    let sigma: Vec<bool> = rows.iter().map(|r| r.rhs.is_negative()).collect();
    let rel: Vec<Relation> = rows
        .iter()
        .zip(&sigma)
        .map(|(r, &neg)| if neg { r.relation.flipped() } else { r.relation })
        .collect();

    let mut cols = x_cols;
    let mut identity = Vec::with_capacity(m);
    let mut artificial = vec![false; 0];
    let mut aux: Vec<(Option<usize>, Option<usize>)> = Vec::with_capacity(m);
    for r in &rel {
        match r {
            Relation::Le => {
                aux.push((Some(cols), None));
                identity.push(cols);
                cols += 1;
            }
            Relation::Ge => {
                aux.push((Some(cols), Some(cols + 1)));
                identity.push(cols + 1);
                cols += 2;
            }
            Relation::Eq => {
                aux.push((None, Some(cols)));
                identity.push(cols);
                cols += 1;
            }
        }
    }
    artificial.resize(cols, false);
    for &(_, a) in &aux {
        if let Some(a) = a {
            artificial[a] = true;
        }
    }

    let mut t_rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let mut t = vec![Rational::zero(); cols];
        for (j, a) in row.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let v = if sigma[i] { -a } else { a.clone() };
            if free_vars {
                t[n + j] = -v.clone();
            }
            t[j] = v;
        }
        match (rel[i], aux[i]) {
            (Relation::Le, (Some(s), _)) => t[s] = Rational::one(),
            (Relation::Ge, (Some(s), Some(a))) => {
                t[s] = -Rational::one();
                t[a] = Rational::one();
            }
            (Relation::Eq, (_, Some(a))) => t[a] = Rational::one(),
            _ => unreachable!("aux layout matches relation"),
        }
        t_rows.push(t);
        rhs.push(if sigma[i] { -row.rhs } else { row.rhs.clone() });
    }

    let mut tab = Tableau {
        rows: t_rows,
        rhs,
        basis: identity.clone(),
        reduced: vec![Rational::zero(); cols],
        costs: vec![Rational::zero(); cols],
        barred: vec![false; cols],
    };

    let signed = |duals: Vec<Rational>| -> Vec<Rational> {
        duals
            .into_iter()
            .zip(&sigma)
            .map(|(y, &neg)| if neg { -y } else { y })
            .collect()
    };
    let bound_mult_for = |row_mult: &[Rational], target: Option<&[Rational]>| -> Vec<Rational> {
        if free_vars {
            return vec![Rational::zero(); n];
        }
        (0..n)
            .map(|j| {
                let mut acc = Rational::zero();
                for (i, row) in rows.iter().enumerate() {
                    if !row_mult[i].is_zero() && !row.coeffs[j].is_zero() {
                        acc += &row_mult[i] * &row.coeffs[j];
                    }
                }
                if let Some(c) = target {
                    acc -= &c[j];
                }
                acc
            })
            .collect()
    };

    if artificial.iter().any(|&a| a) {
        let phase1: Vec<Rational> = artificial
            .iter()
            .map(|&a| if a { -Rational::one() } else { Rational::zero() })
            .collect();
        tab.set_costs(phase1);
        let bounded = tab.optimize();
        debug_assert!(bounded, "phase 1 is bounded by construction");
        if tab.value().is_negative() {
            let row_mult = signed(tab.duals(&identity));
            let bound_mult = bound_mult_for(&row_mult, None);
            return KernelOutcome::Infeasible { row_mult, bound_mult };
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..m {
            if !artificial[tab.basis[r]] {
                continue;
            }
            if let Some(j) = (0..cols).find(|&j| !artificial[j] && !tab.rows[r][j].is_zero()) {
                tab.pivot(r, j);
            }
        }
        for (j, &a) in artificial.iter().enumerate() {
            tab.barred[j] = a;
        }
    }

    let mut costs = vec![Rational::zero(); cols];
    if let Some(c) = objective {
        for j in 0..n {
            costs[j] = c[j].clone();
            if free_vars {
                costs[n + j] = -c[j].clone();
            }
        }
    }
    tab.set_costs(costs);
    if !tab.optimize() {
        return KernelOutcome::Unbounded;
    }

    let vals = tab.basic_values();
    let x: Vec<Rational> = (0..n)
        .map(|j| {
            if free_vars {
                &vals[j] - &vals[n + j]
            } else {
                vals[j].clone()
            }
        })
        .collect();
    let value = tab.value();
    let row_mult = signed(tab.duals(&identity));
    let zero_obj;
    let target = match objective {
        Some(c) => c,
        None => {
            zero_obj = vec![Rational::zero(); n];
            &zero_obj[..]
        }
    };
    let bound_mult = bound_mult_for(&row_mult, Some(target));
    KernelOutcome::Optimal {
        x,
        value,
        row_mult,
        bound_mult,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn row<'a>(c: &'a [Rational], rel: Relation, b: &'a Rational) -> KernelRow<'a> {
        KernelRow {
            coeffs: c,
            relation: rel,
            rhs: b,
        }
    }

    #[test]
    fn simple_max() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let a1 = [int(1), int(2)];
        let a2 = [int(3), int(1)];
        let (b1, b2) = (int(4), int(6));
        let rows = [row(&a1, Relation::Le, &b1), row(&a2, Relation::Le, &b2)];
        match solve(2, false, &rows, Some(&[int(1), int(1)])) {
            KernelOutcome::Optimal { x, value, row_mult, .. } => {
                assert_eq!(x, vec![ratio(8, 5), ratio(6, 5)]);
                assert_eq!(value, ratio(14, 5));
                assert_eq!(row_mult, vec![ratio(2, 5), ratio(1, 5)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_bounds() {
        let a = [int(1)];
        let (b0, b1) = (int(0), int(1));
        let rows = [row(&a, Relation::Le, &b0), row(&a, Relation::Ge, &b1)];
        match solve(1, false, &rows, None) {
            KernelOutcome::Infeasible { row_mult, bound_mult } => {
                assert!(row_mult[0] > int(0));
                assert!(row_mult[1] < int(0));
                assert_eq!(&row_mult[0] + &row_mult[1], int(0));
                assert_eq!(bound_mult, vec![int(0)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_variables_and_unbounded() {
        // max -x s.t. x >= -3 with x free → x = -3
        let a = [int(1)];
        let b = int(-3);
        let rows = [row(&a, Relation::Ge, &b)];
        match solve(1, true, &rows, Some(&[int(-1)])) {
            KernelOutcome::Optimal { x, value, .. } => {
                assert_eq!(x, vec![int(-3)]);
                assert_eq!(value, int(3));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            solve(1, true, &rows, Some(&[int(1)])),
            KernelOutcome::Unbounded
        ));
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 twice, max x
        let a = [int(1), int(1)];
        let b = int(1);
        let rows = [row(&a, Relation::Eq, &b), row(&a, Relation::Eq, &b)];
        match solve(2, false, &rows, Some(&[int(1), int(0)])) {
            KernelOutcome::Optimal { x, value, .. } => {
                assert_eq!(x, vec![int(1), int(0)]);
                assert_eq!(value, int(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
