//! Subtour relaxation of the symmetric TSP on `n` cities.
//!
//! Variables are the edges `{i, j}`, `i < j`, in lexicographic order.
//! Rows: `x(δ(v)) = 2` for every city, and `x(δ(W)) >= 2` for every `W`
//! containing city 0 with `2 <= |W| <= n - 2` (complements and singletons
//! are implied).

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::lp::{LinearConstraint, Polytope, Provenance};
use crate::rational::{self, Rational};

pub const MAX_TSP_CITIES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TspSpec {
    pub n: usize,
}

pub fn edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Column of edge `{i, j}`.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

fn cut_row(n: usize, inside: u64) -> Vec<Rational> {
    edges(n)
        .into_iter()
        .map(|(i, j)| {
            if (inside >> i & 1) != (inside >> j & 1) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

pub fn gen_tsp_subtour(spec: TspSpec) -> Result<Polytope, InstanceError> {
    let n = spec.n;
    if n < 3 {
        return Err(InstanceError::SpecViolation("need at least 3 cities".into()));
    }
    if n > MAX_TSP_CITIES {
        return Err(InstanceError::TooLarge(n));
    }
    let two = rational::int(2);
    let mut rows: Vec<LinearConstraint> = (0..n)
        .map(|v| LinearConstraint::eq(cut_row(n, 1 << v), two.clone()))
        .collect();
    // W = {0} ∪ rest, rest ranging over subsets of the other cities
    for rest in 1u64..(1 << (n - 1)) {
        let size = rest.count_ones() as usize + 1;
        if size < 2 || size > n - 2 {
            continue;
        }
        let w = 1 | rest << 1;
        rows.push(LinearConstraint::ge(cut_row(n, w), two.clone()));
    }
    let provenance = Provenance {
        family: "tsp".into(),
        params: BTreeMap::from([("n".into(), n.to_string())]),
        seed: None,
        rounding_denominator: None,
    };
    Ok(Polytope::new(n * (n - 1) / 2, rows, true)?.with_provenance(provenance))
}

/// Whether `x` is the incidence vector of a single cycle through all
/// cities. Checks degrees and connectivity directly on the edge set.
pub fn is_hamiltonian_cycle(n: usize, x: &[Rational]) -> bool {
    if x.len() != n * (n - 1) / 2 || !x.iter().all(|v| v.is_zero() || v.is_one()) {
        return false;
    }
    let mut adj = vec![Vec::new(); n];
    for (e, (i, j)) in edges(n).into_iter().enumerate() {
        if x[e].is_one() {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    if adj.iter().any(|a| a.len() != 2) {
        return false;
    }
    let (mut prev, mut cur, mut steps) = (0usize, adj[0][0], 1usize);
    while cur != 0 {
        let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        prev = cur;
        cur = next;
        steps += 1;
        if steps > n {
            return false;
        }
    }
    steps == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn tour(n: usize, order: &[usize]) -> Vec<Rational> {
        let mut x = rational::zeros(n * (n - 1) / 2);
        for k in 0..order.len() {
            x[edge_index(n, order[k], order[(k + 1) % order.len()])] = int(1);
        }
        x
    }

    #[test]
    fn four_cities() {
        let p = gen_tsp_subtour(TspSpec { n: 4 }).unwrap();
        assert_eq!(p.dim(), 6);
        assert_eq!(p.rows().len(), 4 + 3);
        assert_eq!(edge_index(4, 2, 3), 5);
        assert_eq!(edge_index(4, 1, 0), 0);
    }

    #[test]
    fn tours_and_subtours() {
        let p5 = gen_tsp_subtour(TspSpec { n: 5 }).unwrap();
        let t = tour(5, &[0, 2, 4, 1, 3]);
        assert!(p5.contains(&t).unwrap());
        assert!(is_hamiltonian_cycle(5, &t));

        let p6 = gen_tsp_subtour(TspSpec { n: 6 }).unwrap();
        let mut x = rational::zeros(15);
        for (a, b) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
            x[edge_index(6, a, b)] = ratio(2, 3);
        }
        let w = 0b000111u64;
        let row = LinearConstraint::ge(cut_row(6, w), int(2));
        assert_eq!(row.lhs(&x), int(0));
        assert!(p6.rows().contains(&row));
        assert!(!p6.contains(&x).unwrap());
        let two_triangles = {
            let mut y = tour(6, &[0, 1, 2]);
            let z = tour(6, &[3, 4, 5]);
            for (a, b) in y.iter_mut().zip(z) {
                *a += b;
            }
            y
        };
        assert!(!is_hamiltonian_cycle(6, &two_triangles));
    }
}
