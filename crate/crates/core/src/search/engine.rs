//! Best-bound branch and bound with pluggable disjunction choice.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::lp::{self, LinearConstraint, LpStatus, Polytope, Sense};
use crate::rational::{self, Rational};
use crate::tree::{BBTree, Disjunction};

/// Attempts per node before a random strategy gives up.
const RANDOM_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchStrategy {
    /// Split on the coordinate closest to 1/2, lowest index on ties.
    MostFractional,
    /// Uniform `pi ∈ {-m..m}^n`, resampled until `pi . x*` is fractional.
    RandomGeneral { m: u64, seed: u64 },
    /// The first listed disjunction that cuts off the node's LP optimum.
    FixedSequence { disjunctions: Vec<Disjunction> },
}

impl BranchStrategy {
    /// Short name used in experiment tables.
    pub fn label(&self) -> String {
        match self {
            BranchStrategy::MostFractional => "most-fractional".into(),
            BranchStrategy::RandomGeneral { m, .. } => format!("random-general-{m}"),
            BranchStrategy::FixedSequence { .. } => "fixed-sequence".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_nodes: usize,
    pub max_leaves: usize,
    /// Largest `|pi_i|` a strategy may use; `None` means unrestricted.
    #[serde(default)]
    pub coeff_bound: Option<u64>,
    /// Advisory only; the engine never reads the clock.
    #[serde(default)]
    pub time_hint_secs: Option<u64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 1_000_000,
            max_leaves: 500_000,
            coeff_bound: None,
            time_hint_secs: None,
        }
    }
}

impl SearchBudget {
    pub fn nodes(max_nodes: usize) -> Self {
        SearchBudget {
            max_nodes,
            max_leaves: max_nodes,
            ..SearchBudget::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    ProvedInfeasible,
    Solved {
        #[serde(with = "rational::serde_str")]
        value: Rational,
        #[serde(with = "rational::serde_str::vec")]
        point: Vec<Rational>,
    },
    BudgetExceeded,
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::ProvedInfeasible => "ProvedInfeasible",
            RunStatus::Solved { .. } => "Solved",
            RunStatus::BudgetExceeded => "BudgetExceeded",
        }
    }
}

/// LP optimum at an internal node, listed in preorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    #[serde(with = "rational::serde_str::vec")]
    pub point: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tree: BBTree,
    #[serde(flatten)]
    pub status: RunStatus,
    pub nodes: usize,
    pub leaves: usize,
    pub internal: Vec<NodeRecord>,
}

enum Eval {
    Empty,
    Integral(Rational, Vec<Rational>),
    Fractional(Rational, Vec<Rational>),
}

struct Node {
    rows: Vec<LinearConstraint>,
    split: Option<(Disjunction, usize, usize)>,
    record: Option<NodeRecord>,
}

struct Chooser<'a> {
    strategy: &'a BranchStrategy,
    rng: Option<ChaCha8Rng>,
    coeff_bound: Option<u64>,
}

fn floor_split(pi: Vec<BigInt>, x: &[Rational]) -> Option<Disjunction> {
    let v = rational::dot(&pi.iter().cloned().map(Rational::from_integer).collect::<Vec<_>>(), x);
    if v.is_integer() {
        return None;
    }
    Disjunction::new(pi, v.floor().to_integer()).ok()
}

impl Chooser<'_> {
    fn choose(&mut self, x: &[Rational]) -> Result<Disjunction, SearchError> {
        let n = x.len();
        let d = match self.strategy {
            BranchStrategy::MostFractional => {
                let half = rational::half();
                let j = (0..n)
                    .filter(|&j| !x[j].is_integer())
                    .min_by(|&a, &b| {
                        let da = (x[a].fract() - &half).abs();
                        let db = (x[b].fract() - &half).abs();
                        da.cmp(&db).then(a.cmp(&b))
                    })
                    .ok_or_else(|| SearchError::StrategyStuck("LP optimum is integral".into()))?;
                Disjunction::variable(n, j, x[j].floor().to_integer().try_into().unwrap_or(0))
            }
            BranchStrategy::RandomGeneral { m, .. } => {
                let m = *m as i64;
                let rng = self.rng.as_mut().expect("random strategies own an rng");
                let mut found = None;
                for _ in 0..RANDOM_ATTEMPTS {
                    let pi: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.random_range(-m..=m))).collect();
                    if pi.iter().all(Zero::is_zero) {
                        continue;
                    }
                    if let Some(d) = floor_split(pi, x) {
                        found = Some(d);
                        break;
                    }
                }
                found.ok_or_else(|| {
                    SearchError::StrategyStuck(format!("no fractional pi . x* in {RANDOM_ATTEMPTS} samples"))
                })?
            }
            BranchStrategy::FixedSequence { disjunctions } => disjunctions
                .iter()
                .find(|d| d.dim() == n && d.cuts_off(x))
                .cloned()
                .ok_or_else(|| SearchError::StrategyStuck("sequence exhausted".into()))?,
        };
        if let Some(bound) = self.coeff_bound {
            if d.pi().iter().any(|c| c.abs() > BigInt::from(bound)) {
                return Err(SearchError::StrategyStuck(format!(
                    "{d} exceeds the coefficient bound {bound}"
                )));
            }
        }
        Ok(d)
    }
}

fn evaluate(p: &Polytope, rows: &[LinearConstraint], c: &[Rational]) -> Result<Eval, SearchError> {
    let out = lp::solve_system(p, rows, Some((c, Sense::Max)))?;
    Ok(match out.status {
        LpStatus::Infeasible => Eval::Empty,
        LpStatus::Unbounded => return Err(SearchError::Unbounded),
        _ => {
            let x = out.point.expect("optimal outcomes carry a point");
            let v = out.value.expect("optimal outcomes carry a value");
            if rational::all_integral(&x) {
                Eval::Integral(v, x)
            } else {
                Eval::Fractional(v, x)
            }
        }
    })
}

/// Runs branch and bound on `p`, maximizing `objective` when given and
/// searching for any integer point otherwise.
///
/// Open nodes are processed by best LP bound, ties by creation order. A
/// node becomes a leaf when its LP is infeasible, its LP optimum is
/// integral, or its LP value is at most the incumbent's.
pub fn run_bb(
    p: &Polytope,
    strategy: &BranchStrategy,
    objective: Option<&[Rational]>,
    budget: &SearchBudget,
) -> Result<RunReport, SearchError> {
    let n = p.dim();
    if budget.max_nodes == 0 || budget.max_leaves == 0 {
        return Err(SearchError::InvalidBudget("limits must be positive".into()));
    }
    if let Some(c) = objective {
        lp::check_dim(n, c.len())?;
    }
    match strategy {
        BranchStrategy::RandomGeneral { m: 0, .. } => {
            return Err(SearchError::StrategyStuck("random-general needs m >= 1".into()))
        }
        BranchStrategy::FixedSequence { disjunctions } => {
            if let Some(d) = disjunctions.iter().find(|d| d.dim() != n) {
                return Err(lp::LpError::DimensionMismatch {
                    expected: n,
                    found: d.dim(),
                }
                .into());
            }
        }
        _ => {}
    }
    let zero = rational::zeros(n);
    let c = objective.unwrap_or(&zero);
    let mut chooser = Chooser {
        strategy,
        rng: match strategy {
            BranchStrategy::RandomGeneral { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        },
        coeff_bound: budget.coeff_bound,
    };

    let mut nodes = vec![Node {
        rows: Vec::new(),
        split: None,
        record: None,
    }];
    let mut open: BinaryHeap<(Rational, Reverse<usize>)> = BinaryHeap::new();
    let mut points: Vec<Option<Vec<Rational>>> = vec![None];
    let mut incumbent: Option<(Rational, Vec<Rational>)> = None;
    let mut leaves = 1usize;
    let mut exhausted = false;

    let settle = |id: usize,
                  eval: Eval,
                  incumbent: &mut Option<(Rational, Vec<Rational>)>,
                  open: &mut BinaryHeap<(Rational, Reverse<usize>)>,
                  points: &mut Vec<Option<Vec<Rational>>>| {
        match eval {
            Eval::Empty => {}
            Eval::Integral(v, x) => {
                if incumbent.as_ref().is_none_or(|(b, _)| &v > b) {
                    *incumbent = Some((v, x));
                }
            }
            Eval::Fractional(v, x) => {
                if incumbent.as_ref().is_none_or(|(b, _)| &v > b) {
                    points[id] = Some(x);
                    open.push((v, Reverse(id)));
                }
            }
        }
    };

    let root = evaluate(p, &[], c)?;
    settle(0, root, &mut incumbent, &mut open, &mut points);

    while let Some((v, Reverse(id))) = open.pop() {
        if incumbent.as_ref().is_some_and(|(b, _)| &v <= b) {
            continue;
        }
        if nodes.len() + 2 > budget.max_nodes || leaves + 1 > budget.max_leaves {
            exhausted = true;
            break;
        }
        let x = points[id].take().expect("open nodes keep their LP point");
        let d = chooser.choose(&x)?;
        let mut kids = [0usize; 2];
        for (k, side) in [d.left(), d.right()].into_iter().enumerate() {
            let mut rows = nodes[id].rows.clone();
            rows.push(side);
            let eval = evaluate(p, &rows, c)?;
            let kid = nodes.len();
            nodes.push(Node {
                rows,
                split: None,
                record: None,
            });
            points.push(None);
            settle(kid, eval, &mut incumbent, &mut open, &mut points);
            kids[k] = kid;
        }
        nodes[id].split = Some((d, kids[0], kids[1]));
        nodes[id].record = Some(NodeRecord { point: x, value: v });
        leaves += 1;
    }

    fn build(nodes: &mut [Node], id: usize, internal: &mut Vec<NodeRecord>) -> BBTree {
        match nodes[id].split.take() {
            None => BBTree::Leaf,
            Some((d, l, r)) => {
                internal.push(nodes[id].record.take().expect("internal nodes are recorded"));
                let left = build(nodes, l, internal);
                let right = build(nodes, r, internal);
                BBTree::split(d, left, right)
            }
        }
    }
    let count = nodes.len();
    let mut internal = Vec::new();
    let tree = build(&mut nodes, 0, &mut internal);
    let status = if exhausted {
        RunStatus::BudgetExceeded
    } else {
        match incumbent {
            Some((value, point)) => RunStatus::Solved { value, point },
            None => RunStatus::ProvedInfeasible,
        }
    };
    Ok(RunReport {
        tree,
        status,
        nodes: count,
        leaves,
        internal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_cross_polytope, gen_packing_family, CrossSpec, Mode, PackingSpec};
    use crate::rational::int;
    use crate::tree::{proves_infeasibility, solves};

    #[test]
    fn cross_three_full_tree() {
        let p = gen_cross_polytope(CrossSpec {
            n: 3,
            mode: Mode::Explicit,
        })
        .unwrap();
        let r = run_bb(&p, &BranchStrategy::MostFractional, None, &SearchBudget::default()).unwrap();
        assert_eq!(r.status, RunStatus::ProvedInfeasible);
        assert_eq!(r.nodes, 15);
        assert_eq!(r.leaves, 8);
        assert!(proves_infeasibility(&r.tree, &p).unwrap().is_yes());
        for (d, rec) in r.tree.disjunctions().into_iter().zip(&r.internal) {
            assert!(d.cuts_off(&rec.point));
        }
    }

    #[test]
    fn packing_objective() {
        let p = gen_packing_family(PackingSpec {
            n: 4,
            k: 2,
            with_cover: false,
            mode: Mode::Explicit,
        })
        .unwrap();
        let c = vec![int(1); 4];
        let r = run_bb(&p, &BranchStrategy::MostFractional, Some(&c), &SearchBudget::default()).unwrap();
        let RunStatus::Solved { value, .. } = &r.status else {
            panic!("{:?}", r.status)
        };
        assert_eq!(*value, int(1));
        assert!(solves(&r.tree, &p, &c).unwrap().is_yes());
    }

    #[test]
    fn budget_and_random() {
        let p = gen_cross_polytope(CrossSpec {
            n: 2,
            mode: Mode::Explicit,
        })
        .unwrap();
        let r = run_bb(&p, &BranchStrategy::MostFractional, None, &SearchBudget::nodes(1)).unwrap();
        assert_eq!(r.status, RunStatus::BudgetExceeded);
        assert_eq!(r.nodes, 1);
        let s = BranchStrategy::RandomGeneral { m: 2, seed: 5 };
        let a = run_bb(&p, &s, None, &SearchBudget::default()).unwrap();
        let b = run_bb(&p, &s, None, &SearchBudget::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.status, RunStatus::ProvedInfeasible);
        assert_eq!(a.nodes, 2 * a.leaves - 1);
        assert!(proves_infeasibility(&a.tree, &p).unwrap().is_yes());
    }

    #[test]
    fn fixed_sequence_runs_out() {
        let p = gen_cross_polytope(CrossSpec {
            n: 2,
            mode: Mode::Explicit,
        })
        .unwrap();
        let s = BranchStrategy::FixedSequence {
            disjunctions: vec![Disjunction::variable(2, 0, 0)],
        };
        assert!(matches!(
            run_bb(&p, &s, None, &SearchBudget::default()),
            Err(SearchError::StrategyStuck(_))
        ));
    }
}
