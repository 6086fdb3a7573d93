//! The acceptance suite: eleven end-to-end checks with pinned runtime
//! limits, shared by the `verify-paper` verb and the acceptance test.
//!
//! Every tree a check produces is re-verified through the LP-free replay
//! path; criterion 11 reports the mismatch count.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::experiment::tsp_weights;
use crate::instances::{
    criticality_bound, edge_index, entropy_bound_check, enum_integer_points, facet_check_cardinality,
    find_shattered_set, first_integer_point, gen_cross_polytope, gen_half_points, gen_packing_family,
    gen_perturbed_cross, gen_set_cover, gen_tsp_subtour, half_points_violation, is_hamiltonian_cycle,
    CriticalityResult, CrossSpec, EntropyCheck, FacetResult, Mode, PackingSpec, PerturbedSpec, ShatterResult, TspSpec,
};
use crate::lp::{self, enumerate_vertices, point_in_hull, LinearConstraint, LpStatus, Polytope};
use crate::rational::{self, half, int, Rational};
use crate::search::{
    min_tree_size, run_bb, separation_resistance, BranchStrategy, MinTreeResult, RunStatus, SearchBudget,
    SeparationResult,
};
use crate::transforms::{self, apply_map_polytope, AffineMap, DupSpec, EmbedSpec, FlipSpec, MapStep};
use crate::tree::{
    proves_infeasibility, replay_infeasibility, replay_separation, replay_solve, separates, solves, transform_tree,
    BBTree, Disjunction,
};

/// Deliberate corruption used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Every cross-polytope loses its first row.
    DropCrossRow,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub fault: Option<Fault>,
    /// Run only these criteria; criterion 11 always covers what ran.
    pub only: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub limit_secs: u64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:>2} {} ({:.2}s, limit {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_secs,
            self.limit_secs,
            self.detail
        )
    }
}

/// `(id, name, runtime limit in seconds)`.
pub const CRITERIA: [(usize, &str, u64); 11] = [
    (1, "cross-polytope tightness", 60),
    (2, "cross-polytope minimum trees", 300),
    (3, "separation hardness of the center", 300),
    (4, "packing/cover criticality", 120),
    (5, "facet check", 30),
    (6, "set-cover flip reduction", 30),
    (7, "simulation under flip/embed/dup", 120),
    (8, "perturbed cross-polytope", 600),
    (9, "shattering and counting", 300),
    (10, "TSP subtour relaxation", 600),
    (11, "certificate replay", 60),
];

type Check = Result<String, String>;

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

struct Ctx {
    fault: Option<Fault>,
    replays: usize,
    mismatches: Vec<String>,
    replay_time: Duration,
}

impl Ctx {
    fn cross(&self, n: usize) -> Result<Polytope, String> {
        let p = gen_cross_polytope(CrossSpec {
            n,
            mode: Mode::Explicit,
        })
        .map_err(err)?;
        Ok(match self.fault {
            Some(Fault::DropCrossRow) => p.without_row(0),
            None => p,
        })
    }

    fn record(&mut self, what: &str, start: Instant, r: Result<(), crate::tree::ReplayError>) {
        self.replays += 1;
        self.replay_time += start.elapsed();
        if let Err(e) = r {
            self.mismatches.push(format!("{what}: {e}"));
        }
    }

    /// Checks `tree` proves `p` empty and replays the verdict.
    fn infeasible(&mut self, what: &str, tree: &BBTree, p: &Polytope) -> Result<bool, String> {
        let v = proves_infeasibility(tree, p).map_err(err)?;
        let start = Instant::now();
        self.record(what, start, replay_infeasibility(tree, p, &v));
        Ok(v.is_yes())
    }
}

/// Runs the selected criteria in order.
pub fn run_suite(opts: &SuiteOptions) -> Vec<CriterionResult> {
    let mut ctx = Ctx {
        fault: opts.fault,
        replays: 0,
        mismatches: Vec::new(),
        replay_time: Duration::ZERO,
    };
    let mut out = Vec::new();
    for (id, name, limit) in CRITERIA {
        if opts.only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let r = match id {
            1 => c1_cross_tightness(&mut ctx),
            2 => c2_cross_min_trees(&mut ctx),
            3 => c3_center_separation(&mut ctx),
            4 => c4_packing(&mut ctx),
            5 => c5_facets(),
            6 => c6_set_cover(),
            7 => c7_simulation(),
            8 => c8_perturbed(),
            9 => c9_shattering(),
            10 => c10_tsp(&mut ctx),
            _ => c11_replay(&ctx),
        };
        let elapsed = if id == 11 { ctx.replay_time } else { start.elapsed() };
        let (mut passed, mut detail) = match r {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if elapsed > Duration::from_secs(limit) {
            passed = false;
            detail = format!("over the time limit; {detail}");
        }
        out.push(CriterionResult {
            id,
            name,
            passed,
            detail,
            elapsed_secs: elapsed.as_secs_f64(),
            limit_secs: limit,
        });
    }
    out
}

fn c1_cross_tightness(ctx: &mut Ctx) -> Check {
    for n in 1..=10 {
        let p = ctx.cross(n)?;
        let t = BBTree::full_variable_tree(n);
        let want = (1usize << (n + 1)) - 1;
        if t.size() != want {
            return Err(format!("n = {n}: tree has {} nodes, expected {want}", t.size()));
        }
        if !ctx.infeasible(&format!("full tree n={n}"), &t, &p)? {
            return Err(format!("n = {n}: the full variable tree leaves a nonempty atom"));
        }
    }
    Ok("full variable trees prove P_1..P_10 empty with 2^(n+1)-1 nodes".into())
}

/// Emptiness of `p ∩ rows`, cached by the rows' normal forms.
struct EmptyCache<'a> {
    p: &'a Polytope,
    seen: HashMap<String, bool>,
}

impl EmptyCache<'_> {
    fn empty(&mut self, rows: &[LinearConstraint]) -> Result<bool, String> {
        let key = rows.iter().map(|r| r.normalized().to_string()).sorted().join(";");
        if let Some(&v) = self.seen.get(&key) {
            return Ok(v);
        }
        let q = self.p.with_rows(rows.iter().cloned()).map_err(err)?;
        let v = lp::lp_feasible(&q).map_err(err)?.status == LpStatus::Infeasible;
        self.seen.insert(key, v);
        Ok(v)
    }
}

/// Brute force over every split with `|pi_i| <= m` and `|pi0| <= n m + 1`
/// (sign-redundant and non-primitive `pi` included): whether some tree
/// with at most three leaves proves `p` empty.
fn small_tree_exists(p: &Polytope, m: i64) -> Result<Option<BBTree>, String> {
    let n = p.dim();
    let bound = n as i64 * m + 1;
    let mut splits = Vec::new();
    for pi in (0..n).map(|_| -m..=m).multi_cartesian_product() {
        if pi.iter().all(|&c| c == 0) {
            continue;
        }
        for pi0 in -bound..=bound {
            splits.push(Disjunction::from_i64(&pi, pi0).map_err(err)?);
        }
    }
    let mut cache = EmptyCache {
        p,
        seen: HashMap::new(),
    };
    if cache.empty(&[])? {
        return Ok(Some(BBTree::Leaf));
    }
    for d in &splits {
        let l = cache.empty(&[d.left()])?;
        let r = cache.empty(&[d.right()])?;
        if l && r {
            return Ok(Some(BBTree::split(d.clone(), BBTree::Leaf, BBTree::Leaf)));
        }
        let open = match (l, r) {
            (true, false) => d.right(),
            (false, true) => d.left(),
            _ => continue,
        };
        for e in &splits {
            if cache.empty(&[open.clone(), e.left()])? && cache.empty(&[open.clone(), e.right()])? {
                let sub = BBTree::split(e.clone(), BBTree::Leaf, BBTree::Leaf);
                return Ok(Some(if l {
                    BBTree::split(d.clone(), BBTree::Leaf, sub)
                } else {
                    BBTree::split(d.clone(), sub, BBTree::Leaf)
                }));
            }
        }
    }
    Ok(None)
}

fn c2_cross_min_trees(ctx: &mut Ctx) -> Check {
    let mut found = Vec::new();
    for (n, want) in [(1, 2), (2, 4)] {
        let p = ctx.cross(n)?;
        match min_tree_size(&p, 2, 8).map_err(err)? {
            MinTreeResult::Exact { leaves, tree } if leaves == want => {
                if !ctx.infeasible(&format!("minimum tree n={n}"), &tree, &p)? {
                    return Err(format!("n = {n}: reported minimum tree does not prove infeasibility"));
                }
                found.push(leaves);
            }
            other => return Err(format!("P_{n}, M = 2: expected Exact({want}), got {other:?}")),
        }
    }
    let p2 = ctx.cross(2)?;
    if let Some(t) = small_tree_exists(&p2, 2)? {
        return Err(format!(
            "brute force found a tree with {} leaves: {}",
            t.leaves(),
            tree_json(&t)
        ));
    }
    Ok(format!(
        "min leaves P_1 = {}, P_2 = {}; brute force finds no tree with <= 3 leaves and |pi_i| <= 2",
        found[0], found[1]
    ))
}

fn tree_json(t: &BBTree) -> String {
    serde_json::to_string(t).unwrap_or_default()
}

fn c3_center_separation(ctx: &mut Ctx) -> Check {
    let p = ctx.cross(2)?;
    let x = vec![half(); 2];
    match separation_resistance(&p, &x, 2, 3).map_err(err)? {
        SeparationResult::MoreThan { max_leaves } => {
            Ok(format!("no tree with <= {max_leaves} leaves separates 1/2 . 1"))
        }
        SeparationResult::MinLeavesToSeparate { leaves, tree } => {
            let v = separates(&tree, &p, &x).map_err(err)?;
            let start = Instant::now();
            ctx.record("center separation", start, replay_separation(&tree, &p, &x, &v));
            Err(format!(
                "expected MoreThan(3), got MinLeavesToSeparate({leaves}); separating tree {} (checker: {})",
                tree_json(&tree),
                if v.is_yes() { "separates" } else { "does not separate" }
            ))
        }
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn c4_packing(ctx: &mut Ctx) -> Check {
    let mut smallest_gap: Option<Rational> = None;
    let mut cases = 0;
    for n in [4usize, 6, 8] {
        for k in 2..=n / 2 {
            let q = gen_packing_family(PackingSpec {
                n,
                k,
                with_cover: true,
                mode: Mode::Explicit,
            })
            .map_err(err)?;
            if !enum_integer_points(&q).map_err(err)?.is_empty() {
                return Err(format!("Q({n},{k}) has a 0/1 point"));
            }
            let center = vec![Rational::new(k.into(), n.into()); n];
            if !q.contains(&center).map_err(err)? {
                return Err(format!("(k/n) . 1 not in Q({n},{k})"));
            }
            let want = Rational::new(2 * (binomial(n, k) + 1), BigInt::from(n)) - Rational::one();
            let all: Vec<usize> = (0..q.rows().len()).collect();
            match criticality_bound(&q, &all).map_err(err)? {
                CriticalityResult::Verified { bound, witnesses } => {
                    if bound != want {
                        return Err(format!("Q({n},{k}): bound {bound}, expected {want}"));
                    }
                    for w in &witnesses {
                        let violated: Vec<usize> = (0..q.rows().len())
                            .filter(|&i| !q.rows()[i].is_satisfied(&w.point))
                            .collect();
                        if violated != vec![w.row] {
                            return Err(format!("Q({n},{k}): witness for row {} violates {violated:?}", w.row));
                        }
                    }
                }
                other => return Err(format!("Q({n},{k}): {other:?}")),
            }
            for s in [
                BranchStrategy::MostFractional,
                BranchStrategy::RandomGeneral { m: 1, seed: 7 },
            ] {
                let r = run_bb(&q, &s, None, &SearchBudget::nodes(200_000)).map_err(err)?;
                if r.status != RunStatus::ProvedInfeasible {
                    return Err(format!("Q({n},{k}) {}: {:?}", s.label(), r.status));
                }
                let nodes = Rational::from_integer(r.nodes.into());
                if nodes < want {
                    return Err(format!(
                        "Q({n},{k}) {}: {} nodes below the bound {want}",
                        s.label(),
                        r.nodes
                    ));
                }
                if !ctx.infeasible(&format!("engine tree Q({n},{k}) {}", s.label()), &r.tree, &q)? {
                    return Err(format!("Q({n},{k}): engine tree does not prove infeasibility"));
                }
                let gap = nodes - &want;
                if smallest_gap.as_ref().is_none_or(|g| &gap < g) {
                    smallest_gap = Some(gap);
                }
            }
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} instances verified; smallest margin of engine nodes over the bound: {}",
        smallest_gap.map(|g| rational::format(&g)).unwrap_or_default()
    ))
}

fn c5_facets() -> Check {
    let mut cases = 0;
    for n in 4..=10 {
        for k in 2..=n / 2 {
            match facet_check_cardinality(n, k).map_err(err)? {
                FacetResult::Facet(r) if r == n => cases += 1,
                other => return Err(format!("n = {n}, k = {k}: {other:?}")),
            }
        }
    }
    Ok(format!("{cases} (n, k) pairs give a facet"))
}

fn c6_set_cover() -> Check {
    let mut cases = 0;
    for n in 4..=10 {
        for k in 2..=n / 2 {
            let pk = gen_packing_family(PackingSpec {
                n,
                k,
                with_cover: false,
                mode: Mode::Explicit,
            })
            .map_err(err)?;
            let sc = gen_set_cover(n, k).map_err(err)?;
            let f = transforms::make_flip(FlipSpec { n, j: (0..n).collect() }).map_err(err)?;
            let img = apply_map_polytope(&f, &pk).map_err(err)?;
            if img.normalized_rows() != sc.normalized_rows() {
                return Err(format!("n = {n}, k = {k}: flipped rows differ from the set-cover rows"));
            }
            let mut mapped: Vec<Vec<Rational>> = enum_integer_points(&pk)
                .map_err(err)?
                .iter()
                .map(|x| f.apply(x))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            mapped.sort();
            if mapped != enum_integer_points(&sc).map_err(err)? {
                return Err(format!("n = {n}, k = {k}: 0/1 points do not correspond under the flip"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, k) pairs match row for row and point for point"))
}

fn random_polytope(rng: &mut ChaCha8Rng) -> Result<Polytope, String> {
    loop {
        let rows = (0..rng.random_range(1..=3))
            .map(|_| {
                let a: Vec<Rational> = (0..3).map(|_| int(rng.random_range(-3..=3))).collect();
                LinearConstraint::le(a, rational::ratio(rng.random_range(-2..=6), 2))
            })
            .collect();
        let p = Polytope::new(3, rows, true).map_err(err)?;
        if lp::lp_feasible(&p).map_err(err)?.is_feasible() {
            return Ok(p);
        }
    }
}

fn random_map(rng: &mut ChaCha8Rng) -> Result<AffineMap, String> {
    let mut n = 3;
    let mut steps = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let step = match rng.random_range(0..3) {
            0 => MapStep::Flip(FlipSpec {
                n,
                j: (0..n).filter(|_| rng.random_bool(0.5)).collect(),
            }),
            1 => {
                let (zeros, ones) = (rng.random_range(0..=1), rng.random_range(0..=1));
                let mut positions: Vec<usize> = (0..n + zeros + ones).collect();
                positions.shuffle(rng);
                MapStep::Embed(EmbedSpec {
                    n,
                    zeros,
                    ones,
                    positions,
                })
            }
            _ => MapStep::Dup(DupSpec {
                n,
                tuple: (0..rng.random_range(1..=2)).map(|_| rng.random_range(0..n)).collect(),
            }),
        };
        n = match &step {
            MapStep::Flip(_) => n,
            MapStep::Embed(s) => n + s.zeros + s.ones,
            MapStep::Dup(s) => n + s.tuple.len(),
        };
        steps.push(step);
    }
    transforms::from_steps(3, &steps).map_err(err)
}

fn random_tree(rng: &mut ChaCha8Rng, m: usize, depth: usize) -> BBTree {
    if depth == 0 || !rng.random_bool(0.7) {
        return BBTree::Leaf;
    }
    let pi: Vec<i64> = loop {
        let v: Vec<i64> = (0..m).map(|_| rng.random_range(-3..=3)).collect();
        if v.iter().any(|&c| c != 0) {
            break v;
        }
    };
    let d = Disjunction::from_i64(&pi, rng.random_range(-3..=3)).expect("nonzero pi");
    BBTree::split(d, random_tree(rng, m, depth - 1), random_tree(rng, m, depth - 1))
}

fn c7_simulation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vertices = 0usize;
    for trial in 0..50 {
        let p = random_polytope(&mut rng)?;
        let f = random_map(&mut rng)?;
        let q = apply_map_polytope(&f, &p).map_err(err)?;
        let t_hat = random_tree(&mut rng, f.output_dim(), 4);
        let t = transform_tree(&t_hat, &f).map_err(err)?;
        let hat_paths = t_hat.leaf_paths();
        let paths = t.leaf_paths();
        if hat_paths.len() != paths.len() {
            return Err(format!("trial {trial}: leaf counts differ"));
        }
        for (leaf, (path, hat)) in paths.iter().zip(&hat_paths).enumerate() {
            for v in enumerate_vertices(&p, path).map_err(err)? {
                let y = f.apply(&v).map_err(err)?;
                if !q.contains(&y).map_err(err)? || !hat.iter().all(|r| r.is_satisfied(&y)) {
                    return Err(format!(
                        "trial {trial}, leaf {leaf}: vertex {} maps outside the leaf atom",
                        rational::format_vector(&v)
                    ));
                }
                vertices += 1;
            }
        }
    }
    Ok(format!(
        "50 random trees, {vertices} leaf-atom vertices mapped into their image atoms"
    ))
}

fn c8_perturbed() -> Check {
    let n: usize = 12;
    let s = (4 * n).div_ceil(10);
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..20u64 {
        let spec = PerturbedSpec { n, seed };
        let q = gen_perturbed_cross(spec).map_err(err)?;
        for (mask, row) in q.rows().iter().enumerate() {
            let outside = n - (mask as u64).count_ones() as usize;
            if &row.rhs + int(outside as i64) != rational::ratio(2 * n as i64, 25) {
                return Err(format!("seed {seed}: row {mask} has right-hand side {}", row.rhs));
            }
        }
        let infeasible = first_integer_point(&q).map_err(err)?.is_none();
        let violation = half_points_violation(&q, s).map_err(err)?;
        // sampled points must agree with the exact per-row decision
        let sample = gen_half_points(n, s, 24, seed);
        let sample_ok = sample.iter().all(|x| q.contains(x).unwrap_or(false));
        if violation.is_none() && !sample_ok {
            return Err(format!(
                "seed {seed}: a sampled Half_s point is infeasible although no row admits one"
            ));
        }
        if infeasible && violation.is_none() {
            good += 1;
        } else {
            notes.push(format!(
                "seed {seed}: infeasible={infeasible}, half-points contained={}",
                violation.is_none()
            ));
        }
    }
    let detail = format!(
        "{good}/20 instances integer-infeasible with Half_{s} inside{}",
        if notes.is_empty() {
            String::new()
        } else {
            format!(" ({})", notes.join("; "))
        }
    );
    if good >= 18 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_shattering() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cube: Vec<Vec<Rational>> = (0..32u32)
        .map(|m| (0..5).map(|i| int((m >> (4 - i) & 1) as i64)).collect())
        .collect();
    for k in 1..=3usize {
        let threshold: usize = (0..k)
            .map(|i| binomial(5, i))
            .sum::<BigInt>()
            .try_into()
            .expect("small");
        for trial in 0..200 {
            let size = rng.random_range(threshold + 1..=32);
            let mut f = cube.clone();
            f.shuffle(&mut rng);
            f.truncate(size);
            match find_shattered_set(&f, k).map_err(err)? {
                ShatterResult::Found { j, point } => {
                    let patterns = f
                        .iter()
                        .map(|p| j.iter().map(|&i| p[i].clone()).collect::<Vec<_>>())
                        .unique()
                        .count();
                    if j.len() != k || patterns != 1 << k {
                        return Err(format!("k = {k}, trial {trial}: {j:?} is not shattered"));
                    }
                    if j.iter().any(|&i| point[i] != half()) || point_in_hull(&point, &f).map_err(err)?.is_none() {
                        return Err(format!("k = {k}, trial {trial}: half point not in conv(F)"));
                    }
                }
                ShatterResult::NotFound => {
                    return Err(format!("k = {k}, trial {trial}: |F| = {size} but nothing shattered"))
                }
            }
        }
    }
    for n in 5..=30u64 {
        let s = (4 * n).div_ceil(10);
        if let EntropyCheck::Fails { rhs, .. } = entropy_bound_check(n, s).map_err(err)? {
            return Err(format!("entropy bound fails at n = {n}, s = {s} (sum {rhs})"));
        }
    }
    Ok("600 families shattered as required; entropy bound holds for n = 5..30".into())
}

/// Cheapest tour by enumerating every cyclic order starting at city 0.
fn brute_force_tour(n: usize, w: &[Rational]) -> Rational {
    (1..n)
        .permutations(n - 1)
        .filter(|p| p[0] < p[n - 2])
        .map(|p| {
            let mut cost = w[edge_index(n, 0, p[0])].clone() + &w[edge_index(n, p[n - 2], 0)];
            for e in p.windows(2) {
                cost += &w[edge_index(n, e[0], e[1])];
            }
            cost
        })
        .min()
        .expect("n >= 3")
}

/// Seeds per city count; the subtour LP is usually integral at the root,
/// and a dozen seeds include instances that branch.
const TSP_SEEDS: u64 = 12;

fn c10_tsp(ctx: &mut Ctx) -> Check {
    let mut sizes = Vec::new();
    for n in [6usize, 8, 10] {
        let p = gen_tsp_subtour(TspSpec { n }).map_err(err)?;
        let mut nodes = Vec::new();
        for seed in 0..TSP_SEEDS {
            let w = tsp_weights(n, seed);
            let c: Vec<Rational> = w.iter().map(|v| -v).collect();
            let r = run_bb(
                &p,
                &BranchStrategy::MostFractional,
                Some(&c),
                &SearchBudget::nodes(100_000),
            )
            .map_err(err)?;
            let RunStatus::Solved { value, point } = &r.status else {
                return Err(format!("n = {n}, seed {seed}: {:?}", r.status));
            };
            if !is_hamiltonian_cycle(n, point) || !p.contains(point).map_err(err)? {
                return Err(format!("n = {n}, seed {seed}: incumbent is not a tour"));
            }
            let best = brute_force_tour(n, &w);
            if -value.clone() != best {
                return Err(format!(
                    "n = {n}, seed {seed}: engine tour costs {}, enumeration finds {best}",
                    -value.clone()
                ));
            }
            let v = solves(&r.tree, &p, &c).map_err(err)?;
            let start = Instant::now();
            ctx.record(
                &format!("tsp n={n} seed={seed}"),
                start,
                replay_solve(&r.tree, &p, &c, &v),
            );
            if !v.is_yes() {
                return Err(format!("n = {n}, seed {seed}: checker rejects the engine tree"));
            }
            nodes.push(r.nodes.to_string());
        }
        sizes.push(format!("n={n}: [{}]", nodes.join(" ")));
    }
    Ok(format!(
        "optimal tours found and certified for seeds 0..{TSP_SEEDS}; tree nodes {}",
        sizes.join(", ")
    ))
}

fn c11_replay(ctx: &Ctx) -> Check {
    if ctx.replays == 0 {
        return Err("nothing was replayed".into());
    }
    if ctx.mismatches.is_empty() {
        Ok(format!("{} verdicts replayed, 0 mismatches", ctx.replays))
    } else {
        Err(format!(
            "{} mismatches: {}",
            ctx.mismatches.len(),
            ctx.mismatches.join("; ")
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn fault_breaks_cross_criteria() {
        let opts = SuiteOptions {
            fault: Some(Fault::DropCrossRow),
            only: Some(vec![1]),
        };
        let r = run_suite(&opts);
        assert_eq!(r.len(), 1);
        assert!(!r[0].passed);
    }

    #[test]
    fn cheap_criteria_pass() {
        let r = run_suite(&SuiteOptions {
            fault: None,
            only: Some(vec![5, 6]),
        });
        assert!(r.iter().all(|c| c.passed), "{r:?}");
    }

    #[test]
    fn brute_force_tour_small() {
        let w: Vec<Rational> = [1, 2, 4, 8, 16, 32].into_iter().map(int).collect();
        // edges 01,02,03,12,13,23: tours 0-1-2-3 (45), 0-1-3-2 (51), 0-2-1-3 (30)
        assert_eq!(brute_force_tour(4, &w), int(30));
        assert!(brute_force_tour(3, &vec![int(0); 3]).is_zero());
    }
}
