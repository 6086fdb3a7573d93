//! Property tests. Each expected value comes from a separate computation:
//! vertex enumeration, 0/1 enumeration, or direct evaluation of rows.

use num_traits::{One, Signed};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bblab::instances::{cross_row, enum_integer_points, gen_cross_polytope, CrossSpec, Mode};
use bblab::lp::{
    enumerate_vertices, in_convex_hull_of_union, lp_optimize, point_in_hull, separating_hyperplane, LinearConstraint,
    LpError, LpStatus, Polytope, Sense,
};
use bblab::rational::{self, dot, int, ratio, Rational};
use bblab::search::{
    bounded_trees, min_tree_size, run_bb, separation_resistance, BranchStrategy, MinTreeResult, RunStatus,
    SearchBudget, SeparationResult,
};
use bblab::transforms::{self, apply_map_polytope, AffineMap, DupSpec, EmbedSpec, FlipSpec, MapStep};
use bblab::tree::{atoms_of, proves_infeasibility, separates, solves, BBTree, Disjunction};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-8i64..=8, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn unit_rational() -> impl Strategy<Value = Rational> {
    (0i64..=8).prop_map(|p| ratio(p, 8))
}

fn row(dim: usize) -> impl Strategy<Value = LinearConstraint> {
    (prop::collection::vec(-3i64..=3, dim), small_rational())
        .prop_map(|(a, b)| LinearConstraint::le(a.into_iter().map(int).collect(), b))
}

fn boxed_polytope(dim: usize) -> impl Strategy<Value = Polytope> {
    prop::collection::vec(row(dim), 1..=4).prop_map(move |rows| Polytope::new(dim, rows, true).unwrap())
}

fn random_tree(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> BBTree {
    if depth == 0 || !rng.random_bool(0.7) {
        return BBTree::leaf();
    }
    let pi: Vec<i64> = loop {
        let v: Vec<i64> = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
        if v.iter().any(|&c| c != 0) {
            break v;
        }
    };
    let d = Disjunction::from_i64(&pi, rng.random_range(-2..=2)).unwrap();
    BBTree::split(d, random_tree(rng, dim, depth - 1), random_tree(rng, dim, depth - 1))
}

fn random_map(rng: &mut ChaCha8Rng, n0: usize) -> AffineMap {
    let mut n = n0;
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
    transforms::from_steps(n0, &steps).unwrap()
}

fn zero_one_points(dim: usize) -> Vec<Vec<Rational>> {
    (0..1u32 << dim)
        .map(|mask| (0..dim).map(|i| int((mask >> i & 1) as i64)).collect())
        .collect()
}

fn cross(n: usize) -> Polytope {
    gen_cross_polytope(CrossSpec {
        n,
        mode: Mode::Explicit,
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_agrees_with_vertex_enumeration(
        p in (2usize..=3).prop_flat_map(boxed_polytope),
        c in prop::collection::vec(-4i64..=4, 3),
    ) {
        let c: Vec<Rational> = c[..p.dim()].iter().copied().map(int).collect();
        let vertices = enumerate_vertices(&p, &[]).unwrap();
        let out = lp_optimize(&p, &c, Sense::Max).unwrap();
        if out.status == LpStatus::Infeasible {
            prop_assert!(vertices.is_empty());
            prop_assert!(out.farkas.unwrap().verify_farkas().is_ok());
        } else {
            let x = out.point.unwrap();
            prop_assert!(p.rows().iter().all(|r| r.is_satisfied(&x)));
            prop_assert!(x.iter().all(|v| !v.is_negative() && *v <= Rational::one()));
            let value = out.value.unwrap();
            let best = vertices.iter().map(|v| dot(&c, v)).max().unwrap();
            prop_assert_eq!(&value, &best);
            prop_assert!(out.bound.unwrap().verify_upper_bound(&c, &value).is_ok());
        }
    }

    #[test]
    fn union_hull_agrees_with_vertex_hull(
        a in boxed_polytope(2),
        b in boxed_polytope(2),
        x in prop::collection::vec(unit_rational(), 2),
    ) {
        let mut points = enumerate_vertices(&a, &[]).unwrap();
        points.extend(enumerate_vertices(&b, &[]).unwrap());
        prop_assume!(!points.is_empty());
        let by_lp = in_convex_hull_of_union(&x, &[a, b]).unwrap();
        let by_vertices = point_in_hull(&x, &points).unwrap();
        prop_assert_eq!(by_lp.is_inside(), by_vertices.is_some());
    }

    #[test]
    fn separating_hyperplane_is_strict_or_has_weights(
        points in prop::collection::vec(prop::collection::vec(unit_rational(), 2), 1..=5),
        x in prop::collection::vec(unit_rational(), 2),
    ) {
        match separating_hyperplane(&x, &points) {
            Ok(s) => {
                prop_assert!(dot(&s.pi, &x) > s.pi0);
                prop_assert!(points.iter().all(|p| dot(&s.pi, p) <= s.pi0));
            }
            Err(LpError::NotSeparable { weights }) => {
                prop_assert!(weights.iter().all(|w| !w.is_negative()));
                prop_assert_eq!(weights.iter().sum::<Rational>(), Rational::one());
                for i in 0..2 {
                    let coord: Rational = weights.iter().zip(&points).map(|(w, p)| w * &p[i]).sum();
                    prop_assert_eq!(&coord, &x[i]);
                }
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn tree_size_and_monotone_atoms(p in boxed_polytope(3), extra in row(3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, 3, 4);
        prop_assert_eq!(t.size(), 2 * t.leaves() - 1);
        let q = p.with_rows([extra]).unwrap();
        let (pa, qa) = (atoms_of(&t, &p).unwrap(), atoms_of(&t, &q).unwrap());
        for (small, big) in qa.iter().zip(&pa) {
            let rows = small.to_polytope().rows().to_vec();
            prop_assert!(big.to_polytope().rows().iter().all(|r| rows.contains(r)));
            for v in enumerate_vertices(&q, &small.branching).unwrap() {
                prop_assert!(big.contains(&v).unwrap());
            }
        }
    }

    #[test]
    fn map_images_preserve_membership(
        p in boxed_polytope(3),
        x in prop::collection::vec(unit_rational(), 3),
        seed in any::<u64>(),
    ) {
        let f = random_map(&mut ChaCha8Rng::seed_from_u64(seed), 3);
        let image = apply_map_polytope(&f, &p).unwrap();
        prop_assert_eq!(image.contains(&f.apply(&x).unwrap()).unwrap(), p.contains(&x).unwrap());
        prop_assert_eq!(
            enum_integer_points(&image).unwrap().len(),
            enum_integer_points(&p).unwrap().len()
        );
    }

    #[test]
    fn flip_is_an_involution(j in prop::collection::vec(any::<bool>(), 4), x in prop::collection::vec(unit_rational(), 4)) {
        let j: Vec<usize> = (0..4).filter(|&i| j[i]).collect();
        let f = transforms::make_flip(FlipSpec { n: 4, j }).unwrap();
        prop_assert_eq!(f.apply(&f.apply(&x).unwrap()).unwrap(), x);
        let twice = transforms::compose(&f, &f).unwrap();
        let id = AffineMap::identity(4);
        prop_assert_eq!(twice.matrix(), id.matrix());
        prop_assert_eq!(twice.offset(), id.offset());
    }

    #[test]
    fn cross_row_for_small_coordinates_is_tightest(
        x in (1usize..=6).prop_flat_map(|n| prop::collection::vec((0i64..=12).prop_map(|p| ratio(p, 12)), n)),
    ) {
        let n = x.len();
        let slack = |r: &LinearConstraint| r.lhs(&x) - &r.rhs;
        let mask = (0..n).filter(|&i| x[i] < rational::half()).fold(0u64, |m, i| m | 1 << i);
        let best = slack(&cross_row(n, mask));
        for other in 0..1u64 << n {
            prop_assert!(best <= slack(&cross_row(n, other)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Random general branching on a cross-polytope: the tree is a genuine
    /// branch-and-bound tree and every leaf holds at most one 0/1 point.
    #[test]
    fn random_branching_trees_are_honest(n in 2usize..=3, m in 1u64..=2, seed in any::<u64>()) {
        let p = cross(n);
        let report = run_bb(&p, &BranchStrategy::RandomGeneral { m, seed }, None, &SearchBudget::nodes(5_000)).unwrap();
        prop_assert_eq!(&report.status, &RunStatus::ProvedInfeasible);
        prop_assert_eq!(report.nodes, 2 * report.leaves - 1);
        prop_assert_eq!(report.nodes, report.tree.size());
        prop_assert!(proves_infeasibility(&report.tree, &p).unwrap().is_yes());
        let disjunctions = report.tree.disjunctions();
        prop_assert_eq!(disjunctions.len(), report.internal.len());
        for (d, rec) in disjunctions.iter().zip(&report.internal) {
            prop_assert!(d.cuts_off(&rec.point));
        }
        let cube = zero_one_points(n);
        for path in report.tree.leaf_paths() {
            let inside = cube.iter().filter(|v| path.iter().all(|r| r.is_satisfied(v))).count();
            prop_assert!(inside <= 1);
        }
    }

    #[test]
    fn infeasibility_trees_solve_and_separate(n in 2usize..=3, c in prop::collection::vec(-3i64..=3, 3), seed in any::<u64>()) {
        let p = cross(n);
        let c: Vec<Rational> = c[..n].iter().copied().map(int).collect();
        let report = run_bb(&p, &BranchStrategy::RandomGeneral { m: 1, seed }, None, &SearchBudget::nodes(5_000)).unwrap();
        prop_assert!(solves(&report.tree, &p, &c).unwrap().is_yes());
        let x = lp_optimize(&p, &c, Sense::Max).unwrap().point.unwrap();
        prop_assert!(separates(&report.tree, &p, &x).unwrap().is_yes());
    }

    /// Every corner of the square is cut off at a random depth; the center
    /// stays inside, so the polytope is nonempty with no 0/1 point.
    #[test]
    fn min_tree_size_is_monotone_in_m(depths in prop::collection::vec(1i64..=4, 4)) {
        let rows = (0..4u64)
            .map(|corner| {
                let mut r = cross_row(2, corner);
                r.rhs = ratio(depths[corner as usize], 4) + &r.rhs - rational::half();
                r
            })
            .collect();
        let p = Polytope::new(2, rows, true).unwrap();
        prop_assert!(p.contains(&[rational::half(), rational::half()]).unwrap());
        let leaves = |m| match min_tree_size(&p, m, 6).unwrap() {
            MinTreeResult::Exact { leaves, .. } => leaves,
            MinTreeResult::MoreThan { max_leaves } => max_leaves + 1,
        };
        let (one, two) = (leaves(1), leaves(2));
        prop_assert!(two <= one, "M=1: {one}, M=2: {two}");
    }
}

#[test]
fn cross_minimum_is_two_to_the_n() {
    for n in 1..=2 {
        let p = cross(n);
        for m in 1..=2 {
            match min_tree_size(&p, m, 5).unwrap() {
                MinTreeResult::Exact { leaves, .. } => assert_eq!(leaves, 1 << n),
                other => panic!("P_{n}, M = {m}: {other:?}"),
            }
        }
    }
}

/// A MoreThan answer means no enumerated tree separates; replay that claim
/// on 100 of the enumerated trees.
#[test]
fn separation_more_than_is_replayable() {
    let p = cross(2);
    let x = vec![rational::half(), rational::half()];
    let (m, max_leaves) = (2, 2);
    assert_eq!(
        separation_resistance(&p, &x, m, max_leaves).unwrap(),
        SeparationResult::MoreThan { max_leaves }
    );
    let mut trees = Vec::new();
    for leaves in 1..=max_leaves {
        trees.extend(bounded_trees(&p, m, leaves).unwrap());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    trees.shuffle(&mut rng);
    let sample = &trees[..trees.len().min(100)];
    assert!(!sample.is_empty());
    for t in sample {
        assert!(!separates(t, &p, &x).unwrap().is_yes(), "{t:?}");
    }

    // P_2 has too few small trees; three leaves at M = 1 on P_3 gives
    // enough for a 100-tree sample.
    let p3 = cross(3);
    let x3 = vec![rational::half(); 3];
    assert_eq!(
        separation_resistance(&p3, &x3, 1, 3).unwrap(),
        SeparationResult::MoreThan { max_leaves: 3 }
    );
    let mut trees = bounded_trees(&p3, 1, 3).unwrap();
    assert!(trees.len() >= 100, "{} trees", trees.len());
    trees.shuffle(&mut rng);
    for t in &trees[..100] {
        assert!(!separates(t, &p3, &x3).unwrap().is_yes());
    }
}
