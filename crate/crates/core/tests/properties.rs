//! Property tests against brute-force oracles.

use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use permbox::blocks::{higman_primitivity, is_primitive};
use permbox::catalog;
use permbox::decompose::{self, Atom, Caps, ClassifyInput, GroupExpr, ProductOp, Verdict};
use permbox::graph::{self, Ends, EndsParams, Graph};
use permbox::products::{self, CartesianDecomposition};
use permbox::treebox::{self, LegalColouring, Side, TreeBall};
use permbox::{PermGroup, Permutation};

fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn group_strategy() -> impl Strategy<Value = PermGroup> {
    (2usize..=6).prop_flat_map(|n| prop::collection::vec(perm_strategy(n), 1..=3).prop_map(|g| PermGroup::from_generators(g).unwrap()))
}

/// All group elements by closing the generators under multiplication.
fn closure(g: &PermGroup) -> HashSet<Permutation> {
    let id = Permutation::identity(g.degree());
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in g.generators() {
            let y = x.then(s);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Whether some partition into equal blocks of size strictly between 1 and
/// `n` is invariant, by enumerating set partitions.
fn has_nontrivial_blocks(g: &PermGroup) -> bool {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, max: usize, g: &PermGroup) -> bool {
        if i == n {
            let k = max;
            if k <= 1 || k >= n {
                return false;
            }
            let blocks: Vec<BTreeSet<usize>> = (0..k).map(|b| (0..n).filter(|&p| labels[p] == b).collect()).collect();
            return g.generators().iter().all(|s| {
                blocks.iter().all(|b| {
                    let img: BTreeSet<usize> = b.iter().map(|&p| s.apply(p)).collect();
                    blocks.contains(&img)
                })
            });
        }
        for l in 0..=max {
            labels[i] = l;
            if rec(i + 1, n, labels, max.max(l + 1), g) {
                return true;
            }
        }
        false
    }
    let n = g.degree();
    let mut labels = vec![0; n];
    rec(1, n, &mut labels, 1, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_matches_closure(g in group_strategy()) {
        let elems = closure(&g);
        prop_assert_eq!(g.order(), elems.len() as u128);
        prop_assert!(elems.iter().all(|x| g.contains(x)));
    }

    #[test]
    fn primitivity_matches_partition_oracle(g in group_strategy()) {
        prop_assume!(g.is_transitive());
        let oracle = !has_nontrivial_blocks(&g);
        prop_assert_eq!(is_primitive(&g).unwrap(), oracle);
        prop_assert_eq!(higman_primitivity(&g).unwrap(), oracle);
    }

    #[test]
    fn suborbits_partition_and_pair(g in group_strategy()) {
        prop_assume!(g.is_transitive());
        let rep = g.suborbits(0).unwrap();
        let total: usize = rep.suborbits.iter().map(|s| s.size).sum();
        prop_assert_eq!(total, g.degree());
        for (i, s) in rep.suborbits.iter().enumerate() {
            let p = &rep.suborbits[s.paired];
            prop_assert_eq!(p.paired, i);
            prop_assert_eq!(p.size, s.size);
        }
    }

    #[test]
    fn theta_is_a_cocycle(seed in 0u64..1000, r in 2usize..=3) {
        let (s3, s2) = (catalog::symmetric(3), catalog::symmetric(2));
        let ball = TreeBall::build(3, 2, r, Side::V2).unwrap();
        let col = LegalColouring::random(&ball, seed);
        let t = treebox::truncated_universal_group_on(&ball, &col, &s3, &s2, 1_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = t.group.random_element(&mut rng);
        let h = t.group.random_element(&mut rng);
        for v in ball.interior() {
            let lhs = t.theta(&g.then(&h), v).unwrap();
            let rhs = t.theta(&g, v).unwrap().then(&t.theta(&h, g.apply(v)).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
        prop_assert!(t.admits(&g));
    }

    #[test]
    fn gamma_bcv_tree_is_biregular(k in 3usize..=5, m in 2usize..=3, r in 1usize..=3) {
        let g = graph::gamma_graph(&Graph::complete(k), m, r).unwrap();
        let d = graph::lobes_and_bcv_tree(&g.graph).unwrap();
        prop_assert_eq!(d.lobes.len(), g.lobes.len());
        for j in 0..d.lobes.len() {
            prop_assert_eq!(d.bcv_tree.neighbours(d.lobe_node(j)).len(), k);
        }
        for v in g.interior_points() {
            prop_assert_eq!(d.bcv_tree.neighbours(v).len(), m);
        }
    }

    #[test]
    fn ends_of_paths_grids_and_trees(n in 4usize..40, k in 6usize..=15, r in 4usize..=6) {
        let est = |g: &Graph| graph::ends_estimate(g, EndsParams::default()).unwrap().verdict;
        prop_assert_eq!(est(&Graph::path(2 * n + 1)), Ends::Two);
        let square = graph::cartesian_graph_product(&Graph::path(2 * k + 1), &Graph::path(2 * k + 1), 2000).unwrap();
        let centre = k * (2 * k + 1) + k;
        let dist = square.distances(centre, None);
        let ball: Vec<usize> = (0..square.len()).filter(|&v| dist[v] <= k).collect();
        prop_assert_eq!(est(&square.induced(&ball)), Ends::One);
        prop_assert_eq!(est(&Graph::complete(n)), Ends::Zero);
        let tree = graph::gamma_graph(&Graph::complete(3), 2, r).unwrap().graph;
        prop_assert_eq!(est(&tree), Ends::Many);
    }
}

fn primitive_atoms() -> Vec<GroupExpr> {
    [Atom::Symmetric(3), Atom::Symmetric(4), Atom::Alternating(4), Atom::Dihedral(10), Atom::Frobenius20, Atom::Symmetric(5)]
        .into_iter()
        .map(GroupExpr::atom)
        .collect()
}

fn top_atoms() -> Vec<GroupExpr> {
    [Atom::Symmetric(2), Atom::Cyclic(3), Atom::Symmetric(3)].into_iter().map(GroupExpr::atom).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn iterated_products_keep_sd_monotone(
        h in 0usize..6,
        fs in prop::collection::vec(0usize..3, 1..=3),
        ops in prop::collection::vec(any::<bool>(), 3),
    ) {
        let tops = top_atoms();
        let f: Vec<GroupExpr> = fs.iter().map(|&i| tops[i].clone()).collect();
        let pattern: Vec<ProductOp> = ops[..f.len()].iter().map(|&b| if b { ProductOp::Box } else { ProductOp::Wr }).collect();
        let e = decompose::build_iterated_product(primitive_atoms()[h].clone(), &f, &pattern).unwrap();
        // nodes past this degree take the formula path, which keeps cases fast
        let caps = Caps { degree: 700, ..Caps::default() };
        prop_assert!(decompose::expr_primitivity_report(&e, &caps).unwrap().primitive);
        let chain = decompose::sd_chain_with(&e, &caps).unwrap();
        prop_assert_eq!(chain.steps.len(), f.len() + 1);
        prop_assert!(chain.monotone(), "{:?}", chain);
    }
}

#[test]
fn wreath_orders() {
    for (_, g) in catalog::transitive_up_to_5() {
        for (_, h) in catalog::transitive_up_to_3() {
            let expected = g.order().pow(h.degree() as u32) * h.order();
            let imp = products::wreath_imprimitive(&g, &h).unwrap();
            let pa = products::wreath_product_action(&g, &h, 4096).unwrap();
            assert_eq!(imp.order(), expected);
            assert_eq!(pa.order(), expected);
        }
    }
}

#[test]
fn decompositions_satisfy_axioms() {
    for (_, g) in catalog::transitive_up_to_5().into_iter().filter(|(_, g)| g.degree() <= 4) {
        for (_, h) in catalog::transitive_up_to_3() {
            let w = products::wreath_product_action(&g, &h, 4096).unwrap();
            if w.degree() > 64 {
                continue;
            }
            let found = products::find_cartesian_decompositions(&w, 64).unwrap();
            assert!(found.contains(&CartesianDecomposition::coordinate(g.degree(), h.degree())));
            for d in found {
                assert!(d.satisfies_axiom(w.degree()));
                assert!(d.is_invariant_under(&w));
            }
        }
    }
}

#[test]
fn classification_is_consistent() {
    let caps = Caps::default();
    let mut exprs = Vec::new();
    for h in primitive_atoms() {
        for f in top_atoms() {
            exprs.push(GroupExpr::pwr(h.clone(), f.clone()));
            exprs.push(GroupExpr::wr(h.clone(), f.clone()));
            exprs.push(GroupExpr::boxed(h.clone(), f, Some(2)));
        }
        exprs.push(h);
    }
    for e in exprs {
        let rep = match decompose::classify(ClassifyInput::Expr(&e), &caps) {
            Ok(r) => r,
            Err(permbox::Error::CapExceeded { .. }) => continue,
            Err(err) => panic!("{e}: {err}"),
        };
        match rep.verdict {
            Verdict::Pa => assert!(rep.evidence.decomposition.is_some(), "{e}"),
            Verdict::BpCandidate => assert!(
                rep.evidence.conn_one.as_ref().is_some_and(|c| c.valid())
                    || rep.evidence.ends.as_ref().is_some_and(|v| v.verdict == Ends::Many),
                "{e}"
            ),
            Verdict::Fin => assert_eq!(rep.realization, "finite"),
            Verdict::Undetermined => {}
        }
        if matches!(e, GroupExpr::Wr(..)) {
            assert_eq!(rep.verdict, Verdict::Pa, "{e}");
        }
        if matches!(e, GroupExpr::Box { .. }) {
            assert_eq!(rep.verdict, Verdict::BpCandidate, "{e}");
        }
    }
}
