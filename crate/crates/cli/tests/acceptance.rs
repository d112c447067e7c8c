//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are still evaluated and printed; they
//! do not fail the run. Any other FAIL exits with status 1.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use permbox::blocks::{higman_primitivity, is_primitive};
use permbox::catalog;
use permbox::graph::{self, EndsParams, Ends, Graph};
use permbox::products::{self, CartesianDecomposition};
use permbox::treebox::{self, LegalColouring, Side, Site, TreeBall};
use permbox::{PermGroup, Permutation};

/// Criterion 2 asks for exactly one decomposition, but S3 Wr S2 on 9 points
/// preserves two (rows/columns and the two diagonal classes): the rook graph
/// K3 x K3 is self-complementary, so both of its orbital graphs are Hamming
/// graphs H(2, 3).
const KNOWN_FAILURES: &[usize] = &[2];

const TIME_LIMIT: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn s3wrs2() -> PermGroup {
    products::wreath_product_action(&catalog::symmetric(3), &catalog::symmetric(2), 4096).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut agree = 0;
    let mut total = 0;
    let mut mismatches = Vec::new();
    for (hn, h) in catalog::transitive_up_to_5() {
        for (fname, f) in catalog::transitive_up_to_3() {
            if products::pwr_degree(h.degree(), f.degree()).is_none_or(|n| n > 4096) {
                continue;
            }
            total += 1;
            let w = products::wreath_product_action(&h, &f, 4096).unwrap();
            let structural = products::wr_primitivity_predicate(&h, &f);
            if structural == is_primitive(&w).unwrap() {
                agree += 1;
            } else {
                mismatches.push(format!("{hn} Wr {fname}"));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        agree == total && total == 39 && t <= TIME_LIMIT,
        format!("wr_prim equivalence: {agree}/{total} pairs agree in {t:.2?} {mismatches:?}"),
    )
}

/// Every pair of partitions of 9 points into three 3-sets that meet
/// transversally and whose pair is preserved by the generators.
fn decomposition_oracle(g: &PermGroup) -> BTreeSet<Vec<Vec<Vec<usize>>>> {
    fn partitions(rest: &[usize], acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        let first = rest[0];
        for i in 1..rest.len() {
            for j in i + 1..rest.len() {
                let block = vec![first, rest[i], rest[j]];
                let remaining: Vec<usize> = rest.iter().copied().filter(|p| !block.contains(p)).collect();
                acc.push(block);
                partitions(&remaining, acc, out);
                acc.pop();
            }
        }
    }
    let mut all = Vec::new();
    partitions(&(0..9).collect::<Vec<_>>(), &mut Vec::new(), &mut all);
    let image = |p: &Vec<Vec<usize>>, s: &Permutation| -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = p
            .iter()
            .map(|b| {
                let mut b: Vec<usize> = b.iter().map(|&x| s.apply(x)).collect();
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        blocks
    };
    let mut found = BTreeSet::new();
    for a in 0..all.len() {
        for b in a + 1..all.len() {
            let (p, q) = (&all[a], &all[b]);
            let transversal = p
                .iter()
                .all(|x| q.iter().all(|y| x.iter().filter(|v| y.contains(v)).count() == 1));
            if !transversal {
                continue;
            }
            let pair: BTreeSet<Vec<Vec<usize>>> = [p.clone(), q.clone()].into();
            let invariant = g.generators().iter().all(|s| {
                let moved: BTreeSet<Vec<Vec<usize>>> = [image(p, s), image(q, s)].into();
                moved == pair
            });
            if invariant {
                found.insert(pair.into_iter().collect());
            }
        }
    }
    found
}

fn criterion_2() -> Outcome {
    let g = s3wrs2();
    let rep = g.suborbits(0).unwrap();
    let basics = g.degree() == 9 && g.order() == 72 && rep.sizes() == vec![1, 4, 4] && is_primitive(&g).unwrap();
    let found = products::find_cartesian_decompositions(&g, 64).unwrap();
    let found_set: BTreeSet<Vec<Vec<Vec<usize>>>> = found.iter().map(|d| d.partitions.clone()).collect();
    let oracle = decomposition_oracle(&g);
    let coordinate = CartesianDecomposition::coordinate(3, 2);
    let exactly_coordinate = found == vec![coordinate];
    outcome(
        basics && found_set == oracle && exactly_coordinate,
        format!(
            "S3 Wr S2: degree {} order {} subdegrees {:?}; search found {} decomposition(s), oracle {}; exactly the coordinate one: {}",
            g.degree(),
            g.order(),
            rep.sizes(),
            found.len(),
            oracle.len(),
            exactly_coordinate
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let (s3, s2) = (catalog::symmetric(3), catalog::symmetric(2));
    let t = treebox::truncated_universal_group(&s3, &s2, 3).unwrap();
    let local = t
        .ball
        .interior()
        .into_iter()
        .all(|v| treebox::local_action_verify(&t, Site::Vertex(v)).unwrap().equal_to_local_group);
    let pa = treebox::box_point_action(&t).unwrap();
    let sd_h = s3.sd().unwrap();
    let el = start.elapsed();
    outcome(
        local && pa.transitive_on_interior && pa.sd == Some(4) && sd_h == 2 && el <= TIME_LIMIT,
        format!(
            "U(S3,S2) r=3: locally prescribed {local}, transitive on interior V2 {}, sd {:?} vs sd(S3) {sd_h}, {el:.2?}",
            pa.transitive_on_interior, pa.sd
        ),
    )
}

fn criterion_4() -> Outcome {
    let (s3, s2) = (catalog::symmetric(3), catalog::symmetric(2));
    let ball = TreeBall::build(3, 2, 3, Side::V2).unwrap();
    let cols: Vec<LegalColouring> = (1..=5).map(|seed| LegalColouring::random(&ball, seed)).collect();
    let mut ok = 0;
    let mut total = 0;
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            total += 1;
            if treebox::colouring_conjugacy(&ball, &cols[i], &cols[j], &s3, &s2).is_ok_and(|c| c.verified()) {
                ok += 1;
            }
        }
    }
    outcome(ok == total && total == 10, format!("colouring independence: {ok}/{total} pairs conjugate both ways"))
}

fn criterion_5() -> Outcome {
    let g = graph::gamma_graph(&Graph::complete(4), 3, 2).unwrap();
    let d = graph::lobes_and_bcv_tree(&g.graph).unwrap();
    let t = &d.bcv_tree;
    let n = d.vertex_count;
    let (mut lobe_vals, mut point_vals) = (BTreeSet::new(), BTreeSet::new());
    for v in 0..t.len() {
        let deg = t.neighbours(v).len();
        if deg <= 1 {
            continue;
        }
        if v >= n {
            lobe_vals.insert(deg);
        } else {
            point_vals.insert(deg);
        }
    }
    let pass = lobe_vals == BTreeSet::from([4]) && point_vals == BTreeSet::from([3]);
    outcome(
        pass,
        format!("BCV tree of gamma(K4,3) depth 2: interior lobe valencies {lobe_vals:?}, interior point valencies {point_vals:?}"),
    )
}

fn criterion_6() -> Outcome {
    let est = |g: &Graph| graph::ends_estimate(g, EndsParams::default()).unwrap().verdict;
    let grid = graph::cartesian_graph_product(&Graph::path(20), &Graph::path(20), 400).unwrap();
    let gamma = graph::gamma_graph(&Graph::complete(3), 2, 5).unwrap().graph;
    let got = [est(&Graph::complete(5)), est(&Graph::path(41)), est(&grid), est(&gamma)];
    let want = [Ends::Zero, Ends::Two, Ends::One, Ends::Many];
    outcome(got == want, format!("ends K5, P41, P20xP20, gamma(K3,2)@5: {got:?}"))
}

fn criterion_7() -> Outcome {
    let (s3, s2) = (catalog::symmetric(3), catalog::symmetric(2));
    let g = s3wrs2();
    let comps = products::product_action_components(&s3, &s2).unwrap();
    let emb = products::pa_embedding(&g, comps, 0).unwrap();
    let c = emb.verify(None).unwrap();
    outcome(
        c.all() && c.elements_checked == 72,
        format!(
            "PA embedding: relation on {} elements {}, phi_hat(M)=K^2 {}, ActionOfPhiGa {}, ActionOfPhiX {}",
            c.elements_checked, c.relation_holds, c.phi_hat_m_is_k_power, c.action_of_phi_ga_holds, c.action_of_phi_x_holds
        ),
    )
}

fn criterion_8() -> Outcome {
    let cat = catalog::transitive_catalog(8);
    let bad: Vec<String> = cat
        .iter()
        .filter(|(_, g)| is_primitive(g).unwrap() != higman_primitivity(g).unwrap())
        .map(|(n, _)| n.clone())
        .collect();
    outcome(bad.is_empty(), format!("Higman cross-check: {} groups, disagreements {bad:?}", cat.len()))
}

fn criterion_9() -> Outcome {
    let (s3, s2) = (catalog::symmetric(3), catalog::symmetric(2));
    let g = s3wrs2();
    let emb = products::pa_embedding(&g, products::product_action_components(&s3, &s2).unwrap(), 0).unwrap();
    let image = emb.image_group().unwrap();
    let gamma = emb.y.iter().position(|&p| p == emb.gamma).unwrap();
    let delta = (gamma + 1) % emb.y.len();
    let k = emb.y.len();
    let sigma = graph::orbital_digraph(&image, products::encode(&[gamma, gamma], k), products::encode(&[delta, gamma], k))
        .unwrap()
        .symmetrize();
    // K3 x K3 directly: tuples at Hamming distance one
    let mut edges = Vec::new();
    for a in 0..k * k {
        for b in a + 1..k * k {
            let (x, y) = (products::decode(a, k, 2), products::decode(b, k, 2));
            if x.iter().zip(&y).filter(|(p, q)| p != q).count() == 1 {
                edges.push((a, b));
            }
        }
    }
    let rook = Graph::new(k * k, &edges).unwrap();
    let cart = graph::orbital_cartesian_check(&emb.k_on_y, gamma, delta, &image, 2).unwrap();
    outcome(
        sigma == rook && cart.equal,
        format!("orbital graph of the embedded group: {} edges, equals K3xK3: {}", sigma.edges().len(), sigma == rook),
    )
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("analyze_s3_pwr_s2.json", &["analyze", "(S(3) pwr S(2))"]),
    ("localaction_s3_box_s2.json", &["localaction", "--seed", "7", "(S(3) box S(2))@3"]),
    ("ends_gamma_k3_2.json", &["ends", "gamma(K3,2)@5"]),
];

fn criterion_10() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let run = |args: &[&str]| -> Option<Vec<u8>> {
        let out = Command::new(env!("CARGO_BIN_EXE_permbox")).args(args).output().ok()?;
        out.status.success().then_some(out.stdout)
    };
    let mut notes = Vec::new();
    let mut pass = true;
    for (file, args) in GOLDEN {
        let (a, b) = (run(args), run(args));
        let golden = std::fs::read(dir.join(file)).ok();
        let ok = a.is_some() && a == b && a == golden;
        pass &= ok;
        notes.push(format!("{file}: {}", if ok { "identical" } else { "differs" }));
    }
    outcome(pass, format!("CLI golden outputs, two runs each: {}", notes.join(", ")))
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut unexpected = 0;
    for (i, c) in criteria.iter().enumerate() {
        let id = i + 1;
        let o = c();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{tag} {id}: {}", o.detail);
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
