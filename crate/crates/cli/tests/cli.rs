//! Parser round trips and end-to-end runs of the binary.

use std::process::Command;

use permbox::decompose::{Atom, GroupExpr};
use permbox_cli::parse::{parse_expr, parse_graph_expr, GraphExpr};
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = GroupExpr> {
    prop_oneof![
        (2usize..=6).prop_map(Atom::Symmetric),
        (3usize..=6).prop_map(Atom::Alternating),
        (2usize..=6).prop_map(Atom::Cyclic),
        prop::sample::select(vec![6usize, 8, 10]).prop_map(Atom::Dihedral),
        Just(Atom::KleinFour),
        Just(Atom::Frobenius20),
    ]
    .prop_map(GroupExpr::atom)
}

fn finite() -> impl Strategy<Value = GroupExpr> {
    atom().prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| GroupExpr::pwr(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| GroupExpr::wr(a, b)),
        ]
    })
}

fn expr() -> impl Strategy<Value = GroupExpr> {
    finite().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), finite()).prop_map(|(a, b)| GroupExpr::pwr(a, b)),
            (inner.clone(), finite()).prop_map(|(a, b)| GroupExpr::wr(a, b)),
            (inner, finite(), prop::option::of(2usize..=5)).prop_map(|(a, b, r)| GroupExpr::boxed(a, b, r)),
        ]
    })
}

fn graph_expr() -> impl Strategy<Value = GraphExpr> {
    let leaf = prop_oneof![
        (1usize..=8).prop_map(GraphExpr::Complete),
        (1usize..=8).prop_map(GraphExpr::Path),
        (3usize..=8).prop_map(GraphExpr::Cycle),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), 1usize..=4, prop::option::of(1usize..=4)).prop_map(|(l, m, g)| GraphExpr::Gamma {
                lambda: Box::new(l),
                m,
                generations: g,
            }),
            (inner.clone(), inner).prop_map(|(a, b)| GraphExpr::Cart(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #[test]
    fn group_round_trip(e in expr()) {
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn graph_round_trip(g in graph_expr()) {
        prop_assert_eq!(parse_graph_expr(&g.to_string()).unwrap(), g);
    }
}

fn permbox(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_permbox")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn exit_codes() {
    assert_eq!(permbox(&["primitivity", "S(3) pwr S(2)"]).0, 0);
    let (code, _, err) = permbox(&["analyze", "S(3) pwr S(2) wr S(2)"]);
    assert_eq!(code, 2);
    assert!(err.contains("parentheses"), "{err}");
    assert_eq!(permbox(&["analyze", "S("]).0, 2);
    assert_eq!(permbox(&["suborbits", "--cap-degree", "20", "S(5) pwr S(3)"]).0, 3);
    assert_eq!(permbox(&["ends", "gamma(P3,2)@2"]).0, 4);
    assert_eq!(permbox(&["analyze", "--format", "dot", "S(3)"]).0, 2);
}

#[test]
fn writes_to_out_file() {
    let dir = std::env::temp_dir().join(format!("permbox-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s3.json");
    let (code, stdout, _) = permbox(&["suborbits", "--out", path.to_str().unwrap(), "S(3) pwr S(2)"]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema"], "permbox.suborbits/1");
    assert_eq!(doc["subdegrees"], serde_json::json!([1, 4, 4]));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn renders_dot() {
    let (code, dot, _) = permbox(&["render", "K4"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("graph G {"), "{dot}");
    assert_eq!(dot.matches(" -- ").count(), 6);
    let (code, bcv, _) = permbox(&["render", "--bcv", "gamma(K3,2)@2"]);
    assert_eq!(code, 0);
    assert_eq!(bcv.matches("shape=box").count(), 6);
}
