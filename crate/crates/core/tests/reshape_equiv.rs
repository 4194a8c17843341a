use std::path::PathBuf;

use tiling_core::derive::{derive, Derivation};
use tiling_core::engine::{generate, substitute_once};
use tiling_core::exact::Point;
use tiling_core::model::{resolve_vertices, Patch};
use tiling_core::reshape::{classify_edges, parse_reshape_map, reshape_patch, ReshapeError, ReshapeMap};
use tiling_core::ruledsl::{parse_ruleset, RuleSet};
use tiling_core::verify::{check_edge_to_edge, check_planarity};

fn text(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn setup() -> (RuleSet, ReshapeMap, Derivation) {
    let src = parse_ruleset(&text("square-triangle.rules")).unwrap();
    let map = parse_reshape_map(&text("reshape.map")).unwrap();
    let d = derive(&src, &map).unwrap();
    (src, map, d)
}

/// Tiles as (variant, polygon from its least vertex), the whole patch moved
/// so that its least vertex is the origin; sorted.
fn shapes(p: &Patch, rs: &RuleSet, keep_variant: bool) -> Vec<(String, Vec<Point>)> {
    let polys: Vec<Vec<Point>> = p
        .tiles
        .iter()
        .map(|t| {
            let mut q = resolve_vertices(t, &rs.registry).unwrap();
            let k = (0..q.len()).min_by(|&a, &b| q[a].cmp(&q[b])).unwrap();
            q.rotate_left(k);
            q
        })
        .collect();
    let o = polys.iter().flatten().min().unwrap().clone();
    let mut out: Vec<(String, Vec<Point>)> = p
        .tiles
        .iter()
        .zip(polys)
        .map(|(t, q)| {
            let v = if keep_variant { t.variant.clone() } else { String::new() };
            (v, q.iter().map(|x| x.sub(&o)).collect())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn reshaping_commutes_with_substitution() {
    let (src, map, d) = setup();
    let tgt = &d.target.rules;
    for v in &src.registry.variants {
        let mut direct = reshape_patch(&generate(&v.id, 0, &src).unwrap(), &d, &map, true).unwrap();
        for n in 1..=2 {
            direct = substitute_once(&direct, tgt).unwrap();
            let reshaped = reshape_patch(&generate(&v.id, n, &src).unwrap(), &d, &map, true).unwrap();
            // decorations agree too, not just the stripped polygons
            assert_eq!(shapes(&reshaped, tgt, true), shapes(&direct, tgt, true), "{} n={n}", v.id);
        }
    }
}

#[test]
fn reshaped_patch_is_a_tiling() {
    let (src, map, d) = setup();
    let p = reshape_patch(&generate("t2", 2, &src).unwrap(), &d, &map, true).unwrap();
    let reg = &d.target.rules.registry;
    assert!(check_planarity(&p, reg).unwrap().passed());
    assert!(check_edge_to_edge(&p, reg).unwrap().passed());
}

#[test]
fn whole_square_reshape_halves_nothing() {
    let (src, map, d) = setup();
    let p = generate("s1", 1, &src).unwrap();
    let whole = reshape_patch(&p, &d, &map, false).unwrap();
    let cut = reshape_patch(&p, &d, &map, true).unwrap();
    let squares = p.tiles.iter().filter(|t| t.variant == "s1").count();
    assert_eq!(whole.len(), p.len());
    assert_eq!(cut.len(), p.len() + squares);
}

#[test]
fn every_edge_gets_one_of_six_labels() {
    let (src, map, _) = setup();
    let p = generate("s1", 2, &src).unwrap();
    let edges = classify_edges(&p, &src, &map).unwrap();
    let mut seen: Vec<String> = edges.iter().map(|e| e.label.clone().unwrap()).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen, vec!["a", "b", "c", "d", "e", "f"]);
}

#[test]
fn map_errors_carry_positions() {
    let good = text("reshape.map");
    let bad = good.replacen("angleclass 3", "angleclass 9", 1);
    let line = bad.lines().position(|l| l.contains("angleclass 9")).unwrap() + 1;
    match parse_reshape_map(&bad) {
        Err(ReshapeError::Syntax(e)) => assert_eq!(e.line, line, "{e}"),
        other => panic!("{other:?}"),
    }
}
