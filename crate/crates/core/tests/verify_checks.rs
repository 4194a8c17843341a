use std::collections::BTreeMap;
use std::path::PathBuf;

use tiling_core::engine::generate;
use tiling_core::exact::{Placement, Point, Scalar};
use tiling_core::model::{Patch, PlacedTile};
use tiling_core::ruledsl::{parse_ruleset, RuleSet};
use tiling_core::verify::*;

fn rules(name: &str) -> RuleSet {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    parse_ruleset(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const TOY: &str = "ruleset toy
regime free
inflation 2
prototile R triangle vertices (0,0) (1,0) (0,1)
prototile Q square vertices (0,0) (1,0) (1,1) (0,1)
variant A prototile R rot 0 decor green-white marks X+ Y+ Z+
variant B prototile R rot 0 decor grey-black marks X- Y- Z-
variant P prototile Q rot 0 decor yellow marks M+ N+ N+ M-
variant O prototile Q rot 0 decor pink marks M+ N+ N+ M+
variant I prototile Q rot 0 decor pink marks M- N+ N+ M-
variant U prototile Q rot 0 decor yellow
rule A -> A @ rot 0 (0,0) ; A @ rot 0 (1,0) ; A @ rot 0 (0,1) ; B @ rot 6 (1,1) ;
rule B -> B @ rot 0 (0,0) ; B @ rot 0 (1,0) ; B @ rot 0 (0,1) ; A @ rot 6 (1,1) ;
rule P -> P @ rot 0 (0,0) ;
rule O -> O @ rot 0 (0,0) ;
rule I -> I @ rot 0 (0,0) ;
rule U -> U @ rot 0 (0,0) ;
";

fn toy() -> RuleSet {
    parse_ruleset(TOY).unwrap()
}

fn tile(v: &str, rot: u8, x: Scalar, y: Scalar) -> PlacedTile {
    PlacedTile::new(v, Placement::new(rot, false, Point::new(x, y)))
}

fn int(n: i64) -> Scalar {
    Scalar::int(n)
}

/// Two triangles on the unit square's diagonal, the first shifted by `dx`.
fn unit_square(second: &str, dx: Scalar) -> Patch {
    Patch::new("toy", vec![tile("A", 0, dx, int(0)), tile(second, 6, int(1), int(1))])
}

#[test]
fn two_halves_of_a_square_pass() {
    let rs = toy();
    let p = unit_square("B", int(0));
    assert!(check_planarity(&p, &rs.registry).unwrap().passed());
    assert!(check_edge_to_edge(&p, &rs.registry).unwrap().passed());
}

#[test]
fn shifted_half_overlaps() {
    let rs = toy();
    let p = unit_square("B", Scalar::frac(1, 2));
    let r = check_planarity(&p, &rs.registry).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert_eq!(r.witnesses, vec!["overlap: tiles 0 and 1".to_string()]);
}

#[test]
fn partial_side_is_reported() {
    let rs = toy();
    let p = Patch::new("toy", vec![tile("A", 0, int(0), int(0)), tile("A", 0, Scalar::frac(1, 2), int(-1))]);
    assert!(check_planarity(&p, &rs.registry).unwrap().passed());
    let r = check_edge_to_edge(&p, &rs.registry).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.witnesses[0].contains("partial side"), "{r}");
}

#[test]
fn hole_is_a_gap() {
    let rs = rules("square4.rules");
    let mut p = generate("S", 2, &rs).unwrap();
    let res = p.resolve_all(&rs.registry).unwrap();
    // drop the tile whose corners are all interior: (1,1)-(2,2)
    let k = res.iter().position(|r| r.pts.contains(&Point::ints(1, 1)) && r.pts.contains(&Point::ints(2, 2))).unwrap();
    p.tiles.remove(k);
    let r = check_planarity(&p, &rs.registry).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.witnesses.iter().any(|w| w.starts_with("gap")), "{r}");
}

fn pinwheel(variants: [&str; 4]) -> Patch {
    let tiles = variants.iter().enumerate().map(|(k, v)| tile(v, 3 * k as u8, int(0), int(0))).collect();
    Patch::new("toy", tiles)
}

#[test]
fn consistent_arrows_pass() {
    let rs = toy();
    let r = check_arrow_condition(&pinwheel(["P", "P", "P", "P"]), &rs.registry).unwrap();
    assert!(r.passed(), "{r}");
}

#[test]
fn mixed_turning_fails_at_the_vertex() {
    let rs = toy();
    let r = check_arrow_condition(&pinwheel(["O", "I", "O", "I"]), &rs.registry).unwrap();
    assert_eq!(r.witnesses, vec!["mixed turning at vertex (0, 0)".to_string()]);
}

#[test]
fn reversed_mark_is_a_mismatch() {
    let rs = toy();
    let r = check_arrow_condition(&unit_square("A", int(0)), &rs.registry).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert!(r.witnesses[0].starts_with("mismatch on edge"), "{r}");
    assert!(check_arrow_condition(&unit_square("B", int(0)), &rs.registry).unwrap().passed());
}

#[test]
fn unmarked_patch_is_not_applicable() {
    let rs = toy();
    let r = check_arrow_condition(&pinwheel(["U", "U", "U", "U"]), &rs.registry).unwrap();
    assert_eq!(r.status, Status::NotApplicable);
}

#[test]
fn census_of_bundled_sets() {
    let one = rules("one-triangle.rules");
    for v in ["t1_r0", "s1_r2b"] {
        let c = strip_and_census(&generate(v, 3, &one).unwrap(), &one.registry).unwrap();
        assert_eq!(c.congruence_classes, 1);
        assert!(c.orientation_classes <= 4);
    }
    let st = rules("square-triangle.rules");
    let c = strip_and_census(&generate("s1", 2, &st).unwrap(), &st.registry).unwrap();
    assert_eq!(c.congruence_classes, 2);
}

#[test]
fn congruence_ignores_rotation_and_reflection() {
    let tri = |pts: &[(i64, i64)]| pts.iter().map(|&(x, y)| Point::ints(x, y)).collect::<Vec<_>>();
    let a = tri(&[(0, 0), (1, 0), (0, 1)]);
    let b = tri(&[(5, 5), (5, 4), (6, 5)]);
    let c = tri(&[(0, 0), (0, 1), (1, 0)]);
    let d = tri(&[(0, 0), (2, 0), (0, 1)]);
    assert_eq!(congruence_key(&a), congruence_key(&b));
    assert_eq!(congruence_key(&a), congruence_key(&c));
    assert_ne!(congruence_key(&a), congruence_key(&d));
    assert_ne!(orientation_key(&a), orientation_key(&b));
}

#[test]
fn square_grid_stars() {
    let rs = rules("square4.rules");
    let stars = vertex_stars(&generate("S", 2, &rs).unwrap(), &rs.registry).unwrap();
    let want: BTreeMap<String, usize> = [("square:90 square:90 square:90 square:90".to_string(), 9)].into();
    assert_eq!(stars, want);
    assert!(vertex_stars(&generate("S", 0, &rs).unwrap(), &rs.registry).unwrap().is_empty());
}

#[test]
fn one_triangle_star_snapshot() {
    let rs = rules("one-triangle.rules");
    let stars = vertex_stars(&generate("t1_r0", 3, &rs).unwrap(), &rs.registry).unwrap();
    let text: String = stars.iter().map(|(s, n)| format!("{n}\t{s}\n")).collect();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots/one_triangle_t1_r0_n3.stars");
    match std::fs::read_to_string(&path) {
        Ok(want) => assert_eq!(text, want),
        Err(_) => std::fs::write(&path, text).unwrap(),
    }
}

#[test]
fn periods_of_the_square_grid() {
    let rs = rules("square4.rules");
    let p = generate("S", 3, &rs).unwrap();
    let w = find_periods(&p, &rs.registry, &Scalar::frac(1, 3)).unwrap();
    assert!(w.contains(&Point::ints(1, 0)) && w.contains(&Point::ints(0, -1)), "{w:?}");
    let single = generate("S", 0, &rs).unwrap();
    assert!(find_periods(&single, &rs.registry, &Scalar::frac(1, 3)).unwrap().is_empty());
}

#[test]
fn complexity_of_simple_patches() {
    let rs = rules("square4.rules");
    let p = generate("S", 3, &rs).unwrap();
    assert_eq!(patch_complexity(&p, &rs.registry, &int(2)).unwrap(), 1);
    let single = generate("S", 0, &rs).unwrap();
    assert_eq!(patch_complexity(&single, &rs.registry, &int(1)).unwrap(), 0);
}

#[test]
fn complexity_grows_with_the_patch() {
    let rs = rules("one-triangle.rules");
    let r = int(2);
    let c3 = patch_complexity(&generate("t1_r0", 3, &rs).unwrap(), &rs.registry, &r).unwrap();
    let c4 = patch_complexity(&generate("t1_r0", 4, &rs).unwrap(), &rs.registry, &r).unwrap();
    assert!(c3 > 0 && c4 >= c3, "{c3} then {c4}");
}

#[test]
fn reports_serialize() {
    let rs = toy();
    let r = check_planarity(&unit_square("B", Scalar::frac(1, 2)), &rs.registry).unwrap();
    assert_eq!(
        r.to_json(),
        r#"{"check":"planarity","status":"fail","witnesses":["overlap: tiles 0 and 1"]}"#
    );
}
