use std::path::PathBuf;

use tiling_core::derive::{check_involution, derive, Derivation, DERIVED_NAME};
use tiling_core::model::ShapeKind;
use tiling_core::reshape::parse_reshape_map;
use tiling_core::ruledsl::{parse_ruleset, serialize_ruleset, validate_ruleset, RuleSet};

fn text(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    std::fs::read_to_string(p).unwrap()
}

fn source() -> RuleSet {
    parse_ruleset(&text("square-triangle.rules")).unwrap()
}

fn derivation() -> Derivation {
    let map = parse_reshape_map(&text("reshape.map")).unwrap();
    derive(&source(), &map).unwrap()
}

#[test]
fn orbit_expansion_multiplicities() {
    let d = derivation();
    assert_eq!(d.expansion.rules.rules.len(), 28);
    let got: Vec<usize> = ["t1", "t2", "t3", "t4", "t5", "s1"]
        .iter()
        .map(|v| d.expansion.class_count(v))
        .collect();
    assert_eq!(got, vec![2, 2, 6, 6, 6, 6]);
    for v in &d.expansion.rules.registry.variants {
        let (src, _) = d.expansion.source_of(&v.id).unwrap();
        assert!(v.id.starts_with(src), "{} from {src}", v.id);
    }
}

#[test]
fn cutting_adds_one_rule_per_square_class() {
    let d = derivation();
    assert_eq!(d.cut.rules.len(), 34);
    let square_parents = d
        .intermediate
        .rules
        .rules
        .iter()
        .filter(|r| {
            let (_, proto) = d.intermediate.rules.registry.shape_of(&r.parent).unwrap();
            proto.kind == ShapeKind::Square
        })
        .count();
    assert_eq!(d.intermediate.rules.rules.len(), 28);
    assert_eq!(square_parents, 6);
    assert_eq!(d.intermediate.rules.rules.len() + square_parents, d.target.rules.rules.len());
}

#[test]
fn derived_set_uses_one_triangle_in_four_orientations() {
    let d = derivation();
    let t = &d.target.rules;
    assert_eq!(t.name, DERIVED_NAME);
    let used: std::collections::BTreeSet<&str> = t.registry.variants.iter().map(|v| v.prototile.as_str()).collect();
    assert_eq!(used.into_iter().collect::<Vec<_>>(), vec!["R"]);
    for v in &t.registry.variants {
        assert!(v.base_rot % 3 == 0 && !v.base_flip, "{}: rot {}", v.id, v.base_rot);
    }
    for r in &t.rules {
        for c in &r.children {
            assert!(c.place.rot % 6 == 0 && !c.place.flip, "{} child {}", r.parent, c.variant);
        }
    }
}

#[test]
fn seventeen_colour_swap_pairs() {
    let d = derivation();
    assert_eq!(d.target.rules.pairs.len(), 17);
    assert!(check_involution(&d.target.rules).is_empty());
    assert!(check_involution(&d.expansion.rules).is_empty());
    assert_eq!(d.expansion.rules.pairs.len(), 14);
}

#[test]
fn every_stage_validates() {
    let d = derivation();
    for (name, rs) in [
        ("source", &source()),
        ("expansion", &d.expansion.rules),
        ("cut", &d.cut),
        ("intermediate", &d.intermediate.rules),
        ("target", &d.target.rules),
    ] {
        let rep = validate_ruleset(rs);
        let fails: Vec<String> = rep.failures().map(|f| f.to_string()).collect();
        assert!(fails.is_empty(), "{name}: {fails:#?}");
    }
}

#[test]
fn bundled_one_triangle_file_is_the_derived_set() {
    let d = derivation();
    assert_eq!(serialize_ruleset(&d.target.rules), text("one-triangle.rules"));
}

#[test]
fn derivation_is_deterministic() {
    let a = serialize_ruleset(&derivation().target.rules);
    let b = serialize_ruleset(&derivation().target.rules);
    assert_eq!(a, b);
}
