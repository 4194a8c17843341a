use std::path::PathBuf;

use tiling_core::engine::{census, generate, generate_from, predicted_census, substitute_once, substitution_matrix, EngineError};
use tiling_core::exact::{Placement, Point};
use tiling_core::model::{read_patch, write_patch, Patch, PlacedTile};
use tiling_core::ruledsl::{parse_ruleset, RuleSet};

fn rules(name: &str) -> RuleSet {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    parse_ruleset(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn square4_counts_are_powers_of_four() {
    let rs = rules("square4.rules");
    assert_eq!(substitution_matrix(&rs), vec![vec![4]]);
    for n in 0..=4 {
        assert_eq!(generate("S", n, &rs).unwrap().len(), 4usize.pow(n as u32));
    }
}

#[test]
fn census_matches_matrix_powers() {
    for f in ["square-triangle.rules", "one-triangle.rules"] {
        let rs = rules(f);
        for v in &rs.registry.variants {
            let mut p = generate(&v.id, 0, &rs).unwrap();
            for n in 1..=2 {
                p = substitute_once(&p, &rs).unwrap();
                let want = predicted_census(&rs, &v.id, n).unwrap();
                assert_eq!(census(&p, &rs).unwrap(), want, "{f} {} n={n}", v.id);
            }
        }
    }
}

/// Leading eigenvalue by power iteration.
fn perron(m: &[Vec<u64>]) -> f64 {
    let n = m.len();
    let mut x = vec![1.0f64; n];
    let mut lam = 0.0;
    for _ in 0..500 {
        let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] as f64 * x[j]).sum()).collect();
        let s: f64 = y.iter().sum();
        lam = s / x.iter().sum::<f64>();
        x = y.iter().map(|v| v / s).collect();
    }
    lam
}

#[test]
fn growth_rate_is_the_area_inflation() {
    // tile counts grow like the squared inflation factor (2 + √3)² = 7 + 4√3
    let want = 7.0 + 4.0 * 3f64.sqrt();
    for f in ["square-triangle.rules", "one-triangle.rules"] {
        let got = perron(&substitution_matrix(&rules(f)));
        assert!((got - want).abs() < 1e-9, "{f}: {got}");
    }
}

#[test]
fn generation_is_deterministic_and_round_trips() {
    let rs = rules("one-triangle.rules");
    let a = write_patch(&generate("t3_r2", 2, &rs).unwrap());
    let b = write_patch(&generate("t3_r2", 2, &rs).unwrap());
    assert_eq!(a, b);
    let back = read_patch(&a).unwrap();
    assert_eq!(write_patch(&back), a);
}

#[test]
fn seed_placement_moves_the_whole_patch() {
    let rs = rules("square-triangle.rules");
    let shift = Point::ints(5, -3);
    let a = generate("s1", 2, &rs).unwrap();
    let b = generate_from(PlacedTile::new("s1", Placement::translation(shift.clone())), 2, &rs).unwrap();
    // scale-mode rules inflate the seed offset along with the patch
    let moved = Placement::translation(shift.scale(&rs.inflation).scale(&rs.inflation));
    let mut a2: Vec<PlacedTile> = a.tiles.iter().map(|t| PlacedTile::new(t.variant.clone(), moved.compose(&t.place))).collect();
    let mut b2 = b.tiles.clone();
    let key = |t: &PlacedTile| format!("{} {:?}", t.variant, t.place);
    a2.sort_by_key(key);
    b2.sort_by_key(key);
    assert_eq!(a2, b2);
}

#[test]
fn errors_name_the_offender() {
    let rs = rules("square4.rules");
    match generate("Nope", 1, &rs) {
        Err(EngineError::UnknownSeed(s)) => assert_eq!(s, "Nope"),
        other => panic!("{other:?}"),
    }
    let stray = Patch::new("square4", vec![PlacedTile::new("Q1", Placement::identity())]);
    assert!(matches!(substitute_once(&stray, &rs), Err(EngineError::MissingRule(v)) if v == "Q1"));
}
