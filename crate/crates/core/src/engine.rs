//! Iterated substitution and the substitution matrix.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::exact::{Placement, Point};
use crate::model::{canonicalize, full_placement, ModelError, Patch, PlacedTile};
use crate::ruledsl::RuleSet;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no rule for variant '{0}'")]
    MissingRule(String),
    #[error("unknown seed variant '{0}'")]
    UnknownSeed(String),
    #[error("anchors disagree at vertex {0}")]
    Closure(Point),
    #[error("patch is not connected; glued substitution needs a connected patch")]
    Disconnected,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Replace every tile by the children of its rule.
pub fn substitute_once(p: &Patch, rs: &RuleSet) -> Result<Patch, EngineError> {
    for t in &p.tiles {
        if rs.rule(&t.variant).is_none() {
            return Err(EngineError::MissingRule(t.variant.clone()));
        }
    }
    let frames = if rs.glue_mode() {
        glue_frames(p, rs)?
    } else {
        p.tiles
            .iter()
            .map(|t| {
                Placement::new(t.place.rot, t.place.flip, t.place.shift.scale(&rs.inflation))
            })
            .collect()
    };
    let mut out = Vec::new();
    for (t, frame) in p.tiles.iter().zip(&frames) {
        let rule = rs.rule(&t.variant).expect("checked");
        for c in &rule.children {
            out.push(PlacedTile::new(c.variant.clone(), frame.compose(&c.place)));
        }
    }
    Ok(canonicalize(&Patch::new(rs.name.clone(), out), &rs.registry)?)
}

/// Rule-frame placement for every tile when children are glued by anchors.
///
/// Each tile's corners go to its rule's anchors under the tile's own
/// rotation plus a translation. Translations are fixed by walking shared
/// vertices outward from the origin (or from the first tile at zero
/// translation when the origin is not a vertex), and every shared vertex
/// must receive the same image from all of its tiles.
fn glue_frames(p: &Patch, rs: &RuleSet) -> Result<Vec<Placement>, EngineError> {
    let n = p.tiles.len();
    let mut corners: Vec<Vec<Point>> = Vec::with_capacity(n);
    let mut at: HashMap<Point, Vec<(usize, usize)>> = HashMap::new();
    for (i, t) in p.tiles.iter().enumerate() {
        let (v, proto) = rs.registry.shape_of(&t.variant)?;
        let full = full_placement(t, v);
        let cs: Vec<Point> = proto.vertices.iter().map(|q| full.apply(q)).collect();
        for (k, c) in cs.iter().enumerate() {
            at.entry(c.clone()).or_default().push((i, k));
        }
        corners.push(cs);
    }
    let anchors: Vec<Vec<Point>> = p.tiles.iter().map(|t| rs.anchors(&t.variant)).collect();
    let mut image: HashMap<Point, Point> = HashMap::new();
    let mut frame: Vec<Option<Placement>> = vec![None; n];
    let mut queue = VecDeque::new();

    let origin = Point::origin();
    let start = at.get(&origin).and_then(|v| v.first().copied());
    if n == 0 {
        return Ok(Vec::new());
    }
    let (t0, k0, img0) = match start {
        Some((i, k)) => (i, k, origin.clone()),
        None => {
            let s = p.tiles[0].place.sym();
            (0, 0, s.apply(&anchors[0][0]))
        }
    };
    settle(t0, k0, &img0, p, &corners, &anchors, &mut frame, &mut image)?;
    queue.push_back(t0);
    while let Some(i) = queue.pop_front() {
        for c in &corners[i] {
            let img = image[c].clone();
            for &(j, k) in &at[c] {
                if frame[j].is_none() {
                    settle(j, k, &img, p, &corners, &anchors, &mut frame, &mut image)?;
                    queue.push_back(j);
                }
            }
        }
    }
    frame
        .into_iter()
        .map(|f| f.ok_or(EngineError::Disconnected))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn settle(
    i: usize,
    k: usize,
    img: &Point,
    p: &Patch,
    corners: &[Vec<Point>],
    anchors: &[Vec<Point>],
    frame: &mut [Option<Placement>],
    image: &mut HashMap<Point, Point>,
) -> Result<(), EngineError> {
    let s = p.tiles[i].place.sym();
    let shift = img.sub(&s.apply(&anchors[i][k]));
    let f = Placement::from_sym(s, shift);
    for (c, a) in corners[i].iter().zip(&anchors[i]) {
        let want = f.apply(a);
        match image.get(c) {
            Some(have) if *have != want => return Err(EngineError::Closure(c.clone())),
            Some(_) => {}
            None => {
                image.insert(c.clone(), want);
            }
        }
    }
    frame[i] = Some(f);
    Ok(())
}

/// `steps` substitutions from a single seed tile at the identity.
pub fn generate(seed: &str, steps: usize, rs: &RuleSet) -> Result<Patch, EngineError> {
    generate_from(PlacedTile::new(seed, Placement::identity()), steps, rs)
}

pub fn generate_from(seed: PlacedTile, steps: usize, rs: &RuleSet) -> Result<Patch, EngineError> {
    if !rs.registry.has_variant(&seed.variant) {
        return Err(EngineError::UnknownSeed(seed.variant));
    }
    let mut p = Patch::new(rs.name.clone(), vec![seed]);
    for _ in 0..steps {
        p = substitute_once(&p, rs)?;
    }
    Ok(p)
}

/// `m[u][v]` = number of children of variant `u` in the rule for `v`.
pub fn substitution_matrix(rs: &RuleSet) -> Vec<Vec<u64>> {
    let n = rs.registry.variants.len();
    let mut m = vec![vec![0u64; n]; n];
    for (v, rule) in rs.rules.iter().enumerate() {
        for c in &rule.children {
            let u = rs.registry.variant_index(&c.variant).expect("validated");
            m[u][v] += 1;
        }
    }
    m
}

pub fn mat_vec(m: &[Vec<u64>], x: &[u128]) -> Vec<u128> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(&a, &b)| a as u128 * b).sum())
        .collect()
}

/// `Mⁿ e_v`.
pub fn predicted_census(rs: &RuleSet, seed: &str, steps: usize) -> Option<Vec<u128>> {
    let m = substitution_matrix(rs);
    let mut x = vec![0u128; m.len()];
    x[rs.registry.variant_index(seed)?] = 1;
    for _ in 0..steps {
        x = mat_vec(&m, &x);
    }
    Some(x)
}

/// Tile count per variant, in variant order.
pub fn census(p: &Patch, rs: &RuleSet) -> Result<Vec<u128>, EngineError> {
    let mut x = vec![0u128; rs.registry.variants.len()];
    for t in &p.tiles {
        let i = rs
            .registry
            .variant_index(&t.variant)
            .ok_or_else(|| ModelError::UnknownVariant(t.variant.clone()))?;
        x[i] += 1;
    }
    Ok(x)
}
