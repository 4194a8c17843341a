//! Edge-to-vector reshaping between lattices.
//!
//! A reshape map assigns every labelled source edge a target vector. Since
//! the assignment is additive, a connected edge-to-edge patch can be rebuilt
//! on the target lattice by walking shared vertices and summing vectors.
//!
//! ```text
//! sourceedges
//! <L> length <scalar> angleclass <0..5>
//! targetedges
//! <L'> vector (<s>,<s>)
//! targettiles
//! prototile <id> triangle|square vertices ...
//! tilemap
//! <vid> -> <[-]L'> ... decor <label>
//! cuts
//! <vid> along (<s>,<s>) ...
//! ```

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::derive::Derivation;
use num_traits::Zero;

use crate::exact::{direction_index, rotate, Placement, Point, Rat, Scalar, Sym};
use crate::model::{resolve, EdgeRecord, ModelError, Patch, PlacedTile, Prototile, ShapeKind};
use crate::ruledsl::{parse_prototile, Cursor, DslError, EdgeLabel, RuleSet};

#[derive(Debug, Error)]
pub enum ReshapeError {
    #[error("reshape map: {0}")]
    Syntax(#[from] DslError),
    #[error("edge {0} -> {1} has no label in the reshape map")]
    Unlabelled(Point, Point),
    #[error("tile polygon has {0} unlabelled edges; at most one can be closed up")]
    TooManyUnlabelled(usize),
    #[error("mapped polygon does not close")]
    NoClosure,
    #[error("vertex {0} receives two different target positions")]
    Inconsistent(Point),
    #[error("patch is not connected")]
    Disconnected,
    #[error("tile map: {0}")]
    TileMap(String),
    #[error("tile {0} cannot be rewritten on the target lattice")]
    Unplaceable(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileMapEntry {
    pub variant: String,
    /// Target label and orientation per local edge (`true` when reversed).
    pub edges: Vec<(String, bool)>,
    pub decor: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReshapeMap {
    pub source_edges: Vec<EdgeLabel>,
    pub target_edges: Vec<(String, Point)>,
    pub target_tiles: Vec<Prototile>,
    pub tilemap: Vec<TileMapEntry>,
    pub cuts: Vec<(String, Vec<Point>)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Source,
    Target,
    Tiles,
    TileMap,
    Cuts,
}

pub fn parse_reshape_map(text: &str) -> Result<ReshapeMap, ReshapeError> {
    let mut m = ReshapeMap {
        source_edges: Vec::new(),
        target_edges: Vec::new(),
        target_tiles: Vec::new(),
        tilemap: Vec::new(),
        cuts: Vec::new(),
    };
    let mut section = Section::None;
    for (ix, raw) in text.lines().enumerate() {
        let chars: Vec<char> = raw.chars().collect();
        let mut c = Cursor::new(&chars, ix + 1);
        if c.at_end() {
            continue;
        }
        let save = c.pos;
        let (at, w) = c.word()?;
        let next = match w.as_str() {
            "sourceedges" => Some(Section::Source),
            "targetedges" => Some(Section::Target),
            "targettiles" => Some(Section::Tiles),
            "tilemap" => Some(Section::TileMap),
            "cuts" => Some(Section::Cuts),
            _ => None,
        };
        if let Some(s) = next {
            c.end()?;
            section = s;
            continue;
        }
        c.pos = save;
        match section {
            Section::None => return Err(c.err_at(at, format!("'{w}' outside any section")).into()),
            Section::Source => {
                let (_, label) = c.ident()?;
                c.keyword("length")?;
                let length = c.scalar()?;
                c.keyword("angleclass")?;
                let angleclass = c.small_int(5)?;
                c.end()?;
                m.source_edges.push(EdgeLabel {
                    label,
                    length,
                    angleclass,
                });
            }
            Section::Target => {
                let (_, label) = c.ident()?;
                c.keyword("vector")?;
                let v = c.point()?;
                c.end()?;
                m.target_edges.push((label, v));
            }
            Section::Tiles => {
                c.keyword("prototile")?;
                let (at, p) = parse_prototile(&mut c)?;
                if m.target_tiles.iter().any(|q| q.id == p.id) {
                    return Err(c.err_at(at, format!("duplicate prototile '{}'", p.id)).into());
                }
                c.end()?;
                m.target_tiles.push(p);
            }
            Section::TileMap => {
                let (_, variant) = c.ident()?;
                c.keyword("->")?;
                let mut edges = Vec::new();
                loop {
                    let (at, w) = c.word()?;
                    if w == "decor" {
                        break;
                    }
                    let (rev, label) = match w.strip_prefix('-') {
                        Some(l) => (true, l.to_string()),
                        None => (false, w),
                    };
                    if !m.target_edges.iter().any(|(l, _)| *l == label) {
                        return Err(c.err_at(at, format!("undeclared target edge '{label}'")).into());
                    }
                    edges.push((label, rev));
                }
                let (_, decor) = c.word()?;
                c.end()?;
                m.tilemap.push(TileMapEntry {
                    variant,
                    edges,
                    decor,
                });
            }
            Section::Cuts => {
                let (_, variant) = c.ident()?;
                c.keyword("along")?;
                let mut dirs = Vec::new();
                while c.peek() == Some('(') {
                    let at = c.pos;
                    let d = c.point()?;
                    if d.is_zero() {
                        return Err(c.err_at(at, "cut direction must be nonzero").into());
                    }
                    dirs.push(d);
                }
                c.end()?;
                m.cuts.push((variant, dirs));
            }
        }
    }
    for e in &m.source_edges {
        let want = format!("{}'", e.label);
        if !m.target_edges.iter().any(|(l, _)| *l == want) {
            return Err(ReshapeError::TileMap(format!("source edge {} has no target edge {want}", e.label)));
        }
    }
    Ok(m)
}

impl ReshapeMap {
    /// Source label of an edge vector and whether it runs against the
    /// label's direction.
    pub fn classify(&self, v: &Point) -> Option<(&str, bool)> {
        let k = direction_index(v)?;
        let len2 = v.norm2();
        self.source_edges
            .iter()
            .find(|e| e.angleclass == k % 6 && &e.length * &e.length == len2)
            .map(|e| (e.label.as_str(), k >= 6))
    }

    pub fn source_label(&self, v: &Point) -> Option<&str> {
        self.classify(v).map(|(l, _)| l)
    }

    fn target_vector(&self, label: &str) -> &Point {
        let want = format!("{label}'");
        &self.target_edges.iter().find(|(l, _)| *l == want).expect("checked at parse").1
    }

    pub fn map_vector(&self, v: &Point) -> Option<Point> {
        let (l, rev) = self.classify(v)?;
        let t = self.target_vector(l);
        Some(if rev { t.neg() } else { t.clone() })
    }

    /// Target polygon of a source polygon, first vertex at the origin. One
    /// unlabelled edge is allowed and is fixed by closure.
    pub fn local_polygon(&self, pts: &[Point]) -> Result<Vec<Point>, ReshapeError> {
        let n = pts.len();
        let imgs: Vec<Option<Point>> = (0..n)
            .map(|k| self.map_vector(&pts[(k + 1) % n].sub(&pts[k])))
            .collect();
        let missing = imgs.iter().filter(|v| v.is_none()).count();
        if missing > 1 {
            return Err(ReshapeError::TooManyUnlabelled(missing));
        }
        let total = imgs.iter().flatten().fold(Point::origin(), |s, v| s.add(v));
        if missing == 0 && !total.is_zero() {
            return Err(ReshapeError::NoClosure);
        }
        let mut out = Vec::with_capacity(n);
        let mut cur = Point::origin();
        for v in imgs.iter().take(n) {
            out.push(cur.clone());
            cur = cur.add(&v.clone().unwrap_or_else(|| total.neg()));
        }
        Ok(out)
    }

    /// Target prototile, base rotation (multiple of 90°) and cyclic offset
    /// matching a ccw polygon.
    pub fn match_target(&self, pts: &[Point]) -> Option<(usize, u8, usize)> {
        let n = pts.len();
        for (pi, p) in self.target_tiles.iter().enumerate() {
            if p.vertices.len() != n {
                continue;
            }
            for rot in [0u8, 3, 6, 9] {
                let r: Vec<Point> = p.vertices.iter().map(|q| rotate(rot, q)).collect();
                for off in 0..n {
                    let ok = (0..n).all(|k| r[k].sub(&r[0]) == pts[(k + off) % n].sub(&pts[off]));
                    if ok {
                        return Some((pi, rot, off));
                    }
                }
            }
        }
        None
    }

    pub fn cut_parallel(&self, variant: &str, d: &Point) -> bool {
        self.cuts
            .iter()
            .filter(|(v, _)| v == variant)
            .flat_map(|(_, ds)| ds)
            .any(|c| c.cross(d).is_zero())
    }

    /// Rebuild ccw source polygons on the target lattice. The first vertex
    /// of the first polygon goes to the origin.
    pub fn glue(&self, polys: &[Vec<Point>]) -> Result<HashMap<Point, Point>, ReshapeError> {
        let mut img = HashMap::new();
        if polys.is_empty() {
            return Ok(img);
        }
        let shapes = polys
            .iter()
            .map(|p| self.local_polygon(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut at: HashMap<&Point, Vec<(usize, usize)>> = HashMap::new();
        for (i, p) in polys.iter().enumerate() {
            for (k, q) in p.iter().enumerate() {
                at.entry(q).or_default().push((i, k));
            }
        }
        let mut done = vec![false; polys.len()];
        let mut queue = VecDeque::new();
        let settle = |i: usize, off: Point, img: &mut HashMap<Point, Point>| -> Result<(), ReshapeError> {
            for (q, s) in polys[i].iter().zip(&shapes[i]) {
                let want = s.add(&off);
                match img.get(q) {
                    Some(have) if *have != want => return Err(ReshapeError::Inconsistent(q.clone())),
                    Some(_) => {}
                    None => {
                        img.insert(q.clone(), want);
                    }
                }
            }
            Ok(())
        };
        settle(0, Point::origin(), &mut img)?;
        done[0] = true;
        queue.push_back(0);
        while let Some(i) = queue.pop_front() {
            for q in &polys[i] {
                for &(j, k) in &at[q] {
                    if !done[j] {
                        let off = img[q].sub(&shapes[j][k]);
                        settle(j, off, &mut img)?;
                        done[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if done.iter().any(|d| !d) {
            return Err(ReshapeError::Disconnected);
        }
        Ok(img)
    }

    /// A reflection `m` of the group with a target isometry `L` such that
    /// mapping then applying `L` equals applying `m` then mapping.
    pub fn mirror(&self, group: &[Sym]) -> Option<Sym> {
        let dirs: Vec<Point> = (0..12).map(crate::exact::unit).filter(|u| self.map_vector(u).is_some()).collect();
        for m in group.iter().filter(|g| g.flip) {
            let pairs: Option<Vec<(Point, Point)>> = dirs
                .iter()
                .map(|u| Some((self.map_vector(u)?, self.map_vector(&m.apply(u))?)))
                .collect();
            let Some(pairs) = pairs else { continue };
            if let Some(l) = solve_linear(&pairs) {
                if orthogonal(&l) && pairs.iter().all(|(a, b)| apply2(&l, a) == *b) {
                    return Some(*m);
                }
            }
        }
        None
    }

    /// Every tile map entry agrees with the source geometry.
    pub fn check_tilemap(&self, rs: &RuleSet) -> Result<(), ReshapeError> {
        for v in &rs.registry.variants {
            let e = self
                .tilemap
                .iter()
                .find(|e| e.variant == v.id)
                .ok_or_else(|| ReshapeError::TileMap(format!("no entry for {}", v.id)))?;
            let pts = rs.base_vertices(&v.id);
            let n = pts.len();
            if e.edges.len() != n {
                return Err(ReshapeError::TileMap(format!("{} lists {} edges, expected {n}", v.id, e.edges.len())));
            }
            for k in 0..n {
                let (p, q) = (&pts[k], &pts[(k + 1) % n]);
                let (l, rev) = self
                    .classify(&q.sub(p))
                    .ok_or_else(|| ReshapeError::Unlabelled(p.clone(), q.clone()))?;
                let (tl, trev) = &e.edges[k];
                if *tl != format!("{l}'") || *trev != rev {
                    return Err(ReshapeError::TileMap(format!(
                        "{} edge {k} is {}{l}' in the geometry but {}{tl} in the map",
                        v.id,
                        if rev { "-" } else { "" },
                        if *trev { "-" } else { "" }
                    )));
                }
            }
            if e.decor != v.decor {
                return Err(ReshapeError::TileMap(format!("{} decor {} differs from {}", v.id, e.decor, v.decor)));
            }
        }
        Ok(())
    }

    /// Tile map lines describing a rule set's variants, for writing a map.
    pub fn describe_tiles(&self, rs: &RuleSet) -> Result<Vec<String>, ReshapeError> {
        let mut out = Vec::new();
        for v in &rs.registry.variants {
            let pts = rs.base_vertices(&v.id);
            let n = pts.len();
            let mut line = format!("{} ->", v.id);
            for k in 0..n {
                let (p, q) = (&pts[k], &pts[(k + 1) % n]);
                let (l, rev) = self
                    .classify(&q.sub(p))
                    .ok_or_else(|| ReshapeError::Unlabelled(p.clone(), q.clone()))?;
                line.push_str(&format!(" {}{l}'", if rev { "-" } else { "" }));
            }
            line.push_str(&format!(" decor {}", v.decor));
            out.push(line);
        }
        Ok(out)
    }
}

/// The edge map extended to a Q-linear map on coordinates `(x.a, x.b, y.a, y.b)`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    /// `rows[i]` holds the image of basis vector `i`.
    rows: Vec<[Rat; 4]>,
}

fn coords(p: &Point) -> [Rat; 4] {
    [p.x.a.clone(), p.x.b.clone(), p.y.a.clone(), p.y.b.clone()]
}

fn from_coords(c: &[Rat; 4]) -> Point {
    Point::new(Scalar::new(c[0].clone(), c[1].clone()), Scalar::new(c[2].clone(), c[3].clone()))
}

impl LinearMap {
    pub fn apply(&self, p: &Point) -> Point {
        let c = coords(p);
        let mut out: [Rat; 4] = Default::default();
        for (ci, row) in c.iter().zip(&self.rows) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += ci * r;
            }
        }
        from_coords(&out)
    }
}

impl ReshapeMap {
    /// The unique linear extension of the edge map, when the labelled edges
    /// span the coordinate space and the map is consistent with additivity.
    pub fn linear(&self) -> Option<LinearMap> {
        let mut rows: Vec<Vec<Rat>> = self
            .source_edges
            .iter()
            .map(|e| {
                let u = crate::exact::unit(e.angleclass).scale(&e.length);
                let t = self.target_vector(&e.label);
                coords(&u).into_iter().chain(coords(t)).collect()
            })
            .collect();
        let mut r = 0;
        for col in 0..4 {
            let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                return None;
            };
            rows.swap(r, piv);
            let inv = rows[r][col].recip();
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
            for i in 0..rows.len() {
                if i != r && !rows[i][col].is_zero() {
                    let f = rows[i][col].clone();
                    let pivot = rows[r].clone();
                    for (x, p) in rows[i].iter_mut().zip(&pivot) {
                        *x -= &f * p;
                    }
                }
            }
            r += 1;
        }
        if rows[4..].iter().any(|row| row.iter().any(|x| !x.is_zero())) {
            return None;
        }
        Some(LinearMap {
            rows: rows[..4]
                .iter()
                .map(|row| [row[4].clone(), row[5].clone(), row[6].clone(), row[7].clone()])
                .collect(),
        })
    }
}

type Mat2 = [[Scalar; 2]; 2];

fn orthogonal(l: &Mat2) -> bool {
    let one = Scalar::one();
    &l[0][0] * &l[0][0] + &l[1][0] * &l[1][0] == one
        && &l[0][1] * &l[0][1] + &l[1][1] * &l[1][1] == one
        && (&l[0][0] * &l[0][1] + &l[1][0] * &l[1][1]).is_zero()
}

fn apply2(l: &Mat2, v: &Point) -> Point {
    Point::new(&l[0][0] * &v.x + &l[0][1] * &v.y, &l[1][0] * &v.x + &l[1][1] * &v.y)
}

/// Linear map sending each `a` to its `b`, from the first independent pair.
fn solve_linear(pairs: &[(Point, Point)]) -> Option<Mat2> {
    for (i, (a1, b1)) in pairs.iter().enumerate() {
        for (a2, b2) in &pairs[i + 1..] {
            let det = a1.cross(a2);
            if det.is_zero() {
                continue;
            }
            let inv = det.inv().ok()?;
            // A = [a1 a2], A^-1 = [[a2.y, -a2.x], [-a1.y, a1.x]] / det
            let ai = [
                [&a2.y * &inv, -(&a2.x * &inv)],
                [-(&a1.y * &inv), &a1.x * &inv],
            ];
            let b = [[b1.x.clone(), b2.x.clone()], [b1.y.clone(), b2.y.clone()]];
            let mut l: Mat2 = Default::default();
            for (r, row) in l.iter_mut().enumerate() {
                for (c, cell) in row.iter_mut().enumerate() {
                    *cell = &b[r][0] * &ai[0][c] + &b[r][1] * &ai[1][c];
                }
            }
            return Some(l);
        }
    }
    None
}

/// Label every edge of a patch by its source edge class.
pub fn classify_edges(p: &Patch, rs: &RuleSet, map: &ReshapeMap) -> Result<Vec<EdgeRecord>, ReshapeError> {
    let mut edges = crate::model::patch_edges(p, &rs.registry)?;
    for e in &mut edges {
        let (a, b) = &e.endpoints;
        let l = map
            .source_label(&b.sub(a))
            .ok_or_else(|| ReshapeError::Unlabelled(a.clone(), b.clone()))?;
        e.label = Some(l.to_string());
    }
    Ok(edges)
}

/// Rewrite a source patch on the target lattice.
///
/// With `cut` the squares are split and the result uses the derived rule
/// set; without it the result uses the whole-square intermediate set.
pub fn reshape_patch(p: &Patch, d: &Derivation, map: &ReshapeMap, cut: bool) -> Result<Patch, ReshapeError> {
    let exp = &d.expansion;
    let mut tiles = Vec::with_capacity(p.tiles.len());
    for t in &p.tiles {
        let e = exp
            .rewrite(t)
            .ok_or_else(|| ReshapeError::Unplaceable(t.variant.clone()))?;
        tiles.push(e);
    }
    let (reg, target) = if cut {
        tiles = split_squares(&tiles, &d.cut)?;
        (&d.cut.registry, &d.target)
    } else {
        (&exp.rules.registry, &d.intermediate)
    };
    let resolved = tiles
        .iter()
        .map(|t| resolve(t, reg))
        .collect::<Result<Vec<_>, _>>()?;
    let polys: Vec<Vec<Point>> = resolved.iter().map(|r| r.pts.clone()).collect();
    let psi = map.glue(&polys)?;
    let treg = &target.rules.registry;
    let mut out = Vec::with_capacity(tiles.len());
    for (t, r) in tiles.iter().zip(&resolved) {
        let shape = &target.shapes[&t.variant];
        let (v, proto) = treg.shape_of(&t.variant)?;
        let base: Vec<Point> = proto.vertices.iter().map(|q| rotate(v.base_rot, q)).collect();
        let want: Vec<Point> = shape.corr.iter().map(|&k| psi[r.at_local(k)].clone()).collect();
        let place = [Sym::ID, Sym::new(6, false)]
            .iter()
            .find_map(|h| {
                let shift = want[0].sub(&h.apply(&base[0]));
                base.iter()
                    .zip(&want)
                    .all(|(b, w)| h.apply(b).add(&shift) == *w)
                    .then(|| Placement::from_sym(*h, shift))
            })
            .ok_or_else(|| ReshapeError::Unplaceable(t.variant.clone()))?;
        out.push(PlacedTile::new(t.variant.clone(), place));
    }
    Ok(crate::model::canonicalize(
        &Patch::new(target.rules.name.clone(), out),
        treg,
    )?)
}

/// Replace each square tile by its two halves, where the rule set has them.
pub fn split_squares(tiles: &[PlacedTile], cut: &RuleSet) -> Result<Vec<PlacedTile>, ReshapeError> {
    let mut out = Vec::with_capacity(tiles.len() * 2);
    for t in tiles {
        if cut.registry.has_variant(&t.variant) {
            out.push(t.clone());
            continue;
        }
        let (a, b) = (format!("{}a", t.variant), format!("{}b", t.variant));
        if !(cut.registry.has_variant(&a) && cut.registry.has_variant(&b)) {
            return Err(ModelError::UnknownVariant(t.variant.clone()).into());
        }
        out.push(PlacedTile::new(a, t.place.clone()));
        out.push(PlacedTile::new(b, t.place.clone()));
    }
    Ok(out)
}

/// Split squares of a patch in the whole-square target set.
pub fn cut_patch(p: &Patch, d: &Derivation) -> Result<Patch, ReshapeError> {
    let tiles = split_squares(&p.tiles, &d.target.rules)?;
    let reg = &d.target.rules.registry;
    for t in &tiles {
        let (_, proto) = reg.shape_of(&t.variant)?;
        debug_assert_eq!(proto.kind, ShapeKind::Triangle);
    }
    Ok(crate::model::canonicalize(
        &Patch::new(d.target.rules.name.clone(), tiles),
        reg,
    )?)
}

/// Translate a patch so that its least vertex sits at the origin.
pub fn normalize_translation(p: &Patch, rs: &RuleSet) -> Result<Patch, ModelError> {
    let mut least: Option<Point> = None;
    for t in &p.tiles {
        for q in crate::model::resolve_vertices(t, &rs.registry)? {
            if least.as_ref().is_none_or(|l| q < *l) {
                least = Some(q);
            }
        }
    }
    let Some(o) = least else { return Ok(p.clone()) };
    let shift = Placement::translation(o.neg());
    let tiles = p
        .tiles
        .iter()
        .map(|t| PlacedTile::new(t.variant.clone(), shift.compose(&t.place)))
        .collect::<Vec<_>>();
    crate::model::canonicalize(&Patch::new(p.ruleset.clone(), tiles), &rs.registry)
}
