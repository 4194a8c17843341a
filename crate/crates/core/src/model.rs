//! Prototiles, decorated variants, placed tiles and patches.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{area2, ExactError, Placement, Point, Scalar, Sym};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown variant '{0}'")]
    UnknownVariant(String),
    #[error("unknown prototile '{0}'")]
    UnknownPrototile(String),
    #[error("duplicate tile {0}")]
    DuplicateTile(String),
    #[error("side {0} -- {1} is shared by more than two tiles")]
    OvercrowdedEdge(Point, Point),
    #[error("malformed patch document: {0}")]
    Format(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Triangle,
    Square,
}

impl ShapeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Triangle => "triangle",
            ShapeKind::Square => "square",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prototile {
    pub id: String,
    pub kind: ShapeKind,
    pub vertices: Vec<Point>,
}

impl Prototile {
    pub fn area2(&self) -> Scalar {
        area2(&self.vertices)
    }
}

/// An edge decoration: a symbol plus a direction flag (`+` or `-`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mark {
    pub symbol: String,
    pub out: bool,
}

impl Mark {
    pub fn complement(&self) -> Mark {
        Mark {
            symbol: self.symbol.clone(),
            out: !self.out,
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.symbol, if self.out { '+' } else { '-' })
    }
}

impl std::str::FromStr for Mark {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sym, last) = s.split_at(s.len().saturating_sub(1));
        let out = match last {
            "+" => true,
            "-" => false,
            _ => return Err(format!("mark '{s}' must end in '+' or '-'")),
        };
        if sym.is_empty() || !sym.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(format!("bad mark symbol in '{s}'"));
        }
        Ok(Mark {
            symbol: sym.to_string(),
            out,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileVariant {
    pub id: String,
    pub prototile: String,
    pub base_rot: u8,
    pub base_flip: bool,
    pub decor: String,
    pub marks: Option<Vec<Mark>>,
}

impl TileVariant {
    pub fn base(&self) -> Sym {
        Sym::new(self.base_rot, self.base_flip)
    }
}

/// Prototiles and variants with lookup by id, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    pub prototiles: Vec<Prototile>,
    pub variants: Vec<TileVariant>,
    proto_ix: HashMap<String, usize>,
    variant_ix: HashMap<String, usize>,
}

impl Registry {
    pub fn new(prototiles: Vec<Prototile>, variants: Vec<TileVariant>) -> Self {
        let mut r = Registry {
            prototiles,
            variants,
            ..Default::default()
        };
        r.reindex();
        r
    }

    pub fn reindex(&mut self) {
        self.proto_ix = self
            .prototiles
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();
        self.variant_ix = self
            .variants
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.clone(), i))
            .collect();
    }

    pub fn prototile(&self, id: &str) -> Result<&Prototile, ModelError> {
        self.proto_ix
            .get(id)
            .map(|&i| &self.prototiles[i])
            .ok_or_else(|| ModelError::UnknownPrototile(id.to_string()))
    }

    pub fn variant(&self, id: &str) -> Result<&TileVariant, ModelError> {
        self.variant_ix
            .get(id)
            .map(|&i| &self.variants[i])
            .ok_or_else(|| ModelError::UnknownVariant(id.to_string()))
    }

    pub fn variant_index(&self, id: &str) -> Option<usize> {
        self.variant_ix.get(id).copied()
    }

    pub fn has_variant(&self, id: &str) -> bool {
        self.variant_ix.contains_key(id)
    }

    pub fn shape_of(&self, variant: &str) -> Result<(&TileVariant, &Prototile), ModelError> {
        let v = self.variant(variant)?;
        Ok((v, self.prototile(&v.prototile)?))
    }

    pub fn any_marks(&self) -> bool {
        self.variants.iter().any(|v| v.marks.is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlacedTile {
    pub variant: String,
    pub place: Placement,
}

impl PlacedTile {
    pub fn new(variant: impl Into<String>, place: Placement) -> Self {
        PlacedTile {
            variant: variant.into(),
            place,
        }
    }
}

/// A tile with its polygon worked out.
///
/// `pts` is counterclockwise; `local[j]` is the prototile vertex index sitting
/// at `pts[j]`. Edge `j` of the ccw polygon runs `pts[j] -> pts[j+1]` and is
/// the prototile edge `edge_local(j)`.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub pts: Vec<Point>,
    pub local: Vec<usize>,
    pub flipped: bool,
}

impl Resolved {
    pub fn edge_local(&self, j: usize) -> usize {
        let n = self.pts.len();
        if self.flipped {
            // reversed order: ccw edge j joins local[j] and local[j]-1
            (self.local[j] + n - 1) % n
        } else {
            self.local[j]
        }
    }

    /// Position of prototile vertex `k`.
    pub fn at_local(&self, k: usize) -> &Point {
        let n = self.pts.len();
        let j = if self.flipped { (n - k) % n } else { k };
        &self.pts[j]
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Point, &Point)> {
        let n = self.pts.len();
        (0..n).map(move |j| (&self.pts[j], &self.pts[(j + 1) % n]))
    }

    pub fn centroid3(&self) -> Point {
        let mut s = Point::origin();
        for p in &self.pts {
            s = s.add(p);
        }
        s
    }
}

/// Total placement of a variant's prototile: placement after base orientation.
pub fn full_placement(t: &PlacedTile, v: &TileVariant) -> Placement {
    t.place.compose(&Placement::from_sym(v.base(), Point::origin()))
}

pub fn resolve(t: &PlacedTile, reg: &Registry) -> Result<Resolved, ModelError> {
    let (v, proto) = reg.shape_of(&t.variant)?;
    let full = full_placement(t, v);
    let img: Vec<Point> = proto.vertices.iter().map(|p| full.apply(p)).collect();
    let n = img.len();
    if full.flip {
        let local: Vec<usize> = (0..n).map(|j| (n - j) % n).collect();
        let pts = local.iter().map(|&k| img[k].clone()).collect();
        Ok(Resolved {
            pts,
            local,
            flipped: true,
        })
    } else {
        Ok(Resolved {
            pts: img,
            local: (0..n).collect(),
            flipped: false,
        })
    }
}

/// Counterclockwise vertex list of a placed tile.
pub fn resolve_vertices(t: &PlacedTile, reg: &Registry) -> Result<Vec<Point>, ModelError> {
    Ok(resolve(t, reg)?.pts)
}

/// Marks of a resolved tile per ccw edge, if the variant carries marks.
pub fn ccw_marks(r: &Resolved, v: &TileVariant) -> Option<Vec<Mark>> {
    let m = v.marks.as_ref()?;
    Some((0..r.pts.len()).map(|j| m[r.edge_local(j)].clone()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Patch {
    pub ruleset: String,
    pub tiles: Vec<PlacedTile>,
}

impl Patch {
    pub fn new(ruleset: impl Into<String>, tiles: Vec<PlacedTile>) -> Self {
        Patch {
            ruleset: ruleset.into(),
            tiles,
        }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn resolve_all(&self, reg: &Registry) -> Result<Vec<Resolved>, ModelError> {
        self.tiles.iter().map(|t| resolve(t, reg)).collect()
    }
}

/// Sort tiles by resolved vertex list (then variant id) and reject duplicates.
pub fn canonicalize(p: &Patch, reg: &Registry) -> Result<Patch, ModelError> {
    let mut keyed = Vec::with_capacity(p.tiles.len());
    for t in &p.tiles {
        let r = resolve(t, reg)?;
        keyed.push((r.pts, t.clone()));
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.variant.cmp(&b.1.variant)));
    for w in keyed.windows(2) {
        if w[0].0 == w[1].0 && w[0].1.variant == w[1].1.variant {
            return Err(ModelError::DuplicateTile(format!(
                "{} at {}",
                w[0].1.variant, w[0].0[0]
            )));
        }
    }
    Ok(Patch::new(
        p.ruleset.clone(),
        keyed.into_iter().map(|(_, t)| t).collect(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub endpoints: (Point, Point),
    /// (tile index, ccw edge index)
    pub incident: Vec<(usize, usize)>,
    pub label: Option<String>,
}

pub fn edge_key(p: &Point, q: &Point) -> (Point, Point) {
    if p <= q {
        (p.clone(), q.clone())
    } else {
        (q.clone(), p.clone())
    }
}

pub fn edges_of(resolved: &[Resolved]) -> Result<Vec<EdgeRecord>, ModelError> {
    let mut map: BTreeMap<(Point, Point), Vec<(usize, usize)>> = BTreeMap::new();
    for (i, r) in resolved.iter().enumerate() {
        for (j, (p, q)) in r.edges().enumerate() {
            map.entry(edge_key(p, q)).or_default().push((i, j));
        }
    }
    let mut out = Vec::with_capacity(map.len());
    for (k, inc) in map {
        if inc.len() > 2 {
            return Err(ModelError::OvercrowdedEdge(k.0, k.1));
        }
        out.push(EdgeRecord {
            endpoints: k,
            incident: inc,
            label: None,
        });
    }
    Ok(out)
}

pub fn patch_edges(p: &Patch, reg: &Registry) -> Result<Vec<EdgeRecord>, ModelError> {
    edges_of(&p.resolve_all(reg)?)
}

/// Twice the total tile area.
pub fn patch_area2(p: &Patch, reg: &Registry) -> Result<Scalar, ModelError> {
    let mut s = Scalar::zero();
    for r in p.resolve_all(reg)? {
        s = s + area2(&r.pts);
    }
    Ok(s)
}

#[derive(Serialize, Deserialize)]
struct TileDoc {
    variant: String,
    rot: u8,
    flip: bool,
    shift: [String; 2],
}

#[derive(Serialize, Deserialize)]
struct PatchDoc {
    ruleset: String,
    tiles: Vec<TileDoc>,
}

/// Deterministic document: one tile per line, scalars as exact literals.
pub fn write_patch(p: &Patch) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "  \"ruleset\": {},\n",
        serde_json::to_string(&p.ruleset).expect("string")
    ));
    out.push_str("  \"tiles\": [");
    for (i, t) in p.tiles.iter().enumerate() {
        let doc = TileDoc {
            variant: t.variant.clone(),
            rot: t.place.rot,
            flip: t.place.flip,
            shift: [t.place.shift.x.to_string(), t.place.shift.y.to_string()],
        };
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        out.push_str(&serde_json::to_string(&doc).expect("tile"));
    }
    if !p.tiles.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("]\n}\n");
    out
}

pub fn read_patch(text: &str) -> Result<Patch, ModelError> {
    let doc: PatchDoc =
        serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
    let mut tiles = Vec::with_capacity(doc.tiles.len());
    for t in doc.tiles {
        if t.rot > 11 {
            return Err(ModelError::Format(format!("rotation index {} out of range", t.rot)));
        }
        let x: Scalar = t.shift[0].parse()?;
        let y: Scalar = t.shift[1].parse()?;
        tiles.push(PlacedTile::new(
            t.variant,
            Placement::new(t.rot, t.flip, Point::new(x, y)),
        ));
    }
    Ok(Patch::new(doc.ruleset, tiles))
}
