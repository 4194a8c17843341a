//! Derivation of the one-triangle rule set from the square-triangle rules.
//!
//! Three stages, each producing an ordinary [`RuleSet`]:
//!
//! 1. [`expand_orbit`] splits every variant into one variant per orientation
//!    class, so that children only ever appear at rotation 0 or 6.
//! 2. [`cut_squares`] splits every square variant along one diagonal.
//! 3. [`map_ruleset`] moves every rule onto the target lattice by mapping
//!    edges to vectors and gluing children along shared edges.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::exact::{orientation, rotate, Placement, Point, Scalar, Sym};
use crate::model::{
    ccw_marks, edge_key, resolve, Mark, ModelError, PlacedTile, Prototile, Registry, ShapeKind,
    TileVariant,
};
use crate::reshape::{ReshapeError, ReshapeMap};
use crate::ruledsl::validate::{child_multiset, generated_group};
use crate::ruledsl::{Regime, Rule, RuleSet, Similarity};

#[derive(Debug, Error)]
pub enum DeriveError {
    #[error("orbit expansion needs scale-mode rules without anchors")]
    GluedSource,
    #[error("rule {parent}: child {child} has orientation {orient} outside every class")]
    Unclassified {
        parent: String,
        child: String,
        orient: String,
    },
    #[error("pairing is not an involution at {0}")]
    BadPairing(String),
    #[error("square variant {0} has no cut diagonal")]
    NoDiagonal(String),
    #[error("child {child} of {parent} straddles the cut line")]
    Straddle { parent: String, child: String },
    #[error("rule {0}: {1}")]
    Map(String, String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Reshape(#[from] ReshapeError),
}

/// Colour tokens exchanged when a tile is mirrored.
#[derive(Clone, Debug)]
pub struct SwapTable {
    pub pairs: Vec<(String, String)>,
    /// The pair that marks the dot corner; swapped between the two halves of
    /// a cut square.
    pub dot: (String, String),
}

impl Default for SwapTable {
    fn default() -> Self {
        let p = |a: &str, b: &str| (a.to_string(), b.to_string());
        SwapTable {
            pairs: vec![p("green", "grey"), p("white", "black"), p("yellow", "pink")],
            dot: p("white", "black"),
        }
    }
}

impl SwapTable {
    fn map_colours(decor: &str, f: impl Fn(&str) -> String) -> String {
        let (colour, rest) = match decor.split_once('.') {
            Some((c, r)) => (c, Some(r)),
            None => (decor, None),
        };
        let swapped: Vec<String> = colour.split('-').map(f).collect();
        match rest {
            Some(r) => format!("{}.{}", swapped.join("-"), r),
            None => swapped.join("-"),
        }
    }

    pub fn mirror(&self, decor: &str) -> String {
        Self::map_colours(decor, |t| {
            for (a, b) in &self.pairs {
                if t == a {
                    return b.clone();
                }
                if t == b {
                    return a.clone();
                }
            }
            t.to_string()
        })
    }

    pub fn swap_dot(&self, decor: &str) -> String {
        let (a, b) = &self.dot;
        Self::map_colours(decor, |t| {
            if t == a {
                b.clone()
            } else if t == b {
                a.clone()
            } else {
                t.to_string()
            }
        })
    }
}

fn with_suffix(decor: &str, suffix: &str) -> String {
    if decor.contains('.') {
        format!("{decor}{suffix}")
    } else {
        format!("{decor}.{suffix}")
    }
}

fn sym_suffix(q: Sym) -> String {
    format!("r{}{}", q.rot, if q.flip { "f" } else { "" })
}

/// An orientation-expanded rule set together with the bookkeeping needed to
/// name the class of any source tile.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub rules: RuleSet,
    pub group: Vec<Sym>,
    half: Vec<Sym>,
    /// source variant -> class representatives and their ids
    classes: HashMap<String, Vec<(Sym, String)>>,
    /// source variant -> symmetries of its rule, with the translation that
    /// realigns the parent
    stab: HashMap<String, Vec<(Sym, Point)>>,
    origin: HashMap<String, (String, Sym)>,
}

impl Expansion {
    /// Source variant and representative orientation of an expanded variant.
    pub fn source_of(&self, id: &str) -> Option<(&str, Sym)> {
        self.origin.get(id).map(|(v, q)| (v.as_str(), *q))
    }

    pub fn class_count(&self, source: &str) -> usize {
        self.classes.get(source).map_or(0, Vec::len)
    }

    /// Expanded variant for a source tile of variant `v` placed with linear
    /// part `g`, the residual half turn, and the shift correction to add to
    /// the tile's translation.
    pub fn classify(&self, v: &str, g: Sym) -> Option<(&str, Sym, Point)> {
        let reps = self.classes.get(v)?;
        for h in &self.half {
            for (s, t) in &self.stab[v] {
                let q = h.inverse().then(&g).then(&s.inverse());
                if let Some((_, id)) = reps.iter().find(|(r, _)| *r == q) {
                    return Some((id, *h, h.apply(&q.apply(t)).neg()));
                }
            }
        }
        None
    }

    /// Rewrite a source tile as a tile of the expanded set.
    pub fn rewrite(&self, t: &PlacedTile) -> Option<PlacedTile> {
        let (id, h, delta) = self.classify(&t.variant, t.place.sym())?;
        Some(PlacedTile::new(id, Placement::from_sym(h, t.place.shift.add(&delta))))
    }
}

type Signature = Vec<(String, Vec<((Point, Point), Option<Mark>)>)>;

fn edge_signature(pts: &[Point], marks: Option<&Vec<Mark>>) -> Vec<((Point, Point), Option<Mark>)> {
    let n = pts.len();
    let mut s: Vec<_> = (0..n)
        .map(|k| (edge_key(&pts[k], &pts[(k + 1) % n]), marks.map(|m| m[k].clone())))
        .collect();
    s.sort();
    s
}

fn children_signature(
    children: &[PlacedTile],
    frame: &Placement,
    reg: &Registry,
) -> Result<Signature, ModelError> {
    let mut sig = Vec::with_capacity(children.len());
    for c in children {
        let t = PlacedTile::new(c.variant.clone(), frame.compose(&c.place));
        let r = resolve(&t, reg)?;
        let v = reg.variant(&c.variant)?;
        sig.push((c.variant.clone(), edge_signature(&r.pts, ccw_marks(&r, v).as_ref())));
    }
    sig.sort();
    Ok(sig)
}

/// Symmetries `s` of the group with `s(rule) + t = rule` for some `t`.
fn rule_stabilizer(rs: &RuleSet, v: &str, group: &[Sym]) -> Result<Vec<(Sym, Point)>, DeriveError> {
    let verts = rs.base_vertices(v);
    let marks = rs.registry.variant(v)?.marks.clone();
    let rule = rs.rule(v).expect("validated rule set");
    let parent_sig = edge_signature(&verts, marks.as_ref());
    let kids = children_signature(&rule.children, &Placement::identity(), &rs.registry)?;
    let mut out = Vec::new();
    for s in group {
        let img: Vec<Point> = verts.iter().map(|p| s.apply(p)).collect();
        for q in &img {
            let t = verts[0].sub(q);
            let moved: Vec<Point> = img.iter().map(|p| p.add(&t)).collect();
            if edge_signature(&moved, marks.as_ref()) != parent_sig {
                continue;
            }
            let frame = Placement::from_sym(*s, t.scale(&rs.inflation));
            if children_signature(&rule.children, &frame, &rs.registry)? == kids {
                out.push((*s, t));
                break;
            }
        }
    }
    Ok(out)
}

/// Expand every variant into its orientation classes.
///
/// Orientations are the closure of the child orientations. Two orientations
/// of a variant give the same class when they differ by a half turn or by a
/// symmetry of the variant's rule. With `mirror` given, each class is paired
/// with the class of its mirror image.
pub fn expand_orbit(
    rs: &RuleSet,
    swap: &SwapTable,
    mirror: Option<Sym>,
) -> Result<Expansion, DeriveError> {
    if rs.glue_mode() {
        return Err(DeriveError::GluedSource);
    }
    let group = generated_group(rs);
    let half = vec![Sym::ID, Sym::new(6, false)];
    let mut classes = HashMap::new();
    let mut stab = HashMap::new();
    let mut origin = HashMap::new();
    let mut variants = Vec::new();
    for v in &rs.registry.variants {
        let st = rule_stabilizer(rs, &v.id, &group)?;
        let mut covered: Vec<Sym> = Vec::new();
        let mut reps = Vec::new();
        for g in &group {
            if covered.contains(g) {
                continue;
            }
            for h in &half {
                for (s, _) in &st {
                    covered.push(h.then(g).then(s));
                }
            }
            let id = format!("{}_{}", v.id, sym_suffix(*g));
            let colour = if g.flip { swap.mirror(&v.decor) } else { v.decor.clone() };
            let base = g.then(&v.base());
            variants.push(TileVariant {
                id: id.clone(),
                prototile: v.prototile.clone(),
                base_rot: base.rot,
                base_flip: base.flip,
                decor: with_suffix(&colour, &sym_suffix(*g)),
                marks: v.marks.clone(),
            });
            origin.insert(id.clone(), (v.id.clone(), *g));
            reps.push((*g, id));
        }
        classes.insert(v.id.clone(), reps);
        stab.insert(v.id.clone(), st);
    }
    let mut exp = Expansion {
        rules: RuleSet {
            name: format!("{}-oriented", rs.name),
            regime: Regime::HalfTurn,
            similarity: rs.similarity,
            inflation: rs.inflation.clone(),
            registry: Registry::new(rs.registry.prototiles.clone(), variants),
            edge_labels: rs.edge_labels.clone(),
            rules: Vec::new(),
            pairs: Vec::new(),
        },
        group,
        half,
        classes,
        stab,
        origin,
    };

    let mut rules = Vec::new();
    for nv in &exp.rules.registry.variants {
        let (src, q) = exp.origin[&nv.id].clone();
        let rule = rs.rule(&src).expect("validated rule set");
        let turn = Placement::from_sym(q, Point::origin());
        let mut children = Vec::with_capacity(rule.children.len());
        for c in &rule.children {
            let moved = PlacedTile::new(c.variant.clone(), turn.compose(&c.place));
            let t = exp.rewrite(&moved).ok_or_else(|| {
                DeriveError::Unclassified {
                    parent: nv.id.clone(),
                    child: c.variant.clone(),
                    orient: sym_suffix(moved.place.sym()),
                }
            })?;
            children.push(t);
        }
        rules.push(Rule {
            parent: nv.id.clone(),
            children,
            anchors: None,
        });
    }
    exp.rules.rules = rules;

    if let Some(m) = mirror {
        let mut partner: BTreeMap<String, String> = BTreeMap::new();
        for nv in &exp.rules.registry.variants {
            let (src, q) = exp.origin[&nv.id].clone();
            let (other, _, _) = exp
                .classify(&src, m.then(&q))
                .ok_or_else(|| DeriveError::BadPairing(nv.id.clone()))?;
            if other == nv.id {
                return Err(DeriveError::BadPairing(nv.id.clone()));
            }
            partner.insert(nv.id.clone(), other.to_string());
        }
        let mut pairs = Vec::new();
        for nv in &exp.rules.registry.variants {
            let p = &partner[&nv.id];
            if partner.get(p) != Some(&nv.id) {
                return Err(DeriveError::BadPairing(nv.id.clone()));
            }
            if !pairs.iter().any(|(_, b): &(String, String)| b == &nv.id) {
                pairs.push((nv.id.clone(), p.clone()));
            }
        }
        exp.rules.pairs = pairs;
    }
    Ok(exp)
}

/// Split every square variant along a diagonal.
///
/// `diagonal` names the first vertex `i` of the diagonal `i -> i+2` for each
/// square variant. Half A keeps vertices `i, i+1, i+2`, half B keeps
/// `i+2, i+3, i`. In a square's own rule each child goes to the half on the
/// same side of the inflated diagonal as its centroid; a child whose
/// centroid lies on the diagonal must be a square cut along it.
pub fn cut_squares(
    rs: &RuleSet,
    swap: &SwapTable,
    diagonal: &dyn Fn(&TileVariant) -> Option<usize>,
) -> Result<RuleSet, DeriveError> {
    let mut cut: HashMap<String, usize> = HashMap::new();
    for v in &rs.registry.variants {
        let (_, p) = rs.registry.shape_of(&v.id)?;
        if p.kind == ShapeKind::Square {
            let i = diagonal(v).ok_or_else(|| DeriveError::NoDiagonal(v.id.clone()))?;
            cut.insert(v.id.clone(), i % 4);
        }
    }

    let mut protos: Vec<Prototile> = rs
        .registry
        .prototiles
        .iter()
        .filter(|p| p.kind != ShapeKind::Square)
        .cloned()
        .collect();
    let mut variants = Vec::new();
    for v in &rs.registry.variants {
        let Some(&i) = cut.get(&v.id) else {
            variants.push(v.clone());
            continue;
        };
        let p = rs.registry.prototile(&v.prototile)?;
        let j = (i + 2) % 4;
        let halves = [(vec![i, (i + 1) % 4, j], 'a'), (vec![j, (j + 1) % 4, i], 'b')];
        let symbol: String = format!("D{}", v.id)
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        for (ix, tag) in halves {
            let pid = format!("{}_{}{}{}", p.id, ix[0], ix[2], tag);
            if !protos.iter().any(|q| q.id == pid) {
                protos.push(Prototile {
                    id: pid.clone(),
                    kind: ShapeKind::Triangle,
                    vertices: ix.iter().map(|&k| p.vertices[k].clone()).collect(),
                });
            }
            let decor = if tag == 'a' { v.decor.clone() } else { swap.swap_dot(&v.decor) };
            let marks = v.marks.as_ref().map(|m| {
                vec![
                    m[ix[0]].clone(),
                    m[ix[1]].clone(),
                    Mark {
                        symbol: symbol.clone(),
                        out: tag == 'a',
                    },
                ]
            });
            variants.push(TileVariant {
                id: format!("{}{}", v.id, tag),
                prototile: pid,
                base_rot: v.base_rot,
                base_flip: v.base_flip,
                decor: with_suffix(&decor, &tag.to_string()),
                marks,
            });
        }
    }

    let split = |c: &PlacedTile| -> Vec<PlacedTile> {
        if cut.contains_key(&c.variant) {
            vec![
                PlacedTile::new(format!("{}a", c.variant), c.place.clone()),
                PlacedTile::new(format!("{}b", c.variant), c.place.clone()),
            ]
        } else {
            vec![c.clone()]
        }
    };

    let mut rules = Vec::new();
    for rule in &rs.rules {
        let Some(&i) = cut.get(&rule.parent) else {
            rules.push(Rule {
                parent: rule.parent.clone(),
                children: rule.children.iter().flat_map(split).collect(),
                anchors: rule.anchors.clone(),
            });
            continue;
        };
        let j = (i + 2) % 4;
        let a = rs.anchors(&rule.parent);
        let side_a = orientation(&a[i], &a[j], &a[(i + 1) % 4]);
        let mut kids_a = Vec::new();
        let mut kids_b = Vec::new();
        for c in &rule.children {
            let r = resolve(c, &rs.registry)?;
            let n = Scalar::frac(1, r.pts.len() as i64);
            let side = orientation(&a[i], &a[j], &r.centroid3().scale(&n));
            let pieces = if side != 0 {
                vec![(side, split(c))]
            } else if let Some(&ci) = cut.get(&c.variant) {
                let d0 = r.at_local(ci);
                let d1 = r.at_local((ci + 2) % 4);
                if orientation(&a[i], &a[j], d0) != 0 || orientation(&a[i], &a[j], d1) != 0 {
                    return Err(DeriveError::Straddle {
                        parent: rule.parent.clone(),
                        child: c.variant.clone(),
                    });
                }
                let mut v = Vec::new();
                for h in split(c) {
                    let hr = resolve(&h, &half_registry(&protos, &variants))?;
                    let s = orientation(&a[i], &a[j], &hr.centroid3().scale(&Scalar::frac(1, 3)));
                    v.push((s, vec![h]));
                }
                v
            } else {
                return Err(DeriveError::Straddle {
                    parent: rule.parent.clone(),
                    child: c.variant.clone(),
                });
            };
            for (s, ts) in pieces {
                if s == side_a {
                    kids_a.extend(ts);
                } else {
                    kids_b.extend(ts);
                }
            }
        }
        let pick = |ix: [usize; 3]| rule.anchors.as_ref().map(|_| ix.iter().map(|&k| a[k].clone()).collect());
        rules.push(Rule {
            parent: format!("{}a", rule.parent),
            children: kids_a,
            anchors: pick([i, (i + 1) % 4, j]),
        });
        rules.push(Rule {
            parent: format!("{}b", rule.parent),
            children: kids_b,
            anchors: pick([j, (j + 1) % 4, i]),
        });
    }

    let mut pairs = Vec::new();
    for (x, y) in &rs.pairs {
        if cut.contains_key(x) {
            pairs.push((format!("{x}a"), format!("{y}a")));
            pairs.push((format!("{x}b"), format!("{y}b")));
        } else {
            pairs.push((x.clone(), y.clone()));
        }
    }

    Ok(RuleSet {
        name: format!("{}-cut", rs.name),
        regime: rs.regime,
        similarity: Similarity::Pseudo,
        inflation: rs.inflation.clone(),
        registry: Registry::new(protos, variants),
        edge_labels: rs.edge_labels.clone(),
        rules,
        pairs,
    })
}

fn half_registry(protos: &[Prototile], variants: &[TileVariant]) -> Registry {
    Registry::new(protos.to_vec(), variants.to_vec())
}

/// How a source variant sits on its target prototile.
#[derive(Clone, Debug)]
pub struct TargetShape {
    pub prototile: String,
    pub base_rot: u8,
    /// `corr[k]` is the source local vertex at target local vertex `k`.
    pub corr: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Mapped {
    pub rules: RuleSet,
    pub shapes: HashMap<String, TargetShape>,
}

/// Target shape of one source variant.
fn target_shape(
    rs: &RuleSet,
    v: &TileVariant,
    map: &ReshapeMap,
) -> Result<(TargetShape, Option<Vec<Mark>>), DeriveError> {
    let local = rs.base_vertices(&v.id);
    let n = local.len();
    let img = map
        .local_polygon(&local)
        .map_err(|e| DeriveError::Map(v.id.clone(), e.to_string()))?;
    // target polygon is ccw when the source local order is
    let ccw: Vec<usize> = if v.base_flip { (0..n).map(|j| (n - j) % n).collect() } else { (0..n).collect() };
    let pts: Vec<Point> = ccw.iter().map(|&k| img[k].clone()).collect();
    let (pi, rot, off) = map
        .match_target(&pts)
        .ok_or_else(|| DeriveError::Map(v.id.clone(), "no target prototile fits".into()))?;
    let corr: Vec<usize> = (0..n).map(|k| ccw[(k + off) % n]).collect();
    let marks = v.marks.as_ref().map(|m| {
        (0..n)
            .map(|k| {
                let (s0, s1) = (corr[k], corr[(k + 1) % n]);
                let e = if (s0 + 1) % n == s1 { s0 } else { s1 };
                let label = map.source_label(&local[(e + 1) % n].sub(&local[e]));
                Mark {
                    symbol: format!("{}{}", m[e].symbol, label.unwrap_or("")),
                    out: m[e].out,
                }
            })
            .collect()
    });
    Ok((
        TargetShape {
            prototile: map.target_tiles[pi].id.clone(),
            base_rot: rot,
            corr,
        },
        marks,
    ))
}

/// Move every rule of a half-turn rule set onto the target lattice.
///
/// Tiles keep their ids. Each rule's children are glued along shared edges
/// with edge vectors taken from the map, and the parent's anchors are the
/// images of its inflated corners.
pub fn map_ruleset(rs: &RuleSet, map: &ReshapeMap, name: &str) -> Result<Mapped, DeriveError> {
    let mut shapes = HashMap::new();
    let mut variants = Vec::new();
    for v in &rs.registry.variants {
        let (shape, marks) = target_shape(rs, v, map)?;
        variants.push(TileVariant {
            id: v.id.clone(),
            prototile: shape.prototile.clone(),
            base_rot: shape.base_rot,
            base_flip: false,
            decor: v.decor.clone(),
            marks,
        });
        shapes.insert(v.id.clone(), shape);
    }
    let registry = Registry::new(map.target_tiles.clone(), variants);
    let base = |id: &str| -> Vec<Point> {
        let (v, p) = registry.shape_of(id).expect("registered");
        p.vertices.iter().map(|q| rotate(v.base_rot, q)).collect()
    };

    let linear = map.linear();
    let mut rules = Vec::new();
    for rule in &rs.rules {
        let err = |m: String| DeriveError::Map(rule.parent.clone(), m);
        let resolved = rule
            .children
            .iter()
            .map(|c| resolve(c, &rs.registry))
            .collect::<Result<Vec<_>, _>>()?;
        let polys: Vec<Vec<Point>> = resolved.iter().map(|r| r.pts.clone()).collect();
        let psi = map.glue(&polys).map_err(|e| err(e.to_string()))?;
        let src_anchor = rs.anchors(&rule.parent);
        let shape = &shapes[&rule.parent];
        // anchors off the children (a cut square's corner) follow the
        // linear extension from any child vertex
        let c0 = &polys[0][0];
        let img = |p: &Point| match psi.get(p) {
            Some(q) => Ok(q.clone()),
            None => linear
                .as_ref()
                .map(|f| psi[c0].add(&f.apply(&p.sub(c0))))
                .ok_or_else(|| err(format!("anchor {p} is not a child vertex"))),
        };
        let origin = img(&src_anchor[shape.corr[0]])?;
        let anchors = shape
            .corr
            .iter()
            .map(|&k| Ok(img(&src_anchor[k])?.sub(&origin)))
            .collect::<Result<Vec<_>, DeriveError>>()?;
        let mut children = Vec::new();
        for (c, r) in rule.children.iter().zip(&resolved) {
            let cs = &shapes[&c.variant];
            let want: Vec<Point> = cs.corr.iter().map(|&k| psi[r.at_local(k)].sub(&origin)).collect();
            let b = base(&c.variant);
            let place = [Sym::ID, Sym::new(6, false)].iter().find_map(|h| {
                let shift = want[0].sub(&h.apply(&b[0]));
                let ok = b.iter().zip(&want).all(|(p, w)| h.apply(p).add(&shift) == *w);
                ok.then(|| Placement::from_sym(*h, shift))
            });
            let place = place.ok_or_else(|| err(format!("child {} lands off its target shape", c.variant)))?;
            children.push(PlacedTile::new(c.variant.clone(), place));
        }
        rules.push(Rule {
            parent: rule.parent.clone(),
            children,
            anchors: Some(anchors),
        });
    }
    Ok(Mapped {
        rules: RuleSet {
            name: name.to_string(),
            regime: Regime::HalfTurn,
            similarity: Similarity::Pseudo,
            inflation: rs.inflation.clone(),
            registry,
            edge_labels: Vec::new(),
            rules,
            pairs: rs.pairs.clone(),
        },
        shapes,
    })
}

/// Every variant is paired and each rule's children map onto the children of
/// the partner's rule. Returns the offending variants.
pub fn check_involution(rs: &RuleSet) -> Vec<String> {
    let inv = rs.involution();
    let mut bad = Vec::new();
    for v in &rs.registry.variants {
        match inv.get(&v.id) {
            None => bad.push(v.id.clone()),
            Some(p) => {
                let mine = rs.rule(&v.id).map(|r| child_multiset(r, Some(&inv)));
                let theirs = rs.rule(p).map(|r| child_multiset(r, None));
                if mine != theirs || inv.get(p) != Some(&v.id) {
                    bad.push(v.id.clone());
                }
            }
        }
    }
    bad
}

/// All stages of the derivation, kept for reshaping patches.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub expansion: Expansion,
    pub cut: RuleSet,
    /// The expanded rules on the target lattice, squares still whole.
    pub intermediate: Mapped,
    pub target: Mapped,
}

pub const DERIVED_NAME: &str = "one-triangle";

pub fn derive(src: &RuleSet, map: &ReshapeMap) -> Result<Derivation, DeriveError> {
    map.check_tilemap(src)?;
    let swap = SwapTable::default();
    let group = generated_group(src);
    let mirror = map.mirror(&group);
    let expansion = expand_orbit(src, &swap, mirror)?;
    let exp = &expansion;
    let diag = |v: &TileVariant| -> Option<usize> {
        let (source, _) = exp.source_of(&v.id)?;
        let w = exp.rules.base_vertices(&v.id);
        (0..2).find(|&i| {
            map.local_polygon(&w)
                .ok()
                .map(|img| img[i + 2].sub(&img[i]))
                .is_some_and(|d| map.cut_parallel(source, &d))
        })
    };
    let cut = cut_squares(&exp.rules, &swap, &diag)?;
    let intermediate = map_ruleset(&exp.rules, map, &format!("{DERIVED_NAME}-whole"))?;
    let target = map_ruleset(&cut, map, DERIVED_NAME)?;
    Ok(Derivation {
        expansion,
        cut,
        intermediate,
        target,
    })
}
