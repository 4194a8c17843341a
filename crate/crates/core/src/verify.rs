//! Checks on generated patches: planarity, edge-to-edge, census, vertex
//! stars, arrow marks, period search and patch complexity.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::exact::{angle_cmp, Point, Scalar};
use crate::geom::{
    bbox, boundary_cycles, boundary_edges, common_denominator, overlapping_pairs, t_junctions, to_int_polys, BBox, Coord,
    Grid, IPt,
};
use crate::model::{ccw_marks, resolve, ModelError, Patch, Registry, Resolved};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "n/a",
        }
    }
}

/// `{check, status, witnesses}`; witnesses are sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub witnesses: Vec<String>,
}

impl Report {
    fn new(check: &str, mut witnesses: Vec<String>) -> Self {
        witnesses.sort();
        witnesses.dedup();
        Report {
            check: check.to_string(),
            status: if witnesses.is_empty() { Status::Pass } else { Status::Fail },
            witnesses,
        }
    }

    fn not_applicable(check: &str, why: &str) -> Self {
        Report {
            check: check.to_string(),
            status: Status::NotApplicable,
            witnesses: vec![why.to_string()],
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, self.status.as_str())?;
        if !self.witnesses.is_empty() {
            let shown: Vec<&str> = self.witnesses.iter().take(5).map(String::as_str).collect();
            write!(f, " ({})", shown.join("; "))?;
            if self.witnesses.len() > 5 {
                write!(f, " and {} more", self.witnesses.len() - 5)?;
            }
        }
        Ok(())
    }
}

fn polygons(p: &Patch, reg: &Registry) -> Result<Vec<Vec<Point>>, ModelError> {
    Ok(p.resolve_all(reg)?.into_iter().map(|r| r.pts).collect())
}

/// Resolved polygons of a patch with their scaled integer form, when every
/// coordinate fits.
struct Prepared {
    polys: Vec<Vec<Point>>,
    int: Option<Vec<Vec<IPt>>>,
    unit: BigInt,
}

fn prepare(p: &Patch, reg: &Registry) -> Result<Prepared, ModelError> {
    let polys = polygons(p, reg)?;
    let int = to_int_polys(&polys);
    let unit = if int.is_some() { common_denominator(&polys) } else { BigInt::one() };
    Ok(Prepared { polys, int, unit })
}

impl Prepared {
    fn planarity(&self) -> Report {
        let w = match &self.int {
            Some(ip) => planarity_on(ip, &self.unit),
            None => planarity_on(&self.polys, &self.unit),
        };
        Report::new("planarity", w)
    }

    fn edge_to_edge(&self) -> Report {
        let w = match &self.int {
            Some(ip) => edges_on(ip, &self.unit),
            None => edges_on(&self.polys, &self.unit),
        };
        Report::new("edge-to-edge", w)
    }
}

fn at<C: Coord>(p: &C, unit: f64) -> String {
    let (x, y) = p.approx();
    format!("({:.6}, {:.6})", x / unit, y / unit)
}

fn planarity_on<C: Coord>(polys: &[Vec<C>], unit: &BigInt) -> Vec<String> {
    let uf = unit.to_f64().unwrap_or(1.0);
    let mut w: Vec<String> = overlapping_pairs(polys)
        .into_iter()
        .map(|(i, j)| format!("overlap: tiles {i} and {j}"))
        .collect();
    let cycles = boundary_cycles(&boundary_edges(polys));
    for c in &cycles {
        if C::area_sign(c) < 0 {
            let low = c.iter().min().expect("nonempty cycle");
            w.push(format!("gap: hole of {} edges near {}", c.len(), at(low, uf)));
        }
    }
    if w.is_empty() {
        // area identity against the region inside the outer boundaries
        let tiles = C::area2_total(polys.iter().map(Vec::as_slice));
        let region = C::area2_total(cycles.iter().filter(|c| C::area_sign(c) > 0).map(Vec::as_slice));
        if tiles != region {
            let s = Scalar::rational(BigRational::new(BigInt::one(), unit * unit));
            w.push(format!(
                "gap: tile area {} against region area {} (doubled)",
                &tiles * &s,
                &region * &s
            ));
        }
    }
    w
}

/// Tile interiors are pairwise disjoint and the union has no holes.
pub fn check_planarity(p: &Patch, reg: &Registry) -> Result<Report, ModelError> {
    Ok(prepare(p, reg)?.planarity())
}

fn edges_on<C: Coord>(polys: &[Vec<C>], unit: &BigInt) -> Vec<String> {
    let uf = unit.to_f64().unwrap_or(1.0);
    let mut w: Vec<String> = t_junctions(polys)
        .into_iter()
        .map(|(i, e, v)| format!("partial side: vertex {} inside edge {e} of tile {i}", at(&v, uf)))
        .collect();
    let mut count: HashMap<(&C, &C), usize> = HashMap::new();
    for poly in polys {
        let n = poly.len();
        for k in 0..n {
            let (a, b) = (&poly[k], &poly[(k + 1) % n]);
            *count.entry(if a < b { (a, b) } else { (b, a) }).or_default() += 1;
        }
    }
    for ((a, b), c) in count {
        if c > 2 {
            w.push(format!("edge {} -> {} shared by {c} tiles", at(a, uf), at(b, uf)));
        }
    }
    w
}

/// No vertex of the patch lies in the relative interior of a tile edge, and
/// no edge is shared by more than two tiles.
pub fn check_edge_to_edge(p: &Patch, reg: &Registry) -> Result<Report, ModelError> {
    Ok(prepare(p, reg)?.edge_to_edge())
}

/// Planarity and edge-to-edge reports sharing one pass over the patch.
pub fn check_tiling(p: &Patch, reg: &Registry) -> Result<(Report, Report), ModelError> {
    let prep = prepare(p, reg)?;
    Ok((prep.planarity(), prep.edge_to_edge()))
}

/// Shape up to rigid motion (reflections included): the least rotation of
/// the cyclic sequence of (side², turn cross, turn dot) over both traversal
/// directions.
pub fn congruence_key(poly: &[Point]) -> Vec<(Scalar, Scalar, Scalar)> {
    let seq = |pts: &[Point]| -> Vec<(Scalar, Scalar, Scalar)> {
        let n = pts.len();
        (0..n)
            .map(|k| {
                let e = pts[(k + 1) % n].sub(&pts[k]);
                let f = pts[(k + 2) % n].sub(&pts[(k + 1) % n]);
                (e.norm2(), e.cross(&f).abs(), e.dot(&f))
            })
            .collect()
    };
    let fwd = seq(poly);
    let rev: Vec<Point> = poly.iter().rev().cloned().collect();
    let bwd = seq(&rev);
    let n = fwd.len();
    let mut best: Option<Vec<(Scalar, Scalar, Scalar)>> = None;
    for s in [&fwd, &bwd] {
        for r in 0..n {
            let cand: Vec<_> = (0..n).map(|k| s[(k + r) % n].clone()).collect();
            if best.as_ref().is_none_or(|b| cand_less(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

fn cand_less(a: &[(Scalar, Scalar, Scalar)], b: &[(Scalar, Scalar, Scalar)]) -> bool {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(&x.0, &y.0), (&x.1, &y.1), (&x.2, &y.2)] {
            match p.cmp(q) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    false
}

/// Shape up to translation: vertices relative to the least vertex, sorted.
pub fn orientation_key(poly: &[Point]) -> Vec<Point> {
    let o = poly.iter().min().expect("nonempty polygon").clone();
    let mut v: Vec<Point> = poly.iter().map(|p| p.sub(&o)).collect();
    v.sort();
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    pub tiles: usize,
    pub congruence_classes: usize,
    pub orientation_classes: usize,
    /// Orientation class sizes, in order of first appearance.
    pub orientation_counts: Vec<usize>,
}

/// Drop decorations and count shapes up to rigid motion and up to
/// translation.
pub fn strip_and_census(p: &Patch, reg: &Registry) -> Result<Census, ModelError> {
    let polys = polygons(p, reg)?;
    let mut cong: Vec<Vec<(Scalar, Scalar, Scalar)>> = Vec::new();
    let mut orient: Vec<(Vec<Point>, usize)> = Vec::new();
    let mut seen: HashMap<Vec<Point>, usize> = HashMap::new();
    for poly in &polys {
        let ok = orientation_key(poly);
        match seen.get(&ok) {
            Some(&i) => orient[i].1 += 1,
            None => {
                seen.insert(ok.clone(), orient.len());
                orient.push((ok, 1));
                let ck = congruence_key(poly);
                if !cong.contains(&ck) {
                    cong.push(ck);
                }
            }
        }
    }
    Ok(Census {
        tiles: polys.len(),
        congruence_classes: cong.len(),
        orientation_classes: orient.len(),
        orientation_counts: orient.iter().map(|(_, c)| *c).collect(),
    })
}

/// Corner angle in degrees, rounded to 1e-6; all lattices here have
/// rational-degree angles.
fn corner_degrees(prev: &Point, v: &Point, next: &Point) -> String {
    let (ax, ay) = next.sub(v).to_f64();
    let (bx, by) = prev.sub(v).to_f64();
    let mut d = (ax * by - ay * bx).atan2(ax * bx + ay * by).to_degrees();
    if d < 0.0 {
        d += 360.0;
    }
    let r = (d * 1e6).round() / 1e6;
    if (r - r.round()).abs() < 1e-9 {
        format!("{}", r.round() as i64)
    } else {
        format!("{r}")
    }
}

/// Interior vertices of an edge-to-edge patch (every incident edge is
/// shared by two tiles) as groups of (tile, corner), in vertex order.
fn interior_groups<C: Coord>(polys: &[Vec<C>]) -> Vec<Vec<(usize, usize)>> {
    let mut count: HashMap<(C, C), usize> = HashMap::new();
    let mut at: HashMap<C, Vec<(usize, usize)>> = HashMap::new();
    for (i, poly) in polys.iter().enumerate() {
        let n = poly.len();
        for k in 0..n {
            let (p, q) = (&poly[k], &poly[(k + 1) % n]);
            let key = if p <= q { (p.clone(), q.clone()) } else { (q.clone(), p.clone()) };
            *count.entry(key).or_default() += 1;
            at.entry(p.clone()).or_default().push((i, k));
        }
    }
    let mut open: HashSet<C> = HashSet::new();
    for ((a, b), c) in count {
        if c < 2 {
            open.insert(a);
            open.insert(b);
        }
    }
    let mut v: Vec<(C, Vec<(usize, usize)>)> = at.into_iter().filter(|(c, _)| !open.contains(c)).collect();
    v.sort_by(|x, y| x.0.cmp(&y.0));
    v.into_iter()
        .map(|(_, mut g)| {
            g.sort_unstable();
            g
        })
        .collect()
}

fn interior_of(resolved: &[Resolved]) -> Vec<Vec<(usize, usize)>> {
    let polys: Vec<Vec<Point>> = resolved.iter().map(|r| r.pts.clone()).collect();
    match to_int_polys(&polys) {
        Some(ip) => interior_groups(&ip),
        None => interior_groups(&polys),
    }
}

/// One star signature per interior vertex: corners `shape:angle` in ccw
/// order, rotated to the least reading.
pub fn vertex_stars(p: &Patch, reg: &Registry) -> Result<BTreeMap<String, usize>, ModelError> {
    let resolved = p.resolve_all(reg)?;
    let mut out = BTreeMap::new();
    for corners in interior_of(&resolved) {
        let (i0, k0) = corners[0];
        let v = resolved[i0].pts[k0].clone();
        let mut items: Vec<(Point, String)> = corners
            .iter()
            .map(|&(i, k)| {
                let r = &resolved[i];
                let n = r.pts.len();
                let next = &r.pts[(k + 1) % n];
                let prev = &r.pts[(k + n - 1) % n];
                let (_, proto) = reg.shape_of(&p.tiles[i].variant).expect("resolved above");
                (next.sub(&v), format!("{}:{}", proto.kind.name(), corner_degrees(prev, &v, next)))
            })
            .collect();
        items.sort_by(|a, b| angle_cmp(&a.0, &b.0));
        let labels: Vec<String> = items.into_iter().map(|(_, l)| l).collect();
        let n = labels.len();
        let sig = (0..n)
            .map(|r| (0..n).map(|k| labels[(k + r) % n].clone()).collect::<Vec<_>>().join(" "))
            .min()
            .unwrap_or_default();
        *out.entry(sig).or_default() += 1;
    }
    Ok(out)
}

/// Marks on shared edges must be complementary, and at every interior
/// vertex all marked edges must turn the same way.
///
/// A `+` mark is an arrow leaving its tile across the edge. Seen from a
/// vertex `v`, an arrow crossing edge `v -> w` from the tile on its left to
/// the tile on its right turns clockwise about `v`.
pub fn check_arrow_condition(p: &Patch, reg: &Registry) -> Result<Report, ModelError> {
    if !p.tiles.iter().any(|t| reg.variant(&t.variant).is_ok_and(|v| v.marks.is_some())) {
        return Ok(Report::not_applicable("arrow-condition", "patch carries no edge marks"));
    }
    let resolved = p.resolve_all(reg)?;
    let mut marks = Vec::with_capacity(p.tiles.len());
    for (t, r) in p.tiles.iter().zip(&resolved) {
        marks.push(ccw_marks(r, reg.variant(&t.variant)?));
    }
    // directed ccw edge -> (tile, mark)
    let mut side: HashMap<(Point, Point), usize> = HashMap::new();
    for (i, r) in resolved.iter().enumerate() {
        for (a, b) in r.edges() {
            side.insert((a.clone(), b.clone()), i);
        }
    }
    let mut w = Vec::new();
    // sense per vertex: +1 clockwise, -1 counterclockwise
    let mut sense: HashMap<Point, (bool, bool)> = HashMap::new();
    for (i, r) in resolved.iter().enumerate() {
        for (k, (a, b)) in r.edges().enumerate() {
            // the tile on the left of a -> b is i (ccw); right tile owns b -> a
            let Some(&j) = side.get(&(b.clone(), a.clone())) else { continue };
            if j < i {
                continue;
            }
            let mi = marks[i].as_ref().map(|m| m[k].clone());
            let kj = resolved[j]
                .edges()
                .position(|(x, y)| x == b && y == a)
                .expect("edge present");
            let mj = marks[j].as_ref().map(|m| m[kj].clone());
            let (Some(mi), Some(mj)) = (mi, mj) else { continue };
            if mi.complement() != mj {
                w.push(format!("mismatch on edge {a} -> {b}: {mi} against {mj}"));
                continue;
            }
            // arrow leaves i (left of a->b) when mi is '+'
            let cw_about_a = mi.out;
            // about b the same crossing has the opposite sense
            for (v, cw) in [(a, cw_about_a), (b, !cw_about_a)] {
                let e = sense.entry(v.clone()).or_insert((false, false));
                if cw {
                    e.0 = true;
                } else {
                    e.1 = true;
                }
            }
        }
    }
    let interior: HashSet<&Point> = interior_of(&resolved)
        .iter()
        .map(|g| &resolved[g[0].0].pts[g[0].1])
        .collect();
    for (v, (cw, ccw)) in sense {
        if cw && ccw && interior.contains(&v) {
            w.push(format!("mixed turning at vertex {v}"));
        }
    }
    Ok(Report::new("arrow-condition", w))
}

fn centre_and_radius2(polys: &[Vec<Point>]) -> Option<(Point, Scalar)> {
    let all = polys.iter().flatten();
    let mut lo: Option<(Scalar, Scalar)> = None;
    let mut hi: Option<(Scalar, Scalar)> = None;
    for p in all {
        lo = Some(match lo {
            None => (p.x.clone(), p.y.clone()),
            Some((x, y)) => (x.min(p.x.clone()), y.min(p.y.clone())),
        });
        hi = Some(match hi {
            None => (p.x.clone(), p.y.clone()),
            Some((x, y)) => (x.max(p.x.clone()), y.max(p.y.clone())),
        });
    }
    let (lo, hi) = (lo?, hi?);
    let half = Scalar::frac(1, 2);
    let c = Point::new(&(&lo.0 + &hi.0) * &half, &(&lo.1 + &hi.1) * &half);
    let r2 = polys
        .iter()
        .flatten()
        .map(|p| p.sub(&c).norm2())
        .max()
        .expect("nonempty");
    Some((c, r2))
}

/// Translations `t` such that every tile inside the core disk (radius
/// `core_fraction` times the patch circumradius about the bounding-box
/// centre) reappears shifted by `t` with the same shape and orientation.
pub fn find_periods(p: &Patch, reg: &Registry, core_fraction: &Scalar) -> Result<Vec<Point>, ModelError> {
    let polys = polygons(p, reg)?;
    let Some((c, r2)) = centre_and_radius2(&polys) else { return Ok(Vec::new()) };
    let core2 = &(core_fraction * core_fraction) * &r2;
    let keyed: Vec<(Vec<Point>, Point)> = polys
        .iter()
        .map(|poly| {
            let k = orientation_key(poly);
            let o = poly.iter().min().expect("nonempty").clone();
            (k, o)
        })
        .collect();
    let mut class_ix: HashMap<&Vec<Point>, usize> = HashMap::new();
    for (k, _) in &keyed {
        let n = class_ix.len();
        class_ix.entry(k).or_insert(n);
    }
    let present: HashSet<(usize, &Point)> = keyed.iter().map(|(k, o)| (class_ix[k], o)).collect();
    let (cx, cy) = c.to_f64();
    let cf = core2.to_f64().sqrt();
    let inside = |q: &Point| {
        let (x, y) = q.to_f64();
        let h = (x - cx).hypot(y - cy);
        if h < cf - 1e-6 {
            true
        } else if h > cf + 1e-6 {
            false
        } else {
            q.sub(&c).norm2() <= core2
        }
    };
    let mut core: Vec<usize> = (0..polys.len()).filter(|&i| polys[i].iter().all(inside)).collect();
    if core.is_empty() {
        return Ok(Vec::new());
    }
    // The witness set does not depend on which core tile is the reference
    // (any witness carries every core tile onto a tile), so float ordering
    // is enough here.
    let anchor: Vec<(f64, f64)> = keyed.iter().map(|(_, o)| o.to_f64()).collect();
    let d2 = |i: usize, (x, y): (f64, f64)| (anchor[i].0 - x).powi(2) + (anchor[i].1 - y).powi(2);
    core.sort_by(|&a, &b| d2(a, (cx, cy)).total_cmp(&d2(b, (cx, cy))).then(a.cmp(&b)));
    let reference = core[0];
    let ref_class = class_ix[&keyed[reference].0];
    let ref_anchor = &keyed[reference].1;
    // check near tiles first so that most candidates fail fast
    let fr = anchor[reference];
    core.sort_by(|&a, &b| d2(a, fr).total_cmp(&d2(b, fr)).then(a.cmp(&b)));
    let mut out = Vec::new();
    for (k, o) in &keyed {
        if class_ix[k] != ref_class || o == ref_anchor {
            continue;
        }
        let t = o.sub(ref_anchor);
        let ok = core.iter().all(|&i| {
            let (ki, oi) = &keyed[i];
            present.contains(&(class_ix[ki], &oi.add(&t)))
        });
        if ok {
            out.push(t);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Number of distinct decorated neighbourhoods of radius `r` about interior
/// vertices lying farther than `r` from every boundary vertex, compared up
/// to translation. A neighbourhood is every tile with a vertex within `r`.
pub fn patch_complexity(p: &Patch, reg: &Registry, r: &Scalar) -> Result<usize, ModelError> {
    let resolved = p.resolve_all(reg)?;
    let kinds = p
        .tiles
        .iter()
        .map(|t| reg.variant_index(&t.variant).ok_or_else(|| ModelError::UnknownVariant(t.variant.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let polys: Vec<Vec<Point>> = resolved.into_iter().map(|x| x.pts).collect();
    Ok(match to_int_polys(&polys) {
        Some(ip) => complexity_on(&polys, &ip, &kinds, r),
        None => complexity_on(&polys, &polys, &kinds, r),
    })
}

fn complexity_on<C: Coord>(exact: &[Vec<Point>], polys: &[Vec<C>], kinds: &[usize], r: &Scalar) -> usize {
    let r2 = r * r;
    let rr = r.to_f64();
    let rf = rr * (1.0 + 1e-9) + 1e-9;
    let groups = interior_groups(polys);
    let interior: HashSet<&C> = groups.iter().map(|g| &polys[g[0].0][g[0].1]).collect();
    // boundary vertices, one (tile, corner) each
    let mut seen: HashSet<&C> = HashSet::new();
    let mut boundary: Vec<(usize, usize)> = Vec::new();
    for (i, poly) in polys.iter().enumerate() {
        for (k, q) in poly.iter().enumerate() {
            if !interior.contains(q) && seen.insert(q) {
                boundary.push((i, k));
            }
        }
    }
    // distances in true coordinates; `polys` may be rescaled
    let fx: Vec<Vec<(f64, f64)>> = exact.iter().map(|x| x.iter().map(Point::to_f64).collect()).collect();
    let f = |(i, k): (usize, usize)| fx[i][k];
    // floats settle clear cases; exact arithmetic decides near the rim
    let near = |a: (usize, usize), b: (usize, usize)| {
        let (fa, fb) = (f(a), f(b));
        let h = (fa.0 - fb.0).hypot(fa.1 - fb.1);
        if h < rr - 1e-6 {
            true
        } else if h > rr + 1e-6 {
            false
        } else {
            exact[a.0][a.1].sub(&exact[b.0][b.1]).norm2() <= r2
        }
    };
    let around = |(x, y): (f64, f64)| BBox { min: (x - rf, y - rf), max: (x + rf, y + rf) };
    let bgrid = Grid::new(
        &boundary
            .iter()
            .map(|&ik| {
                let (x, y) = f(ik);
                BBox { min: (x, y), max: (x, y) }
            })
            .collect::<Vec<_>>(),
    );
    let tgrid = Grid::new(&exact.iter().map(|x| bbox(x)).collect::<Vec<_>>());
    let mut classes: HashSet<Vec<(usize, Vec<C>)>> = HashSet::new();
    for g in &groups {
        let vk = g[0];
        let v = &polys[vk.0][vk.1];
        let b = around(f(vk));
        if bgrid.query(&b).into_iter().any(|j| near(boundary[j], vk)) {
            continue;
        }
        let mut hood: Vec<(usize, Vec<C>)> = tgrid
            .query(&b)
            .into_iter()
            .filter(|&i| (0..polys[i].len()).any(|k| near((i, k), vk)))
            .map(|i| (kinds[i], polys[i].iter().map(|q| q.minus(v)).collect()))
            .collect();
        hood.sort();
        classes.insert(hood);
    }
    classes.len()
}

/// Resolve one tile; helper for callers assembling witnesses.
pub fn tile_polygon(p: &Patch, reg: &Registry, i: usize) -> Result<Vec<Point>, ModelError> {
    Ok(resolve(&p.tiles[i], reg)?.pts)
}
