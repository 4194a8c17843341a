//! Geometric validation of substitution rules.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::exact::{area2, orientation, Placement, Point, Scalar, Sym};
use crate::geom::{
    boundary_cycles, boundary_edges, convex_interiors_meet, strictly_inside_segment, t_junctions,
};
use crate::model::{resolve, Mark, Resolved};

use super::{Regime, Rule, RuleSet, Similarity};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug)]
pub struct Finding {
    pub check: &'static str,
    pub rule: Option<String>,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Info => "info",
        };
        match &self.rule {
            Some(r) => write!(f, "[{st}] {} ({r}): {}", self.check, self.detail),
            None => write!(f, "[{st}] {}: {}", self.check, self.detail),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub rules: usize,
    pub pairs: usize,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.status == Status::Fail)
    }

    pub fn is_clean(&self) -> bool {
        self.failures().next().is_none()
    }

    /// Rules whose children satisfy the strict similarity identities
    /// (area equals λ² times parent area and boundary equals the inflated
    /// parent boundary).
    pub fn strictly_similar(&self) -> Vec<String> {
        self.findings
            .iter()
            .filter(|f| f.check == "strict-similarity" && f.status == Status::Pass)
            .filter_map(|f| f.rule.clone())
            .collect()
    }

    pub fn strict_failures(&self) -> usize {
        self.findings
            .iter()
            .filter(|f| f.check == "strict-similarity" && f.status != Status::Pass)
            .count()
    }

    pub fn summary(&self) -> String {
        let fails = self.failures().count();
        let pairs = if self.pairs > 0 {
            format!(", {} pairs", self.pairs)
        } else {
            String::new()
        };
        let rules = match self.rules {
            1 => "1 rule".to_string(),
            n => format!("{n} rules"),
        };
        match fails {
            0 => format!("{rules}{pairs}, all pass"),
            1 => format!("{rules}{pairs}, 1 failure"),
            n => format!("{rules}{pairs}, {n} failures"),
        }
    }

    fn push(&mut self, check: &'static str, rule: Option<&str>, status: Status, detail: String) {
        self.findings.push(Finding {
            check,
            rule: rule.map(str::to_string),
            status,
            detail,
        });
    }
}

/// Everything about one rule needed by the cross-rule checks.
struct RuleGeom {
    parent: String,
    verts: Vec<Point>,
    anchors: Vec<Point>,
    marks: Option<Vec<Mark>>,
    /// Boundary path from anchor k to anchor k+1 (local vertex order).
    /// An edge without a path is the seam of a jointly checked pair.
    paths: Option<Vec<Option<Vec<Point>>>>,
    polys: Vec<Vec<Point>>,
    /// Single boundary cycle that misses one of the anchors; left for
    /// [`check_joint`].
    pending: Option<Vec<Point>>,
}

pub fn validate_ruleset(rs: &RuleSet) -> ValidationReport {
    let mut rep = ValidationReport {
        rules: rs.rules.len(),
        pairs: rs.pairs.len(),
        ..Default::default()
    };
    let mut geoms = Vec::new();
    for rule in &rs.rules {
        match check_rule(rs, rule, &mut rep) {
            Some(g) => geoms.push(g),
            None => continue,
        }
    }
    check_joint(&mut geoms, &mut rep);
    if rs.similarity == Similarity::Pseudo || rs.glue_mode() {
        check_edge_paths(rs, &geoms, &mut rep);
    }
    check_pairs(rs, &mut rep);
    rep
}

fn check_rule(rs: &RuleSet, rule: &Rule, rep: &mut ValidationReport) -> Option<RuleGeom> {
    let name = rule.parent.as_str();
    let r = Some(name);
    let mut kids: Vec<Resolved> = Vec::new();
    for c in &rule.children {
        match resolve(c, &rs.registry) {
            Ok(x) => kids.push(x),
            Err(e) => {
                rep.push("resolve", r, Status::Fail, e.to_string());
                return None;
            }
        }
    }
    for c in &rule.children {
        if !rs.regime.allows(c.place.rot, c.place.flip) {
            rep.push(
                "regime",
                r,
                Status::Fail,
                format!("child {} has rot {} flip {}", c.variant, c.place.rot, c.place.flip),
            );
        }
    }
    let polys: Vec<Vec<Point>> = kids.iter().map(|k| k.pts.clone()).collect();

    let mut overlaps = 0;
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if convex_interiors_meet(&polys[i], &polys[j]) {
                overlaps += 1;
                rep.push(
                    "disjoint",
                    r,
                    Status::Fail,
                    format!("children {i} and {j} overlap near {}", polys[i][0]),
                );
            }
        }
    }
    if overlaps == 0 {
        rep.push("disjoint", r, Status::Pass, format!("{} children", polys.len()));
    }
    let tj = t_junctions(&polys);
    if let Some((i, e, v)) = tj.first() {
        rep.push(
            "edge-to-edge",
            r,
            Status::Fail,
            format!("vertex {v} lies inside edge {e} of child {i}"),
        );
    }

    let verts = rs.base_vertices(name);
    let anchors = rs.anchors(name);
    let parent_a2 = area2(&verts);
    let kids_a2 = polys.iter().fold(Scalar::zero(), |s, p| s + area2(p));
    let lam2 = &rs.inflation * &rs.inflation;
    let area_ok = kids_a2 == &lam2 * &parent_a2.abs();
    let inflated: Vec<Point> = ccw(&verts).iter().map(|p| p.scale(&rs.inflation)).collect();
    let bedges = boundary_edges(&polys);
    let on_parent = bedges.iter().all(|(p, q)| on_polygon_edge(&inflated, p, q));
    let inside = polys.iter().all(|poly| poly.iter().all(|p| inside_convex(&inflated, p)));
    let strict = area_ok && on_parent && inside && tj.is_empty() && overlaps == 0;

    let cycles = boundary_cycles(&bedges);
    let mut paths = None;
    let mut pending = None;
    match rs.similarity {
        Similarity::Exact => {
            if strict {
                rep.push("strict-similarity", r, Status::Pass, "children tile the inflated parent".into());
            } else {
                if !inside || !area_ok {
                    rep.push(
                        "gap",
                        r,
                        Status::Fail,
                        format!(
                            "children cover area {} inside an inflated parent of area {}",
                            half(&kids_a2),
                            half(&(&lam2 * &parent_a2.abs()))
                        ),
                    );
                }
                if !on_parent {
                    let bad = bedges.iter().find(|(p, q)| !on_polygon_edge(&inflated, p, q)).unwrap();
                    rep.push(
                        "boundary",
                        r,
                        Status::Fail,
                        format!("boundary edge {} -> {} is off the inflated parent", bad.0, bad.1),
                    );
                }
                rep.push("strict-similarity", r, Status::Fail, "see preceding findings".into());
            }
        }
        Similarity::Pseudo => {
            rep.push(
                "strict-similarity",
                r,
                if strict { Status::Pass } else { Status::Info },
                if strict {
                    "children tile the inflated parent".into()
                } else {
                    format!(
                        "pseudo-similar: area ratio {}, boundary {}",
                        ratio_text(&kids_a2, &parent_a2.abs()),
                        if on_parent { "on parent" } else { "follows edge paths" }
                    )
                },
            );
            if cycles.len() != 1 {
                rep.push(
                    "disk",
                    r,
                    Status::Fail,
                    format!("children union has {} boundary cycles", cycles.len()),
                );
            } else {
                match anchor_paths(&cycles[0], &anchors) {
                    Ok(p) => {
                        rep.push("disk", r, Status::Pass, "single boundary cycle through all anchors".into());
                        paths = Some(p.into_iter().map(Some).collect());
                    }
                    Err(_) if anchors.iter().any(|a| !cycles[0].contains(a)) => {
                        pending = Some(cycles[0].clone());
                    }
                    Err(msg) => rep.push("anchors", r, Status::Fail, msg),
                }
            }
        }
    }

    let marks = rs.registry.variant(name).ok().and_then(|v| v.marks.clone());
    Some(RuleGeom {
        parent: name.to_string(),
        verts,
        anchors,
        marks,
        paths,
        polys,
        pending,
    })
}

fn half(s: &Scalar) -> Scalar {
    s * &Scalar::frac(1, 2)
}

fn ratio_text(num: &Scalar, den: &Scalar) -> String {
    match num.checked_div(den) {
        Ok(q) => format!("{:.4}", q.to_f64()),
        Err(_) => "undefined".into(),
    }
}

fn ccw(verts: &[Point]) -> Vec<Point> {
    if area2(verts).signum() < 0 {
        verts.iter().rev().cloned().collect()
    } else {
        verts.to_vec()
    }
}

fn inside_convex(poly: &[Point], p: &Point) -> bool {
    let n = poly.len();
    (0..n).all(|i| orientation(&poly[i], &poly[(i + 1) % n], p) >= 0)
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    p == a || p == b || strictly_inside_segment(a, b, p)
}

fn on_polygon_edge(poly: &[Point], p: &Point, q: &Point) -> bool {
    let n = poly.len();
    (0..n).any(|i| {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        on_segment(a, b, p) && on_segment(a, b, q) && b.sub(a).dot(&q.sub(p)).signum() > 0
    })
}

/// Split the boundary cycle at the anchors. Anchors must be cycle vertices
/// met in local order (either direction, matching the parent's handedness).
fn anchor_paths(cycle: &[Point], anchors: &[Point]) -> Result<Vec<Vec<Point>>, String> {
    let n = cycle.len();
    let mut idx = Vec::new();
    for a in anchors {
        match cycle.iter().position(|p| p == a) {
            Some(i) => idx.push(i),
            None => return Err(format!("anchor {a} is not a boundary vertex")),
        }
    }
    let k = anchors.len();
    let fwd = (0..k).all(|j| {
        let (s, e) = (idx[j], idx[(j + 1) % k]);
        let len = (e + n - s) % n;
        (1..len).all(|t| !idx.contains(&((s + t) % n)))
    });
    let mut out = Vec::new();
    for j in 0..k {
        let (s, e) = (idx[j], idx[(j + 1) % k]);
        let mut path = vec![cycle[s].clone()];
        let mut t = s;
        while t != e {
            t = if fwd { (t + 1) % n } else { (t + n - 1) % n };
            path.push(cycle[t].clone());
        }
        if path.len() < 2 {
            return Err("degenerate anchor path".into());
        }
        out.push(path);
    }
    let total: usize = out.iter().map(|p| p.len() - 1).sum();
    if total != n {
        return Err("anchors are not in cyclic order along the boundary".into());
    }
    Ok(out)
}

/// Rules whose children miss one of their own anchors are checked together
/// with the unique rule across a seam edge: a mark symbol carried by exactly
/// these two variants, with opposite directions. Glued along the seam, the
/// two child sets must form a disk through all remaining anchors; the outer
/// boundary paths then come from that joint disk.
fn check_joint(geoms: &mut [RuleGeom], rep: &mut ValidationReport) {
    let mut owners: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
    for (gi, g) in geoms.iter().enumerate() {
        if let Some(m) = &g.marks {
            for (k, mk) in m.iter().enumerate() {
                owners.entry(mk.symbol.as_str()).or_default().push((gi, k));
            }
        }
    }
    let mut updates: Vec<(usize, Vec<Option<Vec<Point>>>)> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for gi in 0..geoms.len() {
        if geoms[gi].pending.is_none() || seen.contains(&gi) {
            continue;
        }
        let g = &geoms[gi];
        let seam = g.marks.as_ref().and_then(|m| {
            m.iter().enumerate().find_map(|(k, mk)| {
                let o = &owners[mk.symbol.as_str()];
                let other = o.iter().find(|(j, _)| *j != gi)?;
                let ok = o.len() == 2
                    && geoms[other.0].marks.as_ref().unwrap()[other.1] == mk.complement();
                ok.then_some((k, other.0, other.1))
            })
        });
        let Some((k, qi, l)) = seam else {
            rep.push("anchors", Some(&g.parent), Status::Fail, "an anchor is not a boundary vertex".into());
            continue;
        };
        let q = &geoms[qi];
        let (ng, nq) = (g.anchors.len(), q.anchors.len());
        let t = g.anchors[k].sub(&q.anchors[(l + 1) % nq]);
        let joint_name = format!("{} + {}", g.parent, q.parent);
        if q.anchors[l].add(&t) != g.anchors[(k + 1) % ng] {
            rep.push("joint", Some(&joint_name), Status::Fail, "seam anchors differ in length".into());
            continue;
        }
        let moved: Vec<Vec<Point>> = q.polys.iter().map(|p| p.iter().map(|x| x.add(&t)).collect()).collect();
        let clash = g
            .polys
            .iter()
            .any(|a| moved.iter().any(|b| convex_interiors_meet(a, b)));
        if clash {
            rep.push("joint", Some(&joint_name), Status::Fail, "children of the two rules overlap".into());
            continue;
        }
        let mut all = g.polys.clone();
        all.extend(moved);
        let cycles = boundary_cycles(&boundary_edges(&all));
        if cycles.len() != 1 {
            rep.push(
                "joint",
                Some(&joint_name),
                Status::Fail,
                format!("joint union has {} boundary cycles", cycles.len()),
            );
            continue;
        }
        let mut anchors: Vec<Point> = (1..=ng).map(|j| g.anchors[(k + j) % ng].clone()).collect();
        anchors.extend((2..nq).map(|j| q.anchors[(l + j) % nq].add(&t)));
        let paths = match anchor_paths(&cycles[0], &anchors) {
            Ok(p) => p,
            Err(msg) => {
                rep.push("joint", Some(&joint_name), Status::Fail, msg);
                continue;
            }
        };
        let mut gp = vec![None; ng];
        for j in 0..ng - 1 {
            gp[(k + 1 + j) % ng] = Some(paths[j].clone());
        }
        let mut qp = vec![None; nq];
        for j in 0..nq - 1 {
            let back: Vec<Point> = paths[ng - 1 + j].iter().map(|x| x.sub(&t)).collect();
            qp[(l + 1 + j) % nq] = Some(back);
        }
        rep.push(
            "disk",
            Some(&joint_name),
            Status::Pass,
            "joint boundary cycle through all anchors".into(),
        );
        updates.push((gi, gp));
        updates.push((qi, qp));
        seen.push(qi);
    }
    for (i, p) in updates {
        geoms[i].paths = Some(p);
        geoms[i].pending = None;
    }
}

/// Relative orientations two tiles of a tiling can have.
pub fn relative_group(rs: &RuleSet) -> Vec<Sym> {
    match rs.regime {
        Regime::HalfTurn => vec![Sym::new(0, false), Sym::new(6, false)],
        Regime::Free => generated_group(rs),
    }
}

/// Closure of the children's linear parts together with the identity.
pub fn generated_group(rs: &RuleSet) -> Vec<Sym> {
    let mut gens: Vec<Sym> = rs
        .rules
        .iter()
        .flat_map(|r| r.children.iter().map(|c| c.place.sym()))
        .collect();
    gens.sort();
    gens.dedup();
    let mut group = vec![Sym::ID];
    let mut i = 0;
    while i < group.len() {
        for g in &gens {
            let h = group[i].then(g);
            if !group.contains(&h) {
                group.push(h);
            }
        }
        i += 1;
    }
    group.sort();
    group
}

/// Whenever two parent tiles may share an edge (complementary marks,
/// opposite sides), their supertile boundary paths along that edge coincide.
fn check_edge_paths(rs: &RuleSet, geoms: &[RuleGeom], rep: &mut ValidationReport) {
    if geoms.iter().any(|g| g.marks.is_none()) {
        rep.push("edge-paths", None, Status::Info, "variants carry no marks; skipped".into());
        return;
    }
    if geoms.iter().any(|g| g.paths.is_none()) {
        rep.push("edge-paths", None, Status::Fail, "some rule has no boundary paths".into());
        return;
    }
    let mut seams = 0usize;
    let group = relative_group(rs);
    let mut checked = 0usize;
    let mut failures: BTreeMap<String, String> = BTreeMap::new();
    for g1 in geoms {
        let m1 = g1.marks.as_ref().unwrap();
        let n1 = g1.verts.len();
        for k1 in 0..n1 {
            for g2 in geoms {
                let m2 = g2.marks.as_ref().unwrap();
                let n2 = g2.verts.len();
                for k2 in 0..n2 {
                    if m1[k1] != m2[k2].complement() {
                        continue;
                    }
                    if g1.paths.as_ref().unwrap()[k1].is_none() || g2.paths.as_ref().unwrap()[k2].is_none() {
                        seams += 1;
                        continue;
                    }
                    for h in &group {
                        match edge_meet(g1, k1, g2, k2, h) {
                            Meet::None => {}
                            Meet::Ok => checked += 1,
                            Meet::Bad(msg) => {
                                checked += 1;
                                failures
                                    .entry(format!("{}:{} / {}:{}", g1.parent, k1, g2.parent, k2))
                                    .or_insert(msg);
                            }
                        }
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        rep.push(
            "edge-paths",
            None,
            Status::Pass,
            if seams == 0 {
                format!("{checked} compatible edge meetings checked")
            } else {
                format!("{checked} compatible edge meetings checked, {seams} seam pairings covered jointly")
            },
        );
    } else {
        for (k, msg) in failures {
            rep.push("edge-paths", Some(&k), Status::Fail, msg);
        }
    }
}

enum Meet {
    None,
    Ok,
    Bad(String),
}

fn edge_meet(g1: &RuleGeom, k1: usize, g2: &RuleGeom, k2: usize, h: &Sym) -> Meet {
    let n1 = g1.verts.len();
    let n2 = g2.verts.len();
    let (a0, a1) = (&g1.verts[k1], &g1.verts[(k1 + 1) % n1]);
    let b0 = h.apply(&g2.verts[k2]);
    let b1 = h.apply(&g2.verts[(k2 + 1) % n2]);
    // tile 2's edge must land on tile 1's edge
    let (t, swapped) = if b1.sub(&b0) == a0.sub(a1) {
        (a1.sub(&b0), true)
    } else if b1.sub(&b0) == a1.sub(a0) {
        (a0.sub(&b0), false)
    } else {
        return Meet::None;
    };
    let place = Placement::from_sym(*h, t);
    let other1 = &g1.verts[(k1 + 2) % n1];
    let other2 = place.apply(&g2.verts[(k2 + 2) % n2]);
    if orientation(a0, a1, other1) * orientation(a0, a1, &other2) >= 0 {
        return Meet::None;
    }
    // anchor translation for tile 2 from the first shared vertex
    let (s0, s1) = if swapped {
        (&g1.anchors[(k1 + 1) % n1], &g1.anchors[k1])
    } else {
        (&g1.anchors[k1], &g1.anchors[(k1 + 1) % n1])
    };
    let c0 = h.apply(&g2.anchors[k2]);
    let c1 = h.apply(&g2.anchors[(k2 + 1) % n2]);
    let tt = s0.sub(&c0);
    if c1.add(&tt) != *s1 {
        return Meet::Bad("anchor edges differ".into());
    }
    let p1 = g1.paths.as_ref().unwrap()[k1].as_ref().unwrap();
    let p2: Vec<Point> = g2.paths.as_ref().unwrap()[k2]
        .as_ref()
        .unwrap()
        .iter()
        .map(|p| h.apply(p).add(&tt))
        .collect();
    let rev: Vec<Point> = p2.iter().rev().cloned().collect();
    if *p1 == p2 || *p1 == rev {
        Meet::Ok
    } else {
        Meet::Bad(format!(
            "boundary paths differ ({} vs {} points)",
            p1.len(),
            p2.len()
        ))
    }
}

fn check_pairs(rs: &RuleSet, rep: &mut ValidationReport) {
    if rs.pairs.is_empty() {
        return;
    }
    let inv = rs.involution();
    let mut bad = 0;
    for v in &rs.registry.variants {
        if !inv.contains_key(&v.id) {
            bad += 1;
            rep.push("involution", Some(&v.id), Status::Fail, "variant is unpaired".into());
        }
    }
    for rule in &rs.rules {
        let Some(p) = inv.get(&rule.parent) else { continue };
        let Some(other) = rs.rule(p) else { continue };
        let image = child_multiset(rule, Some(&inv));
        if image != child_multiset(other, None) {
            bad += 1;
            rep.push(
                "involution",
                Some(&rule.parent),
                Status::Fail,
                format!("children do not map onto the children of {p}"),
            );
        }
    }
    if bad == 0 {
        rep.push(
            "involution",
            None,
            Status::Pass,
            format!("{} pairs closed under the pairing", rs.pairs.len()),
        );
    }
}

pub(crate) fn child_multiset(rule: &Rule, inv: Option<&HashMap<String, String>>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for c in &rule.children {
        let id = match inv {
            Some(inv) => inv.get(&c.variant).cloned().unwrap_or_else(|| format!("?{}", c.variant)),
            None => c.variant.clone(),
        };
        *m.entry(id).or_default() += 1;
    }
    m
}
