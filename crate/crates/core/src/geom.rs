//! Exact polygon predicates shared by the validator and the patch checks.
//!
//! Everything is generic over [`Coord`] so that the same code runs on exact
//! `Q[√3]` points and on the scaled integer form used for large patches.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::exact::{Point, Scalar};

pub trait Coord: Clone + Eq + Hash + Ord + std::fmt::Debug {
    /// Sign of `(q - p) × (r - p)`.
    fn orient(p: &Self, q: &Self, r: &Self) -> i8;
    /// Sign of `(q - p) · (r - p)`.
    fn dot_sign(p: &Self, q: &Self, r: &Self) -> i8;
    fn approx(&self) -> (f64, f64);
    /// Sign of the signed area of a closed polygon.
    fn area_sign(poly: &[Self]) -> i8;
    /// Difference vector `self - o`.
    fn minus(&self, o: &Self) -> Self;
    /// Twice the summed signed area of closed polygons, exactly, in the
    /// coordinates' own units.
    fn area2_total<'a>(polys: impl Iterator<Item = &'a [Self]>) -> Scalar
    where
        Self: 'a;
}

impl Coord for Point {
    fn orient(p: &Self, q: &Self, r: &Self) -> i8 {
        crate::exact::orientation(p, q, r)
    }
    fn dot_sign(p: &Self, q: &Self, r: &Self) -> i8 {
        q.sub(p).dot(&r.sub(p)).signum()
    }
    fn approx(&self) -> (f64, f64) {
        self.to_f64()
    }
    fn area_sign(poly: &[Self]) -> i8 {
        crate::exact::area2(poly).signum()
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn area2_total<'a>(polys: impl Iterator<Item = &'a [Self]>) -> Scalar {
        polys.fold(Scalar::zero(), |s, q| &s + &crate::exact::area2(q))
    }
}

/// `a + b·√3` with integer parts; the scaled form of an exact coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Z3 {
    pub a: i64,
    pub b: i64,
}

fn sign_z3(a: i128, b: i128) -> i8 {
    let (sa, sb) = (a.signum() as i8, b.signum() as i8);
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return sb;
    }
    // opposite signs: compare a² with 3b²
    let bigger_a = match (a.checked_mul(a), b.checked_mul(b).and_then(|v| v.checked_mul(3))) {
        (Some(a2), Some(b2)) => a2 > b2,
        _ => {
            let (ba, bb) = (BigInt::from(a), BigInt::from(b));
            &ba * &ba > &bb * &bb * 3
        }
    };
    if bigger_a {
        sa
    } else {
        sb
    }
}

impl Z3 {
    fn sub(self, o: Z3) -> (i128, i128) {
        (self.a as i128 - o.a as i128, self.b as i128 - o.b as i128)
    }
    fn f(self) -> f64 {
        self.a as f64 + self.b as f64 * 3f64.sqrt()
    }
}

impl Ord for Z3 {
    fn cmp(&self, o: &Self) -> Ordering {
        let (a, b) = self.sub(*o);
        sign_z3(a, b).cmp(&0)
    }
}

impl PartialOrd for Z3 {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IPt {
    pub x: Z3,
    pub y: Z3,
}

/// (a1 + b1√3)(a2 + b2√3)
fn mul3(x: (i128, i128), y: (i128, i128)) -> (i128, i128) {
    (x.0 * y.0 + 3 * x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

/// Twice the signed area of an integer polygon, as `a + b√3`.
fn area2_z3(poly: &[IPt]) -> (i128, i128) {
    let n = poly.len();
    let (mut a, mut b) = (0i128, 0i128);
    for i in 0..n {
        let (p, q) = (&poly[i], &poly[(i + 1) % n]);
        let l = mul3((p.x.a as i128, p.x.b as i128), (q.y.a as i128, q.y.b as i128));
        let r = mul3((p.y.a as i128, p.y.b as i128), (q.x.a as i128, q.x.b as i128));
        a += l.0 - r.0;
        b += l.1 - r.1;
    }
    (a, b)
}

impl Coord for IPt {
    fn orient(p: &Self, q: &Self, r: &Self) -> i8 {
        let (ux, uy) = (q.x.sub(p.x), q.y.sub(p.y));
        let (vx, vy) = (r.x.sub(p.x), r.y.sub(p.y));
        let l = mul3(ux, vy);
        let rr = mul3(uy, vx);
        sign_z3(l.0 - rr.0, l.1 - rr.1)
    }
    fn dot_sign(p: &Self, q: &Self, r: &Self) -> i8 {
        let (ux, uy) = (q.x.sub(p.x), q.y.sub(p.y));
        let (vx, vy) = (r.x.sub(p.x), r.y.sub(p.y));
        let l = mul3(ux, vx);
        let rr = mul3(uy, vy);
        sign_z3(l.0 + rr.0, l.1 + rr.1)
    }
    fn approx(&self) -> (f64, f64) {
        (self.x.f(), self.y.f())
    }
    fn area_sign(poly: &[Self]) -> i8 {
        let (a, b) = area2_z3(poly);
        sign_z3(a, b)
    }
    fn area2_total<'a>(polys: impl Iterator<Item = &'a [Self]>) -> Scalar {
        let (mut a, mut b) = (0i128, 0i128);
        for q in polys {
            let (da, db) = area2_z3(q);
            a += da;
            b += db;
        }
        let r = |v: i128| num_rational::BigRational::from_integer(BigInt::from(v));
        Scalar::new(r(a), r(b))
    }
    fn minus(&self, o: &Self) -> Self {
        let d = |p: Z3, q: Z3| Z3 { a: p.a - q.a, b: p.b - q.b };
        IPt { x: d(self.x, o.x), y: d(self.y, o.y) }
    }
}

/// Least common denominator of every coordinate coefficient.
pub fn common_denominator(polys: &[Vec<Point>]) -> BigInt {
    let mut d = BigInt::one();
    for poly in polys {
        for p in poly {
            d = d.lcm(&p.x.denom_lcm()).lcm(&p.y.denom_lcm());
        }
    }
    d
}

/// Scale every coordinate by the common denominator and narrow to `i64`.
/// Returns `None` when some coordinate does not fit.
pub fn to_int_polys(polys: &[Vec<Point>]) -> Option<Vec<Vec<IPt>>> {
    let d = common_denominator(polys);
    let conv = |s: &Scalar| -> Option<Z3> {
        let a = (&s.a * &d).to_integer().to_i64()?;
        let b = (&s.b * &d).to_integer().to_i64()?;
        // leave headroom for products in the predicates
        if a.abs() > (1 << 30) || b.abs() > (1 << 30) {
            return None;
        }
        Some(Z3 { a, b })
    };
    polys
        .iter()
        .map(|poly| {
            poly.iter()
                .map(|p| Some(IPt { x: conv(&p.x)?, y: conv(&p.y)? }))
                .collect::<Option<Vec<_>>>()
        })
        .collect()
}

/// True when the interiors of two convex ccw polygons intersect.
pub fn convex_interiors_meet<C: Coord>(a: &[C], b: &[C]) -> bool {
    !separated(a, b) && !separated(b, a)
}

/// Some edge line of `a` has all of `b` on its closed outer side.
fn separated<C: Coord>(a: &[C], b: &[C]) -> bool {
    let n = a.len();
    (0..n).any(|i| {
        let (p, q) = (&a[i], &a[(i + 1) % n]);
        b.iter().all(|r| C::orient(p, q, r) <= 0)
    })
}

/// `r` lies strictly between `p` and `q` on the segment.
pub fn strictly_inside_segment<C: Coord>(p: &C, q: &C, r: &C) -> bool {
    r != p && r != q && C::orient(p, q, r) == 0 && C::dot_sign(r, p, q) < 0
}

pub struct BBox {
    pub min: (f64, f64),
    pub max: (f64, f64),
}

pub fn bbox<C: Coord>(poly: &[C]) -> BBox {
    let mut b = BBox {
        min: (f64::INFINITY, f64::INFINITY),
        max: (f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    for p in poly {
        let (x, y) = p.approx();
        b.min = (b.min.0.min(x), b.min.1.min(y));
        b.max = (b.max.0.max(x), b.max.1.max(y));
    }
    b
}

/// Uniform grid over bounding boxes for candidate-pair generation.
pub struct Grid {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    pub fn new(boxes: &[BBox]) -> Self {
        let mut size: f64 = 0.0;
        for b in boxes {
            size = size.max(b.max.0 - b.min.0).max(b.max.1 - b.min.1);
        }
        let cell = if size > 0.0 { size } else { 1.0 };
        let mut g = Grid {
            cell,
            cells: HashMap::new(),
        };
        for (i, b) in boxes.iter().enumerate() {
            for k in g.keys(b) {
                g.cells.entry(k).or_default().push(i);
            }
        }
        g
    }

    fn keys(&self, b: &BBox) -> Vec<(i64, i64)> {
        let eps = self.cell * 1e-9;
        let x0 = ((b.min.0 - eps) / self.cell).floor() as i64;
        let x1 = ((b.max.0 + eps) / self.cell).floor() as i64;
        let y0 = ((b.min.1 - eps) / self.cell).floor() as i64;
        let y1 = ((b.max.1 + eps) / self.cell).floor() as i64;
        let mut v = Vec::new();
        for x in x0..=x1 {
            for y in y0..=y1 {
                v.push((x, y));
            }
        }
        v
    }

    /// Indices whose boxes may touch `b`.
    pub fn query(&self, b: &BBox) -> Vec<usize> {
        let mut out = Vec::new();
        for k in self.keys(b) {
            if let Some(v) = self.cells.get(&k) {
                out.extend_from_slice(v);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn point_near_box<C: Coord>(b: &BBox, p: &C) -> bool {
    let (x, y) = p.approx();
    boxes_touch(b, &BBox { min: (x, y), max: (x, y) })
}

fn boxes_touch(a: &BBox, b: &BBox) -> bool {
    let tol = 1e-9 * (1.0 + a.max.0.abs() + a.max.1.abs());
    a.min.0 <= b.max.0 + tol
        && b.min.0 <= a.max.0 + tol
        && a.min.1 <= b.max.1 + tol
        && b.min.1 <= a.max.1 + tol
}

/// Pairs of polygons whose interiors intersect.
pub fn overlapping_pairs<C: Coord>(polys: &[Vec<C>]) -> Vec<(usize, usize)> {
    let boxes: Vec<BBox> = polys.iter().map(|p| bbox(p)).collect();
    let grid = Grid::new(&boxes);
    let mut out = Vec::new();
    for (i, b) in boxes.iter().enumerate() {
        for j in grid.query(b) {
            if j > i && boxes_touch(b, &boxes[j]) && convex_interiors_meet(&polys[i], &polys[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// (tile, ccw edge, vertex) triples where a vertex of the patch sits in the
/// relative interior of a tile edge.
pub fn t_junctions<C: Coord>(polys: &[Vec<C>]) -> Vec<(usize, usize, C)> {
    let boxes: Vec<BBox> = polys.iter().map(|p| bbox(p)).collect();
    let grid = Grid::new(&boxes);
    let mut out = Vec::new();
    for (i, poly) in polys.iter().enumerate() {
        let n = poly.len();
        let near = grid.query(&boxes[i]);
        for e in 0..n {
            let (p, q) = (&poly[e], &poly[(e + 1) % n]);
            let eb = bbox(&[p.clone(), q.clone()]);
            let mut hit: Vec<C> = Vec::new();
            for &j in &near {
                if j == i || !boxes_touch(&eb, &boxes[j]) {
                    continue;
                }
                for r in &polys[j] {
                    if point_near_box(&eb, r) && strictly_inside_segment(p, q, r) && !hit.contains(r) {
                        hit.push(r.clone());
                    }
                }
            }
            hit.sort();
            for r in hit {
                out.push((i, e, r));
            }
        }
    }
    out
}

/// Directed boundary edges of a union of ccw polygons (edges whose reverse
/// is not an edge of another polygon).
pub fn boundary_edges<C: Coord>(polys: &[Vec<C>]) -> Vec<(C, C)> {
    let mut all: HashMap<(C, C), usize> = HashMap::new();
    for poly in polys {
        let n = poly.len();
        for e in 0..n {
            *all.entry((poly[e].clone(), poly[(e + 1) % n].clone())).or_default() += 1;
        }
    }
    let mut out: Vec<(C, C)> = all
        .keys()
        .filter(|(p, q)| !all.contains_key(&(q.clone(), p.clone())))
        .cloned()
        .collect();
    out.sort();
    out
}

/// Trace boundary edges into closed cycles. At a vertex with several
/// outgoing edges, the walk takes the first one met turning clockwise from
/// the reversed incoming edge, which keeps pinched components apart.
pub fn boundary_cycles<C: Coord>(edges: &[(C, C)]) -> Vec<Vec<C>> {
    let mut out_of: HashMap<C, Vec<C>> = HashMap::new();
    for (p, q) in edges {
        out_of.entry(p.clone()).or_default().push(q.clone());
    }
    let mut used: HashSet<(C, C)> = HashSet::new();
    let mut cycles = Vec::new();
    for (p0, q0) in edges {
        if used.contains(&(p0.clone(), q0.clone())) {
            continue;
        }
        let mut cyc = vec![p0.clone()];
        let (mut u, mut v) = (p0.clone(), q0.clone());
        used.insert((u.clone(), v.clone()));
        while v != *p0 {
            cyc.push(v.clone());
            let cands: Vec<&C> = out_of
                .get(&v)
                .map(|c| c.iter().filter(|w| !used.contains(&(v.clone(), (*w).clone()))).collect())
                .unwrap_or_default();
            if cands.is_empty() {
                break;
            }
            let w = first_clockwise(&v, &u, &cands).clone();
            used.insert((v.clone(), w.clone()));
            u = v;
            v = w;
        }
        cycles.push(cyc);
    }
    cycles
}

/// Among `cands` (targets of edges out of `v`), the first reached rotating
/// clockwise from the ray `v -> u`.
fn first_clockwise<'a, C: Coord>(v: &C, u: &C, cands: &[&'a C]) -> &'a C {
    // clockwise angle from ray v->u to ray v->w, compared exactly
    let key = |w: &C| -> (u8, C) {
        let o = C::orient(v, u, w);
        let class = if o < 0 {
            0
        } else if o == 0 {
            if C::dot_sign(v, u, w) > 0 {
                3
            } else {
                1
            }
        } else {
            2
        };
        (class, w.clone())
    };
    let mut best = cands[0];
    for &w in &cands[1..] {
        let (cb, _) = key(best);
        let (cw, _) = key(w);
        let better = if cw != cb {
            cw < cb
        } else if cw == 0 || cw == 2 {
            // same half-turn: smaller clockwise angle means w is to the
            // left of v->best when turning clockwise
            C::orient(v, best, w) > 0
        } else {
            false
        };
        if better {
            best = w;
        }
    }
    best
}

/// Twice the signed area of a polygon given by exact points.
pub fn cycle_area2(c: &[Point]) -> Scalar {
    crate::exact::area2(c)
}
