//! Exact arithmetic in Q[√3] and rigid motions by multiples of 30°.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed scalar at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
}

pub type Rat = BigRational;

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn half(n: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(2))
}

/// The number `a + b·√3` with rational `a`, `b`.
///
/// `BigRational` keeps fractions reduced with a positive denominator, so
/// derived equality and hashing agree with value equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Scalar {
    pub a: Rat,
    pub b: Rat,
}

impl Scalar {
    pub fn new(a: Rat, b: Rat) -> Self {
        Scalar { a, b }
    }

    pub fn rational(a: Rat) -> Self {
        Scalar { a, b: Rat::zero() }
    }

    pub fn int(n: i64) -> Self {
        Scalar::rational(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Scalar::rational(Rat::new(BigInt::from(n), BigInt::from(d)))
    }

    /// `p/q + r/s·√3` for small literals in tests and tables.
    pub fn q3(p: i64, q: i64, r: i64, s: i64) -> Self {
        Scalar::new(
            Rat::new(BigInt::from(p), BigInt::from(q)),
            Rat::new(BigInt::from(r), BigInt::from(s)),
        )
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn sqrt3() -> Self {
        Scalar::new(Rat::zero(), Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Sign of the real value, exactly.
    pub fn signum(&self) -> i8 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: the larger of a² and 3b² wins
        let a2 = &self.a * &self.a;
        let b2 = &self.b * &self.b * rat(3);
        if a2 > b2 {
            sa
        } else {
            sb
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Conjugate `a - b·√3`.
    pub fn conj(&self) -> Scalar {
        Scalar::new(self.a.clone(), -&self.b)
    }

    /// Field norm `a² - 3b²`.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * rat(3)
    }

    pub fn inv(&self) -> Result<Scalar, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conj();
        Ok(Scalar::new(c.a / &n, c.b / n))
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, ExactError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, r: &Rat) -> Scalar {
        Scalar::new(&self.a * r, &self.b * r)
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * 3f64.sqrt()
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor().to_integer();
        }
        let est = self.to_f64().floor();
        let mut n = BigInt::from(est as i64);
        // nudge the float estimate until exact comparisons agree
        loop {
            let s = Scalar::rational(Rat::from_integer(n.clone()));
            if s > *self {
                n -= 1;
                continue;
            }
            let s1 = Scalar::rational(Rat::from_integer(&n + 1));
            if s1 <= *self {
                n += 1;
                continue;
            }
            return n;
        }
    }

    /// Lowest common denominator of both coefficients.
    pub fn denom_lcm(&self) -> BigInt {
        self.a.denom().lcm(self.b.denom())
    }
}

fn sign_of(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self - other).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.b.is_zero() && rhs.b.is_zero() {
            return Scalar::rational(&self.a * &rhs.a);
        }
        let a = &self.a * &rhs.a + &self.b * &rhs.b * rat(3);
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Scalar::new(a, b)
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.a, -&self.b)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical literal: `a`, `a + b*r3` or `a - b*r3`.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rat(&self.a));
        }
        if self.b.is_negative() {
            write!(f, "{} - {}*r3", fmt_rat(&self.a), fmt_rat(&-&self.b))
        } else {
            write!(f, "{} + {}*r3", fmt_rat(&self.a), fmt_rat(&self.b))
        }
    }
}

fn skip_ws(s: &[char], pos: &mut usize) {
    while *pos < s.len() && (s[*pos] == ' ' || s[*pos] == '\t') {
        *pos += 1;
    }
}

fn syntax(offset: usize, msg: impl Into<String>) -> ExactError {
    ExactError::Syntax {
        offset,
        msg: msg.into(),
    }
}

fn parse_uint(s: &[char], pos: &mut usize) -> Result<BigInt, ExactError> {
    let start = *pos;
    while *pos < s.len() && s[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(syntax(start, "expected digits"));
    }
    if *pos < s.len() && (s[*pos] == '.' || s[*pos] == 'e' || s[*pos] == 'E') {
        return Err(syntax(*pos, "floating-point literals are not allowed"));
    }
    let txt: String = s[start..*pos].iter().collect();
    Ok(txt.parse::<BigInt>().expect("digits"))
}

/// `['-'] int ['/' int]`
fn parse_rat(s: &[char], pos: &mut usize) -> Result<Rat, ExactError> {
    skip_ws(s, pos);
    let mut neg = false;
    if *pos < s.len() && s[*pos] == '-' {
        neg = true;
        *pos += 1;
    }
    let n = parse_uint(s, pos)?;
    let mut d = BigInt::one();
    let save = *pos;
    skip_ws(s, pos);
    if *pos < s.len() && s[*pos] == '/' {
        *pos += 1;
        skip_ws(s, pos);
        let at = *pos;
        d = parse_uint(s, pos)?;
        if d.is_zero() {
            return Err(syntax(at, "zero denominator"));
        }
    } else {
        *pos = save;
    }
    let r = Rat::new(n, d);
    Ok(if neg { -r } else { r })
}

/// Parse a scalar literal starting at `pos`, advancing past it.
pub fn parse_scalar_at(s: &[char], pos: &mut usize) -> Result<Scalar, ExactError> {
    let a = parse_rat(s, pos)?;
    let save = *pos;
    skip_ws(s, pos);
    if *pos < s.len() && (s[*pos] == '+' || s[*pos] == '-') {
        let neg = s[*pos] == '-';
        *pos += 1;
        let b = parse_rat(s, pos)?;
        skip_ws(s, pos);
        if *pos >= s.len() || s[*pos] != '*' {
            return Err(syntax(*pos, "expected '*r3'"));
        }
        *pos += 1;
        skip_ws(s, pos);
        if *pos + 1 < s.len() && s[*pos] == 'r' && s[*pos + 1] == '3' {
            *pos += 2;
        } else {
            return Err(syntax(*pos, "expected 'r3'"));
        }
        let b = if neg { -b } else { b };
        return Ok(Scalar::new(a, b));
    }
    *pos = save;
    Ok(Scalar::rational(a))
}

impl FromStr for Scalar {
    type Err = ExactError;
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let s: Vec<char> = text.chars().collect();
        let mut pos = 0;
        let v = parse_scalar_at(&s, &mut pos)?;
        skip_ws(&s, &mut pos);
        if pos != s.len() {
            return Err(syntax(pos, "trailing characters"));
        }
        Ok(v)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Point { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Point::new(Scalar::int(x), Scalar::int(y))
    }

    pub fn origin() -> Self {
        Point::default()
    }

    pub fn add(&self, o: &Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn sub(&self, o: &Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn neg(&self) -> Point {
        Point::new(-&self.x, -&self.y)
    }

    pub fn scale(&self, k: &Scalar) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    pub fn cross(&self, o: &Point) -> Scalar {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn dot(&self, o: &Point) -> Scalar {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn norm2(&self) -> Scalar {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// cos(k·30°) for k in 0..12
fn cos30(k: u8) -> Scalar {
    match k % 12 {
        0 => Scalar::int(1),
        1 | 11 => Scalar::new(Rat::zero(), half(1)),
        2 | 10 => Scalar::rational(half(1)),
        3 | 9 => Scalar::zero(),
        4 | 8 => Scalar::rational(half(-1)),
        5 | 7 => Scalar::new(Rat::zero(), half(-1)),
        _ => Scalar::int(-1),
    }
}

fn sin30(k: u8) -> Scalar {
    cos30((k + 9) % 12)
}

/// Rotate about the origin by `k·30°`.
pub fn rotate(k: u8, p: &Point) -> Point {
    match k % 12 {
        0 => p.clone(),
        3 => Point::new(-&p.y, p.x.clone()),
        6 => p.neg(),
        9 => Point::new(p.y.clone(), -&p.x),
        k => {
            let c = cos30(k);
            let s = sin30(k);
            Point::new(&c * &p.x - &s * &p.y, &s * &p.x + &c * &p.y)
        }
    }
}

/// Unit vector at angle `k·30°`.
pub fn unit(k: u8) -> Point {
    Point::new(cos30(k), sin30(k))
}

/// Linear part of a placement: reflect across the x-axis when `flip`, then rotate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Default)]
pub struct Sym {
    pub rot: u8,
    pub flip: bool,
}

impl Sym {
    pub const ID: Sym = Sym { rot: 0, flip: false };

    pub fn new(rot: u8, flip: bool) -> Self {
        Sym {
            rot: rot % 12,
            flip,
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        if self.flip {
            rotate(self.rot, &Point::new(p.x.clone(), -&p.y))
        } else {
            rotate(self.rot, p)
        }
    }

    pub fn then(&self, inner: &Sym) -> Sym {
        let r = if self.flip {
            (12 + self.rot - inner.rot) % 12
        } else {
            (self.rot + inner.rot) % 12
        };
        Sym::new(r, self.flip ^ inner.flip)
    }

    pub fn inverse(&self) -> Sym {
        if self.flip {
            *self
        } else {
            Sym::new((12 - self.rot) % 12, false)
        }
    }

    /// All 24 elements in (rot, flip) order.
    pub fn all() -> Vec<Sym> {
        let mut v = Vec::with_capacity(24);
        for r in 0..12 {
            v.push(Sym::new(r, false));
            v.push(Sym::new(r, true));
        }
        v.sort();
        v
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Placement {
    pub rot: u8,
    pub flip: bool,
    pub shift: Point,
}

impl Placement {
    pub fn identity() -> Self {
        Placement::default()
    }

    pub fn new(rot: u8, flip: bool, shift: Point) -> Self {
        Placement {
            rot: rot % 12,
            flip,
            shift,
        }
    }

    pub fn translation(shift: Point) -> Self {
        Placement::new(0, false, shift)
    }

    pub fn from_sym(s: Sym, shift: Point) -> Self {
        Placement::new(s.rot, s.flip, shift)
    }

    pub fn sym(&self) -> Sym {
        Sym::new(self.rot, self.flip)
    }

    pub fn apply(&self, p: &Point) -> Point {
        self.sym().apply(p).add(&self.shift)
    }

    /// `compose(o, i)` applies `i` first.
    pub fn compose(&self, inner: &Placement) -> Placement {
        let s = self.sym().then(&inner.sym());
        Placement::new(s.rot, s.flip, self.apply(&inner.shift))
    }

    pub fn inverse(&self) -> Placement {
        let si = self.sym().inverse();
        Placement::from_sym(si, si.apply(&self.shift).neg())
    }
}

pub fn compose(outer: &Placement, inner: &Placement) -> Placement {
    outer.compose(inner)
}

pub fn apply_placement(p: &Placement, pt: &Point) -> Point {
    p.apply(pt)
}

/// Sign of `(q - p) × (r - p)`.
pub fn orientation(p: &Point, q: &Point, r: &Point) -> i8 {
    q.sub(p).cross(&r.sub(p)).signum()
}

/// Twice the signed area of a polygon.
pub fn area2(pts: &[Point]) -> Scalar {
    let n = pts.len();
    let mut s = Scalar::zero();
    for i in 0..n {
        s = s + pts[i].cross(&pts[(i + 1) % n]);
    }
    s
}

/// Direction class of a nonzero vector whose angle is a multiple of 30°,
/// as `k` in 0..12. Returns `None` for other directions.
pub fn direction_index(v: &Point) -> Option<u8> {
    if v.is_zero() {
        return None;
    }
    (0..12u8).find(|&k| {
        let u = unit(k);
        u.cross(v).is_zero() && u.dot(v).signum() > 0
    })
}

/// Exact comparison of directions by angle in [0, 2π).
pub fn angle_cmp(u: &Point, v: &Point) -> Ordering {
    fn half(p: &Point) -> u8 {
        let ys = p.y.signum();
        if ys > 0 || (ys == 0 && p.x.signum() > 0) {
            0
        } else {
            1
        }
    }
    let (hu, hv) = (half(u), half(v));
    if hu != hv {
        return hu.cmp(&hv);
    }
    match u.cross(v).signum() {
        1 => Ordering::Less,
        -1 => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_roundtrip() {
        for t in ["2", "-1/2", "1/2 + 3/2*r3", "0 - 1*r3", "-7/3 + 1*r3"] {
            let s: Scalar = t.parse().unwrap();
            let again: Scalar = s.to_string().parse().unwrap();
            assert_eq!(s, again);
        }
        assert_eq!("1/2+3/2*r3".parse::<Scalar>().unwrap(), Scalar::q3(1, 2, 3, 2));
    }

    #[test]
    fn rejects_floats() {
        assert!("0.5".parse::<Scalar>().is_err());
        assert!("1 + 0.5*r3".parse::<Scalar>().is_err());
        assert!("1e3".parse::<Scalar>().is_err());
    }

    #[test]
    fn sign_of_mixed_terms() {
        assert_eq!(Scalar::q3(-7, 4, 1, 1).signum(), -1);
        assert_eq!(Scalar::q3(2, 1, -1, 1).signum(), 1);
        assert_eq!(Scalar::q3(-2, 1, 1, 1).signum(), -1);
    }

    #[test]
    fn sym_then_matches_pointwise() {
        let p = Point::new(Scalar::frac(3, 7), Scalar::q3(1, 1, -2, 5));
        for a in Sym::all() {
            for b in Sym::all() {
                assert_eq!(a.then(&b).apply(&p), a.apply(&b.apply(&p)));
            }
        }
    }
}
