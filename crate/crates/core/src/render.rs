//! SVG output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::exact::{Point, Scalar};
use crate::model::{ccw_marks, ModelError, Patch, Registry};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("no palette colour for decoration '{0}'")]
    MissingColour(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug)]
pub struct RenderOptions {
    pub strip_motifs: bool,
    pub palette: BTreeMap<String, String>,
    pub stroke_width: Scalar,
    pub scale: Scalar,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            strip_motifs: false,
            palette: default_palette(),
            stroke_width: Scalar::frac(1, 50),
            scale: Scalar::int(1),
        }
    }
}

pub fn default_palette() -> BTreeMap<String, String> {
    [
        ("green", "#7fbf5f"),
        ("grey", "#a0a0a0"),
        ("yellow", "#f2d64b"),
        ("pink", "#f0a0c0"),
        ("white", "#ffffff"),
        ("black", "#000000"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Fill for a decoration: the whole label, then its colour part (before the
/// first '.'), then the first colour token (before the first '-').
fn fill_for<'a>(decor: &str, palette: &'a BTreeMap<String, String>) -> Option<&'a str> {
    let colour = decor.split('.').next().unwrap_or(decor);
    let first = colour.split('-').next().unwrap_or(colour);
    palette
        .get(decor)
        .or_else(|| palette.get(colour))
        .or_else(|| palette.get(first))
        .map(String::as_str)
}

/// Dot colour: the second colour token, if any.
fn dot_for<'a>(decor: &str, palette: &'a BTreeMap<String, String>) -> Result<Option<&'a str>, RenderError> {
    let colour = decor.split('.').next().unwrap_or(decor);
    match colour.split('-').nth(1) {
        None => Ok(None),
        Some(tok) => palette
            .get(tok)
            .map(|c| Some(c.as_str()))
            .ok_or_else(|| RenderError::MissingColour(tok.to_string())),
    }
}

/// Decimal with 12 significant digits, rounded half to even, computed
/// exactly. No exponent, no trailing zeros.
pub fn decimal12(x: &Scalar) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.signum() < 0;
    let s = x.abs();
    let lo = BigInt::from(10u64.pow(11));
    let hi = BigInt::from(10u64.pow(12));
    let est = s.to_f64().log10().floor() as i64;
    let mut k: i64 = 11 - est;
    let scaled = |k: i64| -> Scalar {
        let p = BigRational::from_integer(BigInt::from(10)).pow(k as i32);
        s.scale(&p)
    };
    let mut y = scaled(k);
    loop {
        let f = y.floor();
        if f >= hi {
            k -= 1;
        } else if f < lo {
            k += 1;
        } else {
            break;
        }
        y = scaled(k);
    }
    let mut q = y.floor();
    let frac = &y - &Scalar::rational(BigRational::from_integer(q.clone()));
    let half = Scalar::frac(1, 2);
    match frac.cmp(&half) {
        std::cmp::Ordering::Greater => q += 1,
        std::cmp::Ordering::Equal => {
            if (&q % 2u32).is_one() {
                q += 1
            }
        }
        std::cmp::Ordering::Less => {}
    }
    if q == hi {
        q = lo.clone();
        k -= 1;
    }
    // value = q * 10^-k
    let digits = q.to_string();
    let mut out = if k <= 0 {
        let mut d = digits;
        d.extend(std::iter::repeat_n('0', (-k) as usize));
        d
    } else {
        let k = k as usize;
        let d = if digits.len() <= k {
            format!("{}{}", "0".repeat(k - digits.len() + 1), digits)
        } else {
            digits
        };
        let (int, frac) = d.split_at(d.len() - k);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    };
    if neg {
        out.insert(0, '-');
    }
    out
}

fn pt(p: &Point, scale: &Scalar) -> String {
    format!("{} {}", decimal12(&(&p.x * scale)), decimal12(&-(&p.y * scale)))
}

fn minmax(pts: &[&Point]) -> Option<(Scalar, Scalar, Scalar, Scalar)> {
    let first = pts.first()?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.x.clone(), first.y.clone(), first.x.clone(), first.y.clone());
    for p in &pts[1..] {
        if p.x < x0 {
            x0 = p.x.clone();
        }
        if p.x > x1 {
            x1 = p.x.clone();
        }
        if p.y < y0 {
            y0 = p.y.clone();
        }
        if p.y > y1 {
            y1 = p.y.clone();
        }
    }
    Some((x0, y0, x1, y1))
}

/// Render a patch. Tiles are drawn in patch order, one `path` each; y grows
/// upward in patch coordinates.
pub fn render_svg(p: &Patch, reg: &Registry, opts: &RenderOptions) -> Result<Vec<u8>, RenderError> {
    let resolved = p.resolve_all(reg)?;
    let sc = &opts.scale;
    let all: Vec<&Point> = resolved.iter().flat_map(|r| r.pts.iter()).collect();
    let view = match minmax(&all) {
        None => "0 0 1 1".to_string(),
        Some((x0, y0, x1, y1)) => {
            let w = &x1 - &x0;
            let h = &y1 - &y0;
            let m = &(if w > h { w.clone() } else { h.clone() }) * &Scalar::frac(1, 50);
            let two = Scalar::int(2);
            format!(
                "{} {} {} {}",
                decimal12(&(&(&x0 - &m) * sc)),
                decimal12(&(&-(&y1 + &m) * sc)),
                decimal12(&(&(&w + &(&two * &m)) * sc)),
                decimal12(&(&(&h + &(&two * &m)) * sc)),
            )
        }
    };
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{view}\">"
    );
    let _ = writeln!(
        s,
        "<g stroke=\"#000000\" stroke-width=\"{}\" stroke-linejoin=\"round\">",
        decimal12(&(&opts.stroke_width * sc))
    );
    let mut glyphs = String::new();
    for (t, r) in p.tiles.iter().zip(&resolved) {
        let v = reg.variant(&t.variant)?;
        let d: Vec<String> = r.pts.iter().map(|q| pt(q, sc)).collect();
        let path = format!("M {} Z", d.join(" L "));
        if opts.strip_motifs {
            let _ = writeln!(s, "<path d=\"{path}\" fill=\"none\"/>");
            continue;
        }
        let fill = fill_for(&v.decor, &opts.palette)
            .ok_or_else(|| RenderError::MissingColour(v.decor.clone()))?;
        let _ = writeln!(s, "<path d=\"{path}\" fill=\"{fill}\"/>");

        let n = r.pts.len();
        let mut c = Point::origin();
        for q in &r.pts {
            c = c.add(q);
        }
        let c = c.scale(&Scalar::frac(1, n as i64));
        if let Some(dot) = dot_for(&v.decor, &opts.palette)? {
            let v0 = r.at_local(0);
            let at = v0.add(&c.sub(v0).scale(&Scalar::frac(1, 4)));
            let (cx, cy) = (decimal12(&(&at.x * sc)), decimal12(&-(&at.y * sc)));
            let rad = decimal12(&(&Scalar::frac(1, 12) * sc));
            let _ = writeln!(glyphs, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{rad}\" fill=\"{dot}\"/>");
        }
        if let Some(marks) = ccw_marks(r, v) {
            for (j, m) in marks.iter().enumerate() {
                if !m.out {
                    continue;
                }
                let a = &r.pts[j];
                let b = &r.pts[(j + 1) % n];
                let e = b.sub(a);
                let mid = a.add(&e.scale(&Scalar::frac(1, 2)));
                // outward normal of a ccw edge
                let out = Point::new(e.y.clone(), -&e.x);
                let tip = mid.add(&out.scale(&Scalar::frac(1, 10)));
                let back = mid.sub(&out.scale(&Scalar::frac(1, 20)));
                let l = back.add(&e.scale(&Scalar::frac(1, 12)));
                let rr = back.sub(&e.scale(&Scalar::frac(1, 12)));
                let _ = writeln!(
                    glyphs,
                    "<polygon points=\"{} {} {}\" fill=\"#000000\"/>",
                    pt(&tip, sc).replace(' ', ","),
                    pt(&l, sc).replace(' ', ","),
                    pt(&rr, sc).replace(' ', ",")
                );
            }
        }
    }
    s.push_str("</g>\n");
    if !glyphs.is_empty() {
        s.push_str("<g stroke=\"none\">\n");
        s.push_str(&glyphs);
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s.into_bytes())
}
