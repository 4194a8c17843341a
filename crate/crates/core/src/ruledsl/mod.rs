//! Rule-set data model and the line-oriented rule DSL.
//!
//! ```text
//! ruleset <name>
//! regime free | half_turn
//! similarity exact | pseudo
//! inflation <scalar>
//! prototile <id> triangle|square vertices (<s>,<s>) (<s>,<s>) (<s>,<s>) [(<s>,<s>)]
//! variant <vid> prototile <id> rot <0..11> [flip] decor <label> [marks <m0> <m1> <m2> [<m3>]]
//! edgelabel <L> length <scalar> angleclass <0..5>
//! anchors <vid> (<s>,<s>) ...
//! rule <vid> -> <vid> @ rot <k> [flip] (<s>,<s>) ; ... ;
//! pair <vidA> <vidB>
//! ```

pub mod validate;

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::exact::{parse_scalar_at, ExactError, Placement, Point, Scalar};
use crate::model::{Mark, PlacedTile, Prototile, Registry, ShapeKind, TileVariant};

pub use validate::{validate_ruleset, Finding, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Free,
    HalfTurn,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Free => "free",
            Regime::HalfTurn => "half_turn",
        }
    }

    pub fn allows(&self, rot: u8, flip: bool) -> bool {
        match self {
            Regime::Free => true,
            Regime::HalfTurn => !flip && (rot == 0 || rot == 6),
        }
    }
}

/// Whether children must fill exactly the inflated parent (`exact`) or only
/// a region whose edges are congruent paths between the parent's anchors
/// (`pseudo`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Similarity {
    Exact,
    Pseudo,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabel {
    pub label: String,
    pub length: Scalar,
    pub angleclass: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub parent: String,
    pub children: Vec<PlacedTile>,
    /// Images of the parent's vertices in the rule frame. Absent means the
    /// parent vertices scaled by the inflation factor.
    pub anchors: Option<Vec<Point>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub name: String,
    pub regime: Regime,
    pub similarity: Similarity,
    pub inflation: Scalar,
    pub registry: Registry,
    pub edge_labels: Vec<EdgeLabel>,
    /// One rule per variant, in variant order.
    pub rules: Vec<Rule>,
    pub pairs: Vec<(String, String)>,
}

impl RuleSet {
    pub fn rule(&self, vid: &str) -> Option<&Rule> {
        self.registry.variant_index(vid).map(|i| &self.rules[i])
    }

    pub fn glue_mode(&self) -> bool {
        self.rules.iter().any(|r| r.anchors.is_some())
    }

    /// Parent vertices of a variant at the identity placement, local order.
    pub fn base_vertices(&self, vid: &str) -> Vec<Point> {
        let (v, p) = self.registry.shape_of(vid).expect("known variant");
        let b = Placement::from_sym(v.base(), Point::origin());
        p.vertices.iter().map(|q| b.apply(q)).collect()
    }

    pub fn anchors(&self, vid: &str) -> Vec<Point> {
        match self.rule(vid).and_then(|r| r.anchors.clone()) {
            Some(a) => a,
            None => self
                .base_vertices(vid)
                .iter()
                .map(|p| p.scale(&self.inflation))
                .collect(),
        }
    }

    /// Partner of a variant under the declared pairing.
    pub fn partner(&self, vid: &str) -> Option<&str> {
        for (a, b) in &self.pairs {
            if a == vid {
                return Some(b);
            }
            if b == vid {
                return Some(a);
            }
        }
        None
    }

    pub fn involution(&self) -> HashMap<String, String> {
        let mut m = HashMap::new();
        for (a, b) in &self.pairs {
            m.insert(a.clone(), b.clone());
            m.insert(b.clone(), a.clone());
        }
        m
    }
}

pub(crate) struct Cursor<'a> {
    pub(crate) s: &'a [char],
    pub(crate) pos: usize,
    pub(crate) line: usize,
}

fn is_word_char(c: char) -> bool {
    !(c.is_whitespace() || "(),;@#".contains(c))
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(s: &'a [char], line: usize) -> Self {
        Cursor { s, pos: 0, line }
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> DslError {
        self.err_at(self.pos, msg)
    }

    pub(crate) fn err_at(&self, pos: usize, msg: impl Into<String>) -> DslError {
        DslError {
            line: self.line,
            col: pos + 1,
            msg: msg.into(),
        }
    }

    pub(crate) fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.ws();
        self.pos >= self.s.len() || self.s[self.pos] == '#'
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    pub(crate) fn word(&mut self) -> Result<(usize, String), DslError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && is_word_char(self.s[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a word"));
        }
        Ok((start, self.s[start..self.pos].iter().collect()))
    }

    pub(crate) fn ident(&mut self) -> Result<(usize, String), DslError> {
        let (at, w) = self.word()?;
        if !w
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.'-".contains(c))
        {
            return Err(self.err_at(at, format!("invalid identifier '{w}'")));
        }
        Ok((at, w))
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        let (at, w) = self.word()?;
        if w != kw {
            return Err(self.err_at(at, format!("expected '{kw}', found '{w}'")));
        }
        Ok(())
    }

    pub(crate) fn try_keyword(&mut self, kw: &str) -> bool {
        self.ws();
        let save = self.pos;
        match self.word() {
            Ok((_, w)) if w == kw => true,
            _ => {
                self.pos = save;
                false
            }
        }
    }

    pub(crate) fn punct(&mut self, c: char) -> Result<(), DslError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    pub(crate) fn scalar(&mut self) -> Result<Scalar, DslError> {
        self.ws();
        let start = self.pos;
        parse_scalar_at(self.s, &mut self.pos).map_err(|e| match e {
            ExactError::Syntax { offset, msg } => self.err_at(offset.max(start), msg),
            other => self.err_at(start, other.to_string()),
        })
    }

    pub(crate) fn point(&mut self) -> Result<Point, DslError> {
        self.punct('(')?;
        let x = self.scalar()?;
        self.punct(',')?;
        let y = self.scalar()?;
        self.punct(')')?;
        Ok(Point::new(x, y))
    }

    pub(crate) fn small_int(&mut self, max: u8) -> Result<u8, DslError> {
        let (at, w) = self.word()?;
        match w.parse::<u8>() {
            Ok(v) if v <= max => Ok(v),
            _ => Err(self.err_at(at, format!("expected an integer in 0..={max}, found '{w}'"))),
        }
    }

    pub(crate) fn end(&mut self) -> Result<(), DslError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

#[derive(Clone)]
struct Pos {
    line: usize,
    col: usize,
}

fn err_pos(p: &Pos, msg: impl Into<String>) -> DslError {
    DslError {
        line: p.line,
        col: p.col,
        msg: msg.into(),
    }
}

/// Parse a rule-set document.
pub fn parse_ruleset(text: &str) -> Result<RuleSet, DslError> {
    let mut name: Option<String> = None;
    let mut regime: Option<Regime> = None;
    let mut similarity = Similarity::Exact;
    let mut inflation: Option<Scalar> = None;
    let mut prototiles: Vec<Prototile> = Vec::new();
    let mut variants: Vec<(TileVariant, Pos, Pos, Pos)> = Vec::new();
    let mut edge_labels = Vec::new();
    let mut rules: Vec<(Rule, Pos, Vec<Pos>)> = Vec::new();
    let mut anchors: Vec<(String, Vec<Point>, Pos)> = Vec::new();
    let mut pairs: Vec<(String, String, Pos, Pos)> = Vec::new();
    let mut last_line = 1;

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        last_line = line;
        let chars: Vec<char> = raw.chars().collect();
        let mut c = Cursor::new(&chars, line);
        if c.at_end() {
            continue;
        }
        let (kat, kw) = c.word()?;
        match kw.as_str() {
            "ruleset" => {
                if name.is_some() {
                    return Err(c.err_at(kat, "duplicate 'ruleset' line"));
                }
                name = Some(c.ident()?.1);
            }
            "regime" => {
                let (at, w) = c.word()?;
                regime = Some(match w.as_str() {
                    "free" => Regime::Free,
                    "half_turn" => Regime::HalfTurn,
                    _ => return Err(c.err_at(at, format!("unknown regime '{w}'"))),
                });
            }
            "similarity" => {
                let (at, w) = c.word()?;
                similarity = match w.as_str() {
                    "exact" => Similarity::Exact,
                    "pseudo" => Similarity::Pseudo,
                    _ => return Err(c.err_at(at, format!("unknown similarity '{w}'"))),
                };
            }
            "inflation" => {
                let at = c.pos;
                let s = c.scalar()?;
                if s <= Scalar::one() {
                    return Err(c.err_at(at, "inflation must exceed 1"));
                }
                inflation = Some(s);
            }
            "prototile" => {
                let (at, proto) = parse_prototile(&mut c)?;
                if prototiles.iter().any(|p| p.id == proto.id) {
                    return Err(c.err_at(at, format!("duplicate prototile '{}'", proto.id)));
                }
                prototiles.push(proto);
            }
            "variant" => {
                let (at, id) = c.ident()?;
                if variants.iter().any(|v| v.0.id == id) {
                    return Err(c.err_at(at, format!("duplicate variant '{id}'")));
                }
                c.keyword("prototile")?;
                let (pat, proto) = c.ident()?;
                c.keyword("rot")?;
                let rot = c.small_int(11)?;
                let flip = c.try_keyword("flip");
                c.keyword("decor")?;
                let decor = c.ident()?.1;
                let mut marks = None;
                let mut mpos = Pos { line, col: pat + 1 };
                if c.try_keyword("marks") {
                    let mut ms = Vec::new();
                    while !c.at_end() {
                        let (mat, w) = c.word()?;
                        if ms.is_empty() {
                            mpos = Pos { line, col: mat + 1 };
                        }
                        ms.push(w.parse::<Mark>().map_err(|e| c.err_at(mat, e))?);
                    }
                    marks = Some(ms);
                }
                variants.push((
                    TileVariant {
                        id,
                        prototile: proto,
                        base_rot: rot,
                        base_flip: flip,
                        decor,
                        marks,
                    },
                    Pos { line, col: at + 1 },
                    Pos { line, col: pat + 1 },
                    mpos,
                ));
            }
            "edgelabel" => {
                let label = c.ident()?.1;
                c.keyword("length")?;
                let length = c.scalar()?;
                c.keyword("angleclass")?;
                let angleclass = c.small_int(5)?;
                edge_labels.push(EdgeLabel {
                    label,
                    length,
                    angleclass,
                });
            }
            "anchors" => {
                let (at, vid) = c.ident()?;
                let mut pts = Vec::new();
                while c.peek() == Some('(') {
                    pts.push(c.point()?);
                }
                anchors.push((vid, pts, Pos { line, col: at + 1 }));
            }
            "rule" => {
                let (at, vid) = c.ident()?;
                c.ws();
                if c.s[c.pos..].starts_with(&['-', '>']) {
                    c.pos += 2;
                } else {
                    return Err(c.err("expected '->'"));
                }
                let mut children = Vec::new();
                let mut cpos = Vec::new();
                loop {
                    if c.at_end() {
                        break;
                    }
                    let (cat, child) = c.ident()?;
                    c.punct('@')?;
                    c.keyword("rot")?;
                    let rot = c.small_int(11)?;
                    let flip = c.try_keyword("flip");
                    let shift = c.point()?;
                    children.push(PlacedTile::new(child, Placement::new(rot, flip, shift)));
                    cpos.push(Pos { line, col: cat + 1 });
                    if c.at_end() {
                        break;
                    }
                    c.punct(';')?;
                }
                if children.is_empty() {
                    return Err(c.err("rule has no children"));
                }
                rules.push((
                    Rule {
                        parent: vid,
                        children,
                        anchors: None,
                    },
                    Pos { line, col: at + 1 },
                    cpos,
                ));
            }
            "pair" => {
                let (a_at, a) = c.ident()?;
                let (b_at, b) = c.ident()?;
                pairs.push((a, b, Pos { line, col: a_at + 1 }, Pos { line, col: b_at + 1 }));
            }
            other => return Err(c.err_at(kat, format!("unknown keyword '{other}'"))),
        }
        c.end()?;
    }

    let eof = Pos {
        line: last_line,
        col: 1,
    };
    let name = name.ok_or_else(|| err_pos(&eof, "missing 'ruleset' line"))?;
    let regime = regime.ok_or_else(|| err_pos(&eof, "missing 'regime' line"))?;
    let inflation = inflation.ok_or_else(|| err_pos(&eof, "missing 'inflation' line"))?;

    for (v, _, ppos, mpos) in &variants {
        let proto = prototiles
            .iter()
            .find(|p| p.id == v.prototile)
            .ok_or_else(|| err_pos(ppos, format!("undeclared prototile '{}'", v.prototile)))?;
        if let Some(m) = &v.marks {
            if m.len() != proto.vertices.len() {
                return Err(err_pos(
                    mpos,
                    format!("variant '{}' needs {} marks, found {}", v.id, proto.vertices.len(), m.len()),
                ));
            }
        }
    }
    let registry = Registry::new(prototiles, variants.iter().map(|v| v.0.clone()).collect());

    let mut by_variant: Vec<Option<Rule>> = vec![None; variants.len()];
    for (mut rule, pos, cpos) in rules {
        let ix = registry
            .variant_index(&rule.parent)
            .ok_or_else(|| err_pos(&pos, format!("undeclared variant '{}'", rule.parent)))?;
        if by_variant[ix].is_some() {
            return Err(err_pos(&pos, format!("duplicate rule for variant '{}'", rule.parent)));
        }
        for (ch, p) in rule.children.iter().zip(&cpos) {
            if !registry.has_variant(&ch.variant) {
                return Err(err_pos(p, format!("undeclared variant '{}'", ch.variant)));
            }
            if !regime.allows(ch.place.rot, ch.place.flip) {
                return Err(err_pos(
                    p,
                    format!(
                        "placement rot {}{} violates the {} regime",
                        ch.place.rot,
                        if ch.place.flip { " flip" } else { "" },
                        regime.name()
                    ),
                ));
            }
        }
        rule.anchors = None;
        by_variant[ix] = Some(rule);
    }
    for (vid, pts, pos) in anchors {
        let ix = registry
            .variant_index(&vid)
            .ok_or_else(|| err_pos(&pos, format!("undeclared variant '{vid}'")))?;
        let n = registry.shape_of(&vid).expect("declared").1.vertices.len();
        if pts.len() != n {
            return Err(err_pos(&pos, format!("variant '{vid}' needs {n} anchors")));
        }
        match by_variant[ix].as_mut() {
            Some(r) if r.anchors.is_none() => r.anchors = Some(pts),
            Some(_) => return Err(err_pos(&pos, format!("duplicate anchors for '{vid}'"))),
            None => return Err(err_pos(&pos, format!("anchors for '{vid}' precede its rule or it has none"))),
        }
    }
    let mut rules_out = Vec::with_capacity(variants.len());
    for (ix, r) in by_variant.into_iter().enumerate() {
        match r {
            Some(r) => rules_out.push(r),
            None => {
                return Err(err_pos(
                    &variants[ix].1,
                    format!("variant '{}' has no rule", variants[ix].0.id),
                ))
            }
        }
    }
    let glue = rules_out.iter().filter(|r| r.anchors.is_some()).count();
    if glue != 0 && glue != rules_out.len() {
        return Err(err_pos(&eof, "anchors must be given for every rule or for none"));
    }

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut pairs_out = Vec::new();
    for (a, b, pa, pb) in pairs {
        for (v, p) in [(&a, &pa), (&b, &pb)] {
            if !registry.has_variant(v) {
                return Err(err_pos(p, format!("undeclared variant '{v}'")));
            }
            if seen.insert(v.clone(), p.line).is_some() {
                return Err(err_pos(p, format!("variant '{v}' is paired twice")));
            }
        }
        if a == b {
            return Err(err_pos(&pb, format!("variant '{a}' paired with itself")));
        }
        pairs_out.push((a, b));
    }

    Ok(RuleSet {
        name,
        regime,
        similarity,
        inflation,
        registry,
        edge_labels,
        rules: rules_out,
        pairs: pairs_out,
    })
}

/// `<id> triangle|square vertices (<s>,<s>) ...` after the keyword.
pub(crate) fn parse_prototile(c: &mut Cursor) -> Result<(usize, Prototile), DslError> {
    let (at, id) = c.ident()?;
    let (kat, k) = c.word()?;
    let kind = match k.as_str() {
        "triangle" => ShapeKind::Triangle,
        "square" => ShapeKind::Square,
        _ => return Err(c.err_at(kat, format!("unknown shape kind '{k}'"))),
    };
    c.keyword("vertices")?;
    let mut vs = Vec::new();
    while c.peek() == Some('(') {
        vs.push(c.point()?);
    }
    let want = if kind == ShapeKind::Triangle { 3 } else { 4 };
    if vs.len() != want {
        return Err(c.err(format!("{} needs {want} vertices", kind.name())));
    }
    if !convex_ccw(&vs) {
        return Err(c.err_at(at, "prototile must be convex, counterclockwise and non-degenerate"));
    }
    Ok((at, Prototile { id, kind, vertices: vs }))
}

fn convex_ccw(vs: &[Point]) -> bool {
    let n = vs.len();
    (0..n).all(|i| crate::exact::orientation(&vs[i], &vs[(i + 1) % n], &vs[(i + 2) % n]) > 0)
}

fn pt(p: &Point) -> String {
    format!("({}, {})", p.x, p.y)
}

/// Normalized document; `parse_ruleset` of the output is equal to `rs`.
pub fn serialize_ruleset(rs: &RuleSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ruleset {}", rs.name);
    let _ = writeln!(out, "regime {}", rs.regime.name());
    if rs.similarity == Similarity::Pseudo {
        let _ = writeln!(out, "similarity pseudo");
    }
    let _ = writeln!(out, "inflation {}", rs.inflation);
    out.push('\n');
    for p in &rs.registry.prototiles {
        let vs: Vec<String> = p.vertices.iter().map(pt).collect();
        let _ = writeln!(out, "prototile {} {} vertices {}", p.id, p.kind.name(), vs.join(" "));
    }
    out.push('\n');
    for v in &rs.registry.variants {
        let _ = write!(
            out,
            "variant {} prototile {} rot {}{} decor {}",
            v.id,
            v.prototile,
            v.base_rot,
            if v.base_flip { " flip" } else { "" },
            v.decor
        );
        if let Some(m) = &v.marks {
            let ms: Vec<String> = m.iter().map(|m| m.to_string()).collect();
            let _ = write!(out, " marks {}", ms.join(" "));
        }
        out.push('\n');
    }
    if !rs.edge_labels.is_empty() {
        out.push('\n');
        for e in &rs.edge_labels {
            let _ = writeln!(
                out,
                "edgelabel {} length {} angleclass {}",
                e.label, e.length, e.angleclass
            );
        }
    }
    out.push('\n');
    for r in &rs.rules {
        if let Some(a) = &r.anchors {
            let ps: Vec<String> = a.iter().map(pt).collect();
            let _ = writeln!(out, "anchors {} {}", r.parent, ps.join(" "));
        }
        let parts: Vec<String> = r
            .children
            .iter()
            .map(|c| {
                format!(
                    "{} @ rot {}{} {}",
                    c.variant,
                    c.place.rot,
                    if c.place.flip { " flip" } else { "" },
                    pt(&c.place.shift)
                )
            })
            .collect();
        let _ = writeln!(out, "rule {} -> {} ;", r.parent, parts.join(" ; "));
    }
    if !rs.pairs.is_empty() {
        out.push('\n');
        for (a, b) in &rs.pairs {
            let _ = writeln!(out, "pair {a} {b}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQ: &str = "ruleset square4\nregime free\ninflation 2\n\
        prototile S square vertices (0,0) (1,0) (1,1) (0,1)\n\
        variant S prototile S rot 0 decor plain\n\
        rule S -> S @ rot 0 (0,0) ; S @ rot 0 (1,0) ; S @ rot 0 (0,1) ; S @ rot 0 (1,1) ;\n";

    #[test]
    fn parses_toy() {
        let rs = parse_ruleset(SQ).unwrap();
        assert_eq!(rs.rules.len(), 1);
        assert_eq!(rs.rules[0].children.len(), 4);
    }

    #[test]
    fn error_position_points_at_token() {
        let bad = SQ.replace("rot 0 (1,0)", "rot 0 (1.5,0)");
        let e = parse_ruleset(&bad).unwrap_err();
        assert_eq!(e.line, 6);
        let line = bad.lines().nth(5).unwrap();
        assert!(line[e.col - 1..].starts_with(".5"));
        assert!(e.msg.contains("floating"), "{e}");
    }
}
