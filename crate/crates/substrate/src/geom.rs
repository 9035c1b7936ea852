//! Exact inflate-replace geometry over a real quadratic field, stone checks, expansion metrics
//! and SVG output.
//!
//! Tiles are translated copies of prototiles; rotated copies of a shape are separate prototiles.
//! Every predicate is decided in exact arithmetic, floating point only appears in [`QuadNum::to_f64`]
//! which this module never calls.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{is_expansive, mat_pow, Mat};
use crate::quad::QuadNum;

pub type Point = [QuadNum; 2];

/// Names accepted by [`InflationRule::builtin`].
pub const BUILTIN_GEOMETRIC: [&str; 3] = ["chair", "penta_gaps", "square"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("cannot parse geometric rule: {0}")]
    Parse(String),
    #[error("prototile {label}: {detail}")]
    InvalidPolygon { label: String, detail: String },
    #[error("unknown prototile {0:?}")]
    UnknownPrototile(String),
    #[error("numbers from Q(√{0}) and Q(√{1}) in one rule")]
    MixedFields(u64, u64),
    #[error("expansion is not expansive: {0}")]
    NotExpansive(String),
    #[error("unknown geometric rule {0:?}")]
    UnknownBuiltin(String),
}

impl GeomError {
    pub fn reason(&self) -> &'static str {
        match self {
            GeomError::Parse(_) => "parse",
            GeomError::InvalidPolygon { .. } => "invalid_polygon",
            GeomError::UnknownPrototile(_) => "unknown_prototile",
            GeomError::MixedFields(..) => "mixed_fields",
            GeomError::NotExpansive(_) => "not_expansive",
            GeomError::UnknownBuiltin(_) => "unknown_builtin",
        }
    }
}

// ---------------------------------------------------------------------------------------------
// exact planar primitives

fn q(s: &str) -> QuadNum {
    s.parse().expect("literal")
}

fn pt(x: QuadNum, y: QuadNum) -> Point {
    [x, y]
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone()]
}

fn add(a: &Point, b: &Point) -> Point {
    [a[0].clone() + b[0].clone(), a[1].clone() + b[1].clone()]
}

fn scale(s: &QuadNum, a: &Point) -> Point {
    [s.clone() * a[0].clone(), s.clone() * a[1].clone()]
}

fn apply(m: &[[QuadNum; 2]; 2], a: &Point) -> Point {
    [
        m[0][0].clone() * a[0].clone() + m[0][1].clone() * a[1].clone(),
        m[1][0].clone() * a[0].clone() + m[1][1].clone() * a[1].clone(),
    ]
}

fn cross(o: &Point, a: &Point, b: &Point) -> QuadNum {
    let u = sub(a, o);
    let v = sub(b, o);
    u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone()
}

/// Twice the signed area.
fn twice_area(poly: &[Point]) -> QuadNum {
    let n = poly.len();
    (0..n).fold(QuadNum::zero(), |acc, i| {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        acc + a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
    })
}

/// Signed shoelace area; positive for counter-clockwise polygons.
pub fn polygon_area(poly: &[Point]) -> QuadNum {
    twice_area(poly) / QuadNum::int(2)
}

fn between(a: &QuadNum, b: &QuadNum, x: &QuadNum) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    lo <= x && x <= hi
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    cross(a, b, p).is_zero() && between(&a[0], &b[0], &p[0]) && between(&a[1], &b[1], &p[1])
}

/// Closed segments `ab` and `cd` meet.
fn segments_meet(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = cross(c, d, a).sign();
    let d2 = cross(c, d, b).sign();
    let d3 = cross(a, b, c).sign();
    let d4 = cross(a, b, d).sign();
    if d1 != d2 && d3 != d4 && d1 != Ordering::Equal && d2 != Ordering::Equal && d3 != Ordering::Equal && d4 != Ordering::Equal {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Simple and counter-clockwise with positive area.
fn check_polygon(label: &str, poly: &[Point]) -> Result<(), GeomError> {
    let bad = |d: &str| Err(GeomError::InvalidPolygon { label: label.to_string(), detail: d.to_string() });
    let n = poly.len();
    if n < 3 {
        return bad("fewer than three vertices");
    }
    for i in 0..n {
        if poly[i] == poly[(i + 1) % n] {
            return bad("repeated vertex");
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (&poly[i], &poly[(i + 1) % n]);
            let (c, d) = (&poly[j], &poly[(j + 1) % n]);
            if adjacent {
                // adjacent edges may only share their common vertex
                let shared = if j == i + 1 { b } else { a };
                let (far_other, near) = if j == i + 1 { (d, a) } else { (c, b) };
                if cross(near, shared, far_other).is_zero()
                    && (on_segment(near, shared, far_other) || on_segment(shared, far_other, near))
                {
                    return bad("edges fold back");
                }
            } else if segments_meet(a, b, c, d) {
                return bad("edges cross");
            }
        }
    }
    if twice_area(poly).sign() != Ordering::Greater {
        return bad("not counter-clockwise");
    }
    Ok(())
}

fn in_triangle(a: &Point, b: &Point, c: &Point, p: &Point) -> bool {
    let s = Ordering::Less;
    cross(a, b, p).sign() != s && cross(b, c, p).sign() != s && cross(c, a, p).sign() != s
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
fn triangulate(poly: &[Point]) -> Vec<[Point; 3]> {
    let mut v: Vec<Point> = poly.to_vec();
    let mut out = Vec::new();
    while v.len() > 3 {
        let n = v.len();
        let mut clipped = false;
        for i in 0..n {
            let (a, b, c) = (&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]);
            match cross(a, b, c).sign() {
                Ordering::Equal => {
                    v.remove(i);
                    clipped = true;
                    break;
                }
                Ordering::Less => continue,
                Ordering::Greater => {}
            }
            let blocked = (0..n)
                .filter(|&k| k != i && k != (i + n - 1) % n && k != (i + 1) % n)
                .any(|k| in_triangle(a, b, c, &v[k]));
            if !blocked {
                out.push([a.clone(), b.clone(), c.clone()]);
                v.remove(i);
                clipped = true;
                break;
            }
        }
        assert!(clipped, "simple polygons always have an ear");
    }
    if v.len() == 3 && cross(&v[0], &v[1], &v[2]).sign() == Ordering::Greater {
        out.push([v[0].clone(), v[1].clone(), v[2].clone()]);
    }
    out
}

/// Sutherland–Hodgman clip of a convex polygon by a convex counter-clockwise polygon.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = subject.to_vec();
    let m = clip.len();
    for e in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (&clip[e], &clip[(e + 1) % m]);
        let input = std::mem::take(&mut out);
        let n = input.len();
        for i in 0..n {
            let p = &input[i];
            let r = &input[(i + 1) % n];
            let sp = cross(a, b, p);
            let sr = cross(a, b, r);
            let p_in = sp.sign() != Ordering::Less;
            let r_in = sr.sign() != Ordering::Less;
            if p_in {
                out.push(p.clone());
            }
            if p_in != r_in && !(sp.is_zero() || sr.is_zero()) {
                let t = sp.clone() / (sp - sr);
                out.push(add(p, &scale(&t, &sub(r, p))));
            }
        }
    }
    out
}

/// Exact area of `a ∩ b` for simple counter-clockwise polygons.
pub fn intersection_area(a: &[Point], b: &[Point]) -> QuadNum {
    let ta = triangulate(a);
    let tb = triangulate(b);
    let mut total = QuadNum::zero();
    for x in &ta {
        for y in &tb {
            let c = clip_convex(x, y);
            if c.len() >= 3 {
                total = total + polygon_area(&c);
            }
        }
    }
    total
}

fn translate(poly: &[Point], t: &Point) -> Vec<Point> {
    poly.iter().map(|p| add(p, t)).collect()
}

// ---------------------------------------------------------------------------------------------
// rules and patches

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prototile {
    pub id: usize,
    pub label: String,
    /// Simple, counter-clockwise.
    pub polygon: Vec<Point>,
}

impl Prototile {
    pub fn area(&self) -> QuadNum {
        polygon_area(&self.polygon)
    }
}

/// A copy of prototile `prototile` moved by `translation`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tile {
    pub prototile: usize,
    pub translation: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InflationRule {
    name: String,
    radicand: u64,
    expansion: [[QuadNum; 2]; 2],
    prototiles: Vec<Prototile>,
    /// Pieces of the inflated prototile `i`, relative to the inflated prototile.
    pieces: Vec<Vec<Tile>>,
    /// Display-only linear map applied before rendering.
    display: Option<[[QuadNum; 2]; 2]>,
    stone: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeomFile {
    name: Option<String>,
    radicand: Option<u64>,
    expansion: [[Num; 2]; 2],
    display: Option<[[Num; 2]; 2]>,
    prototile: Vec<ProtoFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtoFile {
    label: String,
    vertices: Vec<[Num; 2]>,
    pieces: Vec<PieceFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceFile {
    tile: String,
    at: [Num; 2],
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

impl InflationRule {
    /// Builds a rule with the stone flag unset; see [`InflationRule::mark_stone`].
    pub fn new(
        name: &str,
        expansion: [[QuadNum; 2]; 2],
        prototiles: Vec<(String, Vec<Point>)>,
        pieces: Vec<Vec<Tile>>,
    ) -> Result<Self, GeomError> {
        if prototiles.is_empty() {
            return Err(GeomError::Parse("no prototiles".into()));
        }
        if pieces.len() != prototiles.len() {
            return Err(GeomError::Parse("one piece list per prototile".into()));
        }
        let mut radicand = 0;
        let mut see = |x: &QuadNum| -> Result<(), GeomError> {
            match (radicand, x.radicand()) {
                (_, 0) => Ok(()),
                (0, d) => {
                    radicand = d;
                    Ok(())
                }
                (r, d) if r == d => Ok(()),
                (r, d) => Err(GeomError::MixedFields(r, d)),
            }
        };
        for row in &expansion {
            for x in row {
                see(x)?;
            }
        }
        for (_, poly) in &prototiles {
            for p in poly {
                see(&p[0])?;
                see(&p[1])?;
            }
        }
        for list in &pieces {
            for t in list {
                if t.prototile >= prototiles.len() {
                    return Err(GeomError::UnknownPrototile(t.prototile.to_string()));
                }
                see(&t.translation[0])?;
                see(&t.translation[1])?;
            }
        }
        let mut protos = Vec::new();
        for (id, (label, polygon)) in prototiles.into_iter().enumerate() {
            check_polygon(&label, &polygon)?;
            protos.push(Prototile { id, label, polygon });
        }
        let mut pieces = pieces;
        for list in &mut pieces {
            list.sort();
        }
        Ok(InflationRule {
            name: name.to_string(),
            radicand,
            expansion,
            prototiles: protos,
            pieces,
            display: None,
            stone: false,
        })
    }

    pub fn with_display(mut self, m: [[QuadNum; 2]; 2]) -> Self {
        self.display = Some(m);
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, GeomError> {
        let file: GeomFile = toml::from_str(text).map_err(|e| GeomError::Parse(e.to_string()))?;
        let num = |n: &Num| -> Result<QuadNum, GeomError> {
            match n {
                Num::Int(v) => Ok(QuadNum::int(*v)),
                Num::Text(s) => s.parse().map_err(|e| GeomError::Parse(format!("{s:?}: {e}"))),
            }
        };
        let mat = |m: &[[Num; 2]; 2]| -> Result<[[QuadNum; 2]; 2], GeomError> {
            Ok([[num(&m[0][0])?, num(&m[0][1])?], [num(&m[1][0])?, num(&m[1][1])?]])
        };
        let expansion = mat(&file.expansion)?;
        let ids: BTreeMap<&str, usize> =
            file.prototile.iter().enumerate().map(|(i, p)| (p.label.as_str(), i)).collect();
        if ids.len() != file.prototile.len() {
            return Err(GeomError::Parse("duplicate prototile label".into()));
        }
        let mut protos = Vec::new();
        let mut pieces = Vec::new();
        for p in &file.prototile {
            let poly = p.vertices.iter().map(|v| Ok(pt(num(&v[0])?, num(&v[1])?))).collect::<Result<Vec<_>, GeomError>>()?;
            protos.push((p.label.clone(), poly));
            let mut list = Vec::new();
            for piece in &p.pieces {
                let id = *ids.get(piece.tile.as_str()).ok_or_else(|| GeomError::UnknownPrototile(piece.tile.clone()))?;
                list.push(Tile { prototile: id, translation: pt(num(&piece.at[0])?, num(&piece.at[1])?) });
            }
            pieces.push(list);
        }
        let mut rule = InflationRule::new(file.name.as_deref().unwrap_or("custom"), expansion, protos, pieces)?;
        if let Some(d) = &file.display {
            rule = rule.with_display(mat(d)?);
        }
        if let Some(d) = file.radicand {
            if rule.radicand != 0 && rule.radicand != d {
                return Err(GeomError::MixedFields(d, rule.radicand));
            }
            rule.radicand = d;
        }
        rule.mark_stone();
        Ok(rule)
    }

    /// The square, chair and pentagon rules; the flag is set where the stone check passes.
    pub fn builtin(name: &str) -> Result<Self, GeomError> {
        let mut rule = match name {
            "square" => InflationRule::new(
                "square",
                diag(QuadNum::int(2)),
                vec![("Q".into(), int_poly(&[(0, 0), (1, 0), (1, 1), (0, 1)]))],
                vec![[(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|&(x, y)| Tile { prototile: 0, translation: int_pt(x, y) })
                    .collect()],
            )?,
            "chair" => chair()?,
            "penta_gaps" => pentagons()?,
            _ => return Err(GeomError::UnknownBuiltin(name.to_string())),
        };
        rule.mark_stone();
        Ok(rule)
    }

    /// Runs [`verify_stone`] and records the verdict.
    pub fn mark_stone(&mut self) -> StoneReport {
        let report = verify_stone(self);
        self.stone = report.stone;
        report
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `D` of the field `Q(√D)` the coordinates live in, `0` when all are rational.
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn expansion(&self) -> &[[QuadNum; 2]; 2] {
        &self.expansion
    }

    pub fn prototiles(&self) -> &[Prototile] {
        &self.prototiles
    }

    pub fn pieces(&self, prototile: usize) -> &[Tile] {
        &self.pieces[prototile]
    }

    pub fn is_stone(&self) -> bool {
        self.stone
    }

    pub fn prototile_id(&self, label: &str) -> Option<usize> {
        self.prototiles.iter().position(|p| p.label == label)
    }

    /// `M[i][j]`: copies of prototile `i` among the pieces of prototile `j`.
    pub fn matrix(&self) -> Vec<Vec<u64>> {
        let n = self.prototiles.len();
        let mut m = vec![vec![0u64; n]; n];
        for (j, list) in self.pieces.iter().enumerate() {
            for t in list {
                m[t.prototile][j] += 1;
            }
        }
        m
    }

    pub fn placed(&self, t: &Tile) -> Vec<Point> {
        translate(&self.prototiles[t.prototile].polygon, &t.translation)
    }

    pub fn to_json(&self) -> Value {
        let m = |m: &[[QuadNum; 2]; 2]| json!(m.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>());
        json!({
            "name": self.name,
            "radicand": self.radicand,
            "expansion": m(&self.expansion),
            "stone": self.stone,
            "prototiles": self.prototiles.iter().map(|p| json!({
                "label": p.label,
                "vertices": p.polygon.iter().map(|v| [v[0].to_string(), v[1].to_string()]).collect::<Vec<_>>(),
                "area": p.area().to_string(),
                "pieces": self.pieces[p.id].len(),
            })).collect::<Vec<_>>(),
            "matrix": self.matrix(),
        })
    }
}

fn diag(s: QuadNum) -> [[QuadNum; 2]; 2] {
    [[s.clone(), QuadNum::zero()], [QuadNum::zero(), s]]
}

fn int_pt(x: i64, y: i64) -> Point {
    pt(QuadNum::int(x), QuadNum::int(y))
}

fn int_poly(v: &[(i64, i64)]) -> Vec<Point> {
    v.iter().map(|&(x, y)| int_pt(x, y)).collect()
}

fn rot90(p: &Point) -> Point {
    [-p[1].clone(), p[0].clone()]
}

/// Four rotations of the L-tromino, labelled by the corner the arms meet at.
fn chair() -> Result<InflationRule, GeomError> {
    let labels = ["SW", "SE", "NE", "NW"];
    let base = int_poly(&[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]);
    let base_pieces = [(0usize, (0, 0)), (0, (1, 1)), (1, (4, 0)), (3, (0, 4))];
    let mut protos = Vec::new();
    let mut pieces = Vec::new();
    for r in 0..4 {
        let turn = |p: &Point| (0..r).fold(p.clone(), |acc, _| rot90(&acc));
        protos.push((labels[r].to_string(), base.iter().map(turn).collect()));
        pieces.push(
            base_pieces
                .iter()
                .map(|&(id, (x, y))| Tile { prototile: (id + r) % 4, translation: turn(&int_pt(x, y)) })
                .collect(),
        );
    }
    InflationRule::new("chair", diag(QuadNum::int(2)), protos, pieces)
}

/// Coordinates of `ζᵏ`, `ζ = e^{2πi/5}`, in the basis `(1, ζ)`.
fn zeta_powers() -> Vec<Point> {
    let f = q("-1/2+1/2√5");
    let g = q("1/2-1/2√5");
    vec![
        pt(QuadNum::int(1), QuadNum::zero()),
        pt(QuadNum::zero(), QuadNum::int(1)),
        pt(QuadNum::int(-1), f.clone()),
        pt(g.clone(), g),
        pt(f, QuadNum::int(-1)),
    ]
}

/// A pentagon inflated by `φ²` holds five corner copies and one reversed copy in the middle.
fn pentagons() -> Result<InflationRule, GeomError> {
    let z = zeta_powers();
    let phi = QuadNum::phi();
    let up: Vec<Point> = z.clone();
    let down: Vec<Point> = z.iter().map(|p| scale(&QuadNum::int(-1), p)).collect();
    let corner = |sign: i64| -> Vec<Tile> {
        let own = usize::from(sign < 0);
        let mut v: Vec<Tile> = z
            .iter()
            .map(|p| Tile { prototile: own, translation: scale(&(phi.clone() * QuadNum::int(sign)), p) })
            .collect();
        v.push(Tile { prototile: 1 - own, translation: pt(QuadNum::zero(), QuadNum::zero()) });
        v
    };
    let rule = InflationRule::new(
        "penta_gaps",
        diag(phi.pow(2)),
        vec![("up".into(), up), ("down".into(), down)],
        vec![corner(1), corner(-1)],
    )?;
    // the basis (1, ζ) drawn with ζ at 72°; the sine is a display approximation
    Ok(rule.with_display([[QuadNum::int(1), q("-1/4+1/4√5")], [QuadNum::zero(), q("951/1000")]]))
}

// ---------------------------------------------------------------------------------------------
// stone check

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileStoneReport {
    pub label: String,
    pub inflated_area: QuadNum,
    pub pieces_area: QuadNum,
    /// Inflated area not covered by the pieces.
    pub uncovered_area: QuadNum,
    /// Sum of the pairwise overlap areas of the pieces.
    pub overlap_area: QuadNum,
    /// Area of the pieces lying outside the inflated tile.
    pub outside_area: QuadNum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoneReport {
    pub stone: bool,
    pub det: QuadNum,
    pub tiles: Vec<TileStoneReport>,
}

impl StoneReport {
    pub fn to_json(&self) -> Value {
        json!({
            "stone": self.stone,
            "det": self.det.to_string(),
            "tiles": self.tiles.iter().map(|t| json!({
                "label": t.label,
                "inflated_area": t.inflated_area.to_string(),
                "pieces_area": t.pieces_area.to_string(),
                "uncovered_area": t.uncovered_area.to_string(),
                "overlap_area": t.overlap_area.to_string(),
                "outside_area": t.outside_area.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Area identity, pairwise interior-disjointness and containment of the pieces, per prototile.
pub fn verify_stone(rule: &InflationRule) -> StoneReport {
    let l = &rule.expansion;
    let det = l[0][0].clone() * l[1][1].clone() - l[0][1].clone() * l[1][0].clone();
    let det_abs = if det.sign() == Ordering::Less { -det.clone() } else { det.clone() };
    let tiles: Vec<TileStoneReport> = rule
        .prototiles
        .par_iter()
        .map(|p| {
            let mut support: Vec<Point> = p.polygon.iter().map(|v| apply(l, v)).collect();
            if det.sign() == Ordering::Less {
                support.reverse();
            }
            let placed: Vec<Vec<Point>> = rule.pieces[p.id].iter().map(|t| rule.placed(t)).collect();
            let inflated_area = polygon_area(&support);
            let pieces_area = placed.iter().fold(QuadNum::zero(), |a, x| a + polygon_area(x));
            let mut overlap = QuadNum::zero();
            for i in 0..placed.len() {
                for j in i + 1..placed.len() {
                    overlap = overlap + intersection_area(&placed[i], &placed[j]);
                }
            }
            let inside = placed.iter().fold(QuadNum::zero(), |a, x| a + intersection_area(x, &support));
            TileStoneReport {
                label: p.label.clone(),
                uncovered_area: inflated_area.clone() - inside.clone() + overlap.clone(),
                inflated_area,
                outside_area: pieces_area.clone() - inside,
                pieces_area,
                overlap_area: overlap,
            }
        })
        .collect();
    let stone = tiles
        .iter()
        .all(|t| t.uncovered_area.is_zero() && t.overlap_area.is_zero() && t.outside_area.is_zero());
    StoneReport { stone, det: det_abs, tiles }
}

// ---------------------------------------------------------------------------------------------
// patches

/// A finite set of tiles in canonical (sorted) order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GeomPatch {
    tiles: Vec<Tile>,
}

impl GeomPatch {
    pub fn new(mut tiles: Vec<Tile>) -> Self {
        tiles.sort();
        GeomPatch { tiles }
    }

    pub fn single(prototile: usize) -> Self {
        GeomPatch { tiles: vec![Tile { prototile, translation: pt(QuadNum::zero(), QuadNum::zero()) }] }
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Sum of the tile areas.
    pub fn area(&self, rule: &InflationRule) -> QuadNum {
        self.tiles.iter().fold(QuadNum::zero(), |a, t| a + rule.prototiles[t.prototile].area())
    }

    pub fn counts(&self, rule: &InflationRule) -> Vec<u64> {
        let mut c = vec![0u64; rule.prototiles.len()];
        for t in &self.tiles {
            c[t.prototile] += 1;
        }
        c
    }
}

/// Inflates by `L` and replaces every tile by its pieces.
pub fn inflate_replace(rule: &InflationRule, patch: &GeomPatch) -> GeomPatch {
    let tiles: Vec<Tile> = patch
        .tiles
        .par_iter()
        .flat_map_iter(|t| {
            let base = apply(&rule.expansion, &t.translation);
            rule.pieces[t.prototile]
                .iter()
                .map(move |p| Tile { prototile: p.prototile, translation: add(&base, &p.translation) })
        })
        .collect();
    GeomPatch::new(tiles)
}

pub fn iterate(rule: &InflationRule, seed: &GeomPatch, n: u32) -> GeomPatch {
    (0..n).fold(seed.clone(), |p, _| inflate_replace(rule, &p))
}

/// Column `j` of `Mⁿ`: the tile counts of `n` iterations of prototile `j`.
pub fn expected_counts(rule: &InflationRule, j: usize, n: u32) -> Vec<u64> {
    let m: Mat<BigRational> = rule
        .matrix()
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let p = mat_pow(&m, n);
    p.iter().map(|r| r[j].to_integer().try_into().unwrap_or(u64::MAX)).collect()
}

// ---------------------------------------------------------------------------------------------
// metrics

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InflationMetrics {
    /// Lower bound on `|Lx|/|x|`; exact when `similarity` holds.
    pub lambda_lower: QuadNum,
    /// Upper bound on `|Lx|/|x|`; exact when `similarity` holds.
    pub lambda_upper: QuadNum,
    pub similarity: bool,
    pub c: QuadNum,
    /// `c/(λ−1)`.
    pub kappa: QuadNum,
    /// Radii `λᵏ + κ` of `Vᵏ` for `k = 0..`, reported for similarities only.
    pub v_radii: Option<Vec<QuadNum>>,
}

impl InflationMetrics {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda_lower": self.lambda_lower.to_string(),
            "lambda_upper": self.lambda_upper.to_string(),
            "similarity": self.similarity,
            "c": self.c.to_string(),
            "kappa": self.kappa.to_string(),
            "v_radii": self.v_radii.as_ref().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
        })
    }
}

fn abs(x: QuadNum) -> QuadNum {
    if x.sign() == Ordering::Less {
        -x
    } else {
        x
    }
}

/// Exact square root of a non-negative rational if it is a perfect square.
fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

const BISECTION_STEPS: usize = 40;

/// Bisection for the least singular value bound: largest dyadic `s` with `s² < μ_min(LᵀL)` and
/// smallest with `s² > μ_max(LᵀL)`.
fn singular_bounds(l: &[[QuadNum; 2]; 2]) -> (QuadNum, QuadNum) {
    let p = l[0][0].clone() * l[0][0].clone() + l[1][0].clone() * l[1][0].clone();
    let r = l[0][1].clone() * l[0][1].clone() + l[1][1].clone() * l[1][1].clone();
    let qq = l[0][0].clone() * l[0][1].clone() + l[1][0].clone() * l[1][1].clone();
    let below_min = |t: &QuadNum| {
        let a = p.clone() - t.clone();
        let dd = a.clone() * (r.clone() - t.clone()) - qq.clone() * qq.clone();
        a.sign() == Ordering::Greater && dd.sign() == Ordering::Greater
    };
    let above_max = |t: &QuadNum| {
        let a = t.clone() - p.clone();
        let dd = a.clone() * (t.clone() - r.clone()) - qq.clone() * qq.clone();
        a.sign() == Ordering::Greater && dd.sign() == Ordering::Greater
    };
    let top = QuadNum::int(1) + p.clone() + r.clone();
    let half = QuadNum::frac(1, 2);
    let (mut lo, mut hi) = (QuadNum::zero(), top.clone());
    for _ in 0..BISECTION_STEPS {
        let mid = (lo.clone() + hi.clone()) * half.clone();
        if below_min(&(mid.clone() * mid.clone())) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lower = lo;
    let (mut lo, mut hi) = (QuadNum::zero(), top);
    for _ in 0..BISECTION_STEPS {
        let mid = (lo.clone() + hi.clone()) * half.clone();
        if above_max(&(mid.clone() * mid.clone())) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lower, hi)
}

/// `λ` bounds, `κ = c/(λ−1)` and the `Vᵏ` radii for `k = 0..=kmax`.
pub fn metrics(rule: &InflationRule, c: &QuadNum, kmax: u32) -> Result<InflationMetrics, GeomError> {
    let l = &rule.expansion;
    let m: Mat<QuadNum> = l.iter().map(|r| r.to_vec()).collect();
    if !is_expansive(&m) {
        return Err(GeomError::NotExpansive("an eigenvalue has modulus at most 1".into()));
    }
    if c.sign() == Ordering::Less {
        return Err(GeomError::Parse("derivation radius must be non-negative".into()));
    }
    let (a, b) = (l[0][0].clone(), l[1][0].clone());
    let similar = l[1][1] == a && l[0][1] == -b.clone();
    let exact = if !similar {
        None
    } else if b.is_zero() {
        Some(abs(a.clone()))
    } else if a.is_zero() {
        Some(abs(b.clone()))
    } else {
        let n = a.clone() * a.clone() + b.clone() * b.clone();
        n.as_rational().and_then(rational_sqrt).map(QuadNum::rational)
    };
    let (lower, upper, similarity) = match exact {
        Some(x) => (x.clone(), x, true),
        None => {
            let (lo, hi) = singular_bounds(l);
            (lo, hi, false)
        }
    };
    let gap = lower.clone() - QuadNum::one();
    if gap.sign() != Ordering::Greater {
        return Err(GeomError::NotExpansive(format!("certified lower bound {} on the stretch is not above 1", lower.to_decimal(6))));
    }
    let kappa = c.clone() / gap;
    let v_radii = similarity.then(|| (0..=kmax).map(|k| lower.pow(k) + kappa.clone()).collect());
    Ok(InflationMetrics { lambda_lower: lower, lambda_upper: upper, similarity, c: c.clone(), kappa, v_radii })
}

// ---------------------------------------------------------------------------------------------
// SVG

#[derive(Clone, Debug)]
pub struct SvgStyle {
    /// Decimal places in the output; the geometry itself stays exact.
    pub precision: u32,
    /// Extra outline drawn dashed on top, e.g. the inflated seed.
    pub overlay: Option<Vec<Point>>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { precision: 4, overlay: None }
    }
}

const PALETTE: [&str; 6] = ["#e9c46a", "#8ab6d6", "#c3a6d8", "#90d4a4", "#f2a08f", "#b8c2c4"];

/// The boundary of `Lⁿ` applied to prototile `j`.
pub fn inflated_outline(rule: &InflationRule, j: usize, n: u32) -> Vec<Point> {
    rule.prototiles[j]
        .polygon
        .iter()
        .map(|v| (0..n).fold(v.clone(), |acc, _| apply(&rule.expansion, &acc)))
        .collect()
}

/// SVG 1.1 document with one path per tile in canonical order.
pub fn render_svg(rule: &InflationRule, patch: &GeomPatch, style: &SvgStyle) -> String {
    let view = |p: &Point| -> Point {
        let p = match &rule.display {
            Some(m) => apply(m, p),
            None => p.clone(),
        };
        [p[0].clone(), -p[1].clone()]
    };
    let polys: Vec<(usize, Vec<Point>)> =
        patch.tiles.iter().map(|t| (t.prototile, rule.placed(t).iter().map(view).collect())).collect();
    let overlay: Option<Vec<Point>> = style.overlay.as_ref().map(|o| o.iter().map(view).collect());
    let mut all = polys.iter().flat_map(|(_, p)| p.iter()).chain(overlay.iter().flatten());
    let fmt = |x: &QuadNum| x.to_decimal(style.precision);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let Some(first) = all.next() else {
        out.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 1 1\">\n</svg>\n");
        return out;
    };
    let (mut lo, mut hi) = (first.clone(), first.clone());
    for p in all {
        for i in 0..2 {
            if p[i] < lo[i] {
                lo[i] = p[i].clone();
            }
            if p[i] > hi[i] {
                hi[i] = p[i].clone();
            }
        }
    }
    let ext = std::cmp::max(hi[0].clone() - lo[0].clone(), hi[1].clone() - lo[1].clone());
    let margin = ext.clone() / QuadNum::int(20);
    let stroke = ext / QuadNum::int(400);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        fmt(&(lo[0].clone() - margin.clone())),
        fmt(&(lo[1].clone() - margin.clone())),
        fmt(&(hi[0].clone() - lo[0].clone() + margin.clone() * QuadNum::int(2))),
        fmt(&(hi[1].clone() - lo[1].clone() + margin * QuadNum::int(2))),
    );
    let _ = writeln!(out, "<g stroke=\"#222222\" stroke-width=\"{}\" stroke-linejoin=\"round\">", fmt(&stroke));
    let path = |poly: &[Point]| -> String {
        let pts: Vec<String> = poly.iter().map(|p| format!("{},{}", fmt(&p[0]), fmt(&p[1]))).collect();
        format!("M{}Z", pts.join(" L"))
    };
    for (id, poly) in &polys {
        let label = &rule.prototiles[*id].label;
        let _ = writeln!(
            out,
            "<path class=\"{}\" fill=\"{}\" d=\"{}\"/>",
            label,
            PALETTE[*id % PALETTE.len()],
            path(poly)
        );
    }
    out.push_str("</g>\n");
    if let Some(o) = &overlay {
        let _ = writeln!(
            out,
            "<path class=\"overlay\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\" d=\"{}\"/>",
            fmt(&(stroke.clone() * QuadNum::int(2))),
            fmt(&(stroke.clone() * QuadNum::int(8))),
            fmt(&(stroke.clone() * QuadNum::int(4))),
            path(o)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi() -> QuadNum {
        QuadNum::phi()
    }

    #[test]
    fn chair_is_stone() {
        let c = InflationRule::builtin("chair").unwrap();
        assert!(c.is_stone());
        let r = verify_stone(&c);
        assert_eq!(r.det, QuadNum::int(4));
        assert!(r.tiles.iter().all(|t| t.inflated_area == QuadNum::int(12)));
        assert_eq!(c.pieces(0).len(), 4);
    }

    #[test]
    fn pentagon_leaves_gaps() {
        let p = InflationRule::builtin("penta_gaps").unwrap();
        assert!(!p.is_stone());
        let area = p.prototiles()[0].area();
        // five triangles from the centre, each spanned by a unimodular pair of the basis
        assert_eq!(area, QuadNum::frac(5, 2));
        let r = verify_stone(&p);
        let expect = (phi().pow(4) - QuadNum::int(6)) * area;
        for t in &r.tiles {
            assert_eq!(t.uncovered_area, expect);
            assert!(t.overlap_area.is_zero());
            assert!(t.outside_area.is_zero());
        }
        assert_eq!(expect.sign(), Ordering::Greater);
    }

    #[test]
    fn square_is_stone() {
        let s = InflationRule::builtin("square").unwrap();
        assert!(s.is_stone());
        assert_eq!(iterate(&s, &GeomPatch::single(0), 3).len(), 64);
    }

    #[test]
    fn overlapping_pieces_are_caught() {
        let text = r#"
            expansion = [[2, 0], [0, 2]]
            [[prototile]]
            label = "Q"
            vertices = [[0, 0], [1, 0], [1, 1], [0, 1]]
            pieces = [{ tile = "Q", at = [0, 0] }, { tile = "Q", at = ["1/2", 0] },
                      { tile = "Q", at = [0, 1] }, { tile = "Q", at = [1, 1] }]
        "#;
        let r = InflationRule::from_toml(text).unwrap();
        assert!(!r.is_stone());
        let t = &verify_stone(&r).tiles[0];
        assert_eq!(t.overlap_area, QuadNum::frac(1, 2));
        assert_eq!(t.uncovered_area, QuadNum::frac(1, 2));
        assert!(t.outside_area.is_zero());
    }

    #[test]
    fn counts_and_areas() {
        for name in BUILTIN_GEOMETRIC {
            let r = InflationRule::builtin(name).unwrap();
            for j in 0..r.prototiles().len() {
                for n in 0..4 {
                    let p = iterate(&r, &GeomPatch::single(j), n);
                    assert_eq!(p.counts(&r), expected_counts(&r, j, n), "{name} {j} {n}");
                }
            }
        }
        let c = InflationRule::builtin("chair").unwrap();
        let p = iterate(&c, &GeomPatch::single(0), 3);
        assert_eq!(p.len(), 64);
        assert_eq!(p.area(&c), QuadNum::int(64) * c.prototiles()[0].area());
        let pent = InflationRule::builtin("penta_gaps").unwrap();
        assert_eq!(iterate(&pent, &GeomPatch::single(0), 3).len(), 216);
    }

    #[test]
    fn iteration_composes() {
        let c = InflationRule::builtin("penta_gaps").unwrap();
        let s = GeomPatch::single(1);
        assert_eq!(iterate(&c, &s, 3), iterate(&c, &iterate(&c, &s, 1), 2));
    }

    #[test]
    fn metrics_examples() {
        let c = InflationRule::builtin("chair").unwrap();
        let m = metrics(&c, &QuadNum::zero(), 3).unwrap();
        assert!(m.kappa.is_zero());
        assert_eq!(m.v_radii.unwrap(), vec![QuadNum::int(1), QuadNum::int(2), QuadNum::int(4), QuadNum::int(8)]);
        assert_eq!(metrics(&c, &QuadNum::int(1), 0).unwrap().kappa, QuadNum::int(1));
        let p = InflationRule::builtin("penta_gaps").unwrap();
        let m = metrics(&p, &QuadNum::int(1), 1).unwrap();
        assert_eq!(m.kappa, phi() - QuadNum::int(1));
        assert_eq!(m.kappa, QuadNum::int(1) / phi());
    }

    #[test]
    fn non_similarity_bounds() {
        let text = r#"
            expansion = [[3, 1], [0, 2]]
            [[prototile]]
            label = "Q"
            vertices = [[0, 0], [1, 0], [1, 1], [0, 1]]
            pieces = []
        "#;
        let r = InflationRule::from_toml(text).unwrap();
        let m = metrics(&r, &QuadNum::int(1), 2).unwrap();
        assert!(!m.similarity && m.v_radii.is_none());
        // singular values of [[3,1],[0,2]] are √(7 ± √13)
        let lo2 = m.lambda_lower.clone() * m.lambda_lower.clone();
        let hi2 = m.lambda_upper.clone() * m.lambda_upper.clone();
        assert!(lo2 < q("7-1√13") && lo2 > q("7-1√13") - QuadNum::frac(1, 1000));
        assert!(hi2 > q("7+1√13") && hi2 < q("7+1√13") + QuadNum::frac(1, 1000));
        let shear = text.replace("[[3, 1], [0, 2]]", "[[1, 1], [0, 1]]");
        let r = InflationRule::from_toml(&shear).unwrap();
        assert!(matches!(metrics(&r, &QuadNum::int(1), 0), Err(GeomError::NotExpansive(_))));
    }

    #[test]
    fn polygon_checks() {
        let bowtie = vec![int_pt(0, 0), int_pt(1, 1), int_pt(1, 0), int_pt(0, 1)];
        assert!(check_polygon("x", &bowtie).is_err());
        let cw = int_poly(&[(0, 0), (0, 1), (1, 1), (1, 0)]);
        assert!(check_polygon("x", &cw).is_err());
        let mixed = vec![
            pt(q("√2"), QuadNum::zero()),
            pt(q("1+√3"), QuadNum::zero()),
            pt(QuadNum::zero(), QuadNum::int(1)),
        ];
        let r = InflationRule::new("m", diag(QuadNum::int(2)), vec![("t".into(), mixed)], vec![vec![]]);
        assert!(matches!(r, Err(GeomError::MixedFields(2, 3))));
    }

    #[test]
    fn l_shape_triangulation_covers_area() {
        let l = int_poly(&[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]);
        let tris = triangulate(&l);
        let total = tris.iter().fold(QuadNum::zero(), |a, t| a + polygon_area(t));
        assert_eq!(total, QuadNum::int(3));
        assert_eq!(intersection_area(&l, &l), QuadNum::int(3));
        let shifted = translate(&l, &int_pt(1, 1));
        assert_eq!(intersection_area(&l, &shifted), QuadNum::zero());
    }

    #[test]
    fn svg_is_deterministic() {
        let c = InflationRule::builtin("chair").unwrap();
        let p = iterate(&c, &GeomPatch::single(0), 2);
        let a = render_svg(&c, &p, &SvgStyle::default());
        assert_eq!(a, render_svg(&c, &p.clone(), &SvgStyle::default()));
        assert_eq!(a.matches("<path").count(), 16);
        let empty = render_svg(&c, &GeomPatch::default(), &SvgStyle::default());
        assert!(empty.contains("<svg") && !empty.contains("<path"));
        let pent = InflationRule::builtin("penta_gaps").unwrap();
        let style = SvgStyle { precision: 3, overlay: Some(inflated_outline(&pent, 0, 2)) };
        let s = render_svg(&pent, &iterate(&pent, &GeomPatch::single(0), 2), &style);
        assert_eq!(s.matches("<path").count(), 37);
    }
}
