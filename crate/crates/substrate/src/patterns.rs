//! Patterns on the integer lattice, patches and their algebra.
//!
//! A pattern assigns a letter to every cell of `ℤ^d` (`d ∈ {1, 2}`); cell `x` covers the unit
//! cube at `x + phase`. One-dimensional cells are stored as `[x, 0]` so that most code paths are
//! shared between dimensions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::ldmap::LocalRule;
use crate::linalg::{self, Mat};
use crate::subst::{self, Rule, Seed};

pub type Letter = u8;
pub type Cell = [i64; 2];
pub type Phase = [BigRational; 2];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("sub-shape is not contained in the patch shape")]
    SubShapeNotContained,
    #[error("matrix is not invertible")]
    NonInvertibleMatrix,
    #[error("transformed cell is not integral")]
    NonIntegralImage,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("invalid pattern source: {0}")]
    InvalidSource(String),
}

pub type Result<T, E = PatternError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Result<Self> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(PatternError::InvalidAlphabet("empty".into()));
        }
        if letters.len() > 255 {
            return Err(PatternError::InvalidAlphabet("more than 255 letters".into()));
        }
        for (i, l) in letters.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(PatternError::InvalidAlphabet(format!("bad letter name {l:?}")));
            }
            if letters[..i].contains(l) {
                return Err(PatternError::InvalidAlphabet(format!("duplicate letter {l:?}")));
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn name(&self, l: Letter) -> &str {
        &self.letters[l as usize]
    }

    pub fn index(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|x| x == name).map(|i| i as Letter)
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn iter(&self) -> impl Iterator<Item = Letter> {
        0..self.letters.len() as Letter
    }

    /// Concatenated names when every name is one character, space separated otherwise.
    pub fn render(&self, word: &[Letter]) -> String {
        let sep = if self.letters.iter().all(|l| l.chars().count() == 1) { "" } else { " " };
        word.iter().map(|&l| self.name(l)).collect::<Vec<_>>().join(sep)
    }

    /// Inverse of [`Alphabet::render`]: splits on whitespace, or per character when unambiguous.
    pub fn parse_word(&self, s: &str) -> Result<Vec<Letter>> {
        let parts: Vec<String> = if s.split_whitespace().count() > 1 {
            s.split_whitespace().map(str::to_string).collect()
        } else if self.index(s.trim()).is_some() {
            vec![s.trim().to_string()]
        } else {
            s.trim().chars().map(|c| c.to_string()).collect()
        };
        parts
            .iter()
            .map(|p| self.index(p).ok_or_else(|| PatternError::UnknownLetter(p.clone())))
            .collect()
    }
}

/// An axis-aligned box of cells; `Radius(r)` is the box `[−r, r]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    dim: u8,
    lo: Cell,
    hi: Cell,
}

impl Shape {
    pub fn new(dim: usize, lo: Cell, hi: Cell) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(PatternError::ShapeMismatch(format!("dimension {dim}")));
        }
        if lo[0] > hi[0] || lo[1] > hi[1] {
            return Err(PatternError::ShapeMismatch("lo must not exceed hi".into()));
        }
        if dim == 1 && (lo[1] != 0 || hi[1] != 0) {
            return Err(PatternError::ShapeMismatch("1-D shapes have trivial second axis".into()));
        }
        Ok(Shape { dim: dim as u8, lo, hi })
    }

    pub fn line(lo: i64, hi: i64) -> Self {
        Shape::new(1, [lo, 0], [hi, 0]).expect("lo ≤ hi")
    }

    pub fn rect(lo: Cell, hi: Cell) -> Self {
        Shape::new(2, lo, hi).expect("lo ≤ hi")
    }

    pub fn radius(r: i64, dim: usize) -> Self {
        assert!(r >= 0);
        if dim == 1 {
            Shape::line(-r, r)
        } else {
            Shape::rect([-r, -r], [r, r])
        }
    }

    /// The box `[0, size)`.
    pub fn sized(dim: usize, size: [i64; 2]) -> Self {
        Shape::new(dim, [0, 0], [size[0] - 1, size[1] - 1]).expect("positive size")
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn lo(&self) -> Cell {
        self.lo
    }

    pub fn hi(&self) -> Cell {
        self.hi
    }

    pub fn size(&self) -> [i64; 2] {
        [self.hi[0] - self.lo[0] + 1, self.hi[1] - self.lo[1] + 1]
    }

    pub fn len(&self) -> usize {
        let s = self.size();
        (s[0] * s[1]) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_radius(&self) -> Option<i64> {
        let r = self.hi[0];
        let expect = Shape::radius(r.max(0), self.dim());
        (r >= 0 && *self == expect).then_some(r)
    }

    pub fn contains(&self, c: Cell) -> bool {
        (0..2).all(|i| self.lo[i] <= c[i] && c[i] <= self.hi[i])
    }

    pub fn contains_shape(&self, o: &Shape) -> bool {
        self.dim == o.dim && self.contains(o.lo) && self.contains(o.hi)
    }

    /// Row-major position of `c`, axis 0 slowest.
    pub fn index(&self, c: Cell) -> Option<usize> {
        if !self.contains(c) {
            return None;
        }
        let n1 = self.hi[1] - self.lo[1] + 1;
        Some(((c[0] - self.lo[0]) * n1 + (c[1] - self.lo[1])) as usize)
    }

    pub fn cell_at(&self, i: usize) -> Cell {
        let n1 = self.hi[1] - self.lo[1] + 1;
        let i = i as i64;
        [self.lo[0] + i / n1, self.lo[1] + i % n1]
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let s = *self;
        (0..self.len()).map(move |i| s.cell_at(i))
    }

    pub fn translate(&self, z: Cell) -> Shape {
        Shape { dim: self.dim, lo: add(self.lo, z), hi: add(self.hi, z) }
    }

    /// Grows (or shrinks, for negative `by`) the box on every side; `None` if it vanishes.
    pub fn grow(&self, by: i64) -> Option<Shape> {
        let b1 = if self.dim == 1 { 0 } else { by };
        Shape::new(self.dim(), [self.lo[0] - by, self.lo[1] - b1], [self.hi[0] + by, self.hi[1] + b1]).ok()
    }

    pub fn to_json(&self) -> Value {
        let d = self.dim();
        json!({ "lo": self.lo[..d].to_vec(), "hi": self.hi[..d].to_vec() })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            write!(f, "[{}..{}]", self.lo[0], self.hi[0])
        } else {
            write!(f, "[{}..{}]x[{}..{}]", self.lo[0], self.hi[0], self.lo[1], self.hi[1])
        }
    }
}

pub fn add(a: Cell, b: Cell) -> Cell {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Cell, b: Cell) -> Cell {
    [a[0] - b[0], a[1] - b[1]]
}

/// A finite map from a box of relative cells to letters, taken at an anchor.
///
/// Equality, ordering and hashing ignore the anchor.
#[derive(Clone, Debug)]
pub struct Patch {
    shape: Shape,
    anchor: Cell,
    values: Vec<Letter>,
}

impl PartialEq for Patch {
    fn eq(&self, o: &Self) -> bool {
        self.shape == o.shape && self.values == o.values
    }
}

impl Eq for Patch {}

impl Hash for Patch {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.shape.hash(h);
        self.values.hash(h);
    }
}

impl PartialOrd for Patch {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Patch {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.shape, &self.values).cmp(&(o.shape, &o.values))
    }
}

impl Patch {
    pub fn new(shape: Shape, anchor: Cell, values: Vec<Letter>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(PatternError::ShapeMismatch(format!(
                "{} values for a shape of {} cells",
                values.len(),
                shape.len()
            )));
        }
        Ok(Patch { shape, anchor, values })
    }

    pub fn from_fn(shape: Shape, anchor: Cell, mut f: impl FnMut(Cell) -> Letter) -> Self {
        let values = shape.cells().map(&mut f).collect();
        Patch { shape, anchor, values }
    }

    pub fn constant(shape: Shape, l: Letter) -> Self {
        Patch { shape, anchor: [0, 0], values: vec![l; shape.len()] }
    }

    /// A 1-D patch on `[0, word.len())`.
    pub fn word(word: &[Letter]) -> Self {
        Patch { shape: Shape::line(0, word.len() as i64 - 1), anchor: [0, 0], values: word.to_vec() }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn anchor(&self) -> Cell {
        self.anchor
    }

    pub fn values(&self) -> &[Letter] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Letter> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn with_anchor(mut self, a: Cell) -> Self {
        self.anchor = a;
        self
    }

    pub fn get(&self, c: Cell) -> Option<Letter> {
        self.shape.index(c).map(|i| self.values[i])
    }

    /// Copy of the same contents re-based so that the shape starts at the origin.
    pub fn normalized(&self) -> Patch {
        let lo = self.shape.lo();
        patch_shift(self, lo)
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> Value {
        json!({
            "shape": self.shape.to_json(),
            "values": self.values.iter().map(|&l| alphabet.name(l)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, alphabet: &Alphabet) -> Result<Patch> {
        let bad = |m: &str| PatternError::ShapeMismatch(m.to_string());
        let vec_of = |k: &str| -> Result<Vec<i64>> {
            v["shape"][k]
                .as_array()
                .ok_or_else(|| bad("missing shape bounds"))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| bad("non-integer bound")))
                .collect()
        };
        let (lo, hi) = (vec_of("lo")?, vec_of("hi")?);
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(bad("bounds must have length 1 or 2"));
        }
        let pad = |x: &[i64]| [x[0], x.get(1).copied().unwrap_or(0)];
        let shape = Shape::new(lo.len(), pad(&lo), pad(&hi))?;
        let values = v["values"]
            .as_array()
            .ok_or_else(|| bad("missing values"))?
            .iter()
            .map(|x| {
                let s = x.as_str().ok_or_else(|| bad("letters must be strings"))?;
                alphabet.index(s).ok_or_else(|| PatternError::UnknownLetter(s.into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Patch::new(shape, [0, 0], values)
    }
}

pub fn patch_restrict(p: &Patch, sub: Shape) -> Result<Patch> {
    if !p.shape.contains_shape(&sub) {
        return Err(PatternError::SubShapeNotContained);
    }
    Ok(Patch::from_fn(sub, p.anchor, |c| p.get(c).expect("contained")))
}

/// `v'(u) = v(u + z)`: the same content viewed from the anchor moved by `z`.
pub fn patch_shift(p: &Patch, z: Cell) -> Patch {
    let z = if p.dim() == 1 { [z[0], 0] } else { z };
    Patch { shape: p.shape.translate([-z[0], -z[1]]), anchor: add(p.anchor, z), values: p.values.clone() }
}

/// Contents of `p` and `q` agree on every cell of `on` (both must contain it).
pub fn agree_on(p: &Patch, q: &Patch, on: &Shape) -> Result<bool> {
    if !p.shape.contains_shape(on) || !q.shape.contains_shape(on) {
        return Err(PatternError::SubShapeNotContained);
    }
    Ok(on.cells().all(|c| p.get(c) == q.get(c)))
}

/// Union of two patches in the same frame; fails where they disagree.
pub fn patch_glue(p: &SparsePatch, q: &SparsePatch) -> Result<SparsePatch> {
    if p.dim != q.dim || p.anchor != q.anchor {
        return Err(PatternError::ShapeMismatch("patches must share dimension and anchor".into()));
    }
    let mut cells = p.cells.clone();
    for (&c, &l) in &q.cells {
        if *cells.entry(c).or_insert(l) != l {
            return Err(PatternError::ShapeMismatch(format!("patches disagree at {:?}", &c[..p.dim])));
        }
    }
    Ok(SparsePatch { dim: p.dim, anchor: p.anchor, cells })
}

/// A patch on an arbitrary finite cell set, produced by linear images of boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePatch {
    pub dim: usize,
    pub anchor: Cell,
    pub cells: BTreeMap<Cell, Letter>,
}

impl SparsePatch {
    pub fn from_patch(p: &Patch) -> Self {
        SparsePatch { dim: p.dim(), anchor: p.anchor, cells: p.shape.cells().zip(p.values.iter().copied()).collect() }
    }

    /// Applies a rational matrix to every cell; fails unless all images are integral.
    pub fn transform(&self, m: &Mat<BigRational>) -> Result<SparsePatch> {
        let d = self.dim;
        let map = |c: Cell| -> Result<Cell> {
            let v: Vec<BigRational> = c[..d].iter().map(|&x| BigRational::from_integer(x.into())).collect();
            let w = linalg::mat_vec(m, &v);
            let mut out = [0i64; 2];
            for (i, x) in w.iter().enumerate() {
                if !x.is_integer() {
                    return Err(PatternError::NonIntegralImage);
                }
                out[i] = x.to_integer().to_i64().ok_or(PatternError::NonIntegralImage)?;
            }
            Ok(out)
        };
        let cells = self.cells.iter().map(|(&c, &l)| Ok((map(c)?, l))).collect::<Result<_>>()?;
        Ok(SparsePatch { dim: d, anchor: map(self.anchor)?, cells })
    }

    /// Back to a box patch when the cell set is exactly a box.
    pub fn to_patch(&self) -> Option<Patch> {
        let lo = [self.cells.keys().map(|c| c[0]).min()?, self.cells.keys().map(|c| c[1]).min()?];
        let hi = [self.cells.keys().map(|c| c[0]).max()?, self.cells.keys().map(|c| c[1]).max()?];
        let shape = Shape::new(self.dim, lo, hi).ok()?;
        if shape.len() != self.cells.len() {
            return None;
        }
        Some(Patch::from_fn(shape, self.anchor, |c| self.cells[&c]))
    }
}

fn check_matrix(l: &[Vec<i64>], dim: usize) -> Result<Mat<BigRational>> {
    if l.len() != dim || l.iter().any(|r| r.len() != dim) {
        return Err(PatternError::ShapeMismatch(format!("matrix must be {dim}x{dim}")));
    }
    let m = crate::lattice::int_to_rat(l);
    if linalg::det(&m).is_zero() {
        return Err(PatternError::NonInvertibleMatrix);
    }
    Ok(m)
}

/// The patch carried to `L·(shape cells)`, value at `L·u` equal to the old value at `u`.
pub fn patch_transform(p: &Patch, l: &[Vec<i64>]) -> Result<SparsePatch> {
    let m = check_matrix(l, p.dim())?;
    SparsePatch::from_patch(p).transform(&m)
}

/// Undoes [`patch_transform`] for the same matrix.
pub fn patch_untransform(sp: &SparsePatch, l: &[Vec<i64>]) -> Result<SparsePatch> {
    let m = check_matrix(l, sp.dim)?;
    let inv = linalg::inverse(&m).ok_or(PatternError::NonInvertibleMatrix)?;
    sp.transform(&inv)
}

pub fn zero_phase() -> Phase {
    [BigRational::zero(), BigRational::zero()]
}

pub fn rat_floor(x: &BigRational) -> i64 {
    x.floor().to_integer().to_i64().expect("phase arithmetic stays in i64")
}

pub fn rat_frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

pub fn fmt_rat(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A pattern that repeats under a full-rank lattice, stored on canonical residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Periodic {
    dim: u8,
    /// Lower-triangular Hermite basis columns `(h00, h10)` and `(0, h11)`; `h11 = 1` in 1-D.
    h: [i64; 3],
    /// Values on `[0, h00) × [0, h11)`, row-major.
    block: Vec<Letter>,
}

impl Periodic {
    /// Builds from lattice generators and a value function on cells; normalizes to the full period lattice.
    pub fn from_fn(dim: usize, gens: &[Cell], f: impl Fn(Cell) -> Letter) -> Result<Self> {
        let mut all: Vec<Vec<i64>> = gens.iter().map(|g| vec![g[0], g[1]]).collect();
        if dim == 1 {
            all.push(vec![0, 1]);
        }
        let m = linalg::transpose(&all);
        let h = crate::lattice::hnf(&m).map_err(|e| PatternError::InvalidSource(e.to_string()))?;
        if h.rank != 2 {
            return Err(PatternError::InvalidSource("period lattice must have full rank".into()));
        }
        let b = &h.basis;
        let hh = [b[0][0], b[1][0], b[1][1]];
        let block = Shape::sized(2, [hh[0], hh[2]]).cells().map(|c| f(c)).collect();
        let p = Periodic { dim: dim as u8, h: hh, block };
        Ok(p.normalize())
    }

    pub fn constant(dim: usize, l: Letter) -> Self {
        Periodic { dim: dim as u8, h: [1, 0, 1], block: vec![l] }
    }

    /// `value(x) = word[x mod |word|]`.
    pub fn word(word: &[Letter]) -> Result<Self> {
        if word.is_empty() {
            return Err(PatternError::InvalidSource("empty period word".into()));
        }
        let n = word.len() as i64;
        Periodic::from_fn(1, &[[n, 0]], |c| word[c[0].rem_euclid(n) as usize])
    }

    /// A 2-D tile repeated along both axes.
    pub fn tile(p: &Patch) -> Result<Self> {
        let s = p.shape().size();
        let lo = p.shape().lo();
        let dim = p.dim();
        let gens: Vec<Cell> = if dim == 1 { vec![[s[0], 0]] } else { vec![[s[0], 0], [0, s[1]]] };
        Periodic::from_fn(dim, &gens, |c| {
            let r = [(c[0] - lo[0]).rem_euclid(s[0]) + lo[0], (c[1] - lo[1]).rem_euclid(s[1]) + lo[1]];
            p.get(r).expect("reduced into tile")
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Lattice generators as columns, canonical Hermite form (1-D: the single period).
    pub fn lattice(&self) -> Vec<Cell> {
        if self.dim == 1 {
            vec![[self.h[0], 0]]
        } else {
            vec![[self.h[0], self.h[1]], [0, self.h[2]]]
        }
    }

    pub fn block(&self) -> &[Letter] {
        &self.block
    }

    /// Number of residue classes (the lattice determinant).
    pub fn det(&self) -> i64 {
        self.h[0] * self.h[2]
    }

    fn reduce(&self, x: Cell) -> Cell {
        let k0 = x[0].div_euclid(self.h[0]);
        let r0 = x[0] - k0 * self.h[0];
        let y1 = x[1] - k0 * self.h[1];
        [r0, y1.rem_euclid(self.h[2])]
    }

    pub fn value(&self, x: Cell) -> Letter {
        let r = self.reduce(x);
        self.block[(r[0] * self.h[2] + r[1]) as usize]
    }

    /// Replaces the lattice by the full period group of the block.
    fn normalize(self) -> Self {
        let dom = Shape::sized(2, [self.h[0], self.h[2]]);
        let mut gens: Vec<Vec<i64>> = vec![vec![self.h[0], 0], vec![self.h[1], self.h[2]]];
        for v in dom.cells() {
            if v == [0, 0] {
                continue;
            }
            if dom.cells().all(|x| self.value(add(x, v)) == self.value(x)) {
                gens.push(vec![v[0], v[1]]);
            }
        }
        if gens.len() == 2 {
            return self;
        }
        let h = crate::lattice::hnf(&linalg::transpose(&gens)).expect("small lattice");
        let b = &h.basis;
        let hh = [b[0][0], b[1][0], b[1][1]];
        let block = Shape::sized(2, [hh[0], hh[2]]).cells().map(|c| self.value(c)).collect();
        Periodic { dim: self.dim, h: hh, block }
    }

    /// `value'(x) = value(x − m)`.
    pub fn shifted(&self, m: Cell) -> Periodic {
        let block = Shape::sized(2, [self.h[0], self.h[2]]).cells().map(|c| self.value(sub(c, m))).collect();
        Periodic { dim: self.dim, h: self.h, block }
    }

    pub fn is_period(&self, v: Cell) -> bool {
        self.reduce(v) == [0, 0]
    }
}

/// One region `{x : a·x ≥ b for every (a, b)}` and the periodic pattern filling it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub constraints: Vec<(Cell, i64)>,
    pub filler: Periodic,
}

impl Region {
    pub fn contains(&self, x: Cell) -> bool {
        self.constraints.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] >= *b)
    }

    fn shifted(&self, m: Cell) -> Region {
        Region {
            constraints: self.constraints.iter().map(|(a, b)| (*a, b + a[0] * m[0] + a[1] * m[1])).collect(),
            filler: self.filler.shifted(m),
        }
    }

    /// Interval `[lo, hi]` of a 1-D region (`None` bounds are infinite); `None` if empty.
    fn interval(&self) -> Option<(Option<i64>, Option<i64>)> {
        let (mut lo, mut hi): (Option<i64>, Option<i64>) = (None, None);
        for (a, b) in &self.constraints {
            let a = a[0];
            match a.cmp(&0) {
                Ordering::Greater => {
                    let v = b.div_ceil(&a);
                    lo = Some(lo.map_or(v, |l| l.max(v)));
                }
                Ordering::Less => {
                    let v = b.div_floor(&a);
                    hi = Some(hi.map_or(v, |h| h.min(v)));
                }
                Ordering::Equal => {
                    if *b > 0 {
                        return None;
                    }
                }
            }
        }
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return None;
            }
        }
        Some((lo, hi))
    }
}

/// Half-space regions with periodic fillers; the regions partition `ℤ^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfSpaces {
    dim: u8,
    regions: Vec<Region>,
}

/// Window used to check the partition property of 2-D region lists.
pub const PARTITION_CHECK_RADIUS: i64 = 64;

impl HalfSpaces {
    pub fn new(dim: usize, regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(PatternError::InvalidSource("no regions".into()));
        }
        if regions.iter().any(|r| r.filler.dim() != dim) {
            return Err(PatternError::InvalidSource("filler dimension mismatch".into()));
        }
        let hs = HalfSpaces { dim: dim as u8, regions };
        if dim == 1 {
            hs.check_partition_1d()?;
        } else {
            let w = Shape::radius(PARTITION_CHECK_RADIUS, 2);
            for x in w.cells() {
                let n = hs.regions.iter().filter(|r| r.contains(x)).count();
                if n != 1 {
                    return Err(PatternError::InvalidSource(format!("cell {x:?} lies in {n} regions")));
                }
            }
        }
        Ok(hs)
    }

    fn check_partition_1d(&self) -> Result<()> {
        let mut ivs: Vec<(Option<i64>, Option<i64>)> = self.regions.iter().filter_map(Region::interval).collect();
        ivs.sort_by_key(|(l, _)| l.map_or(i128::MIN, |v| v as i128));
        let bad = |m: String| Err(PatternError::InvalidSource(m));
        if ivs.is_empty() || ivs[0].0.is_some() {
            return bad("regions do not cover the far left".into());
        }
        for w in ivs.windows(2) {
            match (w[0].1, w[1].0) {
                (Some(h), Some(l)) if l == h + 1 => {}
                _ => return bad("regions overlap or leave a gap".into()),
            }
        }
        if ivs.last().and_then(|iv| iv.1).is_some() {
            return bad("regions do not cover the far right".into());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn value(&self, x: Cell) -> Letter {
        self.regions.iter().find(|r| r.contains(x)).expect("regions partition the lattice").filler.value(x)
    }

    pub fn shifted(&self, m: Cell) -> HalfSpaces {
        HalfSpaces { dim: self.dim, regions: self.regions.iter().map(|r| r.shifted(m)).collect() }
    }

    /// 1-D regions sorted left to right as `(lo, hi, filler)`.
    pub fn intervals(&self) -> Vec<(Option<i64>, Option<i64>, &Periodic)> {
        let mut v: Vec<_> = self.regions.iter().filter_map(|r| r.interval().map(|(l, h)| (l, h, &r.filler))).collect();
        v.sort_by_key(|(l, _, _)| l.map_or(i128::MIN, |x| x as i128));
        v
    }
}

/// A substitutive pattern: the letter at `x` is entry `x − shift` of the seeded fixed point of `σ^power`.
#[derive(Clone, Debug)]
pub struct SubstSource {
    pub rule: Arc<Rule>,
    pub power: u32,
    pub seed: Seed,
    pub shift: Cell,
}

/// A pattern computed lazily by a local rule from another pattern.
#[derive(Clone, Debug)]
pub struct Derived {
    pub map: Arc<LocalRule>,
    pub inner: LatticePattern,
}

#[derive(Clone, Debug)]
pub enum Source {
    Periodic(Arc<Periodic>),
    Substitutive(Arc<SubstSource>),
    HalfSpaces(Arc<HalfSpaces>),
    Derived(Arc<Derived>),
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::Periodic(_) => "periodic",
            Source::Substitutive(_) => "substitutive",
            Source::HalfSpaces(_) => "half_spaces",
            Source::Derived(_) => "derived",
        }
    }

    pub fn value(&self, x: Cell) -> Letter {
        match self {
            Source::Periodic(p) => p.value(x),
            Source::Substitutive(s) => subst::address(&s.rule, &s.seed, s.power, sub(x, s.shift)),
            Source::HalfSpaces(h) => h.value(x),
            Source::Derived(d) => d.map.eval(&d.inner, x),
        }
    }

    /// The source of the pattern translated by the integer vector `m`.
    pub fn shifted(&self, m: Cell) -> Source {
        if m == [0, 0] {
            return self.clone();
        }
        match self {
            Source::Periodic(p) => Source::Periodic(Arc::new(p.shifted(m))),
            Source::Substitutive(s) => {
                Source::Substitutive(Arc::new(SubstSource { shift: add(s.shift, m), ..(**s).clone() }))
            }
            Source::HalfSpaces(h) => Source::HalfSpaces(Arc::new(h.shifted(m))),
            Source::Derived(d) => Source::Derived(Arc::new(Derived {
                map: d.map.clone(),
                inner: d.inner.shifted_int(m),
            })),
        }
    }
}

/// A pattern on `ℤ^d` placed at a rational phase.
#[derive(Clone, Debug)]
pub struct LatticePattern {
    dim: u8,
    alphabet: Arc<Alphabet>,
    source: Source,
    phase: Phase,
}

impl LatticePattern {
    pub fn new(dim: usize, alphabet: Arc<Alphabet>, source: Source, phase: Phase) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(PatternError::InvalidSource(format!("dimension {dim}")));
        }
        let ok = |r: &BigRational| !r.is_negative_or_ge_one();
        if !ok(&phase[0]) || !ok(&phase[1]) || (dim == 1 && !phase[1].is_zero()) {
            return Err(PatternError::InvalidSource("phase entries must lie in [0, 1)".into()));
        }
        match &source {
            Source::Periodic(p) if p.dim() != dim => return Err(PatternError::InvalidSource("dimension mismatch".into())),
            Source::HalfSpaces(h) if h.dim() != dim => {
                return Err(PatternError::InvalidSource("dimension mismatch".into()))
            }
            Source::Substitutive(s) if s.rule.dim() != dim => {
                return Err(PatternError::InvalidSource("dimension mismatch".into()))
            }
            _ => {}
        }
        Ok(LatticePattern { dim: dim as u8, alphabet, source, phase })
    }

    pub fn periodic(alphabet: Arc<Alphabet>, p: Periodic) -> Self {
        let dim = p.dim();
        LatticePattern { dim: dim as u8, alphabet, source: Source::Periodic(Arc::new(p)), phase: zero_phase() }
    }

    pub fn half_spaces(alphabet: Arc<Alphabet>, h: HalfSpaces) -> Self {
        let dim = h.dim();
        LatticePattern { dim: dim as u8, alphabet, source: Source::HalfSpaces(Arc::new(h)), phase: zero_phase() }
    }

    pub fn substitutive(rule: Arc<Rule>, power: u32, seed: Seed) -> Self {
        let dim = rule.dim();
        let alphabet = rule.alphabet_arc();
        LatticePattern {
            dim: dim as u8,
            alphabet,
            source: Source::Substitutive(Arc::new(SubstSource { rule, power, seed, shift: [0, 0] })),
            phase: zero_phase(),
        }
    }

    pub fn derived(map: Arc<LocalRule>, inner: LatticePattern) -> Self {
        let alphabet = map.output_alphabet_arc();
        LatticePattern {
            dim: inner.dim,
            alphabet,
            phase: inner.phase.clone(),
            source: Source::Derived(Arc::new(Derived { map, inner })),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_arc(&self) -> Arc<Alphabet> {
        self.alphabet.clone()
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn with_phase(&self, phase: Phase) -> Result<Self> {
        LatticePattern::new(self.dim(), self.alphabet.clone(), self.source.clone(), phase)
    }

    pub fn with_source(&self, source: Source) -> Self {
        LatticePattern { source, ..self.clone() }
    }

    pub(crate) fn shifted_int(&self, m: Cell) -> LatticePattern {
        LatticePattern { source: self.source.shifted(m), ..self.clone() }
    }

    pub fn value(&self, x: Cell) -> Letter {
        self.source.value(x)
    }

    /// The 1-D letters on `[lo, hi]`.
    pub fn word(&self, lo: i64, hi: i64) -> Vec<Letter> {
        (lo..=hi).map(|x| self.value([x, 0])).collect()
    }

    pub fn to_json(&self) -> Value {
        let d = self.dim();
        let phase: Vec<String> = self.phase[..d].iter().map(fmt_rat).collect();
        let source = match &self.source {
            Source::Periodic(p) => json!({
                "kind": "periodic",
                "lattice": p.lattice().iter().map(|c| c[..d].to_vec()).collect::<Vec<_>>(),
                "block": p.block().iter().map(|&l| self.alphabet.name(l)).collect::<Vec<_>>(),
            }),
            Source::Substitutive(s) => json!({
                "kind": "substitutive",
                "rule": s.rule.name(),
                "power": s.power,
                "seed": s.seed.to_json(&self.alphabet, d),
                "shift": s.shift[..d].to_vec(),
            }),
            Source::HalfSpaces(h) => json!({
                "kind": "half_spaces",
                "regions": h.regions().iter().map(|r| json!({
                    "constraints": r.constraints.iter().map(|(a, b)| json!({"a": a[..d].to_vec(), "b": b})).collect::<Vec<_>>(),
                    "filler_lattice": r.filler.lattice().iter().map(|c| c[..d].to_vec()).collect::<Vec<_>>(),
                    "filler_block": r.filler.block().iter().map(|&l| self.alphabet.name(l)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }),
            Source::Derived(dv) => json!({
                "kind": "derived",
                "radius": dv.map.radius(),
                "inner": dv.inner.to_json(),
            }),
        };
        json!({ "phase": phase, "source": source })
    }
}

trait PhaseRange {
    fn is_negative_or_ge_one(&self) -> bool;
}

impl PhaseRange for BigRational {
    fn is_negative_or_ge_one(&self) -> bool {
        *self < BigRational::zero() || *self >= BigRational::from_integer(BigInt::from(1))
    }
}

pub fn value_at(p: &LatticePattern, x: Cell) -> Letter {
    p.value(x)
}

pub fn extract_patch(p: &LatticePattern, x: Cell, shape: Shape) -> Patch {
    if let Source::Substitutive(s) = p.source() {
        let lo = sub(add(x, shape.lo()), s.shift);
        if let Some(values) = subst::address_box(&s.rule, &s.seed, s.power, lo, shape.size()) {
            return Patch { shape, anchor: x, values };
        }
    }
    Patch::from_fn(shape, x, |u| p.value(add(x, u)))
}

/// `P + t`: the integer part of `phase + t` moves the source, the fractional part becomes the phase.
pub fn pattern_translate(p: &LatticePattern, t: &[BigRational]) -> LatticePattern {
    let d = p.dim();
    let mut m = [0i64; 2];
    let mut phase = zero_phase();
    for i in 0..d {
        let s = &p.phase[i] + &t[i];
        m[i] = rat_floor(&s);
        phase[i] = rat_frac(&s);
    }
    LatticePattern { source: p.source.shifted(m), phase, ..p.clone() }
}

pub fn pattern_translate_int(p: &LatticePattern, z: Cell) -> LatticePattern {
    p.shifted_int(if p.dim() == 1 { [z[0], 0] } else { z })
}

/// Outcome of comparing two infinite patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equality {
    Certified(bool),
    /// Agreement observed on the window of the given radius only.
    Uncertified { value: bool, window: i64 },
}

impl Equality {
    pub fn value(&self) -> bool {
        match self {
            Equality::Certified(v) | Equality::Uncertified { value: v, .. } => *v,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Equality::Certified(_))
    }
}

pub const DEFAULT_EQUALITY_WINDOW: i64 = 64;

/// 1-D eventually periodic normal form: left periodic tail, explicit middle, right periodic tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ep1 {
    Periodic(Periodic),
    Eventual {
        left: Periodic,
        /// First cell differing from the left tail.
        lo: i64,
        /// Last cell differing from the right tail.
        hi: i64,
        middle: Vec<Letter>,
        right: Periodic,
    },
}

impl Ep1 {
    /// Canonical form of `value`, which must agree with `left` below `lo0` and with `right` above `hi0`.
    pub fn canonical(left: &Periodic, right: &Periodic, lo0: i64, hi0: i64, value: impl Fn(i64) -> Letter) -> Ep1 {
        let pad = left.det() + right.det() + 2;
        let (wlo, whi) = (lo0.min(hi0) - pad, lo0.max(hi0) + pad);
        let lo = (wlo..=whi).find(|&x| value(x) != left.value([x, 0]));
        let Some(lo) = lo else {
            return Ep1::Periodic(left.clone());
        };
        let hi = (wlo..=whi).rev().find(|&x| value(x) != right.value([x, 0])).expect("tails differ");
        let middle = if hi >= lo { (lo..=hi).map(&value).collect() } else { Vec::new() };
        Ep1::Eventual { left: left.clone(), lo, hi, middle, right: right.clone() }
    }

    pub fn value(&self, x: i64) -> Letter {
        match self {
            Ep1::Periodic(p) => p.value([x, 0]),
            Ep1::Eventual { left, lo, hi, middle, right } => {
                if x < *lo {
                    left.value([x, 0])
                } else if x > *hi {
                    right.value([x, 0])
                } else {
                    middle[(x - lo) as usize]
                }
            }
        }
    }

    /// Cells outside `[lo, hi]` follow the tails.
    pub fn core(&self) -> Option<(i64, i64)> {
        match self {
            Ep1::Periodic(_) => None,
            Ep1::Eventual { lo, hi, .. } => Some((*lo, *hi)),
        }
    }

    pub fn to_source(&self) -> Source {
        match self {
            Ep1::Periodic(p) => Source::Periodic(Arc::new(p.clone())),
            Ep1::Eventual { left, lo, hi, middle, right } => {
                let mut regions = vec![Region { constraints: vec![([-1, 0], 1 - lo)], filler: left.clone() }];
                if hi >= lo {
                    let n = middle.len() as i64;
                    let lo = *lo;
                    let filler = Periodic::from_fn(1, &[[n, 0]], |c| middle[(c[0] - lo).rem_euclid(n) as usize])
                        .expect("nonempty middle");
                    regions.push(Region { constraints: vec![([1, 0], lo), ([-1, 0], -hi)], filler });
                    regions.push(Region { constraints: vec![([1, 0], hi + 1)], filler: right.clone() });
                } else {
                    regions.push(Region { constraints: vec![([1, 0], *lo)], filler: right.clone() });
                }
                Source::HalfSpaces(Arc::new(HalfSpaces::new(1, regions).expect("intervals partition the line")))
            }
        }
    }
}

/// The eventually periodic normal form of a 1-D periodic or half-space pattern.
pub fn ep1_form(p: &LatticePattern) -> Option<Ep1> {
    if p.dim() != 1 {
        return None;
    }
    match p.source() {
        Source::Periodic(q) => Some(Ep1::Periodic((**q).clone())),
        Source::HalfSpaces(h) => {
            let iv = h.intervals();
            let left = iv.first()?.2;
            let right = iv.last()?.2;
            let bounds: Vec<i64> = iv.iter().flat_map(|(l, r, _)| [*l, *r]).flatten().collect();
            let (lo0, hi0) = match (bounds.iter().min(), bounds.iter().max()) {
                (Some(&a), Some(&b)) => (a, b),
                _ => (0, 0),
            };
            Some(Ep1::canonical(left, right, lo0, hi0, |x| h.value([x, 0])))
        }
        _ => None,
    }
}

fn periodic_equal(a: &Periodic, b: &Periodic) -> bool {
    a == b
}

/// Searches the window of radius `r` for a cell where the patterns differ.
pub fn find_difference(p: &LatticePattern, q: &LatticePattern, r: i64) -> Option<Cell> {
    let w = Shape::radius(r, p.dim());
    let a = extract_patch(p, [0, 0], w);
    let b = extract_patch(q, [0, 0], w);
    let found = w.cells().find(|&c| a.get(c) != b.get(c));
    found
}

pub fn pattern_equal(p: &LatticePattern, q: &LatticePattern) -> Equality {
    pattern_equal_with(p, q, DEFAULT_EQUALITY_WINDOW)
}

pub fn pattern_equal_with(p: &LatticePattern, q: &LatticePattern, window: i64) -> Equality {
    if p.dim() != q.dim() || p.phase != q.phase || p.alphabet != q.alphabet {
        return Equality::Certified(false);
    }
    if let (Source::Periodic(a), Source::Periodic(b)) = (p.source(), q.source()) {
        return Equality::Certified(periodic_equal(a, b));
    }
    if let (Some(a), Some(b)) = (ep1_form(p), ep1_form(q)) {
        return Equality::Certified(a == b);
    }
    if let (Source::Substitutive(a), Source::Substitutive(b)) = (p.source(), q.source()) {
        if Arc::ptr_eq(&a.rule, &b.rule) || a.rule.name() == b.rule.name() {
            if a.power == b.power && a.seed == b.seed && a.shift == b.shift {
                return Equality::Certified(true);
            }
        }
    }
    if find_difference(p, q, window).is_some() {
        return Equality::Certified(false);
    }
    if let (Source::Substitutive(a), Source::Substitutive(b)) = (p.source(), q.source()) {
        if a.rule.name() == b.rule.name() && a.power == b.power && a.seed == b.seed {
            let u: Vec<BigRational> =
                (0..p.dim()).map(|i| BigRational::from_integer(BigInt::from(b.shift[i] - a.shift[i]))).collect();
            if let crate::recog::PeriodVerdict::Certified { is_period: true, .. } =
                crate::recog::certify_period(p, &u, [0, 0])
            {
                return Equality::Certified(true);
            }
        }
    }
    Equality::Uncertified { value: true, window }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::rat;

    fn ab() -> Arc<Alphabet> {
        Arc::new(Alphabet::new(["a", "b", "c"]).unwrap())
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        let a = Alphabet::new(["S1", "S2", "A"]).unwrap();
        assert_eq!(a.render(&[0, 2, 1]), "S1 A S2");
        assert_eq!(a.parse_word("S1 A S2").unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn restrict_and_shift() {
        let p = Patch::new(Shape::line(-2, 2), [0, 0], vec![0, 1, 2, 1, 0]).unwrap();
        let r = patch_restrict(&p, Shape::radius(1, 1)).unwrap();
        assert_eq!(r.values(), &[1, 2, 1]);
        assert_eq!(patch_restrict(&p, p.shape()).unwrap(), p);
        assert_eq!(patch_restrict(&p, Shape::line(-3, 0)), Err(PatternError::SubShapeNotContained));
        let q = Patch::new(Shape::line(-1, 1), [0, 0], vec![0, 1, 2]).unwrap();
        let s = patch_shift(&q, [1, 0]);
        assert_eq!(s.shape(), Shape::line(-2, 0));
        assert_eq!(s.values(), &[0, 1, 2]);
        assert_eq!(patch_shift(&q, [0, 0]), q);
    }

    #[test]
    fn transform_round_trip() {
        let p = Patch::new(Shape::line(0, 1), [0, 0], vec![0, 1]).unwrap();
        let t = patch_transform(&p, &[vec![2]]).unwrap();
        assert_eq!(t.cells.keys().copied().collect::<Vec<_>>(), vec![[0, 0], [2, 0]]);
        let back = patch_untransform(&t, &[vec![2]]).unwrap().to_patch().unwrap();
        assert_eq!(back, p);
        assert_eq!(patch_transform(&p, &[vec![0]]), Err(PatternError::NonInvertibleMatrix));
    }

    #[test]
    fn periodic_is_normalized() {
        let p = Periodic::word(&[0, 1, 0, 1]).unwrap();
        assert_eq!(p.lattice(), vec![[2, 0]]);
        let q = Periodic::word(&[1, 0]).unwrap().shifted([1, 0]);
        assert_eq!(p, q);
        let t = Periodic::tile(&Patch::new(Shape::rect([0, 0], [1, 1]), [0, 0], vec![0, 1, 1, 0]).unwrap()).unwrap();
        // checkerboard: period lattice generated by (1,1) and (2,0)
        assert_eq!(t.det(), 2);
        assert!(t.is_period([1, 1]));
        assert!(!t.is_period([1, 0]));
    }

    #[test]
    fn translation_bookkeeping() {
        let all_a = LatticePattern::periodic(ab(), Periodic::constant(1, 0));
        let t = pattern_translate(&all_a, &[rat(1, 5), rat(0, 1)]);
        assert_eq!(t.phase()[0], rat(1, 5));
        assert_eq!(pattern_equal(&all_a, &t), Equality::Certified(false));
        let back = pattern_translate(&t, &[rat(-1, 5), rat(0, 1)]);
        assert_eq!(pattern_equal(&all_a, &back), Equality::Certified(true));
        let shifted = pattern_translate(&all_a, &[rat(7, 1), rat(0, 1)]);
        assert_eq!(pattern_equal(&all_a, &shifted), Equality::Certified(true));
    }

    fn half_and_half() -> LatticePattern {
        let w = Periodic::constant(1, 0);
        let b = Periodic::constant(1, 1);
        let hs = HalfSpaces::new(
            1,
            vec![
                Region { constraints: vec![([-1, 0], 1)], filler: w },
                Region { constraints: vec![([1, 0], 0)], filler: b },
            ],
        )
        .unwrap();
        LatticePattern::half_spaces(ab(), hs)
    }

    #[test]
    fn half_spaces_and_ep1() {
        let t = half_and_half();
        let p = extract_patch(&t, [0, 0], Shape::radius(1, 1));
        assert_eq!(p.values(), &[0, 1, 1]);
        let e = ep1_form(&t).unwrap();
        assert_eq!(e.core(), Some((0, -1)));
        let moved = pattern_translate_int(&t, [3, 0]);
        assert_eq!(pattern_equal(&t, &moved), Equality::Certified(false));
        assert_eq!(pattern_equal(&moved, &pattern_translate_int(&moved, [0, 0])), Equality::Certified(true));
        let rebuilt = t.with_source(e.to_source());
        assert_eq!(pattern_equal(&t, &rebuilt), Equality::Certified(true));
        // overlapping regions are rejected
        let bad = HalfSpaces::new(
            1,
            vec![
                Region { constraints: vec![([-1, 0], 0)], filler: Periodic::constant(1, 0) },
                Region { constraints: vec![([1, 0], 0)], filler: Periodic::constant(1, 1) },
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn ep1_detects_periodicity() {
        let w = Periodic::word(&[0, 1]).unwrap();
        let hs = HalfSpaces::new(
            1,
            vec![
                Region { constraints: vec![([-1, 0], -3)], filler: w.clone() },
                Region { constraints: vec![([1, 0], 4)], filler: w.shifted([2, 0]) },
            ],
        )
        .unwrap();
        let p = LatticePattern::half_spaces(ab(), hs);
        assert_eq!(ep1_form(&p), Some(Ep1::Periodic(w.clone())));
        let q = LatticePattern::periodic(ab(), w);
        assert_eq!(pattern_equal(&p, &q), Equality::Certified(true));
    }

    #[test]
    fn patch_json_round_trip() {
        let a = ab();
        let p = Patch::new(Shape::rect([-1, 0], [0, 1]), [0, 0], vec![0, 1, 2, 0]).unwrap();
        let j = p.to_json(&a);
        assert_eq!(j["shape"]["lo"], json!([-1, 0]));
        assert_eq!(Patch::from_json(&j, &a).unwrap(), p);
    }

    #[test]
    fn glue_needs_agreement() {
        let p = Patch::new(Shape::line(-2, 0), [0, 0], vec![0, 1, 2]).unwrap();
        let q = Patch::new(Shape::line(0, 2), [0, 0], vec![2, 1, 0]).unwrap();
        let g = patch_glue(&SparsePatch::from_patch(&p), &SparsePatch::from_patch(&q)).unwrap();
        assert_eq!(g.to_patch().unwrap().values(), &[0, 1, 2, 1, 0]);
        let r = Patch::new(Shape::line(0, 1), [0, 0], vec![1, 1]).unwrap();
        assert!(patch_glue(&SparsePatch::from_patch(&p), &SparsePatch::from_patch(&r)).is_err());
    }
}
