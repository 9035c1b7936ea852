//! Local derivation maps: finite-radius lookup tables on legal patches.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::patterns::{
    extract_patch, Alphabet, Cell, LatticePattern, Letter, Patch, PatternError, Shape,
};
use crate::subst::{substitute_patch, windows_of, Language, Rule, SubstError};

/// Fallback window for coverage checks when the hull language is not available.
pub const COVERAGE_WINDOW: i64 = 64;

/// Default radius cap for inverse searches.
pub const DEFAULT_INVERSE_CAP: i64 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LdError {
    #[error("patch {0} is outside the declared language")]
    PatchOutsideDeclaredLanguage(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("invalid local rule: {0}")]
    Invalid(String),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// A sliding-block map: the output letter at `x` is `table[P[x, B_c]]`.
#[derive(Clone, PartialEq, Eq)]
pub struct LocalRule {
    dim: usize,
    radius: i64,
    input: Arc<Alphabet>,
    output: Arc<Alphabet>,
    table: BTreeMap<Vec<Letter>, Letter>,
}

impl fmt::Debug for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalRule")
            .field("dim", &self.dim)
            .field("radius", &self.radius)
            .field("entries", &self.table.len())
            .finish()
    }
}

impl LocalRule {
    pub fn new(
        dim: usize,
        radius: i64,
        input: Arc<Alphabet>,
        output: Arc<Alphabet>,
        table: BTreeMap<Vec<Letter>, Letter>,
    ) -> Result<Self, LdError> {
        if dim != 1 && dim != 2 {
            return Err(LdError::Invalid(format!("dimension {dim}")));
        }
        if radius < 0 {
            return Err(LdError::Invalid("negative radius".into()));
        }
        let cells = Shape::radius(radius, dim).len();
        for (k, v) in &table {
            if k.len() != cells || k.iter().any(|&l| l as usize >= input.len()) || *v as usize >= output.len() {
                return Err(LdError::Invalid("table entry does not fit the radius or alphabets".into()));
            }
        }
        Ok(LocalRule { dim, radius, input, output, table })
    }

    /// Tabulates `f` on the given radius-`radius` patches.
    pub fn from_fn(
        dim: usize,
        radius: i64,
        input: Arc<Alphabet>,
        output: Arc<Alphabet>,
        patches: impl IntoIterator<Item = Patch>,
        f: impl Fn(&Patch) -> Letter,
    ) -> Result<Self, LdError> {
        let shape = Shape::radius(radius, dim);
        let mut table = BTreeMap::new();
        for p in patches {
            let p = Patch::new(shape, [0, 0], p.into_values())?;
            let v = f(&p);
            table.insert(p.into_values(), v);
        }
        LocalRule::new(dim, radius, input, output, table)
    }

    /// Tabulates `f` on every radius-`radius` patch over the input alphabet.
    pub fn total(
        dim: usize,
        radius: i64,
        input: Arc<Alphabet>,
        output: Arc<Alphabet>,
        f: impl Fn(&Patch) -> Letter,
    ) -> Result<Self, LdError> {
        let shape = Shape::radius(radius, dim);
        let n = input.len();
        let cells = shape.len();
        let count = (n as u128).checked_pow(cells as u32).filter(|&c| c <= 1 << 22);
        let count = count.ok_or_else(|| LdError::Invalid("total table is too large".into()))?;
        let patches = (0..count).map(|mut i| {
            let mut v = vec![0 as Letter; cells];
            for slot in v.iter_mut().rev() {
                *slot = (i % n as u128) as Letter;
                i /= n as u128;
            }
            Patch::new(shape, [0, 0], v).expect("sized")
        });
        LocalRule::from_fn(dim, radius, input, output, patches, f)
    }

    pub fn identity(dim: usize, alphabet: Arc<Alphabet>) -> Self {
        let table = alphabet.iter().map(|a| (vec![a], a)).collect();
        LocalRule { dim, radius: 0, input: alphabet.clone(), output: alphabet, table }
    }

    /// Radius-0 letter map.
    pub fn relabel(dim: usize, input: Arc<Alphabet>, output: Arc<Alphabet>, map: &[Letter]) -> Result<Self, LdError> {
        if map.len() != input.len() {
            return Err(LdError::Invalid("relabeling must give one image per letter".into()));
        }
        let table = input.iter().map(|a| (vec![a], map[a as usize])).collect();
        LocalRule::new(dim, 0, input, output, table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn input_alphabet(&self) -> &Arc<Alphabet> {
        &self.input
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output
    }

    pub fn output_alphabet_arc(&self) -> Arc<Alphabet> {
        self.output.clone()
    }

    pub fn table(&self) -> &BTreeMap<Vec<Letter>, Letter> {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn shape(&self) -> Shape {
        Shape::radius(self.radius, self.dim)
    }

    pub fn lookup(&self, p: &[Letter]) -> Option<Letter> {
        self.table.get(p).copied()
    }

    /// `(fP)[x]`. Panics if `P[x, B_c]` is outside the table; [`apply`] checks coverage first.
    pub fn eval(&self, p: &LatticePattern, x: Cell) -> Letter {
        let w = extract_patch(p, x, self.shape());
        match self.lookup(w.values()) {
            Some(l) => l,
            None => panic!("local rule applied outside its declared language at {x:?}"),
        }
    }

    /// Image of a patch on the box shrunk by the radius.
    pub fn image_of_patch(&self, p: &Patch) -> Result<Patch, LdError> {
        let inner = p.shape().grow(-self.radius).ok_or_else(|| LdError::Invalid("patch smaller than the rule".into()))?;
        let r = self.shape();
        let mut values = Vec::with_capacity(inner.len());
        for c in inner.cells() {
            let w: Vec<Letter> = r.cells().map(|u| p.get([c[0] + u[0], c[1] + u[1]]).expect("inside")).collect();
            match self.lookup(&w) {
                Some(l) => values.push(l),
                None => {
                    let wp = Patch::new(r, [0, 0], w)?;
                    return Err(LdError::PatchOutsideDeclaredLanguage(wp.to_json(&self.input).to_string()));
                }
            }
        }
        Ok(Patch::new(inner, p.anchor(), values)?)
    }

    pub fn to_json(&self) -> Value {
        let shape = self.shape();
        json!({
            "radius": self.radius,
            "dim": self.dim,
            "input_alphabet": self.input.letters(),
            "output_alphabet": self.output.letters(),
            "table": self.table.iter().map(|(k, v)| json!({
                "patch": Patch::new(shape, [0, 0], k.clone()).expect("sized").to_json(&self.input),
                "output": self.output.name(*v),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `fP`, after checking that every radius-`c` patch of `P` is in the table.
pub fn apply(f: &Arc<LocalRule>, p: &LatticePattern) -> Result<LatticePattern, LdError> {
    if p.dim() != f.dim || *p.alphabet() != *f.input {
        return Err(LdError::AlphabetMismatch("pattern does not match the rule's input".into()));
    }
    let size = f.shape().size();
    let windows: Vec<Vec<Letter>> = match Language::hull(p.clone()).entry(size) {
        Ok(e) => e.patches.iter().cloned().collect(),
        Err(_) => {
            let w = Shape::radius(COVERAGE_WINDOW + f.radius, f.dim);
            windows_of(&extract_patch(p, [0, 0], w), size)
        }
    };
    for w in windows {
        if f.lookup(&w).is_none() {
            let wp = Patch::new(f.shape(), [0, 0], w)?;
            return Err(LdError::PatchOutsideDeclaredLanguage(wp.to_json(&f.input).to_string()));
        }
    }
    Ok(LatticePattern::derived(f.clone(), p.clone()))
}

/// Every box of side `side` whose radius-`radius` windows all lie in `allowed`.
fn extend_boxes(dim: usize, alphabet: usize, side: i64, radius: i64, allowed: &BTreeSet<Vec<Letter>>) -> Vec<Vec<Letter>> {
    let size = if dim == 1 { [side, 1] } else { [side, side] };
    let w = 2 * radius + 1;
    let wsize = if dim == 1 { [w, 1] } else { [w, w] };
    let cells = (size[0] * size[1]) as usize;
    let mut out = Vec::new();
    let mut cur = vec![0 as Letter; cells];
    fn rec(
        i: usize,
        cur: &mut Vec<Letter>,
        size: [i64; 2],
        wsize: [i64; 2],
        alphabet: usize,
        allowed: &BTreeSet<Vec<Letter>>,
        out: &mut Vec<Vec<Letter>>,
    ) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        let (r, c) = (i as i64 / size[1], i as i64 % size[1]);
        for a in 0..alphabet as Letter {
            cur[i] = a;
            // the window whose last cell is (r, c)
            let (r0, c0) = (r - wsize[0] + 1, c - wsize[1] + 1);
            let ok = if r0 >= 0 && c0 >= 0 {
                let mut win = Vec::with_capacity((wsize[0] * wsize[1]) as usize);
                for a0 in 0..wsize[0] {
                    for a1 in 0..wsize[1] {
                        win.push(cur[((r0 + a0) * size[1] + c0 + a1) as usize]);
                    }
                }
                allowed.contains(&win)
            } else {
                true
            };
            if ok {
                rec(i + 1, cur, size, wsize, alphabet, allowed, out);
            }
        }
    }
    rec(0, &mut cur, size, wsize, alphabet, allowed, &mut out);
    out
}

/// `g ∘ f` with radius `c_f + c_g`, tabulated on every box whose windows lie in `f`'s table
/// and whose `f`-image lies in `g`'s table.
pub fn compose(f: &LocalRule, g: &LocalRule) -> Result<LocalRule, LdError> {
    if f.dim != g.dim || *f.output != *g.input {
        return Err(LdError::AlphabetMismatch("output of the first rule must be the input of the second".into()));
    }
    let radius = f.radius + g.radius;
    let allowed: BTreeSet<Vec<Letter>> = f.table.keys().cloned().collect();
    let boxes = extend_boxes(f.dim, f.input.len(), 2 * radius + 1, f.radius, &allowed);
    let shape = Shape::radius(radius, f.dim);
    let mut table = BTreeMap::new();
    for b in boxes {
        let p = Patch::new(shape, [0, 0], b)?;
        let mid = f.image_of_patch(&p)?;
        if let Some(l) = g.lookup(mid.values()) {
            table.insert(p.into_values(), l);
        }
    }
    LocalRule::new(f.dim, radius, f.input.clone(), g.output.clone(), table)
}

/// The alphabet of letter-offset pairs `a@j` used for inflated patterns.
pub fn pair_alphabet(base: &Alphabet, k: [i64; 2], dim: usize) -> Result<Arc<Alphabet>, LdError> {
    let offs = Shape::sized(dim, k);
    let mut names = Vec::new();
    for a in base.iter() {
        for j in offs.cells() {
            names.push(if dim == 1 {
                format!("{}@{}", base.name(a), j[0])
            } else {
                format!("{}@{},{}", base.name(a), j[0], j[1])
            });
        }
    }
    Ok(Arc::new(Alphabet::new(names)?))
}

fn pair_letter(k: [i64; 2], a: Letter, j: Cell) -> Letter {
    (a as i64 * k[0] * k[1] + j[0] * k[1] + j[1]) as Letter
}

/// `L·p` for `L = diag(k)`: cell `k∘x + j` carries `(p[x], j)`.
pub fn inflate_patch(p: &Patch, k: [i64; 2]) -> Patch {
    let k = if p.dim() == 1 { [k[0], 1] } else { k };
    let s = p.shape();
    let lo = [s.lo()[0] * k[0], s.lo()[1] * k[1]];
    let hi = [(s.hi()[0] + 1) * k[0] - 1, (s.hi()[1] + 1) * k[1] - 1];
    let shape = Shape::new(p.dim(), lo, hi).expect("nonempty");
    Patch::from_fn(shape, [p.anchor()[0] * k[0], p.anchor()[1] * k[1]], |y| {
        let x = [y[0].div_euclid(k[0]), y[1].div_euclid(k[1])];
        let j = [y[0].rem_euclid(k[0]), y[1].rem_euclid(k[1])];
        pair_letter(k, p.get(x).expect("inside"), j)
    })
}

/// Word-rule inflation: the cells of `σ(p)` labelled by `(p[x], position in σ(p[x]))`.
pub fn inflate_patch_word(rule: &Rule, p: &Patch, pairs: &Alphabet) -> Patch {
    let img = substitute_patch(rule, p);
    let mut vals = Vec::with_capacity(img.values().len());
    for &a in p.values() {
        for j in 0..rule.image(a).len() {
            let name = format!("{}@{}", rule.alphabet().name(a), j);
            vals.push(pairs.index(&name).expect("pair letter"));
        }
    }
    Patch::new(img.shape(), img.anchor(), vals).expect("same shape")
}

/// `f_L = L ∘ f ∘ L⁻¹` on inflated patterns, for `L = diag(k)`; radius `k·c` per axis (the max).
pub fn distort(f: &LocalRule, k: [i64; 2]) -> Result<LocalRule, LdError> {
    let k = if f.dim == 1 { [k[0], 1] } else { k };
    if k[0] < 1 || k[1] < 1 {
        return Err(LdError::Invalid("inflation factors must be positive".into()));
    }
    let input = pair_alphabet(&f.input, k, f.dim)?;
    let output = pair_alphabet(&f.output, k, f.dim)?;
    let radius = f.radius * k[0].max(k[1]);
    let shape = Shape::radius(radius, f.dim);
    let mut table = BTreeMap::new();
    for (key, &v) in &f.table {
        let p = Patch::new(f.shape(), [0, 0], key.clone())?;
        let big = inflate_patch(&p, k);
        for j in Shape::sized(f.dim, k).cells() {
            // the cell k∘0 + j and its radius-kc neighbourhood inside the inflated patch
            let w: Option<Vec<Letter>> = shape.cells().map(|u| big.get([j[0] + u[0], j[1] + u[1]])).collect();
            if let Some(w) = w {
                table.insert(w, pair_letter(k, v, j));
            }
        }
    }
    LocalRule::new(f.dim, radius, input, output, table)
}

/// Local surjectivity of the subdivision: which legal patches are windows of `σ(legal)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurjectivityReport {
    pub radius: i64,
    pub checked: usize,
    pub uncovered: Vec<Vec<Letter>>,
}

impl SurjectivityReport {
    pub fn holds(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// The subdivision map `S : LΩ → Ω` as a radius-0 rule on letter-offset pairs, with `σ = S ∘ L`.
#[derive(Clone, Debug)]
pub struct Subdivision {
    pub rule: Arc<LocalRule>,
    pub pairs: Arc<Alphabet>,
    pub surjectivity: SurjectivityReport,
}

pub fn subdivision_as_ld(rule: &Arc<Rule>, lang: &Language, check_radius: i64) -> Result<Subdivision, LdError> {
    let dim = rule.dim();
    let (pairs, table) = match rule.constant_shape() {
        Some(k) => {
            let pairs = pair_alphabet(rule.alphabet(), k, dim)?;
            let mut t = BTreeMap::new();
            for a in rule.alphabet().iter() {
                for j in Shape::sized(dim, k).cells() {
                    t.insert(vec![pair_letter(k, a, j)], rule.image(a)[(j[0] * k[1] + j[1]) as usize]);
                }
            }
            (pairs, t)
        }
        None => {
            let mut names = Vec::new();
            let mut t = BTreeMap::new();
            for a in rule.alphabet().iter() {
                for (j, &b) in rule.image(a).iter().enumerate() {
                    t.insert(vec![names.len() as Letter], b);
                    names.push(format!("{}@{}", rule.alphabet().name(a), j));
                }
            }
            (Arc::new(Alphabet::new(names)?), t)
        }
    };
    let ld = Arc::new(LocalRule::new(dim, 0, pairs.clone(), rule.alphabet_arc(), table)?);
    let surjectivity = local_surjectivity(rule, lang, check_radius)?;
    Ok(Subdivision { rule: ld, pairs, surjectivity })
}

/// Legal patches of side `side` needed so that their substitutes cover every window of `size`.
fn covering_side(rule: &Rule, size: i64) -> i64 {
    let min_len = match rule.constant_shape() {
        Some(k) => k[0].min(if rule.dim() == 2 { k[1] } else { k[0] }),
        None => rule.alphabet().iter().map(|a| rule.image(a).len() as i64).min().unwrap_or(1),
    };
    (size - 1 + min_len - 1) / min_len + 1
}

pub fn local_surjectivity(rule: &Rule, lang: &Language, r: i64) -> Result<SurjectivityReport, LdError> {
    let dim = rule.dim();
    let side = 2 * r + 1;
    let size = if dim == 1 { [side, 1] } else { [side, side] };
    let target = lang.entry(size)?;
    let qs = covering_side(rule, side);
    let qsize = if dim == 1 { [qs, 1] } else { [qs, qs] };
    let sources = lang.entry(qsize)?;
    let mut covered = BTreeSet::new();
    for q in sources.to_patches() {
        covered.extend(windows_of(&substitute_patch(rule, &q), size));
    }
    let uncovered = target.patches.iter().filter(|p| !covered.contains(*p)).cloned().collect();
    Ok(SurjectivityReport { radius: r, checked: target.len(), uncovered })
}

/// Legal radius-`r` patches of the inflated space `LΩ`, in the pair alphabet.
pub fn inflated_language(rule: &Rule, lang: &Language, pairs: &Alphabet, r: i64) -> Result<Vec<Patch>, LdError> {
    let dim = rule.dim();
    let side = 2 * r + 1;
    let size = if dim == 1 { [side, 1] } else { [side, side] };
    let qs = covering_side(rule, side);
    let qsize = if dim == 1 { [qs, 1] } else { [qs, qs] };
    let mut out = BTreeSet::new();
    for q in lang.entry(qsize)?.to_patches() {
        let big = match rule.constant_shape() {
            Some(k) => inflate_patch(&q, k),
            None => inflate_patch_word(rule, &q, pairs),
        };
        out.extend(windows_of(&big, size));
    }
    let shape = Shape::radius(r, dim);
    Ok(out.into_iter().map(|v| Patch::new(shape, [0, 0], v).expect("sized")).collect())
}

#[derive(Clone, Debug)]
pub enum InverseResult {
    Found(LocalRule),
    /// Two legal inputs whose images agree on radius `cap` but whose centre letters differ.
    NoInverseUpToCap { cap: i64, witness: (Patch, Patch) },
}

/// Searches radii `0..=cap` for `g` with `g((fP)[x, B_r]) = P[x]`; `domain(r)` lists the legal
/// input patches of radius `r`.
pub fn find_inverse_rule(
    f: &LocalRule,
    domain: &dyn Fn(i64) -> Result<Vec<Patch>, LdError>,
    cap: i64,
) -> Result<InverseResult, LdError> {
    let mut witness = None;
    for r in 0..=cap {
        let inputs = domain(r + f.radius)?;
        let mut table: BTreeMap<Vec<Letter>, (Letter, Patch)> = BTreeMap::new();
        let mut clash = None;
        for p in inputs {
            let img = f.image_of_patch(&p)?;
            let centre = p.get([0, 0]).expect("centred");
            match table.get(img.values()) {
                Some((l, q)) if *l != centre => {
                    clash = Some((q.clone(), p.clone()));
                    break;
                }
                Some(_) => {}
                None => {
                    table.insert(img.into_values(), (centre, p));
                }
            }
        }
        match clash {
            Some(w) => witness = Some(w),
            None => {
                let t = table.into_iter().map(|(k, (l, _))| (k, l)).collect();
                return Ok(InverseResult::Found(LocalRule::new(
                    f.dim,
                    r,
                    f.output.clone(),
                    f.input.clone(),
                    t,
                )?));
            }
        }
    }
    Ok(InverseResult::NoInverseUpToCap { cap, witness: witness.expect("cap ≥ 0 runs at least once") })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{pattern_translate_int, Periodic};
    use crate::subst::Seed;

    fn tm_xor() -> (Arc<Rule>, LocalRule) {
        let tm = Rule::builtin("thue_morse").unwrap();
        let out = Arc::new(Alphabet::new(["e", "u"]).unwrap());
        let f = LocalRule::total(1, 1, tm.alphabet_arc(), out, |p| {
            let v = p.values();
            Letter::from(v[0] != v[2])
        })
        .unwrap();
        (tm, f)
    }

    #[test]
    fn apply_matches_windows() {
        let (tm, f) = tm_xor();
        let p = LatticePattern::substitutive(tm.clone(), 2, Seed::Corner { letters: vec![0, 0] });
        let fp = apply(&Arc::new(f.clone()), &p).unwrap();
        for x in -50..=50 {
            let expect = Letter::from(p.value([x - 1, 0]) != p.value([x + 1, 0]));
            assert_eq!(fp.value([x, 0]), expect);
        }
        let moved = apply(&Arc::new(f), &pattern_translate_int(&p, [3, 0])).unwrap();
        for x in -20..20 {
            assert_eq!(moved.value([x, 0]), fp.value([x - 3, 0]));
        }
    }

    #[test]
    fn apply_rejects_uncovered_patches() {
        let a = Arc::new(Alphabet::new(["w", "b"]).unwrap());
        let f = LocalRule::relabel(1, a.clone(), a.clone(), &[1, 1]).unwrap();
        let mut t = f.table.clone();
        t.remove(&vec![1]);
        let partial = Arc::new(LocalRule::new(1, 0, a.clone(), a.clone(), t).unwrap());
        let all_b = LatticePattern::periodic(a.clone(), Periodic::constant(1, 1));
        assert!(matches!(apply(&partial, &all_b), Err(LdError::PatchOutsideDeclaredLanguage(_))));
        let all_w = LatticePattern::periodic(a, Periodic::constant(1, 0));
        let img = apply(&Arc::new(f), &all_w).unwrap();
        assert_eq!(img.value([5, 0]), 1);
    }

    #[test]
    fn compose_radius_and_extension() {
        let (tm, f) = tm_xor();
        let id = LocalRule::identity(1, tm.alphabet_arc());
        let c = compose(&id, &f).unwrap();
        assert_eq!(c.radius(), 1);
        assert_eq!(c.table(), f.table());
        let g = LocalRule::total(1, 1, f.output_alphabet_arc(), f.output_alphabet_arc(), |p| p.values()[1]).unwrap();
        let fg = compose(&f, &g).unwrap();
        assert_eq!(fg.radius(), 2);
        let p = Patch::new(Shape::radius(2, 1), [0, 0], vec![0, 1, 1, 0, 1]).unwrap();
        assert_eq!(fg.lookup(p.values()), Some(1));
    }

    #[test]
    fn distort_commutes_with_inflation() {
        let (_, f) = tm_xor();
        let d = distort(&f, [5, 1]).unwrap();
        assert_eq!(d.radius(), 5);
        let p = Patch::new(Shape::line(-4, 4), [0, 0], vec![0, 1, 1, 0, 1, 0, 0, 1, 1]).unwrap();
        let lhs = d.image_of_patch(&inflate_patch(&p, [5, 1])).unwrap();
        let rhs = inflate_patch(&f.image_of_patch(&p).unwrap(), [5, 1]);
        assert_eq!(lhs.shape(), Shape::line(-15, 19));
        assert_eq!(lhs, patch_restrict_to(&rhs, lhs.shape()));
    }

    fn patch_restrict_to(p: &Patch, s: Shape) -> Patch {
        crate::patterns::patch_restrict(p, s).unwrap()
    }

    #[test]
    fn subdivision_and_inverse() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let lang = Language::admitted(tm.clone());
        let sub = subdivision_as_ld(&tm, &lang, 3).unwrap();
        assert!(sub.surjectivity.holds());
        let q = Patch::word(&[0, 1, 1]);
        let inflated = inflate_patch(&q, [2, 1]);
        assert_eq!(sub.rule.image_of_patch(&inflated).unwrap(), substitute_patch(&tm, &q));
        let dom = |r: i64| inflated_language(&tm, &lang, &sub.pairs, r);
        match find_inverse_rule(&sub.rule, &dom, 8).unwrap() {
            InverseResult::Found(g) => assert!(g.radius() <= 3),
            other => panic!("expected an inverse, got {other:?}"),
        }
        let a = Arc::new(Alphabet::new(["x", "y"]).unwrap());
        let swap = LocalRule::relabel(1, a.clone(), a.clone(), &[1, 0]).unwrap();
        let dom = |r: i64| Ok(LocalRule::total(1, r, a.clone(), a.clone(), |_| 0).unwrap().table().keys().map(|k| Patch::new(Shape::radius(r, 1), [0, 0], k.clone()).unwrap()).collect());
        match find_inverse_rule(&swap, &dom, 2).unwrap() {
            InverseResult::Found(g) => assert_eq!(g.radius(), 0),
            other => panic!("expected an inverse, got {other:?}"),
        }
    }

    #[test]
    fn mask5_has_no_inverse() {
        let r = Rule::builtin("mask5").unwrap();
        let lang = Language::admitted(r.clone());
        let sub = subdivision_as_ld(&r, &lang, 2).unwrap();
        assert!(sub.surjectivity.holds());
        let dom = |rad: i64| inflated_language(&r, &lang, &sub.pairs, rad);
        match find_inverse_rule(&sub.rule, &dom, 6).unwrap() {
            InverseResult::NoInverseUpToCap { witness: (p, q), .. } => {
                assert_eq!(sub.rule.image_of_patch(&p).unwrap(), sub.rule.image_of_patch(&q).unwrap());
                assert_ne!(p.get([0, 0]), q.get([0, 0]));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }
}
