use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Deserialize;

use super::SubstError;
use crate::lattice::ExpansionMap;
use crate::linalg;
use crate::patterns::{Alphabet, Cell, Letter, Patch, Shape};
use crate::quad::QuadNum;

/// The replacement data of a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// Letter to nonempty word.
    Word(Vec<Vec<Letter>>),
    /// Letter to a `k[0] × k[1]` array stored row-major, axis 0 outermost. 1-D blocks use `k[1] = 1`.
    Block { dim: usize, k: [i64; 2], images: Vec<Vec<Letter>> },
}

/// A substitution rule together with its expansion.
pub struct Rule {
    name: String,
    alphabet: Arc<Alphabet>,
    kind: RuleKind,
    expansion: Option<ExpansionMap>,
    /// `lengths[m][a] = |σ^m(a)|` for word rules, grown on demand.
    lengths: RwLock<Vec<Vec<BigUint>>>,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule").field("name", &self.name).field("kind", &self.kind).finish()
    }
}

impl PartialEq for Rule {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name && self.alphabet == o.alphabet && self.kind == o.kind
    }
}

impl Eq for Rule {}

impl Rule {
    pub fn word(name: &str, alphabet: Arc<Alphabet>, images: Vec<Vec<Letter>>) -> Result<Rule, SubstError> {
        if images.len() != alphabet.len() {
            return Err(SubstError::InvalidRule(format!(
                "{} images for {} letters",
                images.len(),
                alphabet.len()
            )));
        }
        if let Some(a) = images.iter().position(Vec::is_empty) {
            return Err(SubstError::InvalidRule(format!("image of {} is empty", alphabet.name(a as Letter))));
        }
        let k = images[0].len();
        let constant = images.iter().all(|w| w.len() == k);
        let kind = if constant && k >= 2 {
            RuleKind::Block { dim: 1, k: [k as i64, 1], images }
        } else {
            RuleKind::Word(images)
        };
        Rule::finish(name, alphabet, kind)
    }

    /// `k` has one entry per axis (one or two), each at least 2.
    pub fn block(name: &str, alphabet: Arc<Alphabet>, k: &[i64], images: Vec<Vec<Letter>>) -> Result<Rule, SubstError> {
        if k.is_empty() || k.len() > 2 || k.iter().any(|&x| x < 2) {
            return Err(SubstError::InvalidRule("block shape needs one or two entries, each at least 2".into()));
        }
        let kk = [k[0], k.get(1).copied().unwrap_or(1)];
        if images.len() != alphabet.len() {
            return Err(SubstError::InvalidRule(format!(
                "{} images for {} letters",
                images.len(),
                alphabet.len()
            )));
        }
        let cells = (kk[0] * kk[1]) as usize;
        if let Some(a) = images.iter().position(|w| w.len() != cells) {
            return Err(SubstError::InvalidRule(format!(
                "image of {} does not have shape {:?}",
                alphabet.name(a as Letter),
                &k
            )));
        }
        Rule::finish(name, alphabet, RuleKind::Block { dim: k.len(), k: kk, images })
    }

    fn finish(name: &str, alphabet: Arc<Alphabet>, kind: RuleKind) -> Result<Rule, SubstError> {
        let n = alphabet.len();
        let imgs = match &kind {
            RuleKind::Word(w) => w,
            RuleKind::Block { images, .. } => images,
        };
        if imgs.iter().flatten().any(|&l| l as usize >= n) {
            return Err(SubstError::InvalidRule("image uses a letter outside the alphabet".into()));
        }
        let mut used = vec![false; n];
        for &l in imgs.iter().flatten() {
            used[l as usize] = true;
        }
        if let Some(u) = used.iter().position(|&u| !u) {
            return Err(SubstError::InvalidRule(format!(
                "letter {} never occurs in an image",
                alphabet.name(u as Letter)
            )));
        }
        let mut rule = Rule {
            name: name.to_string(),
            alphabet,
            kind,
            expansion: None,
            lengths: RwLock::new(Vec::new()),
        };
        if !(0..n).any(|a| rule.is_growing(a as Letter)) {
            return Err(SubstError::InvalidRule("no letter grows under iteration".into()));
        }
        rule.expansion = match &rule.kind {
            RuleKind::Block { dim: 1, k, .. } => Some(ExpansionMap::scalar(k[0], 1)),
            RuleKind::Block { k, .. } => {
                Some(ExpansionMap::integer(&[vec![k[0], 0], vec![0, k[1]]]).expect("positive diagonal"))
            }
            RuleKind::Word(_) => perron_frobenius(&rule).map(|l| ExpansionMap::new(vec![vec![l]]).expect("nonzero")),
        };
        Ok(rule)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_arc(&self) -> Arc<Alphabet> {
        self.alphabet.clone()
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            RuleKind::Word(_) => 1,
            RuleKind::Block { dim, .. } => *dim,
        }
    }

    /// The expansion `L`: `diag(k)` for constant shape, the Perron–Frobenius eigenvalue for word
    /// rules when it lies in a real quadratic field.
    pub fn expansion(&self) -> Option<&ExpansionMap> {
        self.expansion.as_ref()
    }

    /// Block shape `k` (1-D constant-length rules give `[k, 1]`).
    pub fn constant_shape(&self) -> Option<[i64; 2]> {
        match &self.kind {
            RuleKind::Word(_) => None,
            RuleKind::Block { k, .. } => Some(*k),
        }
    }

    /// `k^n` per axis.
    pub fn shape_pow(&self, n: u32) -> Option<[i64; 2]> {
        self.constant_shape().map(|k| [k[0].pow(n), k[1].pow(n)])
    }

    pub fn image(&self, a: Letter) -> &[Letter] {
        match &self.kind {
            RuleKind::Word(w) => &w[a as usize],
            RuleKind::Block { images, .. } => &images[a as usize],
        }
    }

    /// `σ(a)` as a patch anchored at the origin.
    pub fn image_patch(&self, a: Letter) -> Patch {
        match &self.kind {
            RuleKind::Word(w) => Patch::word(&w[a as usize]),
            RuleKind::Block { dim, k, images } => {
                Patch::new(Shape::sized(*dim, *k), [0, 0], images[a as usize].clone()).expect("validated shape")
            }
        }
    }

    /// `σ^n(a)` as a patch on `[0, size)`.
    pub fn power_image(&self, a: Letter, n: u32) -> Patch {
        let mut p = Patch::constant(Shape::sized(self.dim(), [1, 1]), a);
        for _ in 0..n {
            p = super::substitute_patch(self, &p);
        }
        p
    }

    /// Letters occurring in `σ(a)`, in alphabet order.
    pub fn successors(&self, a: Letter) -> Vec<Letter> {
        let mut v: Vec<Letter> = self.image(a).to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `|σ^m(a)|` stays unbounded: `a` reaches a letter on a cycle whose image has length at least 2.
    pub fn is_growing(&self, a: Letter) -> bool {
        let n = self.alphabet.len();
        let reach = |from: Letter| -> Vec<bool> {
            let mut seen = vec![false; n];
            let mut stack: Vec<Letter> = self.successors(from);
            while let Some(x) = stack.pop() {
                if !seen[x as usize] {
                    seen[x as usize] = true;
                    stack.extend(self.successors(x));
                }
            }
            seen
        };
        let from_a = reach(a);
        let mut cand: Vec<Letter> = (0..n as Letter).filter(|&b| from_a[b as usize]).collect();
        cand.push(a);
        cand.into_iter().any(|b| self.image(b).len() >= 2 && reach(b)[b as usize])
    }

    /// `|σ^m(a)|` with exact big integers.
    pub fn length(&self, a: Letter, m: u32) -> BigUint {
        self.ensure_lengths(m);
        self.lengths.read().expect("length cache")[m as usize][a as usize].clone()
    }

    /// `|σ^m(w)|`.
    pub fn word_length(&self, w: &[Letter], m: u32) -> BigUint {
        self.ensure_lengths(m);
        let l = self.lengths.read().expect("length cache");
        w.iter().map(|&a| &l[m as usize][a as usize]).sum()
    }

    fn ensure_lengths(&self, m: u32) {
        if self.lengths.read().expect("length cache").len() > m as usize {
            return;
        }
        let mut l = self.lengths.write().expect("length cache");
        let n = self.alphabet.len();
        if l.is_empty() {
            l.push(vec![BigUint::one(); n]);
        }
        while l.len() <= m as usize {
            let prev = l.last().expect("nonempty");
            let next: Vec<BigUint> =
                (0..n).map(|a| self.image(a as Letter).iter().map(|&b| &prev[b as usize]).sum()).collect();
            l.push(next);
        }
    }

    /// Parses a rule file. Block rows are the outer arrays (axis 0), columns the inner (axis 1).
    pub fn from_toml(text: &str) -> Result<Rule, SubstError> {
        let file: RuleFile = toml::from_str(text).map_err(|e| SubstError::Config(e.to_string()))?;
        let alphabet = Arc::new(Alphabet::new(file.alphabet.clone())?);
        let name = file.name.clone().unwrap_or_else(|| "custom".to_string());
        for key in file.rules.keys() {
            if alphabet.index(key).is_none() {
                return Err(SubstError::Config(format!("rule for unknown letter {key:?}")));
            }
        }
        let get = |l: &str| file.rules.get(l).ok_or_else(|| SubstError::Config(format!("no rule for letter {l:?}")));
        let letter = |s: &str| alphabet.index(s).ok_or_else(|| SubstError::Config(format!("unknown letter {s:?}")));
        match file.kind.as_str() {
            "word" => {
                let mut images = Vec::new();
                for l in alphabet.letters() {
                    match get(l)? {
                        RuleValue::Word(s) => images.push(alphabet.parse_word(s)?),
                        _ => return Err(SubstError::Config(format!("word rule for {l:?} must be a string"))),
                    }
                }
                Rule::word(&name, alphabet.clone(), images)
            }
            "block" => {
                let mut images = Vec::new();
                let mut shape: Option<Vec<i64>> = None;
                for l in alphabet.letters() {
                    let (k, vals): (Vec<i64>, Vec<Letter>) = match get(l)? {
                        RuleValue::Row(r) => (vec![r.len() as i64], r.iter().map(|s| letter(s)).collect::<Result<_, _>>()?),
                        RuleValue::Rows(rows) => {
                            let w = rows.first().map_or(0, Vec::len);
                            if rows.iter().any(|r| r.len() != w) {
                                return Err(SubstError::Config(format!("ragged block for {l:?}")));
                            }
                            let vals = rows.iter().flatten().map(|s| letter(s)).collect::<Result<_, _>>()?;
                            (vec![rows.len() as i64, w as i64], vals)
                        }
                        RuleValue::Word(_) => {
                            return Err(SubstError::Config(format!("block rule for {l:?} must be an array")))
                        }
                    };
                    match &shape {
                        None => shape = Some(k),
                        Some(s) if *s != k => {
                            return Err(SubstError::Config(format!("block for {l:?} has a different shape")))
                        }
                        _ => {}
                    }
                    images.push(vals);
                }
                Rule::block(&name, alphabet.clone(), &shape.unwrap_or_default(), images)
            }
            other => Err(SubstError::Config(format!("unknown rule kind {other:?}"))),
        }
    }

    /// Built-in rules by name.
    pub fn builtin(name: &str) -> Result<Arc<Rule>, SubstError> {
        let words = |letters: &[&str], imgs: &[&str]| -> Result<Rule, SubstError> {
            let a = Arc::new(Alphabet::new(letters.iter().copied())?);
            let images = imgs.iter().map(|w| a.parse_word(w)).collect::<Result<Vec<_>, _>>()?;
            Rule::word(name, a, images)
        };
        let rule = match name {
            "thue_morse" => words(&["a", "b"], &["ab", "ba"])?,
            "fibonacci" => words(&["a", "b"], &["ab", "a"])?,
            "doubling" => words(&["w"], &["ww"])?,
            "half_and_half" => words(&["w", "b"], &["ww", "bb"])?,
            "mask5" => words(
                &["S1", "S2", "A", "B", "C"],
                &["S2 A S1 B S2", "S1 B S2 A S1", "C B B B C", "A A A A A", "A A A A A"],
            )?,
            "chair" => {
                let a = Arc::new(Alphabet::new(["NE", "NW", "SW", "SE"])?);
                let img = |s: &str| a.parse_word(s);
                let images = vec![
                    img("NE NW SE NE")?,
                    img("SW NW NW NE")?,
                    img("SW NW SE SW")?,
                    img("SW SE SE NE")?,
                ];
                Rule::block(name, a.clone(), &[2, 2], images)?
            }
            "penta_gaps" => return Err(SubstError::GeometricOnly(name.to_string())),
            _ => return Err(SubstError::UnknownBuiltin(name.to_string())),
        };
        Ok(Arc::new(rule))
    }
}

pub const BUILTIN_RULES: [&str; 7] = ["thue_morse", "fibonacci", "doubling", "half_and_half", "mask5", "chair", "penta_gaps"];

#[derive(Deserialize)]
struct RuleFile {
    name: Option<String>,
    kind: String,
    alphabet: Vec<String>,
    rules: BTreeMap<String, RuleValue>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RuleValue {
    Word(String),
    Row(Vec<String>),
    Rows(Vec<Vec<String>>),
}

/// Column `a` counts the letters of `σ(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl SubstitutionMatrix {
    pub fn column_sums(&self) -> Vec<u64> {
        let n = self.counts.len();
        (0..n).map(|a| (0..n).map(|b| self.counts[b][a]).sum()).collect()
    }
}

pub fn substitution_matrix(rule: &Rule) -> SubstitutionMatrix {
    let n = rule.alphabet().len();
    let mut counts = vec![vec![0u64; n]; n];
    for a in 0..n {
        for &b in rule.image(a as Letter) {
            counts[b as usize][a] += 1;
        }
    }
    SubstitutionMatrix { counts }
}

/// Some power `M^m` with `m ≤ (n−1)²+1` is strictly positive.
pub fn is_primitive(rule: &Rule) -> bool {
    let m = substitution_matrix(rule);
    let n = m.counts.len();
    let base: Vec<Vec<bool>> = m.counts.iter().map(|r| r.iter().map(|&c| c > 0).collect()).collect();
    let mut acc = base.clone();
    let bound = (n - 1) * (n - 1) + 1;
    for step in 1..=bound {
        if acc.iter().all(|r| r.iter().all(|&x| x)) {
            return true;
        }
        if step == bound {
            break;
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).any(|k| acc[i][k] && base[k][j]);
            }
        }
        acc = next;
    }
    false
}

/// Perron–Frobenius eigenvalue of the substitution matrix when it is rational or real quadratic.
fn perron_frobenius(rule: &Rule) -> Option<QuadNum> {
    let m = substitution_matrix(rule);
    let n = m.counts.len();
    let q: linalg::Mat<BigRational> = m
        .counts
        .iter()
        .map(|r| r.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect())
        .collect();
    let poly: Vec<BigInt> = linalg::char_poly(&q).iter().map(|c| c.to_integer()).collect();
    // power iteration for a numeric estimate of the dominant eigenvalue
    let mf: Vec<Vec<f64>> = m.counts.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
    let mut v = vec![1.0f64; n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| mf[i][j] * v[j]).sum::<f64>() + 1e-12 * v[i]).collect();
        let norm = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if norm == 0.0 {
            return None;
        }
        lambda = norm / v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        v = w.iter().map(|x| x / norm).collect();
    }
    let eval = |p: &[BigInt], x: &BigInt| p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c);
    let r = lambda.round() as i64;
    for cand in [r - 1, r, r + 1] {
        if cand > 0 && (cand as f64 - lambda).abs() < 1e-6 && eval(&poly, &BigInt::from(cand)).is_zero() {
            return Some(QuadNum::int(cand));
        }
    }
    // monic quadratic factor x² + p x + c with λ as its larger root
    let span = 2 * (lambda.ceil() as i64) + 2;
    for p in -span..=span {
        let c = (-(lambda * lambda) - p as f64 * lambda).round() as i64;
        let disc = p * p - 4 * c;
        if disc <= 0 {
            continue;
        }
        let root = (-(p as f64) + (disc as f64).sqrt()) / 2.0;
        if (root - lambda).abs() > 1e-6 || !divides_quadratic(&poly, p, c) {
            continue;
        }
        let (sq, free) = split_square(disc as u64);
        let a = BigRational::new(BigInt::from(-p), BigInt::from(2));
        if free == 1 {
            return Some(QuadNum::rational(a + BigRational::new(BigInt::from(sq), BigInt::from(2))));
        }
        let b = BigRational::new(BigInt::from(sq), BigInt::from(2));
        return Some(QuadNum::new(a, b, free));
    }
    None
}

fn divides_quadratic(poly: &[BigInt], p: i64, c: i64) -> bool {
    // synthetic division of poly (low to high) by x² + p x + c
    let mut rem: Vec<BigInt> = poly.to_vec();
    let (p, c) = (BigInt::from(p), BigInt::from(c));
    while rem.len() > 2 {
        let lead = rem.pop().expect("len > 2");
        let k = rem.len();
        rem[k - 1] -= &lead * &p;
        rem[k - 2] -= &lead * &c;
    }
    rem.iter().all(Zero::is_zero)
}

/// `d = sq² · free` with `free` squarefree.
fn split_square(d: u64) -> (u64, u64) {
    let mut sq = 1;
    let mut free = d;
    let mut p = 2;
    while p * p <= free {
        while free % (p * p) == 0 {
            free /= p * p;
            sq *= p;
        }
        p += 1;
    }
    (sq, free)
}

/// Growth factor `λ` as a float, for display and heuristics only.
pub fn expansion_estimate(rule: &Rule) -> f64 {
    match rule.constant_shape() {
        Some(k) => (k[0] * k[1]) as f64,
        None => rule.expansion().map_or_else(
            || {
                let a = rule.length(0, 24).to_f64().unwrap_or(f64::MAX);
                a.powf(1.0 / 24.0)
            },
            |e| e.matrix()[0][0].to_f64(),
        ),
    }
}

pub(crate) fn cell_in(k: [i64; 2], c: Cell) -> usize {
    (c[0] * k[1] + c[1]) as usize
}
