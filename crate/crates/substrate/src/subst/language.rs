//! Legal patches: the language admitted by a rule, or the language of a single pattern's hull.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use super::{seed_patch, substitute_patch_n, Rule, SubstError};
use crate::patterns::{ep1_form, extract_patch, Ep1, LatticePattern, Letter, Patch, Periodic, Shape, Source};

pub const DEFAULT_SATURATION_CAP: usize = 12;

/// Radius bound for window saturation of 2-D half-space patterns.
const HULL_WINDOW_CAP: i64 = 128;

#[derive(Clone, Debug)]
pub enum Mode {
    /// Sub-patches of `σ^m(a)` over all letters `a` and depths `m`.
    Admitted,
    /// Patches occurring in the given pattern.
    Hull(LatticePattern),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Admitted => "admitted",
            Mode::Hull(_) => "hull",
        }
    }
}

/// The legal patches of one box size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageEntry {
    pub dim: usize,
    pub size: [i64; 2],
    /// Row-major contents of each legal patch.
    pub patches: BTreeSet<Vec<Letter>>,
    /// Substitution depth (or window doublings) at which the set stabilized.
    pub depth: usize,
    /// `true` when the set is provably complete.
    pub saturated: bool,
    pub method: &'static str,
}

impl LanguageEntry {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn shape(&self) -> Shape {
        Shape::sized(self.dim, self.size)
    }

    pub fn to_patches(&self) -> Vec<Patch> {
        let s = self.shape();
        self.patches.iter().map(|v| Patch::new(s, [0, 0], v.clone()).expect("sized")).collect()
    }
}

/// A lazily computed, cached language.
pub struct Language {
    rule: Option<Arc<Rule>>,
    mode: Mode,
    cap: usize,
    cache: Mutex<BTreeMap<[i64; 2], Arc<LanguageEntry>>>,
}

impl std::fmt::Debug for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Language").field("mode", &self.mode.name()).field("cap", &self.cap).finish()
    }
}

impl Language {
    pub fn new(rule: Option<Arc<Rule>>, mode: Mode) -> Language {
        Language { rule, mode, cap: DEFAULT_SATURATION_CAP, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn admitted(rule: Arc<Rule>) -> Language {
        Language::new(Some(rule), Mode::Admitted)
    }

    pub fn hull(p: LatticePattern) -> Language {
        let rule = match p.source() {
            Source::Substitutive(s) => Some(s.rule.clone()),
            _ => None,
        };
        Language::new(rule, Mode::Hull(p))
    }

    pub fn with_cap(mut self, cap: usize) -> Language {
        self.cap = cap.max(1);
        self
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn rule(&self) -> Option<&Arc<Rule>> {
        self.rule.as_ref()
    }

    pub fn dim(&self) -> usize {
        match &self.mode {
            Mode::Hull(p) => p.dim(),
            Mode::Admitted => self.rule.as_ref().map_or(1, |r| r.dim()),
        }
    }

    /// Legal patches of the box `[0, size)`.
    pub fn entry(&self, size: [i64; 2]) -> Result<Arc<LanguageEntry>, SubstError> {
        let size = if self.dim() == 1 { [size[0], 1] } else { size };
        if size[0] < 1 || size[1] < 1 {
            return Err(SubstError::Config(format!("window size {size:?} must be positive")));
        }
        if let Some(e) = self.cache.lock().expect("language cache").get(&size) {
            return Ok(e.clone());
        }
        let e = Arc::new(self.compute(size)?);
        self.cache.lock().expect("language cache").insert(size, e.clone());
        Ok(e)
    }

    pub fn patches(&self, shape: Shape) -> Result<Vec<Patch>, SubstError> {
        let e = self.entry(shape.size())?;
        Ok(e.patches.iter().map(|v| Patch::new(shape, [0, 0], v.clone()).expect("sized")).collect())
    }

    pub fn contains(&self, p: &Patch) -> Result<bool, SubstError> {
        Ok(self.entry(p.shape().size())?.patches.contains(p.values()))
    }

    fn compute(&self, size: [i64; 2]) -> Result<LanguageEntry, SubstError> {
        let dim = self.dim();
        match &self.mode {
            Mode::Admitted => {
                let rule = self.rule.as_ref().ok_or_else(|| SubstError::Config("admitted mode needs a rule".into()))?;
                let seeds: Vec<Patch> =
                    rule.alphabet().iter().map(|a| Patch::constant(Shape::radius(0, dim), a)).collect();
                substitutive_language(rule, 1, &seeds, size, self.cap, "admitted")
            }
            Mode::Hull(p) => hull_language(p, size, self.cap),
        }
    }
}

pub fn legal_patches(rule: &Arc<Rule>, shape: Shape, mode: &Mode) -> Result<LanguageEntry, SubstError> {
    let lang = Language::new(Some(rule.clone()), mode.clone());
    Ok((*lang.entry(shape.size())?).clone())
}

/// Contents of every `size` window of `p`.
pub fn windows_of(p: &Patch, size: [i64; 2]) -> Vec<Vec<Letter>> {
    let s = p.shape().size();
    let size = if p.dim() == 1 { [size[0], 1] } else { size };
    if size[0] > s[0] || size[1] > s[1] {
        return Vec::new();
    }
    let vals = p.values();
    let mut out = Vec::with_capacity(((s[0] - size[0] + 1) * (s[1] - size[1] + 1)) as usize);
    for i in 0..=s[0] - size[0] {
        for j in 0..=s[1] - size[1] {
            let mut w = Vec::with_capacity((size[0] * size[1]) as usize);
            for a in 0..size[0] {
                let row = ((i + a) * s[1] + j) as usize;
                w.extend_from_slice(&vals[row..row + size[1] as usize]);
            }
            out.push(w);
        }
    }
    out
}

fn two_size(dim: usize) -> [i64; 2] {
    if dim == 1 {
        [2, 1]
    } else {
        [2, 2]
    }
}

fn as_patch(dim: usize, size: [i64; 2], v: &[Letter]) -> Patch {
    Patch::new(Shape::sized(dim, size), [0, 0], v.to_vec()).expect("sized")
}

/// Closure of the 2-boxes of `σ^{power}(seeds)` under `q ↦ 2-boxes of σ^{power}(q)`.
fn two_box_closure(
    rule: &Rule,
    power: u32,
    seeds: &[Patch],
    cap: usize,
) -> Result<(BTreeSet<Vec<Letter>>, usize), SubstError> {
    let dim = rule.dim();
    let ts = two_size(dim);
    let mut set: BTreeSet<Vec<Letter>> = BTreeSet::new();
    for s in seeds {
        set.extend(windows_of(s, ts));
        set.extend(windows_of(&substitute_patch_n(rule, s, power), ts));
    }
    let mut frontier: Vec<Vec<Letter>> = set.iter().cloned().collect();
    let mut depth = 0;
    while !frontier.is_empty() {
        if depth >= cap {
            return Err(SubstError::SaturationCapExceeded { size: ts, depth, partial: set.len() });
        }
        depth += 1;
        let mut next = Vec::new();
        for q in frontier {
            let img = substitute_patch_n(rule, &as_patch(dim, ts, &q), power);
            for w in windows_of(&img, ts) {
                if set.insert(w.clone()) {
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    Ok((set, depth))
}

/// Minimal `m` such that every letter's `σ^{power·m}` image has at least `size − 1` cells per axis.
fn covering_depth(rule: &Rule, power: u32, size: [i64; 2], letters: &BTreeSet<Letter>) -> Option<u32> {
    let dim = rule.dim();
    let need = |i: usize| (size[i] - 1).max(1);
    match rule.constant_shape() {
        Some(k) => {
            let mut m = 0u32;
            while (0..dim).any(|i| k[i].pow(power * m) < need(i)) {
                m += 1;
            }
            Some(m)
        }
        None => {
            if letters.iter().any(|&b| !rule.is_growing(b)) {
                return None;
            }
            let mut m = 0u32;
            while letters.iter().any(|&b| rule.length(b, power * m) < num_bigint::BigUint::from(need(0) as u64)) {
                m += 1;
            }
            Some(m)
        }
    }
}

/// Windows of the patterns generated by `seeds` under `σ^{power}`.
fn substitutive_language(
    rule: &Rule,
    power: u32,
    seeds: &[Patch],
    size: [i64; 2],
    cap: usize,
    method: &'static str,
) -> Result<LanguageEntry, SubstError> {
    let dim = rule.dim();
    let (s2, depth) = two_box_closure(rule, power, seeds, cap)?;
    let mut letters: BTreeSet<Letter> = s2.iter().flatten().copied().collect();
    for s in seeds {
        letters.extend(s.values().iter().copied());
    }
    let Some(m) = covering_depth(rule, power, size, &letters) else {
        return saturate_by_depth(rule, power, seeds, size, cap);
    };
    let mut set = BTreeSet::new();
    for s in seeds {
        let mut p = s.clone();
        for level in 0..=m {
            if level > 0 {
                p = substitute_patch_n(rule, &p, power);
            }
            set.extend(windows_of(&p, size));
        }
    }
    let ts = two_size(dim);
    for q in &s2 {
        let img = substitute_patch_n(rule, &as_patch(dim, ts, q), power * m);
        set.extend(windows_of(&img, size));
    }
    Ok(LanguageEntry { dim, size, patches: set, depth: depth.max(m as usize), saturated: true, method })
}

/// Windows of `σ^{power·m}(seeds)` for growing `m`, until two consecutive depths add nothing.
fn saturate_by_depth(
    rule: &Rule,
    power: u32,
    seeds: &[Patch],
    size: [i64; 2],
    cap: usize,
) -> Result<LanguageEntry, SubstError> {
    let dim = rule.dim();
    let mut set = BTreeSet::new();
    let mut layers: Vec<Patch> = seeds.to_vec();
    let mut quiet = 0;
    for depth in 0..=cap {
        if depth > 0 {
            layers = layers.iter().map(|p| substitute_patch_n(rule, p, power)).collect();
        }
        let before = set.len();
        for p in &layers {
            set.extend(windows_of(p, size));
        }
        quiet = if set.len() == before && depth > 0 { quiet + 1 } else { 0 };
        if quiet >= 2 {
            return Ok(LanguageEntry { dim, size, patches: set, depth, saturated: false, method: "depth saturation" });
        }
    }
    Err(SubstError::SaturationCapExceeded { size, depth: cap, partial: set.len() })
}

fn periodic_windows(p: &Periodic, size: [i64; 2]) -> BTreeSet<Vec<Letter>> {
    let dim = p.dim();
    let lat = p.lattice();
    let fund = if dim == 1 { [lat[0][0], 1] } else { [lat[0][0], lat[1][1]] };
    Shape::sized(dim, fund)
        .cells()
        .map(|x| Shape::sized(dim, size).cells().map(|u| p.value([x[0] + u[0], x[1] + u[1]])).collect())
        .collect()
}

fn hull_language(p: &LatticePattern, size: [i64; 2], cap: usize) -> Result<LanguageEntry, SubstError> {
    let dim = p.dim();
    let exact = |patches, method| Ok(LanguageEntry { dim, size, patches, depth: 0, saturated: true, method });
    match p.source() {
        Source::Periodic(q) => exact(periodic_windows(q, size), "residues"),
        Source::HalfSpaces(h) if dim == 1 => match ep1_form(p).expect("1-D half-spaces") {
            Ep1::Periodic(q) => exact(periodic_windows(&q, size), "residues"),
            Ep1::Eventual { left, lo, hi, right, .. } => {
                let (pl, pr) = (left.det(), right.det());
                let s = size[0];
                let set = (lo - s - pl + 1..=hi + pr).map(|x| (x..x + s).map(|y| h.value([y, 0])).collect()).collect();
                exact(set, "eventually periodic")
            }
        },
        Source::HalfSpaces(_) => {
            let mut prev: Option<BTreeSet<Vec<Letter>>> = None;
            let mut r = 16;
            let mut depth = 0;
            while r <= HULL_WINDOW_CAP {
                let w = Shape::radius(r, 2).grow(0).expect("box");
                let patch = extract_patch(p, [0, 0], Shape::rect(w.lo(), [w.hi()[0] + size[0] - 1, w.hi()[1] + size[1] - 1]));
                let set: BTreeSet<Vec<Letter>> = windows_of(&patch, size).into_iter().collect();
                depth += 1;
                if prev.as_ref() == Some(&set) {
                    return Ok(LanguageEntry { dim, size, patches: set, depth, saturated: false, method: "window saturation" });
                }
                prev = Some(set);
                r *= 2;
            }
            Err(SubstError::SaturationCapExceeded { size, depth, partial: prev.map_or(0, |s| s.len()) })
        }
        Source::Substitutive(s) => {
            let seeds = vec![seed_patch(&s.rule, &s.seed)];
            substitutive_language(&s.rule, s.power, &seeds, size, cap, "hull of fixed point")
        }
        Source::Derived(d) => {
            let c = d.map.radius();
            let grow = if dim == 1 { [size[0] + 2 * c, 1] } else { [size[0] + 2 * c, size[1] + 2 * c] };
            let inner = hull_language(&d.inner, grow, cap)?;
            let shape = Shape::sized(dim, grow);
            let mut set = BTreeSet::new();
            for v in &inner.patches {
                let ip = Patch::new(shape, [0, 0], v.clone()).expect("sized");
                let out = d.map.image_of_patch(&ip).map_err(|e| SubstError::Unsupported(e.to_string()))?;
                set.insert(out.into_values());
            }
            Ok(LanguageEntry { dim, size, patches: set, depth: inner.depth, saturated: inner.saturated, method: "derived" })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{HalfSpaces, Region};

    fn words(r: &Rule, e: &LanguageEntry) -> Vec<String> {
        e.patches.iter().map(|w| r.alphabet().render(w)).collect()
    }

    /// Factors of a long iterate, the brute-force oracle.
    fn brute(r: &Rule, depth: u32, n: usize) -> BTreeSet<Vec<Letter>> {
        let mut set = BTreeSet::new();
        for a in r.alphabet().iter() {
            let w = r.power_image(a, depth);
            for x in w.values().windows(n) {
                set.insert(x.to_vec());
            }
        }
        set
    }

    #[test]
    fn thue_morse_factors() {
        let r = Rule::builtin("thue_morse").unwrap();
        let lang = Language::admitted(r.clone());
        for (n, p) in [(1, 2), (2, 4), (3, 6), (4, 10), (5, 12)] {
            let e = lang.entry([n, 1]).unwrap();
            assert_eq!(e.len(), p, "p({n})");
            assert_eq!(e.patches, brute(&r, 8, n as usize));
        }
    }

    #[test]
    fn fibonacci_matches_brute_force() {
        let r = Rule::builtin("fibonacci").unwrap();
        let lang = Language::admitted(r.clone());
        for n in 1..12 {
            assert_eq!(lang.entry([n, 1]).unwrap().patches, brute(&r, 16, n as usize));
            assert_eq!(lang.entry([n, 1]).unwrap().len(), n as usize + 1);
        }
    }

    #[test]
    fn half_and_half_modes() {
        let r = Rule::builtin("half_and_half").unwrap();
        let a = r.alphabet_arc();
        let admitted = Language::admitted(r.clone());
        assert_eq!(words(&r, &admitted.entry([2, 1]).unwrap()), vec!["ww", "bb"]);
        let t = LatticePattern::half_spaces(
            a,
            HalfSpaces::new(
                1,
                vec![
                    Region { constraints: vec![([-1, 0], 1)], filler: Periodic::constant(1, 0) },
                    Region { constraints: vec![([1, 0], 0)], filler: Periodic::constant(1, 1) },
                ],
            )
            .unwrap(),
        );
        let hull = Language::hull(t);
        assert_eq!(words(&r, &hull.entry([2, 1]).unwrap()), vec!["ww", "wb", "bb"]);
    }

    #[test]
    fn mask5_languages() {
        let r = Rule::builtin("mask5").unwrap();
        let lang = Language::admitted(r.clone());
        let e = lang.entry([2, 1]).unwrap();
        assert!(e.saturated);
        let a = r.alphabet();
        let has = |w: &str| e.patches.contains(&a.parse_word(w).unwrap());
        assert!(has("S2 A") && has("A A") && has("C C") && !has("S1 S1"));
        assert_eq!(lang.entry([7, 1]).unwrap().patches, brute(&r, 5, 7));
    }

    #[test]
    fn chair_two_by_two() {
        let r = Rule::builtin("chair").unwrap();
        let lang = Language::admitted(r.clone());
        let e = lang.entry([3, 3]).unwrap();
        let mut set = BTreeSet::new();
        for a in r.alphabet().iter() {
            set.extend(windows_of(&r.power_image(a, 5), [3, 3]));
        }
        assert_eq!(e.patches, set);
    }
}
