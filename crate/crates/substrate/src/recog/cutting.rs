//! Centre cuttings of legal patches and the recognisability radius.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::RecogError;
use crate::patterns::{Cell, Letter, Patch, Shape};
use crate::subst::{Language, Rule, RuleKind};

/// The centre cell lies at `offset` inside the image of `letter`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cutting {
    pub letter: Letter,
    pub offset: Cell,
}

impl Cutting {
    pub fn to_json(&self, rule: &Rule) -> Value {
        let off: Vec<i64> = self.offset[..rule.dim()].to_vec();
        json!({"letter": rule.alphabet().name(self.letter), "offset": off})
    }
}

/// A legal patch with two centre cuttings, each backed by a legal super-patch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityWitness {
    pub patch: Patch,
    pub cuttings: [Cutting; 2],
    pub extensions: [Patch; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecognisabilityReport {
    Found { radius: i64 },
    AmbiguousAtCap { cap: i64, witness: Box<AmbiguityWitness> },
}

/// One way of covering a window by the image of a legal super-patch.
struct Cover {
    window: Vec<Letter>,
    cutting: Cutting,
    source: Patch,
}

fn side_size(dim: usize, lo: Cell, hi: Cell) -> [i64; 2] {
    if dim == 1 {
        [hi[0] - lo[0] + 1, 1]
    } else {
        [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1]
    }
}

/// Every way a legal super-patch covers `shape` (which must contain the origin) after substitution.
fn covers(rule: &Rule, lang: &Language, shape: Shape) -> Result<Vec<Cover>, RecogError> {
    let dim = rule.dim();
    let (lo, hi) = (shape.lo(), shape.hi());
    let mut out = Vec::new();
    match rule.kind() {
        RuleKind::Block { k, .. } => {
            let k = *k;
            let kk = if dim == 1 { [k[0], 1] } else { k };
            for j in Shape::sized(dim, kk).cells() {
                let slo = [(lo[0] + j[0]).div_euclid(kk[0]), (lo[1] + j[1]).div_euclid(kk[1])];
                let shi = [(hi[0] + j[0]).div_euclid(kk[0]), (hi[1] + j[1]).div_euclid(kk[1])];
                let qshape = Shape::new(dim, slo, shi)?;
                for q in lang.patches(qshape)? {
                    let window: Vec<Letter> = shape
                        .cells()
                        .map(|y| {
                            let z = [y[0] + j[0], y[1] + j[1]];
                            let s = [z[0].div_euclid(kk[0]), z[1].div_euclid(kk[1])];
                            let r = [z[0].rem_euclid(kk[0]), z[1].rem_euclid(kk[1])];
                            rule.image(q.get(s).expect("covered"))[(r[0] * kk[1] + r[1]) as usize]
                        })
                        .collect();
                    let letter = q.get([0, 0]).expect("origin supertile");
                    out.push(Cover { window, cutting: Cutting { letter, offset: j }, source: q });
                }
            }
        }
        RuleKind::Word(images) => {
            let min_len = images.iter().map(Vec::len).min().unwrap_or(1).max(1) as i64;
            let reach = (-lo[0]).max(hi[0]).max(0);
            let r = reach / min_len + 1;
            let qshape = Shape::line(-r, r);
            for q in lang.patches(qshape)? {
                let vals = q.values();
                let centre = vals[r as usize];
                let left: i64 = vals[..r as usize].iter().map(|&a| images[a as usize].len() as i64).sum();
                let whole: Vec<Letter> = vals.iter().flat_map(|&a| images[a as usize].iter().copied()).collect();
                for j in 0..images[centre as usize].len() as i64 {
                    let start = -j - left;
                    let end = start + whole.len() as i64 - 1;
                    if start > lo[0] || end < hi[0] {
                        continue;
                    }
                    let window: Vec<Letter> = (lo[0]..=hi[0]).map(|y| whole[(y - start) as usize]).collect();
                    out.push(Cover { window, cutting: Cutting { letter: centre, offset: [j, 0] }, source: q.clone() });
                }
            }
        }
    }
    Ok(out)
}

/// The centre cuttings of `p`, the cell `[0, 0]` of its shape being the centre.
pub fn cuttings_of_patch(rule: &Rule, p: &Patch, lang: &Language) -> Result<BTreeSet<Cutting>, RecogError> {
    let shape = p.shape();
    if !shape.contains([0, 0]) {
        return Err(RecogError::IllegalPatch("the patch shape must contain the origin".into()));
    }
    let normal = Patch::new(Shape::sized(p.dim(), shape.size()), [0, 0], p.values().to_vec())?;
    if !lang.contains(&normal)? {
        return Err(RecogError::IllegalPatch(rule.alphabet().render(p.values())));
    }
    Ok(covers(rule, lang, shape)?
        .into_iter()
        .filter(|c| c.window == p.values())
        .map(|c| c.cutting)
        .collect())
}

/// Checks radius `r`; on failure returns a witness.
fn check_radius(rule: &Rule, lang: &Language, r: i64) -> Result<Option<AmbiguityWitness>, RecogError> {
    let dim = rule.dim();
    let shape = Shape::radius(r, dim);
    let legal = lang.entry(side_size(dim, shape.lo(), shape.hi()))?;
    let mut seen: BTreeMap<Vec<Letter>, (Cutting, Patch)> = BTreeMap::new();
    for c in covers(rule, lang, shape)? {
        if !legal.patches.contains(&c.window) {
            continue;
        }
        match seen.get(&c.window) {
            Some((other, src)) if *other != c.cutting => {
                let patch = Patch::new(shape, [0, 0], c.window.clone())?;
                return Ok(Some(AmbiguityWitness {
                    patch,
                    cuttings: [*other, c.cutting],
                    extensions: [src.clone(), c.source],
                }));
            }
            Some(_) => {}
            None => {
                seen.insert(c.window, (c.cutting, c.source));
            }
        }
    }
    if let Some(missing) = legal.patches.iter().find(|w| !seen.contains_key(*w)) {
        return Err(RecogError::IllegalPatch(format!(
            "legal patch {} has no cutting",
            rule.alphabet().render(missing)
        )));
    }
    Ok(None)
}

/// Least `r ≤ cap` at which every legal radius-`r` patch has exactly one centre cutting.
pub fn recognisability_radius(rule: &Rule, cap: i64, lang: &Language) -> Result<RecognisabilityReport, RecogError> {
    if cap < 0 {
        return Err(RecogError::Subst(crate::subst::SubstError::Config("cap must be non-negative".into())));
    }
    // unique cuttings persist under extension, so the failing radii form an initial segment
    let mut bad = -1;
    let mut good = None;
    let mut r = 0;
    loop {
        if check_radius(rule, lang, r)?.is_none() {
            good = Some(r);
            break;
        }
        bad = r;
        if r >= cap {
            break;
        }
        r = (if r == 0 { 1 } else { 2 * r }).min(cap);
    }
    match good {
        Some(mut hi) => {
            while hi - bad > 1 {
                let mid = (bad + hi) / 2;
                if check_radius(rule, lang, mid)?.is_none() {
                    hi = mid;
                } else {
                    bad = mid;
                }
            }
            Ok(RecognisabilityReport::Found { radius: hi })
        }
        None => {
            let witness = check_radius(rule, lang, cap)?.expect("failed at cap");
            Ok(RecognisabilityReport::AmbiguousAtCap { cap, witness: Box::new(witness) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::{substitute_patch, Rule};

    fn word(rule: &Rule, s: &str) -> Patch {
        let w = rule.alphabet().parse_word(s).unwrap();
        let r = (w.len() / 2) as i64;
        Patch::new(Shape::line(-r, r), [0, 0], w).unwrap()
    }

    #[test]
    fn mask5_cuttings() {
        let m = Rule::builtin("mask5").unwrap();
        let lang = Language::admitted(m.clone());
        let a25 = Patch::new(Shape::line(-12, 12), [0, 0], vec![2; 25]).unwrap();
        let cs = cuttings_of_patch(&m, &a25, &lang).unwrap();
        let expect: BTreeSet<Cutting> =
            [3u8, 4].iter().flat_map(|&l| (0..5).map(move |j| Cutting { letter: l, offset: [j, 0] })).collect();
        assert_eq!(cs, expect);
        // radius 7 around the fixed S1 of P*
        let p = crate::patterns::LatticePattern::substitutive(
            m.clone(),
            1,
            crate::subst::Seed::Interior { letter: 0, offset: [2, 0] },
        );
        let patch = crate::patterns::extract_patch(&p, [0, 0], Shape::radius(7, 1)).with_anchor([0, 0]);
        let cs = cuttings_of_patch(&m, &patch, &lang).unwrap();
        assert_eq!(cs.into_iter().collect::<Vec<_>>(), vec![Cutting { letter: 0, offset: [2, 0] }]);
    }

    #[test]
    fn thue_morse_radius() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let lang = Language::admitted(tm.clone());
        assert!(cuttings_of_patch(&tm, &word(&tm, "a"), &lang).unwrap().len() > 1);
        match recognisability_radius(&tm, 64, &lang).unwrap() {
            RecognisabilityReport::Found { radius } => assert_eq!(radius, brute_tm_radius()),
            r => panic!("{r:?}"),
        }
    }

    /// Oracle: factors of σ⁶(a), σ⁶(b) with their cuttings read off the two parities.
    fn brute_tm_radius() -> i64 {
        let tm = Rule::builtin("thue_morse").unwrap();
        let mut long = Vec::new();
        for a in [0u8, 1] {
            let mut p = Patch::word(&[a]);
            for _ in 0..8 {
                p = substitute_patch(&tm, &p);
            }
            long.push(p.values().to_vec());
        }
        for r in 0..20usize {
            let mut map: BTreeMap<&[u8], BTreeSet<usize>> = BTreeMap::new();
            for w in &long {
                for i in r..w.len() - r {
                    map.entry(&w[i - r..=i + r]).or_default().insert(i % 2);
                }
            }
            if map.values().all(|s| s.len() == 1) {
                return r as i64;
            }
        }
        panic!("no radius below 20");
    }

    #[test]
    fn half_and_half_is_ambiguous() {
        let h = Rule::builtin("half_and_half").unwrap();
        let lang = Language::admitted(h.clone());
        match recognisability_radius(&h, 8, &lang).unwrap() {
            RecognisabilityReport::AmbiguousAtCap { cap, witness } => {
                assert_eq!(cap, 8);
                let w = &witness;
                assert!(w.patch.values().iter().all(|&l| l == w.patch.values()[0]));
                assert_ne!(w.cuttings[0], w.cuttings[1]);
                for i in 0..2 {
                    let img = substitute_patch(&h, &w.extensions[i]);
                    assert!(img.values().windows(17).any(|x| x == w.patch.values()));
                }
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn fibonacci_radius_is_finite() {
        let f = Rule::builtin("fibonacci").unwrap();
        let lang = Language::admitted(f.clone());
        assert!(matches!(recognisability_radius(&f, 64, &lang).unwrap(), RecognisabilityReport::Found { .. }));
    }

    #[test]
    fn extension_shrinks_cuttings() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let lang = Language::admitted(tm.clone());
        for w in lang.entry([5, 1]).unwrap().patches.iter() {
            let big = Patch::new(Shape::line(-2, 2), [0, 0], w.clone()).unwrap();
            let small = Patch::new(Shape::line(-1, 1), [0, 0], w[1..4].to_vec()).unwrap();
            let a = cuttings_of_patch(&tm, &big, &lang).unwrap();
            let b = cuttings_of_patch(&tm, &small, &lang).unwrap();
            assert!(a.is_subset(&b));
        }
    }
}
