//! Substitution rules, seeds and fixed points, supertile addressing and languages.

mod address;
mod fixed;
mod hierarchy;
mod language;
mod rule;

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::LatticeError;
use crate::patterns::{
    self, rat_floor, rat_frac, Alphabet, Cell, HalfSpaces, LatticePattern, Letter, Patch, PatternError, Periodic,
    Region, Shape, Source, SubstSource,
};

pub use address::{address, address_box};
pub use hierarchy::{hierarchy, Hierarchy, HIERARCHY_CHECK_RADIUS};
pub use fixed::{complexity, fixed_points, repetitivity_profile, FixedPoint, RepetitivityProfile};
pub use language::{legal_patches, windows_of, Language, LanguageEntry, Mode, DEFAULT_SATURATION_CAP};
pub use rule::{expansion_estimate, is_primitive, substitution_matrix, Rule, RuleKind, SubstitutionMatrix, BUILTIN_RULES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown built-in {0:?}")]
    UnknownBuiltin(String),
    #[error("{0} is a geometric rule; use the geometry commands")]
    GeometricOnly(String),
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("language of size {size:?} did not saturate within depth {depth}")]
    SaturationCapExceeded { size: [i64; 2], depth: usize, partial: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("predecessor is not unique ({0} candidates)")]
    AmbiguousPredecessor(usize),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl SubstError {
    /// Stable machine-readable tag.
    pub fn reason(&self) -> &'static str {
        match self {
            SubstError::InvalidRule(_) => "invalid_rule",
            SubstError::Config(_) => "invalid_config",
            SubstError::UnknownBuiltin(_) => "unknown_builtin",
            SubstError::GeometricOnly(_) => "geometric_only",
            SubstError::InvalidSeed(_) => "invalid_seed",
            SubstError::SaturationCapExceeded { .. } => "saturation_cap_exceeded",
            SubstError::Unsupported(_) => "unsupported",
            SubstError::AmbiguousPredecessor(_) => "ambiguous_predecessor",
            SubstError::Pattern(_) => "pattern",
            SubstError::Lattice(_) => "lattice",
        }
    }
}

/// The data pinning down a fixed point of `σ^n`.
///
/// `Interior(a, j)`: `a` sits at cell 0 and at offset `j` of `σ^n(a)`.
/// `Corner`: the letters around the origin, each fixed at the matching corner of its own image.
/// In 1-D they are `[left, right]` with `right` at cell 0; in 2-D they are indexed by
/// `2·[x0 ≥ 0] + [x1 ≥ 0]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Seed {
    Interior { letter: Letter, offset: Cell },
    Corner { letters: Vec<Letter> },
}

impl Seed {
    pub fn to_json(&self, a: &Alphabet, dim: usize) -> Value {
        match self {
            Seed::Interior { letter, offset } => {
                json!({"kind": "interior", "letter": a.name(*letter), "offset": offset[..dim].to_vec()})
            }
            Seed::Corner { letters } => json!({
                "kind": "corner",
                "letters": letters.iter().map(|&l| a.name(l)).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn describe(&self, a: &Alphabet, dim: usize) -> String {
        match self {
            Seed::Interior { letter, offset } => format!("{}@{:?}", a.name(*letter), &offset[..dim]),
            Seed::Corner { letters } => {
                letters.iter().map(|&l| a.name(l)).collect::<Vec<_>>().join(if dim == 1 { "." } else { "," })
            }
        }
    }
}

/// Checks that `seed` is fixed by `σ^n`; word-rule corners must also grow.
pub fn validate_seed(rule: &Rule, seed: &Seed, n: u32) -> Result<(), SubstError> {
    let bad = |m: String| Err(SubstError::InvalidSeed(m));
    if n == 0 {
        return bad("power must be at least 1".into());
    }
    let dim = rule.dim();
    let alpha = rule.alphabet().len();
    match seed {
        Seed::Interior { letter, offset } => {
            if *letter as usize >= alpha {
                return bad("letter outside the alphabet".into());
            }
            let img = rule.power_image(*letter, n);
            let size = img.shape().size();
            for i in 0..dim {
                if offset[i] <= 0 || offset[i] >= size[i] - 1 {
                    return bad(format!("offset {:?} is not strictly inside the image", &offset[..dim]));
                }
            }
            if dim == 1 && offset[1] != 0 {
                return bad("1-D offsets have a trivial second axis".into());
            }
            if img.get(*offset) != Some(*letter) {
                return bad("letter does not reproduce itself at the offset".into());
            }
        }
        Seed::Corner { letters } => {
            let want = 1 << dim;
            if letters.len() != want {
                return bad(format!("corner seeds need {want} letters"));
            }
            if letters.iter().any(|&l| l as usize >= alpha) {
                return bad("letter outside the alphabet".into());
            }
            for (q, &c) in letters.iter().enumerate() {
                let img = rule.power_image(c, n);
                let corner = quadrant_corner(dim, q, img.shape().size());
                if img.get(corner) != Some(c) {
                    return bad(format!("{} is not fixed at its corner", rule.alphabet().name(c)));
                }
                if rule.constant_shape().is_none() && !rule.is_growing(c) {
                    return bad(format!("{} does not grow", rule.alphabet().name(c)));
                }
            }
        }
    }
    Ok(())
}

/// The cell of a `size` box that touches the origin from quadrant `q`.
pub(crate) fn quadrant_corner(dim: usize, q: usize, size: [i64; 2]) -> Cell {
    let pos = quadrant_signs(dim, q);
    let mut c = [0, 0];
    for i in 0..dim {
        c[i] = if pos[i] { 0 } else { size[i] - 1 };
    }
    c
}

/// Per axis, whether quadrant `q` lies on the nonnegative side.
pub(crate) fn quadrant_signs(dim: usize, q: usize) -> [bool; 2] {
    if dim == 1 {
        [q == 1, true]
    } else {
        [q & 2 != 0, q & 1 != 0]
    }
}

pub(crate) fn quadrant_of(dim: usize, y: Cell) -> usize {
    if dim == 1 {
        usize::from(y[0] >= 0)
    } else {
        2 * usize::from(y[0] >= 0) + usize::from(y[1] >= 0)
    }
}

/// The seed letters as a patch around the origin (the corner pair or 2×2 box, or the single letter).
pub fn seed_patch(rule: &Rule, seed: &Seed) -> Patch {
    let dim = rule.dim();
    match seed {
        Seed::Interior { letter, .. } => Patch::constant(Shape::radius(0, dim), *letter),
        Seed::Corner { letters } => {
            let shape = if dim == 1 { Shape::line(-1, 0) } else { Shape::rect([-1, -1], [0, 0]) };
            Patch::from_fn(shape, [0, 0], |c| letters[quadrant_of(dim, c)])
        }
    }
}

/// `σ(p)`. Block rules send cell `y` to the block at `k∘y`. Word rules lay the images of cells
/// `x ≥ 0` rightwards from 0 and those of `x < 0` leftwards from −1.
pub fn substitute_patch(rule: &Rule, p: &Patch) -> Patch {
    match rule.constant_shape() {
        Some(k) => {
            let dim = p.dim();
            let s = p.shape();
            let lo = [s.lo()[0] * k[0], s.lo()[1] * k[1]];
            let size = [s.size()[0] * k[0], s.size()[1] * k[1]];
            let shape = Shape::new(dim, lo, [lo[0] + size[0] - 1, lo[1] + size[1] - 1]).expect("nonempty");
            let anchor = [p.anchor()[0] * k[0], p.anchor()[1] * k[1]];
            Patch::from_fn(shape, anchor, |y| {
                let x = [y[0].div_euclid(k[0]), y[1].div_euclid(k[1])];
                let r = [y[0].rem_euclid(k[0]), y[1].rem_euclid(k[1])];
                rule.image(p.get(x).expect("inside"))[rule::cell_in(k, r)]
            })
        }
        None => {
            let s = p.shape();
            let (lo, hi) = (s.lo()[0], s.hi()[0]);
            let left: usize = (lo..0.min(hi + 1)).map(|x| rule.image(p.get([x, 0]).expect("inside")).len()).sum();
            let mut out = Vec::new();
            let mut anchor = 0;
            let mut pos = -(left as i64);
            for x in lo..=hi {
                if x == p.anchor()[0] {
                    anchor = pos;
                }
                let img = rule.image(p.get([x, 0]).expect("inside"));
                out.extend_from_slice(img);
                pos += img.len() as i64;
            }
            let start = -(left as i64);
            Patch::new(Shape::line(start, start + out.len() as i64 - 1), [anchor, 0], out).expect("sized")
        }
    }
}

pub fn substitute_patch_n(rule: &Rule, p: &Patch, n: u32) -> Patch {
    (0..n).fold(p.clone(), |q, _| substitute_patch(rule, &q))
}

fn k_of(rule: &Rule) -> [i64; 2] {
    rule.constant_shape().unwrap_or([1, 1])
}

/// `y ↦ σ(per(x))[r]` with `y − m = k∘x + r`.
fn substitute_periodic(rule: &Rule, per: &Periodic, m: Cell) -> Result<Periodic, SubstError> {
    let k = k_of(rule);
    let gens: Vec<Cell> = per.lattice().iter().map(|g| [g[0] * k[0], g[1] * k[1]]).collect();
    let gens = if per.dim() == 2 { gens } else { vec![gens[0]] };
    Ok(Periodic::from_fn(per.dim(), &gens, |y| {
        let z = patterns::sub(y, m);
        let x = [z[0].div_euclid(k[0]), z[1].div_euclid(k[1])];
        let r = [z[0].rem_euclid(k[0]), z[1].rem_euclid(k[1])];
        rule.image(per.value(x))[rule::cell_in(k, r)]
    })?)
}

/// `σ(P)` as a pattern of the same source family.
///
/// For constant-shape rules the cell `x` of `P` at phase `φ` becomes the block starting at
/// `k∘x + ⌊k∘φ⌋`, and the new phase is `frac(k∘φ)`.
pub fn substitute_pattern(rule: &Arc<Rule>, p: &LatticePattern) -> Result<LatticePattern, SubstError> {
    let dim = p.dim();
    if dim != rule.dim() {
        return Err(SubstError::Unsupported("pattern and rule dimensions differ".into()));
    }
    let Some(k) = rule.constant_shape() else {
        return substitute_pattern_word(rule, p);
    };
    let mut m = [0i64; 2];
    let mut phase = patterns::zero_phase();
    for i in 0..dim {
        let scaled = &p.phase()[i] * BigRational::from_integer(k[i].into());
        m[i] = rat_floor(&scaled);
        phase[i] = rat_frac(&scaled);
    }
    let source = match p.source() {
        Source::Periodic(per) => Source::Periodic(Arc::new(substitute_periodic(rule, per, m)?)),
        Source::HalfSpaces(h) => {
            let mut regions = Vec::new();
            for r in h.regions() {
                let mut cons = Vec::new();
                for (a, b) in &r.constraints {
                    let axis = match (a[0], a[1]) {
                        (x, 0) if x.abs() == 1 => 0,
                        (0, x) if x.abs() == 1 && dim == 2 => 1,
                        _ => return Err(SubstError::Unsupported("only axis-aligned half-spaces substitute".into())),
                    };
                    let (ki, mi) = (k[axis], m[axis]);
                    if a[axis] == 1 {
                        cons.push((*a, ki * b + mi));
                    } else {
                        cons.push((*a, ki * b - ki + 1 - mi));
                    }
                }
                regions.push(Region { constraints: cons, filler: substitute_periodic(rule, &r.filler, m)? });
            }
            Source::HalfSpaces(Arc::new(HalfSpaces::new(dim, regions)?))
        }
        Source::Substitutive(s) => {
            if s.rule.name() != rule.name() {
                return Err(SubstError::Unsupported("substitutive source of a different rule".into()));
            }
            let (seed, t) = seed_image(rule, &s.seed, s.power);
            let shift = [m[0] + k[0] * s.shift[0] + t[0], m[1] + k[1] * s.shift[1] + t[1]];
            Source::Substitutive(Arc::new(SubstSource { rule: s.rule.clone(), power: s.power, seed, shift }))
        }
        Source::Derived(_) => return Err(SubstError::Unsupported("substitution of derived patterns".into())),
    };
    Ok(LatticePattern::new(dim, p.alphabet_arc(), source, phase)?)
}

fn substitute_pattern_word(rule: &Arc<Rule>, p: &LatticePattern) -> Result<LatticePattern, SubstError> {
    if !p.phase()[0].is_zero() {
        return Err(SubstError::Unsupported("word rules act on phase-zero patterns only".into()));
    }
    match p.source() {
        Source::Substitutive(s) if s.shift == [0, 0] && matches!(s.seed, Seed::Corner { .. }) => {
            let (seed, _) = seed_image(rule, &s.seed, s.power);
            Ok(LatticePattern::substitutive(s.rule.clone(), s.power, seed))
        }
        Source::Periodic(per) => {
            let n = per.lattice()[0][0];
            let word: Vec<Letter> = (0..n).flat_map(|x| rule.image(per.value([x, 0])).to_vec()).collect();
            Ok(LatticePattern::periodic(p.alphabet_arc(), Periodic::word(&word)?))
        }
        _ => Err(SubstError::Unsupported(
            "word rules substitute corner-seeded fixed points at the origin and periodic patterns only".into(),
        )),
    }
}

/// The seed of `σ(P_seed)` and the translation `t` with `σ(P_seed) = P_seed' + t`.
pub(crate) fn seed_image(rule: &Rule, seed: &Seed, n: u32) -> (Seed, Cell) {
    let dim = rule.dim();
    match seed {
        Seed::Interior { letter, offset } => {
            let k = k_of(rule);
            let mut t = [0i64; 2];
            let mut j2 = [0i64; 2];
            for i in 0..dim {
                let kn1 = k[i].pow(n) - 1;
                t[i] = (k[i] * offset[i]).div_euclid(kn1);
                j2[i] = k[i] * offset[i] - kn1 * t[i];
            }
            let b = rule.image(*letter)[rule::cell_in(k, t)];
            (Seed::Interior { letter: b, offset: j2 }, t)
        }
        Seed::Corner { letters } => {
            let new = letters
                .iter()
                .enumerate()
                .map(|(q, &c)| {
                    let img = rule.image_patch(c);
                    img.get(quadrant_corner(dim, q, img.shape().size())).expect("corner")
                })
                .collect();
            (Seed::Corner { letters: new }, [0, 0])
        }
    }
}

/// The translation `δ` with `σ^n(P_seed) = P_seed + δ` (constant-shape rules).
pub fn seed_drift(seed: &Seed) -> Cell {
    match seed {
        Seed::Interior { offset, .. } => *offset,
        Seed::Corner { .. } => [0, 0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask5_images() {
        let r = Rule::builtin("mask5").unwrap();
        let a = r.alphabet();
        let p = Patch::word(&a.parse_word("A").unwrap());
        let s = substitute_patch(&r, &p);
        assert_eq!(a.render(s.values()), "C B B B C");
        let s2 = substitute_patch(&r, &s);
        assert_eq!(s2.values(), &[a.index("A").unwrap(); 25][..]);
        assert!(!is_primitive(&r));
    }

    #[test]
    fn word_substitution_offsets() {
        let r = Rule::builtin("fibonacci").unwrap();
        let p = Patch::new(Shape::line(-1, 1), [0, 0], vec![1, 0, 1]).unwrap();
        let s = substitute_patch(&r, &p);
        assert_eq!(s.shape(), Shape::line(-1, 2));
        assert_eq!(s.values(), &[0, 0, 1, 0]);
        assert_eq!(s.anchor(), [0, 0]);
        let m = substitution_matrix(&r);
        assert_eq!(m.counts, vec![vec![1, 1], vec![1, 0]]);
        assert!(is_primitive(&r));
    }

    #[test]
    fn seed_validation() {
        let r = Rule::builtin("mask5").unwrap();
        assert!(validate_seed(&r, &Seed::Interior { letter: 0, offset: [2, 0] }, 1).is_ok());
        assert!(validate_seed(&r, &Seed::Interior { letter: 0, offset: [1, 0] }, 1).is_err());
        let tm = Rule::builtin("thue_morse").unwrap();
        assert!(validate_seed(&tm, &Seed::Corner { letters: vec![0, 0] }, 2).is_ok());
        assert!(validate_seed(&tm, &Seed::Corner { letters: vec![0, 0] }, 1).is_err());
    }

    #[test]
    fn substituting_patterns() {
        let r = Rule::builtin("mask5").unwrap();
        let a = r.alphabet_arc();
        let pa = LatticePattern::periodic(a.clone(), Periodic::constant(1, 2));
        let pb = substitute_pattern(&r, &pa).unwrap();
        assert_eq!(a.render(&pb.word(0, 4)), "C B B B C");
        let fixed = LatticePattern::substitutive(r.clone(), 1, Seed::Interior { letter: 0, offset: [2, 0] });
        let img = substitute_pattern(&r, &fixed).unwrap();
        // σ(P*) = P* + 2
        for x in -40..40 {
            assert_eq!(img.value([x, 0]), fixed.value([x - 2, 0]));
        }
    }
}
