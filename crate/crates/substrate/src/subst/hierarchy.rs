//! Hierarchies: forward images under a power of `σ` and chosen pre-images backwards.

use std::sync::Arc;

use serde_json::{json, Value};

use super::{substitute_pattern, Language, Rule, SubstError};
use crate::patterns::{find_difference, LatticePattern};
use crate::recog::{enumerate_fibre, RecogError, DEFAULT_WINDOW_SCHEDULE};

/// Radius on which consecutive levels are checked for compatibility.
pub const HIERARCHY_CHECK_RADIUS: i64 = 20;

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub power: u32,
    /// `P_0 = P, P_1, …, P_m` with `σ^power(P_{i+1}) = P_i`.
    pub backward: Vec<LatticePattern>,
    /// Fibre sizes met at each backward step.
    pub candidates: Vec<usize>,
    /// `σ^power(P), σ^{2·power}(P), …`.
    pub forward: Vec<LatticePattern>,
}

impl Hierarchy {
    pub fn to_json(&self) -> Value {
        json!({
            "power": self.power,
            "backward": self.backward.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
            "candidates": self.candidates,
            "forward": self.forward.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        })
    }
}

fn substitute_n(rule: &Arc<Rule>, p: &LatticePattern, n: u32) -> Result<LatticePattern, SubstError> {
    let mut out = p.clone();
    for _ in 0..n {
        out = substitute_pattern(rule, &out)?;
    }
    Ok(out)
}

/// `m` levels in each direction. With `canonical` set, ambiguous pre-images resolve to the
/// least fibre element.
pub fn hierarchy(
    rule: &Arc<Rule>,
    p: &LatticePattern,
    m: usize,
    power: u32,
    canonical: bool,
    lang: &Language,
) -> Result<Hierarchy, RecogError> {
    let mut backward = vec![p.clone()];
    let mut candidates = Vec::new();
    for _ in 0..m {
        let cur = backward.last().expect("nonempty");
        let fibre = enumerate_fibre(rule, cur, power, &DEFAULT_WINDOW_SCHEDULE, lang)?;
        candidates.push(fibre.len());
        let next = match fibre.len() {
            0 => return Err(SubstError::Unsupported("pattern has no pre-image".into()).into()),
            1 => fibre.elements[0].clone(),
            k if canonical => {
                let _ = k;
                fibre.elements[0].clone()
            }
            k => return Err(SubstError::AmbiguousPredecessor(k).into()),
        };
        let img = substitute_n(rule, &next, power)?;
        if find_difference(&img, cur, HIERARCHY_CHECK_RADIUS).is_some() {
            return Err(RecogError::UCViolation("hierarchy levels are not compatible".into()));
        }
        backward.push(next);
    }
    let mut forward = Vec::new();
    let mut cur = p.clone();
    for _ in 0..m {
        cur = substitute_n(rule, &cur, power)?;
        forward.push(cur.clone());
    }
    Ok(Hierarchy { power, backward, candidates, forward })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{pattern_equal, pattern_translate, HalfSpaces, Periodic, Region};
    use crate::quad::rat;
    use crate::subst::Seed;

    #[test]
    fn mask5_levels() {
        let r = Rule::builtin("mask5").unwrap();
        let lang = Language::admitted(r.clone());
        let p = LatticePattern::substitutive(r.clone(), 1, Seed::Interior { letter: 0, offset: [2, 0] });
        let centred = pattern_translate(&p, &[rat(-1, 2), rat(0, 1)]);
        let h = hierarchy(&r, &centred, 2, 1, false, &lang).unwrap();
        for level in h.backward.iter().chain(&h.forward) {
            assert!(find_difference(level, &centred, 40).is_none());
            assert_eq!(level.phase(), centred.phase());
        }
        let pa = LatticePattern::periodic(r.alphabet_arc(), Periodic::constant(1, 2));
        assert!(matches!(
            hierarchy(&r, &pa, 1, 2, false, &lang),
            Err(RecogError::Subst(SubstError::AmbiguousPredecessor(25)))
        ));
        let h = hierarchy(&r, &pa, 1, 2, true, &lang).unwrap();
        assert_eq!(h.candidates, vec![25]);
        assert_eq!(h.backward[1].phase()[0], rat(0, 1));
    }

    #[test]
    fn half_and_half_is_self_similar() {
        let hh = Rule::builtin("half_and_half").unwrap();
        let t = HalfSpaces::new(
            1,
            vec![
                Region { constraints: vec![([-1, 0], 1)], filler: Periodic::constant(1, 0) },
                Region { constraints: vec![([1, 0], 0)], filler: Periodic::constant(1, 1) },
            ],
        )
        .unwrap();
        let tp = LatticePattern::half_spaces(hh.alphabet_arc(), t);
        let lang = Language::hull(tp.clone());
        let h = hierarchy(&hh, &tp, 3, 1, false, &lang).unwrap();
        assert!(h.backward.iter().chain(&h.forward).all(|l| pattern_equal(l, &tp) == crate::patterns::Equality::Certified(true)));
    }
}
