//! Fixed points of powers of a rule, complexity counts and repetitivity profiles.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use super::language::windows_of;
use super::{quadrant_corner, seed_patch, Language, Mode, Rule, Seed, SubstError};
use crate::patterns::{find_difference, LatticePattern, Letter, Patch, Shape};

/// Window radius used to recognise duplicate fixed points.
pub const FIXED_POINT_DEDUP_RADIUS: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPoint {
    pub power: u32,
    pub seed: Seed,
}

impl FixedPoint {
    pub fn pattern(&self, rule: &Arc<Rule>) -> LatticePattern {
        LatticePattern::substitutive(rule.clone(), self.power, self.seed.clone())
    }

    pub fn to_json(&self, rule: &Rule) -> Value {
        json!({
            "power": self.power,
            "seed": self.seed.to_json(rule.alphabet(), rule.dim()),
            "label": self.seed.describe(rule.alphabet(), rule.dim()),
        })
    }
}

/// Interior and corner seeds of `σ^n` for `n ≤ max_power`, skipping patterns already listed.
pub fn fixed_points(rule: &Arc<Rule>, max_power: u32) -> Result<Vec<FixedPoint>, SubstError> {
    if max_power == 0 {
        return Err(SubstError::Config("max_power must be at least 1".into()));
    }
    let dim = rule.dim();
    let lang = Language::admitted(rule.clone());
    let pair = lang.entry(if dim == 1 { [2, 1] } else { [2, 2] })?;
    let mut kept: Vec<(FixedPoint, LatticePattern)> = Vec::new();
    for n in 1..=max_power {
        let mut cands = Vec::new();
        for a in rule.alphabet().iter() {
            let img = rule.power_image(a, n);
            let size = img.shape().size();
            for c in img.shape().cells() {
                let inside = (0..dim).all(|i| c[i] > 0 && c[i] < size[i] - 1);
                if inside && img.get(c) == Some(a) {
                    cands.push(Seed::Interior { letter: a, offset: c });
                }
            }
        }
        let quads = 1usize << dim;
        let mut per_quad: Vec<Vec<Letter>> = vec![Vec::new(); quads];
        for (q, list) in per_quad.iter_mut().enumerate() {
            for a in rule.alphabet().iter() {
                if rule.constant_shape().is_none() && !rule.is_growing(a) {
                    continue;
                }
                let img = rule.power_image(a, n);
                if img.get(quadrant_corner(dim, q, img.shape().size())) == Some(a) {
                    list.push(a);
                }
            }
        }
        let mut combos: Vec<Vec<Letter>> = vec![Vec::new()];
        for list in &per_quad {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    list.iter().map(move |&l| {
                        let mut c = c.clone();
                        c.push(l);
                        c
                    })
                })
                .collect();
        }
        for letters in combos {
            let seed = Seed::Corner { letters };
            if pair.patches.contains(seed_patch(rule, &seed).values()) {
                cands.push(seed);
            }
        }
        for seed in cands {
            let fp = FixedPoint { power: n, seed };
            let p = fp.pattern(rule);
            let dup = kept.iter().any(|(_, q)| find_difference(&p, q, FIXED_POINT_DEDUP_RADIUS).is_none());
            if !dup {
                kept.push((fp, p));
            }
        }
    }
    Ok(kept.into_iter().map(|(f, _)| f).collect())
}

/// Number of legal side-`n` boxes.
pub fn complexity(rule: &Arc<Rule>, n: i64, mode: &Mode) -> Result<usize, SubstError> {
    let lang = Language::new(Some(rule.clone()), mode.clone());
    Ok(lang.entry([n, n])?.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepetitivityProfile {
    /// `(r, R(r))`; `None` when no `R` up to the search cap works.
    pub samples: Vec<(i64, Option<i64>)>,
    /// `max R(r)/r`, reported for primitive rules only.
    pub linear_constant: Option<BigRational>,
}

impl RepetitivityProfile {
    pub fn to_json(&self) -> Value {
        json!({
            "samples": self.samples.iter().map(|(r, big)| json!({"r": r, "R": big})).collect::<Vec<_>>(),
            "linear_constant": self.linear_constant.as_ref().map(crate::patterns::fmt_rat),
        })
    }
}

fn search_cap(r: i64) -> i64 {
    16 * (r + 1) + 16
}

/// For each `r ≤ r_max`, the least `R` such that every legal radius-`R` patch contains every
/// legal radius-`r` patch.
pub fn repetitivity_profile(rule: &Arc<Rule>, r_max: i64) -> Result<RepetitivityProfile, SubstError> {
    let dim = rule.dim();
    let lang = Language::admitted(rule.clone());
    let mut samples = Vec::new();
    let mut start = 0;
    for r in 1..=r_max {
        let small = lang.entry(box_size(dim, r))?;
        let mut found = None;
        for big in start.max(r)..=search_cap(r) {
            let e = lang.entry(box_size(dim, big))?;
            let shape = Shape::sized(dim, e.size);
            let all = e.patches.iter().all(|v| {
                let p = Patch::new(shape, [0, 0], v.clone()).expect("sized");
                let seen: BTreeSet<Vec<Letter>> = windows_of(&p, small.size).into_iter().collect();
                seen.len() == small.len()
            });
            if all {
                found = Some(big);
                break;
            }
        }
        if let Some(b) = found {
            start = b;
        }
        samples.push((r, found));
    }
    let linear_constant = if super::is_primitive(rule) && samples.iter().all(|(_, b)| b.is_some()) {
        samples
            .iter()
            .map(|(r, b)| BigRational::new(BigInt::from(b.expect("checked")), BigInt::from(*r)))
            .max()
    } else {
        None
    };
    Ok(RepetitivityProfile { samples, linear_constant })
}

fn box_size(dim: usize, r: i64) -> [i64; 2] {
    if dim == 1 {
        [2 * r + 1, 1]
    } else {
        [2 * r + 1, 2 * r + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(rule: &Arc<Rule>, fps: &[FixedPoint], n: u32) -> Vec<String> {
        fps.iter().filter(|f| f.power == n).map(|f| f.seed.describe(rule.alphabet(), rule.dim())).collect()
    }

    #[test]
    fn mask5_fixed_points() {
        let r = Rule::builtin("mask5").unwrap();
        let fps = fixed_points(&r, 2).unwrap();
        assert_eq!(labels(&r, &fps, 1), vec!["S1@[2]", "S2@[2]"]);
        let two = labels(&r, &fps, 2);
        assert!(two.contains(&"S1@[4]".to_string()) && two.contains(&"S1@[20]".to_string()));
        assert!(!two.contains(&"S1@[12]".to_string()));
        // the constant pattern and five translates of (CBBBC)^∞ appear once each
        let a_runs = fps
            .iter()
            .filter(|f| {
                let p = f.pattern(&r);
                (-10..10).all(|x| p.value([x, 0]) == 2)
            })
            .count();
        assert_eq!(a_runs, 1);
        assert!(two.contains(&"S2.A".to_string()) && two.contains(&"C.S2".to_string()));
        assert!(!two.contains(&"A.A".to_string()) && !two.contains(&"C.C".to_string()));
    }

    #[test]
    fn thue_morse_and_doubling() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let fps = fixed_points(&tm, 2).unwrap();
        assert!(labels(&tm, &fps, 1).is_empty());
        assert_eq!(labels(&tm, &fps, 2), vec!["a.a", "a.b", "b.a", "b.b"]);
        let d = Rule::builtin("doubling").unwrap();
        let fps = fixed_points(&d, 1).unwrap();
        assert_eq!(labels(&d, &fps, 1), vec!["w.w"]);
    }

    #[test]
    fn fibonacci_corners() {
        let f = Rule::builtin("fibonacci").unwrap();
        let fps = fixed_points(&f, 2).unwrap();
        assert_eq!(labels(&f, &fps, 2), vec!["a.a", "b.a"]);
    }

    #[test]
    fn complexity_counts() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let c: Vec<usize> = (1..=3).map(|n| complexity(&tm, n, &Mode::Admitted).unwrap()).collect();
        assert_eq!(c, vec![2, 4, 6]);
        let d = Rule::builtin("doubling").unwrap();
        assert!((1..6).all(|n| complexity(&d, n, &Mode::Admitted).unwrap() == 1));
    }
}
