//! The power of `σ` fixing LI classes, and unique-composition checks on fibres.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;
use serde_json::{json, Value};

use super::fibre::Fibre;
use super::RecogError;
use crate::lattice::{coset_representatives, index_of_inflated, inflate_periods, PeriodGroup};
use crate::patterns::{
    ep1_form, fmt_rat, pattern_equal, pattern_translate, Ep1, LatticePattern, Letter, Shape,
};
use crate::subst::{fixed_points, substitute_pattern, Language, Mode, Rule};

/// Most patterns explored while closing the configuration map.
const MAX_REPRESENTATIVES: usize = 256;
/// Largest integer offset tried when matching two fibre elements.
const MATCH_RADIUS_1D: i64 = 64;
const MATCH_RADIUS_2D: i64 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiPower {
    pub power: u32,
    pub radius: i64,
    /// Number of distinct configurations reached.
    pub classes: usize,
    pub cycle_lengths: Vec<usize>,
    pub representatives: usize,
}

impl LiPower {
    pub fn to_json(&self) -> Value {
        json!({
            "power": self.power,
            "config_radius": self.radius,
            "classes": self.classes,
            "cycle_lengths": self.cycle_lengths,
            "representatives": self.representatives,
        })
    }
}

type Config = BTreeSet<Vec<Letter>>;

fn configuration(p: &LatticePattern, r: i64) -> Result<Config, RecogError> {
    let side = Shape::radius(r, p.dim()).size();
    Ok(Language::hull(p.clone()).entry(side)?.patches.clone())
}

fn representatives(rule: &Arc<Rule>, mode: &Mode) -> Result<Vec<LatticePattern>, RecogError> {
    match mode {
        Mode::Admitted => Ok(fixed_points(rule, 2)?.iter().map(|f| f.pattern(rule)).collect()),
        Mode::Hull(p) => {
            let mut out = vec![p.clone()];
            if let Some(Ep1::Eventual { left, right, .. }) = ep1_form(p) {
                out.push(LatticePattern::periodic(p.alphabet_arc(), left));
                out.push(LatticePattern::periodic(p.alphabet_arc(), right));
            }
            Ok(out)
        }
    }
}

/// `(n, classes, cycle lengths, patterns explored)` at one radius.
fn power_at(rule: &Arc<Rule>, reps: &[LatticePattern], r: i64) -> Result<(u32, usize, Vec<usize>, usize), RecogError> {
    let mut ids: BTreeMap<Config, usize> = BTreeMap::new();
    let mut image: Vec<Option<usize>> = Vec::new();
    let mut list: Vec<LatticePattern> = Vec::new();
    let id_of = |c: Config, ids: &mut BTreeMap<Config, usize>, image: &mut Vec<Option<usize>>| -> (usize, bool) {
        if let Some(&i) = ids.get(&c) {
            return (i, false);
        }
        let i = ids.len();
        ids.insert(c, i);
        image.push(None);
        (i, true)
    };
    let mut own: Vec<usize> = Vec::new();
    for p in reps {
        let (i, _) = id_of(configuration(p, r)?, &mut ids, &mut image);
        list.push(p.clone());
        own.push(i);
    }
    let mut k = 0;
    while k < list.len() {
        if list.len() > MAX_REPRESENTATIVES {
            return Err(RecogError::ConfigRadiusUnstable { radius: r, detail: "too many configurations".into() });
        }
        let img = substitute_pattern(rule, &list[k])?;
        let (j, fresh) = id_of(configuration(&img, r)?, &mut ids, &mut image);
        let i = own[k];
        match image[i] {
            Some(prev) if prev != j => {
                return Err(RecogError::ConfigRadiusUnstable {
                    radius: r,
                    detail: "patterns with equal configurations have different images".into(),
                })
            }
            _ => image[i] = Some(j),
        }
        if fresh {
            list.push(img);
            own.push(j);
        }
        k += 1;
    }
    let map: Vec<usize> = image.iter().map(|x| x.expect("every configuration has an image")).collect();
    // cycle lengths of the functional graph
    let mut lengths = BTreeSet::new();
    for start in 0..map.len() {
        let mut seen = BTreeMap::new();
        let mut v = start;
        let mut step = 0;
        while !seen.contains_key(&v) {
            seen.insert(v, step);
            v = map[v];
            step += 1;
        }
        lengths.insert(step - seen[&v]);
    }
    let n = lengths.iter().fold(1usize, |a, &b| a.lcm(&b));
    Ok((n as u32, map.len(), lengths.into_iter().collect(), list.len()))
}

/// Least `n` such that `σⁿ` acts as the identity on the configurations reachable from the
/// representatives of `mode`, checked again at `config_radius + 1`.
pub fn li_fixing_power(rule: &Arc<Rule>, mode: &Mode, config_radius: i64) -> Result<LiPower, RecogError> {
    if config_radius < 1 {
        return Err(RecogError::Subst(crate::subst::SubstError::Config("config radius must be at least 1".into())));
    }
    let reps = representatives(rule, mode)?;
    let (n, classes, cycle_lengths, explored) = power_at(rule, &reps, config_radius)?;
    let (n2, ..) = power_at(rule, &reps, config_radius + 1)?;
    if n != n2 {
        return Err(RecogError::ConfigRadiusUnstable {
            radius: config_radius,
            detail: format!("power {n} at radius {config_radius} but {n2} at radius {}", config_radius + 1),
        });
    }
    Ok(LiPower { power: n, radius: config_radius, classes, cycle_lengths, representatives: explored })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UcReport {
    pub count: usize,
    /// `[LⁿK : K]`.
    pub index: u64,
    /// `gᵢ ∈ K` with `Uᵢ = U₀ + L⁻ⁿgᵢ`.
    pub offsets: Vec<Vec<BigRational>>,
    /// Index into `representatives` of the coset of each `gᵢ`.
    pub cosets: Vec<usize>,
    pub representatives: Vec<Vec<BigRational>>,
    pub bijection: bool,
}

impl UcReport {
    pub fn to_json(&self) -> Value {
        let v = |x: &Vec<BigRational>| x.iter().map(fmt_rat).collect::<Vec<_>>();
        json!({
            "count": self.count,
            "index": self.index,
            "offsets": self.offsets.iter().map(v).collect::<Vec<_>>(),
            "cosets": self.cosets,
            "coset_representatives": self.representatives.iter().map(v).collect::<Vec<_>>(),
            "bijection": self.bijection,
        })
    }
}

/// Checks that every element of `fibre` is `U₀ + L⁻ⁿg` with `g ∈ K`, and matches the elements
/// against the cosets of `LⁿK` in `K`.
pub fn uc_verify(rule: &Rule, fibre: &Fibre, periods: &PeriodGroup) -> Result<UcReport, RecogError> {
    let n = fibre.power;
    let l = rule.expansion().ok_or_else(|| RecogError::UnsupportedSource("rule without expansion map".into()))?;
    let kn = rule
        .shape_pow(n)
        .ok_or_else(|| RecogError::UnsupportedSource("unique composition checks need constant-shape rules".into()))?;
    let index = index_of_inflated(periods, l, n)?;
    let reps = coset_representatives(periods, l, n)?;
    let inflated = inflate_periods(periods, &l.pow(n))?;
    let Some(u0) = fibre.elements.first() else {
        return Ok(UcReport { count: 0, index, offsets: Vec::new(), cosets: Vec::new(), representatives: reps, bijection: index == 0 });
    };
    let dim = u0.dim();
    let radius = if dim == 1 { MATCH_RADIUS_1D } else { MATCH_RADIUS_2D };
    let mut offsets = Vec::new();
    let mut cosets = Vec::new();
    for u in &fibre.elements {
        let frac: Vec<BigRational> = (0..dim).map(|i| &u.phase()[i] - &u0.phase()[i]).collect();
        let mut shifts: Vec<[i64; 2]> = Shape::radius(radius, dim).cells().collect();
        shifts.sort_by_key(|c| (c[0].abs().max(c[1].abs()), *c));
        let mut found = None;
        for m in shifts {
            let t: Vec<BigRational> = (0..dim).map(|i| &frac[i] + BigRational::from_integer(m[i].into())).collect();
            let g: Vec<BigRational> = (0..dim).map(|i| &t[i] * BigRational::from_integer(kn[i].into())).collect();
            if !g.iter().all(|x| x.is_integer()) || !periods.contains(&g) {
                continue;
            }
            if pattern_equal(&pattern_translate(u0, &t), u).value() {
                found = Some(g);
                break;
            }
        }
        let g = found.ok_or_else(|| {
            RecogError::UCViolation(format!("no g in K relates element {} to the first", offsets.len()))
        })?;
        let coset = reps
            .iter()
            .position(|r| {
                let d: Vec<BigRational> = (0..dim).map(|i| &g[i] - &r[i]).collect();
                inflated.contains(&d)
            })
            .ok_or_else(|| RecogError::UCViolation("offset outside every coset".into()))?;
        offsets.push(g);
        cosets.push(coset);
    }
    let distinct: BTreeSet<usize> = cosets.iter().copied().collect();
    let bijection = distinct.len() == cosets.len() && cosets.len() == reps.len();
    Ok(UcReport { count: fibre.len(), index, offsets, cosets, representatives: reps, bijection })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{HalfSpaces, Periodic, Region};
    use crate::quad::rat;
    use crate::recog::{compute_periods, enumerate_fibre, DEFAULT_WINDOW_SCHEDULE};

    #[test]
    fn li_powers() {
        let m = Rule::builtin("mask5").unwrap();
        assert_eq!(li_fixing_power(&m, &Mode::Admitted, 1).unwrap().power, 2);
        let tm = Rule::builtin("thue_morse").unwrap();
        assert_eq!(li_fixing_power(&tm, &Mode::Admitted, 1).unwrap().power, 1);
        let h = Rule::builtin("half_and_half").unwrap();
        let t = HalfSpaces::new(
            1,
            vec![
                Region { constraints: vec![([-1, 0], 1)], filler: Periodic::constant(1, 0) },
                Region { constraints: vec![([1, 0], 0)], filler: Periodic::constant(1, 1) },
            ],
        )
        .unwrap();
        let tp = LatticePattern::half_spaces(h.alphabet_arc(), t);
        let li = li_fixing_power(&h, &Mode::Hull(tp), 1).unwrap();
        assert_eq!((li.power, li.classes), (1, 3));
    }

    #[test]
    fn uc_on_mask5_pa() {
        let m = Rule::builtin("mask5").unwrap();
        let pa = LatticePattern::periodic(m.alphabet_arc(), Periodic::constant(1, 2));
        let lang = Language::admitted(m.clone());
        let k = compute_periods(&pa, 64).unwrap().group;
        let f = enumerate_fibre(&m, &pa, 2, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        let rep = uc_verify(&m, &f, &k).unwrap();
        assert_eq!((rep.count, rep.index), (25, 25));
        assert!(rep.bijection);
        assert!(rep.offsets.iter().all(|g| g[0].is_integer()));
        // at n = 1 the pairwise relation holds but 25 elements meet only 5 cosets
        let f1 = enumerate_fibre(&m, &pa, 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        let rep1 = uc_verify(&m, &f1, &k).unwrap();
        assert_eq!((rep1.count, rep1.index), (25, 5));
        assert!(!rep1.bijection);
        assert!(rep1.offsets.iter().all(|g| g[0].is_integer()));
        assert_eq!(rep1.offsets.iter().filter(|g| g[0] == rat(1, 1)).count(), 1);
    }
}
