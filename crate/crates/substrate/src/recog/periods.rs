//! Period certificates by close repeats, and period groups from autocorrelation survivors.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::cutting::{recognisability_radius, RecognisabilityReport};
use super::RecogError;
use crate::lattice::{check_invariance, hnf, PeriodCertificate, PeriodGroup};
use crate::patterns::{
    add, ep1_form, extract_patch, Cell, Ep1, LatticePattern, Letter, Patch, Periodic, Shape, Source,
};
use crate::subst::{is_primitive, Language};

pub const APPEARANCE_CAP_1D: i64 = 4096;
pub const APPEARANCE_CAP_2D: i64 = 128;
pub const DEFAULT_NORM_BOUND: i64 = 64;

/// Radius of the quick witness scan run before any certificate is attempted.
const SCAN_RADIUS: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeriodVerdict {
    Certified {
        is_period: bool,
        /// Appearance radius `N` for positive verdicts; the scan radius otherwise.
        radius: i64,
        witness: Option<Cell>,
        method: &'static str,
    },
    Unknown { reason: String },
}

impl PeriodVerdict {
    pub fn is_certified_period(&self) -> bool {
        matches!(self, PeriodVerdict::Certified { is_period: true, .. })
    }
}

fn norm(u: Cell) -> i64 {
    u[0].abs().max(u[1].abs())
}

fn box_shape(dim: usize, r: i64) -> Shape {
    Shape::radius(r, dim)
}

/// First cell `x + v`, `v` in the box of radius `r`, where `P[x+v] ≠ P[x+v+u]`.
fn scan(p: &LatticePattern, u: Cell, x: Cell, r: i64) -> Option<Cell> {
    let s = box_shape(p.dim(), r);
    let a = extract_patch(p, x, s);
    let b = extract_patch(p, add(x, u), s);
    let found = s.cells().find(|&c| a.get(c) != b.get(c));
    found.map(|c| add(x, c))
}

/// Entries of a centred window of radius `r` around `c` inside `big` (a patch centred at 0).
fn window_at(big: &Patch, c: Cell, r: i64) -> Vec<Letter> {
    let dim = big.dim();
    Shape::radius(r, dim).cells().map(|v| big.get(add(c, v)).expect("inside")).collect()
}

fn ring(dim: usize, d: i64) -> Vec<Cell> {
    if dim == 1 {
        return if d == 0 { vec![[0, 0]] } else { vec![[-d, 0], [d, 0]] };
    }
    Shape::radius(d, 2).cells().filter(|&c| norm(c) == d).collect()
}

/// Least `N` such that every legal window of radius `r` occurs centred within `N` of `x`.
fn appearance_radius(p: &LatticePattern, x: Cell, r: i64, cap: i64) -> Result<Option<i64>, String> {
    let dim = p.dim();
    let lang = Language::hull(p.clone());
    let side = 2 * r + 1;
    let entry = lang.entry([side, side]).map_err(|e| e.to_string())?;
    let mut found: BTreeSet<Vec<Letter>> = BTreeSet::new();
    let mut radius = 16.min(cap);
    let mut next_ring = 0;
    loop {
        let big = extract_patch(p, x, Shape::radius(radius + r, dim)).with_anchor([0, 0]);
        for d in next_ring..=radius {
            for c in ring(dim, d) {
                let w = window_at(&big, c, r);
                if !entry.patches.contains(&w) {
                    return Err("pattern has a window outside its computed hull language".into());
                }
                found.insert(w);
            }
            if found.len() == entry.len() {
                return Ok(Some(d));
            }
        }
        next_ring = radius + 1;
        if radius >= cap {
            return Ok(None);
        }
        radius = (radius * 2).min(cap);
    }
}

fn integral(u: &[BigRational], dim: usize) -> Option<Cell> {
    let mut c = [0i64; 2];
    for i in 0..dim {
        if !u[i].is_integer() {
            return None;
        }
        c[i] = u[i].to_integer().to_i64()?;
    }
    Some(c)
}

/// Decides whether `u` is a period of `P` from the close-repeat bound at `x`.
pub fn certify_period(p: &LatticePattern, u: &[BigRational], x: Cell) -> PeriodVerdict {
    let dim = p.dim();
    if u.len() < dim {
        return PeriodVerdict::Unknown { reason: "vector has the wrong dimension".into() };
    }
    let Some(u) = integral(u, dim) else {
        // a non-integral translate has a different phase
        return PeriodVerdict::Certified { is_period: false, radius: 0, witness: None, method: "phase" };
    };
    if u == [0, 0] {
        return PeriodVerdict::Unknown { reason: "zero vector".into() };
    }
    if let Some(w) = scan(p, u, x, SCAN_RADIUS) {
        return PeriodVerdict::Certified { is_period: false, radius: SCAN_RADIUS, witness: Some(w), method: "witness" };
    }
    let exact = match p.source() {
        Source::Periodic(q) => Some((q.is_period(u), q.det())),
        _ => match ep1_form(p) {
            Some(Ep1::Periodic(q)) => Some((q.is_period(u), q.det())),
            Some(Ep1::Eventual { left, lo, hi, right, .. }) => {
                Some((false, lo.abs().max(hi.abs()) + left.det() + right.det() + norm(u) + x[0].abs()))
            }
            None => None,
        },
    };
    if let Some((is_period, reach)) = exact {
        let witness = if is_period { None } else { scan(p, u, x, reach.max(SCAN_RADIUS)) };
        return PeriodVerdict::Certified { is_period, radius: reach, witness, method: "exact source" };
    }
    let cap = if dim == 1 { APPEARANCE_CAP_1D } else { APPEARANCE_CAP_2D };
    match appearance_radius(p, x, norm(u), cap) {
        Err(reason) => PeriodVerdict::Unknown { reason },
        Ok(None) => PeriodVerdict::Unknown { reason: format!("appearance radius exceeds cap {cap}") },
        Ok(Some(n)) => match scan(p, u, x, n) {
            None => PeriodVerdict::Certified { is_period: true, radius: n, witness: None, method: "close repeat" },
            Some(w) => PeriodVerdict::Certified { is_period: false, radius: n, witness: Some(w), method: "witness" },
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodReport {
    pub group: PeriodGroup,
    /// Candidates surviving autocorrelation.
    pub survivors: usize,
    pub unknown: Vec<Cell>,
    /// `Lᴺ·K ⊆ K` for `σᴺ`-fixed points; `None` when not applicable.
    pub invariant: Option<bool>,
}

fn lattice_gens(dim: usize, cells: &[Cell]) -> Vec<Vec<i64>> {
    cells.iter().map(|c| c[..dim].to_vec()).collect()
}

fn exact_group(dim: usize, gens: Vec<Vec<i64>>, method: &str) -> Result<PeriodGroup, RecogError> {
    let cert = PeriodCertificate::Certified { bound: 0, method: method.into(), complete: true };
    Ok(PeriodGroup::lattice_only(dim, gens, cert)?)
}

fn candidates(dim: usize, bound: i64) -> Vec<Cell> {
    let mut out: Vec<Cell> = if dim == 1 {
        (1..=bound).map(|a| [a, 0]).collect()
    } else {
        Shape::radius(bound, 2).cells().filter(|c| c[0] > 0 || (c[0] == 0 && c[1] > 0)).collect()
    };
    out.sort_by_key(|&c| (norm(c), c));
    out
}

/// Letters that occur near the origin of `P`.
fn letters_near(p: &LatticePattern, r: i64) -> BTreeSet<Letter> {
    extract_patch(p, [0, 0], Shape::radius(r, p.dim())).values().iter().copied().collect()
}

/// Why a substitutive pattern without short periods has no periods at all, if a reason is found.
fn aperiodicity_argument(p: &LatticePattern) -> Option<String> {
    let Source::Substitutive(s) = p.source() else { return None };
    let rule = &s.rule;
    if p.dim() == 1 {
        let seen = letters_near(p, 4 * SCAN_RADIUS);
        for &b in &seen {
            if !rule.is_growing(b) {
                continue;
            }
            let mut reach: BTreeSet<Letter> = BTreeSet::from([b]);
            let mut stack = vec![b];
            while let Some(a) = stack.pop() {
                for c in rule.successors(a) {
                    if reach.insert(c) {
                        stack.push(c);
                    }
                }
            }
            if let Some(&missing) = seen.iter().find(|l| !reach.contains(l)) {
                let a = rule.alphabet();
                return Some(format!(
                    "iterates of {} grow without ever containing {}",
                    a.name(b),
                    a.name(missing)
                ));
            }
        }
    }
    if is_primitive(rule) {
        let lang = Language::admitted(rule.clone());
        if let Ok(RecognisabilityReport::Found { radius }) = recognisability_radius(rule, 16, &lang) {
            return Some(format!("primitive rule recognisable at radius {radius}"));
        }
    }
    None
}

/// The period group of `P`: candidates up to `norm_bound` filtered by autocorrelation, then certified.
pub fn compute_periods(p: &LatticePattern, norm_bound: i64) -> Result<PeriodReport, RecogError> {
    let dim = p.dim();
    let cells_to_gens = |cells: &[Cell]| lattice_gens(dim, cells);
    match p.source() {
        Source::Periodic(q) => {
            let group = exact_group(dim, cells_to_gens(&q.lattice()), "periodic source")?;
            return Ok(PeriodReport { group, survivors: 0, unknown: Vec::new(), invariant: None });
        }
        Source::Derived(_) => {}
        _ => {
            if let Some(ep) = ep1_form(p) {
                let group = match ep {
                    Ep1::Periodic(q) => exact_group(dim, cells_to_gens(&q.lattice()), "periodic source")?,
                    Ep1::Eventual { .. } => exact_group(dim, Vec::new(), "eventually periodic normal form")?,
                };
                return Ok(PeriodReport { group, survivors: 0, unknown: Vec::new(), invariant: None });
            }
        }
    }
    let bound = norm_bound.max(1);
    let w = if dim == 1 { 2 * bound + 32 } else { bound + 16 };
    let big = extract_patch(p, [0, 0], Shape::radius(w + bound, dim)).with_anchor([0, 0]);
    let inner = Shape::radius(w, dim);
    let survivors: Vec<Cell> = candidates(dim, bound)
        .into_iter()
        .filter(|&u| inner.cells().all(|v| big.get(v) == big.get(add(v, u))))
        .collect();
    let mut certified: Vec<Vec<i64>> = Vec::new();
    let mut unknown = Vec::new();
    let mut current = PeriodGroup::trivial(dim, PeriodCertificate::Declared { note: "partial".into() });
    for &u in &survivors {
        if current.contains_int(&u[..dim]) {
            continue;
        }
        let uq: Vec<BigRational> = u.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        match certify_period(p, &uq, [0, 0]) {
            PeriodVerdict::Certified { is_period: true, .. } => {
                certified.push(u[..dim].to_vec());
                let h = hnf(&certified)?;
                certified = h.basis;
                current = PeriodGroup::lattice_only(dim, certified.clone(), current.certificate.clone())?;
            }
            PeriodVerdict::Certified { .. } => {}
            PeriodVerdict::Unknown { .. } => unknown.push(u),
        }
    }
    let rank = certified.len();
    let (complete, note) = if !unknown.is_empty() {
        (false, "undecided candidates remain".to_string())
    } else if rank == dim {
        let spread: i64 = certified.iter().map(|g| g.iter().map(|x| x.abs()).max().unwrap_or(0)).sum();
        (spread <= bound, format!("full rank, generator spread {spread}"))
    } else if rank == 0 {
        match aperiodicity_argument(p) {
            Some(why) => (true, why),
            None => (false, "no aperiodicity argument".into()),
        }
    } else {
        (false, "partial rank".into())
    };
    let cert = PeriodCertificate::Certified {
        bound: bound as u64,
        method: format!("autocorrelation and close-repeat certificates; {note}"),
        complete,
    };
    let group = PeriodGroup::lattice_only(dim, certified, cert)?;
    let invariant = match p.source() {
        Source::Substitutive(s) => s.rule.expansion().map(|l| check_invariance(&group, &l.pow(s.power))),
        _ => None,
    };
    Ok(PeriodReport { group, survivors: survivors.len(), unknown, invariant })
}

/// Replaces a substitutive source by a periodic one when its period lattice is certified complete
/// and of full rank.
pub fn canonical_pattern(p: &LatticePattern) -> Result<LatticePattern, RecogError> {
    if !matches!(p.source(), Source::Substitutive(_)) {
        return Ok(p.clone());
    }
    let rep = compute_periods(p, DEFAULT_NORM_BOUND)?;
    let complete = matches!(rep.group.certificate, PeriodCertificate::Certified { complete: true, .. });
    let dim = p.dim();
    if !complete || rep.group.lattice().len() != dim {
        return Ok(p.clone());
    }
    let gens: Vec<Cell> = rep.group.lattice().iter().map(|g| [g[0], if dim == 2 { g[1] } else { 0 }]).collect();
    let per = Periodic::from_fn(dim, &gens, |c| p.value(c))?;
    Ok(LatticePattern::new(dim, p.alphabet_arc(), Source::Periodic(Arc::new(per)), p.phase().clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::rat;
    use crate::subst::{Rule, Seed};

    fn int(v: i64) -> Vec<BigRational> {
        vec![rat(v, 1), rat(0, 1)]
    }

    fn mask5_pb() -> LatticePattern {
        let r = Rule::builtin("mask5").unwrap();
        LatticePattern::substitutive(r, 2, Seed::Interior { letter: 4, offset: [10, 0] })
    }

    #[test]
    fn close_repeats_on_pb() {
        let pb = mask5_pb();
        let w: Vec<_> = (0..5).map(|x| pb.value([x, 0])).collect();
        assert_eq!(pb.alphabet().render(&w), "C B B B C");
        match certify_period(&pb, &int(5), [0, 0]) {
            PeriodVerdict::Certified { is_period: true, method, .. } => assert_eq!(method, "close repeat"),
            v => panic!("{v:?}"),
        }
        match certify_period(&pb, &int(1), [0, 0]) {
            PeriodVerdict::Certified { is_period: false, witness: Some(c), .. } => {
                assert_ne!(pb.value(c), pb.value([c[0] + 1, 0]))
            }
            v => panic!("{v:?}"),
        }
        let rep = compute_periods(&pb, 64).unwrap();
        assert_eq!(rep.group.lattice(), &[vec![5]]);
        assert!(matches!(rep.group.certificate, PeriodCertificate::Certified { complete: true, .. }));
        assert_eq!(rep.invariant, Some(true));
        let c = canonical_pattern(&pb).unwrap();
        assert_eq!(c.source().kind(), "periodic");
    }

    #[test]
    fn thue_morse_is_aperiodic() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let p = LatticePattern::substitutive(tm, 2, Seed::Corner { letters: vec![0, 0] });
        for u in 1..=20 {
            assert!(matches!(certify_period(&p, &int(u), [0, 0]), PeriodVerdict::Certified { is_period: false, .. }));
        }
        let rep = compute_periods(&p, 64).unwrap();
        assert!(rep.group.is_trivial());
        assert!(matches!(rep.group.certificate, PeriodCertificate::Certified { complete: true, .. }));
    }

    #[test]
    fn mask5_fixed_point_is_aperiodic() {
        let r = Rule::builtin("mask5").unwrap();
        let p = LatticePattern::substitutive(r, 1, Seed::Interior { letter: 0, offset: [2, 0] });
        let rep = compute_periods(&p, 64).unwrap();
        assert!(rep.group.is_trivial());
        match &rep.group.certificate {
            PeriodCertificate::Certified { complete, method, .. } => {
                assert!(complete);
                assert!(method.contains("grow"), "{method}");
            }
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn phase_shifts_are_not_periods() {
        let pb = mask5_pb();
        let v = certify_period(&pb, &[rat(1, 2), rat(0, 1)], [0, 0]);
        assert!(matches!(v, PeriodVerdict::Certified { is_period: false, .. }));
    }
}
