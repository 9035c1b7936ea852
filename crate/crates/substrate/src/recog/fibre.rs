//! Pre-images of a pattern under `σⁿ`, one phase class at a time.
//!
//! In 1-D, periodic and eventually periodic anchors are handled exactly: the candidate letters of a
//! phase class form a constraint graph on legal words whose bi-infinite walks are the fibre.
//! Substitutive anchors are handled by explicit pre-images checked against windowed counts.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde_json::{json, Value};

use super::periods::{canonical_pattern, compute_periods, DEFAULT_NORM_BOUND};
use super::RecogError;
use crate::lattice::coset_representatives;
use crate::patterns::{
    ep1_form, extract_patch, fmt_rat, pattern_equal, pattern_translate, zero_phase, Cell, Ep1, LatticePattern,
    Letter, Periodic, Phase, Shape, Source,
};
use crate::subst::{seed_drift, substitute_pattern, Language, Rule};

pub const DEFAULT_WINDOW_SCHEDULE: [i64; 6] = [8, 16, 32, 64, 128, 256];

/// Largest number of walks or window assignments enumerated per phase class.
const PATH_CAP: usize = 100_000;
/// Radius of the substitute-and-compare check for elements without an exact comparison.
const VERIFY_RADIUS: i64 = 50;
/// Word length of the constraint graph for windowed 1-D counting.
const WINDOWED_WORD: i64 = 12;
/// Largest window radius used for 2-D counting.
const MAX_WINDOW_2D: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassEvidence {
    pub phase: Phase,
    pub count: usize,
    /// `dead`, `cycles` (1-D walks) or `forced` (every cell has one candidate).
    pub kind: &'static str,
    /// Lengths of the cycles the walks settle into on the right.
    pub cycle_lengths: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Fibre {
    pub power: u32,
    pub elements: Vec<LatticePattern>,
    /// Window size (1-D walks) or radius at which the count stabilized.
    pub window: i64,
    pub method: &'static str,
    pub classes: Vec<ClassEvidence>,
}

impl Fibre {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let phase = |p: &Phase, d: usize| p[..d].iter().map(fmt_rat).collect::<Vec<_>>();
        let dim = self.elements.first().map_or(1, |e| e.dim());
        json!({
            "power": self.power,
            "count": self.len(),
            "method": self.method,
            "window": self.window,
            "elements": self.elements.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
            "classes": self.classes.iter().filter(|c| c.count > 0).map(|c| json!({
                "phase": phase(&c.phase, dim),
                "count": c.count,
                "kind": c.kind,
                "cycle_lengths": c.cycle_lengths,
            })).collect::<Vec<_>>(),
            "dead_classes": self.classes.iter().filter(|c| c.count == 0).count(),
        })
    }
}

/// The phase of a pre-image in class `c`: `(φ + c)/kⁿ` per axis.
fn class_phase(phi: &Phase, c: Cell, kn: [i64; 2], dim: usize) -> Phase {
    let mut out = zero_phase();
    for i in 0..dim {
        out[i] = (&phi[i] + BigRational::from_integer(c[i].into())) / BigRational::from_integer(kn[i].into());
    }
    out
}

/// `σⁿ(Q)`.
fn substitute_n(rule: &Arc<Rule>, q: &LatticePattern, n: u32) -> Result<LatticePattern, RecogError> {
    let mut out = q.clone();
    for _ in 0..n {
        out = substitute_pattern(rule, &out)?;
    }
    Ok(out)
}

fn maps_onto(rule: &Arc<Rule>, q: &LatticePattern, p: &LatticePattern, n: u32) -> Result<bool, RecogError> {
    let img = substitute_n(rule, q, n)?;
    let eq = pattern_equal(&img, p);
    if eq.is_certified() {
        return Ok(eq.value());
    }
    Ok(crate::patterns::find_difference(&img, p, VERIFY_RADIUS).is_none())
}

fn sort_key(p: &LatticePattern) -> (Phase, Cell, Vec<Letter>) {
    let shift = match p.source() {
        Source::Substitutive(s) => s.shift,
        _ => [0, 0],
    };
    let w = extract_patch(p, [0, 0], Shape::radius(8, p.dim())).into_values();
    (p.phase().clone(), shift, w)
}

fn finish(mut elements: Vec<LatticePattern>) -> Vec<LatticePattern> {
    elements.sort_by_cached_key(sort_key);
    let mut out: Vec<LatticePattern> = Vec::new();
    for e in elements {
        if !out.iter().any(|o| pattern_equal(o, &e).value()) {
            out.push(e);
        }
    }
    out
}

/// The pre-images of `P` under `σⁿ` inside the space whose language is `lang`.
pub fn enumerate_fibre(
    rule: &Arc<Rule>,
    p: &LatticePattern,
    n: u32,
    schedule: &[i64],
    lang: &Language,
) -> Result<Fibre, RecogError> {
    if n == 0 {
        return Err(RecogError::Subst(crate::subst::SubstError::Config("power must be at least 1".into())));
    }
    if schedule.is_empty() {
        return Err(RecogError::Subst(crate::subst::SubstError::Config("empty window schedule".into())));
    }
    if rule.dim() != p.dim() {
        return Err(RecogError::UnsupportedSource("pattern and rule dimensions differ".into()));
    }
    if rule.constant_shape().is_none() {
        return Err(RecogError::UnsupportedSource("fibres under word rules of varying length".into()));
    }
    let p = canonical_pattern(p)?;
    match (p.dim(), p.source()) {
        (1, Source::Periodic(_) | Source::HalfSpaces(_)) => {
            let ep = ep1_form(&p).expect("1-D periodic or half-space source");
            walks_1d(rule, &p, &ep, n, schedule, lang)
        }
        (_, Source::Substitutive(_)) => windowed(rule, &p, n, schedule, lang),
        (_, Source::Derived(_)) => Err(RecogError::UnsupportedSource("derived patterns".into())),
        _ => Err(RecogError::UnsupportedSource("2-D periodic and half-space anchors".into())),
    }
}

fn images_n(rule: &Rule, n: u32) -> Vec<Vec<Letter>> {
    rule.alphabet().iter().map(|a| rule.power_image(a, n).into_values()).collect()
}

fn k_pow(rule: &Rule, n: u32) -> [i64; 2] {
    let k = rule.constant_shape().expect("constant shape");
    let d = rule.dim();
    [k[0].pow(n), if d == 2 { k[1].pow(n) } else { 1 }]
}

// ---------------------------------------------------------------------------------------------
// 1-D exact walks

/// Candidate letters per position for one phase class of an eventually periodic anchor.
struct Candidates<'a> {
    ep: &'a Ep1,
    images: &'a [Vec<Letter>],
    kn: i64,
    class: i64,
    zones: Zones,
    memo: std::cell::RefCell<HashMap<i64, Vec<Letter>>>,
}

#[derive(Clone, Copy, Debug)]
enum Zones {
    Periodic { period: i64 },
    /// Positions `≤ left` see only the left tail, positions `≥ right` only the right tail.
    Eventual { left: i64, left_period: i64, right: i64, right_period: i64 },
}

impl Candidates<'_> {
    fn canonical(&self, x: i64) -> i64 {
        match self.zones {
            Zones::Periodic { period } => x.rem_euclid(period),
            Zones::Eventual { left, left_period, right, right_period } => {
                if x <= left {
                    left - (left - x).rem_euclid(left_period)
                } else if x >= right {
                    right + (x - right).rem_euclid(right_period)
                } else {
                    x
                }
            }
        }
    }

    fn at(&self, x: i64) -> Vec<Letter> {
        let x = self.canonical(x);
        if let Some(v) = self.memo.borrow().get(&x) {
            return v.clone();
        }
        let base = self.kn * x + self.class;
        let block: Vec<Letter> = (0..self.kn).map(|r| self.ep.value(base + r)).collect();
        let out: Vec<Letter> =
            (0..self.images.len()).filter(|&a| self.images[a] == block).map(|a| a as Letter).collect();
        self.memo.borrow_mut().insert(x, out.clone());
        out
    }
}

/// Legal words at phases of a periodic zone, linked by legal one-letter extensions.
struct ZoneGraph {
    /// Times `t ≡ anchor + phase (mod period)`.
    anchor: i64,
    period: i64,
    verts: Vec<(i64, Vec<Letter>)>,
    index: HashMap<(i64, Vec<Letter>), usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl ZoneGraph {
    fn phase_of(&self, t: i64) -> i64 {
        (t - self.anchor).rem_euclid(self.period)
    }

    fn build(
        anchor: i64,
        period: i64,
        words: &BTreeSet<Vec<Letter>>,
        legal: &BTreeSet<Vec<Letter>>,
        cands: &Candidates,
    ) -> ZoneGraph {
        let w = words.iter().next().map_or(0, Vec::len) as i64;
        let allowed: Vec<Vec<Letter>> = (0..period).map(|q| cands.at(anchor + q)).collect();
        let at_phase = |q: i64| &allowed[q.rem_euclid(period) as usize];
        let mut g = ZoneGraph { anchor, period, verts: Vec::new(), index: HashMap::new(), succ: Vec::new(), pred: Vec::new() };
        for ph in 0..period {
            for word in words {
                let ok = word.iter().enumerate().all(|(k, l)| at_phase(ph - w + 1 + k as i64).contains(l));
                if ok {
                    g.index.insert((ph, word.clone()), g.verts.len());
                    g.verts.push((ph, word.clone()));
                }
            }
        }
        g.succ = vec![Vec::new(); g.verts.len()];
        g.pred = vec![Vec::new(); g.verts.len()];
        for v in 0..g.verts.len() {
            let (ph, word) = g.verts[v].clone();
            let next = (ph + 1).rem_euclid(period);
            for &b in at_phase(next) {
                let mut ext = word.clone();
                ext.push(b);
                if !legal.contains(&ext) {
                    continue;
                }
                if let Some(&u) = g.index.get(&(next, ext[1..].to_vec())) {
                    g.succ[v].push(u);
                    g.pred[u].push(v);
                }
            }
        }
        g
    }

    /// Vertices with an infinite path forwards (`forward`) or backwards.
    fn infinite(&self, forward: bool) -> Vec<bool> {
        let (out, inn) = if forward { (&self.succ, &self.pred) } else { (&self.pred, &self.succ) };
        let mut deg: Vec<usize> = out.iter().map(Vec::len).collect();
        let mut alive = vec![true; self.verts.len()];
        let mut stack: Vec<usize> = (0..deg.len()).filter(|&v| deg[v] == 0).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &u in &inn[v] {
                if alive[u] {
                    deg[u] -= 1;
                    if deg[u] == 0 {
                        stack.push(u);
                    }
                }
            }
        }
        alive
    }

    /// Vertices reachable from `start` inside `within`, following edges forwards or backwards.
    fn reach(&self, start: &[usize], within: &[bool], forward: bool) -> Vec<bool> {
        let adj = if forward { &self.succ } else { &self.pred };
        let mut seen = vec![false; self.verts.len()];
        let mut stack: Vec<usize> = start.iter().copied().filter(|&v| within[v]).collect();
        for &v in &stack {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if within[u] && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}

/// Cycle data of the subgraph `keep`: `None` when it carries infinitely many walks.
struct Cycles {
    on_cycle: Vec<bool>,
    /// For vertices on a cycle, the next vertex along it.
    next: Vec<usize>,
}

fn strongly_connected(g: &ZoneGraph, keep: &[bool]) -> Vec<usize> {
    // iterative Tarjan
    let n = g.verts.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if !keep[root] || index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < g.succ[v].len() {
                let u = g.succ[v][*i];
                *i += 1;
                if !keep[u] {
                    continue;
                }
                if index[u] == usize::MAX {
                    index[u] = counter;
                    low[u] = counter;
                    counter += 1;
                    stack.push(u);
                    on_stack[u] = true;
                    work.push((u, 0));
                } else if on_stack[u] {
                    low[v] = low[v].min(index[u]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let u = stack.pop().expect("tarjan stack");
                        on_stack[u] = false;
                        comp[u] = ncomp;
                        if u == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

fn cycles(g: &ZoneGraph, keep: &[bool]) -> Option<Cycles> {
    let n = g.verts.len();
    let comp = strongly_connected(g, keep);
    let mut size: HashMap<usize, usize> = HashMap::new();
    let mut internal: HashMap<usize, usize> = HashMap::new();
    for v in (0..n).filter(|&v| keep[v]) {
        *size.entry(comp[v]).or_default() += 1;
        for &u in &g.succ[v] {
            if keep[u] && comp[u] == comp[v] {
                *internal.entry(comp[v]).or_default() += 1;
            }
        }
    }
    let cyclic = |c: usize| internal.get(&c).copied().unwrap_or(0) > 0;
    for (&c, &s) in &size {
        if cyclic(c) && internal[&c] != s {
            return None;
        }
    }
    let on_cycle: Vec<bool> = (0..n).map(|v| keep[v] && cyclic(comp[v])).collect();
    // no walk may pass from one cycle to another
    for v in (0..n).filter(|&v| on_cycle[v]) {
        let seen = g.reach(&[v], keep, true);
        if (0..n).any(|u| seen[u] && on_cycle[u] && comp[u] != comp[v]) {
            return None;
        }
    }
    let next = (0..n)
        .map(|v| {
            if on_cycle[v] {
                *g.succ[v].iter().find(|&&u| keep[u] && comp[u] == comp[v]).expect("cycle successor")
            } else {
                usize::MAX
            }
        })
        .collect();
    Some(Cycles { on_cycle, next })
}

fn cycle_from(g: &ZoneGraph, cyc: &Cycles, v: usize) -> Vec<Letter> {
    let mut out = Vec::new();
    let mut u = v;
    loop {
        out.push(*g.verts[u].1.last().expect("nonempty word"));
        u = cyc.next[u];
        if u == v {
            return out;
        }
    }
}

fn extend(
    layer: &BTreeSet<Vec<Letter>>,
    cands: &[Letter],
    legal: &BTreeSet<Vec<Letter>>,
) -> BTreeSet<Vec<Letter>> {
    let mut out = BTreeSet::new();
    for u in layer {
        for &b in cands {
            let mut ext = u.clone();
            ext.push(b);
            if legal.contains(&ext) {
                out.insert(ext[1..].to_vec());
            }
        }
    }
    out
}

fn succeeds(u: &[Letter], v: &[Letter], legal: &BTreeSet<Vec<Letter>>) -> bool {
    u[1..] == v[..v.len() - 1] && {
        let mut ext = u.to_vec();
        ext.push(*v.last().expect("nonempty"));
        legal.contains(&ext)
    }
}

/// Result for one phase class: the element letters plus cycle evidence, or `None` if infinite.
struct ClassWalks {
    patterns: Vec<Ep1>,
    cycle_lengths: Vec<usize>,
}

fn class_walks(
    cands: &Candidates,
    words: &BTreeSet<Vec<Letter>>,
    legal: &BTreeSet<Vec<Letter>>,
) -> Result<Option<ClassWalks>, RecogError> {
    let w = words.iter().next().map_or(0, Vec::len) as i64;
    let (gl, gr, xl, xr1) = match cands.zones {
        Zones::Periodic { period } => {
            let g = ZoneGraph::build(0, period, words, legal, cands);
            let g2 = ZoneGraph::build(0, period, words, legal, cands);
            (g, g2, 0, 0)
        }
        Zones::Eventual { left, left_period, right, right_period } => {
            let gl = ZoneGraph::build(left - left_period + 1, left_period, words, legal, cands);
            let gr = ZoneGraph::build(right, right_period, words, legal, cands);
            (gl, gr, left, right + w - 1)
        }
    };
    let past = gl.infinite(false);
    let future = gr.infinite(true);
    // core layers from xl to xr1
    let mut layers: Vec<BTreeSet<Vec<Letter>>> = Vec::new();
    let start: BTreeSet<Vec<Letter>> = gl
        .verts
        .iter()
        .enumerate()
        .filter(|(v, (ph, _))| past[*v] && *ph == gl.phase_of(xl))
        .map(|(_, (_, word))| word.clone())
        .collect();
    layers.push(start);
    for t in xl + 1..=xr1 {
        let next = extend(layers.last().expect("layer"), &cands.at(t), legal);
        layers.push(next);
    }
    let end_phase = gr.phase_of(xr1);
    let last = layers.len() - 1;
    layers[last].retain(|word| gr.index.get(&(end_phase, word.clone())).is_some_and(|&v| future[v]));
    for i in (0..last).rev() {
        let (a, b) = layers.split_at_mut(i + 1);
        let nxt = &b[0];
        a[i].retain(|u| nxt.iter().any(|v| succeeds(u, v, legal)));
    }
    let start_ids: Vec<usize> = layers[0].iter().map(|word| gl.index[&(gl.phase_of(xl), word.clone())]).collect();
    let end_ids: Vec<usize> = layers[last].iter().map(|word| gr.index[&(end_phase, word.clone())]).collect();
    let rel_l = gl.reach(&start_ids, &past, false);
    let rel_r = gr.reach(&end_ids, &future, true);
    let (Some(cyc_l), Some(cyc_r)) = (cycles(&gl, &rel_l), cycles(&gr, &rel_r)) else {
        return Ok(None);
    };
    let nl = rel_l.iter().filter(|&&b| b).count() as i64;
    let nr = rel_r.iter().filter(|&&b| b).count() as i64;
    let t0 = xl - 2 * nl - 1;
    let t1 = xr1 + 2 * nr + 1;
    let allowed = |t: i64, word: &Vec<Letter>| -> bool {
        if t <= xl {
            let Some(&v) = gl.index.get(&(gl.phase_of(t), word.clone())) else { return false };
            if !rel_l[v] || (t == t0 && !cyc_l.on_cycle[v]) {
                return false;
            }
            if t < xl {
                return true;
            }
        }
        if t >= xr1 {
            let Some(&v) = gr.index.get(&(gr.phase_of(t), word.clone())) else { return false };
            if !rel_r[v] || (t == t1 && !cyc_r.on_cycle[v]) {
                return false;
            }
            if t > xr1 {
                return true;
            }
        }
        layers[(t - xl) as usize].contains(word)
    };
    let mut lay: Vec<BTreeSet<Vec<Letter>>> = Vec::new();
    let first: BTreeSet<Vec<Letter>> = gl
        .verts
        .iter()
        .filter(|(ph, word)| *ph == gl.phase_of(t0) && allowed(t0, word))
        .map(|(_, word)| word.clone())
        .collect();
    lay.push(first);
    for t in t0 + 1..=t1 {
        let mut next = extend(lay.last().expect("layer"), &cands.at(t), legal);
        next.retain(|word| allowed(t, word));
        lay.push(next);
    }
    let top = lay.len() - 1;
    for i in (0..top).rev() {
        let (a, b) = lay.split_at_mut(i + 1);
        let nxt = &b[0];
        a[i].retain(|u| nxt.iter().any(|v| succeeds(u, v, legal)));
    }
    // depth-first enumeration of the surviving paths
    let mut paths: Vec<Vec<Vec<Letter>>> = Vec::new();
    let mut stack: Vec<Vec<Vec<Letter>>> = lay[0].iter().map(|u| vec![u.clone()]).collect();
    while let Some(path) = stack.pop() {
        let i = path.len();
        if i == lay.len() {
            paths.push(path);
            if paths.len() > PATH_CAP {
                return Err(RecogError::NotStabilized { lower_bound: paths.len(), window: w + 1 });
            }
            continue;
        }
        let u = path.last().expect("nonempty path");
        for v in lay[i].iter().rev() {
            if succeeds(u, v, legal) {
                let mut p2 = path.clone();
                p2.push(v.clone());
                stack.push(p2);
            }
        }
    }
    let mut patterns = Vec::new();
    let mut cycle_lengths = BTreeSet::new();
    for path in paths {
        let vl = gl.index[&(gl.phase_of(t0), path[0].clone())];
        let vr = gr.index[&(gr.phase_of(t1), path[path.len() - 1].clone())];
        let lc = cycle_from(&gl, &cyc_l, vl);
        let rc = cycle_from(&gr, &cyc_r, vr);
        cycle_lengths.insert(rc.len());
        let left = Periodic::from_fn(1, &[[lc.len() as i64, 0]], |y| lc[(y[0] - t0).rem_euclid(lc.len() as i64) as usize])?;
        let right =
            Periodic::from_fn(1, &[[rc.len() as i64, 0]], |y| rc[(y[0] - t1).rem_euclid(rc.len() as i64) as usize])?;
        let letters: Vec<Letter> = path.iter().map(|word| *word.last().expect("nonempty word")).collect();
        let value = |x: i64| {
            if x < t0 {
                left.value([x, 0])
            } else if x > t1 {
                right.value([x, 0])
            } else {
                letters[(x - t0) as usize]
            }
        };
        patterns.push(Ep1::canonical(&left, &right, t0, t1, value));
    }
    Ok(Some(ClassWalks { patterns, cycle_lengths: cycle_lengths.into_iter().collect() }))
}

fn walks_1d(
    rule: &Arc<Rule>,
    p: &LatticePattern,
    ep: &Ep1,
    n: u32,
    schedule: &[i64],
    lang: &Language,
) -> Result<Fibre, RecogError> {
    let kn = k_pow(rule, n)[0];
    let images = images_n(rule, n);
    let phi = p.phase().clone();
    let zones_for = |c: i64| match ep {
        Ep1::Periodic(q) => Zones::Periodic { period: q.det() / q.det().gcd(&kn) },
        Ep1::Eventual { left, lo, hi, right, .. } => Zones::Eventual {
            left: (lo - c - kn).div_euclid(kn),
            left_period: left.det() / left.det().gcd(&kn),
            right: (hi - c).div_euclid(kn) + 1,
            right_period: right.det() / right.det().gcd(&kn),
        },
    };
    let mut prev: Option<usize> = None;
    let mut last_lower = 0;
    for &s in schedule {
        let s = s.max(2);
        let legal = lang.entry([s, 1])?;
        let words = lang.entry([s - 1, 1])?;
        let mut total = Some(0usize);
        let mut elements = Vec::new();
        let mut classes = Vec::new();
        for c in 0..kn {
            let cands = Candidates {
                ep,
                images: &images,
                kn,
                class: c,
                zones: zones_for(c),
                memo: std::cell::RefCell::new(HashMap::new()),
            };
            let phase = class_phase(&phi, [c, 0], [kn, 1], 1);
            match class_walks(&cands, &words.patches, &legal.patches)? {
                None => {
                    total = None;
                    classes.push(ClassEvidence { phase, count: 0, kind: "infinite", cycle_lengths: Vec::new() });
                }
                Some(cw) => {
                    let count = cw.patterns.len();
                    total = total.map(|t| t + count);
                    for e in cw.patterns {
                        elements.push(LatticePattern::new(1, p.alphabet_arc(), e.to_source(), phase.clone())?);
                    }
                    let kind = if count == 0 { "dead" } else { "cycles" };
                    classes.push(ClassEvidence { phase, count, kind, cycle_lengths: cw.cycle_lengths });
                }
            }
        }
        if let Some(t) = total {
            last_lower = t;
            if prev == Some(t) {
                let elements = finish(elements);
                for e in &elements {
                    if !maps_onto(rule, e, p, n)? {
                        return Err(RecogError::UCViolation("walk does not substitute onto the anchor".into()));
                    }
                }
                return Ok(Fibre { power: n, elements, window: s, method: "bi-infinite walks", classes });
            }
        }
        prev = total;
    }
    Err(RecogError::NotStabilized { lower_bound: last_lower, window: *schedule.last().expect("nonempty") })
}

// ---------------------------------------------------------------------------------------------
// substitutive anchors

/// `Q₀ + t` with `σⁿ(Q₀ + t) = P`, plus its translates by `L⁻ⁿ` of coset representatives of `K_P`.
fn explicit_preimages(rule: &Arc<Rule>, p: &LatticePattern, n: u32) -> Result<Vec<LatticePattern>, RecogError> {
    let Source::Substitutive(s) = p.source() else {
        return Err(RecogError::UnsupportedSource("explicit pre-images need a substitutive anchor".into()));
    };
    let dim = p.dim();
    let big = s.power;
    let j = n.div_ceil(big);
    let base = LatticePattern::substitutive(s.rule.clone(), big, s.seed.clone());
    let q0 = substitute_n(rule, &base, j * big - n)?;
    let k = rule.constant_shape().expect("constant shape");
    let drift = seed_drift(&s.seed);
    let mut t = vec![BigRational::from_integer(0.into()); 2];
    for i in 0..dim {
        let kb = BigInt::from(k[i]).pow(big);
        let kjb = BigInt::from(k[i]).pow(j * big);
        let dj = BigInt::from(drift[i]) * (kjb - 1) / (kb - 1);
        let num = BigRational::from_integer(BigInt::from(s.shift[i]) - dj) + &p.phase()[i];
        t[i] = num / BigRational::from_integer(BigInt::from(k[i]).pow(n));
    }
    let q = pattern_translate(&q0, &t);
    let mut out = vec![q.clone()];
    let periods = compute_periods(p, DEFAULT_NORM_BOUND)?;
    if !periods.group.lattice().is_empty() {
        if let Some(l) = rule.expansion() {
            let kn = k_pow(rule, n);
            for g in coset_representatives(&periods.group, l, n)? {
                if g.iter().all(|x| x == &BigRational::from_integer(0.into())) {
                    continue;
                }
                let mut tg = vec![BigRational::from_integer(0.into()); 2];
                for i in 0..dim {
                    tg[i] = &g[i] / BigRational::from_integer(kn[i].into());
                }
                out.push(pattern_translate(&q, &tg));
            }
        }
    }
    Ok(out)
}

/// Per phase class, the number of distinct central words (1-D) or consistent assignments (2-D)
/// on the window of radius `r`; `None` when a class exceeds the enumeration cap or stays ambiguous.
fn window_counts(
    rule: &Arc<Rule>,
    p: &LatticePattern,
    n: u32,
    r: i64,
    lang: &Language,
) -> Result<Vec<(Cell, Option<usize>)>, RecogError> {
    let dim = p.dim();
    let kn = k_pow(rule, n);
    let images = images_n(rule, n);
    let classes: Vec<Cell> = Shape::sized(dim, kn).cells().collect();
    let mut out = Vec::new();
    for c in classes {
        let side = 2 * r + 1;
        let origin = [-r * kn[0] + c[0], if dim == 2 { -r * kn[1] + c[1] } else { 0 }];
        let shape = Shape::sized(dim, [side * kn[0], if dim == 2 { side * kn[1] } else { 1 }]);
        let big = extract_patch(p, origin, shape);
        let cand_at = |x: Cell| -> Vec<Letter> {
            let block: Vec<Letter> = Shape::sized(dim, kn)
                .cells()
                .map(|u| big.get([(x[0] + r) * kn[0] + u[0], if dim == 2 { (x[1] + r) * kn[1] + u[1] } else { 0 }]).expect("inside"))
                .collect();
            (0..images.len()).filter(|&a| images[a] == block).map(|a| a as Letter).collect()
        };
        let count = if dim == 1 { count_1d(r, &cand_at, lang)? } else { count_2d(r, &cand_at, lang)? };
        out.push((c, count));
    }
    Ok(out)
}

fn count_1d(r: i64, cand_at: &dyn Fn(Cell) -> Vec<Letter>, lang: &Language) -> Result<Option<usize>, RecogError> {
    let s = WINDOWED_WORD.min(2 * r + 1).max(2);
    let w = s - 1;
    let legal = lang.entry([s, 1])?;
    let words = lang.entry([w, 1])?;
    let cands: Vec<Vec<Letter>> = (-r..=r).map(|x| cand_at([x, 0])).collect();
    let c_at = |x: i64| &cands[(x + r) as usize];
    let t_start = -r + w - 1;
    let mut layers: Vec<BTreeSet<Vec<Letter>>> = Vec::new();
    let first: BTreeSet<Vec<Letter>> = words
        .patches
        .iter()
        .filter(|word| word.iter().enumerate().all(|(k, l)| c_at(-r + k as i64).contains(l)))
        .cloned()
        .collect();
    layers.push(first);
    for t in t_start + 1..=r {
        let next = extend(layers.last().expect("layer"), c_at(t), &legal.patches);
        layers.push(next);
    }
    let top = layers.len() - 1;
    for i in (0..top).rev() {
        let (a, b) = layers.split_at_mut(i + 1);
        let nxt = &b[0];
        a[i].retain(|u| nxt.iter().any(|v| succeeds(u, v, &legal.patches)));
    }
    if layers[0].is_empty() {
        return Ok(Some(0));
    }
    let c = r / 4;
    let len = (2 * c + 1) as usize;
    let layer_of = |t: i64| (t - t_start) as usize;
    if len <= w as usize {
        let set: BTreeSet<Vec<Letter>> =
            layers[layer_of(c)].iter().map(|word| word[word.len() - len..].to_vec()).collect();
        return Ok(Some(set.len()));
    }
    // enumerate paths across the central stretch
    let from = -c + w - 1;
    let mut found: BTreeSet<Vec<Letter>> = BTreeSet::new();
    let mut stack: Vec<(i64, Vec<Letter>, Vec<Letter>)> =
        layers[layer_of(from)].iter().map(|u| (from, u.clone(), u.clone())).collect();
    let mut steps = 0usize;
    while let Some((t, u, acc)) = stack.pop() {
        steps += 1;
        if steps > PATH_CAP {
            return Ok(None);
        }
        if t == c {
            found.insert(acc);
            continue;
        }
        for v in &layers[layer_of(t + 1)] {
            if succeeds(&u, v, &legal.patches) {
                let mut a2 = acc.clone();
                a2.push(*v.last().expect("nonempty"));
                stack.push((t + 1, v.clone(), a2));
            }
        }
    }
    Ok(Some(found.len()))
}

fn count_2d(r: i64, cand_at: &dyn Fn(Cell) -> Vec<Letter>, lang: &Language) -> Result<Option<usize>, RecogError> {
    let shape = Shape::radius(r, 2);
    let mut assignment = Vec::with_capacity(shape.len());
    for x in shape.cells() {
        let c = cand_at(x);
        match c.len() {
            0 => return Ok(Some(0)),
            1 => assignment.push(c[0]),
            _ => return Ok(None),
        }
    }
    let legal = lang.entry([2, 2])?;
    let side = 2 * r + 1;
    for i in 0..side - 1 {
        for j in 0..side - 1 {
            let at = |a: i64, b: i64| assignment[(a * side + b) as usize];
            let w = vec![at(i, j), at(i, j + 1), at(i + 1, j), at(i + 1, j + 1)];
            if !legal.patches.contains(&w) {
                return Ok(Some(0));
            }
        }
    }
    Ok(Some(1))
}

fn windowed(
    rule: &Arc<Rule>,
    p: &LatticePattern,
    n: u32,
    schedule: &[i64],
    lang: &Language,
) -> Result<Fibre, RecogError> {
    let dim = p.dim();
    let kn = k_pow(rule, n);
    let mut explicit = Vec::new();
    for q in explicit_preimages(rule, p, n)? {
        if maps_onto(rule, &q, p, n)? {
            explicit.push(q);
        }
    }
    let explicit = finish(explicit);
    let m = explicit.len();
    let radii: Vec<i64> = schedule.iter().copied().filter(|&r| dim == 1 || r <= MAX_WINDOW_2D).collect();
    let mut prev: Option<usize> = None;
    let mut last = 0;
    for &r in &radii {
        let counts = window_counts(rule, p, n, r.max(1), lang)?;
        let total: Option<usize> = counts.iter().map(|(_, c)| *c).sum();
        last = r;
        if total == Some(m) && prev == Some(m) {
            let classes = counts
                .iter()
                .map(|(c, k)| {
                    let count = k.unwrap_or(0);
                    ClassEvidence {
                        phase: class_phase(p.phase(), *c, kn, dim),
                        count,
                        kind: if count == 0 { "dead" } else { "forced" },
                        cycle_lengths: Vec::new(),
                    }
                })
                .collect();
            let method = if dim == 1 { "explicit pre-images with windowed walk count" } else { "explicit pre-images with windowed propagation" };
            return Ok(Fibre { power: n, elements: explicit, window: r, method, classes });
        }
        prev = total;
    }
    Err(RecogError::NotStabilized { lower_bound: m, window: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{HalfSpaces, Region};
    use crate::quad::rat;
    use crate::subst::Seed;

    fn mask5() -> Arc<Rule> {
        Rule::builtin("mask5").unwrap()
    }

    fn constant(rule: &Rule, l: Letter) -> LatticePattern {
        LatticePattern::periodic(rule.alphabet_arc(), Periodic::constant(1, l))
    }

    fn pb(rule: &Rule) -> LatticePattern {
        // C B B B C with C at cell 0
        LatticePattern::periodic(rule.alphabet_arc(), Periodic::word(&[4, 3, 3, 3, 4]).unwrap())
    }

    #[test]
    fn mask5_pb_has_one_preimage() {
        let r = mask5();
        let lang = Language::admitted(r.clone());
        let f = enumerate_fibre(&r, &pb(&r), 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        assert_eq!(f.len(), 1);
        let e = &f.elements[0];
        assert_eq!(e.phase()[0], rat(0, 1));
        assert!((-10..10).all(|x| e.value([x, 0]) == 2));
    }

    #[test]
    fn mask5_pa_fibres() {
        let r = mask5();
        let lang = Language::admitted(r.clone());
        let pa = constant(&r, 2);
        let f2 = enumerate_fibre(&r, &pa, 2, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        assert_eq!(f2.len(), 25);
        let phases: Vec<BigRational> = f2.elements.iter().map(|e| e.phase()[0].clone()).collect();
        assert_eq!(phases, (0..25).map(|j| rat(j, 25)).collect::<Vec<_>>());
        let f1 = enumerate_fibre(&r, &pa, 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        assert_eq!(f1.len(), 25);
        for c in f1.classes.iter() {
            assert_eq!(c.count, 5);
            assert_eq!(c.cycle_lengths, vec![5]);
        }
    }

    #[test]
    fn half_and_half_fibres() {
        let h = Rule::builtin("half_and_half").unwrap();
        let a = h.alphabet_arc();
        let w = Periodic::constant(1, 0);
        let b = Periodic::constant(1, 1);
        let t = HalfSpaces::new(
            1,
            vec![
                Region { constraints: vec![([-1, 0], 1)], filler: w },
                Region { constraints: vec![([1, 0], 0)], filler: b.clone() },
            ],
        )
        .unwrap();
        let tp = LatticePattern::half_spaces(a.clone(), t);
        let lang = Language::hull(tp.clone());
        let f = enumerate_fibre(&h, &tp, 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        assert_eq!(f.len(), 1);
        assert!(pattern_equal(&f.elements[0], &tp).value());
        let allb = LatticePattern::periodic(a, b);
        let f = enumerate_fibre(&h, &allb, 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        let phases: Vec<BigRational> = f.elements.iter().map(|e| e.phase()[0].clone()).collect();
        assert_eq!(phases, vec![rat(0, 1), rat(1, 2)]);
    }

    #[test]
    fn substitutive_fibres_are_singletons() {
        let tm = Rule::builtin("thue_morse").unwrap();
        let lang = Language::admitted(tm.clone());
        let p = LatticePattern::substitutive(tm.clone(), 2, Seed::Corner { letters: vec![0, 1] });
        let f = enumerate_fibre(&tm, &p, 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        assert_eq!(f.len(), 1);
        let m = mask5();
        let lang = Language::admitted(m.clone());
        let pstar = LatticePattern::substitutive(m.clone(), 1, Seed::Interior { letter: 0, offset: [2, 0] });
        let f = enumerate_fibre(&m, &pstar, 1, &DEFAULT_WINDOW_SCHEDULE, &lang).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.elements[0].phase()[0], rat(3, 5));
    }

    #[test]
    fn chair_fibre() {
        let c = Rule::builtin("chair").unwrap();
        let lang = Language::admitted(c.clone());
        let p = LatticePattern::substitutive(c.clone(), 1, Seed::Corner { letters: vec![0, 3, 1, 2] });
        let f = enumerate_fibre(&c, &p, 1, &[4, 8, 16], &lang).unwrap();
        assert_eq!(f.len(), 1);
    }
}
