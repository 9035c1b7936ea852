//! Randomised checks of the algebraic invariants, run against the public API.

use std::sync::Arc;

use num_rational::BigRational;
use proptest::prelude::*;

use substrate::cli::{resolve_pattern, Workspace};
use substrate::geom::{expected_counts, iterate, GeomPatch, InflationRule};
use substrate::lattice::{hnf, snf};
use substrate::ldmap::{apply, LocalRule};
use substrate::patterns::{
    find_difference, patch_restrict, patch_shift, pattern_translate_int, value_at, Cell, Letter, Patch, Shape,
};
use substrate::quad::QuadNum;
use substrate::subst::{address, legal_patches, substitute_patch_n, Mode, Rule, Seed};

fn det(m: &[Vec<i64>]) -> i128 {
    match m.len() {
        2 => m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128,
        3 => (0..3)
            .map(|j| {
                let minor = |r: usize, c: usize| m[r][(j + c) % 3] as i128;
                m[0][j] as i128 * (minor(1, 1) * minor(2, 2) - minor(1, 2) * minor(2, 1))
            })
            .sum(),
        _ => unreachable!(),
    }
}

fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    (0..a.len())
        .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-9i64..=9, n), n)
}

fn quad() -> impl Strategy<Value = QuadNum> {
    (-20i64..=20, 1i64..=6, -20i64..=20, 1i64..=6).prop_map(|(a, b, c, d)| {
        QuadNum::new(BigRational::new(a.into(), b.into()), BigRational::new(c.into(), d.into()), 5)
    })
}

fn patch2d() -> impl Strategy<Value = Patch> {
    (1i64..=6, 1i64..=6, -3i64..=3, -3i64..=3).prop_flat_map(|(w, h, x, y)| {
        prop::collection::vec(0u8..3, (w * h) as usize).prop_map(move |v| {
            Patch::new(Shape::rect([x, y], [x + w - 1, y + h - 1]), [0, 0], v).unwrap()
        })
    })
}

/// A sub-box of `s` described by fractions of its extent.
fn sub_box(s: Shape, f: [u8; 4]) -> Shape {
    let (lo, hi) = (s.lo(), s.hi());
    let pick = |a: i64, b: i64, t: u8| a + (b - a) * t as i64 / 255;
    let x0 = pick(lo[0], hi[0], f[0].min(f[1]));
    let x1 = pick(lo[0], hi[0], f[0].max(f[1]));
    let y0 = pick(lo[1], hi[1], f[2].min(f[3]));
    let y1 = pick(lo[1], hi[1], f[2].max(f[3]));
    Shape::rect([x0, y0], [x1, y1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn snf_divisibility_and_determinant(m in prop_oneof![square(2), square(3)]) {
        let s = snf(&m).unwrap();
        prop_assert_eq!(mul(&mul(&s.u, &m), &s.v), s.d.clone());
        let d = s.diagonal();
        for w in d.windows(2) {
            prop_assert!(w[0] >= 0 && w[1] >= 0);
            if w[0] == 0 {
                prop_assert_eq!(w[1], 0);
            } else {
                prop_assert_eq!(w[1] % w[0], 0);
            }
        }
        let prod: i128 = d.iter().map(|&x| x as i128).product();
        prop_assert_eq!(prod, det(&m).abs());
    }

    #[test]
    fn hnf_is_idempotent_and_spans(m in square(2)) {
        let h = hnf(&m).unwrap();
        let again = hnf(&h.basis).unwrap();
        prop_assert_eq!(&again.basis, &h.basis);
        let mu = mul(&m, &h.transform);
        for (i, row) in mu.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let expected = if j < h.rank { h.basis[i][j] } else { 0 };
                prop_assert_eq!(x, expected);
            }
        }
        prop_assert_eq!(h.rank == 2, det(&m) != 0);
    }

    #[test]
    fn quadratic_field_is_exact(x in quad(), y in quad()) {
        prop_assert_eq!(x.clone() + y.clone() - y.clone(), x.clone());
        if !num_traits::Zero::is_zero(&y) {
            prop_assert_eq!(x.clone() * y.clone() / y.clone(), x.clone());
        }
        prop_assert_eq!(x.clone() * x.conjugate(), QuadNum::rational(x.norm()));
        let f = x.to_f64();
        if f.abs() > 1e-9 {
            prop_assert_eq!(x.sign(), if f > 0.0 { std::cmp::Ordering::Greater } else { std::cmp::Ordering::Less });
        }
        prop_assert_eq!(x.to_string().parse::<QuadNum>().unwrap(), x);
    }

    #[test]
    fn restriction_composes(p in patch2d(), a in any::<[u8; 4]>(), b in any::<[u8; 4]>()) {
        let outer = sub_box(p.shape(), a);
        let inner = sub_box(outer, b);
        let twice = patch_restrict(&patch_restrict(&p, outer).unwrap(), inner).unwrap();
        prop_assert_eq!(twice, patch_restrict(&p, inner).unwrap());
    }

    #[test]
    fn shifting_reads_translated_cells(p in patch2d(), z in any::<(i8, i8)>(), w in any::<(i8, i8)>()) {
        let z: Cell = [z.0 as i64 % 5, z.1 as i64 % 5];
        let w: Cell = [w.0 as i64 % 5, w.1 as i64 % 5];
        let s = patch_shift(&p, z);
        for c in s.shape().cells() {
            prop_assert_eq!(s.get(c), p.get([c[0] + z[0], c[1] + z[1]]));
        }
        prop_assert_eq!(patch_shift(&s, w), patch_shift(&p, [z[0] + w[0], z[1] + w[1]]));
    }

    #[test]
    fn local_rules_commute_with_translation(table in prop::collection::vec(0u8..2, 8), z in -40i64..=40) {
        let tm = Rule::builtin("thue_morse").unwrap();
        let p = resolve_pattern(&tm, "fixed:0", 1, None).unwrap();
        let a = tm.alphabet_arc();
        let f = Arc::new(
            LocalRule::total(1, 1, a.clone(), a, |q: &Patch| {
                let v = q.values();
                table[(v[0] * 4 + v[1] * 2 + v[2]) as usize]
            })
            .unwrap(),
        );
        let lhs = apply(&f, &pattern_translate_int(&p, [z, 0])).unwrap();
        let rhs = pattern_translate_int(&apply(&f, &p).unwrap(), [z, 0]);
        prop_assert_eq!(find_difference(&lhs, &rhs, 60), None);
    }

    #[test]
    fn workspace_caps_must_be_positive(sat in 0usize..4, rec in 0i64..4, inv in 0i64..4) {
        let text = format!("rule = \"mask5\"\n[caps]\nsaturation = {sat}\nrecognisability = {rec}\ninverse = {inv}\n");
        let ok = Workspace::parse(&text).is_ok();
        prop_assert_eq!(ok, sat > 0 && rec > 0 && inv > 0);
    }
}

/// Brute-force `σᵏ` expansion of a seed word, read back at signed offsets from the seed cell.
fn expanded(rule: &Rule, word: &[Letter], k: u32) -> Vec<Letter> {
    substitute_patch_n(rule, &Patch::word(word), k).values().to_vec()
}

#[test]
fn interior_address_matches_expansion() {
    let mask5 = Rule::builtin("mask5").unwrap();
    let s1 = mask5.alphabet().index("S1").unwrap();
    let seed = Seed::Interior { letter: s1, offset: [2, 0] };
    let word = expanded(&mask5, &[s1], 4);
    let centre = (word.len() as i64 - 1) / 2;
    for y in -centre..=centre {
        assert_eq!(address(&mask5, &seed, 1, [y, 0]), word[(y + centre) as usize], "cell {y}");
    }
}

#[test]
fn corner_address_matches_expansion() {
    let tm = Rule::builtin("thue_morse").unwrap();
    let p = resolve_pattern(&tm, "corner:a.b", 2, None).unwrap();
    let (a, b) = (0 as Letter, 1 as Letter);
    let left = expanded(&tm, &[a], 8);
    let right = expanded(&tm, &[b], 8);
    for y in 0..128 {
        assert_eq!(value_at(&p, [y, 0]), right[y as usize]);
        assert_eq!(value_at(&p, [-1 - y, 0]), left[left.len() - 1 - y as usize]);
    }
}

#[test]
fn language_sizes_grow_monotonically() {
    for name in ["thue_morse", "fibonacci", "mask5"] {
        let rule = Rule::builtin(name).unwrap();
        let counts: Vec<usize> =
            (1..=8).map(|n| legal_patches(&rule, Shape::line(0, n - 1), &Mode::Admitted).unwrap().len()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{name}: {counts:?}");
    }
    let chair = Rule::builtin("chair").unwrap();
    let counts: Vec<usize> =
        (1..=3).map(|n| legal_patches(&chair, Shape::sized(2, [n, n]), &Mode::Admitted).unwrap().len()).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "chair: {counts:?}");
}

#[test]
fn geometric_iteration_composes_and_counts_tiles() {
    for name in ["square", "chair", "penta_gaps"] {
        let rule = InflationRule::builtin(name).unwrap();
        for j in 0..rule.prototiles().len() {
            let seed = GeomPatch::single(j);
            for (m, n) in [(1, 1), (1, 2), (2, 1)] {
                let direct = iterate(&rule, &seed, m + n);
                assert_eq!(direct, iterate(&rule, &iterate(&rule, &seed, m), n), "{name} tile {j}");
                assert_eq!(direct.counts(&rule), expected_counts(&rule, j, m + n), "{name} tile {j}");
                if rule.is_stone() {
                    assert_eq!(direct.area(&rule), seed.area(&rule) * rule_det(&rule).pow(m + n));
                }
            }
        }
    }
}

fn rule_det(rule: &InflationRule) -> QuadNum {
    let e = rule.expansion();
    let d = e[0][0].clone() * e[1][1].clone() - e[0][1].clone() * e[1][0].clone();
    if d.sign() == std::cmp::Ordering::Less {
        -d
    } else {
        d
    }
}
