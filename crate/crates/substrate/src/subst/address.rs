//! Supertile addressing: the letter of a seeded fixed point at any cell, by digit descent.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::rule::cell_in;
use super::{quadrant_of, quadrant_signs, Rule, Seed};
use crate::patterns::{Cell, Letter};

/// `P_seed[y]` for the fixed point of `σ^n` seeded by `seed` (the seed cell is 0).
pub fn address(rule: &Rule, seed: &Seed, n: u32, y: Cell) -> Letter {
    match rule.constant_shape() {
        Some(k) => address_block(rule, k, seed, n, y),
        None => address_word(rule, seed, n, y[0]),
    }
}

fn pow_i128(k: i64, e: u32) -> i128 {
    (k as i128).checked_pow(e).expect("supertile index overflow")
}

/// Top-level supertile containing `y`: `(letter, levels, index of y inside it)`.
fn locate_block(rule: &Rule, k: [i64; 2], seed: &Seed, n: u32, y: Cell, min_m: u32) -> (Letter, u32, [i128; 2]) {
    let dim = rule.dim();
    match seed {
        Seed::Interior { letter, offset } => {
            let mut jm = [offset[0] as i128, offset[1] as i128];
            let mut m = 1u32;
            loop {
                let size = [pow_i128(k[0], n * m), pow_i128(k[1], n * m)];
                let idx = [jm[0] + y[0] as i128, jm[1] + y[1] as i128];
                if m >= min_m && (0..dim).all(|i| idx[i] >= 0 && idx[i] < size[i]) {
                    return (*letter, n * m, idx);
                }
                let kn = [pow_i128(k[0], n), pow_i128(k[1], n)];
                for i in 0..dim {
                    jm[i] = kn[i].checked_mul(jm[i]).expect("supertile index overflow") + offset[i] as i128;
                }
                m += 1;
            }
        }
        Seed::Corner { letters } => {
            let q = quadrant_of(dim, y);
            let pos = quadrant_signs(dim, q);
            let mut m = 1u32;
            loop {
                let size = [pow_i128(k[0], n * m), pow_i128(k[1], n * m)];
                let mut idx = [0i128; 2];
                let mut ok = true;
                for i in 0..dim {
                    idx[i] = if pos[i] { y[i] as i128 } else { size[i] + y[i] as i128 };
                    ok &= idx[i] >= 0 && idx[i] < size[i];
                }
                if ok && m >= min_m {
                    return (letters[q], n * m, idx);
                }
                m += 1;
            }
        }
    }
}

fn address_block(rule: &Rule, k: [i64; 2], seed: &Seed, n: u32, y: Cell) -> Letter {
    let (mut a, levels, idx) = locate_block(rule, k, seed, n, y, 1);
    for r in (0..levels).rev() {
        let s = [pow_i128(k[0], r), pow_i128(k[1], r)];
        let d = [((idx[0] / s[0]) % k[0] as i128) as i64, ((idx[1] / s[1]) % k[1] as i128) as i64];
        a = rule.image(a)[cell_in(k, d)];
    }
    a
}

/// The letters of `P_seed` on the box `[lo, lo + size)`, row-major; `None` for word rules.
pub fn address_box(rule: &Rule, seed: &Seed, n: u32, lo: Cell, size: [i64; 2]) -> Option<Vec<Letter>> {
    let k = rule.constant_shape()?;
    let dim = rule.dim();
    let size = if dim == 1 { [size[0], 1] } else { size };
    let mut out = vec![0 as Letter; (size[0] * size[1]) as usize];
    // split the box by quadrant so that every piece has a single top-level supertile
    let mut cuts: Vec<[(i64, i64); 2]> = vec![[(lo[0], lo[0] + size[0]), (lo[1], lo[1] + size[1])]];
    if matches!(seed, Seed::Corner { .. }) {
        for axis in 0..dim {
            cuts = cuts
                .into_iter()
                .flat_map(|b| {
                    let (a, e) = b[axis];
                    if a < 0 && e > 0 {
                        let mut l = b;
                        let mut r = b;
                        l[axis] = (a, 0);
                        r[axis] = (0, e);
                        vec![l, r]
                    } else {
                        vec![b]
                    }
                })
                .collect();
        }
    }
    for b in cuts {
        let first = [b[0].0, b[1].0];
        let last = [b[0].1 - 1, b[1].1 - 1];
        let (_, lv1, _) = locate_block(rule, k, seed, n, first, 1);
        let (_, lv2, _) = locate_block(rule, k, seed, n, last, 1);
        let (letter, levels, base) = locate_block(rule, k, seed, n, first, lv1.max(lv2) / n);
        // `base` is the index of `first` in the supertile; map cells to indices
        let qlo = base;
        let qhi = [base[0] + (last[0] - first[0]) as i128, base[1] + (last[1] - first[1]) as i128];
        let off = [first[0] - lo[0], first[1] - lo[1]];
        let mut sink = |idx: [i128; 2], l: Letter| {
            let c = [(idx[0] - qlo[0]) as i64 + off[0], (idx[1] - qlo[1]) as i64 + off[1]];
            out[(c[0] * size[1] + c[1]) as usize] = l;
        };
        fill(rule, k, letter, levels, [0, 0], qlo, qhi, &mut sink);
    }
    Some(out)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    rule: &Rule,
    k: [i64; 2],
    a: Letter,
    r: u32,
    base: [i128; 2],
    qlo: [i128; 2],
    qhi: [i128; 2],
    sink: &mut impl FnMut([i128; 2], Letter),
) {
    if r == 0 {
        sink(base, a);
        return;
    }
    let s = [pow_i128(k[0], r - 1), pow_i128(k[1], r - 1)];
    for d0 in 0..k[0] {
        let b0 = base[0] + d0 as i128 * s[0];
        if b0 > qhi[0] || b0 + s[0] - 1 < qlo[0] {
            continue;
        }
        for d1 in 0..k[1] {
            let b1 = base[1] + d1 as i128 * s[1];
            if b1 > qhi[1] || b1 + s[1] - 1 < qlo[1] {
                continue;
            }
            let c = rule.image(a)[cell_in(k, [d0, d1])];
            fill(rule, k, c, r - 1, [b0, b1], qlo, qhi, sink);
        }
    }
}

fn to_u128(x: &BigUint) -> u128 {
    x.to_u128().unwrap_or(u128::MAX)
}

fn address_word(rule: &Rule, seed: &Seed, n: u32, y: i64) -> Letter {
    let (a, levels, idx) = match seed {
        Seed::Interior { letter, offset } => {
            let j = offset[0] as usize;
            let prefix: Vec<Letter> = rule.power_image(*letter, n).values()[..j].to_vec();
            let mut jm: u128 = j as u128;
            let mut m = 1u32;
            loop {
                let len = to_u128(&rule.length(*letter, n * m));
                let idx = jm as i128 + y as i128;
                if idx >= 0 && (idx as u128) < len {
                    break (*letter, n * m, idx as u128);
                }
                jm += to_u128(&rule.word_length(&prefix, n * m));
                m += 1;
            }
        }
        Seed::Corner { letters } => {
            let c = letters[usize::from(y >= 0)];
            let mut m = 1u32;
            loop {
                let len = to_u128(&rule.length(c, n * m));
                if y >= 0 && (y as u128) < len {
                    break (c, n * m, y as u128);
                }
                if y < 0 && y.unsigned_abs() as u128 <= len {
                    break (c, n * m, len - y.unsigned_abs() as u128);
                }
                m += 1;
            }
        }
    };
    descend_word(rule, a, levels, idx)
}

/// Letter at index `idx` of `σ^levels(a)`.
pub(crate) fn descend_word(rule: &Rule, mut a: Letter, levels: u32, mut idx: u128) -> Letter {
    for r in (0..levels).rev() {
        let mut next = None;
        for &b in rule.image(a) {
            let l = to_u128(&rule.length(b, r));
            if idx < l {
                next = Some(b);
                break;
            }
            idx -= l;
        }
        a = next.expect("index inside the image");
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::substitute_patch;
    use crate::patterns::{Patch, Shape};

    #[test]
    fn mask5_fixed_point() {
        let r = Rule::builtin("mask5").unwrap();
        let s = Seed::Interior { letter: 0, offset: [2, 0] };
        let a = r.alphabet();
        let w: Vec<Letter> = (-2..=2).map(|x| address(&r, &s, 1, [x, 0])).collect();
        assert_eq!(a.render(&w), "S2 A S1 B S2");
        assert_eq!(a.name(address(&r, &s, 1, [3, 0])), "A");
        assert_eq!(a.name(address(&r, &s, 1, [-3, 0])), "C");
    }

    #[test]
    fn thue_morse_brute_force() {
        let r = Rule::builtin("thue_morse").unwrap();
        let s = Seed::Corner { letters: vec![0, 0] };
        let mut p = Patch::word(&[0]);
        for _ in 0..8 {
            p = substitute_patch(&r, &p);
        }
        for x in 0..256 {
            assert_eq!(address(&r, &s, 2, [x, 0]), p.values()[x as usize]);
        }
        let bx = address_box(&r, &s, 2, [-7, 0], [20, 1]).unwrap();
        let direct: Vec<Letter> = (-7..13).map(|x| address(&r, &s, 2, [x, 0])).collect();
        assert_eq!(bx, direct);
    }

    #[test]
    fn fibonacci_word_addressing() {
        let r = Rule::builtin("fibonacci").unwrap();
        let s = Seed::Corner { letters: vec![0, 0] };
        let mut p = Patch::word(&[0]);
        for _ in 0..12 {
            p = substitute_patch(&r, &p);
        }
        for x in 0..200 {
            assert_eq!(address(&r, &s, 2, [x, 0]), p.values()[x as usize]);
        }
        let n = p.values().len() as i64;
        for x in 1..200 {
            assert_eq!(address(&r, &s, 2, [-x, 0]), p.values()[(n - x) as usize]);
        }
    }

    #[test]
    fn chair_box_matches_cells() {
        let r = Rule::builtin("chair").unwrap();
        let s = Seed::Corner { letters: vec![0, 3, 1, 2] };
        let shape = Shape::rect([-6, -5], [7, 4]);
        let bx = address_box(&r, &s, 1, shape.lo(), shape.size()).unwrap();
        let direct: Vec<Letter> = shape.cells().map(|c| address(&r, &s, 1, c)).collect();
        assert_eq!(bx, direct);
    }
}
