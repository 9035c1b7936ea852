//! Dense exact linear algebra over any [`Scalar`] field. Matrices are row-major.

use crate::quad::Scalar;

pub type Mat<T> = Vec<Vec<T>>;

pub fn identity<T: Scalar>(n: usize) -> Mat<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

pub fn zeros<T: Scalar>(r: usize, c: usize) -> Mat<T> {
    vec![vec![T::zero(); c]; r]
}

pub fn mat_mul<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = T::zero();
                    for k in 0..inner {
                        if !row[k].is_zero_val() && !b[k][j].is_zero_val() {
                            acc = acc + row[k].clone() * b[k][j].clone();
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<T: Scalar>(a: &Mat<T>, v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
        })
        .collect()
}

pub fn transpose<T: Clone>(a: &Mat<T>) -> Mat<T> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_pow<T: Scalar>(a: &Mat<T>, n: u32) -> Mat<T> {
    let mut acc = identity(a.len());
    for _ in 0..n {
        acc = mat_mul(&acc, a);
    }
    acc
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<T: Scalar>(a: &mut Mat<T>) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero_val()) else {
            continue;
        };
        a.swap(r, p);
        let inv = T::one() / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero_val() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = a[r][j].clone();
                    a[i][j] = a[i][j].clone() - f.clone() * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Scalar>(a: &Mat<T>) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

/// Basis of `{x : a·x = 0}`.
pub fn null_space<T: Scalar>(a: &Mat<T>, cols: usize) -> Vec<Vec<T>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves `a·X = b` for `a` of full column rank. `None` if inconsistent or rank-deficient.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Option<Mat<T>> {
    let rows = a.len();
    let n = a.first().map_or(0, Vec::len);
    let k = b.first().map_or(0, Vec::len);
    let mut aug: Mat<T> = (0..rows)
        .map(|i| a[i].iter().cloned().chain(b[i].iter().cloned()).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.iter().any(|&p| p >= n) || pivots.len() < n {
        return None;
    }
    Some((0..n).map(|i| aug[i][n..n + k].to_vec()).collect())
}

pub fn inverse<T: Scalar>(a: &Mat<T>) -> Option<Mat<T>> {
    solve(a, &identity(a.len()))
}

pub fn det<T: Scalar>(a: &Mat<T>) -> T {
    let n = a.len();
    let mut m = a.clone();
    let mut d = T::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero_val()) else {
            return T::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d = d * m[c][c].clone();
        for i in c + 1..n {
            if !m[i][c].is_zero_val() {
                let f = m[i][c].clone() / m[c][c].clone();
                for j in c..n {
                    let t = m[c][j].clone();
                    m[i][j] = m[i][j].clone() - f.clone() * t;
                }
            }
        }
    }
    d
}

/// Characteristic polynomial `det(xI − a)`, coefficients from constant term upward (monic).
pub fn char_poly<T: Scalar>(a: &Mat<T>) -> Vec<T> {
    let n = a.len();
    let mut coeffs = vec![T::zero(); n + 1];
    coeffs[n] = T::one();
    let mut m: Mat<T> = zeros(n, n);
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i].clone() + coeffs[n - k + 1].clone();
        }
        m = next;
        let am = mat_mul(a, &m);
        let tr = (0..n).fold(T::zero(), |acc, i| acc + am[i][i].clone());
        coeffs[n - k] = -(tr / T::from_i64(k as i64));
    }
    coeffs
}

/// Schur–Cohn: every root of `q` (coefficients low to high) lies in the open unit disc.
pub fn roots_in_open_unit_disc<T: Scalar>(q: &[T]) -> bool {
    let mut q: Vec<T> = q.to_vec();
    while q.last().is_some_and(|c| c.is_zero_val()) {
        q.pop();
    }
    if q.is_empty() {
        return false;
    }
    while q.len() > 1 {
        let n = q.len() - 1;
        let lead = q[n].clone();
        let tail = q[0].clone();
        if tail.abs_val().signum_ord() != std::cmp::Ordering::Equal
            && (lead.abs_val() - tail.abs_val()).signum_ord() != std::cmp::Ordering::Greater
        {
            return false;
        }
        let next: Vec<T> = (1..=n)
            .map(|k| lead.clone() * q[k].clone() - tail.clone() * q[n - k].clone())
            .collect();
        q = next;
    }
    true
}

/// All eigenvalues of `a` have modulus strictly greater than one.
pub fn is_expansive<T: Scalar>(a: &Mat<T>) -> bool {
    if a.is_empty() {
        return false;
    }
    let p = char_poly(a);
    if p[0].is_zero_val() {
        return false;
    }
    // roots of the reversed polynomial are the reciprocals of the eigenvalues
    let rev: Vec<T> = p.iter().rev().cloned().collect();
    roots_in_open_unit_disc(&rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{rat, QuadNum};
    use num_rational::BigRational;

    fn q(rows: &[&[i64]]) -> Mat<BigRational> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()
    }

    #[test]
    fn char_poly_of_fibonacci_matrix() {
        let p = char_poly(&q(&[&[1, 1], &[1, 0]]));
        assert_eq!(p, vec![rat(-1, 1), rat(-1, 1), rat(1, 1)]);
    }

    #[test]
    fn expansive_decisions() {
        assert!(is_expansive(&q(&[&[2, 0], &[0, 2]])));
        assert!(!is_expansive(&q(&[&[1, 1], &[0, 1]])));
        assert!(!is_expansive(&q(&[&[1, 1], &[1, 0]])));
        assert!(!is_expansive(&q(&[&[2, 1], &[1, 1]])));
        assert!(is_expansive(&q(&[&[0, -2], &[2, 0]])));
        assert!(!is_expansive(&q(&[&[0, -1], &[1, 0]])));
        assert!(is_expansive(&q(&[&[5]])));
        assert!(!is_expansive(&q(&[&[-1]])));
        let phi = QuadNum::phi();
        let barcode = vec![vec![phi.clone(), QuadNum::int(0)], vec![QuadNum::int(0), QuadNum::int(2)]];
        assert!(is_expansive(&barcode));
        let shrink = vec![vec![phi - QuadNum::int(1)]];
        assert!(!is_expansive(&shrink));
    }

    #[test]
    fn solve_and_det() {
        let a = q(&[&[2, 1], &[1, 3]]);
        assert_eq!(det(&a), rat(5, 1));
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(solve(&q(&[&[1], &[1]]), &q(&[&[1], &[2]])).is_none());
        let ns = null_space(&q(&[&[1, 1]]), 2);
        assert_eq!(ns, vec![vec![rat(-1, 1), rat(1, 1)]]);
    }
}
