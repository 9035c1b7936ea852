//! Integer lattices, normal forms, expansion maps and period groups `K = V ⊕ Λ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Mat};
use crate::quad::{QuadNum, Scalar};

pub type IntMatrix = Vec<Vec<i64>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("inflated group is not contained in the period group")]
    NotInvariant,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("image of a rational vector is irrational")]
    NonRational,
    #[error("image of a lattice vector is not integral")]
    NonIntegral,
    #[error("integer overflow in lattice computation")]
    Overflow,
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, s, t) with s·a + t·b = g ≥ 0
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn to_i128(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

fn to_i64(m: &[Vec<i128>]) -> Result<IntMatrix, LatticeError> {
    m.iter()
        .map(|r| r.iter().map(|&x| i64::try_from(x).map_err(|_| LatticeError::Overflow)).collect())
        .collect()
}

fn ident_i128(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Column-style Hermite normal form: `m · u = [basis | 0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hnf {
    /// `rows × rank`, lower echelon, positive pivots, entries left of a pivot reduced into `[0, pivot)`.
    pub basis: IntMatrix,
    /// Unimodular `cols × cols` transform.
    pub transform: IntMatrix,
    pub rank: usize,
}

pub fn hnf(m: &[Vec<i64>]) -> Result<Hnf, LatticeError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = to_i128(m);
    let mut u = ident_i128(cols);
    let col_op = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, p: usize, q: usize, c: [i128; 4]| {
        // (col_p, col_q) ← (c0·col_p + c1·col_q, c2·col_p + c3·col_q)
        for row in a.iter_mut().chain(u.iter_mut()) {
            let (x, y) = (row[p], row[q]);
            row[p] = c[0] * x + c[1] * y;
            row[q] = c[2] * x + c[3] * y;
        }
    };
    let mut pc = 0;
    for i in 0..rows {
        if pc == cols {
            break;
        }
        for j in pc + 1..cols {
            if a[i][j] != 0 {
                let (g, s, t) = ext_gcd(a[i][pc], a[i][j]);
                let (x, y) = (a[i][pc] / g, a[i][j] / g);
                col_op(&mut a, &mut u, pc, j, [s, t, -y, x]);
            }
        }
        if a[i][pc] == 0 {
            continue;
        }
        if a[i][pc] < 0 {
            for row in a.iter_mut().chain(u.iter_mut()) {
                row[pc] = -row[pc];
            }
        }
        let piv = a[i][pc];
        for j in 0..pc {
            let q = a[i][j].div_euclid(piv);
            if q != 0 {
                for row in a.iter_mut().chain(u.iter_mut()) {
                    row[j] -= q * row[pc];
                }
            }
        }
        if a.iter().chain(u.iter()).flatten().any(|x| x.unsigned_abs() > (i64::MAX as u128)) {
            return Err(LatticeError::Overflow);
        }
        pc += 1;
    }
    let basis: Vec<Vec<i128>> = a.iter().map(|r| r[..pc].to_vec()).collect();
    Ok(Hnf { basis: to_i64(&basis)?, transform: to_i64(&u)?, rank: pc })
}

/// Smith normal form with `u · m · v = d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl Snf {
    pub fn diagonal(&self) -> Vec<i64> {
        let k = self.d.len().min(self.d.first().map_or(0, Vec::len));
        (0..k).map(|i| self.d[i][i]).collect()
    }
}

pub fn snf(m: &[Vec<i64>]) -> Result<Snf, LatticeError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = to_i128(m);
    let mut u = ident_i128(rows);
    let mut v = ident_i128(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return finish_snf(a, u, v);
            };
            a.swap(t, bi);
            u.swap(t, bi);
            for row in a.iter_mut().chain(v.iter_mut()) {
                row.swap(t, bj);
            }
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    for j in 0..cols {
                        a[i][j] -= q * a[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[t][j];
                    }
                }
                dirty |= a[i][t] != 0;
            }
            for j in t + 1..cols {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    for row in a.iter_mut().chain(v.iter_mut()) {
                        row[j] -= q * row[t];
                    }
                }
                dirty |= a[t][j] != 0;
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[i][j] % p != 0));
            if let Some(i) = bad {
                for j in 0..cols {
                    a[t][j] += a[i][j];
                }
                for j in 0..rows {
                    u[t][j] += u[i][j];
                }
                continue;
            }
            if p < 0 {
                for j in 0..cols {
                    a[t][j] = -a[t][j];
                }
                for j in 0..rows {
                    u[t][j] = -u[t][j];
                }
            }
            break;
        }
        if a.iter().chain(u.iter()).chain(v.iter()).flatten().any(|x| x.unsigned_abs() > (i64::MAX as u128)) {
            return Err(LatticeError::Overflow);
        }
    }
    finish_snf(a, u, v)
}

fn finish_snf(a: Vec<Vec<i128>>, u: Vec<Vec<i128>>, v: Vec<Vec<i128>>) -> Result<Snf, LatticeError> {
    Ok(Snf { d: to_i64(&a)?, u: to_i64(&u)?, v: to_i64(&v)? })
}

pub fn int_to_rat(m: &[Vec<i64>]) -> Mat<BigRational> {
    m.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect()
}

fn rat_to_int(v: &BigRational) -> Option<i64> {
    if v.is_integer() {
        v.to_integer().to_i64()
    } else {
        None
    }
}

/// The linear map `L`; entries live in a quadratic field so that golden-mean scalings are exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionMap {
    matrix: Mat<QuadNum>,
    expansive: bool,
}

impl ExpansionMap {
    pub fn new(matrix: Mat<QuadNum>) -> Result<Self, LatticeError> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|r| r.len() != d) {
            return Err(LatticeError::Dimension("expansion map must be square and nonempty".into()));
        }
        if linalg::det(&matrix).is_zero_val() {
            return Err(LatticeError::Singular);
        }
        let expansive = linalg::is_expansive(&matrix);
        Ok(ExpansionMap { matrix, expansive })
    }

    pub fn integer(m: &[Vec<i64>]) -> Result<Self, LatticeError> {
        Self::new(m.iter().map(|r| r.iter().map(|&x| QuadNum::int(x)).collect()).collect())
    }

    pub fn scalar(k: i64, dim: usize) -> Self {
        let m: IntMatrix = (0..dim).map(|i| (0..dim).map(|j| if i == j { k } else { 0 }).collect()).collect();
        Self::integer(&m).expect("nonzero scalar is invertible")
    }

    pub fn diagonal(entries: &[QuadNum]) -> Result<Self, LatticeError> {
        let d = entries.len();
        Self::new(
            (0..d)
                .map(|i| (0..d).map(|j| if i == j { entries[i].clone() } else { QuadNum::int(0) }).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &Mat<QuadNum> {
        &self.matrix
    }

    /// Certified by the Schur–Cohn test at construction.
    pub fn is_expansive(&self) -> bool {
        self.expansive
    }

    pub fn as_integer(&self) -> Option<IntMatrix> {
        self.matrix.iter().map(|r| r.iter().map(QuadNum::as_integer).collect()).collect()
    }

    pub fn pow(&self, n: u32) -> ExpansionMap {
        let matrix = linalg::mat_pow(&self.matrix, n);
        let expansive = if n == 0 { false } else { self.expansive };
        ExpansionMap { matrix, expansive }
    }

    pub fn apply(&self, v: &[QuadNum]) -> Vec<QuadNum> {
        linalg::mat_vec(&self.matrix, v)
    }

    /// `|det L|`, when rational.
    pub fn abs_det(&self) -> QuadNum {
        linalg::det(&self.matrix).abs_val()
    }
}

pub fn is_expansive(l: &ExpansionMap) -> bool {
    l.is_expansive()
}

/// Integer-matrix convenience wrapper around the exact Schur–Cohn decision.
pub fn is_expansive_int(m: &[Vec<i64>]) -> bool {
    linalg::is_expansive(&int_to_rat(m))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PeriodCertificate {
    /// Computed; `complete` records whether no further periods can exist.
    Certified { bound: u64, method: String, complete: bool },
    /// Asserted analytically, not computed.
    Declared { note: String },
}

/// `K = V ⊕ Λ`: a rational subspace plus a discrete lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodGroup {
    dim: usize,
    subspace: Vec<Vec<BigRational>>,
    lattice: Vec<Vec<i64>>,
    pub certificate: PeriodCertificate,
}

/// Coordinates of the discrete component after quotienting by the subspace.
struct Quotient {
    /// `(d−s) × d`, kernel exactly the subspace.
    f: Mat<BigRational>,
    /// `d × (d−s)` with `f·w = I`.
    w: Mat<BigRational>,
    /// HNF basis of `D0·f·Λ` as columns (`(d−s) × r`).
    basis: IntMatrix,
    /// Lifts of the basis columns to integer vectors of Λ (as columns, `d × r`).
    lifts: IntMatrix,
    scale: BigInt,
}

impl PeriodGroup {
    pub fn new(
        dim: usize,
        subspace: Vec<Vec<BigRational>>,
        generators: Vec<Vec<i64>>,
        certificate: PeriodCertificate,
    ) -> Result<Self, LatticeError> {
        if subspace.iter().any(|v| v.len() != dim)
            || generators.iter().any(|v| v.len() != dim)
        {
            return Err(LatticeError::Dimension(format!("vectors must have length {dim}")));
        }
        let mut sub = subspace;
        let piv = linalg::rref(&mut sub);
        sub.truncate(piv.len());
        let lattice = if generators.is_empty() {
            Vec::new()
        } else {
            let m: IntMatrix = linalg::transpose(&generators);
            let h = hnf(&m)?;
            linalg::transpose(&h.basis)
        };
        Ok(PeriodGroup { dim, subspace: sub, lattice, certificate })
    }

    pub fn lattice_only(dim: usize, generators: Vec<Vec<i64>>, certificate: PeriodCertificate) -> Result<Self, LatticeError> {
        Self::new(dim, Vec::new(), generators, certificate)
    }

    pub fn trivial(dim: usize, certificate: PeriodCertificate) -> Self {
        PeriodGroup { dim, subspace: Vec::new(), lattice: Vec::new(), certificate }
    }

    /// The whole space `E` (void pattern).
    pub fn full_space(dim: usize) -> Self {
        PeriodGroup {
            dim,
            subspace: linalg::identity(dim),
            lattice: Vec::new(),
            certificate: PeriodCertificate::Declared { note: "full space".into() },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn subspace(&self) -> &[Vec<BigRational>] {
        &self.subspace
    }

    /// Lattice generators in canonical Hermite order.
    pub fn lattice(&self) -> &[Vec<i64>] {
        &self.lattice
    }

    pub fn is_trivial(&self) -> bool {
        self.subspace.is_empty() && self.lattice.is_empty()
    }

    fn quotient(&self) -> Result<Quotient, LatticeError> {
        let d = self.dim;
        let f: Mat<BigRational> = if self.subspace.is_empty() {
            linalg::identity(d)
        } else {
            linalg::null_space(&self.subspace, d)
        };
        let w = if f.is_empty() {
            Vec::new()
        } else {
            let ft = linalg::transpose(&f);
            let gram = linalg::mat_mul(&f, &ft);
            let inv = linalg::inverse(&gram).ok_or(LatticeError::Singular)?;
            linalg::mat_mul(&ft, &inv)
        };
        let images: Vec<Vec<BigRational>> = self
            .lattice
            .iter()
            .map(|g| {
                let gv: Vec<BigRational> = g.iter().map(|&x| BigRational::from_integer(x.into())).collect();
                linalg::mat_vec(&f, &gv)
            })
            .collect();
        let scale = images
            .iter()
            .flatten()
            .fold(BigInt::from(1), |acc, x| num_integer::lcm(acc, x.denom().clone()));
        let scaled: Option<Vec<Vec<i64>>> = images
            .iter()
            .map(|v| v.iter().map(|x| (x * BigRational::from_integer(scale.clone())).to_integer().to_i64()).collect())
            .collect();
        let scaled = scaled.ok_or(LatticeError::Overflow)?;
        let (basis, lifts) = if scaled.is_empty() || f.is_empty() {
            (vec![Vec::new(); f.len()], vec![Vec::new(); d])
        } else {
            let m = linalg::transpose(&scaled);
            let h = hnf(&m)?;
            let r = h.rank;
            let gens = linalg::transpose(&self.lattice);
            let mut lifts = vec![vec![0i64; r]; d];
            for (i, row) in lifts.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    let mut acc = 0i128;
                    for k in 0..self.lattice.len() {
                        acc += gens[i][k] as i128 * h.transform[k][j] as i128;
                    }
                    *x = i64::try_from(acc).map_err(|_| LatticeError::Overflow)?;
                }
            }
            (h.basis, lifts)
        };
        Ok(Quotient { f, w, basis, lifts, scale })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let fmt = |x: &BigRational| if x.is_integer() { x.to_integer().to_string() } else { x.to_string() };
        serde_json::json!({
            "dim": self.dim,
            "subspace": self.subspace.iter().map(|v| v.iter().map(fmt).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "lattice": self.lattice,
            "discrete_rank": self.discrete_rank(),
            "certificate": self.certificate,
        })
    }

    /// Rank of the discrete component `Λ'` (lattice modulo the subspace).
    pub fn discrete_rank(&self) -> usize {
        self.quotient().map_or(0, |q| q.basis.first().map_or(0, Vec::len))
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        let Ok(q) = self.quotient() else { return false };
        let fv = linalg::mat_vec(&q.f, v);
        in_span(&q, &fv)
    }

    pub fn contains_int(&self, v: &[i64]) -> bool {
        let r: Vec<BigRational> = v.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        self.contains(&r)
    }
}

/// Whether `fv` (quotient coordinates, unscaled) is an integer combination of the quotient basis.
fn in_span(q: &Quotient, fv: &[BigRational]) -> bool {
    let r = q.basis.first().map_or(0, Vec::len);
    if r == 0 {
        return fv.iter().all(Zero::is_zero);
    }
    let b = int_to_rat(&q.basis);
    let s = BigRational::from_integer(q.scale.clone());
    let target: Mat<BigRational> = fv.iter().map(|x| vec![x * &s]).collect();
    match linalg::solve(&b, &target) {
        Some(c) => c.iter().all(|row| row[0].is_integer()),
        None => false,
    }
}

fn rational_vec(v: &[QuadNum]) -> Option<Vec<BigRational>> {
    v.iter().map(|x| x.as_rational().cloned()).collect()
}

fn quad_vec(v: &[BigRational]) -> Vec<QuadNum> {
    v.iter().map(|x| QuadNum::rational(x.clone())).collect()
}

fn quad_mat(m: &Mat<BigRational>) -> Mat<QuadNum> {
    m.iter().map(|r| quad_vec(r)).collect()
}

fn check_dim(k: &PeriodGroup, l: &ExpansionMap) -> Result<(), LatticeError> {
    if k.dim != l.dim() {
        return Err(LatticeError::Dimension(format!("group in dimension {}, map in dimension {}", k.dim, l.dim())));
    }
    Ok(())
}

/// `L·V` is contained in `V`.
fn subspace_invariant(k: &PeriodGroup, l: &ExpansionMap) -> bool {
    if k.subspace.is_empty() {
        return true;
    }
    let base = quad_mat(&k.subspace.to_vec());
    let s = base.len();
    k.subspace.iter().all(|v| {
        let mut m = base.clone();
        m.push(l.apply(&quad_vec(v)));
        linalg::rank(&m) == s
    })
}

/// `L·K ⊆ K`, decided exactly by solving in the quotient Hermite basis.
pub fn check_invariance(k: &PeriodGroup, l: &ExpansionMap) -> bool {
    if check_dim(k, l).is_err() || !subspace_invariant(k, l) {
        return false;
    }
    let Ok(q) = k.quotient() else { return false };
    let fq = quad_mat(&q.f);
    k.lattice.iter().all(|g| {
        let gv: Vec<QuadNum> = g.iter().map(|&x| QuadNum::int(x)).collect();
        let img = linalg::mat_vec(&fq, &l.apply(&gv));
        match rational_vec(&img) {
            Some(r) => in_span(&q, &r),
            None => false,
        }
    })
}

/// `L·K`.
pub fn inflate_periods(k: &PeriodGroup, l: &ExpansionMap) -> Result<PeriodGroup, LatticeError> {
    check_dim(k, l)?;
    let subspace = if subspace_invariant(k, l) {
        k.subspace.clone()
    } else {
        k.subspace
            .iter()
            .map(|v| rational_vec(&l.apply(&quad_vec(v))).ok_or(LatticeError::NonRational))
            .collect::<Result<_, _>>()?
    };
    let gens = k
        .lattice
        .iter()
        .map(|g| {
            let gv: Vec<QuadNum> = g.iter().map(|&x| QuadNum::int(x)).collect();
            l.apply(&gv).iter().map(|x| x.as_integer().ok_or(LatticeError::NonIntegral)).collect()
        })
        .collect::<Result<Vec<Vec<i64>>, _>>()?;
    PeriodGroup::new(k.dim, subspace, gens, k.certificate.clone())
}

/// Integer matrix `C` with `Lⁿ·B' = B'·C` on the quotient basis `B'`.
fn inflation_coordinates(k: &PeriodGroup, l: &ExpansionMap, n: u32) -> Result<(Quotient, IntMatrix), LatticeError> {
    check_dim(k, l)?;
    let ln = l.pow(n);
    if !check_invariance(k, &ln) {
        return Err(LatticeError::NotInvariant);
    }
    let q = k.quotient()?;
    let r = q.basis.first().map_or(0, Vec::len);
    if r == 0 {
        return Ok((q, Vec::new()));
    }
    // L' = F·Lⁿ·W acts on quotient coordinates
    let lq = linalg::mat_mul(&linalg::mat_mul(&quad_mat(&q.f), ln.matrix()), &quad_mat(&q.w));
    let lq: Mat<BigRational> = lq
        .iter()
        .map(|row| rational_vec(row).ok_or(LatticeError::NotInvariant))
        .collect::<Result<_, _>>()?;
    let b = int_to_rat(&q.basis);
    let image = linalg::mat_mul(&lq, &b);
    let c = linalg::solve(&b, &image).ok_or(LatticeError::NotInvariant)?;
    let c: IntMatrix = c
        .iter()
        .map(|row| row.iter().map(|x| rat_to_int(x).ok_or(LatticeError::NotInvariant)).collect())
        .collect::<Result<_, _>>()?;
    Ok((q, c))
}

/// `[Lⁿ·K : K]`, computed as `|det C|` on the discrete component; the subspace contributes 1.
pub fn index_of_inflated(k: &PeriodGroup, l: &ExpansionMap, n: u32) -> Result<u64, LatticeError> {
    let (_, c) = inflation_coordinates(k, l, n)?;
    if c.is_empty() {
        return Ok(1);
    }
    let d = linalg::det(&int_to_rat(&c));
    if d.is_zero() {
        return Err(LatticeError::Singular);
    }
    d.abs().to_integer().to_u64().ok_or(LatticeError::Overflow)
}

pub fn has_trivial_discrete_component(k: &PeriodGroup) -> bool {
    k.discrete_rank() == 0
}

/// Representatives of `K / Lⁿ·K`, lifted into `Λ`, sorted lexicographically.
pub fn coset_representatives(k: &PeriodGroup, l: &ExpansionMap, n: u32) -> Result<Vec<Vec<BigRational>>, LatticeError> {
    let (q, c) = inflation_coordinates(k, l, n)?;
    let d = k.dim;
    if c.is_empty() {
        return Ok(vec![vec![BigRational::zero(); d]]);
    }
    let s = snf(&c)?;
    let diag = s.diagonal();
    let u_inv = linalg::inverse(&int_to_rat(&s.u)).ok_or(LatticeError::Singular)?;
    let r = c.len();
    let mut reps = Vec::new();
    let total: u64 = diag.iter().map(|&x| x.unsigned_abs()).product();
    for idx in 0..total {
        let mut rem = idx;
        let mut x = vec![BigRational::zero(); r];
        for (i, &di) in diag.iter().enumerate() {
            let di = di.unsigned_abs();
            x[i] = BigRational::from_integer(BigInt::from(rem % di));
            rem /= di;
        }
        let y = linalg::mat_vec(&u_inv, &x);
        let lifted = linalg::mat_vec(&int_to_rat(&q.lifts), &y);
        reps.push(lifted);
    }
    debug_assert_eq!(reps.len() as u64, total);
    reps.sort();
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::rat;

    fn check_snf(m: &IntMatrix) {
        let s = snf(m).unwrap();
        let (um, d) = (int_to_rat(&s.u), int_to_rat(&s.d));
        let prod = linalg::mat_mul(&linalg::mat_mul(&um, &int_to_rat(m)), &int_to_rat(&s.v));
        assert_eq!(prod, d);
        let diag = s.diagonal();
        for w in diag.windows(2) {
            if w[0] != 0 {
                assert_eq!(w[1] % w[0], 0, "{diag:?}");
            }
        }
        assert!(diag.iter().all(|&x| x >= 0));
    }

    #[test]
    fn snf_examples() {
        let s = snf(&vec![vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(s.diagonal(), vec![1, 6]);
        let s = snf(&vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(s.diagonal(), vec![1, 1]);
        for m in [
            vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]],
            vec![vec![0, 0], vec![0, 0]],
            vec![vec![6, 10], vec![15, 4], vec![0, 0]],
        ] {
            check_snf(&m);
        }
        assert_eq!(snf(&vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]).unwrap().diagonal(), vec![2, 6, 12]);
    }

    #[test]
    fn hnf_is_canonical() {
        let a = hnf(&vec![vec![0, 5], vec![1, 0]]).unwrap();
        assert_eq!(a.basis, vec![vec![5, 0], vec![0, 1]]);
        let b = hnf(&vec![vec![5, 10, 0], vec![3, 7, 1]]).unwrap();
        assert_eq!(b.rank, 2);
        assert_eq!(b.basis, vec![vec![5, 0], vec![0, 1]]);
        let c = hnf(&vec![vec![4, 6]]).unwrap();
        assert_eq!(c.basis, vec![vec![2]]);
        // transform certificate
        let m = vec![vec![3, 1, 4], vec![1, 5, 9]];
        let h = hnf(&m).unwrap();
        let prod = linalg::mat_mul(&int_to_rat(&m), &int_to_rat(&h.transform));
        for (i, row) in prod.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let expect = if j < h.rank { rat(h.basis[i][j], 1) } else { rat(0, 1) };
                assert_eq!(*x, expect);
            }
        }
        assert_eq!(linalg::det(&int_to_rat(&h.transform)).abs(), rat(1, 1));
    }

    fn lat(dim: usize, gens: Vec<Vec<i64>>) -> PeriodGroup {
        PeriodGroup::lattice_only(dim, gens, PeriodCertificate::Declared { note: "test".into() }).unwrap()
    }

    #[test]
    fn inflation_and_invariance() {
        let z = lat(1, vec![vec![1]]);
        let five = ExpansionMap::scalar(5, 1);
        let lk = inflate_periods(&z, &five).unwrap();
        assert_eq!(lk.lattice(), &[vec![5]]);
        assert!(check_invariance(&z, &five));

        let zx0 = lat(2, vec![vec![1, 0]]);
        let two = ExpansionMap::scalar(2, 2);
        assert_eq!(inflate_periods(&zx0, &two).unwrap().lattice(), &[vec![2, 0]]);
        assert!(check_invariance(&zx0, &two));

        let barcode = PeriodGroup::new(
            2,
            vec![vec![rat(0, 1), rat(1, 1)]],
            vec![],
            PeriodCertificate::Declared { note: "barcode".into() },
        )
        .unwrap();
        let l = ExpansionMap::diagonal(&[QuadNum::phi(), QuadNum::int(2)]).unwrap();
        assert!(l.is_expansive());
        assert!(check_invariance(&barcode, &l));
        assert_eq!(inflate_periods(&barcode, &l).unwrap(), barcode);
        assert!(has_trivial_discrete_component(&barcode));
        assert_eq!(index_of_inflated(&barcode, &l, 3).unwrap(), 1);

        let shear = ExpansionMap::integer(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!shear.is_expansive());
        let ydir = lat(2, vec![vec![0, 1]]);
        assert!(!check_invariance(&ydir, &shear));
        assert_eq!(index_of_inflated(&ydir, &shear, 1), Err(LatticeError::NotInvariant));
    }

    #[test]
    fn index_examples() {
        let z = lat(1, vec![vec![1]]);
        assert_eq!(index_of_inflated(&z, &ExpansionMap::scalar(5, 1), 2).unwrap(), 25);
        let z2 = lat(2, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(index_of_inflated(&z2, &ExpansionMap::scalar(2, 2), 1).unwrap(), 4);
        let e = PeriodGroup::full_space(2);
        assert_eq!(index_of_inflated(&e, &ExpansionMap::scalar(2, 2), 1).unwrap(), 1);
        let mixed = PeriodGroup::new(
            2,
            vec![vec![rat(1, 1), rat(0, 1)]],
            vec![vec![0, 3]],
            PeriodCertificate::Declared { note: "strip".into() },
        )
        .unwrap();
        assert_eq!(mixed.discrete_rank(), 1);
        assert_eq!(index_of_inflated(&mixed, &ExpansionMap::scalar(2, 2), 1).unwrap(), 2);
    }

    #[test]
    fn coset_examples() {
        let k = lat(1, vec![vec![5]]);
        let reps = coset_representatives(&k, &ExpansionMap::scalar(5, 1), 1).unwrap();
        let expect: Vec<Vec<BigRational>> = [0, 5, 10, 15, 20].iter().map(|&x| vec![rat(x, 1)]).collect();
        assert_eq!(reps, expect);
        let trivial = PeriodGroup::trivial(1, PeriodCertificate::Declared { note: "t".into() });
        assert!(has_trivial_discrete_component(&trivial));
        assert_eq!(coset_representatives(&trivial, &ExpansionMap::scalar(5, 1), 1).unwrap(), vec![vec![rat(0, 1)]]);
        let z2 = lat(2, vec![vec![1, 0], vec![0, 1]]);
        let reps = coset_representatives(&z2, &ExpansionMap::integer(&[vec![2, 1], vec![0, 3]]).unwrap(), 1).unwrap();
        assert_eq!(reps.len(), 6);
    }

    #[test]
    fn membership() {
        let k = lat(2, vec![vec![2, 0], vec![1, 3]]);
        assert!(k.contains_int(&[3, 3]));
        assert!(!k.contains_int(&[1, 0]));
        assert!(k.contains_int(&[0, 6]));
        assert!(!k.contains(&[rat(1, 2), rat(0, 1)]));
    }
}
