//! Exact arithmetic in a real quadratic field Q(√D).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Field operations shared by the exact solvers (rationals and quadratic numbers).
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_i64(v: i64) -> Self;
    fn signum_ord(&self) -> Ordering;

    fn is_zero_val(&self) -> bool {
        self.signum_ord() == Ordering::Equal
    }

    fn abs_val(&self) -> Self {
        if self.signum_ord() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn signum_ord(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `a + b√d`. A value with `b = 0` is stored with `d = 0` so that equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    a: BigRational,
    b: BigRational,
    d: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum QuadParseError {
    #[error("empty number")]
    Empty,
    #[error("malformed number {0:?}")]
    Malformed(String),
    #[error("radicand {0} is not squarefree and greater than 1")]
    BadRadicand(u64),
}

fn squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

impl QuadNum {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Self {
        if b.is_zero() {
            QuadNum { a, b, d: 0 }
        } else {
            assert!(squarefree(d), "radicand {d} must be squarefree and > 1");
            QuadNum { a, b, d }
        }
    }

    pub fn rational(a: BigRational) -> Self {
        QuadNum { a, b: Zero::zero(), d: 0 }
    }

    pub fn int(v: i64) -> Self {
        Self::rational(BigRational::from_integer(v.into()))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::rational(rat(n, d))
    }

    /// √d itself.
    pub fn sqrt(d: u64) -> Self {
        Self::new(Zero::zero(), One::one(), d)
    }

    /// The golden mean (1+√5)/2.
    pub fn phi() -> Self {
        Self::new(rat(1, 2), rat(1, 2), 5)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    /// The radicand, or 0 for a rational value.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn as_integer(&self) -> Option<i64> {
        let r = self.as_rational()?;
        if r.is_integer() {
            r.to_integer().to_i64()
        } else {
            None
        }
    }

    fn join(x: u64, y: u64) -> u64 {
        match (x, y) {
            (0, d) | (d, 0) => d,
            (p, q) if p == q => p,
            (p, q) => panic!("mixing quadratic fields Q(sqrt {p}) and Q(sqrt {q})"),
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadNum::new(self.a.clone(), -self.b.clone(), self.d)
    }

    /// Field norm `a² − b²d`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into())
    }

    pub fn recip(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "division by zero in Q(sqrt {})", self.d);
        QuadNum::new(&self.a / &n, -(&self.b / &n), self.d)
    }

    pub fn sign(&self) -> Ordering {
        let sa = self.a.signum_ord();
        let sb = self.b.signum_ord();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.into());
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = QuadNum::int(1);
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    /// Decimal rendering rounded half-up to `digits` places; exact integer arithmetic throughout.
    pub fn to_decimal(&self, digits: u32) -> String {
        let q = self.a.denom().lcm(self.b.denom());
        let big_a = self.a.numer() * (&q / self.a.denom());
        let big_b = self.b.numer() * (&q / self.b.denom());
        let m = BigInt::from(10u32).pow(digits);
        // floor(2·B·M·√d)
        let s = {
            let t: BigInt = &big_b * &m * 2;
            let sq: BigInt = &t * &t * BigInt::from(self.d);
            let r = Roots::sqrt(&sq);
            let exact = &r * &r == sq;
            if t.sign() == Sign::Minus {
                if exact {
                    -r
                } else {
                    -r - 1
                }
            } else {
                r
            }
        };
        let num: BigInt = &big_a * &m * 2 + &q + s;
        let rounded: BigInt = num.div_floor(&(&q * 2));
        let neg = rounded.sign() == Sign::Minus;
        let mag = rounded.abs();
        let (ip, fp) = mag.div_rem(&m);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&ip.to_string());
        if digits > 0 {
            let f = fp.to_string();
            out.push('.');
            for _ in f.len()..digits as usize {
                out.push('0');
            }
            out.push_str(&f);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }
}

impl Zero for QuadNum {
    fn zero() -> Self {
        QuadNum::int(0)
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadNum {
    fn one() -> Self {
        QuadNum::int(1)
    }
}

impl Scalar for QuadNum {
    fn from_i64(v: i64) -> Self {
        QuadNum::int(v)
    }
    fn signum_ord(&self) -> Ordering {
        self.sign()
    }
}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadNum {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).sign()
    }
}

impl Add for QuadNum {
    type Output = QuadNum;
    fn add(self, o: QuadNum) -> QuadNum {
        let d = QuadNum::join(self.d, o.d);
        QuadNum::new(self.a + o.a, self.b + o.b, d)
    }
}

impl Sub for QuadNum {
    type Output = QuadNum;
    fn sub(self, o: QuadNum) -> QuadNum {
        let d = QuadNum::join(self.d, o.d);
        QuadNum::new(self.a - o.a, self.b - o.b, d)
    }
}

impl Mul for QuadNum {
    type Output = QuadNum;
    fn mul(self, o: QuadNum) -> QuadNum {
        let d = QuadNum::join(self.d, o.d);
        let dd = BigRational::from_integer(d.into());
        let a = &self.a * &o.a + &self.b * &o.b * dd;
        let b = &self.a * &o.b + &self.b * &o.a;
        QuadNum::new(a, b, d)
    }
}

impl Div for QuadNum {
    type Output = QuadNum;
    fn div(self, o: QuadNum) -> QuadNum {
        self * o.recip()
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::new(-self.a, -self.b, self.d)
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rat(&self.a));
        }
        let b_abs = fmt_rat(&self.b.abs());
        let b_part = if b_abs == "1" {
            format!("√{}", self.d)
        } else {
            format!("{}√{}", b_abs, self.d)
        };
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{b_part}")
            } else {
                write!(f, "{b_part}")
            }
        } else {
            let op = if self.b.is_negative() { '-' } else { '+' };
            write!(f, "{}{}{}", fmt_rat(&self.a), op, b_part)
        }
    }
}

impl fmt::Debug for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn parse_rat(s: &str) -> Result<BigRational, QuadParseError> {
    let bad = || QuadParseError::Malformed(s.to_string());
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Parses a coefficient-times-root term such as `3/2√5`, `√5`, `-√5`.
fn parse_surd(s: &str) -> Result<(BigRational, u64), QuadParseError> {
    let bad = || QuadParseError::Malformed(s.to_string());
    let (coef, rad) = s.split_once('√').ok_or_else(bad)?;
    let d: u64 = rad.trim().parse().map_err(|_| bad())?;
    if !squarefree(d) {
        return Err(QuadParseError::BadRadicand(d));
    }
    let c = match coef.trim() {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        c => parse_rat(c.trim_end_matches('*'))?,
    };
    Ok((c, d))
}

impl FromStr for QuadNum {
    type Err = QuadParseError;

    /// Accepts `p/q`, `r/s√D`, `p/q+r/s√D` and `p/q-r/s√D`; `sqrt` may stand in for `√`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.replace("sqrt", "√").chars().filter(|c| !c.is_whitespace()).collect();
        if norm.is_empty() {
            return Err(QuadParseError::Empty);
        }
        if !norm.contains('√') {
            return Ok(QuadNum::rational(parse_rat(&norm)?));
        }
        // split at the last sign that is not the leading one
        let bytes: Vec<char> = norm.chars().collect();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == '+' || bytes[i] == '-') && bytes[i - 1] != '/' {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let head: String = bytes[..i].iter().collect();
                let tail: String = bytes[i..].iter().collect();
                let a = parse_rat(&head)?;
                let (b, d) = parse_surd(&tail)?;
                Ok(QuadNum::new(a, b, d))
            }
            None => {
                let (b, d) = parse_surd(&norm)?;
                Ok(QuadNum::new(Zero::zero(), b, d))
            }
        }
    }
}

impl serde::Serialize for QuadNum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for QuadNum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_identities() {
        let phi = QuadNum::phi();
        // φ² = φ + 1
        assert_eq!(phi.clone() * phi.clone(), phi.clone() + QuadNum::int(1));
        // 1/φ = φ − 1
        assert_eq!(phi.recip(), phi.clone() - QuadNum::int(1));
        assert_eq!(phi.pow(4), "7/2+3/2√5".parse().unwrap());
    }

    #[test]
    fn sign_is_exact() {
        let x: QuadNum = "3-4/3√5".parse().unwrap(); // 3 - 2.98...
        assert_eq!(x.sign(), Ordering::Greater);
        let y: QuadNum = "2-√5".parse().unwrap();
        assert_eq!(y.sign(), Ordering::Less);
        assert!(QuadNum::phi() > QuadNum::frac(161, 100));
        assert!(QuadNum::phi() < QuadNum::frac(162, 100));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "-3/4", "√5", "-√5", "1/2+1/2√5", "2-3√2", "-1/3+5/7√3"] {
            let q: QuadNum = s.parse().unwrap();
            let back: QuadNum = q.to_string().parse().unwrap();
            assert_eq!(q, back, "{s}");
        }
        assert!("1+√4".parse::<QuadNum>().is_err());
        assert!("x".parse::<QuadNum>().is_err());
    }

    #[test]
    fn decimal_rendering_rounds_half_up() {
        assert_eq!(QuadNum::phi().to_decimal(6), "1.618034");
        assert_eq!(QuadNum::frac(-1, 8).to_decimal(2), "-0.12");
        assert_eq!(QuadNum::frac(5, 2).to_decimal(0), "3");
        assert_eq!((-QuadNum::phi()).to_decimal(3), "-1.618");
        assert_eq!(QuadNum::int(7).to_decimal(2), "7.00");
    }
}
