//! Dense univariate polynomials over F_q and reduced fractions of them.

use super::fq::Fq;
use serde::{Deserialize, Serialize};

/// Coefficients low degree first, no trailing zeros. The zero polynomial is empty.
pub type Poly = Vec<u16>;

pub fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub fn deg(a: &[u16]) -> Option<usize> {
    a.len().checked_sub(1)
}

/// Index of the lowest nonzero coefficient.
pub fn low(a: &[u16]) -> Option<usize> {
    a.iter().position(|&c| c != 0)
}

pub fn add(f: &Fq, a: &[u16], b: &[u16]) -> Poly {
    let n = a.len().max(b.len());
    let mut r: Poly = (0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(&mut r);
    r
}

pub fn neg(f: &Fq, a: &[u16]) -> Poly {
    a.iter().map(|&c| f.neg(c)).collect()
}

pub fn sub(f: &Fq, a: &[u16], b: &[u16]) -> Poly {
    let n = a.len().max(b.len());
    let mut r: Poly = (0..n)
        .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    trim(&mut r);
    r
}

pub fn mul(f: &Fq, a: &[u16], b: &[u16]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u16; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = f.add(r[i + j], f.mul(x, y));
        }
    }
    trim(&mut r);
    r
}

pub fn scale(f: &Fq, a: &[u16], c: u16) -> Poly {
    if c == 0 {
        return Vec::new();
    }
    a.iter().map(|&x| f.mul(x, c)).collect()
}

pub fn shift(a: &[u16], k: usize) -> Poly {
    if a.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u16; k];
    r.extend_from_slice(a);
    r
}

pub fn divrem(f: &Fq, a: &[u16], b: &[u16]) -> (Poly, Poly) {
    let db = deg(b).expect("division by zero polynomial");
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let lead_inv = f.inv(b[db]);
    let mut quot = vec![0u16; r.len() - db];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = f.mul(*r.last().unwrap(), lead_inv);
        quot[k] = c;
        for (i, &bi) in b.iter().enumerate() {
            r[k + i] = f.sub(r[k + i], f.mul(c, bi));
        }
        trim(&mut r);
    }
    trim(&mut quot);
    (quot, r)
}

pub fn monic(f: &Fq, a: &[u16]) -> Poly {
    match a.last() {
        None => Vec::new(),
        Some(&l) => scale(f, a, f.inv(l)),
    }
}

pub fn gcd(f: &Fq, a: &[u16], b: &[u16]) -> Poly {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divrem(f, &x, &y);
        x = y;
        y = r;
    }
    monic(f, &x)
}

pub fn eval(f: &Fq, a: &[u16], x: u16) -> u16 {
    a.iter().rev().fold(0u16, |acc, &c| f.add(f.mul(acc, x), c))
}

pub fn is_one(a: &[u16]) -> bool {
    a.len() == 1 && a[0] == 1
}

/// A reduced fraction `num/den` with `den` monic; zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn zero() -> RatFn {
        RatFn { num: Vec::new(), den: vec![1] }
    }
    pub fn one() -> RatFn {
        RatFn { num: vec![1], den: vec![1] }
    }
    pub fn poly(p: Poly) -> RatFn {
        let mut p = p;
        trim(&mut p);
        RatFn { num: p, den: vec![1] }
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }
    pub fn is_poly(&self) -> bool {
        is_one(&self.den)
    }

    pub fn new(f: &Fq, num: Poly, den: Poly) -> RatFn {
        let (mut num, mut den) = (num, den);
        trim(&mut num);
        trim(&mut den);
        assert!(!den.is_empty(), "zero denominator");
        if num.is_empty() {
            return RatFn::zero();
        }
        if deg(&den) == Some(0) {
            let c = f.inv(den[0]);
            return RatFn { num: scale(f, &num, c), den: vec![1] };
        }
        let g = gcd(f, &num, &den);
        if !is_one(&g) {
            num = divrem(f, &num, &g).0;
            den = divrem(f, &den, &g).0;
        }
        let l = f.inv(*den.last().unwrap());
        RatFn { num: scale(f, &num, l), den: scale(f, &den, l) }
    }

    pub fn add(&self, f: &Fq, o: &RatFn) -> RatFn {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.is_poly() {
                return RatFn::poly(add(f, &self.num, &o.num));
            }
            return RatFn::new(f, add(f, &self.num, &o.num), self.den.clone());
        }
        let n = add(f, &mul(f, &self.num, &o.den), &mul(f, &o.num, &self.den));
        RatFn::new(f, n, mul(f, &self.den, &o.den))
    }

    pub fn neg(&self, f: &Fq) -> RatFn {
        RatFn { num: neg(f, &self.num), den: self.den.clone() }
    }

    pub fn sub(&self, f: &Fq, o: &RatFn) -> RatFn {
        self.add(f, &o.neg(f))
    }

    pub fn mul(&self, f: &Fq, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        if self.is_poly() && o.is_poly() {
            return RatFn::poly(mul(f, &self.num, &o.num));
        }
        RatFn::new(f, mul(f, &self.num, &o.num), mul(f, &self.den, &o.den))
    }

    pub fn inv(&self, f: &Fq) -> RatFn {
        assert!(!self.is_zero(), "inverse of zero");
        RatFn::new(f, self.den.clone(), self.num.clone())
    }

    /// t-adic valuation; None for zero.
    pub fn valuation(&self) -> Option<i64> {
        let a = low(&self.num)? as i64;
        let b = low(&self.den).unwrap() as i64;
        Some(a - b)
    }
}
