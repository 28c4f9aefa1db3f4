//! Finite fields F_q = F_p[w]/(g) backed by lookup tables.
//!
//! An element is stored as its index `sum c_i p^i`, where `c_i` is the
//! coefficient of `w^i`. Index 0 is zero and index 1 is one.

use crate::error::{Error, Result};

/// Largest field order for which tables are built.
pub const MAX_ORDER: u32 = 1024;

#[derive(Clone, Debug)]
pub struct Fq {
    p: u32,
    m: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for Fq {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u32;
    while (k as u64) * (k as u64) <= n as u64 {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Writes `q` as `p^m` if it is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while q % p != 0 {
        p += 1;
    }
    let (mut r, mut m) = (q, 0);
    while r % p == 0 {
        r /= p;
        m += 1;
    }
    (r == 1).then_some((p, m))
}

// Polynomials over F_p, low degree first, used only while building tables.
fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn pmod(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &bi) in b.iter().enumerate() {
            let sub = (c as u64 * bi as u64 % p as u64) as u32;
            r[k + i] = (r[k + i] + p - sub) % p;
        }
        trim(&mut r);
    }
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn digits(mut x: u32, p: u32, m: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let d = x % p;
            x /= p;
            d
        })
        .collect()
}

fn undigits(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Monic polynomials of degree `m` over F_p in lexicographic order of
/// `(c_0, c_1, .., c_{m-1})`.
fn monic_lex(p: u32, m: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(m);
    (0..total).map(move |k| {
        // c_0 is the most significant digit
        let mut c = vec![0u32; m as usize + 1];
        let mut r = k;
        for i in (0..m as usize).rev() {
            c[i] = (r % p as u64) as u32;
            r /= p as u64;
        }
        c[m as usize] = 1;
        c
    })
}

pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() as u32 - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for g in monic_lex(p, d) {
            if pmod(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `m`
/// over F_p, coefficients compared from the constant term upwards.
pub fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    monic_lex(p, m)
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

impl Fq {
    pub fn new(q: u32) -> Result<Fq> {
        let (p, m) = prime_power(q).ok_or_else(|| Error::input(format!("{q} is not a prime power")))?;
        Fq::with_modulus(p, smallest_irreducible(p, m))
    }

    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        let m = modulus.len() as u32 - 1;
        if modulus.last() != Some(&1) || modulus.iter().any(|&c| c >= p) {
            return Err(Error::input("modulus must be monic with coefficients in [0, p)"));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::input("modulus is not irreducible"));
        }
        let q64 = (p as u64).pow(m);
        if q64 > MAX_ORDER as u64 {
            return Err(Error::input(format!("field order {q64} exceeds {MAX_ORDER}")));
        }
        let q = q64 as u32;
        let n = q as usize;
        let mut add = vec![0u16; n * n];
        let mut mul = vec![0u16; n * n];
        let mut neg = vec![0u16; n];
        let mut inv = vec![0u16; n];
        let ds: Vec<Vec<u32>> = (0..q).map(|x| digits(x, p, m)).collect();
        for a in 0..n {
            neg[a] = undigits(&ds[a].iter().map(|&c| (p - c) % p).collect::<Vec<_>>(), p) as u16;
            for b in 0..n {
                let s: Vec<u32> = ds[a].iter().zip(&ds[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * n + b] = undigits(&s, p) as u16;
                let mut prod = vec![0u32; 2 * m as usize];
                for (i, &x) in ds[a].iter().enumerate() {
                    for (j, &y) in ds[b].iter().enumerate() {
                        prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
                    }
                }
                let mut r = pmod(&prod, &modulus, p);
                r.resize(m as usize, 0);
                mul[a * n + b] = undigits(&r, p) as u16;
            }
        }
        for a in 1..n {
            inv[a] = (1..n).find(|&b| mul[a * n + b] == 1).unwrap() as u16;
        }
        Ok(Fq { p, m, q, modulus, add, mul, neg, inv })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.m
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        self.add[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.q as usize + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u16) -> u16 {
        self.neg[a as usize]
    }
    #[inline]
    pub fn sub(&self, a: u16, b: u16) -> u16 {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "inverse of zero in F_q");
        self.inv[a as usize]
    }

    pub fn pow(&self, a: u16, mut e: u64) -> u16 {
        let (mut r, mut b) = (1u16, a);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    /// The image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&self, n: i64) -> u16 {
        n.rem_euclid(self.p as i64) as u16
    }

    /// Coefficients of the element as a polynomial in the generator w.
    pub fn coeffs(&self, a: u16) -> Vec<u32> {
        digits(a as u32, self.p, self.m)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> u16 {
        let mut c = c.iter().map(|&x| x % self.p).collect::<Vec<_>>();
        let mut r = pmod(&c, &self.modulus, self.p);
        r.resize(self.m as usize, 0);
        c = r;
        undigits(&c, self.p) as u16
    }

    /// The generator w, which has index p. Prime fields have none.
    pub fn generator(&self) -> Option<u16> {
        (self.m > 1).then_some(self.p as u16)
    }

    /// Evaluates a polynomial with F_p coefficients at `x`.
    pub fn eval_fp_poly(&self, f: &[u32], x: u16) -> u16 {
        f.iter().rev().fold(0u16, |acc, &c| self.add(self.mul(acc, x), c as u16))
    }
}

/// A fixed embedding F_q -> F_{q^f}: the generator of the small field is
/// sent to the root of its modulus with the smallest index in the big field.
#[derive(Clone, Debug)]
pub struct SubfieldEmbedding {
    image: Vec<u16>,
    preimage: Vec<Option<u16>>,
    /// Coordinates of each big-field element in the basis 1, W, .., W^{f-1}
    /// over the small field, W the generator of the big field.
    coords: Vec<Vec<u16>>,
}

impl SubfieldEmbedding {
    pub fn new(small: &Fq, big: &Fq) -> Result<Self> {
        if small.p != big.p || big.m % small.m != 0 {
            return Err(Error::input("not a subfield"));
        }
        let f = (big.m / small.m) as usize;
        let root = if small.m == 1 {
            0
        } else {
            (0..big.q as u16)
                .find(|&x| big.eval_fp_poly(&small.modulus, x) == 0)
                .ok_or_else(|| Error::input("modulus has no root in the extension"))?
        };
        let image: Vec<u16> = (0..small.q as u16)
            .map(|a| {
                let c = small.coeffs(a);
                if small.m == 1 {
                    c[0] as u16
                } else {
                    c.iter().rev().fold(0u16, |acc, &ci| big.add(big.mul(acc, root), ci as u16))
                }
            })
            .collect();
        let mut preimage = vec![None; big.q as usize];
        for (a, &b) in image.iter().enumerate() {
            preimage[b as usize] = Some(a as u16);
        }
        let gen = if big.m == 1 { 0 } else { big.p as u16 };
        let powers: Vec<u16> = (0..f).map(|k| big.pow(gen, k as u64)).collect();
        let mut coords = vec![Vec::new(); big.q as usize];
        let total = (small.q as u64).pow(f as u32);
        for k in 0..total {
            let mut r = k;
            let mut gamma = vec![0u16; f];
            for g in gamma.iter_mut() {
                *g = (r % small.q as u64) as u16;
                r /= small.q as u64;
            }
            let x = gamma
                .iter()
                .zip(&powers)
                .fold(0u16, |acc, (&g, &w)| big.add(acc, big.mul(image[g as usize], w)));
            coords[x as usize] = gamma;
        }
        if coords.iter().any(|c| c.is_empty()) {
            return Err(Error::input("powers of the generator are not a basis"));
        }
        Ok(SubfieldEmbedding { image, preimage, coords })
    }

    pub fn map(&self, a: u16) -> u16 {
        self.image[a as usize]
    }
    pub fn preimage(&self, b: u16) -> Option<u16> {
        self.preimage[b as usize]
    }
    pub fn coords(&self, b: u16) -> &[u16] {
        &self.coords[b as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small() {
        for q in [2, 3, 4, 8, 9] {
            let f = Fq::new(q).unwrap();
            for a in 0..q as u16 {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in 0..q as u16 {
                    for c in 0..q as u16 {
                        let l = f.mul(a, f.add(b, c));
                        let r = f.add(f.mul(a, b), f.mul(a, c));
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    #[test]
    fn smallest_moduli() {
        assert_eq!(smallest_irreducible(2, 2), vec![1, 1, 1]);
        // x^3 + x^2 + 1 precedes x^3 + x + 1 when c_0 is compared first
        assert_eq!(smallest_irreducible(2, 3), vec![1, 0, 1, 1]);
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
    }

    #[test]
    fn embedding_is_a_homomorphism() {
        let small = Fq::new(4).unwrap();
        let big = Fq::new(16).unwrap();
        let e = SubfieldEmbedding::new(&small, &big).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(e.map(small.mul(a, b)), big.mul(e.map(a), e.map(b)));
                assert_eq!(e.map(small.add(a, b)), big.add(e.map(a), e.map(b)));
            }
        }
    }
}
