//! Global exact models of non-Archimedean local fields.
//!
//! `PAdic(p)` is Q with the p-adic valuation and `Laurent(q)` is F_q(t) with
//! the t-adic valuation. Only finitely many digits are ever inspected, so the
//! global models stand in for Q_p and F_q((t)) without precision loss.

pub mod fq;
pub mod poly;
pub mod rat;
mod text;

use crate::error::{Error, Result};
use fq::{Fq, SubfieldEmbedding};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use poly::RatFn;
use rat::Rat;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldElement {
    Q(Rat),
    F(RatFn),
}

enum Kind {
    PAdic { p: u32, fp: Option<Fq> },
    Laurent { fq: Fq, var: char },
}

#[derive(Clone)]
pub struct FieldModel(Arc<Kind>);

impl fmt::Debug for FieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

impl PartialEq for FieldModel {
    fn eq(&self, other: &Self) -> bool {
        match (&*self.0, &*other.0) {
            (Kind::PAdic { p: a, .. }, Kind::PAdic { p: b, .. }) => a == b,
            (Kind::Laurent { fq: a, var: x }, Kind::Laurent { fq: b, var: y }) => a == b && x == y,
            _ => false,
        }
    }
}
impl Eq for FieldModel {}

/// Valuation with `None` standing for +infinity.
pub type Val = Option<i64>;

/// `min` on valuations where `None` is +infinity.
pub fn vmin(a: Val, b: Val) -> Val {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl FieldModel {
    pub fn padic(p: u32) -> Result<FieldModel> {
        if !fq::is_prime(p) {
            return Err(Error::input(format!("{p} is not prime")));
        }
        let fp = (p <= fq::MAX_ORDER).then(|| Fq::new(p).unwrap());
        Ok(FieldModel(Arc::new(Kind::PAdic { p, fp })))
    }

    pub fn laurent(q: u32) -> Result<FieldModel> {
        Ok(FieldModel(Arc::new(Kind::Laurent { fq: Fq::new(q)?, var: 't' })))
    }

    pub fn laurent_with_modulus(p: u32, modulus: Vec<u32>) -> Result<FieldModel> {
        Ok(FieldModel(Arc::new(Kind::Laurent { fq: Fq::with_modulus(p, modulus)?, var: 't' })))
    }

    fn laurent_var(fq: Fq, var: char) -> FieldModel {
        FieldModel(Arc::new(Kind::Laurent { fq, var }))
    }

    /// Parses `padic:p` or `laurent:q`.
    pub fn from_spec(s: &str) -> Result<FieldModel> {
        let (kind, n) = s
            .split_once(':')
            .ok_or_else(|| Error::input(format!("field spec {s:?} is not kind:number")))?;
        let n: u32 = n.trim().parse().map_err(|_| Error::input(format!("bad number in {s:?}")))?;
        match kind.trim() {
            "padic" => FieldModel::padic(n),
            "laurent" => FieldModel::laurent(n),
            k => Err(Error::input(format!("unknown field kind {k:?}"))),
        }
    }

    pub fn spec(&self) -> String {
        match &*self.0 {
            Kind::PAdic { p, .. } => format!("padic:{p}"),
            Kind::Laurent { fq, var: 't' } => format!("laurent:{}", fq.order()),
            Kind::Laurent { fq, var } => format!("laurent:{}[{var}]", fq.order()),
        }
    }

    pub fn is_padic(&self) -> bool {
        matches!(&*self.0, Kind::PAdic { .. })
    }

    pub fn fq(&self) -> Option<&Fq> {
        match &*self.0 {
            Kind::Laurent { fq, .. } => Some(fq),
            Kind::PAdic { .. } => None,
        }
    }

    /// The residue field as a table-backed finite field.
    pub fn residue_field(&self) -> Result<&Fq> {
        match &*self.0 {
            Kind::Laurent { fq, .. } => Ok(fq),
            Kind::PAdic { fp: Some(fp), .. } => Ok(fp),
            Kind::PAdic { p, .. } => Err(Error::budget("residue field tables", *p as u128, fq::MAX_ORDER as u128)),
        }
    }

    pub fn var(&self) -> char {
        match &*self.0 {
            Kind::Laurent { var, .. } => *var,
            Kind::PAdic { .. } => 'p',
        }
    }

    pub fn characteristic(&self) -> u32 {
        match &*self.0 {
            Kind::PAdic { .. } => 0,
            Kind::Laurent { fq, .. } => fq.p(),
        }
    }

    /// Residue field size q.
    pub fn residue_size(&self) -> u32 {
        match &*self.0 {
            Kind::PAdic { p, .. } => *p,
            Kind::Laurent { fq, .. } => fq.order(),
        }
    }

    pub fn zero(&self) -> FieldElement {
        match &*self.0 {
            Kind::PAdic { .. } => FieldElement::Q(Rat::from_int(0)),
            Kind::Laurent { .. } => FieldElement::F(RatFn::zero()),
        }
    }

    pub fn one(&self) -> FieldElement {
        self.int(1)
    }

    pub fn int(&self, n: i64) -> FieldElement {
        match &*self.0 {
            Kind::PAdic { .. } => FieldElement::Q(Rat::from_int(n as i128)),
            Kind::Laurent { fq, .. } => FieldElement::F(RatFn::poly(vec![fq.from_int(n)])),
        }
    }

    pub fn uniformizer(&self) -> FieldElement {
        self.pi_pow(1)
    }

    /// `pi^k` for any integer k.
    pub fn pi_pow(&self, k: i64) -> FieldElement {
        match &*self.0 {
            Kind::PAdic { p, .. } => {
                let b = BigInt::from(*p).pow(k.unsigned_abs() as u32);
                let r = Rat::from_big(num_rational::BigRational::from_integer(b));
                FieldElement::Q(if k >= 0 { r } else { r.inv() })
            }
            Kind::Laurent { .. } => {
                let mut m = vec![0u16; k.unsigned_abs() as usize];
                m.push(1);
                let r = RatFn::poly(m);
                FieldElement::F(if k >= 0 { r } else { RatFn { num: vec![1], den: r.num } })
            }
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (&*self.0, a, b) {
            (Kind::PAdic { .. }, FieldElement::Q(x), FieldElement::Q(y)) => FieldElement::Q(x.add(y)),
            (Kind::Laurent { fq, .. }, FieldElement::F(x), FieldElement::F(y)) => FieldElement::F(x.add(fq, y)),
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (&*self.0, a, b) {
            (Kind::PAdic { .. }, FieldElement::Q(x), FieldElement::Q(y)) => FieldElement::Q(x.sub(y)),
            (Kind::Laurent { fq, .. }, FieldElement::F(x), FieldElement::F(y)) => FieldElement::F(x.sub(fq, y)),
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (&*self.0, a, b) {
            (Kind::PAdic { .. }, FieldElement::Q(x), FieldElement::Q(y)) => FieldElement::Q(x.mul(y)),
            (Kind::Laurent { fq, .. }, FieldElement::F(x), FieldElement::F(y)) => FieldElement::F(x.mul(fq, y)),
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        match (&*self.0, a) {
            (Kind::PAdic { .. }, FieldElement::Q(x)) => FieldElement::Q(x.neg()),
            (Kind::Laurent { fq, .. }, FieldElement::F(x)) => FieldElement::F(x.neg(fq)),
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    pub fn inv(&self, a: &FieldElement) -> FieldElement {
        match (&*self.0, a) {
            (Kind::PAdic { .. }, FieldElement::Q(x)) => FieldElement::Q(x.inv()),
            (Kind::Laurent { fq, .. }, FieldElement::F(x)) => FieldElement::F(x.inv(fq)),
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.mul(a, &self.inv(b))
    }

    pub fn pow(&self, a: &FieldElement, e: u32) -> FieldElement {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    pub fn valuation(&self, a: &FieldElement) -> Val {
        match (&*self.0, a) {
            (Kind::PAdic { p, .. }, FieldElement::Q(x)) => x.valuation(*p),
            (Kind::Laurent { .. }, FieldElement::F(x)) => x.valuation(),
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    pub fn is_integral(&self, a: &FieldElement) -> bool {
        self.valuation(a).map_or(true, |v| v >= 0)
    }

    /// The canonical representative of `a` modulo `pi^m`, for `a` in O.
    /// PAdic representatives are integers in `[0, p^m)`, Laurent ones are
    /// polynomials in t of degree below m.
    pub fn reduce(&self, a: &FieldElement, m: u32) -> FieldElement {
        debug_assert!(self.is_integral(a));
        match (&*self.0, a) {
            (Kind::PAdic { p, .. }, FieldElement::Q(x)) => {
                if x.is_integer() && !x.is_negative() {
                    if let Some(pm) = (*p as i128).checked_pow(m) {
                        if let Rat::Small(r) = x {
                            return FieldElement::Q(Rat::from_int(r.numer() % pm));
                        }
                    }
                }
                let r = x.mod_prime_power(*p, m);
                FieldElement::Q(Rat::from_big(num_rational::BigRational::from_integer(r)))
            }
            (Kind::Laurent { fq, .. }, FieldElement::F(x)) => {
                let m = m as usize;
                if x.is_poly() {
                    let mut n: Vec<u16> = x.num.iter().take(m).copied().collect();
                    poly::trim(&mut n);
                    return FieldElement::F(RatFn::poly(n));
                }
                FieldElement::F(RatFn::poly(series(fq, x, m)))
            }
            _ => panic!("element does not belong to {}", self.spec()),
        }
    }

    /// The first m digits of the pi-adic expansion of `a` in O, each a
    /// residue-field index.
    pub fn digits(&self, a: &FieldElement, m: u32) -> Vec<u16> {
        match (&*self.0, self.reduce(a, m)) {
            (Kind::PAdic { p, .. }, FieldElement::Q(x)) => {
                let mut n = x.numer();
                let pb = BigInt::from(*p);
                (0..m)
                    .map(|_| {
                        let d = (&n % &pb).to_u16().unwrap();
                        n /= &pb;
                        d
                    })
                    .collect()
            }
            (Kind::Laurent { .. }, FieldElement::F(x)) => {
                (0..m as usize).map(|i| *x.num.get(i).unwrap_or(&0)).collect()
            }
            _ => unreachable!(),
        }
    }

    /// Residue class of `a` in O as an index into the residue field.
    pub fn residue(&self, a: &FieldElement) -> u16 {
        self.digits(a, 1)[0]
    }

    /// The constant lift of a residue index: an integer in `[0, p)` or a
    /// constant polynomial.
    pub fn lift(&self, r: u16) -> FieldElement {
        match &*self.0 {
            Kind::PAdic { .. } => FieldElement::Q(Rat::from_int(r as i128)),
            Kind::Laurent { .. } => FieldElement::F(RatFn::poly(vec![r])),
        }
    }

    /// Builds `sum_k lift(d_k) pi^k`.
    pub fn from_digits(&self, d: &[u16]) -> FieldElement {
        match &*self.0 {
            Kind::PAdic { p, .. } => {
                let n = d.iter().rev().fold(BigInt::from(0), |acc, &x| acc * *p + x);
                FieldElement::Q(Rat::from_big(num_rational::BigRational::from_integer(n)))
            }
            Kind::Laurent { .. } => FieldElement::F(RatFn::poly(d.to_vec())),
        }
    }

    /// The q^m canonical representatives of O / pi^m O in a fixed order:
    /// representative number k has base-q digits k_0, k_1, .. as its
    /// pi-adic digits.
    pub fn enumerate_residues(&self, m: u32) -> Vec<FieldElement> {
        let q = self.residue_size() as u64;
        let total = q.pow(m);
        (0..total)
            .map(|mut k| {
                let d: Vec<u16> = (0..m)
                    .map(|_| {
                        let x = (k % q) as u16;
                        k /= q;
                        x
                    })
                    .collect();
                self.from_digits(&d)
            })
            .collect()
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        match a {
            FieldElement::Q(x) => x.is_zero(),
            FieldElement::F(x) => x.is_zero(),
        }
    }

    pub fn parse(&self, s: &str) -> Result<FieldElement> {
        text::parse(self, s)
    }

    pub fn format(&self, a: &FieldElement) -> String {
        text::format(self, a)
    }

    /// A random element with valuation in `[lo, hi]` or zero, for tests.
    pub fn random<R: rand::Rng>(&self, rng: &mut R, lo: i64, hi: i64, digits: u32) -> FieldElement {
        let q = self.residue_size();
        let mut d: Vec<u16> = (0..digits).map(|_| rng.gen_range(0..q) as u16).collect();
        if d.iter().all(|&x| x == 0) {
            if rng.gen_bool(0.1) {
                return self.zero();
            }
            d[0] = 1;
        }
        let v = rng.gen_range(lo..=hi);
        let unit = {
            let x = self.from_digits(&d);
            let vx = self.valuation(&x).unwrap();
            self.mul(&x, &self.pi_pow(-vx))
        };
        let mut x = self.mul(&unit, &self.pi_pow(v));
        if rng.gen_bool(0.3) {
            // a denominator that is a unit
            let mut u: Vec<u16> = (0..digits.max(1)).map(|_| rng.gen_range(0..q) as u16).collect();
            u[0] = 1 + rng.gen_range(0..q - 1) as u16;
            x = self.div(&x, &self.from_digits(&u));
        }
        if rng.gen_bool(0.5) {
            x = self.neg(&x);
        }
        x
    }
}

/// Power series coefficients of a rational function with unit denominator, mod t^m.
fn series(fq: &Fq, x: &RatFn, m: usize) -> Vec<u16> {
    let d0 = *x.den.first().unwrap_or(&0);
    assert!(d0 != 0, "element is not integral");
    let inv0 = fq.inv(d0);
    let mut out = vec![0u16; m];
    for k in 0..m {
        // out_k = (num_k - sum_{j=1..k} den_j out_{k-j}) / den_0
        let mut acc = *x.num.get(k).unwrap_or(&0);
        for j in 1..=k {
            if let Some(&dj) = x.den.get(j) {
                acc = fq.sub(acc, fq.mul(dj, out[k - j]));
            }
        }
        out[k] = fq.mul(acc, inv0);
    }
    poly::trim(&mut out);
    out
}

impl fmt::Display for FieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

/// An equal-characteristic extension K/k with residue degree f and
/// ramification index e: K is F_{q^f}(s) with s^e = t.
#[derive(Clone, Debug)]
pub struct ExtensionDescriptor {
    base: FieldModel,
    ext: FieldModel,
    e: u32,
    f: u32,
    emb: SubfieldEmbedding,
}

impl ExtensionDescriptor {
    pub fn new(base: &FieldModel, f: u32, e: u32) -> Result<ExtensionDescriptor> {
        let small = base
            .fq()
            .ok_or_else(|| Error::Unsupported("extensions of the p-adic model".into()))?;
        if e == 0 || f == 0 {
            return Err(Error::input("e and f must be positive"));
        }
        let m = small.degree() * f;
        let big = if f == 1 {
            small.clone()
        } else {
            Fq::with_modulus(small.p(), fq::smallest_irreducible(small.p(), m))?
        };
        let emb = SubfieldEmbedding::new(small, &big)?;
        let var = if e == 1 { base.var() } else { 's' };
        Ok(ExtensionDescriptor { base: base.clone(), ext: FieldModel::laurent_var(big, var), e, f, emb })
    }

    pub fn base(&self) -> &FieldModel {
        &self.base
    }
    pub fn ext(&self) -> &FieldModel {
        &self.ext
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    pub fn degree(&self) -> u32 {
        self.e * self.f
    }
    pub fn embedding(&self) -> &SubfieldEmbedding {
        &self.emb
    }

    fn embed_poly(&self, a: &[u16]) -> Vec<u16> {
        let e = self.e as usize;
        let mut out = vec![0u16; if a.is_empty() { 0 } else { (a.len() - 1) * e + 1 }];
        for (k, &c) in a.iter().enumerate() {
            out[k * e] = self.emb.map(c);
        }
        out
    }

    /// The image of a base element: t goes to s^e and F_q to F_{q^f}.
    pub fn embed(&self, x: &FieldElement) -> Result<FieldElement> {
        match x {
            FieldElement::F(r) => {
                // both parts stay coprime and the denominator stays monic
                Ok(FieldElement::F(RatFn { num: self.embed_poly(&r.num), den: self.embed_poly(&r.den) }))
            }
            FieldElement::Q(_) => Err(Error::Unsupported("extensions of the p-adic model".into())),
        }
    }

    fn restrict_poly(&self, a: &[u16]) -> Option<Vec<u16>> {
        let e = self.e as usize;
        let mut out = Vec::new();
        for (k, &c) in a.iter().enumerate() {
            if k % e != 0 {
                if c != 0 {
                    return None;
                }
                continue;
            }
            out.push(self.emb.preimage(c)?);
        }
        Some(out)
    }

    /// The preimage of an extension element lying in the base field.
    pub fn restrict(&self, y: &FieldElement) -> Option<FieldElement> {
        match y {
            FieldElement::F(r) => Some(FieldElement::F(RatFn {
                num: self.restrict_poly(&r.num)?,
                den: self.restrict_poly(&r.den)?,
            })),
            FieldElement::Q(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let q2 = FieldModel::padic(2).unwrap();
        assert_eq!(q2.valuation(&q2.int(12)), Some(2));
        let f2 = FieldModel::laurent(2).unwrap();
        let x = f2.parse("t^2/(1+t)").unwrap();
        assert_eq!(f2.valuation(&x), Some(2));
        assert_eq!(f2.valuation(&f2.one()), Some(0));
        assert_eq!(q2.valuation(&q2.zero()), None);

        let r: Vec<String> = q2.enumerate_residues(2).iter().map(|x| q2.format(x)).collect();
        assert_eq!(r, ["0", "1", "2", "3"]);
        let r: Vec<String> = f2.enumerate_residues(2).iter().map(|x| f2.format(x)).collect();
        assert_eq!(r, ["0", "1", "t", "1+t"]);
        assert_eq!(FieldModel::padic(3).unwrap().enumerate_residues(1).len(), 3);
    }

    #[test]
    fn reduce_rational_functions() {
        let f2 = FieldModel::laurent(2).unwrap();
        // 1/(1+t) = 1 + t + t^2 + ...
        let x = f2.parse("1/(1+t)").unwrap();
        assert_eq!(f2.format(&f2.reduce(&x, 3)), "1+t+t^2");
        let q3 = FieldModel::padic(3).unwrap();
        let x = q3.parse("1/2").unwrap();
        // 2 * 5 = 10 = 1 mod 9
        assert_eq!(q3.format(&q3.reduce(&x, 2)), "5");
        assert_eq!(q3.digits(&q3.int(5), 2), vec![2, 1]);
    }

    #[test]
    fn embedding_examples() {
        let f2 = FieldModel::laurent(2).unwrap();
        let ext = ExtensionDescriptor::new(&f2, 1, 2).unwrap();
        let y = ext.embed(&f2.parse("t").unwrap()).unwrap();
        assert_eq!(ext.ext().format(&y), "s^2");
        assert_eq!(ext.ext().valuation(&y), Some(2));

        let ext = ExtensionDescriptor::new(&f2, 2, 1).unwrap();
        let y = ext.embed(&f2.parse("1+t").unwrap()).unwrap();
        assert_eq!(ext.ext().format(&y), "1+t");

        let ext = ExtensionDescriptor::new(&f2, 2, 2).unwrap();
        let x = f2.parse("t/(1+t)").unwrap();
        let y = ext.embed(&x).unwrap();
        assert_eq!(ext.ext().format(&y), "(s^2)/(1+s^2)");
        assert_eq!(ext.ext().valuation(&y), Some(2));
        assert_eq!(ext.restrict(&y), Some(x));
        assert_eq!(ext.restrict(&ext.ext().parse("s").unwrap()), None);
    }

    #[test]
    fn padic_rejects_extensions() {
        let q2 = FieldModel::padic(2).unwrap();
        assert!(matches!(ExtensionDescriptor::new(&q2, 1, 2), Err(Error::Unsupported(_))));
    }
}
