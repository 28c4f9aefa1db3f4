//! Exact rationals that stay in `i128` until an operation would overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use std::fmt;

type Small = Ratio<i128>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rat {
    Small(Small),
    Big(BigRational),
}

fn shrink(b: BigRational) -> Rat {
    match (b.numer().to_i128(), b.denom().to_i128()) {
        (Some(n), Some(d)) => Rat::Small(Ratio::new_raw(n, d)),
        _ => Rat::Big(b),
    }
}

impl Rat {
    pub fn from_int(n: i128) -> Rat {
        Rat::Small(Ratio::from_integer(n))
    }

    pub fn from_big(b: BigRational) -> Rat {
        shrink(b)
    }

    pub fn new(n: i128, d: i128) -> Rat {
        Rat::Small(Ratio::new(n, d))
    }

    pub fn big(&self) -> BigRational {
        match self {
            Rat::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Rat::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_zero(),
            Rat::Big(b) => b.is_zero(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_integer(),
            Rat::Big(b) => b.is_integer(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rat::Small(r) => BigInt::from(*r.numer()),
            Rat::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rat::Small(r) => BigInt::from(*r.denom()),
            Rat::Big(b) => b.denom().clone(),
        }
    }

    pub fn add(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, o) {
            if let Some(c) = a.checked_add(b) {
                return Rat::Small(c);
            }
        }
        shrink(self.big() + o.big())
    }

    pub fn sub(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, o) {
            if let Some(c) = a.checked_sub(b) {
                return Rat::Small(c);
            }
        }
        shrink(self.big() - o.big())
    }

    pub fn mul(&self, o: &Rat) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, o) {
            if let Some(c) = a.checked_mul(b) {
                return Rat::Small(c);
            }
        }
        shrink(self.big() * o.big())
    }

    pub fn neg(&self) -> Rat {
        match self {
            Rat::Small(a) if *a.numer() != i128::MIN => Rat::Small(-a),
            _ => shrink(-self.big()),
        }
    }

    pub fn inv(&self) -> Rat {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Rat::Small(a) if *a.numer() != i128::MIN => Rat::Small(a.recip()),
            _ => shrink(self.big().recip()),
        }
    }

    /// p-adic valuation; None for zero.
    pub fn valuation(&self, p: u32) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        match self {
            Rat::Small(r) => {
                let p = p as i128;
                let count = |mut x: i128| {
                    let mut v = 0;
                    while x % p == 0 {
                        x /= p;
                        v += 1;
                    }
                    v
                };
                Some(count(*r.numer()) - count(*r.denom()))
            }
            Rat::Big(b) => {
                let p = BigInt::from(p);
                let count = |x: &BigInt| {
                    let mut x = x.clone();
                    let mut v = 0;
                    loop {
                        let (q, r) = x.div_rem(&p);
                        if !r.is_zero() {
                            break v;
                        }
                        x = q;
                        v += 1;
                    }
                };
                Some(count(b.numer()) - count(b.denom()))
            }
        }
    }

    /// The representative in `[0, p^m)` of an element of `Z_(p)` modulo `p^m`.
    pub fn mod_prime_power(&self, p: u32, m: u32) -> BigInt {
        let modulus = BigInt::from(p).pow(m);
        let n = self.numer().mod_floor(&modulus);
        let d = self.denom().mod_floor(&modulus);
        if modulus.is_one() {
            return BigInt::zero();
        }
        let inv = mod_inverse(&d, &modulus).expect("denominator is not a p-adic unit");
        (n * inv).mod_floor(&modulus)
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_negative(),
            Rat::Big(b) => b.is_negative(),
        }
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        if d.is_one() {
            write!(f, "{n}")
        } else {
            write!(f, "{n}/{d}")
        }
    }
}
