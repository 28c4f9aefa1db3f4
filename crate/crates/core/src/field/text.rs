//! Text syntax: "a/b" for p-adic elements, expressions in t (or s) and the
//! residue generator w for Laurent elements, e.g. "(1+w*t)/(t^2)".

use super::poly::{self, RatFn};
use super::rat::Rat;
use super::{FieldElement, FieldModel};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;

pub fn parse(model: &FieldModel, s: &str) -> Result<FieldElement> {
    if model.is_padic() {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| Error::input(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.parse().map_err(|_| Error::input(format!("bad denominator in {s:?}")))?;
        if d == BigInt::from(0) {
            return Err(Error::input("zero denominator"));
        }
        return Ok(FieldElement::Q(Rat::from_big(BigRational::new(n, d))));
    }
    let mut p = Parser { model, s: s.as_bytes(), i: 0 };
    let v = p.expr()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(Error::input(format!("unexpected input at byte {} of {s:?}", p.i)));
    }
    Ok(v)
}

struct Parser<'a> {
    model: &'a FieldModel,
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }
    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::input(format!("{what} at byte {}", self.i)))
    }

    fn expr(&mut self) -> Result<FieldElement> {
        let m = self.model;
        let mut v = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.i += 1;
                    let t = self.term()?;
                    v = m.add(&v, &t);
                }
                b'-' => {
                    self.i += 1;
                    let t = self.term()?;
                    v = m.sub(&v, &t);
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<FieldElement> {
        let m = self.model;
        let mut v = self.power()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.i += 1;
                    let t = self.power()?;
                    v = m.mul(&v, &t);
                }
                b'/' => {
                    self.i += 1;
                    let t = self.power()?;
                    if m.is_zero(&t) {
                        return self.err("division by zero");
                    }
                    v = m.div(&v, &t);
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn power(&mut self) -> Result<FieldElement> {
        let m = self.model;
        if self.peek() == Some(b'-') {
            self.i += 1;
            let v = self.power()?;
            return Ok(m.neg(&v));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let neg = if self.peek() == Some(b'-') {
                self.i += 1;
                true
            } else {
                false
            };
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| Error::input("exponent too large"))?;
            let mut v = m.pow(&base, e);
            if neg {
                if m.is_zero(&v) {
                    return self.err("division by zero");
                }
                v = m.inv(&v);
            }
            return Ok(v);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().map_err(|_| Error::input("number too large"))
    }

    fn atom(&mut self) -> Result<FieldElement> {
        let m = self.model;
        let fq = m.fq().unwrap();
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.i += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(FieldElement::F(RatFn::poly(vec![(n % fq.p() as u64) as u16])))
            }
            Some(b'w') => {
                self.i += 1;
                match fq.generator() {
                    Some(g) => Ok(FieldElement::F(RatFn::poly(vec![g]))),
                    None => self.err("w is not defined over a prime field"),
                }
            }
            Some(c) if c as char == m.var() => {
                self.i += 1;
                Ok(m.uniformizer())
            }
            _ => self.err("unexpected character"),
        }
    }
}

fn fq_string(model: &FieldModel, c: u16) -> String {
    let fq = model.fq().unwrap();
    if fq.degree() == 1 {
        return c.to_string();
    }
    let terms: Vec<String> = fq
        .coeffs(c)
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0)
        .map(|(i, &a)| match (i, a) {
            (0, a) => a.to_string(),
            (1, 1) => "w".to_string(),
            (1, a) => format!("{a}*w"),
            (i, 1) => format!("w^{i}"),
            (i, a) => format!("{a}*w^{i}"),
        })
        .collect();
    terms.join("+")
}

fn poly_string(model: &FieldModel, p: &[u16]) -> String {
    if p.is_empty() {
        return "0".to_string();
    }
    let var = model.var();
    let terms: Vec<String> = p
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| {
            let cs = fq_string(model, c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                k => format!("{var}^{k}"),
            };
            match (k, c) {
                (0, _) => cs,
                (_, 1) => mono,
                _ => format!("{cs}*{mono}"),
            }
        })
        .collect();
    terms.join("+")
}

pub fn format(model: &FieldModel, a: &FieldElement) -> String {
    match a {
        FieldElement::Q(x) => x.to_string(),
        FieldElement::F(r) => {
            if poly::is_one(&r.den) {
                poly_string(model, &r.num)
            } else {
                format!("({})/({})", poly_string(model, &r.num), poly_string(model, &r.den))
            }
        }
    }
}
