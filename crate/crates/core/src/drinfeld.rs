//! Rigid points of products of Drinfeld spaces over one local field k of
//! equal characteristic, with coordinates in a finite extension K.
//!
//! Absolute values are stored as exponents in units of the base valuation:
//! `|y| = |pi_k|^e` with `e = v_K(y) / e(K/k)`, and `None` for zero.

use crate::building::{ApartmentPoint, Q64};
use crate::error::{Error, Result};
use crate::field::{ExtensionDescriptor, FieldElement, FieldModel};
use crate::matrix::Mat;
use serde_json::{json, Value};
use std::collections::{BTreeMap, BTreeSet};

/// Default cap on the number of unimodular vectors enumerated per factor.
pub const DEFAULT_ENUM_BUDGET: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AbsValue(pub Option<Q64>);

impl AbsValue {
    pub fn zero() -> AbsValue {
        AbsValue(None)
    }
    pub fn one() -> AbsValue {
        AbsValue(Some(Q64::from_integer(0)))
    }
    pub fn exponent(&self) -> Option<Q64> {
        self.0
    }
    /// The larger of two values (smaller exponent).
    pub fn max(self, o: AbsValue) -> AbsValue {
        match (self.0, o.0) {
            (None, _) => o,
            (_, None) => self,
            (Some(a), Some(b)) => AbsValue(Some(a.min(b))),
        }
    }
    pub fn mul(self, o: AbsValue) -> AbsValue {
        match (self.0, o.0) {
            (Some(a), Some(b)) => AbsValue(Some(a + b)),
            _ => AbsValue(None),
        }
    }
    /// Multiplies by `|pi_k|^s`.
    pub fn scale(self, s: Q64) -> AbsValue {
        AbsValue(self.0.map(|a| a + s))
    }
    pub fn to_json(&self) -> Value {
        match self.0 {
            Some(a) => json!(a.to_string()),
            None => json!("inf"),
        }
    }
}

/// A polynomial over K in the projective coordinates `T_{i,j}`
/// (`0 <= j <= d_i`). Exponent vectors run factor by factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    model: FieldModel,
    dims: Vec<usize>,
    terms: BTreeMap<Vec<u32>, FieldElement>,
}

impl Polynomial {
    pub fn zero(model: &FieldModel, dims: &[usize]) -> Polynomial {
        Polynomial { model: model.clone(), dims: dims.to_vec(), terms: BTreeMap::new() }
    }

    fn nvars(&self) -> usize {
        self.dims.iter().map(|d| d + 1).sum()
    }

    fn offset(&self, i: usize) -> usize {
        self.dims[..i].iter().map(|d| d + 1).sum()
    }

    pub fn monomial(model: &FieldModel, dims: &[usize], c: FieldElement, exps: Vec<u32>) -> Polynomial {
        let mut p = Polynomial::zero(model, dims);
        assert_eq!(exps.len(), p.nvars());
        if !model.is_zero(&c) {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn constant(model: &FieldModel, dims: &[usize], c: FieldElement) -> Polynomial {
        let n = dims.iter().map(|d| d + 1).sum();
        Polynomial::monomial(model, dims, c, vec![0; n])
    }

    /// The variable `T_{i,j}`.
    pub fn var(model: &FieldModel, dims: &[usize], i: usize, j: usize) -> Polynomial {
        let mut p = Polynomial::zero(model, dims);
        let mut e = vec![0; p.nvars()];
        e[p.offset(i) + j] = 1;
        p.terms.insert(e, model.one());
        p
    }

    /// `sum_j a_j T_{i,j}`.
    pub fn linear(model: &FieldModel, dims: &[usize], i: usize, a: &[FieldElement]) -> Polynomial {
        let mut p = Polynomial::zero(model, dims);
        for (j, c) in a.iter().enumerate() {
            p = p.add(&Polynomial::var(model, dims, i, j).scale(c));
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, FieldElement> {
        &self.terms
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let f = &self.model;
        let mut out = self.clone();
        for (e, c) in &o.terms {
            let s = match out.terms.get(e) {
                Some(x) => f.add(x, c),
                None => c.clone(),
            };
            if f.is_zero(&s) {
                out.terms.remove(e);
            } else {
                out.terms.insert(e.clone(), s);
            }
        }
        out
    }

    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        let f = &self.model;
        if f.is_zero(c) {
            return Polynomial::zero(f, &self.dims);
        }
        Polynomial { terms: self.terms.iter().map(|(e, x)| (e.clone(), f.mul(x, c))).collect(), ..self.clone() }
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        let f = &self.model;
        let mut out = Polynomial::zero(f, &self.dims);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out = out.add(&Polynomial::monomial(f, &self.dims, f.mul(c1, c2), e));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut out = Polynomial::constant(&self.model, &self.dims, self.model.one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Parses `[{"coef": "<K element>", "exps": [[..], ..]}, ..]` with one
    /// exponent array of length `d_i + 1` per factor.
    pub fn parse_json(model: &FieldModel, dims: &[usize], v: &Value) -> Result<Polynomial> {
        let arr = v.as_array().ok_or_else(|| Error::input("a polynomial is a JSON array of terms"))?;
        let mut p = Polynomial::zero(model, dims);
        for t in arr {
            let c = t.get("coef").and_then(Value::as_str).ok_or_else(|| Error::input("term needs a coef string"))?;
            let exps: Vec<Vec<u32>> = serde_json::from_value(t.get("exps").cloned().unwrap_or(Value::Null))
                .map_err(|e| Error::input(format!("term exps: {e}")))?;
            if exps.len() != dims.len() || exps.iter().zip(dims).any(|(e, d)| e.len() != d + 1) {
                return Err(Error::input("term exponents do not match the factor dimensions"));
            }
            p = p.add(&Polynomial::monomial(model, dims, model.parse(c)?, exps.concat()));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut per = Vec::new();
                let mut k = 0;
                for d in &self.dims {
                    per.push(e[k..k + d + 1].to_vec());
                    k += d + 1;
                }
                json!({"coef": self.model.format(c), "exps": per})
            })
            .collect::<Vec<_>>())
    }
}

/// A K-point of a product of Drinfeld spaces in affine coordinates
/// `t_{i,j} = T_{i,j} / T_{i,0}`, `1 <= j <= d_i`.
#[derive(Clone, Debug)]
pub struct RigidPoint {
    ext: ExtensionDescriptor,
    coords: Vec<Vec<FieldElement>>,
}

fn rank(model: &FieldModel, mut rows: Vec<Vec<FieldElement>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !model.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, p);
        let inv = model.inv(&rows[r][c]);
        for i in r + 1..rows.len() {
            if model.is_zero(&rows[i][c]) {
                continue;
            }
            let k = model.mul(&rows[i][c], &inv);
            for j in c..ncols {
                let x = model.sub(&rows[i][j], &model.mul(&k, &rows[r][j]));
                rows[i][j] = x;
            }
        }
        r += 1;
    }
    r
}

impl RigidPoint {
    /// Checks the Drinfeld condition: `1, x_{i,1}, .., x_{i,d_i}` are
    /// linearly independent over k for every factor.
    pub fn new(ext: &ExtensionDescriptor, coords: Vec<Vec<FieldElement>>) -> Result<RigidPoint> {
        if coords.is_empty() || coords.iter().any(|c| c.is_empty()) {
            return Err(Error::input("a rigid point needs at least one coordinate per factor"));
        }
        let x = RigidPoint { ext: ext.clone(), coords };
        for i in 0..x.r() {
            if !x.independent(i)? {
                return Err(Error::input(format!("factor {i} lies on a k-rational hyperplane")));
            }
        }
        Ok(x)
    }

    pub fn parse_json(ext: &ExtensionDescriptor, v: &Value) -> Result<RigidPoint> {
        let s: Vec<Vec<String>> =
            serde_json::from_value(v.clone()).map_err(|e| Error::input(format!("rigid point: {e}")))?;
        let coords = s
            .iter()
            .map(|c| c.iter().map(|x| ext.ext().parse(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        RigidPoint::new(ext, coords)
    }

    pub fn to_json(&self) -> Value {
        json!(self.coords.iter().map(|c| c.iter().map(|x| self.ext.ext().format(x)).collect::<Vec<_>>()).collect::<Vec<_>>())
    }

    pub fn ext(&self) -> &ExtensionDescriptor {
        &self.ext
    }
    pub fn r(&self) -> usize {
        self.coords.len()
    }
    pub fn dims(&self) -> Vec<usize> {
        self.coords.iter().map(|c| c.len()).collect()
    }

    /// `t_{i,j}(x)` with `t_{i,0} = 1`.
    pub fn t(&self, i: usize, j: usize) -> FieldElement {
        if j == 0 {
            self.ext.ext().one()
        } else {
            self.coords[i][j - 1].clone()
        }
    }

    /// Exponent of an element of K in base units.
    pub fn abs(&self, y: &FieldElement) -> AbsValue {
        AbsValue(self.ext.ext().valuation(y).map(|v| Q64::new(v, self.ext.e() as i64)))
    }

    /// Rank over k of `1, x_{i,1}, ..`: denominators are cleared and each
    /// polynomial in s over F_{q^f} is split into components
    /// `w^b s^a P(s^e)` with P over F_q.
    fn independent(&self, i: usize) -> Result<bool> {
        let big = self.ext.ext();
        let base = self.ext.base();
        let (e, f) = (self.ext.e() as usize, self.ext.f() as usize);
        let vals: Vec<FieldElement> = (0..=self.coords[i].len()).map(|j| self.t(i, j)).collect();
        let mut den = big.one();
        for v in &vals {
            if let FieldElement::F(r) = v {
                den = big.mul(&den, &FieldElement::F(crate::field::poly::RatFn::poly(r.den.clone())));
            } else {
                return Err(Error::Unsupported("rigid points over the p-adic model".into()));
            }
        }
        let emb = self.ext.embedding();
        let mut rows = Vec::with_capacity(vals.len());
        for v in &vals {
            let FieldElement::F(y) = big.mul(v, &den) else { unreachable!() };
            debug_assert!(y.is_poly());
            let mut comps: Vec<Vec<u16>> = vec![Vec::new(); e * f];
            for (m, &c) in y.num.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let (a, k) = (m % e, m / e);
                for (b, &g) in emb.coords(c).iter().enumerate() {
                    let poly = &mut comps[a * f + b];
                    if poly.len() <= k {
                        poly.resize(k + 1, 0);
                    }
                    poly[k] = g;
                }
            }
            rows.push(
                comps
                    .into_iter()
                    .map(|p| FieldElement::F(crate::field::poly::RatFn::poly(p)))
                    .collect::<Vec<_>>(),
            );
        }
        Ok(rank(base, rows) == vals.len())
    }
}

/// `|p(x)|`, evaluating `T_{i,j}` at `t_{i,j}(x)`.
pub fn eval_abs(x: &RigidPoint, p: &Polynomial) -> AbsValue {
    x.abs(&eval(x, p))
}

fn eval(x: &RigidPoint, p: &Polynomial) -> FieldElement {
    let f = x.ext.ext();
    let vals: Vec<FieldElement> = (0..x.r()).flat_map(|i| (0..=x.coords[i].len()).map(move |j| (i, j))).map(|(i, j)| x.t(i, j)).collect();
    let mut acc = f.zero();
    for (e, c) in &p.terms {
        let mut m = c.clone();
        for (k, &n) in e.iter().enumerate() {
            if n > 0 {
                m = f.mul(&m, &f.pow(&vals[k], n));
            }
        }
        acc = f.add(&acc, &m);
    }
    acc
}

/// Unimodular vectors of length `n` modulo `pi^m`, with the first unit
/// coordinate equal to 1 (entries before it lie in `pi O`).
pub fn unimodular_vectors(base: &FieldModel, n: usize, m: u32) -> Vec<Vec<FieldElement>> {
    let all = base.enumerate_residues(m);
    let q = base.residue_size() as usize;
    // residues with digit 0 in front are the multiples of pi
    let nonunits: Vec<&FieldElement> = all.iter().enumerate().filter(|(k, _)| k % q == 0).map(|(_, x)| x).collect();
    let mut out = Vec::new();
    for lead in 0..n {
        let sizes: Vec<usize> = (0..n)
            .map(|j| match j.cmp(&lead) {
                std::cmp::Ordering::Less => nonunits.len(),
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Greater => all.len(),
            })
            .collect();
        for idx in crate::building::product(&sizes) {
            out.push(
                (0..n)
                    .map(|j| match j.cmp(&lead) {
                        std::cmp::Ordering::Less => nonunits[idx[j]].clone(),
                        std::cmp::Ordering::Equal => base.one(),
                        std::cmp::Ordering::Greater => all[idx[j]].clone(),
                    })
                    .collect(),
            );
        }
    }
    out
}

/// Number of vectors `unimodular_vectors` would produce.
pub fn unimodular_count(q: u128, n: usize, m: u32) -> u128 {
    (0..n).map(|lead| q.pow((m - 1) * lead as u32) * q.pow(m * (n - 1 - lead) as u32)).sum()
}

#[derive(Clone, Debug)]
pub struct OmegaReport {
    pub member: bool,
    pub checked: u128,
    /// First violating (factor, alpha) in enumeration order.
    pub violation: Option<(usize, Vec<FieldElement>)>,
}

impl OmegaReport {
    pub fn to_json(&self, base: &FieldModel) -> Value {
        json!({
            "member": self.member,
            "checked": self.checked.to_string(),
            "violation": self.violation.as_ref().map(|(i, a)| json!({
                "factor": i,
                "alpha": a.iter().map(|x| base.format(x)).collect::<Vec<_>>(),
            })),
        })
    }
}

/// Membership in `X[n]` (closed) or `X(n)` (open): for every factor and
/// unimodular alpha, `|sum alpha_j t_j| >= |pi|^n max_j |t_j|`, strictly
/// for the open set. Closed membership only depends on alpha modulo
/// `pi^(n+1)` and open membership on alpha modulo `pi^n`.
pub fn omega_check(x: &RigidPoint, n: u32, closed: bool, budget: u128) -> Result<OmegaReport> {
    if n == 0 {
        return Err(Error::input("depth must be positive"));
    }
    let base = x.ext.base();
    let m = if closed { n + 1 } else { n };
    let q = base.residue_size() as u128;
    let mut checked = 0u128;
    for i in 0..x.r() {
        let len = x.coords[i].len() + 1;
        let need = unimodular_count(q, len, m);
        if need > budget {
            return Err(Error::budget("unimodular vectors", need, budget));
        }
    }
    let bound_n = Q64::from_integer(n as i64);
    for i in 0..x.r() {
        let len = x.coords[i].len() + 1;
        let ts: Vec<FieldElement> = (0..len).map(|j| x.t(i, j)).collect();
        let tmin = ts.iter().filter_map(|t| x.abs(t).0).min().unwrap();
        let bound = bound_n + tmin;
        let embedded: BTreeMap<FieldElement, FieldElement> =
            base.enumerate_residues(m).into_iter().map(|r| {
                let e = x.ext.embed(&r).unwrap();
                (r, e)
            }).collect();
        let f = x.ext.ext();
        for a in unimodular_vectors(base, len, m) {
            checked += 1;
            let mut s = f.zero();
            for (aj, tj) in a.iter().zip(&ts) {
                if !base.is_zero(aj) {
                    s = f.add(&s, &f.mul(&embedded[aj], tj));
                }
            }
            let ok = match x.abs(&s).0 {
                None => false,
                Some(v) => if closed { v <= bound } else { v < bound },
            };
            if !ok {
                return Ok(OmegaReport { member: false, checked, violation: Some((i, a)) });
            }
        }
    }
    Ok(OmegaReport { member: true, checked, violation: None })
}

pub fn omega_membership(x: &RigidPoint, n: u32, closed: bool) -> Result<bool> {
    Ok(omega_check(x, n, closed, DEFAULT_ENUM_BUDGET)?.member)
}

/// The least `n <= max_n` with `x` in `X[n]`.
pub fn min_depth(x: &RigidPoint, max_n: u32, budget: u128) -> Result<Option<u32>> {
    for n in 1..=max_n {
        if omega_check(x, n, true, budget)?.member {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// `tau_Lambda(tau(x))`: per factor the norm exponents `v(t_{i,j})`.
pub fn tau_coordinates(x: &RigidPoint) -> ApartmentPoint {
    ApartmentPoint::new(
        (0..x.r())
            .map(|i| (0..=x.coords[i].len()).map(|j| x.abs(&x.t(i, j)).0.expect("coordinates are nonzero")).collect())
            .collect(),
    )
}

/// A basis of `V_i` over k in which the restricted norm of x is diagonal.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    /// Columns are the basis vectors in the coordinates `T_{i,j}`.
    pub basis: Mat,
    /// `rho(v_j) = |pi|^exponents[j]`.
    pub exponents: Vec<Q64>,
    pub verified_depth: u32,
}

impl Diagonalization {
    /// The point of `B_i` given by the norm, in the apartment of `basis`.
    pub fn point(&self) -> ApartmentPoint {
        ApartmentPoint::new(vec![self.exponents.clone()])
    }

    pub fn to_json(&self) -> Value {
        json!({
            "basis": self.basis.to_strings(),
            "exponents": self.exponents.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            "verified_depth": self.verified_depth,
        })
    }
}

fn basis_values(x: &RigidPoint, i: usize, basis: &Mat) -> Vec<FieldElement> {
    let f = x.ext.ext();
    (0..basis.cols())
        .map(|j| {
            (0..basis.rows()).fold(f.zero(), |acc, l| {
                let c = x.ext.embed(basis.get(l, j)).unwrap();
                f.add(&acc, &f.mul(&c, &x.t(i, l)))
            })
        })
        .collect()
}

/// True iff `|sum a_j w_j| = max_j |a_j| |w_j|` for every unimodular `a`
/// modulo `pi^depth`, where `w_j` are the values of the basis vectors.
pub fn verify_orthogonal(x: &RigidPoint, i: usize, basis: &Mat, depth: u32, budget: u128) -> Result<bool> {
    let base = x.ext.base();
    let n = basis.cols();
    let need = unimodular_count(base.residue_size() as u128, n, depth);
    if need > budget {
        return Err(Error::budget("unimodular vectors", need, budget));
    }
    let w = basis_values(x, i, basis);
    let f = x.ext.ext();
    for a in unimodular_vectors(base, n, depth) {
        let mut s = f.zero();
        let mut expect = AbsValue::zero();
        for (aj, wj) in a.iter().zip(&w) {
            let c = x.ext.embed(aj).unwrap();
            s = f.add(&s, &f.mul(&c, wj));
            expect = expect.max(x.abs(&c).mul(x.abs(wj)));
        }
        if x.abs(&s) != expect {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Greedy diagonalization of the norm `v -> |v(x)|` on `V_i`. Each basis
/// vector starts as a standard vector and is improved one leading digit at
/// a time against the earlier (orthogonal) vectors; the bound from `X[n]`
/// caps the number of steps. The result is checked on all unimodular
/// coefficient vectors modulo `pi^(n+1)`.
pub fn diagonalize_norm(x: &RigidPoint, i: usize, n: u32, budget: u128) -> Result<Diagonalization> {
    if i >= x.r() {
        return Err(Error::input(format!("factor {i} out of range")));
    }
    let single = RigidPoint { ext: x.ext.clone(), coords: vec![x.coords[i].clone()] };
    if !omega_check(&single, n, true, budget)?.member {
        return Err(Error::budget("certification depth", n as u128 + 1, n as u128));
    }
    let base = x.ext.base();
    let f = x.ext.ext();
    let len = x.coords[i].len() + 1;
    let ts: Vec<FieldElement> = (0..len).map(|j| x.t(i, j)).collect();
    let tmin = ts.iter().filter_map(|t| x.abs(t).0).min().unwrap();
    let cap = Q64::from_integer(n as i64) + tmin;
    let digits: Vec<FieldElement> = base.enumerate_residues(1);

    let mut vecs: Vec<Vec<FieldElement>> = Vec::with_capacity(len);
    let mut vals: Vec<FieldElement> = Vec::with_capacity(len);
    for j in 0..len {
        let mut v: Vec<FieldElement> = (0..len).map(|l| if l == j { base.one() } else { base.zero() }).collect();
        let mut r = ts[j].clone();
        loop {
            let val = x.abs(&r).0.ok_or_else(|| Error::Violation("basis vector vanishes at the point".into()))?;
            if val > cap {
                return Err(Error::Violation(format!("value {val} exceeds the bound {cap} of the depth certificate")));
            }
            // earlier vectors whose value can match val with an integral power of pi
            let elig: Vec<(usize, i64)> = vals
                .iter()
                .enumerate()
                .filter_map(|(k, w)| {
                    let d = val - x.abs(w).0.unwrap();
                    (d.is_integer()).then(|| (k, d.to_integer()))
                })
                .collect();
            let mut improved = None;
            'search: for code in crate::building::product(&vec![digits.len(); elig.len()]) {
                if code.iter().all(|&c| c == 0) {
                    continue;
                }
                let mut s = r.clone();
                for (&(k, p), &c) in elig.iter().zip(&code) {
                    if c == 0 {
                        continue;
                    }
                    let coef = base.mul(&digits[c], &base.pi_pow(p));
                    s = f.sub(&s, &f.mul(&x.ext.embed(&coef)?, &vals[k]));
                }
                if x.abs(&s).0.map_or(true, |w| w > val) {
                    improved = Some((code, s));
                    break 'search;
                }
            }
            let Some((code, s)) = improved else { break };
            for (&(k, p), &c) in elig.iter().zip(&code) {
                if c == 0 {
                    continue;
                }
                let coef = base.mul(&digits[c], &base.pi_pow(p));
                for l in 0..len {
                    v[l] = base.sub(&v[l], &base.mul(&coef, &vecs[k][l]));
                }
            }
            r = s;
        }
        vecs.push(v);
        vals.push(r);
    }
    let basis = Mat::from_cols(base, &vecs);
    let exponents: Vec<Q64> = vals.iter().map(|w| x.abs(w).0.unwrap()).collect();
    if !verify_orthogonal(x, i, &basis, n + 1, budget)? {
        return Err(Error::Violation("greedy basis is not orthogonal".into()));
    }
    Ok(Diagonalization { basis, exponents, verified_depth: n + 1 })
}

/// The seminorm `j(b)`: per factor a basis of `V_i` over k (columns in
/// the coordinates `T_{i,j}`) and norm exponents of its vectors.
#[derive(Clone, Debug)]
pub struct GaussSeminorm {
    pub bases: Vec<Mat>,
    pub exponents: Vec<Vec<Q64>>,
}

impl GaussSeminorm {
    pub fn standard(p: &ApartmentPoint, base: &FieldModel) -> GaussSeminorm {
        GaussSeminorm {
            bases: p.0.iter().map(|e| Mat::identity(base, e.len())).collect(),
            exponents: p.0.clone(),
        }
    }
}

/// `max_N |a_N| prod rho(e_{i,j})^{n_{i,j}}` after rewriting `p` in the
/// seminorm's basis (`T = B e`).
pub fn gauss_eval(ext: &ExtensionDescriptor, b: &GaussSeminorm, p: &Polynomial) -> Result<AbsValue> {
    let f = ext.ext();
    let dims = &p.dims;
    if b.bases.len() != dims.len() || b.bases.iter().zip(dims).any(|(m, d)| m.rows() != d + 1) {
        return Err(Error::input("seminorm does not match the polynomial's factors"));
    }
    // T_{i,l} = sum_j B_{l,j} e_{i,j}
    let mut subst: Vec<Polynomial> = Vec::new();
    for (i, m) in b.bases.iter().enumerate() {
        for l in 0..m.rows() {
            let row: Vec<FieldElement> = (0..m.cols()).map(|j| ext.embed(m.get(l, j))).collect::<Result<_>>()?;
            subst.push(Polynomial::linear(f, dims, i, &row));
        }
    }
    let mut q = Polynomial::zero(f, dims);
    for (e, c) in &p.terms {
        let mut m = Polynomial::constant(f, dims, c.clone());
        for (k, &n) in e.iter().enumerate() {
            if n > 0 {
                m = m.mul(&subst[k].pow(n));
            }
        }
        q = q.add(&m);
    }
    let r: Vec<Q64> = b.exponents.iter().flatten().copied().collect();
    let mut out = AbsValue::zero();
    for (e, c) in &q.terms {
        let mut v = AbsValue(f.valuation(c).map(|x| Q64::new(x, ext.e() as i64)));
        for (k, &n) in e.iter().enumerate() {
            v = v.scale(r[k] * n as i64);
        }
        out = out.max(v);
    }
    Ok(out)
}

fn binom(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `D_N(p) = sum_{I >= N} binom(I, N) a_I x^I`.
pub fn d_operator(p: &Polynomial, n: &[u32]) -> Polynomial {
    let f = &p.model;
    let ch = f.characteristic() as u128;
    let mut out = Polynomial::zero(f, &p.dims);
    for (e, c) in &p.terms {
        if e.iter().zip(n).any(|(a, b)| a < b) {
            continue;
        }
        let mut b: u128 = 1;
        for (&a, &k) in e.iter().zip(n) {
            b = b * binom(a, k);
            if ch > 0 {
                b %= ch;
            }
        }
        let coef = f.mul(c, &f.int(b as i64));
        out = out.add(&Polynomial::monomial(f, &p.dims, coef, e.clone()));
    }
    out
}

/// `rho_t(p) = max_N t^{|N|} |D_N(p)(x)|` with `t = |pi_K|^t_exp`
/// (`None` is t = 0).
pub fn deform(x: &RigidPoint, t_exp: Option<Q64>, p: &Polynomial) -> AbsValue {
    let mut ns: BTreeSet<Vec<u32>> = BTreeSet::new();
    match t_exp {
        None => {
            ns.insert(vec![0; p.nvars()]);
        }
        Some(_) => {
            for e in p.terms.keys() {
                for sub in crate::building::product(&e.iter().map(|&a| a as usize + 1).collect::<Vec<_>>()) {
                    ns.insert(sub.iter().map(|&a| a as u32).collect());
                }
            }
        }
    }
    let per_k = t_exp.map(|t| t / Q64::from_integer(x.ext.e() as i64));
    let mut out = AbsValue::zero();
    for n in ns {
        let size: u32 = n.iter().sum();
        let v = eval_abs(x, &d_operator(p, &n));
        let w = match per_k {
            Some(t) => v.scale(t * size as i64),
            None => v,
        };
        out = out.max(w);
    }
    out
}

/// Exponents of `s_{i,j} = S_{i,j} / S_{i,0}` at a point of the standard
/// apartment, using `rho^*(T_j) = 1 / rho(T_j)` for diagonal norms.
pub fn dual_coords(p: &ApartmentPoint, i: usize) -> Result<Vec<Q64>> {
    let r = p.0.get(i).ok_or_else(|| Error::input(format!("factor {i} out of range")))?;
    Ok(r.iter().map(|x| r[0] - x).collect())
}
