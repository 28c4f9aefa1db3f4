//! Full-rank O-lattices in k^n and their homothety classes.
//!
//! A lattice is given by a matrix whose columns generate it. The canonical
//! representative of a class is the upper triangular Hermite form with
//! diagonal `pi^a_i`, off-diagonal entry `(i, j)` reduced modulo `pi^a_i`,
//! scaled so that `L` lies in `O^n` but not in `pi O^n`.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldModel};
use crate::matrix::Mat;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

/// Canonical Hermite form of the lattice generated by the columns of `m`
/// (n rows, at least n columns), up to homothety.
pub fn canonical_form(m: &Mat) -> Result<Mat> {
    let f = m.model().clone();
    let n = m.rows();
    if m.cols() < n {
        return Err(Error::Singular);
    }
    let shift = m.min_val().ok_or(Error::Singular)?;
    let mut pending: Vec<Vec<FieldElement>> = (0..m.cols())
        .map(|j| m.col(j).iter().map(|x| f.mul(x, &f.pi_pow(-shift))).collect())
        .collect();
    let mut cols: Vec<Vec<FieldElement>> = vec![Vec::new(); n];
    let mut exps = vec![0i64; n];
    for i in (0..n).rev() {
        let mut best: Option<(i64, usize)> = None;
        for (k, c) in pending.iter().enumerate() {
            if let Some(v) = f.valuation(&c[i]) {
                if best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, k));
                }
            }
        }
        let (v, k) = best.ok_or(Error::Singular)?;
        let mut piv = pending.swap_remove(k);
        let pinv = f.inv(&piv[i]);
        for c in pending.iter_mut() {
            if f.is_zero(&c[i]) {
                continue;
            }
            let r = f.mul(&c[i], &pinv);
            for t in 0..=i {
                if !f.is_zero(&piv[t]) {
                    c[t] = f.sub(&c[t], &f.mul(&r, &piv[t]));
                }
            }
        }
        // scale the pivot so its diagonal entry is exactly pi^v
        let u = f.mul(&f.pi_pow(v), &pinv);
        for x in piv.iter_mut().take(i + 1) {
            *x = f.mul(x, &u);
        }
        piv[i] = f.pi_pow(v);
        for x in piv.iter_mut().skip(i + 1) {
            *x = f.zero();
        }
        exps[i] = v;
        cols[i] = piv;
    }
    for j in 0..n {
        for i in (0..j).rev() {
            let x = cols[j][i].clone();
            let rep = f.reduce(&x, exps[i] as u32);
            if rep == x {
                continue;
            }
            let c = f.mul(&f.sub(&x, &rep), &f.pi_pow(-exps[i]));
            let ci = cols[i].clone();
            for t in 0..i {
                if !f.is_zero(&ci[t]) {
                    cols[j][t] = f.sub(&cols[j][t], &f.mul(&c, &ci[t]));
                }
            }
            cols[j][i] = rep;
        }
    }
    Ok(Mat::from_cols(&f, &cols))
}

/// A vertex of the building: a lattice class in canonical form.
#[derive(Clone)]
pub struct VertexClass {
    m: Mat,
    inv: OnceLock<Mat>,
}

impl PartialEq for VertexClass {
    fn eq(&self, o: &Self) -> bool {
        self.m == o.m
    }
}
impl Eq for VertexClass {}
impl Hash for VertexClass {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.m.hash(h)
    }
}
impl PartialOrd for VertexClass {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for VertexClass {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.m.cmp(&o.m)
    }
}

impl fmt::Debug for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.m.to_strings().join(", "))
    }
}

impl VertexClass {
    /// The class of the lattice generated by the columns of `basis`.
    pub fn from_basis(basis: &Mat) -> Result<VertexClass> {
        Ok(VertexClass { m: canonical_form(basis)?, inv: OnceLock::new() })
    }

    pub fn standard(model: &FieldModel, n: usize) -> VertexClass {
        VertexClass::from_basis(&Mat::identity(model, n)).unwrap()
    }

    /// The class of `<pi^a_0 e_0, .., pi^a_{n-1} e_{n-1}>`.
    pub fn diagonal(model: &FieldModel, a: &[i64]) -> VertexClass {
        VertexClass::from_basis(&Mat::pi_diag(model, a)).unwrap()
    }

    /// Parses a row-major array of element strings; the result is
    /// canonicalized, so any basis is accepted.
    pub fn parse(model: &FieldModel, s: &[String]) -> Result<VertexClass> {
        VertexClass::from_basis(&Mat::parse_square(model, s)?)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.m.to_strings()
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn model(&self) -> &FieldModel {
        self.m.model()
    }

    pub fn rank(&self) -> usize {
        self.m.rows()
    }

    /// Inverse of the canonical matrix, computed once.
    pub fn inverse(&self) -> &Mat {
        self.inv.get_or_init(|| self.m.inverse().expect("canonical matrices are invertible"))
    }

    /// The exponents `a_i` of the diagonal.
    pub fn diagonal_exponents(&self) -> Vec<i64> {
        (0..self.rank()).map(|i| self.model().valuation(self.m.get(i, i)).unwrap()).collect()
    }

    /// `v(det) mod n`.
    pub fn label(&self) -> usize {
        let n = self.rank() as i64;
        self.diagonal_exponents().iter().sum::<i64>().rem_euclid(n) as usize
    }

    /// `[L^*]` for the standard bilinear form.
    pub fn dual(&self) -> VertexClass {
        VertexClass::from_basis(&self.inverse().transpose()).unwrap()
    }

    /// `[gL]`.
    pub fn act(&self, g: &Mat) -> Result<VertexClass> {
        VertexClass::from_basis(&g.mul(&self.m))
    }

    /// Elementary divisor exponents of the change of basis from `self` to
    /// `other`, ascending. Determined only up to a common shift.
    pub fn relative_exponents(&self, other: &VertexClass) -> Vec<i64> {
        self.inverse().mul(&other.m).elementary_exponents().unwrap()
    }

    /// Undirected 1-skeleton distance: `max - min` of the relative
    /// exponents, read off the entry valuations of `M^-1 L` and `L^-1 M`
    /// without a Smith reduction.
    pub fn distance(&self, other: &VertexClass) -> i64 {
        let lo = self.inverse().mul(&other.m).min_val().unwrap();
        let hi = -other.inverse().mul(&self.m).min_val().unwrap();
        hi - lo
    }

    pub fn is_adjacent(&self, other: &VertexClass) -> bool {
        self.distance(other) == 1
    }

    /// `[M : L]` for representatives with `M ⊇ L` and `pi M ⊉ L`.
    pub fn distance_f(&self, other: &VertexClass) -> i64 {
        let lo = self.inverse().mul(&other.m).min_val().unwrap();
        let sum = other.diagonal_exponents().iter().sum::<i64>() - self.diagonal_exponents().iter().sum::<i64>();
        sum - lo * self.rank() as i64
    }

    /// Classes of lattices `L'` with `L ⊋ L' ⊋ pi L` and `L/L'` of
    /// dimension `w`, one per codimension-w subspace of `L / pi L`, in
    /// lexicographic order of the reduced row echelon form.
    pub fn neighbors_by_colength(&self, w: usize) -> Result<Vec<VertexClass>> {
        let n = self.rank();
        if w == 0 || w >= n {
            return Err(Error::input(format!("colength {w} out of range 1..={}", n - 1)));
        }
        let f = self.model().clone();
        let fq = f.residue_field()?;
        let subs = subspaces(fq.order(), n, n - w);
        Ok(subs.iter().map(|u| self.sublattice(&f, u)).collect())
    }

    /// All neighbors, grouped by colength 1..n-1.
    pub fn neighbors(&self) -> Result<Vec<VertexClass>> {
        let mut out = Vec::new();
        for w in 1..self.rank() {
            out.extend(self.neighbors_by_colength(w)?);
        }
        Ok(out)
    }

    /// `pi L + span(lift(U))` where `U` is in reduced row echelon form with
    /// coordinates in the canonical basis.
    fn sublattice(&self, f: &FieldModel, u: &[Vec<u16>]) -> VertexClass {
        let n = self.rank();
        let mut gens: Vec<Vec<FieldElement>> = Vec::with_capacity(n);
        let mut pivots = vec![false; n];
        for row in u {
            let p = row.iter().position(|&x| x != 0).unwrap();
            pivots[p] = true;
            gens.push(row.iter().map(|&x| f.lift(x)).collect());
        }
        for j in (0..n).filter(|&j| !pivots[j]) {
            let mut c = vec![f.zero(); n];
            c[j] = f.uniformizer();
            gens.push(c);
        }
        let s = Mat::from_cols(f, &gens);
        VertexClass::from_basis(&self.m.mul(&s)).unwrap()
    }
}

/// Length of `M / L` for lattices given by bases, checking `L ⊆ M`.
pub fn index(m: &Mat, l: &Mat) -> Result<i64> {
    let a = m.inverse()?.mul(l);
    if !a.is_integral() {
        return Err(Error::NotContained("L is not a sublattice of M".into()));
    }
    Ok(a.elementary_exponents()?.iter().sum())
}

/// Gaussian binomial coefficient: the number of k-dimensional subspaces of
/// an n-dimensional space over F_q.
pub fn gaussian_binomial(n: u32, k: u32, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..k {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}

/// All k-dimensional subspaces of F_q^n as reduced row echelon bases.
/// Ordered by pivot set (lexicographic), then by free entries read row by
/// row. Field elements are indices into the table-backed F_q.
pub fn subspaces(q: u32, n: usize, k: usize) -> Vec<Vec<Vec<u16>>> {
    let mut out = Vec::new();
    for piv in combinations(n, k) {
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (r, &p) in piv.iter().enumerate() {
            for j in p + 1..n {
                if !piv.contains(&j) {
                    free.push((r, j));
                }
            }
        }
        let total = (q as u64).pow(free.len() as u32);
        for mut code in 0..total {
            let mut rows = vec![vec![0u16; n]; k];
            for (r, &p) in piv.iter().enumerate() {
                rows[r][p] = 1;
            }
            for &(r, j) in free.iter().rev() {
                rows[r][j] = (code % q as u64) as u16;
                code /= q as u64;
            }
            out.push(rows);
        }
    }
    out
}

/// k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for t in i + 1..k {
            cur[t] = cur[t - 1] + 1;
        }
    }
}
