//! Dense matrices over a `FieldModel`.

use crate::error::{Error, Result};
use crate::field::{vmin, FieldElement, FieldModel, Val};
use std::hash::{Hash, Hasher};

#[derive(Clone, Debug)]
pub struct Mat {
    model: FieldModel,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl PartialEq for Mat {
    fn eq(&self, o: &Self) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.data == o.data
    }
}
impl Eq for Mat {}

impl Hash for Mat {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.rows.hash(h);
        self.cols.hash(h);
        self.data.hash(h);
    }
}

impl PartialOrd for Mat {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Mat {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.rows, self.cols, &self.data).cmp(&(o.rows, o.cols, &o.data))
    }
}

impl Mat {
    pub fn from_vec(model: &FieldModel, rows: usize, cols: usize, data: Vec<FieldElement>) -> Mat {
        assert_eq!(data.len(), rows * cols);
        Mat { model: model.clone(), rows, cols, data }
    }

    pub fn zeros(model: &FieldModel, rows: usize, cols: usize) -> Mat {
        Mat::from_vec(model, rows, cols, vec![model.zero(); rows * cols])
    }

    pub fn identity(model: &FieldModel, n: usize) -> Mat {
        let mut m = Mat::zeros(model, n, n);
        for i in 0..n {
            m.set(i, i, model.one());
        }
        m
    }

    /// `diag(pi^e_0, .., pi^e_{n-1})`.
    pub fn pi_diag(model: &FieldModel, e: &[i64]) -> Mat {
        let mut m = Mat::zeros(model, e.len(), e.len());
        for (i, &x) in e.iter().enumerate() {
            m.set(i, i, model.pi_pow(x));
        }
        m
    }

    /// Builds a matrix from integers, row-major.
    pub fn from_ints(model: &FieldModel, rows: usize, cols: usize, v: &[i64]) -> Mat {
        Mat::from_vec(model, rows, cols, v.iter().map(|&x| model.int(x)).collect())
    }

    /// Parses a row-major list of element strings into a square matrix.
    pub fn parse_square(model: &FieldModel, s: &[String]) -> Result<Mat> {
        let n = (s.len() as f64).sqrt().round() as usize;
        if n * n != s.len() || n == 0 {
            return Err(Error::input(format!("{} entries do not form a square matrix", s.len())));
        }
        let data = s.iter().map(|x| model.parse(x)).collect::<Result<Vec<_>>>()?;
        Ok(Mat::from_vec(model, n, n, data))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.data.iter().map(|x| self.model.format(x)).collect()
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[FieldElement] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn col(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_cols(model: &FieldModel, cols: &[Vec<FieldElement>]) -> Mat {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = Mat::zeros(model, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(&self.model, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in matrix product");
        let f = &self.model;
        let mut out = Mat::zeros(f, self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = f.zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if f.is_zero(a) || f.is_zero(b) {
                        continue;
                    }
                    acc = f.add(&acc, &f.mul(a, b));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn scale(&self, c: &FieldElement) -> Mat {
        let f = &self.model;
        Mat { data: self.data.iter().map(|x| f.mul(x, c)).collect(), ..self.clone() }
    }

    pub fn map(&self, model: &FieldModel, g: impl Fn(&FieldElement) -> Result<FieldElement>) -> Result<Mat> {
        Ok(Mat::from_vec(model, self.rows, self.cols, self.data.iter().map(g).collect::<Result<_>>()?))
    }

    /// Multiplies column j by c.
    pub fn scale_col(&mut self, j: usize, c: &FieldElement) {
        for i in 0..self.rows {
            let x = self.model.mul(self.get(i, j), c);
            self.set(i, j, x);
        }
    }

    /// Column j += c * column k.
    pub fn add_col(&mut self, j: usize, k: usize, c: &FieldElement) {
        let f = self.model.clone();
        for i in 0..self.rows {
            let y = self.get(i, k);
            if f.is_zero(y) {
                continue;
            }
            let x = f.add(self.get(i, j), &f.mul(c, y));
            self.set(i, j, x);
        }
    }

    pub fn swap_cols(&mut self, j: usize, k: usize) {
        if j == k {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + j, i * self.cols + k);
        }
    }

    /// Smallest valuation among the entries.
    pub fn min_val(&self) -> Val {
        self.data.iter().fold(None, |acc, x| vmin(acc, self.model.valuation(x)))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| self.model.is_integral(x))
    }

    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols);
        let f = &self.model;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(f, n);
        for c in 0..n {
            let p = (c..n).find(|&r| !f.is_zero(a.get(r, c))).ok_or(Error::Singular)?;
            a.swap_rows(c, p);
            inv.swap_rows(c, p);
            let pinv = f.inv(a.get(c, c));
            a.scale_row(c, &pinv);
            inv.scale_row(c, &pinv);
            for r in 0..n {
                if r == c || f.is_zero(a.get(r, c)) {
                    continue;
                }
                let k = f.neg(a.get(r, c));
                a.add_row(r, c, &k);
                inv.add_row(r, c, &k);
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> FieldElement {
        assert_eq!(self.rows, self.cols);
        let f = &self.model;
        let n = self.rows;
        let mut a = self.clone();
        let mut det = f.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !f.is_zero(a.get(r, c))) else {
                return f.zero();
            };
            if p != c {
                a.swap_rows(c, p);
                det = f.neg(&det);
            }
            det = f.mul(&det, a.get(c, c));
            let pinv = f.inv(a.get(c, c));
            for r in c + 1..n {
                if f.is_zero(a.get(r, c)) {
                    continue;
                }
                let k = f.neg(&f.mul(a.get(r, c), &pinv));
                a.add_row(r, c, &k);
            }
        }
        det
    }

    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(i * self.cols + j, k * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, c: &FieldElement) {
        for j in 0..self.cols {
            let x = self.model.mul(self.get(i, j), c);
            self.set(i, j, x);
        }
    }

    /// Row i += c * row k.
    fn add_row(&mut self, i: usize, k: usize, c: &FieldElement) {
        let f = self.model.clone();
        for j in 0..self.cols {
            let y = self.get(k, j);
            if f.is_zero(y) {
                continue;
            }
            let x = f.add(self.get(i, j), &f.mul(c, y));
            self.set(i, j, x);
        }
    }

    /// Valuations of the elementary divisors, ascending. Errors on singular
    /// matrices.
    pub fn elementary_exponents(&self) -> Result<Vec<i64>> {
        let f = self.model.clone();
        let mut a = self.clone();
        let n = a.rows.min(a.cols);
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            // pivot: entry of minimal valuation in the remaining block
            let mut best: Option<(i64, usize, usize)> = None;
            for i in k..a.rows {
                for j in k..a.cols {
                    if let Some(v) = f.valuation(a.get(i, j)) {
                        if best.map_or(true, |(b, _, _)| v < b) {
                            best = Some((v, i, j));
                        }
                    }
                }
            }
            let (v, i, j) = best.ok_or(Error::Singular)?;
            a.swap_rows(k, i);
            a.swap_cols(k, j);
            let pinv = f.inv(a.get(k, k));
            for r in k + 1..a.rows {
                if !f.is_zero(a.get(r, k)) {
                    let c = f.neg(&f.mul(a.get(r, k), &pinv));
                    a.add_row(r, k, &c);
                }
            }
            for c in k + 1..a.cols {
                if !f.is_zero(a.get(k, c)) {
                    let m = f.neg(&f.mul(a.get(k, c), &pinv));
                    a.add_col(c, k, &m);
                }
            }
            out.push(v);
        }
        if a.rows != a.cols {
            return Err(Error::input("elementary divisors need a square matrix"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let f = FieldModel::padic(3).unwrap();
        let a = Mat::from_ints(&f, 3, 3, &[2, 1, 0, 1, 3, 1, 0, 1, 4]);
        let b = a.inverse().unwrap();
        assert_eq!(a.mul(&b), Mat::identity(&f, 3));
        assert_eq!(a.det(), f.int(18));
        assert_eq!(Mat::from_ints(&f, 2, 2, &[1, 2, 2, 4]).inverse(), Err(Error::Singular));
    }

    #[test]
    fn smith_exponents() {
        let f = FieldModel::padic(2).unwrap();
        let a = Mat::from_ints(&f, 2, 2, &[2, 0, 0, 4]);
        assert_eq!(a.elementary_exponents().unwrap(), vec![1, 2]);
        let b = Mat::from_ints(&f, 2, 2, &[2, 4, 6, 4]);
        // det = -16, gcd of entries 2
        assert_eq!(b.elementary_exponents().unwrap(), vec![1, 3]);
    }
}
