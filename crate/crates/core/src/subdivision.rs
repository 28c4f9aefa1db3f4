//! Alcove charts of an apartment, the subdivisions `F[N]` and `B[M]`, and
//! the embedding `nu` of a building into the building over an extension.
//!
//! Apartment coordinates here are the `x_0, .., x_d` of the chamber
//! `eta = {x_0 <= x_1 <= .. <= x_d <= x_0 + 1}`; the lattice class
//! `<pi^m_0 w_0, .., pi^m_d w_d>` sits at `x = m`.

use crate::building::{is_simplex, Ball, PolyVertex, Q64};
use crate::error::{Error, Result};
use crate::field::fq::Fq;
use crate::field::ExtensionDescriptor;
use crate::lattice::VertexClass;
use crate::matrix::Mat;
use serde_json::{json, Value};
use std::collections::{BTreeSet, HashMap};

pub const MAX_ETA_DIM: usize = 4;
pub const MAX_ETA_N: u32 = 6;

/// The chamber `eta(sigma, a)`:
/// `x_{s(0)} + a_0 <= x_{s(1)} + a_1 <= .. <= x_{s(d)} + a_d <= x_{s(0)} + a_0 + 1`.
/// Named canonically with `sigma(0) = 0` and `a_0 = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlcoveChart {
    pub sigma: Vec<usize>,
    pub a: Vec<i64>,
}

impl AlcoveChart {
    pub fn d(&self) -> usize {
        self.sigma.len() - 1
    }

    /// The d+1 vertices as integer coordinate vectors. Vertex m has
    /// sorted values `z = (0^(d+1-m), 1^m)`, where `z_k = x_{s(k)} + a_k`.
    pub fn vertices(&self) -> Vec<Vec<i64>> {
        let n = self.sigma.len();
        (0..n)
            .map(|m| {
                let mut x = vec![0i64; n];
                for k in 0..n {
                    let z = (k + m >= n) as i64;
                    x[self.sigma[k]] = z - self.a[k];
                }
                x
            })
            .collect()
    }

    /// Closed-chamber membership of a rational point.
    pub fn contains(&self, x: &[Q64]) -> bool {
        let z: Vec<Q64> = (0..self.sigma.len()).map(|k| x[self.sigma[k]] + self.a[k]).collect();
        z.windows(2).all(|w| w[0] <= w[1]) && *z.last().unwrap() <= z[0] + 1
    }
}

fn in_eta_n(x: &[i64], n: i64) -> bool {
    x.windows(2).all(|w| w[0] <= w[1]) && *x.last().unwrap() <= x[0] + n
}

/// All rational points of `eta_N` membership, closed.
pub fn eta_n_contains(x: &[Q64], n: u32) -> bool {
    x.windows(2).all(|w| w[0] <= w[1]) && *x.last().unwrap() <= x[0] + Q64::from_integer(n as i64)
}

/// Chambers of the apartment whose closure lies in the dilated simplex
/// `eta_N = {x_0 <= .. <= x_d <= x_0 + N}`, sorted.
pub fn eta_chambers(d: usize, n: u32) -> Result<Vec<AlcoveChart>> {
    if d == 0 || n == 0 {
        return Err(Error::input("eta needs d >= 1 and N >= 1"));
    }
    if d > MAX_ETA_DIM {
        return Err(Error::budget("eta chart dimension", d as u128, MAX_ETA_DIM as u128));
    }
    if n > MAX_ETA_N {
        return Err(Error::budget("eta dilation", n as u128, MAX_ETA_N as u128));
    }
    let w = n as i64 + 1;
    let side = (2 * w + 1) as usize;
    let mut out = Vec::new();
    for perm in permutations_fixing_zero(d + 1) {
        for code in crate::building::product(&vec![side; d]) {
            let mut a = vec![0i64];
            a.extend(code.iter().map(|&c| c as i64 - w));
            let chart = AlcoveChart { sigma: perm.clone(), a };
            if chart.vertices().iter().all(|x| in_eta_n(x, n as i64)) {
                out.push(chart);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Permutations of 0..n with `p(0) = 0`, lexicographic.
fn permutations_fixing_zero(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize];
    let mut used = vec![false; n];
    used[0] = true;
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(n, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

/// Barycentric weights of an integer point `y` of `eta_N` with respect
/// to the corners `Q_k = N (0^(d+1-k), 1^k)`, k = 0..d.
pub fn eta_barycentric(y: &[i64], n: u32) -> Vec<Q64> {
    let d = y.len() - 1;
    let n = n as i64;
    let y: Vec<i64> = y.iter().map(|v| v - y[0]).collect();
    let mut lam = vec![Q64::from_integer(0); d + 1];
    lam[0] = Q64::new(n - y[d], n);
    for k in 1..=d {
        lam[k] = Q64::new(y[d + 1 - k] - y[d - k], n);
    }
    lam
}

/// Per-factor number attached to every edge of that factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking(pub Vec<u32>);

/// A vertex of a subdivided complex: per factor, a point of a closed
/// chamber given by its barycentric weights on the factor-ball vertices
/// (sorted by vertex id, zero weights dropped).
pub type SubVertex = Vec<Vec<(usize, Q64)>>;

#[derive(Clone, Debug)]
pub struct SubdividedComplex {
    pub marking: Marking,
    pub vertices: Vec<SubVertex>,
    pub index: HashMap<SubVertex, usize>,
    /// Sub-chambers as vertex id lists, ordered by the per-factor corner
    /// order of the source chart.
    pub chambers: Vec<Vec<usize>>,
    /// The product chamber of the ball each sub-chamber came from.
    pub parent: Vec<usize>,
}

impl SubdividedComplex {
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut e = BTreeSet::new();
        for c in &self.chambers {
            for (i, &a) in c.iter().enumerate() {
                for &b in &c[i + 1..] {
                    if self.is_edge(a, b) {
                        e.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        e
    }

    /// Two vertices of a common sub-chamber are joined by an edge iff they
    /// differ in exactly one factor.
    fn is_edge(&self, a: usize, b: usize) -> bool {
        let (x, y) = (&self.vertices[a], &self.vertices[b]);
        x.iter().zip(y).filter(|(p, q)| p != q).count() == 1
    }

    pub fn to_json(&self, ball: &Ball) -> Value {
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| {
                let coords: Vec<Value> = v
                    .iter()
                    .enumerate()
                    .map(|(i, pts)| {
                        json!(pts
                            .iter()
                            .map(|(k, w)| json!({"vertex": ball.factor_balls[i].vertices[*k].to_strings(), "weight": w.to_string()}))
                            .collect::<Vec<_>>())
                    })
                    .collect();
                json!({"id": id, "coords": coords})
            })
            .collect();
        let edges: Vec<Value> = self.edges().iter().map(|(a, b)| json!({"from": a, "to": b})).collect();
        json!({
            "descriptor": ball.descriptor.to_json(),
            "marking": self.marking.0,
            "vertices": vertices,
            "edges": edges,
            "chambers": self.chambers,
        })
    }
}

/// Replaces every closed chamber `F = prod F_i` of the ball by
/// `prod F_i[M_i]`.
pub fn subdivide_ball(ball: &Ball, marking: &Marking) -> Result<SubdividedComplex> {
    let r = ball.descriptor.r();
    if marking.0.len() != r || marking.0.contains(&0) {
        return Err(Error::input("marking needs one positive number per factor"));
    }
    if ball.chamber_tuples.is_empty() {
        return Err(Error::input("ball was built without chambers"));
    }
    // per factor chamber: its sub-simplices as lists of SubVertex parts
    let mut per_factor: Vec<Vec<Vec<Vec<Vec<(usize, Q64)>>>>> = Vec::with_capacity(r);
    for (i, fb) in ball.factor_balls.iter().enumerate() {
        let d = ball.descriptor.factors()[i].d;
        let charts = eta_chambers(d, marking.0[i])?;
        let subs: Vec<Vec<Vec<Vec<(usize, Q64)>>>> = fb
            .chambers
            .iter()
            .map(|ch| charts.iter().map(|c| simplex_points(ch, c, marking.0[i])).collect())
            .collect();
        per_factor.push(subs);
    }
    let mut out = SubdividedComplex {
        marking: marking.clone(),
        vertices: Vec::new(),
        index: HashMap::new(),
        chambers: Vec::new(),
        parent: Vec::new(),
    };
    for (pid, t) in ball.chamber_tuples.iter().enumerate() {
        let choices: Vec<&Vec<Vec<Vec<(usize, Q64)>>>> = t.iter().enumerate().map(|(i, &c)| &per_factor[i][c]).collect();
        for pick in crate::building::product(&choices.iter().map(|c| c.len()).collect::<Vec<_>>()) {
            let simplices: Vec<&Vec<Vec<(usize, Q64)>>> = pick.iter().enumerate().map(|(i, &k)| &choices[i][k]).collect();
            let mut ids = Vec::new();
            for corner in crate::building::product(&simplices.iter().map(|s| s.len()).collect::<Vec<_>>()) {
                let v: SubVertex = corner.iter().enumerate().map(|(i, &k)| simplices[i][k].clone()).collect();
                let id = match out.index.get(&v) {
                    Some(&id) => id,
                    None => {
                        out.vertices.push(v.clone());
                        out.index.insert(v, out.vertices.len() - 1);
                        out.vertices.len() - 1
                    }
                };
                ids.push(id);
            }
            out.chambers.push(ids);
            out.parent.push(pid);
        }
    }
    Ok(out)
}

/// The corners of chart `c` of `eta_N`, carried to the closed chamber with
/// vertex ids `ch` (ordered by label) through `Q_k -> ch[k]`.
fn simplex_points(ch: &[usize], c: &AlcoveChart, n: u32) -> Vec<Vec<(usize, Q64)>> {
    c.vertices()
        .iter()
        .map(|y| {
            let lam = eta_barycentric(y, n);
            let mut pts: Vec<(usize, Q64)> =
                lam.iter().enumerate().filter(|(_, w)| **w != Q64::from_integer(0)).map(|(k, w)| (ch[k], *w)).collect();
            pts.sort();
            pts
        })
        .collect()
}

/// Checks that on every facet shared by two chambers of one factor, the
/// two subdivisions induce the same simplices. Returns the first
/// disagreement.
pub fn check_compatible(ball: &Ball, marking: &Marking) -> Result<Option<String>> {
    for (i, fb) in ball.factor_balls.iter().enumerate() {
        let d = ball.descriptor.factors()[i].d;
        let charts = eta_chambers(d, marking.0[i])?;
        let faces = |ch: &Vec<usize>, facet: &BTreeSet<usize>| -> BTreeSet<Vec<Vec<(usize, Q64)>>> {
            let mut s = BTreeSet::new();
            for c in &charts {
                let pts = simplex_points(ch, c, marking.0[i]);
                let inside: Vec<Vec<(usize, Q64)>> =
                    pts.into_iter().filter(|p| p.iter().all(|(v, _)| facet.contains(v))).collect();
                if inside.len() == d {
                    let mut f = inside;
                    f.sort();
                    s.insert(f);
                }
            }
            s
        };
        for (a, ca) in fb.chambers.iter().enumerate() {
            for cb in &fb.chambers[a + 1..] {
                let shared: BTreeSet<usize> = ca.iter().filter(|v| cb.contains(v)).copied().collect();
                if shared.len() != d {
                    continue;
                }
                if faces(ca, &shared) != faces(cb, &shared) {
                    return Ok(Some(format!("factor {i}: chambers {ca:?} and {cb:?} disagree on their facet")));
                }
            }
        }
    }
    Ok(None)
}

/// `nu([L]) = [L ⊗ O_K]`: embeds the canonical basis entrywise.
pub fn nu_embed(v: &VertexClass, ext: &ExtensionDescriptor) -> Result<VertexClass> {
    if v.model() != ext.base() {
        return Err(Error::input("vertex is not over the base field of the extension"));
    }
    let m = v.matrix().map(ext.ext(), |x| ext.embed(x))?;
    VertexClass::from_basis(&m)
}

pub fn nu_embed_poly(x: &PolyVertex, ext: &ExtensionDescriptor) -> Result<PolyVertex> {
    Ok(PolyVertex(x.0.iter().map(|v| nu_embed(v, ext)).collect::<Result<_>>()?))
}

pub fn embed_matrix(m: &Mat, ext: &ExtensionDescriptor) -> Result<Mat> {
    m.map(ext.ext(), |x| ext.embed(x))
}

/// Restriction of a point of the apartment of `basis` (columns over the
/// base field) in the extension building: reads the norm exponents of `y`
/// in the embedded basis, checks that `y` is a vertex of that apartment
/// and divides by e. The result is in base-field units, shift normalized.
pub fn delta_restrict(y: &VertexClass, basis: &Mat, ext: &ExtensionDescriptor) -> Result<Vec<Q64>> {
    if y.model() != ext.ext() || basis.model() != ext.base() {
        return Err(Error::input("delta needs a vertex over the extension and a basis over the base"));
    }
    let b = embed_matrix(basis, ext)?;
    let c = y.inverse().mul(&b);
    let f = ext.ext();
    let r: Vec<i64> = (0..c.cols())
        .map(|j| (0..c.rows()).filter_map(|i| f.valuation(c.get(i, j))).min().ok_or(Error::Singular))
        .collect::<Result<_>>()?;
    let neg: Vec<i64> = r.iter().map(|x| -x).collect();
    if VertexClass::from_basis(&b.mul(&Mat::pi_diag(f, &neg)))? != *y {
        return Err(Error::NotContained("vertex is not in the apartment of the given basis".into()));
    }
    let e = ext.e() as i64;
    Ok(r.iter().map(|&x| Q64::new(x - r[0], e)).collect())
}

/// The class over the base with norm exponents `r` (integers) in the
/// apartment of `basis`.
pub fn apartment_class(basis: &Mat, r: &[i64]) -> Result<VertexClass> {
    let neg: Vec<i64> = r.iter().map(|x| -x).collect();
    VertexClass::from_basis(&basis.mul(&Mat::pi_diag(basis.model(), &neg)))
}

/// A basis `v_0..v_d` adapted to a chamber `P_0, .., P_d` (ordered by
/// label offset from `P_0`): `P_k = <v_0, .., v_{d-k}, pi v_{d-k+1}, .., pi v_d>`.
pub fn chamber_basis(chamber: &[VertexClass]) -> Result<Mat> {
    let p0 = &chamber[0];
    let f = p0.model().clone();
    let fq = f.residue_field()?.clone();
    let n = p0.rank();
    if chamber.len() != n {
        return Err(Error::input("a chamber has d+1 vertices"));
    }
    // W_k = P_k / pi P_0 as a subspace of the residue space of P_0
    let mut flags: Vec<Vec<Vec<u16>>> = Vec::with_capacity(n);
    for (k, pk) in chamber.iter().enumerate() {
        let c = p0.inverse().mul(pk.matrix());
        let s = c.min_val().unwrap();
        let c = c.scale(&f.pi_pow(-s));
        let rows: Vec<Vec<u16>> = (0..n).map(|j| (0..n).map(|i| f.residue(c.get(i, j))).collect()).collect();
        let basis = row_space(&fq, rows);
        if basis.len() != n - k {
            return Err(Error::input(format!("vertex {k} does not extend the chamber flag")));
        }
        flags.push(basis);
    }
    // u_{d-k} in W_k \ W_{k+1}
    let mut u: Vec<Vec<u16>> = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let cand = flags[k].iter().find(|w| {
            let mut rows = u.clone();
            rows.push((*w).clone());
            row_space(&fq, rows).len() == u.len() + 1
        });
        u.push(cand.ok_or_else(|| Error::input("flag is not strictly decreasing"))?.clone());
    }
    let cols: Vec<Vec<_>> = u.iter().map(|w| w.iter().map(|&x| f.lift(x)).collect()).collect();
    Ok(p0.matrix().mul(&Mat::from_cols(&f, &cols)))
}

/// Reduced row echelon basis of the span of `rows` over F_q.
pub fn row_space(fq: &Fq, mut rows: Vec<Vec<u16>>) -> Vec<Vec<u16>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = fq.inv(rows[rank][c]);
        for x in rows[rank].iter_mut() {
            *x = fq.mul(*x, inv);
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let k = rows[r][c];
                for j in 0..ncols {
                    let t = fq.mul(k, rows[rank][j]);
                    rows[r][j] = fq.sub(rows[r][j], t);
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedReport {
    pub pass: bool,
    pub sub_vertices: usize,
    pub sub_chambers: usize,
    pub counterexample: Option<String>,
}

/// Checks that `nu` carries every sub-chamber of the ball subdivided with
/// marking `e` onto a chamber of the building over the extension, with
/// a well defined and injective vertex map that extends `nu` on the
/// original vertices.
pub fn verify_induced_structure(ball: &Ball, ext: &ExtensionDescriptor) -> Result<InducedReport> {
    let r = ball.descriptor.r();
    for f in ball.descriptor.factors() {
        if &f.field != ext.base() {
            return Err(Error::input("ball is not over the base field of the extension"));
        }
    }
    let e = ext.e();
    let marking = Marking(vec![e; r]);
    let sub = subdivide_ball(ball, &marking)?;
    let report = |msg: String| InducedReport {
        pass: false,
        sub_vertices: sub.vertices.len(),
        sub_chambers: sub.chambers.len(),
        counterexample: Some(msg),
    };
    // adapted bases per factor chamber, embedded
    let mut bases: Vec<Vec<Mat>> = Vec::with_capacity(r);
    for fb in &ball.factor_balls {
        let mut v = Vec::with_capacity(fb.chambers.len());
        for ch in &fb.chambers {
            let verts: Vec<VertexClass> = ch.iter().map(|&k| fb.vertices[k].clone()).collect();
            v.push(embed_matrix(&chamber_basis(&verts)?, ext)?);
        }
        bases.push(v);
    }
    let mut image: Vec<Option<PolyVertex>> = vec![None; sub.vertices.len()];
    for (sc, ids) in sub.chambers.iter().enumerate() {
        let t = &ball.chamber_tuples[sub.parent[sc]];
        let mut imgs = Vec::with_capacity(ids.len());
        for &id in ids {
            let v = &sub.vertices[id];
            let mut comps = Vec::with_capacity(r);
            for i in 0..r {
                let ch = &ball.factor_balls[i].chambers[t[i]];
                let n = ch.len();
                // norm exponents of the adapted basis at corner k: -(0^(n-k), 1^k)
                let mut x = vec![Q64::from_integer(0); n];
                for (vid, w) in &v[i] {
                    let k = ch.iter().position(|c| c == vid).unwrap();
                    for xj in x.iter_mut().skip(n - k) {
                        *xj -= *w;
                    }
                }
                let scaled: Vec<Q64> = x.iter().map(|q| q * Q64::from_integer(e as i64)).collect();
                if scaled.iter().any(|q| !q.is_integer()) {
                    return Ok(report(format!("sub-vertex {id} is not at an integral point after scaling by e")));
                }
                let ints: Vec<i64> = scaled.iter().map(|q| q.to_integer()).collect();
                comps.push(apartment_class(&bases[i][t[i]], &ints)?);
            }
            let y = PolyVertex(comps);
            match &image[id] {
                Some(prev) if prev != &y => {
                    return Ok(report(format!("sub-vertex {id} has two images depending on the chamber")));
                }
                _ => image[id] = Some(y.clone()),
            }
            imgs.push(y);
        }
        // per factor the images must form a chamber of the big building
        for i in 0..r {
            let comp: BTreeSet<&VertexClass> = imgs.iter().map(|y| &y.0[i]).collect();
            let list: Vec<VertexClass> = comp.into_iter().cloned().collect();
            let d = ball.descriptor.factors()[i].d;
            if list.len() != d + 1 || !is_simplex(&list) {
                return Ok(report(format!("sub-chamber {sc} does not map to a chamber in factor {i}")));
            }
        }
    }
    let mut seen: HashMap<&PolyVertex, usize> = HashMap::new();
    for (id, y) in image.iter().enumerate() {
        let y = y.as_ref().unwrap();
        if let Some(prev) = seen.insert(y, id) {
            return Ok(report(format!("sub-vertices {prev} and {id} have the same image")));
        }
    }
    // original vertices go to nu of themselves
    for (id, v) in sub.vertices.iter().enumerate() {
        if v.iter().all(|p| p.len() == 1) {
            let orig = PolyVertex(v.iter().enumerate().map(|(i, p)| ball.factor_balls[i].vertices[p[0].0].clone()).collect());
            if nu_embed_poly(&orig, ext)? != *image[id].as_ref().unwrap() {
                return Ok(report(format!("vertex {orig:?} is not sent to its embedding")));
            }
        }
    }
    Ok(InducedReport { pass: true, sub_vertices: sub.vertices.len(), sub_chambers: sub.chambers.len(), counterexample: None })
}
