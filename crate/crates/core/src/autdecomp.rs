//! Automorphisms of product buildings: decomposition of chamber-graph
//! automorphisms, the action on labels, normal forms and rigidity along
//! galleries.
//!
//! Automorphisms are given as words in generators (group elements, the
//! dualities, factor exchanges and the shift generators). A word is applied
//! left to right: `[a, b]` means `b ∘ a`.

use crate::building::{product, Ball, BuildingDescriptor, PolyVertex};
use crate::error::{Error, Result};
use crate::lattice::{gaussian_binomial, VertexClass};
use crate::matrix::Mat;
use serde_json::{json, Value};
use std::collections::{HashMap, HashSet, VecDeque};

/// The product of complete graphs `K_{a_1} x .. x K_{a_n}`: tuples are
/// adjacent when they differ in exactly one coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductGraph {
    sizes: Vec<usize>,
}

impl ProductGraph {
    pub fn new(sizes: &[usize]) -> Result<ProductGraph> {
        if sizes.iter().any(|&a| a == 0) {
            return Err(Error::input("factor sizes must be positive"));
        }
        Ok(ProductGraph { sizes: sizes.to_vec() })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vertex number `k` in lexicographic order (first coordinate most
    /// significant).
    pub fn vertex(&self, mut k: usize) -> Vec<usize> {
        let mut t = vec![0; self.sizes.len()];
        for i in (0..self.sizes.len()).rev() {
            t[i] = k % self.sizes[i];
            k /= self.sizes[i];
        }
        t
    }

    pub fn index(&self, t: &[usize]) -> usize {
        t.iter().zip(&self.sizes).fold(0, |acc, (&x, &a)| acc * a + x)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let (x, y) = (self.vertex(a), self.vertex(b));
        x.iter().zip(&y).filter(|(u, v)| u != v).count() == 1
    }

    fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        (0..n).map(|a| (0..n).map(|b| self.adjacent(a, b)).collect()).collect()
    }
}

/// `f(u)_{mu(i)} = g_i(u_i)`, and `f(u)_j = alpha_j` for j outside the
/// image of `mu`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomDecomposition {
    pub mu: Vec<usize>,
    pub g: Vec<Vec<usize>>,
    pub alpha: Vec<Option<usize>>,
}

impl HomDecomposition {
    pub fn apply(&self, u: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self.alpha.iter().map(|a| a.unwrap_or(usize::MAX)).collect();
        for (i, &j) in self.mu.iter().enumerate() {
            out[j] = self.g[i][u[i]];
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({"mu": self.mu, "g": self.g, "alpha": self.alpha})
    }
}

/// Splits an injective homomorphism `src -> dst`, given as a vertex index
/// map, into an index map and per-factor maps.
pub fn decompose_hom(src: &ProductGraph, dst: &ProductGraph, f: &[usize]) -> Result<HomDecomposition> {
    let n = src.len();
    if f.len() != n || f.iter().any(|&y| y >= dst.len()) {
        return Err(Error::input("vertex map has the wrong shape"));
    }
    let mut seen = HashMap::new();
    for (a, &y) in f.iter().enumerate() {
        if let Some(b) = seen.insert(y, a) {
            return Err(Error::NotInjective(src.vertex(b), src.vertex(a)));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if src.adjacent(a, b) && !dst.adjacent(f[a], f[b]) {
                return Err(Error::NotHomomorphism(src.vertex(a), src.vertex(b)));
            }
        }
    }

    let base = vec![0; src.sizes.len()];
    let fb = dst.vertex(f[src.index(&base)]);
    let mut mu = vec![usize::MAX; src.sizes.len()];
    for (i, &a) in src.sizes.iter().enumerate() {
        if a < 2 {
            continue;
        }
        let mut u = base.clone();
        u[i] = 1;
        let fu = dst.vertex(f[src.index(&u)]);
        mu[i] = (0..fb.len()).find(|&j| fb[j] != fu[j]).unwrap();
    }
    // trivial factors go to unused target coordinates
    for i in 0..mu.len() {
        if mu[i] == usize::MAX {
            let j = (0..dst.sizes.len())
                .find(|j| !mu.contains(j))
                .ok_or_else(|| Error::Violation("no free target coordinate for a trivial factor".into()))?;
            mu[i] = j;
        }
    }
    if mu.iter().collect::<HashSet<_>>().len() != mu.len() {
        return Err(Error::Violation(format!("factor map {mu:?} is not injective")));
    }
    let g: Vec<Vec<usize>> = src
        .sizes
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            (0..a)
                .map(|x| {
                    let mut u = base.clone();
                    u[i] = x;
                    dst.vertex(f[src.index(&u)])[mu[i]]
                })
                .collect()
        })
        .collect();
    let alpha = (0..dst.sizes.len()).map(|j| (!mu.contains(&j)).then(|| fb[j])).collect();
    let h = HomDecomposition { mu, g, alpha };
    for a in 0..n {
        let u = src.vertex(a);
        if h.apply(&u) != dst.vertex(f[a]) {
            return Err(Error::Violation(format!("decomposition does not reproduce the map at {u:?}")));
        }
    }
    Ok(h)
}

/// The map of vertex indices `u -> (p_1(u_mu(1)), ..)` for a permutation
/// `mu` with matching sizes and per-factor permutations `p`.
pub fn automorphism_from(g: &ProductGraph, mu: &[usize], p: &[Vec<usize>]) -> Vec<usize> {
    (0..g.len())
        .map(|k| {
            let u = g.vertex(k);
            let out: Vec<usize> = (0..mu.len()).map(|j| p[j][u[mu[j]]]).collect();
            g.index(&out)
        })
        .collect()
}

fn search(adj: &[Vec<bool>], map: &mut Vec<Option<usize>>, used: &mut Vec<bool>, v: usize, visit: &mut dyn FnMut(&[Option<usize>]) -> bool) -> bool {
    let n = adj.len();
    if v == n {
        return visit(map);
    }
    if let Some(w) = map[v] {
        return consistent(adj, map, v, w) && search(adj, map, used, v + 1, visit);
    }
    for w in 0..n {
        if used[w] || !consistent(adj, map, v, w) {
            continue;
        }
        map[v] = Some(w);
        used[w] = true;
        let stop = search(adj, map, used, v + 1, visit);
        map[v] = None;
        used[w] = false;
        if stop {
            return true;
        }
    }
    false
}

fn consistent(adj: &[Vec<bool>], map: &[Option<usize>], v: usize, w: usize) -> bool {
    map.iter().enumerate().all(|(u, m)| match m {
        Some(x) if u != v => adj[u][v] == adj[*x][w],
        _ => true,
    })
}

/// All automorphisms by exhaustive backtracking over vertex bijections,
/// in lexicographic order of the image sequence. Errors once more than
/// `limit` are found.
pub fn automorphisms(g: &ProductGraph, limit: usize) -> Result<Vec<Vec<usize>>> {
    let adj = g.adjacency();
    let n = adj.len();
    let mut out = Vec::new();
    let mut over = false;
    let mut visit = |m: &[Option<usize>]| {
        out.push(m.iter().map(|x| x.unwrap()).collect::<Vec<usize>>());
        over = out.len() > limit;
        over
    };
    search(&adj, &mut vec![None; n], &mut vec![false; n], 0, &mut visit);
    if over {
        return Err(Error::budget("automorphism enumeration", limit as u128 + 1, limit as u128));
    }
    Ok(out)
}

/// Order of the automorphism group via a stabilizer chain: the orbit of
/// each vertex under the pointwise stabilizer of the earlier ones is found
/// by searching for one automorphism per candidate image. Also returns the
/// automorphisms found along the way (a transversal for each level).
pub fn count_automorphisms(g: &ProductGraph) -> (u128, Vec<Vec<usize>>) {
    let adj = g.adjacency();
    let n = adj.len();
    let mut total: u128 = 1;
    let mut witnesses = Vec::new();
    for k in 0..n {
        let mut orbit = 0u128;
        for w in 0..n {
            if w < k {
                continue; // fixed points cannot receive another vertex
            }
            let mut map: Vec<Option<usize>> = vec![None; n];
            let mut used = vec![false; n];
            for (u, m) in map.iter_mut().enumerate().take(k) {
                *m = Some(u);
                used[u] = true;
            }
            map[k] = Some(w);
            used[w] = true;
            let mut found = None;
            let mut visit = |m: &[Option<usize>]| {
                found = Some(m.iter().map(|x| x.unwrap()).collect::<Vec<usize>>());
                true
            };
            search(&adj, &mut map, &mut used, 0, &mut visit);
            if let Some(f) = found {
                orbit += 1;
                if w != k {
                    witnesses.push(f);
                }
            }
        }
        total *= orbit;
    }
    (total, witnesses)
}

/// `(prod a_i!) * #{sigma : a_sigma(i) = a_i}`.
pub fn aut_order_formula(sizes: &[usize]) -> u128 {
    let fact = |n: usize| (1..=n as u128).product::<u128>();
    let mut mult: HashMap<usize, usize> = HashMap::new();
    for &a in sizes {
        *mult.entry(a).or_default() += 1;
    }
    sizes.iter().map(|&a| fact(a)).product::<u128>() * mult.values().map(|&m| fact(m)).product::<u128>()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    /// One invertible matrix per factor.
    Group(Vec<Mat>),
    /// `lambda_i` on the factors set in the mask.
    Lambda(Vec<bool>),
    /// Factor i receives the component of factor `mu[i]`.
    Exchange(Vec<usize>),
    /// The shift generator of one factor raised to a power.
    Shift(usize, i64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AutWord(pub Vec<Generator>);

fn transpose_inverse(m: &Mat) -> Result<Mat> {
    Ok(m.inverse()?.transpose())
}

impl AutWord {
    pub fn identity() -> AutWord {
        AutWord(Vec::new())
    }

    pub fn then(&self, g: Generator) -> AutWord {
        let mut w = self.clone();
        w.0.push(g);
        w
    }

    pub fn concat(&self, o: &AutWord) -> AutWord {
        AutWord(self.0.iter().chain(&o.0).cloned().collect())
    }

    pub fn check(&self, desc: &BuildingDescriptor) -> Result<()> {
        let r = desc.r();
        for g in &self.0 {
            match g {
                Generator::Group(ms) => {
                    if ms.len() != r {
                        return Err(Error::input("group element needs one matrix per factor"));
                    }
                    for (m, f) in ms.iter().zip(desc.factors()) {
                        if m.rows() != f.d + 1 || m.cols() != f.d + 1 || m.model() != &f.field {
                            return Err(Error::input("group matrix does not match its factor"));
                        }
                        if m.model().is_zero(&m.det()) {
                            return Err(Error::Singular);
                        }
                    }
                }
                Generator::Lambda(mask) => {
                    if mask.len() != r {
                        return Err(Error::input("lambda mask needs one entry per factor"));
                    }
                }
                Generator::Exchange(mu) => {
                    desc.check_exchange(mu)?;
                    for (i, &j) in mu.iter().enumerate() {
                        if desc.field(i) != desc.field(j) {
                            return Err(Error::Unsupported(format!(
                                "exchanging factors {i} and {j} over different fields"
                            )));
                        }
                    }
                }
                Generator::Shift(i, _) => {
                    if *i >= r {
                        return Err(Error::input(format!("shift factor {i} out of range")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, desc: &BuildingDescriptor, x: &PolyVertex) -> Result<PolyVertex> {
        let mut y = x.clone();
        for g in &self.0 {
            y = match g {
                Generator::Group(ms) => desc.act(ms, &y)?,
                Generator::Lambda(mask) => desc.involution_lambda(&y, mask),
                Generator::Exchange(mu) => PolyVertex(mu.iter().map(|&j| y.0[j].clone()).collect()),
                Generator::Shift(i, p) => {
                    let f = &desc.factors()[*i];
                    let s = BuildingDescriptor::shift_generator(&f.field, f.d, *p);
                    let mut z = y.clone();
                    z.0[*i] = y.0[*i].act(&s)?;
                    z
                }
            };
        }
        Ok(y)
    }

    /// Per factor, a basis whose apartment is the image of the standard
    /// apartment.
    pub fn apartment_frame(&self, desc: &BuildingDescriptor) -> Result<Vec<Mat>> {
        let mut m: Vec<Mat> = desc.factors().iter().map(|f| Mat::identity(&f.field, f.d + 1)).collect();
        for g in &self.0 {
            match g {
                Generator::Group(ms) => {
                    for (b, g) in m.iter_mut().zip(ms) {
                        *b = g.mul(b);
                    }
                }
                Generator::Lambda(mask) => {
                    for (b, &on) in m.iter_mut().zip(mask) {
                        if on {
                            *b = transpose_inverse(b)?;
                        }
                    }
                }
                Generator::Exchange(mu) => m = mu.iter().map(|&j| m[j].clone()).collect(),
                Generator::Shift(i, p) => {
                    let f = &desc.factors()[*i];
                    m[*i] = BuildingDescriptor::shift_generator(&f.field, f.d, *p).mul(&m[*i]);
                }
            }
        }
        Ok(m)
    }

    pub fn parse_json(desc: &BuildingDescriptor, v: &Value) -> Result<AutWord> {
        let arr = v.as_array().ok_or_else(|| Error::input("a word is a JSON array of generators"))?;
        let mut out = Vec::new();
        for g in arr {
            let kind = g.get("kind").and_then(Value::as_str).ok_or_else(|| Error::input("generator without kind"))?;
            let gen = match kind {
                "group" => {
                    let ms = g
                        .get("matrices")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::input("group generator needs matrices"))?;
                    if ms.len() != desc.r() {
                        return Err(Error::input("group element needs one matrix per factor"));
                    }
                    let mats = ms
                        .iter()
                        .enumerate()
                        .map(|(i, m)| {
                            let s: Vec<String> = serde_json::from_value(m.clone())
                                .map_err(|e| Error::input(format!("matrix {i}: {e}")))?;
                            Mat::parse_square(desc.field(i), &s)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Generator::Group(mats)
                }
                "lambda" => {
                    let mask = g
                        .get("mask")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::input("lambda generator needs a mask"))?
                        .iter()
                        .map(|b| match b {
                            Value::Bool(x) => Ok(*x),
                            Value::Number(n) if n.as_u64() == Some(0) || n.as_u64() == Some(1) => Ok(n.as_u64() == Some(1)),
                            _ => Err(Error::input("mask entries are booleans or 0/1")),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Generator::Lambda(mask)
                }
                "exchange" => {
                    let mu: Vec<usize> = serde_json::from_value(g.get("mu").cloned().unwrap_or(Value::Null))
                        .map_err(|e| Error::input(format!("exchange mu: {e}")))?;
                    Generator::Exchange(mu)
                }
                "shift" => {
                    let factor = g.get("factor").and_then(Value::as_u64).ok_or_else(|| Error::input("shift needs factor"))?;
                    let power = g.get("power").and_then(Value::as_i64).ok_or_else(|| Error::input("shift needs power"))?;
                    Generator::Shift(factor as usize, power)
                }
                other => return Err(Error::input(format!("unknown generator kind {other:?}"))),
            };
            out.push(gen);
        }
        let w = AutWord(out);
        w.check(desc)?;
        Ok(w)
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .0
            .iter()
            .map(|g| match g {
                Generator::Group(ms) => json!({"kind": "group", "matrices": ms.iter().map(|m| m.to_strings()).collect::<Vec<_>>()}),
                Generator::Lambda(mask) => json!({"kind": "lambda", "mask": mask}),
                Generator::Exchange(mu) => json!({"kind": "exchange", "mu": mu}),
                Generator::Shift(i, p) => json!({"kind": "shift", "factor": i, "power": p}),
            })
            .collect::<Vec<_>>())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelPerm {
    /// `t -> a + t`
    Rotation(usize),
    /// `t -> a - t`
    Reflection(usize),
}

impl LabelPerm {
    pub fn offset(&self) -> usize {
        match self {
            LabelPerm::Rotation(a) | LabelPerm::Reflection(a) => *a,
        }
    }
    pub fn is_reflection(&self) -> bool {
        matches!(self, LabelPerm::Reflection(_))
    }
}

/// `C ∘ phi ∘ D` written as `a -> (p_1(a_mu(1)), .., p_r(a_mu(r)))`.
#[derive(Clone, Debug)]
pub struct LabelAction {
    pub mu: Vec<usize>,
    pub perms: Vec<Vec<usize>>,
    pub kinds: Vec<LabelPerm>,
    /// Per target factor: `signature[w-1]` is the label offset that the
    /// colength-w neighbors of the origin are sent to.
    pub signatures: Vec<Vec<usize>>,
    pub checked_vertices: usize,
    pub counterexample: Option<String>,
}

impl LabelAction {
    pub fn to_json(&self) -> Value {
        json!({
            "mu": self.mu,
            "perms": self.perms,
            "kinds": self.kinds.iter().map(|k| match k {
                LabelPerm::Rotation(a) => json!({"kind": "rotation", "a": a}),
                LabelPerm::Reflection(a) => json!({"kind": "reflection", "a": a}),
            }).collect::<Vec<_>>(),
            "signatures": self.signatures,
            "checked_vertices": self.checked_vertices,
            "counterexample": self.counterexample,
        })
    }
}

fn label_graph(desc: &BuildingDescriptor) -> ProductGraph {
    ProductGraph::new(&desc.dims().iter().map(|&d| d + 1).collect::<Vec<_>>()).unwrap()
}

fn window_error(ball: &Ball, x: &PolyVertex) -> Error {
    let need = ball.descriptor.distance(&ball.center, x).max(0) as usize;
    Error::WindowTooSmall { required: need.max(ball.radius + 1), have: ball.radius }
}

/// The action of a word on labels, classified per factor both by the
/// successor test `p(t+1) = p(t) ± 1` and by the neighbor-count signature.
pub fn label_action(word: &AutWord, ball: &Ball) -> Result<LabelAction> {
    let desc = &ball.descriptor;
    word.check(desc)?;
    let lg = label_graph(desc);
    let mut table = Vec::with_capacity(lg.len());
    let mut images = Vec::with_capacity(lg.len());
    for k in 0..lg.len() {
        let l = lg.vertex(k);
        let v = desc.labelling_d(&l)?;
        if !ball.contains(&v) {
            return Err(window_error(ball, &v));
        }
        let y = word.apply(desc, &v)?;
        if !ball.contains(&y) {
            return Err(window_error(ball, &y));
        }
        table.push(lg.index(&desc.labelling_c(&y)));
        images.push(y);
    }
    if !desc.is_face(&images) {
        return Err(Error::Violation("the image of the basic chamber is not a chamber".into()));
    }
    let h = decompose_hom(&lg, &lg, &table)?;
    let r = desc.r();
    // target factor j is fed by source factor src[j]
    let mut src = vec![0; r];
    for (i, &j) in h.mu.iter().enumerate() {
        src[j] = i;
    }
    let perms: Vec<Vec<usize>> = (0..r).map(|j| h.g[src[j]].clone()).collect();

    let origin = desc.origin();
    let phi0 = word.apply(desc, &origin)?;
    let mut kinds = Vec::with_capacity(r);
    let mut signatures = Vec::with_capacity(r);
    for j in 0..r {
        let n = desc.factors()[j].d + 1;
        let p = &perms[j];
        let step = (p[1 % n] + n - p[0]) % n;
        let by_step = if (0..n).all(|t| p[(t + 1) % n] == (p[t] + step) % n) {
            if step == 1 {
                LabelPerm::Rotation(p[0])
            } else if step == n - 1 {
                LabelPerm::Reflection(p[0])
            } else {
                return Err(Error::Violation(format!("label permutation {p:?} of factor {j} moves neighbors apart")));
            }
        } else {
            return Err(Error::Violation(format!("label permutation {p:?} of factor {j} is not affine")));
        };

        let i = src[j];
        let fi = &desc.factors()[i];
        let q = fi.field.residue_size() as u64;
        let mut sig = Vec::with_capacity(fi.d);
        for w in 1..=fi.d {
            let a_w = origin.0[i].neighbors_by_colength(w)?;
            let mut offsets = HashSet::new();
            let mut imgs = HashSet::new();
            for nb in a_w {
                let mut x = origin.clone();
                x.0[i] = nb;
                let y = word.apply(desc, &x)?;
                for k in 0..r {
                    if k != j && y.0[k] != phi0.0[k] {
                        return Err(Error::Violation("a factor-neighbor left its factor".into()));
                    }
                }
                offsets.insert((y.0[j].label() + n - phi0.0[j].label()) % n);
                imgs.insert(y.0[j].clone());
            }
            if offsets.len() != 1 {
                return Err(Error::Violation(format!("colength-{w} neighbors split over label offsets {offsets:?}")));
            }
            let s = *offsets.iter().next().unwrap();
            let target: HashSet<VertexClass> = if s == 0 {
                HashSet::new()
            } else {
                phi0.0[j].neighbors_by_colength(s)?.into_iter().collect()
            };
            let (n_w, n_s) = (gaussian_binomial(n as u32, w as u32, q), gaussian_binomial(n as u32, s as u32, q));
            if target != imgs || n_w != n_s {
                return Err(Error::Violation(format!(
                    "factor {j}: colength {w} ({n_w} neighbors) does not map onto offset {s} ({n_s} neighbors)"
                )));
            }
            sig.push(s);
        }
        let by_sig_reflect = n > 2 && sig[0] == n - 1;
        let by_sig_rotate = sig[0] == 1;
        let agree = match by_step {
            LabelPerm::Rotation(_) => by_sig_rotate,
            LabelPerm::Reflection(_) => by_sig_reflect,
        };
        if !agree {
            return Err(Error::Violation(format!("factor {j}: successor test and signature {sig:?} disagree")));
        }
        kinds.push(by_step);
        signatures.push(sig);
    }

    // C∘phi = C∘phi∘D∘C on the ball
    let mut counterexample = None;
    for x in &ball.vertices {
        let lx = desc.labelling_c(x);
        let y = word.apply(desc, x)?;
        let expect = lg.vertex(table[lg.index(&lx)]);
        if desc.labelling_c(&y) != expect {
            counterexample = Some(format!("{x:?}: label {:?}, expected {expect:?}", desc.labelling_c(&y)));
            break;
        }
    }
    Ok(LabelAction { mu: src, perms, kinds, signatures, checked_vertices: ball.len(), counterexample })
}

/// Per factor, a monomial matrix sending the chamber `c` of the standard
/// apartment onto the basic chamber, with `start` going to the origin.
fn chamber_restorer(field: &crate::field::FieldModel, c: &[VertexClass], start: &VertexClass) -> Result<Mat> {
    let n = start.rank();
    let exps = |v: &VertexClass| -> Result<Vec<i64>> {
        let a = v.diagonal_exponents();
        if &VertexClass::diagonal(field, &a) != v {
            return Err(Error::Violation(format!("{v:?} is not in the standard apartment")));
        }
        Ok(a)
    };
    let mut a = exps(start)?;
    let a0 = a.clone();
    let mut rest: Vec<Vec<i64>> = c.iter().filter(|v| *v != start).map(exps).collect::<Result<_>>()?;
    let mut order = Vec::with_capacity(n);
    while !rest.is_empty() {
        let pos = rest
            .iter()
            .position(|b| {
                let diff: Vec<i64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
                let m = *diff.iter().min().unwrap();
                diff.iter().filter(|&&x| x - m == 1).count() == 1 && diff.iter().all(|&x| x - m <= 1)
            })
            .ok_or_else(|| Error::Violation("chamber vertices do not form a chain".into()))?;
        let b = rest.remove(pos);
        let diff: Vec<i64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
        let m = *diff.iter().min().unwrap();
        let t = diff.iter().position(|&x| x - m == 1).unwrap();
        a[t] += 1;
        order.push(t);
    }
    let t_last = (0..n).find(|t| !order.contains(t)).unwrap();
    order.push(t_last);
    // coordinate order[k] goes to coordinate d - k
    let mut p = Mat::zeros(field, n, n);
    for (k, &t) in order.iter().enumerate() {
        p.set(n - 1 - k, t, field.one());
    }
    let neg: Vec<i64> = a0.iter().map(|x| -x).collect();
    Ok(p.mul(&Mat::pi_diag(field, &neg)))
}

/// An element `g` of the product group with `g ∘ phi` preserving the
/// standard apartment and the basic chamber and fixing the origin.
/// Returns (apartment part, chamber part) with `g = chamber * apartment`.
pub fn restoring_element(word: &AutWord, desc: &BuildingDescriptor) -> Result<(Vec<Mat>, Vec<Mat>)> {
    let frame = word.apartment_frame(desc)?;
    let ga: Vec<Mat> = frame.iter().map(|m| m.inverse()).collect::<Result<_>>()?;
    let psi = word.then(Generator::Group(ga.clone()));
    let images: Vec<PolyVertex> = desc.basic_chamber().iter().map(|v| psi.apply(desc, v)).collect::<Result<_>>()?;
    let start = psi.apply(desc, &desc.origin())?;
    let mut gc = Vec::with_capacity(desc.r());
    for j in 0..desc.r() {
        let mut comps: Vec<VertexClass> = images.iter().map(|y| y.0[j].clone()).collect();
        comps.sort();
        comps.dedup();
        gc.push(chamber_restorer(desc.field(j), &comps, &start.0[j])?);
    }
    Ok((ga, gc))
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    /// `g` in `phi' = lambda^r ∘ g ∘ phi`.
    pub g: Vec<Mat>,
    pub mask: Vec<bool>,
    pub mu: Vec<usize>,
    /// `phi'` as a word.
    pub phi_prime: AutWord,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl NormalForm {
    pub fn to_json(&self) -> Value {
        json!({
            "g": self.g.iter().map(|m| m.to_strings()).collect::<Vec<_>>(),
            "r": self.mask.iter().map(|&b| b as u8).collect::<Vec<_>>(),
            "mu": self.mu,
            "phi_prime": self.phi_prime.to_json(),
            "checked": self.checked,
            "violations": self.violations,
        })
    }
}

/// Normal form of a word on a ball centered at the origin: `g`, the mask
/// `r` and the exchange `mu` with `lambda^r ∘ g ∘ phi = sigma_mu` on the
/// standard apartment inside the ball (checked vertex by vertex).
pub fn normal_form(word: &AutWord, ball: &Ball) -> Result<NormalForm> {
    let desc = &ball.descriptor;
    word.check(desc)?;
    if ball.center != desc.origin() {
        return Err(Error::input("normal forms are computed on balls centered at the origin"));
    }
    if ball.radius < desc.r() {
        return Err(Error::WindowTooSmall { required: desc.r(), have: ball.radius });
    }
    let (ga0, gc0) = restoring_element(word, desc)?;
    let g0: Vec<Mat> = gc0.iter().zip(&ga0).map(|(c, a)| c.mul(a)).collect();
    let la0 = label_action(&word.then(Generator::Group(g0)), ball)?;
    if la0.kinds.iter().any(|k| k.offset() != 0) {
        return Err(Error::Violation("restored map does not fix the origin label".into()));
    }
    let mask: Vec<bool> = la0.kinds.iter().map(|k| k.is_reflection()).collect();

    // restore lambda^r ∘ phi, then move lambda^r to the front
    let phi1 = word.then(Generator::Lambda(mask.clone()));
    let (ga1, gc1) = restoring_element(&phi1, desc)?;
    let g1: Vec<Mat> = gc1.iter().zip(&ga1).map(|(c, a)| c.mul(a)).collect();
    let g: Vec<Mat> = g1
        .iter()
        .zip(&mask)
        .map(|(m, &on)| if on { transpose_inverse(m) } else { Ok(m.clone()) })
        .collect::<Result<_>>()?;
    let phi_prime = word.then(Generator::Group(g.clone())).then(Generator::Lambda(mask.clone()));

    let la = label_action(&phi_prime, ball)?;
    let mut violations = Vec::new();
    if la.mu != la0.mu || la.kinds.iter().any(|k| *k != LabelPerm::Rotation(0)) {
        violations.push(format!("labels of phi' are {:?} with mu {:?}", la.kinds, la.mu));
    }
    let mut checked = 0;
    for p in desc.apartment_window(ball.radius as i64) {
        let pt = crate::building::ApartmentPoint::from_ints(&p);
        let v = desc.apartment_vertex(&pt, None)?;
        let want = desc.apartment_vertex(&desc.sigma_mu(&pt, &la0.mu)?, None)?;
        let got = phi_prime.apply(desc, &v)?;
        checked += 1;
        if got != want {
            violations.push(format!("{:?}: phi' gives {:?}, sigma_mu gives {:?}", p, got, want));
        }
    }
    Ok(NormalForm { g, mask, mu: la0.mu, phi_prime, checked, violations })
}

/// Result of spreading labels from the basic chamber along galleries.
#[derive(Clone, Debug)]
pub struct LabelPropagation {
    pub labelled: usize,
    pub chambers: usize,
    pub counterexample: Option<String>,
}

fn chamber_lookup(ball: &Ball) -> Result<(HashMap<Vec<usize>, usize>, usize)> {
    if ball.chamber_tuples.is_empty() {
        return Err(Error::input("ball was built without chambers"));
    }
    let lookup: HashMap<Vec<usize>, usize> =
        ball.chamber_tuples.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect();
    let mut delta: Vec<usize> = ball
        .descriptor
        .basic_chamber()
        .iter()
        .map(|v| ball.index.get(v).copied().ok_or_else(|| Error::WindowTooSmall { required: ball.descriptor.r(), have: ball.radius }))
        .collect::<Result<_>>()?;
    delta.sort();
    let start = ball
        .chamber_tuples
        .iter()
        .position(|t| {
            let mut c = ball.chamber_vertices(t);
            c.sort();
            c == delta
        })
        .ok_or(Error::WindowTooSmall { required: ball.descriptor.r(), have: ball.radius })?;
    Ok((lookup, start))
}

/// Gallery traversal over the chambers of the ball starting at the basic
/// chamber; calls `step(from, to, factor, old, new)` on each new chamber.
fn galleries(
    ball: &Ball,
    lookup: &HashMap<Vec<usize>, usize>,
    start: usize,
    allowed: &dyn Fn(usize) -> bool,
    step: &mut dyn FnMut(usize, usize, usize, usize, usize) -> Result<()>,
) -> Result<usize> {
    let mut seen = vec![false; ball.chamber_tuples.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(c) = queue.pop_front() {
        for (k, i, old, new) in ball.adjacent_chambers(&ball.chamber_tuples[c], lookup) {
            if seen[k] || !allowed(k) {
                continue;
            }
            seen[k] = true;
            count += 1;
            step(c, k, i, old, new)?;
            queue.push_back(k);
        }
    }
    Ok(count)
}

/// Spreads the labels of the basic chamber over the ball along galleries,
/// using only that labels are constant on facets, and compares with C.
pub fn propagate_labels(ball: &Ball) -> Result<LabelPropagation> {
    let desc = &ball.descriptor;
    let (lookup, start) = chamber_lookup(ball)?;
    let tindex: HashMap<&Vec<usize>, usize> = ball.tuples.iter().enumerate().map(|(k, t)| (t, k)).collect();
    let mut label: Vec<Option<Vec<usize>>> = vec![None; ball.len()];
    for v in ball.chamber_vertices(&ball.chamber_tuples[start]) {
        label[v] = Some(desc.labelling_c(&ball.vertices[v]));
    }
    let mut counterexample = None;
    let chambers = galleries(ball, &lookup, start, &|_| true, &mut |_, to, i, old, new| {
        for v in ball.chamber_vertices(&ball.chamber_tuples[to]) {
            let t = &ball.tuples[v];
            if t[i] != new {
                continue;
            }
            let mut u = t.clone();
            u[i] = old;
            let l = label[tindex[&u]].clone().expect("facet vertex labelled");
            match &label[v] {
                Some(x) if *x != l && counterexample.is_none() => {
                    counterexample = Some(format!("vertex {v} reached with labels {x:?} and {l:?}"));
                }
                Some(_) => {}
                None => label[v] = Some(l),
            }
        }
        Ok(())
    })?;
    let mut labelled = 0;
    for (v, l) in label.iter().enumerate() {
        if let Some(l) = l {
            labelled += 1;
            let c = desc.labelling_c(&ball.vertices[v]);
            if *l != c && counterexample.is_none() {
                counterexample = Some(format!("vertex {v}: propagated {l:?}, labelling {c:?}"));
            }
        }
    }
    Ok(LabelPropagation { labelled, chambers, counterexample })
}

fn in_standard_apartment(v: &VertexClass) -> bool {
    VertexClass::diagonal(v.model(), &v.diagonal_exponents()) == *v
}

/// The unique vertex `w != u` of the standard apartment completing the
/// facet `c \ {u}` to a chamber.
pub fn apartment_flip(c: &[VertexClass], u: &VertexClass) -> Result<VertexClass> {
    let facet: Vec<VertexClass> = c.iter().filter(|v| *v != u).cloned().collect();
    let v0 = &facet[0];
    let f = v0.model();
    let a = v0.diagonal_exponents();
    let n = a.len();
    let mut found = Vec::new();
    for mask in 1..(1u32 << n) - 1 {
        let b: Vec<i64> = a.iter().enumerate().map(|(j, x)| x + ((mask >> j) & 1) as i64).collect();
        let w = VertexClass::diagonal(f, &b);
        if &w == u || facet.contains(&w) {
            continue;
        }
        let mut s = facet.clone();
        s.push(w.clone());
        if crate::building::is_simplex(&s) {
            found.push(w);
        }
    }
    found.sort();
    found.dedup();
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        k => Err(Error::Violation(format!("facet lies in {} chambers of the apartment", k + 1))),
    }
}

#[derive(Clone, Debug)]
pub struct RigidityReport {
    pub chambers: usize,
    pub vertices: usize,
    pub counterexample: Option<String>,
}

/// Extends the values of a word on the basic chamber to the chambers of
/// the standard apartment inside the ball, one gallery step at a time,
/// and compares with the word itself. The word must preserve the standard
/// apartment.
pub fn check_rigidity(word: &AutWord, ball: &Ball) -> Result<RigidityReport> {
    let desc = &ball.descriptor;
    word.check(desc)?;
    let (lookup, start) = chamber_lookup(ball)?;
    let in_apt: Vec<bool> = ball.vertices.iter().map(|x| x.0.iter().all(in_standard_apartment)).collect();
    let apt_chamber: Vec<bool> = ball
        .chamber_tuples
        .iter()
        .map(|t| ball.chamber_vertices(t).iter().all(|&v| in_apt[v]))
        .collect();
    let tindex: HashMap<&Vec<usize>, usize> = ball.tuples.iter().enumerate().map(|(k, t)| (t, k)).collect();
    let mut image: Vec<Option<PolyVertex>> = vec![None; ball.len()];
    for v in ball.chamber_vertices(&ball.chamber_tuples[start]) {
        let y = word.apply(desc, &ball.vertices[v])?;
        if !y.0.iter().all(in_standard_apartment) {
            return Err(Error::input("word does not preserve the standard apartment"));
        }
        image[v] = Some(y);
    }
    let mut counterexample = None;
    let chambers = galleries(ball, &lookup, start, &|k| apt_chamber[k], &mut |from, to, i, old, _new| {
        let cf = ball.chamber_vertices(&ball.chamber_tuples[from]);
        // a vertex with `old` in factor i and a neighbor within the chamber
        let x = *cf.iter().find(|&&v| ball.tuples[v][i] == old).unwrap();
        let x2 = *cf
            .iter()
            .find(|&&v| {
                let (a, b) = (&ball.tuples[v], &ball.tuples[x]);
                a[i] != old && (0..a.len()).all(|k| k == i || a[k] == b[k])
            })
            .unwrap();
        let (fx, fx2) = (image[x].clone().unwrap(), image[x2].clone().unwrap());
        let j = (0..fx.0.len()).find(|&k| fx.0[k] != fx2.0[k]).unwrap();
        let mut comps: Vec<VertexClass> = cf.iter().map(|&v| image[v].as_ref().unwrap().0[j].clone()).collect();
        comps.sort();
        comps.dedup();
        let w = apartment_flip(&comps, &fx.0[j])?;
        for v in ball.chamber_vertices(&ball.chamber_tuples[to]) {
            let t = &ball.tuples[v];
            if t[i] == old || cf.contains(&v) {
                continue;
            }
            let mut u = t.clone();
            u[i] = old;
            let mut y = image[tindex[&u]].clone().unwrap();
            y.0[j] = w.clone();
            match &image[v] {
                Some(z) if *z != y && counterexample.is_none() => {
                    counterexample = Some(format!("vertex {v} reached with two images"));
                }
                Some(_) => {}
                None => image[v] = Some(y),
            }
        }
        Ok(())
    })?;
    let mut vertices = 0;
    for (v, y) in image.iter().enumerate() {
        if let Some(y) = y {
            vertices += 1;
            let z = word.apply(desc, &ball.vertices[v])?;
            if *y != z && counterexample.is_none() {
                counterexample = Some(format!("vertex {v}: gallery extension {y:?}, word {z:?}"));
            }
        }
    }
    Ok(RigidityReport { chambers, vertices, counterexample })
}

/// All label tuples of the basic chamber, in the order used by
/// `BuildingDescriptor::basic_chamber`.
pub fn label_tuples(desc: &BuildingDescriptor) -> Vec<Vec<usize>> {
    product(&desc.dims().iter().map(|&d| d + 1).collect::<Vec<_>>())
}
