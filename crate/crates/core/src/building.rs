//! Products of buildings of SL_{d_i+1} over local fields k_i.
//!
//! A vertex of the product is a tuple of lattice classes. The standard
//! apartment is made of the classes `<pi^-r_0 T_0, .., pi^-r_d T_d>` for
//! integer vectors `r`, where `r_j` is the norm exponent of `T_j`
//! (`rho(T_j) = |pi|^r_j`). Apartment points are taken modulo a common shift
//! and normalized to `r_0 = 0`.

use crate::error::{Error, Result};
use crate::field::FieldModel;
use crate::lattice::VertexClass;
use crate::matrix::Mat;
use num_rational::Ratio;
use serde_json::{json, Value};
use std::collections::{HashMap, VecDeque};

pub type Q64 = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub field: FieldModel,
    pub d: usize,
    /// Ramification of k_i over a common base; edges of this factor have
    /// length `1/ram` in units of the base valuation.
    pub ram: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildingDescriptor {
    factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolyVertex(pub Vec<VertexClass>);

pub type LabelVector = Vec<usize>;

/// A point of the standard apartment (or of the apartment of a given
/// basis): per factor, rational norm exponents with the first one zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ApartmentPoint(pub Vec<Vec<Q64>>);

impl ApartmentPoint {
    /// Normalizes each factor so its first exponent is zero.
    pub fn new(mut exps: Vec<Vec<Q64>>) -> ApartmentPoint {
        for e in exps.iter_mut() {
            let s = e[0];
            for x in e.iter_mut() {
                *x -= s;
            }
        }
        ApartmentPoint(exps)
    }

    pub fn from_ints(exps: &[Vec<i64>]) -> ApartmentPoint {
        ApartmentPoint::new(exps.iter().map(|e| e.iter().map(|&x| Q64::from_integer(x)).collect()).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_integer())
    }

    pub fn integer_exponents(&self) -> Option<Vec<Vec<i64>>> {
        self.is_integral().then(|| self.0.iter().map(|e| e.iter().map(|x| x.to_integer()).collect()).collect())
    }

    pub fn negate(&self) -> ApartmentPoint {
        ApartmentPoint::new(self.0.iter().map(|e| e.iter().map(|x| -x).collect()).collect())
    }

    pub fn to_json(&self) -> Value {
        json!(self.0.iter().map(|e| e.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
    }
}

/// Spread `max - min` of an exponent vector.
pub fn spread(e: &[i64]) -> i64 {
    e.iter().max().unwrap() - e.iter().min().unwrap()
}

impl BuildingDescriptor {
    pub fn new(factors: Vec<Factor>) -> Result<BuildingDescriptor> {
        if factors.is_empty() {
            return Err(Error::input("a building needs at least one factor"));
        }
        if let Some(f) = factors.iter().find(|f| f.d == 0 || f.ram == 0) {
            return Err(Error::input(format!("bad factor: d = {}, ramification = {}", f.d, f.ram)));
        }
        Ok(BuildingDescriptor { factors })
    }

    /// `r` copies of the building of SL_{d+1} over `field`.
    pub fn uniform(field: &FieldModel, d: usize, r: usize) -> Result<BuildingDescriptor> {
        BuildingDescriptor::new((0..r).map(|_| Factor { field: field.clone(), d, ram: 1 }).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }
    pub fn r(&self) -> usize {
        self.factors.len()
    }
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.d).collect()
    }
    pub fn field(&self, i: usize) -> &FieldModel {
        &self.factors[i].field
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .factors
            .iter()
            .map(|f| json!({"field": f.field.spec(), "d": f.d, "ram": f.ram}))
            .collect::<Vec<_>>())
    }

    fn check(&self, x: &PolyVertex) -> Result<()> {
        if x.0.len() != self.r() {
            return Err(Error::input(format!("vertex has {} components, building has {}", x.0.len(), self.r())));
        }
        for (v, f) in x.0.iter().zip(&self.factors) {
            if v.rank() != f.d + 1 || v.model() != &f.field {
                return Err(Error::input("vertex component does not match its factor"));
            }
        }
        Ok(())
    }

    pub fn parse_vertex(&self, comps: &[Vec<String>]) -> Result<PolyVertex> {
        if comps.len() != self.r() {
            return Err(Error::input(format!("expected {} components", self.r())));
        }
        let x = PolyVertex(
            comps.iter().zip(&self.factors).map(|(s, f)| VertexClass::parse(&f.field, s)).collect::<Result<_>>()?,
        );
        self.check(&x)?;
        Ok(x)
    }

    pub fn vertex_json(&self, x: &PolyVertex) -> Value {
        json!(x.0.iter().map(|v| v.to_strings()).collect::<Vec<_>>())
    }

    pub fn origin(&self) -> PolyVertex {
        PolyVertex(self.factors.iter().map(|f| VertexClass::standard(&f.field, f.d + 1)).collect())
    }

    /// `L_k = <T_0, .., T_{d-k}, pi T_{d-k+1}, .., pi T_d>`, the vertex of
    /// label k of the basic chamber of one factor.
    pub fn basic_vertex(field: &FieldModel, d: usize, k: usize) -> VertexClass {
        let a: Vec<i64> = (0..=d).map(|j| (j + k > d) as i64).collect();
        VertexClass::diagonal(field, &a)
    }

    /// Vertices of the basic chamber, ordered by label vector
    /// (lexicographically, first factor most significant).
    pub fn basic_chamber(&self) -> Vec<PolyVertex> {
        product(&self.dims().iter().map(|&d| d + 1).collect::<Vec<_>>())
            .into_iter()
            .map(|l| self.labelling_d(&l).unwrap())
            .collect()
    }

    /// The labelling C: per factor `v(det) mod (d_i + 1)`.
    pub fn labelling_c(&self, x: &PolyVertex) -> LabelVector {
        x.0.iter().map(|v| v.label()).collect()
    }

    /// The vertex of the basic chamber with the given labels.
    pub fn labelling_d(&self, l: &[usize]) -> Result<PolyVertex> {
        if l.len() != self.r() || l.iter().zip(&self.factors).any(|(&x, f)| x > f.d) {
            return Err(Error::input(format!("bad label vector {l:?}")));
        }
        Ok(PolyVertex(
            l.iter().zip(&self.factors).map(|(&k, f)| BuildingDescriptor::basic_vertex(&f.field, f.d, k)).collect(),
        ))
    }

    /// The generator `T_j -> T_{j-1}`, `T_0 -> pi T_d` of one factor.
    pub fn shift_generator(field: &FieldModel, d: usize, power: i64) -> Mat {
        let n = d + 1;
        let mut g = Mat::zeros(field, n, n);
        g.set(d, 0, field.uniformizer());
        for j in 1..n {
            g.set(j - 1, j, field.one());
        }
        let base = if power >= 0 { g } else { g.inverse().unwrap() };
        let mut out = Mat::identity(field, n);
        for _ in 0..power.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `[L] -> [g L]` per factor.
    pub fn act(&self, g: &[Mat], x: &PolyVertex) -> Result<PolyVertex> {
        if g.len() != self.r() {
            return Err(Error::input("one matrix per factor is required"));
        }
        for (m, f) in g.iter().zip(&self.factors) {
            if m.rows() != f.d + 1 || m.cols() != f.d + 1 {
                return Err(Error::input("matrix size does not match factor"));
            }
            if m.model().is_zero(&m.det()) {
                return Err(Error::Singular);
            }
        }
        Ok(PolyVertex(x.0.iter().zip(g).map(|(v, m)| v.act(m)).collect::<Result<_>>()?))
    }

    /// Applies the duality `[L] -> [L^*]` on the factors set in `mask`.
    pub fn involution_lambda(&self, x: &PolyVertex, mask: &[bool]) -> PolyVertex {
        PolyVertex(x.0.iter().zip(mask).map(|(v, &m)| if m { v.dual() } else { v.clone() }).collect())
    }

    /// Undirected 1-skeleton distance in the product: the sum over factors.
    pub fn distance(&self, x: &PolyVertex, y: &PolyVertex) -> i64 {
        x.0.iter().zip(&y.0).map(|(a, b)| a.distance(b)).sum()
    }

    pub fn is_adjacent(&self, x: &PolyVertex, y: &PolyVertex) -> bool {
        self.distance(x, y) == 1
    }

    /// `f(x, y) = sum_i [M_i : L_i]` on normalized representatives.
    pub fn distance_f(&self, x: &PolyVertex, y: &PolyVertex) -> i64 {
        x.0.iter().zip(&y.0).map(|(a, b)| a.distance_f(b)).sum()
    }

    /// `x -> y` is a directed edge iff the vertices are adjacent and the
    /// label of y is that of x plus one unit.
    pub fn is_directed_edge(&self, x: &PolyVertex, y: &PolyVertex) -> bool {
        if !self.is_adjacent(x, y) {
            return false;
        }
        let (cx, cy) = (self.labelling_c(x), self.labelling_c(y));
        let mut units = 0;
        for (i, f) in self.factors.iter().enumerate() {
            let diff = (cy[i] + f.d + 1 - cx[i]) % (f.d + 1);
            match diff {
                0 => {}
                1 => units += 1,
                _ => return false,
            }
        }
        units == 1
    }

    /// True iff the listed vertices (no repetitions) form a face: the set
    /// is a product of per-factor sets and each per-factor set is a chain
    /// `L_0 ⊋ L_1 ⊋ .. ⊋ L_k ⊋ pi L_0`.
    pub fn is_face(&self, vs: &[PolyVertex]) -> bool {
        if vs.is_empty() {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        if !vs.iter().all(|v| seen.insert(v)) {
            return false;
        }
        let mut comps: Vec<Vec<VertexClass>> = vec![Vec::new(); self.r()];
        for v in vs {
            for (i, c) in v.0.iter().enumerate() {
                if !comps[i].contains(c) {
                    comps[i].push(c.clone());
                }
            }
        }
        let size: usize = comps.iter().map(|c| c.len()).product();
        if size != vs.len() {
            return false;
        }
        comps.iter().all(|c| is_chain(c))
    }

    /// Norm-formula projection onto the apartment of the given bases
    /// (columns), one per factor: `m_j = min_i v((B^-1 A_j)_i)`.
    pub fn project_apartment(&self, x: &PolyVertex, bases: Option<&[Mat]>) -> Result<ApartmentPoint> {
        let mut out = Vec::with_capacity(self.r());
        for (i, v) in x.0.iter().enumerate() {
            let f = v.model();
            let c = match bases {
                Some(b) => v.inverse().mul(&b[i]),
                None => v.inverse().clone(),
            };
            let m: Vec<Q64> = (0..c.cols())
                .map(|j| {
                    let mv = (0..c.rows()).filter_map(|r| f.valuation(c.get(r, j))).min();
                    mv.map(Q64::from_integer).ok_or(Error::Singular)
                })
                .collect::<Result<_>>()?;
            out.push(m);
        }
        Ok(ApartmentPoint::new(out))
    }

    /// The vertex of the apartment of `bases` (standard if None) with
    /// integer exponents `r`.
    pub fn apartment_vertex(&self, p: &ApartmentPoint, bases: Option<&[Mat]>) -> Result<PolyVertex> {
        let ints = p.integer_exponents().ok_or_else(|| Error::input("apartment point is not a vertex"))?;
        let mut comps = Vec::with_capacity(self.r());
        for (i, r) in ints.iter().enumerate() {
            let f = self.field(i);
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            let d = Mat::pi_diag(f, &neg);
            let basis = match bases {
                Some(b) => b[i].mul(&d),
                None => d,
            };
            comps.push(VertexClass::from_basis(&basis)?);
        }
        Ok(PolyVertex(comps))
    }

    /// Vertices of the standard apartment at undirected distance at most
    /// `radius` from the origin, as integer exponent vectors.
    pub fn apartment_window(&self, radius: i64) -> Vec<Vec<Vec<i64>>> {
        let per: Vec<Vec<Vec<i64>>> = self
            .factors
            .iter()
            .map(|f| {
                let mut v = Vec::new();
                let side = (2 * radius + 1) as usize;
                for code in product(&vec![side; f.d]) {
                    let mut e = vec![0i64];
                    e.extend(code.iter().map(|&c| c as i64 - radius));
                    if spread(&e) <= radius {
                        v.push(e);
                    }
                }
                v.sort_by_key(|e| (spread(e), e.clone()));
                v
            })
            .collect();
        let mut out = Vec::new();
        for idx in product(&per.iter().map(|p| p.len()).collect::<Vec<_>>()) {
            let pt: Vec<Vec<i64>> = idx.iter().enumerate().map(|(i, &k)| per[i][k].clone()).collect();
            if pt.iter().map(|e| spread(e)).sum::<i64>() <= radius {
                out.push(pt);
            }
        }
        out
    }

    /// The exchange map on apartment points: factor i receives the
    /// coordinates of factor `mu[i]`.
    pub fn sigma_mu(&self, p: &ApartmentPoint, mu: &[usize]) -> Result<ApartmentPoint> {
        self.check_exchange(mu)?;
        Ok(ApartmentPoint::new(mu.iter().map(|&j| p.0[j].clone()).collect()))
    }

    pub fn check_exchange(&self, mu: &[usize]) -> Result<()> {
        let r = self.r();
        let mut seen = vec![false; r];
        if mu.len() != r || mu.iter().any(|&j| j >= r || std::mem::replace(&mut seen[j], true)) {
            return Err(Error::input(format!("{mu:?} is not a permutation of 0..{r}")));
        }
        for (i, &j) in mu.iter().enumerate() {
            if self.factors[i].d != self.factors[j].d {
                return Err(Error::input(format!("factors {i} and {j} have different dimensions")));
            }
        }
        Ok(())
    }
}

/// True iff the distinct classes `c` form a simplex of one building.
pub fn is_simplex(c: &[VertexClass]) -> bool {
    let mut seen = std::collections::HashSet::new();
    !c.is_empty() && c.iter().all(|v| seen.insert(v)) && is_chain(c)
}

fn is_chain(c: &[VertexClass]) -> bool {
    let v0 = &c[0];
    let mut rest: Vec<(i64, &VertexClass)> = Vec::with_capacity(c.len());
    for v in &c[1..] {
        if !v0.is_adjacent(v) {
            return false;
        }
        rest.push((v0.distance_f(v), v));
    }
    rest.sort_by_key(|x| x.0);
    let mut prev = (0i64, v0);
    for &(k, v) in &rest {
        if k == prev.0 || !prev.1.is_adjacent(v) || prev.1.distance_f(v) != k - prev.0 {
            return false;
        }
        prev = (k, v);
    }
    true
}

/// All tuples `(i_0, .., i_{k-1})` with `i_j < sizes[j]`, lexicographic.
pub fn product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..s).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug)]
pub struct BallOptions {
    pub radius: usize,
    pub edges: bool,
    pub chambers: bool,
    /// Upper bound on `radius * max d_i * q_i`.
    pub budget: u128,
}

impl BallOptions {
    pub fn full(radius: usize) -> BallOptions {
        BallOptions { radius, edges: true, chambers: true, budget: DEFAULT_BUDGET }
    }
    pub fn vertices_only(radius: usize) -> BallOptions {
        BallOptions { radius, edges: false, chambers: false, budget: DEFAULT_BUDGET }
    }
}

pub const DEFAULT_BUDGET: u128 = 24;

/// The ball in one factor.
#[derive(Clone, Debug)]
pub struct FactorBall {
    pub vertices: Vec<VertexClass>,
    pub dist: Vec<usize>,
    pub index: HashMap<VertexClass, usize>,
    /// Neighbor lists restricted to the ball; only for vertices strictly
    /// inside unless edges were requested.
    pub neighbors: Vec<Vec<usize>>,
    /// Chambers inside the ball, vertex indices ordered by label.
    pub chambers: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub factor: usize,
    /// Set when the edge is directed `from -> to` (or reversed, see
    /// `reversed`) by labels.
    pub directed: bool,
    pub reversed: bool,
    pub length: Q64,
}

/// A finite window of the product building around a center vertex.
#[derive(Clone, Debug)]
pub struct Ball {
    pub descriptor: BuildingDescriptor,
    pub center: PolyVertex,
    pub radius: usize,
    pub factor_balls: Vec<FactorBall>,
    /// Product vertices as tuples of factor-ball indices.
    pub tuples: Vec<Vec<usize>>,
    pub vertices: Vec<PolyVertex>,
    pub index: HashMap<PolyVertex, usize>,
    pub dist: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Product chambers as tuples of factor chamber indices.
    pub chamber_tuples: Vec<Vec<usize>>,
}

impl Ball {
    pub fn new(desc: &BuildingDescriptor, center: &PolyVertex, opts: &BallOptions) -> Result<Ball> {
        desc.check(center)?;
        let need = desc
            .factors
            .iter()
            .map(|f| opts.radius as u128 * f.d as u128 * f.field.residue_size() as u128)
            .max()
            .unwrap();
        if need > opts.budget {
            return Err(Error::budget("ball radius * d * q", need, opts.budget));
        }
        let r = opts.radius;
        let factor_balls = desc
            .factors
            .iter()
            .zip(&center.0)
            .map(|(_, c)| factor_ball(c, r, opts.edges, opts.chambers))
            .collect::<Result<Vec<_>>>()?;

        let mut tuples: Vec<Vec<usize>> = Vec::new();
        collect_tuples(&factor_balls, r, &mut Vec::new(), 0, &mut tuples);
        let key = |t: &Vec<usize>| -> usize { t.iter().enumerate().map(|(i, &k)| factor_balls[i].dist[k]).sum() };
        tuples.sort_by_key(|t| (key(t), t.clone()));
        let dist: Vec<usize> = tuples.iter().map(key).collect();
        let vertices: Vec<PolyVertex> = tuples
            .iter()
            .map(|t| PolyVertex(t.iter().enumerate().map(|(i, &k)| factor_balls[i].vertices[k].clone()).collect()))
            .collect();
        let index: HashMap<PolyVertex, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let tindex: HashMap<&Vec<usize>, usize> = tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();

        let mut edges = Vec::new();
        if opts.edges {
            for (a, t) in tuples.iter().enumerate() {
                for (i, fb) in factor_balls.iter().enumerate() {
                    for &nb in &fb.neighbors[t[i]] {
                        let mut u = t.clone();
                        u[i] = nb;
                        if let Some(&b) = tindex.get(&u) {
                            if a < b {
                                let (la, lb) = (fb.vertices[t[i]].label(), fb.vertices[nb].label());
                                let n = desc.factors[i].d + 1;
                                let up = (lb + n - la) % n == 1;
                                let down = (la + n - lb) % n == 1;
                                edges.push(Edge {
                                    from: a,
                                    to: b,
                                    factor: i,
                                    directed: up || down,
                                    reversed: !up && down,
                                    length: Q64::new(1, desc.factors[i].ram as i64),
                                });
                            }
                        }
                    }
                }
            }
            edges.sort_by_key(|e| (e.from, e.to));
        }

        let mut chamber_tuples = Vec::new();
        if opts.chambers {
            let maxd: Vec<Vec<usize>> = factor_balls
                .iter()
                .map(|fb| fb.chambers.iter().map(|c| c.iter().map(|&v| fb.dist[v]).max().unwrap()).collect())
                .collect();
            for t in product(&factor_balls.iter().map(|fb| fb.chambers.len()).collect::<Vec<_>>()) {
                if t.iter().enumerate().map(|(i, &c)| maxd[i][c]).sum::<usize>() <= r {
                    chamber_tuples.push(t);
                }
            }
        }

        Ok(Ball {
            descriptor: desc.clone(),
            center: center.clone(),
            radius: r,
            factor_balls,
            tuples,
            vertices,
            index,
            dist,
            edges,
            chamber_tuples,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, x: &PolyVertex) -> bool {
        self.index.contains_key(x)
    }

    /// Vertex ids of a product chamber, ordered by label vector.
    pub fn chamber_vertices(&self, t: &[usize]) -> Vec<usize> {
        let per: Vec<&Vec<usize>> = t.iter().enumerate().map(|(i, &c)| &self.factor_balls[i].chambers[c]).collect();
        product(&per.iter().map(|c| c.len()).collect::<Vec<_>>())
            .into_iter()
            .map(|pick| {
                let tuple: Vec<usize> = pick.iter().enumerate().map(|(i, &k)| per[i][k]).collect();
                self.index[&self.tuple_vertex(&tuple)]
            })
            .collect()
    }

    fn tuple_vertex(&self, t: &[usize]) -> PolyVertex {
        PolyVertex(t.iter().enumerate().map(|(i, &k)| self.factor_balls[i].vertices[k].clone()).collect())
    }

    /// Chambers of the ball sharing a facet with chamber `t`.
    pub fn adjacent_chambers(&self, t: &[usize], lookup: &HashMap<Vec<usize>, usize>) -> Vec<(usize, usize, usize, usize)> {
        // (chamber id, factor, replaced vertex, new vertex) in factor indices
        let mut out = Vec::new();
        for (i, fb) in self.factor_balls.iter().enumerate() {
            let c = &fb.chambers[t[i]];
            for (k, other) in fb.chambers.iter().enumerate() {
                if k == t[i] {
                    continue;
                }
                let shared = c.iter().filter(|v| other.contains(v)).count();
                if shared + 1 != c.len() {
                    continue;
                }
                let mut u = t.to_vec();
                u[i] = k;
                if let Some(&id) = lookup.get(&u) {
                    let old = *c.iter().find(|v| !other.contains(v)).unwrap();
                    let new = *other.iter().find(|v| !c.contains(v)).unwrap();
                    out.push((id, i, old, new));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let d = &self.descriptor;
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| json!({"id": id, "matrix_per_factor": d.vertex_json(v), "label": d.labelling_c(v)}))
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = if e.reversed { (e.to, e.from) } else { (e.from, e.to) };
                json!({"from": a, "to": b, "factor": e.factor, "directed": e.directed, "length": e.length.to_string()})
            })
            .collect();
        let chambers: Vec<Value> = self.chamber_tuples.iter().map(|t| json!(self.chamber_vertices(t))).collect();
        json!({
            "descriptor": d.to_json(),
            "center": d.vertex_json(&self.center),
            "radius": self.radius,
            "vertices": vertices,
            "edges": edges,
            "chambers": chambers,
        })
    }

    /// Graphviz rendering of the 1-skeleton, vertices colored by label.
    pub fn to_dot(&self) -> String {
        const COLORS: [&str; 8] = ["black", "red", "blue", "green", "orange", "purple", "brown", "cyan"];
        let d = &self.descriptor;
        let mut s = String::from("graph ball {\n  node [shape=circle, label=\"\"];\n");
        for (id, v) in self.vertices.iter().enumerate() {
            let l = d.labelling_c(v);
            let code = l.iter().zip(d.factors()).fold(0, |acc, (&x, f)| acc * (f.d + 1) + x);
            let tag = l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            s.push_str(&format!(
                "  v{id} [color={}, xlabel=\"{tag}\"];\n",
                COLORS[code % COLORS.len()]
            ));
        }
        for e in &self.edges {
            s.push_str(&format!("  v{} -- v{} [label=\"{}\"];\n", e.from, e.to, e.factor));
        }
        s.push_str("}\n");
        s
    }
}

fn collect_tuples(fbs: &[FactorBall], budget: usize, cur: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<usize>>) {
    let i = cur.len();
    if i == fbs.len() {
        out.push(cur.clone());
        return;
    }
    for (k, &dk) in fbs[i].dist.iter().enumerate() {
        if used + dk <= budget {
            cur.push(k);
            collect_tuples(fbs, budget, cur, used + dk, out);
            cur.pop();
        }
    }
}

/// BFS ball of one factor. Neighbor lists are restricted to the ball.
pub fn factor_ball(center: &VertexClass, radius: usize, edges: bool, chambers: bool) -> Result<FactorBall> {
    let mut vertices = vec![center.clone()];
    let mut dist = vec![0usize];
    let mut index = HashMap::from([(center.clone(), 0usize)]);
    let mut raw: Vec<Option<Vec<VertexClass>>> = vec![None];
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        if dist[a] >= radius {
            continue;
        }
        let nbs = vertices[a].neighbors()?;
        for nb in &nbs {
            if !index.contains_key(nb) {
                index.insert(nb.clone(), vertices.len());
                vertices.push(nb.clone());
                dist.push(dist[a] + 1);
                raw.push(None);
                queue.push_back(vertices.len() - 1);
            }
        }
        raw[a] = Some(nbs);
    }
    let need_all = edges || chambers;
    let mut neighbors = vec![Vec::new(); vertices.len()];
    for a in 0..vertices.len() {
        let list = match raw[a].take() {
            Some(l) => l,
            None if need_all => vertices[a].neighbors()?,
            None => continue,
        };
        let mut ids: Vec<usize> = list.iter().filter_map(|v| index.get(v).copied()).collect();
        ids.sort();
        neighbors[a] = ids;
    }
    let mut chamber_list = Vec::new();
    if chambers {
        let n = center.rank();
        for a in 0..vertices.len() {
            if vertices[a].label() != 0 {
                continue;
            }
            // complete flags through vertex a, grown along colength-one steps
            let mut partial: Vec<Vec<usize>> = vec![vec![a]];
            for step in 1..n {
                let mut next = Vec::new();
                for p in &partial {
                    let last = *p.last().unwrap();
                    for &b in &neighbors[last] {
                        if vertices[last].distance_f(&vertices[b]) == 1
                            && vertices[a].distance_f(&vertices[b]) == step as i64
                            && neighbors[a].contains(&b)
                        {
                            let mut q = p.clone();
                            q.push(b);
                            next.push(q);
                        }
                    }
                }
                partial = next;
            }
            // order by label: label of the vertex at step s is s
            chamber_list.extend(partial);
        }
    }
    Ok(FactorBall { vertices, dist, index, neighbors, chambers: chamber_list })
}
