//! The order complex K_n of set pairs under componentwise inclusion, its
//! induced subcomplexes, GF(2) homology and the Yang index.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{GF2Matrix, Rational};
use crate::graph::{SetPair, VertexSet};

/// Default largest n accepted by [`build_kn`].
pub const DEFAULT_CAP: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("n = {n} exceeds the cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("n must be at least 1")]
    Empty,
    #[error("{0:?} is not a vertex of the complex")]
    UnknownVertex(SetPair),
    #[error("value list has {got} entries for {expected} vertices")]
    ValueCount { got: usize, expected: usize },
}

/// Simplicial complex whose simplices are chains of set pairs.
///
/// Vertices are sorted by (support size, A, B), so every chain is stored as a
/// strictly increasing index tuple. Simplices of each dimension are kept in
/// lexicographic order in one flat buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderComplex {
    n: usize,
    vertices: Vec<SetPair>,
    simplices: Vec<Vec<u32>>,
}

fn vertex_key(v: &SetPair) -> (usize, u32, u32) {
    (v.support().len(), v.a.0, v.b.0)
}

impl OrderComplex {
    /// Order complex of the sub-poset formed by `vertices`.
    pub fn from_poset(n: usize, mut vertices: Vec<SetPair>) -> Self {
        vertices.sort_by_key(vertex_key);
        vertices.dedup();
        let m = vertices.len();
        let up: Vec<Vec<u32>> = (0..m)
            .map(|i| {
                (i + 1..m)
                    .filter(|&j| vertices[i].le(vertices[j]))
                    .map(|j| j as u32)
                    .collect()
            })
            .collect();
        let mut simplices: Vec<Vec<u32>> = Vec::new();
        let mut chain = Vec::with_capacity(n + 1);
        fn dfs(up: &[Vec<u32>], chain: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            let q = chain.len() - 1;
            if out.len() <= q {
                out.push(Vec::new());
            }
            out[q].extend_from_slice(chain);
            let last = *chain.last().expect("nonempty chain") as usize;
            for &j in &up[last] {
                chain.push(j);
                dfs(up, chain, out);
                chain.pop();
            }
        }
        // DFS preorder emits each dimension in lexicographic order.
        for i in 0..m {
            chain.push(i as u32);
            dfs(&up, &mut chain, &mut simplices);
            chain.pop();
        }
        OrderComplex { n, vertices, simplices }
    }

    pub fn empty(n: usize) -> Self {
        OrderComplex {
            n,
            vertices: Vec::new(),
            simplices: Vec::new(),
        }
    }

    /// Size of the ground set the set pairs live in.
    pub fn ground(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[SetPair] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: SetPair) -> Option<usize> {
        self.vertices
            .binary_search_by(|w| vertex_key(w).cmp(&vertex_key(&v)))
            .ok()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Top dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, q: usize) -> usize {
        self.simplices.get(q).map_or(0, |s| s.len() / (q + 1))
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..self.simplices.len()).map(|q| self.count(q)).collect()
    }

    pub fn simplex(&self, q: usize, i: usize) -> &[u32] {
        &self.simplices[q][i * (q + 1)..(i + 1) * (q + 1)]
    }

    pub fn simplices(&self, q: usize) -> impl Iterator<Item = &[u32]> {
        self.simplices
            .get(q)
            .map(|s| s.chunks_exact(q + 1))
            .into_iter()
            .flatten()
    }

    /// Index of a simplex given as an increasing vertex-index tuple.
    pub fn find(&self, s: &[u32]) -> Option<usize> {
        let q = s.len().checked_sub(1)?;
        let (mut lo, mut hi) = (0, self.count(q));
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.simplex(q, mid).cmp(s) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Indices of the codimension-one faces of simplex `i` in dimension `q`.
    pub fn faces(&self, q: usize, i: usize) -> Vec<usize> {
        if q == 0 {
            return Vec::new();
        }
        let s = self.simplex(q, i);
        let mut buf = Vec::with_capacity(q);
        (0..=q)
            .map(|skip| {
                buf.clear();
                buf.extend(s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v));
                self.find(&buf).expect("complex is closed under faces")
            })
            .collect()
    }

    /// Sparse ∂_q as sorted row lists, one per q-simplex.
    pub fn boundary_columns(&self, q: usize) -> Vec<Vec<u32>> {
        (0..self.count(q))
            .map(|i| {
                let mut f: Vec<u32> = self.faces(q, i).into_iter().map(|x| x as u32).collect();
                f.sort_unstable();
                f
            })
            .collect()
    }

    /// Dense ∂_q : C_q → C_{q−1}. Meant for small complexes.
    pub fn boundary_matrix(&self, q: usize) -> GF2Matrix {
        let rows = if q == 0 { 0 } else { self.count(q - 1) };
        let cols = self.boundary_columns(q);
        GF2Matrix::from_entries(
            rows,
            cols.len(),
            cols.iter()
                .enumerate()
                .flat_map(|(c, rs)| rs.iter().map(move |&r| (r as usize, c))),
        )
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts()
            .iter()
            .enumerate()
            .map(|(q, &c)| if q % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Keeps the simplices whose vertices all satisfy `keep`.
    pub fn induced_subcomplex(&self, keep: impl Fn(SetPair) -> bool) -> OrderComplex {
        let mut map = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, &v) in self.vertices.iter().enumerate() {
            if keep(v) {
                map[i] = vertices.len() as u32;
                vertices.push(v);
            }
        }
        let mut simplices = Vec::new();
        for q in 0..self.simplices.len() {
            let mut out = Vec::new();
            for s in self.simplices(q) {
                if s.iter().all(|&v| map[v as usize] != u32::MAX) {
                    out.extend(s.iter().map(|&v| map[v as usize]));
                }
            }
            if out.is_empty() {
                break;
            }
            simplices.push(out);
        }
        OrderComplex {
            n: self.n,
            vertices,
            simplices,
        }
    }

    /// Keeps the listed simplices and all their faces.
    fn closure_of(&self, tops: &[(usize, usize)]) -> OrderComplex {
        let mut keep: Vec<Vec<bool>> = (0..self.simplices.len()).map(|q| vec![false; self.count(q)]).collect();
        for &(q, i) in tops {
            keep[q][i] = true;
        }
        for q in (1..self.simplices.len()).rev() {
            for i in 0..self.count(q) {
                if keep[q][i] {
                    for f in self.faces(q, i) {
                        keep[q - 1][f] = true;
                    }
                }
            }
        }
        let mut map = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, &v) in self.vertices.iter().enumerate() {
            if keep.first().is_some_and(|k| k[i]) {
                map[i] = vertices.len() as u32;
                vertices.push(v);
            }
        }
        let mut simplices = Vec::new();
        for (q, kq) in keep.iter().enumerate() {
            let out: Vec<u32> = (0..self.count(q))
                .filter(|&i| kq[i])
                .flat_map(|i| self.simplex(q, i).iter().map(|&v| map[v as usize]))
                .collect();
            if out.is_empty() {
                break;
            }
            simplices.push(out);
        }
        OrderComplex {
            n: self.n,
            vertices,
            simplices,
        }
    }
}

/// K_n: the order complex of all set pairs of {1..n}. Refuses n above
/// [`DEFAULT_CAP`].
pub fn build_kn(n: usize) -> Result<OrderComplex, ComplexError> {
    build_kn_with_cap(n, DEFAULT_CAP)
}

/// [`build_kn`] with an explicit cap override.
pub fn build_kn_with_cap(n: usize, cap: usize) -> Result<OrderComplex, ComplexError> {
    if n == 0 {
        return Err(ComplexError::Empty);
    }
    if n > cap || n > 16 {
        return Err(ComplexError::CapExceeded { n, cap });
    }
    Ok(OrderComplex::from_poset(n, all_set_pairs(n)))
}

/// Every set pair of {1..n}, i.e. every nonzero vector in {-1,0,1}^n.
pub fn all_set_pairs(n: usize) -> Vec<SetPair> {
    let full = VertexSet::full(n).0;
    let mut out = Vec::with_capacity(3usize.pow(n as u32) - 1);
    let mut supp = full;
    // Enumerate supports, then sign splits within each support.
    loop {
        if supp != 0 {
            let mut a = supp;
            loop {
                out.push(SetPair {
                    a: VertexSet(a),
                    b: VertexSet(supp & !a),
                });
                if a == 0 {
                    break;
                }
                a = (a - 1) & supp;
            }
        }
        if supp == 0 {
            break;
        }
        supp = (supp - 1) & full;
    }
    out
}

/// Closed star and link of a vertex.
pub fn star_link(k: &OrderComplex, v: SetPair) -> Result<(OrderComplex, OrderComplex), ComplexError> {
    let vi = k.vertex_index(v).ok_or(ComplexError::UnknownVertex(v))? as u32;
    let mut tops = Vec::new();
    for q in 0..k.simplices.len() {
        for i in 0..k.count(q) {
            if k.simplex(q, i).contains(&vi) {
                tops.push((q, i));
            }
        }
    }
    let star = k.closure_of(&tops);
    let link = star.induced_subcomplex(|w| w != v);
    Ok((star, link))
}

/// Vertex set of the link of `v` in K_n: everything comparable to `v`.
pub fn kn_link_vertices(n: usize, v: SetPair) -> Vec<SetPair> {
    all_set_pairs(n)
        .into_iter()
        .filter(|&w| w != v && (w.le(v) || v.le(w)))
        .collect()
}

/// Column reduction over GF(2) with the lowest-pivot rule.
///
/// Columns are given in processing order as sorted row lists; each may carry
/// a bit that is XOR-accumulated along column additions.
pub(crate) struct Reducer {
    owner: Vec<u32>,
    reduced: Vec<Vec<u32>>,
    bits: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Pivot(u32),
    Zero(bool),
}

fn xor_into(acc: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].cmp(&other[j]) {
            Ordering::Less => {
                scratch.push(acc[i]);
                i += 1;
            }
            Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&acc[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(acc, scratch);
}

impl Reducer {
    pub(crate) fn new(rows: usize) -> Self {
        Reducer {
            owner: vec![u32::MAX; rows],
            reduced: Vec::new(),
            bits: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, mut col: Vec<u32>, mut bit: bool) -> Outcome {
        let mut scratch = Vec::with_capacity(col.len());
        while let Some(&low) = col.last() {
            let o = self.owner[low as usize];
            if o == u32::MAX {
                self.owner[low as usize] = self.reduced.len() as u32;
                self.reduced.push(col);
                self.bits.push(bit);
                return Outcome::Pivot(low);
            }
            xor_into(&mut col, &self.reduced[o as usize], &mut scratch);
            bit ^= self.bits[o as usize];
        }
        Outcome::Zero(bit)
    }
}

/// Rank of a sparse GF(2) matrix given by columns.
pub fn sparse_rank(rows: usize, cols: impl IntoIterator<Item = Vec<u32>>) -> usize {
    let mut r = Reducer::new(rows);
    cols.into_iter()
        .filter(|c| matches!(r.push(c.clone(), false), Outcome::Pivot(_)))
        .count()
}

/// GF(2) Betti numbers b_0..b_dim; empty for the empty complex.
pub fn betti_gf2(k: &OrderComplex) -> Vec<usize> {
    let top = k.simplices.len();
    let ranks: Vec<usize> = (0..=top)
        .map(|q| {
            if q == 0 || q >= top {
                0
            } else {
                sparse_rank(k.count(q - 1), k.boundary_columns(q))
            }
        })
        .collect();
    (0..top).map(|q| k.count(q) - ranks[q] - ranks[q + 1]).collect()
}

/// Reduced Betti numbers; the empty complex counts as acyclic here.
pub fn reduced_betti_gf2(k: &OrderComplex) -> Vec<usize> {
    let mut b = betti_gf2(k);
    if let Some(b0) = b.first_mut() {
        *b0 -= 1;
    }
    b
}

/// The antipodal action (A,B) ↦ (B,A) on a complex.
#[derive(Clone, Debug)]
pub struct SymmetricStructure {
    /// Antipodal vertex index, or `None` if some vertex has no antipode.
    pub vertex_antipode: Option<Vec<u32>>,
    /// Per dimension, the index of the antipodal simplex.
    pub simplex_antipode: Vec<Vec<u32>>,
}

impl SymmetricStructure {
    pub fn detect(k: &OrderComplex) -> Self {
        let anti: Option<Vec<u32>> = k
            .vertices
            .iter()
            .map(|v| k.vertex_index(v.antipode()).map(|i| i as u32))
            .collect();
        let Some(anti) = anti else {
            return SymmetricStructure {
                vertex_antipode: None,
                simplex_antipode: Vec::new(),
            };
        };
        let mut simplex_antipode = Vec::new();
        let mut buf = Vec::new();
        for q in 0..k.simplices.len() {
            let mut out = Vec::with_capacity(k.count(q));
            for s in k.simplices(q) {
                buf.clear();
                buf.extend(s.iter().map(|&v| anti[v as usize]));
                // The antipode preserves the order relation, so the image stays sorted.
                match k.find(&buf) {
                    Some(i) => out.push(i as u32),
                    None => {
                        return SymmetricStructure {
                            vertex_antipode: None,
                            simplex_antipode: Vec::new(),
                        }
                    }
                }
            }
            simplex_antipode.push(out);
        }
        SymmetricStructure {
            vertex_antipode: Some(anti),
            simplex_antipode,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.vertex_antipode.is_some()
    }

    /// True when the action moves every simplex (no simplex is its own image).
    pub fn is_free(&self) -> bool {
        self.is_symmetric()
            && self
                .simplex_antipode
                .iter()
                .all(|a| a.iter().enumerate().all(|(i, &j)| i as u32 != j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct YangReport {
    pub index: usize,
    /// dim H_q(S,−) over GF(2).
    pub symmetric_homology: Vec<usize>,
    /// Whether ν_* is nonzero on H_q(S,−).
    pub nu_nonzero: Vec<bool>,
}

/// Chooses the orbit representative of each simplex.
pub type RepChoice<'a> = &'a dyn Fn(usize, usize, usize) -> bool;

fn lex_smaller(k: &OrderComplex, q: usize, i: usize, j: usize) -> bool {
    let (s, t) = (k.simplex(q, i), k.simplex(q, j));
    let sv = s.iter().map(|&v| k.vertices[v as usize]);
    let tv = t.iter().map(|&v| k.vertices[v as usize]);
    sv.lt(tv)
}

/// Orbit data of a symmetric complex: representative flags and ν values.
pub(crate) struct Orbits {
    /// Per dimension, simplex indices of the representatives.
    pub reps: Vec<Vec<u32>>,
    /// Per dimension, simplex index → orbit index.
    pub orbit_of: Vec<Vec<u32>>,
    /// Per dimension, ν of each orbit.
    pub nu: Vec<Vec<bool>>,
}

impl Orbits {
    pub(crate) fn new(k: &OrderComplex, s: &SymmetricStructure, flip: Option<(usize, usize)>) -> Self {
        let mut reps = Vec::new();
        let mut orbit_of = Vec::new();
        let mut is_rep_all = Vec::new();
        for q in 0..k.simplices.len() {
            let anti = &s.simplex_antipode[q];
            let mut is_rep = vec![false; k.count(q)];
            let mut r = Vec::new();
            let mut of = vec![u32::MAX; k.count(q)];
            for i in 0..k.count(q) {
                let j = anti[i] as usize;
                if of[i] != u32::MAX {
                    continue;
                }
                let orbit = r.len();
                let mut rep = if lex_smaller(k, q, i, j) { i } else { j };
                if flip == Some((q, orbit)) {
                    rep = if rep == i { j } else { i };
                }
                is_rep[rep] = true;
                of[i] = orbit as u32;
                of[j] = orbit as u32;
                r.push(rep as u32);
            }
            reps.push(r);
            orbit_of.push(of);
            is_rep_all.push(is_rep);
        }
        // μ_0(v) = [v rep]; μ_q(σ) = Σ over representative faces f of μ_{q−1}(f).
        let mut mu: Vec<Vec<bool>> = Vec::new();
        for q in 0..k.simplices.len() {
            let m: Vec<bool> = if q == 0 {
                is_rep_all[0].clone()
            } else {
                (0..k.count(q))
                    .map(|i| {
                        k.faces(q, i)
                            .into_iter()
                            .filter(|&f| is_rep_all[q - 1][f])
                            .fold(false, |acc, f| acc ^ mu[q - 1][f])
                    })
                    .collect()
            };
            mu.push(m);
        }
        let nu = reps
            .iter()
            .zip(&mu)
            .map(|(r, m)| r.iter().map(|&i| m[i as usize]).collect())
            .collect();
        Orbits { reps, orbit_of, nu }
    }

    pub(crate) fn count(&self, q: usize) -> usize {
        self.reps.get(q).map_or(0, |r| r.len())
    }

    /// Orbit boundary: orbits of the faces of the representative.
    pub(crate) fn boundary(&self, k: &OrderComplex, q: usize, orbit: usize) -> Vec<u32> {
        if q == 0 {
            return Vec::new();
        }
        let mut f: Vec<u32> = k
            .faces(q, self.reps[q][orbit] as usize)
            .into_iter()
            .map(|f| self.orbit_of[q - 1][f])
            .collect();
        f.sort_unstable();
        f
    }
}

/// Yang index of a symmetric complex; 0 when empty or not symmetric.
pub fn yang_index(k: &OrderComplex, s: &SymmetricStructure) -> YangReport {
    yang_index_flipped(k, s, None)
}

/// [`yang_index`] with the representative of one orbit `(q, orbit)` swapped.
pub fn yang_index_flipped(k: &OrderComplex, s: &SymmetricStructure, flip: Option<(usize, usize)>) -> YangReport {
    if k.is_empty() || !s.is_symmetric() {
        return YangReport {
            index: 0,
            symmetric_homology: Vec::new(),
            nu_nonzero: Vec::new(),
        };
    }
    let orb = Orbits::new(k, s, flip);
    let top = k.simplices.len();
    let mut rank = vec![0usize; top + 1];
    let mut nu_nonzero = vec![false; top];
    for q in 0..top {
        let mut red = Reducer::new(if q == 0 { 0 } else { orb.count(q - 1) });
        for o in 0..orb.count(q) {
            match red.push(orb.boundary(k, q, o), orb.nu[q][o]) {
                Outcome::Pivot(_) => rank[q] += 1,
                Outcome::Zero(bit) => nu_nonzero[q] |= bit,
            }
        }
    }
    let symmetric_homology: Vec<usize> = (0..top).map(|q| orb.count(q) - rank[q] - rank[q + 1]).collect();
    let index = nu_nonzero.iter().position(|&b| !b).unwrap_or(top);
    YangReport {
        index,
        symmetric_homology,
        nu_nonzero,
    }
}

/// Distinct sorted values and, per vertex, the rank of its value.
fn rank_values(values: &[Rational]) -> (Vec<Rational>, Vec<u32>) {
    let mut t: Vec<Rational> = values.to_vec();
    t.sort();
    t.dedup();
    let ranks = values
        .iter()
        .map(|v| t.binary_search(v).expect("value present") as u32)
        .collect();
    (t, ranks)
}

/// Closed-sublevel Betti numbers at every threshold of a vertex function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SublevelBetti {
    pub thresholds: Vec<Rational>,
    /// `betti[t][q]` for the subcomplex induced on vertices with value ≤ thresholds[t].
    pub betti: Vec<Vec<usize>>,
}

impl SublevelBetti {
    /// Betti vector of the strict sublevel below threshold `t`.
    pub fn strict(&self, t: usize) -> Vec<usize> {
        if t == 0 {
            vec![0; self.betti.first().map_or(0, |b| b.len())]
        } else {
            self.betti[t - 1].clone()
        }
    }
}

/// Sorts the q-simplices by (max vertex rank, index) and returns positions and values.
fn filtration_order(k: &OrderComplex, q: usize, vrank: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let val: Vec<u32> = k
        .simplices(q)
        .map(|s| s.iter().map(|&v| vrank[v as usize]).max().unwrap_or(0))
        .collect();
    let mut order: Vec<u32> = (0..val.len() as u32).collect();
    order.sort_by_key(|&i| (val[i as usize], i));
    (order, val)
}

/// Betti numbers of every closed sublevel subcomplex in one persistence pass.
pub fn sublevel_betti(k: &OrderComplex, values: &[Rational]) -> Result<SublevelBetti, ComplexError> {
    if values.len() != k.vertices.len() {
        return Err(ComplexError::ValueCount {
            got: values.len(),
            expected: k.vertices.len(),
        });
    }
    let (thresholds, vrank) = rank_values(values);
    let top = k.simplices.len();
    let width = k.ground().max(top);
    let mut betti = vec![vec![0usize; width]; thresholds.len()];
    let orders: Vec<(Vec<u32>, Vec<u32>)> = (0..top).map(|q| filtration_order(k, q, &vrank)).collect();
    // pos[q][simplex] = filtration position within dimension q.
    let pos: Vec<Vec<u32>> = orders
        .iter()
        .map(|(ord, _)| {
            let mut p = vec![0u32; ord.len()];
            for (k, &i) in ord.iter().enumerate() {
                p[i as usize] = k as u32;
            }
            p
        })
        .collect();
    // death[q][position] = value rank at which that positive q-simplex dies.
    let mut death: Vec<Vec<Option<u32>>> = (0..top).map(|q| vec![None; k.count(q)]).collect();
    let mut positive: Vec<Vec<bool>> = (0..top).map(|q| vec![true; k.count(q)]).collect();
    for q in (1..top).rev() {
        let (ord, val) = &orders[q];
        let mut red = Reducer::new(k.count(q - 1));
        for (p, &i) in ord.iter().enumerate() {
            if death[q][p].is_some() {
                // Cleared: paired as a birth in dimension q, so its column reduces to zero.
                continue;
            }
            let mut col: Vec<u32> = k.faces(q, i as usize).into_iter().map(|f| pos[q - 1][f]).collect();
            col.sort_unstable();
            if let Outcome::Pivot(r) = red.push(col, false) {
                death[q - 1][r as usize] = Some(val[i as usize]);
                positive[q][p] = false;
            }
        }
    }
    let nt = thresholds.len();
    for q in 0..top {
        let (ord, val) = &orders[q];
        let mut diff = vec![0i64; nt + 1];
        for (p, &i) in ord.iter().enumerate() {
            if !positive[q][p] {
                continue;
            }
            let b = val[i as usize] as usize;
            let d = death[q][p].map_or(nt, |d| d as usize);
            if b < d {
                diff[b] += 1;
                diff[d] -= 1;
            }
        }
        let mut run = 0i64;
        for (t, row) in betti.iter_mut().enumerate() {
            run += diff[t];
            row[q] = run as usize;
        }
    }
    Ok(SublevelBetti { thresholds, betti })
}

/// For k = 1..=dim+1, the least threshold c with Yang index of the closed
/// sublevel at c at least k; `None` when never reached.
pub fn yang_thresholds(k: &OrderComplex, s: &SymmetricStructure, values: &[Rational]) -> Result<Vec<Option<Rational>>, ComplexError> {
    if values.len() != k.vertices.len() {
        return Err(ComplexError::ValueCount {
            got: values.len(),
            expected: k.vertices.len(),
        });
    }
    if k.is_empty() || !s.is_symmetric() {
        return Ok(Vec::new());
    }
    let (thresholds, vrank) = rank_values(values);
    let orb = Orbits::new(k, s, None);
    let top = k.simplices.len();
    let orbit_val = |q: usize, o: usize| -> u32 {
        k.simplex(q, orb.reps[q][o] as usize)
            .iter()
            .map(|&v| vrank[v as usize])
            .max()
            .unwrap_or(0)
    };
    let orders: Vec<Vec<u32>> = (0..top)
        .map(|q| {
            let mut ord: Vec<u32> = (0..orb.count(q) as u32).collect();
            ord.sort_by_key(|&o| (orbit_val(q, o as usize), o));
            ord
        })
        .collect();
    let pos: Vec<Vec<u32>> = orders
        .iter()
        .map(|ord| {
            let mut p = vec![0u32; ord.len()];
            for (k, &i) in ord.iter().enumerate() {
                p[i as usize] = k as u32;
            }
            p
        })
        .collect();
    let mut cleared: Vec<Vec<bool>> = (0..top).map(|q| vec![false; orb.count(q)]).collect();
    let mut first: Vec<Option<Rational>> = vec![None; top];
    for q in (0..top).rev() {
        let mut red = Reducer::new(if q == 0 { 0 } else { orb.count(q - 1) });
        for (p, &o) in orders[q].iter().enumerate() {
            if cleared[q][p] {
                // Its cycle can be taken to be a boundary, on which ν vanishes.
                continue;
            }
            let col: Vec<u32> = {
                let mut c: Vec<u32> = orb
                    .boundary(k, q, o as usize)
                    .into_iter()
                    .map(|f| pos[q - 1][f as usize])
                    .collect();
                c.sort_unstable();
                c
            };
            match red.push(col, orb.nu[q][o as usize]) {
                Outcome::Pivot(r) => cleared[q - 1][r as usize] = true,
                Outcome::Zero(true) if first[q].is_none() => {
                    first[q] = Some(thresholds[orbit_val(q, o as usize) as usize].clone());
                }
                Outcome::Zero(_) => {}
            }
        }
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexSet;

    fn factorial(n: usize) -> usize {
        (1..=n).product()
    }

    #[test]
    fn kn_counts() {
        for n in 1..=4 {
            let k = build_kn(n).unwrap();
            assert_eq!(k.vertices().len(), 3usize.pow(n as u32) - 1);
            assert_eq!(k.dim(), Some(n - 1));
            assert_eq!(k.count(n - 1), factorial(n) << n);
        }
        assert_eq!(build_kn(1).unwrap().count(1), 0);
        assert_eq!(build_kn(2).unwrap().count(1), 8);
        assert_eq!(build_kn(3).unwrap().count(2), 48);
    }

    #[test]
    fn cap_enforced() {
        assert_eq!(build_kn(7), Err(ComplexError::CapExceeded { n: 7, cap: 6 }));
        assert_eq!(build_kn(0), Err(ComplexError::Empty));
        assert!(build_kn_with_cap(3, 2).is_err());
    }

    #[test]
    fn spheres() {
        for n in 1..=4 {
            let k = build_kn(n).unwrap();
            let mut expect = vec![0; n];
            if n == 1 {
                expect[0] = 2;
            } else {
                expect[0] = 1;
                expect[n - 1] = 1;
            }
            assert_eq!(betti_gf2(&k), expect, "n = {n}");
        }
    }

    #[test]
    fn boundary_squares_to_zero() {
        let k = build_kn(3).unwrap();
        for q in 1..3 {
            assert!(k.boundary_matrix(q).mul(&k.boundary_matrix(q + 1)).is_zero());
        }
    }

    #[test]
    fn dense_and_sparse_ranks_agree() {
        let k = build_kn(3).unwrap();
        for q in 1..3 {
            let dense = crate::exactalg::gf2_rank(&k.boundary_matrix(q));
            assert_eq!(dense, sparse_rank(k.count(q - 1), k.boundary_columns(q)));
        }
    }

    #[test]
    fn induced_extremes() {
        let k = build_kn(3).unwrap();
        assert_eq!(k.induced_subcomplex(|_| true), k);
        let e = k.induced_subcomplex(|_| false);
        assert!(e.is_empty());
        assert!(betti_gf2(&e).is_empty());
    }

    #[test]
    fn two_points() {
        let k = build_kn(1).unwrap();
        assert_eq!(betti_gf2(&k), vec![2]);
        let s = SymmetricStructure::detect(&k);
        assert_eq!(yang_index(&k, &s).index, 1);
    }

    #[test]
    fn yang_of_spheres() {
        for n in 1..=4 {
            let k = build_kn(n).unwrap();
            let s = SymmetricStructure::detect(&k);
            assert!(s.is_free());
            let r = yang_index(&k, &s);
            assert_eq!(r.index, n);
            assert_eq!(r.nu_nonzero.iter().filter(|&&b| b).count(), n);
        }
    }

    #[test]
    fn yang_flip_invariance() {
        let k = build_kn(3).unwrap();
        let s = SymmetricStructure::detect(&k);
        let base = yang_index(&k, &s);
        for q in 0..3 {
            for o in [0, 3, 7] {
                assert_eq!(yang_index_flipped(&k, &s, Some((q, o))), base);
            }
        }
    }

    #[test]
    fn non_symmetric_has_index_zero() {
        let k = build_kn(2).unwrap();
        let half = k.induced_subcomplex(|v| v.b.is_empty());
        let s = SymmetricStructure::detect(&half);
        assert!(!s.is_symmetric());
        assert_eq!(yang_index(&half, &s).index, 0);
    }

    #[test]
    fn star_and_link_of_k2() {
        let k = build_kn(2).unwrap();
        for &v in k.vertices() {
            let (star, link) = star_link(&k, v).unwrap();
            assert_eq!(link.vertices().len(), 2);
            assert_eq!(link.count(1), 0);
            assert_eq!(betti_gf2(&star), vec![1, 0]);
        }
    }

    #[test]
    fn stars_are_contractible() {
        let k = build_kn(3).unwrap();
        for &v in k.vertices().iter().step_by(5) {
            let (star, link) = star_link(&k, v).unwrap();
            assert_eq!(betti_gf2(&star)[0], 1);
            assert!(betti_gf2(&star)[1..].iter().all(|&b| b == 0));
            let mut lv: Vec<SetPair> = link.vertices().to_vec();
            lv.sort();
            let mut expect = kn_link_vertices(3, v);
            expect.sort();
            assert_eq!(lv, expect);
        }
    }

    #[test]
    fn unknown_vertex() {
        let k = build_kn(2).unwrap();
        let v = SetPair::new(VertexSet::singleton(3), VertexSet::EMPTY).unwrap();
        assert_eq!(star_link(&k, v).unwrap_err(), ComplexError::UnknownVertex(v));
    }

    #[test]
    fn sublevel_betti_matches_direct() {
        let k = build_kn(3).unwrap();
        // Value = support size; sublevels are the order complexes of small supports.
        let vals: Vec<Rational> = k
            .vertices()
            .iter()
            .map(|v| Rational::from_int(v.support().len() as i64))
            .collect();
        let sb = sublevel_betti(&k, &vals).unwrap();
        for (t, c) in sb.thresholds.iter().enumerate() {
            let sub = k.induced_subcomplex(|v| Rational::from_int(v.support().len() as i64) <= *c);
            let mut direct = betti_gf2(&sub);
            direct.resize(3, 0);
            assert_eq!(sb.betti[t], direct);
        }
    }

    #[test]
    fn yang_thresholds_match_direct() {
        let k = build_kn(3).unwrap();
        let vals: Vec<Rational> = k
            .vertices()
            .iter()
            .map(|v| Rational::from_int(v.support().len() as i64))
            .collect();
        let s = SymmetricStructure::detect(&k);
        let th = yang_thresholds(&k, &s, &vals).unwrap();
        let expect: Vec<Option<Rational>> = (1..=3).map(|c| Some(Rational::from_int(c))).collect();
        assert_eq!(th, expect);
    }
}
