//! Simple undirected graphs on vertices 1..n with bitmask vertex sets.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::Rational;

/// Largest vertex count representable by [`VertexSet`].
pub const MAX_VERTICES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex count {0} outside 1..={MAX_VERTICES}")]
    BadVertexCount(usize),
    #[error("vertex {v} outside 1..={n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("vector is zero")]
    ZeroVector,
    #[error("vector length {got} does not match vertex count {n}")]
    LengthMismatch { got: usize, n: usize },
    #[error("set pair parts overlap or are both empty")]
    InvalidSetPair,
    #[error("set pair is supported on isolated vertices only")]
    ZeroVolume,
    #[error("graph has an isolated vertex {0}")]
    IsolatedVertex(usize),
    #[error("unknown catalog graph {0:?}")]
    UnknownCatalog(String),
}

/// Subset of 1..=32 stored as a bitmask; bit `i - 1` holds vertex `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct VertexSet(pub u32);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn full(n: usize) -> Self {
        if n >= 32 {
            VertexSet(u32::MAX)
        } else {
            VertexSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(1 << (v - 1))
    }

    pub fn from_vertices<I: IntoIterator<Item = usize>>(vs: I) -> Self {
        VertexSet(vs.into_iter().fold(0, |m, v| m | 1 << (v - 1)))
    }

    pub fn contains(self, v: usize) -> bool {
        (1..=32).contains(&v) && self.0 >> (v - 1) & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, o: VertexSet) -> VertexSet {
        VertexSet(self.0 | o.0)
    }

    pub fn intersection(self, o: VertexSet) -> VertexSet {
        VertexSet(self.0 & o.0)
    }

    pub fn minus(self, o: VertexSet) -> VertexSet {
        VertexSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: VertexSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_disjoint(self, o: VertexSet) -> bool {
        self.0 & o.0 == 0
    }

    /// Vertices in increasing order, 1-based.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let v = m.trailing_zeros() as usize + 1;
            m &= m - 1;
            Some(v)
        })
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An ordered pair (A, B) of disjoint vertex sets, not both empty.
/// Stands for the vector 1_A − 1_B.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetPair {
    pub a: VertexSet,
    pub b: VertexSet,
}

impl SetPair {
    pub fn new(a: VertexSet, b: VertexSet) -> Result<Self, GraphError> {
        if !a.is_disjoint(b) || (a.is_empty() && b.is_empty()) {
            return Err(GraphError::InvalidSetPair);
        }
        Ok(SetPair { a, b })
    }

    pub fn antipode(self) -> SetPair {
        SetPair { a: self.b, b: self.a }
    }

    pub fn support(self) -> VertexSet {
        self.a.union(self.b)
    }

    /// Componentwise inclusion (A ⊆ A′ and B ⊆ B′).
    pub fn le(self, o: SetPair) -> bool {
        self.a.is_subset(o.a) && self.b.is_subset(o.b)
    }

    /// Entries in {-1, 0, 1} of length n.
    pub fn to_vector(self, n: usize) -> Vec<i8> {
        (1..=n)
            .map(|v| {
                if self.a.contains(v) {
                    1
                } else if self.b.contains(v) {
                    -1
                } else {
                    0
                }
            })
            .collect()
    }

    /// Inverse of [`SetPair::to_vector`] for sign vectors.
    pub fn from_signs(x: &[i8]) -> Result<Self, GraphError> {
        let a = VertexSet::from_vertices((1..=x.len()).filter(|&v| x[v - 1] > 0));
        let b = VertexSet::from_vertices((1..=x.len()).filter(|&v| x[v - 1] < 0));
        SetPair::new(a, b)
    }
}

impl fmt::Debug for SetPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?})", self.a, self.b)
    }
}

/// Simple undirected graph on vertices 1..=n.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<VertexSet>,
}

impl Graph {
    /// Edges are unordered; each pair must be distinct and loop-free.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_VERTICES {
            return Err(GraphError::BadVertexCount(n));
        }
        let mut adj = vec![VertexSet::EMPTY; n];
        let mut out = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            for v in [i, j] {
                if v == 0 || v > n {
                    return Err(GraphError::VertexOutOfRange { v, n });
                }
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            let (i, j) = (i.min(j), i.max(j));
            if adj[i - 1].contains(j) {
                return Err(GraphError::DuplicateEdge(i, j));
            }
            adj[i - 1] = adj[i - 1].union(VertexSet::singleton(j));
            adj[j - 1] = adj[j - 1].union(VertexSet::singleton(i));
            out.push((i, j));
        }
        out.sort_unstable();
        Ok(Graph { n, edges: out, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as (i, j) with i < j, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.adj[v - 1]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i >= 1 && i <= self.n && self.adj[i - 1].contains(j)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v - 1].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (1..=self.n).map(|v| self.degree(v)).collect()
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn isolated_vertex(&self) -> Option<usize> {
        (1..=self.n).find(|&v| self.degree(v) == 0)
    }

    pub fn require_no_isolated(&self) -> Result<(), GraphError> {
        match self.isolated_vertex() {
            Some(v) => Err(GraphError::IsolatedVertex(v)),
            None => Ok(()),
        }
    }

    /// Connected components of the subgraph induced on `s`.
    pub fn components(&self, s: VertexSet) -> Vec<VertexSet> {
        let mut left = s;
        let mut out = Vec::new();
        while let Some(v) = left.iter().next() {
            let mut comp = VertexSet::singleton(v);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let next = frontier
                    .iter()
                    .fold(VertexSet::EMPTY, |m, u| m.union(self.neighbors(u)))
                    .intersection(s)
                    .minus(comp);
                comp = comp.union(next);
                frontier = next;
            }
            left = left.minus(comp);
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components(self.vertices()).len() == 1
    }

    /// Forest check: |E| = n − #components.
    pub fn is_forest(&self) -> bool {
        self.edges.len() + self.components(self.vertices()).len() == self.n
    }

    pub fn is_clique(&self, s: VertexSet) -> bool {
        s.iter().all(|v| s.minus(VertexSet::singleton(v)).is_subset(self.neighbors(v)))
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

/// Sum of degrees over `a`.
pub fn volume(g: &Graph, a: VertexSet) -> usize {
    a.iter().filter(|&v| v <= g.n).map(|v| g.degree(v)).sum()
}

/// Number of edges with exactly one endpoint in `a`.
pub fn edge_boundary(g: &Graph, a: VertexSet) -> usize {
    a.iter()
        .filter(|&v| v <= g.n)
        .map(|v| g.neighbors(v).minus(a).len())
        .sum()
}

/// F_1(1_A − 1_B) = (|∂A| + |∂B|) / vol(A ∪ B), exactly.
pub fn f1_pair(g: &Graph, s: SetPair) -> Result<Rational, GraphError> {
    let vol = volume(g, s.support());
    if vol == 0 {
        return Err(GraphError::ZeroVolume);
    }
    let num = edge_boundary(g, s.a) + edge_boundary(g, s.b);
    Ok(Rational::new(num as i64, vol as i64))
}

fn check_len(g: &Graph, x: &[f64]) -> Result<(), GraphError> {
    if x.len() != g.n {
        return Err(GraphError::LengthMismatch { got: x.len(), n: g.n });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(GraphError::ZeroVector);
    }
    Ok(())
}

/// F_p(x) = Σ_edges |x_i − x_j|^p / Σ_i deg(i)|x_i|^p.
pub fn rayleigh_fp(g: &Graph, x: &[f64], p: f64) -> Result<f64, GraphError> {
    check_len(g, x)?;
    let num: f64 = g.edges.iter().map(|&(i, j)| (x[i - 1] - x[j - 1]).abs().powf(p)).sum();
    let den: f64 = (1..=g.n).map(|v| g.degree(v) as f64 * x[v - 1].abs().powf(p)).sum();
    if den == 0.0 {
        return Err(GraphError::ZeroVolume);
    }
    Ok(num / den)
}

/// Components of the positive support plus components of the negative support.
pub fn strong_nodal_count(g: &Graph, x: &[f64]) -> Result<usize, GraphError> {
    check_len(g, x)?;
    let pos = VertexSet::from_vertices((1..=g.n).filter(|&v| x[v - 1] > 0.0));
    let neg = VertexSet::from_vertices((1..=g.n).filter(|&v| x[v - 1] < 0.0));
    Ok(g.components(pos).len() + g.components(neg).len())
}

/// Parses "n" on the first content line, then one "i j" pair per line.
/// Text after '#' is ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let num = |t: &str| {
            t.parse::<usize>().map_err(|_| GraphError::Parse {
                line,
                msg: format!("expected a positive integer, found {t:?}"),
            })
        };
        match (n, toks.as_slice()) {
            (None, [t]) => n = Some(num(t)?),
            (None, _) => {
                return Err(GraphError::Parse {
                    line,
                    msg: "first line must hold the vertex count".into(),
                })
            }
            (Some(_), [a, b]) => edges.push((num(a)?, num(b)?)),
            (Some(_), _) => {
                return Err(GraphError::Parse {
                    line,
                    msg: "expected two vertex indices".into(),
                })
            }
        }
    }
    let n = n.ok_or(GraphError::Parse {
        line: 0,
        msg: "missing vertex count".into(),
    })?;
    Graph::new(n, &edges)
}

impl FromStr for Graph {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_edge_list(s)
    }
}

/// Writes the edge-list text format accepted by [`parse_edge_list`].
pub fn to_edge_list(g: &Graph) -> String {
    let mut s = format!("{}\n", g.n);
    for (i, j) in &g.edges {
        s.push_str(&format!("{i} {j}\n"));
    }
    s
}

/// Built-in graphs used throughout the examples.
pub mod catalog {
    use super::*;

    /// Six-vertex counterexample graph; degrees (5,4,3,3,3,2).
    pub fn g6() -> Graph {
        Graph::new(
            6,
            &[(3, 4), (4, 1), (1, 2), (2, 4), (1, 3), (2, 3), (5, 6), (1, 6), (1, 5), (2, 5)],
        )
        .expect("static graph")
    }

    pub fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        Graph::new(n, &e).expect("path")
    }

    pub fn cycle(n: usize) -> Graph {
        let mut e: Vec<_> = (1..n).map(|i| (i, i + 1)).collect();
        e.push((n, 1));
        Graph::new(n, &e).expect("cycle needs n >= 3")
    }

    pub fn complete(n: usize) -> Graph {
        let e: Vec<_> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        Graph::new(n, &e).expect("complete")
    }

    /// Triangle {1,2,3} with the tail 3-4-5.
    pub fn five() -> Graph {
        Graph::new(5, &[(1, 3), (1, 2), (2, 3), (3, 4), (4, 5)]).expect("static graph")
    }

    /// Two triangles through vertices 1 and 2 joined by the edge {1,2}.
    pub fn fig5() -> Graph {
        Graph::new(6, &[(1, 2), (1, 3), (1, 4), (3, 4), (2, 6), (2, 5), (5, 6)]).expect("static graph")
    }

    /// Even n ≥ 8: {i,j} with i + j ≤ n + 1, plus {n, n−i} for 1 ≤ i ≤ n/2 − 2.
    pub fn more(n: usize) -> Graph {
        let mut e = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                if i + j <= n + 1 {
                    e.push((i, j));
                }
            }
        }
        for i in 1..=(n / 2).saturating_sub(2) {
            e.push((n - i, n));
        }
        Graph::new(n, &e).expect("family graph")
    }

    /// Looks up names such as "g6", "p6", "five", "fig5", "c8", "k5", "path4", "more8".
    pub fn by_name(name: &str) -> Result<Graph, GraphError> {
        let unknown = || GraphError::UnknownCatalog(name.to_string());
        let lower = name.to_ascii_lowercase();
        let sized = |prefix: &str, min: usize| -> Option<usize> {
            lower
                .strip_prefix(prefix)
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&k| k >= min && k <= MAX_VERTICES)
        };
        match lower.as_str() {
            "g6" => return Ok(g6()),
            "p6" => return Ok(path(6)),
            "five" => return Ok(five()),
            "fig5" => return Ok(fig5()),
            _ => {}
        }
        if let Some(k) = sized("path", 1) {
            return Ok(path(k));
        }
        if let Some(k) = sized("more", 8).filter(|k| k % 2 == 0) {
            return Ok(more(k));
        }
        if let Some(k) = sized("c", 3) {
            return Ok(cycle(k));
        }
        if let Some(k) = sized("k", 1) {
            return Ok(complete(k));
        }
        Err(unknown())
    }

    /// Names of the fixed entries, with sized families at representative sizes.
    pub const NAMES: &[&str] = &["g6", "p6", "five", "fig5", "c8", "c9", "k4", "k5", "more8"];
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `density`.
pub fn random_connected<R: Rng>(n: usize, density: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for v in 2..=n {
        edges.push((rng.gen_range(1..v), v));
    }
    let tree: HashSet<(usize, usize)> = edges.iter().copied().collect();
    for i in 1..=n {
        for j in i + 1..=n {
            if !tree.contains(&(i, j)) && rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, &edges).expect("generated graph is simple")
}

/// Uniform random labelled tree on n vertices (random attachment order).
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let mut order: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let edges: Vec<_> = (1..n).map(|k| (order[rng.gen_range(0..k)], order[k])).collect();
    Graph::new(n, &edges).expect("tree is simple")
}

#[cfg(test)]
mod tests {
    use super::catalog::*;
    use super::*;

    fn vs(v: &[usize]) -> VertexSet {
        VertexSet::from_vertices(v.iter().copied())
    }

    fn pair(a: &[usize], b: &[usize]) -> SetPair {
        SetPair::new(vs(a), vs(b)).unwrap()
    }

    #[test]
    fn g6_degrees() {
        assert_eq!(g6().degrees(), vec![5, 4, 3, 3, 3, 2]);
    }

    #[test]
    fn volumes_and_boundaries() {
        let g = g6();
        assert_eq!(volume(&g, vs(&[2, 5, 6])), 9);
        assert_eq!(volume(&g, VertexSet::EMPTY), 0);
        assert_eq!(volume(&g, g.vertices()), 20);
        assert_eq!(edge_boundary(&g, vs(&[2, 5, 6])), 5);
        assert_eq!(edge_boundary(&g, g.vertices()), 0);
        assert_eq!(edge_boundary(&g, vs(&[1, 2, 5, 6])), 4);
    }

    #[test]
    fn f1_pair_values() {
        let g = g6();
        assert_eq!(f1_pair(&g, pair(&[2, 5, 6, 3, 4], &[1])).unwrap(), Rational::new(1, 2));
        assert_eq!(f1_pair(&g, pair(&[1, 2, 3, 4, 5, 6], &[])).unwrap(), Rational::zero());
        assert_eq!(f1_pair(&g, pair(&[2], &[])).unwrap(), Rational::one());
        assert_eq!(f1_pair(&g, pair(&[2, 5, 6], &[])).unwrap(), Rational::new(5, 9));
        assert_eq!(f1_pair(&g, pair(&[1, 2, 5, 6], &[])).unwrap(), Rational::new(2, 7));
    }

    #[test]
    fn f1_pair_on_isolated_support_errors() {
        let g = Graph::new(3, &[(1, 2)]).unwrap();
        assert_eq!(f1_pair(&g, pair(&[3], &[])), Err(GraphError::ZeroVolume));
    }

    #[test]
    fn rayleigh_examples() {
        let k2 = complete(2);
        assert_eq!(rayleigh_fp(&k2, &[1.0, -1.0], 2.0).unwrap(), 2.0);
        let g = g6();
        let x = [0.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        assert!((rayleigh_fp(&g, &x, 1.0).unwrap() - 5.0 / 9.0).abs() < 1e-15);
        assert!((rayleigh_fp(&g, &x, 3.7).unwrap() - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(rayleigh_fp(&g, &[0.0; 6], 2.0), Err(GraphError::ZeroVector));
        assert!(matches!(rayleigh_fp(&g, &[1.0], 2.0), Err(GraphError::LengthMismatch { .. })));
    }

    #[test]
    fn nodal_counts() {
        assert_eq!(strong_nodal_count(&g6(), &[1.0; 6]).unwrap(), 1);
        let x = [0.0, 0.0, 1.0, 1.0, -1.0, -1.0];
        assert_eq!(strong_nodal_count(&fig5(), &x).unwrap(), 2);
        assert_eq!(strong_nodal_count(&path(4), &[1.0, -1.0, 1.0, -1.0]).unwrap(), 4);
    }

    #[test]
    fn graph_validation() {
        assert_eq!(Graph::new(3, &[(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(Graph::new(3, &[(1, 2), (2, 1)]), Err(GraphError::DuplicateEdge(1, 2)));
        assert_eq!(Graph::new(3, &[(1, 4)]), Err(GraphError::VertexOutOfRange { v: 4, n: 3 }));
        assert_eq!(Graph::new(0, &[]), Err(GraphError::BadVertexCount(0)));
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let text = "# G6\n6\n3 4\n4 1 # trailing\n1 2\n2 4\n1 3\n2 3\n\n5 6\n1 6\n1 5\n2 5\n";
        let g = parse_edge_list(text).unwrap();
        assert_eq!(g, g6());
        assert_eq!(parse_edge_list(&to_edge_list(&g)).unwrap(), g);
        assert!(matches!(parse_edge_list("3\n1 x\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("3\n1 2 3\n"), Err(GraphError::Parse { line: 2, .. })));
        assert!(matches!(parse_edge_list("# nothing\n"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn catalog_lookup() {
        assert_eq!(catalog::by_name("G6").unwrap(), g6());
        assert_eq!(catalog::by_name("c8").unwrap().edges().len(), 8);
        assert_eq!(catalog::by_name("k5").unwrap().edges().len(), 10);
        assert!(catalog::by_name("more7").is_err());
        assert!(catalog::by_name("nope").is_err());
        for name in catalog::NAMES {
            assert!(catalog::by_name(name).unwrap().is_connected(), "{name}");
        }
    }

    #[test]
    fn components_and_forest() {
        let g = Graph::new(5, &[(1, 2), (3, 4)]).unwrap();
        assert_eq!(g.components(g.vertices()).len(), 3);
        assert!(g.is_forest());
        assert!(!g6().is_forest());
        assert!(path(6).is_forest());
        assert!(g6().is_clique(vs(&[2, 3, 4])));
        assert!(!g6().is_clique(vs(&[2, 5, 6])));
    }

    #[test]
    fn random_generators() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 2..9 {
            assert!(random_connected(n, 0.3, &mut rng).is_connected());
            let t = random_tree(n, &mut rng);
            assert!(t.is_connected() && t.is_forest());
        }
    }
}
