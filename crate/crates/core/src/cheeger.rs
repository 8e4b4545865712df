//! Multi-way Cheeger constants, the modified constants ĥ_k = λ_k(Δ_1),
//! subpartition bounds, pseudo-independence and closed-form spectra.

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::complex::{build_kn, yang_thresholds, ComplexError, SymmetricStructure};
use crate::exactalg::Rational;
use crate::graph::{edge_boundary, strong_nodal_count, volume, Graph, GraphError, VertexSet};
use crate::homological::vertex_values;
use crate::one_lap::{enumerate_delta1_spectrum, OneLapError};
use crate::p_solver::{eigenpairs_p2, p2_eigenvalue_in, PSolverError};

/// Largest n for exhaustive h_k.
pub const MULTIWAY_CAP: usize = 8;
/// Largest n for pseudo-independence.
pub const PSEUDO_INDEPENDENCE_CAP: usize = 10;
/// Entries below this magnitude count as zero when counting nodal domains of
/// floating eigenvectors.
pub const NODAL_ZERO: f64 = 1e-9;
/// Float slack for arrows whose sides are not both exact.
pub const ARROW_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheegerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    OneLap(#[from] OneLapError),
    #[error(transparent)]
    PSolver(#[from] PSolverError),
    #[error("n = {n} exceeds the cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("p = {0} is not supported here")]
    BadP(f64),
    #[error("k = {k} outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("invalid subpartition: {0}")]
    InvalidSubpartition(&'static str),
    #[error("closed form for {family:?} does not accept n = {n}, p = {p}")]
    BadFamily { family: Family, n: usize, p: f64 },
}

fn ratio(g: &Graph, s: VertexSet) -> Rational {
    Rational::new(edge_boundary(g, s) as i64, volume(g, s) as i64)
}

/// h_k with the lexicographically smallest optimal family (sets compared by bitmask).
pub fn multiway_cheeger_family(g: &Graph, k: usize) -> Result<(Rational, Vec<VertexSet>), CheegerError> {
    let n = g.n();
    if n > MULTIWAY_CAP {
        return Err(CheegerError::CapExceeded { n, cap: MULTIWAY_CAP });
    }
    if k == 0 || k > n {
        return Err(CheegerError::BadK { k, n });
    }
    g.require_no_isolated()?;
    let mut sets: Vec<(Rational, VertexSet)> = (1u32..1 << n).map(|m| (ratio(g, VertexSet(m)), VertexSet(m))).collect();
    sets.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut levels: Vec<Rational> = sets.iter().map(|(r, _)| r.clone()).collect();
    levels.dedup();
    for t in levels {
        let mut avail: Vec<VertexSet> = sets.iter().take_while(|(r, _)| *r <= t).map(|&(_, s)| s).collect();
        avail.sort();
        let mut chosen = Vec::new();
        if pack(&avail, 0, VertexSet::EMPTY, k, &mut chosen) {
            return Ok((t, chosen));
        }
    }
    unreachable!("singletons always pack")
}

/// Depth-first search for k pairwise-disjoint sets from `avail[from..]`.
fn pack(avail: &[VertexSet], from: usize, used: VertexSet, k: usize, chosen: &mut Vec<VertexSet>) -> bool {
    if chosen.len() == k {
        return true;
    }
    for i in from..avail.len() {
        let s = avail[i];
        if s.is_disjoint(used) {
            chosen.push(s);
            if pack(avail, i + 1, used.union(s), k, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// min over k pairwise-disjoint nonempty sets of max_i |∂A_i|/vol(A_i).
pub fn multiway_cheeger(g: &Graph, k: usize) -> Result<Rational, CheegerError> {
    multiway_cheeger_family(g, k).map(|(h, _)| h)
}

/// λ_k(Δ_1) = ĥ_k for k = 1..=n from the Yang-index filtration of K_n.
pub fn minmax_lambda_delta1(g: &Graph) -> Result<Vec<Rational>, CheegerError> {
    g.require_no_isolated()?;
    let k = build_kn(g.n())?;
    let s = SymmetricStructure::detect(&k);
    let values = vertex_values(g, &k)?;
    let t = yang_thresholds(&k, &s, &values)?;
    Ok(t.into_iter().map(|v| v.expect("K_n has Yang index n")).collect())
}

/// λ_k(Δ_1) for a single k.
pub fn minmax_lambda_delta1_k(g: &Graph, k: usize) -> Result<Rational, CheegerError> {
    if k == 0 || k > g.n() {
        return Err(CheegerError::BadK { k, n: g.n() });
    }
    Ok(minmax_lambda_delta1(g)?.swap_remove(k - 1))
}

/// Pairwise-disjoint nonempty cliques.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subpartition {
    blocks: Vec<VertexSet>,
}

impl Subpartition {
    pub fn new(g: &Graph, blocks: Vec<VertexSet>) -> Result<Self, CheegerError> {
        let mut used = VertexSet::EMPTY;
        for &b in &blocks {
            if b.is_empty() {
                return Err(CheegerError::InvalidSubpartition("empty block"));
            }
            if !b.is_subset(g.vertices()) {
                return Err(CheegerError::InvalidSubpartition("vertex out of range"));
            }
            if !b.is_disjoint(used) {
                return Err(CheegerError::InvalidSubpartition("blocks overlap"));
            }
            if !g.is_clique(b) {
                return Err(CheegerError::InvalidSubpartition("block is not a clique"));
            }
            used = used.union(b);
        }
        Ok(Subpartition { blocks })
    }

    pub fn blocks(&self) -> &[VertexSet] {
        &self.blocks
    }

    /// Σ c(V_i) with c = 1 for blocks of size ≤ 2 and 2 otherwise.
    pub fn c_value(&self) -> usize {
        self.blocks.iter().map(|b| block_c(*b)).sum()
    }
}

fn block_c(b: VertexSet) -> usize {
    if b.len() <= 2 {
        1
    } else {
        2
    }
}

/// (h_*(P), c(P)): min |∂A|/vol(A) over nonempty A meeting each block at most once.
pub fn hstar(g: &Graph, p: &Subpartition) -> Result<(Rational, usize), CheegerError> {
    g.require_no_isolated()?;
    let mut best: Option<Rational> = None;
    let mut stack = vec![(0usize, VertexSet::EMPTY)];
    while let Some((i, a)) = stack.pop() {
        if i == p.blocks.len() {
            if !a.is_empty() {
                let r = ratio(g, a);
                if best.as_ref().is_none_or(|b| r < *b) {
                    best = Some(r);
                }
            }
            continue;
        }
        stack.push((i + 1, a));
        stack.extend(p.blocks[i].iter().map(|v| (i + 1, a.union(VertexSet::singleton(v)))));
    }
    let h = best.ok_or(CheegerError::InvalidSubpartition("no blocks"))?;
    Ok((h, p.c_value()))
}

/// Max c(P) over subpartitions into pairwise non-adjacent cliques, with an optimal P.
pub fn pseudo_independence_witness(g: &Graph) -> Result<(usize, Vec<VertexSet>), CheegerError> {
    let n = g.n();
    if n > PSEUDO_INDEPENDENCE_CAP {
        return Err(CheegerError::CapExceeded {
            n,
            cap: PSEUDO_INDEPENDENCE_CAP,
        });
    }
    let cliques: Vec<VertexSet> = (1u32..1 << n).map(VertexSet).filter(|&s| g.is_clique(s)).collect();
    let mut best = (0, Vec::new());
    search_pi(g, &cliques, 1, VertexSet::EMPTY, 0, &mut Vec::new(), &mut best);
    Ok(best)
}

fn search_pi(
    g: &Graph,
    cliques: &[VertexSet],
    v: usize,
    blocked: VertexSet,
    score: usize,
    chosen: &mut Vec<VertexSet>,
    best: &mut (usize, Vec<VertexSet>),
) {
    if score > best.0 {
        *best = (score, chosen.clone());
    }
    let free = (v..=g.n()).filter(|&u| !blocked.contains(u)).count();
    // Every block contributes at most one per vertex.
    if score + free <= best.0 {
        return;
    }
    let Some(u) = (v..=g.n()).find(|&u| !blocked.contains(u)) else {
        return;
    };
    for &c in cliques.iter().filter(|c| c.contains(u) && c.is_disjoint(blocked)) {
        let closed = c.iter().fold(c, |acc, v| acc.union(g.neighbors(v)));
        chosen.push(c);
        search_pi(g, cliques, u + 1, blocked.union(closed), score + block_c(c), chosen, best);
        chosen.pop();
    }
    search_pi(g, cliques, u + 1, blocked.union(VertexSet::singleton(u)), score, chosen, best);
}

/// α_*(G).
pub fn pseudo_independence(g: &Graph) -> Result<usize, CheegerError> {
    pseudo_independence_witness(g).map(|(c, _)| c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    Complete,
    Cycle,
    Path6,
}

/// The eigenpair on K_n with value j^{1/(p−1)} on I = {1..i}, −i^{1/(p−1)} on
/// J = {i+1..i+j} and zero elsewhere.
pub fn complete_eigenpair(n: usize, i: usize, j: usize, p: f64) -> (f64, Vec<f64>) {
    assert!(i >= 1 && j >= 1 && i + j <= n && p > 1.0, "need i, j ≥ 1, i + j ≤ n, p > 1");
    let e = 1.0 / (p - 1.0);
    let (a, b) = ((j as f64).powf(e), (i as f64).powf(e));
    let x = (1..=n)
        .map(|v| {
            if v <= i {
                a
            } else if v <= i + j {
                -b
            } else {
                0.0
            }
        })
        .collect();
    let lambda = ((n - i - j) as f64 + (a + b).powf(p - 1.0)) / (n - 1) as f64;
    (lambda, x)
}

/// One closed-form value per unordered pair (i, j), i ≤ j, i + j ≤ n.
pub fn complete_pairs(n: usize, p: f64) -> Vec<((usize, usize), f64)> {
    (1..n)
        .flat_map(|i| (i..=n - i).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), complete_eigenpair(n, i, j, p).0))
        .collect()
}

/// Distinct values of the closed-form eigenvalue list on K_n, zero included.
/// Distinct pairs can coincide: at p = 3, (2, 2) and (1, 4) both give (n+4)/(n−1).
pub fn complete_closed_form(n: usize, p: f64) -> Vec<f64> {
    let mut v: Vec<f64> = std::iter::once(0.0).chain(complete_pairs(n, p).into_iter().map(|(_, l)| l)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v
}

/// Δ_1 spectrum of the n-cycle: {0} ∪ {1/i : 1 ≤ i ≤ ⌊n/2⌋}.
pub fn cycle_delta1(n: usize) -> Vec<Rational> {
    let mut v: Vec<Rational> = std::iter::once(Rational::zero())
        .chain((1..=n / 2).map(|i| Rational::new(1, i as i64)))
        .collect();
    v.sort();
    v
}

/// Δ_1 spectrum of P_6.
pub fn path6_delta1() -> Vec<Rational> {
    [(0, 1), (1, 5), (1, 3), (1, 2), (1, 1)].iter().map(|&(a, b)| Rational::new(a, b)).collect()
}

/// Closed-form spectra as floats, sorted and distinct.
pub fn closed_form_spectra(family: Family, n: usize, p: f64) -> Result<Vec<f64>, CheegerError> {
    let bad = || CheegerError::BadFamily { family, n, p };
    match family {
        Family::Complete if n >= 2 && p > 1.0 => Ok(complete_closed_form(n, p)),
        Family::Cycle if n >= 3 && p == 1.0 => Ok(cycle_delta1(n).iter().map(Rational::to_f64).collect()),
        Family::Path6 if n == 6 && p == 1.0 => Ok(path6_delta1().iter().map(Rational::to_f64).collect()),
        _ => Err(bad()),
    }
}

/// The spectral-gap interval for p: (lo, hi, closed). Closed only at p = 2.
pub fn combina_interval(p: f64) -> (f64, f64, bool) {
    if p < 2.0 {
        (2f64.powf(p - 3.0), 2f64.powf(p - 1.0) * (3f64.sqrt() / p).powf(p), false)
    } else if p == 2.0 {
        (0.5, 1.5, true)
    } else {
        (2f64.powf(p - 1.0) / p.powf(p), 3.0 * 2f64.powf(p - 3.0), false)
    }
}

/// min_k |λ_k(Δ_2) − 1| ≤ 1/2, decided exactly.
pub fn jmz_gap_holds(g: &Graph) -> Result<bool, CheegerError> {
    Ok(p2_eigenvalue_in(g, &Rational::new(1, 2), &Rational::new(3, 2))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowStatus {
    Pass,
    Fail,
    NotCheckable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Arrow {
    pub name: String,
    /// Claimed lhs ≤ rhs.
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub exact: bool,
    pub status: ArrowStatus,
}

impl Arrow {
    fn float(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Arrow {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            exact: false,
            status: if lhs <= rhs + ARROW_SLACK * rhs.abs().max(1.0) {
                ArrowStatus::Pass
            } else {
                ArrowStatus::Fail
            },
        }
    }

    fn exact(name: impl Into<String>, lhs: &Rational, rhs: &Rational) -> Self {
        Arrow {
            name: name.into(),
            lhs: Some(lhs.to_f64()),
            rhs: Some(rhs.to_f64()),
            exact: true,
            status: if lhs <= rhs { ArrowStatus::Pass } else { ArrowStatus::Fail },
        }
    }

    fn skipped(name: impl Into<String>) -> Self {
        Arrow {
            name: name.into(),
            lhs: None,
            rhs: None,
            exact: false,
            status: ArrowStatus::NotCheckable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramRow {
    pub k: usize,
    pub h_k: Rational,
    pub hhat_k: Rational,
    pub lambda_k_delta1: Rational,
    /// λ_k(Δ_p) used for the arrows.
    pub lambda_k: f64,
    /// h_k / ĥ_k, absent when ĥ_k = 0.
    pub ratio: Option<f64>,
    pub arrows: Vec<Arrow>,
}

impl DiagramRow {
    pub fn passed(&self) -> bool {
        self.arrows.iter().all(|a| a.status != ArrowStatus::Fail)
    }
}

/// Per-graph data shared by all diagram rows.
#[derive(Clone, Debug)]
pub struct CheegerData {
    pub h: Vec<Rational>,
    pub hhat: Vec<Rational>,
    /// Δ_1 eigenvalues with the strong nodal count of their witness.
    pub delta1_nodal: Vec<(Rational, usize)>,
    /// Δ_2 eigenvalues with the strong nodal count of their eigenvector.
    pub p2_nodal: Vec<(f64, usize)>,
}

impl CheegerData {
    pub fn new(g: &Graph) -> Result<Self, CheegerError> {
        let n = g.n();
        let h = (1..=n).map(|k| multiway_cheeger(g, k)).collect::<Result<_, _>>()?;
        let hhat = minmax_lambda_delta1(g)?;
        let delta1_nodal = enumerate_delta1_spectrum(g)?
            .into_iter()
            .map(|e| {
                let x: Vec<f64> = e.witness.to_vector(n).iter().map(|&v| f64::from(v)).collect();
                Ok((e.lambda, strong_nodal_count(g, &x)?))
            })
            .collect::<Result<_, GraphError>>()?;
        let p2_nodal = eigenpairs_p2(g)?
            .into_iter()
            .map(|(mu, x)| {
                let y: Vec<f64> = x.iter().map(|&v| if v.abs() < NODAL_ZERO { 0.0 } else { v }).collect();
                Ok((mu, strong_nodal_count(g, &y)?))
            })
            .collect::<Result<_, GraphError>>()?;
        Ok(CheegerData {
            h,
            hhat,
            delta1_nodal,
            p2_nodal,
        })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }
}

/// Checks the diagram arrows at index k for p ∈ {1, 2}. `lambda_p` overrides
/// λ_k(Δ_p) for other p; those rows carry only float arrows.
pub fn inequality_diagram_row(
    data: &CheegerData,
    k: usize,
    p: f64,
    lambda_p: Option<f64>,
) -> Result<DiagramRow, CheegerError> {
    let n = data.n();
    if k == 0 || k > n {
        return Err(CheegerError::BadK { k, n });
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(CheegerError::BadP(p));
    }
    let (h, hh) = (&data.h[k - 1], &data.hhat[k - 1]);
    let cp = 2f64.powf(p - 1.0) / p.powf(p);
    let mut arrows = vec![Arrow::exact("hhat_k <= h_k", hh, h)];
    let lambda = if p == 1.0 {
        arrows.push(Arrow::exact("hhat_k <= lambda_k(Delta_1)", hh, hh));
        for (mu, m) in data.delta1_nodal.iter().filter(|(mu, _)| mu <= hh) {
            arrows.push(Arrow::exact(
                format!("h_{m} <= lambda_k (nodal, eigenvalue {mu})"),
                &data.h[m - 1],
                hh,
            ));
        }
        hh.to_f64()
    } else {
        let l = match lambda_p {
            Some(l) => l,
            None if p == 2.0 => data.p2_nodal[k - 1].0,
            None => return Err(CheegerError::BadP(p)),
        };
        let hf = hh.to_f64();
        arrows.push(Arrow::float("2^(p-1)/p^p hhat_k^p <= lambda_k", cp * hf.powf(p), l));
        arrows.push(Arrow::float("lambda_k <= 2^(p-1) hhat_k", l, 2f64.powf(p - 1.0) * hf));
        if p == 2.0 && lambda_p.is_none() {
            for (mu, m) in data.p2_nodal.iter().filter(|(mu, _)| *mu <= l + ARROW_SLACK) {
                arrows.push(Arrow::float(
                    format!("2^(p-1)/p^p h_{m}^p <= lambda_k (nodal, eigenvalue {mu:.6})"),
                    cp * data.h[m - 1].to_f64().powf(p),
                    l,
                ));
            }
        }
        l
    };
    arrows.push(Arrow::skipped("h_k^2/(C k^4) <= hhat_k"));
    if p > 1.0 {
        arrows.push(Arrow::skipped("h_k^p/(C_p k^(2p)) <= lambda_k"));
    }
    Ok(DiagramRow {
        k,
        h_k: h.clone(),
        hhat_k: hh.clone(),
        lambda_k_delta1: hh.clone(),
        lambda_k: lambda,
        ratio: (!hh.is_zero()).then(|| h.to_f64() / hh.to_f64()),
        arrows,
    })
}

/// All rows k = 1..=n for p ∈ {1, 2}.
pub fn inequality_diagram(g: &Graph, p: f64) -> Result<Vec<DiagramRow>, CheegerError> {
    let data = CheegerData::new(g)?;
    (1..=data.n()).map(|k| inequality_diagram_row(&data, k, p, None)).collect()
}

/// Single row at index k.
pub fn inequality_diagram_check(g: &Graph, k: usize, p: f64) -> Result<DiagramRow, CheegerError> {
    inequality_diagram_row(&CheegerData::new(g)?, k, p, None)
}

/// The JSON report keyed by k.
pub fn diagram_report(rows: &[DiagramRow]) -> Value {
    let mut m = Map::new();
    for r in rows {
        m.insert(
            r.k.to_string(),
            json!({
                "h_k": r.h_k,
                "hhat_k": r.hhat_k,
                "lambda_k_delta1": r.lambda_k_delta1,
                "lambda_k": r.lambda_k,
                "ratio_h_over_hhat": r.ratio,
                "arrows": r.arrows,
            }),
        );
    }
    Value::Object(m)
}
