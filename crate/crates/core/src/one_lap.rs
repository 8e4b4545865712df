//! The 1-Laplacian: set-valued image, exact eigenpair certificates, vertex
//! search for the spectrum and the F_1 criticality game.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::all_set_pairs;
use crate::exactalg::{circulation_feasible, CirculationProblem, Interval, Rational};
use crate::graph::{f1_pair, Graph, GraphError, SetPair, VertexSet};

/// Largest n accepted by [`enumerate_delta1_spectrum`] (3^n − 1 candidates).
pub const ENUM_CAP: usize = 12;
/// Seed of the pseudo-random directions used by [`is_critical_f1`].
pub const CRITICALITY_SEED: u64 = 0x1F2E_3D4C;
/// Number of pseudo-random directions used by [`is_critical_f1`].
pub const RANDOM_DIRECTIONS: usize = 64;
/// Largest number of ξ patterns enumerated for one zero group.
pub const PATTERN_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OneLapError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("n = {n} exceeds the cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("{count} zero coordinates give more than {PATTERN_CAP} sign/order patterns")]
    PatternOverflow { count: usize },
}

/// Minkowski sum of a point and segments [e_i − e_j, e_j − e_i].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Zonotope {
    /// Σ over untied edges of (e_i − e_j), oriented from larger to smaller value.
    pub center_offset: Vec<i64>,
    /// One tied edge (i, j), i < j, per segment generator.
    pub generators: Vec<(usize, usize)>,
}

impl Zonotope {
    /// The generators are centrally symmetric, so the center is the offset.
    pub fn center(&self) -> &[i64] {
        &self.center_offset
    }

    pub fn generator_vectors(&self) -> Vec<Vec<i64>> {
        let n = self.center_offset.len();
        self.generators
            .iter()
            .map(|&(i, j)| {
                let mut v = vec![0; n];
                v[i - 1] = 1;
                v[j - 1] = -1;
                v
            })
            .collect()
    }
}

/// Image of x under Δ_1.
pub fn delta1_image<T: PartialOrd>(g: &Graph, x: &[T]) -> Result<Zonotope, GraphError> {
    if x.len() != g.n() {
        return Err(GraphError::LengthMismatch { got: x.len(), n: g.n() });
    }
    let mut center_offset = vec![0i64; g.n()];
    let mut generators = Vec::new();
    for &(i, j) in g.edges() {
        let (a, b) = (&x[i - 1], &x[j - 1]);
        if a > b {
            center_offset[i - 1] += 1;
            center_offset[j - 1] -= 1;
        } else if a < b {
            center_offset[i - 1] -= 1;
            center_offset[j - 1] += 1;
        } else {
            generators.push((i, j));
        }
    }
    Ok(Zonotope {
        center_offset,
        generators,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexSlack {
    pub vertex: usize,
    /// Σ_j z_ij.
    pub flow: Rational,
    /// λ·deg(i)·Sgn(x_i).
    pub allowed: Interval,
}

/// Exact witness that (λ, x) is a Δ_1 eigenpair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenCertificate {
    pub lambda: Rational,
    pub x: Vec<Rational>,
    /// z_ij for every edge (i, j), i < j; z_ji = −z_ij.
    pub witness: Vec<((usize, usize), Rational)>,
    pub slack: Vec<VertexSlack>,
}

fn sgn_interval(v: &Rational) -> Interval {
    match v.signum() {
        1 => Interval::point(Rational::one()),
        -1 => Interval::point(-Rational::one()),
        _ => Interval::new(-Rational::one(), Rational::one()),
    }
}

impl EigenCertificate {
    /// Re-checks the witness by direct substitution.
    pub fn revalidate(&self, g: &Graph) -> bool {
        if self.x.len() != g.n() || self.witness.len() != g.edges().len() {
            return false;
        }
        let mut sum = vec![Rational::zero(); g.n()];
        for (&(i, j), ((a, b), z)) in g.edges().iter().zip(&self.witness) {
            if (i, j) != (*a, *b) || !sgn_interval(&(&self.x[i - 1] - &self.x[j - 1])).contains(z) {
                return false;
            }
            sum[i - 1] += z;
            sum[j - 1] -= z;
        }
        (1..=g.n()).all(|v| {
            let deg = Rational::from_int(g.degree(v) as i64);
            sgn_interval(&self.x[v - 1]).scale(&(&self.lambda * &deg)).contains(&sum[v - 1])
        })
    }
}

fn check_vector(g: &Graph, x: &[Rational]) -> Result<(), GraphError> {
    if x.len() != g.n() {
        return Err(GraphError::LengthMismatch { got: x.len(), n: g.n() });
    }
    if x.iter().all(Rational::is_zero) {
        return Err(GraphError::ZeroVector);
    }
    Ok(())
}

/// Circulation encoding of the Δ_1 eigen-equation: one arc per edge carrying
/// z_ij, node balance λ·deg(i)·Sgn(x_i).
pub fn eigen_circulation(g: &Graph, lambda: &Rational, x: &[Rational]) -> CirculationProblem {
    let mut p = CirculationProblem::new(g.n());
    for &(i, j) in g.edges() {
        p.add_arc(i - 1, j - 1, sgn_interval(&(&x[i - 1] - &x[j - 1])));
    }
    for v in 1..=g.n() {
        let deg = Rational::from_int(g.degree(v) as i64);
        p.balances[v - 1] = sgn_interval(&x[v - 1]).scale(&(lambda * &deg));
    }
    p
}

/// Certifies (λ, x) exactly or returns `None` when no subgradient selection exists.
pub fn verify_eigenpair(g: &Graph, lambda: &Rational, x: &[Rational]) -> Result<Option<EigenCertificate>, GraphError> {
    check_vector(g, x)?;
    let p = eigen_circulation(g, lambda, x);
    let feas = circulation_feasible(&p).expect("encoding is well formed");
    let Some(flow) = feas.witness() else {
        return Ok(None);
    };
    let net = p.net_outflow(flow);
    let witness = g.edges().iter().copied().zip(flow.iter().cloned()).collect();
    let slack = net
        .into_iter()
        .zip(p.balances)
        .enumerate()
        .map(|(v, (flow, allowed))| VertexSlack {
            vertex: v + 1,
            flow,
            allowed,
        })
        .collect();
    Ok(Some(EigenCertificate {
        lambda: lambda.clone(),
        x: x.to_vec(),
        witness,
        slack,
    }))
}

/// x = 1_A − 1_B as rationals.
pub fn pair_vector(n: usize, s: SetPair) -> Vec<Rational> {
    s.to_vector(n).into_iter().map(|v| Rational::from_int(v as i64)).collect()
}

/// Edges {i,j} such that deleting both endpoints leaves no isolated vertex.
pub fn simple_nodal_sets(g: &Graph) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .copied()
        .filter(|&(i, j)| {
            let rest = g.vertices().minus(VertexSet::from_vertices([i, j]));
            rest.iter().all(|v| !g.neighbors(v).intersection(rest).is_empty())
        })
        .collect()
}

/// 1 − 2/(deg i + deg j), the eigenvalue carried by 1_{i,j} on a simple nodal set.
pub fn simple_nodal_eigenvalue(g: &Graph, i: usize, j: usize) -> Rational {
    Rational::one() - Rational::new(2, (g.degree(i) + g.degree(j)) as i64)
}

/// 2 + the number of distinct degree sums over simple nodal sets.
pub fn distinct_count_lower_bound(g: &Graph) -> usize {
    let sums: BTreeSet<usize> = simple_nodal_sets(g)
        .into_iter()
        .map(|(i, j)| g.degree(i) + g.degree(j))
        .collect();
    2 + sums.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumEntry {
    pub lambda: Rational,
    /// A vertex 1_A − 1_B of K_n certified as an eigenvector for `lambda`.
    pub witness: SetPair,
}

/// Certified Δ_1 eigenvalues among the vectors 1_A − 1_B, sorted.
///
/// Each candidate value F_1(1_A − 1_B) is kept when some candidate with that
/// value passes [`verify_eigenpair`]. The result is complete for this vector
/// family only.
pub fn enumerate_delta1_spectrum(g: &Graph) -> Result<Vec<SpectrumEntry>, OneLapError> {
    if g.n() > ENUM_CAP {
        return Err(OneLapError::CapExceeded { n: g.n(), cap: ENUM_CAP });
    }
    g.require_no_isolated()?;
    let mut cands: Vec<(Rational, SetPair)> = all_set_pairs(g.n())
        .into_iter()
        .map(|s| f1_pair(g, s).map(|v| (v, s)))
        .collect::<Result<_, _>>()?;
    cands.sort();
    let mut groups: Vec<&[(Rational, SetPair)]> = Vec::new();
    let mut start = 0;
    for i in 1..=cands.len() {
        if i == cands.len() || cands[i].0 != cands[start].0 {
            groups.push(&cands[start..i]);
            start = i;
        }
    }
    let n = g.n();
    let found: Vec<Option<SpectrumEntry>> = groups
        .par_iter()
        .map(|grp| {
            grp.iter().find_map(|(lambda, s)| {
                let x = pair_vector(n, *s);
                verify_eigenpair(g, lambda, &x)
                    .ok()
                    .flatten()
                    .map(|_| SpectrumEntry {
                        lambda: lambda.clone(),
                        witness: *s,
                    })
            })
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Exact F_1(x).
pub fn f1_exact(g: &Graph, x: &[Rational]) -> Result<Rational, GraphError> {
    check_vector(g, x)?;
    let num: Rational = g.edges().iter().map(|&(i, j)| (&x[i - 1] - &x[j - 1]).abs()).sum();
    let den: Rational = (1..=g.n())
        .map(|v| Rational::from_int(g.degree(v) as i64) * x[v - 1].abs())
        .sum();
    if den.is_zero() {
        return Err(GraphError::ZeroVolume);
    }
    Ok(num / den)
}

/// Best ξ pattern found for one direction y.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Strategy {
    pub y: Vec<Rational>,
    /// Rank of ξ_i among the zero coordinates of x, listed in vertex order,
    /// with the rank of 0 appended last.
    pub pattern: Vec<u8>,
    /// max over patterns of Φ − λΨ.
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Criticality {
    /// No direction of the search family has a negative game value.
    CriticalFamilyExhaustive { lambda: Rational, strategies: Vec<Strategy> },
    NotCritical { lambda: Rational, witness: Strategy },
}

impl Criticality {
    pub fn is_critical(&self) -> bool {
        matches!(self, Criticality::CriticalFamilyExhaustive { .. })
    }

    pub fn lambda(&self) -> &Rational {
        match self {
            Criticality::CriticalFamilyExhaustive { lambda, .. } | Criticality::NotCritical { lambda, .. } => lambda,
        }
    }
}

/// All total preorders on m labelled items as rank vectors (ranks 0..blocks).
pub fn total_preorders(m: usize, cap: usize) -> Option<Vec<Vec<u8>>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; m];
    // Assign each item a block id; valid when the used ids form 0..k.
    fn rec(i: usize, used: u32, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>, cap: usize) -> bool {
        let m = cur.len();
        if i == m {
            let k = used.count_ones();
            if used == (1u32 << k) - 1 {
                if out.len() >= cap {
                    return false;
                }
                out.push(cur.clone());
            }
            return true;
        }
        for b in 0..m as u8 {
            cur[i] = b;
            if !rec(i + 1, used | 1 << b, cur, out, cap) {
                return false;
            }
        }
        true
    }
    if m == 0 {
        return Some(vec![Vec::new()]);
    }
    if m > 10 || !rec(0, 0, &mut cur, &mut out, cap) {
        return None;
    }
    Some(out)
}

fn sign_of(a: u8, b: u8) -> i32 {
    (a as i32 - b as i32).signum()
}

/// The search family: ±e_i, ±e_i ± e_j, then seeded random rational vectors.
pub fn criticality_directions(n: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    let unit = |i: usize, s: i64, v: &mut Vec<Rational>| v[i] = Rational::from_int(s);
    for i in 0..n {
        for s in [1, -1] {
            let mut v = vec![Rational::zero(); n];
            unit(i, s, &mut v);
            out.push(v);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(1, -1), (-1, 1), (1, 1), (-1, -1)] {
                let mut v = vec![Rational::zero(); n];
                unit(i, si, &mut v);
                unit(j, sj, &mut v);
                out.push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CRITICALITY_SEED);
    for _ in 0..RANDOM_DIRECTIONS {
        out.push(
            (0..n)
                .map(|_| Rational::new(rng.gen_range(-20..=20), rng.gen_range(1..=10)))
                .collect(),
        );
    }
    out
}

/// Decides criticality of F_1 at x over the direction family.
///
/// For each y the game value max_ξ (Φ − λΨ) is computed exactly. Patterns ξ
/// only matter through ties: on a nonzero level set the all-tied choice
/// maximizes every edge term at once, so only the zero level set is
/// enumerated, as total preorders of its coordinates together with 0.
pub fn is_critical_f1(g: &Graph, x: &[Rational]) -> Result<Criticality, OneLapError> {
    let lambda = f1_exact(g, x)?;
    let n = g.n();
    let zeros: Vec<usize> = (0..n).filter(|&i| x[i].is_zero()).collect();
    let mut zpos = vec![usize::MAX; n];
    for (k, &i) in zeros.iter().enumerate() {
        zpos[i] = k;
    }
    let patterns = total_preorders(zeros.len() + 1, PATTERN_CAP).ok_or(OneLapError::PatternOverflow { count: zeros.len() })?;
    let zero_marker = zeros.len();
    let deg = |i: usize| Rational::from_int(g.degree(i + 1) as i64);

    let evaluate = |y: &[Rational]| -> Strategy {
        // Pattern-independent part.
        let mut fixed = Rational::zero();
        let mut zero_edges = Vec::new();
        for &(i, j) in g.edges() {
            let (i, j) = (i - 1, j - 1);
            let dy = &y[i] - &y[j];
            match x[i].cmp(&x[j]) {
                std::cmp::Ordering::Greater => fixed += dy,
                std::cmp::Ordering::Less => fixed -= dy,
                std::cmp::Ordering::Equal if !x[i].is_zero() => fixed += dy.abs(),
                std::cmp::Ordering::Equal => zero_edges.push((zpos[i], zpos[j], dy)),
            }
        }
        for i in 0..n {
            match x[i].signum() {
                1 => fixed -= &lambda * &deg(i) * &y[i],
                -1 => fixed += &lambda * &deg(i) * &y[i],
                _ => {}
            }
        }
        let weights: Vec<(usize, Rational, Rational)> = zeros
            .iter()
            .enumerate()
            .map(|(k, &i)| (k, &lambda * &deg(i), y[i].clone()))
            .collect();
        let mut best: Option<(Rational, usize)> = None;
        for (pi, pat) in patterns.iter().enumerate() {
            let mut v = Rational::zero();
            for (a, b, dy) in &zero_edges {
                match sign_of(pat[*a], pat[*b]) {
                    0 => v += dy.abs(),
                    1 => v += dy,
                    _ => v -= dy,
                }
            }
            for (k, w, yi) in &weights {
                match sign_of(pat[*k], pat[zero_marker]) {
                    0 => v -= w * &yi.abs(),
                    1 => v -= w * yi,
                    _ => v += w * yi,
                }
            }
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, pi));
            }
        }
        let (v, pi) = best.expect("at least one pattern");
        Strategy {
            y: y.to_vec(),
            pattern: patterns[pi].clone(),
            value: fixed + v,
        }
    };

    let strategies: Vec<Strategy> = criticality_directions(n).par_iter().map(|y| evaluate(y)).collect();
    let worst = strategies
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.cmp(&b.value).then(ia.cmp(ib)));
    if let Some((_, w)) = worst.filter(|(_, w)| w.value.is_negative()) {
        return Ok(Criticality::NotCritical {
            lambda,
            witness: w.clone(),
        });
    }
    Ok(Criticality::CriticalFamilyExhaustive { lambda, strategies })
}
