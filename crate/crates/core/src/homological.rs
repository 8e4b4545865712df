//! Homological eigenvalues of Δ_1 from the sublevel filtration of K_n by F_1.

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::complex::{
    build_kn, kn_link_vertices, reduced_betti_gf2, sublevel_betti, ComplexError, OrderComplex, SublevelBetti,
};
use crate::exactalg::Rational;
use crate::graph::{f1_pair, Graph, GraphError, SetPair, VertexSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("vertex set must be nonempty")]
    EmptySet,
}

/// K_n with the F_1 value of every vertex and the closed-sublevel Betti numbers.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub complex: OrderComplex,
    pub values: Vec<Rational>,
    pub sublevels: SublevelBetti,
}

impl Filtration {
    pub fn new(g: &Graph) -> Result<Self, HomologyError> {
        g.require_no_isolated()?;
        let complex = build_kn(g.n())?;
        let values = vertex_values(g, &complex)?;
        let sublevels = sublevel_betti(&complex, &values)?;
        Ok(Filtration {
            complex,
            values,
            sublevels,
        })
    }

    pub fn thresholds(&self) -> &[Rational] {
        &self.sublevels.thresholds
    }
}

/// F_1 at every vertex of `k`.
pub fn vertex_values(g: &Graph, k: &OrderComplex) -> Result<Vec<Rational>, GraphError> {
    k.vertices().iter().map(|&v| f1_pair(g, v)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdReport {
    pub lambda: Rational,
    pub strict_betti: Vec<usize>,
    pub closed_betti: Vec<usize>,
    pub homological: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologicalReport {
    pub thresholds: Vec<ThresholdReport>,
}

impl HomologicalReport {
    /// The thresholds at which the Betti vector changes.
    pub fn spectrum(&self) -> Vec<Rational> {
        self.thresholds
            .iter()
            .filter(|t| t.homological)
            .map(|t| t.lambda.clone())
            .collect()
    }

    /// {"num/den": {strict_betti, closed_betti, homological}} in ascending order.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for t in &self.thresholds {
            m.insert(
                t.lambda.to_string(),
                json!({
                    "strict_betti": t.strict_betti,
                    "closed_betti": t.closed_betti,
                    "homological": t.homological,
                }),
            );
        }
        Value::Object(m)
    }
}

impl From<&Filtration> for HomologicalReport {
    fn from(f: &Filtration) -> Self {
        let sb = &f.sublevels;
        let thresholds = sb
            .thresholds
            .iter()
            .enumerate()
            .map(|(t, lambda)| {
                let strict_betti = sb.strict(t);
                let closed_betti = sb.betti[t].clone();
                ThresholdReport {
                    lambda: lambda.clone(),
                    homological: strict_betti != closed_betti,
                    strict_betti,
                    closed_betti,
                }
            })
            .collect();
        HomologicalReport { thresholds }
    }
}

/// Compares the Betti vectors of strict and closed sublevel subcomplexes at
/// every distinct vertex value.
pub fn homological_spectrum(g: &Graph) -> Result<HomologicalReport, HomologyError> {
    Ok(HomologicalReport::from(&Filtration::new(g)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum LinkVerdict {
    /// Some link vertex has F_1 equal to λ.
    Inapplicable { lambda: Rational, ties: Vec<SetPair> },
    Applicable {
        lambda: Rational,
        /// Reduced homology of the strict-sublevel link is nonzero.
        holds: bool,
        reduced_betti: Vec<usize>,
        components: usize,
    },
}

impl LinkVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, LinkVerdict::Applicable { holds: true, .. })
    }
}

/// Local test at the vertex 1_A: no link vertex ties λ = F_1(1_A), and the
/// part of the link strictly below λ has nonzero reduced homology.
pub fn local_link_criterion(g: &Graph, a: VertexSet) -> Result<LinkVerdict, HomologyError> {
    if a.is_empty() {
        return Err(HomologyError::EmptySet);
    }
    if g.n() > crate::complex::DEFAULT_CAP {
        return Err(ComplexError::CapExceeded {
            n: g.n(),
            cap: crate::complex::DEFAULT_CAP,
        }
        .into());
    }
    g.require_no_isolated()?;
    let v = SetPair::new(a, VertexSet::EMPTY)?;
    let lambda = f1_pair(g, v)?;
    let mut ties = Vec::new();
    let mut below = Vec::new();
    for w in kn_link_vertices(g.n(), v) {
        let val = f1_pair(g, w)?;
        if val == lambda {
            ties.push(w);
        } else if val < lambda {
            below.push(w);
        }
    }
    if !ties.is_empty() {
        return Ok(LinkVerdict::Inapplicable { lambda, ties });
    }
    let sub = OrderComplex::from_poset(g.n(), below);
    let reduced_betti = reduced_betti_gf2(&sub);
    let components = if sub.is_empty() { 0 } else { reduced_betti[0] + 1 };
    Ok(LinkVerdict::Applicable {
        lambda,
        holds: reduced_betti.iter().any(|&b| b > 0),
        reduced_betti,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::betti_gf2;
    use crate::graph::catalog::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn p6_homological_spectrum() {
        let rep = homological_spectrum(&path(6)).unwrap();
        assert_eq!(rep.spectrum(), vec![r(0, 1), r(1, 5), r(1, 2), r(1, 1)]);
    }

    #[test]
    fn five_vertex_half_is_not_homological() {
        let rep = homological_spectrum(&five()).unwrap();
        assert!(!rep.spectrum().contains(&r(1, 2)));
    }

    #[test]
    fn filtration_matches_direct_induced_betti() {
        for g in [path(4), cycle(4), complete(4), Graph::new(4, &[(1, 2), (2, 3), (3, 4), (1, 3)]).unwrap()] {
            let f = Filtration::new(&g).unwrap();
            for (t, c) in f.thresholds().iter().enumerate() {
                let sub = f.complex.induced_subcomplex(|v| f1_pair(&g, v).unwrap() <= *c);
                let mut direct = betti_gf2(&sub);
                direct.resize(4, 0);
                assert_eq!(f.sublevels.betti[t], direct, "{g:?} at {c}");
            }
            let last = f.sublevels.betti.last().unwrap();
            assert_eq!(last, &vec![1, 0, 0, 1]);
        }
    }

    #[test]
    fn full_set_link_is_empty() {
        let g = path(4);
        let v = local_link_criterion(&g, g.vertices()).unwrap();
        assert_eq!(
            v,
            LinkVerdict::Applicable {
                lambda: Rational::zero(),
                holds: false,
                reduced_betti: vec![],
                components: 0
            }
        );
    }

    #[test]
    fn json_keys_are_fractions() {
        let rep = homological_spectrum(&path(3)).unwrap();
        let j = rep.to_json();
        assert_eq!(j["0/1"]["homological"], Value::Bool(true));
        assert!(j.as_object().unwrap().keys().all(|k| k.contains('/')));
    }

    #[test]
    fn rejects_empty_set() {
        assert_eq!(local_link_criterion(&path(3), VertexSet::EMPTY), Err(HomologyError::EmptySet));
    }
}
