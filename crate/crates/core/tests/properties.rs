use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use plap::cheeger::{
    minmax_lambda_delta1, multiway_cheeger, pseudo_independence, CheegerData,
};
use plap::complex::{betti_gf2, build_kn, yang_index, SymmetricStructure};
use plap::exactalg::{circulation_feasible, gf2_rank, CirculationProblem, GF2Matrix, Interval, Rational};
use plap::graph::{
    catalog, edge_boundary, f1_pair, random_connected, random_tree, rayleigh_fp, Graph, SetPair, VertexSet,
};
use plap::homological::{homological_spectrum, local_link_criterion};
use plap::one_lap::{
    enumerate_delta1_spectrum, is_critical_f1, pair_vector, simple_nodal_eigenvalue, simple_nodal_sets,
    verify_eigenpair,
};
use plap::p_solver::{
    apply_delta_p, continue_on_grid, eigen_residual, geometric_grid, p2_seeds, p_energy, semicontinuity_violations,
    spectrum_p2, MONOTONE_SLACK,
};

fn connected(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_connected(n, 0.4, &mut rng)
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, any::<u64>()).prop_map(|(n, s)| connected(n, s))
}

fn pair_strategy(n: usize) -> impl Strategy<Value = SetPair> {
    proptest::collection::vec(-1i8..=1, n)
        .prop_filter("nonzero", |v| v.iter().any(|&s| s != 0))
        .prop_map(|v| SetPair::from_signs(&v).unwrap())
}

/// dim ker by enumerating all vectors.
fn brute_nullity(m: &GF2Matrix) -> usize {
    let zero = (0u32..1 << m.cols())
        .filter(|&v| {
            (0..m.rows()).all(|r| (0..m.cols()).filter(|&c| v >> c & 1 == 1 && m.get(r, c)).count() % 2 == 0)
        })
        .count();
    zero.trailing_zeros() as usize
}

fn matrix_strategy() -> impl Strategy<Value = GF2Matrix> {
    (1usize..8, 1usize..10).prop_flat_map(|(r, c)| {
        proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
            GF2Matrix::from_entries(r, c, bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i / c, i % c)))
        })
    })
}

mod exactalg {
    use super::*;

    proptest! {
        #[test]
        fn rank_bounds_and_transpose(m in matrix_strategy()) {
            let r = gf2_rank(&m);
            prop_assert!(r <= m.rows().min(m.cols()));
            prop_assert_eq!(r, gf2_rank(&m.transpose()));
        }

        #[test]
        fn rank_nullity(m in matrix_strategy()) {
            prop_assert_eq!(gf2_rank(&m) + brute_nullity(&m), m.cols());
        }

        #[test]
        fn circulation_scaling_and_witness(
            arcs in proptest::collection::vec((0usize..4, 0usize..4, -3i64..3, 0i64..4), 1..8),
            bal in proptest::collection::vec((-3i64..3, 0i64..4), 4),
            t in 1i64..7,
        ) {
            let build = |s: &Rational| {
                let mut p = CirculationProblem::new(4);
                for &(a, b, lo, w) in &arcs {
                    p.add_arc(a, b, Interval::new(q(lo, 1), q(lo + w, 1)).scale(s));
                }
                for (i, &(lo, w)) in bal.iter().enumerate() {
                    p.balances[i] = Interval::new(q(lo, 1), q(lo + w, 1)).scale(s);
                }
                p
            };
            let base = build(&Rational::one());
            let scaled = build(&q(t, 3));
            let a = circulation_feasible(&base).unwrap();
            let b = circulation_feasible(&scaled).unwrap();
            prop_assert_eq!(a.is_feasible(), b.is_feasible());
            if let Some(w) = a.witness() {
                prop_assert!(base.check(w));
            }
            if let Some(w) = b.witness() {
                prop_assert!(scaled.check(w));
            }
        }
    }
}

mod graph_core {
    use super::*;

    proptest! {
        #[test]
        fn boundary_of_complement(g in graph_strategy(8), mask in any::<u32>()) {
            let a = VertexSet(mask).intersection(g.vertices());
            prop_assert_eq!(edge_boundary(&g, a), edge_boundary(&g, g.vertices().minus(a)));
        }

        #[test]
        fn f1_even(g in graph_strategy(7), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let signs: Vec<i8> = (0..g.n()).map(|_| rand::Rng::gen_range(&mut rng, -1i8..=1)).collect();
            prop_assume!(signs.iter().any(|&s| s != 0));
            let s = SetPair::from_signs(&signs).unwrap();
            prop_assert_eq!(f1_pair(&g, s).unwrap(), f1_pair(&g, s.antipode()).unwrap());
            let x: Vec<f64> = signs.iter().map(|&v| f64::from(v)).collect();
            let r = rayleigh_fp(&g, &x, 1.0).unwrap();
            prop_assert!((r - f1_pair(&g, s).unwrap().to_f64()).abs() < 1e-12);
        }

        #[test]
        fn rayleigh_range(g in graph_strategy(8), x in proptest::collection::vec(-1.0f64..1.0, 8), p in 1.0f64..5.0) {
            let x = &x[..g.n()];
            prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
            let r = rayleigh_fp(&g, x, p).unwrap();
            prop_assert!(r >= 0.0 && r <= 2f64.powf(p - 1.0) * (1.0 + 1e-12));
        }
    }
}

mod complex_k {
    use super::*;

    #[test]
    fn boundary_squares_to_zero() {
        for n in 1..=3 {
            let k = build_kn(n).unwrap();
            for q in 1..k.counts().len() - 1 {
                assert!(k.boundary_matrix(q).mul(&k.boundary_matrix(q + 1)).is_zero(), "n = {n}, q = {q}");
            }
        }
    }

    #[test]
    fn antipode_is_free() {
        for n in 1..=5 {
            assert!(SymmetricStructure::detect(&build_kn(n).unwrap()).is_free());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn index_monotone_under_inclusion(small in any::<u32>(), extra in any::<u32>()) {
            let k = build_kn(3).unwrap();
            let k = &k;
            let pick = |mask: u32| {
                move |v: SetPair| {
                    let i = k.vertex_index(v).unwrap();
                    let j = k.vertex_index(v.antipode()).unwrap();
                    mask >> (i.min(j) % 32) & 1 == 1
                }
            };
            let s = k.induced_subcomplex(pick(small));
            let t = k.induced_subcomplex(pick(small | extra));
            let ys = yang_index(&s, &SymmetricStructure::detect(&s)).index;
            let yt = yang_index(&t, &SymmetricStructure::detect(&t)).index;
            prop_assert!(ys <= yt);
        }

        #[test]
        fn euler_matches_betti(mask in any::<u64>()) {
            let k = build_kn(3).unwrap();
            let s = k.induced_subcomplex(|v| mask >> (k.vertex_index(v).unwrap() % 64) & 1 == 1);
            let b: i64 = betti_gf2(&s).iter().enumerate().map(|(q, &b)| if q % 2 == 0 { b as i64 } else { -(b as i64) }).sum();
            prop_assert_eq!(s.euler_characteristic(), b);
        }
    }
}

mod one_lap {
    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn spectrum_contains_ends_and_stays_in_unit_interval(g in graph_strategy(6)) {
            let spec = enumerate_delta1_spectrum(&g).unwrap();
            prop_assert_eq!(&spec[0].lambda, &Rational::zero());
            prop_assert_eq!(&spec.last().unwrap().lambda, &Rational::one());
            for e in &spec {
                prop_assert!(!e.lambda.is_negative() && e.lambda <= Rational::one());
                let cert = verify_eigenpair(&g, &e.lambda, &pair_vector(g.n(), e.witness)).unwrap();
                prop_assert!(cert.is_some_and(|c| c.revalidate(&g)));
            }
        }

        #[test]
        fn simple_nodal_sets_are_eigenvectors(g in graph_strategy(7)) {
            for (i, j) in simple_nodal_sets(&g) {
                let lam = simple_nodal_eigenvalue(&g, i, j);
                let want = Rational::one() - q(2, (g.degree(i) + g.degree(j)) as i64);
                prop_assert_eq!(&lam, &want);
                let x = pair_vector(g.n(), SetPair::new(VertexSet::from_vertices([i, j]), VertexSet::EMPTY).unwrap());
                prop_assert!(verify_eigenpair(&g, &lam, &x).unwrap().is_some());
            }
        }

        #[test]
        fn critical_points_are_eigenpairs(g in graph_strategy(5), s in pair_strategy(5)) {
            let x: Vec<Rational> = pair_vector(5, s)[..g.n()].to_vec();
            prop_assume!(x.iter().any(|v| !v.is_zero()));
            let c = is_critical_f1(&g, &x).unwrap();
            if c.is_critical() {
                prop_assert!(verify_eigenpair(&g, c.lambda(), &x).unwrap().is_some());
            }
        }
    }
}

mod homological {
    use super::*;

    fn graphs() -> Vec<Graph> {
        let mut v = vec![catalog::g6(), catalog::path(6), catalog::five(), catalog::fig5(), catalog::complete(5), catalog::cycle(6)];
        v.extend((0..4).map(|s| connected(5, s)));
        v
    }

    #[test]
    fn strict_and_closed_agree_between_thresholds() {
        for g in graphs() {
            let rep = homological_spectrum(&g).unwrap();
            for w in rep.thresholds.windows(2) {
                assert_eq!(w[0].closed_betti, w[1].strict_betti);
            }
        }
    }

    #[test]
    fn inclusion_chain() {
        for g in graphs() {
            let hom = homological_spectrum(&g).unwrap().spectrum();
            let all: Vec<Rational> = enumerate_delta1_spectrum(&g).unwrap().into_iter().map(|e| e.lambda).collect();
            assert!(hom.iter().all(|v| all.contains(v)), "homological value outside the spectrum");
            for v in minmax_lambda_delta1(&g).unwrap() {
                assert!(hom.contains(&v), "min-max value {v} not homological");
            }
        }
    }

    #[test]
    fn link_criterion_implies_homological() {
        for g in graphs().into_iter().take(6) {
            let hom = homological_spectrum(&g).unwrap().spectrum();
            for mask in 1u32..1 << g.n() {
                if let Ok(v) = local_link_criterion(&g, VertexSet(mask)) {
                    if v.holds() {
                        let plap::homological::LinkVerdict::Applicable { lambda, .. } = v else { unreachable!() };
                        assert!(hom.contains(&lambda));
                    }
                }
            }
        }
    }
}

mod p_solver {
    use super::*;

    proptest! {
        #[test]
        fn zero_homogeneity(g in graph_strategy(7), x in proptest::collection::vec(-1.0f64..1.0, 7), t in prop_oneof![-5.0f64..-0.2, 0.2f64..5.0], p in 1.0f64..4.0) {
            let x = &x[..g.n()];
            prop_assume!(x.iter().any(|v| v.abs() > 1e-2));
            let y: Vec<f64> = x.iter().map(|v| t * v).collect();
            let (a, b) = (rayleigh_fp(&g, x, p).unwrap(), rayleigh_fp(&g, &y, p).unwrap());
            prop_assert!((a - b).abs() < 1e-10);
            let (ra, rb) = (eigen_residual(&g, 0.5, x, p).unwrap(), eigen_residual(&g, 0.5, &y, p).unwrap());
            prop_assert!((ra - rb).abs() < 1e-10);
        }

        #[test]
        fn gradient_matches_finite_differences(g in graph_strategy(7), x in proptest::collection::vec(-1.0f64..1.0, 7), p in 1.5f64..4.0, v in 0usize..7) {
            let x = &x[..g.n()];
            let v = v % g.n();
            let h = 1e-6;
            let f = |s: f64| {
                let mut y = x.to_vec();
                y[v] += s;
                p_energy(&g, &y, p)
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let d = apply_delta_p(&g, x, p)[v];
            prop_assert!((fd - d).abs() <= 1e-5 * (1.0 + d.abs()));
        }

        #[test]
        fn p2_spectrum_in_range(g in graph_strategy(8)) {
            let s = spectrum_p2(&g).unwrap();
            prop_assert!(s.iter().all(|&l| l > -1e-12 && l < 2.0 + 1e-12));
        }
    }

    #[test]
    fn branches_are_monotone_and_semicontinuous() {
        let grid = geometric_grid(2.0, 1.1, 40);
        for g in [catalog::g6(), catalog::path(6), catalog::five(), catalog::complete(4)] {
            let mut per_p: Vec<(f64, Vec<f64>)> = grid.iter().map(|&p| (p, Vec::new())).collect();
            for (k, seed) in p2_seeds(&g).unwrap().iter().enumerate() {
                let b = continue_on_grid(&g, seed, &grid, &format!("k{k}")).unwrap();
                for (s, slot) in b.samples.iter().zip(per_p.iter_mut()) {
                    slot.1.push(s.lambda);
                }
                for w in b.samples.windows(2).filter(|w| w[0].lambda > 1e-9) {
                    // The grid descends in p.
                    let rise = |s: &plap::p_solver::BranchSample| s.p * (2.0 * s.lambda).powf(1.0 / s.p);
                    let fall = |s: &plap::p_solver::BranchSample| 2f64.powf(-s.p) * s.lambda;
                    assert!(rise(&w[1]) <= rise(&w[0]) + MONOTONE_SLACK);
                    assert!(fall(&w[1]) >= fall(&w[0]) - MONOTONE_SLACK);
                }
            }
            assert!(semicontinuity_violations(&per_p).is_empty());
        }
    }
}

mod cheeger {
    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_in_k_and_ordered(g in graph_strategy(6)) {
            let d = CheegerData::new(&g).unwrap();
            prop_assert!(d.h.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(d.hhat.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(d.hhat.iter().zip(&d.h).all(|(a, b)| a <= b));
            prop_assert_eq!(&d.hhat[1], &d.h[1]);
            prop_assert!(d.hhat[0].is_zero());
            prop_assert_eq!(d.hhat.last().unwrap(), &Rational::one());
        }

        #[test]
        fn trailing_ones_from_pseudo_independence(g in graph_strategy(6)) {
            let a = pseudo_independence(&g).unwrap();
            let lam = minmax_lambda_delta1(&g).unwrap();
            prop_assert!(lam[g.n() - a..].iter().all(|v| *v == Rational::one()));
        }

        #[test]
        fn trees_have_lambda_equal_h(n in 2usize..=6, seed in any::<u64>()) {
            let t = random_tree(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let lam = minmax_lambda_delta1(&t).unwrap();
            for k in 1..=n {
                prop_assert_eq!(&lam[k - 1], &multiway_cheeger(&t, k).unwrap());
            }
        }
    }

    #[test]
    fn catalog_pseudo_independence() {
        for g in [catalog::g6(), catalog::path(6), catalog::five(), catalog::fig5(), catalog::complete(5), catalog::cycle(6)] {
            let a = pseudo_independence(&g).unwrap();
            let lam = minmax_lambda_delta1(&g).unwrap();
            assert!(lam[g.n() - a..].iter().all(|v| *v == Rational::one()));
        }
    }
}
