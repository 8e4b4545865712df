//! Reproducibility checks grouped into suites, shared by the CLI and the C API.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cheeger::{
    combina_interval, complete_closed_form, complete_eigenpair, complete_pairs, cycle_delta1, inequality_diagram_row,
    jmz_gap_holds, minmax_lambda_delta1, multiway_cheeger, path6_delta1, CheegerData,
};
use crate::complex::{betti_gf2, build_kn, yang_index, SymmetricStructure};
use crate::exactalg::Rational;
use crate::graph::{catalog, random_connected, random_tree, Graph, VertexSet};
use crate::homological::{homological_spectrum, local_link_criterion, LinkVerdict};
use crate::one_lap::{enumerate_delta1_spectrum, is_critical_f1, Criticality};
use crate::p_solver::{
    apply_delta_p, eigen_residual, monotonicity_sweep, p_energy, power_mean_inequality_check, spectrum_p2,
    transport_inequality_check,
};

/// Default seed for the randomized checks.
pub const VERIFY_SEED: u64 = 0xACCE_0001;
/// Sample count of each property family.
pub const PROPERTY_SAMPLES: usize = 100_000;
/// Slack for the property families.
pub const PROPERTY_SLACK: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Exact,
    Homology,
    Numeric,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Suite::Exact),
            "homology" => Ok(Suite::Homology),
            "numeric" => Ok(Suite::Numeric),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?}")),
        }
    }
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// A value stated in the literature.
    Reference,
    /// A value computed by an independent method.
    Oracle,
    /// A value that holds by definition.
    Definition,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub suite: Suite,
    pub source: Source,
    pub expected: String,
    pub measured: String,
    pub passed: bool,
    pub elapsed_ms: u128,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} [{:?}] {}: measured {} / expected {} ({} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.source,
            self.name,
            self.measured,
            self.expected,
            self.elapsed_ms
        )
    }
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn show(v: &[Rational]) -> String {
    let s: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("{{{}}}", s.join(", "))
}

fn within(t: Duration, secs: u64) -> bool {
    t < Duration::from_secs(secs)
}

struct Check {
    id: u8,
    name: &'static str,
    suite: Suite,
    source: Source,
    run: fn(u64) -> (String, String, bool),
}

const CHECKS: &[Check] = &[
    Check { id: 1, name: "G6 1-Laplacian spectrum", suite: Suite::Exact, source: Source::Reference, run: c1 },
    Check { id: 2, name: "G6 min-max values", suite: Suite::Exact, source: Source::Reference, run: c2 },
    Check { id: 3, name: "G6 homological detection", suite: Suite::Homology, source: Source::Reference, run: c3 },
    Check { id: 4, name: "P6 spectra", suite: Suite::Homology, source: Source::Reference, run: c4 },
    Check { id: 5, name: "G6 p = 2 spectrum", suite: Suite::Numeric, source: Source::Reference, run: c5 },
    Check { id: 6, name: "complete graph closed forms", suite: Suite::Exact, source: Source::Reference, run: c6 },
    Check { id: 7, name: "cycle 1-Laplacian spectra", suite: Suite::Exact, source: Source::Reference, run: c7 },
    Check { id: 8, name: "monotonicity in p", suite: Suite::Numeric, source: Source::Reference, run: c8 },
    Check { id: 9, name: "property families", suite: Suite::Numeric, source: Source::Oracle, run: c9 },
    Check { id: 10, name: "fig5 criticality", suite: Suite::Exact, source: Source::Reference, run: c10 },
    Check { id: 11, name: "spectral gap near 1", suite: Suite::Exact, source: Source::Reference, run: c11 },
    Check { id: 12, name: "Cheeger sandwich", suite: Suite::Exact, source: Source::Reference, run: c12 },
];

/// Runs every check in `suite` with the given seed.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CriterionResult> {
    CHECKS
        .iter()
        .filter(|c| suite == Suite::All || c.suite == suite)
        .map(|c| {
            let t = Instant::now();
            let (expected, measured, passed) = (c.run)(seed);
            CriterionResult {
                id: c.id,
                name: c.name,
                suite: c.suite,
                source: c.source,
                expected,
                measured,
                passed,
                elapsed_ms: t.elapsed().as_millis(),
            }
        })
        .collect()
}

fn delta1_values(g: &Graph) -> Option<Vec<Rational>> {
    enumerate_delta1_spectrum(g).ok().map(|s| s.into_iter().map(|e| e.lambda).collect())
}

fn c1(_: u64) -> (String, String, bool) {
    let want = vec![q(0, 1), q(2, 5), q(5, 9), q(3, 5), q(2, 3), q(5, 7), q(3, 4), q(7, 9), q(1, 1)];
    let t = Instant::now();
    let got = delta1_values(&catalog::g6());
    let ok = got.as_ref() == Some(&want) && within(t.elapsed(), 10);
    (format!("{} in < 10 s", show(&want)), got.map_or("error".into(), |g| show(&g)), ok)
}

fn c2(_: u64) -> (String, String, bool) {
    let want = vec![q(0, 1), q(2, 5), q(5, 7), q(1, 1), q(1, 1), q(1, 1)];
    let got = minmax_lambda_delta1(&catalog::g6()).ok();
    let ok = got.as_ref() == Some(&want) && !want.contains(&q(5, 9));
    (show(&want), got.map_or("error".into(), |g| show(&g)), ok)
}

fn c3(_: u64) -> (String, String, bool) {
    let g = catalog::g6();
    let t = Instant::now();
    let Ok(rep) = homological_spectrum(&g) else {
        return ("homological spectrum".into(), "error".into(), false);
    };
    let spec = rep.spectrum();
    let has = [q(0, 1), q(2, 5), q(5, 9), q(5, 7), q(1, 1)].iter().all(|v| spec.contains(v));
    let link = local_link_criterion(&g, VertexSet::from_vertices([2, 5, 6]));
    let link_ok = matches!(link, Ok(LinkVerdict::Applicable { holds: true, components: 2, .. }));
    let ok = has && link_ok && within(t.elapsed(), 60);
    (
        "contains {0, 2/5, 5/9, 5/7, 1}; link of {2,5,6} holds with 2 components; < 60 s".into(),
        format!("{}; link {:?}", show(&spec), link.map(|l| l.holds())),
        ok,
    )
}

fn c4(_: u64) -> (String, String, bool) {
    let g = catalog::path(6);
    let t = Instant::now();
    let spec = delta1_values(&g);
    let hom = homological_spectrum(&g).map(|r| r.spectrum()).ok();
    let mm = minmax_lambda_delta1(&g).ok();
    let h: Option<Vec<Rational>> = (1..=6).map(|k| multiway_cheeger(&g, k).ok()).collect();
    let want_mm = vec![q(0, 1), q(1, 5), q(1, 2), q(1, 1), q(1, 1), q(1, 1)];
    let ok = spec.as_deref() == Some(&path6_delta1()[..])
        && hom.as_ref().is_some_and(|s| !s.contains(&q(1, 3)))
        && mm.as_ref() == Some(&want_mm)
        && h.as_ref() == Some(&want_mm)
        && within(t.elapsed(), 5);
    (
        format!("spectrum {}; 1/3 not homological; min-max = h = {}", show(&path6_delta1()), show(&want_mm)),
        format!(
            "spectrum {}; homological {}; min-max {}; h {}",
            spec.map_or("error".into(), |v| show(&v)),
            hom.map_or("error".into(), |v| show(&v)),
            mm.map_or("error".into(), |v| show(&v)),
            h.map_or("error".into(), |v| show(&v)),
        ),
        ok,
    )
}

/// The G6 p = 2 eigenvalues in closed form.
pub fn g6_p2_closed_form() -> [f64; 6] {
    let (s6, s10) = (6f64.sqrt(), 10f64.sqrt());
    let mut v = [0.0, (6.0 - s6) / 6.0, (20.0 - s10) / 15.0, 4.0 / 3.0, (6.0 + s6) / 6.0, (20.0 + s10) / 15.0];
    v.sort_by(f64::total_cmp);
    v
}

fn c5(_: u64) -> (String, String, bool) {
    let want = g6_p2_closed_form();
    let got = spectrum_p2(&catalog::g6()).ok();
    let err = got
        .as_ref()
        .map(|g| g.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    let ok = err.is_some_and(|e| e <= 1e-9);
    (format!("{want:?} within 1e-9"), format!("max error {err:?}"), ok)
}

fn c6(_: u64) -> (String, String, bool) {
    let distinct = complete_closed_form(5, 3.0).len();
    let pairs = complete_pairs(5, 3.0);
    let g = catalog::complete(5);
    let worst = pairs
        .iter()
        .map(|&((i, j), _)| {
            let (l, x) = complete_eigenpair(5, i, j, 3.0);
            eigen_residual(&g, l, &x, 3.0).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    let p2_ok = (3..=6).all(|n| {
        let want = [0.0, n as f64 / (n - 1) as f64];
        let cf = complete_closed_form(n, 2.0);
        let mut dense = spectrum_p2(&catalog::complete(n)).unwrap_or_default();
        dense.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let close = |v: &[f64]| v.len() == 2 && v.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-9);
        close(&cf) && close(&dense)
    });
    let ok = distinct == 7 && worst <= 1e-8 && p2_ok;
    (
        "K5, p = 3: 7 distinct values, residuals <= 1e-8; K3..K6 at p = 2: {0, n/(n-1)}".into(),
        format!(
            "{distinct} distinct of {} pair values (pairs (2,2) and (1,4) coincide at p = 3); max residual {worst:.2e}; p = 2 {}",
            pairs.len() + 1,
            if p2_ok { "ok" } else { "mismatch" }
        ),
        ok,
    )
}

fn c7(_: u64) -> (String, String, bool) {
    let mut expected = Vec::new();
    let mut measured = Vec::new();
    let mut ok = true;
    for n in [8, 9] {
        let want = cycle_delta1(n);
        let got = delta1_values(&catalog::cycle(n));
        ok &= got.as_ref() == Some(&want);
        expected.push(format!("C{n} {}", show(&want)));
        measured.push(format!("C{n} {}", got.map_or("error".into(), |g| show(&g))));
    }
    (expected.join("; "), measured.join("; "), ok)
}

/// The grid 1.05, 1.10, ..., 4.00.
pub fn monotonicity_grid() -> Vec<f64> {
    (0..60).map(|i| 1.05 + 0.05 * f64::from(i)).collect()
}

fn c8(_: u64) -> (String, String, bool) {
    let grid = monotonicity_grid();
    let t = Instant::now();
    let mut bad = Vec::new();
    for (name, g) in [("G6", catalog::g6()), ("P6", catalog::path(6))] {
        for k in 2..=g.n() {
            match monotonicity_sweep(&g, k, &grid) {
                Ok(tab) if tab.violations.is_empty() && tab.rows.len() == grid.len() => {}
                Ok(tab) => bad.push(format!("{name} k{k}: {} violations", tab.violations.len())),
                Err(e) => bad.push(format!("{name} k{k}: {e}")),
            }
        }
    }
    let ok = bad.is_empty() && within(t.elapsed(), 120);
    (
        "no violations beyond 1e-6 on G6, P6, k = 2..6; < 120 s".into(),
        if bad.is_empty() { format!("none in {:?}", t.elapsed()) } else { bad.join("; ") },
        ok,
    )
}

/// Counts of violations in each property family.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PropertyCounts {
    pub power_mean: usize,
    pub transport: usize,
    pub gradient: usize,
    pub sphere: usize,
}

impl PropertyCounts {
    pub fn total(&self) -> usize {
        self.power_mean + self.transport + self.gradient + self.sphere
    }
}

/// Runs the property families with `samples` draws each.
pub fn property_families(samples: usize, seed: u64) -> PropertyCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PropertyCounts::default();
    for _ in 0..samples {
        let t = rng.gen_range(1.0..4.0);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (lo, hi) = power_mean_inequality_check(t, a, b);
        let scale = PROPERTY_SLACK * (1.0 + a.abs().max(b.abs()).powf(t));
        out.power_mean += usize::from(lo < -scale || hi < -scale);
    }
    let graphs: Vec<Graph> = ["g6", "p6", "five", "fig5", "c8", "k5"]
        .iter()
        .map(|n| catalog::by_name(n).expect("catalog name"))
        .collect();
    for i in 0..samples {
        let g = &graphs[i % graphs.len()];
        let x: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = rng.gen_range(1.0..4.0);
        let q = rng.gen_range(p..=4.0);
        match transport_inequality_check(g, &x, p, q) {
            Ok(r) => {
                let s = PROPERTY_SLACK * (1.0 + r.fq.abs() + r.fp_phi.abs());
                out.transport += usize::from(r.claim1_slack < -s || r.claim2_slack < -s);
            }
            Err(_) => out.transport += 1,
        }
    }
    let h = 1e-6;
    for i in 0..samples {
        let g = &graphs[i % graphs.len()];
        let x: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = rng.gen_range(1.5..4.0);
        let d = apply_delta_p(g, &x, p);
        let v = rng.gen_range(0..g.n());
        let shift = |s: f64| {
            let mut y = x.clone();
            y[v] += s;
            p_energy(g, &y, p)
        };
        let fd = (shift(h) - shift(-h)) / (2.0 * h);
        // Central differences carry O(h^2) truncation and O(eps/h) rounding.
        out.gradient += usize::from((fd - d[v]).abs() > 1e-5 * (1.0 + d[v].abs()));
    }
    for n in 1..=5 {
        let k = build_kn(n).expect("n within cap");
        let s = SymmetricStructure::detect(&k);
        let mut sphere = vec![0; n];
        sphere[0] += 1;
        sphere[n - 1] += 1;
        out.sphere += usize::from(yang_index(&k, &s).index != n || betti_gf2(&k) != sphere);
    }
    out
}

fn c9(seed: u64) -> (String, String, bool) {
    let c = property_families(PROPERTY_SAMPLES, seed ^ 0x09);
    (
        format!("0 violations in {PROPERTY_SAMPLES} samples per family"),
        format!("{c:?}"),
        c.total() == 0,
    )
}

fn c10(_: u64) -> (String, String, bool) {
    let g = catalog::fig5();
    let ints = |v: [i64; 6]| v.iter().map(|&a| Rational::from_int(a)).collect::<Vec<_>>();
    let a = is_critical_f1(&g, &ints([0, 0, 1, 1, 0, 0]));
    let b = is_critical_f1(&g, &ints([0, 0, 1, 1, -1, -1]));
    let witness_ok = match &b {
        Ok(Criticality::NotCritical { witness, .. }) => {
            let y = &witness.y;
            y[2..].iter().all(Rational::is_zero) && y[0] == -y[1].clone() && y[0].abs() == Rational::one()
        }
        _ => false,
    };
    let ok = a.as_ref().is_ok_and(Criticality::is_critical) && witness_ok;
    (
        "1_{3,4} critical; 1_{3,4} - 1_{5,6} not critical along ±(1_1 - 1_2)".into(),
        format!(
            "{:?}; {}",
            a.map(|c| c.is_critical()),
            if witness_ok { "witness in family" } else { "no witness in family" }
        ),
        ok,
    )
}

/// Random connected graphs with n drawn from `sizes`.
pub fn random_graphs(count: usize, sizes: std::ops::RangeInclusive<usize>, seed: u64) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            let d = rng.gen_range(0.1..0.9);
            random_connected(n, d, &mut rng)
        })
        .collect()
}

fn c11(seed: u64) -> (String, String, bool) {
    let graphs = random_graphs(100, 3..=8, seed ^ 0x11);
    let fails = graphs.iter().filter(|g| !jmz_gap_holds(g).unwrap_or(false)).count();
    let interval_ok = combina_interval(2.0) == (0.5, 1.5, true);
    (
        "100 random connected graphs with an eigenvalue in [1/2, 3/2]".into(),
        format!("{} of 100; interval at p = 2 {:?}", 100 - fails, combina_interval(2.0)),
        fails == 0 && interval_ok,
    )
}

/// Catalog graphs within the K_n cap.
pub fn small_catalog() -> Vec<(String, Graph)> {
    ["g6", "p6", "five", "fig5", "k4", "k5", "k6", "c5", "c6", "path4"]
        .iter()
        .map(|n| (n.to_string(), catalog::by_name(n).expect("catalog name")))
        .collect()
}

fn c12(seed: u64) -> (String, String, bool) {
    let mut graphs = small_catalog();
    graphs.extend(random_graphs(50, 3..=6, seed ^ 0x12).into_iter().enumerate().map(|(i, g)| (format!("random{i}"), g)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7EE);
    let trees: Vec<Graph> = (0..20).map(|_| random_tree(rng.gen_range(2..=6), &mut rng)).collect();
    let mut bad = Vec::new();
    for (name, g) in &graphs {
        let data = match CheegerData::new(g) {
            Ok(d) => d,
            Err(e) => {
                bad.push(format!("{name}: {e}"));
                continue;
            }
        };
        for p in [1.0, 2.0] {
            let rows: Result<Vec<_>, _> = (1..=g.n()).map(|k| inequality_diagram_row(&data, k, p, None)).collect();
            match rows {
                Ok(rows) if rows.iter().all(|r| r.passed()) => {}
                Ok(_) => bad.push(format!("{name} p = {p}: arrow failed")),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        if data.h[1] != data.hhat[1] {
            bad.push(format!("{name}: hhat_2 != h_2"));
        }
    }
    for (i, t) in trees.iter().chain([catalog::path(6)].iter()).enumerate() {
        let lam = minmax_lambda_delta1(t);
        let h: Result<Vec<_>, _> = (1..=t.n()).map(|k| multiway_cheeger(t, k)).collect();
        if lam.ok() != h.ok() {
            bad.push(format!("tree {i}: lambda_k != h_k"));
        }
    }
    (
        format!("sandwich, hhat_k <= h_k, hhat_2 = h_2 on {} graphs; lambda_k = h_k on 21 trees", graphs.len()),
        if bad.is_empty() { "all hold".into() } else { bad.join("; ") },
        bad.is_empty(),
    )
}
