//! Numerics for p > 1: Δ_p, residuals, the p = 2 spectrum, continuation of
//! eigenbranches in p, the transport map Φ_{q/p} and monotonicity checks.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{rational_det, Rational, RationalPoly};
use crate::graph::{f1_pair, rayleigh_fp, Graph, GraphError, SetPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Floor used for |t| in Jacobian entries |t|^{p−2}.
pub const JACOBIAN_GUARD: f64 = 1e-12;
/// Slack allowed when checking the monotone transforms along a branch.
pub const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PSolverError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("p must exceed 1, got {0}")]
    BadP(f64),
    #[error("seed residual {residual:e} exceeds tolerance {tol:e}")]
    BadSeed { residual: f64, tol: f64 },
    #[error("branch lost at p = {p}")]
    BranchLoss { p: f64, branch: Box<EigenBranch> },
    #[error("singular Jacobian at p = {p}")]
    SingularJacobian { p: f64, branch: Box<EigenBranch> },
    #[error("eigenvalue index {k} outside 1..={n}")]
    BadIndex { k: usize, n: usize },
    #[error("grid must be strictly monotone and inside (1, ∞)")]
    BadGrid,
}

impl PSolverError {
    /// The samples accepted before a continuation failure, if any.
    pub fn partial_branch(&self) -> Option<&EigenBranch> {
        match self {
            PSolverError::BranchLoss { branch, .. } | PSolverError::SingularJacobian { branch, .. } => Some(branch),
            _ => None,
        }
    }
}

/// φ_p(t) = |t|^{p−2} t with φ_p(0) = 0.
fn phi(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

fn guarded_pow(t: f64, e: f64) -> f64 {
    t.abs().max(JACOBIAN_GUARD).powf(e)
}

/// (Δ_p x)_i = Σ_{j∼i} |x_i − x_j|^{p−2}(x_i − x_j).
pub fn apply_delta_p(g: &Graph, x: &[f64], p: f64) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    for &(i, j) in g.edges() {
        let f = phi(x[i - 1] - x[j - 1], p);
        out[i - 1] += f;
        out[j - 1] -= f;
    }
    out
}

/// (1/p) Σ_edges |x_i − x_j|^p, whose gradient is Δ_p x.
pub fn p_energy(g: &Graph, x: &[f64], p: f64) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j)| (x[i - 1] - x[j - 1]).abs().powf(p))
        .sum::<f64>()
        / p
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// max_i |(Δ_p x)_i − λ deg(i) |x_i|^{p−2} x_i| with x scaled to ‖x‖_∞ = 1.
pub fn eigen_residual(g: &Graph, lambda: f64, x: &[f64], p: f64) -> Result<f64, PSolverError> {
    if x.len() != g.n() {
        return Err(GraphError::LengthMismatch { got: x.len(), n: g.n() }.into());
    }
    let s = sup_norm(x);
    if s == 0.0 {
        return Err(GraphError::ZeroVector.into());
    }
    let y: Vec<f64> = x.iter().map(|v| v / s).collect();
    let d = apply_delta_p(g, &y, p);
    Ok((1..=g.n())
        .map(|v| (d[v - 1] - lambda * g.degree(v) as f64 * phi(y[v - 1], p)).abs())
        .fold(0.0, f64::max))
}

/// Eigenpairs of D^{−1/2}(D − A)D^{−1/2}, sorted by eigenvalue, with
/// eigenvectors mapped back to x = D^{−1/2} v.
pub fn eigenpairs_p2(g: &Graph) -> Result<Vec<(f64, Vec<f64>)>, PSolverError> {
    g.require_no_isolated()?;
    let n = g.n();
    let dinv: Vec<f64> = (1..=n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let mut m = DMatrix::<f64>::identity(n, n);
    for &(i, j) in g.edges() {
        let w = -dinv[i - 1] * dinv[j - 1];
        m[(i - 1, j - 1)] = w;
        m[(j - 1, i - 1)] = w;
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let x: Vec<f64> = (0..n).map(|i| v[i] * dinv[i]).collect();
            (eig.eigenvalues[k], orient(x))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}

/// Sorted eigenvalues of the normalized p = 2 problem.
pub fn spectrum_p2(g: &Graph) -> Result<Vec<f64>, PSolverError> {
    Ok(eigenpairs_p2(g)?.into_iter().map(|(l, _)| l).collect())
}

/// det(L − tD) as an exact polynomial in t.
pub fn p2_characteristic_polynomial(g: &Graph) -> RationalPoly {
    let n = g.n();
    let points: Vec<(Rational, Rational)> = (0..=n as i64)
        .map(|t| {
            let t = Rational::from_int(t);
            let m: Vec<Vec<Rational>> = (1..=n)
                .map(|i| {
                    (1..=n)
                        .map(|j| {
                            if i == j {
                                Rational::from_int(g.degree(i) as i64) * (Rational::one() - &t)
                            } else if g.has_edge(i, j) {
                                -Rational::one()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            (t.clone(), rational_det(m))
        })
        .collect();
    RationalPoly::interpolate(&points)
}

/// Whether some p = 2 eigenvalue lies in [lo, hi], decided exactly.
pub fn p2_eigenvalue_in(g: &Graph, lo: &Rational, hi: &Rational) -> Result<bool, PSolverError> {
    g.require_no_isolated()?;
    let chi = p2_characteristic_polynomial(g);
    Ok(chi.eval(lo).is_zero() || chi.sturm_count(lo, hi) > 0)
}

/// Flips x so that its largest-magnitude entry (lowest index on ties) is positive.
pub fn orient(mut x: Vec<f64>) -> Vec<f64> {
    let m = sup_norm(&x);
    if let Some(i) = x.iter().position(|v| v.abs() == m) {
        if x[i] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    x
}

fn normalize_p(g: &Graph, x: &[f64], p: f64) -> Vec<f64> {
    let s: f64 = (1..=g.n()).map(|v| g.degree(v) as f64 * x[v - 1].abs().powf(p)).sum();
    let c = s.powf(-1.0 / p);
    x.iter().map(|v| v * c).collect()
}

/// Residual tolerance used at exponent p.
pub fn tolerance(p: f64) -> f64 {
    if p >= 1.5 {
        1e-10
    } else {
        1e-8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchSample {
    pub p: f64,
    pub lambda: f64,
    pub x: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenBranch {
    pub label: String,
    pub samples: Vec<BranchSample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub p: f64,
    pub lambda: f64,
    pub x: Vec<f64>,
}

/// The n eigenpairs at p = 2 as continuation seeds.
pub fn p2_seeds(g: &Graph) -> Result<Vec<Seed>, PSolverError> {
    Ok(eigenpairs_p2(g)?
        .into_iter()
        .map(|(lambda, x)| Seed { p: 2.0, lambda, x })
        .collect())
}

/// Geometric grid in (p − 1) from p0 to p_target with `steps` steps, both ends included.
pub fn geometric_grid(p0: f64, p_target: f64, steps: usize) -> Vec<f64> {
    let (a, b) = (p0 - 1.0, p_target - 1.0);
    (0..=steps)
        .map(|k| {
            if k == steps {
                p_target
            } else {
                1.0 + a * (b / a).powf(k as f64 / steps as f64)
            }
        })
        .collect()
}

fn residual_vec(g: &Graph, x: &[f64], lambda: f64, p: f64) -> DVector<f64> {
    let n = g.n();
    let d = apply_delta_p(g, x, p);
    let mut f = DVector::zeros(n + 1);
    for v in 1..=n {
        f[v - 1] = d[v - 1] - lambda * g.degree(v) as f64 * phi(x[v - 1], p);
    }
    f[n] = (1..=n).map(|v| g.degree(v) as f64 * x[v - 1].abs().powf(p)).sum::<f64>() - 1.0;
    f
}

fn jacobian(g: &Graph, x: &[f64], lambda: f64, p: f64) -> DMatrix<f64> {
    let n = g.n();
    let mut j = DMatrix::zeros(n + 1, n + 1);
    for &(a, b) in g.edges() {
        let (a, b) = (a - 1, b - 1);
        let w = (p - 1.0) * guarded_pow(x[a] - x[b], p - 2.0);
        j[(a, a)] += w;
        j[(b, b)] += w;
        j[(a, b)] -= w;
        j[(b, a)] -= w;
    }
    for v in 0..n {
        let deg = g.degree(v + 1) as f64;
        j[(v, v)] -= lambda * deg * (p - 1.0) * guarded_pow(x[v], p - 2.0);
        j[(v, n)] = -deg * phi(x[v], p);
        j[(n, v)] = p * deg * phi(x[v], p);
    }
    j
}

enum Newton {
    Converged(Vec<f64>, f64),
    Failed { singular: bool },
}

/// Damped Newton on (Δ_p x − λDφ_p(x), Σ deg|x|^p − 1) with a
/// minimum-norm least-squares step.
fn newton(g: &Graph, x0: &[f64], l0: f64, p: f64) -> Newton {
    let tol = tolerance(p);
    let n = g.n();
    let (mut x, mut lambda) = (x0.to_vec(), l0);
    let mut singular = false;
    for _ in 0..60 {
        let res = eigen_residual(g, lambda, &x, p).unwrap_or(f64::INFINITY);
        let f = residual_vec(g, &x, lambda, p);
        if res <= tol && f[n].abs() <= 1e-9 {
            return Newton::Converged(x, lambda);
        }
        let jm = jacobian(g, &x, lambda, p);
        if !jm.iter().all(|v| v.is_finite()) {
            return Newton::Failed { singular: true };
        }
        let svd = jm.svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= smax * 1e-15 {
            singular = true;
        }
        let Ok(step) = svd.solve(&(-&f), smax * 1e-14) else {
            return Newton::Failed { singular: true };
        };
        let merit = f.norm();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let xt: Vec<f64> = (0..n).map(|i| x[i] + alpha * step[i]).collect();
            let lt = lambda + alpha * step[n];
            if residual_vec(g, &xt, lt, p).norm() < merit * (1.0 - 1e-4 * alpha) {
                x = xt;
                lambda = lt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Stalled at rounding level; accept if the true residual is within tolerance.
            let res = eigen_residual(g, lambda, &x, p).unwrap_or(f64::INFINITY);
            if res <= tol {
                return Newton::Converged(x, lambda);
            }
            return Newton::Failed { singular };
        }
    }
    Newton::Failed { singular }
}

/// Below this p, continuation runs on sorted gaps instead of raw coordinates.
pub const GAP_SWITCH: f64 = 1.5;

/// x stored as the gaps between consecutive entries of sort(x ∪ {0}).
///
/// Near p = 1 coordinates inside a sign cluster merge faster than f64 can
/// resolve; gaps keep every difference x_i − x_j to full relative precision.
#[derive(Clone, Debug)]
struct GapState {
    pos: Vec<usize>,
    zero: usize,
    gaps: Vec<f64>,
}

impl GapState {
    fn from_x(x: &[f64]) -> Self {
        let n = x.len();
        let mut pts: Vec<(f64, usize)> = x.iter().copied().zip(0..n).collect();
        pts.push((0.0, n));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let scale = sup_norm(x);
        let mut pos = vec![0; n];
        let mut zero = 0;
        for (k, &(_, id)) in pts.iter().enumerate() {
            if id == n {
                zero = k;
            } else {
                pos[id] = k;
            }
        }
        let gaps = pts
            .windows(2)
            .map(|w| {
                let d = w[1].0 - w[0].0;
                if d <= 1e-13 * scale {
                    0.0
                } else {
                    d
                }
            })
            .collect();
        GapState { pos, zero, gaps }
    }

    /// ∂x_i/∂g_k.
    fn sens(&self, i: usize, k: usize) -> f64 {
        let p = self.pos[i];
        if self.zero <= k && k < p {
            1.0
        } else if p <= k && k < self.zero {
            -1.0
        } else {
            0.0
        }
    }

    fn span(&self, a: usize, b: usize) -> f64 {
        if a >= b {
            self.gaps[b..a].iter().sum()
        } else {
            -self.gaps[a..b].iter().sum::<f64>()
        }
    }

    fn value(&self, i: usize) -> f64 {
        self.span(self.pos[i], self.zero)
    }

    fn diff(&self, i: usize, j: usize) -> f64 {
        self.span(self.pos[i], self.pos[j])
    }

    fn to_x(&self) -> Vec<f64> {
        (0..self.pos.len()).map(|i| self.value(i)).collect()
    }

    fn free(&self) -> Vec<usize> {
        (0..self.gaps.len()).filter(|&k| self.gaps[k] > 0.0).collect()
    }

    /// Exchanges the tied blocks on either side of gap k, keeping every gap size.
    fn swapped(&self, k: usize) -> Self {
        let mut a = k;
        while a > 0 && self.gaps[a - 1] == 0.0 {
            a -= 1;
        }
        let mut b = k + 1;
        while b < self.gaps.len() && self.gaps[b] == 0.0 {
            b += 1;
        }
        let remap = |q: usize| {
            if (a..=k).contains(&q) {
                q + (b - k)
            } else if (k + 1..=b).contains(&q) {
                q - (k + 1 - a)
            } else {
                q
            }
        };
        let mut gaps = self.gaps.clone();
        gaps[a..b].iter_mut().for_each(|v| *v = 0.0);
        gaps[a + b - k - 1] = self.gaps[k];
        GapState {
            pos: self.pos.iter().map(|&q| remap(q)).collect(),
            zero: remap(self.zero),
            gaps,
        }
    }

    /// Swaps across the smallest free gaps, smallest first.
    fn crossings(&self, limit: usize) -> Vec<Self> {
        let mut free = self.free();
        free.sort_by(|&i, &j| self.gaps[i].total_cmp(&self.gaps[j]));
        free.into_iter().take(limit).map(|k| self.swapped(k)).collect()
    }

    fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.gaps.iter_mut().for_each(|v| *v *= c);
        s
    }

    fn normalized(&self, g: &Graph, p: f64) -> Self {
        let s: f64 = (0..self.pos.len())
            .map(|i| g.degree(i + 1) as f64 * self.value(i).abs().powf(p))
            .sum();
        self.scaled(s.powf(-1.0 / p))
    }

    fn residual_vec(&self, g: &Graph, lambda: f64, p: f64) -> DVector<f64> {
        let n = g.n();
        let mut f = DVector::zeros(n + 1);
        for &(a, b) in g.edges() {
            let t = phi(self.diff(a - 1, b - 1), p);
            f[a - 1] += t;
            f[b - 1] -= t;
        }
        let mut norm = 0.0;
        for i in 0..n {
            let deg = g.degree(i + 1) as f64;
            let xi = self.value(i);
            f[i] -= lambda * deg * phi(xi, p);
            norm += deg * xi.abs().powf(p);
        }
        f[n] = norm - 1.0;
        f
    }

    /// Same scaling as [`eigen_residual`].
    fn residual(&self, g: &Graph, lambda: f64, p: f64) -> f64 {
        let f = self.residual_vec(g, lambda, p);
        let s = (0..g.n()).map(|i| self.value(i).abs()).fold(0.0, f64::max);
        let c = s.powf(p - 1.0);
        (0..g.n()).map(|i| f[i].abs() / c).fold(0.0, f64::max)
    }

    /// Jacobian in (log g_k for free k, λ).
    fn jacobian(&self, g: &Graph, lambda: f64, p: f64, free: &[usize]) -> DMatrix<f64> {
        let n = g.n();
        let m = free.len();
        let mut j = DMatrix::zeros(n + 1, m + 1);
        // (p − 1)|d|^{p−2} g_k written as (p − 1)|d|^{p−1}(g_k/|d|) to stay finite.
        let slope = |d: f64, gk: f64| {
            if d == 0.0 {
                0.0
            } else {
                (p - 1.0) * d.abs().powf(p - 1.0) * (gk / d.abs())
            }
        };
        for &(a, b) in g.edges() {
            let (a, b) = (a - 1, b - 1);
            let d = self.diff(a, b);
            for (c, &k) in free.iter().enumerate() {
                let ds = self.sens(a, k) - self.sens(b, k);
                if ds != 0.0 {
                    let v = slope(d, self.gaps[k]) * ds;
                    j[(a, c)] += v;
                    j[(b, c)] -= v;
                }
            }
        }
        for i in 0..n {
            let deg = g.degree(i + 1) as f64;
            let xi = self.value(i);
            for (c, &k) in free.iter().enumerate() {
                let si = self.sens(i, k);
                if si != 0.0 {
                    let v = slope(xi, self.gaps[k]) * si;
                    j[(i, c)] -= lambda * deg * v;
                    j[(n, c)] += p * deg * xi.abs().powf(p - 1.0) * self.gaps[k];
                }
            }
            j[(i, m)] = -deg * phi(xi, p);
        }
        j
    }
}

fn gap_newton(g: &Graph, s0: &GapState, l0: f64, p: f64) -> Option<(GapState, f64)> {
    let tol = tolerance(p);
    let n = g.n();
    let free = s0.free();
    let (mut s, mut lambda) = (s0.clone(), l0);
    for _ in 0..80 {
        let f = s.residual_vec(g, lambda, p);
        if s.residual(g, lambda, p) <= tol && f[n].abs() <= 1e-9 {
            return Some((s, lambda));
        }
        let jm = s.jacobian(g, lambda, p, &free);
        if !jm.iter().all(|v| v.is_finite()) {
            return None;
        }
        let svd = jm.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd.solve(&(-&f), smax * 1e-14).ok()?;
        let big = step.iter().take(free.len()).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut alpha = if big > 2.0 { 2.0 / big } else { 1.0 };
        let merit = f.norm();
        let mut accepted = false;
        for _ in 0..40 {
            let mut t = s.clone();
            for (c, &k) in free.iter().enumerate() {
                t.gaps[k] *= (alpha * step[c]).exp();
            }
            let lt = lambda + alpha * step[free.len()];
            if t.residual_vec(g, lt, p).norm() < merit * (1.0 - 1e-4 * alpha) {
                s = t;
                lambda = lt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return (s.residual(g, lambda, p) <= tol).then_some((s, lambda));
        }
    }
    None
}

#[derive(Clone, Debug)]
enum State {
    Plain(Vec<f64>),
    Gaps(GapState),
}

impl State {
    fn x(&self) -> Vec<f64> {
        match self {
            State::Plain(x) => x.clone(),
            State::Gaps(s) => s.to_x(),
        }
    }

    fn residual(&self, g: &Graph, lambda: f64, p: f64) -> Result<f64, PSolverError> {
        match self {
            State::Plain(x) => eigen_residual(g, lambda, x, p),
            State::Gaps(s) => Ok(s.residual(g, lambda, p)),
        }
    }
}

/// Secant predictor from (prev, cur) to p_next followed by Newton, with a
/// plain restart from cur if the predicted point fails.
fn correct(
    g: &Graph,
    cur: &State,
    lambda: f64,
    prev: Option<&(State, f64, f64)>,
    p: f64,
    p_next: f64,
) -> Result<(State, f64), bool> {
    let secant = prev.filter(|(_, _, po)| *po != p).map(|(_, _, po)| (p_next - p) / (p - po));
    let cur = match cur {
        State::Plain(x) if p_next < GAP_SWITCH => State::Gaps(GapState::from_x(x)),
        other => other.clone(),
    };
    match &cur {
        State::Plain(x) => {
            let mut tries = Vec::new();
            if let (Some(sc), Some((State::Plain(xo), lo, _))) = (secant, prev) {
                let xp: Vec<f64> = x.iter().zip(xo).map(|(a, b)| a + sc * (a - b)).collect();
                tries.push((normalize_p(g, &xp, p_next), lambda + sc * (lambda - lo)));
            }
            tries.push((normalize_p(g, x, p_next), lambda));
            let mut singular = false;
            for (xp, lp) in tries {
                match newton(g, &xp, lp, p_next) {
                    Newton::Converged(xn, ln) => {
                        let xn = if xn.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
                            xn.iter().map(|v| -v).collect()
                        } else {
                            xn
                        };
                        return Ok((State::Plain(xn), ln));
                    }
                    Newton::Failed { singular: s } => singular |= s,
                }
            }
            let gs = GapState::from_x(x).normalized(g, p_next);
            match gap_newton(g, &gs, lambda, p_next) {
                Some((sn, ln)) => Ok((State::Gaps(sn), ln)),
                None => Err(singular),
            }
        }
        State::Gaps(s) => {
            let mut tries = Vec::new();
            if let (Some(sc), Some((State::Gaps(so), lo, _))) = (secant, prev) {
                if so.pos == s.pos && so.free() == s.free() {
                    let mut t = s.clone();
                    for k in s.free() {
                        t.gaps[k] *= (sc * (s.gaps[k] / so.gaps[k]).ln()).exp();
                    }
                    tries.push((t.normalized(g, p_next), lambda + sc * (lambda - lo)));
                }
            }
            tries.push((s.normalized(g, p_next), lambda));
            tries.extend(s.crossings(3).into_iter().map(|c| (c.normalized(g, p_next), lambda)));
            for (sp, lp) in tries {
                if let Some((sn, ln)) = gap_newton(g, &sp, lp, p_next) {
                    return Ok((State::Gaps(sn), ln));
                }
            }
            Err(false)
        }
    }
}

/// Newton correction of (λ, x) at a fixed p; returns the refined pair and its residual.
pub fn refine_eigenpair(g: &Graph, p: f64, lambda: f64, x: &[f64]) -> Result<(f64, Vec<f64>, f64), PSolverError> {
    if p <= 1.0 {
        return Err(PSolverError::BadP(p));
    }
    if x.len() != g.n() {
        return Err(GraphError::LengthMismatch { got: x.len(), n: g.n() }.into());
    }
    if sup_norm(x) == 0.0 {
        return Err(GraphError::ZeroVector.into());
    }
    let x0 = normalize_p(g, x, p);
    let state = if p >= GAP_SWITCH {
        match newton(g, &x0, lambda, p) {
            Newton::Converged(x, l) => Some((State::Plain(x), l)),
            Newton::Failed { .. } => None,
        }
    } else {
        None
    };
    let state = state.or_else(|| gap_newton(g, &GapState::from_x(&x0), lambda, p).map(|(s, l)| (State::Gaps(s), l)));
    match state {
        Some((st, l)) => {
            let r = st.residual(g, l, p)?;
            Ok((l, orient(st.x()), r))
        }
        None => Err(PSolverError::BranchLoss {
            p,
            branch: Box::new(EigenBranch {
                label: String::new(),
                samples: Vec::new(),
            }),
        }),
    }
}

/// Seed used by [`seed_from_set_pair`].
pub const SET_PAIR_SEED: u64 = 0x5EED_0001;

/// A branch on the ascending geometric grid from p_near to p_far whose
/// vectors align with 1_A − 1_B and whose eigenvalue at p_near is within
/// 0.05 of F_1(1_A − 1_B).
///
/// Perturbations of the indicator are corrected at moderate p, where the
/// Newton basin is wide, continued down to p_near and then back up.
pub fn set_pair_branch(g: &Graph, pair: SetPair, p_near: f64, p_far: f64, steps: usize) -> Result<EigenBranch, PSolverError> {
    if p_near <= 1.0 || p_far <= p_near {
        return Err(PSolverError::BadP(p_near));
    }
    g.require_no_isolated()?;
    let target = f1_pair(g, pair)?.to_f64();
    let ind: Vec<f64> = pair.to_vector(g.n()).iter().map(|&v| v as f64).collect();
    let ind_norm = ind.iter().map(|v| v * v).sum::<f64>().sqrt();
    let aligned = |x: &[f64]| {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter().zip(&ind).map(|(a, b)| a * b).sum::<f64>().abs() / (nx * ind_norm) > 0.8
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SET_PAIR_SEED);
    let join = |s: crate::graph::VertexSet| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-");
    let label = format!("A{}_B{}", join(pair.a), join(pair.b));
    let mut last_err = None;
    for &p0 in [1.2, 1.3, 1.15, 1.1].iter().filter(|&&p0| p0 > p_near) {
        for trial in 0..400 {
            let eta = [0.3, 0.1, 0.03][trial % 3];
            let x: Vec<f64> = ind.iter().map(|v| v + eta * rng.gen_range(-1.0..1.0)).collect();
            let Ok((l, y, _)) = refine_eigenpair(g, p0, target, &x) else {
                continue;
            };
            if (l - target).abs() >= 0.05 || !aligned(&y) {
                continue;
            }
            let state = if p0 >= GAP_SWITCH {
                State::Plain(normalize_p(g, &y, p0))
            } else {
                State::Gaps(GapState::from_x(&normalize_p(g, &y, p0)))
            };
            let down = geometric_grid(p0, p_near, 100);
            let Ok((b, st, l)) = follow(g, state, l, p0, &down[1..], &label) else {
                continue;
            };
            let end = b.samples.last().expect("nonempty grid");
            if (end.lambda - target).abs() >= 0.05 || !aligned(&end.x) {
                continue;
            }
            let mut up = geometric_grid(p_near, p_far, steps.max(1));
            up.remove(0);
            let first = BranchSample {
                p: p_near,
                lambda: l,
                x: orient(st.x()),
                residual: st.residual(g, l, p_near)?,
            };
            match follow(g, st, l, p_near, &up, &label) {
                Ok((mut b, _, _)) => {
                    b.samples.insert(0, first);
                    return Ok(b);
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    Err(last_err.unwrap_or(PSolverError::BranchLoss {
        p: p_near,
        branch: Box::new(EigenBranch {
            label,
            samples: Vec::new(),
        }),
    }))
}

/// Corrects a seed at its own p, then follows it along `grid`.
///
/// Between grid points the p-step is halved on Newton failure, down to a
/// floor of 1e−7; samples are recorded only at grid points. Below
/// [`GAP_SWITCH`] the residual is evaluated on the gap representation and the
/// stored x is its rounding to f64.
pub fn continue_on_grid(g: &Graph, seed: &Seed, grid: &[f64], label: &str) -> Result<EigenBranch, PSolverError> {
    if seed.p <= 1.0 {
        return Err(PSolverError::BadP(seed.p));
    }
    let dir = grid.last().map_or(0.0, |&q| q - seed.p);
    let mut last = seed.p;
    for &q in grid {
        if q <= 1.0 || !q.is_finite() || (q - last) * dir < 0.0 || (q == last && q != seed.p) {
            return Err(PSolverError::BadGrid);
        }
        last = q;
    }
    let x0 = normalize_p(g, &seed.x, seed.p);
    let seeded = if seed.p < GAP_SWITCH {
        gap_newton(g, &GapState::from_x(&x0), seed.lambda, seed.p).map(|(s, l)| (State::Gaps(s), l))
    } else {
        match newton(g, &x0, seed.lambda, seed.p) {
            Newton::Converged(x, l) => Some((State::Plain(x), l)),
            Newton::Failed { .. } => None,
        }
    };
    let Some((state, lambda)) = seeded else {
        let residual = eigen_residual(g, seed.lambda, &seed.x, seed.p)?;
        return Err(PSolverError::BadSeed {
            residual,
            tol: tolerance(seed.p),
        });
    };
    follow(g, state, lambda, seed.p, grid, label).map(|(b, _, _)| b)
}

fn follow(
    g: &Graph,
    mut state: State,
    mut lambda: f64,
    mut p: f64,
    grid: &[f64],
    label: &str,
) -> Result<(EigenBranch, State, f64), PSolverError> {
    let mut branch = EigenBranch {
        label: label.to_string(),
        samples: Vec::new(),
    };
    let mut prev: Option<(State, f64, f64)> = None;
    for &target in grid {
        let mut h = target - p;
        while p != target {
            let step_to = if (p + h - target) * h.signum() >= 0.0 { target } else { p + h };
            match correct(g, &state, lambda, prev.as_ref(), p, step_to) {
                Ok((sn, ln)) => {
                    prev = Some((std::mem::replace(&mut state, sn), lambda, p));
                    lambda = ln;
                    p = step_to;
                    h *= 1.5;
                }
                Err(singular) => {
                    h *= 0.5;
                    if h.abs() < 1e-7 {
                        let branch = Box::new(branch);
                        return Err(if singular {
                            PSolverError::SingularJacobian { p: step_to, branch }
                        } else {
                            PSolverError::BranchLoss { p: step_to, branch }
                        });
                    }
                }
            }
        }
        let residual = state.residual(g, lambda, p)?;
        branch.samples.push(BranchSample {
            p,
            lambda,
            x: orient(state.x()),
            residual,
        });
    }
    Ok((branch, state, lambda))
}

/// Follows a seed to `p_target` on the geometric grid with `steps` steps.
pub fn continue_branch(g: &Graph, seed: &Seed, p_target: f64, steps: usize) -> Result<EigenBranch, PSolverError> {
    if p_target <= 1.0 {
        return Err(PSolverError::BadP(p_target));
    }
    let grid = geometric_grid(seed.p, p_target, steps.max(1));
    continue_on_grid(g, seed, &grid, "branch")
}

/// Signed power: Φ_r(x)_i = |x_i|^r sign(x_i).
pub fn phi_map(x: &[f64], ratio: f64) -> Vec<f64> {
    x.iter().map(|&v| v.signum() * v.abs().powf(ratio) * (v != 0.0) as i32 as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportReport {
    /// F_p(Φ_{q/p}(x)) − 2^{p−q} F_q(x).
    pub claim1_slack: f64,
    /// q(2F_q(x))^{1/q} − p(2F_p(Φ_{q/p}(x)))^{1/p}.
    pub claim2_slack: f64,
    pub fp_phi: f64,
    pub fq: f64,
}

/// Both transport inequalities at x for 1 ≤ p ≤ q.
pub fn transport_inequality_check(g: &Graph, x: &[f64], p: f64, q: f64) -> Result<TransportReport, PSolverError> {
    if p < 1.0 || q < p {
        return Err(PSolverError::BadP(p));
    }
    let y = phi_map(x, q / p);
    let fp_phi = rayleigh_fp(g, &y, p)?;
    let fq = rayleigh_fp(g, x, q)?;
    Ok(TransportReport {
        claim1_slack: fp_phi - 2f64.powf(p - q) * fq,
        claim2_slack: q * (2.0 * fq).powf(1.0 / q) - p * (2.0 * fp_phi).powf(1.0 / p),
        fp_phi,
        fq,
    })
}

/// Slacks of the lower bound |Φ_t(b) − Φ_t(a)| ≥ |b − a| M and the upper
/// bound t|b − a| M ≥ |Φ_t(b) − Φ_t(a)|, with M = ((|b|^t + |a|^t)/2)^{1−1/t}.
pub fn power_mean_inequality_check(t: f64, a: f64, b: f64) -> (f64, f64) {
    assert!(t >= 1.0, "t must be at least 1");
    let sp = |v: f64| v.signum() * v.abs().powf(t);
    let lhs = (sp(b) - sp(a)).abs();
    let m = ((b.abs().powf(t) + a.abs().powf(t)) / 2.0).powf(1.0 - 1.0 / t);
    let base = (b - a).abs() * m;
    (lhs - base, t * base - lhs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneRow {
    pub p: f64,
    pub lambda: f64,
    /// p(2λ)^{1/p}, expected non-decreasing.
    pub rising: f64,
    /// 2^{−p}λ, expected non-increasing.
    pub falling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneTable {
    pub k: usize,
    pub rows: Vec<MonotoneRow>,
    /// Row indices i where the pair (i, i+1) breaks monotonicity beyond the slack.
    pub violations: Vec<usize>,
}

/// Follows the k-th p = 2 eigenpair over an ascending grid and checks both
/// monotone transforms.
pub fn monotonicity_sweep(g: &Graph, k: usize, grid: &[f64]) -> Result<MonotoneTable, PSolverError> {
    let seeds = p2_seeds(g)?;
    if k == 0 || k > seeds.len() {
        return Err(PSolverError::BadIndex { k, n: seeds.len() });
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.first().is_some_and(|&p| p <= 1.0) {
        return Err(PSolverError::BadGrid);
    }
    let seed = &seeds[k - 1];
    let label = format!("k{k}");
    let below: Vec<f64> = grid.iter().rev().copied().filter(|&p| p < seed.p).collect();
    let above: Vec<f64> = grid.iter().copied().filter(|&p| p >= seed.p).collect();
    let mut samples = Vec::new();
    if !below.is_empty() {
        let mut b = continue_on_grid(g, seed, &below, &label)?.samples;
        b.reverse();
        samples.extend(b);
    }
    if !above.is_empty() {
        samples.extend(continue_on_grid(g, seed, &above, &label)?.samples);
    }
    let rows: Vec<MonotoneRow> = samples
        .into_iter()
        .map(|s| {
            let l = s.lambda.max(0.0);
            MonotoneRow {
                p: s.p,
                lambda: s.lambda,
                rising: s.p * (2.0 * l).powf(1.0 / s.p),
                falling: 2f64.powf(-s.p) * s.lambda,
            }
        })
        .collect();
    let violations = rows
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].rising < w[0].rising - MONOTONE_SLACK || w[1].falling > w[0].falling + MONOTONE_SLACK)
        .map(|(i, _)| i)
        .collect();
    Ok(MonotoneTable { k, rows, violations })
}

/// F_p on the two-vertex graph with edge multiplicities (1 between, 1 and 2 loops):
/// (|x1 + x2|^p + |x1 − 2x2|^p) / (2|x1|^p + 3|x2|^p).
pub fn two_vertex_generalized_fp(x: (f64, f64), p: f64) -> Result<f64, PSolverError> {
    let (a, b) = x;
    if a == 0.0 && b == 0.0 {
        return Err(GraphError::ZeroVector.into());
    }
    Ok(((a + b).abs().powf(p) + (a - 2.0 * b).abs().powf(p)) / (2.0 * a.abs().powf(p) + 3.0 * b.abs().powf(p)))
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header "branch_id,p,lambda,residual", one row per sample.
pub fn write_branches_csv<W: Write>(branches: &[EigenBranch], mut w: W) -> io::Result<()> {
    writeln!(w, "branch_id,p,lambda,residual")?;
    for b in branches {
        for s in &b.samples {
            writeln!(w, "{},{},{},{}", b.label, fmt17(s.p), fmt17(s.lambda), fmt17(s.residual))?;
        }
    }
    Ok(())
}

/// Grid-adjacent spectra: every value at p′ lies within 10|p − p′| of some value at p.
pub fn semicontinuity_violations(spectra: &[(f64, Vec<f64>)]) -> Vec<(f64, f64)> {
    let mut bad = Vec::new();
    for w in spectra.windows(2) {
        let ((p, s), (q, t)) = (&w[0], &w[1]);
        let eps = 10.0 * (p - q).abs();
        for &v in t {
            if !s.iter().any(|&u| (u - v).abs() < eps) {
                bad.push((*q, v));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog::*;

    #[test]
    fn delta_p_examples() {
        let g = g6();
        assert!(apply_delta_p(&g, &[2.0; 6], 3.3).iter().all(|&v| v == 0.0));
        assert_eq!(apply_delta_p(&path(2), &[1.0, -1.0], 3.0), vec![4.0, -4.0]);
        let x = [0.3, -1.2, 0.7, 2.0, -0.4, 1.1];
        let lx = apply_delta_p(&g, &x, 2.0);
        for v in 1..=6 {
            let direct = g.degree(v) as f64 * x[v - 1] - g.neighbors(v).iter().map(|u| x[u - 1]).sum::<f64>();
            assert!((lx[v - 1] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_examples() {
        let k3 = complete(3);
        assert!(eigen_residual(&k3, 1.5, &[1.0, -1.0, 0.0], 2.0).unwrap() <= 1e-12);
        for (l, x) in eigenpairs_p2(&g6()).unwrap() {
            assert!(eigen_residual(&g6(), l, &x, 2.0).unwrap() <= 1e-12);
            let mut y = x.clone();
            y[0] += 0.1 * sup_norm(&x);
            if l > 0.0 {
                assert!(eigen_residual(&g6(), l, &y, 2.0).unwrap() > 1e-3);
            }
        }
        assert!(eigen_residual(&k3, 1.0, &[0.0; 3], 2.0).is_err());
    }

    #[test]
    fn g6_p2_spectrum() {
        let s6 = 6f64.sqrt();
        let s10 = 10f64.sqrt();
        let mut expect = [0.0, (6.0 - s6) / 6.0, (20.0 - s10) / 15.0, 4.0 / 3.0, (6.0 + s6) / 6.0, (20.0 + s10) / 15.0];
        expect.sort_by(f64::total_cmp);
        let got = spectrum_p2(&g6()).unwrap();
        for (a, b) in got.iter().zip(expect) {
            assert!((a - b).abs() < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn complete_p2_spectrum() {
        for n in 3..=6 {
            let s = spectrum_p2(&complete(n)).unwrap();
            assert!(s[0].abs() < 1e-12);
            let t = n as f64 / (n as f64 - 1.0);
            assert!(s[1..].iter().all(|v| (v - t).abs() < 1e-12));
        }
    }

    #[test]
    fn isolated_vertex_rejected() {
        let g = Graph::new(3, &[(1, 2)]).unwrap();
        assert!(matches!(spectrum_p2(&g), Err(PSolverError::Graph(GraphError::IsolatedVertex(3)))));
    }

    #[test]
    fn exact_interval_test() {
        let half = Rational::new(1, 2);
        let three_halves = Rational::new(3, 2);
        assert!(p2_eigenvalue_in(&complete(3), &half, &three_halves).unwrap());
        assert!(!p2_eigenvalue_in(&complete(2), &half, &three_halves).unwrap());
        assert!(p2_eigenvalue_in(&g6(), &half, &three_halves).unwrap());
    }

    #[test]
    fn characteristic_polynomial_roots() {
        // K_3: det(L − tD) = 8 t (t − 3/2)^2.
        let chi = p2_characteristic_polynomial(&complete(3));
        assert!(chi.eval(&Rational::new(3, 2)).is_zero());
        assert!(chi.eval(&Rational::zero()).is_zero());
        assert_eq!(chi.degree(), Some(3));
    }

    #[test]
    fn k2_branch_is_power_of_two() {
        let g = path(2);
        let seed = Seed {
            p: 2.0,
            lambda: 2.0,
            x: vec![1.0, -1.0],
        };
        let b = continue_branch(&g, &seed, 3.5, 20).unwrap();
        for s in &b.samples {
            assert!((s.lambda - 2f64.powf(s.p - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn g6_branches_to_one_point_zero_one() {
        let g = g6();
        let seeds = p2_seeds(&g).unwrap();
        let b2 = continue_branch(&g, &seeds[1], 1.01, 200).unwrap();
        let end = b2.samples.last().unwrap();
        assert!((end.lambda - 0.4).abs() < 0.05, "{}", end.lambda);
        let b3 = continue_branch(&g, &seeds[2], 1.01, 200).unwrap();
        let end = b3.samples.last().unwrap();
        assert!((end.lambda - 5.0 / 7.0).abs() < 0.05, "{}", end.lambda);
        for s in b2.samples.iter().chain(&b3.samples) {
            assert!(s.residual <= tolerance(s.p));
        }
    }

    #[test]
    fn phi_map_examples() {
        let x = [0.3, -2.0, 0.0];
        assert_eq!(phi_map(&x, 1.0), x.to_vec());
        assert_eq!(phi_map(&[4.0, -1.0, 0.0], 0.5), vec![2.0, -1.0, 0.0]);
    }

    #[test]
    fn transport_examples() {
        let g = g6();
        let x = [0.3, -1.2, 0.7, 2.0, -0.4, 1.1];
        let r = transport_inequality_check(&g, &x, 2.0, 2.0).unwrap();
        assert!(r.claim1_slack.abs() < 1e-12 && r.claim2_slack.abs() < 1e-12);
        let r = transport_inequality_check(&g, &x, 1.3, 2.7).unwrap();
        assert!(r.claim1_slack >= -1e-10 && r.claim2_slack >= -1e-10);
        let one_a = [0.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let r = transport_inequality_check(&g, &one_a, 1.5, 3.0).unwrap();
        assert!(r.claim2_slack > 1e-6);
    }

    #[test]
    fn power_mean_examples() {
        let (lo, _) = power_mean_inequality_check(1.0, 0.4, -2.5);
        assert!(lo.abs() < 1e-15);
        let (lo, hi) = power_mean_inequality_check(2.0, 1.0, 3.0);
        assert!((lo - (8.0 - 2.0 * 5f64.sqrt())).abs() < 1e-12);
        assert!(hi >= 0.0);
        assert_eq!(power_mean_inequality_check(3.0, 0.7, 0.7), (0.0, 0.0));
    }

    #[test]
    fn two_vertex_values() {
        assert!((two_vertex_generalized_fp((1.0, -1.0), 1.0).unwrap() - 0.6).abs() < 1e-15);
        assert!((two_vertex_generalized_fp((2.0, 1.0), 1.0).unwrap() - 3.0 / 7.0).abs() < 1e-15);
        for p in [1.0, 1.7, 3.0] {
            assert!((two_vertex_generalized_fp((1.0, 0.0), p).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(two_vertex_generalized_fp((0.0, 0.0), 2.0).is_err());
    }

    #[test]
    fn csv_header_only_for_no_branches() {
        let mut buf = Vec::new();
        write_branches_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "branch_id,p,lambda,residual\n");
    }

    #[test]
    fn gap_jacobian_matches_finite_differences() {
        let g = g6();
        let x = [-3.3e-8, 0.096, -0.00398, -0.00398, -0.228, 0.2299];
        let s = GapState::from_x(&x);
        let (lam, p) = (1.09, 1.2565);
        let free = s.free();
        let j = s.jacobian(&g, lam, p, &free);
        let h = 1e-7;
        for (c, &k) in free.iter().enumerate() {
            let mut t = s.clone();
            t.gaps[k] *= f64::exp(h);
            let fd = (t.residual_vec(&g, lam, p) - s.residual_vec(&g, lam, p)) / h;
            for r in 0..7 {
                assert!((fd[r] - j[(r, c)]).abs() < 1e-5 * (1.0 + j[(r, c)].abs()), "row {r} col {c}");
            }
        }
    }

    #[test]
    fn gap_swap_keeps_gaps() {
        let s = GapState::from_x(&[-0.5, -1e-9, 0.3, 0.3]);
        let t = s.swapped(1);
        assert_eq!(t.gaps.iter().sum::<f64>(), s.gaps.iter().sum::<f64>());
        let x = t.to_x();
        assert!(x[1] > 0.0 && x[0] < 0.0 && x[2] == x[3]);
    }

    #[test]
    fn all_g6_branches_reach_one_point_zero_one() {
        let g = g6();
        let ends: Vec<f64> = p2_seeds(&g)
            .unwrap()
            .iter()
            .map(|s| continue_branch(&g, s, 1.01, 200).unwrap().samples.last().unwrap().lambda)
            .collect();
        assert!(ends[0].abs() < 1e-9);
        assert!((ends[3] - (2f64.powf(0.01) + 2.0) / 3.0).abs() < 1e-9);
        assert!(ends[4..].iter().all(|l| (l - 1.0).abs() < 0.05));
    }

    #[test]
    fn red_branch_from_indicator() {
        let g = g6();
        let a = crate::graph::VertexSet::from_vertices([2, 5, 6]);
        let pair = SetPair::new(a, crate::graph::VertexSet::EMPTY).unwrap();
        let up = set_pair_branch(&g, pair, 1.01, 1.1, 40).unwrap();
        assert_eq!(up.samples.len(), 41);
        assert!((up.samples[0].lambda - 5.0 / 9.0).abs() < 1e-6);
        assert!(up.samples.iter().all(|s| (s.lambda - 5.0 / 9.0).abs() < 0.05 && s.residual <= tolerance(s.p)));
        assert!(up.samples.windows(2).all(|w| w[1].p > w[0].p));
    }

    #[test]
    fn constant_branch_sweep() {
        let grid: Vec<f64> = (0..10).map(|i| 1.5 + 0.25 * i as f64).collect();
        let t = monotonicity_sweep(&g6(), 1, &grid).unwrap();
        assert!(t.violations.is_empty());
        assert!(t.rows.iter().all(|r| r.lambda.abs() < 1e-9));
    }
}
