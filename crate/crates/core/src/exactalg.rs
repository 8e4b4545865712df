//! Exact kernels: arbitrary-precision rationals, GF(2) linear algebra and
//! bounded circulation feasibility.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational number kept in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.0.cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// (numerator, denominator) when both fit in i64.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        Some((self.0.numer().to_i64()?, self.0.denom().to_i64()?))
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Rational)
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse rational from {0:?}")]
pub struct ParseRationalError(String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts "n", "n/d" and finite decimals such as "0.25".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rational(BigRational::new(n, d)));
        }
        if let Some((ip, fp)) = s.split_once('.') {
            if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| err())?;
            let scale = num_traits::pow(BigInt::from(10), fp.len());
            return Ok(Rational(BigRational::new(digits, scale)));
        }
        let n: BigInt = s.parse().map_err(|_| err())?;
        Ok(Rational(BigRational::from_integer(n)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational((self.0).$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$m(&rhs.0))
            }
        }
        impl $atr for Rational {
            fn $am(&mut self, rhs: Rational) {
                self.0 = std::mem::take(&mut self.0).$m(rhs.0);
            }
        }
        impl<'a> $atr<&'a Rational> for Rational {
            fn $am(&mut self, rhs: &'a Rational) {
                self.0 = std::mem::take(&mut self.0).$m(&rhs.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

const WORD: usize = 64;

/// Dense matrix over GF(2) with rows packed into 64-bit words.
#[derive(Clone, PartialEq, Eq)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl GF2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(WORD);
        GF2Matrix {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from the positions of its one entries.
    pub fn from_entries(rows: usize, cols: usize, ones: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, c) in ones {
            m.flip(r, c);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.words + c / WORD] >> (c % WORD) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.words + c / WORD];
        let bit = 1u64 << (c % WORD);
        if v {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.words + c / WORD] ^= 1u64 << (c % WORD);
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &GF2Matrix) -> GF2Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = GF2Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let src = rhs.row(k).to_vec();
                    let dst = &mut out.data[r * out.words..(r + 1) * out.words];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }
}

impl fmt::Debug for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GF2Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Rank over GF(2) by Gaussian elimination on packed rows.
pub fn gf2_rank(m: &GF2Matrix) -> usize {
    let mut data = m.data.clone();
    let words = m.words;
    let mut rank = 0;
    for c in 0..m.cols {
        let (w, bit) = (c / WORD, 1u64 << (c % WORD));
        let Some(p) = (rank..m.rows).find(|&r| data[r * words + w] & bit != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..words {
                data.swap(p * words + k, rank * words + k);
            }
        }
        for r in rank + 1..m.rows {
            if data[r * words + w] & bit != 0 {
                for k in w..words {
                    let v = data[rank * words + k];
                    data[r * words + k] ^= v;
                }
            }
        }
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("boundary composition is nonzero over GF(2)")]
    CompositionNonzero,
    #[error("dimension mismatch: outgoing map has {out_cols} columns, incoming map has {in_rows} rows")]
    DimensionMismatch { out_cols: usize, in_rows: usize },
}

/// dim ker(out) − rank(in) for a pair of composable maps C_{q+1} → C_q → C_{q−1}.
pub fn gf2_quotient_dim(boundary_in: &GF2Matrix, boundary_out: &GF2Matrix) -> Result<usize, ExactError> {
    if boundary_out.cols != boundary_in.rows {
        return Err(ExactError::DimensionMismatch {
            out_cols: boundary_out.cols,
            in_rows: boundary_in.rows,
        });
    }
    if !boundary_out.mul(boundary_in).is_zero() {
        return Err(ExactError::CompositionNonzero);
    }
    let kernel = boundary_out.cols - gf2_rank(boundary_out);
    Ok(kernel - gf2_rank(boundary_in))
}

/// Closed rational interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: Rational) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn scale(&self, t: &Rational) -> Self {
        Interval::new(&self.lo * t, &self.hi * t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub bounds: Interval,
}

/// Flow on arcs within bounds such that each node's net outflow lies in its
/// balance interval.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirculationProblem {
    pub arcs: Vec<Arc>,
    pub balances: Vec<Interval>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CirculationError {
    #[error("arc {0} has lower bound above upper bound")]
    InvertedArc(usize),
    #[error("node {0} has an empty balance interval")]
    InvertedBalance(usize),
    #[error("arc {0} references a node outside 0..{1}")]
    UnknownNode(usize, usize),
}

impl CirculationProblem {
    pub fn new(nodes: usize) -> Self {
        CirculationProblem {
            arcs: Vec::new(),
            balances: vec![Interval::point(Rational::zero()); nodes],
        }
    }

    pub fn nodes(&self) -> usize {
        self.balances.len()
    }

    pub fn add_arc(&mut self, tail: usize, head: usize, bounds: Interval) -> usize {
        self.arcs.push(Arc { tail, head, bounds });
        self.arcs.len() - 1
    }

    pub fn validate(&self) -> Result<(), CirculationError> {
        let n = self.nodes();
        for (i, a) in self.arcs.iter().enumerate() {
            if a.tail >= n || a.head >= n {
                return Err(CirculationError::UnknownNode(i, n));
            }
            if a.bounds.lo > a.bounds.hi {
                return Err(CirculationError::InvertedArc(i));
            }
        }
        for (i, b) in self.balances.iter().enumerate() {
            if b.lo > b.hi {
                return Err(CirculationError::InvertedBalance(i));
            }
        }
        Ok(())
    }

    /// Net outflow of every node under `flow`.
    pub fn net_outflow(&self, flow: &[Rational]) -> Vec<Rational> {
        let mut net = vec![Rational::zero(); self.nodes()];
        for (a, f) in self.arcs.iter().zip(flow) {
            net[a.tail] += f;
            net[a.head] -= f;
        }
        net
    }

    /// Exact check of a candidate flow against every constraint.
    pub fn check(&self, flow: &[Rational]) -> bool {
        flow.len() == self.arcs.len()
            && self.arcs.iter().zip(flow).all(|(a, f)| a.bounds.contains(f))
            && self
                .net_outflow(flow)
                .iter()
                .zip(&self.balances)
                .all(|(v, b)| b.contains(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible { flow: Vec<Rational> },
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Feasible { flow } => Some(flow),
            Feasibility::Infeasible => None,
        }
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<Rational>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual {
            head: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, u: usize, v: usize, c: Rational) -> usize {
        let id = self.head.len();
        self.head.push(v);
        self.cap.push(c);
        self.adj[u].push(id);
        self.head.push(u);
        self.cap.push(Rational::zero());
        self.adj[v].push(id + 1);
        id
    }

    /// Edmonds–Karp; returns the flow value.
    fn max_flow(&mut self, s: usize, t: usize) -> Rational {
        let n = self.adj.len();
        let mut total = Rational::zero();
        loop {
            let mut prev: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.head[e];
                    if !seen[v] && self.cap[e].is_positive() {
                        seen[v] = true;
                        prev[v] = Some(e);
                        q.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut path = Vec::new();
            let mut v = t;
            while let Some(e) = prev[v] {
                path.push(e);
                v = self.head[e ^ 1];
            }
            let push = path.iter().map(|&e| &self.cap[e]).min().cloned().unwrap_or_default();
            for &e in &path {
                self.cap[e] -= &push;
                self.cap[e ^ 1] += &push;
            }
            total += push;
        }
    }
}

/// Decides feasibility exactly and returns a witness flow when one exists.
///
/// Node balances become arcs to an extra hub node, lower bounds are shifted
/// out, and the remaining problem is a max-flow saturation test.
pub fn circulation_feasible(p: &CirculationProblem) -> Result<Feasibility, CirculationError> {
    p.validate()?;
    let n = p.nodes();
    let hub = n;
    let (src, sink) = (n + 1, n + 2);
    let mut arcs: Vec<(usize, usize, &Interval)> = p.arcs.iter().map(|a| (a.tail, a.head, &a.bounds)).collect();
    for (v, b) in p.balances.iter().enumerate() {
        arcs.push((hub, v, b));
    }
    let mut excess = vec![Rational::zero(); n + 1];
    let mut res = Residual::new(n + 3);
    let mut ids = Vec::with_capacity(arcs.len());
    for &(u, v, b) in &arcs {
        excess[v] += &b.lo;
        excess[u] -= &b.lo;
        ids.push(res.add(u, v, &b.hi - &b.lo));
    }
    let mut demand = Rational::zero();
    for (v, e) in excess.iter().enumerate() {
        if e.is_positive() {
            res.add(src, v, e.clone());
            demand += e;
        } else if e.is_negative() {
            res.add(v, sink, -e);
        }
    }
    if res.max_flow(src, sink) != demand {
        return Ok(Feasibility::Infeasible);
    }
    let flow: Vec<Rational> = p
        .arcs
        .iter()
        .zip(&ids)
        .map(|(a, &id)| &a.bounds.lo + &res.cap[id ^ 1])
        .collect();
    debug_assert!(p.check(&flow));
    Ok(Feasibility::Feasible { flow })
}

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly(pub Vec<Rational>);

impl RationalPoly {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(Rational::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.0.iter().rev().fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        RationalPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * &Rational::from_int(k as i64))
                .collect(),
        )
        .trim()
    }

    /// Remainder of division by a nonzero polynomial.
    pub fn rem(&self, d: &RationalPoly) -> Self {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = &d.0[dd];
        let mut r = self.clone().trim();
        while let Some(rd) = r.degree().filter(|&rd| rd >= dd) {
            let f = &r.0[rd] / lead;
            for k in 0..=dd {
                let v = &f * &d.0[k];
                r.0[rd - dd + k] -= v;
            }
            r = r.trim();
        }
        r
    }

    /// Newton interpolation through points with distinct abscissae.
    pub fn interpolate(points: &[(Rational, Rational)]) -> Self {
        let m = points.len();
        let mut coef: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
        for lvl in 1..m {
            for i in (lvl..m).rev() {
                coef[i] = (&coef[i] - &coef[i - 1]) / (&points[i].0 - &points[i - lvl].0);
            }
        }
        let mut out = RationalPoly(vec![Rational::zero()]);
        for i in (0..m).rev() {
            // out = out * (t − x_i) + coef[i]
            let mut next = vec![Rational::zero(); out.0.len() + 1];
            for (k, c) in out.0.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * &points[i].0;
            }
            next[0] += &coef[i];
            out = RationalPoly(next);
        }
        out.trim()
    }

    /// Distinct real roots in (lo, hi] by Sturm's theorem.
    pub fn sturm_count(&self, lo: &Rational, hi: &Rational) -> usize {
        let p = self.clone().trim();
        if p.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut chain = vec![p.clone(), p.derivative()];
        while chain.last().and_then(|q| q.degree()).is_some() {
            let k = chain.len();
            let r = chain[k - 2].rem(&chain[k - 1]);
            if r.degree().is_none() && r.0.iter().all(Rational::is_zero) {
                break;
            }
            chain.push(RationalPoly(r.0.into_iter().map(|c| -c).collect()));
        }
        let changes = |t: &Rational| {
            let signs: Vec<i32> = chain.iter().map(|q| q.eval(t).signum()).filter(|&s| s != 0).collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        changes(lo) - changes(hi)
    }
}

/// Determinant by fraction-based Gaussian elimination.
pub fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        let (top, below) = m.split_at_mut(c + 1);
        let pivot_row = &top[c];
        for row in below {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &piv;
            for (x, y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x -= &f * y;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn triangle_d1() -> GF2Matrix {
        // vertices 0,1,2; edges 01, 02, 12
        GF2Matrix::from_entries(3, 3, [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2), (2, 2)])
    }

    #[test]
    fn rational_lowest_terms_and_display() {
        let x = r(10, -4);
        assert_eq!(x.to_string(), "-5/2");
        assert_eq!("3/6".parse::<Rational>().unwrap(), r(1, 2));
        assert_eq!("0.25".parse::<Rational>().unwrap(), r(1, 4));
        assert_eq!("7".parse::<Rational>().unwrap(), r(7, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert_eq!(serde_json::to_string(&r(5, 9)).unwrap(), "\"5/9\"");
    }

    #[test]
    fn rank_examples() {
        assert_eq!(gf2_rank(&GF2Matrix::identity(3)), 3);
        assert_eq!(gf2_rank(&GF2Matrix::zeros(3, 3)), 0);
        assert_eq!(gf2_rank(&triangle_d1()), 2);
    }

    #[test]
    fn rank_wide_matrix_crosses_words() {
        let m = GF2Matrix::from_entries(2, 130, [(0, 129), (1, 3), (1, 129)]);
        assert_eq!(gf2_rank(&m), 2);
        assert_eq!(gf2_rank(&m.transpose()), 2);
    }

    #[test]
    fn quotient_dims() {
        let z1 = GF2Matrix::zeros(1, 0);
        let z0 = GF2Matrix::zeros(0, 1);
        assert_eq!(gf2_quotient_dim(&z1, &z0).unwrap(), 1);
        let d1 = triangle_d1();
        assert_eq!(gf2_quotient_dim(&GF2Matrix::zeros(3, 0), &d1).unwrap(), 1);
        assert_eq!(gf2_quotient_dim(&d1, &GF2Matrix::zeros(0, 3)).unwrap(), 1);
    }

    #[test]
    fn quotient_rejects_nonzero_composition() {
        let i = GF2Matrix::identity(2);
        assert_eq!(gf2_quotient_dim(&i, &i), Err(ExactError::CompositionNonzero));
    }

    #[test]
    fn trivial_circulation() {
        let mut p = CirculationProblem::new(3);
        p.add_arc(0, 1, Interval::point(Rational::zero()));
        p.add_arc(1, 2, Interval::point(Rational::zero()));
        let f = circulation_feasible(&p).unwrap();
        assert_eq!(f.witness().unwrap(), &[Rational::zero(), Rational::zero()]);
    }

    #[test]
    fn forced_cycle() {
        let mut p = CirculationProblem::new(3);
        p.add_arc(0, 1, Interval::new(r(1, 1), r(2, 1)));
        p.add_arc(1, 2, Interval::new(r(0, 1), r(3, 2)));
        p.add_arc(2, 0, Interval::new(r(0, 1), r(5, 4)));
        let f = circulation_feasible(&p).unwrap();
        let w = f.witness().unwrap();
        assert!(p.check(w));
        assert!(w[0] >= r(1, 1) && w[0] <= r(5, 4));
        p.arcs[2].bounds = Interval::new(r(0, 1), r(1, 2));
        assert_eq!(circulation_feasible(&p).unwrap(), Feasibility::Infeasible);
    }

    #[test]
    fn balances_act_as_sources() {
        let mut p = CirculationProblem::new(2);
        p.add_arc(0, 1, Interval::new(r(-1, 1), r(1, 1)));
        p.balances[0] = Interval::point(r(2, 3));
        p.balances[1] = Interval::new(r(-1, 1), r(1, 1));
        let f = circulation_feasible(&p).unwrap();
        assert_eq!(f.witness().unwrap(), &[r(2, 3)]);
        p.balances[0] = Interval::point(r(3, 2));
        assert!(!circulation_feasible(&p).unwrap().is_feasible());
    }

    #[test]
    fn invalid_problems_are_reported() {
        let mut p = CirculationProblem::new(2);
        p.add_arc(0, 1, Interval::new(r(1, 1), r(0, 1)));
        assert_eq!(circulation_feasible(&p), Err(CirculationError::InvertedArc(0)));
        let mut p = CirculationProblem::new(1);
        p.add_arc(0, 4, Interval::point(Rational::zero()));
        assert_eq!(circulation_feasible(&p), Err(CirculationError::UnknownNode(0, 1)));
    }

    #[test]
    fn sturm_and_interpolation() {
        // (t − 1)(t − 2)^2 = t^3 − 5t^2 + 8t − 4
        let pts: Vec<(Rational, Rational)> = (0..4)
            .map(|t| {
                let t = Rational::from_int(t);
                let v = (&t - &r(1, 1)) * (&t - &r(2, 1)) * (&t - &r(2, 1));
                (t, v)
            })
            .collect();
        let p = RationalPoly::interpolate(&pts);
        assert_eq!(p, RationalPoly(vec![r(-4, 1), r(8, 1), r(-5, 1), r(1, 1)]));
        assert_eq!(p.sturm_count(&r(0, 1), &r(3, 1)), 2);
        assert_eq!(p.sturm_count(&r(3, 2), &r(3, 1)), 1);
        assert_eq!(p.sturm_count(&r(5, 2), &r(3, 1)), 0);
    }

    #[test]
    fn determinant() {
        let m = vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(3, 1)]];
        assert_eq!(rational_det(m), r(5, 1));
        let s = vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]];
        assert_eq!(rational_det(s), Rational::zero());
    }
}
