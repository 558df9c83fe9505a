//! Baker-Campbell-Hausdorff series for A = ln eta and h = e^{A/2} H e^{-A/2}.
//!
//! All terms are fermion bilinears, so the series is computed on M x M
//! one-particle matrices (the commutator of two bilinears is the bilinear of
//! the matrix commutator). Writing H = K0 + g K1 with K0 = -adjacency:
//!
//! * theta = pi/2: K1 = i D, D = diag(1, 0, .., 0, -1). Only odd A_n occur and
//!   A_n = i S_n with S_n real antisymmetric; everything is exact rational.
//! * general theta: K1 = diag(e^{i theta}, 0, .., e^{-i theta}); every order is
//!   solved in floating point from e^A H e^{-A} = H^dagger.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::chain::{bilinear_sector, HamiltonianSpec, Limits};
use crate::error::{invalid, Error, Result};
use crate::linalg::{comm, hermitian_apply, hermitian_eig, hermiticity_defect, max_abs, max_abs_diff, re, CMat, C64, I, ZERO};
use crate::metric::MetricBundle;

/// Highest order the solvers accept by default.
pub const DEFAULT_MAX_ORDER: usize = 11;
/// Largest tolerated projection of a right-hand side onto ker ad_{K0}.
pub const KERNEL_TOL: f64 = 1e-12;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

// ------------------------------------------------------------------ sequences

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Lambda,
    LambdaPrime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalSequence {
    pub kind: SequenceKind,
    /// values[k-1] = lambda_k
    pub values: Vec<BigRational>,
}

impl RationalSequence {
    pub fn get(&self, k: usize) -> &BigRational {
        &self.values[k - 1]
    }
}

/// lambda_k = (2k-1)/(2k+1)! - sum_{j=1}^{k-1} lambda_{k-j}/(2j+1)!
pub fn lambda_sequence(n: usize) -> RationalSequence {
    let mut v: Vec<BigRational> = Vec::with_capacity(n);
    for k in 1..=n {
        let mut x = BigRational::new(BigInt::from(2 * k - 1), factorial(2 * k + 1));
        for j in 1..k {
            x -= &v[k - j - 1] / BigRational::from_integer(factorial(2 * j + 1));
        }
        v.push(x);
    }
    RationalSequence { kind: SequenceKind::Lambda, values: v }
}

/// lambda'_k = (2k-1)/(2^{2k-1}(2k)!) - sum_{j=1}^{k-1} lambda_{k-j}/(2^{2j}(2j)!)
pub fn lambda_prime_sequence(n: usize) -> RationalSequence {
    let lam = lambda_sequence(n.saturating_sub(1));
    let mut v = Vec::with_capacity(n);
    for k in 1..=n {
        let den = (BigInt::one() << (2 * k - 1)) * factorial(2 * k);
        let mut x = BigRational::new(BigInt::from(2 * k - 1), den);
        for j in 1..k {
            let d = (BigInt::one() << (2 * j)) * factorial(2 * j);
            x -= lam.get(k - j) / BigRational::from_integer(d);
        }
        v.push(x);
    }
    RationalSequence { kind: SequenceKind::LambdaPrime, values: v }
}

// ------------------------------------------------------------ rational matrices

/// Dense real rational matrix (row major).
#[derive(Debug, Clone, PartialEq)]
pub struct QMat {
    pub n: usize,
    data: Vec<BigRational>,
}

impl QMat {
    pub fn zeros(n: usize) -> Self {
        QMat { n, data: vec![BigRational::zero(); n * n] }
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.n + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn scale(&self, s: &BigRational) -> QMat {
        QMat { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add_assign(&mut self, o: &QMat) {
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        let n = self.n;
        let mut out = QMat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = o.get(k, c);
                    if !b.is_zero() {
                        out.data[r * n + c] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn comm(&self, o: &QMat) -> QMat {
        let mut a = self.mul(o);
        let b = o.mul(self);
        for (x, y) in a.data.iter_mut().zip(b.data) {
            *x -= y;
        }
        a
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |r, c| self.get(r, c).to_f64().unwrap_or(f64::NAN))
    }

    /// The complex matrix i^{power} * self.
    pub fn to_cmat(&self, imaginary: bool) -> CMat {
        let f = self.to_f64();
        CMat::from_fn(self.n, self.n, |r, c| if imaginary { C64::new(0.0, f[(r, c)]) } else { re(f[(r, c)]) })
    }
}

fn k0_exact(m: usize) -> QMat {
    let mut k = QMat::zeros(m);
    for x in 0..m - 1 {
        k.set(x, x + 1, q(-1, 1));
        k.set(x + 1, x, q(-1, 1));
    }
    k
}

fn d_exact(m: usize) -> QMat {
    let mut d = QMat::zeros(m);
    d.set(0, 0, q(1, 1));
    d.set(m - 1, m - 1, q(-1, 1));
    d
}

/// Exact solver for [K0, S] = R with S real antisymmetric.
///
/// Unknowns S_xy (x < y), equations on the entries x <= y of the symmetric
/// right-hand side. Gauss-Jordan elimination is done once; each solve applies
/// the recorded row transform and refuses inconsistent right-hand sides.
struct AdSolver {
    m: usize,
    unknowns: Vec<(usize, usize)>,
    equations: Vec<(usize, usize)>,
    transform: Vec<Vec<BigRational>>,
    pivots: Vec<(usize, usize)>,
    free_rows: Vec<usize>,
}

impl AdSolver {
    fn new(m: usize) -> Result<Self> {
        let unknowns: Vec<(usize, usize)> = (0..m).flat_map(|x| (x + 1..m).map(move |y| (x, y))).collect();
        let equations: Vec<(usize, usize)> = (0..m).flat_map(|x| (x..m).map(move |y| (x, y))).collect();
        let k0 = k0_exact(m);
        let (ne, nu) = (equations.len(), unknowns.len());
        let mut a: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); nu]; ne];
        for (u, &(x, y)) in unknowns.iter().enumerate() {
            let mut s = QMat::zeros(m);
            s.set(x, y, q(1, 1));
            s.set(y, x, q(-1, 1));
            let c = k0.comm(&s);
            for (e, &(r, cc)) in equations.iter().enumerate() {
                a[e][u] = c.get(r, cc).clone();
            }
        }
        let mut t: Vec<Vec<BigRational>> =
            (0..ne).map(|i| (0..ne).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..nu {
            let Some(p) = (row..ne).find(|&r| !a[r][col].is_zero()) else { continue };
            a.swap(row, p);
            t.swap(row, p);
            let inv = a[row][col].recip();
            for v in a[row].iter_mut() {
                *v *= &inv;
            }
            for v in t[row].iter_mut() {
                *v *= &inv;
            }
            for r in 0..ne {
                if r == row || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for c in 0..nu {
                    if !a[row][c].is_zero() {
                        let d = &f * &a[row][c];
                        a[r][c] -= d;
                    }
                }
                for c in 0..ne {
                    if !t[row][c].is_zero() {
                        let d = &f * &t[row][c];
                        t[r][c] -= d;
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        if pivots.len() != nu {
            return Err(Error::Inconsistent { what: "ad_{K0} is singular on antisymmetric matrices".into(), residual: 0.0 });
        }
        let free_rows = (row..ne).collect();
        Ok(AdSolver { m, unknowns, equations, transform: t, pivots, free_rows })
    }

    fn solve(&self, r: &QMat) -> Result<QMat> {
        let rhs: Vec<BigRational> = self.equations.iter().map(|&(x, y)| r.get(x, y).clone()).collect();
        let apply = |row: usize| -> BigRational {
            self.transform[row].iter().zip(&rhs).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum()
        };
        let mut worst = 0.0f64;
        for &fr in &self.free_rows {
            worst = worst.max(apply(fr).abs().to_f64().unwrap_or(f64::INFINITY));
        }
        // the right-hand side must also be symmetric
        for x in 0..self.m {
            for y in 0..x {
                worst = worst.max((r.get(x, y) - r.get(y, x)).abs().to_f64().unwrap_or(f64::INFINITY));
            }
        }
        if worst != 0.0 {
            return Err(Error::Inconsistent { what: "right-hand side has a kernel component".into(), residual: worst });
        }
        let mut s = QMat::zeros(self.m);
        for &(row, col) in &self.pivots {
            let v = apply(row);
            let (x, y) = self.unknowns[col];
            s.set(y, x, -v.clone());
            s.set(x, y, v);
        }
        Ok(s)
    }
}

/// Compositions of `n` into `parts` odd positive parts.
pub fn odd_compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn rec(n: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if n == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut p = 1;
        while p + (parts - 1) <= n {
            cur.push(p);
            rec(n - p, parts - 1, cur, out);
            cur.pop();
            p += 2;
        }
    }
    rec(n, parts, &mut cur, &mut out);
    out
}

/// Nested commutators [S_{p1}, [S_{p2}, ..., [S_{pk}, D]]] memoised by suffix.
struct Nested<'a> {
    s: &'a BTreeMap<usize, QMat>,
    d: QMat,
    memo: BTreeMap<Vec<usize>, QMat>,
}

impl<'a> Nested<'a> {
    fn get(&mut self, p: &[usize]) -> QMat {
        if p.is_empty() {
            return self.d.clone();
        }
        if let Some(v) = self.memo.get(p) {
            return v.clone();
        }
        let inner = self.get(&p[1..]);
        let v = self.s[&p[0]].comm(&inner);
        self.memo.insert(p.to_vec(), v.clone());
        v
    }
}

// ----------------------------------------------------------- series containers

/// A bilinear sum_{xy} K_xy c*_x c_y + constant.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleOp {
    pub k: CMat,
    pub constant: C64,
}

impl OneParticleOp {
    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_defect(&self.k) <= tol && self.constant.im.abs() <= tol
    }

    pub fn comm(&self, o: &OneParticleOp) -> OneParticleOp {
        OneParticleOp { k: comm(&self.k, &o.k), constant: ZERO }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    /// a+_{x,y} = c*_x c_y + c_x c*_y
    Plus,
    /// a-_{x,y} = c*_x c_y - c_x c*_y
    Minus,
    /// n_x
    Number,
}

impl Hop {
    pub fn label(self) -> &'static str {
        match self {
            Hop::Plus => "a+",
            Hop::Minus => "a-",
            Hop::Number => "n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisTerm {
    /// 1-based sites, x < y (x = y for number operators)
    pub x: usize,
    pub y: usize,
    pub coeff: C64,
    pub basis: Hop,
}

/// Expands K in a+_{x,y} (K = E_xy - E_yx), a-_{x,y} (K = E_xy + E_yx) and n_x.
pub fn decompose(k: &CMat, tol: f64) -> Vec<BasisTerm> {
    let m = k.nrows();
    let mut out = Vec::new();
    for x in 0..m {
        if k[(x, x)].norm() > tol {
            out.push(BasisTerm { x: x + 1, y: x + 1, coeff: k[(x, x)], basis: Hop::Number });
        }
        for y in x + 1..m {
            let plus = (k[(x, y)] - k[(y, x)]) / 2.0;
            let minus = (k[(x, y)] + k[(y, x)]) / 2.0;
            if plus.norm() > tol {
                out.push(BasisTerm { x: x + 1, y: y + 1, coeff: plus, basis: Hop::Plus });
            }
            if minus.norm() > tol {
                out.push(BasisTerm { x: x + 1, y: y + 1, coeff: minus, basis: Hop::Minus });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTerm {
    pub order: usize,
    pub op: OneParticleOp,
    /// theta = pi/2: S_n with A_n = i S_n, or h_n itself (real symmetric)
    pub exact: Option<QMat>,
}

/// kappa_x^{(n,p)}: coefficient of i(a+_{x,x+2p+1} + mirror) in A_{2n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaEntry {
    pub n: usize,
    pub p: usize,
    pub x: usize,
    pub value: BigRational,
}

/// p_x^{(n)}(g^2) = sum_j coeffs[j] g^{2j}
#[derive(Debug, Clone, PartialEq)]
pub struct PEntry {
    pub x: usize,
    pub n: usize,
    pub coeffs: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    pub sites: usize,
    pub theta: f64,
    pub order: usize,
    pub exact: bool,
    pub a_terms: Vec<SeriesTerm>,
    pub h_terms: Vec<SeriesTerm>,
    /// largest projection of a right-hand side onto ker ad_{K0}
    pub kernel_residual: f64,
}

impl SeriesExpansion {
    pub fn a(&self, n: usize) -> Option<&SeriesTerm> {
        self.a_terms.iter().find(|t| t.order == n)
    }

    pub fn h(&self, n: usize) -> Option<&SeriesTerm> {
        self.h_terms.iter().find(|t| t.order == n)
    }

    /// sum_n g^n A_n as a one-particle matrix.
    pub fn a_sum(&self, g: f64) -> CMat {
        let m = self.sites;
        self.a_terms.iter().fold(CMat::zeros(m, m), |acc, t| acc + t.op.k.scale(g.powi(t.order as i32)))
    }

    /// K0 (+ constant) + sum_n g^n h_n.
    pub fn h_sum(&self, g: f64) -> OneParticleOp {
        let m = self.sites;
        let mut k = free_hopping(m);
        let mut c = ZERO;
        for t in &self.h_terms {
            let w = g.powi(t.order as i32);
            k += t.op.k.scale(w);
            c += t.op.constant * w;
        }
        OneParticleOp { k, constant: c }
    }

    /// kappa coefficients of the odd A terms (theta = pi/2 only).
    pub fn kappa_table(&self) -> Vec<KappaEntry> {
        let mut out = Vec::new();
        for t in &self.a_terms {
            let Some(s) = &t.exact else { continue };
            if t.order % 2 == 0 {
                continue;
            }
            let n = (t.order - 1) / 2;
            for p in 0..n {
                for x in 1..=(n - p) {
                    let y = x + 2 * p + 1;
                    if y <= self.sites {
                        out.push(KappaEntry { n, p, x, value: s.get(x - 1, y - 1).clone() });
                    }
                }
            }
        }
        out
    }

    /// Hopping table p_x^{(n)} (theta = pi/2): h = -sum p_x^{(n)} a-_{x,x+n}.
    pub fn p_table(&self) -> Vec<PEntry> {
        let m = self.sites;
        let mut terms: Vec<QMat> = vec![k0_exact(m)];
        let mut ord = 2;
        while let Some(t) = self.h(ord) {
            match &t.exact {
                Some(e) => terms.push(e.clone()),
                None => return Vec::new(),
            }
            ord += 2;
        }
        let mut out = Vec::new();
        for n in 1..m {
            for x in 1..=(m - n) {
                let coeffs: Vec<BigRational> = terms.iter().map(|t| -t.get(x - 1, x - 1 + n).clone()).collect();
                if coeffs.iter().any(|c| !c.is_zero()) {
                    out.push(PEntry { x, n, coeffs });
                }
            }
        }
        out
    }
}

pub fn free_hopping(m: usize) -> CMat {
    let mut k = CMat::zeros(m, m);
    for x in 0..m - 1 {
        k[(x, x + 1)] = re(-1.0);
        k[(x + 1, x)] = re(-1.0);
    }
    k
}

/// K1 with H = K0 + g K1 + const for alpha = g e^{i theta} = conj(beta).
pub fn boundary_perturbation(m: usize, theta: f64) -> CMat {
    let mut k = CMat::zeros(m, m);
    k[(0, 0)] = C64::from_polar(1.0, theta);
    k[(m - 1, m - 1)] = C64::from_polar(1.0, -theta);
    k
}

fn is_half_pi(theta: f64) -> bool {
    (theta - PI / 2.0).abs() < 1e-15
}

fn check_args(sites: usize, order: usize) -> Result<()> {
    if sites < 2 {
        return Err(invalid("chain needs at least two sites"));
    }
    if sites > 64 {
        return Err(invalid("one-particle series limited to M <= 64"));
    }
    if order > DEFAULT_MAX_ORDER {
        return Err(invalid(format!("order {} exceeds the cap {}", order, DEFAULT_MAX_ORDER)));
    }
    Ok(())
}

// -------------------------------------------------------------- exact path

struct ExactSeries {
    s: BTreeMap<usize, QMat>,
    h: BTreeMap<usize, QMat>,
}

fn exact_series(m: usize, a_order: usize, h_order: usize) -> Result<ExactSeries> {
    let solver = AdSolver::new(m)?;
    let d = d_exact(m);
    let lam = lambda_sequence(a_order / 2 + 1);
    let lamp = lambda_prime_sequence(h_order / 2 + 1);
    let mut s: BTreeMap<usize, QMat> = BTreeMap::new();
    if a_order >= 1 {
        s.insert(1, solver.solve(&d.scale(&q(2, 1)))?);
    }
    let mut n = 1;
    while 2 * n + 1 <= a_order {
        let mut rhs = QMat::zeros(m);
        {
            let mut nest = Nested { s: &s, d: d.clone(), memo: BTreeMap::new() };
            for k in 1..=n {
                let sign = if k % 2 == 0 { q(1, 1) } else { q(-1, 1) };
                let w = lam.get(k) * sign;
                for p in odd_compositions(2 * n, 2 * k) {
                    rhs.add_assign(&nest.get(&p).scale(&w));
                }
            }
        }
        let sol = solver.solve(&rhs)?;
        s.insert(2 * n + 1, sol);
        n += 1;
    }
    let mut h = BTreeMap::new();
    let mut nest = Nested { s: &s, d: d.clone(), memo: BTreeMap::new() };
    let mut n = 1;
    while 2 * n <= h_order {
        let mut t = QMat::zeros(m);
        for k in 1..=n {
            let sign = if k % 2 == 0 { q(1, 1) } else { q(-1, 1) };
            let w = lamp.get(k) * sign;
            for p in odd_compositions(2 * n - 1, 2 * k - 1) {
                t.add_assign(&nest.get(&p).scale(&w));
            }
        }
        h.insert(2 * n, t);
        n += 1;
    }
    Ok(ExactSeries { s, h })
}

// -------------------------------------------------------------- float path

/// Solves [K0, X] = R in the eigenbasis of K0 with the kernel component set to
/// zero; returns X and the size of the discarded kernel projection.
pub fn sylvester_free(r: &CMat) -> Result<(CMat, f64)> {
    let m = r.nrows();
    let (w, u) = hermitian_eig(&free_hopping(m));
    for i in 1..m {
        if (w[i] - w[i - 1]).abs() < 1e-9 {
            return Err(invalid("degenerate free spectrum"));
        }
    }
    let rp = u.adjoint() * r * &u;
    let mut kernel: f64 = 0.0;
    let mut x = CMat::zeros(m, m);
    for i in 0..m {
        kernel = kernel.max(rp[(i, i)].norm());
        for j in 0..m {
            if i != j {
                x[(i, j)] = rp[(i, j)] / (w[i] - w[j]);
            }
        }
    }
    Ok((&u * x * u.adjoint(), kernel))
}

/// Order-by-order coefficients of sum_k ad_A^k(H)/k! where a[n], hs[n] are
/// the g^n coefficients; truncated at `order`.
pub fn ad_series(a: &[CMat], hs: &[CMat], order: usize) -> Vec<CMat> {
    let m = hs[0].nrows();
    let mut res: Vec<CMat> = hs.to_vec();
    let mut term: Vec<CMat> = hs.to_vec();
    for k in 1..=order {
        let mut t = vec![CMat::zeros(m, m); order + 1];
        for i in 1..=order {
            if max_abs(&a[i]) == 0.0 {
                continue;
            }
            for j in 0..=(order - i) {
                if max_abs(&term[j]) == 0.0 {
                    continue;
                }
                t[i + j] += comm(&a[i], &term[j]);
            }
        }
        term = t.into_iter().map(|x| x.scale(1.0 / k as f64)).collect();
        for (r, x) in res.iter_mut().zip(&term) {
            *r += x;
        }
    }
    res
}

/// A_1..A_order (index 0 unused, zero) for H = K0 + g K1.
pub fn float_a_series(k1: &CMat, order: usize) -> Result<(Vec<CMat>, f64)> {
    let m = k1.nrows();
    let mut hs = vec![CMat::zeros(m, m); order + 1];
    hs[0] = free_hopping(m);
    if order >= 1 {
        hs[1] = k1.clone();
    }
    let mut a = vec![CMat::zeros(m, m); order + 1];
    let mut worst: f64 = 0.0;
    for n in 1..=order {
        let s = ad_series(&a, &hs, order);
        let mut r = s[n].clone();
        if n == 1 {
            r -= k1.adjoint();
        }
        let (x, kernel) = sylvester_free(&r)?;
        worst = worst.max(kernel);
        a[n] = x;
    }
    Ok((a, worst))
}

// -------------------------------------------------------------- public API

/// A-series to `order`: exact at theta = pi/2, floating point otherwise.
pub fn solve_a_series(sites: usize, order: usize, theta: f64) -> Result<SeriesExpansion> {
    solve_series(sites, order, 0, theta)
}

/// h-series to `order` (together with the A terms it needs).
pub fn solve_h_series(sites: usize, order: usize, theta: f64) -> Result<SeriesExpansion> {
    solve_series(sites, order.saturating_sub(1), order, theta)
}

fn solve_series(sites: usize, a_order: usize, h_order: usize, theta: f64) -> Result<SeriesExpansion> {
    check_args(sites, a_order.max(h_order))?;
    let order = a_order.max(h_order);
    if is_half_pi(theta) {
        let ex = exact_series(sites, a_order, h_order)?;
        let a_terms = ex
            .s
            .into_iter()
            .map(|(n, s)| SeriesTerm { order: n, op: OneParticleOp { k: s.to_cmat(true), constant: ZERO }, exact: Some(s) })
            .collect();
        let h_terms = ex
            .h
            .into_iter()
            .map(|(n, h)| SeriesTerm { order: n, op: OneParticleOp { k: h.to_cmat(false), constant: ZERO }, exact: Some(h) })
            .collect();
        return Ok(SeriesExpansion { sites, theta, order, exact: true, a_terms, h_terms, kernel_residual: 0.0 });
    }
    let k1 = boundary_perturbation(sites, theta);
    let need = a_order.max(h_order);
    let (a, kernel) = float_a_series(&k1, need)?;
    if kernel > KERNEL_TOL {
        return Err(Error::Inconsistent { what: "right-hand side has a kernel component".into(), residual: kernel });
    }
    let a_terms = (1..=a_order)
        .map(|n| SeriesTerm { order: n, op: OneParticleOp { k: a[n].clone(), constant: ZERO }, exact: None })
        .collect();
    let mut h_terms = Vec::new();
    if h_order >= 1 {
        let mut hs = vec![CMat::zeros(sites, sites); h_order + 1];
        hs[0] = free_hopping(sites);
        hs[1] = k1.clone();
        let mut half: Vec<CMat> = a.iter().map(|x| x.scale(0.5)).collect();
        half.resize(h_order + 1, CMat::zeros(sites, sites));
        let hn = ad_series(&half, &hs, h_order);
        // the constant -(alpha + beta)/2 = -g cos(theta) sits at first order
        let c1 = re(-theta.cos());
        for (n, k) in hn.into_iter().enumerate().skip(1) {
            let constant = if n == 1 { c1 } else { ZERO };
            let op = OneParticleOp { k, constant };
            if hermiticity_defect(&op.k) > 1e-10 {
                return Err(Error::Inconsistent { what: format!("h_{} is not Hermitian", n), residual: hermiticity_defect(&op.k) });
            }
            h_terms.push(SeriesTerm { order: n, op, exact: None });
        }
    }
    Ok(SeriesExpansion { sites, theta, order, exact: false, a_terms, h_terms, kernel_residual: kernel })
}

/// Residual of the order-n BCH equation when A_n is replaced by `candidate`,
/// all lower orders taken from `series`.
pub fn a_equation_residual(series: &SeriesExpansion, n: usize, candidate: &CMat) -> f64 {
    let m = series.sites;
    let mut hs = vec![CMat::zeros(m, m); n + 1];
    hs[0] = free_hopping(m);
    let k1 = boundary_perturbation(m, series.theta);
    if n >= 1 {
        hs[1] = k1.clone();
    }
    let mut a = vec![CMat::zeros(m, m); n + 1];
    for t in &series.a_terms {
        if t.order < n {
            a[t.order] = t.op.k.clone();
        }
    }
    a[n] = candidate.clone();
    let s = ad_series(&a, &hs, n);
    let target = if n == 1 { k1.adjoint() } else { CMat::zeros(m, m) };
    max_abs_diff(&s[n], &target)
}

/// One-particle matrix of i sum c_{xy} X_{x,y} with X = a+ or a-, used to
/// test printed coefficient lists against the BCH equations.
pub fn hopping_matrix(sites: usize, terms: &[(usize, usize, f64)], basis: Hop, imaginary: bool) -> CMat {
    let mut k = CMat::zeros(sites, sites);
    let unit = if imaginary { I } else { re(1.0) };
    for &(x, y, v) in terms {
        let (x, y) = (x - 1, y - 1);
        k[(x, y)] += unit * v;
        match basis {
            Hop::Plus => k[(y, x)] -= unit * v,
            Hop::Minus => k[(y, x)] += unit * v,
            Hop::Number => {}
        }
    }
    k
}

// ------------------------------------------------------- comparison with eta

#[derive(Debug, Clone, PartialEq)]
pub struct CrossReport {
    pub sites: usize,
    pub theta: f64,
    pub order: usize,
    /// (g, |exp(A_series) - eta|, |h_series - h|)
    pub rows: Vec<(f64, f64, f64)>,
    pub eta_slope: f64,
    pub eta_fit_error: f64,
    pub h_slope: f64,
    pub h_fit_error: f64,
}

fn log_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    (slope, rms)
}

/// Worst sector deviation of exp(sum g^n A_n) and of the truncated h-series
/// from an exactly constructed metric bundle at coupling g.
pub fn compare_with_bundle(series: &SeriesExpansion, bundle: &MetricBundle, g: f64, limits: &Limits) -> Result<(f64, f64)> {
    let m = series.sites;
    if bundle.sites() != m {
        return Err(invalid("series and metric disagree on M"));
    }
    let a = series.a_sum(g);
    let h = series.h_sum(g);
    let mut eta_diff: f64 = 0.0;
    let mut h_diff: f64 = 0.0;
    for n in 0..=m {
        let a_n = bilinear_sector(&a, ZERO, n, limits)?;
        let (v, u) = hermitian_eig(&a_n);
        let eta = hermitian_apply(&v, &u, |x| x.exp());
        eta_diff = eta_diff.max(max_abs_diff(&eta, &bundle.sectors[n].eta));
        if !series.h_terms.is_empty() {
            let h_n = bilinear_sector(&h.k, h.constant, n, limits)?;
            h_diff = h_diff.max(max_abs_diff(&h_n, &bundle.sectors[n].h));
        }
    }
    Ok((eta_diff, h_diff))
}

/// Compares the truncated series with the exact metric for each coupling and
/// fits log(deviation) against log(g).
pub fn cross_validate_with_exact(sites: usize, theta: f64, order: usize, couplings: &[f64], limits: &Limits) -> Result<CrossReport> {
    let series = solve_series(sites, order, order, theta)?;
    let mut rows = Vec::new();
    for &g in couplings {
        let bundle = crate::metric::metric_for(&HamiltonianSpec::polar(sites, g, theta), limits, false)?;
        let (e, h) = compare_with_bundle(&series, &bundle, g, limits)?;
        rows.push((g, e, h));
    }
    let (eta_slope, eta_fit_error) = log_fit(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let (h_slope, h_fit_error) = log_fit(&rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>());
    Ok(CrossReport { sites, theta, order, rows, eta_slope, eta_fit_error, h_slope, h_fit_error })
}

// ------------------------------------------------- general-theta conventions

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonLine {
    pub term: String,
    pub candidate: String,
    /// max |ours - candidate|
    pub residual: f64,
    /// max |[K0, ours - candidate]|: zero when they differ by a conserved part
    pub commutator: f64,
}

/// Compares the general-theta series, computed in the convention
/// alpha = -g e^{i theta} used by the printed low-order displays, with those
/// displays and their conjugates. A and h are taken in the gauge A_1 = conj(A_1
/// printed), A_2 = conj(A_2 printed)/2, which the solver confirms up to ker ad_{K0}.
pub fn general_theta_report(sites: usize, theta: f64) -> Result<Vec<ComparisonLine>> {
    check_args(sites, 3)?;
    let m = sites;
    if m < 4 {
        return Err(invalid("comparison needs M >= 4"));
    }
    let k1 = boundary_perturbation(m, theta + PI);
    let (ours, _) = float_a_series(&k1, 3)?;
    let e = |t: f64| C64::from_polar(1.0, t);
    let mut a1 = CMat::zeros(m, m);
    let mut a2 = CMat::zeros(m, m);
    for x in 0..m - 1 {
        a1[(x, x + 1)] = e(theta);
        a1[(x + 1, x)] = e(-theta);
    }
    for x in 0..m - 2 {
        a2[(x, x + 2)] = re(1.0) + e(2.0 * theta);
        a2[(x + 2, x)] = re(1.0) + e(-2.0 * theta);
    }
    let k0 = free_hopping(m);
    let line = |term: &str, cand: &str, ours: &CMat, c: &CMat| ComparisonLine {
        term: term.into(),
        candidate: cand.into(),
        residual: max_abs_diff(ours, c),
        commutator: max_abs(&comm(&k0, &(ours - c))),
    };
    let conj = crate::linalg::conj;
    let mut out = vec![
        line("A1", "printed", &ours[1], &a1),
        line("A1", "conj(printed)", &ours[1], &conj(&a1)),
        line("A2", "printed", &ours[2], &a2),
        line("A2", "conj(printed)", &ours[2], &conj(&a2)),
        line("A2", "conj(printed)/2", &ours[2], &conj(&a2).scale(0.5)),
    ];

    // h in the printed gauge
    let mut gauge = vec![CMat::zeros(m, m); 4];
    gauge[1] = conj(&a1);
    gauge[2] = conj(&a2).scale(0.5);
    let mut hs = vec![CMat::zeros(m, m); 4];
    hs[0] = k0.clone();
    hs[1] = k1.clone();
    let s = ad_series(&gauge, &hs, 3);
    let (a3, _) = sylvester_free(&s[3])?;
    gauge[3] = a3;
    let half: Vec<CMat> = gauge.iter().map(|x| x.scale(0.5)).collect();
    let h = ad_series(&half, &hs, 3);
    let mut h1 = CMat::zeros(m, m);
    h1[(0, 0)] = re(-theta.cos());
    h1[(m - 1, m - 1)] = re(-theta.cos());
    let pref = re(theta.sin()) / (I * 4.0);
    let mut h2 = CMat::zeros(m, m);
    let mut h3 = CMat::zeros(m, m);
    for (x, y) in [(0, 1), (m - 2, m - 1)] {
        h2[(x, y)] = pref * e(theta);
        h2[(y, x)] = h2[(x, y)].conj();
    }
    for (x, y) in [(0, 2), (m - 3, m - 1)] {
        h3[(x, y)] = pref * (re(1.0) + e(2.0 * theta));
        h3[(y, x)] = h3[(x, y)].conj();
    }
    out.push(line("A2 gauge", "order-2 equation", &CMat::zeros(m, m), &s[2]));
    out.push(line("h1", "printed", &h[1], &h1));
    out.push(line("h2", "printed", &h[2], &h2));
    out.push(line("h2", "conj(printed)", &h[2], &conj(&h2)));
    out.push(line("h3", "printed", &h[3], &h3));
    out.push(line("h3", "conj(printed)", &h[3], &conj(&h3)));
    out.push(line("h3", "conj(printed)/2", &h[3], &conj(&h3).scale(0.5)));
    Ok(out)
}
