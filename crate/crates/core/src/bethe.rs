//! Bethe polynomials, single-particle energies, many-body spectra and
//! finite-size groundstate fits.
//!
//! Single-particle energies are the roots of
//! `F(eps) = u_M(eps) + (alpha+beta) u_{M-1}(eps) + alpha beta u_{M-2}(eps)` with
//! `u_n(2 cos k) = sin((n+1)k) / sin k`, and `f(z) = z^M F(z + 1/z)` is the
//! palindromic polynomial in the Bethe root `z`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::chain::{HamiltonianSpec, Variant};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigenvalues, re, CMat, C64, I, ZERO};

pub const ROOT_TOL: f64 = 1e-10;

/// The variable a polynomial is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyVariable {
    Z,
    Epsilon,
}

/// Coefficients (ascending) with an optional exact form `a_k + b_k g^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPolynomial {
    pub variable: PolyVariable,
    pub sites: usize,
    pub alpha: C64,
    pub beta: C64,
    pub coeffs: Vec<C64>,
    pub exact: Option<Vec<(BigRational, BigRational)>>,
    /// only even powers occur
    pub even_only: bool,
    /// the factor eps of the zero mode has been divided out
    pub zero_mode_removed: bool,
}

impl ReducedPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: C64) -> C64 {
        horner(&self.coeffs, x)
    }

    pub fn is_palindromic(&self, tol: f64) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|i| (self.coeffs[i] - self.coeffs[n - 1 - i]).norm() <= tol)
    }
}

pub fn horner(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

/// Integer coefficients of u_n, ascending, for n = -1..=nmax (index n+1).
fn u_coefficients(nmax: usize) -> Vec<Vec<BigInt>> {
    let mut u: Vec<Vec<BigInt>> = vec![vec![], vec![BigInt::one()]];
    for n in 1..=nmax {
        let prev = &u[n];
        let prev2 = &u[n - 1];
        let mut next = vec![BigInt::zero(); n + 1];
        for (i, c) in prev.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev2.iter().enumerate() {
            next[i] -= c;
        }
        u.push(next);
    }
    u
}

/// u_n(eps) and its derivative for complex eps, by the three-term recurrence.
pub fn chebyshev_u(n: isize, eps: C64) -> (C64, C64) {
    if n < 0 {
        return (ZERO, ZERO);
    }
    let (mut a, mut b) = (ZERO, re(1.0)); // u_{-1}, u_0
    let (mut da, mut db) = (ZERO, ZERO);
    for _ in 0..n {
        let c = eps * b - a;
        let dc = b + eps * db - da;
        a = b;
        b = c;
        da = db;
        db = dc;
    }
    (b, db)
}

/// F(eps) and F'(eps) for general boundary fields.
pub fn eval_f(sites: usize, alpha: C64, beta: C64, eps: C64) -> (C64, C64) {
    let m = sites as isize;
    let (u0, d0) = chebyshev_u(m, eps);
    let (u1, d1) = chebyshev_u(m - 1, eps);
    let (u2, d2) = chebyshev_u(m - 2, eps);
    let r = alpha + beta;
    let s = alpha * beta;
    (u0 + r * u1 + s * u2, d0 + r * d1 + s * d2)
}

/// Characteristic polynomial F in eps for arbitrary (alpha, beta), monic of degree M.
pub fn build_characteristic(sites: usize, alpha: C64, beta: C64) -> ReducedPolynomial {
    let u = u_coefficients(sites);
    let get = |n: usize, i: usize| -> f64 { u[n + 1].get(i).and_then(|v| v.to_f64()).unwrap_or(0.0) };
    let r = alpha + beta;
    let s = alpha * beta;
    let coeffs: Vec<C64> = (0..=sites)
        .map(|i| {
            let mut c = re(get(sites, i));
            if sites >= 1 {
                c += r * get(sites - 1, i);
            }
            if sites >= 2 {
                c += s * get(sites - 2, i);
            }
            c
        })
        .collect();
    let mut coeffs: Vec<C64> = coeffs;
    // with alpha + beta = 0 the polynomial has the parity of M
    let even_only = r.norm() == 0.0;
    let zero_mode_removed = even_only && sites % 2 == 1;
    if zero_mode_removed {
        coeffs.remove(0);
    }
    ReducedPolynomial {
        variable: PolyVariable::Epsilon,
        sites,
        alpha,
        beta,
        coeffs,
        exact: None,
        even_only,
        zero_mode_removed,
    }
}

/// Palindromic polynomial f(z) of degree 2M for alpha = g e^{i theta}, beta = conj(alpha).
pub fn build_palindromic(sites: usize, g: f64, theta: f64) -> ReducedPolynomial {
    let alpha = C64::from_polar(g, theta);
    let mut c = vec![ZERO; 2 * sites + 1];
    c[0] = re(1.0);
    c[2 * sites] = re(1.0);
    for m in 1..sites {
        c[2 * m] = re(1.0 + g * g);
    }
    for m in 0..sites {
        c[2 * m + 1] = re(2.0 * g * theta.cos());
    }
    ReducedPolynomial {
        variable: PolyVariable::Z,
        sites,
        alpha,
        beta: alpha.conj(),
        coeffs: c,
        exact: None,
        even_only: false,
        zero_mode_removed: false,
    }
}

/// Palindromic polynomial z^M F(z + 1/z) for general fields.
pub fn build_palindromic_general(sites: usize, alpha: C64, beta: C64) -> ReducedPolynomial {
    let mut c = vec![ZERO; 2 * sites + 1];
    for m in 0..=sites {
        c[2 * m] += re(1.0);
    }
    for m in 0..sites {
        c[2 * m + 1] += alpha + beta;
    }
    if sites >= 2 {
        for m in 1..sites {
            c[2 * m] += alpha * beta;
        }
    }
    ReducedPolynomial {
        variable: PolyVariable::Z,
        sites,
        alpha,
        beta,
        coeffs: c,
        exact: None,
        even_only: false,
        zero_mode_removed: false,
    }
}

/// Exact reduced polynomial at theta = pi/2: F = u_M + g^2 u_{M-2}, with the
/// zero-mode factor eps removed for odd M. Coefficients stored as (a_k, b_k)
/// meaning a_k + b_k g^2; `g` only fixes the numeric copy.
pub fn build_reduced_f(sites: usize, g: f64) -> Result<ReducedPolynomial> {
    if sites < 2 {
        return Err(invalid("need M >= 2"));
    }
    let u = u_coefficients(sites);
    let mut exact: Vec<(BigRational, BigRational)> = (0..=sites)
        .map(|i| {
            let a = u[sites + 1].get(i).cloned().unwrap_or_default();
            let b = u[sites - 1].get(i).cloned().unwrap_or_default();
            (BigRational::from_integer(a), BigRational::from_integer(b))
        })
        .collect();
    let odd = sites % 2 == 1;
    if odd {
        // constant term vanishes identically; shift down by one power
        debug_assert!(exact[0].0.is_zero() && exact[0].1.is_zero());
        exact.remove(0);
    }
    let g2 = g * g;
    let coeffs = exact
        .iter()
        .map(|(a, b)| re(a.to_f64().unwrap_or(f64::NAN) + b.to_f64().unwrap_or(f64::NAN) * g2))
        .collect();
    Ok(ReducedPolynomial {
        variable: PolyVariable::Epsilon,
        sites,
        alpha: C64::new(0.0, g),
        beta: C64::new(0.0, -g),
        coeffs,
        exact: Some(exact),
        even_only: true,
        zero_mode_removed: odd,
    })
}

/// Exact value of the reduced polynomial at eps = 0 as (a_0, b_0).
pub fn reduced_constant_term(p: &ReducedPolynomial) -> Option<(BigRational, BigRational)> {
    p.exact.as_ref().map(|e| e[0].clone())
}

// ---------------------------------------------------------------- spectra

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    OnCircle,
    OffCircle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheSpectrum {
    pub sites: usize,
    pub alpha: C64,
    pub beta: C64,
    /// Bethe roots z_j, sorted by quasi-momentum.
    pub roots: Vec<C64>,
    /// k_j = -i log z_j
    pub momenta: Vec<C64>,
    /// eps_j = z_j + 1/z_j
    pub energies: Vec<C64>,
    /// relative residual of the palindromic polynomial at z_j
    pub residuals: Vec<f64>,
    pub regime: Regime,
}

impl BetheSpectrum {
    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }

    pub fn max_circle_defect(&self) -> f64 {
        self.roots.iter().fold(0.0, |m, z| m.max((z.norm() - 1.0).abs()))
    }
}

/// Representative root of z^2 - eps z + 1 = 0: k in (0, pi] on the circle,
/// otherwise positive imaginary part of z, otherwise |z| >= 1.
pub fn root_from_energy(eps: C64) -> C64 {
    let d = (eps * eps - 4.0).sqrt();
    let z1 = (eps + d) / 2.0;
    let z2 = (eps - d) / 2.0;
    if (z1.im - z2.im).abs() > 1e-14 {
        return if z1.im > z2.im { z1 } else { z2 };
    }
    if z1.norm() >= z2.norm() {
        z1
    } else {
        z2
    }
}

/// Relative palindromic residual |f(z)| / sum |c_k| |z|^k.
pub fn palindromic_residual(f: &ReducedPolynomial, z: C64) -> f64 {
    let num = f.eval(z).norm();
    let r = z.norm();
    let den: f64 = f.coeffs.iter().enumerate().map(|(k, c)| c.norm() * r.powi(k as i32)).sum();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Roots of a monic-normalisable polynomial via companion eigenvalues.
pub fn companion_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let mut c: Vec<C64> = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|z| z.norm() == 0.0).unwrap_or(false) {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[d];
    let mut comp = CMat::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = re(1.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lead;
    }
    eigenvalues(&comp)
}

fn newton_polish(sites: usize, alpha: C64, beta: C64, eps: C64) -> C64 {
    let mut x = eps;
    let (mut fx, _) = eval_f(sites, alpha, beta, x);
    for _ in 0..3 {
        let (f, df) = eval_f(sites, alpha, beta, x);
        if df.norm() == 0.0 {
            break;
        }
        let y = x - f / df;
        let (fy, _) = eval_f(sites, alpha, beta, y);
        if fy.norm() < fx.norm() {
            x = y;
            fx = fy;
        } else {
            break;
        }
    }
    x
}

fn sort_key(k: C64) -> (f64, f64) {
    (k.re, k.im)
}

fn assemble(sites: usize, alpha: C64, beta: C64, mut eps: Vec<C64>) -> BetheSpectrum {
    let f = build_palindromic_general(sites, alpha, beta);
    let mut rows: Vec<(C64, C64, C64, f64)> = eps
        .drain(..)
        .map(|e| {
            let z = root_from_energy(e);
            let k = -I * z.ln();
            (z, k, e, palindromic_residual(&f, z))
        })
        .collect();
    rows.sort_by(|a, b| {
        let (ka, kb) = (sort_key(a.1), sort_key(b.1));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let on = rows.iter().all(|r| (r.0.norm() - 1.0).abs() < 1e-8);
    BetheSpectrum {
        sites,
        alpha,
        beta,
        roots: rows.iter().map(|r| r.0).collect(),
        momenta: rows.iter().map(|r| r.1).collect(),
        energies: rows.iter().map(|r| r.2).collect(),
        residuals: rows.iter().map(|r| r.3).collect(),
        regime: if on { Regime::OnCircle } else { Regime::OffCircle },
    }
}

/// Solve a polynomial in eps (general characteristic or exact reduced form).
pub fn solve_roots(poly: &ReducedPolynomial) -> Result<BetheSpectrum> {
    if poly.variable != PolyVariable::Epsilon {
        return Err(invalid("solve_roots expects a polynomial in eps"));
    }
    let (m, a, b) = (poly.sites, poly.alpha, poly.beta);
    let mut eps: Vec<C64> = if poly.even_only {
        // substitute w = eps^2 to halve the degree
        let w: Vec<C64> = poly.coeffs.iter().step_by(2).copied().collect();
        let mut out = Vec::new();
        for r in companion_roots(&w)? {
            let s = r.sqrt();
            out.push(s);
            out.push(-s);
        }
        out
    } else {
        companion_roots(&poly.coeffs)?
    };
    if poly.zero_mode_removed {
        eps.push(ZERO);
    }
    if eps.len() != m {
        return Err(Error::Validation(alloc::format!("expected {} roots, found {}", m, eps.len())));
    }
    let eps: Vec<C64> = eps
        .into_iter()
        .map(|e| if e == ZERO { e } else { newton_polish(m, a, b, e) })
        .collect();
    let spec = assemble(m, a, b, eps);
    let worst = spec.worst_residual();
    if !(worst <= ROOT_TOL) {
        return Err(Error::RootResidual { worst });
    }
    Ok(spec)
}

/// Single-particle spectrum for a Hamiltonian spec (variants H, Hg, Hprime share it).
pub fn spectrum_for(spec: &HamiltonianSpec) -> Result<BetheSpectrum> {
    spec.validate()?;
    let (a, b) = spec.fields();
    if let Some((g, theta)) = spec.boundary.polar(1e-12) {
        if spec.sites > 24 {
            return trig_spectrum(spec.sites, g, theta);
        }
        if theta.cos().abs() < 1e-15 {
            let mut p = build_reduced_f(spec.sites, g)?;
            // keep the sign of alpha for theta = 3 pi / 2
            p.alpha = a;
            p.beta = b;
            return solve_roots(&p);
        }
    }
    solve_roots(&build_characteristic(spec.sites, a, b))
}

// ---------------------------------------------------------- trigonometric form

/// phi(k) = sin((M+1)k) + rho sin(Mk) + s sin((M-1)k) = sin(k) F(2 cos k).
pub fn trig_phi(sites: usize, rho: f64, s: f64, k: f64) -> f64 {
    let m = sites as f64;
    ((m + 1.0) * k).sin() + rho * (m * k).sin() + s * ((m - 1.0) * k).sin()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
        if (b - a).abs() < 1e-16 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Quasi-momenta on (0, pi) for real rho = alpha + beta and s = alpha beta,
/// by bracketing on a grid. Tangent (double) roots are picked up from grid
/// points or local minima where |phi| drops to round-off level without a sign
/// change. Returned with multiplicity, ascending.
pub fn trig_momenta(sites: usize, rho: f64, s: f64) -> Result<Vec<f64>> {
    let f = |k: f64| trig_phi(sites, rho, s, k);
    let absf = |k: f64| f(k).abs();
    let scale = 1.0 + rho.abs() + s.abs();
    let tiny = |v: f64| v.abs() < 1e-12 * scale;
    let neg = |v: f64| v < 0.0;
    let mut refine = 8usize;
    loop {
        let n = refine * (sites + 1);
        let h = PI / n as f64;
        let grid: Vec<(f64, f64)> = (1..n).map(|i| (i as f64 * h, f(i as f64 * h))).collect();
        let len = grid.len();
        let mut roots: Vec<f64> = Vec::new();
        let mut i = 0;
        while i < len {
            if tiny(grid[i].1) {
                let mut j = i;
                while j + 1 < len && tiny(grid[j + 1].1) {
                    j += 1;
                }
                match (i.checked_sub(1).map(|l| grid[l]), grid.get(j + 1).copied()) {
                    (Some(l), Some(r)) if neg(l.1) == neg(r.1) => {
                        let k = golden_min(&absf, l.0, r.0);
                        roots.push(k);
                        roots.push(k);
                    }
                    (Some(l), Some(r)) => roots.push(bisect(&f, l.0, r.0)),
                    _ => roots.push(0.5 * (grid[i].0 + grid[j].0)),
                }
                i = j + 1;
                continue;
            }
            if i + 1 < len && !tiny(grid[i + 1].1) && neg(grid[i].1) != neg(grid[i + 1].1) {
                roots.push(bisect(&f, grid[i].0, grid[i + 1].0));
            }
            i += 1;
        }
        if roots.len() < sites {
            for w in grid.windows(3) {
                let (a, b, c) = (w[0], w[1], w[2]);
                if tiny(a.1) || tiny(b.1) || tiny(c.1) {
                    continue;
                }
                let same = neg(a.1) == neg(b.1) && neg(b.1) == neg(c.1);
                if same && b.1.abs() < a.1.abs() && b.1.abs() <= c.1.abs() {
                    let k = golden_min(&absf, a.0, c.0);
                    if absf(k) < 1e-9 * scale {
                        roots.push(k);
                        roots.push(k);
                    }
                }
            }
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        if roots.len() == sites {
            return Ok(roots);
        }
        if refine >= 512 {
            return Err(Error::Validation(alloc::format!(
                "trigonometric bracketing found {} of {} roots on the unit circle",
                roots.len(),
                sites
            )));
        }
        refine *= 4;
    }
}

/// Spectrum on the unit circle from the trigonometric form (alpha = conj(beta)).
pub fn trig_spectrum(sites: usize, g: f64, theta: f64) -> Result<BetheSpectrum> {
    let alpha = C64::from_polar(g, theta);
    let ks = trig_momenta(sites, 2.0 * g * theta.cos(), g * g)?;
    let eps = ks.iter().map(|&k| re(2.0 * k.cos())).collect();
    Ok(assemble(sites, alpha, alpha.conj(), eps))
}

// --------------------------------------------------------------- many-body

fn variant_shift(spec: &HamiltonianSpec) -> Result<(C64, C64)> {
    // returns (constant, extra one-particle shift) so that E(S) = const + sum_{j in S} (-eps_j + shift)
    let (a, b) = spec.fields();
    match spec.variant {
        Variant::H | Variant::Hg => Ok((-(a + b) / 2.0, ZERO)),
        Variant::Hprime => Ok((-(a + b) / 2.0 + (a + b) * (spec.sites as f64) / 2.0, -(a + b))),
        _ => Err(invalid("many-body spectrum from Bethe roots covers variants H, Hg, Hprime")),
    }
}

/// Energies E(S) for every subset S of modes, indexed by the subset bitmask.
pub fn many_body_energies(spec: &HamiltonianSpec, sp: &BetheSpectrum) -> Result<Vec<C64>> {
    if sp.sites != spec.sites {
        return Err(invalid("spectrum and spec disagree on M"));
    }
    if spec.sites > 24 {
        return Err(Error::Resource { requested: 1 << spec.sites, cap: 1 << 24 });
    }
    let (c, shift) = variant_shift(spec)?;
    let m = spec.sites;
    let mut out = vec![c; 1 << m];
    for mask in 1usize..(1 << m) {
        let j = mask.trailing_zeros() as usize;
        out[mask] = out[mask & (mask - 1)] - sp.energies[j] + shift;
    }
    Ok(out)
}

/// Sorted (by real then imaginary part) many-body spectrum.
pub fn many_body_spectrum(spec: &HamiltonianSpec, sp: &BetheSpectrum) -> Result<Vec<C64>> {
    let mut e = many_body_energies(spec, sp)?;
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(e)
}

/// Groundstate energy: every mode with Re eps > 0 filled, zero modes left empty.
pub fn groundstate_energy(sp: &BetheSpectrum) -> f64 {
    let c = -(sp.alpha + sp.beta).re / 2.0;
    c - sp.energies.iter().filter(|e| e.re > 0.0).map(|e| e.re).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub f_inf: f64,
    pub f_s: f64,
    pub c_eff: f64,
    /// coefficient of 1/M^2
    pub d2: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundstateScan {
    pub g: f64,
    pub theta: f64,
    pub table: Vec<(usize, f64)>,
    pub fit: ScalingFit,
}

/// Weighted (by M^2) least-squares fit of E0 = 2M f_inf + f_s - pi c/(12M) + d/M^2.
pub fn fit_scaling(table: &[(usize, f64)]) -> Result<ScalingFit> {
    if table.len() < 5 {
        return Err(invalid("scaling fit needs at least five chain lengths"));
    }
    let n = table.len();
    let mut a = DMatrix::<f64>::zeros(n, 4);
    let mut y = DVector::<f64>::zeros(n);
    for (r, &(m, e)) in table.iter().enumerate() {
        let mf = m as f64;
        let w = mf; // sqrt of the weight M^2
        a[(r, 0)] = w * 2.0 * mf;
        a[(r, 1)] = w;
        a[(r, 2)] = w * (-PI / (12.0 * mf));
        a[(r, 3)] = w / (mf * mf);
        y[r] = w * e;
    }
    // column scaling for conditioning
    let mut scale = [0.0f64; 4];
    for c in 0..4 {
        scale[c] = a.column(c).norm();
        if scale[c] == 0.0 {
            return Err(invalid("degenerate scaling fit"));
        }
        let s = scale[c];
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-13 * smax {
        return Err(invalid("degenerate scaling fit (range too small)"));
    }
    let x = svd.solve(&y, 1e-15).map_err(|e| invalid(e))?;
    let p: Vec<f64> = (0..4).map(|c| x[c] / scale[c]).collect();
    let mut ss = 0.0;
    for &(m, e) in table {
        let mf = m as f64;
        let model = 2.0 * mf * p[0] + p[1] - PI * p[2] / (12.0 * mf) + p[3] / (mf * mf);
        ss += (model - e) * (model - e);
    }
    Ok(ScalingFit { f_inf: p[0], f_s: p[1], c_eff: p[2], d2: p[3], rms: (ss / n as f64).sqrt() })
}

/// Groundstate energies over chain lengths (trigonometric roots) plus the fit.
pub fn groundstate_scan(g: f64, theta: f64, sites: &[usize]) -> Result<GroundstateScan> {
    let mut table = Vec::with_capacity(sites.len());
    for &m in sites {
        if m < 2 {
            return Err(invalid("chain lengths must be >= 2"));
        }
        let sp = trig_spectrum(m, g, theta)?;
        table.push((m, groundstate_energy(&sp)));
    }
    let fit = fit_scaling(&table)?;
    Ok(GroundstateScan { g, theta, table, fit })
}

/// Default fit window: M in [64, 1024] with the given parity, step 16.
pub fn default_window(odd: bool) -> Vec<usize> {
    (64..=1024).step_by(16).map(|m| if odd { m + 1 } else { m }).filter(|&m| m <= 1024).collect()
}

// -------------------------------------------------------- approximations

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxRegime {
    NearZero,
    NearOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxEnergies {
    pub values: Vec<f64>,
    /// set when g lies far from the expansion point
    pub warning: bool,
}

/// Perturbative single-particle energies at theta = pi/2 around g = 0 or g = 1.
pub fn approx_energies(sites: usize, g: f64, regime: ApproxRegime) -> ApproxEnergies {
    let m = sites as f64;
    let g2 = g * g;
    match regime {
        ApproxRegime::NearZero => {
            let values = (1..=sites)
                .map(|k| {
                    let t = PI * k as f64 / (m + 1.0);
                    2.0 * t.cos() - 2.0 * g2 * t.sin() * (2.0 * t).sin() / (m + 1.0)
                })
                .collect();
            ApproxEnergies { values, warning: g2 > 0.25 }
        }
        ApproxRegime::NearOne => {
            let mut values = Vec::with_capacity(sites);
            for k in 1..sites {
                if sites % 2 == 0 && 2 * k == sites {
                    continue;
                }
                let t = PI * k as f64 / m;
                values.push(2.0 * t.cos() + (1.0 - g2) * t.sin() * t.tan() / m);
            }
            if sites % 2 == 0 {
                let e = edge_pair(sites, g);
                values.push(e);
                values.push(-e);
            } else {
                values.push(0.0);
            }
            ApproxEnergies { values, warning: (1.0 - g2).abs() > 0.25 }
        }
    }
}

/// The pair +-eps_{M/2} for even M near g = 1.
pub fn edge_pair(sites: usize, g: f64) -> f64 {
    let m = sites as f64;
    let g2 = g * g;
    let v = 2.0 * (1.0 - g2) / (m * (m + 2.0 - g2 * (m - 2.0)));
    if v <= 0.0 {
        0.0
    } else {
        2.0 * v.sqrt()
    }
}

// ------------------------------------------------------- dense cross-check

/// Eigenvalues of the Hamiltonian by dense diagonalisation, sector by sector.
pub fn dense_many_body(spec: &HamiltonianSpec, limits: &crate::chain::Limits) -> Result<Vec<Vec<C64>>> {
    (0..=spec.sites)
        .map(|n| {
            let h = crate::chain::build_hamiltonian_sector(spec, n, limits)?;
            eigenvalues(&h.matrix)
        })
        .collect()
}

/// Worst deviation between Bethe and dense many-body spectra, compared per sector.
pub fn cross_validate_many_body(spec: &HamiltonianSpec, sp: &BetheSpectrum, limits: &crate::chain::Limits, tol: f64) -> Result<f64> {
    let e = many_body_energies(spec, sp)?;
    let dense = dense_many_body(spec, limits)?;
    let mut worst: f64 = 0.0;
    for (n, d) in dense.iter().enumerate() {
        let bethe: Vec<C64> = (0usize..1 << spec.sites).filter(|s| s.count_ones() as usize == n).map(|s| e[s]).collect();
        worst = worst.max(crate::linalg::multiset_distance(&bethe, d));
    }
    if worst > tol {
        return Err(Error::CrossValidation { what: "Bethe vs dense many-body spectrum".into(), worst });
    }
    Ok(worst)
}
