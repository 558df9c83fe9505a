//! Representations of U_q(sl2) at q = +-i, gl(1|1), U_q(gl(1|1)), the
//! extended Temperley-Lieb generators and the Hecke algebra on the spin chain,
//! plus rank-based Jordan structure analysis.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::chain::{build_hamiltonian, mode_operator, sigma_z_string, symmetry_ops, Basis, DenseOperator, HamiltonianSpec, Limits, Variant};
use crate::error::{invalid, Error, Result};
use crate::linalg::{anticomm, cluster, comm, eigenvalues, identity, max_abs, max_abs_diff, mean, rank, re, CMat, C64, I};
use crate::metric::{MetricBundle, MetricPart};

/// Below this |Z| a normalisation 1/sqrt(Z) counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;
pub const CLUSTER_TOL: f64 = 1e-7;
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraTag {
    UqSl2,
    Gl11,
    UqGl11,
    TemperleyLieb,
    Hecke,
}

impl AlgebraTag {
    pub fn name(self) -> &'static str {
        match self {
            AlgebraTag::UqSl2 => "Uq(sl2)",
            AlgebraTag::Gl11 => "gl(1|1)",
            AlgebraTag::UqGl11 => "Uq(gl(1|1))",
            AlgebraTag::TemperleyLieb => "TL",
            AlgebraTag::Hecke => "Hecke",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepParams {
    pub sites: usize,
    pub g: f64,
    pub theta: f64,
    pub q: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    pub residual: f64,
}

fn rel(name: impl Into<String>, residual: f64) -> Relation {
    Relation { name: name.into(), residual }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraRep {
    pub tag: AlgebraTag,
    pub params: RepParams,
    pub odd_sites: bool,
    pub generators: BTreeMap<String, DenseOperator>,
    /// defining relations and their residuals
    pub relations: Vec<Relation>,
    /// identities that are reported but are not part of the algebra
    pub diagnostics: Vec<Relation>,
    /// scalar value of the central element, where there is one
    pub central: Option<C64>,
}

impl AlgebraRep {
    pub fn generator(&self, name: &str) -> Option<&CMat> {
        self.generators.get(name).map(|d| &d.matrix)
    }

    pub fn worst_relation(&self) -> f64 {
        self.relations.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    /// The Hamiltonian whose commutant the rep is claimed to sit in.
    pub fn natural_hamiltonian(&self, limits: &Limits) -> Result<CMat> {
        let p = self.params;
        let m = p.sites;
        let spec = match self.tag {
            AlgebraTag::UqGl11 | AlgebraTag::Hecke => {
                let alpha = -p.q.inv();
                HamiltonianSpec::general(m, alpha, alpha.inv()).with_variant(Variant::Hprime)
            }
            _ if !self.odd_sites && self.tag != AlgebraTag::TemperleyLieb => {
                let a = C64::new(0.0, p.g);
                HamiltonianSpec::general(m, a, -a).with_variant(Variant::HgTruncated)
            }
            _ => HamiltonianSpec::polar(m, p.g, PI / 2.0),
        };
        Ok(build_hamiltonian(&spec, limits)?.matrix)
    }

    fn insert(&mut self, name: &str, m: CMat) {
        let sites = self.params.sites;
        self.generators.insert(name.into(), DenseOperator { basis: Basis::Full { sites }, matrix: m });
    }

    fn new(tag: AlgebraTag, params: RepParams) -> Self {
        AlgebraRep {
            tag,
            params,
            odd_sites: params.sites % 2 == 1,
            generators: BTreeMap::new(),
            relations: Vec::new(),
            diagnostics: Vec::new(),
            central: None,
        }
    }
}

fn is_half_pi(theta: f64) -> bool {
    (theta - PI / 2.0).abs() < 1e-12
}

fn check_sites(sites: usize) -> Result<()> {
    if sites < 2 {
        return Err(invalid("chain needs at least two sites"));
    }
    if sites > 12 {
        return Err(invalid("algebra audits work on the full space, M <= 12"));
    }
    Ok(())
}

/// Coefficient vectors of U = sum sin(pi x/2) c_x and V = sum cos(pi x/2) c_x.
pub fn uv_coefficients(sites: usize) -> (Vec<f64>, Vec<f64>) {
    let u = (1..=sites).map(|x| if x % 2 == 1 { if (x - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 }).collect();
    let v = (1..=sites).map(|x| if x % 2 == 0 { if (x / 2) % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 }).collect();
    (u, v)
}

/// U and V on the full space.
pub fn uv_operators(sites: usize, limits: &Limits) -> Result<(CMat, CMat)> {
    let (u, v) = uv_coefficients(sites);
    let u = mode_operator(&u.iter().map(|&x| re(x)).collect::<Vec<_>>(), false, limits)?;
    let v = mode_operator(&v.iter().map(|&x| re(x)).collect::<Vec<_>>(), false, limits)?;
    Ok((u, v))
}

/// Scalar value of the gl(1|1) central element at theta = pi/2.
pub fn gl11_central(sites: usize, g: f64) -> f64 {
    let m = sites as f64;
    if sites % 2 == 1 {
        (m + 1.0) / 2.0 - g * g * (m - 1.0) / 2.0
    } else {
        m * (1.0 - g * g) / 2.0
    }
}

/// Coupling at which the central element vanishes.
pub fn exceptional_coupling(sites: usize) -> f64 {
    if sites % 2 == 1 {
        ((sites as f64 + 1.0) / (sites as f64 - 1.0)).sqrt()
    } else {
        1.0
    }
}

fn i_pow(n: i64) -> C64 {
    match n.rem_euclid(4) {
        0 => re(1.0),
        1 => I,
        2 => re(-1.0),
        _ => -I,
    }
}

// ------------------------------------------------------------------ builders

pub fn build_rep(tag: AlgebraTag, sites: usize, g: f64, theta: f64, limits: &Limits) -> Result<AlgebraRep> {
    match tag {
        AlgebraTag::Gl11 => gl11_rep(sites, g, theta, limits),
        AlgebraTag::UqSl2 => uqsl2_rep(sites, g, theta, false, limits),
        AlgebraTag::TemperleyLieb => tl_rep(sites, g, theta, limits),
        AlgebraTag::Hecke => {
            if (g - 1.0).abs() > 1e-12 {
                return Err(invalid("the Hecke representation is built on the unit circle, g = 1"));
            }
            hecke_rep(sites, theta, limits)
        }
        AlgebraTag::UqGl11 => {
            if (g - 1.0).abs() > 1e-12 {
                return Err(invalid("the Uq(gl(1|1)) representation is built on the unit circle, g = 1"));
            }
            uqgl11_rep(sites, theta, limits)
        }
    }
}

fn need_half_pi(theta: f64) -> Result<()> {
    if !is_half_pi(theta) {
        return Err(invalid("representation defined for theta = pi/2 only"));
    }
    Ok(())
}

/// X+ = U* - i g V*, X- = U - i g V, Y = S^z, Z = scalar.
pub fn gl11_rep(sites: usize, g: f64, theta: f64, limits: &Limits) -> Result<AlgebraRep> {
    check_sites(sites)?;
    need_half_pi(theta)?;
    let (u, v) = uv_coefficients(sites);
    let w: Vec<C64> = u.iter().zip(&v).map(|(&a, &b)| C64::new(a, -g * b)).collect();
    let xp = mode_operator(&w, true, limits)?;
    let xm = mode_operator(&w, false, limits)?;
    let y = symmetry_ops(sites, limits)?.sz.matrix;
    let zv = gl11_central(sites, g);
    let dim = 1 << sites;
    let z = CMat::from_diagonal_element(dim, dim, re(zv));
    let mut rep = AlgebraRep::new(AlgebraTag::Gl11, RepParams { sites, g, theta, q: re(1.0) });
    rep.relations = vec_rel(&[
        ("[Y,X+] = X+", max_abs_diff(&comm(&y, &xp), &xp)),
        ("[Y,X-] = -X-", max_abs_diff(&comm(&y, &xm), &(-&xm))),
        ("[Z,Y] = 0", max_abs(&comm(&z, &y))),
        ("[Z,X+] = 0", max_abs(&comm(&z, &xp))),
        ("[Z,X-] = 0", max_abs(&comm(&z, &xm))),
        ("[X+,X-]+ = Z", max_abs_diff(&anticomm(&xp, &xm), &z)),
        ("(X+)^2 = 0", max_abs(&(&xp * &xp))),
        ("(X-)^2 = 0", max_abs(&(&xm * &xm))),
    ]);
    rep.central = Some(re(zv));
    rep.insert("X+", xp);
    rep.insert("X-", xm);
    rep.insert("Y", y);
    rep.insert("Z", z);
    Ok(rep)
}

fn vec_rel(items: &[(&str, f64)]) -> Vec<Relation> {
    items.iter().map(|&(n, r)| rel(n, r)).collect()
}

/// U_q(sl2) at q = i (or the parity-reflected even-M variant at q = -i).
pub fn uqsl2_rep(sites: usize, g: f64, theta: f64, pt_variant: bool, limits: &Limits) -> Result<AlgebraRep> {
    check_sites(sites)?;
    need_half_pi(theta)?;
    let odd = sites % 2 == 1;
    if pt_variant && odd {
        return Err(invalid("the parity-reflected variant exists for even M only"));
    }
    if g < 0.0 {
        return Err(invalid("g must be non-negative"));
    }
    let zv = gl11_central(sites, g);
    if zv.abs() < SINGULAR_TOL {
        return Err(Error::ExceptionalPoint(format!("normalisation sqrt(Z) vanishes at M = {}, g = {}", sites, g)));
    }
    if zv < 0.0 {
        return Err(invalid(format!("g = {} lies beyond the exceptional coupling {}", g, exceptional_coupling(sites))));
    }
    let m = sites as i64;
    let s = zv.sqrt();
    let (u, v) = uv_coefficients(sites);
    let string = sigma_z_string(sites, limits)?;
    let (q, kpow) = match (odd, pt_variant) {
        (true, _) => (I, m),
        (false, false) => (I, m - 1),
        (false, true) => (-I, 1 - m),
    };
    let k = string.scale(1.0).map(|z| z * i_pow(kpow));
    let kinv = string.map(|z| z * i_pow(-kpow));
    let (e_w, f_w): (Vec<C64>, Vec<C64>) = if pt_variant {
        // E = (V* + i g U*)/sqrt Z, F = -(g U - i V) K / sqrt Z
        (
            u.iter().zip(&v).map(|(&a, &b)| C64::new(b, g * a) / s).collect(),
            u.iter().zip(&v).map(|(&a, &b)| -C64::new(g * a, -b) / s).collect(),
        )
    } else {
        // E = (U* - i g V*)/sqrt Z, F = -(g V + i U) K / sqrt Z
        (
            u.iter().zip(&v).map(|(&a, &b)| C64::new(a, -g * b) / s).collect(),
            u.iter().zip(&v).map(|(&a, &b)| -C64::new(g * b, a) / s).collect(),
        )
    };
    let e = mode_operator(&e_w, true, limits)?;
    let f = mode_operator(&f_w, false, limits)? * &k;
    let dim = 1 << sites;
    let one = identity(dim);
    let q2 = q * q;
    let k2 = if odd { (-1.0f64).powi(sites as i32) } else { (-1.0f64).powi(sites as i32 - 1) };
    let mut rep = AlgebraRep::new(AlgebraTag::UqSl2, RepParams { sites, g, theta, q });
    rep.relations = vec_rel(&[
        ("K K^-1 = 1", max_abs_diff(&(&k * &kinv), &one)),
        ("K^-1 K = 1", max_abs_diff(&(&kinv * &k), &one)),
        ("K E = q^2 E K", max_abs_diff(&(&k * &e), &(&e * &k).map(|z| z * q2))),
        ("K F = q^-2 F K", max_abs_diff(&(&k * &f), &(&f * &k).map(|z| z / q2))),
        ("[E,F] = (K - K^-1)/(q - q^-1)", max_abs_diff(&comm(&e, &f), &(&k - &kinv).map(|z| z / (q - q.inv())))),
        ("E^2 = 0", max_abs(&(&e * &e))),
        ("F^2 = 0", max_abs(&(&f * &f))),
        ("K^2 = +-1", max_abs_diff(&(&k * &k), &one.scale(k2))),
    ]);
    rep.central = Some(re(zv));
    rep.insert("E", e);
    rep.insert("F", f);
    rep.insert("K", k);
    rep.insert("K^-1", kinv);
    Ok(rep)
}

/// One-particle matrix of e_x = c_x c*_{x+1} - c*_x c_{x+1} + i g (n_x - n_{x+1}).
fn tl_one_particle(sites: usize, x: usize, g: f64) -> CMat {
    let mut k = CMat::zeros(sites, sites);
    k[(x - 1, x)] = re(-1.0);
    k[(x, x - 1)] = re(-1.0);
    k[(x - 1, x - 1)] = C64::new(0.0, g);
    k[(x, x)] = C64::new(0.0, -g);
    k
}

/// Extended Temperley-Lieb generators e_1 .. e_{M-1}.
pub fn tl_generators(sites: usize, g: f64, limits: &Limits) -> Result<Vec<CMat>> {
    (1..sites).map(|x| crate::chain::bilinear_full(&tl_one_particle(sites, x, g), re(0.0), limits)).collect()
}

fn number_ops(sites: usize, limits: &Limits) -> Result<Vec<CMat>> {
    let dim = 1usize << sites;
    limits.check(dim)?;
    Ok((1..=sites)
        .map(|x| CMat::from_fn(dim, dim, |r, c| if r == c && crate::chain::is_up(sites, r, x) { re(1.0) } else { re(0.0) }))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TlAudit {
    pub sites: usize,
    pub g: f64,
    pub relations: Vec<Relation>,
}

impl TlAudit {
    pub fn worst(&self) -> f64 {
        self.relations.iter().fold(0.0, |m, r| m.max(r.residual))
    }
}

/// Checks the modified relations for e_x^2 and e_x e_{x+-1} e_x, commutation of
/// distant generators, and the q = i Temperley-Lieb relations at g = 1.
pub fn tl_relation_audit(sites: usize, g: f64, limits: &Limits) -> Result<TlAudit> {
    check_sites(sites)?;
    if sites < 3 {
        return Err(invalid("the audit needs M >= 3"));
    }
    let e = tl_generators(sites, g, limits)?;
    let n = number_ops(sites, limits)?;
    let dim = 1 << sites;
    let one = identity(dim);
    let gi = C64::new(0.0, g);
    let mut sq: f64 = 0.0;
    let mut braid: f64 = 0.0;
    let mut far: f64 = 0.0;
    for x in 0..sites - 1 {
        let (nx, ny) = (&n[x], &n[x + 1]);
        let rhs = ((&one - nx) * ny + nx * (&one - ny)).scale(1.0 - g * g);
        sq = sq.max(max_abs_diff(&(&e[x] * &e[x]), &rhs));
        let dn = nx - ny;
        for y in [x.wrapping_sub(1), x + 1] {
            if y >= sites - 1 {
                continue;
            }
            // n_{x+-1} - n_{x+1+-1} is n_y - n_{y+1} for the neighbour e_y
            let dm = &n[y] - &n[y + 1];
            let corr = (&dn * (&one + &dm * &dn)).map(|z| z * gi * (1.0 - g * g));
            let lhs = &e[x] * &e[y] * &e[x];
            braid = braid.max(max_abs_diff(&lhs, &(e[x].scale(g * g) + corr)));
        }
        for y in x + 2..sites - 1 {
            far = far.max(max_abs(&comm(&e[x], &e[y])));
        }
    }
    let mut relations = vec_rel(&[
        ("e_x^2 = (1-g^2)[(1-n_x)n_{x+1} + n_x(1-n_{x+1})]", sq),
        ("e_x e_{x+-1} e_x = g^2 e_x + ig(1-g^2)(n_x-n_{x+1})[1 + (n_{x+-1}-n_{x+1+-1})(n_x-n_{x+1})]", braid),
        ("e_x e_y = e_y e_x, |x-y| > 1", far),
    ]);
    if (g - 1.0).abs() < 1e-15 {
        let q = I;
        let mut tl_sq: f64 = 0.0;
        let mut tl_br: f64 = 0.0;
        for x in 0..sites - 1 {
            tl_sq = tl_sq.max(max_abs_diff(&(&e[x] * &e[x]), &e[x].map(|z| -z * (q + q.inv()))));
            for y in [x.wrapping_sub(1), x + 1] {
                if y < sites - 1 {
                    tl_br = tl_br.max(max_abs_diff(&(&e[x] * &e[y] * &e[x]), &e[x]));
                }
            }
        }
        relations.push(rel("e_x^2 = -(q + q^-1) e_x, q = i", tl_sq));
        relations.push(rel("e_x e_{x+-1} e_x = e_x", tl_br));
    }
    Ok(TlAudit { sites, g, relations })
}

pub fn tl_rep(sites: usize, g: f64, theta: f64, limits: &Limits) -> Result<AlgebraRep> {
    check_sites(sites)?;
    need_half_pi(theta)?;
    let audit = tl_relation_audit(sites, g, limits)?;
    let mut rep = AlgebraRep::new(AlgebraTag::TemperleyLieb, RepParams { sites, g, theta, q: I });
    rep.relations = audit.relations;
    for (x, e) in tl_generators(sites, g, limits)?.into_iter().enumerate() {
        rep.insert(&format!("e{}", x + 1), e);
    }
    Ok(rep)
}

/// [G, e_x + e_{x+1}] for G in {E, F} and x = 1, 3, 5, ... (up to M-2 for odd
/// M, M-3 for even M). The parity-reflected even-M rep (q = -i) pairs the
/// mirrored generators, x = 2, 4, ..., M-2.
pub fn tl_pair_commutators(sl2: &AlgebraRep, tl: &AlgebraRep) -> Vec<Relation> {
    let m = sl2.params.sites;
    let mirrored = m % 2 == 0 && sl2.params.q == -I;
    let (first, last) = match (m % 2 == 1, mirrored) {
        (true, _) => (1, m - 2),
        (false, false) => (1, m.saturating_sub(3)),
        (false, true) => (2, m - 2),
    };
    let mut out = Vec::new();
    for name in ["E", "F"] {
        let Some(gen) = sl2.generator(name) else { continue };
        let mut x = first;
        while x <= last {
            if let (Some(a), Some(b)) = (tl.generator(&format!("e{}", x)), tl.generator(&format!("e{}", x + 1))) {
                out.push(rel(format!("[{}, e{} + e{}]", name, x, x + 1), max_abs(&comm(gen, &(a + b)))));
            }
            x += 2;
        }
    }
    out
}

/// Commutator norms of every generator with `hamiltonian`.
pub fn check_symmetry(rep: &AlgebraRep, hamiltonian: &CMat) -> Result<Vec<Relation>> {
    let dim = 1usize << rep.params.sites;
    if hamiltonian.nrows() != dim {
        return Err(invalid("Hamiltonian and representation disagree on M"));
    }
    Ok(rep.generators.iter().map(|(n, g)| rel(format!("[H, {}]", n), max_abs(&comm(hamiltonian, &g.matrix)))).collect())
}

// ------------------------------------------------------------------ Hecke

/// b_i = c_i c*_{i+1} - c*_i c_{i+1} - alpha^-1 n_i - alpha (n_{i+1} - 1) with
/// q = -alpha^-1; alpha = -e^{-i theta} puts q = e^{i theta} on the circle.
pub fn hecke_rep(sites: usize, theta: f64, limits: &Limits) -> Result<AlgebraRep> {
    let alpha = -C64::from_polar(1.0, -theta);
    let mut rep = hecke_rep_general(sites, alpha, limits)?;
    rep.params.theta = theta;
    Ok(rep)
}

pub fn hecke_rep_general(sites: usize, alpha: C64, limits: &Limits) -> Result<AlgebraRep> {
    check_sites(sites)?;
    if alpha.norm() < 1e-12 || !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(invalid("q = -1/alpha is undefined"));
    }
    let q = -alpha.inv();
    let mut b = Vec::new();
    let mut binv = Vec::new();
    for i in 1..sites {
        let mut k = CMat::zeros(sites, sites);
        k[(i - 1, i)] = re(-1.0);
        k[(i, i - 1)] = re(-1.0);
        let mut kb = k.clone();
        kb[(i - 1, i - 1)] = -alpha.inv();
        kb[(i, i)] = -alpha;
        b.push(crate::chain::bilinear_full(&kb, alpha, limits)?);
        let mut ki = k;
        ki[(i - 1, i - 1)] = -alpha.inv();
        ki[(i, i)] = -alpha;
        binv.push(crate::chain::bilinear_full(&ki, alpha.inv(), limits)?);
    }
    let dim = 1 << sites;
    let one = identity(dim);
    let d = q - q.inv();
    let (mut inv, mut braid, mut far, mut quad, mut quad_printed): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..sites - 1 {
        inv = inv.max(max_abs_diff(&(&b[i] * &binv[i]), &one)).max(max_abs_diff(&(&binv[i] * &b[i]), &one));
        let b2 = &b[i] * &b[i];
        quad = quad.max(max_abs_diff(&(&b2 - b[i].map(|z| z * d)), &one));
        quad_printed = quad_printed.max(max_abs_diff(&(&b2 + b[i].map(|z| z * d)), &one));
        if i + 1 < sites - 1 {
            braid = braid.max(max_abs_diff(&(&b[i] * &b[i + 1] * &b[i]), &(&b[i + 1] * &b[i] * &b[i + 1])));
        }
        for j in i + 2..sites - 1 {
            far = far.max(max_abs(&comm(&b[i], &b[j])));
        }
    }
    let hprime = build_hamiltonian(&HamiltonianSpec::general(sites, alpha, alpha.inv()).with_variant(Variant::Hprime), limits)?.matrix;
    let sum = b.iter().zip(&binv).fold(CMat::zeros(dim, dim), |acc, (x, y)| acc + (x + y).scale(0.5));
    let (g, th) = alpha.to_polar();
    let mut rep = AlgebraRep::new(AlgebraTag::Hecke, RepParams { sites, g, theta: th, q });
    rep.relations = vec_rel(&[
        ("b_i b_i^-1 = b_i^-1 b_i = 1", inv),
        ("b_i b_{i+1} b_i = b_{i+1} b_i b_{i+1}", braid),
        ("b_i b_j = b_j b_i, |i-j| > 1", far),
        ("b_i^2 - (q - q^-1) b_i = 1", quad),
    ]);
    rep.diagnostics = vec_rel(&[
        ("b_i^2 + (q - q^-1) b_i = 1 (printed sign)", quad_printed),
        ("H' = sum (b_i + b_i^-1)/2", max_abs_diff(&hprime, &sum)),
    ]);
    for (i, (x, y)) in b.into_iter().zip(binv).enumerate() {
        rep.insert(&format!("b{}", i + 1), x);
        rep.insert(&format!("b{}^-1", i + 1), y);
    }
    Ok(rep)
}

// --------------------------------------------------------------- Uq(gl(1|1))

/// Zero-mode wave function phi_theta(x) = sqrt(sin theta / sin M theta) e^{i(x-(M+1)/2) theta}.
pub fn zero_mode_wavefunction(sites: usize, theta: f64) -> Result<Vec<C64>> {
    let s = theta.sin();
    if s.abs() < 1e-12 {
        return Err(invalid("theta must not be a multiple of pi"));
    }
    let ratio = (sites as f64 * theta).sin() / s;
    if ratio.abs() < SINGULAR_TOL {
        return Err(Error::ExceptionalPoint(format!("sin(M theta)/sin(theta) vanishes at M = {}, theta = {}", sites, theta)));
    }
    let norm = C64::new(1.0 / ratio, 0.0).sqrt();
    let c = (sites as f64 + 1.0) / 2.0;
    Ok((1..=sites).map(|x| norm * C64::from_polar(1.0, (x as f64 - c) * theta)).collect())
}

/// X+- = sum_x q^{x-(M+1)/2} c*_x (c_x), Y = q^{S^z}, Z = q^M with q = e^{i theta}.
pub fn uqgl11_rep(sites: usize, theta: f64, limits: &Limits) -> Result<AlgebraRep> {
    let q = C64::from_polar(1.0, theta);
    let mut rep = uqgl11_rep_general(sites, q, limits)?;
    rep.params.theta = theta;
    // zero mode checks against H and H'
    let phi = zero_mode_wavefunction(sites, theta)?;
    let cstar = mode_operator(&phi, true, limits)?;
    let alpha = -q.inv();
    let h = build_hamiltonian(&HamiltonianSpec::general(sites, alpha, alpha.inv()), limits)?.matrix;
    let hp = build_hamiltonian(&HamiltonianSpec::general(sites, alpha, alpha.inv()).with_variant(Variant::Hprime), limits)?.matrix;
    let ch = comm(&h, &cstar);
    let c2 = -2.0 * theta.cos();
    rep.relations.push(rel("[H, c*_theta] = -2 cos(theta) c*_theta", max_abs_diff(&ch, &cstar.scale(c2))));
    rep.relations.push(rel("[H', c*_theta] = 0", max_abs(&comm(&hp, &cstar))));
    let bilinear: C64 = phi.iter().map(|z| z * z).sum();
    rep.diagnostics.push(rel("sum phi^2 = 1", (bilinear - re(1.0)).norm()));
    rep.insert("c*_theta", cstar);
    Ok(rep)
}

/// The same generators for arbitrary q (relation checks off the circle).
pub fn uqgl11_rep_general(sites: usize, q: C64, limits: &Limits) -> Result<AlgebraRep> {
    check_sites(sites)?;
    let d = q - q.inv();
    if d.norm() < 1e-12 || q.norm() < 1e-12 {
        return Err(invalid("q - q^-1 must be invertible"));
    }
    let m = sites as f64;
    let c = (m + 1.0) / 2.0;
    let w: Vec<C64> = (1..=sites).map(|x| (q.ln() * (x as f64 - c)).exp()).collect();
    let xp = mode_operator(&w, true, limits)?;
    let xm = mode_operator(&w, false, limits)?;
    let sz = symmetry_ops(sites, limits)?.sz.matrix;
    let dim = 1 << sites;
    let y = CMat::from_diagonal(&sz.diagonal().map(|s| (q.ln() * s.re).exp()));
    let yinv = CMat::from_diagonal(&sz.diagonal().map(|s| (-q.ln() * s.re).exp()));
    let one = identity(dim);
    let zq = (q.ln() * m).exp();
    let z = one.map(|v| v * zq);
    let zinv = one.map(|v| v / zq);
    let rhs = (&z - &zinv).map(|v| v / d);
    let mut rep = AlgebraRep::new(AlgebraTag::UqGl11, RepParams { sites, g: 1.0 / q.norm(), theta: q.arg(), q });
    rep.relations = vec_rel(&[
        ("Z Z^-1 = 1", max_abs_diff(&(&z * &zinv), &one)),
        ("Y Y^-1 = 1", max_abs_diff(&(&y * &yinv), &one)),
        ("Y X+ Y^-1 = q X+", max_abs_diff(&(&y * &xp * &yinv), &xp.map(|v| v * q))),
        ("Y X- Y^-1 = q^-1 X-", max_abs_diff(&(&y * &xm * &yinv), &xm.map(|v| v / q))),
        ("[Y,Z] = 0", max_abs(&comm(&y, &z))),
        ("[Z,X+] = 0", max_abs(&comm(&z, &xp))),
        ("[Z,X-] = 0", max_abs(&comm(&z, &xm))),
        ("[X+,X+]+ = 0", max_abs(&anticomm(&xp, &xp))),
        ("[X-,X-]+ = 0", max_abs(&anticomm(&xm, &xm))),
        ("[X+,X-]+ = (Z - Z^-1)/(q - q^-1)", max_abs_diff(&anticomm(&xp, &xm), &rhs)),
    ]);
    // the printed exponent (M+1)/2 - x, kept as a diagnostic against H'
    let alpha = -q.inv();
    let hp = build_hamiltonian(&HamiltonianSpec::general(sites, alpha, alpha.inv()).with_variant(Variant::Hprime), limits)?.matrix;
    let w_printed: Vec<C64> = (1..=sites).map(|x| (q.ln() * (c - x as f64)).exp()).collect();
    let xp_printed = mode_operator(&w_printed, true, limits)?;
    rep.diagnostics.push(rel("[H', X+] with exponent (M+1)/2 - x", max_abs(&comm(&hp, &xp_printed))));
    rep.central = Some(zq);
    rep.insert("X+", xp);
    rep.insert("X-", xm);
    rep.insert("Y", y);
    rep.insert("Y^-1", yinv);
    rep.insert("Z", z);
    rep.insert("Z^-1", zinv);
    Ok(rep)
}

/// Residuals of eta X+ = (X-)* eta and eta X- = (X+)* eta.
pub fn metric_star_structure_check(rep: &AlgebraRep, metric: &MetricBundle, limits: &Limits) -> Result<Vec<Relation>> {
    let (Some(xp), Some(xm)) = (rep.generator("X+"), rep.generator("X-")) else {
        return Err(invalid("star structure is defined for the gl(1|1) type representations"));
    };
    if metric.sites() != rep.params.sites {
        return Err(invalid("metric and representation disagree on M"));
    }
    let eta = metric.assemble(MetricPart::Eta, limits)?.matrix;
    Ok(vec_rel(&[
        ("eta X+ = (X-)* eta", max_abs_diff(&(&eta * xp), &(xm.adjoint() * &eta))),
        ("eta X- = (X+)* eta", max_abs_diff(&(&eta * xm), &(xp.adjoint() * &eta))),
    ]))
}

// ------------------------------------------------------------------ Jordan

#[derive(Debug, Clone, PartialEq)]
pub struct JordanCluster {
    pub eigenvalue: C64,
    pub algebraic: usize,
    pub geometric: usize,
    /// block sizes, descending
    pub blocks: Vec<usize>,
    /// rank of (A - lambda)^k for k = 1, 2, ...
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanReport {
    pub dim: usize,
    pub clusters: Vec<JordanCluster>,
    pub diagonalizable: bool,
    pub warnings: Vec<String>,
}

impl JordanReport {
    pub fn cluster_near(&self, z: C64, tol: f64) -> Option<&JordanCluster> {
        self.clusters.iter().find(|c| (c.eigenvalue - z).norm() <= tol)
    }
}

fn shifted_power_ranks(a: &CMat, lambda: C64, kmax: usize, rank_tol: f64) -> Vec<usize> {
    let n = a.nrows();
    let shifted = a - identity(n).map(|v| v * lambda);
    let mut p = shifted.clone();
    let mut out = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        if k > 1 {
            p = &p * &shifted;
        }
        out.push(rank(&p, rank_tol));
    }
    out
}

/// Jordan structure from the ranks of (A - lambda)^k. Eigenvalues are first
/// clustered at `cluster_tol`; neighbouring clusters split by the ~eps^{1/k}
/// sensitivity of defective eigenvalues are merged when the rank of
/// (A - lambda)^a confirms an algebraic multiplicity of a.
pub fn jordan_analyze(op: &CMat, cluster_tol: f64, rank_tol: f64) -> Result<JordanReport> {
    let n = op.nrows();
    if n != op.ncols() {
        return Err(invalid("Jordan analysis needs a square matrix"));
    }
    if n == 0 {
        return Ok(JordanReport { dim: 0, clusters: Vec::new(), diagonalizable: true, warnings: Vec::new() });
    }
    let ev = eigenvalues(op)?;
    let scale = max_abs(op).max(1.0);
    let mut groups: Vec<Vec<usize>> = cluster(&ev, cluster_tol * scale);
    let verified = |idx: &[usize]| -> bool {
        let pts: Vec<C64> = idx.iter().map(|&i| ev[i]).collect();
        let lam = mean(&pts);
        let a = pts.len();
        let r = shifted_power_ranks(op, lam, a, rank_tol);
        r[a - 1] == n - a
    };
    // widen the merge radius step by step, keeping only rank-confirmed merges
    for radius in [1e-6, 1e-5, 1e-4, 1e-3] {
        let centres: Vec<C64> = groups.iter().map(|g| mean(&g.iter().map(|&i| ev[i]).collect::<Vec<_>>())).collect();
        let merged = cluster(&centres, radius * scale);
        let mut next = Vec::new();
        for m in merged {
            if m.len() == 1 {
                next.push(groups[m[0]].clone());
                continue;
            }
            let all: Vec<usize> = m.iter().flat_map(|&g| groups[g].iter().copied()).collect();
            if verified(&all) {
                next.push(all);
            } else {
                next.extend(m.iter().map(|&g| groups[g].clone()));
            }
        }
        groups = next;
    }
    let mut clusters: Vec<JordanCluster> = groups
        .iter()
        .map(|g| {
            let pts: Vec<C64> = g.iter().map(|&i| ev[i]).collect();
            let lam = mean(&pts);
            let a = pts.len();
            let ranks = shifted_power_ranks(op, lam, a + 1, rank_tol);
            let geometric = n - ranks[0];
            // number of blocks of size >= k is r_{k-1} - r_k
            let r = |k: usize| if k == 0 { n } else { ranks[k - 1] };
            let mut blocks = Vec::new();
            for k in 1..=a {
                let at_least = r(k - 1) - r(k).min(r(k - 1));
                let at_least_next = r(k) - r(k + 1).min(r(k));
                for _ in 0..at_least.saturating_sub(at_least_next) {
                    blocks.push(k);
                }
            }
            blocks.sort_unstable_by(|x, y| y.cmp(x));
            JordanCluster { eigenvalue: lam, algebraic: a, geometric, blocks, ranks }
        })
        .collect();
    clusters.sort_by(|a, b| a.eigenvalue.re.total_cmp(&b.eigenvalue.re).then(a.eigenvalue.im.total_cmp(&b.eigenvalue.im)));
    let mut warnings = Vec::new();
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let d = (clusters[i].eigenvalue - clusters[j].eigenvalue).norm();
            if d < 10.0 * cluster_tol * scale {
                warnings.push(format!("clusters at {} and {} are only {:.2e} apart", clusters[i].eigenvalue, clusters[j].eigenvalue, d));
            }
        }
        let c = &clusters[i];
        if c.blocks.iter().sum::<usize>() != c.algebraic {
            warnings.push(format!("rank sequence at {} is inconsistent with multiplicity {}", c.eigenvalue, c.algebraic));
        }
    }
    let diagonalizable = clusters.iter().all(|c| c.geometric == c.algebraic);
    Ok(JordanReport { dim: n, clusters, diagonalizable, warnings })
}
