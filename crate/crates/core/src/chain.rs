//! Spin-chain state space, Jordan-Wigner fermions, Hamiltonian variants and
//! the discrete symmetries P, T, R, S^z.
//!
//! Basis convention: a full-space index stores site 1 in its most significant
//! bit and a set bit means spin down. Ascending index order is therefore the
//! lexicographic order in (eps_1, ..., eps_M) with up before down. The fermion
//! vacuum is the all-down state, i.e. the last index, and `n_x` counts up spins.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::{binomial, max_abs, re, CMat, CVec, C64, I, ZERO};

/// Dense-dimension cap shared by every builder. 4096 is the full space at M = 12.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_dim: 4096 }
    }
}

impl Limits {
    pub fn check(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            Err(Error::Resource { requested: dim, cap: self.max_dim })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    Full { sites: usize },
    /// States with exactly `n_up` up spins, i.e. S^z = n_up - M/2.
    Sector { sites: usize, n_up: usize },
    Custom(String),
}

impl Basis {
    pub fn dim(&self) -> Option<usize> {
        match *self {
            Basis::Full { sites } => Some(1 << sites),
            Basis::Sector { sites, n_up } => Some(binomial(sites, n_up)),
            Basis::Custom(_) => None,
        }
    }
}

/// Twice the S^z value of a sector.
pub fn two_sz(sites: usize, n_up: usize) -> i64 {
    2 * n_up as i64 - sites as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub basis: Basis,
    pub matrix: CMat,
}

impl DenseOperator {
    pub fn new(basis: Basis, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(invalid("operator matrix must be square"));
        }
        if let Some(d) = basis.dim() {
            if d != matrix.nrows() {
                return Err(invalid("matrix dimension does not match its basis"));
            }
        }
        Ok(DenseOperator { basis, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub basis: Basis,
    pub amps: CVec,
}

/// Antilinear time reversal: entrywise conjugation of amplitudes.
pub fn time_reverse(v: &StateVector) -> StateVector {
    StateVector { basis: v.basis.clone(), amps: v.amps.map(|z| z.conj()) }
}

/// Adjoint action T A T of time reversal on an operator.
pub fn time_reverse_op(op: &DenseOperator) -> DenseOperator {
    DenseOperator { basis: op.basis.clone(), matrix: op.matrix.map(|z| z.conj()) }
}

// ---------------------------------------------------------------- bit helpers

#[inline]
fn bit(sites: usize, x: usize) -> usize {
    1 << (sites - x)
}

/// Is site `x` (1-based) up in basis state `i`?
#[inline]
pub fn is_up(sites: usize, i: usize, x: usize) -> bool {
    i & bit(sites, x) == 0
}

pub fn n_up_of(sites: usize, i: usize) -> usize {
    sites - i.count_ones() as usize
}

/// Jordan-Wigner sign (-1)^{# down spins on sites < x}.
#[inline]
fn jw_sign(sites: usize, i: usize, x: usize) -> f64 {
    let mask = !((1usize << (sites - x + 1)) - 1) & ((1usize << sites) - 1);
    if (i & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// c_x |i>, returning the image index and sign.
#[inline]
pub fn apply_c(sites: usize, x: usize, i: usize) -> Option<(usize, f64)> {
    if is_up(sites, i, x) {
        Some((i | bit(sites, x), jw_sign(sites, i, x)))
    } else {
        None
    }
}

/// c*_x |i>.
#[inline]
pub fn apply_cdag(sites: usize, x: usize, i: usize) -> Option<(usize, f64)> {
    if is_up(sites, i, x) {
        None
    } else {
        Some((i & !bit(sites, x), jw_sign(sites, i, x)))
    }
}

/// Full-space indices of a sector, ascending.
pub fn sector_states(sites: usize, n_up: usize) -> Vec<usize> {
    (0..1usize << sites).filter(|&i| n_up_of(sites, i) == n_up).collect()
}

/// Site mirror x -> M+1-x on a basis index.
pub fn mirror_index(sites: usize, i: usize) -> usize {
    let mut r = 0;
    for b in 0..sites {
        if i & (1 << b) != 0 {
            r |= 1 << (sites - 1 - b);
        }
    }
    r
}

// ------------------------------------------------------------- fermion bilinears

/// The bilinear sum_{x,y} K_{xy} c*_x c_y + constant on the full space.
pub fn bilinear_full(k: &CMat, constant: C64, limits: &Limits) -> Result<CMat> {
    let m = k.nrows();
    let dim = 1usize << m;
    limits.check(dim)?;
    let mut out = CMat::from_diagonal_element(dim, dim, constant);
    let idx: Vec<usize> = (0..dim).collect();
    fill_bilinear(k, &idx, &mut out, |j| Some(j));
    Ok(out)
}

/// The same bilinear restricted to the sector with `n_up` up spins.
pub fn bilinear_sector(k: &CMat, constant: C64, n_up: usize, limits: &Limits) -> Result<CMat> {
    let m = k.nrows();
    let states = sector_states(m, n_up);
    limits.check(states.len())?;
    let mut out = CMat::from_diagonal_element(states.len(), states.len(), constant);
    fill_bilinear(k, &states, &mut out, |j| states.binary_search(&j).ok());
    Ok(out)
}

fn fill_bilinear(k: &CMat, states: &[usize], out: &mut CMat, pos: impl Fn(usize) -> Option<usize>) {
    let m = k.nrows();
    let nz: Vec<(usize, usize, C64)> = (0..m)
        .flat_map(|x| (0..m).map(move |y| (x, y)))
        .filter(|&(x, y)| k[(x, y)] != ZERO)
        .map(|(x, y)| (x, y, k[(x, y)]))
        .collect();
    for (col, &i) in states.iter().enumerate() {
        for &(x, y, v) in &nz {
            if let Some((j, s1)) = apply_c(m, y + 1, i) {
                if let Some((l, s2)) = apply_cdag(m, x + 1, j) {
                    if let Some(row) = pos(l) {
                        out[(row, col)] += v * (s1 * s2);
                    }
                }
            }
        }
    }
}

/// Recovers K and the constant of a bilinear from its blocks on the vacuum
/// (n_up = 0) and one-particle (n_up = 1) sectors.
pub fn one_particle_part(sites: usize, vacuum: C64, sector1: &CMat) -> Result<(CMat, C64)> {
    if sector1.nrows() != sites || sector1.ncols() != sites {
        return Err(invalid("one-particle block must be M x M"));
    }
    // the state with only site x up is (-1)^{x-1} c*_x |0>
    let s = |x: usize| if x % 2 == 0 { 1.0 } else { -1.0 };
    let k = CMat::from_fn(sites, sites, |x, y| {
        let d = if x == y { vacuum } else { ZERO };
        (sector1[(x, y)] - d) * (s(x) * s(y))
    });
    Ok((k, vacuum))
}

/// Matrix of c_x on the full space.
pub fn c_matrix(sites: usize, x: usize, limits: &Limits) -> Result<CMat> {
    let dim = 1usize << sites;
    limits.check(dim)?;
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        if let Some((j, s)) = apply_c(sites, x, i) {
            out[(j, i)] = re(s);
        }
    }
    Ok(out)
}

pub fn cdag_matrix(sites: usize, x: usize, limits: &Limits) -> Result<CMat> {
    Ok(c_matrix(sites, x, limits)?.adjoint())
}

/// Jordan-Wigner pairs (c_x, c*_x) for x = 1..M.
pub fn jordan_wigner_ops(sites: usize, limits: &Limits) -> Result<Vec<(CMat, CMat)>> {
    (1..=sites)
        .map(|x| {
            let c = c_matrix(sites, x, limits)?;
            let cd = c.adjoint();
            Ok((c, cd))
        })
        .collect()
}

/// Linear combination sum_x w_x c_x (or c*_x when `dagger`) on the full space.
pub fn mode_operator(w: &[C64], dagger: bool, limits: &Limits) -> Result<CMat> {
    let m = w.len();
    let dim = 1usize << m;
    limits.check(dim)?;
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for x in 1..=m {
            let img = if dagger { apply_cdag(m, x, i) } else { apply_c(m, x, i) };
            if let Some((j, s)) = img {
                out[(j, i)] += w[x - 1] * s;
            }
        }
    }
    Ok(out)
}

/// The same linear combination as a map from sector `n_from` to the sector
/// with one more (`dagger`) or one fewer up spin. Out-of-range targets give a
/// matrix with zero rows.
pub fn mode_operator_sector(w: &[C64], dagger: bool, n_from: usize, limits: &Limits) -> Result<CMat> {
    let m = w.len();
    if n_from > m {
        return Err(invalid("sector index out of range"));
    }
    let from = sector_states(m, n_from);
    let to = match (dagger, n_from) {
        (true, n) if n == m => Vec::new(),
        (false, 0) => Vec::new(),
        (true, n) => sector_states(m, n + 1),
        (false, n) => sector_states(m, n - 1),
    };
    limits.check(from.len().max(to.len()))?;
    let mut out = CMat::zeros(to.len(), from.len());
    if to.is_empty() {
        return Ok(out);
    }
    for (col, &i) in from.iter().enumerate() {
        for x in 1..=m {
            let img = if dagger { apply_cdag(m, x, i) } else { apply_c(m, x, i) };
            if let Some((j, s)) = img {
                let row = to.binary_search(&j).expect("image lies in the target sector");
                out[(row, col)] += w[x - 1] * s;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Pauli matrix on site x in the spin basis (no string).
pub fn pauli(sites: usize, x: usize, axis: PauliAxis, limits: &Limits) -> Result<CMat> {
    let dim = 1usize << sites;
    limits.check(dim)?;
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        let up = is_up(sites, i, x);
        let flipped = i ^ bit(sites, x);
        match axis {
            PauliAxis::Z => out[(i, i)] = re(if up { 1.0 } else { -1.0 }),
            PauliAxis::X => out[(flipped, i)] = re(1.0),
            // sigma^y |up> = i |down>, sigma^y |down> = -i |up>
            PauliAxis::Y => out[(flipped, i)] = if up { I } else { -I },
        }
    }
    Ok(out)
}

// ------------------------------------------------------------------ Hamiltonians

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    General { alpha: C64, beta: C64 },
    /// alpha = g e^{i theta}, beta = conj(alpha).
    Polar { g: f64, theta: f64 },
}

impl Boundary {
    pub fn fields(&self) -> (C64, C64) {
        match *self {
            Boundary::General { alpha, beta } => (alpha, beta),
            Boundary::Polar { g, theta } => {
                let a = C64::from_polar(g, theta);
                (a, a.conj())
            }
        }
    }

    /// Polar data when alpha = conj(beta) within `tol`.
    pub fn polar(&self, tol: f64) -> Option<(f64, f64)> {
        match *self {
            Boundary::Polar { g, theta } => Some((g, theta)),
            Boundary::General { alpha, beta } => {
                if (alpha - beta.conj()).norm() > tol {
                    return None;
                }
                let (g, mut th) = alpha.to_polar();
                if th < 0.0 {
                    th += 2.0 * core::f64::consts::PI;
                }
                Some((g, th))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    H,
    Hprime,
    Hg,
    HgTruncated,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub sites: usize,
    pub boundary: Boundary,
    pub variant: Variant,
}

impl HamiltonianSpec {
    pub fn polar(sites: usize, g: f64, theta: f64) -> Self {
        HamiltonianSpec { sites, boundary: Boundary::Polar { g, theta }, variant: Variant::Hg }
    }

    pub fn general(sites: usize, alpha: C64, beta: C64) -> Self {
        HamiltonianSpec { sites, boundary: Boundary::General { alpha, beta }, variant: Variant::H }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn fields(&self) -> (C64, C64) {
        self.boundary.fields()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(invalid("chain needs at least two sites"));
        }
        if self.sites > 30 {
            return Err(invalid("chain length out of range"));
        }
        let (a, b) = self.fields();
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(invalid("boundary fields must be finite"));
        }
        if let Boundary::Polar { g, .. } = self.boundary {
            if g < 0.0 {
                return Err(invalid("polar form needs g >= 0"));
            }
        }
        match self.variant {
            Variant::Hg => {
                if self.boundary.polar(1e-12).is_none() {
                    return Err(invalid("variant Hg needs alpha = conj(beta)"));
                }
            }
            Variant::HgTruncated => {
                if (a + b).norm() > 1e-12 || a.re.abs() > 1e-12 {
                    return Err(invalid("truncated variant needs alpha = -beta = i g"));
                }
                if self.sites < 3 {
                    return Err(invalid("truncated variant needs M >= 3"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// One-particle matrix K and constant with H = sum K_{xy} c*_x c_y + constant.
    pub fn one_particle(&self) -> Result<(CMat, C64)> {
        self.validate()?;
        let m = self.sites;
        let (a, b) = self.fields();
        let mut k = CMat::zeros(m, m);
        let link = |k: &mut CMat, x: usize, y: usize| {
            k[(x, y)] -= re(1.0);
            k[(y, x)] -= re(1.0);
        };
        match self.variant {
            Variant::H | Variant::Hg | Variant::Hprime => {
                for x in 0..m - 1 {
                    link(&mut k, x, x + 1);
                }
                k[(0, 0)] += a;
                k[(m - 1, m - 1)] += b;
                let mut c = -(a + b) / 2.0;
                if self.variant == Variant::Hprime {
                    // subtract (alpha+beta)/2 sum_x sigma^z_x, sigma^z = 2n - 1
                    for x in 0..m {
                        k[(x, x)] -= a + b;
                    }
                    c += (a + b) * (m as f64) / 2.0;
                }
                Ok((k, c))
            }
            Variant::HgTruncated => {
                // e_x = c_x c*_{x+1} - c*_x c_{x+1} + i g (n_x - n_{x+1}), x <= M-2
                for x in 0..m - 2 {
                    link(&mut k, x, x + 1);
                }
                k[(0, 0)] += a;
                k[(m - 2, m - 2)] -= a;
                Ok((k, ZERO))
            }
            Variant::Periodic => {
                for x in 0..m {
                    link(&mut k, x, (x + 1) % m);
                }
                Ok((k, ZERO))
            }
        }
    }
}

pub fn build_hamiltonian(spec: &HamiltonianSpec, limits: &Limits) -> Result<DenseOperator> {
    let (k, c) = spec.one_particle()?;
    let m = bilinear_full(&k, c, limits)?;
    Ok(DenseOperator { basis: Basis::Full { sites: spec.sites }, matrix: m })
}

pub fn build_hamiltonian_sector(spec: &HamiltonianSpec, n_up: usize, limits: &Limits) -> Result<DenseOperator> {
    if n_up > spec.sites {
        return Err(invalid("sector index out of range"));
    }
    let (k, c) = spec.one_particle()?;
    let m = bilinear_sector(&k, c, n_up, limits)?;
    Ok(DenseOperator { basis: Basis::Sector { sites: spec.sites, n_up }, matrix: m })
}

// --------------------------------------------------------------------- symmetries

pub struct SymmetryOps {
    pub p: DenseOperator,
    pub r: DenseOperator,
    pub sz: DenseOperator,
}

/// Parity (site mirror), spin reversal and total S^z on the full space.
pub fn symmetry_ops(sites: usize, limits: &Limits) -> Result<SymmetryOps> {
    let dim = 1usize << sites;
    limits.check(dim)?;
    let mut p = CMat::zeros(dim, dim);
    let mut r = CMat::zeros(dim, dim);
    let mut sz = CMat::zeros(dim, dim);
    for i in 0..dim {
        p[(mirror_index(sites, i), i)] = re(1.0);
        r[((dim - 1) ^ i, i)] = re(1.0);
        sz[(i, i)] = re(n_up_of(sites, i) as f64 - sites as f64 / 2.0);
    }
    let b = Basis::Full { sites };
    Ok(SymmetryOps {
        p: DenseOperator { basis: b.clone(), matrix: p },
        r: DenseOperator { basis: b.clone(), matrix: r },
        sz: DenseOperator { basis: b, matrix: sz },
    })
}

/// The mirror permutation restricted to one sector.
pub fn parity_sector(sites: usize, n_up: usize) -> CMat {
    let states = sector_states(sites, n_up);
    let d = states.len();
    let mut p = CMat::zeros(d, d);
    for (c, &i) in states.iter().enumerate() {
        let r = states.binary_search(&mirror_index(sites, i)).expect("mirror stays in sector");
        p[(r, c)] = re(1.0);
    }
    p
}

/// Product of sigma^z over all sites, diagonal in the spin basis.
pub fn sigma_z_string(sites: usize, limits: &Limits) -> Result<CMat> {
    let dim = 1usize << sites;
    limits.check(dim)?;
    Ok(CMat::from_fn(dim, dim, |r, c| {
        if r != c {
            ZERO
        } else if r.count_ones() % 2 == 0 {
            re(1.0)
        } else {
            re(-1.0)
        }
    }))
}

// ------------------------------------------------------------ sector handling

/// Split an S^z-conserving full-space operator into blocks, index = n_up.
pub fn sector_decompose(op: &DenseOperator) -> Result<Vec<DenseOperator>> {
    let sites = match op.basis {
        Basis::Full { sites } => sites,
        _ => return Err(invalid("sector decomposition needs a full-space operator")),
    };
    let dim = 1usize << sites;
    if op.dim() != dim {
        return Err(invalid("dimension mismatch"));
    }
    let scale = max_abs(&op.matrix).max(1.0);
    let mut leak: f64 = 0.0;
    for c in 0..dim {
        for r in 0..dim {
            if n_up_of(sites, r) != n_up_of(sites, c) {
                leak = leak.max(op.matrix[(r, c)].norm());
            }
        }
    }
    if leak > 1e-10 * scale {
        return Err(Error::Precondition { what: "operator does not commute with S^z".into(), residual: leak });
    }
    Ok((0..=sites)
        .map(|n| {
            let st = sector_states(sites, n);
            let m = CMat::from_fn(st.len(), st.len(), |r, c| op.matrix[(st[r], st[c])]);
            DenseOperator { basis: Basis::Sector { sites, n_up: n }, matrix: m }
        })
        .collect())
}

/// Inverse of `sector_decompose`.
pub fn sector_assemble(sites: usize, blocks: &[CMat]) -> Result<CMat> {
    if blocks.len() != sites + 1 {
        return Err(invalid("need one block per sector"));
    }
    let dim = 1usize << sites;
    let mut out = CMat::zeros(dim, dim);
    for (n, b) in blocks.iter().enumerate() {
        let st = sector_states(sites, n);
        if b.nrows() != st.len() {
            return Err(invalid("block dimension mismatch"));
        }
        for (c, &ic) in st.iter().enumerate() {
            for (r, &ir) in st.iter().enumerate() {
                out[(ir, ic)] = b[(r, c)];
            }
        }
    }
    Ok(out)
}
