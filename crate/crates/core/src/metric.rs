//! Quasi-fermions, the metric eta and its relatives (eta^{-1}, eta^{1/2},
//! eta^{-1/2}), the C operator and the Hermitian counterpart h.
//!
//! Everything is built one S^z sector at a time. Mode j creates a fermion
//! (an up spin) in sector n_up -> n_up + 1; modes follow the quasi-momentum
//! order of the `BetheSpectrum` they came from.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bethe::{BetheSpectrum, Regime};
use crate::chain::{
    bilinear_full, build_hamiltonian, build_hamiltonian_sector, mode_operator, mode_operator_sector, parity_sector, sector_assemble,
    Basis, DenseOperator, HamiltonianSpec, Limits, Variant,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    conj, hermitian_apply, hermitian_eig, hermiticity_defect, identity, max_abs, max_abs_diff, multiset_distance, re, CMat, C64, ONE,
    ZERO,
};

/// Relative size of sum_x psi(x)^2 below which a mode counts as null.
pub const ZERO_NORM_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of eta.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Largest tolerated CAR defect.
pub const CAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunctionSet {
    pub sites: usize,
    pub alpha: C64,
    pub beta: C64,
    pub roots: Vec<C64>,
    pub energies: Vec<C64>,
    /// psi[j][x-1]
    pub psi: Vec<Vec<C64>>,
    /// N_j, the bilinear normaliser applied to the raw plane-wave combination
    pub normalizers: Vec<C64>,
    /// sum_x psi_raw(x)^2 relative to sum_x |psi_raw(x)|^2
    pub raw_norms: Vec<C64>,
    pub zero_norm: Vec<bool>,
}

impl WaveFunctionSet {
    pub fn modes(&self) -> usize {
        self.psi.len()
    }

    /// Rows are modes, columns are sites.
    pub fn matrix(&self) -> CMat {
        CMat::from_fn(self.modes(), self.sites, |j, x| self.psi[j][x])
    }

    /// max |sum_x psi_j(x) psi_l(x) - delta_jl|
    pub fn orthonormality_residual(&self) -> f64 {
        let p = self.matrix();
        max_abs_diff(&(&p * p.transpose()), &identity(self.modes()))
    }

    /// max |sum_j psi_j(x) psi_j(y) - delta_xy|
    pub fn completeness_residual(&self) -> f64 {
        let p = self.matrix();
        max_abs_diff(&(p.transpose() * &p), &identity(self.sites))
    }
}

/// psi_j(x) = N_j (z^x - A z^{-x}), A = (1 + alpha z)/(1 + alpha/z).
///
/// The raw combination is stored as (1 + alpha/z) z^x - (1 + alpha z) z^{-x}
/// so that z = -alpha causes no division by zero. Off-circle spectra are
/// refused unless `force` is set.
pub fn build_wavefunctions(spec: &HamiltonianSpec, sp: &BetheSpectrum, force: bool) -> Result<WaveFunctionSet> {
    spec.validate()?;
    if !matches!(spec.variant, Variant::H | Variant::Hg | Variant::Hprime) {
        return Err(invalid("wave functions exist for the open-boundary variants H, Hg, Hprime"));
    }
    if sp.sites != spec.sites || sp.roots.len() != spec.sites {
        return Err(invalid("spectrum does not match the chain"));
    }
    let (alpha, beta) = spec.fields();
    if (alpha - sp.alpha).norm() > 1e-12 || (beta - sp.beta).norm() > 1e-12 {
        return Err(invalid("spectrum was computed for different boundary fields"));
    }
    if sp.regime == Regime::OffCircle && !force {
        return Err(Error::ExceptionalPoint(format!(
            "Bethe roots leave the unit circle (defect {:e}); no positive metric",
            sp.max_circle_defect()
        )));
    }
    let m = spec.sites;
    let mut out = WaveFunctionSet {
        sites: m,
        alpha,
        beta,
        roots: sp.roots.clone(),
        energies: sp.energies.clone(),
        psi: Vec::with_capacity(m),
        normalizers: Vec::with_capacity(m),
        raw_norms: Vec::with_capacity(m),
        zero_norm: Vec::with_capacity(m),
    };
    for &z in &sp.roots {
        let (l, r) = (ONE + alpha / z, ONE + alpha * z);
        let raw: Vec<C64> = (1..=m as i32).map(|x| l * z.powi(x) - r * z.powi(-x)).collect();
        let bil: C64 = raw.iter().map(|v| v * v).sum();
        let scale: f64 = raw.iter().map(|v| v.norm_sqr()).sum();
        let rel = if scale > 0.0 { bil / scale } else { ZERO };
        let null = !(rel.norm() >= ZERO_NORM_TOL);
        let n = if null { ZERO } else { ONE / bil.sqrt() };
        out.psi.push(raw.iter().map(|v| v * n).collect());
        out.normalizers.push(n);
        out.raw_norms.push(rel);
        out.zero_norm.push(null);
    }
    Ok(out)
}

/// Quasi-fermion modes c^*_j = sum_x psi_j(x) c*_x and d_j = sum_x psi_j(x) c_x.
/// Only the coefficient vectors are stored; operators are materialised on
/// request, on the full space or between neighbouring sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiFermionBasis {
    pub wfs: WaveFunctionSet,
    /// max over j, l of |{c*_j, d_l} - delta_jl| and the vanishing anticommutators
    pub car_residual: f64,
    /// max_j |K psi_j + eps_j psi_j|, i.e. [H, c*_j] = -eps_j c*_j
    pub spectral_residual: f64,
}

impl QuasiFermionBasis {
    pub fn sites(&self) -> usize {
        self.wfs.sites
    }

    /// Coefficients of c*_j on c*_x.
    pub fn c_coeffs(&self, j: usize) -> &[C64] {
        &self.wfs.psi[j]
    }

    /// Coefficients of d*_j on c*_x.
    pub fn d_star_coeffs(&self, j: usize) -> Vec<C64> {
        self.wfs.psi[j].iter().map(|v| v.conj()).collect()
    }

    /// c*_j on the full space.
    pub fn c_star(&self, j: usize, limits: &Limits) -> Result<CMat> {
        mode_operator(self.c_coeffs(j), true, limits)
    }

    /// d_j on the full space.
    pub fn d(&self, j: usize, limits: &Limits) -> Result<CMat> {
        mode_operator(self.c_coeffs(j), false, limits)
    }

    /// c*_j from sector n_up to n_up + 1.
    pub fn c_star_sector(&self, j: usize, n_up: usize, limits: &Limits) -> Result<CMat> {
        mode_operator_sector(self.c_coeffs(j), true, n_up, limits)
    }

    /// d*_j from sector n_up to n_up + 1.
    pub fn d_star_sector(&self, j: usize, n_up: usize, limits: &Limits) -> Result<CMat> {
        mode_operator_sector(&self.d_star_coeffs(j), true, n_up, limits)
    }
}

/// Checks the one-particle content of the CAR and spectral relations.
///
/// For linear modes {c*_u, c_w} = sum_x u_x w_x and {c*_u, c*_w} = 0 hold
/// identically, so the CAR residual is the bilinear orthonormality defect.
pub fn build_quasifermions(wfs: WaveFunctionSet) -> Result<QuasiFermionBasis> {
    if let Some(j) = wfs.zero_norm.iter().position(|&z| z) {
        return Err(Error::ZeroNorm { mode: j, norm: wfs.raw_norms[j].norm() });
    }
    let car = wfs.orthonormality_residual();
    if !(car <= CAR_TOL) {
        return Err(Error::Inconsistent { what: "quasi-fermion anticommutators".into(), residual: car });
    }
    let (k, _) = HamiltonianSpec::general(wfs.sites, wfs.alpha, wfs.beta).one_particle()?;
    let mut spectral: f64 = 0.0;
    for (j, psi) in wfs.psi.iter().enumerate() {
        for x in 0..wfs.sites {
            let kx: C64 = (0..wfs.sites).map(|y| k[(x, y)] * psi[y]).sum();
            spectral = spectral.max((kx + wfs.energies[j] * psi[x]).norm());
        }
    }
    Ok(QuasiFermionBasis { wfs, car_residual: car, spectral_residual: spectral })
}

/// Metric data on one S^z sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMetric {
    pub n_up: usize,
    pub eta: CMat,
    pub eta_inv: CMat,
    pub eta_sqrt: CMat,
    pub eta_inv_sqrt: CMat,
    pub c: CMat,
    pub h: CMat,
    pub eta_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricResiduals {
    pub inverse: f64,
    pub intertwining: f64,
    pub parity: f64,
    pub conjugation: f64,
    pub hermiticity: f64,
    pub c_square: f64,
    pub c_commutator: f64,
    pub c_pt: f64,
    pub c_closed_form: f64,
    pub h_hermiticity: f64,
    pub h_spectrum: f64,
    pub adjoint_exchange: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricPart {
    Eta,
    EtaInv,
    EtaSqrt,
    EtaInvSqrt,
    C,
    H,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricBundle {
    pub spec: HamiltonianSpec,
    pub modes: QuasiFermionBasis,
    /// indexed by n_up
    pub sectors: Vec<SectorMetric>,
    /// smallest eigenvalue of eta over all sectors
    pub positivity_margin: f64,
    pub residuals: MetricResiduals,
    pub log: Vec<String>,
}

impl MetricBundle {
    pub fn sites(&self) -> usize {
        self.spec.sites
    }

    pub fn block(&self, part: MetricPart, n_up: usize) -> &CMat {
        let s = &self.sectors[n_up];
        match part {
            MetricPart::Eta => &s.eta,
            MetricPart::EtaInv => &s.eta_inv,
            MetricPart::EtaSqrt => &s.eta_sqrt,
            MetricPart::EtaInvSqrt => &s.eta_inv_sqrt,
            MetricPart::C => &s.c,
            MetricPart::H => &s.h,
        }
    }

    /// Full-space assembly of one part.
    pub fn assemble(&self, part: MetricPart, limits: &Limits) -> Result<DenseOperator> {
        let m = self.sites();
        limits.check(1usize << m)?;
        let blocks: Vec<CMat> = (0..=m).map(|n| self.block(part, n).clone()).collect();
        Ok(DenseOperator { basis: Basis::Full { sites: m }, matrix: sector_assemble(m, &blocks)? })
    }
}

/// sign and phase of subset S in C = Phi_c diag(sigma_S) Phi_d^dagger
fn c_phase(sites: usize, mask: usize, mu: &[C64]) -> C64 {
    let n = mask.count_ones() as usize;
    let e = n * (n.saturating_sub(1)) / 2 + sites * n;
    let mut v = if e % 2 == 0 { ONE } else { -ONE };
    for (j, m) in mu.iter().enumerate() {
        if mask & (1 << j) != 0 {
            v *= -m.conj();
        }
    }
    v
}

/// Columns d*_{s1} ... d*_{sn}|0> (or with c*) for all subsets, s1 < ... < sn,
/// grouped by sector in binary-counter order of the subset mask.
fn fock_columns(ops: &[Vec<CMat>], sites: usize) -> Vec<CMat> {
    let full = 1usize << sites;
    let mut vecs: Vec<Option<nalgebra::DVector<C64>>> = vec![None; full];
    vecs[0] = Some(nalgebra::DVector::from_element(1, ONE));
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let n_rest = rest.count_ones() as usize;
        let v = &ops[low][n_rest] * vecs[rest].as_ref().expect("built in mask order");
        vecs[mask] = Some(v);
    }
    let mut out = Vec::with_capacity(sites + 1);
    for n in 0..=sites {
        let cols: Vec<&nalgebra::DVector<C64>> =
            (0..full).filter(|m| m.count_ones() as usize == n).map(|m| vecs[m].as_ref().unwrap()).collect();
        let d = cols[0].len();
        out.push(CMat::from_fn(d, cols.len(), |r, c| cols[c][r]));
    }
    out
}

fn masks_of(sites: usize, n: usize) -> Vec<usize> {
    (0usize..1 << sites).filter(|m| m.count_ones() as usize == n).collect()
}

/// eta = Phi_d Phi_d^dagger, eta^{-1} = Phi_c Phi_c^dagger, sector by sector,
/// then square roots, C = P eta and h = eta^{1/2} H eta^{-1/2}.
pub fn build_metric(spec: &HamiltonianSpec, basis: &QuasiFermionBasis, limits: &Limits) -> Result<MetricBundle> {
    spec.validate()?;
    if spec.boundary.polar(1e-12).is_none() {
        return Err(invalid("the metric construction needs alpha = conj(beta)"));
    }
    if !matches!(spec.variant, Variant::H | Variant::Hg | Variant::Hprime) {
        return Err(invalid("metric is built for the open-boundary variants H, Hg, Hprime"));
    }
    let m = spec.sites;
    if basis.sites() != m || basis.wfs.modes() != m {
        return Err(invalid("quasi-fermion basis does not match the chain"));
    }
    let (alpha, beta) = spec.fields();
    if (alpha - basis.wfs.alpha).norm() > 1e-12 || (beta - basis.wfs.beta).norm() > 1e-12 {
        return Err(invalid("quasi-fermion basis was built for different boundary fields"));
    }
    if m > 16 {
        return Err(Error::Resource { requested: 1usize << m, cap: 1 << 16 });
    }
    let largest = (0..=m).map(|n| crate::linalg::binomial(m, n)).max().unwrap_or(1);
    limits.check(largest)?;

    let mut log = Vec::new();
    let mut cstar = Vec::with_capacity(m);
    let mut dstar = Vec::with_capacity(m);
    for j in 0..m {
        let mut cs = Vec::with_capacity(m + 1);
        let mut ds = Vec::with_capacity(m + 1);
        for n in 0..=m {
            cs.push(basis.c_star_sector(j, n, limits)?);
            ds.push(basis.d_star_sector(j, n, limits)?);
        }
        cstar.push(cs);
        dstar.push(ds);
    }
    let phi_c = fock_columns(&cstar, m);
    let phi_d = fock_columns(&dstar, m);
    log.push(format!("built {} Fock columns for M = {}", 1usize << m, m));

    let mu: Vec<C64> = basis.wfs.psi.iter().map(|p| p[m - 1] / p[0].conj()).collect();
    let energies: Vec<C64> = basis.wfs.energies.clone();
    let mut res = MetricResiduals::default();
    let mut sectors = Vec::with_capacity(m + 1);
    let mut margin = f64::INFINITY;
    let etas: Vec<CMat> = phi_d.iter().map(|p| p * p.adjoint()).collect();
    for n in 0..=m {
        let (pc, pd) = (&phi_c[n], &phi_d[n]);
        let eta = etas[n].clone();
        let eta_inv = pc * pc.adjoint();
        let dim = eta.nrows();
        let scale = max_abs(&eta).max(1.0);
        res.hermiticity = res.hermiticity.max(hermiticity_defect(&eta) / scale);
        let (vals, vecs) = hermitian_eig(&eta);
        let lo = vals[0];
        margin = margin.min(lo);
        if !(lo > POSITIVITY_TOL) {
            return Err(Error::JordanBlockSuspected { eigenvalue: lo });
        }
        res.inverse = res.inverse.max(max_abs_diff(&(&eta * &eta_inv), &identity(dim)));
        let h_big = build_hamiltonian_sector(spec, n, limits)?.matrix;
        res.intertwining = res.intertwining.max(max_abs_diff(&(&eta * &h_big), &(h_big.adjoint() * &eta)) / scale);
        let p = parity_sector(m, n);
        res.parity = res.parity.max(max_abs_diff(&(&p * &eta * &p), &eta_inv) / scale);
        res.conjugation = res.conjugation.max(max_abs_diff(&conj(&eta), &eta_inv) / scale);

        let eta_sqrt = hermitian_apply(&vals, &vecs, |v| v.sqrt());
        let eta_inv_sqrt = hermitian_apply(&vals, &vecs, |v| 1.0 / v.sqrt());
        let h = &eta_sqrt * &h_big * &eta_inv_sqrt;
        res.h_hermiticity = res.h_hermiticity.max(hermiticity_defect(&h));
        let (hv, _) = hermitian_eig(&h);
        let hv: Vec<C64> = hv.into_iter().map(re).collect();
        let shift = match spec.variant {
            Variant::Hprime => -(alpha + beta),
            _ => ZERO,
        };
        let konst = match spec.variant {
            Variant::Hprime => -(alpha + beta) / 2.0 + (alpha + beta) * (m as f64) / 2.0,
            _ => -(alpha + beta) / 2.0,
        };
        let bethe: Vec<C64> = masks_of(m, n)
            .into_iter()
            .map(|mask| (0..m).filter(|j| mask & (1 << j) != 0).fold(konst, |acc, j| acc - energies[j] + shift))
            .collect();
        res.h_spectrum = res.h_spectrum.max(multiset_distance(&hv, &bethe));

        let c = &p * &eta;
        res.c_square = res.c_square.max(max_abs_diff(&(&c * &c), &identity(dim)));
        res.c_commutator = res.c_commutator.max(max_abs_diff(&(&h_big * &c), &(&c * &h_big)) / scale);
        res.c_pt = res.c_pt.max(max_abs_diff(&conj(&(&p * &c * &p)), &c) / scale);
        let phases: Vec<C64> = masks_of(m, n).into_iter().map(|mask| c_phase(m, mask, &mu)).collect();
        let closed = pc * CMat::from_diagonal(&nalgebra::DVector::from_vec(phases)) * pd.adjoint();
        res.c_closed_form = res.c_closed_form.max(max_abs_diff(&closed, &c) / scale);

        if n < m {
            // eta c*_j = d*_j eta between sectors n and n+1
            let eta_next = &etas[n + 1];
            for j in 0..m {
                let lhs = eta_next * &cstar[j][n];
                let rhs = &dstar[j][n] * &eta;
                let s = max_abs(eta_next).max(scale);
                res.adjoint_exchange = res.adjoint_exchange.max(max_abs_diff(&lhs, &rhs) / s);
            }
        }
        sectors.push(SectorMetric { n_up: n, eta, eta_inv, eta_sqrt, eta_inv_sqrt, c, h, eta_eigenvalues: vals });
    }
    log.push(format!("positivity margin {:e}", margin));
    if !(res.inverse <= 1e-6) {
        return Err(Error::Inconsistent { what: "eta times eta^{-1}".into(), residual: res.inverse });
    }
    Ok(MetricBundle { spec: *spec, modes: basis.clone(), sectors, positivity_margin: margin, residuals: res, log })
}

/// Convenience: spectrum, wave functions, quasi-fermions and metric in one go.
pub fn metric_for(spec: &HamiltonianSpec, limits: &Limits, force: bool) -> Result<MetricBundle> {
    let sp = crate::bethe::spectrum_for(spec)?;
    let wfs = build_wavefunctions(spec, &sp, force)?;
    let basis = build_quasifermions(wfs)?;
    build_metric(spec, &basis, limits)
}

/// Full-space C = P eta, refused when the closed form disagrees beyond `tol`.
pub fn build_c_operator(bundle: &MetricBundle, limits: &Limits, tol: f64) -> Result<DenseOperator> {
    if !(bundle.residuals.c_closed_form <= tol) {
        return Err(Error::CrossValidation { what: "C = P eta against its mode expansion".into(), worst: bundle.residuals.c_closed_form });
    }
    bundle.assemble(MetricPart::C, limits)
}

/// Rebuilds H from -(alpha+beta)/2 - sum_j eps_j c*_j d_j and returns the
/// worst entrywise deviation on the full space.
pub fn diagonal_form_check(spec: &HamiltonianSpec, basis: &QuasiFermionBasis, limits: &Limits) -> Result<f64> {
    let m = spec.sites;
    if basis.sites() != m {
        return Err(invalid("quasi-fermion basis does not match the chain"));
    }
    let (alpha, beta) = spec.fields();
    let mut k = CMat::zeros(m, m);
    for (j, psi) in basis.wfs.psi.iter().enumerate() {
        let e = basis.wfs.energies[j];
        for x in 0..m {
            for y in 0..m {
                k[(x, y)] -= e * psi[x] * psi[y];
            }
        }
    }
    let mut c = -(alpha + beta) / 2.0;
    match spec.variant {
        Variant::H | Variant::Hg => {}
        Variant::Hprime => {
            for x in 0..m {
                k[(x, x)] -= alpha + beta;
            }
            c += (alpha + beta) * (m as f64) / 2.0;
        }
        _ => return Err(invalid("diagonal form covers the open-boundary variants H, Hg, Hprime")),
    }
    let rebuilt = bilinear_full(&k, c, limits)?;
    let h = build_hamiltonian(spec, limits)?.matrix;
    Ok(max_abs_diff(&rebuilt, &h))
}
