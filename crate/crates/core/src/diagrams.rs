//! Planar Temperley-Lieb diagrams, the q = i dual canonical basis and Gram
//! matrices of that basis in the eta-product.
//!
//! Points 0..M-1 are the top of a diagram, M..2M-1 the bottom (bottom i sits
//! under top i). `compose(a, b)` stacks a on top of b, i.e. the product ab
//! acting on vectors with b first.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::chain::{bilinear_sector, parity_sector, sector_states, Basis, HamiltonianSpec, Limits, StateVector};
use crate::error::{invalid, Error, Result};
use crate::linalg::{max_abs_diff, re, solve, CMat, CVec, C64, I, ZERO};
use crate::metric::{metric_for, MetricBundle};

/// Entries below this count as exact zeros of G.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDiagram {
    pub strands: usize,
    pub pairing: Vec<usize>,
    pub loops: usize,
    pub weight: C64,
}

impl PlanarDiagram {
    pub fn identity(strands: usize) -> Self {
        let n = strands;
        let pairing = (0..2 * n).map(|p| if p < n { p + n } else { p - n }).collect();
        PlanarDiagram { strands, pairing, loops: 0, weight: re(1.0) }
    }

    /// e_i (1-based): cap on top points i, i+1 and cup on the bottom ones.
    pub fn generator(strands: usize, i: usize) -> Result<Self> {
        if i == 0 || i >= strands {
            return Err(invalid(format!("e_{} does not exist on {} strands", i, strands)));
        }
        let mut d = Self::identity(strands);
        let (a, b) = (i - 1, i);
        d.pairing[a] = b;
        d.pairing[b] = a;
        d.pairing[strands + a] = strands + b;
        d.pairing[strands + b] = strands + a;
        Ok(d)
    }

    /// Diagram of e_{w_1} e_{w_2} ... e_{w_k}.
    pub fn from_word(strands: usize, word: &[usize]) -> Result<Self> {
        let mut d = Self::identity(strands);
        for &w in word {
            d = d.compose(&Self::generator(strands, w)?)?;
        }
        Ok(d)
    }

    /// Position of a point on the boundary circle (top left to right, then bottom right to left).
    fn position(&self, p: usize) -> usize {
        let n = self.strands;
        if p < n {
            p
        } else {
            2 * n - 1 - (p - n)
        }
    }

    /// Involution without fixed points and without crossings.
    pub fn is_planar(&self) -> bool {
        let n2 = 2 * self.strands;
        if self.pairing.len() != n2 {
            return false;
        }
        for p in 0..n2 {
            let q = self.pairing[p];
            if q >= n2 || q == p || self.pairing[q] != p {
                return false;
            }
        }
        let mut by_pos = vec![0usize; n2];
        for p in 0..n2 {
            by_pos[self.position(p)] = p;
        }
        let mut stack: Vec<usize> = Vec::new();
        for &p in &by_pos {
            let partner = self.pairing[p];
            if self.position(partner) > self.position(p) {
                stack.push(p);
            } else if stack.pop() != Some(partner) {
                return false;
            }
        }
        true
    }

    /// Stacks `self` on top of `other`; closed loops in the middle are counted.
    pub fn compose(&self, other: &PlanarDiagram) -> Result<PlanarDiagram> {
        let n = self.strands;
        if other.strands != n {
            return Err(invalid("strand counts differ"));
        }
        // result points: 0..n = self top, n..2n = other bottom
        let mut pairing = vec![usize::MAX; 2 * n];
        let mut mid_seen = vec![false; n];
        // walk from an outer endpoint until another outer endpoint is reached
        let walk = |start: usize, mid_seen: &mut Vec<bool>| -> usize {
            // state: (in_self, point within that diagram)
            let (mut in_self, mut p) = if start < n { (true, start) } else { (false, start) };
            loop {
                let q = if in_self { self.pairing[p] } else { other.pairing[p] };
                if in_self {
                    if q < n {
                        return q;
                    }
                    let k = q - n;
                    mid_seen[k] = true;
                    in_self = false;
                    p = k;
                } else {
                    if q >= n {
                        return q;
                    }
                    mid_seen[q] = true;
                    in_self = true;
                    p = q + n;
                }
            }
        };
        for start in 0..2 * n {
            if pairing[start] != usize::MAX {
                continue;
            }
            let end = walk(start, &mut mid_seen);
            pairing[start] = end;
            pairing[end] = start;
        }
        // leftover middle points form closed loops
        let mut loops = 0;
        for k0 in 0..n {
            if mid_seen[k0] {
                continue;
            }
            loops += 1;
            let mut k = k0;
            loop {
                mid_seen[k] = true;
                // self bottom k -> its partner, also on self bottom
                let a = self.pairing[k + n] - n;
                mid_seen[a] = true;
                let b = other.pairing[a];
                if b == k0 {
                    break;
                }
                k = b;
            }
        }
        Ok(PlanarDiagram { strands: n, pairing, loops: self.loops + other.loops + loops, weight: self.weight * other.weight })
    }

    /// Loops after joining top i to bottom i, internal loops included.
    pub fn trace_closure(&self) -> usize {
        let n = self.strands;
        let mut seen = vec![false; 2 * n];
        let mut loops = 0;
        for s in 0..2 * n {
            if seen[s] {
                continue;
            }
            loops += 1;
            let mut p = s;
            loop {
                seen[p] = true;
                let q = self.pairing[p];
                seen[q] = true;
                let r = if q < n { q + n } else { q - n };
                if r == s {
                    break;
                }
                p = r;
            }
        }
        loops + self.loops
    }

    /// The same diagram with one more through strand on the right.
    pub fn extend(&self) -> PlanarDiagram {
        let n = self.strands;
        let map = |p: usize| if p < n { p } else { p + 1 };
        let mut pairing = vec![0; 2 * (n + 1)];
        for p in 0..2 * n {
            pairing[map(p)] = map(self.pairing[p]);
        }
        pairing[n] = 2 * n + 1;
        pairing[2 * n + 1] = n;
        PlanarDiagram { strands: n + 1, pairing, loops: self.loops, weight: self.weight }
    }

    /// Text form: caps on top, cups at the bottom, through lines, loops.
    pub fn render(&self) -> String {
        let n = self.strands;
        let mut caps = Vec::new();
        let mut cups = Vec::new();
        let mut through = Vec::new();
        for p in 0..2 * n {
            let q = self.pairing[p];
            if p > q {
                continue;
            }
            match (p < n, q < n) {
                (true, true) => caps.push(format!("{}-{}", p + 1, q + 1)),
                (false, false) => cups.push(format!("{}-{}", p - n + 1, q - n + 1)),
                _ => through.push(format!("{}|{}", p + 1, q - n + 1)),
            }
        }
        format!("caps [{}] cups [{}] through [{}] loops {}", caps.join(" "), cups.join(" "), through.join(" "), self.loops)
    }
}

// ------------------------------------------------------------ canonical basis

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBasisElement {
    /// row lengths of the Young subdiagram
    pub shape: Vec<usize>,
    /// generator indices, the product e_{w_1} ... e_{w_k}
    pub word: Vec<usize>,
    pub diagram: PlanarDiagram,
    pub vector: StateVector,
}

/// Subdiagrams of the rectangle with `rows` rows of `width` boxes.
pub fn young_subdiagrams(rows: usize, width: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rows: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == rows {
            return;
        }
        for l in 1..=max {
            cur.push(l);
            rec(rows, l, cur, out);
            cur.pop();
        }
    }
    rec(rows, width, &mut cur, &mut out);
    out
}

/// Row r of the tableau holds m-r, m-r+1, ...; each row contributes its
/// entries in decreasing order and later rows multiply from the left.
pub fn tableau_word(m: usize, shape: &[usize]) -> Vec<usize> {
    let mut word = Vec::new();
    for (r, &len) in shape.iter().enumerate().rev() {
        let start = m - r;
        word.extend((start..start + len).rev());
    }
    word
}

/// Word order of the printed M = 5, m = 2 example.
pub const M5_M2_WORDS: [&[usize]; 10] =
    [&[], &[2], &[1, 2], &[3, 2], &[4, 3, 2], &[1, 3, 2], &[2, 1, 3, 2], &[1, 4, 3, 2], &[2, 1, 4, 3, 2], &[3, 2, 1, 4, 3, 2]];

fn tl_sector_generators(sites: usize, n_up: usize, limits: &Limits) -> Result<Vec<CMat>> {
    (1..sites)
        .map(|x| {
            let mut k = CMat::zeros(sites, sites);
            k[(x - 1, x)] = re(-1.0);
            k[(x, x - 1)] = re(-1.0);
            k[(x - 1, x - 1)] = I;
            k[(x, x)] = -I;
            bilinear_sector(&k, ZERO, n_up, limits)
        })
        .collect()
}

/// Omega_m: sites 1..m down, the rest up, as a position in its sector.
fn omega_position(sites: usize, m: usize) -> usize {
    let full = ((1usize << m) - 1) << (sites - m);
    let states = sector_states(sites, sites - m);
    states.binary_search(&full).expect("Omega_m lies in its sector")
}

/// One element per Young subdiagram of the m x (M-m) rectangle, ordered by
/// size and then shape; the M = 5, m = 2 case follows the printed list.
pub fn generate_basis(sites: usize, m: usize, limits: &Limits) -> Result<Vec<CanonicalBasisElement>> {
    if sites < 2 || sites > 12 {
        return Err(invalid("basis generation supports 2 <= M <= 12"));
    }
    if sites % 2 == 0 {
        return Err(invalid("the dual canonical basis is used for odd M only"));
    }
    if m > sites {
        return Err(invalid("sector index m out of range"));
    }
    let n_up = sites - m;
    let gens = tl_sector_generators(sites, n_up, limits)?;
    let dim = gens.first().map(|g| g.nrows()).unwrap_or(1);
    let mut shapes = young_subdiagrams(m, sites - m);
    shapes.sort_by(|a, b| a.iter().sum::<usize>().cmp(&b.iter().sum::<usize>()).then(a.cmp(b)));
    let omega = omega_position(sites, m);
    let mut out = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let word = tableau_word(m, &shape);
        let diagram = PlanarDiagram::from_word(sites, &word)?;
        let mut v = CVec::zeros(dim);
        v[omega] = re(1.0);
        for &w in word.iter().rev() {
            v = &gens[w - 1] * v;
        }
        out.push(CanonicalBasisElement { shape, word, diagram, vector: StateVector { basis: Basis::Sector { sites, n_up }, amps: v } });
    }
    if out.len() != crate::linalg::binomial(sites, m) {
        return Err(Error::Inconsistent { what: "number of tableaux differs from the sector dimension".into(), residual: out.len() as f64 });
    }
    if sites == 5 && m == 2 {
        let words: Vec<Vec<usize>> = M5_M2_WORDS.iter().map(|w| w.to_vec()).collect();
        out = reorder_by_words(out, &words)?;
    }
    Ok(out)
}

/// Puts the basis into the order of `words`; every word must occur once.
pub fn reorder_by_words(basis: Vec<CanonicalBasisElement>, words: &[Vec<usize>]) -> Result<Vec<CanonicalBasisElement>> {
    if words.len() != basis.len() {
        return Err(invalid("word list length differs from the basis size"));
    }
    let mut pool: Vec<Option<CanonicalBasisElement>> = basis.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let idx = pool
            .iter()
            .position(|e| e.as_ref().map(|e| &e.word == w).unwrap_or(false))
            .ok_or_else(|| invalid(format!("word {:?} is not in the basis", w)))?;
        out.push(pool[idx].take().expect("present"));
    }
    Ok(out)
}

// ------------------------------------------------------------------ Gram

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub sites: usize,
    pub m: usize,
    /// G_ij = <t_i, eta t_j>
    pub g: nalgebra::DMatrix<f64>,
    /// H t_i = sum_j t_j H_ji
    pub h: nalgebra::DMatrix<i64>,
    /// PT t_i = sum_j t_j M_ji
    pub pt: CMat,
    pub imaginary_part: f64,
    pub asymmetry: f64,
    pub det: f64,
    pub min_eigenvalue: f64,
    pub h_integrality: f64,
    pub gh_residual: f64,
    pub pt_residual: f64,
}

/// Gram data for a basis in the sector with m down spins. `bundle` must be the
/// metric at g = 1, theta = pi/2.
pub fn gram_matrix(basis: &[CanonicalBasisElement], bundle: &MetricBundle, limits: &Limits) -> Result<GramMatrix> {
    let sites = bundle.sites();
    let first = basis.first().ok_or_else(|| invalid("empty basis"))?;
    let n_up = match first.vector.basis {
        Basis::Sector { n_up, .. } => n_up,
        _ => return Err(invalid("basis vectors must live in a sector")),
    };
    let m = sites - n_up;
    let dim = basis.len();
    let t = CMat::from_fn(dim, dim, |r, c| basis[c].vector.amps[r]);
    let eta = &bundle.sectors[n_up].eta;
    if eta.nrows() != dim {
        return Err(invalid("metric sector dimension differs from the basis size"));
    }
    let gc = t.adjoint() * eta * &t;
    let imaginary_part = gc.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
    let g = gc.map(|z| z.re);
    let asymmetry = (&g - g.transpose()).amax();
    let det = g.determinant();
    let min_eigenvalue = nalgebra::SymmetricEigen::new((&g + g.transpose()) * 0.5).eigenvalues.min();

    let spec = HamiltonianSpec::polar(sites, 1.0, PI / 2.0);
    let (k, c) = spec.one_particle()?;
    let h = bilinear_sector(&k, c, n_up, limits)?;
    let hc = solve(&t, &(&h * &t))?;
    let mut h_integrality: f64 = 0.0;
    let h_int = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
        let z = hc[(r, c)];
        let n = z.re.round();
        h_integrality = h_integrality.max((z - re(n)).norm());
        n as i64
    });
    let hf = h_int.map(|v| v as f64);
    let gh_residual = (&g * &hf - hf.transpose() * &g).amax();

    let p = parity_sector(sites, n_up);
    let pt = solve(&t, &(&p * t.map(|z| z.conj())))?;
    let gcx = g.map(re);
    let pt_residual = max_abs_diff(&(pt.adjoint() * &gcx * &pt), &gcx);
    Ok(GramMatrix {
        sites,
        m,
        g,
        h: h_int,
        pt,
        imaginary_part,
        asymmetry,
        det,
        min_eigenvalue,
        h_integrality,
        gh_residual,
        pt_residual,
    })
}

pub fn gram_for(sites: usize, m: usize, limits: &Limits) -> Result<(Vec<CanonicalBasisElement>, GramMatrix)> {
    let basis = generate_basis(sites, m, limits)?;
    let bundle = metric_for(&HamiltonianSpec::polar(sites, 1.0, PI / 2.0), limits, false)?;
    let gram = gram_matrix(&basis, &bundle, limits)?;
    if gram.h_integrality > 1e-9 {
        return Err(Error::Inconsistent { what: "H is not integral in the tableau basis".into(), residual: gram.h_integrality });
    }
    Ok((basis, gram))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub loops: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport {
    pub sites: usize,
    pub m: usize,
    pub pairs: usize,
    /// even loop count but G_ij != 0
    pub violations: Vec<PairCheck>,
    /// odd loop count and G_ij = 0 anyway
    pub vacuous: Vec<PairCheck>,
    /// entries within a factor 1e3 of the zero threshold
    pub near_threshold: Vec<PairCheck>,
}

/// G_ij = 0 whenever the closure of a_i a_j has an even number of loops.
pub fn check_conjecture_with(basis: &[CanonicalBasisElement], gram: &GramMatrix) -> Result<ConjectureReport> {
    let dim = basis.len();
    let mut rep = ConjectureReport { sites: gram.sites, m: gram.m, pairs: 0, violations: Vec::new(), vacuous: Vec::new(), near_threshold: Vec::new() };
    for i in 0..dim {
        for j in 0..dim {
            let loops = basis[i].diagram.compose(&basis[j].diagram)?.trace_closure();
            let value = gram.g[(i, j)];
            let pc = PairCheck { i: i + 1, j: j + 1, loops, value };
            rep.pairs += 1;
            let a = value.abs();
            if a > ZERO_TOL * 1e-3 && a < ZERO_TOL * 1e3 {
                rep.near_threshold.push(pc.clone());
            }
            if loops % 2 == 0 {
                if a >= ZERO_TOL {
                    rep.violations.push(pc);
                }
            } else if a < ZERO_TOL {
                rep.vacuous.push(pc);
            }
        }
    }
    Ok(rep)
}

pub fn check_conjecture(sites: usize, m: usize, limits: &Limits) -> Result<ConjectureReport> {
    let (basis, gram) = gram_for(sites, m, limits)?;
    check_conjecture_with(&basis, &gram)
}

/// Full-space matrix of e_{w_1} ... e_{w_k} in the g = 1 representation.
pub fn word_matrix(sites: usize, word: &[usize], limits: &Limits) -> Result<CMat> {
    let dim = 1usize << sites;
    let mut out = CMat::identity(dim, dim);
    for &w in word {
        if w == 0 || w >= sites {
            return Err(invalid(format!("e_{} does not exist on {} sites", w, sites)));
        }
        let mut k = CMat::zeros(sites, sites);
        k[(w - 1, w)] = re(-1.0);
        k[(w, w - 1)] = re(-1.0);
        k[(w - 1, w - 1)] = I;
        k[(w, w)] = -I;
        out = out * crate::chain::bilinear_full(&k, ZERO, limits)?;
    }
    Ok(out)
}

/// Words of length <= `max_len` that share a diagram must share a matrix;
/// diagrams with a closed loop act as zero since the loop weight vanishes at q = i.
/// Returns the worst residual.
pub fn faithfulness_residual(sites: usize, max_len: usize, limits: &Limits) -> Result<f64> {
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = words.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 1..sites {
                let mut v = w.clone();
                v.push(g);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let mut seen: Vec<(PlanarDiagram, CMat)> = Vec::new();
    let mut worst: f64 = 0.0;
    for w in &words {
        let d = PlanarDiagram::from_word(sites, w)?;
        let mat = word_matrix(sites, w, limits)?;
        if d.loops > 0 {
            worst = worst.max(mat.camax());
            continue;
        }
        match seen.iter().find(|(e, _)| e.pairing == d.pairing) {
            Some((_, m)) => worst = worst.max(max_abs_diff(m, &mat)),
            None => seen.push((d, mat)),
        }
    }
    Ok(worst)
}
