//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always print; `--ignored` or `--include-ignored`
//! adds the slow tier (M = 7 Gram run is already cheap and always included;
//! the slow tier widens the Bethe sampling and the algebra sweep to M = 9).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xxchain_core::algebra::*;
use xxchain_core::bch::*;
use xxchain_core::bethe::*;
use xxchain_core::chain::*;
use xxchain_core::diagrams::*;
use xxchain_core::linalg::*;
use xxchain_core::metric::*;

const HALF_PI: f64 = PI / 2.0;

type Verdict = Result<String, String>;

fn lim() -> Limits {
    Limits::default()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: core::fmt::Debug>(x: T) -> String {
    format!("{:?}", x)
}

// 1 ----------------------------------------------------------------------

fn rational_oracle(_: bool) -> Verdict {
    let t0 = Instant::now();
    let lam = [q(1, 6), q(-1, 360), q(1, 15120), q(-1, 604800), q(1, 23950080), q(-691, 653837184000), q(1, 37362124800)];
    ensure(lambda_sequence(7).values == lam, "lambda differs")?;
    let printed = [q(1, 4), q(-1, 192), q(1, 7680), q(-17, 5160960), q(31, 371589120), q(691, 326998425600)];
    let lp = lambda_prime_sequence(6).values;
    ensure(lp[..5] == printed[..5], "lambda' differs in the first five entries")?;
    // the printed sixth entry carries a + sign; the recursion and the
    // alternating pattern both give -691/326998425600
    ensure(lp[5] == -printed[5].clone(), "lambda'_6 differs in magnitude")?;
    ensure(t0.elapsed().as_secs_f64() < 1.0, "slower than 1 s")?;
    Ok("lambda_1..7 exact; lambda'_1..5 exact; lambda'_6 = -691/326998425600 (printed with + sign)".into())
}

// 2 ----------------------------------------------------------------------

fn from_rows(rows: &[&[C64]]) -> CMat {
    CMat::from_fn(rows.len(), rows.len(), |r, s| rows[r][s])
}

fn m3_display(block: &CMat) -> CMat {
    let mut out = CMat::zeros(8, 8);
    out[(0, 0)] = ONE;
    out[(7, 7)] = ONE;
    for r in 0..3 {
        for s in 0..3 {
            out[(1 + r, 1 + s)] = block[(r, s)];
            out[(4 + r, 4 + s)] = block[(r, s)];
        }
    }
    out
}

/// Sector blocks by descending S^z, lexicographic within a block; the printed
/// matrices are the complex conjugate of ours in this order.
fn shown(a: &CMat, m: usize) -> CMat {
    let order: Vec<usize> = (0..=m).rev().flat_map(|n| sector_states(m, n)).collect();
    conj(&CMat::from_fn(order.len(), order.len(), |r, s| a[(order[r], order[s])]))
}

fn small_chain_metric(_: bool) -> Verdict {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for g in [0.3, 0.7, 1.0] {
        let b = metric_for(&HamiltonianSpec::polar(3, g, HALF_PI), &lim(), false).map_err(e)?;
        let d = g * g - 2.0;
        let block = from_rows(&[
            &[c(-2.0 / d, 0.0), c(0.0, -2.0 * g / d), c(g * g / d, 0.0)],
            &[c(0.0, 2.0 * g / d), c(-1.0 - 4.0 / d, 0.0), c(0.0, -2.0 * g / d)],
            &[c(g * g / d, 0.0), c(0.0, 2.0 * g / d), c(-2.0 / d, 0.0)],
        ]);
        let eta = b.assemble(MetricPart::Eta, &lim()).map_err(e)?.matrix;
        worst = worst.max(max_abs_diff(&shown(&eta, 3), &m3_display(&block)));
    }
    ensure(worst < 1e-10, format!("eta deviates by {:.2e}", worst))?;
    let b = metric_for(&HamiltonianSpec::polar(3, 1.0, HALF_PI), &lim(), false).map_err(e)?;
    let s = FRAC_1_SQRT_2;
    let root = from_rows(&[
        &[c(0.5 + s, 0.0), c(0.0, s), c(0.5 - s, 0.0)],
        &[c(0.0, -s), c(2f64.sqrt(), 0.0), c(0.0, s)],
        &[c(0.5 - s, 0.0), c(0.0, -s), c(0.5 + s, 0.0)],
    ]);
    let sq = b.assemble(MetricPart::EtaSqrt, &lim()).map_err(e)?.matrix;
    let d_sqrt = max_abs_diff(&shown(&sq, 3), &m3_display(&root));
    ensure(d_sqrt < 1e-10, format!("eta^(1/2) deviates by {:.2e}", d_sqrt))?;
    // h = -(a-_{12} + a-_{23})/sqrt 2; the printed form lacks the minus sign
    let mut k = CMat::zeros(3, 3);
    for x in 0..2 {
        k[(x, x + 1)] = re(-s);
        k[(x + 1, x)] = re(-s);
    }
    let h = b.assemble(MetricPart::H, &lim()).map_err(e)?.matrix;
    let want = bilinear_full(&k, ZERO, &lim()).map_err(e)?;
    let d_h = max_abs_diff(&h, &want);
    let d_printed = max_abs_diff(&h, &(-want.clone()));
    ensure(d_h < 1e-10, format!("h deviates by {:.2e}", d_h))?;
    ensure(t0.elapsed().as_secs_f64() < 1.0, "slower than 1 s")?;
    Ok(format!(
        "eta (g = 0.3, 0.7, 1) within {:.1e}, eta^(1/2) within {:.1e}; h = -(a-12 + a-23)/sqrt2 within {:.1e} (printed sign off by {:.2})",
        worst, d_sqrt, d_h, d_printed
    ))
}

// 3 ----------------------------------------------------------------------

fn five_site_h(_: bool) -> Verdict {
    let t0 = Instant::now();
    let b = metric_for(&HamiltonianSpec::polar(5, 1.0, HALF_PI), &lim(), false).map_err(e)?;
    let (k, _) = one_particle_part(5, b.sectors[0].h[(0, 0)], &b.sectors[1].h).map_err(e)?;
    let s5 = 5f64.sqrt();
    let r = (2.0 * (15.0 + 23.0 * s5)).sqrt();
    let rho1 = (9.0 - 6.0 * s5 - r) / 22.0;
    let rho2 = (3.0 - 2.0 * s5 - (40.0 + 21.0 * s5).sqrt()) / 11.0;
    let rho3 = (-2.0 + 5.0 * s5 - r) / 22.0;
    let mut want = CMat::zeros(5, 5);
    for (x, y, v) in [(0, 1, rho1), (3, 4, rho1), (1, 2, rho2), (2, 3, rho2), (0, 3, rho3), (1, 4, rho3)] {
        want[(x, y)] = re(v);
        want[(y, x)] = re(v);
    }
    let d = max_abs_diff(&k, &want);
    ensure(d < 1e-9, format!("rho deviate by {:.2e}", d))?;
    ensure(t0.elapsed().as_secs_f64() < 5.0, "slower than 5 s")?;
    Ok(format!("rho_1 = {:.10}, rho_2 = {:.10}, rho_3 = {:.10} within {:.1e}", k[(0, 1)].re, k[(1, 2)].re, k[(0, 3)].re, d))
}

// 4 ----------------------------------------------------------------------

fn hopping_table(_: bool) -> Verdict {
    let t0 = Instant::now();
    let m = 12;
    let table = solve_h_series(m, 6, HALF_PI).map_err(e)?.p_table();
    let get = |x: usize, n: usize| table.iter().find(|p| p.x == x && p.n == n).map(|p| p.coeffs.clone());
    let poly = |v: [(i64, i64); 4]| v.iter().map(|&(a, b)| q(a, b)).collect::<Vec<_>>();
    let checks = [
        // 1 - (128 g^2 + 8 g^4 + g^6)/512
        (1, 1, poly([(1, 1), (-128, 512), (-8, 512), (-1, 512)])),
        ((m - 1), 1, poly([(1, 1), (-128, 512), (-8, 512), (-1, 512)])),
        // (20 g^4 + 3 g^6)/256
        (1, 3, poly([(0, 1), (0, 1), (20, 256), (3, 256)])),
        ((m - 3), 3, poly([(0, 1), (0, 1), (20, 256), (3, 256)])),
        (2, 3, poly([(0, 1), (0, 1), (0, 1), (5, 512)])),
        (1, 5, poly([(0, 1), (0, 1), (0, 1), (-23, 512)])),
        ((m - 5), 5, poly([(0, 1), (0, 1), (0, 1), (-23, 512)])),
    ];
    for (x, n, want) in checks {
        ensure(get(x, n).as_ref() == Some(&want), format!("p_{}^({}) = {:?}", x, n, get(x, n)))?;
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(secs < 30.0, "slower than 30 s")?;
    Ok(format!("p^(1), p^(3), p^(5) through g^6 exact at M = 12 ({:.2} s)", secs))
}

// 5 ----------------------------------------------------------------------

fn a_series(_: bool) -> Verdict {
    // (n, p, x, value): coefficient of i(a+_{x,x+2p+1} + mirror) in A_{2n+1}
    let kappa: &[(usize, usize, usize, i64, i64)] = &[
        (1, 0, 1, 1, 6),
        (2, 0, 1, 1, 24),
        (2, 0, 2, 1, 120),
        (2, 1, 1, -11, 120),
        (3, 0, 1, 7, 240),
        (3, 0, 2, 1, 48),
        (3, 0, 3, 13, 840),
        (3, 1, 1, -1, 60),
        (3, 1, 2, 3, 560),
        (3, 2, 1, 103, 1680),
    ];
    let a9: &[(usize, usize, i64, i64)] = &[
        (0, 1, 1, 64),
        (0, 2, 23, 2240),
        (0, 3, 17, 1920),
        (0, 4, 25, 8064),
        (1, 1, -11, 560),
        (1, 2, -29, 1920),
        (1, 3, -587, 40320),
        (2, 1, 113, 13440),
        (2, 2, -59, 8064),
        (3, 1, -1823, 40320),
    ];
    let m = 20;
    let s = solve_a_series(m, 9, HALF_PI).map_err(e)?;
    let table = s.kappa_table();
    let find = |n: usize, p: usize, x: usize| table.iter().find(|k| k.n == n && k.p == p && k.x == x).map(|k| k.value.clone());
    for &(n, p, x, a, b) in kappa {
        ensure(find(n, p, x) == Some(q(a, b)), format!("A_{} entry p={} x={}", 2 * n + 1, p, x))?;
    }
    for &(p, x, a, b) in a9 {
        let got = find(4, p, x).ok_or("missing A_9 entry")?;
        ensure(got == q(a, b) || got == -q(a, b), format!("A_9 magnitude p={} x={}", p, x))?;
    }
    // the a+ reading solves the order-9 equation, the printed a- reading does not
    let mut terms = Vec::new();
    for x in 1..=m {
        for y in x + 1..=m {
            let d = y - x;
            if d % 2 == 0 || d > 9 {
                continue;
            }
            let p = (d - 1) / 2;
            let lx = x.min(m + 1 - y);
            let v = a9.iter().find(|k| k.0 == p && k.1 == lx).map(|k| k.2 as f64 / k.3 as f64).unwrap_or(if d == 9 { 1.0 / 9.0 } else { 0.0 });
            terms.push((x, y, v));
        }
    }
    let plus = a_equation_residual(&s, 9, &hopping_matrix(m, &terms, Hop::Plus, true));
    let minus = a_equation_residual(&s, 9, &hopping_matrix(m, &terms, Hop::Minus, true));
    ensure(plus < 1e-12, "a+ reading of A_9 fails")?;
    Ok(format!(
        "A_3, A_5, A_7 exact (A_5 (1,4) = -11/120, A_7 (1,6) = 103/1680 as i-coefficients); A_9 magnitudes equal; sign report: a+ residual {:.1e}, printed a- residual {:.2}",
        plus, minus
    ))
}

// 6 ----------------------------------------------------------------------

fn convergence(_: bool) -> Verdict {
    let t0 = Instant::now();
    let mut out = Vec::new();
    for m in [4usize, 6] {
        for order in [3usize, 5] {
            let r = cross_validate_with_exact(m, HALF_PI, order, &[0.05, 0.1, 0.2], &lim()).map_err(e)?;
            ensure(r.eta_slope >= (order + 1) as f64 && r.eta_fit_error < 0.3, format!("M={} order {}: {:?}", m, order, r))?;
            out.push(format!("M={} n={}: {:.2}", m, order, r.eta_slope));
        }
    }
    ensure(t0.elapsed().as_secs_f64() < 60.0, "slower than 1 min")?;
    Ok(format!("fitted exponents {}", out.join(", ")))
}

// 7 ----------------------------------------------------------------------

fn proposition_one(slow: bool) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let samples = if slow { 100 } else { 50 };
    let mut defect: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for m in 2..=10usize {
        for _ in 0..samples {
            let g = rng.random_range(0.0..0.999);
            let th = rng.random_range(0.0..2.0 * PI);
            let spec = HamiltonianSpec::polar(m, g, th);
            let sp = spectrum_for(&spec).map_err(e)?;
            defect = defect.max(sp.max_circle_defect());
            dev = dev.max(cross_validate_many_body(&spec, &sp, &lim(), f64::INFINITY).map_err(e)?);
        }
    }
    ensure(defect < 1e-10, format!("root off the circle by {:.2e}", defect))?;
    ensure(dev < 1e-8, format!("spectra differ by {:.2e}", dev))?;
    Ok(format!("M = 2..10, {} samples each: ||z|-1| <= {:.1e}, Bethe vs dense {:.1e}", samples, defect, dev))
}

// 8 ----------------------------------------------------------------------

fn jordan(_: bool) -> Verdict {
    let h = build_hamiltonian_sector(&HamiltonianSpec::polar(4, 1.0, HALF_PI), 2, &lim()).map_err(e)?.matrix;
    let rep = jordan_analyze(&h, CLUSTER_TOL, RANK_TOL).map_err(e)?;
    let s2 = 2f64.sqrt();
    for l in [s2, -s2] {
        let cl = rep.cluster_near(c(l, 0.0), 1e-6).ok_or("missing cluster")?;
        ensure(cl.blocks == vec![2], format!("blocks at {}: {:?}", l, cl.blocks))?;
    }
    let nontrivial: usize = rep.clusters.iter().map(|c| c.blocks.iter().filter(|&&b| b > 1).count()).sum();
    ensure(nontrivial == 2, "M = 4 should have exactly two nontrivial blocks")?;

    let gc = exceptional_coupling(5);
    let h = build_hamiltonian_sector(&HamiltonianSpec::polar(5, gc, HALF_PI), 3, &lim()).map_err(e)?.matrix;
    let rep5 = jordan_analyze(&h, CLUSTER_TOL, RANK_TOL).map_err(e)?;
    let r = 2.5f64.sqrt();
    for l in [0.0, r, -r] {
        let cl = rep5.cluster_near(c(l, 0.0), 1e-6).ok_or("missing cluster")?;
        ensure(cl.blocks[0] == 3, format!("blocks at {}: {:?}", l, cl.blocks))?;
    }
    for (m, n, g) in [(4, 2, 0.95), (5, 3, 0.95 * gc)] {
        let h = build_hamiltonian_sector(&HamiltonianSpec::polar(m, g, HALF_PI), n, &lim()).map_err(e)?.matrix;
        ensure(jordan_analyze(&h, CLUSTER_TOL, RANK_TOL).map_err(e)?.diagonalizable, format!("M = {} not diagonalizable below threshold", m))?;
    }
    Ok("M=4 g=1: [2] at +-sqrt2, [1,1] at 0; M=5 g=sqrt(3/2): [3] at +-sqrt(5/2), [3,1] at 0; diagonalizable 5% below".into())
}

// 9 ----------------------------------------------------------------------

fn central_charge(_: bool) -> Verdict {
    let t0 = Instant::now();
    // (g, odd M, c_eff, f_inf, f_s) read off the groundstate expansions
    let cases = [
        (0.0, true, -2.0, -1.0 / PI, 1.0 - 2.0 / PI),
        (0.0, false, 1.0, -1.0 / PI, 1.0 - 2.0 / PI),
        (1.0, true, 1.0, -1.0 / PI, 1.0),
        (1.0, false, -2.0, -1.0 / PI, 1.0),
    ];
    let mut out = Vec::new();
    for (g, odd, ceff, finf, fs) in cases {
        let fit = groundstate_scan(g, HALF_PI, &default_window(odd)).map_err(e)?.fit;
        ensure((fit.c_eff - ceff).abs() < 0.01 * ceff.abs(), format!("g={} odd={}: c_eff {}", g, odd, fit.c_eff))?;
        ensure((fit.f_inf - finf).abs() < 1e-6 && (fit.f_s - fs).abs() < 1e-4, format!("g={} odd={}: {:?}", g, odd, fit))?;
        out.push(format!("g={} {}: {:.4}", g, if odd { "odd" } else { "even" }, fit.c_eff));
    }
    ensure(t0.elapsed().as_secs_f64() < 120.0, "slower than 2 min")?;
    Ok(format!("c_eff {}", out.join(", ")))
}

// 10 ---------------------------------------------------------------------

fn gram(_: bool) -> Verdict {
    let s = 5f64.sqrt();
    let printed_g: [[f64; 10]; 10] = [
        [2.0 * (3.0 + s) / 5.0, 0.0, 2.0 * (1.0 + s) / 5.0, 0.6 + 1.0 / s, 0.0, 0.0, -0.4, 0.4, 0.0, 0.6],
        [0.0, 1.0 + 3.0 / s, 0.0, 0.0, 1.0 + 1.0 / s, 0.0, 0.0, 0.0, 1.0, 0.0],
        [2.0 * (1.0 + s) / 5.0, 0.0, 2.0 * (2.0 + s) / 5.0, 0.2 + 1.0 / s, 0.0, 0.0, 0.2, 0.8, 0.0, 0.2],
        [0.6 + 1.0 / s, 0.0, 0.2 + 1.0 / s, 3.0 * (3.0 + s) / 5.0, 0.0, 0.0, 0.8, 0.2, 0.0, 1.8],
        [0.0, 1.0 + 1.0 / s, 0.0, 0.0, 1.0 + 2.0 / s, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [-0.4, 0.0, 0.2, 0.8, 0.0, 0.0, 1.8, 0.2, 0.0, 0.8],
        [0.4, 0.0, 0.8, 0.2, 0.0, 0.0, 0.2, 0.8, 0.0, 0.2],
        [0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.6, 0.0, 0.2, 1.8, 0.0, 0.0, 0.8, 0.2, 0.0, 1.8],
    ];
    let printed_h: [[i64; 10]; 10] = [
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 1, 1, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 0, 2, 1, 0, 1],
        [0, 0, 0, 0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 1, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 0, 1, 1, 0, 2],
        [0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
    ];
    let (_, g) = gram_for(5, 2, &lim()).map_err(e)?;
    let mut dg: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            dg = dg.max((g.g[(i, j)] - printed_g[i][j]).abs());
            ensure(g.h[(i, j)] == printed_h[i][j], format!("H[{}][{}]", i + 1, j + 1))?;
        }
    }
    ensure(dg < 1e-8, format!("G deviates by {:.2e}", dg))?;
    let mut identities: f64 = 0.0;
    let mut violations = 0;
    let mut vacuous = 0;
    for m in [3usize, 5, 7] {
        for k in 0..=m {
            let (basis, gram) = gram_for(m, k, &lim()).map_err(e)?;
            ensure((gram.det - 1.0).abs() < 1e-8 && gram.min_eigenvalue > 0.0 && gram.asymmetry < 1e-10, format!("M={} m={}", m, k))?;
            identities = identities.max(gram.gh_residual).max(gram.pt_residual);
            let rep = check_conjecture_with(&basis, &gram).map_err(e)?;
            violations += rep.violations.len();
            vacuous += rep.vacuous.len();
        }
    }
    ensure(identities < 1e-8, format!("GH = H^tG or M*GM = G off by {:.2e}", identities))?;
    ensure(violations == 0, format!("{} violations", violations))?;
    Ok(format!(
        "printed G within {:.1e}, H exact; M = 3, 5, 7 all sectors: 0 violations ({} odd-loop zeros); identities within {:.1e}",
        dg, vacuous, identities
    ))
}

// 11 ---------------------------------------------------------------------

fn algebra(slow: bool) -> Verdict {
    let l = lim();
    let top = if slow { 9 } else { 7 };
    let mut rel: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut count = 0;
    let mut note = |r: &AlgebraRep, rel: &mut f64| {
        *rel = rel.max(r.worst_relation());
        count += 1;
    };
    for m in (3..=top).step_by(2) {
        let gc = exceptional_coupling(m);
        for g in [0.0, 0.5, 1.0, 0.9 * gc] {
            let qs = uqsl2_rep(m, g, HALF_PI, false, &l).map_err(e)?;
            note(&qs, &mut rel);
            let gl = gl11_rep(m, g, HALF_PI, &l).map_err(e)?;
            note(&gl, &mut rel);
            let h = gl.natural_hamiltonian(&l).map_err(e)?;
            sym = check_symmetry(&gl, &h).map_err(e)?.iter().fold(sym, |a, r| a.max(r.residual));
            let tl = tl_rep(m, g, HALF_PI, &l).map_err(e)?;
            sym = tl_pair_commutators(&qs, &tl).iter().fold(sym, |a, r| a.max(r.residual));
        }
    }
    for m in (4..=top - 1).step_by(2) {
        for g in [0.0, 0.5, 0.9] {
            for pt in [false, true] {
                let qs = uqsl2_rep(m, g, HALF_PI, pt, &l).map_err(e)?;
                note(&qs, &mut rel);
                let tl = tl_rep(m, g, HALF_PI, &l).map_err(e)?;
                sym = tl_pair_commutators(&qs, &tl).iter().fold(sym, |a, r| a.max(r.residual));
            }
            let gl = gl11_rep(m, g, HALF_PI, &l).map_err(e)?;
            note(&gl, &mut rel);
            let h = gl.natural_hamiltonian(&l).map_err(e)?;
            sym = check_symmetry(&gl, &h).map_err(e)?.iter().fold(sym, |a, r| a.max(r.residual));
        }
    }
    for m in 3..=top.min(6) {
        for th in [PI / 5.0, 0.7, 2.0] {
            if let Ok(u) = uqgl11_rep(m, th, &l) {
                note(&u, &mut rel);
                let h = u.natural_hamiltonian(&l).map_err(e)?;
                sym = check_symmetry(&u, &h).map_err(e)?.iter().fold(sym, |a, r| a.max(r.residual));
            }
            let hk = hecke_rep(m, th, &l).map_err(e)?;
            note(&hk, &mut rel);
        }
        for g in [0.0, 0.5, 1.0] {
            rel = rel.max(tl_relation_audit(m, g, &l).map_err(e)?.worst());
        }
    }
    ensure(rel < 1e-10, format!("worst relation {:.2e}", rel))?;
    ensure(sym < 1e-10, format!("worst symmetry commutator {:.2e}", sym))?;
    Ok(format!("{} representations up to M = {}: relations within {:.1e}, symmetry commutators within {:.1e}", count, top, rel, sym))
}

// 12 ---------------------------------------------------------------------

fn properties(_: bool) -> Verdict {
    let l = lim();
    for m in [4usize, 5] {
        let gc = exceptional_coupling(m);
        let mut last = f64::INFINITY;
        for i in 0..20 {
            let g = gc * i as f64 / 20.0;
            let b = metric_for(&HamiltonianSpec::polar(m, g, HALF_PI), &l, false).map_err(e)?;
            ensure(b.positivity_margin <= last + 1e-12, format!("margin rises at M={} g={}", m, g))?;
            last = b.positivity_margin;
            let cop = b.assemble(MetricPart::C, &l).map_err(e)?.matrix;
            let h = build_hamiltonian(&b.spec, &l).map_err(e)?.matrix;
            let dim = cop.nrows();
            ensure(max_abs_diff(&(&cop * &cop), &identity(dim)) < 1e-9, "C^2 != 1")?;
            ensure(max_abs(&comm(&h, &cop)) < 1e-9, "[H, C] != 0")?;
            for s in &b.sectors {
                let ev = eigenvalues(&s.h).map_err(e)?;
                ensure(ev.iter().all(|z| z.im.abs() < 1e-10), format!("h has complex spectrum at M={} g={}", m, g))?;
            }
        }
        // beyond the threshold some eigenvalue of H leaves the real axis
        let h = build_hamiltonian(&HamiltonianSpec::polar(m, 1.05 * gc, HALF_PI), &l).map_err(e)?.matrix;
        let worst = eigenvalues(&h).map_err(e)?.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
        ensure(worst > 1e-3, format!("no complex eigenvalue beyond threshold at M={}", m))?;
    }
    Ok("margin non-increasing over 20 couplings (M = 4, 5); C^2 = 1, [H, C] = 0, real spectrum of h; complex pairs beyond threshold".into())
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        // libtest-style listing keeps `cargo test -- --list` working
        println!("acceptance: test");
        return;
    }
    let slow = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let criteria: [(&str, fn(bool) -> Verdict); 12] = [
        ("rational oracle (BCH coefficients)", rational_oracle),
        ("exact three-site metric", small_chain_metric),
        ("five-site h at g = 1", five_site_h),
        ("perturbative hopping table", hopping_table),
        ("A-series oracle", a_series),
        ("series vs exact convergence", convergence),
        ("real Bethe roots and spectrum", proposition_one),
        ("Jordan structure", jordan),
        ("central-charge fits", central_charge),
        ("Gram conjecture", gram),
        ("algebra audits", algebra),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let v = f(slow);
        let secs = t0.elapsed().as_secs_f64();
        match v {
            Ok(detail) => println!("criterion {:>2} PASS [{:.2}s] {}: {}", i + 1, secs, name, detail),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{:.2}s] {}: {}", i + 1, secs, name, detail);
            }
        }
    }
    if slow {
        println!("slow tier included");
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
