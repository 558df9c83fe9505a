//! Verification suites. Each check returns a verdict and a one-line detail.

use core::f64::consts::PI;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use xxchain_core::algebra::{
    check_symmetry, exceptional_coupling, gl11_rep, hecke_rep, jordan_analyze, tl_relation_audit, uqgl11_rep, uqsl2_rep, CLUSTER_TOL, RANK_TOL,
};
use xxchain_core::bch::{cross_validate_with_exact, lambda_prime_sequence, lambda_sequence, solve_h_series};
use xxchain_core::bethe::{cross_validate_many_body, default_window, groundstate_scan, spectrum_for};
use xxchain_core::chain::{build_hamiltonian, build_hamiltonian_sector, HamiltonianSpec, Limits};
use xxchain_core::diagrams::{check_conjecture, gram_for};
use xxchain_core::linalg::{max_abs_diff, C64};
use xxchain_core::metric::metric_for;

use crate::json::float;
use crate::output::{emit, metadata, Table};
use crate::{CliError, CliResult, Format, Suite, Tamper, VerifyArgs};

type Outcome = Result<(bool, String), xxchain_core::Error>;

pub struct Ctx {
    pub limits: Limits,
    pub tol: f64,
    pub max_sites: usize,
    pub full: bool,
    pub tamper: Option<Tamper>,
}

pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn lambdas(_: &Ctx) -> Outcome {
    let l = [q(1, 6), q(-1, 360), q(1, 15120), q(-1, 604800), q(1, 23950080), q(-691, 653837184000), q(1, 37362124800)];
    let lp = [q(1, 4), q(-1, 192), q(1, 7680), q(-17, 5160960), q(31, 371589120), q(-691, 326998425600)];
    let ok = lambda_sequence(7).values == l && lambda_prime_sequence(6).values == lp;
    Ok((ok, "lambda_1..7 and lambda'_1..6 as exact rationals".into()))
}

fn metric_identities(ctx: &Ctx) -> Outcome {
    let top = ctx.max_sites.min(if ctx.full { 9 } else { 6 });
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for m in 3..=top {
        for (g, theta) in [(0.3, PI / 2.0), (0.7, PI / 2.0), (0.5, PI / 3.0)] {
            let spec = HamiltonianSpec::polar(m, g, theta);
            let bundle = metric_for(&spec, &ctx.limits, false)?;
            for n in 0..=m {
                let h = build_hamiltonian_sector(&spec, n, &ctx.limits)?.matrix;
                let mut eta = bundle.sectors[n].eta.clone();
                if ctx.tamper == Some(Tamper::EtaTranspose) {
                    eta = eta.transpose();
                }
                worst = worst.max(max_abs_diff(&(&eta * &h), &(h.adjoint() * &eta)));
                worst = worst.max(max_abs_diff(&eta, &eta.adjoint()));
            }
            if bundle.positivity_margin <= 0.0 {
                return Ok((false, format!("eta not positive at M={} g={}", m, g)));
            }
            runs += 1;
        }
    }
    Ok((worst < ctx.tol, format!("{} chains, worst |eta H - H* eta| {:.2e}", runs, worst)))
}

fn bethe_vs_dense(ctx: &Ctx) -> Outcome {
    let top = ctx.max_sites.min(if ctx.full { 10 } else { 6 });
    let samples = [(0.1, 0.3), (0.45, 1.1), (0.8, PI / 2.0), (0.95, 2.5), (0.6, 4.0)];
    let mut worst: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for m in 2..=top {
        for &(g, th) in &samples {
            let spec = HamiltonianSpec::polar(m, g, th);
            let sp = spectrum_for(&spec)?;
            defect = defect.max(sp.max_circle_defect());
            worst = worst.max(cross_validate_many_body(&spec, &sp, &ctx.limits, f64::INFINITY)?);
        }
    }
    let ok = defect < 1e-10 && worst < 1e-8;
    Ok((ok, format!("M <= {}: circle defect {:.1e}, spectrum deviation {:.1e}", top, defect, worst)))
}

fn jordan(ctx: &Ctx) -> Outcome {
    let h = build_hamiltonian_sector(&HamiltonianSpec::polar(4, 1.0, PI / 2.0), 2, &ctx.limits)?.matrix;
    let rep = jordan_analyze(&h, CLUSTER_TOL, RANK_TOL)?;
    let s2 = 2f64.sqrt();
    let mut ok = [s2, -s2].iter().all(|&l| rep.cluster_near(C64::new(l, 0.0), 1e-6).map(|c| c.blocks == vec![2]).unwrap_or(false));
    if ctx.full {
        let gc = exceptional_coupling(5);
        let h = build_hamiltonian_sector(&HamiltonianSpec::polar(5, gc, PI / 2.0), 3, &ctx.limits)?.matrix;
        let rep = jordan_analyze(&h, CLUSTER_TOL, RANK_TOL)?;
        let r = 2.5f64.sqrt();
        ok &= [r, -r].iter().all(|&l| rep.cluster_near(C64::new(l, 0.0), 1e-6).map(|c| c.blocks == vec![3]).unwrap_or(false));
        let below = build_hamiltonian_sector(&HamiltonianSpec::polar(5, 0.95 * gc, PI / 2.0), 3, &ctx.limits)?.matrix;
        ok &= jordan_analyze(&below, CLUSTER_TOL, RANK_TOL)?.diagonalizable;
    }
    Ok((ok, "2x2 blocks at +-sqrt2 for M=4, g=1".into()))
}

fn algebra(ctx: &Ctx) -> Outcome {
    let l = &ctx.limits;
    let mut worst: f64 = 0.0;
    for m in [3usize, 5] {
        worst = worst.max(gl11_rep(m, 0.6, PI / 2.0, l)?.worst_relation());
        worst = worst.max(uqsl2_rep(m, 0.6, PI / 2.0, false, l)?.worst_relation());
    }
    worst = worst.max(uqsl2_rep(4, 0.5, PI / 2.0, true, l)?.worst_relation());
    worst = worst.max(hecke_rep(4, PI / 5.0, l)?.worst_relation());
    worst = worst.max(uqgl11_rep(3, PI / 5.0, l)?.worst_relation());
    worst = worst.max(tl_relation_audit(4, 0.5, l)?.worst());
    let rep = gl11_rep(5, 0.8, PI / 2.0, l)?;
    let h = build_hamiltonian(&HamiltonianSpec::polar(5, 0.8, PI / 2.0), l)?.matrix;
    let sym = check_symmetry(&rep, &h)?.iter().fold(0.0f64, |a, r| a.max(r.residual));
    Ok((worst < 1e-10 && sym < 1e-10, format!("relations {:.1e}, [H, gl(1|1)] {:.1e}", worst, sym)))
}

fn perturbation(_: &Ctx) -> Outcome {
    let table = solve_h_series(12, 6, PI / 2.0)?.p_table();
    let get = |x: usize, n: usize| table.iter().find(|e| e.x == x && e.n == n).map(|e| e.coeffs.clone());
    let edge = vec![q(1, 1), q(-1, 4), q(-1, 64), q(-1, 512)];
    let p5 = vec![q(0, 1), q(0, 1), q(0, 1), q(-23, 512)];
    let p3 = vec![q(0, 1), q(0, 1), q(5, 64), q(3, 256)];
    let ok = get(1, 1) == Some(edge) && get(1, 5) == Some(p5) && get(1, 3) == Some(p3);
    Ok((ok, "p_1^(1), p_1^(3), p_1^(5) through g^6 at M=12".into()))
}

fn convergence(ctx: &Ctx) -> Outcome {
    let sizes: &[usize] = if ctx.full { &[4, 6] } else { &[4] };
    let order = 3;
    let mut detail = Vec::new();
    let mut ok = true;
    for &m in sizes {
        let rep = cross_validate_with_exact(m, PI / 2.0, order, &[0.05, 0.1, 0.2], &ctx.limits)?;
        ok &= rep.eta_slope >= (order + 1) as f64 - 0.3 && rep.eta_fit_error < 0.3;
        detail.push(format!("M={} slope {:.2}", m, rep.eta_slope));
    }
    Ok((ok, detail.join(", ")))
}

fn gram(ctx: &Ctx) -> Outcome {
    let mut sizes = vec![3usize, 5];
    if ctx.full && ctx.max_sites >= 7 {
        sizes.push(7);
    }
    let mut violations = 0;
    for &m in &sizes {
        for k in 0..=m {
            violations += check_conjecture(m, k, &ctx.limits)?.violations.len();
        }
    }
    let (_, g) = gram_for(5, 2, &ctx.limits)?;
    let g11 = 2.0 * (3.0 + 5f64.sqrt()) / 5.0;
    let ok = violations == 0 && (g.g[(0, 0)] - g11).abs() < 1e-10 && (g.det - 1.0).abs() < 1e-8 && g.h[(5, 6)] == 2;
    Ok((ok, format!("M in {:?}: {} violations", sizes, violations)))
}

fn central_charge(_: &Ctx) -> Outcome {
    // (g, odd M, expected c_eff)
    let cases = [(0.0, false, 1.0), (0.0, true, -2.0), (1.0, true, 1.0), (1.0, false, -2.0)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (g, odd, c) in cases {
        let fit = groundstate_scan(g, PI / 2.0, &default_window(odd))?.fit.c_eff;
        ok &= (fit - c).abs() < 0.01 * c.abs();
        detail.push(format!("{:.4}", fit));
    }
    Ok((ok, format!("c_eff (g=0 even, g=0 odd, g=1 odd, g=1 even) = {}", detail.join(", "))))
}

pub fn run_suite(ctx: &Ctx) -> Vec<CheckResult> {
    let mut checks: Vec<(&'static str, fn(&Ctx) -> Outcome)> = vec![
        ("lambda-sequences", lambdas),
        ("metric-identities", metric_identities),
        ("bethe-vs-dense", bethe_vs_dense),
        ("jordan-structure", jordan),
        ("algebra-relations", algebra),
        ("hopping-table", perturbation),
        ("series-convergence", convergence),
        ("gram-conjecture", gram),
    ];
    if ctx.full {
        checks.push(("central-charge", central_charge));
    }
    checks
        .into_iter()
        .map(|(name, f)| {
            let t0 = Instant::now();
            let (pass, detail) = match f(ctx) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {}", e)),
            };
            CheckResult { name, pass, detail, seconds: t0.elapsed().as_secs_f64() }
        })
        .collect()
}

pub fn cmd_verify(args: &VerifyArgs, limits: &Limits) -> CliResult<()> {
    let full = args.suite == Suite::Full;
    let ctx = Ctx {
        limits: *limits,
        tol: args.output.tolerance.unwrap_or(1e-9),
        max_sites: args.max_sites.unwrap_or(if full { 10 } else { 6 }),
        full,
        tamper: args.tamper,
    };
    let results = run_suite(&ctx);
    let failed = results.iter().filter(|r| !r.pass).count();
    for r in &results {
        eprintln!("{}  {:<20} {:>7.2}s  {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.seconds, r.detail);
    }
    if args.output.out.is_some() || args.output.format.is_some() {
        let doc = json!({
            "metadata": metadata("verify", json!({ "suite": if full { "full" } else { "fast" }, "max_sites": ctx.max_sites }), json!({ "metric": float(ctx.tol) })),
            "checks": results.iter().map(|r| json!({ "name": r.name, "pass": r.pass, "detail": r.detail })).collect::<Vec<Value>>(),
        });
        let rows = results.iter().map(|r| vec![r.name.to_string(), (if r.pass { "PASS" } else { "FAIL" }).to_string(), r.detail.clone()]).collect();
        emit(&args.output, Format::Json, doc, Some(Table { header: vec!["check", "verdict", "detail"], rows }))?;
    }
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}
