use clap::ValueEnum;
use serde_json::{json, Map, Value};
use xxchain_core::bch::{
    self, cross_validate_with_exact, decompose, lambda_prime_sequence, lambda_sequence, solve_a_series, solve_h_series, QMat, SeriesTerm,
};
use xxchain_core::bethe::{cross_validate_many_body, spectrum_for, Regime, ROOT_TOL};
use xxchain_core::chain::{build_hamiltonian_sector, HamiltonianSpec, Limits, Variant};
use xxchain_core::linalg::{eigenvalues, CMat, C64, I};
use xxchain_core::metric::{metric_for, MetricBundle, MetricPart};

use crate::json::{complex, float, matrix_json, operator_json};
use crate::output::{emit, fmt_f64, metadata, Table};
use crate::{ChainArgs, CliError, CliResult, Emit, Format, MetricArgs, PerturbArgs, SpectrumArgs, VariantArg};

const LAMBDA_CAP: usize = 64;
const CROSS_COUPLINGS: [f64; 3] = [0.05, 0.1, 0.2];

fn variant_name(v: VariantArg) -> &'static str {
    match v {
        VariantArg::H => "h",
        VariantArg::Hg => "hg",
        VariantArg::Hprime => "hprime",
        VariantArg::Truncated => "truncated",
        VariantArg::Periodic => "periodic",
    }
}

pub fn spec_of(chain: &ChainArgs, sites: usize) -> HamiltonianSpec {
    let polar = HamiltonianSpec::polar(sites, chain.g, chain.theta);
    match chain.variant {
        VariantArg::H => polar.with_variant(Variant::H),
        VariantArg::Hg => polar,
        VariantArg::Hprime => polar.with_variant(Variant::Hprime),
        VariantArg::Truncated => HamiltonianSpec::general(sites, I * chain.g, -I * chain.g).with_variant(Variant::HgTruncated),
        VariantArg::Periodic => HamiltonianSpec::general(sites, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).with_variant(Variant::Periodic),
    }
}

fn chain_params(chain: &ChainArgs) -> Value {
    json!({
        "sites": chain.sites,
        "g": float(chain.g),
        "theta": float(chain.theta),
        "variant": variant_name(chain.variant),
        "sector": chain.sector,
    })
}

fn check_sector(chain: &ChainArgs, sites: usize) -> CliResult<()> {
    match chain.sector {
        Some(n) if n > sites => Err(CliError::Usage(format!("sector {} out of range for {} sites", n, sites))),
        _ => Ok(()),
    }
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

// ------------------------------------------------------------------ spectrum

pub fn cmd_spectrum(args: &SpectrumArgs, limits: &Limits) -> CliResult<()> {
    let chain = &args.chain;
    let last = args.max_sites.unwrap_or(chain.sites);
    if last < chain.sites {
        return Err(CliError::Usage("--max-sites must be at least --sites".into()));
    }
    let tol = args.output.tolerance.unwrap_or(1e-8);
    let bethe_variant = matches!(chain.variant, VariantArg::H | VariantArg::Hg | VariantArg::Hprime);
    let dense = args.dense || !bethe_variant;

    let mut spectra = Vec::new();
    let mut rows = Vec::new();
    for sites in chain.sites..=last {
        check_sector(chain, sites)?;
        let spec = spec_of(chain, sites);
        spec.validate()?;
        let mut entry = Map::new();
        entry.insert("sites".into(), json!(sites));
        if bethe_variant {
            let sp = spectrum_for(&spec)?;
            let regime = match sp.regime {
                Regime::OnCircle => "OnCircle",
                Regime::OffCircle => "OffCircle",
            };
            let mut modes = Vec::new();
            for j in 0..sp.roots.len() {
                modes.push(json!({
                    "index": j + 1,
                    "k": complex(sp.momenta[j]),
                    "z": complex(sp.roots[j]),
                    "eps": complex(sp.energies[j]),
                    "residual": float(sp.residuals[j]),
                }));
                rows.push(vec![
                    sites.to_string(),
                    "bethe".into(),
                    String::new(),
                    (j + 1).to_string(),
                    fmt_f64(sp.energies[j].re),
                    fmt_f64(sp.energies[j].im),
                    fmt_f64(sp.momenta[j].re),
                    fmt_f64(sp.momenta[j].im),
                    fmt_f64(sp.residuals[j]),
                    regime.into(),
                ]);
            }
            entry.insert("regime".into(), json!(regime));
            entry.insert("modes".into(), Value::Array(modes));
            if args.dense && chain.sector.is_none() {
                let worst = cross_validate_many_body(&spec, &sp, limits, tol)?;
                entry.insert("bethe_dense_deviation".into(), float(worst));
            }
        }
        if dense {
            let sectors: Vec<usize> = match chain.sector {
                Some(n) => vec![n],
                None => (0..=sites).collect(),
            };
            let mut blocks = Vec::new();
            for n in sectors {
                let h = build_hamiltonian_sector(&spec, n, limits)?;
                let ev = sorted(eigenvalues(&h.matrix)?);
                for (i, e) in ev.iter().enumerate() {
                    rows.push(vec![
                        sites.to_string(),
                        "dense".into(),
                        n.to_string(),
                        (i + 1).to_string(),
                        fmt_f64(e.re),
                        fmt_f64(e.im),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
                blocks.push(json!({ "sector": n, "eigenvalues": ev.iter().map(|&e| complex(e)).collect::<Vec<_>>() }));
            }
            entry.insert("dense".into(), Value::Array(blocks));
        }
        spectra.push(Value::Object(entry));
    }
    let mut params = chain_params(chain);
    params["max_sites"] = json!(last);
    params["dense"] = json!(dense);
    let doc = json!({
        "metadata": metadata("spectrum", params, json!({ "root": float(ROOT_TOL), "cross_check": float(tol) })),
        "spectra": spectra,
    });
    let table = Table { header: vec!["sites", "source", "sector", "index", "re", "im", "k_re", "k_im", "residual", "regime"], rows };
    emit(&args.output, Format::Csv, doc, Some(table))
}

// ------------------------------------------------------------------ metric

fn residual_json(b: &MetricBundle) -> (Value, f64) {
    let r = &b.residuals;
    let items = [
        ("inverse", r.inverse),
        ("intertwining", r.intertwining),
        ("parity", r.parity),
        ("conjugation", r.conjugation),
        ("hermiticity", r.hermiticity),
        ("c_square", r.c_square),
        ("c_commutator", r.c_commutator),
        ("c_pt", r.c_pt),
        ("c_closed_form", r.c_closed_form),
        ("h_hermiticity", r.h_hermiticity),
        ("h_spectrum", r.h_spectrum),
        ("adjoint_exchange", r.adjoint_exchange),
    ];
    let worst = items.iter().fold(0.0f64, |m, (_, v)| m.max(*v));
    let map: Map<String, Value> = items.iter().map(|(k, v)| (k.to_string(), float(*v))).collect();
    (Value::Object(map), worst)
}

fn matrix_rows(rows: &mut Vec<Vec<String>>, part: &str, m: &CMat) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            rows.push(vec![part.into(), r.to_string(), c.to_string(), fmt_f64(m[(r, c)].re), fmt_f64(m[(r, c)].im)]);
        }
    }
}

pub fn cmd_metric(args: &MetricArgs, limits: &Limits) -> CliResult<()> {
    let chain = &args.chain;
    if !matches!(chain.variant, VariantArg::H | VariantArg::Hg | VariantArg::Hprime) {
        return Err(CliError::Usage("the metric is available for the h, hg and hprime variants".into()));
    }
    check_sector(chain, chain.sites)?;
    let tol = args.output.tolerance.unwrap_or(1e-8);
    let spec = spec_of(chain, chain.sites);
    limits.check(1usize << chain.sites.min(40))?;
    let bundle = metric_for(&spec, limits, args.force)?;
    let (residuals, worst) = residual_json(&bundle);

    let parts = [("eta", MetricPart::Eta), ("h", MetricPart::H), ("c", MetricPart::C)];
    let mut doc = Map::new();
    let mut rows = Vec::new();
    for (name, part) in parts {
        let (value, m) = match chain.sector {
            Some(n) => {
                let b = bundle.block(part, n).clone();
                (matrix_json(&b, &format!("sector:{}:{}", chain.sites, n)), b)
            }
            None => {
                let op = bundle.assemble(part, limits)?;
                (operator_json(&op), op.matrix)
            }
        };
        matrix_rows(&mut rows, name, &m);
        doc.insert(name.into(), value);
    }
    let mut params = chain_params(chain);
    params["force"] = json!(args.force);
    doc.insert("metadata".into(), metadata("metric", params, json!({ "residual": float(tol) })));
    doc.insert("positivity_margin".into(), float(bundle.positivity_margin));
    doc.insert("residuals".into(), residuals);
    doc.insert("within_tolerance".into(), json!(worst <= tol));
    doc.insert("log".into(), json!(bundle.log));
    let table = Table { header: vec!["part", "row", "col", "re", "im"], rows };
    emit(&args.output, Format::Json, Value::Object(doc), Some(table))?;
    if worst > tol {
        return Err(CliError::Core(xxchain_core::Error::CrossValidation { what: "metric identities".into(), worst }));
    }
    Ok(())
}

// ------------------------------------------------------------------ perturb

fn exact_coeff(term: &SeriesTerm, x: usize, y: usize, is_a: bool) -> Value {
    let Some(q): Option<&QMat> = term.exact.as_ref() else { return Value::Null };
    let v = q.get(x - 1, y - 1).to_string();
    if is_a {
        json!({ "re": "0", "im": v })
    } else {
        json!({ "re": v, "im": "0" })
    }
}

fn term_tables(terms: &[SeriesTerm], is_a: bool, rows: &mut Vec<Vec<String>>) -> Value {
    let mut out = Vec::new();
    for t in terms {
        let mut items = Vec::new();
        for b in decompose(&t.op.k, 1e-13) {
            let exact = exact_coeff(t, b.x, b.y, is_a);
            rows.push(vec![
                t.order.to_string(),
                b.x.to_string(),
                b.y.to_string(),
                fmt_f64(b.coeff.re),
                fmt_f64(b.coeff.im),
                b.basis.label().into(),
                exact.get(if is_a { "im" } else { "re" }).and_then(|v| v.as_str()).unwrap_or("").into(),
            ]);
            items.push(json!({
                "x": b.x,
                "y": b.y,
                "re": float(b.coeff.re),
                "im": float(b.coeff.im),
                "basis": b.basis.label(),
                "exact": exact,
            }));
        }
        out.push(json!({ "order": t.order, "constant": complex(t.op.constant), "terms": items }));
    }
    Value::Array(out)
}

pub fn cmd_perturb(args: &PerturbArgs, limits: &Limits) -> CliResult<()> {
    let order = args.order;
    let params = json!({
        "sites": args.sites,
        "order": order,
        "theta": float(args.theta),
        "emit": args.emit.to_possible_value().map(|v| v.get_name().to_string()),
    });
    let tol = args.output.tolerance.unwrap_or(bch::KERNEL_TOL);
    let meta = metadata("perturb", params, json!({ "kernel": float(tol) }));
    let mut rows: Vec<Vec<String>> = Vec::new();
    let (doc, header): (Value, Vec<&'static str>) = match args.emit {
        Emit::Lambdas => {
            if order > LAMBDA_CAP {
                return Err(CliError::Usage(format!("at most {} lambda values", LAMBDA_CAP)));
            }
            let l = lambda_sequence(order);
            let lp = lambda_prime_sequence(order);
            for (k, v) in l.values.iter().enumerate() {
                rows.push(vec!["lambda".into(), (k + 1).to_string(), v.to_string()]);
            }
            for (k, v) in lp.values.iter().enumerate() {
                rows.push(vec!["lambda_prime".into(), (k + 1).to_string(), v.to_string()]);
            }
            let strs = |s: &bch::RationalSequence| s.values.iter().map(|v| v.to_string()).collect::<Vec<_>>();
            (json!({ "metadata": meta, "lambda": strs(&l), "lambda_prime": strs(&lp) }), vec!["kind", "k", "value"])
        }
        Emit::ATerms | Emit::HTerms => {
            let is_a = args.emit == Emit::ATerms;
            let terms = if order == 0 {
                Vec::new()
            } else if is_a {
                solve_a_series(args.sites, order, args.theta)?.a_terms
            } else {
                solve_h_series(args.sites, order, args.theta)?.h_terms
            };
            let tables = term_tables(&terms, is_a, &mut rows);
            (json!({ "metadata": meta, "series": tables }), vec!["order", "x", "y", "re", "im", "basis", "exact"])
        }
        Emit::PTable => {
            if (args.theta - core::f64::consts::PI / 2.0).abs() >= 1e-15 {
                return Err(CliError::Usage("the p-table is defined at theta = 0.5pi".into()));
            }
            let table = if order == 0 { Vec::new() } else { solve_h_series(args.sites, 2 * order, args.theta)?.p_table() };
            let width = table.iter().map(|e| e.coeffs.len()).max().unwrap_or(0);
            let mut entries = Vec::new();
            for e in &table {
                let mut coeffs: Vec<String> = e.coeffs.iter().map(|c| c.to_string()).collect();
                coeffs.resize(width, "0".into());
                let mut r = vec![e.x.to_string(), e.n.to_string()];
                r.extend(coeffs.iter().cloned());
                rows.push(r);
                entries.push(json!({ "x": e.x, "n": e.n, "coeffs": coeffs }));
            }
            const COLS: [&str; 12] = ["g0", "g2", "g4", "g6", "g8", "g10", "g12", "g14", "g16", "g18", "g20", "g22"];
            let mut header = vec!["x", "n"];
            header.extend(COLS.iter().take(width));
            (json!({ "metadata": meta, "rows": entries, "variable": "g^2" }), header)
        }
        Emit::Kappa => {
            let table = if order == 0 { Vec::new() } else { solve_a_series(args.sites, order, args.theta)?.kappa_table() };
            let mut entries = Vec::new();
            for e in &table {
                rows.push(vec![e.n.to_string(), e.p.to_string(), e.x.to_string(), e.value.to_string()]);
                entries.push(json!({ "n": e.n, "p": e.p, "x": e.x, "value": e.value.to_string() }));
            }
            (json!({ "metadata": meta, "rows": entries }), vec!["n", "p", "x", "value"])
        }
        Emit::Cross => {
            let mut entries = Vec::new();
            let mut fit = Value::Null;
            if order > 0 {
                let rep = cross_validate_with_exact(args.sites, args.theta, order, &CROSS_COUPLINGS, limits)?;
                for &(g, e, h) in &rep.rows {
                    rows.push(vec![fmt_f64(g), fmt_f64(e), fmt_f64(h)]);
                    entries.push(json!({ "g": float(g), "eta_diff": float(e), "h_diff": float(h) }));
                }
                fit = json!({
                    "eta_slope": float(rep.eta_slope),
                    "eta_fit_error": float(rep.eta_fit_error),
                    "h_slope": float(rep.h_slope),
                    "h_fit_error": float(rep.h_fit_error),
                });
            }
            (json!({ "metadata": meta, "rows": entries, "fit": fit }), vec!["g", "eta_diff", "h_diff"])
        }
    };
    emit(&args.output, Format::Json, doc, Some(Table { header, rows }))
}
