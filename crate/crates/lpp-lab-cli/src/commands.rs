use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;
use std::process::ExitCode;

use lpp_lab::endpoint::solve_endpoint;
use lpp_lab::percolation::{empirical_cdf, exact_cdf_small, sample_g};
use lpp_lab::quaddiff::{build_contours, real_period_residual, write_points_csv, TraceOptions};
use lpp_lab::toeplitz::{DistributionTable, SymbolSpec, TableOptions};
use lpp_lab::ModelParams;
use num_complex::Complex64;
use serde::Serialize;

use crate::output::{self, num, CliError, CliResult};
use crate::suites::{self, SuiteReport};
use crate::{ContourArgs, ExactArgs, Format, SampleArgs, Suite, ValidateArgs};

fn default_name(stem: &str, format: Format) -> String {
    match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    }
}

#[derive(Serialize)]
struct SampleOut {
    t: f64,
    m: usize,
    n: usize,
    seed: u64,
    count: usize,
    histogram: Vec<HistRow>,
    cdf: Vec<CdfRow>,
}

#[derive(Serialize)]
struct HistRow {
    g: u64,
    count: usize,
}

#[derive(Serialize)]
struct CdfRow {
    n: u64,
    cdf: f64,
}

pub fn sample(args: &SampleArgs) -> CliResult<ExitCode> {
    let batch = sample_g(args.t, args.m, args.n, args.seed, args.count)?;
    let hist = batch.histogram();
    let top = hist.last().map_or(0, |h| h.0);
    let cdf: Vec<CdfRow> = (0..=top).map(|n| CdfRow { n, cdf: empirical_cdf(&batch, n as i64) }).collect();
    let path = output::resolve(args.output.out.as_deref(), &default_name("sample", args.output.format));
    match args.output.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = hist.iter().map(|(g, c)| vec![g.to_string(), c.to_string()]).collect();
            output::write_csv(&path, &["g", "count"], &rows)?;
            let cdf_path = sibling(&path, "cdf");
            let rows: Vec<Vec<String>> = cdf.iter().map(|r| vec![r.n.to_string(), num(r.cdf)]).collect();
            output::write_csv(&cdf_path, &["n", "cdf"], &rows)?;
        }
        Format::Json => {
            let histogram = hist.iter().map(|&(g, count)| HistRow { g, count }).collect();
            let out = SampleOut { t: args.t, m: args.m, n: args.n, seed: args.seed, count: args.count, histogram, cdf };
            output::write_json(&path, &out)?;
        }
    }
    let mean = batch.values.iter().sum::<u64>() as f64 / batch.count as f64;
    println!("{} samples of G({}, {}) at t = {}: mean {mean:.6}, max {top}", batch.count, args.m, args.n, args.t);
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

/// `dir/stem_suffix.ext` next to `path`.
fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

#[derive(Serialize)]
struct ExactOut {
    t: f64,
    m: usize,
    n: usize,
    k_max: usize,
    truncation_eps: f64,
    converged: bool,
    precision_bits: u32,
    used_fallback: bool,
    warning: Option<String>,
    oracle_max_abs_diff: Option<f64>,
    rows: Vec<ExactRow>,
}

#[derive(Serialize)]
struct ExactRow {
    n: usize,
    log_cdf: f64,
    cdf: f64,
    log_ratio: f64,
}

pub fn exact(args: &ExactArgs) -> CliResult<ExitCode> {
    if !(args.eps > 0.0 && args.eps < 1.0) {
        return Err(CliError::Invalid(format!("eps = {} must lie in (0, 1)", args.eps)));
    }
    let spec = SymbolSpec::new(args.t, args.m, args.n)?;
    let table =
        DistributionTable::build(spec, TableOptions { eps: args.eps, min_k: args.nmax, ..TableOptions::default() })?;
    let rows: Vec<ExactRow> = (0..=args.nmax)
        .map(|n| {
            let log_cdf = table.log_cdf_at(n);
            ExactRow { n, log_cdf, cdf: log_cdf.exp(), log_ratio: table.log_ratios.get(n).copied().unwrap_or(0.0) }
        })
        .collect();
    let oracle_diff = if args.check_oracle {
        let oracle = exact_cdf_small(args.t, args.m, args.n, args.nmax)?;
        Some(rows.iter().zip(&oracle.cdf).map(|(r, o)| (r.cdf - o).abs()).fold(0.0, f64::max))
    } else {
        None
    };
    let path = output::resolve(args.output.out.as_deref(), &default_name("exact", args.output.format));
    match args.output.format {
        Format::Csv => {
            let cells: Vec<Vec<String>> =
                rows.iter().map(|r| vec![r.n.to_string(), num(r.log_cdf), num(r.cdf), num(r.log_ratio)]).collect();
            output::write_csv(&path, &["n", "log_cdf", "cdf", "log_ratio"], &cells)?;
        }
        Format::Json => {
            let out = ExactOut {
                t: args.t,
                m: args.m,
                n: args.n,
                k_max: table.k_max,
                truncation_eps: table.truncation_eps,
                converged: table.converged,
                precision_bits: table.precision_bits,
                used_fallback: table.used_fallback,
                warning: table.warning.clone(),
                oracle_max_abs_diff: oracle_diff,
                rows,
            };
            output::write_json(&path, &out)?;
        }
    }
    println!(
        "G({}, {}) at t = {}: k_max = {}, truncation eps = {:e}, {} bits",
        args.m, args.n, args.t, table.k_max, table.truncation_eps, table.precision_bits
    );
    if let Some(w) = &table.warning {
        println!("warning: {w}");
    }
    println!("wrote {}", path.display());
    if let Some(d) = oracle_diff {
        let ok = d < 1e-10;
        println!("oracle max |difference| = {d:e}: {}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ContourReport {
    t: f64,
    gamma: f64,
    a: f64,
    a0: f64,
    xi: Complex64,
    z0: f64,
    p_i: f64,
    gamma2_hit: f64,
    z0_residual: f64,
    symmetry_residual: f64,
    real_period_point: f64,
    real_period_residual: f64,
    gamma1_direction_defect: f64,
    gamma2_direction_defect: f64,
    gamma1_points: usize,
    gamma2_points: usize,
    warning: Option<String>,
}

pub fn contours(args: &ContourArgs) -> CliResult<ExitCode> {
    let params = ModelParams::new(args.t, args.gamma)?;
    let a0 = params.scaling().a0;
    if !(args.a > a0 + lpp_lab::endpoint::A0_SNAP) {
        return Err(CliError::Invalid(format!("a = {} must exceed a0 = {a0}", args.a)));
    }
    let ep = solve_endpoint(args.a, &params)?;
    let cs = build_contours(&ep)?;
    let dir = output::resolve(args.out.as_deref(), "contours");
    let g1 = cs.gamma1_closed();
    let g2 = cs.gamma2_closed();
    for (name, pts) in [("gamma1.csv", &g1), ("gamma2.csv", &g2)] {
        let path = dir.join(name);
        write_points_csv(pts, output::create(&path)?)?;
    }
    let x_mid = -0.5 * (args.t + 1.0 / args.t);
    let report = ContourReport {
        t: args.t,
        gamma: args.gamma,
        a: args.a,
        a0,
        xi: ep.xi,
        z0: ep.z0,
        p_i: cs.p_i,
        gamma2_hit: cs.gamma2_hit,
        z0_residual: cs.z0_residual(),
        symmetry_residual: cs.symmetry_residual(&TraceOptions::for_t(args.t)),
        real_period_point: x_mid,
        real_period_residual: real_period_residual(&ep, x_mid)?,
        gamma1_direction_defect: cs.gamma1.direction_defect(&ep),
        gamma2_direction_defect: cs.gamma2.direction_defect(&ep),
        gamma1_points: g1.len(),
        gamma2_points: g2.len(),
        warning: cs.warning.clone(),
    };
    output::write_json(&dir.join("report.json"), &report)?;
    println!("xi = {}, p_i = {}, |Gamma_2 hit + z0| = {:e}", ep.xi, cs.p_i, report.z0_residual);
    println!("real period residual at {x_mid}: {:e}", report.real_period_residual);
    if let Some(w) = &report.warning {
        println!("warning: {w}");
    }
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn validate(args: &ValidateArgs) -> CliResult<ExitCode> {
    let report: SuiteReport = match args.suite {
        Suite::Identities => suites::identities()?,
        Suite::Tails => suites::tails(
            args.t.unwrap_or(0.5),
            args.gamma.unwrap_or(1.0),
            args.n.unwrap_or(216),
            args.x.unwrap_or(3.0),
        )?,
        Suite::Rhp => suites::rhp(args.t.unwrap_or(FRAC_1_SQRT_2), args.gamma.unwrap_or(2.0), args.a.unwrap_or(4.0))?,
    };
    for c in &report.checks {
        println!("{}  {:<60} {:>24} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, num(c.value), c.threshold);
    }
    let passed = report.passed();
    println!("suite {}: {}", report.suite, if passed { "PASS" } else { "FAIL" });
    if let Some(path) = &args.out {
        match args.format {
            Format::Json => output::write_json(path, &report)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = report
                    .checks
                    .iter()
                    .map(|c| vec![c.name.clone(), num(c.value), c.threshold.clone(), c.pass.to_string()])
                    .collect();
                output::write_csv(path, &["check", "value", "threshold", "pass"], &rows)?;
            }
        }
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
