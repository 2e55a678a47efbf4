use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mhd_idp::brent::BrentConfig;
use mhd_idp::dg::accuracy::compute_errors;
use mhd_idp::dg::{Case, RunConfig, Solver};
use mhd_idp::dy_limiter::{self, limit_cell_averages, CellAverageMatrix};
use mhd_idp::mhd_state::norm2;
use mhd_idp::slicing::{beta_lower_bound, project_admissible, slice_terms, MhdPoint};
use mhd_idp::Error;

#[derive(Parser)]
#[command(name = "mhd-idp", version, about = "Admissibility-preserving cell-average limiting for ideal MHD")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "MHD_IDP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project one state (rho m1 m2 m3 E B1 B2 B3) onto the admissible set.
    Project(ProjectArgs),
    /// Limit a CSV of cell averages conservatively.
    Limit(LimitArgs),
    /// Run a benchmark case from a key = value config file.
    Run(RunArgs),
    /// Sample f, h and d2 over the magnetic-energy search interval.
    ValidateSlicing(ValidateArgs),
    /// Slice-call statistics and timing for a CSV of states.
    BenchProjection(BenchArgs),
}

#[derive(Args)]
struct PointArgs {
    /// rho m1 m2 m3 E B1 B2 B3
    #[arg(num_args = 8, value_name = "X", allow_negative_numbers = true, required = true)]
    point: Vec<f64>,

    #[arg(long, default_value_t = 1e-13)]
    eps: f64,
}

impl PointArgs {
    fn point(&self) -> anyhow::Result<MhdPoint> {
        let p = &self.point;
        Ok(MhdPoint::new(p[0], &p[1..4], p[4], &p[5..8])?)
    }
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    pt: PointArgs,

    /// Also print the search interval on stderr.
    #[arg(long)]
    report_interval: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    pt: PointArgs,

    #[arg(long, default_value_t = 200)]
    samples: usize,

    /// Curve output (CSV: beta,f,h,d2); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    input: PathBuf,

    #[arg(long, default_value_t = 1e-13)]
    eps: f64,

    #[arg(long, default_value_t = dy_limiter::DEFAULT_TOL)]
    tol: f64,

    #[arg(long, default_value_t = dy_limiter::DEFAULT_MAX_ITERS)]
    max_iters: usize,

    /// Limited averages; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,

    /// Extra `key=value` overrides applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct BenchArgs {
    input: PathBuf,

    #[arg(long, default_value_t = 1e-13)]
    eps: f64,

    /// Histogram of slice calls per projection (CSV: calls,count).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_project(a: &ProjectArgs) -> anyhow::Result<()> {
    let pt = a.pt.point()?;
    let r = project_admissible(&pt, a.pt.eps, &BrentConfig::default())?;
    let s = r.state;
    let (lo, hi) = r.interval.unwrap_or((f64::NAN, f64::NAN));
    println!("rho,m1,m2,m3,E,B1,B2,B3,beta_star,beta_low,beta_high,dist2,slice_calls");
    let mut cols: Vec<String> = [s.rho, s.m[0], s.m[1], s.m[2], s.e, s.b[0], s.b[1], s.b[2]]
        .iter()
        .map(|x| fmt(*x))
        .collect();
    cols.extend([fmt(r.beta_star), fmt(lo), fmt(hi), fmt(r.dist2), r.n_slice_calls.to_string()]);
    println!("{}", cols.join(","));
    if a.report_interval {
        match r.interval {
            Some((lo, hi)) => eprintln!("search interval [{lo:.6e}, {hi:.6e}], beta* = {:.6e}", r.beta_star),
            None => eprintln!("no search: input admissible or without magnetic field"),
        }
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> anyhow::Result<()> {
    let pt = a.pt.point()?;
    let eps = a.pt.eps;
    let z2 = norm2(&pt.z);
    if z2 == 0.0 {
        return Err(Error::InvalidInput(
            "the magnetic field of the point is zero, so d2 does not depend on beta and there is no curve to sample".into(),
        )
        .into());
    }
    if a.samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples".into()).into());
    }
    let r = project_admissible(&pt, eps, &BrentConfig::default())?;
    let (lo, hi) = match r.interval {
        Some(i) => i,
        None => {
            let f0 = slice_terms(&pt, eps, 0.0)?.0;
            (beta_lower_bound(f0, z2.sqrt()).min(z2), z2)
        }
    };
    let mut w: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(w, "beta,f,h,d2")?;
    for k in 0..a.samples {
        let beta = lo + (hi - lo) * k as f64 / (a.samples - 1) as f64;
        let (f, h) = slice_terms(&pt, eps, beta)?;
        writeln!(w, "{},{},{},{}", fmt(beta), fmt(f), fmt(h), fmt(f + h))?;
    }
    w.flush()?;
    let summary = json!({
        "beta_star": r.beta_star,
        "beta_low": lo,
        "beta_high": hi,
        "dist2": r.dist2,
        "slice_calls": r.n_slice_calls,
    });
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn read_matrix(path: &PathBuf) -> anyhow::Result<CellAverageMatrix> {
    let f = File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?;
    Ok(CellAverageMatrix::read_csv(BufReader::new(f))?)
}

fn cmd_limit(a: &LimitArgs) -> anyhow::Result<bool> {
    let ubar = read_matrix(&a.input)?;
    let start = Instant::now();
    let (x, rep) = limit_cell_averages(&ubar, a.eps, a.tol, a.max_iters)?;
    let secs = start.elapsed().as_secs_f64();
    match &a.out {
        Some(p) => x.write_csv(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))?,
        None => x.write_csv(std::io::stdout().lock())?,
    }
    let record = json!({
        "n_cells": ubar.n_cells(),
        "n_iters": rep.n_iters,
        "converged": rep.converged,
        "conservation_residual": rep.conservation_residual,
        "feasibility_residual": rep.feasibility_residual,
        "increment_history": rep.increment_history,
        "projections": rep.n_projections,
        "slice_calls": rep.n_slice_calls,
        "seconds": secs,
    });
    if a.out.is_some() {
        println!("{record}");
    } else {
        eprintln!("{record}");
    }
    Ok(rep.converged)
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", a.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    for kv in &a.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Error::InvalidInput(format!("override '{kv}' is not key=value")).into());
        };
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let start = Instant::now();
    let mut solver = Solver::new(cfg.clone())?;
    let summary = solver.run()?;
    let mut out = json!({
        "case": cfg.case.name(),
        "nx": cfg.nx,
        "ny": cfg.ny,
        "steps": summary.steps,
        "final_time": summary.final_time,
        "seconds": start.elapsed().as_secs_f64(),
        "dy_trigger_steps": summary.dy_trigger_steps,
        "dy_calls": summary.dy_calls,
        "max_dy_iters": summary.max_dy_iters,
        "max_conservation_residual": summary.max_conservation_residual,
        "projections": summary.projections,
        "slice_calls": summary.slice_calls,
        "slice_call_range": summary.slice_call_range,
        "min_rho": summary.min_rho,
        "min_internal_energy": summary.min_internal_energy,
        "mass_drift": summary.relative_drift(0),
        "energy_drift": summary.relative_drift(4),
    });
    if cfg.case == Case::Alfven {
        let e = compute_errors(solver.field(), &cfg, solver.time())?;
        out["err1"] = json!(e.err1);
        out["errinf"] = json!(e.errinf);
    }
    println!("{out}");
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<()> {
    let m = read_matrix(&a.input)?;
    let cfg = BrentConfig::default();
    let mut calls = Vec::with_capacity(m.n_cells());
    let start = Instant::now();
    for i in 0..m.n_cells() {
        let r = project_admissible(&MhdPoint::from(m.state(i)), a.eps, &cfg)?;
        calls.push(r.n_slice_calls);
    }
    let elapsed = start.elapsed().as_secs_f64();
    if calls.is_empty() {
        bail!(Error::InvalidInput("input holds no states".into()));
    }
    let n = calls.len() as f64;
    let mean = calls.iter().sum::<usize>() as f64 / n;
    let var = calls.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    let max = *calls.iter().max().unwrap();
    let min = *calls.iter().min().unwrap();
    if let Some(p) = &a.out {
        let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
        writeln!(w, "calls,count")?;
        for c in min..=max {
            let k = calls.iter().filter(|&&x| x == c).count();
            if k > 0 {
                writeln!(w, "{c},{k}")?;
            }
        }
        w.flush()?;
    }
    println!(
        "{}",
        json!({
            "points": calls.len(),
            "mean_calls": mean,
            "sd_calls": var.sqrt(),
            "min_calls": min,
            "max_calls": max,
            "ns_per_projection": elapsed * 1e9 / n,
        })
    );
    Ok(())
}

/// Input and usage problems map to 2, everything else to 1.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::InvalidInput(_) | Error::Unsupported(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: could not set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Project(a) => cmd_project(a),
        Command::ValidateSlicing(a) => cmd_validate(a),
        Command::Limit(a) => cmd_limit(a).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                bail!("limiter stopped at the iteration cap without converging")
            }
        }),
        Command::Run(a) => cmd_run(a),
        Command::BenchProjection(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
