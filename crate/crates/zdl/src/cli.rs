//! Command-line definitions and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use zdl_core::estar::ESource;

use crate::cache::{self, Cache};
use crate::compute::{self, ComputeArgs};
use crate::error::{Error, Result};
use crate::formats;
use crate::plotdata::{self, PlotArgs};
use crate::registry::Registry;
use crate::verify::{self, Context, VerifyConfig};

#[derive(Debug, Parser)]
#[command(
    name = "zdl",
    version,
    about = "Numerical laboratory for the zeta mean-square and divisor error terms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write sample files (Δ, Δ*, E, E*, J_k, Atkinson, quadruple counts).
    Compute(ComputeArgs),
    /// Run a suite of registered claims and report pass/fail.
    Verify(VerifyArgs),
    /// Write plot-ready CSV from cached grids.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Claim suite, or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Grid end for the moment, remainder, smoothing and large-values claims.
    #[arg(long = "T-max", default_value_t = 1e5)]
    pub t_max: f64,
    /// Largest N of the quadruple sweeps.
    #[arg(long = "N-max", default_value_t = 128)]
    pub n_max: u32,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl VerifyArgs {
    pub fn config(&self) -> VerifyConfig {
        VerifyConfig {
            t_max: self.t_max,
            n_max: self.n_max,
            seed: self.seed,
            tol: self.tol,
            step: self.step,
            threads: self.threads,
        }
    }
}

/// Runs the suite and returns the process exit code.
pub fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    if !(args.step > 0.0) || !(args.tol > 0.0) {
        return Err(Error::Usage("--step and --tol must be positive".into()));
    }
    let registry = Registry::builtin();
    let claims = registry.suite(&args.suite)?;
    let cfg = args.config();
    let mut ctx = Context::new(cfg.clone())?;

    let cache = if claims.iter().any(|c| verify::needs_grid(c)) {
        let cache = Cache::open_default()?;
        if let Some((meta, p)) =
            cache.find_grid(ESource::Quadrature, 0.0, cfg.t_max, cfg.step, Some(cfg.tol))?
        {
            let grid = Cache::load_grid(&meta, &p)?;
            let grid = if grid.step() == cfg.step && grid.t_end() == cfg.t_max {
                grid
            } else {
                let n = ((cfg.t_max / cfg.step).round() * cfg.step).min(cfg.t_max);
                cache::subsample(&grid, 0.0, n, cfg.step)?
            };
            ctx = ctx.with_grid(grid);
        }
        Some(cache)
    } else {
        None
    };

    let mut reports = Vec::with_capacity(claims.len());
    for claim in &claims {
        let r = verify::run_claim(&ctx, claim);
        println!("{}", r.summary_line());
        reports.push(r);
    }
    if let (Some(cache), Some(grid)) = (&cache, ctx.grid_if_built()) {
        if cache
            .find_grid(ESource::Quadrature, 0.0, cfg.t_max, cfg.step, Some(cfg.tol))?
            .is_none()
        {
            cache.store_grid(grid, cfg.tol)?;
        }
    }

    let code = verify::exit_code(&reports);
    let counts = |s: verify::Status| reports.iter().filter(|r| r.status == s).count();
    println!(
        "suite {}: {} pass, {} fail, {} trend, {} errored",
        args.suite,
        counts(verify::Status::Pass),
        counts(verify::Status::Fail),
        counts(verify::Status::Trend),
        counts(verify::Status::Errored)
    );
    if let Some(out) = &args.out {
        let doc = json!({
            "suite": args.suite,
            "config": cfg,
            "exit_code": code,
            "reports": reports,
        });
        formats::write_json(out, &doc)?;
    }
    Ok(code)
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Compute(a) => compute::cmd_compute(a).map(|_| 0),
        Command::Verify(a) => cmd_verify(a),
        Command::Plotdata(a) => plotdata::cmd_plotdata(a).map(|_| 0),
    }
}
