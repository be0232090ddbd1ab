//! `zdl compute`: sample files for Δ, Δ*, E, E*, J_k, Atkinson's formula and
//! the quadruple counter.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zdl_core::atkinson;
use zdl_core::divisor;
use zdl_core::estar::{ESource, ErrorSample};
use zdl_core::grid::{self, ErrorGrid};
use zdl_core::quad::{self, MeanSquareAccumulator};
use zdl_core::quadruple;
use zdl_core::zeta::ZetaEngine;

use crate::build;
use crate::cache::{self, Cache};
use crate::error::{Error, Result};
use crate::formats::{self, num, ATKINSON_HEADER, ESTAR_HEADER, QUADRUPLE_HEADER, SAMPLE_HEADER};

/// Inclusive range `lo:hi:step`; empty when `hi < lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for TRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:step, got {s:?}"));
        }
        let p = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {x:?}"))
        };
        let (lo, hi, step) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err("range ends must be finite".into());
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(format!("step must be positive, got {step}"));
        }
        Ok(TRange { lo, hi, step })
    }
}

impl TRange {
    pub fn len(&self) -> usize {
        if self.hi < self.lo {
            0
        } else {
            ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.lo + i as f64 * self.step)
            .collect()
    }

    /// The last point actually on the range.
    pub fn last(&self) -> f64 {
        self.lo + (self.len().max(1) - 1) as f64 * self.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Quadrature,
    Surrogate,
}

impl From<Mode> for ESource {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Quadrature => ESource::Quadrature,
            Mode::Surrogate => ESource::AtkinsonSurrogate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComputeWhat {
    Delta,
    DeltaStar,
    E,
    EStar,
    J,
    Atkinson,
    Quadruples,
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    #[arg(long, value_enum)]
    pub what: ComputeWhat,
    /// Explicit points (x for delta/delta-star, t or T otherwise).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Inclusive point range `lo:hi:step`.
    #[arg(long = "t-range")]
    pub t_range: Option<TRange>,
    /// Draw this many points uniformly from the t-range bounds instead of
    /// stepping through it.
    #[arg(long)]
    pub random: Option<usize>,
    /// Divisor table size; defaults to what the points need.
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Tolerance of the mean-square quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Moment order for `j`, root order for `quadruples`.
    #[arg(long)]
    pub k: Option<f64>,
    /// Smoothing width for `j`.
    #[arg(long)]
    pub g: Option<f64>,
    /// N values for `quadruples`.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    /// δ values for `quadruples`.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

impl ComputeArgs {
    /// Sample points in ascending order, and whether they form the t-range
    /// grid exactly.
    fn points(&self) -> Result<(Vec<f64>, bool)> {
        let sources = [!self.x.is_empty(), self.t_range.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if sources != 1 {
            return Err(usage("give exactly one of --x or --t-range"));
        }
        if !self.x.is_empty() {
            if self.random.is_some() {
                return Err(usage("--random needs --t-range"));
            }
            let mut xs = self.x.clone();
            xs.sort_by(f64::total_cmp);
            return Ok((xs, false));
        }
        let r = self.t_range.unwrap();
        match self.random {
            None => Ok((r.points(), true)),
            Some(n) => {
                if r.is_empty() && n > 0 {
                    return Err(usage("--random needs a non-empty --t-range"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(r.lo..=r.hi)).collect();
                xs.sort_by(f64::total_cmp);
                Ok((xs, false))
            }
        }
    }
}

enum Output {
    Rows(&'static [&'static str], Vec<Vec<String>>),
    Grid(ErrorGrid, bool),
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<()> {
    if !(args.tol > 0.0) {
        return Err(usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let output = if args.what == ComputeWhat::Quadruples {
        quadruples(args)?
    } else {
        let (points, on_grid) = args.points()?;
        let cache = Cache::open_default()?;
        samples(&cache, args, &points, on_grid)?
    };
    // the output file is only created once everything has been computed
    let (w, path) = formats::sink(args.out.as_deref())?;
    match output {
        Output::Rows(header, rows) => formats::write_rows(w, header, rows, &path),
        Output::Grid(grid, true) => formats::write_estar_samples(w, &grid, &path),
        Output::Grid(grid, false) => formats::write_e_samples(w, &grid, &path),
    }
}

fn samples(cache: &Cache, args: &ComputeArgs, points: &[f64], on_grid: bool) -> Result<Output> {
    match args.what {
        ComputeWhat::Delta | ComputeWhat::DeltaStar => {
            let star = args.what == ComputeWhat::DeltaStar;
            let x_max = points.last().copied().unwrap_or(1.0);
            let need = (if star { 4.0 * x_max } else { x_max }).floor().max(1.0) as u64;
            let table = cache.table(checked_n_max(args, need)?)?;
            let mut rows = Vec::with_capacity(points.len());
            for &x in points {
                let v = if star {
                    divisor::delta_star_exact(x, &table)?
                } else {
                    divisor::delta(x, &table)?
                };
                rows.push(vec![num(x), num(v)]);
            }
            let header: &[&str] = if star {
                &["x", "delta_star"]
            } else {
                &["x", "delta"]
            };
            Ok(Output::Rows(header, rows))
        }
        ComputeWhat::E | ComputeWhat::EStar => {
            let full = args.what == ComputeWhat::EStar;
            let header: &[&str] = if full { &ESTAR_HEADER } else { &SAMPLE_HEADER };
            if points.is_empty() {
                Ok(Output::Rows(header, Vec::new()))
            } else if on_grid {
                Ok(Output::Grid(
                    grid_for_range(cache, args, args.t_range.unwrap())?,
                    full,
                ))
            } else {
                Ok(Output::Rows(
                    header,
                    point_samples(cache, args, points, full)?,
                ))
            }
        }
        ComputeWhat::J => {
            let k = args.k.ok_or_else(|| usage("--what j needs --k"))?;
            let g = args.g.ok_or_else(|| usage("--what j needs --g"))?;
            let mut rows = Vec::with_capacity(points.len());
            for &t in points {
                let j = quad::smoothed_moment_j(k, t, g)?;
                rows.push(vec![num(t), num(g), num(k), num(j)]);
            }
            Ok(Output::Rows(&["T", "G", "k", "J"], rows))
        }
        ComputeWhat::Atkinson => {
            let t_max = points.last().copied().unwrap_or(1.0);
            let table = cache.table(checked_n_max(args, t_max.ceil() as u64 + 1)?)?;
            let engine = ZetaEngine::new(t_max);
            let mut acc = MeanSquareAccumulator::new(args.tol)?;
            let mut rows = Vec::with_capacity(points.len());
            for &t in points {
                let ev = atkinson::atkinson_e(t, &table)?;
                acc.extend_to(t, &engine)?;
                let e_quad = acc.integral() - quad::mean_square_main_term(t);
                rows.push(formats::atkinson_row(&ev, e_quad));
            }
            Ok(Output::Rows(&ATKINSON_HEADER, rows))
        }
        ComputeWhat::Quadruples => unreachable!("handled without the cache"),
    }
}

/// `--n-max` when given and large enough, otherwise `need`.
fn checked_n_max(args: &ComputeArgs, need: u64) -> Result<u64> {
    match args.n_max {
        Some(n) if n < need => Err(usage(format!(
            "--n-max {n} is too small: the requested points need {need}"
        ))),
        Some(n) => Ok(n),
        None => Ok(need),
    }
}

fn table_for_heights(
    cache: &Cache,
    args: &ComputeArgs,
    t_max: f64,
) -> Result<zdl_core::divisor::DivisorTable> {
    let need = grid::table_size_for_height(t_max);
    // the surrogate also needs d(n) for n <= T
    let need = if args.mode == Mode::Surrogate {
        need.max(t_max.ceil() as u64 + 1)
    } else {
        need
    };
    cache.table(checked_n_max(args, need)?)
}

/// The grid for a t-range: cut from a cached grid when one covers it,
/// otherwise built and added to the cache.
fn grid_for_range(cache: &Cache, args: &ComputeArgs, r: TRange) -> Result<ErrorGrid> {
    let source = ESource::from(args.mode);
    let last = r.last();
    if let Some((meta, p)) = cache.find_grid(source, r.lo, last, r.step, Some(args.tol))? {
        let full = Cache::load_grid(&meta, &p)?;
        return cache::subsample(&full, r.lo, last, r.step);
    }
    if source == ESource::AtkinsonSurrogate && !(r.lo > 0.0) {
        return Err(usage("surrogate mode needs t > 0"));
    }
    let table = table_for_heights(cache, args, last)?;
    let pool = build::pool(args.threads)?;
    let grid = build::build_grid(source, r.lo, last, r.step, args.tol, &table, &pool)?;
    cache.store_grid(&grid, args.tol)?;
    Ok(grid)
}

fn point_samples(
    cache: &Cache,
    args: &ComputeArgs,
    points: &[f64],
    full: bool,
) -> Result<Vec<Vec<String>>> {
    let source = ESource::from(args.mode);
    let t_max = *points.last().unwrap();
    let table = table_for_heights(cache, args, t_max)?;
    let engine = ZetaEngine::new(t_max);
    let mut acc = MeanSquareAccumulator::new(args.tol)?;
    let mut rows = Vec::with_capacity(points.len());
    for &t in points {
        if !(t >= 0.0) {
            return Err(Error::Core(zdl_core::Error::Domain {
                what: "t",
                value: t,
            }));
        }
        let (e, err) = match source {
            ESource::Quadrature => {
                acc.extend_to(t, &engine)?;
                (
                    acc.integral() - quad::mean_square_main_term(t),
                    acc.est_err(),
                )
            }
            ESource::AtkinsonSurrogate => (atkinson::atkinson_e(t, &table)?.e_approx, f64::NAN),
        };
        let mut row = vec![
            num(t),
            num(e),
            formats::method_at(t, source).to_string(),
            num(err),
        ];
        if full {
            let ds = grid::delta_star_at_height(t, &table)?;
            let s = ErrorSample::new(t, e, ds, source);
            debug_assert_eq!(s.e_star, e - TAU * ds);
            row.extend([num(ds), num(s.e_star), source.as_str().to_string()]);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn quadruples(args: &ComputeArgs) -> Result<Output> {
    if args.n.is_empty() || args.delta.is_empty() {
        return Err(usage("--what quadruples needs --n and --delta"));
    }
    let k = args.k.unwrap_or(2.0);
    if k.fract() != 0.0 || k < 2.0 {
        return Err(usage(format!(
            "--k must be an integer >= 2 for quadruples, got {k}"
        )));
    }
    let mut ns = args.n.clone();
    ns.sort_unstable();
    let mut deltas = args.delta.clone();
    deltas.sort_by(f64::total_cmp);
    let counts = quadruple::bound_sweep(&ns, k as u32, &deltas)?;
    Ok(Output::Rows(
        &QUADRUPLE_HEADER,
        formats::quadruple_rows(&counts).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: TRange = "100:5000:1".parse().unwrap();
        assert_eq!(r.len(), 4901);
        assert_eq!(r.last(), 5000.0);
        let r: TRange = "0:1:0.1".parse().unwrap();
        assert_eq!(r.len(), 11);
        let empty: TRange = "10:5:1".parse().unwrap();
        assert!(empty.is_empty());
        assert!("1:2".parse::<TRange>().is_err());
        assert!("1:2:0".parse::<TRange>().is_err());
        assert!("a:2:1".parse::<TRange>().is_err());
    }
}
