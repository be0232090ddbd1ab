//! `zdl plotdata`: tidy CSV for external plotting, read from cached grids.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use zdl_core::estar::{self, ESource, RemainderSeries, MEAN_VALUE_SLOPE};
use zdl_core::grid::ErrorGrid;

use crate::cache::{self, Cache};
use crate::compute::{Mode, TRange};
use crate::error::{Error, Result};
use crate::formats::{self, num};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotWhat {
    /// `t,e_star` over the t-range.
    EStar,
    /// `logT,log_integral,fit` for the k-th moment at the t-range heights.
    Moment,
    /// `T,mean_integral,three_pi_over_4`: the running mean of E* against 3π/4.
    RSlope,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub what: PlotWhat,
    #[arg(long = "t-range")]
    pub t_range: TRange,
    /// Moment order for `moment`.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub mode: Mode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl PlotWhat {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            PlotWhat::EStar => &["t", "e_star"],
            PlotWhat::Moment => &["logT", "log_integral", "fit"],
            PlotWhat::RSlope => &["T", "mean_integral", "three_pi_over_4"],
        }
    }
}

fn missing(lo: f64, hi: f64, step: f64, mode: Mode) -> Error {
    let mode = match mode {
        Mode::Quadrature => "quadrature",
        Mode::Surrogate => "surrogate",
    };
    Error::MissingCache(format!(
        "no cached E* grid covers [{lo}, {hi}] at step {step}; \
         run `zdl compute --what e-star --t-range {lo}:{hi}:{step} --mode {mode}` first"
    ))
}

/// A cached grid starting at 0 and reaching `hi`, the finest one if several.
fn grid_from_zero(cache: &Cache, source: ESource, hi: f64) -> Result<Option<ErrorGrid>> {
    let best = cache
        .grid_index()?
        .into_iter()
        .filter(|(m, _)| m.source == source && m.t0 == 0.0 && m.t_end >= hi)
        .min_by(|a, b| a.0.step.total_cmp(&b.0.step));
    best.map(|(m, p)| Cache::load_grid(&m, &p)).transpose()
}

pub fn cmd_plotdata(args: &PlotArgs) -> Result<()> {
    let r = args.t_range;
    let header = args.what.header();
    if r.is_empty() {
        let (w, path) = formats::sink(args.out.as_deref())?;
        return formats::write_rows(w, header, Vec::<Vec<String>>::new(), &path);
    }
    let source = ESource::from(args.mode);
    let cache = Cache::open_default()?;
    let last = r.last();
    let rows: Vec<Vec<String>> = match args.what {
        PlotWhat::EStar => {
            let (meta, p) = cache
                .find_grid(source, r.lo, last, r.step, None)?
                .ok_or_else(|| missing(r.lo, last, r.step, args.mode))?;
            let grid = cache::subsample(&Cache::load_grid(&meta, &p)?, r.lo, last, r.step)?;
            (0..grid.len())
                .map(|i| vec![num(grid.t(i)), num(grid.e_star()[i])])
                .collect()
        }
        PlotWhat::Moment => {
            let grid = grid_from_zero(&cache, source, last)?
                .ok_or_else(|| missing(0.0, last, 0.05, args.mode))?;
            let rep = estar::moment_scan(&grid, args.k, &r.points())?;
            rep.t_values
                .iter()
                .zip(&rep.integrals)
                .map(|(&t, &v)| {
                    let lt = t.ln();
                    vec![
                        num(lt),
                        num(v.ln()),
                        num(rep.fit_intercept + rep.fitted_exponent * lt),
                    ]
                })
                .collect()
        }
        PlotWhat::RSlope => {
            let grid = grid_from_zero(&cache, source, last)?
                .ok_or_else(|| missing(0.0, last, 0.05, args.mode))?;
            let series = RemainderSeries::new(&grid)?;
            let mut rows = Vec::with_capacity(r.len());
            for t in r.points() {
                if !(t > 0.0) {
                    return Err(Error::Usage("r-slope heights must be positive".into()));
                }
                let i = grid.index_of(t).ok_or_else(|| {
                    Error::Usage(format!("T = {t} is not a node of the cached grid"))
                })?;
                rows.push(vec![
                    num(t),
                    num(series.cumulative()[i] / t),
                    num(MEAN_VALUE_SLOPE),
                ]);
            }
            rows
        }
    };
    let (w, path) = formats::sink(args.out.as_deref())?;
    formats::write_rows(w, header, rows, &path)
}
