//! The claim engine behind `zdl verify`: runs registered claims against a
//! shared context and reports one [`VerificationReport`] per claim.

use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use zdl_core::atkinson::{self, AtkinsonEval};
use zdl_core::divisor::{self, DivisorTable, TailHeuristic};
use zdl_core::estar::{self, RemainderSeries};
use zdl_core::fit;
use zdl_core::grid::{self, ErrorGrid};
use zdl_core::quad::{self, MeanSquareAccumulator};
use zdl_core::quadruple;
use zdl_core::zeta::ZetaEngine;

use crate::build;
use crate::error::{exit, Error, Result};
use crate::registry::Claim;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Grid end for the moment and remainder claims.
    pub t_max: f64,
    /// Largest `N` of the quadruple sweeps.
    pub n_max: u32,
    pub seed: u64,
    /// Tolerance of the adaptive mean-square quadrature.
    pub tol: f64,
    pub step: f64,
    pub threads: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            t_max: 1e5,
            n_max: 128,
            seed: 0,
            tol: 1e-10,
            step: 0.05,
            threads: 0,
        }
    }
}

/// Divisor table size needed by the identity and Voronoi claims.
const MIN_TABLE: u64 = 10_001;

type AtkinsonRow = (AtkinsonEval, f64);
type AtkinsonMemo = Vec<((u64, u64, u64), Vec<AtkinsonRow>)>;

/// Lazily built data shared by the claims of one run.
pub struct Context {
    cfg: VerifyConfig,
    pool: ThreadPool,
    table: OnceLock<DivisorTable>,
    grid: OnceLock<std::result::Result<ErrorGrid, String>>,
    atkinson: Mutex<AtkinsonMemo>,
}

impl Context {
    pub fn new(cfg: VerifyConfig) -> Result<Self> {
        if !(cfg.t_max >= 100.0) || !cfg.t_max.is_finite() {
            return Err(Error::Usage(format!(
                "--T-max must be at least 100, got {}",
                cfg.t_max
            )));
        }
        if cfg.n_max == 0 || cfg.n_max > quadruple::MAX_N {
            return Err(Error::Usage(format!(
                "--N-max must be in 1..={}, got {}",
                quadruple::MAX_N,
                cfg.n_max
            )));
        }
        let pool = build::pool(cfg.threads)?;
        Ok(Context {
            cfg,
            pool,
            table: OnceLock::new(),
            grid: OnceLock::new(),
            atkinson: Mutex::new(Vec::new()),
        })
    }

    /// Uses a precomputed grid (e.g. from the cache) instead of building one.
    pub fn with_grid(self, grid: ErrorGrid) -> Self {
        let _ = self.grid.set(Ok(grid));
        self
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.cfg
    }

    pub fn table_size(&self) -> u64 {
        grid::table_size_for_height(self.cfg.t_max).max(MIN_TABLE)
    }

    pub fn table(&self) -> &DivisorTable {
        self.table.get_or_init(|| {
            DivisorTable::sieve(self.table_size()).expect("divisor table within capacity")
        })
    }

    /// Quadrature grid on `[0, T_max]`.
    pub fn grid(&self) -> Result<&ErrorGrid> {
        let g = self.grid.get_or_init(|| {
            build::quadrature_grid(
                0.0,
                self.cfg.t_max,
                self.cfg.step,
                self.cfg.tol,
                self.table(),
                &self.pool,
            )
            .map_err(|e| e.to_string())
        });
        g.as_ref()
            .map_err(|e| Error::Usage(format!("building the E* grid: {e}")))
    }

    pub fn grid_if_built(&self) -> Option<&ErrorGrid> {
        self.grid.get().and_then(|g| g.as_ref().ok())
    }

    fn rng(&self, claim: &Claim) -> ChaCha8Rng {
        // each claim draws from its own stream so suites can run in any order
        let salt = claim.id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
        });
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ salt)
    }

    fn atkinson_rows(&self, points: u64, t_lo: f64, t_hi: f64) -> Result<Vec<AtkinsonRow>> {
        let key = (points, t_lo.to_bits(), t_hi.to_bits());
        if let Some((_, rows)) = self
            .atkinson
            .lock()
            .unwrap()
            .iter()
            .find(|(k, _)| *k == key)
        {
            return Ok(rows.clone());
        }
        let ts = log_spaced(t_lo, t_hi, points as usize);
        let engine = ZetaEngine::new(t_hi);
        let mut acc = MeanSquareAccumulator::new(self.cfg.tol)?;
        let table = self.table();
        let mut rows = Vec::with_capacity(ts.len());
        for &t in &ts {
            acc.extend_to(t, &engine)?;
            let e_quad = acc.integral() - quad::mean_square_main_term(t);
            rows.push((atkinson::atkinson_e(t, table)?, e_quad));
        }
        self.atkinson.lock().unwrap().push((key, rows.clone()));
        Ok(rows)
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln();
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo * (r * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not gated: reported for information only.
    Trend,
    Errored,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Trend => "TREND",
            Status::Errored => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub anchor: String,
    pub criterion: Option<u32>,
    pub statistic_name: String,
    /// `None` when the claim errored or the value is not finite.
    pub statistic: Option<f64>,
    /// Band edges; `None` stands for an infinite edge.
    pub band: [Option<f64>; 2],
    pub in_band: Option<bool>,
    pub gated: bool,
    pub status: Status,
    pub runtime_s: f64,
    pub config: Value,
    pub details: Value,
    pub error: Option<String>,
}

impl VerificationReport {
    pub fn summary_line(&self) -> String {
        let edge = |e: Option<f64>, inf: &str| e.map_or(inf.to_string(), |x| format!("{x:?}"));
        let value = match (&self.statistic, &self.error) {
            (Some(x), _) if *x == 0.0 || (1e-3..1e6).contains(&x.abs()) => format!("{x:.6}"),
            (Some(x), _) => format!("{x:.3e}"),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "n/a".into(),
        };
        format!(
            "{:<5} {:<30} {} = {} band [{}, {}] ({:.1} s)",
            self.status.label(),
            self.claim_id,
            self.statistic_name,
            value,
            edge(self.band[0], "-inf"),
            edge(self.band[1], "inf"),
            self.runtime_s
        )
    }
}

/// Exit code of a finished run: claim failures beat errors.
pub fn exit_code(reports: &[VerificationReport]) -> u8 {
    if reports.iter().any(|r| r.status == Status::Fail) {
        exit::CLAIM_FAILURE
    } else if reports.iter().any(|r| r.status == Status::Errored) {
        exit::RUNTIME
    } else {
        exit::PASS
    }
}

struct Outcome {
    value: f64,
    details: Value,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn run_claim(ctx: &Context, claim: &Claim) -> VerificationReport {
    let start = Instant::now();
    let result = evaluate(ctx, claim);
    let runtime_s = start.elapsed().as_secs_f64();
    let mut config = serde_json::to_value(&ctx.cfg).unwrap_or(Value::Null);
    config["params"] = serde_json::to_value(&claim.params).unwrap_or(Value::Null);
    let (statistic, in_band, status, details, error) = match result {
        Ok(o) => {
            let ok = claim.in_band(o.value);
            let status = match (claim.gated, ok) {
                (false, _) => Status::Trend,
                (true, true) => Status::Pass,
                (true, false) => Status::Fail,
            };
            (finite(o.value), Some(ok), status, o.details, None)
        }
        Err(e) => (
            None,
            None,
            Status::Errored,
            Value::Null,
            Some(e.to_string()),
        ),
    };
    VerificationReport {
        claim_id: claim.id.clone(),
        anchor: claim.anchor.clone(),
        criterion: claim.criterion,
        statistic_name: claim.statistic.clone(),
        statistic,
        band: [finite(claim.band[0]), finite(claim.band[1])],
        in_band,
        gated: claim.gated,
        status,
        runtime_s,
        config,
        details,
        error,
    }
}

pub fn run_claims(ctx: &Context, claims: &[&Claim]) -> Vec<VerificationReport> {
    claims.iter().map(|c| run_claim(ctx, c)).collect()
}

/// Operations that read the shared E* grid.
pub const GRID_OPERATIONS: &[&str] = &[
    "e_star_identity",
    "mean_value_slope",
    "moment_exponent",
    "r_mean_square",
    "rms_growth",
    "smoothing",
    "large_values",
];

pub fn needs_grid(claim: &Claim) -> bool {
    GRID_OPERATIONS.contains(&claim.operation.as_str())
}

fn evaluate(ctx: &Context, c: &Claim) -> Result<Outcome> {
    match c.operation.as_str() {
        "delta_star_two_forms" => delta_star_two_forms(ctx, c),
        "hyperbola_identity" => hyperbola_identity(ctx, c),
        "e_star_identity" => e_star_identity(ctx, c),
        "fit_exact" => fit_exact(),
        "atkinson_error" => atkinson_error(ctx, c),
        "atkinson_growth" => atkinson_growth(ctx, c),
        "atkinson_correlation" => atkinson_correlation(ctx, c),
        "voronoi_slope" => voronoi_slope(ctx, c),
        "mean_value_slope" => mean_value_slope(ctx, c),
        "moment_exponent" => moment_exponent(ctx, c),
        "r_mean_square" => r_mean_square(ctx, c),
        "rms_growth" => rms_growth(ctx, c),
        "zeta_moment" => zeta_moment(ctx, c),
        "smoothing" => smoothing(ctx, c),
        "large_values" => large_values(ctx, c),
        "quadruple_brute_force" => quadruple_brute_force(c),
        "quadruple_ratio" => quadruple_ratio(ctx, c),
        "quadruple_monotone" => quadruple_monotone(ctx, c),
        "gap_sum" => gap_sum(c),
        "pointwise" => pointwise(ctx, c),
        other => Err(Error::Usage(format!(
            "claim {}: unknown operation {other}",
            c.id
        ))),
    }
}

fn delta_star_two_forms(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let (n, lo, hi) = (c.u64("samples")?, c.f64("x_lo")?, c.f64("x_hi")?);
    let table = ctx.table();
    let mut rng = ctx.rng(c);
    let (mut worst, mut worst_x, mut max_abs) = (0.0f64, lo, 0.0f64);
    for _ in 0..n {
        let x = rng.gen_range(lo..=hi);
        let a = divisor::delta_star_exact(x, table)?;
        let b = divisor::delta_star_combination(x, table)?;
        let rel = (a - b).abs() / a.abs().max(1.0);
        max_abs = max_abs.max((a - b).abs());
        if rel > worst {
            worst = rel;
            worst_x = x;
        }
    }
    Ok(Outcome {
        value: worst,
        details: json!({ "samples": n, "worst_x": worst_x, "max_abs_difference": max_abs }),
    })
}

fn isqrt(m: u64) -> u64 {
    let mut s = (m as f64).sqrt() as u64;
    while s * s > m {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= m {
        s += 1;
    }
    s
}

fn hyperbola_identity(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let m_max = c.u64("m_max")?;
    let table = ctx.table();
    table.require(m_max)?;
    let mut mismatches = 0u64;
    let mut first = None;
    for m in 1..=m_max {
        let s = isqrt(m);
        let hyper = 2 * (1..=s).map(|k| m / k).sum::<u64>() - s * s;
        if hyper != table.prefix(m) {
            mismatches += 1;
            first.get_or_insert(m);
        }
    }
    Ok(Outcome {
        value: mismatches as f64,
        details: json!({ "m_max": m_max, "first_mismatch": first }),
    })
}

fn e_star_identity(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let grid = ctx.grid()?;
    let t_hi = c.f64("t_hi")?.min(grid.t_end());
    let stride = c.u64("stride")?.max(1) as usize;
    let end = grid.index_at_or_after(t_hi).min(grid.len() - 1);
    let (mut bad, mut checked, mut max_ulps) = (0u64, 0u64, 0u64);
    for i in (0..=end).step_by(stride) {
        let (e, ds, es) = (grid.e()[i], grid.delta_star()[i], grid.e_star()[i]);
        checked += 1;
        if es.to_bits() != (e - TAU * ds).to_bits() {
            bad += 1;
        }
        let back = es + TAU * ds;
        max_ulps = max_ulps.max((back.to_bits() as i64 - e.to_bits() as i64).unsigned_abs());
    }
    Ok(Outcome {
        value: bad as f64,
        details: json!({ "checked": checked, "reverse_max_ulps": max_ulps }),
    })
}

fn fit_exact() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for &(a, c0) in &[
        (0.5, 1.0),
        (4.0 / 3.0, 3.7),
        (1.5, 0.02),
        (2.0, 1e3),
        (2.2, 5.0),
    ] {
        let pairs: Vec<(f64, f64)> = log_spaced(1e3, 1e5, 21)
            .into_iter()
            .map(|t| (t, c0 * t.powf(a)))
            .collect();
        let f = fit::fit_exponent(&pairs)?;
        worst = worst.max((f.exponent - a).abs());
        cases.push(json!({ "exponent": a, "fitted": f.exponent }));
    }
    Ok(Outcome {
        value: worst,
        details: Value::Array(cases),
    })
}

fn atkinson_params(ctx: &Context, c: &Claim) -> Result<Vec<AtkinsonRow>> {
    ctx.atkinson_rows(c.u64("points")?, c.f64("t_lo")?, c.f64("t_hi")?)
}

fn atkinson_error(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let rows = atkinson_params(ctx, c)?;
    let mut worst = 0.0f64;
    let mut at = 0.0;
    let mut mean_signed = 0.0;
    for (ev, eq) in &rows {
        let r = (ev.e_approx - eq).abs() / ev.t.ln().powi(2);
        mean_signed += (ev.e_approx - eq) / rows.len() as f64;
        if r > worst {
            worst = r;
            at = ev.t;
        }
    }
    Ok(Outcome {
        value: worst,
        details: json!({ "points": rows.len(), "worst_t": at, "mean_signed_error": mean_signed }),
    })
}

fn atkinson_growth(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let rows = atkinson_params(ctx, c)?;
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .map(|(ev, eq)| (ev.t, (ev.e_approx - eq).abs()))
        .collect();
    let f = fit::fit_exponent(&pairs)?;
    Ok(Outcome {
        value: f.exponent,
        details: json!({ "intercept": f.intercept, "rms_residual": f.rms }),
    })
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn atkinson_correlation(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let rows = atkinson_params(ctx, c)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0.e_approx).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(Outcome {
        value: pearson(&xs, &ys),
        details: json!({ "points": rows.len() }),
    })
}

fn voronoi_slope(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let x = c.f64("x")?;
    let ns = c.u64_list("n_trunc")?;
    let table = ctx.table();
    let target = divisor::delta_star_normalized(x, table)?;
    let mut pairs = Vec::new();
    for &n in &ns {
        let v = divisor::delta_star_voronoi(x, n, table, TailHeuristic::default())?;
        pairs.push((n as f64, (v.value - target).abs()));
    }
    let f = fit::fit_exponent(&pairs)?;
    Ok(Outcome {
        value: f.exponent,
        details: json!({
            "x": x,
            "target": target,
            "exact": divisor::delta_star_exact(x, table)?,
            "errors": pairs,
        }),
    })
}

fn mean_value_slope(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let grid = ctx.grid()?;
    let series = RemainderSeries::new(grid)?;
    let hi = grid.t_end();
    let lo = c.f64("lo_fraction")? * hi;
    let slope = series.mean_value_slope(lo, hi, c.u64("stride")? as usize)?;
    Ok(Outcome {
        value: slope,
        details: json!({ "t_lo": lo, "t_hi": hi, "target": estar::MEAN_VALUE_SLOPE }),
    })
}

fn heights(ctx: &Context, c: &Claim) -> Result<Vec<f64>> {
    let t_lo = c.f64("t_lo")?;
    let hi = ctx.cfg.t_max;
    if !(t_lo < hi) {
        return Err(Error::Usage(format!(
            "claim {}: --T-max must exceed {t_lo}",
            c.id
        )));
    }
    Ok(log_spaced(t_lo, hi, c.u64("points")? as usize))
}

fn moment_exponent(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let ts = heights(ctx, c)?;
    let rep = estar::moment_scan(ctx.grid()?, c.f64("k")?, &ts)?;
    Ok(Outcome {
        value: rep.fitted_exponent,
        details: json!({
            "k": rep.k,
            "t_values": rep.t_values,
            "integrals": rep.integrals,
            "fit_intercept": rep.fit_intercept,
            "fit_residual": rep.fit_residual,
        }),
    })
}

fn r_mean_square(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let ts = heights(ctx, c)?;
    let series = RemainderSeries::new(ctx.grid()?)?;
    let pairs = series.mean_square(&ts)?;
    let f = fit::fit_exponent(&pairs)?;
    Ok(Outcome {
        value: f.exponent,
        details: json!({ "values": pairs, "fit_intercept": f.intercept, "fit_residual": f.rms }),
    })
}

fn rms_growth(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let f = estar::rms_growth(
        ctx.grid()?,
        c.f64("t_lo")?,
        c.f64("t_hi")?,
        c.u64("windows")? as usize,
    )?;
    Ok(Outcome {
        value: f.exponent,
        details: json!({ "fit_intercept": f.intercept, "fit_residual": f.rms }),
    })
}

fn zeta_moment(_ctx: &Context, c: &Claim) -> Result<Outcome> {
    let k = c.f64("k")?;
    let step = c.f64("step")?;
    let ts = log_spaced(c.f64("t_lo")?, c.f64("t_hi")?, c.u64("points")? as usize);
    let mut pairs = Vec::with_capacity(ts.len());
    for &t in &ts {
        pairs.push((t, quad::power_moment(k, t, step)?));
    }
    let f = fit::fit_exponent(&pairs)?;
    Ok(Outcome {
        value: f.exponent,
        details: json!({ "power": 2.0 * k, "values": pairs }),
    })
}

fn smoothing(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let grid = ctx.grid()?;
    let steps = c.u64("steps")? as usize;
    let a = c.f64("a")?;
    let ts = log_spaced(c.f64("t_lo")?, c.f64("t_hi")?, steps);
    let gs = log_spaced(c.f64("g_lo")?, c.f64("g_hi")?, steps);
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for &t in &ts {
        let node = (t / grid.step()).round() * grid.step();
        for &g in &gs {
            let s = estar::smoothing_check(grid, node, g, a)?;
            worst = worst.max(s.margin_constant);
            cells.push(json!({
                "T": s.t, "G": g, "lhs": s.lhs, "upper": s.rhs_upper, "lower": s.rhs_lower,
                "margin": s.margin_constant,
            }));
        }
    }
    Ok(Outcome {
        value: worst,
        details: Value::Array(cells),
    })
}

fn large_values(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let grid = ctx.grid()?;
    let steps = c.u64("steps")? as usize;
    let mut constants = Vec::new();
    let mut rows = Vec::new();
    for t in c.f64_list("t")? {
        let vs = log_spaced(t.powf(1.0 / 6.0), t.powf(0.25), steps);
        let mut c_t = 0.0f64;
        for v in vs {
            let rep = estar::large_values(grid, v, t)?;
            c_t = c_t.max(rep.ratio());
            rows.push(json!({ "T": t, "V": v, "R": rep.r_count, "bound": rep.bound_value, "ratio": rep.ratio() }));
        }
        constants.push(json!({ "T": t, "C_T": c_t }));
        rows.push(json!({ "T": t, "C_T": c_t }));
    }
    let cs: Vec<f64> = constants
        .iter()
        .map(|v| v["C_T"].as_f64().unwrap_or(0.0))
        .collect();
    let max = cs.iter().copied().fold(f64::NAN, f64::max);
    let min = cs.iter().copied().fold(f64::NAN, f64::min);
    let spread = if min > 0.0 { max / min } else { f64::INFINITY };
    Ok(Outcome {
        value: spread,
        details: json!({ "constants": constants, "sweep": rows }),
    })
}

fn brute_quadruples(n: u32, k: u32, delta: f64) -> u64 {
    let roots: Vec<f64> = (n + 1..=2 * n).map(|m| quadruple::root(m, k)).collect();
    let w = quadruple::window(n, k, delta);
    let mut count = 0;
    for &a in &roots {
        for &b in &roots {
            let s = a + b;
            for &x in &roots {
                for &y in &roots {
                    if (s - (x + y)).abs() < w {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn quadruple_brute_force(c: &Claim) -> Result<Outcome> {
    let n_max = c.u64("n_max")? as u32;
    let mut mismatches = 0u64;
    let mut cases = 0u64;
    for n in 1..=n_max {
        for &k in &c.u64_list("k")? {
            for &d in &c.f64_list("delta")? {
                cases += 1;
                if quadruple::count_quadruples(n, k as u32, d)?.count
                    != brute_quadruples(n, k as u32, d)
                {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(Outcome {
        value: mismatches as f64,
        details: json!({ "cases": cases }),
    })
}

fn sweep_ns(ctx: &Context, c: &Claim) -> Result<Vec<u32>> {
    let ns: Vec<u32> = c
        .u64_list("n")?
        .into_iter()
        .filter(|&n| n <= ctx.cfg.n_max as u64)
        .map(|n| n as u32)
        .collect();
    if ns.is_empty() {
        return Err(Error::Usage(format!(
            "claim {}: no sweep N at or below --N-max",
            c.id
        )));
    }
    Ok(ns)
}

fn quadruple_ratio(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let ns = sweep_ns(ctx, c)?;
    let rows = quadruple::bound_sweep(&ns, c.u64("k")? as u32, &c.f64_list("delta")?)?;
    let table: Vec<Value> = rows
        .iter()
        .map(|q| json!({ "N": q.n, "delta": q.delta, "count": q.count, "ratio": q.ratio }))
        .collect();
    Ok(Outcome {
        value: quadruple::max_ratio(&rows),
        details: Value::Array(table),
    })
}

fn quadruple_monotone(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let ns = sweep_ns(ctx, c)?;
    let mut deltas = c.f64_list("delta")?;
    deltas.sort_by(f64::total_cmp);
    let mut violations = 0u64;
    for &k in &c.u64_list("k")? {
        let rows = quadruple::bound_sweep(&ns, k as u32, &deltas)?;
        for chunk in rows.chunks(deltas.len()) {
            violations += chunk.windows(2).filter(|w| w[1].count < w[0].count).count() as u64;
        }
    }
    Ok(Outcome {
        value: violations as f64,
        details: json!({ "n": ns, "delta": deltas }),
    })
}

fn gap_sum(c: &Claim) -> Result<Outcome> {
    let mut ratios = Vec::new();
    for k in c.u64_list("k")? {
        let v = quadruple::inverse_sqrt_gap_sum(k)?;
        let kf = k as f64;
        ratios.push((k, v, v / (kf.powf(1.5) * kf.ln())));
    }
    let max = ratios.iter().map(|r| r.2).fold(f64::NAN, f64::max);
    let min = ratios.iter().map(|r| r.2).fold(f64::NAN, f64::min);
    Ok(Outcome {
        value: max / min,
        details: json!(ratios
            .iter()
            .map(|(k, v, r)| json!({ "K": k, "sum": v, "ratio": r }))
            .collect::<Vec<_>>()),
    })
}

fn pointwise(ctx: &Context, c: &Claim) -> Result<Outcome> {
    let (n, lo, hi, tol) = (
        c.u64("samples")?,
        c.f64("t_lo")?,
        c.f64("t_hi")?,
        c.f64("tol")?,
    );
    let mut rng = ctx.rng(c);
    let ts: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    let engine = ZetaEngine::new(hi + 2.0);
    let mut worst = 0.0f64;
    let mut at = lo;
    for &t in &ts {
        let b = estar::pointwise_bound_check(t, &engine, tol)?;
        let r = b.lhs / b.rhs;
        if r > worst {
            worst = r;
            at = t;
        }
    }
    Ok(Outcome {
        value: worst,
        details: json!({ "samples": n, "worst_t": at }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::Registry;

    fn small_ctx() -> Context {
        Context::new(VerifyConfig {
            t_max: 3000.0,
            n_max: 32,
            ..VerifyConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn log_spacing_hits_ends() {
        let v = log_spaced(10.0, 1000.0, 3);
        assert_eq!(v[0], 10.0);
        assert!((v[1] - 100.0).abs() < 1e-12);
        assert_eq!(v[2], 1000.0);
    }

    #[test]
    fn fast_claims_pass() {
        let reg = Registry::builtin();
        let ctx = small_ctx();
        for id in [
            "identities-delta-star-forms",
            "identities-hyperbola",
            "identities-fit-exact",
            "voronoi-truncation",
            "gap-sum-ratio",
            "lemma1-monotone",
        ] {
            let r = run_claim(&ctx, reg.get(id).unwrap());
            assert_eq!(r.status, Status::Pass, "{}", r.summary_line());
        }
    }

    #[test]
    fn unknown_operation_is_errored_not_fatal() {
        let mut claim = Registry::builtin()
            .get("identities-fit-exact")
            .unwrap()
            .clone();
        claim.operation = "nothing".into();
        let r = run_claim(&small_ctx(), &claim);
        assert_eq!(r.status, Status::Errored);
        assert_eq!(exit_code(&[r]), exit::RUNTIME);
    }

    #[test]
    fn seed_determines_random_claims() {
        let reg = Registry::builtin();
        let c = reg.get("identities-delta-star-forms").unwrap();
        let a = run_claim(&small_ctx(), c);
        let b = run_claim(&small_ctx(), c);
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.details, b.details);
    }
}
