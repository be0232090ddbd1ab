//! The discrepancy `E*(t) = E(t) − 2πΔ*(t/2π)` and the statistics built on it:
//! power moments, the remainder `R(T)` of its mean value, Gaussian smoothing
//! inequalities, large-values point selection and the pointwise bound for
//! `|ζ(1/2 + iT)|²`.

use alloc::vec::Vec;

use crate::atkinson;
use crate::divisor::{self, DivisorTable, TailHeuristic, VORONOI_TRUNC_CAP};
use crate::fit::{self, PowerFit};
use crate::grid::ErrorGrid;
use crate::math::{self, PI, TAU};
use crate::quad::{self, halving_check, panel_length};
use crate::sum::KahanSum;
use crate::zeta::ZetaEngine;
use crate::{Error, Result};

pub use crate::divisor::{delta_star_short_interval, ShortIntervalDelta};

/// Exponent standing in for every `T^ε` in reported bounds.
pub const EPSILON_REPORT: f64 = 0.01;

/// Coefficient of the linear main term of `∫_0^T E*(t) dt`.
pub const MEAN_VALUE_SLOPE: f64 = 3.0 * PI / 4.0;

/// Where the `E(t)` value of a sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ESource {
    /// Direct quadrature of `|ζ|²`.
    Quadrature,
    /// Atkinson's formula with `N = round(t)`.
    AtkinsonSurrogate,
}

impl ESource {
    pub fn as_str(self) -> &'static str {
        match self {
            ESource::Quadrature => "quadrature",
            ESource::AtkinsonSurrogate => "atkinson_surrogate",
        }
    }
}

impl core::str::FromStr for ESource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrature" => Ok(ESource::Quadrature),
            "atkinson_surrogate" | "surrogate" => Ok(ESource::AtkinsonSurrogate),
            _ => Err(Error::Precondition("unknown E source")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorSample {
    pub t: f64,
    pub e: f64,
    /// `Δ*(t/2π)`.
    pub delta_star: f64,
    /// `e − 2π · delta_star`, exactly as computed by [`ErrorSample::combine`].
    pub e_star: f64,
    pub source: ESource,
}

impl ErrorSample {
    #[inline]
    pub fn combine(e: f64, delta_star: f64) -> f64 {
        e - TAU * delta_star
    }

    pub fn new(t: f64, e: f64, delta_star: f64, source: ESource) -> Self {
        ErrorSample {
            t,
            e,
            delta_star,
            e_star: Self::combine(e, delta_star),
            source,
        }
    }
}

/// `Δ*(x)` exactly when the table reaches `4x`, else by the Voronoi series
/// truncated at the table end (capped relative to `x`).
pub fn delta_star_auto(x: f64, table: &DivisorTable) -> Result<f64> {
    if math::floor(4.0 * x) as u64 <= table.n_max() {
        divisor::delta_star_exact(x, table)
    } else {
        let n = table.n_max().min(math::floor(VORONOI_TRUNC_CAP * x) as u64);
        Ok(divisor::delta_star_voronoi(x, n, table, TailHeuristic::default())?.value)
    }
}

/// One `E*` sample at height `t >= 10`.
pub fn e_star(t: f64, source: ESource, table: &DivisorTable, tol: f64) -> Result<ErrorSample> {
    if !(t >= 10.0) || !t.is_finite() {
        return Err(Error::Domain {
            what: "t",
            value: t,
        });
    }
    let e = match source {
        ESource::Quadrature => quad::big_e(t, tol)?,
        ESource::AtkinsonSurrogate => atkinson::atkinson_e(t, table)?.e_approx,
    };
    let ds = delta_star_auto(t / TAU, table)?;
    Ok(ErrorSample::new(t, e, ds, source))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentReport {
    pub k: f64,
    /// Heights actually used (requested heights snapped to the grid).
    pub t_values: Vec<f64>,
    /// `∫_0^T |E*(t)|^k dt` at each height.
    pub integrals: Vec<f64>,
    /// The same integrals at twice the step, for the halving check.
    pub coarse_integrals: Vec<f64>,
    pub fitted_exponent: f64,
    pub fit_intercept: f64,
    /// RMS residual of the fit in log space.
    pub fit_residual: f64,
    pub step: f64,
    pub source: ESource,
}

/// `∫_0^T |E*|^k` at each requested `T` by composite Simpson on the grid.
///
/// Heights are snapped down to a multiple of four steps so that the halving
/// check (step vs. double step) uses the same nodes. Every integral must move
/// by less than 1% under halving.
pub fn moment_scan(grid: &ErrorGrid, k: f64, t_list: &[f64]) -> Result<MomentReport> {
    if grid.t0() != 0.0 {
        return Err(Error::Precondition(
            "moment scans need a grid starting at t = 0",
        ));
    }
    if !(k >= 0.0) {
        return Err(Error::Domain {
            what: "k",
            value: k,
        });
    }
    let mut ts: Vec<f64> = t_list.to_vec();
    ts.sort_by(|a, b| a.total_cmp(b));
    let h = grid.step();
    let es = grid.e_star();
    let g = |i: usize| math::powf(es[i].abs(), k);

    let mut t_values = Vec::with_capacity(ts.len());
    let mut integrals = Vec::with_capacity(ts.len());
    let mut coarse_integrals = Vec::with_capacity(ts.len());
    let mut fine = KahanSum::new();
    let mut coarse = KahanSum::new();
    let mut at = 0usize;
    for &t in &ts {
        let idx = (math::floor(t / h + 1e-9) as usize) / 4 * 4;
        if idx + 1 > grid.len() || t > grid.t_end() + 1e-9 {
            return Err(Error::Precondition("moment height beyond the grid"));
        }
        if idx < 4 {
            return Err(Error::Precondition("moment height below four grid steps"));
        }
        while at < idx {
            fine.add(g(at) + 4.0 * g(at + 1) + g(at + 2));
            fine.add(g(at + 2) + 4.0 * g(at + 3) + g(at + 4));
            coarse.add(g(at) + 4.0 * g(at + 2) + g(at + 4));
            at += 4;
        }
        let f = fine.value() * h / 3.0;
        let c = coarse.value() * 2.0 * h / 3.0;
        halving_check(c, f)?;
        t_values.push(grid.t(idx));
        integrals.push(f);
        coarse_integrals.push(c);
    }
    let (fitted_exponent, fit_intercept, fit_residual) = if t_values.len() >= 3 {
        let pairs: Vec<(f64, f64)> = t_values
            .iter()
            .copied()
            .zip(integrals.iter().copied())
            .collect();
        let f = fit::fit_exponent(&pairs)?;
        (f.exponent, f.intercept, f.rms)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(MomentReport {
        k,
        t_values,
        integrals,
        coarse_integrals,
        fitted_exponent,
        fit_intercept,
        fit_residual,
        step: h,
        source: grid.source(),
    })
}

/// `(∫|E*|³)²` and `∫(E*)² · ∫(E*)⁴` over the first `n` grid steps.
pub fn cauchy_schwarz_pair(grid: &ErrorGrid, n: usize) -> (f64, f64) {
    let es = &grid.e_star()[..=n];
    let mut s = [KahanSum::new(), KahanSum::new(), KahanSum::new()];
    for (i, &x) in es.iter().enumerate() {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let a = x.abs();
        s[0].add(w * a * a);
        s[1].add(w * a * a * a);
        s[2].add(w * a * a * a * a);
    }
    let h = grid.step();
    let (i2, i3, i4) = (s[0].value() * h, s[1].value() * h, s[2].value() * h);
    (i3 * i3, i2 * i4)
}

/// `∫_0^t E*` and `R(t) = ∫_0^t E* − (3π/4) t` at every node of a grid
/// starting at 0 (cumulative trapezoid).
#[derive(Debug, Clone)]
pub struct RemainderSeries {
    step: f64,
    cumulative: Vec<f64>,
    r: Vec<f64>,
}

impl RemainderSeries {
    pub fn new(grid: &ErrorGrid) -> Result<Self> {
        if grid.t0() != 0.0 {
            return Err(Error::Precondition(
                "remainder needs a grid starting at t = 0",
            ));
        }
        let h = grid.step();
        let es = grid.e_star();
        let mut cumulative = Vec::with_capacity(es.len());
        let mut r = Vec::with_capacity(es.len());
        let mut acc = KahanSum::new();
        for i in 0..es.len() {
            if i > 0 {
                acc.add(0.5 * h * (es[i - 1] + es[i]));
            }
            let v = acc.value();
            cumulative.push(v);
            r.push(v - MEAN_VALUE_SLOPE * grid.t(i));
        }
        Ok(RemainderSeries {
            step: h,
            cumulative,
            r,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    fn index(&self, t: f64) -> Result<usize> {
        let i = math::round(t / self.step) as usize;
        if !(t >= 0.0) || i >= self.r.len() {
            Err(Error::Precondition("height beyond the remainder series"))
        } else {
            Ok(i)
        }
    }

    /// `R(T)` at the node nearest `T`.
    pub fn r_at(&self, t: f64) -> Result<f64> {
        Ok(self.r[self.index(t)?])
    }

    /// Least-squares slope of `∫_0^T E*` against `T` over `[a, b]`, using
    /// every `stride`-th node.
    pub fn mean_value_slope(&self, a: f64, b: f64, stride: usize) -> Result<f64> {
        let (i, j) = (self.index(a)?, self.index(b)?);
        let pairs: Vec<(f64, f64)> = (i..=j)
            .step_by(stride.max(1))
            .map(|n| (self.t(n), self.cumulative[n]))
            .collect();
        Ok(fit::fit_line(&pairs)?.0)
    }

    /// `∫_0^T R(t)² dt` at each `T` (nearest nodes), by cumulative trapezoid.
    pub fn mean_square(&self, t_list: &[f64]) -> Result<Vec<(f64, f64)>> {
        let mut idx: Vec<usize> = t_list
            .iter()
            .map(|&t| self.index(t))
            .collect::<Result<_>>()?;
        idx.sort_unstable();
        let mut out = Vec::with_capacity(idx.len());
        let mut acc = KahanSum::new();
        let mut at = 0usize;
        for i in idx {
            while at < i {
                let (a, b) = (self.r[at], self.r[at + 1]);
                acc.add(0.5 * self.step * (a * a + b * b));
                at += 1;
            }
            out.push((self.t(i), acc.value()));
        }
        Ok(out)
    }
}

/// Both sides of the one-sided Gaussian smoothing inequalities at `(T, G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothingCheck {
    pub t: f64,
    pub g: f64,
    /// `E*(T)`.
    pub lhs: f64,
    /// `(2/(√π G)) ∫_0^U E*(T + u) e^{−u²/G²} du`.
    pub rhs_upper: f64,
    /// `(2/(√π G)) ∫_0^U E*(T − u) e^{−u²/G²} du`.
    pub rhs_lower: f64,
    /// Smallest `c >= 0` with `lhs <= rhs_upper + c G T^ε` and
    /// `lhs >= rhs_lower − c G T^ε`.
    pub margin_constant: f64,
    /// Truncation point `U = G √(A log T)`.
    pub truncation: f64,
}

/// Evaluates the smoothing inequalities on a grid that has `T` as a node and
/// covers `[T − U, T + U]`, with `U = G √(a log T)`.
pub fn smoothing_check(grid: &ErrorGrid, t: f64, g: f64, a: f64) -> Result<SmoothingCheck> {
    if !(g >= 2.0) {
        return Err(Error::Domain {
            what: "G",
            value: g,
        });
    }
    let half = g * math::sqrt(a * math::ln(t));
    if !(half < t) {
        return Err(Error::Precondition("smoothing window reaches below t = 0"));
    }
    let i0 = grid
        .index_of(t)
        .ok_or(Error::Precondition("smoothing height must be a grid node"))?;
    let h = grid.step();
    let m = quad::even_intervals(half / h);
    if i0 < m || i0 + m >= grid.len() {
        return Err(Error::Precondition(
            "grid does not cover the smoothing window",
        ));
    }
    let es = grid.e_star();
    let (mut up, mut down) = (KahanSum::new(), KahanSum::new());
    for j in 0..=m {
        let u = j as f64 * h;
        let w = if j == 0 || j == m {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let kern = w * math::exp(-(u / g) * (u / g));
        up.add(kern * es[i0 + j]);
        down.add(kern * es[i0 - j]);
    }
    let norm = 2.0 / (math::sqrt(PI) * g) * h / 3.0;
    let rhs_upper = up.value() * norm;
    let rhs_lower = down.value() * norm;
    let lhs = es[i0];
    let scale = g * math::powf(t, EPSILON_REPORT);
    let margin_constant = ((lhs - rhs_upper) / scale)
        .max((rhs_lower - lhs) / scale)
        .max(0.0);
    Ok(SmoothingCheck {
        t: grid.t(i0),
        g,
        lhs,
        rhs_upper,
        rhs_lower,
        margin_constant,
        truncation: m as f64 * h,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LargeValuesReport {
    pub v: f64,
    pub t: f64,
    /// Selected heights `t_r`, ascending.
    pub points: Vec<f64>,
    /// `|E*(t_r)|` at the selected heights.
    pub values: Vec<f64>,
    pub r_count: usize,
    /// `T^{3/2} V^{−4}`.
    pub bound_value: f64,
    /// Grid spacing used to approximate each window supremum.
    pub scan_step: f64,
    /// Number of windows of length `V` covering `[T, 2T]`.
    pub windows: usize,
}

impl LargeValuesReport {
    pub fn ratio(&self) -> f64 {
        self.r_count as f64 / self.bound_value
    }
}

/// Splits `[T, 2T]` into windows of length `V` and returns, per window that
/// meets the band `V <= |E*| < 2V`, the grid node maximising `|E*|` among the
/// nodes inside the band, as `(t, |E*|)`. Also returns the window count.
fn band_maxima(grid: &ErrorGrid, v: f64, t: f64) -> Result<(Vec<(f64, f64)>, usize)> {
    if !grid.covers(t, 2.0 * t) {
        return Err(Error::Precondition("grid does not cover [T, 2T]"));
    }
    let es = grid.e_star();
    let n_windows = math::ceil(t / v) as usize;
    let mut out = Vec::new();
    for r in 0..n_windows {
        let lo = t + r as f64 * v;
        let i = grid.index_at_or_after(lo);
        let j = if r + 1 == n_windows {
            // the last window is closed on the right
            (grid.index_at_or_after(2.0 * t) + 1).min(grid.len())
        } else {
            grid.index_at_or_after(lo + v)
        };
        let mut best: Option<(f64, f64)> = None;
        for (n, e) in es.iter().enumerate().take(j).skip(i) {
            let a = e.abs();
            if a >= v && a < 2.0 * v && best.is_none_or(|b| a > b.1) {
                best = Some((grid.t(n), a));
            }
        }
        out.extend(best);
    }
    Ok((out, n_windows))
}

/// Large-values point selection with the band `T^{1/6} <= V <= T^{1/4}` and
/// `scan_step <= V/10` enforced.
pub fn large_values(grid: &ErrorGrid, v: f64, t: f64) -> Result<LargeValuesReport> {
    let eps = 1e-9;
    if v < math::powf(t, 1.0 / 6.0) * (1.0 - eps) || v > math::powf(t, 0.25) * (1.0 + eps) {
        return Err(Error::Precondition("V outside the band [T^(1/6), T^(1/4)]"));
    }
    large_values_unchecked(grid, v, t)
}

/// [`large_values`] without the `V` band restriction (the scan-step limit is
/// still enforced).
///
/// Each window of length `V` contributes its largest in-band value, and
/// points closer than `V` to the previously kept one are dropped, scanning
/// left to right.
pub fn large_values_unchecked(grid: &ErrorGrid, v: f64, t: f64) -> Result<LargeValuesReport> {
    if !(v > 0.0) {
        return Err(Error::Domain {
            what: "V",
            value: v,
        });
    }
    if grid.step() > v / 10.0 {
        return Err(Error::Precondition("scan step exceeds V/10"));
    }
    let (maxima, windows) = band_maxima(grid, v, t)?;
    let mut points: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for &(tr, sup) in &maxima {
        if let Some(&last) = points.last() {
            if tr - last < v {
                continue;
            }
        }
        points.push(tr);
        values.push(sup);
    }
    let r_count = points.len();
    Ok(LargeValuesReport {
        v,
        t,
        points,
        values,
        r_count,
        bound_value: math::powf(t, 1.5) / math::powf(v, 4.0),
        scan_step: grid.step(),
        windows,
    })
}

/// `∫_T^{2T} |E*|³` restricted to `V <= |E*| < 2V` (rectangle rule on the
/// grid), and `V Σ_r |E*(t_r)|³` over the in-band window maxima. Up to one
/// grid step per window the first never exceeds the second.
pub fn band_integral_and_cover(grid: &ErrorGrid, v: f64, t: f64) -> Result<(f64, f64)> {
    let (maxima, _) = band_maxima(grid, v, t)?;
    let es = grid.e_star();
    let (i, j) = (grid.index_at_or_after(t), grid.index_at_or_after(2.0 * t));
    let mut band = KahanSum::new();
    for &x in &es[i..j] {
        let a = x.abs();
        if a >= v && a < 2.0 * v {
            band.add(a * a * a);
        }
    }
    let mut cover = KahanSum::new();
    for &(_, sup) in &maxima {
        cover.add(sup * sup * sup);
    }
    Ok((band.value() * grid.step(), cover.value() * v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointwiseBound {
    pub t: f64,
    /// `|ζ(1/2 + iT)|²`.
    pub lhs: f64,
    /// `log T ∫_{T−1}^{T+1} |ζ(1/2 + it)|² dt + 1`.
    pub rhs: f64,
}

/// Evaluates both sides of the short-interval bound for `|ζ(1/2 + iT)|²`.
pub fn pointwise_bound_check(t: f64, engine: &ZetaEngine, tol: f64) -> Result<PointwiseBound> {
    if !(t >= 10.0) {
        return Err(Error::Domain {
            what: "T",
            value: t,
        });
    }
    let f = |u: f64| engine.abs_sq(u);
    let mut local = KahanSum::new();
    let mut evals = 0usize;
    let mut a = t - 1.0;
    while a < t + 1.0 {
        let b = (a + 0.25 * panel_length(a)).min(t + 1.0);
        local.add(quad::adaptive_simpson(&f, a, b, tol * (b - a), &mut evals).0);
        a = b;
    }
    Ok(PointwiseBound {
        t,
        lhs: engine.abs_sq(t),
        rhs: math::ln(t) * local.value() + 1.0,
    })
}

/// RMS of `E*` over `windows` equal slices of `[a, b]`, as
/// `(window midpoint, rms)` pairs.
pub fn windowed_rms(grid: &ErrorGrid, a: f64, b: f64, windows: usize) -> Result<Vec<(f64, f64)>> {
    if !grid.covers(a, b) || windows == 0 {
        return Err(Error::Precondition("RMS windows must lie inside the grid"));
    }
    let es = grid.e_star();
    let w = (b - a) / windows as f64;
    let mut out = Vec::with_capacity(windows);
    for k in 0..windows {
        let lo = a + k as f64 * w;
        let (i, j) = (grid.index_at_or_after(lo), grid.index_at_or_after(lo + w));
        let n = (j - i).max(1) as f64;
        let ss: f64 = es[i..j].iter().map(|x| x * x).sum();
        out.push((lo + 0.5 * w, math::sqrt(ss / n)));
    }
    Ok(out)
}

/// Power-law fit of windowed RMS values.
pub fn rms_growth(grid: &ErrorGrid, a: f64, b: f64, windows: usize) -> Result<PowerFit> {
    fit::fit_exponent(&windowed_rms(grid, a, b, windows)?)
}
