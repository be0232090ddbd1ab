//! Quadrature of powers of `|ζ(1/2 + it)|`: the mean square integral and
//! `E(T)`, fixed-step power moments, and the Gaussian-smoothed moment
//! `J_k(T, G)`.

use alloc::vec::Vec;

use crate::math::{self, PI, TAU};
use crate::sum::KahanSum;
use crate::zeta::ZetaEngine;
use crate::{Error, Result, EULER_GAMMA};

/// Default evaluation budget for one call of the adaptive integrator.
pub const DEFAULT_MAX_EVALUATIONS: usize = 200_000_000;

/// Forced subdivision levels inside each panel before the error test is
/// trusted.
const MIN_DEPTH: u32 = 2;
const MAX_DEPTH: u32 = 40;

/// Panel length near height `t`: one period of the local oscillation,
/// `2π / log(max(t, 10) / 2π)`.
pub fn panel_length(t: f64) -> f64 {
    TAU / math::ln(t.max(10.0) / TAU)
}

/// `T (log(T/2π) + 2γ − 1)`, the main term of the mean square. Zero at `T = 0`.
pub fn mean_square_main_term(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * (math::ln(t / TAU) + 2.0 * EULER_GAMMA - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Panel {
    pub t_lo: f64,
    pub t_hi: f64,
    pub value: f64,
    pub est_err: f64,
}

/// Running value of `∫_0^T |ζ(1/2 + it)|² dt`, grown panel by panel.
///
/// Extending to a larger `T` reuses every finished panel, so a sweep over
/// increasing heights costs one pass in total.
#[derive(Debug, Clone)]
pub struct MeanSquareAccumulator {
    t: f64,
    sum: KahanSum,
    est_err: f64,
    panels: Vec<Panel>,
    evaluations: usize,
    tol: f64,
    max_evaluations: usize,
}

impl MeanSquareAccumulator {
    /// Empty accumulator at `T = 0`. Each panel of length `L` is integrated to
    /// an absolute error of about `tol · L`.
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain {
                what: "tol",
                value: tol,
            });
        }
        Ok(MeanSquareAccumulator {
            t: 0.0,
            sum: KahanSum::new(),
            est_err: 0.0,
            panels: Vec::new(),
            evaluations: 0,
            tol,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        })
    }

    pub fn with_max_evaluations(mut self, n: usize) -> Self {
        self.max_evaluations = n;
        self
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn integral(&self) -> f64 {
        self.sum.value()
    }

    /// Sum of the per-panel error estimates.
    pub fn est_err(&self) -> f64 {
        self.est_err
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Integrates on to `t_end`. A target below the current height is a
    /// no-op. On budget exhaustion the accumulator keeps the completed prefix
    /// and the error reports it.
    pub fn extend_to(&mut self, t_end: f64, engine: &ZetaEngine) -> Result<()> {
        if !t_end.is_finite() {
            return Err(Error::Domain {
                what: "T",
                value: t_end,
            });
        }
        while self.t < t_end {
            let a = self.t;
            let b = (a + panel_length(a)).min(t_end);
            let mut evals = 0usize;
            let f = |t: f64| engine.abs_sq(t);
            let (value, err) = adaptive_simpson(&f, a, b, self.tol * (b - a), &mut evals);
            self.evaluations += evals;
            if self.evaluations > self.max_evaluations {
                return Err(Error::QuadratureBudget {
                    evaluations: self.max_evaluations,
                    completed_to: self.t,
                    integral: self.integral(),
                });
            }
            self.sum.add(value);
            self.est_err += err;
            self.panels.push(Panel {
                t_lo: a,
                t_hi: b,
                value,
                est_err: err,
            });
            self.t = b;
        }
        Ok(())
    }
}

/// `∫_0^T |ζ(1/2 + it)|² dt` by adaptive panel quadrature.
pub fn mean_square_integral(t: f64, tol: f64) -> Result<MeanSquareAccumulator> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "T",
            value: t,
        });
    }
    let engine = ZetaEngine::new(t);
    let mut acc = MeanSquareAccumulator::new(tol)?;
    acc.extend_to(t, &engine)?;
    Ok(acc)
}

/// `E(T) = ∫_0^T |ζ(1/2 + it)|² dt − T (log(T/2π) + 2γ − 1)`.
pub fn big_e(t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain {
            what: "T",
            value: t,
        });
    }
    let acc = mean_square_integral(t, tol)?;
    Ok(acc.integral() - mean_square_main_term(t))
}

/// Adaptive Simpson with Richardson extrapolation on `[a, b]`; returns the
/// value and its error estimate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    evals: &mut usize,
) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    *evals += 3;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 0, evals)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol) {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, evals);
    let (rv, re) = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, evals);
    (lv + rv, le + re)
}

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = KahanSum::new();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + i as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Relative change allowed when the integration step is halved.
pub const HALVING_TOLERANCE: f64 = 0.01;

/// `∫_0^T |ζ(1/2 + it)|^{2k} dt` by fixed-step Simpson; the result at `step`
/// is checked against `step / 2` and the finer value is returned.
pub fn power_moment(k: f64, t: f64, step: f64) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::Domain {
            what: "k",
            value: k,
        });
    }
    if !(t > 0.0) {
        return Err(Error::Domain {
            what: "T",
            value: t,
        });
    }
    if !(step > 0.0 && step <= t) {
        return Err(Error::Domain {
            what: "step",
            value: step,
        });
    }
    let engine = ZetaEngine::new(t);
    let f = |u: f64| math::powf(engine.abs_sq(u), k);
    let n = even_intervals(t / step);
    let coarse = composite_simpson(&f, 0.0, t, n);
    let fine = composite_simpson(&f, 0.0, t, 2 * n);
    halving_check(coarse, fine)?;
    Ok(fine)
}

pub(crate) fn even_intervals(x: f64) -> usize {
    let n = math::ceil(x) as usize;
    (n + n % 2).max(2)
}

pub(crate) fn halving_check(coarse: f64, fine: f64) -> Result<()> {
    let relative = (coarse - fine).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if relative < HALVING_TOLERANCE || coarse == fine {
        Ok(())
    } else {
        Err(Error::Refinement {
            coarse,
            fine,
            relative,
        })
    }
}

/// Width multiplier `A` in the Gaussian truncation `|u| <= G √(A log T)`.
pub const GAUSSIAN_TRUNCATION_A: f64 = 40.0;

/// `(1/(√π G)) ∫ g(T + u) e^{−(u/G)²} du` over `|u| <= G √(A log T)`, by
/// composite Simpson with at most `step` between nodes.
pub fn gaussian_smoothed<F: Fn(f64) -> f64>(g: &F, t: f64, width: f64, a: f64, step: f64) -> f64 {
    let half = width * math::sqrt(a * math::ln(t));
    let n = even_intervals(2.0 * half / step);
    let weighted = |u: f64| {
        let r = u / width;
        g(t + u) * math::exp(-r * r)
    };
    composite_simpson(&weighted, -half, half, n) / (math::sqrt(PI) * width)
}

/// `J_k(T, G)`, the Gaussian-smoothed `2k`-th moment of `|ζ|` around `T`.
pub fn smoothed_moment_j(k: f64, t: f64, width: f64) -> Result<f64> {
    smoothed_moment_j_with(k, t, width, 0.01)
}

/// [`smoothed_moment_j`] with an explicit node spacing.
pub fn smoothed_moment_j_with(k: f64, t: f64, width: f64, step: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain {
            what: "k",
            value: k,
        });
    }
    if !(t >= 10.0) {
        return Err(Error::Domain {
            what: "T",
            value: t,
        });
    }
    if !(width >= 1.0 && width <= t / (10.0 * math::ln(t))) {
        return Err(Error::Domain {
            what: "G",
            value: width,
        });
    }
    let engine = ZetaEngine::new(2.0 * t);
    let g = |u: f64| math::powf(engine.abs_sq(u), k);
    Ok(gaussian_smoothed(&g, t, width, GAUSSIAN_TRUNCATION_A, step))
}
