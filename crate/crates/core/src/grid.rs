//! Uniform grids of `E(t)`, `Δ*(t/2π)` and `E*(t)`.
//!
//! A quadrature grid integrates `|ζ|²` cell by cell and takes a running sum,
//! so one pass over `[t0, t1]` yields `E` at every node. Cells are
//! independent and may be evaluated in any order or in parallel; the running
//! sum is always taken sequentially.

use alloc::vec::Vec;

use crate::atkinson;
use crate::divisor::{self, DivisorTable};
use crate::estar::{ESource, ErrorSample};
use crate::math::{self, TAU};
use crate::quad::{self, MeanSquareAccumulator};
use crate::sum::KahanSum;
use crate::zeta::ZetaEngine;
use crate::{Error, Result};

/// Largest Simpson sub-panel inside one grid cell.
pub const MAX_SUBPANEL: f64 = 0.025;

/// Number of Simpson sub-panels used for a cell of width `h` (always even).
pub fn subpanels(h: f64) -> usize {
    let m = math::ceil(h / MAX_SUBPANEL) as usize;
    (m + m % 2).max(2)
}

/// `∫_a^{a+h} |ζ(1/2 + it)|² dt` by Richardson-extrapolated Simpson (Boole's
/// rule), with the Simpson step-halving difference as error estimate.
pub fn quadrature_cell(engine: &ZetaEngine, a: f64, h: f64) -> (f64, f64) {
    let m = subpanels(h);
    let n = 2 * m;
    let dx = h / n as f64;
    let mut fine = KahanSum::new();
    let mut coarse = KahanSum::new();
    for i in 0..=n {
        let f = engine.abs_sq(a + i as f64 * dx);
        let wf = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        fine.add(wf * f);
        if i % 2 == 0 {
            let j = i / 2;
            let wc = if j == 0 || j == m {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            coarse.add(wc * f);
        }
    }
    let fine = fine.value() * dx / 3.0;
    let coarse = coarse.value() * 2.0 * dx / 3.0;
    (fine + (fine - coarse) / 15.0, (fine - coarse).abs() / 15.0)
}

/// `Δ*(t/2π)` with the limit value 0 at `t = 0`.
pub fn delta_star_at_height(t: f64, table: &DivisorTable) -> Result<f64> {
    if t == 0.0 {
        Ok(0.0)
    } else {
        divisor::delta_star_exact(t / TAU, table)
    }
}

/// Smallest divisor-table size that covers `Δ*(t/2π)` for `t <= t_max`.
pub fn table_size_for_height(t_max: f64) -> u64 {
    (math::floor(4.0 * t_max / TAU) as u64).max(1) + 1
}

#[derive(Debug, Clone)]
pub struct ErrorGrid {
    t0: f64,
    step: f64,
    source: ESource,
    e: Vec<f64>,
    e_err: Vec<f64>,
    delta_star: Vec<f64>,
    e_star: Vec<f64>,
}

/// Number of nodes of the grid `t0, t0 + step, …` ending at or just past `t1`.
pub fn node_count(t0: f64, t1: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Domain {
            what: "step",
            value: step,
        });
    }
    if !(t0 >= 0.0) || !(t1 >= t0) {
        return Err(Error::Precondition("grid range must satisfy 0 <= t0 <= t1"));
    }
    Ok(math::round((t1 - t0) / step) as usize + 1)
}

impl ErrorGrid {
    /// Assembles a quadrature grid from `∫_0^{t0} |ζ|²` (`base`, `base_err`)
    /// and the cell integrals between consecutive nodes.
    pub fn from_cells(
        t0: f64,
        step: f64,
        base: f64,
        base_err: f64,
        cells: &[(f64, f64)],
        table: &DivisorTable,
    ) -> Result<Self> {
        let n = cells.len() + 1;
        let mut e = Vec::with_capacity(n);
        let mut e_err = Vec::with_capacity(n);
        let mut acc = KahanSum::new();
        acc.add(base);
        let mut err = base_err;
        for i in 0..n {
            let t = t0 + i as f64 * step;
            e.push(acc.value() - quad::mean_square_main_term(t));
            e_err.push(err);
            if let Some(&(v, ve)) = cells.get(i) {
                acc.add(v);
                err += ve;
            }
        }
        Self::from_e_values(t0, step, e, e_err, ESource::Quadrature, table)
    }

    /// Grid from precomputed `E` values.
    pub fn from_e_values(
        t0: f64,
        step: f64,
        e: Vec<f64>,
        e_err: Vec<f64>,
        source: ESource,
        table: &DivisorTable,
    ) -> Result<Self> {
        if e.len() != e_err.len() || e.is_empty() {
            return Err(Error::Precondition(
                "E values and errors must be non-empty and equal length",
            ));
        }
        let t_last = t0 + (e.len() - 1) as f64 * step;
        let need = math::floor(4.0 * t_last / TAU) as u64;
        if need > table.n_max() {
            return Err(Error::TableExhausted {
                required: need,
                n_max: table.n_max(),
            });
        }
        let mut delta_star = Vec::with_capacity(e.len());
        let mut e_star = Vec::with_capacity(e.len());
        for (i, &ev) in e.iter().enumerate() {
            let t = t0 + i as f64 * step;
            let ds = delta_star_at_height(t, table)?;
            delta_star.push(ds);
            e_star.push(ErrorSample::combine(ev, ds));
        }
        Ok(ErrorGrid {
            t0,
            step,
            source,
            e,
            e_err,
            delta_star,
            e_star,
        })
    }

    /// Grid from stored `E` and `Δ*` columns; `E*` is recombined.
    pub fn from_parts(
        t0: f64,
        step: f64,
        source: ESource,
        e: Vec<f64>,
        e_err: Vec<f64>,
        delta_star: Vec<f64>,
    ) -> Result<Self> {
        if e.is_empty() || e.len() != e_err.len() || e.len() != delta_star.len() {
            return Err(Error::Precondition(
                "grid columns must be non-empty and equal length",
            ));
        }
        if !(step > 0.0) {
            return Err(Error::Domain {
                what: "step",
                value: step,
            });
        }
        let e_star = e
            .iter()
            .zip(&delta_star)
            .map(|(&ev, &ds)| ErrorSample::combine(ev, ds))
            .collect();
        Ok(ErrorGrid {
            t0,
            step,
            source,
            e,
            e_err,
            delta_star,
            e_star,
        })
    }

    /// Sequential quadrature grid on `[t0, t1]`.
    pub fn quadrature(t0: f64, t1: f64, step: f64, tol: f64, table: &DivisorTable) -> Result<Self> {
        let n = node_count(t0, t1, step)?;
        let engine = ZetaEngine::new(t0 + n as f64 * step);
        let mut acc = MeanSquareAccumulator::new(tol)?;
        acc.extend_to(t0, &engine)?;
        let cells: Vec<(f64, f64)> = (0..n - 1)
            .map(|i| quadrature_cell(&engine, t0 + i as f64 * step, step))
            .collect();
        Self::from_cells(t0, step, acc.integral(), acc.est_err(), &cells, table)
    }

    /// Sequential grid with `E` from Atkinson's formula (`t0 > 0`).
    pub fn surrogate(t0: f64, t1: f64, step: f64, table: &DivisorTable) -> Result<Self> {
        let n = node_count(t0, t1, step)?;
        let mut e = Vec::with_capacity(n);
        for i in 0..n {
            e.push(atkinson::atkinson_e(t0 + i as f64 * step, table)?.e_approx);
        }
        let e_err = alloc::vec![f64::NAN; n];
        Self::from_e_values(t0, step, e, e_err, ESource::AtkinsonSurrogate, table)
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len() - 1)
    }

    pub fn source(&self) -> ESource {
        self.source
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.step
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn e_err(&self) -> &[f64] {
        &self.e_err
    }

    pub fn delta_star(&self) -> &[f64] {
        &self.delta_star
    }

    pub fn e_star(&self) -> &[f64] {
        &self.e_star
    }

    pub fn sample(&self, i: usize) -> ErrorSample {
        ErrorSample {
            t: self.t(i),
            e: self.e[i],
            delta_star: self.delta_star[i],
            e_star: self.e_star[i],
            source: self.source,
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = ErrorSample> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }

    /// Index of the node at `t`, if `t` is a node up to rounding.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.step;
        let i = math::round(x);
        if i < 0.0 || (x - i).abs() > 1e-6 || i as usize >= self.len() {
            None
        } else {
            Some(i as usize)
        }
    }

    /// Index of the first node at or after `t`.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let x = (t - self.t0) / self.step;
        (math::ceil(x - 1e-9).max(0.0) as usize).min(self.len())
    }

    /// Whether the grid covers `[a, b]`.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        a >= self.t0 - 1e-9 && b <= self.t_end() + 1e-9
    }
}
