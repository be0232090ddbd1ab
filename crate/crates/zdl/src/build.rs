//! Parallel construction of E* grids. Cell integrals and surrogate values
//! are computed on a rayon pool; the running sum stays sequential, so the
//! result does not depend on the thread count.

use rayon::prelude::*;
use rayon::ThreadPool;
use zdl_core::atkinson;
use zdl_core::divisor::DivisorTable;
use zdl_core::estar::ESource;
use zdl_core::grid::{self, ErrorGrid};
use zdl_core::quad::MeanSquareAccumulator;
use zdl_core::zeta::ZetaEngine;

use crate::error::{Error, Result};

/// A pool with `threads` workers, or rayon's default when `threads` is 0.
pub fn pool(threads: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Threads(e.to_string()))
}

pub fn quadrature_grid(
    t0: f64,
    t1: f64,
    step: f64,
    tol: f64,
    table: &DivisorTable,
    pool: &ThreadPool,
) -> Result<ErrorGrid> {
    let n = grid::node_count(t0, t1, step)?;
    let engine = ZetaEngine::new(t0 + n as f64 * step);
    let mut acc = MeanSquareAccumulator::new(tol)?;
    acc.extend_to(t0, &engine)?;
    let cells: Vec<(f64, f64)> = pool.install(|| {
        (0..n - 1)
            .into_par_iter()
            .map(|i| grid::quadrature_cell(&engine, t0 + i as f64 * step, step))
            .collect()
    });
    Ok(ErrorGrid::from_cells(
        t0,
        step,
        acc.integral(),
        acc.est_err(),
        &cells,
        table,
    )?)
}

pub fn surrogate_grid(
    t0: f64,
    t1: f64,
    step: f64,
    table: &DivisorTable,
    pool: &ThreadPool,
) -> Result<ErrorGrid> {
    let n = grid::node_count(t0, t1, step)?;
    let e: Vec<f64> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| atkinson::atkinson_e(t0 + i as f64 * step, table).map(|a| a.e_approx))
            .collect::<zdl_core::Result<_>>()
    })?;
    Ok(ErrorGrid::from_e_values(
        t0,
        step,
        e,
        vec![f64::NAN; n],
        ESource::AtkinsonSurrogate,
        table,
    )?)
}

pub fn build_grid(
    source: ESource,
    t0: f64,
    t1: f64,
    step: f64,
    tol: f64,
    table: &DivisorTable,
    pool: &ThreadPool,
) -> Result<ErrorGrid> {
    match source {
        ESource::Quadrature => quadrature_grid(t0, t1, step, tol, table, pool),
        ESource::AtkinsonSurrogate => surrogate_grid(t0, t1, step, table, pool),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential() {
        let table = DivisorTable::sieve(400).unwrap();
        let seq = ErrorGrid::quadrature(20.0, 300.0, 0.25, 1e-10, &table).unwrap();
        for threads in [1, 3] {
            let par =
                quadrature_grid(20.0, 300.0, 0.25, 1e-10, &table, &pool(threads).unwrap()).unwrap();
            assert_eq!(par.e(), seq.e());
            assert_eq!(par.e_star(), seq.e_star());
        }
        let s_seq = ErrorGrid::surrogate(100.0, 120.0, 0.5, &table).unwrap();
        let s_par = surrogate_grid(100.0, 120.0, 0.5, &table, &pool(2).unwrap()).unwrap();
        assert_eq!(s_par.e(), s_seq.e());
    }
}
