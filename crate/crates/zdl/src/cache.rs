//! The cache directory: divisor tables and E* grids, guarded by a lock file so
//! that only one process writes at a time.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};

use zdl_core::divisor::DivisorTable;
use zdl_core::estar::ESource;
use zdl_core::grid::ErrorGrid;

use crate::error::{Error, Result};
use crate::formats::{self, SampleMeta, ESTAR_HEADER};

pub const CACHE_ENV: &str = "ZDL_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".zdl-cache";
const LOCK_NAME: &str = ".lock";

/// Cache location: `$ZDL_CACHE_DIR`, else `./.zdl-cache`.
pub fn cache_root() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(DEFAULT_CACHE_DIR),
    }
}

/// Exclusive lock on a cache directory, released on drop.
#[derive(Debug)]
pub struct CacheLock {
    path: PathBuf,
}

impl CacheLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(CacheLock { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// An open, locked cache directory.
#[derive(Debug)]
pub struct Cache {
    dir: PathBuf,
    _lock: CacheLock,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let lock = CacheLock::acquire(&dir)?;
        Ok(Cache { dir, _lock: lock })
    }

    pub fn open_default() -> Result<Self> {
        Self::open(cache_root())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn table_path(&self, n_max: u64) -> PathBuf {
        self.dir.join(format!("divisors-{n_max}.dtab"))
    }

    fn cached_tables(&self) -> Result<Vec<(u64, PathBuf)>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))? {
            let path = entry.map_err(|e| Error::io(&self.dir, e))?.path();
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
            if let Some(n) = name
                .strip_prefix("divisors-")
                .and_then(|s| s.strip_suffix(".dtab"))
                .and_then(|s| s.parse::<u64>().ok())
            {
                out.push((n, path));
            }
        }
        out.sort();
        Ok(out)
    }

    /// A divisor table covering at least `n_max`, loaded from the cache when
    /// one is there and sieved (then stored) otherwise.
    pub fn table(&self, n_max: u64) -> Result<DivisorTable> {
        if let Some((_, path)) = self.cached_tables()?.into_iter().find(|(n, _)| *n >= n_max) {
            let table = formats::load_dtab(&path)?;
            if table.n_max() >= n_max {
                return Ok(table);
            }
        }
        let table = DivisorTable::sieve(n_max)?;
        formats::save_dtab(&self.table_path(n_max), &table)?;
        Ok(table)
    }

    fn grid_stem(meta: &SampleMeta) -> String {
        format!(
            "estar-{}-{}-{}-{}",
            meta.source.as_str(),
            formats::num(meta.t0),
            formats::num(meta.t_end),
            formats::num(meta.step)
        )
    }

    /// Writes a grid as `estar-*.csv` plus its `.json` sidecar.
    pub fn store_grid(&self, grid: &ErrorGrid, tol: f64) -> Result<PathBuf> {
        let meta = SampleMeta::for_grid(grid, tol, &ESTAR_HEADER);
        let stem = Self::grid_stem(&meta);
        let csv_path = self.dir.join(format!("{stem}.csv"));
        let tmp = self.dir.join(format!("{stem}.csv.tmp"));
        let f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        formats::write_estar_samples(BufWriter::new(f), grid, &tmp)?;
        fs::rename(&tmp, &csv_path).map_err(|e| Error::io(&csv_path, e))?;
        formats::write_json(&self.dir.join(format!("{stem}.json")), &meta)?;
        Ok(csv_path)
    }

    /// Sidecars of every cached grid, with the path of the CSV they describe.
    pub fn grid_index(&self) -> Result<Vec<(SampleMeta, PathBuf)>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))? {
            let path = entry.map_err(|e| Error::io(&self.dir, e))?.path();
            let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
            if !(name.starts_with("estar-") && name.ends_with(".json")) {
                continue;
            }
            let csv_path = path.with_extension("csv");
            if !csv_path.exists() {
                continue;
            }
            if let Ok(meta) = formats::read_json::<SampleMeta>(&path) {
                out.push((meta, csv_path));
            }
        }
        out.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(out)
    }

    /// A cached grid of the given source whose nodes include every point of
    /// `lo, lo + step, …, hi`, with tolerance no looser than `tol` when given.
    pub fn find_grid(
        &self,
        source: ESource,
        lo: f64,
        hi: f64,
        step: f64,
        tol: Option<f64>,
    ) -> Result<Option<(SampleMeta, PathBuf)>> {
        Ok(self.grid_index()?.into_iter().find(|(m, _)| {
            m.source == source
                && m.t0 <= lo
                && m.t_end >= hi
                && tol.is_none_or(|t| m.tol <= t)
                && aligned(m.t0, m.step, lo, step)
        }))
    }

    pub fn load_grid(meta: &SampleMeta, path: &Path) -> Result<ErrorGrid> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        formats::read_estar_samples(BufReader::new(f), meta, path)
    }
}

/// Whether the sub-grid starting at `lo` with spacing `step` falls on the
/// nodes of the grid `t0 + i·grid_step`.
pub fn aligned(t0: f64, grid_step: f64, lo: f64, step: f64) -> bool {
    let is_whole = |x: f64| (x - x.round()).abs() < 1e-9;
    is_whole((lo - t0) / grid_step) && is_whole(step / grid_step) && step >= grid_step
}

/// Nodes `lo, lo + step, …` up to `hi` (inclusive within rounding) taken from
/// a finer grid.
pub fn subsample(grid: &ErrorGrid, lo: f64, hi: f64, step: f64) -> Result<ErrorGrid> {
    let first = ((lo - grid.t0()) / grid.step()).round() as usize;
    let stride = (step / grid.step()).round() as usize;
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let idx: Vec<usize> = (0..count).map(|k| first + k * stride).collect();
    if idx.last().is_none_or(|&i| i >= grid.len()) {
        return Err(Error::Usage(
            "requested range is not covered by the cached grid".into(),
        ));
    }
    let pick = |col: &[f64]| idx.iter().map(|&i| col[i]).collect::<Vec<_>>();
    Ok(ErrorGrid::from_parts(
        grid.t(first),
        step,
        grid.source(),
        pick(grid.e()),
        pick(grid.e_err()),
        pick(grid.delta_star()),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let first = Cache::open(dir.path()).unwrap();
        assert!(matches!(Cache::open(dir.path()), Err(Error::Locked(_))));
        drop(first);
        assert!(Cache::open(dir.path()).is_ok());
    }

    #[test]
    fn table_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let a = cache.table(5000).unwrap();
        assert!(dir.path().join("divisors-5000.dtab").exists());
        let b = cache.table(3000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_round_trip_and_subsample() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let table = cache.table(200).unwrap();
        let grid = ErrorGrid::quadrature(0.0, 100.0, 0.5, 1e-10, &table).unwrap();
        cache.store_grid(&grid, 1e-10).unwrap();
        let (meta, path) = cache
            .find_grid(ESource::Quadrature, 10.0, 50.0, 1.0, Some(1e-8))
            .unwrap()
            .expect("covering grid");
        let back = Cache::load_grid(&meta, &path).unwrap();
        assert_eq!(back.e(), grid.e());
        assert_eq!(back.e_star(), grid.e_star());
        let sub = subsample(&back, 10.0, 50.0, 1.0).unwrap();
        assert_eq!(sub.len(), 41);
        assert_eq!(sub.e()[0], grid.e()[20]);
        assert!(cache
            .find_grid(ESource::Quadrature, 10.0, 50.0, 0.3, None)
            .unwrap()
            .is_none());
        assert!(cache
            .find_grid(ESource::AtkinsonSurrogate, 10.0, 50.0, 1.0, None)
            .unwrap()
            .is_none());
    }
}
