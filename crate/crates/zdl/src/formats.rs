//! On-disk formats: the divisor-table cache, E-sample CSV files with their
//! JSON sidecar, and the tabular outputs of the other commands.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zdl_core::atkinson::AtkinsonEval;
use zdl_core::divisor::DivisorTable;
use zdl_core::estar::ESource;
use zdl_core::grid::ErrorGrid;
use zdl_core::quadruple::QuadrupleCount;
use zdl_core::zeta::{ZetaMethod, RS_THRESHOLD, ZETA_TOLERANCE};

use crate::error::{Error, Result};

pub const DTAB_MAGIC: &[u8; 4] = b"DTAB";
pub const DTAB_VERSION: u32 = 1;
pub const DTAB_HEADER_LEN: usize = 16;

pub const SAMPLE_HEADER: [&str; 4] = ["t", "E", "method", "est_err"];
pub const ESTAR_HEADER: [&str; 7] = [
    "t",
    "E",
    "method",
    "est_err",
    "delta_star",
    "e_star",
    "source",
];
pub const QUADRUPLE_HEADER: [&str; 6] = ["N", "k", "delta", "count", "bound", "ratio"];
pub const ATKINSON_HEADER: [&str; 8] = [
    "T", "N", "N_prime", "sigma1", "sigma2", "E_approx", "E_quad", "abs_err",
];

/// Shortest round-trip decimal form of a float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_dtab<W: Write>(mut w: W, table: &DivisorTable) -> io::Result<()> {
    let mut header = [0u8; DTAB_HEADER_LEN];
    header[..4].copy_from_slice(DTAB_MAGIC);
    header[4..8].copy_from_slice(&DTAB_VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&table.n_max().to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(4 * 65536);
    for chunk in table.counts().chunks(65536) {
        buf.clear();
        for &d in chunk {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()
}

pub fn read_dtab<R: Read>(mut r: R, path: &Path) -> Result<DivisorTable> {
    let mut header = [0u8; DTAB_HEADER_LEN];
    r.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
    if &header[..4] != DTAB_MAGIC {
        return Err(Error::format(path, "not a divisor table (bad magic)"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != DTAB_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported divisor table version {version}"),
        ));
    }
    let n_max = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    if bytes.len() as u64 != 4 * n_max {
        return Err(Error::format(
            path,
            format!(
                "expected {} bytes of counts, found {}",
                4 * n_max,
                bytes.len()
            ),
        ));
    }
    let counts: Vec<u32> = bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DivisorTable::from_counts(&counts)?)
}

pub fn save_dtab(path: &Path, table: &DivisorTable) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dtab(BufWriter::new(f), table).map_err(|e| Error::io(path, e))
}

pub fn load_dtab(path: &Path) -> Result<DivisorTable> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dtab(BufReader::new(f), path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaVersions {
    pub euler_maclaurin: String,
    pub riemann_siegel: String,
    pub rs_threshold: f64,
    pub tolerance: f64,
}

impl Default for ZetaVersions {
    fn default() -> Self {
        ZetaVersions {
            euler_maclaurin: "euler_maclaurin/1 adaptive N, Bernoulli terms to B_60".into(),
            riemann_siegel: "riemann_siegel/1 corrections C0..C4".into(),
            rs_threshold: RS_THRESHOLD,
            tolerance: ZETA_TOLERANCE,
        }
    }
}

/// JSON sidecar describing an E-sample CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub format_version: u32,
    pub t0: f64,
    pub t_end: f64,
    pub step: f64,
    pub nodes: usize,
    pub tol: f64,
    pub source: ESource,
    pub zeta: ZetaVersions,
    pub gamma: f64,
    pub gamma_digits: u32,
    pub columns: Vec<String>,
}

impl SampleMeta {
    pub fn for_grid(grid: &ErrorGrid, tol: f64, columns: &[&str]) -> Self {
        SampleMeta {
            format_version: 1,
            t0: grid.t0(),
            t_end: grid.t_end(),
            step: grid.step(),
            nodes: grid.len(),
            tol,
            source: grid.source(),
            zeta: ZetaVersions::default(),
            gamma: zdl_core::EULER_GAMMA,
            gamma_digits: zdl_core::EULER_GAMMA_DIGITS,
            columns: columns.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e.to_string())
}

/// Writes rows of already formatted fields.
pub fn write_rows<W: Write, I, R>(w: W, header: &[&str], rows: I, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = csv_writer(w);
    out.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        out.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// How `E(t)` was obtained: the zeta evaluator behind the quadrature, or
/// Atkinson's formula.
pub fn method_at(t: f64, source: ESource) -> &'static str {
    match source {
        ESource::Quadrature => ZetaMethod::for_height(t).as_str(),
        ESource::AtkinsonSurrogate => "atkinson",
    }
}

/// `t,E,method,est_err`, ascending in `t`.
pub fn write_e_samples<W: Write>(w: W, grid: &ErrorGrid, path: &Path) -> Result<()> {
    let rows = (0..grid.len()).map(|i| {
        let t = grid.t(i);
        vec![
            num(t),
            num(grid.e()[i]),
            method_at(t, grid.source()).to_string(),
            num(grid.e_err()[i]),
        ]
    });
    write_rows(w, &SAMPLE_HEADER, rows, path)
}

/// The E-sample columns extended by `delta_star,e_star,source`.
pub fn write_estar_samples<W: Write>(w: W, grid: &ErrorGrid, path: &Path) -> Result<()> {
    let source = grid.source().as_str();
    let rows = (0..grid.len()).map(|i| {
        let t = grid.t(i);
        vec![
            num(t),
            num(grid.e()[i]),
            method_at(t, grid.source()).to_string(),
            num(grid.e_err()[i]),
            num(grid.delta_star()[i]),
            num(grid.e_star()[i]),
            source.to_string(),
        ]
    });
    write_rows(w, &ESTAR_HEADER, rows, path)
}

fn parse_f64(s: &str, path: &Path, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::format(path, format!("line {line}: not a number: {s:?}")))
}

/// Reads an extended E-sample file back into a grid. Nodes must be uniformly
/// spaced as described by the sidecar.
pub fn read_estar_samples<R: Read>(r: R, meta: &SampleMeta, path: &Path) -> Result<ErrorGrid> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rd.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ESTAR_HEADER {
        return Err(Error::format(
            path,
            "unexpected header for an E* sample file",
        ));
    }
    let mut e = Vec::with_capacity(meta.nodes);
    let mut e_err = Vec::with_capacity(meta.nodes);
    let mut ds = Vec::with_capacity(meta.nodes);
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        let t = parse_f64(&rec[0], path, line)?;
        let want = meta.t0 + i as f64 * meta.step;
        if t != want {
            return Err(Error::format(
                path,
                format!("line {line}: t = {t} is off the grid (expected {want})"),
            ));
        }
        e.push(parse_f64(&rec[1], path, line)?);
        e_err.push(parse_f64(&rec[3], path, line)?);
        ds.push(parse_f64(&rec[4], path, line)?);
    }
    if e.len() != meta.nodes {
        return Err(Error::format(
            path,
            format!("expected {} rows, found {}", meta.nodes, e.len()),
        ));
    }
    Ok(ErrorGrid::from_parts(
        meta.t0,
        meta.step,
        meta.source,
        e,
        e_err,
        ds,
    )?)
}

pub fn quadruple_rows(counts: &[QuadrupleCount]) -> impl Iterator<Item = Vec<String>> + '_ {
    counts.iter().map(|q| {
        vec![
            q.n.to_string(),
            q.k.to_string(),
            num(q.delta),
            q.count.to_string(),
            num(q.bound_value),
            num(q.ratio),
        ]
    })
}

/// One row of the Atkinson cross-check file.
pub fn atkinson_row(ev: &AtkinsonEval, e_quad: f64) -> Vec<String> {
    vec![
        num(ev.t),
        ev.n.to_string(),
        num(ev.n_prime),
        num(ev.sigma1),
        num(ev.sigma2),
        num(ev.e_approx),
        num(e_quad),
        num((ev.e_approx - e_quad).abs()),
    ]
}

/// Output sink: a file, or stdout when no path is given. The returned path is
/// used in error messages.
pub fn sink(out: Option<&Path>) -> Result<(Box<dyn Write>, PathBuf)> {
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::io(p, e))?;
            Ok((Box::new(BufWriter::new(f)), p.to_path_buf()))
        }
        None => Ok((
            Box::new(BufWriter::new(io::stdout().lock())),
            PathBuf::from("<stdout>"),
        )),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::format(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtab_round_trip() {
        let table = DivisorTable::sieve(1000).unwrap();
        let mut buf = Vec::new();
        write_dtab(&mut buf, &table).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 1000);
        assert_eq!(&buf[..4], b"DTAB");
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 1000);
        let back = read_dtab(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn dtab_rejects_damage() {
        let table = DivisorTable::sieve(10).unwrap();
        let mut buf = Vec::new();
        write_dtab(&mut buf, &table).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_dtab(&bad[..], Path::new("mem")).is_err());
        assert!(read_dtab(&buf[..buf.len() - 1], Path::new("mem")).is_err());
        let mut v2 = buf.clone();
        v2[4] = 2;
        assert!(read_dtab(&v2[..], Path::new("mem")).is_err());
    }

    #[test]
    fn num_round_trips() {
        for &x in &[
            0.0,
            -1.5,
            1e-300,
            123456.789,
            std::f64::consts::PI,
            0.1 + 0.2,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
