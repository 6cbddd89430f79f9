//! Data files, standardization and trace persistence.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trace::TraceRecord;

/// Numeric table read from a CSV file. Rows are observations.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<DVector<f64>>,
}

impl Table {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }
}

/// Reads a rectangular numeric CSV. A first row that does not parse as
/// numbers is taken as the header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

pub(crate) fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<Table> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut header = None;
    let mut rows: Vec<DVector<f64>> = Vec::new();
    let mut width = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if let Some(w) = width {
            if rec.len() != w {
                return Err(parse_err(line, format!("expected {w} fields, found {}", rec.len())));
            }
        }
        let parsed: std::result::Result<Vec<f64>, usize> =
            rec.iter().enumerate().map(|(c, f)| f.parse::<f64>().map_err(|_| c)).collect();
        match parsed {
            Ok(v) => {
                if let Some(c) = v.iter().position(|x| !x.is_finite()) {
                    return Err(parse_err(line, format!("column {} is not finite", c + 1)));
                }
                width = Some(v.len());
                rows.push(DVector::from_vec(v));
            }
            Err(_) if width.is_none() && header.is_none() => {
                width = Some(rec.len());
                header = Some(rec.iter().map(str::to_string).collect());
            }
            Err(c) => {
                return Err(parse_err(line, format!("column {} is not numeric: {:?}", c + 1, &rec[c])));
            }
        }
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no numeric rows".into()));
    }
    Ok(Table { header, rows })
}

/// Writes rows as CSV with an optional header.
pub fn write_csv<'a, I>(path: impl AsRef<Path>, header: Option<&[String]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    if let Some(h) = header {
        w.write_record(h).map_err(csv_err)?;
    }
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v}"))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Centred, unit-variance data plus the per-column shift and scale. The
/// variance uses the `n - 1` denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizedData<T: Real = f64> {
    pub data: Vec<DVector<T>>,
    pub mean: DVector<T>,
    pub sd: DVector<T>,
}

impl<T: Real> StandardizedData<T> {
    /// Fits the transform on `raw` and applies it.
    pub fn fit(raw: &[DVector<T>]) -> Result<Self> {
        let n = raw.len();
        if n < 2 {
            return Err(Error::Data(format!("standardizing needs at least 2 rows, got {n}")));
        }
        let p = raw[0].len();
        let nt = T::of_usize(n);
        let mean = raw.iter().fold(DVector::zeros(p), |a, x| a + x) / nt;
        let var = raw.iter().fold(DVector::zeros(p), |a: DVector<T>, x| {
            let d = x - &mean;
            a + d.component_mul(&d)
        }) / (nt - T::one());
        if let Some(c) = var.iter().position(|&v| !(v > T::zero())) {
            return Err(Error::Data(format!("column {} has zero variance", c + 1)));
        }
        let sd = var.map(|v| v.sqrt());
        let mut s = Self { data: Vec::new(), mean, sd };
        s.data = raw.iter().map(|x| s.apply(x)).collect();
        Ok(s)
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        (x - &self.mean).component_div(&self.sd)
    }

    pub fn back_transform(&self, z: &DVector<T>) -> DVector<T> {
        z.component_mul(&self.sd) + &self.mean
    }
}

pub fn standardize<T: Real>(raw: &[DVector<T>]) -> Result<StandardizedData<T>> {
    StandardizedData::fit(raw)
}

/// One JSON record per line.
pub fn write_trace(path: impl AsRef<Path>, trace: &[TraceRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for rec in trace {
        serde_json::to_writer(&mut w, rec).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            msg: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// splitmix64 finalizer. Chain `c` (0-based) of master seed `s` uses
/// `splitmix64(s + c * 0x9E3779B97F4A7C15)`, so adding chains never changes
/// the streams of existing ones.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chain_seed(master: u64, chain: usize) -> u64 {
    splitmix64(master.wrapping_add((chain as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}
