//! CSV, JSON and binary field output.
//!
//! Floats in CSV are written with 17 significant digits; JSON goes through
//! `serde_json`, whose shortest round-trip representation is also lossless.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{Field, SpectralGrid, C64};

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Table of string cells, quoted per RFC 4180 on write.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            wr.write_record(r).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        ensure_parent(path)?;
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn to_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.into()))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// `x, re, im` of the physical field (carrier applied).
pub fn field_table(f: &Field) -> Table {
    let mut t = Table::new(["x", "re", "im"]);
    for (x, z) in f.grid().nodes().iter().zip(f.physical()) {
        t.push_floats(&[*x, z.re, z.im]);
    }
    t
}

/// Binary dump: little-endian `u64 N`, `f64 L`, then `N` interleaved
/// `(re, im)` pairs of the physical samples.
pub fn write_field_binary(path: &Path, f: &Field) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(File::create(path)?);
    let grid = f.grid();
    w.write_all(&(grid.n() as u64).to_le_bytes())?;
    w.write_all(&grid.half_length().to_le_bytes())?;
    for z in f.physical() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dump written by [`write_field_binary`] (carrier 0).
pub fn read_field_binary(path: &Path) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    let grid = SpectralGrid::new(l, n)?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        data.push(C64::new(re, f64::from_le_bytes(b8)));
    }
    if r.read(&mut b8)? != 0 {
        return Err(Error::InvalidInput(format!("{}: trailing bytes after {n} samples", path.display())));
    }
    Ok(Field::new(grid, data))
}
