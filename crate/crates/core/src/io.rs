//! Artifact files: CSV with a `# manifest_hash=` comment row, JSON with
//! stable key order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::ModeField;

/// SHA-256 of the canonical configuration text and the crate version.
pub fn manifest_hash(cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(format!("conelab {}\n", env!("CARGO_PKG_VERSION")));
    h.update(cfg.to_toml());
    hex::encode(h.finalize())
}

/// Shortest representation that reads back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, hash: &str, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut buf = BufWriter::new(file);
        writeln!(buf, "# manifest_hash={hash}").map_err(|e| Error::io(path, e))?;
        let mut writer = csv::WriterBuilder::new().from_writer(buf);
        writer.write_record(header).map_err(|e| csv_error(path, e))?;
        Ok(CsvOut { path: path.to_path_buf(), writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse { path: path.display().to_string(), message: e.to_string() })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Value of the `# manifest_hash=` row, if the file has one.
pub fn read_manifest_hash(path: &Path) -> Result<Option<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first).map_err(|e| Error::io(path, e))?;
    Ok(first.trim().strip_prefix("# manifest_hash=").map(str::to_string))
}

/// One time level of a mode-space snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: ModeField,
}

pub const SNAPSHOT_HEADER: [&str; 5] = ["t", "x", "k", "re", "im"];

pub fn write_snapshot_rows(out: &mut CsvOut, t: f64, x: &[f64], u: &ModeField) -> Result<()> {
    for (j, xj) in x.iter().enumerate() {
        for k in 0..=u.k_max() {
            let v = u.mode(k)[j];
            out.row([fmt_f64(t), fmt_f64(*xj), k.to_string(), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
    }
    Ok(())
}

/// Read every time level of a `(t, x, k, re, im)` snapshot file.
pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRecord>> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.display().to_string(), message: format!("record {line}: {msg}") };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != SNAPSHOT_HEADER {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("expected header {}", SNAPSHOT_HEADER.join(",")),
        });
    }
    let mut out: Vec<SnapshotRecord> = Vec::new();
    let mut rows: Vec<(f64, f64, usize, Complex64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let num = |c: usize| rec[c].parse::<f64>().map_err(|e| parse_err(i + 1, format!("column {}: {e}", SNAPSHOT_HEADER[c])));
        let k = rec[2].parse::<usize>().map_err(|e| parse_err(i + 1, format!("column k: {e}")))?;
        rows.push((num(0)?, num(1)?, k, Complex64::new(num(3)?, num(4)?)));
    }
    let mut start = 0;
    while start < rows.len() {
        let t = rows[start].0;
        let end = start + rows[start..].iter().take_while(|r| r.0 == t).count();
        let block = &rows[start..end];
        let k_max = block.iter().map(|r| r.2).max().unwrap_or(0);
        if block.len() % (k_max + 1) != 0 {
            return Err(parse_err(start + 1, format!("time {t} has an incomplete mode block")));
        }
        let n = block.len() / (k_max + 1);
        let mut modes = vec![vec![Complex64::new(0.0, 0.0); n]; k_max + 1];
        let mut x = Vec::with_capacity(n);
        for (idx, r) in block.iter().enumerate() {
            let (j, k) = (idx / (k_max + 1), idx % (k_max + 1));
            if r.2 != k {
                return Err(parse_err(start + idx + 1, format!("expected mode {k}, found {}", r.2)));
            }
            if k == 0 {
                x.push(r.1);
            }
            modes[k][j] = r.3;
        }
        out.push(SnapshotRecord { t, x, u: ModeField::from_modes(modes) });
        start = end;
    }
    if out.is_empty() {
        return Err(Error::Parse { path: path.display().to_string(), message: "no snapshot rows".into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let x = vec![1e-3, 0.1, 1.0 / 3.0];
        let mut u = ModeField::zeros(2, 3);
        u.mode_mut(1)[2] = Complex64::new(0.1 + 0.2, -1e-300);
        u.mode_mut(0)[0] = Complex64::new(std::f64::consts::PI, 0.0);
        let mut out = CsvOut::create(&path, "abc", &SNAPSHOT_HEADER).unwrap();
        write_snapshot_rows(&mut out, 0.0, &x, &u).unwrap();
        write_snapshot_rows(&mut out, 0.5, &x, &u.scale(2.0)).unwrap();
        out.finish().unwrap();
        let back = read_snapshots(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].u, u);
        assert_eq!(back[1].x, x);
        assert_eq!(read_manifest_hash(&path).unwrap().as_deref(), Some("abc"));
    }
}
