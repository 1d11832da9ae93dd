//! CSV and JSON output.
//!
//! Floats are written with 17 significant digits so that values round-trip
//! exactly; infinities are written as `inf`. Bitstrings are rendered over
//! `+`/`-` with site 0 leftmost.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::model::RunManifest;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "BORN_DQPT_OUT";
/// File name of the per-run manifest.
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        // adding +0 folds -0 into 0
        format!("{:.16e}", x + 0.0)
    }
}

/// Parses what [`fmt_float`] writes.
pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Resolves the output directory: explicit path, then `$BORN_DQPT_OUT`, then `./out`.
pub fn output_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Row-oriented CSV writer with a fixed header.
pub struct CsvTable {
    writer: csv::Writer<File>,
    width: usize,
}

impl CsvTable {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut writer = csv::Writer::from_writer(File::create(path)?);
        writer.write_record(header).map_err(csv_err)?;
        Ok(CsvTable {
            writer,
            width: header.len(),
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let rec: csv::ByteRecord = fields.into_iter().collect();
        debug_assert_eq!(rec.len(), self.width, "row width mismatch");
        self.writer.write_byte_record(&rec).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

/// Writes `manifest.json` into `dir`, replacing any previous one.
pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    fs::create_dir_all(dir)?;
    fs::write(&path, manifest.to_json()? + "\n")?;
    Ok(path)
}

/// Reads a CSV file back as header plus string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0 / 3.0, -2.5e-300, 6.02e23, std::f64::consts::PI] {
            assert_eq!(parse_float(&fmt_float(x)).unwrap(), x);
        }
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert!(parse_float("inf").unwrap().is_infinite());
        assert!(parse_float("x").is_none());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/a.csv");
        let mut t = CsvTable::create(&path, &["t", "f"]).unwrap();
        t.row([fmt_float(0.5), fmt_float(f64::INFINITY)]).unwrap();
        t.finish().unwrap();
        let (h, rows) = read_csv(&path).unwrap();
        assert_eq!(h, ["t", "f"]);
        assert_eq!(parse_float(&rows[0][0]), Some(0.5));
        assert_eq!(rows[0][1], "inf");
    }

    #[test]
    fn output_dir_precedence() {
        assert_eq!(output_dir(Some(Path::new("x"))), PathBuf::from("x"));
    }
}
