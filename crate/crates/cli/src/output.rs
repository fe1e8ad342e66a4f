//! Report serialization. Floats are written with 17 significant digits so a
//! rerun with the same inputs produces the same bytes.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use serde::{Serialize, Serializer};

/// A float serialized with 17 significant digits; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

/// Scientific notation with an explicit exponent sign, e.g. `1.0000000000000000e+0`.
pub fn sig17(v: f64) -> String {
    let s = format!("{v:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n = serde_json::Number::from_str(&sig17(self.0)).map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Plain CSV: a header row, then one line per record.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Float(f64),
    Int(usize),
    Bool(bool),
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(
            row.into_iter()
                .map(|c| match c {
                    Cell::Float(v) if v.is_finite() => sig17(v),
                    Cell::Float(v) => {
                        if v > 0.0 {
                            "inf".into()
                        } else {
                            "nan".into()
                        }
                    }
                    Cell::Int(v) => v.to_string(),
                    Cell::Bool(v) => v.to_string(),
                })
                .collect(),
        );
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so a failed run never leaves a partial report. Without a path the bytes go
/// to stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(1.0), "1.0000000000000000e+0");
        assert_eq!(sig17(-250.0), "-2.5000000000000000e+2");
        let v: f64 = sig17(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn json_numbers_keep_their_text() {
        #[derive(Serialize)]
        struct R {
            b: Sig17,
            a: Sig17,
        }
        let s = String::from_utf8(
            to_json(&R {
                b: Sig17(0.5),
                a: Sig17(f64::INFINITY),
            })
            .unwrap(),
        )
        .unwrap();
        assert_eq!(s, "{\n  \"b\": 5.0000000000000000e-1,\n  \"a\": null\n}\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit(Some(&path), b"one").unwrap();
        emit(Some(&path), b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
