use std::io::{Read, Write};

use super::EmbeddingSet;
use crate::error::{Result, VendiError};

pub(super) fn read<R: Read>(r: R) -> Result<EmbeddingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| VendiError::Format(format!("CSV: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(VendiError::Format(format!(
                    "CSV: line {} has {} fields, expected {c}",
                    row + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                VendiError::Format(format!(
                    "CSV: cannot parse '{field}' at row {row}, column {col}"
                ))
            })?;
            if !v.is_finite() {
                return Err(VendiError::DataAt {
                    row,
                    col,
                    msg: format!("non-finite value {v}"),
                });
            }
            data.push(v);
        }
        rows += 1;
    }
    EmbeddingSet::new(rows, cols.unwrap_or(0), data)
}

pub(super) fn write<W: Write>(set: &EmbeddingSet, w: &mut W) -> Result<()> {
    for row in set.rows() {
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            // Debug formatting is the shortest string that parses back exactly.
            write!(w, "{v:?}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_parse() {
        let set = read("1.0,2.0\n3.0,4.0".as_bytes()).unwrap();
        assert_eq!((set.n(), set.dim()), (2, 2));
        assert_eq!(set.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            read("1,2\n3".as_bytes()),
            Err(VendiError::Format(_))
        ));
        assert!(matches!(read("1,x".as_bytes()), Err(VendiError::Format(_))));
        assert!(matches!(read("".as_bytes()), Err(VendiError::Data(_))));
        match read("1,2\n3,NaN".as_bytes()) {
            Err(VendiError::DataAt { row, col, .. }) => assert_eq!((row, col), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exact_round_trip() {
        let set = EmbeddingSet::new(1, 4, vec![0.1, -1e-300, 1.0 / 3.0, 12345.678]).unwrap();
        let mut buf = Vec::new();
        write(&set, &mut buf).unwrap();
        assert_eq!(read(buf.as_slice()).unwrap(), set);
    }
}
