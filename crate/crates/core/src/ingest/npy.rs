//! NumPy `.npy` v1.0 subset: 2-D, C order, little-endian f32/f64.

use std::io::{ErrorKind, Read, Write};

use super::{Dtype, EmbeddingSet};
use crate::error::{Result, VendiError};

const MAGIC: &[u8; 6] = b"\x93NUMPY";

fn fmt_err(msg: impl Into<String>) -> VendiError {
    VendiError::Format(format!("NPY: {}", msg.into()))
}

struct Header {
    dtype: Dtype,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Extracts the value text following `'key':` in a Python dict literal.
fn dict_value<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    let (start, needle) = [format!("'{key}'"), format!("\"{key}\"")]
        .into_iter()
        .find_map(|needle| header.find(&needle).map(|at| (at, needle)))
        .ok_or_else(|| fmt_err(format!("header missing '{key}'")))?;
    let rest = header[start + needle.len()..].trim_start();
    let rest = rest
        .strip_prefix(':')
        .ok_or_else(|| fmt_err(format!("expected ':' after '{key}'")))?;
    Ok(rest.trim_start())
}

fn parse_header(text: &str) -> Result<Header> {
    let text = text.trim();
    if !text.starts_with('{') || !text.ends_with('}') {
        return Err(fmt_err("header is not a dict literal"));
    }

    let descr = dict_value(text, "descr")?;
    let quote = descr
        .chars()
        .next()
        .filter(|c| *c == '\'' || *c == '"')
        .ok_or_else(|| fmt_err("descr is not a string"))?;
    let descr = &descr[1..];
    let end = descr
        .find(quote)
        .ok_or_else(|| fmt_err("unterminated descr"))?;
    let dtype = match &descr[..end] {
        "<f4" => Dtype::F32,
        "<f8" => Dtype::F64,
        other => return Err(fmt_err(format!("unsupported dtype '{other}'"))),
    };

    let fortran = dict_value(text, "fortran_order")?;
    let fortran_order = if fortran.starts_with("False") {
        false
    } else if fortran.starts_with("True") {
        true
    } else {
        return Err(fmt_err("fortran_order is not a bool"));
    };

    let shape = dict_value(text, "shape")?;
    let shape = shape
        .strip_prefix('(')
        .and_then(|s| s.find(')').map(|e| &s[..e]))
        .ok_or_else(|| fmt_err("shape is not a tuple"))?;
    let shape = shape
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| fmt_err(format!("bad dimension '{s}'")))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Header {
        dtype,
        fortran_order,
        shape,
    })
}

pub(super) fn read<R: Read>(r: &mut R) -> Result<EmbeddingSet> {
    let eof = |e: std::io::Error, what: &str| match e.kind() {
        ErrorKind::UnexpectedEof => fmt_err(format!("truncated {what}")),
        _ => VendiError::Io(e),
    };
    let mut preamble = [0u8; 10];
    r.read_exact(&mut preamble)
        .map_err(|e| eof(e, "preamble"))?;
    if &preamble[..6] != MAGIC {
        return Err(fmt_err("bad magic"));
    }
    if preamble[6] != 1 || preamble[7] != 0 {
        return Err(fmt_err(format!(
            "unsupported version {}.{}",
            preamble[6], preamble[7]
        )));
    }
    let header_len = u16::from_le_bytes([preamble[8], preamble[9]]) as usize;
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header).map_err(|e| eof(e, "header"))?;
    let header = std::str::from_utf8(&header).map_err(|_| fmt_err("header is not ASCII"))?;
    let header = parse_header(header)?;
    if header.fortran_order {
        return Err(fmt_err("Fortran-order arrays are not supported"));
    }
    let [n, d] = header.shape[..] else {
        return Err(fmt_err(format!(
            "expected a 2-D array, got shape {:?}",
            header.shape
        )));
    };
    let width = match header.dtype {
        Dtype::F32 => 4,
        Dtype::F64 => 8,
    };
    let count = n.checked_mul(d).ok_or_else(|| fmt_err("shape overflows"))?;
    let mut bytes = vec![0u8; count * width];
    r.read_exact(&mut bytes).map_err(|e| eof(e, "payload"))?;
    let data = match header.dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect(),
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    let mut set = EmbeddingSet::new(n, d, data)?;
    set.dtype = header.dtype;
    Ok(set)
}

pub(super) fn write<W: Write>(set: &EmbeddingSet, w: &mut W) -> Result<()> {
    let descr = match set.dtype {
        Dtype::F32 => "<f4",
        Dtype::F64 => "<f8",
    };
    let mut header = format!(
        "{{'descr': '{descr}', 'fortran_order': False, 'shape': ({}, {}), }}",
        set.n(),
        set.dim()
    );
    // preamble + header + newline is padded to a multiple of 64 bytes
    let unpadded = MAGIC.len() + 4 + header.len() + 1;
    header.extend(std::iter::repeat_n(' ', (64 - unpadded % 64) % 64));
    header.push('\n');

    w.write_all(MAGIC)?;
    w.write_all(&[1, 0])?;
    w.write_all(&(header.len() as u16).to_le_bytes())?;
    w.write_all(header.as_bytes())?;
    for &v in set.as_slice() {
        match set.dtype {
            Dtype::F32 => w.write_all(&(v as f32).to_le_bytes())?,
            Dtype::F64 => w.write_all(&v.to_le_bytes())?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(header: &str, payload: &[u8]) -> Vec<u8> {
        let mut buf = MAGIC.to_vec();
        buf.extend_from_slice(&[1, 0]);
        buf.extend_from_slice(&(header.len() as u16).to_le_bytes());
        buf.extend_from_slice(header.as_bytes());
        buf.extend_from_slice(payload);
        buf
    }

    #[test]
    fn header_is_aligned() {
        let set = EmbeddingSet::new(4, 3, vec![0.5; 12]).unwrap();
        let mut buf = Vec::new();
        write(&set, &mut buf).unwrap();
        let header_len = u16::from_le_bytes([buf[8], buf[9]]) as usize;
        assert_eq!((10 + header_len) % 64, 0);
        assert_eq!(buf[10 + header_len - 1], b'\n');
        assert_eq!(read(&mut buf.as_slice()).unwrap(), set);
    }

    #[test]
    fn header_variants() {
        let payload: Vec<u8> = [1.0f64, 2.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        let hdr = "{\"descr\": \"<f8\", 'shape': (2,1), 'fortran_order': False}\n";
        let set = read(&mut raw(hdr, &payload).as_slice()).unwrap();
        assert_eq!((set.n(), set.dim()), (2, 1));
    }

    #[test]
    fn rejects_unsupported() {
        let payload = [0u8; 16];
        for hdr in [
            "{'descr': '>f8', 'fortran_order': False, 'shape': (2, 1), }",
            "{'descr': '<i8', 'fortran_order': False, 'shape': (2, 1), }",
            "{'descr': '<f8', 'fortran_order': True, 'shape': (2, 1), }",
            "{'descr': '<f8', 'fortran_order': False, 'shape': (2,), }",
            "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 2), }",
            "{'descr': '<f8', 'fortran_order': False }",
            "not a dict",
        ] {
            assert!(
                matches!(
                    read(&mut raw(hdr, &payload).as_slice()),
                    Err(VendiError::Format(_))
                ),
                "accepted {hdr}"
            );
        }
        let hdr = "{'descr': '<f8', 'fortran_order': False, 'shape': (3, 1), }";
        assert!(matches!(
            read(&mut raw(hdr, &payload).as_slice()),
            Err(VendiError::Format(_))
        ));
        let mut v2 = raw(hdr, &payload);
        v2[6] = 2;
        assert!(matches!(
            read(&mut v2.as_slice()),
            Err(VendiError::Format(_))
        ));
    }
}
