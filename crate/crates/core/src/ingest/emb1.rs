use std::io::{ErrorKind, Read, Write};

use super::{Dtype, EmbeddingSet};
use crate::error::{Result, VendiError};

const MAGIC: &[u8; 4] = b"EMB1";

fn read_exact_or_format<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => VendiError::Format(format!("EMB1: truncated {what}")),
        _ => VendiError::Io(e),
    })
}

pub(super) fn read<R: Read>(r: &mut R) -> Result<EmbeddingSet> {
    let mut header = [0u8; 21];
    read_exact_or_format(r, &mut header, "header")?;
    if &header[..4] != MAGIC {
        return Err(VendiError::Format("EMB1: bad magic".into()));
    }
    let dtype = match header[4] {
        0 => Dtype::F32,
        1 => Dtype::F64,
        flag => {
            return Err(VendiError::Format(format!(
                "EMB1: unknown dtype flag {flag}"
            )))
        }
    };
    let n = u64::from_le_bytes(header[5..13].try_into().unwrap());
    let d = u64::from_le_bytes(header[13..21].try_into().unwrap());
    let count = usize::try_from(n)
        .ok()
        .zip(usize::try_from(d).ok())
        .and_then(|(n, d)| n.checked_mul(d))
        .ok_or_else(|| VendiError::Format(format!("EMB1: shape {n} x {d} too large")))?;
    let width = match dtype {
        Dtype::F32 => 4,
        Dtype::F64 => 8,
    };
    let mut bytes = vec![0u8; count * width];
    read_exact_or_format(r, &mut bytes, "payload")?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(VendiError::Format(
            "EMB1: trailing bytes after payload".into(),
        ));
    }
    let data: Vec<f64> = match dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect(),
        Dtype::F64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    };
    let mut set = EmbeddingSet::new(n as usize, d as usize, data)?;
    set.dtype = dtype;
    Ok(set)
}

pub(super) fn write<W: Write>(set: &EmbeddingSet, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[match set.dtype {
        Dtype::F32 => 0,
        Dtype::F64 => 1,
    }])?;
    w.write_all(&(set.n() as u64).to_le_bytes())?;
    w.write_all(&(set.dim() as u64).to_le_bytes())?;
    for &v in set.as_slice() {
        match set.dtype {
            Dtype::F32 => w.write_all(&(v as f32).to_le_bytes())?,
            Dtype::F64 => w.write_all(&v.to_le_bytes())?,
        }
    }
    Ok(())
}
