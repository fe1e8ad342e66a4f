//! Embedding matrices: validation, pairing, and on-disk formats.
//!
//! Three formats are supported:
//!
//! * `emb1`: native binary. Magic `EMB1`, one dtype byte (0 = f32, 1 = f64),
//!   little-endian `u64` row and column counts, then row-major little-endian
//!   values.
//! * `npy`: NumPy format v1.0, 2-D, C order, `<f4` or `<f8`.
//! * `csv`: headerless, comma separated, one sample per line.
//!
//! Values are held as f64 regardless of the on-disk dtype.

mod emb1;
mod npy;
mod text;

use std::fmt;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, VendiError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modality {
    Image,
    Text,
    Video,
    #[default]
    Other,
}

impl FromStr for Modality {
    type Err = VendiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "image" => Ok(Modality::Image),
            "text" => Ok(Modality::Text),
            "video" => Ok(Modality::Video),
            "other" => Ok(Modality::Other),
            _ => Err(VendiError::Param(format!("unknown modality '{s}'"))),
        }
    }
}

/// Storage precision of the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Emb1,
    Csv,
    Npy,
}

impl FromStr for Format {
    type Err = VendiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "emb1" => Ok(Format::Emb1),
            "csv" => Ok(Format::Csv),
            "npy" => Ok(Format::Npy),
            _ => Err(VendiError::Param(format!(
                "unknown format '{s}' (expected emb1, csv or npy)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Emb1 => "emb1",
            Format::Csv => "csv",
            Format::Npy => "npy",
        })
    }
}

/// An `n × d` matrix of sample embeddings, one sample per row.
///
/// Row order is the pairing order: row `i` of a generated-data set is paired
/// with row `i` of the prompt set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    pub modality: Modality,
    pub source_label: String,
    pub dtype: Dtype,
}

impl EmbeddingSet {
    /// Builds a set from row-major values, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(VendiError::Data(format!(
                "empty embedding matrix ({rows} x {cols})"
            )));
        }
        if data.len() != rows * cols {
            return Err(VendiError::Data(format!(
                "expected {} values for a {rows} x {cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(VendiError::DataAt {
                row: pos / cols,
                col: pos % cols,
                msg: format!("non-finite value {}", data[pos]),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            modality: Modality::Other,
            source_label: String::new(),
            dtype: Dtype::F64,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(VendiError::Data(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn with_modality(mut self, modality: Modality) -> Self {
        self.modality = modality;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }

    /// Marks the set as f32-backed and rounds every value to f32 precision.
    pub fn into_f32(mut self) -> Self {
        for v in &mut self.data {
            *v = f64::from(*v as f32);
        }
        self.dtype = Dtype::F32;
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    /// Row-major values.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// A new set holding the listed rows in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(VendiError::Param(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        let mut out = Self::new(indices.len(), self.cols, data)?;
        out.modality = self.modality;
        out.source_label = self.source_label.clone();
        out.dtype = self.dtype;
        Ok(out)
    }
}

/// Generated samples `x` aligned row-by-row with their prompts `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    pub x: EmbeddingSet,
    pub t: EmbeddingSet,
    labels: Option<Vec<usize>>,
    num_groups: usize,
}

impl PairedDataset {
    #[inline]
    pub fn n(&self) -> usize {
        self.x.n()
    }

    /// Group labels in `1..=num_groups`, when supplied.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of label classes, or 0 when the dataset is unlabeled.
    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// The same pairs reordered: row `i` of the result is row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let labels = self
            .labels
            .as_ref()
            .map(|l| order.iter().map(|&i| l[i]).collect());
        pair(
            self.x.select_rows(order)?,
            self.t.select_rows(order)?,
            labels,
        )
    }
}

/// Pairs two sets of equal length. Labels, when given, must take values in
/// `1..=m` with every class in that range present.
pub fn pair(x: EmbeddingSet, t: EmbeddingSet, labels: Option<Vec<usize>>) -> Result<PairedDataset> {
    if x.n() != t.n() {
        return Err(VendiError::Pair {
            x_rows: x.n(),
            t_rows: t.n(),
        });
    }
    let mut num_groups = 0;
    if let Some(l) = &labels {
        if l.len() != x.n() {
            return Err(VendiError::Data(format!(
                "{} labels for {} samples",
                l.len(),
                x.n()
            )));
        }
        if let Some(pos) = l.iter().position(|&g| g == 0) {
            return Err(VendiError::DataAt {
                row: pos,
                col: 0,
                msg: "group labels start at 1".into(),
            });
        }
        num_groups = l.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; num_groups];
        for &g in l {
            seen[g - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(VendiError::Data(format!(
                "label {} has no samples (labels must cover 1..={num_groups})",
                missing + 1
            )));
        }
    }
    Ok(PairedDataset {
        x,
        t,
        labels,
        num_groups,
    })
}

pub fn load_embeddings(path: impl AsRef<Path>, format: Format) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let file = fs::File::open(path)?;
    let mut reader = BufReader::new(file);
    let set = match format {
        Format::Emb1 => emb1::read(&mut reader)?,
        Format::Npy => npy::read(&mut reader)?,
        Format::Csv => text::read(reader)?,
    };
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(set.with_label(label))
}

pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut writer = BufWriter::new(file);
    match format {
        Format::Emb1 => emb1::write(set, &mut writer)?,
        Format::Npy => npy::write(set, &mut writer)?,
        Format::Csv => text::write(set, &mut writer)?,
    }
    writer.flush()?;
    Ok(())
}

/// Reads one positive integer label per line; blank lines are skipped.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<usize>().map_err(|e| VendiError::DataAt {
                row: i,
                col: 0,
                msg: format!("bad label '{}': {e}", l.trim()),
            })
        })
        .collect()
}
