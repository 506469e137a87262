//! Embedding files.
//!
//! CSV: one row per sample, numeric columns, an optional header; a final
//! column headed `label` carries integer classes and a first column headed
//! `id` carries sample ids.
//!
//! TLK binary, all little-endian:
//!
//! ```text
//! b"TLK1" | u32 m | u32 d | u8 has_labels | m·d f64 row-major | m i32 labels (if has_labels)
//! ```

use std::fs;
use std::path::Path;

use tleak_core::{EmbeddingSet, LabelKind, LabelVector};

use crate::error::{CliError, Result};

pub const TLK_MAGIC: &[u8; 4] = b"TLK1";
const TLK_HEADER: usize = 13;
const SENTINEL_MESSAGE: &str = "unlabeled sentinel not supported";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Tlk,
}

impl FileFormat {
    /// `.csv` is CSV and everything else is TLK.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FileFormat::Csv,
            _ => FileFormat::Tlk,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub data: EmbeddingSet,
    pub labels: Option<LabelVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeError {
    Format(String),
    Core(tleak_core::Error),
}

impl From<tleak_core::Error> for DecodeError {
    fn from(e: tleak_core::Error) -> Self {
        DecodeError::Core(e)
    }
}

impl DecodeError {
    fn at(self, path: &Path) -> CliError {
        match self {
            DecodeError::Format(m) => CliError::format(path, m),
            DecodeError::Core(e) => e.into(),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn load_embeddings(path: &Path) -> Result<Loaded> {
    let bytes = read(path)?;
    let decoded = if bytes.starts_with(TLK_MAGIC) || FileFormat::for_path(path) == FileFormat::Tlk {
        decode_tlk(&bytes)
    } else {
        decode_csv(&bytes)
    };
    decoded.map_err(|e| e.at(path))
}

pub fn save_embeddings(path: &Path, data: &EmbeddingSet, labels: Option<&LabelVector>) -> Result<()> {
    let bytes = match FileFormat::for_path(path) {
        FileFormat::Csv => encode_csv(data, labels).into_bytes(),
        FileFormat::Tlk => encode_tlk(data, labels),
    };
    crate::write_atomic(path, &bytes)
}

fn label_from_i64(v: i64, at: impl Fn() -> String) -> std::result::Result<usize, DecodeError> {
    match v {
        -1 => Err(DecodeError::Format(format!("{}: {SENTINEL_MESSAGE}", at()))),
        v if v < 0 => Err(DecodeError::Format(format!("{}: negative label {v}", at()))),
        v => Ok(v as usize),
    }
}

pub fn decode_tlk(bytes: &[u8]) -> std::result::Result<Loaded, DecodeError> {
    let fmt = |m: String| DecodeError::Format(m);
    if bytes.len() < 4 || &bytes[..4] != TLK_MAGIC {
        return Err(fmt("bad magic at byte offset 0: expected \"TLK1\"".into()));
    }
    if bytes.len() < TLK_HEADER {
        return Err(fmt(format!("truncated header at byte offset {}: need {TLK_HEADER} bytes", bytes.len())));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (m, d) = (u32_at(4), u32_at(8));
    let has_labels = match bytes[12] {
        0 => false,
        1 => true,
        b => return Err(fmt(format!("has_labels flag at byte offset 12 is {b}, expected 0 or 1"))),
    };
    if m == 0 {
        return Err(tleak_core::Error::Input("empty dataset".into()).into());
    }
    if d == 0 {
        return Err(fmt("zero embedding dimension at byte offset 8".into()));
    }
    let values_len = m
        .checked_mul(d)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| fmt("m·d overflows".into()))?;
    let labels_len = if has_labels { m * 4 } else { 0 };
    let expected = TLK_HEADER as u128 + values_len as u128 + labels_len as u128;
    if (bytes.len() as u128) < expected {
        return Err(fmt(format!(
            "truncated at byte offset {}: expected {expected} bytes for m = {m}, d = {d}",
            bytes.len()
        )));
    }
    if (bytes.len() as u128) > expected {
        return Err(fmt(format!("trailing bytes after byte offset {expected}")));
    }

    let body = &bytes[TLK_HEADER..TLK_HEADER + values_len];
    let mut values = Vec::with_capacity(m * d);
    for (k, chunk) in body.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(fmt(format!("non-finite value at byte offset {}", TLK_HEADER + 8 * k)));
        }
        values.push(v);
    }
    let data = EmbeddingSet::new(m, d, values)?;

    let labels = if has_labels {
        let start = TLK_HEADER + values_len;
        let mut out = Vec::with_capacity(m);
        for (k, chunk) in bytes[start..].chunks_exact(4).enumerate() {
            let v = i32::from_le_bytes(chunk.try_into().unwrap()) as i64;
            out.push(label_from_i64(v, || format!("label at byte offset {}", start + 4 * k))?);
        }
        Some(LabelVector::from_labels(out, LabelKind::Truth)?)
    } else {
        None
    };
    Ok(Loaded { data, labels })
}

pub fn encode_tlk(data: &EmbeddingSet, labels: Option<&LabelVector>) -> Vec<u8> {
    let mut out = Vec::with_capacity(TLK_HEADER + data.values().len() * 8 + data.rows() * 4);
    out.extend_from_slice(TLK_MAGIC);
    out.extend_from_slice(&(data.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(data.dim() as u32).to_le_bytes());
    out.push(labels.is_some() as u8);
    for v in data.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(l) = labels {
        for &c in l.labels() {
            out.extend_from_slice(&(c as i32).to_le_bytes());
        }
    }
    out
}

struct CsvTable {
    header: Option<Vec<String>>,
    /// (line number, fields)
    rows: Vec<(u64, Vec<String>)>,
}

fn read_csv(bytes: &[u8]) -> std::result::Result<CsvTable, DecodeError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DecodeError::Format(format!("malformed CSV: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec.iter().map(str::to_owned).collect::<Vec<_>>()));
    }
    let header = match rows.first() {
        Some((_, first)) if first.iter().any(|f| f.parse::<f64>().is_err()) => Some(rows.remove(0).1),
        _ => None,
    };
    Ok(CsvTable { header, rows })
}

pub fn decode_csv(bytes: &[u8]) -> std::result::Result<Loaded, DecodeError> {
    let table = read_csv(bytes)?;
    let width = table
        .header
        .as_ref()
        .map(Vec::len)
        .or_else(|| table.rows.first().map(|r| r.1.len()))
        .unwrap_or(0);
    let has_labels = table.header.as_ref().is_some_and(|h| h.last().is_some_and(|c| c == "label"));
    let has_ids = table.header.as_ref().is_some_and(|h| h.first().is_some_and(|c| c == "id"));
    let feature_cols = width.saturating_sub(has_labels as usize + has_ids as usize);
    if table.rows.is_empty() {
        return Err(tleak_core::Error::Input("empty dataset".into()).into());
    }
    if feature_cols == 0 {
        return Err(DecodeError::Format("no feature columns".into()));
    }

    let mut values = Vec::with_capacity(table.rows.len() * feature_cols);
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (line, fields) in &table.rows {
        if fields.len() != width {
            return Err(DecodeError::Format(format!(
                "line {line}: expected {width} fields, found {}",
                fields.len()
            )));
        }
        let mut cols = fields.iter().enumerate();
        if has_ids {
            ids.push(cols.next().unwrap().1.clone());
        }
        for (col, cell) in cols.by_ref().take(feature_cols) {
            let v: f64 = cell.parse().map_err(|_| {
                DecodeError::Format(format!("line {line}, column {}: cannot parse {cell:?} as a number", col + 1))
            })?;
            if !v.is_finite() {
                return Err(DecodeError::Format(format!("line {line}, column {}: non-finite value", col + 1)));
            }
            values.push(v);
        }
        if has_labels {
            let (col, cell) = cols.next().unwrap();
            let at = || format!("line {line}, column {}", col + 1);
            let v: i64 = cell
                .parse()
                .map_err(|_| DecodeError::Format(format!("{}: cannot parse {cell:?} as a label", at())))?;
            labels.push(label_from_i64(v, at)?);
        }
    }
    let mut data = EmbeddingSet::new(table.rows.len(), feature_cols, values)?;
    if has_ids {
        data = data.with_sample_ids(ids)?;
    }
    let labels = if has_labels { Some(LabelVector::from_labels(labels, LabelKind::Truth)?) } else { None };
    Ok(Loaded { data, labels })
}

pub fn encode_csv(data: &EmbeddingSet, labels: Option<&LabelVector>) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = Vec::new();
    if data.sample_ids().is_some() {
        header.push("id".into());
    }
    header.extend((0..data.dim()).map(|j| format!("x{j}")));
    if labels.is_some() {
        header.push("label".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in data.iter_rows().enumerate() {
        let mut fields: Vec<String> = Vec::with_capacity(row.len() + 2);
        if let Some(ids) = data.sample_ids() {
            fields.push(ids[i].clone());
        }
        fields.extend(row.iter().map(|v| format!("{v:?}")));
        if let Some(l) = labels {
            fields.push(l.labels()[i].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Labels from a TLK file, a CSV with a `label` column, or a one-column CSV.
pub fn load_labels(path: &Path) -> Result<LabelVector> {
    let bytes = read(path)?;
    if bytes.starts_with(TLK_MAGIC) {
        return decode_tlk(&bytes)
            .map_err(|e| e.at(path))?
            .labels
            .ok_or_else(|| CliError::format(path, "file has no labels"));
    }
    decode_label_csv(&bytes).map_err(|e| e.at(path))
}

pub fn decode_label_csv(bytes: &[u8]) -> std::result::Result<LabelVector, DecodeError> {
    let table = read_csv(bytes)?;
    let col = match &table.header {
        Some(h) => h
            .iter()
            .position(|c| c == "label")
            .ok_or_else(|| DecodeError::Format("no \"label\" column".into()))?,
        None if table.rows.first().is_some_and(|r| r.1.len() == 1) => 0,
        None => return Err(DecodeError::Format("expected a single label column or a \"label\" header".into())),
    };
    if table.rows.is_empty() {
        return Err(tleak_core::Error::Input("empty label file".into()).into());
    }
    let mut labels = Vec::with_capacity(table.rows.len());
    for (line, fields) in &table.rows {
        let cell = fields
            .get(col)
            .ok_or_else(|| DecodeError::Format(format!("line {line}: missing label column")))?;
        let at = || format!("line {line}");
        let v: i64 = cell
            .parse()
            .map_err(|_| DecodeError::Format(format!("line {line}: cannot parse {cell:?} as a label")))?;
        labels.push(label_from_i64(v, at)?);
    }
    Ok(LabelVector::from_labels(labels, LabelKind::Truth)?)
}

pub fn encode_label_csv(labels: &LabelVector) -> String {
    let mut out = String::from("label\n");
    for l in labels.labels() {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}
