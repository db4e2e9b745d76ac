//! File formats.
//!
//! Features come as CSV (`id,f0,f1,...`) or packed little-endian binary:
//!
//! ```text
//! magic "FST1" | u32 n | u32 d | n x u64 ids | n*d x f32 features
//! ```
//!
//! Truth files are CSV `probe_id,gallery_id`, one pair per row. Mahalanobis
//! matrices are headerless `d x d` CSV. Precomputed distances are CSV with a
//! header `id,<column ids...>` and one `<row id>,<distances...>` line per
//! row.

use std::fs;
use std::io::Write;
use std::path::Path;

use dakr::eval::GroundTruth;
use dakr::{DistanceMatrix, DistanceMetric, FeatureSet, PrecomputedDistances, RankedList};

use crate::error::{CliError, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"FST1";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

fn csv_reader(bytes: &[u8], has_headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| CliError::format(path, format!("line {line}: {field:?} is not a number")))
}

fn parse_u64(path: &Path, line: usize, field: &str) -> Result<u64> {
    field
        .parse::<u64>()
        .map_err(|_| CliError::format(path, format!("line {line}: {field:?} is not a non-negative integer id")))
}

/// Reads a feature file, detecting the binary format by its magic.
pub fn read_features(path: &Path) -> Result<FeatureSet> {
    let bytes = read_bytes(path)?;
    let fs = if bytes.starts_with(FEATURE_MAGIC) {
        parse_binary_features(&bytes, path)?
    } else {
        parse_csv_features(&bytes, path)?
    };
    Ok(fs)
}

fn parse_csv_features(bytes: &[u8], path: &Path) -> Result<FeatureSet> {
    let mut rdr = csv_reader(bytes, true);
    let header = rdr
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if header.get(0) != Some("id") || header.len() < 2 {
        return Err(CliError::format(path, "expected header `id,f0,f1,...`"));
    }
    let dim = header.len() - 1;
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        if rec.len() != dim + 1 {
            return Err(CliError::format(
                path,
                format!("line {line}: expected {} fields, got {}", dim + 1, rec.len()),
            ));
        }
        ids.push(parse_u64(path, line, &rec[0])?);
        for f in rec.iter().skip(1) {
            data.push(parse_f64(path, line, f)?);
        }
    }
    FeatureSet::new(ids, data, dim).map_err(|e| CliError::format(path, e.to_string()))
}

fn parse_binary_features(bytes: &[u8], path: &Path) -> Result<FeatureSet> {
    if bytes.len() < 12 {
        return Err(CliError::format(path, "truncated header"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = 12 + n * 8 + n * d * 4;
    if bytes.len() != expected {
        return Err(CliError::format(
            path,
            format!("{n} x {d} features need {expected} bytes, file has {}", bytes.len()),
        ));
    }
    let ids_end = 12 + n * 8;
    let ids = bytes[12..ids_end]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let data = bytes[ids_end..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    FeatureSet::new(ids, data, d).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn features_to_csv(fs: &FeatureSet) -> String {
    let mut out = String::from("id");
    for c in 0..fs.dim() {
        out.push_str(&format!(",f{c}"));
    }
    out.push('\n');
    for s in fs.samples() {
        out.push_str(&s.id.to_string());
        for v in s.vector {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn features_to_binary(fs: &FeatureSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + fs.len() * (8 + 4 * fs.dim()));
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&(fs.len() as u32).to_le_bytes());
    out.extend_from_slice(&(fs.dim() as u32).to_le_bytes());
    for id in fs.ids() {
        out.extend_from_slice(&id.to_le_bytes());
    }
    for v in fs.as_slice() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    let bytes = read_bytes(path)?;
    let mut rdr = csv_reader(&bytes, true);
    let header = rdr
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["probe_id", "gallery_id"] {
        return Err(CliError::format(path, "expected header `probe_id,gallery_id`"));
    }
    let mut pairs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        if rec.len() != 2 {
            return Err(CliError::format(path, format!("line {}: expected 2 fields", i + 2)));
        }
        pairs.push((parse_u64(path, i + 2, &rec[0])?, parse_u64(path, i + 2, &rec[1])?));
    }
    Ok(GroundTruth::from_pairs(pairs))
}

pub fn truth_to_csv(truth: &GroundTruth) -> String {
    let mut out = String::from("probe_id,gallery_id\n");
    for (p, g) in truth.pairs() {
        out.push_str(&format!("{p},{g}\n"));
    }
    out
}

fn read_number_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = read_bytes(path)?;
    let mut rdr = csv_reader(&bytes, false);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        rows.push(
            rec.iter()
                .map(|f| parse_f64(path, i + 1, f))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(rows)
}

pub fn read_mahalanobis(path: &Path) -> Result<DistanceMetric> {
    let rows = read_number_rows(path)?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::format(path, "mahalanobis matrix must be square"));
    }
    Ok(DistanceMetric::mahalanobis(d, rows.into_iter().flatten().collect())?)
}

pub fn read_precomputed(path: &Path) -> Result<DistanceMetric> {
    let bytes = read_bytes(path)?;
    let mut rdr = csv_reader(&bytes, true);
    let header = rdr
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    if header.get(0) != Some("id") {
        return Err(CliError::format(path, "expected header `id,<column ids...>`"));
    }
    let col_ids = header
        .iter()
        .skip(1)
        .map(|f| parse_u64(path, 1, f))
        .collect::<Result<Vec<_>>>()?;
    let mut row_ids = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::format(path, e.to_string()))?;
        if rec.len() != col_ids.len() + 1 {
            return Err(CliError::format(path, format!("line {line}: wrong number of fields")));
        }
        row_ids.push(parse_u64(path, line, &rec[0])?);
        for f in rec.iter().skip(1) {
            data.push(parse_f64(path, line, f)?);
        }
    }
    let matrix = DistanceMatrix::new(row_ids.len(), col_ids.len(), data)?;
    Ok(DistanceMetric::Precomputed(PrecomputedDistances::with_ids(
        matrix, row_ids, col_ids,
    )?))
}

/// `probe_id,rank,gallery_id,score_or_distance,method`
pub fn rankings_to_csv(lists: &[RankedList], method: &str) -> String {
    let mut out = String::from("probe_id,rank,gallery_id,score_or_distance,method\n");
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                list.probe_id,
                i + 1,
                e.gallery_id,
                e.value,
                method
            ));
        }
    }
    out
}
