//! File formats: JSON documents, per-table CSV and operator triplets.
//!
//! CSV uses `.` as decimal separator, no grouping and LF line endings.
//! Every writer has a loader that reads its output back.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use semidec_core::approx::{RationalEntry, RationalMatrixFunction};
use semidec_core::discrete::BandedOperator;
use semidec_core::harness::{StudyResult, Table};
use semidec_core::spectral::SpectralFunction;

use crate::error::{CliError, CliResult};

/// `{example}_{study}_{stamp}.{ext}` with characters outside `[A-Za-z0-9.-]`
/// in the parts replaced by `-`.
pub fn output_name(example: &str, study: &str, stamp: &str, ext: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                    c
                } else {
                    '-'
                }
            })
            .collect()
    };
    format!("{}_{}_{}.{ext}", clean(example), clean(study), clean(stamp))
}

/// Shortest text that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

/// Rational function as `{shape, entries: [{num, den}]}`.
pub fn read_rational(path: &Path) -> CliResult<RationalMatrixFunction> {
    let raw: RationalMatrixFunction = read_json(path)?;
    let entries = raw
        .entries
        .into_iter()
        .map(|e| RationalEntry::new(e.num, e.den))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::format(path, e))?;
    RationalMatrixFunction::new(raw.shape[0], raw.shape[1], entries)
        .map_err(|e| CliError::format(path, e))
}

pub fn read_spectral(path: &Path) -> CliResult<SpectralFunction> {
    let f: SpectralFunction = read_json(path)?;
    if f.coeffs.len() != f.rows * f.cols || f.coeffs.iter().any(Vec::is_empty) {
        return Err(CliError::format(
            path,
            "coefficient vectors do not match the shape",
        ));
    }
    Ok(f)
}

/// One table with a trailing `example` column.
pub fn write_table_csv(path: &Path, table: &Table, example: &str) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::format(path, e))?;
    let mut header: Vec<&str> = table.columns.iter().map(String::as_str).collect();
    header.push("example");
    w.write_record(&header)
        .map_err(|e| CliError::format(path, e))?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        rec.push(example.to_string());
        w.write_record(&rec)
            .map_err(|e| CliError::format(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Inverse of [`write_table_csv`]; the table takes its name from `name`.
pub fn read_table_csv(path: &Path, name: &str) -> CliResult<(Table, String)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::format(path, e))?
        .iter()
        .map(String::from)
        .collect();
    if header.last().map(String::as_str) != Some("example") {
        return Err(CliError::format(path, "last column must be 'example'"));
    }
    let cols: Vec<&str> = header[..header.len() - 1]
        .iter()
        .map(String::as_str)
        .collect();
    let mut table = Table::new(name, &cols);
    let mut example = String::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        let row = cols
            .iter()
            .enumerate()
            .map(|(k, _)| {
                rec[k].parse::<f64>().map_err(|_| {
                    CliError::format(path, format!("row {}: bad number '{}'", i + 2, &rec[k]))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        example = rec[cols.len()].to_string();
        table.push(row);
    }
    Ok((table, example))
}

/// Writes the full result as JSON plus one CSV per table, returning the paths.
///
/// A single table is named after the study; several get `{study}-{table}`.
pub fn write_study(dir: &Path, res: &StudyResult, stamp: &str) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths = Vec::with_capacity(res.tables.len() + 1);
    let json = dir.join(output_name(&res.example, &res.study, stamp, "json"));
    write_json(&json, res)?;
    paths.push(json);
    for t in &res.tables {
        let study = if res.tables.len() == 1 {
            res.study.clone()
        } else {
            format!("{}-{}", res.study, t.name)
        };
        let csv = dir.join(output_name(&res.example, &study, stamp, "csv"));
        write_table_csv(&csv, t, &res.example)?;
        paths.push(csv);
    }
    Ok(paths)
}

pub fn read_study(path: &Path) -> CliResult<StudyResult> {
    read_json(path)
}

/// `n` on the first line, then one `row col value` line per stored entry (0-based).
pub fn write_triplets(path: &Path, op: &BandedOperator) -> CliResult<()> {
    let mut text = format!("{}\n", op.dim());
    for (i, j, v) in op.triplets() {
        text.push_str(&format!("{i} {j} {}\n", format_f64(v)));
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_triplets(path: &Path) -> CliResult<(usize, Vec<(usize, usize, f64)>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let n = lines
        .next()
        .and_then(|l| l.trim().parse::<usize>().ok())
        .ok_or_else(|| CliError::format(path, "first line must hold the dimension"))?;
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || CliError::format(path, format!("line {}: expected 'row col value'", k + 2));
        let mut it = line.split_whitespace();
        let i: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let j: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if i >= n || j >= n || it.next().is_some() {
            return Err(bad());
        }
        out.push((i, j, v));
    }
    Ok((n, out))
}
