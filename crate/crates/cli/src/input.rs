//! File formats: matrix JSON, counts CSV, settings CSV and X-parameter JSON.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use entangle_core::tomography::standard_settings_16;
use entangle_core::{
    CoincidenceRecord, Complex, ComplexMatrix, MeasurementSetting, Projector, XStateParams,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

/// Basis labels every matrix file must declare, in order.
pub const BASIS: [&str; 4] = ["HH", "HV", "VH", "VV"];

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Matrix(ComplexMatrix),
    Counts(Vec<CoincidenceRecord>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Matrix,
    Counts,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputDocument {
    pub id: String,
    pub payload: Payload,
    pub metadata: BTreeMap<String, String>,
}

impl InputDocument {
    pub fn kind(&self) -> InputKind {
        match self.payload {
            Payload::Matrix(_) => InputKind::Matrix,
            Payload::Counts(_) => InputKind::Counts,
        }
    }
}

/// Reads `path`, or stdin when `path` is `None` or `-`.
pub fn read_source(path: Option<&Path>) -> Result<(String, String)> {
    match path {
        Some(p) if p != Path::new("-") => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string());
            Ok((id, text))
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdin>"),
                    source,
                })?;
            Ok(("stdin".to_string(), text))
        }
    }
}

pub fn parse_matrix_file(path: &Path) -> Result<InputDocument> {
    let (id, text) = read_source(Some(path))?;
    parse_matrix_str(&id, &text)
}

pub fn parse_counts_file(path: &Path) -> Result<InputDocument> {
    let (id, text) = read_source(Some(path))?;
    parse_counts_str(&id, &text)
}

/// Matrix JSON when the text starts with `{`, counts CSV otherwise.
pub fn parse_input_str(id: &str, text: &str) -> Result<InputDocument> {
    if text.trim_start().starts_with('{') {
        parse_matrix_str(id, text)
    } else {
        parse_counts_str(id, text)
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        // serde_json rejects NaN/Infinity tokens and overflowing literals as
        // syntax errors; report those as what they are.
        let msg = e.to_string();
        if msg.contains("out of range")
            || ["NaN", "Infinity", "inf"].iter().any(|t| text.contains(t))
        {
            CliError::NonFiniteEntry { row: 0, col: 0 }
        } else {
            CliError::MalformedJson(msg)
        }
    })
}

pub fn parse_matrix_str(id: &str, text: &str) -> Result<InputDocument> {
    let value = parse_json(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::MalformedJson("top level must be an object".into()))?;

    let basis = obj
        .get("basis")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::MalformedJson("missing \"basis\" array".into()))?;
    let labels: Vec<Option<&str>> = basis.iter().map(Value::as_str).collect();
    if labels != BASIS.map(Some) {
        return Err(CliError::WrongShape(format!(
            "basis must be {BASIS:?}, got {}",
            Value::Array(basis.clone())
        )));
    }

    let rows = obj
        .get("matrix")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::MalformedJson("missing \"matrix\" array".into()))?;
    if rows.len() != 4 {
        return Err(CliError::WrongShape(format!(
            "expected 4 rows, got {}",
            rows.len()
        )));
    }
    let mut entries = Vec::with_capacity(4);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| CliError::WrongShape(format!("row {i} is not an array")))?;
        if row.len() != 4 {
            return Err(CliError::WrongShape(format!(
                "row {i} has {} entries, expected 4",
                row.len()
            )));
        }
        let mut parsed = Vec::with_capacity(4);
        for (j, entry) in row.iter().enumerate() {
            parsed.push(parse_entry(entry, i, j)?);
        }
        entries.push(parsed);
    }

    let mut metadata = BTreeMap::new();
    if let Some(meta) = obj.get("metadata") {
        let meta = meta
            .as_object()
            .ok_or_else(|| CliError::MalformedJson("\"metadata\" must be an object".into()))?;
        for (k, v) in meta {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            metadata.insert(k.clone(), v);
        }
    }
    let id = metadata
        .get("id")
        .cloned()
        .unwrap_or_else(|| id.to_string());
    let matrix = ComplexMatrix::from_rows(&entries)?;
    Ok(InputDocument {
        id,
        payload: Payload::Matrix(matrix),
        metadata,
    })
}

fn parse_entry(entry: &Value, row: usize, col: usize) -> Result<Complex> {
    let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
        CliError::WrongShape(format!("entry ({row}, {col}) must be a [re, im] pair"))
    })?;
    let mut parts = [0.0; 2];
    for (k, v) in pair.iter().enumerate() {
        parts[k] = match v {
            Value::Number(n) => n.as_f64().ok_or(CliError::NonFiniteEntry { row, col })?,
            Value::String(s) => match s.trim().parse::<f64>() {
                Ok(x) if !x.is_finite() => return Err(CliError::NonFiniteEntry { row, col }),
                _ => {
                    return Err(CliError::MalformedJson(format!(
                        "entry ({row}, {col}) has non-numeric component {s:?}"
                    )))
                }
            },
            _ => {
                return Err(CliError::MalformedJson(format!(
                    "entry ({row}, {col}) has non-numeric component"
                )))
            }
        };
    }
    if !parts.iter().all(|x| x.is_finite()) {
        return Err(CliError::NonFiniteEntry { row, col });
    }
    Ok(Complex::new(parts[0], parts[1]))
}

#[derive(Serialize)]
struct MatrixFile<'a> {
    basis: [&'a str; 4],
    matrix: Vec<Vec<[f64; 2]>>,
}

/// Serializes a 4×4 matrix in the matrix JSON format.
pub fn matrix_to_json(m: &ComplexMatrix, pretty: bool) -> String {
    let file = MatrixFile {
        basis: BASIS,
        matrix: (0..m.dim())
            .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    to_json(&file, pretty)
}

pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let out = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    out.expect("report types serialize without error")
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<usize> {
    let header = reader
        .headers()
        .map_err(|e| CliError::MalformedCsv(e.to_string()))?
        .clone();
    let got: Vec<&str> = header.iter().collect();
    let with_tag: Vec<&str> = expected.iter().copied().chain(["duration_tag"]).collect();
    if got == expected || (expected.len() == 3 && got == with_tag) {
        Ok(got.len())
    } else {
        Err(CliError::MalformedCsv(format!(
            "header must be {:?}, got {got:?}",
            expected.join(",")
        )))
    }
}

fn parse_label(s: &str, line: u64) -> Result<Projector> {
    s.parse().map_err(|_| CliError::UnknownLabel {
        line,
        label: s.to_string(),
    })
}

/// Counts CSV: header `first,second,count` (optionally `,duration_tag`).
pub fn parse_counts_str(id: &str, text: &str) -> Result<InputDocument> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, &["first", "second", "count"])?;
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::MalformedCsv(e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let setting =
            MeasurementSetting::new(parse_label(&row[0], line)?, parse_label(&row[1], line)?);
        let raw = &row[2];
        let count: u64 = match raw.parse::<u64>() {
            Ok(c) => c,
            Err(_) if raw.parse::<i64>().is_ok() || raw.parse::<f64>().is_ok_and(|x| x < 0.0) => {
                return Err(CliError::NegativeCount {
                    line,
                    value: raw.to_string(),
                })
            }
            Err(_) => {
                return Err(CliError::MalformedCsv(format!(
                    "line {line}: count {raw:?} is not a nonnegative integer"
                )))
            }
        };
        if !seen.insert(setting) {
            return Err(CliError::DuplicateSetting { line, setting });
        }
        let duration_tag = row.get(3).filter(|s| !s.is_empty()).map(str::to_string);
        records.push(CoincidenceRecord {
            setting,
            count,
            duration_tag,
        });
    }
    Ok(InputDocument {
        id: id.to_string(),
        payload: Payload::Counts(records),
        metadata: BTreeMap::new(),
    })
}

pub fn counts_to_csv(records: &[CoincidenceRecord]) -> String {
    let mut out = String::from("first,second,count\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{}\n",
            r.setting.first, r.setting.second, r.count
        ));
    }
    out
}

/// Settings CSV: header `first,second`, one setting per row.
pub fn parse_settings_str(text: &str) -> Result<Vec<MeasurementSetting>> {
    let mut reader = csv_reader(text);
    check_header(&mut reader, &["first", "second"])?;
    let mut seen = HashSet::new();
    let mut settings = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::MalformedCsv(e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let setting =
            MeasurementSetting::new(parse_label(&row[0], line)?, parse_label(&row[1], line)?);
        if !seen.insert(setting) {
            return Err(CliError::DuplicateSetting { line, setting });
        }
        settings.push(setting);
    }
    Ok(settings)
}

/// `standard16` or a path to a settings CSV.
pub fn resolve_settings(spec: &str) -> Result<Vec<MeasurementSetting>> {
    if spec == "standard16" {
        return Ok(standard_settings_16());
    }
    let (_, text) = read_source(Some(Path::new(spec)))?;
    parse_settings_str(&text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    alpha: f64,
    beta: f64,
    beta_prime: f64,
    gamma: f64,
    alpha_prime: f64,
}

/// X-parameter JSON: `{"alpha", "beta", "beta_prime", "gamma", "alpha_prime"}`.
pub fn parse_params_str(text: &str) -> Result<XStateParams> {
    let value = parse_json(text)?;
    let p: ParamsFile =
        serde_json::from_value(value).map_err(|e| CliError::MalformedJson(e.to_string()))?;
    let params = XStateParams::new(p.alpha, p.beta, p.beta_prime, p.gamma, p.alpha_prime);
    params.validate()?;
    Ok(params)
}
