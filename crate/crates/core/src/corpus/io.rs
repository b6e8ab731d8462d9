//! Table ingestion (CSV / JSONL) and the canonical JSONL dataset dump.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CorpusError, Dataset, LabelSchema, TextRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Jsonl,
}

impl TableFormat {
    /// Guess from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Self::Csv),
            "jsonl" | "ndjson" => Some(Self::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingTextPolicy {
    #[default]
    Reject,
    Skip,
}

/// Keep only rows whose `column` value is one of `keep`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFilter {
    pub column: String,
    pub keep: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub format: TableFormat,
    pub text_column: String,
    pub label_column: String,
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub group_column: Option<String>,
    #[serde(default)]
    pub filter: Option<RowFilter>,
    #[serde(default)]
    pub missing_text: MissingTextPolicy,
}

impl LoadOptions {
    pub fn new(format: TableFormat, text_column: &str, label_column: &str) -> Self {
        Self {
            format,
            text_column: text_column.to_owned(),
            label_column: label_column.to_owned(),
            id_column: None,
            group_column: None,
            filter: None,
            missing_text: MissingTextPolicy::Reject,
        }
    }
}

/// One parsed row before label resolution. Values are stringified.
struct RawRow {
    row: usize,
    id: Option<String>,
    text: Option<String>,
    label: Option<String>,
    group: Option<String>,
    filter_value: Option<String>,
}

/// Load a labeled table from disk.
///
/// When `schema` is `None` it is inferred from the distinct raw label values,
/// sorted; this is the usual first step before [`super::map_labels`].
pub fn load_table(path: &Path, opts: &LoadOptions, schema: Option<&LabelSchema>) -> Result<Dataset, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut ds = read_table(BufReader::new(file), opts, schema)?;
    ds.provenance = path.display().to_string();
    Ok(ds)
}

pub fn read_table<R: Read>(
    reader: R,
    opts: &LoadOptions,
    schema: Option<&LabelSchema>,
) -> Result<Dataset, CorpusError> {
    let rows = match opts.format {
        TableFormat::Csv => read_csv_rows(reader, opts)?,
        TableFormat::Jsonl => read_jsonl_rows(reader, opts)?,
    };
    if rows.is_empty() {
        return Err(CorpusError::EmptyFile);
    }

    let rows: Vec<RawRow> = match &opts.filter {
        Some(f) => rows
            .into_iter()
            .filter(|r| r.filter_value.as_deref().is_some_and(|v| f.keep.iter().any(|k| k == v)))
            .collect(),
        None => rows,
    };

    let inferred;
    let schema = match schema {
        Some(s) => s,
        None => {
            let mut names = BTreeSet::new();
            for r in &rows {
                match r.label.as_deref() {
                    Some(l) if !l.is_empty() => {
                        names.insert(l.to_owned());
                    }
                    _ => {
                        return Err(CorpusError::UnparsableLabel {
                            row: r.row,
                            value: None,
                        })
                    }
                }
            }
            inferred = LabelSchema::new(names)?;
            &inferred
        }
    };

    let mut records = Vec::with_capacity(rows.len());
    for r in rows {
        let text = match r.text.filter(|t| !t.trim().is_empty()) {
            Some(t) => t,
            None => match opts.missing_text {
                MissingTextPolicy::Reject => return Err(CorpusError::MissingText { row: r.row }),
                MissingTextPolicy::Skip => continue,
            },
        };
        let label = resolve_label(schema, r.label.as_deref()).ok_or(CorpusError::UnparsableLabel {
            row: r.row,
            value: r.label.clone(),
        })?;
        records.push(TextRecord {
            record_id: r.id.unwrap_or_else(|| r.row.to_string()),
            text,
            label: Some(label),
            group_key: r.group,
            weight: None,
        });
    }
    Dataset::new(schema.clone(), records, String::new())
}

/// Schema name first, then a bare integer id.
fn resolve_label(schema: &LabelSchema, raw: Option<&str>) -> Option<usize> {
    let raw = raw?.trim();
    if raw.is_empty() {
        return None;
    }
    schema
        .id_of(raw)
        .or_else(|| raw.parse::<usize>().ok().filter(|&id| schema.contains_id(id)))
}

fn read_csv_rows<R: Read>(reader: R, opts: &LoadOptions) -> Result<Vec<RawRow>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let col = |name: &str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CorpusError::MissingColumn(name.to_owned()))
    };
    let text_idx = col(&opts.text_column)?;
    let label_idx = col(&opts.label_column)?;
    let id_idx = opts.id_column.as_deref().map(col).transpose()?;
    let group_idx = opts.group_column.as_deref().map(col).transpose()?;
    let filter_idx = opts.filter.as_ref().map(|f| col(&f.column)).transpose()?;

    let mut rows = Vec::new();
    for (row, result) in rdr.records().enumerate() {
        let rec = result.map_err(csv_error)?;
        let get = |idx: Option<usize>| idx.and_then(|i| rec.get(i)).map(str::to_owned);
        rows.push(RawRow {
            row,
            id: get(id_idx).filter(|s| !s.is_empty()),
            text: get(Some(text_idx)),
            label: get(Some(label_idx)),
            group: get(group_idx).filter(|s| !s.is_empty()),
            filter_value: get(filter_idx),
        });
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> CorpusError {
    match e.kind() {
        csv::ErrorKind::Utf8 { pos, .. } => CorpusError::Encoding {
            row: pos.as_ref().map(|p| p.record() as usize),
        },
        _ => CorpusError::Parse(e.to_string()),
    }
}

fn value_to_string(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        other => Some(other.to_string()),
    }
}

fn read_jsonl_rows<R: Read>(mut reader: R, opts: &LoadOptions) -> Result<Vec<RawRow>, CorpusError> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| CorpusError::Parse(e.to_string()))?;
    let content = std::str::from_utf8(&bytes).map_err(|_| CorpusError::Encoding { row: None })?;

    let mut rows = Vec::new();
    for line in content.lines().filter(|l| !l.trim().is_empty()) {
        let row = rows.len();
        let obj: serde_json::Map<String, Value> =
            serde_json::from_str(line).map_err(|e| CorpusError::Parse(format!("row {row}: {e}")))?;
        if row == 0 && !obj.contains_key(&opts.text_column) {
            return Err(CorpusError::MissingColumn(opts.text_column.clone()));
        }
        let get = |name: Option<&String>| name.and_then(|n| obj.get(n)).and_then(value_to_string);
        rows.push(RawRow {
            row,
            id: get(opts.id_column.as_ref()).filter(|s| !s.is_empty()),
            text: get(Some(&opts.text_column)),
            label: get(Some(&opts.label_column)),
            group: get(opts.group_column.as_ref()).filter(|s| !s.is_empty()),
            filter_value: get(opts.filter.as_ref().map(|f| &f.column)),
        });
    }
    Ok(rows)
}

/// Line format of the canonical dataset dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct CanonicalRecord {
    record_id: String,
    text: String,
    label: Option<String>,
    group_key: Option<String>,
    weight: Option<u32>,
}

impl CanonicalRecord {
    pub(crate) fn from_record(rec: &TextRecord, schema: &LabelSchema) -> Self {
        Self {
            record_id: rec.record_id.clone(),
            text: rec.text.clone(),
            label: rec.label.and_then(|l| schema.name_of(l)).map(str::to_owned),
            group_key: rec.group_key.clone(),
            weight: rec.weight,
        }
    }
}

pub fn write_dataset_jsonl<W: Write>(ds: &Dataset, writer: W) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(writer);
    for rec in &ds.records {
        let line = CanonicalRecord::from_record(rec, &ds.schema);
        serde_json::to_writer(&mut w, &line).map_err(|e| CorpusError::Parse(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| CorpusError::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| CorpusError::Parse(e.to_string()))
}

/// Parse a canonical dump. Labels must be schema names or null.
pub fn read_dataset_jsonl<R: Read>(reader: R, schema: &LabelSchema) -> Result<Dataset, CorpusError> {
    let mut records = Vec::new();
    for (row, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => CorpusError::Encoding { row: Some(row) },
            _ => CorpusError::Parse(e.to_string()),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let c: CanonicalRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse(format!("row {row}: {e}")))?;
        let label = match c.label {
            Some(name) => Some(
                schema
                    .id_of(&name)
                    .ok_or(CorpusError::UnparsableLabel { row, value: Some(name) })?,
            ),
            None => None,
        };
        records.push(TextRecord {
            record_id: c.record_id,
            text: c.text,
            label,
            group_key: c.group_key,
            weight: c.weight,
        });
    }
    Dataset::new(schema.clone(), records, String::new())
}

#[derive(Serialize, Deserialize)]
struct DumpHeader {
    schema: LabelSchema,
    provenance: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".schema.json");
    PathBuf::from(name)
}

/// Write `path` (canonical JSONL) plus a `<path>.schema.json` sidecar.
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_dataset_jsonl(ds, file)?;
    let header = DumpHeader {
        schema: ds.schema.clone(),
        provenance: ds.provenance.clone(),
    };
    let side = sidecar(path);
    let json = serde_json::to_vec_pretty(&header).map_err(|e| CorpusError::Parse(e.to_string()))?;
    std::fs::write(&side, json).map_err(|e| CorpusError::io(&side, e))
}

pub fn open_dataset(path: &Path) -> Result<Dataset, CorpusError> {
    let side = sidecar(path);
    let header: DumpHeader = serde_json::from_slice(&std::fs::read(&side).map_err(|e| CorpusError::io(&side, e))?)
        .map_err(|e| CorpusError::Parse(format!("{}: {e}", side.display())))?;
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut ds = read_dataset_jsonl(file, &header.schema)?;
    ds.provenance = header.provenance;
    Ok(ds)
}
