use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ID_COLUMN: &str = "sample_id";

/// One metadata cell. Missing cells are simply absent from the feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(String),
}

impl FeatureValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            FeatureValue::Numeric(v) => Some(*v),
            FeatureValue::Categorical(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            FeatureValue::Categorical(s) => Some(s),
            FeatureValue::Numeric(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical,
    Numeric,
}

/// Narrative grouping of a feature; carried through but never used in scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureTag {
    Intrinsic,
    Extrinsic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<FeatureTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub features: BTreeMap<String, FeatureValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl SampleRecord {
    pub fn feature(&self, name: &str) -> Option<&FeatureValue> {
        self.features.get(name)
    }
}

/// Records plus the column schema they were parsed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSet {
    pub columns: Vec<FeatureColumn>,
    pub records: Vec<SampleRecord>,
}

impl RecordSet {
    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.sample_id.as_str())
    }

    /// Parses line-delimited JSON objects, each carrying a `sample_id` string.
    ///
    /// Numbers become numeric values, strings categorical, `null` or `""` missing.
    /// A key holding both numbers and strings is treated as categorical.
    pub fn from_json_lines<R: BufRead>(reader: R) -> Result<Self> {
        let mut raw_rows: Vec<(String, Vec<(String, serde_json::Value)>)> = Vec::new();
        let mut order: Vec<String> = Vec::new();
        let mut seen_ids = HashSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&line)?;
            let id = match obj.get(ID_COLUMN) {
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(_) => {
                    return Err(Error::InvalidValue(format!(
                        "line {}: `sample_id` must be a string",
                        lineno + 1
                    )))
                }
                None => return Err(Error::MissingIdColumn),
            };
            if !seen_ids.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            let mut fields = Vec::new();
            for (k, v) in obj {
                if k == ID_COLUMN {
                    continue;
                }
                if !order.contains(&k) {
                    order.push(k.clone());
                }
                fields.push((k, v));
            }
            raw_rows.push((id, fields));
        }

        let mut numeric: HashMap<String, bool> = order.iter().map(|k| (k.clone(), true)).collect();
        for (_, fields) in &raw_rows {
            for (k, v) in fields {
                match v {
                    serde_json::Value::Null => {}
                    serde_json::Value::String(s) if s.is_empty() => {}
                    serde_json::Value::Number(_) => {}
                    serde_json::Value::String(_) | serde_json::Value::Bool(_) => {
                        numeric.insert(k.clone(), false);
                    }
                    other => {
                        return Err(Error::InvalidValue(format!(
                            "feature `{k}` holds a nested value {other}"
                        )))
                    }
                }
            }
        }

        let columns = order
            .iter()
            .map(|key| {
                let (name, tag) = split_tag(key);
                FeatureColumn {
                    kind: if numeric[key.as_str()] {
                        FeatureKind::Numeric
                    } else {
                        FeatureKind::Categorical
                    },
                    name,
                    tag,
                }
            })
            .collect::<Vec<_>>();

        let mut records = Vec::with_capacity(raw_rows.len());
        for (id, fields) in raw_rows {
            let mut features = BTreeMap::new();
            for (k, v) in fields {
                let is_numeric = numeric[k.as_str()];
                let (name, _) = split_tag(&k);
                let value = match v {
                    serde_json::Value::Null => continue,
                    serde_json::Value::String(s) if s.is_empty() => continue,
                    serde_json::Value::Number(n) if is_numeric => {
                        let x = n.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                            Error::NonFinite(format!("feature `{name}` of `{id}`"))
                        })?;
                        FeatureValue::Numeric(x)
                    }
                    serde_json::Value::Number(n) => FeatureValue::Categorical(n.to_string()),
                    serde_json::Value::String(s) => FeatureValue::Categorical(s),
                    serde_json::Value::Bool(b) => FeatureValue::Categorical(b.to_string()),
                    _ => unreachable!("nested values rejected above"),
                };
                features.insert(name, value);
            }
            records.push(SampleRecord {
                sample_id: id,
                features,
                score: None,
            });
        }
        Ok(Self { columns, records })
    }

    /// Reads a catalog manifest: `.jsonl`/`.ndjson` as JSON lines, anything else as metadata CSV.
    pub fn read_catalog(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = BufReader::new(File::open(path).map_err(super::with_path(path))?);
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Self::from_json_lines(file),
            _ => read_records_from::<_, &[u8]>(file, None),
        }
    }
}

/// Splits an optional `:intrinsic` / `:extrinsic` suffix off a header name.
fn split_tag(header: &str) -> (String, Option<FeatureTag>) {
    if let Some(base) = header.strip_suffix(":intrinsic") {
        (base.to_owned(), Some(FeatureTag::Intrinsic))
    } else if let Some(base) = header.strip_suffix(":extrinsic") {
        (base.to_owned(), Some(FeatureTag::Extrinsic))
    } else {
        (header.to_owned(), None)
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_records(
    metadata_path: impl AsRef<Path>,
    scores_path: Option<&Path>,
) -> Result<RecordSet> {
    let metadata_path = metadata_path.as_ref();
    let meta = BufReader::new(File::open(metadata_path).map_err(super::with_path(metadata_path))?);
    match scores_path {
        Some(p) => read_records_from(
            meta,
            Some(BufReader::new(File::open(p).map_err(super::with_path(p))?)),
        ),
        None => read_records_from::<_, BufReader<File>>(meta, None),
    }
}

/// Parses a metadata CSV and joins an optional `sample_id,f1` score CSV onto it.
pub fn read_records_from<M: Read, S: Read>(metadata: M, scores: Option<S>) -> Result<RecordSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(metadata);
    let headers = rdr.headers()?.clone();
    let id_col = headers
        .iter()
        .position(|h| h == ID_COLUMN)
        .ok_or(Error::MissingIdColumn)?;

    let mut rows = Vec::new();
    for row in rdr.records() {
        rows.push(row?);
    }

    let mut columns = Vec::new();
    for (c, header) in headers.iter().enumerate() {
        if c == id_col {
            continue;
        }
        let numeric = rows
            .iter()
            .map(|r| &r[c])
            .filter(|cell| !cell.is_empty())
            .all(|cell| parse_number(cell).is_some());
        let any = rows.iter().any(|r| !r[c].is_empty());
        let (name, tag) = split_tag(header);
        let kind = if numeric && any {
            FeatureKind::Numeric
        } else {
            FeatureKind::Categorical
        };
        columns.push((c, FeatureColumn { name, kind, tag }));
    }

    let mut index = HashMap::with_capacity(rows.len());
    let mut records = Vec::with_capacity(rows.len());
    for row in &rows {
        let id = row[id_col].to_owned();
        if index.insert(id.clone(), records.len()).is_some() {
            return Err(Error::DuplicateId(id));
        }
        let mut features = BTreeMap::new();
        for (c, col) in &columns {
            let cell = &row[*c];
            if cell.is_empty() {
                continue;
            }
            let value = match col.kind {
                FeatureKind::Numeric => FeatureValue::Numeric(parse_number(cell).expect("checked")),
                FeatureKind::Categorical => FeatureValue::Categorical(cell.to_owned()),
            };
            features.insert(col.name.clone(), value);
        }
        records.push(SampleRecord {
            sample_id: id,
            features,
            score: None,
        });
    }

    if let Some(scores) = scores {
        for (id, score) in read_scores_from(scores)? {
            let slot = index
                .get(&id)
                .ok_or_else(|| Error::UnknownScoreId(id.clone()))?;
            records[*slot].score = Some(score);
        }
    }

    Ok(RecordSet {
        columns: columns.into_iter().map(|(_, c)| c).collect(),
        records,
    })
}

/// Parses a two-column `sample_id,<score>` CSV, validating every score in [0, 1].
pub fn read_scores_from<R: Read>(reader: R) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 {
        return Err(Error::InvalidValue(format!(
            "score file needs exactly two columns, found {}",
            headers.len()
        )));
    }
    let id_col = headers
        .iter()
        .position(|h| h == ID_COLUMN)
        .ok_or(Error::MissingIdColumn)?;
    let score_col = 1 - id_col;

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let id = row[id_col].to_owned();
        let raw = &row[score_col];
        let score: f64 = raw.parse().map_err(|_| {
            Error::InvalidValue(format!("score `{raw}` for `{id}` is not a number"))
        })?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::ScoreOutOfRange { id, score });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        out.push((id, score));
    }
    Ok(out)
}
