//! Prediction logs: the record model, CSV reading/writing, metadata joins and
//! the location/class consistency diagnostic.
//!
//! A log is UTF-8 comma-separated text with a header row:
//!
//! ```text
//! sample_id,model_id,seed,true_label,predicted_label[,city,location,device,...]
//! ```
//!
//! Factor columns are matched by name against the schema. A factor missing
//! from the log may be supplied by a metadata table keyed by `sample_id`, or
//! parsed out of the `sample_id` itself when the schema declares a filename
//! pattern. Columns that are neither required nor declared factors are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::schema::{parse_filename, CorpusSchema, LOCATION};

pub const REQUIRED_COLUMNS: [&str; 5] =
    ["sample_id", "model_id", "seed", "true_label", "predicted_label"];

/// One evaluated sample for one (model, seed) run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub model_id: String,
    pub seed: u64,
    pub true_label: String,
    pub predicted_label: String,
    pub factors: BTreeMap<String, String>,
}

impl PredictionRecord {
    pub fn factor(&self, name: &str) -> Option<&str> {
        self.factors.get(name).map(String::as_str)
    }

    pub fn is_correct(&self) -> bool {
        self.true_label == self.predicted_label
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LoadErrorKind {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("expected {expected} columns, found {found}")]
    ColumnCount { expected: usize, found: usize },
    #[error("empty value in column `{0}`")]
    EmptyValue(String),
    #[error("seed `{0}` is not a non-negative integer")]
    BadSeed(String),
    #[error("unknown class `{class}` in column `{column}`")]
    UnknownClass { column: String, class: String },
    #[error("unknown level `{level}` for factor `{factor}`")]
    UnknownLevel { factor: String, level: String },
    #[error("duplicate record (sample `{sample_id}`, model `{model_id}`, seed {seed})")]
    DuplicateRecord {
        sample_id: String,
        model_id: String,
        seed: u64,
    },
    #[error("no metadata row for sample `{0}`")]
    MissingMetadata(String),
    #[error("duplicate metadata row for sample `{0}`")]
    DuplicateMetadata(String),
    #[error("{0}")]
    Filename(String),
    #[error("file has no header row")]
    NoHeader,
    #[error("{0}")]
    Csv(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// A load failure, positioned at a 1-based line of the input (the header is line 1).
#[derive(Debug, Error, PartialEq)]
#[error("{}{kind}", .line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct LoadError {
    pub line: Option<usize>,
    pub kind: LoadErrorKind,
}

impl LoadError {
    fn at(line: usize, kind: LoadErrorKind) -> Self {
        LoadError {
            line: Some(line),
            kind,
        }
    }

    fn global(kind: LoadErrorKind) -> Self {
        LoadError { line: None, kind }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> LoadError {
    LoadError::global(LoadErrorKind::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn csv_error(e: csv::Error) -> LoadError {
    let line = e.position().map(|p| p.line() as usize);
    let kind = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => LoadErrorKind::ColumnCount {
            expected: *expected_len as usize,
            found: *len as usize,
        },
        _ => LoadErrorKind::Csv(e.to_string()),
    };
    LoadError { line, kind }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes())
}

fn read_header(rdr: &mut csv::Reader<&[u8]>) -> Result<Vec<String>, LoadError> {
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(LoadError::global(LoadErrorKind::NoHeader));
    }
    let cols: Vec<String> = header.iter().map(|c| c.trim().to_string()).collect();
    let mut seen = HashSet::new();
    for c in &cols {
        if !seen.insert(c.as_str()) {
            return Err(LoadError::at(1, LoadErrorKind::DuplicateColumn(c.clone())));
        }
    }
    Ok(cols)
}

/// Factor values keyed by `sample_id`, joined onto a prediction log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetadataTable {
    rows: HashMap<String, BTreeMap<String, String>>,
}

impl MetadataTable {
    /// Parses `sample_id,<factor>,...`; only columns naming declared factors are kept.
    pub fn parse(text: &str, schema: &CorpusSchema) -> Result<Self, LoadError> {
        let mut rdr = reader(text);
        let cols = read_header(&mut rdr)?;
        let id_col = cols.iter().position(|c| c == "sample_id").ok_or_else(|| {
            LoadError::at(1, LoadErrorKind::MissingColumn("sample_id".into()))
        })?;
        let factor_cols: Vec<(usize, &str)> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| schema.factor(c).is_some())
            .map(|(i, c)| (i, c.as_str()))
            .collect();
        let mut rows = HashMap::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i + 2;
            let row = row.map_err(csv_error)?;
            let id = row[id_col].to_string();
            if id.is_empty() {
                return Err(LoadError::at(line, LoadErrorKind::EmptyValue("sample_id".into())));
            }
            let values = factor_cols
                .iter()
                .map(|&(c, name)| (name.to_string(), row[c].to_string()))
                .collect();
            if rows.insert(id.clone(), values).is_some() {
                return Err(LoadError::at(line, LoadErrorKind::DuplicateMetadata(id)));
            }
        }
        Ok(MetadataTable { rows })
    }

    pub fn load(path: impl AsRef<Path>, schema: &CorpusSchema) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::parse(&text, schema)
    }

    pub fn get(&self, sample_id: &str) -> Option<&BTreeMap<String, String>> {
        self.rows.get(sample_id)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

enum FactorSource {
    Column(usize),
    Metadata,
    Filename,
}

/// Parses a prediction log held in memory. Record `i` corresponds to data row `i`.
pub fn parse_predictions(
    text: &str,
    schema: &CorpusSchema,
    metadata: Option<&MetadataTable>,
) -> Result<Vec<PredictionRecord>, LoadError> {
    let mut rdr = reader(text);
    let cols = read_header(&mut rdr)?;
    let col = |name: &str| cols.iter().position(|c| c == name);
    let mut required = [0usize; 5];
    for (slot, name) in required.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = col(name)
            .ok_or_else(|| LoadError::at(1, LoadErrorKind::MissingColumn(name.into())))?;
    }
    let [id_col, model_col, seed_col, true_col, pred_col] = required;

    let mut sources = Vec::with_capacity(schema.factors.len());
    for f in &schema.factors {
        let source = if let Some(c) = col(&f.name) {
            FactorSource::Column(c)
        } else if metadata.is_some() {
            FactorSource::Metadata
        } else if schema
            .filename
            .as_ref()
            .is_some_and(|p| p.fields.contains(&f.name))
        {
            FactorSource::Filename
        } else {
            return Err(LoadError::at(1, LoadErrorKind::MissingColumn(f.name.clone())));
        };
        sources.push(source);
    }

    let mut records = Vec::new();
    let mut keys = HashSet::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(csv_error)?;
        let err = |kind| LoadError::at(line, kind);
        for &c in &required {
            if row[c].is_empty() {
                return Err(err(LoadErrorKind::EmptyValue(cols[c].clone())));
            }
        }
        let sample_id = row[id_col].to_string();
        let seed: u64 = row[seed_col]
            .parse()
            .map_err(|_| err(LoadErrorKind::BadSeed(row[seed_col].to_string())))?;
        for c in [true_col, pred_col] {
            if !schema.has_class(&row[c]) {
                return Err(err(LoadErrorKind::UnknownClass {
                    column: cols[c].clone(),
                    class: row[c].to_string(),
                }));
            }
        }

        let mut parsed_name = None;
        let mut factors = BTreeMap::new();
        for (f, source) in schema.factors.iter().zip(&sources) {
            let level = match source {
                FactorSource::Column(c) => row[*c].to_string(),
                FactorSource::Metadata => {
                    let meta = metadata
                        .and_then(|m| m.get(&sample_id))
                        .ok_or_else(|| err(LoadErrorKind::MissingMetadata(sample_id.clone())))?;
                    meta.get(&f.name)
                        .cloned()
                        .ok_or_else(|| err(LoadErrorKind::MissingColumn(f.name.clone())))?
                }
                FactorSource::Filename => {
                    if parsed_name.is_none() {
                        let pattern = schema.filename.as_ref().expect("pattern checked above");
                        let fields = parse_filename(&sample_id, pattern)
                            .map_err(|e| err(LoadErrorKind::Filename(e.to_string())))?;
                        parsed_name = Some(fields);
                    }
                    parsed_name.as_ref().unwrap()[&f.name].clone()
                }
            };
            if f.level_index(&level).is_none() {
                return Err(err(LoadErrorKind::UnknownLevel {
                    factor: f.name.clone(),
                    level,
                }));
            }
            factors.insert(f.name.clone(), level);
        }

        let model_id = row[model_col].to_string();
        if !keys.insert((sample_id.clone(), model_id.clone(), seed)) {
            return Err(err(LoadErrorKind::DuplicateRecord {
                sample_id,
                model_id,
                seed,
            }));
        }
        records.push(PredictionRecord {
            sample_id,
            model_id,
            seed,
            true_label: row[true_col].to_string(),
            predicted_label: row[pred_col].to_string(),
            factors,
        });
    }
    Ok(records)
}

/// Reads and validates a prediction log file.
pub fn load_predictions(
    path: impl AsRef<Path>,
    schema: &CorpusSchema,
    metadata: Option<&MetadataTable>,
) -> Result<Vec<PredictionRecord>, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_predictions(&text, schema, metadata)
}

/// Serializes records in the log format, factor columns in schema order.
pub fn write_predictions(records: &[PredictionRecord], schema: &CorpusSchema) -> String {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    header.extend(schema.factors.iter().map(|f| f.name.as_str()));
    wtr.write_record(&header).expect("write to Vec");
    for r in records {
        let seed = r.seed.to_string();
        let mut row: Vec<&str> = vec![
            &r.sample_id,
            &r.model_id,
            &seed,
            &r.true_label,
            &r.predicted_label,
        ];
        row.extend(
            schema
                .factors
                .iter()
                .map(|f| r.factor(&f.name).unwrap_or_default()),
        );
        wtr.write_record(&row).expect("write to Vec");
    }
    String::from_utf8(wtr.into_inner().expect("flush Vec")).expect("input strings are UTF-8")
}

/// Model ids in order of first appearance.
pub fn model_ids(records: &[PredictionRecord]) -> Vec<String> {
    let mut seen = HashSet::new();
    records
        .iter()
        .filter(|r| seen.insert(r.model_id.as_str()))
        .map(|r| r.model_id.clone())
        .collect()
}

/// Sorted distinct seeds logged for a model.
pub fn seeds_of(records: &[PredictionRecord], model: &str) -> Vec<u64> {
    records
        .iter()
        .filter(|r| r.model_id == model)
        .map(|r| r.seed)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocationReport {
    /// Locations with at least one record whose true label disagrees with the map.
    pub inconsistent: BTreeSet<String>,
    pub distinct_locations: usize,
}

impl LocationReport {
    pub fn is_consistent(&self) -> bool {
        self.inconsistent.is_empty()
    }
}

/// Checks that every record's true label matches its location's mapped class.
pub fn validate_location_consistency(
    records: &[PredictionRecord],
    schema: &CorpusSchema,
) -> LocationReport {
    let mut seen = BTreeSet::new();
    let mut inconsistent = BTreeSet::new();
    for r in records {
        let Some(loc) = r.factor(LOCATION) else {
            continue;
        };
        seen.insert(loc);
        if schema.location_class(loc) != Some(r.true_label.as_str()) {
            inconsistent.insert(loc.to_string());
        }
    }
    LocationReport {
        inconsistent,
        distinct_locations: seen.len(),
    }
}
