//! Corpus schema: class set, stratification factors and the location → class map.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the factor whose levels are recording locations.
pub const LOCATION: &str = "location";
/// Name of the factor whose levels are cities.
pub const CITY: &str = "city";

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("schema declares no classes")]
    NoClasses,
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("duplicate factor `{0}`")]
    DuplicateFactor(String),
    #[error("factor `{0}` has an empty level set")]
    EmptyLevels(String),
    #[error("factor `{factor}` lists level `{level}` twice")]
    DuplicateLevel { factor: String, level: String },
    #[error("location `{0}` has no entry in the location class map")]
    UnmappedLocation(String),
    #[error("location class map names undeclared location `{0}`")]
    UnknownMappedLocation(String),
    #[error("location `{location}` maps to unknown class `{class}`")]
    UnknownMappedClass { location: String, class: String },
    #[error("invalid filename pattern: {0}")]
    Pattern(String),
    #[error("level `{level}` of factor `{factor}` contains the filename delimiter `{delimiter}`")]
    DelimiterInLevel {
        factor: String,
        level: String,
        delimiter: char,
    },
    #[error("cannot read schema {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed schema: {0}")]
    Syntax(String),
}

/// One stratification factor and its ordered level set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Factor {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == level)
    }
}

/// Ordered field layout of a dataset filename, e.g.
/// `airport-barcelona-0-0-a.wav` under the default pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilenamePattern {
    pub fields: Vec<String>,
    pub delimiter: char,
    pub extension: String,
}

impl Default for FilenamePattern {
    fn default() -> Self {
        FilenamePattern {
            fields: ["scene", "city", "location", "segment", "device"]
                .into_iter()
                .map(String::from)
                .collect(),
            delimiter: '-',
            extension: ".wav".to_string(),
        }
    }
}

impl FilenamePattern {
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.fields.is_empty() {
            return Err(SchemaError::Pattern("no fields".into()));
        }
        let mut seen = HashSet::new();
        for f in &self.fields {
            if !seen.insert(f.as_str()) {
                return Err(SchemaError::Pattern(format!("duplicate field `{f}`")));
            }
        }
        Ok(())
    }

    /// Inverse of [`parse_filename`]: joins field values with the delimiter
    /// and appends the extension.
    pub fn join<S: AsRef<str>>(&self, values: &[S]) -> String {
        let mut out = values
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(&self.delimiter.to_string());
        out.push_str(&self.extension);
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse filename `{name}`: {reason}")]
pub struct FilenameError {
    pub name: String,
    pub reason: String,
}

/// Splits a filename into its pattern fields.
pub fn parse_filename(
    name: &str,
    pattern: &FilenamePattern,
) -> Result<BTreeMap<String, String>, FilenameError> {
    let fail = |reason: String| FilenameError {
        name: name.to_string(),
        reason,
    };
    let stem = name
        .strip_suffix(pattern.extension.as_str())
        .ok_or_else(|| fail(format!("missing extension `{}`", pattern.extension)))?;
    let parts: Vec<&str> = stem.split(pattern.delimiter).collect();
    if parts.len() != pattern.fields.len() {
        return Err(fail(format!(
            "expected {} fields, found {}",
            pattern.fields.len(),
            parts.len()
        )));
    }
    let mut out = BTreeMap::new();
    for (field, value) in pattern.fields.iter().zip(parts) {
        if value.is_empty() {
            return Err(fail(format!("field `{field}` is empty")));
        }
        out.insert(field.clone(), value.to_string());
    }
    Ok(out)
}

/// Class set, factor declarations and location → class map of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSchema {
    pub classes: Vec<String>,
    #[serde(default)]
    pub factors: Vec<Factor>,
    #[serde(default, rename = "location_classes")]
    pub location_class_map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filename: Option<FilenamePattern>,
}

impl CorpusSchema {
    /// Builds and validates a schema.
    pub fn new(
        classes: Vec<String>,
        factors: Vec<Factor>,
        location_class_map: BTreeMap<String, String>,
    ) -> Result<Self, SchemaError> {
        let schema = CorpusSchema {
            classes,
            factors,
            location_class_map,
            filename: None,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn with_filename_pattern(mut self, pattern: FilenamePattern) -> Result<Self, SchemaError> {
        self.filename = Some(pattern);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.classes.is_empty() {
            return Err(SchemaError::NoClasses);
        }
        let mut seen = HashSet::new();
        for c in &self.classes {
            if !seen.insert(c.as_str()) {
                return Err(SchemaError::DuplicateClass(c.clone()));
            }
        }
        let mut names = HashSet::new();
        for f in &self.factors {
            if !names.insert(f.name.as_str()) {
                return Err(SchemaError::DuplicateFactor(f.name.clone()));
            }
            if f.levels.is_empty() {
                return Err(SchemaError::EmptyLevels(f.name.clone()));
            }
            let mut levels = HashSet::new();
            for l in &f.levels {
                if !levels.insert(l.as_str()) {
                    return Err(SchemaError::DuplicateLevel {
                        factor: f.name.clone(),
                        level: l.clone(),
                    });
                }
            }
        }
        if let Some(loc) = self.factor(LOCATION) {
            for level in &loc.levels {
                if !self.location_class_map.contains_key(level) {
                    return Err(SchemaError::UnmappedLocation(level.clone()));
                }
            }
        }
        for (location, class) in &self.location_class_map {
            if let Some(loc) = self.factor(LOCATION) {
                if loc.level_index(location).is_none() {
                    return Err(SchemaError::UnknownMappedLocation(location.clone()));
                }
            }
            if self.class_index(class).is_none() {
                return Err(SchemaError::UnknownMappedClass {
                    location: location.clone(),
                    class: class.clone(),
                });
            }
        }
        if let Some(pattern) = &self.filename {
            pattern.validate()?;
            for f in &self.factors {
                if !pattern.fields.contains(&f.name) {
                    continue;
                }
                if let Some(level) = f.levels.iter().find(|l| l.contains(pattern.delimiter)) {
                    return Err(SchemaError::DelimiterInLevel {
                        factor: f.name.clone(),
                        level: level.clone(),
                        delimiter: pattern.delimiter,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SchemaError> {
        let schema: CorpusSchema =
            toml::from_str(text).map_err(|e| SchemaError::Syntax(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchemaError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| SchemaError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes to TOML")
    }

    pub fn factor(&self, name: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.name == name)
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.class_index(class).is_some()
    }

    /// Class recorded at a location, if the location is mapped.
    pub fn location_class(&self, location: &str) -> Option<&str> {
        self.location_class_map.get(location).map(String::as_str)
    }
}
