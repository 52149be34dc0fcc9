//! Unitary and intersectional partitioning of records into strata.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::log::PredictionRecord;
use crate::schema::CorpusSchema;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrataError {
    #[error("undeclared factor `{0}`")]
    UndeclaredFactor(String),
    #[error("factor `{0}` selected twice")]
    RepeatedFactor(String),
    #[error("record `{sample_id}` has no value for factor `{factor}`")]
    MissingFactor { sample_id: String, factor: String },
    #[error("record `{sample_id}` has undeclared level `{level}` for factor `{factor}`")]
    UnknownLevel {
        sample_id: String,
        factor: String,
        level: String,
    },
    #[error("factor `{0}` is not part of the partition's selector")]
    NotInSelector(String),
}

/// Ordered factor names. Empty selects the aggregated view, one factor a
/// unitary view and two or more an intersectional view.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FactorSelector(Vec<String>);

impl FactorSelector {
    pub fn new<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        schema: &CorpusSchema,
    ) -> Result<Self, StrataError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if schema.factor(n).is_none() {
                return Err(StrataError::UndeclaredFactor(n.clone()));
            }
            if names[..i].contains(n) {
                return Err(StrataError::RepeatedFactor(n.clone()));
            }
        }
        Ok(FactorSelector(names))
    }

    pub fn aggregate() -> Self {
        FactorSelector(Vec::new())
    }

    pub fn factors(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_intersectional(&self) -> bool {
        self.0.len() >= 2
    }

    pub fn contains(&self, factor: &str) -> bool {
        self.0.iter().any(|f| f == factor)
    }
}

/// Names one cell of a (dis)aggregation: a level for each selected factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StratumKey(Vec<(String, String)>);

impl StratumKey {
    pub fn new<F: Into<String>, L: Into<String>>(pairs: impl IntoIterator<Item = (F, L)>) -> Self {
        StratumKey(
            pairs
                .into_iter()
                .map(|(f, l)| (f.into(), l.into()))
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.0
    }

    pub fn level(&self, factor: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(f, _)| f == factor)
            .map(|(_, l)| l.as_str())
    }

    /// Levels joined with `/`, or `all` for the aggregated key.
    pub fn label(&self) -> String {
        if self.0.is_empty() {
            return "all".to_string();
        }
        self.0
            .iter()
            .map(|(_, l)| l.as_str())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn matches(&self, record: &PredictionRecord) -> bool {
        self.0.iter().all(|(f, l)| record.factor(f) == Some(l))
    }
}

impl fmt::Display for StratumKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("all");
        }
        for (i, (factor, level)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{factor}={level}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub key: StratumKey,
    /// Ascending indices into the source record list.
    pub members: Vec<usize>,
}

/// Disjoint, complete grouping of a record list. Strata are ordered by the
/// schema's level order; empty combinations are absent.
#[derive(Debug, Clone)]
pub struct Partition<'a> {
    selector: FactorSelector,
    records: &'a [PredictionRecord],
    strata: Vec<Stratum>,
}

fn level_positions(
    record: &PredictionRecord,
    selector: &FactorSelector,
    schema: &CorpusSchema,
) -> Result<Vec<usize>, StrataError> {
    selector
        .factors()
        .iter()
        .map(|name| {
            let factor = schema
                .factor(name)
                .ok_or_else(|| StrataError::UndeclaredFactor(name.clone()))?;
            let level = record
                .factor(name)
                .ok_or_else(|| StrataError::MissingFactor {
                    sample_id: record.sample_id.clone(),
                    factor: name.clone(),
                })?;
            factor
                .level_index(level)
                .ok_or_else(|| StrataError::UnknownLevel {
                    sample_id: record.sample_id.clone(),
                    factor: name.clone(),
                    level: level.to_string(),
                })
        })
        .collect()
}

fn key_for(positions: &[usize], selector: &FactorSelector, schema: &CorpusSchema) -> StratumKey {
    StratumKey(
        selector
            .factors()
            .iter()
            .zip(positions)
            .map(|(name, &i)| (name.clone(), schema.factor(name).unwrap().levels[i].clone()))
            .collect(),
    )
}

/// Groups records by the selector's factor levels.
pub fn partition<'a>(
    records: &'a [PredictionRecord],
    selector: &FactorSelector,
    schema: &CorpusSchema,
) -> Result<Partition<'a>, StrataError> {
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups
            .entry(level_positions(r, selector, schema)?)
            .or_default()
            .push(i);
    }
    let strata = groups
        .into_iter()
        .map(|(pos, members)| Stratum {
            key: key_for(&pos, selector, schema),
            members,
        })
        .collect();
    Ok(Partition {
        selector: selector.clone(),
        records,
        strata,
    })
}

impl<'a> Partition<'a> {
    pub fn selector(&self) -> &FactorSelector {
        &self.selector
    }

    pub fn records(&self) -> &'a [PredictionRecord] {
        self.records
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &StratumKey> {
        self.strata.iter().map(|s| &s.key)
    }

    pub fn get(&self, key: &StratumKey) -> Option<&Stratum> {
        self.strata.iter().find(|s| &s.key == key)
    }

    /// Records of one stratum, in source order.
    pub fn subset<'p>(&'p self, stratum: &'p Stratum) -> impl Iterator<Item = &'a PredictionRecord> + Clone + 'p {
        let records = self.records;
        stratum.members.iter().map(move |&i| &records[i])
    }

    /// Merges strata onto a single factor of the selector.
    pub fn marginalize(&self, onto: &str, schema: &CorpusSchema) -> Result<Partition<'a>, StrataError> {
        let slot = self
            .selector
            .factors()
            .iter()
            .position(|f| f == onto)
            .ok_or_else(|| StrataError::NotInSelector(onto.to_string()))?;
        let factor = schema
            .factor(onto)
            .ok_or_else(|| StrataError::UndeclaredFactor(onto.to_string()))?;
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in &self.strata {
            let level = &s.key.0[slot].1;
            let pos = factor
                .level_index(level)
                .ok_or_else(|| StrataError::UndeclaredFactor(onto.to_string()))?;
            groups.entry(pos).or_default().extend(&s.members);
        }
        let strata = groups
            .into_iter()
            .map(|(pos, mut members)| {
                members.sort_unstable();
                Stratum {
                    key: StratumKey(vec![(onto.to_string(), factor.levels[pos].clone())]),
                    members,
                }
            })
            .collect();
        Ok(Partition {
            selector: FactorSelector(vec![onto.to_string()]),
            records: self.records,
            strata,
        })
    }
}
