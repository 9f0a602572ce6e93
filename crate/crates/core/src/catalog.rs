//! Image records and the corpus they form.
//!
//! Corpus file: UTF-8 JSON Lines, one record per line:
//!
//! ```text
//! {"id":"img-001","uri":"images/001.jpg","info":{"title":"Atelier"},"index":[{"term":"t.zenithal","weight":3}]}
//! ```
//!
//! `info` and every field inside it are optional. Blank lines are skipped.
//! Line order is kept; it fixes the record order that listing endpoints and
//! tie-free iteration follow. The canonical writer emits `info` fields in the
//! order title, creator, location, source, rights, notes and omits absent ones.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical;
use crate::ids::{ImageId, TermId};
use crate::thesaurus::Thesaurus;

/// Inclusive bounds of the star weighting.
pub const MIN_WEIGHT: i64 = 1;
pub const MAX_WEIGHT: i64 = 4;

/// Descriptive metadata. Never read by similarity or ranking code.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InformationalData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rights: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// One weighted term of an image's index.
///
/// `weight` is a star count; valid values are 1..=4. The type itself admits
/// any integer so that invalid input can be represented and reported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexEntry {
    pub term: TermId,
    pub weight: i64,
}

impl IndexEntry {
    pub fn new(term: impl Into<TermId>, weight: i64) -> Self {
        Self {
            term: term.into(),
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: ImageId,
    pub uri: String,
    #[serde(default)]
    pub info: InformationalData,
    pub index: Vec<IndexEntry>,
}

/// A single broken invariant of a record or corpus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("record {record}: unknown term '{term}'")]
    UnknownTerm { record: ImageId, term: TermId },
    #[error("record {record}: weight {weight} of term '{term}' outside {MIN_WEIGHT}..={MAX_WEIGHT}")]
    WeightOutOfRange {
        record: ImageId,
        term: TermId,
        weight: i64,
    },
    #[error("record {record}: term '{term}' indexed more than once")]
    DuplicateTermInIndex { record: ImageId, term: TermId },
    #[error("record {record}: empty index")]
    EmptyIndex { record: ImageId },
    #[error("record {record}: empty image id")]
    EmptyImageId { record: ImageId },
    #[error("record {record}: id already used earlier in the corpus")]
    DuplicateImageId { record: ImageId },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownTerm { .. } => "UnknownTerm",
            Self::WeightOutOfRange { .. } => "WeightOutOfRange",
            Self::DuplicateTermInIndex { .. } => "DuplicateTermInIndex",
            Self::EmptyIndex { .. } => "EmptyIndex",
            Self::EmptyImageId { .. } => "EmptyImageId",
            Self::DuplicateImageId { .. } => "DuplicateImageId",
        }
    }
}

/// Lists every invariant `record` breaks against `th`; empty means valid.
pub fn validate_record(record: &ImageRecord, th: &Thesaurus) -> Vec<Violation> {
    let mut out = Vec::new();
    let rid = &record.id;
    if rid.as_str().is_empty() {
        out.push(Violation::EmptyImageId {
            record: rid.clone(),
        });
    }
    if record.index.is_empty() {
        out.push(Violation::EmptyIndex {
            record: rid.clone(),
        });
    }
    let mut seen: HashSet<&TermId> = HashSet::with_capacity(record.index.len());
    let mut reported_dup: HashSet<&TermId> = HashSet::new();
    for entry in &record.index {
        if !seen.insert(&entry.term) {
            if reported_dup.insert(&entry.term) {
                out.push(Violation::DuplicateTermInIndex {
                    record: rid.clone(),
                    term: entry.term.clone(),
                });
            }
            continue;
        }
        if th.lookup_term(entry.term.as_str()).is_none() {
            out.push(Violation::UnknownTerm {
                record: rid.clone(),
                term: entry.term.clone(),
            });
        }
        if !(MIN_WEIGHT..=MAX_WEIGHT).contains(&entry.weight) {
            out.push(Violation::WeightOutOfRange {
                record: rid.clone(),
                term: entry.term.clone(),
                weight: entry.weight,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("malformed corpus file at line {line}: {message}")]
    MalformedFile { line: usize, message: String },
    #[error("corpus rejected: {}", Report(.0))]
    Rejected(Vec<Violation>),
}

impl CatalogError {
    /// Stable code of the error; for a rejection, the first violation's class.
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedFile { .. } => "MalformedFile",
            Self::Rejected(v) => v.first().map(Violation::code).unwrap_or("Rejected"),
        }
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Self::Rejected(v) => v,
            Self::MalformedFile { .. } => &[],
        }
    }
}

struct Report<'a>(&'a [Violation]);

impl fmt::Display for Report<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Validated, immutable collection of image records in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<ImageRecord>,
    by_id: HashMap<ImageId, usize>,
    thesaurus_version: String,
}

impl Corpus {
    /// Parses a corpus file. All-or-nothing: any violation rejects the whole
    /// file and the error carries every violation found.
    pub fn ingest(source: &[u8], th: &Thesaurus) -> Result<Self, CatalogError> {
        let text = std::str::from_utf8(source).map_err(|e| CatalogError::MalformedFile {
            line: 0,
            message: e.to_string(),
        })?;
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ImageRecord =
                serde_json::from_str(line).map_err(|e| CatalogError::MalformedFile {
                    line: n + 1,
                    message: e.to_string(),
                })?;
            records.push(record);
        }
        Self::from_records(records, th)
    }

    pub fn from_records(records: Vec<ImageRecord>, th: &Thesaurus) -> Result<Self, CatalogError> {
        let mut violations = Vec::new();
        let mut by_id = HashMap::with_capacity(records.len());
        for (pos, record) in records.iter().enumerate() {
            violations.extend(validate_record(record, th));
            if by_id.insert(record.id.clone(), pos).is_some() {
                violations.push(Violation::DuplicateImageId {
                    record: record.id.clone(),
                });
            }
        }
        if !violations.is_empty() {
            return Err(CatalogError::Rejected(violations));
        }
        Ok(Self {
            records,
            by_id,
            thesaurus_version: th.version().to_owned(),
        })
    }

    pub fn thesaurus_version(&self) -> &str {
        &self.thesaurus_version
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn get(&self, id: &str) -> Option<&ImageRecord> {
        self.by_id.get(id).map(|&pos| &self.records[pos])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// Position of `id` in file order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Canonical JSON Lines form, one record per line, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&canonical::to_canonical_line(record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn thesaurus() -> Thesaurus {
        let cats: Vec<_> = (0..7)
            .map(|c| {
                json!({"id": format!("c.{c}"), "label": "", "terms": [
                    {"id": format!("t{c}a"), "label": ""},
                    {"id": format!("t{c}b"), "label": ""},
                ]})
            })
            .collect();
        Thesaurus::load(json!({"version": "v1", "categories": cats}).to_string().as_bytes())
            .unwrap()
    }

    fn record(id: &str, index: &[(&str, i64)]) -> ImageRecord {
        ImageRecord {
            id: ImageId::from(id),
            uri: format!("img/{id}.jpg"),
            info: InformationalData::default(),
            index: index.iter().map(|&(t, w)| IndexEntry::new(t, w)).collect(),
        }
    }

    #[test]
    fn valid_record_has_no_violations() {
        assert!(validate_record(&record("a", &[("t0a", 1), ("t3b", 4)]), &thesaurus()).is_empty());
    }

    #[test]
    fn each_broken_invariant_reported_once() {
        let th = thesaurus();
        let cases: Vec<(ImageRecord, &str)> = vec![
            (record("a", &[("t0a", 0)]), "WeightOutOfRange"),
            (record("a", &[("t0a", 5)]), "WeightOutOfRange"),
            (record("a", &[("t0a", -3)]), "WeightOutOfRange"),
            (record("a", &[("t0a", 2), ("t0a", 3)]), "DuplicateTermInIndex"),
            (record("a", &[("t0a", 2), ("t0a", 3), ("t0a", 1)]), "DuplicateTermInIndex"),
            (record("a", &[("zzz", 2)]), "UnknownTerm"),
            (record("a", &[]), "EmptyIndex"),
            (record("", &[("t1a", 1)]), "EmptyImageId"),
        ];
        for (r, code) in cases {
            let v = validate_record(&r, &th);
            assert_eq!(v.len(), 1, "{r:?} -> {v:?}");
            assert_eq!(v[0].code(), code);
        }
    }

    #[test]
    fn ingest_counts_and_fidelity() {
        let th = thesaurus();
        let mut text = String::new();
        for i in 0..50 {
            let w = i % 4 + 1;
            text.push_str(&format!(
                "{{\"id\":\"img{i:02}\",\"uri\":\"u{i}\",\"index\":[{{\"term\":\"t{}a\",\"weight\":{w}}},{{\"term\":\"t6b\",\"weight\":2}}]}}\n",
                i % 7
            ));
        }
        text.push('\n');
        let corpus = Corpus::ingest(text.as_bytes(), &th).unwrap();
        assert_eq!(corpus.len(), 50);
        assert_eq!(corpus.thesaurus_version(), "v1");
        let r = corpus.get("img09").unwrap();
        assert_eq!(r.index, vec![IndexEntry::new("t2a", 2), IndexEntry::new("t6b", 2)]);
        assert!(corpus.get("img50").is_none());
    }

    #[test]
    fn ingest_is_all_or_nothing_with_full_report() {
        let th = thesaurus();
        let text = concat!(
            "{\"id\":\"a\",\"uri\":\"\",\"index\":[{\"term\":\"t0a\",\"weight\":5}]}\n",
            "{\"id\":\"b\",\"uri\":\"\",\"index\":[{\"term\":\"t0a\",\"weight\":2}]}\n",
            "{\"id\":\"b\",\"uri\":\"\",\"index\":[{\"term\":\"nope\",\"weight\":2}]}\n",
        );
        let err = Corpus::ingest(text.as_bytes(), &th).unwrap_err();
        let codes: Vec<_> = err.violations().iter().map(Violation::code).collect();
        assert_eq!(codes, ["WeightOutOfRange", "UnknownTerm", "DuplicateImageId"]);
        assert_eq!(err.code(), "WeightOutOfRange");
        let msg = err.to_string();
        assert!(msg.contains("record a"), "{msg}");
        assert!(msg.contains("record b"), "{msg}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let th = thesaurus();
        let text = "{\"id\":\"a\",\"uri\":\"\",\"index\":[{\"term\":\"t0a\",\"weight\":1}]}\n{oops\n";
        assert!(matches!(
            Corpus::ingest(text.as_bytes(), &th),
            Err(CatalogError::MalformedFile { line: 2, .. })
        ));
        let text = "{\"id\":\"a\",\"uri\":\"\",\"index\":[{\"term\":\"t0a\",\"weight\":1.5}]}\n";
        assert_eq!(Corpus::ingest(text.as_bytes(), &th).unwrap_err().code(), "MalformedFile");
    }

    #[test]
    fn canonical_round_trip_and_checksum() {
        let th = thesaurus();
        let mut a = record("a", &[("t0a", 3), ("t1b", 1)]);
        a.info.title = Some("Salle des pas perdus".into());
        a.info.notes = Some("lumière zénithale".into());
        let corpus = Corpus::from_records(vec![a, record("b", &[("t2a", 4)])], &th).unwrap();
        let text = corpus.to_canonical_string();
        let again = Corpus::ingest(text.as_bytes(), &th).unwrap();
        assert_eq!(again, corpus);
        assert_eq!(again.to_canonical_string(), text);
        assert_eq!(again.checksum(), corpus.checksum());
        assert_eq!(corpus.checksum().len(), 64);
        assert!(text.starts_with("{\"id\":\"a\",\"uri\":\"img/a.jpg\",\"info\":{\"title\":"));
    }
}
