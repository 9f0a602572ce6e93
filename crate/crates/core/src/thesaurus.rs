//! Controlled indexing vocabulary: exactly seven categories of flat terms.
//!
//! File format (UTF-8 JSON, key order insignificant, array order significant):
//!
//! ```json
//! {
//!   "version": "illustrative-1",
//!   "categories": [
//!     { "id": "c.source", "label": "Source", "terms": [ { "id": "t.sun", "label": "Soleil" } ] }
//!   ]
//! }
//! ```
//!
//! `Thesaurus::to_canonical_string` writes the same document with fields in
//! the order shown above; loading that output and writing it again is
//! byte-identical.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical;
use crate::ids::{CategoryId, TermId};

/// Number of categories every thesaurus must have.
pub const CATEGORY_COUNT: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub id: TermId,
    pub label: String,
    pub category: CategoryId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Category {
    pub id: CategoryId,
    pub label: String,
    /// Owned term ids in file order.
    pub terms: Vec<TermId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThesaurusError {
    #[error("malformed thesaurus file: {0}")]
    MalformedFile(String),
    #[error("thesaurus must have exactly {CATEGORY_COUNT} categories, found {found}")]
    CategoryCountViolation { found: usize },
    #[error("term id '{0}' appears more than once")]
    DuplicateTerm(TermId),
    #[error("category id '{0}' appears more than once")]
    DuplicateCategory(CategoryId),
    #[error("empty identifier in {0}")]
    EmptyId(&'static str),
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("unknown category '{0}'")]
    UnknownCategory(CategoryId),
}

impl ThesaurusError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedFile(_) => "MalformedFile",
            Self::CategoryCountViolation { .. } => "CategoryCountViolation",
            Self::DuplicateTerm(_) => "DuplicateTerm",
            Self::DuplicateCategory(_) => "DuplicateCategory",
            Self::EmptyId(_) => "EmptyId",
            Self::DanglingReference(_) => "DanglingReference",
            Self::UnknownCategory(_) => "UnknownCategory",
        }
    }
}

/// Immutable, validated vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Thesaurus {
    version: String,
    categories: Vec<Category>,
    terms: Vec<Term>,
    term_index: HashMap<TermId, usize>,
    category_index: HashMap<CategoryId, usize>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FileTerm {
    id: String,
    label: String,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FileCategory {
    id: String,
    label: String,
    terms: Vec<FileTerm>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FileDocument {
    version: String,
    categories: Vec<FileCategory>,
}

impl Thesaurus {
    /// Parses and validates a thesaurus file.
    pub fn load(source: &[u8]) -> Result<Self, ThesaurusError> {
        let doc: FileDocument = serde_json::from_slice(source)
            .map_err(|e| ThesaurusError::MalformedFile(e.to_string()))?;
        let mut categories = Vec::with_capacity(doc.categories.len());
        let mut terms = Vec::new();
        for cat in doc.categories {
            let cat_id = CategoryId::new(cat.id);
            let mut owned = Vec::with_capacity(cat.terms.len());
            for term in cat.terms {
                let id = TermId::new(term.id);
                owned.push(id.clone());
                terms.push(Term {
                    id,
                    label: term.label,
                    category: cat_id.clone(),
                });
            }
            categories.push(Category {
                id: cat_id,
                label: cat.label,
                terms: owned,
            });
        }
        Self::from_parts(doc.version, categories, terms)
    }

    /// Builds a thesaurus from already-separated categories and terms,
    /// checking every cross reference.
    pub fn from_parts(
        version: impl Into<String>,
        categories: Vec<Category>,
        terms: Vec<Term>,
    ) -> Result<Self, ThesaurusError> {
        if categories.len() != CATEGORY_COUNT {
            return Err(ThesaurusError::CategoryCountViolation {
                found: categories.len(),
            });
        }

        let mut category_index = HashMap::with_capacity(categories.len());
        for (pos, cat) in categories.iter().enumerate() {
            if cat.id.as_str().is_empty() {
                return Err(ThesaurusError::EmptyId("category"));
            }
            if category_index.insert(cat.id.clone(), pos).is_some() {
                return Err(ThesaurusError::DuplicateCategory(cat.id.clone()));
            }
        }

        let mut term_index = HashMap::with_capacity(terms.len());
        for (pos, term) in terms.iter().enumerate() {
            if term.id.as_str().is_empty() {
                return Err(ThesaurusError::EmptyId("term"));
            }
            if term_index.insert(term.id.clone(), pos).is_some() {
                return Err(ThesaurusError::DuplicateTerm(term.id.clone()));
            }
            if !category_index.contains_key(&term.category) {
                return Err(ThesaurusError::DanglingReference(format!(
                    "term {:?} names missing category {:?}",
                    term.id.as_str(),
                    term.category.as_str()
                )));
            }
        }

        // Every term is listed by exactly its owning category.
        let mut listed = vec![false; terms.len()];
        for cat in &categories {
            for id in &cat.terms {
                let Some(&pos) = term_index.get(id) else {
                    return Err(ThesaurusError::DanglingReference(format!(
                        "category {:?} lists missing term {:?}",
                        cat.id.as_str(),
                        id.as_str()
                    )));
                };
                if terms[pos].category != cat.id {
                    return Err(ThesaurusError::DanglingReference(format!(
                        "category {:?} lists term {:?} owned by {:?}",
                        cat.id.as_str(),
                        id.as_str(),
                        terms[pos].category.as_str()
                    )));
                }
                if std::mem::replace(&mut listed[pos], true) {
                    return Err(ThesaurusError::DuplicateTerm(id.clone()));
                }
            }
        }
        if let Some(pos) = listed.iter().position(|seen| !seen) {
            return Err(ThesaurusError::DanglingReference(format!(
                "term {:?} is not listed by its category",
                terms[pos].id.as_str()
            )));
        }

        Ok(Self {
            version: version.into(),
            categories,
            terms,
            term_index,
            category_index,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    /// All terms, grouped by category in file order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.categories
            .iter()
            .flat_map(|c| c.terms.iter().map(|id| &self.terms[self.term_index[id]]))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn lookup_term(&self, id: &str) -> Option<&Term> {
        self.term_index.get(id).map(|&pos| &self.terms[pos])
    }

    pub fn category(&self, id: &str) -> Option<&Category> {
        self.category_index.get(id).map(|&pos| &self.categories[pos])
    }

    pub fn has_category(&self, id: &str) -> bool {
        self.category_index.contains_key(id)
    }

    pub fn terms_of_category(&self, id: &str) -> Result<Vec<&Term>, ThesaurusError> {
        let cat = self
            .category(id)
            .ok_or_else(|| ThesaurusError::UnknownCategory(CategoryId::from(id)))?;
        Ok(cat
            .terms
            .iter()
            .map(|t| &self.terms[self.term_index[t]])
            .collect())
    }

    fn to_document(&self) -> FileDocument {
        FileDocument {
            version: self.version.clone(),
            categories: self
                .categories
                .iter()
                .map(|c| FileCategory {
                    id: c.id.to_string(),
                    label: c.label.clone(),
                    terms: c
                        .terms
                        .iter()
                        .map(|t| FileTerm {
                            id: t.to_string(),
                            label: self.terms[self.term_index[t]].label.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Canonical file form.
    pub fn to_canonical_string(&self) -> String {
        canonical::to_canonical_string(&self.to_document()).expect("thesaurus serializes")
    }
}

impl Serialize for Thesaurus {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}
