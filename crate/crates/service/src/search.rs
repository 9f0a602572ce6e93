//! One-shot ranking shared by `POST /search` and `lumiref search`.

use std::collections::{BTreeMap, BTreeSet};

use lumiref_core::catalog::{validate_record, Corpus, ImageRecord, IndexEntry, InformationalData};
use lumiref_core::ids::ImageId;
use lumiref_core::thesaurus::Thesaurus;
use lumiref_core::vsm::{self, IdfTable, RankedList, Scope, VectorSpace, Weighting};
use serde::Deserialize;

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq)]
pub enum QuerySpec {
    Image(ImageId),
    /// Star-weighted terms, validated like an index.
    Terms(Vec<(String, i64)>),
}

/// Wire form of a search request: exactly one of `image` or `terms`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequest {
    #[serde(default)]
    pub image: Option<ImageId>,
    #[serde(default)]
    pub terms: Option<BTreeMap<String, i64>>,
    #[serde(default)]
    pub restriction: Scope,
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub idf: bool,
}

impl SearchRequest {
    pub fn spec(&self) -> Result<QuerySpec, ApiError> {
        match (&self.image, &self.terms) {
            (Some(image), None) => Ok(QuerySpec::Image(image.clone())),
            (None, Some(terms)) => Ok(QuerySpec::Terms(
                terms.iter().map(|(t, w)| (t.clone(), *w)).collect(),
            )),
            _ => Err(ApiError::malformed("give exactly one of `image` or `terms`")),
        }
    }
}

/// Parses a `term:weight` command-line pair.
pub fn parse_term_arg(arg: &str) -> Result<(String, i64), String> {
    let (term, weight) = arg
        .rsplit_once(':')
        .ok_or_else(|| format!("expected term:weight, got {arg:?}"))?;
    let weight = weight
        .parse::<i64>()
        .map_err(|_| format!("weight of {term:?} is not an integer: {weight:?}"))?;
    Ok((term.to_owned(), weight))
}

/// Ranks the corpus against an image (excluded from its own list) or a
/// set of weighted terms.
pub fn search(
    th: &Thesaurus,
    corpus: &Corpus,
    scope: &Scope,
    idf: bool,
    spec: &QuerySpec,
    limit: Option<usize>,
) -> Result<RankedList, ApiError> {
    let weighting = if idf {
        Weighting::Idf(IdfTable::from_corpus(corpus))
    } else {
        Weighting::Raw
    };
    let space = VectorSpace::build(corpus, th, scope, &weighting)?;
    let (query, exclude) = match spec {
        QuerySpec::Image(id) => {
            if !corpus.contains(id.as_str()) {
                return Err(ApiError::new("UnknownImage", format!("unknown image {id}")));
            }
            let query = space.vector(id.as_str()).cloned().unwrap_or_default();
            (query, BTreeSet::from([id.clone()]))
        }
        QuerySpec::Terms(terms) => {
            let record = ImageRecord {
                id: ImageId::from("query"),
                uri: String::new(),
                info: InformationalData::default(),
                index: terms
                    .iter()
                    .map(|(t, w)| IndexEntry::new(t.as_str(), *w))
                    .collect(),
            };
            let violations = validate_record(&record, th);
            if !violations.is_empty() {
                return Err(violations.into());
            }
            let query = vsm::vectorize_weighted(&record, scope, th, &weighting)?;
            (query, BTreeSet::new())
        }
    };
    let mut ranked = space.rank(&query, &exclude)?;
    if let Some(limit) = limit {
        ranked.entries.truncate(limit);
    }
    Ok(ranked)
}
