//! Vector-space model: sparse term vectors, the cosine coefficient, ranking,
//! and Rocchio query reformulation from judged images.
//!
//! Vectors are built from an image's index entries only; informational data
//! never reaches this module. A vector carries the category [`Scope`] it was
//! built under, and two vectors are only comparable when their scopes agree.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Corpus, ImageRecord};
use crate::ids::{CategoryId, ImageId, TermId};
use crate::thesaurus::Thesaurus;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VsmError {
    #[error("unknown category '{0}'")]
    UnknownCategory(CategoryId),
    #[error("similarity of an empty vector is undefined")]
    EmptyVector,
    #[error("query vector is empty")]
    EmptyQuery,
    #[error("reformulation needs a query or at least one positive example")]
    EmptyFeedback,
    #[error("vectors built under different category scopes")]
    ScopeMismatch,
    #[error("invalid magnitude {value} for term '{term}'")]
    InvalidMagnitude { term: TermId, value: f64 },
}

impl VsmError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownCategory(_) => "UnknownCategory",
            Self::EmptyVector => "EmptyVector",
            Self::EmptyQuery => "EmptyQuery",
            Self::EmptyFeedback => "EmptyFeedback",
            Self::ScopeMismatch => "ScopeMismatch",
            Self::InvalidMagnitude { .. } => "InvalidMagnitude",
        }
    }
}

/// Which part of the indexing a vector reflects.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    All,
    Categories(BTreeSet<CategoryId>),
}

impl Scope {
    pub fn categories<I, C>(ids: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: Into<CategoryId>,
    {
        Self::Categories(ids.into_iter().map(Into::into).collect())
    }

    /// Fails if the scope names a category the thesaurus lacks.
    pub fn check(&self, th: &Thesaurus) -> Result<(), VsmError> {
        if let Self::Categories(cats) = self {
            if let Some(bad) = cats.iter().find(|c| !th.has_category(c.as_str())) {
                return Err(VsmError::UnknownCategory(bad.clone()));
            }
        }
        Ok(())
    }

    fn admits(&self, category: &CategoryId) -> bool {
        match self {
            Self::All => true,
            Self::Categories(cats) => cats.contains(category),
        }
    }
}

/// Sparse non-negative vector keyed by term id. Zero components are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermVector {
    components: BTreeMap<TermId, f64>,
    scope: Scope,
}

impl TermVector {
    pub fn empty(scope: Scope) -> Self {
        Self {
            components: BTreeMap::new(),
            scope,
        }
    }

    /// Builds a vector from explicit magnitudes. Zeros are dropped; negative
    /// or non-finite magnitudes are rejected. Repeated terms accumulate.
    pub fn from_pairs<I, T>(pairs: I, scope: Scope) -> Result<Self, VsmError>
    where
        I: IntoIterator<Item = (T, f64)>,
        T: Into<TermId>,
    {
        let mut components = BTreeMap::new();
        for (term, value) in pairs {
            let term = term.into();
            if !value.is_finite() || value < 0.0 {
                return Err(VsmError::InvalidMagnitude { term, value });
            }
            if value > 0.0 {
                *components.entry(term).or_insert(0.0) += value;
            }
        }
        Ok(Self { components, scope })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn components(&self) -> &BTreeMap<TermId, f64> {
        &self.components
    }

    pub fn get(&self, term: &str) -> f64 {
        self.components.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn squared_norm(&self) -> f64 {
        self.components.values().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .components
            .iter()
            .filter_map(|(t, a)| large.components.get(t).map(|b| a * b))
            .sum()
    }

    /// Every magnitude multiplied by `factor` (must be positive and finite).
    pub fn scaled(&self, factor: f64) -> Self {
        debug_assert!(factor > 0.0 && factor.is_finite());
        Self {
            components: self
                .components
                .iter()
                .map(|(t, v)| (t.clone(), v * factor))
                .collect(),
            scope: self.scope.clone(),
        }
    }

    /// Diagnostic dump: one `term<TAB>magnitude` line per component, sorted
    /// by term id; magnitudes use the shortest round-trip decimal form.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (term, value) in &self.components {
            let _ = writeln!(out, "{term}\t{value}");
        }
        out
    }
}

/// Inverse document frequency table, `ln(1 + N / df)` per term.
///
/// Off by default; raw star weights are the standard magnitudes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdfTable {
    factors: HashMap<TermId, f64>,
}

impl IdfTable {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut df: HashMap<&TermId, usize> = HashMap::new();
        for record in corpus.records() {
            for entry in &record.index {
                *df.entry(&entry.term).or_default() += 1;
            }
        }
        let n = corpus.len() as f64;
        Self {
            factors: df
                .into_iter()
                .map(|(t, d)| (t.clone(), (1.0 + n / d as f64).ln()))
                .collect(),
        }
    }

    pub fn factor(&self, term: &str) -> f64 {
        self.factors.get(term).copied().unwrap_or(1.0)
    }
}

/// How star weights become vector magnitudes.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum Weighting {
    #[default]
    Raw,
    Idf(IdfTable),
}

/// Vector of `record` restricted to `scope`, with raw star weights.
pub fn vectorize(
    record: &ImageRecord,
    scope: &Scope,
    th: &Thesaurus,
) -> Result<TermVector, VsmError> {
    vectorize_weighted(record, scope, th, &Weighting::Raw)
}

pub fn vectorize_weighted(
    record: &ImageRecord,
    scope: &Scope,
    th: &Thesaurus,
    weighting: &Weighting,
) -> Result<TermVector, VsmError> {
    scope.check(th)?;
    let mut components = BTreeMap::new();
    for entry in &record.index {
        // Records are validated at ingestion; an unresolvable term simply
        // belongs to no category.
        let Some(term) = th.lookup_term(entry.term.as_str()) else {
            continue;
        };
        if !scope.admits(&term.category) || entry.weight <= 0 {
            continue;
        }
        let magnitude = match weighting {
            Weighting::Raw => entry.weight as f64,
            Weighting::Idf(table) => entry.weight as f64 * table.factor(entry.term.as_str()),
        };
        if magnitude > 0.0 {
            components.insert(entry.term.clone(), magnitude);
        }
    }
    Ok(TermVector {
        components,
        scope: scope.clone(),
    })
}

/// Score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ONE: Self = Self(1.0);

    /// Clamps into `[0, 1]`; negative zero becomes zero.
    pub fn new(value: f64) -> Self {
        Self(value.clamp(0.0, 1.0) + 0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A similarity coefficient between two vectors of the same scope.
pub trait SimilarityMeasure: Send + Sync {
    fn similarity(&self, a: &TermVector, b: &TermVector) -> Result<SimilarityScore, VsmError>;
}

/// The cosine coefficient `a·b / (‖a‖‖b‖)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cosine;

impl SimilarityMeasure for Cosine {
    fn similarity(&self, a: &TermVector, b: &TermVector) -> Result<SimilarityScore, VsmError> {
        if a.scope != b.scope {
            return Err(VsmError::ScopeMismatch);
        }
        if a.is_empty() || b.is_empty() {
            return Err(VsmError::EmptyVector);
        }
        // sqrt of the product keeps identical vectors at exactly 1.0
        let value = a.dot(b) / (a.squared_norm() * b.squared_norm()).sqrt();
        Ok(SimilarityScore::new(value))
    }
}

pub fn similarity(a: &TermVector, b: &TermVector) -> Result<SimilarityScore, VsmError> {
    Cosine.similarity(a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub image: ImageId,
    pub score: SimilarityScore,
}

/// Images by descending score; equal scores in ascending id order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    /// Sorts `entries` into ranking order.
    pub fn from_unsorted(mut entries: Vec<RankedEntry>) -> Self {
        entries.sort_by(|a, b| {
            b.score
                .value()
                .total_cmp(&a.score.value())
                .then_with(|| a.image.cmp(&b.image))
        });
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &ImageId> {
        self.entries.iter().map(|e| &e.image)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.iter().any(|e| e.image.as_str() == id)
    }
}

/// Precomputed vectors of a whole corpus under one scope and weighting.
pub struct VectorSpace<'a> {
    corpus: &'a Corpus,
    scope: Scope,
    vectors: Vec<TermVector>,
    measure: &'a dyn SimilarityMeasure,
}

impl<'a> VectorSpace<'a> {
    pub fn build(
        corpus: &'a Corpus,
        th: &Thesaurus,
        scope: &Scope,
        weighting: &Weighting,
    ) -> Result<Self, VsmError> {
        Self::with_measure(corpus, th, scope, weighting, &Cosine)
    }

    pub fn with_measure(
        corpus: &'a Corpus,
        th: &Thesaurus,
        scope: &Scope,
        weighting: &Weighting,
        measure: &'a dyn SimilarityMeasure,
    ) -> Result<Self, VsmError> {
        scope.check(th)?;
        let vectors = corpus
            .records()
            .iter()
            .map(|r| vectorize_weighted(r, scope, th, weighting))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            corpus,
            scope: scope.clone(),
            vectors,
            measure,
        })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    /// Vector of image `id`, if it is in the corpus.
    pub fn vector(&self, id: &str) -> Option<&TermVector> {
        self.corpus.position(id).map(|pos| &self.vectors[pos])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a ImageId, &TermVector)> {
        self.corpus
            .records()
            .iter()
            .map(|r| &r.id)
            .zip(self.vectors.iter())
    }

    pub fn similarity(&self, a: &TermVector, b: &TermVector) -> Result<SimilarityScore, VsmError> {
        self.measure.similarity(a, b)
    }

    /// Scores every non-excluded image whose vector is non-empty.
    pub fn rank(
        &self,
        query: &TermVector,
        exclude: &BTreeSet<ImageId>,
    ) -> Result<RankedList, VsmError> {
        if query.is_empty() {
            return Err(VsmError::EmptyQuery);
        }
        if query.scope != self.scope {
            return Err(VsmError::ScopeMismatch);
        }
        let mut entries = Vec::with_capacity(self.vectors.len());
        for (id, vector) in self.iter() {
            if vector.is_empty() || exclude.contains(id) {
                continue;
            }
            entries.push(RankedEntry {
                image: id.clone(),
                score: self.measure.similarity(query, vector)?,
            });
        }
        Ok(RankedList::from_unsorted(entries))
    }

    /// Up to `k` nearest images to `id` (itself excluded) with a positive
    /// score of at least `threshold`, in ranking order.
    pub fn neighbors(&self, id: &str, k: usize, threshold: f64) -> Vec<RankedEntry> {
        let Some(vector) = self.vector(id).filter(|v| !v.is_empty()) else {
            return Vec::new();
        };
        let exclude = BTreeSet::from([ImageId::from(id)]);
        let ranked = self.rank(vector, &exclude).unwrap_or_default();
        ranked
            .entries
            .into_iter()
            .take_while(|e| qualifies(e.score, threshold))
            .take(k)
            .collect()
    }
}

/// Edge rule shared by every graph: a strictly positive score at or above
/// the threshold.
pub fn qualifies(score: SimilarityScore, threshold: f64) -> bool {
    score.value() > 0.0 && score.value() >= threshold
}

/// Ranks the corpus against `query` with raw weights and the cosine coefficient.
pub fn rank(
    query: &TermVector,
    corpus: &Corpus,
    scope: &Scope,
    th: &Thesaurus,
    exclude: &BTreeSet<ImageId>,
) -> Result<RankedList, VsmError> {
    VectorSpace::build(corpus, th, scope, &Weighting::Raw)?.rank(query, exclude)
}

/// Rocchio coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rocchio {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for Rocchio {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.75,
            gamma: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reformulated {
    Query(TermVector),
    /// Every component cancelled out; the result has nothing to rank with.
    Degenerate,
}

/// `alpha·q + beta·mean(positives) − gamma·mean(negatives)`, negative
/// components clamped to zero. An absent query counts as the zero vector.
pub fn reformulate_query(
    query: Option<&TermVector>,
    positives: &[TermVector],
    negatives: &[TermVector],
    params: &Rocchio,
) -> Result<Reformulated, VsmError> {
    let scope = match (query, positives.first()) {
        (Some(q), _) => q.scope.clone(),
        (None, Some(p)) => p.scope.clone(),
        (None, None) => return Err(VsmError::EmptyFeedback),
    };
    if positives
        .iter()
        .chain(negatives)
        .any(|v| v.scope != scope)
    {
        return Err(VsmError::ScopeMismatch);
    }

    let mut acc: BTreeMap<TermId, f64> = BTreeMap::new();
    if let Some(q) = query {
        for (t, v) in &q.components {
            *acc.entry(t.clone()).or_insert(0.0) += params.alpha * v;
        }
    }
    for (set, coeff) in [(positives, params.beta), (negatives, -params.gamma)] {
        for (t, mean) in centroid_components(set) {
            *acc.entry(t).or_insert(0.0) += coeff * mean;
        }
    }
    acc.retain(|_, v| *v > 0.0);
    if acc.is_empty() {
        return Ok(Reformulated::Degenerate);
    }
    Ok(Reformulated::Query(TermVector {
        components: acc,
        scope,
    }))
}

fn centroid_components(vectors: &[TermVector]) -> BTreeMap<TermId, f64> {
    let mut sum: BTreeMap<TermId, f64> = BTreeMap::new();
    for v in vectors {
        for (t, x) in &v.components {
            *sum.entry(t.clone()).or_insert(0.0) += x;
        }
    }
    let n = vectors.len() as f64;
    sum.values_mut().for_each(|x| *x /= n);
    sum
}

/// Component-wise mean of `vectors` (all in one scope).
pub fn centroid(vectors: &[TermVector]) -> Result<TermVector, VsmError> {
    let scope = vectors.first().map(|v| v.scope.clone()).unwrap_or_default();
    if vectors.iter().any(|v| v.scope != scope) {
        return Err(VsmError::ScopeMismatch);
    }
    let mut components = centroid_components(vectors);
    components.retain(|_, v| *v > 0.0);
    Ok(TermVector { components, scope })
}
