#![allow(dead_code)]

//! Shared fixtures: synthetic thesauri and corpora, plus brute-force oracles
//! that recompute similarities, rankings and graphs from raw index entries
//! with dense vectors, without touching the engine's vector code.

use std::collections::{BTreeMap, BTreeSet};

use lumiref_core::catalog::{Corpus, ImageRecord, IndexEntry, InformationalData};
use lumiref_core::ids::ImageId;
use lumiref_core::thesaurus::Thesaurus;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

pub const TERMS_PER_CATEGORY: usize = 6;

pub fn term_id(category: usize, term: usize) -> String {
    format!("t{category}.{term}")
}

pub fn category_id(category: usize) -> String {
    format!("c{category}")
}

/// Seven categories of `TERMS_PER_CATEGORY` terms each.
pub fn synthetic_thesaurus() -> Thesaurus {
    let cats: Vec<_> = (0..7)
        .map(|c| {
            let terms: Vec<_> = (0..TERMS_PER_CATEGORY)
                .map(|t| json!({"id": term_id(c, t), "label": format!("term {c}/{t}")}))
                .collect();
            json!({"id": category_id(c), "label": format!("category {c}"), "terms": terms})
        })
        .collect();
    Thesaurus::load(json!({"version": "synthetic", "categories": cats}).to_string().as_bytes())
        .unwrap()
}

pub fn all_terms() -> Vec<String> {
    (0..7)
        .flat_map(|c| (0..TERMS_PER_CATEGORY).map(move |t| term_id(c, t)))
        .collect()
}

pub fn record(id: &str, index: &[(&str, i64)]) -> ImageRecord {
    ImageRecord {
        id: ImageId::from(id),
        uri: format!("mem://{id}"),
        info: InformationalData::default(),
        index: index.iter().map(|&(t, w)| IndexEntry::new(t, w)).collect(),
    }
}

/// Random index of 1..=max_terms distinct terms with weights 1..=4.
pub fn random_index<R: Rng>(rng: &mut R, max_terms: usize) -> Vec<IndexEntry> {
    let terms = all_terms();
    let n = rng.gen_range(1..=max_terms);
    terms
        .choose_multiple(rng, n)
        .map(|t| IndexEntry::new(t.as_str(), rng.gen_range(1..=4)))
        .collect()
}

/// `n` random records with ids `img000..`, shuffled so file order differs
/// from id order.
pub fn synthetic_records<R: Rng>(rng: &mut R, n: usize) -> Vec<ImageRecord> {
    let mut records: Vec<_> = (0..n)
        .map(|i| ImageRecord {
            id: ImageId::new(format!("img{i:03}")),
            uri: format!("mem://img{i:03}"),
            info: InformationalData {
                title: Some(format!("synthetic {i}")),
                ..Default::default()
            },
            index: random_index(rng, 6),
        })
        .collect();
    records.shuffle(rng);
    records
}

pub fn synthetic_corpus<R: Rng>(rng: &mut R, th: &Thesaurus, n: usize) -> Corpus {
    Corpus::from_records(synthetic_records(rng, n), th).unwrap()
}

pub mod oracle {
    use super::*;

    /// Dense vector over `all_terms()` order, optionally keeping only terms
    /// whose category index is in `categories`.
    pub fn dense(record: &ImageRecord, categories: Option<&BTreeSet<usize>>) -> Vec<f64> {
        let terms = all_terms();
        let mut out = vec![0.0; terms.len()];
        for entry in &record.index {
            let pos = terms.iter().position(|t| t == entry.term.as_str()).unwrap();
            let category = pos / TERMS_PER_CATEGORY;
            if categories.is_none_or(|c| c.contains(&category)) {
                out[pos] = entry.weight as f64;
            }
        }
        out
    }

    pub fn dense_from_map(map: &BTreeMap<String, f64>) -> Vec<f64> {
        all_terms()
            .iter()
            .map(|t| map.get(t).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn is_zero(v: &[f64]) -> bool {
        v.iter().all(|x| *x == 0.0)
    }

    pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut nb = 0.0;
        for i in 0..a.len() {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        dot / (na * nb).sqrt()
    }

    /// Exhaustive ranking: score everything, drop excluded and empty images,
    /// sort by score descending then id ascending.
    pub fn rank(
        query: &[f64],
        records: &[ImageRecord],
        categories: Option<&BTreeSet<usize>>,
        exclude: &BTreeSet<String>,
    ) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for r in records {
            if exclude.contains(r.id.as_str()) {
                continue;
            }
            let v = dense(r, categories);
            if is_zero(&v) {
                continue;
            }
            out.push((r.id.to_string(), cosine(query, &v)));
        }
        // insertion sort, deliberately not the engine's sort
        let mut sorted: Vec<(String, f64)> = Vec::with_capacity(out.len());
        for item in out {
            let pos = sorted
                .iter()
                .position(|(id, s)| item.1 > *s || (item.1 == *s && item.0 < *id))
                .unwrap_or(sorted.len());
            sorted.insert(pos, item);
        }
        sorted
    }

    /// Top-k neighbors of `id` among `records` with a positive score of at
    /// least `threshold`.
    pub fn neighbors(
        id: &str,
        records: &[ImageRecord],
        k: usize,
        threshold: f64,
    ) -> Vec<(String, f64)> {
        let me = records.iter().find(|r| r.id.as_str() == id).unwrap();
        let q = dense(me, None);
        if is_zero(&q) {
            return Vec::new();
        }
        rank(&q, records, None, &BTreeSet::from([id.to_owned()]))
            .into_iter()
            .filter(|(_, s)| *s > 0.0 && *s >= threshold)
            .take(k)
            .collect()
    }

    /// All-pairs graph edges under the top-k union rule, as `(min, max)` pairs.
    pub fn graph_edges(
        records: &[ImageRecord],
        threshold: f64,
        k: usize,
    ) -> BTreeSet<(String, String)> {
        let mut edges = BTreeSet::new();
        for r in records {
            for (n, _) in neighbors(r.id.as_str(), records, k, threshold) {
                let a = r.id.to_string();
                edges.insert(if a < n { (a, n) } else { (n, a) });
            }
        }
        edges
    }

    /// Rocchio on plain term maps.
    pub fn rocchio(
        q: Option<&BTreeMap<String, f64>>,
        positives: &[BTreeMap<String, f64>],
        negatives: &[BTreeMap<String, f64>],
        (alpha, beta, gamma): (f64, f64, f64),
    ) -> BTreeMap<String, f64> {
        let mut terms: BTreeSet<String> = BTreeSet::new();
        for m in q.into_iter().chain(positives).chain(negatives) {
            terms.extend(m.keys().cloned());
        }
        let mean = |set: &[BTreeMap<String, f64>], t: &str| -> f64 {
            if set.is_empty() {
                0.0
            } else {
                set.iter().map(|m| m.get(t).copied().unwrap_or(0.0)).sum::<f64>() / set.len() as f64
            }
        };
        let mut out = BTreeMap::new();
        for t in terms {
            let base = q.and_then(|m| m.get(&t)).copied().unwrap_or(0.0);
            let value = alpha * base + beta * mean(positives, &t) - gamma * mean(negatives, &t);
            if value > 0.0 {
                out.insert(t, value);
            }
        }
        out
    }

    pub fn index_map(record: &ImageRecord) -> BTreeMap<String, f64> {
        record
            .index
            .iter()
            .map(|e| (e.term.to_string(), e.weight as f64))
            .collect()
    }
}
