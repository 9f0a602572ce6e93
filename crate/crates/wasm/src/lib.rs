//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every exported method returns a JSON string. The `*_json` methods do the
//! actual work and are callable from native code as well.

use std::collections::BTreeSet;

use lumiref_core::navigation::corpus_graph;
use lumiref_core::vsm::{reformulate_query, Reformulated, Rocchio, VectorSpace, Weighting};
use lumiref_core::{Corpus, ImageId, Scope, Thesaurus};
use serde_json::json;
use wasm_bindgen::prelude::*;

const THESAURUS: &str = include_str!("../../../data/thesaurus.json");
const CORPUS: &str = include_str!("../../../data/sample_corpus.jsonl");

#[wasm_bindgen]
pub struct Engine {
    thesaurus: Thesaurus,
    corpus: Corpus,
}

fn scope_of(categories: &[String]) -> Scope {
    if categories.is_empty() {
        Scope::All
    } else {
        Scope::categories(categories.iter().map(String::as_str))
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

impl Engine {
    pub fn load(thesaurus: &str, corpus: &str) -> Result<Engine, String> {
        let thesaurus = Thesaurus::load(thesaurus.as_bytes()).map_err(fail)?;
        let corpus = Corpus::ingest(corpus.as_bytes(), &thesaurus).map_err(fail)?;
        Ok(Engine { thesaurus, corpus })
    }

    pub fn bundled() -> Engine {
        Engine::load(THESAURUS, CORPUS).expect("bundled data is valid")
    }

    fn space(&self, categories: &[String]) -> Result<VectorSpace<'_>, String> {
        VectorSpace::build(&self.corpus, &self.thesaurus, &scope_of(categories), &Weighting::Raw)
            .map_err(fail)
    }

    /// Images, categories and term labels for populating the page.
    pub fn catalog_json(&self) -> String {
        let categories: Vec<_> = self
            .thesaurus
            .categories()
            .iter()
            .map(|c| json!({"id": c.id, "label": c.label}))
            .collect();
        let images: Vec<_> = self
            .corpus
            .records()
            .iter()
            .map(|r| {
                let title = r.info.title.clone().unwrap_or_else(|| r.id.to_string());
                json!({"id": r.id, "title": title, "index": r.index})
            })
            .collect();
        json!({"version": self.thesaurus.version(), "categories": categories, "images": images})
            .to_string()
    }

    /// Ranks the corpus against `image`, which is left out of the list.
    pub fn rank_json(&self, image: &str, categories: &[String], limit: usize) -> Result<String, String> {
        let space = self.space(categories)?;
        let query = space
            .vector(image)
            .ok_or_else(|| format!("unknown image '{image}'"))?;
        let exclude = BTreeSet::from([ImageId::from(image)]);
        let mut ranked = space.rank(query, &exclude).map_err(fail)?;
        ranked.entries.truncate(limit);
        serde_json::to_string(&ranked).map_err(fail)
    }

    pub fn graph_json(&self, threshold: f64, k: usize) -> Result<String, String> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err("threshold must lie in [0, 1]".into());
        }
        let graph = corpus_graph(&self.corpus, &self.thesaurus, &Scope::All, threshold, k).map_err(fail)?;
        serde_json::to_string(&graph).map_err(fail)
    }

    /// One feedback round: moves the query of `image` toward `positives` and
    /// away from `negatives`, then ranks with the new query. Judged images
    /// and the query image are left out.
    pub fn reformulate_json(
        &self,
        image: &str,
        positives: &[String],
        negatives: &[String],
        limit: usize,
    ) -> Result<String, String> {
        let space = self.space(&[])?;
        let vector = |id: &String| {
            space
                .vector(id)
                .cloned()
                .ok_or_else(|| format!("unknown image '{id}'"))
        };
        let query = vector(&image.to_owned())?;
        let pos = positives.iter().map(vector).collect::<Result<Vec<_>, _>>()?;
        let neg = negatives.iter().map(vector).collect::<Result<Vec<_>, _>>()?;
        let q = match reformulate_query(Some(&query), &pos, &neg, &Rocchio::default()).map_err(fail)? {
            Reformulated::Query(q) => q,
            Reformulated::Degenerate => return Err("feedback cancelled every query term".into()),
        };
        let exclude: BTreeSet<ImageId> = std::iter::once(image)
            .chain(positives.iter().map(String::as_str))
            .chain(negatives.iter().map(String::as_str))
            .map(ImageId::from)
            .collect();
        let mut ranked = space.rank(&q, &exclude).map_err(fail)?;
        ranked.entries.truncate(limit);
        let query: serde_json::Map<_, _> = q
            .components()
            .iter()
            .map(|(t, w)| (t.to_string(), json!(w)))
            .collect();
        Ok(json!({"query": query, "ranked": ranked}).to_string())
    }
}

#[wasm_bindgen]
impl Engine {
    /// Engine over the sample corpus compiled into the module.
    #[wasm_bindgen(constructor)]
    pub fn new() -> Engine {
        Engine::bundled()
    }

    pub fn catalog(&self) -> String {
        self.catalog_json()
    }

    pub fn rank(&self, image: &str, categories: Vec<String>, limit: usize) -> Result<String, JsError> {
        self.rank_json(image, &categories, limit).map_err(|e| JsError::new(&e))
    }

    pub fn graph(&self, threshold: f64, k: usize) -> Result<String, JsError> {
        self.graph_json(threshold, k).map_err(|e| JsError::new(&e))
    }

    pub fn reformulate(
        &self,
        image: &str,
        positives: Vec<String>,
        negatives: Vec<String>,
        limit: usize,
    ) -> Result<String, JsError> {
        self.reformulate_json(image, &positives, &negatives, limit)
            .map_err(|e| JsError::new(&e))
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine::bundled()
    }
}
