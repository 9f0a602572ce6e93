//! Similarity graphs: images as nodes, undirected scored edges.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical;
use crate::ids::ImageId;
use crate::vsm::{qualifies, SimilarityScore, VectorSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: ImageId,
    pub b: ImageId,
    pub score: SimilarityScore,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGraph {
    pub nodes: BTreeSet<ImageId>,
    /// Keyed by the ordered pair `(min, max)`; written out as an edge list.
    #[serde(with = "edge_list")]
    edges: BTreeMap<(ImageId, ImageId), SimilarityScore>,
    /// Nodes not yet expanded.
    pub frontier: BTreeSet<ImageId>,
}

impl SimilarityGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: ImageId) -> bool {
        self.nodes.insert(id)
    }

    /// Adds the undirected edge `{u, v}`. Self-edges are ignored; both
    /// endpoints become nodes.
    pub fn add_edge(&mut self, u: ImageId, v: ImageId, score: SimilarityScore) {
        if u == v {
            return;
        }
        self.nodes.insert(u.clone());
        self.nodes.insert(v.clone());
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.insert(key, score);
    }

    pub fn has_edge(&self, u: &ImageId, v: &ImageId) -> bool {
        let key = if u < v {
            (u.clone(), v.clone())
        } else {
            (v.clone(), u.clone())
        };
        self.edges.contains_key(&key)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|((a, b), s)| Edge {
            a: a.clone(),
            b: b.clone(),
            score: *s,
        })
    }

    /// Edge pairs `(a, b)` with `a < b`.
    pub fn edge_pairs(&self) -> BTreeSet<(ImageId, ImageId)> {
        self.edges.keys().cloned().collect()
    }

    /// Expands `node`: its `k` nearest qualifying neighbors join the graph,
    /// each linked to `node`. Newly added nodes enter the frontier; `node`
    /// leaves it. Re-expanding a node changes nothing.
    pub fn expand(&mut self, space: &VectorSpace<'_>, node: &ImageId, k: usize, threshold: f64) {
        for n in space.neighbors(node.as_str(), k, threshold) {
            if self.nodes.insert(n.image.clone()) {
                self.frontier.insert(n.image.clone());
            }
            self.add_edge(node.clone(), n.image, n.score);
        }
        self.frontier.remove(node);
    }

    /// Graph over `seeds` with every qualifying pairwise edge among them.
    /// All seeds start in the frontier.
    pub fn from_seeds(space: &VectorSpace<'_>, seeds: &[ImageId], threshold: f64) -> Self {
        let mut graph = Self::new();
        for s in seeds {
            graph.nodes.insert(s.clone());
            graph.frontier.insert(s.clone());
        }
        let nodes: Vec<&ImageId> = graph.nodes.iter().collect();
        let mut edges = Vec::new();
        for (i, u) in nodes.iter().enumerate() {
            let Some(vu) = space.vector(u.as_str()).filter(|v| !v.is_empty()) else {
                continue;
            };
            for v in &nodes[i + 1..] {
                let Some(vv) = space.vector(v.as_str()).filter(|v| !v.is_empty()) else {
                    continue;
                };
                if let Ok(score) = space.similarity(vu, vv) {
                    if qualifies(score, threshold) {
                        edges.push(((*u).clone(), (*v).clone(), score));
                    }
                }
            }
        }
        for (u, v, s) in edges {
            graph.add_edge(u, v, s);
        }
        graph
    }

    /// Checks node references, self-edges and the edge threshold.
    pub fn check(&self, threshold: f64) -> Result<(), String> {
        for ((a, b), s) in &self.edges {
            if a >= b {
                return Err(format!("edge {a}-{b} is not a canonical unordered pair"));
            }
            if !self.nodes.contains(a) || !self.nodes.contains(b) {
                return Err(format!("edge {a}-{b} references a missing node"));
            }
            if !qualifies(*s, threshold) {
                return Err(format!("edge {a}-{b} score {} below threshold", s.value()));
            }
        }
        if let Some(f) = self.frontier.iter().find(|f| !self.nodes.contains(*f)) {
            return Err(format!("frontier node {f} is not a node"));
        }
        Ok(())
    }

    pub fn to_canonical_string(&self) -> String {
        canonical::to_canonical_string(self).expect("graph serializes")
    }
}

/// Whole-corpus graph: each image with a non-empty vector is a node, linked
/// to its `k` nearest qualifying neighbors. An edge exists when either
/// endpoint selects the other. The frontier is empty.
pub fn build_similarity_graph(space: &VectorSpace<'_>, threshold: f64, k: usize) -> SimilarityGraph {
    let mut graph = SimilarityGraph::new();
    for (id, vector) in space.iter() {
        if !vector.is_empty() {
            graph.nodes.insert(id.clone());
        }
    }
    let nodes: Vec<ImageId> = graph.nodes.iter().cloned().collect();
    for id in nodes {
        for n in space.neighbors(id.as_str(), k, threshold) {
            graph.add_edge(id.clone(), n.image, n.score);
        }
    }
    graph
}

mod edge_list {
    use super::*;

    pub fn serialize<S: Serializer>(
        edges: &BTreeMap<(ImageId, ImageId), SimilarityScore>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(edges.iter().map(|((a, b), s)| Edge {
            a: a.clone(),
            b: b.clone(),
            score: *s,
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<(ImageId, ImageId), SimilarityScore>, D::Error> {
        let list = Vec::<Edge>::deserialize(deserializer)?;
        let mut out = BTreeMap::new();
        for e in list {
            if e.a == e.b {
                return Err(serde::de::Error::custom(format!("self-edge on {}", e.a)));
            }
            let key = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
            if out.insert(key, e.score).is_some() {
                return Err(serde::de::Error::custom("duplicate edge"));
            }
        }
        Ok(out)
    }
}
