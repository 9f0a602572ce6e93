//! Navigation sessions and the eleven transitions between query images,
//! ranked lists, mosaics, judgment groups, similarity graphs and albums.
//!
//! | letter | from                      | to            |
//! |--------|---------------------------|---------------|
//! | a      | query image               | ranked list   |
//! | b      | query image               | mosaic        |
//! | c      | query image               | graph         |
//! | d      | graph node                | larger graph  |
//! | e      | graph or ranked list      | groups        |
//! | f      | mosaic judgments          | groups        |
//! | g      | ranked list               | mosaic        |
//! | h      | groups/ranked/mosaic      | graph         |
//! | i      | groups/ranked/mosaic      | album         |
//! | j      | album                     | query + ranked|
//! | k      | judged mosaic             | next mosaic   |
//!
//! Every transition is atomic: on error the session is left untouched and
//! nothing is logged.

pub mod album;
pub mod graph;
pub mod model;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Corpus;
use crate::ids::{AlbumId, ImageId, SessionId};
use crate::thesaurus::Thesaurus;
use crate::vsm::{
    reformulate_query, IdfTable, Reformulated, Rocchio, Scope, TermVector, VectorSpace, VsmError,
    Weighting,
};

pub use album::{AlbumDraft, AlbumStore, DirAlbumStore, MemoryAlbumStore, StoreError};
pub use graph::{build_similarity_graph, Edge, SimilarityGraph};
pub use model::{
    Album, GroupSet, Judgment, Letter, LogEntry, Mosaic, NavigationSession, Provenance,
};

/// Session-tunable sizes and coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    pub mosaic_size: usize,
    pub graph_k: usize,
    pub edge_threshold: f64,
    pub graph_seed_count: usize,
    pub rocchio: Rocchio,
    /// Multiply star weights by corpus IDF before comparing.
    pub idf: bool,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            mosaic_size: 12,
            graph_k: 8,
            edge_threshold: 0.3,
            graph_seed_count: 10,
            rocchio: Rocchio::default(),
            idf: false,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<(), NavError> {
        let r = &self.rocchio;
        let coeffs_ok = [r.alpha, r.beta, r.gamma]
            .iter()
            .all(|c| c.is_finite() && *c >= 0.0);
        if self.mosaic_size == 0 {
            return Err(NavError::InvalidConfig("mosaic_size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.edge_threshold) {
            return Err(NavError::InvalidConfig("edge_threshold must lie in [0, 1]".into()));
        }
        if !coeffs_ok {
            return Err(NavError::InvalidConfig(
                "alpha, beta and gamma must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NavError {
    #[error("unknown image {0}")]
    UnknownImage(ImageId),
    #[error("image {0} is not a node of the graph")]
    UnknownNode(ImageId),
    #[error("unknown album {0}")]
    UnknownAlbum(AlbumId),
    #[error("the session has no graph")]
    NoGraph,
    #[error("the session has no mosaic")]
    NoMosaic,
    #[error("the session has no ranked list")]
    NoRankedList,
    #[error("the session has no {0}")]
    NoSource(&'static str),
    #[error("the {0} is empty")]
    EmptySource(&'static str),
    #[error("no judgments, groups or query to reformulate from")]
    NoFeedback,
    #[error("none of the album's images remain in the corpus")]
    AlbumFullyStale,
    #[error("feedback cancelled every query component")]
    DegenerateQuery,
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Vsm(#[from] VsmError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl NavError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownImage(_) => "UnknownImage",
            Self::UnknownNode(_) => "UnknownNode",
            Self::UnknownAlbum(_) => "UnknownAlbum",
            Self::NoGraph => "NoGraph",
            Self::NoMosaic => "NoMosaic",
            Self::NoRankedList => "NoRankedList",
            Self::NoSource(_) => "NoSource",
            Self::EmptySource(_) => "EmptySource",
            Self::NoFeedback => "NoFeedback",
            Self::AlbumFullyStale => "AlbumFullyStale",
            Self::DegenerateQuery => "DegenerateQuery",
            Self::EmptyCorpus => "EmptyCorpus",
            Self::InvalidConfig(_) => "InvalidConfig",
            Self::Vsm(e) => e.code(),
            Self::Store(_) => "StoreFailure",
        }
    }
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Always reports the same instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

/// Sources judgments can be assigned from (transition e).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeSource {
    Graph,
    RankedList,
}

/// Structures a graph or album can be built from (transitions h and i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Groups,
    RankedList,
    Mosaic,
}

/// A transition request with its arguments; the wire form is
/// `{"letter": "a", ...arguments}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "letter", rename_all = "lowercase", deny_unknown_fields)]
pub enum Transition {
    A {
        image: ImageId,
    },
    B {
        image: ImageId,
    },
    C {
        image: ImageId,
    },
    D {
        node: ImageId,
    },
    E {
        source: JudgeSource,
        #[serde(default)]
        assignment: BTreeMap<ImageId, Judgment>,
    },
    /// Judgments are applied to the mosaic before folding.
    F {
        #[serde(default)]
        judgments: BTreeMap<ImageId, Judgment>,
    },
    G,
    H {
        origin: Origin,
    },
    I {
        origin: Origin,
        name: String,
        #[serde(default)]
        annotation: String,
    },
    J {
        album: AlbumId,
    },
    K {
        #[serde(default)]
        judgments: BTreeMap<ImageId, Judgment>,
    },
}

impl Transition {
    pub fn letter(&self) -> Letter {
        match self {
            Self::A { .. } => Letter::A,
            Self::B { .. } => Letter::B,
            Self::C { .. } => Letter::C,
            Self::D { .. } => Letter::D,
            Self::E { .. } => Letter::E,
            Self::F { .. } => Letter::F,
            Self::G => Letter::G,
            Self::H { .. } => Letter::H,
            Self::I { .. } => Letter::I,
            Self::J { .. } => Letter::J,
            Self::K { .. } => Letter::K,
        }
    }
}

/// Side results of a transition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub album: Option<Album>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Drives sessions over one corpus, thesaurus and album store.
pub struct Navigator<'a> {
    thesaurus: &'a Thesaurus,
    corpus: &'a Corpus,
    albums: &'a dyn AlbumStore,
    clock: &'a dyn Clock,
}

impl<'a> Navigator<'a> {
    pub fn new(
        thesaurus: &'a Thesaurus,
        corpus: &'a Corpus,
        albums: &'a dyn AlbumStore,
        clock: &'a dyn Clock,
    ) -> Self {
        Self {
            thesaurus,
            corpus,
            albums,
            clock,
        }
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn thesaurus(&self) -> &'a Thesaurus {
        self.thesaurus
    }

    pub fn open_session(
        &self,
        id: SessionId,
        restriction: Scope,
        config: NavConfig,
    ) -> Result<NavigationSession, NavError> {
        restriction.check(self.thesaurus)?;
        config.validate()?;
        Ok(NavigationSession {
            id,
            corpus: self.corpus.checksum(),
            restriction,
            config,
            current_query: None,
            ranked: None,
            mosaic: None,
            groups: GroupSet::default(),
            graph: None,
            judged_history: BTreeSet::new(),
            transition_log: Vec::new(),
        })
    }

    /// Vector space of the session's scope and weighting.
    pub fn space(&self, s: &NavigationSession) -> Result<VectorSpace<'a>, NavError> {
        let weighting = if s.config.idf {
            Weighting::Idf(IdfTable::from_corpus(self.corpus))
        } else {
            Weighting::Raw
        };
        Ok(VectorSpace::build(
            self.corpus,
            self.thesaurus,
            &s.restriction,
            &weighting,
        )?)
    }

    /// Applies any transition request.
    pub fn apply(
        &self,
        s: &mut NavigationSession,
        transition: &Transition,
    ) -> Result<Outcome, NavError> {
        match transition {
            Transition::A { image } => self.t_a_rank_from_query_image(s, image),
            Transition::B { image } => self.t_b_mosaic_from_query_image(s, image),
            Transition::C { image } => self.t_c_graph_from_query_image(s, image),
            Transition::D { node } => self.t_d_expand_node(s, node),
            Transition::E { source, assignment } => self.t_e_groups_from(s, *source, assignment),
            Transition::F { judgments } => self.t_f_groups_from_mosaic(s, judgments),
            Transition::G => self.t_g_mosaic_from_ranked(s),
            Transition::H { origin } => self.t_h_graph_from(s, *origin),
            Transition::I {
                origin,
                name,
                annotation,
            } => self
                .t_i_album_from(s, *origin, name, annotation)
                .map(|album| Outcome {
                    album: Some(album),
                    warnings: Vec::new(),
                }),
            Transition::J { album } => self.t_j_search_from_album(s, album),
            Transition::K { judgments } => self.t_k_refresh_mosaic(s, judgments),
        }
    }

    /// Runs `f` on a copy of the session and commits it, with a log entry,
    /// only if `f` succeeds.
    fn step<T>(
        &self,
        s: &mut NavigationSession,
        letter: Letter,
        f: impl FnOnce(&mut NavigationSession) -> Result<T, NavError>,
    ) -> Result<T, NavError> {
        let mut draft = s.clone();
        let out = f(&mut draft)?;
        draft.transition_log.push(LogEntry {
            letter,
            at: self.clock.now(),
        });
        *s = draft;
        Ok(out)
    }

    fn require_image(&self, img: &ImageId) -> Result<(), NavError> {
        if self.corpus.contains(img.as_str()) {
            Ok(())
        } else {
            Err(NavError::UnknownImage(img.clone()))
        }
    }

    fn rank_query_image(&self, s: &mut NavigationSession, img: &ImageId) -> Result<(), NavError> {
        self.require_image(img)?;
        let space = self.space(s)?;
        let query = space.vector(img.as_str()).cloned().unwrap_or_default();
        let ranked = space.rank(&query, &BTreeSet::from([img.clone()]))?;
        s.current_query = Some(query);
        s.ranked = Some(ranked);
        Ok(())
    }

    fn mosaic_from_ranked(&self, s: &mut NavigationSession) -> Result<(), NavError> {
        let ranked = s.ranked.as_ref().ok_or(NavError::NoRankedList)?;
        let tiles: Vec<ImageId> = ranked
            .ids()
            .filter(|id| !s.judged_history.contains(*id))
            .take(s.config.mosaic_size)
            .cloned()
            .collect();
        let round = s.mosaic.as_ref().map_or(1, |m| m.round + 1);
        s.mosaic = Some(Mosaic::new(round, tiles));
        Ok(())
    }

    fn apply_judgments(
        s: &mut NavigationSession,
        judgments: &BTreeMap<ImageId, Judgment>,
    ) -> Result<(), NavError> {
        if judgments.is_empty() {
            return Ok(());
        }
        let mosaic = s.mosaic.as_mut().ok_or(NavError::NoMosaic)?;
        for (tile, judgment) in judgments {
            if !mosaic.judge(tile.as_str(), *judgment) {
                return Err(NavError::UnknownImage(tile.clone()));
            }
        }
        Ok(())
    }

    fn assign(s: &mut NavigationSession, image: ImageId, judgment: Judgment) {
        if judgment != Judgment::Neutral {
            s.judged_history.insert(image.clone());
        }
        s.groups.assign(image, judgment);
    }

    fn fold_mosaic(s: &mut NavigationSession) -> Result<(), NavError> {
        let mosaic = s.mosaic.as_ref().ok_or(NavError::NoMosaic)?;
        let moves: Vec<(ImageId, Judgment)> = mosaic
            .tiles
            .iter()
            .map(|t| (t.clone(), mosaic.judgment(t.as_str())))
            .collect();
        for (image, judgment) in moves {
            Self::assign(s, image, judgment);
        }
        Ok(())
    }

    /// (a) Ranked list of the corpus against a query image, the image itself excluded.
    pub fn t_a_rank_from_query_image(
        &self,
        s: &mut NavigationSession,
        img: &ImageId,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::A, |d| self.rank_query_image(d, img))?;
        Ok(Outcome::default())
    }

    /// (b) Mosaic from a query image; same result as (a) followed by (g).
    pub fn t_b_mosaic_from_query_image(
        &self,
        s: &mut NavigationSession,
        img: &ImageId,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::B, |d| {
            self.rank_query_image(d, img)?;
            self.mosaic_from_ranked(d)
        })?;
        Ok(Outcome::default())
    }

    /// (c) Graph around a query image, expanded once.
    pub fn t_c_graph_from_query_image(
        &self,
        s: &mut NavigationSession,
        img: &ImageId,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::C, |d| {
            self.require_image(img)?;
            let space = self.space(d)?;
            let mut graph = SimilarityGraph::new();
            graph.add_node(img.clone());
            graph.expand(&space, img, d.config.graph_k, d.config.edge_threshold);
            d.graph = Some(graph);
            Ok(())
        })?;
        Ok(Outcome::default())
    }

    /// (d) Expands one graph node with its nearest neighbors.
    pub fn t_d_expand_node(
        &self,
        s: &mut NavigationSession,
        node: &ImageId,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::D, |d| {
            let space = self.space(d)?;
            let (k, threshold) = (d.config.graph_k, d.config.edge_threshold);
            let graph = d.graph.as_mut().ok_or(NavError::NoGraph)?;
            if !graph.nodes.contains(node) {
                return Err(NavError::UnknownNode(node.clone()));
            }
            graph.expand(&space, node, k, threshold);
            Ok(())
        })?;
        Ok(Outcome::default())
    }

    /// (e) Judgments on graph nodes or ranked images go into the groups.
    /// Every graph node is judgeable, expanded or not.
    pub fn t_e_groups_from(
        &self,
        s: &mut NavigationSession,
        source: JudgeSource,
        assignment: &BTreeMap<ImageId, Judgment>,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::E, |d| {
            let members: BTreeSet<&ImageId> = match source {
                JudgeSource::Graph => d
                    .graph
                    .as_ref()
                    .ok_or(NavError::NoSource("graph"))?
                    .nodes
                    .iter()
                    .collect(),
                JudgeSource::RankedList => d
                    .ranked
                    .as_ref()
                    .ok_or(NavError::NoSource("ranked list"))?
                    .ids()
                    .collect(),
            };
            if let Some(bad) = assignment.keys().find(|id| !members.contains(id)) {
                return Err(NavError::UnknownImage(bad.clone()));
            }
            for (image, judgment) in assignment {
                Self::assign(d, image.clone(), *judgment);
            }
            Ok(())
        })?;
        Ok(Outcome::default())
    }

    /// (f) Mosaic judgments, after applying `judgments`, move into the groups.
    pub fn t_f_groups_from_mosaic(
        &self,
        s: &mut NavigationSession,
        judgments: &BTreeMap<ImageId, Judgment>,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::F, |d| {
            if d.mosaic.is_none() {
                return Err(NavError::NoMosaic);
            }
            Self::apply_judgments(d, judgments)?;
            Self::fold_mosaic(d)
        })?;
        Ok(Outcome::default())
    }

    /// (g) Mosaic of the best ranked images not yet chosen or rejected.
    pub fn t_g_mosaic_from_ranked(&self, s: &mut NavigationSession) -> Result<Outcome, NavError> {
        self.step(s, Letter::G, |d| self.mosaic_from_ranked(d))?;
        Ok(Outcome::default())
    }

    /// (h) Graph over seeds taken from the positive group (h1), the top of
    /// the ranked list (h2) or the mosaic tiles (h3).
    pub fn t_h_graph_from(
        &self,
        s: &mut NavigationSession,
        origin: Origin,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::H, |d| {
            let seeds: Vec<ImageId> = match origin {
                Origin::Groups => non_empty(
                    d.groups.positive.iter().cloned().collect(),
                    "positive group",
                )?,
                Origin::RankedList => non_empty(
                    d.ranked
                        .as_ref()
                        .ok_or(NavError::NoSource("ranked list"))?
                        .ids()
                        .take(d.config.graph_seed_count)
                        .cloned()
                        .collect(),
                    "ranked list",
                )?,
                Origin::Mosaic => non_empty(
                    d.mosaic.as_ref().ok_or(NavError::NoSource("mosaic"))?.tiles.clone(),
                    "mosaic",
                )?,
            };
            let space = self.space(d)?;
            d.graph = Some(SimilarityGraph::from_seeds(
                &space,
                &seeds,
                d.config.edge_threshold,
            ));
            Ok(())
        })?;
        Ok(Outcome::default())
    }

    /// (i) Archives the positive group (i1), the whole ranked list (i2) or
    /// the mosaic's chosen tiles (i3, all tiles when none is chosen).
    pub fn t_i_album_from(
        &self,
        s: &mut NavigationSession,
        origin: Origin,
        name: &str,
        annotation: &str,
    ) -> Result<Album, NavError> {
        self.step(s, Letter::I, |d| {
            let (images, created_from) = match origin {
                Origin::Groups => (
                    non_empty(d.groups.positive.iter().cloned().collect(), "positive group")?,
                    Provenance::Groups,
                ),
                Origin::RankedList => (
                    non_empty(
                        d.ranked
                            .as_ref()
                            .ok_or(NavError::NoSource("ranked list"))?
                            .ids()
                            .cloned()
                            .collect(),
                        "ranked list",
                    )?,
                    Provenance::RankedList,
                ),
                Origin::Mosaic => {
                    let mosaic = d.mosaic.as_ref().ok_or(NavError::NoSource("mosaic"))?;
                    let chosen = mosaic.tiles_judged(Judgment::Positive);
                    let images = if chosen.is_empty() {
                        mosaic.tiles.clone()
                    } else {
                        chosen
                    };
                    (non_empty(images, "mosaic")?, Provenance::Mosaic)
                }
            };
            Ok(self.albums.create(AlbumDraft {
                name: name.to_owned(),
                annotation: annotation.to_owned(),
                created_from,
                created_at: self.clock.now(),
                images,
            })?)
        })
    }

    /// (j) New search seeded by an album: the query is the positive-only
    /// reformulation of the album images, which are excluded from the ranking.
    pub fn t_j_search_from_album(
        &self,
        s: &mut NavigationSession,
        album_id: &AlbumId,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::J, |d| {
            let album = self
                .albums
                .get(album_id.as_str())?
                .ok_or_else(|| NavError::UnknownAlbum(album_id.clone()))?;
            let mut warnings = Vec::new();
            let mut present = Vec::new();
            for img in &album.images {
                if self.corpus.contains(img.as_str()) {
                    present.push(img.clone());
                } else {
                    log::warn!("album {album_id}: image {img} no longer in corpus");
                    warnings.push(format!("image {img} is no longer in the corpus"));
                }
            }
            if present.is_empty() {
                return Err(NavError::AlbumFullyStale);
            }
            let space = self.space(d)?;
            let positives = vectors_of(&space, &present);
            let query = match reformulate_query(None, &positives, &[], &d.config.rocchio)? {
                Reformulated::Query(q) => q,
                Reformulated::Degenerate => return Err(NavError::DegenerateQuery),
            };
            let exclude: BTreeSet<ImageId> = album.images.iter().cloned().collect();
            d.ranked = Some(space.rank(&query, &exclude)?);
            d.current_query = Some(query);
            Ok(Outcome {
                album: None,
                warnings,
            })
        })
    }

    /// (k) Folds the mosaic's judgments into the groups, reformulates the
    /// query from the positive and negative groups, re-ranks without any
    /// judged image and proposes the next mosaic.
    pub fn t_k_refresh_mosaic(
        &self,
        s: &mut NavigationSession,
        judgments: &BTreeMap<ImageId, Judgment>,
    ) -> Result<Outcome, NavError> {
        self.step(s, Letter::K, |d| {
            Self::apply_judgments(d, judgments)?;
            if d.mosaic.is_some() {
                Self::fold_mosaic(d)?;
            }
            let space = self.space(d)?;
            let positives = vectors_of(&space, d.groups.positive.iter());
            let negatives = vectors_of(&space, d.groups.negative.iter());
            if positives.is_empty() && negatives.is_empty() && d.current_query.is_none() {
                return Err(NavError::NoFeedback);
            }
            let query = match reformulate_query(
                d.current_query.as_ref(),
                &positives,
                &negatives,
                &d.config.rocchio,
            ) {
                Ok(Reformulated::Query(q)) => q,
                Ok(Reformulated::Degenerate) => return Err(NavError::DegenerateQuery),
                Err(VsmError::EmptyFeedback) => return Err(NavError::NoFeedback),
                Err(e) => return Err(e.into()),
            };
            d.ranked = Some(space.rank(&query, &d.judged_history)?);
            d.current_query = Some(query);
            self.mosaic_from_ranked(d)
        })?;
        Ok(Outcome::default())
    }

    /// Whole-corpus similarity graph under `scope`.
    pub fn corpus_graph(
        &self,
        scope: &Scope,
        threshold: f64,
        k: usize,
    ) -> Result<SimilarityGraph, NavError> {
        corpus_graph(self.corpus, self.thesaurus, scope, threshold, k)
    }
}

/// Whole-corpus similarity graph with raw weights.
pub fn corpus_graph(
    corpus: &Corpus,
    thesaurus: &Thesaurus,
    scope: &Scope,
    threshold: f64,
    k: usize,
) -> Result<SimilarityGraph, NavError> {
    if corpus.is_empty() {
        return Err(NavError::EmptyCorpus);
    }
    let space = VectorSpace::build(corpus, thesaurus, scope, &Weighting::Raw)?;
    Ok(build_similarity_graph(&space, threshold, k))
}

fn non_empty(ids: Vec<ImageId>, what: &'static str) -> Result<Vec<ImageId>, NavError> {
    if ids.is_empty() {
        Err(NavError::EmptySource(what))
    } else {
        Ok(ids)
    }
}

/// Non-empty vectors of `ids` under the space's scope.
fn vectors_of<'i>(
    space: &VectorSpace<'_>,
    ids: impl IntoIterator<Item = &'i ImageId>,
) -> Vec<TermVector> {
    ids.into_iter()
        .filter_map(|id| space.vector(id.as_str()))
        .filter(|v| !v.is_empty())
        .cloned()
        .collect()
}
