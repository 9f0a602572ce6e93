use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::ids::{AlbumId, ImageId, SessionId};
use crate::navigation::graph::SimilarityGraph;
use crate::navigation::NavConfig;
use crate::vsm::{RankedList, Scope, TermVector};

/// A designer's opinion on one image: choose, reject, or no opinion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Positive,
    Negative,
    #[default]
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mosaic {
    pub round: u32,
    pub tiles: Vec<ImageId>,
    /// One entry per tile; tiles start out Neutral.
    pub judgments: BTreeMap<ImageId, Judgment>,
}

impl Mosaic {
    pub fn new(round: u32, tiles: Vec<ImageId>) -> Self {
        let judgments = tiles.iter().map(|t| (t.clone(), Judgment::Neutral)).collect();
        Self {
            round,
            tiles,
            judgments,
        }
    }

    /// Sets the judgment of a tile; `false` if `tile` is not on the mosaic.
    pub fn judge(&mut self, tile: &str, judgment: Judgment) -> bool {
        match self.judgments.get_mut(tile) {
            Some(slot) => {
                *slot = judgment;
                true
            }
            None => false,
        }
    }

    pub fn judgment(&self, tile: &str) -> Judgment {
        self.judgments.get(tile).copied().unwrap_or_default()
    }

    pub fn has_opinion(&self) -> bool {
        self.judgments.values().any(|j| *j != Judgment::Neutral)
    }

    /// Tiles judged `which`, in tile order.
    pub fn tiles_judged(&self, which: Judgment) -> Vec<ImageId> {
        self.tiles
            .iter()
            .filter(|t| self.judgment(t.as_str()) == which)
            .cloned()
            .collect()
    }
}

/// Positive, negative and neutral groups; pairwise disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSet {
    pub positive: BTreeSet<ImageId>,
    pub negative: BTreeSet<ImageId>,
    pub neutral: BTreeSet<ImageId>,
}

impl GroupSet {
    /// Places `image` in the group of `judgment`, removing it from the others.
    pub fn assign(&mut self, image: ImageId, judgment: Judgment) {
        self.positive.remove(&image);
        self.negative.remove(&image);
        self.neutral.remove(&image);
        match judgment {
            Judgment::Positive => self.positive.insert(image),
            Judgment::Negative => self.negative.insert(image),
            Judgment::Neutral => self.neutral.insert(image),
        };
    }

    pub fn judgment_of(&self, image: &str) -> Option<Judgment> {
        if self.positive.contains(image) {
            Some(Judgment::Positive)
        } else if self.negative.contains(image) {
            Some(Judgment::Negative)
        } else if self.neutral.contains(image) {
            Some(Judgment::Neutral)
        } else {
            None
        }
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty() && self.neutral.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.positive.is_disjoint(&self.negative)
            && self.positive.is_disjoint(&self.neutral)
            && self.negative.is_disjoint(&self.neutral)
    }
}

/// Structure an album was archived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Groups,
    RankedList,
    Mosaic,
}

/// Named, annotated, persisted set of images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Album {
    pub id: AlbumId,
    pub name: String,
    pub annotation: String,
    pub created_from: Provenance,
    pub created_at: DateTime<Utc>,
    pub images: Vec<ImageId>,
}

impl Album {
    pub fn to_canonical_string(&self) -> String {
        canonical::to_canonical_string(self).expect("album serializes")
    }

    pub fn from_canonical(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// The eleven transitions between navigation structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Letter {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
}

impl Letter {
    pub const ALL: [Letter; 11] = [
        Letter::A,
        Letter::B,
        Letter::C,
        Letter::D,
        Letter::E,
        Letter::F,
        Letter::G,
        Letter::H,
        Letter::I,
        Letter::J,
        Letter::K,
    ];

    pub fn as_char(self) -> char {
        (b'a' + self as u8) as char
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub letter: Letter,
    pub at: DateTime<Utc>,
}

/// Live navigation state of one designer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationSession {
    pub id: SessionId,
    /// Checksum of the corpus the session was opened on.
    pub corpus: String,
    pub restriction: Scope,
    pub config: NavConfig,
    pub current_query: Option<TermVector>,
    pub ranked: Option<RankedList>,
    pub mosaic: Option<Mosaic>,
    pub groups: GroupSet,
    pub graph: Option<SimilarityGraph>,
    /// Every image ever judged Positive or Negative in this session.
    pub judged_history: BTreeSet<ImageId>,
    pub transition_log: Vec<LogEntry>,
}

impl NavigationSession {
    pub fn letters(&self) -> Vec<Letter> {
        self.transition_log.iter().map(|e| e.letter).collect()
    }

    /// Snapshot file form.
    pub fn to_canonical_string(&self) -> String {
        canonical::to_canonical_string(self).expect("session serializes")
    }

    pub fn from_canonical(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Checks the structural invariants, returning the first broken one.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.groups.is_disjoint() {
            return Err("groups are not pairwise disjoint".into());
        }
        if let Some(x) = self
            .groups
            .positive
            .iter()
            .chain(&self.groups.negative)
            .find(|x| !self.judged_history.contains(*x))
        {
            return Err(format!("judged image {x} missing from history"));
        }
        if let Some(m) = &self.mosaic {
            let unique: BTreeSet<_> = m.tiles.iter().collect();
            if unique.len() != m.tiles.len() {
                return Err("mosaic tiles repeat".into());
            }
            if m.round < 1 {
                return Err("mosaic round below 1".into());
            }
            if m.judgments.keys().any(|k| !unique.contains(k)) {
                return Err("judgment on a non-tile".into());
            }
            if m.tiles.len() > self.config.mosaic_size {
                return Err("mosaic larger than mosaic_size".into());
            }
        }
        if let Some(g) = &self.graph {
            g.check(self.config.edge_threshold)?;
        }
        if let Some(r) = &self.ranked {
            let ids: BTreeSet<_> = r.ids().collect();
            if ids.len() != r.len() {
                return Err("ranked list repeats an image".into());
            }
            if r.entries
                .windows(2)
                .any(|w| w[0].score.value() < w[1].score.value())
            {
                return Err("ranked list out of order".into());
            }
        }
        Ok(())
    }
}
