//! Reference-image retrieval engine for ambience design.
//!
//! Images are indexed with 1–4 star weights over a seven-category thesaurus,
//! compared with the cosine coefficient of the vector-space model, and
//! explored through navigation sessions (ranked lists, mosaics, judgment
//! groups, similarity graphs and albums).

pub mod canonical;
pub mod catalog;
pub mod ids;
pub mod navigation;
pub mod thesaurus;
pub mod vsm;

pub use catalog::{Corpus, ImageRecord, IndexEntry, InformationalData, Violation};
pub use ids::{AlbumId, CategoryId, ImageId, SessionId, TermId};
pub use navigation::{
    Album, AlbumStore, Judgment, Mosaic, NavConfig, NavError, NavigationSession, Navigator,
    SimilarityGraph,
};
pub use thesaurus::{Category, Term, Thesaurus, ThesaurusError};
pub use vsm::{RankedList, Scope, SimilarityScore, TermVector, VsmError};
