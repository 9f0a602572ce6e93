//! HTTP/JSON service and batch CLI over `lumiref-core`.
//!
//! Sessions live in memory behind one lock each and are snapshotted to disk
//! after every transition; albums go through a [`DirAlbumStore`].
//!
//! [`DirAlbumStore`]: lumiref_core::navigation::DirAlbumStore

pub mod api;
pub mod cli;
pub mod error;
pub mod search;
pub mod state;

pub use api::router;
pub use error::ApiError;
pub use state::AppState;
