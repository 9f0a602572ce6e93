//! Album persistence. Albums are global: any session may read any album.
//!
//! Ids are allocated sequentially (`album-0001`, `album-0002`, ...) so that
//! replaying a script against an empty store yields the same ids.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::ids::{AlbumId, ImageId};
use crate::navigation::model::{Album, Provenance};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("album store i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt album file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// Everything about an album except its id.
#[derive(Debug, Clone)]
pub struct AlbumDraft {
    pub name: String,
    pub annotation: String,
    pub created_from: Provenance,
    pub created_at: DateTime<Utc>,
    pub images: Vec<ImageId>,
}

pub trait AlbumStore: Send + Sync {
    /// Assigns a fresh id, stores the album and returns it.
    fn create(&self, draft: AlbumDraft) -> Result<Album, StoreError>;
    fn get(&self, id: &str) -> Result<Option<Album>, StoreError>;
    /// All albums in id order.
    fn list(&self) -> Result<Vec<Album>, StoreError>;
}

fn album_id(seq: u64) -> AlbumId {
    AlbumId::new(format!("album-{seq:04}"))
}

fn parse_seq(id: &str) -> Option<u64> {
    id.strip_prefix("album-")?.parse().ok()
}

fn finish(draft: AlbumDraft, id: AlbumId) -> Album {
    Album {
        id,
        name: draft.name,
        annotation: draft.annotation,
        created_from: draft.created_from,
        created_at: draft.created_at,
        images: draft.images,
    }
}

#[derive(Debug, Default)]
pub struct MemoryAlbumStore {
    albums: Mutex<BTreeMap<AlbumId, Album>>,
}

impl MemoryAlbumStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AlbumStore for MemoryAlbumStore {
    fn create(&self, draft: AlbumDraft) -> Result<Album, StoreError> {
        let mut albums = self.albums.lock().expect("album store poisoned");
        let next = albums.keys().filter_map(|k| parse_seq(k.as_str())).max().unwrap_or(0) + 1;
        let album = finish(draft, album_id(next));
        albums.insert(album.id.clone(), album.clone());
        Ok(album)
    }

    fn get(&self, id: &str) -> Result<Option<Album>, StoreError> {
        Ok(self.albums.lock().expect("album store poisoned").get(id).cloned())
    }

    fn list(&self) -> Result<Vec<Album>, StoreError> {
        Ok(self.albums.lock().expect("album store poisoned").values().cloned().collect())
    }
}

/// One canonical JSON file per album, `<dir>/<id>.json`.
#[derive(Debug)]
pub struct DirAlbumStore {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl DirAlbumStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(".json") {
                if parse_seq(id).is_some() {
                    ids.push(id.to_owned());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn read(&self, path: &Path) -> Result<Album, StoreError> {
        let text = fs::read_to_string(path)?;
        Album::from_canonical(&text).map_err(|e| StoreError::Corrupt {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }
}

impl AlbumStore for DirAlbumStore {
    fn create(&self, draft: AlbumDraft) -> Result<Album, StoreError> {
        let _guard = self.lock.lock().expect("album store poisoned");
        let next = self
            .ids()?
            .iter()
            .filter_map(|id| parse_seq(id))
            .max()
            .unwrap_or(0)
            + 1;
        let album = finish(draft, album_id(next));
        let path = self.path_of(album.id.as_str());
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, album.to_canonical_string())?;
        fs::rename(&tmp, &path)?;
        Ok(album)
    }

    fn get(&self, id: &str) -> Result<Option<Album>, StoreError> {
        if parse_seq(id).is_none() {
            return Ok(None);
        }
        let path = self.path_of(id);
        if !path.exists() {
            return Ok(None);
        }
        self.read(&path).map(Some)
    }

    fn list(&self) -> Result<Vec<Album>, StoreError> {
        self.ids()?
            .iter()
            .map(|id| self.read(&self.path_of(id)))
            .collect()
    }
}
