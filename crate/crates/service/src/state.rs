//! Shared service state: the immutable corpus and thesaurus, the album
//! store, and live sessions each behind their own lock.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use lumiref_core::catalog::Corpus;
use lumiref_core::ids::SessionId;
use lumiref_core::navigation::{
    AlbumStore, Clock, NavConfig, NavigationSession, Navigator, Outcome, Transition,
};
use lumiref_core::thesaurus::Thesaurus;
use lumiref_core::vsm::Scope;
use serde_json::Value;
use tokio::sync::Mutex;

use crate::error::ApiError;

pub type SessionHandle = Arc<Mutex<NavigationSession>>;

pub struct AppState {
    pub thesaurus: Arc<Thesaurus>,
    pub corpus: Arc<Corpus>,
    pub checksum: String,
    pub albums: Arc<dyn AlbumStore>,
    pub clock: Arc<dyn Clock>,
    pub defaults: NavConfig,
    sessions: RwLock<BTreeMap<SessionId, SessionHandle>>,
    next_session: AtomicU64,
    session_dir: Option<PathBuf>,
}

fn session_seq(id: &str) -> Option<u64> {
    id.strip_prefix("session-")?.parse().ok()
}

impl AppState {
    /// Builds the state; with a `session_dir`, snapshots found there for the
    /// same corpus are resumed and every later transition is persisted.
    pub fn new(
        thesaurus: Arc<Thesaurus>,
        corpus: Arc<Corpus>,
        albums: Arc<dyn AlbumStore>,
        clock: Arc<dyn Clock>,
        defaults: NavConfig,
        session_dir: Option<PathBuf>,
    ) -> Result<Self, ApiError> {
        defaults.validate()?;
        let checksum = corpus.checksum();
        let mut sessions = BTreeMap::new();
        if let Some(dir) = &session_dir {
            fs::create_dir_all(dir).map_err(store_failure)?;
            for s in load_snapshots(dir)? {
                if s.corpus == checksum {
                    sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
                } else {
                    log::warn!("dropping session {}: recorded for another corpus", s.id);
                }
            }
        }
        let next = sessions
            .keys()
            .filter_map(|id| session_seq(id.as_str()))
            .max()
            .unwrap_or(0)
            + 1;
        Ok(Self {
            thesaurus,
            corpus,
            checksum,
            albums,
            clock,
            defaults,
            sessions: RwLock::new(sessions),
            next_session: AtomicU64::new(next),
            session_dir,
        })
    }

    pub fn navigator(&self) -> Navigator<'_> {
        Navigator::new(&self.thesaurus, &self.corpus, &*self.albums, &*self.clock)
    }

    /// Server defaults with `overrides` (a partial config object) laid over them.
    pub fn config_with(&self, overrides: Option<&Value>) -> Result<NavConfig, ApiError> {
        let mut base = serde_json::to_value(self.defaults).expect("config serializes");
        if let Some(o) = overrides {
            merge(&mut base, o, "config")?;
        }
        serde_json::from_value(base).map_err(|e| ApiError::malformed(format!("config: {e}")))
    }

    pub fn open_session(
        &self,
        restriction: Scope,
        config: NavConfig,
    ) -> Result<NavigationSession, ApiError> {
        // validate before allocating so rejected requests leave no gap in ids
        restriction.check(&self.thesaurus)?;
        config.validate()?;
        let seq = self.next_session.fetch_add(1, Ordering::SeqCst);
        let id = SessionId::new(format!("session-{seq:04}"));
        let session = self.navigator().open_session(id.clone(), restriction, config)?;
        self.persist(&session)?;
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    pub fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_session(id))
    }

    pub fn session_ids(&self) -> Vec<SessionId> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .keys()
            .cloned()
            .collect()
    }

    /// Applies one transition under the session's lock and persists the
    /// result; on error the session is unchanged.
    pub async fn transition(
        &self,
        id: &str,
        transition: &Transition,
    ) -> Result<(NavigationSession, Outcome), ApiError> {
        let handle = self.session(id)?;
        let mut session = handle.lock().await;
        let outcome = self.navigator().apply(&mut session, transition)?;
        self.persist(&session)?;
        Ok((session.clone(), outcome))
    }

    fn persist(&self, session: &NavigationSession) -> Result<(), ApiError> {
        let Some(dir) = &self.session_dir else {
            return Ok(());
        };
        let path = dir.join(format!("{}.json", session.id));
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, session.to_canonical_string()).map_err(store_failure)?;
        fs::rename(&tmp, &path).map_err(store_failure)
    }
}

fn store_failure(e: std::io::Error) -> ApiError {
    ApiError::new("StoreFailure", format!("session store: {e}"))
}

fn load_snapshots(dir: &Path) -> Result<Vec<NavigationSession>, ApiError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(store_failure)? {
        let path = entry.map_err(store_failure)?.path();
        let is_snapshot = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".json"))
            .is_some_and(|n| session_seq(n).is_some());
        if !is_snapshot {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(store_failure)?;
        match NavigationSession::from_canonical(&text) {
            Ok(s) => out.push(s),
            Err(e) => log::warn!("skipping unreadable session {}: {e}", path.display()),
        }
    }
    Ok(out)
}

/// Overlays `patch` on `base`, refusing keys `base` does not have.
fn merge(base: &mut Value, patch: &Value, at: &str) -> Result<(), ApiError> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (key, value) in p {
                let path = format!("{at}.{key}");
                let slot = b
                    .get_mut(key)
                    .ok_or_else(|| ApiError::malformed(format!("unknown field {path}")))?;
                merge(slot, value, &path)?;
            }
            Ok(())
        }
        (Value::Object(_), _) => Err(ApiError::malformed(format!("{at} must be an object"))),
        (slot, value) => {
            *slot = value.clone();
            Ok(())
        }
    }
}
