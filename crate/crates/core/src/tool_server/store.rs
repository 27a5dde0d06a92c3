use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::ingestion::{load_scene, IngestError};
use crate::scene_graph::SceneGraph;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid scene id '{0}'")]
    InvalidId(String),
    #[error("unknown scene '{0}'")]
    NotFound(String),
    #[error("scene '{id}' failed to load: {source}")]
    Load {
        id: String,
        #[source]
        source: IngestError,
    },
}

/// Scene ids name files, so only a conservative alphabet is allowed.
pub fn is_valid_scene_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Loaded scenes, shared read-only between sessions. Scene `x` is read
/// from `<dir>/x.json` on first use.
#[derive(Debug, Default)]
pub struct SceneStore {
    dir: Option<PathBuf>,
    cache: Mutex<BTreeMap<String, Arc<SceneGraph>>>,
}

impl SceneStore {
    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            cache: Mutex::default(),
        }
    }

    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn insert(&self, id: impl Into<String>, scene: Arc<SceneGraph>) {
        self.cache.lock().expect("scene cache poisoned").insert(id.into(), scene);
    }

    pub fn get(&self, id: &str) -> Result<Arc<SceneGraph>, StoreError> {
        if !is_valid_scene_id(id) {
            return Err(StoreError::InvalidId(id.to_string()));
        }
        if let Some(s) = self.cache.lock().expect("scene cache poisoned").get(id) {
            return Ok(Arc::clone(s));
        }
        let path = self
            .dir
            .as_ref()
            .map(|d| d.join(format!("{id}.json")))
            .filter(|p| p.is_file())
            .ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        let scene = Arc::new(load_scene(&path).map_err(|source| StoreError::Load {
            id: id.to_string(),
            source,
        })?);
        log::info!("loaded scene {id} ({} nodes)", scene.node_count());
        let mut cache = self.cache.lock().expect("scene cache poisoned");
        Ok(Arc::clone(cache.entry(id.to_string()).or_insert(scene)))
    }

    /// Ids of every scene file in the directory plus cached scenes.
    pub fn scene_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.cache.lock().expect("scene cache poisoned").keys().cloned().collect();
        if let Some(entries) = self.dir.as_ref().and_then(|d| fs::read_dir(d).ok()) {
            for e in entries.flatten() {
                let p = e.path();
                if p.extension().is_some_and(|x| x == "json") {
                    if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                        if is_valid_scene_id(stem) {
                            ids.push(stem.to_string());
                        }
                    }
                }
            }
        }
        ids.sort();
        ids.dedup();
        ids
    }
}
