//! The corpus store: ingested videos plus lazily computed, cached derived models.
//!
//! Derived models are computed at most once per cache key, even under
//! concurrent requests. Keys combine the digest of the video's input bytes with
//! a digest of the parameters, so identical inputs always map to identical
//! models. When the store lives on disk, serializable models are also written
//! under `cache/` and read back on later opens.
//!
//! On-disk layout:
//!
//! ```text
//! <store>/store.json          options used when loading videos
//! <store>/videos/<id>/...     one bundle per video, copied verbatim
//! <store>/cache/<key>.json    derived models
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::hash::Hash;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{build_sankey, build_summary, word_table, Lexicons, SankeyModel, SankeyParams, ScoreWeighting, VideoSummary, WordSortKey, WordStat};
use crate::error::{AnalysisError, IngestError, StoreError};
use crate::fusion::{fuse_video, fuse_words, FusionParams, SentenceFusion, WordFusion};
use crate::ingest::{load_bundle_with, BundleManifest, IngestOptions, LoadedBundle};
use crate::model::VideoRecord;
use crate::projection::{build_projection, ProjectionModel, ProjectionParams};
use crate::prosody::{ProsodyParams, ProsodySet};

const STORE_FILE: &str = "store.json";
const VIDEOS_DIR: &str = "videos";
const CACHE_DIR: &str = "cache";

/// Compute-once cache: the first caller for a key runs the computation, any
/// concurrent callers for the same key wait for its result.
pub struct SingleFlight<K, V> {
    slots: Mutex<HashMap<K, Arc<OnceLock<V>>>>,
    computations: AtomicUsize,
}

impl<K: Eq + Hash + Clone, V: Clone> SingleFlight<K, V> {
    pub fn new() -> Self {
        Self { slots: Mutex::new(HashMap::new()), computations: AtomicUsize::new(0) }
    }

    pub fn get_or_compute(&self, key: &K, compute: impl FnOnce() -> V) -> V {
        let slot = {
            let mut slots = self.slots.lock().expect("cache lock poisoned");
            Arc::clone(slots.entry(key.clone()).or_default())
        };
        slot.get_or_init(|| {
            self.computations.fetch_add(1, Ordering::SeqCst);
            compute()
        })
        .clone()
    }

    /// Number of computations run so far.
    pub fn computations(&self) -> usize {
        self.computations.load(Ordering::SeqCst)
    }
}

impl<K: Eq + Hash + Clone, V: Clone> Default for SingleFlight<K, V> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct StoreOptions {
    pub ingest: IngestOptions,
    pub fusion: FusionParams,
    pub prosody: ProsodyParams,
    pub sankey: SankeyParams,
    pub score_weighting: ScoreWeighting,
}

#[derive(Debug)]
pub struct VideoEntry {
    pub record: VideoRecord,
    /// Digest of the bundle's input bytes and ingest options.
    pub digest: String,
    pub media: Option<PathBuf>,
}

type Shared<T> = Result<Arc<T>, AnalysisError>;

/// In-memory corpus with derived-model caches.
pub struct CorpusStore {
    videos: BTreeMap<String, Arc<VideoEntry>>,
    options: StoreOptions,
    lexicons: Lexicons,
    cache_dir: Option<PathBuf>,
    fusions: SingleFlight<String, Arc<Vec<SentenceFusion>>>,
    words: SingleFlight<String, Arc<Vec<WordFusion>>>,
    prosody: SingleFlight<String, Result<Option<Arc<ProsodySet>>, AnalysisError>>,
    summaries: SingleFlight<String, Arc<VideoSummary>>,
    sankeys: SingleFlight<String, Arc<SankeyModel>>,
    projections: SingleFlight<String, Shared<ProjectionModel>>,
}

fn param_digest<T: Serialize>(params: &T) -> String {
    let bytes = serde_json::to_vec(params).expect("parameters serialize");
    hex::encode(&Sha256::digest(bytes)[..8])
}

impl CorpusStore {
    pub fn new(options: StoreOptions) -> Self {
        Self {
            videos: BTreeMap::new(),
            options,
            lexicons: Lexicons::bundled(),
            cache_dir: None,
            fusions: SingleFlight::new(),
            words: SingleFlight::new(),
            prosody: SingleFlight::new(),
            summaries: SingleFlight::new(),
            sankeys: SingleFlight::new(),
            projections: SingleFlight::new(),
        }
    }

    pub fn options(&self) -> &StoreOptions {
        &self.options
    }

    /// Adds a loaded bundle. Ids must be unique.
    pub fn insert(&mut self, bundle: LoadedBundle) -> Result<(), IngestError> {
        let id = bundle.record.meta.id.clone();
        if self.videos.contains_key(&id) {
            return Err(IngestError::DuplicateId(id));
        }
        let entry = VideoEntry { record: bundle.record, digest: bundle.digest, media: bundle.media };
        self.videos.insert(id, Arc::new(entry));
        Ok(())
    }

    /// Adds an in-memory record, deriving its digest from the serialized record.
    pub fn insert_record(&mut self, record: VideoRecord) -> Result<(), IngestError> {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&record.meta).expect("meta serializes"));
        hasher.update(serde_json::to_vec(&record.frames).expect("frames serialize"));
        hasher.update(serde_json::to_vec(&record.segments).expect("segments serialize"));
        hasher.update(serde_json::to_vec(&record.laughter).expect("laughter serializes"));
        if let Some(audio) = &record.audio {
            hasher.update(audio.sample_rate.to_le_bytes());
            for s in &audio.samples {
                hasher.update(s.to_le_bytes());
            }
        }
        let digest = hex::encode(hasher.finalize());
        self.insert(LoadedBundle { record, digest, media: None })
    }

    /// Opens a store directory written by [`ingest_into`].
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, IngestError> {
        let dir = dir.as_ref();
        let options = read_options(dir)?;
        let mut store = CorpusStore::new(options);
        store.cache_dir = Some(dir.join(CACHE_DIR));
        let videos_dir = dir.join(VIDEOS_DIR);
        if videos_dir.is_dir() {
            let mut bundles: Vec<PathBuf> = fs::read_dir(&videos_dir)
                .map_err(|e| IngestError::io(&videos_dir, e))?
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.is_dir())
                .collect();
            bundles.sort();
            for bundle in bundles {
                let manifest = BundleManifest::from_dir(&bundle)?;
                store.insert(load_bundle_with(&manifest, &options.ingest)?)?;
            }
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.videos.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.videos.keys().map(String::as_str)
    }

    pub fn entry(&self, id: &str) -> Result<&Arc<VideoEntry>, StoreError> {
        self.videos.get(id).ok_or_else(|| StoreError::UnknownVideo(id.to_string()))
    }

    pub fn record(&self, id: &str) -> Result<&VideoRecord, StoreError> {
        Ok(&self.entry(id)?.record)
    }

    fn key(&self, entry: &VideoEntry, kind: &str, params: &impl Serialize) -> String {
        format!("{}-{kind}-{}", &entry.digest[..16], param_digest(params))
    }

    /// Read-through to the on-disk cache.
    fn persisted<T: Serialize + DeserializeOwned>(&self, key: &str, compute: impl FnOnce() -> T) -> T {
        let Some(dir) = &self.cache_dir else { return compute() };
        let path = dir.join(format!("{key}.json"));
        if let Some(value) = fs::read(&path).ok().and_then(|b| serde_json::from_slice(&b).ok()) {
            return value;
        }
        let value = compute();
        // A failed write only costs a recomputation on the next open.
        if fs::create_dir_all(dir).is_ok() {
            if let Ok(body) = serde_json::to_vec(&value) {
                let tmp = path.with_extension(format!("tmp{}", std::process::id()));
                if fs::write(&tmp, body).is_ok() {
                    let _ = fs::rename(&tmp, &path);
                }
            }
        }
        value
    }

    pub fn fusions(&self, id: &str) -> Result<Arc<Vec<SentenceFusion>>, StoreError> {
        let entry = self.entry(id)?;
        let key = self.key(entry, "fusion", &self.options.fusion);
        Ok(self.fusions.get_or_compute(&key, || Arc::new(fuse_video(&entry.record, &self.options.fusion))))
    }

    pub fn word_fusions(&self, id: &str) -> Result<Arc<Vec<WordFusion>>, StoreError> {
        let entry = self.entry(id)?;
        let key = self.key(entry, "words", &());
        Ok(self.words.get_or_compute(&key, || Arc::new(fuse_words(&entry.record))))
    }

    /// Prosody of the video's audio, `None` when it has no audio.
    pub fn prosody(&self, id: &str) -> Result<Option<Arc<ProsodySet>>, StoreError> {
        let entry = self.entry(id)?;
        let key = self.key(entry, "prosody", &self.options.prosody);
        let result = self.prosody.get_or_compute(&key, || {
            entry
                .record
                .audio
                .as_ref()
                .map(|a| ProsodySet::compute(a, &self.options.prosody).map(Arc::new))
                .transpose()
        });
        Ok(result?)
    }

    pub fn summary(&self, id: &str) -> Result<Arc<VideoSummary>, StoreError> {
        let entry = self.entry(id)?;
        let fusions = self.fusions(id)?;
        let key = self.key(entry, "summary", &(self.options.fusion, self.options.score_weighting));
        Ok(self.summaries.get_or_compute(&key, || {
            Arc::new(self.persisted(&key, || build_summary(&entry.record, &fusions, self.options.score_weighting)))
        }))
    }

    pub fn sankey(&self, id: &str) -> Result<Arc<SankeyModel>, StoreError> {
        let entry = self.entry(id)?;
        let fusions = self.fusions(id)?;
        let prosody = self.prosody(id)?;
        let key = self.key(entry, "sankey", &(self.options.fusion, self.options.prosody, self.options.sankey));
        Ok(self.sankeys.get_or_compute(&key, || {
            Arc::new(self.persisted(&key, || {
                build_sankey(&entry.record, &fusions, prosody.as_deref(), &self.lexicons, &self.options.sankey)
            }))
        }))
    }

    pub fn projection(&self, id: &str, params: &ProjectionParams) -> Result<Arc<ProjectionModel>, StoreError> {
        let entry = self.entry(id)?;
        let fusions = self.fusions(id)?;
        let key = self.key(entry, "projection", &(self.options.fusion, params));
        let result = self.projections.get_or_compute(&key, || {
            let model = match self.cache_dir {
                Some(_) => {
                    let computed = self.persisted(&key, || build_projection(id, &fusions, params).map_err(|e| e.to_string()));
                    computed.map_err(AnalysisError::DegenerateInput)
                }
                None => build_projection(id, &fusions, params),
            };
            model.map(Arc::new)
        });
        Ok(result?)
    }

    pub fn words(&self, id: &str, key: WordSortKey, filter: Option<&str>) -> Result<Vec<WordStat>, StoreError> {
        Ok(word_table(&self.word_fusions(id)?, key, filter))
    }

    /// Total derived-model computations performed by this store.
    pub fn computations(&self) -> usize {
        self.fusions.computations()
            + self.words.computations()
            + self.prosody.computations()
            + self.summaries.computations()
            + self.sankeys.computations()
            + self.projections.computations()
    }
}

fn read_options(dir: &Path) -> Result<StoreOptions, IngestError> {
    let path = dir.join(STORE_FILE);
    if !path.is_file() {
        return Ok(StoreOptions::default());
    }
    let bytes = fs::read(&path).map_err(|e| IngestError::io(&path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| IngestError::Parse {
        path,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestedVideo {
    pub id: String,
    pub digest: String,
    pub segments: usize,
    pub frames: usize,
}

fn copy_bundle(manifest: &BundleManifest, dest: &Path) -> Result<(), IngestError> {
    fs::create_dir_all(dest).map_err(|e| IngestError::io(dest, e))?;
    let files = [Some(&manifest.meta), Some(&manifest.frames), Some(&manifest.segments)]
        .into_iter()
        .chain([manifest.laughter.as_ref(), manifest.audio.as_ref(), manifest.media.as_ref()])
        .flatten();
    for src in files {
        let name = src.file_name().expect("bundle files have names");
        let to = dest.join(name);
        fs::copy(src, &to).map_err(|e| IngestError::io(&to, e))?;
    }
    Ok(())
}

/// Validates bundles and copies them into the store directory, then warms the
/// derived-model cache. Ids must be unique across the batch and the existing store.
pub fn ingest_into(store_dir: &Path, bundles: &[PathBuf]) -> Result<Vec<IngestedVideo>, IngestError> {
    fs::create_dir_all(store_dir).map_err(|e| IngestError::io(store_dir, e))?;
    let options_path = store_dir.join(STORE_FILE);
    if !options_path.exists() {
        let body = serde_json::to_vec_pretty(&StoreOptions::default()).expect("options serialize");
        fs::write(&options_path, body).map_err(|e| IngestError::io(&options_path, e))?;
    }
    let options = read_options(store_dir)?;
    let videos_dir = store_dir.join(VIDEOS_DIR);

    let mut loaded = Vec::new();
    for dir in bundles {
        let manifest = BundleManifest::from_dir(dir)?;
        let bundle = load_bundle_with(&manifest, &options.ingest)?;
        let id = bundle.record.meta.id.clone();
        if loaded.iter().any(|(_, b): &(BundleManifest, LoadedBundle)| b.record.meta.id == id) || videos_dir.join(&id).exists() {
            return Err(IngestError::DuplicateId(id));
        }
        loaded.push((manifest, bundle));
    }
    let mut out = Vec::new();
    for (manifest, bundle) in &loaded {
        copy_bundle(manifest, &videos_dir.join(&bundle.record.meta.id))?;
        out.push(IngestedVideo {
            id: bundle.record.meta.id.clone(),
            digest: bundle.digest.clone(),
            segments: bundle.record.segments.len(),
            frames: bundle.record.frames.len(),
        });
    }

    let store = CorpusStore::open(store_dir)?;
    for video in &out {
        // Warming is best effort; failures resurface when the model is requested.
        let _ = store.summary(&video.id);
        let _ = store.sankey(&video.id);
        let _ = store.projection(&video.id, &ProjectionParams::default());
    }
    Ok(out)
}
