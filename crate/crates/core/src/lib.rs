//! Emotion coherence analytics for presentation videos.
//!
//! The pipeline ingests recognizer output for three channels (face per frame,
//! text and audio per transcript segment), aligns them at sentence, word and
//! frame level, and derives the models behind the exploration views: a video
//! summary with coherence line, a face → text → audio flow model, a 2-D
//! projection of sentences, word statistics and audio-feature series.

pub mod analytics;
pub mod error;
pub mod fusion;
pub mod ingest;
pub mod model;
pub mod projection;
pub mod prosody;
pub mod store;
pub mod synth;
pub mod validate;

pub use error::{AnalysisError, IngestError, ModelError, StoreError};
pub use model::{dominant, Channel, Emotion, EmotionDistribution, FrameAnnotation, Segment, TimeSpan, VideoMeta, VideoRecord, WordToken};
pub use store::CorpusStore;
pub use validate::{validate, ValidationReport, Violation};
