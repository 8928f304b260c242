//! Response bodies, shared by the HTTP handlers and `export`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use emotion_coherence::analytics::{Barcode, SankeyModel, SummaryMetrics, WordSortKey, WordStat};
use emotion_coherence::fusion::{CoherencePoint, ConfidenceSeries, Dominant, SentenceFusion, TransitionPoint};
use emotion_coherence::projection::ProjectionModel;
use emotion_coherence::prosody::ProsodySet;
use emotion_coherence::{CorpusStore, TimeSpan, VideoMeta, WordToken};

use crate::error::ApiError;
use crate::query::ProjectionQuery;

/// Sentences shown on each side of a selected one.
pub const CONTEXT_SENTENCES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceBrief {
    pub id: usize,
    #[serde(flatten)]
    pub span: TimeSpan,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VideoDetail {
    pub meta: VideoMeta,
    pub has_audio: bool,
    pub barcode: Barcode,
    pub coherence_line: Vec<CoherencePoint>,
    pub metrics: SummaryMetrics,
    pub sentences: Vec<SentenceBrief>,
}

pub fn video_detail(store: &CorpusStore, id: &str) -> Result<VideoDetail, ApiError> {
    let record = store.record(id)?;
    let summary = store.summary(id)?;
    Ok(VideoDetail {
        meta: record.meta.clone(),
        has_audio: record.audio.is_some(),
        barcode: summary.barcode.clone(),
        coherence_line: summary.coherence_line.clone(),
        metrics: summary.metrics.clone(),
        sentences: record
            .segments
            .iter()
            .map(|s| SentenceBrief { id: s.id, span: s.span, text: s.text.clone() })
            .collect(),
    })
}

/// A neighbouring sentence; `offset` is its position relative to the selected one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContextSentence {
    pub offset: i64,
    pub segment_id: usize,
    #[serde(flatten)]
    pub span: TimeSpan,
    pub text: String,
    pub face_emotion: Option<Dominant>,
    pub text_emotion: Option<Dominant>,
    pub audio_emotion: Option<Dominant>,
    pub coherence_degree: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceDetail {
    pub video_id: String,
    pub text: String,
    pub words: Vec<WordToken>,
    pub fusion: SentenceFusion,
    pub context: Vec<ContextSentence>,
    /// Feature series within the sentence span; `null` without audio.
    pub prosody: Option<ProsodySet>,
    pub transitions: Vec<TransitionPoint>,
    pub confidence: ConfidenceSeries,
}

pub fn sentence_detail(store: &CorpusStore, id: &str, segment_id: usize) -> Result<SentenceDetail, ApiError> {
    let record = store.record(id)?;
    let segment = record
        .segment(segment_id)
        .ok_or_else(|| ApiError::not_found(format!("no segment {segment_id} in `{id}`")))?;
    let fusions = store.fusions(id)?;
    let fusion = fusions[segment_id].clone();
    let lo = segment_id.saturating_sub(CONTEXT_SENTENCES);
    let hi = (segment_id + CONTEXT_SENTENCES + 1).min(fusions.len());
    let context = (lo..hi)
        .filter(|&i| i != segment_id)
        .map(|i| {
            let f = &fusions[i];
            ContextSentence {
                offset: i as i64 - segment_id as i64,
                segment_id: i,
                span: f.span,
                text: record.segments[i].text.clone(),
                face_emotion: f.face_emotion,
                text_emotion: f.text_emotion,
                audio_emotion: f.audio_emotion,
                coherence_degree: f.coherence_degree,
            }
        })
        .collect();
    let prosody = store.prosody(id)?.map(|p| p.slice(&segment.span));
    Ok(SentenceDetail {
        video_id: id.to_string(),
        text: segment.text.clone(),
        words: segment.words.clone(),
        transitions: fusion.transitions.clone(),
        fusion,
        context,
        prosody,
        confidence: emotion_coherence::fusion::confidence_series(record, segment),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WordTable {
    pub video_id: String,
    pub sort: String,
    pub words: Vec<WordStat>,
}

pub fn word_table(store: &CorpusStore, id: &str, sort: Option<&str>, filter: Option<&str>) -> Result<WordTable, ApiError> {
    let sort = sort.unwrap_or("frequency");
    let key: WordSortKey = sort.parse()?;
    Ok(WordTable { video_id: id.to_string(), sort: sort.to_string(), words: store.words(id, key, filter)? })
}

pub fn sankey(store: &CorpusStore, id: &str) -> Result<Arc<SankeyModel>, ApiError> {
    Ok(store.sankey(id)?)
}

pub fn projection(store: &CorpusStore, id: &str, q: &ProjectionQuery) -> Result<Arc<ProjectionModel>, ApiError> {
    Ok(store.projection(id, &q.params()?)?)
}
