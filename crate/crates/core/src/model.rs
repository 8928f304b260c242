//! Domain types shared by every stage of the pipeline.
//!
//! A [`VideoRecord`] is one ingested talk: per-frame face annotations, transcript
//! segments with word timings and per-segment text/audio emotions, laughter spans
//! and optionally the raw audio track. All types are plain data and are never
//! mutated after ingestion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// The unified emotion category set across face, text and audio recognizers.
///
/// Variants are declared in canonical (alphabetical) order, so the derived
/// `Ord` is the tie-breaking order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Contempt,
    Disgust,
    Fear,
    Happiness,
    Neutral,
    Sadness,
    Surprise,
}

impl Emotion {
    pub const COUNT: usize = 8;

    /// All categories in canonical order.
    pub const ALL: [Emotion; Emotion::COUNT] = [
        Emotion::Anger,
        Emotion::Contempt,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happiness,
        Emotion::Neutral,
        Emotion::Sadness,
        Emotion::Surprise,
    ];

    /// Position in the canonical order, used as a vector coordinate.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Contempt => "contempt",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Happiness => "happiness",
            Emotion::Neutral => "neutral",
            Emotion::Sadness => "sadness",
            Emotion::Surprise => "surprise",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::UnknownEmotion(s.to_string()))
    }
}

/// One of the three behavioral channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Face,
    Text,
    Audio,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Face, Channel::Text, Channel::Audio];

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Face => "face",
            Channel::Text => "text",
            Channel::Audio => "audio",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ModelError::UnknownChannel(s.to_string()))
    }
}

/// Recognizer confidences per category. Absent categories count as zero.
///
/// Confidences are not required to sum to one; an empty distribution means
/// "no detection".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmotionDistribution(BTreeMap<Emotion, f64>);

impl EmotionDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    /// A distribution with all mass on one category.
    pub fn one_hot(emotion: Emotion) -> Self {
        Self::from_iter([(emotion, 1.0)])
    }

    pub fn get(&self, emotion: Emotion) -> f64 {
        self.0.get(&emotion).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, emotion: Emotion, confidence: f64) {
        self.0.insert(emotion, confidence);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Emotion, f64)> + '_ {
        self.0.iter().map(|(e, c)| (*e, *c))
    }

    /// Dense vector in canonical category order.
    pub fn to_vector(&self) -> [f64; Emotion::COUNT] {
        let mut v = [0.0; Emotion::COUNT];
        for (e, c) in self.iter() {
            v[e.index()] = c;
        }
        v
    }

    /// True when at least one category carries positive confidence.
    pub fn is_detection(&self) -> bool {
        self.0.values().any(|c| *c > 0.0)
    }

    /// Category with maximal confidence; ties go to the canonically first category.
    pub fn dominant(&self) -> Result<(Emotion, f64), ModelError> {
        dominant(self)
    }
}

impl FromIterator<(Emotion, f64)> for EmotionDistribution {
    fn from_iter<I: IntoIterator<Item = (Emotion, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Category with maximal confidence; ties broken by canonical order.
///
/// Fails with [`ModelError::NoDetection`] when no category has positive
/// confidence.
pub fn dominant(dist: &EmotionDistribution) -> Result<(Emotion, f64), ModelError> {
    let mut best: Option<(Emotion, f64)> = None;
    for emotion in Emotion::ALL {
        let c = dist.get(emotion);
        if c > 0.0 && best.is_none_or(|(_, b)| c > b) {
            best = Some((emotion, c));
        }
    }
    best.ok_or(ModelError::NoDetection)
}

/// Half-open time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start: f64,
    pub end: f64,
}

impl TimeSpan {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_valid(&self) -> bool {
        self.start.is_finite() && self.end.is_finite() && self.start >= 0.0 && self.end > self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn contains_span(&self, other: &TimeSpan) -> bool {
        other.start >= self.start && other.end <= self.end
    }

    /// Length of the intersection with `other`, zero when disjoint.
    pub fn overlap(&self, other: &TimeSpan) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }
}

/// Normalized face rectangle, all coordinates in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// Face recognizer output for one sampled video frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameAnnotation {
    #[serde(rename = "t")]
    pub timestamp: f64,
    pub face_detected: bool,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bounding_box: Option<BoundingBox>,
    #[serde(rename = "emotions", default)]
    pub distribution: EmotionDistribution,
}

impl FrameAnnotation {
    /// Per-frame dominant category, `None` when no face was detected.
    pub fn dominant(&self) -> Option<(Emotion, f64)> {
        if !self.face_detected {
            return None;
        }
        dominant(&self.distribution).ok()
    }
}

/// A transcript word with its detected timing. `text` keeps the original case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordToken {
    #[serde(rename = "w")]
    pub text: String,
    #[serde(flatten)]
    pub span: TimeSpan,
}

impl WordToken {
    /// Lowercased form with surrounding punctuation removed, used for statistics.
    pub fn normalized(&self) -> String {
        normalize_word(&self.text)
    }
}

pub(crate) fn normalize_word(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        lower
    } else {
        trimmed.to_string()
    }
}

/// One transcript segment: the sentence-level unit carrying text and audio emotion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Segment {
    pub id: usize,
    #[serde(flatten)]
    pub span: TimeSpan,
    pub text: String,
    #[serde(default)]
    pub words: Vec<WordToken>,
    #[serde(default)]
    pub text_emotion: EmotionDistribution,
    #[serde(default)]
    pub audio_emotion: EmotionDistribution,
}

/// Mono PCM audio normalized to `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioTrack {
    pub sample_rate: u32,
    pub samples: Vec<f32>,
}

impl AudioTrack {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

/// Per-video metadata document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VideoMeta {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub category: String,
    pub duration: f64,
    pub frame_rate: f64,
}

/// One ingested talk.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoRecord {
    pub meta: VideoMeta,
    pub frames: Vec<FrameAnnotation>,
    pub segments: Vec<Segment>,
    pub laughter: Vec<TimeSpan>,
    pub audio: Option<AudioTrack>,
}

impl VideoRecord {
    pub fn id(&self) -> &str {
        &self.meta.id
    }

    pub fn duration(&self) -> f64 {
        self.meta.duration
    }

    /// Frames whose timestamp falls in `[span.start, span.end)`.
    ///
    /// Assumes frames are sorted by timestamp, which ingestion guarantees.
    pub fn frames_in(&self, span: &TimeSpan) -> &[FrameAnnotation] {
        let (lo, hi) = self.frame_range(span);
        &self.frames[lo..hi]
    }

    /// Index range of [`Self::frames_in`].
    pub fn frame_range(&self, span: &TimeSpan) -> (usize, usize) {
        let lo = self.frames.partition_point(|f| f.timestamp < span.start);
        let hi = self.frames.partition_point(|f| f.timestamp < span.end);
        (lo, hi.max(lo))
    }

    /// The interval a frame stands for: from its timestamp to the next frame's,
    /// the last frame extending to the end of the video.
    pub fn frame_interval(&self, index: usize) -> TimeSpan {
        let start = self.frames[index].timestamp;
        let end = self
            .frames
            .get(index + 1)
            .map_or(self.meta.duration.max(start), |f| f.timestamp);
        TimeSpan { start, end }
    }

    pub fn segment(&self, id: usize) -> Option<&Segment> {
        self.segments.get(id).filter(|s| s.id == id)
    }
}
