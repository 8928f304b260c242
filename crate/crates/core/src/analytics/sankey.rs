//! The channel-coherence flow model: face → text → audio.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytics::histogram::{feature_histogram, Histogram, DEFAULT_BINS};
use crate::analytics::words::{word_importance, Lexicons, WeightedTerm, DEFAULT_TOP_TERMS};
use crate::error::AnalysisError;
use crate::fusion::SentenceFusion;
use crate::model::{BoundingBox, Channel, Emotion, VideoRecord};
use crate::prosody::{Feature, ProsodySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    FaceText,
    TextAudio,
}

impl std::str::FromStr for Stage {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "face-text" => Ok(Stage::FaceText),
            "text-audio" => Ok(Stage::TextAudio),
            other => Err(AnalysisError::Usage(format!("unknown stage `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SankeyNode {
    pub channel: Channel,
    pub emotion: Emotion,
    pub total_duration: f64,
    pub sentence_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SankeyLink {
    pub stage: Stage,
    pub from: Emotion,
    pub to: Emotion,
    pub total_duration: f64,
    pub sentence_ids: Vec<usize>,
}

/// A frame chosen to represent a group of sentences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FrameRef {
    pub frame_index: usize,
    pub t: f64,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounding_box: Option<BoundingBox>,
}

/// One treemap rectangle: a face→text link leaving the face node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TreemapCell {
    pub link: usize,
    pub to: Emotion,
    pub face_count: usize,
    pub representative: Option<FrameRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaceNodeDetail {
    pub emotion: Emotion,
    pub cells: Vec<TreemapCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextNodeDetail {
    pub emotion: Emotion,
    pub terms: Vec<WeightedTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AudioNodeDetail {
    pub emotion: Emotion,
    /// Empty when the video has no audio.
    pub histograms: Vec<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SankeyModel {
    pub video_id: String,
    pub face_nodes: Vec<SankeyNode>,
    pub text_nodes: Vec<SankeyNode>,
    pub audio_nodes: Vec<SankeyNode>,
    pub face_text_links: Vec<SankeyLink>,
    pub text_audio_links: Vec<SankeyLink>,
    pub face_details: Vec<FaceNodeDetail>,
    pub text_details: Vec<TextNodeDetail>,
    pub audio_details: Vec<AudioNodeDetail>,
    /// Sentences left out because at least one channel is undetected.
    pub residual_sentence_ids: Vec<usize>,
    pub has_audio: bool,
}

impl SankeyModel {
    pub fn links(&self, stage: Stage) -> &[SankeyLink] {
        match stage {
            Stage::FaceText => &self.face_text_links,
            Stage::TextAudio => &self.text_audio_links,
        }
    }

    pub fn nodes(&self, channel: Channel) -> &[SankeyNode] {
        match channel {
            Channel::Face => &self.face_nodes,
            Channel::Text => &self.text_nodes,
            Channel::Audio => &self.audio_nodes,
        }
    }

    pub fn link(&self, stage: Stage, from: Emotion, to: Emotion) -> Option<&SankeyLink> {
        self.links(stage).iter().find(|l| l.from == from && l.to == to)
    }

    pub fn node(&self, channel: Channel, emotion: Emotion) -> Option<&SankeyNode> {
        self.nodes(channel).iter().find(|n| n.emotion == emotion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SankeyParams {
    pub histogram_bins: usize,
    pub top_terms: usize,
}

impl Default for SankeyParams {
    fn default() -> Self {
        Self { histogram_bins: DEFAULT_BINS, top_terms: DEFAULT_TOP_TERMS }
    }
}

/// Frame nearest the centroid of the detected frames' distribution vectors.
/// Ties go to the earliest frame.
pub fn representative_face(video: &VideoRecord, sentence_ids: &[usize]) -> Result<FrameRef, AnalysisError> {
    let detected: Vec<usize> = sentence_ids
        .iter()
        .filter_map(|id| video.segment(*id))
        .flat_map(|seg| {
            let (lo, hi) = video.frame_range(&seg.span);
            (lo..hi).filter(|i| video.frames[*i].face_detected)
        })
        .collect();
    if detected.is_empty() {
        return Err(AnalysisError::NoFaces);
    }
    let vectors: Vec<[f64; Emotion::COUNT]> = detected.iter().map(|i| video.frames[*i].distribution.to_vector()).collect();
    let mut centroid = [0.0; Emotion::COUNT];
    for v in &vectors {
        for (c, x) in centroid.iter_mut().zip(v) {
            *c += x;
        }
    }
    for c in &mut centroid {
        *c /= vectors.len() as f64;
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in vectors.iter().enumerate() {
        let d2: f64 = v.iter().zip(&centroid).map(|(a, b)| (a - b).powi(2)).sum();
        let i = detected[k];
        let earlier = |j: usize| video.frames[i].timestamp < video.frames[j].timestamp;
        match best {
            Some((j, bd)) if d2 > bd || (d2 == bd && !earlier(j)) => {}
            _ => best = Some((i, d2)),
        }
    }
    let (i, _) = best.expect("non-empty");
    let f = &video.frames[i];
    Ok(FrameRef { frame_index: i, t: f.timestamp, bounding_box: f.bounding_box })
}

/// Detected face frames contributed by the given sentences.
fn face_count(fusions: &[SentenceFusion], ids: &[usize]) -> usize {
    fusions.iter().filter(|f| ids.contains(&f.segment_id)).map(|f| f.detected_frames).sum()
}

fn aggregate(entries: impl Iterator<Item = ((Emotion, Emotion), usize, f64)>, stage: Stage) -> Vec<SankeyLink> {
    let mut map: BTreeMap<(Emotion, Emotion), (f64, Vec<usize>)> = BTreeMap::new();
    for (key, id, duration) in entries {
        let e = map.entry(key).or_default();
        e.0 += duration;
        e.1.push(id);
    }
    map.into_iter()
        .map(|((from, to), (total_duration, sentence_ids))| SankeyLink { stage, from, to, total_duration, sentence_ids })
        .collect()
}

fn nodes_for(channel: Channel, full: &[(&SentenceFusion, (Emotion, Emotion, Emotion))]) -> Vec<SankeyNode> {
    let mut map: BTreeMap<Emotion, (f64, Vec<usize>)> = BTreeMap::new();
    for (f, (face, text, audio)) in full {
        let emotion = match channel {
            Channel::Face => *face,
            Channel::Text => *text,
            Channel::Audio => *audio,
        };
        let e = map.entry(emotion).or_default();
        e.0 += f.span.duration();
        e.1.push(f.segment_id);
    }
    map.into_iter()
        .map(|(emotion, (total_duration, sentence_ids))| SankeyNode { channel, emotion, total_duration, sentence_ids })
        .collect()
}

/// Aggregates fully-defined sentences into nodes and duration-weighted links,
/// with per-node treemap cells, weighted terms and audio-feature histograms.
pub fn build_sankey(
    video: &VideoRecord,
    fusions: &[SentenceFusion],
    prosody: Option<&ProsodySet>,
    lexicons: &Lexicons,
    params: &SankeyParams,
) -> SankeyModel {
    let mut full = Vec::new();
    let mut residual = Vec::new();
    for f in fusions {
        match f.triple() {
            Some(t) => full.push((f, t)),
            None => residual.push(f.segment_id),
        }
    }
    let face_text_links = aggregate(full.iter().map(|(f, (a, b, _))| ((*a, *b), f.segment_id, f.span.duration())), Stage::FaceText);
    let text_audio_links = aggregate(full.iter().map(|(f, (_, b, c))| ((*b, *c), f.segment_id, f.span.duration())), Stage::TextAudio);
    let face_nodes = nodes_for(Channel::Face, &full);
    let text_nodes = nodes_for(Channel::Text, &full);
    let audio_nodes = nodes_for(Channel::Audio, &full);

    let face_details = face_nodes
        .iter()
        .map(|node| FaceNodeDetail {
            emotion: node.emotion,
            cells: face_text_links
                .iter()
                .enumerate()
                .filter(|(_, l)| l.from == node.emotion)
                .map(|(k, l)| TreemapCell {
                    link: k,
                    to: l.to,
                    face_count: face_count(fusions, &l.sentence_ids),
                    representative: representative_face(video, &l.sentence_ids).ok(),
                })
                .collect(),
        })
        .collect();

    let text_details = text_nodes
        .iter()
        .map(|node| {
            let texts = node.sentence_ids.iter().filter_map(|id| video.segment(*id)).map(|s| s.text.as_str());
            TextNodeDetail { emotion: node.emotion, terms: word_importance(texts, lexicons, params.top_terms) }
        })
        .collect();

    let audio_details = audio_nodes
        .iter()
        .map(|node| AudioNodeDetail {
            emotion: node.emotion,
            histograms: match prosody {
                Some(p) => Feature::ALL
                    .into_iter()
                    .filter_map(|feature| feature_histogram(video, &node.sentence_ids, p, feature, params.histogram_bins).ok())
                    .collect(),
                None => Vec::new(),
            },
        })
        .collect();

    SankeyModel {
        video_id: video.meta.id.clone(),
        face_nodes,
        text_nodes,
        audio_nodes,
        face_text_links,
        text_audio_links,
        face_details,
        text_details,
        audio_details,
        residual_sentence_ids: residual,
        has_audio: prosody.is_some(),
    }
}
