use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::fusion::{coherence_timeline, CoherencePoint, SentenceFusion};
use crate::model::{Channel, Emotion, TimeSpan, VideoRecord};

/// A colored stretch of one barcode row; `emotion` is `None` where nothing was detected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarcodeRun {
    #[serde(flatten)]
    pub span: TimeSpan,
    pub emotion: Option<Emotion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub face: Vec<BarcodeRun>,
    pub text: Vec<BarcodeRun>,
    pub audio: Vec<BarcodeRun>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreWeighting {
    #[default]
    Unweighted,
    /// Each sentence weighted by its duration.
    Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryMetrics {
    /// Mean of the defined coherence degrees, in `[0, 2]`; `None` when no sentence has all channels.
    pub coherence_score: Option<f64>,
    /// Number of distinct categories that occur as any channel's sentence emotion.
    pub diversity: usize,
    /// Fraction of total segment time each channel spends in each category.
    pub percentage: BTreeMap<Channel, BTreeMap<Emotion, f64>>,
}

impl SummaryMetrics {
    pub fn percentage_of(&self, channel: Channel, emotion: Emotion) -> f64 {
        self.percentage.get(&channel).and_then(|m| m.get(&emotion)).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VideoSummary {
    pub video_id: String,
    pub title: String,
    pub category: String,
    pub duration: f64,
    pub barcode: Barcode,
    pub coherence_line: Vec<CoherencePoint>,
    pub metrics: SummaryMetrics,
}

fn push_run(runs: &mut Vec<BarcodeRun>, span: TimeSpan, emotion: Option<Emotion>) {
    if span.end <= span.start {
        return;
    }
    match runs.last_mut() {
        Some(last) if last.emotion == emotion && last.span.end == span.start => last.span.end = span.end,
        _ => runs.push(BarcodeRun { span, emotion }),
    }
}

/// Face row: frame intervals merged into runs of equal dominant category.
/// Time before the first frame, and undetected frames, produce `None` runs.
pub fn face_barcode(video: &VideoRecord) -> Vec<BarcodeRun> {
    let mut runs = Vec::new();
    if let Some(first) = video.frames.first() {
        push_run(&mut runs, TimeSpan::new(0.0, first.timestamp), None);
    } else {
        push_run(&mut runs, TimeSpan::new(0.0, video.duration()), None);
    }
    for i in 0..video.frames.len() {
        push_run(&mut runs, video.frame_interval(i), video.frames[i].dominant().map(|d| d.0));
    }
    runs
}

pub fn coherence_score(fusions: &[SentenceFusion], weighting: ScoreWeighting) -> Option<f64> {
    let (mut sum, mut weight) = (0.0, 0.0);
    for f in fusions {
        if let Some(d) = f.coherence_degree {
            let w = match weighting {
                ScoreWeighting::Unweighted => 1.0,
                ScoreWeighting::Duration => f.span.duration(),
            };
            sum += w * f64::from(d);
            weight += w;
        }
    }
    (weight > 0.0).then(|| sum / weight)
}

pub fn diversity(fusions: &[SentenceFusion]) -> usize {
    fusions
        .iter()
        .flat_map(|f| Channel::ALL.map(|c| f.channel(c).map(|d| d.emotion)))
        .flatten()
        .collect::<BTreeSet<_>>()
        .len()
}

pub fn percentages(fusions: &[SentenceFusion]) -> BTreeMap<Channel, BTreeMap<Emotion, f64>> {
    let total: f64 = fusions.iter().map(|f| f.span.duration()).sum();
    let mut out: BTreeMap<Channel, BTreeMap<Emotion, f64>> = Channel::ALL.into_iter().map(|c| (c, BTreeMap::new())).collect();
    if total <= 0.0 {
        return out;
    }
    for channel in Channel::ALL {
        let row = out.get_mut(&channel).expect("all channels present");
        for f in fusions {
            if let Some(d) = f.channel(channel) {
                *row.entry(d.emotion).or_insert(0.0) += f.span.duration();
            }
        }
        for v in row.values_mut() {
            *v /= total;
        }
    }
    out
}

/// Barcode, coherence line and sort metrics of a video.
pub fn build_summary(video: &VideoRecord, fusions: &[SentenceFusion], weighting: ScoreWeighting) -> VideoSummary {
    let sentence_row = |channel: Channel| {
        fusions
            .iter()
            .map(|f| BarcodeRun { span: f.span, emotion: f.channel(channel).map(|d| d.emotion) })
            .collect()
    };
    VideoSummary {
        video_id: video.meta.id.clone(),
        title: video.meta.title.clone(),
        category: video.meta.category.clone(),
        duration: video.meta.duration,
        barcode: Barcode { face: face_barcode(video), text: sentence_row(Channel::Text), audio: sentence_row(Channel::Audio) },
        coherence_line: coherence_timeline(fusions),
        metrics: SummaryMetrics {
            coherence_score: coherence_score(fusions, weighting),
            diversity: diversity(fusions),
            percentage: percentages(fusions),
        },
    }
}
