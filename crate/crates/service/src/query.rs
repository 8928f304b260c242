//! Corpus queries behind the list and selection endpoints.

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use emotion_coherence::analytics::{Stage, VideoSummary};
use emotion_coherence::projection::{ProjectionParams, TsneParams, VectorMode};
use emotion_coherence::{Channel, CorpusStore, Emotion, StoreError};

use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKey {
    Coherence,
    Diversity,
    Percentage(Channel, Emotion),
    Title,
}

impl FromStr for SortKey {
    type Err = ApiError;

    /// `coherence`, `diversity`, `title` or `percentage:<channel>:<category>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ApiError::bad_request(format!("unknown sort key `{s}`"));
        match s {
            "coherence" => Ok(SortKey::Coherence),
            "diversity" => Ok(SortKey::Diversity),
            "title" => Ok(SortKey::Title),
            _ => {
                let rest = s.strip_prefix("percentage:").ok_or_else(bad)?;
                let (channel, emotion) = rest.split_once(':').ok_or_else(bad)?;
                Ok(SortKey::Percentage(channel.parse().map_err(|_| bad())?, emotion.parse().map_err(|_| bad())?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Asc,
    Desc,
}

impl FromStr for SortOrder {
    type Err = ApiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" => Ok(SortOrder::Asc),
            "desc" => Ok(SortOrder::Desc),
            other => Err(ApiError::bad_request(format!("unknown sort order `{other}`"))),
        }
    }
}

impl SortKey {
    /// Metrics sort high-to-low by default, titles alphabetically.
    pub fn default_order(self) -> SortOrder {
        match self {
            SortKey::Title => SortOrder::Asc,
            _ => SortOrder::Desc,
        }
    }

    fn compare(self, a: &VideoSummary, b: &VideoSummary) -> Ordering {
        let metric = |v: &VideoSummary| match self {
            SortKey::Coherence => v.metrics.coherence_score,
            SortKey::Diversity => Some(v.metrics.diversity as f64),
            SortKey::Percentage(c, e) => Some(v.metrics.percentage_of(c, e)),
            SortKey::Title => None,
        };
        match self {
            SortKey::Title => a.title.to_lowercase().cmp(&b.title.to_lowercase()),
            _ => match (metric(a), metric(b)) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                (None, None) => Ordering::Equal,
            },
        }
    }
}

fn matches(summary: &VideoSummary, keyword: &str) -> bool {
    let k = keyword.to_lowercase();
    summary.title.to_lowercase().contains(&k) || summary.category.to_lowercase().contains(&k)
}

/// Summaries filtered by keyword (case-insensitive substring of title or
/// category) and sorted by `key`. Videos without a value for the key come
/// last in either order; ties are broken by ascending video id.
pub fn list_videos(
    store: &CorpusStore,
    key: SortKey,
    order: SortOrder,
    keyword: Option<&str>,
) -> Result<Vec<VideoSummary>, StoreError> {
    let mut out = Vec::new();
    for id in store.ids() {
        let summary = store.summary(id)?;
        if keyword.is_none_or(|k| matches(&summary, k)) {
            out.push((*summary).clone());
        }
    }
    out.sort_by(|a, b| {
        let missing = |v: &VideoSummary| key == SortKey::Coherence && v.metrics.coherence_score.is_none();
        let primary = match (missing(a), missing(b)) {
            (false, true) => Ordering::Less,
            (true, false) => Ordering::Greater,
            _ => match order {
                SortOrder::Asc => key.compare(a, b),
                SortOrder::Desc => key.compare(b, a),
            },
        };
        primary.then_with(|| a.video_id.cmp(&b.video_id))
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LinkSelector {
    pub stage: Stage,
    pub from: Emotion,
    pub to: Emotion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeSelector {
    pub channel: Channel,
    pub emotion: Emotion,
}

/// Axis-aligned rectangle in projection coordinates, edges inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Brush {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Projection parameters as sent by clients; omitted fields take server defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionQuery {
    pub mode: Option<VectorMode>,
    pub perplexity: Option<f64>,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
}

impl ProjectionQuery {
    pub fn params(&self) -> Result<ProjectionParams, ApiError> {
        let defaults = TsneParams::default();
        let perplexity = self.perplexity.unwrap_or(defaults.perplexity);
        if !(perplexity.is_finite() && perplexity > 0.0) {
            return Err(ApiError::bad_request("perplexity must be a positive number"));
        }
        let iterations = self.iterations.unwrap_or(defaults.iterations);
        if iterations == 0 || iterations > 10_000 {
            return Err(ApiError::bad_request("iterations must be in 1..=10000"));
        }
        Ok(ProjectionParams {
            mode: self.mode.unwrap_or_default(),
            tsne: TsneParams { perplexity, iterations, seed: self.seed.unwrap_or(defaults.seed), ..defaults },
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SelectionQuery {
    pub link: Option<LinkSelector>,
    pub node: Option<NodeSelector>,
    pub segment_id: Option<usize>,
    pub brush: Option<Brush>,
    /// Projection the brush refers to.
    #[serde(default)]
    pub projection: ProjectionQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Selection {
    pub video_id: String,
    pub sentence_ids: Vec<usize>,
}

/// Sentence ids selected by exactly one selector.
pub fn resolve_selection(store: &CorpusStore, video_id: &str, q: &SelectionQuery) -> Result<Selection, ApiError> {
    let given = [q.link.is_some(), q.node.is_some(), q.segment_id.is_some(), q.brush.is_some()];
    match given.iter().filter(|&&b| b).count() {
        0 => return Err(ApiError::bad_request("selection needs one of link, node, segmentId, brush")),
        1 => {}
        _ => return Err(ApiError::bad_request("selection takes exactly one of link, node, segmentId, brush")),
    }
    let record = store.record(video_id)?;
    let mut ids = if let Some(link) = q.link {
        let model = store.sankey(video_id)?;
        let found = model.link(link.stage, link.from, link.to).ok_or_else(|| {
            ApiError::not_found(format!(
                "no {} link {} -> {} in `{video_id}`",
                stage_name(link.stage),
                link.from.as_str(),
                link.to.as_str()
            ))
        })?;
        found.sentence_ids.clone()
    } else if let Some(node) = q.node {
        let model = store.sankey(video_id)?;
        let found = model.node(node.channel, node.emotion).ok_or_else(|| {
            ApiError::not_found(format!("no {} node {} in `{video_id}`", node.channel.as_str(), node.emotion.as_str()))
        })?;
        found.sentence_ids.clone()
    } else if let Some(id) = q.segment_id {
        if record.segment(id).is_none() {
            return Err(ApiError::not_found(format!("no segment {id} in `{video_id}`")));
        }
        vec![id]
    } else {
        let b = q.brush.expect("one selector is present");
        if ![b.x0, b.y0, b.x1, b.y1].iter().all(|v| v.is_finite()) {
            return Err(ApiError::bad_request("brush coordinates must be finite"));
        }
        let model = store.projection(video_id, &q.projection.params()?)?;
        model.inside(b.x0, b.y0, b.x1, b.y1)
    };
    ids.sort_unstable();
    Ok(Selection { video_id: video_id.to_string(), sentence_ids: ids })
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::FaceText => "face-text",
        Stage::TextAudio => "text-audio",
    }
}
