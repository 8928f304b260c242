use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::model::VideoRecord;
use crate::prosody::{Feature, ProsodySet};

pub const DEFAULT_BINS: usize = 20;

/// Normalized histogram of one audio feature over a group of sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Histogram {
    pub feature: Feature,
    /// `bins + 1` uniform edges.
    pub edges: Vec<f64>,
    /// Fractions summing to one, or all zero when `empty`.
    pub fractions: Vec<f64>,
    pub samples: usize,
    pub empty: bool,
}

/// Uniform edges over `[min, max]`. A degenerate range is widened to one unit
/// centered on the value.
pub fn uniform_edges(min: f64, max: f64, bins: usize) -> Vec<f64> {
    let (lo, hi) = if max > min { (min, max) } else { (min - 0.5, min + 0.5) };
    let width = (hi - lo) / bins as f64;
    (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect()
}

/// Bins `values` over `edges`; values outside the range are clamped to the end bins.
pub fn histogram_from(feature: Feature, values: &[f64], edges: Vec<f64>) -> Histogram {
    let bins = edges.len() - 1;
    let mut fractions = vec![0.0; bins];
    let (lo, hi) = (edges[0], edges[bins]);
    let width = (hi - lo) / bins as f64;
    for v in values {
        let idx = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        fractions[idx] += 1.0;
    }
    let n = values.len();
    if n > 0 {
        for c in &mut fractions {
            *c /= n as f64;
        }
    }
    Histogram { feature, edges, fractions, samples: n, empty: n == 0 }
}

/// Pools the feature samples of the given sentences and bins them over the
/// video-wide range of that feature.
pub fn feature_histogram(
    video: &VideoRecord,
    sentence_ids: &[usize],
    prosody: &ProsodySet,
    feature: Feature,
    bins: usize,
) -> Result<Histogram, AnalysisError> {
    if bins == 0 {
        return Err(AnalysisError::Usage("histogram needs at least one bin".into()));
    }
    let series = prosody.series(feature);
    let (min, max) = series.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let edges = if min.is_finite() { uniform_edges(min, max, bins) } else { uniform_edges(0.0, 1.0, bins) };
    let values: Vec<f64> = sentence_ids
        .iter()
        .filter_map(|id| video.segment(*id))
        .flat_map(|seg| series.slice(&seg.span).iter().filter_map(|s| s.value))
        .collect();
    Ok(histogram_from(feature, &values, edges))
}

/// As [`feature_histogram`], reporting [`AnalysisError::NoAudio`] when the
/// video has no prosody.
pub fn feature_histogram_opt(
    video: &VideoRecord,
    sentence_ids: &[usize],
    prosody: Option<&ProsodySet>,
    feature: Feature,
    bins: usize,
) -> Result<Histogram, AnalysisError> {
    feature_histogram(video, sentence_ids, prosody.ok_or(AnalysisError::NoAudio)?, feature, bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_samples_fill_one_bin() {
        let h = histogram_from(Feature::Intensity, &[3.0; 7], uniform_edges(3.0, 3.0, 20));
        assert_eq!(h.fractions.iter().filter(|c| **c > 0.0).count(), 1);
        assert_eq!(h.fractions.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn no_samples_is_flagged_empty() {
        let h = histogram_from(Feature::Pitch, &[], uniform_edges(0.0, 1.0, 4));
        assert!(h.empty);
        assert!(h.fractions.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn two_levels_split_evenly() {
        // Counting oracle: half the samples at each extreme land in the first and last bins.
        let values: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { -40.0 } else { -10.0 }).collect();
        let h = histogram_from(Feature::Intensity, &values, uniform_edges(-40.0, -10.0, 20));
        assert_eq!(h.fractions[0], 0.5);
        assert_eq!(h.fractions[19], 0.5);
        assert_eq!(h.edges.len(), 21);
    }
}
