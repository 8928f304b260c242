//! Seeded generator of well-formed synthetic videos, for tests and fuzzing.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Emotion, EmotionDistribution, FrameAnnotation, Segment, TimeSpan, VideoMeta, VideoRecord, WordToken};

const VOCABULARY: &[&str] = &[
    "you", "have", "this", "the", "happy", "sad", "world", "people", "think", "really", "love", "fear", "story", "laugh",
    "today", "we", "I", "know", "great", "terrible", "idea", "time", "life", "work",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub max_segments: usize,
    pub max_frames: usize,
    /// Probability that a frame has no detected face.
    pub undetected_rate: f64,
    /// Probability that a segment's text or audio emotion is missing.
    pub missing_channel_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self { max_segments: 50, max_frames: 2000, undetected_rate: 0.1, missing_channel_rate: 0.1 }
    }
}

fn random_distribution(rng: &mut ChaCha8Rng, favored: Emotion) -> EmotionDistribution {
    let mut dist = EmotionDistribution::new();
    dist.set(favored, rng.random_range(0.4..=1.0));
    for _ in 0..rng.random_range(0..3) {
        let other = *Emotion::ALL.choose(rng).expect("non-empty");
        if other != favored {
            dist.set(other, rng.random_range(0.0..0.4));
        }
    }
    dist
}

/// Generates a random valid video. Frame emotions follow a sticky random walk
/// so that runs of several frames occur.
pub fn synthetic_video(seed: u64, spec: &SynthSpec) -> VideoRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_segments = rng.random_range(1..=spec.max_segments.max(1));
    let mut segments = Vec::with_capacity(n_segments);
    let mut t = rng.random_range(0.0..1.0);
    for id in 0..n_segments {
        let length: f64 = rng.random_range(0.5..6.0);
        let span = TimeSpan::new(t, t + length);
        let n_words = rng.random_range(0..12);
        let mut words = Vec::with_capacity(n_words);
        if n_words > 0 {
            let slot = length / n_words as f64;
            for k in 0..n_words {
                let start = span.start + slot * k as f64 + rng.random_range(0.0..0.2) * slot;
                let end = span.start + slot * (k + 1) as f64 - rng.random_range(0.0..0.2) * slot;
                let text = VOCABULARY.choose(&mut rng).expect("non-empty").to_string();
                words.push(WordToken { text, span: TimeSpan::new(start, end.min(span.end)) });
            }
        }
        let text = words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
        let channel = |rng: &mut ChaCha8Rng| {
            if rng.random_bool(spec.missing_channel_rate) {
                EmotionDistribution::new()
            } else {
                let e = *Emotion::ALL.choose(rng).expect("non-empty");
                random_distribution(rng, e)
            }
        };
        let text_emotion = channel(&mut rng);
        let audio_emotion = channel(&mut rng);
        segments.push(Segment { id, span, text, words, text_emotion, audio_emotion });
        t = span.end + if rng.random_bool(0.3) { rng.random_range(0.0..2.0) } else { 0.0 };
    }
    let duration = t + rng.random_range(0.1..2.0);

    let n_frames = rng.random_range(0..=spec.max_frames);
    let mut stamps: Vec<f64> = (0..n_frames).map(|_| rng.random_range(0.0..duration)).collect();
    stamps.sort_by(f64::total_cmp);
    stamps.dedup();
    let mut current = *Emotion::ALL.choose(&mut rng).expect("non-empty");
    let frames = stamps
        .into_iter()
        .map(|timestamp| {
            if rng.random_bool(0.08) {
                current = *Emotion::ALL.choose(&mut rng).expect("non-empty");
            }
            if rng.random_bool(spec.undetected_rate) {
                FrameAnnotation { timestamp, face_detected: false, bounding_box: None, distribution: EmotionDistribution::new() }
            } else {
                FrameAnnotation {
                    timestamp,
                    face_detected: true,
                    bounding_box: None,
                    distribution: random_distribution(&mut rng, current),
                }
            }
        })
        .collect();

    let laughter = (0..rng.random_range(0..4))
        .map(|_| {
            let start = rng.random_range(0.0..duration * 0.9);
            TimeSpan::new(start, (start + rng.random_range(0.2..3.0)).min(duration))
        })
        .collect();

    VideoRecord {
        meta: VideoMeta {
            id: format!("synthetic-{seed}"),
            title: format!("Synthetic talk {seed}"),
            category: "synthetic".into(),
            duration,
            frame_rate: 25.0,
        },
        frames,
        segments,
        laughter,
        audio: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate;

    #[test]
    fn generated_videos_are_valid() {
        for seed in 0..50 {
            let v = synthetic_video(seed, &SynthSpec::default());
            let report = validate(&v);
            assert!(report.is_empty(), "seed {seed}: {report}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(synthetic_video(3, &SynthSpec::default()), synthetic_video(3, &SynthSpec::default()));
    }
}
