//! Sentence-, word- and frame-level alignment of the three channels.

use serde::{Deserialize, Serialize};

use crate::model::{dominant, Emotion, EmotionDistribution, FrameAnnotation, Segment, TimeSpan, VideoRecord};

/// Default number of frames a new face emotion must hold before it counts as a transition.
pub const DEFAULT_MIN_HOLD_FRAMES: usize = 3;

/// How the sentence-level face emotion is voted from frames.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceVote {
    /// Each detected frame is one vote.
    #[default]
    FrameCount,
    /// Each detected frame votes with the length of its interval.
    Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FusionParams {
    pub min_hold_frames: usize,
    pub face_vote: FaceVote,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { min_hold_frames: DEFAULT_MIN_HOLD_FRAMES, face_vote: FaceVote::FrameCount }
    }
}

/// A dominant emotion with its confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dominant {
    pub emotion: Emotion,
    pub confidence: f64,
}

impl From<(Emotion, f64)> for Dominant {
    fn from((emotion, confidence): (Emotion, f64)) -> Self {
        Self { emotion, confidence }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransitionPoint {
    pub time: f64,
    pub before: Emotion,
    pub after: Emotion,
    /// Index (within the segment) of the word being spoken at `time`.
    pub word_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceFusion {
    pub segment_id: usize,
    pub span: TimeSpan,
    pub face_emotion: Option<Dominant>,
    pub text_emotion: Option<Dominant>,
    pub audio_emotion: Option<Dominant>,
    /// Mean per-category confidence over detected frames in the span.
    pub face_distribution_mean: EmotionDistribution,
    pub text_distribution: EmotionDistribution,
    pub audio_distribution: EmotionDistribution,
    pub coherence_degree: Option<u8>,
    pub transitions: Vec<TransitionPoint>,
    pub frames_in_span: usize,
    pub detected_frames: usize,
}

impl SentenceFusion {
    /// The `(face, text, audio)` triple when all three channels are present.
    pub fn triple(&self) -> Option<(Emotion, Emotion, Emotion)> {
        Some((self.face_emotion?.emotion, self.text_emotion?.emotion, self.audio_emotion?.emotion))
    }

    pub fn channel(&self, channel: crate::model::Channel) -> Option<Dominant> {
        use crate::model::Channel;
        match channel {
            Channel::Face => self.face_emotion,
            Channel::Text => self.text_emotion,
            Channel::Audio => self.audio_emotion,
        }
    }
}

/// Coherence degree of a sentence: 2 when all channels agree, 0 when all
/// differ, 1 otherwise.
pub fn coherence_degree(face: Emotion, text: Emotion, audio: Emotion) -> u8 {
    if face == text && text == audio {
        2
    } else if face != text && text != audio && face != audio {
        0
    } else {
        1
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    votes: f64,
    confidence_sum: f64,
    winners: usize,
}

fn pick_face_winner(tallies: &[Tally; Emotion::COUNT]) -> Option<Dominant> {
    let mut best: Option<(Emotion, f64, f64)> = None;
    for emotion in Emotion::ALL {
        let t = tallies[emotion.index()];
        if t.winners == 0 {
            continue;
        }
        let mean = t.confidence_sum / t.winners as f64;
        // Strict comparisons keep the canonically earlier category on full ties.
        let better = match best {
            None => true,
            Some((_, votes, conf)) => t.votes > votes || (t.votes == votes && mean > conf),
        };
        if better {
            best = Some((emotion, t.votes, mean));
        }
    }
    best.map(|(emotion, _, confidence)| Dominant { emotion, confidence })
}

/// The most frequent per-frame dominant face emotion among detected frames.
///
/// Confidence is the mean confidence of the winning category over the frames it
/// won. Ties go to the higher mean confidence, then canonical order.
pub fn sentence_face_emotion(frames: &[FrameAnnotation]) -> Option<Dominant> {
    let mut tallies = [Tally::default(); Emotion::COUNT];
    for (emotion, confidence) in frames.iter().filter_map(FrameAnnotation::dominant) {
        let t = &mut tallies[emotion.index()];
        t.votes += 1.0;
        t.confidence_sum += confidence;
        t.winners += 1;
    }
    pick_face_winner(&tallies)
}

/// Duration-weighted variant of [`sentence_face_emotion`]: each frame votes
/// with the part of its interval that lies inside `span`.
pub fn sentence_face_emotion_by_time(video: &VideoRecord, span: &TimeSpan) -> Option<Dominant> {
    let mut tallies = [Tally::default(); Emotion::COUNT];
    let (lo, hi) = video.frame_range(span);
    for i in lo..hi {
        if let Some((emotion, confidence)) = video.frames[i].dominant() {
            let t = &mut tallies[emotion.index()];
            t.votes += video.frame_interval(i).overlap(span);
            t.confidence_sum += confidence;
            t.winners += 1;
        }
    }
    pick_face_winner(&tallies)
}

fn mean_distribution(frames: &[FrameAnnotation]) -> EmotionDistribution {
    let detected: Vec<_> = frames.iter().filter(|f| f.face_detected && !f.distribution.is_empty()).collect();
    if detected.is_empty() {
        return EmotionDistribution::new();
    }
    let mut sums = [0.0; Emotion::COUNT];
    for f in &detected {
        for (e, c) in f.distribution.iter() {
            sums[e.index()] += c;
        }
    }
    let n = detected.len() as f64;
    Emotion::ALL
        .into_iter()
        .filter(|e| sums[e.index()] > 0.0)
        .map(|e| (e, sums[e.index()] / n))
        .collect()
}

/// A maximal run of equal per-frame dominant categories over detected frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionRun {
    pub emotion: Emotion,
    /// Index into the frame slice of the run's first frame.
    pub first: usize,
    pub len: usize,
}

/// Run-length encodes the dominant categories of detected frames. Undetected
/// frames are skipped: they neither break a run nor extend it.
pub fn emotion_runs(frames: &[FrameAnnotation]) -> Vec<EmotionRun> {
    let mut runs: Vec<EmotionRun> = Vec::new();
    for (i, frame) in frames.iter().enumerate() {
        let Some((emotion, _)) = frame.dominant() else { continue };
        match runs.last_mut() {
            Some(run) if run.emotion == emotion => run.len += 1,
            _ => runs.push(EmotionRun { emotion, first: i, len: 1 }),
        }
    }
    runs
}

/// Debounced changes of the face emotion.
///
/// Runs shorter than `min_hold` frames are ignored. A transition is emitted at
/// the first frame of each qualifying run whose category differs from the
/// previous qualifying run.
pub fn detect_transitions(frames: &[FrameAnnotation], min_hold: usize, words: &[crate::model::WordToken]) -> Vec<TransitionPoint> {
    let min_hold = min_hold.max(1);
    let mut out = Vec::new();
    let mut stable: Option<Emotion> = None;
    for run in emotion_runs(frames).into_iter().filter(|r| r.len >= min_hold) {
        if let Some(before) = stable {
            if before != run.emotion {
                let time = frames[run.first].timestamp;
                out.push(TransitionPoint {
                    time,
                    before,
                    after: run.emotion,
                    word_index: words.iter().position(|w| w.span.contains(time)),
                });
            }
        }
        stable = Some(run.emotion);
    }
    out
}

/// Aligns the three channels for one segment.
pub fn fuse_sentence(video: &VideoRecord, segment: &Segment, params: &FusionParams) -> SentenceFusion {
    let frames = video.frames_in(&segment.span);
    let face_emotion = match params.face_vote {
        FaceVote::FrameCount => sentence_face_emotion(frames),
        FaceVote::Duration => sentence_face_emotion_by_time(video, &segment.span),
    };
    let text_emotion = dominant(&segment.text_emotion).ok().map(Dominant::from);
    let audio_emotion = dominant(&segment.audio_emotion).ok().map(Dominant::from);
    let coherence = match (face_emotion, text_emotion, audio_emotion) {
        (Some(f), Some(t), Some(a)) => Some(coherence_degree(f.emotion, t.emotion, a.emotion)),
        _ => None,
    };
    SentenceFusion {
        segment_id: segment.id,
        span: segment.span,
        face_emotion,
        text_emotion,
        audio_emotion,
        face_distribution_mean: mean_distribution(frames),
        text_distribution: segment.text_emotion.clone(),
        audio_distribution: segment.audio_emotion.clone(),
        coherence_degree: coherence,
        transitions: detect_transitions(frames, params.min_hold_frames, &segment.words),
        frames_in_span: frames.len(),
        detected_frames: frames.iter().filter(|f| f.face_detected).count(),
    }
}

/// Fuses every segment, in id order.
pub fn fuse_video(video: &VideoRecord, params: &FusionParams) -> Vec<SentenceFusion> {
    video.segments.iter().map(|s| fuse_sentence(video, s, params)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WordFusion {
    pub word: String,
    pub segment_id: usize,
    pub word_index: usize,
    pub span: TimeSpan,
    /// Seconds of the word's span spent under each face emotion.
    pub face_durations: EmotionDurations,
    pub undetected_duration: f64,
    pub text_emotion: Option<Dominant>,
    pub audio_emotion: Option<Dominant>,
}

/// Seconds per category, dense in canonical order; serialized as a map of the
/// non-zero entries.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmotionDurations(pub [f64; Emotion::COUNT]);

impl EmotionDurations {
    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }

    pub fn add(&mut self, e: Emotion, seconds: f64) {
        self.0[e.index()] += seconds;
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn merge(&mut self, other: &EmotionDurations) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }
}

impl Serialize for EmotionDurations {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        for e in Emotion::ALL {
            if self.get(e) > 0.0 {
                map.serialize_entry(&e, &self.get(e))?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for EmotionDurations {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<Emotion, f64>::deserialize(deserializer)?;
        let mut out = EmotionDurations::default();
        for (e, s) in map {
            out.add(e, s);
        }
        Ok(out)
    }
}

/// Splits `span` into face-emotion time using the frame intervals
/// `[t_i, t_{i+1})`, the last frame extending to the end of the video.
pub fn face_time_in(video: &VideoRecord, span: &TimeSpan) -> (EmotionDurations, f64) {
    let mut durations = EmotionDurations::default();
    let mut covered = 0.0;
    // First frame whose interval can reach into the span.
    let lo = video.frames.partition_point(|f| f.timestamp <= span.start).saturating_sub(1);
    let hi = video.frames.partition_point(|f| f.timestamp < span.end);
    for i in lo..hi {
        let overlap = video.frame_interval(i).overlap(span);
        if overlap <= 0.0 {
            continue;
        }
        if let Some((emotion, _)) = video.frames[i].dominant() {
            durations.add(emotion, overlap);
            covered += overlap;
        }
    }
    let undetected = (span.duration() - covered).max(0.0);
    (durations, undetected)
}

/// Per-word face time breakdown together with the owning segment's emotions.
pub fn fuse_words(video: &VideoRecord) -> Vec<WordFusion> {
    let mut out = Vec::new();
    for seg in &video.segments {
        let text_emotion = dominant(&seg.text_emotion).ok().map(Dominant::from);
        let audio_emotion = dominant(&seg.audio_emotion).ok().map(Dominant::from);
        for (j, word) in seg.words.iter().enumerate() {
            let (face_durations, undetected_duration) = face_time_in(video, &word.span);
            out.push(WordFusion {
                word: word.text.clone(),
                segment_id: seg.id,
                word_index: j,
                span: word.span,
                face_durations,
                undetected_duration,
                text_emotion,
                audio_emotion,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoherencePoint {
    pub segment_id: usize,
    pub degree: Option<u8>,
}

/// One coherence value per segment in id order.
pub fn coherence_timeline(fusions: &[SentenceFusion]) -> Vec<CoherencePoint> {
    fusions
        .iter()
        .map(|f| CoherencePoint { segment_id: f.segment_id, degree: f.coherence_degree })
        .collect()
}

/// A time-stamped confidence value of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidencePoint {
    pub t: f64,
    pub emotion: Option<Emotion>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSeries {
    pub face: Vec<ConfidencePoint>,
    pub text: Vec<ConfidencePoint>,
    pub audio: Vec<ConfidencePoint>,
}

/// Per-channel confidence over a segment: one point per frame for the face,
/// the segment-constant value at both span ends for text and audio.
pub fn confidence_series(video: &VideoRecord, segment: &Segment) -> ConfidenceSeries {
    let face = video
        .frames_in(&segment.span)
        .iter()
        .map(|f| {
            let d = f.dominant();
            ConfidencePoint { t: f.timestamp, emotion: d.map(|x| x.0), confidence: d.map_or(0.0, |x| x.1) }
        })
        .collect();
    let constant = |dist: &EmotionDistribution| {
        let d = dominant(dist).ok();
        [segment.span.start, segment.span.end]
            .into_iter()
            .map(|t| ConfidencePoint { t, emotion: d.map(|x| x.0), confidence: d.map_or(0.0, |x| x.1) })
            .collect()
    };
    ConfidenceSeries { face, text: constant(&segment.text_emotion), audio: constant(&segment.audio_emotion) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{VideoMeta, WordToken};

    fn frame(t: f64, e: Option<(Emotion, f64)>) -> FrameAnnotation {
        FrameAnnotation {
            timestamp: t,
            face_detected: e.is_some(),
            bounding_box: None,
            distribution: e.map(|(e, c)| EmotionDistribution::from_iter([(e, c)])).unwrap_or_default(),
        }
    }

    fn runs_frames(runs: &[(Option<Emotion>, usize)]) -> Vec<FrameAnnotation> {
        let mut out = Vec::new();
        for (e, n) in runs {
            for _ in 0..*n {
                let t = out.len() as f64 * 0.1;
                out.push(frame(t, e.map(|e| (e, 0.9))));
            }
        }
        out
    }

    #[test]
    fn coherence_degree_cases() {
        use Emotion::*;
        assert_eq!(coherence_degree(Happiness, Happiness, Happiness), 2);
        assert_eq!(coherence_degree(Anger, Happiness, Sadness), 0);
        assert_eq!(coherence_degree(Neutral, Happiness, Neutral), 1);
    }

    #[test]
    fn most_frequent_face_wins() {
        let frames = runs_frames(&[(Some(Emotion::Neutral), 10), (Some(Emotion::Happiness), 5)]);
        assert_eq!(sentence_face_emotion(&frames).unwrap().emotion, Emotion::Neutral);
        assert!(sentence_face_emotion(&runs_frames(&[(None, 4)])).is_none());
    }

    #[test]
    fn face_tie_goes_to_higher_mean_confidence() {
        let mut frames: Vec<_> = (0..5).map(|i| frame(i as f64, Some((Emotion::Neutral, 0.6)))).collect();
        frames.extend((5..10).map(|i| frame(i as f64, Some((Emotion::Happiness, 0.8)))));
        // Brute-force oracle: count and mean per category, then apply the tie rule.
        let count = |e: Emotion| frames.iter().filter(|f| f.dominant().unwrap().0 == e).count();
        assert_eq!(count(Emotion::Neutral), count(Emotion::Happiness));
        let d = sentence_face_emotion(&frames).unwrap();
        assert_eq!(d.emotion, Emotion::Happiness);
        assert!((d.confidence - 0.8).abs() < 1e-12);
    }

    #[test]
    fn face_full_tie_uses_canonical_order() {
        let frames = vec![frame(0.0, Some((Emotion::Surprise, 0.7))), frame(1.0, Some((Emotion::Fear, 0.7)))];
        assert_eq!(sentence_face_emotion(&frames).unwrap().emotion, Emotion::Fear);
    }

    #[test]
    fn transition_after_stable_runs() {
        let frames = runs_frames(&[(Some(Emotion::Neutral), 20), (Some(Emotion::Happiness), 20)]);
        let tr = detect_transitions(&frames, 3, &[]);
        assert_eq!(tr.len(), 1);
        assert_eq!((tr[0].before, tr[0].after), (Emotion::Neutral, Emotion::Happiness));
        // Frame 21 (1-based) is index 20.
        assert_eq!(tr[0].time, frames[20].timestamp);
    }

    #[test]
    fn flicker_is_suppressed() {
        let frames = runs_frames(&[(Some(Emotion::Neutral), 20), (Some(Emotion::Anger), 1), (Some(Emotion::Neutral), 20)]);
        assert!(detect_transitions(&frames, 3, &[]).is_empty());
    }

    #[test]
    fn undetected_frames_do_not_break_runs() {
        let frames = runs_frames(&[
            (Some(Emotion::Neutral), 2),
            (None, 5),
            (Some(Emotion::Neutral), 2),
            (Some(Emotion::Sadness), 3),
        ]);
        let tr = detect_transitions(&frames, 3, &[]);
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].time, frames[9].timestamp);
        assert!(detect_transitions(&runs_frames(&[(None, 30)]), 3, &[]).is_empty());
    }

    #[test]
    fn transition_reports_word_index() {
        let frames = runs_frames(&[(Some(Emotion::Neutral), 5), (Some(Emotion::Fear), 5)]);
        let words = vec![
            WordToken { text: "a".into(), span: TimeSpan::new(0.0, 0.45) },
            WordToken { text: "b".into(), span: TimeSpan::new(0.45, 1.0) },
        ];
        let tr = detect_transitions(&frames, 3, &words);
        assert_eq!(tr[0].word_index, Some(1));
    }

    fn video(frames: Vec<FrameAnnotation>, duration: f64) -> VideoRecord {
        VideoRecord {
            meta: VideoMeta { id: "v".into(), title: "".into(), category: "".into(), duration, frame_rate: 10.0 },
            frames,
            segments: vec![],
            laughter: vec![],
            audio: None,
        }
    }

    #[test]
    fn word_time_all_one_emotion() {
        let frames = (0..20).map(|i| frame(i as f64 * 0.1, Some((Emotion::Happiness, 1.0)))).collect();
        let v = video(frames, 2.0);
        let span = TimeSpan::new(0.3, 1.3);
        let (d, und) = face_time_in(&v, &span);
        assert!((d.get(Emotion::Happiness) - 1.0).abs() < 1e-12);
        assert!(und.abs() < 1e-12);
    }

    #[test]
    fn word_without_frames_is_undetected() {
        let v = video(vec![frame(5.0, Some((Emotion::Happiness, 1.0)))], 10.0);
        let (d, und) = face_time_in(&v, &TimeSpan::new(1.0, 2.0));
        assert_eq!(d.total(), 0.0);
        assert_eq!(und, 1.0);
    }

    #[test]
    fn last_frame_extends_to_video_end() {
        let v = video(vec![frame(0.0, Some((Emotion::Sadness, 1.0)))], 10.0);
        let (d, _) = face_time_in(&v, &TimeSpan::new(8.0, 9.5));
        assert_eq!(d.get(Emotion::Sadness), 1.5);
    }

    #[test]
    fn durations_serialize_sparse() {
        let mut d = EmotionDurations::default();
        d.add(Emotion::Fear, 0.25);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"fear":0.25}"#);
        assert_eq!(serde_json::from_str::<EmotionDurations>(&json).unwrap(), d);
    }
}
