mod common;

use common::{fixture, fixtures};
use emotion_coherence::analytics::{build_sankey, build_summary, Lexicons, SankeyParams, ScoreWeighting, Stage};
use emotion_coherence::fusion::{fuse_video, FusionParams};
use emotion_coherence::projection::{build_projection, sentence_vector, ProjectionParams, VectorMode};
use emotion_coherence::prosody::{ProsodyParams, ProsodySet};
use emotion_coherence::{validate, Emotion};

fn score(id: &str) -> Option<f64> {
    let v = fixture(id);
    build_summary(&v, &fuse_video(&v, &FusionParams::default()), ScoreWeighting::Unweighted).metrics.coherence_score
}

#[test]
fn fixtures_are_valid() {
    for v in fixtures() {
        assert!(validate(&v).is_empty(), "{}", v.meta.id);
    }
}

#[test]
fn fixture_scores() {
    assert_eq!(score("coherent-talk"), Some(2.0));
    assert_eq!(score("cluster-talk"), Some(2.0));
    assert_eq!(score("mixed-talk"), Some(1.0));
    assert_eq!(score("single-sentence"), Some(1.0));
    assert_eq!(score("spam-talk"), Some(0.5));
}

#[test]
fn mixed_talk_degrees_and_flicker() {
    let v = fixture("mixed-talk");
    let fused = fuse_video(&v, &FusionParams::default());
    let degrees: Vec<_> = fused.iter().map(|f| f.coherence_degree).collect();
    assert_eq!(degrees, [Some(2), Some(0), Some(1)]);
    // The one-frame anger flicker in segment 1 is not a transition.
    assert!(fused[1].transitions.is_empty());
    assert_eq!(fused[1].face_emotion.unwrap().emotion, Emotion::Sadness);
    assert_eq!(fused[2].detected_frames + 2, fused[2].frames_in_span);
}

#[test]
fn laughter_masks_spam_talk_audio() {
    let v = fixture("spam-talk");
    assert!(v.segments[2].audio_emotion.is_empty());
    assert!(!v.segments[0].audio_emotion.is_empty());
}

#[test]
fn single_sentence_link() {
    let v = fixture("single-sentence");
    let fused = fuse_video(&v, &FusionParams::default());
    let model = build_sankey(&v, &fused, None, &Lexicons::bundled(), &SankeyParams::default());
    let link = model.link(Stage::FaceText, Emotion::Neutral, Emotion::Happiness).unwrap();
    assert_eq!(link.sentence_ids, [0]);
    assert!(!model.has_audio);
}

#[test]
fn glyph_radii_equal_fusion_confidences() {
    for v in fixtures() {
        let fused = fuse_video(&v, &FusionParams::default());
        let model = build_projection(&v.meta.id, &fused, &ProjectionParams::default()).unwrap();
        assert_eq!(model.glyphs.len(), fused.len());
        for (g, f) in model.glyphs.iter().zip(&fused) {
            assert_eq!(g.time_index, f.segment_id);
            assert_eq!(g.face.radius, f.face_emotion.map_or(0.0, |d| d.confidence));
            assert_eq!(g.text.radius, f.text_emotion.map_or(0.0, |d| d.confidence));
            assert_eq!(g.audio.radius, f.audio_emotion.map_or(0.0, |d| d.confidence));
        }
    }
}

#[test]
fn literal3_vector_reads_dominant_confidences() {
    let v = fixture("mixed-talk");
    let fused = fuse_video(&v, &FusionParams::default());
    let f = &fused[2];
    let vec = sentence_vector(f, VectorMode::Literal3);
    assert_eq!(vec.values, [f.face_emotion.unwrap().confidence, 0.7, 0.5]);
}

#[test]
fn fixture_audio_has_expected_pitch() {
    let v = fixture("coherent-talk");
    let set = ProsodySet::compute(v.audio.as_ref().unwrap(), &ProsodyParams::default()).unwrap();
    let first: Vec<f64> = set.pitch.slice(&emotion_coherence::TimeSpan::new(0.1, 1.9)).iter().filter_map(|s| s.value).collect();
    assert!(!first.is_empty());
    for f in first {
        assert!((f - 220.0).abs() / 220.0 < 0.01, "{f}");
    }
}
