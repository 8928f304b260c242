mod common;

use common::{fixtures, oracle_sentences, oracle_transitions, oracle_word_time};
use emotion_coherence::fusion::{detect_transitions, fuse_video, fuse_words, FusionParams};
use emotion_coherence::synth::{synthetic_video, SynthSpec};
use emotion_coherence::{Emotion, EmotionDistribution, FrameAnnotation, VideoRecord};

fn check_sentences(video: &VideoRecord) {
    let fused = fuse_video(video, &FusionParams::default());
    let oracle = oracle_sentences(video, 3);
    assert_eq!(fused.len(), oracle.len());
    for (f, o) in fused.iter().zip(&oracle) {
        let id = f.segment_id;
        assert_eq!(f.face_emotion.map(|d| d.emotion), o.face.map(|d| d.0), "{} seg {id} face", video.meta.id);
        if let (Some(a), Some(b)) = (f.face_emotion, o.face) {
            assert!((a.confidence - b.1).abs() < 1e-12);
        }
        assert_eq!(f.text_emotion.map(|d| (d.emotion, d.confidence)), o.text);
        assert_eq!(f.audio_emotion.map(|d| (d.emotion, d.confidence)), o.audio);
        assert_eq!(f.coherence_degree, o.degree);
        let got: Vec<_> = f.transitions.iter().map(|t| (t.time, t.before, t.after)).collect();
        assert_eq!(got, o.transitions, "{} seg {id} transitions", video.meta.id);
        assert_eq!(f.frames_in_span, o.frames_in_span);
        assert_eq!(f.detected_frames, o.detected_frames);
        for e in Emotion::ALL {
            assert!((f.face_distribution_mean.get(e) - o.face_mean[e.index()]).abs() < 1e-12);
        }
    }
}

fn check_words(video: &VideoRecord) {
    let words = fuse_words(video);
    let oracle = oracle_word_time(video);
    assert_eq!(words.len(), oracle.len());
    for (w, (per, undetected)) in words.iter().zip(&oracle) {
        for e in Emotion::ALL {
            assert!((w.face_durations.get(e) - per[e.index()]).abs() < 1e-9, "{} {:?}", w.word, e);
        }
        assert!((w.undetected_duration - undetected.max(0.0)).abs() < 1e-9);
        let total = w.face_durations.total() + w.undetected_duration;
        assert!((total - w.span.duration()).abs() < 1e-9);
    }
}

#[test]
fn fixtures_match_oracle() {
    for video in fixtures() {
        check_sentences(&video);
        check_words(&video);
    }
}

#[test]
fn synthetic_videos_match_oracle() {
    for seed in 0..30 {
        let video = synthetic_video(seed, &SynthSpec { max_frames: 600, ..SynthSpec::default() });
        check_sentences(&video);
        check_words(&video);
    }
}

fn labelled(seq: &[Option<Emotion>]) -> Vec<FrameAnnotation> {
    seq.iter()
        .enumerate()
        .map(|(i, e)| FrameAnnotation {
            timestamp: i as f64 * 0.1,
            face_detected: e.is_some(),
            bounding_box: None,
            distribution: e.map(EmotionDistribution::one_hot).unwrap_or_default(),
        })
        .collect()
}

#[test]
fn transition_oracle_agrees_on_exhaustive_short_sequences() {
    // Every sequence of length 7 over {happiness, sadness, undetected}.
    let alphabet = [Some(Emotion::Happiness), Some(Emotion::Sadness), None];
    for code in 0..3usize.pow(7) {
        let seq: Vec<_> = (0..7).map(|k| alphabet[(code / 3usize.pow(k)) % 3]).collect();
        let frames = labelled(&seq);
        let labels: Vec<_> = frames.iter().filter_map(|f| f.dominant().map(|d| (f.timestamp, d.0))).collect();
        for k in 1..=4 {
            let got: Vec<_> = detect_transitions(&frames, k, &[]).iter().map(|t| (t.time, t.before, t.after)).collect();
            assert_eq!(got, oracle_transitions(&labels, k), "{seq:?} k={k}");
        }
    }
}
