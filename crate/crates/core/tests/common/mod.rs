//! Shared fixtures and independent reference implementations.
//!
//! The oracles here are deliberately naive: linear scans, no shared helpers
//! with the library beyond the data types.

#![allow(dead_code)]

use std::path::PathBuf;

use emotion_coherence::ingest::{load_bundle, BundleManifest};
use emotion_coherence::{Emotion, EmotionDistribution, FrameAnnotation, VideoRecord};

pub const FIXTURE_IDS: [&str; 5] = ["cluster-talk", "coherent-talk", "mixed-talk", "single-sentence", "spam-talk"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

pub fn fixture(id: &str) -> VideoRecord {
    let manifest = BundleManifest::from_dir(corpus_dir().join(id)).expect("fixture bundle");
    load_bundle(&manifest).expect("fixture loads")
}

pub fn fixtures() -> Vec<VideoRecord> {
    FIXTURE_IDS.iter().map(|id| fixture(id)).collect()
}

/// Degree from counting equal pairs.
pub fn degree_by_pairs(f: Emotion, t: Emotion, a: Emotion) -> u8 {
    let equal = [f == t, t == a, f == a].iter().filter(|&&b| b).count();
    match equal {
        3 => 2,
        0 => 0,
        _ => 1,
    }
}

/// Strictly largest positive confidence, earliest category on ties.
pub fn argmax(dist: &EmotionDistribution) -> Option<(Emotion, f64)> {
    let mut best: Option<(Emotion, f64)> = None;
    for e in Emotion::ALL {
        let c = dist.get(e);
        if c > 0.0 && best.is_none_or(|(_, b)| c > b) {
            best = Some((e, c));
        }
    }
    best
}

fn frame_label(f: &FrameAnnotation) -> Option<(Emotion, f64)> {
    if f.face_detected {
        argmax(&f.distribution)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSentence {
    pub face: Option<(Emotion, f64)>,
    pub text: Option<(Emotion, f64)>,
    pub audio: Option<(Emotion, f64)>,
    pub degree: Option<u8>,
    /// `(time, before, after)`.
    pub transitions: Vec<(f64, Emotion, Emotion)>,
    pub frames_in_span: usize,
    pub detected_frames: usize,
    pub face_mean: Vec<f64>,
}

pub fn oracle_transitions(labels: &[(f64, Emotion)], min_hold: usize) -> Vec<(f64, Emotion, Emotion)> {
    let mut runs: Vec<(f64, Emotion, usize)> = Vec::new();
    for &(t, e) in labels {
        if let Some(last) = runs.last_mut() {
            if last.1 == e {
                last.2 += 1;
                continue;
            }
        }
        runs.push((t, e, 1));
    }
    let kept: Vec<_> = runs.into_iter().filter(|r| r.2 >= min_hold).collect();
    let mut out = Vec::new();
    let mut prev: Option<Emotion> = None;
    for (t, e, _) in kept {
        if let Some(p) = prev {
            if p != e {
                out.push((t, p, e));
            }
        }
        prev = Some(e);
    }
    out
}

/// Straight-line sentence fusion with frame-count voting.
pub fn oracle_sentences(video: &VideoRecord, min_hold: usize) -> Vec<OracleSentence> {
    let mut out = Vec::new();
    for seg in &video.segments {
        let inside: Vec<&FrameAnnotation> =
            video.frames.iter().filter(|f| f.timestamp >= seg.span.start && f.timestamp < seg.span.end).collect();
        let mut count = [0usize; 8];
        let mut conf = [0.0f64; 8];
        let mut labels = Vec::new();
        for f in &inside {
            if let Some((e, c)) = frame_label(f) {
                count[e.index()] += 1;
                conf[e.index()] += c;
                labels.push((f.timestamp, e));
            }
        }
        let mut face: Option<(Emotion, usize, f64)> = None;
        for e in Emotion::ALL {
            let k = count[e.index()];
            if k == 0 {
                continue;
            }
            let mean = conf[e.index()] / k as f64;
            let take = match face {
                None => true,
                Some((_, bk, bm)) => k > bk || (k == bk && mean > bm),
            };
            if take {
                face = Some((e, k, mean));
            }
        }
        let face = face.map(|(e, _, m)| (e, m));
        let text = argmax(&seg.text_emotion);
        let audio = argmax(&seg.audio_emotion);
        let degree = match (face, text, audio) {
            (Some(f), Some(t), Some(a)) => Some(degree_by_pairs(f.0, t.0, a.0)),
            _ => None,
        };
        let detected: Vec<_> = inside.iter().filter(|f| f.face_detected && f.distribution.iter().next().is_some()).collect();
        let mut face_mean = vec![0.0; 8];
        for f in &detected {
            for e in Emotion::ALL {
                face_mean[e.index()] += f.distribution.get(e);
            }
        }
        for v in &mut face_mean {
            if !detected.is_empty() {
                *v /= detected.len() as f64;
            }
        }
        out.push(OracleSentence {
            face,
            text,
            audio,
            degree,
            transitions: oracle_transitions(&labels, min_hold),
            frames_in_span: inside.len(),
            detected_frames: inside.iter().filter(|f| f.face_detected).count(),
            face_mean,
        });
    }
    out
}

/// Per word: seconds under each face category, and undetected seconds.
pub fn oracle_word_time(video: &VideoRecord) -> Vec<([f64; 8], f64)> {
    let mut out = Vec::new();
    for seg in &video.segments {
        for w in &seg.words {
            let mut per = [0.0; 8];
            let mut covered = 0.0;
            for (i, f) in video.frames.iter().enumerate() {
                let end = if i + 1 < video.frames.len() { video.frames[i + 1].timestamp } else { video.meta.duration };
                let lo = f.timestamp.max(w.span.start);
                let hi = end.min(w.span.end);
                if hi > lo {
                    if let Some((e, _)) = frame_label(f) {
                        per[e.index()] += hi - lo;
                        covered += hi - lo;
                    }
                }
            }
            out.push((per, w.span.end - w.span.start - covered));
        }
    }
    out
}

/// Lloyd's 2-means on 2-D points, seeded with the farthest pair; returns labels.
pub fn two_means(points: &[[f64; 2]]) -> Vec<usize> {
    let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let (mut ia, mut ib, mut best) = (0, 0, -1.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if d(points[i], points[j]) > best {
                best = d(points[i], points[j]);
                ia = i;
                ib = j;
            }
        }
    }
    let mut centers = [points[ia], points[ib]];
    let mut labels = vec![0; points.len()];
    for _ in 0..100 {
        let next: Vec<usize> = points.iter().map(|&p| usize::from(d(p, centers[1]) < d(p, centers[0]))).collect();
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<_> = points.iter().zip(&next).filter(|(_, &l)| l == c).map(|(p, _)| *p).collect();
            if !members.is_empty() {
                let n = members.len() as f64;
                *center = [members.iter().map(|p| p[0]).sum::<f64>() / n, members.iter().map(|p| p[1]).sum::<f64>() / n];
            }
        }
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

/// Fraction of points whose cluster matches `truth` under the better of the two label matchings.
pub fn partition_agreement(labels: &[usize], truth: &[usize]) -> f64 {
    let same = labels.iter().zip(truth).filter(|(a, b)| a == b).count();
    let n = labels.len();
    same.max(n - same) as f64 / n as f64
}
