//! Structural validation of a [`VideoRecord`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{EmotionDistribution, TimeSpan, VideoRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub reason: String,
}

/// Every invariant violation found in a record. Empty means well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    fn push(&mut self, path: impl Into<String>, reason: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), reason: reason.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.path, v.reason)?;
        }
        Ok(())
    }
}

fn check_distribution(report: &mut ValidationReport, path: &str, dist: &EmotionDistribution) {
    for (emotion, c) in dist.iter() {
        if !(0.0..=1.0).contains(&c) {
            report.push(format!("{path}.{emotion}"), "confidence outside [0, 1]");
        }
    }
    if !dist.is_empty() && !dist.is_detection() {
        report.push(path, "no category has positive confidence");
    }
}

/// Returns false (and records a violation) when the span itself is malformed.
fn check_span(report: &mut ValidationReport, path: &str, span: &TimeSpan, duration: f64) -> bool {
    if !span.start.is_finite() || !span.end.is_finite() {
        report.push(path, "non-finite time");
        return false;
    }
    if span.end <= span.start {
        report.push(path, "span inverted");
        return false;
    }
    if span.start < 0.0 || span.end > duration {
        report.push(path, "span outside video duration");
    }
    true
}

/// Lists every invariant violation in `video`.
pub fn validate(video: &VideoRecord) -> ValidationReport {
    let mut report = ValidationReport::default();
    let meta = &video.meta;
    if meta.id.trim().is_empty() {
        report.push("meta.id", "empty id");
    }
    if !(meta.frame_rate.is_finite() && meta.frame_rate > 0.0) {
        report.push("meta.frameRate", "frame rate must be positive");
    }
    if !(meta.duration.is_finite() && meta.duration > 0.0) {
        report.push("meta.duration", "duration must be positive");
    }
    let duration = meta.duration;

    let mut prev_t: Option<f64> = None;
    for (i, frame) in video.frames.iter().enumerate() {
        let path = format!("frames[{i}]");
        let t = frame.timestamp;
        if !t.is_finite() || t < 0.0 || t > duration {
            report.push(&path, "timestamp outside video duration");
        }
        if let Some(p) = prev_t {
            if t <= p {
                report.push(&path, "timestamps not strictly increasing");
            }
        }
        prev_t = Some(t);
        if frame.face_detected {
            if frame.distribution.is_empty() {
                report.push(&path, "face detected but no emotions");
            }
            check_distribution(&mut report, &format!("{path}.emotions"), &frame.distribution);
        } else if !frame.distribution.is_empty() {
            report.push(&path, "emotions present without a detected face");
        }
        if let Some(b) = frame.bounding_box {
            let inside = [b.x, b.y, b.w, b.h].iter().all(|v| (0.0..=1.0).contains(v))
                && b.x + b.w <= 1.0
                && b.y + b.h <= 1.0;
            if !inside {
                report.push(format!("{path}.box"), "bounding box not normalized");
            }
        }
    }

    let mut prev: Option<(usize, TimeSpan)> = None;
    for (i, seg) in video.segments.iter().enumerate() {
        let path = format!("segments[{i}]");
        if seg.id != i {
            report.push(format!("{path}.id"), format!("expected id {i}, found {}", seg.id));
        }
        let span_ok = check_span(&mut report, &path, &seg.span, duration);
        check_distribution(&mut report, &format!("{path}.textEmotion"), &seg.text_emotion);
        check_distribution(&mut report, &format!("{path}.audioEmotion"), &seg.audio_emotion);
        if !span_ok {
            continue;
        }
        if let Some((pid, pspan)) = prev {
            if seg.span.start < pspan.end {
                report.push(&path, format!("segments {pid} and {} overlap or are out of order", seg.id));
            }
        }
        prev = Some((seg.id, seg.span));

        let mut prev_word_end: Option<f64> = None;
        for (j, word) in seg.words.iter().enumerate() {
            let wpath = format!("{path}.words[{j}]");
            if word.text.trim().is_empty() {
                report.push(&wpath, "empty word");
            }
            if !(word.span.start.is_finite() && word.span.end.is_finite()) {
                report.push(&wpath, "non-finite time");
                continue;
            }
            if word.span.end <= word.span.start {
                report.push(&wpath, "span inverted");
                continue;
            }
            if !seg.span.contains_span(&word.span) {
                report.push(&wpath, "word outside segment");
            }
            if prev_word_end.is_some_and(|e| word.span.start < e) {
                report.push(&wpath, "words overlap or are out of order");
            }
            prev_word_end = Some(word.span.end);
        }
    }

    for (i, span) in video.laughter.iter().enumerate() {
        check_span(&mut report, &format!("laughter[{i}]"), span, duration);
    }

    if let Some(audio) = &video.audio {
        if audio.sample_rate == 0 {
            report.push("audio", "sample rate must be positive");
        }
    }
    report
}
