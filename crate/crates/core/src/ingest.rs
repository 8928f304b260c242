//! Bundle loading, laughter masking and bundle serialization.
//!
//! A bundle is a directory holding:
//!
//! | file            | contents                                                   |
//! |-----------------|------------------------------------------------------------|
//! | `meta.json`     | `{id, title, category, duration, frameRate}`               |
//! | `frames.jsonl`  | one `{t, faceDetected, box?, emotions}` object per line    |
//! | `segments.json` | array of `{id, start, end, text, words, textEmotion, audioEmotion}` |
//! | `laughter.json` | optional array of `{start, end}`                           |
//! | `audio.wav`     | optional RIFF/WAVE, 16-bit PCM                             |
//! | `media.*`       | optional original media file, served for playback         |
//!
//! Without a `media.*` file, `audio.wav` is served for playback.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IngestError;
use crate::model::{AudioTrack, EmotionDistribution, FrameAnnotation, Segment, TimeSpan, VideoMeta, VideoRecord};
use crate::validate::validate;

pub const META_FILE: &str = "meta.json";
pub const FRAMES_FILE: &str = "frames.jsonl";
pub const SEGMENTS_FILE: &str = "segments.json";
pub const LAUGHTER_FILE: &str = "laughter.json";
pub const AUDIO_FILE: &str = "audio.wav";

/// Default fraction of a segment that laughter must cover before its audio
/// emotion is discarded.
pub const DEFAULT_LAUGHTER_THRESHOLD: f64 = 0.5;

/// Paths of the documents making up one bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleManifest {
    pub meta: PathBuf,
    pub frames: PathBuf,
    pub segments: PathBuf,
    pub laughter: Option<PathBuf>,
    pub audio: Option<PathBuf>,
    pub media: Option<PathBuf>,
}

impl BundleManifest {
    /// Resolves the standard file names inside `dir`. Optional documents are
    /// included only when present.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, IngestError> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(IngestError::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "bundle directory not found"),
            ));
        }
        let optional = |name: &str| Some(dir.join(name)).filter(|p| p.is_file());
        let media = fs::read_dir(dir)
            .map_err(|e| IngestError::io(dir, e))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file() && p.file_stem().is_some_and(|s| s == "media"))
            .min();
        Ok(Self {
            meta: dir.join(META_FILE),
            frames: dir.join(FRAMES_FILE),
            segments: dir.join(SEGMENTS_FILE),
            laughter: optional(LAUGHTER_FILE),
            audio: optional(AUDIO_FILE),
            media,
        })
    }

    /// Input documents in the fixed order used for content digests.
    fn inputs(&self) -> Vec<&Path> {
        let mut paths = vec![self.meta.as_path(), self.frames.as_path(), self.segments.as_path()];
        paths.extend(self.laughter.as_deref());
        paths.extend(self.audio.as_deref());
        paths
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestOptions {
    /// Fraction of a segment's duration that laughter must exceed to mask its audio emotion.
    pub laughter_threshold: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { laughter_threshold: DEFAULT_LAUGHTER_THRESHOLD }
    }
}

/// A loaded record together with the digest of the bytes it came from.
#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub record: VideoRecord,
    /// Hex SHA-256 over the input documents and ingest options.
    pub digest: String,
    /// File served for playback: `media.*`, else `audio.wav`.
    pub media: Option<PathBuf>,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, IngestError> {
    fs::read(path).map_err(|e| IngestError::io(path, e))
}

fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, IngestError> {
    serde_json::from_slice(bytes).map_err(|e| IngestError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn parse_frames(path: &Path, bytes: &[u8]) -> Result<Vec<FrameAnnotation>, IngestError> {
    let mut frames = Vec::new();
    for (i, line) in BufReader::new(bytes).lines().enumerate() {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let frame = serde_json::from_str(&line).map_err(|e| IngestError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            column: e.column(),
            message: e.to_string(),
        })?;
        frames.push(frame);
    }
    Ok(frames)
}

/// Decodes 16-bit PCM; multi-channel files keep the first channel.
pub fn read_wav(path: &Path) -> Result<AudioTrack, IngestError> {
    let audio_err = |message: String| IngestError::Audio { path: path.to_path_buf(), message };
    let mut reader = hound::WavReader::open(path).map_err(|e| audio_err(e.to_string()))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(audio_err(format!(
            "expected 16-bit PCM, found {:?} {}-bit",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = usize::from(spec.channels.max(1));
    let samples = reader
        .samples::<i16>()
        .step_by(channels)
        .map(|s| s.map(|v| f32::from(v) / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| audio_err(e.to_string()))?;
    Ok(AudioTrack { sample_rate: spec.sample_rate, samples })
}

pub fn write_wav(path: &Path, audio: &AudioTrack) -> Result<(), IngestError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let audio_err = |e: hound::Error| IngestError::Audio { path: path.to_path_buf(), message: e.to_string() };
    let mut writer = hound::WavWriter::create(path, spec).map_err(audio_err)?;
    for s in &audio.samples {
        let v = (f64::from(*s) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(audio_err)?;
    }
    writer.finalize().map_err(audio_err)
}

/// Loads a bundle with default options.
pub fn load_bundle(manifest: &BundleManifest) -> Result<VideoRecord, IngestError> {
    load_bundle_with(manifest, &IngestOptions::default()).map(|b| b.record)
}

/// Parses, sorts, validates and laughter-masks one bundle.
pub fn load_bundle_with(manifest: &BundleManifest, options: &IngestOptions) -> Result<LoadedBundle, IngestError> {
    let mut hasher = Sha256::new();
    let mut read = |path: &Path| -> Result<Vec<u8>, IngestError> {
        let bytes = read_bytes(path)?;
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
        Ok(bytes)
    };
    let inputs = manifest.inputs();
    let contents = inputs.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
    hasher.update(serde_json::to_vec(options).expect("options serialize"));
    let digest = hex::encode(hasher.finalize());

    let meta: VideoMeta = parse_json(&manifest.meta, &contents[0])?;
    let mut frames = parse_frames(&manifest.frames, &contents[1])?;
    let mut segments: Vec<Segment> = parse_json(&manifest.segments, &contents[2])?;
    let laughter: Vec<TimeSpan> = match &manifest.laughter {
        Some(path) => parse_json(path, &contents[3])?,
        None => Vec::new(),
    };
    let audio = manifest.audio.as_deref().map(read_wav).transpose()?;

    frames.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    segments.sort_by(|a, b| a.span.start.total_cmp(&b.span.start).then(a.id.cmp(&b.id)));

    let record = VideoRecord { meta, frames, segments, laughter, audio };
    let report = validate(&record);
    if !report.is_empty() {
        return Err(IngestError::Invalid(report));
    }
    let segments = mask_laughter(&record.segments, &record.laughter, options.laughter_threshold);
    Ok(LoadedBundle {
        record: VideoRecord { segments, ..record },
        digest,
        media: manifest.media.clone().or_else(|| manifest.audio.clone()),
    })
}

/// Merges possibly-overlapping spans into a sorted disjoint union.
fn merge_spans(spans: &[TimeSpan]) -> Vec<TimeSpan> {
    let mut sorted: Vec<TimeSpan> = spans.iter().copied().filter(|s| s.end > s.start).collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut merged: Vec<TimeSpan> = Vec::with_capacity(sorted.len());
    for s in sorted {
        match merged.last_mut() {
            Some(last) if s.start <= last.end => last.end = last.end.max(s.end),
            _ => merged.push(s),
        }
    }
    merged
}

/// Clears the audio emotion of every segment whose laughter coverage exceeds
/// `threshold` of its duration. Text and face data are untouched.
pub fn mask_laughter(segments: &[Segment], laughter: &[TimeSpan], threshold: f64) -> Vec<Segment> {
    let union = merge_spans(laughter);
    segments
        .iter()
        .map(|seg| {
            let covered: f64 = union.iter().map(|l| seg.span.overlap(l)).sum();
            let duration = seg.span.duration();
            if duration > 0.0 && covered / duration > threshold {
                Segment { audio_emotion: EmotionDistribution::new(), ..seg.clone() }
            } else {
                seg.clone()
            }
        })
        .collect()
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IngestError> {
    let body = serde_json::to_vec_pretty(value).expect("bundle documents serialize");
    fs::write(path, body).map_err(|e| IngestError::io(path, e))
}

/// Writes `video` as a bundle directory readable by [`load_bundle`].
pub fn write_bundle(video: &VideoRecord, dir: &Path) -> Result<BundleManifest, IngestError> {
    fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    write_json(&dir.join(META_FILE), &video.meta)?;
    let mut frames = String::new();
    for f in &video.frames {
        frames.push_str(&serde_json::to_string(f).expect("frame serializes"));
        frames.push('\n');
    }
    let frames_path = dir.join(FRAMES_FILE);
    fs::write(&frames_path, frames).map_err(|e| IngestError::io(&frames_path, e))?;
    write_json(&dir.join(SEGMENTS_FILE), &video.segments)?;
    if !video.laughter.is_empty() {
        write_json(&dir.join(LAUGHTER_FILE), &video.laughter)?;
    }
    if let Some(audio) = &video.audio {
        write_wav(&dir.join(AUDIO_FILE), audio)?;
    }
    BundleManifest::from_dir(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Emotion;

    fn seg(start: f64, end: f64) -> Segment {
        Segment {
            id: 0,
            span: TimeSpan::new(start, end),
            text: String::new(),
            words: vec![],
            text_emotion: EmotionDistribution::one_hot(Emotion::Happiness),
            audio_emotion: EmotionDistribution::one_hot(Emotion::Neutral),
        }
    }

    #[test]
    fn laughter_over_threshold_clears_audio() {
        // 3 of 4 seconds covered = 0.75 > 0.5
        let out = mask_laughter(&[seg(0.0, 4.0)], &[TimeSpan::new(1.0, 4.0)], 0.5);
        assert!(out[0].audio_emotion.is_empty());
        assert_eq!(out[0].text_emotion, EmotionDistribution::one_hot(Emotion::Happiness));
    }

    #[test]
    fn short_laughter_keeps_audio() {
        // 0.1 of 4 seconds = 2.5%
        let out = mask_laughter(&[seg(0.0, 4.0)], &[TimeSpan::new(3.9, 4.0)], 0.5);
        assert_eq!(out[0], seg(0.0, 4.0));
    }

    #[test]
    fn no_laughter_is_identity() {
        let segs = vec![seg(0.0, 1.0), seg(2.0, 3.0)];
        assert_eq!(mask_laughter(&segs, &[], 0.5), segs);
    }

    #[test]
    fn overlapping_laughter_is_not_double_counted() {
        // Union is [0, 1.5): 37.5% of the segment.
        let laughs = [TimeSpan::new(0.0, 1.5), TimeSpan::new(0.5, 1.5), TimeSpan::new(1.0, 1.5)];
        let out = mask_laughter(&[seg(0.0, 4.0)], &laughs, 0.5);
        assert!(!out[0].audio_emotion.is_empty());
    }

    #[test]
    fn masking_is_idempotent() {
        let laughs = [TimeSpan::new(1.0, 4.0), TimeSpan::new(5.0, 5.2)];
        let segs = vec![seg(0.0, 4.0), seg(5.0, 6.0)];
        let once = mask_laughter(&segs, &laughs, 0.5);
        assert_eq!(mask_laughter(&once, &laughs, 0.5), once);
    }

    #[test]
    fn merge_spans_unions() {
        let merged = merge_spans(&[TimeSpan::new(2.0, 3.0), TimeSpan::new(0.0, 1.0), TimeSpan::new(0.5, 2.0)]);
        assert_eq!(merged, vec![TimeSpan::new(0.0, 3.0)]);
    }
}
