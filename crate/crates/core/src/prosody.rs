//! Windowed audio features: pitch, intensity and amplitude.
//!
//! Intensity is the windowed RMS (reported in dB, with the linear value kept);
//! amplitude is the peak absolute sample of each window. Pitch comes from the
//! normalized autocorrelation of each window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::model::{AudioTrack, TimeSpan};

/// Floor for the intensity in dB, used for silent windows.
pub const SILENCE_DB: f64 = -80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Pitch,
    Intensity,
    Amplitude,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Pitch, Feature::Intensity, Feature::Amplitude];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Pitch => "pitch",
            Feature::Intensity => "intensity",
            Feature::Amplitude => "amplitude",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| AnalysisError::Usage(format!("unknown audio feature `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProsodySample {
    /// Window center in seconds.
    pub time: f64,
    /// Feature value; `None` for unvoiced pitch windows.
    pub value: Option<f64>,
    /// Linear RMS, intensity only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProsodySeries {
    pub feature: Feature,
    pub window: f64,
    pub hop: f64,
    pub samples: Vec<ProsodySample>,
}

impl ProsodySeries {
    /// Values present in the series (voiced windows only for pitch).
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().filter_map(|s| s.value)
    }

    /// Samples whose time falls in `[span.start, span.end)`, in order.
    pub fn slice(&self, span: &TimeSpan) -> &[ProsodySample] {
        let lo = self.samples.partition_point(|s| s.time < span.start);
        let hi = self.samples.partition_point(|s| s.time < span.end).max(lo);
        &self.samples[lo..hi]
    }
}

/// Free-function form of [`ProsodySeries::slice`] returning an owned series.
pub fn slice(series: &ProsodySeries, span: &TimeSpan) -> ProsodySeries {
    ProsodySeries { samples: series.slice(span).to_vec(), ..series.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProsodyParams {
    /// Analysis window, seconds.
    pub window: f64,
    /// Hop between windows, seconds.
    pub hop: f64,
    pub fmin: f64,
    pub fmax: f64,
    /// Minimum normalized autocorrelation peak for a voiced window.
    pub voicing_threshold: f64,
    /// Windows with linear RMS at or below this are unvoiced.
    pub silence_rms: f64,
}

impl Default for ProsodyParams {
    fn default() -> Self {
        Self { window: 0.04, hop: 0.01, fmin: 65.0, fmax: 500.0, voicing_threshold: 0.5, silence_rms: 1e-4 }
    }
}

/// The three feature series of one audio track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodySet {
    pub pitch: ProsodySeries,
    pub intensity: ProsodySeries,
    pub amplitude: ProsodySeries,
}

impl ProsodySet {
    pub fn compute(audio: &AudioTrack, params: &ProsodyParams) -> Result<Self, AnalysisError> {
        let sr = audio.sample_rate;
        Ok(Self {
            pitch: pitch(&audio.samples, sr, params)?,
            intensity: intensity(&audio.samples, sr, params.window, params.hop)?,
            amplitude: amplitude(&audio.samples, sr, params.window, params.hop)?,
        })
    }

    pub fn series(&self, feature: Feature) -> &ProsodySeries {
        match feature {
            Feature::Pitch => &self.pitch,
            Feature::Intensity => &self.intensity,
            Feature::Amplitude => &self.amplitude,
        }
    }

    pub fn slice(&self, span: &TimeSpan) -> ProsodySet {
        ProsodySet {
            pitch: slice(&self.pitch, span),
            intensity: slice(&self.intensity, span),
            amplitude: slice(&self.amplitude, span),
        }
    }
}

/// Window geometry in samples.
struct Framing {
    window: usize,
    hop: usize,
}

impl Framing {
    fn new(sample_rate: u32, window: f64, hop: f64) -> Result<Self, AnalysisError> {
        if sample_rate == 0 {
            return Err(AnalysisError::Usage("sample rate must be positive".into()));
        }
        if !(hop > 0.0 && window >= hop) {
            return Err(AnalysisError::Usage(format!("need window >= hop > 0, got window={window} hop={hop}")));
        }
        let sr = f64::from(sample_rate);
        let window = ((window * sr).round() as usize).max(1);
        let hop = ((hop * sr).round() as usize).max(1);
        Ok(Self { window, hop })
    }

    /// `(start, len)` of each window. Windows lie fully inside the signal; a
    /// signal shorter than one window yields a single truncated window.
    fn windows(&self, n: usize) -> Vec<(usize, usize)> {
        if n == 0 {
            return Vec::new();
        }
        if n < self.window {
            return vec![(0, n)];
        }
        (0..=(n - self.window) / self.hop).map(|i| (i * self.hop, self.window)).collect()
    }
}

fn window_time(start: usize, len: usize, sample_rate: u32) -> f64 {
    (start as f64 + len as f64 / 2.0) / f64::from(sample_rate)
}

fn rms(frame: &[f32]) -> f64 {
    let sum: f64 = frame.iter().map(|s| f64::from(*s) * f64::from(*s)).sum();
    (sum / frame.len() as f64).sqrt()
}

fn series(feature: Feature, window: f64, hop: f64, samples: Vec<ProsodySample>) -> ProsodySeries {
    ProsodySeries { feature, window, hop, samples }
}

/// Windowed RMS in dB (`20·log10(rms)`, floored at [`SILENCE_DB`]).
pub fn intensity(samples: &[f32], sample_rate: u32, window: f64, hop: f64) -> Result<ProsodySeries, AnalysisError> {
    let framing = Framing::new(sample_rate, window, hop)?;
    let out = framing
        .windows(samples.len())
        .into_iter()
        .map(|(start, len)| {
            let r = rms(&samples[start..start + len]);
            let db = if r > 0.0 { (20.0 * r.log10()).max(SILENCE_DB) } else { SILENCE_DB };
            ProsodySample { time: window_time(start, len, sample_rate), value: Some(db), rms: Some(r) }
        })
        .collect();
    Ok(series(Feature::Intensity, window, hop, out))
}

/// Peak absolute sample per window.
pub fn amplitude(samples: &[f32], sample_rate: u32, window: f64, hop: f64) -> Result<ProsodySeries, AnalysisError> {
    let framing = Framing::new(sample_rate, window, hop)?;
    let out = framing
        .windows(samples.len())
        .into_iter()
        .map(|(start, len)| {
            let peak = samples[start..start + len].iter().map(|s| f64::from(s.abs())).fold(0.0, f64::max);
            ProsodySample { time: window_time(start, len, sample_rate), value: Some(peak), rms: None }
        })
        .collect();
    Ok(series(Feature::Amplitude, window, hop, out))
}

/// Normalized autocorrelation of `frame` for lags `0..=max_lag`.
///
/// `r(l) = Σ x[i]·x[i+l] / sqrt(Σ x[i]² · Σ x[i+l]²)` over the overlap.
pub fn normalized_autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    let n = frame.len();
    (0..=max_lag)
        .map(|lag| {
            if lag >= n {
                return 0.0;
            }
            let (mut cross, mut head, mut tail) = (0.0, 0.0, 0.0);
            for i in 0..n - lag {
                let (a, b) = (frame[i], frame[i + lag]);
                cross += a * b;
                head += a * a;
                tail += b * b;
            }
            let denom = (head * tail).sqrt();
            if denom > 0.0 {
                cross / denom
            } else {
                0.0
            }
        })
        .collect()
}

/// Share of the strongest peak a shorter-lag peak needs to be preferred;
/// guards against picking a multiple of the true period.
const SUBHARMONIC_RATIO: f64 = 0.95;

/// Pitch estimate for one window: `(frequency, peak correlation)`, or `None`
/// when the window has no usable peak in the lag range.
pub fn estimate_pitch(frame: &[f64], sample_rate: u32, fmin: f64, fmax: f64) -> Option<(f64, f64)> {
    let sr = f64::from(sample_rate);
    let min_lag = ((sr / fmax).floor() as usize).max(1);
    let max_lag = (sr / fmin).ceil() as usize;
    if max_lag + 1 >= frame.len() || min_lag >= max_lag {
        return None;
    }
    let r = normalized_autocorrelation(frame, max_lag + 1);
    let peaks: Vec<usize> = (min_lag.max(1)..=max_lag).filter(|&l| r[l] > r[l - 1] && r[l] >= r[l + 1]).collect();
    let strongest = peaks.iter().map(|&l| r[l]).fold(f64::NEG_INFINITY, f64::max);
    let lag = *peaks.iter().find(|&&l| r[l] >= SUBHARMONIC_RATIO * strongest)?;
    let (left, mid, right) = (r[lag - 1], r[lag], r[lag + 1]);
    let curvature = left - 2.0 * mid + right;
    let shift = if curvature < 0.0 { (0.5 * (left - right) / curvature).clamp(-0.5, 0.5) } else { 0.0 };
    let period = lag as f64 + shift;
    let frequency = sr / period;
    (frequency >= fmin * 0.99 && frequency <= fmax * 1.01).then_some((frequency, mid))
}

/// Autocorrelation pitch track. A window is voiced when its correlation peak
/// reaches the voicing threshold and its RMS is above the silence floor.
pub fn pitch(samples: &[f32], sample_rate: u32, params: &ProsodyParams) -> Result<ProsodySeries, AnalysisError> {
    let nyquist = f64::from(sample_rate) / 2.0;
    if !(params.fmin > 0.0 && params.fmin < params.fmax && params.fmax <= nyquist) {
        return Err(AnalysisError::Usage(format!(
            "need 0 < fmin < fmax <= sampleRate/2, got fmin={} fmax={}",
            params.fmin, params.fmax
        )));
    }
    if params.window < 2.0 / params.fmin {
        return Err(AnalysisError::Usage(format!(
            "window {}s is shorter than two periods of fmin {} Hz",
            params.window, params.fmin
        )));
    }
    let framing = Framing::new(sample_rate, params.window, params.hop)?;
    let out = framing
        .windows(samples.len())
        .into_iter()
        .map(|(start, len)| {
            let frame: Vec<f64> = samples[start..start + len].iter().map(|s| f64::from(*s)).collect();
            let loud = {
                let e: f64 = frame.iter().map(|x| x * x).sum();
                (e / len as f64).sqrt() > params.silence_rms
            };
            let value = loud
                .then(|| estimate_pitch(&frame, sample_rate, params.fmin, params.fmax))
                .flatten()
                .filter(|(_, peak)| *peak >= params.voicing_threshold)
                .map(|(f, _)| f);
            ProsodySample { time: window_time(start, len, sample_rate), value, rms: None }
        })
        .collect();
    Ok(series(Feature::Pitch, params.window, params.hop, out))
}
