//! Sentence vectors, exact t-SNE and glyph payloads for the sentence scatter.

use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::fusion::{Dominant, SentenceFusion};
use crate::model::{Emotion, EmotionDistribution};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorMode {
    /// Face, text and audio distributions concatenated: 24 dimensions.
    #[default]
    Concat,
    /// The three dominant confidences: 3 dimensions.
    Literal3,
}

impl FromStr for VectorMode {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "concat" => Ok(VectorMode::Concat),
            "literal3" => Ok(VectorMode::Literal3),
            other => Err(AnalysisError::Usage(format!("unknown vector mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SentenceVector {
    pub segment_id: usize,
    pub values: Vec<f64>,
}

pub fn sentence_vector(fusion: &SentenceFusion, mode: VectorMode) -> SentenceVector {
    let values = match mode {
        VectorMode::Concat => {
            let dists: [&EmotionDistribution; 3] =
                [&fusion.face_distribution_mean, &fusion.text_distribution, &fusion.audio_distribution];
            dists.iter().flat_map(|d| d.to_vector()).collect()
        }
        VectorMode::Literal3 => [fusion.face_emotion, fusion.text_emotion, fusion.audio_emotion]
            .iter()
            .map(|d| d.map_or(0.0, |d| d.confidence))
            .collect(),
    };
    SentenceVector { segment_id: fusion.segment_id, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 5.0,
            iterations: 1000,
            learning_rate: 100.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 100,
            seed: 0,
        }
    }
}

const INIT_SIGMA: f64 = 1e-4;
const MOMENTUM_SWITCH: usize = 250;
const INITIAL_MOMENTUM: f64 = 0.5;
const FINAL_MOMENTUM: f64 = 0.8;
const MIN_GAIN: f64 = 0.01;
const PROB_FLOOR: f64 = 1e-12;
const BISECTION_TOLERANCE: f64 = 1e-10;
const BISECTION_MAX_STEPS: usize = 200;
/// KL divergence is recorded every this many iterations.
pub const KL_INTERVAL: usize = 50;

/// Embedding plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TsneResult {
    pub coordinates: Vec<[f64; 2]>,
    /// Perplexity actually targeted, after clamping for small inputs.
    pub effective_perplexity: f64,
    /// Per-point `|log2(achieved perplexity) - log2(target)|`.
    pub perplexity_residuals: Vec<f64>,
    /// `(iteration, KL divergence)` checkpoints; iterations are 1-based.
    pub kl_history: Vec<(usize, f64)>,
}

/// Sum that does not depend on the order of `values`: the terms are sorted
/// first, so a relabeled input yields a bitwise-identical result.
fn order_free_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

fn squared_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Conditional affinities of row `i` at precision `beta`, returning the entropy in nats.
fn row_affinities(dist: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let n = out.len();
    let d_min = (0..n).filter(|&j| j != i).map(|j| dist[j]).fold(f64::INFINITY, f64::min);
    for j in 0..n {
        out[j] = if j == i { 0.0 } else { (-beta * (dist[j] - d_min)).exp() };
    }
    let sum = order_free_sum(&mut out.to_vec());
    let mut terms = Vec::with_capacity(n);
    for p in out.iter_mut() {
        *p /= sum;
        if *p > 0.0 {
            terms.push(-*p * p.ln());
        }
    }
    order_free_sum(&mut terms)
}

/// Gaussian conditional affinities with each row's bandwidth bisected to the
/// target perplexity. Returns the row-major matrix and per-row residuals in log2 units.
pub fn calibrate_affinities(dist: &[f64], n: usize, perplexity: f64) -> (Vec<f64>, Vec<f64>) {
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let row_dist = &dist[i * n..(i + 1) * n];
        let row = &mut p[i * n..(i + 1) * n];
        let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
        let mut beta = 1.0;
        let mut entropy = row_affinities(row_dist, i, beta, row);
        for _ in 0..BISECTION_MAX_STEPS {
            let diff = entropy - target;
            if diff.abs() < BISECTION_TOLERANCE {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            entropy = row_affinities(row_dist, i, beta, row);
        }
        residuals.push(((entropy - target) / std::f64::consts::LN_2).abs());
    }
    (p, residuals)
}

fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let mut num = vec![0.0; n * n];
    let mut z = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
                z += num[i * n + j];
            }
        }
    }
    let mut kl = 0.0;
    for k in 0..n * n {
        if p[k] > 0.0 && k / n != k % n {
            let q = (num[k] / z).max(PROB_FLOOR);
            kl += p[k] * (p[k] / q).ln();
        }
    }
    kl
}

fn center(y: &mut [[f64; 2]]) {
    let n = y.len() as f64;
    let mean = [0, 1].map(|d| order_free_sum(&mut y.iter().map(|p| p[d]).collect::<Vec<_>>()) / n);
    for p in y.iter_mut() {
        p[0] -= mean[0];
        p[1] -= mean[1];
    }
}

/// Fixed layouts for inputs too small for a perplexity: origin, a unit
/// segment, an equilateral triangle with unit sides. All centered.
fn template(n: usize) -> Vec<[f64; 2]> {
    match n {
        1 => vec![[0.0, 0.0]],
        2 => vec![[-0.5, 0.0], [0.5, 0.0]],
        _ => {
            let h = 3f64.sqrt() / 2.0;
            vec![[-0.5, -h / 3.0], [0.5, -h / 3.0], [0.0, 2.0 * h / 3.0]]
        }
    }
}

/// Perplexity usable with `n` points: unchanged when below `n - 1`, otherwise
/// reduced to `(n - 1) / 2`.
pub fn effective_perplexity(perplexity: f64, n: usize) -> f64 {
    let max = (n.saturating_sub(1)) as f64;
    if perplexity < max {
        perplexity
    } else {
        (max / 2.0).max(1.0)
    }
}

/// Seeded isotropic Gaussian initialization with standard deviation 1e-4.
pub fn initial_layout(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, INIT_SIGMA).expect("valid sigma");
    (0..n).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect()
}

fn check_input(vectors: &[Vec<f64>]) -> Result<(), AnalysisError> {
    if vectors.is_empty() {
        return Err(AnalysisError::DegenerateInput("no vectors".into()));
    }
    let dim = vectors[0].len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(AnalysisError::DegenerateInput(format!("vector {i} has dimension {} not {dim}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(AnalysisError::DegenerateInput(format!("vector {i} is not finite")));
        }
    }
    Ok(())
}

/// Exact t-SNE to two dimensions with seeded initialization.
pub fn tsne(vectors: &[Vec<f64>], params: &TsneParams) -> Result<TsneResult, AnalysisError> {
    check_input(vectors)?;
    tsne_from(vectors, params, initial_layout(vectors.len(), params.seed))
}

/// Exact t-SNE starting from a given layout (one point per vector).
pub fn tsne_from(vectors: &[Vec<f64>], params: &TsneParams, init: Vec<[f64; 2]>) -> Result<TsneResult, AnalysisError> {
    check_input(vectors)?;
    let n = vectors.len();
    if init.len() != n {
        return Err(AnalysisError::Usage(format!("initial layout has {} points for {n} vectors", init.len())));
    }
    if n <= 3 {
        return Ok(TsneResult {
            coordinates: template(n),
            effective_perplexity: 0.0,
            perplexity_residuals: vec![0.0; n],
            kl_history: Vec::new(),
        });
    }
    let perplexity = effective_perplexity(params.perplexity, n);
    let dist = squared_distances(vectors);
    let (cond, residuals) = calibrate_affinities(&dist, n, perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(PROB_FLOOR);
            }
        }
    }

    let mut y = init;
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0_f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut grad = vec![[0.0; 2]; n];
    let mut kl_history = Vec::new();

    for it in 0..params.iterations {
        let exaggeration = if it < params.exaggeration_iterations { params.early_exaggeration } else { 1.0 };
        let momentum = if it < MOMENTUM_SWITCH { INITIAL_MOMENTUM } else { FINAL_MOMENTUM };

        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let dx = y[i][0] - y[j][0];
                    let dy = y[i][1] - y[j][1];
                    num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
                }
            }
        }
        let z = order_free_sum(&mut num.clone());
        let (mut gx, mut gy) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            gx.clear();
            gy.clear();
            for j in 0..n {
                if i == j {
                    continue;
                }
                let k = i * n + j;
                let q = (num[k] / z).max(PROB_FLOOR);
                let mult = 4.0 * (exaggeration * p[k] - q) * num[k];
                gx.push(mult * (y[i][0] - y[j][0]));
                gy.push(mult * (y[i][1] - y[j][1]));
            }
            grad[i] = [order_free_sum(&mut gx), order_free_sum(&mut gy)];
        }
        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (update[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                gains[i][d] = gains[i][d].max(MIN_GAIN);
                update[i][d] = momentum * update[i][d] - params.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += update[i][d];
            }
        }
        center(&mut y);
        if (it + 1) % KL_INTERVAL == 0 || it + 1 == params.iterations {
            kl_history.push((it + 1, kl_divergence(&p, &y)));
        }
    }
    center(&mut y);
    Ok(TsneResult { coordinates: y, effective_perplexity: perplexity, perplexity_residuals: residuals, kl_history })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionParams {
    pub mode: VectorMode,
    #[serde(flatten)]
    pub tsne: TsneParams,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self { mode: VectorMode::Concat, tsne: TsneParams::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GlyphSector {
    pub emotion: Option<Emotion>,
    /// Dominant confidence in `[0, 1]`; zero when the channel is absent.
    pub radius: f64,
}

impl From<Option<Dominant>> for GlyphSector {
    fn from(d: Option<Dominant>) -> Self {
        Self { emotion: d.map(|d| d.emotion), radius: d.map_or(0.0, |d| d.confidence) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Glyph {
    pub segment_id: usize,
    pub time_index: usize,
    pub x: f64,
    pub y: f64,
    pub face: GlyphSector,
    pub text: GlyphSector,
    pub audio: GlyphSector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectionModel {
    pub video_id: String,
    pub params: ProjectionParams,
    pub effective_perplexity: f64,
    pub dimension: usize,
    /// One glyph per sentence, in time order; consecutive glyphs form the curve.
    pub glyphs: Vec<Glyph>,
    pub kl_divergence: Option<f64>,
    pub max_perplexity_residual: f64,
}

impl ProjectionModel {
    /// Sentences whose point lies inside the axis-aligned rectangle (inclusive).
    pub fn inside(&self, x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<usize> {
        let (xa, xb) = (x0.min(x1), x0.max(x1));
        let (ya, yb) = (y0.min(y1), y0.max(y1));
        self.glyphs
            .iter()
            .filter(|g| g.x >= xa && g.x <= xb && g.y >= ya && g.y <= yb)
            .map(|g| g.segment_id)
            .collect()
    }
}

/// Projects every sentence of a video and attaches glyph payloads.
pub fn build_projection(video_id: &str, fusions: &[SentenceFusion], params: &ProjectionParams) -> Result<ProjectionModel, AnalysisError> {
    let vectors: Vec<SentenceVector> = fusions.iter().map(|f| sentence_vector(f, params.mode)).collect();
    let dimension = vectors.first().map_or(0, |v| v.values.len());
    let (coords, effective, kl, residual) = if vectors.is_empty() {
        (Vec::new(), 0.0, None, 0.0)
    } else {
        let values: Vec<Vec<f64>> = vectors.into_iter().map(|v| v.values).collect();
        let r = tsne(&values, &params.tsne)?;
        let residual = r.perplexity_residuals.iter().copied().fold(0.0, f64::max);
        (r.coordinates, r.effective_perplexity, r.kl_history.last().map(|k| k.1), residual)
    };
    let glyphs = fusions
        .iter()
        .zip(coords)
        .map(|(f, [x, y])| Glyph {
            segment_id: f.segment_id,
            time_index: f.segment_id,
            x,
            y,
            face: f.face_emotion.into(),
            text: f.text_emotion.into(),
            audio: f.audio_emotion.into(),
        })
        .collect();
    Ok(ProjectionModel {
        video_id: video_id.to_string(),
        params: *params,
        effective_perplexity: effective,
        dimension,
        glyphs,
        kl_divergence: kl,
        max_perplexity_residual: residual,
    })
}
