mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{degree_by_pairs, fixtures};
use emotion_coherence::analytics::{build_sankey, Lexicons, SankeyParams, Stage};
use emotion_coherence::fusion::{coherence_degree, fuse_video, fuse_words, FusionParams};
use emotion_coherence::ingest::{load_bundle, mask_laughter, write_bundle, DEFAULT_LAUGHTER_THRESHOLD};
use emotion_coherence::projection::{initial_layout, sentence_vector, tsne, tsne_from, TsneParams, VectorMode};
use emotion_coherence::prosody::{amplitude, intensity, slice};
use emotion_coherence::synth::{synthetic_video, SynthSpec};
use emotion_coherence::{dominant, Channel, Emotion, EmotionDistribution, TimeSpan, VideoRecord};

fn emotion() -> impl Strategy<Value = Emotion> {
    (0..Emotion::COUNT).prop_map(|i| Emotion::ALL[i])
}

fn small_spec() -> SynthSpec {
    SynthSpec { max_segments: 20, max_frames: 400, ..SynthSpec::default() }
}

pub fn assert_sankey_conserves(video: &VideoRecord) {
    let fused = fuse_video(video, &FusionParams::default());
    let model = build_sankey(video, &fused, None, &Lexicons::bundled(), &SankeyParams::default());
    for node in model.nodes(Channel::Text) {
        let incoming: f64 = model.links(Stage::FaceText).iter().filter(|l| l.to == node.emotion).map(|l| l.total_duration).sum();
        let outgoing: f64 = model.links(Stage::TextAudio).iter().filter(|l| l.from == node.emotion).map(|l| l.total_duration).sum();
        assert!((incoming - node.total_duration).abs() <= 1e-9);
        assert!((outgoing - node.total_duration).abs() <= 1e-9);
    }
    // Each stage partitions the full-triple sentences.
    for stage in [Stage::FaceText, Stage::TextAudio] {
        let mut seen = BTreeSet::new();
        for link in model.links(stage) {
            for id in &link.sentence_ids {
                assert!(seen.insert(*id), "sentence {id} in two links");
            }
        }
        let complete: BTreeSet<_> = fused.iter().filter(|f| f.triple().is_some()).map(|f| f.segment_id).collect();
        assert_eq!(seen, complete);
        assert!(model.residual_sentence_ids.iter().all(|id| !seen.contains(id)));
    }
}

proptest! {
    #[test]
    fn dominant_ignores_insertion_order(pairs in prop::collection::vec((emotion(), 0.0f64..1.0), 1..8), rot in 0usize..8) {
        let mut rotated = pairs.clone();
        let k = rot % rotated.len();
        rotated.rotate_left(k);
        // Last write wins for repeated categories, so dedupe first.
        let mut seen = BTreeSet::new();
        let unique: Vec<_> = pairs.iter().rev().filter(|(e, _)| seen.insert(*e)).copied().collect();
        let mut reversed = unique.clone();
        reversed.reverse();
        let a: EmotionDistribution = unique.into_iter().collect();
        let b: EmotionDistribution = reversed.into_iter().collect();
        prop_assert_eq!(dominant(&a), dominant(&b));
    }

    #[test]
    fn coherence_is_symmetric(f in emotion(), t in emotion(), a in emotion()) {
        let d = coherence_degree(f, t, a);
        for (x, y, z) in [(f, a, t), (t, f, a), (t, a, f), (a, f, t), (a, t, f)] {
            prop_assert_eq!(coherence_degree(x, y, z), d);
        }
        prop_assert_eq!(d, degree_by_pairs(f, t, a));
    }

    #[test]
    fn word_time_is_conserved(seed in 0u64..10_000) {
        let video = synthetic_video(seed, &small_spec());
        for w in fuse_words(&video) {
            prop_assert!((w.face_durations.total() + w.undetected_duration - w.span.duration()).abs() < 1e-9);
        }
    }

    #[test]
    fn sankey_flow_is_conserved(seed in 0u64..10_000) {
        assert_sankey_conserves(&synthetic_video(seed, &small_spec()));
    }

    #[test]
    fn masking_is_idempotent(seed in 0u64..10_000, theta in 0.0f64..1.0) {
        let video = synthetic_video(seed, &small_spec());
        let once = mask_laughter(&video.segments, &video.laughter, theta);
        let twice = mask_laughter(&once, &video.laughter, theta);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn bundle_round_trips(seed in 0u64..10_000) {
        let video = synthetic_video(seed, &small_spec());
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_bundle(&video, dir.path()).unwrap();
        let back = load_bundle(&manifest).unwrap();
        let mut expected = video.clone();
        expected.segments = mask_laughter(&video.segments, &video.laughter, DEFAULT_LAUGHTER_THRESHOLD);
        prop_assert_eq!(back, expected);
    }

    #[test]
    fn sentence_vectors_lie_in_unit_interval(seed in 0u64..10_000) {
        let video = synthetic_video(seed, &small_spec());
        for f in fuse_video(&video, &FusionParams::default()) {
            for mode in [VectorMode::Concat, VectorMode::Literal3] {
                prop_assert!(sentence_vector(&f, mode).values.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn one_hot_concat_has_three_nonzeros(f in emotion(), t in emotion(), a in emotion()) {
        let mut fusion = fuse_video(&common::fixture("single-sentence"), &FusionParams::default()).remove(0);
        fusion.face_distribution_mean = EmotionDistribution::one_hot(f);
        fusion.text_distribution = EmotionDistribution::one_hot(t);
        fusion.audio_distribution = EmotionDistribution::one_hot(a);
        let v = sentence_vector(&fusion, VectorMode::Concat).values;
        prop_assert_eq!(v.len(), 24);
        prop_assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 3);
        prop_assert_eq!(v[f.index()], 1.0);
        prop_assert_eq!(v[8 + t.index()], 1.0);
        prop_assert_eq!(v[16 + a.index()], 1.0);
    }

    #[test]
    fn envelope_features_scale_with_the_signal(samples in prop::collection::vec(-0.5f32..0.5, 1..2000), k in -3i32..4) {
        // Powers of two scale floats without rounding.
        let c = 2f32.powi(k);
        let scaled: Vec<f32> = samples.iter().map(|s| s * c).collect();
        let a = intensity(&samples, 8000, 0.04, 0.01).unwrap();
        let b = intensity(&scaled, 8000, 0.04, 0.01).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert_eq!(x.rms.unwrap() * f64::from(c), y.rms.unwrap());
        }
        let a = amplitude(&samples, 8000, 0.04, 0.01).unwrap();
        let b = amplitude(&scaled, 8000, 0.04, 0.01).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert_eq!(x.value.unwrap() * f64::from(c), y.value.unwrap());
        }
    }

    #[test]
    fn whole_span_slice_is_identity(samples in prop::collection::vec(-1.0f32..1.0, 0..3000)) {
        let series = intensity(&samples, 8000, 0.04, 0.01).unwrap();
        let whole = TimeSpan::new(0.0, samples.len() as f64 / 8000.0 + 1.0);
        prop_assert_eq!(slice(&series, &whole), series);
    }
}

#[test]
fn fixture_sankeys_conserve_flow() {
    for v in fixtures() {
        assert_sankey_conserves(&v);
    }
}

fn random_vectors(seed: u64, n: usize) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..6).map(|_| rng.random_range(0.0..1.0)).collect()).collect()
}

fn quick() -> TsneParams {
    TsneParams { iterations: 300, ..TsneParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tsne_final_kl_not_above_iteration_50(seed in 0u64..1000, n in 4usize..25) {
        let r = tsne(&random_vectors(seed, n), &quick()).unwrap();
        let at50 = r.kl_history.iter().find(|(i, _)| *i == 50).unwrap().1;
        let last = r.kl_history.last().unwrap().1;
        prop_assert!(last <= at50, "{last} > {at50}");
    }

    #[test]
    fn tsne_pairwise_distances_survive_relabeling(seed in 0u64..1000, n in 4usize..16, shift in 1usize..15) {
        let x = random_vectors(seed, n);
        let init = initial_layout(n, seed);
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let px: Vec<_> = perm.iter().map(|&i| x[i].clone()).collect();
        let pinit: Vec<_> = perm.iter().map(|&i| init[i]).collect();
        let a = tsne_from(&x, &quick(), init).unwrap().coordinates;
        let b = tsne_from(&px, &quick(), pinit).unwrap().coordinates;
        let dist = |p: [f64; 2], q: [f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        for i in 0..n {
            for j in 0..n {
                let da = dist(a[perm[i]], a[perm[j]]);
                let db = dist(b[i], b[j]);
                prop_assert!((da - db).abs() <= 1e-9, "{da} vs {db}");
            }
        }
    }
}
