use std::collections::BTreeMap;

use indicvox::corpus::synthetic::{default_speakers, synthesize_utterance};
use indicvox::features::Audio;
use indicvox::speaker::{
    condition_encoder_states, cosine, load_embeddings, mean_speaker_embedding, toy_embedding, write_embeddings, EncoderStates,
    SpeakerEmbedding, SpeakerError, EMBEDDING_DIM, TOY_NORMALIZED_RANGE,
};
use ndarray::{s, Array2};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..EMBEDDING_DIM).map(|_| rng.random_range(-2.0..2.0)).collect()
}

#[test]
fn mean_matches_summation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut embs = BTreeMap::new();
    let mut membership = BTreeMap::new();
    let mut mine = Vec::new();
    for i in 0..16 {
        let v = random_vector(&mut rng);
        let id = format!("utt{i:02}");
        let speaker = if i < 10 { "target" } else { "other" };
        if i < 10 {
            mine.push(v.clone());
        }
        embs.insert(id.clone(), SpeakerEmbedding::new(v, "").unwrap());
        membership.insert(id, speaker.to_string());
    }
    let got = mean_speaker_embedding(&embs, "target", &membership, false).unwrap();
    for d in 0..EMBEDDING_DIM {
        let mut total = 0.0;
        for v in &mine {
            total += v[d];
        }
        assert!((got.vector[d] - total / 10.0).abs() < 1e-12);
    }
    assert_eq!(got.source_utterances.len(), 10);
    assert_eq!(got.speaker, "target");
}

#[test]
fn archive_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let embs: BTreeMap<String, SpeakerEmbedding> = (0..3)
        .map(|i| (format!("u{i}"), SpeakerEmbedding::new(random_vector(&mut rng), "").unwrap()))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("xvectors.txt");
    write_embeddings(&path, &embs).unwrap();
    assert_eq!(load_embeddings(&path).unwrap(), embs);

    std::fs::write(&path, format!("bad {}\n", vec!["0.1"; 511].join(" "))).unwrap();
    assert!(matches!(load_embeddings(&path), Err(SpeakerError::BadDimension { found: 511, .. })));
}

fn tilted_noise(tilt: f64, seed: u64) -> Audio {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = 0.0;
    let samples = (0..22050 * 2)
        .map(|_| {
            let x: f64 = rng.random_range(-0.3..0.3);
            y = tilt * y + x;
            y * (1.0 - tilt.abs())
        })
        .collect();
    Audio::new(samples, 22050)
}

#[test]
fn different_spectral_tilts_are_less_similar() {
    let normalized = |a: &Audio| toy_embedding(a).unwrap().vector[TOY_NORMALIZED_RANGE].to_vec();
    let dark_a = normalized(&tilted_noise(0.9, 1));
    let dark_b = normalized(&tilted_noise(0.9, 2));
    let bright = normalized(&tilted_noise(-0.5, 3));
    let same = cosine(&dark_a, &dark_b).unwrap();
    let cross = cosine(&dark_a, &bright).unwrap();
    assert!(cross < same, "cross {cross} same {same}");
}

#[test]
fn synthetic_voices_separate() {
    let speakers = default_speakers();
    let emb = |s: usize, seed: u64| toy_embedding(&synthesize_utterance(&speakers[s], 2.0, seed)).unwrap().vector;
    let same = cosine(&emb(0, 1), &emb(0, 2)).unwrap();
    let cross = cosine(&emb(0, 1), &emb(1, 1)).unwrap();
    assert!(cross < same, "cross {cross} same {same}");
}

proptest! {
    #[test]
    fn mean_is_permutation_invariant(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let build = |ids: &[usize]| {
            let embs: BTreeMap<String, SpeakerEmbedding> = ids.iter().enumerate()
                .map(|(k, &i)| (format!("u{k}"), SpeakerEmbedding::new(vectors[i].clone(), "").unwrap()))
                .collect();
            let membership: BTreeMap<String, String> = (0..n).map(|k| (format!("u{k}"), "s".to_string())).collect();
            mean_speaker_embedding(&embs, "s", &membership, false).unwrap().vector
        };
        let a = build(&(0..n).collect::<Vec<_>>());
        let b = build(&order);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioning_is_row_permutation_equivariant(seed in any::<u64>(), n in 1usize..10, e in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = Array2::from_shape_fn((n, e), |_| rng.random_range(-1.0..1.0));
        let emb = SpeakerEmbedding::new(random_vector(&mut rng), "s").unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted = Array2::from_shape_fn((n, e), |(i, j)| states[[perm[i], j]]);

        let out = condition_encoder_states(&EncoderStates::new(states.clone()).unwrap(), &emb).into_array();
        let out_perm = condition_encoder_states(&EncoderStates::new(permuted).unwrap(), &emb).into_array();
        prop_assert_eq!(out.dim(), (n, e + EMBEDDING_DIM));
        for i in 0..n {
            prop_assert_eq!(out_perm.row(i), out.row(perm[i]));
        }
        // Original block is bit-identical; appended block has zero column variance.
        prop_assert!(out.slice(s![.., ..e]).iter().zip(states.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
        for col in out.slice(s![.., e..]).columns() {
            prop_assert!(col.iter().all(|&v| v == col[0]));
        }
    }
}
