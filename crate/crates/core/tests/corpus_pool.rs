use indicvox::corpus::{
    build_manifest_with, filter_manifest, pool, select_adaptation_subset, synthetic, BuildOptions, CorpusError, Manifest,
    UtteranceRecord,
};
use indicvox::{Family, Language};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pool(seed: u64, minutes: f64) -> Manifest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut total = 0.0;
    while total < minutes * 60.0 {
        let d: f64 = rng.random_range(2.0..15.0);
        total += d;
        records.push(UtteranceRecord {
            id: format!("utt{:05}", records.len()),
            language: Language::Hindi,
            family: Family::IndoAryan,
            speaker: "s".into(),
            script: Language::Hindi.script(),
            text: "कमल".into(),
            audio_path: "x.wav".into(),
            duration_sec: d,
            sample_rate: 22050,
        });
    }
    Manifest::from_records(records, vec![]).unwrap()
}

#[test]
fn subset_overshoot_bounded_over_100_pools() {
    for seed in 0..100 {
        let m = random_pool(seed, 40.0);
        let mut previous: Option<Manifest> = None;
        for target in [7.0, 15.0, 30.0] {
            let s = select_adaptation_subset(&m, target, seed).unwrap();
            let longest = s.records.iter().map(|r| r.duration_sec).fold(0.0, f64::max);
            assert!((s.total_duration_sec - target * 60.0).abs() <= longest, "seed {seed} target {target}");
            if let Some(p) = previous {
                assert_eq!(&s.records[..p.len()], &p.records[..], "nesting, seed {seed}");
            }
            assert_eq!(s.to_jsonl(), select_adaptation_subset(&m, target, seed).unwrap().to_jsonl());
            previous = Some(s);
        }
    }
}

#[test]
fn seven_minutes_of_random_utterances_within_15_seconds() {
    for seed in 0..100 {
        let s = select_adaptation_subset(&random_pool(seed, 10.0), 7.0, 42).unwrap();
        assert!((s.total_duration_sec - 420.0).abs() <= 15.0);
    }
}

#[test]
fn pooled_totals_match_reported_hours() {
    let aryan: Vec<Manifest> = [Language::Hindi, Language::Bengali, Language::Gujarati, Language::Odia]
        .iter()
        .enumerate()
        .map(|(i, &l)| synthetic::metadata_manifest(l, &format!("spk{i}"), 5.0, 10.0))
        .collect();
    let pooled = pool(&aryan, Family::IndoAryan, false).unwrap();
    assert!((pooled.total_duration_sec - 20.0 * 3600.0).abs() < 1e-6);

    let dravidian: Vec<Manifest> = [Language::Tamil, Language::Telugu, Language::Kannada]
        .iter()
        .enumerate()
        .map(|(i, &l)| synthetic::metadata_manifest(l, &format!("spk{i}"), 5.0, 10.0))
        .collect();
    let pooled = pool(&dravidian, Family::Dravidian, false).unwrap();
    assert!((pooled.total_duration_sec - 15.0 * 3600.0).abs() < 1e-6);

    let mixed = [aryan[2].clone(), dravidian[0].clone()];
    assert!(matches!(pool(&mixed, Family::IndoAryan, false), Err(CorpusError::CrossFamilyPooling { .. })));
}

#[test]
fn synthetic_corpus_builds_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let speakers = synthetic::default_speakers();
    let dirs = synthetic::write_corpus(dir.path(), &speakers, 30.0, 1).unwrap();
    let manifests: Vec<Manifest> = dirs
        .iter()
        .map(|d| build_manifest_with(&d.root, d.language, &d.speaker, BuildOptions { verify: true }).unwrap())
        .collect();
    let pooled = pool(&manifests, Family::IndoAryan, false).unwrap();
    assert!((pooled.total_duration_sec - 30.0).abs() < 1e-3);
    assert_eq!(filter_manifest(&pooled, 15.0).len(), pooled.len());
}

proptest! {
    #[test]
    fn filter_is_idempotent(durations in prop::collection::vec(0.5f64..30.0, 0..40), limit in 1.0f64..30.0) {
        let records = durations.iter().enumerate().map(|(i, &d)| UtteranceRecord {
            id: format!("u{i}"),
            language: Language::Tamil,
            family: Family::Dravidian,
            speaker: "s".into(),
            script: Language::Tamil.script(),
            text: "அடி".into(),
            audio_path: "a.wav".into(),
            duration_sec: d,
            sample_rate: 16000,
        }).collect();
        let m = Manifest::from_records(records, vec![]).unwrap();
        let once = filter_manifest(&m, limit);
        let twice = filter_manifest(&once, limit);
        prop_assert_eq!(once.records, twice.records);
    }

    #[test]
    fn pool_totals_are_permutation_invariant(hours in prop::collection::vec(0.01f64..0.2, 1..5), rotate in 0usize..5) {
        let langs = [Language::Hindi, Language::Bengali, Language::Gujarati, Language::Odia, Language::Rajasthani];
        let ms: Vec<Manifest> = hours.iter().enumerate().map(|(i, &h)| synthetic::metadata_manifest(langs[i], "s", h, 7.5)).collect();
        let mut rotated = ms.clone();
        rotated.rotate_left(rotate % ms.len());
        let a = pool(&ms, Family::IndoAryan, false).unwrap();
        let b = pool(&rotated, Family::IndoAryan, false).unwrap();
        prop_assert!((a.total_duration_sec - b.total_duration_sec).abs() < 1e-6);
        let mut ia = a.ids();
        let mut ib = b.ids();
        ia.sort();
        ib.sort();
        prop_assert_eq!(ia, ib);
    }
}
