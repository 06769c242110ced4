use indicvox::features::{dtw_align, mcd, mcd_frame_distance, mel_spectrogram, Audio, FrameParams, McepTrack};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum path cost over every monotonic path, found by exhaustive recursion.
fn brute_force_min(n: usize, m: usize, d: &dyn Fn(usize, usize) -> f64) -> (f64, usize) {
    fn walk(i: usize, j: usize, n: usize, m: usize, d: &dyn Fn(usize, usize) -> f64, acc: f64, len: usize, best: &mut Vec<(f64, usize)>) {
        let acc = acc + d(i, j);
        let len = len + 1;
        if (i, j) == (n - 1, m - 1) {
            best.push((acc, len));
            return;
        }
        if i + 1 < n && j + 1 < m {
            walk(i + 1, j + 1, n, m, d, acc, len, best);
        }
        if i + 1 < n {
            walk(i + 1, j, n, m, d, acc, len, best);
        }
        if j + 1 < m {
            walk(i, j + 1, n, m, d, acc, len, best);
        }
    }
    let mut all = Vec::new();
    walk(0, 0, n, m, d, 0.0, 0, &mut all);
    all.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap()
}

fn random_track(rng: &mut ChaCha8Rng, frames: usize, order: usize) -> McepTrack {
    McepTrack::new(Array2::from_shape_fn((frames, order + 1), |_| rng.random_range(-3.0..3.0))).unwrap()
}

fn oracle_distance(a: &McepTrack, b: &McepTrack, i: usize, j: usize) -> f64 {
    let mut sq = 0.0;
    for d in 1..=a.order {
        let diff = a.frames[[i, d]] - b.frames[[j, d]];
        sq += diff * diff;
    }
    10.0 / std::f64::consts::LN_10 * (2.0 * sq).sqrt()
}

#[test]
fn dtw_cost_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..150 {
        let (n, m) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let costs = Array2::from_shape_fn((n, m), |_| rng.random_range(0.0..5.0));
        let d = |i: usize, j: usize| costs[[i, j]];
        let got = dtw_align(n, m, d).unwrap();
        let (want, _) = brute_force_min(n, m, &d);
        assert!((got.cost - want).abs() < 1e-9);
        assert!(got.path.is_valid(n, m));
        let along: f64 = got.path.steps.iter().map(|&(i, j)| costs[[i, j]]).sum();
        assert!((along - got.cost).abs() < 1e-9);
    }
}

#[test]
fn mcd_matches_independent_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let a = random_track(&mut rng, 8, 4);
        let frames = rng.random_range(4..=6);
        let b = random_track(&mut rng, frames, 4);
        let d = |i: usize, j: usize| oracle_distance(&a, &b, i, j);
        let (cost, len) = brute_force_min(a.n_frames(), b.n_frames(), &d);
        let (score, alignment) = mcd(&a, &b).unwrap();
        assert!((alignment.cost - cost).abs() < 1e-9);
        // Equal-cost paths of different lengths are measure-zero for random data.
        assert_eq!(alignment.path.len(), len);
        assert!((score - cost / len as f64).abs() < 1e-9);
    }
}

#[test]
fn one_unit_in_first_coefficient_is_6_1419_db() {
    let a = McepTrack::new(Array2::from_shape_vec((1, 2), vec![0.0, 0.0]).unwrap()).unwrap();
    let b = McepTrack::new(Array2::from_shape_vec((1, 2), vec![0.0, 1.0]).unwrap()).unwrap();
    assert!((mcd(&a, &b).unwrap().0 - 6.1419).abs() < 1e-3);
}

#[test]
fn mel_extraction_is_bit_identical_across_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples: Vec<f64> = (0..10000).map(|_| rng.random_range(-0.5..0.5)).collect();
    let audio = Audio::new(samples, 22050);
    let params = FrameParams::default();
    let a = mel_spectrogram(&audio, &params).unwrap();
    let b = mel_spectrogram(&audio, &params).unwrap();
    assert!(a.frames.iter().zip(b.frames.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

proptest! {
    #[test]
    fn self_distance_is_zero(seed in any::<u64>(), frames in 1usize..12, order in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_track(&mut rng, frames, order);
        prop_assert_eq!(mcd(&t, &t).unwrap().0, 0.0);
    }

    #[test]
    fn mcd_is_symmetric_for_generic_tracks(seed in any::<u64>(), n in 1usize..10, m in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_track(&mut rng, n, 3);
        let b = random_track(&mut rng, m, 3);
        let ab = mcd(&a, &b).unwrap().0;
        let ba = mcd(&b, &a).unwrap().0;
        prop_assert!((ab - ba).abs() < 1e-9);
    }

    #[test]
    fn dtw_cost_bounded_by_diagonal(seed in any::<u64>(), n in 1usize..15, m in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_track(&mut rng, n, 3);
        let b = random_track(&mut rng, m, 3);
        let d = |i: usize, j: usize| mcd_frame_distance(a.frames.row(i).as_slice().unwrap(), b.frames.row(j).as_slice().unwrap());
        let got = dtw_align(n, m, d).unwrap();
        // Diagonal walk: step both while possible, then finish along the longer axis.
        let mut diagonal = 0.0;
        let (mut i, mut j) = (0, 0);
        loop {
            diagonal += d(i, j);
            if (i, j) == (n - 1, m - 1) { break; }
            if i + 1 < n { i += 1; }
            if j + 1 < m { j += 1; }
        }
        prop_assert!(got.cost >= 0.0);
        prop_assert!(got.cost <= diagonal + 1e-9);
        prop_assert!(got.path.is_valid(n, m));
    }
}
