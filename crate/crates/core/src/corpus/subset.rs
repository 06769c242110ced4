use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, Manifest};
use crate::Family;

/// Longest utterance kept for training, inclusive.
pub const DEFAULT_MAX_DURATION_SEC: f64 = 15.0;

/// Keeps records no longer than `max_duration_sec`.
pub fn filter_manifest(m: &Manifest, max_duration_sec: f64) -> Manifest {
    let records: Vec<_> = m.records.iter().filter(|r| r.duration_sec <= max_duration_sec).cloned().collect();
    let dropped = m.records.len() - records.len();
    let mut provenance = m.provenance.clone();
    provenance.push(format!("filter: dropped {dropped} records longer than {max_duration_sec} s"));
    let total_duration_sec = records.iter().map(|r| r.duration_sec).sum();
    Manifest { records, provenance, total_duration_sec }
}

fn single_valued(m: &Manifest, what: &str, key: impl Fn(usize) -> String) -> Result<(), CorpusError> {
    let values: HashSet<String> = (0..m.records.len()).map(key).collect();
    if values.len() > 1 {
        let mut v: Vec<_> = values.into_iter().collect();
        v.sort();
        return Err(CorpusError::MixedManifest { what: format!("{what}s {}", v.join(", ")) });
    }
    Ok(())
}

/// Concatenates monolingual single-speaker manifests into one generic-voice
/// training set. Every record must belong to `family` unless
/// `allow_cross_family` is set.
pub fn pool(manifests: &[Manifest], family: Family, allow_cross_family: bool) -> Result<Manifest, CorpusError> {
    if manifests.is_empty() {
        return Err(CorpusError::NothingToPool);
    }
    let mut records = Vec::new();
    let mut provenance = Vec::new();
    let mut seen = HashSet::new();
    for m in manifests {
        single_valued(m, "language", |i| m.records[i].language.to_string())?;
        single_valued(m, "speaker", |i| m.records[i].speaker.clone())?;
        for r in &m.records {
            r.validate()?;
            if !allow_cross_family && r.family != family {
                return Err(CorpusError::CrossFamilyPooling { id: r.id.clone(), expected: family, found: r.family });
            }
            if !seen.insert(r.id.clone()) {
                return Err(CorpusError::DuplicateId(r.id.clone()));
            }
            records.push(r.clone());
        }
        provenance.extend(m.provenance.iter().cloned());
    }
    provenance.push(format!(
        "pool: {} manifests, {family}{}",
        manifests.len(),
        if allow_cross_family { " (cross-family allowed)" } else { "" }
    ));
    let total_duration_sec = records.iter().map(|r| r.duration_sec).sum();
    Ok(Manifest { records, provenance, total_duration_sec })
}

/// Seeded random order over the id-sorted records, then greedy accumulation
/// until `target_minutes` is reached. Subsets for growing targets under the
/// same seed are prefixes of one another.
pub fn select_adaptation_subset(m: &Manifest, target_minutes: f64, seed: u64) -> Result<Manifest, CorpusError> {
    let target_sec = target_minutes * 60.0;
    if !(target_sec >= 0.0) || m.total_duration_sec < target_sec {
        return Err(CorpusError::InsufficientData { available_sec: m.total_duration_sec, target_sec });
    }
    let mut order: Vec<_> = m.records.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut records = Vec::new();
    let mut total = 0.0;
    for r in order {
        if total >= target_sec {
            break;
        }
        total += r.duration_sec;
        records.push(r.clone());
    }
    if total < target_sec {
        // Possible only through rounding in the manifest total.
        return Err(CorpusError::InsufficientData { available_sec: total, target_sec });
    }
    let mut provenance = m.provenance.clone();
    provenance.push(format!("subset: {target_minutes} min, seed {seed}"));
    Ok(Manifest { records, provenance, total_duration_sec: total })
}
