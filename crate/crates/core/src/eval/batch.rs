use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::features::{mcd, mcep, mel_spectrogram, Audio, FeatureError, FrameParams, McepTrack, DEFAULT_MCEP_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct McdParams {
    pub frame: FrameParams,
    pub order: usize,
}

impl Default for McdParams {
    fn default() -> Self {
        McdParams { frame: FrameParams::default(), order: DEFAULT_MCEP_ORDER }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McdRow {
    /// File name shared by the two directories.
    pub utterance: String,
    pub mcd: Option<f64>,
    pub ref_frames: Option<usize>,
    pub syn_frames: Option<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McdReport {
    /// Sorted by utterance.
    pub rows: Vec<McdRow>,
    /// Mean over rows without an error; `None` if every pair failed.
    pub mean: Option<f64>,
    pub scored: usize,
}

impl McdReport {
    /// Tab-separated table, one row per utterance followed by a `MEAN` row.
    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("utterance\tmcd_db\tref_frames\tsyn_frames\tstatus\n");
        for r in &self.rows {
            let score = r.mcd.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into());
            let status = r.error.as_deref().unwrap_or("ok").replace(['\t', '\n'], " ");
            let _ = writeln!(out, "{}\t{score}\t{}\t{}\t{status}", r.utterance, opt(r.ref_frames), opt(r.syn_frames));
        }
        let mean = self.mean.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into());
        let _ = writeln!(out, "MEAN\t{mean}\t\t\t{} scored", self.scored);
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EvalError> {
        fs::write(path, self.to_tsv())?;
        Ok(())
    }
}

fn wav_names(dir: &Path) -> Result<BTreeSet<String>, EvalError> {
    let mut names = BTreeSet::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")) {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.insert(name.to_string());
            }
        }
    }
    Ok(names)
}

fn track(path: &Path, params: &McdParams) -> Result<McepTrack, FeatureError> {
    let audio = Audio::read_wav(path)?;
    mcep(&mel_spectrogram(&audio, &params.frame)?, params.order)
}

fn score_pair(ref_path: &Path, syn_path: &Path, params: &McdParams) -> Result<(f64, usize, usize), FeatureError> {
    let r = track(ref_path, params)?;
    let s = track(syn_path, params)?;
    let (score, _) = mcd(&r, &s)?;
    Ok((score, r.n_frames(), s.n_frames()))
}

/// Scores every `.wav` present in both directories, in parallel. Files
/// present on one side only, and pairs whose features fail, become error
/// rows and are left out of the mean.
pub fn batch_mcd(ref_dir: impl AsRef<Path>, syn_dir: impl AsRef<Path>, params: &McdParams) -> Result<McdReport, EvalError> {
    let (ref_dir, syn_dir) = (ref_dir.as_ref(), syn_dir.as_ref());
    params.frame.validate()?;
    let ref_names = wav_names(ref_dir)?;
    let syn_names = wav_names(syn_dir)?;
    if ref_names.intersection(&syn_names).next().is_none() {
        return Err(EvalError::NoPairs);
    }
    let names: Vec<&String> = ref_names.union(&syn_names).collect();
    let rows: Vec<McdRow> = names
        .par_iter()
        .map(|name| {
            let row = |mcd, ref_frames, syn_frames, error| McdRow { utterance: name.to_string(), mcd, ref_frames, syn_frames, error };
            let (in_ref, in_syn) = (ref_names.contains(*name), syn_names.contains(*name));
            if !in_syn {
                return row(None, None, None, Some("missing synthesized counterpart".into()));
            }
            if !in_ref {
                return row(None, None, None, Some("missing reference counterpart".into()));
            }
            let (rp, sp): (PathBuf, PathBuf) = (ref_dir.join(name), syn_dir.join(name));
            match score_pair(&rp, &sp, params) {
                Ok((score, nr, ns)) => row(Some(score), Some(nr), Some(ns), None),
                Err(e) => row(None, None, None, Some(e.to_string())),
            }
        })
        .collect();
    let scores: Vec<f64> = rows.iter().filter_map(|r| r.mcd).collect();
    let mean = (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64);
    Ok(McdReport { scored: scores.len(), rows, mean })
}
