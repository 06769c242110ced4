//! Run defaults. Every tunable lives here so a reproduction run is one TOML
//! file plus `--set key=value` overrides.

use std::path::{Path, PathBuf};

use indicvox::features::{FrameParams, DEFAULT_MCEP_ORDER, DEFAULT_NOTCH_Q};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 2020;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Longest utterance kept by `pool`, seconds.
    pub max_duration_sec: f64,
    pub mcep_order: usize,
    pub notch_q: f64,
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop_size: usize,
    pub win_size: usize,
    pub n_mels: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Spread of the guided-attention penalty.
    pub guided_g: f64,
    /// Central-difference step of `gradcheck`.
    pub grad_eps: f64,
    pub grad_instances: u64,
    pub bind: String,
    pub store: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let f = FrameParams::default();
        RunConfig {
            seed: DEFAULT_SEED,
            max_duration_sec: indicvox::corpus::DEFAULT_MAX_DURATION_SEC,
            mcep_order: DEFAULT_MCEP_ORDER,
            notch_q: DEFAULT_NOTCH_Q,
            sample_rate: f.sample_rate,
            fft_size: f.fft_size,
            hop_size: f.hop_size,
            win_size: f.win_size,
            n_mels: f.n_mels,
            f_min: f.f_min,
            f_max: f.f_max,
            guided_g: 0.2,
            grad_eps: 1e-5,
            grad_instances: 20,
            bind: "127.0.0.1:8080".into(),
            store: PathBuf::from("eval-store"),
        }
    }
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a
/// bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{o}`")))?;
            table.insert(key.trim().to_string(), parse_value(value.trim()));
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        cfg.frame().validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn frame(&self) -> FrameParams {
        FrameParams {
            sample_rate: self.sample_rate,
            fft_size: self.fft_size,
            hop_size: self.hop_size,
            win_size: self.win_size,
            n_mels: self.n_mels,
            f_min: self.f_min,
            f_max: self.f_max,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
