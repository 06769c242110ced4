//! `indicvox`: the pipeline as subcommands.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "indicvox", version, about = "Multilingual Indic TTS data, feature and evaluation toolkit")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// TOML file with run defaults (see `indicvox config`).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set mcep_order=13`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Random seed [default: 2020, or `seed` from the config].
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map text to script-independent MLCM tokens, or transliterate with --to.
    Normalize(NormalizeArgs),
    /// Parse text into common-label-set phones.
    Parse(ParseArgs),
    /// Build a manifest from `<root>/transcripts.tsv` and `<root>/<id>.wav`.
    Manifest(ManifestArgs),
    /// Pool single-speaker manifests of one family and drop long utterances.
    Pool(PoolArgs),
    /// Select a seeded adaptation subset of a target duration.
    Subset(SubsetArgs),
    /// Dump log-mel or mel-cepstral features in the binary matrix format.
    Features(FeaturesArgs),
    /// DTW-aligned mel-cepstral distortion of two files or two directories.
    Mcd(McdArgs),
    /// Notch out line noise, detected automatically unless --f0 is given.
    Notch(NotchArgs),
    /// Extract toy speaker embeddings, or average an archive per speaker.
    Embed(EmbedArgs),
    /// Verify attention gradients against central finite differences.
    Gradcheck(GradcheckArgs),
    /// Run the listening-test and batch-MCD HTTP service.
    Serve(ServeArgs),
    /// Label synthesis scenarios (a) to (e) over languages and speakers.
    Scenarios(ScenariosArgs),
    /// Write a small synthetic multi-speaker corpus with manifests.
    SynthCorpus(SynthCorpusArgs),
    /// Print the effective configuration.
    Config,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    /// Language of the input text.
    #[arg(long)]
    lang: String,
    /// Render into this language's script (or a script name) instead of printing tokens.
    #[arg(long)]
    to: Option<String>,
    text: Vec<String>,
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[arg(long)]
    lang: String,
    text: Vec<String>,
}

#[derive(Args, Debug)]
struct ManifestArgs {
    #[arg(long)]
    root: PathBuf,
    #[arg(long)]
    lang: String,
    #[arg(long)]
    speaker: String,
    #[arg(long)]
    out: PathBuf,
    /// Decode every file and cross-check header durations.
    #[arg(long)]
    verify: bool,
}

#[derive(Args, Debug)]
struct PoolArgs {
    /// Manifest files (JSON lines), one language and speaker each.
    #[arg(required = true)]
    manifests: Vec<PathBuf>,
    /// IndoAryan or Dravidian.
    #[arg(long)]
    family: String,
    #[arg(long)]
    allow_cross_family: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SubsetArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Target amount of audio in minutes.
    #[arg(long)]
    target_min: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FeatureKind {
    Mel,
    Mcep,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    /// WAV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "mel")]
    kind: FeatureKind,
}

#[derive(Args, Debug)]
struct McdArgs {
    /// Reference WAV file or directory.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Synthesized WAV file or directory.
    #[arg(long)]
    syn: PathBuf,
    /// Write the per-utterance TSV report here (directory mode).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NotchArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Notch centre in Hz. Repeatable. Without it, line noise is detected.
    #[arg(long)]
    f0: Vec<f64>,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// WAV files to embed with the toy extractor, keyed by file stem.
    #[arg(long, num_args = 1.., conflicts_with_all = ["archive", "membership", "speaker"])]
    wav: Vec<PathBuf>,
    /// Embedding archive to average.
    #[arg(long, requires_all = ["membership", "speaker"])]
    archive: Option<PathBuf>,
    /// `utterance-id <TAB> speaker-id` table.
    #[arg(long)]
    membership: Option<PathBuf>,
    #[arg(long)]
    speaker: Option<String>,
    /// Scale each utterance vector to unit length before averaging.
    #[arg(long)]
    length_normalize: bool,
    /// Write the resulting embeddings as an archive.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    /// Number of seeded instances [default: `grad_instances` from the config].
    #[arg(long)]
    instances: Option<u64>,
    /// Finite-difference step [default: `grad_eps` from the config].
    #[arg(long)]
    eps: Option<f64>,
    /// Write a rolled-out alignment of the first instance as a matrix dump.
    #[arg(long)]
    alignment_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Directory holding the ratings logs [default: `store` from the config].
    #[arg(long)]
    store: Option<PathBuf>,
    /// Listen address [default: `bind` from the config].
    #[arg(long)]
    bind: Option<String>,
}

#[derive(Args, Debug)]
struct ScenariosArgs {
    /// Comma-separated languages seen in training.
    #[arg(long, value_delimiter = ',')]
    seen_langs: Vec<String>,
    /// Comma-separated `id:language` speakers seen in training.
    #[arg(long, value_delimiter = ',')]
    seen_speakers: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    target_langs: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    target_speakers: Vec<String>,
}

#[derive(Args, Debug)]
struct SynthCorpusArgs {
    #[arg(long)]
    out: PathBuf,
    /// Total audio across all speakers, seconds.
    #[arg(long, default_value_t = 120.0)]
    seconds: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let result = RunConfig::load(cli.config.as_deref(), &cli.overrides).and_then(|mut cfg| {
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        commands::run(cli.command, &cfg)
    });
    match result {
        Ok(out) => {
            let body = if json { serde_json::to_string_pretty(&out.json).expect("json output") } else { out.text.trim_end().to_string() };
            if !body.is_empty() {
                // A closed pipe (`| head`) is not an error.
                let _ = writeln!(std::io::stdout().lock(), "{body}");
            }
            ExitCode::from(error::exit::OK as u8)
        }
        Err(e) => report_error(&e, json),
    }
}

fn report_error(e: &CliError, json: bool) -> ExitCode {
    let code = e.exit_code();
    if json {
        let body = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exitCode": code });
        eprintln!("{body}");
    } else {
        eprintln!("error: {e}");
    }
    ExitCode::from(code as u8)
}
