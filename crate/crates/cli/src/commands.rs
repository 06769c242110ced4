use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use indicvox::attention::{attention_grad_check, guided_attention_loss, rollout, AttentionInstance, GuidedAttentionConfig, CHECK_SHAPE};
use indicvox::corpus::synthetic::{default_speakers, write_corpus};
use indicvox::corpus::{build_manifest_with, filter_manifest, pool, select_adaptation_subset, BuildOptions, Manifest};
use indicvox::eval::{batch_mcd, plan_scenarios, EvalStore, McdParams, SpeakerRef};
use indicvox::features::{mcd, mcep, mel_spectrogram, remove_line_noise, notch_filter, write_matrix, Audio};
use indicvox::script::{normalize, parse_to_cls, render_from_mlcm, to_mlcm, ScriptBlock};
use indicvox::speaker::{load_embeddings, load_membership, mean_speaker_embedding, toy_embedding, write_embeddings};
use indicvox::{Family, Language};
use ndarray::Array2;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{
    Command, EmbedArgs, FeatureKind, FeaturesArgs, GradcheckArgs, ManifestArgs, McdArgs, NormalizeArgs, NotchArgs, ParseArgs,
    PoolArgs, ScenariosArgs, ServeArgs, SubsetArgs, SynthCorpusArgs,
};

/// Result of a subcommand in both output modes.
pub struct Output {
    pub text: String,
    pub json: Value,
}

/// Largest acceptable relative gradient error.
const GRAD_TOLERANCE: f64 = 1e-4;

pub fn run(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::Normalize(a) => normalize_cmd(a),
        Command::Parse(a) => parse_cmd(a),
        Command::Manifest(a) => manifest_cmd(a),
        Command::Pool(a) => pool_cmd(a, cfg),
        Command::Subset(a) => subset_cmd(a, cfg),
        Command::Features(a) => features_cmd(a, cfg),
        Command::Mcd(a) => mcd_cmd(a, cfg),
        Command::Notch(a) => notch_cmd(a, cfg),
        Command::Embed(a) => embed_cmd(a),
        Command::Gradcheck(a) => gradcheck_cmd(a, cfg),
        Command::Serve(a) => serve_cmd(a, cfg),
        Command::Scenarios(a) => scenarios_cmd(a),
        Command::SynthCorpus(a) => synth_corpus_cmd(a, cfg),
        Command::Config => Ok(Output { text: cfg.to_toml(), json: serde_json::to_value(cfg).expect("config serializes") }),
    }
}

fn language(name: &str) -> Result<Language, CliError> {
    name.parse().map_err(|_| CliError::Usage(format!("unknown language `{name}`")))
}

fn joined(text: &[String]) -> Result<String, CliError> {
    if text.is_empty() {
        return Err(CliError::Usage("no text given".into()));
    }
    Ok(text.join(" "))
}

fn normalize_cmd(a: NormalizeArgs) -> Result<Output, CliError> {
    let lang = language(&a.lang)?;
    let text = joined(&a.text)?;
    let seq = to_mlcm(&text, lang)?;
    let labels: Vec<String> = seq.tokens.iter().map(|t| t.label.to_string()).collect();
    let mut json = json!({ "language": lang, "script": seq.source_script.to_string(), "normalized": normalize(&text), "tokens": labels });
    let text = match a.to {
        Some(target) => {
            let script = match target.parse::<Language>() {
                Ok(l) => l.script(),
                Err(_) => target.parse::<ScriptBlock>().map_err(|_| CliError::Usage(format!("unknown language or script `{target}`")))?,
            };
            let rendered = render_from_mlcm(&seq, script)?;
            json["rendered"] = json!(rendered);
            rendered
        }
        None => labels.join(" "),
    };
    Ok(Output { text, json })
}

fn parse_cmd(a: ParseArgs) -> Result<Output, CliError> {
    let lang = language(&a.lang)?;
    let seq = parse_to_cls(&joined(&a.text)?, lang)?;
    let words: Vec<Vec<String>> = seq.words().into_iter().map(|w| w.to_vec()).collect();
    Ok(Output { text: seq.to_string(), json: json!({ "language": lang, "phones": seq.phones, "words": words }) })
}

fn manifest_summary(m: &Manifest, out: Option<&Path>) -> Output {
    let hours = m.total_duration_sec / 3600.0;
    let mut text = format!("{} records, {:.3} h", m.len(), hours);
    if let Some(p) = out {
        let _ = write!(text, " -> {}", p.display());
    }
    let json = json!({
        "records": m.len(),
        "totalDurationSec": m.total_duration_sec,
        "totalHours": hours,
        "provenance": m.provenance,
        "out": out,
    });
    Output { text, json }
}

fn manifest_cmd(a: ManifestArgs) -> Result<Output, CliError> {
    let m = build_manifest_with(&a.root, language(&a.lang)?, &a.speaker, BuildOptions { verify: a.verify })?;
    m.save(&a.out)?;
    Ok(manifest_summary(&m, Some(&a.out)))
}

fn pool_cmd(a: PoolArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let family: Family = a.family.parse().map_err(|_| CliError::Usage(format!("unknown family `{}`", a.family)))?;
    let manifests = a.manifests.iter().map(Manifest::load).collect::<Result<Vec<_>, _>>()?;
    let pooled = filter_manifest(&pool(&manifests, family, a.allow_cross_family)?, cfg.max_duration_sec);
    if let Some(out) = &a.out {
        pooled.save(out)?;
    }
    Ok(manifest_summary(&pooled, a.out.as_deref()))
}

fn subset_cmd(a: SubsetArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let m = Manifest::load(&a.manifest)?;
    let subset = select_adaptation_subset(&m, a.target_min, cfg.seed)?;
    if let Some(out) = &a.out {
        subset.save(out)?;
    }
    let mut o = manifest_summary(&subset, a.out.as_deref());
    o.json["targetSec"] = json!(a.target_min * 60.0);
    o.json["seed"] = json!(cfg.seed);
    o.json["ids"] = json!(subset.ids());
    Ok(o)
}

fn features_cmd(a: FeaturesArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    std::fs::create_dir_all(&a.out_dir)?;
    let params = cfg.frame();
    let ext = match a.kind {
        FeatureKind::Mel => "mel",
        FeatureKind::Mcep => "mcep",
    };
    let mut inputs = a.inputs.clone();
    inputs.sort();
    let rows = inputs
        .par_iter()
        .map(|input| -> Result<Value, CliError> {
            let audio = Audio::read_wav(input)?;
            let mel = mel_spectrogram(&audio, &params)?;
            let matrix = match a.kind {
                FeatureKind::Mel => mel.frames.clone(),
                FeatureKind::Mcep => mcep(&mel, cfg.mcep_order)?.frames,
            };
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("features");
            let out = a.out_dir.join(format!("{stem}.{ext}"));
            let meta = json!({ "kind": ext, "source": input, "params": params, "mcepOrder": cfg.mcep_order });
            write_matrix(&out, &matrix, &meta)?;
            Ok(json!({ "input": input, "output": out, "frames": matrix.nrows(), "dims": matrix.ncols() }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    for r in &rows {
        let _ = writeln!(text, "{}\t{} x {}", r["output"].as_str().unwrap_or_default(), r["frames"], r["dims"]);
    }
    Ok(Output { text, json: json!(rows) })
}

fn mcd_cmd(a: McdArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let params = McdParams { frame: cfg.frame(), order: cfg.mcep_order };
    if a.reference.is_file() && a.syn.is_file() {
        let track = |p: &Path| -> Result<_, CliError> { Ok(mcep(&mel_spectrogram(&Audio::read_wav(p)?, &params.frame)?, params.order)?) };
        let (r, s) = (track(&a.reference)?, track(&a.syn)?);
        let (score, alignment) = mcd(&r, &s)?;
        let json = json!({ "mcd": score, "refFrames": r.n_frames(), "synFrames": s.n_frames(), "pathLength": alignment.path.len() });
        return Ok(Output { text: format!("{score:.4}"), json });
    }
    let report = batch_mcd(&a.reference, &a.syn, &params)?;
    if let Some(path) = &a.report {
        report.save(path)?;
    }
    Ok(Output { text: report.to_tsv(), json: serde_json::to_value(&report).expect("report serializes") })
}

fn notch_cmd(a: NotchArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let audio = Audio::read_wav(&a.input)?;
    let (filtered, removed) = if a.f0.is_empty() {
        let (out, lines) = remove_line_noise(&audio, Some(cfg.notch_q))?;
        (out, lines.iter().map(|l| json!({ "frequencyHz": l.frequency_hz, "prominenceDb": l.prominence_db })).collect())
    } else {
        let mut out = audio.clone();
        for &f in &a.f0 {
            out = notch_filter(&out, f, cfg.notch_q)?;
        }
        (out, a.f0.iter().map(|f| json!({ "frequencyHz": f })).collect::<Vec<_>>())
    };
    filtered.write_wav(&a.out)?;
    let freqs: Vec<String> = removed.iter().map(|r| format!("{:.1} Hz", r["frequencyHz"].as_f64().unwrap_or_default())).collect();
    let text = if freqs.is_empty() { "no line noise found".to_string() } else { format!("notched {}", freqs.join(", ")) };
    Ok(Output { text, json: json!({ "removed": removed, "q": cfg.notch_q, "out": a.out }) })
}

fn embed_cmd(a: EmbedArgs) -> Result<Output, CliError> {
    let embeddings = if let Some(archive) = &a.archive {
        let (Some(membership), Some(speaker)) = (&a.membership, &a.speaker) else {
            return Err(CliError::Usage("--archive needs --membership and --speaker".into()));
        };
        let embs = load_embeddings(archive)?;
        let mean = mean_speaker_embedding(&embs, speaker, &load_membership(membership)?, a.length_normalize)?;
        BTreeMap::from([(speaker.clone(), mean)])
    } else if !a.wav.is_empty() {
        let mut wavs = a.wav.clone();
        wavs.sort();
        wavs.par_iter()
            .map(|p| -> Result<(String, _), CliError> {
                let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                Ok((id, toy_embedding(&Audio::read_wav(p)?)?))
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?
    } else {
        return Err(CliError::Usage("give --wav files or --archive with --membership and --speaker".into()));
    };
    if let Some(out) = &a.out {
        write_embeddings(out, &embeddings)?;
    }
    let rows: Vec<Value> =
        embeddings.iter().map(|(id, e)| json!({ "id": id, "norm": e.norm(), "sourceUtterances": e.source_utterances.len() })).collect();
    let mut text = String::new();
    for (id, e) in &embeddings {
        let _ = writeln!(text, "{id}\tnorm {:.4}", e.norm());
    }
    Ok(Output { text, json: json!({ "embeddings": rows, "out": a.out }) })
}

/// Smooth deterministic decoder queries for the alignment dump.
fn probe_queries(steps: usize) -> Array2<f64> {
    Array2::from_shape_fn((steps, CHECK_SHAPE.query_dim), |(t, d)| (0.37 * t as f64 + 1.3 * d as f64).sin())
}

fn gradcheck_cmd(a: GradcheckArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let eps = a.eps.unwrap_or(cfg.grad_eps);
    let n = a.instances.unwrap_or(cfg.grad_instances);
    let mut rows = Vec::new();
    let mut worst = (0.0f64, cfg.seed);
    for seed in cfg.seed..cfg.seed + n {
        let err = attention_grad_check(&AttentionInstance::random(seed), eps)?;
        if err > worst.0 {
            worst = (err, seed);
        }
        rows.push(json!({ "seed": seed, "maxRelativeError": err }));
    }
    let mut json = json!({ "eps": eps, "instances": rows, "maxRelativeError": worst.0 });
    if let Some(path) = &a.alignment_out {
        let inst = AttentionInstance::random(cfg.seed);
        let steps = inst.decoder_len;
        let alignment = rollout(&inst.memory, &inst.params, &probe_queries(steps))?;
        let g = GuidedAttentionConfig::new(cfg.guided_g)?;
        let loss = guided_attention_loss(&alignment, &g);
        let meta = json!({
            "kind": "alignment",
            "seed": cfg.seed,
            "decoderSteps": alignment.decoder_steps(),
            "encoderSteps": alignment.encoder_steps(),
            "guidedG": cfg.guided_g,
            "guidedLoss": loss,
        });
        write_matrix(path, alignment.weights(), &meta)?;
        json["alignment"] = meta;
    }
    let text = format!("{n} instances, eps {eps:e}: max relative error {:.3e}", worst.0);
    if worst.0 >= GRAD_TOLERANCE || worst.0.is_nan() {
        return Err(CliError::GradCheckFailed { worst: worst.0, seed: worst.1, tolerance: GRAD_TOLERANCE });
    }
    Ok(Output { text, json })
}

fn serve_cmd(a: ServeArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let store_dir: PathBuf = a.store.unwrap_or_else(|| cfg.store.clone());
    let bind = a.bind.unwrap_or_else(|| cfg.bind.clone());
    let addr: SocketAddr = bind.parse().map_err(|_| CliError::Usage(format!("bad listen address `{bind}`")))?;
    let store = Arc::new(EvalStore::open(&store_dir)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let (local, handle) = indicvox_service::spawn(store, addr).await?;
        eprintln!("listening on http://{local} (store {})", store_dir.display());
        handle.await.map_err(std::io::Error::other)?
    })?;
    Ok(Output { text: String::new(), json: Value::Null })
}

fn speaker_ref(spec: &str) -> Result<SpeakerRef, CliError> {
    let (id, lang) = spec.split_once(':').ok_or_else(|| CliError::Usage(format!("speaker `{spec}` must be id:language")))?;
    Ok(SpeakerRef { id: id.to_string(), language: language(lang)? })
}

fn scenarios_cmd(a: ScenariosArgs) -> Result<Output, CliError> {
    let langs = |v: &[String]| v.iter().map(|s| language(s)).collect::<Result<Vec<_>, _>>();
    let speakers = |v: &[String]| v.iter().map(|s| speaker_ref(s)).collect::<Result<Vec<_>, _>>();
    let plan = plan_scenarios(&langs(&a.seen_langs)?, &speakers(&a.seen_speakers)?, &langs(&a.target_langs)?, &speakers(&a.target_speakers)?);
    let mut text = String::new();
    for e in &plan.entries {
        let _ = writeln!(text, "{}\t{}:{}\t({})", e.text_language, e.speaker.id, e.speaker.language, e.label);
    }
    Ok(Output { text, json: serde_json::to_value(&plan).expect("plan serializes") })
}

fn synth_corpus_cmd(a: SynthCorpusArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    if !(a.seconds > 0.0 && a.seconds.is_finite()) {
        return Err(CliError::Usage("--seconds must be positive".into()));
    }
    let dirs = write_corpus(&a.out, &default_speakers(), a.seconds, cfg.seed)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for d in dirs {
        let m = build_manifest_with(&d.root, d.language, &d.speaker, BuildOptions { verify: true })?;
        let path = a.out.join(format!("{}-{}.jsonl", d.language, d.speaker));
        m.save(&path)?;
        let _ = writeln!(text, "{}\t{}\t{} records\t{:.2} s", d.language, d.speaker, m.len(), m.total_duration_sec);
        rows.push(json!({
            "language": d.language,
            "speaker": d.speaker,
            "root": d.root,
            "manifest": path,
            "records": m.len(),
            "durationSec": m.total_duration_sec,
        }));
    }
    Ok(Output { text, json: json!(rows) })
}
