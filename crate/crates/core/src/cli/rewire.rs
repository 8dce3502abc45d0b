use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::manifest::ManifestBuilder;
use crate::curator::DEFAULT_MASK_PLACEHOLDER;
use crate::encoders::{load_encoder, EncoderSpec};
use crate::error::{ProbeError, Result};
use crate::rewire::{
    build_pairs, rewire_train, sample_sentences, write_loss_trace, RewireConfig, CHECKPOINTS_DIR, LOSS_TRACE_FILE,
    REWIRE_CONFIG_FILE,
};

/// Environment variable naming the checkpoint cache directory.
pub const CACHE_ENV: &str = "PROBEFORGE_CACHE";

#[derive(Args, Debug, Clone, Default)]
pub struct RewireArgs {
    /// Encoder spec, e.g. `reference:dim=128,seed=7`.
    #[arg(long)]
    pub encoder: String,
    /// Raw text corpus, one sentence per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Rewire config JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Continue training from this checkpoint directory.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub num_sentences: Option<usize>,
    #[arg(long)]
    pub mask_ratio: Option<f64>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    #[arg(long)]
    pub probe_checkpoint_step: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RewireArgs {
    /// Config file values with flag overrides applied.
    pub fn resolve_config(&self) -> Result<RewireConfig> {
        let mut c = match &self.config {
            Some(p) => RewireConfig::load(p)?,
            None => RewireConfig::default(),
        };
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        apply!(
            num_sentences,
            mask_ratio,
            temperature,
            learning_rate,
            steps,
            batch_size,
            checkpoint_every,
            probe_checkpoint_step,
            seed
        );
        c.validate()?;
        Ok(c)
    }
}

#[derive(Serialize)]
struct ResolvedRewire<'a> {
    encoder: String,
    rewire: &'a RewireConfig,
    pairs: usize,
    cache_key: Option<String>,
}

pub fn run_rewire(args: &RewireArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start("rewire");
    let spec: EncoderSpec = args.encoder.parse()?;
    let config = args.resolve_config()?;
    let corpus = std::fs::read(&args.corpus).map_err(|e| ProbeError::input(&args.corpus, e))?;
    let sentences = sample_sentences(
        BufReader::new(corpus.as_slice()),
        config.num_sentences,
        config.seed,
        config.min_words,
        config.max_words,
    )?;
    let pairs = build_pairs(&sentences, config.mask_ratio, DEFAULT_MASK_PLACEHOLDER);
    if config.steps > 0 && pairs.len() < config.batch_size {
        return Err(ProbeError::Precondition(format!(
            "{} training pairs is fewer than batch_size {}",
            pairs.len(),
            config.batch_size
        )));
    }
    let mut encoder = load_encoder(&spec, args.resume.as_deref())?;

    let cache = match (std::env::var_os(CACHE_ENV), &args.resume) {
        (Some(root), None) if !root.is_empty() => {
            let key = cache_key(&spec, &config, &corpus)?;
            Some((PathBuf::from(root).join("rewire").join(&key), key))
        }
        _ => None,
    };

    std::fs::create_dir_all(&args.out)?;
    let hit = cache
        .as_ref()
        .is_some_and(|(dir, _)| dir.join(LOSS_TRACE_FILE).is_file());
    if let (true, Some((dir, _))) = (hit, &cache) {
        copy_tree(dir, &args.out)?;
        manifest.note(format!("restored from cache {}", dir.display()));
    } else {
        let outcome = rewire_train(encoder.as_mut(), &pairs, &config, Some(&args.out))?;
        write_loss_trace(&args.out.join(LOSS_TRACE_FILE), &outcome.trace)?;
        std::fs::write(args.out.join(REWIRE_CONFIG_FILE), config.to_json_pretty()? + "\n")?;
        if let Some((dir, _)) = &cache {
            store_in_cache(&args.out, dir)?;
        }
        if let Some(last) = outcome.trace.last() {
            eprintln!(
                "rewired {} steps, final loss {:.4}, {} checkpoints in {}",
                last.step,
                last.loss_mean,
                outcome.checkpoints.len(),
                args.out.display()
            );
        }
    }

    manifest
        .seed(config.seed)
        .config(&ResolvedRewire {
            encoder: spec.canonical(),
            rewire: &config,
            pairs: pairs.len(),
            cache_key: cache.as_ref().map(|(_, k)| k.clone()),
        })?
        .input("corpus", &args.corpus);
    if let Some(c) = &args.config {
        manifest.input("config", c);
    }
    if let Some(r) = &args.resume {
        manifest.input("resume", r);
    }
    manifest
        .output(CHECKPOINTS_DIR)
        .output(LOSS_TRACE_FILE)
        .output(REWIRE_CONFIG_FILE);
    manifest.finish(&args.out)?;
    Ok(())
}

/// Hex SHA-256 over everything that determines a rewire run's output.
pub fn cache_key(spec: &EncoderSpec, config: &RewireConfig, corpus: &[u8]) -> Result<String> {
    let mut h = Sha256::new();
    h.update(b"probeforge-rewire\n");
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(b"\n");
    h.update(spec.canonical().as_bytes());
    h.update(b"\n");
    h.update(config.to_json_pretty()?.as_bytes());
    h.update(b"\n");
    h.update(Sha256::digest(corpus));
    Ok(hex::encode(h.finalize()))
}

fn store_in_cache(out: &Path, dir: &Path) -> Result<()> {
    let parent = dir.parent().expect("cache entries live under a root");
    std::fs::create_dir_all(parent)?;
    let tmp = parent.join(format!(
        ".tmp-{}-{}",
        std::process::id(),
        dir.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
    ));
    if tmp.exists() {
        std::fs::remove_dir_all(&tmp)?;
    }
    std::fs::create_dir_all(&tmp)?;
    copy_tree(&out.join(CHECKPOINTS_DIR), &tmp.join(CHECKPOINTS_DIR))?;
    for f in [LOSS_TRACE_FILE, REWIRE_CONFIG_FILE] {
        std::fs::copy(out.join(f), tmp.join(f))?;
    }
    if std::fs::rename(&tmp, dir).is_err() {
        // Another process stored the same entry first.
        std::fs::remove_dir_all(&tmp)?;
    }
    Ok(())
}

fn copy_tree(from: &Path, to: &Path) -> Result<()> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_tree(&entry.path(), &target)?;
        } else {
            std::fs::copy(entry.path(), target)?;
        }
    }
    Ok(())
}
