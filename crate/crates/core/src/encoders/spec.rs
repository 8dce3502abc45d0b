use std::path::Path;
use std::str::FromStr;

use super::checkpoint::{is_checkpoint_dir, CheckpointSidecar};
use super::reference::{ReferenceConfig, ReferenceEncoder};
use super::TrainableEncoder;
use crate::error::{ProbeError, Result};

/// Parsed value of `--encoder`.
///
/// `reference:dim=128,seed=7` (optionally `layers=`, `buckets=`) selects the
/// bundled reference encoder. Anything else is passed through as an adapter
/// model identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncoderSpec {
    Reference(ReferenceConfig),
    Adapter(String),
}

impl EncoderSpec {
    /// Normalized spelling: reference specs list every parameter.
    pub fn canonical(&self) -> String {
        match self {
            EncoderSpec::Reference(c) => c.model_id(),
            EncoderSpec::Adapter(id) => id.clone(),
        }
    }
}

impl FromStr for EncoderSpec {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let Some(rest) = s.strip_prefix("reference") else {
            if s.is_empty() {
                return Err(ProbeError::Config("empty encoder spec".into()));
            }
            return Ok(EncoderSpec::Adapter(s.to_string()));
        };
        let mut config = ReferenceConfig::default();
        let params = match rest.strip_prefix(':') {
            Some(p) => p,
            None if rest.is_empty() => "",
            None => return Ok(EncoderSpec::Adapter(s.to_string())),
        };
        for kv in params.split(',').filter(|kv| !kv.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ProbeError::Config(format!("expected key=value in encoder spec, got {kv:?}")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| ProbeError::Config(format!("invalid value {v:?} for {k}")))
            };
            match k.trim() {
                "dim" => config.dim = parse(v)? as usize,
                "seed" => config.seed = parse(v)?,
                "layers" => config.layers = parse(v)? as usize,
                "buckets" => config.buckets = parse(v)? as usize,
                other => return Err(ProbeError::Config(format!("unknown reference encoder key {other:?}"))),
            }
        }
        Ok(EncoderSpec::Reference(config))
    }
}

/// Builds the encoder named by `spec`, restoring weights from `checkpoint`
/// when given. The checkpoint must describe the same model.
pub fn load_encoder(spec: &EncoderSpec, checkpoint: Option<&Path>) -> Result<Box<dyn TrainableEncoder>> {
    match spec {
        EncoderSpec::Reference(config) => match checkpoint {
            None => Ok(Box::new(ReferenceEncoder::new(*config)?)),
            Some(dir) => {
                if !is_checkpoint_dir(dir) {
                    return Err(ProbeError::Config(format!(
                        "{} is not a checkpoint directory",
                        dir.display()
                    )));
                }
                let sidecar = CheckpointSidecar::read(dir)?;
                if sidecar.reference.as_ref() != Some(config) {
                    return Err(ProbeError::Config(format!(
                        "checkpoint {} was written by {:?}, not {}",
                        dir.display(),
                        sidecar.model_id,
                        config.model_id()
                    )));
                }
                Ok(Box::new(ReferenceEncoder::load_checkpoint(dir)?))
            }
        },
        EncoderSpec::Adapter(id) => Err(ProbeError::Config(format!(
            "no adapter is registered for model {id:?}; this build ships only the reference encoder"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reference_spec() {
        let spec: EncoderSpec = "reference:dim=128,seed=7".parse().unwrap();
        assert_eq!(
            spec,
            EncoderSpec::Reference(ReferenceConfig {
                dim: 128,
                seed: 7,
                ..Default::default()
            })
        );
        let spec: EncoderSpec = "reference:dim=32,seed=1,layers=12,buckets=512".parse().unwrap();
        let EncoderSpec::Reference(c) = spec else { panic!() };
        assert_eq!((c.layers, c.buckets), (12, 512));
        assert!("reference:dim".parse::<EncoderSpec>().is_err());
        assert!("reference:width=3".parse::<EncoderSpec>().is_err());
    }

    #[test]
    fn adapter_ids_pass_through_but_do_not_load() {
        let spec: EncoderSpec = "microsoft/BiomedNLP-PubMedBERT".parse().unwrap();
        assert!(matches!(spec, EncoderSpec::Adapter(_)));
        assert!(load_encoder(&spec, None).is_err());
    }
}
